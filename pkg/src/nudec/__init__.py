"""Rate regions and finite-blocklength simulations comparing non-unique and
joint unique decoding for broadcast and interference channels."""

__version__ = "0.1.0"
