"""Deterministic 64-bit stream seeds.

derive_stream_seed(master, index) = mix64(master XOR rotl64(index, 32)),
where mix64 is the SplitMix64 output function:

    z = (x + 0x9E3779B97F4A7C15) mod 2^64
    z = (z XOR (z >> 30)) * 0xBF58476D1CE4E5B9 mod 2^64
    z = (z XOR (z >> 27)) * 0x94D049BB133111EB mod 2^64
    return z XOR (z >> 31)

mix64 is a bijection on 64-bit words and, for a fixed master, the map
index -> master XOR rotl64(index, 32) is injective, so distinct indices
always give distinct seeds.
"""

MASK64 = (1 << 64) - 1

# stream domains, one per kind of random draw
CODEBOOK = 0xC0DE
TRIAL = 0x7E57
BINS = 0xB125


def rotl64(x: int, r: int) -> int:
    x &= MASK64
    return ((x << r) | (x >> (64 - r))) & MASK64


def mix64(x: int) -> int:
    z = (x + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_stream_seed(master: int, index: int) -> int:
    return mix64((master & MASK64) ^ rotl64(index, 32))


def stream_seed(master: int, domain: int, index: int) -> int:
    return derive_stream_seed(derive_stream_seed(master, domain), index)
