from functools import lru_cache


MASK64 = (1 << 64) - 1


@lru_cache(maxsize=1 << 16)
def token_hash(token):
    """64-bit multiplicative mix of a token word (splitmix64 finalizer)."""
    z = (token + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)
