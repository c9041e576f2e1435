"""Deterministic 64-bit xorshift generator.

All randomness in the workbench flows through this generator so that runs
are reproducible bit-for-bit and ports to other languages can agree on
every sampled value.  The step function is the classic xorshift64 with
shift constants (13, 7, 17).  A seed of 0 (which xorshift cannot accept)
is remapped to a fixed odd constant.
"""

MASK64 = (1 << 64) - 1
ZERO_SEED_SUBSTITUTE = 0x9E3779B97F4A7C15


class XorShift64:
    def __init__(self, seed: int = 0):
        seed &= MASK64
        self.state = seed if seed != 0 else ZERO_SEED_SUBSTITUTE

    def next_u64(self) -> int:
        x = self.state
        x ^= (x << 13) & MASK64
        x ^= x >> 7
        x ^= (x << 17) & MASK64
        self.state = x
        return x

    def below(self, n: int) -> int:
        """Uniform-ish integer in [0, n). Modulo bias is acceptable at desk scale."""
        if n <= 0:
            raise ValueError("below() needs a positive bound")
        return self.next_u64() % n

    def choice(self, seq):
        if not seq:
            raise ValueError("choice() on empty sequence")
        return seq[self.below(len(seq))]

    def coin(self) -> bool:
        return self.next_u64() & 1 == 1

    def shuffle(self, items: list) -> list:
        """Fisher-Yates in place; returns the list for chaining."""
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]
        return items
