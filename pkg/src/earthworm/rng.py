"""Reproducible PRNG streams: splitmix64 seeding and xoshiro256++ generation.

Everything here is specified bit-exactly so that runs are reproducible
across machines and reimplementations:

* ``splitmix64`` expands a 64-bit seed into a stream of 64-bit values; it
  derives per-replica seeds and the four xoshiro256++ state words.
* ``Xoshiro256PP`` is the per-run generator (256-bit state).
* Step directions are extracted from 64-bit outputs: ``output % 2d`` when
  ``2d`` is a power of two (equivalently the low bits), otherwise by
  rejection sampling on the top ``ceil(log2(2d))`` bits.

The pure-Python path is authoritative. A numba-compiled block fill is used
on the hot path when available; it is tested word-for-word equal.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1

_SM_GAMMA = 0x9E3779B97F4A7C15
_SM_MUL1 = 0xBF58476D1CE4E5B9
_SM_MUL2 = 0x94D049BB133111EB


def splitmix64_next(state: int) -> tuple[int, int]:
    """Advance a splitmix64 state once; return (new_state, output)."""
    state = (state + _SM_GAMMA) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * _SM_MUL1) & _MASK64
    z = ((z ^ (z >> 27)) * _SM_MUL2) & _MASK64
    return state, z ^ (z >> 31)


def splitmix64_stream(seed: int, count: int) -> list[int]:
    """First ``count`` outputs of the splitmix64 sequence seeded at ``seed``."""
    state = seed & _MASK64
    out = []
    for _ in range(count):
        state, z = splitmix64_next(state)
        out.append(z)
    return out


def derive_seed(seed_base: int, replica_index: int) -> int:
    """Seed for a replica: the ``replica_index``-th splitmix64 output of ``seed_base``.

    Index 0 is the first output. Distinct indexes give disjoint downstream
    generator states, which keeps parallel replicas independent.
    """
    if replica_index < 0:
        raise ValueError(f"replica_index must be >= 0, got {replica_index}")
    state = seed_base & _MASK64
    z = 0
    for _ in range(replica_index + 1):
        state, z = splitmix64_next(state)
    return z


_NUMBA_FILL = None


def _get_numba_fill():
    """Compile (once) the numba block fill; None if numba is unavailable."""
    global _NUMBA_FILL
    if _NUMBA_FILL is not None:
        return _NUMBA_FILL
    try:
        import numba
    except ImportError:
        return None

    @numba.njit(numba.uint64[:](numba.uint64[:], numba.uint64[:]), cache=True)
    def fill(s, out):  # pragma: no cover - exercised via Xoshiro256PP.fill
        s0, s1, s2, s3 = s[0], s[1], s[2], s[3]
        for i in range(out.shape[0]):
            r = s0 + s3
            out[i] = ((r << np.uint64(23)) | (r >> np.uint64(41))) + s0
            t = s1 << np.uint64(17)
            s2 ^= s0
            s3 ^= s1
            s1 ^= s2
            s0 ^= s3
            s2 ^= t
            s3 = (s3 << np.uint64(45)) | (s3 >> np.uint64(19))
        s[0], s[1], s[2], s[3] = s0, s1, s2, s3
        return s

    _NUMBA_FILL = fill
    return fill


class Xoshiro256PP:
    """xoshiro256++ generator with splitmix64 seeding.

    State is four 64-bit words. ``from_seed`` fills them with four
    consecutive splitmix64 outputs, so a single 64-bit seed pins the whole
    stream.
    """

    __slots__ = ("s0", "s1", "s2", "s3")

    def __init__(self, state: tuple[int, int, int, int]):
        if len(state) != 4 or all(w == 0 for w in state):
            raise ValueError("xoshiro256++ state must be four words, not all zero")
        self.s0, self.s1, self.s2, self.s3 = (w & _MASK64 for w in state)

    @classmethod
    def from_seed(cls, seed: int) -> "Xoshiro256PP":
        return cls(tuple(splitmix64_stream(seed, 4)))

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self.s0, self.s1, self.s2, self.s3
        r = (s0 + s3) & _MASK64
        result = ((((r << 23) | (r >> 41)) & _MASK64) + s0) & _MASK64
        t = (s1 << 17) & _MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        self.s0 = s0
        self.s1 = s1
        self.s2 = s2
        self.s3 = (s3 << 45 | s3 >> 19) & _MASK64
        return result

    def fill(self, out: np.ndarray) -> None:
        """Fill a uint64 array with consecutive outputs (hot path).

        Bit-identical to calling :meth:`next_u64` ``len(out)`` times.
        """
        fill = _get_numba_fill()
        if fill is not None:
            s = np.array([self.s0, self.s1, self.s2, self.s3], dtype=np.uint64)
            fill(s, out)
            self.s0, self.s1, self.s2, self.s3 = (int(w) for w in s)
        else:
            for i in range(out.shape[0]):
                out[i] = self.next_u64()

    def next_direction(self, dim: int) -> int:
        """Draw one direction code uniform on [0, 2*dim).

        Power-of-two direction counts take the output modulo 2*dim (its low
        bits); other counts rejection-sample the top ceil(log2(2*dim)) bits,
        so every accepted value is exactly uniform.
        """
        ndirs = 2 * dim
        if ndirs & (ndirs - 1) == 0:
            return self.next_u64() & (ndirs - 1)
        bits = ndirs.bit_length()
        shift = 64 - bits
        while True:
            v = self.next_u64() >> shift
            if v < ndirs:
                return v

    def direction_block(self, dim: int, count: int) -> list[int]:
        """Exactly ``count`` direction codes, consuming outputs as next_direction would."""
        ndirs = 2 * dim
        if ndirs & (ndirs - 1) == 0:
            buf = np.empty(count, dtype=np.uint64)
            self.fill(buf)
            return (buf & np.uint64(ndirs - 1)).tolist()
        return [self.next_direction(dim) for _ in range(count)]

    def state_tuple(self) -> tuple[int, int, int, int]:
        return (self.s0, self.s1, self.s2, self.s3)

    def state_hex(self) -> str:
        """State as 64 hex chars (four 16-char words, s0 first)."""
        return "".join(f"{w:016x}" for w in self.state_tuple())

    @classmethod
    def from_state_hex(cls, hexstate: str) -> "Xoshiro256PP":
        if len(hexstate) != 64:
            raise ValueError(f"expected 64 hex chars of generator state, got {len(hexstate)}")
        return cls(tuple(int(hexstate[16 * i : 16 * (i + 1)], 16) for i in range(4)))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Xoshiro256PP):
            return NotImplemented
        return self.state_tuple() == other.state_tuple()

    def __repr__(self) -> str:
        return f"Xoshiro256PP(state=0x{self.state_hex()})"
