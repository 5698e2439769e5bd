"""Counter-based random numbers keyed by lattice coordinates.

Every uniform variate is a pure function of ``(seed, word0, word1, purpose,
component, round)``, evaluated with the Philox4x32-10 block cipher.  For
lattice simulation ``word0``/``word1`` are the innovation coordinates
``(s, t)``, so a site's draws never depend on the window size, on the
order in which sites are visited or on how work is split across threads.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "philox4x32",
    "CounterStreams",
    "Stream",
    "INNOVATION",
    "THINNING",
    "THINNING_PER_INDIVIDUAL",
    "SEQUENTIAL",
]

# purpose tags, stored in the top byte of the third counter word
INNOVATION = 1
THINNING = 2
THINNING_PER_INDIVIDUAL = 3
SEQUENTIAL = 15

_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = 0x9E3779B9
_W1 = 0xBB67AE85
_MASK32 = np.uint64(0xFFFFFFFF)
_SHIFT32 = np.uint64(32)
_OFFSET = 1 << 31
_MAX_COMPONENT = 1 << 24


def philox4x32(counter, key, rounds: int = 10) -> np.ndarray:
    """Vectorized Philox4x32 block function.

    Parameters
    ----------
    counter : array_like, shape (4, ...)
        Counter words; anything castable to uint32.
    key : array_like, shape (2,)
        Key words.
    rounds : int
        Number of rounds (10 for the standard Philox4x32-10).

    Returns
    -------
    numpy.ndarray
        uint32 array with the same shape as ``counter``.
    """
    c = np.asarray(counter).astype(np.uint64) & _MASK32
    c0, c1, c2, c3 = c[0], c[1], c[2], c[3]
    k0, k1 = (int(w) & 0xFFFFFFFF for w in key)
    for r in range(rounds):
        if r:
            k0 = (k0 + _W0) & 0xFFFFFFFF
            k1 = (k1 + _W1) & 0xFFFFFFFF
        p0 = _M0 * c0
        p1 = _M1 * c2
        c0, c1, c2, c3 = (
            (p1 >> _SHIFT32) ^ c1 ^ np.uint64(k0),
            p1 & _MASK32,
            (p0 >> _SHIFT32) ^ c3 ^ np.uint64(k1),
            p0 & _MASK32,
        )
    return np.stack([c0, c1, c2, c3]).astype(np.uint32)


def _to_unit(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # 53-bit double in [0, 1) from two 32-bit words
    hi = (a >> np.uint32(5)).astype(np.float64)
    lo = (b >> np.uint32(6)).astype(np.float64)
    return (hi * 67108864.0 + lo) / 9007199254740992.0


def _seed_key(seed: int) -> tuple[int, int]:
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return seed & 0xFFFFFFFF, seed >> 32


class CounterStreams:
    """A batch of independent streams, one per (word0, word1) pair.

    Parameters
    ----------
    seed : int
        64-bit seed, used as the Philox key.
    word0, word1 : array_like of int
        Per-stream identifiers (reduced modulo 2**32).
    purpose : int
        Purpose tag separating e.g. innovation draws from thinning draws.
    """

    def __init__(self, seed: int, word0, word1, purpose: int):
        self.seed = int(seed)
        self._key = _seed_key(seed)
        w0 = np.asarray(word0, dtype=np.int64).ravel()
        w1 = np.asarray(word1, dtype=np.int64).ravel()
        w0, w1 = np.broadcast_arrays(w0, w1)
        self._w0 = (w0 & 0xFFFFFFFF).astype(np.uint32)
        self._w1 = (w1 & 0xFFFFFFFF).astype(np.uint32)
        self.purpose = int(purpose)

    @classmethod
    def for_sites(cls, seed: int, s, t, purpose: int) -> "CounterStreams":
        """Streams keyed by (possibly negative) lattice coordinates."""
        s = np.asarray(s, dtype=np.int64) + _OFFSET
        t = np.asarray(t, dtype=np.int64) + _OFFSET
        return cls(seed, s, t, purpose)

    @property
    def size(self) -> int:
        return self._w0.size

    def with_purpose(self, purpose: int) -> "CounterStreams":
        other = object.__new__(CounterStreams)
        other.seed, other._key = self.seed, self._key
        other._w0, other._w1 = self._w0, self._w1
        other.purpose = int(purpose)
        return other

    def uniform(self, component: int = 0, rnd=0, idx=None) -> np.ndarray:
        """Uniform(0, 1) variates, one per stream (or per selected stream).

        ``component`` and ``rnd`` select an independent coordinate of each
        stream; ``idx`` restricts evaluation to a subset of the streams
        (repeats allowed) and ``rnd`` may be an array aligned with it.
        """
        if not 0 <= component < _MAX_COMPONENT:
            raise ValueError(f"component tag out of range: {component}")
        w0, w1 = self._w0, self._w1
        if idx is not None:
            w0, w1 = w0[idx], w1[idx]
        tag = np.uint32((self.purpose << 24) | component)
        counter = np.empty((4, w0.size), dtype=np.uint32)
        counter[0] = w0
        counter[1] = w1
        counter[2] = tag
        counter[3] = (np.asarray(rnd, dtype=np.int64) & 0xFFFFFFFF).astype(np.uint32)
        out = philox4x32(counter, self._key)
        return _to_unit(out[0], out[1])


class Stream:
    """A sequential random stream for scalar or batch draws.

    Successive calls hand out disjoint blocks of positions, so the values
    depend only on ``(seed, stream_id)`` and the sequence of requests.

    >>> s = Stream(7)
    >>> u = s.random(3)
    >>> u.shape
    (3,)
    """

    def __init__(self, seed: int, stream_id: int = 0):
        _seed_key(seed)
        self.seed = int(seed)
        self.stream_id = int(stream_id) & 0xFFFFFFFF
        self.position = 0

    def take(self, n: int) -> CounterStreams:
        """Reserve the next ``n`` positions as a batch of streams."""
        if self.position + n > 2**32:
            raise OverflowError("stream exhausted (2**32 positions)")
        pos = np.arange(self.position, self.position + n, dtype=np.int64)
        self.position += n
        return CounterStreams(self.seed, pos, self.stream_id, SEQUENTIAL)

    def random(self, size: int | None = None):
        n = 1 if size is None else int(size)
        u = self.take(n).uniform()
        return float(u[0]) if size is None else u
