"""Moments of temporal and Haar ensembles in the symmetric subspace.

Every k-fold tensor power ``|psi><psi|^{(x)k}`` of a qubit state lives on
the (k+1)-dimensional symmetric subspace, so all moments are stored as
(k+1)x(k+1) matrices in the Dicke basis ``|D_m>``, m = number of ones.
The Haar moment there is simply ``I / (k+1)``.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import drives

K_CAP = 8
DEFAULT_KMAX = 4


class NumericalInvariantError(ArithmeticError):
    """A computed quantity left its mathematically allowed range."""


def _binomial_roots(k):
    return np.sqrt([math.comb(k, m) for m in range(k + 1)])


def embed_symmetric(psi, k):
    """Dicke-basis amplitudes of ``psi^{(x)k}``: ``sqrt(C(k, m)) a^(k-m) b^m``."""
    if k < 1:
        raise ValueError("moment order must be >= 1")
    a, b = complex(psi[0]), complex(psi[1])
    m = np.arange(k + 1)
    return _binomial_roots(k) * a ** (k - m) * b ** m


def embed_batch(a, b, k):
    """:func:`embed_symmetric` for arrays of amplitudes; returns shape ``(n, k+1)``."""
    out = np.empty((len(a), k + 1), dtype=complex)
    roots = _binomial_roots(k)
    apow = np.ones_like(a)
    pows_a = [apow]
    for _ in range(k):
        pows_a.append(pows_a[-1] * a)
    bpow = np.ones_like(b)
    for m in range(k + 1):
        out[:, m] = roots[m] * pows_a[k - m] * bpow
        bpow = bpow * b
    return out


@dataclass(frozen=True)
class SymmetricMoment:
    """Mean of ``|v><v|`` over the accumulated states, ``v`` the Dicke embedding."""

    k: int
    matrix: np.ndarray
    weight: int = 0

    @property
    def dim(self):
        return self.k + 1


def empty_moment(k):
    return SymmetricMoment(k, np.zeros((k + 1, k + 1), dtype=complex), 0)


def haar_moment(k):
    if k < 1:
        raise ValueError("moment order must be >= 1")
    return SymmetricMoment(k, np.eye(k + 1, dtype=complex) / (k + 1), 0)


def state_moment(psi, k):
    v = embed_symmetric(psi, k)
    return SymmetricMoment(k, np.outer(v, v.conj()), 1)


def accumulate(moment, psi):
    """Fold one more state into the running mean."""
    v = embed_symmetric(psi, moment.k)
    w = moment.weight + 1
    matrix = moment.matrix + (np.outer(v, v.conj()) - moment.matrix) / w
    return SymmetricMoment(moment.k, matrix, w)


def batch_moment(states, k):
    """Moment of an ``(n, 2)`` array of spinors in one shot."""
    states = np.asarray(states, dtype=complex)
    C = embed_batch(states[:, 0], states[:, 1], k)
    return SymmetricMoment(k, C.T @ C.conj() / len(states), len(states))


def merge(moments):
    """Weighted average of moments of the same order (order-independent)."""
    moments = list(moments)
    k = moments[0].k
    if any(m.k != k for m in moments):
        raise ValueError("cannot merge moments of different order")
    total = sum(m.weight for m in moments)
    if total == 0:
        return empty_moment(k)
    acc = np.sum([m.weight * m.matrix for m in moments], axis=0)
    return SymmetricMoment(k, acc / total, total)


def partial_trace(moment):
    """Trace out one copy: order-k moment -> order-(k-1) moment in the Dicke basis."""
    k = moment.k
    if k < 2:
        raise ValueError("need k >= 2 to trace out a copy")
    M = moment.matrix
    m = np.arange(k)
    keep0 = np.sqrt(k - m) / math.sqrt(k)
    keep1 = np.sqrt(m + 1) / math.sqrt(k)
    reduced = (np.outer(keep0, keep0) * M[:k, :k]
               + np.outer(keep1, keep1) * M[1:, 1:])
    return SymmetricMoment(k - 1, reduced, moment.weight)


def hermitian_eigenvalues(M, atol=1e-10):
    """Eigenvalues of a small Hermitian matrix, ascending."""
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("expected a square matrix")
    if M.shape[0] > 16:
        raise ValueError("matrices larger than 16x16 are not supported")
    if not np.allclose(M, M.conj().T, rtol=0, atol=atol):
        raise ValueError("matrix is not Hermitian within tolerance")
    return np.linalg.eigvalsh(0.5 * (M + M.conj().T))


def trace_distance(A, B):
    """Half the trace norm of ``A - B``; accepts moments or plain matrices."""
    if isinstance(A, SymmetricMoment) and isinstance(B, SymmetricMoment):
        if A.k != B.k:
            raise ValueError(f"moment orders differ: {A.k} vs {B.k}")
        A, B = A.matrix, B.matrix
    A, B = np.asarray(A), np.asarray(B)
    if A.shape != B.shape:
        raise ValueError("shape mismatch")
    d = 0.5 * float(np.abs(hermitian_eigenvalues(A - B)).sum())
    if not -1e-9 <= d <= 1 + 1e-9:
        raise NumericalInvariantError(f"trace distance {d!r} outside [0, 1]")
    return min(max(d, 0.0), 1.0)


def delta_to_haar(moment):
    return trace_distance(moment, haar_moment(moment.k))


class MomentAccumulator:
    """Running sums of all moments k = 1..k_max with Kahan-compensated block additions.

    Memory is O(k_max^2) whatever the trajectory length.
    """

    def __init__(self, k_max=DEFAULT_KMAX):
        if not 1 <= k_max <= K_CAP:
            raise ValueError(f"k_max must be in [1, {K_CAP}]")
        self.k_max = k_max
        self.count = 0
        self._sum = {k: np.zeros((k + 1, k + 1), dtype=complex) for k in range(1, k_max + 1)}
        self._comp = {k: np.zeros((k + 1, k + 1), dtype=complex) for k in range(1, k_max + 1)}

    def add(self, states):
        """Add an ``(n, 2)`` block of spinors."""
        if len(states) == 0:
            return
        a, b = states[:, 0], states[:, 1]
        for k in self._sum:
            C = embed_batch(a, b, k)
            block = C.T @ C.conj()
            y = block - self._comp[k]
            t = self._sum[k] + y
            self._comp[k] = (t - self._sum[k]) - y
            self._sum[k] = t
        self.count += len(states)

    def moment(self, k):
        return SymmetricMoment(k, self._sum[k] / self.count, self.count)


@dataclass
class DeltaSeries:
    protocol: dict
    initial: dict
    records: list = field(default_factory=list)

    def __post_init__(self):
        self.records.sort(key=lambda r: (r[1], r[0]))

    @property
    def orders(self):
        return sorted({k for _, k, _ in self.records})

    def curve(self, k):
        rows = [(T, d) for T, kk, d in self.records if kk == k]
        T, d = zip(*rows) if rows else ((), ())
        return np.array(T, dtype=int), np.array(d, dtype=float)

    def value(self, T, k):
        for TT, kk, d in self.records:
            if TT == T and kk == k:
                return d
        raise KeyError((T, k))


def geometric_times(T_max, n=100):
    """About ``n`` distinct integers spread geometrically over ``[1, T_max]``, ``T_max`` included."""
    if T_max < 1:
        raise ValueError("T_max must be >= 1")
    n = min(n, T_max)
    m = n
    while True:
        times = set(np.unique(np.round(np.geomspace(1, T_max, m)).astype(int)).tolist())
        if len(times) >= n:
            return sorted(times | {T_max})
        m += max(1, n - len(times))


def default_sample_times(T_max, protocol=None, n=100):
    """Geometric grid plus every power of ten, and the Fibonacci numbers for that drive."""
    times = set(geometric_times(T_max, n))
    times.update(10 ** e for e in range(len(str(int(T_max)))) if 10 ** e <= T_max)
    if protocol is not None and protocol.kind is drives.DriveKind.FIBONACCI:
        times.update(drives.fibonacci_numbers(T_max))
    return sorted(times)


def _check_times(sample_times):
    sample_times = [int(T) for T in sample_times]
    if not sample_times:
        raise ValueError("no sample times")
    if sample_times[0] < 1 or any(b <= a for a, b in zip(sample_times, sample_times[1:])):
        raise ValueError("sample times must be strictly ascending integers >= 1")
    return sample_times


def delta_series_from_blocks(blocks, k_max, sample_times, protocol=None, initial=None):
    """Stream ``(t0, states)`` blocks and emit trace distances to Haar at the sample times.

    ``T`` in a record counts states ``t = 0..T-1``.  Blocks must be
    contiguous and start at ``t0 = 0``.
    """
    sample_times = _check_times(sample_times)
    acc = MomentAccumulator(k_max)
    haar = {k: haar_moment(k) for k in range(1, k_max + 1)}
    records = []
    pending = iter(sample_times)
    target = next(pending)
    for t0, states in blocks:
        pos = 0
        while target is not None and target <= t0 + len(states):
            acc.add(states[pos:target - t0])
            pos = target - t0
            for k in range(1, k_max + 1):
                mom = acc.moment(k)
                if abs(np.trace(mom.matrix) - 1) > 1e-8:
                    raise NumericalInvariantError(f"moment k={k} lost unit trace at T={target}")
                records.append((target, k, trace_distance(mom, haar[k])))
            target = next(pending, None)
        if target is None:
            break
        acc.add(states[pos:])
    if target is not None:
        raise ValueError(f"trajectory ended before sample time {target}")
    return DeltaSeries(protocol or {}, initial or {}, records)


def delta_series(protocol, psi0, k_max=DEFAULT_KMAX, sample_times=None, T_max=None, initial=None):
    """Trace distances of the temporal-ensemble moments from Haar along one trajectory."""
    if not 1 <= k_max <= K_CAP:
        raise ValueError(f"k_max must be in [1, {K_CAP}]")
    if sample_times is None:
        if T_max is None:
            raise ValueError("give sample_times or T_max")
        sample_times = default_sample_times(T_max, protocol)
    sample_times = _check_times(sample_times)
    if initial is None:
        initial = {"psi0": "({!r},{!r})".format(complex(psi0[0]), complex(psi0[1]))}
    blocks = drives.iter_states(protocol, psi0, sample_times[-1])
    return delta_series_from_blocks(blocks, k_max, sample_times, protocol.describe(), initial)


def states_delta_series(states, k_max=DEFAULT_KMAX, sample_times=None, **meta):
    """Same as :func:`delta_series` for an already computed ``(T, 2)`` array of states."""
    states = np.asarray(states, dtype=complex)
    if sample_times is None:
        sample_times = geometric_times(len(states))
    return delta_series_from_blocks([(0, states)], k_max, sample_times, **meta)
