"""Time-averaging channel of a drive and the dephasing channels that describe its limit.

For the smoothly kicked drive ``U(t) = exp(-i w t Z) exp(-i t X)``; averaging
over the torus turns the channel into x-dephasing followed by z-dephasing,
which sends every state to ``I/2``.  The finite-T averages here let that
limit be checked numerically, and the residual distance from ``I/2``
measures how far a drive is from being a 1-design.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import drives, moments, su2

MAXIMALLY_MIXED = su2.IDENTITY / 2
_AXES = {"x": 0, "y": 1, "z": 2}


@dataclass(frozen=True)
class ChannelReport:
    protocol: dict
    T: int
    residual: float
    input: str
    trial: int = 0


def running_channel(protocol, rho, T_list):
    """Outputs of the time-averaging channel for every ``T`` in ascending ``T_list``."""
    T_list = [int(T) for T in T_list]
    if not T_list or T_list[0] < 1 or any(b <= a for a, b in zip(T_list, T_list[1:])):
        raise ValueError("T_list must be strictly ascending integers >= 1")
    rho = np.asarray(rho, dtype=complex)
    total = np.zeros((2, 2), dtype=complex)
    comp = np.zeros((2, 2), dtype=complex)
    outputs = []
    targets = iter(T_list)
    target = next(targets)
    done = 0

    def add(block):
        nonlocal total, comp
        part = np.einsum("tij,jk,tlk->il", block, rho, block.conj())
        y = part - comp
        t = total + y
        comp = (t - total) - y
        total = t

    for t0, U in drives.iter_unitaries(protocol, T_list[-1]):
        pos = 0
        while target is not None and target <= t0 + len(U):
            add(U[pos:target - t0])
            pos = target - t0
            done = target
            outputs.append(total / done)
            target = next(targets, None)
        if target is None:
            break
        add(U[pos:])
    return outputs


def time_avg_channel(protocol, rho, T):
    """``(1/T) sum_{t<T} U(t) rho U(t)^dag`` with ``U(0) = I``."""
    if T < 1:
        raise ValueError("T must be >= 1")
    return running_channel(protocol, rho, [T])[0]


def dephasing_channel(axis, rho):
    """Complete dephasing about ``axis``: keeps only that Bloch component."""
    try:
        i = _AXES[axis]
    except KeyError:
        raise ValueError(f"axis must be one of x, y, z; got {axis!r}") from None
    r = su2.density_to_bloch(rho)
    kept = np.zeros(3)
    kept[i] = r[i]
    return su2.bloch_to_density(kept)


def twirl_limit(rho):
    """Analytic infinite-time channel of the smooth drive: z-dephasing after x-dephasing."""
    return dephasing_channel("z", dephasing_channel("x", rho))


def residual(rho):
    """Trace distance of ``rho`` from the maximally mixed state."""
    return moments.trace_distance(rho, MAXIMALLY_MIXED)


def depolarization_residual(protocol, T_list, trials, rng=None, inputs=None):
    """Residual distance from ``I/2`` after time averaging, per ``(T, trial)``.

    Inputs are Haar-random pure states drawn from ``rng`` unless given
    explicitly as density matrices.  Reports come back sorted by ``T``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if inputs is None:
        if rng is None:
            raise ValueError("need rng or explicit inputs")
        inputs = [su2.density(su2.haar_random_spinor(rng)) for _ in range(trials)]
    inputs = list(inputs)[:trials]
    T_list = sorted(set(int(T) for T in T_list))
    desc = protocol.describe()
    reports = []
    for trial, rho in enumerate(inputs):
        label = "bloch=({:.17g},{:.17g},{:.17g})".format(*su2.density_to_bloch(rho))
        for T, out in zip(T_list, running_channel(protocol, rho, T_list)):
            reports.append(ChannelReport(desc, T, residual(out), label, trial))
    reports.sort(key=lambda r: (r.T, r.trial))
    return reports


def fit_power_law(T, values):
    """Least-squares fit of ``values ~ A T^(-p)`` in log-log space; returns ``(A, p)``.

    Nonpositive values are dropped; fewer than two usable distinct times
    gives ``(nan, nan)``.
    """
    T = np.asarray(T, dtype=float)
    values = np.asarray(values, dtype=float)
    keep = values > 0
    if len(np.unique(T[keep])) < 2:
        return math.nan, math.nan
    slope, intercept = np.polyfit(np.log(T[keep]), np.log(values[keep]), 1)
    return float(math.exp(intercept)), float(-slope)


def search_plateau_witness(protocol, T, k=2, n_theta=13, n_phi=12):
    """Grid search over initial Bloch angles for the largest order-``k`` distance at time ``T``.

    Returns ``(theta, phi, delta)``.  Used to exhibit states that fail to
    equilibrate at a given moment order.
    """
    best = (0.0, 0.0, -1.0)
    for theta in np.linspace(0, np.pi, n_theta):
        for phi in np.linspace(0, 2 * np.pi, n_phi, endpoint=False):
            psi = su2.bloch_to_spinor(theta, phi)
            d = moments.delta_series(protocol, psi, k, [T]).value(T, k)
            if d > best[2]:
                best = (float(theta), float(phi), d)
    return best
