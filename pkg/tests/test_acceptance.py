"""Acceptance gate: one test per criterion, each with its own runtime budget.

Run directly (``python3 tests/test_acceptance.py``) or through pytest; both
print one PASS/FAIL line per criterion.
"""
import math
import time
import tracemalloc

import numpy as np
import pytest

from hse_sim import channels, drives, moments, su2, tomo

pytestmark = pytest.mark.acceptance

SEED = 2024
FIB_PAIRS = [(0.43, 0.37), (0.36, 0.18), (0.39, 0.39)]


class budget:
    def __init__(self, seconds):
        self.seconds = seconds

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start
        if exc[0] is None:
            assert self.elapsed < self.seconds, f"took {self.elapsed:.2f}s, budget {self.seconds}s"


def haar_states(n, seed=SEED):
    return [su2.haar_random_spinor(su2.substream(seed, i)) for i in range(n)]


def floquet_two_cycle_delta(theta):
    """Closed form for the eigenstate plateau with equal kick angles.

    U_F = U_y U_x = c^2 - i(cs X + cs Y - s^2 Z), so the eigenaxis is
    n = (c, c, -s)/sqrt(1 + c^2).  The orbit alternates n and R_x(2 theta) n,
    and the averaged Bloch vector has length c * sqrt(2 / (1 + c^2)).
    """
    c = math.cos(theta)
    return c / math.sqrt(2 * (1 + c * c))


def two_copy_distance(states):
    """Brute force on the 4-dim two-copy space."""
    acc = np.zeros((4, 4), dtype=complex)
    for psi in states:
        v = np.kron(psi, psi)
        acc += np.outer(v, v.conj())
    acc /= len(states)
    swap = np.eye(4)[[0, 2, 1, 3]]
    haar = (np.eye(4) + swap) / 6
    return 0.5 * np.abs(np.linalg.eigvalsh(acc - haar)).sum()


def test_criterion_1_moment_identities():
    with budget(1.0):
        protocols = [drives.floquet(math.pi / 8, math.pi / 8), drives.smooth_qp(),
                     drives.fibonacci(0.38 * math.pi, 0.22 * math.pi)]
        for p in protocols:
            for psi in haar_states(20):
                series = moments.delta_series(p, psi, 4, [1])
                for k in range(1, 5):
                    assert abs(series.value(1, k) - k / (k + 1)) < 1e-10
        for k in range(1, moments.K_CAP + 1):
            assert np.array_equal(moments.haar_moment(k).matrix, np.eye(k + 1) / (k + 1))


def test_criterion_2_symmetric_subspace_oracle():
    rng = np.random.default_rng(SEED)
    with budget(5.0):
        for i in range(20):
            p = drives.fibonacci(*(rng.random(2) * math.pi))
            traj = drives.evolve(p, su2.haar_random_spinor(rng), 50)
            dicke = moments.states_delta_series(traj.states, 2, [50]).value(50, 2)
            assert abs(dicke - two_copy_distance(traj.states)) < 1e-9, i


def test_criterion_3a_floquet_eigenstate_plateau():
    th = math.pi / 8
    with budget(10.0):
        expected = floquet_two_cycle_delta(th)
        assert abs(expected - 0.4798) < 1e-4
        for psi in drives.floquet_eigenstates(th, th):
            d = moments.delta_series(drives.floquet(th, th), psi, 1, [200]).value(200, 1)
            assert abs(d - expected) <= 0.03


def test_criterion_3b_floquet_random_states_plateau():
    th = math.pi / 8
    p = drives.floquet(th, th)
    times = list(range(151, 201))
    with budget(10.0):
        ok = 0
        for psi in haar_states(100):
            c = moments.delta_series(p, psi, 1, times).curve(1)[1]
            if c[-1] > 0.15 and c.max() - c.min() < 0.05:
                ok += 1
        print(f"criterion 3b: {ok}/100 random states plateau above 0.15")
    assert ok >= 80, f"only {ok}/100 states satisfy the plateau condition"


def test_criterion_4_smooth_first_moment_decay():
    p = drives.smooth_qp()
    with budget(30.0):
        for psi in haar_states(10):
            s = moments.delta_series(p, psi, 1, [100, 10_000])
            assert s.value(10_000, 1) < 0.02
            assert s.value(10_000, 1) < s.value(100, 1)
        theta, phi, d2 = channels.search_plateau_witness(p, 10_000, k=2)
        print(f"criterion 4: second-moment witness theta={theta:.4f} phi={phi:.4f} delta2={d2:.4f}")
        assert d2 > 0.03


def test_criterion_5_fibonacci_decay_trends():
    with budget(60.0):
        p = drives.fibonacci(0.38 * math.pi, 0.22 * math.pi)
        named = {"0": (0, 0), "1": (math.pi, 0), "+": (math.pi / 2, 0), "-": (math.pi / 2, math.pi)}
        for label, (theta, phi) in named.items():
            s = moments.delta_series(p, su2.bloch_to_spinor(theta, phi), 4, [100, 987])
            for k in range(1, 5):
                assert s.value(987, k) < s.value(100, k), (label, k)
        psi0 = np.array([1, 0j])
        for a, b in FIB_PAIRS:
            s = moments.delta_series(drives.fibonacci(a * math.pi, b * math.pi), psi0, 4, [100, 987])
            for k in range(1, 5):
                assert s.value(987, k) < s.value(100, k), ((a, b), k)
        s = moments.delta_series(drives.fibonacci(0.11 * math.pi, 0.41 * math.pi), psi0, 1, [1000, 100_000])
        assert s.value(100_000, 1) < s.value(1000, 1)


def test_criterion_6_twirl_oracle():
    with budget(20.0):
        inputs = [su2.density(psi) for psi in haar_states(10)]
        reports = channels.depolarization_residual(drives.smooth_qp(), [100_000], 10, inputs=inputs)
        assert len(reports) == 10
        assert all(r.residual < 0.01 for r in reports), max(r.residual for r in reports)
        rng = np.random.default_rng(SEED)
        for _ in range(100):
            r = su2.spinor_to_bloch(su2.haar_random_spinor(rng)) * rng.random()
            out = channels.twirl_limit(su2.bloch_to_density(r))
            assert np.abs(out - np.eye(2) / 2).max() <= 1e-14


def test_criterion_7_tomography_round_trip():
    cal = tomo.TomoCalibration(1.0, 0.7, 0.92)
    p = drives.fibonacci(0.38 * math.pi, 0.22 * math.pi)
    with budget(30.0):
        traj = drives.evolve(p, su2.bloch_to_spinor(0.9, 2.1), 100)
        _, recovered = tomo.recover_trajectory(tomo.measure_trajectory(traj.states, cal), cal)
        for psi, chi in zip(traj.states, recovered):
            assert np.abs(su2.density(psi) - su2.density(chi)).max() < 1e-10

        traj = drives.evolve(p, np.array([1, 0j]), 987)
        ideal = moments.states_delta_series(traj.states, 1, [987]).value(987, 1)
        records = tomo.measure_trajectory(traj.states, cal, shots=10_000, seed=SEED)
        _, recovered = tomo.recover_trajectory(records, cal)
        noisy = moments.states_delta_series(recovered, 1, [987]).value(987, 1)
        print(f"criterion 7: ideal {ideal:.5f}, reconstructed {noisy:.5f}")
        assert abs(noisy - ideal) < 0.05


def _fibonacci_run(T):
    p = drives.fibonacci(0.38 * math.pi, 0.22 * math.pi)
    return moments.delta_series(p, np.array([1, 0j]), 4, moments.geometric_times(T, 120))


def test_criterion_8_performance_and_memory():
    with budget(10.0) as b:
        series = _fibonacci_run(10 ** 6)
    print(f"criterion 8: 10^6 steps in {b.elapsed:.2f}s")
    assert len(series.records) == 4 * 120

    peaks = {}
    for T in (2 * 10 ** 5, 10 ** 6):
        tracemalloc.start()
        _fibonacci_run(T)
        peaks[T] = tracemalloc.get_traced_memory()[1]
        tracemalloc.stop()
    print(f"criterion 8: peak traced memory {peaks}")
    # both runs are well past the first few chunks; fivefold more steps must not grow the working set
    assert peaks[10 ** 6] < 1.1 * peaks[2 * 10 ** 5]


if __name__ == "__main__":
    import sys

    results = []
    for name, fn in sorted((n, f) for n, f in globals().items() if n.startswith("test_criterion_")):
        try:
            fn()
            results.append((name, "PASS", ""))
        except AssertionError as exc:
            results.append((name, "FAIL", str(exc)))
    for name, status, why in results:
        print(f"{status}  {name}" + (f"  ({why})" if why else ""))
    sys.exit(any(s == "FAIL" for _, s, _ in results))
