import numpy as np
import pytest

from hse_sim import drives, moments, su2, tomo
from conftest import random_density, random_spinor

CAL = tomo.TomoCalibration(1.0, 0.7, 0.92)


def test_expectations_examples():
    cal = tomo.TomoCalibration(1.0, 0.7)
    rec = tomo.pl_expectations(su2.density(np.array([1, 0j])), cal)
    assert np.allclose(rec.E, [1.0, 0.7, 0.85, 0.85, 0.85, 0.85], rtol=0, atol=1e-15)
    rec = tomo.pl_expectations(np.eye(2) / 2, cal)
    assert np.allclose(rec.E, [0.85] * 6, rtol=0, atol=1e-15)
    plus = su2.density(np.array([1, 1]) / np.sqrt(2))
    rec = tomo.pl_expectations(plus, cal)
    assert np.allclose(rec.E, [0.85, 0.85, 0.85, 0.85, 0.7, 1.0], rtol=0, atol=1e-15)


def test_noiseless_records_balance(rng):
    rec = tomo.pl_expectations(random_density(rng), CAL)
    E = rec.E
    assert abs(E[0] + E[1] - E[2] - E[3]) < 1e-10 and abs(E[2] + E[3] - E[4] - E[5]) < 1e-10


def test_calibration_validation():
    with pytest.raises(tomo.CalibrationError):
        tomo.TomoCalibration(0.7, 1.0)
    with pytest.raises(tomo.CalibrationError):
        tomo.TomoCalibration(1.0, 0.7, 0.0)


def test_round_trip_random_states(rng):
    for _ in range(100):
        rho = random_density(rng)
        state = tomo.reconstruct(tomo.pl_expectations(rho, CAL), CAL)
        assert np.abs(state.density - rho).max() < 1e-12
        assert state.p0 + state.p1 == 1


def test_equal_expectations_give_center():
    state = tomo.reconstruct(tomo.TomoRecord([0.8] * 6), CAL)
    assert state.p0 == 0.5 and state.alpha == 0 and state.beta == 0


def test_reconstruction_is_linear(rng):
    r1 = tomo.TomoRecord(rng.random(6) + 0.5)
    r2 = tomo.TomoRecord(rng.random(6) + 0.5)
    a = 0.37
    mix = tomo.TomoRecord(a * np.array(r1.E) + (1 - a) * np.array(r2.E))
    s, s1, s2 = (tomo.reconstruct(r, CAL) for r in (mix, r1, r2))
    for name in ("p0", "alpha", "beta"):
        assert abs(getattr(s, name) - (a * getattr(s1, name) + (1 - a) * getattr(s2, name))) < 1e-12


def test_unphysical_reconstruction_is_representable():
    state = tomo.reconstruct(tomo.TomoRecord([1.0, 0.7, 0.6, 1.1, 0.6, 1.1]), CAL)
    assert not state.physical
    assert np.linalg.norm(state.bloch) > 1


def test_shot_noise_statistics():
    rec = tomo.pl_expectations(su2.density(su2.bloch_to_spinor(1.0, 0.3)), CAL)
    rng = np.random.default_rng(9)
    N = 1000
    draws = np.array([tomo.add_shot_noise(rec, N, rng).E for _ in range(10_000)])
    E = np.array(rec.E)
    assert np.abs(draws.mean(axis=0) - E).max() < 5 * np.sqrt(E / N / 10_000).max()
    assert np.all(np.abs(draws.var(axis=0) / (E / N) - 1) < 0.1)
    a = tomo.add_shot_noise(rec, 500, np.random.default_rng(1))
    b = tomo.add_shot_noise(rec, 500, np.random.default_rng(1))
    assert a == b and a.shots == 500


def test_noise_error_scales_like_inverse_sqrt_shots():
    rho = su2.density(su2.bloch_to_spinor(1.2, 0.7))
    r_true = su2.density_to_bloch(rho)
    rec = tomo.pl_expectations(rho, CAL)
    rng = np.random.default_rng(4)
    errs = {}
    for N in (100, 10_000):
        e = [np.linalg.norm(tomo.reconstruct(tomo.add_shot_noise(rec, N, rng), CAL).bloch - r_true) for _ in range(2000)]
        errs[N] = np.sqrt(np.mean(np.square(e)))
    assert 8 < errs[100] / errs[10_000] < 12


def test_polarization_correction():
    state = tomo.ReconstructedState.from_bloch([0.1, 0.2, 0.3])
    assert tomo.polarization_correct(state, 1.0) == state
    mixed = tomo.ReconstructedState.from_bloch([0, 0, 0.92])
    fixed = tomo.polarization_correct(mixed, 0.92)
    assert abs(fixed.p0 - 1) < 1e-15 and abs(fixed.p1) < 1e-15
    with pytest.raises(tomo.CalibrationError):
        tomo.polarization_correct(state, 0)


def test_depolarize_then_correct_then_purify(rng):
    psi = random_spinor(rng)
    rho = tomo.depolarize(su2.density(psi), 0.92)
    state = tomo.reconstruct(tomo.pl_expectations(rho, CAL), CAL)
    back = tomo.purify(tomo.polarization_correct(state, 0.92))
    assert su2.same_state(back, psi, atol=1e-12)


def test_purify_examples(rng):
    assert np.allclose(tomo.purify(tomo.ReconstructedState.from_bloch([0, 0, 0.5])), [1, 0])
    r = su2.spinor_to_bloch(random_spinor(rng))
    out = su2.spinor_to_bloch(tomo.purify(tomo.ReconstructedState.from_bloch(r)))
    assert np.allclose(out, r, atol=1e-12)
    r = rng.normal(size=3) * 0.3
    out = su2.spinor_to_bloch(tomo.purify(tomo.ReconstructedState.from_bloch(r)))
    assert np.linalg.norm(np.cross(out, r)) < 1e-10 and np.dot(out, r) > 0
    with pytest.raises(ValueError):
        tomo.purify(tomo.ReconstructedState.from_bloch([0, 0, 1e-12]))


def test_noiseless_pipeline_recovers_trajectory():
    traj = drives.evolve(drives.fibonacci(0.38 * np.pi, 0.22 * np.pi), su2.bloch_to_spinor(0.4, 2.2), 100)
    _, recovered = tomo.recover_trajectory(tomo.measure_trajectory(traj.states, CAL), CAL)
    for psi, chi in zip(traj.states, recovered):
        assert 1 - su2.overlap(psi, chi) < 1e-10


def test_reconstructed_series_converges_with_shots():
    p = drives.fibonacci(0.38 * np.pi, 0.22 * np.pi)
    psi0 = np.array([1, 0j])
    times = moments.geometric_times(300, 30)
    traj = drives.evolve(p, psi0, 300)
    ideal = np.array([d for _, _, d in moments.states_delta_series(traj.states, 1, times).records])
    deviation = []
    for shots in (100, 10_000, 1_000_000):
        _, rec = tomo.recover_trajectory(tomo.measure_trajectory(traj.states, CAL, shots, seed=5), CAL)
        got = np.array([d for _, _, d in moments.states_delta_series(rec, 1, times).records])
        deviation.append(np.abs(got - ideal).mean())
    assert deviation[0] > deviation[1] > deviation[2]


def test_record_file_round_trip(tmp_path):
    rng = np.random.default_rng(2)
    recs = [tomo.add_shot_noise(tomo.pl_expectations(random_density(rng), CAL), 1000, rng) for _ in range(20)]
    recs.append(tomo.pl_expectations(random_density(rng), CAL))
    path = tmp_path / "r.txt"
    tomo.write_records(path, recs, CAL, seed=17)
    back, cal, seed = tomo.read_records(path)
    assert back == recs and cal == CAL and seed == 17


def test_malformed_record_names_line(tmp_path):
    path = tmp_path / "bad.txt"
    tomo.write_records(path, [tomo.TomoRecord([1.0] * 6)] * 3, CAL)
    lines = path.read_text().splitlines()
    lines[5] = "1 0.9 0.8 oops 0.8 0.8 0.8 0"
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(tomo.RecordParseError) as info:
        tomo.read_records(path)
    assert info.value.lineno == 6 and ":6:" in str(info.value)
