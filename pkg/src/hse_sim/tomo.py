"""Six-sequence photoluminescence tomography of a qubit, forward model and inversion.

Density matrices are parametrized as ``[[p0, alpha + i beta], [alpha - i beta, p1]]``.
Sequences 1-2 read the populations, 3-4 the coherence component ``beta`` and
5-6 the component ``alpha``; inversion uses exactly that coupling, so a
noiseless record reconstructs its state to rounding error.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from . import su2

log = logging.getLogger(__name__)


class CalibrationError(ValueError):
    pass


class RecordParseError(ValueError):
    def __init__(self, path, lineno, message):
        super().__init__(f"{path}:{lineno}: {message}")
        self.path = path
        self.lineno = lineno


@dataclass(frozen=True)
class TomoCalibration:
    l0: float
    l1: float
    p_e: float = 1.0

    def __post_init__(self):
        if not (self.l0 > self.l1 > 0):
            raise CalibrationError(f"need l0 > l1 > 0, got l0={self.l0!r}, l1={self.l1!r}")
        if not (0 < self.p_e <= 1):
            raise CalibrationError(f"polarization efficiency must lie in (0, 1], got {self.p_e!r}")

    @property
    def contrast(self):
        return self.l0 - self.l1


@dataclass(frozen=True)
class TomoRecord:
    E: tuple
    shots: int = 0

    def __post_init__(self):
        E = tuple(float(e) for e in self.E)
        if len(E) != 6:
            raise ValueError("a record holds exactly six expectations")
        object.__setattr__(self, "E", E)


@dataclass(frozen=True)
class ReconstructedState:
    p0: float
    p1: float
    alpha: float
    beta: float

    @property
    def bloch(self):
        return np.array([2 * self.alpha, -2 * self.beta, self.p0 - self.p1])

    @property
    def density(self):
        c = complex(self.alpha, self.beta)
        return np.array([[self.p0, c], [c.conjugate(), self.p1]])

    @property
    def physical(self):
        return self.alpha ** 2 + self.beta ** 2 <= self.p0 * self.p1 + 1e-15

    @classmethod
    def from_bloch(cls, r):
        rx, ry, rz = (float(x) for x in r)
        p0 = 0.5 * (1 + rz)
        return cls(p0, 1 - p0, rx / 2, -ry / 2)


def _parameters(rho):
    rho = np.asarray(rho)
    return rho[0, 0].real, rho[1, 1].real, rho[0, 1].real, rho[0, 1].imag


def pl_expectations(rho, cal):
    """Noiseless PL expectations of the six tomography sequences for ``rho``."""
    p0, p1, alpha, beta = _parameters(rho)
    l0, l1 = cal.l0, cal.l1
    return TomoRecord((
        l0 * p0 + l1 * p1,
        l0 * p1 + l1 * p0,
        l0 * (1 - 2 * beta) / 2 + l1 * (1 + 2 * beta) / 2,
        l0 * (1 + 2 * beta) / 2 + l1 * (1 - 2 * beta) / 2,
        l0 * (1 - 2 * alpha) / 2 + l1 * (1 + 2 * alpha) / 2,
        l0 * (1 + 2 * alpha) / 2 + l1 * (1 - 2 * alpha) / 2,
    ), shots=0)


def add_shot_noise(record, shots, rng):
    """Poisson photon counting over ``shots`` repetitions, reported per shot."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    counts = rng.poisson(shots * np.asarray(record.E))
    return TomoRecord(tuple(counts / shots), shots=int(shots))


def reconstruct(record, cal):
    """Linear inversion of a record into populations and coherences."""
    L = cal.contrast
    if not L > 0:
        raise CalibrationError("l0 - l1 must be positive")
    E1, E2, E3, E4, E5, E6 = record.E
    p0 = 0.5 + (E1 - E2) / (2 * L)
    return ReconstructedState(
        p0=p0,
        p1=1 - p0,
        alpha=(E6 - E5) / (2 * L),
        beta=(E4 - E3) / (2 * L),
    )


def depolarize(rho, p_e):
    """Imperfect initialization: ``p_e rho + (1 - p_e) I/2``."""
    if not 0 < p_e <= 1:
        raise CalibrationError(f"polarization efficiency must lie in (0, 1], got {p_e!r}")
    return p_e * np.asarray(rho) + (1 - p_e) * su2.IDENTITY / 2


def polarization_correct(state, p_e):
    """Undo :func:`depolarize`: stretch the Bloch vector by ``1 / p_e``."""
    if not p_e > 0:
        raise CalibrationError(f"polarization efficiency must be positive, got {p_e!r}")
    if p_e == 1:
        return state
    return ReconstructedState.from_bloch(state.bloch / p_e)


def purify(state):
    """Closest pure state by direction; the raw Bloch norm is logged when it exceeds 1."""
    r = state.bloch
    norm = float(np.linalg.norm(r))
    if norm <= 1e-9:
        raise ValueError("Bloch vector too short to define a direction")
    if norm > 1:
        log.debug("clipping non-physical reconstruction with Bloch norm %.6g", norm)
    theta, phi = su2.bloch_angles(r / norm)
    return su2.bloch_to_spinor(theta, phi)


def measure_trajectory(states, cal, shots=0, seed=0):
    """Forward-simulate a record for every state of a trajectory.

    State ``t`` is depolarized by ``cal.p_e``, turned into PL expectations
    and, when ``shots > 0``, given Poisson noise from substream ``t`` of ``seed``.
    """
    records = []
    for t, psi in enumerate(states):
        rec = pl_expectations(depolarize(su2.density(psi), cal.p_e), cal)
        if shots:
            rec = add_shot_noise(rec, shots, su2.substream(seed, t))
        records.append(rec)
    return records


def recover_trajectory(records, cal):
    """Reconstruct, correct and purify each record; returns ``(raw_states, spinors)``."""
    raw = [reconstruct(r, cal) for r in records]
    spinors = np.array([purify(polarization_correct(s, cal.p_e)) for s in raw])
    return raw, spinors


# --- record files ------------------------------------------------------------

def write_records(path, records, cal, seed=0):
    """Plain-text record file: ``#`` header with calibration, then ``t E1..E6 shots`` lines."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# l0 = {cal.l0:.17g}\n")
        fh.write(f"# l1 = {cal.l1:.17g}\n")
        fh.write(f"# p_e = {cal.p_e:.17g}\n")
        fh.write(f"# seed = {seed}\n")
        for t, rec in enumerate(records):
            fields = " ".join(f"{e:.17g}" for e in rec.E)
            fh.write(f"{t} {fields} {rec.shots}\n")


def read_records(path):
    """Inverse of :func:`write_records`; returns ``(records, calibration, seed)``."""
    header = {}
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, sep, value = line[1:].partition("=")
                if sep:
                    header[key.strip()] = value.strip()
                continue
            parts = line.split()
            if len(parts) != 8:
                raise RecordParseError(path, lineno, f"expected 8 fields, found {len(parts)}")
            try:
                t = int(parts[0])
                E = tuple(float(x) for x in parts[1:7])
                shots = int(parts[7])
            except ValueError as exc:
                raise RecordParseError(path, lineno, str(exc)) from None
            if t != len(records):
                raise RecordParseError(path, lineno, f"expected t = {len(records)}, found {t}")
            if not all(math.isfinite(e) for e in E) or shots < 0:
                raise RecordParseError(path, lineno, "non-finite expectation or negative shot count")
            records.append(TomoRecord(E, shots))
    try:
        cal = TomoCalibration(float(header["l0"]), float(header["l1"]), float(header["p_e"]))
    except KeyError as exc:
        raise RecordParseError(path, 0, f"missing header field {exc.args[0]}") from None
    except ValueError as exc:
        raise RecordParseError(path, 0, str(exc)) from None
    return records, cal, int(header.get("seed", 0))
