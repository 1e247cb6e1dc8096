"""Kicked single-qubit drives and their stroboscopic evolution.

A drive applies at integer time ``t >= 1`` the kick ``exp(-i g(omega2 t).sigma)``
where the field ``g`` lives on the circle.  Three protocols are built in
(Floquet, smoothly kicked quasiperiodic, Fibonacci); ``CUSTOM`` accepts any
piecewise-constant field on the circle.

Evolution is streamed in chunks of at most ``CHUNK`` steps.  Within a chunk
the running products ``U(t) = V_t ... V_1`` come from a parallel prefix scan,
and the carried product is pulled back onto U(2) at every chunk boundary.
"""

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import su2

GOLDEN = (1 + math.sqrt(5)) / 2
FIBONACCI_OMEGA2 = math.pi * (3 - math.sqrt(5))
CHUNK = su2.REUNITARIZE_EVERY
BOUNDARY_TOL = 1e-12
TWO_PI = 2 * math.pi


class DriveKind(str, enum.Enum):
    FLOQUET = "floquet"
    SMOOTH_QP = "smoothqp"
    FIBONACCI = "fibonacci"
    CUSTOM = "custom"


@dataclass(frozen=True)
class Arc:
    """Half-open arc ``[start, end)`` of the circle (radians) carrying a constant field."""

    start: float
    end: float
    field: tuple

    def __post_init__(self):
        object.__setattr__(self, "field", tuple(float(x) for x in self.field))


@dataclass(frozen=True)
class DriveProtocol:
    kind: DriveKind
    theta_x: float = 0.0
    theta_y: float = 0.0
    theta_z: float = 0.0
    omega2: float = 0.0
    arcs: tuple = field(default=())

    def __post_init__(self):
        kind = DriveKind(self.kind)
        object.__setattr__(self, "kind", kind)
        for name in ("theta_x", "theta_y", "theta_z", "omega2"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, value)
        if kind is DriveKind.FLOQUET and self.omega2 != math.pi:
            raise ValueError("the Floquet drive fixes omega2 = pi")
        if kind is DriveKind.SMOOTH_QP and (self.omega2 != GOLDEN or self.theta_x != 1.0):
            raise ValueError("the smooth QP drive fixes omega2 = golden ratio and theta_x = 1")
        if kind is DriveKind.FIBONACCI and self.omega2 != FIBONACCI_OMEGA2:
            raise ValueError("the Fibonacci drive fixes omega2 = pi (3 - sqrt 5)")
        if kind is DriveKind.CUSTOM:
            arcs = tuple(a if isinstance(a, Arc) else Arc(*a) for a in self.arcs)
            _check_partition(arcs)
            object.__setattr__(self, "arcs", arcs)

    def describe(self):
        """Flat ``name -> value`` description used in output headers."""
        desc = {
            "drive": self.kind.value,
            "theta_x": self.theta_x,
            "theta_y": self.theta_y,
            "theta_z": self.theta_z,
            "omega2": self.omega2,
        }
        if self.kind is DriveKind.CUSTOM:
            desc["arcs"] = ";".join(
                "{!r}:{!r}:{!r}:{!r}:{!r}".format(a.start, a.end, *a.field) for a in self.arcs
            )
        return desc


def _check_partition(arcs):
    if not arcs:
        raise ValueError("a custom drive needs at least one arc")
    ordered = sorted(arcs, key=lambda a: a.start)
    if abs(ordered[0].start) > BOUNDARY_TOL or abs(ordered[-1].end - TWO_PI) > BOUNDARY_TOL:
        raise ValueError("arcs must cover [0, 2 pi)")
    for a, b in zip(ordered, ordered[1:]):
        if abs(a.end - b.start) > BOUNDARY_TOL:
            raise ValueError(f"arcs leave a gap or overlap near {a.end!r}")
    for a in ordered:
        if not a.end > a.start:
            raise ValueError(f"empty or reversed arc [{a.start!r}, {a.end!r})")


def floquet(theta_x, theta_y):
    return DriveProtocol(DriveKind.FLOQUET, theta_x=theta_x, theta_y=theta_y, omega2=math.pi)


def smooth_qp():
    return DriveProtocol(DriveKind.SMOOTH_QP, theta_x=1.0, theta_z=GOLDEN, omega2=GOLDEN)


def fibonacci(theta_x, theta_z):
    return DriveProtocol(DriveKind.FIBONACCI, theta_x=theta_x, theta_z=theta_z, omega2=FIBONACCI_OMEGA2)


def custom(arcs, omega2):
    return DriveProtocol(DriveKind.CUSTOM, omega2=omega2, arcs=tuple(arcs))


# --- words -----------------------------------------------------------------

def fibonacci_word_substitution(length):
    """First ``length`` letters of the infinite Fibonacci word from the concatenation rule."""
    if length < 1:
        raise ValueError("length must be positive")
    prev, word = [1], [0]
    while len(word) < length:
        prev, word = word, word + prev
    return np.array(word[:length], dtype=np.uint8)


def fibonacci_word_circle(length):
    """Letters 0/1 from the golden circle rotation: 1 when ``omega2 t`` lands on the z-kick arc."""
    if length < 1:
        raise ValueError("length must be positive")
    return kick_indices(fibonacci(0.0, 0.0), np.arange(1, length + 1)).astype(np.uint8)


def first_mismatch(a, b):
    """Index of the first differing letter, or ``None`` if the common prefix agrees."""
    n = min(len(a), len(b))
    diff = np.nonzero(np.asarray(a[:n]) != np.asarray(b[:n]))[0]
    return int(diff[0]) if diff.size else None


def fibonacci_numbers(upto):
    out, a, b = [], 1, 2
    while a <= upto:
        out.append(a)
        a, b = b, a + b
    return out


def _boundary_turns(omega2):
    return 1.0 - omega2 / TWO_PI


def _circle_turns(omega2, t):
    """Position of ``omega2 t`` on the circle in turns; a hair below one full turn wraps to 0."""
    turns = np.mod(omega2 / TWO_PI * np.asarray(t, dtype=float), 1.0)
    tol = BOUNDARY_TOL / TWO_PI
    turns = np.where(turns > 1.0 - tol, 0.0, turns)
    return turns


def _snap(turns, starts):
    # within BOUNDARY_TOL radians of an arc start -> exactly on it, so [start, end) decides
    tol = BOUNDARY_TOL / TWO_PI
    for s in starts:
        turns = np.where(np.abs(turns - s) <= tol, s, turns)
    return turns


# --- kicks -----------------------------------------------------------------

def smooth_g(phi):
    """Field of the smoothly kicked drive at circle coordinate ``phi``; ``|g| = c`` everywhere."""
    w = GOLDEN
    c = math.acos(math.cos(w) * math.cos(1.0))
    pref = c / math.sin(c)
    phi = np.asarray(phi, dtype=float)
    return pref * np.stack(np.broadcast_arrays(
        math.sin(1.0) * np.cos(2 * phi - w),
        math.sin(1.0) * np.sin(2 * phi - w),
        math.cos(1.0) * math.sin(w),
    ), axis=-1)


def _piecewise_table(protocol):
    """Arc starts (turns, ascending) and the kick unitary attached to each arc."""
    if protocol.kind is DriveKind.FLOQUET:
        return (np.array([0.0, 0.5]),
                [su2.rotation(su2.Y_AXIS, protocol.theta_y), su2.rotation(su2.X_AXIS, protocol.theta_x)])
    if protocol.kind is DriveKind.FIBONACCI:
        return (np.array([0.0, _boundary_turns(protocol.omega2)]),
                [su2.rotation(su2.X_AXIS, protocol.theta_x), su2.rotation(su2.Z_AXIS, protocol.theta_z)])
    arcs = sorted(protocol.arcs, key=lambda a: a.start)
    return (np.array([a.start / TWO_PI for a in arcs]), [su2.exp_kick(a.field) for a in arcs])


def kick_indices(protocol, t):
    """Arc index hit at each time in ``t`` for a piecewise-constant drive."""
    starts, _ = _piecewise_table(protocol)
    turns = _snap(_circle_turns(protocol.omega2, t), starts)
    return np.searchsorted(starts, turns, side="right") - 1


def kick_unitaries(protocol, t):
    """Kick unitaries ``V_t`` for an array of times ``t >= 1``, shape ``(n, 2, 2)``."""
    t = np.asarray(t)
    if t.size and t.min() < 1:
        raise ValueError("kicks are defined for t >= 1")
    if protocol.kind is DriveKind.SMOOTH_QP:
        return su2.exp_kicks(smooth_g(protocol.omega2 * t.astype(float)).reshape(-1, 3))
    _, table = _piecewise_table(protocol)
    return np.stack(table)[kick_indices(protocol, t)]


def kick_at(protocol, t):
    if t < 1:
        raise ValueError("kicks start at t = 1; t = 0 is the initial state")
    return kick_unitaries(protocol, np.array([t]))[0]


# --- evolution -------------------------------------------------------------

def _prefix_products(kicks):
    """``P[j] = K[j] ... K[1] K[0]`` by doubling scan."""
    P = kicks.copy()
    shift = 1
    while shift < len(P):
        P[shift:] = np.matmul(P[shift:], P[:-shift])
        shift *= 2
    return P


def iter_unitaries(protocol, steps, chunk=CHUNK):
    """Yield ``(t0, U)`` where ``U[j] = U(t0 + j)`` for consecutive blocks covering ``t = 0..steps-1``."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    carry = su2.IDENTITY.copy()
    yield 0, carry[None].copy()
    t0 = 1
    while t0 < steps:
        t1 = min(t0 + chunk, steps)
        P = _prefix_products(kick_unitaries(protocol, np.arange(t0, t1)))
        block = np.matmul(P, carry)
        yield t0, block
        carry = su2.reunitarize(block[-1])
        t0 = t1


def iter_states(protocol, psi0, steps, chunk=CHUNK):
    """Yield ``(t0, states)`` blocks, ``states[j]`` being the spinor at ``t0 + j``."""
    psi0 = np.asarray(psi0, dtype=complex)
    for t0, U in iter_unitaries(protocol, steps, chunk):
        yield t0, U @ psi0


@dataclass(frozen=True)
class Trajectory:
    initial: np.ndarray
    states: np.ndarray
    protocol: DriveProtocol

    def __len__(self):
        return len(self.states)


def evolve(protocol, psi0, steps):
    """Trajectory of ``steps`` states at ``t = 0..steps-1``."""
    psi0 = np.asarray(psi0, dtype=complex)
    states = np.concatenate([block for _, block in iter_states(protocol, psi0, steps)])
    states[0] = psi0
    return Trajectory(initial=psi0, states=states, protocol=protocol)


def floquet_operator(theta_x, theta_y):
    return su2.rotation(su2.Y_AXIS, theta_y) @ su2.rotation(su2.X_AXIS, theta_x)


def floquet_eigenstates(theta_x, theta_y):
    """The two quasienergy states of ``U_y U_x``, phase-fixed, ordered as (+axis, -axis)."""
    UF = floquet_operator(theta_x, theta_y)
    if np.allclose(UF, UF[0, 0] * su2.IDENTITY, rtol=0, atol=1e-12):
        raise ValueError("U_F is proportional to the identity; its eigenbasis is undefined")
    axis, _ = su2.kick_axis_angle(UF)
    theta, phi = su2.bloch_angles(axis)
    up = su2.bloch_to_spinor(theta, phi)
    down = su2.bloch_to_spinor(math.pi - theta, phi + math.pi)
    return su2.phase_fix(up), su2.phase_fix(down)
