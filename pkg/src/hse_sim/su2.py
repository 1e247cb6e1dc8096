"""Single-qubit algebra: spinors, Bloch vectors, density matrices and SU(2) kicks.

Plain numpy arrays carry every value: a spinor is a complex ``(2,)`` array,
unitaries and density matrices are complex ``(2, 2)`` arrays and Bloch
vectors are real ``(3,)`` arrays.  Rotations use the kick convention
``exp(-i theta n.sigma)`` with no factor 1/2, so a kick of angle ``theta``
turns the Bloch vector by ``2 theta``.
"""

import numpy as np

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)
IDENTITY = np.eye(2, dtype=complex)

X_AXIS = np.array([1.0, 0.0, 0.0])
Y_AXIS = np.array([0.0, 1.0, 0.0])
Z_AXIS = np.array([0.0, 0.0, 1.0])

# compositions between two projections back onto U(2)
REUNITARIZE_EVERY = 10_000


def bloch_to_spinor(theta, phi):
    """Spinor with polar angle ``theta`` and azimuth ``phi`` on the Bloch sphere."""
    return np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)], dtype=complex)


def spinor_to_bloch(psi):
    a, b = psi[0], psi[1]
    ab = np.conj(a) * b
    return np.array([2 * ab.real, 2 * ab.imag, abs(a) ** 2 - abs(b) ** 2])


def bloch_angles(r):
    """Polar and azimuthal angles of a nonzero Bloch vector."""
    r = np.asarray(r, dtype=float)
    n = np.linalg.norm(r)
    theta = np.arccos(np.clip(r[2] / n, -1.0, 1.0))
    phi = np.arctan2(r[1], r[0])
    return theta, phi


def normalize(psi):
    psi = np.asarray(psi, dtype=complex)
    return psi / np.linalg.norm(psi)


def overlap(psi, chi):
    """Phase-insensitive overlap ``|<psi|chi>|``."""
    return abs(np.vdot(psi, chi))


def same_state(psi, chi, atol=1e-12):
    return abs(1.0 - overlap(psi, chi)) <= atol


def phase_fix(psi, tol=1e-15):
    """Rotate the global phase so the first non-negligible amplitude is real positive."""
    psi = np.asarray(psi, dtype=complex)
    for amp in psi:
        if abs(amp) > tol:
            return psi * (abs(amp) / amp)
    return psi


def pauli_dot(v):
    return v[0] * SIGMA_X + v[1] * SIGMA_Y + v[2] * SIGMA_Z


def rotation(axis, angle):
    """``cos(angle) I - i sin(angle) axis.sigma`` for a unit ``axis``."""
    axis = np.asarray(axis, dtype=float)
    if abs(np.linalg.norm(axis) - 1.0) > 1e-9:
        raise ValueError(f"rotation axis must be a unit vector, got norm {np.linalg.norm(axis)!r}")
    return np.cos(angle) * IDENTITY - 1j * np.sin(angle) * pauli_dot(axis)


def exp_kick(g):
    """Kick unitary ``exp(-i g.sigma)``; the zero field gives the identity."""
    g = np.asarray(g, dtype=float)
    norm = np.linalg.norm(g)
    if norm < 1e-14:
        return IDENTITY.copy()
    return rotation(g / norm, norm)


def exp_kicks(g):
    """Vectorized :func:`exp_kick` over an ``(n, 3)`` array of fields."""
    g = np.asarray(g, dtype=float)
    norm = np.linalg.norm(g, axis=1)
    safe = np.where(norm < 1e-14, 1.0, norm)
    n = g / safe[:, None]
    n[norm < 1e-14] = 0.0
    c = np.where(norm < 1e-14, 1.0, np.cos(norm))
    s = np.where(norm < 1e-14, 0.0, np.sin(norm))
    out = np.empty((len(g), 2, 2), dtype=complex)
    out[:, 0, 0] = c - 1j * s * n[:, 2]
    out[:, 0, 1] = -1j * s * (n[:, 0] - 1j * n[:, 1])
    out[:, 1, 0] = -1j * s * (n[:, 0] + 1j * n[:, 1])
    out[:, 1, 1] = c + 1j * s * n[:, 2]
    return out


def kick_axis_angle(U):
    """Axis and angle of an SU(2) element ``cos(a) I - i sin(a) n.sigma``.

    Only meaningful up to the sign ambiguity ``(n, a) ~ (-n, -a)``; the
    angle returned lies in ``[0, pi]``.
    """
    U = U / np.sqrt(np.linalg.det(U))
    c = np.clip((U[0, 0] + U[1, 1]).real / 2, -1.0, 1.0)
    v = np.array([
        -(U[0, 1] + U[1, 0]).imag / 2,
        -(U[0, 1] - U[1, 0]).real / 2,
        -(U[0, 0] - U[1, 1]).imag / 2,
    ])
    s = np.linalg.norm(v)
    if s < 1e-15:
        return Z_AXIS.copy(), float(np.arccos(c))
    return v / s, float(np.arctan2(s, c))


def apply(U, psi):
    return U @ psi


def compose(U2, U1):
    """``U2 U1``: ``U1`` acts first."""
    return U2 @ U1


def dagger(U):
    return np.conj(np.swapaxes(U, -1, -2))


def density(psi):
    return np.outer(psi, np.conj(psi))


def conjugate_channel(U, rho):
    return U @ rho @ dagger(U)


def bloch_to_density(r):
    return 0.5 * (IDENTITY + pauli_dot(r))


def density_to_bloch(rho):
    return np.array([np.trace(rho @ s).real for s in PAULIS])


def reunitarize(U):
    """One Newton step toward the polar factor, ``(3U - U U^dag U) / 2``."""
    return 0.5 * (3 * U - U @ dagger(U) @ U)


def ordered_product(unitaries):
    """``U_n ... U_2 U_1`` for an iterable yielding ``U_1`` first."""
    total = IDENTITY.copy()
    for count, U in enumerate(unitaries, start=1):
        total = U @ total
        if count % REUNITARIZE_EVERY == 0:
            total = reunitarize(total)
    return total


def rotate_bloch(r, axis, angle):
    """Rodrigues rotation of a Bloch vector about ``axis`` by ``angle``."""
    r = np.asarray(r, dtype=float)
    axis = np.asarray(axis, dtype=float)
    return (r * np.cos(angle) + np.cross(axis, r) * np.sin(angle)
            + axis * np.dot(axis, r) * (1 - np.cos(angle)))


def spinor_from_uniforms(u, v):
    """Map two uniforms in [0, 1) to a point uniformly distributed on the sphere."""
    return bloch_to_spinor(np.arccos(1 - 2 * u), 2 * np.pi * v)


def haar_random_spinor(rng):
    u, v = rng.random(2)
    return spinor_from_uniforms(u, v)


def substream(seed, index):
    """Independent generator for trajectory ``index`` under master ``seed``."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def is_unitary(U, atol=1e-12):
    return np.allclose(U @ dagger(U), IDENTITY, rtol=0, atol=atol) and abs(abs(np.linalg.det(U)) - 1) <= atol


def is_density_matrix(rho, atol=1e-12):
    if not np.allclose(rho, dagger(rho), rtol=0, atol=atol):
        return False
    if abs(np.trace(rho) - 1) > atol:
        return False
    return np.linalg.eigvalsh(rho).min() >= -1e-10
