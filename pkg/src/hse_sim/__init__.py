"""Hilbert-space ergodicity of a kicked qubit: drives, ensemble moments, channels and tomography."""

from . import channels, drives, moments, su2, tomo
from .drives import DriveKind, DriveProtocol, evolve, fibonacci, floquet, smooth_qp
from .moments import DeltaSeries, SymmetricMoment, delta_series, haar_moment, trace_distance

__all__ = [
    "channels", "drives", "moments", "su2", "tomo",
    "DriveKind", "DriveProtocol", "evolve", "fibonacci", "floquet", "smooth_qp",
    "DeltaSeries", "SymmetricMoment", "delta_series", "haar_moment", "trace_distance",
]
