"""Moebius-invariant energies of planar domains and space curves.

Submodules
----------
curves
    Fourier curves, planar domains, frames and parallel curves.
renorm
    Cutoff ladders and extrapolation of renormalized limits.
planar
    Potential, domain and curve energies in the plane, mutual energies and
    the line-geometry routes.
space
    Energy, mutual energy and writhe of space curves.
integral_geometry
    Monte Carlo over circles and lines, chord-length distribution.
moebius
    Moebius maps acting on curves and domains, invariance checks.
crossratio
    The infinitesimal cross ratio two-form.
kernels
    Compiled hot loops with a numpy fallback.
"""
from . import kernels
from .curves import (
    ClosedCurve,
    GeometryError,
    PlanarDomain,
    ReliabilityWarning,
    SchemaError,
)
from .integral_geometry import (
    Circle3,
    MCEstimate,
    linking_circle,
    mc_energy_circles,
    mc_mutual_circles,
)
from .moebius import MoebiusMap, apply, apply_domain, invariance_suite
from .planar import curve_energy, domain_energy, potential
from .renorm import RenormResult
from .space import mutual_energy_space, space_energy, writhe

__version__ = "0.1.0"

__all__ = [
    "Circle3",
    "ClosedCurve",
    "GeometryError",
    "MCEstimate",
    "MoebiusMap",
    "PlanarDomain",
    "ReliabilityWarning",
    "RenormResult",
    "SchemaError",
    "apply",
    "apply_domain",
    "curve_energy",
    "domain_energy",
    "invariance_suite",
    "kernels",
    "linking_circle",
    "mc_energy_circles",
    "mc_mutual_circles",
    "mutual_energy_space",
    "potential",
    "space_energy",
    "writhe",
]
