"""Shared types and unit handling for vacuum-correlation calculations.

Conventions
-----------
* Gaussian (CGS) electromagnetic units throughout.  ``UnitSystem.natural()``
  sets ``hbar = c = 1`` so that frequencies, inverse lengths and energies
  collapse onto a single scale; ``UnitSystem.gaussian()`` restores CGS
  constants.
* Vectors are plain numpy arrays of shape (3,), dtype float64.
* A two-level atom couples through a real transition dipole vector.  Its
  isotropic polarizability has the single-resonance form

      alpha(w)  = (2 / 3 hbar) * w0 |mu|^2 / (w0^2 - w^2)
      alpha(iu) = (2 / 3 hbar) * w0 |mu|^2 / (w0^2 + u^2)

  which is what every energy and correlation module in this package draws
  on.  Multi-resonance models sum such terms.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

HBAR_CGS: float = 1.054571817e-27  # erg s
C_CGS: float = 2.99792458e10       # cm / s

_QUANTITY_KINDS = (
    "length",
    "time",
    "frequency",
    "energy",
    "correlation",
    "polarizability",
    "dipole",
)


def as_vector(v) -> np.ndarray:
    """Coerce ``v`` to a float64 array of shape (3,); reject anything else."""
    arr = np.asarray(v, dtype=float)
    if arr.shape != (3,):
        raise ValueError(f"expected a 3-vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("vector components must be finite")
    return arr


def unit(v: np.ndarray) -> np.ndarray:
    """Unit vector along ``v``; raises on zero length."""
    n = float(np.linalg.norm(v))
    if n == 0.0:
        raise ValueError("cannot normalize a zero vector")
    return v / n


@dataclass(frozen=True)
class UnitSystem:
    """Physical constants in force for a calculation."""

    hbar: float
    c: float
    label: str = "custom"

    def __post_init__(self):
        if not (self.hbar > 0.0 and np.isfinite(self.hbar)):
            raise ValueError("hbar must be positive and finite")
        if not (self.c > 0.0 and np.isfinite(self.c)):
            raise ValueError("c must be positive and finite")

    @classmethod
    def natural(cls) -> "UnitSystem":
        """hbar = c = 1."""
        return cls(hbar=1.0, c=1.0, label="natural")

    @classmethod
    def gaussian(cls) -> "UnitSystem":
        """CGS-Gaussian constants."""
        return cls(hbar=HBAR_CGS, c=C_CGS, label="gaussian")


def _scales(kind: str, omega_ref: float, units: UnitSystem) -> float:
    """Base scale of one natural unit of ``kind`` expressed in ``units``."""
    if kind not in _QUANTITY_KINDS:
        raise ValueError(f"unknown quantity kind {kind!r}")
    if not (omega_ref > 0.0 and np.isfinite(omega_ref)):
        raise ValueError("omega_ref must be positive and finite")
    length = units.c / omega_ref
    if kind == "length":
        return length
    if kind == "time":
        return 1.0 / omega_ref
    if kind == "frequency":
        return omega_ref
    if kind == "energy":
        return units.hbar * omega_ref
    if kind == "polarizability":
        return length**3
    if kind == "dipole":
        # mu^2 carries energy * volume in Gaussian units
        return float(np.sqrt(units.hbar * omega_ref * length**3))
    # correlation: a field product E_i E_j, i.e. energy density
    return units.hbar * omega_ref / length**3


def to_natural(value, kind: str, omega_ref: float, units: UnitSystem):
    """Convert ``value`` from ``units`` to natural units (hbar = c = 1).

    ``omega_ref`` is the reference frequency that fixes the natural scale;
    atoms are normally converted with their own transition frequency.
    """
    return np.asarray(value, dtype=float) / _scales(kind, omega_ref, units)


def from_natural(value, kind: str, omega_ref: float, units: UnitSystem):
    """Inverse of :func:`to_natural`."""
    return np.asarray(value, dtype=float) * _scales(kind, omega_ref, units)


@dataclass(frozen=True, eq=False)
class Atom:
    """Point two-level system with a real transition dipole.

    Parameters
    ----------
    position : array_like, shape (3,)
        Location in the active unit system.
    frequency : float
        Transition angular frequency, > 0.
    dipole : array_like, shape (3,)
        Real transition dipole vector (Gaussian units).
    state : str
        ``"ground"`` or ``"excited"``.
    """

    position: np.ndarray
    frequency: float
    dipole: np.ndarray
    state: str = "ground"

    def __post_init__(self):
        object.__setattr__(self, "position", as_vector(self.position))
        if np.iscomplexobj(np.asarray(self.dipole)):
            raise ValueError("transition dipole must be real")
        object.__setattr__(self, "dipole", as_vector(self.dipole))
        if not (self.frequency > 0.0 and np.isfinite(self.frequency)):
            raise ValueError("frequency must be positive and finite")
        if self.state not in ("ground", "excited"):
            raise ValueError(f"state must be 'ground' or 'excited', got {self.state!r}")

    @property
    def dipole_sq(self) -> float:
        return float(self.dipole @ self.dipole)


@dataclass(frozen=True)
class PolarizabilityModel:
    """Isotropic Kramers-Heisenberg polarizability.

    ``resonances`` holds (omega_n, |mu_n|^2) pairs; poles sit on the real
    frequency axis at +-omega_n.
    """

    resonances: tuple[tuple[float, float], ...]
    hbar: float = 1.0

    def __post_init__(self):
        if not self.resonances:
            raise ValueError("at least one resonance is required")
        for w, mu2 in self.resonances:
            if not (w > 0.0 and np.isfinite(w)):
                raise ValueError("resonance frequencies must be positive and finite")
            if not (mu2 >= 0.0 and np.isfinite(mu2)):
                raise ValueError("squared dipole moments must be non-negative")

    @property
    def pole_frequencies(self) -> tuple[float, ...]:
        return tuple(w for w, _ in self.resonances)

    def at_real(self, omega):
        """alpha(omega) on the real axis.  Raises at a pole."""
        w = np.asarray(omega, dtype=float)
        out = np.zeros_like(w)
        for wn, mu2 in self.resonances:
            det = wn * wn - w * w
            if np.any(np.abs(det) < 1e-12 * wn * wn):
                raise ValueError(
                    f"polarizability evaluated at its pole omega = {wn}; "
                    "use a principal-value integration path instead"
                )
            out = out + (2.0 / (3.0 * self.hbar)) * wn * mu2 / det
        return out if out.shape else float(out)

    def at_imaginary(self, u):
        """alpha(i u) for u on the imaginary frequency axis (real u >= 0)."""
        uu = np.asarray(u, dtype=float)
        out = np.zeros_like(uu)
        for wn, mu2 in self.resonances:
            out = out + (2.0 / (3.0 * self.hbar)) * wn * mu2 / (wn * wn + uu * uu)
        return out if out.shape else float(out)

    def static(self) -> float:
        return float(self.at_imaginary(0.0))

    def residue_at(self, omega_pole: float) -> float:
        """Residue of alpha(w) at w = +omega_pole (simple pole)."""
        for wn, mu2 in self.resonances:
            if abs(wn - omega_pole) <= 1e-12 * wn:
                return -mu2 / (3.0 * self.hbar)
        raise ValueError(f"{omega_pole} is not a resonance of this model")


def make_polarizability(atom: Atom, units: UnitSystem) -> PolarizabilityModel:
    """Single-resonance polarizability of a two-level atom."""
    return PolarizabilityModel(
        resonances=((atom.frequency, atom.dipole_sq),), hbar=units.hbar
    )


@dataclass(frozen=True, eq=False)
class GeometryTriplet:
    """Three atom positions with the derived side vectors.

    Side naming is fixed once and used everywhere: ``bc`` joins B to C,
    ``ac`` joins A to C, ``ab`` joins A to B.
    """

    r_a: np.ndarray
    r_b: np.ndarray
    r_c: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "r_a", as_vector(self.r_a))
        object.__setattr__(self, "r_b", as_vector(self.r_b))
        object.__setattr__(self, "r_c", as_vector(self.r_c))
        if min(self.d_bc, self.d_ac, self.d_ab) <= 0.0:
            raise ValueError("atom positions must be pairwise distinct")

    @property
    def vec_bc(self) -> np.ndarray:
        return self.r_c - self.r_b

    @property
    def vec_ac(self) -> np.ndarray:
        return self.r_c - self.r_a

    @property
    def vec_ab(self) -> np.ndarray:
        return self.r_b - self.r_a

    @property
    def d_bc(self) -> float:
        return float(np.linalg.norm(self.vec_bc))

    @property
    def d_ac(self) -> float:
        return float(np.linalg.norm(self.vec_ac))

    @property
    def d_ab(self) -> float:
        return float(np.linalg.norm(self.vec_ab))

    @property
    def perimeter(self) -> float:
        return self.d_bc + self.d_ac + self.d_ab

    def max_side(self) -> float:
        return max(self.d_bc, self.d_ac, self.d_ab)


def triplet_from_atoms(a: Atom, b: Atom, c: Atom) -> GeometryTriplet:
    return GeometryTriplet(r_a=a.position, r_b=b.position, r_c=c.position)
