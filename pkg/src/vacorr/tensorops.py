"""Radial profiles, the dyadic differential operator, and potential tensors.

The central object is the operator

    T_pq h = (-delta_pq laplacian + grad_p grad_q) h(R)

acting on scalar radial profiles h.  For radial h it reduces to two
channels,

    T = -delta * (h'' + h'/R) + Rhat Rhat * (h'' - h'/R),

which is how every dipole-pattern tensor in this package is produced.
Applied to cos(kR)/R, sin(kR)/R, exp(+-ikR)/R or exp(-uR)/R it generates,
in closed form, the near-, intermediate- and far-zone pieces of the field
of an oscillating dipole.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb, factorial
from typing import Callable

import numpy as np

from .core import as_vector, unit

EPSILON3 = np.zeros((3, 3, 3))
for _i, _j, _k, _s in ((0, 1, 2, 1.0), (1, 2, 0, 1.0), (2, 0, 1, 1.0),
                       (2, 1, 0, -1.0), (0, 2, 1, -1.0), (1, 0, 2, -1.0)):
    EPSILON3[_i, _j, _k] = _s

_CHANNELS = ("ee", "mm", "em")


@dataclass(frozen=True)
class RadialProfile:
    """Scalar profile h(R) with analytic first and second derivatives."""

    value: Callable
    d1: Callable
    d2: Callable

    @classmethod
    def coulomb(cls) -> "RadialProfile":
        """h = 1/R."""
        return cls(lambda r: 1.0 / r,
                   lambda r: -1.0 / r**2,
                   lambda r: 2.0 / r**3)

    @classmethod
    def cosine(cls, k: float) -> "RadialProfile":
        """h = cos(kR)/R."""
        return cls(
            lambda r: np.cos(k * r) / r,
            lambda r: -k * np.sin(k * r) / r - np.cos(k * r) / r**2,
            lambda r: -k**2 * np.cos(k * r) / r + 2.0 * k * np.sin(k * r) / r**2
            + 2.0 * np.cos(k * r) / r**3,
        )

    @classmethod
    def sine(cls, k: float) -> "RadialProfile":
        """h = sin(kR)/R."""
        return cls(
            lambda r: np.sin(k * r) / r,
            lambda r: k * np.cos(k * r) / r - np.sin(k * r) / r**2,
            lambda r: -k**2 * np.sin(k * r) / r - 2.0 * k * np.cos(k * r) / r**2
            + 2.0 * np.sin(k * r) / r**3,
        )

    @classmethod
    def outgoing(cls, k: float) -> "RadialProfile":
        """h = exp(ikR)/R (outgoing spherical wave)."""
        return cls(
            lambda r: np.exp(1j * k * r) / r,
            lambda r: (1j * k / r - 1.0 / r**2) * np.exp(1j * k * r),
            lambda r: (-k**2 / r - 2j * k / r**2 + 2.0 / r**3) * np.exp(1j * k * r),
        )

    @classmethod
    def incoming(cls, k: float) -> "RadialProfile":
        """h = exp(-ikR)/R."""
        return cls(
            lambda r: np.exp(-1j * k * r) / r,
            lambda r: (-1j * k / r - 1.0 / r**2) * np.exp(-1j * k * r),
            lambda r: (-k**2 / r + 2j * k / r**2 + 2.0 / r**3) * np.exp(-1j * k * r),
        )

    @classmethod
    def exponential(cls, u: float) -> "RadialProfile":
        """h = exp(-uR)/R (imaginary-wavenumber wave)."""
        return cls(
            lambda r: np.exp(-u * r) / r,
            lambda r: (-u / r - 1.0 / r**2) * np.exp(-u * r),
            lambda r: (u**2 / r + 2.0 * u / r**2 + 2.0 / r**3) * np.exp(-u * r),
        )


def _check_separation(rvec: np.ndarray) -> float:
    r = float(np.linalg.norm(rvec))
    if r == 0.0:
        raise ValueError("dyadic operator is singular at zero separation")
    return r


def radial_channels(profile: RadialProfile, r: float):
    """(h'' + h'/R, h'' - h'/R): the -delta and Rhat Rhat channel factors."""
    d1 = profile.d1(r)
    d2 = profile.d2(r)
    return d2 + d1 / r, d2 - d1 / r


def apply_dyadic(profile: RadialProfile, rvec) -> np.ndarray:
    """(-delta_pq laplacian + grad_p grad_q) h at separation ``rvec``, a 3x3 array."""
    rvec = as_vector(rvec)
    r = _check_separation(rvec)
    rhat = rvec / r
    c_delta, c_dyad = radial_channels(profile, r)
    return -np.eye(3) * c_delta + np.outer(rhat, rhat) * c_dyad


def dipole_field_vector(profile: RadialProfile, rvec, mu) -> np.ndarray:
    """apply_dyadic(profile, rvec) contracted with a dipole vector."""
    rvec = as_vector(rvec)
    mu = np.asarray(mu, dtype=float)
    r = _check_separation(rvec)
    rhat = rvec / r
    c_delta, c_dyad = radial_channels(profile, r)
    return -c_delta * mu + c_dyad * (mu @ rhat) * rhat


# ----------------------------------------------------------------------
# two-point profiles: g(R, R') under a dyadic operator on each argument
# ----------------------------------------------------------------------

class TwoPointProfile:
    """g(R, R') exposing the mixed partials (1,1), (1,2), (2,1), (2,2)."""

    def mixed(self, a: int, b: int, r: float, rp: float):
        raise NotImplementedError


class SeparablePair(TwoPointProfile):
    """g(R, R') = p(R) q(R')."""

    def __init__(self, p: RadialProfile, q: RadialProfile):
        self.p = p
        self.q = q

    def mixed(self, a, b, r, rp):
        pa = (self.p.value, self.p.d1, self.p.d2)[a](r)
        qb = (self.q.value, self.q.d1, self.q.d2)[b](rp)
        return pa * qb


class SumArgumentPair(TwoPointProfile):
    """g(R, R') = phi(s (u R + v R')) / (R R') with signs u, v = +-1.

    ``phi_derivs(n, z)`` must return the n-th derivative of phi for
    0 <= n <= 4.  Mixed partials follow from the Leibniz rule with
    d^m/dR^m (1/R) = (-1)^m m! / R^(m+1).  The default signs give the
    plain sum argument s (R + R'); a negative sign covers difference
    arguments away from R = R'.
    """

    def __init__(self, phi_derivs: Callable, scale: float,
                 sign_r: float = 1.0, sign_rp: float = 1.0):
        if sign_r not in (1.0, -1.0) or sign_rp not in (1.0, -1.0):
            raise ValueError("argument signs must be +1 or -1")
        self.phi = phi_derivs
        self.s = scale
        self.sign_r = sign_r
        self.sign_rp = sign_rp

    def mixed(self, a, b, r, rp):
        z = self.s * (self.sign_r * r + self.sign_rp * rp)
        total = 0.0
        for i in range(a + 1):
            inv_r = (-1.0) ** (a - i) * factorial(a - i) / r ** (a - i + 1)
            for j in range(b + 1):
                inv_rp = (-1.0) ** (b - j) * factorial(b - j) / rp ** (b - j + 1)
                total = total + (
                    comb(a, i) * comb(b, j)
                    * (self.s * self.sign_r) ** i * (self.s * self.sign_rp) ** j
                    * self.phi(i + j, z) * inv_r * inv_rp
                )
        return total


def pair_dyadic_apply(g: TwoPointProfile, rvec, rpvec, mu) -> np.ndarray:
    """Both-argument dyadic application contracted with one dipole on each side.

    Returns T_ij = mu_q mu_p [F^R]_qi [F^R']_pj g as a 3x3 array, with the
    operator factored into its radial channels:

        D1 = d^2/dR^2 + (1/R) d/dR      (delta channel, enters with -1)
        D2 = d^2/dR^2 - (1/R) d/dR      (Rhat Rhat channel)
    """
    rvec = as_vector(rvec)
    rpvec = as_vector(rpvec)
    mu = np.asarray(mu, dtype=float)
    r = _check_separation(rvec)
    rp = _check_separation(rpvec)
    rhat = rvec / r
    rphat = rpvec / rp

    g22 = g.mixed(2, 2, r, rp)
    g21 = g.mixed(2, 1, r, rp)
    g12 = g.mixed(1, 2, r, rp)
    g11 = g.mixed(1, 1, r, rp)

    d11 = g22 + g21 / rp + g12 / r + g11 / (r * rp)
    d12 = g22 - g21 / rp + g12 / r - g11 / (r * rp)
    d21 = g22 + g21 / rp - g12 / r - g11 / (r * rp)
    d22 = g22 - g21 / rp - g12 / r + g11 / (r * rp)

    mu_r = mu @ rhat
    mu_rp = mu @ rphat
    return (
        np.outer(mu, mu) * d11
        - np.outer(mu, rphat) * (mu_rp * d12)
        - np.outer(rhat, mu) * (mu_r * d21)
        + np.outer(rhat, rphat) * (mu_r * mu_rp * d22)
    )


def chained_dyadic_apply(g: TwoPointProfile, avec, bvec) -> np.ndarray:
    """Operator product of the two dyadic applications, middle index contracted.

    Returns K_lp = sum_m [F^a]_lm [F^b]_mp g(a, b) as a 3x3 array.  For a
    separable g this is the plain matrix product of the two single-argument
    applications; for entangled profiles like phi(s(a+b))/(ab) the channel
    factors mix and the closed form below is needed.
    """
    avec = as_vector(avec)
    bvec = as_vector(bvec)
    a = _check_separation(avec)
    b = _check_separation(bvec)
    ahat = avec / a
    bhat = bvec / b

    g22 = g.mixed(2, 2, a, b)
    g21 = g.mixed(2, 1, a, b)
    g12 = g.mixed(1, 2, a, b)
    g11 = g.mixed(1, 1, a, b)

    d11 = g22 + g21 / b + g12 / a + g11 / (a * b)
    d12 = g22 - g21 / b + g12 / a - g11 / (a * b)
    d21 = g22 + g21 / b - g12 / a - g11 / (a * b)
    d22 = g22 - g21 / b - g12 / a + g11 / (a * b)

    return (
        np.eye(3) * d11
        - np.outer(bhat, bhat) * d12
        - np.outer(ahat, ahat) * d21
        + np.outer(ahat, bhat) * (float(ahat @ bhat) * d22)
    )


# ----------------------------------------------------------------------
# dipole-dipole potential tensors
# ----------------------------------------------------------------------

def potential_tensor(channel: str, k: float, rvec) -> np.ndarray:
    """Frequency-resolved dipole-dipole coupling tensor at wavenumber k.

    ``ee`` and ``mm`` coincide:

        V_ij = -[(delta - RR) k^2 cos(kR)/R
                 - (delta - 3 RR) (k sin(kR)/R^2 + cos(kR)/R^3)]

    ``em`` couples crossed dipoles through the antisymmetric pattern

        V_ij = eps_ijl Rhat_l (k sin(kR)/R^2 - k^2 sin(kR)/R).
    """
    if channel not in _CHANNELS:
        raise ValueError(f"channel must be one of {_CHANNELS}, got {channel!r}")
    if k < 0.0 or not np.isfinite(k):
        raise ValueError("wavenumber k must be non-negative and finite")
    rvec = as_vector(rvec)
    r = _check_separation(rvec)
    rhat = rvec / r
    dyad = np.outer(rhat, rhat)
    if channel in ("ee", "mm"):
        transverse = np.eye(3) - dyad
        longitudinal = np.eye(3) - 3.0 * dyad
        return -(
            transverse * k**2 * np.cos(k * r) / r
            - longitudinal * (k * np.sin(k * r) / r**2 + np.cos(k * r) / r**3)
        )
    coeff = k * np.sin(k * r) / r**2 - k**2 * np.sin(k * r) / r
    return np.einsum("ijl,l->ij", EPSILON3, rhat) * coeff


def potential_tensor_symmetrized(channel: str, k1: float, k2: float, rvec) -> np.ndarray:
    """Arithmetic mean of the potential tensor at two wavenumbers."""
    return 0.5 * (potential_tensor(channel, k1, rvec) + potential_tensor(channel, k2, rvec))


# ----------------------------------------------------------------------
# correlation tensor container
# ----------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CorrelationTensor:
    """3x3 field correlation with named additive parts.

    ``entries`` is the total; ``parts`` maps part names to their 3x3
    contributions (summing the parts reproduces the total).  ``flags``
    records causality gates for dynamical results.
    """

    entries: np.ndarray
    field_pair: str
    parts: dict = field(default_factory=dict)
    flags: dict = field(default_factory=dict)

    def __post_init__(self):
        arr = np.asarray(self.entries, dtype=complex)
        if arr.shape != (3, 3):
            raise ValueError("correlation tensor entries must be 3x3")
        object.__setattr__(self, "entries", arr)

    def part(self, name: str) -> np.ndarray:
        return self.parts[name]

    def parts_total(self) -> np.ndarray:
        total = np.zeros((3, 3), dtype=complex)
        for v in self.parts.values():
            total = total + v
        return total
