"""Two-particle partial-wave coefficients on a sphere quadrature grid."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .little_group import as_spin, spin_rep


@dataclass(frozen=True, eq=False)
class SphereGrid:
    """Gauss-Legendre in ``cos(theta)`` times a uniform azimuthal grid."""

    theta: np.ndarray
    phi: np.ndarray
    weights: np.ndarray  # shape (n_theta, n_phi), sums to 4 pi

    @classmethod
    def build(cls, n_theta: int, n_phi: int) -> "SphereGrid":
        x, wx = np.polynomial.legendre.leggauss(n_theta)
        phi = 2 * np.pi * np.arange(n_phi) / n_phi
        return cls(np.arccos(x), phi, np.outer(wx, np.full(n_phi, 2 * np.pi / n_phi)))

    @classmethod
    def exact_for_degree(cls, degree: int) -> "SphereGrid":
        """Grid integrating products of two degree-``degree`` functions exactly."""
        return cls.build(degree + 1, 2 * degree + 1)

    def inner(self, f: np.ndarray, g: np.ndarray) -> complex:
        return complex(np.sum(self.weights * np.conj(f) * g))


def wigner_small_d(j, beta) -> np.ndarray:
    """``d^j(beta) = exp(-i beta J_y)``; returns shape ``(len(beta), 2j+1, 2j+1)``.

    Rows and columns run over ``m = j, j-1, ..., -j``.
    """
    rep = spin_rep(j)
    w, v = np.linalg.eigh(rep.jy)
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    phases = np.exp(-1j * beta[:, None] * w[None, :])
    return np.einsum("ik,bk,jk->bij", v, phases, v.conj())


def _index(j: Fraction, m: Fraction) -> int:
    return int(j - m)


@dataclass(frozen=True, eq=False)
class PartialWaveTable:
    j: Fraction
    sigma: Fraction
    helicities: tuple[Fraction, Fraction]
    grid: SphereGrid
    values: np.ndarray  # (n_theta, n_phi)


def two_particle_partial_wave(j, sigma, lam1, lam2, grid: SphereGrid | None = None) -> PartialWaveTable:
    """``sqrt((2J+1)/4pi) * conj(D^J_{sigma, lam1-lam2}(phi, theta, 0))`` on ``grid``."""
    j = as_spin(j)
    sigma = Fraction(sigma).limit_denominator(2)
    lam1 = Fraction(lam1).limit_denominator(2)
    lam2 = Fraction(lam2).limit_denominator(2)
    lam = lam1 - lam2
    if abs(lam) > j:
        raise ValueError(f"helicity difference {lam} exceeds J={j}")
    if abs(sigma) > j or (j - sigma).denominator != 1:
        raise ValueError(f"Sigma_J={sigma} is not a valid projection for J={j}")
    if (j - lam).denominator != 1:
        raise ValueError(f"helicity difference {lam} incompatible with J={j}")
    if grid is None:
        grid = SphereGrid.exact_for_degree(int(2 * j) + 2)
    d = wigner_small_d(j, grid.theta)[:, _index(j, sigma), _index(j, lam)]
    big_d = np.exp(-1j * float(sigma) * grid.phi)[None, :] * d[:, None]
    vals = np.sqrt((2 * float(j) + 1) / (4 * np.pi)) * np.conj(big_d)
    return PartialWaveTable(j, sigma, (lam1, lam2), grid, vals)


def partial_wave_gram(j_max, lam1, lam2, grid: SphereGrid | None = None):
    """Gram matrix of all ``C^{J,Sigma}`` with ``|lam1-lam2| <= J <= j_max``.

    Returns ``(labels, gram)`` with labels ``(J, Sigma)``.
    """
    j_max = as_spin(j_max)
    lam = Fraction(lam1).limit_denominator(2) - Fraction(lam2).limit_denominator(2)
    if grid is None:
        grid = SphereGrid.exact_for_degree(int(2 * j_max) + 2)
    labels = []
    j = abs(lam)
    while j <= j_max:
        s = j
        while s >= -j:
            labels.append((j, s))
            s -= 1
        j += 1
    tables = [two_particle_partial_wave(jj, ss, lam1, lam2, grid).values for jj, ss in labels]
    gram = np.array([[grid.inner(a, b) for b in tables] for a in tables])
    return labels, gram
