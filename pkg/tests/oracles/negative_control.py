"""Closed-form oracle for the |up up> control under x-boosts of a z-moving pair.

For p along z with rapidity eta and a boost of rapidity xi along x, the
Wigner rotation is about y with tan(delta) = sinh(xi) sinh(eta) / (cosh(xi) + cosh(eta)).
The J=1 block of |up up><up up| is |1,1><1,1|; after the rotation its
(1,1) entry is ((1 + cos delta) / 2)^2, which gives the largest deviation
(1 - cos delta)(3 + cos delta) / 4 once averaged over a symmetric rapidity
distribution (odd entries cancel).  Averaging over xi ~ N(0, 1) uses
Gauss-Hermite quadrature.

Run as a script to print the frozen values.
"""

import numpy as np


def wigner_angle(xi, eta):
    return np.arctan2(np.sinh(xi) * np.sinh(eta), np.cosh(xi) + np.cosh(eta))


def block_deviation(xi, eta):
    c = np.cos(wigner_angle(xi, eta))
    return (1 - c) * (3 + c) / 4


def sample_block_deviation(xi, eta):
    """Largest entry of |v v^T - e1 e1^T| with v = d^1(delta) e1, per sample."""
    d = wigner_angle(xi, eta)
    c, s = np.cos(d), np.sin(d)
    v = np.stack([(1 + c) / 2, s / np.sqrt(2), (1 - c) / 2])
    m = np.abs(v[:, None] * v[None, :])
    m[0, 0] = 1 - m[0, 0]
    return m.reshape(9, -1).max(axis=0)


def expected_average(eta=np.arccosh(2.0), sigma=1.0, order=200):
    x, w = np.polynomial.hermite_e.hermegauss(order)
    return float(np.sum(w * block_deviation(sigma * x, eta)) / np.sqrt(2 * np.pi))


if __name__ == "__main__":
    print(f"average block deviation (quadrature): {expected_average()!r}")
    xi = np.random.default_rng(0).normal(size=200000)
    v = block_deviation(xi, np.arccosh(2.0))
    print(f"plain MC cross-check: {v.mean():.6f} +- {v.std() / np.sqrt(v.size):.6f}")
