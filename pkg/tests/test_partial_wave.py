from fractions import Fraction
from math import factorial

import numpy as np
import pytest

from relinv.partial_wave import SphereGrid, partial_wave_gram, two_particle_partial_wave, wigner_small_d


def wigner_d_sum(j, m, mp, beta):
    """Wigner's explicit factorial sum for d^j_{m mp}(beta)."""
    j, m, mp = (Fraction(x) for x in (j, m, mp))
    pre = np.sqrt(float(factorial(int(j + m)) * factorial(int(j - m)) * factorial(int(j + mp)) * factorial(int(j - mp))))
    total = 0.0
    for s in range(0, int(2 * j) + 1):
        a, b, c, d = int(j + mp - s), s, int(m - mp + s), int(j - m - s)
        if min(a, b, c, d) < 0:
            continue
        num = (-1) ** (m - mp + s)
        den = factorial(a) * factorial(b) * factorial(c) * factorial(d)
        total += float(num) / den * np.cos(beta / 2) ** int(2 * j + mp - m - 2 * s) * np.sin(beta / 2) ** int(m - mp + 2 * s)
    return pre * total


@pytest.mark.parametrize("j", ["1/2", 1, "3/2", 2])
def test_small_d_matches_factorial_sum(j):
    jf = Fraction(j)
    betas = np.array([0.0, 0.4, 1.3, 2.9])
    d = wigner_small_d(jf, betas)
    n = int(2 * jf + 1)
    for b, beta in enumerate(betas):
        for a in range(n):
            for c in range(n):
                assert abs(d[b, a, c] - wigner_d_sum(jf, jf - a, jf - c, beta)) < 1e-12


def test_grid_weights_and_exactness():
    g = SphereGrid.build(8, 15)
    assert abs(g.weights.sum() - 4 * np.pi) < 1e-12
    th = g.theta[:, None] * np.ones_like(g.phi)[None, :]
    # integral of cos^2(theta) over the sphere is 4 pi / 3
    assert abs(g.inner(np.cos(th), np.cos(th)) - 4 * np.pi / 3) < 1e-12


@pytest.mark.parametrize("lam1,lam2", [("1/2", "1/2"), ("1/2", "-1/2"), ("-1/2", "1/2"), (1, -1), (1, 0),
                                        ("1/2", 0), (0, "-1/2"), (1, "1/2")])
def test_gram_is_identity(lam1, lam2):
    lam = Fraction(lam1) - Fraction(lam2)
    j_max = 2 if lam.denominator == 1 else Fraction(3, 2)
    labels, gram = partial_wave_gram(j_max, lam1, lam2)
    assert len(labels) > 0
    assert np.max(np.abs(gram - np.eye(len(labels)))) < 1e-8


def test_coefficient_rejects_bad_labels():
    with pytest.raises(ValueError):
        two_particle_partial_wave(1, 0, 1, -1)
    with pytest.raises(ValueError):
        two_particle_partial_wave(1, 2, 0, 0)
    with pytest.raises(ValueError):
        two_particle_partial_wave(1, 0, "1/2", 0)


def test_coefficient_value_at_pole():
    # theta = 0: d^J_{sigma, lam} = delta, so |C| = sqrt((2J+1)/4pi) for sigma = lam
    t = two_particle_partial_wave(1, 1, "1/2", "-1/2", SphereGrid(np.array([0.0]), np.array([0.0]), np.ones((1, 1))))
    assert abs(abs(t.values[0, 0]) - np.sqrt(3 / (4 * np.pi))) < 1e-14
