"""Sampled SLOCC twirl ``M = K A_n K'`` and a jackknife proportionality test.

``K`` and ``K'`` are drawn from a compact group (Haar on U(d), or uniformly
from the single-qubit Clifford group); ``A`` is a positive diagonal with unit
determinant, normalized by its largest entry so every ``M`` is a contraction.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.stats import unitary_group

from .schur import SchurBasis, label_str
from .tensor import DenseOperator

CHUNK = 512


def haar_su2(rng: np.random.Generator, size: int) -> np.ndarray:
    q = rng.normal(size=(size, 4))
    q /= np.linalg.norm(q, axis=1, keepdims=True)
    a = q[:, 0] + 1j * q[:, 3]
    b = q[:, 2] + 1j * q[:, 1]
    return np.stack([np.stack([a, b], -1), np.stack([-b.conj(), a.conj()], -1)], -2)


@lru_cache(maxsize=1)
def clifford_group() -> np.ndarray:
    """The 24 single-qubit Cliffords (modulo phase), generated by H and S."""
    h = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
    s = np.diag([1, 1j])

    def canon(u):
        k = np.flatnonzero(np.abs(u.ravel()) > 1e-9)[0]
        ph = u.ravel()[k] / abs(u.ravel()[k])
        return np.round(u / ph, 9) + 0.0  # folds -0.0 into 0.0 so byte keys agree

    found = {canon(np.eye(2, dtype=complex)).tobytes(): np.eye(2, dtype=complex)}
    frontier = [np.eye(2, dtype=complex)]
    while frontier:
        nxt = []
        for u in frontier:
            for g in (h, s):
                v = g @ u
                key = canon(v).tobytes()
                if key not in found:
                    found[key] = v
                    nxt.append(v)
        frontier = nxt
    out = np.array([found[k] for k in sorted(found)])
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class SLOCCSamples:
    k: np.ndarray  # (S, d, d)
    a: np.ndarray  # (S, d) normalized diagonal of A_n
    k_prime: np.ndarray
    weights: np.ndarray

    def __len__(self):
        return len(self.weights)

    def operators(self) -> np.ndarray:
        return self.k @ (self.a[:, :, None] * self.k_prime)


@dataclass(frozen=True)
class SLOCCMeasure:
    """Seeded sampler of ``(K, A_n, K')``.

    ``log_a_sigma`` is the standard deviation of the log-diagonal of ``A``
    before centring; ``0`` gives ``A_n = 1`` (pure double unitary twirl).
    """

    samples: int = 5000
    seed: int = 0
    log_a_sigma: float = 0.5
    compact: str = "haar"
    d: int = 2

    def __post_init__(self):
        if self.compact not in ("haar", "clifford"):
            raise ValueError("compact must be 'haar' or 'clifford'")
        if self.compact == "clifford" and self.d != 2:
            raise ValueError("the Clifford sampler is single-qubit only")
        if self.samples < 1 or self.d < 2:
            raise ValueError("need samples >= 1 and d >= 2")

    def draw(self) -> SLOCCSamples:
        rng = np.random.default_rng(self.seed)
        n = self.samples
        if self.compact == "clifford":
            c = clifford_group()
            k, kp = c[rng.integers(0, len(c), n)], c[rng.integers(0, len(c), n)]
        elif self.d == 2:
            k, kp = haar_su2(rng, n), haar_su2(rng, n)
        else:
            k = unitary_group.rvs(self.d, size=n, random_state=rng).reshape(n, self.d, self.d)
            kp = unitary_group.rvs(self.d, size=n, random_state=rng).reshape(n, self.d, self.d)
        x = rng.normal(0.0, self.log_a_sigma, size=(n, self.d)) if self.log_a_sigma > 0 else np.zeros((n, self.d))
        x -= x.mean(axis=1, keepdims=True)
        a = np.exp(x)
        a /= a.max(axis=1, keepdims=True)
        return SLOCCSamples(k, a, kp, np.full(n, 1.0 / n))

    def describe(self) -> dict:
        return {"kind": "slocc", "samples": self.samples, "seed": self.seed, "log_a_sigma": self.log_a_sigma,
                "compact": self.compact, "d": self.d}


def explicit_samples(k, a, k_prime, weights=None) -> SLOCCSamples:
    """Wrap user-chosen triples; rejects diagonals with a zero entry."""
    k = np.asarray(k, dtype=complex)
    kp = np.asarray(k_prime, dtype=complex)
    a = np.asarray(a, dtype=complex)
    if a.ndim == 3:
        a = np.diagonal(a, axis1=1, axis2=2)
    if np.any(np.abs(a) == 0):
        raise ValueError("diagonal factor A has a zero entry")
    a = a / np.abs(a).max(axis=1, keepdims=True)
    n = len(a)
    w = np.full(n, 1.0 / n) if weights is None else np.asarray(weights, dtype=float)
    if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
        raise ValueError("weights must be nonnegative and sum to 1")
    return SLOCCSamples(k, a, kp, w)


def _batched_power(m: np.ndarray, n: int) -> np.ndarray:
    out = m
    for _ in range(n - 1):
        s, p, _ = out.shape
        d = m.shape[1]
        out = np.einsum("sab,scd->sacbd", out, m).reshape(s, p * d, p * d)
    return out


def _tree_sum0(x: np.ndarray) -> np.ndarray:
    while x.shape[0] > 1:
        if x.shape[0] % 2:
            x = np.concatenate([x[:-2], (x[-2] + x[-1])[None]])
        if x.shape[0] > 1:
            x = x[0::2] + x[1::2]
    return x[0]


def slocc_terms(rho, n: int, samples: SLOCCSamples) -> np.ndarray:
    """Per-sample ``M^{(x)n} rho M^{(x)n dagger}``, shape ``(S, D, D)``."""
    r = np.asarray(rho.data if isinstance(rho, DenseOperator) else rho, dtype=complex)
    m = samples.operators()
    d = m.shape[1]
    if r.shape != (d ** n, d ** n):
        raise ValueError(f"state must be {d ** n}x{d ** n} for N={n}, d={d}")
    out = np.empty((len(m), d ** n, d ** n), dtype=complex)
    for start in range(0, len(m), CHUNK):
        mn = _batched_power(m[start:start + CHUNK], n)
        out[start:start + CHUNK] = mn @ r @ mn.conj().transpose(0, 2, 1)
    return out


def slocc_twirl(rho, n: int, d: int = 2, measure: SLOCCMeasure | SLOCCSamples | None = None) -> DenseOperator:
    measure = SLOCCMeasure(d=d) if measure is None else measure
    samples = measure.draw() if isinstance(measure, SLOCCMeasure) else measure
    terms = slocc_terms(rho, n, samples)
    return DenseOperator(_tree_sum0(samples.weights[:, None, None] * terms))


@dataclass
class BlockFit:
    label: str
    beta: float | None
    relative_residual: float
    z_rms: float
    z_max: float
    components: int


@dataclass
class SLOCCReport:
    n: int
    measure: dict
    groups: int
    blocks: list
    off_block: float
    z_limit: float = 3.0

    @property
    def passed(self) -> bool:
        return all(b.z_rms <= self.z_limit for b in self.blocks if b.beta is not None)

    def to_dict(self) -> dict:
        return {
            "N": self.n,
            "measure": self.measure,
            "jackknife_groups": self.groups,
            "z_limit": self.z_limit,
            "off_block": self.off_block,
            "passed": self.passed,
            "blocks": [b.__dict__ for b in self.blocks],
        }


def _fit(inp: np.ndarray, out: np.ndarray):
    beta = float(np.vdot(inp, out).real / np.vdot(inp, inp).real)
    return beta, out - beta * inp


def slocc_proportionality(rho, basis: SchurBasis, measure: SLOCCMeasure | SLOCCSamples, groups: int = 100,
                          z_limit: float = 3.0) -> SLOCCReport:
    """Fit ``out_i = beta_i in_i`` per irrep block; jackknife z-scores of the residual."""
    samples = measure.draw() if isinstance(measure, SLOCCMeasure) else measure
    r = np.asarray(rho.data if isinstance(rho, DenseOperator) else rho, dtype=complex)
    terms = slocc_terms(r, basis.n_sites, samples)
    b = basis.matrix
    terms = b.conj().T @ terms @ b
    w = samples.weights
    s_in = basis.to_schur(r)
    total = _tree_sum0(w[:, None, None] * terms)

    g = min(groups, len(w))
    edges = np.linspace(0, len(w), g + 1).astype(int)
    part_sums = np.array([_tree_sum0(w[a:c, None, None] * terms[a:c]) for a, c in zip(edges[:-1], edges[1:])])
    part_w = np.array([w[a:c].sum() for a, c in zip(edges[:-1], edges[1:])])
    loo = (total[None] - part_sums) / (1.0 - part_w)[:, None, None]
    full_mean = total / w.sum()

    fits = []
    for ir in basis.irreps:
        sl = ir.slice
        inp = s_in[sl, sl]
        scale = float(np.max(np.abs(inp))) if inp.size else 0.0
        if scale == 0.0:
            fits.append(BlockFit(label_str(ir.label), None, 0.0, 0.0, 0.0, 0))
            continue
        beta, resid = _fit(inp, full_mean[sl, sl])
        jr = np.array([_fit(inp, m[sl, sl])[1] for m in loo])
        comp = np.concatenate([resid.real.ravel(), resid.imag.ravel()])
        jcomp = np.concatenate([jr.real.reshape(g, -1), jr.imag.reshape(g, -1)], axis=1)
        se = np.sqrt((g - 1) / g * np.sum((jcomp - jcomp.mean(axis=0)) ** 2, axis=0))
        floor = 1e-13 * max(abs(beta), 1.0) * scale
        keep = (se > floor) | (np.abs(comp) > floor)
        with np.errstate(divide="ignore"):
            z = np.abs(comp[keep]) / se[keep]
        z_rms = float(np.sqrt(np.mean(z ** 2))) if z.size else 0.0
        z_max = float(np.max(z)) if z.size else 0.0
        rel = float(np.linalg.norm(resid) / max(np.linalg.norm(beta * inp), 1e-300))
        fits.append(BlockFit(label_str(ir.label), beta, rel, z_rms, z_max, int(z.size)))
    return SLOCCReport(basis.n_sites, measure.describe() if isinstance(measure, SLOCCMeasure) else {"kind": "explicit"},
                       g, fits, float(basis.off_block_mass(full_mean)), z_limit)
