"""Twirling channels over finite or sampled measures, and invariance reports.

A measure is always realized as a finite weighted list of group elements;
``twirl`` returns ``sum_k w_k U_k rho U_k^dagger`` accumulated by pairwise
summation so the result does not depend on the thread count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import reduce
from typing import Callable, Sequence

import numpy as np

from .encode import InvariantState, Sector, decode_all
from .errors import KinematicsError
from .little_group import (FourMomentum, LorentzTransform, as_spin, pairwise_phase, spin_matrix,
                           wigner_phase_massless, wigner_rotation_massive)
from .schur import helicity_strings, label_str
from .tensor import DenseOperator, trace_distance

WEIGHT_TOL = 1e-12
UNITARY_TOL = 1e-10
THREADS_ENV = "RELINV_THREADS"


def tree_sum(items: Sequence[np.ndarray]) -> np.ndarray:
    """Pairwise summation; fixed association order for a given length."""
    items = list(items)
    if not items:
        raise ValueError("nothing to sum")
    while len(items) > 1:
        nxt = [items[k] + items[k + 1] for k in range(0, len(items) - 1, 2)]
        if len(items) % 2:
            nxt.append(items[-1])
        items = nxt
    return items[0]


def thread_count(workers: int | None = None) -> int:
    if workers is None:
        workers = int(os.environ.get(THREADS_ENV, "1") or 1)
    return max(1, int(workers))


def parallel_map(fn: Callable, items: Sequence, workers: int | None = None) -> list:
    n = thread_count(workers)
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


# --- measures ----------------------------------------------------------------

RAPIDITY_KINDS = ("half-gaussian", "gaussian", "student-t", "none")
ROTATION_KINDS = ("uniform", "z", "none")


def _unit_vector(rng: np.random.Generator) -> np.ndarray:
    while True:
        v = rng.normal(size=3)
        n = np.linalg.norm(v)
        if n > 1e-8:
            return v / n


@dataclass(frozen=True)
class LorentzSampler:
    """Seeded sampler of ``Lambda = B(chi, n_b) R(n_r, theta)``.

    Rapidities beyond ``max_rapidity`` are redrawn.  ``boost_axis`` fixes the
    boost direction; otherwise it is uniform on the sphere.
    """

    samples: int = 500
    seed: int = 0
    rapidity: str = "half-gaussian"
    sigma: float = 1.0
    df: float = 2.0
    max_rapidity: float = 8.0
    boost_axis: tuple | None = None
    rotation: str = "uniform"

    def __post_init__(self):
        if self.rapidity not in RAPIDITY_KINDS:
            raise ValueError(f"rapidity must be one of {RAPIDITY_KINDS}")
        if self.rotation not in ROTATION_KINDS:
            raise ValueError(f"rotation must be one of {ROTATION_KINDS}")
        if self.samples < 1:
            raise ValueError("samples must be positive")
        if self.sigma < 0 or self.max_rapidity <= 0:
            raise ValueError("sigma must be >= 0 and max_rapidity > 0")

    def _rapidity(self, rng) -> float:
        while True:
            if self.rapidity == "none":
                return 0.0
            if self.rapidity == "gaussian":
                x = rng.normal(0.0, self.sigma)
            elif self.rapidity == "half-gaussian":
                x = abs(rng.normal(0.0, self.sigma))
            else:
                x = abs(rng.standard_t(self.df)) * self.sigma
            if abs(x) <= self.max_rapidity:
                return float(x)

    def elements(self) -> list[LorentzTransform]:
        rng = np.random.default_rng(self.seed)
        out = []
        for _ in range(self.samples):
            if self.rotation == "uniform":
                rot = LorentzTransform.rotation(_unit_vector(rng), rng.uniform(0.0, 2 * np.pi))
            elif self.rotation == "z":
                rot = LorentzTransform.rotation([0, 0, 1], rng.uniform(0.0, 2 * np.pi))
            else:
                rot = LorentzTransform.identity()
            chi = self._rapidity(rng)
            axis = _unit_vector(rng) if self.boost_axis is None else self.boost_axis
            out.append(LorentzTransform.boost(chi, axis) @ rot)
        return out

    def describe(self) -> dict:
        d = {
            "samples": self.samples,
            "seed": self.seed,
            "rapidity": self.rapidity,
            "sigma": self.sigma,
            "max_rapidity": self.max_rapidity,
            "rotation": self.rotation,
            "boost_axis": None if self.boost_axis is None else [float(x) for x in self.boost_axis],
        }
        if self.rapidity == "student-t":
            d["df"] = self.df
        return d


@dataclass(frozen=True, eq=False)
class GroupMeasure:
    """Normalized finite measure: ``delta``, ``discrete`` or sampled ``parametric``."""

    kind: str
    elements: tuple = ()
    weights: tuple = ()
    sampler: LorentzSampler | None = None

    def __post_init__(self):
        if self.kind == "parametric":
            if self.sampler is None:
                raise ValueError("parametric measure needs a sampler")
            els = tuple(self.sampler.elements())
            object.__setattr__(self, "elements", els)
            object.__setattr__(self, "weights", tuple([1.0 / len(els)] * len(els)))
        elif self.kind in ("delta", "discrete"):
            if not self.elements or len(self.elements) != len(self.weights):
                raise ValueError("elements and weights must be non-empty and of equal length")
        else:
            raise ValueError(f"unknown measure kind {self.kind!r}")
        w = np.asarray(self.weights, dtype=float)
        if np.any(w < 0):
            raise ValueError("measure weights must be nonnegative")
        if abs(w.sum() - 1.0) > WEIGHT_TOL:
            raise ValueError(f"measure weights sum to {w.sum():.15f}, expected 1")

    @classmethod
    def delta(cls, g) -> "GroupMeasure":
        return cls("delta", (g,), (1.0,))

    @classmethod
    def discrete(cls, elements: Sequence, weights: Sequence[float] | None = None) -> "GroupMeasure":
        elements = tuple(elements)
        if weights is None:
            weights = [1.0 / len(elements)] * len(elements)
        return cls("discrete", elements, tuple(float(x) for x in weights))

    @classmethod
    def parametric(cls, sampler: LorentzSampler) -> "GroupMeasure":
        return cls("parametric", sampler=sampler)

    def __len__(self) -> int:
        return len(self.elements)

    def describe(self) -> dict:
        if self.kind == "parametric":
            return {"kind": "parametric", **self.sampler.describe()}
        d = {"kind": self.kind, "samples": len(self.elements)}
        if all(isinstance(g, LorentzTransform) for g in self.elements):
            d["elements"] = [g.describe() for g in self.elements]
        d["weights"] = [float(w) for w in self.weights]
        return d


# --- representations ---------------------------------------------------------

class LorentzRep:
    """Collective action on the discrete registers of an encoding.

    ``sectors(lt)`` returns one unitary per sector (in the sector order of
    the matching :class:`InvariantState`); ``__call__`` returns their
    Kronecker product.  ``momenta(lt)`` returns the transformed labels.
    """

    scheme = ""

    def sectors(self, lt: LorentzTransform) -> list[np.ndarray]:
        raise NotImplementedError

    def momenta(self, lt: LorentzTransform) -> dict:
        raise NotImplementedError

    def __call__(self, lt: LorentzTransform) -> DenseOperator:
        return DenseOperator(reduce(np.kron, self.sectors(lt)))


class MassiveSpinRep(LorentzRep):
    scheme = "massive"

    def __init__(self, n: int, s, p: FourMomentum):
        if not p.is_massive:
            raise KinematicsError("massive representation needs a massive momentum")
        self.n, self.s, self.p = int(n), as_spin(s), p

    def sectors(self, lt):
        d = spin_matrix(self.s, wigner_rotation_massive(lt, self.p).rotvec)
        return [reduce(np.kron, [d] * self.n)]

    def momenta(self, lt):
        return {"p": lt.apply(self.p)}


class MasslessHelicityRep(LorentzRep):
    scheme = "massless"

    def __init__(self, n: int, p: FourMomentum, helicity=0.5):
        if p.is_massive:
            raise KinematicsError("massless representation needs a massless momentum")
        self.n, self.p = int(n), p
        # site value 0 carries +helicity, 1 carries -helicity
        self.h = np.array([helicity * sum(s) for s in helicity_strings(n)])

    def sectors(self, lt):
        omega = wigner_phase_massless(lt, self.p).angle
        return [np.diag(np.exp(1j * omega * self.h))]

    def momenta(self, lt):
        return {"p": lt.apply(self.p)}


class DyonRep(LorentzRep):
    """Spin rotations per species plus the pairwise-helicity phase register.

    ``model="species"`` uses one pair phase ``phi(Lambda, p_1, p_2)`` for the
    two species (taken in sorted charge-tuple order), so branch ``k`` picks up ``exp(i Sigma q^k phi)``.
    ``model="ordered"`` gives every particle pair its own antisymmetric phase
    ``phi(Lambda, p_a, p_b)`` weighted by ``q_ab``.
    """

    scheme = "dyon"

    def __init__(self, qubit, model: str = "species"):
        if model not in ("species", "ordered"):
            raise ValueError("model must be 'species' or 'ordered'")
        self.qubit, self.model = qubit, model
        cell = qubit.branches[0]
        self.species = cell.species
        self.counts = cell.species_counts()
        if model == "species" and len(self.counts) != 2:
            raise ValueError("the species model needs exactly two species")

    def branch_phases(self, lt) -> np.ndarray:
        if self.model == "species":
            a, b = (self.species[k].momentum for k in self.counts)
            phi = pairwise_phase(lt, a, b).angle
            return np.array([b.q_sum * phi for b in self.qubit.branches])
        out = []
        for br in self.qubit.branches:
            q = br.q
            total = 0.0
            for a in range(br.n):
                for c in range(a):
                    if q[a, c]:
                        pa = br.species[br.charges[a]].momentum
                        pc = br.species[br.charges[c]].momentum
                        total += q[a, c] * pairwise_phase(lt, pa, pc).angle
            out.append(total)
        return np.array(out)

    def sectors(self, lt):
        mats = []
        for key, count in self.counts.items():
            sp = self.species[key]
            d = spin_matrix(sp.spin, wigner_rotation_massive(lt, sp.momentum).rotvec)
            mats.append(reduce(np.kron, [d] * count))
        mats.append(np.diag(np.exp(1j * self.branch_phases(lt))))
        return mats

    def momenta(self, lt):
        return {f"p[e={k[0]},g={k[1]}]": lt.apply(self.species[k].momentum) for k in self.counts}


class TotalMomentumRep(LorentzRep):
    scheme = "total-momentum"

    def __init__(self, label):
        self.label = label

    def sectors(self, lt):
        d = spin_matrix(self.label.j, wigner_rotation_massive(lt, self.label.momentum).rotvec)
        return [np.kron(d, np.eye(self.label.multiplicity))]

    def momenta(self, lt):
        return {"P": lt.apply(self.label.momentum)}


def lorentz_rep_massive(n: int, s, p: FourMomentum) -> MassiveSpinRep:
    return MassiveSpinRep(n, s, p)


def lorentz_rep_massless(n: int, p: FourMomentum, helicity=0.5) -> MasslessHelicityRep:
    return MasslessHelicityRep(n, p, helicity)


def lorentz_rep_dyon(qubit, model: str = "species") -> DyonRep:
    return DyonRep(qubit, model)


def lorentz_rep_total_momentum(label) -> TotalMomentumRep:
    return TotalMomentumRep(label)


def rep_for_state(state: InvariantState, **kw) -> LorentzRep:
    k = state.kinematics
    if state.scheme == "massive":
        return MassiveSpinRep(k["N"], k.get("spin", "1/2"), k["p"])
    if state.scheme == "massless":
        return MasslessHelicityRep(k["N"], k["p"])
    if state.scheme == "dyon":
        return DyonRep(k["qubit"], **kw)
    if state.scheme == "total-momentum":
        return TotalMomentumRep(k["label"])
    raise ValueError(f"no Lorentz representation for scheme {state.scheme!r}")


# --- twirl ---------------------------------------------------------------------

def _as_matrix(x) -> np.ndarray:
    return np.asarray(x.data if isinstance(x, DenseOperator) else x, dtype=complex)


def _check_unitary(u: np.ndarray):
    if np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) > UNITARY_TOL:
        raise ValueError("representation image is not unitary within 1e-10")


def twirl(rho, rep: Callable, measure: GroupMeasure, workers: int | None = None) -> DenseOperator:
    """``sum_k w_k U_k rho U_k^dagger`` with ``U_k = rep(g_k)``."""
    r = _as_matrix(rho)

    def term(gw):
        g, w = gw
        u = _as_matrix(rep(g))
        if u.shape != r.shape:
            raise ValueError(f"representation dimension {u.shape} does not match state {r.shape}")
        _check_unitary(u)
        return w * (u @ r @ u.conj().T)

    out = tree_sum(parallel_map(term, list(zip(measure.elements, measure.weights)), workers))
    return DenseOperator(out)


# --- invariance report ---------------------------------------------------------

@dataclass
class BlockDeviation:
    sector: str
    label: str
    dim_irrep: int
    multiplicity: int
    protected: bool
    average_coefficient: float
    worst_coefficient: float
    average_block: float
    worst_block: float

    @property
    def average(self) -> float:
        return max(self.average_coefficient, self.average_block)

    @property
    def worst(self) -> float:
        return max(self.worst_coefficient, self.worst_block)


@dataclass
class TwirlReport:
    scheme: str
    measure: dict
    samples: int
    seed: int | None
    threshold: float
    blocks: list
    trace_distance: float
    sector_state_deviation: dict
    flags: list = field(default_factory=list)

    @property
    def average_case(self) -> float:
        vals = [b.average for b in self.blocks if b.protected]
        return max(vals) if vals else 0.0

    @property
    def worst_case(self) -> float:
        vals = [b.worst for b in self.blocks if b.protected]
        return max(vals) if vals else 0.0

    @property
    def passed(self) -> bool:
        return self.worst_case <= self.threshold

    def to_dict(self) -> dict:
        return {
            "scheme": self.scheme,
            "measure": self.measure,
            "samples": self.samples,
            "seed": self.seed,
            "threshold": self.threshold,
            "average_case_deviation": self.average_case,
            "worst_case_deviation": self.worst_case,
            "trace_distance": self.trace_distance,
            "passed": self.passed,
            "flags": self.flags,
            "sector_state_deviation": self.sector_state_deviation,
            "blocks": [
                {
                    "sector": b.sector,
                    "irrep": b.label,
                    "D_L": b.dim_irrep,
                    "D_V": b.multiplicity,
                    "protected": b.protected,
                    "average_coefficient_deviation": b.average_coefficient,
                    "worst_coefficient_deviation": b.worst_coefficient,
                    "average_block_deviation": b.average_block,
                    "worst_block_deviation": b.worst_block,
                }
                for b in self.blocks
            ],
        }


def _schur_blocks(sec: Sector, rho: np.ndarray) -> dict:
    s = sec.basis.to_schur(rho)
    return {ir.label: s[ir.slice, ir.slice] for ir in sec.basis.irreps}


def _max_abs_diff(a: dict, b: dict) -> dict:
    return {k: float(np.max(np.abs(a[k] - b[k]))) if a[k].size else 0.0 for k in a}


def _sector_deviations(sec: Sector, rho: np.ndarray):
    """Coefficient and block deviations of ``rho`` relative to the sector's own state."""
    coef = _max_abs_diff(decode_all(rho, sec.basis), decode_all(sec.matrix, sec.basis))
    blk = _max_abs_diff(_schur_blocks(sec, rho), _schur_blocks(sec, sec.matrix))
    return coef, blk


def _partial_sector(full: np.ndarray, dims: list[int], k: int) -> np.ndarray:
    t = full.reshape(dims + dims)
    n = len(dims)
    letters = "abcdefghijklmnop"
    rows = [letters[i] for i in range(n)]
    cols = [letters[i] if i != k else letters[n + 1] for i in range(n)]
    rows[k] = letters[n]
    return np.einsum("".join(rows) + "".join(cols) + "->" + letters[n] + letters[n + 1], t)


def invariance_report(state: InvariantState, measure: GroupMeasure, rep: LorentzRep | None = None,
                      threshold: float = 1e-9, workers: int | None = None) -> TwirlReport:
    """Per-sample and averaged deviations of the decoded blocks of every sector."""
    rep = rep_for_state(state) if rep is None else rep
    secs = state.sectors
    pairs = list(zip(measure.elements, measure.weights))

    def per_sample(gw):
        g, w = gw
        us = rep.sectors(g)
        if len(us) != len(secs):
            raise ValueError("representation and state have different sector structure")
        res = []
        for u, sec in zip(us, secs):
            _check_unitary(u)
            out = u @ sec.matrix @ u.conj().T
            coef, blk = _sector_deviations(sec, out)
            res.append((coef, blk, float(np.max(np.abs(out - sec.matrix))), w * out))
        return res

    results = parallel_map(per_sample, pairs, workers)

    full = state.matrix
    if len(secs) == 1:
        twirled_secs = [tree_sum([r[0][3] for r in results])]
        twirled_full = twirled_secs[0]
    else:
        def full_term(gw):
            g, w = gw
            u = reduce(np.kron, rep.sectors(g))
            return w * (u @ full @ u.conj().T)

        twirled_full = tree_sum(parallel_map(full_term, pairs, workers))
        dims = [s.matrix.shape[0] for s in secs]
        twirled_secs = [_partial_sector(twirled_full, dims, k) for k in range(len(secs))]

    blocks = []
    state_dev = {}
    for k, sec in enumerate(secs):
        avg_coef, avg_blk = _sector_deviations(sec, twirled_secs[k])
        state_dev[sec.name] = max(r[k][2] for r in results)
        for ir in sec.basis.irreps:
            if ir.label not in sec.blocks:
                continue
            blocks.append(BlockDeviation(
                sec.name, label_str(ir.label), ir.dim_irrep, ir.multiplicity, sec.protected,
                avg_coef[ir.label], max(r[k][0][ir.label] for r in results),
                avg_blk[ir.label], max(r[k][1][ir.label] for r in results),
            ))
    desc = measure.describe()
    return TwirlReport(
        scheme=state.scheme,
        measure=desc,
        samples=len(measure),
        seed=desc.get("seed"),
        threshold=threshold,
        blocks=blocks,
        trace_distance=trace_distance(twirled_full, full),
        sector_state_deviation=state_dev,
        flags=list(state.info.get("flags", [])),
    )
