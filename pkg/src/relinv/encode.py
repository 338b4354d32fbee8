"""Invariant encodings for the four kinematic schemes and their decoder.

Every encoded state is a list of :class:`Sector` objects whose density
matrices are tensored together (leftmost sector most significant).  The
massive, massless and total-momentum schemes have a single sector; a dyon
encoding carries one spin sector per particle species plus the
pairwise-helicity register.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Mapping, Sequence

import numpy as np

from .errors import DimensionMismatchError, InvarianceWarning, KinematicsError, SuperselectionError
from .little_group import FourMomentum, as_spin
from .schur import (SchurBasis, build_charge_basis, build_irrep_basis, build_schur_basis_su2, label_str,
                    parse_label)
from .tensor import DenseOperator, StateVector, ket_to_density

BLOCK_TOL = 1e-12
PSD_FLOOR = -1e-10


@dataclass(frozen=True, eq=False)
class Sector:
    name: str
    basis: SchurBasis
    blocks: dict
    matrix: np.ndarray
    protected: bool = True


@dataclass(frozen=True, eq=False)
class InvariantState:
    """Encoded state on the discrete degrees of freedom plus its momentum labels.

    Momenta are symbolic labels; the density matrix covers spin, helicity,
    pairwise-helicity or total-spin registers only.
    """

    scheme: str
    sectors: tuple
    kinematics: dict = field(default_factory=dict)
    info: dict = field(default_factory=dict)

    @property
    def matrix(self) -> np.ndarray:
        return reduce(np.kron, (s.matrix for s in self.sectors))

    @property
    def basis(self) -> SchurBasis:
        return self.sectors[0].basis

    @property
    def blocks(self) -> dict:
        return self.sectors[0].blocks

    def density(self) -> DenseOperator:
        return DenseOperator(self.matrix, basis="product", density=True)

    def sector(self, name: str) -> Sector:
        for s in self.sectors:
            if s.name == name:
                return s
        raise KeyError(name)

    @property
    def logical_qubits(self) -> dict:
        """``log2(D_V)`` for each populated block of the first sector."""
        b = self.basis
        return {k: float(np.log2(b.irrep(k).multiplicity)) for k in self.blocks}


def _normalize_blocks(basis: SchurBasis, blocks: Mapping, require_unit_trace: bool = True) -> dict:
    out = {}
    total = 0.0
    for key, value in blocks.items():
        label = parse_label(key) if isinstance(key, str) else Fraction(key)
        ir = basis.irrep(label)
        m = np.atleast_2d(np.asarray(value, dtype=complex))
        if m.shape != (ir.multiplicity, ir.multiplicity):
            raise DimensionMismatchError(
                f"block {label_str(label)} must be {ir.multiplicity}x{ir.multiplicity}, got {m.shape}"
            )
        if np.max(np.abs(m - m.conj().T)) > BLOCK_TOL:
            raise ValueError(f"block {label_str(label)} is not Hermitian")
        if np.linalg.eigvalsh(m).min() < PSD_FLOOR:
            raise ValueError(f"block {label_str(label)} is not positive semidefinite")
        out[label] = m
        total += np.trace(m).real
    if require_unit_trace and abs(total - 1.0) > BLOCK_TOL:
        raise ValueError(f"blocks have total trace {total:.15f}, expected 1")
    return dict(sorted(out.items()))


def assemble(basis: SchurBasis, blocks: Mapping) -> np.ndarray:
    """``sum_i 1/D_L sum rho^i_{mu1 mu2} Pi_i^{mu1 mu2}`` in the product basis."""
    s = np.zeros((basis.dim, basis.dim), dtype=complex)
    for label, m in blocks.items():
        ir = basis.irrep(label)
        s[ir.slice, ir.slice] = np.kron(np.eye(ir.dim_irrep) / ir.dim_irrep, m)
    return basis.from_schur(s)


def decode_multiplicity(state, basis: SchurBasis, label) -> np.ndarray:
    """``rho^i_{mu1 mu2} = Tr(state Pi_i^{mu2 mu1})``."""
    ir = basis.irrep(label)
    s = basis.to_schur(np.asarray(state, dtype=complex))
    blk = s[ir.slice, ir.slice].reshape(ir.dim_irrep, ir.multiplicity, ir.dim_irrep, ir.multiplicity)
    return np.einsum("rarb->ab", blk)


def decode_all(state, basis: SchurBasis) -> dict:
    s = basis.to_schur(np.asarray(state, dtype=complex))
    out = {}
    for ir in basis.irreps:
        blk = s[ir.slice, ir.slice].reshape(ir.dim_irrep, ir.multiplicity, ir.dim_irrep, ir.multiplicity)
        out[ir.label] = np.einsum("rarb->ab", blk)
    return out


def blocks_from_density(basis: SchurBasis, rho, tol: float = BLOCK_TOL) -> dict:
    """Decode a density that must not carry coherences between irrep blocks."""
    off = basis.off_block_mass(basis.to_schur(rho))
    if off > tol:
        raise SuperselectionError(f"state has coherences between irrep blocks (max {off:.2e})")
    return {k: v for k, v in decode_all(rho, basis).items() if np.max(np.abs(v)) > 0}


def _single_sector_state(scheme, basis, blocks, kinematics, name="spin") -> InvariantState:
    blocks = _normalize_blocks(basis, blocks)
    return InvariantState(scheme, (Sector(name, basis, blocks, assemble(basis, blocks)),), dict(kinematics))


def encode_massive_equal_momentum(basis: SchurBasis, p: FourMomentum, blocks: Mapping) -> InvariantState:
    if basis.group != "SU(2)":
        raise ValueError("massive encoding needs an SU(2) Schur basis")
    if not p.is_massive:
        raise KinematicsError("massive encoding needs a massive momentum")
    return _single_sector_state("massive", basis, blocks, {"p": p, "N": basis.n_sites, "spin": Fraction(1, 2)})


def encode_massless_helicity_sum(basis: SchurBasis, p: FourMomentum, blocks: Mapping) -> InvariantState:
    if basis.group != "U(1)":
        raise ValueError("massless encoding needs a U(1) helicity basis")
    if p.is_massive:
        raise KinematicsError("massless encoding needs a massless momentum")
    return _single_sector_state("massless", basis, blocks, {"p": p, "N": basis.n_sites}, name="helicity")


def product_state(scheme: str, basis: SchurBasis, rho, kinematics: Mapping, name: str = "spin") -> InvariantState:
    """Wrap an arbitrary density (e.g. a negative control) without invariance checks."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (basis.dim, basis.dim):
        raise DimensionMismatchError(f"state must be {basis.dim}x{basis.dim}")
    sec = Sector(name, basis, decode_all(rho, basis), rho, protected=True)
    return InvariantState(scheme, (sec,), dict(kinematics), {"control": True})


# --- dyons -----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Species:
    charge: tuple[int, int]
    momentum: FourMomentum
    spin: Fraction = Fraction(1, 2)

    @property
    def mass(self) -> float:
        return self.momentum.mass


@dataclass(frozen=True, eq=False)
class DyonConfiguration:
    """Ordered particles with (electric, magnetic) charges and per-species kinematics."""

    charges: tuple
    species: dict

    def __post_init__(self):
        ch = tuple((int(e), int(g)) for e, g in self.charges)
        object.__setattr__(self, "charges", ch)
        missing = {c for c in ch} - set(self.species)
        if missing:
            raise ValueError(f"no species kinematics for charges {sorted(missing)}")
        for key, sp in self.species.items():
            if not sp.momentum.is_massive:
                raise KinematicsError(f"species {key} must be massive")

    @property
    def n(self) -> int:
        return len(self.charges)

    @property
    def q(self) -> np.ndarray:
        """``q[a, b] = e_a g_b - e_b g_a``."""
        e = np.array([c[0] for c in self.charges])
        g = np.array([c[1] for c in self.charges])
        return np.outer(e, g) - np.outer(g, e)

    @property
    def q_sum(self) -> int:
        """Sum of ``q_{a a'}`` over ``a > a'``."""
        return int(np.tril(self.q, -1).sum())

    @property
    def total_charge(self) -> tuple[int, int]:
        return (sum(c[0] for c in self.charges), sum(c[1] for c in self.charges))

    def species_counts(self) -> dict:
        out = {}
        for c in self.charges:
            out[c] = out.get(c, 0) + 1
        return dict(sorted(out.items()))

    def __add__(self, other: "DyonConfiguration") -> "DyonConfiguration":
        for key in set(self.species) & set(other.species):
            if self.species[key] is not other.species[key] and not np.allclose(
                self.species[key].momentum.components, other.species[key].momentum.components
            ):
                raise ValueError(f"species {key} has different momenta in the two configurations")
        return DyonConfiguration(self.charges + other.charges, {**other.species, **self.species})


ELECTRIC = (1, 0)
MAGNETIC = (0, 1)


def default_species() -> dict:
    """Electric charge (m=1) moving along +x and monopole (m=2) moving along +y."""
    return {
        ELECTRIC: Species(ELECTRIC, FourMomentum.massive(1.0, [0.6, 0.0, 0.1])),
        MAGNETIC: Species(MAGNETIC, FourMomentum.massive(2.0, [0.0, -0.5, 0.3])),
    }


def build_dyon_cell(bit: int, species: Mapping | None = None) -> DyonConfiguration:
    """Four-particle cell: bit 1 has (q12, q34) = (1, -1), bit 0 has (-1, 1)."""
    species = dict(default_species() if species is None else species)
    if bit == 1:
        charges = (ELECTRIC, MAGNETIC, MAGNETIC, ELECTRIC)
    elif bit == 0:
        charges = (MAGNETIC, ELECTRIC, ELECTRIC, MAGNETIC)
    else:
        raise ValueError("bit must be 0 or 1")
    return DyonConfiguration(charges, species)


@dataclass(frozen=True, eq=False)
class DyonQubit:
    """Two-branch which-way superposition over pairwise-helicity configurations."""

    branches: tuple
    state: StateVector
    invariant: bool

    @property
    def q_sums(self) -> tuple[int, ...]:
        return tuple(b.q_sum for b in self.branches)

    def describe(self) -> dict:
        return {
            "branches": [[list(c) for c in b.charges] for b in self.branches],
            "q_sums": list(self.q_sums),
            "amplitudes": [[float(a.real), float(a.imag)] for a in self.state.amplitudes],
            "invariant": self.invariant,
        }


def encode_dyon_qubit(cell_a: DyonConfiguration, cell_b: DyonConfiguration, zeta: complex,
                      zeta_prime: complex) -> DyonQubit:
    amps = np.array([zeta, zeta_prime], dtype=complex)
    if abs(np.vdot(amps, amps).real - 1.0) > 1e-12:
        raise ValueError("|zeta|^2 + |zeta'|^2 must equal 1")
    if sorted(cell_a.charges) != sorted(cell_b.charges):
        raise SuperselectionError(
            f"branches carry different charge content {cell_a.total_charge} vs {cell_b.total_charge}"
        )
    for key in cell_a.species_counts():
        pa, pb = cell_a.species[key].momentum.components, cell_b.species[key].momentum.components
        if not np.allclose(pa, pb, rtol=0, atol=1e-12):
            raise ValueError(f"species {key} has different momenta in the two branches")
    invariant = cell_a.q_sum == cell_b.q_sum
    if not invariant:
        warnings.warn(
            f"branch pairwise-helicity sums differ ({cell_a.q_sum} vs {cell_b.q_sum}); encoding is not invariant",
            InvarianceWarning,
            stacklevel=2,
        )
    return DyonQubit((cell_a, cell_b), StateVector(amps, basis="which-way"), invariant)


def _species_default_blocks(basis: SchurBasis) -> dict:
    ir = basis.irreps[0]
    return {ir.label: np.eye(ir.multiplicity) / ir.multiplicity}


def encode_dyon_state(qubit: DyonQubit, spin_blocks: Mapping | None = None) -> InvariantState:
    """Spin sectors (one per species, collective within species) tensored with the branch register.

    ``spin_blocks`` maps a species charge tuple to its block dict; species
    without an entry get the lowest-total-spin block maximally mixed.
    """
    cell = qubit.branches[0]
    spin_blocks = {} if spin_blocks is None else dict(spin_blocks)
    sectors = []
    for key, count in cell.species_counts().items():
        sp = cell.species[key]
        if sp.spin != Fraction(1, 2):
            raise ValueError("dyon spin sectors are built for spin-1/2 species")
        basis = build_schur_basis_su2(count)
        blocks = _normalize_blocks(basis, spin_blocks.get(key, _species_default_blocks(basis)))
        sectors.append(Sector(f"spin[e={key[0]},g={key[1]}]", basis, blocks, assemble(basis, blocks)))
    pw_basis = build_charge_basis(qubit.q_sums)
    rho_q = ket_to_density(qubit.state.amplitudes)
    sectors.append(Sector("pairwise", pw_basis, decode_all(rho_q, pw_basis), rho_q, protected=qubit.invariant))
    kin = {"species": dict(cell.species), "N": cell.n, "qubit": qubit}
    flags = [] if qubit.invariant else [
        {"kind": "non-invariant-branch-pair", "q_sums": list(qubit.q_sums)}
    ]
    return InvariantState("dyon", tuple(sectors), kin, {"qubit": qubit.describe(), "flags": flags})


# --- fixed total momentum ---------------------------------------------------

@dataclass(frozen=True, eq=False)
class TotalMomentumLabel:
    """Fixed ``(s, J, P)`` together with the CM helicity sets labelling multiplicity."""

    mandelstam: float
    j: Fraction
    momentum: FourMomentum
    multiplicity_labels: tuple

    def __post_init__(self):
        j = as_spin(self.j)
        object.__setattr__(self, "j", j)
        if not self.mandelstam > 0:
            raise KinematicsError("Mandelstam s must be positive")
        p = self.momentum
        if not p.is_massive or abs(p.mass ** 2 - self.mandelstam) > 1e-9 * p.energy ** 2:
            raise KinematicsError("total momentum must satisfy P^2 = s")
        labels = tuple(tuple(Fraction(x).limit_denominator(2) for x in lab) for lab in self.multiplicity_labels)
        if not labels:
            raise ValueError("need at least one multiplicity label")
        if len(set(labels)) != len(labels):
            raise ValueError("multiplicity labels must be distinct helicity sets")
        for lab in labels:
            if len(lab) == 2:
                diff = lab[0] - lab[1]
                if abs(diff) > j or (j - diff).denominator != 1:
                    raise ValueError(
                        f"helicities {tuple(map(str, lab))} give lambda1-lambda2={diff}, outside |Sigma_J| <= J={j}"
                    )
        object.__setattr__(self, "multiplicity_labels", labels)

    @classmethod
    def build(cls, mandelstam: float, j, p3, labels: Sequence) -> "TotalMomentumLabel":
        return cls(mandelstam, Fraction(j), FourMomentum.massive(np.sqrt(mandelstam), p3), tuple(labels))

    @property
    def dim_irrep(self) -> int:
        return int(2 * self.j + 1)

    @property
    def multiplicity(self) -> int:
        return len(self.multiplicity_labels)


def encode_total_momentum(label: TotalMomentumLabel, block) -> InvariantState:
    basis = build_irrep_basis(label.j, label.multiplicity)
    kin = {"P": label.momentum, "s": label.mandelstam, "J": label.j, "label": label}
    return _single_sector_state("total-momentum", basis, {label.j: block}, kin, name="total-spin")
