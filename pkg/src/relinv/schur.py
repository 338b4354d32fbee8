"""Schur bases ``|i, r, mu>`` and the Pi operator families built on them.

Inside every irrep block the basis is ordered column-wise: the column index
is ``offset + r * D_V + mu``.  With the leftmost-significant Kronecker
convention this makes ``Pi_i^{r1 r2} = e^{r1 r2} (x) 1`` and
``Pi_i^{mu1 mu2} = 1 (x) e^{mu1 mu2}`` literally, block by block.

All indices (``r``, ``mu``) are 0-based.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionMismatchError, NumericalFailure
from .little_group import rotvec_from_su2, spin_matrix

SPIN_UP, SPIN_DOWN = 0, 1


def label_str(label) -> str:
    return str(Fraction(label))


def parse_label(text) -> Fraction:
    return Fraction(str(text).strip()).limit_denominator(2)


@dataclass(frozen=True)
class Irrep:
    label: Fraction
    dim_irrep: int  # D_L
    multiplicity: int  # D_V
    offset: int

    @property
    def size(self) -> int:
        return self.dim_irrep * self.multiplicity

    @property
    def slice(self) -> slice:
        return slice(self.offset, self.offset + self.size)


class SchurBasis:
    """Change of basis from a product basis to ``|i, r, mu>``.

    Either ``matrix`` (dense unitary, columns are Schur vectors) or
    ``permutation`` (column ``k`` is product basis vector ``permutation[k]``)
    must be given; the dense form of a permutation basis is built lazily.
    """

    def __init__(self, group: str, n_sites: int, irreps: Sequence[Irrep], matrix=None, permutation=None,
                 site_dim: int = 2):
        self.group = group
        self.n_sites = n_sites
        self.site_dim = site_dim
        self.irreps = tuple(irreps)
        self._by_label = {ir.label: ir for ir in self.irreps}
        self.dim = sum(ir.size for ir in self.irreps)
        if (matrix is None) == (permutation is None):
            raise ValueError("give exactly one of matrix or permutation")
        self._matrix = None if matrix is None else np.asarray(matrix, dtype=complex)
        self.permutation = None if permutation is None else np.asarray(permutation, dtype=np.int64)
        n = self.dim if self._matrix is None else self._matrix.shape[0]
        if n != self.dim:
            raise DimensionMismatchError(f"irrep sizes sum to {self.dim}, basis has dimension {n}")

    def __repr__(self):
        dims = ", ".join(f"{label_str(ir.label)}:{ir.dim_irrep}x{ir.multiplicity}" for ir in self.irreps)
        return f"SchurBasis({self.group}, N={self.n_sites}, [{dims}])"

    @property
    def matrix(self) -> np.ndarray:
        if self._matrix is None:
            m = np.zeros((self.dim, self.dim), dtype=complex)
            m[self.permutation, np.arange(self.dim)] = 1.0
            self._matrix = m
        return self._matrix

    @property
    def labels(self) -> list[Fraction]:
        return [ir.label for ir in self.irreps]

    def irrep(self, label) -> Irrep:
        key = Fraction(label)
        if key not in self._by_label:
            raise KeyError(f"no irrep {label_str(key)} in {self!r}")
        return self._by_label[key]

    def to_schur(self, op) -> np.ndarray:
        op = np.asarray(op, dtype=complex)
        if self.permutation is not None:
            return op[np.ix_(self.permutation, self.permutation)]
        b = self.matrix
        return b.conj().T @ op @ b

    def from_schur(self, op) -> np.ndarray:
        op = np.asarray(op, dtype=complex)
        if self.permutation is not None:
            out = np.empty_like(op)
            out[np.ix_(self.permutation, self.permutation)] = op
            return out
        b = self.matrix
        return b @ op @ b.conj().T

    def block(self, schur_op: np.ndarray, label) -> np.ndarray:
        sl = self.irrep(label).slice
        return schur_op[sl, sl]

    def off_block_mass(self, schur_op: np.ndarray) -> float:
        """Largest entry outside the irrep-diagonal blocks."""
        mask = np.ones(schur_op.shape, dtype=bool)
        for ir in self.irreps:
            mask[ir.slice, ir.slice] = False
        return float(np.max(np.abs(schur_op[mask]))) if mask.any() else 0.0


def _cg_half(j1: Fraction, j: Fraction, m: Fraction, m2: Fraction) -> float:
    """Condon-Shortley ``<j1, m - m2; 1/2, m2 | j, m>``."""
    a = float(2 * j1 + 1)
    half = Fraction(1, 2)
    if j == j1 + half:
        if m2 > 0:
            return np.sqrt(float(j1 + m + half) / a)
        return np.sqrt(float(j1 - m + half) / a)
    if j == j1 - half:
        if m2 > 0:
            return -np.sqrt(float(j1 - m + half) / a)
        return np.sqrt(float(j1 + m + half) / a)
    return 0.0


def coupling_paths(n: int) -> list[tuple[Fraction, ...]]:
    """All intermediate-spin sequences ``(j_1, ..., j_n)`` for n spin-1/2 sites, sorted."""
    half = Fraction(1, 2)
    paths = [(half,)]
    for _ in range(n - 1):
        paths = [p + (p[-1] + d,) for p in paths for d in (half, -half) if p[-1] + d >= 0]
    return sorted(paths)


def su2_multiplicity(n: int, j) -> int:
    j = Fraction(j)
    k = Fraction(n, 2) - j
    if k.denominator != 1 or k < 0:
        return 0
    k = int(k)
    return comb(n, k) - (comb(n, k - 1) if k >= 1 else 0)


def u1_multiplicity(n: int, h: int) -> int:
    if (n + h) % 2 or abs(h) > n:
        return 0
    return comb(n, (n + h) // 2)


def build_schur_basis_su2(n: int) -> SchurBasis:
    """Schur basis of ``n`` qubits under collective SU(2), by iterated coupling."""
    if not 1 <= n <= 10:
        raise ValueError(f"SU(2) Schur basis supports 1 <= N <= 10, got {n}")
    half = Fraction(1, 2)
    up = np.array([1.0, 0.0])
    down = np.array([0.0, 1.0])
    # vecs[path][m] = coupled vector on the first len(path) qubits
    vecs = {(half,): {half: up, -half: down}}
    for _ in range(n - 1):
        nxt = {}
        for path, states in vecs.items():
            j1 = path[-1]
            for j in (j1 + half, j1 - half):
                if j < 0:
                    continue
                out = {}
                m = j
                while m >= -j:
                    v = 0.0
                    for m2, e in ((half, up), (-half, down)):
                        m1 = m - m2
                        if abs(m1) <= j1:
                            v = v + _cg_half(j1, j, m, m2) * np.kron(states[m1], e)
                    out[m] = v
                    m -= 1
                nxt[path + (j,)] = out
        vecs = nxt

    paths = sorted(vecs)
    totals = sorted({p[-1] for p in paths})
    irreps, cols, offset = [], [], 0
    for j in totals:
        mult = [p for p in paths if p[-1] == j]
        dl = int(2 * j + 1)
        irreps.append(Irrep(j, dl, len(mult), offset))
        offset += dl * len(mult)
        m = j
        while m >= -j:
            cols.extend(vecs[p][m] for p in mult)
            m -= 1
    return SchurBasis("SU(2)", n, irreps, matrix=np.array(cols, dtype=complex).T)


def helicity_strings(n: int) -> list[tuple[int, ...]]:
    """Product helicity strings in product-basis order (site value 0 -> +1, 1 -> -1)."""
    return [tuple(1 - 2 * b for b in bits) for bits in itertools.product((0, 1), repeat=n)]


def build_schur_basis_u1(n: int) -> SchurBasis:
    """Basis grouping helicity strings of ``n`` sites by their sum ``h``."""
    if not 1 <= n <= 16:
        raise ValueError(f"U(1) Schur basis supports 1 <= N <= 16, got {n}")
    idx = np.arange(2 ** n)
    ones = np.array([bin(k).count("1") for k in idx])
    sums = n - 2 * ones
    irreps, perm, offset = [], [], 0
    for h in range(-n, n + 1, 2):
        members = idx[sums == h]
        irreps.append(Irrep(Fraction(h), 1, members.size, offset))
        offset += members.size
        perm.extend(members.tolist())
    return SchurBasis("U(1)", n, irreps, permutation=perm)


def build_charge_basis(charges: Sequence[int]) -> SchurBasis:
    """One-dimensional U(1) irreps for a register whose basis state k has charge ``charges[k]``."""
    charges = [int(c) for c in charges]
    irreps, perm, offset = [], [], 0
    for q in sorted(set(charges)):
        members = [k for k, c in enumerate(charges) if c == q]
        irreps.append(Irrep(Fraction(q), 1, len(members), offset))
        offset += len(members)
        perm.extend(members)
    return SchurBasis("U(1)-charge", 1, irreps, permutation=perm, site_dim=len(charges))


def build_irrep_basis(j, multiplicity: int, group: str = "SO(3)-total") -> SchurBasis:
    """Single spin-``j`` irrep with ``multiplicity`` copies, already in Schur order."""
    j = Fraction(j)
    dl = int(2 * j + 1)
    return SchurBasis(group, 1, [Irrep(j, dl, multiplicity, 0)], permutation=np.arange(dl * multiplicity),
                      site_dim=dl * multiplicity)


@dataclass(frozen=True, eq=False)
class PiOperator:
    """``Pi_i^{mu1 mu2}`` (kind ``"multiplicity"``) or ``Pi_i^{r1 r2}`` (kind ``"irrep"``).

    ``matrix`` is written in the Schur basis.
    """

    label: Fraction
    kind: str
    indices: tuple[int, int]
    matrix: np.ndarray

    def in_product_basis(self, basis: SchurBasis) -> np.ndarray:
        return basis.from_schur(self.matrix)

    @property
    def dagger(self) -> "PiOperator":
        return PiOperator(self.label, self.kind, self.indices[::-1], self.matrix.conj().T)


def _unit(n: int, a: int, b: int) -> np.ndarray:
    e = np.zeros((n, n), dtype=complex)
    e[a, b] = 1.0
    return e


def _embed_block(basis: SchurBasis, label, local: np.ndarray) -> np.ndarray:
    out = np.zeros((basis.dim, basis.dim), dtype=complex)
    sl = basis.irrep(label).slice
    out[sl, sl] = local
    return out


def pi_multiplicity(basis: SchurBasis, label, mu1: int, mu2: int) -> PiOperator:
    ir = basis.irrep(label)
    if not (0 <= mu1 < ir.multiplicity and 0 <= mu2 < ir.multiplicity):
        raise IndexError(f"multiplicity indices ({mu1}, {mu2}) out of range for D_V={ir.multiplicity}")
    local = np.kron(np.eye(ir.dim_irrep), _unit(ir.multiplicity, mu1, mu2))
    return PiOperator(ir.label, "multiplicity", (mu1, mu2), _embed_block(basis, label, local))


def pi_irrep(basis: SchurBasis, label, r1: int, r2: int) -> PiOperator:
    ir = basis.irrep(label)
    if not (0 <= r1 < ir.dim_irrep and 0 <= r2 < ir.dim_irrep):
        raise IndexError(f"irrep indices ({r1}, {r2}) out of range for D_L={ir.dim_irrep}")
    local = np.kron(_unit(ir.dim_irrep, r1, r2), np.eye(ir.multiplicity))
    return PiOperator(ir.label, "irrep", (r1, r2), _embed_block(basis, label, local))


def pi_full(basis: SchurBasis, i, r1: int, mu1: int, j, r2: int, mu2: int) -> np.ndarray:
    """``|i, r1, mu1><j, r2, mu2|`` in the Schur basis; ``i != j`` gives inter-irrep coherences."""
    a, b = basis.irrep(i), basis.irrep(j)
    out = np.zeros((basis.dim, basis.dim), dtype=complex)
    out[a.offset + r1 * a.multiplicity + mu1, b.offset + r2 * b.multiplicity + mu2] = 1.0
    return out


def all_pi_operators(basis: SchurBasis) -> tuple[list[PiOperator], list[PiOperator]]:
    irr, mult = [], []
    for ir in basis.irreps:
        for a, b in itertools.product(range(ir.dim_irrep), repeat=2):
            irr.append(pi_irrep(basis, ir.label, a, b))
        for a, b in itertools.product(range(ir.multiplicity), repeat=2):
            mult.append(pi_multiplicity(basis, ir.label, a, b))
    return irr, mult


def inter_irrep_coherence(state, basis: SchurBasis) -> float:
    """Largest coherence between different irrep blocks (superselection detector)."""
    return basis.off_block_mass(basis.to_schur(state))


def decompose_collective_unitary(basis: SchurBasis, u_single, tol: float = 1e-8) -> dict[Fraction, np.ndarray]:
    """Blocks ``X_i`` with ``B^dag U^{(x)N} B = (+)_i X_i (x) 1_{D_V}``."""
    u_single = np.asarray(u_single, dtype=complex)
    if u_single.shape != (basis.site_dim, basis.site_dim):
        raise DimensionMismatchError(f"single-site unitary must be {basis.site_dim}x{basis.site_dim}")
    if np.max(np.abs(u_single @ u_single.conj().T - np.eye(basis.site_dim))) > 1e-10:
        raise ValueError("single-site operator is not unitary")
    full = u_single
    for _ in range(basis.n_sites - 1):
        full = np.kron(full, u_single)
    s = basis.to_schur(full)
    off = basis.off_block_mass(s)
    if off > tol:
        raise NumericalFailure(f"collective unitary leaks between irrep blocks (max {off:.2e})")
    out = {}
    for ir in basis.irreps:
        blk = s[ir.slice, ir.slice].reshape(ir.dim_irrep, ir.multiplicity, ir.dim_irrep, ir.multiplicity)
        x = np.einsum("ambm->ab", blk) / ir.multiplicity
        resid = float(np.max(np.abs(blk - np.einsum("ab,mn->ambn", x, np.eye(ir.multiplicity)))))
        if resid > tol:
            raise NumericalFailure(f"block {label_str(ir.label)} is not of the form X (x) 1 (residual {resid:.2e})")
        out[ir.label] = x
    return out


def su2_irrep_image(j, u_single, n_sites: int) -> np.ndarray:
    """Expected block ``X_j`` of ``U^{(x)N}``: ``e^{i N a} D^(j)(V)`` for ``U = e^{i a} V``."""
    rv, phase = rotvec_from_su2(u_single)
    return phase ** n_sites * spin_matrix(j, rv)


def tensor_permutation_operator(n: int, d: int, perm: Sequence[int]) -> np.ndarray:
    """Operator moving tensor factor ``k`` to position ``perm[k]``."""
    perm = list(perm)
    if sorted(perm) != list(range(n)):
        raise ValueError(f"{perm} is not a permutation of {n} elements")
    dim = d ** n
    idx = np.arange(dim)
    digits = np.array(np.unravel_index(idx, [d] * n))
    new = np.empty_like(digits)
    for k in range(n):
        new[perm[k]] = digits[k]
    target = np.ravel_multi_index(tuple(new), [d] * n)
    o = np.zeros((dim, dim))
    o[target, idx] = 1.0
    return o


def total_spin_squared(n: int) -> np.ndarray:
    """``J^2`` on ``n`` qubits in the product basis."""
    sx = np.array([[0, 1], [1, 0]]) / 2
    sy = np.array([[0, -1j], [1j, 0]]) / 2
    sz = np.array([[1, 0], [0, -1]]) / 2
    total = np.zeros((2 ** n, 2 ** n), dtype=complex)
    for s in (sx, sy, sz):
        js = sum(np.kron(np.kron(np.eye(2 ** k), s), np.eye(2 ** (n - k - 1))) for k in range(n))
        total += js @ js
    return total


def dimension_table(scheme: str, ns: Iterable[int]) -> list[dict]:
    """Rows ``{scheme, N, irrep, D_L, D_V}`` sorted by (N, irrep)."""
    rows = []
    for n in sorted(set(ns)):
        if scheme == "massive":
            if not 1 <= n <= 10:
                raise ValueError(f"massive scheme supports 1 <= N <= 10, got {n}")
            j = Fraction(n, 2)
            labels = []
            while j >= 0:
                labels.append(j)
                j -= 1
            for j in sorted(labels):
                rows.append({"scheme": scheme, "N": n, "irrep": j, "D_L": int(2 * j + 1),
                             "D_V": su2_multiplicity(n, j)})
        elif scheme == "massless":
            if not 1 <= n <= 16:
                raise ValueError(f"massless scheme supports 1 <= N <= 16, got {n}")
            for h in range(-n, n + 1, 2):
                rows.append({"scheme": scheme, "N": n, "irrep": Fraction(h), "D_L": 1,
                             "D_V": u1_multiplicity(n, h)})
        else:
            raise ValueError(f"no dimension table for scheme {scheme!r}")
    return rows
