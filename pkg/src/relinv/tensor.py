"""Dense complex linear algebra used by the rest of the package.

All functions take array-likes and return plain ``numpy`` arrays.  The
:class:`DenseOperator` and :class:`StateVector` containers only add a basis
tag and validation; they implement ``__array__`` so they can be passed
anywhere an array is expected.

Tensor factors are ordered with the leftmost factor most significant
(``numpy.kron`` convention).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionMismatchError

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
POSITIVITY_FLOOR = -1e-10


def _square(a, name="operator") -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise DimensionMismatchError(f"{name} must be a non-empty square matrix, got shape {a.shape}")
    return a


def dagger(a) -> np.ndarray:
    return np.conj(np.asarray(a)).T


def is_hermitian(a, tol: float = HERMITIAN_TOL) -> bool:
    a = _square(a)
    return bool(np.max(np.abs(a - a.conj().T)) <= tol)


def is_unitary(u, tol: float = 1e-10) -> bool:
    u = _square(u)
    return bool(np.max(np.abs(u @ u.conj().T - np.eye(u.shape[0]))) <= tol)


def is_density_matrix(rho, tol: float = TRACE_TOL, floor: float = POSITIVITY_FLOOR) -> bool:
    rho = _square(rho)
    if not is_hermitian(rho, tol):
        return False
    if abs(np.trace(rho) - 1.0) > tol:
        return False
    return bool(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min() >= floor)


def tensor(*ops) -> np.ndarray:
    """Kronecker product of any number of operators (or vectors)."""
    if not ops:
        raise ValueError("tensor() needs at least one factor")
    return reduce(np.kron, (np.asarray(o, dtype=complex) for o in ops))


def tensor_power(op, n: int) -> np.ndarray:
    if n < 1:
        raise ValueError("tensor power must be at least 1")
    return tensor(*([op] * n))


def partial_trace(rho, factor_dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Trace out every factor not listed in ``keep`` (0-based factor indices).

    The kept factors stay in their original order.
    """
    rho = _square(rho, "rho")
    dims = [int(d) for d in factor_dims]
    if any(d < 1 for d in dims):
        raise DimensionMismatchError(f"factor dimensions must be positive, got {dims}")
    total = int(np.prod(dims))
    if total != rho.shape[0]:
        raise DimensionMismatchError(
            f"factor dimensions {dims} multiply to {total} but rho has dimension {rho.shape[0]}"
        )
    keep = sorted(set(int(k) for k in keep))
    if not keep:
        raise ValueError("keep must name at least one factor")
    if keep[0] < 0 or keep[-1] >= len(dims):
        raise DimensionMismatchError(f"keep={keep} out of range for {len(dims)} factors")

    n = len(dims)
    t = rho.reshape(dims + dims)
    # einsum subscripts: traced factors share the row and column letter
    letters = [chr(ord("a") + k) for k in range(2 * n)]
    rows = letters[:n]
    cols = [rows[k] if k not in keep else letters[n + k] for k in range(n)]
    out = [rows[k] for k in keep] + [cols[k] for k in keep]
    res = np.einsum("".join(rows + cols) + "->" + "".join(out), t)
    d = int(np.prod([dims[k] for k in keep]))
    return res.reshape(d, d)


def expm_hermitian_generator(h, t: float) -> np.ndarray:
    """Return ``exp(-i t H)`` for Hermitian ``H`` via eigendecomposition."""
    h = _square(h, "generator")
    if not is_hermitian(h, 1e-10):
        raise ValueError("expm_hermitian_generator requires a Hermitian generator")
    w, v = np.linalg.eigh(0.5 * (h + h.conj().T))
    return (v * np.exp(-1j * t * w)) @ v.conj().T


def _psd_sqrt(a: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(0.5 * (a + a.conj().T))
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T


def _pair(a, b):
    a = _square(a)
    b = _square(b)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"dimension mismatch: {a.shape} vs {b.shape}")
    if not (is_hermitian(a, 1e-9) and is_hermitian(b, 1e-9)):
        raise ValueError("trace_distance/fidelity require Hermitian operands")
    return a, b


def trace_distance(a, b) -> float:
    a, b = _pair(a, b)
    d = a - b
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(0.5 * (d + d.conj().T)))))


def fidelity(a, b) -> float:
    """Uhlmann fidelity ``(Tr sqrt(sqrt(a) b sqrt(a)))**2``."""
    a, b = _pair(a, b)
    s = _psd_sqrt(a)
    m = s @ b @ s
    w = np.clip(np.linalg.eigvalsh(0.5 * (m + m.conj().T)), 0.0, None)
    return float(np.sum(np.sqrt(w)) ** 2)


def ket_to_density(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    return np.outer(psi, psi.conj())


@dataclass(frozen=True, eq=False)
class DenseOperator:
    """Square complex matrix tagged with the basis it is written in."""

    data: np.ndarray
    basis: str = "product"
    hermitian: bool = False
    density: bool = False

    def __post_init__(self):
        a = _square(self.data).copy()
        a.setflags(write=False)
        object.__setattr__(self, "data", a)
        if (self.hermitian or self.density) and not is_hermitian(a):
            raise ValueError("operator flagged Hermitian is not Hermitian within 1e-12")
        if self.density:
            if abs(np.trace(a) - 1.0) > TRACE_TOL:
                raise ValueError(f"density matrix has trace {np.trace(a).real:.3e}, expected 1")
            if np.linalg.eigvalsh(a).min() < POSITIVITY_FLOOR:
                raise ValueError("density matrix has a negative eigenvalue below -1e-10")

    def __array__(self, dtype=None, copy=None):
        return self.data if dtype is None else self.data.astype(dtype)

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    def tensor(self, other: "DenseOperator") -> "DenseOperator":
        return DenseOperator(
            np.kron(self.data, other.data),
            basis=f"{self.basis}*{other.basis}",
            hermitian=self.hermitian and other.hermitian,
            density=self.density and other.density,
        )


@dataclass(frozen=True, eq=False)
class StateVector:
    amplitudes: np.ndarray
    basis: str = "product"
    normalized: bool = True
    labels: tuple = field(default=())

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=complex).reshape(-1).copy()
        if a.size < 1:
            raise DimensionMismatchError("state vector must be non-empty")
        if self.normalized and abs(np.linalg.norm(a) - 1.0) > 1e-12:
            raise ValueError(f"state vector norm {np.linalg.norm(a):.15f} differs from 1")
        a.setflags(write=False)
        object.__setattr__(self, "amplitudes", a)

    def __array__(self, dtype=None, copy=None):
        return self.amplitudes if dtype is None else self.amplitudes.astype(dtype)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def density(self) -> DenseOperator:
        return DenseOperator(ket_to_density(self.amplitudes), basis=self.basis, density=self.normalized)
