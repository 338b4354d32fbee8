"""Four-momenta, Lorentz matrices and Wigner little-group elements.

Conventions used everywhere in the package:

* metric signature ``(-,+,+,+)``; four-vectors are ``(E, px, py, pz)``;
* massive reference momentum ``(m, 0, 0, 0)``, massless ``k0 = (1, 0, 0, 1)``;
* rotations are active and right handed; the spin-``s`` image of a rotation
  by ``angle`` about ``axis`` is ``exp(-i angle axis.J)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.spatial.transform import Rotation

from .errors import KinematicsError, NumericalFailure
from .tensor import expm_hermitian_generator

METRIC = np.diag([-1.0, 1.0, 1.0, 1.0])
MASSLESS_REFERENCE = np.array([1.0, 0.0, 0.0, 1.0])
SHELL_TOL = 1e-9
LORENTZ_TOL = 1e-10
WIGNER_TOL = 1e-8


def minkowski(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return float(-a[0] * b[0] + a[1:] @ b[1:])


def wrap_angle(x: float) -> float:
    """Map an angle to ``(-pi, pi]``."""
    y = float(np.mod(x + np.pi, 2 * np.pi) - np.pi)
    return np.pi if y == -np.pi else y


def _unit(v, name="axis") -> np.ndarray:
    v = np.asarray(v, dtype=float).reshape(3)
    n = np.linalg.norm(v)
    if n == 0.0:
        raise ValueError(f"{name} must be non-zero")
    return v / n


@dataclass(frozen=True, eq=False)
class FourMomentum:
    """On-shell four-momentum with a fixed mass class.

    ``mass`` is carried along under Lorentz transformations instead of being
    recomputed, which keeps standard boosts accurate at large rapidity.
    """

    components: np.ndarray
    mass_class: str | None = None
    mass: float | None = None

    def __post_init__(self):
        p = np.asarray(self.components, dtype=float).reshape(4).copy()
        p.setflags(write=False)
        object.__setattr__(self, "components", p)
        e = p[0]
        if not e > 0:
            raise KinematicsError(f"energy must be positive, got {e}")
        m2 = e * e - p[1:] @ p[1:]
        cls = self.mass_class
        if cls is None:
            cls = "massless" if abs(m2) <= SHELL_TOL * e * e else "massive"
            object.__setattr__(self, "mass_class", cls)
        if cls == "massless":
            if abs(m2) > SHELL_TOL * e * e:
                raise KinematicsError(f"momentum {p.tolist()} is not null (E^2-|p|^2 = {m2:.3e})")
            object.__setattr__(self, "mass", 0.0)
        elif cls == "massive":
            if m2 <= 0:
                raise KinematicsError(f"momentum {p.tolist()} is not timelike")
            m = self.mass
            if m is None:
                m = float(np.sqrt(m2))
                object.__setattr__(self, "mass", m)
            elif abs(m2 - m * m) > SHELL_TOL * e * e:
                raise KinematicsError(f"momentum {p.tolist()} is off the mass shell m={m}")
        else:
            raise KinematicsError(f"unknown mass class {cls!r}")

    @classmethod
    def massive(cls, mass: float, p3) -> "FourMomentum":
        p3 = np.asarray(p3, dtype=float).reshape(3)
        if mass <= 0:
            raise KinematicsError("mass must be positive")
        e = np.sqrt(mass * mass + p3 @ p3)
        return cls(np.concatenate([[e], p3]), "massive", float(mass))

    @classmethod
    def massless(cls, p3) -> "FourMomentum":
        p3 = np.asarray(p3, dtype=float).reshape(3)
        return cls(np.concatenate([[np.linalg.norm(p3)], p3]), "massless")

    @property
    def energy(self) -> float:
        return float(self.components[0])

    @property
    def spatial(self) -> np.ndarray:
        return self.components[1:]

    @property
    def is_massive(self) -> bool:
        return self.mass_class == "massive"

    def to_list(self) -> list[float]:
        return [float(x) for x in self.components]

    def __repr__(self):
        return f"FourMomentum({self.to_list()}, {self.mass_class})"


@dataclass(frozen=True, eq=False)
class LorentzTransform:
    """Proper orthochronous Lorentz matrix plus a record of how it was built."""

    matrix: np.ndarray
    params: tuple = field(default=())

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float).reshape(4, 4).copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        scale = max(1.0, float(np.max(np.abs(m)))) ** 2
        if np.max(np.abs(m.T @ METRIC @ m - METRIC)) > LORENTZ_TOL * scale:
            raise KinematicsError("matrix does not preserve the Minkowski metric")
        if m[0, 0] < 1.0 - LORENTZ_TOL * scale:
            raise KinematicsError("transform is not orthochronous")
        if np.linalg.det(m) < 0:
            raise KinematicsError("transform is not proper")

    @classmethod
    def identity(cls) -> "LorentzTransform":
        return cls(np.eye(4), (("identity",),))

    @classmethod
    def boost(cls, rapidity: float, axis) -> "LorentzTransform":
        n = _unit(axis)
        ch, sh = np.cosh(rapidity), np.sinh(rapidity)
        m = np.eye(4)
        m[0, 0] = ch
        m[0, 1:] = m[1:, 0] = sh * n
        m[1:, 1:] += (ch - 1.0) * np.outer(n, n)
        return cls(m, (("boost", float(rapidity), tuple(n.tolist())),))

    @classmethod
    def rotation(cls, axis, angle: float) -> "LorentzTransform":
        n = _unit(axis)
        m = np.eye(4)
        m[1:, 1:] = rotation_matrix(n, angle)
        return cls(m, (("rotation", tuple(n.tolist()), float(angle)),))

    def __matmul__(self, other: "LorentzTransform") -> "LorentzTransform":
        return LorentzTransform(self.matrix @ other.matrix, self.params + other.params)

    def inverse(self) -> "LorentzTransform":
        return LorentzTransform(METRIC @ self.matrix.T @ METRIC, (("inverse", self.params),))

    def apply(self, p: FourMomentum) -> FourMomentum:
        return FourMomentum(self.matrix @ p.components, p.mass_class, p.mass)

    def describe(self) -> list:
        return _jsonable(self.params)


def _jsonable(x):
    if isinstance(x, tuple):
        return [_jsonable(y) for y in x]
    return x


def rotation_matrix(axis, angle: float) -> np.ndarray:
    n = _unit(axis)
    k = np.array([[0, -n[2], n[1]], [n[2], 0, -n[0]], [-n[1], n[0], 0]])
    return np.eye(3) + np.sin(angle) * k + (1 - np.cos(angle)) * (k @ k)


def _lorentz_inverse(m: np.ndarray) -> np.ndarray:
    return METRIC @ m.T @ METRIC


def _rotation_to(n: np.ndarray) -> np.ndarray:
    """3x3 rotation taking z-hat to unit vector ``n`` in the (z, n) plane."""
    z = np.array([0.0, 0.0, 1.0])
    c = float(np.clip(n[2], -1.0, 1.0))
    u = np.cross(z, n)
    s = np.linalg.norm(u)
    if s < 1e-14:
        if c > 0:
            return np.eye(3)
        return rotation_matrix([0, 1, 0], np.pi)
    return rotation_matrix(u / s, np.arctan2(s, c))


def _embed(r3: np.ndarray) -> np.ndarray:
    m = np.eye(4)
    m[1:, 1:] = r3
    return m


def _boost_matrix_to(p: np.ndarray, mass: float) -> np.ndarray:
    """Pure boost taking ``(mass, 0, 0, 0)`` to ``p``."""
    e = p[0]
    v = p[1:]
    m = np.eye(4)
    m[0, 0] = e / mass
    m[0, 1:] = m[1:, 0] = v / mass
    m[1:, 1:] += np.outer(v, v) / (mass * (e + mass))
    return m


def standard_boost_massive(p: FourMomentum) -> LorentzTransform:
    if not p.is_massive:
        raise KinematicsError("standard_boost_massive needs a massive momentum")
    return LorentzTransform(_boost_matrix_to(p.components, p.mass), (("standard-boost", p.to_list()),))


def _massless_standard_matrix(p: np.ndarray) -> np.ndarray:
    e = p[0]
    v = p[1:]
    n = v / np.linalg.norm(v)
    chi = np.log(e / MASSLESS_REFERENCE[0])
    bz = np.eye(4)
    bz[0, 0] = bz[3, 3] = np.cosh(chi)
    bz[0, 3] = bz[3, 0] = np.sinh(chi)
    return _embed(_rotation_to(n)) @ bz


def standard_transform_massless(p: FourMomentum) -> LorentzTransform:
    """``R(p_hat) B_z(E)``: maps ``k0 = (1,0,0,1)`` to ``p``."""
    if p.is_massive:
        raise KinematicsError("standard_transform_massless needs a massless momentum")
    return LorentzTransform(_massless_standard_matrix(p.components), (("standard-massless", p.to_list()),))


@dataclass(frozen=True, eq=False)
class WignerElement:
    """Little-group element extracted from ``L(Lp)^-1 L L(p)``.

    ``kind`` is ``"massive-rotation"`` (``axis``/``angle`` valid),
    ``"massless-phase"`` or ``"pairwise-phase"`` (``angle`` valid).
    ``raw`` keeps the 4x4 little-group matrix for diagnostics.
    """

    kind: str
    angle: float
    raw: np.ndarray
    axis: np.ndarray | None = None
    translation: tuple[float, float] | None = None

    @property
    def rotation(self) -> np.ndarray:
        """SO(3) part (massive) or the z-rotation the phase corresponds to."""
        if self.kind == "massive-rotation":
            return rotation_matrix(self.axis, self.angle) if self.angle else np.eye(3)
        return rotation_matrix([0, 0, 1], self.angle)

    @property
    def rotvec(self) -> np.ndarray:
        if self.kind == "massive-rotation":
            return self.angle * self.axis
        return np.array([0.0, 0.0, self.angle])

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "angle": float(self.angle)}
        if self.axis is not None:
            d["axis"] = [float(x) for x in self.axis]
        if self.translation is not None:
            d["null_translation"] = [float(x) for x in self.translation]
        d["raw"] = [[float(x) for x in row] for row in self.raw]
        return d


def _rotation_element(r: np.ndarray, raw: np.ndarray) -> WignerElement:
    rv = Rotation.from_matrix(r).as_rotvec()
    angle = float(np.linalg.norm(rv))
    axis = rv / angle if angle > 0 else np.array([0.0, 0.0, 1.0])
    return WignerElement("massive-rotation", angle, raw, axis=axis)


def wigner_rotation_massive(lt: LorentzTransform, p: FourMomentum) -> WignerElement:
    if not p.is_massive:
        raise KinematicsError("wigner_rotation_massive needs a massive momentum")
    q = lt.apply(p)
    w = _lorentz_inverse(_boost_matrix_to(q.components, q.mass)) @ lt.matrix @ _boost_matrix_to(p.components, p.mass)
    r = w[1:, 1:]
    resid = max(
        abs(w[0, 0] - 1.0),
        float(np.max(np.abs(w[0, 1:]))),
        float(np.max(np.abs(w[1:, 0]))),
        float(np.max(np.abs(r.T @ r - np.eye(3)))),
    )
    if resid > WIGNER_TOL or np.linalg.det(r) < 0:
        raise NumericalFailure(f"massive Wigner element is not a rotation (residual {resid:.2e})")
    return _rotation_element(r, w)


def null_rotation(alpha: float, beta: float) -> np.ndarray:
    """Element of the stabilizer of ``k0`` with transverse block equal to identity."""
    z = 0.5 * (alpha * alpha + beta * beta)
    return np.array(
        [
            [1 + z, alpha, beta, -z],
            [alpha, 1, 0, -alpha],
            [beta, 0, 1, -beta],
            [z, alpha, beta, 1 - z],
        ]
    )


def _z_rotation4(angle: float) -> np.ndarray:
    return _embed(rotation_matrix([0, 0, 1], angle))


def wigner_phase_massless(lt: LorentzTransform, p: FourMomentum) -> WignerElement:
    """Helicity angle ``omega`` from the ISO(2) factorization ``W = T(a, b) R_z(omega)``."""
    if p.is_massive:
        raise KinematicsError("wigner_phase_massless needs a massless momentum")
    q = lt.apply(p)
    w = _lorentz_inverse(_massless_standard_matrix(q.components)) @ lt.matrix @ _massless_standard_matrix(p.components)
    alpha, beta = float(w[1, 0]), float(w[2, 0])
    rest = _lorentz_inverse(null_rotation(alpha, beta)) @ w
    omega = float(np.arctan2(rest[2, 1], rest[1, 1]))
    resid = float(np.max(np.abs(rest - _z_rotation4(omega))))
    if resid > WIGNER_TOL:
        raise NumericalFailure(f"massless Wigner element failed ISO(2) factorization (residual {resid:.2e})")
    return WignerElement("massless-phase", omega, w, translation=(alpha, beta))


def pair_standard_transform(p_a: FourMomentum, p_b: FourMomentum) -> np.ndarray:
    """Canonical 4x4 map from the standard pair configuration to ``(p_a, p_b)``.

    Standard configuration: centre-of-momentum frame with ``p_a`` along +z.
    The CM direction used for the rotation is the one of ``{n_a, -n_a}`` that
    is lexicographically larger in ``(z, y, x)``; when that is ``-n_a`` an
    extra ``R_x(pi)`` is appended.  This makes the transform for the swapped
    pair equal to this one times ``R_x(pi)``, so pair phases are exactly
    antisymmetric under exchange.
    """
    total = p_a.components + p_b.components
    try:
        ptot = FourMomentum(total, "massive")
    except KinematicsError as exc:
        raise KinematicsError("pair has no centre-of-momentum frame (collinear massless momenta)") from exc
    boost = _boost_matrix_to(ptot.components, ptot.mass)
    a_cm = _lorentz_inverse(boost) @ p_a.components
    k = np.linalg.norm(a_cm[1:])
    if k < 1e-12 * ptot.mass:
        raise KinematicsError("pair has zero relative momentum; pairwise little group undefined")
    n = a_cm[1:] / k
    flipped = tuple(np.round(-n[::-1], 15)) > tuple(np.round(n[::-1], 15))
    if flipped:
        return boost @ _embed(_rotation_to(-n)) @ _embed(rotation_matrix([1, 0, 0], np.pi))
    return boost @ _embed(_rotation_to(n))


def pairwise_phase(lt: LorentzTransform, p_a: FourMomentum, p_b: FourMomentum) -> WignerElement:
    la = pair_standard_transform(p_a, p_b)
    lb = pair_standard_transform(lt.apply(p_a), lt.apply(p_b))
    w = _lorentz_inverse(lb) @ lt.matrix @ la
    phi = float(np.arctan2(w[2, 1], w[1, 1]))
    resid = float(np.max(np.abs(w - _z_rotation4(phi))))
    if resid > WIGNER_TOL:
        raise KinematicsError(f"pair little-group element is not a z-rotation (residual {resid:.2e})")
    return WignerElement("pairwise-phase", phi, w)


def compose_elements(w2: WignerElement, w1: WignerElement) -> WignerElement:
    """Little-group product ``w2 * w1`` (``w1`` acts first)."""
    if w1.kind != w2.kind:
        raise ValueError("cannot compose little-group elements of different kinds")
    raw = w2.raw @ w1.raw
    if w1.kind == "massive-rotation":
        return _rotation_element(w2.rotation @ w1.rotation, raw)
    return WignerElement(w1.kind, wrap_angle(w1.angle + w2.angle), raw)


def element_distance(a: WignerElement, b: WignerElement) -> float:
    if a.kind != b.kind:
        raise ValueError("elements of different kinds")
    if a.kind == "massive-rotation":
        return float(np.max(np.abs(a.rotation - b.rotation)))
    return abs(wrap_angle(a.angle - b.angle))


def apply_translation_phase(x, p: FourMomentum | np.ndarray) -> complex:
    """``exp(-i x.p)`` with ``x.p = -t E + x.p_vec``."""
    pv = p.components if isinstance(p, FourMomentum) else np.asarray(p, dtype=float)
    return complex(np.exp(-1j * minkowski(x, pv)))


def as_spin(s) -> Fraction:
    raw = Fraction(s)
    f = raw.limit_denominator(2)
    if f < 0 or f.denominator not in (1, 2) or abs(float(f) - float(raw)) > 1e-12:
        raise ValueError(f"spin must be a non-negative half-integer, got {s}")
    return f


@dataclass(frozen=True, eq=False)
class SpinRep:
    """Spin-``s`` angular momentum matrices in the ``m = s, s-1, ..., -s`` basis."""

    s: Fraction
    jx: np.ndarray
    jy: np.ndarray
    jz: np.ndarray

    @property
    def dim(self) -> int:
        return self.jz.shape[0]

    @property
    def generators(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.jx, self.jy, self.jz


@lru_cache(maxsize=None)
def spin_rep(s) -> SpinRep:
    s = as_spin(s)
    m = np.array([float(s) - k for k in range(int(2 * s) + 1)])
    jp = np.zeros((m.size, m.size), dtype=complex)
    for k in range(1, m.size):
        jp[k - 1, k] = np.sqrt(float(s) * (float(s) + 1) - m[k] * (m[k] + 1))
    jm = jp.conj().T
    rep = SpinRep(s, (jp + jm) / 2, (jp - jm) / 2j, np.diag(m).astype(complex))
    for a in (rep.jx, rep.jy, rep.jz):
        a.setflags(write=False)
    return rep


def spin_matrix(s, rotvec) -> np.ndarray:
    """``exp(-i theta.J)`` for the rotation vector ``theta``."""
    rep = spin_rep(s)
    rv = np.asarray(rotvec, dtype=float).reshape(3)
    angle = np.linalg.norm(rv)
    if angle == 0.0:
        return np.eye(rep.dim, dtype=complex)
    n = rv / angle
    return expm_hermitian_generator(n[0] * rep.jx + n[1] * rep.jy + n[2] * rep.jz, angle)


def spin_rep_matrix(s, w: WignerElement) -> np.ndarray:
    if w.kind != "massive-rotation":
        raise ValueError("spin_rep_matrix needs a massive-rotation element")
    return spin_matrix(s, w.rotvec)


def rotvec_from_su2(u) -> tuple[np.ndarray, complex]:
    """Split ``U = e^{i a} exp(-i theta.sigma/2)``; returns ``(theta, e^{i a})``."""
    u = np.asarray(u, dtype=complex).reshape(2, 2)
    phase = np.sqrt(np.linalg.det(u))
    v = u / phase
    c = 0.5 * np.trace(v).real
    sig = [np.array([[0, 1], [1, 0]]), np.array([[0, -1j], [1j, 0]]), np.array([[1, 0], [0, -1]])]
    ns = np.array([(0.5j * np.trace(v @ s)).real for s in sig])
    sn = np.linalg.norm(ns)
    if sn < 1e-15:
        if c > 0:
            return np.zeros(3), phase
        return np.array([0.0, 0.0, 2 * np.pi]), phase
    return 2 * np.arctan2(sn, c) * ns / sn, phase
