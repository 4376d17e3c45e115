"""Concrete semidirect products G = Q x| V and their duals.

Four backends are provided.  All of them have a diagonal action of Q on V
(componentwise multiplication), so the dual action on characters is
``q.xi = xi / q`` componentwise and the orbit map is ``phi(q) = xi0 / q``.

* ``FiniteAffine(p)``: Q = F_p^*, V = F_p.
* ``FiniteProductAffine(p)``: Q = (F_p^*)^2, V = F_p^2.
* ``RealAffine()``: Q = R^*, V = R.
* ``RealProductAffine()``: Q = (R^*)^2, V = R^2.

Rank-one backends use plain scalars for points, rank-two backends use
pairs.  Points of G are ``GElement(q, v)`` and points of Q x V^ are
``XPoint(q, xi)``.

The orbit of xi0 misses the characters with a zero coordinate.  In the
real case that is a null set; in the finite case it is a genuine "defect"
set, and every identity downstream is only asserted off it.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass
from typing import Any, Iterable, NamedTuple

import numpy as np

from .phases import ExactPhase, FloatPhase, Phase


class DefectPoint(ValueError):
    """Raised when phi^{-1} is asked to invert a character outside the orbit."""


class BackendMismatch(ValueError):
    """Raised when objects from different backends are combined."""


class GElement(NamedTuple):
    q: Any
    v: Any


class XPoint(NamedTuple):
    q: Any
    xi: Any


POINT_KINDS = ("Q", "V", "Vhat", "G", "X")


def smallest_primitive_root(p: int) -> int:
    if p == 2:
        return 1
    order = p - 1
    factors = {d for d in range(2, order + 1) if order % d == 0 and all(d % e for e in range(2, d))}
    for g in range(2, p):
        if all(pow(g, order // f, p) != 1 for f in factors):
            return g
    raise ValueError(f"{p} is not prime")


def _is_prime(p: int) -> bool:
    return p >= 2 and all(p % d for d in range(2, int(math.isqrt(p)) + 1))


@dataclass(frozen=True)
class HaarData:
    modulus: float
    delta_q: float
    delta_g: float


class GroupBackend:
    """Common machinery; subclasses fix the scalar arithmetic and the rank."""

    rank: int = 1
    finite: bool = False
    family: str = ""

    def __init__(self, phase_mode: str = "float"):
        if phase_mode not in ("exact", "float"):
            raise ValueError(f"unknown phase mode {phase_mode!r}")
        if phase_mode == "exact" and not self.finite:
            raise ValueError("exact phases are only available on finite backends")
        self.phase_mode = phase_mode

    # -- scalar arithmetic (overridden) -------------------------------------
    def _smul(self, a, b):
        raise NotImplementedError

    def _sinv(self, a):
        raise NotImplementedError

    def _sadd(self, a, b):
        raise NotImplementedError

    def _sneg(self, a):
        raise NotImplementedError

    def _cw(self, f, *args):
        if self.rank == 1:
            return f(*args)
        return tuple(map(f, *args))

    # -- identification -----------------------------------------------------
    @property
    def params(self) -> dict:
        return {}

    @property
    def id(self) -> str:
        parts = [self.family] + [f"{k}={v}" for k, v in self.params.items()]
        if self.phase_mode != "float":
            parts.append(f"mode={self.phase_mode}")
        return ":".join(parts)

    def __repr__(self):
        return f"<{type(self).__name__} {self.id}>"

    def __eq__(self, other):
        return isinstance(other, GroupBackend) and self.id == other.id

    def __hash__(self):
        return hash(self.id)

    def require_same(self, other: "GroupBackend"):
        if other is not self and other != self:
            raise BackendMismatch(f"{self.id} vs {other.id}")

    # -- Q ------------------------------------------------------------------
    @property
    def q_identity(self):
        return self._cw(lambda _: self._one, self._template)

    def q_mul(self, a, b):
        return self._cw(self._smul, a, b)

    def q_inv(self, a):
        return self._cw(self._sinv, a)

    def q_div(self, a, b):
        """a * b^{-1}"""
        return self.q_mul(a, self.q_inv(b))

    # -- V and its dual -----------------------------------------------------
    @property
    def v_zero(self):
        return self._cw(lambda _: self._zero, self._template)

    xi_zero = v_zero

    def v_add(self, a, b):
        return self._cw(self._sadd, a, b)

    xi_add = v_add

    def v_neg(self, a):
        return self._cw(self._sneg, a)

    xi_neg = v_neg

    def v_sub(self, a, b):
        return self.v_add(a, self.v_neg(b))

    xi_sub = v_sub

    def v_act(self, q, v):
        """The linear action q.v (componentwise product)."""
        return self._cw(self._smul, q, v)

    def dual_act(self, q, xi):
        """q^flat xi, characterized by <q^flat xi, v> = <xi, q^{-1} v>."""
        return self._cw(lambda x, a: self._smul(x, self._sinv(a)), xi, q)

    @property
    def xi0(self):
        return self.q_identity

    # -- orbit map ----------------------------------------------------------
    def phi(self, q):
        return self.dual_act(q, self.xi0)

    def in_orbit(self, xi) -> bool:
        raise NotImplementedError

    def is_defect(self, xi) -> bool:
        return not self.in_orbit(xi)

    def phi_inv(self, xi):
        if not self.in_orbit(xi):
            raise DefectPoint(f"{xi!r} is outside the orbit of the base point")
        return self._cw(lambda x0, x: self._smul(x0, self._sinv(x)), self.xi0, xi)

    def phi_inv_unbanded(self, xi):
        """phi_inv ignoring any numerical defect band (only exact zeros are rejected)."""
        coords = [xi] if self.rank == 1 else list(xi)
        if any(c == self._zero for c in coords):
            raise DefectPoint(f"{xi!r} is outside the orbit of the base point")
        return self._cw(lambda x0, x: self._smul(x0, self._sinv(x)), self.xi0, xi)

    def x_is_regular(self, x: XPoint) -> bool:
        """True when xi0 + xi lies in the orbit (the shifted point is invertible)."""
        return self.in_orbit(self.xi_add(self.xi0, x.xi))

    # -- group G ------------------------------------------------------------
    @property
    def g_identity(self) -> GElement:
        return GElement(self.q_identity, self.v_zero)

    def g_compose(self, g: GElement, h: GElement) -> GElement:
        return GElement(self.q_mul(g.q, h.q), self.v_add(g.v, self.v_act(g.q, h.v)))

    def g_inverse(self, g: GElement) -> GElement:
        qi = self.q_inv(g.q)
        return GElement(qi, self.v_neg(self.v_act(qi, g.v)))

    # -- Haar and modular data ---------------------------------------------
    def modulus(self, q) -> float:
        """|q|_V: the factor by which q scales Haar measure on V."""
        raise NotImplementedError

    def delta_q(self, q) -> float:
        return 1.0  # Q is abelian

    def delta_g(self, g: GElement) -> float:
        return self.delta_q(g.q) / self.modulus(g.q)

    def haar_data(self, q) -> HaarData:
        m = self.modulus(q)
        return HaarData(m, self.delta_q(q), self.delta_q(q) / m)

    # -- phases -------------------------------------------------------------
    def pairing(self, xi, v) -> Phase:
        raise NotImplementedError

    def root_of_unity(self, k: int, n: int) -> Phase:
        if self.phase_mode == "exact":
            return ExactPhase(k, n)
        return FloatPhase(complex(math.cos(2 * math.pi * k / n), math.sin(2 * math.pi * k / n)))

    def phase_from_angle(self, theta: float) -> Phase:
        return FloatPhase(complex(math.cos(theta), math.sin(theta)))

    # -- comparisons ----------------------------------------------------------
    def point_error(self, a, b) -> float:
        """Zero for equal points; for reals a relative componentwise error."""
        raise NotImplementedError


# ---------------------------------------------------------------------------
# finite fields


class _FiniteBackend(GroupBackend):
    finite = True

    def __init__(self, p: int, phase_mode: str = "float"):
        if not _is_prime(p) or p < 3:
            raise ValueError(f"p must be an odd prime, got {p}")
        self.p = p
        super().__init__(phase_mode)
        self._one = 1
        self._zero = 0
        self._template = 0 if self.rank == 1 else (0,) * self.rank
        self._inv_table = [0] + [pow(a, p - 2, p) for a in range(1, p)]
        self.generator = smallest_primitive_root(p)
        self._dlog = {pow(self.generator, k, p): k for k in range(p - 1)}
        # phases are exponents modulo lcm(p, p-1)
        self.phase_order = math.lcm(p, p - 1)
        self._points = {}
        self._phi_inv_table = {self.phi(q): q for q in self.enumerate("Q")}

    @property
    def params(self):
        return {"p": self.p}

    def _smul(self, a, b):
        return a * b % self.p

    def _sinv(self, a):
        if a % self.p == 0:
            raise ZeroDivisionError("zero has no inverse")
        return self._inv_table[a % self.p]

    def _sadd(self, a, b):
        return (a + b) % self.p

    def _sneg(self, a):
        return -a % self.p

    def dlog(self, a: int) -> int:
        """Discrete log to the base ``self.generator``."""
        return self._dlog[a % self.p]

    def in_orbit(self, xi) -> bool:
        return xi in self._phi_inv_table

    def phi_inv(self, xi):
        try:
            return self._phi_inv_table[xi]
        except KeyError:
            raise DefectPoint(f"{xi!r} is outside the orbit of the base point") from None

    def modulus(self, q) -> float:
        return 1.0

    def pairing(self, xi, v) -> Phase:
        if self.rank == 1:
            k = xi * v
        else:
            k = sum(a * b for a, b in zip(xi, v))
        return self.root_of_unity((k % self.p) * (self.phase_order // self.p), self.phase_order)

    def pairing_exponent(self, xi, v) -> int:
        """Exponent modulo p of the pairing <xi, v>."""
        if self.rank == 1:
            return xi * v % self.p
        return sum(a * b for a, b in zip(xi, v)) % self.p

    def point_error(self, a, b) -> float:
        return 0.0 if a == b else 1.0

    # -- enumeration --------------------------------------------------------
    def _scalars(self, nonzero: bool):
        vals = range(1, self.p) if nonzero else range(self.p)
        if self.rank == 1:
            return list(vals)
        return list(itertools.product(vals, repeat=self.rank))

    def enumerate(self, kind: str) -> list:
        """All points of the given kind in the fixed basis order."""
        if kind not in self._points:
            if kind == "Q":
                pts = self._scalars(True)
            elif kind in ("V", "Vhat"):
                pts = self._scalars(False)
            elif kind == "G":
                pts = [GElement(q, v) for q in self._scalars(True) for v in self._scalars(False)]
            elif kind == "X":
                pts = [XPoint(q, xi) for q in self._scalars(True) for xi in self._scalars(False)]
            else:
                raise ValueError(f"unknown point kind {kind!r}")
            self._points[kind] = pts
        return self._points[kind]

    def haar_weight(self, kind: str, point=None) -> float:
        """Weight of a single point for the measure attached to ``kind``.

        ``G``: left Haar measure dq dv/|q| with dv normalized to total mass 1,
        so the partial Fourier transform is unitary and the change of
        variables along the orbit is exact.  ``X``, ``Q``, ``Vhat`` and
        ``HS``: counting measure.
        """
        if kind == "G":
            return float(self.p) ** (-self.rank)
        if kind == "V":
            return float(self.p) ** (-self.rank)
        if kind in ("X", "Q", "Vhat", "HS"):
            return 1.0
        raise ValueError(f"unknown point kind {kind!r}")

    def sample_points(self, kind: str, count: int, seed: int | None = None) -> list:
        pts = self.enumerate(kind)
        if count == 0:
            return list(pts)
        if count < 0:
            raise ValueError("count must be >= 0")
        rng = np.random.default_rng(seed)
        return [pts[i] for i in rng.integers(0, len(pts), size=count)]

    def regular_x_points(self) -> list[XPoint]:
        return [x for x in self.enumerate("X") if self.x_is_regular(x)]


class FiniteAffine(_FiniteBackend):
    rank = 1
    family = "finite-affine"


class FiniteProductAffine(_FiniteBackend):
    rank = 2
    family = "finite-product-affine"

    def __init__(self, p: int = 3, phase_mode: str = "float"):
        super().__init__(p, phase_mode)


# ---------------------------------------------------------------------------
# real line


class _RealBackend(GroupBackend):
    """Real backends.

    Sampling distributions: each Q coordinate is ``s * exp(N(0, 1))`` with a
    fair random sign ``s``; V and V^ coordinates are standard normal, with V^
    coordinates resampled while they lie within ``sample_margin`` of the
    defect set {0}.

    The mathematical defect set is {coordinate = 0}, a null set.  Inverting
    the orbit map next to it is ill-conditioned (a relative perturbation
    eps of the argument becomes eps / |coordinate|), so phi^{-1} treats a
    band of half-width ``defect_margin`` around it as defect as well.
    Checks skip and count such inputs exactly like genuine defect points.
    """

    finite = False

    def __init__(self, defect_margin: float = 1e-5, sample_margin: float = 1e-3,
                 grid: tuple[float, int] = (4.0, 64)):
        super().__init__("float")
        self._one = 1.0
        self._zero = 0.0
        self._template = 0.0 if self.rank == 1 else (0.0,) * self.rank
        self.defect_margin = float(defect_margin)
        self.sample_margin = float(sample_margin)
        # (half-width of the log|q| window, points per axis) for quadrature demos
        self.grid = grid

    def _smul(self, a, b):
        return a * b

    def _sinv(self, a):
        return 1.0 / a

    def _sadd(self, a, b):
        return a + b

    def _sneg(self, a):
        return -a

    def in_orbit(self, xi) -> bool:
        if self.rank == 1:
            return abs(xi) > self.defect_margin
        return all(abs(c) > self.defect_margin for c in xi)

    def modulus(self, q) -> float:
        if self.rank == 1:
            return abs(q)
        return abs(q[0]) * abs(q[1])

    def pairing(self, xi, v) -> Phase:
        if self.rank == 1:
            t = xi * v
        else:
            t = sum(a * b for a, b in zip(xi, v))
        return self.phase_from_angle(t)

    def point_error(self, a, b) -> float:
        if self.rank == 1:
            a, b = (a,), (b,)
        return max(abs(x - y) / max(1.0, abs(x), abs(y)) for x, y in zip(a, b))

    def haar_weight(self, kind: str, point=None, spacing: tuple[float, float] | None = None) -> float:
        """Riemann-sum weight of a grid point with the given axis spacings.

        ``spacing`` is (dq, dv) for ``G`` and ``X`` points and (dq,) for
        ``Q`` points, per coordinate for rank-two backends.  ``dq`` is a step
        of Haar measure on R^*, i.e. a step in log|q|.
        """
        if spacing is None:
            raise ValueError("real backends need grid spacings for quadrature weights")
        if kind in ("G", "X"):
            dq, dv = spacing
            return (dq * dv) ** self.rank / self.modulus(point.q)
        if kind == "Q":
            (dq,) = spacing
            return dq**self.rank / self.modulus(point)
        if kind in ("V", "Vhat"):
            (dv,) = spacing
            return dv**self.rank
        raise ValueError(f"unknown point kind {kind!r}")

    # -- sampling -----------------------------------------------------------
    def _draw_q(self, rng):
        s = 1.0 if rng.random() < 0.5 else -1.0
        return s * math.exp(rng.normal())

    def _draw_v(self, rng, margin=0.0):
        while True:
            x = rng.normal()
            if abs(x) > margin:
                return float(x)

    def random_point(self, kind: str, rng):
        if kind == "Q":
            return self._cw(lambda _: self._draw_q(rng), self._template)
        if kind == "V":
            return self._cw(lambda _: self._draw_v(rng), self._template)
        if kind == "Vhat":
            return self._cw(lambda _: self._draw_v(rng, self.sample_margin), self._template)
        if kind == "G":
            return GElement(self.random_point("Q", rng), self.random_point("V", rng))
        if kind == "X":
            return XPoint(self.random_point("Q", rng), self.random_point("Vhat", rng))
        raise ValueError(f"unknown point kind {kind!r}")

    def sample_points(self, kind: str, count: int, seed: int | None = None) -> list:
        if count <= 0:
            raise ValueError("real backends cannot enumerate; count must be >= 1")
        rng = np.random.default_rng(seed)
        return [self.random_point(kind, rng) for _ in range(count)]

    def enumerate(self, kind: str):
        raise TypeError("real backends have no finite enumeration")


class RealAffine(_RealBackend):
    rank = 1
    family = "real-affine"


class RealProductAffine(_RealBackend):
    rank = 2
    family = "real-product-affine"


# ---------------------------------------------------------------------------

_FAMILIES = {
    "finite-affine": FiniteAffine,
    "finite-product-affine": FiniteProductAffine,
    "real-affine": RealAffine,
    "real-product-affine": RealProductAffine,
}


def parse_backend(spec: str) -> GroupBackend:
    """Build a backend from an id such as ``finite-affine:p=5`` or ``real-affine``.

    Finite backends accept ``p`` and ``mode`` (exact or float); real
    backends accept ``margin`` (the defect margin).
    """
    family, *rest = spec.strip().split(":")
    if family not in _FAMILIES:
        raise ValueError(f"unknown backend {family!r}; choose from {sorted(_FAMILIES)}")
    opts = {}
    for item in rest:
        m = re.fullmatch(r"(\w+)=([^:]+)", item)
        if not m:
            raise ValueError(f"malformed backend option {item!r}")
        opts[m.group(1)] = m.group(2)
    cls = _FAMILIES[family]
    if cls.finite:
        unknown = set(opts) - {"p", "mode"}
        if unknown:
            raise ValueError(f"unknown options for {family}: {sorted(unknown)}")
        p = int(opts.get("p", 3 if cls is FiniteProductAffine else 5))
        return cls(p, phase_mode=opts.get("mode", "float"))
    unknown = set(opts) - {"margin"}
    if unknown:
        raise ValueError(f"unknown options for {family}: {sorted(unknown)}")
    return cls(defect_margin=float(opts.get("margin", 1e-5)))


def change_of_variables_sums(backend: _FiniteBackend, f) -> tuple[complex, complex]:
    """Both sides of sum_q f(phi(q)) |q|^{-1} = sum_{xi in orbit} f(xi)."""
    lhs = sum(f(backend.phi(q)) / backend.modulus(q) for q in backend.enumerate("Q"))
    rhs = sum(f(xi) for xi in backend.enumerate("Vhat") if backend.in_orbit(xi))
    return complex(lhs), complex(rhs)


def change_of_variables_quadrature(backend: RealAffine, f, n: int = 4001,
                                   log_width: float = 15.0, xi_width: float = 40.0) -> tuple[float, float]:
    """Quadrature of int f(phi(q)) |q|^{-1} dq over R^* and of int f(xi) dxi over R.

    Haar measure on R^* is dx/|x|, so in t = log|x| it is dt on each sign
    component and the left integrand picks up the extra factor e^{-t}.
    Rank one only; ``f`` must accept numpy arrays.
    """
    if backend.rank != 1:
        raise ValueError("quadrature demo is implemented for the rank-one real backend")
    t = np.linspace(-log_width, log_width, n)
    q = np.exp(t)
    lhs = np.trapezoid((f(1.0 / q) + f(-1.0 / q)) / q, t)
    xi = np.linspace(-xi_width, xi_width, n)
    rhs = np.trapezoid(f(xi), xi)
    return float(lhs), float(rhs)


def iter_triples(points: Iterable) -> Iterable:
    pts = list(points)
    return itertools.product(pts, repeat=3)
