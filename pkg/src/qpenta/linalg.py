"""Weighted L^2 spaces, dense operators between them, and structured
weighted-composition operators that can be applied without a dense matrix.

Adjoints are always taken with respect to the weights of the spaces:
for ``A: dom -> cod`` with matrix ``M`` the adjoint has matrix
``W_dom^{-1} M^H W_cod``.

Antilinear operators are stored as ``f -> M conj(f)``.  Composition keeps
track of linearity automatically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .groups import DefectPoint
from .phases import ExactPhase


class Space:
    """A finite set of enumerated points with positive weights."""

    def __init__(self, name: str, points: Sequence, weights):
        self.name = name
        self.points = list(points)
        self.index = {pt: i for i, pt in enumerate(self.points)}
        w = np.asarray(weights, dtype=float)
        if w.ndim == 0:
            w = np.full(len(self.points), float(w))
        if w.shape != (len(self.points),) or np.any(w <= 0):
            raise ValueError("weights must be positive, one per point")
        self.weights = w

    @property
    def dim(self) -> int:
        return len(self.points)

    def tensor(self, other: "Space") -> "Space":
        pts = [(a, b) for a in self.points for b in other.points]
        return Space(f"{self.name}(x){other.name}", pts, np.kron(self.weights, other.weights))

    def inner(self, f, g) -> complex:
        """<f, g>, antilinear in the first slot."""
        return complex(np.sum(self.weights * np.conj(f) * g))

    def norm(self, f) -> float:
        return math.sqrt(max(self.inner(f, f).real, 0.0))

    def basis(self, i: int) -> np.ndarray:
        e = np.zeros(self.dim, dtype=complex)
        e[i] = 1.0
        return e

    def __eq__(self, other):
        return isinstance(other, Space) and self.name == other.name and self.dim == other.dim

    def __hash__(self):
        return hash((self.name, self.dim))

    def __repr__(self):
        return f"<Space {self.name} dim={self.dim}>"


@dataclass
class StateVector:
    space: Space
    coeffs: np.ndarray

    def inner(self, other: "StateVector") -> complex:
        if other.space != self.space:
            raise ValueError("vectors live in different spaces")
        return self.space.inner(self.coeffs, other.coeffs)

    def norm(self) -> float:
        return self.space.norm(self.coeffs)


@dataclass
class OperatorMatrix:
    dom: Space
    cod: Space
    matrix: np.ndarray
    antilinear: bool = False
    structured: "WeightedComposition | None" = field(default=None, repr=False)

    def __post_init__(self):
        if self.matrix.shape != (self.cod.dim, self.dom.dim):
            raise ValueError(f"matrix shape {self.matrix.shape} does not match {self.cod} <- {self.dom}")

    def apply(self, f):
        if isinstance(f, StateVector):
            return StateVector(self.cod, self.apply(f.coeffs))
        f = np.asarray(f)
        return self.matrix @ (np.conj(f) if self.antilinear else f)

    __call__ = apply

    def __matmul__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        if other.cod != self.dom:
            raise ValueError(f"cannot compose {self.dom} with {other.cod}")
        right = np.conj(other.matrix) if self.antilinear else other.matrix
        return OperatorMatrix(other.dom, self.cod, self.matrix @ right, self.antilinear != other.antilinear)

    def adjoint(self) -> "OperatorMatrix":
        wd = self.dom.weights[:, None]
        wc = self.cod.weights[None, :]
        m = self.matrix.T if self.antilinear else self.matrix.conj().T
        return OperatorMatrix(self.cod, self.dom, m * wc / wd, self.antilinear)

    def kron(self, other: "OperatorMatrix") -> "OperatorMatrix":
        if self.antilinear != other.antilinear:
            raise ValueError("a tensor product needs two linear or two antilinear factors")
        return OperatorMatrix(self.dom.tensor(other.dom), self.cod.tensor(other.cod),
                              np.kron(self.matrix, other.matrix), self.antilinear)

    def restrict_rows(self, rows) -> np.ndarray:
        return self.matrix[np.asarray(rows, dtype=int)]

    def unitarity_error(self, dom_projector=None, cod_projector=None) -> float:
        """max entry of |A*A - P_dom| and |AA* - P_cod| (identity projectors by default)."""
        lin = OperatorMatrix(self.dom, self.cod, self.matrix)
        adj = lin.adjoint()
        pd = np.eye(self.dom.dim) if dom_projector is None else dom_projector
        pc = np.eye(self.cod.dim) if cod_projector is None else cod_projector
        e1 = np.abs((adj @ lin).matrix - pd).max(initial=0.0)
        e2 = np.abs((lin @ adj).matrix - pc).max(initial=0.0)
        return float(max(e1, e2))

    def distance(self, other: "OperatorMatrix", rows=None) -> float:
        if self.antilinear != other.antilinear:
            raise ValueError("comparing a linear with an antilinear operator")
        a, b = self.matrix, other.matrix
        if rows is not None:
            a, b = a[rows], b[rows]
        return float(np.abs(a - b).max(initial=0.0))


def identity(space: Space) -> OperatorMatrix:
    return OperatorMatrix(space, space, np.eye(space.dim, dtype=complex))


def diagonal(space: Space, values) -> OperatorMatrix:
    return OperatorMatrix(space, space, np.diag(np.asarray(values, dtype=complex)))


# ---------------------------------------------------------------------------
# structured operators


class WeightedComposition:
    """(A f)(x) = coef[x] * f(src[x]) on a single space (src[x] = -1: zero row).

    When every phase was exact, ``exps`` holds the exponents modulo
    ``order`` so that two structured operators can be compared exactly.
    """

    def __init__(self, space: Space, src, coef, exps=None, order: int | None = None,
                 completed=None, name: str = ""):
        self.space = space
        self.src = np.asarray(src, dtype=np.int64)
        self.coef = np.asarray(coef, dtype=complex)
        self.exps = None if exps is None else np.asarray(exps, dtype=np.int64)
        self.order = order
        self.completed = np.zeros(space.dim, bool) if completed is None else np.asarray(completed, bool)
        self.name = name

    @property
    def defined_rows(self) -> np.ndarray:
        """Rows given by the defining formula (neither zero nor filled by completion)."""
        return np.flatnonzero((self.src >= 0) & ~self.completed)

    @classmethod
    def from_rule(cls, space: Space, rule: Callable, complete: bool = False, order: int | None = None,
                  name: str = "") -> "WeightedComposition":
        """Build from ``rule(point) -> (source_point, phase, weight)``.

        A rule raising :class:`DefectPoint` (or returning None) leaves the row
        undefined.  Undefined rows stay zero, or with ``complete=True`` are
        matched bijectively to the unused source points in enumeration order
        (phase 1, weight 1).
        """
        n = space.dim
        src = np.full(n, -1, dtype=np.int64)
        coef = np.zeros(n, dtype=complex)
        exps = np.zeros(n, dtype=np.int64)
        exact = order is not None
        for i, pt in enumerate(space.points):
            try:
                r = rule(pt)
            except DefectPoint:
                r = None
            if r is None:
                continue
            s, ph, wt = r
            src[i] = space.index[s]
            coef[i] = complex(ph) * wt
            if exact:
                if isinstance(ph, ExactPhase):
                    t = ph.turns() * order
                    if t.denominator != 1:
                        exact = False
                    else:
                        exps[i] = int(t.numerator) % order
                else:
                    exact = False
        completed = np.zeros(n, bool)
        if complete:
            src, completed = canonical_completion(src)
            coef[completed] = 1.0
        return cls(space, src, coef, exps if exact else None, order if exact else None, completed, name)

    def to_operator(self) -> OperatorMatrix:
        n = self.space.dim
        m = np.zeros((n, n), dtype=complex)
        rows = np.flatnonzero(self.src >= 0)
        m[rows, self.src[rows]] = self.coef[rows]
        return OperatorMatrix(self.space, self.space, m, structured=self)

    def apply(self, f: np.ndarray) -> np.ndarray:
        """Apply along the first axis of ``f`` (so stacked vectors work too)."""
        f = np.asarray(f)
        out = np.zeros_like(f, dtype=complex)
        rows = np.flatnonzero(self.src >= 0)
        shape = (-1,) + (1,) * (f.ndim - 1)
        out[rows] = self.coef[rows].reshape(shape) * f[self.src[rows]]
        return out

    def is_bijective(self) -> bool:
        return bool(np.all(self.src >= 0)) and len(np.unique(self.src)) == self.space.dim

    def unitarity_error(self) -> float:
        """For a bijection: how far the coefficients are from unit modulus (weights assumed uniform)."""
        if not self.is_bijective():
            return math.inf
        w = self.space.weights
        return float(np.abs(np.abs(self.coef) ** 2 * w[self.src] / w - 1.0).max(initial=0.0))

    def exact_equal(self, other: "WeightedComposition", rows=None) -> bool | None:
        """Exact comparison via exponents; None if either side is not exact."""
        if self.exps is None or other.exps is None or self.order != other.order:
            return None
        rows = np.arange(self.space.dim) if rows is None else np.asarray(rows)
        return bool(np.array_equal(self.src[rows], other.src[rows]) and
                    np.array_equal(self.exps[rows], other.exps[rows]))

    def then_diagonal(self, diag: "WeightedComposition") -> "WeightedComposition":
        """The composite D A for a diagonal structured operator D."""
        if not np.array_equal(diag.src, np.arange(self.space.dim)):
            raise ValueError("left factor must be diagonal")
        exps = None
        if self.exps is not None and diag.exps is not None and self.order == diag.order:
            exps = (self.exps + diag.exps) % self.order
        return WeightedComposition(self.space, self.src, self.coef * diag.coef, exps,
                                   self.order if exps is not None else None, self.completed,
                                   f"{diag.name}*{self.name}")


def canonical_completion(src: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Fill undefined rows (-1) with the unused columns, both in increasing order.

    The defined part must be injective; the result is a permutation.
    """
    src = np.array(src, dtype=np.int64)
    n = len(src)
    used = src[src >= 0]
    if len(np.unique(used)) != len(used):
        raise ValueError("the defined part of the map is not injective")
    free_rows = np.flatnonzero(src < 0)
    free_cols = np.setdiff1d(np.arange(n), used)
    if len(free_rows) != len(free_cols):
        raise ValueError("cannot complete to a bijection")
    completed = np.zeros(n, bool)
    src[free_rows] = free_cols
    completed[free_rows] = True
    return src, completed


# ---------------------------------------------------------------------------
# three-leg application


def _as_apply(op) -> Callable[[np.ndarray], np.ndarray]:
    if isinstance(op, WeightedComposition):
        return op.apply
    if isinstance(op, OperatorMatrix):
        if op.antilinear:
            raise ValueError("leg application needs a linear operator")
        return lambda f: op.matrix @ f
    m = np.asarray(op)
    return lambda f: m @ f


def apply_on_legs(op, tensor: np.ndarray, legs: tuple[int, int]) -> np.ndarray:
    """Apply a two-leg operator to legs (i, j) of a three-leg tensor of shape (n, n, n)."""
    n = tensor.shape[0]
    other = ({0, 1, 2} - set(legs)).pop()
    order = (legs[0], legs[1], other)
    t = np.transpose(tensor, order).reshape(n * n, n)
    t = _as_apply(op)(t).reshape(n, n, n)
    return np.transpose(t, np.argsort(order))


def pentagon_sides_3leg(op, tensor: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(W12 W13 W23 f, W23 W12 f) for a two-leg operator W."""
    lhs = apply_on_legs(op, apply_on_legs(op, apply_on_legs(op, tensor, (1, 2)), (0, 2)), (0, 1))
    rhs = apply_on_legs(op, apply_on_legs(op, tensor, (0, 1)), (1, 2))
    return lhs, rhs
