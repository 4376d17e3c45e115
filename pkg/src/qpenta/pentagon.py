"""Pentagonal transformation on X = Q x V^ and the pentagonal cocycles built on it.

Notation used throughout: ``x = (q1, xi1)``, ``y = (q2, xi2)`` are points of
X, ``act(q, xi)`` is the dual action ``xi / q`` and ``phi_inv`` inverts the
orbit map ``q -> act(q, xi0)``.

The map is

    w(x, y) = ((q2 q1, act(q2, xi1)), (s^{-1} r, act(s^{-1}, act(q2^{-1}, xi2) - xi1)))

with ``s = phi_inv(act(q2^{-1}, xi0) + xi1)`` and ``r = phi_inv(xi0 + xi1)``.
Whenever a ``phi_inv`` argument leaves the orbit the evaluation raises
:class:`~qpenta.groups.DefectPoint`; checkers count such inputs as skipped.
"""

from __future__ import annotations

import csv
import itertools
from typing import Callable, Iterable

import numpy as np

from .cocycles import OneCochain, TwoCocycle, _decode_q, _encode_q, phase_exponent
from .groups import DefectPoint, GroupBackend, XPoint
from .phases import Phase, phase_error
from .report import ReportBuilder, VerificationReport


class FunctionalEquationViolation(ValueError):
    """The candidate trivializer does not satisfy a(q2 q1, q2.xi1) = a(q2, q2.xi1) a(q1, xi1)."""


# ---------------------------------------------------------------------------
# the map w


def w_apply(b: GroupBackend, x: XPoint, y: XPoint) -> tuple[XPoint, XPoint]:
    q1, xi1 = x
    q2, xi2 = y
    q2i = b.q_inv(q2)
    s = b.phi_inv(b.xi_add(b.dual_act(q2i, b.xi0), xi1))
    r = b.phi_inv(b.xi_add(b.xi0, xi1))
    si = b.q_inv(s)
    first = XPoint(b.q_mul(q2, q1), b.dual_act(q2, xi1))
    second = XPoint(b.q_mul(si, r), b.dual_act(si, b.xi_sub(b.dual_act(q2i, xi2), xi1)))
    return first, second


def w_weight(b: GroupBackend, x: XPoint, y: XPoint) -> float:
    """|phi_inv(act(q2^{-1}, xi0) + xi1)|_V, the scalar factor of the weighted composition."""
    s = b.phi_inv(b.xi_add(b.dual_act(b.q_inv(y.q), b.xi0), x.xi))
    return b.modulus(s)


class PentagonalMap:
    """A map X x X -> X x X together with its weight function."""

    def __init__(self, backend: GroupBackend, forward: Callable, weight: Callable | None = None,
                 name: str = "w"):
        self.backend = backend
        self.forward = forward
        self.weight = weight or (lambda x, y: 1.0)
        self.name = name

    def __call__(self, x, y):
        return self.forward(x, y)


def standard_map(b: GroupBackend) -> PentagonalMap:
    return PentagonalMap(b, lambda x, y: w_apply(b, x, y), lambda x, y: w_weight(b, x, y), "w")


def as_map(w, backend: GroupBackend | None = None) -> PentagonalMap:
    if isinstance(w, PentagonalMap):
        return w
    if isinstance(w, GroupBackend):
        return standard_map(w)
    raise TypeError("expected a PentagonalMap or a backend")


# ---------------------------------------------------------------------------
# sampling helpers


def triples(b: GroupBackend, count: int = 0, seed: int | None = 0, kind: str = "X") -> Iterable:
    """All triples (finite, ``count == 0``) or ``count`` seeded random triples."""
    if count == 0:
        if not b.finite:
            raise ValueError("real backends need a positive sample count")
        return itertools.product(b.enumerate(kind), repeat=3)
    rng = np.random.default_rng(seed)
    if b.finite:
        pts = b.enumerate(kind)
        idx = rng.integers(0, len(pts), size=(count, 3))
        return ((pts[i], pts[j], pts[k]) for i, j, k in idx)
    return ((b.random_point(kind, rng), b.random_point(kind, rng), b.random_point(kind, rng))
            for _ in range(count))


def pentagon_sides(w: PentagonalMap, x, y, z):
    """Both sides of w23 w13 w12 = w12 w23 applied to (x, y, z).

    Also returns the intermediate pairs needed by the cocycle identity.
    """
    a, bb = w(x, y)
    a2, z1 = w(a, z)
    b2, z2 = w(bb, z1)
    y1, zr = w(y, z)
    x1, y2 = w(x, y1)
    return (a2, b2, z2), (x1, y2, zr), (a, bb, z1, y1)


def _triple_error(b: GroupBackend, lhs, rhs) -> float:
    err = 0.0
    for u, v in zip(lhs, rhs):
        err = max(err, b.point_error(u.q, v.q), b.point_error(u.xi, v.xi))
    return err


def check_pentagon(w, count: int = 0, seed: int | None = 0, tol: float = 1e-12,
                   points: Iterable | None = None) -> VerificationReport:
    """Point-level pentagon w23 w13 w12 = w12 w23, skipping defect-hitting triples."""
    w = as_map(w)
    b = w.backend
    rb = ReportBuilder("pentagon", b, "", tol, seed, {"map": w.name})
    for x, y, z in (points if points is not None else triples(b, count, seed)):
        try:
            lhs, rhs, _ = pentagon_sides(w, x, y, z)
        except DefectPoint:
            rb.skip()
            continue
        rb.check(_triple_error(b, lhs, rhs), lambda: {"triple": [x, y, z], "lhs": lhs, "rhs": rhs})
    rb.note(mode="exhaustive" if (b.finite and count == 0 and points is None) else "sampled")
    return rb.finish()


def swapped_map(b: GroupBackend, x0: XPoint, y0: XPoint, x1: XPoint, y1: XPoint) -> PentagonalMap:
    """The standard map with the images of (x0, y0) and (x1, y1) exchanged (a negative control)."""
    out0, out1 = w_apply(b, x0, y0), w_apply(b, x1, y1)

    def fwd(x, y):
        if (x, y) == (x0, y0):
            return out1
        if (x, y) == (x1, y1):
            return out0
        return w_apply(b, x, y)

    return PentagonalMap(b, fwd, lambda x, y: w_weight(b, x, y), "w-swapped")


# ---------------------------------------------------------------------------
# pentagonal cocycles


class ThetaCocycle:
    """Phase-valued function on X x X."""

    def __init__(self, backend: GroupBackend, fn: Callable[[XPoint, XPoint], Phase], provenance: str,
                 spec: str = ""):
        self.backend = backend
        self._fn = fn
        self.provenance = provenance
        self.spec = spec or provenance

    def __call__(self, x, y) -> Phase:
        return self._fn(x, y)

    def __mul__(self, other: "ThetaCocycle") -> "ThetaCocycle":
        self.backend.require_same(other.backend)
        return ThetaCocycle(self.backend, lambda x, y: self(x, y) * other(x, y), "product",
                            f"{self.spec}*{other.spec}")


def theta_from_group_cocycle(omega: TwoCocycle) -> ThetaCocycle:
    """Theta_omega(x, y) = omega(r1, r1^{-1} b) conj omega(c, c^{-1} d) with

    r1 = phi_inv(xi0 + xi1),        b = phi_inv(xi0 + act(q2^{-1}, xi2)),
    c  = phi_inv(xi0 + act(q2, xi1)), d = phi_inv(xi0 + xi2).

    It does not depend on q1.
    """
    bk = omega.backend
    xi0 = bk.xi0
    add, act, inv, mul, pinv = bk.xi_add, bk.dual_act, bk.q_inv, bk.q_mul, bk.phi_inv

    def fn(x, y):
        _, xi1 = x
        q2, xi2 = y
        r1 = pinv(add(xi0, xi1))
        bb = pinv(add(xi0, act(inv(q2), xi2)))
        c = pinv(add(xi0, act(q2, xi1)))
        d = pinv(add(xi0, xi2))
        return omega(r1, mul(inv(r1), bb)) * omega(c, mul(inv(c), d)).conj()

    return ThetaCocycle(bk, fn, "from_omega", f"theta[{omega.spec}]")


def theta_coboundary(a: Callable[[XPoint], Phase], w) -> ThetaCocycle:
    """Theta_a(x, y) = a(x) a(y) conj a(w1(x, y)) conj a(w2(x, y))."""
    w = as_map(w)

    def fn(x, y):
        u, v = w(x, y)
        return a(x) * a(y) * a(u).conj() * a(v).conj()

    return ThetaCocycle(w.backend, fn, "coboundary", "theta[coboundary]")


def trivial_theta(b: GroupBackend) -> ThetaCocycle:
    one = b.root_of_unity(0, 1)
    return ThetaCocycle(b, lambda x, y: one, "trivial", "theta[trivial]")


def theta_identity_sides(theta: ThetaCocycle, w: PentagonalMap, x, y, z):
    """Both sides of Theta(x,y) Theta(w1(x,y),z) Theta(w2(x,y), w2(w1(x,y),z)) = Theta(y,z) Theta(x, w1(y,z))."""
    a, bb = w(x, y)
    a2, z1 = w(a, z)
    y1, _ = w(y, z)
    lhs = theta(x, y) * theta(a, z) * theta(bb, z1)
    rhs = theta(y, z) * theta(x, y1)
    return lhs, rhs


def check_theta_pentagonal(theta: ThetaCocycle, w=None, count: int = 0, seed: int | None = 0,
                           tol: float = 1e-12, points: Iterable | None = None) -> VerificationReport:
    """Scalar form of the pentagon for the twisted operator Theta * (composition by w).

    Triples where any of the evaluations hits the defect set are skipped.
    """
    b = theta.backend
    w = as_map(w if w is not None else b)
    rb = ReportBuilder("theta-pentagon", b, theta.spec, tol, seed)
    for x, y, z in (points if points is not None else triples(b, count, seed)):
        try:
            lhs, rhs = theta_identity_sides(theta, w, x, y, z)
        except DefectPoint:
            rb.skip()
            continue
        rb.check(phase_error(lhs, rhs), lambda: {"triple": [x, y, z], "lhs": lhs, "rhs": rhs})
    return rb.finish()


def operator_regular_triple(theta: ThetaCocycle, w: PentagonalMap, x, y, z) -> bool:
    """True when both the point pentagon and the cocycle identity are defined at (x, y, z)."""
    try:
        pentagon_sides(w, x, y, z)
        theta_identity_sides(theta, w, x, y, z)
        a, bb = w(x, y)
        _, z1 = w(a, z)
        theta(bb, z1)
    except DefectPoint:
        return False
    return True


def write_theta_table(theta: ThetaCocycle, path) -> int:
    """CSV with columns q1,xi1,q2,xi2,exponent,order; defect pairs are omitted.

    Returns the number of rows written.
    """
    b = theta.backend
    if not b.finite:
        raise ValueError("Theta tables are only available on finite backends")
    n = b.phase_order
    rows = 0
    with open(path, "w", newline="", encoding="utf-8") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["q1", "xi1", "q2", "xi2", "exponent", "order"])
        for x, y in itertools.product(b.enumerate("X"), repeat=2):
            try:
                val = theta(x, y)
            except DefectPoint:
                continue
            wr.writerow([_encode_q(x.q), _encode_q(x.xi), _encode_q(y.q), _encode_q(y.xi),
                         phase_exponent(val, n), n])
            rows += 1
    return rows


def theta_from_table(b: GroupBackend, path) -> ThetaCocycle:
    """Load a table written by :func:`write_theta_table`; missing pairs raise DefectPoint."""
    table = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            x = XPoint(_decode_q(row["q1"], b.rank), _decode_q(row["xi1"], b.rank))
            y = XPoint(_decode_q(row["q2"], b.rank), _decode_q(row["xi2"], b.rank))
            table[(x, y)] = (int(row["exponent"]), int(row["order"]))

    def fn(x, y):
        try:
            k, n = table[(x, y)]
        except KeyError:
            raise DefectPoint(f"no table entry for {(x, y)!r}") from None
        return b.root_of_unity(k, n)

    return ThetaCocycle(b, fn, "table", f"table:{path}")


# ---------------------------------------------------------------------------
# trivializers and reconstruction


def trivializer_from_u(u: OneCochain) -> Callable[[XPoint], Phase]:
    """a(q, xi) = u(phi_inv(xi0 + xi)) conj u(phi_inv(xi0 + act(q^{-1}, xi)))."""
    b = u.backend

    def a(x: XPoint) -> Phase:
        q, xi = x
        return u(b.phi_inv(b.xi_add(b.xi0, xi))) * u(b.phi_inv(b.xi_add(b.xi0, b.dual_act(b.q_inv(q), xi)))).conj()

    return a


def check_trivialization(theta: ThetaCocycle, a: Callable[[XPoint], Phase], w=None, count: int = 0,
                         seed: int | None = 0, tol: float = 1e-12) -> VerificationReport:
    """Theta(x, y) a(w1) a(w2) conj(a(x) a(y)) = 1 on all (or sampled) regular pairs."""
    b = theta.backend
    w = as_map(w if w is not None else b)
    rb = ReportBuilder("theta-triviality", b, theta.spec, tol, seed)
    one = b.root_of_unity(0, 1)
    if count == 0:
        pairs = itertools.product(b.enumerate("X"), repeat=2)
    else:
        rng = np.random.default_rng(seed)
        pairs = ((b.random_point("X", rng), b.random_point("X", rng)) for _ in range(count))
    for x, y in pairs:
        try:
            u, v = w(x, y)
            val = theta(x, y) * a(u) * a(v) * (a(x) * a(y)).conj()
        except DefectPoint:
            rb.skip()
            continue
        rb.check(phase_error(val, one), lambda: {"pair": [x, y], "value": val})
    return rb.finish()


def check_functional_equation(a: Callable[[XPoint], Phase], b: GroupBackend, count: int = 0,
                              seed: int | None = 0, tol: float = 1e-12) -> VerificationReport:
    """a(q2 q1, act(q2, xi1)) = a(q2, act(q2, xi1)) a(q1, xi1)."""
    rb = ReportBuilder("functional-equation", b, "", tol, seed)
    if count == 0:
        items = ((q2, x) for q2 in b.enumerate("Q") for x in b.enumerate("X"))
    else:
        rng = np.random.default_rng(seed)
        items = ((b.random_point("Q", rng), b.random_point("X", rng)) for _ in range(count))
    for q2, (q1, xi1) in items:
        try:
            moved = b.dual_act(q2, xi1)
            lhs = a(XPoint(b.q_mul(q2, q1), moved))
            rhs = a(XPoint(q2, moved)) * a(XPoint(q1, xi1))
        except DefectPoint:
            rb.skip()
            continue
        rb.check(phase_error(lhs, rhs), lambda: {"q2": q2, "x": (q1, xi1), "lhs": lhs, "rhs": rhs})
    return rb.finish()


def solution_form_trivializer(b: GroupBackend, k: Callable) -> Callable[[XPoint], Phase]:
    """a(q, xi) = k(xi) conj k(act(q^{-1}, xi)) for a phase-valued k on V^."""
    return lambda x: k(x.xi) * k(b.dual_act(b.q_inv(x.q), x.xi)).conj()


def reconstruct_u_from_trivializer(a: Callable[[XPoint], Phase], b: GroupBackend,
                                   k_at_zero: Phase | None = None, check_count: int = 0,
                                   seed: int | None = 0, tol: float = 1e-12,
                                   limit_scale: float = 1e-12) -> OneCochain:
    """Recover a 1-cochain u from a trivializer a of Theta_{du}.

    Set k(xi) = conj a(phi_inv(xi)^{-1}, xi0) on the orbit and
    u(q) = k(act(q, xi0) - xi0) / k(0).  The value k(0) is not determined
    by a on the orbit.  On real backends it is the limit of k along
    eps * xi0 as eps -> 0 (approximated at ``eps = limit_scale``).  On
    finite backends there is no limit, so ``k_at_zero`` must be supplied
    when exact recovery of du is wanted; with the default 1 the result
    differs from u by a constant on Q minus {e}.

    The functional equation is checked first (exhaustively when
    ``check_count == 0`` on finite backends).
    """
    if not b.finite and check_count == 0:
        check_count = 1000
    rep = check_functional_equation(a, b, count=check_count, seed=seed, tol=tol if b.finite else 1e-9)
    if not rep.passed:
        raise FunctionalEquationViolation(
            f"{rep.n_failed} of {rep.n_checked} functional-equation checks failed; first: {rep.failures[:1]}")

    def k(xi):
        return a(XPoint(b.q_inv(b.phi_inv(xi)), b.xi0)).conj()

    if k_at_zero is None:
        if b.finite:
            k_at_zero = b.root_of_unity(0, 1)
        else:
            eps = b._cw(lambda c: c * limit_scale, b.xi0)
            # eps lies inside the numerical defect band, so phi_inv is taken without it
            k_at_zero = a(XPoint(b.q_inv(b.phi_inv_unbanded(eps)), b.xi0)).conj()
    k0 = k_at_zero
    e = b.q_identity

    def u(q):
        if q == e:
            return k0
        return k(b.xi_sub(b.phi(q), b.xi0))

    return OneCochain(b, u, "reconstructed")


def coboundary_gap(u1: OneCochain, u2: OneCochain, pairs: Iterable) -> float:
    """max |du1 - du2| over the given pairs, with defect pairs ignored."""
    b = u1.backend
    err = 0.0
    for x, y in pairs:
        try:
            d1 = u1(x) * u1(y) * u1(b.q_mul(x, y)).conj()
            d2 = u2(x) * u2(y) * u2(b.q_mul(x, y)).conj()
        except DefectPoint:
            continue
        err = max(err, phase_error(d1, d2))
    return err


# ---------------------------------------------------------------------------
# the dual semidirect product Q x| V^ and its matched pair


def dual_mul(b: GroupBackend, x, y):
    """(q, xi)(q', xi') = (q q', xi + act(q, xi'))."""
    return XPoint(b.q_mul(x[0], y[0]), b.xi_add(x[1], b.dual_act(x[0], y[1])))


def dual_inv(b: GroupBackend, x):
    qi = b.q_inv(x[0])
    return XPoint(qi, b.xi_neg(b.dual_act(qi, x[1])))


def dual_identity(b: GroupBackend):
    return XPoint(b.q_identity, b.xi_zero)


def in_first_subgroup(b: GroupBackend, x) -> bool:
    return x[1] == b.xi_zero


def second_subgroup_element(b: GroupBackend, r):
    """(r, xi0 - act(r, xi0)), the element of the conjugate copy of Q."""
    return XPoint(r, b.xi_sub(b.xi0, b.phi(r)))


def matched_pair_factorize(b: GroupBackend, x):
    """x = p1 p2 with p1 = (s, 0), p2 = (s^{-1} q, xi0 - act(s^{-1} q, xi0)), s = phi_inv(xi + act(q, xi0))."""
    q, xi = x
    s = b.phi_inv(b.xi_add(xi, b.phi(q)))
    return XPoint(s, b.xi_zero), second_subgroup_element(b, b.q_mul(b.q_inv(s), q))


def brute_force_factorizations(b: GroupBackend, x) -> list:
    out = []
    for s in b.enumerate("Q"):
        for r in b.enumerate("Q"):
            p1, p2 = XPoint(s, b.xi_zero), second_subgroup_element(b, r)
            if dual_mul(b, p1, p2) == x:
                out.append((p1, p2))
    return out


def w_matched_pair(b: GroupBackend, x, y):
    """(x p1(p2(x)^{-1} y), p2(x)^{-1} y)."""
    _, p2x = matched_pair_factorize(b, x)
    t = dual_mul(b, dual_inv(b, p2x), y)
    p1t, _ = matched_pair_factorize(b, t)
    return dual_mul(b, x, p1t), t


def matched_pair_map(b: GroupBackend) -> PentagonalMap:
    return PentagonalMap(b, lambda x, y: w_matched_pair(b, x, y), None, "w_mp")


def check_matched_pair(b: GroupBackend, count: int = 0, seed: int | None = 0,
                       tol: float = 1e-12) -> VerificationReport:
    """Factorization against the brute-force oracle, G1 cap G2 = {e}, and the pentagon for w_mp."""
    rb = ReportBuilder("matched-pair", b, "", tol, seed)
    e = dual_identity(b)
    if b.finite:
        g1 = {XPoint(s, b.xi_zero) for s in b.enumerate("Q")}
        g2 = {second_subgroup_element(b, r) for r in b.enumerate("Q")}
        rb.check_true(g1 & g2 == {e}, {"intersection": sorted(g1 & g2)})
        for x in b.enumerate("X"):
            found = brute_force_factorizations(b, x)
            try:
                closed = matched_pair_factorize(b, x)
            except DefectPoint:
                rb.check_true(not found, {"x": x, "brute_force": found})
                rb.skip()
                continue
            rb.check_true(found == [closed], lambda: {"x": x, "brute_force": found, "closed_form": closed})
    else:
        rng = np.random.default_rng(seed)
        for _ in range(count or 1000):
            x = b.random_point("X", rng)
            try:
                p1, p2 = matched_pair_factorize(b, x)
            except DefectPoint:
                rb.skip()
                continue
            prod = dual_mul(b, p1, p2)
            rb.check(max(b.point_error(prod.q, x.q), b.point_error(prod.xi, x.xi)),
                     lambda: {"x": x, "product": prod})
    pent = check_pentagon(matched_pair_map(b), count=count, seed=seed, tol=tol)
    rb.report.n_checked += pent.n_checked
    rb.report.n_failed += pent.n_failed
    rb.report.n_skipped_defect += pent.n_skipped_defect
    rb.report.max_error = max(rb.report.max_error, pent.max_error)
    rb.report.failures.extend(pent.failures[: max(0, 10 - len(rb.report.failures))])
    rb.note(pentagon_checked=pent.n_checked, pentagon_skipped=pent.n_skipped_defect)
    return rb.finish()


# ---------------------------------------------------------------------------
# the scalar form of the dual 2-cocycle equation


def orbit_pullback(omega: TwoCocycle) -> Callable:
    """(xi1, xi2) -> omega(phi_inv(xi0 + xi1), phi_inv(xi0 + xi2))."""
    b = omega.backend
    return lambda s, t: omega(b.phi_inv(b.xi_add(b.xi0, s)), b.phi_inv(b.xi_add(b.xi0, t)))


def dual_cocycle_sides(b: GroupBackend, theta2: Callable, s, t, r):
    """Theta'(s, t, r) and Theta''(s, t, r) for a function theta2 on V^ x V^.

    Theta'  = theta2(s, t) theta2(s + act(phi_inv(xi0 + s), t), r)
    Theta'' = theta2(t, r) theta2(s, t + act(phi_inv(xi0 + t), r))
    """
    xi0 = b.xi0
    ps = b.phi_inv(b.xi_add(xi0, s))
    pt = b.phi_inv(b.xi_add(xi0, t))
    lhs = theta2(s, t) * theta2(b.xi_add(s, b.dual_act(ps, t)), r)
    rhs = theta2(t, r) * theta2(s, b.xi_add(t, b.dual_act(pt, r)))
    return lhs, rhs


def dual_cocycle_check(theta2, b: GroupBackend | None = None, count: int = 0, seed: int | None = 0,
                       tol: float = 1e-12, label: str = "") -> VerificationReport:
    """Pointwise Theta' = Theta'' over V^ cubed.

    ``theta2`` is either a TwoCocycle (its orbit pullback is used) or any
    callable on pairs of characters (for negative controls).
    """
    if isinstance(theta2, TwoCocycle):
        b = theta2.backend
        label = label or theta2.spec
        theta2 = orbit_pullback(theta2)
    rb = ReportBuilder("dual-cocycle", b, label, tol, seed)
    for s, t, r in triples(b, count, seed, kind="Vhat"):
        try:
            lhs, rhs = dual_cocycle_sides(b, theta2, s, t, r)
        except DefectPoint:
            rb.skip()
            continue
        rb.check(phase_error(lhs, rhs), lambda: {"xi": [s, t, r], "lhs": lhs, "rhs": rhs})
    return rb.finish()
