"""Group 2-cocycles on Q and 1-cochains.

A ``TwoCocycle`` is a phase-valued function on Q x Q.  Constructors cover the
trivial cocycle, the Heisenberg skew-bicharacter on a product group
A x A^ (realized as (F_p^*)^2 or (R^*)^2), coboundaries of 1-cochains and
tables loaded from CSV.

Discrete logarithms use the smallest primitive root of p, so exponents are
reproducible: for p = 5 the base is 2 and L(1), L(2), L(4), L(3) = 0, 1, 2, 3.
"""

from __future__ import annotations

import csv
import itertools
import math
import re
from typing import Callable, Iterable

import numpy as np

from .groups import GroupBackend
from .phases import ExactPhase, Phase, phase_error
from .report import ReportBuilder, VerificationReport


class CocycleSpecError(ValueError):
    pass


class OneCochain:
    """Phase-valued function u on Q, rescaled so that u(e) = 1."""

    def __init__(self, backend: GroupBackend, fn: Callable[[object], Phase], name: str = "u"):
        self.backend = backend
        self.name = name
        e = backend.q_identity
        c = fn(e)
        if c.is_one():
            self._fn = fn
        else:
            ci = c.conj()
            self._fn = lambda q: fn(q) * ci

    def __call__(self, q) -> Phase:
        return self._fn(q)

    def __mul__(self, other: "OneCochain") -> "OneCochain":
        self.backend.require_same(other.backend)
        return OneCochain(self.backend, lambda q: self(q) * other(q), f"{self.name}*{other.name}")


class TwoCocycle:
    """Phase-valued function on Q x Q.

    The constructor divides by omega(e, e) so that the normalization
    omega(e, e) = 1 always holds; for an honest cocycle this forces
    omega(q, e) = omega(e, q) = 1 as well (checked by
    :func:`check_cocycle_equation`).
    """

    def __init__(self, backend: GroupBackend, fn: Callable[[object, object], Phase], kind: str,
                 params: dict | None = None, spec: str | None = None):
        self.backend = backend
        self.kind = kind
        self.params = dict(params or {})
        self.spec = spec or kind
        e = backend.q_identity
        c = fn(e, e)
        self.normalized = True
        if c.is_one():
            self._fn = fn
        else:
            ci = c.conj()
            self._fn = lambda a, b: fn(a, b) * ci

    def __call__(self, a, b) -> Phase:
        return self._fn(a, b)

    def __mul__(self, other: "TwoCocycle") -> "TwoCocycle":
        self.backend.require_same(other.backend)
        return TwoCocycle(self.backend, lambda a, b: self(a, b) * other(a, b), "product",
                          spec=f"{self.spec}*{other.spec}")

    def conj(self) -> "TwoCocycle":
        return TwoCocycle(self.backend, lambda a, b: self(a, b).conj(), "conjugate", spec=f"conj({self.spec})")

    def __repr__(self):
        return f"<TwoCocycle {self.spec} on {self.backend.id}>"


# ---------------------------------------------------------------------------
# constructors


def trivial_cocycle(backend: GroupBackend) -> TwoCocycle:
    one = backend.root_of_unity(0, 1)
    return TwoCocycle(backend, lambda a, b: one, "trivial")


def coboundary(u: OneCochain) -> TwoCocycle:
    """(du)(q1, q2) = u(q1) u(q2) conj u(q1 q2)."""
    b = u.backend
    omega = TwoCocycle(b, lambda x, y: u(x) * u(y) * u(b.q_mul(x, y)).conj(), "coboundary",
                       {"u": u.name}, spec=f"coboundary:u={u.name}")
    omega.cochain = u
    return omega


def heisenberg_cocycle(backend: GroupBackend, theta: float = 1.0, k: int = 1, form: str = "skew") -> TwoCocycle:
    """The Heisenberg bicharacter on a product Q = A x A^.

    ``form="skew"`` gives the skew-bicharacter
    zeta^{k (L(a1) L(b2) - L(b1) L(a2))} with zeta = exp(2 pi i/(p-1)) on
    (F_p^*)^2 and exp(i theta (log|a1| log|b2| - log|b1| log|a2|)) on
    (R^*)^2.  ``form="half"`` keeps only the first term; it is cohomologous
    to a square root of the skew form, which matters when zeta = -1.
    """
    if backend.rank != 2:
        raise CocycleSpecError("the Heisenberg cocycle needs a product backend (Q = A x A^)")
    if form not in ("skew", "half"):
        raise CocycleSpecError(f"unknown Heisenberg form {form!r}")
    skew = form == "skew"
    if backend.finite:
        n = backend.phase_order
        step = n // (backend.p - 1)
        L = backend.dlog

        def fn(x, y):
            e = L(x[0]) * L(y[1])
            if skew:
                e -= L(x[1]) * L(y[0])
            return backend.root_of_unity(k * e * step, n)

        params = {"k": k, "form": form}
    else:
        def fn(x, y):
            la1, lb1 = math.log(abs(x[0])), math.log(abs(x[1]))
            la2, lb2 = math.log(abs(y[0])), math.log(abs(y[1]))
            t = la1 * lb2 - (lb1 * la2 if skew else 0.0)
            return backend.phase_from_angle(theta * t)

        params = {"theta": theta, "form": form}
    spec = "heisenberg:" + ":".join(f"{a}={b}" for a, b in params.items())
    return TwoCocycle(backend, fn, "heisenberg", params, spec=spec)


def named_cochain(backend: GroupBackend, name: str, seed: int = 0) -> OneCochain:
    """Shipped 1-cochains.

    ``dlog``: a character (zeta^{sum L(q_c)}, resp. exp(i sum log|q_c|)).
    ``dlogsq`` (alias ``dlog2``): zeta^{sum L(q_c)^2} with zeta = exp(2 pi i/(p-1));
    on the reals exp(i sum (log|q_c|)^2 + i pi/3 [q_c < 0]).
    ``random``: seeded random exponents modulo lcm(p, p-1) on finite
    backends; on the reals a seeded smooth phase
    exp(i sum (alpha log|q_c| + beta log^2|q_c| + gamma [q_c < 0])).
    """
    rank1 = backend.rank == 1
    comps = (lambda q: (q,)) if rank1 else (lambda q: q)
    if name == "dlog2":
        name = "dlogsq"
    if backend.finite:
        n = backend.phase_order
        step = n // (backend.p - 1)
        L = backend.dlog
        if name == "dlog":
            fn = lambda q: backend.root_of_unity(step * sum(L(c) for c in comps(q)), n)
        elif name == "dlogsq":
            fn = lambda q: backend.root_of_unity(step * sum(L(c) ** 2 for c in comps(q)), n)
        elif name == "random":
            rng = np.random.default_rng(seed)
            table = {q: int(rng.integers(0, n)) for q in backend.enumerate("Q")}
            table[backend.q_identity] = 0
            fn = lambda q: backend.root_of_unity(table[q], n)
        else:
            raise CocycleSpecError(f"unknown cochain {name!r}")
    else:
        if name == "dlog":
            fn = lambda q: backend.phase_from_angle(sum(math.log(abs(c)) for c in comps(q)))
        elif name == "dlogsq":
            fn = lambda q: backend.phase_from_angle(
                sum(math.log(abs(c)) ** 2 + (math.pi / 3 if c < 0 else 0.0) for c in comps(q)))
        elif name == "random":
            rng = np.random.default_rng(seed)
            coef = rng.normal(size=(backend.rank, 3))

            def fn(q):
                t = 0.0
                for (a, b, g), c in zip(coef, comps(q)):
                    lc = math.log(abs(c))
                    t += a * lc + b * lc * lc + (g if c < 0 else 0.0)
                return backend.phase_from_angle(t)
        else:
            raise CocycleSpecError(f"unknown cochain {name!r}")
    label = name if name != "random" else f"random:seed={seed}"
    return OneCochain(backend, fn, label)


def random_cochain(backend: GroupBackend, seed: int) -> OneCochain:
    return named_cochain(backend, "random", seed)


def _encode_q(q) -> str:
    return ";".join(str(c) for c in (q if isinstance(q, tuple) else (q,)))


def _decode_q(s: str, rank: int):
    parts = tuple(int(c) for c in s.split(";"))
    if len(parts) != rank:
        raise CocycleSpecError(f"point {s!r} has the wrong rank")
    return parts[0] if rank == 1 else parts


def write_cocycle_table(omega: TwoCocycle, path) -> None:
    """CSV with columns q1,q2,exponent,order (exact phases on finite backends)."""
    b = omega.backend
    if not b.finite:
        raise CocycleSpecError("tables are only available on finite backends")
    n = b.phase_order
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["q1", "q2", "exponent", "order"])
        for x, y in itertools.product(b.enumerate("Q"), repeat=2):
            w.writerow([_encode_q(x), _encode_q(y), phase_exponent(omega(x, y), n), n])


def phase_exponent(ph: Phase, n: int, tol: float = 1e-9) -> int:
    """Exponent k with ph = exp(2 pi i k/n); float phases are rounded (within tol)."""
    if isinstance(ph, ExactPhase):
        t = ph.turns() * n
        if t.denominator != 1:
            raise ValueError(f"{ph!r} is not an {n}-th root of unity")
        return int(t.numerator) % n
    z = complex(ph)
    k = round(math.atan2(z.imag, z.real) / (2 * math.pi) * n) % n
    if abs(complex(ExactPhase(k, n)) - z) > tol:
        raise ValueError(f"{z} is not an {n}-th root of unity")
    return k


def table_cocycle(backend: GroupBackend, path) -> TwoCocycle:
    if not backend.finite:
        raise CocycleSpecError("tables are only available on finite backends")
    table = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            x = _decode_q(row["q1"], backend.rank)
            y = _decode_q(row["q2"], backend.rank)
            table[(x, y)] = (int(row["exponent"]), int(row["order"]))
    missing = [(x, y) for x, y in itertools.product(backend.enumerate("Q"), repeat=2) if (x, y) not in table]
    if missing:
        raise CocycleSpecError(f"table misses {len(missing)} pairs, e.g. {missing[0]}")

    def fn(x, y):
        k, n = table[(x, y)]
        return backend.root_of_unity(k, n)

    return TwoCocycle(backend, fn, "table", {"path": str(path)}, spec=f"table:{path}")


def make_cocycle(spec: str, backend: GroupBackend) -> TwoCocycle:
    """Parse ``trivial``, ``heisenberg[:theta=..][:k=..][:form=..]``,
    ``coboundary:u=<dlog|dlogsq|random>[:seed=..]`` or ``table:<path>``."""
    spec = spec.strip()
    if spec.startswith("table:"):
        return table_cocycle(backend, spec[len("table:"):])
    kind, *rest = spec.split(":")
    opts = {}
    for item in rest:
        m = re.fullmatch(r"(\w+)=(.+)", item)
        if not m:
            raise CocycleSpecError(f"malformed cocycle option {item!r}")
        opts[m.group(1)] = m.group(2)
    if kind == "trivial":
        if opts:
            raise CocycleSpecError("the trivial cocycle takes no options")
        return trivial_cocycle(backend)
    if kind == "heisenberg":
        unknown = set(opts) - {"theta", "k", "form"}
        if unknown:
            raise CocycleSpecError(f"unknown Heisenberg options {sorted(unknown)}")
        return heisenberg_cocycle(backend, theta=float(opts.get("theta", 1.0)), k=int(opts.get("k", 1)),
                                  form=opts.get("form", "skew"))
    if kind == "coboundary":
        unknown = set(opts) - {"u", "seed"}
        if unknown or "u" not in opts:
            raise CocycleSpecError("coboundary needs u=<name> and optionally seed=<n>")
        u = named_cochain(backend, opts["u"], seed=int(opts.get("seed", 0)))
        return coboundary(u)
    raise CocycleSpecError(f"unknown cocycle kind {kind!r}")


def cochain_for(omega: TwoCocycle) -> OneCochain | None:
    """The 1-cochain behind a shipped coboundary (u = 1 for the trivial cocycle)."""
    b = omega.backend
    if omega.kind == "trivial":
        one = b.root_of_unity(0, 1)
        return OneCochain(b, lambda q: one, "one")
    return getattr(omega, "cochain", None)


# ---------------------------------------------------------------------------
# checks


def antisym_pairing(omega: TwoCocycle) -> Callable[[object, object], Phase]:
    """(x, y) -> omega(x, y) conj omega(y, x); a class invariant for abelian Q."""
    return lambda x, y: omega(x, y) * omega(y, x).conj()


def _q_triples(backend: GroupBackend, count: int, seed: int | None):
    if backend.finite and count == 0:
        return itertools.product(backend.enumerate("Q"), repeat=3)
    rng = np.random.default_rng(seed)
    return ((backend.random_point("Q", rng), backend.random_point("Q", rng), backend.random_point("Q", rng))
            for _ in range(count))


def check_cocycle_equation(omega: TwoCocycle, count: int = 0, seed: int | None = 0,
                           tol: float = 1e-12, triples: Iterable | None = None) -> VerificationReport:
    """omega(q1,q2) omega(q1 q2,q3) = omega(q2,q3) omega(q1,q2 q3), plus omega(q,e) = omega(e,q) = 1.

    ``count = 0`` means exhaustive (finite backends only).
    """
    b = omega.backend
    rb = ReportBuilder("cocycle-equation", b, omega.spec, tol, seed)
    mul = b.q_mul
    if triples is None:
        triples = _q_triples(b, count, seed)
    e = b.q_identity
    singles = set()
    for q1, q2, q3 in triples:
        lhs = omega(q1, q2) * omega(mul(q1, q2), q3)
        rhs = omega(q2, q3) * omega(q1, mul(q2, q3))
        rb.check(phase_error(lhs, rhs), lambda: {"q": [q1, q2, q3], "lhs": lhs, "rhs": rhs})
        singles.add(q1)
    one = b.root_of_unity(0, 1)
    for q in sorted(singles, key=repr)[: 10_000]:
        for val in (omega(q, e), omega(e, q)):
            rb.check(phase_error(val, one), lambda: {"q": q, "value": val, "normalization": True})
    rb.note(mode="exhaustive" if (b.finite and count == 0) else "sampled")
    return rb.finish()
