"""Named verification suites and the driver that runs them."""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np

from .cocycles import (OneCochain, antisym_pairing, check_cocycle_equation, cochain_for, heisenberg_cocycle,
                       make_cocycle, random_cochain)
from .groups import DefectPoint, GroupBackend, parse_backend
from .pentagon import (check_matched_pair, check_pentagon, check_theta_pentagonal, check_trivialization,
                       dual_cocycle_check, reconstruct_u_from_trivializer, standard_map, theta_from_group_cocycle,
                       theta_from_table, trivializer_from_u)
from .phases import phase_error
from .report import ReportBuilder, VerificationReport

DEFAULT_TOL_FINITE = 1e-12
DEFAULT_TOL_REAL = 1e-9
DEFAULT_TOL_3LEG = 1e-10
DEFAULT_REAL_SAMPLES = 10_000


class SuiteConfigError(ValueError):
    pass


@dataclass
class SuiteConfig:
    backend: str
    cocycle: str = "trivial"
    suites: list = field(default_factory=lambda: ["all"])
    seed: int = 0
    tol: float | None = None
    tol3: float = DEFAULT_TOL_3LEG
    samples: int | None = None
    theta_table: str | None = None
    timing: bool = False


class Context:
    """Backend, cocycle and lazily built operator engine shared by suites in one process."""

    def __init__(self, config: SuiteConfig):
        self.config = config
        self.backend: GroupBackend = parse_backend(config.backend)
        self.omega = make_cocycle(config.cocycle, self.backend)
        self.seed = config.seed
        if config.tol is not None:
            self.tol = config.tol
        else:
            self.tol = DEFAULT_TOL_FINITE if self.backend.finite else DEFAULT_TOL_REAL
        self.tol3 = max(config.tol3, self.tol)

    @property
    def count(self) -> int:
        """Sample count for pointwise suites (0 = exhaustive)."""
        if self.config.samples is not None:
            return self.config.samples
        return 0 if self.backend.finite else DEFAULT_REAL_SAMPLES

    @cached_property
    def engine(self):
        from .operators import FiniteEngine

        return FiniteEngine(self.backend, self.omega)

    @cached_property
    def theta(self):
        if self.config.theta_table:
            return theta_from_table(self.backend, self.config.theta_table)
        return theta_from_group_cocycle(self.omega)

    def builder(self, suite: str, **params) -> ReportBuilder:
        return ReportBuilder(suite, self.backend, self.omega.spec, self.tol, self.seed, params)

    def retag(self, rep: VerificationReport, suite: str) -> VerificationReport:
        rep.suite = suite
        rep.cocycle = self.omega.spec
        return rep


# ---------------------------------------------------------------------------
# requirements


def _finite(ctx: Context) -> str | None:
    return None if ctx.backend.finite else "needs a finite backend (dense operator assembly)"


def _any(ctx: Context) -> str | None:
    return None


def _rank_two(ctx: Context) -> str | None:
    return None if ctx.backend.rank == 2 else "needs a product (rank-two) backend"


def _has_cochain(ctx: Context) -> str | None:
    if ctx.omega.kind == "trivial" or cochain_for(ctx.omega) is not None:
        return None
    return "needs a coboundary cocycle (trivial or coboundary:u=...)"


# ---------------------------------------------------------------------------
# pointwise suites (any backend)


def suite_pentagon(ctx: Context) -> VerificationReport:
    rep = check_pentagon(standard_map(ctx.backend), count=ctx.count, seed=ctx.seed, tol=ctx.tol)
    return ctx.retag(rep, "pentagon")


def suite_theta_pentagon(ctx: Context) -> VerificationReport:
    rep = check_theta_pentagonal(ctx.theta, count=ctx.count, seed=ctx.seed, tol=ctx.tol)
    rep = ctx.retag(rep, "theta-pentagon")
    if ctx.config.theta_table:
        rep.params["theta_table"] = ctx.config.theta_table
    return rep


def suite_dual_cocycle(ctx: Context) -> VerificationReport:
    rep = dual_cocycle_check(ctx.omega, count=ctx.count, seed=ctx.seed, tol=ctx.tol)
    return ctx.retag(rep, "dual-cocycle")


def suite_cocycle_equation(ctx: Context) -> VerificationReport:
    rep = check_cocycle_equation(ctx.omega, count=ctx.count, seed=ctx.seed, tol=ctx.tol)
    return ctx.retag(rep, "cocycle-equation")


def suite_matched_pair(ctx: Context) -> VerificationReport:
    rep = check_matched_pair(ctx.backend, count=ctx.count, seed=ctx.seed, tol=ctx.tol)
    return ctx.retag(rep, "matched-pair")


def _q_pairs(ctx: Context, count: int, seed: int):
    b = ctx.backend
    if b.finite:
        return list(itertools.product(b.enumerate("Q"), repeat=2))
    rng = np.random.default_rng(seed)
    return [(b.random_point("Q", rng), b.random_point("Q", rng)) for _ in range(count)]


def continuity_value(u: OneCochain):
    """The value k(0) that a finite-backend reconstruction cannot see: conj u(phi_inv(2 xi0))."""
    b = u.backend
    return u(b.phi_inv(b.xi_add(b.xi0, b.xi0))).conj()


def suite_coboundary_roundtrip(ctx: Context) -> VerificationReport:
    """u -> du -> Theta_du -> trivializer a -> reconstructed u' with du' = du."""
    b = ctx.backend
    u = cochain_for(ctx.omega)
    if u is None:
        u = OneCochain(b, lambda q: b.root_of_unity(0, 1), "1")
    rb = ctx.builder("coboundary-roundtrip", cochain=u.name)
    theta = theta_from_group_cocycle(ctx.omega)
    a = trivializer_from_u(u)
    rb.merge(check_trivialization(theta, a, count=ctx.count, seed=ctx.seed, tol=ctx.tol))
    k0 = continuity_value(u) if b.finite else None
    u2 = reconstruct_u_from_trivializer(a, b, k_at_zero=k0, check_count=ctx.count, seed=ctx.seed, tol=ctx.tol)
    rb.note(k_at_zero="continuity value of u" if b.finite else "limit along eps * xi0")
    for x, y in _q_pairs(ctx, ctx.count or DEFAULT_REAL_SAMPLES, ctx.seed + 1):
        try:
            d1 = u(x) * u(y) * u(b.q_mul(x, y)).conj()
            d2 = u2(x) * u2(y) * u2(b.q_mul(x, y)).conj()
        except DefectPoint:
            rb.skip()
            continue
        rb.check(phase_error(d1, d2), lambda: {"pair": [x, y], "du": d1, "du_reconstructed": d2})
    return rb.finish()


def suite_heisenberg_witness(ctx: Context) -> VerificationReport:
    """The antisymmetric pairing of the Heisenberg cocycle is nonconstant; for coboundaries it is 1."""
    b = ctx.backend
    om_h = ctx.omega if ctx.omega.kind == "heisenberg" else heisenberg_cocycle(b)
    rb = ctx.builder("heisenberg-witness", heisenberg=om_h.spec)
    one = b.root_of_unity(0, 1)
    pairs = _q_pairs(ctx, ctx.count or 1000, ctx.seed)
    pair_h = antisym_pairing(om_h)
    values = []
    for x, y in pairs:
        values.append(pair_h(x, y))
    dist = max((phase_error(v, one) for v in values), default=0.0)
    rb.note(heisenberg_pairing_max_distance_from_1=dist)
    rb.check_true(dist > ctx.tol, lambda: {"claim": "antisymmetric pairing of the Heisenberg cocycle is nonconstant",
                                          "distinct_values": sorted({str(v) for v in values})[:10]})
    for i in range(20):
        u = random_cochain(b, ctx.seed + 1000 + i)
        pair_u = antisym_pairing(_coboundary_of(u))
        for x, y in pairs:
            v = pair_u(x, y)
            rb.check(phase_error(v, one), lambda: {"cochain_seed": ctx.seed + 1000 + i, "pair": [x, y], "value": v})
    return rb.finish()


def _coboundary_of(u):
    from .cocycles import coboundary

    return coboundary(u)


# ---------------------------------------------------------------------------
# operator suites (finite backends)


def suite_quantization_unitarity(ctx: Context) -> VerificationReport:
    E = ctx.engine
    rb = ctx.builder("quantization-unitarity")
    P = E.compatible_projector
    dim = len(E.compatible_fourier_indices)
    rb.check_true(dim == E.Q.dim ** 2, {"compatible_dim": dim, "expected": E.Q.dim ** 2})
    rb.check(E.quantization.unitarity_error(dom_projector=P), {"what": "Op unitary on the compatible subspace"})
    err = np.abs((E.symbol_map @ E.quantization).matrix - P).max()
    rb.check(err, {"what": "kn_symbol o kn_quantize = projector"})
    D = E.duflo_moore().matrix
    rb.check(np.abs(D - np.eye(E.Q.dim)).max(), {"what": "Duflo-Moore operator is the identity"})
    rng = np.random.default_rng(ctx.seed)
    for _ in range(5):
        z1 = rng.normal(size=E.Q.dim) + 1j * rng.normal(size=E.Q.dim)
        z2 = rng.normal(size=E.Q.dim) + 1j * rng.normal(size=E.Q.dim)
        c = orthogonality_constant(E, z1, z2)
        rb.check(abs(c - 1.0), {"what": "orthogonality constant", "c": c})
    rb.skip(E.X.dim - dim)
    rb.note(compatible_dim=dim, orthogonality_constant=1.0)
    return rb.finish()


def orthogonality_constant(E, z1, z2) -> float:
    """sum_G haar |<z1, pi(g) z2>|^2 / (|z1|^2 |D^{1/2} z2|^2)."""
    s = 0.0
    for w, g in zip(E.G.weights, E.G.points):
        s += w * abs(E.Q.inner(z1, E.pi_omega(g).apply(z2))) ** 2
    d = E.duflo_moore().matrix
    return s / (E.Q.norm(z1) ** 2 * E.Q.norm(np.sqrt(np.diag(d).real) * z2) ** 2)


def suite_intertwining(ctx: Context) -> VerificationReport:
    E = ctx.engine
    b = ctx.backend
    rb = ctx.builder("intertwining")
    K = E.quantization
    for g in E.G.points:
        lhs = (K @ E.regular_rep(g)).matrix
        rhs = (E.ad_pi(g) @ K).matrix
        rb.check(np.abs(lhs - rhs).max(), {"g": g, "what": "Op lambda_g = Ad pi(g) Op"})
    for g in E.G.points:
        pg = E.pi_omega(g).matrix
        for h in E.G.points:
            lhs = pg @ E.pi_omega(h).matrix
            rhs = complex(E.omega(g.q, h.q)) * E.pi_omega(b.g_compose(g, h)).matrix
            rb.check(np.abs(lhs - rhs).max(), lambda: {"g": g, "h": h, "what": "projective law"})
    return rb.finish()


def suite_star_associativity(ctx: Context) -> VerificationReport:
    E = ctx.engine
    rb = ctx.builder("star-associativity")
    rng = np.random.default_rng(ctx.seed)
    n = ctx.config.samples or 100
    for i in range(n):
        f1, f2, f3 = E.random_compatible(rng, 3).T
        lhs = E.star_product(E.star_product(f1, f2), f3)
        rhs = E.star_product(f1, E.star_product(f2, f3))
        rb.check(np.abs(lhs - rhs).max(), lambda: {"triple": i, "what": "associativity"})
    basis = E.compatible_basis.T
    for i, f1 in enumerate(basis):
        k1 = E.kn_quantize(f1)
        for j, f2 in enumerate(basis):
            s = E.star_product(f1, f2)
            rb.check(np.abs(E.kn_quantize(s) - k1 @ E.kn_quantize(f2)).max(),
                     lambda: {"basis_pair": [i, j], "what": "Op(f1 * f2) = Op(f1) Op(f2)"})
            rb.check(np.abs(s - E.star_via_quantization(f1, f2)).max(),
                     lambda: {"basis_pair": [i, j], "what": "Fourier formula vs quantization"})
    rb.note(skipped_defect_terms=int(E._star_terms[4]))
    return rb.finish()


def suite_adjoint_law(ctx: Context) -> VerificationReport:
    E = ctx.engine
    rb = ctx.builder("adjoint-law")
    for i in range(E.G.dim):
        f = E.G.basis(i)
        lhs = E.kn_quantize(f).conj().T
        rhs = E.kn_quantize(E.U.apply(E.J.apply(f)))
        rb.check(np.abs(lhs - rhs).max(), lambda: {"basis_index": i, "g": E.G.points[i]})
    for name, op in (("V_omega", E.V), ("U_omega", E.U), ("T", E.T)):
        rb.check(op.unitarity_error(), {"what": f"{name} unitary"})
    rb.check(np.abs(E.T.matrix - np.eye(E.G.dim)).max(), {"what": "T is the identity on a finite backend"})
    return rb.finish()


def suite_omega_factorization(ctx: Context) -> VerificationReport:
    E = ctx.engine
    b = ctx.backend
    rb = ctx.builder("omega-factorization")
    om = E.omega_cocycle
    dense = om.to_operator()
    rb.check_true(om.is_bijective(), {"what": "Omega_omega is a weighted bijection"})
    rb.check(dense.unitarity_error(), {"what": "Omega_omega unitary"})
    fact = E.omega_trivial.then_diagonal(E.omega_phase_factor)
    exact = om.exact_equal(fact)
    if exact is not None:
        rb.check_true(exact, {"what": "Omega_omega = U Omega (exact exponents)"})
    rb.check(dense.distance(E.omega_phase_factor.to_operator() @ E.omega_trivial.to_operator()),
             {"what": "Omega_omega = U Omega (dense)"})
    eye = np.eye(E.X2.dim)
    rb.check(np.abs(om.apply(eye) - dense.matrix).max(), {"what": "structured and dense forms agree"})
    slice_rows = [i for i, (x, _) in enumerate(E.X2.points) if not b.x_is_regular(x)]
    err = np.abs(dense.matrix[slice_rows] - eye[slice_rows]).max(initial=0.0)
    rb.check(err, {"what": "identity on the defect slice"})
    rb.skip(len(slice_rows))
    rb.note(exact=exact is not None, defect_slice_rows=len(slice_rows))
    return rb.finish()


def suite_galois_assembly(ctx: Context) -> VerificationReport:
    E = ctx.engine
    rb = ctx.builder("galois-assembly")
    A = E.galois_assembly.matrix
    O = E.omega_cocycle.to_operator().matrix
    rows = E.rows_both_regular
    for r in rows:
        rb.check(np.abs(A[r] - O[r]).max(), lambda: {"row": E.X2.points[r]})
    rb.skip(E.X2.dim - len(rows))
    gal = E.to_fourier(E.galois_definition).matrix
    gf = E.galois_formula
    rb.check(np.abs(gal - gf.to_operator().matrix).max(), {"what": "closed form vs definition"})
    M = gf.to_operator().matrix
    r, c = gf.defined_rows, np.flatnonzero(np.abs(M).sum(axis=0) > 0)
    sub = M[np.ix_(r, c)]
    err = max(np.abs(sub.conj().T @ sub - np.eye(len(c))).max(initial=0.0),
              np.abs(sub @ sub.conj().T - np.eye(len(r))).max(initial=0.0))
    rb.check(err, {"what": "Galois map unitary off the defect"})
    rb.note(compared_rows=len(rows), galois_regular_rows=len(r))
    return rb.finish()


def suite_mu_cross_check(ctx: Context) -> VerificationReport:
    E = ctx.engine
    rb = ctx.builder("mu-cross-check", tolerance_3leg=ctx.tol3)
    tw = E.theta_twist()
    W1 = tw.to_operator()
    W2 = E.dmu
    rows = E.rows_theta_regular
    for r in rows:
        rb.check(np.abs(W1.matrix[r] - W2.matrix[r]).max(), lambda: {"row": E.X2.points[r]})
    rb.skip(E.X2.dim - len(rows))
    rb.check(W1.unitarity_error(), {"what": "theta_twist unitary"})
    rb.check(W2.unitarity_error(), {"what": "dmu unitary"})
    mask = E.regular_triple_mask
    nvec = ctx.config.samples or 100
    rng_seed = ctx.seed
    for k in range(nvec):
        err = E.pentagon_3leg_error(tw, vectors=1, seed=rng_seed + k, mask=mask)
        rb.check(err, lambda: {"vector_seed": rng_seed + k, "what": "pentagon for the twisted unitary"}, tol=ctx.tol3)
    for k in range(min(nvec, 10)):
        err = E.pentagon_3leg_error(E.w_hat, vectors=1, seed=rng_seed + k)
        rb.check(err, lambda: {"vector_seed": rng_seed + k, "what": "pentagon for W^"}, tol=ctx.tol3)
    rb.note(compared_rows=len(rows), regular_triples=int(mask.sum()))
    return rb.finish()


def suite_esp_pairing(ctx: Context) -> VerificationReport:
    E = ctx.engine
    rb = ctx.builder("esp-pairing")
    rng = np.random.default_rng(ctx.seed)
    omega_star = E.to_position(E.omega_cocycle.to_operator()).adjoint()
    P = E.regular_first_leg_projector
    n = E.G.dim
    for trial in range(ctx.config.samples or 5):
        z = [rng.normal(size=n) + 1j * rng.normal(size=n) for _ in range(4)]
        z[1] = P @ z[1]
        z[3] = P @ z[3]
        f1, f2 = E.convolution(z[0], z[1]), E.convolution(z[2], z[3])
        star = E.star_product(f1, f2)
        for i, g in enumerate(E.G.points):
            val = E.slice_pair((z[0], z[1]), (z[2], z[3]), omega_star, g)
            rb.check(abs(val - star[i]), lambda: {"trial": trial, "g": g, "slice": val, "star": star[i]})
        for i, h in enumerate(E.G.points):
            val = E.G.inner(np.conj(z[0]), E.regular_rep(h).apply(z[1]))
            rb.check(abs(val - f1[i]), lambda: {"trial": trial, "h": h, "what": "f(lambda_h) = f(h)"})
    rb.note(second_vectors="projected off the defect frequencies")
    return rb.finish()


def suite_integral_rep(ctx: Context) -> VerificationReport:
    E = ctx.engine
    rb = ctx.builder("integral-rep")
    IR, skipped_terms = E.integral_rep_omega()
    A = E.to_fourier(IR).matrix
    O = E.omega_cocycle.to_operator().matrix
    rows = E.rows_first_regular
    for r in rows:
        rb.check(np.abs(A[r] - O[r]).max(), lambda: {"row": E.X2.points[r]})
    rb.skip(E.X2.dim - len(rows))
    rb.note(skipped_integrand_terms=skipped_terms)
    return rb.finish()


@dataclass(frozen=True)
class Suite:
    name: str
    run: Callable[[Context], VerificationReport]
    requires: tuple = (_any,)
    description: str = ""

    def incompatibility(self, ctx: Context) -> str | None:
        for req in self.requires:
            reason = req(ctx)
            if reason:
                return reason
        return None


SUITES: dict[str, Suite] = {s.name: s for s in [
    Suite("pentagon", suite_pentagon, description="point-level pentagon for w"),
    Suite("theta-pentagon", suite_theta_pentagon, description="scalar cocycle identity for Theta_omega"),
    Suite("dual-cocycle", suite_dual_cocycle, description="Theta' = Theta'' for the orbit pullback of omega"),
    Suite("quantization-unitarity", suite_quantization_unitarity, (_finite,),
          "Op_omega unitary on the compatible subspace; Duflo-Moore data"),
    Suite("intertwining", suite_intertwining, (_finite,), "Op_omega intertwines lambda and Ad pi_omega"),
    Suite("star-associativity", suite_star_associativity, (_finite,), "star product associative and multiplicative"),
    Suite("adjoint-law", suite_adjoint_law, (_finite,), "Op(f)^* = Op(U_omega J f)"),
    Suite("omega-factorization", suite_omega_factorization, (_finite,), "Omega_omega unitary and = U Omega"),
    Suite("galois-assembly", suite_galois_assembly, (_finite,), "Galois-map assembly equals Omega_omega"),
    Suite("mu-cross-check", suite_mu_cross_check, (_finite,),
          "two constructions of the multiplicative unitary agree; 3-leg pentagon"),
    Suite("esp-pairing", suite_esp_pairing, (_finite,), "slice pairing against Omega_omega^* gives the star product"),
    Suite("integral-rep", suite_integral_rep, (_finite,), "finite-sum integral formula equals Omega_omega"),
    Suite("coboundary-roundtrip", suite_coboundary_roundtrip, (_has_cochain,),
          "u -> du -> Theta -> trivializer -> u' with du' = du"),
    Suite("heisenberg-witness", suite_heisenberg_witness, (_rank_two,),
          "antisymmetric pairing separates the Heisenberg class from coboundaries"),
    Suite("cocycle-equation", suite_cocycle_equation, description="group 2-cocycle equation and normalization"),
    Suite("matched-pair", suite_matched_pair, description="matched-pair factorization and its pentagon"),
]}


def resolve_suites(config: SuiteConfig, ctx: Context) -> list[str]:
    """Expand ``all`` to the compatible suites; reject unknown or incompatible explicit names."""
    names = []
    for raw in config.suites:
        for name in str(raw).split(","):
            name = name.strip()
            if name:
                names.append(name)
    if not names:
        raise SuiteConfigError("no suites selected")
    unknown = [n for n in names if n != "all" and n not in SUITES]
    if unknown:
        raise SuiteConfigError(f"unknown suite(s): {', '.join(unknown)}; known: {', '.join(sorted(SUITES))}")
    chosen = set()
    for n in names:
        if n == "all":
            chosen.update(s for s in SUITES if SUITES[s].incompatibility(ctx) is None)
        else:
            reason = SUITES[n].incompatibility(ctx)
            if reason:
                raise SuiteConfigError(f"suite {n!r} is not available for {ctx.backend.id} / {ctx.omega.spec}: {reason}")
            chosen.add(n)
    if config.theta_table and "theta-pentagon" not in chosen:
        raise SuiteConfigError("--theta only affects the theta-pentagon suite; select it")
    return sorted(chosen)


def _run_one(config: SuiteConfig, name: str) -> VerificationReport:
    ctx = Context(config)
    return _finish(SUITES[name].run(ctx), config)


def _finish(rep: VerificationReport, config: SuiteConfig) -> VerificationReport:
    if not config.timing:
        rep.elapsed_ms = 0.0
    return rep


def run_suites(config: SuiteConfig, jobs: int = 1) -> list[VerificationReport]:
    """Run the selected suites; reports come back sorted by suite name."""
    try:
        ctx = Context(config)
    except ValueError as exc:
        raise SuiteConfigError(str(exc)) from exc
    names = resolve_suites(config, ctx)
    if jobs > 1 and len(names) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            reports = list(pool.map(_run_one, [config] * len(names), names))
    else:
        reports = [_finish(SUITES[n].run(ctx), config) for n in names]
    return sorted(reports, key=lambda r: r.suite)
