"""One test per acceptance criterion, each at its stated tolerance."""

from __future__ import annotations

import itertools
import json
import subprocess
import sys
import time

from qpenta.cocycles import antisym_pairing, coboundary, heisenberg_cocycle, make_cocycle, random_cochain
from qpenta.groups import FiniteAffine, FiniteProductAffine, RealAffine, RealProductAffine
from qpenta.operators import FiniteEngine
from qpenta.pentagon import (check_matched_pair, check_pentagon, check_theta_pentagonal, dual_cocycle_check,
                             standard_map, theta_from_group_cocycle)
from qpenta.suites import (Context, SuiteConfig, suite_adjoint_law, suite_coboundary_roundtrip, suite_esp_pairing,
                           suite_galois_assembly, suite_integral_rep, suite_intertwining, suite_mu_cross_check,
                           suite_omega_factorization, suite_quantization_unitarity, suite_star_associativity)

TOL = 1e-12
TOL3 = 1e-10


def _ctx(backend: str, cocycle: str, **kw) -> Context:
    return Context(SuiteConfig(backend, cocycle, tol=kw.pop("tol", TOL), **kw))


def _fmt(*reports) -> str:
    return "; ".join(f"{r.suite}[{r.backend},{r.cocycle or '-'}] checked={r.n_checked} "
                     f"skipped={r.n_skipped_defect} failed={r.n_failed} max={r.max_error:.2g}" for r in reports)


def test_criterion_01_pentagon_for_w(criterion):
    t0 = time.perf_counter()
    reps = [check_pentagon(standard_map(FiniteAffine(p, phase_mode="exact")), tol=TOL) for p in (5, 7)]
    elapsed = time.perf_counter() - t0
    ok = all(r.passed for r in reps) and elapsed < 30.0
    assert criterion(1, ok, f"{_fmt(*reps)}; {elapsed:.1f}s"), reps


def test_criterion_02_theta_pentagonal_cocycle(criterion):
    f5 = FiniteAffine(5, phase_mode="exact")
    fp3 = FiniteProductAffine(3, phase_mode="exact")
    reps = [
        check_theta_pentagonal(theta_from_group_cocycle(make_cocycle("coboundary:u=dlogsq", f5)), tol=TOL),
        check_theta_pentagonal(theta_from_group_cocycle(heisenberg_cocycle(fp3)), tol=TOL),
        check_theta_pentagonal(theta_from_group_cocycle(make_cocycle("coboundary:u=dlogsq", RealAffine())),
                               count=100_000, seed=0, tol=1e-9),
        check_theta_pentagonal(theta_from_group_cocycle(heisenberg_cocycle(RealProductAffine())),
                               count=100_000, seed=0, tol=1e-9),
    ]
    ok = all(r.passed for r in reps) and all(r.n_checked + r.n_skipped_defect == 100_000 for r in reps[2:])
    assert criterion(2, ok, _fmt(*reps)), [r.failures[:1] for r in reps]


def test_criterion_03_dual_cocycle_identity(criterion):
    f5 = FiniteAffine(5, phase_mode="exact")
    fp3 = FiniteProductAffine(3, phase_mode="exact")
    reps = [dual_cocycle_check(make_cocycle(s, f5), tol=TOL) for s in ("trivial", "coboundary:u=dlogsq")]
    reps.append(dual_cocycle_check(heisenberg_cocycle(fp3), tol=TOL))
    ok = all(r.passed and r.n_checked > 0 for r in reps)
    assert criterion(3, ok, _fmt(*reps)), reps


def test_criterion_04_omega_unitary_and_factorized(criterion):
    rep = suite_omega_factorization(_ctx("finite-affine:p=5", "coboundary:u=dlogsq"))
    exact = suite_omega_factorization(_ctx("finite-affine:p=5:mode=exact", "coboundary:u=dlogsq"))
    E = FiniteEngine(FiniteAffine(5), make_cocycle("coboundary:u=dlogsq", FiniteAffine(5)))
    M = E.omega_cocycle.to_operator()
    UO = E.omega_phase_factor.to_operator() @ E.omega_trivial.to_operator()
    err = max(M.unitarity_error(), M.distance(UO))
    ok = rep.passed and exact.passed and exact.params.get("exact") and M.matrix.shape == (400, 400) and err <= TOL
    assert criterion(4, ok, f"{_fmt(rep, exact)}; dense 400x400 err={err:.2g}"), rep.failures


def test_criterion_05_quantization(criterion):
    ctx = _ctx("finite-affine:p=5", "coboundary:u=dlogsq")
    reps = [suite_quantization_unitarity(ctx), suite_intertwining(ctx)]
    dim = reps[0].params["compatible_dim"]
    ok = all(r.passed for r in reps) and dim == (5 - 1) ** 2 and len(ctx.engine.G.points) == 20
    assert criterion(5, ok, f"{_fmt(*reps)}; compatible dim={dim}"), reps


def test_criterion_06_star_algebra(criterion):
    rep = suite_star_associativity(_ctx("finite-affine:p=5", "coboundary:u=dlogsq", samples=100))
    ok = rep.passed and rep.n_checked == 100 + 2 * 16 * 16
    assert criterion(6, ok, _fmt(rep)), rep.failures


def test_criterion_07_adjoint_law(criterion):
    rep = suite_adjoint_law(_ctx("finite-affine:p=5", "coboundary:u=dlogsq"))
    ok = rep.passed and rep.n_checked >= 20
    assert criterion(7, ok, _fmt(rep)), rep.failures


def test_criterion_08_galois_assembly(criterion):
    reps = [suite_galois_assembly(_ctx("finite-affine:p=5", s)) for s in ("trivial", "coboundary:u=dlogsq")]
    ok = all(r.passed for r in reps)
    assert criterion(8, ok, _fmt(*reps) + " (rows with xi1, xi2 off the defect)"), [r.failures for r in reps]


def test_criterion_09_multiplicative_unitary_constructions_agree(criterion):
    rep = suite_mu_cross_check(_ctx("finite-affine:p=5", "coboundary:u=dlogsq", samples=100, tol3=TOL3))
    ok = rep.passed and rep.params["tolerance_3leg"] == TOL3
    assert criterion(9, ok, _fmt(rep) + f"; regular triples={rep.params['regular_triples']}"), rep.failures


def test_criterion_10_coboundary_round_trip(criterion):
    reps = [suite_coboundary_roundtrip(_ctx("finite-affine:p=5:mode=exact", "coboundary:u=dlogsq")),
            suite_coboundary_roundtrip(_ctx("finite-affine:p=5", "coboundary:u=random:seed=11")),
            suite_coboundary_roundtrip(_ctx("real-affine", "coboundary:u=dlogsq", tol=1e-9, samples=5000)),
            suite_coboundary_roundtrip(_ctx("real-affine", "coboundary:u=random:seed=3", tol=1e-9, samples=5000))]
    ok = all(r.passed for r in reps)
    assert criterion(10, ok, _fmt(*reps)), [r.failures[:1] for r in reps]


def test_criterion_11_nontriviality_witness(criterion):
    b = FiniteProductAffine(3, phase_mode="exact")
    pairs = list(itertools.product(b.enumerate("Q"), repeat=2))
    pair_h = antisym_pairing(heisenberg_cocycle(b))
    h_values = {pair_h(x, y) for x, y in pairs}
    nonconstant = len(h_values) > 1
    coboundaries_trivial = all(antisym_pairing(coboundary(random_cochain(b, seed)))(x, y).is_one()
                               for seed in range(20) for x, y in pairs)
    ok = nonconstant and coboundaries_trivial
    criterion(11, ok, f"Heisenberg pairing values={sorted(map(str, h_values))} (nonconstant={nonconstant}); "
                      f"20 coboundary pairings trivial={coboundaries_trivial}")
    assert nonconstant, "antisymmetric pairing of the Heisenberg cocycle is constant at p=3"
    assert coboundaries_trivial


def test_criterion_12_esp_and_integral_representation(criterion):
    ctx = _ctx("finite-affine:p=5", "coboundary:u=dlogsq")
    reps = [suite_esp_pairing(ctx), suite_integral_rep(ctx)]
    ok = all(r.passed for r in reps)
    assert criterion(12, ok, _fmt(*reps)), [r.failures[:1] for r in reps]


def test_criterion_13_matched_pair_pentagon(criterion):
    rep = check_matched_pair(FiniteAffine(5, phase_mode="exact"), tol=TOL)
    ok = rep.passed and rep.params["pentagon_checked"] > 0
    assert criterion(13, ok, _fmt(rep)), rep.failures


def test_criterion_14_full_cli_run(criterion, tmp_path):
    lines = []
    ok = True
    t0 = time.perf_counter()
    for cocycle in ("trivial", "coboundary:u=dlogsq"):
        out = tmp_path / f"{cocycle.replace(':', '_')}.json"
        proc = subprocess.run([sys.executable, "-m", "qpenta.cli", "verify", "--backend", "finite-affine:p=5",
                               "--cocycle", cocycle, "--suites", "all", "--report", str(out)],
                              capture_output=True, text=True, timeout=300)
        data = json.loads(out.read_text())
        ok &= proc.returncode == 0 and len(data) == 15
        lines.append(f"{cocycle}: exit={proc.returncode} suites={len(data)}")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 300
    assert criterion(14, ok, "; ".join(lines) + f"; {elapsed:.1f}s"), lines
