"""Finite-dimensional realization of the operators on L^2(G) and L^2(Q x V^).

Conventions for a finite backend with V = F_p^n:

* ``G``: functions on G = Q x| V with weight p^{-n} per point (counting
  measure on Q, normalized Haar measure on V, |q| = 1);
* ``X``: functions on Q x V^ with counting measure;
* ``Q``: functions on Q (the representation space), counting measure;
* ``HS``: kernels on Q x Q, counting measure on both legs.

The partial Fourier transform is
``(F f)(q, xi) = p^{-n} sum_v exp(-2 pi i <xi, v>/p) f(q, v)`` and is unitary
from ``G`` to ``X`` with these weights.

Formulas that apply phi^{-1} to a defect point either leave the row empty
(partial operators, reported as such) or, where unitarity of the whole
matrix is wanted, are completed by a canonical bijection of the leftover
points (see :func:`qpenta.linalg.canonical_completion`).  All comparisons
with other constructions are made on rows where the defining formulas are
regular.
"""

from __future__ import annotations

import math
from functools import cached_property

import numpy as np

from .cocycles import TwoCocycle, trivial_cocycle
from .groups import DefectPoint, GElement, XPoint, _FiniteBackend
from .linalg import OperatorMatrix, Space, WeightedComposition, diagonal, identity, pentagon_sides_3leg
from .pentagon import (ThetaCocycle, as_map, operator_regular_triple, theta_from_group_cocycle, w_apply,
                       w_weight)


class FiniteEngine:
    """All operators for one finite backend and one group 2-cocycle."""

    def __init__(self, backend: _FiniteBackend, omega: TwoCocycle | None = None):
        if not backend.finite:
            raise TypeError("operator assembly needs a finite backend")
        self.backend = b = backend
        self.omega = omega if omega is not None else trivial_cocycle(backend)
        b.require_same(self.omega.backend)
        self.p = b.p
        self.G = Space("G", b.enumerate("G"), b.haar_weight("G"))
        self.X = Space("X", b.enumerate("X"), b.haar_weight("X"))
        self.Q = Space("Q", b.enumerate("Q"), b.haar_weight("Q"))
        self.HS = Space("HS", [(a, c) for a in self.Q.points for c in self.Q.points], b.haar_weight("HS"))
        self._order = b.phase_order if b.phase_mode == "exact" else None

    # -- spaces -------------------------------------------------------------
    @cached_property
    def G2(self) -> Space:
        return self.G.tensor(self.G)

    @cached_property
    def X2(self) -> Space:
        return self.X.tensor(self.X)

    def _structured(self, space, rule, complete=False, name=""):
        return WeightedComposition.from_rule(space, rule, complete=complete, order=self._order, name=name)

    # -- partial Fourier transform -------------------------------------------
    @cached_property
    def fourier(self) -> OperatorMatrix:
        bk = self.backend
        m = np.zeros((self.X.dim, self.G.dim), dtype=complex)
        scale = float(self.p) ** (-bk.rank)
        gi = self.G.index
        for i, (q, xi) in enumerate(self.X.points):
            for v in bk.enumerate("V"):
                k = bk.pairing_exponent(xi, v)
                m[i, gi[GElement(q, v)]] = scale * np.exp(-2j * np.pi * k / self.p)
        return OperatorMatrix(self.G, self.X, m)

    @cached_property
    def fourier_inv(self) -> OperatorMatrix:
        return self.fourier.adjoint()

    def partial_fourier(self, f, direction: str = "forward"):
        if direction == "forward":
            return self.fourier.apply(f)
        if direction == "inverse":
            return self.fourier_inv.apply(f)
        raise ValueError("direction is 'forward' or 'inverse'")

    @cached_property
    def fourier2(self) -> OperatorMatrix:
        return self.fourier.kron(self.fourier)

    @cached_property
    def fourier2_inv(self) -> OperatorMatrix:
        return self.fourier_inv.kron(self.fourier_inv)

    def to_fourier(self, op: OperatorMatrix) -> OperatorMatrix:
        if op.dom == self.G:
            return self.fourier @ op @ self.fourier_inv
        return self.fourier2 @ op @ self.fourier2_inv

    def to_position(self, op: OperatorMatrix) -> OperatorMatrix:
        if op.dom == self.X:
            return self.fourier_inv @ op @ self.fourier
        return self.fourier2_inv @ op @ self.fourier2

    def exact_fourier(self):
        """The partial Fourier matrix over Q(zeta_p), for exact identities."""
        from fractions import Fraction

        from .phases import Cyclotomic

        bk = self.backend
        scale = Fraction(1, self.p ** bk.rank)
        gi = self.G.index
        rows = []
        for q, xi in self.X.points:
            row = [Cyclotomic.zero(self.p) for _ in range(self.G.dim)]
            for v in bk.enumerate("V"):
                row[gi[GElement(q, v)]] = Cyclotomic.root(self.p, -bk.pairing_exponent(xi, v)) * scale
            rows.append(row)
        return rows

    # -- group actions ---------------------------------------------------------
    def regular_rep(self, g: GElement, side: str = "left") -> OperatorMatrix:
        """(lambda_g f)(h) = f(g^{-1} h); (rho_g f)(h) = Delta_G(g)^{1/2} f(h g)."""
        bk = self.backend
        m = np.zeros((self.G.dim, self.G.dim), dtype=complex)
        if side == "left":
            gi = bk.g_inverse(g)
            for i, h in enumerate(self.G.points):
                m[i, self.G.index[bk.g_compose(gi, h)]] = 1.0
        elif side == "right":
            c = math.sqrt(bk.delta_g(g))
            for i, h in enumerate(self.G.points):
                m[i, self.G.index[bk.g_compose(h, g)]] = c
        else:
            raise ValueError("side is 'left' or 'right'")
        return OperatorMatrix(self.G, self.G, m)

    def pi_omega(self, g: GElement) -> OperatorMatrix:
        """pi(q, v) zeta(s) = |q|^{1/2} conj<phi(s), v> omega(q, q^{-1} s) zeta(q^{-1} s)."""
        bk, om = self.backend, self.omega
        q, v = g
        qi = bk.q_inv(q)
        m = np.zeros((self.Q.dim, self.Q.dim), dtype=complex)
        c = math.sqrt(bk.modulus(q))
        for i, s in enumerate(self.Q.points):
            t = bk.q_mul(qi, s)
            ph = bk.pairing(bk.phi(s), v).conj() * om(q, t)
            m[i, self.Q.index[t]] = c * complex(ph)
        return OperatorMatrix(self.Q, self.Q, m)

    def ad_pi(self, g: GElement) -> OperatorMatrix:
        """K -> pi(g) K pi(g)^* on kernels (row-major vectorization)."""
        pi = self.pi_omega(g).matrix
        return OperatorMatrix(self.HS, self.HS, np.kron(pi, pi.conj()))

    def duflo_moore(self) -> OperatorMatrix:
        """Multiplication by Delta_G(q, 0)^{-1} on Q (the identity on finite backends)."""
        bk = self.backend
        return diagonal(self.Q, [1.0 / bk.delta_g(GElement(q, bk.v_zero)) for q in self.Q.points])

    # -- quantization ---------------------------------------------------------
    def _hs_source(self, q0, q):
        """Fourier point feeding the kernel entry (q0, q) and its phase conj omega(q0, q0^{-1} q)."""
        bk = self.backend
        x = XPoint(q0, bk.xi_sub(bk.phi(q0), bk.phi(q)))
        return x, self.omega(q0, bk.q_mul(bk.q_inv(q0), q)).conj()

    @cached_property
    def quantization(self) -> OperatorMatrix:
        """f -> K_omega(f) as a map from G to HS kernels."""
        sel = np.zeros((self.HS.dim, self.X.dim), dtype=complex)
        for i, (q0, q) in enumerate(self.HS.points):
            x, ph = self._hs_source(q0, q)
            sel[i, self.X.index[x]] = complex(ph)
        return OperatorMatrix(self.X, self.HS, sel) @ self.fourier

    @cached_property
    def symbol_map(self) -> OperatorMatrix:
        return self.quantization.adjoint()

    def kn_quantize(self, f) -> np.ndarray:
        k = self.quantization.apply(np.asarray(f))
        return k.reshape(self.Q.dim, self.Q.dim)

    def kn_symbol(self, kernel) -> np.ndarray:
        return self.symbol_map.apply(np.asarray(kernel).reshape(-1))

    @cached_property
    def compatible_fourier_indices(self) -> np.ndarray:
        """Fourier points (q0, phi(q0) - phi(q)) reached by the quantization."""
        bk = self.backend
        idx = {self.X.index[XPoint(q0, bk.xi_sub(bk.phi(q0), bk.phi(q)))] for q0, q in self.HS.points}
        return np.array(sorted(idx))

    @cached_property
    def compatible_projector(self) -> np.ndarray:
        d = np.zeros(self.X.dim)
        d[self.compatible_fourier_indices] = 1.0
        return (self.fourier_inv @ diagonal(self.X, d) @ self.fourier).matrix

    @cached_property
    def compatible_basis(self) -> np.ndarray:
        """Columns: position-space vectors whose Fourier transforms are deltas at compatible points."""
        return self.fourier_inv.matrix[:, self.compatible_fourier_indices]

    def random_compatible(self, rng, count: int = 1) -> np.ndarray:
        k = len(self.compatible_fourier_indices)
        c = rng.normal(size=(k, count)) + 1j * rng.normal(size=(k, count))
        return self.compatible_basis @ c

    # -- auxiliary operators ----------------------------------------------------
    def _rxi(self, q, xi):
        """phi^{-1}(xi0 - act(q^{-1}, xi))."""
        bk = self.backend
        return bk.phi_inv(bk.xi_sub(bk.xi0, bk.dual_act(bk.q_inv(q), xi)))

    @cached_property
    def V_fourier(self) -> WeightedComposition:
        """F V_omega F^*: multiplication by conj omega(q, phi^{-1}(xi0 - act(q^{-1}, xi))); 1 on the defect."""
        one = self.backend.root_of_unity(0, 1)

        def rule(x):
            q, xi = x
            try:
                return x, self.omega(q, self._rxi(q, xi)).conj(), 1.0
            except DefectPoint:
                return x, one, 1.0

        return self._structured(self.X, rule, name="V")

    @cached_property
    def U_fourier(self) -> WeightedComposition:
        """F U_omega F^*: f -> omega(r, r^{-1}) f(q r, xi) with r = phi^{-1}(xi0 - act(q^{-1}, xi)).

        Rows with a defect r are completed canonically.
        """
        bk = self.backend

        def rule(x):
            q, xi = x
            r = self._rxi(q, xi)
            return XPoint(bk.q_mul(q, r), xi), self.omega(r, bk.q_inv(r)), 1.0

        return self._structured(self.X, rule, complete=True, name="U")

    def T_multiplier(self, x: XPoint) -> float:
        """(Delta_Q / |.|)^{1/2} at phi^{-1}(xi0 - act(q^{-1}, xi)); 1 on the defect."""
        bk = self.backend
        try:
            r = self._rxi(*x)
        except DefectPoint:
            return 1.0
        return math.sqrt(bk.delta_q(r) / bk.modulus(r))

    @cached_property
    def T(self) -> OperatorMatrix:
        d = diagonal(self.X, [self.T_multiplier(x) for x in self.X.points])
        return self.to_position(d)

    @cached_property
    def V(self) -> OperatorMatrix:
        return self.to_position(self.V_fourier.to_operator())

    @cached_property
    def U(self) -> OperatorMatrix:
        return self.to_position(self.U_fourier.to_operator())

    @cached_property
    def J(self) -> OperatorMatrix:
        """J f = conj f (antilinear)."""
        return OperatorMatrix(self.G, self.G, np.eye(self.G.dim, dtype=complex), antilinear=True)

    @cached_property
    def Jhat(self) -> OperatorMatrix:
        """(Jhat f)(g) = Delta_G(g)^{-1/2} conj f(g^{-1}) (antilinear)."""
        bk = self.backend
        m = np.zeros((self.G.dim, self.G.dim), dtype=complex)
        for i, g in enumerate(self.G.points):
            m[i, self.G.index[bk.g_inverse(g)]] = bk.delta_g(g) ** -0.5
        return OperatorMatrix(self.G, self.G, m, antilinear=True)

    @cached_property
    def calJ(self) -> OperatorMatrix:
        """The linear operator Jhat J."""
        return self.Jhat @ self.J

    @cached_property
    def J_tilde(self) -> OperatorMatrix:
        """calJ U_omega calJ J (antilinear)."""
        return self.calJ @ self.U @ self.calJ @ self.J

    def auxiliary_unitary(self, tag: str, f):
        ops = {"V_omega": self.V, "U_omega": self.U, "T": self.T, "J": self.J, "Jhat": self.Jhat,
               "script_J": self.calJ}
        if tag not in ops:
            raise ValueError(f"unknown operator {tag!r}; choose from {sorted(ops)}")
        return ops[tag].apply(f)

    # Fourier-picture closed forms, used as checks of the position-space constructions
    def closed_form(self, tag: str) -> WeightedComposition:
        bk = self.backend
        inv, act, neg = bk.q_inv, bk.dual_act, bk.xi_neg
        one = bk.root_of_unity(0, 1)
        if tag == "J":
            rule = lambda x: (XPoint(x.q, neg(x.xi)), one, 1.0)
        elif tag == "Jhat":
            rule = lambda x: (XPoint(inv(x.q), act(inv(x.q), x.xi)), one, 1.0)
        elif tag == "script_J":
            def rule(x):
                c = bk.modulus(x.q) * bk.delta_g(GElement(x.q, bk.v_zero)) ** -0.5
                return XPoint(inv(x.q), neg(act(inv(x.q), x.xi))), one, c
        else:
            raise ValueError(tag)
        return self._structured(self.X, rule, name=tag)

    # -- star products ----------------------------------------------------------
    @cached_property
    def _star_terms(self):
        """Sparse bilinear form for the Fourier-picture star product."""
        bk = self.backend
        out, i1, i2, coef = [], [], [], []
        skipped = 0
        xi_all = bk.enumerate("Vhat")
        for k, (q, xi) in enumerate(self.X.points):
            try:
                B = self._rxi(q, xi)
            except DefectPoint:
                skipped += len(xi_all)
                continue
            for xp in xi_all:
                try:
                    A = self._rxi(q, xp)
                except DefectPoint:
                    skipped += 1
                    continue
                ph = self.omega(A, bk.q_mul(bk.q_inv(A), B)).conj()
                out.append(k)
                i1.append(self.X.index[XPoint(q, xp)])
                i2.append(self.X.index[XPoint(bk.q_mul(q, A), bk.xi_sub(xi, xp))])
                coef.append(complex(ph) * bk.haar_weight("Vhat"))
        return np.array(out), np.array(i1), np.array(i2), np.array(coef), skipped

    def star_product(self, f1, f2) -> np.ndarray:
        """Star product from its Fourier-picture convolution formula (defect terms skipped)."""
        out, i1, i2, coef, _ = self._star_terms
        F1 = self.fourier.apply(f1)
        F2 = self.fourier.apply(f2)
        vals = coef * F1[i1] * F2[i2]
        res = np.zeros(self.X.dim, dtype=complex)
        np.add.at(res, out, vals)
        return self.fourier_inv.apply(res)

    def star_via_quantization(self, f1, f2) -> np.ndarray:
        return self.kn_symbol(self.kn_quantize(f1) @ self.kn_quantize(f2))

    # -- dual 2-cocycles -----------------------------------------------------------
    def _omega_rule(self, omega: TwoCocycle | None):
        bk = self.backend
        one = bk.root_of_unity(0, 1)

        def rule(pt):
            (q1, xi1), (q2, xi2) = pt
            try:
                r = bk.phi_inv(bk.xi_add(bk.xi0, xi1))
            except DefectPoint:
                return pt, one, 1.0
            if omega is None:
                ph = one
            else:
                try:
                    ph = omega(r, bk.phi_inv(bk.xi_add(bk.xi0, xi2)))
                except DefectPoint:
                    ph = one
            src = (XPoint(q1, xi1), XPoint(bk.q_mul(r, q2), bk.dual_act(r, xi2)))
            return src, ph, 1.0 / bk.modulus(r)

        return rule

    @cached_property
    def omega_cocycle(self) -> WeightedComposition:
        """Fourier-picture Omega_omega on X (x) X (identity on the slice xi1 = -xi0)."""
        return self._structured(self.X2, self._omega_rule(self.omega), name="Omega_omega")

    @cached_property
    def omega_trivial(self) -> WeightedComposition:
        return self._structured(self.X2, self._omega_rule(None), name="Omega")

    @cached_property
    def omega_phase_factor(self) -> WeightedComposition:
        """Diagonal U with Omega_omega = U Omega: omega(phi^{-1}(xi0 + xi1), phi^{-1}(xi0 + xi2))."""
        bk = self.backend
        one = bk.root_of_unity(0, 1)

        def rule(pt):
            (_, xi1), (_, xi2) = pt
            try:
                ph = self.omega(bk.phi_inv(bk.xi_add(bk.xi0, xi1)), bk.phi_inv(bk.xi_add(bk.xi0, xi2)))
            except DefectPoint:
                ph = one
            return pt, ph, 1.0

        return self._structured(self.X2, rule, name="U_factor")

    @cached_property
    def rows_first_regular(self) -> np.ndarray:
        """Two-leg Fourier rows with xi0 + xi1 in the orbit."""
        bk = self.backend
        return np.array([i for i, (x, _) in enumerate(self.X2.points) if bk.x_is_regular(x)])

    @cached_property
    def rows_both_regular(self) -> np.ndarray:
        bk = self.backend
        return np.array([i for i, (x, y) in enumerate(self.X2.points)
                         if bk.x_is_regular(x) and bk.x_is_regular(y)])

    # -- Galois map -------------------------------------------------------------
    @cached_property
    def galois_definition(self) -> OperatorMatrix:
        """Position-space oracle: (f1 (x) f2)(g1, g2) -> ((lambda_{g1} f1) star f2)(g2),
        with the star product taken through the quantization (K^* (K f1 K f2))."""
        n, m = self.G.dim, self.Q.dim
        Kmat = self.quantization.matrix.reshape(m, m, n)  # [i, j, a]
        KB = np.transpose(Kmat, (2, 0, 1))  # [b, i, j]
        lam = np.stack([self.regular_rep(g).matrix for g in self.G.points])  # [g1, h, a]
        # K(lambda_{g1} e_a) = sum_h K e_h * lam[g1, h, a]
        KL = np.einsum("ijh,gha->gaij", Kmat, lam)
        prod = np.einsum("gaim,bmj->gabij", KL, KB).reshape(n, n, n, m * m)
        sym = self.symbol_map.matrix  # [g2, k]
        gal = np.einsum("xk,gabk->gxab", sym, prod).reshape(n * n, n * n)
        return OperatorMatrix(self.G2, self.G2, gal)

    @cached_property
    def galois_formula(self) -> WeightedComposition:
        """Fourier-picture closed form (rows hitting the defect set are zero)."""
        bk = self.backend
        inv, act, mul, add, sub, pinv = bk.q_inv, bk.dual_act, bk.q_mul, bk.xi_add, bk.xi_sub, bk.phi_inv
        xi0 = bk.xi0

        def rule(pt):
            (q1, xi1), (q2, xi2) = pt
            q2i = inv(q2)
            A = pinv(add(xi0, act(q2i, xi1)))
            B = pinv(sub(xi0, act(q2i, xi2)))
            c = pinv(add(act(q2, xi0), xi1))
            src = (XPoint(mul(inv(q1), q2), bk.xi_neg(act(inv(q1), xi1))), XPoint(c, add(xi1, xi2)))
            return src, self.omega(A, mul(inv(A), B)).conj(), 1.0

        return self._structured(self.X2, rule, name="Galois")

    @cached_property
    def w_hat(self) -> OperatorMatrix:
        """(W^ f)(g, h) = f(h g, h)."""
        bk = self.backend
        n = self.G2.dim
        m = np.zeros((n, n), dtype=complex)
        for i, (g, h) in enumerate(self.G2.points):
            m[i, self.G2.index[(bk.g_compose(h, g), h)]] = 1.0
        return OperatorMatrix(self.G2, self.G2, m)

    @cached_property
    def w_hat_star_formula(self) -> WeightedComposition:
        """Closed form of (F (x) F) W^* (F^* (x) F^*): |q2| f(q2^{-1} q1, act(q2^{-1}, xi1); q2, xi1 + xi2)."""
        bk = self.backend
        one = bk.root_of_unity(0, 1)

        def rule(pt):
            (q1, xi1), (q2, xi2) = pt
            q2i = bk.q_inv(q2)
            return ((XPoint(bk.q_mul(q2i, q1), bk.dual_act(q2i, xi1)), XPoint(q2, bk.xi_add(xi1, xi2))),
                    one, bk.modulus(q2))

        return self._structured(self.X2, rule, name="W_hat_star")

    @cached_property
    def galois_assembly(self) -> OperatorMatrix:
        """(calJ (x) calJ) G^* (1 (x) calJ) W^ in the Fourier picture, from the definition oracle."""
        cJ = self.calJ
        one_cJ = identity(self.G).kron(cJ)
        pos = cJ.kron(cJ) @ self.galois_definition.adjoint() @ one_cJ @ self.w_hat
        return self.to_fourier(pos)

    # -- multiplicative unitary ---------------------------------------------------
    @cached_property
    def theta(self) -> ThetaCocycle:
        return theta_from_group_cocycle(self.omega)

    def theta_twist(self, theta: ThetaCocycle | None = None) -> WeightedComposition:
        """Theta (x, y) * w_weight * f(w(x, y)); undefined rows completed canonically (phase 1)."""
        bk = self.backend
        theta = theta or self.theta
        one = bk.root_of_unity(0, 1)

        def rule(pt):
            x, y = pt
            src = w_apply(bk, x, y)
            wt = w_weight(bk, x, y)
            try:
                ph = theta(x, y)
            except DefectPoint:
                ph = one
            return src, ph, wt

        return self._structured(self.X2, rule, complete=True, name="W_theta")

    @cached_property
    def rows_theta_regular(self) -> np.ndarray:
        """Rows where both w and Theta are given by their formulas."""
        bk = self.backend
        rows = []
        for i, (x, y) in enumerate(self.X2.points):
            try:
                w_apply(bk, x, y)
                self.theta(x, y)
            except DefectPoint:
                continue
            rows.append(i)
        return np.array(rows)

    @cached_property
    def dmu(self) -> OperatorMatrix:
        """(J~ (x) Jhat) Omega_omega W^* (J (x) Jhat) Omega_omega^*, Fourier picture."""
        om_pos = self.to_position(self.omega_cocycle.to_operator())
        inner = om_pos @ self.w_hat.adjoint() @ self.J.kron(self.Jhat) @ om_pos.adjoint()
        return self.to_fourier(self.J_tilde.kron(self.Jhat) @ inner)

    def multiplicative_unitary(self, method: str = "theta_twist") -> OperatorMatrix:
        if method == "theta_twist":
            return self.theta_twist().to_operator()
        if method == "dmu":
            return self.dmu
        raise ValueError("method is 'theta_twist' or 'dmu'")

    @cached_property
    def regular_triple_mask(self) -> np.ndarray:
        """Three-leg coordinates where the pentagon for the twisted map is defined."""
        w = as_map(self.backend)
        pts = self.X.points
        n = len(pts)
        mask = np.zeros((n, n, n), bool)
        for i, x in enumerate(pts):
            for j, y in enumerate(pts):
                for k, z in enumerate(pts):
                    mask[i, j, k] = operator_regular_triple(self.theta, w, x, y, z)
        return mask

    def pentagon_3leg_error(self, op, vectors: int = 100, seed: int = 0, mask: np.ndarray | None = None) -> float:
        """max |W12 W13 W23 f - W23 W12 f| over seeded random three-leg vectors (on ``mask``)."""
        rng = np.random.default_rng(seed)
        n = self.X.dim
        err = 0.0
        for _ in range(vectors):
            f = rng.normal(size=(n, n, n)) + 1j * rng.normal(size=(n, n, n))
            lhs, rhs = pentagon_sides_3leg(op, f)
            d = np.abs(lhs - rhs)
            if mask is not None:
                d = d[mask]
            err = max(err, float(d.max(initial=0.0)))
        return err

    # -- slice pairings and the integral representation ---------------------------
    def convolution(self, zeta, zeta_p) -> np.ndarray:
        """(zeta * check zeta')(g) = int zeta(h) zeta'(g^{-1} h) dh."""
        w = self.G.weights
        out = np.empty(self.G.dim, dtype=complex)
        for i, g in enumerate(self.G.points):
            out[i] = np.sum(w * zeta * self.regular_rep(g).apply(zeta_p))
        return out

    def slice_pair(self, pair1, pair2, X: OperatorMatrix, g: GElement) -> complex:
        """(f1 (x) f2)((lambda_g (x) lambda_g) X) for f_i = <conj zeta_i, . zeta_i'>."""
        z1, z1p = pair1
        z2, z2p = pair2
        lg_inv = self.regular_rep(self.backend.g_inverse(g))
        a = np.kron(lg_inv.apply(np.conj(z1)), lg_inv.apply(np.conj(z2)))
        return self.G2.inner(a, X.apply(np.kron(z1p, z2p)))

    @cached_property
    def regular_first_leg_projector(self) -> np.ndarray:
        """Position-space projector onto functions with no Fourier mass where xi0 + xi leaves the orbit."""
        d = np.array([1.0 if self.backend.x_is_regular(x) else 0.0 for x in self.X.points])
        return (self.fourier_inv @ diagonal(self.X, d) @ self.fourier).matrix

    def integral_rep_omega(self) -> tuple[OperatorMatrix, int]:
        """Finite-sum version of the weak integral defining Omega_omega; returns (matrix, skipped terms)."""
        bk = self.backend
        n2 = self.G2.dim
        total = np.zeros((n2, n2), dtype=complex)
        skipped = 0
        wv = bk.haar_weight("V")
        for q in self.Q.points:
            d = np.zeros(self.X.dim, dtype=complex)
            for i, (_, xi) in enumerate(self.X.points):
                try:
                    d[i] = complex(self.omega(q, bk.phi_inv(bk.xi_add(bk.dual_act(bk.q_inv(q), xi), bk.xi0))))
                except DefectPoint:
                    skipped += 1
                    d[i] = 1.0
            mult = (self.fourier_inv @ diagonal(self.X, d) @ self.fourier).matrix
            right = self.regular_rep(bk.g_inverse(GElement(q, bk.v_zero))).matrix @ mult
            shift = bk.xi_sub(bk.phi(q), bk.xi0)
            for v in bk.enumerate("V"):
                ph = complex(bk.pairing(shift, v).conj())
                left = self.regular_rep(bk.g_inverse(GElement(bk.q_identity, v))).matrix
                total += (ph * wv / bk.modulus(q)) * np.kron(left, right)
        return OperatorMatrix(self.G2, self.G2, total), skipped
