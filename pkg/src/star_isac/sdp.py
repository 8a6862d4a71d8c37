"""Block-Hermitian semidefinite programs and a primal-dual interior-point solver.

Problems are stated in a maximization form over a list of Hermitian PSD
blocks plus free real scalars::

    maximize    sum_b Re Tr(C_b X_b) + c_f . t
    subject to  sum_b Re Tr(A_ib X_b) + a_if . t  (=, <=, >=)  rhs_i
                X_b >= 0 (PSD)

The solver converts this to a standard-form cone program with a
nonnegative orthant (inequality slacks) and the PSD blocks, keeps the
free scalars as unconstrained columns of the Newton system, and runs a
Mehrotra predictor-corrector on the homogeneous self-dual embedding with
Nesterov-Todd scaling. Complex blocks are handled directly in the
Jordan algebra of Hermitian matrices; :func:`real_embedding` converts a
problem to its equivalent real-symmetric form.
"""

from dataclasses import dataclass, field
import logging

import numpy as np
import scipy.linalg as sla

from .errors import InvalidInput
from .numerics import hermitian_part, is_hermitian

log = logging.getLogger(__name__)

OPTIMAL = "Optimal"
INFEASIBLE = "Infeasible"
UNBOUNDED = "Unbounded"
NUMERICAL_FAILURE = "NumericalFailure"

SENSES = ("==", "<=", ">=")


@dataclass
class AffineConstraint:
    """sum_b Re Tr(blocks[b] X_b) + sum_j scalars[j] t_j  (sense)  rhs."""

    blocks: dict
    scalars: dict
    rhs: float
    sense: str = "<="
    name: str = ""


@dataclass
class ConicProblem:
    block_dims: list
    free_scalars: int = 0
    objective_blocks: dict = field(default_factory=dict)
    objective_scalars: dict = field(default_factory=dict)
    constraints: list = field(default_factory=list)

    def add(self, blocks=None, scalars=None, rhs=0.0, sense="<=", name=""):
        self.constraints.append(
            AffineConstraint(dict(blocks or {}), dict(scalars or {}), float(rhs), sense, name)
        )

    @property
    def n_constraints(self):
        return len(self.constraints)

    def validate(self, tol=1e-9):
        if any(int(n) < 1 for n in self.block_dims):
            raise InvalidInput("block dimensions must be positive")
        if self.free_scalars < 0:
            raise InvalidInput("negative free scalar count")

        def check_terms(blocks, scalars, where):
            for b, mat in blocks.items():
                if not 0 <= b < len(self.block_dims):
                    raise InvalidInput(f"{where}: block index {b} out of range")
                n = self.block_dims[b]
                mat = np.asarray(mat)
                if mat.shape != (n, n):
                    raise InvalidInput(f"{where}: block {b} coefficient has shape {mat.shape}, expected {(n, n)}")
                if not np.all(np.isfinite(mat)):
                    raise InvalidInput(f"{where}: non-finite coefficient in block {b}")
                if not is_hermitian(mat, tol):
                    raise InvalidInput(f"{where}: block {b} coefficient is not Hermitian")
            for j, v in scalars.items():
                if not 0 <= j < self.free_scalars:
                    raise InvalidInput(f"{where}: scalar index {j} out of range")
                if not np.isfinite(v):
                    raise InvalidInput(f"{where}: non-finite scalar coefficient")

        check_terms(self.objective_blocks, self.objective_scalars, "objective")
        for i, con in enumerate(self.constraints):
            label = con.name or f"constraint {i}"
            if con.sense not in SENSES:
                raise InvalidInput(f"{label}: unknown sense {con.sense!r}")
            if not np.isfinite(con.rhs):
                raise InvalidInput(f"{label}: non-finite right-hand side")
            check_terms(con.blocks, con.scalars, label)


@dataclass
class ConicSolution:
    block_values: list
    scalar_values: np.ndarray
    objective_value: float
    status: str
    duality_gap: float
    max_residual: float
    duals: np.ndarray = None
    iterations: int = 0
    message: str = ""

    @property
    def optimal(self):
        return self.status == OPTIMAL


@dataclass
class ResidualReport:
    violations: np.ndarray
    psd_margins: list
    primal_objective: float
    dual_objective: float
    gap: float
    dual_psd_margins: list
    dual_sign_violation: float
    dual_scalar_residual: float

    @property
    def max_violation(self):
        return float(np.max(self.violations, initial=0.0))


def constraint_values(p, block_values, scalar_values):
    vals = np.empty(p.n_constraints)
    for i, con in enumerate(p.constraints):
        v = sum(np.real(np.sum(np.asarray(c) * block_values[b].T)) for b, c in con.blocks.items())
        v += sum(coef * scalar_values[j] for j, coef in con.scalars.items())
        vals[i] = v
    return vals


def objective_value(p, block_values, scalar_values):
    v = sum(np.real(np.sum(np.asarray(c) * block_values[b].T)) for b, c in p.objective_blocks.items())
    v += sum(coef * scalar_values[j] for j, coef in p.objective_scalars.items())
    return float(v)


def check_solution(p, s):
    """Re-evaluate primal and dual residuals of ``s`` directly from ``p``'s data."""
    lhs = constraint_values(p, s.block_values, s.scalar_values)
    viol = np.empty(p.n_constraints)
    for i, con in enumerate(p.constraints):
        d = lhs[i] - con.rhs
        if con.sense == "==":
            viol[i] = abs(d)
        elif con.sense == "<=":
            viol[i] = max(0.0, d)
        else:
            viol[i] = max(0.0, -d)
    psd = [float(np.linalg.eigvalsh(hermitian_part(x))[0]) for x in s.block_values]
    pobj = objective_value(p, s.block_values, s.scalar_values)

    dobj = np.nan
    dual_psd = []
    sign_viol = np.nan
    free_res = np.nan
    if s.duals is not None:
        y = np.asarray(s.duals, dtype=float)
        dobj = float(sum(y[i] * con.rhs for i, con in enumerate(p.constraints)))
        # dual slack  S_b = sum_i y_i A_ib - C_b  must be PSD
        for b, n in enumerate(p.block_dims):
            sl = -np.asarray(p.objective_blocks.get(b, np.zeros((n, n))), dtype=complex)
            for i, con in enumerate(p.constraints):
                if b in con.blocks:
                    sl = sl + y[i] * np.asarray(con.blocks[b])
            dual_psd.append(float(np.linalg.eigvalsh(hermitian_part(sl))[0]))
        sign_viol = 0.0
        for i, con in enumerate(p.constraints):
            if con.sense == "<=":
                sign_viol = max(sign_viol, -y[i])
            elif con.sense == ">=":
                sign_viol = max(sign_viol, y[i])
        fr = np.zeros(p.free_scalars)
        for j, coef in p.objective_scalars.items():
            fr[j] -= coef
        for i, con in enumerate(p.constraints):
            for j, coef in con.scalars.items():
                fr[j] += y[i] * coef
        free_res = float(np.max(np.abs(fr), initial=0.0))
    gap = dobj - pobj if s.duals is not None else np.nan
    return ResidualReport(viol, psd, pobj, dobj, gap, dual_psd, sign_viol, free_res)


# ---------------------------------------------------------------------------
# standard form


class _StandardForm:
    """min c.x + cf.xf  s.t.  A x + Af xf = b,  x in R^l_+ x prod PSD(n_j)."""

    def __init__(self, p):
        self.p = p
        m = p.n_constraints
        f = p.free_scalars
        ineq = [i for i, c in enumerate(p.constraints) if c.sense != "=="]
        self.n_lp = len(ineq)
        self.dims = [int(n) for n in p.block_dims]
        self.m = m

        alp = np.zeros((m, self.n_lp))
        for k, i in enumerate(ineq):
            alp[i, k] = 1.0 if p.constraints[i].sense == "<=" else -1.0
        ablk = [np.zeros((m, n, n), dtype=complex) for n in self.dims]
        af = np.zeros((m, f))
        b = np.zeros(m)
        for i, con in enumerate(p.constraints):
            for j, mat in con.blocks.items():
                ablk[j][i] = hermitian_part(np.asarray(mat, dtype=complex))
            for j, coef in con.scalars.items():
                af[i, j] = coef
            b[i] = con.rhs

        cblk = []
        for j, n in enumerate(self.dims):
            mat = p.objective_blocks.get(j)
            cblk.append(-hermitian_part(np.asarray(mat, dtype=complex)) if mat is not None else np.zeros((n, n), complex))
        cf = np.zeros(f)
        for j, coef in p.objective_scalars.items():
            cf[j] = -coef
        clp = np.zeros(self.n_lp)

        # row equilibration
        # slack columns are excluded so tiny-coefficient inequalities still get rescaled
        rn = np.sqrt(
            np.sum(af**2, axis=1)
            + sum(np.sum(np.abs(a) ** 2, axis=(1, 2)) for a in ablk)
        )
        rn[rn == 0] = 1.0
        self.row_scale = rn
        # slacks are rescaled with their rows, which keeps their coefficients at +-1
        af /= rn[:, None]
        for a in ablk:
            a /= rn[:, None, None]
        b = b / rn

        cn = np.sqrt(np.sum(clp**2) + np.sum(cf**2) + sum(np.sum(np.abs(c) ** 2) for c in cblk))
        self.c_scale = 1.0 / cn if cn > 0 else 1.0
        self.alp, self.ablk, self.af, self.b = alp, ablk, af, b
        # Re Tr(A X) = <Re A, Re X^T> - <Im A, Im X^T>, evaluated with real matrix products
        self.aflat = [np.hstack([a.real.reshape(m, -1), -a.imag.reshape(m, -1)]) for a in ablk]
        self.clp = clp * self.c_scale
        self.cblk = [c * self.c_scale for c in cblk]
        self.cf = cf * self.c_scale
        self.nu = self.n_lp + sum(self.dims)

    # x is a tuple (lp vector, [blocks])
    def A(self, xlp, xb):
        out = self.alp @ xlp
        for a, x in zip(self.aflat, xb):
            out = out + a @ _flat_t(x)
        return out

    def A_blocks(self, xb):
        return sum((a @ _flat_t(x) for a, x in zip(self.aflat, xb)), np.zeros(self.m))

    def AT(self, y):
        out = []
        for a, n in zip(self.ablk, self.dims):
            out.append(hermitian_part(np.tensordot(y, a, axes=1)))
        return self.alp.T @ y, out


def _flat_t(x):
    """Real and imaginary parts of x^T, flattened and stacked."""
    xt = x.T
    return np.concatenate([xt.real.ravel(), xt.imag.ravel()])


def _inner(alp, ab, blp, bb):
    return float(alp @ blp + sum(np.real(np.sum(x * y.T)) for x, y in zip(ab, bb)))


def _nt_scaling(x, s):
    """Return (G, Ginv, lam) with G^{-1} x G^{-H} = diag(lam) = G^H s G."""
    lx = np.linalg.cholesky(x)
    ls = np.linalg.cholesky(s)
    u, sv, vh = np.linalg.svd(ls.conj().T @ lx)
    v = vh.conj().T
    rs = 1.0 / np.sqrt(sv)
    g = (lx @ v) * rs
    ginv = (np.sqrt(sv)[:, None] * vh) @ sla.solve_triangular(lx, np.eye(len(sv)), lower=True)
    return g, ginv, sv


def _max_step(lam, d):
    """Largest a with diag(lam) + a d PSD (d Hermitian, in scaled coordinates)."""
    r = 1.0 / np.sqrt(lam)
    e = np.linalg.eigvalsh(hermitian_part(r[:, None] * d * r[None, :]))[0]
    return np.inf if e >= 0 else -1.0 / e


def solve(p, tol=1e-7, max_iters=100, verbose=False, fallback_tol=None):
    """Solve a :class:`ConicProblem` (maximization form).

    Returns a :class:`ConicSolution`; infeasibility and unboundedness are
    reported through ``status`` with certificates checked on the embedded
    iterates, never raised. If the iteration stalls before reaching ``tol``,
    the best iterate is still reported Optimal when its residuals and gap
    are within ``fallback_tol``.
    """
    if tol <= 0:
        raise InvalidInput("tol must be positive")
    p.validate()
    sf = _StandardForm(p)
    m, f, nl = sf.m, p.free_scalars, sf.n_lp

    if m == 0:
        return _trivial(p)

    xlp = np.ones(nl)
    slp = np.ones(nl)
    xb = [np.eye(n, dtype=complex) for n in sf.dims]
    sb = [np.eye(n, dtype=complex) for n in sf.dims]
    xf = np.zeros(f)
    y = np.zeros(m)
    tau = kappa = 1.0

    # primal residuals are judged in the units of the original rows
    bnorm = 1.0 + np.linalg.norm(sf.b * sf.row_scale)
    cnorm = 1.0 + np.sqrt(np.sum(sf.clp**2) + np.sum(sf.cf**2) + sum(np.sum(np.abs(c) ** 2) for c in sf.cblk))

    status = NUMERICAL_FAILURE
    message = "iteration limit reached"
    it = 0
    small_steps = 0
    best = None
    for it in range(max_iters + 1):
        # residuals of the embedding
        ax = sf.A(xlp, xb) + sf.af @ xf
        atylp, atyb = sf.AT(y)
        rp = sf.b * tau - ax
        rdlp = atylp + slp - sf.clp * tau
        rdb = [a + s - c * tau for a, s, c in zip(atyb, sb, sf.cblk)]
        rdf = sf.af.T @ y - sf.cf * tau
        cx = _inner(sf.clp, sf.cblk, xlp, xb) + sf.cf @ xf
        by = sf.b @ y
        rg = cx - by + kappa
        mu = (_inner(xlp, xb, slp, sb) + tau * kappa) / (sf.nu + 1)

        pres = np.linalg.norm(rp * sf.row_scale) / tau / bnorm
        dres = np.sqrt(np.sum(rdlp**2) + np.sum(rdf**2) + sum(np.sum(np.abs(r) ** 2) for r in rdb)) / tau / cnorm
        pobj, dobj = cx / tau, by / tau
        gap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
        if verbose:
            log.info("it %3d pres %.2e dres %.2e gap %.2e tau %.2e kappa %.2e mu %.2e", it, pres, dres, gap, tau, kappa, mu)
        score = max(pres, dres, gap)
        if best is None or score < best[0]:
            best = (score, xlp.copy(), [x.copy() for x in xb], xf.copy(), y.copy(), tau, pres, dres, gap)
        if pres <= tol and dres <= tol and gap <= tol:
            status, message = OPTIMAL, "converged"
            break

        # infeasibility certificates
        if by > 0:
            cert = np.sqrt(
                np.sum((atylp + slp) ** 2)
                + np.sum((sf.af.T @ y) ** 2)
                + sum(np.sum(np.abs(a + s) ** 2) for a, s in zip(atyb, sb))
            ) / by
            if cert <= tol and tau < 1e-2 * kappa:
                status, message = INFEASIBLE, "primal infeasibility certificate"
                break
        if cx < 0:
            cert = np.linalg.norm(sf.A(xlp, xb) + sf.af @ xf) / -cx
            if cert <= tol and tau < 1e-2 * kappa:
                status, message = UNBOUNDED, "dual infeasibility certificate"
                break
        if it == max_iters:
            break

        # scaling
        dlp = xlp / slp
        lamlp = np.sqrt(xlp * slp)
        try:
            scal = [_nt_scaling(x, s) for x, s in zip(xb, sb)]
        except np.linalg.LinAlgError:
            message = "iterate lost positive definiteness"
            break
        wb = [g @ g.conj().T for g, _, _ in scal]

        # Schur complement  M = A D A^T, augmented with free columns
        mmat = (sf.alp * dlp) @ sf.alp.T
        for a, af_, w in zip(sf.ablk, sf.aflat, wb):
            t = w[None] @ a @ w[None]
            tt = np.transpose(t, (0, 2, 1))
            mmat = mmat + af_ @ np.hstack([tt.real.reshape(m, -1), tt.imag.reshape(m, -1)]).T
        kmat = np.zeros((m + f, m + f))
        kmat[:m, :m] = mmat
        kmat[:m, m:] = sf.af
        kmat[m:, :m] = sf.af.T
        try:
            kmat[:m, :m] += 1e-14 * np.trace(mmat) / m * np.eye(m)
            lu = sla.lu_factor(kmat)
        except (ValueError, sla.LinAlgError):
            message = "singular Newton system"
            break

        def apply_d(vlp, vb):
            return dlp * vlp, [w @ v @ w for w, v in zip(wb, vb)]

        dc_lp, dc_b = apply_d(sf.clp, sf.cblk)
        adc = sf.alp @ dc_lp + sf.A_blocks(dc_b)
        cdc = _inner(sf.clp, sf.cblk, dc_lp, dc_b)
        u1 = sla.lu_solve(lu, np.r_[adc + sf.b, sf.cf])

        def newton(eta, rxs_lp, rxs_b, rtk):
            drd_lp, drd_b = apply_d(rdlp, rdb)
            rhs_y = eta * rp - sf.A(rxs_lp, rxs_b) - eta * sf.A(drd_lp, drd_b)
            u0 = sla.lu_solve(lu, np.r_[rhs_y, -eta * rdf])
            num = (
                eta * rg
                + _inner(sf.clp, sf.cblk, rxs_lp, rxs_b)
                + eta * _inner(sf.clp, sf.cblk, drd_lp, drd_b)
                + rtk / tau
                - (sf.b - adc) @ u0[:m]
                + sf.cf @ u0[m:]
            )
            den = (sf.b - adc) @ u1[:m] - sf.cf @ u1[m:] + cdc + kappa / tau
            dtau = num / den
            sol = u0 + u1 * dtau
            dy, dxf = sol[:m], sol[m:]
            atdy_lp, atdy_b = sf.AT(dy)
            ds_lp = -atdy_lp + sf.clp * dtau - eta * rdlp
            ds_b = [-a + c * dtau - eta * r for a, c, r in zip(atdy_b, sf.cblk, rdb)]
            dd_lp, dd_b = apply_d(ds_lp, ds_b)
            dx_lp = rxs_lp - dd_lp
            dx_b = [hermitian_part(r - d) for r, d in zip(rxs_b, dd_b)]
            ds_b = [hermitian_part(d) for d in ds_b]
            dkappa = (rtk - kappa * dtau) / tau
            return dx_lp, dx_b, dxf, dy, ds_lp, ds_b, dtau, dkappa

        def step_length(dx_lp, dx_b, ds_lp, ds_b, dtau, dkappa):
            a = np.inf
            for v, dv in ((xlp, dx_lp), (slp, ds_lp)):
                neg = dv < 0
                if np.any(neg):
                    a = min(a, float(np.min(-v[neg] / dv[neg])))
            for (g, ginv, lam), dx, ds in zip(scal, dx_b, ds_b):
                a = min(a, _max_step(lam, ginv @ dx @ ginv.conj().T))
                a = min(a, _max_step(lam, g.conj().T @ ds @ g))
            if dtau < 0:
                a = min(a, -tau / dtau)
            if dkappa < 0:
                a = min(a, -kappa / dkappa)
            return a

        # predictor
        aff = newton(1.0, -xlp, [-x for x in xb], -tau * kappa)
        a_aff = min(1.0, step_length(aff[0], aff[1], aff[4], aff[5], aff[6], aff[7]))
        sigma = (1.0 - a_aff) ** 3
        sigma = min(max(sigma, 0.0), 1.0)

        # corrector (Mehrotra second-order term)
        rxs_lp = (sigma * mu - xlp * slp - aff[0] * aff[4]) / slp
        rxs_b = []
        for (g, ginv, lam), dxa, dsa in zip(scal, aff[1], aff[5]):
            dxs = ginv @ dxa @ ginv.conj().T
            dss = g.conj().T @ dsa @ g
            rhs = -0.5 * (dxs @ dss + dss @ dxs)
            rhs[np.diag_indices_from(rhs)] += sigma * mu - lam**2
            z = 2.0 * rhs / (lam[:, None] + lam[None, :])
            rxs_b.append(g @ z @ g.conj().T)
        rtk = sigma * mu - tau * kappa - aff[6] * aff[7]
        dx_lp, dx_b, dxf, dy, ds_lp, ds_b, dtau, dkappa = newton(1.0 - sigma, rxs_lp, rxs_b, rtk)
        amax = step_length(dx_lp, dx_b, ds_lp, ds_b, dtau, dkappa)
        alpha = min(1.0, 0.98 * amax)
        if alpha < 1e-8:
            small_steps += 1
            if small_steps > 3:
                message = "step length collapsed"
                break
        xlp = xlp + alpha * dx_lp
        slp = slp + alpha * ds_lp
        xb = [hermitian_part(x + alpha * d) for x, d in zip(xb, dx_b)]
        sb = [hermitian_part(s + alpha * d) for s, d in zip(sb, ds_b)]
        xf = xf + alpha * dxf
        y = y + alpha * dy
        tau = tau + alpha * dtau
        kappa = kappa + alpha * dkappa

    if status == NUMERICAL_FAILURE and best is not None:
        score, xlp, xb, xf, y, tau, pres, dres, gap = best
        if fallback_tol is not None and score <= fallback_tol:
            status, message = OPTIMAL, f"converged to {score:.1e} ({message})"
    return _assemble(p, sf, status, message, xb, xf, y, tau, pres, dres, gap, it)


def _assemble(p, sf, status, message, xb, xf, y, tau, pres, dres, gap, it):
    if status in (OPTIMAL, NUMERICAL_FAILURE):
        blocks = [hermitian_part(x / tau) for x in xb]
        scalars = np.asarray(xf / tau, dtype=float)
        duals = -(y / tau) / (sf.row_scale * sf.c_scale)
        obj = objective_value(p, blocks, scalars)
    elif status == INFEASIBLE:
        blocks = [np.zeros((n, n), complex) for n in sf.dims]
        scalars = np.zeros(p.free_scalars)
        duals = -y / (sf.row_scale * sf.c_scale)
        obj = -np.inf
    else:
        blocks = [hermitian_part(x) for x in xb]
        scalars = np.asarray(xf, dtype=float)
        duals = None
        obj = np.inf
    resid = _primal_violation(p, blocks, scalars) if status in (OPTIMAL, NUMERICAL_FAILURE) else np.nan
    return ConicSolution(blocks, scalars, obj, status, gap, resid, duals, it, message)


def _primal_violation(p, blocks, scalars):
    """Largest constraint violation in the units of the original data."""
    lhs = constraint_values(p, blocks, scalars)
    worst = 0.0
    for v, con in zip(lhs, p.constraints):
        d = v - con.rhs
        worst = max(worst, abs(d) if con.sense == "==" else (max(d, 0.0) if con.sense == "<=" else max(-d, 0.0)))
    return float(worst)


def _trivial(p):
    """No constraints: zero is optimal unless the objective can grow."""
    dims = [int(n) for n in p.block_dims]
    blocks = [np.zeros((n, n), complex) for n in dims]
    scalars = np.zeros(p.free_scalars)
    unbounded = any(abs(v) > 0 for v in p.objective_scalars.values()) or any(
        np.linalg.eigvalsh(hermitian_part(np.asarray(c)))[-1] > 0 for c in p.objective_blocks.values()
    )
    if unbounded:
        return ConicSolution(blocks, scalars, np.inf, UNBOUNDED, np.nan, np.nan, None, 0, "no constraints")
    return ConicSolution(blocks, scalars, 0.0, OPTIMAL, 0.0, 0.0, np.zeros(0), 0, "no constraints")


# ---------------------------------------------------------------------------
# real embedding


def embed_hermitian(c):
    """[[Re c, -Im c], [Im c, Re c]]."""
    c = np.asarray(c)
    re, im = np.real(c), np.imag(c)
    return np.block([[re, -im], [im, re]])


def unembed_hermitian(x):
    n = x.shape[0] // 2
    x = np.real(x)
    return 0.5 * (x[:n, :n] + x[n:, n:]) + 0.5j * (x[n:, :n] - x[:n, n:])


def real_embedding(p):
    """Equivalent problem whose blocks are real symmetric of twice the size.

    Re Tr(C X) = Tr(C~ X~) / 2 for the standard embedding, so all
    coefficient matrices are embedded and halved.
    """

    def emb(blocks):
        return {b: 0.5 * embed_hermitian(c).astype(float) for b, c in blocks.items()}

    q = ConicProblem([2 * n for n in p.block_dims], p.free_scalars, emb(p.objective_blocks), dict(p.objective_scalars))
    for con in p.constraints:
        q.constraints.append(AffineConstraint(emb(con.blocks), dict(con.scalars), con.rhs, con.sense, con.name))
    return q


# ---------------------------------------------------------------------------
# plain-text dump
#
# Layout, one record per line, whitespace separated:
#   conic-problem 1
#   blocks <count> <dim_0> ... <dim_{count-1}>
#   free_scalars <count>
#   objective
#   constraint <index> <sense> <rhs> <name or ->
#   scalar <j> <coef>                       (term of the preceding header)
#   entry <block> <row> <col> <re> <im>     (upper triangle, row <= col)
#   end
# Numbers use repr() so a dump reloads bit-exactly.


def dump_problem(p, stream):
    w = stream.write
    w("conic-problem 1\n")
    w("blocks %d %s\n" % (len(p.block_dims), " ".join(str(int(n)) for n in p.block_dims)))
    w("free_scalars %d\n" % p.free_scalars)

    def terms(blocks, scalars):
        for j in sorted(scalars):
            w("scalar %d %r\n" % (j, float(scalars[j])))
        for b in sorted(blocks):
            c = np.asarray(blocks[b], dtype=complex)
            rows, cols = np.triu_indices(c.shape[0])
            for r, k in zip(rows, cols):
                v = c[r, k]
                if v != 0:
                    w("entry %d %d %d %r %r\n" % (b, r, k, float(v.real), float(v.imag)))

    w("objective\n")
    terms(p.objective_blocks, p.objective_scalars)
    for i, con in enumerate(p.constraints):
        w("constraint %d %s %r %s\n" % (i, con.sense, float(con.rhs), con.name or "-"))
        terms(con.blocks, con.scalars)
    w("end\n")


def load_problem(stream):
    lines = [ln.split() for ln in stream.read().splitlines() if ln.strip()]
    if not lines or lines[0][:2] != ["conic-problem", "1"]:
        raise InvalidInput("not a conic-problem dump")
    dims = [int(v) for v in lines[1][2:]]
    p = ConicProblem(dims, int(lines[2][1]))
    cur_blocks, cur_scalars = p.objective_blocks, p.objective_scalars
    for tok in lines[3:]:
        kind = tok[0]
        if kind == "objective":
            continue
        if kind == "constraint":
            con = AffineConstraint({}, {}, float(tok[3]), tok[2], "" if tok[4] == "-" else tok[4])
            p.constraints.append(con)
            cur_blocks, cur_scalars = con.blocks, con.scalars
        elif kind == "scalar":
            cur_scalars[int(tok[1])] = float(tok[2])
        elif kind == "entry":
            b, r, k = int(tok[1]), int(tok[2]), int(tok[3])
            v = complex(float(tok[4]), float(tok[5]))
            mat = cur_blocks.setdefault(b, np.zeros((dims[b], dims[b]), complex))
            mat[r, k] = v
            mat[k, r] = np.conj(v)
        elif kind == "end":
            break
        else:
            raise InvalidInput(f"unknown record {kind!r}")
    return p
