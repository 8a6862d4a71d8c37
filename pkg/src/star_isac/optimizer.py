"""Alternating SDR optimization of DFBS beamformers and STAR-RIS coefficients.

Each outer iteration solves two relaxed sub-problems:

* the beamforming problem (``build_p31``): maximize the minimum beam
  pattern gain R over PSD covariances W_k, D_q with the STAR-RIS held at
  its current lifted value;
* the STAR-RIS problem (``build_p51``): maximize R over the lifted
  coefficient matrices Psi_r, Psi_t with the covariances held fixed.

Both sub-problems are assembled from the same quadratic forms, so the
previous iterate is always feasible for the next solve and the recorded R
sequence is non-decreasing. Rank-one vectors are extracted once the loop
has stopped.
"""

from dataclasses import dataclass, field
import logging
import math
import time

import numpy as np

from . import sdp
from .errors import InfeasibleScenario, InvalidInput, NumericalFailure, RecoveryFailure
from .metrics import (BeamformerSet, StarCoefficients, audit, steering_product)
from .numerics import hermitian_part, psd_repair

log = logging.getLogger(__name__)


@dataclass
class LiftedRISVars:
    psi_r: np.ndarray
    psi_t: np.ndarray

    @classmethod
    def from_star(cls, star):
        return cls(*star.lifted())

    @property
    def n(self):
        return self.psi_r.shape[0] - 1

    def quad_r(self):
        """Upper-left N x N block: E[v v^H] for v = conj(phi_r)."""
        return self.psi_r[:-1, :-1]

    def quad_t(self):
        return self.psi_t[:-1, :-1]


@dataclass
class IterationRecord:
    index: int
    r_after_p31: float
    r_after_p51: float
    wall_ms: float
    statuses: tuple


@dataclass
class AOTrace:
    iterations: list
    beamformers: BeamformerSet = None
    star: StarCoefficients = None
    report: object = None
    status: str = "converged"
    final_source: str = "alternating"
    relaxed_r: float = float("nan")
    rank_one_ok: bool = True
    messages: list = field(default_factory=list)

    @property
    def r_sequence(self):
        seq = []
        for it in self.iterations:
            seq.append(it.r_after_p31)
            if not math.isnan(it.r_after_p51):
                seq.append(it.r_after_p51)
        return seq

    @property
    def min_gain(self):
        return self.report.min_gain if self.report is not None else float("nan")

    @property
    def feasible(self):
        return self.report is not None and self.report.feasible

    def is_monotone(self, rel=1e-6):
        seq = self.r_sequence
        return all(b >= a - rel * (1.0 + abs(a)) for a, b in zip(seq, seq[1:]))


# ---------------------------------------------------------------------------
# problem data


def _lifted(ris):
    if isinstance(ris, LiftedRISVars):
        return ris
    if isinstance(ris, StarCoefficients):
        return LiftedRISVars.from_star(ris)
    raise InvalidInput("expected StarCoefficients or LiftedRISVars")


def _user_products(channels):
    """B_k = diag(h_k^H) G, so that h_hat_k = v_t^H B_k."""
    return [np.conj(h)[:, None] * channels.g for h in channels.h_users]


def _sandwich(a, x):
    """a^H x a as an exact Hermitian matrix."""
    return hermitian_part(a.conj().T @ x @ a)


def build_p31(channels, ris, cfg):
    """Relaxed beamforming problem for a fixed STAR-RIS configuration.

    Blocks are W_0..W_{K-1} followed by D_0..D_{Q-1}; scalar 0 is R.
    """
    lift = _lifted(ris)
    k_users, q_targets = len(channels.h_users), len(channels.a_targets)
    m = channels.m
    vr, vt = lift.quad_r(), lift.quad_t()
    aq = [steering_product(a, channels.g) for a in channels.a_targets]
    # T_q = A_q^H V_r A_q: the DFBS-side quadratic form toward target q
    tq = [_sandwich(a, vr) for a in aq]
    hk = [_sandwich(b, vt) for b in _user_products(channels)]
    wi = list(range(k_users))
    di = [k_users + q for q in range(q_targets)]

    p = sdp.ConicProblem([m] * (k_users + q_targets), 1, objective_scalars={0: 1.0})
    for q in range(q_targets):
        p.add({di[q]: tq[q]}, {0: -1.0}, 0.0, ">=", f"gain[{q}]")
    for q in range(q_targets):
        blocks = {wi[k]: tq[q] for k in range(k_users)}
        others = [tq[o] for o in range(q_targets) if o != q]
        if others:
            blocks[di[q]] = sum(others)
        p.add(blocks, {}, cfg.eta, "<=", f"interference[{q}]")
    g = cfg.gamma * (1.0 + cfg.sinr_backoff)
    for k in range(k_users):
        blocks = {wi[j]: -hk[k] for j in range(k_users)}
        blocks[wi[k]] = (1.0 / g) * hk[k]
        for q in range(q_targets):
            blocks[di[q]] = -hk[k]
        p.add(blocks, {}, cfg.noise_power, ">=", f"sinr[{k}]")
    eye = np.eye(m)
    p.add({b: eye for b in wi + di}, {}, cfg.p_max, "<=", "power")
    return p


def _border(mat):
    n = mat.shape[0]
    out = np.zeros((n + 1, n + 1), dtype=complex)
    out[:n, :n] = mat
    return hermitian_part(out)


def p51_matrices(channels, bf):
    """The bordered B_q, C_q, E_k, F_k matrices of the STAR-RIS problem."""
    aq = [steering_product(a, channels.g) for a in channels.a_targets]
    bk = _user_products(channels)
    w_sum = sum(bf.w_cov)
    total = w_sum + (sum(bf.d_cov) if bf.q else 0.0)
    q_targets = len(aq)
    b = [_border(_sandwich(a.conj().T, d)) for a, d in zip(aq, bf.d_cov)]
    c = []
    for q in range(q_targets):
        inner = _sandwich(aq[q].conj().T, w_sum)
        for o in range(q_targets):
            if o != q:
                inner = inner + _sandwich(aq[o].conj().T, bf.d_cov[q])
        c.append(_border(inner))
    e = [_border(_sandwich(x.conj().T, w)) for x, w in zip(bk, bf.w_cov)]
    f = [_border(_sandwich(x.conj().T, total)) for x in bk]
    return b, c, e, f


def conventional_mask(n):
    """First N/2 elements reflect only, the rest transmit only."""
    if n % 2:
        raise InvalidInput("the conventional-RIS split needs an even element count")
    return np.arange(n) < n // 2


def _restrict(mat, idx):
    sel = np.append(idx, mat.shape[0] - 1)
    return mat[np.ix_(sel, sel)]


def build_p51(channels, bf, cfg, mask=None):
    """Relaxed STAR-RIS problem for fixed covariances.

    Blocks are Psi_r (0) and Psi_t (1); scalar 0 is R. With ``mask`` (a
    boolean reflect-only selector) the blocks cover only the reflecting or
    transmitting elements, with unit diagonals instead of the energy split.
    """
    b, c, e, f = p51_matrices(channels, bf)
    n = channels.n
    g = cfg.gamma * (1.0 + cfg.sinr_backoff)
    if mask is None:
        idx_r = idx_t = np.arange(n)
    else:
        mask = np.asarray(mask, dtype=bool)
        idx_r, idx_t = np.flatnonzero(mask), np.flatnonzero(~mask)
        b = [_restrict(x, idx_r) for x in b]
        c = [_restrict(x, idx_r) for x in c]
        e = [_restrict(x, idx_t) for x in e]
        f = [_restrict(x, idx_t) for x in f]
    nr, nt = len(idx_r) + 1, len(idx_t) + 1

    p = sdp.ConicProblem([nr, nt], 1, objective_scalars={0: 1.0})
    for q, bq in enumerate(b):
        p.add({0: bq}, {0: -1.0}, 0.0, ">=", f"gain[{q}]")
    for q, cq in enumerate(c):
        p.add({0: cq}, {}, cfg.eta, "<=", f"interference[{q}]")
    for k, (ek, fk) in enumerate(zip(e, f)):
        p.add({1: hermitian_part((1.0 + 1.0 / g) * ek - fk)}, {}, cfg.noise_power, ">=", f"sinr[{k}]")

    def unit(dim, i):
        u = np.zeros((dim, dim))
        u[i, i] = 1.0
        return u

    if mask is None:
        for i in range(n):
            p.add({0: unit(nr, i), 1: unit(nt, i)}, {}, 1.0, "==", f"coupling[{i}]")
        for blk, dim in ((0, nr), (1, nt)):
            for i in range(dim - 1):
                p.add({blk: unit(dim, i)}, {}, 0.0, ">=", f"diag{'rt'[blk]}[{i}]")
    else:
        for blk, dim in ((0, nr), (1, nt)):
            for i in range(dim - 1):
                p.add({blk: unit(dim, i)}, {}, 1.0, "==", f"unit{'rt'[blk]}[{i}]")
    p.add({0: unit(nr, nr - 1)}, {}, 1.0, "==", "aux[r]")
    p.add({1: unit(nt, nt - 1)}, {}, 1.0, "==", "aux[t]")
    return p


# ---------------------------------------------------------------------------
# rank-one recovery


def recover_beamformers(sol, k_users, rank_ratio=1e-4):
    """Dominant-eigenvector beamformers from a solved beamforming problem.

    Blocks whose second eigenvalue exceeds ``rank_ratio`` times the first
    keep their covariance and are flagged in ``rank_one_w``/``rank_one_d``.
    """
    if sol.status != sdp.OPTIMAL:
        raise InvalidInput(f"cannot recover beamformers from a {sol.status} solution")
    vecs, covs, flags, ratios = [], [], [], []
    for x in sol.block_values:
        x = psd_repair(x)
        lam, u = np.linalg.eigh(x)
        l1 = lam[-1]
        l2 = lam[-2] if len(lam) > 1 else 0.0
        scale = max(float(np.trace(x).real), 1e-300)
        if l1 <= 1e-12 * scale or l1 == 0:
            ratio = 0.0
        else:
            ratio = l2 / l1
        ratios.append(ratio)
        if ratio <= rank_ratio:
            w = math.sqrt(max(l1, 0.0)) * u[:, -1]
            vecs.append(w)
            covs.append(np.outer(w, w.conj()))
            flags.append(True)
        else:
            vecs.append(None)
            covs.append(x)
            flags.append(False)
    bf = BeamformerSet(vecs[:k_users], vecs[k_users:], covs[:k_users], covs[k_users:],
                       flags[:k_users], flags[k_users:])
    bf.eig_ratios = ratios
    return bf


def _project_pair(phi_r, phi_t, mask=None):
    """Scale per-element amplitude pairs onto the energy-coupling circle."""
    if mask is not None:
        ph_r = np.exp(1j * np.angle(phi_r))
        ph_t = np.exp(1j * np.angle(phi_t))
        return np.where(mask, ph_r, 0.0), np.where(mask, 0.0, ph_t)
    br, bt = np.abs(phi_r), np.abs(phi_t)
    nrm = np.sqrt(br**2 + bt**2)
    safe = nrm > 0
    br_n = np.where(safe, br / np.where(safe, nrm, 1.0), math.sqrt(0.5))
    bt_n = np.where(safe, bt / np.where(safe, nrm, 1.0), math.sqrt(0.5))
    return br_n * np.exp(1j * np.angle(phi_r)), bt_n * np.exp(1j * np.angle(phi_t))


def _expand(x, idx, n):
    out = np.zeros(x.shape[:-1] + (n,), dtype=complex)
    out[..., idx] = x
    return out


def evaluate_candidates(phi_r, phi_t, channels, bf, cfg):
    """Vectorized min-gain and C1/C2 feasibility for stacked candidates (C, N)."""
    v = np.conj(phi_r)
    aq = [steering_product(a, channels.g) for a in channels.a_targets]
    gv = np.stack([v @ np.conj(a) for a in aq], axis=1)  # (C, Q, M), row c is A_q^H v_c

    def quad(cov, x):
        return np.real(np.einsum("ci,ij,cj->c", np.conj(x), cov, x))

    q_targets = len(aq)
    gains = np.stack([quad(bf.d_cov[q], gv[:, q]) for q in range(q_targets)], axis=1)
    w_sum = sum(bf.w_cov)
    ok = np.ones(len(v), dtype=bool)
    tol = cfg.audit_tol
    for q in range(q_targets):
        f = quad(w_sum, gv[:, q])
        for o in range(q_targets):
            if o != q:
                f = f + quad(bf.d_cov[q], gv[:, o])
        ok &= (f - cfg.eta) / cfg.eta <= tol
    total = w_sum + sum(bf.d_cov)
    for k, h in enumerate(channels.h_users):
        hh = (np.conj(h)[None, :] * phi_t) @ channels.g  # (C, M) rows h_hat
        x = np.conj(hh)
        sig = quad(bf.w_cov[k], x)
        interf = quad(total, x) - sig
        sinr = sig / (interf + cfg.noise_power)
        ok &= (cfg.gamma - sinr) / cfg.gamma <= tol
    return gains.min(axis=1), ok


def recover_star(sol, channels, bf, cfg, rng, mask=None):
    """Gaussian-randomization recovery of STAR-RIS coefficients.

    The bordered problem data never touch the auxiliary row and column, so
    candidates are drawn from the upper-left N x N block V_i of each Psi_i:
    candidate 0 is the dominant eigenvector, the next
    ``cfg.randomization_count`` are drawn from CN(0, V_i) in a fixed order
    from ``rng``. Each candidate keeps its phases and takes amplitudes
    sqrt([V_i]_nn), projected onto the energy split. Candidates are checked
    against the interference and SINR constraints with ``bf`` held fixed and
    the feasible one with the largest minimum gain wins.
    """
    if sol.status != sdp.OPTIMAL:
        raise InvalidInput(f"cannot recover coefficients from a {sol.status} solution")
    n = channels.n
    blocks = [psd_repair(x)[:-1, :-1] for x in sol.block_values[:2]]
    if mask is None:
        idx = [np.arange(n), np.arange(n)]
    else:
        mask = np.asarray(mask, dtype=bool)
        idx = [np.flatnonzero(mask), np.flatnonzero(~mask)]

    count = cfg.randomization_count
    phis = []
    for x, sel in zip(blocks, idx):
        lam, u = np.linalg.eigh(x)
        # round-off eigenvalues would otherwise perturb every draw of a rank-one block
        lam = np.where(lam > 1e-12 * max(lam[-1], 0.0), lam, 0.0)
        amp = np.sqrt(np.clip(np.real(np.diag(x)), 0.0, None))
        samples = u[:, -1][None, :]
        if count:
            z = (rng.standard_normal((count, len(lam))) + 1j * rng.standard_normal((count, len(lam)))) / math.sqrt(2.0)
            samples = np.vstack([samples, (z * np.sqrt(lam)[None, :]) @ u.T])
        # samples live in v = conj(phi) coordinates
        phis.append(_expand(amp[None, :] * np.exp(-1j * np.angle(samples)), sel, n))
    phi_r, phi_t = _project_pair(phis[0], phis[1], mask)

    min_gain, ok = evaluate_candidates(phi_r, phi_t, channels, bf, cfg)
    if np.any(ok[1:]):
        cand = np.flatnonzero(ok)
        best = int(cand[np.argmax(min_gain[cand])])
    elif ok[0]:
        best = 0
    else:
        star = StarCoefficients(phi_r[0], phi_t[0])
        report = audit(bf, star, channels, cfg)
        raise RecoveryFailure("no STAR-RIS candidate satisfies the interference and SINR constraints",
                              candidate=star, report=report)
    star = StarCoefficients(phi_r[best], phi_t[best])
    star.candidate_index = best
    star.candidate_gain = float(min_gain[best])
    star.relaxed_bound = float(sol.scalar_values[0])
    if star.candidate_gain > star.relaxed_bound * (1.0 + cfg.audit_tol):
        log.warning("recovered gain %.6e exceeds the relaxed bound %.6e", star.candidate_gain, star.relaxed_bound)
    return star


# ---------------------------------------------------------------------------
# alternating loop


def initial_star(cfg, rng, mask=None):
    """Equal energy split with i.i.d. uniform phases (reflection draws first)."""
    n = cfg.n_elements
    phases = rng.uniform(0.0, 2.0 * math.pi, (2, n))
    if mask is None:
        beta = np.full(n, math.sqrt(0.5))
        return StarCoefficients.from_polar(beta, phases[0], beta, phases[1])
    mask = np.asarray(mask, dtype=bool)
    return StarCoefficients.from_polar(mask.astype(float), phases[0], (~mask).astype(float), phases[1])


def solve_subproblem(p, cfg):
    """Solve a sub-problem with the configured tolerance and iteration cap."""
    return sdp.solve(p, tol=cfg.solver_tol, max_iters=cfg.solver_max_iters,
                     fallback_tol=max(1e-7, 100.0 * cfg.solver_tol))


_ADVICE = {
    "sinr": "lower gamma_db",
    "interference": "raise eta",
    "power": "raise p_max_dbm",
    "gain": "check the target geometry",
}


def infeasibility_advice(problem, sol):
    """Constraint families ordered by their weight in the infeasibility certificate."""
    weights = {}
    if sol.duals is not None:
        for con, y in zip(problem.constraints, sol.duals):
            fam = con.name.split("[")[0]
            weights[fam] = weights.get(fam, 0.0) + abs(y * con.rhs)
    order = sorted(weights, key=weights.get, reverse=True)
    order = [f for f in order if weights[f] > 0] or ["sinr", "interference", "power"]
    return order, "; ".join(_ADVICE.get(f, f) for f in order)


def _relaxed_beamformers(sol, k_users):
    blocks = [psd_repair(x) for x in sol.block_values]
    return BeamformerSet.from_covariances(blocks[:k_users], blocks[k_users:])


def _final_from_star(channels, star, cfg):
    p = build_p31(channels, star, cfg)
    sol = solve_subproblem(p, cfg)
    if sol.status != sdp.OPTIMAL:
        return None, sol
    bf = recover_beamformers(sol, len(channels.h_users), cfg.rank_one_ratio)
    return bf, sol


def _better(a, b):
    """True when report ``a`` should replace incumbent ``b``."""
    if b is None:
        return True
    if a.feasible != b.feasible:
        return a.feasible
    return a.min_gain > b.min_gain


def alternating_optimize(channels, cfg, rng, mask=None, init=None):
    """Run the alternating relaxation loop and extract a feasible rank-one design.

    ``mask`` restricts the STAR-RIS to fixed reflect/transmit element sets
    (the conventional-RIS comparison); ``init`` overrides the random
    initial coefficients.
    """
    k_users = len(channels.h_users)
    star0 = init if init is not None else initial_star(cfg, rng, mask)
    lift = LiftedRISVars.from_star(star0)
    trace = AOTrace([])
    r_prev = 0.0
    last_p51 = None
    bf_relaxed = None
    incumbent = None

    for i in range(1, cfg.gamma_max_iters + 1):
        t0 = time.perf_counter()
        p31 = build_p31(channels, lift, cfg)
        s31 = solve_subproblem(p31, cfg)
        if s31.status != sdp.OPTIMAL:
            if i == 1:
                if s31.status == sdp.INFEASIBLE:
                    fams, advice = infeasibility_advice(p31, s31)
                    raise InfeasibleScenario(f"beamforming sub-problem infeasible; try: {advice}", binding=fams)
                raise NumericalFailure(f"beamforming sub-problem: {s31.status} ({s31.message})")
            trace.status = f"warning: beamforming solve {s31.status} at iteration {i}"
            break
        if i == 1:
            # the initial coefficients are rank one, so this is already a feasible design
            bf0 = recover_beamformers(s31, k_users, cfg.rank_one_ratio)
            incumbent = ("initial", bf0, star0, audit(bf0, star0, channels, cfg))
        bf_candidate = _relaxed_beamformers(s31, k_users)
        r31 = float(s31.scalar_values[0])

        p51 = build_p51(channels, bf_candidate, cfg, mask)
        s51 = solve_subproblem(p51, cfg)
        wall = (time.perf_counter() - t0) * 1e3
        if s51.status != sdp.OPTIMAL:
            trace.iterations.append(IterationRecord(i, r31, float("nan"), wall, (s31.status, s51.status)))
            trace.status = f"warning: STAR-RIS solve {s51.status} at iteration {i}"
            if last_p51 is None:
                raise NumericalFailure(f"STAR-RIS sub-problem: {s51.status} ({s51.message})")
            break
        r51 = float(s51.scalar_values[0])
        bf_relaxed = bf_candidate
        last_p51 = s51
        lift = _lifted_from_solution(s51, channels.n, mask)
        trace.iterations.append(IterationRecord(i, r31, r51, wall, (s31.status, s51.status)))
        delta = abs(r_prev - r51) / r51 if r51 > 0 else math.inf
        r_prev = r51
        if delta < cfg.delta_th:
            trace.status = "converged"
            break
    else:
        trace.status = "max_iters"

    trace.relaxed_r = r_prev
    candidates = [incumbent]
    try:
        star = recover_star(last_p51, channels, bf_relaxed, cfg, rng, mask)
        bf, _ = _final_from_star(channels, star, cfg)
        if bf is not None:
            candidates.append(("alternating", bf, star, audit(bf, star, channels, cfg)))
        else:
            trace.messages.append("refit after recovery did not solve")
    except RecoveryFailure as exc:
        trace.messages.append(str(exc))

    best = None
    for cand in candidates:
        if cand is not None and (best is None or _better(cand[3], best[3])):
            best = cand
    trace.final_source, trace.beamformers, trace.star, trace.report = best
    trace.rank_one_ok = all(best[1].rank_one_w) and all(best[1].rank_one_d)
    if not trace.rank_one_ok:
        log.warning("final beamformers failed the rank-one test: ratios %s", getattr(best[1], "eig_ratios", None))
    return trace


def _lifted_from_solution(sol, n, mask):
    psi_r, psi_t = (hermitian_part(x) for x in sol.block_values[:2])
    if mask is None:
        return LiftedRISVars(psi_r, psi_t)
    mask = np.asarray(mask, dtype=bool)
    full = []
    for x, idx in ((psi_r, np.flatnonzero(mask)), (psi_t, np.flatnonzero(~mask))):
        out = np.zeros((n + 1, n + 1), dtype=complex)
        sel = np.append(idx, n)
        out[np.ix_(sel, sel)] = x
        full.append(out)
    return LiftedRISVars(*full)
