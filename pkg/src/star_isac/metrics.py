"""Closed-form performance metrics and the constraint audit.

STAR-RIS coefficients are passed as the diagonals of the coefficient
matrices (``phi[n] = beta_n exp(j phase_n)``). The lifted quadratic forms
work with the conjugate vector ``v = conj(phi)`` so that
``a^H diag(phi) G = v^H diag(a^H) G``.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInput
from .numerics import hermitian_part


@dataclass
class StarCoefficients:
    phi_r: np.ndarray
    phi_t: np.ndarray

    @property
    def n(self):
        return len(self.phi_r)

    @property
    def beta_r(self):
        return np.abs(self.phi_r)

    @property
    def beta_t(self):
        return np.abs(self.phi_t)

    def energy_residuals(self):
        return self.beta_r**2 + self.beta_t**2 - 1.0

    @classmethod
    def from_polar(cls, beta_r, phase_r, beta_t, phase_t):
        return cls(np.asarray(beta_r) * np.exp(1j * np.asarray(phase_r)),
                   np.asarray(beta_t) * np.exp(1j * np.asarray(phase_t)))

    def lifted(self):
        """(Psi_r, Psi_t) = (vbar vbar^H) with vbar = [conj(phi); 1]."""
        out = []
        for phi in (self.phi_r, self.phi_t):
            v = np.append(np.conj(phi), 1.0)
            out.append(np.outer(v, v.conj()))
        return tuple(out)


@dataclass
class BeamformerSet:
    """Communication and sensing beamformers.

    ``w_cov``/``d_cov`` are always populated. Vector entries are ``None``
    where the covariance did not pass the rank-one test.
    """

    w_comm: list
    d_sense: list
    w_cov: list
    d_cov: list
    rank_one_w: list = field(default_factory=list)
    rank_one_d: list = field(default_factory=list)

    @classmethod
    def from_vectors(cls, w_comm, d_sense):
        w_comm = [np.asarray(w, dtype=complex) for w in w_comm]
        d_sense = [np.asarray(d, dtype=complex) for d in d_sense]
        return cls(w_comm, d_sense,
                   [np.outer(w, w.conj()) for w in w_comm],
                   [np.outer(d, d.conj()) for d in d_sense],
                   [True] * len(w_comm), [True] * len(d_sense))

    @classmethod
    def from_covariances(cls, w_cov, d_cov):
        w_cov = [hermitian_part(np.asarray(w, dtype=complex)) for w in w_cov]
        d_cov = [hermitian_part(np.asarray(d, dtype=complex)) for d in d_cov]
        return cls([None] * len(w_cov), [None] * len(d_cov), w_cov, d_cov,
                   [False] * len(w_cov), [False] * len(d_cov))

    @classmethod
    def zeros(cls, m, k, q):
        return cls.from_vectors([np.zeros(m)] * k, [np.zeros(m)] * q)

    @property
    def k(self):
        return len(self.w_cov)

    @property
    def q(self):
        return len(self.d_cov)

    @property
    def has_vectors(self):
        return all(w is not None for w in self.w_comm) and all(d is not None for d in self.d_sense)

    def total_power(self):
        return float(sum(np.real(np.trace(w)) for w in self.w_cov) + sum(np.real(np.trace(d)) for d in self.d_cov))


def steering_product(a, g):
    """A = diag(a^H) G."""
    return np.conj(a)[:, None] * g


def effective_user_channel(h, phi_t, g):
    """Row vector h^H diag(phi_t) G."""
    return (np.conj(h) * phi_t) @ g


def _check_dims(a, phi, g, d):
    n, m = g.shape
    if a.shape != (n,) or phi.shape != (n,) or d.shape != (m,):
        raise InvalidInput(f"dimension mismatch: a{a.shape} phi{phi.shape} G{g.shape} d{d.shape}")


def beam_pattern_gain(a_q, phi_r, g, d_q):
    """|a_q^H diag(phi_r) G d_q|^2."""
    a_q, phi_r, g, d_q = (np.asarray(x) for x in (a_q, phi_r, g, d_q))
    _check_dims(a_q, phi_r, g, d_q)
    return float(np.abs(np.conj(a_q) @ (phi_r * (g @ d_q))) ** 2)


def beam_pattern_gain_lifted(a_q, phi_r, g, d_cov):
    """v^H A_q D_q A_q^H v with v = conj(phi_r)."""
    a_q, phi_r, g = (np.asarray(x) for x in (a_q, phi_r, g))
    aq = steering_product(a_q, g)
    v = np.conj(phi_r)
    return float(np.real(v.conj() @ aq @ d_cov @ aq.conj().T @ v))


def _gain_vectors(phi_r, channels):
    """g_q = A_q^H v; the reflected response seen by the DFBS toward target q."""
    v = np.conj(phi_r)
    return [steering_product(a, channels.g).conj().T @ v for a in channels.a_targets]


def _quad(cov, x):
    return float(np.real(np.conj(x) @ cov @ x))


def beam_gains(bf, phi_r, channels):
    gv = _gain_vectors(phi_r, channels)
    return np.array([_quad(bf.d_cov[q], gv[q]) for q in range(bf.q)])


def sensing_interference(q, bf, phi_r, channels):
    """Communication leakage toward target q plus beam q's leakage toward the other targets."""
    if not 0 <= q < len(channels.a_targets) or q >= bf.q:
        raise InvalidInput(f"target index {q} out of range")
    gv = _gain_vectors(phi_r, channels)
    w_sum = sum(bf.w_cov) if bf.k else 0.0
    total = _quad(w_sum, gv[q]) if bf.k else 0.0
    for qq in range(len(gv)):
        if qq != q:
            total += _quad(bf.d_cov[q], gv[qq])
    return total


def user_sinr(k, bf, phi_t, channels, sigma2):
    """SINR of user k; vector form when beamformers are available."""
    if not 0 <= k < len(channels.h_users) or k >= bf.k:
        raise InvalidInput(f"user index {k} out of range")
    hh = effective_user_channel(channels.h_users[k], phi_t, channels.g)
    if all(w is not None for w in bf.w_comm):
        powers = [float(np.abs(hh @ w) ** 2) for w in bf.w_comm]
    else:
        powers = [_quad(w, hh.conj()) for w in bf.w_cov]
    sense = sum(_quad(d, hh.conj()) for d in bf.d_cov)
    signal = powers[k]
    interference = sum(powers) - signal + sense
    return signal / (interference + sigma2)


def user_sinr_trace(k, bf, phi_t, channels, sigma2):
    """SINR from the trace form Tr(h^H h W) of the covariances."""
    hh = effective_user_channel(channels.h_users[k], phi_t, channels.g)
    hmat = np.outer(hh.conj(), hh)
    tr = [float(np.real(np.trace(hmat @ w))) for w in bf.w_cov]
    sense = float(np.real(np.trace(hmat @ sum(bf.d_cov)))) if bf.q else 0.0
    return tr[k] / (sum(tr) + sense - tr[k] + sigma2)


def sinr_condition_ratio(k, bf, phi_t, channels, sigma2, gamma):
    """The linear rewrite of SINR_k >= gamma, returned as (lhs, rhs)."""
    hh = effective_user_channel(channels.h_users[k], phi_t, channels.g)
    hmat = np.outer(hh.conj(), hh)
    total = sum(bf.w_cov) + (sum(bf.d_cov) if bf.q else 0.0)
    lhs = (1.0 + 1.0 / gamma) * float(np.real(np.trace(hmat @ bf.w_cov[k])))
    rhs = float(np.real(np.trace(hmat @ total))) + sigma2
    return lhs, rhs


@dataclass
class ConstraintReport:
    min_gain: float
    gains: np.ndarray
    interference: np.ndarray
    sinrs: np.ndarray
    total_power: float
    energy_residuals: np.ndarray
    feasible: bool
    violations: list
    tol: float

    def worst(self):
        """Constraint id and margin of the largest violation."""
        if not self.violations:
            return None, 0.0
        return max(self.violations, key=lambda v: v[1])

    def as_rows(self):
        rows = [("min_gain", "", self.min_gain)]
        rows += [("gain", q, v) for q, v in enumerate(self.gains)]
        rows += [("interference", q, v) for q, v in enumerate(self.interference)]
        rows += [("sinr", k, v) for k, v in enumerate(self.sinrs)]
        rows.append(("total_power", "", self.total_power))
        rows += [("energy_residual", n, v) for n, v in enumerate(self.energy_residuals)]
        rows.append(("feasible", "", int(self.feasible)))
        rows += [("margin:" + cid, "", m) for cid, m in self.violations]
        return rows


def audit(bf, star, channels, cfg, tol=None):
    """Evaluate every constraint of the joint design problem.

    Margins are positive when violated: relative for C1-C3, absolute for the
    per-element energy split (C4), amplitude bounds (C5) and PSD-ness of the
    covariances (C6/C7, eigenvalue relative to the trace).
    """
    tol = cfg.audit_tol if tol is None else tol
    gains = beam_gains(bf, star.phi_r, channels)
    interference = np.array([sensing_interference(q, bf, star.phi_r, channels) for q in range(bf.q)])
    sinrs = np.array([user_sinr(k, bf, star.phi_t, channels, cfg.noise_power) for k in range(bf.k)])
    power = bf.total_power()
    resid = star.energy_residuals()

    margins = []
    margins += [(f"C1[q={q}]", (f - cfg.eta) / cfg.eta) for q, f in enumerate(interference)]
    margins += [(f"C2[k={k}]", (cfg.gamma - s) / cfg.gamma) for k, s in enumerate(sinrs)]
    margins.append(("C3", (power - cfg.p_max) / cfg.p_max))
    margins += [(f"C4[n={n}]", abs(r)) for n, r in enumerate(resid)]
    amp = np.maximum(star.beta_r, star.beta_t)
    margins += [(f"C5[n={n}]", a - 1.0) for n, a in enumerate(amp)]
    for name, covs in (("C7", bf.w_cov), ("C6", bf.d_cov)):
        for i, c in enumerate(covs):
            lam = np.linalg.eigvalsh(hermitian_part(c))
            scale = max(float(np.sum(np.abs(lam))), 1e-300)
            margins.append((f"{name}[{i}]", -lam[0] / scale))
    feasible = all(m <= tol for _, m in margins)
    min_gain = float(np.min(gains)) if len(gains) else 0.0
    return ConstraintReport(min_gain, gains, interference, sinrs, power, resid, feasible, margins, tol)
