"""Signature-sequence (SS) modulated transmission, echo simulation and detection.

Time indices are 0-based: transmit column ``l`` is pulse ``l``, and an echo
record of length ``L_p + max(delays)`` holds sample ``l`` of the received
signal. A target with delay ``tau`` contributes ``H_q x[l - tau]`` for
``tau <= l < tau + L_p``.
"""

from dataclasses import dataclass
import math

import numpy as np

from .errors import DegenerateFilter, InvalidInput
from .scenario import pathloss


@dataclass
class SSCodebook:
    l_pulses: int
    codes: np.ndarray  # (Q, L_p)

    @property
    def q(self):
        return self.codes.shape[0]

    def gram(self):
        return self.codes.conj() @ self.codes.T


@dataclass
class EchoRecord:
    samples: np.ndarray  # (M, L_p + max delay)
    delays: np.ndarray
    target_gains: np.ndarray


def make_codebook(q_targets, l_pulses):
    """DFT codes c_q[l] = exp(j 2 pi q l / L_p), q = 0..Q-1."""
    if q_targets < 1 or l_pulses < q_targets:
        raise InvalidInput(f"need 1 <= q_targets <= l_pulses, got Q={q_targets}, L_p={l_pulses}")
    q = np.arange(q_targets)[:, None]
    l = np.arange(l_pulses)[None, :]
    return SSCodebook(l_pulses, np.exp(2j * np.pi * q * l / l_pulses))


def synthesize_transmit(bf, symbols, codebook):
    """x[l] = sum_k w_k s_k[l] + sum_q d_q c_q[l] as an (M, L_p) matrix."""
    lp = codebook.l_pulses
    symbols = np.asarray(symbols, dtype=complex)
    symbols = symbols.reshape(len(bf.w_comm), -1) if symbols.size else np.zeros((len(bf.w_comm), lp))
    if symbols.shape != (len(bf.w_comm), lp):
        raise InvalidInput(f"symbols have {symbols.shape[1]} slots, codebook has {lp}")
    if codebook.q != len(bf.d_sense):
        raise InvalidInput("codebook size does not match the number of sensing beams")
    if not bf.has_vectors:
        raise InvalidInput("beamformer vectors are required to synthesize a waveform")
    m = (bf.w_comm + bf.d_sense)[0].shape[0]
    x = np.zeros((m, lp), dtype=complex)
    for w, s in zip(bf.w_comm, symbols):
        x += np.outer(w, s)
    for d, c in zip(bf.d_sense, codebook.codes):
        x += np.outer(d, c)
    return x


def round_trip_matrix(a_q, beta_q, phi_r, g):
    """H_q = G^H Phi_r^H a_q beta_q a_q^H Phi_r G (rank one, M x M)."""
    left = g.conj().T @ (np.conj(phi_r) * a_q)
    right = np.conj(a_q) @ (phi_r[:, None] * g)
    return beta_q * np.outer(left, right)


def default_target_gains(cfg, rng):
    """Round-trip path-loss amplitude times a uniformly random reflection phase."""
    amp = pathloss(cfg.pathloss_l0, cfg.target_range, cfg.pathloss_exp_ru)
    phase = rng.uniform(0.0, 2.0 * math.pi, cfg.q_targets)
    return amp * np.exp(1j * phase)


def simulate_echo(x, star, channels, gains, delays, sigma_z2, rng):
    """Received DFBS samples y[l] = sum_q H_q x[l - tau_q] + n[l]."""
    delays = np.asarray(delays, dtype=int)
    gains = np.asarray(gains, dtype=complex)
    if np.any(delays < 0):
        raise InvalidInput("delays must be nonnegative")
    if len(delays) != len(channels.a_targets) or len(gains) != len(delays):
        raise InvalidInput("need one gain and one delay per target")
    m, lp = x.shape
    length = lp + int(delays.max(initial=0))
    y = np.zeros((m, length), dtype=complex)
    for a, beta, tau in zip(channels.a_targets, gains, delays):
        y[:, tau:tau + lp] += round_trip_matrix(a, beta, star.phi_r, channels.g) @ x
    if sigma_z2 > 0:
        noise = (rng.standard_normal(y.shape) + 1j * rng.standard_normal(y.shape)) * math.sqrt(sigma_z2 / 2.0)
        y = y + noise
    return EchoRecord(y, delays, gains)


def matched_filter(q, star, channels, d_q, beta_q):
    """Unit-norm u_q along H_q d_q; the filter output is u_q^H y."""
    h = round_trip_matrix(channels.a_targets[q], beta_q, star.phi_r, channels.g)
    chain = h @ np.asarray(d_q, dtype=complex)
    nrm = np.linalg.norm(chain)
    if nrm == 0 or not np.isfinite(nrm):
        raise DegenerateFilter(f"round-trip chain for target {q} vanishes")
    return chain / nrm


def despread(q, echo, u_q, codebook):
    """z_q = c_q^H y~_q with y~_q[l] = u_q^H y[l + tau_q]."""
    tau = int(echo.delays[q])
    lp = codebook.l_pulses
    if tau + lp > echo.samples.shape[1]:
        raise InvalidInput("despreading window exceeds the echo record")
    filtered = np.conj(u_q) @ echo.samples[:, tau:tau + lp]
    return complex(np.conj(codebook.codes[q]) @ filtered)


def alpha(q, i, star, channels, bf, gains, u_q):
    """alpha_{q,i} = u_q^H H_i d_i."""
    h = round_trip_matrix(channels.a_targets[i], gains[i], star.phi_r, channels.g)
    return complex(np.conj(u_q) @ h @ bf.d_sense[i])


def despread_components(q, star, channels, bf, gains, u_q, codebook):
    """Noiseless, equal-delay, communication-free decomposition of z_q.

    Returns a dict with ``own`` = alpha_{q,q} L_p, ``unassociated`` =
    L_p sum_{i != q} u_q^H H_i d_q (other targets reflecting beam q; bounded
    by the interference constraint) and ``cross_code`` = contribution of the
    other beams d_p, p != q, which orthogonal codes cancel.
    """
    lp = codebook.l_pulses
    hs = [round_trip_matrix(a, b, star.phi_r, channels.g) for a, b in zip(channels.a_targets, gains)]
    gram = codebook.gram()
    own = alpha(q, q, star, channels, bf, gains, u_q) * lp
    unassoc = lp * sum(np.conj(u_q) @ hs[i] @ bf.d_sense[q] for i in range(len(hs)) if i != q)
    cross = sum(
        gram[q, p] * sum(np.conj(u_q) @ h @ bf.d_sense[p] for h in hs)
        for p in range(codebook.q) if p != q
    )
    return {"own": complex(own), "unassociated": complex(unassoc), "cross_code": complex(cross)}


def noise_only_statistic(u_q, codebook, q, sigma_z2, rng, trials):
    """|z_q|^2 under H0 (noise only) for ``trials`` independent records."""
    m = len(u_q)
    lp = codebook.l_pulses
    n = (rng.standard_normal((trials, m, lp)) + 1j * rng.standard_normal((trials, m, lp))) * math.sqrt(sigma_z2 / 2.0)
    filtered = np.einsum("m,tml->tl", np.conj(u_q), n)
    z = filtered @ np.conj(codebook.codes[q])
    return np.abs(z) ** 2


def threshold_for_pfa(sigma_z2, l_pulses, pfa):
    """Analytic threshold: under H0 |z|^2 is exponential with mean L_p sigma_z^2."""
    if not 0 < pfa < 1:
        raise InvalidInput("pfa must lie in (0, 1)")
    return -l_pulses * sigma_z2 * math.log(pfa)


def calibrate_threshold(statistics, pfa):
    """Empirical threshold from noise-only statistics at false-alarm rate ``pfa``."""
    return float(np.quantile(np.asarray(statistics), 1.0 - pfa))


def detect(z_q, mu):
    """Declare the target present iff |z_q|^2 > mu."""
    if mu < 0:
        raise InvalidInput("threshold must be nonnegative")
    return bool(abs(z_q) ** 2 > mu)
