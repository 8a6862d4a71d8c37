"""Property-based checks of the invariants listed for each module."""

import math

import numpy as np
from hypothesis import given, settings, strategies as st

from star_isac import sdp
from star_isac.metrics import (BeamformerSet, audit, beam_pattern_gain, sensing_interference, user_sinr)
from star_isac.numerics import hermitian_eig, trace_inner
from star_isac.optimizer import build_p31, build_p51, initial_star, recover_beamformers
from star_isac.scenario import SystemConfig, generate_channels, make_rng, rician_weights, steering_vector
from star_isac.waveform import detect, make_codebook

from helpers import random_instance

seeds = st.integers(0, 2**32 - 1)
FAST = settings(max_examples=40, deadline=None)
SLOW = settings(max_examples=20, deadline=None)


def _herm(rng, n, psd=False):
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return z @ z.conj().T if psd else 0.5 * (z + z.conj().T)


@FAST
@given(st.floats(0, math.pi), st.floats(0, math.pi / 2), st.integers(1, 9), st.integers(1, 9))
def test_steering_unit_modulus(az, el, nx, nz):
    a = steering_vector(az, el, nx, nz)
    assert a.shape == (nx * nz,)
    assert np.max(np.abs(np.abs(a) - 1.0)) <= 1e-12


@SLOW
@given(seeds, st.integers(1, 4), st.integers(1, 3))
def test_channels_deterministic(seed, m, nz):
    cfg = SystemConfig(m_antennas=m, nx=2, nz=nz)
    a, b = generate_channels(cfg, make_rng(seed)), generate_channels(cfg, make_rng(seed))
    assert np.array_equal(a.g, b.g)
    assert all(np.array_equal(x, y) for x, y in zip(a.h_users, b.h_users))


@FAST
@given(st.floats(0, 1e9), st.floats(0, 1e9))
def test_los_weight_monotone(k1, k2):
    lo, hi = sorted((k1, k2))
    assert rician_weights(lo)[0] <= rician_weights(hi)[0] + 1e-15


@FAST
@given(seeds, st.integers(1, 12))
def test_eig_reconstruction(seed, n):
    m = _herm(np.random.default_rng(seed), n)
    lam, v = hermitian_eig(m)
    assert np.all(np.isreal(lam))
    assert np.linalg.norm((v * lam) @ v.conj().T - m) <= 1e-8 * (1 + np.linalg.norm(m))


@FAST
@given(seeds, st.integers(1, 8))
def test_trace_inner_psd_pair_nonnegative(seed, n):
    rng = np.random.default_rng(seed)
    a, b = _herm(rng, n, True), _herm(rng, n, True)
    assert trace_inner(a, b) >= -1e-12 * np.linalg.norm(a) * np.linalg.norm(b)
    assert abs(trace_inner(a, b) - trace_inner(b, a)) <= 1e-12 * max(1.0, abs(trace_inner(a, b)))


@FAST
@given(seeds, st.floats(0, 2 * math.pi))
def test_sensing_metrics_phase_invariant(seed, theta):
    ch, bf, star = random_instance(np.random.default_rng(seed))
    rot = np.exp(1j * theta) * star.phi_r
    for q in range(bf.q):
        g0 = beam_pattern_gain(ch.a_targets[q], star.phi_r, ch.g, bf.d_sense[q])
        g1 = beam_pattern_gain(ch.a_targets[q], rot, ch.g, bf.d_sense[q])
        assert abs(g0 - g1) <= 1e-10 * max(g0, 1e-300)
        f0 = sensing_interference(q, bf, star.phi_r, ch)
        f1 = sensing_interference(q, bf, rot, ch)
        assert abs(f0 - f1) <= 1e-10 * max(f0, 1e-300)


@FAST
@given(seeds, st.floats(1e-6, 10.0))
def test_metrics_finite_nonnegative(seed, sigma2):
    ch, bf, star = random_instance(np.random.default_rng(seed))
    vals = [beam_pattern_gain(ch.a_targets[q], star.phi_r, ch.g, bf.d_sense[q]) for q in range(bf.q)]
    vals += [sensing_interference(q, bf, star.phi_r, ch) for q in range(bf.q)]
    vals += [user_sinr(k, bf, star.phi_t, ch, sigma2) for k in range(bf.k)]
    vals.append(bf.total_power())
    assert all(np.isfinite(v) and v >= 0 for v in vals)


@FAST
@given(seeds)
def test_beamformer_covariances_match_vectors(seed):
    _, bf, _ = random_instance(np.random.default_rng(seed))
    for v, c in zip(bf.w_comm + bf.d_sense, bf.w_cov + bf.d_cov):
        ref = np.outer(v, v.conj())
        assert np.linalg.norm(c - ref) <= 1e-6 * max(np.linalg.norm(ref), 1e-300)
        assert np.linalg.eigvalsh(c)[0] >= -1e-8 * max(1.0, np.trace(c).real)


@FAST
@given(st.integers(1, 6), st.integers(0, 10))
def test_codebook_gram(q, extra):
    cb = make_codebook(q, q + extra)
    assert np.max(np.abs(cb.gram() - (q + extra) * np.eye(q))) <= 1e-10
    assert np.max(np.abs(np.abs(cb.codes) - 1)) <= 1e-12


@FAST
@given(st.complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False),
       st.floats(0, 1e6), st.floats(0, 1e6))
def test_detection_monotone_in_threshold(z, mu1, mu2):
    lo, hi = sorted((mu1, mu2))
    assert detect(z, hi) <= detect(z, lo)


def _random_sdp(seed, n=3):
    rng = np.random.default_rng(seed)
    p = sdp.ConicProblem([n], 0, objective_blocks={0: _herm(rng, n)})
    p.add({0: np.eye(n)}, {}, 1.0, "==")
    b = _herm(rng, n, True)
    lam = np.linalg.eigvalsh(b)
    # feasible by construction: the bottom eigenvector meets the budget with room to spare
    p.add({0: b}, {}, float(lam[0] + rng.uniform(0.1, 1.0) * np.mean(lam)), "<=")
    return p


@SLOW
@given(seeds)
def test_complex_and_real_embedding_agree(seed):
    p = _random_sdp(seed)
    tol = 1e-7
    a, b = sdp.solve(p, tol=tol), sdp.solve(sdp.real_embedding(p), tol=tol)
    assert a.status == b.status == sdp.OPTIMAL
    assert abs(a.objective_value - b.objective_value) <= 10 * tol * (1 + abs(a.objective_value))


@SLOW
@given(seeds, st.floats(0.01, 100.0))
def test_objective_scale_covariance(seed, c):
    p = _random_sdp(seed)
    tol = 1e-7
    q = sdp.ConicProblem(p.block_dims, 0, {0: c * p.objective_blocks[0]}, {}, p.constraints)
    a, b = sdp.solve(p, tol=tol), sdp.solve(q, tol=tol)
    assert abs(c * a.objective_value - b.objective_value) <= 10 * tol * (1 + abs(b.objective_value))


@SLOW
@given(seeds)
def test_optimal_solutions_pass_independent_check(seed):
    p = _random_sdp(seed)
    s = sdp.solve(p, tol=1e-8)
    rep = sdp.check_solution(p, s)
    assert s.status == sdp.OPTIMAL
    assert rep.max_violation <= 1e-8 * (1 + max(abs(c.rhs) for c in p.constraints))
    assert min(rep.psd_margins) >= -1e-7


@SLOW
@given(seeds)
def test_subproblem_coefficients_hermitian(seed):
    cfg = SystemConfig(m_antennas=3, nx=2, nz=2, q_targets=2, target_doas=((110, 20), (45, 60)))
    rng = make_rng(seed)
    ch = generate_channels(cfg, rng)
    star = initial_star(cfg, rng)
    _, bf, _ = random_instance(rng, n=4, m=3, k=2, q=2)
    for p in (build_p31(ch, star, cfg), build_p51(ch, bf, cfg)):
        for con in p.constraints:
            for m in con.blocks.values():
                assert np.array_equal(m, m.conj().T)


@FAST
@given(seeds, st.floats(1e-7, 1e-2))
def test_audit_feasible_iff_margins_within_tol(seed, tol):
    rng = np.random.default_rng(seed)
    cfg = SystemConfig(m_antennas=3, nx=2, nz=2, q_targets=2, target_doas=((110, 20), (45, 60)), audit_tol=tol)
    ch = generate_channels(cfg, rng)
    star = initial_star(cfg, rng)
    _, bf, _ = random_instance(rng, n=4, m=3, k=2, q=2)
    scale = math.sqrt(cfg.p_max / max(bf.total_power(), 1e-300)) * rng.uniform(0.5, 1.5)
    bf = BeamformerSet.from_vectors([scale * w for w in bf.w_comm], [scale * d for d in bf.d_sense])
    rep = audit(bf, star, ch, cfg)
    assert rep.feasible == all(m <= tol for _, m in rep.violations)


@FAST
@given(seeds)
def test_rank_one_recovery_identity(seed):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    xx = np.outer(x, x.conj())
    s = sdp.ConicSolution([xx], np.zeros(0), 0.0, sdp.OPTIMAL, 0.0, 0.0)
    w = recover_beamformers(s, 1).w_comm[0]
    assert np.linalg.norm(np.outer(w, w.conj()) - xx) <= 1e-8 * max(1.0, np.linalg.norm(xx))
