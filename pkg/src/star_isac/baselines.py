"""Comparison schemes: fixed random STAR-RIS phases and a split conventional RIS."""

import math
import time

from . import sdp
from .errors import InfeasibleScenario, NumericalFailure
from .metrics import audit
from .optimizer import (AOTrace, IterationRecord, solve_subproblem, alternating_optimize, build_p31,
                        conventional_mask, infeasibility_advice, initial_star,
                        recover_beamformers)


def random_phase_baseline(channels, cfg, rng):
    """Beamforming only, with the STAR-RIS left at its random initialization.

    The initial coefficients come from the same draw the proposed scheme
    uses, so both schemes start from identical phases for a given seed.
    """
    star = initial_star(cfg, rng)
    t0 = time.perf_counter()
    p = build_p31(channels, star, cfg)
    sol = solve_subproblem(p, cfg)
    wall = (time.perf_counter() - t0) * 1e3
    if sol.status == sdp.INFEASIBLE:
        fams, advice = infeasibility_advice(p, sol)
        raise InfeasibleScenario(f"beamforming sub-problem infeasible; try: {advice}", binding=fams)
    if sol.status != sdp.OPTIMAL:
        raise NumericalFailure(f"beamforming sub-problem: {sol.status} ({sol.message})")
    bf = recover_beamformers(sol, len(channels.h_users), cfg.rank_one_ratio)
    r = float(sol.scalar_values[0])
    trace = AOTrace([IterationRecord(1, r, math.nan, wall, (sol.status,))])
    trace.beamformers, trace.star = bf, star
    trace.report = audit(bf, star, channels, cfg)
    trace.status = "single-pass"
    trace.final_source = "random-phase"
    trace.relaxed_r = r
    trace.rank_one_ok = all(bf.rank_one_w) and all(bf.rank_one_d)
    return trace


def conventional_ris_baseline(channels, cfg, rng):
    """Reflect-only and transmit-only halves in place of the STAR-RIS.

    The first N/2 elements reflect with unit amplitude and the rest transmit;
    phases are still optimized by the alternating loop.
    """
    mask = conventional_mask(channels.n)
    trace = alternating_optimize(channels, cfg, rng, mask=mask)
    if trace.final_source == "initial":
        trace.final_source = "conventional-initial"
    return trace


SCHEMES = {
    "proposed": alternating_optimize,
    "random-phase": random_phase_baseline,
    "conventional-ris": conventional_ris_baseline,
}
