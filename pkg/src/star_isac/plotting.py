"""PNG figures written next to the CSV outputs (non-interactive Agg backend)."""

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .scenario import steering_vector  # noqa: E402

# no software/version stamp, so identical data gives identical files
_META = {"Software": None}


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=100, metadata=_META)
    plt.close(fig)


def plot_convergence(trace, path):
    """R after each sub-problem solve against the outer iteration index."""
    fig, ax = plt.subplots(figsize=(5, 3.5))
    it = [r.index for r in trace.iterations]
    ax.plot(it, [r.r_after_p31 for r in trace.iterations], "o-", label="after beamforming step")
    r51 = [r.r_after_p51 for r in trace.iterations]
    if not all(math.isnan(v) for v in r51):
        ax.plot(it, r51, "s--", label="after STAR-RIS step")
    ax.set_xlabel("iteration")
    ax.set_ylabel("minimum beam pattern gain R (mW)")
    ax.legend()
    ax.grid(True, alpha=0.3)
    _save(fig, path)


def plot_amplitudes(star, path):
    """Per-element reflection and transmission energy split."""
    fig, ax = plt.subplots(figsize=(5, 3.5))
    n = np.arange(star.n)
    ax.bar(n, star.beta_r**2, label=r"$\beta_r^2$")
    ax.bar(n, star.beta_t**2, bottom=star.beta_r**2, label=r"$\beta_t^2$")
    ax.set_xlabel("element index")
    ax.set_ylabel("energy fraction")
    ax.set_ylim(0, 1.05)
    ax.legend(loc="lower right")
    _save(fig, path)


def beam_pattern(bf, star, channels, cfg, elevation_deg, azimuths_deg):
    """Reflected transmit power toward each azimuth at a fixed elevation."""
    total = sum(bf.w_cov) + sum(bf.d_cov)
    out = np.empty(len(azimuths_deg))
    for i, az in enumerate(azimuths_deg):
        a = steering_vector(math.radians(az), math.radians(elevation_deg), cfg.nx, cfg.nz)
        x = channels.g.conj().T @ (np.conj(star.phi_r) * a)
        out[i] = float(np.real(np.conj(x) @ total @ x))
    return out


def plot_beam_pattern(bf, star, channels, cfg, path):
    """Azimuth cuts through each target's elevation, targets marked."""
    az = np.linspace(0.0, 180.0, 361)
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for q, (taz, tel) in enumerate(cfg.target_doas):
        gain = beam_pattern(bf, star, channels, cfg, tel, az)
        line, = ax.plot(az, 10 * np.log10(np.maximum(gain, 1e-30)), label=f"elevation {tel:g} deg")
        ax.axvline(taz, color=line.get_color(), ls=":", lw=1)
    ax.set_xlabel("azimuth (deg)")
    ax.set_ylabel("beam pattern (dBm)")
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    _save(fig, path)


def plot_sweep(param, series, path):
    """Mean minimum gain per scheme against the swept parameter.

    ``series`` maps scheme name to (values, means).
    """
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for scheme, (values, means) in series.items():
        ax.plot(values, means, "o-", label=scheme)
    if param == "eta":
        ax.set_xscale("log")
    ax.set_xlabel(param)
    ax.set_ylabel("mean minimum beam pattern gain (mW)")
    ax.legend()
    ax.grid(True, alpha=0.3)
    _save(fig, path)
