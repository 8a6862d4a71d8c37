"""Scenario construction: configuration, geometry, steering vectors and Rician channels.

Conventions
-----------
* The STAR-RIS lies in the (X, Z) plane with its normal along +Y. Directions
  with y > 0 belong to the reflection half-space (targets, DFBS), y < 0 to
  the transmission half-space (users).
* Azimuth is measured in the X-Y plane from +X, elevation from the X-Y plane
  toward +Z, so a unit direction is (cos az cos el, sin az cos el, sin el).
* STAR-RIS element (p, s), p along x and s along z, sits at flat index
  ``s * nx + p`` with half-wavelength spacing.
* Linear power is in milliwatts; dB/dBm values exist only at the file boundary.
"""

from dataclasses import dataclass, field, fields, asdict, replace
import math

import numpy as np
import yaml

from .errors import ConfigError, InvalidInput

TABLE1_DOAS = ((120.0, 30.0), (60.0, 60.0), (30.0, 75.0))


@dataclass(frozen=True)
class SystemConfig:
    m_antennas: int = 6
    nx: int = 8
    nz: int = 5
    k_users: int = 2
    q_targets: int = 3
    p_max_dbm: float = 10.0
    gamma_db: float = 6.0
    eta: float = 1e-3
    noise_dbm: float = -110.0
    target_doas: tuple = TABLE1_DOAS
    bs_position: tuple = (20.0, 30.0, 0.0)
    ris_position: tuple = (0.0, 0.0, 0.0)
    user_distance_range: tuple = (30.0, 50.0)
    rician_kappa: float = 1.0
    pathloss_l0_db: float = 30.0
    pathloss_exp_br: float = 1.0
    pathloss_exp_ru: float = 1.0
    l_pulses: int = 8
    seed: int = 0
    gamma_max_iters: int = 30
    delta_th: float = 1e-3
    randomization_count: int = 500
    # not in the system-parameter table
    bs_array_axis: str = "x"
    target_range: float = 20.0
    audit_tol: float = 1e-5
    solver_tol: float = 1e-9
    solver_max_iters: int = 100
    rank_one_ratio: float = 1e-4
    # relative margin added to gamma inside the relaxed sub-problems only
    sinr_backoff: float = 1e-3

    def __post_init__(self):
        validate(self)

    @property
    def n_elements(self):
        return self.nx * self.nz

    @property
    def p_max(self):
        return float(10.0 ** (self.p_max_dbm / 10.0))

    @property
    def gamma(self):
        return float(10.0 ** (self.gamma_db / 10.0))

    @property
    def noise_power(self):
        return float(10.0 ** (self.noise_dbm / 10.0))

    @property
    def pathloss_l0(self):
        """Linear power attenuation at the 1 m reference distance."""
        return float(10.0 ** (-self.pathloss_l0_db / 10.0))

    def with_updates(self, **changes):
        return replace(self, **changes)

    def to_dict(self):
        d = asdict(self)
        d["target_doas"] = [list(v) for v in self.target_doas]
        for k in ("bs_position", "ris_position", "user_distance_range"):
            d[k] = list(d[k])
        return d


_INT_FIELDS = {"m_antennas", "nx", "nz", "k_users", "q_targets", "l_pulses", "seed",
               "gamma_max_iters", "randomization_count", "solver_max_iters"}
_STR_FIELDS = {"bs_array_axis"}
_VEC_FIELDS = {"bs_position": 3, "ris_position": 3, "user_distance_range": 2}


def validate(cfg):
    def bad(name, msg):
        raise ConfigError(f"{name}: {msg}", field=name)

    for name in ("m_antennas", "nx", "nz", "k_users", "q_targets"):
        if getattr(cfg, name) < 1:
            bad(name, "must be >= 1")
    if cfg.l_pulses < cfg.q_targets:
        bad("l_pulses", f"must be >= q_targets ({cfg.q_targets})")
    if not cfg.eta > 0:
        bad("eta", "must be > 0")
    if cfg.rician_kappa < 0:
        bad("rician_kappa", "must be >= 0")
    for name in ("p_max_dbm", "gamma_db", "noise_dbm", "pathloss_l0_db"):
        if not math.isfinite(getattr(cfg, name)):
            bad(name, "must be finite")
    if len(cfg.target_doas) != cfg.q_targets:
        bad("target_doas", f"expected {cfg.q_targets} entries, got {len(cfg.target_doas)}")
    for az, el in cfg.target_doas:
        if not 0.0 <= az <= 180.0:
            bad("target_doas", f"azimuth {az} outside [0, 180]")
        if not 0.0 <= el <= 90.0:
            bad("target_doas", f"elevation {el} outside [0, 90]")
    lo, hi = cfg.user_distance_range
    if not 0 < lo <= hi:
        bad("user_distance_range", "need 0 < min <= max")
    if cfg.bs_array_axis not in ("x", "y", "z"):
        bad("bs_array_axis", "must be one of x, y, z")
    if cfg.target_range <= 0:
        bad("target_range", "must be > 0")
    if cfg.gamma_max_iters < 1:
        bad("gamma_max_iters", "must be >= 1")
    if cfg.delta_th <= 0:
        bad("delta_th", "must be > 0")
    if cfg.randomization_count < 0:
        bad("randomization_count", "must be >= 0")
    for name in ("audit_tol", "solver_tol", "rank_one_ratio"):
        if not getattr(cfg, name) > 0:
            bad(name, "must be > 0")
    if not 0 <= cfg.sinr_backoff < 1:
        bad("sinr_backoff", "must lie in [0, 1)")
    if cfg.solver_max_iters < 1:
        bad("solver_max_iters", "must be >= 1")


def _coerce(name, value):
    if name in _INT_FIELDS:
        if isinstance(value, bool) or not isinstance(value, int):
            if isinstance(value, float) and value.is_integer():
                return int(value)
            raise ConfigError(f"{name}: expected an integer, got {value!r}", field=name)
        return value
    if name in _STR_FIELDS:
        if not isinstance(value, str):
            raise ConfigError(f"{name}: expected a string, got {value!r}", field=name)
        return value
    if name in _VEC_FIELDS:
        n = _VEC_FIELDS[name]
        if not isinstance(value, (list, tuple)) or len(value) != n:
            raise ConfigError(f"{name}: expected a list of {n} numbers", field=name)
        return tuple(_coerce_float(name, v) for v in value)
    if name == "target_doas":
        if not isinstance(value, (list, tuple)):
            raise ConfigError("target_doas: expected a list of [azimuth, elevation] pairs", field=name)
        out = []
        for pair in value:
            if not isinstance(pair, (list, tuple)) or len(pair) != 2:
                raise ConfigError("target_doas: each entry must be [azimuth, elevation]", field=name)
            out.append(tuple(_coerce_float(name, v) for v in pair))
        return tuple(out)
    return _coerce_float(name, value)


def _coerce_float(name, value):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{name}: expected a number, got {value!r}", field=name)
    return float(value)


def config_from_mapping(data):
    """Build a :class:`SystemConfig` from a plain mapping of boundary values."""
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a mapping of field names to values")
    known = {f.name for f in fields(SystemConfig)}
    kwargs = {}
    for key, value in data.items():
        if key not in known:
            raise ConfigError(f"{key}: unknown field", field=key)
        kwargs[key] = _coerce(key, value)
    q = kwargs.get("q_targets", SystemConfig.q_targets)
    if "target_doas" not in kwargs:
        if q > len(TABLE1_DOAS):
            raise ConfigError("target_doas: required when q_targets exceeds the default list", field="target_doas")
        kwargs["target_doas"] = TABLE1_DOAS[:q]
    return SystemConfig(**kwargs)


def load_config(path):
    """Read a YAML (or JSON) scenario file; every field is optional."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    return config_from_mapping(data)


def save_config(cfg, path):
    with open(path, "w", encoding="utf-8") as fh:
        yaml.safe_dump(cfg.to_dict(), fh, sort_keys=False)


# ---------------------------------------------------------------------------
# geometry


def unit_direction(azimuth, elevation):
    return np.array([
        math.cos(azimuth) * math.cos(elevation),
        math.sin(azimuth) * math.cos(elevation),
        math.sin(elevation),
    ])


def _upa_from_direction(u, nx, nz):
    p = np.arange(nx)
    s = np.arange(nz)
    phase = s[:, None] * u[2] + p[None, :] * u[0]
    return np.exp(-1j * np.pi * phase).reshape(-1)


def steering_vector(azimuth, elevation, nx, nz):
    """UPA response of the STAR-RIS toward (azimuth, elevation), angles in radians.

    Entry (p, s) is exp(-j pi (p cos(az) cos(el) + s sin(el))).
    """
    if nx < 1 or nz < 1:
        raise InvalidInput("nx and nz must be >= 1")
    return _upa_from_direction(unit_direction(azimuth, elevation), nx, nz)


def ula_vector(u, m, axis="x"):
    """Half-wavelength ULA response along ``axis`` for unit direction ``u``."""
    k = "xyz".index(axis)
    return np.exp(-1j * np.pi * np.arange(m) * u[k])


def rician_weights(kappa):
    """(LoS, NLoS) amplitude weights sqrt(k/(k+1)), sqrt(1/(k+1))."""
    if np.isinf(kappa):
        return 1.0, 0.0
    return math.sqrt(kappa / (kappa + 1.0)), math.sqrt(1.0 / (kappa + 1.0))


def pathloss(l0, distance, exponent, d0=1.0):
    return l0 * (distance / d0) ** (-exponent)


def _cn(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)


@dataclass
class ChannelSet:
    g: np.ndarray
    h_users: list
    a_targets: list
    g_los: np.ndarray = None
    user_positions: np.ndarray = None
    d_br: float = 0.0
    extras: dict = field(default_factory=dict)

    @property
    def n(self):
        return self.g.shape[0]

    @property
    def m(self):
        return self.g.shape[1]


def generate_channels(cfg, rng):
    """Draw the BS->RIS matrix, RIS->user vectors and target steering vectors.

    Random draws happen in a fixed order (G scattering, user distances, user
    azimuths, user scattering) so the result is a deterministic function of
    the generator state.
    """
    nx, nz, m = cfg.nx, cfg.nz, cfg.m_antennas
    n = nx * nz
    ris = np.asarray(cfg.ris_position, dtype=float)
    bs = np.asarray(cfg.bs_position, dtype=float)
    to_bs = bs - ris
    d_br = float(np.linalg.norm(to_bs))
    if d_br <= 0:
        raise InvalidInput("DFBS and STAR-RIS positions coincide")
    u_rb = to_bs / d_br
    los_w, nlos_w = rician_weights(cfg.rician_kappa)

    a_toward_bs = _upa_from_direction(u_rb, nx, nz)
    b_toward_ris = ula_vector(-u_rb, m, cfg.bs_array_axis)
    g_los = np.outer(a_toward_bs, b_toward_ris.conj())
    g_nlos = _cn(rng, (n, m))
    amp = math.sqrt(pathloss(cfg.pathloss_l0, d_br, cfg.pathloss_exp_br))
    g = amp * (los_w * g_los + nlos_w * g_nlos)

    lo, hi = cfg.user_distance_range
    dist = rng.uniform(lo, hi, cfg.k_users)
    az = rng.uniform(math.pi, 2.0 * math.pi, cfg.k_users)
    h_users = []
    positions = np.zeros((cfg.k_users, 3))
    for k in range(cfg.k_users):
        u = unit_direction(az[k], 0.0)
        positions[k] = ris + dist[k] * u
        h_los = _upa_from_direction(u, nx, nz)
        h_nlos = _cn(rng, n)
        amp_k = math.sqrt(pathloss(cfg.pathloss_l0, dist[k], cfg.pathloss_exp_ru))
        h_users.append(amp_k * (los_w * h_los + nlos_w * h_nlos))

    a_targets = [steering_vector(math.radians(a), math.radians(e), nx, nz) for a, e in cfg.target_doas]
    return ChannelSet(g, h_users, a_targets, g_los=amp * g_los, user_positions=positions, d_br=d_br)


def make_rng(seed):
    return np.random.default_rng(seed)


def scenario(cfg, seed=None):
    """Convenience: channels for ``cfg`` drawn from a fresh generator.

    Returns (channels, rng) so callers continue the same random stream.
    """
    rng = make_rng(cfg.seed if seed is None else seed)
    return generate_channels(cfg, rng), rng
