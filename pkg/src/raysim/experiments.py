"""Experiment definitions, configuration handling, and Monte-Carlo running.

A configuration is flat ``key = value`` text.  Omitted keys fall back first to
the experiment's own defaults and then to the global defaults (M=128,
phi_max=0.499*pi, N_RF=8, K=8, transmit SNR swept from -10 to 10 dB, 50
channel realizations); every applied default is echoed to the provenance log.
Results are aggregated per sweep point (mean and standard error over
realizations, keyed by realization index so the output is identical for any
worker count) and written as a delimited table via an atomic rename.
"""

from __future__ import annotations

import logging
import math
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import channel, downlink, geometry, uplink
from .pattern import ElementPattern, wrap_angle

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "ResultRow",
    "EXPERIMENTS",
    "parse_config_text",
    "validate_config",
    "run_experiment",
    "write_table",
]

log = logging.getLogger("raysim")

# element patterns: directional gains chosen so both architectures radiate the
# same total power; the isotropic equivalent sits at -2.816 dB
RAY_DIRECTIONAL = dict(peak_gain_db=5.1335, phi_3db=0.3 * math.pi)
ULA_DIRECTIONAL = dict(peak_gain_db=0.0, phi_3db=math.pi)
ISOTROPIC_GAIN_DB = -2.816

DEFAULT_SNR_DB = tuple(np.arange(-10.0, 10.0 + 1e-9, 2.5))

EXPERIMENTS = {
    "fig_beampattern": "beam patterns of three rays / codewords over the sector",
    "fig_ul_single": "single-user uplink SNR vs transmit SNR",
    "fig_ul_multi_small": "multi-user uplink sum rate, greedy vs exhaustive (small array)",
    "fig_ul_multi_large": "multi-user uplink sum rate, greedy (large array)",
    "fig_convergence": "downlink max-min SINR trace of the alternating optimizer",
    "fig_dl_maxmin": "downlink max-min SINR vs transmit SNR",
}

_EXPERIMENT_DEFAULTS = {
    "fig_beampattern": dict(M=8, N_RF=1, K=1, realizations=1, pattern="isotropic"),
    "fig_ul_single": dict(M=128, N_RF=8, K=1),
    "fig_ul_multi_small": dict(M=6, N_RF=3, K=3),
    "fig_ul_multi_large": dict(M=128, N_RF=8, K=8),
    "fig_convergence": dict(M=6, N_RF=3, K=3, snr_db=(10.0,)),
    "fig_dl_maxmin": dict(M=6, N_RF=3, K=3),
}

_GLOBAL_DEFAULTS = dict(
    experiment="fig_ul_single",
    architecture="raa",
    pattern="directional",
    M=128,
    N_RF=8,
    K=8,
    snr_db=DEFAULT_SNR_DB,
    realizations=50,
    seed=1,
    phi_max=0.499 * math.pi,
    output=None,
    channel_dump=None,
)


class ConfigError(ValueError):
    """Invalid experiment configuration; ``violations`` lists every problem."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    architecture: str
    pattern: str
    M: int
    N_RF: int
    K: int
    snr_db: tuple
    realizations: int
    seed: int
    phi_max: float
    output: str | None = None
    channel_dump: str | None = None


@dataclass(frozen=True)
class ResultRow:
    x_value: float
    metric: str
    mean: float
    stderr: float
    architecture: str
    pattern: str
    realizations: int
    seed: int


def parse_config_text(text: str) -> dict:
    """Parse flat ``key = value`` lines; '#' starts a comment."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError([f"line {lineno}: expected 'key = value', got {raw!r}"])
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def _coerce(key: str, value: str):
    if key in ("M", "N_RF", "K", "realizations", "seed"):
        return int(value)
    if key == "phi_max":
        return float(value)
    if key == "snr_db":
        return tuple(float(v) for v in value.replace(",", " ").split())
    return value


def config_from_mapping(raw: dict) -> ExperimentConfig:
    """Validate raw key/value pairs against the experiment's defaults.

    All violations are collected and reported together; every key filled from
    a default is logged for provenance.
    """
    violations = []
    unknown = set(raw) - set(_GLOBAL_DEFAULTS)
    violations.extend(f"unknown key {k!r}" for k in sorted(unknown))

    values = {}
    for key in _GLOBAL_DEFAULTS:
        if key in raw:
            try:
                values[key] = _coerce(key, raw[key]) if isinstance(raw[key], str) else raw[key]
            except ValueError:
                violations.append(f"key {key!r}: cannot parse value {raw[key]!r}")

    experiment = values.get("experiment", _GLOBAL_DEFAULTS["experiment"])
    if experiment not in EXPERIMENTS:
        violations.append(
            f"unknown experiment {experiment!r}; choose one of {sorted(EXPERIMENTS)}"
        )
        raise ConfigError(violations)
    defaults = dict(_GLOBAL_DEFAULTS)
    defaults.update(_EXPERIMENT_DEFAULTS[experiment])
    if experiment == "fig_ul_single":
        defaults["K"] = 1

    for key, default in defaults.items():
        if key not in values:
            values[key] = default
            if key not in ("output", "channel_dump"):
                log.info("config default applied: %s = %s", key, default)

    if values["architecture"] not in ("raa", "ula"):
        violations.append(f"architecture must be 'raa' or 'ula', got {values['architecture']!r}")
    if values["pattern"] not in ("directional", "isotropic"):
        violations.append(f"pattern must be 'directional' or 'isotropic', got {values['pattern']!r}")
    if values.get("M", 2) < 2:
        violations.append("M must be at least 2")
    if values.get("N_RF", 1) < 1:
        violations.append("N_RF must be at least 1")
    if values.get("K", 1) < 1:
        violations.append("K must be at least 1")
    if experiment == "fig_ul_single" and values.get("K") != 1:
        violations.append("fig_ul_single is single-user; K must be 1")
    if values.get("realizations", 1) < 1:
        violations.append("realizations must be at least 1")
    if not 0.0 < values.get("phi_max", 1.0) < 0.5 * math.pi:
        violations.append("phi_max must lie in (0, pi/2)")
    snrs = values.get("snr_db", ())
    if len(snrs) == 0 or not all(math.isfinite(v) for v in snrs):
        violations.append("snr_db must be a non-empty list of finite values")
    if violations:
        raise ConfigError(violations)

    if values["K"] > values["N_RF"] and experiment in ("fig_convergence", "fig_dl_maxmin"):
        log.warning(
            "K=%d exceeds N_RF=%d: downlink feasibility may bind at low SINR targets",
            values["K"], values["N_RF"],
        )
    return ExperimentConfig(**values)


def validate_config(path) -> ExperimentConfig:
    """Read and validate a configuration file."""
    with open(path) as fh:
        return config_from_mapping(parse_config_text(fh.read()))


def _ray_pattern(kind: str) -> ElementPattern:
    if kind == "directional":
        return ElementPattern.directional(**RAY_DIRECTIONAL)
    return ElementPattern.isotropic(ISOTROPIC_GAIN_DB)


def _ula_pattern(kind: str) -> ElementPattern:
    if kind == "directional":
        return ElementPattern.directional(**ULA_DIRECTIONAL)
    return ElementPattern.isotropic(ISOTROPIC_GAIN_DB)


def _effective_channels(cfg: ExperimentConfig, realization: int):
    """(K, ports) effective channels for the configured architecture, plus the
    drawn path sets for optional dumping."""
    params = channel.ScenarioParams(num_users=cfg.K, seed=cfg.seed)
    paths = [
        channel.sample_paths(params, channel.path_rng(cfg.seed, k, realization))
        for k in range(cfg.K)
    ]
    if cfg.architecture == "raa":
        ray_cfg = geometry.design_ray_array(cfg.M, cfg.phi_max)
        pat = _ray_pattern(cfg.pattern)
        h = np.stack([channel.effective_ray_channel(p, ray_cfg, pat) for p in paths])
    else:
        codebook = geometry.dft_codebook(cfg.M, cfg.phi_max)
        pat = _ula_pattern(cfg.pattern)
        h = np.stack(
            [uplink.project_onto_codebook(channel.ula_channel(p, cfg.M, pat), codebook)
             for p in paths]
        )
    return h, paths


def _parallel(fn, count: int, threads: int) -> list:
    if threads <= 1:
        return [fn(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(count)))


def _mean_stderr(values) -> tuple[float, float]:
    arr = np.asarray(values, dtype=float)
    if len(arr) < 2:
        return float(arr.mean()), 0.0
    return float(arr.mean()), float(arr.std(ddof=1) / math.sqrt(len(arr)))


def run_experiment(config: ExperimentConfig, threads: int = 1) -> list[ResultRow]:
    """Run the configured experiment; returns result rows and, when the config
    names an output path, writes the table (and channel dump) atomically."""
    runner = {
        "fig_beampattern": _run_beampattern,
        "fig_ul_single": _run_uplink_single,
        "fig_ul_multi_small": _run_uplink_multi,
        "fig_ul_multi_large": _run_uplink_multi,
        "fig_convergence": _run_convergence,
        "fig_dl_maxmin": _run_downlink_maxmin,
    }[config.experiment]
    rows, dump = runner(config, threads)
    if config.channel_dump and dump:
        channel.write_channel_dump(config.channel_dump, dump)
    if config.output:
        write_table(config.output, rows)
    return rows


def _collect_dump(paths_per_realization) -> dict:
    return {
        (r, k): p
        for r, user_paths in enumerate(paths_per_realization)
        for k, p in enumerate(user_paths)
    }


def _row(config, x, metric, mean, stderr=0.0) -> ResultRow:
    return ResultRow(
        x_value=float(x),
        metric=metric,
        mean=float(mean),
        stderr=float(stderr),
        architecture=config.architecture,
        pattern=config.pattern,
        realizations=config.realizations,
        seed=config.seed,
    )


def _run_beampattern(cfg: ExperimentConfig, threads: int):
    """Sector sweep of |f| for three beams around boresight (no channels)."""
    phis = np.linspace(-cfg.phi_max, cfg.phi_max, 1001)
    rows = []
    if cfg.architecture == "raa":
        pat = ElementPattern.isotropic(0.0) if cfg.pattern == "isotropic" else _ray_pattern(cfg.pattern)
        beams = [(-0.3 * math.pi, "eta_-0.30pi"), (0.0, "eta_+0.00pi"), (0.3 * math.pi, "eta_+0.30pi")]
        for eta, label in beams:
            zeta = phis - eta
            mags = cfg.M * np.abs(geometry.dirichlet_kernel(cfg.M, np.sin(zeta)))
            mags = mags * np.sqrt(pat.gain(wrap_angle(zeta)))
            rows.extend(_row(cfg, p, f"beam_{label}", m) for p, m in zip(phis, mags))
    else:
        pat = ElementPattern.isotropic(0.0) if cfg.pattern == "isotropic" else _ula_pattern(cfg.pattern)
        g = np.sqrt(pat.gain(wrap_angle(phis)))
        for n in (-1, 0, 1):
            mags = g * cfg.M * np.abs(geometry.dirichlet_kernel(cfg.M, np.sin(phis) - 2.0 * n / cfg.M))
            rows.extend(_row(cfg, p, f"beam_n{n:+d}", m) for p, m in zip(phis, mags))
    return rows, None


def _run_uplink_single(cfg: ExperimentConfig, threads: int):
    """Single-user selection gain; the SNR sweep is a pure scale factor."""

    def one(realization):
        h, paths = _effective_channels(cfg, realization)
        result = uplink.single_user_select_and_mrc(h[0], cfg.N_RF, 1.0, cfg.M)
        return result.sinr[0], paths  # SNR at 0 dB transmit SNR

    results = _parallel(one, cfg.realizations, threads)
    gains_db = 10.0 * np.log10([r[0] for r in results])
    rows = []
    for snr in cfg.snr_db:
        mean, err = _mean_stderr(gains_db + snr)
        rows.append(_row(cfg, snr, "snr_db", mean, err))
    return rows, _collect_dump([r[1] for r in results])


def _run_uplink_multi(cfg: ExperimentConfig, threads: int):
    """Greedy (and, for the small array, exhaustive) sum rates over the sweep."""
    with_exhaustive = cfg.experiment == "fig_ul_multi_small"

    def one(realization):
        h, paths = _effective_channels(cfg, realization)
        greedy, exhaustive = [], []
        for snr in cfg.snr_db:
            pt_bar = 10.0 ** (snr / 10.0)
            greedy.append(uplink.greedy_ray_selection(h, cfg.N_RF, pt_bar, cfg.M).sum_rate)
            if with_exhaustive:
                exhaustive.append(
                    uplink.exhaustive_ray_selection(h, cfg.N_RF, pt_bar, cfg.M).sum_rate
                )
        return greedy, exhaustive, paths

    results = _parallel(one, cfg.realizations, threads)
    rows = []
    for j, snr in enumerate(cfg.snr_db):
        mean, err = _mean_stderr([r[0][j] for r in results])
        rows.append(_row(cfg, snr, "sum_rate_greedy", mean, err))
        if with_exhaustive:
            mean, err = _mean_stderr([r[1][j] for r in results])
            rows.append(_row(cfg, snr, "sum_rate_exhaustive", mean, err))
    return rows, _collect_dump([r[2] for r in results])


def _downlink_problem(cfg: ExperimentConfig, h: np.ndarray, snr_db: float):
    return downlink.DownlinkProblem(
        channels=h,
        n_rf=cfg.N_RF,
        total_power=10.0 ** (snr_db / 10.0),
        noise_power=1.0,
        M=cfg.M,
    )


def _run_convergence(cfg: ExperimentConfig, threads: int):
    """Full max-min SINR trace per realization at a fixed transmit SNR."""
    snr = cfg.snr_db[0]

    def one(realization):
        h, paths = _effective_channels(cfg, realization)
        result = downlink.alternating_optimize(_downlink_problem(cfg, h, snr))
        return result.trace, paths

    results = _parallel(one, cfg.realizations, threads)
    traces = [r[0] for r in results]
    horizon = max(len(t) for t in traces)
    padded = np.array([t + [t[-1]] * (horizon - len(t)) for t in traces])
    rows = []
    for it in range(horizon):
        mean, err = _mean_stderr(padded[:, it])
        rows.append(_row(cfg, it + 1, "gamma_mean", mean, err))
    for r, trace in enumerate(traces):
        rows.extend(_row(cfg, it + 1, f"gamma_r{r:03d}", v) for it, v in enumerate(trace))
    return rows, _collect_dump([r[1] for r in results])


def _run_downlink_maxmin(cfg: ExperimentConfig, threads: int):
    """Converged max-min SINR over the transmit SNR sweep."""

    def one(realization):
        h, paths = _effective_channels(cfg, realization)
        gammas = [
            downlink.alternating_optimize(_downlink_problem(cfg, h, snr)).gamma
            for snr in cfg.snr_db
        ]
        return gammas, paths

    results = _parallel(one, cfg.realizations, threads)
    rows = []
    for j, snr in enumerate(cfg.snr_db):
        mean, err = _mean_stderr([r[0][j] for r in results])
        rows.append(_row(cfg, snr, "min_sinr", mean, err))
    return rows, _collect_dump([r[1] for r in results])


_TABLE_HEADER = "x_value\tmetric\tmean\tstderr\tarchitecture\tpattern\trealizations\tseed"


def write_table(path, rows: list[ResultRow]) -> None:
    """Write rows as tab-separated text; a temp file plus atomic rename keeps
    partial output from ever appearing at the destination."""
    lines = [_TABLE_HEADER]
    lines.extend(
        f"{r.x_value:.12g}\t{r.metric}\t{r.mean:.12g}\t{r.stderr:.12g}\t"
        f"{r.architecture}\t{r.pattern}\t{r.realizations}\t{r.seed}"
        for r in rows
    )
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".raysim-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write("\n".join(lines) + "\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
