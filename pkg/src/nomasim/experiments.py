"""Monte-Carlo sweep drivers and their CSV/metadata serialization.

Every sweep evaluates all of its schemes on the same channel draws (trial t of
a sweep always uses the realization keyed by ``(rng_seed, cluster 0, t)``), so
scheme comparisons are paired and per-trial inequalities survive averaging.
Per-trial work is a pure function of ``(spec, trial)``; results are reduced in
trial order, which keeps output byte-identical for any worker count.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import __version__
from .admission import AdmissionInstance, exhaustive_admit, greedy_admit
from .channel import SystemConfig, draw_cluster
from .rates import extend_split, noma_sum_rate, noma_user_rates, oma_user_rates, optimal_dof_fractions
from .units import db_to_linear

SWEEP_KINDS = (
    "split_sweep_2user",
    "split_sweep_3user",
    "power_sweep",
    "ergodic_power_sweep",
    "fairness_2user",
    "fairness_3user",
    "admission_vs_sinr",
    "admission_vs_requesting",
    "oracle_compare_equal",
    "oracle_compare_mixed",
)

_SURFACE_KINDS = ("split_sweep_3user", "fairness_3user")

# Decorrelates the threshold draws of the mixed-target benchmark from the
# channel stream of the same trial.
_THRESHOLD_STREAM = 104729

# Serving area for the admission benchmark against the enumeration reference.
# The comparison tolerances assume a dense deployment where most requesting
# users are admissible; the wide default cell is kept for the other sweeps.
ORACLE_BENCHMARK_RADIUS_KM = (0.01, 0.15)

_EQUAL_MODE_RATE_TOL = 1e-12


def value_grid(start: float, stop: float, step: float) -> tuple[float, ...]:
    """Inclusive evenly spaced grid with stable rounding."""
    if step <= 0 or stop < start:
        raise ValueError("need step > 0 and stop >= start")
    n = int(round((stop - start) / step)) + 1
    return tuple(round(start + i * step, 12) for i in range(n))


def split_surface_grid(step: float = 0.05) -> tuple[tuple[float, float], ...]:
    """(strong-user share, mid-user fraction of remainder) pairs; the strong
    share stops short of 1 where the remainder split is meaningless."""
    return tuple(
        (a, b) for a in value_grid(0.0, 1.0 - step, step) for b in value_grid(0.0, 1.0, step)
    )


@dataclass(frozen=True)
class SweepSpec:
    """What to run: sweep kind, its grid, trial count and the cell setup."""

    kind: str
    grid: tuple
    trials: int
    config: SystemConfig
    power_dbm_values: tuple[float, ...] = (30.0, 40.0, 50.0)
    target_sinr_db_values: tuple[float, ...] = (10.0,)
    requesting_users: int = 8
    threshold_choices_db: tuple[float, ...] = (5.0, 10.0, 15.0)
    base_split: tuple[float, float] = (0.2, 0.8)
    extension_fraction: float = 1.0 / 3.0
    enumeration_cap: int = 12

    def __post_init__(self):
        if self.kind not in SWEEP_KINDS:
            raise ValueError(f"unknown sweep kind '{self.kind}'")
        if not self.grid:
            raise ValueError("grid must be non-empty")
        if int(self.trials) != self.trials or self.trials < 1:
            raise ValueError("trials must be a positive integer")
        if self.kind in _SURFACE_KINDS:
            if any(np.ndim(p) != 1 or len(p) != 2 for p in self.grid):
                raise ValueError("surface sweeps need a grid of (x, y) pairs")
            flat = [v for p in self.grid for v in p]
        else:
            if any(np.ndim(p) != 0 for p in self.grid):
                raise ValueError("this sweep kind needs a grid of scalars")
            flat = list(self.grid)
        if self.kind.startswith(("split_sweep", "fairness")) and (
            min(flat) < 0 or max(flat) > 1
        ):
            raise ValueError("power-share grids must stay inside [0, 1]")
        if self.kind == "admission_vs_requesting":
            if any(int(p) != p or p < 1 for p in self.grid):
                raise ValueError("requesting-user grid must hold positive integers")
        if not self.power_dbm_values or not self.target_sinr_db_values:
            raise ValueError("series value lists must be non-empty")
        if int(self.requesting_users) != self.requesting_users or self.requesting_users < 1:
            raise ValueError("requesting_users must be a positive integer")
        w1, w2 = self.base_split
        if w1 < 0 or w2 < 0 or abs(w1 + w2 - 1.0) > 1e-9:
            raise ValueError("base_split must be two non-negative shares summing to 1")
        if not 0 <= self.extension_fraction <= 1:
            raise ValueError("extension_fraction must lie in [0, 1]")

    @property
    def point_arity(self) -> int:
        return 2 if self.kind in _SURFACE_KINDS else 1


@dataclass(frozen=True)
class SweepRow:
    sweep_point: tuple[float, ...]
    scheme: str
    metric: str
    mean: float
    stderr: float
    trials: int


@dataclass(frozen=True)
class SweepResult:
    kind: str
    rows: tuple[SweepRow, ...]
    metadata: dict


def _num_label(x: float) -> str:
    return str(int(x)) if float(x) == int(x) else repr(float(x))


def make_sweep(kind: str, config: SystemConfig, trials: int | None = None, **overrides) -> SweepSpec:
    """Build a :class:`SweepSpec` with the conventional defaults per kind.

    The cluster size is normalized to what the kind needs (the split and
    power sweeps carry both the 2- and 3-user schemes on one draw; admission
    sweeps draw the full requesting pool).
    """
    if kind not in SWEEP_KINDS:
        raise ValueError(f"unknown sweep kind '{kind}'")
    grid = overrides.pop("grid", None)
    defaults: dict = {}
    if kind in ("split_sweep_2user", "power_sweep", "ergodic_power_sweep"):
        config = replace(config, users_per_cluster=3)
        default_trials = 1000 if kind == "ergodic_power_sweep" else 1
        default_grid = (
            value_grid(0.0, 1.0, 0.01)
            if kind == "split_sweep_2user"
            else value_grid(20.0, 50.0, 2.0)
        )
    elif kind == "split_sweep_3user":
        config = replace(config, users_per_cluster=3)
        default_trials, default_grid = 1, split_surface_grid()
    elif kind == "fairness_2user":
        config = replace(config, users_per_cluster=2)
        default_trials, default_grid = 1, value_grid(0.0, 1.0, 0.01)
    elif kind == "fairness_3user":
        config = replace(config, users_per_cluster=3)
        default_trials, default_grid = 1, split_surface_grid()
    elif kind == "admission_vs_sinr":
        requesting = int(overrides.get("requesting_users", 8))
        config = replace(config, users_per_cluster=requesting)
        default_trials, default_grid = 1000, value_grid(5.0, 20.0, 2.5)
    elif kind == "admission_vs_requesting":
        default_grid = tuple(float(n) for n in range(2, 13))
        pool = int(max(grid if grid is not None else default_grid))
        config = replace(config, users_per_cluster=pool)
        default_trials = 1000
        defaults["requesting_users"] = pool
    else:  # oracle comparison kinds
        requesting = int(overrides.get("requesting_users", 8))
        config = replace(config, users_per_cluster=requesting)
        default_trials, default_grid = 1000, value_grid(30.0, 50.0, 5.0)
        if kind == "oracle_compare_equal":
            defaults["target_sinr_db_values"] = (5.0, 10.0, 15.0)
    defaults.update(overrides)
    return SweepSpec(
        kind=kind,
        grid=tuple(grid) if grid is not None else default_grid,
        trials=default_trials if trials is None else int(trials),
        config=config,
        **defaults,
    )


def sweep_series(spec: SweepSpec) -> tuple[tuple[str, str], ...]:
    """Ordered (scheme, metric) pairs a sweep reports per grid point."""
    both_sizes = (
        ("noma_2user", "sum_rate_bps_hz"),
        ("oma_2user", "sum_rate_bps_hz"),
        ("noma_3user", "sum_rate_bps_hz"),
        ("oma_3user", "sum_rate_bps_hz"),
    )
    if spec.kind in ("split_sweep_2user", "power_sweep", "ergodic_power_sweep"):
        return both_sizes
    if spec.kind == "split_sweep_3user":
        return both_sizes[2:]
    if spec.kind == "fairness_2user":
        return (("noma_2user", "jain_index"), ("oma_2user", "jain_index"))
    if spec.kind == "fairness_3user":
        return (("noma_3user", "jain_index"), ("oma_3user", "jain_index"))
    if spec.kind == "admission_vs_sinr":
        return tuple(
            (f"greedy_p{_num_label(p)}", metric)
            for p in spec.power_dbm_values
            for metric in ("admitted_count", "sum_rate_bps_hz")
        )
    if spec.kind == "admission_vs_requesting":
        return tuple(
            (f"greedy_p{_num_label(p)}_s{_num_label(s)}", metric)
            for p in spec.power_dbm_values
            for s in spec.target_sinr_db_values
            for metric in ("admitted_count", "sum_rate_bps_hz")
        )
    if spec.kind == "oracle_compare_equal":
        return tuple(
            (f"{scheme}_s{_num_label(s)}", metric)
            for s in spec.target_sinr_db_values
            for scheme in ("greedy", "exhaustive", "exhaustive_minus_greedy")
            for metric in ("admitted_count", "sum_rate_bps_hz")
        )
    return tuple(
        (f"{scheme}_mixed", metric)
        for scheme in ("greedy", "exhaustive", "exhaustive_minus_greedy")
        for metric in ("admitted_count", "sum_rate_bps_hz")
    )


def _jain_rows(rates: np.ndarray) -> np.ndarray:
    s = rates.sum(axis=-1)
    sq = (rates * rates).sum(axis=-1)
    n = rates.shape[-1]
    return s * s / (n * sq)


def _mixed_thresholds_db(spec: SweepSpec, trial: int) -> np.ndarray:
    rng = np.random.default_rng(
        np.random.SeedSequence([spec.config.rng_seed, trial, _THRESHOLD_STREAM])
    )
    return rng.choice(np.asarray(spec.threshold_choices_db, dtype=float), size=spec.requesting_users)


def _admission_pair(gains, thresholds_db, cap):
    inst = AdmissionInstance.from_db(gains, thresholds_db)
    return greedy_admit(inst), exhaustive_admit(inst, cap=cap)


def _trial_values(spec: SweepSpec, trial: int) -> np.ndarray:
    """All series values of one trial, shape (n_series, n_grid)."""
    cfg = spec.config
    kind = spec.kind
    realization = draw_cluster(cfg, 0, trial)
    grid = spec.grid
    out = np.empty((len(sweep_series(spec)), len(grid)))

    if kind in ("split_sweep_2user", "split_sweep_3user"):
        g = realization.snr_gains
        if kind == "split_sweep_2user":
            w1 = np.asarray(grid, dtype=float)
            # Same strong-user share for both sizes; the remainder goes to the
            # weak user, or is halved over the two weaker users.
            splits2 = np.stack([w1, 1 - w1], axis=-1)
            splits3 = np.stack([w1, (1 - w1) / 2, (1 - w1) / 2], axis=-1)
            out[0] = noma_sum_rate(g[:2], splits2)
            out[1] = oma_user_rates(g[:2], splits2, optimal_dof_fractions(g[:2], splits2)).sum(axis=-1)
            out[2] = noma_sum_rate(g[:3], splits3)
            out[3] = oma_user_rates(g[:3], splits3, optimal_dof_fractions(g[:3], splits3)).sum(axis=-1)
        else:
            pts = np.asarray(grid, dtype=float)
            a, b = pts[:, 0], pts[:, 1]
            splits = np.stack([a, b * (1 - a), (1 - a) * (1 - b)], axis=-1)
            out[0] = noma_sum_rate(g, splits)
            out[1] = oma_user_rates(g, splits, optimal_dof_fractions(g, splits)).sum(axis=-1)
        return out

    if kind in ("power_sweep", "ergodic_power_sweep"):
        eff = realization.effective_gains
        rho = np.array([cfg.rho_at(p) for p in grid])
        g3 = rho[:, None] * eff[None, :3]
        w2 = np.asarray(spec.base_split, dtype=float)
        w3 = extend_split(w2, spec.extension_fraction).coefficients
        out[0] = noma_sum_rate(g3[:, :2], w2)
        out[1] = oma_user_rates(g3[:, :2], w2, optimal_dof_fractions(g3[:, :2], w2)).sum(axis=-1)
        out[2] = noma_sum_rate(g3, w3)
        out[3] = oma_user_rates(g3, w3, optimal_dof_fractions(g3, w3)).sum(axis=-1)
        return out

    if kind in ("fairness_2user", "fairness_3user"):
        g = realization.snr_gains
        if kind == "fairness_2user":
            w1 = np.asarray(grid, dtype=float)
            splits = np.stack([w1, 1 - w1], axis=-1)
        else:
            pts = np.asarray(grid, dtype=float)
            a, b = pts[:, 0], pts[:, 1]
            splits = np.stack([a, b * (1 - a), (1 - a) * (1 - b)], axis=-1)
        out[0] = _jain_rows(noma_user_rates(g, splits))
        out[1] = _jain_rows(oma_user_rates(g, splits, optimal_dof_fractions(g, splits)))
        return out

    if kind == "admission_vs_sinr":
        eff = realization.effective_gains
        row = 0
        for p in spec.power_dbm_values:
            g = cfg.rho_at(p) * eff
            for j, s in enumerate(grid):
                res = greedy_admit(AdmissionInstance.from_db(g, np.full(g.size, float(s))))
                out[row, j] = res.admitted_count
                out[row + 1, j] = res.sum_rate_bps_hz
            row += 2
        return out

    if kind == "admission_vs_requesting":
        # Requesting pools are nested in draw order (not in sorted order), so
        # a longer list never removes anyone from a shorter one.
        draw_order = np.empty_like(realization.effective_gains)
        draw_order[realization.sort_order] = realization.effective_gains
        row = 0
        for p in spec.power_dbm_values:
            rho = cfg.rho_at(p)
            for s in spec.target_sinr_db_values:
                for j, n in enumerate(grid):
                    pool = np.sort(draw_order[: int(n)])[::-1] * rho
                    res = greedy_admit(AdmissionInstance.from_db(pool, np.full(int(n), float(s))))
                    out[row, j] = res.admitted_count
                    out[row + 1, j] = res.sum_rate_bps_hz
                row += 2
        return out

    # oracle comparison kinds; the grid axis is transmit power
    eff = realization.effective_gains
    if kind == "oracle_compare_equal":
        row = 0
        for s in spec.target_sinr_db_values:
            thr = np.full(eff.size, float(s))
            for j, p in enumerate(grid):
                gre, exh = _admission_pair(cfg.rho_at(p) * eff, thr, spec.enumeration_cap)
                if gre.admitted_count != exh.admitted_count or (
                    abs(gre.sum_rate_bps_hz - exh.sum_rate_bps_hz) > _EQUAL_MODE_RATE_TOL
                ):
                    raise RuntimeError(
                        "equal-target admission diverged from the enumeration reference "
                        f"(trial {trial}, power {p} dBm, target {s} dB)"
                    )
                out[row, j] = gre.admitted_count
                out[row + 1, j] = gre.sum_rate_bps_hz
                out[row + 2, j] = exh.admitted_count
                out[row + 3, j] = exh.sum_rate_bps_hz
                out[row + 4, j] = exh.admitted_count - gre.admitted_count
                out[row + 5, j] = exh.sum_rate_bps_hz - gre.sum_rate_bps_hz
            row += 6
        return out

    thr_db = _mixed_thresholds_db(spec, trial)
    for j, p in enumerate(grid):
        gre, exh = _admission_pair(cfg.rho_at(p) * eff, thr_db, spec.enumeration_cap)
        out[0, j] = gre.admitted_count
        out[1, j] = gre.sum_rate_bps_hz
        out[2, j] = exh.admitted_count
        out[3, j] = exh.sum_rate_bps_hz
        out[4, j] = exh.admitted_count - gre.admitted_count
        out[5, j] = exh.sum_rate_bps_hz - gre.sum_rate_bps_hz
    return out


def _trial_batch(spec: SweepSpec, trials: tuple[int, ...]) -> list[np.ndarray]:
    return [_trial_values(spec, t) for t in trials]


def run_sweep(spec: SweepSpec, workers: int = 1) -> SweepResult:
    """Execute a sweep and reduce per-trial values to mean and stderr rows.

    ``workers`` only changes how trials are scheduled; the reduction always
    happens in trial order, so results are identical for any width.
    """
    if int(workers) != workers or workers < 1:
        raise ValueError("workers must be a positive integer")
    trials = list(range(spec.trials))
    if workers == 1 or spec.trials == 1:
        values = _trial_batch(spec, tuple(trials))
    else:
        chunk = math.ceil(len(trials) / workers)
        batches = [tuple(trials[i : i + chunk]) for i in range(0, len(trials), chunk)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = pool.map(_trial_batch, [spec] * len(batches), batches)
            values = [v for batch in results for v in batch]
    stacked = np.stack(values)  # (trials, n_series, n_grid)
    mean = stacked.mean(axis=0)
    if spec.trials > 1:
        stderr = stacked.std(axis=0, ddof=1) / math.sqrt(spec.trials)
    else:
        stderr = np.zeros_like(mean)

    series = sweep_series(spec)
    rows = []
    for gi, point in enumerate(spec.grid):
        pt = tuple(point) if spec.point_arity == 2 else (float(point),)
        for si, (scheme, metric) in enumerate(series):
            rows.append(
                SweepRow(
                    sweep_point=pt,
                    scheme=scheme,
                    metric=metric,
                    mean=float(mean[si, gi]),
                    stderr=float(stderr[si, gi]),
                    trials=spec.trials,
                )
            )
    metadata = _build_metadata(spec, series, mean)
    return SweepResult(kind=spec.kind, rows=tuple(rows), metadata=metadata)


def _run_family(spec: SweepSpec, kinds: tuple[str, ...], workers: int) -> SweepResult:
    if spec.kind not in kinds:
        raise ValueError(f"expected a sweep of kind {kinds}, got '{spec.kind}'")
    return run_sweep(spec, workers=workers)


def run_split_sweep(spec: SweepSpec, workers: int = 1) -> SweepResult:
    """Sum rate of both schemes against the power-split grid (curve or surface)."""
    return _run_family(spec, ("split_sweep_2user", "split_sweep_3user"), workers)


def run_ergodic_sweep(spec: SweepSpec, workers: int = 1) -> SweepResult:
    """Sum rate against transmit power, averaged over channel draws."""
    return _run_family(spec, ("power_sweep", "ergodic_power_sweep"), workers)


def run_fairness_sweep(spec: SweepSpec, workers: int = 1) -> SweepResult:
    """Jain index of both schemes against the power-split grid."""
    return _run_family(spec, ("fairness_2user", "fairness_3user"), workers)


def run_admission_sweep(spec: SweepSpec, workers: int = 1) -> SweepResult:
    """Mean admitted count and sum rate against target SINR or pool size."""
    return _run_family(spec, ("admission_vs_sinr", "admission_vs_requesting"), workers)


def run_oracle_compare(spec: SweepSpec, workers: int = 1) -> SweepResult:
    """Sequential admission against the enumeration reference per power point."""
    return _run_family(spec, ("oracle_compare_equal", "oracle_compare_mixed"), workers)


def _build_metadata(spec: SweepSpec, series, mean: np.ndarray) -> dict:
    cfg = asdict(spec.config)
    cfg["cell_radius_range_km"] = list(spec.config.cell_radius_range_km)
    sweep = {
        "kind": spec.kind,
        "grid": [list(p) if spec.point_arity == 2 else float(p) for p in spec.grid],
        "trials": spec.trials,
        "power_dbm_values": list(spec.power_dbm_values),
        "target_sinr_db_values": list(spec.target_sinr_db_values),
        "requesting_users": spec.requesting_users,
        "threshold_choices_db": list(spec.threshold_choices_db),
        "base_split": list(spec.base_split),
        "extension_fraction": spec.extension_fraction,
        "enumeration_cap": spec.enumeration_cap,
        "series": [list(s) for s in series],
        "oma_baseline": "optimal_dof",
    }
    meta = {
        "tool": "nomasim",
        "version": __version__,
        "config": cfg,
        "sweep": sweep,
    }
    if spec.kind == "split_sweep_3user":
        labels = [s for s, _ in series]
        gap = mean[labels.index("noma_3user")] - mean[labels.index("oma_3user")]
        best = int(np.argmax(gap))
        meta["max_gap"] = {
            "gap_bps_hz": float(gap[best]),
            "sweep_point": list(spec.grid[best]),
        }
    digest = hashlib.sha256(
        json.dumps({"config": cfg, "sweep": sweep}, sort_keys=True).encode()
    ).hexdigest()
    meta["build_tag"] = f"nomasim-{__version__}+cfg.{digest[:10]}"
    return meta


def write_csv(result: SweepResult, path) -> None:
    """Serialize rows as ``sweep_point[,sweep_point2],scheme,metric,mean,stderr,trials``."""
    arity = len(result.rows[0].sweep_point) if result.rows else 1
    header = ["sweep_point", "sweep_point2"][:arity] + ["scheme", "metric", "mean", "stderr", "trials"]
    lines = [",".join(header)]
    for row in result.rows:
        cells = [repr(float(v)) for v in row.sweep_point]
        cells += [row.scheme, row.metric, repr(row.mean), repr(row.stderr), str(row.trials)]
        lines.append(",".join(cells))
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def write_metadata(result: SweepResult, path) -> None:
    with open(path, "w", newline="") as fh:
        json.dump(result.metadata, fh, indent=2, sort_keys=True)
        fh.write("\n")


def default_output_dir() -> str:
    return os.environ.get("NOMASIM_OUT_DIR", ".")
