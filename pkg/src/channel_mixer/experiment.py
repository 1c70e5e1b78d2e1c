"""End-to-end experiment runner: tomography, MLE resampling and divisibility scans.

Each experiment mixes two channels ``L1`` and ``L2`` into a total channel
``LT`` and reports, on a time grid, the process fidelity of the reconstructed
chi matrices and the minimum Choi eigenvalue of the intermediate map from a
fixed reference time ``s``.

Randomness: every task draws from ``numpy.random.default_rng`` seeded by a
``SeedSequence`` built from ``(seed, channel index, time index, stream,
resample index)``, so results do not depend on task scheduling.
"""
import csv
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import channels as ch
from .circuits import Circuit, build_depol_circuit, build_flip_circuit, build_total_mm_circuit
from .divisibility import (EPS_CLASS, PINV_CUTOFF, DivisibilityReport, Verdict,
                           batch_intermediate_choi_eigs, markovianity_scan, process_fidelity,
                           transfer_from_chi)
from .errors import ChannelMixerError, ConfigError
from .reconstruction import (DEFAULT_SHOTS, MLE_METHODS, CountsVector, mle_chi,
                             run_tomography)

log = logging.getLogger(__name__)

EXPERIMENT_NAMES = ("mm", "nm-replica", "nm-depol")
CHANNEL_LABELS = ("L1", "L2", "LT")
THREADS_ENV = "CHANNEL_MIXER_THREADS"

EPS_TP_SHOTS = 0.05
SHOT_SIGMAS = 3.0
MAX_PAIRS = 10000


@dataclass(frozen=True)
class ChannelSpec:
    label: str
    family: ch.ChannelFamily
    circuit: Callable[[float], Circuit]


def _flip(prob: Callable[[float], float], axis: str):
    return lambda t: build_flip_circuit(float(prob(t)), axis)


def _depol(which: str):
    return lambda t: build_depol_circuit(float(getattr(ch.design_functions(t), which)))


EXPERIMENTS: Dict[str, Tuple[ChannelSpec, ...]] = {
    "mm": (
        ChannelSpec("L1", ch.MARKOV_X, _flip(ch.prob_mm, "X")),
        ChannelSpec("L2", ch.MARKOV_Y, _flip(ch.prob_mm, "Y")),
        ChannelSpec("LT", ch.MIXED_MM, lambda t: build_total_mm_circuit(float(ch.prob_mm(t)))),
    ),
    "nm-replica": (
        ChannelSpec("L1", ch.NM_X1, _flip(lambda t: ch.probs_nm_replica(t)[0], "X")),
        ChannelSpec("L2", ch.NM_X2, _flip(lambda t: ch.probs_nm_replica(t)[1], "X")),
        ChannelSpec("LT", ch.MIXED_NM_REPLICA, _flip(ch.prob_mm, "X")),
    ),
    "nm-depol": (
        ChannelSpec("L1", ch.DEPOL_Q, _depol("q")),
        ChannelSpec("L2", ch.DEPOL_R, _depol("r")),
        ChannelSpec("LT", ch.DEPOL_MIXED, _depol("w")),
    ),
}

# time interval end and reference time used for each experiment
EXPERIMENT_DEFAULTS = {
    "mm": dict(t_max=3.8, t_step=0.1, s=0.5),
    "nm-replica": dict(t_max=3.7, t_step=0.1, s=0.5),
    "nm-depol": dict(t_max=8.8, t_step=0.1, s=3.0),
}


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str = "mm"
    t_max: float = 3.8
    t_step: float = 0.1
    s: float = 0.5
    shots: int = DEFAULT_SHOTS
    resamples: int = 20
    seed: int = 7
    mode: str = "analytic"
    eps_class: Optional[float] = None
    eps_tp: Optional[float] = None
    pinv_cutoff: float = PINV_CUTOFF
    output_dir: Optional[str] = None
    mle_method: str = "l-bfgs"
    max_pairs: int = MAX_PAIRS

    @classmethod
    def default_for(cls, experiment: str, **overrides) -> "ExperimentConfig":
        if experiment not in EXPERIMENT_DEFAULTS:
            raise ConfigError(f"unknown experiment {experiment!r}")
        return cls(experiment=experiment, **{**EXPERIMENT_DEFAULTS[experiment], **overrides})

    def validate(self) -> "ExperimentConfig":
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if self.mode not in ("analytic", "shots"):
            raise ConfigError(f"mode must be 'analytic' or 'shots', not {self.mode!r}")
        if not self.t_step > 0:
            raise ConfigError("t_step must be positive")
        if self.t_max < 0 or not 0 <= self.s <= max(self.t_max, 0.0):
            raise ConfigError(f"s={self.s} must lie in [0, t_max={self.t_max}]")
        if self.shots < 1 or self.resamples < 1 or self.max_pairs < 1:
            raise ConfigError("shots, resamples and max_pairs must be positive")
        if self.mle_method not in MLE_METHODS:
            raise ConfigError(f"mle_method must be one of {MLE_METHODS}")
        return self

    @property
    def classify_eps(self) -> float:
        return EPS_CLASS if self.eps_class is None else self.eps_class

    @property
    def tp_eps(self) -> float:
        if self.eps_tp is not None:
            return self.eps_tp
        return 1e-6 if self.mode == "analytic" else EPS_TP_SHOTS

    def grid(self) -> np.ndarray:
        """``0, dt, 2dt, ... <= t_max``; empty when ``t_max < t_step``."""
        if self.t_max < self.t_step:
            return np.empty(0)
        n = int(math.floor(self.t_max / self.t_step + 1e-9))
        return np.round(np.arange(n + 1) * self.t_step, 10)


@dataclass
class MinEigRow:
    t: float
    s: float
    mean: float
    std: Optional[float]
    theory: float
    trace_norm: float
    verdict: Verdict
    singular: bool = False


@dataclass
class ResultRecord:
    """Per-channel series produced by :func:`run_experiment`."""
    experiment: str
    label: str
    family: str
    t: np.ndarray
    fidelity_mean: np.ndarray
    fidelity_std: Optional[np.ndarray]
    mineig: List[MinEigRow]
    failures: List[str] = field(default_factory=list)

    @property
    def markovian(self) -> bool:
        return not any(r.verdict is Verdict.NOT_CP for r in self.mineig)


# ---------------------------------------------------------------------------
# resampling
# ---------------------------------------------------------------------------

def resample_counts(c: CountsVector, seed, sigma_mode: str = "poisson-gauss") -> CountsVector:
    """Gaussian-perturbed copy of ``c``: ``n + round(g sqrt(n))`` clamped to ``[0, shots]``."""
    if sigma_mode != "poisson-gauss":
        raise ValueError(f"unsupported sigma_mode {sigma_mode!r}")
    g = np.random.default_rng(seed).standard_normal(16)
    n = np.clip(c.n + np.round(g * np.sqrt(c.n)), 0, c.shots)
    return CountsVector(n, c.shots, c.seed)


def _seed(cfg: ExperimentConfig, ch_idx: int, t_idx: int, stream: int, k: int = 0):
    return np.random.SeedSequence([cfg.seed, EXPERIMENT_NAMES.index(cfg.experiment), ch_idx,
                                   t_idx, stream, k])


# ---------------------------------------------------------------------------
# per-point work
# ---------------------------------------------------------------------------

def _shot_point(args):
    """Tomography + resampled MLE at one (channel, time). Returns chi stack."""
    cfg, ch_idx, t_idx, t = args
    spec = EXPERIMENTS[cfg.experiment][ch_idx]
    counts = run_tomography(spec.circuit(t), cfg.shots, _seed(cfg, ch_idx, t_idx, 0))
    chis = np.empty((cfg.resamples, 4, 4), dtype=complex)
    for k in range(cfg.resamples):
        noisy = resample_counts(counts, _seed(cfg, ch_idx, t_idx, 1, k))
        chis[k] = mle_chi(noisy, method=cfg.mle_method, seed=_seed(cfg, ch_idx, t_idx, 2, k)).chi
    return chis


def _threads() -> int:
    raw = os.environ.get(THREADS_ENV, "0")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}")
    return os.cpu_count() or 1 if n <= 0 else n


def _map(fn, tasks, workers: int):
    if workers <= 1 or len(tasks) <= 1:
        return [fn(task) for task in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks, chunksize=1))


def theory_min_eig(family: ch.ChannelFamily, s: float, t: float, cutoff: float = PINV_CUTOFF) -> float:
    return markovianity_scan(family, s, [t], cutoff=cutoff)[0].min_eig


def _time_points(cfg: ExperimentConfig) -> Tuple[np.ndarray, int]:
    """Grid plus ``s`` if it is off-grid; returns times and the index of ``s``."""
    grid = cfg.grid()
    hits = np.nonzero(np.isclose(grid, cfg.s, rtol=0, atol=1e-9))[0]
    if hits.size:
        return grid, int(hits[0])
    return np.append(grid, cfg.s), grid.size


def run_experiment(cfg: ExperimentConfig, write: bool = True) -> List[ResultRecord]:
    """Run one experiment; writes files when ``cfg.output_dir`` is set and ``write``."""
    cfg.validate()
    specs = EXPERIMENTS[cfg.experiment]
    times, s_idx = _time_points(cfg)
    grid = cfg.grid()
    records = []
    chi_stacks: Dict[Tuple[int, int], np.ndarray] = {}

    if cfg.mode == "shots":
        tasks = [(cfg, ci, ti, float(t)) for ci in range(len(specs)) for ti, t in enumerate(times)]
        results = _map_safe(tasks, _threads())
        chi_stacks = {(ci, ti): res for (_, ci, ti, _), res in zip(tasks, results)}

    for ci, spec in enumerate(specs):
        failures: List[str] = []
        fid_mean = np.full(grid.size, np.nan)
        fid_std = np.full(grid.size, np.nan) if cfg.mode == "shots" and cfg.resamples > 1 else None
        for ti, t in enumerate(grid):
            try:
                ideal = ch.chi_ideal(spec.family, t)
                if cfg.mode == "analytic":
                    fid_mean[ti] = process_fidelity(ideal, ideal)
                    continue
                stack = chi_stacks[(ci, ti)]
                if isinstance(stack, Exception):
                    raise stack
                fids = np.array([process_fidelity(c, ideal) for c in stack])
                fid_mean[ti] = fids.mean()
                if fid_std is not None:
                    fid_std[ti] = fids.std(ddof=1)
            except ChannelMixerError as exc:
                failures.append(f"fidelity t={t:g}: {exc}")
                log.warning("%s %s: fidelity failed at t=%g: %s", cfg.experiment, spec.label, t, exc)

        rows = _mineig_rows(cfg, ci, spec, grid, s_idx, chi_stacks, failures)
        records.append(ResultRecord(cfg.experiment, spec.label, spec.family.name, grid.copy(),
                                    fid_mean, fid_std, rows, failures))

    if write and cfg.output_dir is not None:
        emit_outputs(records, cfg.output_dir, cfg)
    return records


def _map_safe(tasks, workers):
    # failures come back as exception objects so one bad point doesn't sink the run
    return _map(_guarded_shot_point, tasks, workers)


def _guarded_shot_point(task):
    try:
        return _shot_point(task)
    except ChannelMixerError as exc:
        return exc


def _mineig_rows(cfg, ci, spec, grid, s_idx, chi_stacks, failures) -> List[MinEigRow]:
    rows = []
    if cfg.mode == "analytic":
        later = [float(t) for t in grid if t > cfg.s + 1e-12]
        try:
            reports = markovianity_scan(spec.family, cfg.s, later, cfg.classify_eps, cfg.tp_eps,
                                        cfg.pinv_cutoff)
        except ChannelMixerError as exc:
            failures.append(f"scan: {exc}")
            return rows
        for r in reports:
            rows.append(MinEigRow(r.t, r.s, r.min_eig, None, r.min_eig, r.trace_norm, r.verdict,
                                  r.singular))
        return rows

    s_stack = chi_stacks[(ci, s_idx)]
    if isinstance(s_stack, Exception):
        failures.append(f"reference time s={cfg.s}: {s_stack}")
        return rows
    f_s = transfer_from_chi(s_stack)
    for ti, t in enumerate(grid):
        if t <= cfg.s + 1e-12:
            continue
        try:
            stack = chi_stacks[(ci, ti)]
            if isinstance(stack, Exception):
                raise stack
            eigs, singular = batch_intermediate_choi_eigs(transfer_from_chi(stack), f_s, cfg.pinv_cutoff)
            eigs = eigs.reshape(-1, 4)[: cfg.max_pairs]
            mins = eigs[:, 0]
            mean = float(mins.mean())
            std = float(mins.std(ddof=1)) if mins.size > 1 else None
            tn = float(np.abs(eigs).sum(axis=1).mean())
            eps = cfg.eps_class if cfg.eps_class is not None else SHOT_SIGMAS * (std or 0.0)
            not_cp = mean < -eps or abs(tn - 1.0) > cfg.tp_eps
            verdict = Verdict.NOT_CP if not_cp else Verdict.CP
            any_singular = bool(singular.any())
            if any_singular:
                verdict = Verdict.SINGULAR
            theory = theory_min_eig(spec.family, cfg.s, float(t), cfg.pinv_cutoff)
            rows.append(MinEigRow(float(t), cfg.s, mean, std, theory, tn, verdict, any_singular))
        except ChannelMixerError as exc:
            failures.append(f"mineig t={t:g}: {exc}")
            log.warning("%s %s: min-eig failed at t=%g: %s", cfg.experiment, spec.label, t, exc)
    return rows


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

FIDELITY_COLUMNS = ("t", "mean", "std")
MINEIG_COLUMNS = ("t", "s", "mean", "std", "theory", "verdict")
THEORY_COLUMNS = ("t", "p0", "p1", "p2", "p3", "gamma1", "gamma2", "gamma3", "min_eig")
REPORT_COLUMNS = ("experiment", "channel", "s", "t", "min_eig", "min_eig_std", "trace_norm",
                  "verdict", "singular_flag")


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, Verdict):
        return v.value
    if isinstance(v, (float, np.floating)):
        return "" if np.isnan(v) else repr(float(v))
    return str(v)


def _config_lines(cfg: Optional[ExperimentConfig]) -> List[str]:
    if cfg is None:
        return []
    lines = [f"{f.name} = {_fmt(getattr(cfg, f.name))}" for f in fields(cfg) if f.name != "output_dir"]
    lines.append(f"eps_class_effective = {'3*sample_std' if cfg.mode == 'shots' and cfg.eps_class is None else _fmt(cfg.classify_eps)}")
    lines.append(f"eps_tp_effective = {_fmt(cfg.tp_eps)}")
    lines.append("resample_noise = gaussian, std = sqrt(count), rounded and clamped to [0, shots]")
    return lines


def _write_csv(path: Path, header: Sequence[str], rows, comments: Sequence[str]):
    with open(path, "w", newline="") as fh:
        for line in comments:
            fh.write(f"# {line}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def theory_rows(family: ch.ChannelFamily, grid: Sequence[float], s: float,
                cutoff: float = PINV_CUTOFF):
    for t in grid:
        p = family.probs(t)
        try:
            g = ch.decay_rates(family, float(t))
        except ChannelMixerError:
            g = (None, None, None)
        m = theory_min_eig(family, s, float(t), cutoff) if t > s + 1e-12 else None
        yield (float(t), *map(float, p), *g, m)


def emit_outputs(records: Sequence[ResultRecord], out_dir, cfg: Optional[ExperimentConfig] = None):
    """Write per-channel fidelity, min-eigenvalue and theory CSVs plus a manifest."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        comments = _config_lines(cfg)
        report_rows = []
        for rec in records:
            head = [f"channel = {rec.label} ({rec.family})"] + comments
            std = rec.fidelity_std if rec.fidelity_std is not None else [None] * rec.t.size
            _write_csv(out / f"fidelity_{rec.label}.csv", FIDELITY_COLUMNS,
                       zip(rec.t, rec.fidelity_mean, std), head)
            _write_csv(out / f"mineig_{rec.label}.csv", MINEIG_COLUMNS,
                       ((r.t, r.s, r.mean, r.std, r.theory, r.verdict) for r in rec.mineig), head)
            family = ch.FAMILIES[rec.family]
            s = cfg.s if cfg is not None else (rec.mineig[0].s if rec.mineig else 0.0)
            _write_csv(out / f"theory_{rec.label}.csv", THEORY_COLUMNS,
                       theory_rows(family, rec.t, s), head)
            report_rows += [(rec.experiment, rec.label, r.s, r.t, r.mean, r.std, r.trace_norm,
                             r.verdict, r.singular) for r in rec.mineig]
        _write_csv(out / "reports.csv", REPORT_COLUMNS, report_rows, comments)
        with open(out / "manifest.txt", "w") as fh:
            for line in comments:
                fh.write(line + "\n")
            for rec in records:
                fh.write(f"verdict_{rec.label} = {'markovian' if rec.markovian else 'non-markovian'}\n")
                fh.write(f"failures_{rec.label} = {len(rec.failures)}\n")
    except OSError as exc:
        raise IOError(f"could not write outputs to {out}: {exc}") from exc
