"""Experiment orchestration: data -> representation -> mappings -> report.

For every realisation the pipeline (re)generates or loads the data, fits a
fresh landmark representation per variable, fits lagged mappings for every
ordered variable pair at every requested lag, and scores them.  Results are
aggregated across realisations and optionally written to disk as one JSON
report plus CSV tables.

Reports are bitwise deterministic for a fixed seed: all randomness is
derived from (seed, realisation, variable) keys and nothing time- or
host-dependent enters the files.
"""
from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from . import __version__
from .core import AffiliationSeries, LandmarkSet, TimeSeriesMatrix
from .errors import (
    DivergenceDetected,
    InsufficientData,
    InvalidInput,
    IoError,
)
from .generators import (
    ArConfig,
    LogisticConfig,
    SdeConfig,
    gen_block_ar,
    gen_coupled_logistic,
    gen_hierarchical_sde,
)
from .ingest import (
    PhaseLabel,
    TrackingSchema,
    classify_phase,
    load_csv,
    reflect_half_court,
    segment_by,
)
from .mapping import MappingFit, fit_mapping, fit_mapping_segmented
from .measures import DependencyReport, build_report
from .representation import (
    LandmarkFitConfig,
    anchored_affiliation_series,
    fit_landmarks,
)
from .core import SegmentedAffiliationPair

REPORT_SCHEMA_VERSION = 1

#: anchor points for tracking data on the right half court (after the
#: half-court reflection): the four half corners, two wing positions and
#: the center of the half
DEFAULT_COURT_LANDMARKS = (
    (48.5, 48.5, 0.0, 0.0, 20.0, 20.0, 40.0),
    (-27.5, 27.5, -27.5, 27.5, 15.0, -15.0, 0.0),
)

_MODE_DEFAULT_LENGTH = {"logistic": 1800, "sde": 1000, "ar": 1000}

# ordered pairs whose relative difference should come out positive, per mode
_EXPECTED_POSITIVE = {
    "logistic": (("X", "Y"),),
    "sde": (("B", "A"), ("C", "A"), ("C", "B")),
    "ar": (("Y", "X"),),
    "csv": (),
}

_MAX_GENERATION_ATTEMPTS = 10


@dataclass(frozen=True)
class RunConfig:
    """Settings for one pipeline invocation."""

    mode: str
    k: int = 10
    taus: tuple[int, ...] = (1,)
    difference_series: bool | None = None
    realisations: int = 1
    seed: int = 0
    length: int | None = None
    prefix_lengths: tuple[int, ...] | None = None
    output_dir: str | None = None
    restarts: int = 5
    spa_max_iters: int = 500
    jobs: int = 1
    sigma_ab: float = 0.2
    csv_path: str | None = None
    csv_schema: dict | None = None

    def __post_init__(self):
        if self.mode not in ("logistic", "sde", "ar", "csv"):
            raise InvalidInput(f"unknown mode {self.mode!r}")
        if self.mode != "csv" and self.k < 2:
            raise InvalidInput("k must be >= 2")
        object.__setattr__(self, "taus", tuple(int(t) for t in self.taus))
        if not self.taus or any(t < 0 for t in self.taus):
            raise InvalidInput("taus must be non-negative integers")
        if self.realisations < 1:
            raise InvalidInput("realisations must be >= 1")
        if self.jobs < 1:
            raise InvalidInput("jobs must be >= 1")
        if self.restarts < 1:
            raise InvalidInput("restarts must be >= 1")
        if self.spa_max_iters < 1:
            raise InvalidInput("spa_max_iters must be >= 1")
        if self.prefix_lengths is not None:
            lengths = tuple(int(l) for l in self.prefix_lengths)
            if any(l < 2 for l in lengths):
                raise InvalidInput("prefix lengths must be >= 2")
            object.__setattr__(self, "prefix_lengths", lengths)
        if self.mode == "csv":
            if self.csv_path is None or self.csv_schema is None:
                raise InvalidInput("csv mode needs csv_path and csv_schema")
            if self.realisations != 1:
                raise InvalidInput("csv mode supports a single realisation")
            for key in ("team_a", "team_b"):
                if key not in self.csv_schema:
                    raise InvalidInput(f"csv schema is missing {key!r}")

    @property
    def effective_length(self) -> int:
        if self.length is not None:
            return self.length
        return _MODE_DEFAULT_LENGTH.get(self.mode, 0)

    @property
    def effective_difference(self) -> bool:
        if self.difference_series is None:
            return self.mode == "sde"
        return self.difference_series


@dataclass
class PairStats:
    """Aggregated relative differences for one ordered pair at one lag."""

    source: str
    target: str
    tau: int
    delta_schatten: list[float] = field(default_factory=list)
    delta_rowvar: list[float] = field(default_factory=list)
    expected_sign: int | None = None

    @property
    def mean_delta_schatten(self) -> float:
        return float(np.mean(self.delta_schatten))

    @property
    def mean_delta_rowvar(self) -> float:
        return float(np.mean(self.delta_rowvar))

    def _incorrect(self, values: list[float]) -> int | None:
        if self.expected_sign is None:
            return None
        return int(sum(1 for v in values if v * self.expected_sign <= 0.0))

    @property
    def incorrect_schatten(self) -> int | None:
        return self._incorrect(self.delta_schatten)

    @property
    def incorrect_rowvar(self) -> int | None:
        return self._incorrect(self.delta_rowvar)


@dataclass
class RunSummary:
    """Everything a run produced, before and after aggregation."""

    config: RunConfig
    variable_names: tuple[str, ...]
    realisation_reports: dict[int, list[DependencyReport]]
    mean_reports: dict[int, DependencyReport]
    pair_stats: dict[tuple[int, str, str], PairStats]
    residuals: dict[tuple[int, str, str], list[float]]
    representation_objectives: list[dict[str, float]]
    failed_realisations: int
    warnings: list[str]
    prefix_sweep: dict[int, DependencyReport] | None
    wall_clock_s: float


def _child_seed(seed: int, *stream: int) -> int:
    return int(np.random.SeedSequence([int(seed), *stream]).generate_state(1)[0])


def _difference(series: TimeSeriesMatrix) -> TimeSeriesMatrix:
    return TimeSeriesMatrix(np.diff(series.data, axis=1), labels=series.labels)


def _generate_variables(config: RunConfig, realisation: int,
                        ) -> list[tuple[str, TimeSeriesMatrix]]:
    length = config.effective_length
    if config.mode == "logistic":
        series = gen_coupled_logistic(LogisticConfig(length=length))
        variables = [("X", TimeSeriesMatrix(series.data[:1])),
                     ("Y", TimeSeriesMatrix(series.data[1:]))]
    elif config.mode == "sde":
        for attempt in range(_MAX_GENERATION_ATTEMPTS):
            seed = _child_seed(config.seed, 1, realisation, attempt)
            try:
                a, b, c = gen_hierarchical_sde(SdeConfig(
                    sigma_ab=config.sigma_ab, steps=length, seed=seed))
                break
            except DivergenceDetected:
                if attempt == _MAX_GENERATION_ATTEMPTS - 1:
                    raise
        variables = [("A", a), ("B", b), ("C", c)]
    elif config.mode == "ar":
        for attempt in range(_MAX_GENERATION_ATTEMPTS):
            seed = _child_seed(config.seed, 2, realisation, attempt)
            cfg = ArConfig(length=length, seed=seed)
            try:
                series = gen_block_ar(cfg)
                break
            except DivergenceDetected:
                if attempt == _MAX_GENERATION_ATTEMPTS - 1:
                    raise
        m = cfg.block_dim
        trimmed = series.data[:, cfg.p:]  # warm-up columns are all zero
        variables = [("X", TimeSeriesMatrix(trimmed[:m])),
                     ("Y", TimeSeriesMatrix(trimmed[m:]))]
    else:
        raise InvalidInput(f"mode {config.mode!r} does not generate data")
    if config.effective_difference:
        variables = [(name, _difference(series)) for name, series in variables]
    return variables


def _fit_representations(config: RunConfig, realisation: int,
                         variables: list[tuple[str, TimeSeriesMatrix]]):
    fits = {}
    for index, (name, series) in enumerate(variables):
        cfg = LandmarkFitConfig(
            k=config.k,
            restarts=config.restarts,
            max_iters=config.spa_max_iters,
            seed=_child_seed(config.seed, 3, realisation, index),
        )
        fits[name] = fit_landmarks(series, cfg)
    return fits


def _mapping_table(affiliations: dict[str, AffiliationSeries],
                   names: list[str], tau: int) -> list[list[MappingFit]]:
    return [
        [fit_mapping(affiliations[src], affiliations[tgt], tau) for tgt in names]
        for src in names
    ]


def _analyse_realisation(config: RunConfig, realisation: int):
    variables = _generate_variables(config, realisation)
    names = [name for name, _ in variables]
    rep_fits = _fit_representations(config, realisation, variables)
    # the dependency analysis runs on the anchored sequential representation
    affiliations = {
        name: anchored_affiliation_series(series, rep_fits[name].landmarks)
        for name, series in variables
    }
    reports = {}
    residuals = {}
    for tau in config.taus:
        table = _mapping_table(affiliations, names, tau)
        reports[tau] = build_report(table, names)
        for i, src in enumerate(names):
            for j, tgt in enumerate(names):
                residuals[(tau, src, tgt)] = table[i][j].residual
    objectives = {name: rep_fits[name].objective for name in names}
    sweep = None
    if config.prefix_lengths and realisation == 0:
        sweep = {}
        tau = config.taus[0]
        for prefix in config.prefix_lengths:
            cut = {
                name: AffiliationSeries(aff.weights[:, :prefix])
                for name, aff in affiliations.items()
            }
            sweep[prefix] = build_report(_mapping_table(cut, names, tau), names)
    return names, reports, residuals, objectives, sweep


def _mean_report(reports: list[DependencyReport]) -> DependencyReport:
    """Entry-wise mean of measure matrices and of the relative differences."""
    return DependencyReport(
        variable_names=reports[0].variable_names,
        m_schatten=np.mean([r.m_schatten for r in reports], axis=0),
        m_rowvar=np.mean([r.m_rowvar for r in reports], axis=0),
        delta_schatten=np.mean([r.delta_schatten for r in reports], axis=0),
        delta_rowvar=np.mean([r.delta_rowvar for r in reports], axis=0),
        tau=reports[0].tau,
    )


def run(config: RunConfig) -> RunSummary:
    """Execute the configured experiment and return (and optionally write) results."""
    start = time.perf_counter()
    if config.mode == "csv":
        summary = _run_tracking(config)
    else:
        summary = _run_generated(config)
    summary.wall_clock_s = time.perf_counter() - start
    if config.output_dir is not None:
        first_tau = config.taus[0]
        emit_report(summary.mean_reports[first_tau], summary, config.output_dir)
    return summary


def _run_generated(config: RunConfig) -> RunSummary:
    def work(r: int):
        return _analyse_realisation(config, r)

    results: dict[int, tuple] = {}
    warnings: list[str] = []
    if config.jobs > 1:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            futures = {r: pool.submit(work, r) for r in range(config.realisations)}
            for r, future in futures.items():
                try:
                    results[r] = future.result()
                except DivergenceDetected as exc:
                    warnings.append(f"realisation {r} failed: {exc}")
    else:
        for r in range(config.realisations):
            try:
                results[r] = work(r)
            except DivergenceDetected as exc:
                warnings.append(f"realisation {r} failed: {exc}")
    if not results:
        raise InsufficientData("every realisation failed")

    names = results[min(results)][0]
    realisation_reports: dict[int, list[DependencyReport]] = {t: [] for t in config.taus}
    residuals: dict[tuple[int, str, str], list[float]] = {}
    objectives = []
    sweep = None
    for r in sorted(results):
        _, reports, res, objs, rsweep = results[r]
        for tau in config.taus:
            realisation_reports[tau].append(reports[tau])
        for key, value in res.items():
            residuals.setdefault(key, []).append(value)
        objectives.append(objs)
        if rsweep is not None:
            sweep = rsweep
    mean_reports = {tau: _mean_report(reps)
                    for tau, reps in realisation_reports.items()}
    pair_stats = _collect_pair_stats(config, names, realisation_reports)
    return RunSummary(
        config=config,
        variable_names=tuple(names),
        realisation_reports=realisation_reports,
        mean_reports=mean_reports,
        pair_stats=pair_stats,
        residuals=residuals,
        representation_objectives=objectives,
        failed_realisations=config.realisations - len(results),
        warnings=warnings,
        prefix_sweep=sweep,
        wall_clock_s=0.0,
    )


def _collect_pair_stats(config: RunConfig, names: list[str],
                        realisation_reports: dict[int, list[DependencyReport]],
                        ) -> dict[tuple[int, str, str], PairStats]:
    expected = dict()
    for src, tgt in _EXPECTED_POSITIVE.get(config.mode, ()):
        expected[(src, tgt)] = 1
        expected[(tgt, src)] = -1
    stats: dict[tuple[int, str, str], PairStats] = {}
    for tau, reports in realisation_reports.items():
        for i, src in enumerate(names):
            for j, tgt in enumerate(names):
                if i == j:
                    continue
                entry = PairStats(source=src, target=tgt, tau=tau,
                                  expected_sign=expected.get((src, tgt)))
                for report in reports:
                    entry.delta_schatten.append(float(report.delta_schatten[i, j]))
                    entry.delta_rowvar.append(float(report.delta_rowvar[i, j]))
                stats[(tau, src, tgt)] = entry
    return stats


def _sequential_affiliations(xy: np.ndarray, landmarks: LandmarkSet) -> np.ndarray:
    return anchored_affiliation_series(TimeSeriesMatrix(xy), landmarks).weights


def _paired_segments(segs_a, segs_b) -> list[tuple[np.ndarray, np.ndarray]]:
    """Time-aligned overlaps between two entities' affiliation segments."""
    pairs = []
    for run_a, off_a, gam_a in segs_a:
        for run_b, off_b, gam_b in segs_b:
            if run_a != run_b:
                continue
            lo = max(off_a, off_b)
            hi = min(off_a + gam_a.shape[1], off_b + gam_b.shape[1])
            if hi - lo >= 1:
                pairs.append((gam_a[:, lo - off_a:hi - off_a],
                              gam_b[:, lo - off_b:hi - off_b]))
    return pairs


def _run_tracking(config: RunConfig) -> RunSummary:
    schema_dict = dict(config.csv_schema)
    schema = TrackingSchema(
        time_col=schema_dict["time_col"],
        entity_col=schema_dict["entity_col"],
        x_col=schema_dict["x_col"],
        y_col=schema_dict["y_col"],
        event_col=schema_dict.get("event_col"),
    )
    team_a = list(schema_dict["team_a"])
    team_b = list(schema_dict["team_b"])
    phase = {
        "team_a": PhaseLabel.TEAM_A_ATTACKING,
        "team_b": PhaseLabel.TEAM_B_ATTACKING,
    }[schema_dict.get("phase", "team_a")]
    resample_dt = float(schema_dict.get("resample_dt", 1.0))
    boundary = float(schema_dict.get("half_boundary", 0.0))
    landmarks = LandmarkSet(np.array(
        schema_dict.get("landmarks", DEFAULT_COURT_LANDMARKS), dtype=float))

    frames = load_csv(config.csv_path, schema)
    labels = [classify_phase(f, team_a, team_b, boundary) for f in frames]
    frames = reflect_half_court(frames)
    segments = segment_by(frames, labels, phase, resample_dt)

    names = [e for e in team_a + team_b if e in segments]
    if len(names) < 2:
        raise InsufficientData("fewer than two entities with usable segments")
    affiliation_segments = {
        entity: [(seg.run_index, seg.offset,
                  _sequential_affiliations(seg.xy, landmarks))
                 for seg in segments[entity]]
        for entity in names
    }

    realisation_reports: dict[int, list[DependencyReport]] = {}
    residuals: dict[tuple[int, str, str], list[float]] = {}
    for tau in config.taus:
        table = []
        for src in names:
            row = []
            for tgt in names:
                pairs = _paired_segments(affiliation_segments[src],
                                         affiliation_segments[tgt])
                if not pairs:
                    raise InsufficientData(
                        f"entities {src!r} and {tgt!r} share no time on court"
                    )
                pair = SegmentedAffiliationPair(
                    segments=tuple(
                        (AffiliationSeries(s), AffiliationSeries(t))
                        for s, t in pairs
                    ),
                    tau=tau,
                )
                fit = fit_mapping_segmented(pair)
                residuals.setdefault((tau, src, tgt), []).append(fit.residual)
                row.append(fit)
            table.append(row)
        realisation_reports[tau] = [build_report(table, names)]
    mean_reports = {tau: reps[0] for tau, reps in realisation_reports.items()}
    pair_stats = _collect_pair_stats(config, names, realisation_reports)
    return RunSummary(
        config=config,
        variable_names=tuple(names),
        realisation_reports=realisation_reports,
        mean_reports=mean_reports,
        pair_stats=pair_stats,
        residuals=residuals,
        representation_objectives=[],
        failed_realisations=0,
        warnings=[],
        prefix_sweep=None,
        wall_clock_s=0.0,
    )


def _matrix_payload(report: DependencyReport) -> dict:
    return {
        "variable_names": list(report.variable_names),
        "tau": report.tau,
        "m_schatten": report.m_schatten.tolist(),
        "m_rowvar": report.m_rowvar.tolist(),
        "delta_schatten": report.delta_schatten.tolist(),
        "delta_rowvar": report.delta_rowvar.tolist(),
    }


def _write_matrix_csv(path: Path, names: tuple[str, ...], matrix: np.ndarray):
    lines = ["," + ",".join(names)]
    for name, row in zip(names, matrix):
        lines.append(name + "," + ",".join(repr(float(v)) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def emit_report(report: DependencyReport, summary: RunSummary, out_dir) -> list[Path]:
    """Write report.json plus the four measure/difference CSV tables.

    Emission is deterministic: re-emitting the same summary overwrites the
    files with identical bytes.
    """
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        payload = {
            "schema_version": REPORT_SCHEMA_VERSION,
            "package_version": __version__,
            "seed": summary.config.seed,
            "config": _config_payload(summary.config),
            "variable_names": list(summary.variable_names),
            "mean_reports": {str(tau): _matrix_payload(r)
                             for tau, r in summary.mean_reports.items()},
            "realisations": {
                str(tau): [_matrix_payload(r) for r in reports]
                for tau, reports in summary.realisation_reports.items()
            },
            "pair_stats": {
                f"{tau}:{src}->{tgt}": {
                    "delta_schatten": stats.delta_schatten,
                    "delta_rowvar": stats.delta_rowvar,
                    "mean_delta_schatten": stats.mean_delta_schatten,
                    "mean_delta_rowvar": stats.mean_delta_rowvar,
                    "incorrect_schatten": stats.incorrect_schatten,
                    "incorrect_rowvar": stats.incorrect_rowvar,
                }
                for (tau, src, tgt), stats in sorted(summary.pair_stats.items())
            },
            "residuals": {
                f"{tau}:{src}->{tgt}": values
                for (tau, src, tgt), values in sorted(summary.residuals.items())
            },
            "representation_objectives": summary.representation_objectives,
            "failed_realisations": summary.failed_realisations,
            "warnings": summary.warnings,
            "prefix_sweep": None if summary.prefix_sweep is None else {
                str(prefix): _matrix_payload(r)
                for prefix, r in sorted(summary.prefix_sweep.items())
            },
        }
        files = [out / "report.json"]
        files[0].write_text(
            json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8")
        for fname, matrix in (
            ("m_schatten.csv", report.m_schatten),
            ("m_rowvar.csv", report.m_rowvar),
            ("delta_schatten.csv", report.delta_schatten),
            ("delta_rowvar.csv", report.delta_rowvar),
        ):
            path = out / fname
            _write_matrix_csv(path, report.variable_names, matrix)
            files.append(path)
        return files
    except OSError as exc:
        raise IoError(f"cannot write report to {out}: {exc}") from exc


def _config_payload(config: RunConfig) -> dict:
    payload = asdict(config)
    payload["effective_length"] = config.effective_length
    payload["effective_difference"] = config.effective_difference
    return payload
