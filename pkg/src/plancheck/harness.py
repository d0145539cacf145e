"""Batch evaluation: verdicts against labels, scored under unknown policies.

Three pipeline modes: `formal_direct` encodes each problem record itself and
checks it; `formal_llm` asks the provider to translate the natural-language
plan into a model and checks that; `direct_llm` asks the provider for a
bare VALID/INVALID judgement with no checking at all.

The positive class for precision/recall is Valid.  Cases whose provider
call fails outright are "errored": excluded from every metric and listed
separately in the report.
"""

from __future__ import annotations

import concurrent.futures
import json
import time
from dataclasses import dataclass, field
from typing import Optional

from . import bmc
from . import kripke as kr
from . import plans
from . import sat
from . import translate as tr

MODES = ("formal_llm", "formal_direct", "direct_llm")
POLICIES = ("exclude", "as_valid", "as_invalid")

# bound used when a translated model yields no completeness bound
DEFAULT_MAX_BOUND = 25


@dataclass
class RunConfig:
    mode: str = "formal_direct"
    policy: str = "exclude"
    max_bound: Optional[int] = None
    jobs: int = 1
    provider: Optional[tr.ProviderConfig] = None

    def validate(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.policy not in POLICIES:
            raise ValueError(f"unknown policy {self.policy!r}")
        if self.mode != "formal_direct" and self.provider is None:
            raise ValueError(f"mode {self.mode!r} requires a provider config")
        if self.jobs < 1:
            raise ValueError("jobs must be at least 1")


@dataclass
class CaseResult:
    problem_id: str
    label: Optional[str]
    verdict: Optional[plans.PlanVerdict]
    errored: bool = False
    error: str = ""
    warnings: list[str] = field(default_factory=list)


def is_vacuous(k: kr.KripkeStructure) -> bool:
    """True when the model has no initial states; every spec then holds."""
    cnf, _ = sat.tseitin_encode(k.init_pred)
    return not sat.solve(cnf).satisfiable


def outcome_to_verdict(outcome: bmc.CheckOutcome, wall_time: float) -> plans.PlanVerdict:
    if isinstance(outcome, bmc.Holds):
        return plans.PlanVerdict(plans.VALID, wall_time=wall_time)
    if isinstance(outcome, bmc.CounterexampleFound):
        return plans.PlanVerdict(plans.INVALID, evidence=outcome.trace, wall_time=wall_time)
    return plans.PlanVerdict(plans.UNKNOWN_BOUND, wall_time=wall_time)


def _require_nl(p: plans.PlanProblem) -> str:
    if p.nl is None:
        raise ValueError(f"problem {p.problem_id!r} has no natural-language text for an LLM mode")
    return p.nl


def run_case(p: plans.PlanProblem, cfg: RunConfig) -> plans.PlanVerdict:
    verdict, _ = run_case_full(p, cfg)
    return verdict


def run_case_full(p: plans.PlanProblem, cfg: RunConfig) -> tuple[plans.PlanVerdict, list[str]]:
    """One case through the configured mode; returns (verdict, warnings).

    ProviderError propagates to the caller; every other failure becomes an
    Unknown verdict.
    """
    if cfg.mode == "formal_direct":
        return plans.check_problem(p, max_bound=cfg.max_bound), []

    if cfg.mode == "direct_llm":
        nl = _require_nl(p)
        provider = tr.make_provider(cfg.provider)
        t0 = time.perf_counter()
        response = tr.complete_with_retries(
            provider, tr.build_judge_prompt(nl), p.problem_id, cfg.provider.max_retries
        )
        elapsed = 0.0 if cfg.provider.kind == "replay" else time.perf_counter() - t0
        judgement = tr.parse_judgement(response)
        if judgement is None:
            return plans.PlanVerdict(plans.UNKNOWN_PARSE, evidence=response, wall_time=elapsed), []
        return plans.PlanVerdict(judgement, wall_time=elapsed), []

    # formal_llm
    nl = _require_nl(p)
    res = tr.translate(nl, cfg.provider, case_id=p.problem_id)
    if res.failure is not None:
        return plans.PlanVerdict(plans.UNKNOWN_PARSE, evidence=res.failure, wall_time=res.latency), []
    model, spec = res.parsed
    warnings: list[str] = []
    t0 = time.perf_counter()
    try:
        k = kr.compile(model)
    except kr.CompileError as e:
        elapsed = res.latency + (time.perf_counter() - t0)
        return plans.PlanVerdict(plans.UNKNOWN_PARSE, evidence=e, wall_time=elapsed), []
    if is_vacuous(k):
        warnings.append("translated model has no initial states; spec holds vacuously")
    bound = cfg.max_bound
    if bound is None:
        bound = bmc.completeness_bound(k)
    if bound is None:
        bound = DEFAULT_MAX_BOUND
    outcome = bmc.check_spec(k, spec, bound)
    elapsed = res.latency + (time.perf_counter() - t0)
    return outcome_to_verdict(outcome, elapsed), warnings


def run_dataset(problems: list[plans.PlanProblem], cfg: RunConfig) -> list[CaseResult]:
    """Evaluate all cases, up to cfg.jobs at a time, and return results in
    problem_id order."""
    cfg.validate()
    jobs = cfg.jobs
    if cfg.provider is not None and cfg.mode != "formal_direct":
        jobs = min(jobs, cfg.provider.max_in_flight)

    def work(p: plans.PlanProblem) -> CaseResult:
        try:
            verdict, warnings = run_case_full(p, cfg)
        except tr.ProviderError as e:
            return CaseResult(p.problem_id, p.label, None, errored=True, error=str(e))
        return CaseResult(p.problem_id, p.label, verdict, warnings=warnings)

    if jobs == 1 or len(problems) <= 1:
        results = [work(p) for p in problems]
    else:
        with concurrent.futures.ThreadPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(work, problems))
    return sorted(results, key=lambda r: r.problem_id)


# ---------------------------------------------------------------------------
# Scoring
# ---------------------------------------------------------------------------


@dataclass
class Counts:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0
    unknown: int = 0
    scored: int = 0  # raw case count before any policy mapping

    @property
    def adjudicated(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


def apply_unknown_policy(verdicts: list, labels: list, policy: str) -> Counts:
    """Confusion counts with unknowns excluded, mapped to Valid, or mapped
    to Invalid.  `unknown` always counts the raw unknowns."""
    if policy not in POLICIES:
        raise ValueError(f"unknown policy {policy!r}")
    if len(verdicts) != len(labels):
        raise ValueError("verdicts and labels differ in length")
    counts = Counts(scored=len(verdicts))
    for v, label in zip(verdicts, labels):
        kind = getattr(v, "kind", v)
        if label not in ("valid", "invalid"):
            raise ValueError(f"label must be 'valid' or 'invalid', got {label!r}")
        if kind in (plans.UNKNOWN_PARSE, plans.UNKNOWN_BOUND):
            counts.unknown += 1
            if policy == "exclude":
                continue
            kind = plans.VALID if policy == "as_valid" else plans.INVALID
        if kind == plans.VALID:
            if label == "valid":
                counts.tp += 1
            else:
                counts.fp += 1
        elif kind == plans.INVALID:
            if label == "invalid":
                counts.tn += 1
            else:
                counts.fn += 1
        else:
            raise ValueError(f"cannot score verdict kind {kind!r}")
    return counts


def f1_score(precision: float, recall: float) -> Optional[float]:
    """Harmonic mean, on whatever scale the inputs share."""
    if precision + recall == 0:
        return None
    return 2.0 * precision * recall / (precision + recall)


@dataclass
class MetricsReport:
    """All rates and metrics on the 0..100 percent scale; None marks an
    undefined value (zero denominator), rendered as "n/a"."""

    counts: Counts
    valid_pct: float
    invalid_pct: float
    unknown_pct: float
    accuracy: Optional[float]
    precision: Optional[float]
    recall: Optional[float]
    f1: Optional[float]
    mean_time: Optional[float] = None


def compute_metrics(counts: Counts, mean_time: Optional[float] = None) -> MetricsReport:
    # hand-built counts may lack `scored`; exclude-style arithmetic is the
    # right reconstruction then
    total = counts.scored if counts.scored else counts.adjudicated + counts.unknown

    def pct(n: int) -> float:
        return 100.0 * n / total if total else 0.0

    def ratio(num: int, den: int) -> Optional[float]:
        return 100.0 * num / den if den else None

    precision = ratio(counts.tp, counts.tp + counts.fp)
    recall = ratio(counts.tp, counts.tp + counts.fn)
    f1 = f1_score(precision, recall) if precision is not None and recall is not None else None
    return MetricsReport(
        counts=counts,
        valid_pct=pct(counts.tp + counts.fp),
        invalid_pct=pct(counts.tn + counts.fn),
        unknown_pct=pct(counts.unknown),
        accuracy=ratio(counts.tp + counts.tn, counts.adjudicated),
        precision=precision,
        recall=recall,
        f1=f1,
        mean_time=mean_time,
    )


@dataclass
class RunSummary:
    mode: str
    policy: str
    report: MetricsReport
    verdicts: list[tuple[str, str]]  # (problem_id, verdict kind)
    errored: list[tuple[str, str]]  # (problem_id, error)
    warnings: list[tuple[str, str]]


def summarize_run(results: list[CaseResult], mode: str, policy: str) -> RunSummary:
    scored = [r for r in results if not r.errored]
    for r in scored:
        if r.label is None:
            raise ValueError(f"problem {r.problem_id!r} has no label; cannot score")
    counts = apply_unknown_policy([r.verdict for r in scored], [r.label for r in scored], policy)
    mean_time = None
    if scored:
        mean_time = sum(r.verdict.wall_time for r in scored) / len(scored)
    report = compute_metrics(counts, mean_time)
    return RunSummary(
        mode=mode,
        policy=policy,
        report=report,
        verdicts=[(r.problem_id, r.verdict.kind) for r in scored],
        errored=[(r.problem_id, r.error) for r in results if r.errored],
        warnings=[(r.problem_id, w) for r in results for w in r.warnings],
    )


# ---------------------------------------------------------------------------
# Report rendering
# ---------------------------------------------------------------------------

REPORT_COLUMNS = ("Valid", "Invalid", "Unk.", "Accuracy", "Precision", "Recall", "F1", "Time")


def _cell(x: Optional[float]) -> str:
    return "n/a" if x is None else f"{x:.2f}"


def _row_values(r: MetricsReport, include_timing: bool) -> dict[str, Optional[float]]:
    return {
        "Valid": r.valid_pct,
        "Invalid": r.invalid_pct,
        "Unk.": r.unknown_pct,
        "Accuracy": r.accuracy,
        "Precision": r.precision,
        "Recall": r.recall,
        "F1": r.f1,
        "Time": r.mean_time if include_timing else None,
    }


def emit_report(summary: RunSummary, fmt: str, include_timing: bool = True) -> str:
    if fmt == "markdown":
        return _emit_markdown(summary, include_timing)
    if fmt == "csv":
        return format_report_csv(_row_values(summary.report, include_timing))
    if fmt == "json":
        return _emit_json(summary, include_timing)
    raise ValueError(f"unknown report format {fmt!r}")


def _emit_markdown(summary: RunSummary, include_timing: bool) -> str:
    r = summary.report
    c = r.counts
    n_scored = len(summary.verdicts)
    lines = [
        "# plancheck bench report",
        "",
        f"- mode: {summary.mode}",
        f"- policy: {summary.policy}",
        f"- cases: {n_scored + len(summary.errored)} (scored {n_scored}, errored {len(summary.errored)})",
        f"- counts: tp={c.tp} fp={c.fp} tn={c.tn} fn={c.fn} unknown={c.unknown}",
        "",
        "| " + " | ".join(REPORT_COLUMNS) + " |",
        "| " + " | ".join("---" for _ in REPORT_COLUMNS) + " |",
    ]
    values = _row_values(r, include_timing)
    lines.append("| " + " | ".join(_cell(values[c]) for c in REPORT_COLUMNS) + " |")
    lines += ["", "## Verdicts", "", "| problem | verdict |", "| --- | --- |"]
    for pid, kind in summary.verdicts:
        lines.append(f"| {pid} | {kind} |")
    if summary.errored:
        lines += ["", "## Errored", ""]
        for pid, err in summary.errored:
            lines.append(f"- {pid}: {err}")
    if summary.warnings:
        lines += ["", "## Warnings", ""]
        for pid, w in summary.warnings:
            lines.append(f"- {pid}: {w}")
    return "\n".join(lines) + "\n"


def format_report_csv(values: dict) -> str:
    header = ",".join(REPORT_COLUMNS)
    row = ",".join(_cell(values.get(c)) for c in REPORT_COLUMNS)
    return header + "\n" + row + "\n"


def parse_report_csv(text: str) -> dict[str, Optional[float]]:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if len(lines) != 2 or lines[0].split(",") != list(REPORT_COLUMNS):
        raise ValueError("not a plancheck csv report")
    out: dict[str, Optional[float]] = {}
    for name, cell in zip(REPORT_COLUMNS, lines[1].split(",")):
        out[name] = None if cell == "n/a" else float(cell)
    return out


def _emit_json(summary: RunSummary, include_timing: bool) -> str:
    r = summary.report
    c = r.counts

    def rnd(x: Optional[float]) -> Optional[float]:
        return None if x is None else round(x, 2)

    values = _row_values(r, include_timing)
    doc = {
        "mode": summary.mode,
        "policy": summary.policy,
        "counts": {"tp": c.tp, "fp": c.fp, "tn": c.tn, "fn": c.fn, "unknown": c.unknown},
        "rates": {
            "valid_pct": rnd(r.valid_pct),
            "invalid_pct": rnd(r.invalid_pct),
            "unknown_pct": rnd(r.unknown_pct),
        },
        "metrics": {
            "accuracy": rnd(r.accuracy),
            "precision": rnd(r.precision),
            "recall": rnd(r.recall),
            "f1": rnd(r.f1),
        },
        "mean_time": rnd(values["Time"]),
        "verdicts": [{"problem_id": pid, "verdict": kind} for pid, kind in summary.verdicts],
        "errored": [{"problem_id": pid, "error": err} for pid, err in summary.errored],
        "warnings": [{"problem_id": pid, "warning": w} for pid, w in summary.warnings],
    }
    return json.dumps(doc, indent=2) + "\n"
