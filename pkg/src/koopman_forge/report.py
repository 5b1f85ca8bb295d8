"""Run registered checks and assemble the JSON report and CSV tables."""

from __future__ import annotations

import csv
import json
import time
import traceback
from pathlib import Path

from .registry import REGISTRY, RunContext, SuiteConfig, checks_for
from .results import CheckResult, _clean


class ConfigError(ValueError):
    """Bad configuration or output path; maps to exit status 2."""


def validate_overrides(config: SuiteConfig):
    known = {c.check_id: c for c in REGISTRY}
    for key in config.tolerances:
        if key not in known:
            raise ConfigError(f"tolerance override for unknown check {key!r}")
        if not known[key].overridable:
            raise ConfigError(f"check {key!r} is of kind {known[key].kind!r} and takes no tolerance override")


def _judge(spec, result: CheckResult, config: SuiteConfig) -> CheckResult:
    tol = config.tolerances.get(spec.check_id)
    if tol is None:
        return result
    return CheckResult(result.check_id, result.value <= tol, result.value, float(tol),
                       result.note, {**result.details, "default_tolerance": result.tolerance})


def _entry(spec, result: CheckResult | None, error: str | None, elapsed: float, timings: bool) -> dict:
    out = {"checkId": spec.check_id, "paperRef": spec.paper_ref, "suite": spec.suite, "kind": spec.kind}
    if error is not None:
        out.update(status="error", maxError=None, tolerance=None, details={"error": error})
    else:
        out["status"] = "pass" if result.passed else "fail"
        out["maxError"] = "exact" if spec.kind == "exact" else _clean(result.value)
        out["tolerance"] = "exact" if spec.kind == "exact" else _clean(result.tolerance)
        out["details"] = {k: _clean(v) for k, v in sorted(result.details.items())}
        if result.note:
            out["note"] = result.note
    if timings:
        out["elapsed"] = round(elapsed, 3)
    return out


def run(config: SuiteConfig, timings: bool = False, progress=None) -> tuple[dict, RunContext]:
    """Execute the configured suite; returns (report, context holding tables)."""
    validate_overrides(config)
    ctx = RunContext(config)
    entries = []
    for spec in checks_for(config.suite):
        t0 = time.perf_counter()
        result, error = None, None
        try:
            result = _judge(spec, spec.fn(ctx), config)
        except Exception as exc:  # a crashing check is reported, not raised
            error = f"{type(exc).__name__}: {exc}"
            if progress is None:
                traceback.print_exc()
        entry = _entry(spec, result, error, time.perf_counter() - t0, timings)
        entries.append(entry)
        if progress is not None:
            progress(entry)
    entries.sort(key=lambda e: e["checkId"])
    counts = {s: sum(e["status"] == s for e in entries) for s in ("pass", "fail", "error")}
    report = {
        "config": config.as_dict(),
        "seed": config.seed,
        "checks": entries,
        "summary": {"total": len(entries), "passed": counts["pass"], "failed": counts["fail"],
                    "errors": counts["error"], "allPassed": counts["pass"] == len(entries)},
    }
    return report, ctx


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def write_report(report: dict, path) -> Path:
    path = Path(path)
    path.write_text(dumps(report), encoding="utf-8")
    return path


def _cell(v):
    v = _clean(v)
    return repr(v) if isinstance(v, float) else v


def write_tables(tables: dict, directory) -> list[Path]:
    directory = Path(directory)
    written = []
    for name, (header, rows) in sorted(tables.items()):
        path = directory / f"{name}.csv"
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for row in rows:
                w.writerow([_cell(v) for v in row])
        written.append(path)
    return written


def summary_line(entry: dict) -> str:
    status = entry["status"].upper()
    err = entry["maxError"]
    if isinstance(err, float):
        err = f"{err:.3g}"
    tol = entry["tolerance"]
    if isinstance(tol, float):
        tol = f"{tol:.3g}"
    return f"{status:5s} {entry['checkId']:30s} {entry['paperRef']:24s} {err} / {tol}"
