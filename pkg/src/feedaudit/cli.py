"""Command-line interface.

Subcommands cover the full audit chain: calibrate a decay model,
simulate a monitor fleet, ingest and validate stored logs, and compute
composition stats, Gini/Lorenz inequality, top-k exposure, and
amplification reports. ``pipeline`` runs everything end to end into an
output directory with a deterministic run manifest.

Exit codes: 0 success, 2 configuration error, 3 data error,
4 analysis error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from datetime import datetime
from enum import Enum
from pathlib import Path
from types import MappingProxyType
from typing import Any, Mapping, Sequence

from . import __version__
from .amplify import (
    build_amplification_report,
    group_amplification_magnitude,
)
from .decay import DecayModel, attention_residual, calibrate
from .errors import AnalysisError, ConfigError, DataError, FeedAuditError
from .inequality import average_lorenz, gini, group_gini_distribution, lorenz
from .metrics import (
    ExposureTable,
    build_exposure_table,
    exposure_share,
    group_mean_exposure,
    top_k,
)
from .model import GROUP_ORDER, GroupLabel, SessionRecord, ensure_utc
from .simkit import FleetConfig, LeanMixture, RankerParams, build_world, make_monitors, run_fleet
from .store import (
    dataset_stats,
    emit_report,
    format_float,
    read_authors,
    read_sessions,
    write_authors,
    write_sessions,
)

_ALLOWED_KEYS: dict[str, set[str] | None] = {
    "seed": None,
    "world": {"n_authors", "zipf_exponent", "preset_pools", "lean_mixture", "seed"},
    "ranker": {
        "popularity_exponent",
        "alignment_strength",
        "default_lean",
        "oon_mix",
        "promoted_rate",
        "retweet_rate",
        "quote_rate",
        "rank_jitter",
        "seed",
    },
    "fleet": {
        "monitors_per_group",
        "sessions_per_day",
        "duration_days",
        "session_length",
        "start",
        "neutral_churn_days",
        "follows_moderate",
        "follows_strong",
        "balanced_per_side",
    },
    "decay": {"top_fraction", "attention_fraction", "amplitude"},
    "analysis": {
        "scope",
        "attribution",
        "include_promoted",
        "top",
        "alpha_amplify",
        "alpha_gini",
        "mw_mode",
        "lean_threshold",
        "lorenz_grid",
    },
}

_ANALYSIS_DEFAULTS: dict[str, Any] = {
    "scope": "out-of-network",
    "attribution": "original",
    "include_promoted": True,
    "top": 50,
    "alpha_amplify": 0.05,
    "alpha_gini": 0.001,
    "mw_mode": "auto",
    "lean_threshold": 0.3,
    "lorenz_grid": 100,
}

_DECAY_DEFAULTS: dict[str, Any] = {
    "top_fraction": 0.2,
    "attention_fraction": 0.7,
    "amplitude": None,
}


def load_config(path: str | None) -> dict[str, Any]:
    """Load and strictly validate a JSON config file.

    Unknown keys are rejected so typos fail loudly instead of silently
    falling back to defaults.
    """
    if path is None:
        return {}
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {p}")
    try:
        cfg = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a JSON object")
    for key, value in cfg.items():
        if key not in _ALLOWED_KEYS:
            raise ConfigError(f"unknown config key {key!r}")
        allowed = _ALLOWED_KEYS[key]
        if allowed is None:
            continue
        if not isinstance(value, dict):
            raise ConfigError(f"config section {key!r} must be an object")
        for sub in value:
            if sub not in allowed:
                raise ConfigError(f"unknown config key {key!r}.{sub!r}")
    mixture = cfg.get("world", {}).get("lean_mixture")
    if mixture is not None:
        if not isinstance(mixture, dict):
            raise ConfigError("world.lean_mixture must be an object")
        for sub in mixture:
            if sub not in {"weights", "means", "stds"}:
                raise ConfigError(f"unknown config key 'world'.'lean_mixture'.{sub!r}")
    return cfg


def _parse_cli_ts(text: str) -> datetime:
    try:
        return ensure_utc(datetime.fromisoformat(text.replace("Z", "+00:00")))
    except ValueError:
        raise ConfigError(f"bad timestamp {text!r}; use RFC-3339, e.g. 2024-10-02T00:00:00Z") from None


def build_sim_objects(
    cfg: Mapping[str, Any]
) -> tuple[Any, FleetConfig, RankerParams]:
    """Turn a validated config dict into world/fleet/ranker objects."""
    seed = cfg.get("seed", 0)
    if not isinstance(seed, int):
        raise ConfigError(f"seed must be an integer, got {seed!r}")
    try:
        wcfg = dict(cfg.get("world", {}))
        mixture = wcfg.pop("lean_mixture", None)
        if mixture is not None:
            wcfg["lean_mixture"] = LeanMixture(
                weights=tuple(mixture.get("weights", LeanMixture.weights)),
                means=tuple(mixture.get("means", LeanMixture.means)),
                stds=tuple(mixture.get("stds", LeanMixture.stds)),
            )
        wcfg.setdefault("seed", seed)
        world = build_world(**wcfg)

        rcfg = dict(cfg.get("ranker", {}))
        rcfg.setdefault("seed", seed)
        params = RankerParams(**rcfg)

        fcfg = dict(cfg.get("fleet", {}))
        if "start" in fcfg:
            fcfg["start"] = _parse_cli_ts(str(fcfg["start"]))
        fleet = FleetConfig(**fcfg)
    except TypeError as exc:
        raise ConfigError(f"bad config value: {exc}") from None
    return world, fleet, params


def analysis_options(
    cfg: Mapping[str, Any], args: argparse.Namespace | None = None
) -> dict[str, Any]:
    out = {**_ANALYSIS_DEFAULTS, **cfg.get("analysis", {})}
    # Command-line flags override the config file.
    if args is not None:
        if getattr(args, "scope", None):
            out["scope"] = args.scope
        if getattr(args, "attribution", None):
            out["attribution"] = args.attribution
    if out["mw_mode"] not in ("auto", "exact", "normal"):
        raise ConfigError(f"analysis.mw_mode must be auto/exact/normal, got {out['mw_mode']!r}")
    return out


def decay_options(cfg: Mapping[str, Any]) -> dict[str, Any]:
    return {**_DECAY_DEFAULTS, **cfg.get("decay", {})}


def _group_sessions(
    sessions: Sequence[SessionRecord],
) -> dict[GroupLabel, dict[str, list[SessionRecord]]]:
    grouped: dict[GroupLabel, dict[str, list[SessionRecord]]] = {}
    ungrouped = 0
    for s in sessions:
        if s.group is None:
            ungrouped += 1
            continue
        grouped.setdefault(s.group, {}).setdefault(s.monitor_id, []).append(s)
    if ungrouped:
        print(f"note: ignoring {ungrouped} sessions without a group label", file=sys.stderr)
    if not grouped:
        raise DataError("no group-labeled sessions to analyze")
    return grouped


def _calibrated_models(
    grouped: Mapping[GroupLabel, Mapping[str, Sequence[SessionRecord]]],
    decay_cfg: Mapping[str, Any],
) -> dict[GroupLabel, DecayModel]:
    models = {}
    for group, monitors in grouped.items():
        lengths = [len(s) for sess in monitors.values() for s in sess]
        mean_len = round(sum(lengths) / len(lengths))
        if mean_len < 5:
            raise DataError(f"group {group.value} sessions too short to calibrate (mean {mean_len})")
        models[group] = calibrate(
            mean_len,
            decay_cfg["top_fraction"],
            decay_cfg["attention_fraction"],
            decay_cfg["amplitude"],
        )
    return models


def _exposure_tables(
    grouped: Mapping[GroupLabel, Mapping[str, Sequence[SessionRecord]]],
    models: Mapping[GroupLabel, DecayModel],
    analysis: Mapping[str, Any],
) -> dict[GroupLabel, list[ExposureTable]]:
    tables: dict[GroupLabel, list[ExposureTable]] = {}
    for group, monitors in grouped.items():
        tables[group] = [
            build_exposure_table(
                monitors[mid],
                models[group],
                scope=analysis["scope"],
                attribution=analysis["attribution"],
                include_promoted=analysis["include_promoted"],
            )
            for mid in sorted(monitors)
        ]
    return tables


def _read_with_filters(args: argparse.Namespace):
    return read_sessions(
        args.input,
        group=args.group if getattr(args, "group", None) else None,
        monitor_id=getattr(args, "monitor", None),
        start=_parse_cli_ts(args.start) if getattr(args, "start", None) else None,
        end=_parse_cli_ts(args.end) if getattr(args, "end", None) else None,
    )


def _jsonable(value: Any) -> Any:
    if isinstance(value, (MappingProxyType, dict)):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return _jsonable(dataclasses.asdict(value))
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, datetime):
        return ensure_utc(value).isoformat().replace("+00:00", "Z")
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, float):
        return float(format_float(value))
    return value


# ---------------------------------------------------------------- commands


def cmd_calibrate(args: argparse.Namespace) -> int:
    model = calibrate(args.length, args.top, args.attention, args.amplitude)
    payload = {
        "length": model.reference_length,
        "top_fraction": model.top_fraction,
        "attention_fraction": model.attention_fraction,
        "amplitude": model.amplitude,
        "rate": model.rate,
        "residual": attention_residual(model),
        "visibility_rank_1": model.visibility(1),
        "visibility_rank_last": model.visibility(model.reference_length),
    }
    if args.json:
        print(json.dumps({k: _jsonable(v) for k, v in payload.items()}, indent=2))
    else:
        print(
            f"p(r) = {model.amplitude:.6g} * exp(-{model.rate:.6g} * r)  "
            f"[length {model.reference_length}, top {model.top_fraction:g} of ranks "
            f"carry {model.attention_fraction:g} of attention, "
            f"residual {attention_residual(model):.3g}]"
        )
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg["seed"] = args.seed
        cfg.setdefault("world", {}).pop("seed", None)
        cfg.setdefault("ranker", {}).pop("seed", None)
    if args.days is not None:
        cfg.setdefault("fleet", {})["duration_days"] = args.days
    if args.monitors is not None:
        cfg.setdefault("fleet", {})["monitors_per_group"] = args.monitors
    world, fleet, params = build_sim_objects(cfg)
    monitors = make_monitors(world, fleet, params.seed)
    sessions = run_fleet(world, fleet, params, monitors)
    n = write_sessions(sessions, args.out)
    tweets = sum(len(s) for s in sessions)
    print(f"wrote {n} sessions ({tweets} tweets) to {args.out}")
    if args.authors_out:
        analysis = analysis_options(cfg)
        count = write_authors(world.authors, args.authors_out, lean_threshold=analysis["lean_threshold"])
        print(f"wrote {count} authors to {args.authors_out}")
    return 0


def cmd_ingest(args: argparse.Namespace) -> int:
    res = _read_with_filters(args)
    print(
        f"sessions: {res.total} parsed, {len(res.sessions)} valid, "
        f"{res.filtered} filtered out, {res.skipped} skipped"
    )
    for sid, issues in list(res.violations.items())[:10]:
        print(f"  {sid}: {'; '.join(issues[:3])}")
    if args.strict and res.skipped:
        raise DataError(f"{res.skipped} sessions failed validation")
    return 0


def _stats_rows(sessions: Sequence[SessionRecord]) -> list[dict[str, Any]]:
    stats = dataset_stats(sessions)
    rows = []
    for g in stats.groups:
        rows.append(
            {
                "group": g.group,
                "monitors": g.monitors,
                "sessions": g.sessions,
                "tweets": g.tweets,
                "oon_mean": g.oon_mean,
                "oon_std": g.oon_std,
                "retweet_mean": g.retweet_mean,
                "retweet_std": g.retweet_std,
                "quote_mean": g.quote_mean,
                "quote_std": g.quote_std,
                "promoted_mean": g.promoted_mean,
                "promoted_std": g.promoted_std,
            }
        )
    return rows


def cmd_stats(args: argparse.Namespace) -> int:
    res = _read_with_filters(args)
    if not res.sessions:
        raise DataError("no valid sessions after filtering")
    rows = _stats_rows(res.sessions)
    if args.out:
        emit_report(rows, args.out, fmt=args.format)
        print(f"wrote {args.out}")
    else:
        for r in rows:
            print(
                f"{r['group']:<9} monitors={r['monitors']:<3} sessions={r['sessions']:<5} "
                f"oon={100 * r['oon_mean']:.2f}%({100 * r['oon_std']:.2f}) "
                f"rt={100 * r['retweet_mean']:.2f}%({100 * r['retweet_std']:.2f}) "
                f"quote={100 * r['quote_mean']:.2f}%({100 * r['quote_std']:.2f}) "
                f"promoted={100 * r['promoted_mean']:.2f}%({100 * r['promoted_std']:.2f})"
            )
    return 0


def _prepare_tables(args: argparse.Namespace, cfg: Mapping[str, Any]):
    res = _read_with_filters(args)
    if not res.sessions:
        raise DataError("no valid sessions after filtering")
    grouped = _group_sessions(res.sessions)
    models = _calibrated_models(grouped, decay_options(cfg))
    analysis = analysis_options(cfg, args)
    tables = _exposure_tables(grouped, models, analysis)
    return res, grouped, models, analysis, tables


def cmd_gini(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    _, _, _, analysis, tables = _prepare_tables(args, cfg)
    alpha = args.alpha if args.alpha is not None else analysis["alpha_gini"]
    report = group_gini_distribution(tables, alpha=alpha, mode=analysis["mw_mode"])
    medians = report.medians()
    for group, values in report.per_group.items():
        print(
            f"{group:<9} median={medians[group]:.4f} "
            f"min={min(values):.4f} max={max(values):.4f} n={len(values)}"
        )
    for c in report.comparisons:
        flag = "*" if c.significant else " "
        print(
            f"{c.group_a} vs {c.group_b}: U={c.statistic:g} p={c.pvalue:.4g}{flag} ({c.method})"
        )
    if args.out:
        rows = [
            {"group": group.value, "monitor_id": t.monitor_id, "gini": g}
            for group in GROUP_ORDER
            if group in tables
            for t, g in zip(tables[group], report.per_group[group.value])
        ]
        emit_report(rows, args.out, fmt=args.format)
        print(f"wrote {args.out}")
    return 0


def _lorenz_rows(
    tables: Mapping[GroupLabel, Sequence[ExposureTable]], grid_size: int
) -> list[dict[str, Any]]:
    rows = []
    for group in GROUP_ORDER:
        if group not in tables:
            continue
        curves = [lorenz(list(t.entries.values())) for t in tables[group]]
        band = average_lorenz(curves, grid_size=grid_size)
        rows.extend(
            {"group": group.value, "population_share": x, "exposure_share_mean": m, "exposure_share_std": s}
            for x, m, s in zip(band.grid, band.mean, band.std)
        )
    return rows


def cmd_lorenz(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    _, _, _, analysis, tables = _prepare_tables(args, cfg)
    rows = _lorenz_rows(tables, analysis["lorenz_grid"])
    emit_report(rows, args.out, fmt=args.format)
    print(f"wrote {args.out}")
    return 0


def _topk_rows(
    tables: Mapping[GroupLabel, Sequence[ExposureTable]],
    group: GroupLabel,
    k: int,
    labels: Mapping[str, str],
) -> list[dict[str, Any]]:
    if group not in tables:
        raise DataError(f"no sessions for group {group.value}")
    means = group_mean_exposure(tables[group])
    return [
        {
            "group": group.value,
            "author_id": a,
            "mean_exposure": e,
            "lean_label": labels.get(a, "unknown"),
        }
        for a, e in top_k(means, k)
    ]


def cmd_topk(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    _, _, _, analysis, tables = _prepare_tables(args, cfg)
    labels = {}
    if args.authors:
        labels = {a: info.label for a, info in read_authors(args.authors).items()}
    group = GroupLabel(args.target_group)
    rows = _topk_rows(tables, group, args.k, labels)
    for r in rows:
        print(f"{r['author_id']:<12} {r['mean_exposure']:.4f}  {r['lean_label']}")
    if labels:
        means = group_mean_exposure(tables[group])
        for side in ("left", "right"):
            share = exposure_share(means, args.k, lambda l, s=side: l == s, labels)
            print(f"top-{args.k} exposure share, {side}-leaning authors: {share:.4f}")
    if args.out:
        emit_report(rows, args.out, fmt=args.format)
        print(f"wrote {args.out}")
    return 0


def _amplify_rows(rows) -> list[dict[str, Any]]:
    return [
        {
            "author_id": r.author_id,
            "lean_label": r.lean_label,
            "mean_E_group": r.partisan_mean,
            "mean_E_balanced": r.baseline_mean,
            "ratio_pct": r.ratio_pct,
            "U": r.statistic,
            "p": r.pvalue,
            "significant": r.significant,
        }
        for r in rows
    ]


def cmd_amplify(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    _, _, _, analysis, tables = _prepare_tables(args, cfg)
    partisan = GroupLabel(args.partisan)
    baseline = GroupLabel(args.baseline)
    for g in (partisan, baseline):
        if g not in tables:
            raise DataError(f"no sessions for group {g.value}")
    labels = {}
    if args.authors:
        labels = {a: info.label for a, info in read_authors(args.authors).items()}
    top = args.k if args.k is not None else analysis["top"]
    if args.all:
        top = len({a for t in (*tables[partisan], *tables[baseline]) for a in t.entries})
    alpha = args.alpha if args.alpha is not None else analysis["alpha_amplify"]
    rows = build_amplification_report(
        tables[partisan],
        tables[baseline],
        top=top,
        alpha=alpha,
        leans=labels,
        mode=analysis["mw_mode"],
    )
    n_sig = sum(r.significant for r in rows)
    n_pos = sum(r.ratio_pct > 0 for r in rows)
    print(
        f"{partisan.value} vs {baseline.value}: {len(rows)} authors, "
        f"{n_pos} amplified, {n_sig} significant at alpha={alpha:g}"
    )
    for r in rows[:10]:
        flag = "*" if r.significant else " "
        print(
            f"  {r.author_id:<12} {r.ratio_pct:+8.2f}%{flag} "
            f"(partisan {r.partisan_mean:.3f}, baseline {r.baseline_mean:.3f}, p={r.pvalue:.3g})"
        )
    if args.out:
        emit_report(_amplify_rows(rows), args.out, fmt=args.format)
        print(f"wrote {args.out}")
    return 0


def cmd_pipeline(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg["seed"] = args.seed
        cfg.setdefault("world", {}).pop("seed", None)
        cfg.setdefault("ranker", {}).pop("seed", None)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    analysis = analysis_options(cfg, args)
    artifacts: list[str] = []

    def artifact(name: str) -> Path:
        artifacts.append(name)
        return out_dir / name

    labels: dict[str, str] = {}
    if args.input:
        res = read_sessions(args.input)
        sessions = list(res.sessions)
        source: Any = str(args.input)
        if args.authors:
            labels = {a: info.label for a, info in read_authors(args.authors).items()}
        ingest_info = {
            "total": res.total,
            "filtered": res.filtered,
            "skipped": res.skipped,
        }
    else:
        world, fleet, params = build_sim_objects(cfg)
        monitors = make_monitors(world, fleet, params.seed)
        sessions = run_fleet(world, fleet, params, monitors)
        write_sessions(sessions, artifact("sessions.csv"))
        write_authors(
            world.authors,
            artifact("authors.csv"),
            lean_threshold=analysis["lean_threshold"],
        )
        labels = {
            a: info.label for a, info in read_authors(out_dir / "authors.csv").items()
        }
        source = {"simulated": True, "seed": cfg.get("seed", 0)}
        ingest_info = {"total": len(sessions), "filtered": 0, "skipped": 0}
    if not sessions:
        raise DataError("no valid sessions to analyze")

    emit_report(_stats_rows(sessions), artifact("stats.csv"))

    grouped = _group_sessions(sessions)
    decay_cfg = decay_options(cfg)
    models = _calibrated_models(grouped, decay_cfg)
    tables = _exposure_tables(grouped, models, analysis)

    gini_report = group_gini_distribution(
        tables, alpha=analysis["alpha_gini"], mode=analysis["mw_mode"]
    )
    emit_report(
        [
            {
                "group": group.value,
                "monitor_id": t.monitor_id,
                "gini": g,
            }
            for group in GROUP_ORDER
            if group in tables
            for t, g in zip(tables[group], gini_report.per_group[group.value])
        ],
        artifact("gini_monitors.csv"),
    )
    emit_report(
        [
            {
                "group_a": c.group_a,
                "group_b": c.group_b,
                "u_statistic": c.statistic,
                "pvalue": c.pvalue,
                "significant": c.significant,
                "method": c.method,
            }
            for c in gini_report.comparisons
        ],
        artifact("gini_pairwise.csv"),
    )

    emit_report(_lorenz_rows(tables, analysis["lorenz_grid"]), artifact("lorenz.csv"))

    topk_rows: list[dict[str, Any]] = []
    for group in GROUP_ORDER:
        if group in tables:
            topk_rows.extend(_topk_rows(tables, group, analysis["top"], labels))
    emit_report(topk_rows, artifact("topk.csv"))

    summary: dict[str, Any] = {
        "gini_median": gini_report.medians(),
        "shares": {},
    }
    if labels:
        for group in GROUP_ORDER:
            if group not in tables:
                continue
            means = group_mean_exposure(tables[group])
            try:
                summary["shares"][group.value] = {
                    side: exposure_share(
                        means, analysis["top"], lambda l, s=side: l == s, labels
                    )
                    for side in ("left", "right")
                }
            except AnalysisError:
                continue

    reports = {}
    for group in (GroupLabel.LEFT, GroupLabel.RIGHT):
        if group in tables and GroupLabel.BALANCED in tables:
            rows = build_amplification_report(
                tables[group],
                tables[GroupLabel.BALANCED],
                top=analysis["top"],
                alpha=analysis["alpha_amplify"],
                leans=labels,
                mode=analysis["mw_mode"],
            )
            reports[group] = rows
            emit_report(_amplify_rows(rows), artifact(f"amplify_{group.value}.csv"))
    if len(reports) == 2:
        try:
            mag = group_amplification_magnitude(
                reports[GroupLabel.LEFT], reports[GroupLabel.RIGHT], mode=analysis["mw_mode"]
            )
            summary["magnitude_left_vs_right"] = _jsonable(mag)
        except AnalysisError as exc:
            summary["magnitude_left_vs_right"] = {"error": str(exc)}

    with (out_dir / "summary.json").open("w", encoding="utf-8") as fh:
        json.dump(_jsonable(summary), fh, indent=2, sort_keys=True)
        fh.write("\n")
    artifacts.append("summary.json")

    manifest = {
        "version": __version__,
        "seed": cfg.get("seed", 0),
        "source": source,
        "ingest": ingest_info,
        "config": {
            "decay": decay_cfg,
            "analysis": analysis,
            **{k: cfg[k] for k in ("world", "ranker", "fleet") if k in cfg},
        },
        "decay_models": {
            group.value: {
                "length": models[group].reference_length,
                "amplitude": models[group].amplitude,
                "rate": models[group].rate,
            }
            for group in GROUP_ORDER
            if group in models
        },
        "sessions": len(sessions),
        "tweets": sum(len(s) for s in sessions),
        "time_range": [
            min(s.captured_at for s in sessions),
            max(s.captured_at for s in sessions),
        ],
        "artifacts": sorted(artifacts + ["manifest.json"]),
    }
    with (out_dir / "manifest.json").open("w", encoding="utf-8") as fh:
        json.dump(_jsonable(manifest), fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"pipeline complete: {len(artifacts) + 1} artifacts in {out_dir}")
    return 0


# ----------------------------------------------------------------- parser


def _add_io_flags(p: argparse.ArgumentParser, with_filters: bool = True) -> None:
    p.add_argument("--input", required=True, help="session log CSV")
    if with_filters:
        p.add_argument("--group", choices=[g.value for g in GROUP_ORDER])
        p.add_argument("--monitor", help="only this monitor id")
        p.add_argument("--start", help="include captures at/after this RFC-3339 time")
        p.add_argument("--end", help="include captures before this RFC-3339 time")


def _add_report_flags(p: argparse.ArgumentParser, out_required: bool = False) -> None:
    p.add_argument("--out", required=out_required, help="write a report file")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--scope", choices=["out-of-network", "all"], help="which appearances count (default: config)")
    p.add_argument("--attribution", choices=["original", "displayed"], help="who a retweet credits (default: config)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="feedaudit",
        description="Audit out-of-network exposure bias in ranked feeds.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("calibrate", help="calibrate a rank-decay visibility model")
    p.add_argument("--length", type=int, required=True, help="timeline length")
    p.add_argument("--top", type=float, default=0.2, help="top fraction of ranks")
    p.add_argument("--attention", type=float, default=0.7, help="attention share of the top ranks")
    p.add_argument("--amplitude", type=float, default=None, help="explicit amplitude (default: unit visibility at rank 1)")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("simulate", help="simulate a monitor fleet")
    p.add_argument("--out", required=True, help="session log to write")
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--seed", type=int)
    p.add_argument("--days", type=int)
    p.add_argument("--monitors", type=int, help="monitors per group")
    p.add_argument("--authors-out", help="also write the author roster")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("ingest", help="validate a session log")
    _add_io_flags(p)
    p.add_argument("--strict", action="store_true", help="fail if any session is skipped")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("stats", help="per-group composition statistics")
    _add_io_flags(p)
    p.add_argument("--out")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("gini", help="per-monitor Gini with pairwise group tests")
    _add_io_flags(p)
    _add_report_flags(p)
    p.add_argument("--alpha", type=float, default=None, help="pairwise-test level (default: analysis.alpha_gini)")
    p.set_defaults(func=cmd_gini)

    p = sub.add_parser("lorenz", help="group-averaged Lorenz curves")
    _add_io_flags(p)
    _add_report_flags(p, out_required=True)
    p.set_defaults(func=cmd_lorenz)

    p = sub.add_parser("topk", help="top-k authors by group mean exposure")
    _add_io_flags(p)
    _add_report_flags(p)
    p.add_argument("--target-group", required=True, choices=[g.value for g in GROUP_ORDER])
    p.add_argument("-k", "--top", dest="k", type=int, default=20)
    p.add_argument("--authors", help="author roster CSV for lean labels")
    p.set_defaults(func=cmd_topk)

    p = sub.add_parser("amplify", help="amplification vs the balanced baseline")
    _add_io_flags(p)
    _add_report_flags(p)
    p.add_argument("--partisan", required=True, choices=["left", "right"])
    p.add_argument("--baseline", default="balanced", choices=[g.value for g in GROUP_ORDER])
    p.add_argument("-k", "--top", dest="k", type=int, default=None, help="authors to test (default: analysis.top)")
    p.add_argument("--all", action="store_true", help="test every observed author, not just the top k")
    p.add_argument("--alpha", type=float, default=None, help="significance level (default: analysis.alpha_amplify)")
    p.add_argument("--authors", help="author roster CSV for lean labels")
    p.set_defaults(func=cmd_amplify)

    p = sub.add_parser("report", help="run every analysis on an existing session log")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--input", required=True, help="session log CSV to analyze")
    p.add_argument("--authors", help="author roster CSV for lean labels")
    p.add_argument("--scope", choices=["out-of-network", "all"])
    p.add_argument("--attribution", choices=["original", "displayed"])
    p.set_defaults(func=cmd_pipeline, seed=None)

    p = sub.add_parser("pipeline", help="simulate (or ingest) and run every analysis")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--seed", type=int)
    p.add_argument("--input", help="analyze this log instead of simulating")
    p.add_argument("--authors", help="author roster CSV (with --input)")
    p.add_argument("--scope", choices=["out-of-network", "all"])
    p.add_argument("--attribution", choices=["original", "displayed"])
    p.set_defaults(func=cmd_pipeline)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except AnalysisError as exc:
        print(f"analysis error: {exc}", file=sys.stderr)
        return 4
    except FeedAuditError as exc:  # pragma: no cover - safety net
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
