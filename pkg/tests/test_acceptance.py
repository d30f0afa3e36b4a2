"""Acceptance gate: one test per release criterion.

Each test prints a single ``ACCEPTANCE nn PASS|FAIL`` line with the
measured numbers, so ``pytest -v`` doubles as the criterion checklist.
The simulator-backed criteria share module-scoped fixtures that keep
only the derived statistics; raw sessions are dropped as soon as their
exposure tables exist.
"""

from __future__ import annotations

import hashlib
import json
import math
import time

import numpy as np
import pytest

from feedaudit import (
    FleetConfig,
    GroupLabel,
    RankerParams,
    amplification_ratio,
    attention_residual,
    build_amplification_report,
    build_exposure_table,
    build_world,
    calibrate,
    dataset_stats,
    gini,
    lean_labels,
    make_monitors,
    mann_whitney_u,
    read_sessions,
    run_fleet,
    write_sessions,
)
from feedaudit.cli import main
from feedaudit.metrics import exposure_share, group_mean_exposure

from test_mwu import oracle_exact

SEEDS = (0, 1, 2, 3, 4)
N_AUTHORS = 200
SESSION_LEN = 200
FLEET = FleetConfig(
    monitors_per_group=10,
    sessions_per_day=4,
    duration_days=14,
    session_length=SESSION_LEN,
)
# a single out-of-network share for every followed group keeps the null
# and knob-sweep runs comparable across groups
UNIFORM_MIX = {"neutral": 1.0, "left": 0.6, "right": 0.6, "balanced": 0.6}
MODEL = calibrate(SESSION_LEN)
BAL = GroupLabel.BALANCED
SIDES = (GroupLabel.LEFT, GroupLabel.RIGHT)


def _verdict(n: int, ok: bool, detail: str) -> None:
    print(f"ACCEPTANCE {n:02d} {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, detail


def _simulate_tables(seed, *, gamma, kappa, delta, groups=None):
    """One fleet run -> ({group: [per-monitor table]}, ground-truth labels)."""
    world = build_world(n_authors=N_AUTHORS, seed=seed)
    params = RankerParams(
        popularity_exponent=gamma,
        alignment_strength=kappa,
        default_lean=delta,
        oon_mix=UNIFORM_MIX,
        seed=seed,
    )
    monitors = make_monitors(world, FLEET, params.seed)
    if groups is not None:
        monitors = tuple(m for m in monitors if m.group in groups)
    sessions = run_fleet(world, FLEET, params, monitors)
    by_group: dict[GroupLabel, dict[str, list]] = {}
    for s in sessions:
        by_group.setdefault(s.group, {}).setdefault(s.monitor_id, []).append(s)
    tables = {
        g: [
            build_exposure_table(mons[mid], MODEL, scope="out-of-network", attribution="original")
            for mid in sorted(mons)
        ]
        for g, mons in by_group.items()
    }
    stats = dataset_stats(sessions)
    return tables, lean_labels(world), stats


def _median_gini(tables):
    return {
        g: float(np.median([gini(list(t.entries.values())) for t in tabs]))
        for g, tabs in tables.items()
    }


@pytest.fixture(scope="module")
def null_runs():
    """gamma = kappa = delta = 0 fleets: the no-bias ground truth."""
    rows = []
    gamma0_medians: dict[str, list[float]] = {}
    stats0 = None
    elapsed = 0.0
    for seed in SEEDS:
        t0 = time.perf_counter()
        tables, _, stats = _simulate_tables(seed, gamma=0.0, kappa=0.0, delta=0.0)
        for side in SIDES:
            report = build_amplification_report(
                tables[side], tables[BAL], top=50, alpha=0.05
            )
            rows.extend((r.significant, r.ratio_pct) for r in report)
        elapsed += time.perf_counter() - t0
        for g, med in _median_gini(tables).items():
            gamma0_medians.setdefault(g.value, []).append(med)
        if seed == 0:
            stats0 = stats
    return {
        "rows": rows,
        "gamma0_medians": gamma0_medians,
        "stats": stats0,
        "elapsed": elapsed,
    }


@pytest.fixture(scope="module")
def gamma_sweep(null_runs):
    """Mean over seeds of per-group median Gini at each popularity exponent."""
    sweep = {
        0.0: {g: float(np.mean(v)) for g, v in null_runs["gamma0_medians"].items()}
    }
    for gamma in (0.5, 1.0):
        acc: dict[str, list[float]] = {}
        for seed in SEEDS:
            tables, _, _ = _simulate_tables(seed, gamma=gamma, kappa=0.0, delta=0.0)
            for g, med in _median_gini(tables).items():
                acc.setdefault(g.value, []).append(med)
        sweep[gamma] = {g: float(np.mean(v)) for g, v in acc.items()}
    return sweep


@pytest.fixture(scope="module")
def alignment_runs():
    """kappa = 3 fleets: per seed and side, sign-recovery fractions over the
    top-20 aligned and top-20 opposed authors (by pooled mean exposure)."""
    out = []
    for seed in SEEDS:
        tables, labels, _ = _simulate_tables(seed, gamma=0.0, kappa=3.0, delta=0.0)
        for side in SIDES:
            pm = group_mean_exposure(tables[side])
            bm = group_mean_exposure(tables[BAL])
            pooled = {
                a: (pm.get(a, 0.0) + bm.get(a, 0.0)) / 2 for a in set(pm) | set(bm)
            }
            ranked = sorted(pooled, key=lambda a: (-pooled[a], a))
            opposite = "right" if side is GroupLabel.LEFT else "left"
            aligned = [a for a in ranked if labels.get(a) == side.value][:20]
            opposed = [a for a in ranked if labels.get(a) == opposite][:20]
            ratios = {
                a: amplification_ratio(pm.get(a, 0.0), bm.get(a, 0.0))
                for a in aligned + opposed
            }
            out.append(
                {
                    "seed": seed,
                    "side": side.value,
                    "aligned_pos": sum(ratios[a] > 0 for a in aligned) / len(aligned),
                    "opposed_neg": sum(ratios[a] < 0 for a in opposed) / len(opposed),
                }
            )
    return out


@pytest.fixture(scope="module")
def default_lean_runs():
    """Neutral-only fleets with delta = +0.4: top-20 lean shares per seed."""
    shares = []
    for seed in SEEDS:
        tables, labels, _ = _simulate_tables(
            seed, gamma=0.0, kappa=1.0, delta=0.4, groups={GroupLabel.NEUTRAL}
        )
        means = group_mean_exposure(tables[GroupLabel.NEUTRAL])
        right = exposure_share(means, 20, lambda l: l == "right", labels)
        left = exposure_share(means, 20, lambda l: l == "left", labels)
        shares.append((right, left))
    return shares


@pytest.fixture(scope="module")
def random_vectors():
    rng = np.random.default_rng(2024)
    out = []
    for _ in range(1000):
        n = int(rng.integers(2, 201))
        kind = int(rng.integers(0, 4))
        if kind == 0:
            v = rng.uniform(0.0, 100.0, n)
        elif kind == 1:
            v = rng.lognormal(0.0, 2.0, n)
        elif kind == 2:
            v = rng.exponential(5.0, n)
        else:
            v = rng.pareto(1.5, n)
        v[rng.random(n) < 0.2] = 0.0
        if v.sum() == 0.0:
            v[0] = 1.0
        out.append(v)
    return out


def test_acceptance_01_decay_calibration_constant():
    best = math.inf
    for _ in range(5):
        t0 = time.perf_counter()
        model = calibrate(500, 0.2, 0.7)
        best = min(best, time.perf_counter() - t0)
    residual = abs(attention_residual(model))
    ok = (
        abs(model.rate - 0.0120) < 5e-5
        and residual < 1e-10
        and best < 0.010
    )
    _verdict(
        1,
        ok,
        f"lambda={model.rate:.10f} (target 0.0120 +/- 5e-5), "
        f"residual={residual:.3g}, calibration {best * 1e3:.2f} ms",
    )


def test_acceptance_02_gini_matches_double_sum(random_vectors):
    t0 = time.perf_counter()
    worst = 0.0
    for v in random_vectors:
        oracle = float(np.abs(v[:, None] - v).sum() / (2 * len(v) ** 2 * v.mean()))
        worst = max(worst, abs(gini(v) - oracle))
    elapsed = time.perf_counter() - t0
    fixed_ok = gini([0, 0, 0, 1]) == 0.75 and gini([1, 2, 3, 4]) == 0.25
    ok = worst <= 1e-12 and fixed_ok and elapsed < 1.0
    _verdict(
        2,
        ok,
        f"max |sorted - double-sum| = {worst:.2e} over 1000 vectors, "
        f"fixed cases exact: {fixed_ok}, {elapsed:.2f} s",
    )


def test_acceptance_03_lorenz_gini_consistency(random_vectors):
    trapezoid = getattr(np, "trapezoid", None) or np.trapz
    worst = 0.0
    for v in random_vectors:
        x = np.sort(np.asarray(v, dtype=np.float64))
        cum = np.concatenate(([0.0], np.cumsum(x) / x.sum()))
        pop = np.linspace(0.0, 1.0, len(x) + 1)
        auc = float(trapezoid(cum, pop))
        worst = max(worst, abs((1.0 - 2.0 * auc) - gini(v)))
    ok = worst <= 1e-9
    _verdict(3, ok, f"max |1 - 2*AUC - Gini| = {worst:.2e} over 1000 vectors")


def _samples_for_u(k: int):
    """n = m = 8 tie-free samples whose U statistic is exactly k."""
    pos = list(range(8))
    for _ in range(k):
        for i in reversed(range(8)):
            cap = 15 if i == 7 else pos[i + 1] - 1
            if pos[i] < cap:
                pos[i] += 1
                break
    inside = set(pos)
    a = [float(p) for p in pos]
    b = [float(p) for p in range(16) if p not in inside]
    return a, b


def test_acceptance_04_mann_whitney_exactness():
    rng = np.random.default_rng(7)
    worst_exact = 0.0
    for n in range(1, 8):
        for m in range(1, 8):
            for _ in range(2):
                vals = rng.choice(10_000, size=n + m, replace=False).astype(float)
                a, b = list(vals[:n]), list(vals[n:])
                res = mann_whitney_u(a, b, mode="exact")
                _, p_oracle = oracle_exact(a, b)
                worst_exact = max(worst_exact, abs(res.pvalue - float(p_oracle)))
    worst_normal = 0.0
    for u in range(0, 65):  # every achievable statistic at n = m = 8
        a, b = _samples_for_u(u)
        p_exact = mann_whitney_u(a, b, mode="exact").pvalue
        p_normal = mann_whitney_u(a, b, mode="normal").pvalue
        worst_normal = max(worst_normal, abs(p_normal - p_exact))
    ok = worst_exact <= 1e-12 and worst_normal < 0.01
    _verdict(
        4,
        ok,
        f"exact vs enumeration (all n,m <= 7): {worst_exact:.2e}; "
        f"normal vs exact at n=m=8: {worst_normal:.5f} (< 0.01)",
    )


def test_acceptance_05_null_run_false_positives(null_runs):
    rows = null_runs["rows"]
    frac_sig = sum(sig for sig, _ in rows) / len(rows)
    bound = 0.05 + 2 * math.sqrt(0.05 * 0.95 / len(rows))
    mean_abs = sum(abs(r) for _, r in rows) / len(rows)
    ok = (
        len(rows) == 500
        and frac_sig <= bound
        and mean_abs < 5.0
        and null_runs["elapsed"] < 60.0
    )
    _verdict(
        5,
        ok,
        f"{len(rows)} rows, significant {100 * frac_sig:.2f}% "
        f"(bound {100 * bound:.2f}%), mean |a_u| = {mean_abs:.2f}% (< 5%), "
        f"{null_runs['elapsed']:.1f} s (< 60 s)",
    )


def test_acceptance_06_alignment_bias_recovery(alignment_runs):
    worst_aligned = min(r["aligned_pos"] for r in alignment_runs)
    worst_opposed = min(r["opposed_neg"] for r in alignment_runs)
    ok = worst_aligned >= 0.8 and worst_opposed >= 0.8
    _verdict(
        6,
        ok,
        f"kappa=3, per (seed, group) minima: aligned a_u>0 in "
        f"{100 * worst_aligned:.0f}%, opposed a_u<0 in {100 * worst_opposed:.0f}% "
        f"of top-20 (both must be >= 80%)",
    )


def test_acceptance_07_popularity_concentration(gamma_sweep):
    groups = sorted(gamma_sweep[0.0])
    monotone = all(
        gamma_sweep[0.0][g] < gamma_sweep[0.5][g] < gamma_sweep[1.0][g] for g in groups
    )
    high = all(gamma_sweep[gam][g] > 0.45 for gam in (0.5, 1.0) for g in groups)
    ok = monotone and high
    med = {gam: round(float(np.mean(list(vals.values()))), 3) for gam, vals in gamma_sweep.items()}
    _verdict(
        7,
        ok,
        f"median Gini by gamma (seed-averaged, grand mean): {med}; "
        f"strictly increasing per group: {monotone}, > 0.45 at gamma >= 0.5: {high}",
    )


def test_acceptance_08_default_lean_recovery(default_lean_runs):
    ok = all(right > left for right, left in default_lean_runs)
    shares = ", ".join(f"{r:.2f}/{l:.2f}" for r, l in default_lean_runs)
    _verdict(
        8,
        ok,
        f"delta=+0.4 neutral top-20 shares right/left per seed: {shares} "
        f"(right must exceed left in every seed)",
    )


def test_acceptance_09_composition_statistics(null_runs):
    stats = null_runs["stats"]
    checks = []
    for g in stats.groups:
        checks.append(abs(g.promoted_mean - 0.075) <= 0.02)
        checks.append(abs(g.retweet_mean - 0.025) <= 0.02)
        checks.append(abs(g.quote_mean - 0.11) <= 0.02)
        if g.group == "neutral":
            checks.append(g.oon_mean == 1.0)
        else:
            checks.append(abs(g.oon_mean - 0.6) <= 0.02)
    neutral = next(g for g in stats.groups if g.group == "neutral")
    ok = stats.total_sessions >= 500 and all(checks)
    _verdict(
        9,
        ok,
        f"{stats.total_sessions} sessions; all group rates within 2 pp of "
        f"configured values: {all(checks)}; neutral OON share = "
        f"{100 * neutral.oon_mean:.1f}% (must be exactly 100%)",
    )


def test_acceptance_10_pipeline_determinism(tmp_path):
    config = tmp_path / "config.json"
    config.write_text(
        json.dumps(
            {
                "seed": 0,
                "world": {"n_authors": N_AUTHORS},
                "fleet": {
                    "monitors_per_group": 10,
                    "sessions_per_day": 4,
                    "duration_days": 14,
                    "session_length": SESSION_LEN,
                },
            }
        )
    )
    t0 = time.perf_counter()
    dirs = (tmp_path / "run1", tmp_path / "run2")
    for d in dirs:
        assert main(["pipeline", "--config", str(config), "--out-dir", str(d)]) == 0
    names = sorted(p.name for p in dirs[0].iterdir())
    identical = all(
        hashlib.sha256((dirs[0] / n).read_bytes()).digest()
        == hashlib.sha256((dirs[1] / n).read_bytes()).digest()
        for n in names
    )
    sessions = read_sessions(dirs[0] / "sessions.csv").sessions
    rewritten = tmp_path / "rewritten.csv"
    write_sessions(sessions, rewritten)
    round_trip = read_sessions(rewritten).sessions == sessions
    elapsed = time.perf_counter() - t0
    lines = sum(1 for _ in (dirs[0] / "sessions.csv").open())
    ok = identical and round_trip and elapsed < 120.0 and lines > 400_000
    _verdict(
        10,
        ok,
        f"{len(names)} artifacts byte-identical on rerun: {identical}; "
        f"round-trip over {lines - 1} log lines equal: {round_trip}; "
        f"{elapsed:.1f} s (< 120 s)",
    )
