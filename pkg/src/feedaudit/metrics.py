"""Weighted author-exposure metrics.

The core quantity is the weighted occurrence of an author per 1,000
timeline tweets: each appearance contributes the visibility weight of
its rank, the weighted sum is normalized by the monitor's total tweet
count across all sessions, and scaled by 1,000. Scope filters (e.g.
out-of-network only) restrict which appearances count toward the
numerator; the denominator always counts every tweet the monitor saw,
so exposures stay comparable across scopes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

from .errors import AnalysisError, ConfigError, DataError
from .decay import DecayModel
from .model import AuthorId, GroupLabel, LEAN_UNKNOWN, SessionRecord

# Which appearances count toward exposure.
SCOPE_OON = "out-of-network"
SCOPE_ALL = "all"
_SCOPES = (SCOPE_OON, SCOPE_ALL)

# Who gets credited for a retweet: the original author or the account
# that surfaced it on the timeline.
ATTR_ORIGINAL = "original"
ATTR_DISPLAYED = "displayed"
_ATTRIBUTIONS = (ATTR_ORIGINAL, ATTR_DISPLAYED)


@dataclass(frozen=True)
class ExposureTable:
    """Per-author weighted occurrences for one monitor.

    ``entries`` maps author id to exposure per 1,000 tweets; authors
    that never appeared (in scope) are absent and implicitly have
    exposure 0. ``total_tweets`` is the all-scope denominator N.
    """

    monitor_id: str
    total_tweets: int
    entries: Mapping[AuthorId, float]
    scope: str = SCOPE_OON
    attribution: str = ATTR_ORIGINAL
    group: GroupLabel | None = None

    def get(self, author_id: AuthorId) -> float:
        return self.entries.get(author_id, 0.0)

    def total_exposure(self) -> float:
        return sum(self.entries.values())


def _check_options(scope: str, attribution: str) -> None:
    if scope not in _SCOPES:
        raise ConfigError(f"unknown scope {scope!r}; expected one of {_SCOPES}")
    if attribution not in _ATTRIBUTIONS:
        raise ConfigError(
            f"unknown attribution {attribution!r}; expected one of {_ATTRIBUTIONS}"
        )


def build_exposure_table(
    sessions: Iterable[SessionRecord],
    model: DecayModel,
    *,
    scope: str = SCOPE_OON,
    attribution: str = ATTR_ORIGINAL,
    include_promoted: bool = True,
) -> ExposureTable:
    """Aggregate one monitor's sessions into an exposure table.

    All sessions must belong to a single monitor. ``include_promoted``
    only filters the numerator; promoted tweets always count toward N.
    """
    _check_options(scope, attribution)
    sessions = list(sessions)
    if not sessions:
        raise DataError("cannot build an exposure table from zero sessions")
    monitor_ids = {s.monitor_id for s in sessions}
    if len(monitor_ids) > 1:
        raise DataError(
            f"sessions span multiple monitors: {sorted(monitor_ids)}; "
            "build one table per monitor"
        )
    groups = {s.group for s in sessions}
    group = groups.pop() if len(groups) == 1 else None

    oon_only = scope == SCOPE_OON
    by_original = attribution == ATTR_ORIGINAL
    total = 0
    sums: dict[AuthorId, float] = {}
    for s in sessions:
        if not s.entries:
            continue
        total += len(s.entries)
        weights = model.weights(len(s.entries))
        for e in s.entries:
            if oon_only and e.in_network:
                continue
            if not include_promoted and e.is_promoted:
                continue
            author = e.author_id if by_original else e.displayed_author_id
            w = weights[e.rank - 1] if e.rank <= len(weights) else model.visibility(e.rank)
            sums[author] = sums.get(author, 0.0) + w
    if total == 0:
        raise DataError("sessions contain no tweets")

    scale = 1000.0 / total
    entries = {a: w * scale for a, w in sums.items()}
    return ExposureTable(
        monitor_id=monitor_ids.pop(),
        total_tweets=total,
        entries=entries,
        scope=scope,
        attribution=attribution,
        group=group,
    )


def weighted_occurrence(
    sessions: Iterable[SessionRecord],
    model: DecayModel,
    author_id: AuthorId,
    *,
    scope: str = SCOPE_OON,
    attribution: str = ATTR_ORIGINAL,
    include_promoted: bool = True,
) -> float:
    """Exposure of one author per 1,000 tweets over the given sessions."""
    table = build_exposure_table(
        sessions,
        model,
        scope=scope,
        attribution=attribution,
        include_promoted=include_promoted,
    )
    return table.get(author_id)


def top_k(
    exposures: ExposureTable | Mapping[AuthorId, float],
    k: int,
) -> list[tuple[AuthorId, float]]:
    """Top ``k`` authors by exposure, descending; ties break by author id."""
    if k < 1:
        raise ConfigError(f"k must be >= 1, got {k}")
    entries = exposures.entries if isinstance(exposures, ExposureTable) else exposures
    ranked = sorted(entries.items(), key=lambda kv: (-kv[1], kv[0]))
    return ranked[:k]


def group_mean_exposure(tables: Sequence[ExposureTable]) -> dict[AuthorId, float]:
    """Mean exposure per author across a group of monitors.

    Authors absent from a monitor's table contribute 0 for that monitor,
    so the mean is always over all monitors in the group.
    """
    if not tables:
        raise DataError("cannot average zero exposure tables")
    n = len(tables)
    sums: dict[AuthorId, float] = {}
    for t in tables:
        for a, e in t.entries.items():
            sums[a] = sums.get(a, 0.0) + e
    return {a: s / n for a, s in sums.items()}


def exposure_share(
    exposures: ExposureTable | Mapping[AuthorId, float],
    k: int,
    predicate: Callable[[str], bool],
    leans: Mapping[AuthorId, str],
    *,
    denominator: str = "top-k",
) -> float:
    """Share of top-k exposure mass held by authors whose lean label
    satisfies ``predicate``.

    ``leans`` maps author id to a label; missing authors get
    ``"unknown"``. ``denominator`` is ``"top-k"`` (share within the top-k
    mass) or ``"total"`` (share of the whole table's mass). Raises
    AnalysisError when the denominator mass is zero.
    """
    if denominator not in ("top-k", "total"):
        raise ConfigError(f"unknown denominator {denominator!r}")
    entries = exposures.entries if isinstance(exposures, ExposureTable) else exposures
    top = top_k(entries, k)
    denom = sum(e for _, e in top) if denominator == "top-k" else sum(entries.values())
    if denom <= 0.0:
        raise AnalysisError("exposure share undefined: denominator mass is zero")
    num = sum(e for a, e in top if predicate(leans.get(a, LEAN_UNKNOWN)))
    return num / denom
