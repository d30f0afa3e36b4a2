"""Shared builders and fixtures."""

from __future__ import annotations

from datetime import datetime, timezone

import pytest

from feedaudit import DecayModel, GroupLabel, SessionRecord, TimelineEntry, calibrate

T0 = datetime(2024, 10, 2, tzinfo=timezone.utc)


def entry(
    rank,
    author,
    *,
    displayed=None,
    rt=False,
    quote=False,
    promoted=False,
    in_net=False,
    tweet_id=None,
):
    return TimelineEntry(
        rank=rank,
        tweet_id=tweet_id if tweet_id is not None else f"t{rank:04d}",
        author_id=author,
        displayed_author_id=author if displayed is None else displayed,
        is_retweet=rt,
        is_quote=quote,
        is_promoted=promoted,
        in_network=in_net,
    )


def session(session_id, monitor_id, entries, *, captured_at=T0, group=None):
    if isinstance(group, str):
        group = GroupLabel(group)
    return SessionRecord(
        session_id=session_id,
        monitor_id=monitor_id,
        captured_at=captured_at,
        entries=tuple(entries),
        group=group,
    )


def authors_session(session_id, monitor_id, authors, **kw):
    """Session whose slot r holds ``authors[r-1]``, all out-of-network."""
    return session(
        session_id,
        monitor_id,
        [entry(r, a) for r, a in enumerate(authors, start=1)],
        **kw,
    )


# The constants published for a 500-tweet timeline: amplitude 1.009,
# decay rate 0.0120, top 20% of ranks carrying 70% of attention.
PUB_AMPLITUDE = 1.009
PUB_RATE = 0.0120


@pytest.fixture(scope="session")
def pub_model():
    return DecayModel(amplitude=PUB_AMPLITUDE, rate=PUB_RATE, reference_length=500)


@pytest.fixture(scope="session")
def model500():
    return calibrate(500)


@pytest.fixture(scope="session")
def model200():
    return calibrate(200)
