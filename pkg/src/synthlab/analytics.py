"""Read-only analytics over a session's event log.

Classifies the organizing strategy (top-down groups-first vs bottom-up
assignment-first), measures how tightly group creation and assignment
interleave, and counts reorganization activity after drafting starts.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Optional, Sequence

from synthlab.errors import MalformedLog
from synthlab.model import EventRecord

DEFAULT_THRESHOLDS: tuple[float, float] = (0.8, 0.2)

CLASSIFICATIONS = ("deductive", "inductive", "mixed", "insufficient_data")

_COUNTED_KINDS = {
    "group_created": "groups_created",
    "annotation_assigned": "assignments",
    "annotation_transferred": "transfers",
    "groups_merged": "merges",
    "note_created": "notes",
    "filter_applied": "filters",
    "document_edited": "document_edits",
}


@dataclass(frozen=True)
class StrategyReport:
    classification: str
    deductive_fraction: Optional[float]
    interleaving_score: float
    counts: dict[str, int]

    def to_dict(self) -> dict[str, Any]:
        return {
            "classification": self.classification,
            "deductive_fraction": self.deductive_fraction,
            "interleaving_score": self.interleaving_score,
            "counts": dict(self.counts),
        }


def check_log(events: Sequence[EventRecord]) -> None:
    """Reject logs with seq gaps or unknown kinds before deriving metrics."""
    from synthlab.events import check_payload

    for i, event in enumerate(events, start=1):
        if event.seq != i:
            raise MalformedLog(f"event log gap: expected seq {i}, found {event.seq}")
        check_payload(event.kind, event.payload)


def count_kinds(events: Sequence[EventRecord]) -> dict[str, int]:
    counts = {name: 0 for name in _COUNTED_KINDS.values()}
    for event in events:
        name = _COUNTED_KINDS.get(event.kind)
        if name is not None:
            counts[name] += 1
    return counts


def deductive_fraction(events: Sequence[EventRecord]) -> Optional[float]:
    """Share of groups created before any annotation was assigned.

    None when the log contains no group_created events.
    """
    total_groups = 0
    groups_before_first_assign = 0
    seen_assign = False
    for event in events:
        if event.kind == "group_created":
            total_groups += 1
            if not seen_assign:
                groups_before_first_assign += 1
        elif event.kind == "annotation_assigned":
            seen_assign = True
    if total_groups == 0:
        return None
    return groups_before_first_assign / total_groups


def interleaving_score(events: Sequence[EventRecord]) -> float:
    """Alternation rate in the merged group_created/annotation_assigned stream.

    1.0 means every consecutive pair alternates kinds; 0.0 means a single
    block of each (or fewer than two relevant events).
    """
    kinds = [e.kind for e in events if e.kind in ("group_created", "annotation_assigned")]
    if len(kinds) < 2:
        return 0.0
    alternations = sum(1 for a, b in zip(kinds, kinds[1:]) if a != b)
    return alternations / (len(kinds) - 1)


def analyze_log(
    events: Sequence[EventRecord],
    thresholds: tuple[float, float] = DEFAULT_THRESHOLDS,
) -> StrategyReport:
    """Classify the session's organizing strategy from its event log."""
    deductive_cutoff, inductive_cutoff = thresholds
    if not 0.0 <= inductive_cutoff <= deductive_cutoff <= 1.0:
        raise ValueError("thresholds must satisfy 0 <= inductive <= deductive <= 1")
    check_log(events)
    counts = count_kinds(events)
    fraction = deductive_fraction(events)
    score = interleaving_score(events)
    if counts["groups_created"] == 0 or counts["assignments"] == 0:
        classification = "insufficient_data"
    elif fraction >= deductive_cutoff:
        classification = "deductive"
    elif fraction <= inductive_cutoff:
        classification = "inductive"
    else:
        classification = "mixed"
    return StrategyReport(
        classification=classification,
        deductive_fraction=fraction,
        interleaving_score=score,
        counts=counts,
    )


def iteration_metrics(events: Sequence[EventRecord]) -> dict[str, int]:
    """Reorganization activity after drafting began.

    Counts transfers, merges, and filters that happen after the first
    document_edited event; all zero when nothing was ever drafted.
    """
    first_edit_seq: Optional[int] = None
    for event in events:
        if event.kind == "document_edited":
            first_edit_seq = event.seq
            break
    metrics = {
        "transfers_after_first_edit": 0,
        "merges_after_first_edit": 0,
        "filters_after_first_edit": 0,
    }
    if first_edit_seq is None:
        return metrics
    for event in events:
        if event.seq <= first_edit_seq:
            continue
        if event.kind == "annotation_transferred":
            metrics["transfers_after_first_edit"] += 1
        elif event.kind == "groups_merged":
            metrics["merges_after_first_edit"] += 1
        elif event.kind == "filter_applied":
            metrics["filters_after_first_edit"] += 1
    return metrics
