"""Reader for the Pabulib participatory-budgeting file format (.pb).

The format is UTF-8 text with three sections introduced by the header lines
``META``, ``PROJECTS`` and ``VOTES``.  META holds ``key;value`` rows and must
include the budget; PROJECTS and VOTES start with a semicolon-separated header
row naming the columns of the following rows.  A vote's ``vote`` column lists
the approved project ids separated by commas.

Only approval ballots are supported.  Parsing is strict by default: a vote
naming an unknown project fails the whole file; the opt-in lenient mode drops
such ballots instead (silent data loss would corrupt downstream metrics, so it
is never the default).  Project ids are remapped to dense indices in order of
appearance and the original ids are kept on the instance for reporting.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .model import PBInstance


class PabulibParseError(ValueError):
    """A malformed .pb file; the message names the offending line."""

    def __init__(self, line: int | None, message: str):
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)
        self.line = line


@dataclass(frozen=True)
class PabulibElection:
    """Parse result: the instance plus file metadata and lenient-mode counters."""

    instance: PBInstance
    meta: dict
    dropped_ballots: int


def _parse_number(raw: str, line: int, what: str) -> float:
    text = raw.strip().replace(" ", "")
    if "," in text and "." not in text:
        text = text.replace(",", ".")  # decimal-comma files
    try:
        return float(text)
    except ValueError:
        raise PabulibParseError(line, f"cannot parse {what} {raw!r}") from None


def parse_election(text: str, lenient: bool = False) -> PabulibElection:
    """Parse .pb file content into a PB instance."""
    meta: dict = {}
    project_header: list[str] | None = None
    vote_header: list[str] | None = None
    project_ids: list[str] = []
    project_index: dict[str, int] = {}
    costs: list[float] = []
    ballots: list[frozenset] = []
    dropped = 0
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip().lstrip("﻿")
        if not line:
            continue
        upper = line.upper()
        if upper in ("META", "PROJECTS", "VOTES"):
            section = upper
            continue
        if section is None:
            raise PabulibParseError(lineno, "content before the META section")
        fields = line.split(";")
        if section == "META":
            if len(fields) < 2:
                raise PabulibParseError(lineno, "META rows must be key;value")
            meta[fields[0].strip()] = ";".join(fields[1:]).strip()
        elif section == "PROJECTS":
            if project_header is None:
                project_header = [f.strip() for f in fields]
                for required in ("project_id", "cost"):
                    if required not in project_header:
                        raise PabulibParseError(
                            lineno, f"PROJECTS header lacks {required!r}"
                        )
                continue
            row = dict(zip(project_header, (f.strip() for f in fields)))
            pid = row.get("project_id", "")
            if not pid:
                raise PabulibParseError(lineno, "project row without project_id")
            if pid in project_index:
                raise PabulibParseError(lineno, f"duplicate project id {pid!r}")
            cost = _parse_number(row.get("cost", ""), lineno, "project cost")
            if cost <= 0:
                raise PabulibParseError(lineno, f"non-positive cost for {pid!r}")
            project_index[pid] = len(project_ids)
            project_ids.append(pid)
            costs.append(cost)
        elif section == "VOTES":
            if vote_header is None:
                vote_header = [f.strip() for f in fields]
                for required in ("voter_id", "vote"):
                    if required not in vote_header:
                        raise PabulibParseError(
                            lineno, f"VOTES header lacks {required!r}"
                        )
                continue
            row = dict(zip(vote_header, (f.strip() for f in fields)))
            vote_field = row.get("vote", "")
            names = [v.strip() for v in vote_field.split(",") if v.strip()]
            try:
                ballot = frozenset(project_index[name] for name in names)
            except KeyError as exc:
                if lenient:
                    dropped += 1
                    continue
                raise PabulibParseError(
                    lineno, f"vote names unknown project {exc.args[0]!r}"
                ) from None
            ballots.append(ballot)

    vote_type = meta.get("vote_type", "approval").lower()
    if vote_type != "approval":
        raise PabulibParseError(None, f"unsupported vote_type {vote_type!r}")
    if "budget" not in meta:
        raise PabulibParseError(None, "META is missing the budget")
    budget = _parse_number(meta["budget"], None, "budget")
    if budget <= 0:
        raise PabulibParseError(None, f"non-positive budget {meta['budget']!r}")
    if not project_ids:
        raise PabulibParseError(None, "no projects defined")
    if not ballots:
        raise PabulibParseError(None, "VOTES section is empty")
    try:
        instance = PBInstance(
            approvals=tuple(ballots),
            costs=np.asarray(costs, dtype=np.float64),
            budget=budget,
            project_ids=tuple(project_ids),
        )
    except ValueError as exc:
        raise PabulibParseError(None, str(exc)) from None
    return PabulibElection(instance=instance, meta=meta, dropped_ballots=dropped)


def parse_pabulib(text: str, lenient: bool = False) -> PBInstance:
    """Parse .pb content and return just the instance (original project ids
    are retained on ``instance.project_ids``)."""
    return parse_election(text, lenient=lenient).instance


def read_pabulib_file(path, lenient: bool = False) -> PabulibElection:
    return parse_election(Path(path).read_text(encoding="utf-8"), lenient=lenient)
