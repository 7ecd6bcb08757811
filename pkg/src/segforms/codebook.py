"""Team-coding workflow state: decisions, rounds, consensus, validated set.

The storage layer is an append-only JSON-lines journal (one decision or one
round resolution per line). All state is a pure function of the journal:
replaying it reproduces the ValidationState exactly, which keeps shared
concurrent coding auditable and diffable.
"""

from __future__ import annotations

import hashlib
import json
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from .extract import CandidateSet

VERDICTS = ("valid", "invalid", "discuss")
RESOLUTION_VERDICTS = ("valid", "invalid", "defer")

CONSENSUS_VALID = "valid"
CONSENSUS_INVALID = "invalid"
CONSENSUS_UNRESOLVED = "unresolved"
STATUS_UNDECIDED = "undecided"


@dataclass(frozen=True)
class CodingDecision:
    candidate_term: str
    coder_id: str
    round: int
    verdict: str
    comment: str = ""
    timestamp: float = 0.0

    def to_dict(self) -> dict:
        return {
            "kind": "decision",
            "term": self.candidate_term,
            "coder_id": self.coder_id,
            "round": self.round,
            "verdict": self.verdict,
            "comment": self.comment,
            "ts": self.timestamp,
        }


@dataclass
class Override:
    term: str
    verdict: str  # valid | invalid
    round: int
    note: str = ""


@dataclass
class CandidateState:
    """Latest per-coder verdicts plus any resolution override for one candidate."""

    latest: dict[str, CodingDecision] = field(default_factory=dict)  # coder -> decision
    override: Override | None = None
    history: list[CodingDecision] = field(default_factory=list)

    def consensus(self) -> str:
        decided_after_override = [
            d for d in self.latest.values() if self.override is None or d.round > self.override.round
        ]
        if self.override is not None and not decided_after_override:
            return self.override.verdict
        if not self.latest:
            return CONSENSUS_UNRESOLVED
        verdicts = {d.verdict for d in self.latest.values()}
        if verdicts == {"valid"}:
            return CONSENSUS_VALID
        if verdicts == {"invalid"}:
            return CONSENSUS_INVALID
        return CONSENSUS_UNRESOLVED

    def is_conflicted(self) -> bool:
        if self.override is not None and all(
            d.round <= self.override.round for d in self.latest.values()
        ):
            return False
        if not self.latest:
            return False
        verdicts = [d.verdict for d in self.latest.values()]
        return "discuss" in verdicts or len(set(verdicts)) > 1


class ValidationState:
    """Replayable consensus state over the candidate universe."""

    def __init__(self, universe: set[str]):
        self.universe = set(universe)
        self.candidates: dict[str, CandidateState] = {}
        self.open_round = 1
        self.codebook_version = 1
        self.changelog: list[dict] = []

    # -- journal application -------------------------------------------------

    def apply(self, entry: dict) -> None:
        kind = entry.get("kind")
        if kind == "decision":
            decision = CodingDecision(
                candidate_term=entry["term"],
                coder_id=entry["coder_id"],
                round=int(entry["round"]),
                verdict=entry["verdict"],
                comment=entry.get("comment", ""),
                timestamp=float(entry.get("ts", 0.0)),
            )
            self._apply_decision(decision)
        elif kind == "resolution":
            self._apply_resolution(entry)
        else:
            raise ValueError(f"unknown journal entry kind: {kind!r}")

    def _apply_decision(self, decision: CodingDecision) -> None:
        if decision.candidate_term not in self.universe:
            raise KeyError(f"unknown candidate: {decision.candidate_term!r}")
        if decision.verdict not in VERDICTS:
            raise ValueError(f"bad verdict {decision.verdict!r}")
        if decision.round < self.open_round:
            raise ValueError(
                f"round {decision.round} is closed (open round is {self.open_round})"
            )
        if decision.round > self.open_round:
            raise ValueError(f"round {decision.round} is not open yet")
        cstate = self.candidates.setdefault(decision.candidate_term, CandidateState())
        cstate.history.append(decision)
        cstate.latest[decision.coder_id] = decision  # same coder+round resubmission replaces

    def _apply_resolution(self, entry: dict) -> None:
        closing = int(entry["round"])
        if closing != self.open_round:
            raise ValueError(f"cannot resolve round {closing}; open round is {self.open_round}")
        for item in entry["entries"]:
            term = item["term"]
            if term not in self.universe:
                raise KeyError(f"resolution references unknown candidate: {term!r}")
            verdict = item["verdict"]
            if verdict not in RESOLUTION_VERDICTS:
                raise ValueError(f"bad resolution verdict {verdict!r}")
            if verdict == "defer":
                continue  # explicitly carried into the next round
            cstate = self.candidates.setdefault(term, CandidateState())
            cstate.override = Override(term=term, verdict=verdict, round=closing, note=item.get("note", ""))
        self.codebook_version += 1
        self.open_round += 1
        self.changelog.append(
            {
                "round": closing,
                "version": self.codebook_version,
                "entries": [dict(e) for e in entry["entries"]],
            }
        )

    # -- queries ---------------------------------------------------------------

    def status_of(self, term: str) -> str:
        cstate = self.candidates.get(term)
        if cstate is None or (not cstate.latest and cstate.override is None):
            return STATUS_UNDECIDED
        return cstate.consensus()

    def discrepancies(self) -> list[tuple[str, dict[str, str]]]:
        """Candidates whose latest verdicts conflict or include 'discuss', sorted by term."""
        out = []
        for term in sorted(self.candidates):
            cstate = self.candidates[term]
            if cstate.is_conflicted():
                out.append((term, {c: d.verdict for c, d in sorted(cstate.latest.items())}))
        return out

    def unresolved_in_round(self, rnd: int) -> list[str]:
        out = []
        for term, cstate in self.candidates.items():
            if any(d.round == rnd for d in cstate.latest.values()) and cstate.consensus() == CONSENSUS_UNRESOLVED:
                out.append(term)
        return sorted(out)

    def progress(self) -> dict:
        per_coder: dict[str, int] = {}
        per_status = {CONSENSUS_VALID: 0, CONSENSUS_INVALID: 0, CONSENSUS_UNRESOLVED: 0, STATUS_UNDECIDED: 0}
        for cstate in self.candidates.values():
            for coder in cstate.latest:
                per_coder[coder] = per_coder.get(coder, 0) + 1
        for term in sorted(self.universe):
            per_status[self.status_of(term)] += 1
        return {
            "open_round": self.open_round,
            "codebook_version": self.codebook_version,
            "n_candidates": len(self.universe),
            "per_coder": dict(sorted(per_coder.items())),
            "per_status": per_status,
            "n_discrepancies": len(self.discrepancies()),
        }

    def snapshot(self) -> dict:
        """Canonical serializable view; used for bit-for-bit replay checks."""
        cands = {}
        for term in sorted(self.candidates):
            cstate = self.candidates[term]
            cands[term] = {
                "latest": {
                    coder: {
                        "round": d.round,
                        "verdict": d.verdict,
                        "comment": d.comment,
                        "ts": d.timestamp,
                    }
                    for coder, d in sorted(cstate.latest.items())
                },
                "override": (
                    {
                        "verdict": cstate.override.verdict,
                        "round": cstate.override.round,
                        "note": cstate.override.note,
                    }
                    if cstate.override
                    else None
                ),
                "consensus": cstate.consensus(),
                "n_history": len(cstate.history),
            }
        return {
            "open_round": self.open_round,
            "codebook_version": self.codebook_version,
            "candidates": cands,
        }

    def digest(self) -> str:
        blob = json.dumps(self.snapshot(), sort_keys=True, ensure_ascii=False).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()


class Codebook:
    """Journal-backed facade: writes entries, keeps the replayed state.

    Writes are serialized through an internal lock; each accepted write is
    flushed to the journal before the state mutates (write-ahead), so a
    reader replaying the file always sees a consistent prefix.
    """

    def __init__(self, universe: set[str], journal_path: str | Path | None = None):
        self.state = ValidationState(universe)
        self.journal_path = Path(journal_path) if journal_path else None
        self._lock = threading.Lock()

    @classmethod
    def from_journal(cls, journal_path: str | Path, universe: set[str]) -> "Codebook":
        book = cls(universe, journal_path=None)
        path = Path(journal_path)
        if path.exists():
            with path.open("r", encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if line:
                        book.state.apply(json.loads(line))
        book.journal_path = path
        return book

    def _append(self, entry: dict) -> None:
        if self.journal_path is None:
            return
        with self.journal_path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(entry, sort_keys=True, ensure_ascii=False) + "\n")
            fh.flush()

    def record_decision(
        self,
        term: str,
        coder_id: str,
        round: int,
        verdict: str,
        comment: str = "",
        timestamp: float | None = None,
    ) -> CodingDecision:
        with self._lock:
            entry = {
                "kind": "decision",
                "term": term,
                "coder_id": coder_id,
                "round": round,
                "verdict": verdict,
                "comment": comment,
                "ts": time.time() if timestamp is None else timestamp,
            }
            # validate against a scratch copy of the per-candidate rules first
            if term not in self.state.universe:
                raise KeyError(f"unknown candidate: {term!r}")
            if verdict not in VERDICTS:
                raise ValueError(f"bad verdict {verdict!r}")
            if round < self.state.open_round:
                raise ValueError(f"round {round} is closed (open round is {self.state.open_round})")
            if round > self.state.open_round:
                raise ValueError(f"round {round} is not open yet")
            self._append(entry)
            self.state.apply(entry)
            return CodingDecision(term, coder_id, round, verdict, comment, entry["ts"])

    def resolve_round(self, resolutions: list[tuple[str, str, str]]) -> int:
        """Close the open round. resolutions: (term, valid|invalid|defer, note).

        Every candidate left unresolved in the closing round must appear in
        the list (deferrals are explicit). Returns the new codebook version.
        """
        with self._lock:
            closing = self.state.open_round
            covered = {term for term, _, _ in resolutions}
            pending = [t for t in self.state.unresolved_in_round(closing) if t not in covered]
            if pending:
                raise ValueError(
                    "unresolved candidates not covered by resolutions: " + ", ".join(pending)
                )
            for term, verdict, _ in resolutions:
                if term not in self.state.universe:
                    raise KeyError(f"resolution references unknown candidate: {term!r}")
                if verdict not in RESOLUTION_VERDICTS:
                    raise ValueError(f"bad resolution verdict {verdict!r}")
            entry = {
                "kind": "resolution",
                "round": closing,
                "entries": [
                    {"term": term, "verdict": verdict, "note": note} for term, verdict, note in resolutions
                ],
            }
            self._append(entry)
            self.state.apply(entry)
            return self.state.codebook_version


def detect_discrepancies(state: ValidationState) -> list[tuple[str, dict[str, str]]]:
    return state.discrepancies()


def export_validated(state: ValidationState, candidates: CandidateSet) -> CandidateSet:
    """Consensus-valid candidates joined with their extraction aggregates.

    Forms supported by a single document are retained deliberately: brand-new
    term forms enter the literature through exactly one publication.
    """
    out: CandidateSet = {}
    for terms, cand in candidates.items():
        if state.status_of(cand.term) == CONSENSUS_VALID:
            out[terms] = cand
    return out


def validated_table_csv(forms: CandidateSet, path: str | Path) -> None:
    """CSV of validated forms: form, first year, first countries, publication count."""
    import csv

    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["form", "first_year", "first_countries", "n_publications"])
        for terms in sorted(forms):
            cand = forms[terms]
            writer.writerow(
                [
                    cand.term,
                    cand.first_year if cand.first_year is not None else "",
                    ";".join(sorted(cand.first_countries)),
                    cand.n_docs,
                ]
            )
