"""Candidate term-form capture.

Scans title/abstract/keyword token streams for bigrams and trigrams ending
in the anchor token, filters qualifier tokens through the stop lexicon,
enforces trigram-over-bigram subsumption per occurrence, merges reversed
trigram twins under one canonical order, and aggregates first-year /
first-country / origin-discipline statistics per candidate.

N-grams never span fields; each keyword entry is its own stream. Fourgrams
are excluded by construction.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .corpus import CorpusStore, DocumentRecord
from .textutil import tokenize_text

LEXICON_CATEGORIES = (
    "function_words",
    "conjunctive_adverbs",
    "subordinating_conjunctions",
    "auxiliary_verbs",
    "common_verbs",
    "common_adverbs",
    "jargon",
)


class StopLexicon:
    """Named categories of noise tokens; a qualifier passes if it is in none of them."""

    def __init__(self, categories: dict[str, frozenset[str]]):
        self.categories = {name: frozenset(tokens) for name, tokens in categories.items()}
        for name, tokens in self.categories.items():
            for tok in tokens:
                if not tok or tok != tok.lower() or any(ch.isspace() for ch in tok):
                    raise ValueError(f"lexicon {name}: bad entry {tok!r}")
        self._all = frozenset().union(*self.categories.values()) if self.categories else frozenset()

    def __contains__(self, token: str) -> bool:
        return token in self._all

    def passes(self, token: str) -> bool:
        return token not in self._all

    @staticmethod
    def _read_list(text: str) -> frozenset[str]:
        out = set()
        for line in text.splitlines():
            line = line.strip()
            if line and not line.startswith("#"):
                out.add(line)
        return frozenset(out)

    @classmethod
    def from_dir(cls, directory: str | Path) -> "StopLexicon":
        directory = Path(directory)
        cats = {}
        for name in LEXICON_CATEGORIES:
            path = directory / f"{name}.txt"
            cats[name] = cls._read_list(path.read_text(encoding="utf-8")) if path.exists() else frozenset()
        return cls(cats)

    @classmethod
    def bundled(cls) -> "StopLexicon":
        pkg = resources.files("segforms.data.lexicon")
        cats = {}
        for name in LEXICON_CATEGORIES:
            cats[name] = cls._read_list((pkg / f"{name}.txt").read_text(encoding="utf-8"))
        return cls(cats)


@dataclass
class TokenStream:
    """Per-field token lists for one record; field tags keep provenance."""

    streams: list[tuple[str, tuple[str, ...]]]

    def fields(self):
        return iter(self.streams)


def tokenize(record: DocumentRecord) -> TokenStream:
    streams: list[tuple[str, tuple[str, ...]]] = []
    streams.append(("title", tuple(tokenize_text(record.title))))
    streams.append(("abstract", tuple(tokenize_text(record.abstract))))
    for i, kw in enumerate(record.keywords):
        streams.append((f"keyword[{i}]", tuple(tokenize_text(kw))))
    return TokenStream(streams)


@dataclass
class NGramCandidate:
    """A bigram or trigram ending in the anchor token, with provenance."""

    terms: tuple[str, ...]
    occurrences: list[tuple[str, str, int]] = field(default_factory=list)  # (doc_id, field_tag, position)
    docs: dict[str, int] = field(default_factory=dict)  # doc_id -> publication year
    first_year: int | None = None
    first_countries: frozenset[str] = frozenset()
    origin_discipline: str | None = None
    origin_year: int | None = None
    origin_doc: str | None = None

    @property
    def arity(self) -> int:
        return len(self.terms)

    @property
    def term(self) -> str:
        return " ".join(self.terms)

    @property
    def doc_set(self) -> set[str]:
        return set(self.docs)

    @property
    def n_docs(self) -> int:
        return len(self.docs)

    @property
    def n_occurrences(self) -> int:
        return len(self.occurrences)

    @property
    def per_year_counts(self) -> dict[int, int]:
        counts: dict[int, int] = {}
        for year in self.docs.values():
            counts[year] = counts.get(year, 0) + 1
        return dict(sorted(counts.items()))

    def to_dict(self) -> dict:
        return {
            "terms": list(self.terms),
            "occurrences": [list(o) for o in self.occurrences],
            "docs": self.docs,
            "first_year": self.first_year,
            "first_countries": sorted(self.first_countries),
            "origin_discipline": self.origin_discipline,
            "origin_year": self.origin_year,
            "origin_doc": self.origin_doc,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "NGramCandidate":
        return cls(
            terms=tuple(d["terms"]),
            occurrences=[tuple(o) for o in d["occurrences"]],
            docs={k: int(v) for k, v in d["docs"].items()},
            first_year=d.get("first_year"),
            first_countries=frozenset(d.get("first_countries", ())),
            origin_discipline=d.get("origin_discipline"),
            origin_year=d.get("origin_year"),
            origin_doc=d.get("origin_doc"),
        )


CandidateSet = dict[tuple[str, ...], NGramCandidate]


def extract_candidates(store: CorpusStore, anchor: str, lexicon: StopLexicon) -> CandidateSet:
    """Capture all bigram/trigram candidates for the anchor across the store.

    Per anchor occurrence: if two preceding in-field tokens exist and both
    pass the lexicon, the trigram is recorded and the contained bigram is
    not counted for that occurrence; else if the nearest preceding token
    passes, the bigram is recorded; else nothing.
    """
    if anchor in lexicon:
        raise ValueError(f"anchor {anchor!r} is a lexicon stop token")
    candidates: CandidateSet = {}

    def hit(terms: tuple[str, ...], record: DocumentRecord, tag: str, pos: int) -> None:
        cand = candidates.get(terms)
        if cand is None:
            cand = candidates[terms] = NGramCandidate(terms=terms)
        cand.occurrences.append((record.doc_id, tag, pos))
        cand.docs[record.doc_id] = record.year

    for record in store:
        for tag, toks in tokenize(record).fields():
            for i, tok in enumerate(toks):
                if tok != anchor:
                    continue
                if i >= 2 and lexicon.passes(toks[i - 2]) and lexicon.passes(toks[i - 1]):
                    hit((toks[i - 2], toks[i - 1], anchor), record, tag, i)
                elif i >= 1 and lexicon.passes(toks[i - 1]):
                    hit((toks[i - 1], anchor), record, tag, i)

    for cand in candidates.values():
        cand.occurrences.sort()
        cand.first_year = min(cand.docs.values())
    return candidates


def aggregate_firsts(candidates: CandidateSet, store: CorpusStore) -> CandidateSet:
    """Fill first_year, first_countries and origin discipline from the store."""
    for cand in candidates.values():
        cand.first_year = min(cand.docs.values())
        countries: set[str] = set()
        for doc_id, year in cand.docs.items():
            if year == cand.first_year:
                countries.update(store.by_id[doc_id].countries)
        cand.first_countries = frozenset(countries)
        origin: tuple[int, str] | None = None
        for doc_id, year in cand.docs.items():
            record = store.by_id[doc_id]
            if record.asjc_fields and (origin is None or (year, doc_id) < origin):
                origin = (year, doc_id)
        if origin is not None:
            cand.origin_year, cand.origin_doc = origin
            cand.origin_discipline = store.by_id[origin[1]].asjc_fields[0]
        else:
            cand.origin_year = cand.origin_doc = cand.origin_discipline = None
    return candidates


def canonicalize_reversed(candidates: CandidateSet) -> CandidateSet:
    """Merge trigram pairs whose qualifier tokens are permutations of each other.

    The canonical order is the one published earlier; on equal first years
    the more frequent order wins; on a full tie the lexicographically
    smaller order wins. Aggregates are unioned and first-publication fields
    recomputed from the union. Idempotent.
    """
    groups: dict[tuple[str, ...], list[NGramCandidate]] = {}
    out: CandidateSet = {}
    for terms, cand in candidates.items():
        if cand.arity == 3:
            key = tuple(sorted(terms[:2])) + (terms[2],)
            groups.setdefault(key, []).append(cand)
        else:
            out[terms] = cand

    for members in groups.values():
        if len(members) == 1:
            out[members[0].terms] = members[0]
            continue
        if any(c.first_year is None for c in members):
            raise ValueError("canonicalize_reversed requires aggregated candidates (first_year set)")
        winner = sorted(members, key=lambda c: (c.first_year, -c.n_occurrences, c.terms))[0]
        merged = NGramCandidate(terms=winner.terms)
        for c in members:
            merged.occurrences.extend(c.occurrences)
            merged.docs.update(c.docs)
        merged.occurrences.sort()
        merged.first_year = min(c.first_year for c in members)
        countries: set[str] = set()
        for c in members:
            if c.first_year == merged.first_year:
                countries.update(c.first_countries)
        merged.first_countries = frozenset(countries)
        origins = [c for c in members if c.origin_year is not None]
        if origins:
            first = min(origins, key=lambda c: (c.origin_year, c.origin_doc))
            merged.origin_year = first.origin_year
            merged.origin_doc = first.origin_doc
            merged.origin_discipline = first.origin_discipline
        out[merged.terms] = merged

    return out


def candidates_to_csv(candidates: CandidateSet, path: str | Path) -> None:
    """Write the candidate table (one row per candidate, sorted by term)."""
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["term", "arity", "n_docs", "n_occurrences", "first_year", "first_countries", "origin_discipline"]
        )
        for terms in sorted(candidates):
            cand = candidates[terms]
            writer.writerow(
                [
                    cand.term,
                    cand.arity,
                    cand.n_docs,
                    cand.n_occurrences,
                    cand.first_year if cand.first_year is not None else "",
                    ";".join(sorted(cand.first_countries)),
                    cand.origin_discipline or "",
                ]
            )


def candidates_to_jsonl(candidates: CandidateSet, path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for terms in sorted(candidates):
            fh.write(json.dumps(candidates[terms].to_dict(), sort_keys=True, ensure_ascii=False) + "\n")


def candidates_from_jsonl(path: str | Path) -> CandidateSet:
    out: CandidateSet = {}
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                cand = NGramCandidate.from_dict(json.loads(line))
                out[cand.terms] = cand
    return out
