"""Bibliographic corpus ingest and storage.

Reads a delimiter-separated export (UTF-8, RFC 4180 quoting, header row),
maps its columns onto DocumentRecord fields, rejects rows that cannot be
used, and produces an immutable, order-stable store that every analysis
consumes. Multi-valued cells (keywords, discipline codes, affiliations,
references, authors) are split on ";".
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .textutil import contains_token

log = logging.getLogger(__name__)

DOC_TYPES = ("article", "chapter", "book", "conference_paper", "editorial", "review", "other")

YEAR_MIN = 1500
YEAR_MAX = 2100

# export label (casefolded) -> canonical doc_type
_DOC_TYPE_MAP = {
    "article": "article",
    "journal article": "article",
    "article in press": "article",
    "book chapter": "chapter",
    "chapter": "chapter",
    "book": "book",
    "conference paper": "conference_paper",
    "conference_paper": "conference_paper",
    "proceedings paper": "conference_paper",
    "editorial": "editorial",
    "review": "review",
    "short survey": "review",
}

# DocumentRecord field -> candidate export column names, first match wins.
DEFAULT_COLUMN_MAP: dict[str, tuple[str, ...]] = {
    "doc_id": ("EID", "eid", "id"),
    "title": ("Title", "Titles", "Document Title"),
    "abstract": ("Abstract",),
    "keywords": ("Author Keywords", "Index Keywords", "Indexed.Keywords", "Keywords"),
    "year": ("Year",),
    "source_title": ("Source title", "Source.title", "Source"),
    "doc_type": ("Document Type", "Document.Type"),
    "asjc": ("ASJC", "ASJC Codes", "Subject Areas"),
    "authors": ("Authors", "Author(s) ID", "Author full names"),
    "affiliations": ("Affiliations", "Authors with affiliations"),
    "references": ("References",),
    "language": ("Language of Original Document", "Language.of.Original.Document", "Language"),
}


@dataclass(frozen=True)
class DocumentRecord:
    """One bibliographic record."""

    doc_id: str
    title: str = ""
    abstract: str = ""
    keywords: tuple[str, ...] = ()
    year: int = 0
    source_title: str = ""
    doc_type: str = "other"
    asjc_fields: tuple[str, ...] = ()  # order preserved; position 0 = primary discipline
    authors: tuple[str, ...] = ()
    countries: frozenset[str] = frozenset()
    references: tuple[str, ...] = ()
    language: str = ""

    def to_dict(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "title": self.title,
            "abstract": self.abstract,
            "keywords": list(self.keywords),
            "year": self.year,
            "source_title": self.source_title,
            "doc_type": self.doc_type,
            "asjc_fields": list(self.asjc_fields),
            "authors": list(self.authors),
            "countries": sorted(self.countries),
            "references": list(self.references),
            "language": self.language,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DocumentRecord":
        return cls(
            doc_id=d["doc_id"],
            title=d.get("title", ""),
            abstract=d.get("abstract", ""),
            keywords=tuple(d.get("keywords", ())),
            year=int(d["year"]),
            source_title=d.get("source_title", ""),
            doc_type=d.get("doc_type", "other"),
            asjc_fields=tuple(d.get("asjc_fields", ())),
            authors=tuple(d.get("authors", ())),
            countries=frozenset(d.get("countries", ())),
            references=tuple(d.get("references", ())),
            language=d.get("language", ""),
        )


class CountryResolver:
    """Maps affiliation strings to canonical country names.

    The final comma-separated segment of each affiliation is matched
    (case-insensitively) against the bundled country list plus an alias
    table; unmatched segments are dropped and counted.
    """

    def __init__(self, countries: set[str], aliases: dict[str, str]):
        self._canon = {c.lower(): c for c in countries}
        self._alias = {a.lower(): c for a, c in aliases.items()}
        self.unmatched: Counter[str] = Counter()

    @classmethod
    def bundled(cls) -> "CountryResolver":
        pkg = resources.files("segforms.data")
        countries = set()
        for line in (pkg / "countries.txt").read_text(encoding="utf-8").splitlines():
            line = line.strip()
            if line and not line.startswith("#"):
                countries.add(line)
        aliases = {}
        for line in (pkg / "country_aliases.txt").read_text(encoding="utf-8").splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            alias, _, canon = line.partition("=")
            aliases[alias.strip()] = canon.strip()
        return cls(countries, aliases)

    def resolve_segment(self, segment: str) -> str | None:
        key = segment.strip().strip(".").strip().lower()
        if not key:
            return None
        if key in self._canon:
            return self._canon[key]
        if key in self._alias:
            return self._alias[key]
        return None

    def countries_of(self, affiliation_cell: str) -> frozenset[str]:
        found = set()
        for affiliation in affiliation_cell.split(";"):
            affiliation = affiliation.strip()
            if not affiliation:
                continue
            tail = affiliation.rsplit(",", 1)[-1]
            country = self.resolve_segment(tail)
            if country is not None:
                found.add(country)
            else:
                self.unmatched[tail.strip()] += 1
                log.debug("unmatched affiliation tail: %r", tail.strip())
        return frozenset(found)


@dataclass
class IngestManifest:
    source_path: str = ""
    source_sha256: str = ""
    accepted: int = 0
    rejected: int = 0
    reject_reasons: dict[str, int] = field(default_factory=dict)
    unmatched_country_segments: int = 0
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "source_path": self.source_path,
            "source_sha256": self.source_sha256,
            "accepted": self.accepted,
            "rejected": self.rejected,
            "reject_reasons": dict(sorted(self.reject_reasons.items())),
            "unmatched_country_segments": self.unmatched_country_segments,
            "notes": self.notes,
        }


class CorpusStore:
    """Immutable, doc_id-ordered collection of DocumentRecords."""

    def __init__(self, records: list[DocumentRecord], manifest: IngestManifest):
        ordered = sorted(records, key=lambda r: r.doc_id)
        self.records: tuple[DocumentRecord, ...] = tuple(ordered)
        self.by_id: dict[str, DocumentRecord] = {r.doc_id: r for r in ordered}
        self.manifest = manifest
        if len(self.by_id) != len(self.records):
            raise ValueError("duplicate doc_id in store")

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def filter_by_anchor(self, anchor: str) -> "CorpusStore":
        """Sub-store of records mentioning the anchor token in title, abstract or keywords."""
        _check_anchor(anchor)
        kept = [r for r in self.records if _record_has_token(r, anchor)]
        manifest = IngestManifest(
            source_path=self.manifest.source_path,
            source_sha256=self.manifest.source_sha256,
            accepted=len(kept),
            rejected=0,
            notes=self.manifest.notes + [f"filtered by anchor {anchor!r}"],
        )
        return CorpusStore(kept, manifest)

    def save(self, records_path: str | Path, manifest_path: str | Path | None = None) -> None:
        records_path = Path(records_path)
        with records_path.open("w", encoding="utf-8") as fh:
            for record in self.records:
                fh.write(json.dumps(record.to_dict(), sort_keys=True, ensure_ascii=False) + "\n")
        if manifest_path is None:
            manifest_path = records_path.with_suffix(records_path.suffix + ".manifest.json")
        Path(manifest_path).write_text(
            json.dumps(self.manifest.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )

    @classmethod
    def load(cls, records_path: str | Path, manifest_path: str | Path | None = None) -> "CorpusStore":
        records_path = Path(records_path)
        records = []
        with records_path.open("r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    records.append(DocumentRecord.from_dict(json.loads(line)))
        if manifest_path is None:
            manifest_path = records_path.with_suffix(records_path.suffix + ".manifest.json")
        manifest = IngestManifest()
        mp = Path(manifest_path)
        if mp.exists():
            data = json.loads(mp.read_text(encoding="utf-8"))
            manifest = IngestManifest(
                source_path=data.get("source_path", ""),
                source_sha256=data.get("source_sha256", ""),
                accepted=data.get("accepted", len(records)),
                rejected=data.get("rejected", 0),
                reject_reasons=data.get("reject_reasons", {}),
                unmatched_country_segments=data.get("unmatched_country_segments", 0),
                notes=data.get("notes", []),
            )
        else:
            manifest.accepted = len(records)
        return cls(records, manifest)


def _check_anchor(anchor: str) -> None:
    if not anchor or anchor != anchor.lower() or any(ch.isspace() for ch in anchor):
        raise ValueError(f"anchor must be a single lowercase token, got {anchor!r}")


def _record_has_token(record: DocumentRecord, token: str) -> bool:
    if contains_token(record.title, token) or contains_token(record.abstract, token):
        return True
    return any(contains_token(kw, token) for kw in record.keywords)


def _split_multi(cell: str) -> tuple[str, ...]:
    return tuple(part.strip() for part in cell.split(";") if part.strip())


def _resolve_columns(header: list[str], column_map: dict | None) -> dict[str, str]:
    """Pick the actual export column for each record field.

    column_map may give a single column name per field; unspecified fields
    fall back to the default candidate lists. Mapping a field to a column
    that is absent from the header is an error.
    """
    resolved: dict[str, str] = {}
    explicit = column_map or {}
    for fieldname, column in explicit.items():
        if fieldname not in DEFAULT_COLUMN_MAP:
            raise ValueError(f"unknown record field in column_map: {fieldname!r}")
        if column not in header:
            raise ValueError(f"column_map: column {column!r} for field {fieldname!r} not in header")
        resolved[fieldname] = column
    for fieldname, candidates in DEFAULT_COLUMN_MAP.items():
        if fieldname in resolved:
            continue
        for cand in candidates:
            if cand in header:
                resolved[fieldname] = cand
                break
    if "title" not in resolved and "abstract" not in resolved and "keywords" not in resolved:
        raise ValueError("column_map covers none of title/abstract/keywords")
    if "year" not in resolved:
        raise ValueError("column_map does not cover the year column")
    return resolved


def ingest_csv(
    path: str | Path,
    column_map: dict | None = None,
    delimiter: str | None = None,
    resolver: CountryResolver | None = None,
) -> CorpusStore:
    """Parse an export file into a CorpusStore.

    Rows are rejected (never aborting the run) when the year is missing,
    non-numeric or outside [1500, 2100]; when title, abstract and keywords
    are all empty; or when the doc_id duplicates an earlier row. Rejects
    are counted per reason in the manifest.
    """
    path = Path(path)
    raw = path.read_bytes()
    sha = hashlib.sha256(raw).hexdigest()
    text = raw.decode("utf-8-sig")
    if delimiter is None:
        delimiter = "\t" if path.suffix.lower() in (".tsv", ".tab") else ","
    reader = csv.reader(text.splitlines(), delimiter=delimiter)
    rows = list(reader)
    if not rows:
        raise ValueError(f"{path}: no header row")
    header = [h.strip() for h in rows[0]]
    columns = _resolve_columns(header, column_map)
    index = {name: header.index(col) for name, col in columns.items()}
    resolver = resolver or CountryResolver.bundled()

    def cell(row: list[str], fieldname: str) -> str:
        idx = index.get(fieldname)
        if idx is None or idx >= len(row):
            return ""
        return row[idx].strip()

    records: list[DocumentRecord] = []
    seen_ids: set[str] = set()
    reasons: Counter[str] = Counter()
    for i, row in enumerate(rows[1:], start=2):
        if not any(c.strip() for c in row):
            continue
        year_text = cell(row, "year")
        try:
            year = int(year_text)
        except ValueError:
            reasons["bad_year"] += 1
            continue
        if not (YEAR_MIN <= year <= YEAR_MAX):
            reasons["year_out_of_range"] += 1
            continue
        title = cell(row, "title")
        abstract = cell(row, "abstract")
        keywords = _split_multi(cell(row, "keywords"))
        if not title and not abstract and not keywords:
            reasons["no_text"] += 1
            continue
        doc_id = cell(row, "doc_id") or f"row-{i:06d}"
        if doc_id in seen_ids:
            reasons["duplicate_doc_id"] += 1
            continue
        seen_ids.add(doc_id)
        doc_type = _DOC_TYPE_MAP.get(cell(row, "doc_type").lower(), "other")
        records.append(
            DocumentRecord(
                doc_id=doc_id,
                title=title,
                abstract=abstract,
                keywords=keywords,
                year=year,
                source_title=cell(row, "source_title"),
                doc_type=doc_type,
                asjc_fields=_split_multi(cell(row, "asjc")),
                authors=_split_multi(cell(row, "authors")),
                countries=resolver.countries_of(cell(row, "affiliations")),
                references=_split_multi(cell(row, "references")),
                language=cell(row, "language"),
            )
        )

    manifest = IngestManifest(
        source_path=str(path),
        source_sha256=sha,
        accepted=len(records),
        rejected=sum(reasons.values()),
        reject_reasons=dict(reasons),
        unmatched_country_segments=sum(resolver.unmatched.values()),
    )
    return CorpusStore(records, manifest)


@dataclass
class CorpusStats:
    n_records: int
    by_doc_type: dict[str, int]
    by_year: dict[int, int]
    by_country: dict[str, int]
    n_sources: int
    n_authors: int
    n_references: int

    def to_dict(self) -> dict:
        return {
            "n_records": self.n_records,
            "by_doc_type": dict(sorted(self.by_doc_type.items())),
            "by_year": {str(y): n for y, n in sorted(self.by_year.items())},
            "by_country": dict(sorted(self.by_country.items())),
            "n_sources": self.n_sources,
            "n_authors": self.n_authors,
            "n_references": self.n_references,
        }


def corpus_stats(store: CorpusStore) -> CorpusStats:
    by_type: Counter[str] = Counter()
    by_year: Counter[int] = Counter()
    by_country: Counter[str] = Counter()
    sources: set[str] = set()
    authors: set[str] = set()
    n_refs = 0
    for record in store:
        by_type[record.doc_type] += 1
        by_year[record.year] += 1
        for country in record.countries:
            by_country[country] += 1
        if record.source_title:
            sources.add(record.source_title)
        authors.update(record.authors)
        n_refs += len(record.references)
    return CorpusStats(
        n_records=len(store),
        by_doc_type=dict(by_type),
        by_year=dict(by_year),
        by_country=dict(by_country),
        n_sources=len(sources),
        n_authors=len(authors),
        n_references=n_refs,
    )
