"""Scalar and time-series indices over validated forms.

Shannon-entropy diversity (natural log), log-linear exponential fits,
geometric-mean growth rates, moving averages, per-discipline diversity and
transdisciplinarity, origin-vs-dominant discipline classification,
intersectionality measures, trigram-precedence statistics, and Spearman
rank correlation. All functions are pure over immutable inputs.
"""

from __future__ import annotations

import csv
import math
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .corpus import CorpusStore
from .extract import CandidateSet, NGramCandidate

DEFAULT_DISCIPLINE_UNIVERSE = 169


@dataclass(frozen=True)
class YearSeries:
    """Ordered (year, value) points; gaps permitted, years strictly increasing."""

    points: tuple[tuple[int, float], ...]

    def __post_init__(self):
        years = [y for y, _ in self.points]
        if any(b <= a for a, b in zip(years, years[1:])):
            raise ValueError("years must be strictly increasing")

    @classmethod
    def from_mapping(cls, mapping: dict[int, float]) -> "YearSeries":
        return cls(tuple(sorted(mapping.items())))

    @property
    def years(self) -> list[int]:
        return [y for y, _ in self.points]

    @property
    def values(self) -> list[float]:
        return [v for _, v in self.points]

    def __len__(self) -> int:
        return len(self.points)

    def to_csv(self, path: str | Path, value_name: str = "value") -> None:
        with Path(path).open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["year", value_name])
            for year, value in self.points:
                writer.writerow([year, repr(value) if value != int(value) else value])


def shannon_entropy(weights) -> float:
    """H = -sum p_i ln p_i over positive weights (nats). Zero weight contributes 0.

    Weights are summed in sorted order so the result is bit-identical under
    any permutation of the input.
    """
    if hasattr(weights, "values"):
        ws = list(weights.values())
    else:
        ws = list(weights)
    if any(w < 0 for w in ws):
        raise ValueError("negative weight")
    ws.sort()
    total = float(sum(ws))
    if total <= 0:
        raise ValueError("entropy of an all-zero distribution is undefined")
    h = 0.0
    for w in ws:
        if w > 0:
            p = w / total
            h -= p * math.log(p)
    return h


def _doc_forms(forms: CandidateSet) -> dict[str, list[tuple[str, ...]]]:
    """doc_id -> list of distinct form term-tuples it contains."""
    mapping: dict[str, list[tuple[str, ...]]] = {}
    for terms, cand in forms.items():
        for doc_id in cand.docs:
            mapping.setdefault(doc_id, []).append(terms)
    return mapping


def diversity_per_year(forms: CandidateSet, store: CorpusStore) -> YearSeries:
    """Entropy of each year's publication distribution across forms.

    A publication counts once toward every distinct form it contains.
    Years with no form-bearing publications are omitted.
    """
    if not forms:
        raise ValueError("empty form set")
    per_year: dict[int, Counter] = {}
    for terms, cand in forms.items():
        for doc_id, year in cand.docs.items():
            per_year.setdefault(year, Counter())[terms] += 1
    return YearSeries.from_mapping({y: shannon_entropy(c) for y, c in per_year.items()})


def moving_average(series: YearSeries, window: int) -> YearSeries:
    """Trailing mean over the points inside a year-span window.

    Emitted from the first year with a full window behind it; the mean runs
    over the points available inside [year-window+1, year] (gaps shrink the
    denominator, not the span).
    """
    if window < 1:
        raise ValueError("window must be >= 1")
    if not series.points:
        return series
    first_year = series.points[0][0]
    by_year = dict(series.points)
    out = {}
    for year, _ in series.points:
        if year < first_year + window - 1:
            continue
        vals = [by_year[y] for y in range(year - window + 1, year + 1) if y in by_year]
        out[year] = sum(vals) / len(vals)
    return YearSeries.from_mapping(out)


def exp_fit(series: YearSeries) -> tuple[float, float, float]:
    """Fit y = a*e^(b*x) by ordinary least squares on ln(y) vs year.

    Zero-valued points are skipped; at least three positive points are
    required. Returns (a, b, r2) with r2 the coefficient of determination
    of the log-linear regression.
    """
    pts = [(x, v) for x, v in series.points if v > 0]
    if len(pts) < 3:
        raise ValueError("need at least 3 positive points")
    xs = [float(x) for x, _ in pts]
    ls = [math.log(v) for _, v in pts]
    n = len(pts)
    mx = sum(xs) / n
    ml = sum(ls) / n
    sxx = sum((x - mx) ** 2 for x in xs)
    sxl = sum((x - mx) * (l - ml) for x, l in zip(xs, ls))
    if sxx == 0:
        raise ValueError("degenerate x values")
    b = sxl / sxx
    intercept = ml - b * mx
    ss_res = sum((l - (intercept + b * x)) ** 2 for x, l in zip(xs, ls))
    ss_tot = sum((l - ml) ** 2 for l in ls)
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return math.exp(intercept), b, r2


def annual_growth_rate(series: YearSeries) -> float:
    """Geometric-mean annual growth between the first and last points."""
    if len(series) < 2:
        raise ValueError("need at least 2 points")
    y0, v0 = series.points[0]
    y1, v1 = series.points[-1]
    if v0 <= 0 or v1 <= 0:
        raise ValueError("growth rate needs positive endpoint values")
    return (v1 / v0) ** (1.0 / (y1 - y0)) - 1.0


def multidisciplinarity_per_year(forms: CandidateSet, store: CorpusStore) -> YearSeries:
    """Entropy of each year's form-publications across disciplines.

    A publication contributes once per (form, discipline) pair of its record.
    """
    per_year: dict[int, Counter] = {}
    doc_forms = _doc_forms(forms)
    for doc_id, doc_terms in doc_forms.items():
        record = store.by_id[doc_id]
        if not record.asjc_fields:
            continue
        counter = per_year.setdefault(record.year, Counter())
        for _ in doc_terms:
            for discipline in dict.fromkeys(record.asjc_fields):
                counter[discipline] += 1
    return YearSeries.from_mapping({y: shannon_entropy(c) for y, c in per_year.items()})


def transdisciplinarity_of_form(
    cand: NGramCandidate,
    store: CorpusStore,
    up_to_year: int,
    universe_size: int = DEFAULT_DISCIPLINE_UNIVERSE,
) -> float:
    """Normalized entropy (H / ln D) of the form's cumulative distribution across disciplines."""
    if universe_size < 2:
        raise ValueError("discipline universe must have at least 2 fields")
    counts: Counter = Counter()
    seen = False
    for doc_id, year in cand.docs.items():
        if year > up_to_year:
            continue
        seen = True
        record = store.by_id[doc_id]
        for discipline in dict.fromkeys(record.asjc_fields):
            counts[discipline] += 1
    if not seen:
        raise ValueError(f"form {cand.term!r} has no publication by {up_to_year}")
    if not counts:
        return 0.0
    return shannon_entropy(counts) / math.log(universe_size)


ORIGIN_SAME = "same_as_origin"
ORIGIN_DIFFERENT = "different_from_origin"
ORIGIN_MULTIPLE = "multiple_dominant"
ORIGIN_NO_DATA = "no_data"


def _discipline_counts(cand: NGramCandidate, store: CorpusStore) -> Counter:
    counts: Counter = Counter()
    for doc_id in cand.docs:
        for discipline in dict.fromkeys(store.by_id[doc_id].asjc_fields):
            counts[discipline] += 1
    return counts


def classify_origin_vs_dominant(cand: NGramCandidate, store: CorpusStore) -> str:
    counts = _discipline_counts(cand, store)
    if not counts or cand.origin_discipline is None:
        return ORIGIN_NO_DATA
    top = max(counts.values())
    leaders = sorted(d for d, n in counts.items() if n == top)
    if len(leaders) > 1:
        return ORIGIN_MULTIPLE
    return ORIGIN_SAME if leaders[0] == cand.origin_discipline else ORIGIN_DIFFERENT


def dominant_discipline(cand: NGramCandidate, store: CorpusStore) -> str | None:
    """Discipline with the most publications; ties resolve to the origin discipline."""
    counts = _discipline_counts(cand, store)
    if not counts:
        return None
    top = max(counts.values())
    leaders = sorted(d for d, n in counts.items() if n == top)
    if len(leaders) == 1:
        return leaders[0]
    if cand.origin_discipline in leaders:
        return cand.origin_discipline
    return leaders[0]


class PositionLexicon:
    """Token sets for the seven social positions used in intersectionality analysis."""

    def __init__(self, categories: dict[str, frozenset[str]]):
        self.categories = {k: frozenset(v) for k, v in categories.items()}
        self._by_token: dict[str, str] = {}
        for name, tokens in self.categories.items():
            for tok in tokens:
                if tok in self._by_token:
                    raise ValueError(f"token {tok!r} in both {self._by_token[tok]!r} and {name!r}")
                self._by_token[tok] = name

    def category_of(self, token: str) -> str | None:
        return self._by_token.get(token)

    @classmethod
    def bundled(cls) -> "PositionLexicon":
        pkg = resources.files("segforms.data.positions")
        cats = {}
        for entry in sorted(pkg.iterdir(), key=lambda p: p.name):
            if not entry.name.endswith(".txt"):
                continue
            tokens = set()
            for line in entry.read_text(encoding="utf-8").splitlines():
                line = line.strip()
                if line and not line.startswith("#"):
                    tokens.add(line)
            cats[entry.name[:-4]] = frozenset(tokens)
        return cls(cats)


@dataclass
class IntersectionalityResult:
    form_categories: dict[str, tuple[str, ...]]  # term -> sorted categories touched
    intersectional_forms: set[str]  # terms whose qualifiers span >= 2 positions
    intersectional_works: set[str]  # doc_ids whose forms jointly span >= 2 positions
    per_year_pair_counts: dict[int, int] = field(default_factory=dict)
    per_year_combo_counts: dict[int, dict[tuple[str, str], int]] = field(default_factory=dict)

    @property
    def per_year_entropy(self) -> YearSeries:
        out = {}
        for year, combos in self.per_year_combo_counts.items():
            if combos:
                out[year] = shannon_entropy(combos)
        return YearSeries.from_mapping(out)


def intersectionality(
    forms: CandidateSet, store: CorpusStore, lexicon: PositionLexicon
) -> IntersectionalityResult:
    """Flag intersectional forms and count intersectional co-occurrences per year.

    A form is intersectional when its qualifier tokens map to two or more
    position categories. A pair of co-occurring forms counts as an
    intersectional co-occurrence when both forms touch at least one
    position and their joint categories span two or more; each such pair
    instance also increments every unordered category-pair combination it
    spans, which is the support of the per-year entropy index.
    """
    if not any(lexicon.categories.values()):
        raise ValueError("position lexicon is empty")
    form_cats: dict[tuple[str, ...], frozenset[str]] = {}
    for terms in forms:
        cats = frozenset(
            c for tok in terms[:-1] if (c := lexicon.category_of(tok)) is not None
        )
        form_cats[terms] = cats

    result = IntersectionalityResult(
        form_categories={" ".join(t): tuple(sorted(c)) for t, c in form_cats.items()},
        intersectional_forms={" ".join(t) for t, c in form_cats.items() if len(c) >= 2},
        intersectional_works=set(),
    )

    doc_forms = _doc_forms(forms)
    for doc_id, doc_terms in doc_forms.items():
        year = store.by_id[doc_id].year
        joint = frozenset().union(*(form_cats[t] for t in doc_terms))
        if len(joint) >= 2:
            result.intersectional_works.add(doc_id)
        ordered = sorted(doc_terms)
        for i in range(len(ordered)):
            for j in range(i + 1, len(ordered)):
                ca, cb = form_cats[ordered[i]], form_cats[ordered[j]]
                if not ca or not cb or len(ca | cb) < 2:
                    continue
                result.per_year_pair_counts[year] = result.per_year_pair_counts.get(year, 0) + 1
                combos = result.per_year_combo_counts.setdefault(year, {})
                for x in ca:
                    for y_cat in cb:
                        if x != y_cat:
                            key = (x, y_cat) if x < y_cat else (y_cat, x)
                            combos[key] = combos.get(key, 0) + 1
    return result


@dataclass
class PrecedenceStats:
    n_qualifying: int
    n_after_bigrams: int
    n_after_cooccurrence: int | None

    @property
    def frac_after_bigrams(self) -> float:
        if self.n_qualifying == 0:
            raise ValueError("no qualifying trigrams")
        return self.n_after_bigrams / self.n_qualifying

    @property
    def frac_after_cooccurrence(self) -> float | None:
        if self.n_after_cooccurrence is None:
            return None
        if self.n_qualifying == 0:
            raise ValueError("no qualifying trigrams")
        return self.n_after_cooccurrence / self.n_qualifying


def trigram_precedence_stats(
    forms: CandidateSet,
    co_first_years: dict[tuple[str, str], int] | None = None,
) -> PrecedenceStats:
    """Timing of trigrams relative to their component bigrams.

    Qualifying trigrams are those whose two component bigrams are both in
    the validated set. The first statistic is the fraction published
    strictly after both bigrams; the second (needs co-occurrence first
    years keyed by sorted term pairs) is the fraction whose component
    bigrams co-occurred in some document strictly before the trigram.
    """
    n_qualifying = 0
    n_after = 0
    n_after_co = 0 if co_first_years is not None else None
    anchor_forms = {terms: cand for terms, cand in forms.items()}
    for terms, cand in anchor_forms.items():
        if len(terms) != 3:
            continue
        b1 = (terms[0], terms[2])
        b2 = (terms[1], terms[2])
        if b1 not in anchor_forms or b2 not in anchor_forms:
            continue
        f1, f2, ft = anchor_forms[b1].first_year, anchor_forms[b2].first_year, cand.first_year
        if f1 is None or f2 is None or ft is None:
            continue
        n_qualifying += 1
        if ft > max(f1, f2):
            n_after += 1
        if co_first_years is not None:
            key = tuple(sorted((" ".join(b1), " ".join(b2))))
            co_year = co_first_years.get(key)
            if co_year is not None and co_year < ft:
                n_after_co += 1
    return PrecedenceStats(n_qualifying, n_after, n_after_co)


def _rank_with_ties(values: list[float]) -> list[float]:
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        avg = (i + j) / 2.0 + 1.0  # average of 1-based positions i+1..j+1
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        i = j + 1
    return ranks


def _betacf(a: float, b: float, x: float) -> float:
    # Lentz continued fraction for the incomplete beta function.
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, 300):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 3e-16:
            break
    return h


def _betai(a: float, b: float, x: float) -> float:
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_bt = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b) + a * math.log(x) + b * math.log(1.0 - x)
    )
    bt = math.exp(ln_bt)
    if x < (a + 1.0) / (a + b + 2.0):
        return bt * _betacf(a, b, x) / a
    return 1.0 - bt * _betacf(b, a, 1.0 - x) / b


def student_t_sf2(t: float, df: float) -> float:
    """Two-sided tail probability of Student's t."""
    if math.isinf(t):
        return 0.0
    return _betai(df / 2.0, 0.5, df / (df + t * t))


def spearman(x: list[float], y: list[float]) -> tuple[float, float]:
    """Spearman rank correlation with average ranks for ties.

    Returns (rho, p) with the p-value from the large-sample t
    approximation, t = rho*sqrt((n-2)/(1-rho^2)) on n-2 degrees of freedom.
    Constant inputs have undefined rank correlation and raise.
    """
    if len(x) != len(y):
        raise ValueError("length mismatch")
    n = len(x)
    if n < 3:
        raise ValueError("need at least 3 observations")
    rx = _rank_with_ties([float(v) for v in x])
    ry = _rank_with_ties([float(v) for v in y])
    mx = sum(rx) / n
    my = sum(ry) / n
    sxx = sum((r - mx) ** 2 for r in rx)
    syy = sum((r - my) ** 2 for r in ry)
    if sxx == 0 or syy == 0:
        raise ValueError("constant input: rank correlation undefined")
    sxy = sum((a - mx) * (b - my) for a, b in zip(rx, ry))
    rho = sxy / math.sqrt(sxx * syy)
    rho = max(-1.0, min(1.0, rho))
    if abs(rho) == 1.0:
        return rho, 0.0
    t = rho * math.sqrt((n - 2) / (1.0 - rho * rho))
    return rho, student_t_sf2(t, n - 2)
