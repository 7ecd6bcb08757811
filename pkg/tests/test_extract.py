import random

import pytest

from segforms.corpus import DocumentRecord, CorpusStore, IngestManifest
from segforms.extract import (
    NGramCandidate,
    StopLexicon,
    aggregate_firsts,
    canonicalize_reversed,
    candidates_from_jsonl,
    candidates_to_csv,
    candidates_to_jsonl,
    extract_candidates,
    tokenize,
)
from segforms.textutil import tokenize_text

from conftest import FIXTURES
from oracles import oracle_extract, oracle_tokens


def make_store(docs):
    records = [DocumentRecord(**d) for d in docs]
    return CorpusStore(records, IngestManifest(accepted=len(records)))


# -- tokenize ---------------------------------------------------------------


def test_tokenize_hyphen_split():
    assert tokenize_text("Self-Segregation in cities.") == ["self", "segregation", "in", "cities"]


def test_tokenize_empty():
    assert tokenize_text("") == []


def test_tokenize_clean_phrase():
    assert tokenize_text("occupational gender segregation") == [
        "occupational",
        "gender",
        "segregation",
    ]


def test_tokenize_diacritics_and_digits():
    assert tokenize_text("crèche segregation 1900") == ["creche", "segregation", "1900"]


def test_tokenize_record_streams():
    record = DocumentRecord(
        doc_id="x", title="A B", abstract="C", keywords=("k one", "k two"), year=2000
    )
    stream = tokenize(record)
    tags = [tag for tag, _ in stream.fields()]
    assert tags == ["title", "abstract", "keyword[0]", "keyword[1]"]


def test_tokenize_matches_oracle_tokenizer(corpus20):
    for record in corpus20:
        assert tokenize_text(record.title) == oracle_tokens(record.title)
        assert tokenize_text(record.abstract) == oracle_tokens(record.abstract)


# -- extraction rules ---------------------------------------------------------


def _single_doc_candidates(text, lexicon, **kw):
    store = make_store([dict(doc_id="d", title="", abstract=text, year=2000, **kw)])
    return extract_candidates(store, "segregation", lexicon)


def test_trigram_subsumes_bigram(lexicon):
    cands = _single_doc_candidates("rates of occupational gender segregation rose", lexicon)
    assert ("occupational", "gender", "segregation") in cands
    assert ("gender", "segregation") not in cands


def test_stop_word_prefix_records_nothing(lexicon):
    cands = _single_doc_candidates("we ask whether segregation persists", lexicon)
    assert cands == {}


def test_bigram_fallback_when_far_token_is_stopped(lexicon):
    cands = _single_doc_candidates("the racial segregation of schools", lexicon)
    assert set(cands) == {("racial", "segregation")}


def test_nothing_when_near_token_is_stopped(lexicon):
    # trigram needs both qualifiers, bigram needs the nearest one
    cands = _single_doc_candidates("racial whether segregation persists", lexicon)
    assert cands == {}


def test_anchor_at_field_start(lexicon):
    cands = _single_doc_candidates("segregation is the topic", lexicon)
    assert cands == {}


def test_ngrams_do_not_span_fields(lexicon):
    store = make_store(
        [dict(doc_id="d", title="studies of racial", abstract="segregation grows", year=2000)]
    )
    assert extract_candidates(store, "segregation", lexicon) == {}


def test_keyword_entries_are_separate_streams(lexicon):
    store = make_store(
        [dict(doc_id="d", title="", abstract="", keywords=("racial segregation", "gender segregation"), year=2000)]
    )
    cands = extract_candidates(store, "segregation", lexicon)
    assert set(cands) == {("racial", "segregation"), ("gender", "segregation")}
    occ_tags = {terms: [t for _, t, _ in c.occurrences] for terms, c in cands.items()}
    assert occ_tags[("racial", "segregation")] == ["keyword[0]"]
    assert occ_tags[("gender", "segregation")] == ["keyword[1]"]


def test_anchor_in_lexicon_rejected(lexicon):
    store = make_store([dict(doc_id="d", title="x", abstract="", year=2000)])
    with pytest.raises(ValueError, match="stop token"):
        extract_candidates(store, "whether", lexicon)


def test_fixture_against_oracle(corpus20, candidates20, stopset):
    docs = [
        {
            "doc_id": r.doc_id,
            "year": r.year,
            "countries": set(r.countries),
            "asjc": list(r.asjc_fields),
            "fields": [("title", r.title), ("abstract", r.abstract)]
            + [(f"keyword[{i}]", kw) for i, kw in enumerate(r.keywords)],
        }
        for r in corpus20
    ]
    expected = oracle_extract(docs, "segregation", stopset)
    assert set(candidates20) == set(expected)
    for terms, cand in candidates20.items():
        info = expected[terms]
        assert cand.n_docs == info["n_docs"], terms
        assert cand.n_occurrences == info["n_occ"], terms
        assert cand.first_year == info["first_year"], terms
        assert set(cand.first_countries) == info["first_countries"], terms
        assert cand.origin_discipline == info["origin"], terms


def test_six_abstract_hand_enumeration(lexicon):
    """Hand-enumerated micro-corpus; expectations written before coding."""
    docs = [
        dict(doc_id="a1", title="", abstract="the racial segregation of cities", year=1950),
        dict(doc_id="a2", title="", abstract="occupational gender segregation in firms", year=1987),
        dict(doc_id="a3", title="", abstract="whether segregation matters", year=1990),
        dict(doc_id="a4", title="", abstract="on self-segregation and racial segregation", year=1995),
        dict(doc_id="a5", title="", abstract="gender segregation at work", year=1985),
        dict(doc_id="a6", title="", abstract="patterns of urban spatial segregation", year=2000),
    ]
    cands = extract_candidates(make_store(docs), "segregation", lexicon)
    table = {(" ".join(t)): (c.n_docs, c.n_occurrences) for t, c in cands.items()}
    assert table == {
        "racial segregation": (2, 2),
        "occupational gender segregation": (1, 1),
        "self segregation": (1, 1),
        "gender segregation": (1, 1),
        "urban spatial segregation": (1, 1),
    }


# -- canonicalize_reversed ------------------------------------------------------


def _trigram(terms, first_year, n_occ, docs):
    cand = NGramCandidate(terms=terms)
    cand.docs = dict(docs)
    first_doc = sorted(cand.docs)[0]
    cand.occurrences = [(first_doc, "abstract", i) for i in range(n_occ)]
    cand.first_year = first_year
    return cand


def test_canonicalize_earlier_year_wins():
    a = _trigram(("vertical", "residential", "segregation"), 1990, 3, {"x": 1990})
    b = _trigram(("residential", "vertical", "segregation"), 1995, 2, {"y": 1995})
    merged = canonicalize_reversed({a.terms: a, b.terms: b})
    assert set(merged) == {("vertical", "residential", "segregation")}
    cand = merged[("vertical", "residential", "segregation")]
    assert cand.first_year == 1990
    assert cand.n_occurrences == 5
    assert cand.docs == {"x": 1990, "y": 1995}


def test_canonicalize_no_twin_untouched():
    a = _trigram(("racial", "residential", "segregation"), 1965, 2, {"x": 1965})
    merged = canonicalize_reversed({a.terms: a})
    assert merged[a.terms] is a


def test_canonicalize_count_tiebreak():
    a = _trigram(("income", "school", "segregation"), 2000, 7, {"x": 2000})
    b = _trigram(("school", "income", "segregation"), 2000, 3, {"y": 2000})
    merged = canonicalize_reversed({a.terms: a, b.terms: b})
    assert set(merged) == {("income", "school", "segregation")}


def test_canonicalize_lexicographic_tiebreak():
    a = _trigram(("b", "a", "segregation"), 2000, 2, {"x": 2000})
    b = _trigram(("a", "b", "segregation"), 2000, 2, {"y": 2000})
    merged = canonicalize_reversed({a.terms: a, b.terms: b})
    assert set(merged) == {("a", "b", "segregation")}


def test_canonicalize_idempotent_and_count_preserving(candidates20):
    once = canonicalize_reversed(candidates20)
    twice = canonicalize_reversed(once)
    assert {t: c.n_occurrences for t, c in once.items()} == {
        t: c.n_occurrences for t, c in twice.items()
    }
    assert sum(c.n_occurrences for c in once.values()) == sum(
        c.n_occurrences for c in candidates20.values()
    )


def test_canonicalize_merged_same_year_countries(lexicon):
    docs = [
        dict(doc_id="m1", title="deep blue segregation", abstract="", year=2001,
             countries=frozenset({"France"})),
        dict(doc_id="m2", title="blue deep segregation", abstract="", year=2001,
             countries=frozenset({"Spain"})),
    ]
    store = make_store(docs)
    cands = aggregate_firsts(extract_candidates(store, "segregation", lexicon), store)
    merged = canonicalize_reversed(cands)
    (cand,) = merged.values()
    assert cand.first_year == 2001
    assert set(cand.first_countries) == {"France", "Spain"}


# -- aggregate_firsts ---------------------------------------------------------


def test_firsts_two_countries_same_year(candidates20):
    cand = candidates20[("age", "segregation")]
    assert cand.first_year == 1960
    assert set(cand.first_countries) == {"Australia", "United States"}


def test_firsts_singleton(candidates20):
    cand = candidates20[("self", "segregation")]
    assert cand.first_year == 2005
    assert set(cand.first_countries) == {"Netherlands"}


def test_firsts_earliest_record(candidates20):
    cand = candidates20[("racial", "segregation")]
    assert cand.first_year == 1913
    assert set(cand.first_countries) == {"United States"}
    assert cand.origin_discipline == "3312"


def test_first_year_equals_min_per_year_counts(candidates20):
    for cand in candidates20.values():
        assert cand.first_year == min(cand.per_year_counts)
        assert sum(cand.per_year_counts.values()) == cand.n_docs


# -- invariants -----------------------------------------------------------------


def _random_store(rng, n_docs=12):
    vocab = ["racial", "urban", "gender", "income", "the", "of", "whether", "spatial",
             "ethnic", "self", "school", "was", "highly", "vertical"]
    docs = []
    for i in range(n_docs):
        words = []
        for _ in range(rng.randint(3, 30)):
            words.append(rng.choice(vocab + ["segregation"] * 3))
        docs.append(
            dict(doc_id=f"r{i:03d}", title="", abstract=" ".join(words), year=1950 + rng.randint(0, 60))
        )
    return make_store(docs)


def test_occurrence_conservation_on_random_corpora(lexicon, stopset):
    for seed in range(100):
        rng = random.Random(seed)
        store = _random_store(rng)
        cands = extract_candidates(store, "segregation", lexicon)
        recorded = sum(c.n_occurrences for c in cands.values())
        qualifying = 0
        per_doc_recorded = {}
        per_doc_qualifying = {}
        for record in store:
            toks = tokenize_text(record.abstract)
            q = sum(
                1
                for i, t in enumerate(toks)
                if t == "segregation" and i >= 1 and toks[i - 1] not in stopset
            )
            qualifying += q
            per_doc_qualifying[record.doc_id] = q
        for cand in cands.values():
            for doc_id, _, _ in cand.occurrences:
                per_doc_recorded[doc_id] = per_doc_recorded.get(doc_id, 0) + 1
        assert recorded == qualifying, f"seed {seed}"
        for doc_id, q in per_doc_qualifying.items():
            assert per_doc_recorded.get(doc_id, 0) == q, f"seed {seed} doc {doc_id}"


def test_subsumption_no_embedded_bigram_occurrence(candidates20):
    trigram_positions = set()
    for terms, cand in candidates20.items():
        if cand.arity == 3:
            trigram_positions.update(cand.occurrences)
    for terms, cand in candidates20.items():
        if cand.arity == 2:
            assert not set(cand.occurrences) & trigram_positions


def test_extraction_deterministic(corpus20, lexicon):
    a = extract_candidates(corpus20, "segregation", lexicon)
    b = extract_candidates(corpus20, "segregation", lexicon)
    assert {t: c.to_dict() for t, c in a.items()} == {t: c.to_dict() for t, c in b.items()}


# -- exports ---------------------------------------------------------------------


def test_candidate_csv_matches_golden(tmp_path, candidates20):
    out = tmp_path / "candidates.csv"
    candidates_to_csv(candidates20, out)
    golden = (FIXTURES / "golden_candidates.csv").read_bytes()
    assert out.read_bytes() == golden


def test_candidates_jsonl_roundtrip(tmp_path, candidates20):
    path = tmp_path / "cands.jsonl"
    candidates_to_jsonl(candidates20, path)
    loaded = candidates_from_jsonl(path)
    assert {t: c.to_dict() for t, c in loaded.items()} == {
        t: c.to_dict() for t, c in candidates20.items()
    }


def test_lexicon_from_dir_roundtrip(tmp_path, lexicon):
    for name, tokens in lexicon.categories.items():
        (tmp_path / f"{name}.txt").write_text("\n".join(sorted(tokens)) + "\n")
    reloaded = StopLexicon.from_dir(tmp_path)
    assert reloaded.categories == lexicon.categories
