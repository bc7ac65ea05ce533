import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from venuepulse.corpus import (
    Corpus,
    DuplicateRecord,
    RecordValidationError,
    UnknownVenue,
    YearOutOfWindow,
    citation_vector,
    normalize_title,
    validate_record,
    venue_year_aggregate,
)

from conftest import make_record, random_corpus


def test_minimal_row_validates():
    rec = validate_record(
        {"title": "X", "venue": "ACL", "year": 2020, "citationCount": 5, "citations_2020": 3, "citations_2021": 2}
    )
    assert rec.citation_count == 5
    assert rec.citations_in(2020) == 3 and rec.citations_in(2021) == 2
    assert rec.citations_in(2014) == 0
    assert rec.ai_category is None
    assert set(rec.annual_citations) == set(range(2014, 2025))


def test_top_conf_above_total_is_inconsistent():
    with pytest.raises(RecordValidationError) as err:
        validate_record({"title": "X", "venue": "ACL", "year": 2020, "citationCount": 5, "top_conf_citations": 9})
    assert err.value.kinds == {"InconsistentCounts"}


@pytest.mark.parametrize(
    "raw, kind, field",
    [
        ({"venue": "ACL", "year": 2020}, "MissingField", "title"),
        ({"title": "X", "year": 2020}, "MissingField", "venue"),
        ({"title": "X", "venue": "ACL"}, "MissingField", "year"),
        ({"title": "X", "venue": "ACL", "year": 2010}, "YearOutOfWindow", "year"),
        ({"title": "X", "venue": "ACL", "year": 2020, "citations_2019": -1}, "NegativeCount", "citations_2019"),
        ({"title": "X", "venue": "ACL", "year": 2020, "citationCount": -3}, "NegativeCount", "citationCount"),
        ({"title": "X", "venue": "ACL", "year": 2020, "citationCount": 1, "citations_2020": 4},
         "InconsistentCounts", "citationCount"),
        ({"title": "X", "venue": "ACL", "year": "twenty"}, "BadValue", "year"),
    ],
)
def test_validation_errors_name_the_field(raw, kind, field):
    with pytest.raises(RecordValidationError) as err:
        validate_record(raw)
    assert (kind, field) in {(i.kind, i.field) for i in err.value.issues}


def test_all_issues_collected():
    with pytest.raises(RecordValidationError) as err:
        validate_record({"year": 1990, "citations_2020": -1})
    assert {"MissingField", "YearOutOfWindow", "NegativeCount"} <= err.value.kinds


def test_csv_style_strings_and_extras():
    rec = validate_record(
        {"paperId": " abc ", "title": "T", "venue": "ACL", "year": "2019", "citationCount": "7.0",
         "citations_2019": "", "ai_category": "", "source_db": "s2", "citations_2025": "3"}
    )
    assert rec.paper_id == "abc" and rec.year == 2019 and rec.citation_count == 7
    assert rec.ai_category is None
    assert rec.extra == {"source_db": "s2", "citations_2025": "3"}


def test_missing_citation_count_defaults_to_annual_sum_and_id_is_derived():
    a = validate_record({"title": "Deep Stuff", "venue": "ACL", "year": 2020, "citations_2021": 4})
    b = validate_record({"title": "deep   stuff.", "venue": "ACL", "year": 2020})
    assert a.citation_count == 4
    assert a.paper_id == b.paper_id and a.paper_id.startswith("auto:")


def test_configured_venues():
    with pytest.raises(RecordValidationError) as err:
        validate_record({"title": "X", "venue": "ICML", "year": 2020}, venues=["ACL"])
    assert err.value.kinds == {"UnknownVenue"}
    assert validate_record({"title": "X", "year": 2020}, default_venue="ACL").venue == "ACL"


def test_normalize_title():
    assert normalize_title("  Attention  Is\tAll You Need!! ") == "attention is all you need"
    assert normalize_title("A: B?") == "a: b"


def test_corpus_rejects_duplicates():
    a = make_record("p1", title="Same Title")
    with pytest.raises(DuplicateRecord):
        Corpus([a, make_record("p1", title="Other")])
    with pytest.raises(DuplicateRecord):
        Corpus([a, make_record("p2", title="same  title.")])
    with pytest.raises(YearOutOfWindow):
        Corpus([make_record("p3", year=2013)])


def test_aggregate_counts_and_mass():
    corpus = Corpus([
        make_record("a", year=2019, annual={2019: 2, 2020: 5}),
        make_record("b", year=2020, annual={2020: 3, 2021: 1}),
        make_record("c", year=2021, annual={2020: 0, 2021: 9}),
    ])
    agg = venue_year_aggregate(corpus, "ACL", 2020)
    assert (agg.n_t, agg.c_t) == (1, 8)
    assert agg.citation_vector == (3,)
    agg = venue_year_aggregate(corpus, "ACL", 2021)
    assert (agg.n_t, agg.c_t) == (1, 10)


def test_aggregate_errors_and_empty():
    empty = Corpus([])
    agg = venue_year_aggregate(empty, "ACL", 2014)
    assert (agg.n_t, agg.c_t) == (0, 0)
    corpus = Corpus([make_record("a")])
    with pytest.raises(UnknownVenue):
        venue_year_aggregate(corpus, "ICML", 2020)
    with pytest.raises(YearOutOfWindow):
        venue_year_aggregate(corpus, "ACL", 2030)
    assert venue_year_aggregate(corpus, "NAACL", 2020, known_venues=["NAACL"]).n_t == 0


def test_citation_vector_modes():
    corpus = Corpus([
        make_record("a", year=2019, citation_count=7, annual={2019: 1}),
        make_record("b", year=2019, citation_count=2),
        make_record("c", year=2020, citation_count=11, annual={2020: 4}),
    ])
    assert citation_vector(corpus, "ACL") == [2, 7, 11]
    assert citation_vector(corpus, "ACL", 2020) == [4]
    assert citation_vector(corpus, "ACL", 2021) == []
    with pytest.raises(UnknownVenue):
        citation_vector(corpus, "EMNLP")


def _brute_mass(corpus, venue, year):
    total = 0
    for rec in corpus.records:
        if rec.venue != venue:
            continue
        for y, c in rec.annual_citations.items():
            if y == year and rec.year <= year:
                total += c
    return total


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_aggregate_matches_double_loop_and_sums_to_count(seed):
    rng = random.Random(seed)
    corpus = random_corpus(rng, n=rng.randint(0, 30))
    for venue in corpus.venues:
        total = 0
        for year in corpus.years:
            agg = venue_year_aggregate(corpus, venue, year)
            assert agg.c_t == _brute_mass(corpus, venue, year)
            assert list(agg.citation_vector) == sorted(agg.citation_vector)
            total += agg.n_t
        assert total == len(corpus.venue_records(venue))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_aggregation_ignores_insertion_order(seed):
    rng = random.Random(seed)
    corpus = random_corpus(rng)
    shuffled = list(corpus.records)
    rng.shuffle(shuffled)
    other = Corpus(shuffled, corpus.window)
    for venue in corpus.venues:
        for year in corpus.years:
            assert venue_year_aggregate(corpus, venue, year) == venue_year_aggregate(other, venue, year)
