import random
import statistics

import pytest
from hypothesis import given
from hypothesis import strategies as st

from venuepulse.corpus import Corpus, VenueYearAggregate, citation_vector
from venuepulse.indicators import (
    DUAL,
    EmptyVenue,
    InsufficientYears,
    TopVenueRegistry,
    UnknownIndicator,
    ZeroCitationMass,
    central_and_tail,
    gini,
    h_index,
    mean_yoy_growth,
    milestone_index,
    norm_h,
    prestige,
    scale_indicators,
    trajectory,
    venue_report,
)

from conftest import make_record, random_corpus

ACL_N = [147, 174, 230, 194, 256, 446, 571, 577, 603, 911, 864]
ACL_C = [495, 2440, 6047, 10263, 17678, 27312, 40957, 51227, 62525, 80032, 93298]


def aggs(ns, cs, start=2014):
    return [VenueYearAggregate("V", start + i, n, c) for i, (n, c) in enumerate(zip(ns, cs))]


def test_scale_acl_series():
    s = scale_indicators(aggs(ACL_N, ACL_C))
    assert s.apgr == pytest.approx(22.06, abs=0.01)
    assert s.acgr == pytest.approx(87.89, abs=0.05)
    assert s.pc == sum(ACL_N)
    assert s.skipped_years == ()


def test_scale_constant_and_errors():
    assert scale_indicators(aggs([10] * 4, [5] * 4)).apgr == 0
    with pytest.raises(InsufficientYears):
        scale_indicators(aggs([10], [5]))


def test_growth_skips_gap_years():
    # Biennial venue: growth is measured between consecutive editions.
    mean, skipped = mean_yoy_growth([(2014, 100), (2015, 0), (2016, 150), (2017, 0), (2018, 150)])
    assert mean == pytest.approx((50.0 + 0.0) / 2)
    assert skipped == [2015, 2017]
    assert mean_yoy_growth([(2014, 0), (2015, 5)]) == (None, [2014])


def _brute_h(v):
    return max(h for h in range(len(v) + 1) if sum(1 for c in v if c >= h) >= h)


def test_h_index_examples():
    assert h_index([]) == 0
    assert h_index([3, 4, 5, 8, 10]) == 4
    assert h_index([0, 0]) == 0
    assert h_index([100]) == 1


@given(st.lists(st.integers(0, 60), max_size=60))
def test_h_index_properties(v):
    h = h_index(sorted(v))
    assert h == _brute_h(v)
    assert h <= len(v)
    assert h <= (max(v) if v else 0)
    assert h_index(v + [(max(v) if v else 0) + 1]) >= h


def test_norm_h():
    assert norm_h(299, 4965) == pytest.approx(6.02, abs=0.01)
    assert norm_h(187, 2540) == pytest.approx(7.36, abs=0.01)
    assert norm_h(0, 10) == 0
    with pytest.raises(EmptyVenue):
        norm_h(3, 0)


def test_central_and_tail_example():
    ct = central_and_tail([0, 0, 5, 200])
    assert (ct.ac, ct.mc, ct.hcr, ct.zcr) == (51.25, 2.5, 25.0, 50.0)
    assert central_and_tail([1, 3, 100, 101]).hcr == 25.0  # strictly above 100
    with pytest.raises(EmptyVenue):
        central_and_tail([])


def test_central_ac_from_totals():
    # A vector with the reference total reproduces the pooled mean.
    v = [98] * 4965
    v[: 488499 - 98 * 4965] = [99] * (488499 - 98 * 4965)
    assert sum(v) == 488499
    assert central_and_tail(v).ac == pytest.approx(98.39, abs=0.01)


@given(st.lists(st.integers(0, 400), min_size=1, max_size=80))
def test_hcr_zcr_partition(v):
    ct = central_and_tail(v)
    mid = 100.0 * sum(1 for c in v if 0 < c <= 100) / len(v)
    assert ct.hcr + mid + ct.zcr == pytest.approx(100.0, abs=1e-9)
    assert ct.ac >= 0 and ct.mc >= 0


def test_milestone_index():
    assert milestone_index([5, 10, 999]) == (0.0, 0)
    v = [1000] * 283 + [1] * (18701 - 283)
    mii, count = milestone_index(v)
    assert count == 283
    assert mii == pytest.approx(1.51, abs=0.01)
    with pytest.raises(EmptyVenue):
        milestone_index([])


def test_milestone_dual_mode_needs_top_quantile():
    reference = list(range(0, 100_000, 10))  # 10,000 papers, top 0.1% at >= 99,890.01
    cut = 0.999 * (len(reference) - 1) * 10
    mii, count = milestone_index([1500, 99_990, 50_000], 1000, 0.001, DUAL, reference)
    assert count == 1
    assert 99_990 >= cut > 50_000


def _pairwise_gini(v):
    n = len(v)
    mu = sum(v) / n
    return sum(abs(a - b) for a in v for b in v) / (2 * n * n * mu)


def test_gini_examples():
    assert gini([4, 4, 4]) == 0
    assert gini([0, 0, 0, 10]) == 0.75
    assert gini([0, 0]) == 0
    with pytest.raises(EmptyVenue):
        gini([])


@given(st.lists(st.integers(0, 1000), min_size=1, max_size=40).filter(lambda v: sum(v) > 0), st.integers(1, 50), st.randoms())
def test_gini_pairwise_scale_permutation(v, k, rnd):
    g = gini(sorted(v))
    assert g == pytest.approx(_pairwise_gini(v), abs=1e-9)
    assert gini([k * c for c in v]) == pytest.approx(g, abs=1e-12)
    shuffled = list(v)
    rnd.shuffle(shuffled)
    assert gini(shuffled) == pytest.approx(g, abs=1e-12)
    assert 0 <= g < 1


def test_prestige():
    recs = [make_record("a", citation_count=5, top_conf=5)]
    p = prestige(recs)
    assert (p.tcs, p.tcc) == (100.0, 100.0)
    recs = [
        make_record("a", citation_count=10, top_conf=3, top_journal=1),
        make_record("b", citation_count=10, top_conf=0),
    ]
    p = prestige(recs)
    assert (p.tcs, p.tjs, p.tcc) == (15.0, 5.0, 50.0)
    doubled = [make_record("a", citation_count=10, top_conf=6), make_record("b", citation_count=10)]
    assert prestige(doubled).tcc == p.tcc
    with pytest.raises(EmptyVenue):
        prestige([])
    with pytest.raises(ZeroCitationMass):
        prestige([make_record("z", citation_count=0)])


def test_registry_aliases_and_counts(tmp_path):
    reg = TopVenueRegistry.load()
    assert reg.canonical("NIPS") == "NeurIPS"
    assert reg.canonical("  oakland ") == "S&P"
    assert reg.is_top_conference("ACL") and not reg.is_top_conference("Nature")
    assert reg.is_top_journal("Science")
    assert reg.count_top_citations(["NIPS", "Nature", "Arxiv", "CHI"]) == (2, 1)
    assert len(reg.top_conferences) == 32
    path = tmp_path / "r.json"
    path.write_text('{"top_conferences": ["A", "B"], "top_journals": {"J": ["Jour"]}}')
    custom = TopVenueRegistry.load(path)
    assert custom.canonical("jour") == "J"
    with pytest.raises(ValueError):
        TopVenueRegistry({"A": ["X"], "B": ["X"]})


def _planted_corpus():
    return Corpus([
        make_record("a", year=2019, annual={2019: 0, 2020: 9}),
        make_record("b", year=2019, annual={2019: 4}),
        make_record("c", year=2019, annual={2019: 150}),
        make_record("d", year=2021, annual={2021: 2, 2022: 3}),
        make_record("e", year=2021, annual={2021: 6}),
    ])


def test_trajectory_matches_hand_computation():
    corpus = _planted_corpus()
    assert trajectory(corpus, "ACL", "ac") == [(2019, pytest.approx(154 / 3)), (2021, 4.0)]
    assert trajectory(corpus, "ACL", "mc") == [(2019, 4.0), (2021, 4.0)]
    assert trajectory(corpus, "ACL", "zcr") == [(2019, pytest.approx(100 / 3)), (2021, 0.0)]
    assert trajectory(corpus, "ACL", "hcr") == [(2019, pytest.approx(100 / 3)), (2021, 0.0)]
    assert trajectory(corpus, "ACL", "gini")[1] == (2021, pytest.approx(0.25))
    assert trajectory(corpus, "ACL", "ac", window_mode="cumulative")[1] == (2021, 5.5)


def test_trajectory_consistency_and_errors():
    rng = random.Random(3)
    corpus = random_corpus(rng, n=60)
    for y, value in trajectory(corpus, "ACL", "ac"):
        assert value == central_and_tail(citation_vector(corpus, "ACL", y)).ac
    single = Corpus([make_record("x", year=2020, annual={2020: 3})])
    assert len(trajectory(single, "ACL", "mc")) == 1
    with pytest.raises(UnknownIndicator):
        trajectory(single, "ACL", "qqe_whatever")


def test_venue_report_fields():
    rng = random.Random(11)
    corpus = random_corpus(rng, n=80)
    rep = venue_report(corpus, "ACL", with_trajectories=True)
    vec = citation_vector(corpus, "ACL")
    assert rep.pc == len(vec)
    assert rep.ac == pytest.approx(statistics.fmean(vec))
    assert rep.h_index == _brute_h(vec)
    assert rep.norm_h == pytest.approx(100 * rep.h_index / rep.pc)
    for f in ("hcr", "zcr", "mii", "tcs", "tjs", "tcc"):
        assert 0 <= getattr(rep, f) <= 100
    assert 0 <= rep.gini < 1
    assert set(rep.trajectories) == {"ac", "mc", "hcr", "zcr", "gini", "mii", "qqe"}
    again = venue_report(corpus, "ACL", with_trajectories=True)
    assert again == rep
    cohort = venue_report(corpus, "ACL", central_mode="cohort_mean")
    assert cohort.ac == pytest.approx(statistics.fmean(v for _, v in trajectory(corpus, "ACL", "ac", window_mode="cumulative")))
    dual = venue_report(corpus, "ACL", mii_mode="dual", mii_threshold=1)
    assert dual.milestone_count <= venue_report(corpus, "ACL", mii_threshold=1).milestone_count
