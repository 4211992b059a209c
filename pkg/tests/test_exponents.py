import csv
import math
from fractions import Fraction as F
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from nlkg import exponents as ex
from nlkg.exponents import INF, Route

GOLDEN = Path(__file__).parent / "golden"


def test_critical_exponents_examples():
    assert ex.critical_exponents(3, 1) == (F(7, 3), F(3), F(5, 2))
    assert ex.critical_exponents(1, 2).pc == 5
    assert ex.critical_exponents(5, 1) == (F(2), F(2), F(7, 4))


@pytest.mark.parametrize("d,k", [(1, 1), (0, 3), (2, 0)])
def test_critical_exponents_rejects_low_dimension(d, k):
    with pytest.raises(ValueError):
        ex.critical_exponents(d, k)


def test_admissible_r_examples():
    assert ex.admissible_r(3, 2) == 6
    for d in range(1, 6):
        assert ex.admissible_r(d, INF) == 2
    for p in (F(4), F(9, 2), F(5), F(7)):
        expected = INF if p == 4 else 2 * p / (p - 4)
        assert ex.admissible_r(1, p) == expected


@pytest.mark.parametrize("d,q", [(1, F(3)), (1, 2), (2, 2), (3, F(3, 2))])
def test_admissible_r_rejects(d, q):
    with pytest.raises(ValueError):
        ex.admissible_r(d, q)


def test_endpoint_only_admitted_from_d4():
    assert not ex.is_admissible(3, 2, 6)
    assert ex.is_endpoint(3, 2, 6)
    assert ex.is_admissible(4, 2, 4)
    assert ex.is_admissible(5, 2, F(10, 3))
    assert not ex.is_admissible(2, 2, INF)
    assert ex.is_admissible(1, 4, INF)
    assert not ex.is_admissible(3, 3, 5)  # identity fails


def test_strichartz_s_examples():
    for d in range(1, 6):
        assert ex.strichartz_s(d, 2) == 1
    for p in (F(5), F(6), F(17, 3)):
        assert ex.strichartz_s(1, 2 * p / (p - 4)) == (p - 3) / p
    s = ex.strichartz_s(2, 6)
    assert s == F(1, 3) and s * 6 == 2


def test_derived_profile_examples():
    prof = ex.derived_profile(1, 2, 5)
    assert (prof.r, prof.s, prof.gamma) == (10, F(2, 5), F(4, 5))
    assert prof.gamma == (3 + prof.p) / (2 * prof.p)
    prof = ex.derived_profile(2, 1, 3)
    assert (prof.r, prof.s, prof.gamma) == (6, F(1, 3), F(2, 3))
    assert prof.gamma == 2 / prof.p
    assert prof.r_star == INF
    prof = ex.derived_profile(3, 1, 3)
    assert (prof.r, prof.s, prof.gamma, prof.r_star) == (F(18, 5), F(4, 9), F(1, 3), F(54, 7))
    assert prof.q == prof.p and prof.rho == 2 * prof.p


@pytest.mark.parametrize("d,p", [(1, 4), (1, 3), (2, 2)])
def test_derived_profile_rejects_dp_le_4(d, p):
    with pytest.raises(ValueError):
        ex.derived_profile(d, 1, p)


def test_embedding_euclidean_examples():
    assert ex.embedding_euclidean(2, F(1, 3), 6, 6)
    for rho in (6, 10, 1000):
        assert ex.embedding_euclidean(2, F(1, 3), 6, rho)
    assert not ex.embedding_euclidean(3, F(4, 9), F(18, 5), 8)
    assert ex.embedding_euclidean(3, F(4, 9), F(18, 5), F(54, 7))
    with pytest.raises(ValueError):
        ex.embedding_euclidean(2, 0, 6, 6)


def test_embedding_compact_examples():
    v = ex.embedding_compact(1, F(1, 3), 3)
    assert v.applicable and v.route is Route.SOBOLEV
    v = ex.embedding_compact(1, F(5, 8), F(5, 2), finite_volume=True)
    assert v.applicable and v.route is Route.MORREY
    v = ex.embedding_compact(2, F(4, 5), 5)
    assert v.applicable and v.route is Route.SOBOLEV
    v = ex.embedding_compact(1, F(5, 8), F(5, 2), finite_volume=False)
    assert not v.applicable and v.failed_conditions == ("finite_volume",)
    v = ex.embedding_compact(1, F(1, 3), F(31, 10))
    assert not v.applicable and v.route is Route.NONE


def test_theorem_applicability_examples():
    v = ex.theorem_applicability(3, 1, 3)
    assert v.thm1.applicable
    v = ex.theorem_applicability(3, 1, F(11, 3), gamma_extra=1)
    assert F(11, 3) == F(9 + 6 - 4, 9 - 6)
    assert not v.thm1.applicable and v.thm2.applicable
    v = ex.theorem_applicability(1, 1, 5)
    assert not v.thm1.applicable and not v.thm2.applicable
    assert "dim_sum_in_3_6" in v.thm1.failed_conditions
    assert "k_ge_2_if_d_eq_1" in v.thm2.failed_conditions
    v = ex.theorem_applicability(2, 1, 4, gamma_extra=F(1, 2))
    assert "gamma_gt_k_half" in v.thm2.failed_conditions


def test_d2_exposes_both_bounds():
    v = ex.theorem_applicability(2, 1, 7).thm2
    assert v.theorem_range == (3, INF)
    assert v.proposition_range == (3, INF)


def test_verdict_invariants_enforced():
    with pytest.raises(ValueError):
        ex.Verdict(True, Route.NONE)
    with pytest.raises(ValueError):
        ex.Verdict(False, Route.SOBOLEV, ("x",))


def test_as_rational_rejects_floats_and_junk():
    assert ex.as_rational("7/3") == F(7, 3)
    assert ex.as_rational("2.5") == F(5, 2)
    for bad in (2.5, "pi", "inf", True):
        with pytest.raises((TypeError, ValueError)):
            ex.as_rational(bad)


# --- properties --------------------------------------------------------------

rationals = st.fractions(min_value=F(2), max_value=F(8), max_denominator=50)


@given(d=st.integers(1, 5), k=st.integers(1, 3), p=rationals)
def test_profile_is_admissible_and_s_formulas_agree(d, k, p):
    if d * p <= 4:
        return
    prof = ex.derived_profile(d, k, p)
    assert 2 / prof.q == d * (F(1, 2) - (0 if prof.r == INF else 1 / prof.r))
    assert ex.strichartz_s(d, prof.r) == prof.s == (d * p - d - 2) / (d * p)
    assert prof.gamma == d / prof.rho + 1 / prof.q + 1 - F(d, 2)


def test_gamma_nonnegative_on_embedding_range():
    checked = 0
    for d in range(1, 6):
        for num in range(2 * 60, 8 * 60 + 1):
            p = F(num, 60)
            if d * p <= 4:
                continue
            prof = ex.derived_profile(d, 1, p)
            if 2 <= prof.r <= prof.rho <= prof.r_star:
                assert prof.gamma >= 0
                checked += 1
    assert checked > 500


def test_psob_below_pc_and_route_split():
    for d in range(1, 6):
        for k in (1, 2):
            if not 3 <= d + k <= 6:
                continue
            crit = ex.critical_exponents(d, k)
            assert crit.p_sob < crit.pc
            two_routes = crit.p0 < crit.p_sob
            assert two_routes == (k == 1 and d in (2, 3))
            if d in (4, 5):
                assert crit.p_sob <= crit.p0


# --- table -------------------------------------------------------------------


def _read_ranges():
    with open(GOLDEN / "hand_ranges.csv") as fh:
        rows = list(csv.DictReader(line for line in fh if not line.startswith("#")))

    def parse(text):
        if text == "-":
            return None
        return INF if text == "inf" else F(text)

    return {(int(r["d"]), int(r["k"])): {key: parse(r[key]) for key in r if key not in ("d", "k")} for r in rows}


def _parse_point(text):
    return INF if text == "inf" else F(text)


def test_table_reproduces_hand_transcription():
    ranges = _read_ranges()
    rows = ex.restriction_rows()
    assert {(r["d"], r["k"]) for r in rows} == set(ranges)
    for row in rows:
        want = ranges[(row["d"], row["k"])]
        lo, hi = row["p_lo"], row["p_hi"]
        for thm in ("thm1", "thm2"):
            a, b = want[f"{thm}_lo"], want[f"{thm}_hi"]
            inside = a is not None and a <= lo and hi <= b
            assert row[thm] == inside, (row, thm)
        if row["thm1"]:
            m_lo, m_hi = want["morrey_lo"], want["morrey_hi"]
            morrey = m_lo is not None and m_lo <= lo and hi <= m_hi and lo < m_hi
            assert (row["route"] is Route.MORREY) == morrey, row


def test_table_matches_frozen_csv():
    assert ex.format_table(ex.restriction_rows()) == (GOLDEN / "restriction_table.csv").read_text()


def test_table_agrees_with_direct_calls():
    for row in ex.restriction_rows():
        if row["p_lo"] == row["p_hi"]:
            v = ex.theorem_applicability(row["d"], row["k"], row["p_lo"])
            assert (v.thm1.applicable, v.thm2.applicable) == (row["thm1"], row["thm2"])


@pytest.mark.parametrize("d,k,p,thm1", [(1, 2, 5, True), (4, 2, 2, True), (3, 3, F(7, 3), False), (3, 3, 3, False)])
def test_table_spot_rows(d, k, p, thm1):
    assert ex.theorem_applicability(d, k, p).thm1.applicable is thm1
