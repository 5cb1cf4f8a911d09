"""
FR-05: Bounds Analysis 테스트

주요 검증 항목:
- coupon collector 기대값 / tail
- LP closed form, unique index 하한
- single / multi bound의 term 분해와 vacuous clamp
- parameter 조건 및 range 검사 (한 번에 하나씩 위반)
- 대규모 설정의 bound / simple strategy 비율
"""

import math
import sys
from pathlib import Path

import pytest

# 프로젝트 루트를 path에 추가
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.bounds import (
    BoundInputs,
    bound_rows,
    check_parameters,
    coupon_tail,
    expected_tightness,
    expected_unique,
    informed_query_floor,
    large_scale_inputs,
    large_scale_sweep,
    lp_closed_form,
    multi_bound,
    multi_unique_avg_floor,
    multi_unique_min,
    penalty_fraction,
    simple_strategy_cost,
    single_bound,
    tightness_ratio,
    union_tail,
    union_tail_scan,
    unique_floor_single,
)
from src.errors import DomainError


@pytest.fixture
def reference_inputs():
    """조건을 모두 만족하는 기준 파라미터"""
    return BoundInputs(N=10**7, n=10**4, L=200, m=10, q_H=4000, V=60, delta=0.1, A=1000)


@pytest.fixture
def desk_inputs():
    return BoundInputs(N=10**5, n=100, L=200, m=10, q_H=4000, V=60, delta=0.1, A=10)


class TestBoundInputs:
    def test_default_P(self):
        assert BoundInputs(N=100, n=10, L=5, m=3, A=4).P == 12

    def test_with_changes_recomputes_P(self, reference_inputs):
        changed = reference_inputs.with_changes(A=7)
        assert changed.P == 70
        assert reference_inputs.with_changes(A=7, P=5).P == 5

    @pytest.mark.parametrize(
        "kwargs",
        [{"N": 0}, {"delta": 0.0}, {"delta": 1.0}, {"sigma": 1.5}, {"epsilon": -0.1}, {"A": 0}],
    )
    def test_invalid(self, kwargs):
        values = dict(N=100, n=10, L=5)
        values.update(kwargs)
        with pytest.raises(DomainError):
            BoundInputs(**values)


class TestCouponCollector:
    def test_expected_unique_small(self):
        assert expected_unique(10, 0) == 0.0
        assert expected_unique(1, 5) == 1.0
        assert expected_unique(2, 1) == pytest.approx(1.0)
        assert expected_unique(2, 2) == pytest.approx(1.5)

    def test_expected_unique_large_N_stable(self):
        """c ≪ N이면 거의 c와 같음"""
        assert expected_unique(10**12, 1000) == pytest.approx(1000, rel=1e-6)

    def test_expected_unique_invalid(self):
        with pytest.raises(DomainError):
            expected_unique(0, 1)
        with pytest.raises(DomainError):
            expected_unique(10, -1)

    def test_coupon_tail_zero_draws_invalid(self):
        tail = coupon_tail(1000, 0, 0.1)
        assert not tail.valid
        assert tail.tail == 1.0

    def test_coupon_tail_decreases_with_delta(self):
        loose = coupon_tail(1000, 1000, 0.1)
        tight = coupon_tail(1000, 1000, 0.2)
        assert loose.valid and tight.valid
        assert 0 < tight.tail < loose.tail <= 1

    def test_coupon_tail_deep_tail_in_log_space(self):
        tail = coupon_tail(10**7, 10**10, 0.1)
        assert tail.valid
        assert tail.log_tail < -1e6
        assert tail.tail == 0.0

    def test_union_tail_clamped(self):
        result = union_tail(1000, 10, 1, 0.1, J=1e30)
        assert result.tail == 1.0
        with pytest.raises(DomainError):
            union_tail(1000, 10, 0, 0.1, J=10)

    def test_union_tail_scan(self):
        worst_s, worst = union_tail_scan(10**7, 10**4, 0.1, J=2e6, s_max=2e6)
        assert 1 <= worst_s <= 2e6
        assert worst < 1e-12


class TestLP:
    def test_closed_form_values(self):
        assert lp_closed_form(1, 0.0, 0.5, 1.0) == pytest.approx(1.0)
        assert lp_closed_form(2, math.log(2), 1.0, 1.0) == pytest.approx(0.625)
        assert lp_closed_form(5, 0.3, 0.0, 0.4) == pytest.approx(0.4)

    @pytest.mark.parametrize(
        "L, d, beta, gamma",
        [(0, 0.1, 0.0, 1.0), (3, -0.1, 1.0, 1.0), (3, 0.1, 1.0, 1.5), (3, 0.1, 4.0, 1.0)],
    )
    def test_closed_form_domain(self, L, d, beta, gamma):
        with pytest.raises(DomainError):
            lp_closed_form(L, d, beta, gamma)

    def test_unique_floor_single(self):
        value = unique_floor_single(100, N=10**5, n=100, L=200, delta=0.1)
        expected = 0.9 * 10**5 * (1 - math.exp(-0.2)) * 100 / 200
        assert value == pytest.approx(expected)
        with pytest.raises(DomainError):
            unique_floor_single(201, N=10**5, n=100, L=200, delta=0.1)

    def test_multi_unique_min(self):
        assert multi_unique_min(0, 4000, 10**5, 100, 0.1) == 0.0
        one_full = multi_unique_min(4000, 4000, 10**5, 100, 0.1)
        assert one_full == pytest.approx(0.9 * 10**5 * (1 - math.exp(-4)))
        assert multi_unique_min(8000, 4000, 10**5, 100, 0.1) == pytest.approx(2 * one_full)

    def test_avg_floor_matches_min_at_full_budgets(self):
        """T가 q_H의 배수면 두 식이 일치"""
        T = 3 * 4000
        assert multi_unique_avg_floor(T, 4000, 10**5, 100, 0.1) == pytest.approx(
            multi_unique_min(T, 4000, 10**5, 100, 0.1)
        )


class TestBounds:
    def test_informed_query_floor(self):
        assert informed_query_floor(1.0, 60, 99) == pytest.approx(50.0)
        assert informed_query_floor(0.0, 3, 10) == 0.0

    def test_single_bound_terms(self):
        inputs = BoundInputs(N=10**7, n=10**4, L=200, q_H=4000, V=60)
        result = single_bound(inputs)
        assert [name for name, _ in result.penalty_terms] == ["L(V-1)", "L*n*q_H/2^V", "V"]
        assert result.penalty_terms[0][1] == 200 * 59
        assert result.total == pytest.approx(result.dominant_term - result.penalty_sum)

    def test_sigma_zero_is_vacuous(self):
        result = multi_bound(BoundInputs(N=10**7, n=10**4, L=200, m=10, q_H=4000, sigma=0.0))
        assert result.dominant_term == 0.0
        assert result.total == 0.0
        assert result.vacuous

    def test_desk_scale_clamped(self, desk_inputs):
        """작은 N에서는 P·L(V−1)이 dominant term보다 큼"""
        result = multi_bound(desk_inputs)
        assert result.raw < 0
        assert result.total == 0.0
        assert result.to_dict()["vacuous"] is True

    def test_desk_formula_over_dominant(self, desk_inputs):
        for A in (10, 50, 100):
            point = desk_inputs.with_changes(A=A)
            formula = simple_strategy_cost(1.0, point.N, point.P, point.L, point.q_H)
            ratio = formula / multi_bound(point).dominant_term
            assert 1.0 <= ratio <= 1.25

    def test_simple_strategy_cost(self):
        assert simple_strategy_cost(1.0, 10**5, 200, 99, 1000) == pytest.approx(10**6)
        assert simple_strategy_cost(0.0, 10**5, 200, 99, 1000) == 0.0

    def test_large_scale_dominance(self):
        for N in (10**7, 10**8):
            result = multi_bound(large_scale_inputs(N))
            assert penalty_fraction(result) < 0.06

    def test_expected_tightness(self, reference_inputs):
        assert expected_tightness(reference_inputs) == pytest.approx(0.9 * (1 - math.exp(-4)))
        assert tightness_ratio(reference_inputs) <= expected_tightness(reference_inputs)


class TestParameterChecks:
    def test_reference_passes(self, reference_inputs):
        report = check_parameters(reference_inputs)
        assert report.all_passed, report.failed()
        assert len(report.conditions) == 5
        assert len(report.ranges) == 5

    @pytest.mark.parametrize(
        "changes, failed",
        [
            ({"N": 5 * 10**6}, "range_N"),
            ({"n": 2 * 10**6}, "range_n"),
            ({"L": 200_000}, "range_Lm"),
            ({"q_H": 2000}, "range_qHn"),
            ({"q_H": 2 * 10**6}, "range_qH"),
        ],
    )
    def test_single_range_violation(self, reference_inputs, changes, failed):
        report = check_parameters(reference_inputs.with_changes(**changes))
        assert report.failed_ranges() == [failed]

    def test_small_V_fails_conditions(self, reference_inputs):
        report = check_parameters(reference_inputs.with_changes(V=20))
        assert "cond3_2V_vs_AqH" in report.failed()
        assert "cond4_2V_vs_nAqH" in report.failed()

    def test_huge_V_reports_instead_of_overflow(self, reference_inputs):
        """V=1100: 2^V는 float 범위 밖, log2 margin으로 비교"""
        report = check_parameters(reference_inputs.with_changes(V=1100))
        assert report.failed() == ["cond5_V_vs_n"]
        cond3 = next(c for c in report.conditions if c.name == "cond3_2V_vs_AqH")
        assert cond3.value == pytest.approx(1100 - math.log2(100 * 1000 * 4000))

    def test_large_delta_fails_condition1(self, reference_inputs):
        report = check_parameters(reference_inputs.with_changes(delta=0.2))
        assert report.failed() == ["cond1_delta_small"]

    def test_to_dict(self, reference_inputs):
        data = check_parameters(reference_inputs).to_dict()
        assert data["all_passed"] is True
        assert {c["name"] for c in data["ranges"]} == {
            "range_N", "range_n", "range_Lm", "range_qHn", "range_qH"
        }


class TestSweeps:
    def test_bound_rows(self, desk_inputs):
        rows = bound_rows(desk_inputs, [10, 20, 30])
        assert [row["P"] for row in rows] == [100, 200, 300]
        assert all(row["bound_bits"] == 0.0 for row in rows)
        assert rows[1]["strategy_bits"] == pytest.approx(2 * rows[0]["strategy_bits"])

    def test_large_scale_sweep(self):
        """bound / simple strategy ≥ (1−δ)(1−e^{−4}) − 0.05"""
        sweep = large_scale_sweep()
        assert set(sweep) == {10**7, 10**8}
        for N, rows in sweep.items():
            floor = expected_tightness(large_scale_inputs(N)) - 0.05
            assert floor == pytest.approx(0.9 * (1 - math.exp(-4)) - 0.05)
            assert len(rows) == 10
            for row in rows:
                assert 0 < row["bound_bits"] < row["strategy_bits"]
                assert floor <= row["bound_bits"] / row["strategy_bits"] < 0.9

    def test_large_scale_inputs(self):
        inputs = large_scale_inputs(10**8)
        assert (inputs.q_H, inputs.L, inputs.m) == (40_000, 2000, 10)
