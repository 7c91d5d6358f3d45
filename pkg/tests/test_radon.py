"""
Tests for shift-orbit walks, Radon estimates and the existence criteria
"""

from fractions import Fraction

import pytest

from src.errors import BoundedOrbitDetected, MalformedInput, PreconditionError, WindowOutOfRange
from src.models.enums import OrbitRegime
from src.stats.birkhoff import sample_points
from src.stats.radon import (
    Cylinder,
    CylinderSet,
    HitCounter,
    Walk,
    anchor_radius,
    bounded_orbit_detect,
    orbit_walks,
    prop32_check,
    radon_estimate,
)
from src.symbolic.subshift import build_subshift

F = Fraction
ANCHOR = CylinderSet.anchors([1, 2])


def lonely_walk(radius=10):
    """A single anchor at the origin surrounded by 1s"""
    return Walk((1,) * radius + (2,) + (1,) * radius, -radius)


def busy_walk(radius=10):
    return Walk((2,) * (2 * radius), -radius)


class TestCylinders:
    def test_dotted(self):
        c = Cylinder.dotted((2,), (1,))
        assert c == Cylinder((2, 1), -1)
        assert str(c) == "[2.1]@-1"
        assert c.shift_preimage().start == 0

    def test_anchor_set(self):
        assert CylinderSet.anchors([1, 2, 3]).words == frozenset({(2,), (3,)})

    def test_cylinder_set_shape(self):
        with pytest.raises(MalformedInput):
            CylinderSet(())
        with pytest.raises(MalformedInput):
            CylinderSet((Cylinder((2,), 0), Cylinder((2, 2), 0)))

    def test_anchor_radius(self):
        assert anchor_radius(CylinderSet((Cylinder((2, 2), 0),))) == 1
        assert anchor_radius(CylinderSet((Cylinder((1, 2), -1),))) == 1
        assert anchor_radius(CylinderSet((Cylinder((1, 1), 0),))) is None


class TestHitCounter:
    """S_N 1_A along a walk"""

    def test_counts(self):
        walk = Walk((2, 2, 1, 1, 2, 2, 1, 1), -4)
        counter = HitCounter(walk, ANCHOR)
        assert counter.max_horizon() == 4
        assert counter.count(1) == 1
        assert counter.count(4) == 4
        assert counter.count(0) == 0

    def test_horizon_beyond_walk(self):
        counter = HitCounter(Walk((2, 2, 1, 1), -2), ANCHOR)
        with pytest.raises(WindowOutOfRange):
            counter.count(3)

    def test_longer_target_shrinks_horizon(self):
        walk = busy_walk()
        assert HitCounter(walk, Cylinder((2, 2), 0)).max_horizon() == 9
        assert HitCounter(walk, Cylinder((2, 2), 0)).count(9) == 18


class TestBoundedOrbits:
    def test_stalled_orbit_detected(self):
        verdict = bounded_orbit_detect(lonely_walk(), ANCHOR, budget=4)
        assert verdict.regime is OrbitRegime.DETECTED
        assert verdict.count_at_horizon == verdict.count_before == 1
        assert not verdict.low_confidence

    def test_growing_orbit(self):
        verdict = bounded_orbit_detect(busy_walk(), ANCHOR, budget=4)
        assert verdict.regime is OrbitRegime.UNBOUNDED
        assert (verdict.count_before, verdict.count_at_horizon) == (12, 20)

    def test_radon_estimate_refuses_counting_measures(self):
        with pytest.raises(BoundedOrbitDetected):
            radon_estimate(lonely_walk(), Cylinder((2,), 0), ANCHOR, [5], budget=4)

    def test_zero_budget_is_low_confidence(self):
        """Without a budget the estimate runs and flags nothing"""
        verdict = bounded_orbit_detect(lonely_walk(), ANCHOR, budget=0)
        assert verdict.low_confidence
        assert radon_estimate(lonely_walk(), Cylinder((2,), 0), ANCHOR, [5], budget=0) == [F(1)]

    def test_ratios(self):
        estimates = radon_estimate(busy_walk(), Cylinder((2, 2), 0), ANCHOR, [1, 5], budget=4)
        assert estimates == [F(1), F(1)]


class TestOrbitWalks:
    def test_walks_carry_column_names(self, hk, alpha0):
        (walk,) = orbit_walks(hk, alpha0, [F(3, 8)], 3)
        assert walk.offset == -4
        assert walk.symbols == (2, 2, 1, 1) * 2 + (1,) * 8
        assert walk.symbols[-walk.offset] == 2


class TestExistenceCriteria:
    """Radon-measure criteria on HK walks with the exact model"""

    @pytest.fixture(scope="class")
    def setup(self, hk, alpha0, unit):
        """Exact model plus the walks of 100 samples reaching at least 1024 levels down"""
        model = build_subshift(hk, alpha0, 4, 8)
        walks = orbit_walks(hk, alpha0, sample_points(unit, 100), 8)
        return model, [w for w in walks if -w.offset >= 1024]

    def test_pairs_against_anchors(self, setup):
        """[2 2] has half the mass of the anchor set"""
        model, walks = setup
        K = CylinderSet.anchors(model.alphabet)
        report = prop32_check(model, K, [Cylinder((2, 2), 0)], walks, F(1, 4), m_schedule=[1, 4, 16, 64])
        (result,) = report.results
        assert result.exact_ratio == F(1, 2)
        assert result.minimal
        assert result.shift_violations == 0
        assert result.bound_violations == 0
        assert result.bound_pairs > 0
        assert result.max_error is not None and result.max_error <= F(1, 4)

    def test_without_model(self, setup):
        _, walks = setup
        report = prop32_check(None, ANCHOR, [Cylinder((2,), 0)], walks, F(1, 10), m_schedule=[1])
        (result,) = report.results
        assert result.m_found == 1
        assert result.c_estimate == 1
        assert result.exact_ratio is None
        assert report.consistent

    def test_null_K_rejected(self, setup):
        model, walks = setup
        with pytest.raises(PreconditionError):
            prop32_check(model, CylinderSet((Cylinder((3,), 0),)), [Cylinder((2,), 0)], walks, F(1, 10))

    def test_five_cylinders_against_exact_measure(self, setup):
        """Pair-position cylinders have ratio 1/2, the anchor itself ratio 1"""
        model, walks = setup
        assert len(walks) >= 50
        K = CylinderSet.anchors(model.alphabet)
        cylinders = [
            Cylinder((2, 2), 0),
            Cylinder((2, 2), -1),
            Cylinder((2, 1), 0),
            Cylinder((2, 1, 1), -1),
            Cylinder((2,), 0),
        ]
        report = prop32_check(model, K, cylinders, walks, F(1, 20))
        assert [r.exact_ratio for r in report.results] == [F(1, 2)] * 4 + [F(1)]
        for result in report.results:
            assert result.max_error <= F(1, 20)
            assert result.exact_ok
            assert result.shift_violations == 0
            assert result.bound_violations == 0
        assert sum(r.shift_pairs for r in report.results) >= 10**4
        assert sum(r.bound_pairs for r in report.results) >= 10**4

    def test_hk_walks_never_stall(self, hk, alpha0, unit):
        """Every window reaches the column bottom, where K is hit"""
        walks = orbit_walks(hk, alpha0, sample_points(unit, 100), 8)
        verdicts = [bounded_orbit_detect(w, ANCHOR) for w in walks]
        assert all(v.regime is OrbitRegime.UNBOUNDED for v in verdicts)
        assert not any(v.low_confidence for v in verdicts)
