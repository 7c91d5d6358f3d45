"""
Tests for rank-one specs, stage columns and point dynamics
"""

import json
import random
from fractions import Fraction

import pytest

from src.config.settings import settings
from src.errors import (
    DepthExceeded,
    MalformedInput,
    NeedsDeeperStage,
    NoReturnWithinBudget,
    PreconditionError,
    UnknownPreset,
    UnresolvedMass,
)
from src.rankone.spec import StageRule, list_presets, load_spec_file, measure_growth, preset
from src.rankone.stage import (
    apply_T,
    apply_T_inverse,
    build_stage,
    feasible_horizon,
    orbit_segment,
    return_time,
    return_time_tower,
)
from src.sets.intervals import IntervalSet

F = Fraction


class TestPresets:
    """Built-in systems"""

    def test_catalog(self):
        names = [p["name"] for p in list_presets()]
        assert names == ["hajian-kakutani", "chacon-infinite"]

    def test_unknown_preset(self):
        with pytest.raises(UnknownPreset):
            preset("no-such-system")

    def test_hk_heights_and_widths(self, hk):
        """h_k = 4^(k-1) and w_k = 2^-(k-1)"""
        assert hk.heights(5) == [1, 4, 16, 64, 256]
        assert hk.widths(4) == [1, F(1, 2), F(1, 4), F(1, 8)]

    def test_chacon_heights(self, chacon):
        """h_(k+1) = 4 h_k + 1"""
        assert chacon.heights(4) == [1, 5, 21, 85]

    def test_hk_measure_diverges(self, hk):
        growth = measure_growth(hk, 6)
        assert growth.measures == (1, 2, 4, 8, 16, 32)
        assert growth.looks_divergent

    def test_stage_rule_validation(self):
        with pytest.raises(MalformedInput):
            StageRule(1, (0,))
        with pytest.raises(MalformedInput):
            StageRule(2, (0,))
        with pytest.raises(MalformedInput):
            StageRule(2, (0, -1))


class TestSpecFile:
    def test_load_spec_file(self, tmp_path, hk):
        """A spec file written from a preset loads back to the same rules"""
        path = tmp_path / "hk.json"
        path.write_text(json.dumps(preset("hajian-kakutani", 4).to_json()))
        spec = load_spec_file(path)
        assert spec.heights(4) == hk.heights(4)
        assert spec.infinite_measure

    def test_bad_spec_file(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(MalformedInput):
            load_spec_file(path)

    def test_missing_stages(self, tmp_path):
        path = tmp_path / "partial.json"
        path.write_text(json.dumps({"base": [0, 1, 1, 1]}))
        with pytest.raises(MalformedInput):
            load_spec_file(path)


class TestStageColumns:
    """Explicit cutting-and-stacking columns"""

    def test_stage_three_levels(self, hk):
        """Two copies of stage 2 shifted by the new width, then 8 spacers"""
        stage = build_stage(hk, 3)
        q = F(1, 4)
        assert stage.height == 16
        assert stage.width == q
        assert list(stage.starts[:8]) == [0, 2 * q, 4 * q, 6 * q, q, 3 * q, 5 * q, 7 * q]
        assert list(stage.starts[8:]) == [2 + k * q for k in range(8)]
        assert stage.used_region == IntervalSet.of((0, 4))

    def test_locate(self, hk):
        stage = build_stage(hk, 3)
        assert stage.locate(F(3, 8)) == (4, F(1, 8))
        assert stage.locate(5) is None
        with pytest.raises(NeedsDeeperStage):
            stage.require(5)

    def test_push_moves_levels(self, hk):
        stage = build_stage(hk, 3)
        assert stage.push(stage.level(0), 4) == IntervalSet.of((F(1, 4), F(1, 2)))
        with pytest.raises(NeedsDeeperStage):
            stage.push(stage.level(15), 1)

    def test_depth_bounds(self, hk):
        with pytest.raises(PreconditionError):
            build_stage(hk, 0)
        with pytest.raises(DepthExceeded):
            build_stage(hk, settings.max_depth + 1)

    def test_spec_without_enough_stages(self):
        with pytest.raises(DepthExceeded):
            build_stage(preset("hajian-kakutani", 3), 4)


class TestPointDynamics:
    """T, T^-1 and orbit windows read off the column"""

    def test_apply_T_and_inverse(self, hk):
        assert apply_T(hk, F(1, 8), 3) == F(5, 8)
        assert apply_T_inverse(hk, F(5, 8), 3) == F(1, 8)

    def test_top_and_base_need_deeper_stage(self, hk):
        with pytest.raises(NeedsDeeperStage):
            apply_T(hk, F(31, 8), 3)
        with pytest.raises(NeedsDeeperStage):
            apply_T_inverse(hk, F(1, 8), 3)

    def test_orbit_segment(self, hk):
        assert orbit_segment(hk, F(1, 8), 0, 4, 3) == [F(1, 8), F(5, 8), F(9, 8), F(13, 8), F(3, 8)]

    def test_orbit_segment_is_stage_independent(self, hk):
        """A deeper column reproduces the same orbit window"""
        assert orbit_segment(hk, F(1, 8), 0, 4, 5) == orbit_segment(hk, F(1, 8), 0, 4, 3)

    def test_orbit_segment_bounds(self, hk):
        with pytest.raises(PreconditionError):
            orbit_segment(hk, F(1, 8), 3, 1, 3)
        with pytest.raises(NeedsDeeperStage):
            orbit_segment(hk, F(1, 8), -1, 2, 3)

    def test_feasible_horizon(self, hk):
        assert feasible_horizon(hk, F(1, 8), 3) == 0
        assert feasible_horizon(hk, F(3, 8), 3) == 4


class TestReturnTimes:
    """First returns to B = [0, 1/2)"""

    def test_return_time_values(self, hk, half):
        assert return_time(hk, F(1, 8), half, 100, 3) == 4
        assert return_time(hk, F(5, 16), half, 100, 4) == 12
        assert return_time(hk, F(3, 8), half, 100, 5) == 44

    def test_return_needs_deeper_stage(self, hk, half):
        with pytest.raises(NeedsDeeperStage):
            return_time(hk, F(3, 8), half, 100, 3)

    def test_return_budget(self, hk, half):
        with pytest.raises(NoReturnWithinBudget):
            return_time(hk, F(5, 16), half, 5, 4)

    def test_point_outside_B(self, hk, half):
        with pytest.raises(PreconditionError):
            return_time(hk, F(3, 4), half, 10, 3)

    def test_return_time_tower(self, hk, half):
        """Columns over r_B^-1(4) and r_B^-1(12), the rest unresolved"""
        t = return_time_tower(hk, half, 4)
        assert t.heights == [4, 12]
        assert t.columns[0].base == IntervalSet.of((0, F(1, 4)))
        assert t.columns[1].base == IntervalSet.of((F(1, 4), F(3, 8)))
        assert t.unresolved == IntervalSet.of((F(3, 8), F(1, 2)))
        t.validate()

    def test_return_time_tower_without_returns(self, hk, half):
        with pytest.raises(UnresolvedMass):
            return_time_tower(hk, half, 2)

    def test_residual_refused(self, hk, half):
        with pytest.raises(UnresolvedMass):
            return_time_tower(hk, half, 4, allow_residual=False)


class TestRandomizedDynamics:
    """Seeded subsets of [0, 1) pushed through the stage-6 column"""

    @staticmethod
    def random_set(rng: random.Random) -> IntervalSet:
        cells = [i for i in range(16) if rng.random() < 0.4] or [rng.randrange(16)]
        return IntervalSet.of(*((Fraction(i, 16), Fraction(i + 1, 16)) for i in cells))

    @pytest.mark.parametrize("seed", range(10))
    def test_push_preserves_measure(self, hk, seed):
        rng = random.Random(seed)
        stage = build_stage(hk, 6)
        s = self.random_set(rng)
        for k in range(1, 6):
            image = stage.push(s, k)
            assert image.measure() == s.measure()
            for p, q in s.intervals:
                y = p + (q - p) * Fraction(rng.randrange(1, 8), 8)
                z = y
                for _ in range(k):
                    z = apply_T(hk, z, 6)
                assert image.contains(z)

    @pytest.mark.parametrize("seed", range(10))
    def test_return_tower_accounts_for_B(self, hk, seed):
        """Bases and residual partition B; the levels are disjoint"""
        rng = random.Random(seed)
        B = self.random_set(rng)
        t = return_time_tower(hk, B, 6)
        t.validate()
        assert sum((c.base_measure for c in t.columns), Fraction(0)) + t.unresolved.measure() == B.measure()
        assert t.base_region | t.unresolved == B
        assert t.principal_region.measure() == t.principal_mass
        assert (B - t.unresolved).issubset(t.principal_region)
        assert t.principal_region.issubset(build_stage(hk, 6).used_region)

    @pytest.mark.parametrize("depth", range(1, 9))
    def test_hk_measure_doubles(self, hk, depth):
        assert measure_growth(hk, depth).measures == tuple(2 ** (k - 1) for k in range(1, depth + 1))
