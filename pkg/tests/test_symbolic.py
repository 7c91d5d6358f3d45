"""
Tests for symbolic models, factor maps, inverse limits and Bratteli diagrams
"""

from fractions import Fraction

import pytest

from src.errors import InconsistentTower, MalformedInput, MaximalPath, NotRefining, UnknownSymbol, WordTooLong
from src.partitions.names import Word
from src.partitions.partition import Partition
from src.sets.intervals import INFINITE, IntervalSet
from src.symbolic.bratteli import (
    ROOT,
    DiagramRenderer,
    audit_path_counts,
    audit_successor_bijection,
    enumerate_paths,
    export_bratteli,
    maximal_path,
    minimal_path,
    path_level_index,
    vershik_step,
)
from src.symbolic.subshift import (
    FactorMapTable,
    InverseLimitTruncation,
    additivity_audit,
    build_inverse_limit,
    build_subshift,
    closure_audit,
    compose,
    cylinder_measure,
    factor_table,
    factor_word,
    inverse_limit_check,
)
from src.towers.surgery import canonical_tower_sequence

F = Fraction


@pytest.fixture(scope="module")
def hk_model(hk, alpha0):
    return build_subshift(hk, alpha0, 4, 6)


class TestSubshiftModel:
    """Exact cylinder measures from the stage column"""

    def test_anchor_and_pair_measures(self, hk_model):
        assert hk_model.word_measure((2,)) == 1
        assert hk_model.word_measure((2, 2)) == F(1, 2)
        assert cylinder_measure(hk_model, (2,), (2,)) == F(1, 2)

    def test_all_one_words_are_infinite(self, hk_model):
        assert hk_model.word_measure((1, 1)) == INFINITE
        assert hk_model.word_measure(()) == INFINITE

    def test_inadmissible_word_has_zero_measure(self, hk_model):
        assert not hk_model.admissible((2, 2, 2))
        assert hk_model.word_measure((2, 2, 2)) == 0

    def test_word_too_long(self, hk_model):
        with pytest.raises(WordTooLong):
            hk_model.word_measure((2,) * 5)

    def test_language(self, hk_model):
        assert hk_model.language(2) == sorted([(1, 1), (1, 2), (2, 1), (2, 2)], key=repr)
        assert hk_model.admissible(Word((2, 1)))

    def test_audits(self, hk_model):
        """Measures add up over extensions and the language is factorial"""
        audit = additivity_audit(hk_model)
        assert audit.ok
        assert audit.words_checked > 0
        assert closure_audit(hk_model) == []


class TestFactorMaps:
    def test_factor_table(self, alpha0, alpha_halves):
        table = factor_table(alpha_halves, alpha0)
        assert table.mapping == {1: 1, 2: 2, 3: 2}

    def test_not_refining(self, alpha0, alpha_halves):
        with pytest.raises(NotRefining):
            factor_table(alpha0, alpha_halves)
        with pytest.raises(NotRefining):
            factor_table(Partition((IntervalSet.of((0, F(1, 2))),)), alpha0)

    def test_unknown_symbol(self):
        with pytest.raises(UnknownSymbol):
            FactorMapTable({1: 1})(7)

    def test_factor_word_keeps_offset(self, alpha0, alpha_halves):
        image = factor_word(factor_table(alpha_halves, alpha0), Word((3, 2, 1), -1))
        assert image == Word((2, 2, 1), -1)

    def test_compose(self):
        inner = FactorMapTable({1: 1, 2: 2, 3: 3})
        outer = FactorMapTable({1: 1, 2: 2, 3: 2})
        assert compose(outer, inner).mapping == {1: 1, 2: 2, 3: 2}


class TestInverseLimit:
    def test_consistent_chain(self, hk, alpha0, alpha_halves):
        tr = build_inverse_limit(hk, [alpha0, alpha_halves], 3, 6)
        assert tr.projection(0, 1).mapping == {1: 1, 2: 2, 3: 2}
        report = inverse_limit_check(tr)
        assert report.levels == 2
        assert report.pushforwards_checked > 0

    def test_three_level_chain(self, hk, alpha0, alpha_halves):
        """Quarters refine halves refine α0; words up to length 12 at depth 6"""
        quarters = Partition(tuple(IntervalSet.of((F(i, 4), F(i + 1, 4))) for i in range(4)))
        tr = build_inverse_limit(hk, [alpha0, alpha_halves, quarters], 12, 6)
        assert tr.projection(1, 2).mapping == {1: 1, 2: 2, 3: 2, 4: 3, 5: 3}
        assert tr.projection(0, 2).mapping == {1: 1, 2: 2, 3: 2, 4: 2, 5: 2}
        report = inverse_limit_check(tr)
        assert report.levels == 3
        assert report.compositions_checked == 7
        assert report.words_projected > 0
        assert report.pushforwards_checked > 0

    def test_wrong_connecting_map(self, hk, alpha0, alpha_halves):
        tr = build_inverse_limit(hk, [alpha0, alpha_halves], 3, 6)
        broken = InverseLimitTruncation(tr.chain, tr.models, (FactorMapTable({1: 1, 2: 2, 3: 1}),))
        with pytest.raises(InconsistentTower) as exc:
            inverse_limit_check(broken)
        assert exc.value.details["l"] == 0

    def test_single_level(self, hk, alpha0):
        with pytest.raises(InconsistentTower):
            inverse_limit_check(build_inverse_limit(hk, [alpha0], 2, 4))


@pytest.fixture(scope="module")
def diagram(hk, unit):
    return export_bratteli(canonical_tower_sequence(hk, unit, [1, 2, 3, 4]))


class TestBratteli:
    """Ordered diagram of the stage columns over K = [0, 1)"""

    def test_levels(self, diagram):
        assert diagram.levels == (
            (ROOT,),
            ("v1_0", "inf1"),
            ("v2_0", "inf2"),
            ("v3_0", "inf3"),
            ("v4_0", "inf4"),
        )
        assert diagram.level_of("v2_0") == 2

    def test_incoming_order(self, diagram):
        """Column 2 runs twice through column 1, then twice through the infinite level"""
        sources = [e.source for e in diagram.incoming("v2_0")]
        assert sources == ["v1_0", "v1_0", "inf1", "inf1"]

    def test_path_counts_match_heights(self, diagram):
        assert diagram.path_counts["v2_0"] == 4
        assert diagram.path_counts["v3_0"] == 16
        assert diagram.path_counts["v4_0"] == 64
        assert audit_path_counts(diagram).ok

    def test_distinguished_path(self, diagram):
        assert [e.range for e in diagram.distinguished_path] == ["inf1", "inf2", "inf3", "inf4"]

    def test_paths_in_order(self, diagram):
        """Enumeration order is the level index the path encodes"""
        paths = list(enumerate_paths(diagram, "v3_0"))
        assert len(paths) == 16
        assert [path_level_index(diagram, p) for p in paths] == list(range(16))
        assert paths[0] == minimal_path(diagram, "v3_0")
        assert paths[-1] == maximal_path(diagram, "v3_0")

    def test_top_level_paths_visit_each_level_once(self, diagram):
        paths = list(enumerate_paths(diagram, "v4_0"))
        assert sorted(path_level_index(diagram, p) for p in paths) == list(range(64))
        walk = [minimal_path(diagram, "v4_0")]
        for _ in range(63):
            walk.append(vershik_step(diagram, walk[-1]))
        assert walk == paths
        assert walk[-1] == maximal_path(diagram, "v4_0")

    def test_vershik_step(self, diagram):
        paths = list(enumerate_paths(diagram, "v3_0"))
        for a, b in zip(paths, paths[1:]):
            assert vershik_step(diagram, a) == b
        with pytest.raises(MaximalPath):
            vershik_step(diagram, paths[-1])
        assert audit_successor_bijection(diagram, 3)
        assert audit_successor_bijection(diagram, 4)

    def test_broken_path(self, diagram):
        with pytest.raises(MalformedInput):
            vershik_step(diagram, ())
        last = diagram.incoming("v3_0")[-1].id
        with pytest.raises(MalformedInput):
            vershik_step(diagram, (last,))

    def test_not_refining_sequence(self, hk, unit):
        towers = canonical_tower_sequence(hk, unit, [3, 2])
        with pytest.raises(NotRefining):
            export_bratteli(towers)

    def test_render(self, diagram):
        renderer = DiagramRenderer()
        dot = renderer.render(diagram, "dot")
        assert dot.startswith("digraph bratteli")
        assert '"inf1" -> "inf2"' in dot
        text = renderer.render(diagram, "text")
        assert "level 0: root" in text
        with pytest.raises(MalformedInput):
            renderer.render(diagram, "svg")

    def test_json(self, diagram):
        data = diagram.to_json()
        assert len(data["distinguished_path"]) == 4
        assert len(data["edges"]) == len(diagram.edges)
