"""Tests for flag parsing and the deterministic report writers"""

from fractions import Fraction

import pytest

from src.errors import MalformedInput
from src.experiments.io import (
    decimal_text,
    dumps,
    parse_cylinders,
    parse_int_list,
    parse_interval_set,
    parse_partition,
    parse_rational,
    to_plain,
    write_csv,
    write_jsonl,
    write_plot_data,
)
from src.sets.intervals import IntervalSet
from src.stats.radon import Cylinder

F = Fraction


class TestParsing:
    def test_rational(self):
        assert parse_rational("3/4") == F(3, 4)
        assert parse_rational(" 2 ") == 2
        with pytest.raises(MalformedInput):
            parse_rational("1/0")
        with pytest.raises(MalformedInput):
            parse_rational("half")

    def test_interval_set(self):
        assert parse_interval_set("0:1/2, 1/2:1") == IntervalSet.of((0, 1))
        with pytest.raises(MalformedInput):
            parse_interval_set("0-1")

    def test_partition(self):
        alpha = parse_partition("0:1/2;1/2:1")
        assert alpha.size == 3
        with pytest.raises(MalformedInput):
            parse_partition(" ; ")

    def test_cylinders(self):
        assert parse_cylinders("2.2,.2-1") == [Cylinder((2, 2), -1), Cylinder((2, 1), 0)]
        with pytest.raises(MalformedInput):
            parse_cylinders("22")
        with pytest.raises(MalformedInput):
            parse_cylinders(".")
        with pytest.raises(MalformedInput):
            parse_cylinders("a.b")

    def test_int_list(self):
        assert parse_int_list("1,2, 4") == [1, 2, 4]
        with pytest.raises(MalformedInput):
            parse_int_list("1,x")


class TestWriters:
    def test_to_plain(self):
        assert to_plain({"a": (F(1, 2), 3), 2: {F(1, 3)}}) == {"a": ["1/2", 3], "2": ["1/3"]}

    def test_dumps_sorted(self):
        assert dumps({"b": 1, "a": F(1, 2)}).splitlines()[1] == '  "a": "1/2",'

    def test_jsonl_and_csv(self, tmp_path):
        write_jsonl(tmp_path / "x.jsonl", [{"d": F(1, 4)}, {"d": 0}])
        assert (tmp_path / "x.jsonl").read_text() == '{"d": "1/4"}\n{"d": 0}\n'
        write_csv(tmp_path / "x.csv", ["N", "ratio"], [{"N": 1, "ratio": F(1, 2), "extra": 5}])
        assert (tmp_path / "x.csv").read_text() == "N,ratio\n1,1/2\n"

    def test_decimal_text(self):
        assert decimal_text(F(1, 3), 4) == "0.3333"
        assert decimal_text(F(2, 3), 2) == "0.67"
        assert decimal_text(F(-1, 8), 2) == "-0.13"
        assert decimal_text(F(5, 2), 0) == "3"

    def test_plot_data(self, tmp_path):
        path = write_plot_data(tmp_path / "p.dat", [(1, F(1, 2)), (2, F(1, 4))], precision=2)
        assert path.read_text() == "# N max_deviation\n1 0.50\n2 0.25\n"
