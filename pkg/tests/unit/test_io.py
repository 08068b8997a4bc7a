"""Unit tests for artifact serialization."""

# ================================== Imports ================================== #
# Standard Library
import io as std_io
import math
from pathlib import Path

# Third-party
import numpy as np
import pytest

# Local Application
from src.models.experiment import ComparisonReport, LongRow, ReportRow
from src.utils import io


# ================================== Test Classes ============================= #
class TestCells:
    """Test cases for cell formatting."""

    @pytest.mark.parametrize(
        "value, expected",
        [
            (None, ""),
            (True, "true"),
            (np.bool_(False), "false"),
            (np.int64(7), "7"),
            (0.1, "0.1"),
            (np.float64(1e-300), "1e-300"),
            (-math.inf, "-inf"),
            ("label", "label"),
        ],
    )
    def test_format_cell(self, value, expected):
        """Test repr for floats and lowercase booleans."""
        assert io.format_cell(value) == expected

    def test_floats_round_trip(self):
        """Test that written floats parse back exactly."""
        value = 0.1 + 0.2
        assert float(io.format_cell(value)) == value


class TestTables:
    """Test cases for table builders and writers."""

    def test_permutation_table(self):
        """Test one column per position."""
        header, rows = io.permutation_table(np.array([[2, 1, 3]]))
        assert header == ["w1", "w2", "w3"]
        assert rows == [[2, 1, 3]]

    def test_report_rows_prefer_long_format(self):
        """Test that long rows win over summary rows."""
        report = ComparisonReport(
            experiment="e",
            rows=[ReportRow(N=1, metrics={"a": 1.0})],
            long_rows=[
                LongRow(N=1, k_or_delta=2, exact=0.5, predicted=0.4, rel_error=0.25)
            ],
        )
        header, rows = io.report_rows(report)
        assert header == list(io.LONG_HEADER)
        assert rows == [[1, 2.0, 0.5, 0.4, 0.25]]

    def test_report_rows_union_of_metrics(self):
        """Test that summary rows share one header with blanks for gaps."""
        report = ComparisonReport(
            experiment="e",
            rows=[
                ReportRow(N=1, label="x", metrics={"a": 1.0}),
                ReportRow(N=2, label="y", metrics={"b": 2.0}),
            ],
        )
        header, rows = io.report_rows(report)
        assert header == ["N", "label", "a", "b"]
        assert rows == [[1, "x", 1.0, None], [2, "y", None, 2.0]]

    def test_key_value_rows_skip_nested(self):
        """Test that nested values stay out of the flat table."""
        header, rows = io.key_value_rows({"h": 0.28, "point": {"x": 0.5}, "z": [1]})
        assert header == ["name", "value"]
        assert rows == [["h", 0.28]]

    def test_write_csv(self):
        """Test header and formatted cells."""
        stream = std_io.StringIO()
        io.write_csv(stream, ["a", "b"], [[1, None], [0.5, True]])
        assert stream.getvalue() == "a,b\n1,\n0.5,true\n"

    def test_envelope(self):
        """Test the versioned JSON document."""
        doc = io.envelope("pmf", {"N": 3}, {"s_min": 0})
        assert doc == {
            "schema_version": io.SCHEMA_VERSION,
            "command": "pmf",
            "config": {"N": 3},
            "result": {"s_min": 0},
        }


class TestOutputPaths:
    """Test cases for output resolution."""

    def test_explicit_path_wins(self, tmp_path):
        """Test that --output overrides the directory."""
        target = tmp_path / "a.csv"
        assert io.resolve_output(target, "/elsewhere", "pmf", "csv") == target

    def test_directory_default(self):
        """Test <dir>/<command>.<format>."""
        assert io.resolve_output(None, "out", "law", "json") == Path("out/law.json")

    def test_stdout(self):
        """Test that no path and no directory means stdout."""
        assert io.resolve_output(None, None, "law", "json") is None

    def test_open_output_creates_parents(self, tmp_path):
        """Test writing into a directory that does not exist yet."""
        target = tmp_path / "deep" / "dir" / "x.csv"
        with io.open_output(target) as stream:
            stream.write("ok\n")
        assert target.read_text() == "ok\n"
