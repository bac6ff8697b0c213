import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from subtree_distance.exceptions import ParseError, ValidationError
from subtree_distance.schemas.matrix import DedupResult, DissimilarityMatrix, Tolerance
from subtree_distance.services.dissim import (
    deduplicate,
    detect_format,
    parse_matrix,
    read_matrix,
    reattach,
    restrict,
    serialize_matrix,
)
from tests.conftest import matrix


class TestParseMatrix:
    """Tests for reading csv, tsv and phylip-square text"""

    def test_single_object(self):
        """A 1x1 block without row labels is the trivial matrix"""
        d = parse_matrix("a\n0")
        assert d.labels == ("a",)
        assert np.array_equal(d.values, [[0.0]])

    def test_csv_with_corner_cell(self):
        """Header with an empty corner cell and labelled rows"""
        text = ",a,b,c\na,0,1,2\nb,1,0,1\nc,2,1,0\n"
        d = parse_matrix(text, "csv")
        assert d.labels == ("a", "b", "c")
        assert d.distance("a", "c") == 2.0

    def test_csv_without_row_labels(self):
        """Rows may omit their label when the header names the columns"""
        d = parse_matrix("a,b,c\n0,1,2\n1,0,1\n2,1,0\n")
        assert np.array_equal(d.values, [[0, 1, 2], [1, 0, 1], [2, 1, 0]])

    def test_tsv(self):
        """Tab-separated input"""
        d = parse_matrix("\ta\tb\na\t0\t1.5\nb\t1.5\t0\n", "tsv")
        assert d.distance("b", "a") == 1.5

    def test_phylip_square(self):
        """Count line followed by labelled rows"""
        d = parse_matrix("3\na 0 1 2\nb 1 0 1\nc 2 1 0\n", "phylip-square")
        assert d.labels == ("a", "b", "c")
        assert d.distance("a", "b") == 1.0

    def test_asymmetric_beyond_tolerance(self):
        """values[0][1]=1 and values[1][0]=2 is a ValidationError"""
        with pytest.raises(ValidationError):
            parse_matrix("a,b\n0,1\n2,0\n")

    def test_asymmetry_within_tolerance_is_averaged(self):
        """Tiny asymmetries are symmetrized"""
        d = parse_matrix("a,b\n0,1\n1.0000000000001,0\n")
        assert d.distance("a", "b") == d.distance("b", "a")
        assert abs(d.distance("a", "b") - 1.0) < 1e-9

    def test_negative_entry(self):
        """Negative distances are rejected"""
        with pytest.raises(ValidationError):
            parse_matrix("a,b\n0,-1\n-1,0\n")

    def test_nonzero_diagonal(self):
        """Diagonal entries must vanish"""
        with pytest.raises(ValidationError):
            parse_matrix("a,b\n1,1\n1,0\n")

    def test_duplicate_label(self):
        """Labels must be distinct"""
        with pytest.raises(ValidationError):
            parse_matrix(",a,a\na,0,1\na,1,0\n")

    def test_non_finite_value(self):
        """inf and nan are rejected"""
        with pytest.raises(ValidationError):
            parse_matrix("a,b\n0,inf\ninf,0\n")

    def test_non_numeric_cell(self):
        """Garbage in a cell is a ParseError"""
        with pytest.raises(ParseError):
            parse_matrix("a,b\n0,x\nx,0\n")

    def test_wrong_row_count(self):
        """Missing rows are a ParseError"""
        with pytest.raises(ParseError):
            parse_matrix("a,b,c\n0,1,2\n1,0,1\n")

    def test_phylip_bad_count(self):
        """The count line must match the number of rows"""
        with pytest.raises(ParseError):
            parse_matrix("3\na 0 1\nb 1 0\n", "phylip-square")

    def test_empty_text(self):
        """Empty input is a ParseError"""
        with pytest.raises(ParseError):
            parse_matrix("")

    def test_read_matrix_detects_format(self, tmp_path):
        """File suffix selects the parser"""
        path = tmp_path / "m.phy"
        path.write_text("2\na 0 4\nb 4 0\n")
        assert read_matrix(path).distance("a", "b") == 4.0


class TestSerialize:
    """Tests for writing matrices back to text"""

    @pytest.mark.parametrize("fmt", ["csv", "tsv", "phylip-square"])
    def test_parse_serialize_identity(self, quartet, fmt):
        """Serializing then parsing reproduces labels and values exactly"""
        again = parse_matrix(serialize_matrix(quartet, fmt), fmt)
        assert again.labels == quartet.labels
        assert np.array_equal(again.values, quartet.values)

    def test_full_precision_round_trip(self):
        """Non-terminating decimals survive with the default precision"""
        d = matrix(["p", "q"], [[0, 1 / 3], [1 / 3, 0]])
        assert parse_matrix(serialize_matrix(d)).distance("p", "q") == 1 / 3

    def test_detect_format(self):
        """Suffixes map to formats, anything else is csv"""
        assert detect_format("x.tsv") == "tsv"
        assert detect_format("x.PHYLIP") == "phylip-square"
        assert detect_format("x.txt") == "csv"


class TestDissimilarityMatrix:
    """Tests for the matrix value type"""

    def test_values_are_read_only(self, quartet):
        """Stored arrays cannot be mutated"""
        with pytest.raises(ValueError):
            quartet.values[0, 1] = 5.0

    def test_restrict_keeps_order(self, quartet):
        """restrict returns the sub-matrix in the requested order"""
        sub = restrict(quartet, ["d", "a"])
        assert sub.labels == ("d", "a")
        assert sub.distance("d", "a") == 10.0

    def test_triangle_inequality_not_required(self):
        """Subtree distances need not be metrics"""
        d = matrix(["a", "b", "c"], [[0, 5, 0], [5, 0, 0], [0, 0, 0]])
        assert d.distance("a", "b") == 5.0

    def test_tolerance_bind(self, quartet):
        """tau scales with the largest entry"""
        tol = Tolerance().bind(quartet)
        assert tol.scale == 11.0
        assert tol.tau == pytest.approx(11e-9)
        assert Tolerance.exact().bind(quartet).tau == 0.0


class TestDeduplicate:
    """Tests for duplicate-object removal"""

    def test_exact_duplicate(self):
        """Identical rows with d(a,b)=0 collapse onto the smaller label"""
        d = matrix(["a", "b", "c"], [[0, 0, 2], [0, 0, 2], [2, 2, 0]])
        result = deduplicate(d)
        assert result.reduced.labels == ("a", "c")
        assert result.aliases == {"b": "a"}

    def test_all_distinct(self, quartet):
        """No duplicates leaves the matrix unchanged"""
        result = deduplicate(quartet)
        assert result.aliases == {}
        assert np.array_equal(result.reduced.values, quartet.values)

    def test_three_mutual_duplicates(self):
        """Three identical objects give two aliases to one representative"""
        d = matrix(
            ["q", "p", "r", "s"],
            [[0, 0, 0, 3], [0, 0, 0, 3], [0, 0, 0, 3], [3, 3, 3, 0]],
        )
        result = deduplicate(d)
        assert result.reduced.labels == ("p", "s")
        assert result.aliases == {"q": "p", "r": "p"}

    def test_equal_rows_need_zero_distance(self):
        """Objects at positive distance are never merged"""
        d = matrix(["a", "b"], [[0, 1], [1, 0]])
        assert deduplicate(d).aliases == {}

    def test_labels_sorted(self):
        """Reduced labels come out in lexicographic order"""
        d = matrix(["c", "a", "b"], [[0, 1, 2], [1, 0, 3], [2, 3, 0]])
        assert deduplicate(d).reduced.labels == ("a", "b", "c")

    def test_near_duplicates_within_tolerance(self):
        """Rows equal up to tau are duplicates"""
        d = matrix(["a", "b", "c"], [[0, 1e-13, 2], [1e-13, 0, 2], [2, 2, 0]])
        assert deduplicate(d, Tolerance().bind(d)).aliases == {"b": "a"}

    def test_near_duplicates_split_by_another_row(self):
        """A row that sorts between two near-duplicates does not keep them apart"""
        d = matrix(
            ["p", "x", "y", "z"],
            [
                [0, 5, 5.001, 5],
                [5, 0, 0.001, 4],
                [5.001, 0.001, 0, 4],
                [5, 4, 4, 0],
            ],
        )
        tol = Tolerance(rel_eps=0.0, abs_floor=1e-2)
        result = deduplicate(d, tol)
        assert result.aliases == {"y": "x"}
        assert result.reduced.labels == ("p", "x", "z")

    def test_near_duplicates_any_input_order(self):
        """Classes are the same for every ordering of the objects"""
        d = matrix(
            ["p", "x", "y", "z"],
            [
                [0, 5, 5.001, 5],
                [5, 0, 0.001, 4],
                [5.001, 0.001, 0, 4],
                [5, 4, 4, 0],
            ],
        )
        tol = Tolerance(rel_eps=0.0, abs_floor=1e-2)
        for order in itertools.permutations(d.labels):
            assert deduplicate(restrict(d, list(order)), tol).aliases == {"y": "x"}

    def test_idempotent(self):
        """Deduplicating a reduced matrix finds nothing"""
        d = matrix(["a", "b", "c"], [[0, 0, 2], [0, 0, 2], [2, 2, 0]])
        assert deduplicate(deduplicate(d).reduced).aliases == {}

    def test_reattach(self):
        """Aliases get their representative's row back"""
        d = matrix(["b", "a", "c"], [[0, 0, 2], [0, 0, 2], [2, 2, 0]])
        restored = reattach(deduplicate(d))
        assert restored.labels == ("a", "b", "c")
        assert np.array_equal(restored.values, restrict(d, ["a", "b", "c"]).values)

    def test_reattach_without_aliases(self, quartet):
        """Nothing to reattach returns the reduced matrix"""
        restored = reattach(DedupResult(reduced=quartet))
        assert np.array_equal(restored.values, quartet.values)


@st.composite
def duplicated_matrices(draw):
    """Random matrices in which some objects are copies of others"""
    base = draw(st.integers(min_value=1, max_value=5))
    copies = draw(st.lists(st.integers(min_value=0, max_value=base - 1), max_size=4))
    upper = draw(st.lists(st.integers(min_value=1, max_value=9), min_size=base * base, max_size=base * base))
    values = np.array(upper, dtype=float).reshape(base, base)
    values = np.triu(values, 1) + np.triu(values, 1).T
    rows = list(range(base)) + copies
    full = values[np.ix_(rows, rows)]
    labels = [f"x{i}" for i in range(len(rows))]
    return DissimilarityMatrix(labels=labels, values=full)


class TestDeduplicateProperties:
    """Property tests for deduplication"""

    @settings(max_examples=60, deadline=None)
    @given(d=duplicated_matrices())
    def test_aliases_match_representatives(self, d):
        """Every alias row equals its representative's row and reattach restores d"""
        result = deduplicate(d)
        assert deduplicate(result.reduced).aliases == {}
        reduced = result.reduced.values
        for i, j in itertools.combinations(range(result.reduced.n), 2):
            assert np.any(reduced[i] != reduced[j])
        for alias, representative in result.aliases.items():
            assert np.array_equal(d.row(alias), d.row(representative))
            assert representative < alias
        restored = reattach(result)
        assert np.array_equal(restored.values, restrict(d, sorted(d.labels)).values)
