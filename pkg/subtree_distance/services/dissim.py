"""
Dissimilarity matrix parsing, serialization and duplicate-object preprocessing.

Supported text formats:
- csv / tsv: header row of labels (optionally preceded by an empty corner cell),
  then one row per object, optionally led by its label.
- phylip-square: first line n, then n lines "label v1 ... vn".
"""

import csv
import io
import logging
from pathlib import Path

import numpy as np

from subtree_distance.config import MatrixFormat
from subtree_distance.exceptions import ParseError, ValidationError
from subtree_distance.schemas.matrix import DedupResult, DissimilarityMatrix, Tolerance

logger = logging.getLogger(__name__)

DELIMITERS = {"csv": ",", "tsv": "\t"}


def detect_format(path: str | Path) -> MatrixFormat:
    """Guess the matrix format from a file extension"""
    suffix = Path(path).suffix.lower()
    if suffix == ".tsv":
        return "tsv"
    if suffix in (".phy", ".phylip"):
        return "phylip-square"
    return "csv"


def _to_float(cell: str, where: str) -> float:
    try:
        return float(cell)
    except ValueError:
        raise ParseError(f"Non-numeric value {cell!r} {where}", {"cell": cell}) from None


def _parse_delimited(text: str, delimiter: str) -> tuple[list[str], list[list[float]]]:
    rows = [row for row in csv.reader(io.StringIO(text), delimiter=delimiter) if any(c.strip() for c in row)]
    if not rows:
        raise ParseError("Empty matrix text")

    header = [cell.strip() for cell in rows[0]]
    if header and header[0] == "":
        header = header[1:]
    n = len(header)
    body = rows[1:]
    if n == 0:
        raise ParseError("Header row names no objects")
    if len(body) != n:
        raise ParseError(f"Expected {n} data rows, found {len(body)}", {"expected": n, "found": len(body)})

    values: list[list[float]] = []
    for i, raw in enumerate(body):
        row = [cell.strip() for cell in raw]
        if len(row) == n + 1:
            if row[0] != header[i]:
                raise ParseError(
                    f"Row label {row[0]!r} does not match header label {header[i]!r}",
                    {"row": i, "label": row[0]},
                )
            row = row[1:]
        elif len(row) != n:
            raise ParseError(f"Row {i + 1} has {len(row)} cells, expected {n}", {"row": i})
        values.append([_to_float(cell, f"in row {header[i]}") for cell in row])
    return header, values


def _parse_phylip(text: str) -> tuple[list[str], list[list[float]]]:
    lines = [line.split() for line in text.splitlines() if line.strip()]
    if not lines:
        raise ParseError("Empty matrix text")
    if len(lines[0]) != 1:
        raise ParseError("First line must hold the object count")
    try:
        n = int(lines[0][0])
    except ValueError:
        raise ParseError(f"Invalid object count {lines[0][0]!r}") from None
    if n < 1 or len(lines) - 1 != n:
        raise ParseError(f"Expected {n} data rows, found {len(lines) - 1}", {"expected": n, "found": len(lines) - 1})

    labels: list[str] = []
    values: list[list[float]] = []
    for i, tokens in enumerate(lines[1:]):
        if len(tokens) != n + 1:
            raise ParseError(f"Row {i + 1} has {len(tokens) - 1} values, expected {n}", {"row": i})
        labels.append(tokens[0])
        values.append([_to_float(cell, f"in row {tokens[0]}") for cell in tokens[1:]])
    return labels, values


def normalize_values(labels: list[str], values: np.ndarray, tol: Tolerance) -> DissimilarityMatrix:
    """
    Validate raw values and repair deviations within tau.

    Asymmetries within tau are averaged, diagonal entries and negative entries
    within tau are set to 0. Anything beyond tau is a ValidationError.
    """
    values = np.array(values, dtype=np.float64)
    n = len(labels)
    if values.shape != (n, n):
        raise ValidationError(f"Matrix shape {values.shape} does not match {n} labels")
    if not np.all(np.isfinite(values)):
        i, j = np.argwhere(~np.isfinite(values))[0]
        raise ValidationError(f"Non-finite value at ({labels[i]}, {labels[j]})", {"pair": [labels[i], labels[j]]})

    tau = tol.with_scale(float(np.abs(values).max()) if values.size else 0.0).tau
    if np.any(values < -tau):
        i, j = np.argwhere(values < -tau)[0]
        raise ValidationError(
            f"Negative value {values[i, j]} at ({labels[i]}, {labels[j]})",
            {"pair": [labels[i], labels[j]], "value": float(values[i, j])},
        )
    diagonal = np.diag(values)
    if np.any(np.abs(diagonal) > tau):
        i = int(np.flatnonzero(np.abs(diagonal) > tau)[0])
        raise ValidationError(f"Nonzero diagonal at {labels[i]}", {"label": labels[i], "value": float(diagonal[i])})
    asymmetry = np.abs(values - values.T)
    if np.any(asymmetry > tau):
        i, j = np.argwhere(asymmetry > tau)[0]
        raise ValidationError(
            f"Asymmetric entries at ({labels[i]}, {labels[j]}): {values[i, j]} vs {values[j, i]}",
            {"pair": [labels[i], labels[j]], "values": [float(values[i, j]), float(values[j, i])]},
        )

    symmetric = np.maximum((values + values.T) / 2.0, 0.0)
    np.fill_diagonal(symmetric, 0.0)
    return DissimilarityMatrix(labels=labels, values=symmetric)


def parse_matrix(text: str, fmt: MatrixFormat = "csv", tol: Tolerance | None = None) -> DissimilarityMatrix:
    """
    Parse matrix text in the declared format.

    Args:
        text: Matrix text
        fmt: One of csv, tsv, phylip-square
        tol: Tolerance used to accept and repair near-symmetric input

    Returns:
        DissimilarityMatrix: validated matrix
    """
    tol = tol or Tolerance()
    if fmt in DELIMITERS:
        labels, values = _parse_delimited(text, DELIMITERS[fmt])
    elif fmt == "phylip-square":
        labels, values = _parse_phylip(text)
    else:
        raise ParseError(f"Unknown matrix format: {fmt}")

    matrix = normalize_values(labels, np.array(values, dtype=np.float64), tol)
    logger.debug(f"Parsed {fmt} matrix with {matrix.n} objects")
    return matrix


def read_matrix(path: str | Path, fmt: MatrixFormat | None = None, tol: Tolerance | None = None) -> DissimilarityMatrix:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except UnicodeDecodeError as e:
        raise ParseError(f"{path} is not UTF-8 text: {e.reason} at byte {e.start}", {"path": str(path)}) from None
    return parse_matrix(text, fmt or detect_format(path), tol)


def serialize_matrix(d: DissimilarityMatrix, fmt: MatrixFormat = "csv", precision: int = 17) -> str:
    """Render a matrix; the default precision round-trips every float64 exactly"""

    def cell(value: float) -> str:
        return format(float(value), f".{precision}g")

    if fmt == "phylip-square":
        lines = [str(d.n)]
        for label, row in zip(d.labels, d.values):
            lines.append(" ".join([label, *(cell(v) for v in row)]))
        return "\n".join(lines) + "\n"
    if fmt not in DELIMITERS:
        raise ParseError(f"Unknown matrix format: {fmt}")

    buffer = io.StringIO()
    writer = csv.writer(buffer, delimiter=DELIMITERS[fmt], lineterminator="\n")
    writer.writerow(["", *d.labels])
    for label, row in zip(d.labels, d.values):
        writer.writerow([label, *(cell(v) for v in row)])
    return buffer.getvalue()


def restrict(d: DissimilarityMatrix, labels: list[str]) -> DissimilarityMatrix:
    """The sub-matrix on ``labels``, in the given order"""
    idx = [d.index[label] for label in labels]
    return DissimilarityMatrix(labels=labels, values=d.values[np.ix_(idx, idx)])


def _sorted_by_label(d: DissimilarityMatrix) -> DissimilarityMatrix:
    labels = sorted(d.labels)
    if list(d.labels) == labels:
        return d
    return restrict(d, labels)


def _find(parent: list[int], i: int) -> int:
    while parent[i] != i:
        parent[i] = parent[parent[i]]
        i = parent[i]
    return i


def deduplicate(d: DissimilarityMatrix, tol: Tolerance | None = None) -> DedupResult:
    """
    Remove objects whose rows are identical to another object's row.

    x and y are duplicates iff |d(x,z) - d(y,z)| <= tau for every z. Since
    d(x,x) = 0, a duplicate pair has d(x,y) <= tau, and its row sums differ by at
    most n * tau; only pairs passing both filters have their rows compared. Pairs
    that match are merged with union-find, so classes do not depend on row order.
    Each class keeps its lexicographically smallest label.

    Returns:
        DedupResult: reduced matrix with labels in lexicographic order, plus aliases
    """
    tol = tol or Tolerance()
    tau = tol.tau
    values = d.values
    n = d.n

    parent = list(range(n))
    if n > 1:
        sums = values.sum(axis=1)
        slack = n * (tau + np.finfo(np.float64).eps * max(d.max_entry, 1.0))
        close = (values <= tau) & (np.abs(sums[:, None] - sums[None, :]) <= slack)
        rows, cols = np.nonzero(np.triu(close, k=1))
        for i, j in zip(rows.tolist(), cols.tolist()):
            root_i, root_j = _find(parent, i), _find(parent, j)
            if root_i != root_j and np.all(np.abs(values[i] - values[j]) <= tau):
                parent[max(root_i, root_j)] = min(root_i, root_j)

    classes: dict[int, list[int]] = {}
    for i in range(n):
        classes.setdefault(_find(parent, i), []).append(i)

    aliases: dict[str, str] = {}
    keep: list[str] = []
    for members in classes.values():
        names = sorted(d.labels[i] for i in members)
        keep.append(names[0])
        for name in names[1:]:
            aliases[name] = names[0]

    keep.sort()
    reduced = d if not aliases else restrict(d, keep)
    reduced = _sorted_by_label(reduced)
    if aliases:
        logger.info(f"Deduplicated {n} objects to {reduced.n} ({len(aliases)} aliases)")
    return DedupResult(reduced=reduced, aliases=aliases)


def reattach(result: DedupResult) -> DissimilarityMatrix:
    """Re-expand a reduced matrix by giving every alias its representative's row"""
    reduced = result.reduced
    labels = sorted([*reduced.labels, *result.aliases])
    source = [reduced.index[result.aliases.get(label, label)] for label in labels]
    values = reduced.values[np.ix_(source, source)].copy()
    np.fill_diagonal(values, 0.0)
    return DissimilarityMatrix(labels=labels, values=values)
