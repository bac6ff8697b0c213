"""
Brute-force O(n^4) checkers for the four-point condition (tree metrics) and the
extended four-point condition (subtree distances).

Both scan quadruples (x, y, z, w) in lexicographic index order, pairwise-distinct
quadruples first and quadruples with repeated indices afterwards. The repeated
ones only encode the triangle inequality for the four-point condition and are
vacuous for the extended one. For each (x, y) the whole (z, w) grid is evaluated
at once with numpy.
"""

import logging
from typing import Callable, Literal, Optional

import numpy as np

from subtree_distance.schemas.diagnostics import ConditionViolation
from subtree_distance.schemas.matrix import DissimilarityMatrix, Tolerance

logger = logging.getLogger(__name__)

# (d, x, y) -> (lhs, rhs) over the (z, w) grid
GridTerms = Callable[[np.ndarray, int, int], tuple[np.ndarray, np.ndarray]]


def _four_point_terms(d: np.ndarray, x: int, y: int) -> tuple[np.ndarray, np.ndarray]:
    dx, dy = d[x], d[y]
    lhs = d[x, y] + d
    rhs = np.maximum(dx[:, None] + dy[None, :], dx[None, :] + dy[:, None])
    return lhs, rhs


def _extended_four_point_terms(d: np.ndarray, x: int, y: int) -> tuple[np.ndarray, np.ndarray]:
    dx, dy = d[x], d[y]
    dxy = d[x, y]
    lhs = dxy + d
    terms = np.stack(np.broadcast_arrays(
        dx[:, None] + dy[None, :],                     # d(x,z) + d(y,w)
        dx[None, :] + dy[:, None],                     # d(x,w) + d(y,z)
        np.full_like(d, dxy),                          # d(x,y)
        d,                                             # d(z,w)
        (dxy + dy[:, None] + dx[:, None]) / 2.0,       # (d(x,y) + d(y,z) + d(z,x)) / 2
        (dxy + dy[None, :] + dx[None, :]) / 2.0,       # (d(x,y) + d(y,w) + d(w,x)) / 2
        (dx[:, None] + d + dx[None, :]) / 2.0,         # (d(x,z) + d(z,w) + d(w,x)) / 2
        (dy[:, None] + d + dy[None, :]) / 2.0,         # (d(y,z) + d(z,w) + d(w,y)) / 2
    ))
    return lhs, terms.max(axis=0)


def _scan(
    d: DissimilarityMatrix,
    tol: Tolerance,
    terms: GridTerms,
    condition: Literal["four_point", "extended_four_point"],
) -> Optional[ConditionViolation]:
    values = d.values
    n = d.n
    tau = tol.tau
    index = np.arange(n)
    off_diagonal = index[:, None] != index[None, :]

    for distinct in (True, False):
        for x in range(n):
            for y in range(n):
                if distinct and x == y:
                    continue
                lhs, rhs = terms(values, x, y)
                violated = lhs > rhs + tau
                repeated_xy = np.isin(index, (x, y))
                distinct_mask = off_diagonal & ~repeated_xy[:, None] & ~repeated_xy[None, :]
                if x != y:
                    violated &= distinct_mask if distinct else ~distinct_mask
                if violated.any():
                    z, w = np.unravel_index(int(np.argmax(violated)), violated.shape)
                    violation = ConditionViolation(
                        quadruple=(d.labels[x], d.labels[y], d.labels[z], d.labels[w]),
                        lhs=float(lhs[z, w]),
                        rhs=float(rhs[z, w]),
                        condition=condition,
                    )
                    logger.debug(violation.render())
                    return violation
    return None


def check_four_point(d: DissimilarityMatrix, tol: Tolerance | None = None) -> Optional[ConditionViolation]:
    """
    First quadruple with d(x,y) + d(z,w) > max{d(x,z) + d(y,w), d(x,w) + d(y,z)} + tau.

    Returns:
        None iff d is a tree metric (up to tau)
    """
    tol = tol or Tolerance().bind(d)
    return _scan(d, tol, _four_point_terms, "four_point")


def check_extended_four_point(d: DissimilarityMatrix, tol: Tolerance | None = None) -> Optional[ConditionViolation]:
    """
    First quadruple where d(x,y) + d(z,w) exceeds the eight-term maximum of the
    extended four-point condition by more than tau.

    Returns:
        None iff d is a subtree distance (up to tau)
    """
    tol = tol or Tolerance().bind(d)
    return _scan(d, tol, _extended_four_point_terms, "extended_four_point")


def is_tree_metric(d: DissimilarityMatrix, tol: Tolerance | None = None) -> bool:
    return check_four_point(d, tol) is None


def is_subtree_distance_oracle(d: DissimilarityMatrix, tol: Tolerance | None = None) -> bool:
    return check_extended_four_point(d, tol) is None
