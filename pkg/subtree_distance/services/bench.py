"""
Timing harness for the reconstruction pipeline.

Instances are tree metrics on random leaves plus a fraction of objects mapped to
random subtrees. Only dedup through assembly is timed; verification is skipped.
"""

import csv
import io
import logging
import math
import statistics
import time
from pathlib import Path

from subtree_distance.exceptions import SubtreeDistanceError
from subtree_distance.schemas.instance import BenchRow, WeightRange
from subtree_distance.schemas.matrix import DissimilarityMatrix
from subtree_distance.services.gen import generate_instance
from subtree_distance.services.reconstruct import build_representation

logger = logging.getLogger(__name__)

# time(2n) / time(n) above this suggests worse than quadratic scaling
SCALING_RATIO_LIMIT = 6.0
VERTICES_PER_OBJECT = 2.5


def bench_instance(seed: int, n: int, nonleaf_fraction: float = 0.2) -> DissimilarityMatrix:
    """
    Benchmark matrix on n objects.

    About (1 - nonleaf_fraction) * n objects sit on distinct leaves of a random tree
    with 2.5n vertices; the rest are random connected subtrees.
    """
    v_count = max(2, math.ceil(VERTICES_PER_OBJECT * n))
    d, _ = generate_instance(seed, v_count, n, 1.0 - nonleaf_fraction, WeightRange())
    return d


def time_reconstruction(d: DissimilarityMatrix) -> float:
    start_time = time.perf_counter()
    try:
        build_representation(d)
    except SubtreeDistanceError as e:
        logger.warning(f"Benchmark instance with {d.n} objects failed: {e}")
    return time.perf_counter() - start_time


def run_bench(sizes: list[int], seeds: int, nonleaf_fraction: float = 0.2) -> list[BenchRow]:
    """
    Median reconstruction time per size over ``seeds`` instances.

    Args:
        sizes: numbers of objects
        seeds: instances per size (seeds 0..seeds-1)
        nonleaf_fraction: share of objects with non-singleton images

    Returns:
        list[BenchRow] in the order of ``sizes``
    """
    rows: list[BenchRow] = []
    for size in sizes:
        runs = []
        for seed in range(seeds):
            d = bench_instance(seed, size, nonleaf_fraction)
            runs.append(time_reconstruction(d))
        row = BenchRow(size=size, median_seconds=statistics.median(runs), runs=runs)
        logger.info(f"n={size}: median {row.median_seconds * 1000:.2f}ms over {len(runs)} runs")
        rows.append(row)

    by_size = {row.size: row for row in rows}
    for row in rows:
        doubled = by_size.get(2 * row.size)
        if doubled is None or row.median_seconds <= 0:
            continue
        ratio = doubled.median_seconds / row.median_seconds
        if ratio > SCALING_RATIO_LIMIT:
            logger.warning(f"time({doubled.size})/time({row.size}) = {ratio:.2f} exceeds {SCALING_RATIO_LIMIT}")
    return rows


def format_bench_csv(rows: list[BenchRow]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["size", "median_seconds"])
    for row in rows:
        writer.writerow([row.size, f"{row.median_seconds:.6f}"])
    return buffer.getvalue()


def write_bench_csv(rows: list[BenchRow], path: str | Path) -> None:
    Path(path).write_text(format_bench_csv(rows), encoding="utf-8")
