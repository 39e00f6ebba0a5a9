"""Benchmark grids for the tally search.

Each cell plants a random count vector for (n', k), builds the matching
aggregate, then times the search at one worker and, when requested, at w
workers.  Reported iterations are the vectors examined before the global
stop, always bounded by C(n'+k-1, k-1).
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .groups import EC, derive_params
from .tally import count_vectors, make_worker_ranges, search_tally


@dataclass(frozen=True)
class BenchCell:
    n: int
    k: int
    workers: int
    planted: tuple
    counts: tuple
    iterations: int
    seconds: float
    space: int
    ranges: tuple  # (start, size) per worker


def bench_tally(n_list, k_list, workers: int = 1, backend: str = EC,
                profile: str = "production", seed: int = 0,
                ia_bits: int = 1024) -> list[BenchCell]:
    worker_counts = [1] if workers <= 1 else [1, workers]
    cells = []
    rng = random.Random(seed)
    for n in n_list:
        for k in k_list:
            params = derive_params(backend, profile, n, k, ia_bits=ia_bits)
            counts = [0] * k
            for _ in range(n):
                counts[rng.randrange(k)] += 1
            product = _plant(params, counts)
            for w in worker_counts:
                result = search_tally(params, product, n, workers=w)
                cells.append(BenchCell(
                    n=n, k=k, workers=w, planted=tuple(counts),
                    counts=result.counts, iterations=result.iterations,
                    seconds=result.duration, space=count_vectors(n, k),
                    ranges=tuple(make_worker_ranges(count_vectors(n, k), w)),
                ))
    return cells


def _plant(params, counts):
    from .groups import make_group
    grp = make_group(params)
    product = grp.identity
    for ct, f in zip(counts, params.choice_generators):
        if ct:
            product = grp.op(product, grp.exp(f, ct))
    return grp.to_affine(product)


def format_bench_table(cells) -> str:
    header = (f"{'n':>4} {'k':>3} {'workers':>7} {'iterations':>12} "
              f"{'space':>12} {'seconds':>9}  ranges")
    lines = [header, "-" * len(header)]
    for c in cells:
        ranges = ",".join(f"{s}+{z}" for s, z in c.ranges)
        lines.append(f"{c.n:>4} {c.k:>3} {c.workers:>7} {c.iterations:>12} "
                     f"{c.space:>12} {c.seconds:>9.3f}  {ranges}")
    return "\n".join(lines) + "\n"
