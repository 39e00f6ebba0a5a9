"""Exhaustive tally search.

The aggregate of all (repaired) blinded votes equals the product of the
per-choice generators raised to the vote counts, so decoding the tally is
a search over all count vectors summing to the effective voter count:
compositions of n' into k parts, C(n'+k-1, k-1) of them.

The search enumerates compositions in lexicographic order (largest first
coordinate first), partitions the sequence into contiguous rank ranges by
combinatorial unranking, and walks each range with incremental group
updates: stepping to the next composition multiplies a handful of
pre-tabulated generator powers into the running product instead of
recomputing it.  The first hit wins; uniqueness of the decoding is
guaranteed by the choice-generator construction whenever the packed
exponents fit the group order.
"""

from __future__ import annotations

import math
import multiprocessing
import time
from dataclasses import dataclass
from typing import Iterator, Sequence

from .errors import TallyInfeasibleError
from .groups import GroupParams
from .groups.curve import INFINITY, is_infinity, jac_add, jac_neg, jac_normalize
from .groups.params import IA


@dataclass(frozen=True)
class TallyResult:
    counts: tuple
    n_effective: int
    iterations: int
    duration: float
    workers: int


def aggregate_product(grp, votes: Sequence) -> object:
    """Group product of all blinded votes (identity when empty)."""
    acc = grp.identity
    for vote in votes:
        acc = grp.op(acc, vote.value)
    return acc


def count_vectors(n: int, k: int) -> int:
    return math.comb(n + k - 1, k - 1)


def enumerate_counts(n: int, k: int) -> Iterator[tuple]:
    """All count vectors of length k summing to n, each exactly once,
    ordered with the largest leading coordinates first."""
    if k < 1 or n < 0:
        raise ValueError("need k >= 1 and n >= 0")
    c = [0] * k
    c[0] = n
    while True:
        yield tuple(c)
        j = k - 2
        while j >= 0 and c[j] == 0:
            j -= 1
        if j < 0:
            return
        tail = sum(c[j + 1:])
        c[j] -= 1
        c[j + 1] = tail + 1
        for i in range(j + 2, k):
            c[i] = 0


def unrank_counts(rank: int, n: int, k: int) -> list:
    """Composition at the given position of the enumeration order."""
    if not 0 <= rank < count_vectors(n, k):
        raise ValueError("rank out of range")
    out = []
    remaining = n
    for pos in range(k - 1):
        parts_left = k - pos - 1
        for v in range(remaining, -1, -1):
            block = math.comb(remaining - v + parts_left - 1, parts_left - 1)
            if rank < block:
                out.append(v)
                remaining -= v
                break
            rank -= block
    out.append(remaining)
    return out


def rank_counts(counts: Sequence[int], k: int) -> int:
    """Inverse of :func:`unrank_counts`."""
    n = sum(counts)
    rank = 0
    remaining = n
    for pos in range(k - 1):
        parts_left = k - pos - 1
        for v in range(remaining, counts[pos], -1):
            rank += math.comb(remaining - v + parts_left - 1, parts_left - 1)
        remaining -= counts[pos]
    return rank


def packed_exponent(counts: Sequence[int], m: int) -> int:
    e = 0
    for i, ct in enumerate(counts):
        e += ct << (i * m)
    return e


def check_tally(grp, counts: Sequence[int], product) -> bool:
    """Does the product of generator powers for these counts equal the
    aggregate?  The integer backend collapses to one exponentiation of
    the packed count exponent."""
    params = grp.params
    if len(counts) != params.k or any(ct < 0 for ct in counts):
        return False
    if params.backend_kind == IA:
        e = packed_exponent(counts, params.m)
        return grp.exp(grp.generator, e) == product
    acc = grp.identity
    for ct, f in zip(counts, params.choice_generators):
        if ct:
            acc = grp.op(acc, grp.exp(f, ct))
    return grp.to_affine(acc) == grp.to_affine(product)


# ---------------------------------------------------------------------------
# range scanning with incremental products

def _power_tables(params: GroupParams, n: int):
    """pows[i][c] = f_i to the c-th power, plus inverses; curve entries
    are normalized so every walk addition is a mixed addition."""
    k = params.k
    if params.backend_kind == IA:
        p = params.p
        pows, invs = [], []
        for f in params.choice_generators:
            row = [1] * (n + 1)
            for c in range(1, n + 1):
                row[c] = row[c - 1] * f % p
            pows.append(row)
            invs.append([pow(v, -1, p) for v in row])
        return pows, invs
    spec = params.curve
    pows, invs = [], []
    for f in params.choice_generators:
        row = [INFINITY] * (n + 1)
        acc = INFINITY
        for c in range(1, n + 1):
            acc = jac_add(spec, acc, f)
            row[c] = jac_normalize(spec, acc)
        pows.append(row)
        invs.append([jac_neg(spec, v) for v in row])
    return pows, invs


def _scan_range(params: GroupParams, target, n: int, start: int, count: int,
                stop, result_queue, worker_id: int,
                collect_all: bool = False) -> None:
    """Walk `count` compositions from rank `start`, reporting either the
    first match (setting `stop`) or, in collect_all mode, every match.

    The successor of a composition always has zeros in positions
    j+1..k-2 (j being the decremented position), so the value update is
    at most three table additions, and a single one in the common
    j == k-2 case, covered by the pre-combined `delta` below.
    """
    k = params.k
    if k < 2:
        raise ValueError("scan needs at least two choices")
    ia = params.backend_kind == IA
    pows, invs = _power_tables(params, n)

    c = unrank_counts(start, n, k)
    if ia:
        p = params.p
        delta = invs[k - 2][1] * pows[k - 1][1] % p if n else 1
        val = 1
        for i in range(k):
            val = val * pows[i][c[i]] % p
    else:
        spec = params.curve
        target = jac_normalize(spec, target)
        tx, ty = target[0], target[1]
        fp = spec.field_prime
        if n:
            delta = jac_normalize(
                spec, jac_add(spec, invs[k - 2][1], pows[k - 1][1]))
        val = INFINITY
        for i in range(k):
            val = jac_add(spec, val, pows[i][c[i]])

    examined = 0
    found = []
    last = k - 1
    for step in range(count):
        if stop is not None and step % 1024 == 0 and stop.is_set():
            break
        examined += 1
        if ia:
            hit = val == target
        elif is_infinity(val):
            hit = is_infinity(target)
        elif is_infinity(target):
            hit = False
        else:
            z2 = val[2] * val[2] % fp
            hit = (val[0] == tx * z2 % fp
                   and val[1] == ty * z2 % fp * val[2] % fp)
        if hit:
            found.append((start + step, tuple(c)))
            if not collect_all:
                if stop is not None:
                    stop.set()
                break
        # successor composition, updating val incrementally
        if c[k - 2] > 0:
            c[k - 2] -= 1
            c[last] += 1
            val = val * delta % p if ia else jac_add(spec, val, delta)
            continue
        j = k - 3
        while j >= 0 and c[j] == 0:
            j -= 1
        if j < 0:
            break
        t = c[last]
        if ia:
            val = val * invs[j][1] % p
            if t:
                val = val * invs[last][t] % p
            val = val * pows[j + 1][t + 1] % p
        else:
            val = jac_add(spec, val, invs[j][1])
            if t:
                val = jac_add(spec, val, invs[last][t])
            val = jac_add(spec, val, pows[j + 1][t + 1])
        c[j] -= 1
        c[j + 1] = t + 1
        c[last] = 0

    result_queue.put((worker_id, found, examined))


class _LocalQueue:
    def __init__(self):
        self.items = []

    def put(self, item):
        self.items.append(item)


def make_worker_ranges(total: int, workers: int) -> list[tuple]:
    """Split [0, total) into contiguous, near-equal (start, size) chunks."""
    workers = max(1, min(workers, total)) if total else 1
    base, extra = divmod(total, workers)
    ranges = []
    start = 0
    for w in range(workers):
        size = base + (1 if w < extra else 0)
        ranges.append((start, size))
        start += size
    return ranges


def search_tally(params: GroupParams, product, n_effective: int,
                 workers: int = 1, exhaustive: bool = False) -> TallyResult:
    """Find the count vector whose generator powers multiply to the
    aggregate product.

    The rank space is split into `workers` contiguous ranges; each worker
    scans its range and a shared flag stops the others after a hit.
    `exhaustive` disables early stopping and asserts the match is unique
    (a debug mode for small groups, where packed exponents can wrap).

    Raises TallyInfeasibleError when no vector satisfies the equation,
    which signals corrupted or unrepaired votes.
    """
    if workers < 1:
        raise ValueError("need at least one worker")
    k = params.k
    total = count_vectors(n_effective, k)
    t0 = time.perf_counter()
    ranges = make_worker_ranges(total, workers)
    workers = len(ranges)

    if params.backend_kind != IA:
        product = jac_normalize(params.curve, product)

    results = []
    if workers == 1:
        queue = _LocalQueue()
        _scan_range(params, product, n_effective, 0, total, None, queue, 0,
                    collect_all=exhaustive)
        results = queue.items
    else:
        ctx = multiprocessing.get_context()
        stop = None if exhaustive else ctx.Event()
        queue = ctx.SimpleQueue()
        procs = [
            ctx.Process(target=_scan_range,
                        args=(params, product, n_effective, rstart, rsize,
                              stop, queue, w, exhaustive))
            for w, (rstart, rsize) in enumerate(ranges)
        ]
        for proc in procs:
            proc.start()
        for _ in procs:
            results.append(queue.get())
        for proc in procs:
            proc.join()

    duration = time.perf_counter() - t0
    iterations = sum(examined for _, _, examined in results)
    hits = sorted((rank, counts) for _, found, _ in results for rank, counts in found)
    if exhaustive and len(hits) > 1:
        raise TallyInfeasibleError(
            f"tally is ambiguous in this group: {[h[1] for h in hits]}")
    if not hits:
        raise TallyInfeasibleError(
            "no count vector satisfies the tally equation")
    return TallyResult(counts=hits[0][1], n_effective=n_effective,
                       iterations=iterations, duration=duration,
                       workers=workers)
