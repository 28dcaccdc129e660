"""Replica-range parallelism with order-independent integer aggregation.

A counter function maps a replica index range [start, stop) to a dict of
integer-valued counters (nested dicts allowed).  Ranges partition [0, total);
results merge by addition, which commutes, so any worker count or chunking
yields identical aggregates.
"""

from __future__ import annotations

import multiprocessing as mp
from typing import Callable

CounterDict = dict


def merge_counters(acc: CounterDict, new: CounterDict) -> CounterDict:
    for key, val in new.items():
        if isinstance(val, dict):
            acc[key] = merge_counters(acc.get(key, {}), val)
        else:
            acc[key] = acc.get(key, 0) + val
    return acc


def _invoke(args):
    fn, start, stop = args
    return fn(start, stop)


def run_counters(
    fn: Callable[[int, int], CounterDict], total: int, workers: int = 1
) -> CounterDict:
    """Run ``fn`` over [0, total) in chunks, merging the counter dicts."""
    if total < 0:
        raise ValueError("total must be >= 0")
    acc: CounterDict = {}
    if total == 0:
        return acc
    workers = max(1, workers)
    if workers == 1:
        return merge_counters(acc, fn(0, total))
    chunk = max(256, -(-total // (workers * 4)))
    ranges = [(fn, s, min(s + chunk, total)) for s in range(0, total, chunk)]
    ctx = mp.get_context("fork")
    with ctx.Pool(processes=workers) as pool:
        for part in pool.imap_unordered(_invoke, ranges):
            merge_counters(acc, part)
    return acc
