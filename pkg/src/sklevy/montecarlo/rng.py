"""Deterministic random streams and the chunked worker pool.

Every chunk of paths owns its own stream, keyed by (seed, experiment key,
chunk index). Results are merged in chunk order, so estimates do not depend
on the number of workers.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

WORKERS_ENV = "SKLEVY_WORKERS"


@dataclass(frozen=True)
class RngStream:
    seed: int
    index: tuple = ()

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        idx = self.index if isinstance(self.index, tuple) else (self.index,)
        object.__setattr__(self, "index", tuple(int(i) for i in idx))

    def child(self, *key) -> "RngStream":
        return RngStream(self.seed, self.index + tuple(int(k) for k in key))

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(int(self.seed), spawn_key=self.index)
        return np.random.Generator(np.random.PCG64(ss))


def key_of(*parts) -> tuple:
    """Stable integer key from short strings and integers."""
    out = []
    for p in parts:
        if isinstance(p, str):
            out.append(int.from_bytes(p.encode()[:8].ljust(8, b"\0"), "little"))
        else:
            out.append(int(p))
    return tuple(out)


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def chunk_sizes(n: int, chunk: int) -> list:
    if n < 1:
        raise ValueError("need at least one path")
    full, rest = divmod(n, chunk)
    return [chunk] * full + ([rest] if rest else [])


def run_chunks(job: Callable, stream: RngStream, n: int, chunk: int,
               workers: int | None = None) -> list:
    """Run job(chunk_index, size, generator) over all chunks; results in chunk order."""
    sizes = chunk_sizes(n, chunk)
    workers = default_workers() if workers is None else max(1, int(workers))

    def one(i):
        return job(i, sizes[i], stream.child(i).generator())

    if workers == 1 or len(sizes) == 1:
        return [one(i) for i in range(len(sizes))]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(one, range(len(sizes))))
