"""Lukasiewicz walks of G_Poi(alpha, p) and their excursion structure.

Two constructions are provided. :func:`explore_graph_walk` runs the stack
exploration on a sampled core; :func:`analytic_walk` draws the independent
Poisson increments directly. Both are in law the same process.

Walk indexing: ``values[k]`` is S_k with ``values[0] == 0`` and
``increments[k - 1]`` is the step from S_{k-1} to S_k.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from poisson_er.errors import ParameterError, TruncationError
from poisson_er.graph_model import CoreGraph, ModelParams
from poisson_er.stochastic_kernel import RandomStream, counting_process_at, geometric_skip, poisson_samples

GRAPH = "graph"
ANALYTIC = "analytic"


@dataclass(frozen=True)
class LukasiewiczWalk:
    """Increments and prefix values of an exploration walk.

    Graph walks also carry exploration metadata:

    ``glue``
        ``(m, 2)`` array of step pairs ``(a, b)``: the vertex explored at step
        ``a`` has a core edge to the one explored at step ``b`` that the
        exploration never used because both were already on the stack.
    ``reveal_step``
        for each core vertex, the step at which it was revealed (0 if never).
    """

    increments: np.ndarray
    source: str
    glue: np.ndarray | None = None
    reveal_step: np.ndarray | None = None
    values: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        inc = np.asarray(self.increments, dtype=np.int64)
        if inc.size and inc.min() < -1:
            raise ParameterError("increments must be >= -1")
        object.__setattr__(self, "increments", inc)
        values = np.zeros(inc.size + 1, dtype=np.int64)
        np.cumsum(inc, out=values[1:])
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return int(self.increments.size)

    def record_mask(self) -> np.ndarray:
        """Boolean mask over ``values``: True where S_k is a new strict minimum (k >= 1)."""
        mask = np.zeros(self.values.size, dtype=bool)
        if self.values.size > 1:
            prev_min = np.minimum.accumulate(self.values)[:-1]
            mask[1:] = self.values[1:] < prev_min
        return mask


def explore_graph_walk(
    stream: RandomStream,
    core: CoreGraph,
    p: float,
    max_steps: int | None = None,
) -> LukasiewiczWalk:
    """Explore ``core`` plus its infinite stack and record the walk.

    Frontier vertices live on a LIFO stack; newly revealed vertices are pushed
    in ascending order. When the frontier is empty a fresh stack vertex is
    explored, linked to each unexplored core vertex with probability ``p``.
    Runs of stack vertices with no core neighbours are drawn in one geometric
    skip over the (stack vertex, core vertex) index. The walk stops once the
    core is exhausted and the last excursion has closed, or after
    ``max_steps`` steps.
    """
    if not (0.0 <= p <= 1.0):
        raise ParameterError(f"p must lie in [0, 1], got {p!r}")
    n = core.n_vertices
    if p == 0.0 and n > 0 and max_steps is None:
        raise ParameterError("with p = 0 the stack never reaches a non-empty core")
    limit = math.inf if max_steps is None else int(max_steps)

    indptr = core.indptr.tolist()
    indices = core.indices.tolist()
    pool = list(range(n))  # unexplored vertices, swap-remove
    where = list(range(n))
    discovered = bytearray(n)
    branch = [0] * n
    reveal_step = [0] * n
    explore_step = [0] * n
    glue_vertices: list[tuple[int, int]] = []
    increments: list[int] = []
    frontier: list[int] = []
    step = 0

    def reveal(w: int, at: int, br: int) -> None:
        i = where[w]
        last = pool.pop()
        if last != w:
            pool[i] = last
            where[last] = i
        discovered[w] = 1
        reveal_step[w] = at
        branch[w] = br

    while step < limit:
        if frontier:
            v = frontier.pop()
            step += 1
            explore_step[v] = step
            bv = branch[v]
            fresh = []
            for w in indices[indptr[v] : indptr[v + 1]]:
                if not discovered[w]:
                    fresh.append(w)
                elif branch[w] != bv:
                    glue_vertices.append((v, w))
            for w in fresh:
                reveal(w, step, bv)
            frontier.extend(fresh)
            increments.append(len(fresh) - 1)
            continue

        remaining = len(pool)
        if remaining == 0:
            if step == 0:
                increments.append(-1)
                step += 1
            break
        if p == 0.0:
            empties = limit - step
            increments.extend([-1] * int(empties))
            step += int(empties)
            break
        idx = geometric_skip(stream, p) - 1
        empties = idx // remaining
        if step + empties >= limit:
            empties = int(limit - step)
            increments.extend([-1] * empties)
            step += empties
            break
        increments.extend([-1] * empties)
        step += empties + 1
        ranks = [idx % remaining]
        r = ranks[0] + geometric_skip(stream, p)
        while r < remaining:
            ranks.append(r)
            r += geometric_skip(stream, p)
        fresh = sorted(pool[r] for r in ranks)
        for w in fresh:
            reveal(w, step, w)
        frontier.extend(fresh)
        increments.append(len(fresh) - 1)

    glue = np.asarray(
        [(explore_step[a], explore_step[b]) for a, b in glue_vertices if explore_step[a] and explore_step[b]],
        dtype=np.int64,
    ).reshape(-1, 2)
    return LukasiewiczWalk(
        increments=np.asarray(increments, dtype=np.int64),
        source=GRAPH,
        glue=glue,
        reveal_step=np.asarray(reveal_step, dtype=np.int64),
    )


def default_k_max(n: float, c: float) -> int:
    """Walk length ceil(x*n) with x = max(3, 5/c), so about n*e^{-cx} core vertices remain."""
    if c <= 0:
        raise ParameterError("c must be positive")
    return int(math.ceil(max(3.0, 5.0 / c) * n))


def analytic_walk(
    stream: RandomStream,
    params: ModelParams,
    k_max: int,
    method: str = "increments",
) -> LukasiewiczWalk:
    """Walk with independent Poisson(alpha*p*(1-p)^(k-1)) - 1 increments.

    ``method="counting"`` instead evaluates one unit-rate counting process at
    the times alpha*(1-(1-p)^k) and subtracts k; the two agree in law.
    """
    if k_max < 1:
        raise ParameterError("k_max must be >= 1")
    k = np.arange(k_max, dtype=np.float64)
    log_q = math.log1p(-params.p) if params.p < 1.0 else -math.inf
    if method == "increments":
        with np.errstate(invalid="ignore"):
            decay = np.exp(k * log_q) if params.p < 1.0 else (k == 0).astype(np.float64)
        means = params.alpha * params.p * decay
        inc = poisson_samples(stream, means) - 1
    elif method == "counting":
        if params.p < 1.0:
            times = -params.alpha * np.expm1((k + 1.0) * log_q)
        else:
            times = np.full(k_max, params.alpha)
        counts = counting_process_at(stream, np.concatenate(([0.0], times))).counts
        inc = np.diff(counts) - 1
    else:
        raise ParameterError(f"unknown method {method!r}")
    return LukasiewiczWalk(increments=inc, source=ANALYTIC)


@dataclass(frozen=True)
class Excursion:
    start: int
    end: int
    core_subsizes: tuple[int, ...]
    subtree_sizes: tuple[int, ...]

    @property
    def stack_size(self) -> int:
        return self.end - self.start


@dataclass(frozen=True)
class ExcursionDecomposition:
    """Excursions of a walk above its running infimum, stored column-wise.

    Excursion ``i`` covers steps ``starts[i]+1 .. ends[i]``. ``subtree_sizes``
    are the sub-excursions after the first step, one per core neighbour of the
    stack vertex. ``core_subsizes`` merge subtrees joined by glue edges, so for
    graph walks they are exactly the core components; for analytic walks they
    equal ``subtree_sizes``. ``truncated`` holds ``(start, end)`` of an
    unfinished final excursion, if any.
    """

    starts: np.ndarray
    ends: np.ndarray
    subtree_ptr: np.ndarray
    subtree_flat: np.ndarray
    core_ptr: np.ndarray
    core_flat: np.ndarray
    truncated: tuple[int, int] | None

    def __len__(self) -> int:
        return int(self.starts.size)

    def __iter__(self) -> Iterator[Excursion]:
        for i in range(len(self)):
            yield self[i]

    def __getitem__(self, i: int) -> Excursion:
        return Excursion(
            start=int(self.starts[i]),
            end=int(self.ends[i]),
            core_subsizes=tuple(self.core_flat[self.core_ptr[i] : self.core_ptr[i + 1]].tolist()),
            subtree_sizes=tuple(self.subtree_flat[self.subtree_ptr[i] : self.subtree_ptr[i + 1]].tolist()),
        )

    @property
    def stack_sizes(self) -> np.ndarray:
        return self.ends - self.starts

    def core_sizes(self) -> np.ndarray:
        """All core component sizes, across every complete excursion."""
        return self.core_flat


def _segment_ptr(owner: np.ndarray, n_segments: int) -> np.ndarray:
    ptr = np.zeros(n_segments + 1, dtype=np.int64)
    np.cumsum(np.bincount(owner, minlength=n_segments), out=ptr[1:])
    return ptr


def decompose_excursions(walk: LukasiewiczWalk) -> ExcursionDecomposition:
    """Split a walk at its strict minimal records and size the core pieces."""
    values = walk.values
    if values.size < 2:
        raise ParameterError("walk must have at least one step")
    records = np.flatnonzero(walk.record_mask())
    starts = np.concatenate(([0], records[:-1])).astype(np.int64)
    ends = records.astype(np.int64)
    last = values.size - 1
    tail_start = int(records[-1]) if records.size else 0
    truncated = (tail_start, last) if tail_start != last else None
    if records.size == 0:
        starts = np.empty(0, dtype=np.int64)

    n_exc = starts.size
    sizes = ends - starts
    big = np.flatnonzero(sizes > 1)
    if big.size:
        # Segmented running minimum over values[start+1 .. end] of each
        # non-trivial excursion: later segments get a lower offset.
        seg_len = sizes[big]
        seg_of_pos = np.repeat(np.arange(big.size), seg_len)
        first = np.repeat(starts[big] + 1, seg_len)
        pos = first + (np.arange(seg_of_pos.size) - np.repeat(np.cumsum(seg_len) - seg_len, seg_len))
        span = int(values.max() - values.min()) + 2
        shifted = values[pos] - seg_of_pos * span
        run_min = np.minimum.accumulate(shifted)
        is_end = np.zeros(pos.size, dtype=bool)
        is_end[1:] = shifted[1:] < run_min[:-1]
        is_end &= pos != first
        sub_end = pos[is_end]
        sub_seg = seg_of_pos[is_end]
        prev = np.empty_like(sub_end)
        prev[1:] = sub_end[:-1]
        new_seg = np.ones(sub_end.size, dtype=bool)
        new_seg[1:] = sub_seg[1:] != sub_seg[:-1]
        prev[new_seg] = starts[big][sub_seg[new_seg]] + 1
        subtree_flat = sub_end - prev
        subtree_owner = big[sub_seg]
    else:
        sub_end = np.empty(0, dtype=np.int64)
        subtree_flat = np.empty(0, dtype=np.int64)
        subtree_owner = np.empty(0, dtype=np.int64)
    subtree_ptr = _segment_ptr(subtree_owner, n_exc)

    core_ptr, core_flat = subtree_ptr, subtree_flat
    if walk.glue is not None and walk.glue.size and sub_end.size:
        core_ptr, core_flat = _merge_glued(walk.glue, sub_end, subtree_flat, subtree_owner, n_exc)

    return ExcursionDecomposition(
        starts=starts,
        ends=ends,
        subtree_ptr=subtree_ptr,
        subtree_flat=subtree_flat,
        core_ptr=core_ptr,
        core_flat=core_flat,
        truncated=truncated,
    )


def _merge_glued(glue, sub_end, subtree_flat, subtree_owner, n_exc):
    # Steps past the last complete sub-excursion belong to a truncated tail.
    ok = (glue <= sub_end[-1]).all(axis=1)
    a = np.searchsorted(sub_end, glue[ok, 0])
    b = np.searchsorted(sub_end, glue[ok, 1])
    parent = {}

    def find(x):
        root = x
        while parent.get(root, root) != root:
            root = parent[root]
        while x != root:
            parent[x], x = root, parent.get(x, x)
        return root

    for x, y in zip(a.tolist(), b.tolist()):
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[max(rx, ry)] = min(rx, ry)
    if not parent:
        return _segment_ptr(subtree_owner, n_exc), subtree_flat
    roots = np.fromiter((find(i) for i in range(sub_end.size)), dtype=np.int64, count=sub_end.size)
    merged = np.bincount(roots, weights=subtree_flat, minlength=sub_end.size).astype(np.int64)
    keep = roots == np.arange(sub_end.size)
    return _segment_ptr(subtree_owner[keep], n_exc), merged[keep]


def giant_markers(walk: LukasiewiczWalk, eps_fraction: float, n: int) -> tuple[int, int]:
    """Start ``I`` and end ``J`` of the excursion straddling the early minimum.

    ``I`` is the first index in ``[0, floor(eps*n)]`` attaining the minimum of
    the walk there, ``J`` the first index after it where the walk reaches
    ``S_I - 1``.
    """
    window = math.floor(eps_fraction * n)
    if eps_fraction <= 0 or window < 1:
        raise ParameterError("need floor(eps_fraction * n) >= 1")
    if window > len(walk):
        raise TruncationError(f"walk has {len(walk)} steps, window needs {window}; extend k_max")
    values = walk.values
    i = int(np.argmin(values[: window + 1]))
    hits = np.flatnonzero(values[i:] == values[i] - 1)
    if hits.size == 0:
        raise TruncationError(
            "walk ended inside the excursion starting at I; extend k_max "
            "(about n*exp(-c*x) core vertices remain after x*n steps)"
        )
    return i, i + int(hits[0])


@dataclass(frozen=True)
class HittingTimes:
    tau_minus_one: int | None
    all_minus_one_after: bool


def hitting_times(walk: LukasiewiczWalk) -> HittingTimes:
    """First passage to -1, and whether every later stored step is -1."""
    if len(walk) == 0:
        raise ParameterError("walk must have at least one step")
    hits = np.flatnonzero(walk.values == -1)
    if hits.size == 0:
        return HittingTimes(None, False)
    tau = int(hits[0])
    return HittingTimes(tau, bool(np.all(walk.increments[tau:] == -1)))


def walk_csv(walk: LukasiewiczWalk) -> str:
    """CSV dump with columns ``k, S_k, is_record`` (LF line endings)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["k", "S_k", "is_record"])
    rec = walk.record_mask().astype(int).tolist()
    for k, (s, r) in enumerate(zip(walk.values.tolist(), rec)):
        writer.writerow([k, s, r])
    return buf.getvalue()
