"""Exhaustive search over global/local interleavings under an oracle budget.

Sequence ``i`` of length ``k`` is the step string whose ``j``-th character
(application order) is ``"L"`` when bit ``k-1-j`` of ``i`` is set, so
index order coincides with lexicographic order of step strings.

Scoring runs on the reduced 3-D model, vectorised over index ranges.
The update is written out element-wise (no BLAS) so a sequence's score
does not depend on which chunk it was evaluated in; that is what makes
parallel and serial runs bit-identical.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional

import numpy as np

from .core import grover_success, initial_reduced_state, k_opt, reduced_global, reduced_local
from .errors import CapacityError, InvalidParameterError
from .sequence import GLOBAL, LOCAL, OperatorSequence

ONE_STAGE = "one-stage"
TWO_STAGE = "two-stage"
OBJECTIVES = (ONE_STAGE, TWO_STAGE)

DEFAULT_MARGIN = 1e-6
MAX_SEQUENCE_BITS = 30
# scores this close to the maximum are treated as ties
TIE_TOLERANCE = 1e-12
# oracle cost of the deterministic second stage, keyed by its scope
SECOND_STAGE_COST = {2: 1, 4: 4}
DEFAULT_CHUNK_BITS = 16


def step_string(index: int, length: int) -> str:
    return "".join(LOCAL if (index >> (length - 1 - j)) & 1 else GLOBAL for j in range(length))


def _check_length(length: int) -> None:
    if length > MAX_SEQUENCE_BITS:
        raise CapacityError(f"2**{length} sequences exceeds the enumeration guard of 2**{MAX_SEQUENCE_BITS}")


def enumerate_sequences(k_tot: int, n: int, m: int) -> Iterator[OperatorSequence]:
    """Yield all ``2**k_tot`` sequences over ``{G, L}`` in lexicographic order."""
    if k_tot < 1:
        raise InvalidParameterError(f"k_tot must be >= 1, got {k_tot}")
    _check_length(k_tot)
    for i in range(2**k_tot):
        yield OperatorSequence(n, m, step_string(i, k_tot))


def score_range(n: int, m: int, length: int, objective: str, start: int, stop: int) -> np.ndarray:
    """Objective value of every sequence with index in ``[start, stop)``."""
    if objective not in OBJECTIVES:
        raise InvalidParameterError(f"unknown objective {objective!r}")
    idx = np.arange(start, stop, dtype=np.int64)
    g = reduced_global(n, m).tolist()
    (c, s, _), _, _ = reduced_local(m).tolist()
    init = initial_reduced_state(n, m)
    x = np.full(idx.size, init.a_t)
    y = np.full(idx.size, init.a_ntt)
    z = np.full(idx.size, init.a_u)
    for j in range(length):
        local = ((idx >> (length - 1 - j)) & 1).astype(bool)
        gx = g[0][0] * x + g[0][1] * y + g[0][2] * z
        gy = g[1][0] * x + g[1][1] * y + g[1][2] * z
        gz = g[2][0] * x + g[2][1] * y + g[2][2] * z
        lx = c * x + s * y
        ly = c * y - s * x
        x = np.where(local, lx, gx)
        y = np.where(local, ly, gy)
        z = np.where(local, z, gz)
    if objective == ONE_STAGE:
        return x * x
    return 1.0 - z * z


@dataclass(frozen=True)
class _Task:
    n: int
    m: int
    length: int
    objective: str
    start: int
    stop: int
    threshold: float


@dataclass
class _ChunkResult:
    m: int
    evaluated: int
    count: int
    max_p: float
    # (probability, n_local, index) within TIE_TOLERANCE of the chunk maximum
    candidates: list


def _score_chunk(task: _Task) -> _ChunkResult:
    p = score_range(task.n, task.m, task.length, task.objective, task.start, task.stop)
    max_p = float(p.max())
    near = np.flatnonzero(p >= max_p - TIE_TOLERANCE)
    candidates = [(float(p[i]), bin(task.start + int(i)).count("1"), task.start + int(i)) for i in near]
    count = int(np.count_nonzero(p >= task.threshold))
    return _ChunkResult(task.m, p.size, count, max_p, candidates)


@dataclass
class OptimizationReport:
    n: int
    m_set: tuple
    k_tot: int
    objective: str
    baseline: float
    margin: float
    best_sequence: OperatorSequence
    best_probability: float
    count_above_baseline: int
    per_m_counts: dict
    evaluated: int
    wall_time_ms: float = field(default=0.0, compare=False)
    second_stage_m: Optional[int] = None

    @property
    def improved(self) -> bool:
        return self.count_above_baseline > 0

    @property
    def sequence_length(self) -> int:
        """Steps in the scored sequences (first stage only for two-stage runs)."""
        return len(self.best_sequence)

    def to_dict(self, include_timing: bool = True) -> dict:
        out = {
            "n": self.n,
            "m_set": list(self.m_set),
            "k_tot": self.k_tot,
            "objective": self.objective,
            "baseline": self.baseline,
            "best": {
                "tuple_form": self.best_sequence.tuple_form,
                "step_string": self.best_sequence.steps,
                "probability": self.best_probability,
            },
            "improved": self.improved,
            "counts": {
                "per_m": {str(m): c for m, c in sorted(self.per_m_counts.items())},
                "total": self.count_above_baseline,
            },
            "margin": self.margin,
            "evaluated": self.evaluated,
        }
        if len(self.m_set) == 1:
            out["m"] = self.m_set[0]
        if self.second_stage_m is not None:
            out["second_stage_m"] = self.second_stage_m
            out["first_stage_length"] = self.sequence_length
        if include_timing:
            out["wall_time_ms"] = self.wall_time_ms
        return out


def _run(n, m_values, length, objective, baseline, margin, workers, chunk_bits):
    _check_length(length)
    threshold = baseline + margin
    chunk = 2 ** max(0, min(chunk_bits, length))
    tasks = [
        _Task(n, m, length, objective, start, min(start + chunk, 2**length), threshold)
        for m in m_values
        for start in range(0, 2**length, chunk)
    ]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_score_chunk, tasks))
    else:
        results = [_score_chunk(t) for t in tasks]

    per_m = {m: 0 for m in m_values}
    evaluated = 0
    for r in results:
        per_m[r.m] += r.count
        evaluated += r.evaluated
    best_p = max(r.max_p for r in results)
    pool_ = [
        (n_local, r.m, idx, p)
        for r in results
        for p, n_local, idx in r.candidates
        if p >= best_p - TIE_TOLERANCE
    ]
    # fewest local steps, then smallest m, then lexicographic step string
    n_local, m_best, idx, p = min(pool_)
    best = OperatorSequence(n, m_best, step_string(idx, length))
    return best, p, per_m, evaluated


def _check_margin(margin: float) -> None:
    if not margin > 0:
        raise InvalidParameterError(f"margin must be > 0, got {margin}")


def optimize_one_stage(
    n: int,
    k_tot: int,
    m_set: Optional[Iterable[int]] = None,
    margin: float = DEFAULT_MARGIN,
    workers: int = 1,
    chunk_bits: int = DEFAULT_CHUNK_BITS,
) -> OptimizationReport:
    """Maximise the full-measurement success over every ``(m, sequence)`` pair.

    ``m_set`` defaults to ``1..n-1``.  A sequence counts as beating Grover when
    its probability is at least ``baseline + margin``.
    """
    t0 = time.perf_counter()
    m_values = tuple(sorted(set(range(1, n) if m_set is None else m_set)))
    if not m_values:
        raise InvalidParameterError("m_set is empty")
    if any(not 1 <= m < n for m in m_values):
        raise InvalidParameterError(f"every m must satisfy 1 <= m < n={n}, got {m_values}")
    _check_margin(margin)
    kopt = k_opt(n)
    if k_tot < max(kopt, 1):
        raise InvalidParameterError(f"k_tot={k_tot} is below k_opt({n})={kopt}")
    baseline = grover_success(n, kopt)
    best, p, per_m, evaluated = _run(n, m_values, k_tot, ONE_STAGE, baseline, margin, workers, chunk_bits)
    return OptimizationReport(
        n=n,
        m_set=m_values,
        k_tot=k_tot,
        objective=ONE_STAGE,
        baseline=baseline,
        margin=margin,
        best_sequence=best,
        best_probability=p,
        count_above_baseline=sum(per_m.values()),
        per_m_counts=per_m,
        evaluated=evaluated,
        wall_time_ms=(time.perf_counter() - t0) * 1e3,
    )


def optimize_two_stage(
    n: int,
    k_tot: int,
    second_stage_m: int = 2,
    margin: float = DEFAULT_MARGIN,
    workers: int = 1,
    chunk_bits: int = DEFAULT_CHUNK_BITS,
) -> OptimizationReport:
    """Maximise the first-stage block-finding probability.

    The deterministic second stage costs 1 oracle (``m = 2``) or 4 (``m = 4``),
    so first-stage sequences have length ``k_tot`` minus that cost.  The overall
    success equals the first-stage probability of landing in the target block.
    """
    t0 = time.perf_counter()
    if second_stage_m not in SECOND_STAGE_COST:
        raise InvalidParameterError(f"second stage scope must be 2 or 4, got {second_stage_m}")
    if not second_stage_m < n:
        raise InvalidParameterError(f"second stage scope {second_stage_m} must be < n={n}")
    _check_margin(margin)
    length = k_tot - SECOND_STAGE_COST[second_stage_m]
    if length < 1:
        raise InvalidParameterError(
            f"k_tot={k_tot} leaves no oracle calls for the first stage "
            f"(second stage costs {SECOND_STAGE_COST[second_stage_m]})"
        )
    kopt = k_opt(n)
    if k_tot < kopt:
        raise InvalidParameterError(f"k_tot={k_tot} is below k_opt({n})={kopt}")
    baseline = grover_success(n, kopt)
    best, p, per_m, evaluated = _run(
        n, (second_stage_m,), length, TWO_STAGE, baseline, margin, workers, chunk_bits
    )
    return OptimizationReport(
        n=n,
        m_set=(second_stage_m,),
        k_tot=k_tot,
        objective=TWO_STAGE,
        baseline=baseline,
        margin=margin,
        best_sequence=best,
        best_probability=p,
        count_above_baseline=sum(per_m.values()),
        per_m_counts=per_m,
        evaluated=evaluated,
        wall_time_ms=(time.perf_counter() - t0) * 1e3,
        second_stage_m=second_stage_m,
    )
