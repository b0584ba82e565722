"""Two-stage search with a mid-circuit block measurement.

Stage one runs an interleaved sequence and measures the leading ``n - m``
qubits, which names a block.  Stage two re-prepares ``|block> (x) |s_m>`` and
runs an exact search on the ``m`` trailing qubits: a single local step for
``m = 2`` or the rescaled four-step sequence ``S(4,2;1,1,2)`` for ``m = 4``.
When the block is right the second stage always succeeds, so the overall
success equals the first-stage block probability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .core import SearchParams, angle, grover_success, k_opt, success_partial
from .errors import InvalidParameterError
from .optimizer import SECOND_STAGE_COST
from .sequence import OperatorSequence
from .statevector import (
    basis_block_state,
    diffusion_apply,
    grover_step,
    measure_prefix,
    oracle_apply,
    run_sequence,
    uniform_state,
)

SECOND_STAGE_LABEL = {2: "G2", 4: "S(4,2;1,1,2)"}
# diffusion scopes of the second stage, in application order, on the trailing qubits
SECOND_STAGE_SCOPES = {2: (2,), 4: tuple(OperatorSequence.parse("S(4,2;1,1,2)").scopes())}
DEFAULT_CHUNK_SHOTS = 2**16


@dataclass(frozen=True)
class TwoStagePlan:
    n: int
    m: int
    first_stage: OperatorSequence
    total_oracles: int

    @property
    def second_stage(self) -> str:
        return SECOND_STAGE_LABEL[self.m]

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "first_stage": self.first_stage.tuple_form,
            "first_stage_steps": self.first_stage.steps,
            "second_stage": self.second_stage,
            "total_oracles": self.total_oracles,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TwoStagePlan":
        try:
            n, m, text = int(data["n"]), int(data["m"]), str(data["first_stage"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidParameterError(f"malformed plan: {exc}") from None
        plan = compose(OperatorSequence.parse(text, n, m), m)
        if "second_stage" in data and data["second_stage"] != plan.second_stage:
            raise InvalidParameterError(
                f"second_stage {data['second_stage']!r} does not match m={m} ({plan.second_stage!r})"
            )
        if "total_oracles" in data and int(data["total_oracles"]) != plan.total_oracles:
            raise InvalidParameterError(
                f"total_oracles {data['total_oracles']} disagrees with computed {plan.total_oracles}"
            )
        return plan


@dataclass(frozen=True)
class RunOutcome:
    measured_bits: str
    verified: bool
    oracle_calls_used: int
    classical_checks: int = 0


@dataclass(frozen=True)
class ShotReport:
    shots: int
    seed: int
    verified: int
    expected: float
    chunk_shots: int

    @property
    def verified_fraction(self) -> float:
        return self.verified / self.shots

    @property
    def sigma(self) -> float:
        p = self.expected
        return math.sqrt(max(p * (1.0 - p), 0.0) / self.shots)

    def within(self, n_sigma: float = 4.0) -> bool:
        return abs(self.verified_fraction - self.expected) <= n_sigma * self.sigma + 1e-12

    def to_dict(self, n_sigma: float = 4.0) -> dict:
        return {
            "shots": self.shots,
            "seed": self.seed,
            "verified": self.verified,
            "verified_fraction": self.verified_fraction,
            "expected": self.expected,
            "sigma": self.sigma,
            "n_sigma": n_sigma,
            "pass": self.within(n_sigma),
            "chunk_shots": self.chunk_shots,
        }


def compose(first_stage: OperatorSequence, m: int) -> TwoStagePlan:
    if m not in SECOND_STAGE_COST:
        raise InvalidParameterError(f"second stage scope must be 2 or 4, got {m}")
    if first_stage.m != m:
        raise InvalidParameterError(f"first stage has local scope {first_stage.m}, expected {m}")
    if not m < first_stage.n:
        raise InvalidParameterError(f"need m < n, got n={first_stage.n}, m={m}")
    return TwoStagePlan(first_stage.n, m, first_stage, len(first_stage) + SECOND_STAGE_COST[m])


def two_stage_success(plan: TwoStagePlan) -> float:
    return success_partial(plan.first_stage)


def _check_universal(n: int, m: int) -> None:
    if not 1 <= m < n:
        raise InvalidParameterError(f"need 1 <= m < n, got n={n}, m={m}")


def grover_first_stage_failure(n: int, m: int) -> float:
    """Block-measurement failure after ``k_opt`` plain Grover steps (closed form)."""
    _check_universal(n, m)
    return (
        math.cos((2 * k_opt(n) + 1) * angle(n)) ** 2
        * math.cos(angle(n - m)) ** 2
        / math.cos(angle(n)) ** 2
    )


def universal_delta(n: int, m: int) -> float:
    """Fraction of Grover's residual failure recovered by measuring the block instead."""
    if m not in SECOND_STAGE_COST:
        raise InvalidParameterError(f"m must be 2 or 4, got {m}")
    _check_universal(n, m)
    return (2**m - 1) / (2**n - 1)


def universal_gain(n: int, m: int) -> float:
    """Two-stage success with a Grover first stage, minus plain Grover success."""
    return (1.0 - grover_first_stage_failure(n, m)) - grover_success(n, k_opt(n))


def suffix_distribution(m: int, scopes, target_suffix: Optional[int]) -> np.ndarray:
    """Outcome probabilities on the ``m`` trailing qubits after a second stage.

    ``target_suffix=None`` models a wrong block: the oracle has nothing to
    mark there, so only the diffusions act.
    """
    state = uniform_state(m)
    for scope in scopes:
        if target_suffix is not None:
            oracle_apply(state, target_suffix, inplace=True)
        diffusion_apply(state, scope, inplace=True)
        np.negative(state.amp, out=state.amp)
    return state.probabilities()


def _normalised(p: np.ndarray) -> np.ndarray:
    p = np.clip(p, 0.0, None)
    return p / p.sum()


def _as_target(target: Union[int, str], n: int) -> int:
    if isinstance(target, str):
        if len(target) != n or set(target) - {"0", "1"}:
            raise InvalidParameterError(f"target must be {n} bits, got {target!r}")
        return int(target, 2)
    if not 0 <= target < 2**n:
        raise InvalidParameterError(f"target {target} out of range for n={n}")
    return int(target)


def simulate_end_to_end(
    plan: TwoStagePlan,
    target: Union[int, str],
    shots: int,
    seed: int,
    chunk_shots: int = DEFAULT_CHUNK_SHOTS,
) -> ShotReport:
    """Sample complete two-stage runs and count classically verified results.

    Shots are drawn in chunks of ``chunk_shots``; chunk ``c`` uses the stream
    seeded by ``(seed, c)``, so the result depends on the chunking.
    """
    if shots < 1:
        raise InvalidParameterError(f"shots must be >= 1, got {shots}")
    if chunk_shots < 1:
        raise InvalidParameterError(f"chunk_shots must be >= 1, got {chunk_shots}")
    n, m = plan.n, plan.m
    t = _as_target(target, n)
    params = SearchParams.from_index(n, m, t)
    first = measure_prefix(run_sequence(params, plan.first_stage), n - m).probabilities
    p_block = _normalised(first)
    scopes = SECOND_STAGE_SCOPES[m]
    t_block, t_suffix = t >> m, t & (2**m - 1)
    right = _normalised(suffix_distribution(m, scopes, t_suffix))
    wrong = _normalised(suffix_distribution(m, scopes, None))

    verified = 0
    for c, start in enumerate(range(0, shots, chunk_shots)):
        size = min(chunk_shots, shots - start)
        rng = np.random.default_rng([seed, c])
        blocks = rng.choice(p_block.size, size=size, p=p_block)
        hit = blocks == t_block
        suffixes = np.empty(size, dtype=np.int64)
        suffixes[hit] = rng.choice(right.size, size=int(hit.sum()), p=right)
        suffixes[~hit] = rng.choice(wrong.size, size=int((~hit).sum()), p=wrong)
        measured = (blocks << m) | suffixes
        verified += int(np.count_nonzero(measured == t))
    return ShotReport(shots, seed, verified, two_stage_success(plan), chunk_shots)


def multiprogram_n3(
    target: Union[int, str],
    first_guess: int,
    rng: Optional[np.random.Generator] = None,
) -> RunOutcome:
    """Guess-and-verify search on 3 qubits with at most two quantum queries.

    The leading qubit is fixed to the guess and the trailing two start
    uniform; one local step (scope 2) then finds the rest exactly whenever
    the guess was right.  A failed classical check flips the guess and reruns.
    """
    if first_guess not in (0, 1):
        raise InvalidParameterError(f"guess must be 0 or 1, got {first_guess}")
    t = _as_target(target, 3)
    rng = rng if rng is not None else np.random.default_rng(0)
    guess = first_guess
    calls = 0
    checks = 0
    measured = ""
    for _ in range(2):
        state = basis_block_state(3, guess, 2)
        grover_step(state, t, 2, inplace=True)
        calls += 1
        probs = _normalised(state.probabilities())
        outcome = int(rng.choice(probs.size, p=probs))
        measured = format(outcome, "03b")
        checks += 1
        if outcome == t:
            return RunOutcome(measured, True, calls, checks)
        guess ^= 1
    return RunOutcome(measured, False, calls, checks)
