"""Brute-force state-vector simulation with explicit reflections.

Amplitudes are real and indexed so that qubit 0 is the most significant
bit: the leading ``n - m`` bits of an index are its block number and a
scope-``m`` diffusion mixes only the ``2**m`` amplitudes within one block.
This backend is deliberately independent of the reduced 3-D model and is
used to check it.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Union

import numpy as np

from .core import DEFAULT_N_CAP, SearchParams, apply_sequence
from .errors import CapacityError, InvalidParameterError, UndefinedCollapseError
from .sequence import OperatorSequence

DUMP_MAGIC = b"GSVD"


@dataclass
class StateVector:
    n: int
    amp: np.ndarray

    def __post_init__(self):
        self.amp = np.asarray(self.amp, dtype=np.float64)
        if self.amp.shape != (2**self.n,):
            raise InvalidParameterError(f"expected {2**self.n} amplitudes, got shape {self.amp.shape}")

    def copy(self) -> "StateVector":
        return StateVector(self.n, self.amp.copy())

    def probabilities(self) -> np.ndarray:
        return self.amp**2

    def norm(self) -> float:
        return float(np.sqrt(np.dot(self.amp, self.amp)))


def _check_size(n: int, n_cap: int) -> None:
    if n < 1:
        raise InvalidParameterError(f"n must be >= 1, got {n}")
    if n > n_cap:
        raise CapacityError(f"n={n} exceeds the state-vector cap of {n_cap} qubits")


def uniform_state(n: int, n_cap: int = DEFAULT_N_CAP) -> StateVector:
    _check_size(n, n_cap)
    dim = 2**n
    return StateVector(n, np.full(dim, np.sqrt(1.0 / dim)))


def basis_block_state(n: int, prefix: int, m: int, n_cap: int = DEFAULT_N_CAP) -> StateVector:
    """``|prefix> (x) |s_m>``: uniform over the ``2**m`` items of one block."""
    _check_size(n, n_cap)
    if not 1 <= m <= n:
        raise InvalidParameterError(f"need 1 <= m <= n, got m={m}")
    if not 0 <= prefix < 2 ** (n - m):
        raise InvalidParameterError(f"prefix {prefix} out of range for {n - m} bits")
    amp = np.zeros(2**n)
    size = 2**m
    amp[prefix * size:(prefix + 1) * size] = np.sqrt(1.0 / size)
    return StateVector(n, amp)


def oracle_apply(state: StateVector, target: int, inplace: bool = False) -> StateVector:
    """Phase-flip the target amplitude."""
    if not 0 <= target < state.amp.size:
        raise InvalidParameterError(f"target {target} out of range for n={state.n}")
    out = state if inplace else state.copy()
    out.amp[target] = -out.amp[target]
    return out


def diffusion_apply(state: StateVector, scope_m: int, inplace: bool = False) -> StateVector:
    """Reflect about the mean inside every contiguous block of ``2**scope_m`` amplitudes.

    ``scope_m == n`` is the ordinary global diffusion.
    """
    if not 1 <= scope_m <= state.n:
        raise InvalidParameterError(f"diffusion scope must be in [1, {state.n}], got {scope_m}")
    out = state if inplace else state.copy()
    blocks = out.amp.reshape(-1, 2**scope_m)
    blocks -= 2.0 * blocks.mean(axis=1, keepdims=True)
    return out


def grover_step(state: StateVector, target: int, scope_m: int, inplace: bool = False) -> StateVector:
    """One Grover step ``-D O``: oracle, diffusion of the given scope, global sign flip."""
    out = oracle_apply(state, target, inplace=inplace)
    diffusion_apply(out, scope_m, inplace=True)
    np.negative(out.amp, out=out.amp)
    return out


def run_scopes(state: StateVector, target: int, scopes: Iterable[int], inplace: bool = False) -> StateVector:
    out = state if inplace else state.copy()
    for scope in scopes:
        grover_step(out, target, scope, inplace=True)
    return out


def run_sequence(params: SearchParams, seq: OperatorSequence) -> StateVector:
    """Run ``seq`` from the uniform state on the instance ``params``."""
    if (seq.n, seq.m) != (params.n, params.m):
        raise InvalidParameterError(
            f"sequence is for (n={seq.n}, m={seq.m}) but instance is (n={params.n}, m={params.m})"
        )
    state = uniform_state(params.n, params.n_cap)
    return run_scopes(state, params.target_index, seq.scopes(), inplace=True)


@dataclass
class PrefixMeasurement:
    """Outcome distribution of measuring the leading ``prefix_bits`` qubits."""

    state: StateVector
    prefix_bits: int
    probabilities: np.ndarray

    def collapse(self, outcome: int) -> StateVector:
        """Post-measurement state for ``outcome``, renormalised inside its block."""
        if not 0 <= outcome < self.probabilities.size:
            raise InvalidParameterError(f"outcome {outcome} out of range")
        p = self.probabilities[outcome]
        if p <= 0.0:
            raise UndefinedCollapseError(f"outcome {outcome} has zero probability")
        size = 2 ** (self.state.n - self.prefix_bits)
        amp = np.zeros_like(self.state.amp)
        sl = slice(outcome * size, (outcome + 1) * size)
        amp[sl] = self.state.amp[sl] / np.sqrt(p)
        return StateVector(self.state.n, amp)


def measure_prefix(state: StateVector, prefix_bits: int) -> PrefixMeasurement:
    if not 0 < prefix_bits < state.n:
        raise InvalidParameterError(f"prefix_bits must be in (0, {state.n}), got {prefix_bits}")
    probs = (state.amp**2).reshape(2**prefix_bits, -1).sum(axis=1)
    return PrefixMeasurement(state, prefix_bits, probs)


def project_reduced(state: StateVector, params: SearchParams) -> tuple[float, float, float]:
    """Signed coordinates of ``state`` on ``(|t>, |ntt>, |u>)``."""
    n, m = params.n, params.m
    t = params.target_index
    size = 2**m
    lo = params.block * size
    in_block = state.amp[lo:lo + size]
    a_t = state.amp[t]
    a_ntt = (in_block.sum() - a_t) / np.sqrt(size - 1)
    a_u = (state.amp.sum() - in_block.sum()) / np.sqrt(2**n - size)
    return float(a_t), float(a_ntt), float(a_u)


def crosscheck(params: SearchParams, seq: OperatorSequence) -> float:
    """Largest disagreement between the reduced model and the state vector.

    Compares the signed reduced coordinates with the state-vector projections
    and the target-block probability with ``1 - a_u**2``.
    """
    reduced = apply_sequence(seq)
    state = run_sequence(params, seq)
    projected = project_reduced(state, params)
    block_prob = measure_prefix(state, params.n - params.m).probabilities[params.block]
    deviations = [abs(r - p) for r, p in zip(reduced, projected)]
    deviations.append(abs(abs(reduced.a_t) - abs(state.amp[params.target_index])))
    deviations.append(abs(block_prob - (1.0 - reduced.a_u**2)))
    return float(max(deviations))


def dump(state: StateVector, path: Union[str, Path]) -> None:
    """Write an 8-byte header (``GSVD`` magic, little-endian u32 ``n``) and the f64 amplitudes."""
    with open(path, "wb") as fh:
        fh.write(DUMP_MAGIC + struct.pack("<I", state.n))
        fh.write(state.amp.astype("<f8").tobytes())


def load(path: Union[str, Path]) -> StateVector:
    data = Path(path).read_bytes()
    if data[:4] != DUMP_MAGIC:
        raise InvalidParameterError("not a state-vector dump (bad magic)")
    (n,) = struct.unpack("<I", data[4:8])
    amp = np.frombuffer(data[8:], dtype="<f8").astype(np.float64)
    return StateVector(n, amp)
