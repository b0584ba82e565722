"""Closed-form Grover quantities and the exact three-dimensional reduced model.

The reduced model tracks a single-target search in the orthonormal basis
``(|t>, |ntt>, |u>)``: the target, the uniform superposition of the other
items in the target's block, and the uniform superposition of all items
outside that block.  Global and local Grover steps both leave this span
invariant, so a 3-vector of real amplitudes is an exact description.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .errors import CapacityError, InvalidParameterError
from .sequence import GLOBAL, OperatorSequence

DEFAULT_N_CAP = 24


@dataclass(frozen=True)
class SearchParams:
    """Problem instance: ``n`` database qubits, local scope ``m``, target bits.

    ``target`` is a string of ``n`` characters from ``{"0", "1"}``; its first
    ``n - m`` bits select the target block.
    """

    n: int
    m: int
    target: str
    n_cap: int = field(default=DEFAULT_N_CAP, compare=False, repr=False)

    def __post_init__(self):
        if self.n < 1:
            raise InvalidParameterError(f"n must be >= 1, got {self.n}")
        if self.n > self.n_cap:
            raise CapacityError(f"n={self.n} exceeds the cap of {self.n_cap} qubits")
        if not 1 <= self.m <= self.n:
            raise InvalidParameterError(f"need 1 <= m <= n, got n={self.n}, m={self.m}")
        if len(self.target) != self.n or set(self.target) - {"0", "1"}:
            raise InvalidParameterError(f"target must be {self.n} bits, got {self.target!r}")

    @classmethod
    def from_index(cls, n: int, m: int, target: int, n_cap: int = DEFAULT_N_CAP) -> "SearchParams":
        if not 0 <= target < 2**n:
            raise InvalidParameterError(f"target {target} out of range for n={n}")
        return cls(n, m, format(target, f"0{n}b"), n_cap)

    @property
    def target_index(self) -> int:
        return int(self.target, 2)

    @property
    def block(self) -> int:
        """Index of the target block (the leading ``n - m`` bits)."""
        return self.target_index >> self.m


class ReducedState(NamedTuple):
    a_t: float
    a_ntt: float
    a_u: float

    def as_array(self) -> np.ndarray:
        return np.array(self, dtype=float)

    @property
    def norm(self) -> float:
        return math.sqrt(self.a_t**2 + self.a_ntt**2 + self.a_u**2)


def _check_qubits(k: int) -> None:
    if k < 1:
        raise InvalidParameterError(f"qubit count must be >= 1, got {k}")


def _sin2(k: int) -> float:
    # exact power of two
    return math.ldexp(1.0, -k)


def _sin_cos(k: int) -> tuple[float, float]:
    s2 = _sin2(k)
    return math.sqrt(s2), math.sqrt(1.0 - s2)


def angle(k: int) -> float:
    """Return ``arcsin(2**(-k/2))``, the Grover angle for ``k`` qubits."""
    _check_qubits(k)
    return math.asin(math.sqrt(_sin2(k)))


def k_opt(n: int) -> int:
    """Optimal Grover iteration count: nearest integer to ``pi/(4 theta_n) - 1/2``."""
    y = math.pi / (4.0 * angle(n)) - 0.5
    return math.floor(y + 0.5)


def grover_success(n: int, k: int) -> float:
    """Success probability ``sin^2((2k+1) theta_n)`` after ``k`` Grover steps."""
    if k < 0:
        raise InvalidParameterError(f"iteration count must be >= 0, got {k}")
    return math.sin((2 * k + 1) * angle(n)) ** 2


def _check_reduced(n: int, m: int) -> None:
    _check_qubits(n)
    if not 1 <= m < n:
        raise InvalidParameterError(
            f"the reduced model needs 1 <= m < n, got n={n}, m={m}; use the "
            "closed forms for m == n"
        )


def reduced_global(n: int, m: int) -> np.ndarray:
    """3x3 matrix of the global Grover step in the ``(t, ntt, u)`` basis.

    Orthogonal with determinant -1 (a rotation composed with a reflection).
    """
    _check_reduced(n, m)
    sa, ca = _sin_cos(n - m)
    sb, cb = _sin_cos(m)
    mat = np.array(
        [
            [1 - 2 * sa * sa * sb * sb, 2 * sa * sa * sb * cb, 2 * sa * ca * sb],
            [-2 * sa * sa * sb * cb, 2 * sa * sa * cb * cb - 1, 2 * sa * ca * cb],
            [-2 * sa * ca * sb, 2 * sa * ca * cb, 2 * ca * ca - 1],
        ]
    )
    mat.flags.writeable = False
    return mat


def reduced_local(m: int) -> np.ndarray:
    """Rotation by ``2 theta_m`` about the ``|u>`` axis."""
    _check_qubits(m)
    two_theta = 2.0 * angle(m)
    c, s = math.cos(two_theta), math.sin(two_theta)
    mat = np.array([[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]])
    mat.flags.writeable = False
    return mat


def initial_reduced_state(n: int, m: int) -> ReducedState:
    _check_reduced(n, m)
    sa, ca = _sin_cos(n - m)
    sb, cb = _sin_cos(m)
    return ReducedState(sa * sb, sa * cb, ca)


def trajectory(seq: OperatorSequence, state: Optional[ReducedState] = None) -> list[ReducedState]:
    """States before the first step and after every step (length ``k_tot + 1``)."""
    _check_reduced(seq.n, seq.m)
    if state is None:
        state = initial_reduced_state(seq.n, seq.m)
    g = reduced_global(seq.n, seq.m)
    loc = reduced_local(seq.m)
    vec = state.as_array()
    out = [ReducedState(*map(float, vec))]
    for step in seq.steps:
        vec = (g if step == GLOBAL else loc) @ vec
        out.append(ReducedState(*map(float, vec)))
    return out


def apply_sequence(seq: OperatorSequence, state: Optional[ReducedState] = None) -> ReducedState:
    """Apply ``seq`` first-to-last; defaults to the uniform initial state."""
    return trajectory(seq, state)[-1]


def success_full(seq: OperatorSequence) -> float:
    """Probability of measuring the target after ``seq``."""
    return apply_sequence(seq).a_t ** 2


def success_partial(seq: OperatorSequence) -> float:
    """Probability that a prefix measurement after ``seq`` yields the target block."""
    return 1.0 - apply_sequence(seq).a_u ** 2
