"""Renewal sequence of regenerations and its decay.

``c_n`` is the probability of a block start ``n`` letters after a block start.
It satisfies the renewal equation over the block-length law
``f(k) = sum_a p_a q_a(k)``:

    c_0 = 1,   c_n = sum_k f(k) c_{n-k}

and tends to ``1 / nu``.  For the two-symbol block model (``Morse``) the
characteristic roots are ``1`` and ``p_1 - 1``, giving a closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import oracle
from .model import ModelSpec, block, finite

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class CorrelationSequence:
    values: np.ndarray  # c_0 .. c_{n_max}
    limit: float
    model: ModelSpec

    def __getitem__(self, n):
        return self.values[n]

    def __len__(self):
        return len(self.values)


def length_pmf(model: ModelSpec) -> np.ndarray:
    """``f[k] = P(block length = k)`` for a finite-support model."""
    if not model.finite:
        raise ValueError("renewal sequence needs a finite-support model; truncate first")
    _, lengths, w = model.block_pairs()
    f = np.zeros(int(lengths.max()) + 1)
    np.add.at(f, lengths, w)
    return f


def regen_correlation(model: ModelSpec, n_max: int) -> CorrelationSequence:
    f = length_pmf(model)
    c = np.zeros(n_max + 1)
    c[0] = 1.0
    for n in range(1, n_max + 1):
        k = min(n, len(f) - 1)
        c[n] = f[1:k + 1] @ c[n - 1::-1][:k]
    return CorrelationSequence(c, 1.0 / model.nu, model)


def morse_model(p1: float) -> ModelSpec:
    """Two symbols under the block family: ``1`` written once, ``2`` twice."""
    if not 0.0 < p1 < 1.0:
        raise ValueError("p1 must lie in (0, 1)")
    return block(finite([p1, 1.0 - p1]))


def morse_constants(p1: float) -> tuple[float, float]:
    """``(K_1, K_2)`` with ``c_n = K_1 + K_2 (p_1 - 1)**n``."""
    return 1.0 / (2.0 - p1), (1.0 - p1) / (2.0 - p1)


def morse_closed_form(p1: float, n: int) -> float:
    if not 0.0 < p1 < 1.0:
        raise ValueError("p1 must lie in (0, 1)")
    k1, k2 = morse_constants(p1)
    return k1 + k2 * (p1 - 1.0) ** n


def psi_rate_bound(p1: float, n: int) -> float:
    """Envelope ``(1 - p_1)**n``; ``|c_n / K_1 - 1| <= (K_2 / K_1) * envelope``.

    A bound certificate for the two-symbol model, not a computed mixing
    coefficient.
    """
    if not 0.0 < p1 < 1.0:
        raise ValueError("p1 must lie in (0, 1)")
    return (1.0 - p1) ** n


def fibonacci(n: int) -> int:
    """``F_0 = F_1 = 1``."""
    a, b = 1, 1
    for _ in range(n):
        a, b = b, a + b
    return a


def block_witness(model: ModelSpec, a: int) -> oracle.ProbabilityBounds:
    """``P(X_{a-1} = a | R_0, X_0 = a)``: equals 1 under the block family.

    The conditional law of ``X_{a-1}`` stays degenerate however large ``a``
    is, so no uniform ratio-mixing rate is possible on an infinite alphabet.
    """
    given = oracle.WindowEvent.of({0: oracle.eq(a)}, regenerations={0: True})
    event = oracle.WindowEvent.of({a - 1: oracle.eq(a)})
    return oracle.exact_conditional_probability(model, event, given)


def smith_witness(model: ModelSpec, a: int, n: int) -> oracle.ProbabilityBounds:
    """``P(X_{n+1} = a | X_{-1} != a, X_0 = a)``; at least ``1/a`` when ``a > n``.

    The conditioning forces a fresh ``a``-block at time 0, which has length
    ``a + 1`` with probability ``1/a``.
    """
    given = oracle.WindowEvent.of({-1: oracle.ne(a), 0: oracle.eq(a)})
    event = oracle.WindowEvent.of({n + 1: oracle.eq(a)})
    return oracle.exact_conditional_probability(model, event, given)
