"""How fast block starts forget the past.

For the two-symbol block model the renewal sequence has roots 1 and
``p_1 - 1``, so its distance to ``1/nu`` shrinks like ``(1 - p_1)^n``.  At
``p_1`` equal to the inverse golden ratio the sequence is a scaled Fibonacci
sequence.
"""

from regenclust import decay
from regenclust import montecarlo as mc

for p1 in (0.3, 0.5, 0.7):
    seq = decay.regen_correlation(decay.morse_model(p1), 12)
    k1, k2 = decay.morse_constants(p1)
    gaps = [abs(seq[n] - k1) / (k2 * decay.psi_rate_bound(p1, n)) for n in range(1, 13)]
    print(f"p1 = {p1}: limit {k1:.6f}, |c_n - limit| / envelope = {max(gaps):.3f} at most")

g = decay.GOLDEN
seq = decay.regen_correlation(decay.morse_model(g), 10)
print("\ngolden p1:", " ".join(f"{seq[n]:.6f}" for n in range(11)))
print("phi^n F_n :", " ".join(f"{g**n * decay.fibonacci(n):.6f}" for n in range(11)))

est = mc.estimate_correlation(decay.morse_model(0.5), 8, 100_000, seed=3)
print("\nsimulated c_n, p1 = 0.5:")
for n, e in enumerate(est):
    print(f"  {n}: {e.value:.4f} +- {e.stderr:.4f}   exact {decay.morse_closed_form(0.5, n):.4f}")
