"""A first tour: what "probability of agreement" means and how to compute it.

A validation question has four ingredients: the model's comparison value
(with its uncertainty), the data's comparison value (with its uncertainty),
a comparison function, and an explicit rule that says when the comparison
counts as agreement. This script walks through increasingly rich versions
of that question on scalar values.

Run with: python demos/01_agreement_basics.py
"""

from bvm import (
    DiracDelta,
    Normal,
    Scenario,
    SoftExponential,
    Threshold,
    comparison_density,
    bvm_from_density,
    estimate_bvm_mc,
)

# ---------------------------------------------------------------------------
# 1. Two certain values either agree or they do not.

rule = Threshold("abs_diff", eps=0.5)
certain = Scenario(DiracDelta(2.0), DiracDelta(2.2), rule)
est = estimate_bvm_mc(certain, k=100, seed=0)
print("certain values 2.0 vs 2.2, tolerance 0.5      ->", est.p_hat)

tight = Scenario(DiracDelta(2.0), DiracDelta(2.2), Threshold("abs_diff", 0.1))
print("same values, tolerance 0.1                    ->", estimate_bvm_mc(tight, 100, 0).p_hat)

# ---------------------------------------------------------------------------
# 2. Give the data measurement noise and the answer becomes a probability.

noisy = Scenario(DiracDelta(2.0), Normal(2.2, 0.3), rule)
est = estimate_bvm_mc(noisy, k=100_000, seed=1)
print(f"noisy data N(2.2, 0.3^2), tolerance 0.5       -> {est.p_hat:.4f} +/- {est.std_error:.4f}")

# ---------------------------------------------------------------------------
# 3. The same estimate through the comparison-value density: propagate the
#    uncertainty into f = |model - data| once, then apply any rule to it.

scenario = Scenario(Normal(2.0, 0.2), Normal(2.2, 0.3), Threshold("abs_diff", 0.5))
density = comparison_density(scenario, "abs_diff", k=100_000, bins=64, seed=2)
p_direct = estimate_bvm_mc(scenario, k=100_000, seed=2).p_hat
p_via_density = bvm_from_density(density, Threshold("identity", 0.5))
print(f"direct estimate {p_direct:.4f} vs accumulated from the f-density {p_via_density:.4f}")

# ---------------------------------------------------------------------------
# 4. Soft acceptance: let the tolerance itself be uncertain. Acceptance is
#    total up to eps' and decays exponentially beyond it, which smooths the
#    cliff edge of a hard threshold.

for lam in (20.0, 5.0, 1.0):
    soft = Scenario(Normal(2.0, 0.2), Normal(2.2, 0.3), SoftExponential("abs_diff", 0.5, lam))
    p = estimate_bvm_mc(soft, k=100_000, seed=3).p_hat
    print(f"soft tolerance, decay rate {lam:5.1f}             -> {p:.4f}")

print()
print("The stricter the rule, the lower the probability of agreement; the")
print("rule is always reported next to the number it produced.")
