"""Ranking models the classical test cannot tell apart.

Three normal models with very different spreads are compared against the
same Student-t data mean. The classical hypothesis test assumes the model
equals the data before testing, so it scores every candidate identically.
The two-sided power product uses each model's own distribution: it demands
that the model statistic lands in the data's confidence region AND the
data statistic lands in the model's, so over- and under-confident models
both lose mass.

Run with: python demos/03_power_ranking.py
"""

from bvm import Normal, StudentT
from bvm.metrics import classical_hypothesis, statistical_power_bvm

data = StudentT(location=0.0, dof=10.0, scale=1.75)
models = {"narrow N(0, 0.5)": 0.5, "matched N(0, 2.0)": 2.0, "wide N(0, 8.0)": 8.0}

print("data mean statistic: t-distributed, location 0, dof 10, scale 1.75")
print()
print(f"{'model':<20} {'classical':>10} {'in-data':>9} {'in-model':>9} {'product':>9}")
for name, std in models.items():
    classical = classical_hypothesis(data, alpha=0.05).estimate.p_hat
    res = statistical_power_bvm(Normal(0.0, std), data, alpha=0.05, alpha_hat=0.05)
    print(
        f"{name:<20} {classical:>10.4f} {res.power_model_in_data:>9.4f} "
        f"{res.power_data_in_model:>9.4f} {res.estimate.p_hat:>9.4f}"
    )

print()
print("The classical column is flat: the test never looked at the model.")
print("The product column peaks at the matched model: the narrow model's")
print("confidence region misses too much data mass, the wide model's own")
print("statistic spills far outside the data's region.")
print()
print("The same table comes from: bvm reproduce ex-5.1")
