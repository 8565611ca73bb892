# %% [markdown]
# # Area under the learning curve
#
# An agent's progress on one dataset is a step function: at each recorded
# wallclock the score of its current incumbent. Before the first step the
# score is 0. The ALC integrates that function over normalized time, so an
# agent that gets a good score early is rewarded for it.

# %%
from lcarena import AgentCurve, AlcConfig, aggregate, alc

curve = AgentCurve(((0, 0.2), (25, 0.6), (75, 0.8)), horizon=100)
print("linear ALC:", alc(curve))

# %% [markdown]
# Log normalization, `log(1 + t/t0) / log(1 + T/t0)`, stretches the start of
# the budget. The same curve scores lower because its first 25 time units,
# spent at 0.2, now cover far more of the axis.

# %%
for t0 in (0.1, 1.0, 10.0, 100.0):
    print(f"t0={t0:>6}: {alc(curve, AlcConfig('log', t0)):.4f}")

# %% [markdown]
# Reaching the same final score sooner is worth more:

# %%
early = AgentCurve(((5, 0.8),), 100)
late = AgentCurve(((60, 0.8),), 100)
print("early:", alc(early), " late:", alc(late))

# %% [markdown]
# ## Scoring a field of agents
#
# Per-dataset ALCs form an agents x datasets matrix. Agents are ranked by
# their mean over datasets; the population standard deviation comes along
# as a spread indicator.

# %%
report = aggregate([[0.5, 0.5, 0.5], [0.4, 0.7, 0.6], [0.2, 0.9, 0.1]],
                   agents=["steady", "climber", "erratic"],
                   datasets=["d0", "d1", "d2"])
for row in report.ranking:
    j = report.agents.index(row)
    print(f"{row:<8} mu={report.mu[j]:.3f} sigma={report.sigma[j]:.3f}")
