# %% [markdown]
# # One episode, step by step
#
# A synthetic Round 2 meta-dataset holds, for every dataset and algorithm,
# train/valid/test scores at training fractions p = 0.1 ... 1.0 together
# with the time each fit costs. An agent spends the dataset's budget T on
# queries `(algorithm, p)` and only ever sees the validation side.

# %%
import numpy as np

from lcarena.agents import BestOnSamples
from lcarena.curves import alc
from lcarena.envs import ActionR2, agent_curve, make_env
from lcarena.synthgen import SynthConfig, generate

md = generate(SynthConfig(n_datasets=4, n_algorithms=5, round="R2", seed=0))
name = md.dataset_ids[0]
print(md.dataset(name))

# %% [markdown]
# Each algorithm's cost grows with p; final test scores differ a lot
# between algorithms.

# %%
for j in range(md.n_algorithms):
    c = md.r2(name, j)
    print(f"algo {j}: cost@0.1={c.cost[0]:5.2f} cost@1.0={c.cost[-1]:5.2f} "
          f"test@1.0={c.test[-1]:.3f}")

# %% [markdown]
# ## Driving the environment by hand
#
# Query every algorithm on 10% of the data, then spend the rest on the one
# that looked best.

# %%
env = make_env(md, name)
obs = env.reset()
probes = {}
for j in range(md.n_algorithms):
    obs = env.step(ActionR2(j, 0.1))
    probes[j] = obs.r_valid
best = max(probes, key=probes.get)
print("probe scores:", {j: round(v, 3) for j, v in probes.items()}, "-> exploit", best)

p_next = 0.2
while not obs.done:
    obs = env.step(ActionR2(best, round(min(p_next, 1.0), 1)))
    p_next += 0.1
    print(f"p={obs.p:.1f} valid={obs.r_valid} remaining={obs.remaining_budget:6.2f}")

# %% [markdown]
# The agent curve reads the *test* score of the best-validation query so far.

# %%
curve = agent_curve(env.transcript, md)
print(np.round(curve.steps, 3))
print("ALC:", alc(curve))

# %% [markdown]
# The packaged Best-on-Samples agent follows the same idea, and should
# land close to the hand-written policy.

# %%
from lcarena.harness import run_episode

tr = run_episode(md, name, BestOnSamples())
print("BestOnSamples ALC:", alc(tr.agent_curve))
