# %% [markdown]
# # Comparing agents with meta-cross-validation
#
# Datasets are split into k folds. Each agent is meta-trained on k-1 folds
# and plays episodes on the held-out one; every held-out dataset is played
# several times and the worst run counts.

# %%
from lcarena.harness import AgentSpec, ExperimentConfig, leaderboard_csv, run_experiment
from lcarena.synthgen import SynthConfig, generate

md = generate(SynthConfig(n_datasets=18, n_algorithms=10, round="R2", seed=3))
agents = [
    AgentSpec("rs", "random_search"),
    AgentSpec("ar", "average_rank"),
    AgentSpec("bos", "best_on_samples"),
    AgentSpec("ft", "freeze_thaw"),
    AgentSpec("sched", "ranked_scheduler"),
    AgentSpec("ddqn", "ddqn", {"epochs": 20}),
]
result = run_experiment(ExperimentConfig(agents=agents, split={"kind": "kfold", "k": 6}), md)
print(leaderboard_csv(result.report))

# %% [markdown]
# Informed agents use what the meta-training datasets say about which
# algorithms tend to do well; random search does not, and the gap shows.

# %%
rep = result.report
rs = rep.mu[rep.agents.index("rs")]
for a in rep.ranking:
    print(f"{a:<6} {rep.mu[rep.agents.index(a)] - rs:+.3f} vs random search")

# %% [markdown]
# ## Development vs. final scoring
#
# Scoring on validation curves mirrors a development phase; test curves are
# what a final leaderboard would use.

# %%
valid = run_experiment(ExperimentConfig(agents=agents[:3], eval_on="valid"), md).report
for a in valid.agents:
    print(f"{a:<4} valid={valid.mu[valid.agents.index(a)]:.3f} "
          f"test={rep.mu[rep.agents.index(a)]:.3f}")
