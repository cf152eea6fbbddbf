# %% [markdown]
# # Two experts, one simulated recognizer
#
# A context-aware expert (glyph evidence times a character bigram model fit
# on word-sampled data) against a context-free one (glyph evidence only,
# fit on uniformly sampled characters). The context-aware one wins on
# common words and loses on words with rare characters; picking per word by
# confidence gets the best of both.

# %%
from ltstr.experiment import COMBINED, SYSTEMS, TEST_SETS, ExperimentConfig, run_experiment

cfg = ExperimentConfig(seeds=[0, 1])
report = run_experiment(cfg)

# %%
print(f"{'test set':10}" + "".join(f"{s:>15}" for s in SYSTEMS))
for ts in TEST_SETS + (COMBINED,):
    print(f"{ts:10}" + "".join(f"{report.mean_accuracy(ts, s):15.3f}" for s in SYSTEMS))

# %% [markdown]
# Character F1 on the hard set, split by training frequency.

# %%
for s in ("context-aware", "context-free", "ensemble-word"):
    print(f"{s:14}", {c: round(report.mean_f1('hard', s, c), 3) for c in ("few", "medium", "many")})

# %% [markdown]
# How often the ensemble trusts the context-aware expert goes up with the
# share of frequent characters in the test set.

# %%
for ts in TEST_SETS:
    sel = sum(r.selection[ts] for r in report.seeds) / len(report.seeds)
    many = sum(r.many_proportion[ts] for r in report.seeds) / len(report.seeds)
    print(f"{ts:7} context-aware chosen {sel:.2f}  frequent-character share {many:.2f}")

# %%
for e in ("context-aware", "context-free"):
    print(e, {c: round(report.mean_gt_prob(e, c), 3) for c in ("few", "medium", "many")})
