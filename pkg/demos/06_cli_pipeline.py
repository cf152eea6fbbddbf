# %% [markdown]
# # The command line end to end
#
# Synthesize data, look at its statistics, decode it with both simulated
# experts, then evaluate and ensemble through `ltstr`. Every step writes
# plain files, so the same pipeline works on predictions from a real model.

# %%
import tempfile
from pathlib import Path

from ltstr.charset import build_frequency_table, write_charset, write_frequency_table
from ltstr.cli import main
from ltstr.ensemble import write_predictions
from ltstr.experiment import ExperimentConfig
from ltstr.recognizer import GlyphModel, decode_batch, fit_expert, render
from ltstr.synth import LengthModel, read_dataset, sample_random, sample_wiki, synthetic_charset, zipf_corpus

work = Path(tempfile.mkdtemp(prefix="ltstr-demo-"))
print(work)

# %%
main(["synth", "--mode", "combined", "--n", "1000", "--seed", "7", "--out", str(work / "test.tsv")])
main(["stats", "--gt", str(work / "test.tsv"), "--out", str(work / "stats")])
print((work / "stats" / "summary.json").read_text())

# %% [markdown]
# Train the two experts in-process and dump their predictions as JSONL.

# %%
cfg = ExperimentConfig()
cs = synthetic_charset(cfg.charset_size)
corpus = zipf_corpus(cs, seed=7)
glyphs = GlyphModel.random(cs, cfg.dim, cfg.sigma, seed=1)
train_ws = sample_wiki(corpus, cfg.n_train, 1)
train_rs = sample_random(cs, cfg.n_train, LengthModel.from_corpus(corpus), 2)
ca = fit_expert("context-aware", train_ws, glyphs, cfg.smoothing_k)
cf = fit_expert("context-free", train_rs, glyphs)

rows = read_dataset(work / "test.tsv")
obs = [render(w, glyphs, i) for i, (_, w, _) in enumerate(rows)]
ids = [sid for sid, _, _ in rows]
write_predictions(zip(ids, decode_batch(ca, obs)), work / "ca.jsonl")
write_predictions(zip(ids, decode_batch(cf, obs)), work / "cf.jsonl")
write_frequency_table(build_frequency_table(train_ws, cs), work / "train_freq.tsv")
write_charset(cs, work / "charset.txt")

# %%
for name in ("ca", "cf"):
    main(["eval", "--gt", str(work / "test.tsv"), "--pred", str(work / f"{name}.jsonl"),
          "--freq", str(work / "train_freq.tsv"), "--charset", str(work / "charset.txt"),
          "--out", str(work / f"report_{name}.csv")])
    print(name, (work / f"report_{name}.csv").read_text().splitlines()[-5:])

# %%
main(["ensemble", "--pred-ca", str(work / "ca.jsonl"), "--pred-cf", str(work / "cf.jsonl"),
      "--out", str(work / "decisions.csv")])
lines = (work / "decisions.csv").read_text().splitlines()
print(lines[:4])
print("context-aware chosen for", sum(",context-aware," in ln for ln in lines), "of", len(lines) - 1)
