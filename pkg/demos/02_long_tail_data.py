# %% [markdown]
# # Word-sampled vs character-sampled training data
#
# Sampling real words by frequency gives a long tail of rare characters.
# Sampling characters uniformly flattens it but throws away word context.
# This builds both from a toy Zipfian language and compares their
# character distributions.

# %%
import numpy as np

from ltstr.charset import CharCategory
from ltstr.synth import (
    LengthModel, distribution_stats, sample_combined, sample_random, sample_wiki,
    synthetic_charset, zipf_corpus,
)

cs = synthetic_charset(200)
corpus = zipf_corpus(cs, seed=0, exponent=1.0)
print(len(corpus), "distinct words; top five:", corpus.words[:5])

# %%
n = 50000
ws = sample_wiki(corpus, n, seed=1)
rs = sample_random(cs, n, LengthModel.from_corpus(corpus), seed=2)
cmb = [w for w, _ in sample_combined(corpus, cs, n, seed=3)]

for name, words in [("wiki", ws), ("random", rs), ("combined", cmb)]:
    st = distribution_stats(words, cs)
    props = {k.value: round(v, 3) for k, v in st.category_proportions.items()}
    counts = np.array([n for _, _, n in st.curve()])
    print(f"{name:9} categories {props}  max/min count {counts.max()}/{counts.min()}")

# %% [markdown]
# The rank curve is what one would plot on a log axis: steep for wiki,
# almost flat for random.

# %%
st = distribution_stats(ws, cs)
for rank, ch, count in st.curve()[::25]:
    print(rank, ch, count, st.categories[ch].value)

# %%
few = sum(v is CharCategory.FEW for v in st.categories.values())
print(f"{few} of {len(cs)} characters have fewer than 100 training words in the wiki set")
