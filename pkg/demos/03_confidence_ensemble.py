# %% [markdown]
# # Picking between two recognizers by confidence
#
# Each expert gives one probability row per decoding step. The confidence of
# a word is the mean log of the per-step maximum, so short and long words
# are compared on the same footing.

# %%
import math

import numpy as np

from ltstr.charset import EOS, Charset
from ltstr.ensemble import (
    Prediction, char_level_ensemble, confidence_score, default_labels,
    sequence_probability, word_level_ensemble,
)

labels = default_labels(Charset(tuple("abcdef")))


def make(word, probs):
    """Peaked rows for ``word`` followed by a sure EOS."""
    P = np.zeros((len(word) + 1, len(labels)))
    for t, (c, p) in enumerate(zip(word, probs)):
        P[t] = (1 - p) / (len(labels) - 1)
        P[t, labels.index(c)] = p
    P[-1, labels.index(EOS)] = 1.0
    return Prediction(P, labels)


# %%
ca = make("cafe", [0.95, 0.9, 0.3, 0.9])
cf = make("cafd", [0.7, 0.7, 0.7, 0.6])
for name, p in [("context-aware", ca), ("context-free", cf)]:
    print(f"{name:14} {p.word}  p(word)={sequence_probability(p):.4f}  score={confidence_score(p):.4f}")

d = word_level_ensemble(ca, cf)
print("word-level pick:", d.chosen.value, d.word)
print("char-level pick:", char_level_ensemble(ca, cf))

# %% [markdown]
# Without the length normalisation a long, confident word would lose to a
# short shaky one. Repeating the same steps leaves the score unchanged while
# the raw probability shrinks geometrically.

# %%
body = ca.probs[:-1]
for k in (1, 2, 4):
    rep = Prediction(np.vstack([np.tile(body, (k, 1)), ca.probs[-1:]]), labels)
    print(k, f"{sequence_probability(rep):.2e}", f"{confidence_score(rep):.6f}")

# %% [markdown]
# When the experts disagree on length the character-level mix can stitch
# together a word neither of them produced.

# %%
ca2 = make("abc", [0.9, 0.5, 0.9])
cf2 = make("abdf", [0.6, 0.8, 0.4, 0.7])
print(word_level_ensemble(ca2, cf2).word, char_level_ensemble(ca2, cf2), math.exp(confidence_score(ca2)))
