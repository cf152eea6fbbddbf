# %% [markdown]
# # Classic long-tail corrections on raw numbers
#
# Focal loss, weight-norm rescaling, prior-compensated softmax and the
# balanced softmax loss, applied to small arrays so the effect is visible.

# %%
import numpy as np
from scipy.special import softmax

from ltstr.adjust import (
    balanced_softmax_loss, cross_entropy, focal_loss, pc_softmax, tau_normalize,
)

# %% [markdown]
# A classifier trained on a skewed prior leans toward the head class.

# %%
train_prior = np.array([0.7, 0.2, 0.1])
logits = np.log(train_prior) + np.array([0.0, 0.3, 0.6])
print("plain softmax      ", softmax(logits).round(3))
print("prior compensated  ", pc_softmax(logits, train_prior).round(3))

# %% [markdown]
# Balanced softmax puts the prior into the loss instead: easy head-class
# targets get cheaper, tail-class targets dearer.

# %%
z = np.zeros(3)
for y in range(3):
    print(y, round(cross_entropy(z, y), 4), round(balanced_softmax_loss(z, y, train_prior), 4))

# %%
for p in (0.1, 0.5, 0.9):
    print(p, [round(focal_loss(p, g), 4) for g in (0, 1, 2)])

# %% [markdown]
# Head classes tend to end up with larger weight vectors; dividing by the
# norm evens them out.

# %%
W = np.array([[3.0, 4.0], [0.3, 0.4], [1.0, 0.0]])
for tau in (0.0, 0.5, 1.0):
    print(tau, np.linalg.norm(tau_normalize(W, tau), axis=1).round(3))
