import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from ltstr.adjust import (
    balanced_softmax_loss, cross_entropy, focal_loss, pc_softmax, read_logits,
    read_prior, read_weights, tau_normalize, uniform_prior, word_nll, write_weights,
)
from ltstr.charset import EOS, PAD
from ltstr.ensemble import Prediction
from ltstr.errors import InputError
from oracles import softmax_ref

LABELS = ("a", "b", EOS, PAD)


def P(rows):
    return Prediction(np.array(rows, dtype=float), LABELS)


def test_word_nll_examples():
    assert word_nll(P([[1, 0, 0, 0], [0, 0, 1, 0]]), "a") == 0.0
    e2 = math.exp(-2)
    assert word_nll(P([[e2, 1 - e2, 0, 0], [0, 0, 1, 0]]), "a") == pytest.approx(1.0, abs=1e-12)
    assert word_nll(P([[0, 1, 0, 0], [0, 0, 1, 0]]), "a") == math.inf
    # no EOS row: average over the characters only
    assert word_nll(P([[e2, 1 - e2, 0, 0]]), "a") == pytest.approx(2.0)
    with pytest.raises(ValueError):
        word_nll(P([[1, 0, 0, 0]]), "ab")


def test_focal_examples():
    assert focal_loss(0.5, 0) == pytest.approx(math.log(2), abs=1e-12)
    assert focal_loss(0.5, 1) == pytest.approx(0.5 * math.log(2), abs=1e-12)
    assert focal_loss(1.0, 3.0) == 0.0
    with pytest.raises(ValueError):
        focal_loss(0.0)


def test_tau_examples():
    assert np.array_equal(tau_normalize([[3.0, 4.0]]), [[0.6, 0.8]])
    assert np.allclose(tau_normalize([[3.0, 4.0]], 2), [[0.12, 0.16]], rtol=0, atol=1e-15)
    w = np.array([[3.0, 4.0], [0.0, 0.0]])
    assert np.array_equal(tau_normalize(w, 0), w)
    with pytest.raises(ValueError, match="class b"):
        tau_normalize(w, 1, ["a", "b"])


def test_pc_softmax_examples():
    z = np.array([0.0, 0.0])
    assert np.allclose(pc_softmax(z, [0.5, 0.5], [0.9, 0.1]), [0.9, 0.1], atol=1e-15)
    with pytest.raises(ValueError):
        pc_softmax(z, [1.0, 0.0])


def test_balanced_softmax_examples():
    assert balanced_softmax_loss([0.0, 0.0], 0, [0.8, 0.2]) == pytest.approx(-math.log(0.8), abs=1e-12)
    with pytest.raises(ValueError):
        balanced_softmax_loss([0.0, 0.0], 0, [1.0, 0.0])


logit_vectors = arrays(np.float64, st.integers(2, 8), elements=st.floats(-20, 20))


@given(logit_vectors, st.data())
def test_pc_softmax_matches_direct_formula(z, data):
    k = len(z)
    raw = np.array(data.draw(st.lists(st.floats(0.01, 1), min_size=k, max_size=k)))
    src = raw / raw.sum()
    got = pc_softmax(z, src)
    ref = softmax_ref([z[i] - math.log(src[i]) + math.log(1 / k) for i in range(k)])
    assert np.allclose(got, ref, rtol=0, atol=1e-12)
    # shift invariance
    assert np.allclose(pc_softmax(z + 3.7, src), got, rtol=0, atol=1e-12)


@given(logit_vectors, st.data())
def test_balanced_softmax_matches_direct_formula(z, data):
    k = len(z)
    raw = np.array(data.draw(st.lists(st.floats(0.01, 1), min_size=k, max_size=k)))
    pi = raw / raw.sum()
    y = data.draw(st.integers(0, k - 1))
    ref = -math.log(softmax_ref([z[i] + math.log(pi[i]) for i in range(k)])[y])
    assert balanced_softmax_loss(z, y, pi) == pytest.approx(ref, abs=1e-9)


@given(arrays(np.float64, (4, 3), elements=st.floats(-5, 5)), st.floats(0.1, 3))
def test_tau_preserves_direction(w, tau):
    if (np.linalg.norm(w, axis=1) < 1e-3).any():
        return
    out = tau_normalize(w, tau)
    cos = (out * w).sum(1) / np.linalg.norm(out, axis=1) / np.linalg.norm(w, axis=1)
    assert np.allclose(cos, 1.0)


def test_uniform_prior_ce_identity():
    z = np.array([1.0, -2.0, 0.5])
    assert balanced_softmax_loss(z, 1, uniform_prior(3)) == pytest.approx(cross_entropy(z, 1), abs=1e-12)


def test_file_readers(tmp_path):
    classes = ["a", "b", EOS]
    lp = tmp_path / "l.jsonl"
    lp.write_text('{"id": "1", "steps": [[0, 1, 2]]}\n{"id": "2", "steps": [[0, 1]]}\n', encoding="utf-8")
    with pytest.raises(InputError) as e:
        read_logits(lp, 3)
    assert e.value.lineno == 2
    pp = tmp_path / "p.tsv"
    pp.write_text("a\t0.5\nb\t0.25\n", encoding="utf-8")
    with pytest.raises(InputError, match="sums to"):
        read_prior(pp, classes)
    pp.write_text("a\t0.5\nb\t0.25\n[EOS]\t0.25\n", encoding="utf-8")
    assert np.allclose(read_prior(pp, classes), [0.5, 0.25, 0.25])
    wp = tmp_path / "w.tsv"
    write_weights(["a", "b"], np.array([[3.0, 4.0], [1.0, 0.1]]), wp)
    names, W = read_weights(wp)
    assert names == ["a", "b"] and W[1, 1] == 0.1
