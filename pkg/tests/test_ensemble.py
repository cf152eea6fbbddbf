import json
import math

import numpy as np
import pytest

from ltstr.charset import EOS, PAD, Charset
from ltstr.ensemble import (
    Expert, Prediction, char_level_ensemble, confidence_score, decisions_to_csv,
    default_labels, read_predictions, sequence_probability, word_level_ensemble,
    write_predictions,
)
from ltstr.errors import InputError, NoConfidentExpert

CS = Charset(("a", "b", "c"))
LABELS = default_labels(CS)  # a b c EOS PAD


def pred(rows, labels=LABELS):
    """rows: list of (label, max_prob); the rest of the mass is spread evenly."""
    P = np.zeros((len(rows), len(labels)))
    for t, (lab, p) in enumerate(rows):
        k = labels.index(lab)
        P[t] = (1 - p) / (len(labels) - 1)
        P[t, k] = p
        assert P[t].argmax() == k
    return Prediction(P, labels)


WIDE = tuple(f"x{i}" for i in range(40)) + (EOS, PAD)


def test_sequence_probability_examples():
    assert sequence_probability(pred([("a", 1.0), (EOS, 1.0)])) == 1.0
    assert sequence_probability(pred([("a", .5), ("b", .5), (EOS, 1)])) == 0.25
    assert sequence_probability(pred([("a", .7), (EOS, .9), ("b", .5)])) == pytest.approx(0.7)
    with pytest.raises(ValueError, match="empty prediction"):
        sequence_probability(pred([(EOS, 1.0)]))


def test_confidence_examples():
    assert confidence_score(pred([("a", 1.0), (EOS, 1.0)])) == 0.0
    two = pred([("x0", math.exp(-1)), ("x1", math.exp(-3))], WIDE)
    assert confidence_score(two) == pytest.approx(-2.0, abs=1e-12)
    p = math.exp(-0.3)
    assert confidence_score(pred([("a", p), (EOS, 1.0), (PAD, 1.0), (PAD, 1.0)])) == pytest.approx(-0.3, abs=1e-12)
    assert confidence_score(pred([(EOS, 1.0)])) == -math.inf


def test_pad_steps_are_skipped():
    p = pred([("a", .5), (PAD, .9), ("b", .5), (EOS, 1.0)])
    assert p.word == "ab" and p.length == 2
    assert sequence_probability(p) == 0.25


def test_zero_max_probability_is_sentinel():
    P = np.zeros((2, len(LABELS)))
    P[1, LABELS.index(EOS)] = 1.0
    # an all-zero row: argmax is 'a' with probability 0
    assert confidence_score(Prediction(P, LABELS)) == -math.inf


def test_word_level_choice_and_ties():
    ca = pred([("a", math.exp(-0.2)), (EOS, 1)])
    cf = pred([("b", math.exp(-0.5)), (EOS, 1)])
    d = word_level_ensemble(ca, cf)
    assert d.chosen is Expert.CONTEXT_AWARE and d.word == "a"
    assert word_level_ensemble(cf, ca).chosen is Expert.CONTEXT_FREE
    tie = word_level_ensemble(pred([("a", .5), (EOS, 1)]), pred([("b", .5), (EOS, 1)]))
    assert tie.chosen is Expert.CONTEXT_AWARE


def test_empty_expert_loses_and_both_empty_raises():
    empty = pred([(EOS, 1.0)])
    some = pred([("c", .3), (EOS, 1)])
    assert word_level_ensemble(empty, some).chosen is Expert.CONTEXT_FREE
    with pytest.raises(NoConfidentExpert):
        word_level_ensemble(empty, empty)


def test_char_level_examples():
    ca = pred([("a", .9), ("b", .4), (EOS, 1)])
    cf = pred([("a", .6), ("c", .8), (EOS, 1)])
    assert char_level_ensemble(ca, cf) == "ac"
    assert char_level_ensemble(ca, ca) == "ab"
    longer = pred([("c", .3), ("c", .3), ("a", .7), (EOS, 1)])
    assert char_level_ensemble(ca, longer) == "aba"


def random_pred(rng, steps, eos_at=None):
    P = rng.dirichlet(np.ones(len(LABELS)) * 0.3, size=steps)
    if eos_at is not None:
        P[eos_at] = 0
        P[eos_at, LABELS.index(EOS)] = 1
    return Prediction(P, LABELS)


def test_monotonicity_of_decision():
    rng = np.random.default_rng(0)
    for _ in range(200):
        ca, cf = random_pred(rng, 4, 3), random_pred(rng, 4, 3)
        if ca.length == 0 or cf.length == 0:
            continue
        d = word_level_ensemble(ca, cf)
        winner = ca if d.chosen is Expert.CONTEXT_AWARE else cf
        # sharpen the winner: its max probabilities go up, argmax unchanged
        P = winner.probs.copy()
        for t in range(len(P)):
            k = P[t].argmax()
            P[t] *= 0.5
            P[t, k] += 0.5
        sharp = Prediction(P, LABELS)
        d2 = word_level_ensemble(sharp, cf) if winner is ca else word_level_ensemble(ca, sharp)
        assert d2.chosen is d.chosen


def test_prediction_file_roundtrip(tmp_path):
    rng = np.random.default_rng(1)
    items = [(f"s{i}", random_pred(rng, 5, 4)) for i in range(10)]
    path = tmp_path / "p.jsonl"
    write_predictions(items, path, top_k=len(LABELS))
    back = read_predictions(path, CS)
    for sid, p in items:
        assert back[sid].word == p.word
        assert np.allclose(back[sid].probs, p.probs, atol=0, rtol=0)
    # top-1 files keep the word and the max probabilities
    write_predictions(items, path, top_k=1)
    back = read_predictions(path, CS)
    for sid, p in items:
        assert back[sid].word == p.word
        if p.length:
            assert confidence_score(back[sid]) == confidence_score(p)


def test_prediction_file_errors(tmp_path):
    path = tmp_path / "p.jsonl"
    good = {"id": "1", "word": "a", "steps": [{"p": [["a", 0.9]]}, {"p": [[EOS, 1.0]]}]}
    cases = {
        "not json\n": "malformed",
        json.dumps({**good, "steps": [{"p": [["z", 1.0]]}]}) + "\n": "not in charset",
        json.dumps({**good, "word": "b"}) + "\n": "disagrees",
        json.dumps(good) + "\n" + json.dumps(good) + "\n": "duplicate id",
        json.dumps({**good, "steps": [{"p": [["a", -1]]}]}) + "\n": "invalid probability",
    }
    for text, msg in cases.items():
        path.write_text(json.dumps({**good, "id": "0"}) + "\n" + text, encoding="utf-8")
        with pytest.raises(InputError, match=msg) as e:
            read_predictions(path, CS)
        assert e.value.lineno in (2, 3)


def test_decision_csv():
    ca = pred([("a", .5), (EOS, 1)])
    rows = [("x", word_level_ensemble(ca, pred([(EOS, 1)])))]
    assert decisions_to_csv(rows) == "id,chosen,score_ca,score_cf,word\nx,context-aware,%r,-inf,a\n" % math.log(.5)
