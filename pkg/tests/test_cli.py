import json
import subprocess
import sys

import numpy as np
import pytest

from ltstr.charset import EOS, Charset, write_charset
from ltstr.cli import main
from ltstr.ensemble import Prediction, default_labels, write_predictions
from ltstr.synth import read_dataset


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def onehot(word, labels, p=1.0):
    P = np.zeros((len(word) + 1, len(labels)))
    for t, c in enumerate(word):
        P[t] = (1 - p) / (len(labels) - 1)
        P[t, labels.index(c)] = p
    P[-1, labels.index(EOS)] = 1.0
    return Prediction(P, labels)


@pytest.fixture
def gt_setup(tmp_path, capsys):
    ds = tmp_path / "gt.tsv"
    assert run(["synth", "--mode", "combined", "--n", 60, "--seed", 3, "--charset-size", 50,
                "--out", ds], capsys)[0] == 0
    rows = read_dataset(ds)
    cs = Charset.from_words([w for _, w, _ in rows])
    write_charset(cs, tmp_path / "cs.txt")
    assert run(["stats", "--gt", ds, "--out", tmp_path / "st"], capsys)[0] == 0
    return tmp_path, rows, cs


def test_synth_is_byte_identical(tmp_path, capsys):
    for mode in ("wiki", "random", "combined"):
        outs = []
        for k in range(2):
            p = tmp_path / f"{mode}{k}.tsv"
            assert run(["synth", "--mode", mode, "--n", 1000, "--seed", 7, "--out", p], capsys)[0] == 0
            outs.append(p.read_bytes())
        assert outs[0] == outs[1] and outs[0].count(b"\n") == 1000
    a = run(["synth", "--mode", "random", "--n", 5, "--seed", 7], capsys)
    b = run(["synth", "--mode", "random", "--n", 5, "--seed", 7], capsys)
    assert a == b and a[0] == 0 and a[1].count("\n") == 5


def test_synth_from_text_corpus(tmp_path, capsys):
    text = tmp_path / "corpus.txt"
    text.write_text("the cat, the dog. the end!\n", encoding="utf-8")
    out = tmp_path / "w.tsv"
    assert run(["synth", "--mode", "wiki", "--n", 30, "--seed", 1, "--corpus", text, "--out", out], capsys)[0] == 0
    words = {w for _, w, _ in read_dataset(out)}
    assert words <= {"the", "cat", "dog", "end"} and "the" in words


def test_stats_outputs(gt_setup):
    tmp, rows, cs = gt_setup
    st = tmp / "st"
    header = (st / "stats.csv").read_text().splitlines()[0]
    assert header == "char,count_per_sample,count_per_occurrence,category"
    summary = json.loads((st / "summary.json").read_text())
    assert summary["total_samples"] == 60
    assert (st / "freq.tsv").read_text().startswith("#mode=per-sample\n#total=60\n")


def test_eval_self_is_perfect(gt_setup, capsys):
    tmp, rows, cs = gt_setup
    labels = default_labels(cs)
    write_predictions([(i, onehot(w, labels)) for i, w, _ in rows], tmp / "p.jsonl")
    code, out, err = run(["eval", "--gt", tmp / "gt.tsv", "--pred", tmp / "p.jsonl",
                          "--freq", tmp / "st" / "freq.tsv", "--charset", tmp / "cs.txt"], capsys)
    assert code == 0, err
    lines = out.splitlines()
    body = [ln.split(",") for ln in lines[1:] if ln.split(",")[0] not in ("FEW", "MEDIUM", "MANY", "MACRO", "WORD_ACC")]
    assert all(r[7] == "1.000000" for r in body)
    footer = dict(ln.split(",")[0::7] for ln in lines[-5:])
    assert footer["WORD_ACC"] == "1.000000" and footer["MACRO"] == "1.000000"


def test_eval_input_errors(gt_setup, capsys):
    tmp, rows, cs = gt_setup
    labels = default_labels(cs)
    p = tmp / "p.jsonl"
    write_predictions([(i, onehot(w, labels)) for i, w, _ in rows], p)
    lines = p.read_text(encoding="utf-8").splitlines()
    base = ["eval", "--gt", tmp / "gt.tsv", "--freq", tmp / "st" / "freq.tsv", "--charset", tmp / "cs.txt"]

    bad = tmp / "bad.jsonl"
    bad.write_text("\n".join(lines[:3] + ["{oops"] + lines[3:]) + "\n", encoding="utf-8")
    code, _, err = run(base + ["--pred", bad], capsys)
    assert code == 1 and "bad.jsonl:4:" in err

    alien = json.loads(lines[0])
    alien["steps"][0]["p"][0][0] = "Ω"
    bad.write_text("\n".join([lines[1], json.dumps(alien)] + lines[2:]) + "\n", encoding="utf-8")
    code, _, err = run(base + ["--pred", bad], capsys)
    assert code == 1 and "bad.jsonl:2:" in err and "charset" in err

    bad.write_text("\n".join(lines[:-1]) + "\n", encoding="utf-8")
    code, _, err = run(base + ["--pred", bad], capsys)
    assert code == 1 and "only in" in err


def test_ensemble_levels_and_orphans(gt_setup, capsys):
    tmp, rows, cs = gt_setup
    labels = default_labels(cs)
    write_predictions([(i, onehot(w, labels, 0.9)) for i, w, _ in rows], tmp / "ca.jsonl")
    write_predictions([(i, onehot(w[::-1], labels, 0.6)) for i, w, _ in rows], tmp / "cf.jsonl")
    code, out, _ = run(["ensemble", "--pred-ca", tmp / "ca.jsonl", "--pred-cf", tmp / "cf.jsonl"], capsys)
    lines = out.splitlines()
    assert code == 0 and lines[0] == "id,chosen,score_ca,score_cf,word"
    assert all(ln.split(",")[1] == "context-aware" for ln in lines[1:])
    code, out, _ = run(["ensemble", "--pred-ca", tmp / "ca.jsonl", "--pred-cf", tmp / "cf.jsonl",
                        "--level", "char"], capsys)
    assert code == 0 and out.splitlines()[1] == f"{rows[0][0]},{rows[0][1]}"

    many = [(f"x{i:02d}", onehot("", labels)) for i in range(15)]
    write_predictions(many, tmp / "extra.jsonl")
    code, _, err = run(["ensemble", "--pred-ca", tmp / "ca.jsonl", "--pred-cf", tmp / "extra.jsonl"], capsys)
    assert code == 1
    listed = err.split(": ", 1)[1].split(", ")
    assert len(listed) == 10


def test_adjust_methods(tmp_path, capsys):
    w = tmp_path / "w.tsv"
    w.write_text("a\t3\t4\nb\t0.5\t0\n", encoding="utf-8")
    code, out, _ = run(["adjust", "--method", "tau-norm", "--weights", w, "--tau", 1], capsys)
    assert code == 0 and out == "a\t0.6\t0.8\nb\t1.0\t0.0\n"
    w.write_text("a\t0\t0\n", encoding="utf-8")
    code, _, err = run(["adjust", "--method", "tau-norm", "--weights", w], capsys)
    assert code == 1 and "class a" in err

    man = tmp_path / "classes.txt"
    man.write_text("a\nb\n[EOS]\n", encoding="utf-8")
    prior = tmp_path / "prior.tsv"
    prior.write_text("a\t0.7\nb\t0.2\n[EOS]\t0.1\n", encoding="utf-8")
    logits = tmp_path / "l.jsonl"
    logits.write_text('{"id": "s", "steps": [[0.0, 0.0, -1.0], [0.0, 0.0, 9.0]]}\n', encoding="utf-8")
    code, out, err = run(["adjust", "--method", "pc-softmax", "--logits", logits, "--charset", man,
                          "--source-prior", prior], capsys)
    assert code == 0, err
    rec = json.loads(out)
    # equal logits: the rarer source class wins once the prior is divided out
    assert rec["word"] == "b" and rec["steps"][0]["p"][0][0] == "b"


def test_adjust_nll(gt_setup, capsys):
    tmp, rows, cs = gt_setup
    labels = default_labels(cs)
    write_predictions([(i, onehot(w, labels)) for i, w, _ in rows], tmp / "p.jsonl", top_k=1)
    code, out, _ = run(["adjust", "--method", "nll", "--pred", tmp / "p.jsonl", "--gt", tmp / "gt.tsv"], capsys)
    assert code == 0
    assert {ln.split(",")[1] for ln in out.splitlines()[1:]} == {"0.0"}


def test_simulate_round_trip_and_determinism(gt_setup, capsys):
    tmp, rows, cs = gt_setup
    big = tmp / "train.tsv"
    assert run(["synth", "--mode", "wiki", "--n", 20000, "--seed", 5, "--charset-size", 120,
                "--out", big], capsys)[0] == 0
    cfg = tmp / "exp.json"
    cfg.write_text(json.dumps({"seeds": [0], "n_test": 200}))
    outs = []
    for k in range(2):
        d = tmp / f"sim{k}"
        code, _, err = run(["simulate", "--config", cfg, "--train-ca", big, "--out", d], capsys)
        assert code == 0, err
        outs.append({p.name: p.read_bytes() for p in d.iterdir()})
    assert outs[0] == outs[1]


def test_missing_file_exit_code(tmp_path, capsys):
    code, _, err = run(["stats", "--gt", tmp_path / "nope.tsv", "--out", tmp_path], capsys)
    assert code == 1 and "nope.tsv" in err


def test_module_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "ltstr", "synth", "--mode", "random", "--n", "3",
                        "--seed", "1", "--charset-size", "20"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.count("\n") == 3
