"""Command-line interface: golden rows, exit codes, corpus files, determinism."""

import subprocess
import sys

import pytest

from masterfield.cli import main


GOLDEN_EVAL = "loop,k,value,method\nNESW,1,0.606530659712633,exact\n"


def run(capsys, argv):
    rc = main(argv)
    captured = capsys.readouterr()
    return rc, captured.out, captured.err


def test_eval_golden_row(capsys):
    rc, out, err = run(capsys, ["eval", "--loop", "NESW", "--k", "1", "--field", "free"])
    assert rc == 0
    assert out == GOLDEN_EVAL
    assert err == ""


def test_eval_constant(capsys):
    rc, out, _ = run(capsys, ["eval", "--constant", "--k", "3"])
    assert rc == 0
    assert out.splitlines()[1] == ",3,1,exact"


def test_eval_empty_loop_is_an_error(capsys):
    rc, out, err = run(capsys, ["eval", "--loop", "", "--k", "1"])
    assert rc == 2
    assert out == ""
    assert err.strip() == (
        "not a loop: empty word allowed only as explicit constant `eval --constant`"
    )


def test_eval_rejects_malformed_words(capsys):
    rc, _, err = run(capsys, ["eval", "--loop", "NEXW"])
    assert rc == 2 and "invalid step" in err
    rc, _, err = run(capsys, ["eval", "--loop", "NE"])
    assert rc == 2 and "not closed" in err
    rc, _, err = run(capsys, ["eval", "--loop", "NESW", "--k", "-2"])
    assert rc == 2 and "power" in err


def test_eval_product_selection(capsys):
    rc, out, _ = run(capsys, ["eval", "--loop", "NESENWSW", "--k", "2", "--field", "boolean"])
    assert rc == 0
    assert out.splitlines()[1] == "NESENWSW,2,0.135335283236613,exact"
    rc, out, _ = run(capsys, ["eval", "--loop", "NESENWSW", "--k", "2", "--field", "tensor"])
    assert out.splitlines()[1] == "NESENWSW,2,0,exact"


def test_eval_t_scale(capsys):
    rc, out, _ = run(capsys, ["eval", "--loop", "NESW", "--k", "1", "--t-scale", "2.0"])
    assert rc == 0
    # area 1 at t_scale 2 is the time-2 state: e^{-1}
    assert out.splitlines()[1] == "NESW,1,0.367879441171442,exact"


def test_moments_table(capsys):
    rc, out, _ = run(capsys, ["moments", "--t", "1", "--kmax", "3"])
    assert rc == 0
    assert out.splitlines() == [
        "k,m_k",
        "1,0.606530659712633",
        "2,0",
        "3,-0.111565080074215",
    ]
    rc, _, err = run(capsys, ["moments", "--t", "1", "--kmax", "25"])
    assert rc == 2 and err
    rc, _, err = run(capsys, ["moments", "--t", "-1", "--kmax", "3"])
    assert rc == 2 and err


def test_check_divisibility_pass(capsys):
    rc, out, err = run(capsys, ["check", "divisibility"])
    assert rc == 0 and err == ""
    lines = out.splitlines()
    assert lines[0] == "check,case,deviation"
    assert len(lines) == 1 + 25
    for line in lines[1:]:
        assert float(line.rsplit(",", 1)[1]) <= 1e-10


def test_check_area_with_corpus_file(tmp_path, capsys):
    corpus = tmp_path / "pairs.txt"
    corpus.write_text("# comparable rectangles\nNEESWW  # 2x1\nNNESSW\n")
    rc, out, _ = run(capsys, ["check", "area", "--corpus", str(corpus)])
    assert rc == 0
    assert len(out.splitlines()) == 1 + 4

    corpus.write_text("NESW\nNEESWW\nNNESSW\n")
    rc, _, err = run(capsys, ["check", "area", "--corpus", str(corpus)])
    assert rc == 2 and "even number" in err

    corpus.write_text("NESW\nNEESWW\n")
    rc, _, err = run(capsys, ["check", "area", "--corpus", str(corpus)])
    assert rc == 2 and "not comparable" in err


def test_check_gauge_rejects_corpus_file(tmp_path, capsys):
    corpus = tmp_path / "loops.txt"
    corpus.write_text("NESW\n")
    rc, _, err = run(capsys, ["check", "gauge", "--corpus", str(corpus)])
    assert rc == 2 and "does not read loops" in err
    rc, out, _ = run(capsys, ["check", "gauge", "--corpus", "default"])
    assert rc == 0 and len(out.splitlines()) == 1 + 30


def test_check_braid_with_corpus_file(tmp_path, capsys):
    corpus = tmp_path / "loops.txt"
    corpus.write_text("NESW\n\n# a two-face word\nNESENWSW\n")
    rc, out, err = run(capsys, ["check", "braid", "--corpus", str(corpus)])
    assert rc == 0 and err == ""
    lines = out.splitlines()
    # one-face loop: identity only; two-face loop: braid words of length <= 4
    assert len(lines) == 1 + 1 + 31
    assert lines[1].startswith("braid,")


def test_mc_schema_and_worker_independence(tmp_path):
    corpus = tmp_path / "loops.txt"
    corpus.write_text("NESW\nNESENWSW\n")
    base = ["mc", "--loops", str(corpus), "--N", "8", "--samples", "16",
            "--seed", "3", "--steps", "50"]
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    assert main(base + ["--out", str(a)]) == 0
    assert main(base + ["--workers", "4", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    lines = a.read_text().splitlines()
    assert lines[0] == "word,mean_re,mean_im,stderr"
    assert len(lines) == 3
    word, re_, im, se = lines[1].split(",")
    assert word == "NESW"
    assert abs(float(re_) - 0.6065) < 0.2
    assert abs(float(im)) < 0.2
    assert float(se) > 0


def test_mc_missing_corpus_file(capsys):
    rc, _, err = run(capsys, ["mc", "--loops", "/nonexistent/loops.txt"])
    assert rc == 2 and err


def test_mc_rejects_bad_sampler_config(capsys):
    rc, _, err = run(capsys, ["mc", "--loops", "default", "--steps", "10"])
    assert rc == 2 and "step_count too small" in err


def test_compare_mc_small_pass(tmp_path, capsys):
    corpus = tmp_path / "one.txt"
    corpus.write_text("NESW\n")
    rc, out, err = run(
        capsys,
        ["compare-mc", "--corpus", str(corpus), "--N", "8", "--samples", "60",
         "--seed", "7", "--steps", "50", "--kmax", "2"],
    )
    assert rc == 0 and err == ""
    lines = out.splitlines()
    assert lines[0] == "loop,k,exact,mc_re,mc_im,stderr,ok"
    assert len(lines) == 3
    assert all(line.endswith(",1") for line in lines[1:])


def test_compare_mc_detects_finite_size_bias(tmp_path, capsys):
    # At N=2 the k=2 moment carries a 1/N^2 correction around +0.03; with
    # 6400 samples the stderr band is far tighter than that, so the run
    # must fail and say where.
    corpus = tmp_path / "one.txt"
    corpus.write_text("NESW\n")
    rc, out, err = run(
        capsys,
        ["compare-mc", "--corpus", str(corpus), "--N", "2", "--samples", "6400",
         "--seed", "7", "--steps", "50", "--kmax", "2"],
    )
    assert rc == 1
    assert "compare-mc: FAIL at NESW k=2" in err
    assert len(err.splitlines()) == 1
    assert out.splitlines()[2].endswith(",0")


def test_entry_point_subprocess():
    proc = subprocess.run(
        [sys.executable, "-m", "masterfield.cli", "eval", "--loop", "NESW",
         "--k", "1", "--field", "free"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert proc.stdout == GOLDEN_EVAL
