import json
from collections import Counter
from pathlib import Path

import numpy as np
import pytest

from pmivec.cli import main
from pmivec.corpus import count_unigrams, load_bigrams, load_unigrams, tokenize
from pmivec.embeddings import EmbeddingSet, load_vec, save_vec
from pmivec.ioutil import atomic_write

DATA = Path(__file__).parent / "data"
GOLDEN = DATA / "golden"


def read_manifest(out_path):
    return json.loads(Path(str(out_path) + ".manifest.json").read_text())


class TestAtomicWrites:
    def test_failure_leaves_no_partial_output(self, tmp_path):
        target = tmp_path / "out.txt"
        with pytest.raises(RuntimeError):
            with atomic_write(target) as fh:
                fh.write("partial")
                raise RuntimeError("boom")
        assert not target.exists()
        assert list(tmp_path.iterdir()) == []

    def test_success_replaces_previous_content(self, tmp_path):
        target = tmp_path / "out.txt"
        target.write_text("old")
        with atomic_write(target) as fh:
            fh.write("new")
        assert target.read_text() == "new"
        assert list(tmp_path.iterdir()) == [target]


class TestCountUnigrams:
    def test_golden_output(self, tmp_path):
        out = tmp_path / "uni.txt"
        code = main([
            "count-unigrams", "--input", str(GOLDEN / "tiny-corpus.txt"),
            "--min-count", "1", "--out", str(out),
        ])
        assert code == 0
        assert out.read_bytes() == (GOLDEN / "tiny-unigrams.txt").read_bytes()
        manifest = read_manifest(out)
        assert manifest["subcommand"] == "count-unigrams"
        assert manifest["arguments"]["min_count"] == 1

    def test_golden_matches_brute_force(self):
        # independent tally of the same fixture
        tokens = list(tokenize((GOLDEN / "tiny-corpus.txt").read_text()))
        expected = Counter(t for t in tokens if t is not None)
        vocab = load_unigrams(GOLDEN / "tiny-unigrams.txt")
        assert dict(zip(vocab.words, vocab.counts)) == dict(expected)
        assert vocab.total_tokens == len([t for t in tokens if t is not None])

    def test_huge_min_count_writes_valid_empty_file(self, tmp_path):
        out = tmp_path / "uni.txt"
        code = main([
            "count-unigrams", "--input", str(GOLDEN / "tiny-corpus.txt"),
            "--min-count", "1000000000", "--out", str(out),
        ])
        assert code == 0
        vocab = load_unigrams(out)
        assert len(vocab) == 0 and vocab.total_tokens == 6

    def test_missing_input_names_path(self, tmp_path, capsys):
        out = tmp_path / "uni.txt"
        code = main(["count-unigrams", "--input", "no-such-corpus.txt", "--out", str(out)])
        assert code == 2
        assert "no-such-corpus.txt" in capsys.readouterr().err
        assert not out.exists()


class TestCountBigrams:
    def test_golden_output(self, tmp_path):
        out = tmp_path / "bi.txt"
        code = main([
            "count-bigrams", "--input", str(GOLDEN / "tiny-corpus.txt"),
            "--unigrams", str(GOLDEN / "tiny-unigrams.txt"),
            "--window", "2", "--out", str(out),
        ])
        assert code == 0
        assert out.read_bytes() == (GOLDEN / "tiny-bigrams-w2.txt").read_bytes()

    def test_golden_matches_brute_force(self):
        tokens = [t for t in tokenize((GOLDEN / "tiny-corpus.txt").read_text()) if t]
        vocab = load_unigrams(GOLDEN / "tiny-unigrams.txt")
        expected = Counter()
        for t in range(len(tokens)):
            for k in (1, 2):
                if t + k < len(tokens):
                    a, b = tokens[t], tokens[t + k]
                    if a in vocab and b in vocab:
                        expected[(vocab.index[a], vocab.index[b])] += 1
        table = load_bigrams(GOLDEN / "tiny-bigrams-w2.txt", vocab)
        got = Counter({(i, j): c for i, row in table.rows.items() for j, c in row.items()})
        assert got == expected

    def test_window_one_adjacency(self, tmp_path):
        out = tmp_path / "bi.txt"
        main([
            "count-bigrams", "--input", str(GOLDEN / "tiny-corpus.txt"),
            "--unigrams", str(GOLDEN / "tiny-unigrams.txt"),
            "--window", "1", "--out", str(out),
        ])
        vocab = load_unigrams(GOLDEN / "tiny-unigrams.txt")
        table = load_bigrams(out, vocab)
        words = vocab.words
        seen = {(words[i], words[j]): c for i, row in table.rows.items() for j, c in row.items()}
        # tokens: the cat sat the dog sat
        assert seen == {
            ("the", "cat"): 1, ("cat", "sat"): 1, ("sat", "the"): 1,
            ("the", "dog"): 1, ("dog", "sat"): 1,
        }

    def test_bad_unigram_file_is_data_error(self, tmp_path, capsys):
        bad = tmp_path / "bad.txt"
        bad.write_text("#total 5\na\t-3\n")
        code = main([
            "count-bigrams", "--input", str(GOLDEN / "tiny-corpus.txt"),
            "--unigrams", str(bad), "--out", str(tmp_path / "bi.txt"),
        ])
        assert code == 2
        assert "bad.txt:2" in capsys.readouterr().err


@pytest.fixture(scope="module")
def small_pipeline(tmp_path_factory):
    """Counted statistics for a synthetic 4000-token corpus."""
    root = tmp_path_factory.mktemp("smallpipe")
    rng = np.random.default_rng(42)
    words = [chr(ord("a") + k // 26) + chr(ord("a") + k % 26) for k in range(30)]
    weights = 1.0 / (np.arange(30) + 2.0)
    weights /= weights.sum()
    corpus = root / "corpus.txt"
    with open(corpus, "w") as fh:
        for _ in range(200):
            picks = rng.choice(30, size=20, p=weights)
            fh.write(" ".join(words[int(k)] for k in picks) + "\n")
    uni = root / "unigrams.txt"
    bi = root / "bigrams.txt"
    assert main(["count-unigrams", "--input", str(corpus), "--min-count", "1",
                 "--out", str(uni)]) == 0
    assert main(["count-bigrams", "--input", str(corpus), "--unigrams", str(uni),
                 "--window", "2", "--out", str(bi)]) == 0
    return {"root": root, "corpus": corpus, "unigrams": uni, "bigrams": bi}


class TestFactorizeCore:
    def test_run_and_diagnostics(self, small_pipeline, tmp_path):
        out = tmp_path / "core.vec"
        code = main([
            "factorize-core", "--bigrams", str(small_pipeline["bigrams"]),
            "--unigrams", str(small_pipeline["unigrams"]),
            "--core-size", "12", "--dim", "5", "--out", str(out),
        ])
        assert code == 0
        emb = load_vec(out)
        assert len(emb) == 12 and emb.dim == 5
        residuals = read_manifest(out)["diagnostics"]["residuals"]
        assert all(b <= a + 1e-12 for a, b in zip(residuals, residuals[1:]))

    def test_rerun_is_byte_identical(self, small_pipeline, tmp_path):
        outs = []
        for name in ("one.vec", "two.vec"):
            out = tmp_path / name
            main([
                "factorize-core", "--bigrams", str(small_pipeline["bigrams"]),
                "--unigrams", str(small_pipeline["unigrams"]),
                "--core-size", "12", "--dim", "5", "--out", str(out),
            ])
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]

    def test_core_size_below_dim_rejected(self, small_pipeline, tmp_path, capsys):
        code = main([
            "factorize-core", "--bigrams", str(small_pipeline["bigrams"]),
            "--unigrams", str(small_pipeline["unigrams"]),
            "--core-size", "3", "--dim", "5", "--out", str(tmp_path / "x.vec"),
        ])
        assert code == 2
        assert "--core-size" in capsys.readouterr().err


class TestFactorizeNoncore:
    def test_staged_growth(self, small_pipeline, tmp_path):
        core = tmp_path / "core.vec"
        main([
            "factorize-core", "--bigrams", str(small_pipeline["bigrams"]),
            "--unigrams", str(small_pipeline["unigrams"]),
            "--core-size", "10", "--dim", "4", "--out", str(core),
        ])
        stage1 = tmp_path / "s1.vec"
        code = main([
            "factorize-noncore", "--bigrams", str(small_pipeline["bigrams"]),
            "--unigrams", str(small_pipeline["unigrams"]),
            "--core-vec", str(core), "--count", "8", "--mu", "2.0",
            "--out", str(stage1),
        ])
        assert code == 0
        stage2 = tmp_path / "s2.vec"
        code = main([
            "factorize-noncore", "--bigrams", str(small_pipeline["bigrams"]),
            "--unigrams", str(small_pipeline["unigrams"]),
            "--core-vec", str(stage1), "--core-size", "10",
            "--count", "8", "--mu", "4.0", "--out", str(stage2),
        ])
        assert code == 0
        vocab = load_unigrams(small_pipeline["unigrams"])
        emb1, emb2 = load_vec(stage1), load_vec(stage2)
        assert len(emb1) == 18 and len(emb2) == 26
        # new words follow vocabulary frequency order
        assert emb1.words == vocab.words[:18]
        assert emb2.words == vocab.words[:26]
        assert emb2.words[:18] == emb1.words
        np.testing.assert_array_equal(emb2.vectors[:18], emb1.vectors)
        assert read_manifest(stage2)["report"]["words"] == 8

    def test_negative_mu_is_usage_error(self, small_pipeline, tmp_path):
        with pytest.raises(SystemExit) as exc:
            main([
                "factorize-noncore", "--bigrams", str(small_pipeline["bigrams"]),
                "--unigrams", str(small_pipeline["unigrams"]),
                "--core-vec", "x.vec", "--count", "5", "--mu", "-1",
                "--out", str(tmp_path / "x.vec"),
            ])
        assert exc.value.code == 1

    def test_core_vocab_mismatch_warns_and_reports_coverage(
        self, small_pipeline, tmp_path, capsys
    ):
        vocab = load_unigrams(small_pipeline["unigrams"])
        rng = np.random.default_rng(0)
        words = vocab.words[:6] + ["zzzz"]  # one word the corpus never saw
        fake_core = EmbeddingSet(words, rng.normal(size=(7, 4)))
        core_path = tmp_path / "core.vec"
        save_vec(fake_core, core_path)
        out = tmp_path / "grown.vec"
        code = main([
            "factorize-noncore", "--bigrams", str(small_pipeline["bigrams"]),
            "--unigrams", str(small_pipeline["unigrams"]),
            "--core-vec", str(core_path), "--count", "4", "--mu", "1.0",
            "--out", str(out),
        ])
        assert code == 0
        err = capsys.readouterr().err
        assert "coverage" in err and "1/7" in err
        assert len(load_vec(out)) == 11


class TestEvaluate:
    @pytest.fixture
    def eval_setup(self, tmp_path):
        rng = np.random.default_rng(5)
        words = [f"w{chr(ord('a') + k)}" for k in range(10)]
        emb = EmbeddingSet(words, rng.normal(size=(10, 4)))
        vec = tmp_path / "emb.vec"
        save_vec(emb, vec)
        tdir = tmp_path / "testsets"
        tdir.mkdir()
        (tdir / "pairs.sim.tsv").write_text(
            "wa\twb\t9.0\nwa\twc\t7.0\nwb\twd\t3.0\nwa\tzzz\t5.0\n"
        )
        (tdir / "quads.ana.txt").write_text("wa wb wc wd\nwe wf wg wh\n")
        (tdir / "choice.mc.txt").write_text("wa | wb wc wd we | 0\nwf | wg wh wi wj | 3\n")
        return vec, tdir

    def test_report_written_with_coverage(self, eval_setup, tmp_path, capsys):
        vec, tdir = eval_setup
        out = tmp_path / "report.txt"
        code = main(["evaluate", "--vec", str(vec), "--testset-dir", str(tdir),
                     "--out", str(out)])
        assert code == 0
        text = out.read_text()
        assert "pairs" in text and "quads" in text and "choice" in text
        assert "pairs.spearman=" in text
        assert "pairs.coverage=0.750000" in text  # the zzz pair is skipped
        stdout = capsys.readouterr().out
        assert "testset" in stdout

    def test_empty_dir_is_data_error(self, tmp_path, capsys):
        rng = np.random.default_rng(6)
        vec = tmp_path / "emb.vec"
        save_vec(EmbeddingSet(["aa"], rng.normal(size=(1, 2))), vec)
        empty = tmp_path / "none"
        empty.mkdir()
        code = main(["evaluate", "--vec", str(vec), "--testset-dir", str(empty),
                     "--out", str(tmp_path / "r.txt")])
        assert code == 2
        assert "no testsets" in capsys.readouterr().err


class TestUsageErrors:
    def test_unknown_subcommand_exits_one(self):
        with pytest.raises(SystemExit) as exc:
            main(["frobnicate"])
        assert exc.value.code == 1

    def test_missing_required_flag_exits_one(self):
        with pytest.raises(SystemExit) as exc:
            main(["count-unigrams", "--out", "x.txt"])
        assert exc.value.code == 1
