import json

import pytest

from absa_topics import cli
from absa_topics.embed_cache import EmbeddingCache, synthetic_embed, write_cache

from helpers import SEEDS, make_corpus
import helpers


def write_inputs(tmp_path, n_train=30, n_eval=10):
    train_docs, _ = make_corpus(n_train, seed=5, prefix="d")
    eval_docs, eval_golds = make_corpus(n_eval, seed=6, prefix="e")
    corpus_path = tmp_path / "corpus.jsonl"
    with open(corpus_path, "w") as f:
        for d in train_docs:
            f.write(json.dumps({"id": d.id, "text": d.text, "rating": d.rating}) + "\n")
    eval_corpus = tmp_path / "eval_docs.jsonl"
    with open(eval_corpus, "w") as f:
        for d in eval_docs:
            f.write(json.dumps({"id": d.id, "text": d.text}) + "\n")
    eval_labeled = tmp_path / "eval.jsonl"
    with open(eval_labeled, "w") as f:
        for d, g in zip(eval_docs, eval_golds):
            f.write(json.dumps({"id": d.id, "text": d.text,
                                "labels": [{"aspect": a, "sentiment": s} for a, s in sorted(g)]}) + "\n")
    cache = EmbeddingCache(hidden_dim=8, num_layers=2)
    for d in train_docs + eval_docs:
        cache.add(d.id, synthetic_embed(d.tokens, 8, 2, seed=7))
    cache_path = tmp_path / "cache.tec"
    write_cache(cache, cache_path)
    seeds_path = tmp_path / "seeds.json"
    seeds_path.write_text(json.dumps({
        "aspects": SEEDS.aspects, "sentiments": SEEDS.sentiments,
        "background": SEEDS.background,
    }))
    config_path = tmp_path / "run.ini"
    config_path.write_text(f"""
[data]
corpus = {corpus_path}
vocab = {tmp_path / 'vocab.txt'}
cache = {cache_path}
seeds = {seeds_path}
checkpoint = {tmp_path / 'model.ckpt'}
predictions = {tmp_path / 'preds.jsonl'}
eval = {eval_labeled}
train_log = {tmp_path / 'train.log.jsonl'}
eval_report = {tmp_path / 'report.json'}

[corpus]
min_token_length = 1
min_doc_frequency = 1
max_vocab_size = 100

[model]
aspect_labels = food, service, location
num_background = 1
mlp_hidden = 6

[train]
epochs = 3
batch_size = 8
learning_rate = 1e-3
rng_seed = 0
seed_mode = direct

[infer]
aspect_threshold = 0.15
sentiment_threshold = 0.2
""")
    return config_path, eval_corpus, tmp_path


class TestPipeline:
    def test_full_pipeline(self, tmp_path, capsys):
        config, eval_corpus, d = write_inputs(tmp_path)
        base = ["--config", str(config)]
        assert cli.main(base + ["build-vocab"]) == 0
        assert cli.main(base + ["train"]) == 0
        assert cli.main(base + ["infer", "--input", str(eval_corpus)]) == 0
        assert cli.main(base + ["eval"]) == 0
        report = json.loads((d / "report.json").read_text())
        assert "aspect" in report and "aspect_sentiment" in report
        assert 0.0 <= report["aspect"]["macro"]["f1"] <= 1.0
        log_lines = (d / "train.log.jsonl").read_text().strip().splitlines()
        assert len(log_lines) == 3
        assert set(json.loads(log_lines[0])) == {"epoch", "kl", "recon", "s_asp",
                                                 "s_senti", "total", "lr"}

    def test_rerun_byte_identical(self, tmp_path, capsys):
        config, eval_corpus, d = write_inputs(tmp_path)
        base = ["--config", str(config)]
        assert cli.main(base + ["build-vocab"]) == 0
        assert cli.main(base + ["train"]) == 0
        ckpt1 = (d / "model.ckpt").read_bytes()
        assert cli.main(base + ["infer", "--input", str(eval_corpus)]) == 0
        preds1 = (d / "preds.jsonl").read_bytes()
        assert cli.main(base + ["train"]) == 0
        assert (d / "model.ckpt").read_bytes() == ckpt1
        assert cli.main(base + ["infer", "--input", str(eval_corpus)]) == 0
        assert (d / "preds.jsonl").read_bytes() == preds1

    def test_topics_show_seeds_after_init(self, tmp_path, capsys):
        config, eval_corpus, d = write_inputs(tmp_path)
        base = ["--config", str(config)]
        assert cli.main(base + ["build-vocab"]) == 0
        # one frozen epoch: LR is zero, so beta stays at its seeded init
        assert cli.main(base + ["--set", "train.epochs=1", "train"]) == 0
        capsys.readouterr()
        assert cli.main(base + ["topics", "-n", "3"]) == 0
        out = capsys.readouterr().out
        lines = dict(line.split(": ", 1) for line in out.strip().splitlines())
        assert set(SEEDS.aspects["food"]) == set(lines["food"].split())

    def test_missing_input_exit_code(self, tmp_path, capsys):
        config, _, d = write_inputs(tmp_path)
        assert cli.main(["--config", str(config), "train"]) == 1  # vocab not built yet
        err = capsys.readouterr().err
        assert "vocab" in err

    def test_missing_config_key(self, tmp_path, capsys):
        config = tmp_path / "broken.ini"
        config.write_text("[data]\n")
        assert cli.main(["--config", str(config), "build-vocab"]) == 1

    def test_seed_flag_overrides(self, tmp_path, capsys):
        config, eval_corpus, d = write_inputs(tmp_path)
        base = ["--config", str(config)]
        assert cli.main(base + ["build-vocab"]) == 0
        assert cli.main(base + ["train"]) == 0
        ckpt_seed0 = (d / "model.ckpt").read_bytes()
        assert cli.main(base + ["--seed", "1", "train"]) == 0
        assert (d / "model.ckpt").read_bytes() != ckpt_seed0

    def test_profiles_load(self):
        for profile in ("restaurants", "laptops"):
            args = cli.build_parser().parse_args(["--profile", profile, "build-vocab"])
            cfg = cli.load_config(args)
            tcfg = cli.train_config(cfg)
            assert tcfg.weights.c3 == 10.0 and tcfg.weights.c4 == 10.0
            assert tcfg.alpha == 1.0 and tcfg.batch_size == 16

    def test_restaurants_profile_values(self):
        args = cli.build_parser().parse_args(["--profile", "restaurants", "build-vocab"])
        cfg = cli.load_config(args)
        tcfg = cli.train_config(cfg)
        assert tcfg.learning_rate == pytest.approx(1e-5)
        assert tcfg.epochs == 50
        assert tcfg.layout.A == 5
        assert tcfg.seed_mode == "bootstrap"
        icfg = cli.inference_config(cfg)
        assert icfg.sentiment_threshold == pytest.approx(1 / 5)
        assert cli.preprocess_config(cfg).max_vocab_size == 2000

    def test_laptops_profile_values(self):
        args = cli.build_parser().parse_args(["--profile", "laptops", "build-vocab"])
        cfg = cli.load_config(args)
        tcfg = cli.train_config(cfg)
        assert tcfg.learning_rate == pytest.approx(5e-4)
        assert tcfg.epochs == 30
        assert tcfg.layout.A == 8
        assert tcfg.seed_mode == "direct"
        assert cli.inference_config(cfg).sentiment_threshold == pytest.approx(3 / 16)
