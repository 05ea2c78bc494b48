"""Command-line surface: build-vocab, train, infer, topics, eval."""

import argparse
import configparser
import json
import sys
from importlib import resources
from pathlib import Path

from . import corpus as C
from . import checkpoint as CK
from . import infer_eval as IE
from . import training as T
from .embed_cache import read_cache
from .model import TopicLayout
from .objective import LossWeights
from .seeding import SeedSpec, load_static_embeddings


class ConfigError(Exception):
    pass


def load_config(args):
    cfg = configparser.ConfigParser()
    if args.profile:
        with resources.files("absa_topics.profiles").joinpath(f"{args.profile}.ini").open() as f:
            cfg.read_file(f)
    if args.config:
        if not Path(args.config).exists():
            raise ConfigError(f"config file not found: {args.config}")
        cfg.read(args.config)
    for item in args.set or []:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError(f"override must look like section.key=value: {item!r}")
        key, value = item.split("=", 1)
        section, name = key.split(".", 1)
        if not cfg.has_section(section):
            cfg.add_section(section)
        cfg.set(section, name, value)
    if args.seed is not None:
        if not cfg.has_section("train"):
            cfg.add_section("train")
        cfg.set("train", "rng_seed", str(args.seed))
    return cfg


def _path(cfg, key, must_exist=False):
    try:
        p = cfg.get("data", key)
    except (configparser.NoSectionError, configparser.NoOptionError):
        raise ConfigError(f"missing required config key data.{key}")
    if must_exist and not Path(p).exists():
        raise ConfigError(f"missing input artifact: data.{key} = {p}")
    return p


def preprocess_config(cfg):
    sec = cfg["corpus"] if cfg.has_section("corpus") else {}
    return C.PreprocessConfig(
        lowercase=cfg.getboolean("corpus", "lowercase", fallback=True),
        min_token_length=cfg.getint("corpus", "min_token_length", fallback=2),
        min_doc_frequency=cfg.getint("corpus", "min_doc_frequency", fallback=2),
        max_vocab_size=cfg.getint("corpus", "max_vocab_size", fallback=2000),
    )


def topic_layout(cfg):
    try:
        aspects = tuple(a.strip() for a in cfg.get("model", "aspect_labels").split(",") if a.strip())
    except (configparser.NoSectionError, configparser.NoOptionError):
        raise ConfigError("missing required config key model.aspect_labels")
    return TopicLayout(
        aspect_labels=aspects,
        sentiment_labels=("positive", "negative"),
        num_background=cfg.getint("model", "num_background", fallback=9),
    )


def train_config(cfg):
    layout = topic_layout(cfg)
    return T.TrainConfig(
        layout=layout,
        epochs=cfg.getint("train", "epochs", fallback=50),
        batch_size=cfg.getint("train", "batch_size", fallback=16),
        learning_rate=cfg.getfloat("train", "learning_rate", fallback=1e-5),
        adam_beta1=cfg.getfloat("train", "adam_beta1", fallback=0.9),
        adam_beta2=cfg.getfloat("train", "adam_beta2", fallback=0.99),
        adam_eps=cfg.getfloat("train", "adam_eps", fallback=1e-8),
        zero_lr_epochs=cfg.getint("train", "zero_lr_epochs", fallback=1),
        warmup_epochs=cfg.getint("train", "warmup_epochs", fallback=1),
        weights=LossWeights(
            c1=cfg.getfloat("train", "c1", fallback=0.1),
            c2=cfg.getfloat("train", "c2", fallback=0.1),
            c3=cfg.getfloat("train", "c3", fallback=10.0),
            c4=cfg.getfloat("train", "c4", fallback=10.0),
        ),
        alpha=cfg.getfloat("train", "alpha", fallback=1.0),
        rng_seed=cfg.getint("train", "rng_seed", fallback=0),
        mlp_hidden=cfg.getint("model", "mlp_hidden", fallback=100),
        seed_mode=cfg.get("train", "seed_mode", fallback="direct"),
        renormalize_theta_a=cfg.getboolean("infer", "renormalize_theta_a", fallback=False),
    )


def inference_config(cfg):
    return IE.InferenceConfig(
        aspect_threshold=cfg.getfloat("infer", "aspect_threshold", fallback=0.1),
        sentiment_threshold=cfg.getfloat("infer", "sentiment_threshold", fallback=0.2),
        renormalize_theta_a=cfg.getboolean("infer", "renormalize_theta_a", fallback=False),
    )


def cmd_build_vocab(cfg, args):
    pcfg = preprocess_config(cfg)
    corpus_path = _path(cfg, "corpus", must_exist=True)
    vocab_path = _path(cfg, "vocab")
    docs = C.load_documents(corpus_path, pcfg)
    vocab = C.build_vocab([d.tokens for d in docs], pcfg)
    vocab.save(vocab_path)
    print(json.dumps({"status": "ok", "vocab_size": len(vocab), "path": vocab_path}))


def cmd_train(cfg, args):
    pcfg = preprocess_config(cfg)
    tcfg = train_config(cfg)
    corpus_path = _path(cfg, "corpus", must_exist=True)
    vocab = C.Vocabulary.load(_path(cfg, "vocab", must_exist=True))
    cache = read_cache(_path(cfg, "cache", must_exist=True))
    seeds = SeedSpec.from_json(_path(cfg, "seeds", must_exist=True),
                               seed_value=cfg.getfloat("train", "seed_value", fallback=10.0))
    embeddings = None
    if tcfg.seed_mode == "bootstrap":
        embeddings = load_static_embeddings(_path(cfg, "static_embeddings", must_exist=True))
    docs = C.load_documents(corpus_path, pcfg, vocab=vocab)
    checkpoint_path = _path(cfg, "checkpoint")
    log_path = cfg.get("data", "train_log", fallback=None)
    params = optimizer_state = None
    if args.resume:
        params, optimizer_state = CK.load_checkpoint(args.resume)
    log_stream = open(log_path, "w") if log_path else None
    try:
        report, opt_state = T.train(tcfg, docs, cache, vocab, seeds,
                                    embeddings=embeddings, params=params,
                                    optimizer_state=optimizer_state,
                                    log_stream=log_stream)
    finally:
        if log_stream:
            log_stream.close()
    CK.save_checkpoint(report.params, checkpoint_path, optimizer_state=opt_state)
    print(json.dumps({"status": "ok", "epochs": len(report.history),
                      "final_total": report.history[-1].total,
                      "seconds": round(report.seconds, 3),
                      "checkpoint": checkpoint_path}))


def cmd_infer(cfg, args):
    pcfg = preprocess_config(cfg)
    icfg = inference_config(cfg)
    params, _ = CK.load_checkpoint(_path(cfg, "checkpoint", must_exist=True))
    cache = read_cache(_path(cfg, "cache", must_exist=True))
    input_path = args.input or _path(cfg, "corpus", must_exist=True)
    if not Path(input_path).exists():
        raise ConfigError(f"missing input artifact: {input_path}")
    docs = C.load_documents(input_path, pcfg)
    out_path = _path(cfg, "predictions")
    with open(out_path, "w", encoding="utf-8") as f:
        for doc in docs:
            states = T.doc_states_tensor(doc, cache)
            pred = IE.infer(doc, states, params, icfg)
            f.write(pred.to_json() + "\n")
    print(json.dumps({"status": "ok", "documents": len(docs), "path": out_path}))


def cmd_topics(cfg, args):
    params, _ = CK.load_checkpoint(_path(cfg, "checkpoint", must_exist=True))
    vocab = C.Vocabulary.load(_path(cfg, "vocab", must_exist=True))
    layout = params.layout
    labels = (list(layout.aspect_labels) + list(layout.sentiment_labels)
              + [f"background-{i}" for i in range(layout.B)])
    beta = params.beta.detach().numpy()
    for k, label in enumerate(labels):
        words = IE.top_words(beta, vocab, k, args.num_words)
        print(f"{label}: {' '.join(words)}")


def cmd_eval(cfg, args):
    layout = topic_layout(cfg)
    with open(_path(cfg, "predictions", must_exist=True), encoding="utf-8") as f:
        preds = [IE.Prediction.from_json(line) for line in f if line.strip()]
    gold = C.load_labeled_eval(_path(cfg, "eval", must_exist=True), layout.aspect_labels)
    report = IE.evaluate(preds, gold, layout)
    out = json.dumps(report.to_dict(), indent=2)
    report_path = cfg.get("data", "eval_report", fallback=None)
    if report_path:
        Path(report_path).write_text(out + "\n")
    print(out)


def build_parser():
    p = argparse.ArgumentParser(prog="absa-topics",
                                description="Weakly-supervised aspect-based sentiment topic model")
    p.add_argument("--config", help="INI config file")
    p.add_argument("--profile", choices=["restaurants", "laptops"],
                   help="shipped best-configuration profile")
    p.add_argument("--seed", type=int, help="override train.rng_seed")
    p.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE",
                   help="override any config key")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("build-vocab", help="build the BoW vocabulary file")
    tr = sub.add_parser("train", help="train a model and write a checkpoint")
    tr.add_argument("--resume", help="checkpoint to resume from")
    inf = sub.add_parser("infer", help="write per-document predictions")
    inf.add_argument("--input", help="JSON-lines documents to infer on")
    tp = sub.add_parser("topics", help="print per-topic top words")
    tp.add_argument("-n", "--num-words", type=int, default=10)
    sub.add_parser("eval", help="score predictions against labeled data")
    return p


COMMANDS = {
    "build-vocab": cmd_build_vocab,
    "train": cmd_train,
    "infer": cmd_infer,
    "topics": cmd_topics,
    "eval": cmd_eval,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
        COMMANDS[args.command](cfg, args)
    except (ConfigError, ValueError, C.CorpusError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except Exception as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
