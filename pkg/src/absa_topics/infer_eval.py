"""Multi-aspect inference, 3-class sentiment thresholding, topic-word
inspection and the macro P/R/F1 evaluation protocol."""

import json
from dataclasses import dataclass, field

import numpy as np
import torch

from . import model as M


class AlignmentError(Exception):
    pass


@dataclass(frozen=True)
class InferenceConfig:
    aspect_threshold: float = 0.2
    sentiment_threshold: float = 0.2
    renormalize_theta_a: bool = False

    def __post_init__(self):
        if not 0 < self.aspect_threshold < 1:
            raise ValueError("aspect_threshold must lie in (0, 1)")
        if self.sentiment_threshold <= 0:
            raise ValueError("sentiment_threshold must be positive")


@dataclass
class Prediction:
    id: str
    aspects: set
    coefficients: dict  # aspect label -> raw pooled sentiment coefficient
    sentiments: dict    # predicted aspect label -> sentiment class

    def to_json(self):
        return json.dumps({
            "id": self.id,
            "aspects": sorted(self.aspects),
            "coefficients": {k: self.coefficients[k] for k in sorted(self.coefficients)},
            "sentiments": {k: self.sentiments[k] for k in sorted(self.sentiments)},
        })

    @classmethod
    def from_json(cls, line):
        obj = json.loads(line)
        return cls(id=obj["id"], aspects=set(obj["aspects"]),
                   coefficients=obj["coefficients"], sentiments=obj["sentiments"])


@dataclass
class ClassMetrics:
    tp: int = 0
    fp: int = 0
    fn: int = 0

    @property
    def precision(self):
        return self.tp / (self.tp + self.fp) if self.tp + self.fp else 0.0

    @property
    def recall(self):
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else 0.0

    @property
    def f1(self):
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0


@dataclass
class TaskReport:
    per_class: dict  # class key -> ClassMetrics
    precision: float = 0.0
    recall: float = 0.0
    f1: float = 0.0

    def finalize(self):
        if self.per_class:
            n = len(self.per_class)
            self.precision = sum(m.precision for m in self.per_class.values()) / n
            self.recall = sum(m.recall for m in self.per_class.values()) / n
            self.f1 = sum(m.f1 for m in self.per_class.values()) / n
        return self


@dataclass
class EvalReport:
    aspect: TaskReport
    aspect_sentiment: TaskReport

    def to_dict(self):
        def block(task, key_fn):
            return {
                "macro": {"precision": task.precision, "recall": task.recall, "f1": task.f1},
                "per_class": {
                    key_fn(k): {"tp": m.tp, "fp": m.fp, "fn": m.fn,
                                "precision": m.precision, "recall": m.recall, "f1": m.f1}
                    for k, m in task.per_class.items()
                },
            }
        return {
            "aspect": block(self.aspect, str),
            "aspect_sentiment": block(self.aspect_sentiment, lambda k: f"{k[0]}:{k[1]}"),
        }


def predict_aspects(theta_a, threshold, aspect_labels):
    """Aspect labels whose topic probability strictly exceeds the threshold."""
    theta_a = np.asarray(theta_a)
    return {lab for lab, p in zip(aspect_labels, theta_a) if p > threshold}


def classify_sentiment(coefficient, threshold):
    """Symmetric 3-class band: positive above +threshold, negative below
    -threshold, neutral inside."""
    if coefficient > threshold:
        return "positive"
    if coefficient < -threshold:
        return "negative"
    return "neutral"


def infer(doc, states, params, icfg):
    """Deterministic (zero-noise) prediction for one document."""
    layout = params.layout
    with torch.no_grad():
        fs = M.forward(states, params, mode="infer",
                       renormalize_theta_a=icfg.renormalize_theta_a)
    theta_a = fs.theta_all[layout.aspect_slice].numpy()
    if icfg.renormalize_theta_a:
        theta_a = theta_a / theta_a.sum()
    coefficients = {lab: float(c) for lab, c in zip(layout.aspect_labels, fs.s_asp.numpy())}
    aspects = predict_aspects(theta_a, icfg.aspect_threshold, layout.aspect_labels)
    sentiments = {lab: classify_sentiment(coefficients[lab], icfg.sentiment_threshold)
                  for lab in aspects}
    return Prediction(id=doc.id, aspects=aspects, coefficients=coefficients,
                      sentiments=sentiments)


def top_words(beta, vocab, topic, n):
    """The n highest-weight vocabulary words of a topic column, descending,
    ties broken lexicographically."""
    beta = np.asarray(beta)
    if not 0 <= topic < beta.shape[1]:
        raise ValueError(f"topic index {topic} out of range")
    n = min(n, len(vocab.words))
    order = sorted(range(len(vocab.words)),
                   key=lambda v: (-beta[v, topic], vocab.words[v]))
    return [vocab.words[v] for v in order[:n]]


def evaluate(preds, gold, layout):
    """Macro P/R/F1 for aspect detection and aspect-sentiment detection.

    Aspect classes are all configured aspect labels; aspect-sentiment classes
    are the (aspect, sentiment) pairs with gold support, so pairs never
    annotated do not dilute the macro average.
    """
    by_id = {p.id: p for p in preds}
    if len(by_id) != len(preds):
        raise AlignmentError("duplicate prediction ids")
    aspect_metrics = {lab: ClassMetrics() for lab in layout.aspect_labels}
    pair_classes = {pair for sent in gold for pair in sent.gold}
    pair_metrics = {pair: ClassMetrics() for pair in sorted(pair_classes)}
    for sent in gold:
        pred = by_id.get(sent.id)
        if pred is None:
            raise AlignmentError(f"no prediction for sentence {sent.id!r}")
        gold_aspects = {a for a, _ in sent.gold}
        for lab, m in aspect_metrics.items():
            in_pred, in_gold = lab in pred.aspects, lab in gold_aspects
            if in_pred and in_gold:
                m.tp += 1
            elif in_pred:
                m.fp += 1
            elif in_gold:
                m.fn += 1
        pred_pairs = {(a, s) for a, s in pred.sentiments.items()}
        for pair, m in pair_metrics.items():
            in_pred, in_gold = pair in pred_pairs, pair in sent.gold
            if in_pred and in_gold:
                m.tp += 1
            elif in_pred:
                m.fp += 1
            elif in_gold:
                m.fn += 1
    return EvalReport(
        aspect=TaskReport(per_class=aspect_metrics).finalize(),
        aspect_sentiment=TaskReport(per_class=pair_metrics).finalize(),
    )
