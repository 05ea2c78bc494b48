"""Topic-word matrix initialization: Xavier-normal base plus direct seeding
or embedding-bootstrapped seeding."""

import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np

log = logging.getLogger(__name__)

# Background seed word lists shipped as defaults (function words, hedges,
# quantifiers and similar aspect-free vocabulary).
DEFAULT_BACKGROUND_SEEDS = [
    ["fully", "somehow", "apparently", "since", "already"],
    ["whatever", "another", "neither", "everyone", "someone"],
    ["besides", "despite", "whether", "till"],
    ["quite", "another", "every"],
    ["might", "may", "must", "could"],
    ["near", "among", "along", "across", "without"],
    ["ok", "okay", "oh", "wow"],
    ["yet", "plus", "either"],
    ["five", "six", "ten", "four", "three", "two", "one"],
]


class SeedSpecError(Exception):
    pass


@dataclass
class SeedSpec:
    aspects: dict            # aspect label -> word list
    sentiments: dict         # "positive"/"negative" -> word list
    background: list = field(default_factory=list)  # one word list per background topic
    seed_value: float = 10.0

    def __post_init__(self):
        if self.seed_value <= 0:
            raise SeedSpecError("seed_value must be positive")

    def validate(self, layout):
        if set(self.aspects) != set(layout.aspect_labels):
            raise SeedSpecError(
                f"seed aspects {sorted(self.aspects)} do not match layout "
                f"{sorted(layout.aspect_labels)}"
            )
        unknown = set(self.sentiments) - set(layout.sentiment_labels)
        if unknown:
            raise SeedSpecError(f"unknown sentiment seed labels {sorted(unknown)}")
        if len(self.background) > layout.B:
            raise SeedSpecError(
                f"{len(self.background)} background seed lists but layout has {layout.B} "
                "background topics"
            )

    def topic_seeds(self, layout):
        """Per-topic seed word lists in layout column order (empty where unseeded)."""
        cols = [list(self.aspects[a]) for a in layout.aspect_labels]
        cols += [list(self.sentiments.get(s, [])) for s in layout.sentiment_labels]
        for i in range(layout.B):
            cols.append(list(self.background[i]) if i < len(self.background) else [])
        return cols

    @classmethod
    def from_json(cls, path, seed_value=10.0):
        with open(path, encoding="utf-8") as f:
            obj = json.load(f)
        return cls(
            aspects=obj.get("aspects", {}),
            sentiments=obj.get("sentiments", {}),
            background=obj.get("background", []),
            seed_value=seed_value,
        )


@dataclass
class StaticEmbeddings:
    dim: int
    vectors: dict  # word -> np.ndarray of length dim

    def get(self, word):
        return self.vectors.get(word)


def init_beta(vocab_size, num_topics, rng):
    """Xavier-normal (V, K) topic-word matrix: std sqrt(2 / (V + K))."""
    if vocab_size < 1 or num_topics < 1:
        raise ValueError("vocab_size and num_topics must be >= 1")
    std = math.sqrt(2.0 / (vocab_size + num_topics))
    return rng.normal(0.0, std, size=(vocab_size, num_topics))


def direct_seed(beta, spec, vocab, layout):
    """Add seed_value to each in-vocabulary seed word of each seeded topic."""
    spec.validate(layout)
    beta = beta.copy()
    for t, words in enumerate(spec.topic_seeds(layout)):
        in_vocab = [w for w in words if w in vocab.index]
        if words and not in_vocab:
            log.warning("topic %d: every seed word is out of vocabulary", t)
        for w in set(in_vocab):
            beta[vocab.index[w], t] += spec.seed_value
    return beta


def bootstrap_seed(beta, spec, vocab, layout, emb):
    """Seed every embeddable vocabulary word in proportion to its cosine
    similarity with the topic's mean seed embedding.

    Topics whose seeds have no embeddings fall back to direct seeding.
    """
    spec.validate(layout)
    beta = beta.copy()
    vocab_vecs = {w: emb.get(w) for w in vocab.words}
    for t, words in enumerate(spec.topic_seeds(layout)):
        if not words:
            continue
        seed_vecs = [emb.get(w) for w in words if emb.get(w) is not None]
        if not seed_vecs:
            log.warning("topic %d: no seed word has an embedding; using direct seeding", t)
            for w in set(words):
                if w in vocab.index:
                    beta[vocab.index[w], t] += spec.seed_value
            continue
        centroid = np.mean(seed_vecs, axis=0)
        c_norm = np.linalg.norm(centroid)
        if c_norm == 0:
            log.warning("topic %d: seed centroid is the zero vector; skipping", t)
            continue
        for w, u in vocab_vecs.items():
            if u is None:
                continue
            u_norm = np.linalg.norm(u)
            if u_norm == 0:
                continue
            cos = float(centroid @ u) / (c_norm * u_norm)
            beta[vocab.index[w], t] += spec.seed_value * cos
    return beta


def load_static_embeddings(path):
    """Parse a plain-text word-vector file ("word v1 ... vd" per line)."""
    vectors = {}
    dim = None
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            parts = line.split()
            if not parts:
                continue
            word, values = parts[0], parts[1:]
            try:
                vec = np.array([float(v) for v in values], dtype=np.float64)
            except ValueError as e:
                raise ValueError(f"{path}:{lineno}: non-numeric field: {e}") from e
            if dim is None:
                dim = vec.shape[0]
            elif vec.shape[0] != dim:
                raise ValueError(
                    f"{path}:{lineno}: expected {dim} values, got {vec.shape[0]}"
                )
            vectors[word] = vec
    if not vectors:
        raise ValueError(f"{path}: no embeddings found")
    return StaticEmbeddings(dim=dim, vectors=vectors)
