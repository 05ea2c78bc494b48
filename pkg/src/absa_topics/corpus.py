"""Corpus ingestion: tokenization, vocabulary building, BoW vectors, rating targets."""

import json
import re
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

SENTIMENT_CLASSES = ("positive", "neutral", "negative")

_TOKEN_RE = re.compile(r"[a-zA-Z0-9]+")


class CorpusError(Exception):
    pass


class EmptyVocabularyError(CorpusError):
    pass


@dataclass(frozen=True)
class PreprocessConfig:
    lowercase: bool = True
    min_token_length: int = 2
    min_doc_frequency: int = 2
    max_vocab_size: int = 2000

    def __post_init__(self):
        if self.max_vocab_size < 1:
            raise ValueError("max_vocab_size must be >= 1")
        if self.min_token_length < 1:
            raise ValueError("min_token_length must be >= 1")


class Vocabulary:
    """Ordered word list plus its inverse word -> index mapping."""

    def __init__(self, words):
        words = list(words)
        if len(set(words)) != len(words):
            raise ValueError("duplicate words in vocabulary")
        self.words = words
        self.index = {w: i for i, w in enumerate(words)}

    def __len__(self):
        return len(self.words)

    def __contains__(self, word):
        return word in self.index

    def save(self, path):
        with open(path, "w", encoding="utf-8") as f:
            for w in self.words:
                f.write(w + "\n")

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as f:
            return cls([line.rstrip("\n") for line in f if line.strip()])


@dataclass
class DocumentRecord:
    id: str
    text: str
    rating: int | None = None
    y_s: float | None = None
    bow: np.ndarray | None = None
    tokens: list = field(default_factory=list)


@dataclass
class LabeledSentence:
    id: str
    text: str
    gold: set  # of (aspect_label, sentiment_label) pairs
    tokens: list = field(default_factory=list)


def preprocess_text(raw, cfg):
    """Split raw text into alphanumeric tokens, dropping short ones."""
    if cfg.lowercase:
        raw = raw.lower()
    return [t for t in _TOKEN_RE.findall(raw) if len(t) >= cfg.min_token_length]


def build_vocab(docs, cfg):
    """Build a vocabulary from tokenized documents.

    Words must occur in at least min_doc_frequency documents; the
    max_vocab_size most frequent by corpus count are kept. Ordering is
    descending count, ties broken lexicographically.
    """
    corpus_counts = Counter()
    doc_freq = Counter()
    for tokens in docs:
        corpus_counts.update(tokens)
        doc_freq.update(set(tokens))
    candidates = [w for w in corpus_counts if doc_freq[w] >= cfg.min_doc_frequency]
    if not candidates:
        raise EmptyVocabularyError(
            "no words survive the document-frequency filter "
            f"(min_doc_frequency={cfg.min_doc_frequency})"
        )
    candidates.sort(key=lambda w: (-corpus_counts[w], w))
    return Vocabulary(candidates[: cfg.max_vocab_size])


def bow_vector(tokens, vocab):
    """Unnormalized word-count vector over the vocabulary; OOV tokens ignored."""
    x = np.zeros(len(vocab), dtype=np.int64)
    index = vocab.index
    for t in tokens:
        i = index.get(t)
        if i is not None:
            x[i] += 1
    return x


def rescale_rating(r):
    """Map a 1..5 star rating linearly onto [0, 1]."""
    if not isinstance(r, int) or isinstance(r, bool) or not 1 <= r <= 5:
        raise ValueError(f"rating must be an integer in 1..5, got {r!r}")
    return (r - 1) / 4


def load_documents(path, cfg, vocab=None):
    """Read a JSON-lines training corpus into DocumentRecords.

    Each line is {"id", "text", "rating"?}. If a vocabulary is given, BoW
    vectors are filled in; otherwise bow is left None.
    """
    records = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise CorpusError(f"{path}:{lineno}: malformed JSON: {e}") from e
            if not isinstance(obj, dict) or "id" not in obj or "text" not in obj:
                raise CorpusError(f"{path}:{lineno}: expected object with 'id' and 'text'")
            rating = obj.get("rating")
            y_s = None
            if rating is not None:
                try:
                    y_s = rescale_rating(rating)
                except ValueError as e:
                    raise CorpusError(f"{path}:{lineno}: {e}") from e
            tokens = preprocess_text(obj["text"], cfg)
            rec = DocumentRecord(
                id=str(obj["id"]), text=obj["text"], rating=rating, y_s=y_s, tokens=tokens
            )
            if vocab is not None:
                rec.bow = bow_vector(tokens, vocab)
            records.append(rec)
    return records


def save_documents(records, path):
    with open(path, "w", encoding="utf-8") as f:
        for rec in records:
            obj = {"id": rec.id, "text": rec.text}
            if rec.rating is not None:
                obj["rating"] = rec.rating
            f.write(json.dumps(obj) + "\n")


def load_labeled_eval(path, aspect_labels, cfg=None):
    """Read JSON-lines labeled evaluation sentences.

    Each line is {"id", "text", "labels": [{"aspect", "sentiment"}, ...]};
    labels are validated against the configured aspect label set.
    """
    aspect_labels = set(aspect_labels)
    sentences = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise CorpusError(f"{path}:{lineno}: malformed JSON: {e}") from e
            gold = set()
            for lab in obj.get("labels", []):
                aspect, sentiment = lab.get("aspect"), lab.get("sentiment")
                if aspect not in aspect_labels:
                    raise CorpusError(f"{path}:{lineno}: unknown aspect label {aspect!r}")
                if sentiment not in SENTIMENT_CLASSES:
                    raise CorpusError(f"{path}:{lineno}: unknown sentiment label {sentiment!r}")
                gold.add((aspect, sentiment))
            tokens = preprocess_text(obj["text"], cfg) if cfg is not None else []
            sentences.append(
                LabeledSentence(id=str(obj["id"]), text=obj["text"], gold=gold, tokens=tokens)
            )
    return sentences
