"""Shared fixtures: a planted-topic synthetic corpus with token-keyed
embeddings, small enough to train on one CPU core."""

import numpy as np

from absa_topics import corpus as C
from absa_topics.embed_cache import EmbeddingCache, synthetic_embed
from absa_topics.model import TopicLayout
from absa_topics.seeding import SeedSpec

# verdict lines appended by the acceptance suite; echoed by the conftest
# terminal-summary hook so they survive output capture
acceptance_lines = []

ASPECT_FAMILIES = {
    "food": ["food", "pizza", "sushi", "steak", "pasta", "burger", "salad", "soup"],
    "service": ["service", "waiter", "staff", "server", "hostess", "manager", "crew", "host"],
    "location": ["location", "place", "city", "street", "downtown", "corner", "block", "area"],
}
POSITIVE_WORDS = ["great", "amazing", "wonderful", "delicious", "fresh", "friendly"]
NEGATIVE_WORDS = ["awful", "rude", "bland", "dirty", "soggy", "terrible"]
BACKGROUND_WORDS = ["the", "is", "was", "and", "very", "really", "quite", "some", "with", "here"]

LAYOUT = TopicLayout(aspect_labels=("food", "service", "location"),
                     sentiment_labels=("positive", "negative"),
                     num_background=1)

SEEDS = SeedSpec(
    aspects={a: words[:3] for a, words in ASPECT_FAMILIES.items()},
    sentiments={"positive": POSITIVE_WORDS[:3], "negative": NEGATIVE_WORDS[:3]},
    background=[BACKGROUND_WORDS[:4]],
    seed_value=10.0,
)

PREPROCESS = C.PreprocessConfig(min_token_length=1, min_doc_frequency=1, max_vocab_size=100)


def make_document(rng, doc_id):
    """One synthetic review: 1-2 aspect families, sentiment words that fix
    the rating monotonically, plus background filler."""
    aspects = sorted(rng.choice(list(ASPECT_FAMILIES), size=rng.integers(1, 3), replace=False))
    tokens = []
    for a in aspects:
        tokens += list(rng.choice(ASPECT_FAMILIES[a], size=4, replace=True))
    polarity = int(rng.integers(-2, 3))  # -2 .. 2
    n_pos = max(0, polarity) + 1
    n_neg = max(0, -polarity) + 1
    tokens += list(rng.choice(POSITIVE_WORDS, size=n_pos, replace=True))
    tokens += list(rng.choice(NEGATIVE_WORDS, size=n_neg, replace=True))
    tokens += list(rng.choice(BACKGROUND_WORDS, size=3, replace=True))
    rng.shuffle(tokens)
    rating = polarity + 3  # monotone in planted sentiment balance
    if rating >= 4:
        sentiment = "positive"
    elif rating <= 2:
        sentiment = "negative"
    else:
        sentiment = "neutral"
    doc = C.DocumentRecord(id=doc_id, text=" ".join(tokens), rating=rating,
                           y_s=C.rescale_rating(rating), tokens=list(tokens))
    gold = {(a, sentiment) for a in aspects}
    return doc, gold


def make_corpus(n_docs, seed=0, prefix="d"):
    rng = np.random.default_rng(seed)
    docs, golds = [], []
    for i in range(n_docs):
        doc, gold = make_document(rng, f"{prefix}{i}")
        docs.append(doc)
        golds.append(gold)
    return docs, golds


def make_cache(docs, hidden_dim=16, num_layers=3, seed=7):
    cache = EmbeddingCache(hidden_dim=hidden_dim, num_layers=num_layers)
    for doc in docs:
        cache.add(doc.id, synthetic_embed(doc.tokens, hidden_dim, num_layers, seed))
    return cache


def make_vocab(docs):
    vocab = C.build_vocab([d.tokens for d in docs], PREPROCESS)
    for d in docs:
        d.bow = C.bow_vector(d.tokens, vocab)
    return vocab


def gold_sentences(docs, golds):
    return [C.LabeledSentence(id=d.id, text=d.text, gold=g) for d, g in zip(docs, golds)]
