"""Token-embedding cache: TEC1 binary format, layer pooling, synthetic embedder."""

import hashlib
import struct
from dataclasses import dataclass, field

import numpy as np

MAGIC = b"TEC1"
VERSION = 1


class CacheFormatError(Exception):
    pass


class CacheCorruptionError(Exception):
    pass


@dataclass
class CacheRecord:
    doc_id: str
    states: np.ndarray  # (N, L, H)


@dataclass
class EmbeddingCache:
    hidden_dim: int
    num_layers: int
    records: list = field(default_factory=list)

    def __post_init__(self):
        self._by_id = {r.doc_id: r for r in self.records}
        if len(self._by_id) != len(self.records):
            raise ValueError("duplicate doc ids in cache")

    def add(self, doc_id, states):
        states = np.asarray(states, dtype=np.float32)
        if states.shape[1:] != (self.num_layers, self.hidden_dim):
            raise ValueError(
                f"states shape {states.shape} does not match (N, {self.num_layers}, {self.hidden_dim})"
            )
        if doc_id in self._by_id:
            raise ValueError(f"duplicate doc id {doc_id!r}")
        rec = CacheRecord(doc_id, states)
        self.records.append(rec)
        self._by_id[doc_id] = rec

    def get(self, doc_id):
        rec = self._by_id.get(doc_id)
        return None if rec is None else rec.states

    def __contains__(self, doc_id):
        return doc_id in self._by_id

    def __len__(self):
        return len(self.records)


def pool_layers(layer_states, b):
    """Combine per-layer token states (L, H) into one H-vector with weights b."""
    layer_states = np.asarray(layer_states)
    b = np.asarray(b)
    if layer_states.shape[0] != b.shape[0]:
        raise ValueError(f"layer count {layer_states.shape[0]} != pooling weights {b.shape[0]}")
    return b @ layer_states


def write_cache(cache, path):
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<IIII", VERSION, cache.hidden_dim, cache.num_layers, len(cache.records)))
        for rec in cache.records:
            states = np.ascontiguousarray(rec.states, dtype="<f4")
            if not np.all(np.isfinite(states)):
                raise ValueError(f"non-finite values in record {rec.doc_id!r}")
            id_bytes = rec.doc_id.encode("utf-8")
            f.write(struct.pack("<I", len(id_bytes)))
            f.write(id_bytes)
            f.write(struct.pack("<I", states.shape[0]))
            f.write(states.tobytes())


def _read_exact(f, n, what):
    buf = f.read(n)
    if len(buf) != n:
        raise CacheCorruptionError(f"truncated file while reading {what}")
    return buf


def read_cache(path):
    with open(path, "rb") as f:
        magic = f.read(4)
        if magic != MAGIC:
            raise CacheFormatError(f"bad magic {magic!r}, expected {MAGIC!r}")
        version, hidden_dim, num_layers, count = struct.unpack("<IIII", _read_exact(f, 16, "header"))
        if version != VERSION:
            raise CacheFormatError(f"unsupported version {version}")
        cache = EmbeddingCache(hidden_dim=hidden_dim, num_layers=num_layers)
        for i in range(count):
            try:
                (id_len,) = struct.unpack("<I", _read_exact(f, 4, "doc-id length"))
                doc_id = _read_exact(f, id_len, "doc id").decode("utf-8")
                (n_tokens,) = struct.unpack("<I", _read_exact(f, 4, "token count"))
                payload = _read_exact(f, n_tokens * num_layers * hidden_dim * 4, "states")
            except CacheCorruptionError as e:
                raise CacheCorruptionError(f"record {i}: {e}") from e
            states = np.frombuffer(payload, dtype="<f4").reshape(n_tokens, num_layers, hidden_dim)
            cache.add(doc_id, states.copy())
    return cache


def synthetic_embed(tokens, hidden_dim, num_layers, seed):
    """Deterministic per-token states for transformer-free tests.

    Each distinct token string hashes (with the seed) to a fixed (L, H)
    block of values in [-1, 1]; identical tokens get identical states.
    """
    if hidden_dim < 1 or num_layers < 1:
        raise ValueError("hidden_dim and num_layers must be >= 1")
    states = np.empty((len(tokens), num_layers, hidden_dim), dtype=np.float64)
    memo = {}
    for i, tok in enumerate(tokens):
        block = memo.get(tok)
        if block is None:
            digest = hashlib.blake2b(f"{seed}\x00{tok}".encode(), digest_size=8).digest()
            rng = np.random.default_rng(int.from_bytes(digest, "little"))
            block = rng.uniform(-1.0, 1.0, size=(num_layers, hidden_dim))
            memo[tok] = block
        states[i] = block
    return states
