"""Run a frozen transformer over a JSON-lines corpus and dump every layer's
token states into a TEC1 cache file."""

import json
import struct
from dataclasses import dataclass

import numpy as np
import torch
from transformers import AutoModel, AutoTokenizer

TEC_MAGIC = b"TEC1"
TEC_VERSION = 1


@dataclass
class ExtractorConfig:
    model: str = "roberta-base"
    max_tokens: int = 512
    input_path: str = ""
    output_path: str = ""
    device: str = "cpu"
    batch_size: int = 8

    def __post_init__(self):
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be >= 1")


def load_corpus(path):
    docs = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise ValueError(f"{path}:{lineno}: malformed JSON: {e}") from e
            docs.append((str(obj["id"]), obj["text"]))
    return docs


class CacheWriter:
    """Streams TEC1 records: header "TEC1", u32 version/H/L/count, then per
    record u32 id length, UTF-8 id, u32 N, and N*L*H little-endian f32."""

    def __init__(self, path, hidden_dim, num_layers):
        self.f = open(path, "wb")
        self.hidden_dim = hidden_dim
        self.num_layers = num_layers
        self.count = 0
        self.f.write(TEC_MAGIC)
        self._count_pos = self.f.tell()
        self.f.write(struct.pack("<IIII", TEC_VERSION, hidden_dim, num_layers, 0))

    def add(self, doc_id, states):
        states = np.ascontiguousarray(states, dtype="<f4")
        assert states.shape[1:] == (self.num_layers, self.hidden_dim)
        id_bytes = doc_id.encode("utf-8")
        self.f.write(struct.pack("<I", len(id_bytes)))
        self.f.write(id_bytes)
        self.f.write(struct.pack("<I", states.shape[0]))
        self.f.write(states.tobytes())
        self.count += 1

    def close(self):
        self.f.seek(self._count_pos)
        self.f.write(struct.pack("<IIII", TEC_VERSION, self.hidden_dim,
                                 self.num_layers, self.count))
        self.f.close()


def extract(cfg):
    """Tokenize, run the frozen model with all hidden states, and write the
    cache. Returns the sidecar summary dict."""
    tokenizer = AutoTokenizer.from_pretrained(cfg.model)
    model = AutoModel.from_pretrained(cfg.model)
    model.eval()
    for p in model.parameters():
        p.requires_grad_(False)
    device = torch.device(cfg.device)
    model.to(device)
    docs = load_corpus(cfg.input_path)
    hidden_dim = model.config.hidden_size
    num_layers = model.config.num_hidden_layers + 1  # embedding layer included
    writer = CacheWriter(cfg.output_path, hidden_dim, num_layers)
    skipped = []
    try:
        for start in range(0, len(docs), cfg.batch_size):
            chunk = docs[start:start + cfg.batch_size]
            enc = tokenizer([text for _, text in chunk], truncation=True,
                            max_length=cfg.max_tokens, padding=True,
                            return_tensors="pt").to(device)
            with torch.no_grad():
                out = model(**enc, output_hidden_states=True)
            # (L+1, B, T, H) -> (B, T, L+1, H)
            states = torch.stack(out.hidden_states).permute(1, 2, 0, 3).cpu().numpy()
            lengths = enc["attention_mask"].sum(dim=1).tolist()
            for (doc_id, _), row, n in zip(chunk, states, lengths):
                n = int(n)
                if n == 0:
                    skipped.append(doc_id)
                writer.add(doc_id, row[:n])
    finally:
        writer.close()
    return {"docs": len(docs), "skipped": skipped, "H": hidden_dim, "L": num_layers}
