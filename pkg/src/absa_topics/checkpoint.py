"""Model checkpoint container.

Layout: magic "ATC1"; u32 little-endian JSON header length; JSON header with
the model layout metadata and an ordered tensor manifest [{name, shape}];
then each tensor's values as 64-bit little-endian floats in manifest order.
Optimizer moment tensors (for --resume) ride in the same manifest under an
"opt." prefix, with step counts stored in the header.
"""

import json
import struct

import numpy as np
import torch

from .model import ModelParams, TopicLayout

MAGIC = b"ATC1"


class CheckpointError(Exception):
    pass


def _optimizer_tensors(params, state_dict):
    names = [n for n, _ in params.named_parameters()]
    tensors = {}
    steps = {}
    for idx, pstate in state_dict["state"].items():
        name = names[idx]
        step = pstate["step"]
        steps[name] = int(step.item() if torch.is_tensor(step) else step)
        tensors[f"opt.{name}.exp_avg"] = pstate["exp_avg"]
        tensors[f"opt.{name}.exp_avg_sq"] = pstate["exp_avg_sq"]
    return tensors, steps


def save_checkpoint(params, path, optimizer_state=None):
    layout = params.layout
    tensors = {name: p.detach() for name, p in params.named_parameters()}
    header = {
        "vocab_size": params.vocab_size,
        "aspect_labels": list(layout.aspect_labels),
        "sentiment_labels": list(layout.sentiment_labels),
        "num_background": layout.num_background,
        "hidden_dim": params.hidden_dim,
        "num_layers": params.num_layers,
        "mlp_hidden": params.mlp_hidden,
    }
    if optimizer_state is not None:
        opt_tensors, steps = _optimizer_tensors(params, optimizer_state)
        tensors.update(opt_tensors)
        header["optimizer_steps"] = steps
    header["tensors"] = [{"name": n, "shape": list(t.shape)} for n, t in tensors.items()]
    blob = json.dumps(header).encode("utf-8")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<I", len(blob)))
        f.write(blob)
        for t in tensors.values():
            f.write(np.ascontiguousarray(t.numpy(), dtype="<f8").tobytes())


def load_checkpoint(path):
    """Rebuild ModelParams (and optimizer state, when present) from a file."""
    with open(path, "rb") as f:
        if f.read(4) != MAGIC:
            raise CheckpointError(f"{path}: not a checkpoint file")
        (hlen,) = struct.unpack("<I", f.read(4))
        header = json.loads(f.read(hlen).decode("utf-8"))
        tensors = {}
        for entry in header["tensors"]:
            shape = tuple(entry["shape"])
            count = int(np.prod(shape)) if shape else 1
            buf = f.read(count * 8)
            if len(buf) != count * 8:
                raise CheckpointError(f"{path}: truncated tensor {entry['name']!r}")
            tensors[entry["name"]] = torch.from_numpy(
                np.frombuffer(buf, dtype="<f8").reshape(shape).copy()
            )
    layout = TopicLayout(
        aspect_labels=tuple(header["aspect_labels"]),
        sentiment_labels=tuple(header["sentiment_labels"]),
        num_background=header["num_background"],
    )
    params = ModelParams(header["vocab_size"], layout, header["hidden_dim"],
                         header["num_layers"], header["mlp_hidden"])
    with torch.no_grad():
        for name, p in params.named_parameters():
            if name not in tensors:
                raise CheckpointError(f"{path}: missing tensor {name!r}")
            p.copy_(tensors[name])
    optimizer_state = None
    if "optimizer_steps" in header:
        names = [n for n, _ in params.named_parameters()]
        state = {}
        for idx, name in enumerate(names):
            if name in header["optimizer_steps"]:
                state[idx] = {
                    "step": torch.tensor(float(header["optimizer_steps"][name])),
                    "exp_avg": tensors[f"opt.{name}.exp_avg"],
                    "exp_avg_sq": tensors[f"opt.{name}.exp_avg_sq"],
                }
        optimizer_state = {"state": state, "param_groups": [{
            "params": list(range(len(names))),
            "lr": 0.0, "betas": (0.9, 0.99), "eps": 1e-8, "weight_decay": 0,
            "amsgrad": False, "maximize": False, "foreach": None,
            "capturable": False, "differentiable": False, "fused": None,
        }]}
    return params, optimizer_state
