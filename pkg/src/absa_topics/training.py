"""Initialization, the Adam training loop with staggered warmup, gradient
computation and finite-difference gradient verification."""

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np
import torch

from . import model as M
from . import objective as O
from .seeding import init_beta, direct_seed, bootstrap_seed

log = logging.getLogger(__name__)


class DataError(Exception):
    pass


class NumericError(Exception):
    pass


@dataclass
class TrainConfig:
    layout: M.TopicLayout
    epochs: int = 50
    batch_size: int = 16
    learning_rate: float = 1e-5
    adam_beta1: float = 0.9
    adam_beta2: float = 0.99
    adam_eps: float = 1e-8
    zero_lr_epochs: int = 1
    warmup_epochs: int = 1
    weights: O.LossWeights = field(default_factory=O.LossWeights)
    alpha: float = 1.0
    rng_seed: int = 0
    mlp_hidden: int = 100
    seed_mode: str = "direct"  # direct | bootstrap | none
    renormalize_theta_a: bool = False

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        for b in (self.adam_beta1, self.adam_beta2):
            if not 0 <= b < 1:
                raise ValueError("adam betas must lie in [0, 1)")
        if self.seed_mode not in ("direct", "bootstrap", "none"):
            raise ValueError(f"unknown seed_mode {self.seed_mode!r}")


@dataclass
class TrainReport:
    history: list           # per-epoch LossBreakdown (per-document means)
    params: M.ModelParams
    seconds: float


def _fill_linear(layer, rng):
    fan_in, fan_out = layer.in_features, layer.out_features
    std = math.sqrt(2.0 / (fan_in + fan_out))
    w = rng.normal(0.0, std, size=(fan_out, fan_in))
    with torch.no_grad():
        layer.weight.copy_(torch.from_numpy(w))
        layer.bias.zero_()


def init_params(cfg, vocab, seeds, hidden_dim, num_layers, embeddings=None):
    """Deterministic parameter initialization.

    MLP weights are Xavier-normal with zero biases, layer pooling starts at
    the uniform average, s_senti starts at (+2, -2) for (positive, negative),
    and beta is Xavier-normal plus the configured seeding.
    """
    rng = np.random.default_rng(cfg.rng_seed)
    params = M.ModelParams(len(vocab), cfg.layout, hidden_dim, num_layers, cfg.mlp_hidden)
    for layer in (params.enc_hidden, params.enc_mu, params.enc_logvar,
                  params.senti_hidden, params.senti_out):
        _fill_linear(layer, rng)
    beta = init_beta(len(vocab), cfg.layout.K, rng)
    if seeds is not None and cfg.seed_mode != "none":
        if cfg.seed_mode == "bootstrap":
            if embeddings is None:
                raise ValueError("bootstrap seeding needs static embeddings")
            beta = bootstrap_seed(beta, seeds, vocab, cfg.layout, embeddings)
        else:
            beta = direct_seed(beta, seeds, vocab, cfg.layout)
    s_init = [2.0 if lab == "positive" else -2.0 for lab in cfg.layout.sentiment_labels]
    with torch.no_grad():
        params.beta.copy_(torch.from_numpy(beta))
        params.s_senti.copy_(torch.tensor(s_init, dtype=torch.float64))
    return params


def lr_schedule(epoch, step_fraction, cfg):
    """Zero LR for the first zero_lr_epochs, then a per-step linear ramp to
    learning_rate over warmup_epochs, then constant."""
    pos = epoch + step_fraction
    if pos < cfg.zero_lr_epochs:
        return 0.0
    ramp = pos - cfg.zero_lr_epochs
    if cfg.warmup_epochs > 0 and ramp < cfg.warmup_epochs:
        return cfg.learning_rate * ramp / cfg.warmup_epochs
    return cfg.learning_rate


def doc_states_tensor(doc, cache):
    states = cache.get(doc.id)
    if states is None:
        raise DataError(f"no embedding cache entry for document {doc.id!r}")
    return torch.from_numpy(np.ascontiguousarray(states, dtype=np.float64))


def batch_loss(params, batch, prior, weights, noises, renormalize_theta_a=False):
    """Summed weighted loss over a batch of (doc, states) pairs.

    noises holds one (eps, eps_tokens) pair per document. Documents without
    a rating contribute zero to both sentiment terms. Returns the scalar
    loss tensor and a per-document-mean LossBreakdown.
    """
    total = None
    kl_sum = recon_sum = asp_sum = senti_sum = 0.0
    for (doc, states), noise in zip(batch, noises):
        fs = M.forward(states, params, noise=noise,
                       renormalize_theta_a=renormalize_theta_a)
        kl = O.kl_loss(fs.mu_all, fs.sigma_all, prior)
        recon = O.recon_loss(doc.bow, fs.x_hat)
        if doc.y_s is not None:
            asp = O.sentiment_mse(fs.y_asp, doc.y_s)
            senti = O.sentiment_mse(fs.y_senti, doc.y_s)
        else:
            asp = torch.zeros((), dtype=kl.dtype)
            senti = torch.zeros((), dtype=kl.dtype)
        doc_total = O.total_loss(kl, recon, asp, senti, weights)
        if not torch.isfinite(doc_total):
            raise NumericError(f"non-finite loss for document {doc.id!r}")
        total = doc_total if total is None else total + doc_total
        kl_sum += kl.item()
        recon_sum += recon.item()
        asp_sum += asp.item()
        senti_sum += senti.item()
    n = len(batch)
    breakdown = O.LossBreakdown(
        kl=kl_sum / n, recon=recon_sum / n, s_asp_mse=asp_sum / n,
        s_senti_mse=senti_sum / n, total=total.item() / n,
    )
    return total, breakdown


def draw_batch_noises(batch, K, generator):
    return [M.draw_noise(states.shape[0], K, "train", generator)
            for _, states in batch]


def compute_gradients(params, batch, cfg, prior=None, noises=None, generator=None):
    """Gradients of the batch loss for every trainable parameter.

    Reparameterization noise is drawn once (or passed in) and held fixed, so
    the finite-difference checker sees the same stochastic objective.
    """
    if prior is None:
        prior = O.make_prior(cfg.alpha, cfg.layout.K)
    if noises is None:
        noises = draw_batch_noises(batch, cfg.layout.K, generator)
    params.zero_grad()
    total, breakdown = batch_loss(params, batch, prior, cfg.weights, noises,
                                  cfg.renormalize_theta_a)
    total.backward()
    grads = {name: p.grad.detach().clone() for name, p in params.named_parameters()}
    return grads, breakdown, noises


def grad_check(params, batch, cfg, h=1e-5, generator=None, min_coords=200):
    """Max relative error between analytic gradients and central differences.

    Samples at least min_coords coordinates spread over every parameter
    tensor; the same fixed noise drives both gradient paths.
    """
    prior = O.make_prior(cfg.alpha, cfg.layout.K)
    noises = draw_batch_noises(batch, cfg.layout.K, generator)
    grads, _, _ = compute_gradients(params, batch, cfg, prior=prior, noises=noises)

    def loss_value():
        with torch.no_grad():
            total, _ = batch_loss(params, batch, prior, cfg.weights, noises,
                                  cfg.renormalize_theta_a)
        return total.item()

    named = dict(params.named_parameters())
    rng = np.random.default_rng(0 if cfg.rng_seed is None else cfg.rng_seed)
    per_tensor = max(1, math.ceil(min_coords / len(named)))
    max_rel = 0.0
    for name, p in named.items():
        flat = p.data.view(-1)
        n = flat.shape[0]
        idxs = rng.choice(n, size=min(per_tensor, n), replace=False)
        for i in idxs:
            orig = flat[i].item()
            flat[i] = orig + h
            up = loss_value()
            flat[i] = orig - h
            down = loss_value()
            flat[i] = orig
            g_n = (up - down) / (2 * h)
            g_a = grads[name].view(-1)[i].item()
            rel = abs(g_a - g_n) / max(abs(g_a), abs(g_n), 1e-8)
            max_rel = max(max_rel, rel)
    return max_rel


def prepare_batches(documents, cache):
    """Pair every document with its (float64) cached states; fail on gaps."""
    return [(doc, doc_states_tensor(doc, cache)) for doc in documents]


def train(cfg, documents, cache, vocab, seeds, embeddings=None, params=None,
          optimizer_state=None, log_stream=None):
    """Mini-batch Adam training with the staggered warmup schedule.

    Fully deterministic for a given (cfg, data, rng_seed). Pass params (and
    optionally optimizer_state) to resume from a checkpoint.
    """
    t0 = time.perf_counter()
    data = prepare_batches(documents, cache)
    if params is None:
        params = init_params(cfg, vocab, seeds, cache.hidden_dim, cache.num_layers,
                             embeddings=embeddings)
    prior = O.make_prior(cfg.alpha, cfg.layout.K)
    optimizer = torch.optim.Adam(
        params.parameters(), lr=cfg.learning_rate,
        betas=(cfg.adam_beta1, cfg.adam_beta2), eps=cfg.adam_eps,
    )
    if optimizer_state is not None:
        optimizer.load_state_dict(optimizer_state)
    shuffle_rng = np.random.default_rng(cfg.rng_seed)
    noise_gen = torch.Generator().manual_seed(cfg.rng_seed)
    history = []
    n_docs = len(data)
    num_steps = max(1, math.ceil(n_docs / cfg.batch_size))
    for epoch in range(cfg.epochs):
        order = shuffle_rng.permutation(n_docs)
        kl = recon = asp = senti = tot = 0.0
        lr = 0.0
        for step in range(num_steps):
            batch = [data[i] for i in order[step * cfg.batch_size:(step + 1) * cfg.batch_size]]
            if not batch:
                continue
            lr = lr_schedule(epoch, step / num_steps, cfg)
            for group in optimizer.param_groups:
                group["lr"] = lr
            noises = draw_batch_noises(batch, cfg.layout.K, noise_gen)
            optimizer.zero_grad()
            total, bd = batch_loss(params, batch, prior, cfg.weights, noises,
                                   cfg.renormalize_theta_a)
            total.backward()
            optimizer.step()
            w = len(batch) / n_docs
            kl += bd.kl * w
            recon += bd.recon * w
            asp += bd.s_asp_mse * w
            senti += bd.s_senti_mse * w
            tot += bd.total * w
        epoch_bd = O.LossBreakdown(kl=kl, recon=recon, s_asp_mse=asp,
                                   s_senti_mse=senti, total=tot)
        history.append(epoch_bd)
        line = {"epoch": epoch, "kl": kl, "recon": recon, "s_asp": asp,
                "s_senti": senti, "total": tot, "lr": lr}
        if log_stream is not None:
            import json
            log_stream.write(json.dumps(line) + "\n")
        log.info("epoch %d: total=%.6f kl=%.6f recon=%.6f", epoch, tot, kl, recon)
        for p in params.parameters():
            if not torch.all(torch.isfinite(p)):
                raise NumericError(f"non-finite parameters after epoch {epoch}")
    return TrainReport(history=history, params=params,
                       seconds=time.perf_counter() - t0), optimizer.state_dict()
