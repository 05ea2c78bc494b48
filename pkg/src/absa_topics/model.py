"""Forward pass: token/document posteriors, reparameterized topics, reconstruction,
token attention, aspect-sentiment pooling and the two document sentiment heads."""

from dataclasses import dataclass

import torch
import torch.nn.functional as F


class EmptyDocumentError(Exception):
    pass


@dataclass(frozen=True)
class TopicLayout:
    aspect_labels: tuple
    sentiment_labels: tuple = ("positive", "negative")
    num_background: int = 0

    def __post_init__(self):
        if self.A < 1 or self.S < 1:
            raise ValueError("need at least one aspect and one sentiment topic")
        labels = list(self.aspect_labels) + list(self.sentiment_labels)
        if len(set(labels)) != len(labels):
            raise ValueError("topic labels must be unique")

    @property
    def A(self):
        return len(self.aspect_labels)

    @property
    def S(self):
        return len(self.sentiment_labels)

    @property
    def B(self):
        return self.num_background

    @property
    def K(self):
        return self.A + self.S + self.B

    @property
    def aspect_slice(self):
        return slice(0, self.A)

    @property
    def sentiment_slice(self):
        return slice(self.A, self.A + self.S)

    @property
    def background_slice(self):
        return slice(self.A + self.S, self.K)


class ModelParams(torch.nn.Module):
    """All trainable parameters.

    pool_b combines transformer layers per token; a shared softplus hidden
    layer feeds the mu / log-variance encoder heads; a separate hidden layer
    feeds the per-aspect token sentiment head; beta is the (V, K) topic-word
    matrix and s_senti the per-sentiment-topic coefficients.
    """

    def __init__(self, vocab_size, layout, hidden_dim, num_layers, mlp_hidden=100):
        super().__init__()
        self.vocab_size = vocab_size
        self.layout = layout
        self.hidden_dim = hidden_dim
        self.num_layers = num_layers
        self.mlp_hidden = mlp_hidden
        K, A, S = layout.K, layout.A, layout.S
        dtype = torch.float64
        self.pool_b = torch.nn.Parameter(torch.full((num_layers,), 1.0 / num_layers, dtype=dtype))
        self.enc_hidden = torch.nn.Linear(hidden_dim, mlp_hidden, dtype=dtype)
        self.enc_mu = torch.nn.Linear(mlp_hidden, K, dtype=dtype)
        self.enc_logvar = torch.nn.Linear(mlp_hidden, K, dtype=dtype)
        self.senti_hidden = torch.nn.Linear(hidden_dim, mlp_hidden, dtype=dtype)
        self.senti_out = torch.nn.Linear(mlp_hidden, A, dtype=dtype)
        self.beta = torch.nn.Parameter(torch.zeros(vocab_size, K, dtype=dtype))
        self.s_senti = torch.nn.Parameter(torch.zeros(S, dtype=dtype))


@dataclass
class ForwardState:
    mu_tokens: torch.Tensor     # (N, K)
    sigma_tokens: torch.Tensor  # (N, K) diagonal variances
    mu_all: torch.Tensor        # (K,)
    sigma_all: torch.Tensor     # (K,)
    theta_all: torch.Tensor     # (K,)
    theta_tokens: torch.Tensor  # (N, K)
    attention: torch.Tensor     # (N, K)
    s_tokens: torch.Tensor      # (N, A)
    s_asp: torch.Tensor         # (A,)
    x_hat: torch.Tensor         # (V,)
    y_asp: torch.Tensor         # scalar in (0, 1)
    y_senti: torch.Tensor       # scalar in (0, 1)


def encode(doc_states, params):
    """Per-token Gaussian posteriors and their mean-pooled document posterior.

    doc_states is the (N, L, H) tensor of per-token layer states.
    """
    if doc_states.shape[0] == 0:
        raise EmptyDocumentError("document has no tokens")
    x_e = torch.einsum("nlh,l->nh", doc_states, params.pool_b)
    h = F.softplus(params.enc_hidden(x_e))
    mu_tokens = params.enc_mu(h)
    sigma_tokens = torch.exp(params.enc_logvar(h))
    return mu_tokens, sigma_tokens, mu_tokens.mean(dim=0), sigma_tokens.mean(dim=0)


def sample_theta(mu, sigma, eps):
    """Reparameterized topic distribution softmax(mu + sqrt(sigma) * eps)."""
    return torch.softmax(mu + torch.sqrt(sigma) * eps, dim=-1)


def reconstruct(theta_all, beta):
    """Product-of-experts BoW reconstruction softmax(beta @ theta)."""
    return torch.softmax(beta @ theta_all, dim=-1)


def token_attention(theta_tokens):
    """Column-normalize token-topic probabilities so each topic's weights sum to 1."""
    return theta_tokens / theta_tokens.sum(dim=0, keepdim=True)


def token_sentiments(doc_states, params):
    x_e = torch.einsum("nlh,l->nh", doc_states, params.pool_b)
    return params.senti_out(F.softplus(params.senti_hidden(x_e)))


def aspect_sentiment_pool(attention, s_tokens):
    """Attention-weighted pooling of token sentiments over the aspect topics."""
    A = s_tokens.shape[1]
    return (attention[:, :A] * s_tokens).sum(dim=0)


def doc_sentiment_heads(theta_a, s_asp, theta_s, s_senti):
    y_asp = torch.sigmoid(torch.dot(s_asp, theta_a))
    y_senti = torch.sigmoid(torch.dot(s_senti, theta_s))
    return y_asp, y_senti


def draw_noise(n_tokens, K, mode, generator=None, dtype=torch.float64):
    """Document-level and per-token reparameterization noise; zeros at inference."""
    if mode == "train":
        eps = torch.randn(K, generator=generator, dtype=dtype)
        eps_tokens = torch.randn(n_tokens, K, generator=generator, dtype=dtype)
    elif mode == "infer":
        eps = torch.zeros(K, dtype=dtype)
        eps_tokens = torch.zeros(n_tokens, K, dtype=dtype)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return eps, eps_tokens


def forward(doc_states, params, mode="infer", generator=None, noise=None,
            renormalize_theta_a=False):
    """Full forward pass for one document.

    noise, when given, is a fixed (eps, eps_tokens) pair and overrides mode;
    the gradient checker relies on this to hold the sampled path constant.
    """
    layout = params.layout
    mu_tokens, sigma_tokens, mu_all, sigma_all = encode(doc_states, params)
    if noise is None:
        noise = draw_noise(doc_states.shape[0], layout.K, mode, generator,
                           dtype=mu_all.dtype)
    eps, eps_tokens = noise
    theta_all = sample_theta(mu_all, sigma_all, eps)
    theta_tokens = sample_theta(mu_tokens, sigma_tokens, eps_tokens)
    attention = token_attention(theta_tokens)
    s_tokens = token_sentiments(doc_states, params)
    s_asp = aspect_sentiment_pool(attention, s_tokens)
    x_hat = reconstruct(theta_all, params.beta)
    theta_a = theta_all[layout.aspect_slice]
    if renormalize_theta_a:
        theta_a = theta_a / theta_a.sum()
    theta_s = theta_all[layout.sentiment_slice]
    y_asp, y_senti = doc_sentiment_heads(theta_a, s_asp, theta_s, params.s_senti)
    return ForwardState(
        mu_tokens=mu_tokens, sigma_tokens=sigma_tokens,
        mu_all=mu_all, sigma_all=sigma_all,
        theta_all=theta_all, theta_tokens=theta_tokens,
        attention=attention, s_tokens=s_tokens, s_asp=s_asp,
        x_hat=x_hat, y_asp=y_asp, y_senti=y_senti,
    )
