"""Loss terms: Laplace-approximated Dirichlet prior, Gaussian KL, BoW
reconstruction likelihood, sentiment MSE, and their weighted sum."""

import math
from dataclasses import dataclass

import numpy as np
import torch

LOG_EPS = 1e-10


@dataclass(frozen=True)
class LossWeights:
    c1: float = 0.1   # KL
    c2: float = 0.1   # reconstruction
    c3: float = 10.0  # aspect-pooled sentiment MSE
    c4: float = 10.0  # sentiment-topic MSE

    def __post_init__(self):
        for c in (self.c1, self.c2, self.c3, self.c4):
            if not math.isfinite(c) or c < 0:
                raise ValueError("loss weights must be finite and non-negative")


@dataclass
class LossBreakdown:
    kl: float
    recon: float
    s_asp_mse: float
    s_senti_mse: float
    total: float


@dataclass(frozen=True)
class PriorParams:
    alpha: np.ndarray
    mu_p: np.ndarray
    sigma_p: np.ndarray


def dirichlet_prior_params(alpha):
    """Logistic-normal (mu_p, sigma_p) matching a Dirichlet(alpha) prior.

    mu_p_k = log(a_k) - mean_i log(a_i);
    sigma_p_k = (1/a_k)(1 - 2/K) + (1/K^2) sum_i 1/a_i.
    """
    alpha = np.asarray(alpha, dtype=np.float64)
    if np.any(alpha <= 0):
        raise ValueError("alpha entries must be positive")
    K = alpha.shape[0]
    log_a = np.log(alpha)
    mu_p = log_a - log_a.mean()
    sigma_p = (1.0 / alpha) * (1.0 - 2.0 / K) + (1.0 / K**2) * np.sum(1.0 / alpha)
    return mu_p, sigma_p


def make_prior(alpha, K=None):
    """PriorParams from a scalar concentration or a full alpha vector."""
    alpha = np.asarray(alpha, dtype=np.float64)
    if alpha.ndim == 0:
        if K is None:
            raise ValueError("scalar alpha needs an explicit K")
        alpha = np.full(K, float(alpha))
    mu_p, sigma_p = dirichlet_prior_params(alpha)
    return PriorParams(alpha=alpha, mu_p=mu_p, sigma_p=sigma_p)


def kl_loss(mu_all, sigma_all, prior):
    """KL( N(mu_all, diag sigma_all) || N(mu_p, diag sigma_p) ), non-negative."""
    mu_p = torch.as_tensor(prior.mu_p, dtype=mu_all.dtype)
    sigma_p = torch.as_tensor(prior.sigma_p, dtype=mu_all.dtype)
    if torch.any(sigma_all <= 0):
        raise ValueError("sigma_all entries must be positive")
    K = mu_all.shape[0]
    diff = mu_p - mu_all
    return 0.5 * (
        torch.sum(sigma_all / sigma_p)
        + torch.sum(diff * diff / sigma_p)
        - K
        + torch.sum(torch.log(sigma_p))
        - torch.sum(torch.log(sigma_all))
    )


def recon_loss(x, x_hat):
    """Negative BoW log-likelihood -sum_v x_v log x_hat_v (epsilon-floored)."""
    x = torch.as_tensor(x, dtype=x_hat.dtype)
    return -torch.sum(x * torch.log(x_hat + LOG_EPS))


def sentiment_mse(y_hat, y_s):
    return (y_hat - y_s) ** 2


def total_loss(kl, recon, s_asp_mse, s_senti_mse, weights):
    """Weighted per-document (or batch-summed) objective."""
    return (
        weights.c1 * kl
        + weights.c2 * recon
        + weights.c3 * s_asp_mse
        + weights.c4 * s_senti_mse
    )
