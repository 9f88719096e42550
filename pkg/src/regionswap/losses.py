"""Objective terms.

All reductions are means: over batch for every term, additionally over
pixels for L1 terms and over patches for patch discriminator scores.
Probabilities are clamped to [eps, 1 - eps] before every log.

The KL term follows the printed form 0.5*(mu^T mu + sum(sigma - log sigma
- 1)) where sigma is the posterior standard deviation exp(log_var / 2);
``standard=True`` switches to the conventional Gaussian KL against N(0, I),
which uses the variance exp(log_var) instead.
"""
from __future__ import annotations

from typing import Iterable, Sequence

import torch

from .config import LossWeights


def _log(p: torch.Tensor, eps: float) -> torch.Tensor:
    return torch.log(p.clamp(eps, 1.0 - eps))


def kl_loss(mu: torch.Tensor, log_var: torch.Tensor, *, standard: bool = False) -> torch.Tensor:
    """KL penalty for a diagonal Gaussian posterior, mean over batch.

    ``mu`` and ``log_var`` are (B, D); ``log_var`` is the log variance used
    by the sampler z = mu + eps * exp(log_var / 2).
    """
    if standard:
        spread = torch.exp(log_var) - log_var - 1.0
    else:
        spread = torch.exp(0.5 * log_var) - 0.5 * log_var - 1.0
    per_sample = 0.5 * (mu.pow(2).sum(dim=-1) + spread.sum(dim=-1))
    return per_sample.mean()


def recon_l1(x: torch.Tensor, y: torch.Tensor) -> torch.Tensor:
    """Plain L1 reconstruction, mean over batch, channels and pixels."""
    return (x - y).abs().mean()


def recon_l1_masked(
    x: torch.Tensor, y: torch.Tensor, bg_mask: torch.Tensor, beta: float
) -> torch.Tensor:
    """L1 with background pixels down-weighted by (1 - beta).

    ``bg_mask`` is (B, 1, H, W) with 1 on background, 0 on foreground.
    """
    weight = 1.0 - beta * bg_mask
    return (weight * (x - y).abs()).mean()


def adv_disc_loss(
    d_real: torch.Tensor, d_fakes: Sequence[torch.Tensor], eps: float = 1e-7
) -> torch.Tensor:
    """Discriminator objective -E[log D(x)] - sum_f E[log(1 - D(f))].

    Scores are probabilities, shaped (B,) for the global discriminator or
    (B, P) for the patch discriminator; the mean runs over all entries.
    """
    loss = -_log(d_real, eps).mean()
    for d_fake in d_fakes:
        loss = loss - _log(1.0 - d_fake, eps).mean()
    return loss


def adv_gen_loss(d_fakes: Sequence[torch.Tensor], eps: float = 1e-7) -> torch.Tensor:
    """Non-saturating generator objective -sum_f E[log D(f)]."""
    loss = None
    for d_fake in d_fakes:
        term = -_log(d_fake, eps).mean()
        loss = term if loss is None else loss + term
    if loss is None:
        raise ValueError("need at least one generated score")
    return loss


def attr_bce(target: torch.Tensor, prob: torch.Tensor, eps: float = 1e-7) -> torch.Tensor:
    """Binary cross-entropy summed over attributes, mean over batch."""
    logp = _log(prob, eps)
    log1p = _log(1.0 - prob, eps)
    per_sample = -(target * logp + (1.0 - target) * log1p).sum(dim=-1)
    return per_sample.mean()


def total_loss(
    rec_f: torch.Tensor,
    rec_h: torch.Tensor,
    rec: torch.Tensor,
    kls: Iterable[torch.Tensor],
    adv_g: torch.Tensor,
    adv_p: torch.Tensor,
    cls: torch.Tensor,
    gc: torch.Tensor,
    weights: LossWeights,
) -> torch.Tensor:
    """Weighted sum of every term, for reporting."""
    kl_sum = sum(kls)
    return (
        weights.rec * (rec_f + rec_h + rec)
        + weights.kl * kl_sum
        + weights.adv_g * adv_g
        + weights.adv_p * adv_p
        + weights.cls * cls
        + weights.gc * gc
    )
