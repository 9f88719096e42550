"""Fused training step with per-block gradient routing.

Every loss term is computed once per step from shared forwards; each of
the ten blocks then receives the gradient of its own objective only,
via a separate ``torch.autograd.grad`` over the shared graph:

    enc_xf     rec * L_rec-f + kl * KL_xf + L_G
    enc_xh     rec * L_rec-h + kl * KL_xh + L_G
    enc_cf     rec * L_rec-f + kl * KL_cf + L_G
    enc_ch     rec * L_rec-h + kl * KL_ch + L_G
    dec_f      rec * L_rec-f
    dec_h      rec * L_rec-h
    composer   rec * L_rec   + L_G
    disc_g     adv_g * disc objective (global)
    disc_p     adv_p * disc objective (patch)
    classifier cls * L_C

with L_G = adv_g * gen objective (global) + adv_p * gen objective (patch)
+ gc * L_GC. In particular the full-image reconstruction L_rec updates the
composer but is not routed back into the encoders, and L_GC never updates
the classifier. Terms whose weight is zero are dropped from the objective;
a block whose objective is empty is not stepped at all, so its parameters
and optimizer state stay bitwise unchanged.

The single ``torch.Generator`` drives batch selection, posterior sampling
and prior sampling, so restoring its state resumes the exact run.
"""
from __future__ import annotations

import json
import time
from pathlib import Path
from typing import Callable

import torch

from ..checkpoint import TrainState, save_checkpoint
from ..config import LossWeights
from ..data.dataset import Batch, TensorDataset
from ..losses import (
    adv_disc_loss,
    adv_gen_loss,
    attr_bce,
    kl_loss,
    recon_l1,
    recon_l1_masked,
    total_loss,
)
from ..nets import GROUP_NAMES, reparameterize

LOG_KEYS = (
    "rec_f", "rec_h", "rec", "kl_xf", "kl_xh", "kl_cf", "kl_ch",
    "adv_g", "adv_p", "cls", "gc", "total",
)


class Trainer:
    def __init__(
        self,
        state: TrainState,
        dataset: TensorDataset,
        weights: LossWeights | None = None,
        log_path: str | Path | None = None,
    ):
        self.state = state
        self.dataset = dataset
        self.weights = weights if weights is not None else state.config.loss
        self.log_path = Path(log_path) if log_path else None
        if state.config.model.n_attr != dataset.n_attr:
            raise ValueError(
                f"model expects {state.config.model.n_attr} attributes, "
                f"dataset has {dataset.n_attr}"
            )

    def _draw_batch(self) -> Batch:
        gen = self.state.generator
        idx = torch.randint(
            0, len(self.dataset), (self.state.config.train.batch_size,), generator=gen
        )
        return self.dataset.batch(idx)

    def _loss_terms(self, batch: Batch) -> dict[str, torch.Tensor]:
        model = self.state.model
        gen = self.state.generator
        w = self.weights
        standard_kl = self.state.config.train.kl_standard

        c_star = model.classify(batch.x)
        posteriors = model.encode(batch.x_f, batch.x_h, c_star.detach())
        z = {
            key: reparameterize(mu, log_var, gen)
            for key, (mu, log_var) in posteriors.items()
        }

        x_f_rec = model.dec_f(z["xf"], z["cf"])
        x_h_rec = model.dec_h(z["xh"], z["ch"])
        x_rec = model.compose(z["xf"], z["cf"], z["xh"], z["ch"])

        dims = model.latent_dims
        dtype = batch.x.dtype
        z_prior = {
            key: torch.randn(batch.x.shape[0], dims[key], generator=gen, dtype=dtype)
            for key in ("xf", "cf", "xh", "ch")
        }
        x_rand = model.compose(z_prior["xf"], z_prior["cf"], z_prior["xh"], z_prior["ch"])

        scores = {
            "g": (model.disc_g(batch.x), model.disc_g(x_rec), model.disc_g(x_rand)),
            "p": (model.disc_p(batch.x), model.disc_p(x_rec), model.disc_p(x_rand)),
        }

        c_rec = model.classify(x_rec)
        c_rand = model.classify(x_rand)

        terms = {
            "rec_f": recon_l1(batch.x_f, x_f_rec),
            "rec_h": recon_l1_masked(batch.x_h, x_h_rec, batch.m_bg, w.beta),
            "rec": recon_l1_masked(batch.x, x_rec, batch.m_bg, w.beta),
            "cls": attr_bce(batch.c, c_star, w.eps),
            "gc": attr_bce(batch.c, c_rec, w.eps) + attr_bce(batch.c, c_rand, w.eps),
        }
        for key, (mu, log_var) in posteriors.items():
            terms[f"kl_{key}"] = kl_loss(mu, log_var, standard=standard_kl)
        for name in ("g", "p"):
            real, rec, rand = scores[name]
            terms[f"adv_{name}_disc"] = adv_disc_loss(real, [rec, rand], w.eps)
            terms[f"adv_{name}_gen"] = adv_gen_loss([rec, rand], w.eps)
        return terms

    def _group_objectives(
        self, terms: dict[str, torch.Tensor]
    ) -> dict[str, list[tuple[float, torch.Tensor]]]:
        w = self.weights
        shared_gen = [
            (w.adv_g, terms["adv_g_gen"]),
            (w.adv_p, terms["adv_p_gen"]),
            (w.gc, terms["gc"]),
        ]
        return {
            "enc_xf": [(w.rec, terms["rec_f"]), (w.kl, terms["kl_xf"]), *shared_gen],
            "enc_xh": [(w.rec, terms["rec_h"]), (w.kl, terms["kl_xh"]), *shared_gen],
            "enc_cf": [(w.rec, terms["rec_f"]), (w.kl, terms["kl_cf"]), *shared_gen],
            "enc_ch": [(w.rec, terms["rec_h"]), (w.kl, terms["kl_ch"]), *shared_gen],
            "dec_f": [(w.rec, terms["rec_f"])],
            "dec_h": [(w.rec, terms["rec_h"])],
            "composer": [(w.rec, terms["rec"]), *shared_gen],
            "disc_g": [(w.adv_g, terms["adv_g_disc"])],
            "disc_p": [(w.adv_p, terms["adv_p_disc"])],
            "classifier": [(w.cls, terms["cls"])],
        }

    def step(self) -> dict[str, float]:
        batch = self._draw_batch()
        terms = self._loss_terms(batch)
        for key, term in terms.items():
            if not torch.isfinite(term):
                raise FloatingPointError(
                    f"non-finite loss component {key!r} at step {self.state.step + 1}"
                )
        objectives = self._group_objectives(terms)
        params_by_group = self.state.model.param_groups()
        clip = self.state.config.train.clip_norm

        for name in GROUP_NAMES:
            weighted = [(lam, term) for lam, term in objectives[name] if lam != 0.0]
            if not weighted:
                continue  # empty objective: do not touch this block at all
            objective = weighted[0][0] * weighted[0][1]
            for lam, term in weighted[1:]:
                objective = objective + lam * term
            params = params_by_group[name]
            grads = torch.autograd.grad(
                objective, params, retain_graph=True, allow_unused=True
            )
            for p, g in zip(params, grads):
                p.grad = g
            if clip > 0:
                torch.nn.utils.clip_grad_norm_(params, clip)
            self.state.optimizers[name].step()
            for p in params:
                p.grad = None

        self.state.step += 1
        plain = {key: value.detach() for key, value in terms.items()}
        record = {key: float(plain[key]) for key in LOG_KEYS if key in plain}
        record["adv_g"] = float(plain["adv_g_disc"])
        record["adv_p"] = float(plain["adv_p_disc"])
        record["total"] = float(
            total_loss(
                plain["rec_f"], plain["rec_h"], plain["rec"],
                [plain["kl_xf"], plain["kl_xh"], plain["kl_cf"], plain["kl_ch"]],
                plain["adv_g_disc"], plain["adv_p_disc"],
                plain["cls"], plain["gc"], self.weights,
            )
        )
        return record

    def train(
        self,
        n_steps: int,
        checkpoint_path: str | Path | None = None,
        on_log: Callable[[int, dict[str, float]], None] | None = None,
    ) -> dict[str, float]:
        cfg = self.state.config.train
        log_file = self.log_path.open("a") if self.log_path else None
        record: dict[str, float] = {}
        started = time.monotonic()
        try:
            for _ in range(n_steps):
                record = self.step()
                step = self.state.step
                if step % cfg.log_every == 0 or step == 1:
                    entry = {"step": step, "elapsed": round(time.monotonic() - started, 3)}
                    entry.update(record)
                    if log_file:
                        log_file.write(json.dumps(entry) + "\n")
                        log_file.flush()
                    if on_log:
                        on_log(step, record)
                if checkpoint_path and step % cfg.checkpoint_every == 0:
                    save_checkpoint(checkpoint_path, self.state)
            if checkpoint_path:
                save_checkpoint(checkpoint_path, self.state)
        finally:
            if log_file:
                log_file.close()
        return record
