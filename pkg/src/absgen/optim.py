"""Optimizers and the batched training loop.

Training draws each epoch's pairs and batch order from an RNG stream
derived only from (seed, epoch), so resuming, re-running, or reordering
epochs cannot change what any given epoch sees.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from absgen import models as M
from absgen import tensor as T
from absgen.errors import ContractError


@dataclass
class AdamState:
    lr: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)


def adam_step(params: M.Params, state: AdamState):
    """One bias-corrected Adam update over every parameter with a gradient."""
    state.t += 1
    b1t = 1.0 - state.beta1 ** state.t
    b2t = 1.0 - state.beta2 ** state.t
    for name, p in params.tensors.items():
        if p.grad is None:
            continue
        g = p.grad
        m = state.m.setdefault(name, np.zeros_like(p.data))
        v = state.v.setdefault(name, np.zeros_like(p.data))
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * g * g
        p.data -= state.lr * (m / b1t) / (np.sqrt(v / b2t) + state.eps)


def sgd_step(params: M.Params, lr: float):
    if lr <= 0:
        raise ContractError(f"sgd lr must be positive, got {lr}")
    for p in params.tensors.values():
        if p.grad is not None:
            p.data -= lr * p.grad


def zero_grads(params: M.Params):
    for p in params.tensors.values():
        p.grad = None


def epoch_rng(seed: int, epoch: int) -> np.random.Generator:
    """Stream for one epoch, independent of how prior epochs were run."""
    return np.random.default_rng(np.random.SeedSequence([seed, epoch]))


@dataclass
class EpochLog:
    epoch: int
    loss: float
    n_pairs: int


def _batch_loss(spec: M.ModelSpec, params: M.Params, a, b, labels) -> T.Tensor:
    if spec.head == "scalar":
        pred = M.forward_pair_batch(spec, params, a, b)
        target = M.targets_for(spec, labels)
        if spec.output == "signed_distance":
            return M.loss_mse(pred, target)
        return M.loss_bce(pred, target)
    energy = M.forward_siamese_batch(spec, params, a, b)
    return M.loss_contrastive(energy, labels)


def train(spec: M.ModelSpec, params: M.Params, sampler, *, epochs: int,
          pairs_per_epoch: int, batch_size: int = 32, seed: int = 0,
          optimizer: AdamState | None = None, on_epoch=None):
    """Run ``epochs`` epochs of minibatch training.

    ``sampler(rng, count)`` must return ``(a, b, labels)`` arrays with the
    pair samples already in model input layout. Returns the per-epoch logs;
    ``params`` is updated in place.
    """
    if epochs < 0:
        raise ContractError(f"epochs must be >= 0, got {epochs}")
    if pairs_per_epoch < 1 or batch_size < 1:
        raise ContractError("pairs_per_epoch and batch_size must be >= 1")
    opt = optimizer if optimizer is not None else AdamState()
    logs = []
    for epoch in range(epochs):
        rng = epoch_rng(seed, epoch)
        a, b, labels = sampler(rng, pairs_per_epoch)
        order = rng.permutation(len(labels))
        total = 0.0
        for start in range(0, len(order), batch_size):
            idx = order[start : start + batch_size]
            zero_grads(params)
            loss = _batch_loss(spec, params, a[idx], b[idx], labels[idx])
            loss.backward()
            adam_step(params, opt)
            total += float(loss.data) * len(idx)
        log = EpochLog(epoch=epoch, loss=total / len(order), n_pairs=len(order))
        logs.append(log)
        if on_epoch is not None:
            on_epoch(log)
    return logs
