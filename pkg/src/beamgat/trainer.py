"""Per-frame optimization with masked self-supervision and Adam.

Training never sees the ground-truth z of dropped points: the loss is
computed on a rotating, beam-stratified subset of OBSERVED nodes whose z
feature is zeroed for that epoch, mirroring the test condition.
"""

from __future__ import annotations

import dataclasses
import time

import numpy as np

from . import tensor_ad as T
from .graph import Graph
from .ingest import SparseFrame
from .model import ModelConfig, bind_params, forward, init_params
from .tensor_ad import Tape, Tensor

__all__ = ["AdamState", "TrainConfig", "TrainResult", "adam_step", "predict_dropped", "train_frame"]


@dataclasses.dataclass(frozen=True)
class TrainConfig:
    epochs: int = 200
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    mask_fraction: float = 0.25
    seed: int = 0
    patience: int = 30
    transductive: bool = False  # ablation only: trains on dropped ground truth (leaks)

    def __post_init__(self):
        if not 0.0 < self.mask_fraction < 1.0:
            raise ValueError("mask_fraction must be in (0, 1)")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")


@dataclasses.dataclass
class AdamState:
    m: dict[str, np.ndarray]
    v: dict[str, np.ndarray]
    step: int = 0

    @classmethod
    def zeros_like(cls, params: dict[str, np.ndarray]) -> "AdamState":
        return cls(
            m={k: np.zeros_like(p) for k, p in params.items()},
            v={k: np.zeros_like(p) for k, p in params.items()},
        )


@dataclasses.dataclass
class TrainResult:
    params: dict[str, np.ndarray]
    loss_history: list[float]
    train_time_s: float


def adam_step(
    params: dict[str, np.ndarray],
    grads: dict[str, np.ndarray],
    state: AdamState,
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> None:
    """Bias-corrected Adam update, in place."""
    state.step += 1
    t = state.step
    for name, p in params.items():
        g = grads[name]
        state.m[name] = beta1 * state.m[name] + (1 - beta1) * g
        state.v[name] = beta2 * state.v[name] + (1 - beta2) * g * g
        m_hat = state.m[name] / (1 - beta1**t)
        v_hat = state.v[name] / (1 - beta2**t)
        p -= lr * m_hat / (np.sqrt(v_hat) + eps)


def _stratified_subset(
    beams: np.ndarray, candidates: np.ndarray, fraction: float, rng: np.random.Generator
) -> np.ndarray:
    """Pick ~fraction of candidate nodes, spread across beams."""
    chosen = []
    for b in np.unique(beams[candidates]):
        idx = candidates[beams[candidates] == b]
        q = max(1, int(round(fraction * idx.size)))
        chosen.append(rng.choice(idx, size=min(q, idx.size), replace=False))
    return np.sort(np.concatenate(chosen))


def train_frame(
    frame: SparseFrame,
    graph: Graph,
    model_cfg: ModelConfig,
    train_cfg: TrainConfig,
) -> TrainResult:
    """Fit one model to one frame; returns the parameters that achieved the
    lowest training loss, the loss history, and wall time."""
    observed = np.flatnonzero(frame.observed_mask)
    dropped = np.flatnonzero(frame.dropped_mask)
    if observed.size == 0:
        raise ValueError("frame has no observed points")

    params = init_params(model_cfg, train_cfg.seed)
    state = AdamState.zeros_like(params)
    base_features = graph.features
    dropped_set = frozenset(dropped.tolist())

    best_loss = np.inf
    best_params = {k: p.copy() for k, p in params.items()}
    since_best = 0
    history: list[float] = []
    t0 = time.perf_counter()
    for epoch in range(train_cfg.epochs):
        rng = np.random.default_rng([train_cfg.seed, epoch])
        if train_cfg.transductive:
            sup = dropped
            feats = base_features
        else:
            sup = _stratified_subset(
                frame.cloud.beam, observed, train_cfg.mask_fraction, rng
            )
            assert not dropped_set.intersection(sup.tolist()), "supervision leaked into dropped set"
            feats = base_features.copy()
            feats[sup, 2] = 0.0

        tape = Tape()
        bound = bind_params(params, tape)
        z_hat = forward(graph, Tensor(feats), bound, model_cfg)
        loss = T.mse_loss(T.take_rows(z_hat, sup), frame.z_truth[sup])
        loss_val = float(loss.data)
        if not np.isfinite(loss_val):
            raise FloatingPointError(f"non-finite training loss at epoch {epoch}")
        history.append(loss_val)
        if loss_val < best_loss:
            best_loss = loss_val
            best_params = {k: p.copy() for k, p in params.items()}
            since_best = 0
        else:
            since_best += 1
            if since_best >= train_cfg.patience:
                break
        tape.backward(loss)
        grads = {k: bound[k].grad if bound[k].grad is not None else np.zeros_like(params[k]) for k in params}
        adam_step(params, grads, state, train_cfg.learning_rate,
                  train_cfg.beta1, train_cfg.beta2, train_cfg.eps)
    elapsed = time.perf_counter() - t0
    return TrainResult(params=best_params, loss_history=history, train_time_s=elapsed)


def predict_dropped(
    frame: SparseFrame,
    graph: Graph,
    params: dict[str, np.ndarray],
    model_cfg: ModelConfig,
) -> tuple[np.ndarray, float]:
    """Single forward with the frame's true masking; returns z estimates at
    the dropped indices and elapsed time."""
    t0 = time.perf_counter()
    bound = bind_params(params, None)
    z_hat = forward(graph, Tensor(graph.features), bound, model_cfg)
    dropped = np.flatnonzero(frame.dropped_mask)
    out = z_hat.data[dropped].copy()
    return out, time.perf_counter() - t0


def write_loss_history(history: list[float], times_ms: list[float] | None, path: str) -> None:
    """Per-frame loss CSV: epoch,loss,elapsed_ms."""
    with open(path, "w") as fh:
        fh.write("epoch,loss,elapsed_ms\n")
        for i, loss in enumerate(history):
            ms = times_ms[i] if times_ms else 0.0
            fh.write(f"{i},{loss:.9g},{ms:.3f}\n")
