"""T-step returns and the synchronous actor-critic update."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class TrainerConfig:
    T: int = 6
    gamma: float = 0.99
    lr: float = 1e-3
    value_weight: float = 0.5
    entropy_weight: float = 0.01
    frame_skip: int = 50
    grad_clip: float = 1.0

    def __post_init__(self):
        if self.T < 1:
            raise ValueError("T must be >= 1")
        if not (0.0 < self.gamma <= 1.0):
            raise ValueError("gamma must be in (0, 1]")
        if self.frame_skip < 1:
            raise ValueError("frame_skip must be >= 1")


def t_step_returns(rewards, terminals, bootstrap, gamma):
    """R_i = sum_{t=i..T} gamma^{t-i} r_t + gamma^{T-i+1} V(s_T), with the
    recursion cut at terminal frames (no bootstrap across episodes)."""
    rewards = np.asarray(rewards, dtype=np.float64)
    terminals = np.asarray(terminals, dtype=bool)
    t = rewards.shape[0]
    out = np.empty(t, dtype=np.float64)
    acc = float(bootstrap)
    for i in range(t - 1, -1, -1):
        if terminals[i]:
            acc = 0.0
        acc = rewards[i] + gamma * acc
        out[i] = acc
    return out


def actor_critic_update(model, batch, cfg: TrainerConfig):
    """One synchronous gradient step from a batch of trajectories.

    batch: dict with 's' (M, T, ...) feature frames, 'a' (M, T) actions,
    'r' (M, T) rewards, 'terminal' (M, T) flags.  The last frame of each
    row is the bootstrap frame: V of it seeds the T-step returns and it
    contributes no policy-gradient term of its own.
    Returns diagnostics dict."""
    s = np.asarray(batch["s"], dtype=np.float64)
    a = np.asarray(batch["a"])
    r = np.asarray(batch["r"], dtype=np.float64)
    term = np.asarray(batch["terminal"], dtype=bool)
    m, t = r.shape
    if t < 2:
        raise ValueError("need at least 2 frames (decision + bootstrap)")
    states, actions, returns = [], [], []
    for i in range(m):
        boot = 0.0 if term[i, -1] else model.forward(s[i, -1])[1]
        rs = t_step_returns(r[i, 1:], term[i, 1:], boot, cfg.gamma)
        for j in range(t - 1):
            if term[i, j]:
                continue  # terminal frames carry no decision
            states.append(s[i, j])
            actions.append(a[i, j])
            returns.append(rs[j])
    if not states:
        return {"loss": 0.0, "policy_loss": 0.0, "value_loss": 0.0,
                "entropy": 0.0, "grad_norm": 0.0, "samples": 0}
    loss, grad, diag = model.loss_and_grad(
        np.stack(states), np.asarray(actions), np.asarray(returns),
        cfg.value_weight, cfg.entropy_weight)
    norm = float(np.linalg.norm(grad))
    if cfg.grad_clip and norm > cfg.grad_clip:
        grad = grad * (cfg.grad_clip / norm)
    model.apply_grad(grad, cfg.lr)
    diag["grad_norm"] = norm
    diag["samples"] = len(states)
    return diag
