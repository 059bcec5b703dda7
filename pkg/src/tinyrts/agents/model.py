"""Reference policy-value model: linear map from the flattened feature
tensor to (action logits, value), with hand-derived gradients.  The
interface (forward / get_params / set_params / apply_grad) admits any
external differentiable model."""

from __future__ import annotations

import struct

import numpy as np

MAGIC = b"ELFM"
VERSION = 1


class CheckpointError(Exception):
    pass


class LinearPolicyModel:
    """pi = softmax(Wp x + bp), V = tanh(wv . x + bv).

    Parameters are float64 internally (finite-difference checks need
    the headroom); checkpoints store little-endian float32.
    """

    def __init__(self, input_dim, arity, seed=0):
        if arity < 2:
            raise ValueError("arity must be at least 2")
        self.input_dim = int(input_dim)
        self.arity = int(arity)
        rng = np.random.default_rng(seed)
        scale = 1.0 / np.sqrt(input_dim)
        self.Wp = rng.normal(0.0, scale, (arity, input_dim))
        self.bp = np.zeros(arity)
        self.wv = rng.normal(0.0, scale, input_dim)
        self.bv = 0.0

    # -- forward ------------------------------------------------------

    def forward(self, x):
        """x: (input_dim,) or any shape that flattens to it.
        Returns (pi, V) with pi summing to 1 and V in [-1, 1]."""
        x = np.asarray(x, dtype=np.float64).reshape(-1)
        z = self.Wp @ x + self.bp
        z -= z.max()
        e = np.exp(z)
        pi = e / e.sum()
        v = float(np.tanh(self.wv @ x + self.bv))
        return pi, v

    # -- parameter vector ---------------------------------------------

    def num_params(self):
        return self.Wp.size + self.bp.size + self.wv.size + 1

    def get_params(self):
        return np.concatenate([
            self.Wp.reshape(-1), self.bp, self.wv, [self.bv]])

    def set_params(self, flat):
        flat = np.asarray(flat, dtype=np.float64).reshape(-1)
        if flat.size != self.num_params():
            raise ValueError("parameter vector size mismatch")
        n = self.Wp.size
        self.Wp = flat[:n].reshape(self.Wp.shape).copy()
        a = self.arity
        self.bp = flat[n:n + a].copy()
        self.wv = flat[n + a:n + a + self.input_dim].copy()
        self.bv = float(flat[-1])

    def apply_grad(self, grad, lr):
        self.set_params(self.get_params() - lr * grad)

    # -- loss gradient (manual) ---------------------------------------

    def loss_and_grad(self, states, actions, returns, value_weight=0.5,
                      entropy_weight=0.01, advantages=None):
        """Advantage actor-critic loss over one batch.

        L = mean_i [ -log pi(a_i) * adv_i + value_weight * (V_i - R_i)^2
                     - entropy_weight * H(pi_i) ]
        with adv_i treated as a constant (no gradient flows from the
        advantage into the value head).  When `advantages` is None it is
        computed here as R_i - V(s_i); pass it explicitly to make the
        loss a plain function of the parameters (finite-difference
        checks need that).
        Returns (loss, flat gradient, diagnostics dict)."""
        states = np.asarray(states, dtype=np.float64)
        m = states.shape[0]
        xs = states.reshape(m, -1)
        if advantages is not None:
            advantages = np.asarray(advantages, dtype=np.float64)
        gWp = np.zeros_like(self.Wp)
        gbp = np.zeros_like(self.bp)
        gwv = np.zeros_like(self.wv)
        gbv = 0.0
        loss = ploss = vloss = ent = 0.0
        for i in range(m):
            x = xs[i]
            a = int(actions[i])
            r = float(returns[i])
            pi, v = self.forward(x)
            logpi = np.log(pi + 1e-12)
            adv = (r - v) if advantages is None else float(advantages[i])
            h = float(-(pi * logpi).sum())
            ploss += -logpi[a] * adv
            vloss += (v - r) ** 2
            ent += h
            # policy head: d(-logpi[a])/dz = pi - onehot(a); entropy
            # bonus: d(-H)/dz_k = pi_k (logpi_k + H)
            gz = (pi - np.eye(self.arity)[a]) * adv \
                + entropy_weight * pi * (logpi + h)
            gWp += np.outer(gz, x)
            gbp += gz
            # value head through tanh
            gu = value_weight * 2.0 * (v - r) * (1.0 - v * v)
            gwv += gu * x
            gbv += gu
        inv = 1.0 / m
        loss = (ploss + value_weight * vloss - entropy_weight * ent) * inv
        grad = np.concatenate([
            (gWp * inv).reshape(-1), gbp * inv, gwv * inv, [gbv * inv]])
        diag = {"loss": loss, "policy_loss": ploss * inv,
                "value_loss": vloss * inv, "entropy": ent * inv}
        return loss, grad, diag

    # -- checkpoints ("ELFM") -----------------------------------------

    def save_bytes(self):
        params = self.get_params().astype("<f4")
        head = MAGIC + struct.pack("<HiiQ", VERSION, self.arity,
                                   self.input_dim, params.size)
        return head + params.tobytes()

    def save(self, path):
        with open(path, "wb") as f:
            f.write(self.save_bytes())

    @classmethod
    def load_bytes(cls, data):
        if len(data) < 22 or data[:4] != MAGIC:
            raise CheckpointError("not a model checkpoint (bad magic)")
        version, arity, input_dim, count = struct.unpack("<HiiQ", data[4:22])
        if version != VERSION:
            raise CheckpointError(f"unsupported checkpoint version {version}")
        params = np.frombuffer(data[22:], dtype="<f4")
        if params.size != count:
            raise CheckpointError("parameter count mismatch")
        model = cls(input_dim, arity, seed=0)
        if count != model.num_params():
            raise CheckpointError("parameter count inconsistent with shape")
        model.set_params(params.astype(np.float64))
        return model

    @classmethod
    def load(cls, path):
        with open(path, "rb") as f:
            return cls.load_bytes(f.read())
