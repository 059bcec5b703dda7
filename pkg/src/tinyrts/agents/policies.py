"""Simple tick-policies and wrappers.

A tick-policy is a callable (state, player) -> list of commands, invoked
every tick; issuing [] leaves durative commands running."""

from __future__ import annotations

import random

from ..games.actions import action_arity
from ..games.strategic import execute_strategic


def random_policy(arity=None, seed=0):
    """Uniform over strategic actions at every decision tick."""
    rng = random.Random(seed)

    def policy(state, player):
        n = arity if arity is not None else action_arity(state.kind)
        return execute_strategic(state, player, rng.randrange(n))
    return policy


def frame_skip_wrap(policy, skip):
    """Consult `policy` only on ticks == 0 (mod skip); in between, the
    last issued durative commands keep running."""
    if skip < 1:
        raise ValueError("skip must be >= 1")
    if skip == 1:
        return policy

    def wrapped(state, player):
        if state.tick % skip != 0:
            return []
        return policy(state, player)
    return wrapped


def model_policy(model, featurizer, skip=1, seed=0, greedy=False):
    """Plays strategic actions sampled from (or argmax of) a
    PolicyModel's distribution over the featurized player view."""
    rng = random.Random(seed)

    def policy(state, player):
        if state.tick % skip != 0:
            return []
        x = featurizer(state, player)
        pi, _ = model.forward(x)
        if greedy:
            action = int(pi.argmax())
        else:
            action = rng.choices(range(len(pi)), weights=pi)[0]
        return execute_strategic(state, player, action)
    return policy
