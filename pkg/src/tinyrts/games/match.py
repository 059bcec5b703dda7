"""Standalone match runner: two per-tick policies against each other,
with optional replay recording."""

from __future__ import annotations

from ..engine.state import state_hash
from ..engine.step import step
from ..engine.replay import ReplayLog
from .factory import new_game
from .outcome import outcome


def play_game(spec, seed, policy0, policy1, record=False, hash_every=0):
    """Run one game to termination.

    policy0/policy1: callables (state, player) -> list of Command,
    invoked every tick (frame-skipping policies return [] off-schedule).
    record=True builds a ReplayLog with a hash per tick.
    hash_every > 0 additionally returns the hash sequence sampled at that
    interval (cheap determinism probes without recording).

    Returns (final_state, replay_log_or_None, hash_samples).
    """
    state = new_game(spec, seed)
    log = ReplayLog(spec, seed) if record else None
    samples = []
    while not state.is_terminal():
        cmds = (tuple(policy0(state, 0)), tuple(policy1(state, 1)))
        step(state, cmds)
        if record:
            log.record(state.tick - 1, cmds, state_hash(state))
        if hash_every and state.tick % hash_every == 0:
            samples.append(state_hash(state))
    return state, log, samples


def play_match(spec, seeds, policy0, policy1, **kw):
    """Play one game per seed; returns (win0, win1, ties, lengths)."""
    wins = [0, 0]
    ties = 0
    lengths = []
    for seed in seeds:
        state, _, _ = play_game(spec, seed, policy0, policy1, **kw)
        out = outcome(state)
        if out.decided:
            wins[out.winner] += 1
        else:
            ties += 1
        lengths.append(state.tick)
    return wins[0], wins[1], ties, lengths
