"""Curriculum starts: the built-in AI plays the first k ticks of the
learner's side, with k drawn uniformly from a shrinking range as
training progresses."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable

from ..config import GameSpec
from ..engine.step import step
from ..games.factory import new_game
from ..games.ai import simple_ai


def _linear_half(progress: float) -> float:
    """Aid decays linearly to zero over the first half of training."""
    return max(0.0, 1.0 - 2.0 * progress)


@dataclass
class CurriculumConfig:
    k_max: int = 1000
    schedule: Callable[[float], float] = field(default=_linear_half)
    control: Callable = field(default=simple_ai)   # built-in AI giving aid


def curriculum_reset(spec: GameSpec, seed: int, progress: float,
                     cfg: CurriculumConfig = None):
    """New game advanced k ~ Uniform(0, k_max * schedule(progress)) ticks
    under built-in-AI control of both sides.  Returns (state, k); the
    state's tick equals k.  At progress >= the schedule's zero point the
    game starts untouched at tick 0."""
    if not (0.0 <= progress <= 1.0):
        raise ValueError("progress must be in [0, 1]")
    cfg = cfg or CurriculumConfig()
    rng = random.Random(seed ^ 0x5EED)
    upper = cfg.k_max * cfg.schedule(progress)
    k = int(rng.uniform(0.0, upper)) if upper > 0 else 0
    state = new_game(spec, seed)
    control = cfg.control
    while state.tick < k and not state.is_terminal():
        step(state, (control(state, 0), control(state, 1)))
    return state, k
