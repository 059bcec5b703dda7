"""Root-parallel UCT search over strategic actions.

Each tree runs independent simulations on private clones of the root
state; plies alternate between the players every frame-skip window and
rollouts are uniform-random self-play to terminal (or a tick cap, scored
by the sign of the base-HP difference)."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from ..engine.step import step
from ..games.actions import action_arity
from ..games.strategic import execute_strategic
from ..games.outcome import win_value


@dataclass
class MctsConfig:
    num_trees: int = 8
    rollouts_per_tree: int = 100
    c: float = 1.4
    rollout_cap: int = 3000
    frame_skip: int = 50

    def __post_init__(self):
        if self.num_trees < 1 or self.rollouts_per_tree < 1:
            raise ValueError("num_trees and rollouts_per_tree must be >= 1")


class _Node:
    __slots__ = ("children", "visits", "value", "mover")

    def __init__(self, mover):
        self.children = None    # action -> _Node, None until expanded
        self.visits = 0
        self.value = 0.0        # mean value from the ROOT player's view
        self.mover = mover


def _advance(state, mover, action, skip):
    """Apply one strategic action for `mover`, then run one frame-skip
    window of ticks (durative commands carry the other player)."""
    cmds = [(), ()]
    cmds[mover] = execute_strategic(state, mover, action)
    step(state, cmds)
    for _ in range(skip - 1):
        if state.is_terminal():
            break
        step(state, ((), ()))


def _score(state, player):
    """Terminal: +-1/0 from win_value.  Capped rollout: normalized
    material difference (unit HP, with base HP dominating naturally,
    plus banked resources) as a graded win proxy, so short rollouts
    still rank positions."""
    if state.is_terminal():
        return 2.0 * win_value(state, player) - 1.0
    material = [0.0, 0.0]
    for u in state.units.values():
        if u.player in (0, 1):
            material[u.player] += u.hp
    material[0] += 0.5 * state.resources[0]
    material[1] += 0.5 * state.resources[1]
    total = material[0] + material[1]
    if total <= 0.0:
        return 0.0
    return (material[player] - material[player ^ 1]) / total


def _rollout(state, player, rng, cfg, arity):
    limit = state.tick + cfg.rollout_cap
    mover = player
    while not state.is_terminal() and state.tick < limit:
        _advance(state, mover, rng.randrange(arity), cfg.frame_skip)
        mover ^= 1
    return _score(state, player)


def _simulate(node, state, player, rng, cfg, arity):
    """One UCT simulation; returns the value (root player's view)."""
    path = [node]
    # selection
    while node.children is not None and not state.is_terminal():
        best, best_score = None, None
        log_n = math.log(node.visits + 1)
        for action, child in node.children.items():
            if child.visits == 0:
                best, best_action = child, action
                best_score = None
                break
            mean = child.value if node.mover == player else -child.value
            ucb = mean + cfg.c * math.sqrt(log_n / child.visits)
            if best_score is None or ucb > best_score:
                best, best_action, best_score = child, action, ucb
        _advance(state, node.mover, best_action, cfg.frame_skip)
        node = best
        path.append(node)
    # expansion
    if not state.is_terminal():
        node.children = {a: _Node(node.mover ^ 1) for a in range(arity)}
        value = _rollout(state, player, rng, cfg, arity)
    else:
        value = _score(state, player)
    # backpropagation
    for n in path:
        n.visits += 1
        n.value += (value - n.value) / n.visits
    return value


def mcts_decide(state, player, cfg: MctsConfig, seed=0, return_visits=False):
    """Argmax of root visit counts summed over num_trees independent
    trees.  The root state is never modified."""
    if state.is_terminal():
        raise ValueError("mcts_decide on a terminal state")
    arity = action_arity(state.kind)
    totals = [0] * arity
    for t in range(cfg.num_trees):
        rng = random.Random((seed << 16) ^ t)
        root = _Node(player)
        root.children = {a: _Node(player ^ 1) for a in range(arity)}
        for _ in range(cfg.rollouts_per_tree):
            _simulate(root, state.clone(), player, rng, cfg, arity)
        for a, child in root.children.items():
            totals[a] += child.visits
    best = max(range(arity), key=lambda a: totals[a])
    if return_visits:
        return best, totals
    return best


def mcts_policy(cfg: MctsConfig, player=None, seed=0):
    """Tick-policy wrapper: decides every frame_skip ticks."""
    def policy(state, p):
        if state.tick % cfg.frame_skip != 0:
            return []
        action = mcts_decide(state, p, cfg, seed=seed ^ state.tick)
        return execute_strategic(state, p, action)
    return policy
