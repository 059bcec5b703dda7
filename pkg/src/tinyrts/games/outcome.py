"""Win conditions, terminal rewards, and shaped intermediate rewards."""

from __future__ import annotations

from dataclasses import dataclass

from ..config import MINI_RTS, CTF, TD
from ..engine.state import GameState, ONGOING, TIE

# Intermediate CTF reward per cell the carried flag moves toward the
# carrier's base; a full map-length carry is then comparable to the +1
# touchdown bonus.
CTF_CARRY_COEF = 0.05


@dataclass(frozen=True)
class Outcome:
    winner: int            # 0 / 1 / TIE / ONGOING
    rewards: tuple         # per-player terminal reward in {-1, 0, +1}

    @property
    def decided(self):
        return self.winner in (0, 1)


def outcome(state: GameState) -> Outcome:
    w = state.winner
    if w == 0:
        return Outcome(0, (1.0, -1.0))
    if w == 1:
        return Outcome(1, (-1.0, 1.0))
    return Outcome(w, (0.0, 0.0))


def win_value(state: GameState, player: int) -> float:
    """1 win / 0 loss / 0.5 tie-or-ongoing, from `player`'s side."""
    w = state.winner
    if w == player:
        return 1.0
    if w == (player ^ 1):
        return 0.0
    return 0.5


def shaped_reward(prev_state: GameState, state: GameState, player: int) -> float:
    """Intermediate reward for the transition prev_state -> state.

    Mini-RTS is purely terminal (always 0 mid-game).  CTF rewards moving
    a carried flag toward the carrier's own base plus +1 per touchdown.
    TD penalizes each leaked enemy by the configured penalty.
    """
    kind = state.kind
    if kind == MINI_RTS:
        return 0.0
    if kind == CTF:
        r = float(state.score[player] - prev_state.score[player])
        carrier = prev_state.units.get(prev_state.flag_carrier)
        if carrier is not None and carrier.player == player:
            flag_prev = prev_state.units.get(prev_state.extra["flag_id"])
            flag_now = state.units.get(state.extra["flag_id"])
            base = prev_state.units.get(prev_state.base_ids[player])
            if flag_prev is not None and flag_now is not None and base is not None:
                d_prev = ((flag_prev.x - base.x) ** 2 + (flag_prev.y - base.y) ** 2) ** 0.5
                d_now = ((flag_now.x - base.x) ** 2 + (flag_now.y - base.y) ** 2) ** 0.5
                if state.score[player] == prev_state.score[player]:
                    r += CTF_CARRY_COEF * (d_prev - d_now)
        return r
    # TD: defender is player 0; the spawner side gets no shaping
    if player != 0:
        return 0.0
    leaked = state.extra.get("leaks", 0) - prev_state.extra.get("leaks", 0)
    return -state.spec.td_leak_penalty * leaked
