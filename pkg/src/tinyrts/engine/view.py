"""Fog-of-war projection of a GameState for one player."""

from __future__ import annotations

from ..config import BASE, MINI_RTS, CTF, FLAG
from .state import GameState


class PlayerView:
    """What one player is allowed to see.  Carries no hidden-state fields:
    enemy resources and out-of-sight enemy units simply are not here."""

    __slots__ = ("player", "tick", "visible_units", "own_resource",
                 "known_enemy_base", "score", "terminal")

    def __init__(self, player, tick, visible_units, own_resource,
                 known_enemy_base, score, terminal):
        self.player = player
        self.tick = tick
        self.visible_units = visible_units
        self.own_resource = own_resource
        self.known_enemy_base = known_enemy_base
        self.score = score
        self.terminal = terminal


def visible_view(state: GameState, player: int) -> PlayerView:
    """Units within sight radius of any own unit (closed boundary:
    distance == radius counts).  Own units are always visible.  In
    Mini-RTS the enemy base location is known despite fog; in CTF the
    flag is known to all."""
    if player not in (0, 1):
        raise ValueError(f"invalid player index {player}")
    stats = state.spec.stats
    own = []
    others = []
    for u in state.units.values():
        if u.player == player:
            own.append(u)
        else:
            others.append(u)
    visible = [u.clone() for u in own]
    for v in others:
        if state.kind == CTF and v.utype == FLAG:
            visible.append(v.clone())  # flag location is public
            continue
        for u in own:
            sight = stats[u.utype].sight
            dx = u.x - v.x
            dy = u.y - v.y
            if dx * dx + dy * dy <= sight * sight:
                visible.append(v.clone())
                break
    known_enemy_base = None
    if state.kind == MINI_RTS:
        b = state.units.get(state.base_ids[player ^ 1])
        if b is not None:
            known_enemy_base = (b.x, b.y)
    return PlayerView(
        player=player,
        tick=state.tick,
        visible_units=visible,
        own_resource=state.resources[player],
        known_enemy_base=known_enemy_base,
        score=tuple(state.score),
        terminal=state.is_terminal(),
    )
