"""20x20 feature tensors built from a PlayerView (never a GameState, so
nothing hidden by fog can leak into the model)."""

from __future__ import annotations

import numpy as np

from ..config import NUM_UNIT_TYPES
from ..engine.state import MAP_W, MAP_H

# channel layout: own presence per type, enemy presence per type,
# neutral presence, hp fraction, constant resource plane
C_OWN = 0
C_ENEMY = NUM_UNIT_TYPES
C_NEUTRAL = 2 * NUM_UNIT_TYPES
C_HP = C_NEUTRAL + 1
C_RESOURCE = C_HP + 1
NUM_CHANNELS = C_RESOURCE + 1


def cell_of(x, y):
    return int(x + 0.5), int(y + 0.5)


def featurize(view, player=None) -> np.ndarray:
    """FeatureTensor of shape (NUM_CHANNELS, 20, 20), values in [0, 1].

    Presence planes get 1.0 at each visible unit's rounded cell; the HP
    plane holds hp/max_hp there; the resource plane is a constant
    min(own_resource/1000, 1) everywhere."""
    if player is None:
        player = view.player
    t = np.zeros((NUM_CHANNELS, MAP_H, MAP_W), dtype=np.float32)
    for u in view.visible_units:
        cx, cy = cell_of(u.x, u.y)
        if not (0 <= cx < MAP_W and 0 <= cy < MAP_H):
            continue
        if u.player == player:
            plane = C_OWN + u.utype
        elif u.player == (player ^ 1):
            plane = C_ENEMY + u.utype
        else:
            plane = C_NEUTRAL
        t[plane, cy, cx] = 1.0
        if u.max_hp > 0:
            t[C_HP, cy, cx] = min(max(u.hp / u.max_hp, 0.0), 1.0)
    t[C_RESOURCE] = min(view.own_resource / 1000.0, 1.0)
    return t
