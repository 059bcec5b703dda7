"""Game configuration: unit stat tables, map files, per-game parameters.

Unit stats live in human-readable .cfg files (one section per unit type)
so game balance can be tuned without touching code.  The Tower Defense
maze is a 20x20 character map ('#' buildable ground, '.' path, 'B' base,
'S' spawner).
"""

from __future__ import annotations

import configparser
import hashlib
import importlib.resources
from dataclasses import dataclass, field

MAP_W = 20
MAP_H = 20

# Unit type codes, shared across games.
BASE = 0
RESOURCE = 1
WORKER = 2
BARRACKS = 3
MELEE_ATTACKER = 4
RANGE_ATTACKER = 5
ATHLETE = 6
FLAG = 7
TOWER = 8
TD_ENEMY = 9

UNIT_NAMES = {
    BASE: "BASE",
    RESOURCE: "RESOURCE",
    WORKER: "WORKER",
    BARRACKS: "BARRACKS",
    MELEE_ATTACKER: "MELEE_ATTACKER",
    RANGE_ATTACKER: "RANGE_ATTACKER",
    ATHLETE: "ATHLETE",
    FLAG: "FLAG",
    TOWER: "TOWER",
    TD_ENEMY: "TD_ENEMY",
}
UNIT_CODES = {name: code for code, name in UNIT_NAMES.items()}
NUM_UNIT_TYPES = len(UNIT_NAMES)

# Game kinds.
MINI_RTS = 0
CTF = 1
TD = 2

GAME_NAMES = {MINI_RTS: "minirts", CTF: "ctf", TD: "td"}
GAME_CODES = {name: code for code, name in GAME_NAMES.items()}


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class UnitStats:
    hp: int
    damage: int
    speed: float
    attack_range: float
    cost: int
    build_time: int
    cooldown: int
    sight: float


@dataclass
class GameSpec:
    """Everything needed to instantiate and run one of the three games."""

    kind: int
    stats: dict  # unit type code -> UnitStats
    max_ticks: int
    frame_skip: int = 50
    # Mini-RTS
    gather_amount: int = 10
    mine_time: int = 20
    min_base_distance: float = 8.0
    bonus_unit_chance: float = 0.5
    # CTF
    ctf_win_score: int = 5
    respawn_delay: int = 100
    flag_speed_factor: float = 0.5
    athletes_per_side: int = 3
    # TD
    td_waves: int = 10
    td_wave_interval: int = 200
    td_wave_base_size: int = 2
    td_max_leaks: int = 10
    td_kills_per_tower: int = 5
    td_leak_penalty: float = 0.1
    maze: list = field(default_factory=list)  # rows of characters, TD only

    def digest(self) -> bytes:
        """8-byte digest over all balance-relevant fields.

        Stored in snapshot/replay headers so files cannot silently be
        replayed under a different configuration.
        """
        h = hashlib.blake2b(digest_size=8)
        h.update(repr(self.kind).encode())
        for code in sorted(self.stats):
            h.update(repr((code, self.stats[code])).encode())
        h.update(
            repr(
                (
                    self.max_ticks,
                    self.frame_skip,
                    self.gather_amount,
                    self.mine_time,
                    self.min_base_distance,
                    self.bonus_unit_chance,
                    self.ctf_win_score,
                    self.respawn_delay,
                    self.flag_speed_factor,
                    self.athletes_per_side,
                    self.td_waves,
                    self.td_wave_interval,
                    self.td_wave_base_size,
                    self.td_max_leaks,
                    self.td_kills_per_tower,
                    self.td_leak_penalty,
                    tuple(self.maze),
                )
            ).encode()
        )
        return h.digest()


def _data_text(name: str) -> str:
    return importlib.resources.files("tinyrts.data").joinpath(name).read_text()


def parse_unit_stats(text: str) -> dict:
    cp = configparser.ConfigParser()
    try:
        cp.read_string(text)
    except configparser.Error as e:
        raise ConfigError(f"malformed unit config: {e}") from e
    stats = {}
    for section in cp.sections():
        if section not in UNIT_CODES:
            raise ConfigError(f"unknown unit type {section!r}")
        s = cp[section]
        try:
            stats[UNIT_CODES[section]] = UnitStats(
                hp=s.getint("hp"),
                damage=s.getint("damage"),
                speed=s.getfloat("speed"),
                attack_range=s.getfloat("attack_range"),
                cost=s.getint("cost"),
                build_time=s.getint("build_time"),
                cooldown=s.getint("cooldown"),
                sight=s.getfloat("sight"),
            )
        except (ValueError, configparser.Error) as e:
            raise ConfigError(f"bad stats for {section}: {e}") from e
        st = stats[UNIT_CODES[section]]
        if (
            st.hp <= 0
            or st.damage < 0
            or st.speed < 0
            or st.attack_range < 0
            or st.cost < 0
            or st.build_time < 0
            or st.cooldown < 0
            or st.sight < 0
        ):
            raise ConfigError(f"negative or non-positive stat for {section}")
    return stats


def parse_maze(text: str) -> list:
    rows = [line for line in text.splitlines() if line]
    if len(rows) != MAP_H or any(len(r) != MAP_W for r in rows):
        raise ConfigError(f"maze must be {MAP_W}x{MAP_H}")
    if sum(r.count("B") for r in rows) != 1 or sum(r.count("S") for r in rows) != 1:
        raise ConfigError("maze needs exactly one B and one S")
    return rows


def load_spec(game: str, stats_path: str = None, maze_path: str = None) -> GameSpec:
    """Build the default GameSpec for 'minirts', 'ctf' or 'td'.

    stats_path/maze_path override the packaged defaults.
    """
    if game not in GAME_CODES:
        raise ConfigError(f"unknown game {game!r}")
    kind = GAME_CODES[game]
    if stats_path is not None:
        with open(stats_path) as f:
            text = f.read()
    else:
        text = _data_text(f"{'minirts' if kind == MINI_RTS else game}_units.cfg")
    stats = parse_unit_stats(text)
    if kind == MINI_RTS:
        return GameSpec(kind=kind, stats=stats, max_ticks=10000)
    if kind == CTF:
        return GameSpec(kind=kind, stats=stats, max_ticks=10000)
    maze_text = _data_text("td_maze.txt") if maze_path is None else open(maze_path).read()
    return GameSpec(kind=kind, stats=stats, max_ticks=4000, maze=parse_maze(maze_text))
