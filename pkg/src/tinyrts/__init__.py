"""tinyrts: a lightweight concurrent game-simulation platform with a
miniature RTS engine (Mini-RTS, Capture the Flag, Tower Defense),
built-in rule AIs, a batched producer-consumer context, and baseline
decision-makers (root-parallel MCTS, T-step actor-critic)."""

__version__ = "0.1.0"

from .config import load_spec, GameSpec, ConfigError
