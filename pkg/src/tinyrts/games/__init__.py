from . import systems  # noqa: F401  (registers CTF/TD tick systems)
from .actions import MiniRtsAction, CtfAction, TD_IDLE, action_arity
from .factory import new_game, attach_static, GameInitError
from .strategic import execute_strategic
from .ai import simple_ai, hit_n_run_ai, ctf_ai, RULE_AIS
from .outcome import Outcome, outcome, shaped_reward, win_value
from .match import play_game, play_match
