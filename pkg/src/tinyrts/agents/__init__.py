from .features import (featurize, cell_of, C_OWN, C_ENEMY, C_NEUTRAL,
                       C_HP, C_RESOURCE, NUM_CHANNELS)
from .model import LinearPolicyModel, CheckpointError
from .learning import TrainerConfig, t_step_returns, actor_critic_update
from .mcts import MctsConfig, mcts_decide, mcts_policy
from .policies import random_policy, frame_skip_wrap, model_policy
from .curriculum import CurriculumConfig, curriculum_reset

__all__ = [
    "featurize", "cell_of", "C_OWN", "C_ENEMY", "C_NEUTRAL", "C_HP",
    "C_RESOURCE", "NUM_CHANNELS",
    "LinearPolicyModel", "CheckpointError",
    "TrainerConfig", "t_step_returns", "actor_critic_update",
    "MctsConfig", "mcts_decide", "mcts_policy",
    "random_policy", "frame_skip_wrap", "model_policy",
    "CurriculumConfig", "curriculum_reset",
]
