"""Ball physics, robot kinematics and the batched environment."""

from .ball import BallState, PhysicsConfig, UnsolvableThrowError, predict_landing_x, solve_throw, step_ball
from .env import EnvConfig, EnvState, EpisodeTerminatedError, NoiseDelayModel, observe, reset, step_env
from .robot import DOF, PaddlePose, RobotModel, forward_kinematics
from .throws import BallDistribution, ThrowConfigError, ThrowSpec, sample_throw

__all__ = [
    "BallState", "PhysicsConfig", "UnsolvableThrowError", "predict_landing_x", "solve_throw", "step_ball",
    "EnvConfig", "EnvState", "EpisodeTerminatedError", "NoiseDelayModel", "observe", "reset", "step_env",
    "DOF", "PaddlePose", "RobotModel", "forward_kinematics",
    "BallDistribution", "ThrowConfigError", "ThrowSpec", "sample_throw",
]
