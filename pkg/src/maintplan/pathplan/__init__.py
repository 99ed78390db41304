from .collision import CollisionChecker, check_collision, link_poses
from .kinematics import LinkShape, ManipulatorModel, end_effector, forward_kinematics, load_model, model_from_dict
from .planners import PathMetrics, PathResult, PlannerConfig, plan
from .smoothing import smooth_path

__all__ = [
    "CollisionChecker",
    "LinkShape",
    "ManipulatorModel",
    "PathMetrics",
    "PathResult",
    "PlannerConfig",
    "check_collision",
    "end_effector",
    "forward_kinematics",
    "link_poses",
    "load_model",
    "model_from_dict",
    "plan",
    "smooth_path",
]
