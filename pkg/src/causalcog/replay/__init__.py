"""Source-tagged replay storage and integration of experience sources."""
from .records import SourceTag, Trajectory, Transition
from .buffer import DEFAULT_CAPACITY, ReplayBuffer
from .importance import (
    IntegrationPlan,
    Mode,
    clip_weight,
    importance_weight,
    importance_weights,
    ingest_natural,
    ingest_social,
    integrate,
    off_policy_gradient,
)

__all__ = [name for name in dir() if not name.startswith("_")]
