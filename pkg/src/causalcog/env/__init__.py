"""Finite MDP/POMDP tasks, simulation, bisimulation and dynamics learning."""
from .bisim import Partition, bisimulation_partition
from .dynamics import (
    ACTION,
    FactoredTransition,
    conditional_mutual_information,
    dumps_transitions,
    learn_factored_dynamics,
    loads_transitions,
)
from .mdp import (
    Mdp,
    Pomdp,
    belief_update,
    fully_observed,
    observe,
    random_transitions,
    reset,
    step,
)
from .tasks import (
    CLEAR,
    DISPENSER_ACTIONS,
    DISPENSER_FACTORS,
    NOOP,
    PRESS,
    PUSH_LEFT,
    PUSH_RIGHT,
    REACH,
    TRAP_TUBE_ACTIONS,
    TRAP_TUBE_FACTORS,
    build_dispenser_task,
    build_trap_tube_task,
    dispenser_dynamics,
)

__all__ = [name for name in dir() if not name.startswith("_")]
