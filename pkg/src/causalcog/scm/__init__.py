from .core import (
    Assignment,
    C,
    Dag,
    JointTable,
    Kind,
    NoiseSpec,
    S,
    Scm,
    VariableId,
    X,
    exact_joint,
    index_emission,
    intervene,
    mechanism_table,
    random_scm,
    sample_scm,
    sample_scm_many,
    tabulate,
    validate_scm,
)
from .textio import dumps_scm, loads_scm

__all__ = [
    "Assignment",
    "C",
    "Dag",
    "JointTable",
    "Kind",
    "NoiseSpec",
    "S",
    "Scm",
    "VariableId",
    "X",
    "dumps_scm",
    "exact_joint",
    "index_emission",
    "intervene",
    "loads_scm",
    "mechanism_table",
    "random_scm",
    "sample_scm",
    "sample_scm_many",
    "tabulate",
    "validate_scm",
]
