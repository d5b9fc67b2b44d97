"""Arc consistency for binary CSPs by recurrent tensor operations."""

from .ac3 import AC3, ac3, revise
from .engine import EnforceStats, Inconsistent, TensorAC, WorkBuffers, tensor_ac, tensor_revise
from .generate import GenConfig, generate
from .kernel import Tensor
from .model import CspInstance, build_tensors, support_set
from .oracle import enumerate_solutions, fixpoint_ac
from .search import Status, solve

__all__ = [
    "AC3", "CspInstance", "EnforceStats", "GenConfig", "Inconsistent", "Status", "Tensor",
    "TensorAC", "WorkBuffers", "ac3", "build_tensors", "enumerate_solutions", "fixpoint_ac",
    "generate", "revise", "solve", "support_set", "tensor_ac", "tensor_revise",
]
