from .network import BranchSpec, ConvLayerSpec, NetworkSpec, CostReport
from .genotype import REMOVED, Mode, KernelShape, Genotype, NetworkTemplate
from .run import (
    EvalConfig, RunConfig, RetrainConfig,
    IndividualRecord, Checkpoint, FrontMember,
    ReferencePoint, ReferencePoints, KernelCount,
    RetrainReport, RunSummary, CostRequest,
)

__all__ = [
    "BranchSpec", "ConvLayerSpec", "NetworkSpec", "CostReport",
    "REMOVED", "Mode", "KernelShape", "Genotype", "NetworkTemplate",
    "EvalConfig", "RunConfig", "RetrainConfig",
    "IndividualRecord", "Checkpoint", "FrontMember",
    "ReferencePoint", "ReferencePoints", "KernelCount",
    "RetrainReport", "RunSummary", "CostRequest",
]
