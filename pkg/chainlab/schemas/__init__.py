from chainlab.schemas.chain import Chain, ChainDocument, SampledChain, StepCurve
from chainlab.schemas.field import FieldRole, ScalarField
from chainlab.schemas.modulus import (
    ChainFamily,
    EndpointPolicy,
    ExceptionalVerdict,
    FamilyKind,
    FunctionClass,
    FunctionClassTag,
)
from chainlab.schemas.poincare import (
    BMCAudit,
    BMCCandidate,
    MinkowskiProfile,
    PIAudit,
    PICase,
    PointwiseResult,
    ProfileEntry,
    RieszWeights,
    ShellWidth,
)
from chainlab.schemas.potential import EBPipelineReport, EBRow, PotentialSpec
from chainlab.schemas.report import (
    CurveConsistency,
    GradientProgram,
    LadderRung,
    SolveReport,
    SolveStatus,
    VerifyResult,
    Violation,
)
from chainlab.schemas.run import FixtureInfo, ResultEnvelope, RunConfig
from chainlab.schemas.space import (
    ComponentPartition,
    DoublingEstimate,
    EpsilonGraph,
    GeneratorDescriptor,
    GridDescriptor,
    MassRule,
    PointCloudSpace,
    PuncturedGridDescriptor,
    SpaceDocument,
    TwoSequenceDescriptor,
)
