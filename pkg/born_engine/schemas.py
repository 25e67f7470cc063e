"""
pydantic models for every JSON document the command line reads or writes.

Rationals travel as decimal-free strings ("1/2", "-3") so exact inputs are never
rounded through a float. Permutation indices and projector blocks are 1-based
in JSON and 0-based inside the library.
"""

import json
from fractions import Fraction
from pathlib import Path
from typing import Annotated, Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, StringConstraints, ValidationError, model_validator

from born_engine.core import Amplitude, Isometry, Observable, StateVector
from born_engine.equivalence import Coarsen, ConstraintEdge, Permute, Phase, Refine, Relabel, Transformation
from born_engine.errors import BornEngineError, MalformedInputError
from born_engine.model import (
    ExperimentalModel,
    MultipleChannelExperiment,
    PayoffMap,
    RealizationReport,
    WeightVector,
    born_value,
)
from born_engine.solvers.base import DerivationReport

RationalStr = Annotated[str, StringConstraints(strip_whitespace=True, pattern=r"^[+-]?\d+(/\d+)?$")]


def to_fraction(value: str) -> Fraction:
    return Fraction(value)


def format_number(value) -> str:
    if isinstance(value, Fraction):
        return str(value)
    return repr(float(value))


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)


class AmplitudeSchema(StrictModel):
    """An exact amplitude {mag2, phase_turns} or a float amplitude {re, im}"""

    mag2: Optional[RationalStr] = Field(default=None, description="|c|^2 as a rational string")
    phase_turns: Optional[RationalStr] = Field(default=None, description="Phase in turns (angle / 2pi)")
    re: Optional[float] = Field(default=None, description="Real part (float mode)")
    im: Optional[float] = Field(default=None, description="Imaginary part (float mode)")

    @model_validator(mode="after")
    def one_representation(self):
        exact = self.mag2 is not None or self.phase_turns is not None
        floating = self.re is not None or self.im is not None
        if exact == floating:
            raise ValueError("give either mag2/phase_turns (exact) or re/im (float)")
        if exact and self.mag2 is None:
            raise ValueError("mag2 is required for an exact amplitude")
        if exact and to_fraction(self.mag2) < 0:
            raise ValueError("mag2 must be non-negative")
        return self

    @property
    def is_exact(self) -> bool:
        return self.mag2 is not None

    def to_amplitude(self) -> Amplitude:
        if self.is_exact:
            return Amplitude.exact(to_fraction(self.mag2), to_fraction(self.phase_turns or "0"))
        return Amplitude.from_complex(complex(self.re or 0.0, self.im or 0.0))

    @classmethod
    def from_amplitude(cls, c: Amplitude) -> "AmplitudeSchema":
        if c.is_exact:
            return cls(mag2=str(c.mag2), phase_turns=str(c.phase))
        return cls(re=c.re, im=c.im)


def _state(amplitudes: List[AmplitudeSchema], basis: str) -> StateVector:
    if len({a.is_exact for a in amplitudes}) > 1:
        raise ValueError("exact and float amplitudes cannot be mixed")
    return StateVector(tuple(a.to_amplitude() for a in amplitudes), basis)


class PayoffEntrySchema(StrictModel):
    eigenvalue: RationalStr = Field(alias="lambda", description="Eigenvalue of the observable")
    outcome: RationalStr = Field(description="Nonzero outcome numeral")


class ModelSchema(StrictModel):
    """An experimental model <psi, X, Omega>"""

    basis: str = Field(default="phi", description="Tag of the orthonormal basis")
    dim: Optional[int] = Field(default=None, ge=1, description="Hilbert space dimension d")
    amplitudes: List[AmplitudeSchema] = Field(min_length=1)
    eigenvalues: List[RationalStr] = Field(min_length=1)
    blocks: Optional[List[List[int]]] = Field(default=None, description="Spectral projector blocks, 1-based")
    payoff: List[PayoffEntrySchema] = Field(min_length=1)

    @model_validator(mode="after")
    def consistent(self):
        if len(self.amplitudes) != len(self.eigenvalues):
            raise ValueError(f"{len(self.amplitudes)} amplitudes for {len(self.eigenvalues)} eigenvalues")
        if self.dim is not None and self.dim != len(self.amplitudes):
            raise ValueError(f"dim is {self.dim} but {len(self.amplitudes)} amplitudes are given")
        if len({a.is_exact for a in self.amplitudes}) > 1:
            raise ValueError("exact and float amplitudes cannot be mixed")
        return self

    def to_model(self) -> ExperimentalModel:
        blocks = None
        if self.blocks is not None:
            blocks = tuple(tuple(k - 1 for k in block) for block in self.blocks)
        observable = Observable(tuple(to_fraction(x) for x in self.eigenvalues), blocks)
        payoff = PayoffMap(tuple((to_fraction(e.eigenvalue), to_fraction(e.outcome)) for e in self.payoff))
        return ExperimentalModel(_state(self.amplitudes, self.basis), observable, payoff)

    @classmethod
    def from_model(cls, g: ExperimentalModel) -> "ModelSchema":
        blocks = None
        if any(len(block) > 1 for block in g.observable.blocks):
            blocks = [[k + 1 for k in block] for block in g.observable.blocks]
        return cls(
            basis=g.psi.basis_tag,
            dim=g.dim,
            amplitudes=[AmplitudeSchema.from_amplitude(c) for c in g.psi.coeffs],
            eigenvalues=[str(x) for x in g.observable.eigenvalues],
            blocks=blocks,
            payoff=[PayoffEntrySchema(eigenvalue=str(lam), outcome=str(u)) for lam, u in g.payoff.entries],
        )


class IsometrySchema(StrictModel):
    kind: Literal["permutation", "phase", "refinement"]
    permutation: Optional[List[int]] = Field(default=None, description="1-based image of each channel")
    theta: Optional[List[RationalStr]] = Field(default=None, description="Phase shifts in turns")
    z: Optional[List[int]] = Field(default=None, description="Refinement sizes")

    @model_validator(mode="after")
    def matching_params(self):
        needed = {"permutation": self.permutation, "phase": self.theta, "refinement": self.z}[self.kind]
        if needed is None:
            field_name = {"permutation": "permutation", "phase": "theta", "refinement": "z"}[self.kind]
            raise ValueError(f"{self.kind} needs the {field_name} field")
        return self

    def to_isometry(self) -> Isometry:
        if self.kind == "permutation":
            return Isometry.permutation([j - 1 for j in self.permutation])
        if self.kind == "phase":
            return Isometry.phase_rotation([to_fraction(t) for t in self.theta])
        return Isometry.refinement(self.z)


class ExperimentSchema(StrictModel):
    """Mirror of MultipleChannelExperiment"""

    basis: str = "phi"
    channel_states: List[List[AmplitudeSchema]] = Field(min_length=1)
    channel_outcomes: List[RationalStr] = Field(min_length=1)
    superposition_coeffs: List[AmplitudeSchema] = Field(min_length=1)
    stages: List[IsometrySchema] = Field(default_factory=list)

    def to_experiment(self) -> MultipleChannelExperiment:
        return MultipleChannelExperiment(
            tuple(_state(state, self.basis) for state in self.channel_states),
            tuple(to_fraction(u) for u in self.channel_outcomes),
            _state(self.superposition_coeffs, self.basis).coeffs,
            tuple(stage.to_isometry() for stage in self.stages),
        )


class TransformationSchema(StrictModel):
    kind: Literal["relabel", "coarsen", "phase", "permute", "refine"]
    mapping: Optional[List[List[RationalStr]]] = Field(default=None, description="Pairs [x, f(x)]")
    theta: Optional[List[Union[float, RationalStr]]] = None
    pi: Optional[List[int]] = Field(default=None, description="1-based image of each channel")
    z: Optional[List[int]] = None

    @model_validator(mode="after")
    def matching_params(self):
        field_name = {"relabel": "mapping", "phase": "theta", "permute": "pi", "refine": "z"}.get(self.kind)
        if field_name is not None and getattr(self, field_name) is None:
            raise ValueError(f"{self.kind} needs the {field_name} field")
        if self.mapping is not None and any(len(pair) != 2 for pair in self.mapping):
            raise ValueError("relabel mapping entries must be [x, f(x)] pairs")
        return self

    def to_transformation(self) -> Transformation:
        if self.kind == "relabel":
            return Relabel(tuple((to_fraction(x), to_fraction(y)) for x, y in self.mapping))
        if self.kind == "coarsen":
            return Coarsen()
        if self.kind == "phase":
            return Phase(tuple(t if isinstance(t, float) else to_fraction(t) for t in self.theta))
        if self.kind == "permute":
            return Permute(tuple(j - 1 for j in self.pi))
        return Refine(tuple(self.z))

    @classmethod
    def from_transformation(cls, t: Transformation) -> "TransformationSchema":
        if isinstance(t, Relabel):
            return cls(kind="relabel", mapping=[[str(x), str(y)] for x, y in t.mapping])
        if isinstance(t, Phase):
            return cls(kind="phase", theta=[x if isinstance(x, float) else str(x) for x in t.theta])
        if isinstance(t, Permute):
            return cls(kind="permute", pi=[j + 1 for j in t.pi])
        if isinstance(t, Refine):
            return cls(kind="refine", z=list(t.z))
        return cls(kind="coarsen")


class WeightsSchema(StrictModel):
    weights: List[Union[float, RationalStr]] = Field(min_length=1)

    def to_weights(self) -> WeightVector:
        return WeightVector(tuple(w if isinstance(w, float) else to_fraction(w) for w in self.weights))


class ReportSchema(BaseModel):
    """JSON form of a DerivationReport"""

    method: str
    weights: Optional[List[str]]
    outcome_probs: Optional[Dict[str, str]]
    unique: bool
    gauge_dim: int
    gauge_note: str = ""
    constraints_used: int
    iterations: Optional[int] = None
    refined_dim: Optional[int] = None
    settings: Dict[str, Any] = Field(default_factory=dict)

    @classmethod
    def from_report(cls, report: DerivationReport, settings: Optional[Dict[str, Any]] = None) -> "ReportSchema":
        return cls(
            method=report.method,
            weights=[format_number(w) for w in report.weights.w] if report.weights is not None else None,
            outcome_probs=(
                {str(u): format_number(p) for u, p in report.outcome_probs.items()}
                if report.outcome_probs is not None
                else None
            ),
            unique=report.unique,
            gauge_dim=report.gauge_dim,
            gauge_note=report.gauge_note,
            constraints_used=report.constraints_used,
            iterations=report.iterations,
            refined_dim=report.refined_dim,
            settings=settings or {},
        )


class EdgeReportSchema(BaseModel):
    """One transformation step of the equiv command"""

    via: TransformationSchema
    target: ModelSchema
    born_source: str
    born_target: str
    born_invariant: bool
    realized: bool

    @classmethod
    def from_edge(cls, edge: ConstraintEdge) -> "EdgeReportSchema":
        before, after = born_value(edge.source), born_value(edge.target)
        if edge.source.is_exact and edge.target.is_exact:
            invariant = before == after
        else:
            invariant = abs(float(before) - float(after)) <= 1e-9
        source_report, target_report = edge.verify()
        return cls(
            via=TransformationSchema.from_transformation(edge.via),
            target=ModelSchema.from_model(edge.target),
            born_source=format_number(before),
            born_target=format_number(after),
            born_invariant=invariant,
            realized=bool(source_report) and bool(target_report),
        )


class RealizationSchema(BaseModel):
    realized: bool
    stage: int
    clause: Optional[str] = None
    detail: str = ""

    @classmethod
    def from_report(cls, report: RealizationReport) -> "RealizationSchema":
        return cls(realized=report.realized, stage=report.stage, clause=report.clause, detail=report.detail)


def json_pointer(loc) -> str:
    parts = [str(part) for part in loc if not (isinstance(part, str) and part.startswith("function-"))]
    return "/" + "/".join(p.replace("~", "~0").replace("/", "~1") for p in parts)


def load_document(path: str, schema):
    """Read a JSON file and validate it; failures become MalformedInputError"""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise MalformedInputError(f"cannot read {path}: {exc.strerror}", pointer="/") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedInputError(f"{path} is not valid JSON: {exc.msg}", pointer="/") from exc
    return validate(data, schema, source=path)


def validate(data, schema, source: str = "input"):
    try:
        return schema.model_validate(data)
    except ValidationError as exc:
        error = exc.errors()[0]
        raise MalformedInputError(f"{source}: {error['msg']}", pointer=json_pointer(error["loc"])) from exc


def build(document, converter, pointer: str = "/"):
    """Run a schema's conversion into library objects; library errors keep their tag"""
    try:
        return converter(document)
    except BornEngineError:
        raise
    except ValueError as exc:
        raise MalformedInputError(str(exc), pointer=pointer) from exc
