"""Wire documents. Indices in these documents are 1-based."""
from typing import Any, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, Field, field_validator

Point2 = Tuple[float, float]


class LinkageDoc(BaseModel):
    lengths: List[float]


class ConfigurationDoc(BaseModel):
    lengths: List[float]
    vertices: List[Point2]


class GadgetDoc(BaseModel):
    edge_indices: Tuple[int, int, int]
    anchors: Tuple[Point2, Point2]
    side: int = -1
    fold_lengths: Tuple[float, float, float]

    @field_validator("side")
    @classmethod
    def _side(cls, v: int) -> int:
        if v not in (1, -1):
            raise ValueError("side must be +1 or -1")
        return v


class LayoutDoc(BaseModel):
    lengths: List[float]
    gadgets: List[GadgetDoc]
    base_vertices: List[Point2]
    angle_triples: List[Tuple[int, int, int]] = []
    margins: Optional[Dict[str, Optional[float]]] = None


class DimensionDoc(BaseModel):
    k: int
    pairs: List[Tuple[float, float]] = []
    infinite: List[float] = []
    zero_persistence: int = 0


class DiagramDoc(BaseModel):
    dims: List[DimensionDoc]


class ProfileDoc(BaseModel):
    embedded: int
    self_touching: int
    crossing: int
    non_embedded: List[Dict[str, Any]] = []
    expected: bool = False


class ClosureDoc(BaseModel):
    verdict: Literal["found", "none"]
    distance: Optional[float] = None
    trials: int
    seed: int


class DegreeDoc(BaseModel):
    entries: List[List[int]]
    samples: int
    max_residue: float
    signed_identity: bool


class CertificateDoc(BaseModel):
    degree_matrix: List[List[int]]
    degree: DegreeDoc
    profile: ProfileDoc
    loop_profiles: List[ProfileDoc] = []
    closure: ClosureDoc
    failures: List[str] = []


class ScaleDoc(BaseModel):
    k: int
    r: float
    window: Tuple[float, float]
    claimed: int
    ratio: Optional[float] = None
    significant: bool


class BettiDoc(BaseModel):
    mode: Literal["loop", "torus"]
    spacing: Literal["arc", "uniform"] = "uniform"
    points: int
    max_dim: int
    max_diameter: float
    simplices: int
    components: int
    betti: List[int]
    expected: List[int]
    scales: List[ScaleDoc] = []
    skipped: List[int] = []
    diagram: DiagramDoc


class RunReport(BaseModel):
    command: List[str]
    version: str
    input_digest: Optional[str] = None
    rng_seed: Optional[int] = None
    ok: bool = True
    outputs: Dict[str, Any] = {}
    timings: Dict[str, float] = Field(default_factory=dict)

    def stable_json(self) -> str:
        """The report without wall-clock timings, for byte-stable files."""
        return self.model_dump_json(indent=2, exclude={"timings"})
