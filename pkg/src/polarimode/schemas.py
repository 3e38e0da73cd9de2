"""Pydantic request/response models for the HTTP service.

The material payload mirrors the JSON material-file format one-to-one, so a
file on disk can be posted verbatim as the ``material`` field of any request.
"""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field, model_validator

from .materials import MaterialSpec, material_from_dict


class ConstantsIn(BaseModel):
    c: float | None = None
    hbar: float | None = None
    eps0: float | None = None
    area: float | None = None


class ResonanceIn(BaseModel):
    omega2: float
    g: float
    alpha: float = 0.0


class WavelengthFormIn(BaseModel):
    B: list[float]
    C_um2: list[float]


class MaterialIn(BaseModel):
    """The material-file schema; exactly one of resonances / sellmeier_wavelength."""

    name: str = "material"
    dimension: Literal[1, 2, 3] = 1
    units: Literal["natural", "si"] = "natural"
    constants: ConstantsIn | None = None
    resonances: list[ResonanceIn] | None = None
    sellmeier_wavelength: WavelengthFormIn | None = None

    def to_spec(self) -> MaterialSpec:
        data = self.model_dump(exclude_none=True)
        return material_from_dict(data)


class KGridIn(BaseModel):
    min: float = Field(gt=0)
    max: float = Field(gt=0)
    count: int = Field(default=50, ge=2)
    spacing: Literal["linear", "log"] = "linear"

    @model_validator(mode="after")
    def _ordered(self):
        if not self.min < self.max:
            raise ValueError("k grid needs min < max")
        return self

    def values(self) -> list[float]:
        import numpy as np

        if self.spacing == "log":
            return list(np.geomspace(self.min, self.max, self.count))
        return list(np.linspace(self.min, self.max, self.count))


class ValidateRequest(BaseModel):
    material: MaterialIn


class ViolationOut(BaseModel):
    code: str
    message: str
    index: int | None = None


class ValidateResponse(BaseModel):
    valid: bool
    violations: list[ViolationOut]
    warnings: list[ViolationOut]


class DispersionRequest(BaseModel):
    material: MaterialIn
    k_grid: KGridIn | None = None
    k_values: list[float] | None = None
    format: Literal["csv", "json"] = "csv"

    @model_validator(mode="after")
    def _exactly_one(self):
        if (self.k_grid is None) == (self.k_values is None):
            raise ValueError("supply exactly one of k_grid or k_values")
        return self

    def ks(self) -> list[float]:
        return self.k_values if self.k_values is not None else self.k_grid.values()


class BranchRow(BaseModel):
    k: float
    branch: int
    omega: float
    v_group: float
    v_em: float
    z: float


class DispersionResponse(BaseModel):
    rows: list[BranchRow]


class IndexRequest(BaseModel):
    material: MaterialIn
    omega_values: list[float]
    k: float | None = None


class IndexResponse(BaseModel):
    omega_values: list[float]
    n_squared: list[float]


class BandsRequest(BaseModel):
    material: MaterialIn


class BandOut(BaseModel):
    omega_lo: float
    omega_hi: float


class BandsResponse(BaseModel):
    bands: list[BandOut]


class ZdpRequest(BaseModel):
    material: MaterialIn


class ZdpResponse(BaseModel):
    omegas: list[float]
    wavelengths_um: list[float] | None = None


class ConvertRequest(BaseModel):
    material: MaterialIn
    to: Literal["sellmeir", "multipolar"]


class SellmeirOut(BaseModel):
    poles: list[float]
    strengths: list[float]


class ConvertResponse(BaseModel):
    sellmeir: SellmeirOut | None = None
    material: dict | None = None


class SumRulesRequest(BaseModel):
    material: MaterialIn
    k_values: list[float]
    tolerance: float = Field(default=1e-8, gt=0)
    use_erratum_vform: bool = False


class SumRuleReportOut(BaseModel):
    k: float
    s1: float
    s2_max_offdiag: float
    s2_max_diag_err: float
    s3_max: float
    residue_s1: float
    erratum_variant_s3: float
    passed: bool = Field(alias="pass")

    model_config = {"populate_by_name": True}


class SumRulesResponse(BaseModel):
    reports: list[SumRuleReportOut]
    all_passed: bool


class EigenRequest(BaseModel):
    material: MaterialIn
    k: float | None = None
    k_vector: list[float] | None = None

    @model_validator(mode="after")
    def _exactly_one(self):
        if (self.k is None) == (self.k_vector is None):
            raise ValueError("supply exactly one of k (1D) or k_vector (3D)")
        if self.k_vector is not None and len(self.k_vector) != 3:
            raise ValueError("k_vector must have 3 components")
        return self


class EigenResponse(BaseModel):
    kind: str
    k: float
    hermiticity_residual: float
    eigenvalues: list[float]
    classification_counts: dict
    normalization_residuals: list[float | None]
    max_normalization_residual: float
    gram_residual: float


class ModesRequest(BaseModel):
    material: MaterialIn
    k_values: list[float]
    sigma: Literal[0, 1, 2] | None = None


class ModeRow(BaseModel):
    k: float
    branch: int
    sigma: int | None
    omega: float
    v: float
    v_em: float
    Lambda: float
    Pi_im: float
    p: list[float]
    pi: list[float]
    D_coef: list[float]
    E_coef: list[float]
    B_coef: list[float]


class ModesResponse(BaseModel):
    modes: list[ModeRow]


class KernelRequest(BaseModel):
    material: MaterialIn
    pair: Literal["lambda_pi", "p_pi", "lambda_pinu", "d_b"]
    center: float = 0.0
    width: float = Field(gt=0)
    cutoff: float = Field(gt=0)
    nu: int = 0
    nu_prime: int = 0


class KernelResponse(BaseModel):
    pair: str
    value_re: float
    value_im: float
    expected_magnitude: float
    separation: float
    cutoff: float


class ErrorBody(BaseModel):
    code: str
    message: str


class ErrorResponse(BaseModel):
    error: ErrorBody
