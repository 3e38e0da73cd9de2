"""FastAPI service wrapping the numerical core.

Every endpoint takes the material inline (the JSON material-file structure)
and returns a deterministic, fully numeric payload. Domain failures map to
HTTP 422 with a machine-readable error body; malformed payloads map to 400.
"""

from __future__ import annotations

import math

from fastapi import FastAPI, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from . import dispersion, eigensystem, materials, quantization, sumrules
from .errors import PolarimodeError
from . import schemas as S

app = FastAPI(
    title="polarimode",
    description="Polariton dispersion, commutator sum rules, and quantized "
                "mode expansions for multi-resonance dispersive media.",
    version="0.1.0",
)


@app.exception_handler(PolarimodeError)
async def _domain_error(request, exc: PolarimodeError):
    return JSONResponse(
        status_code=exc.http_status,
        content={"error": {"code": exc.code, "message": str(exc)}},
    )


@app.exception_handler(RequestValidationError)
async def _schema_error(request, exc: RequestValidationError):
    return JSONResponse(
        status_code=400,
        content={"error": {"code": "request_schema", "message": str(exc.errors())}},
    )


@app.exception_handler(ValueError)
async def _usage_error(request, exc: ValueError):
    # core-level usage errors (k <= 0, missing k for alpha != 0, ...)
    return JSONResponse(
        status_code=400,
        content={"error": {"code": "bad_request", "message": str(exc)}},
    )


@app.get("/health")
def health() -> dict:
    return {"status": "ok"}


@app.post("/validate", response_model=S.ValidateResponse)
def validate_material(req: S.ValidateRequest) -> S.ValidateResponse:
    spec = req.material.to_spec()
    report = materials.validate(spec)
    enc = lambda v: S.ViolationOut(code=v.code, message=v.message, index=v.index)
    return S.ValidateResponse(
        valid=report.ok,
        violations=[enc(v) for v in report.violations],
        warnings=[enc(v) for v in report.warnings],
    )


@app.post("/dispersion")
def dispersion_sweep(req: S.DispersionRequest):
    spec = req.material.to_spec()
    ks = req.ks()
    if req.format == "csv":
        return Response(content=dispersion.sweep_csv(spec, ks),
                        media_type="text/csv")
    rows = [
        S.BranchRow(k=bp.k, branch=bp.branch, omega=bp.omega,
                    v_group=bp.v_group, v_em=bp.v_em, z=bp.z)
        for bp in dispersion.sweep_rows(spec, ks)
    ]
    return S.DispersionResponse(rows=rows)


@app.post("/index", response_model=S.IndexResponse)
def refractive_index(req: S.IndexRequest) -> S.IndexResponse:
    spec = req.material.to_spec()
    values = [materials.refractive_index_sq(spec, w, req.k)
              for w in req.omega_values]
    return S.IndexResponse(omega_values=req.omega_values, n_squared=values)


@app.post("/bands", response_model=S.BandsResponse)
def forbidden_bands(req: S.BandsRequest) -> S.BandsResponse:
    spec = req.material.to_spec()
    bands = dispersion.forbidden_bands(spec)
    return S.BandsResponse(
        bands=[S.BandOut(omega_lo=b.omega_lo, omega_hi=b.omega_hi) for b in bands])


@app.post("/zdp", response_model=S.ZdpResponse)
def zero_dispersion(req: S.ZdpRequest) -> S.ZdpResponse:
    spec = req.material.to_spec()
    omegas = dispersion.zero_dispersion_points(spec)
    wavelengths = None
    if spec.units.mode == "si":
        wavelengths = [2.0 * math.pi * spec.units.c / w * 1e6 for w in omegas]
    return S.ZdpResponse(omegas=omegas, wavelengths_um=wavelengths)


@app.post("/convert", response_model=S.ConvertResponse)
def convert(req: S.ConvertRequest) -> S.ConvertResponse:
    spec = req.material.to_spec()
    if req.to == "sellmeir":
        form = materials.multipolar_to_sellmeir(spec)
        return S.ConvertResponse(sellmeir=S.SellmeirOut(
            poles=list(form.poles), strengths=list(form.strengths)))
    # multipolar: round-trip through the pole form and re-emit a material file
    form = materials.multipolar_to_sellmeir(spec)
    back = materials.sellmeir_to_multipolar(form, units=spec.units, name=spec.name)
    return S.ConvertResponse(material=materials.material_to_dict(back))


@app.post("/sumrules", response_model=S.SumRulesResponse)
def sum_rules(req: S.SumRulesRequest) -> S.SumRulesResponse:
    spec = req.material.to_spec()
    reports = [
        sumrules.sum_rule_report(spec, k, tolerance=req.tolerance,
                                 use_erratum_vform=req.use_erratum_vform)
        for k in req.k_values
    ]
    outs = [S.SumRuleReportOut(**r.to_dict()) for r in reports]
    return S.SumRulesResponse(reports=outs,
                              all_passed=all(r.passed for r in reports))


@app.post("/eigen", response_model=S.EigenResponse)
def eigen(req: S.EigenRequest) -> S.EigenResponse:
    spec = req.material.to_spec()
    diag = eigensystem.eigen_diagnostics(spec, k=req.k, k_vector=req.k_vector)
    return S.EigenResponse(**diag)


def _mode_row(bp, mc) -> S.ModeRow:
    return S.ModeRow(
        k=bp.k, branch=bp.branch, sigma=mc.sigma, omega=bp.omega,
        v=bp.v_group, v_em=bp.v_em, Lambda=mc.Lambda, Pi_im=mc.Pi.imag,
        p=[x.imag for x in mc.p_nu],
        pi=[x.real for x in mc.pi_nu],
        D_coef=[mc.D_coef.real, mc.D_coef.imag],
        E_coef=[mc.E_coef.real, mc.E_coef.imag],
        B_coef=[mc.B_coef.real, mc.B_coef.imag],
    )


@app.post("/modes", response_model=S.ModesResponse)
def modes(req: S.ModesRequest) -> S.ModesResponse:
    spec = req.material.to_spec()
    rows: list[S.ModeRow] = []
    for k in sorted(req.k_values):
        if req.sigma == 0:
            for bp in quantization.longitudinal_branch_points(spec, k):
                rows.append(_mode_row(
                    bp, quantization.mode_coefficients_3d(spec, bp, 0)))
            continue
        for bp in dispersion.solve_branches(spec, k):
            if req.sigma is None:
                rows.append(_mode_row(bp, quantization.mode_coefficients_1d(spec, bp)))
            else:
                mc = quantization.mode_coefficients_3d(spec, bp, req.sigma)
                rows.append(_mode_row(bp, mc))
    return S.ModesResponse(modes=rows)


@app.post("/kernel", response_model=S.KernelResponse)
def kernel(req: S.KernelRequest) -> S.KernelResponse:
    spec = req.material.to_spec()
    test_fn = quantization.GaussianTestFunction(center=req.center, width=req.width)
    sample = quantization.kernel_reconstruction(
        spec, req.pair, test_fn, req.cutoff, nu=req.nu, nu_prime=req.nu_prime)
    # reference magnitude for readers of the report: hbar f/A for the
    # delta-type kernels, hbar |f'|/A for the derivative kernel, 0 for the
    # pairs that must commute
    u = spec.units
    f0 = test_fn.value(0.0)
    if req.pair == "d_b":
        expected = u.hbar * abs(req.center) / req.width**2 * f0 / u.area
    elif req.pair == "lambda_pinu" or (req.pair == "p_pi"
                                       and req.nu != req.nu_prime):
        expected = 0.0
    else:
        expected = u.hbar * f0 / u.area
    return S.KernelResponse(
        pair=sample.pair,
        value_re=sample.value.real,
        value_im=sample.value.imag,
        expected_magnitude=expected,
        separation=sample.separation,
        cutoff=sample.cutoff,
    )
