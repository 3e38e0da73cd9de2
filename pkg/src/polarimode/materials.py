"""Dispersive material definitions and rational-form conversions.

A material is a list of harmonic resonances, each contributing a pole to the
inverse refractive-index form

    n^2(omega) = [1 - sum_nu g_nu / (Omega_nu^2(k) - omega^2)]^(-1),

with Omega_nu^2(k) = Omega_nu^2 + alpha_nu k^2 when the polarization field
itself is dispersive. The function is an N-pole rational function of
z = omega^2, so it converts exactly, by partial fractions, to the familiar
pole (Sellmeir) representation

    n^2(omega) = 1 + sum_mu gt_mu / (Omegat_mu^2 - omega^2),

and back. Both conversions and the standard wavelength-coefficient ingestion
used for tabulated glasses live here, together with validation and the JSON
material-file format.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.polynomial import polynomial as P
from scipy import constants as _const

from . import _poly
from .errors import (
    DegenerateRootsError,
    InvalidMaterialError,
    MaterialFormatError,
    NotRepresentableError,
    SingularPointError,
    UnitMismatchError,
)

#: Relative tolerance (of Omega_ref^2) for distinct-root and singular-point
#: tests; comfortably inside double-precision headroom for degree <= 10
#: polynomials.
DISTINCT_ROOT_RTOL = 1e-9


@dataclass(frozen=True)
class UnitSystem:
    """Physical constants and geometry for a material.

    ``mu`` (vacuum permeability) is derived as 1/(eps0 c^2) so that
    mu * eps0 * c^2 == 1 holds by construction. ``dimension`` is the number
    of propagation dimensions (the k-integration measure is d^n k).
    """

    c: float = 1.0
    hbar: float = 1.0
    eps0: float = 1.0
    area: float = 1.0
    dimension: int = 1
    mode: str = "natural"

    def __post_init__(self):
        if self.dimension not in (1, 2, 3):
            raise ValueError(f"dimension must be 1, 2 or 3, got {self.dimension}")
        if self.mode == "natural":
            if any(v != 1.0 for v in (self.c, self.hbar, self.eps0, self.area)):
                raise ValueError("natural units force c = hbar = eps0 = area = 1")
        elif self.mode == "si":
            if min(self.c, self.hbar, self.eps0, self.area) <= 0:
                raise ValueError("si constants must all be positive")
        else:
            raise ValueError(f"unknown unit mode {self.mode!r}")

    @property
    def mu(self) -> float:
        return 1.0 / (self.eps0 * self.c**2)

    @classmethod
    def natural(cls, dimension: int = 1) -> "UnitSystem":
        return cls(dimension=dimension, mode="natural")

    @classmethod
    def si(cls, area: float = 1.0, dimension: int = 1, *, c: float | None = None,
           hbar: float | None = None, eps0: float | None = None) -> "UnitSystem":
        return cls(
            c=_const.c if c is None else c,
            hbar=_const.hbar if hbar is None else hbar,
            eps0=_const.epsilon_0 if eps0 is None else eps0,
            area=area,
            dimension=dimension,
            mode="si",
        )


@dataclass(frozen=True)
class Resonance:
    """One oscillator: squared frequency, coupling strength, k^2 dispersion.

    ``g`` combines charge, mass and number density into a single coupling
    datum, g = q^2 rho / (m eps0). The raw triple may be stored alongside;
    on conflict the direct ``g`` wins and validation emits a warning.
    """

    omega2: float
    g: float
    alpha: float = 0.0
    charge: float | None = None
    mass: float | None = None
    density: float | None = None

    def omega2_at(self, k: float) -> float:
        return self.omega2 + self.alpha * k * k

    @property
    def has_charge_data(self) -> bool:
        return None not in (self.charge, self.mass, self.density)

    @classmethod
    def from_charge_data(cls, omega2: float, charge: float, mass: float,
                         density: float, eps0: float = 1.0,
                         alpha: float = 0.0) -> "Resonance":
        g = charge**2 * density / (mass * eps0)
        return cls(omega2=omega2, g=g, alpha=alpha,
                   charge=charge, mass=mass, density=density)


@dataclass(frozen=True)
class MaterialSpec:
    """A named set of resonances plus the unit system they live in."""

    name: str
    resonances: tuple[Resonance, ...]
    units: UnitSystem

    def __post_init__(self):
        object.__setattr__(self, "resonances", tuple(self.resonances))

    @property
    def n_resonances(self) -> int:
        return len(self.resonances)

    @property
    def omega2s(self) -> np.ndarray:
        return np.array([r.omega2 for r in self.resonances], dtype=float)

    @property
    def gs(self) -> np.ndarray:
        return np.array([r.g for r in self.resonances], dtype=float)

    @property
    def alphas(self) -> np.ndarray:
        return np.array([r.alpha for r in self.resonances], dtype=float)

    def omega2s_at(self, k: float) -> np.ndarray:
        return self.omega2s + self.alphas * k * k

    @property
    def has_alpha(self) -> bool:
        return any(r.alpha != 0.0 for r in self.resonances)

    @property
    def omega_ref2(self) -> float:
        """Largest squared resonance frequency, or 1 for vacuum."""
        if not self.resonances:
            return 1.0
        return max(r.omega2 for r in self.resonances)

    @property
    def distinct_tol(self) -> float:
        """Absolute z-space tolerance for coincident roots / singularities."""
        return DISTINCT_ROOT_RTOL * self.omega_ref2

    @property
    def coupling_sum(self) -> float:
        """sum g_nu / Omega_nu^2; must stay strictly below 1."""
        if not self.resonances:
            return 0.0
        return float(np.sum(self.gs / self.omega2s))


@dataclass(frozen=True)
class FrequencyScale:
    """Conversion between a spec's own units and the internal natural form.

    Internal numerics run with c = hbar = eps0 = area = 1; frequencies are
    measured in units of ``omega`` (the reference Omega_ref) and wavenumbers
    in units of omega/c.
    """

    omega: float = 1.0
    c: float = 1.0

    @property
    def is_identity(self) -> bool:
        return self.omega == 1.0 and self.c == 1.0

    def k_natural(self, k):
        return np.asarray(k, dtype=float) * (self.c / self.omega)

    def k_original(self, k):
        return np.asarray(k, dtype=float) * (self.omega / self.c)

    def omega_natural(self, w):
        return np.asarray(w, dtype=float) / self.omega

    def omega_original(self, w):
        return np.asarray(w, dtype=float) * self.omega

    def z_original(self, z):
        return np.asarray(z, dtype=float) * self.omega**2

    def velocity_original(self, v):
        return np.asarray(v, dtype=float) * self.c


def nondimensionalize(spec: MaterialSpec) -> tuple[MaterialSpec, FrequencyScale]:
    """Rescale an SI spec to natural units by Omega_ref = max Omega_nu.

    Natural-unit specs pass through unchanged so that worked examples keep
    their literal values. The rescaling conditions the dispersion polynomials
    and makes every tolerance scale-free.
    """
    if spec.units.mode == "natural":
        return spec, FrequencyScale()
    om_ref2 = spec.omega_ref2
    om_ref = math.sqrt(om_ref2)
    c = spec.units.c
    scaled = tuple(
        Resonance(omega2=r.omega2 / om_ref2, g=r.g / om_ref2, alpha=r.alpha / c**2)
        for r in spec.resonances
    )
    natural = MaterialSpec(
        name=spec.name,
        resonances=scaled,
        units=UnitSystem.natural(dimension=spec.units.dimension),
    )
    return natural, FrequencyScale(omega=om_ref, c=c)


# ---------------------------------------------------------------------------
# Validation


@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    index: int | None = None


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...]
    warnings: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        def enc(v: Violation) -> dict:
            return {"code": v.code, "message": v.message, "index": v.index}

        return {
            "valid": self.ok,
            "violations": [enc(v) for v in self.violations],
            "warnings": [enc(v) for v in self.warnings],
        }


def validate(spec: MaterialSpec) -> ValidationReport:
    """Check every material invariant; empty violation list means valid.

    Reported (with the offending resonance index where applicable):
    non-positive omega2 or g, negative alpha, coupling sum >= 1, coincident
    resonances, and (as a warning only) a stored charge/mass/density triple
    inconsistent with the direct g.
    """
    violations: list[Violation] = []
    warnings: list[Violation] = []
    per_res_ok = True
    for i, r in enumerate(spec.resonances):
        if not (r.omega2 > 0.0 and math.isfinite(r.omega2)):
            violations.append(Violation(
                "omega2_nonpositive",
                f"resonance {i}: omega2 = {r.omega2!r} must be > 0", i))
            per_res_ok = False
        if not (r.g > 0.0 and math.isfinite(r.g)):
            violations.append(Violation(
                "g_nonpositive", f"resonance {i}: g = {r.g!r} must be > 0", i))
            per_res_ok = False
        if r.alpha < 0.0 or not math.isfinite(r.alpha):
            violations.append(Violation(
                "alpha_negative",
                f"resonance {i}: alpha = {r.alpha!r} must be >= 0", i))
        if r.has_charge_data:
            g_raw = r.charge**2 * r.density / (r.mass * spec.units.eps0)
            if not math.isclose(r.g, g_raw, rel_tol=1e-12):
                warnings.append(Violation(
                    "coupling_conflict",
                    f"resonance {i}: direct g = {r.g!r} disagrees with "
                    f"q^2 rho/(m eps0) = {g_raw!r}; direct g wins", i))
        elif any(v is not None for v in (r.charge, r.mass, r.density)):
            warnings.append(Violation(
                "incomplete_charge_data",
                f"resonance {i}: charge/mass/density triple is incomplete", i))

    if per_res_ok and spec.n_resonances:
        s = spec.coupling_sum
        if not s < 1.0:
            violations.append(Violation(
                "coupling_sum",
                f"sum of g/omega2 = {s:.9g} >= 1; must be < 1 for "
                "N+1 distinct positive dispersion roots"))
        tol = spec.distinct_tol
        om2 = spec.omega2s
        order = np.argsort(om2)
        for a, b in zip(order[:-1], order[1:]):
            if abs(om2[b] - om2[a]) <= tol:
                violations.append(Violation(
                    "degenerate_resonances",
                    f"resonances {a} and {b} have coincident omega2 "
                    f"({om2[a]!r} vs {om2[b]!r})", int(b)))
    return ValidationReport(tuple(violations), tuple(warnings))


def require_valid(spec: MaterialSpec) -> None:
    """Raise InvalidMaterialError unless the spec passes validation."""
    report = validate(spec)
    if not report.ok:
        details = "; ".join(v.message for v in report.violations)
        raise InvalidMaterialError(f"invalid material {spec.name!r}: {details}")


# ---------------------------------------------------------------------------
# Refractive index


def refractive_index_sq(spec: MaterialSpec, omega: float, k: float | None = None) -> float:
    """n^2(omega) = [1 - sum_nu g_nu/(Omega_nu^2(k) - omega^2)]^(-1).

    A negative return value signals a forbidden band. When any alpha_nu is
    nonzero the resonances are k-dependent and ``k`` must be supplied.
    """
    if spec.has_alpha and k is None:
        raise ValueError("material has k-dependent resonances; supply k")
    kval = 0.0 if k is None else k
    om2 = spec.omega2s_at(kval)
    w2 = omega * omega
    if om2.size == 0:
        return 1.0
    tol = DISTINCT_ROOT_RTOL * max(spec.omega_ref2, float(np.max(om2)))
    diff = om2 - w2
    if np.any(np.abs(diff) <= tol):
        raise SingularPointError(
            f"omega^2 = {w2!r} lies on a resonance of {spec.name!r}")
    terms = spec.gs / diff
    bracket = 1.0 - float(np.sum(terms))
    if abs(bracket) <= 1e-9 * (1.0 + float(np.sum(np.abs(terms)))):
        raise SingularPointError(
            f"refractive index diverges at omega^2 = {w2!r} (band edge)")
    return 1.0 / bracket


# ---------------------------------------------------------------------------
# Pole (Sellmeir) form and conversions


@dataclass(frozen=True)
class SellmeirForm:
    """Pole representation n^2 = 1 + sum g~_mu / (O~_mu^2 - omega^2).

    Poles are kept sorted ascending with their strengths aligned.
    """

    poles: tuple[float, ...]
    strengths: tuple[float, ...]

    def __post_init__(self):
        if len(self.poles) != len(self.strengths):
            raise ValueError("poles and strengths must have equal length")
        pairs = sorted(zip(self.poles, self.strengths))
        object.__setattr__(self, "poles", tuple(p for p, _ in pairs))
        object.__setattr__(self, "strengths", tuple(s for _, s in pairs))
        for p, s in pairs:
            if not (p > 0.0 and math.isfinite(p)):
                raise ValueError(f"pole {p!r} must be positive")
            if not (s > 0.0 and math.isfinite(s)):
                raise ValueError(f"strength {s!r} must be positive")

    @property
    def n_poles(self) -> int:
        return len(self.poles)

    def n_squared(self, omega: float) -> float:
        w2 = omega * omega
        poles = np.array(self.poles)
        if poles.size == 0:
            return 1.0
        diff = poles - w2
        tol = DISTINCT_ROOT_RTOL * float(np.max(poles))
        if np.any(np.abs(diff) <= tol):
            raise SingularPointError(f"omega^2 = {w2!r} lies on a pole")
        return 1.0 + float(np.sum(np.array(self.strengths) / diff))

    def to_dict(self) -> dict:
        return {"poles": list(self.poles), "strengths": list(self.strengths)}


def _real_distinct_roots(coeffs: np.ndarray, scale: float, what: str) -> np.ndarray:
    """Solve for roots that must be real, positive and simple."""
    roots = _poly.scaled_roots(coeffs, scale)
    tol = DISTINCT_ROOT_RTOL * scale
    if np.any(np.abs(roots.imag) > tol):
        raise DegenerateRootsError(
            f"{what}: complex (multiple) roots found: {roots!r}")
    real = np.sort(roots.real)
    if np.any(np.diff(real) <= tol):
        raise DegenerateRootsError(f"{what}: repeated roots within tolerance")
    return real


def multipolar_to_sellmeir(spec: MaterialSpec) -> SellmeirForm:
    """Exact partial-fraction conversion of the inverse form to pole form.

    The poles are the roots of a(z) = prod(O^2 - z) - sum g prod'(O^2 - z)
    and the strengths are the residues -prod(O_nu^2 - z_mu)/a'(z_mu), which
    in factored form collapse to -1/A'(z_mu) with A = 1 - sum g/(O^2 - z).
    Requires alpha = 0 (k-independent resonances).
    """
    require_valid(spec)
    if spec.has_alpha:
        raise ValueError("conversion is defined for k-independent resonances")
    if spec.n_resonances == 0:
        return SellmeirForm((), ())
    scale = spec.omega_ref2
    om2 = spec.omega2s / scale
    gs = spec.gs / scale
    a = _poly.inverse_form_numerator(om2, gs)
    roots = _real_distinct_roots(a, 1.0, "pole-form conversion")
    roots = _poly.refine_pole_form_roots(om2, gs, roots)
    a_prime = -np.sum(gs[None, :] / (om2[None, :] - roots[:, None]) ** 2, axis=1)
    strengths = -1.0 / a_prime
    if np.any(roots <= 0.0) or np.any(strengths <= 0.0):
        raise DegenerateRootsError(
            "pole-form conversion produced non-positive poles or strengths")
    return SellmeirForm(tuple(roots * scale), tuple(strengths * scale))


def sellmeir_to_multipolar(form: SellmeirForm, units: UnitSystem | None = None,
                           name: str = "converted") -> MaterialSpec:
    """Invert :func:`multipolar_to_sellmeir` by partial fractions.

    The resonances are the roots of the numerator of n^2(z) and the couplings
    its residues; raises NotRepresentableError when the recovered parameters
    violate the material invariants.
    """
    units = units or UnitSystem.natural()
    if form.n_poles == 0:
        return MaterialSpec(name=name, resonances=(), units=units)
    scale = max(form.poles)
    poles = np.array(form.poles) / scale
    strengths = np.array(form.strengths) / scale
    denom = _poly.linear_factor_product(poles)
    numer = denom.copy()
    for s, partial in zip(strengths, _poly.deleted_products(poles)):
        numer = P.polyadd(numer, s * partial)
    try:
        roots = _real_distinct_roots(numer, 1.0, "inverse-form conversion")
    except DegenerateRootsError as exc:
        raise NotRepresentableError(str(exc)) from exc
    # residues of 1/n^2 at the zeros of n^2: g = 1/B'(root) in factored form;
    # a root colliding with a pole (degenerate input) surfaces as inf/nan here
    with np.errstate(divide="ignore", invalid="ignore"):
        roots = _poly.refine_zero_form_roots(poles, strengths, roots)
        b_prime = np.sum(
            strengths[None, :] / (poles[None, :] - roots[:, None]) ** 2, axis=1)
        gs = 1.0 / b_prime
    if not (np.all(np.isfinite(gs)) and np.all(roots > 0.0) and np.all(gs > 0.0)):
        raise NotRepresentableError(
            "recovered couplings or frequencies are non-positive")
    if float(np.sum(gs / roots)) >= 1.0:
        raise NotRepresentableError("recovered coupling sum g/omega2 >= 1")
    resonances = tuple(
        Resonance(omega2=float(r * scale), g=float(g * scale))
        for r, g in zip(roots, gs)
    )
    return MaterialSpec(name=name, resonances=resonances, units=units)


def sellmeir_from_wavelength_form(B, C_um2, units: UnitSystem) -> SellmeirForm:
    """Ingest the wavelength convention n^2 = 1 + sum B_i l^2/(l^2 - C_i).

    C_i is in micrometers squared; the pole frequencies are
    O~_i^2 = (2 pi c)^2 / C_i and the strengths g~_i = B_i O~_i^2, which
    reproduces the wavelength form identically.
    """
    if units.mode != "si":
        raise UnitMismatchError(
            "wavelength-form coefficients (micrometers) require si units")
    B = np.asarray(B, dtype=float)
    C = np.asarray(C_um2, dtype=float)
    if B.shape != C.shape or B.ndim != 1 or B.size == 0:
        raise ValueError("B and C_um2 must be equal-length nonempty vectors")
    if np.any(B <= 0.0) or np.any(C <= 0.0):
        raise ValueError("wavelength-form coefficients must be positive")
    poles = (2.0 * math.pi * units.c) ** 2 / (C * 1e-12)
    return SellmeirForm(tuple(poles), tuple(B * poles))


# ---------------------------------------------------------------------------
# Material file format (JSON)


def _require_number(obj: dict, key: str, where: str) -> float:
    if key not in obj:
        raise MaterialFormatError(f"{where}: missing required key {key!r}")
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise MaterialFormatError(f"{where}: {key!r} must be a number, got {v!r}")
    return float(v)


def material_from_dict(data: dict) -> MaterialSpec:
    """Build a MaterialSpec from the JSON material-file structure.

    Schema: {"name": str, "dimension": 1|2|3, "units": "natural"|"si",
    "constants": {...}?, "resonances": [{"omega2", "g", "alpha"?}], or
    "sellmeier_wavelength": {"B": [...], "C_um2": [...]}}. Exactly one of
    "resonances"/"sellmeier_wavelength" must be present.
    """
    if not isinstance(data, dict):
        raise MaterialFormatError("material payload must be a JSON object")
    name = data.get("name", "material")
    if not isinstance(name, str):
        raise MaterialFormatError(f"name must be a string, got {name!r}")
    dimension = data.get("dimension", 1)
    if dimension not in (1, 2, 3):
        raise MaterialFormatError(f"dimension must be 1, 2 or 3, got {dimension!r}")
    mode = data.get("units", "natural")
    if mode not in ("natural", "si"):
        raise MaterialFormatError(f'units must be "natural" or "si", got {mode!r}')

    constants = data.get("constants")
    if constants is not None and mode == "natural":
        raise MaterialFormatError('constants block is only allowed with "si" units')
    if mode == "si":
        constants = constants or {}
        if not isinstance(constants, dict):
            raise MaterialFormatError("constants must be an object")
        for key, value in constants.items():
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise MaterialFormatError(
                    f"constants.{key} must be a number, got {value!r}")
        try:
            units = UnitSystem.si(
                area=float(constants.get("area", 1.0)),
                dimension=dimension,
                c=constants.get("c"),
                hbar=constants.get("hbar"),
                eps0=constants.get("eps0"),
            )
        except ValueError as exc:
            raise MaterialFormatError(f"bad constants block: {exc}") from exc
    else:
        units = UnitSystem.natural(dimension=dimension)

    has_res = "resonances" in data
    has_wl = "sellmeier_wavelength" in data
    if has_res == has_wl:
        raise MaterialFormatError(
            'exactly one of "resonances" or "sellmeier_wavelength" is required')

    if has_res:
        res_list = data["resonances"]
        if not isinstance(res_list, list):
            raise MaterialFormatError('"resonances" must be an array')
        resonances = []
        for i, entry in enumerate(res_list):
            if not isinstance(entry, dict):
                raise MaterialFormatError(f"resonance {i} must be an object")
            where = f"resonance {i}"
            resonances.append(Resonance(
                omega2=_require_number(entry, "omega2", where),
                g=_require_number(entry, "g", where),
                alpha=float(entry.get("alpha", 0.0)),
            ))
        return MaterialSpec(name=name, resonances=tuple(resonances), units=units)

    wl = data["sellmeier_wavelength"]
    if not isinstance(wl, dict) or "B" not in wl or "C_um2" not in wl:
        raise MaterialFormatError(
            '"sellmeier_wavelength" must be an object with "B" and "C_um2"')
    if mode != "si":
        raise MaterialFormatError("sellmeier_wavelength requires si units")
    try:
        form = sellmeir_from_wavelength_form(wl["B"], wl["C_um2"], units)
    except (ValueError, TypeError) as exc:
        raise MaterialFormatError(f"bad sellmeier_wavelength block: {exc}") from exc
    return sellmeir_to_multipolar(form, units=units, name=name)


def material_to_dict(spec: MaterialSpec) -> dict:
    """Serialize a MaterialSpec back to the material-file structure."""
    out: dict = {
        "name": spec.name,
        "dimension": spec.units.dimension,
        "units": spec.units.mode,
    }
    if spec.units.mode == "si":
        out["constants"] = {
            "c": spec.units.c,
            "hbar": spec.units.hbar,
            "eps0": spec.units.eps0,
            "area": spec.units.area,
        }
    out["resonances"] = [
        {"omega2": r.omega2, "g": r.g, "alpha": r.alpha} for r in spec.resonances
    ]
    return out


def load_material(path: str | Path) -> MaterialSpec:
    """Read and parse a material JSON file."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise MaterialFormatError(f"cannot read material file {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MaterialFormatError(f"malformed JSON in {path}: {exc}") from exc
    return material_from_dict(data)
