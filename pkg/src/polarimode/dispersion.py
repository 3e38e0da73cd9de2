"""Branch solving, group velocities, forbidden bands and dispersion sweeps.

At fixed wavenumber k the mode frequencies are the roots of the degree-(N+1)
polynomial p(z) = b(z) - kappa a(z) in z = omega^2, where kappa = c^2 k^2,

    a(z) = prod(O_nu^2(k) - z) - sum_nu g_nu prod_{j != nu}(O_j^2(k) - z),
    b(z) = z prod(O_nu^2(k) - z),

which is the polynomial form of omega^2 = c^2 k^2 / n^2(omega). Roots are
companion-matrix eigenvalues refined by Newton steps. For a valid material
they are real, positive and simple, one branch below the lowest forbidden
band, one above the highest, and one between each consecutive pair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P
from scipy import optimize

from . import _poly
from .errors import (
    DegenerateSpectrumError,
    ForbiddenBandError,
    NonPositiveRootError,
    OnResonanceError,
)
from .materials import (
    DISTINCT_ROOT_RTOL,
    FrequencyScale,
    MaterialSpec,
    multipolar_to_sellmeir,
    nondimensionalize,
    refractive_index_sq,
    require_valid,
)

#: Backward-residual target for refined dispersion roots.
ROOT_RESIDUAL_TOL = 1e-12


@dataclass(frozen=True)
class CharPolynomial:
    """The characteristic polynomial p(z) = b(z) - kappa a(z) at one k.

    Coefficients are ascending in z and exact convolutions of the resonance
    data (no sampling). For SI materials the polynomial is built in the
    nondimensionalized variables recorded in ``scale``; for natural-unit
    materials ``scale`` is the identity and the coefficients are literal.
    """

    p: np.ndarray
    a: np.ndarray
    b: np.ndarray
    kappa: float
    k: float
    omega2s_at_k: np.ndarray
    scale: FrequencyScale

    def eval_p(self, z):
        return P.polyval(z, self.p)

    def eval_a(self, z):
        return P.polyval(z, self.a)

    def eval_b(self, z):
        return P.polyval(z, self.b)


@dataclass(frozen=True)
class BranchPoint:
    """One solved dispersion branch at one wavenumber.

    ``v_group`` is the total slope d omega/dk (including any polarization
    transport from alpha != 0); ``v_em`` is the electromagnetic component

        v_em = (omega/k) [1 + sum_nu k^2 c^2 g_nu/(O_nu^2(k)-omega^2)^2]^(-1),

    which coincides with v_group when every alpha vanishes.
    """

    branch: int
    k: float
    omega: float
    v_group: float
    v_em: float
    z: float
    sigma: int | None = None


@dataclass(frozen=True)
class ForbiddenBand:
    """Open frequency interval with n^2 < 0 (no propagating mode)."""

    omega_lo: float
    omega_hi: float


def _char_polynomial_natural(nspec: MaterialSpec, kn: float,
                             scale: FrequencyScale, k_orig: float) -> CharPolynomial:
    om2 = nspec.omega2s_at(kn)
    gs = nspec.gs
    kappa = kn * kn  # c = 1 internally
    a = _poly.inverse_form_numerator(om2, gs)
    b = _poly.dispersion_b(om2)
    p = P.polysub(b, kappa * a)
    return CharPolynomial(p=p, a=a, b=b, kappa=kappa, k=k_orig,
                          omega2s_at_k=om2, scale=scale)


def char_polynomial(spec: MaterialSpec, k: float) -> CharPolynomial:
    """Build p(z) = b(z) - kappa a(z) by exact coefficient convolution."""
    require_valid(spec)
    nspec, fs = nondimensionalize(spec)
    return _char_polynomial_natural(nspec, float(fs.k_natural(k)), fs, k)


def _solve_z_natural(nspec: MaterialSpec,
                     cp: CharPolynomial) -> tuple[np.ndarray, np.ndarray]:
    """All N+1 roots of p (validated real / positive / distinct, ascending)
    plus the gap matrix z_mu - O_nu^2(k) at full relative accuracy."""
    zscale = max(1.0, cp.kappa,
                 float(np.max(cp.omega2s_at_k)) if cp.omega2s_at_k.size else 1.0)
    roots = _poly.scaled_roots(cp.p, zscale)
    tol = DISTINCT_ROOT_RTOL * zscale
    if np.any(np.abs(roots.imag) > tol):
        raise DegenerateSpectrumError(
            f"complex root pair at k = {cp.k!r}: roots {roots!r}")
    z = np.sort(roots.real)
    # factored-form polish: restores the root-resonance gap (and the sign of
    # the lowest root at tiny kappa) to full relative accuracy, which the
    # monomial basis cannot represent
    z, gaps = _poly.dispersion_roots_and_gaps(
        cp.omega2s_at_k, nspec.gs, cp.kappa, z)
    order = np.argsort(z)
    z = z[order]
    gaps = gaps[order]
    if np.any(z <= 0.0):
        raise NonPositiveRootError(
            f"non-positive dispersion root at k = {cp.k!r}: {z!r}")
    if z.size > 1 and np.any(np.diff(z) <= tol):
        raise DegenerateSpectrumError(
            f"coincident dispersion roots at k = {cp.k!r}: {z!r}")
    residual = _poly.backward_residual(cp.p, z)
    if np.any(residual > ROOT_RESIDUAL_TOL):
        raise DegenerateSpectrumError(
            f"root refinement stalled at k = {cp.k!r} "
            f"(residual {residual.max():.3e})")
    return z, gaps


def _em_velocity_natural(nspec: MaterialSpec, kn: float, z: np.ndarray,
                         gaps: np.ndarray | None = None) -> np.ndarray:
    """v_em for each root (natural units, c = 1).

    ``gaps`` (z_mu - O_nu^2, from the solver) carries the root-resonance
    offsets at full relative accuracy; without it they are recovered by
    subtraction, which is fine away from resonances.
    """
    om2 = nspec.omega2s_at(kn)
    w = np.sqrt(z)
    if om2.size == 0:
        return np.ones_like(w)
    diff = gaps if gaps is not None else z[:, None] - om2[None, :]
    with np.errstate(divide="ignore"):
        s = np.sum(kn * kn * nspec.gs[None, :] / diff**2, axis=1)
    return np.where(np.isinf(s), 0.0, (w / kn) / (1.0 + s))


def _total_velocity_natural(nspec: MaterialSpec, kn: float, z: np.ndarray,
                            gaps: np.ndarray | None = None) -> np.ndarray:
    """d omega/dk by implicit differentiation, including d O^2(k)/dk terms."""
    om2 = nspec.omega2s_at(kn)
    w = np.sqrt(z)
    if om2.size == 0:
        return np.ones_like(w)
    kappa = kn * kn
    diff = gaps if gaps is not None else z[:, None] - om2[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        s_em = np.sum(kappa * nspec.gs[None, :] / diff**2, axis=1)
        s_alpha = np.sum(nspec.gs[None, :] * nspec.alphas[None, :] / diff**2,
                         axis=1)
        v = (w / kn) * (1.0 + (kn * kn * kappa / z) * s_alpha) / (1.0 + s_em)
    # collapsed root (gap underflowed entirely): the slope limits to the
    # resonance's own transport, alpha k / omega
    for mu in np.nonzero(np.any(diff == 0.0, axis=1))[0]:
        nu = int(np.nonzero(diff[mu] == 0.0)[0][0])
        v[mu] = nspec.alphas[nu] * kn / w[mu]
    return v


def natural_branch_solution(
    spec: MaterialSpec, k: float,
) -> tuple[MaterialSpec, FrequencyScale, float, np.ndarray, CharPolynomial,
           np.ndarray]:
    """Shared entry point: validated nondimensional spec, scale, kn, roots z,
    the characteristic polynomial the roots came from, and the gap matrix
    z_mu - O_nu^2(k)."""
    require_valid(spec)
    if not (k > 0.0 and math.isfinite(k)):
        raise ValueError(f"k must be positive and finite, got {k!r}")
    nspec, fs = nondimensionalize(spec)
    kn = float(fs.k_natural(k))
    cp = _char_polynomial_natural(nspec, kn, fs, k)
    z, gaps = _solve_z_natural(nspec, cp)
    return nspec, fs, kn, z, cp, gaps


def solve_branches(spec: MaterialSpec, k: float) -> list[BranchPoint]:
    """Solve all N+1 branches at k, labeled ascending in omega."""
    nspec, fs, kn, z, _, gaps = natural_branch_solution(spec, k)
    v_em = _em_velocity_natural(nspec, kn, z, gaps)
    if nspec.has_alpha:
        v_tot = _total_velocity_natural(nspec, kn, z, gaps)
    else:
        v_tot = v_em
    return [
        BranchPoint(
            branch=mu,
            k=k,
            omega=float(fs.omega_original(math.sqrt(zi))),
            v_group=float(fs.velocity_original(v_tot[mu])),
            v_em=float(fs.velocity_original(v_em[mu])),
            z=float(fs.z_original(zi)),
        )
        for mu, zi in enumerate(z)
    ]


def group_velocity(spec: MaterialSpec, bp: BranchPoint) -> float:
    """v = (omega/k) [1 + sum k^2 c^2 g/(O^2 - omega^2)^2]^(-1), alpha = 0 only."""
    if spec.has_alpha:
        raise ValueError(
            "material has alpha != 0; use em_group_velocity or "
            "total_group_velocity")
    c = spec.units.c
    om2 = spec.omega2s
    w2 = bp.omega**2
    if om2.size == 0:
        return c
    diff = om2 - w2
    # omega^2 subtraction cannot resolve gaps at rounding level
    if np.any(np.abs(diff) <= 4.0 * np.finfo(float).eps * np.max(om2)):
        raise OnResonanceError(
            f"branch frequency {bp.omega!r} is unresolvably close to a "
            "resonance; use the velocity attached by solve_branches")
    s = float(np.sum(bp.k**2 * c**2 * spec.gs / diff**2))
    return (bp.omega / bp.k) / (1.0 + s)


def em_group_velocity(spec: MaterialSpec, bp: BranchPoint) -> float:
    """Electromagnetic group-velocity component; equals group_velocity at alpha = 0."""
    c = spec.units.c
    om2 = spec.omega2s_at(bp.k)
    w2 = bp.omega**2
    if om2.size == 0:
        return c
    diff = om2 - w2
    if np.any(np.abs(diff) <= 4.0 * np.finfo(float).eps * np.max(om2)):
        raise OnResonanceError(
            f"branch frequency {bp.omega!r} is unresolvably close to a "
            "resonance; use the velocity attached by solve_branches")
    s = float(np.sum(bp.k**2 * c**2 * spec.gs / diff**2))
    return (bp.omega / bp.k) / (1.0 + s)


def total_group_velocity(spec: MaterialSpec, branch_index: int, k: float) -> float:
    """d omega_mu/dk including the k-dependence of the resonances."""
    nspec, fs, kn, z, _, gaps = natural_branch_solution(spec, k)
    if not 0 <= branch_index < z.size:
        raise ValueError(f"branch index {branch_index} out of range 0..{z.size - 1}")
    v = _total_velocity_natural(nspec, kn, z, gaps)[branch_index]
    return float(fs.velocity_original(v))


def k_of_omega(spec: MaterialSpec, omega: float) -> tuple[float, float]:
    """Invert the dispersion relation: k = +- omega n(omega)/c (alpha = 0)."""
    if spec.has_alpha:
        raise ValueError(
            "k(omega) inversion is defined for k-independent resonances")
    require_valid(spec)
    if not (omega > 0.0 and math.isfinite(omega)):
        raise ValueError(f"omega must be positive and finite, got {omega!r}")
    n2 = refractive_index_sq(spec, omega)
    if n2 < 0.0:
        raise ForbiddenBandError(
            f"omega = {omega!r} lies in a forbidden band (n^2 = {n2:.6g})")
    k = omega * math.sqrt(n2) / spec.units.c
    return (k, -k)


def forbidden_bands(spec: MaterialSpec) -> list[ForbiddenBand]:
    """The N open intervals where n^2 < 0, each of the form (O~_nu, O_nu).

    The lower edge of each band is a pole of the rational pole form (a root
    of a(z)); the upper edge is the resonance itself (where b(z) = 0).
    """
    if spec.has_alpha:
        raise ValueError("band structure is k-independent only for alpha = 0")
    require_valid(spec)
    if spec.n_resonances == 0:
        return []
    form = multipolar_to_sellmeir(spec)
    lows = np.sqrt(np.array(form.poles))
    highs = np.sqrt(np.sort(spec.omega2s))
    return [ForbiddenBand(float(lo), float(hi)) for lo, hi in zip(lows, highs)]


# ---------------------------------------------------------------------------
# Zero-dispersion points


def _beta2_natural(nspec: MaterialSpec, w: float, lo: float, hi: float) -> float:
    """d^2 k/d omega^2 by central differences with one Richardson step.

    Step h = 1e-4 omega, clamped so the stencil stays inside (lo, hi).
    """
    gap = min(w - lo, hi - w)
    h = min(1e-4 * w, 0.125 * gap)

    def kf(x: float) -> float:
        return x * math.sqrt(refractive_index_sq(nspec, x))

    def d2(hh: float) -> float:
        return (kf(w + hh) - 2.0 * kf(w) + kf(w - hh)) / (hh * hh)

    return (4.0 * d2(0.5 * h) - d2(h)) / 3.0


def zero_dispersion_points(spec: MaterialSpec, grid_points: int = 256) -> list[float]:
    """Frequencies where d^2 k/d omega^2 changes sign inside a transmission band.

    Each finite transmission band (below the first forbidden band and between
    consecutive bands) is scanned on a uniform grid; bracketed sign changes
    are refined by bisection. The unbounded band above the last resonance is
    not scanned. Returns an empty list when no sign change exists.
    """
    bands = forbidden_bands(spec)
    if not bands:
        return []
    nspec, fs = nondimensionalize(spec)
    nbands = [(float(fs.omega_natural(b.omega_lo)), float(fs.omega_natural(b.omega_hi)))
              for b in bands]
    windows = [(0.0, nbands[0][0])]
    windows += [(nbands[i][1], nbands[i + 1][0]) for i in range(len(nbands) - 1)]

    found: list[float] = []
    for lo, hi in windows:
        width = hi - lo
        if width <= 0.0:
            continue
        margin = 1e-3 * width
        grid = np.linspace(lo + margin, hi - margin, grid_points)
        vals = np.array([_beta2_natural(nspec, w, lo, hi) for w in grid])
        signs = np.sign(vals)
        for i in range(len(grid) - 1):
            if signs[i] == 0.0:
                found.append(float(grid[i]))
            elif signs[i] * signs[i + 1] < 0.0:
                root = optimize.brentq(
                    lambda w: _beta2_natural(nspec, w, lo, hi),
                    grid[i], grid[i + 1], xtol=1e-13 * hi)
                found.append(float(root))
    return sorted(float(fs.omega_original(w)) for w in found)


# ---------------------------------------------------------------------------
# Sweep output


SWEEP_HEADER = "k,branch,omega,v_group,v_em,z"


def sweep_rows(spec: MaterialSpec, ks) -> list[BranchPoint]:
    """Branch points for every k, ordered k ascending then branch ascending."""
    rows: list[BranchPoint] = []
    for k in sorted(float(k) for k in ks):
        rows.extend(solve_branches(spec, k))
    return rows


def sweep_csv(spec: MaterialSpec, ks) -> str:
    """CSV sweep with 17-significant-digit floats (deterministic output)."""
    lines = [SWEEP_HEADER]
    for bp in sweep_rows(spec, ks):
        lines.append(
            f"{bp.k:.17g},{bp.branch},{bp.omega:.17g},"
            f"{bp.v_group:.17g},{bp.v_em:.17g},{bp.z:.17g}")
    return "\n".join(lines) + "\n"
