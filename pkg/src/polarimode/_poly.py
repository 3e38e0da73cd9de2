"""Polynomial helpers shared by the dispersion and sum-rule machinery.

All coefficient arrays use the ascending-power convention of
``numpy.polynomial.polynomial`` (index j holds the z**j coefficient).
"""

from __future__ import annotations

import numpy as np
from numpy.polynomial import polynomial as P

_TINY = np.finfo(float).tiny


def linear_factor_product(constants) -> np.ndarray:
    """Coefficients of prod_i (constants[i] - z)."""
    out = np.array([1.0])
    for c in constants:
        out = P.polymul(out, np.array([c, -1.0]))
    return out


def deleted_products(constants) -> list[np.ndarray]:
    """For each i, coefficients of prod_{j != i} (constants[j] - z)."""
    out = []
    for i in range(len(constants)):
        acc = np.array([1.0])
        for j, c in enumerate(constants):
            if j != i:
                acc = P.polymul(acc, np.array([c, -1.0]))
        out.append(acc)
    return out


def inverse_form_numerator(omega2s, gs) -> np.ndarray:
    """Coefficients of a(z) = prod(O_i - z) - sum_i g_i prod_{j != i}(O_j - z).

    This is the numerator of 1 - sum_i g_i/(O_i - z) over the common
    denominator prod(O_i - z); its roots are the poles of the rational
    refractive-index form.
    """
    acc = linear_factor_product(omega2s)
    for g, partial in zip(gs, deleted_products(omega2s)):
        acc = P.polysub(acc, g * partial)
    return acc


def dispersion_b(omega2s) -> np.ndarray:
    """Coefficients of b(z) = z * prod(O_i - z)."""
    return P.polymul(np.array([0.0, 1.0]), linear_factor_product(omega2s))


def newton_refine(coeffs, roots, max_steps: int = 6, target: float = 1e-13):
    """Polish roots of an ascending-coefficient polynomial by Newton steps.

    Two steps are always taken; more follow only while the backward residual
    stays above ``target``.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    deriv = P.polyder(coeffs)
    z = np.asarray(roots, dtype=complex)
    for step in range(max_steps):
        if step >= 2 and np.all(backward_residual(coeffs, z) <= target):
            break
        fz = P.polyval(z, coeffs)
        dz = P.polyval(z, deriv)
        safe = np.abs(dz) > _TINY
        z = np.where(safe, z - fz / np.where(safe, dz, 1.0), z)
    return z


def backward_residual(coeffs, z) -> np.ndarray:
    """|p(z)| scaled by sum_j |c_j||z|^j, a backward-error measure."""
    coeffs = np.asarray(coeffs, dtype=float)
    z = np.asarray(z, dtype=complex)
    num = np.abs(P.polyval(z, coeffs))
    den = P.polyval(np.abs(z), np.abs(coeffs))
    return num / np.maximum(den, _TINY)


def refine_dispersion_roots(om2, gs, kappa, z, steps: int = 3) -> np.ndarray:
    """Newton on the factored dispersion F(z) = z - kappa (1 - sum g/(om2 - z)).

    Monomial-basis evaluation cannot resolve roots that sit within O(kappa)
    of a resonance; the factored form has no cancellation there, so a few
    Newton steps restore full relative accuracy of the root-resonance gap.
    F' = 1 + kappa sum g/(om2 - z)^2 >= 1, so the iteration is stable.
    """
    om2 = np.asarray(om2, dtype=float)
    gs = np.asarray(gs, dtype=float)
    z = np.asarray(z, dtype=float).copy()
    for _ in range(steps):
        diff = om2[None, :] - z[:, None]
        # at kappa below rounding level a root collapses onto its resonance;
        # the collapsed value is already the closest representable root
        touching = np.any(diff == 0.0, axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            f = z - kappa * (1.0 - np.sum(gs[None, :] / diff, axis=1))
            fp = 1.0 + kappa * np.sum(gs[None, :] / diff**2, axis=1)
            step = f / fp
        z = np.where(touching, z, z - step)
    return z


def _refine_gap(om2, gs, kappa, nu: int, gap: float, steps: int = 4) -> float:
    """Newton in gap-space for the offset d = z - om2[nu] of a root hugging
    resonance nu.

    Working directly in d keeps full relative precision of the offset, which
    a float root cannot carry once |d| drops below eps * om2.
    """
    d_others = om2 - om2[nu]
    mask = np.arange(om2.size) != nu
    g_nu = gs[nu]
    base = om2[nu] - kappa
    d = gap
    for _ in range(steps):
        rest = np.sum(gs[mask] / (d_others[mask] - d))
        f = base + d - kappa * g_nu / d + kappa * rest
        fp = 1.0 + kappa * g_nu / (d * d) + kappa * np.sum(
            gs[mask] / (d_others[mask] - d) ** 2)
        d = d - f / fp
    return d


def dispersion_roots_and_gaps(om2, gs, kappa, z):
    """Refined roots plus the gap matrix z_mu - om2_nu at full accuracy.

    Gaps are ordinary differences except where a root hugs a resonance, in
    which case the offset is re-solved in gap space (see ``_refine_gap``).
    """
    om2 = np.asarray(om2, dtype=float)
    gs = np.asarray(gs, dtype=float)
    z = refine_dispersion_roots(om2, gs, kappa, z)
    gaps = z[:, None] - om2[None, :]
    if om2.size:
        for mu in range(z.size):
            nu = int(np.argmin(np.abs(gaps[mu])))
            d = gaps[mu, nu]
            if d == 0.0:
                # root collapsed onto the resonance in z-representation; the
                # true offset kappa g/om2 (+ corrections) lives in gap space
                d = kappa * gs[nu] / om2[nu]
            # refine only a root actually hugging its resonance (z ~ om2),
            # where direct subtraction loses relative precision; elsewhere
            # the reconstruction om2 + d would itself cancel
            if abs(d) < 1e-2 * om2[nu]:
                d = _refine_gap(om2, gs, kappa, nu, d)
                gaps[mu, nu] = d
                z[mu] = om2[nu] + d
    return z, gaps


def refine_pole_form_roots(om2, gs, z, steps: int = 3) -> np.ndarray:
    """Newton on A(z) = 1 - sum g/(om2 - z), the factored form of a(z).

    Also perfectly conditioned when a root approaches a resonance (small g).
    """
    om2 = np.asarray(om2, dtype=float)
    gs = np.asarray(gs, dtype=float)
    z = np.asarray(z, dtype=float).copy()
    for _ in range(steps):
        diff = om2[None, :] - z[:, None]
        f = 1.0 - np.sum(gs[None, :] / diff, axis=1)
        fp = -np.sum(gs[None, :] / diff**2, axis=1)
        z = z - f / fp
    return z


def refine_zero_form_roots(poles, strengths, z, steps: int = 3) -> np.ndarray:
    """Newton on B(z) = 1 + sum s/(poles - z), the factored pole form."""
    poles = np.asarray(poles, dtype=float)
    strengths = np.asarray(strengths, dtype=float)
    z = np.asarray(z, dtype=float).copy()
    for _ in range(steps):
        diff = poles[None, :] - z[:, None]
        f = 1.0 + np.sum(strengths[None, :] / diff, axis=1)
        fp = np.sum(strengths[None, :] / diff**2, axis=1)
        z = z - f / fp
    return z


def scaled_roots(coeffs, z_scale: float) -> np.ndarray:
    """All roots of p, solved in the conditioned variable w = z / z_scale.

    Companion-matrix eigenvalues followed by Newton refinement; the scaling
    keeps the companion matrix well conditioned when resonances span several
    decades.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    # trim exact trailing zeros so the degree is genuine
    nz = np.nonzero(coeffs)[0]
    if nz.size == 0:
        raise ValueError("zero polynomial has no roots")
    coeffs = coeffs[: nz[-1] + 1]
    if coeffs.size == 1:
        return np.array([], dtype=complex)
    if z_scale <= 0:
        raise ValueError(f"z_scale must be positive, got {z_scale}")
    scaled = coeffs * z_scale ** np.arange(coeffs.size)
    scaled = scaled / np.max(np.abs(scaled))
    w = P.polyroots(scaled)
    w = newton_refine(scaled, w)
    return w * z_scale
