"""Commutator sum-rule verification by direct summation and residue calculus.

Consistency of the mode expansion with the canonical equal-time commutators
requires, at every wavenumber k (branch sum over mu, v = electromagnetic
group velocity, O_nu^2 -> O_nu^2(k) when alpha != 0):

    S1            sum_mu k v_mu / omega_mu                                   = 1
    S2[nu,nu']    sum_mu c^2 k^3 v_mu g_nu' /
                      [omega_mu (omega_mu^2 - O_nu^2)(omega_mu^2 - O_nu'^2)] = delta
    S3[nu]        sum_mu k v_mu / [omega_mu (omega_mu^2 - O_nu^2)]           = 0

Each sum equals a sum of residues of a rational function of z = omega^2
built from a(z), b(z) and kappa = c^2 k^2, so the identities can be checked
on a second, independent path that never evaluates a velocity formula.

Note on S3: the single power of omega_mu in the denominator is forced both
by the expansion coefficients Lambda_mu, pi_mu^nu and by the residue proof
through f3 = f1/(z - O_nu^2); the variant with omega_mu^2 does not vanish
and is kept available as a diagnostic (``condition_V_display_variant``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import InvalidMaterialError, OnResonanceError, PoleOnContourError
from .materials import MaterialSpec
from .dispersion import _em_velocity_natural, natural_branch_solution

#: |contour integral| / 2 pi must stay below this in residue_sum_check.
CONTOUR_TOL = 1e-6


def _branch_terms(spec: MaterialSpec, k: float):
    """Roots, velocities, gaps and resonance data in natural units."""
    nspec, fs, kn, z, cp, gaps = natural_branch_solution(spec, k)
    if np.any(gaps == 0.0):
        raise OnResonanceError("a dispersion root collides with a resonance")
    v = _em_velocity_natural(nspec, kn, z, gaps)
    om2 = nspec.omega2s_at(kn)
    return nspec, kn, z, np.sqrt(z), v, om2, gaps


def condition_I(spec: MaterialSpec, k: float) -> float:
    """sum_mu k v_mu/omega_mu; equals 1 for any valid material."""
    _, kn, _, w, v, _, _ = _branch_terms(spec, k)
    return float(np.sum(kn * v / w))


def condition_II(spec: MaterialSpec, k: float) -> np.ndarray:
    """The N x N orthogonality sum; equals the identity matrix."""
    nspec, kn, z, w, v, om2, gaps = _branch_terms(spec, k)
    n = om2.size
    if n == 0:
        return np.zeros((0, 0))
    # c = 1 internally: c^2 k^3 = kn^3
    weights = kn**3 * v / w
    return np.einsum("m,mi,mj,j->ij", weights, 1.0 / gaps, 1.0 / gaps,
                     nspec.gs)


def condition_V(spec: MaterialSpec, k: float) -> np.ndarray:
    """sum_mu k v_mu/[omega_mu (omega_mu^2 - O_nu^2(k))] per nu; equals 0."""
    _, kn, z, w, v, om2, gaps = _branch_terms(spec, k)
    if om2.size == 0:
        return np.zeros(0)
    return np.sum((kn * v / w)[:, None] / gaps, axis=0)


def condition_V_display_variant(spec: MaterialSpec, k: float) -> np.ndarray:
    """Same sum with omega_mu^2 in the denominator; does NOT vanish.

    Diagnostic only: demonstrates that the extra power of omega is
    inconsistent with the expansion coefficients.
    """
    _, kn, z, w, v, om2, gaps = _branch_terms(spec, k)
    if om2.size == 0:
        return np.zeros(0)
    return np.sum((kn * v / z)[:, None] / gaps, axis=0)


# ---------------------------------------------------------------------------
# Rational functions and residues


@dataclass(frozen=True)
class RationalFn:
    """num(z)/den(z) with a factored pole list (location, order).

    The pole list enumerates every root of ``den``; it is the authoritative
    factorization used for residue extraction, while the expanded ``den``
    coefficients support direct evaluation and the contour cross-check.
    """

    num: np.ndarray
    den: np.ndarray
    poles: tuple[tuple[float, int], ...]

    def __call__(self, z):
        return P.polyval(z, self.num) / P.polyval(z, self.den)

    @property
    def decay_order(self) -> int:
        num = np.trim_zeros(np.atleast_1d(self.num), "b")
        den = np.trim_zeros(np.atleast_1d(self.den), "b")
        return len(den) - len(num)

    @property
    def den_lead(self) -> float:
        den = np.trim_zeros(np.atleast_1d(self.den), "b")
        return float(den[-1])

    def residues(self) -> list[tuple[float, float]]:
        """(pole, residue) for every pole; orders 1 and 2 supported."""
        den_deriv = P.polyder(self.den)
        if all(order == 1 for _, order in self.poles):
            locs = np.array([loc for loc, _ in self.poles])
            vals = P.polyval(locs, self.num) / P.polyval(locs, den_deriv)
            return [(float(l), float(r)) for l, r in zip(locs, vals)]
        num_deriv = P.polyder(self.num)
        out: list[tuple[float, float]] = []
        for loc, order in self.poles:
            if order == 1:
                res = P.polyval(loc, self.num) / P.polyval(loc, den_deriv)
            elif order == 2:
                # residue = d/dz [num/q] at the pole, q = den/(z - loc)^2,
                # with q and q'/q reconstructed from the factored pole list
                others = [(s, m) for s, m in self.poles if s != loc]
                q = self.den_lead * math.prod(
                    (loc - s) ** m for s, m in others)
                log_q = sum(m / (loc - s) for s, m in others)
                res = (P.polyval(loc, num_deriv)
                       - P.polyval(loc, self.num) * log_q) / q
            else:
                raise ValueError(f"unsupported pole order {order}")
            out.append((loc, float(res)))
        return out


def _f1_parts(spec: MaterialSpec, k: float):
    nspec, fs, kn, z, cp, _ = natural_branch_solution(spec, k)
    num = cp.kappa * cp.a
    den = P.polymul(np.array([0.0, 1.0]), cp.p)
    poles = [(0.0, 1)] + [(float(zi), 1) for zi in z]
    return nspec, kn, cp, num, den, poles, z


def build_f1(spec: MaterialSpec, k: float) -> RationalFn:
    """f1(z) = kappa a(z) / (z [b(z) - kappa a(z)]); N+2 simple poles.

    Decays like 1/z^2, so its residues sum to zero; the residues at the
    dispersion roots are exactly the summands of condition I.
    """
    _, _, _, num, den, poles, _ = _f1_parts(spec, k)
    return RationalFn(num, den, tuple(poles))


def build_f2(spec: MaterialSpec, k: float, nu: int, nu_prime: int) -> RationalFn:
    """f2 = kappa g_nu' f1 / [(z - O_nu^2)(z - O_nu'^2)]; proves condition II.

    For nu == nu' the resonance pole is double and its residue involves the
    derivative of f1 there.
    """
    nspec, kn, cp, num, den, poles, _ = _f1_parts(spec, k)
    om2 = cp.omega2s_at_k
    n = om2.size
    if not (0 <= nu < n and 0 <= nu_prime < n):
        raise ValueError(f"resonance indices ({nu}, {nu_prime}) out of range")
    kappa = kn * kn
    num = kappa * nspec.gs[nu_prime] * num
    if nu == nu_prime:
        den = P.polymul(den, P.polymul(
            np.array([-om2[nu], 1.0]), np.array([-om2[nu], 1.0])))
        poles = poles + [(float(om2[nu]), 2)]
    else:
        den = P.polymul(den, np.array([-om2[nu], 1.0]))
        den = P.polymul(den, np.array([-om2[nu_prime], 1.0]))
        poles = poles + [(float(om2[nu]), 1), (float(om2[nu_prime]), 1)]
    return RationalFn(num, den, tuple(poles))


def build_f3(spec: MaterialSpec, k: float, nu: int) -> RationalFn:
    """f3 = f1 / (z - O_nu^2); proves condition V (the residues at z = 0 and
    z = O_nu^2 are 1/O_nu^2 and -1/O_nu^2 and cancel)."""
    _, _, cp, num, den, poles, _ = _f1_parts(spec, k)
    om2 = cp.omega2s_at_k
    if not 0 <= nu < om2.size:
        raise ValueError(f"resonance index {nu} out of range")
    den = P.polymul(den, np.array([-om2[nu], 1.0]))
    poles = poles + [(float(om2[nu]), 1)]
    return RationalFn(num, den, tuple(poles))


def residue_sum_check(fn: RationalFn, contour_nodes: int = 256,
                      radius: float | None = None) -> float:
    """Sum of all residues of ``fn``; must vanish when decay order >= 2.

    Cross-checked by trapezoidal contour integration on a circle of radius
    10x the outermost pole (or ``radius`` if given): |closed integral|/2 pi
    must stay below CONTOUR_TOL. Raises PoleOnContourError if a pole sits on
    the contour (impossible with the automatic radius, guarded for custom
    ones).
    """
    if fn.decay_order < 2:
        raise ValueError(
            f"residue sum needs decay order >= 2 at infinity, got {fn.decay_order}")
    total = sum(res for _, res in fn.residues())
    if radius is None:
        radius = 10.0 * max((abs(loc) for loc, _ in fn.poles), default=1.0)
    if radius <= 0.0:
        radius = 1.0
    for loc, _ in fn.poles:
        if abs(abs(loc) - radius) < 1e-6 * radius:
            raise PoleOnContourError(
                f"pole at {loc!r} lies on the verification contour")
    theta = 2.0 * np.pi * np.arange(contour_nodes) / contour_nodes
    zs = radius * np.exp(1j * theta)
    integral = np.sum(fn(zs) * 1j * zs) * (2.0 * np.pi / contour_nodes)
    if abs(integral) / (2.0 * np.pi) > CONTOUR_TOL:
        raise ArithmeticError(
            f"contour cross-check failed: |integral|/2pi = "
            f"{abs(integral) / (2.0 * np.pi):.3e}")
    return float(total)


def _f1_root_residues(kn: float, z: np.ndarray, gaps: np.ndarray,
                      gs: np.ndarray, p_lead: float) -> np.ndarray:
    """Residues of f1 at the dispersion roots, kappa a(z_mu)/(z_mu p'(z_mu)).

    Every factor is evaluated in product form: a(z) = prod(O^2 - z) times
    (1 - sum g/(O^2 - z)) through the tracked gaps, and p'(z_mu) =
    p_lead prod_{j != mu}(z_mu - z_j) through root separations. Monomial
    evaluation of the same quantities loses all accuracy when shifted
    resonances cluster; the product form never involves a velocity formula,
    so the path stays independent of the direct summation.
    """
    kappa = kn * kn
    m = z.size
    a_vals = np.ones(m)
    if gs.size:
        a_vals = (np.prod(-gaps, axis=1)
                  * (1.0 + np.sum(gs[None, :] / gaps, axis=1)))
    p_deriv = np.empty(m)
    for mu in range(m):
        seps = z[mu] - np.delete(z, mu)
        p_deriv[mu] = p_lead * np.prod(seps)
    return kappa * a_vals / (z * p_deriv)


def residue_condition_I(spec: MaterialSpec, k: float) -> float:
    """Condition I evaluated on the residue path only.

    Sums the residues of f1 over the dispersion roots -- rational-function
    algebra throughout, no group-velocity formula -- and must agree with
    the direct summation to 1e-9.
    """
    nspec, fs, kn, z, cp, gaps = natural_branch_solution(spec, k)
    p_lead = float(np.trim_zeros(cp.p, "b")[-1])
    return float(np.sum(_f1_root_residues(kn, z, gaps, nspec.gs, p_lead)))


def residue_condition_II(spec: MaterialSpec, k: float, nu: int,
                         nu_prime: int) -> float:
    """S2[nu, nu'] on the residue path: since all residues of f2 sum to
    zero, the branch-sum part equals minus the residues at z = 0 and at the
    resonance poles."""
    fn = build_f2(spec, k, nu, nu_prime)
    n_roots = spec.n_resonances + 1
    res = fn.residues()
    # pole order by construction: (0), the N+1 dispersion roots, resonances
    outside = [res[0][1]] + [r for _, r in res[1 + n_roots:]]
    return float(-sum(outside))


def residue_condition_V(spec: MaterialSpec, k: float, nu: int) -> float:
    """S3[nu] on the residue path (root residues of f3; the z = 0 and
    resonance-pole residues cancel analytically)."""
    fn = build_f3(spec, k, nu)
    n_roots = spec.n_resonances + 1
    res = fn.residues()
    return float(sum(r for _, r in res[1:1 + n_roots]))


# ---------------------------------------------------------------------------
# Single-oscillator closed form


@dataclass(frozen=True)
class SingleOscillatorSolution:
    """Closed-form two-branch solution for one resonance.

    z_pm = (c^2 k^2 + O^2 +- Delta)/2 with
    Delta = sqrt((c^2 k^2 + O^2)^2 - 4 c^2 k^2 (O^2 - g)), and

        k v_pm / omega_pm = (c^2 k^2 / 2 z_pm) (1 +- (c^2 k^2 - O^2 + 2g)/Delta).

    Branch order in the tuples is (lower, upper). Evaluation uses the
    algebraically identical cancellation-free rearrangements
    Delta^2 = (kappa - O^2)^2 + 4 kappa g, z_- z_+ = kappa (O^2 - g) and
    Delta^2 - R^2 = 4 g (O^2 - g) with R = kappa - O^2 + 2g, so every field
    keeps full relative accuracy at extreme k.
    """

    delta: float
    z: tuple[float, float]
    omega: tuple[float, float]
    kv_over_omega: tuple[float, float]
    v: tuple[float, float]


def single_oscillator_oracle(omega2: float, g: float, c: float,
                             k: float) -> SingleOscillatorSolution:
    """Quadratic-formula oracle for N = 1; requires O^2 > g > 0."""
    if not (g > 0.0 and omega2 > g):
        raise InvalidMaterialError(
            f"single-oscillator closed form needs omega2 > g > 0, "
            f"got omega2 = {omega2!r}, g = {g!r}")
    if not (k > 0.0 and c > 0.0):
        raise ValueError("k and c must be positive")
    kappa = c * c * k * k
    delta = math.sqrt((kappa - omega2) ** 2 + 4.0 * kappa * g)
    z_plus = 0.5 * (kappa + omega2 + delta)
    z_minus = kappa * (omega2 - g) / z_plus
    r = kappa - omega2 + 2.0 * g
    discr = 4.0 * g * (omega2 - g)  # = delta^2 - r^2 exactly
    if r >= 0.0:
        one_minus = discr / (delta * (delta + r))
        one_plus = (delta + r) / delta
    else:
        one_plus = discr / (delta * (delta - r))
        one_minus = (delta - r) / delta
    r_minus = (kappa / (2.0 * z_minus)) * one_minus
    r_plus = (kappa / (2.0 * z_plus)) * one_plus
    w_minus, w_plus = math.sqrt(z_minus), math.sqrt(z_plus)
    return SingleOscillatorSolution(
        delta=delta,
        z=(z_minus, z_plus),
        omega=(w_minus, w_plus),
        kv_over_omega=(r_minus, r_plus),
        v=(r_minus * w_minus / k, r_plus * w_plus / k),
    )


# ---------------------------------------------------------------------------
# Per-k report


@dataclass(frozen=True)
class SumRuleReport:
    """All three sum rules at one k, plus the independent residue path.

    ``s3`` holds the vanishing form (single omega power); ``s3_display``
    holds the diagnostic variant with omega^2. When
    ``gate_on_display_variant`` is set, pass/fail is judged on the variant
    instead (it fails for any coupled material, by design).
    """

    k: float
    s1: float
    s2: np.ndarray
    s3: np.ndarray
    s3_display: np.ndarray
    residue_s1: float
    tolerance: float = 1e-8
    gate_on_display_variant: bool = False

    @property
    def s2_deviation(self) -> float:
        n = self.s2.shape[0]
        if n == 0:
            return 0.0
        dev = self.s2 - np.eye(n)
        return float(np.max(np.sum(np.abs(dev), axis=1)))

    @property
    def s2_max_offdiag(self) -> float:
        n = self.s2.shape[0]
        if n < 2:
            return 0.0
        off = self.s2 - np.diag(np.diag(self.s2))
        return float(np.max(np.abs(off)))

    @property
    def s2_max_diag_err(self) -> float:
        n = self.s2.shape[0]
        if n == 0:
            return 0.0
        return float(np.max(np.abs(np.diag(self.s2) - 1.0)))

    @property
    def s3_max(self) -> float:
        gated = self.s3_display if self.gate_on_display_variant else self.s3
        return float(np.max(np.abs(gated))) if gated.size else 0.0

    @property
    def s3_display_max(self) -> float:
        return float(np.max(np.abs(self.s3_display))) if self.s3_display.size else 0.0

    @property
    def max_abs_residual(self) -> float:
        s3 = float(np.max(np.abs(self.s3))) if self.s3.size else 0.0
        return max(abs(self.s1 - 1.0), self.s2_deviation, s3)

    @property
    def passed(self) -> bool:
        return (
            abs(self.s1 - 1.0) <= self.tolerance
            and self.s2_deviation <= self.tolerance
            and self.s3_max <= self.tolerance
            and abs(self.residue_s1 - self.s1) <= max(1e-9, self.tolerance)
        )

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "s1": self.s1,
            "s2_max_offdiag": self.s2_max_offdiag,
            "s2_max_diag_err": self.s2_max_diag_err,
            "s3_max": self.s3_max,
            "residue_s1": self.residue_s1,
            "pass": self.passed,
            "erratum_variant_s3": self.s3_display_max,
        }


def sum_rule_report(spec: MaterialSpec, k: float, tolerance: float = 1e-8,
                    use_erratum_vform: bool = False) -> SumRuleReport:
    """Evaluate all sum rules at one k from a single branch solve.

    Values are nondimensionalized, so the pass threshold is scale-free for
    SI materials as well.
    """
    nspec, fs, kn, z, cp, gaps = natural_branch_solution(spec, k)
    if np.any(gaps == 0.0):
        raise OnResonanceError("a dispersion root collides with a resonance")
    v = _em_velocity_natural(nspec, kn, z, gaps)
    w = np.sqrt(z)
    om2 = nspec.omega2s_at(kn)
    n = om2.size

    s1 = float(np.sum(kn * v / w))
    if n == 0:
        s2 = np.zeros((0, 0))
        s3 = np.zeros(0)
        s3d = np.zeros(0)
    else:
        s2 = np.einsum("m,mi,mj,j->ij", kn**3 * v / w,
                       1.0 / gaps, 1.0 / gaps, nspec.gs)
        s3 = np.sum((kn * v / w)[:, None] / gaps, axis=0)
        s3d = np.sum((kn * v / z)[:, None] / gaps, axis=0)

    # residue path for S1: residues of f1 at the roots, no velocities
    p_lead = float(np.trim_zeros(cp.p, "b")[-1])
    residue_s1 = float(np.sum(_f1_root_residues(kn, z, gaps, nspec.gs, p_lead)))

    return SumRuleReport(
        k=k, s1=s1, s2=s2, s3=s3, s3_display=s3d, residue_s1=residue_s1,
        tolerance=tolerance, gate_on_display_variant=use_erratum_vform,
    )
