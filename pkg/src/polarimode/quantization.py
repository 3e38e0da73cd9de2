"""Quantized mode-expansion coefficients and smeared commutator kernels.

Each branch mu carries one (annihilation-operator) mode per wavenumber; the
field amplitudes are fixed by the canonical commutators up to phase, which
we resolve by taking the dual-potential amplitude Lambda_mu(k) real positive
and carrying every i factor explicitly:

    1D:  Lambda^2 = hbar c^2 eps0 k v / (4 pi A omega^2)
         Pi      = -i omega mu_perm Lambda
         p^nu    = +i k g_nu Lambda / (O_nu^2(k) - omega^2)
         pi^nu   = k omega Lambda / (eps0 (O_nu^2(k) - omega^2))

    3D transverse (sigma = 1, 2, amplitudes along u_sigma and
    e_sigma = khat x u_sigma):
         Lambda^2 = hbar v_em eps_mu / (2 A k (2 pi)^n)

    3D longitudinal (sigma = 0): |p| = [hbar g eps0 / (2 A (2 pi)^n O(k))]^(1/2)

with eps_mu(k) = c^2 k^2 eps0 / omega^2 the branch permittivity and v the
electromagnetic group velocity. Field coefficients follow from D = dLambda
(curl in 3D), E = D / eps_mu per branch, B = Pi; with v = c and
eps_mu = eps0 they reduce to the familiar vacuum expansion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    CutoffTooSmallError,
    ForbiddenBandError,
    OnResonanceError,
    UnphysicalModeError,
    ZeroGroupVelocityError,
)
from .materials import MaterialSpec, refractive_index_sq
from .dispersion import BranchPoint, solve_branches
from .eigensystem import transverse_basis


@dataclass(frozen=True)
class ModeCoefficients:
    """Expansion coefficients of one (branch, polarization, k) mode.

    Scalar amplitudes; in 3D they multiply the unit vectors ``u_sigma``
    (Lambda, Pi, B) and ``e_sigma`` (p, pi, D, E). ``p_nu[j]`` pairs with
    resonance j, likewise ``pi_nu``.
    """

    branch: int
    sigma: int | None
    k: float
    omega: float
    v: float
    Lambda: float
    Pi: complex
    p_nu: np.ndarray
    pi_nu: np.ndarray
    eps_branch: float
    D_coef: complex
    E_coef: complex
    B_coef: complex
    u_sigma: np.ndarray | None = None
    e_sigma: np.ndarray | None = None


def _resonance_denominators(spec: MaterialSpec, k: float, omega: float) -> np.ndarray:
    om2 = spec.omega2s_at(k)
    if om2.size == 0:
        return om2
    diff = om2 - omega * omega
    if np.any(np.abs(diff) <= 4.0 * np.finfo(float).eps * np.max(om2)):
        raise OnResonanceError(
            f"branch frequency {omega!r} is unresolvably close to a resonance")
    return diff


def mode_coefficients_1d(spec: MaterialSpec, bp: BranchPoint) -> ModeCoefficients:
    """Quantized amplitudes for one 1D branch point."""
    u = spec.units
    diff = _resonance_denominators(spec, bp.k, bp.omega)
    v = bp.v_em
    lam2 = u.hbar * u.c**2 * u.eps0 * bp.k * v / (4.0 * math.pi * u.area * bp.omega**2)
    lam = math.sqrt(lam2)
    eps_branch = u.c**2 * bp.k**2 * u.eps0 / bp.omega**2
    pi_op = -1j * bp.omega * u.mu * lam
    p_nu = 1j * bp.k * spec.gs * lam / diff
    pi_nu = (bp.k * bp.omega * lam / (u.eps0 * diff)).astype(complex)
    d_coef = 1j * bp.k * lam
    return ModeCoefficients(
        branch=bp.branch, sigma=None, k=bp.k, omega=bp.omega, v=v,
        Lambda=lam, Pi=pi_op, p_nu=p_nu, pi_nu=pi_nu, eps_branch=eps_branch,
        D_coef=d_coef, E_coef=d_coef / eps_branch, B_coef=pi_op,
    )


def mode_coefficients_3d(spec: MaterialSpec, bp: BranchPoint, sigma: int,
                         khat=(0.0, 0.0, 1.0)) -> ModeCoefficients:
    """Quantized amplitudes for one 3D mode.

    sigma = 1, 2 selects the transverse polarizations (deterministic basis
    from ``transverse_basis``); sigma = 0 selects the longitudinal mode of
    resonance ``bp.branch - 1`` (branch 0 with sigma = 0 is the gauge mode
    and is rejected).
    """
    u = spec.units
    khat = np.asarray(khat, dtype=float)
    khat = khat / np.linalg.norm(khat)
    n_dim = u.dimension
    norm_const = 2.0 * u.area * (2.0 * math.pi) ** n_dim
    u1, u2 = transverse_basis(khat)

    if sigma == 0:
        if bp.branch == 0:
            raise UnphysicalModeError(
                "branch 0 with sigma = 0 is the gauge-violating mode")
        nu = bp.branch - 1
        if not 0 <= nu < spec.n_resonances:
            raise ValueError(f"no resonance for longitudinal branch {bp.branch}")
        om_nu = math.sqrt(spec.omega2s_at(bp.k)[nu])
        p_mag = math.sqrt(u.hbar * spec.gs[nu] * u.eps0 / (norm_const * om_nu))
        p_nu = np.zeros(spec.n_resonances, dtype=complex)
        p_nu[nu] = p_mag
        pi_nu = np.zeros(spec.n_resonances, dtype=complex)
        pi_nu[nu] = -1j * om_nu * p_mag / (u.eps0 * spec.gs[nu])
        e_coef = -p_mag / u.eps0  # E_parallel = -P_parallel/eps0
        return ModeCoefficients(
            branch=bp.branch, sigma=0, k=bp.k, omega=om_nu, v=0.0,
            Lambda=0.0, Pi=0.0j, p_nu=p_nu, pi_nu=pi_nu,
            eps_branch=u.c**2 * bp.k**2 * u.eps0 / om_nu**2,
            D_coef=0.0j, E_coef=complex(e_coef), B_coef=0.0j,
            u_sigma=khat, e_sigma=khat,
        )

    if sigma not in (1, 2):
        raise ValueError(f"sigma must be 0, 1 or 2, got {sigma!r}")
    u_vec = u1 if sigma == 1 else u2
    e_vec = np.cross(khat, u_vec)
    diff = _resonance_denominators(spec, bp.k, bp.omega)
    v = bp.v_em
    eps_branch = u.c**2 * bp.k**2 * u.eps0 / bp.omega**2
    lam = math.sqrt(u.hbar * v * eps_branch / (norm_const * bp.k))
    pi_op = -1j * bp.omega * u.mu * lam
    # k x Lambda = k lam e_sigma; amplitudes below are along e_sigma
    p_nu = 1j * spec.gs * bp.k * lam / diff
    pi_nu = (bp.omega * bp.k * lam / (u.eps0 * diff)).astype(complex)
    d_coef = 1j * bp.k * lam
    return ModeCoefficients(
        branch=bp.branch, sigma=sigma, k=bp.k, omega=bp.omega, v=v,
        Lambda=lam, Pi=pi_op, p_nu=p_nu, pi_nu=pi_nu, eps_branch=eps_branch,
        D_coef=d_coef, E_coef=d_coef / eps_branch, B_coef=pi_op,
        u_sigma=u_vec, e_sigma=e_vec,
    )


def longitudinal_branch_points(spec: MaterialSpec, k: float) -> list[BranchPoint]:
    """The N longitudinal modes at k as branch records (sigma = 0).

    Their frequencies are the resonances themselves, O_nu(k); the branch
    index mu = nu + 1 matches the gauge-mode convention (mu = 0 is the
    excluded gauge mode). v_group is the polarization transport alpha k/O;
    v_em is zero (no electromagnetic content).
    """
    if not (k > 0.0 and math.isfinite(k)):
        raise ValueError(f"k must be positive and finite, got {k!r}")
    out = []
    om2 = spec.omega2s_at(k)
    for nu in range(spec.n_resonances):
        om = math.sqrt(om2[nu])
        out.append(BranchPoint(
            branch=nu + 1, k=k, omega=om,
            v_group=spec.alphas[nu] * k / om, v_em=0.0,
            z=float(om2[nu]), sigma=0))
    return out


def field_expansion_coefficient(spec: MaterialSpec, bp: BranchPoint,
                                field: str, sigma: int | None = None) -> complex:
    """Complex amplitude of D, E or B for one mode.

    1D when sigma is None; otherwise the 3D conventions (D and E along
    e_sigma, B along u_sigma; for sigma = 0 only E is nonzero,
    E = -P_parallel/eps0).
    """
    if field not in ("D", "E", "B"):
        raise ValueError(f"field must be 'D', 'E' or 'B', got {field!r}")
    if sigma != 0:
        # transverse modes must sit in a transmission band; longitudinal
        # frequencies are the resonances themselves, where n^2 is undefined
        n2 = refractive_index_sq(spec, bp.omega,
                                 bp.k if spec.has_alpha else None)
        if n2 < 0.0:
            raise ForbiddenBandError(
                f"omega = {bp.omega!r} lies in a forbidden band")
    if sigma is None:
        mc = mode_coefficients_1d(spec, bp)
    else:
        mc = mode_coefficients_3d(spec, bp, sigma)
    return {"D": mc.D_coef, "E": mc.E_coef, "B": mc.B_coef}[field]


def frequency_domain_rescale(bp: BranchPoint) -> float:
    """1/sqrt|v|: maps a_mu(k) to the frequency-domain operator a~(omega).

    Composing with the k-domain coefficients absorbs the group-velocity
    factor into the frequency integral and turns the delta(k - k')
    commutator into delta(omega - omega').
    """
    v = bp.v_em
    if v == 0.0 or not math.isfinite(v):
        raise ZeroGroupVelocityError(
            f"group velocity {v!r} at k = {bp.k!r}; frequency-domain "
            "rescaling is singular at band edges")
    return 1.0 / math.sqrt(abs(v))


# ---------------------------------------------------------------------------
# Per-k completeness identities (conditions I and V restated through the
# quantized amplitudes)


def completeness_sum(spec: MaterialSpec, k: float) -> float:
    """sum_mu omega_mu mu_perm Lambda_mu^2, which must equal hbar/(4 pi A)."""
    u = spec.units
    total = 0.0
    for bp in solve_branches(spec, k):
        mc = mode_coefficients_1d(spec, bp)
        total += bp.omega * u.mu * mc.Lambda**2
    return total


def cross_commutator_sum(spec: MaterialSpec, k: float) -> np.ndarray:
    """sum_mu Lambda_mu pi_mu^nu per nu; must vanish (condition V restated)."""
    out = np.zeros(spec.n_resonances, dtype=complex)
    for bp in solve_branches(spec, k):
        mc = mode_coefficients_1d(spec, bp)
        out += mc.Lambda * mc.pi_nu
    return out


# ---------------------------------------------------------------------------
# Smeared equal-time commutator kernels


@dataclass(frozen=True)
class GaussianTestFunction:
    """Normalized Gaussian f(x) = exp(-(x-x0)^2/(2 s^2)) / (s sqrt(2 pi))."""

    center: float
    width: float

    def __post_init__(self):
        if not (self.width > 0.0 and math.isfinite(self.width)):
            raise ValueError(f"width must be positive, got {self.width!r}")

    def value(self, x: float) -> float:
        arg = (x - self.center) / self.width
        return math.exp(-0.5 * arg * arg) / (self.width * math.sqrt(2.0 * math.pi))

    def spectrum(self, k: float) -> float:
        """|integral f(u) e^{iku} du| = exp(-k^2 s^2 / 2)."""
        return math.exp(-0.5 * (k * self.width) ** 2)


@dataclass(frozen=True)
class KernelSample:
    """One smeared commutator-kernel evaluation."""

    pair: str
    separation: float
    value: complex
    cutoff: float
    test_fn: GaussianTestFunction


#: Kernel pair name -> (coefficient picker, parity of A(k)B(k) under k -> -k)
_KERNEL_PAIRS = {
    "lambda_pi": (lambda mc, nu, nup: (mc.Lambda, mc.Pi), +1),
    "p_pi": (lambda mc, nu, nup: (mc.p_nu[nu], mc.pi_nu[nup]), +1),
    "lambda_pinu": (lambda mc, nu, nup: (mc.Lambda, mc.pi_nu[nu]), -1),
    "d_b": (lambda mc, nu, nup: (mc.D_coef, mc.B_coef), -1),
}


def kernel_reconstruction(spec: MaterialSpec, pair: str,
                          test_fn: GaussianTestFunction, cutoff: float,
                          nu: int = 0, nu_prime: int = 0,
                          nodes: int = 2000) -> KernelSample:
    """Smear the equal-time commutator kernel of a field pair against a
    Gaussian test function, integrating branch contributions over
    k in [-cutoff, cutoff].

    The per-k sum rules make the integrand exact at every node, so accuracy
    is limited only by quadrature and by the spectral tail of the test
    function beyond the cutoff. Expected values (A = cross-section,
    f = Gaussian profile at the center offset): (Lambda, Pi) and matched
    (p, pi) pairs give i hbar f/A, mismatched pairs and (Lambda, pi) give 0,
    and (D, B) gives i hbar f'/A.
    """
    if pair not in _KERNEL_PAIRS:
        raise ValueError(
            f"pair must be one of {sorted(_KERNEL_PAIRS)}, got {pair!r}")
    if cutoff <= 0.0:
        raise ValueError(f"cutoff must be positive, got {cutoff!r}")
    tail = test_fn.spectrum(cutoff)
    if tail > 1e-6:
        raise CutoffTooSmallError(
            f"test-function spectrum at the cutoff is {tail:.3e} of its "
            "peak (needs <= 1e-6); enlarge the cutoff or narrow the spectrum")
    if pair == "p_pi" and not (
            0 <= nu < spec.n_resonances and 0 <= nu_prime < spec.n_resonances):
        raise ValueError(f"resonance indices ({nu}, {nu_prime}) out of range")
    if pair == "lambda_pinu" and not 0 <= nu < spec.n_resonances:
        raise ValueError(f"resonance index {nu} out of range")

    picker, parity = _KERNEL_PAIRS[pair]
    x0 = test_fn.center
    # midpoint rule: no node at k = 0, where branch data degenerates
    h = cutoff / nodes
    ks = (np.arange(nodes) + 0.5) * h

    def integrand(k: float) -> complex:
        total = 0.0j
        for bp in solve_branches(spec, k):
            mc = mode_coefficients_1d(spec, bp)
            a, b = picker(mc, nu, nu_prime)
            ab = complex(a) * complex(b).conjugate()
            phase = complex(math.cos(k * x0), math.sin(k * x0))
            term = ab * (phase + parity * phase.conjugate())
            total += term - term.conjugate()
        return total * test_fn.spectrum(k)

    value = complex(h * np.sum([integrand(float(k)) for k in ks]))
    return KernelSample(pair=pair, separation=x0, value=value,
                        cutoff=cutoff, test_fn=test_fn)
