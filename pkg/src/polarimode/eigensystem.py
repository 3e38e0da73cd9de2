"""Coupled field-polarization eigensystem in 1D and 3D.

The plane-wave equations of motion at fixed k are M lambda = omega^2 lambda
for the stacked vector lambda = (field amplitude; polarization amplitudes).
M is not hermitian, but G M is, with G the positive diagonal metric
diag(1, c^2/g_1, ...) (blocks of I_3 in 3D), so the spectrum is real and the
eigenvectors are G-orthogonal. We therefore solve the hermitian-definite
pencil (G M, G) rather than diagonalizing M directly.

In 3D the block projector P(khat) onto the longitudinal direction commutes
with M, splitting the 3(N+1) modes into N longitudinal polarization modes
(eigenvalue O_nu^2(k)), one gauge-violating mode (field along khat,
eigenvalue c^2 k^2, excluded from physics), and N+1 transverse branches,
each exactly twofold degenerate.

All matrices and eigenvalues here are in the nondimensionalized system
recorded in ``EigenSystem.scale`` (identity for natural-unit materials).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (
    DegenerateAmbiguityError,
    ZeroWaveVectorError,
)
from . import _poly
from .materials import (
    FrequencyScale,
    MaterialSpec,
    nondimensionalize,
    require_valid,
)
from .dispersion import _em_velocity_natural

#: Relative hermiticity budget for G M (it is hermitian by construction; the
#: residual only measures floating-point assembly error).
HERMITICITY_RTOL = 1e-12


@dataclass(frozen=True)
class ModeClassification:
    """Physical role of one eigenvector.

    sigma: 1 or 2 for transverse polarizations, 0 for longitudinal, None for
    the gauge-violating mode. mu is the ascending branch index for transverse
    modes and the resonance index for longitudinal ones.
    """

    sigma: int | None
    mu: int | None
    is_longitudinal: bool

    @property
    def is_gauge(self) -> bool:
        return self.sigma is None


@dataclass(frozen=True)
class EigenSystem:
    """Solved pencil at one wavenumber (natural units; see ``scale``)."""

    kind: str                      # "1d" | "3d"
    k: float | np.ndarray          # natural-units scalar k or 3-vector
    M: np.ndarray
    G: np.ndarray
    eigenvalues: np.ndarray        # z = omega^2, ascending
    eigenvectors: np.ndarray       # columns, G-orthonormal
    classifications: tuple[ModeClassification, ...]
    scale: FrequencyScale
    dimension: int                 # k-space dimension of the material
    n_resonances: int
    hermiticity_residual: float

    @property
    def k_norm(self) -> float:
        return float(np.linalg.norm(np.atleast_1d(self.k)))

    def eigenvalues_original(self) -> np.ndarray:
        return self.scale.z_original(self.eigenvalues)


def _solve_pencil(M: np.ndarray, g_diag: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
    """Eigenpairs of (G M, G); returns ascending eigenvalues, G-orthonormal
    eigenvector columns, and the relative hermiticity residual of G M."""
    A = g_diag[:, None] * M
    herm = np.max(np.abs(A - A.conj().T))
    norm = max(np.max(np.abs(A)), np.finfo(float).tiny)
    residual = float(herm / norm)
    if residual > HERMITICITY_RTOL:
        raise ArithmeticError(
            f"G M lost hermiticity (relative residual {residual:.3e})")
    A = 0.5 * (A + A.conj().T)
    evals, vecs = scipy.linalg.eigh(A, np.diag(g_diag))
    return evals, vecs, residual


def build_1d(spec: MaterialSpec, k: float) -> EigenSystem:
    """Assemble and solve the (N+1) x (N+1) scalar system at wavenumber k.

    M has k^2 c^2 in the corner, i k c^2 along the first row, -i k g_nu down
    the first column and O_nu^2(k) on the diagonal.
    """
    require_valid(spec)
    if not (k > 0.0 and math.isfinite(k)):
        raise ValueError(f"k must be positive and finite, got {k!r}")
    nspec, fs = nondimensionalize(spec)
    kn = float(fs.k_natural(k))
    om2 = nspec.omega2s_at(kn)
    gs = nspec.gs
    n = om2.size + 1
    M = np.zeros((n, n), dtype=complex)
    M[0, 0] = kn * kn
    M[0, 1:] = 1j * kn
    M[1:, 0] = -1j * kn * gs
    M[np.arange(1, n), np.arange(1, n)] = om2
    g_diag = np.concatenate(([1.0], 1.0 / gs)) if om2.size else np.array([1.0])
    evals, vecs, residual = _solve_pencil(M, g_diag)
    classifications = tuple(
        ModeClassification(sigma=1, mu=mu, is_longitudinal=False)
        for mu in range(n)
    )
    return EigenSystem(
        kind="1d", k=kn, M=M, G=np.diag(g_diag), eigenvalues=evals,
        eigenvectors=vecs, classifications=classifications, scale=fs,
        dimension=spec.units.dimension, n_resonances=om2.size,
        hermiticity_residual=residual,
    )


def cross_product_matrix(kvec: np.ndarray) -> np.ndarray:
    """The antisymmetric K with K A = k x A."""
    k1, k2, k3 = kvec
    return np.array([
        [0.0, -k3, k2],
        [k3, 0.0, -k1],
        [-k2, k1, 0.0],
    ])


def transverse_basis(khat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic polarization pair: u1 = khat x e_min normalized, with
    e_min the Cartesian axis least parallel to khat; u2 = khat x u1."""
    e_min = np.zeros(3)
    e_min[int(np.argmin(np.abs(khat)))] = 1.0
    u1 = np.cross(khat, e_min)
    u1 /= np.linalg.norm(u1)
    u2 = np.cross(khat, u1)
    return u1, u2


def longitudinal_projector(khat: np.ndarray, n_blocks: int) -> np.ndarray:
    """Block-diagonal projector onto khat in every 3-vector block."""
    p3 = np.outer(khat, khat)
    out = np.zeros((3 * n_blocks, 3 * n_blocks))
    for b in range(n_blocks):
        out[3 * b:3 * b + 3, 3 * b:3 * b + 3] = p3
    return out


def build_3d(spec: MaterialSpec, k_vector) -> EigenSystem:
    """Assemble and solve the 3(N+1) x 3(N+1) vector system at one k vector.

    Off-diagonal blocks are -i c^2 K along the first block row and -i g_nu K
    down the first block column, with K the cross-product matrix; diagonal
    blocks are k^2 c^2 I and O_nu^2(k) I.
    """
    require_valid(spec)
    kvec = np.asarray(k_vector, dtype=float)
    if kvec.shape != (3,):
        raise ValueError(f"k_vector must have 3 components, got {kvec!r}")
    nspec, fs = nondimensionalize(spec)
    kn_vec = np.asarray(fs.k_natural(kvec))
    kn = float(np.linalg.norm(kn_vec))
    if kn == 0.0 or not math.isfinite(kn):
        raise ZeroWaveVectorError("k vector must be nonzero and finite")
    om2 = nspec.omega2s_at(kn)
    gs = nspec.gs
    nb = om2.size + 1
    K = cross_product_matrix(kn_vec)
    M = np.zeros((3 * nb, 3 * nb), dtype=complex)
    M[0:3, 0:3] = kn * kn * np.eye(3)
    for nu in range(om2.size):
        r = 3 * (nu + 1)
        M[0:3, r:r + 3] = -1j * K
        M[r:r + 3, 0:3] = -1j * gs[nu] * K
        M[r:r + 3, r:r + 3] = om2[nu] * np.eye(3)
    g_diag = np.concatenate([np.ones(3)] + [np.full(3, 1.0 / g) for g in gs]) \
        if om2.size else np.ones(3)
    evals, vecs, residual = _solve_pencil(M, g_diag)
    evals, vecs, classifications = _classify_3d(
        evals, vecs, kn_vec / kn, g_diag, om2.size)
    return EigenSystem(
        kind="3d", k=kn_vec, M=M, G=np.diag(g_diag), eigenvalues=evals,
        eigenvectors=vecs, classifications=classifications, scale=fs,
        dimension=spec.units.dimension, n_resonances=om2.size,
        hermiticity_residual=residual,
    )


def _g_normalize(v: np.ndarray, g_diag: np.ndarray) -> np.ndarray:
    return v / math.sqrt(float(np.real(np.vdot(v, g_diag * v))))


def _null_combinations(A: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Columns c with A c ~ 0 for a tall-thin A whose columns are O(1).

    The cutoff is absolute: callers pass projector images of unit-norm
    columns, so genuinely nonzero directions have singular values of order
    one while null directions sit at rounding level.
    """
    _, s, vh = np.linalg.svd(A, full_matrices=True)
    rank = int(np.sum(s > tol))
    return vh[rank:].conj().T


def _classify_3d(evals, vecs, khat, g_diag, n_res):
    """Split eigenvectors into gauge / longitudinal / transverse, resolving
    polarization within each degenerate group.

    [P(khat), M] = 0 lets every eigenvalue group split cleanly into a
    longitudinal part (all blocks along khat) and a transverse part. The
    longitudinal sector is diagonal in the blocks, so its vectors are
    re-aligned block by block; the transverse pairs are rotated so that the
    field block of vector sigma lies along u_sigma.
    """
    nb = n_res + 1
    p_long = longitudinal_projector(khat, nb)
    u1, u2 = transverse_basis(khat)
    size = 3 * nb

    scale = max(1.0, float(np.max(np.abs(evals))))
    group_tol = 1e-9 * scale
    groups: list[list[int]] = [[0]]
    for i in range(1, size):
        if evals[i] - evals[groups[-1][-1]] <= group_tol:
            groups[-1].append(i)
        else:
            groups.append([i])

    out_evals = np.empty(size)
    out_vecs = np.empty((size, size), dtype=complex)
    out_cls: list[ModeClassification | None] = [None] * size
    trans_branch = 0

    for group in groups:
        V = vecs[:, group]
        # work with unit 2-norm columns so the split thresholds are absolute
        V = V / np.linalg.norm(V, axis=0)
        mean_eval = float(np.mean(evals[group]))
        long_c = _null_combinations((np.eye(size) - p_long) @ V)
        trans_c = _null_combinations(p_long @ V)
        if long_c.shape[1] + trans_c.shape[1] != len(group):
            raise DegenerateAmbiguityError(
                f"eigenvalue group at z = {mean_eval!r} does not split into "
                "longitudinal and transverse parts")
        pos = iter(group)

        # longitudinal sector: diagonal in the blocks; align to single blocks
        if long_c.shape[1]:
            W = V @ long_c
            block_weights = np.array([
                np.sum(np.abs(W[3 * b:3 * b + 3, :]) ** 2, axis=0)
                for b in range(nb)
            ])  # (nb, m)
            total = np.sum(block_weights, axis=0)
            involved = np.nonzero(
                np.sum(block_weights, axis=1) > 1e-12 * np.sum(total))[0]
            if involved.size != long_c.shape[1]:
                raise DegenerateAmbiguityError(
                    "longitudinal modes span an unexpected number of blocks")
            for b in sorted(involved):
                v = np.zeros(size, dtype=complex)
                v[3 * b:3 * b + 3] = khat
                v = _g_normalize(v, g_diag)
                i = next(pos)
                out_evals[i] = mean_eval
                out_vecs[:, i] = v
                if b == 0:
                    out_cls[i] = ModeClassification(
                        sigma=None, mu=None, is_longitudinal=True)
                else:
                    out_cls[i] = ModeClassification(
                        sigma=0, mu=int(b) - 1, is_longitudinal=True)

        # transverse sector: exactly twofold degenerate; resolve polarization
        if trans_c.shape[1]:
            if trans_c.shape[1] != 2:
                raise DegenerateAmbiguityError(
                    f"transverse multiplicity {trans_c.shape[1]} != 2 "
                    f"at z = {mean_eval!r}")
            T = V @ trans_c
            C = np.array([
                [u1 @ T[0:3, 0], u1 @ T[0:3, 1]],
                [u2 @ T[0:3, 0], u2 @ T[0:3, 1]],
            ])
            if np.linalg.cond(C) > 1e8:
                raise DegenerateAmbiguityError(
                    "transverse pair could not be polarization-resolved")
            R = np.linalg.inv(C)
            for sigma in (1, 2):
                v = T @ R[:, sigma - 1]
                # purge longitudinal contamination: [P, M] = 0 makes the
                # transverse sector exactly P-free, but the dense solver
                # mixes in O(eps |A|/gap) of any nearby longitudinal mode
                v = v - p_long @ v
                # make the field block exactly real along u_sigma
                u = u1 if sigma == 1 else u2
                phase = u @ v[0:3]
                v = v * (abs(phase) / phase)
                v = _g_normalize(v, g_diag)
                i = next(pos)
                out_evals[i] = mean_eval
                out_vecs[:, i] = v
                out_cls[i] = ModeClassification(
                    sigma=sigma, mu=trans_branch, is_longitudinal=False)
            trans_branch += 1

    return out_evals, out_vecs, tuple(out_cls)


def classify_modes(es: EigenSystem) -> tuple[ModeClassification, ...]:
    """Classification aligned with ``es.eigenvalues`` (stored at build time)."""
    return es.classifications


def classification_counts(es: EigenSystem) -> dict:
    counts = {"transverse": 0, "longitudinal": 0, "gauge": 0}
    for c in es.classifications:
        if c.is_gauge:
            counts["gauge"] += 1
        elif c.is_longitudinal:
            counts["longitudinal"] += 1
        else:
            counts["transverse"] += 1
    return counts


# ---------------------------------------------------------------------------
# Normalization


def _nat_units_for(es: EigenSystem) -> int:
    """k-space dimension entering the 2 (2 pi)^n A normalization."""
    return es.dimension


def verify_normalization(es: EigenSystem, spec: MaterialSpec) -> np.ndarray:
    """Hamiltonian-normalization residual |LHS/hbar - 1| per mode.

    Each physical eigenvector is rescaled so its field (or polarization)
    block matches the quantized mode amplitude; the diagonal Hamiltonian then
    requires 2 (2 pi)^n mu A <lambda|G lambda> omega = hbar (the 1D measure
    4 pi A is the n = 1 case). The gauge mode gets NaN.

    The residual reduces per branch to |(1 + sum ...) k v / omega - 1| with
    v the electromagnetic group velocity, so it must vanish even for
    alpha != 0.
    """
    nspec, _ = nondimensionalize(spec)
    kn = es.k_norm
    g_diag = np.real(np.diag(es.G))
    n_dim = _nat_units_for(es)
    norm_const = 2.0 * (2.0 * math.pi) ** n_dim  # hbar = mu = A = 1 internally
    out = np.full(es.eigenvalues.size, np.nan)

    for i, cls in enumerate(es.classifications):
        if cls.is_gauge:
            continue
        z = float(es.eigenvalues[i])
        w = math.sqrt(z)
        vec = es.eigenvectors[:, i]
        if es.kind == "1d":
            block = np.atleast_1d(vec[0])
        elif cls.is_longitudinal:
            r = 3 * (cls.mu + 1)
            block = vec[r:r + 3]
        else:
            block = vec[0:3]
        ell2 = float(np.real(np.vdot(block, block)))
        if cls.is_longitudinal:
            om_nu = math.sqrt(float(nspec.omega2s_at(kn)[cls.mu]))
            target2 = nspec.gs[cls.mu] / (norm_const * om_nu)
            lhs = norm_const * (target2 / ell2) * om_nu
        else:
            # polish the eigenvalue against the dispersion function so the
            # root-resonance gap entering v_em keeps full relative accuracy
            zarr, gaps = _poly.dispersion_roots_and_gaps(
                nspec.omega2s_at(kn), nspec.gs, kn * kn, np.array([z]))
            z_ref = float(zarr[0])
            w = math.sqrt(z_ref)
            v_em = float(_em_velocity_natural(nspec, kn, zarr, gaps)[0])
            eps_branch = kn * kn / z_ref  # eps0 = c = 1
            target2 = v_em * eps_branch / (norm_const * kn)
            lhs = norm_const * (target2 / ell2) * w
        out[i] = abs(lhs - 1.0)
    return out


def gram_residual(es: EigenSystem) -> float:
    """Max deviation of the G-Gram matrix of physical modes from identity."""
    g_diag = np.real(np.diag(es.G))
    idx = [i for i, c in enumerate(es.classifications) if not c.is_gauge]
    V = es.eigenvectors[:, idx]
    gram = V.conj().T @ (g_diag[:, None] * V)
    return float(np.max(np.abs(gram - np.eye(len(idx)))))


def eigen_diagnostics(spec: MaterialSpec, k: float | None = None,
                      k_vector=None) -> dict:
    """Per-k diagnostic record: hermiticity, spectrum, classification counts,
    normalization and orthonormality residuals."""
    if (k is None) == (k_vector is None):
        raise ValueError("supply exactly one of k (1D) or k_vector (3D)")
    es = build_1d(spec, k) if k is not None else build_3d(spec, k_vector)
    residuals = verify_normalization(es, spec)
    finite = residuals[np.isfinite(residuals)]
    return {
        "kind": es.kind,
        "k": (float(np.linalg.norm(np.atleast_1d(k_vector)))
              if k_vector is not None else k),
        "hermiticity_residual": es.hermiticity_residual,
        "eigenvalues": [float(v) for v in es.eigenvalues_original()],
        "classification_counts": classification_counts(es),
        "normalization_residuals": [
            None if not np.isfinite(r) else float(r) for r in residuals],
        "max_normalization_residual": float(np.max(finite)) if finite.size else 0.0,
        "gram_residual": gram_residual(es),
    }
