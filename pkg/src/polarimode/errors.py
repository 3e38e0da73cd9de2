"""Exception hierarchy for the polarimode package.

Every domain error derives from :class:`PolarimodeError` and carries a short
machine-readable ``code`` (used by the HTTP service and the CLI exit-code
mapping). ``http_status`` distinguishes malformed input (400, CLI exit 2)
from well-formed requests that fail a physical or numerical precondition
(422, CLI exit 1).
"""

from __future__ import annotations


class PolarimodeError(Exception):
    """Base class for all domain errors."""

    code = "error"
    http_status = 422


class MaterialFormatError(PolarimodeError):
    """Material file or payload does not match the expected schema."""

    code = "material_format"
    http_status = 400


class InvalidMaterialError(PolarimodeError):
    """Material violates a validity invariant (see ``validate``)."""

    code = "invalid_material"


class SingularPointError(PolarimodeError):
    """Frequency coincides with a resonance or a band-edge singularity."""

    code = "singular_point"


class DegenerateRootsError(PolarimodeError):
    """Rational-form conversion found a repeated pole."""

    code = "degenerate_roots"


class NotRepresentableError(PolarimodeError):
    """Pole form has no valid inverse-form representation."""

    code = "not_representable"


class UnitMismatchError(PolarimodeError):
    """Operation requires a different unit system than the one supplied."""

    code = "unit_mismatch"


class DegenerateSpectrumError(PolarimodeError):
    """Two dispersion roots coincide within tolerance."""

    code = "degenerate_spectrum"


class NonPositiveRootError(PolarimodeError):
    """A dispersion root came out non-positive (invalid material)."""

    code = "non_positive_root"


class OnResonanceError(PolarimodeError):
    """A branch frequency is too close to a resonance for the formula used."""

    code = "on_resonance"


class ForbiddenBandError(PolarimodeError):
    """Requested frequency lies inside a forbidden band (n^2 < 0)."""

    code = "forbidden_band"


class ZeroWaveVectorError(PolarimodeError):
    """3D operations need a nonzero wave vector."""

    code = "zero_wave_vector"


class DegenerateAmbiguityError(PolarimodeError):
    """Transverse eigenvector pair could not be polarization-resolved."""

    code = "degenerate_ambiguity"


class UnphysicalModeError(PolarimodeError):
    """Mode coefficients requested for the gauge-violating mode."""

    code = "unphysical_mode"


class ZeroGroupVelocityError(PolarimodeError):
    """Group velocity vanished where a 1/sqrt(v) rescaling is needed."""

    code = "zero_group_velocity"


class CutoffTooSmallError(PolarimodeError):
    """Kernel cutoff truncates the test-function spectrum too early."""

    code = "cutoff_too_small"


class PoleOnContourError(PolarimodeError):
    """A pole lies on (or too close to) the verification contour."""

    code = "pole_on_contour"
