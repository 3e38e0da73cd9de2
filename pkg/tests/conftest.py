import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

from polarimode import MaterialSpec, Resonance, UnitSystem

# fully deterministic property-test runs
settings.register_profile("deterministic", derandomize=True, deadline=None)
settings.load_profile("deterministic")

DATA = Path(__file__).parent / "data"

# Frozen oracle values for the single-resonance fixture (omega2=4, g=1, c=1,
# k=1), computed from the two-branch quadratic closed form:
#   z_pm = (5 -+ sqrt(13))/2, kv/omega = (1/2z)(1 -+ (-1)/sqrt(13))
SQRT13 = math.sqrt(13.0)
SOSC_Z_LO = (5.0 - SQRT13) / 2.0
SOSC_Z_HI = (5.0 + SQRT13) / 2.0
SOSC_W_LO = math.sqrt(SOSC_Z_LO)
SOSC_W_HI = math.sqrt(SOSC_Z_HI)
SOSC_RATIO_LO = (1.0 / (2.0 * SOSC_Z_LO)) * (1.0 + 1.0 / SQRT13)
SOSC_RATIO_HI = (1.0 / (2.0 * SOSC_Z_HI)) * (1.0 - 1.0 / SQRT13)
SOSC_V_LO = SOSC_RATIO_LO * SOSC_W_LO
SOSC_V_HI = SOSC_RATIO_HI * SOSC_W_HI


@pytest.fixture
def sosc() -> MaterialSpec:
    """Single oscillator, omega2 = 4, g = 1, natural units."""
    return MaterialSpec("sosc", (Resonance(omega2=4.0, g=1.0),),
                        UnitSystem.natural())


@pytest.fixture
def sosc3d() -> MaterialSpec:
    return MaterialSpec("sosc", (Resonance(omega2=4.0, g=1.0),),
                        UnitSystem.natural(dimension=3))


@pytest.fixture
def duo() -> MaterialSpec:
    """Two oscillators, omega2 = (4, 25), g = (1, 2)."""
    return MaterialSpec(
        "duo",
        (Resonance(omega2=4.0, g=1.0), Resonance(omega2=25.0, g=2.0)),
        UnitSystem.natural(),
    )


@pytest.fixture
def vacuum() -> MaterialSpec:
    return MaterialSpec("vacuum", (), UnitSystem.natural())


# Standard fused-silica wavelength-form coefficients (external fixture data).
FUSED_SILICA_B = (0.6961663, 0.4079426, 0.8974794)
FUSED_SILICA_C_UM2 = (0.0684043**2, 0.1162414**2, 9.896161**2)


@pytest.fixture
def fused_silica_file() -> Path:
    return DATA / "fused_silica.json"


def random_material(rng: np.random.Generator, n_max: int = 5,
                    alpha: float = 0.0, dimension: int = 1) -> MaterialSpec:
    """Valid random material: omega2 log-uniform in [1, 1e3], coupling sum
    <= 0.8, pairwise-separated resonances, one shared alpha."""
    n = int(rng.integers(1, n_max + 1))
    while True:
        om2 = np.sort(np.exp(rng.uniform(np.log(1.0), np.log(1e3), n)))
        if n == 1 or float(np.min(np.diff(om2) / om2[-1])) > 1e-3:
            break
    weights = rng.uniform(0.2, 1.0, n)
    weights /= weights.sum()
    total = rng.uniform(0.1, 0.8)
    gs = total * weights * om2
    resonances = tuple(
        Resonance(omega2=float(o), g=float(g), alpha=alpha)
        for o, g in zip(om2, gs)
    )
    return MaterialSpec("random", resonances,
                        UnitSystem.natural(dimension=dimension))
