"""Parabolic 3GPP-style antenna gain and its circular-footprint form."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

B_MIN, B_MAX = 1.0, 180.0


def _check_beamwidth(*bs):
    for b in bs:
        b = np.asarray(b, dtype=float)
        if np.any(~((b >= B_MIN) & (b < B_MAX))):
            raise DomainError(f"beamwidth must lie in [{B_MIN}, {B_MAX}) degrees")


@dataclass(frozen=True)
class AntennaPattern:
    b_phi: float = 50.0
    b_theta: float = 50.0
    lambda_phi: float = 0.5
    lambda_theta: float = 0.5
    phi_tilt: float = 0.0
    theta_a: float = 0.0
    a_max: float = 20.0

    def __post_init__(self):
        _check_beamwidth(self.b_phi, self.b_theta)
        if self.lambda_phi < 0 or self.lambda_theta < 0:
            raise DomainError("beam-pattern weights must be non-negative")
        if not self.a_max > 0:
            raise DomainError("a_max must be positive")

    @property
    def symmetric(self) -> bool:
        return self.b_phi == self.b_theta

    @property
    def g_max(self) -> float:
        return boresight_gain(self.b_phi, self.b_theta)


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


def boresight_gain(b_phi, b_theta):
    """Boresight gain approximation ``10 log10(29000 / (B_phi B_theta))`` in dB."""
    _check_beamwidth(b_phi, b_theta)
    return _scalar(10.0 * np.log10(29000.0 / (np.asarray(b_phi, float) * np.asarray(b_theta, float))))


def wrap_degrees(x):
    """Map angle differences onto (-180, 180]."""
    w = -((180.0 - np.asarray(x, dtype=float)) % 360.0) + 180.0
    return _scalar(w)


def gain_3d(p: AntennaPattern, phi_ms, theta_ms):
    """Weighted vertical plus horizontal parabolic gain with the ``a_max`` floor.

    The azimuth offset is wrapped to (-180, 180] before squaring.
    """
    g_max = p.g_max
    att_v = np.minimum(12.0 * ((np.asarray(phi_ms, float) - p.phi_tilt) / p.b_phi) ** 2, p.a_max)
    att_h = np.minimum(12.0 * (wrap_degrees(np.asarray(theta_ms, float) - p.theta_a) / p.b_theta) ** 2, p.a_max)
    return _scalar(p.lambda_phi * (g_max - att_v) + p.lambda_theta * (g_max - att_h))


def gain_circular(b, h, r, phi_tilt=0.0):
    """Single-lobe gain used by the circular closed forms (no ``a_max`` floor)."""
    _check_beamwidth(b)
    h = np.asarray(h, dtype=float)
    r = np.asarray(r, dtype=float)
    if np.any(~(h > 0)):
        raise DomainError("height must be positive")
    if np.any(~(r >= 0)):
        raise DomainError("ground distance must be non-negative")
    b = np.asarray(b, dtype=float)
    phi = np.degrees(np.arctan2(r, h))
    return _scalar(10.0 * np.log10(29000.0 / b**2) - 12.0 * ((phi - phi_tilt) / b) ** 2)


def crossover_height(b1: float, b2: float, r: float) -> float:
    """Height at which two circular gains are equal at ground distance ``r``.

    Below it (large off-nadir angle) the wider beam ``b2`` has the higher
    gain at ``r``; above it the narrower ``b1`` wins.
    """
    _check_beamwidth(b1, b2)
    if b1 == b2:
        raise DomainError("crossover undefined for equal beamwidths")
    if b1 > b2:
        raise DomainError("expected b1 < b2")
    if not r > 0:
        raise DomainError("ground distance must be positive")
    angle = math.sqrt((5.0 / 3.0) * math.log10(b2 / b1) * (b1**2 * b2**2 / (b2**2 - b1**2)))
    if angle >= 90.0:
        raise DomainError(f"no crossover: off-nadir angle {angle:.3f} deg >= 90")
    return r / math.tan(math.radians(angle))
