"""Angular and spatial primitives shared by descriptors and relaxation.

Conventions used everywhere in this package:

* Image coordinates: x grows rightward, y grows downward (500 dpi assumed).
* Angles are counter-clockwise in fingerprint coordinates, i.e. the ray from
  a to b has angle ``atan2(a.y - b.y, b.x - a.x)``.
* A rigid rotation by ``alpha`` maps an offset (dx, dy) to
  ``(cos(a)*dx + sin(a)*dy, -sin(a)*dx + cos(a)*dy)`` and shifts every
  minutia direction by ``alpha``.
"""

from __future__ import annotations

import math

import numpy as np

TWO_PI = 2.0 * math.pi


def normalize_angle(theta: float) -> float:
    """Wrap an angle into [0, 2*pi)."""
    return theta % TWO_PI


def wrap_signed(theta):
    """Wrap an angle (scalar or array) into [-pi, pi)."""
    return (theta + math.pi) % TWO_PI - math.pi


def angular_difference(theta1, theta2):
    """Circular distance between two angles, in [0, pi].

    Accepts scalars or numpy arrays; inputs need not be pre-normalized.
    """
    d = np.abs(np.asarray(theta1) - np.asarray(theta2)) % TWO_PI
    out = np.minimum(d, TWO_PI - d)
    if out.ndim == 0:
        return float(out)
    return out


def euclidean_distance(a, b) -> float:
    """Euclidean distance between the positions of two minutiae."""
    return math.hypot(a.x - b.x, a.y - b.y)


def direction_difference(a, b) -> float:
    """Circular distance between two minutia directions, in [0, pi]."""
    return angular_difference(a.theta, b.theta)


def radial_angle(a, b) -> float:
    """Angle between a's direction and the ray from a to b, in [0, pi].

    Asymmetric: radial_angle(a, b) and radial_angle(b, a) generally differ.
    Co-located minutiae return 0 (synthetic perturbation may collide points;
    matching must not abort).
    """
    dy = a.y - b.y
    dx = b.x - a.x
    if dx == 0.0 and dy == 0.0:
        return 0.0
    return angular_difference(a.theta, math.atan2(dy, dx))


def rotate_offsets(dx, dy, alpha: float):
    """Rotate offset vectors by ``alpha`` under the package's y-down convention."""
    c, s = math.cos(alpha), math.sin(alpha)
    return c * dx + s * dy, -s * dx + c * dy
