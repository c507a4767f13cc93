"""Disk/ball and annulus test domains with exact boundary distances.

Points are arrays whose last axis is the spatial dimension.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np


class GeometryError(ValueError):
    pass


@dataclass(frozen=True)
class DomainGeometry:
    shape: str
    center: tuple = (0.0, 0.0)
    radius: float = 1.0          # outer radius
    r_in: float = 0.0            # annulus only

    def __post_init__(self):
        if self.shape not in ("disk", "annulus"):
            raise GeometryError(f"unknown shape {self.shape!r}")
        if len(self.center) < 2:
            raise GeometryError("dimension must be at least 2")
        if self.radius <= 0:
            raise GeometryError("radius must be positive")
        if self.shape == "annulus" and not 0 < self.r_in < self.radius:
            raise GeometryError("annulus needs 0 < r_in < r_out")
        if self.shape == "disk" and self.r_in != 0.0:
            raise GeometryError("disk has no inner radius")

    @property
    def d(self) -> int:
        return len(self.center)

    @property
    def diam(self) -> float:
        return 2.0 * self.radius

    @property
    def c11(self):
        """(R, Lambda) for the local graph representation of the boundary."""
        if self.shape == "disk":
            return self.radius, 1.0 / self.radius
        return min(self.r_in, 0.5 * (self.radius - self.r_in)), 1.0 / self.r_in

    @property
    def kappa_fat(self):
        """(R1, kappa)."""
        if self.shape == "disk":
            return self.radius, 0.5
        return 0.5 * (self.radius - self.r_in), 0.5

    @property
    def kappa0(self) -> float:
        lam = self.c11[1]
        return (1.0 + (1.0 + lam) ** 2) ** -0.5

    @property
    def interior_ball_radius(self) -> float:
        if self.shape == "disk":
            return self.radius
        return 0.5 * (self.radius - self.r_in)

    def dist_with_flag(self, x):
        """(distance to the boundary, exterior flag). Exterior points get 0."""
        x = np.asarray(x, float)
        rho = np.linalg.norm(x - np.asarray(self.center), axis=-1)
        dist = self.radius - rho
        if self.shape == "annulus":
            dist = np.minimum(dist, rho - self.r_in)
        ext = dist < 0
        return np.where(ext, 0.0, dist), ext

    def dist(self, x):
        return self.dist_with_flag(x)[0]

    def contains(self, x):
        d, ext = self.dist_with_flag(x)
        return (d > 0) & ~ext

    def to_dict(self) -> dict:
        out = {"shape": self.shape, "center": list(self.center), "radius": self.radius}
        if self.shape == "annulus":
            out["r_in"] = self.r_in
        return out

    # boundary utilities -------------------------------------------------
    def boundary_point(self, angle: float, inner: bool = False):
        """Boundary point at polar angle (first two coordinates) on the outer or inner circle."""
        rad = self.r_in if inner else self.radius
        if inner and self.shape != "annulus":
            raise GeometryError("disk has no inner boundary")
        q = np.array(self.center, float)
        q[0] += rad * np.cos(angle)
        q[1] += rad * np.sin(angle)
        return q

    def inward_normal(self, Q):
        Q = np.asarray(Q, float)
        u = Q - np.asarray(self.center)
        rho = np.linalg.norm(u)
        u = u / rho
        if np.isclose(rho, self.radius, rtol=1e-9):
            return -u
        if self.shape == "annulus" and np.isclose(rho, self.r_in, rtol=1e-9):
            return u
        raise GeometryError("Q is not a boundary point")


def disk(radius: float = 1.0, center=(0.0, 0.0)) -> DomainGeometry:
    return DomainGeometry("disk", tuple(float(c) for c in center), float(radius))


def annulus(r_in: float, r_out: float, center=(0.0, 0.0)) -> DomainGeometry:
    return DomainGeometry("annulus", tuple(float(c) for c in center), float(r_out), float(r_in))


def domain_from_dict(spec: dict) -> DomainGeometry:
    center = spec.get("center", (0.0,) * spec.get("dim", 2))
    if spec["shape"] == "disk":
        return disk(spec.get("radius", 1.0), center)
    if spec["shape"] == "annulus":
        return annulus(spec["r_in"], spec.get("radius", spec.get("r_out", 1.0)), center)
    raise GeometryError(f"unknown shape {spec['shape']!r}")


def dist_to_boundary(domain: DomainGeometry, x):
    return domain.dist(x)


def normal_ray_points(domain: DomainGeometry, Q, r0: float, depths):
    """Points Q + s r0 n on the inward normal; their boundary distance is s r0."""
    if not 0 < r0 <= domain.interior_ball_radius:
        raise GeometryError(f"r0={r0} exceeds the interior ball radius "
                            f"{domain.interior_ball_radius}")
    s = np.asarray(depths, float)
    if np.any((s <= 0) | (s > 1)):
        raise GeometryError("depths must lie in (0, 1]")
    n = domain.inward_normal(Q)
    return np.asarray(Q, float) + (s * r0)[:, None] * n


def boundary_layer_grid(domain: DomainGeometry, decades: int, per_decade: int,
                        angular: int, top: Optional[float] = None):
    """Interior points at geometric depths below the outer boundary and uniform angles.

    Depths are top, top 10^(-1/per_decade), ..., decades*per_decade of them.
    Returns (points, depths).
    """
    if min(decades, per_decade, angular) <= 0:
        raise GeometryError("grid parameters must be positive")
    if top is None:
        top = 0.1 * domain.interior_ball_radius
    k = np.arange(decades * per_decade)
    depth = top * 10.0 ** (-k / per_decade)
    ang = 2 * np.pi * np.arange(angular) / angular
    pts = []
    dd = []
    for a in ang:
        Q = domain.boundary_point(a)
        pts.append(normal_ray_points(domain, Q, top, depth / top))
        dd.append(depth)
    return np.concatenate(pts), np.concatenate(dd)


@dataclass(frozen=True)
class LocalizationBox:
    """D_Q(r1, r2) = {0 < rho_Q(y) < r1, |y~| < r2} in boundary coordinates at Q.

    Only boxes at an outer boundary point are supported; the local graph of the
    circle of radius R is phi(y~) = R - sqrt(R^2 - |y~|^2).
    """

    domain: DomainGeometry
    Q: tuple
    r1: float
    r2: float

    def __post_init__(self):
        R = self.domain.radius
        if not (0 < self.r1 and 0 < self.r2):
            raise GeometryError("box sides must be positive")
        if self.r2 >= R or self.r1 + R - np.sqrt(R * R - self.r2 ** 2) >= R:
            raise GeometryError("box too large for the boundary chart")
        rho = np.linalg.norm(np.asarray(self.Q) - np.asarray(self.domain.center))
        if not np.isclose(rho, R, rtol=1e-9):
            raise GeometryError("Q must lie on the outer boundary")

    @property
    def normal(self):
        return self.domain.inward_normal(self.Q)

    def coords(self, y):
        """(y~ norm, rho_Q(y)) of points y; y~ is the tangential component."""
        y = np.asarray(y, float)
        n = self.normal
        v = y - np.asarray(self.Q)
        yd = v @ n
        tang = v - yd[..., None] * n
        yt = np.linalg.norm(tang, axis=-1)
        R = self.domain.radius
        fy = R - np.sqrt(np.maximum(R * R - yt ** 2, 0.0))
        return yt, yd - fy

    def contains(self, y):
        yt, rq = self.coords(y)
        return (rq > 0) & (rq < self.r1) & (yt < self.r2)

    def dist(self, y):
        """Cheap lower proxy for the distance to the box boundary (step-size control)."""
        yt, rq = self.coords(y)
        return np.maximum(np.minimum(np.minimum(rq, self.r1 - rq), self.r2 - yt), 0.0)

    @property
    def outer_radius(self) -> float:
        """Radius of the ball about Q that must contain the box."""
        return max(self.r1, self.r2) / self.domain.kappa0

    def to_dict(self):
        return {"Q": list(self.Q), "r1": self.r1, "r2": self.r2}


def localization_box(domain: DomainGeometry, Q, r: float) -> LocalizationBox:
    """The concrete substitute V = D_Q(r/2, r/2) for the local C^{1,1} subdomain."""
    return LocalizationBox(domain, tuple(float(c) for c in Q), 0.5 * r, 0.5 * r)
