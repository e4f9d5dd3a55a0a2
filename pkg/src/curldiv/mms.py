"""Manufactured solution cases for the convergence harness.

Each case fixes an exact field u together with its curl J and divergence g;
the boundary data a = (eta u) x n and b = u.n are produced as normal-aware
callables evaluated with the mesh's outward normals.  Flux and period data
(alpha, beta) are computed discretely from the canonical interpolants so
they are consistent on any fixture topology.

Every registered case is verified at registration time: curl and
divergence are checked against central finite differences of u at random
interior points.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .elements import FEFunction, interpolate
from .lifts import component_fluxes, cycle_period
from .mesh import Mesh, BoundaryStructure
from .topology import HomologyBasis


FD_STEP = 1e-5
FD_TOL = 1e-8
FD_POINTS = 20


class MMSError(ValueError):
    pass


def normal_aware(fn):
    """Mark a boundary callable as fn(points, normals)."""
    fn.needs_normal = True
    return fn


@dataclass(frozen=True)
class MMSCase:
    name: str
    u: object                       # exact field, (n, 3) -> (n, 3)
    J: object                       # curl u
    g: object                       # div u
    description: str = ""

    def a(self, eta=None):
        """Tangential boundary datum (eta u) x n, normal-aware."""
        u = self.u

        if eta is not None and eta.kind == "per_region":
            raise MMSError("per-region eta has no pointwise boundary value")

        @normal_aware
        def a_fn(points, normals):
            pts = np.asarray(points, dtype=np.float64)
            vals = u(pts)
            if eta is not None:
                mats = eta.at_quadrature(np.zeros(1, dtype=np.int64),
                                         pts[None])[0]
                vals = np.einsum("qxy,qy->qx", mats, vals)
            return np.cross(vals, normals)
        return a_fn

    def b(self):
        """Normal boundary datum u.n, normal-aware (mu u.n uses mu=I cases)."""
        u = self.u

        @normal_aware
        def b_fn(points, normals):
            vals = u(np.asarray(points, dtype=np.float64))
            return np.einsum("qx,qx->q", vals, normals)
        return b_fn


REGISTRY: dict[str, MMSCase] = {}


def _fd_check(case: MMSCase) -> None:
    rng = np.random.default_rng(20240817)
    pts = rng.uniform(0.1, 0.9, size=(FD_POINTS, 3))
    h = FD_STEP
    grad = np.zeros((FD_POINTS, 3, 3))      # grad[i, k, :] = d u / d x_k
    for k in range(3):
        dp = np.zeros(3)
        dp[k] = h
        grad[:, k] = (case.u(pts + dp) - case.u(pts - dp)) / (2.0 * h)
    curl = np.stack([grad[:, 1, 2] - grad[:, 2, 1],
                     grad[:, 2, 0] - grad[:, 0, 2],
                     grad[:, 0, 1] - grad[:, 1, 0]], axis=1)
    div = grad[:, 0, 0] + grad[:, 1, 1] + grad[:, 2, 2]
    cerr = np.abs(curl - case.J(pts)).max()
    derr = np.abs(div - case.g(pts)).max()
    if cerr > FD_TOL or derr > FD_TOL:
        raise MMSError(f"case {case.name!r} fails the finite-difference "
                       f"self-check: curl {cerr:.3e}, div {derr:.3e}")


def register(case: MMSCase) -> MMSCase:
    _fd_check(case)
    REGISTRY[case.name] = case
    return case


def get_case(name: str) -> MMSCase:
    try:
        return REGISTRY[name]
    except KeyError:
        raise MMSError(f"unknown MMS case {name!r}; "
                       f"available: {sorted(REGISTRY)}") from None


def discrete_alpha(case: MMSCase, m: Mesh, b: BoundaryStructure) -> np.ndarray:
    """Fluxes of the RT interpolant of u through the internal components."""
    u_I = interpolate("face", case.u, m)
    fluxes = component_fluxes(m, b, u_I)
    return np.array([fluxes[r] for r in b.internal_components()])


def discrete_beta(case: MMSCase, m: Mesh, hb: HomologyBasis) -> np.ndarray:
    """Periods of the Nedelec interpolant of u over the sigma_n cycles."""
    u_I = interpolate("edge", case.u, m)
    return np.array([cycle_period(cyc, u_I.coeffs) for cyc in hb.cycles])


_PI = np.pi

register(MMSCase(
    name="constant",
    u=lambda p: np.broadcast_to(np.array([1.0, 2.0, 3.0]), (len(p), 3)).copy(),
    J=lambda p: np.zeros((len(p), 3)),
    g=lambda p: np.zeros(len(p)),
    description="constant field (1, 2, 3); reproduced exactly by both spaces",
))

register(MMSCase(
    name="mms1",
    u=lambda p: np.column_stack([np.sin(_PI * p[:, 1]) + p[:, 0],
                                 np.sin(_PI * p[:, 2]),
                                 np.sin(_PI * p[:, 0])]),
    J=lambda p: np.column_stack([-_PI * np.cos(_PI * p[:, 2]),
                                 -_PI * np.cos(_PI * p[:, 0]),
                                 -_PI * np.cos(_PI * p[:, 1])]),
    g=lambda p: np.ones(len(p)),
    description="trigonometric field with unit divergence and smooth curl",
))

register(MMSCase(
    name="mms2",
    u=lambda p: np.column_stack([p[:, 1] * p[:, 2],
                                 p[:, 0] * p[:, 2] + p[:, 0],
                                 p[:, 0] * p[:, 1]]),
    J=lambda p: np.column_stack([np.zeros(len(p)), np.zeros(len(p)),
                                 np.ones(len(p))]),
    g=lambda p: np.zeros(len(p)),
    description="polynomial field with constant curl; data exactly "
                "representable, lifts need no cleaning",
))
