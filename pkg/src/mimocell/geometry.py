"""Point-process sampling, nearest-BS association and typical-user scenes.

Two scene constructions are offered for the user placed at the origin:

``thinned``
    The serving distance follows the nearest-point law of the full BS process
    and interferers form an independent PPP of density ``eps * lambda`` outside
    it.
``exact-occupancy``
    BS positions are sampled explicitly. Given them, the user counts of
    different cells are independent Poisson variables with mean
    ``lambda_u * cell_area``, so a BS is active with probability
    ``1 - exp(-lambda_u * area)``; this is the same law as dropping a user PPP
    and associating every user. The typical user's own cell receives
    ``1 + Poisson(lambda_u * area)`` users. Cells are resolved inside an
    inner disk of ``exact_multiplier`` mean spacings; beyond it the far field
    is thinned independently.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np
from scipy.spatial import Delaunay, cKDTree

from .analytic import activity_prob
from .errors import DomainError, EmptySupportError
from .params import Arch, SystemParams

__all__ = [
    "ActivityMode",
    "Window",
    "PointSet",
    "Realization",
    "TypicalUserScene",
    "sample_ppp",
    "associate_nearest",
    "drop_network",
    "voronoi_areas",
    "typical_scene",
    "window_radius",
    "scene_rows",
    "scene_csv",
]

DEFAULT_WINDOW_MULTIPLIER = 40.0
DEFAULT_EXACT_MULTIPLIER = 8.0
# extra BSs sampled around the exact zone so that its cells are closed correctly
GUARD_SPACINGS = 2.0
MAX_RESAMPLES = 1000


class ActivityMode(str, Enum):
    EXACT = "exact-occupancy"
    THINNED = "thinned"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class Window:
    """Disk (``size`` = radius) or square (``size`` = side) centred at the origin."""

    kind: str = "disk"
    size: float = 1.0

    def __post_init__(self):
        if self.kind not in ("disk", "square"):
            raise DomainError(f"window kind must be 'disk' or 'square', got {self.kind!r}")
        if not (math.isfinite(self.size) and self.size > 0):
            raise DomainError(f"window size must be finite and > 0, got {self.size}")

    @classmethod
    def disk(cls, radius: float) -> "Window":
        return cls("disk", float(radius))

    @classmethod
    def square(cls, side: float) -> "Window":
        return cls("square", float(side))

    @property
    def area(self) -> float:
        if self.kind == "disk":
            return math.pi * self.size ** 2
        return self.size ** 2

    def contains(self, xy: np.ndarray) -> np.ndarray:
        xy = np.asarray(xy, dtype=float).reshape(-1, 2)
        if self.kind == "disk":
            return np.hypot(xy[:, 0], xy[:, 1]) <= self.size
        half = self.size / 2.0
        return np.all(np.abs(xy) <= half, axis=1)

    def uniform(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if self.kind == "disk":
            r = self.size * np.sqrt(rng.random(n))
            theta = 2.0 * math.pi * rng.random(n)
            return np.column_stack((r * np.cos(theta), r * np.sin(theta)))
        return (rng.random((n, 2)) - 0.5) * self.size


@dataclass(frozen=True)
class PointSet:
    points: np.ndarray
    window: Window
    density: float

    def __len__(self):
        return len(self.points)


@dataclass(frozen=True)
class Realization:
    bs: PointSet
    ue: PointSet
    association: Optional[np.ndarray] = None
    occupancy: Optional[np.ndarray] = None


@dataclass(frozen=True)
class TypicalUserScene:
    serving_distance: float
    interferer_distances: np.ndarray
    activity_mode: ActivityMode
    arch: Arch
    # users sharing the serving BS, typical user included (exact mode only)
    serving_occupancy: Optional[int] = None
    diagnostics: dict = field(default_factory=dict)


def sample_ppp(density: float, window: Window, rng: np.random.Generator) -> PointSet:
    """Homogeneous PPP: Poisson count, i.i.d. uniform positions."""
    if not (math.isfinite(density) and density >= 0):
        raise DomainError(f"density must be finite and >= 0, got {density}")
    n = rng.poisson(density * window.area)
    return PointSet(window.uniform(n, rng), window, float(density))


def _nearest(bs: np.ndarray, ue: np.ndarray) -> np.ndarray:
    if len(bs) == 0:
        raise EmptySupportError("no base station to associate with")
    if len(ue) == 0:
        return np.zeros(0, dtype=np.intp)
    tree = cKDTree(bs)
    if len(bs) == 1:
        return np.zeros(len(ue), dtype=np.intp)
    dist, idx = tree.query(ue, k=2)
    # exact ties go to the lower index
    tie = dist[:, 0] == dist[:, 1]
    best = idx[:, 0].copy()
    best[tie] = np.minimum(idx[tie, 0], idx[tie, 1])
    return best


def associate_nearest(realization: Realization) -> Realization:
    """Attach each UE to its closest BS and count users per BS."""
    bs, ue = realization.bs.points, realization.ue.points
    assoc = _nearest(bs, ue)
    occ = np.bincount(assoc, minlength=len(bs))
    return Realization(realization.bs, realization.ue, assoc, occ)


def drop_network(lambda_b: float, lambda_u: float, window: Window,
                 rng: np.random.Generator) -> Realization:
    """Sample BSs and UEs in ``window`` and associate them.

    Retries (up to ``MAX_RESAMPLES``) while the window holds no BS.
    """
    for _ in range(MAX_RESAMPLES):
        bs = sample_ppp(lambda_b, window, rng)
        if len(bs):
            break
    else:
        raise EmptySupportError("window never contained a base station")
    ue = sample_ppp(lambda_u, window, rng)
    return associate_nearest(Realization(bs, ue))


def _circumcentres(pts: np.ndarray, simplices: np.ndarray) -> np.ndarray:
    a, b, c = (pts[simplices[:, k]] for k in range(3))
    b = b - a
    c = c - a
    d = 2.0 * (b[:, 0] * c[:, 1] - b[:, 1] * c[:, 0])
    bb = (b * b).sum(1)
    cc = (c * c).sum(1)
    ux = (c[:, 1] * bb - b[:, 1] * cc) / d
    uy = (b[:, 0] * cc - c[:, 0] * bb) / d
    return a + np.column_stack((ux, uy))


def voronoi_areas(points: np.ndarray) -> np.ndarray:
    """Areas of the Voronoi cells of ``points``; ``inf`` for unbounded cells.

    Each Voronoi edge joins the circumcentres of the two Delaunay triangles
    sharing a Delaunay edge ``(i, j)`` and lies on its perpendicular bisector,
    so it adds ``|edge| * |p_i - p_j| / 4`` to both cells.
    """
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    areas = np.zeros(n)
    if n < 3:
        areas[:] = np.inf
        return areas
    tri = Delaunay(pts)
    simp = tri.simplices
    centres = _circumcentres(pts, simp)
    nb = tri.neighbors
    t_idx, k_idx = np.nonzero(nb > np.arange(len(simp))[:, None])
    other = nb[t_idx, k_idx]
    i = simp[t_idx, (k_idx + 1) % 3]
    j = simp[t_idx, (k_idx + 2) % 3]
    contrib = 0.25 * np.hypot(*(centres[t_idx] - centres[other]).T) \
        * np.hypot(*(pts[i] - pts[j]).T)
    areas += np.bincount(i, contrib, minlength=n)
    areas += np.bincount(j, contrib, minlength=n)
    areas[np.unique(tri.convex_hull)] = np.inf
    return areas


def window_radius(active_density: float, multiplier: float = DEFAULT_WINDOW_MULTIPLIER) -> float:
    """Disk radius holding about ``multiplier**2`` active transmitters."""
    if not active_density > 0:
        return math.inf
    return multiplier / math.sqrt(math.pi * active_density)


def _annulus_distances(density, r_in, r_out, rng):
    if density <= 0 or r_out <= r_in:
        return np.zeros(0)
    span = r_out * r_out - r_in * r_in
    n = rng.poisson(density * math.pi * span)
    return np.sqrt(r_in * r_in + span * rng.random(n))


def _thinned_scene(lam, eps, radius, rng):
    d0 = math.sqrt(rng.standard_exponential() / (math.pi * lam))
    inter = _annulus_distances(eps * lam, d0, radius, rng)
    return d0, inter, None, {}


def _exact_scene(lam, lam_u, eps, radius, exact_mult, rng):
    spacing = 1.0 / math.sqrt(math.pi * lam)
    r_exact = min(exact_mult * spacing, radius)
    r_pts = r_exact + GUARD_SPACINGS * math.sqrt(math.pi) * spacing
    resamples = 0
    while True:
        pts = Window.disk(r_pts).uniform(rng.poisson(lam * math.pi * r_pts ** 2), rng)
        if len(pts):
            break
        resamples += 1
        if resamples >= MAX_RESAMPLES:
            raise EmptySupportError("exact zone never contained a base station")
    dist = np.hypot(pts[:, 0], pts[:, 1])
    serving = int(np.argmin(dist))
    d0 = float(dist[serving])
    areas = voronoi_areas(pts)
    # user at the origin sits in the serving cell; everyone else is Poisson
    occupancy = 1 + int(rng.poisson(lam_u * areas[serving])) if math.isfinite(areas[serving]) \
        else 1 + int(rng.poisson(lam_u / lam))
    active = rng.random(len(pts)) < -np.expm1(-lam_u * areas)
    active[serving] = False
    inner = active & (dist <= r_exact)
    # guard-ring BSs have inaccurate cells; thin them like the far field
    guard = (dist > r_exact) & (rng.random(len(pts)) < eps)
    near = dist[inner | guard]
    far = _annulus_distances(eps * lam, r_pts, radius, rng)
    inter = np.concatenate((near, far))
    inter = inter[inter >= d0]
    return d0, inter, occupancy, {"bs_in_exact_zone": int(np.count_nonzero(dist <= r_exact))}


def typical_scene(p: SystemParams, arch: Arch | str, mode: ActivityMode | str,
                  rng: np.random.Generator, *,
                  window_multiplier: float = DEFAULT_WINDOW_MULTIPLIER,
                  exact_multiplier: float = DEFAULT_EXACT_MULTIPLIER,
                  eps: Optional[float] = None) -> TypicalUserScene:
    """Serving and interferer distances seen by a user at the origin.

    Parameters
    ----------
    p : SystemParams
    arch : Arch
        Selects the transmitter density (``lambda_b`` or ``M * lambda_b``).
    mode : ActivityMode
        ``thinned`` or ``exact-occupancy`` (see module docstring).
    rng : numpy.random.Generator
    window_multiplier : float
        The interference window is a disk of radius
        ``window_multiplier / sqrt(pi * eps * lambda)``.
    exact_multiplier : float
        Radius, in units of ``1 / sqrt(pi * lambda)``, within which cell
        occupancies are resolved exactly.
    eps : float, optional
        Override of the activity probability (thinning and far field).
    """
    arch, mode = Arch(arch), ActivityMode(mode)
    if window_multiplier < 10:
        raise DomainError(f"window_multiplier must be >= 10, got {window_multiplier}")
    lam = p.bs_density(arch)
    eps = activity_prob(p.load(arch)) if eps is None else float(eps)
    if not 0.0 <= eps <= 1.0:
        raise DomainError(f"eps must lie in [0, 1], got {eps}")
    radius = window_radius(eps * lam if eps > 0 else lam, window_multiplier)
    if mode is ActivityMode.THINNED:
        d0, inter, occ, diag = _thinned_scene(lam, eps, radius, rng)
    else:
        d0, inter, occ, diag = _exact_scene(lam, p.lambda_u, eps, radius, exact_multiplier, rng)
    diag["window_radius"] = radius
    return TypicalUserScene(d0, inter, mode, arch, occ, diag)


# ---------------------------------------------------------------------------
# Scene export

SCENE_COLUMNS = ("kind", "x", "y", "assoc_index", "occupancy")


def scene_rows(real: Realization) -> list:
    """Rows ``kind, x, y, assoc_index, occupancy``.

    BS rows carry their own index and user count (0 marks an idle cell); UE
    rows carry the serving BS index and that BS's count.
    """
    occ = real.occupancy
    rows = [("bs", float(x), float(y), i, int(occ[i]))
            for i, (x, y) in enumerate(real.bs.points)]
    rows += [("ue", float(x), float(y), int(a), int(occ[a]))
             for (x, y), a in zip(real.ue.points, real.association)]
    return rows


def scene_csv(real: Realization) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SCENE_COLUMNS)
    for kind, x, y, a, o in scene_rows(real):
        w.writerow((kind, repr(x), repr(y), a, o))
    return buf.getvalue()
