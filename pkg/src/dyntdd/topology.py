"""Network geometry: hexagonal site frame, picocell drops, UE drops, wrap-around.

The macro layer is only a placement frame; all transmitters live in the
picocell overlay.  Distances are measured with the 7-cluster wrap-around
metric so the layout has no network edge.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

__all__ = [
    "GeometryConfig",
    "Deployment",
    "GenerationError",
    "generate_deployment",
    "wraparound_distance",
    "wrap_offsets",
    "validate_deployment",
    "export_positions_csv",
]

_SQRT3 = np.sqrt(3.0)

# Sector azimuths in degrees; three 120-degree wedges partition a site hex.
_SECTOR_AZIMUTHS = (0.0, 120.0, 240.0)

_MAX_DROP_ATTEMPTS = 20000


class GenerationError(RuntimeError):
    """Raised when rejection sampling cannot satisfy a drop constraint."""


@dataclass(frozen=True)
class GeometryConfig:
    n_sites: int = 7                      # hex cluster: center + up to 6 neighbors
    sectors_per_site: int = 3
    inter_site_distance: float = 500.0    # m
    picos_per_macrocell: int = 4
    pico_radius: float = 40.0             # m, UE drop radius around each pico
    ues_per_pico: int = 10
    min_pico_pico_distance: float = 40.0  # m
    min_pico_macrosite_distance: float = 75.0  # m
    min_ue_pico_distance: float = 3.0     # m

    def __post_init__(self):
        if not 1 <= self.n_sites <= 7:
            raise ValueError("n_sites must be in 1..7 (hex cluster frame)")
        if not 1 <= self.sectors_per_site <= 3:
            raise ValueError("sectors_per_site must be in 1..3")
        if self.picos_per_macrocell < 0 or self.ues_per_pico < 0:
            raise ValueError("counts must be non-negative")
        for name in ("inter_site_distance", "pico_radius", "min_pico_pico_distance",
                     "min_pico_macrosite_distance", "min_ue_pico_distance"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")
        if self.pico_radius >= self.inter_site_distance:
            raise ValueError("pico_radius must be smaller than inter_site_distance")
        if self.min_ue_pico_distance >= self.pico_radius:
            raise ValueError("min_ue_pico_distance must be below pico_radius")

    @property
    def n_macrocells(self) -> int:
        return self.n_sites * self.sectors_per_site

    @property
    def n_picos(self) -> int:
        return self.n_macrocells * self.picos_per_macrocell

    @property
    def n_ues(self) -> int:
        return self.n_picos * self.ues_per_pico


def wrap_offsets(geometry: GeometryConfig) -> np.ndarray:
    """The 7 translation vectors of the cluster super-lattice (incl. zero).

    The 7-site cluster tiles the plane on a lattice generated by
    t1 = D*(5/2, sqrt(3)/2) and t2 = D*(1/2, 3*sqrt(3)/2); the standard
    mirror images are 0, +-t1, +-t2 and +-(t1 - t2).
    """
    d = geometry.inter_site_distance
    t1 = np.array([2.5 * d, 0.5 * _SQRT3 * d])
    t2 = np.array([0.5 * d, 1.5 * _SQRT3 * d])
    t3 = t1 - t2
    return np.array([[0.0, 0.0], t1, -t1, t2, -t2, t3, -t3])


def wraparound_distance(a, b, geometry: GeometryConfig) -> float:
    """Minimum distance between a and b over the 7 mirror images of b."""
    diff = np.asarray(a, dtype=float) - (np.asarray(b, dtype=float) + wrap_offsets(geometry))
    return float(np.min(np.hypot(diff[:, 0], diff[:, 1])))


def wraparound_distance_matrix(pts_a: np.ndarray, pts_b: np.ndarray,
                               geometry: GeometryConfig) -> np.ndarray:
    """Pairwise wrap-around distances, shape (len(pts_a), len(pts_b))."""
    offs = wrap_offsets(geometry)
    # (A, 1, 1, 2) - (1, B, 7, 2) -> min over the mirror axis
    diff = pts_a[:, None, None, :] - (pts_b[None, :, None, :] + offs[None, None, :, :])
    return np.min(np.sqrt((diff ** 2).sum(axis=-1)), axis=-1)


def _site_positions(geometry: GeometryConfig) -> np.ndarray:
    d = geometry.inter_site_distance
    ring = [
        (d, 0.0),
        (0.5 * d, 0.5 * _SQRT3 * d),
        (-0.5 * d, 0.5 * _SQRT3 * d),
        (-d, 0.0),
        (-0.5 * d, -0.5 * _SQRT3 * d),
        (0.5 * d, -0.5 * _SQRT3 * d),
    ]
    return np.array([(0.0, 0.0)] + ring)[: geometry.n_sites]


def _in_site_hex(local: np.ndarray, geometry: GeometryConfig) -> bool:
    # Voronoi hexagon of the site lattice: half-plane test on the 3 neighbor axes.
    half = 0.5 * geometry.inter_site_distance
    for ang in (0.0, np.pi / 3.0, 2.0 * np.pi / 3.0):
        if abs(local[0] * np.cos(ang) + local[1] * np.sin(ang)) > half:
            return False
    return True


def _wrap_into_region(p: np.ndarray, offs: np.ndarray) -> np.ndarray:
    """Translate p by the mirror offset that brings it closest to the origin."""
    cand = p[None, :] - offs
    return cand[np.argmin((cand ** 2).sum(axis=1))]


@dataclass(frozen=True)
class Deployment:
    """Immutable network layout: sites, sectors, picocells and UEs."""

    sites: np.ndarray                 # (n_sites, 2) m
    macrocell_sectors: tuple          # ((site_index, azimuth_deg), ...)
    pico_pos: np.ndarray              # (n_picos, 2) m
    pico_parent: np.ndarray           # (n_picos,) parent macrocell index
    ue_pos: np.ndarray                # (n_ues, 2) m
    ue_cell: np.ndarray               # (n_ues,) serving picocell index
    geometry: GeometryConfig

    def __post_init__(self):
        for arr in (self.sites, self.pico_pos, self.pico_parent, self.ue_pos, self.ue_cell):
            arr.setflags(write=False)

    @property
    def n_picos(self) -> int:
        return self.pico_pos.shape[0]

    @property
    def n_ues(self) -> int:
        return self.ue_pos.shape[0]

    def ues_of_cell(self, cell: int) -> np.ndarray:
        return np.flatnonzero(self.ue_cell == cell)


def generate_deployment(cfg: GeometryConfig, seed: int) -> Deployment:
    """Drop picocells and UEs for the given geometry; pure in (cfg, seed)."""
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0x746F706F]))
    offs = wrap_offsets(cfg)
    sites = _site_positions(cfg)
    sectors = tuple(
        (si, az)
        for si in range(cfg.n_sites)
        for az in _SECTOR_AZIMUTHS[: cfg.sectors_per_site]
    )

    half_span = cfg.inter_site_distance / _SQRT3  # site hex circumradius
    pico_pos: list[np.ndarray] = []
    pico_parent: list[int] = []
    for mc_idx, (si, az) in enumerate(sectors):
        site = sites[si]
        az_rad = np.deg2rad(az)
        for _ in range(cfg.picos_per_macrocell):
            placed = False
            for _ in range(_MAX_DROP_ATTEMPTS):
                local = rng.uniform(-half_span, half_span, size=2)
                if not _in_site_hex(local, cfg):
                    continue
                if cfg.sectors_per_site > 1:
                    ang = np.arctan2(local[1], local[0])
                    delta = np.angle(np.exp(1j * (ang - az_rad)))
                    if abs(delta) > np.pi / 3.0:
                        continue
                p = _wrap_into_region(site + local, offs)
                dist_sites = wraparound_distance_matrix(p[None, :], sites, cfg)
                if dist_sites.min() < cfg.min_pico_macrosite_distance:
                    continue
                if pico_pos:
                    dist_picos = wraparound_distance_matrix(
                        p[None, :], np.array(pico_pos), cfg)
                    if dist_picos.min() < cfg.min_pico_pico_distance:
                        continue
                pico_pos.append(p)
                pico_parent.append(mc_idx)
                placed = True
                break
            if not placed:
                raise GenerationError(
                    "could not place picocell in macrocell "
                    f"{mc_idx}: min_pico_pico_distance/min_pico_macrosite_distance "
                    "jointly unsatisfiable")

    ue_pos: list[np.ndarray] = []
    ue_cell: list[int] = []
    r_lo, r_hi = cfg.min_ue_pico_distance, cfg.pico_radius
    for ci, p in enumerate(pico_pos):
        for _ in range(cfg.ues_per_pico):
            # uniform over the annulus [r_lo, r_hi]
            r = np.sqrt(rng.uniform(r_lo ** 2, r_hi ** 2))
            theta = rng.uniform(0.0, 2.0 * np.pi)
            ue = _wrap_into_region(p + r * np.array([np.cos(theta), np.sin(theta)]), offs)
            ue_pos.append(ue)
            ue_cell.append(ci)

    n_picos = len(pico_pos)
    return Deployment(
        sites=sites,
        macrocell_sectors=sectors,
        pico_pos=np.array(pico_pos).reshape(n_picos, 2),
        pico_parent=np.array(pico_parent, dtype=int),
        ue_pos=np.array(ue_pos).reshape(len(ue_pos), 2),
        ue_cell=np.array(ue_cell, dtype=int),
        geometry=cfg,
    )


def validate_deployment(d: Deployment) -> list[str]:
    """Return one message per violated layout invariant; empty iff valid."""
    cfg = d.geometry
    report: list[str] = []
    if d.n_picos != cfg.n_picos:
        report.append(f"picocell count {d.n_picos} != expected {cfg.n_picos}")
    if d.n_ues != cfg.n_ues:
        report.append(f"UE count {d.n_ues} != expected {cfg.n_ues}")

    if d.n_ues:
        dist = wraparound_distance_matrix(d.ue_pos, d.pico_pos, cfg)
        serving = dist[np.arange(d.n_ues), d.ue_cell]
        for ue in np.flatnonzero(serving > cfg.pico_radius + 1e-9):
            report.append(
                f"UE {ue} is {serving[ue]:.1f} m from its serving picocell "
                f"{d.ue_cell[ue]} (radius {cfg.pico_radius} m)")
        for ue in np.flatnonzero(serving < cfg.min_ue_pico_distance - 1e-9):
            report.append(f"UE {ue} violates min_ue_pico_distance")

    if d.n_picos > 1:
        pp = wraparound_distance_matrix(d.pico_pos, d.pico_pos, cfg)
        iu = np.triu_indices(d.n_picos, k=1)
        bad = np.flatnonzero(pp[iu] < cfg.min_pico_pico_distance - 1e-9)
        for b in bad:
            i, j = iu[0][b], iu[1][b]
            report.append(
                f"picocells {i} and {j} are {pp[i, j]:.1f} m apart "
                f"(min {cfg.min_pico_pico_distance} m)")
    if d.n_picos:
        ps = wraparound_distance_matrix(d.pico_pos, d.sites, cfg).min(axis=1)
        for i in np.flatnonzero(ps < cfg.min_pico_macrosite_distance - 1e-9):
            report.append(f"picocell {i} violates min_pico_macrosite_distance")
    return report


def export_positions_csv(d: Deployment, path) -> None:
    """Debug dump: node_type, id, parent_id, x_m, y_m."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["node_type", "id", "parent_id", "x_m", "y_m"])
        for i, p in enumerate(d.sites):
            w.writerow(["site", i, "", f"{p[0]:.3f}", f"{p[1]:.3f}"])
        for i, (si, _az) in enumerate(d.macrocell_sectors):
            p = d.sites[si]
            w.writerow(["sector", i, si, f"{p[0]:.3f}", f"{p[1]:.3f}"])
        for i, p in enumerate(d.pico_pos):
            w.writerow(["pico", i, d.pico_parent[i], f"{p[0]:.3f}", f"{p[1]:.3f}"])
        for i, p in enumerate(d.ue_pos):
            w.writerow(["ue", i, d.ue_cell[i], f"{p[0]:.3f}", f"{p[1]:.3f}"])
