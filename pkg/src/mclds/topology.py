"""Cell layout, CPE placement, incumbent placement and sensor duty assignment.

Cells sit on a fixed hexagonal lattice (spiral order from the centre), so the
neighbour graph never depends on the seed.  Only CPE and incumbent positions
consume randomness, drawn from the ``topology`` sub-stream.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .config import IncumbentStation, ScenarioConfig
from .streams import substream


@dataclass(frozen=True)
class Cell:
    center: tuple[float, float]
    radius: float
    bs_position: tuple[float, float]
    cpe_positions: np.ndarray  # (n_cpe, 2), metres


@dataclass(frozen=True)
class Topology:
    cells: tuple[Cell, ...]
    neighbors: tuple[frozenset[int], ...]  # 0-based cell indices
    incumbents: tuple[IncumbentStation, ...]

    @property
    def num_cells(self) -> int:
        return len(self.cells)

    def sensor_positions(self) -> np.ndarray:
        """(J, 1 + n_cpe, 2) array; slot 0 of every cell is its base station."""
        out = []
        for c in self.cells:
            out.append(np.vstack([np.asarray(c.bs_position)[None, :], c.cpe_positions]))
        return np.stack(out)


def hex_centers(n: int, spacing: float) -> np.ndarray:
    """First ``n`` points of a hexagonal lattice in ring (spiral) order."""
    axial = [(0, 0)]
    dirs = [(1, 0), (1, -1), (0, -1), (-1, 0), (-1, 1), (0, 1)]
    ring = 1
    while len(axial) < n:
        q, r = -ring, ring  # start corner, then walk the six sides
        for dq, dr in dirs:
            for _ in range(ring):
                axial.append((q, r))
                q, r = q + dq, r + dr
        ring += 1
    axial = axial[:n]
    pts = [(spacing * (q + r / 2.0), spacing * (math.sqrt(3) / 2.0) * r) for q, r in axial]
    return np.asarray(pts, dtype=float)


def uniform_in_disk(rng: np.random.Generator, center, radius: float, n: int) -> np.ndarray:
    rho = radius * np.sqrt(rng.random(n))
    phi = 2 * np.pi * rng.random(n)
    return np.column_stack([center[0] + rho * np.cos(phi), center[1] + rho * np.sin(phi)])


def build_topology(config: ScenarioConfig) -> Topology:
    if config.cpes_per_cell <= 0:
        raise ValueError("cpes_per_cell must be positive")
    if config.cell_radius <= 0:
        raise ValueError("cell_radius must be positive")
    rng = substream(config.seed, "topology")
    R = config.cell_radius
    centers = hex_centers(config.num_cells, spacing=math.sqrt(3) * R)
    cells = []
    for c in centers:
        pos = uniform_in_disk(rng, c, R, config.cpes_per_cell)
        cells.append(Cell(center=(float(c[0]), float(c[1])), radius=R,
                          bs_position=(float(c[0]), float(c[1])), cpe_positions=pos))
    d = np.linalg.norm(centers[:, None, :] - centers[None, :, :], axis=-1)
    touch = d <= 2 * R * (1 + 1e-9)
    np.fill_diagonal(touch, False)
    neighbors = tuple(frozenset(np.flatnonzero(row).tolist()) for row in touch)
    incumbents = place_incumbents(config, centers, rng)
    return Topology(cells=tuple(cells), neighbors=neighbors, incumbents=incumbents)


def place_incumbents(config: ScenarioConfig, centers: np.ndarray,
                     rng: np.random.Generator) -> tuple[IncumbentStation, ...]:
    inc = config.incumbents
    if inc.stations:
        return tuple(inc.stations)
    R = config.cell_radius
    lo = centers.min(axis=0) - R
    hi = centers.max(axis=0) + R
    out = []
    for _ in range(inc.count):
        x, y = lo + (hi - lo) * rng.random(2)
        channel = int(rng.integers(1, config.num_channels + 1))
        radius = float(rng.uniform(*inc.coverage_radius))
        out.append(IncumbentStation(position=(float(x), float(y)), channel=channel,
                                    coverage_radius=radius, tx_power=inc.tx_power))
    return tuple(out)


# -- sensor assignment --------------------------------------------------------

@dataclass(frozen=True)
class SensorAssignment:
    """Per (cell, channel) ordered sensor lists; slot 0 is always the BS."""

    sensors: Mapping[tuple[int, int], tuple[int, ...]]
    in_band: Mapping[int, Mapping[int, int]]  # cell -> cpe slot -> channel

    def m(self, cell: int, channel: int) -> int:
        """Number of CPE sensors (BS excluded) on ``channel`` in ``cell``."""
        return len(self.sensors.get((cell, channel), (0,))) - 1

    def inactive(self, cell: int) -> bool:
        return not self.in_band.get(cell)


class NoSensorsError(ValueError):
    pass


def assign_sensors(topology: Topology, lists: Sequence, obs_fraction: float = 0.3) -> SensorAssignment:
    """Spread each cell's CPEs over its operating channels; the first
    ``ceil(obs_fraction * n)`` CPEs also sense every backup/protected/candidate
    channel.  Channels are 1-based, cells and CPE slots 0-based (slot 0 = BS).
    """
    sensors: dict[tuple[int, int], tuple[int, ...]] = {}
    in_band: dict[int, dict[int, int]] = {}
    for j, (cell, cl) in enumerate(zip(topology.cells, lists)):
        n = len(cell.cpe_positions)
        ocl = sorted(cl.ocl)
        if ocl and n == 0:
            raise NoSensorsError(f"cell {j + 1} has operating channels but no CPEs")
        per_ch: dict[int, list[int]] = {k: [0] for k in ocl}
        in_band[j] = {}
        for slot in range(1, n + 1):
            if ocl:
                k = ocl[(slot - 1) % len(ocl)]
                per_ch[k].append(slot)
                in_band[j][slot] = k
        n_obs = math.ceil(obs_fraction * n)
        for k in sorted(set(cl.bcl) | set(cl.pcl) | set(cl.ccl)):
            per_ch[k] = [0] + list(range(1, n_obs + 1))
        for k, s in per_ch.items():
            sensors[(j, k)] = tuple(s)
    return SensorAssignment(sensors=sensors, in_band=in_band)
