"""Grid generation for unilateral and multilateral INMA random fields.

Generation follows three steps: draw i.i.d. innovations on the extended
lattice, draw the thinning vector of every innovation, then add each
thinning into its receiving cell.  Random numbers are keyed by absolute
innovation coordinates (see :mod:`inmafield.rng`), which makes the output
independent of the worker count and consistent across window sizes.

Index conventions: ``s`` is the row index and ``t`` the column index,
observations are ``X[s, t]`` for 1 <= s <= n1, 1 <= t <= n2, and the
innovation lattice of a unilateral model starts at (1 - q1, 1 - q2).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .distributions import InnovationSpec
from .errors import ConfigurationError, ResourceError, UsageError
from .model import InmaModel, MultilateralOrder, model_hash, validate
from .rng import INNOVATION, CounterStreams
from .thinning import BetaMatrix, CrossDependence, _crossdep_violations, thin

__all__ = [
    "Grid",
    "ThinningField",
    "DEFAULT_MAX_CELLS",
    "simulate_grid",
    "simulate_multilateral",
    "draw_thinnings",
    "stack_thinnings",
    "build_assembly_matrix",
    "assemble_from_y",
]

DEFAULT_MAX_CELLS = 2**31
# cells per tile when splitting work
_TILE_CELLS = 1 << 18


@dataclass(frozen=True)
class Grid:
    """An n1 x n2 array of counts plus generation metadata.

    ``values[s - 1, t - 1]`` holds X[s, t].
    """

    values: np.ndarray
    seed: int | None = None
    model_hash: str | None = None
    mode: str = "unilateral"
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        arr = np.asarray(self.values)
        if arr.ndim != 2 or arr.size == 0:
            raise UsageError(f"grid values must be a nonempty 2-D array, got shape {arr.shape}")
        arr = arr.astype(np.int64, copy=True)
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def n1(self) -> int:
        return self.values.shape[0]

    @property
    def n2(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def header(self) -> dict:
        """Metadata record written next to serialized grids."""
        out = {
            "n1": self.n1,
            "n2": self.n2,
            "seed": self.seed,
            "model_hash": self.model_hash,
            "mode": self.mode,
            "thread_count_independent": True,
        }
        out.update(self.metadata)
        return out


@dataclass(frozen=True)
class ThinningField:
    """Innovations and thinning vectors on the extended lattice.

    ``eps[a, b]`` is the innovation at (origin[0] + a, origin[1] + b) and
    ``y[a, b]`` its thinning vector, shaped like the coefficient box.
    """

    eps: np.ndarray
    y: np.ndarray
    origin: tuple[int, int]


def _component_tags(shape) -> np.ndarray:
    return np.arange(shape[0] * shape[1])


def _draw_block(box: BetaMatrix, innovation: InnovationSpec, crossdep, seed: int,
                s_range, t_range, per_individual: bool):
    """Innovations and thinnings for sites s_range x t_range (inclusive)."""
    s = np.arange(s_range[0], s_range[1] + 1)
    t = np.arange(t_range[0], t_range[1] + 1)
    ss, tt = np.meshgrid(s, t, indexing="ij")
    streams = CounterStreams.for_sites(seed, ss, tt, INNOVATION)
    eps = innovation.draw(streams)
    y = thin(box, crossdep, eps, streams, per_individual=per_individual,
             component_tags=_component_tags(box.shape))
    return eps.reshape(ss.shape), y.reshape(ss.shape + box.shape)


def _simulate_tile(box, offsets, innovation, crossdep, seed, rows, n2, per_individual):
    p1, p2 = offsets
    q1, q2 = box.shape[0] - 1 - p1, box.shape[1] - 1 - p2
    r0, r1 = rows
    _, y = _draw_block(box, innovation, crossdep, seed,
                       (r0 - q1, r1 + p1), (1 - q2, n2 + p2), per_individual)
    out = np.zeros((r1 - r0 + 1, n2), dtype=np.int64)
    R = r1 - r0 + 1
    for a in range(box.shape[0]):
        i = a - p1
        for b in range(box.shape[1]):
            j = b - p2
            if box[a, b] == 0.0:
                continue
            out += y[q1 - i:q1 - i + R, q2 - j:q2 - j + n2, a, b]
    return out


def _simulate(box, offsets, innovation, crossdep, n1, n2, seed, workers,
              per_individual, max_cells):
    n1, n2, seed = int(n1), int(n2), int(seed)
    if n1 < 1 or n2 < 1:
        raise UsageError(f"grid dimensions must be positive, got {n1} x {n2}")
    if n1 * n2 > max_cells:
        raise ResourceError(f"grid of {n1} x {n2} = {n1 * n2} cells exceeds the cap of {max_cells}")
    if not 0 <= seed < 2**64:
        raise ConfigurationError(f"seed must be a 64-bit unsigned integer, got {seed}")
    workers = max(1, int(workers))
    n_tiles = min(n1, max(workers, math.ceil(n1 * n2 / _TILE_CELLS)))
    step = math.ceil(n1 / n_tiles)
    tiles = [(r, min(n1, r + step - 1)) for r in range(1, n1 + 1, step)]

    def run(rows):
        return _simulate_tile(box, offsets, innovation, crossdep, seed, rows, n2, per_individual)

    if workers == 1 or len(tiles) == 1:
        parts = [run(rows) for rows in tiles]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, tiles))
    return np.vstack(parts)


def simulate_grid(model: InmaModel, n1: int, n2: int, seed: int, *, workers: int = 1,
                  per_individual: bool = False, max_cells: int = DEFAULT_MAX_CELLS) -> Grid:
    """Simulate an n1 x n2 window of the unilateral INMA field.

    Parameters
    ----------
    model : InmaModel
    n1, n2 : int
        Window size (rows, columns).
    seed : int
        64-bit seed; the output is a pure function of (model, seed) and
        the window.
    workers : int
        Number of threads.  Does not affect the result.
    per_individual : bool
        Draw each individual's counting vector explicitly (slow; used to
        cross-check the closed-form thinning route).
    max_cells : int
        Refuse windows with more cells than this.
    """
    problems = validate(model)
    if problems:
        raise ConfigurationError("; ".join(problems))
    values = _simulate(model.beta, (0, 0), model.innovation, model.crossdep, n1, n2, seed,
                       workers, per_individual, max_cells)
    return Grid(values, seed=int(seed), model_hash=model.hash, mode="unilateral",
                metadata={"per_individual": bool(per_individual)} if per_individual else {})


def simulate_multilateral(beta: MultilateralOrder, innovation: InnovationSpec, crossdep,
                          n1: int, n2: int, seed: int, *, workers: int = 1,
                          per_individual: bool = False,
                          max_cells: int = DEFAULT_MAX_CELLS) -> Grid:
    """Simulate the two-sided field X[s, t] = sum_{-p1<=i<=q1, -p2<=j<=q2}
    beta[i, j] o eps[s-i, t-j].

    With p1 = p2 = 0 this reproduces :func:`simulate_grid` exactly.
    """
    crossdep = CrossDependence.parse(crossdep)
    problems = beta.violations() + innovation.violations() + _crossdep_violations(beta.box, crossdep)
    if problems:
        raise ConfigurationError("; ".join(problems))
    values = _simulate(beta.box, (beta.p1, beta.p2), innovation, crossdep, n1, n2, seed,
                       workers, per_individual, max_cells)
    return Grid(values, seed=int(seed), model_hash=model_hash(_MultiView(beta, innovation, crossdep)),
                mode="multilateral")


@dataclass(frozen=True)
class _MultiView:
    beta: MultilateralOrder
    innovation: InnovationSpec
    crossdep: CrossDependence

    def to_dict(self):
        d = self.beta.to_dict()
        d.update(innovation=self.innovation.to_dict(), crossdep=self.crossdep.value)
        return d


def draw_thinnings(model: InmaModel, n1: int, n2: int, seed: int,
                   per_individual: bool = False) -> ThinningField:
    """The innovations and thinning vectors that :func:`simulate_grid`
    consumes for the same arguments."""
    model.check()
    q1, q2 = model.order
    eps, y = _draw_block(model.beta, model.innovation, model.crossdep, int(seed),
                         (1 - q1, n1), (1 - q2, n2), per_individual)
    return ThinningField(eps=eps, y=y, origin=(1 - q1, 1 - q2))


def stack_thinnings(y: np.ndarray) -> np.ndarray:
    """Concatenate thinning vectors into the column vector used by the
    assembly matrix: sites in raster order (t fastest), and within a site
    the components ordered (0,0), (1,0), ..., (q1,0), (0,1), ... (i fastest).
    """
    y = np.asarray(y)
    return np.ascontiguousarray(np.swapaxes(y, 2, 3)).reshape(-1)


def build_assembly_matrix(n1: int, n2: int, q1: int, q2: int) -> sp.csr_matrix:
    """0/1 matrix B with X = B @ Y.

    Rows are observations X[s, t] in raster order; columns are blocks of
    (q1+1)(q2+1) thinning components, one block per innovation site of the
    extended lattice in raster order (see :func:`stack_thinnings`).
    """
    n1, n2, q1, q2 = int(n1), int(n2), int(q1), int(q2)
    if n1 < 1 or n2 < 1 or q1 < 0 or q2 < 0:
        raise UsageError("need n1, n2 >= 1 and q1, q2 >= 0")
    K = (q1 + 1) * (q2 + 1)
    L2 = n2 + q2
    s, t = np.meshgrid(np.arange(1, n1 + 1), np.arange(1, n2 + 1), indexing="ij")
    rows, cols = [], []
    row = (s - 1) * n2 + (t - 1)
    for i in range(q1 + 1):
        for j in range(q2 + 1):
            site = (s - i - (1 - q1)) * L2 + (t - j - (1 - q2))
            rows.append(row.ravel())
            cols.append((site * K + j * (q1 + 1) + i).ravel())
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    data = np.ones(rows.size, dtype=np.int64)
    shape = (n1 * n2, K * (n1 + q1) * (n2 + q2))
    return sp.csr_matrix((data, (rows, cols)), shape=shape)


def assemble_from_y(B: sp.spmatrix, Y) -> np.ndarray:
    """X = B @ Y over the nonnegative integers."""
    Y = np.asarray(Y)
    if Y.ndim != 1 or Y.shape[0] != B.shape[1]:
        raise UsageError(f"Y has shape {Y.shape}, expected ({B.shape[1]},)")
    if Y.size and (not np.issubdtype(Y.dtype, np.integer) or Y.min() < 0):
        raise UsageError("Y must hold nonnegative integers")
    return np.asarray(B @ Y.astype(np.int64), dtype=np.int64)
