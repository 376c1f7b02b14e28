"""
Block Sakurai-Sugiura (Hankel) solver for A(z) v = 0 inside rectangles.

For each tile the moments

    S_p = (1 / 2 pi i) oint zeta^p A(z)^{-1} V dz,    zeta = (z - center) / scale

are accumulated with Gauss-Legendre nodes on every side. Writing the poles of
A^{-1} as sum_j v_j w_j^H / (z - lambda_j), the block Hankel matrices
H = [S_{i+j}] and H< = [S_{i+j+1}] factor as P Q and P diag(zeta_j) Q, so the
eigenvalues inside the contour are those of the pencil reduced through a
truncated SVD of H. The polynomial part of zeta^p / (z - lambda) integrates
exactly under the rule, so poles outside the contour only enter with small
weights and are discarded by the inside-the-tile filter.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Optional

import networkx as nx
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.linalg import eig, lu_factor, lu_solve, svd

from mixedbm.core.errors import ContourHitError, DomainError
from mixedbm.core.models import EigenResult, Rectangle

logger = logging.getLogger(__name__)

MatrixFunction = Callable[[complex], np.ndarray]

INFLATION = 0.01
ILL_CONDITIONED = 1e10


class ContourSpec(BaseModel):
    """Counterclockwise rectangle with Gauss-Legendre nodes on each side"""

    model_config = ConfigDict(frozen=True)

    center: complex
    half_width: float = Field(gt=0)
    half_height: float = Field(gt=0)
    nodes_per_side: int = Field(default=28, ge=1)

    @classmethod
    def from_rectangle(cls, rect: Rectangle, nodes_per_side: int = 28) -> "ContourSpec":
        return cls(
            center=rect.center,
            half_width=rect.half_width,
            half_height=rect.half_height,
            nodes_per_side=nodes_per_side,
        )

    @property
    def scale(self) -> float:
        return max(self.half_width, self.half_height)

    @property
    def total_nodes(self) -> int:
        return 4 * self.nodes_per_side

    def rectangle(self) -> Rectangle:
        return Rectangle(
            re_min=self.center.real - self.half_width,
            re_max=self.center.real + self.half_width,
            im_min=self.center.imag - self.half_height,
            im_max=self.center.imag + self.half_height,
        )

    def corners(self) -> list[complex]:
        dx, dy = self.half_width, 1j * self.half_height
        c = self.center
        return [c - dx - dy, c + dx - dy, c + dx + dy, c - dx + dy]

    def quadrature(self) -> tuple[np.ndarray, np.ndarray]:
        """Nodes z_j and weights w_j with sum_j w_j f(z_j) ~ oint f(z) dz"""
        x, w = np.polynomial.legendre.leggauss(self.nodes_per_side)
        corners = self.corners()
        nodes, weights = [], []
        for i in range(4):
            start, end = corners[i], corners[(i + 1) % 4]
            half = 0.5 * (end - start)
            nodes.append(start + half * (1.0 + x))
            weights.append(half * w)
        return np.concatenate(nodes), np.concatenate(weights)

    def contains(self, z: complex) -> bool:
        return self.rectangle().contains(z, strict=True)

    def inflate(self, fraction: float = INFLATION) -> "ContourSpec":
        return self.model_copy(
            update={
                "half_width": self.half_width * (1.0 + fraction),
                "half_height": self.half_height * (1.0 + fraction),
            }
        )


class SsmParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    moments: int = Field(default=4, ge=1)
    block_size: int = Field(default=8, ge=1)
    svd_rel_tol: float = Field(default=1e-12, gt=0, lt=1)
    residual_tol: float = Field(default=1e-8, gt=0)
    merge_tol: float = Field(default=1e-9, ge=0)
    rng_seed: int = 0
    workers: int = Field(default=1, ge=1)


class Moments(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    blocks: np.ndarray  # (2K, n, L)
    contour: ContourSpec
    reference_norm: float

    @property
    def count(self) -> int:
        return self.blocks.shape[0]

    @model_validator(mode="after")
    def check_shape(self) -> "Moments":
        if self.blocks.ndim != 3 or self.blocks.shape[0] % 2 != 0:
            raise ValueError(f"moment blocks must be (2K, n, L), got {self.blocks.shape}")
        return self


class Eigenpair(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    value: complex
    vector: np.ndarray
    residual: float


def probe_block(size: int, params: SsmParams) -> np.ndarray:
    rng = np.random.default_rng(params.rng_seed)
    shape = (size, params.block_size)
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def _factorize(matrix: np.ndarray, node: complex) -> tuple[np.ndarray, np.ndarray]:
    lu, piv = lu_factor(matrix, check_finite=False)
    pivots = np.abs(np.diag(lu))
    largest = float(np.max(pivots))
    if largest == 0 or float(np.min(pivots)) <= (
        np.finfo(float).eps * matrix.shape[0] * largest
    ):
        raise ContourHitError(
            f"A(z) is numerically singular at contour node {node}; "
            "an eigenvalue lies on the contour, perturb the rectangle",
            node,
        )
    return lu, piv


def compute_moments(
    A: MatrixFunction, contour: ContourSpec, params: SsmParams
) -> Moments:
    nodes, weights = contour.quadrature()
    size = A(complex(nodes[0])).shape[0]
    probe = probe_block(size, params)
    count = 2 * params.moments
    blocks = np.zeros((count, size, params.block_size), dtype=np.complex128)
    reference = 0.0
    for z, w in zip(nodes, weights):
        z = complex(z)
        solved = lu_solve(_factorize(A(z), z), probe, check_finite=False)
        reference = max(reference, float(np.linalg.norm(solved, 2)))
        zeta = (z - contour.center) / contour.scale
        powers = zeta ** np.arange(count)
        blocks += (w / (2j * np.pi)) * powers[:, None, None] * solved[None, :, :]
        logger.debug("factorized A at node %s", z)
    return Moments(blocks=blocks, contour=contour, reference_norm=reference)


def _residual(A: MatrixFunction, value: complex, vector: np.ndarray) -> float:
    matrix = A(value)
    denominator = np.linalg.norm(matrix, "fro") * np.linalg.norm(vector)
    if denominator == 0:
        return float("inf")
    return float(np.linalg.norm(matrix @ vector) / denominator)


def extract_eigen(
    moments: Moments,
    params: SsmParams,
    A: Optional[MatrixFunction] = None,
    keep: Optional[Callable[[complex], bool]] = None,
) -> list[Eigenpair]:
    """
    Eigenvalues of the reduced Hankel pencil, mapped back to the omega plane.

    Values rejected by ``keep`` are dropped before anything else is done with
    them. Residuals are computed against ``A`` when given and left at 0 otherwise.
    """
    k = moments.count // 2
    blocks = moments.blocks
    hankel = np.block([[blocks[i + j] for j in range(k)] for i in range(k)])
    shifted = np.block([[blocks[i + j + 1] for j in range(k)] for i in range(k)])
    u, s, vh = svd(hankel, full_matrices=False)
    threshold = params.svd_rel_tol * max(float(s[0]) if s.size else 0.0, moments.reference_norm)
    rank = int(np.sum(s > threshold))
    logger.debug("hankel singular values %s, rank %d", s[: rank + 2], rank)
    if rank == 0:
        return []
    if s[0] / s[rank - 1] > ILL_CONDITIONED:
        logger.warning(
            "ill-conditioned Hankel pencil: rank %d, condition %.2e",
            rank,
            s[0] / s[rank - 1],
        )
    u, s, vh = u[:, :rank], s[:rank], vh[:rank, :]
    reduced = u.conj().T @ shifted @ vh.conj().T / s[None, :]
    zetas, y = eig(reduced)
    size = blocks.shape[1]
    contour = moments.contour
    pairs = []
    for zeta, column in zip(zetas, y.T):
        value = complex(contour.center + contour.scale * zeta)
        if keep is not None and not keep(value):
            continue
        vector = (u @ column)[:size]
        residual = _residual(A, value, vector) if A is not None else 0.0
        pairs.append(Eigenpair(value=value, vector=vector, residual=residual))
    return pairs


def _tile_eigen(
    A: MatrixFunction,
    tile: Rectangle,
    index: int,
    params: SsmParams,
    nodes_per_side: int,
) -> list[EigenResult]:
    contour = ContourSpec.from_rectangle(tile, nodes_per_side)
    margin = 0.0
    try:
        moments = compute_moments(A, contour, params)
    except ContourHitError as exc:
        logger.warning(
            "contour hit on tile %d at %s; retrying with the tile inflated by %g%%",
            index,
            exc.node,
            100 * INFLATION,
        )
        try:
            moments = compute_moments(A, contour.inflate(), params)
        except ContourHitError as again:
            raise ContourHitError(str(again), again.node, tile=index) from again
        # eigenvalues sitting on the original boundary belong to this tile
        margin = params.merge_tol

    def inside(value: complex) -> bool:
        if margin:
            return tile.contains(value, strict=False, margin=margin)
        return tile.contains(value)

    results = []
    for pair in extract_eigen(moments, params, A, keep=inside):
        if pair.residual > params.residual_tol:
            logger.warning(
                "dropping %s in tile %d: residual %.2e above %.2e",
                pair.value,
                index,
                pair.residual,
                params.residual_tol,
            )
            continue
        results.append(EigenResult(value=pair.value, residual=pair.residual, tile=index))
    logger.info("tile %d: %d eigenvalue(s)", index, len(results))
    return results


def merge_eigenvalues(results: list[EigenResult], tol: float) -> list[EigenResult]:
    """
    Collapse eigenvalues closer than ``tol`` into one result.

    Clusters are connected components of the proximity graph. The multiplicity
    is the largest number of members contributed by a single tile, so the same
    eigenvalue seen from two neighbouring tiles is counted once.
    """
    graph = nx.Graph()
    graph.add_nodes_from(range(len(results)))
    for i in range(len(results)):
        for j in range(i + 1, len(results)):
            if abs(results[i].value - results[j].value) <= tol:
                graph.add_edge(i, j)
    merged = []
    for component in nx.connected_components(graph):
        members = [results[i] for i in sorted(component)]
        best = min(members, key=lambda r: r.residual)
        per_tile: dict[Optional[int], int] = {}
        for member in members:
            per_tile[member.tile] = per_tile.get(member.tile, 0) + member.multiplicity
        merged.append(best.model_copy(update={"multiplicity": max(per_tile.values())}))
    merged.sort(key=lambda r: (r.value.real, r.value.imag))
    return merged


def solve_region(
    A: MatrixFunction,
    region: Rectangle,
    subdivisions: tuple[int, int],
    params: SsmParams,
    nodes_per_side: int = 28,
) -> list[EigenResult]:
    if region.contains(0.0, strict=False):
        raise DomainError("search region must not contain omega = 0")
    tiles = region.tiles(*subdivisions)
    logger.info(
        "ssm over %d tile(s), K=%d L=%d, %d nodes per side",
        len(tiles),
        params.moments,
        params.block_size,
        nodes_per_side,
    )

    def work(index: int) -> list[EigenResult]:
        return _tile_eigen(A, tiles[index], index, params, nodes_per_side)

    if params.workers > 1:
        with ThreadPoolExecutor(max_workers=params.workers) as pool:
            per_tile = list(pool.map(work, range(len(tiles))))
    else:
        per_tile = [work(index) for index in range(len(tiles))]
    found = [result for results in per_tile for result in results]
    return merge_eigenvalues(found, params.merge_tol)


class PairingReport(BaseModel):
    """Nearest-neighbour distances between two eigenvalue lists"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    forward: np.ndarray  # for each of the first list, distance to the second
    backward: np.ndarray
    forward_index: np.ndarray

    @property
    def max_distance(self) -> float:
        if self.forward.size == 0 and self.backward.size == 0:
            return 0.0
        if self.forward.size == 0 or self.backward.size == 0:
            return float("inf")
        return float(max(self.forward.max(), self.backward.max()))

    @property
    def one_to_one(self) -> bool:
        return len(set(self.forward_index.tolist())) == self.forward_index.size == self.backward.size


def pair_eigenvalues(first: list[complex], second: list[complex]) -> PairingReport:
    a = np.asarray(first, dtype=np.complex128)
    b = np.asarray(second, dtype=np.complex128)
    if a.size == 0 or b.size == 0:
        empty = np.full(a.size, np.inf)
        return PairingReport(
            forward=empty,
            backward=np.full(b.size, np.inf),
            forward_index=np.full(a.size, -1),
        )
    distance = np.abs(a[:, None] - b[None, :])
    return PairingReport(
        forward=distance.min(axis=1),
        backward=distance.min(axis=0),
        forward_index=distance.argmin(axis=1),
    )
