"""
Eigenvalue inclusion sets for a product AB.

Gershgorin-type set G: disks |z - c_i| <= r_i(A) R(B)^{m-1} - |c_i| around the
diagonal c_i = c_{i..i} of AB. Brualdi-type set: one region per circuit γ of
the digraph of AB, prod_{i∈γ} |z - c_i| <= prod_{i∈γ} radius_i, defined when
every vertex lies on a circuit. The Brualdi union lies inside G.

Neither set needs AB itself: the diagonal, the radii and (for nonnegative
factors) the digraph all come from A and B directly.
"""
from __future__ import annotations

import itertools
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Sequence

import networkx as nx
import numpy as np

from app.core.config import get_settings
from app.core.errors import InvariantError, PreconditionError, ResourceCapError
from app.models.tensor import Tensor
from app.services.product import (
    ProductShape,
    general_product,
    product_diagonal,
    product_row_sum_bound,
)

logger = logging.getLogger(__name__)

# above this n the printed weak-irreducibility test (subset enumeration) is refused
SUBSET_TEST_MAX_N = 20


# ── types ────────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class TensorDigraph:
    n: int
    arcs: frozenset[tuple[int, int]]   # 0-based (i, j)
    exact: bool = True                 # False when arcs are a superset estimate

    def to_networkx(self) -> nx.DiGraph:
        G = nx.DiGraph()
        G.add_nodes_from(range(self.n))
        G.add_edges_from(self.arcs)
        return G


@dataclass(frozen=True)
class Circuit:
    vertices: tuple[int, ...]   # 0-based, minimal vertex first, closing arc implied

    def __len__(self) -> int:
        return len(self.vertices)


@dataclass(frozen=True)
class Disk:
    center: complex
    radius: float
    row: int   # 0-based

    def contains(self, z, slack: float = 0.0):
        return np.abs(np.asarray(z) - self.center) <= self.radius + slack


@dataclass(frozen=True)
class CircuitRegion:
    circuit: Circuit
    centers: tuple[complex, ...]
    radii: tuple[float, ...]

    def contains(self, z, slack: float = 0.0):
        """prod |z - c_i| <= prod (radius_i + slack).

        The slack enters every factor so that a point failing all of the
        circuit's disks (with the same slack) can never pass here.
        """
        z = np.asarray(z)
        lhs = np.ones(z.shape)
        for c in self.centers:
            lhs = lhs * np.abs(z - c)
        return lhs <= float(np.prod(np.asarray(self.radii) + slack))


@dataclass
class ContainmentReport:
    holds: bool
    samples: int
    in_brualdi: int
    violations: list[tuple[complex, float]] = field(default_factory=list)  # (z, distance outside G), worst first


# ── digraphs ─────────────────────────────────────────────────────────────────

def build_digraph(T: Tensor) -> TensorDigraph:
    """Arc (i, j) iff some a[i, i2..im] != 0 has j among i2..im and (i2..im) != (i..i)."""
    arcs: set[tuple[int, int]] = set()
    idx, _ = T.coords()
    for row in idx.tolist():
        i, tail = row[0], row[1:]
        if any(j != i for j in tail):
            arcs.update((i, j) for j in tail)
    return TensorDigraph(T.dim, frozenset(arcs))


def build_product_digraph(A: Tensor, B: Tensor, *, entry_cap: int | None = None) -> TensorDigraph:
    """Digraph of AB read off the nonzero patterns of A and B.

    An entry c[i, α1..α_{m-1}] of AB is a sum of products
    a[i, i2..im] b[i2, α1] ... b[im, α_{m-1}]; for nonnegative factors it is
    nonzero iff one such product is. With signed or complex factors terms can
    cancel, so AB is materialized when it fits and the pattern estimate (a
    superset of the true arcs) is used otherwise.
    """
    shape = ProductShape.of(A, B)
    if not (A.nonneg and B.nonneg):
        settings = get_settings()
        cap = entry_cap if entry_cap is not None else settings.TENSOR_ENTRY_CAP
        if shape.result_size <= cap:
            return build_digraph(general_product(A, B, entry_cap=cap))
        logger.warning(
            "product of order %d too large to materialize; using the superset arc estimate",
            shape.result_order,
        )
        return _pattern_digraph(A, B, exact=False)
    return _pattern_digraph(A, B, exact=True)


def _pattern_digraph(A: Tensor, B: Tensor, *, exact: bool) -> TensorDigraph:
    n = A.dim
    if B.order == 1:
        # AB is a vector; nothing has a tail
        return TensorDigraph(n, frozenset(), exact)

    # tails of B's nonzero entries, per row
    tails: dict[int, set[tuple[int, ...]]] = defaultdict(set)
    idx_b, _ = B.coords()
    for row in idx_b.tolist():
        tails[row[0]].add(tuple(row[1:]))

    # per (row r of B, vertex i): indices seen in tails other than (i..i), and
    # whether the all-i tail occurs
    def reach(r: int, i: int) -> tuple[set[int], bool, bool]:
        all_i = (i,) * (B.order - 1)
        seen: set[int] = set()
        has_other = False
        for t in tails[r]:
            if t != all_i:
                has_other = True
                seen.update(t)
        return seen, all_i in tails[r], has_other

    cache: dict[tuple[int, int], tuple[set[int], bool, bool]] = {}
    arcs: set[tuple[int, int]] = set()
    idx_a, _ = A.coords()
    for row in idx_a.tolist():
        i, slots = row[0], row[1:]
        if any(not tails[r] for r in slots):
            continue
        info = []
        for r in slots:
            if (r, i) not in cache:
                cache[(r, i)] = reach(r, i)
            info.append(cache[(r, i)])
        for seen, _, _ in info:
            arcs.update((i, j) for j in seen)
        # i itself appears through an all-i tail when another slot breaks the all-i pattern
        for s, t in itertools.permutations(range(len(info)), 2):
            if info[s][1] and info[t][2]:
                arcs.add((i, i))
                break
    return TensorDigraph(n, frozenset(arcs), exact)


def vertices_off_circuits(G: TensorDigraph) -> list[int]:
    """Vertices lying on no circuit: no self-loop and a singleton SCC."""
    on = set()
    for comp in nx.strongly_connected_components(G.to_networkx()):
        if len(comp) >= 2:
            on.update(comp)
    on.update(i for i, j in G.arcs if i == j)
    return [v for v in range(G.n) if v not in on]


def is_weakly_connected(G: TensorDigraph) -> bool:
    """Every vertex lies on some circuit."""
    return not vertices_off_circuits(G)


def enumerate_circuits(G: TensorDigraph, cap: int | None = None) -> list[Circuit]:
    cap = cap if cap is not None else get_settings().CIRCUIT_CAP
    if cap <= 0:
        raise PreconditionError(f"circuit cap must be positive, got {cap}")
    seen: set[tuple[int, ...]] = set()
    for cycle in nx.simple_cycles(G.to_networkx()):
        k = cycle.index(min(cycle))
        seen.add(tuple(cycle[k:] + cycle[:k]))
        if len(seen) > cap:
            raise ResourceCapError(f"more than {cap} circuits; the Brualdi set is impractical here")
    logger.debug("%d circuits on %d vertices", len(seen), G.n)
    return [Circuit(c) for c in sorted(seen, key=lambda c: (len(c), c))]


def weakly_irreducible_standard(A: Tensor) -> bool:
    """Representation digraph (i -> j when j occurs in a nonzero a[i, ...]) is strongly connected."""
    G = nx.DiGraph()
    G.add_nodes_from(range(A.dim))
    idx, _ = A.coords()
    for row in idx.tolist():
        G.add_edges_from((row[0], j) for j in row[1:] if j != row[0])
    return nx.is_strongly_connected(G)


def weakly_irreducible_paper(A: Tensor) -> bool:
    """Every nonempty proper I has a nonzero a[i1..im] with i1 in I and all of i2..im outside I.

    This is the stronger reading of the definition; for matrices both coincide.
    """
    n = A.dim
    if n > SUBSET_TEST_MAX_N:
        raise ResourceCapError(f"subset test refused for n = {n} > {SUBSET_TEST_MAX_N}")
    idx, _ = A.coords()
    heads = idx[:, 0]
    tail_masks = np.zeros(len(idx), dtype=np.int64)
    for col in idx[:, 1:].T:
        tail_masks |= np.left_shift(1, col)
    for I in range(1, 2 ** n - 1):
        head_in = (np.right_shift(I, heads) & 1) == 1
        tail_out = (tail_masks & I) == 0
        if not np.any(head_in & tail_out):
            return False
    return True


# ── inclusion sets ───────────────────────────────────────────────────────────

def gershgorin_regions(A: Tensor, B: Tensor) -> list[Disk]:
    centers = product_diagonal(A, B)
    bound = product_row_sum_bound(A, B)
    radii = bound - np.abs(centers)
    scale = max(1.0, float(np.max(bound)) if len(bound) else 1.0)
    if np.any(radii < -1e-9 * scale):
        i = int(np.argmin(radii))
        raise InvariantError(f"negative Gershgorin radius {radii[i]} in row {i + 1}")
    radii = np.maximum(radii, 0.0)
    return [Disk(complex(c), float(r), i) for i, (c, r) in enumerate(zip(centers, radii))]


def tensor_gershgorin_regions(A: Tensor) -> list[Disk]:
    """Disks |z - a_{i..i}| <= r_i(A) - |a_{i..i}| of a single tensor."""
    return gershgorin_regions(A, Tensor.identity(2, A.dim))


def brualdi_regions(
    A: Tensor,
    B: Tensor,
    cap: int | None = None,
    *,
    disks: Sequence[Disk] | None = None,
    digraph: TensorDigraph | None = None,
) -> list[CircuitRegion]:
    settings = get_settings()
    disks = list(disks) if disks is not None else gershgorin_regions(A, B)
    if A.dim == 1:
        # a single vertex has no arcs; its region is its own disk
        return [CircuitRegion(Circuit((0,)), (disks[0].center,), (disks[0].radius,))]
    G = digraph if digraph is not None else build_product_digraph(A, B)
    off = vertices_off_circuits(G)
    if off:
        raise PreconditionError(f"vertex {off[0] + 1} lies on no circuit")
    if G.n > settings.BRUALDI_MAX_DENSE_N and len(G.arcs) >= G.n * (G.n - 1) // 2:
        raise ResourceCapError(
            f"Brualdi set refused for a dense digraph on {G.n} > {settings.BRUALDI_MAX_DENSE_N} vertices"
        )
    regions = []
    for circuit in enumerate_circuits(G, cap):
        regions.append(CircuitRegion(
            circuit=circuit,
            centers=tuple(disks[v].center for v in circuit.vertices),
            radii=tuple(disks[v].radius for v in circuit.vertices),
        ))
    return regions


def region_contains(regions: Sequence[Disk | CircuitRegion], z, slack: float | None = None):
    """Whether z lies in the union of the regions; z may be an array of points."""
    slack = slack if slack is not None else get_settings().INCLUSION_SLACK
    z = np.asarray(z, dtype=complex)
    hit = np.zeros(z.shape, dtype=bool)
    for region in regions:
        hit |= region.contains(z, slack)
    return bool(hit) if hit.ndim == 0 else hit


def bounding_box(disks: Sequence[Disk]) -> tuple[float, float, float, float]:
    """(re_min, re_max, im_min, im_max) of the union of disks."""
    re = [d.center.real for d in disks]
    im = [d.center.imag for d in disks]
    r = [d.radius for d in disks]
    return (
        min(c - s for c, s in zip(re, r)),
        max(c + s for c, s in zip(re, r)),
        min(c - s for c, s in zip(im, r)),
        max(c + s for c, s in zip(im, r)),
    )


def check_containment_B_in_G(
    A: Tensor,
    B: Tensor,
    grid: int | tuple[int, int] = 200,
    *,
    cap: int | None = None,
    max_report: int = 10,
) -> ContainmentReport:
    """Sample the bounding box of G and check every Brualdi point is also in G."""
    disks = gershgorin_regions(A, B)
    regions = brualdi_regions(A, B, cap, disks=disks)
    nx_, ny = (grid, grid) if isinstance(grid, int) else grid
    x0, x1, y0, y1 = bounding_box(disks)
    xs = np.linspace(x0, x1, nx_) if x1 > x0 else np.array([x0])
    ys = np.linspace(y0, y1, ny) if y1 > y0 else np.array([y0])
    Z = xs[None, :] + 1j * ys[:, None]
    # include the centers so degenerate (zero-radius) sets are exercised
    pts = np.concatenate([Z.ravel(), np.array([d.center for d in disks])])

    in_b = region_contains(regions, pts)
    in_g = region_contains(disks, pts)
    bad = np.flatnonzero(in_b & ~in_g)
    violations = []
    if len(bad):
        outside = np.min(
            [np.abs(pts[bad] - d.center) - d.radius for d in disks], axis=0
        )
        order = np.argsort(-outside)[:max_report]
        violations = [(complex(pts[bad][k]), float(outside[k])) for k in order]
        logger.warning("%d sampled points lie in the Brualdi set but outside G", len(bad))
    return ContainmentReport(
        holds=not len(bad),
        samples=len(pts),
        in_brualdi=int(in_b.sum()),
        violations=violations,
    )
