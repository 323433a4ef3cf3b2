"""Feature and edge-list ingestion, standardization, and synthetic datasets."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DataFormatError

__all__ = [
    "FeatureMatrix",
    "EdgeList",
    "load_features",
    "load_edge_list",
    "write_edge_list",
    "standardize",
    "synth_shapes",
]


@dataclass
class FeatureMatrix:
    """Dense n x d feature matrix with optional per-row integer class labels."""

    values: np.ndarray
    labels: np.ndarray | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2 or self.values.shape[0] < 1 or self.values.shape[1] < 1:
            raise ValueError(f"feature matrix must be 2-D and non-empty, got shape {self.values.shape}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("feature matrix contains non-finite values")
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=np.int64)
            if self.labels.shape != (self.values.shape[0],):
                raise ValueError(
                    f"labels length {self.labels.shape} does not match {self.values.shape[0]} rows"
                )

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]


@dataclass
class EdgeList:
    """Undirected weighted edge list over dense node ids 0..n-1.

    ``original_ids[i]`` is the id node ``i`` carried in the source file, so
    externally meaningful ids stay recoverable after the dense remap.
    """

    heads: np.ndarray
    tails: np.ndarray
    weights: np.ndarray
    node_count: int
    original_ids: np.ndarray = field(default=None)
    duplicates_merged: int = 0

    def __post_init__(self):
        self.heads = np.asarray(self.heads, dtype=np.int64)
        self.tails = np.asarray(self.tails, dtype=np.int64)
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if self.original_ids is None:
            self.original_ids = np.arange(self.node_count, dtype=np.int64)
        if not (len(self.heads) == len(self.tails) == len(self.weights)):
            raise ValueError("edge arrays must have equal length")
        if np.any(self.heads == self.tails):
            raise ValueError("self-loops are not allowed")
        if np.any(self.weights <= 0):
            raise ValueError("edge weights must be positive")

    @property
    def edge_count(self) -> int:
        return len(self.heads)

    def edges(self):
        """Iterate over (u, v, w) tuples in stored order."""
        for u, v, w in zip(self.heads, self.tails, self.weights):
            yield int(u), int(v), float(w)


def load_features(path, has_header: bool = False, label_column: int | None = None) -> FeatureMatrix:
    """Parse a CSV file of reals into a FeatureMatrix.

    ``label_column`` (may be negative, e.g. -1 for the last column) is
    extracted into integer labels and removed from the features.
    """
    rows = []
    labels = []
    width = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if has_header and lineno == 1:
                continue
            line = line.strip()
            if not line:
                continue
            cells = line.split(",")
            if width is None:
                width = len(cells)
                if label_column is not None:
                    lc = label_column if label_column >= 0 else width + label_column
                    if not 0 <= lc < width:
                        raise ValueError(f"label_column {label_column} out of range for {width} columns")
                    if width < 2:
                        raise DataFormatError(f"line {lineno}: need at least 2 columns to split off labels")
                else:
                    lc = None
            elif len(cells) != width:
                raise DataFormatError(f"line {lineno}: expected {width} columns, got {len(cells)}")
            try:
                values = [float(c) for c in cells]
            except ValueError:
                bad = next(c for c in cells if not _is_float(c))
                raise DataFormatError(f"line {lineno}: non-numeric cell {bad!r}") from None
            if not all(math.isfinite(v) for v in values):
                raise DataFormatError(f"line {lineno}: non-finite value")
            if lc is not None:
                lab = values.pop(lc)
                if lab != int(lab):
                    raise DataFormatError(f"line {lineno}: label {lab} is not an integer")
                labels.append(int(lab))
            rows.append(values)
    if not rows:
        raise DataFormatError(f"{path}: no data rows")
    X = np.array(rows, dtype=np.float64)
    return FeatureMatrix(X, np.array(labels, dtype=np.int64) if labels else None)


def _is_float(cell: str) -> bool:
    try:
        float(cell)
        return True
    except ValueError:
        return False


def load_edge_list(path) -> EdgeList:
    """Parse a whitespace-separated "u v [w]" edge file.

    Node ids are remapped densely in order of first appearance. Duplicate
    undirected pairs keep the first weight seen; the merge count is recorded
    on the result. Missing weights default to 1.0.
    """
    id_map: dict[int, int] = {}
    originals: list[int] = []
    seen: set[tuple[int, int]] = set()
    heads, tails, weights = [], [], []
    duplicates = 0
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) not in (2, 3):
                raise DataFormatError(f"line {lineno}: expected 'u v [w]', got {line!r}")
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise DataFormatError(f"line {lineno}: node ids must be integers") from None
            if u < 0 or v < 0:
                raise DataFormatError(f"line {lineno}: node ids must be non-negative")
            if u == v:
                raise DataFormatError(f"line {lineno}: self-loop on node {u}")
            w = 1.0
            if len(parts) == 3:
                try:
                    w = float(parts[2])
                except ValueError:
                    raise DataFormatError(f"line {lineno}: weight {parts[2]!r} is not a number") from None
                if not math.isfinite(w) or w <= 0:
                    raise DataFormatError(f"line {lineno}: weight must be a positive finite number")
            for node in (u, v):
                if node not in id_map:
                    id_map[node] = len(originals)
                    originals.append(node)
            du, dv = id_map[u], id_map[v]
            key = (min(du, dv), max(du, dv))
            if key in seen:
                duplicates += 1
                continue
            seen.add(key)
            heads.append(du)
            tails.append(dv)
            weights.append(w)
    if not heads:
        raise DataFormatError(f"{path}: no edges")
    return EdgeList(
        heads=np.array(heads),
        tails=np.array(tails),
        weights=np.array(weights),
        node_count=len(originals),
        original_ids=np.array(originals, dtype=np.int64),
        duplicates_merged=duplicates,
    )


def write_edge_list(edge_list: EdgeList, path) -> None:
    """Serialize an EdgeList as "u v w" lines using the dense node ids."""
    with open(path, "w", encoding="utf-8") as fh:
        for u, v, w in edge_list.edges():
            fh.write(f"{u} {v} {w!r}\n")


def standardize(fm: FeatureMatrix) -> FeatureMatrix:
    """Center each column to mean 0 and scale to sample standard deviation 1.

    Uses the n-1 divisor. Zero-variance columns end up all zero instead of
    raising. Idempotent up to floating-point roundoff.
    """
    if fm.n < 2:
        raise ValueError("standardize needs at least 2 rows")
    X = fm.values - fm.values.mean(axis=0)
    std = X.std(axis=0, ddof=1)
    nonzero = std > 0
    X[:, nonzero] /= std[nonzero]
    X[:, ~nonzero] = 0.0
    return FeatureMatrix(X, fm.labels)


# Vertical offset between the two half-circles.
_MOON_OFFSET = 0.5
# The moons are far enough apart that a k-NN union graph on them alone is
# disconnected; a short chain of bridge points spans the gap so commute
# times stay finite while the inter-cluster link stays weak. Station
# spacing shrinks with sample density: nearest-neighbor distances scale
# like n^-1/2, and hops that are fixed while the kernel bandwidth shrinks
# would turn near-zero weight and wreck the Laplacian's conditioning.
_MOON_BRIDGE_SPACING = 0.1
_MOON_REFERENCE_N = 1000


def _density_scale(n: int, reference: int) -> float:
    return min(1.0, math.sqrt(reference / max(n, 1)))

# 5x3 block glyphs for the ten letters of the mask phrase, top row first:
# solid blocks with one distinguishing bite each. Solid shapes are
# deliberate: thin strokes stretch into long snakes under commute distance
# (internal effective resistance grows with stroke length over width) and
# defeat k-means, while solid blocks stay tight. The bite never splits a
# glyph, so each point cloud is one k-NN component.
_GLYPHS = {
    "D": ("011", "111", "111", "111", "111"),
    "A": ("110", "111", "111", "111", "111"),
    "T": ("111", "101", "111", "111", "111"),
    "M": ("111", "111", "111", "011", "111"),
    "I": ("111", "111", "111", "110", "111"),
    "N": ("111", "111", "111", "111", "011"),
    "G": ("111", "111", "111", "111", "110"),
}
_MASK_PHRASE = "DATAMINING"
_GLYPH_COLS = 3
_GLYPH_ROWS = 5
_GLYPH_PITCH = 6.0  # letter origin spacing: 3 columns + 3 blank
# Station layout between adjacent glyphs: short hops near the letters keep
# the stations commute-close to their cluster, and one long central hop
# concentrates the inter-letter resistance so clusters stay far apart.
# Both lengths shrink with density for the same reason as the moon bridge.
_BRIDGE_STEP = 0.35
_BRIDGE_MID_GAP = 1.1
_MASK_REFERENCE_N = 2000


def synth_shapes(kind: str, n: int, noise: float = 0.05, seed: int = 0, centers: int = 3) -> FeatureMatrix:
    """Generate a labeled 2-D synthetic dataset.

    Kinds:
      two_moons  two interlocking half-circles joined by a short chain of
                 bridge points (2 clusters)
      blobs      ``centers`` isotropic Gaussians spaced 20 standard
                 deviations apart (noise is the per-blob deviation)
      text_mask  points filling ten block letters, plus sparse chains of
                 bridge points between adjacent letters (10 clusters)

    The bridge chains keep the k-NN union graph of the full point set
    connected, which the commute-time pipeline requires; they carry the
    label of the nearer cluster and are a vanishing fraction of n.

    Deterministic given (kind, n, noise, seed, centers).
    """
    if kind == "two_moons":
        implied_k = 2
    elif kind == "blobs":
        implied_k = centers
    elif kind == "text_mask":
        implied_k = len(_MASK_PHRASE)
    else:
        raise ValueError(f"unknown synthetic kind {kind!r}")
    if n < 2 * implied_k:
        raise ValueError(f"{kind} needs n >= {2 * implied_k}, got {n}")
    rng = np.random.default_rng(seed)
    if kind == "two_moons":
        return _moons(n, noise, rng)
    if kind == "blobs":
        return _blobs(n, noise, rng, centers)
    return _text_mask(n, noise, rng)


def synth_cluster_count(kind: str, centers: int = 3) -> int:
    """Number of ground-truth clusters a synthetic kind produces."""
    return {"two_moons": 2, "blobs": centers, "text_mask": len(_MASK_PHRASE)}[kind]


def _moons(n, noise, rng):
    # bridge chain from the upper moon's right tip (1, 0) straight down to
    # the lower moon's bottom (1, -offset)
    spacing = max(_MOON_BRIDGE_SPACING * _density_scale(n, _MOON_REFERENCE_N), 0.02)
    gap = np.arange(spacing, _MOON_OFFSET - 1e-9, spacing)
    bridge = np.column_stack([np.ones_like(gap), -gap])
    bridge_labels = (gap > _MOON_OFFSET / 2).astype(np.int64)
    n_arc = n - len(bridge)
    n_upper = n_arc // 2
    n_lower = n_arc - n_upper
    t_upper = rng.uniform(0.0, np.pi, n_upper)
    t_lower = rng.uniform(0.0, np.pi, n_lower)
    upper = np.column_stack([np.cos(t_upper), np.sin(t_upper)])
    lower = np.column_stack([1.0 - np.cos(t_lower), _MOON_OFFSET - np.sin(t_lower)])
    arcs = np.vstack([upper, lower])
    if noise > 0:
        arcs = arcs + rng.normal(0.0, noise, arcs.shape)
    # bridge points stay at their exact positions: they are connectivity
    # infrastructure, and jitter can snap a chain hop
    X = np.vstack([arcs, bridge])
    y = np.concatenate([
        np.zeros(n_upper, dtype=np.int64),
        np.ones(n_lower, dtype=np.int64),
        bridge_labels,
    ])
    return FeatureMatrix(X, y)


def _blobs(n, noise, rng, centers):
    if centers < 1:
        raise ValueError("blobs needs centers >= 1")
    sep = max(20.0 * noise, 1.0)
    if centers == 1:
        C = np.zeros((1, 2))
    else:
        radius = sep / (2.0 * np.sin(np.pi / centers))
        angles = 2.0 * np.pi * np.arange(centers) / centers
        C = radius * np.column_stack([np.cos(angles), np.sin(angles)])
    y = np.arange(n, dtype=np.int64) % centers
    y.sort()
    X = C[y]
    if noise > 0:
        X = X + rng.normal(0.0, noise, X.shape)
    return FeatureMatrix(X, y)


def _glyph_pixels(index: int) -> np.ndarray:
    """(row, col) pairs of set pixels for letter ``index`` of the phrase."""
    rows = _GLYPHS[_MASK_PHRASE[index]]
    return np.array(
        [(r, c) for r in range(_GLYPH_ROWS) for c in range(_GLYPH_COLS) if rows[r][c] == "1"],
        dtype=np.int64,
    )


def _pixel_center(letter: int, r: int, c: int) -> np.ndarray:
    x = letter * _GLYPH_PITCH + c + 0.5
    y = (_GLYPH_ROWS - 1 - r) + 0.5
    return np.array([x, y])


def _bridge_anchors(letter: int, side: str) -> np.ndarray:
    """Pixel center on a glyph's extreme column, nearest to mid height."""
    pixels = _glyph_pixels(letter)
    col = pixels[:, 1].max() if side == "right" else pixels[:, 1].min()
    candidates = pixels[pixels[:, 1] == col]
    mid = (_GLYPH_ROWS - 1) / 2.0
    r = candidates[np.argmin(np.abs(candidates[:, 0] - mid), axis=0)][0]
    return _pixel_center(letter, r, col)


def _text_mask(n, noise, rng):
    k = len(_MASK_PHRASE)
    # Bridge chains between consecutive letters keep the point cloud's k-NN
    # graph in one component; each chain point takes the label of the
    # nearer endpoint letter.
    scale = _density_scale(n, _MASK_REFERENCE_N)
    step = max(_BRIDGE_STEP * scale, 0.05)
    mid_gap = max(_BRIDGE_MID_GAP * scale, 0.3)
    bridge_xy, bridge_lab = [], []
    for g in range(k - 1):
        a = _bridge_anchors(g, "right")
        b = _bridge_anchors(g + 1, "left")
        span = float(np.linalg.norm(b - a))
        direction = (b - a) / span
        stub = max(1, math.ceil((span - mid_gap) / 2.0 / step))
        for j in range(1, stub + 1):
            reach = j * (span - mid_gap) / 2.0 / stub
            bridge_xy.append(a + reach * direction)
            bridge_lab.append(g)
            bridge_xy.append(b - reach * direction)
            bridge_lab.append(g + 1)
    max_bridges = max(0, n - 2 * k) // 4
    if len(bridge_xy) > max_bridges:
        keep = np.linspace(0, len(bridge_xy) - 1, max_bridges).astype(int) if max_bridges else []
        bridge_xy = [bridge_xy[i] for i in keep]
        bridge_lab = [bridge_lab[i] for i in keep]
    n_letters = n - len(bridge_xy)

    xs, labs = [], []
    quota, extra = divmod(n_letters, k)
    for g in range(k):
        count = quota + (1 if g < extra else 0)
        pixels = _glyph_pixels(g)
        choice = rng.integers(0, len(pixels), size=count)
        offs = rng.uniform(0.0, 1.0, size=(count, 2))
        r = pixels[choice, 0]
        c = pixels[choice, 1]
        x = g * _GLYPH_PITCH + c + offs[:, 0]
        y = (_GLYPH_ROWS - 1 - r) + offs[:, 1]
        xs.append(np.column_stack([x, y]))
        labs.append(np.full(count, g, dtype=np.int64))
    letters = np.vstack(xs)
    if noise > 0:
        letters = letters + rng.normal(0.0, noise, letters.shape)
    # bridge chains stay unjittered; see _moons
    X = np.vstack([letters, np.array(bridge_xy).reshape(-1, 2)])
    y = np.concatenate(labs + [np.array(bridge_lab, dtype=np.int64)])
    return FeatureMatrix(X, y)
