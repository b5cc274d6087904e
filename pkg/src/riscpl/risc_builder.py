"""Assembling the interlevel-set cohomology module of a PL function.

Every sample of a strip grid is sent by the appropriate power of the
automorphism T into the fundamental band, where its value is the relative
cohomology of the open models of the attached pair of open sets.  Maps
within a tile are restriction-induced; maps across a tile boundary are the
Mayer-Vietoris connecting maps of the rectangle triads.  On top of the
resulting GridModule sit the diagram, its region classification, the
levelset barcode and the fiberwise dimension check.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .exact_geometry import (
    Coord,
    INF,
    NEG_INF,
    RealOpenSet,
    StripPoint,
    beta_levelset,
    classify_region,
    in_diag_downset,
    rho,
    strip_location,
    t_power,
    tile_index,
)
from .field_linalg import Mat
from .plc import (
    CohomBasis,
    LevelGrid,
    PLComplex,
    induced_map,
    mv_connecting,
    open_model,
    relative_cohomology,
    split_all,
)
from .strip_module import Diagram, DiagramPoint, GridModule, dgm, refine_lines

DEFAULT_TRANSLATES = (-3, 3)
DEFAULT_CAP = 20000


@dataclass
class RiscResult:
    module: GridModule
    diagram: Diagram
    grid: LevelGrid
    max_degree: int
    split: PLComplex
    func: int = 0


def build_lines(critical, kmin: int = DEFAULT_TRANSLATES[0],
                kmax: int = DEFAULT_TRANSLATES[1]) -> List[Coord]:
    """The grid lines: every critical value and its negative on every
    translate in the window, together with the half-pi lines.  The family is
    closed under negation and under shifts, hence the sample grid is closed
    under T."""
    if isinstance(critical, LevelGrid):
        critical = critical.critical
    out = {Coord(kmin - 1, INF)}
    for k in range(kmin, kmax + 1):
        out.add(Coord(k, INF))
        for lam in critical:
            out.add(Coord(k, Fraction(lam)))
            out.add(Coord(k, Fraction(-lam)))
    return sorted(out)


def split_levels(xs) -> List[Fraction]:
    """Levels the complex must be split at so that every open set handed to
    the model builder has split endpoints and contains a split level whenever
    its preimage is nonempty: all finite grid values plus midpoints of
    consecutive ones."""
    vals = sorted({x.v for x in xs if isinstance(x.v, Fraction)})
    out = list(vals)
    for a, b in zip(vals, vals[1:]):
        out.append((a + b) / 2)
    return sorted(out)


def build_grid(k: PLComplex, func: int = 0,
               kmin: int = DEFAULT_TRANSLATES[0],
               kmax: int = DEFAULT_TRANSLATES[1]) -> Tuple[Tuple[Coord, ...], Tuple[Coord, ...]]:
    """The refined sample coordinates for a complex (empty complex gives an
    empty grid)."""
    if not k.values:
        return (), ()
    grid = LevelGrid.from_values(x[func] for x in k.values.values())
    xs = refine_lines(build_lines(grid, kmin, kmax))
    return xs, xs


class FunctorEvaluator:
    """Evaluates the pair-cohomology functor of one PL function on a split
    complex, with caching keyed by the open models so that the cell
    constancy of the functor is exploited."""

    def __init__(self, split: PLComplex, func: int = 0, p: int = 2):
        self.split = split
        self.func = func
        self.p = p
        self._models: Dict[RealOpenSet, frozenset] = {}
        self._points: Dict[tuple, tuple] = {}
        self._bases: Dict[tuple, CohomBasis] = {}
        self._induced: Dict[tuple, Mat] = {}
        self._connecting: Dict[tuple, Mat] = {}

    def model(self, u: RealOpenSet) -> frozenset:
        out = self._models.get(u)
        if out is None:
            out = open_model(self.split, u, self.func)
            self._models[u] = out
        return out

    def pair_at(self, w: StripPoint) -> Tuple[frozenset, frozenset]:
        """Open models of the pair attached to a point of the fundamental
        band."""
        rho1, rho0 = rho(w)
        a = self.model(rho1)
        b = self.model(rho0.intersect(rho1))
        return a, b

    def basis(self, a: frozenset, b: frozenset, n: int) -> CohomBasis:
        key = (n, a, b)
        out = self._bases.get(key)
        if out is None:
            out = relative_cohomology(a, b, n, self.p)
            self._bases[key] = out
        return out

    def basis_at(self, w: StripPoint, n: int) -> CohomBasis:
        a, b = self.pair_at(w)
        return self.basis(a, b, n)

    def inclusion(self, src: CohomBasis, dst: CohomBasis) -> Mat:
        key = ("inc", src.degree, id(src), id(dst))
        out = self._induced.get(key)
        if out is None:
            out = induced_map(src, dst)
            self._induced[key] = out
        return out

    def connecting(self, u: StripPoint, w: StripPoint, n: int) -> Mat:
        """Mayer-Vietoris connecting map of the rectangle triad spanned by
        u (the intersection corner) and w (the union corner) inside the
        fundamental band."""
        v1 = StripPoint(u.x, w.y)
        v2 = StripPoint(w.x, u.y)
        pw = self.pair_at(w)
        p1 = self.pair_at(v1)
        p2 = self.pair_at(v2)
        pu = self.pair_at(u)
        key = ("con", n, pw, p1, p2, pu)
        out = self._connecting.get(key)
        if out is None:
            out = mv_connecting(
                pw, p1, p2, pu, n, self.p,
                src=self.basis(*pu, n), dst=self.basis(*pw, n + 1),
            )
            self._connecting[key] = out
        return out


def point_data(ev: FunctorEvaluator, pt: StripPoint,
               max_degree: int) -> Tuple[int, Optional[int], Optional[CohomBasis]]:
    """Dimension, tile index and basis of the evaluated functor at one strip
    point (dimension 0 with no basis outside the supported range)."""
    key = (pt, max_degree)
    out = ev._points.get(key)
    if out is not None:
        return out
    if strip_location(pt) != "interior":
        out = (0, None, None)
    else:
        n = tile_index(pt)
        if n < 0 or n > max_degree:
            out = (0, n, None)
        else:
            basis = ev.basis_at(t_power(pt, n), n)
            out = (basis.dim, n, basis)
    ev._points[key] = out
    return out


def internal_map(ev: FunctorEvaluator, lo: StripPoint, hi: StripPoint,
                 max_degree: int) -> Mat:
    """Matrix of the structure map from the value at hi to the value at lo
    for any comparable pair lo below hi.  Same tile: restriction-induced.
    One tile apart with hi below T(lo): connecting map.  Further apart: the
    map factors through a vanishing value, hence zero."""
    if not lo.precedes(hi):
        raise ValueError("points are not comparable in the given order")
    d_lo, n_lo, b_lo = point_data(ev, lo, max_degree)
    d_hi, n_hi, b_hi = point_data(ev, hi, max_degree)
    if d_lo == 0 or d_hi == 0:
        return Mat.zeros(d_lo, d_hi, ev.p)
    if n_lo == n_hi:
        return ev.inclusion(b_hi, b_lo)
    if n_lo == n_hi + 1:
        u = t_power(hi, n_hi)
        w = t_power(lo, n_lo)
        if u.precedes(w):
            return ev.connecting(u, w, n_hi)
    return Mat.zeros(d_lo, d_hi, ev.p)


def assemble_module(ev: FunctorEvaluator, xs: Tuple[Coord, ...],
                    max_degree: int, transform=None) -> GridModule:
    """Evaluate the functor on every sample of a grid, optionally after a
    pointwise order-preserving transform of the samples, and assemble the
    grid module of values and covering-pair structure maps."""
    p = ev.p
    shell = GridModule(xs, xs, {}, {}, p)
    dims: Dict[Tuple[int, int], int] = {}
    tiles: Dict[Tuple[int, int], int] = {}
    bases: Dict[Tuple[int, int], CohomBasis] = {}
    pts: Dict[Tuple[int, int], StripPoint] = {}
    for idx in shell.samples():
        pt = shell.point(idx)
        if transform is not None:
            pt = transform(pt)
        pts[idx] = pt
        d, n, basis = point_data(ev, pt, max_degree)
        dims[idx] = d
        if n is not None:
            tiles[idx] = n
        if basis is not None:
            bases[idx] = basis

    maps: Dict[Tuple[Tuple[int, int], Tuple[int, int]], Mat] = {}
    for idx, d in dims.items():
        i, j = idx
        for up in ((i - 1, j), (i, j + 1)):
            if up not in dims:
                continue
            if d == 0 or dims[up] == 0:
                maps[(idx, up)] = Mat.zeros(d, dims[up], p)
                continue
            n_lo, n_up = tiles[idx], tiles[up]
            if n_lo == n_up:
                maps[(idx, up)] = ev.inclusion(bases[up], bases[idx])
            elif n_lo == n_up + 1:
                u = t_power(pts[up], n_up)
                w = t_power(pts[idx], n_lo)
                maps[(idx, up)] = ev.connecting(u, w, n_up)
            else:
                raise AssertionError(
                    f"adjacent samples {idx}, {up} differ by {n_lo - n_up} tiles"
                )
    return GridModule(xs, xs, dims, maps, p, tiles)


def evaluate(k: PLComplex, func: int = 0, p: int = 2,
             kmin: int = DEFAULT_TRANSLATES[0],
             kmax: int = DEFAULT_TRANSLATES[1],
             cap: int = DEFAULT_CAP) -> RiscResult:
    """Compute the full interlevel-set cohomology module of a PL function
    together with its classified diagram."""
    if not k.values:
        empty = GridModule((), (), {}, {}, p)
        return RiscResult(empty, Diagram(), LevelGrid((), ()), 0, k, func)
    grid = LevelGrid.from_values(x[func] for x in k.values.values())
    xs, _ = build_grid(k, func, kmin, kmax)
    split = split_all(k, split_levels(xs), funcs=[func], cap=cap)
    ev = FunctorEvaluator(split, func, p)
    max_degree = split.dim() + 1
    module = assemble_module(ev, xs, max_degree)
    diagram = dgm(module)
    for d in diagram.points:
        n, region, pair = classify_region(d.point)
        d.degree = n
        d.region = region
        d.pair = pair
        d.interval = beta_levelset(d.point)
    return RiscResult(module, diagram, grid, max_degree, split, func)


def barcode(r: RiscResult) -> List[tuple]:
    """The levelset barcode: one (degree, typed interval, multiplicity)
    entry per diagram point."""
    out = []
    for d in r.diagram.points:
        deg, interval = d.interval
        out.append((deg, interval, d.multiplicity))
    out.sort(key=lambda t: (t[0], repr(t[1])))
    return out


def fiber_dimension_check(r: RiscResult, t) -> Optional[tuple]:
    """At a regular level t, the bars containing t must count the fiber
    cohomology dimensions degree by degree."""
    t = Fraction(t)
    if t in r.grid.critical:
        raise ValueError("t must be a regular value")
    lo = max((v for v in r.grid.critical if v < t), default=None)
    hi = min((v for v in r.grid.critical if v > t), default=None)
    u = RealOpenSet.make([(NEG_INF if lo is None else lo, INF if hi is None else hi)])
    fiber = open_model(r.split, u, r.func)
    top = r.split.dim()
    for n in range(top + 2):
        counted = sum(
            d.multiplicity
            for d in r.diagram.points
            if d.interval[0] == n and d.interval[1] is not None
            and d.interval[1].contains(t)
        )
        want = relative_cohomology(fiber, set(), n, r.module.p).dim
        if counted != want:
            return (t, n, counted, want)
    return None
