"""Shift distances, shifted modules and morphisms between them.

The two-valued distance of a pair of PL functions on one complex determines
a shift under which the second function's module maps naturally to the
first's.  The per-sample matrices of this transformation come in two kinds,
decided by exact geometry: where the shifted point stays in the fundamental
band the map is induced by an inclusion of open model pairs, and where it
crosses into the next band the map is the Mayer-Vietoris connecting
differential of an interpolating pair of open sets on the rectangle between
the point and its glide-reflection preimage.  On top of this sit the
interleaving and composition checkers, and the contravariant morphisms
induced by simplicial maps over the reals.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .exact_geometry import (
    Coord,
    ShiftVector,
    StripPoint,
    alpha_apply,
    in_fundamental_domain,
    omega_apply,
    rho,
    t_inverse,
    t_power,
)
from .field_linalg import Mat
from .plc import (
    PLComplex,
    _fresh_vid,
    induced_map,
    mv_connecting,
    split_all,
    vkey,
)
from .risc_builder import (
    DEFAULT_CAP,
    DEFAULT_TRANSLATES,
    FunctorEvaluator,
    RiscResult,
    assemble_module,
    build_lines,
    internal_map,
    point_data,
)
from .strip_module import GridModule, refine_lines

Index = Tuple[int, int]


# ---------------------------------------------------------------------------
# the two-valued distance


def distance_pair(k: PLComplex, f: int = 0, g: int = 1) -> ShiftVector:
    """The pair (inf(g - f), sup(g - f)); a PL difference attains both
    extremes at vertices."""
    diffs = [k.value(v, g) - k.value(v, f) for v in k.values]
    if not diffs:
        return ShiftVector(0, 0)
    return ShiftVector(min(diffs), max(diffs))


def sup_norm(k: PLComplex, f: int = 0, g: int = 1) -> Fraction:
    """The sup norm of g - f."""
    a = distance_pair(k, f, g)
    return max(abs(a.a1), abs(a.a2))


# ---------------------------------------------------------------------------
# joint splitting for several functions and shift amounts


def shift_closure(amounts) -> List[Fraction]:
    out = {Fraction(0)}
    for s in amounts:
        s = Fraction(s)
        out.add(s)
        out.add(-s)
    return sorted(out)


def joint_levels(xs: Sequence[Coord], shifts) -> List[Fraction]:
    """Split levels covering every finite grid value moved by every shift
    amount and its negative, plus midpoints of consecutive values, so that
    all open sets met during shifted evaluation have split endpoints and
    contain a split level whenever their preimage is nonempty."""
    base = sorted({x.v for x in xs if isinstance(x.v, Fraction)})
    vals = sorted({v + s for v in base for s in shift_closure(shifts)})
    out = list(vals)
    for a, b in zip(vals, vals[1:]):
        out.append((a + b) / 2)
    return sorted(out)


@dataclass
class JointContext:
    """A complex split finely enough to evaluate several of its functions
    at shifted sample points, with one cached evaluator per function."""

    complex: PLComplex
    split: PLComplex
    p: int
    xs: Tuple[Coord, ...]
    max_degree: int
    evaluators: Dict[int, FunctorEvaluator]

    def evaluator(self, func: int) -> FunctorEvaluator:
        return self.evaluators[func]


def joint_context(k: PLComplex, funcs: Sequence[int] = (0, 1), shifts=(),
                  p: int = 2,
                  kmin: int = DEFAULT_TRANSLATES[0],
                  kmax: int = DEFAULT_TRANSLATES[1],
                  cap: int = DEFAULT_CAP,
                  critical=None, trace=None) -> JointContext:
    """Build the shared sample grid and the jointly split complex for the
    given functions and shift amounts."""
    funcs = sorted(set(funcs))
    if critical is None:
        critical = {k.value(v, func) for v in k.values for func in funcs}
    critical = sorted({Fraction(c) for c in critical})
    xs = refine_lines(build_lines(critical, kmin, kmax))
    split = split_all(k, joint_levels(xs, shifts), funcs=funcs, cap=cap,
                      trace=trace)
    max_degree = split.dim() + 1
    evs = {func: FunctorEvaluator(split, func, p) for func in funcs}
    return JointContext(k, split, p, xs, max_degree, evs)


def context_module(ctx: JointContext, func: int,
                   a: Optional[ShiftVector] = None) -> GridModule:
    """The module of one function over the shared grid, optionally pulled
    back along a shift."""
    transform = None if a is None else (lambda q: alpha_apply(a, q))
    return assemble_module(ctx.evaluator(func), ctx.xs, ctx.max_degree,
                           transform=transform)


def shifted_module(r: RiscResult, a: ShiftVector,
                   samples: Optional[Tuple[Coord, ...]] = None,
                   cap: int = DEFAULT_CAP) -> GridModule:
    """Pullback of an evaluated module along the shift action.  The split
    complex is refined further so the shifted evaluation points are
    covered."""
    a = ShiftVector(a.a1, a.a2) if isinstance(a, ShiftVector) else ShiftVector(*a)
    xs = r.module.xs if samples is None else samples
    split = split_all(r.split, joint_levels(xs, (a.a1, a.a2)),
                      funcs=[r.func], cap=cap)
    ev = FunctorEvaluator(split, r.func, r.module.p)
    return assemble_module(ev, xs, split.dim() + 1,
                           transform=lambda q: alpha_apply(a, q))


# ---------------------------------------------------------------------------
# the stability transformation, one sample at a time


class Transformation:
    """Per-sample matrices of the natural transformation from the shifted
    module of g to the module of f, for one fixed shift dominating g - f.

    At a sample whose shifted image stays in the fundamental band the
    matrix is induced by the inclusion of the f open-model pair into the
    shifted g open-model pair.  Where the shifted image crosses into the
    previous band, the matrix is the connecting differential of the
    interpolating pair on the rectangle spanned by the band representative
    and its glide-reflection preimage."""

    def __init__(self, ev_f: FunctorEvaluator, ev_g: FunctorEvaluator,
                 a: ShiftVector, max_degree: int):
        if ev_f.p != ev_g.p:
            raise ValueError("field mismatch")
        self.ev_f = ev_f
        self.ev_g = ev_g
        self.a = a
        self.max_degree = max_degree
        self.p = ev_f.p
        self._by_point: Dict[StripPoint, Mat] = {}
        self._by_model: Dict[tuple, Mat] = {}

    def at(self, pt: StripPoint) -> Mat:
        out = self._by_point.get(pt)
        if out is None:
            out = self._compute(pt)
            self._by_point[pt] = out
        return out

    def _interp_pair(self, c: StripPoint) -> Tuple[frozenset, frozenset]:
        """The interpolating pair at a rectangle corner: ambient from the
        shifted g preimage of the first attached set, subspace cut out by
        the f preimage of the second."""
        rho1g, _ = rho(alpha_apply(self.a, c))
        _, rho0f = rho(c)
        amb = self.ev_g.model(rho1g)
        return amb, amb & self.ev_f.model(rho0f)

    def _compute(self, pt: StripPoint) -> Mat:
        d_dst, n, _ = point_data(self.ev_f, pt, self.max_degree)
        apt = alpha_apply(self.a, pt)
        d_src, _, _ = point_data(self.ev_g, apt, self.max_degree)
        if d_dst == 0 or d_src == 0:
            return Mat.zeros(d_dst, d_src, self.p)
        u = t_power(pt, n)
        au = alpha_apply(self.a, u)
        if in_fundamental_domain(au):
            pair_f = self.ev_f.pair_at(u)
            pair_g = self.ev_g.pair_at(au)
            key = ("inc", n, pair_f, pair_g)
            out = self._by_model.get(key)
            if out is None:
                if not (pair_f[0] <= pair_g[0] and pair_f[1] <= pair_g[1]):
                    raise ValueError(
                        "open-model pair inclusion fails; the shift does not "
                        "dominate the difference of the functions"
                    )
                out = induced_map(self.ev_g.basis(*pair_g, n),
                                  self.ev_f.basis(*pair_f, n))
                self._by_model[key] = out
            return out
        m = t_inverse(u)
        if not in_fundamental_domain(t_inverse(au)):
            raise ValueError(
                "shifted sample lies more than one band away; "
                "the joint grid is insufficient for this shift"
            )
        v1 = StripPoint(m.x, u.y)
        v2 = StripPoint(u.x, m.y)
        xi_w = self._interp_pair(u)
        xi_1 = self._interp_pair(v1)
        xi_2 = self._interp_pair(v2)
        xi_m = self._interp_pair(m)
        if xi_w != self.ev_f.pair_at(u):
            raise ValueError(
                "interpolating pair differs from the f pair at the band "
                "representative; construction regions do not glue here"
            )
        if xi_m != self.ev_g.pair_at(alpha_apply(self.a, m)):
            raise ValueError(
                "interpolating pair differs from the shifted g pair at the "
                "reflected corner; construction regions do not glue here"
            )
        key = ("con", n, xi_w, xi_1, xi_2, xi_m)
        out = self._by_model.get(key)
        if out is None:
            out = mv_connecting(
                xi_w, xi_1, xi_2, xi_m, n - 1, self.p,
                src=self.ev_g.basis(*xi_m, n - 1),
                dst=self.ev_f.basis(*xi_w, n),
            )
            self._by_model[key] = out
        return out


@dataclass
class MorphismData:
    """A morphism of grid modules over a shared sample set: the source is
    the (possibly shifted) module being mapped, the target receives it, and
    per_sample holds one matrix per sample."""

    source: GridModule
    target: GridModule
    per_sample: Dict[Index, Mat]
    shift: ShiftVector


def naturality_check(md: MorphismData) -> Optional[tuple]:
    """All squares of per-sample matrices against the internal maps of
    source and target must commute; returns a counterexample pair of sample
    indices or None."""
    src, dst = md.source, md.target
    for idx in dst.samples():
        i, j = idx
        for up in ((i - 1, j), (i, j + 1)):
            if up not in md.per_sample:
                continue
            lhs = dst.map_at(idx, up) @ md.per_sample[up]
            rhs = md.per_sample[idx] @ src.map_at(idx, up)
            if lhs != rhs:
                return (idx, up)
    return None


def build_transformation(ctx: JointContext, f: int = 0, g: int = 1,
                         a: Optional[ShiftVector] = None) -> MorphismData:
    """The natural transformation from the a-shifted module of g to the
    module of f over the shared grid; a defaults to the distance pair."""
    if a is None:
        a = distance_pair(ctx.complex, f, g)
    ev_f, ev_g = ctx.evaluator(f), ctx.evaluator(g)
    target = context_module(ctx, f)
    source = context_module(ctx, g, a)
    trans = Transformation(ev_f, ev_g, a, ctx.max_degree)
    per_sample = {idx: trans.at(target.point(idx)) for idx in target.samples()}
    return MorphismData(source, target, per_sample, a)


# ---------------------------------------------------------------------------
# interleaving


def period_samples(shell: GridModule):
    """Samples in one x-translate period of the grid.  The evaluated
    functors are strictly periodic under the square of the glide
    reflection, which shifts the x translate index by two, so the samples
    with x translate -1 or 0 meet every periodicity orbit and per-sample
    identities checked there hold at every sample."""
    for idx in shell.samples():
        if shell.point(idx).x.k in (-1, 0):
            yield idx


def _report(delta, ok, counterexample=None, witness=None) -> dict:
    out = {"delta": delta, "ok": ok}
    if counterexample is not None:
        out["counterexample"] = counterexample
    if witness is not None:
        out["witness"] = witness
    return out


def interleaving_check(k: PLComplex, f: int = 0, g: int = 1, delta=None,
                       p: int = 2,
                       kmin: int = DEFAULT_TRANSLATES[0],
                       kmax: int = DEFAULT_TRANSLATES[1],
                       cap: int = DEFAULT_CAP) -> dict:
    """Build the two interleaving transformations for the given parameter
    (default: the sup norm of g - f) and verify both triangle identities
    against the internal superlinear-shift maps at every sample."""
    a = distance_pair(k, f, g)
    delta = sup_norm(k, f, g) if delta is None else Fraction(delta)
    if not a.precedes(ShiftVector(-delta, delta)):
        raise ValueError("delta is smaller than the sup norm of g - f")
    a_rev = ShiftVector(-a.a2, -a.a1)
    shifts = [a.a1, a.a2, delta, 2 * delta,
              a.a1 - delta, a.a2 + delta, a.a1 + delta, a.a2 - delta]
    ctx = joint_context(k, [f, g], shifts, p, kmin, kmax, cap)
    ev_f, ev_g = ctx.evaluator(f), ctx.evaluator(g)
    fwd = Transformation(ev_f, ev_g, a, ctx.max_degree)
    bwd = Transformation(ev_g, ev_f, a_rev, ctx.max_degree)

    def phi(pt):
        return fwd.at(pt) @ internal_map(
            ev_g, alpha_apply(a, pt), omega_apply(delta, pt), ctx.max_degree)

    def psi(pt):
        return bwd.at(pt) @ internal_map(
            ev_f, alpha_apply(a_rev, pt), omega_apply(delta, pt), ctx.max_degree)

    shell = GridModule(ctx.xs, ctx.xs, {}, {}, p)
    witness = None
    for idx in period_samples(shell):
        pt = shell.point(idx)
        mid = omega_apply(delta, pt)
        far = omega_apply(2 * delta, pt)
        phi_pt = phi(pt)
        lhs = phi_pt @ psi(mid)
        rhs = internal_map(ev_f, pt, far, ctx.max_degree)
        if lhs != rhs:
            return _report(delta, False, {
                "sample": idx, "function": f, "lhs": lhs, "rhs": rhs})
        lhs = psi(pt) @ phi(mid)
        rhs = internal_map(ev_g, pt, far, ctx.max_degree)
        if lhs != rhs:
            return _report(delta, False, {
                "sample": idx, "function": g, "lhs": lhs, "rhs": rhs})
        if (witness is None and phi_pt.rows == 1 and phi_pt.cols == 1
                and not phi_pt.is_zero()):
            witness = idx
    return _report(delta, True, witness=witness)


# ---------------------------------------------------------------------------
# compatibility with composition


def composition_check(k: PLComplex, funcs: Sequence[int] = (0, 1, 2),
                      p: int = 2,
                      kmin: int = DEFAULT_TRANSLATES[0],
                      kmax: int = DEFAULT_TRANSLATES[1],
                      cap: int = DEFAULT_CAP) -> Optional[tuple]:
    """The transformation of the outer pair, corrected by the internal map
    from the summed shift to the outer distance, must equal the composite
    of the two inner transformations at every sample."""
    f1, f2, f3 = funcs
    a = distance_pair(k, f1, f2)
    b = distance_pair(k, f2, f3)
    c = distance_pair(k, f1, f3)
    ab = a + b
    if not c.precedes(ab):
        raise AssertionError("distance triangle inequality violated")
    shifts = [a.a1, a.a2, b.a1, b.a2, c.a1, c.a2, ab.a1, ab.a2]
    ctx = joint_context(k, [f1, f2, f3], shifts, p, kmin, kmax, cap)
    t12 = Transformation(ctx.evaluator(f1), ctx.evaluator(f2), a, ctx.max_degree)
    t23 = Transformation(ctx.evaluator(f2), ctx.evaluator(f3), b, ctx.max_degree)
    t13 = Transformation(ctx.evaluator(f1), ctx.evaluator(f3), c, ctx.max_degree)
    shell = GridModule(ctx.xs, ctx.xs, {}, {}, p)
    for idx in period_samples(shell):
        pt = shell.point(idx)
        lhs = t12.at(pt) @ t23.at(alpha_apply(a, pt))
        rhs = t13.at(pt) @ internal_map(
            ctx.evaluator(f3), alpha_apply(c, pt), alpha_apply(ab, pt),
            ctx.max_degree)
        if lhs != rhs:
            return (idx, lhs, rhs)
    return None


# ---------------------------------------------------------------------------
# morphisms induced by simplicial maps over the reals


def extend_to_split(phi: Dict, trace: Sequence[tuple]) -> Dict:
    """Extend a vertex map along the domain's splitting trace: the vertex
    created on an edge maps to the vertex created at the same level on the
    image edge, whose id is deterministic.  A value-preserving simplicial
    map always maps a crossing edge to a crossing edge when both complexes
    are split at the same levels, so the image vertex exists."""
    out = dict(phi)
    for x, a, b, s in trace:
        pa, pb = out[a], out[b]
        if pa == pb:
            raise ValueError(f"image edge of split vertex {x!r} is degenerate")
        out[x] = _fresh_vid(pa, pb, s)
    return out


def _validate_simplicial(phi: Dict, kx: PLComplex, ky: PLComplex,
                         funcs: Sequence[int]):
    for v in kx.values:
        if v not in phi:
            raise ValueError(f"vertex map misses vertex {v!r}")
        if phi[v] not in ky.values:
            raise ValueError(f"vertex map hits unknown vertex {phi[v]!r}")
        for func in funcs:
            if kx.value(v, func) != ky.value(phi[v], func):
                raise ValueError(f"vertex map does not preserve values at {v!r}")
    for s in kx.simplices:
        if frozenset(phi[v] for v in s) not in ky.simplices:
            raise ValueError(f"vertex map is not simplicial at {sorted(map(str, s))}")


def _pullback_sign(simplex, phi: Dict) -> int:
    """Sign of the permutation sorting the images of the sorted vertices."""
    images = [phi[v] for v in sorted(simplex, key=vkey)]
    order = sorted(range(len(images)), key=lambda i: vkey(images[i]))
    sign = 1
    seen = [False] * len(order)
    for i in range(len(order)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = order[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


class CochainPullback:
    """Per-sample matrices of the contravariant morphism induced by a
    simplicial value-preserving map: pull cocycle representatives back
    along the map and express them in the domain's basis."""

    def __init__(self, ev_y: FunctorEvaluator, ev_x: FunctorEvaluator,
                 phi: Dict, max_degree: int):
        self.ev_y = ev_y
        self.ev_x = ev_x
        self.phi = phi
        self.max_degree = max_degree
        self.p = ev_x.p
        self._by_model: Dict[tuple, Mat] = {}

    def at(self, pt: StripPoint) -> Mat:
        d_dst, n, dst = point_data(self.ev_x, pt, self.max_degree)
        d_src, _, src = point_data(self.ev_y, pt, self.max_degree)
        if d_dst == 0 or d_src == 0:
            return Mat.zeros(d_dst, d_src, self.p)
        key = (n, frozenset(src.cells), frozenset(dst.cells), id(src.reps))
        out = self._by_model.get(key)
        if out is None:
            src_index = {s: i for i, s in enumerate(src.cells)}
            pulled = Mat.zeros(len(dst.cells), src.dim, self.p)
            for i, s in enumerate(dst.cells):
                image = frozenset(self.phi[v] for v in s)
                if len(image) < len(s):
                    continue
                j = src_index.get(image)
                if j is not None:
                    sign = _pullback_sign(s, self.phi)
                    row = src.reps.data[j].astype(np.int64)
                    pulled.data[i] = (sign * row) % self.p
            out = dst.express(pulled)
            self._by_model[key] = out
        return out


def induced_morphism(ky: PLComplex, kx: PLComplex, phi: Dict, func: int = 0,
                     p: int = 2, shifts=(),
                     kmin: int = DEFAULT_TRANSLATES[0],
                     kmax: int = DEFAULT_TRANSLATES[1],
                     cap: int = DEFAULT_CAP,
                     critical=None) -> MorphismData:
    """The morphism from the module of a function on the codomain to the
    module of its pullback on the domain, induced by a simplicial
    value-preserving vertex map."""
    _validate_simplicial(phi, kx, ky, [func])
    if critical is None:
        critical = {ky.value(v, func) for v in ky.values}
    ctx_y = joint_context(ky, [func], shifts, p, kmin, kmax, cap, critical)
    trace_x: list = []
    ctx_x = joint_context(kx, [func], shifts, p, kmin, kmax, cap, critical,
                          trace=trace_x)
    phi_split = extend_to_split(phi, trace_x)
    _validate_simplicial(phi_split, ctx_x.split, ctx_y.split, [func])
    max_degree = max(ctx_x.max_degree, ctx_y.max_degree)
    source = assemble_module(ctx_y.evaluator(func), ctx_y.xs, max_degree)
    target = assemble_module(ctx_x.evaluator(func), ctx_x.xs, max_degree)
    pull = CochainPullback(ctx_y.evaluator(func), ctx_x.evaluator(func),
                           phi_split, max_degree)
    per_sample = {idx: pull.at(target.point(idx)) for idx in target.samples()}
    return MorphismData(source, target, per_sample, ShiftVector(0, 0))


def precomposition_check(ky: PLComplex, kx: PLComplex, phi: Dict,
                         f: int = 0, g: int = 1, p: int = 2,
                         kmin: int = DEFAULT_TRANSLATES[0],
                         kmax: int = DEFAULT_TRANSLATES[1],
                         cap: int = DEFAULT_CAP) -> Optional[tuple]:
    """Pulling the two functions back along a simplicial map commutes with
    the stability transformations: the square of the induced morphisms, the
    domain transformation corrected by the internal map from the smaller
    domain distance, and the codomain transformation must commute at every
    sample."""
    _validate_simplicial(phi, kx, ky, [f, g])
    a = distance_pair(ky, f, g)
    b = distance_pair(kx, f, g)
    if not b.precedes(a):
        raise AssertionError("pulled-back distance is not dominated")
    shifts = [a.a1, a.a2, b.a1, b.a2]
    critical = {ky.value(v, func) for v in ky.values for func in (f, g)}
    ctx_y = joint_context(ky, [f, g], shifts, p, kmin, kmax, cap, critical)
    trace_x: list = []
    ctx_x = joint_context(kx, [f, g], shifts, p, kmin, kmax, cap, critical,
                          trace=trace_x)
    phi_split = extend_to_split(phi, trace_x)
    _validate_simplicial(phi_split, ctx_x.split, ctx_y.split, [f, g])
    max_degree = max(ctx_x.max_degree, ctx_y.max_degree)
    t_y = Transformation(ctx_y.evaluator(f), ctx_y.evaluator(g), a, max_degree)
    t_x = Transformation(ctx_x.evaluator(f), ctx_x.evaluator(g), b, max_degree)
    pull_f = CochainPullback(ctx_y.evaluator(f), ctx_x.evaluator(f),
                             phi_split, max_degree)
    pull_g = CochainPullback(ctx_y.evaluator(g), ctx_x.evaluator(g),
                             phi_split, max_degree)
    shell = GridModule(ctx_y.xs, ctx_y.xs, {}, {}, p)
    for idx in period_samples(shell):
        pt = shell.point(idx)
        lhs = t_x.at(pt) @ internal_map(
            ctx_x.evaluator(g), alpha_apply(b, pt), alpha_apply(a, pt),
            max_degree) @ pull_g.at(alpha_apply(a, pt))
        rhs = pull_f.at(pt) @ t_y.at(pt)
        if lhs != rhs:
            return (idx, lhs, rhs)
    return None
