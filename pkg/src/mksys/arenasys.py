"""State-carrying machines over interfaces and their square calculus.

A system object is an exposed state space together with a larger extended
state space and a deterministic restriction of the latter onto the former.
Horizontal morphisms act on both state spaces at once and commute with the
restrictions; vertical morphisms present a system to an interface through a
deterministic readout and a (possibly stochastic or possibilistic) state
update.  Squares mix the two directions and carry a filling kernel coupling
the source state with the residual data of the bottom chart, subject to
three equations checked by :func:`validate_sys_xy`.

The update of a vertical morphism must restrict back to the projection onto
the exposed state.  Its readout must be deterministic; passing
``allow_stochastic_readout=True`` skips that single check so that the
resulting breakage of the pasting laws can be explored, but none of the
composition operations promise anything in that mode.
"""

from __future__ import annotations

from typing import Optional, Sequence

from .errors import (BoundaryMismatch, NaturalityViolation, ObjectMismatch,
                     PreconditionViolation)
from .objects import UNIT, FiniteObject
from .markov import (DetKernel, Morphism, as_det, compose, compose_all,
                     conditional_product, copy_blocks, dirac, identity,
                     is_deterministic, morphism_equal, permute_blocks,
                     select_blocks, tensor, tensor_all)
from .arena import (Chart, DetLens, Interface, UNIT_INTERFACE, XYSquare,
                    ZPair, chart_compose, discard_chart)


# ---------------------------------------------------------------------------
# system objects

class SystemObject:
    """An exposed state space under a deterministically restricted larger one."""

    __slots__ = ("stilde", "s", "r")

    def __init__(self, stilde: FiniteObject, s: FiniteObject, r: Morphism):
        r = as_det(r)
        if r.dom != stilde or r.cod != s:
            raise ObjectMismatch(
                f"restriction has type {r.dom!r} -> {r.cod!r}, expected "
                f"{stilde!r} -> {s!r}")
        self.stilde = stilde
        self.s = s
        self.r = r

    def tensor(self, other: "SystemObject") -> "SystemObject":
        return SystemObject(self.stilde @ other.stilde, self.s @ other.s,
                            tensor(self.r, other.r))

    __matmul__ = tensor

    def __eq__(self, other) -> bool:
        return (isinstance(other, SystemObject) and self.stilde == other.stilde
                and self.s == other.s and self.r == other.r)

    def __hash__(self):
        return hash((self.stilde, self.s, self.r))

    def __repr__(self):
        return f"SystemObject({self.stilde!r} -> {self.s!r})"


UNIT_SYSTEM = SystemObject(UNIT, UNIT, identity(UNIT))


def sysobj_tensor(o1: SystemObject, o2: SystemObject) -> SystemObject:
    return o1.tensor(o2)


def sysobj_tensor_all(objs: Sequence[SystemObject]) -> SystemObject:
    objs = list(objs)
    if not objs:
        return UNIT_SYSTEM
    out = objs[0]
    for o in objs[1:]:
        out = out.tensor(o)
    return out


# ---------------------------------------------------------------------------
# horizontal (x) and vertical (y) morphisms

class SysXMor:
    """A pair of maps on extended and exposed states commuting with r."""

    __slots__ = ("src", "dst", "fflat", "f")

    def __init__(self, src: SystemObject, dst: SystemObject,
                 fflat: Morphism, f: Morphism):
        if fflat.dom != src.stilde or fflat.cod != dst.stilde:
            raise ObjectMismatch(
                f"extended map has type {fflat.dom!r} -> {fflat.cod!r}, "
                f"expected {src.stilde!r} -> {dst.stilde!r}")
        if f.dom != src.s or f.cod != dst.s:
            raise ObjectMismatch(
                f"exposed map has type {f.dom!r} -> {f.cod!r}, expected "
                f"{src.s!r} -> {dst.s!r}")
        if not morphism_equal(compose(fflat, dst.r), compose(src.r, f)):
            raise NaturalityViolation(
                "maps do not commute with the restrictions")
        self.src = src
        self.dst = dst
        self.fflat = fflat
        self.f = f

    def __eq__(self, other) -> bool:
        return (isinstance(other, SysXMor) and self.src == other.src
                and self.dst == other.dst
                and morphism_equal(self.fflat, other.fflat)
                and morphism_equal(self.f, other.f))

    def __hash__(self):
        return hash((self.src, self.dst))

    def __repr__(self):
        return f"SysXMor({self.src!r} -> {self.dst!r})"


def sysx_identity(obj: SystemObject) -> SysXMor:
    return SysXMor(obj, obj, identity(obj.stilde), identity(obj.s))


def sysx_compose(x1: SysXMor, x2: SysXMor) -> SysXMor:
    if x1.dst != x2.src:
        raise BoundaryMismatch(
            f"cannot compose: middle system objects differ "
            f"({x1.dst!r} vs {x2.src!r})")
    return SysXMor(x1.src, x2.dst, compose(x1.fflat, x2.fflat),
                   compose(x1.f, x2.f))


def sysx_tensor(x1: SysXMor, x2: SysXMor) -> SysXMor:
    return SysXMor(x1.src @ x2.src, x1.dst @ x2.dst,
                   tensor(x1.fflat, x2.fflat), tensor(x1.f, x2.f))


class SysYMor:
    """A view of a system through an interface.

    ``f : s -> c`` reads a configuration off the exposed state and must be
    deterministic; ``fsharp : s (x) a -> stilde`` feeds an action back into
    the extended state and may be stochastic or possibilistic.  Restricting
    the update must forget the action: ``fsharp ; r = projection onto s``.
    """

    __slots__ = ("src", "dst", "f", "fsharp")

    def __init__(self, src: SystemObject, dst: Interface, f: Morphism,
                 fsharp: Morphism, *, allow_stochastic_readout: bool = False):
        if f.dom != src.s or f.cod != dst.c:
            raise ObjectMismatch(
                f"readout has type {f.dom!r} -> {f.cod!r}, expected "
                f"{src.s!r} -> {dst.c!r}")
        if not allow_stochastic_readout:
            f = as_det(f)
        want_dom = src.s @ dst.a
        if fsharp.dom != want_dom or fsharp.cod != src.stilde:
            raise ObjectMismatch(
                f"update has type {fsharp.dom!r} -> {fsharp.cod!r}, "
                f"expected {want_dom!r} -> {src.stilde!r}")
        projection = select_blocks([src.s, dst.a], [0])
        if not morphism_equal(compose(fsharp, src.r), projection):
            raise NaturalityViolation(
                "update does not restrict to the projection onto the "
                "exposed state")
        self.src = src
        self.dst = dst
        self.f = f
        self.fsharp = fsharp

    def __eq__(self, other) -> bool:
        return (isinstance(other, SysYMor) and self.src == other.src
                and self.dst == other.dst and morphism_equal(self.f, other.f)
                and morphism_equal(self.fsharp, other.fsharp))

    def __hash__(self):
        return hash((self.src, self.dst))

    def __repr__(self):
        return f"SysYMor({self.src!r} -> {self.dst!r})"


def sysy_compose(view: SysYMor, lens: DetLens) -> SysYMor:
    """Look at a system through a further lens on its interface."""
    if view.dst != lens.src:
        raise BoundaryMismatch(
            f"cannot compose: {view.dst!r} != {lens.src!r}")
    s_obj = view.src.s
    a2 = lens.dst.a
    fsharp = compose_all([
        select_blocks([s_obj, a2], [0, 0, 1]),
        tensor_all([identity(s_obj), view.f, identity(a2)]),
        tensor(identity(s_obj), lens.fsharp),
        view.fsharp,
    ])
    relaxed = not isinstance(view.f, DetKernel)
    return SysYMor(view.src, lens.dst, compose(view.f, lens.f), fsharp,
                   allow_stochastic_readout=relaxed)


def sysy_tensor(y1: SysYMor, y2: SysYMor) -> SysYMor:
    blocks = [y1.src.s, y2.src.s, y1.dst.a, y2.dst.a]
    fsharp = compose(permute_blocks(blocks, [0, 2, 1, 3]),
                     tensor(y1.fsharp, y2.fsharp))
    relaxed = not (isinstance(y1.f, DetKernel) and isinstance(y2.f, DetKernel))
    return SysYMor(y1.src @ y2.src, y1.dst @ y2.dst,
                   tensor(y1.f, y2.f), fsharp,
                   allow_stochastic_readout=relaxed)


def sysy_tensor_all(views: Sequence[SysYMor]) -> SysYMor:
    views = list(views)
    if not views:
        raise ValueError("need at least one view")
    out = views[0]
    for v in views[1:]:
        out = sysy_tensor(out, v)
    return out


# ---------------------------------------------------------------------------
# mixed squares

class SysXYSquare:
    """A system morphism over a chart, along two views, with a filling.

    The filling has type ``s1 (x) a3 -> s2 (x) c_res (x) a_res (x) a4``
    where ``(c_res, a_res)`` is the residual of the bottom chart.  The
    constructor checks shapes only; :func:`validate_sys_xy` checks the
    three equations.
    """

    __slots__ = ("top", "bottom", "left", "right", "filling")

    def __init__(self, top: SysXMor, bottom: Chart, left: SysYMor,
                 right: SysYMor, filling: Morphism):
        if left.src != top.src or right.src != top.dst:
            raise BoundaryMismatch(
                "top morphism does not match the view sources")
        if bottom.src != left.dst or bottom.dst != right.dst:
            raise BoundaryMismatch(
                "bottom chart does not match the view targets")
        want_dom = top.src.s @ bottom.src.a
        want_cod = (top.dst.s @ bottom.residual.c
                    @ bottom.residual.a @ bottom.dst.a)
        if filling.dom != want_dom or filling.cod != want_cod:
            raise ObjectMismatch(
                f"filling has type {filling.dom!r} -> {filling.cod!r}, "
                f"expected {want_dom!r} -> {want_cod!r}")
        self.top = top
        self.bottom = bottom
        self.left = left
        self.right = right
        self.filling = filling

    def _fill_blocks(self) -> list[FiniteObject]:
        """Codomain blocks of the filling: [s2, c_res, a_res, a4]."""
        return [self.top.dst.s, self.bottom.residual.c,
                self.bottom.residual.a, self.bottom.dst.a]

    def __eq__(self, other) -> bool:
        return (isinstance(other, SysXYSquare) and self.top == other.top
                and self.bottom == other.bottom and self.left == other.left
                and self.right == other.right
                and morphism_equal(self.filling, other.filling))

    def __hash__(self):
        return hash((self.left, self.right))

    def __repr__(self):
        return (f"SysXYSquare(top={self.top!r}, bottom={self.bottom!r})")


def validate_sys_xy(sq: SysXYSquare) -> Optional[str]:
    """None if the three defining equations hold, else the first violated."""
    top, bottom, left, right = sq.top, sq.bottom, sq.left, sq.right
    fb = sq._fill_blocks()
    # (a) reading the target state agrees with charting the source reading
    lhs_a = compose(top.f, right.f)
    rhs_a = compose_all([left.f, bottom.g,
                         select_blocks([bottom.residual.c, bottom.dst.c],
                                       [1])])
    if not morphism_equal(lhs_a, rhs_a):
        return "equation (a): forward maps do not commute"
    # (b) pushing the filling's state output through the right readout
    #     recovers the bottom chart
    lhs_b = compose_all([
        sq.filling,
        permute_blocks(fb, [1, 0, 2, 3]),
        tensor_all([identity(fb[1]), right.f, identity(fb[2]),
                    identity(fb[3])]),
    ])
    rhs_b = compose(tensor(left.f, identity(bottom.src.a)), bottom.gflat)
    if not morphism_equal(lhs_b, rhs_b):
        return "equation (b): filling does not project to the bottom chart"
    # (c) updating after the filling agrees with updating before the top map
    lhs_c = compose(left.fsharp, top.fflat)
    rhs_c = compose_all([sq.filling, select_blocks(fb, [0, 3]),
                         right.fsharp])
    if not morphism_equal(lhs_c, rhs_c):
        return "equation (c): filling does not track the state update"
    return None


def sys_xy_compose_x(s: SysXYSquare, t: SysXYSquare) -> SysXYSquare:
    """Horizontal pasting along a shared middle view."""
    if s.right != t.left:
        raise BoundaryMismatch(
            "right view of the first square must equal the left view of "
            "the second")
    top = sysx_compose(s.top, t.top)
    bottom = chart_compose(s.bottom, t.bottom)
    sb = s._fill_blocks()                    # s2 rc ra aB
    mid_c = s.right.dst.c
    filling = compose_all([
        s.filling,
        copy_blocks(sb, [0, 3]),             # s2 rc ra aB s2 aB
        tensor_all([identity(b) for b in sb]
                   + [s.right.f, identity(sb[3])]),
        permute_blocks(sb + [mid_c, sb[3]], [1, 4, 2, 3, 0, 5]),
        tensor_all([identity(sb[1]), identity(mid_c), identity(sb[2]),
                    identity(sb[3]), t.filling]),
        permute_blocks([sb[1], mid_c, sb[2], sb[3]] + t._fill_blocks(),
                       [4, 0, 1, 5, 2, 3, 6, 7]),
    ])
    return SysXYSquare(top, bottom, s.left, t.right, filling)


def _y_glue(s: SysXYSquare, t: XYSquare):
    """Glued joint over the shared middle chart data, plus its blocks."""
    if s.bottom != t.top:
        raise BoundaryMismatch(
            "bottom chart of the system square must equal the top chart of "
            "the lower square")
    s1 = s.top.src.s
    a5 = t.bottom.src.a
    fb = s._fill_blocks()                    # s2 c34 a34 a4
    phi = compose_all([
        select_blocks([s1, a5], [0, 0, 1]),
        tensor_all([identity(s1), s.left.f, identity(a5)]),
        tensor(identity(s1), t.left.fsharp),
        s.filling,
        copy_blocks(fb, [0]),
        tensor_all([identity(b) for b in fb] + [s.right.f]),
        permute_blocks(fb + [s.right.dst.c], [0, 1, 4, 2, 3]),
    ])
    tb = t._fill_blocks()                    # c34 c4 a56 a6
    psi = compose_all([
        tensor(s.left.f, identity(a5)),
        t.filling,
        copy_blocks(tb, [0, 2, 1, 3, 0]),
        tensor_all([identity(b) for b in tb]
                   + [t.residual_lens.fsharp, t.right.fsharp,
                      t.residual_lens.f]),
        permute_blocks(tb + [t.top.residual.a, t.top.dst.a,
                             t.bottom.residual.c],
                       [0, 1, 4, 5, 6, 2, 3]),
    ])
    mid = (t.top.residual.c @ t.top.dst.c @ t.top.residual.a @ t.top.dst.a)
    alpha = conditional_product(phi, psi, over=mid.nfactors,
                                default="first")
    blocks = [s.top.dst.s, t.top.residual.c, t.top.dst.c,
              t.top.residual.a, t.top.dst.a,
              t.bottom.residual.c, t.bottom.residual.a, t.bottom.dst.a]
    return alpha, blocks


def sys_xy_compose_y(s: SysXYSquare, t: XYSquare) -> SysXYSquare:
    """Vertical pasting of a chart square below a system square.

    The composite filling is the conditional product of the two evident
    composites over the shared middle data, with that data then discarded.
    A MarginalMismatch escaping from here means one of the inputs fails
    its validator.
    """
    alpha, blocks = _y_glue(s, t)
    filling = compose(alpha, select_blocks(blocks, [0, 5, 6, 7]))
    return SysXYSquare(s.top, t.bottom,
                       sysy_compose(s.left, t.left),
                       sysy_compose(s.right, t.right), filling)


def y_regeneration_holds(s: SysXYSquare, t: XYSquare) -> bool:
    """Whether the glued joint of a vertical pasting survives a round trip.

    Discard the middle configuration/action pair that the boundary can
    rebuild, then rebuild it (the new configuration deterministically from
    the target state, the action from that configuration and the bottom
    action).  True iff the rebuilt joint equals the original — the property
    the pasting laws rest on.
    """
    alpha, blocks = _y_glue(s, t)
    a6 = blocks[7]
    regen_action = compose(tensor(s.right.f, identity(a6)), t.right.fsharp)
    rebuilt = compose_all([
        alpha,
        select_blocks(blocks, [0, 1, 3, 0, 5, 6, 7, 0, 7]),
        # s2 c34 a34 s2 c56 a56 a6 s2 a6
        tensor_all([identity(blocks[0]), identity(blocks[1]),
                    identity(blocks[3]), s.right.f,
                    identity(blocks[5]), identity(blocks[6]),
                    identity(blocks[7]), regen_action]),
        # s2 c34 a34 c4 c56 a56 a6 a4
        permute_blocks([blocks[0], blocks[1], blocks[3], blocks[2],
                        blocks[5], blocks[6], blocks[7], blocks[4]],
                       [0, 1, 3, 2, 7, 4, 5, 6]),
    ])
    return morphism_equal(alpha, rebuilt)


# ---------------------------------------------------------------------------
# projections out of a tensor of systems

def projection_square(views: Sequence[SysYMor],
                      keep: Sequence[int]) -> SysXYSquare:
    """The deterministic square projecting a tensor of views onto some."""
    views = list(views)
    keep = list(keep)
    stildes = [v.src.stilde for v in views]
    ss = [v.src.s for v in views]
    ifaces = [v.dst for v in views]
    src_obj = sysobj_tensor_all([v.src for v in views])
    dst_obj = sysobj_tensor_all([views[i].src for i in keep])
    top = SysXMor(src_obj, dst_obj, select_blocks(stildes, keep),
                  select_blocks(ss, keep))
    bottom = discard_chart(ifaces, keep)
    left = sysy_tensor_all(views)
    right = sysy_tensor_all([views[i] for i in keep])
    n = len(views)
    filling = select_blocks(ss + [i.a for i in ifaces],
                            keep + [n + i for i in keep])
    return SysXYSquare(top, bottom, left, right, filling)


def projection_squares(sys1: SysYMor,
                       sys2: SysYMor) -> tuple[SysXYSquare, SysXYSquare]:
    """The two canonical projections out of a tensor of two views."""
    return (projection_square([sys1, sys2], [0]),
            projection_square([sys1, sys2], [1]))


# ---------------------------------------------------------------------------
# gluing two behaviours over a joint chart

def _marginal_chart(chart: Chart, ifaces: Sequence[Interface],
                    i: int) -> Chart:
    """Project a unit-residual chart into a two-fold tensor onto one factor."""
    if not chart.residual.is_unit():
        raise PreconditionViolation("chart must have a trivial residual")
    c_parts = [ifaces[0].c, ifaces[1].c]
    a_parts = [ifaces[0].a, ifaces[1].a]
    g = compose(chart.g, select_blocks(c_parts, [i]))
    gflat = compose(chart.gflat,
                    select_blocks(c_parts + a_parts, [i, 2 + i]))
    return Chart(chart.src, ifaces[i], UNIT_INTERFACE, g, gflat)


def nabla(s1: SysXYSquare, s2: SysXYSquare, g012: Chart) -> SysXYSquare:
    """Glue two squares sharing their left view over a joint bottom chart.

    The result couples both target states with both bottom actions; its
    marginals recover the inputs (see :func:`nabla_projection`).  All
    hypotheses are checked and a violated one is reported by name.
    """
    left = s1.left
    if s2.left != left:
        raise PreconditionViolation(
            "the two squares do not share their left view")
    src_iface = left.dst
    y1, y2 = s1.right, s2.right
    ifaces = (y1.dst, y2.dst)
    if g012.src != src_iface or g012.dst != ifaces[0] @ ifaces[1]:
        raise PreconditionViolation(
            "joint chart must go from the shared source interface to the "
            "tensor of the two target interfaces")
    if src_iface.a.size != 1:
        raise PreconditionViolation(
            "shared source interface must have a single action")
    if not is_deterministic(left.fsharp):
        raise PreconditionViolation(
            "shared state update must be deterministic")
    upd = as_det(left.fsharp)
    if (upd.dom.size != upd.cod.size
            or len(set(upd.mapping)) != upd.cod.size):
        raise PreconditionViolation("shared state update must be a bijection")
    if not g012.residual.is_unit():
        raise PreconditionViolation("joint chart must have a trivial residual")
    for k, sq in enumerate((s1, s2)):
        if not sq.bottom.residual.is_unit():
            raise PreconditionViolation(
                f"bottom chart of square {k + 1} must have a trivial "
                f"residual")
    for k, sq in enumerate((s1, s2)):
        if _marginal_chart(g012, ifaces, k) != sq.bottom:
            raise PreconditionViolation(
                f"joint chart does not project onto the bottom chart of "
                f"square {k + 1}")

    t_exp = left.src.s
    point = dirac(src_iface.a, src_iface.a.decode(0))
    embed = tensor(identity(t_exp), point)

    parts = []
    for sq, view in ((s1, y1), (s2, y2)):
        core = compose(embed, sq.filling)            # t -> s_i (x) a_i
        s_i = view.src.s
        a_i = view.dst.a
        parts.append(compose_all([
            core,
            copy_blocks([s_i, a_i], [0]),
            tensor_all([identity(s_i), identity(a_i), view.f]),
        ]))                                          # s_i a_i c_i

    braw = compose_all([
        left.f,
        tensor(identity(src_iface.c), point),
        g012.gflat,
    ])                                               # c1 c2 a1 a2
    ob = [ifaces[0].c, ifaces[1].c, ifaces[0].a, ifaces[1].a]
    b1 = compose(braw, select_blocks(ob, [2, 0, 3, 1]))   # a1 c1 a2 c2
    b2 = compose(braw, select_blocks(ob, [3, 1, 2, 0]))   # a2 c2 a1 c1

    t1 = conditional_product(parts[0], b1, default="first",
                             over=(ifaces[0].a @ ifaces[0].c).nfactors)
    t2 = conditional_product(parts[1], b2, default="first",
                             over=(ifaces[1].a @ ifaces[1].c).nfactors)
    s1_obj, s2_obj = y1.src.s, y2.src.s
    a1_obj, c1_obj = ifaces[0].a, ifaces[0].c
    a2_obj, c2_obj = ifaces[1].a, ifaces[1].c
    t2p = compose(t2, permute_blocks([s2_obj, a2_obj, c2_obj, a1_obj, c1_obj],
                                     [3, 4, 1, 2, 0]))
    glued = conditional_product(
        t1, t2p, default="first",
        over=(a1_obj @ c1_obj @ a2_obj @ c2_obj).nfactors)
    tblocks = [s1_obj, a1_obj, c1_obj, a2_obj, c2_obj, s2_obj]

    filling = compose_all([
        select_blocks([t_exp, src_iface.a], [0]),
        glued,
        select_blocks(tblocks, [0, 5, 1, 3]),
    ])
    dst_obj = sysobj_tensor(y1.src, y2.src)
    fflat = compose_all([
        left.src.r,
        glued,
        select_blocks(tblocks, [0, 1, 5, 3]),
        tensor(y1.fsharp, y2.fsharp),
    ])
    top = SysXMor(left.src, dst_obj, fflat,
                  compose(glued, select_blocks(tblocks, [0, 5])))
    right = sysy_tensor(y1, y2)
    return SysXYSquare(top, g012, left, right, filling)


def nabla_projection(sq: SysXYSquare, y1: SysYMor, y2: SysYMor,
                     i: int) -> SysXYSquare:
    """Marginalize a glued square back onto one of its two factors."""
    if i not in (0, 1):
        raise ValueError("factor index must be 0 or 1")
    if sq.right != sysy_tensor(y1, y2):
        raise BoundaryMismatch(
            "right view of the square is not the tensor of the given views")
    views = (y1, y2)
    objs = (y1.src, y2.src)
    ifaces = (y1.dst, y2.dst)
    top = SysXMor(sq.top.src, objs[i],
                  compose(sq.top.fflat,
                          select_blocks([objs[0].stilde, objs[1].stilde],
                                        [i])),
                  compose(sq.top.f,
                          select_blocks([objs[0].s, objs[1].s], [i])))
    bottom = _marginal_chart(sq.bottom, ifaces, i)
    filling = compose(sq.filling,
                      select_blocks([objs[0].s, objs[1].s,
                                     ifaces[0].a, ifaces[1].a],
                                    [i, 2 + i]))
    return SysXYSquare(top, bottom, sq.left, views[i], filling)


# ---------------------------------------------------------------------------
# thin cells in the remaining directions

class SysZMor:
    """A deterministic pair of maps commuting with the restrictions."""

    __slots__ = ("src", "dst", "fflat", "f")

    def __init__(self, src: SystemObject, dst: SystemObject,
                 fflat: Morphism, f: Morphism):
        fflat = as_det(fflat)
        f = as_det(f)
        if fflat.dom != src.stilde or fflat.cod != dst.stilde:
            raise ObjectMismatch(
                f"extended map has type {fflat.dom!r} -> {fflat.cod!r}, "
                f"expected {src.stilde!r} -> {dst.stilde!r}")
        if f.dom != src.s or f.cod != dst.s:
            raise ObjectMismatch(
                f"exposed map has type {f.dom!r} -> {f.cod!r}, expected "
                f"{src.s!r} -> {dst.s!r}")
        if compose(fflat, dst.r) != compose(src.r, f):
            raise NaturalityViolation(
                "maps do not commute with the restrictions")
        self.src = src
        self.dst = dst
        self.fflat = fflat
        self.f = f

    def __eq__(self, other) -> bool:
        return (isinstance(other, SysZMor) and self.src == other.src
                and self.dst == other.dst and self.fflat == other.fflat
                and self.f == other.f)

    def __hash__(self):
        return hash((self.src, self.dst, self.fflat, self.f))


class SysYZSquare:
    """Views along deterministic pairs; thin (no filling)."""

    __slots__ = ("top", "bottom", "left", "right")

    def __init__(self, top: SysZMor, bottom: ZPair, left: SysYMor,
                 right: SysYMor):
        if left.src != top.src or right.src != top.dst:
            raise BoundaryMismatch("top pair does not match the view sources")
        if bottom.src != left.dst or bottom.dst != right.dst:
            raise BoundaryMismatch(
                "bottom pair does not match the view targets")
        self.top = top
        self.bottom = bottom
        self.left = left
        self.right = right


def validate_sys_yz(sq: SysYZSquare) -> Optional[str]:
    if not morphism_equal(compose(sq.left.f, sq.bottom.fc),
                          compose(sq.top.f, sq.right.f)):
        return "equation (yz): forward maps do not commute"
    return None


class SysXZSquare:
    """System morphisms along deterministic pairs; thin."""

    __slots__ = ("top", "bottom", "left", "right")

    def __init__(self, top: SysXMor, bottom: SysXMor, left: SysZMor,
                 right: SysZMor):
        if left.src != top.src or right.src != top.dst:
            raise BoundaryMismatch("top morphism does not match the pairs")
        if bottom.src != left.dst or bottom.dst != right.dst:
            raise BoundaryMismatch("bottom morphism does not match the pairs")
        self.top = top
        self.bottom = bottom
        self.left = left
        self.right = right


def validate_sys_xz(sq: SysXZSquare) -> Optional[str]:
    if not morphism_equal(compose(sq.top.fflat, sq.right.fflat),
                          compose(sq.left.fflat, sq.bottom.fflat)):
        return "equation (xz-i): extended maps do not commute"
    if not morphism_equal(compose(sq.top.f, sq.right.f),
                          compose(sq.left.f, sq.bottom.f)):
        return "equation (xz-ii): exposed maps do not commute"
    return None
