"""Bidirectional interfaces and the square calculus over the kernel core.

An ``Interface`` pairs a forward-flowing configuration object ``c`` with a
backward-flowing action object ``a``.  Between interfaces live three kinds of
morphism:

* ``DetLens`` — deterministic forward map plus a backward "sharp" map that
  pulls actions back along a configuration (vertical / y direction);
* ``Chart``   — a kernel pushing configurations and actions forward jointly,
  keeping an explicit residual interface for the information it spends
  (horizontal / x direction);
* ``ZPair``   — a plain pair of deterministic maps, covariant on both sides
  (depth / z direction).

Squares mixing two directions carry a filling kernel (xy) or are thin
(yz, xz).  Constructors check shapes only; the ``validate_*`` functions
evaluate the defining equations and name the first one that fails, so
invalid candidates can be built on purpose and diagnosed.
"""

from __future__ import annotations

from typing import Optional, Sequence

from .errors import BoundaryMismatch, ObjectMismatch
from .markov import (DetKernel, Morphism, as_det, compose, compose_all,
                     conditional_product, copy_blocks, identity,
                     morphism_equal, permute_blocks, select_blocks, tensor,
                     tensor_all)
from .objects import UNIT, FiniteObject, tensor_objects


class Interface:
    """A pair of finite objects: backward actions ``a``, forward configs ``c``."""

    __slots__ = ("a", "c")

    def __init__(self, a: FiniteObject, c: FiniteObject):
        self.a = a
        self.c = c

    def tensor(self, other: "Interface") -> "Interface":
        return Interface(self.a @ other.a, self.c @ other.c)

    __matmul__ = tensor

    def is_unit(self) -> bool:
        return self.a.is_unit() and self.c.is_unit()

    def __eq__(self, other) -> bool:
        return (isinstance(other, Interface) and self.a == other.a
                and self.c == other.c)

    def __hash__(self):
        return hash((self.a, self.c))

    def __repr__(self):
        return f"Interface(a={self.a!r}, c={self.c!r})"


UNIT_INTERFACE = Interface(UNIT, UNIT)


def interface_tensor(ifaces: Sequence[Interface]) -> Interface:
    return Interface(tensor_objects([i.a for i in ifaces]),
                     tensor_objects([i.c for i in ifaces]))


# ---------------------------------------------------------------------------
# lenses (y direction)

class DetLens:
    """Forward map on configs plus a backward map on actions.

    ``f : c1 -> c2`` and ``fsharp : c1 (x) a2 -> a1``; both deterministic
    (stochastic/possibilistic arguments are accepted when they are
    deterministic in the copy-equation sense, and are converted).
    """

    __slots__ = ("src", "dst", "f", "fsharp")

    def __init__(self, src: Interface, dst: Interface,
                 f: Morphism, fsharp: Morphism):
        f = as_det(f)
        fsharp = as_det(fsharp)
        if f.dom != src.c or f.cod != dst.c:
            raise ObjectMismatch(
                f"lens forward map has type {f.dom!r} -> {f.cod!r}, "
                f"expected {src.c!r} -> {dst.c!r}")
        if fsharp.dom != src.c @ dst.a or fsharp.cod != src.a:
            raise ObjectMismatch(
                f"lens backward map has type {fsharp.dom!r} -> "
                f"{fsharp.cod!r}, expected {src.c @ dst.a!r} -> {src.a!r}")
        self.src = src
        self.dst = dst
        self.f = f
        self.fsharp = fsharp

    def __eq__(self, other) -> bool:
        return (isinstance(other, DetLens) and self.src == other.src
                and self.dst == other.dst and self.f == other.f
                and self.fsharp == other.fsharp)

    def __hash__(self):
        return hash((self.src, self.dst, self.f, self.fsharp))

    def __repr__(self):
        return f"DetLens({self.src!r} -> {self.dst!r})"


def identity_lens(iface: Interface) -> DetLens:
    return DetLens(iface, iface, identity(iface.c),
                   select_blocks([iface.c, iface.a], [1]))


def lens_compose(l1: DetLens, l2: DetLens) -> DetLens:
    """Sequential composite: forward maps chain, backward maps pull back."""
    if l1.dst != l2.src:
        raise ObjectMismatch(
            f"cannot compose lenses: {l1.dst!r} != {l2.src!r}")
    c1, a3 = l1.src.c, l2.dst.a
    c2 = l1.dst.c
    # c1 a3 -> c1 c1 a3 -> c1 c2 a3 -> c1 a2 -> a1
    sharp = compose_all([
        select_blocks([c1, a3], [0, 0, 1]),
        tensor_all([identity(c1), l1.f, identity(a3)]),
        tensor(identity(c1), l2.fsharp),
        l1.fsharp,
    ])
    return DetLens(l1.src, l2.dst, compose(l1.f, l2.f), sharp)


def lens_tensor(l1: DetLens, l2: DetLens) -> DetLens:
    src = l1.src @ l2.src
    dst = l1.dst @ l2.dst
    parts = [l1.src.c, l2.src.c, l1.dst.a, l2.dst.a]
    sharp = compose_all([
        permute_blocks(parts, [0, 2, 1, 3]),
        tensor(l1.fsharp, l2.fsharp),
    ])
    return DetLens(src, dst, tensor(l1.f, l2.f), sharp)


def lens_tensor_all(lenses: Sequence[DetLens]) -> DetLens:
    out = lenses[0]
    for l in lenses[1:]:
        out = lens_tensor(out, l)
    return out


# ---------------------------------------------------------------------------
# charts (x direction)

class Chart:
    """A forward kernel on configs with an explicit residual interface.

    ``g : c1 -> c_res (x) c2`` and ``gflat : c1 (x) a1 -> c_res (x) c2 (x)
    a_res (x) a2``.  The residual records what composition must remember;
    composing charts concatenates residuals, which is why charts only form a
    semicategory (no identities: composites strictly grow the residual).
    """

    __slots__ = ("src", "dst", "residual", "g", "gflat")

    def __init__(self, src: Interface, dst: Interface, residual: Interface,
                 g: Morphism, gflat: Morphism):
        if g.dom != src.c or g.cod != residual.c @ dst.c:
            raise ObjectMismatch(
                f"chart forward map has type {g.dom!r} -> {g.cod!r}, "
                f"expected {src.c!r} -> {residual.c @ dst.c!r}")
        want = residual.c @ dst.c @ residual.a @ dst.a
        if gflat.dom != src.c @ src.a or gflat.cod != want:
            raise ObjectMismatch(
                f"chart joint map has type {gflat.dom!r} -> {gflat.cod!r}, "
                f"expected {src.c @ src.a!r} -> {want!r}")
        self.src = src
        self.dst = dst
        self.residual = residual
        self.g = g
        self.gflat = gflat

    def __eq__(self, other) -> bool:
        return (isinstance(other, Chart) and self.src == other.src
                and self.dst == other.dst and self.residual == other.residual
                and morphism_equal(self.g, other.g)
                and morphism_equal(self.gflat, other.gflat))

    def __hash__(self):
        return hash((self.src, self.dst, self.residual))

    def __repr__(self):
        return (f"Chart({self.src!r} -> {self.dst!r}, "
                f"residual={self.residual!r})")

    def _blocks(self) -> list[FiniteObject]:
        """Codomain blocks of gflat: [c_res, c_dst, a_res, a_dst]."""
        return [self.residual.c, self.dst.c, self.residual.a, self.dst.a]


def validate_chart(chart: Chart) -> Optional[str]:
    """None if the marginal condition holds, else a message naming it."""
    lhs = compose(chart.gflat, select_blocks(chart._blocks(), [0, 1]))
    rhs = compose(select_blocks([chart.src.c, chart.src.a], [0]), chart.g)
    if not morphism_equal(lhs, rhs):
        return ("chart marginal condition: config marginal of the joint map "
                "does not match the forward map")
    return None


def chart_compose(x1: Chart, x2: Chart) -> Chart:
    """Copy the shared boundary leg, run both charts, keep every residual."""
    if x1.dst != x2.src:
        raise ObjectMismatch(
            f"cannot compose charts: {x1.dst!r} != {x2.src!r}")
    r1, r2 = x1.residual, x2.residual
    mid = x1.dst
    residual = Interface(r1.a @ mid.a @ r2.a, r1.c @ mid.c @ r2.c)
    # forward: c1 -> r1c c2 -> r1c c2 c2 -> r1c c2 r2c c3
    g = compose_all([
        x1.g,
        copy_blocks([r1.c, mid.c], [1]),
        tensor_all([identity(r1.c), identity(mid.c), x2.g]),
    ])
    # joint: copy the (c2, a2) legs before feeding the second chart
    b1 = x1._blocks()                     # r1c c2 r1a a2
    g_flat = compose_all([
        x1.gflat,
        copy_blocks(b1, [1, 3]),          # r1c c2 r1a a2 c2 a2
        tensor_all([identity(o) for o in b1] + [x2.gflat]),
        # r1c c2 r1a a2 r2c c3 r2a a3  ->  r1c c2 r2c c3 r1a a2 r2a a3
        permute_blocks(b1 + x2._blocks(), [0, 1, 4, 5, 2, 3, 6, 7]),
    ])
    return Chart(x1.src, x2.dst, residual, g, g_flat)


def chart_tensor(x1: Chart, x2: Chart) -> Chart:
    src = x1.src @ x2.src
    dst = x1.dst @ x2.dst
    residual = x1.residual @ x2.residual
    g = compose_all([
        tensor(x1.g, x2.g),
        permute_blocks([x1.residual.c, x1.dst.c, x2.residual.c, x2.dst.c],
                       [0, 2, 1, 3]),
    ])
    gflat = compose_all([
        permute_blocks([x1.src.c, x2.src.c, x1.src.a, x2.src.a],
                       [0, 2, 1, 3]),
        tensor(x1.gflat, x2.gflat),
        permute_blocks(x1._blocks() + x2._blocks(),
                       [0, 4, 1, 5, 2, 6, 3, 7]),
    ])
    return Chart(src, dst, residual, g, gflat)


def state_chart(iface: Interface, joint: Morphism) -> Chart:
    """The chart from the unit interface carrying a joint state on c (x) a."""
    if joint.dom != UNIT or joint.cod != iface.c @ iface.a:
        raise ObjectMismatch(
            f"state has type {joint.dom!r} -> {joint.cod!r}, expected "
            f"{UNIT!r} -> {iface.c @ iface.a!r}")
    g = compose(joint, select_blocks([iface.c, iface.a], [0]))
    return Chart(UNIT_INTERFACE, iface, UNIT_INTERFACE, g, joint)


def discard_chart(ifaces: Sequence[Interface], keep: Sequence[int]) -> Chart:
    """Unit-residual chart projecting a tensor of interfaces onto some of them."""
    ifaces = list(ifaces)
    keep = list(keep)
    src = interface_tensor(ifaces)
    dst = interface_tensor([ifaces[i] for i in keep])
    n = len(ifaces)
    cs = [i.c for i in ifaces]
    as_ = [i.a for i in ifaces]
    g = select_blocks(cs, keep)
    gflat = select_blocks(cs + as_, keep + [n + i for i in keep])
    return Chart(src, dst, UNIT_INTERFACE, g, gflat)


# ---------------------------------------------------------------------------
# deterministic pairs (z direction)

class ZPair:
    """Covariant deterministic maps on both components of an interface."""

    __slots__ = ("src", "dst", "fc", "fa")

    def __init__(self, src: Interface, dst: Interface,
                 fc: Morphism, fa: Morphism):
        fc = as_det(fc)
        fa = as_det(fa)
        if fc.dom != src.c or fc.cod != dst.c:
            raise ObjectMismatch(
                f"config map has type {fc.dom!r} -> {fc.cod!r}, expected "
                f"{src.c!r} -> {dst.c!r}")
        if fa.dom != src.a or fa.cod != dst.a:
            raise ObjectMismatch(
                f"action map has type {fa.dom!r} -> {fa.cod!r}, expected "
                f"{src.a!r} -> {dst.a!r}")
        self.src = src
        self.dst = dst
        self.fc = fc
        self.fa = fa

    def __eq__(self, other) -> bool:
        return (isinstance(other, ZPair) and self.src == other.src
                and self.dst == other.dst and self.fc == other.fc
                and self.fa == other.fa)

    def __hash__(self):
        return hash((self.src, self.dst, self.fc, self.fa))

    def __repr__(self):
        return f"ZPair({self.src!r} -> {self.dst!r})"


def identity_zpair(iface: Interface) -> ZPair:
    return ZPair(iface, iface, identity(iface.c), identity(iface.a))


def zpair_compose(z1: ZPair, z2: ZPair) -> ZPair:
    if z1.dst != z2.src:
        raise ObjectMismatch(
            f"cannot compose pairs: {z1.dst!r} != {z2.src!r}")
    return ZPair(z1.src, z2.dst, compose(z1.fc, z2.fc),
                 compose(z1.fa, z2.fa))


def zpair_tensor(z1: ZPair, z2: ZPair) -> ZPair:
    return ZPair(z1.src @ z2.src, z1.dst @ z2.dst,
                 tensor(z1.fc, z2.fc), tensor(z1.fa, z2.fa))


# ---------------------------------------------------------------------------
# xy squares: charts horizontally, lenses vertically, with a filling kernel

class XYSquare:
    """A chart-over-chart square along two lenses, with a filling kernel.

    Boundary: ``top : I1 -> I2`` and ``bottom : I3 -> I4`` are charts,
    ``left : I1 -> I3`` and ``right : I2 -> I4`` are lenses, and
    ``residual_lens`` connects the charts' residual interfaces.  The filling
    has type ``c1 (x) a3 -> c_res_top (x) c2 (x) a_res_bottom (x) a4`` and is
    subject to the three equations of ``validate_xy``.
    """

    __slots__ = ("top", "bottom", "left", "right", "residual_lens", "filling")

    def __init__(self, top: Chart, bottom: Chart, left: DetLens,
                 right: DetLens, residual_lens: DetLens, filling: Morphism):
        if top.src != left.src or top.dst != right.src:
            raise BoundaryMismatch("top chart does not match the lens sources")
        if bottom.src != left.dst or bottom.dst != right.dst:
            raise BoundaryMismatch(
                "bottom chart does not match the lens targets")
        if residual_lens.src != top.residual or \
                residual_lens.dst != bottom.residual:
            raise BoundaryMismatch(
                "residual lens does not connect the two residual interfaces")
        want_dom = top.src.c @ bottom.src.a
        want_cod = (top.residual.c @ top.dst.c
                    @ bottom.residual.a @ bottom.dst.a)
        if filling.dom != want_dom or filling.cod != want_cod:
            raise ObjectMismatch(
                f"filling has type {filling.dom!r} -> {filling.cod!r}, "
                f"expected {want_dom!r} -> {want_cod!r}")
        self.top = top
        self.bottom = bottom
        self.left = left
        self.right = right
        self.residual_lens = residual_lens
        self.filling = filling

    def _fill_blocks(self) -> list[FiniteObject]:
        """Codomain blocks of the filling: [c_res1, c2, a_res2, a4]."""
        return [self.top.residual.c, self.top.dst.c,
                self.bottom.residual.a, self.bottom.dst.a]

    def __eq__(self, other) -> bool:
        return (isinstance(other, XYSquare) and self.top == other.top
                and self.bottom == other.bottom and self.left == other.left
                and self.right == other.right
                and self.residual_lens == other.residual_lens
                and morphism_equal(self.filling, other.filling))

    def __hash__(self):
        return hash((self.left, self.right, self.residual_lens))

    def __repr__(self):
        return (f"XYSquare(top={self.top!r}, left={self.left!r}, "
                f"right={self.right!r})")


def validate_xy(sq: XYSquare) -> Optional[str]:
    """None if all three defining equations hold, else the first violated one."""
    top, bottom = sq.top, sq.bottom
    fr, right, left = sq.residual_lens, sq.right, sq.left
    # (a) pushing the top forward map along the residual/right forwards
    #     agrees with going down-then-along
    lhs_a = compose(top.g, tensor(fr.f, right.f))
    rhs_a = compose(left.f, bottom.g)
    if not morphism_equal(lhs_a, rhs_a):
        return "equation (a): forward maps do not commute"
    # (b) the filling, pushed forward on its config outputs, is the
    #     bottom joint map precomposed with the left forward map
    lhs_b = compose(sq.filling,
                    tensor_all([fr.f, right.f,
                                identity(bottom.residual.a),
                                identity(bottom.dst.a)]))
    rhs_b = compose(tensor(left.f, identity(bottom.src.a)), bottom.gflat)
    if not morphism_equal(lhs_b, rhs_b):
        return "equation (b): filling does not project to the bottom chart"
    # (c) pulling actions back through the filling agrees with the top chart
    c1, a3 = top.src.c, bottom.src.a
    lhs_c = compose_all([
        select_blocks([c1, a3], [0, 0, 1]),
        tensor(identity(c1), left.fsharp),
        top.gflat,
    ])
    fb = sq._fill_blocks()
    rhs_c = compose_all([
        sq.filling,
        select_blocks(fb, [0, 1, 0, 2, 1, 3]),
        tensor_all([identity(fb[0]), identity(fb[1]),
                    fr.fsharp, right.fsharp]),
    ])
    if not morphism_equal(lhs_c, rhs_c):
        return "equation (c): filling does not lift the top chart"
    return None


def y_identity_square(chart: Chart) -> XYSquare:
    """The square on identity lenses whose filling is the chart itself."""
    return XYSquare(chart, chart, identity_lens(chart.src),
                    identity_lens(chart.dst), identity_lens(chart.residual),
                    chart.gflat)


def xy_compose_x(s: XYSquare, t: XYSquare) -> XYSquare:
    """Horizontal pasting along a shared middle lens."""
    if s.right != t.left:
        raise BoundaryMismatch(
            "right lens of the first square must equal the left lens of "
            "the second")
    top = chart_compose(s.top, t.top)
    bottom = chart_compose(s.bottom, t.bottom)
    rlens = lens_tensor_all([s.residual_lens, s.right, t.residual_lens])
    sb = s._fill_blocks()                      # r1c c2 r2a a5
    filling = compose_all([
        s.filling,
        copy_blocks(sb, [1, 3]),               # r1c c2 r2a a5 c2 a5
        tensor_all([identity(o) for o in sb] + [t.filling]),
        # r1c c2 r2a a5 rc c3 ra a6 -> r1c c2 rc c3 r2a a5 ra a6
        permute_blocks(sb + t._fill_blocks(), [0, 1, 4, 5, 2, 3, 6, 7]),
    ])
    return XYSquare(top, bottom, s.left, t.right, rlens, filling)


def xy_compose_y(s: XYSquare, t: XYSquare) -> XYSquare:
    """Vertical pasting along a shared middle chart.

    The composite filling is the conditional product of the two evident
    composites over the shared middle data, with the middle then discarded.
    A MarginalMismatch escaping from here means one of the inputs fails
    ``validate_xy`` (valid squares are guaranteed to agree).
    """
    if s.bottom != t.top:
        raise BoundaryMismatch(
            "bottom chart of the first square must equal the top chart of "
            "the second")
    c1 = s.top.src.c
    a5 = t.bottom.src.a
    # phi : c1 a5 -> (top residual outputs) (x) (middle data)
    phi = compose_all([
        select_blocks([c1, a5], [0, 0, 1]),
        tensor_all([identity(c1), s.left.f, identity(a5)]),
        tensor(identity(c1), t.left.fsharp),
        s.filling,
        copy_blocks(s._fill_blocks(), [0, 1]),
        tensor_all([identity(o) for o in s._fill_blocks()]
                   + [s.residual_lens.f, s.right.f]),
        permute_blocks(s._fill_blocks()
                       + [s.bottom.residual.c, s.bottom.dst.c],
                       [0, 1, 4, 5, 2, 3]),
    ])
    # psi : c1 a5 -> (middle data) (x) (bottom action outputs)
    tb = t._fill_blocks()                      # rc3 c4 ra5 a6  (t's view)
    psi = compose_all([
        tensor(s.left.f, identity(a5)),
        t.filling,
        copy_blocks(tb, [0, 2, 1, 3]),
        tensor_all([identity(o) for o in tb]
                   + [t.residual_lens.fsharp, t.right.fsharp]),
        permute_blocks(tb + [t.top.residual.a, t.top.dst.a],
                       [0, 1, 4, 5, 2, 3]),
    ])
    mid = tensor_objects([t.top.residual.c, t.top.dst.c,
                          t.top.residual.a, t.top.dst.a])
    alpha = conditional_product(phi, psi, over=mid.nfactors,
                                default="first")
    out_blocks = [s.top.residual.c, s.top.dst.c, mid,
                  t.bottom.residual.a, t.bottom.dst.a]
    filling = compose(alpha, select_blocks(out_blocks, [0, 1, 3, 4]))
    return XYSquare(s.top, t.bottom, lens_compose(s.left, t.left),
                    lens_compose(s.right, t.right),
                    lens_compose(s.residual_lens, t.residual_lens), filling)


# ---------------------------------------------------------------------------
# thin squares

class YZSquare:
    """Deterministic pairs over lenses; thin (no filling)."""

    __slots__ = ("top", "bottom", "left", "right")

    def __init__(self, top: ZPair, bottom: ZPair,
                 left: DetLens, right: DetLens):
        if top.src != left.src or top.dst != right.src:
            raise BoundaryMismatch("top pair does not match the lens sources")
        if bottom.src != left.dst or bottom.dst != right.dst:
            raise BoundaryMismatch(
                "bottom pair does not match the lens targets")
        self.top = top
        self.bottom = bottom
        self.left = left
        self.right = right

    def __eq__(self, other) -> bool:
        return (isinstance(other, YZSquare) and self.top == other.top
                and self.bottom == other.bottom and self.left == other.left
                and self.right == other.right)

    def __hash__(self):
        return hash((self.top, self.bottom, self.left, self.right))


def validate_yz(sq: YZSquare) -> Optional[str]:
    if compose(sq.left.f, sq.bottom.fc) != compose(sq.top.fc, sq.right.f):
        return "equation (yz): forward config maps do not commute"
    return None


def yz_compose_y(s: YZSquare, t: YZSquare) -> YZSquare:
    if s.bottom != t.top:
        raise BoundaryMismatch("middle pair mismatch")
    return YZSquare(s.top, t.bottom, lens_compose(s.left, t.left),
                    lens_compose(s.right, t.right))


def yz_compose_z(s: YZSquare, t: YZSquare) -> YZSquare:
    if s.right != t.left:
        raise BoundaryMismatch("middle lens mismatch")
    return YZSquare(zpair_compose(s.top, t.top),
                    zpair_compose(s.bottom, t.bottom), s.left, t.right)


class XZSquare:
    """Charts over deterministic pairs; thin, but carries a residual pair."""

    __slots__ = ("top", "bottom", "left", "right", "residual_pair")

    def __init__(self, top: Chart, bottom: Chart, left: ZPair, right: ZPair,
                 residual_pair: ZPair):
        if top.src != left.src or top.dst != right.src:
            raise BoundaryMismatch("top chart does not match the pair sources")
        if bottom.src != left.dst or bottom.dst != right.dst:
            raise BoundaryMismatch(
                "bottom chart does not match the pair targets")
        if residual_pair.src != top.residual or \
                residual_pair.dst != bottom.residual:
            raise BoundaryMismatch(
                "residual pair does not connect the residual interfaces")
        self.top = top
        self.bottom = bottom
        self.left = left
        self.right = right
        self.residual_pair = residual_pair

    def __eq__(self, other) -> bool:
        return (isinstance(other, XZSquare) and self.top == other.top
                and self.bottom == other.bottom and self.left == other.left
                and self.right == other.right
                and self.residual_pair == other.residual_pair)

    def __hash__(self):
        return hash((self.left, self.right, self.residual_pair))


def validate_xz(sq: XZSquare) -> Optional[str]:
    rp, right, left = sq.residual_pair, sq.right, sq.left
    lhs1 = compose(sq.top.g, tensor(rp.fc, right.fc))
    rhs1 = compose(left.fc, sq.bottom.g)
    if not morphism_equal(lhs1, rhs1):
        return "equation (xz-i): forward maps do not commute"
    lhs2 = compose(sq.top.gflat,
                   tensor_all([rp.fc, right.fc, rp.fa, right.fa]))
    rhs2 = compose(tensor(left.fc, left.fa), sq.bottom.gflat)
    if not morphism_equal(lhs2, rhs2):
        return "equation (xz-ii): joint maps do not commute"
    return None


def xz_compose_x(u: XZSquare, v: XZSquare) -> XZSquare:
    """Horizontal pasting; the composite residual pair is a triple tensor."""
    if u.right != v.left:
        raise BoundaryMismatch("middle pair mismatch")
    top = chart_compose(u.top, v.top)
    bottom = chart_compose(u.bottom, v.bottom)
    rp = ZPair(top.residual, bottom.residual,
               tensor_all([u.residual_pair.fc, u.right.fc,
                           v.residual_pair.fc]),
               tensor_all([u.residual_pair.fa, u.right.fa,
                           v.residual_pair.fa]))
    return XZSquare(top, bottom, u.left, v.right, rp)


def xz_compose_z(u: XZSquare, v: XZSquare) -> XZSquare:
    if u.bottom != v.top:
        raise BoundaryMismatch("middle chart mismatch")
    return XZSquare(u.top, v.bottom, zpair_compose(u.left, v.left),
                    zpair_compose(u.right, v.right),
                    zpair_compose(u.residual_pair, v.residual_pair))


def validate_xyz(xy_front: XYSquare, xy_back: XYSquare,
                 xz_top: XZSquare, xz_bottom: XZSquare,
                 yz_left: YZSquare, yz_right: YZSquare) -> Optional[str]:
    """Boundary predicate for a cube: shared edges agree, all faces valid.

    There is at most one cube per boundary, so a cube *is* its boundary;
    this checks that the six faces paste together and each one holds.
    """
    edge_checks = [
        (xy_front.top == xz_top.top, "front/top charts"),
        (xy_back.top == xz_top.bottom, "back/top charts"),
        (xy_front.bottom == xz_bottom.top, "front/bottom charts"),
        (xy_back.bottom == xz_bottom.bottom, "back/bottom charts"),
        (xy_front.left == yz_left.left, "front/left lenses"),
        (xy_back.left == yz_left.right, "back/left lenses"),
        (xy_front.right == yz_right.left, "front/right lenses"),
        (xy_back.right == yz_right.right, "back/right lenses"),
        (xz_top.left == yz_left.top, "top/left pairs"),
        (xz_top.right == yz_right.top, "top/right pairs"),
        (xz_bottom.left == yz_left.bottom, "bottom/left pairs"),
        (xz_bottom.right == yz_right.bottom, "bottom/right pairs"),
    ]
    for ok, name in edge_checks:
        if not ok:
            return f"cube boundary: {name} do not agree"
    faces = [(validate_xy(xy_front), "front"), (validate_xy(xy_back), "back"),
             (validate_xz(xz_top), "top"), (validate_xz(xz_bottom), "bottom"),
             (validate_yz(yz_left), "left"),
             (validate_yz(yz_right), "right")]
    for msg, name in faces:
        if msg is not None:
            return f"cube face {name}: {msg}"
    # the residual data forms one more square that must commute
    residual_face = YZSquare(xz_top.residual_pair, xz_bottom.residual_pair,
                             xy_front.residual_lens, xy_back.residual_lens)
    msg = validate_yz(residual_face)
    if msg is not None:
        return f"cube residual face: {msg}"
    return None


# ---------------------------------------------------------------------------
# squares arising from environments and wirings

def environment_cell(lens: DetLens, r_joint: Morphism,
                     p_joint: Optional[Morphism] = None) -> XYSquare:
    """The square relating an environment state to its view through a lens.

    ``r_joint : 1 -> c_src (x) a_dst`` couples source configurations with
    target actions.  The top chart carries the induced joint on the source
    interface (configs with pulled-back actions), the bottom chart the
    pushed-forward joint on the target interface, and the filling is
    ``r_joint`` itself.  If ``p_joint`` is given it is used for the top
    chart instead of being derived (useful to validate candidates).
    """
    c1, a2 = lens.src.c, lens.dst.a
    if r_joint.dom != UNIT or r_joint.cod != c1 @ a2:
        raise ObjectMismatch(
            f"environment joint has type {r_joint.dom!r} -> {r_joint.cod!r},"
            f" expected {UNIT!r} -> {c1 @ a2!r}")
    if p_joint is None:
        p_joint = compose_all([
            r_joint,
            select_blocks([c1, a2], [0, 0, 1]),
            tensor(identity(c1), lens.fsharp),
        ])
    q_joint = compose(r_joint, tensor(lens.f, identity(a2)))
    top = state_chart(lens.src, p_joint)
    bottom = state_chart(lens.dst, q_joint)
    return XYSquare(top, bottom, identity_lens(UNIT_INTERFACE), lens,
                    identity_lens(UNIT_INTERFACE), r_joint)


def wired_projection_square(lenses: Sequence[DetLens],
                            keep: int) -> XYSquare:
    """Discard-charts over a tensor of lenses, projecting onto one of them."""
    lenses = list(lenses)
    top = discard_chart([l.src for l in lenses], [keep])
    bottom = discard_chart([l.dst for l in lenses], [keep])
    n = len(lenses)
    parts = [l.src.c for l in lenses] + [l.dst.a for l in lenses]
    filling = select_blocks(parts, [keep, n + keep])
    return XYSquare(top, bottom, lens_tensor_all(lenses), lenses[keep],
                    identity_lens(UNIT_INTERFACE), filling)
