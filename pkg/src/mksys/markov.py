"""Finite kernels in three flavors, with exact arithmetic throughout.

Three kinds of morphism between finite objects live side by side:

* ``StochKernel`` — rows are rational probability distributions (each row sums
  to exactly 1).  Stored sparsely as sorted ``(column, weight)`` pairs with
  zeros dropped, so structural equality is exact equality of distributions.
* ``PossKernel``  — rows are nonempty subsets of the codomain (possibilistic
  nondeterminism).  Stored as frozensets of column indices.
* ``DetKernel``   — a total function on indices.  Deterministic kernels embed
  in both worlds and are promoted implicitly when composed or tensored with
  the other two; stochastic and possibilistic kernels never mix.

Composition is diagrammatic: ``compose(f, g)`` runs ``f`` first.  ``f >> g``
and ``f @ g`` are shorthand for compose and tensor.
"""

from __future__ import annotations

from collections import namedtuple
from fractions import Fraction
from typing import Callable, Iterable, Sequence, Union

from .errors import (BadFactorSelection, InstanceMismatch, MarginalMismatch,
                     ObjectMismatch, ShapeMismatch, ValidationError)
from .objects import UNIT, FiniteObject, tensor_objects

_ONE = Fraction(1)


class Kernel:
    """Common behavior of the three kernel kinds."""

    __slots__ = ("dom", "cod")
    instance = "abstract"

    def __init__(self, dom: FiniteObject, cod: FiniteObject):
        self.dom = dom
        self.cod = cod

    def __rshift__(self, other: "Kernel") -> "Kernel":
        return compose(self, other)

    def __matmul__(self, other: "Kernel") -> "Kernel":
        return tensor(self, other)


class StochKernel(Kernel):
    """Row-stochastic matrix with exact rational entries, stored sparsely."""

    __slots__ = ("rows",)
    instance = "stoch"

    def __init__(self, dom: FiniteObject, cod: FiniteObject,
                 rows: Iterable[Iterable[tuple[int, Fraction]]]):
        super().__init__(dom, cod)
        canon = []
        for i, row in enumerate(rows):
            items = row.items() if isinstance(row, dict) else row
            acc: dict[int, Fraction] = {}
            for col, w in items:
                w = Fraction(w)
                if w < 0:
                    raise ValidationError(
                        f"negative weight {w} in row {i}")
                if not 0 <= col < cod.size:
                    raise ValidationError(
                        f"column {col} out of range in row {i}")
                if w:
                    acc[col] = acc.get(col, 0) + w
            total = sum(acc.values(), Fraction(0))
            if total != 1:
                raise ValidationError(
                    f"row {i} sums to {total}, expected exactly 1")
            canon.append(tuple(sorted(acc.items())))
        if len(canon) != dom.size:
            raise ShapeMismatch(
                f"{len(canon)} rows for a domain of size {dom.size}")
        self.rows = tuple(canon)

    @classmethod
    def _raw(cls, dom, cod, rows) -> "StochKernel":
        """Internal: rows already canonical (sorted, zero-free, normalized)."""
        k = cls.__new__(cls)
        Kernel.__init__(k, dom, cod)
        k.rows = rows
        return k

    @classmethod
    def from_dense(cls, dom: FiniteObject, cod: FiniteObject,
                   matrix: Sequence[Sequence]) -> "StochKernel":
        return cls(dom, cod,
                   [[(j, Fraction(w)) for j, w in enumerate(row)]
                    for row in matrix])

    def dense(self) -> list[list[Fraction]]:
        out = []
        for row in self.rows:
            d = [Fraction(0)] * self.cod.size
            for col, w in row:
                d[col] = w
            out.append(d)
        return out

    def __eq__(self, other) -> bool:
        return (isinstance(other, StochKernel) and self.dom == other.dom
                and self.cod == other.cod and self.rows == other.rows)

    def __hash__(self):
        return hash((self.dom, self.cod, self.rows))

    def __repr__(self):
        return f"StochKernel({self.dom!r} -> {self.cod!r})"


class PossKernel(Kernel):
    """Total relation: each domain point maps to a nonempty set of outcomes."""

    __slots__ = ("rows",)
    instance = "poss"

    def __init__(self, dom: FiniteObject, cod: FiniteObject,
                 rows: Iterable[Iterable[int]]):
        super().__init__(dom, cod)
        canon = []
        for i, row in enumerate(rows):
            s = frozenset(row)
            if not s:
                raise ValidationError(f"row {i} is empty; rows must be "
                                      "nonempty (the relation is total)")
            for col in s:
                if not 0 <= col < cod.size:
                    raise ValidationError(
                        f"column {col} out of range in row {i}")
            canon.append(s)
        if len(canon) != dom.size:
            raise ShapeMismatch(
                f"{len(canon)} rows for a domain of size {dom.size}")
        self.rows = tuple(canon)

    @classmethod
    def _raw(cls, dom, cod, rows) -> "PossKernel":
        k = cls.__new__(cls)
        Kernel.__init__(k, dom, cod)
        k.rows = rows
        return k

    @classmethod
    def from_dense(cls, dom, cod, matrix) -> "PossKernel":
        return cls(dom, cod,
                   [[j for j, hit in enumerate(row) if hit] for row in matrix])

    def dense(self) -> list[list[bool]]:
        return [[col in row for col in range(self.cod.size)]
                for row in self.rows]

    def __eq__(self, other) -> bool:
        return (isinstance(other, PossKernel) and self.dom == other.dom
                and self.cod == other.cod and self.rows == other.rows)

    def __hash__(self):
        return hash((self.dom, self.cod, self.rows))

    def __repr__(self):
        return f"PossKernel({self.dom!r} -> {self.cod!r})"


class DetKernel(Kernel):
    """A total function, stored as a tuple of codomain indices."""

    __slots__ = ("mapping",)
    instance = "det"

    def __init__(self, dom: FiniteObject, cod: FiniteObject,
                 mapping: Iterable[int]):
        super().__init__(dom, cod)
        mapping = tuple(mapping)
        if len(mapping) != dom.size:
            raise ShapeMismatch(
                f"mapping of length {len(mapping)} for a domain of size "
                f"{dom.size}")
        for i, m in enumerate(mapping):
            if not 0 <= m < cod.size:
                raise ValidationError(f"image {m} of {i} out of range")
        self.mapping = mapping

    @classmethod
    def from_function(cls, dom: FiniteObject, cod: FiniteObject,
                      fn: Callable[[tuple], tuple]) -> "DetKernel":
        """Build from a function on label tuples."""
        return cls(dom, cod, (cod.encode(fn(p)) for p in dom.points()))

    def __call__(self, point: tuple) -> tuple:
        return self.cod.decode(self.mapping[self.dom.encode(point)])

    def as_stoch(self) -> StochKernel:
        return StochKernel._raw(self.dom, self.cod,
                                tuple(((m, _ONE),) for m in self.mapping))

    def as_poss(self) -> PossKernel:
        return PossKernel._raw(self.dom, self.cod,
                               tuple(frozenset((m,)) for m in self.mapping))

    def is_bijection(self) -> bool:
        return (self.dom.size == self.cod.size
                and len(set(self.mapping)) == self.dom.size)

    def __eq__(self, other) -> bool:
        return (isinstance(other, DetKernel) and self.dom == other.dom
                and self.cod == other.cod and self.mapping == other.mapping)

    def __hash__(self):
        return hash((self.dom, self.cod, self.mapping))

    def __repr__(self):
        return f"DetKernel({self.dom!r} -> {self.cod!r})"


Morphism = Union[StochKernel, PossKernel, DetKernel]


# ---------------------------------------------------------------------------
# instance alignment

def _align(f: Morphism, g: Morphism) -> tuple[Morphism, Morphism]:
    """Promote deterministic sides so both kernels share an instance."""
    if f.instance == g.instance:
        return f, g
    kinds = {f.instance, g.instance}
    if kinds == {"stoch", "poss"}:
        raise InstanceMismatch(
            "cannot mix stochastic and possibilistic kernels")
    if f.instance == "det":
        return (f.as_stoch() if g.instance == "stoch" else f.as_poss()), g
    return f, (g.as_stoch() if f.instance == "stoch" else g.as_poss())


def morphism_equal(f: Morphism, g: Morphism) -> bool:
    """Exact equality, promoting deterministic kernels where needed."""
    if f.dom != g.dom or f.cod != g.cod:
        return False
    if f.instance == g.instance:
        return f == g
    f, g = _align(f, g)
    return f == g


# ---------------------------------------------------------------------------
# composition and tensor

def compose(f: Morphism, g: Morphism) -> Morphism:
    """Diagrammatic composite: run f, then g."""
    if f.cod != g.dom:
        raise ObjectMismatch(
            f"cannot compose: middle objects differ ({f.cod!r} vs {g.dom!r})")
    # fast paths that avoid materializing deterministic promotions
    if isinstance(f, DetKernel):
        if isinstance(g, DetKernel):
            return DetKernel(f.dom, g.cod,
                             (g.mapping[m] for m in f.mapping))
        if isinstance(g, StochKernel):
            return StochKernel._raw(f.dom, g.cod,
                                    tuple(g.rows[m] for m in f.mapping))
        return PossKernel._raw(f.dom, g.cod,
                               tuple(g.rows[m] for m in f.mapping))
    if isinstance(g, DetKernel):
        if isinstance(f, StochKernel):
            rows = []
            for row in f.rows:
                acc: dict[int, Fraction] = {}
                for col, w in row:
                    m = g.mapping[col]
                    acc[m] = acc.get(m, 0) + w
                rows.append(tuple(sorted(acc.items())))
            return StochKernel._raw(f.dom, g.cod, tuple(rows))
        return PossKernel._raw(f.dom, g.cod,
                               tuple(frozenset(g.mapping[c] for c in row)
                                     for row in f.rows))
    if isinstance(f, StochKernel) and isinstance(g, StochKernel):
        rows = []
        for row in f.rows:
            acc: dict[int, Fraction] = {}
            for mid, w in row:
                for col, v in g.rows[mid]:
                    p = w * v
                    acc[col] = acc.get(col, 0) + p
            rows.append(tuple(sorted(acc.items())))
        return StochKernel._raw(f.dom, g.cod, tuple(rows))
    if isinstance(f, PossKernel) and isinstance(g, PossKernel):
        return PossKernel._raw(
            f.dom, g.cod,
            tuple(frozenset().union(*(g.rows[mid] for mid in row))
                  for row in f.rows))
    raise InstanceMismatch("cannot mix stochastic and possibilistic kernels")


def compose_all(kernels: Sequence[Morphism]) -> Morphism:
    out = kernels[0]
    for k in kernels[1:]:
        out = compose(out, k)
    return out


def tensor(f: Morphism, g: Morphism) -> Morphism:
    """Parallel composite on concatenated factor lists."""
    dom = f.dom.tensor(g.dom)
    cod = f.cod.tensor(g.cod)
    cg = g.cod.size
    if isinstance(f, DetKernel) and isinstance(g, DetKernel):
        return DetKernel(dom, cod,
                         (mf * cg + mg for mf in f.mapping for mg in g.mapping))
    if isinstance(f, PossKernel) or isinstance(g, PossKernel):
        if isinstance(f, StochKernel) or isinstance(g, StochKernel):
            raise InstanceMismatch(
                "cannot mix stochastic and possibilistic kernels")
        fp = f.as_poss() if isinstance(f, DetKernel) else f
        gp = g.as_poss() if isinstance(g, DetKernel) else g
        rows = tuple(frozenset(cf * cg + cgg for cf in rf for cgg in rg)
                     for rf in fp.rows for rg in gp.rows)
        return PossKernel._raw(dom, cod, rows)
    fs = f.as_stoch() if isinstance(f, DetKernel) else f
    gs = g.as_stoch() if isinstance(g, DetKernel) else g
    rows = []
    for rf in fs.rows:
        for rg in gs.rows:
            row = [(cf * cg + cgg, w * v) for cf, w in rf for cgg, v in rg]
            row.sort()
            rows.append(tuple(row))
    return StochKernel._raw(dom, cod, tuple(rows))


def tensor_all(kernels: Sequence[Morphism]) -> Morphism:
    out = kernels[0]
    for k in kernels[1:]:
        out = tensor(out, k)
    return out


# ---------------------------------------------------------------------------
# structural deterministic kernels

def identity(obj: FiniteObject) -> DetKernel:
    return DetKernel(obj, obj, range(obj.size))


def _factor_strides(obj: FiniteObject) -> tuple[int, ...]:
    strides = [1] * obj.nfactors
    for i in range(obj.nfactors - 2, -1, -1):
        strides[i] = strides[i + 1] * obj.shape[i + 1]
    return tuple(strides)


def _rearrange_kernel(dom: FiniteObject, out_factors: Sequence[int]) -> DetKernel:
    """Deterministic map copying/permuting/dropping factors of the domain.

    ``out_factors`` lists, for each output factor slot, which domain factor
    feeds it.  Repetition copies a factor; omission discards it.
    """
    for i in out_factors:
        if not 0 <= i < dom.nfactors:
            raise BadFactorSelection(
                f"factor index {i} out of range for {dom!r}")
    cod = FiniteObject._from_factors(
        tuple(dom.factors[i] for i in out_factors))
    in_strides = _factor_strides(dom)
    out_strides = _factor_strides(cod)
    shape = dom.shape
    mapping = []
    for idx in range(dom.size):
        total = 0
        for slot, i in enumerate(out_factors):
            coord = (idx // in_strides[i]) % shape[i]
            total += coord * out_strides[slot]
        mapping.append(total)
    return DetKernel(dom, cod, mapping)


def permute_factors(obj: FiniteObject, order: Sequence[int]) -> DetKernel:
    order = tuple(order)
    if sorted(order) != list(range(obj.nfactors)):
        raise BadFactorSelection(
            f"{order} is not a permutation of the {obj.nfactors} factors")
    return _rearrange_kernel(obj, order)


def select_factors(obj: FiniteObject, keep: Sequence[int]) -> DetKernel:
    """Projection onto the selected factors, in the order given."""
    keep = tuple(keep)
    if len(set(keep)) != len(keep):
        raise BadFactorSelection(f"duplicate factor indices {keep}")
    return _rearrange_kernel(obj, keep)


def copy_map(obj: FiniteObject) -> DetKernel:
    """The diagonal obj -> obj (x) obj."""
    n = obj.nfactors
    return _rearrange_kernel(obj, tuple(range(n)) * 2)


def discard_map(obj: FiniteObject) -> DetKernel:
    """The unique map to the unit."""
    return DetKernel(obj, UNIT, (0,) * obj.size)


def swap_map(x: FiniteObject, y: FiniteObject) -> DetKernel:
    nx = x.nfactors
    ny = y.nfactors
    return _rearrange_kernel(
        x.tensor(y), tuple(range(nx, nx + ny)) + tuple(range(nx)))


ComonoidStructure = namedtuple("ComonoidStructure",
                               ["copy", "discard", "swap", "identity"])


def comonoid_structure(obj: FiniteObject) -> ComonoidStructure:
    """Copy/discard/swap/identity for one object; swap takes the other side."""
    return ComonoidStructure(copy=copy_map(obj),
                             discard=discard_map(obj),
                             swap=lambda other: swap_map(obj, other),
                             identity=identity(obj))


# -- block-level wiring helpers ---------------------------------------------
# Pipelines in the higher modules manipulate labeled groups of factors
# ("blocks"); these helpers expand block indices to factor indices.

def _expand(parts: Sequence[FiniteObject], blocks: Sequence[int]) -> list[int]:
    offsets = []
    k = 0
    for p in parts:
        offsets.append(k)
        k += p.nfactors
    out = []
    for b in blocks:
        if not 0 <= b < len(parts):
            raise BadFactorSelection(f"block index {b} out of range")
        out.extend(range(offsets[b], offsets[b] + parts[b].nfactors))
    return out


def permute_blocks(parts: Sequence[FiniteObject],
                   order: Sequence[int]) -> DetKernel:
    if sorted(order) != list(range(len(parts))):
        raise BadFactorSelection(
            f"{tuple(order)} is not a permutation of {len(parts)} blocks")
    return _rearrange_kernel(tensor_objects(parts), _expand(parts, order))


def select_blocks(parts: Sequence[FiniteObject],
                  keep: Sequence[int]) -> DetKernel:
    """Project onto blocks (in the order given; repetition copies)."""
    return _rearrange_kernel(tensor_objects(parts), _expand(parts, keep))


def copy_blocks(parts: Sequence[FiniteObject],
                extra: Sequence[int]) -> DetKernel:
    """Keep everything and append copies of the selected blocks."""
    n = len(parts)
    return _rearrange_kernel(tensor_objects(parts),
                             _expand(parts, tuple(range(n)) + tuple(extra)))


def discard_blocks(parts: Sequence[FiniteObject],
                   drop: Sequence[int]) -> DetKernel:
    dropset = set(drop)
    keep = [i for i in range(len(parts)) if i not in dropset]
    return select_blocks(parts, keep)


# ---------------------------------------------------------------------------
# states and simple distributions

def dirac(obj: FiniteObject, point) -> DetKernel:
    """The point mass at a label tuple (or bare label for atomic objects)."""
    if obj.nfactors == 1 and not isinstance(point, tuple):
        point = (point,)
    return DetKernel(UNIT, obj, (obj.encode(point),))


def uniform_dist(obj: FiniteObject) -> StochKernel:
    if obj.size == 0:
        raise ValidationError("cannot put a distribution on an empty object")
    w = Fraction(1, obj.size)
    return StochKernel._raw(UNIT, obj,
                            (tuple((i, w) for i in range(obj.size)),))


# ---------------------------------------------------------------------------
# Markov structure: marginals, determinism, conditionals

def marginal(p: Morphism, keep: Sequence[int]) -> Morphism:
    """Push forward onto the selected codomain factors (order given).

    Equals composition with a tensor of identities and discards whenever
    ``keep`` is increasing; an arbitrary order additionally permutes.
    """
    return compose(p, select_factors(p.cod, keep))


def is_deterministic(f: Morphism) -> bool:
    """True iff f commutes with copying: f;copy = copy;(f (x) f)."""
    if isinstance(f, DetKernel):
        return True
    if isinstance(f, StochKernel):
        return all(len(row) == 1 and row[0][1] == 1 for row in f.rows)
    return all(len(row) == 1 for row in f.rows)


def as_det(f: Morphism) -> DetKernel:
    """Extract the underlying function of a deterministic kernel."""
    if isinstance(f, DetKernel):
        return f
    if not is_deterministic(f):
        raise InstanceMismatch("kernel is not deterministic")
    if isinstance(f, StochKernel):
        return DetKernel(f.dom, f.cod, (row[0][0] for row in f.rows))
    return DetKernel(f.dom, f.cod, (next(iter(row)) for row in f.rows))


def conditional(phi: Morphism, split: int, default: str = "uniform") -> Morphism:
    """Conditional of ``phi : A -> X (x) Y`` on the first ``split`` factors.

    Returns a kernel ``A (x) X -> Y`` satisfying the reconstruction identity
    (recover ``phi`` from its X-marginal and the conditional).  Cells where
    the X-marginal has no mass are filled per ``default``:

    * ``"uniform"`` — uniform row (stochastic) or the full set (possibilistic);
    * ``"first"``   — point mass / singleton on the first label.

    Any choice satisfies the reconstruction identity.
    """
    cod = phi.cod
    if not 0 <= split <= cod.nfactors:
        raise BadFactorSelection(
            f"split {split} out of range for {cod.nfactors} factors")
    if default not in ("uniform", "first"):
        raise ValidationError(f"unknown zero-mass default {default!r}")
    x_obj = cod.restrict(range(split))
    y_obj = cod.restrict(range(split, cod.nfactors))
    new_dom = phi.dom.tensor(x_obj)
    ysz = y_obj.size
    if isinstance(phi, DetKernel):
        if default == "first":
            mapping = []
            for a in range(phi.dom.size):
                x, y = divmod(phi.mapping[a], ysz)
                mapping.extend(y if xx == x else 0
                               for xx in range(x_obj.size))
            return DetKernel(new_dom, y_obj, tuple(mapping))
        phi = phi.as_stoch()
    if isinstance(phi, StochKernel):
        if default == "uniform":
            fill = tuple((y, Fraction(1, ysz)) for y in range(ysz))
        else:
            fill = ((0, _ONE),)
        rows = []
        for a in range(phi.dom.size):
            groups: dict[int, list] = {}
            for col, w in phi.rows[a]:
                x, y = divmod(col, ysz)
                groups.setdefault(x, []).append((y, w))
            for x in range(x_obj.size):
                entries = groups.get(x)
                if entries:
                    total = sum(w for _, w in entries)
                    rows.append(tuple(sorted(
                        (y, w / total) for y, w in entries)))
                else:
                    rows.append(fill)
        return StochKernel._raw(new_dom, y_obj, tuple(rows))
    # possibilistic
    fill_p = (frozenset(range(ysz)) if default == "uniform"
              else frozenset((0,)))
    rows_p = []
    for a in range(phi.dom.size):
        groups_p: dict[int, set] = {}
        for col in phi.rows[a]:
            x, y = divmod(col, ysz)
            groups_p.setdefault(x, set()).add(y)
        for x in range(x_obj.size):
            got = groups_p.get(x)
            rows_p.append(frozenset(got) if got else fill_p)
    return PossKernel._raw(new_dom, y_obj, tuple(rows_p))


def joint_from_conditional(m: Morphism, c: Morphism) -> Morphism:
    """Rebuild ``A -> X (x) Y`` from the marginal ``m : A -> X`` and the
    conditional ``c : A (x) X -> Y``."""
    a_obj, x_obj = m.dom, m.cod
    if c.dom != a_obj.tensor(x_obj):
        raise ObjectMismatch("conditional domain must be A (x) X")
    k = compose(copy_map(a_obj), tensor(identity(a_obj), m))   # A -> A X
    k = compose(k, copy_blocks([a_obj, x_obj], [1]))           # -> A X X
    k = compose(k, permute_blocks([a_obj, x_obj, x_obj], [1, 0, 2]))
    return compose(k, tensor(identity(x_obj), c))              # -> X Y


def conditional_product(f: Morphism, g: Morphism, over: int,
                        default: str = "uniform") -> Morphism:
    """Glue ``f : A -> X (x) Y`` and ``g : A -> Y (x) Z`` along Y.

    ``over`` counts the shared trailing factors of ``cod(f)`` / leading
    factors of ``cod(g)``.  Both Y-marginals must agree exactly, else
    MarginalMismatch.  The result ``A -> X (x) Y (x) Z`` has f and g as its
    marginals and displays the conditional independence of X and Z over Y;
    it does not depend on the zero-mass ``default`` used internally.
    """
    if f.dom != g.dom:
        raise ObjectMismatch("conditional_product needs a shared domain")
    nf = f.cod.nfactors
    if not 0 <= over <= min(nf, g.cod.nfactors):
        raise BadFactorSelection(f"cannot share {over} factors")
    x_obj = f.cod.restrict(range(nf - over))
    y_obj = f.cod.restrict(range(nf - over, nf))
    if y_obj != g.cod.restrict(range(over)):
        raise ObjectMismatch(
            f"shared objects differ: {y_obj!r} vs "
            f"{g.cod.restrict(range(over))!r}")
    f_y = marginal(f, range(nf - over, nf))
    g_y = marginal(g, range(over))
    if not morphism_equal(f_y, g_y):
        raise MarginalMismatch(
            "the two arguments disagree on the shared marginal")
    cond = conditional(g, over, default)                       # A Y -> Z
    a_obj = f.dom
    k = compose(copy_map(a_obj), tensor(identity(a_obj), f))   # A -> A X Y
    k = compose(k, copy_blocks([a_obj, x_obj, y_obj], [2]))    # -> A X Y Y
    k = compose(k, permute_blocks([a_obj, x_obj, y_obj, y_obj],
                                  [1, 2, 0, 3]))               # -> X Y A Y
    return compose(k, tensor_all([identity(x_obj), identity(y_obj), cond]))


def displays_cond_indep(p: Morphism,
                        groups: tuple[Sequence[int], Sequence[int],
                                      Sequence[int]]) -> bool:
    """Whether the state ``p : 1 -> V`` displays X _||_ Z given Y.

    ``groups`` lists three disjoint tuples of codomain factor indices
    (X, Y, Z); factors outside the groups are marginalized away first, so
    this realizes independence statements between arbitrary factor groups.
    """
    xs, ys, zs = (tuple(gr) for gr in groups)
    picked = xs + ys + zs
    if len(set(picked)) != len(picked):
        raise BadFactorSelection(f"overlapping factor groups {groups}")
    if not p.dom.is_unit():
        raise ObjectMismatch("conditional independence is checked on states "
                             "(unit-domain morphisms)")
    j = marginal(p, picked)
    y_obj = j.cod.restrict(range(len(xs), len(xs) + len(ys)))
    z_obj = j.cod.restrict(range(len(xs) + len(ys), j.cod.nfactors))
    ysz, zsz = y_obj.size, z_obj.size
    if isinstance(j, DetKernel):
        j = j.as_stoch()
    if isinstance(j, StochKernel):
        table: dict[tuple[int, int, int], Fraction] = {}
        m_y: dict[int, Fraction] = {}
        m_xy: dict[tuple[int, int], Fraction] = {}
        m_yz: dict[tuple[int, int], Fraction] = {}
        for col, w in j.rows[0]:
            xy, z = divmod(col, zsz)
            x, y = divmod(xy, ysz)
            table[(x, y, z)] = w
            m_y[y] = m_y.get(y, 0) + w
            m_xy[(x, y)] = m_xy.get((x, y), 0) + w
            m_yz[(y, z)] = m_yz.get((y, z), 0) + w
        by_y_x: dict[int, list[int]] = {}
        for (x, y) in m_xy:
            by_y_x.setdefault(y, []).append(x)
        by_y_z: dict[int, list[int]] = {}
        for (y, z) in m_yz:
            by_y_z.setdefault(y, []).append(z)
        for y, wy in m_y.items():
            for x in by_y_x[y]:
                wxy = m_xy[(x, y)]
                for z in by_y_z[y]:
                    if table.get((x, y, z), Fraction(0)) * wy != wxy * m_yz[(y, z)]:
                        return False
        return True
    # possibilistic: support must be the fiberwise product of the projections
    supp = j.rows[0]
    s_xy = set()
    s_yz = set()
    for col in supp:
        xy, z = divmod(col, zsz)
        x, y = divmod(xy, ysz)
        s_xy.add((x, y))
        s_yz.add((y, z))
    expected = set()
    for (x, y) in s_xy:
        for (y2, z) in s_yz:
            if y2 == y:
                expected.add((x * ysz + y) * zsz + z)
    return expected == set(supp)


def almost_surely_equal(phi: Morphism, f: Morphism, g: Morphism) -> bool:
    """Whether f and g agree on every outcome phi can produce.

    Checked by the displayed definition: couple each of f, g with the
    identity along a copy of phi's output and compare the joints.
    """
    if phi.cod != f.dom or f.dom != g.dom or f.cod != g.cod:
        raise ObjectMismatch("almost_surely_equal needs phi : A -> W and "
                             "f, g : W -> V")
    w_obj = phi.cod
    shared = compose(phi, copy_map(w_obj))
    lhs = compose(shared, tensor(f, identity(w_obj)))
    rhs = compose(shared, tensor(g, identity(w_obj)))
    return morphism_equal(lhs, rhs)
