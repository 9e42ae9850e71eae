"""Chain-indexed machines that answer within the step.

The readout-style systems of :mod:`mksys.timesys` emit outputs computed
from the stored state alone.  The machines here are the other classical
flavor: one combined step ``input (x) state -> output (x) state`` per
edge, so the fresh output may depend on the fresh input.  They compose
by running side by side on a product state, tensor by interleaving, and
readout-style systems embed by updating first and exposing after.

The parametric variant feeds every step one extra point from a family
of parameter objects; its step families must additionally commute with
all the restriction maps.
"""

from typing import Sequence

from .errors import (NaturalityViolation, ObjectMismatch,
                     PreconditionViolation, ShapeMismatch)
from .markov import (DetKernel, Morphism, as_det, compose, compose_all,
                     identity, morphism_equal, select_blocks, tensor,
                     tensor_all)
from .objects import UNIT
from .timesys import GSystem, IndexedObject


def indexed_tensor(a: IndexedObject, b: IndexedObject) -> IndexedObject:
    """Nodewise tensor of two families over the same chain."""
    if a.horizon != b.horizon:
        raise ShapeMismatch("tensored families must share one horizon")
    return IndexedObject(
        [x @ y for x, y in zip(a.objects, b.objects)],
        [tensor(r, s) for r, s in zip(a.restrictions, b.restrictions)])


class GMealy:
    """A machine whose edge-``n`` step maps ``src(n+1) (x) state(n)`` to
    ``dst(n+1) (x) state(n+1)``.

    One condition is imposed: discarding the output and restricting the
    new state must return the old state untouched, so the step may only
    *extend* what the state remembers.
    """

    __slots__ = ("src", "dst", "state", "steps")

    def __init__(self, src: IndexedObject, dst: IndexedObject,
                 state: IndexedObject, steps: Sequence[Morphism]):
        for name, fam in (("src", src), ("dst", dst), ("state", state)):
            if not isinstance(fam, IndexedObject):
                raise ShapeMismatch(f"{name} must be an IndexedObject")
        horizon = src.horizon
        if dst.horizon != horizon or state.horizon != horizon:
            raise ShapeMismatch("src, dst and state must share one horizon")
        steps = tuple(steps)
        if len(steps) != horizon:
            raise ShapeMismatch("need one step per edge")
        for n, f in enumerate(steps):
            if (f.dom != src.objects[n + 1] @ state.objects[n]
                    or f.cod != dst.objects[n + 1] @ state.objects[n + 1]):
                raise ObjectMismatch(f"step {n} has the wrong boundary")
        for n, f in enumerate(steps):
            kept = compose_all([
                f,
                select_blocks([dst.objects[n + 1], state.objects[n + 1]],
                              [1]),
                state.restrictions[n],
            ])
            shadow = select_blocks([src.objects[n + 1], state.objects[n]],
                                   [1])
            if not morphism_equal(kept, shadow):
                raise NaturalityViolation(
                    f"edge {n}: stepping then restricting must return the "
                    f"current state")
        self.src = src
        self.dst = dst
        self.state = state
        self.steps = steps

    @property
    def horizon(self) -> int:
        return self.src.horizon

    def __eq__(self, other) -> bool:
        return (isinstance(other, GMealy)
                and self.src == other.src and self.dst == other.dst
                and self.state == other.state
                and all(morphism_equal(a, b)
                        for a, b in zip(self.steps, other.steps)))

    def __repr__(self) -> str:
        return f"GMealy(horizon={self.horizon})"


def stateless_mealy(src: IndexedObject, dst: IndexedObject,
                    kernels: Sequence[Morphism]) -> GMealy:
    """One kernel per edge, no memory at all."""
    return GMealy(src, dst, IndexedObject.constant(UNIT, src.horizon),
                  kernels)


def mealy_identity(obj: IndexedObject) -> GMealy:
    return stateless_mealy(obj, obj,
                           [identity(o) for o in obj.objects[1:]])


def mealy_compose(f: GMealy, g: GMealy) -> GMealy:
    """Run ``f`` and hand its output to ``g``, carrying both states."""
    if f.dst != g.src:
        raise ObjectMismatch("machines do not meet on a common boundary")
    steps = []
    for n in range(f.horizon):
        b = f.dst.objects[n + 1]
        c = g.dst.objects[n + 1]
        s1 = f.state.objects[n + 1]
        t0, t1 = g.state.objects[n], g.state.objects[n + 1]
        steps.append(compose_all([
            tensor(f.steps[n], identity(t0)),
            select_blocks([b, s1, t0], [0, 2, 1]),
            tensor(g.steps[n], identity(s1)),
            select_blocks([c, t1, s1], [0, 2, 1]),
        ]))
    return GMealy(f.src, g.dst, indexed_tensor(f.state, g.state), steps)


def mealy_tensor(f: GMealy, g: GMealy) -> GMealy:
    """Side-by-side machines, inputs and states interleaved blockwise."""
    if f.horizon != g.horizon:
        raise ShapeMismatch("tensored machines must share one horizon")
    steps = []
    for n in range(f.horizon):
        a, a2 = f.src.objects[n + 1], g.src.objects[n + 1]
        b, b2 = f.dst.objects[n + 1], g.dst.objects[n + 1]
        s0, t0 = f.state.objects[n], g.state.objects[n]
        s1, t1 = f.state.objects[n + 1], g.state.objects[n + 1]
        steps.append(compose_all([
            select_blocks([a, a2, s0, t0], [0, 2, 1, 3]),
            tensor(f.steps[n], g.steps[n]),
            select_blocks([b, s1, b2, t1], [0, 2, 1, 3]),
        ]))
    return GMealy(indexed_tensor(f.src, g.src),
                  indexed_tensor(f.dst, g.dst),
                  indexed_tensor(f.state, g.state), steps)


def reindex_state(machine: GMealy, state: IndexedObject,
                  isos: Sequence[Morphism]) -> GMealy:
    """Transport a machine along a nodewise bijection of state families.

    ``isos[n] : machine.state(n) -> state(n)`` must be deterministic
    bijections commuting with the restrictions; the steps are conjugated
    accordingly.  Composites that agree only up to the bookkeeping order
    of their state factors become comparable this way.
    """
    isos = [as_det(i) for i in isos]
    if len(isos) != machine.horizon + 1:
        raise ShapeMismatch("need one state bijection per node")
    inverses = []
    for n, iso in enumerate(isos):
        if iso.dom != machine.state.objects[n] or iso.cod != state.objects[n]:
            raise ObjectMismatch(f"bijection {n} has the wrong boundary")
        if (iso.dom.size != iso.cod.size
                or sorted(iso.mapping) != list(range(iso.cod.size))):
            raise PreconditionViolation(
                "state reindexing needs nodewise bijections")
        backwards = [0] * iso.cod.size
        for i, j in enumerate(iso.mapping):
            backwards[j] = i
        inverses.append(DetKernel(iso.cod, iso.dom, tuple(backwards)))
    for n in range(machine.horizon):
        if not morphism_equal(compose(isos[n + 1], state.restrictions[n]),
                              compose(machine.state.restrictions[n],
                                      isos[n])):
            raise NaturalityViolation(
                f"edge {n}: bijections do not commute with the restrictions")
    steps = []
    for n in range(machine.horizon):
        a = machine.src.objects[n + 1]
        b = machine.dst.objects[n + 1]
        steps.append(compose_all([
            tensor(identity(a), inverses[n]),
            machine.steps[n],
            tensor(identity(b), isos[n + 1]),
        ]))
    return GMealy(machine.src, machine.dst, state, steps)


def moore_to_mealy(sys: GSystem) -> GMealy:
    """Update on the fresh input, then expose the new state."""
    steps = []
    for n in range(sys.horizon):
        a = sys.inputs.objects[n + 1]
        s0 = sys.state.objects[n]
        s1 = sys.state.objects[n + 1]
        steps.append(compose_all([
            select_blocks([a, s0], [1, 0]),
            sys.updates[n],
            select_blocks([s1], [0, 0]),
            tensor(sys.exposes[n + 1], identity(s1)),
        ]))
    return GMealy(sys.inputs, sys.outputs, sys.state, steps)


# ---------------------------------------------------------------------------
# the parametric variant

class GParaMealy:
    """A machine whose step also consumes one fresh parameter point.

    Edge ``n`` carries ``steps[n] : src(n+1) (x) omega(n+1) (x) state(n)
    -> dst(n+1) (x) state(n+1)``.  Besides the state-shadow condition,
    consecutive steps must commute with the restrictions of all four
    families, which is what lets parameter points be forgotten
    consistently along the chain.
    """

    __slots__ = ("src", "dst", "state", "omega", "steps")

    def __init__(self, src: IndexedObject, dst: IndexedObject,
                 state: IndexedObject, omega: IndexedObject,
                 steps: Sequence[Morphism]):
        families = (("src", src), ("dst", dst), ("state", state),
                    ("omega", omega))
        for name, fam in families:
            if not isinstance(fam, IndexedObject):
                raise ShapeMismatch(f"{name} must be an IndexedObject")
        horizon = src.horizon
        if any(fam.horizon != horizon for _, fam in families):
            raise ShapeMismatch("all four families must share one horizon")
        steps = tuple(steps)
        if len(steps) != horizon:
            raise ShapeMismatch("need one step per edge")
        for n, f in enumerate(steps):
            wanted = (src.objects[n + 1] @ omega.objects[n + 1]
                      @ state.objects[n])
            if (f.dom != wanted
                    or f.cod != dst.objects[n + 1] @ state.objects[n + 1]):
                raise ObjectMismatch(f"step {n} has the wrong boundary")
        for n, f in enumerate(steps):
            kept = compose_all([
                f,
                select_blocks([dst.objects[n + 1], state.objects[n + 1]],
                              [1]),
                state.restrictions[n],
            ])
            shadow = select_blocks(
                [src.objects[n + 1], omega.objects[n + 1], state.objects[n]],
                [2])
            if not morphism_equal(kept, shadow):
                raise NaturalityViolation(
                    f"edge {n}: stepping then restricting must return the "
                    f"current state")
        for n in range(horizon - 1):
            lhs = compose(steps[n + 1], tensor(dst.restrictions[n + 1],
                                               state.restrictions[n + 1]))
            rhs = compose(
                tensor_all([src.restrictions[n + 1],
                            omega.restrictions[n + 1],
                            state.restrictions[n]]),
                steps[n])
            if not morphism_equal(lhs, rhs):
                raise NaturalityViolation(
                    f"edge {n + 1}: steps do not commute with the "
                    f"restrictions")
        self.src = src
        self.dst = dst
        self.state = state
        self.omega = omega
        self.steps = steps

    @property
    def horizon(self) -> int:
        return self.src.horizon

    def __eq__(self, other) -> bool:
        return (isinstance(other, GParaMealy)
                and self.src == other.src and self.dst == other.dst
                and self.state == other.state and self.omega == other.omega
                and all(morphism_equal(a, b)
                        for a, b in zip(self.steps, other.steps)))

    def __repr__(self) -> str:
        return f"GParaMealy(horizon={self.horizon})"


def para_mealy_compose(f: GParaMealy, g: GParaMealy) -> GParaMealy:
    """Chain two parametric machines; states and parameters both pair up."""
    if f.dst != g.src:
        raise ObjectMismatch("machines do not meet on a common boundary")
    steps = []
    for n in range(f.horizon):
        a = f.src.objects[n + 1]
        b = f.dst.objects[n + 1]
        c = g.dst.objects[n + 1]
        w1, w2 = f.omega.objects[n + 1], g.omega.objects[n + 1]
        s0, s1 = f.state.objects[n], f.state.objects[n + 1]
        t0, t1 = g.state.objects[n], g.state.objects[n + 1]
        steps.append(compose_all([
            select_blocks([a, w1, w2, s0, t0], [0, 1, 3, 2, 4]),
            tensor_all([f.steps[n], identity(w2), identity(t0)]),
            select_blocks([b, s1, w2, t0], [0, 2, 3, 1]),
            tensor(g.steps[n], identity(s1)),
            select_blocks([c, t1, s1], [0, 2, 1]),
        ]))
    return GParaMealy(f.src, g.dst, indexed_tensor(f.state, g.state),
                      indexed_tensor(f.omega, g.omega), steps)


def para_mealy_tensor(f: GParaMealy, g: GParaMealy) -> GParaMealy:
    if f.horizon != g.horizon:
        raise ShapeMismatch("tensored machines must share one horizon")
    steps = []
    for n in range(f.horizon):
        a, a2 = f.src.objects[n + 1], g.src.objects[n + 1]
        b, b2 = f.dst.objects[n + 1], g.dst.objects[n + 1]
        w1, w2 = f.omega.objects[n + 1], g.omega.objects[n + 1]
        s0, t0 = f.state.objects[n], g.state.objects[n]
        s1, t1 = f.state.objects[n + 1], g.state.objects[n + 1]
        steps.append(compose_all([
            select_blocks([a, a2, w1, w2, s0, t0], [0, 2, 4, 1, 3, 5]),
            tensor(f.steps[n], g.steps[n]),
            select_blocks([b, s1, b2, t1], [0, 2, 1, 3]),
        ]))
    return GParaMealy(indexed_tensor(f.src, g.src),
                      indexed_tensor(f.dst, g.dst),
                      indexed_tensor(f.state, g.state),
                      indexed_tensor(f.omega, g.omega), steps)
