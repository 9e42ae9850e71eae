"""Inverse-transform interval partitions and explicit-choice systems.

A stochastic kernel with finite codomain can be replaced by a
deterministic map fed with one uniformly distributed parameter per step:
cut [0, 1] into consecutive intervals whose lengths are the row
probabilities, then send each parameter to the point owning its
interval.  All cut points are running sums of exact rationals.  The same
move with the parameter left *bare* — an object of choices carrying no
distribution at all — gives machines that merely enumerate their
possible evolutions; supplying a law for the choices afterwards turns
such a machine back into an ordinary stochastic one.
"""

from bisect import bisect_left
from fractions import Fraction
from typing import Sequence

from .errors import (InstanceMismatch, ObjectMismatch, PreconditionViolation,
                     ShapeMismatch, ValidationError)
from .objects import UNIT, FiniteObject
from .markov import (DetKernel, Morphism, PossKernel, StochKernel, dirac,
                     discard_map, identity, select_blocks, tensor)
from .timesys import (GSystem, GTrajectory, IndexedObject, _history_family,
                      history_object, make_open_markov_system,
                      unroll_trajectory)


class IntervalPartition:
    """Per-row cuts of [0, 1] whose interval lengths are row weights.

    Row ``r`` keeps breakpoints ``0 = b_0 <= ... <= b_k = 1`` with one
    interval ``(b_{j-1}, b_j]`` per codomain point, in label order.
    Zero-weight points keep an empty interval (``b_{j-1} = b_j``) so
    interval indices and codomain indices always agree.
    """

    __slots__ = ("dom", "cod", "breakpoints")

    def __init__(self, dom: FiniteObject, cod: FiniteObject,
                 breakpoints: Sequence[Sequence[Fraction]]):
        breakpoints = tuple(tuple(Fraction(b) for b in row)
                            for row in breakpoints)
        if len(breakpoints) != dom.size:
            raise ShapeMismatch("need one breakpoint row per domain point")
        for r, row in enumerate(breakpoints):
            if len(row) != cod.size + 1:
                raise ShapeMismatch(
                    f"row {r} needs one breakpoint per codomain point, "
                    f"plus the initial zero")
            if row[0] != 0 or row[-1] != 1:
                raise ValidationError(
                    f"row {r}: breakpoints must run from 0 to 1")
            if any(a > b for a, b in zip(row, row[1:])):
                raise ValidationError(
                    f"row {r}: breakpoints must be nondecreasing")
        self.dom = dom
        self.cod = cod
        self.breakpoints = breakpoints

    def lengths(self, row: int) -> tuple:
        cuts = self.breakpoints[row]
        return tuple(b - a for a, b in zip(cuts, cuts[1:]))

    def map_at(self, row: int, p) -> int:
        """The codomain index whose interval contains ``p``, for p in (0, 1]."""
        p = Fraction(p)
        if not 0 < p <= 1:
            raise PreconditionViolation(
                "the uniform parameter lives in (0, 1]")
        return bisect_left(self.breakpoints[row], p) - 1

    def __eq__(self, other) -> bool:
        return (isinstance(other, IntervalPartition)
                and self.dom == other.dom and self.cod == other.cod
                and self.breakpoints == other.breakpoints)

    def __hash__(self):
        return hash((self.dom, self.cod, self.breakpoints))

    def __repr__(self) -> str:
        return (f"IntervalPartition({self.dom.size} rows, "
                f"{self.cod.size} intervals each)")


def uniformize(f: Morphism) -> IntervalPartition:
    """Cut [0, 1] row by row so interval lengths reproduce ``f`` exactly."""
    if isinstance(f, DetKernel):
        f = f.as_stoch()
    if not isinstance(f, StochKernel):
        raise InstanceMismatch(
            "only stochastic kernels have interval partitions")
    breakpoints = []
    for dense_row in f.dense():
        running = Fraction(0)
        row = [running]
        for weight in dense_row:
            running += weight
            row.append(running)
        breakpoints.append(row)
    return IntervalPartition(f.dom, f.cod, breakpoints)


def push_uniform(part: IntervalPartition) -> StochKernel:
    """The law of ``map_at(row, p)`` under the uniform p — one row at a time."""
    rows = []
    for r in range(part.dom.size):
        rows.append([(j, w) for j, w in enumerate(part.lengths(r)) if w])
    return StochKernel(part.dom, part.cod, rows)


# ---------------------------------------------------------------------------
# machines with bare choices

class KnightSystem:
    """A chain-indexed machine whose inputs are histories of bare choices.

    The choice object carries no distribution; unrolling against one
    fixed choice list gives a single trajectory, and the collection over
    all lists is the machine's behavior.  Feeding the choices from a
    stochastic policy instead recovers an ordinary trajectory.
    """

    __slots__ = ("omega", "system")

    def __init__(self, omega: FiniteObject, system: GSystem):
        if not isinstance(system, GSystem):
            raise ShapeMismatch("a choice system wraps a GSystem")
        wanted = _history_family(omega, system.horizon, 0)
        if system.inputs != wanted:
            raise ObjectMismatch(
                "the system's inputs must be histories of the choice object")
        self.omega = omega
        self.system = system

    @property
    def horizon(self) -> int:
        return self.system.horizon

    def __eq__(self, other) -> bool:
        return (isinstance(other, KnightSystem) and self.omega == other.omega
                and self.system == other.system)

    def __repr__(self) -> str:
        return (f"KnightSystem(omega={self.omega!r}, "
                f"horizon={self.horizon})")


def knight_system(omega0: FiniteObject, horizon: int) -> KnightSystem:
    """The machine that does nothing but make one bare choice per step."""
    updates = [discard_map(history_object(omega0, n + 1))
               for n in range(horizon)]
    system = GSystem(IndexedObject.constant(UNIT, horizon),
                     _history_family(omega0, horizon, 0),
                     IndexedObject.constant(UNIT, horizon),
                     [identity(UNIT)] * (horizon + 1), updates)
    return KnightSystem(omega0, system)


def knight_machine(omega: FiniteObject, state_obj: FiniteObject,
                   output_obj: FiniteObject, expose: Morphism,
                   update: Morphism, horizon: int) -> KnightSystem:
    """A machine whose update consumes one bare choice per step.

    ``update : state (x) omega -> state``; the wrapped system is its
    history expansion, with the choice histories as inputs.
    """
    return KnightSystem(omega, make_open_markov_system(
        state_obj, omega, output_obj, expose, update, horizon))


def knight_behavior(ks: KnightSystem, initial: Morphism,
                    choices: Sequence) -> GTrajectory:
    """Unroll against one fixed choice list, one entry per edge."""
    choices = [c if isinstance(c, tuple) else (c,) for c in choices]
    if len(choices) != ks.horizon:
        raise ShapeMismatch("need one choice per edge")
    sys = ks.system
    policies = []
    for n in range(ks.horizon):
        keep = select_blocks([sys.outputs.objects[n], sys.inputs.objects[n]],
                             [1])
        policies.append(tensor(keep, dirac(ks.omega, choices[n])))
    return unroll_trajectory(sys, initial, policies)
