"""Systems indexed by a finite chain of times, and their trajectories.

Time is the chain ``0 -> 1 -> ... -> horizon``.  An indexed object places a
finite object at every node and a deterministic restriction along every
edge, forgetting the newest information.  A system equips such families
with per-node readouts and per-edge state updates; a trajectory is a
compatible family of joint distributions, one per edge, coupling the
current state with the incoming input.  Each edge of a trajectory is a
behaviour square in the sense of :mod:`mksys.arenasys`, with the trivial
clock on the left boundary.

Restriction-compatibility of the per-edge joints themselves is *not* part
of the trajectory contract: it always holds for directly unrolled
trajectories but can fail after wiring a system into an environment, and
:func:`check_time_coherence` exists to detect exactly that.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Optional, Sequence

from .errors import (BoundaryMismatch, MksysError, NaturalityViolation,
                     ObjectMismatch, ShapeMismatch, ValidationError)
from .objects import UNIT, FiniteObject, tensor_objects
from .markov import (DetKernel, Morphism, StochKernel, as_det, compose,
                     compose_all, dirac, discard_map, displays_cond_indep,
                     identity, morphism_equal, select_blocks, tensor,
                     tensor_all, uniform_dist)
from .arena import DetLens, Interface, environment_cell, lens_compose, state_chart
from .arenasys import (SysXMor, SysXYSquare, SysYMor, SystemObject,
                       UNIT_SYSTEM, UNIT_INTERFACE, sys_xy_compose_y,
                       sysy_compose, validate_sys_xy)


# ---------------------------------------------------------------------------
# the time shape

class ChainGraph:
    """The finite chain ``0 -> 1 -> ... -> horizon``."""

    __slots__ = ("horizon",)

    def __init__(self, horizon: int):
        horizon = int(horizon)
        if horizon < 1:
            raise ShapeMismatch("a chain needs at least one edge")
        self.horizon = horizon

    @property
    def nodes(self) -> range:
        return range(self.horizon + 1)

    @property
    def edges(self) -> range:
        return range(self.horizon)

    def __eq__(self, other) -> bool:
        return isinstance(other, ChainGraph) and self.horizon == other.horizon

    def __hash__(self) -> int:
        return hash(("ChainGraph", self.horizon))

    def __repr__(self) -> str:
        return f"ChainGraph({self.horizon})"


class IndexedObject:
    """A family of finite objects tied together by restriction maps.

    ``objects[n]`` sits at node ``n``; ``restrictions[n]`` maps
    ``objects[n + 1]`` onto ``objects[n]``, deterministically.
    """

    __slots__ = ("objects", "restrictions")

    def __init__(self, objects: Sequence[FiniteObject],
                 restrictions: Sequence[Morphism]):
        objects = tuple(objects)
        restrictions = tuple(as_det(r) for r in restrictions)
        if len(objects) < 2:
            raise ShapeMismatch("an indexed object needs at least two nodes")
        if len(restrictions) != len(objects) - 1:
            raise ShapeMismatch("need exactly one restriction per edge")
        for n, r in enumerate(restrictions):
            if r.dom != objects[n + 1] or r.cod != objects[n]:
                raise ObjectMismatch(
                    f"restriction {n} must map node {n + 1} onto node {n}")
        self.objects = objects
        self.restrictions = restrictions

    @classmethod
    def constant(cls, obj: FiniteObject, horizon: int) -> "IndexedObject":
        """The same object at every node, identity restrictions."""
        return cls([obj] * (horizon + 1), [identity(obj)] * horizon)

    @property
    def horizon(self) -> int:
        return len(self.objects) - 1

    @property
    def graph(self) -> ChainGraph:
        return ChainGraph(self.horizon)

    def restriction_chain(self, frm: int, to: int) -> DetKernel:
        """The composite restriction from node ``frm`` down to node ``to``."""
        if not 0 <= to <= frm <= self.horizon:
            raise ShapeMismatch(
                f"no restriction chain from node {frm} to node {to}")
        if frm == to:
            return identity(self.objects[frm])
        return as_det(compose_all(
            [self.restrictions[k] for k in range(frm - 1, to - 1, -1)]))

    def __eq__(self, other) -> bool:
        return (isinstance(other, IndexedObject)
                and self.objects == other.objects
                and len(self.restrictions) == len(other.restrictions)
                and all(morphism_equal(a, b) for a, b in
                        zip(self.restrictions, other.restrictions)))

    def __repr__(self) -> str:
        return f"IndexedObject({len(self.objects)} nodes)"


def history_object(base: FiniteObject, length: int) -> FiniteObject:
    """Tensor power of ``base`` holding a path of ``length`` values.

    Points are label tuples of that length; ``encode``/``decode`` on the
    returned object translate between path tuples and row indices.
    """
    if length < 0:
        raise ShapeMismatch("a path cannot have negative length")
    return tensor_objects([base] * length)


def _history_family(base: FiniteObject, horizon: int,
                    offset: int) -> IndexedObject:
    # node n holds a path of length n + offset; restriction drops the
    # newest coordinate
    objects = [history_object(base, n + offset) for n in range(horizon + 1)]
    restrictions = [
        select_blocks([base] * (n + 1 + offset), list(range(n + offset)))
        for n in range(horizon)]
    return IndexedObject(objects, restrictions)


# ---------------------------------------------------------------------------
# systems

class GSystem:
    """Per-node readouts and per-edge updates over indexed objects.

    ``exposes[n] : S(n) -> O(n)`` is deterministic and commutes with the
    restrictions; ``updates[n] : S(n) (x) I(n+1) -> S(n+1)`` may be
    stochastic or possibilistic, but restricting a freshly updated state
    must return the state the step started from.
    """

    __slots__ = ("state", "inputs", "outputs", "exposes", "updates")

    def __init__(self, state: IndexedObject, inputs: IndexedObject,
                 outputs: IndexedObject, exposes: Sequence[Morphism],
                 updates: Sequence[Morphism]):
        for name, family in (("state", state), ("inputs", inputs),
                             ("outputs", outputs)):
            if not isinstance(family, IndexedObject):
                raise ShapeMismatch(f"{name} must be an IndexedObject")
        horizon = state.horizon
        if inputs.horizon != horizon or outputs.horizon != horizon:
            raise ShapeMismatch(
                "state, inputs and outputs must share one horizon")
        exposes = tuple(as_det(e) for e in exposes)
        updates = tuple(updates)
        if len(exposes) != horizon + 1:
            raise ShapeMismatch("need one readout per node")
        if len(updates) != horizon:
            raise ShapeMismatch("need one update per edge")
        for n, e in enumerate(exposes):
            if e.dom != state.objects[n] or e.cod != outputs.objects[n]:
                raise ObjectMismatch(f"readout {n} has the wrong boundary")
        for n, u in enumerate(updates):
            wanted = state.objects[n] @ inputs.objects[n + 1]
            if u.dom != wanted or u.cod != state.objects[n + 1]:
                raise ObjectMismatch(f"update {n} has the wrong boundary")
        for n in range(horizon):
            lhs = compose(exposes[n + 1], outputs.restrictions[n])
            rhs = compose(state.restrictions[n], exposes[n])
            if not morphism_equal(lhs, rhs):
                raise NaturalityViolation(
                    f"edge {n}: readouts do not commute with the restrictions")
            kept = compose(updates[n], state.restrictions[n])
            projection = select_blocks(
                [state.objects[n], inputs.objects[n + 1]], [0])
            if not morphism_equal(kept, projection):
                raise NaturalityViolation(
                    f"edge {n}: updating then restricting must return the "
                    f"current state")
        self.state = state
        self.inputs = inputs
        self.outputs = outputs
        self.exposes = exposes
        self.updates = updates

    @property
    def horizon(self) -> int:
        return self.state.horizon

    @property
    def graph(self) -> ChainGraph:
        return ChainGraph(self.horizon)

    def __eq__(self, other) -> bool:
        return (isinstance(other, GSystem)
                and self.state == other.state
                and self.inputs == other.inputs
                and self.outputs == other.outputs
                and all(morphism_equal(a, b) for a, b in
                        zip(self.exposes, other.exposes))
                and all(morphism_equal(a, b) for a, b in
                        zip(self.updates, other.updates)))

    def __repr__(self) -> str:
        return f"GSystem(horizon={self.horizon})"


def system_view(sys: GSystem, n: int) -> SysYMor:
    """The edge-``n`` slice of a system, as a vertical morphism."""
    if not 0 <= n < sys.horizon:
        raise ShapeMismatch(f"no edge {n} in a horizon-{sys.horizon} chain")
    src = SystemObject(sys.state.objects[n + 1], sys.state.objects[n],
                       sys.state.restrictions[n])
    dst = Interface(sys.inputs.objects[n + 1], sys.outputs.objects[n])
    return SysYMor(src, dst, sys.exposes[n], sys.updates[n])


def clock_system(horizon: int) -> GSystem:
    """The trivial system: the unit object everywhere, every map unique."""
    family = IndexedObject.constant(UNIT, horizon)
    ident = identity(UNIT)
    return GSystem(family, family, family, [ident] * (horizon + 1),
                   [ident] * horizon)


def make_open_markov_system(state_obj: FiniteObject, input_obj: FiniteObject,
                            output_obj: FiniteObject, expose: Morphism,
                            update: Morphism, horizon: int) -> GSystem:
    """History expansion of a one-step machine.

    The node-``n`` state is the full state path of length ``n + 1``; the
    input history at node ``n`` has length ``n`` (nothing has been fed in
    at time 0).  Updates append one freshly generated state from the
    newest state and the newest input, and keep the rest of the path; the
    readout applies ``expose`` coordinatewise.
    """
    if horizon < 1:
        raise ShapeMismatch("a chain needs at least one edge")
    expose = as_det(expose)
    if expose.dom != state_obj or expose.cod != output_obj:
        raise ObjectMismatch("readout must map states to outputs")
    if update.dom != state_obj @ input_obj or update.cod != state_obj:
        raise ObjectMismatch("update must map a state and an input to a state")
    exposes = [tensor_all([expose] * (n + 1)) for n in range(horizon + 1)]
    updates = []
    for n in range(horizon):
        blocks = [state_obj] * (n + 1) + [input_obj] * (n + 1)
        step = compose(
            select_blocks(blocks, list(range(n + 1)) + [n, 2 * n + 1]),
            tensor(identity(history_object(state_obj, n + 1)), update))
        updates.append(step)
    return GSystem(_history_family(state_obj, horizon, 1),
                   _history_family(input_obj, horizon, 0),
                   _history_family(output_obj, horizon, 1),
                   exposes, updates)


def history_policy(output_obj: FiniteObject, input_obj: FiniteObject,
                   step: Morphism, horizon: int) -> list:
    """Input policies for a history system: append ``step`` of the newest output.

    ``step : output_obj -> input_obj`` may be stochastic.  The returned
    per-edge kernels keep the input history intact, so unrolling with them
    always yields a valid trajectory.
    """
    if step.dom != output_obj or step.cod != input_obj:
        raise ObjectMismatch("step must map one output to one input")
    policies = []
    for n in range(horizon):
        blocks = [output_obj] * (n + 1) + [input_obj] * n
        policies.append(compose(
            select_blocks(blocks, list(range(n + 1, 2 * n + 1)) + [n]),
            tensor(identity(history_object(input_obj, n)), step)))
    return policies


# ---------------------------------------------------------------------------
# trajectories

class GTrajectory:
    """A compatible family of per-edge joint laws for a system.

    ``states[n] : unit -> S(n)`` is the state law at node ``n``;
    ``joints[n] : unit -> S(n) (x) I(n+1)`` couples the current state with
    the incoming input; ``io_joints[n] : unit -> O(n) (x) I(n+1)`` is its
    image on the interface.  Construction checks the behaviour-square
    equations on every edge, and restriction-compatibility of the state
    and interface families — but, deliberately, not of the ``joints``
    family itself (see :func:`check_time_coherence`).
    """

    __slots__ = ("system", "states", "joints", "io_joints")

    def __init__(self, system: GSystem, states: Sequence[Morphism],
                 joints: Sequence[Morphism], io_joints: Sequence[Morphism]):
        if not isinstance(system, GSystem):
            raise ShapeMismatch("a trajectory needs a GSystem to live on")
        horizon = system.horizon
        states = tuple(states)
        joints = tuple(joints)
        io_joints = tuple(io_joints)
        if len(states) != horizon + 1:
            raise ShapeMismatch("need one state law per node")
        if len(joints) != horizon or len(io_joints) != horizon:
            raise ShapeMismatch("need one joint per edge")
        for n, m in enumerate(states):
            if m.dom != UNIT or m.cod != system.state.objects[n]:
                raise ObjectMismatch(f"state law {n} has the wrong boundary")
        for n, m in enumerate(joints):
            wanted = system.state.objects[n] @ system.inputs.objects[n + 1]
            if m.dom != UNIT or m.cod != wanted:
                raise ObjectMismatch(f"joint {n} has the wrong boundary")
        for n, m in enumerate(io_joints):
            wanted = system.outputs.objects[n] @ system.inputs.objects[n + 1]
            if m.dom != UNIT or m.cod != wanted:
                raise ObjectMismatch(
                    f"interface joint {n} has the wrong boundary")
        for n in range(horizon):
            stepped = compose(states[n + 1], system.state.restrictions[n])
            if not morphism_equal(stepped, states[n]):
                raise NaturalityViolation(
                    f"node {n + 1}: state law does not restrict to its "
                    f"predecessor")
        for n in range(horizon - 1):
            restricted = compose(io_joints[n + 1], tensor(
                system.outputs.restrictions[n],
                system.inputs.restrictions[n + 1]))
            if not morphism_equal(restricted, io_joints[n]):
                raise NaturalityViolation(
                    f"edge {n + 1}: interface joint does not restrict to its "
                    f"predecessor")
        self.system = system
        self.states = states
        self.joints = joints
        self.io_joints = io_joints
        for n in range(horizon):
            problem = validate_sys_xy(trajectory_square(self, n))
            if problem is not None:
                raise ValidationError(f"edge {n}: {problem}")

    @property
    def horizon(self) -> int:
        return self.system.horizon

    def __eq__(self, other) -> bool:
        return (isinstance(other, GTrajectory)
                and self.system == other.system
                and all(morphism_equal(a, b) for a, b in
                        zip(self.states, other.states))
                and all(morphism_equal(a, b) for a, b in
                        zip(self.joints, other.joints))
                and all(morphism_equal(a, b) for a, b in
                        zip(self.io_joints, other.io_joints)))

    def __repr__(self) -> str:
        return f"GTrajectory(horizon={self.horizon})"


def trajectory_square(traj: GTrajectory, n: int) -> SysXYSquare:
    """The edge-``n`` behaviour square of a trajectory (clock on the left)."""
    sys = traj.system
    if not 0 <= n < sys.horizon:
        raise ShapeMismatch(f"no edge {n} in a horizon-{sys.horizon} chain")
    edge = SystemObject(sys.state.objects[n + 1], sys.state.objects[n],
                        sys.state.restrictions[n])
    top = SysXMor(UNIT_SYSTEM, edge, traj.states[n + 1], traj.states[n])
    interface = Interface(sys.inputs.objects[n + 1], sys.outputs.objects[n])
    clock = SysYMor(UNIT_SYSTEM, UNIT_INTERFACE, identity(UNIT),
                    identity(UNIT))
    return SysXYSquare(top, state_chart(interface, traj.io_joints[n]), clock,
                       system_view(sys, n), traj.joints[n])


def unroll_trajectory(sys: GSystem, initial: Morphism,
                      inputs: Optional[Sequence[Morphism]] = None
                      ) -> GTrajectory:
    """Run a system forward from an initial state law.

    ``inputs``, when given, supplies one conditional input policy
    ``O(n) (x) I(n) -> I(n+1)`` per edge; it must extend the input history
    (the trajectory validation rejects policies that rewrite it).  Closed
    systems — all input objects a single point — may omit it.
    """
    horizon = sys.horizon
    if initial.dom != UNIT or initial.cod != sys.state.objects[0]:
        raise ShapeMismatch("initial law must be a state law at node 0")
    if sys.inputs.objects[0].size != 1:
        raise ShapeMismatch(
            "unrolling needs a single input point at time 0")
    if inputs is None:
        if any(obj.size != 1 for obj in sys.inputs.objects):
            raise ShapeMismatch(
                "closed unrolling needs one-point inputs at every node; "
                "pass explicit input policies instead")
        inputs = [
            DetKernel(sys.outputs.objects[n] @ sys.inputs.objects[n],
                      sys.inputs.objects[n + 1],
                      (0,) * (sys.outputs.objects[n].size
                              * sys.inputs.objects[n].size))
            for n in range(horizon)]
    else:
        inputs = list(inputs)
        if len(inputs) != horizon:
            raise ShapeMismatch("need one input policy per edge")
        for n, policy in enumerate(inputs):
            wanted = sys.outputs.objects[n] @ sys.inputs.objects[n]
            if policy.dom != wanted or policy.cod != sys.inputs.objects[n + 1]:
                raise ShapeMismatch(
                    f"input policy {n} has the wrong boundary")
    states = [initial]
    joints = []
    io_joints = []
    first_input = sys.inputs.objects[0]
    current = tensor(initial, dirac(first_input, first_input.decode(0)))
    for n in range(horizon):
        s_obj = sys.state.objects[n]
        in_now = sys.inputs.objects[n]
        in_next = sys.inputs.objects[n + 1]
        joint = compose_all([
            current,
            select_blocks([s_obj, in_now], [0, 0, 1]),
            tensor_all([identity(s_obj), sys.exposes[n], identity(in_now)]),
            tensor(identity(s_obj), inputs[n]),
        ])
        joints.append(joint)
        io_joints.append(
            compose(joint, tensor(sys.exposes[n], identity(in_next))))
        states.append(compose(joint, sys.updates[n]))
        current = compose_all([
            joint,
            select_blocks([s_obj, in_next], [0, 1, 1]),
            tensor(sys.updates[n], identity(in_next)),
        ])
    return GTrajectory(sys, states, joints, io_joints)


# ---------------------------------------------------------------------------
# wirings

class GWiring:
    """A restriction-compatible family of deterministic rewirings.

    Node ``n`` carries an output translation ``forwards[n] : O1(n) ->
    O2(n)``; edge ``n`` carries an input translation ``backwards[n] :
    O1(n) (x) I2(n+1) -> I1(n+1)`` turning outer inputs, in the light of
    the observed inner output, into inner inputs.  :func:`wiring_lens`
    packages the edge data as a lens between the per-edge interfaces.
    """

    __slots__ = ("inner_inputs", "inner_outputs", "outer_inputs",
                 "outer_outputs", "forwards", "backwards")

    def __init__(self, inner_inputs: IndexedObject,
                 inner_outputs: IndexedObject, outer_inputs: IndexedObject,
                 outer_outputs: IndexedObject, forwards: Sequence[Morphism],
                 backwards: Sequence[Morphism]):
        families = (inner_inputs, inner_outputs, outer_inputs, outer_outputs)
        if not all(isinstance(f, IndexedObject) for f in families):
            raise ShapeMismatch("wiring boundaries must be IndexedObjects")
        horizon = inner_inputs.horizon
        if any(f.horizon != horizon for f in families):
            raise ShapeMismatch("wiring boundaries must share one horizon")
        forwards = tuple(as_det(f) for f in forwards)
        backwards = tuple(as_det(b) for b in backwards)
        if len(forwards) != horizon + 1:
            raise ShapeMismatch("need one forward map per node")
        if len(backwards) != horizon:
            raise ShapeMismatch("need one backward map per edge")
        for n, f in enumerate(forwards):
            if (f.dom != inner_outputs.objects[n]
                    or f.cod != outer_outputs.objects[n]):
                raise ObjectMismatch(f"forward map {n} has the wrong boundary")
        for n, b in enumerate(backwards):
            wanted = inner_outputs.objects[n] @ outer_inputs.objects[n + 1]
            if b.dom != wanted or b.cod != inner_inputs.objects[n + 1]:
                raise ObjectMismatch(f"backward map {n} has the wrong boundary")
        for n in range(horizon):
            lhs = compose(forwards[n + 1], outer_outputs.restrictions[n])
            rhs = compose(inner_outputs.restrictions[n], forwards[n])
            if not morphism_equal(lhs, rhs):
                raise NaturalityViolation(
                    f"node {n + 1}: forward maps do not commute with the "
                    f"restrictions")
        for n in range(horizon - 1):
            lhs = compose(backwards[n + 1], inner_inputs.restrictions[n + 1])
            rhs = compose(tensor(inner_outputs.restrictions[n],
                                 outer_inputs.restrictions[n + 1]),
                          backwards[n])
            if not morphism_equal(lhs, rhs):
                raise NaturalityViolation(
                    f"edge {n + 1}: backward maps do not commute with the "
                    f"restrictions")
        self.inner_inputs = inner_inputs
        self.inner_outputs = inner_outputs
        self.outer_inputs = outer_inputs
        self.outer_outputs = outer_outputs
        self.forwards = forwards
        self.backwards = backwards

    @property
    def horizon(self) -> int:
        return self.inner_inputs.horizon

    def __eq__(self, other) -> bool:
        return (isinstance(other, GWiring)
                and self.inner_inputs == other.inner_inputs
                and self.inner_outputs == other.inner_outputs
                and self.outer_inputs == other.outer_inputs
                and self.outer_outputs == other.outer_outputs
                and all(morphism_equal(a, b) for a, b in
                        zip(self.forwards, other.forwards))
                and all(morphism_equal(a, b) for a, b in
                        zip(self.backwards, other.backwards)))

    def __repr__(self) -> str:
        return f"GWiring(horizon={self.horizon})"


def identity_wiring(inputs: IndexedObject, outputs: IndexedObject) -> GWiring:
    """The wiring that changes nothing."""
    horizon = inputs.horizon
    forwards = [identity(obj) for obj in outputs.objects]
    backwards = [
        select_blocks([outputs.objects[n], inputs.objects[n + 1]], [1])
        for n in range(horizon)]
    return GWiring(inputs, outputs, inputs, outputs, forwards, backwards)


def history_wiring(inner_input: FiniteObject, inner_output: FiniteObject,
                   outer_input: FiniteObject, outer_output: FiniteObject,
                   forward: Morphism, backward: Morphism,
                   horizon: int) -> GWiring:
    """History expansion of a one-step rewiring.

    ``forward : inner_output -> outer_output`` and ``backward :
    inner_output (x) outer_input -> inner_input`` are applied
    coordinatewise along the paths, matching the shapes produced by
    :func:`make_open_markov_system`.
    """
    forward = as_det(forward)
    backward = as_det(backward)
    if forward.dom != inner_output or forward.cod != outer_output:
        raise ObjectMismatch("forward map must translate one output")
    if (backward.dom != inner_output @ outer_input
            or backward.cod != inner_input):
        raise ObjectMismatch(
            "backward map must build one inner input from one output and "
            "one outer input")
    forwards = [tensor_all([forward] * (n + 1)) for n in range(horizon + 1)]
    backwards = []
    for n in range(horizon):
        blocks = [inner_output] * (n + 1) + [outer_input] * (n + 1)
        interleave = [j for k in range(n + 1) for j in (k, n + 1 + k)]
        backwards.append(compose(select_blocks(blocks, interleave),
                                 tensor_all([backward] * (n + 1))))
    return GWiring(_history_family(inner_input, horizon, 0),
                   _history_family(inner_output, horizon, 1),
                   _history_family(outer_input, horizon, 0),
                   _history_family(outer_output, horizon, 1),
                   forwards, backwards)


def wiring_lens(wiring: GWiring, n: int) -> DetLens:
    """The edge-``n`` lens of a wiring."""
    if not 0 <= n < wiring.horizon:
        raise ShapeMismatch(f"no edge {n} in a horizon-{wiring.horizon} chain")
    src = Interface(wiring.inner_inputs.objects[n + 1],
                    wiring.inner_outputs.objects[n])
    dst = Interface(wiring.outer_inputs.objects[n + 1],
                    wiring.outer_outputs.objects[n])
    return DetLens(src, dst, wiring.forwards[n], wiring.backwards[n])


def wiring_compose(first: GWiring, second: GWiring) -> GWiring:
    """Compose two wirings, applying ``first`` innermost."""
    if (first.outer_inputs != second.inner_inputs
            or first.outer_outputs != second.inner_outputs):
        raise BoundaryMismatch("wirings do not meet on a common interface")
    forwards = [compose(f, g)
                for f, g in zip(first.forwards, second.forwards)]
    backwards = [
        lens_compose(wiring_lens(first, n), wiring_lens(second, n)).fsharp
        for n in range(first.horizon)]
    return GWiring(first.inner_inputs, first.inner_outputs,
                   second.outer_inputs, second.outer_outputs,
                   forwards, backwards)


def compose_system_with_lens(sys: GSystem, wiring: GWiring) -> GSystem:
    """Wire a system into an environment, one lens composition per edge."""
    if (wiring.inner_inputs != sys.inputs
            or wiring.inner_outputs != sys.outputs):
        raise ObjectMismatch("wiring does not sit on the system interface")
    horizon = sys.horizon
    exposes = [compose(sys.exposes[n], wiring.forwards[n])
               for n in range(horizon + 1)]
    updates = [sysy_compose(system_view(sys, n), wiring_lens(wiring, n)).fsharp
               for n in range(horizon)]
    return GSystem(sys.state, wiring.outer_inputs, wiring.outer_outputs,
                   exposes, updates)


def lift_trajectory(traj: GTrajectory, wiring: GWiring,
                    cells: Sequence) -> GTrajectory:
    """Glue a trajectory with per-edge environment couplings over a wiring.

    ``cells[n]`` must be a square over ``wiring_lens(wiring, n)`` — e.g.
    built with :func:`mksys.arena.environment_cell` — whose top chart
    matches the trajectory's edge-``n`` interface joint.  Each edge is
    pasted vertically; the glued joints display the defining conditional
    independence (outer input independent of the state given the inner
    interface data) by construction.
    """
    sys = traj.system
    horizon = sys.horizon
    cells = list(cells)
    if len(cells) != horizon:
        raise ShapeMismatch("need one environment cell per edge")
    wired = compose_system_with_lens(sys, wiring)
    joints = []
    io_joints = []
    for n in range(horizon):
        if cells[n].right != wiring_lens(wiring, n):
            raise BoundaryMismatch(
                f"edge {n}: cell does not sit over the wiring lens")
        pasted = sys_xy_compose_y(trajectory_square(traj, n), cells[n])
        joints.append(pasted.filling)
        io_joints.append(cells[n].bottom.gflat)
    return GTrajectory(wired, list(traj.states), joints, io_joints)


# ---------------------------------------------------------------------------
# diagnostics

class TimeCoherenceReport:
    """Verdicts, one per adjacent edge pair, for joint-family compatibility."""

    __slots__ = ("verdicts",)

    def __init__(self, verdicts: Sequence[bool]):
        self.verdicts = tuple(bool(v) for v in verdicts)

    @property
    def ok(self) -> bool:
        return all(self.verdicts)

    @property
    def failures(self) -> tuple:
        return tuple(n for n, v in enumerate(self.verdicts) if not v)

    def __repr__(self) -> str:
        status = ("coherent" if self.ok
                  else f"incoherent at pairs {list(self.failures)}")
        return f"TimeCoherenceReport({status})"


def check_time_coherence(traj: GTrajectory) -> TimeCoherenceReport:
    """Does each joint restrict onto the previous one?

    Verdict ``n`` compares ``joints[n + 1]``, marginalized along the state
    and input restrictions, against ``joints[n]``.  Directly unrolled
    trajectories always pass; trajectories produced by
    :func:`lift_trajectory` need not, and that gap is what this diagnostic
    measures.
    """
    sys = traj.system
    verdicts = []
    for n in range(sys.horizon - 1):
        restricted = compose(traj.joints[n + 1], tensor(
            sys.state.restrictions[n], sys.inputs.restrictions[n + 1]))
        verdicts.append(morphism_equal(restricted, traj.joints[n]))
    return TimeCoherenceReport(verdicts)


class FactorizationReport:
    """Outcome of the machine/environment factorization diagnostic.

    ``generation[n]`` — is the edge-``n`` joint regenerated from its
    time-0 restriction by the composite updates?  ``independence[n]`` —
    is the outer input independent of the initial state given the inner
    output?  ``squares_ok`` — do the machine-side marginals form a valid
    trajectory of the inner system?  ``matches`` — does regluing the two
    marginal families reproduce the given trajectory exactly?
    """

    __slots__ = ("squares_ok", "squares_problem", "generation",
                 "independence", "matches", "matches_problem")

    def __init__(self, squares_ok: bool, squares_problem: Optional[str],
                 generation: Sequence[bool], independence: Sequence[bool],
                 matches: bool, matches_problem: Optional[str] = None):
        self.squares_ok = bool(squares_ok)
        self.squares_problem = squares_problem
        self.generation = tuple(bool(v) for v in generation)
        self.independence = tuple(bool(v) for v in independence)
        self.matches = bool(matches)
        self.matches_problem = matches_problem

    @property
    def generation_ok(self) -> bool:
        return all(self.generation)

    @property
    def independence_ok(self) -> bool:
        return all(self.independence)

    @property
    def ok(self) -> bool:
        return (self.squares_ok and self.generation_ok
                and self.independence_ok and self.matches)

    def describe(self) -> str:
        if self.ok:
            return "factorization holds"
        parts = []
        if not self.squares_ok:
            parts.append(f"marginals are not a trajectory "
                         f"({self.squares_problem})")
        bad = [n for n, v in enumerate(self.generation) if not v]
        if bad:
            parts.append(f"generation hypothesis fails at edges {bad}")
        bad = [n for n, v in enumerate(self.independence) if not v]
        if bad:
            parts.append(f"independence hypothesis fails at edges {bad}")
        if self.squares_ok and not self.matches:
            parts.append("regluing does not reproduce the trajectory")
        return "; ".join(parts)

    def __repr__(self) -> str:
        return f"FactorizationReport({self.describe()})"


def factorization_check(traj_prime: GTrajectory, sys: GSystem,
                        wiring: GWiring) -> FactorizationReport:
    """Split a composite trajectory into machine and environment parts.

    From each joint of ``traj_prime`` (a trajectory of the wired
    composite), the inner output, inner input and outer output are
    reconstructed with the system readout and the wiring maps, yielding a
    five-way joint.  Its machine-side marginals should form a trajectory
    of ``sys``, its environment-side marginals feed environment cells,
    and under the two hypotheses — the joints are generated from their
    time-0 restriction by the composite updates, and the outer input is
    independent of the initial state given the inner output — regluing
    recovers ``traj_prime`` exactly.  Purely diagnostic: failures are
    reported, not raised.
    """
    wired = compose_system_with_lens(sys, wiring)
    if traj_prime.system != wired:
        raise ObjectMismatch(
            "trajectory does not live on the wired composite of the given "
            "system")
    horizon = sys.horizon
    inner_joints = []
    env_joints = []
    inner_ios = []
    generation = []
    independence = []
    for n in range(horizon):
        s_obj = sys.state.objects[n]
        out_inner = sys.outputs.objects[n]
        in_inner = sys.inputs.objects[n + 1]
        in_outer = wiring.outer_inputs.objects[n + 1]
        out_outer = wiring.outer_outputs.objects[n]
        prime = traj_prime.joints[n]
        with_output = compose_all([
            prime,
            select_blocks([s_obj, in_outer], [0, 0, 1]),
            tensor_all([identity(s_obj), sys.exposes[n], identity(in_outer)]),
        ])
        five_way = compose_all([
            with_output,
            select_blocks([s_obj, out_inner, in_outer], [0, 2, 1, 2, 1, 1]),
            tensor_all([identity(s_obj), identity(in_outer),
                        wiring.backwards[n], identity(out_inner),
                        wiring.forwards[n]]),
        ])
        blocks = [s_obj, in_outer, in_inner, out_inner, out_outer]
        inner_joints.append(compose(five_way, select_blocks(blocks, [0, 2])))
        env_joints.append(compose(five_way, select_blocks(blocks, [3, 1])))
        inner_ios.append(compose(five_way, select_blocks(blocks, [3, 2])))
        # independence of the outer input from the *initial* state, given
        # the inner output
        chain = sys.state.restriction_chain(n, 0)
        witness = compose_all([
            five_way,
            select_blocks(blocks, [0, 3, 1]),
            tensor_all([chain, identity(out_inner), identity(in_outer)]),
        ])
        first = sys.state.objects[0].nfactors
        mid = out_inner.nfactors
        last = in_outer.nfactors
        independence.append(displays_cond_indep(
            witness, (tuple(range(first)),
                      tuple(range(first, first + mid)),
                      tuple(range(first + mid, first + mid + last)))))
        regenerated = compose(
            prime, tensor(chain, identity(in_outer)))
        for k in range(n):
            s_k = sys.state.objects[k]
            regenerated = compose_all([
                regenerated,
                select_blocks([s_k, in_outer], [0, 1, 1]),
                tensor_all([identity(s_k),
                            wiring.outer_inputs.restriction_chain(n + 1, k + 1),
                            identity(in_outer)]),
                tensor(wired.updates[k], identity(in_outer)),
            ])
        generation.append(morphism_equal(regenerated, prime))
    squares_ok = True
    squares_problem = None
    inner_traj = None
    try:
        inner_traj = GTrajectory(sys, traj_prime.states, inner_joints,
                                 inner_ios)
    except MksysError as err:
        squares_ok = False
        squares_problem = str(err)
    matches = False
    matches_problem = None
    if inner_traj is not None:
        try:
            cells = [environment_cell(wiring_lens(wiring, n), env_joints[n])
                     for n in range(horizon)]
            matches = lift_trajectory(inner_traj, wiring, cells) == traj_prime
        except MksysError as err:
            matches_problem = str(err)
    return FactorizationReport(squares_ok, squares_problem, generation,
                               independence, matches, matches_problem)


def search_time_coherence_counterexample() -> list:
    """Sweep the small wired family where coherence is known to be fragile.

    The machine has a frozen two-element state, output visible from time
    1 only, and no inputs; the wiring forwards the output unchanged and
    swallows a two-element outer input that is frozen from time 1 on.
    Environment couplings of the time-1 output with the time-2 outer
    input are enumerated on a quarter grid over couplings with uniform
    output marginal; each is lifted and tested.  Returns ``(description,
    report)`` pairs: couplings that correlate output and outer input come
    out incoherent, product couplings stay coherent.
    """
    two = FiniteObject(["0", "1"])
    horizon = 2
    frozen = select_blocks([two, UNIT], [0])
    machine = GSystem(
        IndexedObject.constant(two, horizon),
        IndexedObject.constant(UNIT, horizon),
        IndexedObject([UNIT, two, two], [discard_map(two), identity(two)]),
        [discard_map(two), identity(two), identity(two)],
        [frozen, frozen])
    wiring = GWiring(
        machine.inputs, machine.outputs,
        IndexedObject([UNIT, two, two], [discard_map(two), identity(two)]),
        machine.outputs,
        [identity(UNIT), identity(two), identity(two)],
        [discard_map(two), discard_map(two @ two)])
    base = unroll_trajectory(machine, uniform_dist(two))
    pair = two @ two
    half = Fraction(1, 2)
    results = []
    for top in range(3):
        for bottom in range(3):
            a = Fraction(top, 4)
            b = Fraction(bottom, 4)
            weights = {0: a, 1: half - a, 2: b, 3: half - b}
            coupling = StochKernel(
                UNIT, pair, [[(c, w) for c, w in weights.items() if w]])
            opening = compose(coupling, select_blocks([two, two], [1]))
            cells = [environment_cell(wiring_lens(wiring, 0), opening),
                     environment_cell(wiring_lens(wiring, 1), coupling)]
            lifted = lift_trajectory(base, wiring, cells)
            results.append((
                f"output-input coupling with rows ({a}, {half - a}) and "
                f"({b}, {half - b})",
                check_time_coherence(lifted)))
    return results
