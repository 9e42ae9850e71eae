"""Seeded random generators for objects, kernels and derived structures.

Everything takes an explicit ``random.Random`` so runs are reproducible; no
global RNG state is touched.  Weights are small integers normalized to exact
rationals, so generated kernels are exactly row-stochastic.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Sequence

from .arena import (Chart, DetLens, Interface, UNIT_INTERFACE, XYSquare,
                    environment_cell, lens_tensor, lens_tensor_all,
                    state_chart, wired_projection_square)
from .arenasys import (SysXMor, SysXYSquare, SysYMor, SystemObject,
                       UNIT_SYSTEM, projection_square, sysy_tensor,
                       sysy_tensor_all)
from .markov import (DetKernel, Morphism, PossKernel, StochKernel,
                     compose, compose_all, copy_blocks, copy_map,
                     discard_map, identity, select_blocks, tensor,
                     tensor_all)
from .mealy import GMealy, GParaMealy
from .objects import UNIT, FiniteObject
from .timesys import (IndexedObject, compose_system_with_lens,
                      history_object, history_policy, history_wiring,
                      make_open_markov_system, unroll_trajectory,
                      wiring_lens)


def random_object(rng: random.Random, max_size: int = 4,
                  min_size: int = 1, tag: str = "x") -> FiniteObject:
    n = rng.randint(min_size, max_size)
    return FiniteObject(f"{tag}{i}" for i in range(n))


def random_stoch(rng: random.Random, dom: FiniteObject,
                 cod: FiniteObject, spread: int = 4) -> StochKernel:
    rows = []
    for _ in range(dom.size):
        weights = [rng.randint(0, spread) for _ in range(cod.size)]
        if not any(weights):
            weights[rng.randrange(cod.size)] = 1
        total = sum(weights)
        rows.append([(j, Fraction(w, total)) for j, w in enumerate(weights) if w])
    return StochKernel(dom, cod, rows)


def random_poss(rng: random.Random, dom: FiniteObject,
                cod: FiniteObject) -> PossKernel:
    rows = []
    for _ in range(dom.size):
        picks = [j for j in range(cod.size) if rng.random() < 0.5]
        if not picks:
            picks = [rng.randrange(cod.size)]
        rows.append(picks)
    return PossKernel(dom, cod, rows)


def random_det(rng: random.Random, dom: FiniteObject,
               cod: FiniteObject) -> DetKernel:
    return DetKernel(dom, cod,
                     (rng.randrange(cod.size) for _ in range(dom.size)))


def random_kernel(rng: random.Random, dom: FiniteObject, cod: FiniteObject,
                  instance: str = "stoch") -> Morphism:
    if instance == "stoch":
        return random_stoch(rng, dom, cod)
    if instance == "poss":
        return random_poss(rng, dom, cod)
    if instance == "det":
        return random_det(rng, dom, cod)
    raise ValueError(f"unknown instance {instance!r}")


def random_dist(rng: random.Random, obj: FiniteObject,
                instance: str = "stoch") -> Morphism:
    return random_kernel(rng, UNIT, obj, instance)


# ---------------------------------------------------------------------------
# interfaces, lenses, charts

def random_interface(rng: random.Random, max_size: int = 3,
                     tag: str = "i") -> Interface:
    return Interface(random_object(rng, max_size, tag=tag + "a"),
                     random_object(rng, max_size, tag=tag + "c"))


def random_lens(rng: random.Random, src: Interface, dst: Interface) -> DetLens:
    return DetLens(src, dst, random_det(rng, src.c, dst.c),
                   random_det(rng, src.c @ dst.a, src.a))


def random_chart(rng: random.Random, src: Interface, dst: Interface,
                 residual: Interface = None,
                 instance: str = "stoch") -> Chart:
    """A valid chart: a forward kernel plus a conditional for the actions."""
    if residual is None:
        residual = random_interface(rng, 2, tag="r")
    g = random_kernel(rng, src.c, residual.c @ dst.c, instance)
    h = random_kernel(rng, src.c @ src.a @ residual.c @ dst.c,
                      residual.a @ dst.a, instance)
    parts = [src.c, src.a, residual.c, dst.c]
    gflat = compose_all([
        copy_blocks([src.c, src.a], [0]),
        tensor_all([identity(src.c), identity(src.a), g]),
        select_blocks(parts, [2, 3, 0, 1, 2, 3]),
        tensor_all([identity(residual.c), identity(dst.c), h]),
    ])
    return Chart(src, dst, residual, g, gflat)


# ---------------------------------------------------------------------------
# squares: constructively valid environments and grids

def ci_environment_cells(rng: random.Random, inner: DetLens, outer: DetLens,
                         instance: str = "stoch"):
    """Two stacked environment squares derived from one global joint.

    The joint couples innermost configurations with outermost actions, with
    the response depending only on the visible middle configuration; that
    conditional independence makes the vertical composite of the two cells
    equal the direct cell of the composite lens.  Returns ``(s, t, j)``.
    """
    c_x, c_y = inner.src.c, inner.dst.c
    a_z = outer.dst.a
    q = random_dist(rng, c_x, instance)
    lam = random_kernel(rng, c_y, a_z, instance)
    j = compose_all([q, copy_map(c_x), tensor(identity(c_x), inner.f),
                     tensor(identity(c_x), lam)])
    r1 = compose_all([j, select_blocks([c_x, a_z], [0, 0, 1]),
                      tensor_all([identity(c_x), inner.f, identity(a_z)]),
                      tensor(identity(c_x), outer.fsharp)])
    r2 = compose(j, tensor(inner.f, identity(a_z)))
    return environment_cell(inner, r1), environment_cell(outer, r2), j


def arena_interchange_grid(rng: random.Random, instance: str = "stoch"):
    """A 2x2 grid ``(s, t, u, v)`` with s|u, t|v, s/t and u/v all defined.

    ``s`` and ``t`` are stacked environment cells over tensors of lenses;
    ``u`` and ``v`` are the matching wired projections onto one component.
    """
    xs = [random_interface(rng, 2, tag=f"x{i}") for i in (0, 1)]
    ys = [random_interface(rng, 2, tag=f"y{i}") for i in (0, 1)]
    zs = [random_interface(rng, 2, tag=f"z{i}") for i in (0, 1)]
    ws = [random_lens(rng, xs[i], ys[i]) for i in (0, 1)]
    vs = [random_lens(rng, ys[i], zs[i]) for i in (0, 1)]
    s, t, _ = ci_environment_cells(rng, lens_tensor(ws[0], ws[1]),
                                   lens_tensor(vs[0], vs[1]), instance)
    keep = rng.randrange(2)
    u = wired_projection_square(ws, keep)
    v = wired_projection_square(vs, keep)
    return s, t, u, v


# ---------------------------------------------------------------------------
# system squares

def machine_view(rng: random.Random, iface: Interface,
                 instance: str = "stoch", state: FiniteObject = None,
                 readout: DetKernel = None) -> SysYMor:
    """A machine seen through an interface: readout plus feedback memory.

    The extended state is ``state (x) hidden``; the update keeps the exposed
    state and writes a fresh hidden cell from the state and the received
    action, so the projection condition holds by construction.
    """
    if state is None:
        state = random_object(rng, 3, tag="s")
    if readout is None:
        readout = random_det(rng, state, iface.c)
    hidden = random_object(rng, 2, tag="m")
    obj = SystemObject(state @ hidden, state,
                       select_blocks([state, hidden], [0]))
    memory = random_kernel(rng, state @ iface.a, hidden, instance)
    update = compose(select_blocks([state, iface.a], [0, 0, 1]),
                     tensor(identity(state), memory))
    return SysYMor(obj, iface, readout, update)


def transparent_view(rng: random.Random, iface: Interface,
                     instance: str = "stoch") -> SysYMor:
    """A machine whose exposed state is the configuration object itself."""
    return machine_view(rng, iface, instance, state=iface.c,
                        readout=identity(iface.c))


def behavior_square(view: SysYMor, joint: Morphism) -> SysXYSquare:
    """One step of a machine run from a state-action joint.

    ``joint : 1 -> s (x) a`` couples the machine state with the action it
    receives; the bottom chart, the horizontal step and the filling are all
    derived from it, and the result always validates.
    """
    s_obj = view.src.s
    a_obj = view.dst.a
    q = compose(joint, tensor(view.f, identity(a_obj)))
    bottom = state_chart(view.dst, q)
    clock = SysYMor(UNIT_SYSTEM, UNIT_INTERFACE, identity(UNIT),
                    identity(UNIT))
    top = SysXMor(UNIT_SYSTEM, view.src, compose(joint, view.fsharp),
                  compose(joint, select_blocks([s_obj, a_obj], [0])))
    return SysXYSquare(top, bottom, clock, view, joint)


def random_sys_square(rng: random.Random,
                      instance: str = "stoch") -> SysXYSquare:
    iface = random_interface(rng, 2)
    view = machine_view(rng, iface, instance)
    joint = random_dist(rng, view.src.s @ iface.a, instance)
    return behavior_square(view, joint)


def sys_x_assoc_triple(rng: random.Random, instance: str = "stoch"):
    """Three horizontally chainable system squares.

    A run of a three-fold tensor machine, a projection onto the first two
    components, and a further projection onto the first.
    """
    views = [machine_view(rng, random_interface(rng, 2, tag=f"i{k}"),
                          instance) for k in range(3)]
    whole = sysy_tensor_all(views)
    joint = random_dist(rng, whole.src.s @ whole.dst.a, instance)
    s = behavior_square(whole, joint)
    t = projection_square(views, [0, 1])
    u = projection_square(views[:2], [0])
    return s, t, u


def sys_interchange_grid(rng: random.Random, instance: str = "stoch"):
    """A mixed 2x2 grid ``(s, t, u, v)``.

    ``s`` is a run of a tensor of two transparent machines, ``t`` the
    projection onto one of them, ``u`` an environment cell below ``s`` over
    a tensor of wiring lenses, and ``v`` the wired projection below ``t``.
    """
    ifaces = [random_interface(rng, 2, tag=f"i{k}") for k in (0, 1)]
    outs = [random_interface(rng, 2, tag=f"o{k}") for k in (0, 1)]
    wires = [random_lens(rng, ifaces[k], outs[k]) for k in (0, 1)]
    views = [transparent_view(rng, ifaces[k], instance) for k in (0, 1)]
    whole = sysy_tensor(views[0], views[1])
    big = lens_tensor(wires[0], wires[1])
    r = random_dist(rng, big.src.c @ big.dst.a, instance)
    u = environment_cell(big, r)
    s = behavior_square(whole, u.top.gflat)
    keep = rng.randrange(2)
    t = projection_square(views, [keep])
    v = wired_projection_square(wires, keep)
    return s, t, u, v


def sys_y_assoc_triple(rng: random.Random, instance: str = "stoch"):
    """A machine run over two stacked environment cells."""
    x = random_interface(rng, 2, tag="x")
    y = random_interface(rng, 2, tag="y")
    z = random_interface(rng, 2, tag="z")
    t, u, _ = ci_environment_cells(rng, random_lens(rng, x, y),
                                   random_lens(rng, y, z), instance)
    view = transparent_view(rng, x, instance)
    s = behavior_square(view, t.top.gflat)
    return s, t, u


def nabla_pair(rng: random.Random, instance: str = "stoch",
               product: bool = False):
    """Two runs sharing the trivial left view, plus their joint chart.

    Returns ``(sq1, sq2, g012, views, p)`` where ``p`` is the global joint
    on both machines' states and actions.  With ``product=True`` the
    coupling factors, so the glued filling must be the reordered tensor of
    the two fillings.
    """
    views = [machine_view(rng, random_interface(rng, 2, tag=f"i{k}"),
                          instance) for k in (0, 1)]
    s1, a1 = views[0].src.s, views[0].dst.a
    s2, a2 = views[1].src.s, views[1].dst.a
    if product:
        p = tensor(random_dist(rng, s1 @ a1, instance),
                   random_dist(rng, s2 @ a2, instance))
    else:
        p = random_dist(rng, s1 @ a1 @ s2 @ a2, instance)
    c1, c2 = views[0].dst.c, views[1].dst.c
    q = compose_all([
        p,
        tensor_all([views[0].f, identity(a1), views[1].f, identity(a2)]),
        select_blocks([c1, a1, c2, a2], [0, 2, 1, 3]),
    ])
    iface12 = views[0].dst @ views[1].dst
    g012 = Chart(UNIT_INTERFACE, iface12, UNIT_INTERFACE,
                 compose(q, select_blocks([c1, c2, a1, a2], [0, 1])), q)
    parts = [s1, a1, s2, a2]
    sq1 = behavior_square(views[0], compose(p, select_blocks(parts, [0, 1])))
    sq2 = behavior_square(views[1], compose(p, select_blocks(parts, [2, 3])))
    return sq1, sq2, g012, views, p


# ---------------------------------------------------------------------------
# chain-indexed systems

def random_history_machine(rng: random.Random, horizon: int = 2,
                           instance: str = "stoch", closed: bool = False,
                           max_size: int = 3) -> dict:
    """A history-expanded machine together with its one-step data.

    The dict holds the one-step objects and kernels (``state``,
    ``inputs``, ``outputs``, ``expose``, ``update``), the expanded
    ``system`` and a random ``initial`` state law.  With ``closed=True``
    the input object is the unit.
    """
    state = random_object(rng, max_size, 2, tag="s")
    inputs = UNIT if closed else random_object(rng, max_size, 2, tag="i")
    outputs = random_object(rng, max_size, 2, tag="o")
    expose = random_det(rng, state, outputs)
    update = random_kernel(rng, state @ inputs, state, instance)
    return {
        "state": state, "inputs": inputs, "outputs": outputs,
        "expose": expose, "update": update,
        "system": make_open_markov_system(state, inputs, outputs, expose,
                                          update, horizon),
        "initial": random_dist(rng, state, instance),
    }


def random_history_wiring(rng: random.Random, machine: dict, horizon: int,
                          outer_closed: bool = False,
                          max_size: int = 3) -> dict:
    """A history wiring off a machine's one-step interface."""
    outer_in = UNIT if outer_closed else random_object(rng, max_size, 2,
                                                       tag="j")
    outer_out = random_object(rng, max_size, 2, tag="p")
    forward = random_det(rng, machine["outputs"], outer_out)
    backward = random_det(rng, machine["outputs"] @ outer_in,
                          machine["inputs"])
    return {
        "outer_inputs": outer_in, "outer_outputs": outer_out,
        "forward": forward, "backward": backward,
        "wiring": history_wiring(machine["inputs"], machine["outputs"],
                                 outer_in, outer_out, forward, backward,
                                 horizon),
    }


def exogenous_wired_trajectory(rng: random.Random, machine: dict,
                               wiring_data: dict, horizon: int,
                               instance: str = "stoch"):
    """Unroll a wired composite with output-blind, freshly drawn outer inputs.

    Returns ``(wired_system, trajectory)``.  Because the environment never
    looks at the outputs, the factorization hypotheses both hold for the
    result.
    """
    wired = compose_system_with_lens(machine["system"], wiring_data["wiring"])
    fresh = random_dist(rng, wiring_data["outer_inputs"], instance)
    step = compose(discard_map(wiring_data["outer_outputs"]), fresh)
    policies = history_policy(wiring_data["outer_outputs"],
                              wiring_data["outer_inputs"], step, horizon)
    return wired, unroll_trajectory(wired, machine["initial"], policies)


def reactive_environment_cells(traj, wiring, base_output: FiniteObject,
                               step: Morphism) -> list:
    """Environment cells whose outer input reacts to the newest machine output.

    Only meaningful over wirings whose inner inputs are units (a closed
    machine): then any coupling with the right output marginal is
    compatible with the trajectory.  ``step`` maps the one-step inner
    output to the one-step outer input; outer input ``k + 1`` is drawn
    from output ``k``.
    """
    cells = []
    for n in range(wiring.horizon):
        out_hist = wiring.inner_outputs.objects[n]
        in_hist = wiring.inner_inputs.objects[n + 1]
        marginal = compose(traj.io_joints[n],
                           select_blocks([out_hist, in_hist], [0]))
        blocks = [base_output] * (n + 1)
        coupling = compose_all([
            marginal,
            select_blocks(blocks, list(range(n + 1)) + list(range(n + 1))),
            tensor(identity(out_hist), tensor_all([step] * (n + 1))),
        ])
        cells.append(environment_cell(wiring_lens(wiring, n), coupling))
    return cells

# ---------------------------------------------------------------------------
# input/output-stepping machines

def random_mealy(rng: random.Random, src: IndexedObject, dst: IndexedObject,
                 instance: str = "stoch", max_size: int = 3) -> GMealy:
    """A machine with history state: each step appends one memory cell.

    The appended cell is drawn jointly with the fresh output, so output
    and memory are genuinely correlated; the state-shadow condition
    holds by construction.
    """
    horizon = src.horizon
    base = random_object(rng, max_size, 2, tag="v")
    state = IndexedObject(
        [history_object(base, n + 1) for n in range(horizon + 1)],
        [select_blocks([base] * (n + 2), list(range(n + 1)))
         for n in range(horizon)])
    steps = []
    for n in range(horizon):
        a = src.objects[n + 1]
        s0 = state.objects[n]
        joint = random_kernel(rng, a @ s0, dst.objects[n + 1] @ base,
                              instance)
        steps.append(compose_all([
            select_blocks([a, s0], [0, 1, 1]),
            tensor(joint, identity(s0)),
            select_blocks([dst.objects[n + 1], base, s0], [0, 2, 1]),
        ]))
    return GMealy(src, dst, state, steps)


def random_para_mealy(rng: random.Random, horizon: int,
                      src: FiniteObject = None, instance: str = "stoch",
                      max_size: int = 3) -> GParaMealy:
    """A parametric machine on constant families with a frozen state.

    Constant families force the steps to repeat one kernel, which makes
    the cross-edge restriction condition hold automatically.
    """
    a = src if src is not None else random_object(rng, max_size, 2, tag="a")
    b = random_object(rng, max_size, 2, tag="b")
    w = random_object(rng, max_size, 2, tag="w")
    s = random_object(rng, max_size, 2, tag="s")
    out = random_kernel(rng, a @ w @ s, b, instance)
    step = compose(select_blocks([a, w, s], [0, 1, 2, 2]),
                   tensor(out, identity(s)))
    return GParaMealy(IndexedObject.constant(a, horizon),
                      IndexedObject.constant(b, horizon),
                      IndexedObject.constant(s, horizon),
                      IndexedObject.constant(w, horizon),
                      [step] * horizon)
