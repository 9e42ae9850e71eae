"""Seeded law suites, shared by the command line and the test gate.

Each suite draws cases from one :class:`random.Random` stream and checks
an algebraic law exactly (rational arithmetic, equality on the nose).
Runs are sequential and deterministic: the same suite, case count and
seed produce the same report on any platform.  Failures carry a
loadable model document so a counterexample can be replayed.
"""

import random
import time
from fractions import Fraction

from .errors import UnknownSuite
from .objects import UNIT, FiniteObject
from .markov import (DetKernel, PossKernel, StochKernel,
                     almost_surely_equal, as_det, compose, conditional,
                     conditional_product, dirac, displays_cond_indep,
                     identity, joint_from_conditional, marginal,
                     morphism_equal, permute_blocks, select_blocks, tensor,
                     tensor_all)
from .arena import validate_xy, xy_compose_x, xy_compose_y
from .arenasys import (nabla, nabla_projection, sys_xy_compose_x,
                       sys_xy_compose_y, validate_sys_xy,
                       y_regeneration_holds)
from .timesys import (IndexedObject, check_time_coherence,
                      compose_system_with_lens, factorization_check,
                      history_policy, trajectory_square, unroll_trajectory,
                      wiring_compose)
from .uniformize import push_uniform, uniformize
from .mealy import (mealy_compose, mealy_identity, mealy_tensor,
                    moore_to_mealy, stateless_mealy)
from .arena import chart_compose, lens_compose
from . import generate
from .modelio import counterexample_document


class LawReport:
    """Outcome of one suite run; ``failures`` are replayable documents."""

    __slots__ = ("suite", "cases", "passed", "failures", "seed", "elapsed")

    def __init__(self, suite: str, cases: int, passed: int, failures,
                 seed: int, elapsed: float):
        self.suite = suite
        self.cases = cases
        self.passed = passed
        self.failures = tuple(failures)
        self.seed = seed
        self.elapsed = elapsed

    @property
    def ok(self) -> bool:
        return self.passed == self.cases

    def summary(self) -> str:
        lines = [f"suite {self.suite}: {self.passed}/{self.cases} cases "
                 f"passed (seed {self.seed})"]
        if self.cases == 0:
            lines.append("warning: zero cases requested; nothing was "
                         "checked")
        if self.failures:
            first = self.failures[0]
            lines.append(f"first counterexample: case {first['case']}, "
                         f"{first['law']}")
        return "\n".join(lines)

    def __repr__(self) -> str:
        status = "ok" if self.ok else f"{self.cases - self.passed} failed"
        return f"LawReport({self.suite}: {status})"


def _fail(law: str, kernels: dict) -> dict:
    return {"law": law, "model": counterexample_document(kernels)}


def _support(kernel) -> set:
    if isinstance(kernel, DetKernel):
        return set(kernel.mapping)
    if isinstance(kernel, StochKernel):
        return {col for row in kernel.rows for col, _ in row}
    return {col for row in kernel.rows for col in row}


def _identity_on(rng: random.Random, obj: FiniteObject, supported: set,
                 instance: str):
    """A random endo-kernel forced to act as the identity on ``supported``."""
    base = generate.random_kernel(rng, obj, obj, instance)
    if instance == "stoch":
        rows = [[(j, Fraction(1))] if j in supported else list(base.rows[j])
                for j in range(obj.size)]
        return StochKernel(obj, obj, rows)
    rows = [[j] if j in supported else sorted(base.rows[j])
            for j in range(obj.size)]
    return PossKernel(obj, obj, rows)


# ---------------------------------------------------------------------------
# kernel-level suites

def _case_conditionals(rng: random.Random, index: int):
    instance = "poss" if index % 4 == 3 else "stoch"
    a = generate.random_object(rng, 4, 1, tag="a")
    x = generate.random_object(rng, 4, 1, tag="x")
    y = generate.random_object(rng, 4, 1, tag="y")
    phi = generate.random_kernel(rng, a, x @ y, instance)
    left = marginal(phi, [0])
    for default in ("uniform", "first"):
        if joint_from_conditional(left, conditional(phi, 1, default)) != phi:
            return _fail(f"conditional reconstruction (default={default})",
                         {"joint": phi})
    return None


def _shared_marginal_pair(rng: random.Random, instance: str):
    """Two joints over a common middle factor, sometimes with dead points."""
    a = generate.random_object(rng, 3, 1, tag="a")
    x = generate.random_object(rng, 3, 1, tag="x")
    y = generate.random_object(rng, 3, 2, tag="y")
    z = generate.random_object(rng, 3, 1, tag="z")
    if rng.random() < 0.5:
        # leave the last point of y unreachable to exercise the defaults
        sub = FiniteObject(y.labels[:-1])
        middle = compose(generate.random_kernel(rng, a, sub, instance),
                         DetKernel(sub, y, tuple(range(sub.size))))
    else:
        middle = generate.random_kernel(rng, a, y, instance)
    f = compose(
        joint_from_conditional(middle,
                               generate.random_kernel(rng, a @ y, x,
                                                      instance)),
        permute_blocks([y, x], [1, 0]))
    g = joint_from_conditional(middle,
                               generate.random_kernel(rng, a @ y, z,
                                                      instance))
    return a, f, g


def _case_conditional_product(rng: random.Random, index: int):
    a, f, g = _shared_marginal_pair(rng, "stoch")
    glued = conditional_product(f, g, over=1)
    if glued != conditional_product(f, g, over=1, default="first"):
        return _fail("conditional product depends on the zero-mass default",
                     {"left": f, "right": g})
    if marginal(glued, [0, 1]) != f or marginal(glued, [1, 2]) != g:
        return _fail("conditional product loses a marginal",
                     {"left": f, "right": g})
    for label in a.labels:
        state = compose(dirac(a, label), glued)
        if not displays_cond_indep(state, ((0,), (1,), (2,))):
            return _fail("conditional product hides the independence",
                         {"left": f, "right": g})
    return None


def _case_semigraphoid(rng: random.Random, index: int):
    z = generate.random_object(rng, 3, 1, tag="z")
    x = generate.random_object(rng, 3, 1, tag="x")
    y = generate.random_object(rng, 3, 1, tag="y")
    w = generate.random_object(rng, 3, 1, tag="w")
    p = joint_from_conditional(generate.random_dist(rng, z, "stoch"),
                               generate.random_kernel(rng, z, x, "stoch"))
    p = joint_from_conditional(
        p, compose(select_blocks([z, x], [0]),
                   generate.random_kernel(rng, z, y, "stoch")))
    p = joint_from_conditional(
        p, compose(select_blocks([z, x, y], [0, 2]),
                   generate.random_kernel(rng, z @ y, w, "stoch")))
    # factor indices: 0 = condition, 1 = left, 2/3 = the two right parts
    statements = (
        ("base statement", ((1,), (0,), (2, 3))),
        ("symmetry", ((2, 3), (0,), (1,))),
        ("decomposition", ((1,), (0,), (2,))),
        ("decomposition", ((1,), (0,), (3,))),
        ("weak union", ((1,), (0, 3), (2,))),
        ("weak union", ((1,), (0, 2), (3,))),
        ("contraction", ((1,), (0,), (2, 3))),
    )
    for law, groups in statements:
        if not displays_cond_indep(p, groups):
            return _fail(f"semigraphoid {law} {groups}", {"joint": p})
    return None


def _case_almost_sure(rng: random.Random, index: int):
    instance = "poss" if index % 2 else "stoch"
    a, f, g = _shared_marginal_pair(rng, instance)
    glued = conditional_product(f, g, over=1, default="first")
    x_obj = glued.cod.restrict([0])
    y_obj = glued.cod.restrict([1])
    z_obj = glued.cod.restrict([2])
    absorbed = _identity_on(rng, x_obj @ y_obj, _support(f), instance)
    if not morphism_equal(compose(glued, tensor(absorbed, identity(z_obj))),
                          glued):
        return _fail("a.s.-identity maps must be absorbed on the left",
                     {"joint": glued, "map": absorbed})
    absorbed = _identity_on(rng, y_obj @ z_obj, _support(g), instance)
    if not morphism_equal(compose(glued, tensor(identity(x_obj), absorbed)),
                          glued):
        return _fail("a.s.-identity maps must be absorbed on the right",
                     {"joint": glued, "map": absorbed})
    # a copied-and-mapped coordinate is a.s. recoverable from its source
    chi = generate.random_kernel(rng, a, x_obj @ y_obj, instance)
    d = generate.random_det(rng, y_obj, z_obj)
    append = compose(select_blocks([x_obj, y_obj], [0, 1, 1]),
                     tensor_all([identity(x_obj), identity(y_obj), d]))
    phi = compose(chi, append)
    recover = compose(select_blocks([x_obj, y_obj, z_obj], [0, 1, 1]),
                      tensor_all([identity(x_obj), identity(y_obj), d]))
    if not almost_surely_equal(phi, recover, identity(phi.cod)):
        return _fail("recovering a copied coordinate must be a.s. identity",
                     {"joint": phi, "map": recover})
    return None


# ---------------------------------------------------------------------------
# interface-level suites

def _case_lens_assoc(rng: random.Random, index: int):
    ifs = [generate.random_interface(rng, tag=f"i{k}") for k in range(4)]
    a, b, c = (generate.random_lens(rng, ifs[k], ifs[k + 1])
               for k in range(3))
    if (lens_compose(lens_compose(a, b), c)
            != lens_compose(a, lens_compose(b, c))):
        return _fail("lens composition associativity",
                     {"first": a.f, "second": b.f, "third": c.f})
    return None


def _case_chart_assoc(rng: random.Random, index: int):
    ifs = [generate.random_interface(rng, 2, tag=f"i{k}") for k in range(4)]
    x1 = generate.random_chart(rng, ifs[0], ifs[1], instance="stoch")
    x2 = generate.random_chart(rng, ifs[1], ifs[2], instance="stoch")
    x3 = generate.random_chart(rng, ifs[2], ifs[3], instance="stoch")
    if (chart_compose(chart_compose(x1, x2), x3)
            != chart_compose(x1, chart_compose(x2, x3))):
        return _fail("chart composition associativity",
                     {"first": x1.gflat, "second": x2.gflat,
                      "third": x3.gflat})
    return None


def _case_arena_interchange(rng: random.Random, index: int):
    s, t, u, v = generate.arena_interchange_grid(rng)
    lhs = xy_compose_y(xy_compose_x(s, u), xy_compose_x(t, v))
    rhs = xy_compose_x(xy_compose_y(s, t), xy_compose_y(u, v))
    problem = validate_xy(lhs)
    if problem is not None or lhs != rhs:
        return _fail("interchange of square composition",
                     {"top_left": s.filling, "top_right": t.filling,
                      "bottom_left": u.filling, "bottom_right": v.filling})
    return None


def _case_arenasys_interchange(rng: random.Random, index: int):
    instance = "poss" if index % 2 else "stoch"
    s, t, u, v = generate.sys_interchange_grid(rng, instance)
    lhs = sys_xy_compose_y(sys_xy_compose_x(s, t), xy_compose_x(u, v))
    rhs = sys_xy_compose_x(sys_xy_compose_y(s, u), sys_xy_compose_y(t, v))
    problem = validate_sys_xy(lhs)
    if problem is not None or lhs != rhs:
        return _fail("interchange of system-square composition",
                     {"left": s.filling, "right": t.filling})
    return None


def _case_interchange(rng: random.Random, index: int):
    return (_case_arena_interchange(rng, index)
            or _case_arenasys_interchange(rng, index))


def _case_y_assoc(rng: random.Random, index: int):
    instance = "poss" if index % 2 else "stoch"
    s, t, u = generate.sys_y_assoc_triple(rng, instance)
    if not y_regeneration_holds(s, t):
        return _fail("y-regeneration on a composable pair",
                     {"square": s.filling})
    left = sys_xy_compose_y(sys_xy_compose_y(s, t), u)
    right = sys_xy_compose_y(s, xy_compose_y(t, u))
    problem = validate_sys_xy(left)
    if problem is not None or left != right:
        return _fail("associativity of y-composition",
                     {"square": s.filling})
    return None


def _case_tensor_behavior(rng: random.Random, index: int):
    instance = "poss" if index % 3 == 2 else "stoch"
    sq1, sq2, g012, views, _ = generate.nabla_pair(rng, instance)
    glued = nabla(sq1, sq2, g012)
    if (nabla_projection(glued, views[0], views[1], 0) != sq1
            or nabla_projection(glued, views[0], views[1], 1) != sq2):
        return _fail("glued square must project onto its inputs",
                     {"first": sq1.filling, "second": sq2.filling,
                      "joint": glued.filling})
    return None


# ---------------------------------------------------------------------------
# chain-system suites

def _dense_state(kernel) -> list:
    if isinstance(kernel, DetKernel):
        kernel = kernel.as_stoch()
    return kernel.dense()


def _brute_force_state_law(machine: dict, policy_step, horizon: int) -> dict:
    """Path-sum over explicit state/input paths; independent of unroll."""
    state, inputs = machine["state"], machine["inputs"]
    init = _dense_state(machine["initial"])[0]
    update = _dense_state(machine["update"])
    expose = as_det(machine["expose"]).mapping
    policy = _dense_state(policy_step) if policy_step is not None else None
    law: dict = {}

    def walk(path, weight):
        if len(path) == horizon + 1:
            law[tuple(path)] = law.get(tuple(path), Fraction(0)) + weight
            return
        here = path[-1]
        for i in range(inputs.size):
            through = weight if policy is None else \
                weight * policy[expose[here]][i]
            if not through:
                continue
            for nxt, w in enumerate(update[here * inputs.size + i]):
                if w:
                    walk(path + [nxt], through * w)

    for s0, w0 in enumerate(init):
        if w0:
            walk([s0], w0)
    return law


def _case_trajectory(rng: random.Random, index: int):
    horizon = rng.randrange(1, 3)
    closed = index % 2 == 0
    machine = generate.random_history_machine(rng, horizon, "stoch",
                                              closed=closed, max_size=2)
    sys = machine["system"]
    policy_step = None
    policies = None
    if not closed:
        policy_step = generate.random_kernel(rng, machine["outputs"],
                                             machine["inputs"], "stoch")
        policies = history_policy(machine["outputs"], machine["inputs"],
                                  policy_step, horizon)
    traj = unroll_trajectory(sys, machine["initial"], policies)
    probe = {"update": machine["update"], "initial": machine["initial"]}
    for n in range(horizon):
        problem = validate_sys_xy(trajectory_square(traj, n))
        if problem is not None:
            return _fail(f"unrolled edge {n}: {problem}", probe)
    if not check_time_coherence(traj).ok:
        return _fail("direct unrolling must be time-coherent", probe)
    for n in range(horizon):
        state_part = range(sys.state.objects[n].nfactors)
        if not morphism_equal(marginal(traj.joints[n], state_part),
                              traj.states[n]):
            return _fail(f"joint {n} must marginalize to the state law",
                         probe)
        pushed = compose(traj.joints[n],
                         tensor(sys.exposes[n],
                                identity(sys.inputs.objects[n + 1])))
        if not morphism_equal(pushed, traj.io_joints[n]):
            return _fail(f"interface joint {n} must be the readout image",
                         probe)
    law = _brute_force_state_law(machine, policy_step, horizon)
    size = machine["state"].size
    packed = {}
    for path, weight in law.items():
        col = 0
        for s in path:
            col = col * size + s
        packed[col] = weight
    if packed != dict(traj.states[horizon].rows[0]):
        return _fail("unrolled state law must match the path sum", probe)
    # composing two rewirings agrees with rewiring by the composite
    first = generate.random_history_wiring(rng, machine, horizon)
    outer = {"inputs": first["outer_inputs"],
             "outputs": first["outer_outputs"]}
    second = generate.random_history_wiring(rng, outer, horizon)
    once = compose_system_with_lens(
        sys, wiring_compose(first["wiring"], second["wiring"]))
    twice = compose_system_with_lens(
        compose_system_with_lens(sys, first["wiring"]), second["wiring"])
    if once != twice:
        return _fail("rewiring must be associative", probe)
    return None


def _case_time_coherence(rng: random.Random, index: int):
    horizon = rng.randrange(1, 3) + 1
    instance = "poss" if index % 3 == 2 else "stoch"
    machine = generate.random_history_machine(rng, horizon, instance,
                                              closed=index % 2 == 0,
                                              max_size=2)
    probe = {"update": machine["update"], "initial": machine["initial"]}
    wdata = generate.random_history_wiring(rng, machine, horizon)
    _, traj = generate.exogenous_wired_trajectory(rng, machine, wdata,
                                                  horizon, instance)
    report = check_time_coherence(traj)
    if not report.ok:
        return _fail(f"unrolled composite must be coherent ({report!r})",
                     probe)
    return None


def _case_factorization(rng: random.Random, index: int):
    horizon = rng.randrange(1, 3)
    machine = generate.random_history_machine(rng, horizon, "stoch",
                                              max_size=2)
    wdata = generate.random_history_wiring(rng, machine, horizon)
    _, traj = generate.exogenous_wired_trajectory(rng, machine, wdata,
                                                  horizon)
    report = factorization_check(traj, machine["system"], wdata["wiring"])
    if report.describe() != "factorization holds":
        return _fail(f"output-blind composite must factorize "
                     f"({report.describe()})",
                     {"update": machine["update"],
                      "initial": machine["initial"]})
    return None


# ---------------------------------------------------------------------------
# uniformization and stepwise machines

def _case_uniformize(rng: random.Random, index: int):
    dom = generate.random_object(rng, 4, 1, tag="d")
    cod = generate.random_object(rng, 4, 1, tag="c")
    kernel = generate.random_stoch(rng, dom, cod)
    part = uniformize(kernel)
    for r, row in enumerate(kernel.dense()):
        running = [Fraction(0)]
        for w in row:
            running.append(running[-1] + w)
        if list(part.breakpoints[r]) != running:
            return _fail(f"breakpoints of row {r} must be the running sums",
                         {"kernel": kernel})
    if push_uniform(part) != kernel:
        return _fail("interval lengths must reproduce the kernel",
                     {"kernel": kernel})
    mapping = generate.random_det(rng, dom, cod)
    back = as_det(push_uniform(uniformize(mapping)))
    if back.mapping != mapping.mapping:
        return _fail("deterministic kernels must round-trip",
                     {"kernel": mapping})
    return None


def _case_mealy(rng: random.Random, index: int):
    fams = [IndexedObject.constant(generate.random_object(rng, 3, 1, tag=t),
                                   2) for t in "abcxyz"]
    a, b, c, x, y, z = fams

    def machine(src, dst):
        return stateless_mealy(src, dst, [
            generate.random_kernel(rng, src.objects[n + 1],
                                   dst.objects[n + 1], "stoch")
            for n in range(2)])

    f, g, h = machine(a, b), machine(b, c), machine(c, a)
    if (mealy_compose(mealy_compose(f, g), h)
            != mealy_compose(f, mealy_compose(g, h))):
        return _fail("stepwise composition associativity",
                     {"first": f.steps[0], "second": g.steps[0],
                      "third": h.steps[0]})
    p, q = machine(x, y), machine(y, z)
    lhs = mealy_tensor(mealy_compose(f, g), mealy_compose(p, q))
    rhs = mealy_compose(mealy_tensor(f, p), mealy_tensor(g, q))
    if lhs != rhs:
        return _fail("stepwise interchange",
                     {"first": f.steps[0], "second": g.steps[0],
                      "third": p.steps[0], "fourth": q.steps[0]})
    if index % 4 == 3:
        stateful = generate.random_mealy(rng, a, b, max_size=2)
        if (mealy_compose(mealy_identity(a), stateful) != stateful
                or mealy_compose(stateful, mealy_identity(b)) != stateful):
            return _fail("identity machines must be neutral",
                         {"step": stateful.steps[0]})
        machine_data = generate.random_history_machine(rng, 2, "stoch",
                                                       max_size=2)
        embedded = moore_to_mealy(machine_data["system"])
        if embedded.state != machine_data["system"].state:
            return _fail("readout systems must embed state-for-state",
                         {"update": machine_data["update"]})
    return None


# ---------------------------------------------------------------------------
# runner

SUITES = {
    "conditionals": _case_conditionals,
    "conditional-product": _case_conditional_product,
    "semigraphoid": _case_semigraphoid,
    "almost-sure": _case_almost_sure,
    "lens-assoc": _case_lens_assoc,
    "chart-assoc": _case_chart_assoc,
    "arena-interchange": _case_arena_interchange,
    "arenasys-interchange": _case_arenasys_interchange,
    "interchange": _case_interchange,
    "y-assoc": _case_y_assoc,
    "tensor-behavior": _case_tensor_behavior,
    "trajectory": _case_trajectory,
    "time-coherence": _case_time_coherence,
    "factorization": _case_factorization,
    "uniformize": _case_uniformize,
    "mealy": _case_mealy,
}


def suite_names() -> tuple:
    return tuple(sorted(SUITES))


def run_suite(name: str, cases: int = 50, seed: int = 0) -> LawReport:
    """Run ``cases`` seeded checks of the named law suite."""
    if name not in SUITES:
        raise UnknownSuite(
            f"unknown suite {name!r}; available: {', '.join(suite_names())}")
    if cases < 0:
        raise UnknownSuite("the case count cannot be negative")
    case = SUITES[name]
    rng = random.Random(seed)
    failures = []
    started = time.perf_counter()
    for index in range(cases):
        failure = case(rng, index)
        if failure is not None:
            failure["case"] = index
            failures.append(failure)
    elapsed = time.perf_counter() - started
    return LawReport(name, cases, cases - len(failures), failures, seed,
                     elapsed)
