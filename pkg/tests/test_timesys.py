"""Chain-indexed systems: unrolling, wiring, coherence, factorization."""

import random
from fractions import Fraction

import pytest

from conftest import (
    assert_trajectory_matches_law,
    dist_table,
    one_step_wired,
    path_law,
)
from mksys import (
    BoundaryMismatch,
    DetKernel,
    FiniteObject,
    NaturalityViolation,
    ObjectMismatch,
    PossKernel,
    ShapeMismatch,
    StochKernel,
    UNIT,
    ValidationError,
    compose,
    dirac,
    discard_map,
    identity,
    is_deterministic,
    morphism_equal,
    tensor,
    uniform_dist,
)
from mksys.arena import environment_cell
from mksys.markov import select_blocks
from mksys.timesys import (
    ChainGraph,
    GSystem,
    GTrajectory,
    GWiring,
    IndexedObject,
    check_time_coherence,
    clock_system,
    compose_system_with_lens,
    factorization_check,
    history_object,
    history_policy,
    history_wiring,
    identity_wiring,
    lift_trajectory,
    make_open_markov_system,
    search_time_coherence_counterexample,
    system_view,
    unroll_trajectory,
    wiring_compose,
    wiring_lens,
)
from mksys.generate import (
    exogenous_wired_trajectory,
    random_history_machine,
    random_history_wiring,
    random_kernel,
    reactive_environment_cells,
)

F = Fraction

TWO = FiniteObject(["0", "1"])
FLIP = DetKernel(TWO, TWO, (1, 0))
# lazy coin: state "0" flips a fair coin each step, state "1" is absorbing
COIN = StochKernel(TWO, TWO, [[(0, F(1, 2)), (1, F(1, 2))], [(1, F(1))]])


def two_state_chain(horizon=2):
    return make_open_markov_system(TWO, UNIT, TWO, identity(TWO), COIN,
                                   horizon)


def coin_machine(horizon=2):
    """One-step dict for the lazy coin, shaped like the generator output."""
    return {"state": TWO, "inputs": UNIT, "outputs": TWO,
            "expose": identity(TWO), "update": COIN,
            "system": two_state_chain(horizon),
            "initial": dirac(TWO, ("0",))}


# ---------------------------------------------------------------------------
# graphs, indexed objects, systems

def test_chain_graph_shape():
    g = ChainGraph(3)
    assert list(g.nodes) == [0, 1, 2, 3]
    assert list(g.edges) == [0, 1, 2]
    assert g == ChainGraph(3) and hash(g) == hash(ChainGraph(3))
    assert g != ChainGraph(2)
    with pytest.raises(ShapeMismatch, match="at least one edge"):
        ChainGraph(0)


def test_history_object_is_a_tensor_power():
    assert history_object(TWO, 0) == UNIT
    assert history_object(TWO, 3).size == 8
    assert history_object(TWO, 2).decode(1) == ("0", "1")
    with pytest.raises(ShapeMismatch):
        history_object(TWO, -1)


def test_indexed_object_checks_restriction_boundaries():
    with pytest.raises(ObjectMismatch, match="restriction 0 must map node 1"):
        IndexedObject([TWO, TWO @ TWO], [identity(TWO)])
    with pytest.raises(ShapeMismatch, match="one restriction per edge"):
        IndexedObject([TWO, TWO], [])
    family = IndexedObject.constant(TWO, 2)
    assert family.horizon == 2
    assert family == IndexedObject.constant(TWO, 2)


def test_restriction_chain_composes_drop_last_maps():
    state = two_state_chain(3).state
    hop = state.restriction_chain(3, 1)
    assert morphism_equal(hop, select_blocks([TWO] * 4, [0, 1]))
    assert morphism_equal(state.restriction_chain(2, 2),
                          identity(history_object(TWO, 3)))
    with pytest.raises(ShapeMismatch, match="no restriction chain"):
        state.restriction_chain(0, 2)


def test_system_rejects_mismatched_families():
    state = IndexedObject.constant(TWO, 1)
    unitf = IndexedObject.constant(UNIT, 1)
    with pytest.raises(ShapeMismatch, match="one readout per node"):
        GSystem(state, unitf, state, [identity(TWO)], [identity(TWO)])
    with pytest.raises(ObjectMismatch, match="readout 1 has the wrong"):
        GSystem(state, unitf, unitf, [discard_map(TWO), identity(TWO)],
                [identity(TWO)])


def test_system_naturality_violations_name_the_edge():
    state = IndexedObject.constant(TWO, 1)
    unitf = IndexedObject.constant(UNIT, 1)
    outs = IndexedObject.constant(TWO, 1)
    with pytest.raises(NaturalityViolation,
                       match="edge 0: readouts do not commute"):
        GSystem(state, unitf, outs, [identity(TWO), FLIP], [identity(TWO)])
    with pytest.raises(NaturalityViolation,
                       match="updating then restricting"):
        GSystem(state, unitf, outs, [identity(TWO), identity(TWO)], [FLIP])


def test_system_view_packages_one_edge():
    sys = two_state_chain(2)
    view = system_view(sys, 1)
    assert view.src.s == history_object(TWO, 2)
    assert view.dst.a == history_object(UNIT, 2)
    assert morphism_equal(view.f, sys.exposes[1])
    with pytest.raises(ShapeMismatch, match="no edge 2"):
        system_view(sys, 2)


def test_clock_system_ticks_trivially():
    clock = clock_system(3)
    traj = unroll_trajectory(clock, dirac(UNIT, ()))
    assert all(s.cod == UNIT for s in traj.states)
    assert check_time_coherence(traj).ok


# ---------------------------------------------------------------------------
# unrolling against hand computation and brute force

def test_lazy_coin_marginal_at_time_two():
    traj = unroll_trajectory(two_state_chain(2), dirac(TWO, ("0",)))
    assert dist_table(traj.states[2]) == {
        ("0", "0", "0"): F(1, 4),
        ("0", "0", "1"): F(1, 4),
        ("0", "1", "1"): F(1, 2),
    }


def test_deterministic_closed_machine_stays_deterministic():
    sys = make_open_markov_system(TWO, UNIT, TWO, identity(TWO), FLIP, 3)
    traj = unroll_trajectory(sys, dirac(TWO, ("0",)))
    assert all(is_deterministic(s) for s in traj.states)
    assert dist_table(traj.states[3]) == {("0", "1", "0", "1"): F(1)}


def test_closed_unroll_matches_path_enumeration():
    traj = unroll_trajectory(two_state_chain(3), dirac(TWO, ("0",)))
    machine = coin_machine(3)
    assert_trajectory_matches_law(traj, machine, path_law(machine, None, 3))
    assert check_time_coherence(traj).ok


def test_random_closed_unrolls_match_path_enumeration():
    for seed in range(4):
        rng = random.Random(1000 + seed)
        horizon = rng.randrange(1, 4)
        machine = random_history_machine(rng, horizon, closed=True)
        traj = unroll_trajectory(machine["system"], machine["initial"])
        law = path_law(machine, None, horizon)
        assert_trajectory_matches_law(traj, machine, law)
        assert check_time_coherence(traj).ok


def test_random_open_unrolls_match_path_enumeration():
    for seed in range(4):
        rng = random.Random(2000 + seed)
        horizon = rng.randrange(1, 4)
        machine = random_history_machine(rng, horizon)
        step = random_kernel(rng, machine["outputs"], machine["inputs"])
        policies = history_policy(machine["outputs"], machine["inputs"],
                                  step, horizon)
        traj = unroll_trajectory(machine["system"], machine["initial"],
                                 policies)
        law = path_law(machine, step, horizon)
        assert_trajectory_matches_law(traj, machine, law)
        assert check_time_coherence(traj).ok


def test_possibilistic_unroll_round_trip():
    rng = random.Random(7)
    machine = random_history_machine(rng, 2, instance="poss", closed=True)
    traj = unroll_trajectory(machine["system"], machine["initial"])
    assert isinstance(traj.states[2], PossKernel)
    assert check_time_coherence(traj).ok


def test_unroll_rejects_bad_shapes():
    sys = two_state_chain(2)
    with pytest.raises(ShapeMismatch, match="state law at node 0"):
        unroll_trajectory(sys, dirac(TWO @ TWO, ("0", "0")))
    open_sys = make_open_markov_system(
        TWO, TWO, TWO, identity(TWO), select_blocks([TWO, TWO], [1]), 2)
    with pytest.raises(ShapeMismatch, match="explicit input policies"):
        unroll_trajectory(open_sys, dirac(TWO, ("0",)))
    with pytest.raises(ShapeMismatch, match="one input policy per edge"):
        unroll_trajectory(open_sys, dirac(TWO, ("0",)), [identity(TWO)])
    with pytest.raises(ShapeMismatch, match="input policy 1 has the wrong"):
        unroll_trajectory(open_sys, dirac(TWO, ("0",)),
                          [identity(TWO), identity(TWO)])


def test_unroll_rejects_non_extension_policies():
    # the second policy rebuilds the whole input history and flips the
    # first coordinate, so the interface joints stop being compatible
    sys = make_open_markov_system(
        TWO, TWO, TWO, identity(TWO), select_blocks([TWO, TWO], [1]), 2)
    first = DetKernel(TWO, TWO, (1, 1))
    second = compose(select_blocks([TWO] * 3, [2, 2]),
                     tensor(FLIP, identity(TWO)))
    with pytest.raises(NaturalityViolation,
                       match="interface joint does not restrict"):
        unroll_trajectory(sys, dirac(TWO, ("0",)), [first, second])


def test_trajectory_constructor_validates_each_edge():
    sys = two_state_chain(1)
    traj = unroll_trajectory(sys, dirac(TWO, ("0",)))
    with pytest.raises(ObjectMismatch, match="joint 0 has the wrong"):
        GTrajectory(sys, traj.states, [dirac(TWO @ TWO, ("0", "0"))],
                    traj.io_joints)
    with pytest.raises(ValidationError, match="edge 0: equation"):
        GTrajectory(sys, traj.states, [dirac(TWO, ("1",))], traj.io_joints)


def test_trajectory_requires_compatible_state_laws():
    sys = two_state_chain(2)
    traj = unroll_trajectory(sys, uniform_dist(TWO))
    broken = [traj.states[0], traj.states[1],
              uniform_dist(history_object(TWO, 3))]
    with pytest.raises(NaturalityViolation,
                       match="node 2: state law does not restrict"):
        GTrajectory(sys, broken, traj.joints, traj.io_joints)


# ---------------------------------------------------------------------------
# wirings

def test_identity_wiring_is_neutral():
    sys = two_state_chain(2)
    wiring = identity_wiring(sys.inputs, sys.outputs)
    assert compose_system_with_lens(sys, wiring) == sys
    assert wiring_compose(wiring, wiring) == wiring


def test_wiring_validation_messages():
    sys = two_state_chain(1)
    outer = IndexedObject.constant(TWO, 1)
    with pytest.raises(ShapeMismatch, match="one forward map per node"):
        GWiring(sys.inputs, sys.outputs, sys.inputs, outer,
                [identity(TWO)], [select_blocks([TWO, UNIT], [0])])
    with pytest.raises(ObjectMismatch, match="forward map 1 has the wrong"):
        GWiring(sys.inputs, sys.outputs, sys.inputs, outer,
                [identity(TWO), identity(TWO)],
                [select_blocks([TWO, UNIT], [0])])


def test_wiring_forward_naturality_names_the_node():
    sys = two_state_chain(1)
    outer = IndexedObject.constant(TWO, 1)
    keep_second = select_blocks([TWO, TWO], [1])
    with pytest.raises(NaturalityViolation,
                       match="node 1: forward maps do not commute"):
        GWiring(sys.inputs, sys.outputs, sys.inputs, outer,
                [identity(TWO), keep_second], [discard_map(TWO)])


def test_wiring_backward_naturality_names_the_edge():
    sys = make_open_markov_system(
        TWO, TWO, TWO, identity(TWO), select_blocks([TWO, TWO], [1]), 2)
    wiring = identity_wiring(sys.inputs, sys.outputs)
    swapped = select_blocks([TWO] * 4, [3, 2])
    with pytest.raises(NaturalityViolation,
                       match="edge 1: backward maps do not commute"):
        GWiring(sys.inputs, sys.outputs, sys.inputs, sys.outputs,
                list(wiring.forwards), [wiring.backwards[0], swapped])


def test_history_wiring_rejects_bad_one_step_maps():
    with pytest.raises(ObjectMismatch, match="translate one output"):
        history_wiring(TWO, TWO, TWO, TWO, identity(TWO @ TWO),
                       select_blocks([TWO, TWO], [1]), 2)
    with pytest.raises(ObjectMismatch, match="one inner input"):
        history_wiring(TWO, TWO, TWO, TWO, identity(TWO), identity(TWO), 2)


def test_wiring_composition_acts_like_lens_composition():
    for seed in range(2):
        rng = random.Random(3000 + seed)
        horizon = 2
        machine = random_history_machine(rng, horizon)
        first = random_history_wiring(rng, machine, horizon)
        outer_step = {"inputs": first["outer_inputs"],
                      "outputs": first["outer_outputs"]}
        second = random_history_wiring(rng, outer_step, horizon)
        both = wiring_compose(first["wiring"], second["wiring"])
        once = compose_system_with_lens(machine["system"], both)
        twice = compose_system_with_lens(
            compose_system_with_lens(machine["system"], first["wiring"]),
            second["wiring"])
        assert once == twice


def test_wiring_compose_needs_a_common_interface():
    sys = two_state_chain(2)
    wiring = identity_wiring(sys.inputs, sys.outputs)
    other = identity_wiring(sys.inputs, IndexedObject.constant(TWO, 2))
    with pytest.raises(BoundaryMismatch, match="common interface"):
        wiring_compose(wiring, other)
    with pytest.raises(ObjectMismatch, match="sit on the system interface"):
        compose_system_with_lens(sys, other)


def test_history_expansion_commutes_with_wiring():
    # wiring the expanded machine equals expanding the wired one-step
    # machine; this pins down the composite updates pointwise
    for seed in range(2):
        rng = random.Random(4000 + seed)
        horizon = rng.randrange(1, 3)
        machine = random_history_machine(rng, horizon)
        wdata = random_history_wiring(rng, machine, horizon)
        wired = compose_system_with_lens(machine["system"], wdata["wiring"])
        step = one_step_wired(machine, wdata)
        assert wired == make_open_markov_system(
            step["state"], step["inputs"], step["outputs"], step["expose"],
            step["update"], horizon)


def test_wired_unroll_matches_one_step_oracle():
    for seed in range(3):
        rng = random.Random(5000 + seed)
        horizon = rng.randrange(1, 3)
        machine = random_history_machine(rng, horizon)
        wdata = random_history_wiring(rng, machine, horizon)
        wired = compose_system_with_lens(machine["system"], wdata["wiring"])
        step = random_kernel(rng, wdata["outer_outputs"],
                             wdata["outer_inputs"])
        traj = unroll_trajectory(
            wired, machine["initial"],
            history_policy(wdata["outer_outputs"], wdata["outer_inputs"],
                           step, horizon))
        oracle = one_step_wired(machine, wdata)
        assert_trajectory_matches_law(traj, oracle,
                                      path_law(oracle, step, horizon))


# ---------------------------------------------------------------------------
# lifting trajectories along wirings

def test_identity_lift_is_neutral():
    sys = two_state_chain(2)
    traj = unroll_trajectory(sys, uniform_dist(TWO))
    wiring = identity_wiring(sys.inputs, sys.outputs)
    cells = [environment_cell(wiring_lens(wiring, n), traj.io_joints[n])
             for n in range(2)]
    assert lift_trajectory(traj, wiring, cells) == traj


def test_lift_checks_cells_against_the_wiring():
    sys = two_state_chain(2)
    traj = unroll_trajectory(sys, uniform_dist(TWO))
    wiring = identity_wiring(sys.inputs, sys.outputs)
    cells = [environment_cell(wiring_lens(wiring, n), traj.io_joints[n])
             for n in range(2)]
    with pytest.raises(ShapeMismatch, match="one environment cell per edge"):
        lift_trajectory(traj, wiring, cells[:1])
    relabel = history_wiring(UNIT, TWO, UNIT, TWO, FLIP,
                             discard_map(TWO), 2)
    with pytest.raises(BoundaryMismatch,
                       match="edge 0: cell does not sit over"):
        lift_trajectory(traj, relabel, cells)


def test_output_relabel_lift_is_a_pushforward():
    sys = two_state_chain(2)
    traj = unroll_trajectory(sys, uniform_dist(TWO))
    relabel = history_wiring(UNIT, TWO, UNIT, TWO, FLIP, discard_map(TWO), 2)
    cells = []
    for n in range(2):
        coupling = compose(traj.io_joints[n],
                           select_blocks([history_object(TWO, n + 1)], [0]))
        cells.append(environment_cell(wiring_lens(relabel, n), coupling))
    lifted = lift_trajectory(traj, relabel, cells)
    assert lifted.states == traj.states
    for n in range(2):
        pushed = compose(traj.io_joints[n], relabel.forwards[n])
        assert morphism_equal(lifted.io_joints[n], pushed)
    assert check_time_coherence(lifted).ok


# ---------------------------------------------------------------------------
# time coherence

def test_counterexample_search_splits_the_grid():
    results = search_time_coherence_counterexample()
    assert len(results) == 9
    bad = [r for _, r in results if not r.ok]
    good = [r for _, r in results if r.ok]
    assert len(bad) == 6 and len(good) == 3
    assert all(r.failures == (0,) for r in bad)
    assert "incoherent at pairs [0]" in repr(bad[0])
    assert repr(good[0]) == "TimeCoherenceReport(coherent)"


def test_reactive_lift_is_coherent_and_nearly_factorizes():
    for seed in range(2):
        rng = random.Random(6000 + seed)
        machine = random_history_machine(rng, 2, closed=True)
        traj = unroll_trajectory(machine["system"], machine["initial"])
        wdata = random_history_wiring(rng, machine, 2)
        step = random_kernel(rng, machine["outputs"], wdata["outer_inputs"])
        cells = reactive_environment_cells(traj, wdata["wiring"],
                                           machine["outputs"], step)
        lifted = lift_trajectory(traj, wdata["wiring"], cells)
        assert check_time_coherence(lifted).ok
        report = factorization_check(lifted, machine["system"],
                                     wdata["wiring"])
        assert report.squares_ok
        assert report.independence_ok
        assert report.matches
        if not report.generation_ok:
            assert "generation hypothesis fails" in report.describe()


# ---------------------------------------------------------------------------
# factorization diagnostics

def test_exogenous_composites_factorize():
    for seed in range(3):
        rng = random.Random(7000 + seed)
        horizon = rng.randrange(1, 3)
        machine = random_history_machine(rng, horizon)
        wdata = random_history_wiring(rng, machine, horizon)
        _, traj = exogenous_wired_trajectory(rng, machine, wdata, horizon)
        report = factorization_check(traj, machine["system"],
                                     wdata["wiring"])
        assert report.ok, report.describe()
        assert report.describe() == "factorization holds"


def test_correlated_environment_fails_independence():
    # a frozen closed machine whose "outer input" is secretly a copy of
    # the state: generation holds, independence and regluing cannot
    horizon = 2
    keep = select_blocks([TWO, UNIT], [0])
    state = IndexedObject.constant(TWO, horizon)
    closed = IndexedObject.constant(UNIT, horizon)
    machine = GSystem(state, closed, closed,
                      [discard_map(TWO)] * (horizon + 1), [keep, keep])
    outer_in = IndexedObject([UNIT, TWO, TWO],
                             [discard_map(TWO), identity(TWO)])
    wiring = GWiring(closed, closed, outer_in, closed,
                     [identity(UNIT)] * (horizon + 1),
                     [discard_map(TWO), discard_map(TWO)])
    wired = compose_system_with_lens(machine, wiring)
    half = F(1, 2)
    diagonal = StochKernel(UNIT, TWO @ TWO, [[(0, half), (3, half)]])
    states = [uniform_dist(TWO)] * (horizon + 1)
    io_joints = [uniform_dist(TWO)] * horizon
    traj = GTrajectory(wired, states, [diagonal, diagonal], io_joints)
    report = factorization_check(traj, machine, wiring)
    assert report.squares_ok and report.generation_ok
    assert not report.independence_ok
    assert not report.matches
    assert "independence hypothesis fails" in report.describe()
    assert "regluing does not reproduce" in report.describe()


def test_factorization_requires_the_right_composite():
    rng = random.Random(8000)
    machine = random_history_machine(rng, 2)
    wdata = random_history_wiring(rng, machine, 2)
    _, traj = exogenous_wired_trajectory(rng, machine, wdata, 2)
    with pytest.raises(ObjectMismatch, match="sit on the system interface"):
        factorization_check(traj, random_history_machine(rng, 2)["system"],
                            wdata["wiring"])
    # same interface, different dynamics: the composite no longer matches
    lazy = compose(discard_map(machine["state"] @ machine["inputs"]),
                   uniform_dist(machine["state"]))
    other = make_open_markov_system(machine["state"], machine["inputs"],
                                    machine["outputs"], machine["expose"],
                                    lazy, 2)
    with pytest.raises(ObjectMismatch, match="wired composite"):
        factorization_check(traj, other, wdata["wiring"])
