"""Shared brute-force oracles for the trajectory tests.

Everything here enumerates paths explicitly and keeps exact weights, so
the unrolling code under test is never used to check itself.
"""

from fractions import Fraction

from mksys import DetKernel, compose, compose_all, identity, tensor, tensor_all
from mksys.markov import select_blocks


def dense_table(kernel):
    """Row-major dense table of any kernel, promoting deterministic ones."""
    if isinstance(kernel, DetKernel):
        kernel = kernel.as_stoch()
    return kernel.dense()


def labels_of(base, index_path):
    """Label tuple of a path whose entries are point indices into ``base``."""
    out = []
    for i in index_path:
        out.extend(base.decode(i))
    return tuple(out)


def path_law(machine, policy, horizon):
    """Joint law of (state path, input path) by explicit enumeration.

    ``machine`` is a dict with one-step ``state``/``inputs`` objects and
    ``expose`` (deterministic), ``update`` and ``initial`` kernels;
    ``policy`` draws the next input from the newest output, or is ``None``
    for a closed machine.  Returns ``{(state indices, input indices):
    weight}`` with exact ``Fraction`` weights; the state path has
    ``horizon + 1`` entries and the input path ``horizon``.
    """
    state, inputs = machine["state"], machine["inputs"]
    init = dense_table(machine["initial"])[0]
    read = machine["expose"].mapping
    update = dense_table(machine["update"])
    pol = None if policy is None else dense_table(policy)
    law = {}

    def extend(s_path, i_path, weight):
        if len(s_path) == horizon + 1:
            key = (tuple(s_path), tuple(i_path))
            law[key] = law.get(key, Fraction(0)) + weight
            return
        here = s_path[-1]
        for i in range(inputs.size):
            w_in = Fraction(1) if pol is None else pol[read[here]][i]
            if not w_in:
                continue
            for succ, w_up in enumerate(update[here * inputs.size + i]):
                if w_up:
                    extend(s_path + [succ], i_path + [i], weight * w_in * w_up)

    for s0, w0 in enumerate(init):
        if w0:
            extend([s0], [], w0)
    return law


def aggregate(law, key_of):
    """Push a path law forward along ``key_of(state_path, input_path)``."""
    out = {}
    for (s_path, i_path), weight in law.items():
        key = key_of(s_path, i_path)
        out[key] = out.get(key, Fraction(0)) + weight
    return out


def dist_table(dist):
    """A law ``unit -> X`` as a dict from label tuples to weights."""
    table = dense_table(dist)[0]
    return {dist.cod.decode(i): w for i, w in enumerate(table) if w}


def one_step_wired(machine, wiring_data):
    """One-step data of a machine wired into a new interface.

    The wired readout relabels outputs; the wired update first rebuilds
    the inner input from the exposed output and the fresh outer input.
    """
    state = machine["state"]
    outer_in = wiring_data["outer_inputs"]
    rebuild = compose_all([
        select_blocks([state, outer_in], [0, 0, 1]),
        tensor_all([identity(state), machine["expose"], identity(outer_in)]),
        tensor(identity(state), wiring_data["backward"]),
    ])
    return {
        "state": state,
        "inputs": outer_in,
        "outputs": wiring_data["outer_outputs"],
        "expose": compose(machine["expose"], wiring_data["forward"]),
        "update": compose(rebuild, machine["update"]),
        "initial": machine["initial"],
    }


def assert_trajectory_matches_law(traj, machine, law):
    """Compare every state law and joint of ``traj`` against a path law."""
    state, inputs = machine["state"], machine["inputs"]
    outputs, read = machine["outputs"], machine["expose"].mapping
    horizon = traj.system.horizon
    for n in range(horizon + 1):
        want = aggregate(law, lambda s, i: labels_of(state, s[:n + 1]))
        assert dist_table(traj.states[n]) == want
    for n in range(horizon):
        want = aggregate(law, lambda s, i: (labels_of(state, s[:n + 1])
                                            + labels_of(inputs, i[:n + 1])))
        assert dist_table(traj.joints[n]) == want
        want = aggregate(
            law,
            lambda s, i: (labels_of(outputs, [read[k] for k in s[:n + 1]])
                          + labels_of(inputs, i[:n + 1])))
        assert dist_table(traj.io_joints[n]) == want
