"""Command line front end: validate, unroll, rewire and law-check models.

Exit codes: 0 on success, 1 when a model or a law fails a check, 2 for
usage problems (bad arguments, unreadable or malformed files, unknown
suites).  Set the ``MKSYS_COLOR`` environment variable to anything
non-empty for ANSI-colored verdict lines.
"""

import argparse
import csv
import json
import os
import sys

from . import modelio
from .errors import MksysError, ParseError, UnknownSuite, ValidationError
from .laws import run_suite, suite_names
from .markov import (compose, compose_all, identity, select_blocks, tensor,
                     tensor_all)
from .timesys import (check_time_coherence, compose_system_with_lens,
                      factorization_check, history_policy,
                      make_open_markov_system, unroll_trajectory)


def _color(text: str, good: bool) -> str:
    if os.environ.get("MKSYS_COLOR"):
        return f"\x1b[{'32' if good else '31'}m{text}\x1b[0m"
    return text


def _sole(entries: dict, what: str, flag: str) -> str:
    if len(entries) == 1:
        return next(iter(entries))
    raise ValidationError(
        f"the model defines {len(entries)} {what} entries; pass {flag}")


def _named(entries: dict, name: str, what: str):
    if name not in entries:
        raise ParseError(f"the model defines no {what} named {name!r}")
    return entries[name]


# ---------------------------------------------------------------------------
# check

def cmd_check(args) -> int:
    model = modelio.load(args.model)
    for section in modelio._SECTIONS:
        entries = getattr(model, section)
        if entries:
            print(f"{section}: {len(entries)} "
                  f"({', '.join(sorted(entries))})")
    print(_color("model ok", True))
    return 0


# ---------------------------------------------------------------------------
# unroll

def _history_columns(role: str, base, steps: int, start: int) -> list:
    columns = []
    for t in range(steps):
        if base.nfactors == 1:
            columns.append(f"{role}{start + t}")
        else:
            columns.extend(f"{role}{start + t}.{k}"
                           for k in range(base.nfactors))
    return columns


def _table(columns: list, dist) -> dict:
    rows = [[str(label) for label in labels]
            + [modelio.fraction_to_string(weight), str(float(weight))]
            for labels, weight in modelio.distribution_rows(dist)]
    return {"columns": columns + ["weight", "approx"], "rows": rows}


def _trajectory_tables(traj) -> dict:
    sys_ = traj.system
    state = sys_.state.objects[0]
    inputs = sys_.inputs.objects[1] if sys_.horizon else None
    outputs = sys_.outputs.objects[0]
    tables = {}
    for n, law in enumerate(traj.states):
        tables[f"state_{n}"] = _table(
            _history_columns("state", state, n + 1, 0), law)
    for n, law in enumerate(traj.joints):
        tables[f"joint_{n}"] = _table(
            _history_columns("state", state, n + 1, 0)
            + _history_columns("input", inputs, n + 1, 1), law)
    for n, law in enumerate(traj.io_joints):
        tables[f"interface_{n}"] = _table(
            _history_columns("output", outputs, n + 1, 0)
            + _history_columns("input", inputs, n + 1, 1), law)
    return tables


def _emit_tables(tables: dict, header: dict, args) -> None:
    if args.format == "json":
        doc = dict(header, schema="mksys/tables/1", tables=tables)
        text = modelio.canonical_dumps(doc)
        if args.out:
            with open(args.out, "w", encoding="utf-8") as handle:
                handle.write(text)
            print(f"wrote {len(tables)} tables to {args.out}")
        else:
            sys.stdout.write(text)
        return
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        for name, table in tables.items():
            with open(os.path.join(args.out, f"{name}.csv"), "w",
                      newline="", encoding="utf-8") as handle:
                writer = csv.writer(handle)
                writer.writerow(table["columns"])
                writer.writerows(table["rows"])
        print(f"wrote {len(tables)} tables to {args.out}")
        return
    for name, table in tables.items():
        print(f"# table: {name}")
        writer = csv.writer(sys.stdout)
        writer.writerow(table["columns"])
        writer.writerows(table["rows"])


def cmd_unroll(args) -> int:
    model = modelio.load(args.model)
    name = args.system or _sole(model.systems, "system", "--system")
    entry = _named(model.systems, name, "system")
    horizon = args.horizon if args.horizon is not None else entry["horizon"]
    if horizon < 0:
        raise ValidationError("the horizon cannot be negative")
    initial = entry.get("initial")
    if initial is None:
        raise ValidationError(
            f"system {name!r} has no initial state law; add an 'initial' "
            f"entry to unroll it")
    if horizon == 0:
        tables = {"state_0": _table(
            _history_columns("state", entry["state"], 1, 0), initial)}
    else:
        built, initial, policies = model.build_system(name, horizon)
        traj = unroll_trajectory(built, initial, policies)
        tables = _trajectory_tables(traj)
    _emit_tables(tables, {"system": name, "horizon": horizon}, args)
    return 0


# ---------------------------------------------------------------------------
# compose

def cmd_compose(args) -> int:
    model = modelio.load(args.model)
    with open(args.model, "r", encoding="utf-8") as handle:
        raw = json.load(handle)
    sys_name = args.system or _sole(model.systems, "system", "SYSTEM")
    wiring_name = args.wiring or _sole(model.wirings, "wiring", "WIRING")
    entry = _named(model.systems, sys_name, "system")
    wiring = _named(model.wirings, wiring_name, "wiring")
    new_name = args.alias or f"{sys_name}+{wiring_name}"
    if new_name in model.systems:
        raise ValidationError(f"{new_name!r} already names a system; "
                              f"pick another with --as")
    if entry["horizon"] != wiring["horizon"]:
        raise ValidationError(
            f"system {sys_name!r} runs for {entry['horizon']} steps but "
            f"wiring {wiring_name!r} for {wiring['horizon']}")
    state, outer_in = entry["state"], wiring["outer_inputs"]
    expose2 = compose(entry["expose"], wiring["forward"])
    rebuild = compose_all([
        select_blocks([state, outer_in], [0, 0, 1]),
        tensor_all([identity(state), entry["expose"], identity(outer_in)]),
        tensor(identity(state), wiring["backward"])])
    update2 = compose(rebuild, entry["update"])
    probe = make_open_markov_system(state, outer_in,
                                    wiring["outer_outputs"], expose2,
                                    update2, entry["horizon"])
    wired = compose_system_with_lens(model.build_system(sys_name)[0],
                                     model.build_wiring(wiring_name))
    if probe != wired:
        raise ValidationError(
            "the one-step composite disagrees with the unrolled wiring")
    raw_sys = raw["systems"][sys_name]
    raw_wiring = raw["wirings"][wiring_name]
    expose_name, update_name = f"{new_name}.expose", f"{new_name}.update"
    for kname in (expose_name, update_name):
        if kname in model.kernels:
            raise ValidationError(f"{kname!r} already names a kernel")
    raw.setdefault("kernels", {})
    raw["kernels"][expose_name] = modelio.kernel_entry(
        expose2, list(raw_sys["state"]), list(raw_wiring["outer_outputs"]))
    raw["kernels"][update_name] = modelio.kernel_entry(
        update2, list(raw_sys["state"]) + list(raw_wiring["outer_inputs"]),
        list(raw_sys["state"]))
    new_entry = {
        "state": list(raw_sys["state"]),
        "inputs": list(raw_wiring["outer_inputs"]),
        "outputs": list(raw_wiring["outer_outputs"]),
        "expose": expose_name,
        "update": update_name,
        "horizon": entry["horizon"],
    }
    if "initial" in raw_sys:
        new_entry["initial"] = raw_sys["initial"]
    raw["systems"][new_name] = new_entry
    text = modelio.canonical_dumps(raw)
    modelio.loads(text)  # the grown model must load cleanly
    target = args.out or args.model
    with open(target, "w", encoding="utf-8") as handle:
        handle.write(text)
    print(f"added system {new_name!r} to {target}")
    print(_color("composite verified against the unrolled wiring", True))
    return 0


# ---------------------------------------------------------------------------
# laws

def cmd_laws(args) -> int:
    report = run_suite(args.suite, args.cases, args.seed)
    lines = report.summary().split("\n")
    lines[0] = _color(lines[0], report.ok)
    print("\n".join(lines))
    if report.ok:
        return 0
    path = args.counterexample or f"{args.suite}-counterexample.json"
    modelio.save(report.failures[0]["model"], path)
    print(f"wrote counterexample to {path}")
    return 1


# ---------------------------------------------------------------------------
# trajectory-diagnose

def cmd_diagnose(args) -> int:
    model = modelio.load(args.model)
    name = args.system or _sole(model.systems, "system", "--system")
    horizon = args.horizon
    built, initial, policies = model.build_system(name, horizon)
    if horizon is None:
        horizon = built.horizon
    inner = built
    wiring = None
    if args.wiring:
        _named(model.wirings, args.wiring, "wiring")
        wiring = model.build_wiring(args.wiring, horizon)
        built = compose_system_with_lens(built, wiring)
        policies = None  # any inner policy acts on the wrong interface
    if args.policy:
        pol = _named(model.policies, args.policy, "policy")
        policies = history_policy(pol["outputs"], pol["inputs"],
                                  pol["step"], horizon)
    if initial is None:
        raise ValidationError(
            f"system {name!r} has no initial state law; add an 'initial' "
            f"entry to diagnose it")
    traj = unroll_trajectory(built, initial, policies)
    coherence = check_time_coherence(traj)
    print(f"coherence: {coherence!r}")
    ok = coherence.ok
    if wiring is not None:
        report = factorization_check(traj, inner, wiring)
        print(f"factorization: {report.describe()}")
        ok = ok and report.ok
    print(_color("trajectory ok", True) if ok
          else _color("trajectory violates the chain laws", False))
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# entry point

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mksys",
        description="Exact-arithmetic checks for chain-indexed systems.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="validate a model file")
    p.add_argument("model")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("unroll",
                       help="tabulate the state and interface laws")
    p.add_argument("model")
    p.add_argument("--system", help="system entry to run "
                                    "(default: the only one)")
    p.add_argument("--horizon", type=int,
                   help="override the entry's number of steps")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", help="write here instead of stdout "
                                 "(a directory for csv, a file for json)")
    p.set_defaults(func=cmd_unroll)

    p = sub.add_parser("compose",
                       help="rewire a system and store the composite")
    p.add_argument("model")
    p.add_argument("system", nargs="?")
    p.add_argument("wiring", nargs="?")
    p.add_argument("--as", dest="alias",
                   help="name for the composite (default SYSTEM+WIRING)")
    p.add_argument("--out", help="write the grown model here instead of "
                                 "back to MODEL")
    p.set_defaults(func=cmd_compose)

    p = sub.add_parser("laws", help="run a seeded law suite")
    p.add_argument("--suite", required=True,
                   help=f"one of: {', '.join(suite_names())}")
    p.add_argument("--cases", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--counterexample",
                   help="where to write a failing model, if any")
    p.set_defaults(func=cmd_laws)

    p = sub.add_parser("trajectory-diagnose",
                       help="unroll and check coherence and factorization")
    p.add_argument("model")
    p.add_argument("--system")
    p.add_argument("--wiring", help="compose with this wiring first")
    p.add_argument("--policy", help="drive the inputs with this policy")
    p.add_argument("--horizon", type=int)
    p.set_defaults(func=cmd_diagnose)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return err.code if isinstance(err.code, int) else 2
    try:
        return args.func(args)
    except ParseError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except UnknownSuite as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except MksysError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
