"""The file format: rationals, loaders, canonical output, builders."""

from fractions import Fraction

import pytest

from mksys import modelio
from mksys.errors import ObjectMismatch, ParseError, ValidationError
from mksys.markov import DetKernel, PossKernel, StochKernel, compose, dirac
from mksys.objects import UNIT, FiniteObject

TWO = FiniteObject(("0", "1"))
THREE = FiniteObject(("a", "b", "c"))


def test_fraction_strings_are_lowest_terms():
    assert modelio.fraction_to_string(Fraction(2, 4)) == "1/2"
    assert modelio.fraction_to_string(Fraction(3)) == "3"
    assert modelio.fraction_to_string(0) == "0"
    assert modelio.fraction_to_string(Fraction(-1, 3)) == "-1/3"
    assert modelio.string_to_fraction("7/21") == Fraction(1, 3)
    with pytest.raises(ParseError, match="bad rational 'seven'"):
        modelio.string_to_fraction("seven")
    with pytest.raises(ParseError, match="bad rational '1/0'"):
        modelio.string_to_fraction("1/0")
    with pytest.raises(ParseError, match="expected a rational string"):
        modelio.string_to_fraction(0.5)


def test_document_envelope_is_checked():
    with pytest.raises(ParseError, match="not valid JSON"):
        modelio.loads("{nope")
    with pytest.raises(ParseError, match="must hold a JSON object"):
        modelio.loads("[1, 2]")
    with pytest.raises(ParseError, match="unsupported schema 'mksys/9'"):
        modelio.loads('{"schema": "mksys/9"}')
    with pytest.raises(ParseError, match=r"unknown sections \['gadgets'\]"):
        modelio.loads('{"schema": "mksys/1", "gadgets": {}}')


def doc_with(**sections):
    doc = {"schema": "mksys/1",
           "objects": {"bit": {"labels": ["0", "1"]},
                       "tri": {"labels": ["a", "b", "c"]}}}
    doc.update(sections)
    return modelio.canonical_dumps(doc)


def test_each_kernel_kind_loads_and_round_trips():
    text = doc_with(kernels={
        "d": {"kind": "det", "dom": ["bit"], "cod": ["tri"],
              "mapping": [2, 0]},
        "s": {"kind": "stoch", "dom": ["bit"], "cod": ["bit"],
              "rows": [["1/3", "2/3"], ["1", "0"]]},
        "p": {"kind": "poss", "dom": ["tri"], "cod": ["bit"],
              "rows": [[1, 0], [1, 1], [0, 1]]},
        "pair": {"kind": "det", "dom": ["bit", "bit"], "cod": ["bit"],
                 "mapping": [0, 1, 1, 0]},
        "point": {"kind": "det", "dom": [], "cod": ["bit"],
                  "mapping": [1]},
    })
    model = modelio.loads(text)
    assert model.kernels["d"] == DetKernel(TWO, THREE, (2, 0))
    assert model.kernels["s"].rows[1] == ((0, Fraction(1)),)
    assert model.kernels["p"].rows == (frozenset({0}), frozenset({0, 1}),
                                       frozenset({1}))
    assert model.kernels["pair"].dom == TWO @ TWO
    assert model.kernels["point"] == dirac(TWO, "1")
    assert modelio.dumps(model) == text  # byte-identical round trip


def test_kernel_errors_carry_the_entity_name():
    with pytest.raises(ValidationError,
                       match="kernel 'k': row 1 sums to 5/6"):
        modelio.loads(doc_with(kernels={
            "k": {"kind": "stoch", "dom": ["bit"], "cod": ["bit"],
                  "rows": [["1", "0"], ["1/2", "1/3"]]}}))
    with pytest.raises(ValidationError, match="kernel 'k': row 0 is empty"):
        modelio.loads(doc_with(kernels={
            "k": {"kind": "poss", "dom": ["bit"], "cod": ["bit"],
                  "rows": [[0, 0], [1, 0]]}}))
    with pytest.raises(ParseError, match="row 0 must hold 2 flags in 0/1"):
        modelio.loads(doc_with(kernels={
            "k": {"kind": "poss", "dom": ["bit"], "cod": ["bit"],
                  "rows": [[1, 2], [1, 0]]}}))
    with pytest.raises(ParseError,
                       match="references unknown object 'void'"):
        modelio.loads(doc_with(kernels={
            "k": {"kind": "det", "dom": ["void"], "cod": ["bit"],
                  "mapping": [0]}}))
    with pytest.raises(ParseError, match="kind must be one of"):
        modelio.loads(doc_with(kernels={
            "k": {"kind": "fuzzy", "dom": [], "cod": ["bit"],
                  "rows": []}}))
    with pytest.raises(ParseError, match="row 0 has 3 entries"):
        modelio.loads(doc_with(kernels={
            "k": {"kind": "stoch", "dom": ["bit"], "cod": ["bit"],
                  "rows": [["1/2", "1/2", "0"], ["1", "0"]]}}))


def test_empty_reference_lists_mean_the_unit():
    model = modelio.loads(doc_with(kernels={
        "weigh": {"kind": "stoch", "dom": [], "cod": ["bit"],
                  "rows": [["1/4", "3/4"]]}}))
    weigh = model.kernels["weigh"]
    assert weigh.dom == UNIT and weigh.cod == TWO


def test_lens_chart_and_policy_entries_validate():
    kernels = {
        "fwd": {"kind": "det", "dom": ["bit"], "cod": ["bit"],
                "mapping": [1, 0]},
        "back": {"kind": "det", "dom": ["bit", "bit"], "cod": ["bit"],
                 "mapping": [0, 1, 1, 0]},
    }
    model = modelio.loads(doc_with(
        kernels=kernels,
        lenses={"flip": {"src": {"a": ["bit"], "c": ["bit"]},
                         "dst": {"a": ["bit"], "c": ["bit"]},
                         "f": "fwd", "fsharp": "back"}}))
    lens = model.lenses["flip"]
    assert lens.f.mapping == (1, 0)
    with pytest.raises(ValidationError, match="policy 'p': step must map"):
        modelio.loads(doc_with(
            kernels=kernels,
            policies={"p": {"outputs": ["bit", "bit"], "inputs": ["bit"],
                            "step": "fwd"}}))


def test_system_entries_are_probe_built_on_load():
    kernels = {
        "show": {"kind": "det", "dom": ["bit"], "cod": ["bit"],
                 "mapping": [0, 1]},
        "walk": {"kind": "stoch", "dom": ["bit"], "cod": ["bit"],
                 "rows": [["1/2", "1/2"], ["1/2", "1/2"]]},
        "seed": {"kind": "det", "dom": [], "cod": ["bit"], "mapping": [0]},
    }
    text = doc_with(kernels=kernels, systems={
        "m": {"state": ["bit"], "inputs": [], "outputs": ["bit"],
              "expose": "show", "update": "walk", "horizon": 3,
              "initial": "seed"}})
    model = modelio.loads(text)
    sys_, initial, policies = model.build_system("m")
    assert sys_.horizon == 3 and policies is None
    assert initial == dirac(TWO, "0")
    assert model.build_system("m", 1)[0].horizon == 1
    # a mis-shaped update is caught while loading, not at first use
    broken = doc_with(kernels=kernels, systems={
        "m": {"state": ["bit", "bit"], "inputs": [], "outputs": ["bit"],
              "expose": "show", "update": "walk", "horizon": 2}})
    with pytest.raises(ObjectMismatch,
                       match="system 'm': readout must map states"):
        modelio.loads(broken)
    with pytest.raises(ParseError, match="horizon must be a positive"):
        modelio.loads(doc_with(kernels=kernels, systems={
            "m": {"state": ["bit"], "inputs": [], "outputs": ["bit"],
                  "expose": "show", "update": "walk", "horizon": 0}}))


def test_initial_laws_must_be_states():
    kernels = {
        "show": {"kind": "det", "dom": ["bit"], "cod": ["bit"],
                 "mapping": [0, 1]},
        "walk": {"kind": "stoch", "dom": ["bit"], "cod": ["bit"],
                 "rows": [["1/2", "1/2"], ["1/2", "1/2"]]},
    }
    with pytest.raises(ValidationError, match="initial must be a state law"):
        modelio.loads(doc_with(kernels=kernels, systems={
            "m": {"state": ["bit"], "inputs": [], "outputs": ["bit"],
                  "expose": "show", "update": "walk", "horizon": 2,
                  "initial": "walk"}}))


def test_policies_must_match_the_system_interface():
    kernels = {
        "show": {"kind": "det", "dom": ["bit"], "cod": ["bit"],
                 "mapping": [0, 1]},
        "both": {"kind": "det", "dom": ["bit", "bit"], "cod": ["bit"],
                 "mapping": [0, 1, 1, 0]},
        "wide": {"kind": "det", "dom": ["tri"], "cod": ["tri"],
                 "mapping": [0, 1, 2]},
    }
    with pytest.raises(ValidationError,
                       match="policy 'p' runs on a different interface"):
        modelio.loads(doc_with(
            kernels=kernels,
            policies={"p": {"outputs": ["tri"], "inputs": ["tri"],
                            "step": "wide"}},
            systems={"m": {"state": ["bit"], "inputs": ["bit"],
                           "outputs": ["bit"], "expose": "show",
                           "update": "both", "horizon": 2, "policy": "p"}}))


def test_counterexample_documents_share_factor_objects():
    walk = StochKernel(TWO, TWO @ THREE,
                       [[(0, Fraction(1, 2)), (5, Fraction(1, 2))],
                        [(3, Fraction(1))]])
    seen = DetKernel(THREE, TWO, (0, 1, 1))
    doc = modelio.counterexample_document({"walk": walk, "seen": seen})
    # two distinct factors in play, registered once each
    assert len(doc["objects"]) == 2
    model = modelio.loads(modelio.dumps(doc))
    assert model.kernels["walk"] == walk
    assert model.kernels["seen"] == seen


def test_named_objects_must_be_atomic():
    builder = modelio.DocumentBuilder()
    with pytest.raises(ValidationError, match="must be atomic"):
        builder.add_object("pair", TWO @ TWO)


def test_distribution_rows_sort_and_promote():
    state = StochKernel(UNIT, TWO @ TWO,
                        [[(2, Fraction(1, 3)), (0, Fraction(2, 3))]])
    assert modelio.distribution_rows(state) == [
        (("0", "0"), Fraction(2, 3)), (("1", "0"), Fraction(1, 3))]
    assert modelio.distribution_rows(dirac(THREE, "b")) == [
        (("b",), Fraction(1))]
    fuzzy = PossKernel(UNIT, TWO, [[1, 0]])
    assert modelio.distribution_rows(fuzzy) == [
        (("0",), Fraction(1)), (("1",), Fraction(1))]
    with pytest.raises(ValidationError, match="unit domain"):
        modelio.distribution_rows(DetKernel(TWO, TWO, (0, 1)))
