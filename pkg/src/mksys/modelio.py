"""Model files: named objects and kernels in canonical JSON.

A model document is a single JSON object with a ``schema`` tag and up
to seven sections -- ``objects``, ``kernels``, ``lenses``, ``charts``,
``policies``, ``systems``, ``wirings`` -- each mapping names to
entries.  Every cross-reference is by name, objects are referenced as
*lists* of names (tensored in order, ``[]`` is the unit), and rational
numbers are strings ``"p/q"`` in lowest terms.  Serialization is
canonical (sorted keys, two-space indent, trailing newline) so a
loaded-and-saved file is byte-identical.

Loading validates everything: kernels re-run their constructor checks,
lenses and charts their boundary and marginal laws, systems and
wirings a probe expansion at their stored horizon.  Errors carry the
entity name; dangling references are :class:`~mksys.errors.ParseError`,
bad data is :class:`~mksys.errors.ValidationError` (or whichever error
the underlying validator raises, prefixed).
"""

import json
from fractions import Fraction

from .errors import MksysError, ParseError, ValidationError
from .objects import UNIT, FiniteObject
from .markov import DetKernel, Morphism, PossKernel, StochKernel
from .arena import Chart, DetLens, Interface, validate_chart
from .timesys import GWiring, history_policy, history_wiring, \
    make_open_markov_system

SCHEMA = "mksys/1"

_SECTIONS = ("objects", "kernels", "lenses", "charts", "policies",
             "systems", "wirings")


# ---------------------------------------------------------------------------
# rationals

def fraction_to_string(value) -> str:
    """Lowest terms, no denominator when it is 1 (``"1/2"``, ``"3"``)."""
    q = Fraction(value)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def string_to_fraction(text: str) -> Fraction:
    if not isinstance(text, str):
        raise ParseError(f"expected a rational string, got {text!r}")
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"bad rational {text!r}") from None


# ---------------------------------------------------------------------------
# loading

def _require(cond: bool, message: str):
    if not cond:
        raise ParseError(message)


class Model:
    """A loaded model: the normalized document plus constructed values."""

    __slots__ = ("doc", "objects", "kernels", "lenses", "charts",
                 "policies", "systems", "wirings")

    def __init__(self, doc: dict):
        self.doc = doc
        self.objects: dict = {}
        self.kernels: dict = {}
        self.lenses: dict = {}
        self.charts: dict = {}
        self.policies: dict = {}
        self.systems: dict = {}
        self.wirings: dict = {}

    # -- reference resolution ------------------------------------------

    def resolve_object(self, refs, owner: str) -> FiniteObject:
        _require(isinstance(refs, list),
                 f"{owner}: object references must be a list of names")
        parts = []
        for name in refs:
            _require(isinstance(name, str) and name in self.objects,
                     f"{owner} references unknown object {name!r}")
            parts.append(self.objects[name])
        if not parts:
            return UNIT
        return tensor_all_objects(parts)

    def resolve_kernel(self, name, owner: str) -> Morphism:
        _require(isinstance(name, str) and name in self.kernels,
                 f"{owner} references unknown kernel {name!r}")
        return self.kernels[name]

    def resolve_interface(self, entry, owner: str) -> Interface:
        _require(isinstance(entry, dict) and set(entry) == {"a", "c"},
                 f"{owner}: an interface needs exactly the keys 'a' and 'c'")
        return Interface(self.resolve_object(entry["a"], owner),
                         self.resolve_object(entry["c"], owner))

    # -- chain-system helpers ------------------------------------------

    def build_system(self, name: str, horizon: int = None):
        """Expand a system entry; returns (system, initial, policies).

        ``policies`` is None for closed systems or entries without a
        policy reference; otherwise one input policy per edge.
        """
        entry = self.systems[name]
        t = horizon if horizon is not None else entry["horizon"]
        sys = make_open_markov_system(entry["state"], entry["inputs"],
                                      entry["outputs"], entry["expose"],
                                      entry["update"], t)
        initial = entry.get("initial")
        policies = None
        if entry.get("policy") is not None:
            pol = self.policies[entry["policy"]]
            policies = history_policy(pol["outputs"], pol["inputs"],
                                      pol["step"], t)
        return sys, initial, policies

    def build_wiring(self, name: str, horizon: int = None) -> GWiring:
        entry = self.wirings[name]
        t = horizon if horizon is not None else entry["horizon"]
        return history_wiring(entry["inner_inputs"], entry["inner_outputs"],
                              entry["outer_inputs"], entry["outer_outputs"],
                              entry["forward"], entry["backward"], t)


def tensor_all_objects(parts) -> FiniteObject:
    acc = UNIT
    for p in parts:
        acc = acc @ p
    return acc


def _load_object(name, entry) -> FiniteObject:
    _require(isinstance(entry, dict) and set(entry) == {"labels"},
             f"object {name!r} needs exactly the key 'labels'")
    labels = entry["labels"]
    _require(isinstance(labels, list) and labels
             and all(isinstance(l, str) for l in labels),
             f"object {name!r}: labels must be a nonempty list of strings")
    return FiniteObject(labels)


def _load_kernel(model: Model, name, entry) -> Morphism:
    owner = f"kernel {name!r}"
    _require(isinstance(entry, dict), f"{owner} must be an object")
    kind = entry.get("kind")
    _require(kind in ("stoch", "poss", "det"),
             f"{owner}: kind must be one of stoch, poss, det")
    wanted = {"kind", "dom", "cod", "mapping" if kind == "det" else "rows"}
    _require(set(entry) == wanted,
             f"{owner} needs exactly the keys {sorted(wanted)}")
    dom = model.resolve_object(entry["dom"], owner)
    cod = model.resolve_object(entry["cod"], owner)
    try:
        if kind == "det":
            mapping = entry["mapping"]
            _require(isinstance(mapping, list)
                     and all(isinstance(j, int) for j in mapping),
                     f"{owner}: mapping must be a list of integers")
            return DetKernel(dom, cod, tuple(mapping))
        rows = entry["rows"]
        _require(isinstance(rows, list)
                 and all(isinstance(r, list) for r in rows),
                 f"{owner}: rows must be a list of lists")
        if kind == "stoch":
            sparse = [[(j, string_to_fraction(w)) for j, w in enumerate(row)
                       if string_to_fraction(w)] for row in rows]
            for i, row in enumerate(rows):
                _require(len(row) == cod.size,
                         f"{owner}: row {i} has {len(row)} entries for a "
                         f"codomain of size {cod.size}")
            return StochKernel(dom, cod, sparse)
        for i, row in enumerate(rows):
            _require(len(row) == cod.size and set(row) <= {0, 1},
                     f"{owner}: row {i} must hold {cod.size} flags in 0/1")
        return PossKernel(dom, cod,
                          [[j for j, hit in enumerate(row) if hit]
                           for row in rows])
    except ParseError:
        raise
    except MksysError as err:
        raise type(err)(f"{owner}: {err}") from None


def _load_lens(model: Model, name, entry) -> DetLens:
    owner = f"lens {name!r}"
    _require(isinstance(entry, dict)
             and set(entry) == {"src", "dst", "f", "fsharp"},
             f"{owner} needs exactly the keys src, dst, f, fsharp")
    try:
        return DetLens(model.resolve_interface(entry["src"], owner),
                       model.resolve_interface(entry["dst"], owner),
                       model.resolve_kernel(entry["f"], owner),
                       model.resolve_kernel(entry["fsharp"], owner))
    except ParseError:
        raise
    except MksysError as err:
        raise type(err)(f"{owner}: {err}") from None


def _load_chart(model: Model, name, entry) -> Chart:
    owner = f"chart {name!r}"
    _require(isinstance(entry, dict)
             and set(entry) == {"src", "dst", "residual", "g", "gflat"},
             f"{owner} needs exactly the keys src, dst, residual, g, gflat")
    try:
        chart = Chart(model.resolve_interface(entry["src"], owner),
                      model.resolve_interface(entry["dst"], owner),
                      model.resolve_interface(entry["residual"], owner),
                      model.resolve_kernel(entry["g"], owner),
                      model.resolve_kernel(entry["gflat"], owner))
    except ParseError:
        raise
    except MksysError as err:
        raise type(err)(f"{owner}: {err}") from None
    problem = validate_chart(chart)
    if problem is not None:
        raise ValidationError(f"{owner}: {problem}")
    return chart


def _load_policy(model: Model, name, entry) -> dict:
    owner = f"policy {name!r}"
    _require(isinstance(entry, dict)
             and set(entry) == {"outputs", "inputs", "step"},
             f"{owner} needs exactly the keys outputs, inputs, step")
    outputs = model.resolve_object(entry["outputs"], owner)
    inputs = model.resolve_object(entry["inputs"], owner)
    step = model.resolve_kernel(entry["step"], owner)
    if step.dom != outputs or step.cod != inputs:
        raise ValidationError(
            f"{owner}: step must map the output object to the input object")
    return {"outputs": outputs, "inputs": inputs, "step": step}


def _load_system(model: Model, name, entry) -> dict:
    owner = f"system {name!r}"
    _require(isinstance(entry, dict), f"{owner} must be an object")
    allowed = {"state", "inputs", "outputs", "expose", "update", "horizon",
               "initial", "policy"}
    required = allowed - {"initial", "policy"}
    _require(required <= set(entry) <= allowed,
             f"{owner} needs the keys {sorted(required)} (plus optional "
             f"initial, policy)")
    horizon = entry["horizon"]
    _require(isinstance(horizon, int) and horizon >= 1,
             f"{owner}: horizon must be a positive integer")
    built = {
        "state": model.resolve_object(entry["state"], owner),
        "inputs": model.resolve_object(entry["inputs"], owner),
        "outputs": model.resolve_object(entry["outputs"], owner),
        "expose": model.resolve_kernel(entry["expose"], owner),
        "update": model.resolve_kernel(entry["update"], owner),
        "horizon": horizon,
        "initial": None,
        "policy": None,
    }
    try:
        make_open_markov_system(built["state"], built["inputs"],
                                built["outputs"], built["expose"],
                                built["update"], horizon)
    except MksysError as err:
        raise type(err)(f"{owner}: {err}") from None
    if "initial" in entry:
        initial = model.resolve_kernel(entry["initial"], owner)
        if not initial.dom.is_unit() or initial.cod != built["state"]:
            raise ValidationError(
                f"{owner}: initial must be a state law (unit domain, state "
                f"codomain)")
        built["initial"] = initial
    if "policy" in entry:
        pname = entry["policy"]
        _require(isinstance(pname, str) and pname in model.policies,
                 f"{owner} references unknown policy {pname!r}")
        pol = model.policies[pname]
        if (pol["outputs"] != built["outputs"]
                or pol["inputs"] != built["inputs"]):
            raise ValidationError(
                f"{owner}: policy {pname!r} runs on a different interface")
        built["policy"] = pname
    return built


def _load_wiring(model: Model, name, entry) -> dict:
    owner = f"wiring {name!r}"
    keys = {"inner_inputs", "inner_outputs", "outer_inputs", "outer_outputs",
            "forward", "backward", "horizon"}
    _require(isinstance(entry, dict) and set(entry) == keys,
             f"{owner} needs exactly the keys {sorted(keys)}")
    horizon = entry["horizon"]
    _require(isinstance(horizon, int) and horizon >= 1,
             f"{owner}: horizon must be a positive integer")
    built = {key: model.resolve_object(entry[key], owner)
             for key in ("inner_inputs", "inner_outputs", "outer_inputs",
                         "outer_outputs")}
    built["forward"] = model.resolve_kernel(entry["forward"], owner)
    built["backward"] = model.resolve_kernel(entry["backward"], owner)
    built["horizon"] = horizon
    try:
        history_wiring(built["inner_inputs"], built["inner_outputs"],
                       built["outer_inputs"], built["outer_outputs"],
                       built["forward"], built["backward"], horizon)
    except MksysError as err:
        raise type(err)(f"{owner}: {err}") from None
    return built


_LOADERS = {
    "kernels": _load_kernel,
    "lenses": _load_lens,
    "charts": _load_chart,
    "policies": _load_policy,
    "systems": _load_system,
    "wirings": _load_wiring,
}


def loads(text: str) -> Model:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise ParseError(f"not valid JSON: {err}") from None
    _require(isinstance(doc, dict), "a model file must hold a JSON object")
    _require(doc.get("schema") == SCHEMA,
             f"unsupported schema {doc.get('schema')!r}; expected {SCHEMA!r}")
    unknown = set(doc) - set(_SECTIONS) - {"schema"}
    _require(not unknown, f"unknown sections {sorted(unknown)}")
    for section in _SECTIONS:
        _require(isinstance(doc.get(section, {}), dict),
                 f"section {section!r} must map names to entries")
    model = Model(doc)
    for name in sorted(doc.get("objects", {})):
        model.objects[name] = _load_object(name, doc["objects"][name])
    for section in ("kernels", "lenses", "charts", "policies", "systems",
                    "wirings"):
        loader = _LOADERS[section]
        store = getattr(model, section)
        for name in sorted(doc.get(section, {})):
            store[name] = loader(model, name, doc[section][name])
    return model


def load(path) -> Model:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as err:
        raise ParseError(f"cannot read {path}: {err}") from None
    return loads(text)


# ---------------------------------------------------------------------------
# saving

def canonical_dumps(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def dumps(model) -> str:
    doc = model.doc if isinstance(model, Model) else model
    return canonical_dumps(doc)


def save(model, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(model))


# ---------------------------------------------------------------------------
# building documents from values

def kernel_entry(kernel: Morphism, dom_refs, cod_refs) -> dict:
    """The document entry for a kernel, given its object reference lists."""
    if isinstance(kernel, DetKernel):
        return {"kind": "det", "dom": list(dom_refs), "cod": list(cod_refs),
                "mapping": list(kernel.mapping)}
    if isinstance(kernel, StochKernel):
        return {"kind": "stoch", "dom": list(dom_refs),
                "cod": list(cod_refs),
                "rows": [[fraction_to_string(w) for w in row]
                         for row in kernel.dense()]}
    if isinstance(kernel, PossKernel):
        return {"kind": "poss", "dom": list(dom_refs), "cod": list(cod_refs),
                "rows": [[1 if hit else 0 for hit in row]
                         for row in kernel.dense()]}
    raise ValidationError(f"cannot serialize {kernel!r}")


class DocumentBuilder:
    """Accumulates named entries and hands out object names per factor.

    Factors are deduplicated by content, so two kernels sharing a factor
    reference the same object entry.
    """

    def __init__(self):
        self.doc = {"schema": SCHEMA}
        self._factor_names: dict = {}

    def _section(self, name: str) -> dict:
        return self.doc.setdefault(name, {})

    def object_refs(self, obj: FiniteObject) -> list:
        refs = []
        for factor in obj.factors:
            if factor not in self._factor_names:
                name = f"o{len(self._factor_names)}"
                self._factor_names[factor] = name
                self._section("objects")[name] = {
                    "labels": [str(l) for l in factor]}
            refs.append(self._factor_names[factor])
        return refs

    def add_object(self, name: str, obj: FiniteObject):
        """Register a single-factor object under a chosen name."""
        if obj.nfactors != 1:
            raise ValidationError(
                "named objects must be atomic (one factor)")
        factor = obj.factors[0]
        self._factor_names[factor] = name
        self._section("objects")[name] = {"labels": [str(l) for l in factor]}

    def add_kernel(self, name: str, kernel: Morphism):
        self._section("kernels")[name] = kernel_entry(
            kernel, self.object_refs(kernel.dom),
            self.object_refs(kernel.cod))

    def add_entry(self, section: str, name: str, entry: dict):
        self._section(section)[name] = entry


def counterexample_document(kernels: dict) -> dict:
    """A loadable model holding the named kernels (used by law suites)."""
    builder = DocumentBuilder()
    for name in sorted(kernels):
        builder.add_kernel(name, kernels[name])
    return builder.doc


# ---------------------------------------------------------------------------
# distribution tables

def distribution_rows(dist: Morphism) -> list:
    """``[(label tuple, Fraction weight)]`` for a state, sorted by index."""
    if not dist.dom.is_unit():
        raise ValidationError("tables are built from states (unit domain)")
    if isinstance(dist, DetKernel):
        dist = dist.as_stoch()
    if isinstance(dist, StochKernel):
        return [(dist.cod.decode(col), w) for col, w in dist.rows[0]]
    return [(dist.cod.decode(col), Fraction(1))
            for col in sorted(dist.rows[0])]
