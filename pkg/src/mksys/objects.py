"""Finite labeled sets with strict product structure.

Every carrier in this package is a finite set presented as an ordered tuple of
atomic *factors*.  An atomic set has one factor; tensoring concatenates factor
lists, so the product is strictly associative, and the empty factor list is a
strict unit.  Points of a product are tuples of atom labels (one per factor),
encoded to flat indices row-major: the *last* factor varies fastest.
"""

from __future__ import annotations

from typing import Iterable, Iterator, Sequence

from .errors import BadFactorSelection, ValidationError


class FiniteObject:
    """A finite set, possibly a product of labeled atomic factors."""

    __slots__ = ("_factors", "_sizes", "_size", "_lookups")

    def __init__(self, labels: Iterable = ()):
        labels = tuple(labels)
        if not labels:
            raise ValidationError("an atomic object needs at least one label; "
                                  "use FiniteObject.unit() for the unit")
        if len(set(labels)) != len(labels):
            raise ValidationError(f"duplicate labels in {labels!r}")
        self._init_factors((labels,))

    def _init_factors(self, factors: tuple[tuple, ...]) -> None:
        self._factors = factors
        self._sizes = tuple(len(f) for f in factors)
        size = 1
        for s in self._sizes:
            size *= s
        self._size = size
        self._lookups = tuple({lbl: i for i, lbl in enumerate(f)} for f in factors)

    @classmethod
    def _from_factors(cls, factors: tuple[tuple, ...]) -> "FiniteObject":
        obj = cls.__new__(cls)
        obj._init_factors(factors)
        return obj

    @classmethod
    def unit(cls) -> "FiniteObject":
        """The strict monoidal unit: empty factor list, one point `()`."""
        return cls._from_factors(())

    # -- structure ---------------------------------------------------------

    @property
    def factors(self) -> tuple[tuple, ...]:
        return self._factors

    @property
    def nfactors(self) -> int:
        return len(self._factors)

    @property
    def shape(self) -> tuple[int, ...]:
        """Per-factor sizes, in order."""
        return self._sizes

    @property
    def size(self) -> int:
        return self._size

    @property
    def labels(self) -> tuple:
        """Atom labels.  Only meaningful for atomic (single-factor) objects."""
        if len(self._factors) != 1:
            raise ValidationError(
                f"labels is defined for atomic objects only; this one has "
                f"{len(self._factors)} factors (use .points())")
        return self._factors[0]

    def is_unit(self) -> bool:
        return not self._factors

    def tensor(self, other: "FiniteObject") -> "FiniteObject":
        return FiniteObject._from_factors(self._factors + other._factors)

    __matmul__ = tensor

    def restrict(self, indices: Sequence[int]) -> "FiniteObject":
        """Sub-product of the selected factors, in the order given."""
        idx = tuple(indices)
        if len(set(idx)) != len(idx):
            raise BadFactorSelection(f"duplicate factor indices {idx}")
        for i in idx:
            if not 0 <= i < len(self._factors):
                raise BadFactorSelection(
                    f"factor index {i} out of range for {self!r}")
        return FiniteObject._from_factors(tuple(self._factors[i] for i in idx))

    # -- points <-> indices (row-major, last factor fastest) ----------------

    def decode(self, index: int) -> tuple:
        if not 0 <= index < self._size:
            raise BadFactorSelection(f"index {index} out of range for {self!r}")
        point = []
        for f, s in zip(reversed(self._factors), reversed(self._sizes)):
            index, pos = divmod(index, s)
            point.append(f[pos])
        point.reverse()
        return tuple(point)

    def encode(self, point: Sequence) -> int:
        point = tuple(point)
        if len(point) != len(self._factors):
            raise BadFactorSelection(
                f"point {point!r} has {len(point)} coordinates, expected "
                f"{len(self._factors)} for {self!r}")
        index = 0
        for lookup, s, lbl in zip(self._lookups, self._sizes, point):
            try:
                index = index * s + lookup[lbl]
            except KeyError:
                raise BadFactorSelection(
                    f"label {lbl!r} not found in factor of {self!r}") from None
        return index

    def points(self) -> Iterator[tuple]:
        for i in range(self._size):
            yield self.decode(i)

    # -- equality is structural --------------------------------------------

    def __eq__(self, other) -> bool:
        return isinstance(other, FiniteObject) and self._factors == other._factors

    def __hash__(self) -> int:
        return hash(self._factors)

    def __repr__(self) -> str:
        if not self._factors:
            return "1"
        return "*".join(
            "{" + ",".join(str(l) for l in f) + "}" for f in self._factors)


UNIT = FiniteObject.unit()


def tensor_objects(objs: Iterable[FiniteObject]) -> FiniteObject:
    factors: tuple[tuple, ...] = ()
    for o in objs:
        factors = factors + o.factors
    return FiniteObject._from_factors(factors)
