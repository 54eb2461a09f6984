"""Symbol alphabets for program trees.

A :class:`FunctionSet` is an ordered alphabet of :class:`Symbol` objects.
Non-terminals (``add``, ``sin``, ...) take arguments, terminals (variables,
literals) take none, and the special constant marker ``c`` stands for a
whole constant-creation branch that resolves to a single numeric leaf.
Symbol ids are dense indices into their set; ordering is significant because
ties in the search are broken by id.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

#: semantic name -> arity, for every supported operator
OPERATOR_ARITY = {
    "add": 2,
    "sub": 2,
    "mul": 2,
    "div": 2,
    "pow": 2,
    "sin": 1,
    "cos": 1,
    "tan": 1,
    "tanh": 1,
    "exp": 1,
    "log": 1,
    "sqrt": 1,
    "inv": 1,
    "square": 1,
    "cube": 1,
}

CONSTANT_MARKER = "constant"


@dataclass(frozen=True)
class Symbol:
    """One entry of a function set.

    ``semantic`` is either an operator name from :data:`OPERATOR_ARITY`,
    ``"variable"`` (with ``var_index`` set), ``"literal"`` (with ``value``
    set), or ``"constant"`` for the constant-branch marker.
    """

    id: int
    name: str
    semantic: str
    arity: int
    var_index: int | None = None
    value: float | None = None

    @property
    def is_terminal(self) -> bool:
        """True for variables, literals and the constant marker."""
        return self.arity == 0

    @property
    def is_constant_marker(self) -> bool:
        return self.semantic == CONSTANT_MARKER

    def __post_init__(self):
        if self.semantic in OPERATOR_ARITY:
            if self.arity != OPERATOR_ARITY[self.semantic]:
                raise ValueError(f"{self.semantic} has arity {OPERATOR_ARITY[self.semantic]}, got {self.arity}")
        elif self.semantic == "variable":
            if self.arity != 0 or self.var_index is None or self.var_index < 0:
                raise ValueError("variable symbols need arity 0 and a non-negative var_index")
        elif self.semantic == "literal":
            if self.arity != 0 or self.value is None:
                raise ValueError("literal symbols need arity 0 and a value")
        elif self.semantic == CONSTANT_MARKER:
            if self.arity != 0:
                raise ValueError("the constant marker is a terminal (arity 0)")
        else:
            raise ValueError(f"unknown semantic {self.semantic!r}")


def variable(index: int, name: str, sym_id: int = -1) -> Symbol:
    return Symbol(id=sym_id, name=name, semantic="variable", arity=0, var_index=index)


def literal(value: float, sym_id: int = -1) -> Symbol:
    return Symbol(id=sym_id, name=repr(float(value)), semantic="literal", arity=0, value=float(value))


@dataclass(frozen=True)
class FunctionSet:
    """An ordered, densely indexed symbol alphabet.

    Must contain at least one terminal, otherwise no finite program exists.
    """

    symbols: tuple[Symbol, ...]
    _by_name: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not any(s.is_terminal for s in self.symbols):
            raise ValueError("a function set needs at least one terminal symbol")
        for i, s in enumerate(self.symbols):
            if s.id != i:
                raise ValueError(f"symbol ids must be dense 0..N-1, got {s.id} at position {i}")
        by_name = {}
        for s in self.symbols:
            if s.name in by_name:
                raise ValueError(f"duplicate symbol name {s.name!r}")
            by_name[s.name] = s
        object.__setattr__(self, "_by_name", by_name)

    def __len__(self) -> int:
        return len(self.symbols)

    def __iter__(self):
        return iter(self.symbols)

    def __getitem__(self, sym_id: int) -> Symbol:
        return self.symbols[sym_id]

    def by_name(self, name: str) -> Symbol | None:
        return self._by_name.get(name)

    @property
    def terminals(self) -> tuple[Symbol, ...]:
        return tuple(s for s in self.symbols if s.is_terminal)

    @property
    def has_constant_marker(self) -> bool:
        return any(s.is_constant_marker for s in self.symbols)

    @property
    def variables(self) -> tuple[Symbol, ...]:
        return tuple(s for s in self.symbols if s.semantic == "variable")

    def literal_for(self, value: float) -> Symbol | None:
        """The literal symbol carrying exactly ``value``, if the set has one."""
        for s in self.symbols:
            if s.semantic == "literal" and s.value == value:
                return s
        return None

    @property
    def constant_marker(self) -> Symbol | None:
        for s in self.symbols:
            if s.is_constant_marker:
                return s
        return None


def build_function_set(
    operators: Sequence[str],
    variables: Sequence[str],
    literals: Iterable[float] = (),
    constant: bool = False,
) -> FunctionSet:
    """Assemble a :class:`FunctionSet` with ids in listing order.

    Operators come first, then one variable per name (index = listing
    position), then literals, then the constant marker ``c`` when requested.
    """
    syms: list[Symbol] = []
    for op in operators:
        if op not in OPERATOR_ARITY:
            raise ValueError(f"unknown operator {op!r}")
        syms.append(Symbol(id=len(syms), name=op, semantic=op, arity=OPERATOR_ARITY[op]))
    for idx, nm in enumerate(variables):
        syms.append(Symbol(id=len(syms), name=nm, semantic="variable", arity=0, var_index=idx))
    for v in literals:
        syms.append(Symbol(id=len(syms), name=repr(float(v)), semantic="literal", arity=0, value=float(v)))
    if constant:
        syms.append(Symbol(id=len(syms), name="c", semantic=CONSTANT_MARKER, arity=0))
    return FunctionSet(symbols=tuple(syms))
