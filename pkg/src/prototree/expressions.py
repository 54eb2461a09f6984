"""Concrete program trees, protected evaluation, and the text format.

Expressions are immutable trees of :class:`~prototree.symbols.Symbol`
occurrences.  Every leaf is a terminal: a variable, a literal, or a resolved
constant.  Evaluation is pure and uses protected operator semantics so that
any expression maps finite inputs to finite outputs:

* ``div(a, 0) = 1`` and ``inv(0) = 1``
* ``log(x) = log(|x|)`` with ``log(0) = 0``; ``sqrt(x) = sqrt(|x|)``
* ``pow(a, b) = |a| ** b`` clamped to ``1e300``; ``exp`` and ``tan`` clamped
  the same way
* any remaining non-finite intermediate (e.g. ``mul`` overflow) becomes 1,
  the same convention as protected division

The text format is prefix notation with parenthesized argument lists, e.g.
``add(x,sin(x))``; numeric leaves print with full ``repr`` precision so they
survive a round trip bit-exactly.
"""

from __future__ import annotations

import re
from typing import Iterator

import numpy as np

from .datasets import Dataset
from .errors import InputMismatchError, ParseError
from .symbols import CONSTANT_MARKER, FunctionSet, Symbol

#: clamp bound for operators whose protected form saturates instead of
#: falling back to 1
CLAMP = 1e300


class Expression:
    """One symbol occurrence plus its argument subtrees.

    ``value`` carries the numeric payload of literal leaves and resolved
    constants.  Structural equality compares shapes, operator semantics and
    leaf payloads; two numeric leaves are equal iff they hold the same value,
    regardless of whether they came from a literal symbol or a constant
    branch (they evaluate and print identically).
    """

    __slots__ = ("symbol", "children", "value")

    def __init__(self, symbol: Symbol, children: tuple["Expression", ...] = (), value: float | None = None):
        if len(children) != symbol.arity:
            raise ValueError(f"{symbol.name} takes {symbol.arity} arguments, got {len(children)}")
        if symbol.semantic == "literal" and value is None:
            value = symbol.value
        if symbol.semantic == CONSTANT_MARKER and value is None:
            raise ValueError("a constant leaf needs its resolved value")
        self.symbol = symbol
        self.children = children
        self.value = value

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def __eq__(self, other) -> bool:
        if not isinstance(other, Expression):
            return NotImplemented
        a, b = self.symbol, other.symbol
        if a.semantic == "variable" or b.semantic == "variable":
            return a.semantic == b.semantic and a.var_index == b.var_index
        if self.value is not None or other.value is not None:
            return self.value == other.value
        return a.semantic == b.semantic and self.children == other.children

    def __hash__(self):
        if self.symbol.semantic == "variable":
            return hash(("var", self.symbol.var_index))
        if self.value is not None:
            return hash(("num", self.value))
        return hash((self.symbol.semantic, self.children))

    def __repr__(self):
        return f"Expression({to_text(self)!r})"


def _op_expr(symbol: Symbol, children: tuple) -> Expression:
    # hot-path constructor: callers guarantee len(children) == symbol.arity
    e = Expression.__new__(Expression)
    e.symbol = symbol
    e.children = children
    e.value = None
    return e


def _leaf_expr(symbol: Symbol, value: float) -> Expression:
    e = Expression.__new__(Expression)
    e.symbol = symbol
    e.children = ()
    e.value = value
    return e


def make_op(semantic: str, *children: Expression) -> Expression:
    """Build an operator node with a detached symbol (handy outside a set)."""
    from .symbols import OPERATOR_ARITY

    sym = Symbol(id=-1, name=semantic, semantic=semantic, arity=OPERATOR_ARITY[semantic])
    return Expression(sym, tuple(children))


def make_var(index: int, name: str | None = None) -> Expression:
    sym = Symbol(id=-1, name=name or f"x{index}", semantic="variable", arity=0, var_index=index)
    return Expression(sym)


def make_const(value: float) -> Expression:
    sym = Symbol(id=-1, name=repr(float(value)), semantic="literal", arity=0, value=float(value))
    return Expression(sym)


def depth(expr: Expression) -> int:
    """Tree depth; a lone terminal (including a resolved constant) is 1."""
    if not expr.children:
        return 1
    return 1 + max(depth(c) for c in expr.children)


def size(expr: Expression) -> int:
    """Total symbol occurrences; a resolved constant counts as one."""
    return 1 + sum(size(c) for c in expr.children)


# --- protected operator kernels -------------------------------------------
# Each kernel accepts numpy arrays or float64 scalars and must return a
# finite result for finite inputs.

def _finite_or_one(a):
    m = np.isfinite(a)
    if m.all():
        return a
    return np.where(m, a, 1.0)


def _p_add(a, b):
    return _finite_or_one(a + b)


def _p_sub(a, b):
    return _finite_or_one(a - b)


def _p_mul(a, b):
    return _finite_or_one(a * b)


def _p_div(a, b):
    zero = b == 0.0
    if not zero.any():
        return _finite_or_one(a / b)
    return _finite_or_one(np.where(zero, 1.0, a / b))


def _p_inv(a):
    zero = a == 0.0
    if not zero.any():
        return _finite_or_one(1.0 / a)
    return _finite_or_one(np.where(zero, 1.0, 1.0 / a))


def _p_pow(a, b):
    return np.minimum(np.abs(a) ** b, CLAMP)


def _p_exp(a):
    return np.minimum(np.exp(a), CLAMP)


def _p_log(a):
    out = np.log(np.abs(a))
    zero = a == 0.0
    if not zero.any():
        return out
    return np.where(zero, 0.0, out)


def _p_sqrt(a):
    return np.sqrt(np.abs(a))


def _p_tan(a):
    return np.clip(np.tan(a), -CLAMP, CLAMP)


def _p_square(a):
    return _finite_or_one(a * a)


def _p_cube(a):
    return _finite_or_one(a * a * a)


_KERNELS = {
    "add": _p_add,
    "sub": _p_sub,
    "mul": _p_mul,
    "div": _p_div,
    "pow": _p_pow,
    "sin": np.sin,
    "cos": np.cos,
    "tan": _p_tan,
    "tanh": np.tanh,
    "exp": _p_exp,
    "log": _p_log,
    "sqrt": _p_sqrt,
    "inv": _p_inv,
    "square": _p_square,
    "cube": _p_cube,
}


def _eval(expr: Expression, X: np.ndarray):
    sem = expr.symbol.semantic
    if sem == "variable":
        idx = expr.symbol.var_index
        if idx >= X.shape[1]:
            raise InputMismatchError(
                f"expression uses variable index {idx} but the input has {X.shape[1]} dimension(s)"
            )
        return X[:, idx]
    if not expr.children:
        return np.float64(expr.value)
    kernel = _KERNELS[sem]
    if len(expr.children) == 1:
        return kernel(_eval(expr.children[0], X))
    return kernel(_eval(expr.children[0], X), _eval(expr.children[1], X))


def evaluate_rows(expr: Expression, X: np.ndarray):
    """Evaluate ``expr`` on every row of ``X`` at once.

    Returns a (rows,) array, or a float64 scalar when the expression uses no
    variables (numpy broadcasting handles both downstream).
    """
    with np.errstate(all="ignore"):
        return _eval(expr, np.asarray(X, dtype=np.float64))


def evaluate(expr: Expression, inputs) -> float:
    """Evaluate ``expr`` on a single input vector."""
    row = np.atleast_1d(np.asarray(inputs, dtype=np.float64))
    out = evaluate_rows(expr, row.reshape(1, -1))
    return float(np.asarray(out).reshape(-1)[0]) if np.ndim(out) else float(out)


def mse(expr: Expression, data: Dataset) -> float:
    """Mean squared error of ``expr`` against ``data``.

    Squared residuals are clamped at ``1e300`` so the score stays finite and
    ordered even for expressions that saturate the protected clamps.
    """
    with np.errstate(all="ignore"):
        pred = _eval(expr, data.X)
        resid = pred - data.y
        sq = np.minimum(resid * resid, CLAMP)
        return float(np.mean(sq))


# --- text format ------------------------------------------------------------

def to_text(expr: Expression) -> str:
    """Prefix notation with parenthesized arguments, e.g. ``add(x,sin(x))``."""
    sym = expr.symbol
    if sym.semantic == "variable":
        return sym.name
    if not expr.children:
        return repr(float(expr.value))
    return f"{sym.name}({','.join(to_text(c) for c in expr.children)})"


_TOKEN = re.compile(
    r"\s*(?:(?P<num>-?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<punct>[(),]))"
)


def _tokenize(text: str) -> Iterator[tuple[str, str, int]]:
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            if text[pos:].strip() == "":
                return
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        for kind in ("num", "name", "punct"):
            if m.group(kind) is not None:
                yield kind, m.group(kind), m.start(kind)
                break
        pos = m.end()


class _Parser:
    def __init__(self, text: str, function_set: FunctionSet):
        self.text = text
        self.fset = function_set
        self.tokens = list(_tokenize(text))
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, None, len(self.text))

    def next(self):
        tok = self.peek()
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, val, pos = self.next()
        if val != value:
            raise ParseError(f"expected {value!r}, found {val!r}", pos)

    def parse(self) -> Expression:
        expr = self.expression()
        kind, val, pos = self.peek()
        if kind is not None:
            raise ParseError(f"trailing input {val!r}", pos)
        return expr

    def expression(self) -> Expression:
        kind, val, pos = self.next()
        if kind is None:
            raise ParseError("unexpected end of input", pos)
        if kind == "num":
            return self.numeric_leaf(val, pos)
        if kind == "name":
            return self.symbol_node(val, pos)
        raise ParseError(f"unexpected token {val!r}", pos)

    def numeric_leaf(self, text: str, pos: int) -> Expression:
        value = float(text)
        sym = self.fset.literal_for(value)
        if sym is not None:
            return Expression(sym)
        marker = self.fset.constant_marker
        if marker is not None:
            return Expression(marker, value=value)
        raise ParseError(f"the function set cannot represent the number {text}", pos)

    def symbol_node(self, name: str, pos: int) -> Expression:
        sym = self.fset.by_name(name)
        if sym is None:
            raise ParseError(f"unknown symbol {name!r}", pos)
        if sym.is_terminal:
            return Expression(sym)
        self.expect("(")
        args = [self.expression()]
        while True:
            kind, val, p = self.next()
            if val == ",":
                args.append(self.expression())
            elif val == ")":
                break
            else:
                raise ParseError(f"expected ',' or ')', found {val!r}", p)
        if len(args) != sym.arity:
            raise ParseError(f"{name} takes {sym.arity} arguments, got {len(args)}", pos)
        return Expression(sym, tuple(args))


def from_text(text: str, function_set: FunctionSet) -> Expression:
    """Parse the prefix text format back into an expression.

    Numeric leaves resolve to an exactly matching literal symbol when the set
    has one, otherwise to the set's constant marker.
    """
    return _Parser(text, function_set).parse()
