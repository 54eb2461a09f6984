"""The probabilistic prototype tree and its search operations.

One tree represents the whole space of programs over a function set up to a
maximum depth.  Each node is an *argument slot* holding one record per
admissible symbol; a record keeps the best (discounted) error of any
evaluated instance that passed through that choice, plus the lazily built
child nodes the choice links to.  Only slots actually visited by a sampled
instance are ever materialized.

Search loop mechanics:

* sampling draws one choice per visited node -- uniformly while any choice
  of the node is still unevaluated, then from a rank power law where rank 1
  (lowest stored error) gets probability ``1**-k / sum(r**-k)``
* evaluation errors propagate back along the sampled path, each record
  keeping the minimum discounted error seen
* the depth discount multiplies an instance's error by
  ``(1 + delta_d) ** (leaf_depth - node_depth)`` per record, nudging search
  toward smaller programs
* paths that produce no new global best are penalized by inflating their
  stored errors by ``(1 + delta_p)``

A tree is owned by exactly one run and mutated single-threaded; run-level
parallelism uses independent trees with independent seeds.
"""

from __future__ import annotations

import math
from bisect import bisect_left, bisect_right, insort
from collections import namedtuple
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .constants import ConstantBranchSpec, resolve_constant
from .errors import NoSolutionError
from .expressions import Expression, _leaf_expr, _op_expr
from .symbols import FunctionSet

DIGITS = tuple(range(10))


@dataclass(frozen=True)
class SearchParams:
    """Knobs of the search; defaults are the standard benchmark settings."""

    k: float = 4.0
    delta_d: float = 0.001
    delta_p: float = 0.00075
    max_depth: int = 15
    terminal_bias_first_visit: bool = True
    rng_seed: int = 0

    def __post_init__(self):
        if self.k <= 0:
            raise ValueError("rank exponent k must be positive")
        if self.delta_d < 0 or self.delta_p < 0:
            raise ValueError("discount factors must be non-negative")
        if self.max_depth < 1:
            raise ValueError("max_depth must be at least 1")


class ChoiceRecord:
    """Bookkeeping for one symbol choice at one node.

    ``best_iter`` is the iteration that last strictly improved
    ``best_error``.  It refines error ties in the greedy best-path walk: the
    first instance to reach a given error stamps its whole path in one
    iteration, so following minimal ``(error, stamp)`` keys reconstructs one
    coherent instance instead of mixing subtrees of distinct instances that
    happen to score identically.
    """

    __slots__ = ("best_error", "best_iter", "eval_count", "children")

    def __init__(self):
        self.best_error = None
        self.best_iter = 0
        self.eval_count = 0
        self.children = None

    def __repr__(self):
        err = "unevaluated" if self.best_error is None else repr(self.best_error)
        return f"ChoiceRecord(best_error={err}, eval_count={self.eval_count})"


class PrototypeNode:
    """One argument slot: parallel lists of choices and their records.

    ``kind`` is ``"sym"`` for ordinary symbol slots, ``"float"`` for the
    float-position node of a constant branch and ``"digit"`` for its digit
    nodes (whose choices are ints rather than symbols).  ``bias_idx`` holds
    the indices eligible under the first-visit terminal bias.

    ``skeys`` caches, once every choice has been evaluated, the records
    sorted as ``(best_error, index)`` pairs; error updates along a sampled
    path keep it in step so the rank draw never re-sorts.
    """

    __slots__ = ("kind", "depth", "pos", "choices", "records", "bias_idx", "first_visit_done", "uneval", "skeys")

    def __init__(self, kind, depth, pos, choices, bias_idx):
        self.kind = kind
        self.depth = depth
        self.pos = pos
        self.choices = choices
        self.records = [ChoiceRecord() for _ in choices]
        self.bias_idx = bias_idx
        self.first_visit_done = False
        self.uneval = len(choices)
        self.skeys = None


#: one sampled-path entry: the visited node, the chosen label (symbol id,
#: float position or digit), the touched record, the node/branch-leaf depths
#: used by the depth discount, and the choice's index within the node
PathStep = namedtuple("PathStep", "node choice record node_depth leaf_depth idx")


@dataclass
class SamplePath:
    """A sampled instance: the visited records plus the expression they spell."""

    entries: list
    expression: Expression


def _reposition(skeys: list, old_key: tuple, new_key: tuple) -> None:
    # keys are unique (index tiebreaker), so bisect_left finds the exact slot;
    # small nudges usually leave the rank unchanged, so try in place first
    i = bisect_left(skeys, old_key)
    if new_key > old_key:
        if i + 1 == len(skeys) or new_key < skeys[i + 1]:
            skeys[i] = new_key
            return
    elif i == 0 or skeys[i - 1] < new_key:
        skeys[i] = new_key
        return
    del skeys[i]
    insort(skeys, new_key)


@lru_cache(maxsize=128)
def _rank_cumulative(n: int, k: float) -> tuple:
    weights = np.arange(1, n + 1, dtype=np.float64) ** (-k)
    cum = np.cumsum(weights)
    cum /= cum[-1]
    return tuple(cum)


@lru_cache(maxsize=128)
def _rank_probabilities(n: int, k: float) -> np.ndarray:
    weights = np.arange(1, n + 1, dtype=np.float64) ** (-k)
    p = weights / weights.sum()
    p.setflags(write=False)
    return p


def choice_probabilities(node: PrototypeNode, params: SearchParams) -> np.ndarray:
    """Current sampling distribution over ``node.choices``.

    Uniform while any choice is unevaluated (restricted to terminals on the
    very first visit when the bias is on); afterwards the rank power law,
    with ranks by ascending stored error and ties broken by choice order.
    """
    n = len(node.records)
    if n == 0:
        raise ValueError("node has no admissible choices")
    if params.terminal_bias_first_visit and not node.first_visit_done:
        p = np.zeros(n)
        p[list(node.bias_idx)] = 1.0 / len(node.bias_idx)
        return p
    if node.uneval > 0:
        return np.full(n, 1.0 / n)
    order = sorted(range(n), key=lambda i: (node.records[i].best_error, i))
    ranked = _rank_probabilities(n, params.k)
    p = np.empty(n)
    for rank, idx in enumerate(order):
        p[idx] = ranked[rank]
    return p


class PrototypeTree:
    """A prototype tree plus its global-best bookkeeping.

    ``record_instances`` keeps a log of ``(records-on-path, raw_error)``
    pairs for every propagated instance; it exists for replay-style
    verification and debugging and is off by default to keep long runs lean.
    """

    def __init__(
        self,
        function_set: FunctionSet,
        params: SearchParams,
        constant_spec: ConstantBranchSpec | None = None,
        record_instances: bool = False,
    ):
        if function_set.has_constant_marker and constant_spec is None:
            raise ValueError("function set has a constant marker; a ConstantBranchSpec is required")
        self.function_set = function_set
        self.params = params
        self.constant_spec = constant_spec
        self.instance_log = [] if record_instances else None
        self.best_raw_error = math.inf
        self.best_raw_expression = None
        self._rng = None
        self._tick = 0

        syms = function_set.symbols
        self._all_choices = tuple(syms)
        self._all_bias_idx = tuple(i for i, s in enumerate(syms) if s.is_terminal)
        self._term_choices = tuple(s for s in syms if s.is_terminal)
        self._term_bias_idx = tuple(range(len(self._term_choices)))
        base = 1.0 + params.delta_d
        self._disc_pows = [base ** e for e in range(params.max_depth + 1)]
        self._m_choices = constant_spec.m_values if constant_spec else ()
        self._bias = params.terminal_bias_first_visit
        self._cum = {}
        self._marker = function_set.constant_marker
        # terminal expressions are immutable, so one shared leaf per symbol does
        self._leaf_cache = {s.id: Expression(s) for s in syms if s.is_terminal and not s.is_constant_marker}
        self.root = self._symbol_node(1)

    # -- node construction --------------------------------------------------

    def _symbol_node(self, depth: int) -> PrototypeNode:
        if depth >= self.params.max_depth:
            return PrototypeNode("sym", depth, 0, self._term_choices, self._term_bias_idx)
        return PrototypeNode("sym", depth, 0, self._all_choices, self._all_bias_idx)

    def _float_node(self, depth: int) -> PrototypeNode:
        idx = tuple(range(len(self._m_choices)))
        return PrototypeNode("float", depth, 0, self._m_choices, idx)

    def _digit_node(self, depth: int, pos: int) -> PrototypeNode:
        return PrototypeNode("digit", depth, pos, DIGITS, tuple(range(10)))

    # -- sampling -------------------------------------------------------------

    def default_rng(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.params.rng_seed))

    def _draw(self, node: PrototypeNode, rng) -> int:
        # uniform draws go through floor(u * n) so the whole search consumes
        # a single stream of unit floats
        if not node.first_visit_done:
            node.first_visit_done = True
            if self._bias:
                bias = node.bias_idx
                i = int(rng.random() * len(bias))
                return bias[i if i < len(bias) else len(bias) - 1]
        n = len(node.records)
        if node.uneval > 0:
            i = int(rng.random() * n)
            return i if i < n else n - 1
        skeys = node.skeys
        if skeys is None:
            skeys = sorted((rec.best_error, i) for i, rec in enumerate(node.records))
            node.skeys = skeys
        cum = self._cum.get(n)
        if cum is None:
            cum = _rank_cumulative(n, self.params.k)
            self._cum[n] = cum
        rank = bisect_right(cum, rng.random())
        if rank >= n:
            rank = n - 1
        return skeys[rank][1]

    def sample_instance(self, rng=None) -> SamplePath:
        """Draw one program instance, materializing nodes on demand."""
        if rng is None:
            if self._rng is None:
                self._rng = self.default_rng()
            rng = self._rng
        entries = []
        expr, _ = self._sample_sym(self.root, rng, entries)
        return SamplePath(entries, expr)

    def _sample_sym(self, node: PrototypeNode, rng, entries) -> tuple[Expression, int]:
        idx = self._draw(node, rng)
        rec = node.records[idx]
        sym = node.choices[idx]
        slot = len(entries)
        entries.append(None)
        nd = node.depth
        leaf = nd
        if sym.arity == 0:
            if sym is self._marker:
                expr = _leaf_expr(sym, self._sample_branch(rec, nd, rng, entries))
            else:
                expr = self._leaf_cache[sym.id]
        else:
            if rec.children is None:
                rec.children = [self._symbol_node(nd + 1) for _ in range(sym.arity)]
            kids = []
            for child in rec.children:
                child_expr, child_leaf = self._sample_sym(child, rng, entries)
                kids.append(child_expr)
                if child_leaf > leaf:
                    leaf = child_leaf
            expr = _op_expr(sym, tuple(kids))
        entries[slot] = tuple.__new__(PathStep, (node, sym.id, rec, nd, leaf, idx))
        return expr, leaf

    def _sample_branch(self, marker_rec: ChoiceRecord, outer_depth: int, rng, entries) -> float:
        # The whole branch counts as one terminal of the outer tree, so every
        # in-branch step carries leaf_depth == node_depth (no depth discount).
        if marker_rec.children is None:
            marker_rec.children = [self._float_node(outer_depth)]
        fnode = marker_rec.children[0]
        fidx = self._draw(fnode, rng)
        m = fnode.choices[fidx]
        rec = fnode.records[fidx]
        entries.append(PathStep(fnode, m, rec, outer_depth, outer_depth, fidx))
        digits = []
        for pos in range(1, self.constant_spec.digit_depth + 1):
            if rec.children is None:
                rec.children = [self._digit_node(outer_depth, pos)]
            dnode = rec.children[0]
            didx = self._draw(dnode, rng)
            digit = dnode.choices[didx]
            rec = dnode.records[didx]
            digits.append(digit)
            entries.append(PathStep(dnode, digit, rec, outer_depth, outer_depth, didx))
        return resolve_constant(m, digits, self.constant_spec)

    # -- error propagation ------------------------------------------------------

    def propagate(self, path: SamplePath, raw_error: float) -> bool:
        """Fold one evaluated instance back into the tree.

        Each record on the path keeps the minimum discounted error; returns
        whether ``raw_error`` strictly improved on the global best.
        """
        raw = float(raw_error)
        if not math.isfinite(raw) or raw < 0.0:
            raise ValueError(f"raw error must be finite and non-negative, got {raw_error!r}")
        improved = raw < self.best_raw_error
        if improved:
            self.best_raw_error = raw
            self.best_raw_expression = path.expression
        pows = self._disc_pows
        self._tick += 1
        tick = self._tick
        for node, _choice, rec, node_depth, leaf_depth, idx in path.entries:
            disc = raw * pows[leaf_depth - node_depth]
            if rec.eval_count == 0:
                node.uneval -= 1
                rec.best_error = disc
                rec.best_iter = tick
            elif disc < rec.best_error:
                skeys = node.skeys
                if skeys is not None:
                    _reposition(skeys, (rec.best_error, idx), (disc, idx))
                rec.best_error = disc
                rec.best_iter = tick
            rec.eval_count += 1
        if self.instance_log is not None:
            self.instance_log.append((tuple(s.record for s in path.entries), raw))
        return improved

    def penalize_stagnation(self, path: SamplePath) -> None:
        """Inflate stored errors along a path that brought no global improvement.

        Call only after :meth:`propagate` returned ``False`` for this path.
        """
        factor = 1.0 + self.params.delta_p
        if factor == 1.0:
            return
        for node, _choice, rec, _nd, _ld, idx in path.entries:
            old = rec.best_error
            new = old * factor
            if new != old:
                skeys = node.skeys
                if skeys is not None:
                    _reposition(skeys, (old, idx), (new, idx))
            rec.best_error = new

    # -- queries ---------------------------------------------------------------

    def choice_probabilities(self, node: PrototypeNode) -> np.ndarray:
        return choice_probabilities(node, self.params)

    def best_path_expression(self) -> Expression:
        """Follow the minimum stored error at every node.

        Error ties break by the improvement stamp (earliest first), then by
        choice order; see :class:`ChoiceRecord` for why the stamp keeps the
        walk on one coherent instance.
        """
        if self.root.uneval == len(self.root.records):
            raise NoSolutionError("no instance has been evaluated yet")
        return self._greedy_sym(self.root)

    def _greedy_sym(self, node: PrototypeNode) -> Expression:
        idx = self._greedy_choice(node)
        rec = node.records[idx]
        sym = node.choices[idx]
        if sym.arity == 0:
            if sym.is_constant_marker:
                return Expression(sym, (), self._greedy_branch(rec))
            return Expression(sym)
        return Expression(sym, tuple(self._greedy_sym(child) for child in rec.children))

    def _greedy_branch(self, marker_rec: ChoiceRecord) -> float:
        fnode = marker_rec.children[0]
        fidx = self._greedy_choice(fnode)
        m = fnode.choices[fidx]
        rec = fnode.records[fidx]
        digits = []
        for _ in range(self.constant_spec.digit_depth):
            dnode = rec.children[0]
            didx = self._greedy_choice(dnode)
            digits.append(dnode.choices[didx])
            rec = dnode.records[didx]
        return resolve_constant(m, digits, self.constant_spec)

    @staticmethod
    def _greedy_choice(node: PrototypeNode) -> int:
        best_idx = -1
        best = (math.inf, 0)
        for i, rec in enumerate(node.records):
            if rec.eval_count > 0:
                key = (rec.best_error, rec.best_iter)
                if key < best:
                    best = key
                    best_idx = i
        if best_idx < 0:
            raise NoSolutionError("reached a node with no evaluated choice")
        return best_idx

    def node_count(self) -> int:
        """Number of materialized nodes (constant-branch nodes included)."""
        count = 0
        stack = [self.root]
        while stack:
            node = stack.pop()
            count += 1
            for rec in node.records:
                if rec.children:
                    stack.extend(rec.children)
        return count

    def iter_records(self):
        """Yield ``(node_path, choice_label, record)`` over materialized slots."""
        yield from self._iter_records(self.root, "root")

    def _iter_records(self, node, addr):
        for i, rec in enumerate(node.records):
            choice = node.choices[i]
            label = choice.name if node.kind == "sym" else str(choice)
            yield addr, label, rec
            if rec.children:
                for j, child in enumerate(rec.children):
                    yield from self._iter_records(child, f"{addr}/{label}[{j}]")

    def dump_state(self):
        """Debug dump: one text line per materialized record."""
        for addr, label, rec in self.iter_records():
            err = "unevaluated" if rec.best_error is None else repr(rec.best_error)
            yield f"{addr}\t{label}\t{err}\t{rec.eval_count}"
