"""Markov shifts carrying a compatible coordinatewise quasigroup operation.

The pairing of a transition structure with an alphabet quasigroup is
*compatible* when transitions are closed under the operation: whenever
``a`` may follow ``b`` and ``a'`` may follow ``b'``, the product
``a * a'`` may follow ``b * b'``.  Everything else in this module is a
consequence of that closure, verified exhaustively at construction:

* all follower sets share one cardinality, and likewise predecessor sets;
* distinct follower sets are disjoint, so they partition the alphabet
  into *follower classes* (same for *predecessor classes*), each carrying
  a quotient quasigroup;
* the pairwise intersections of a follower class with a predecessor
  class, the *cells*, form a third compatible partition;
* the alphabet factors through a bijection ``a -> (cell of a, offset)``
  into cells times the base cell, which splits the whole shift into a
  cell shift times a full shift on the base cell;
* collapsing each symbol to its follower class quotients the shift onto
  the follower-class shift, invertibly so when cells are singletons.
"""

from __future__ import annotations

from dataclasses import dataclass

from .quasigroup import (
    BasePoint,
    CosetPartition,
    FiniteQuasigroup,
    base_point,
    from_operation,
    partition_from_blocks,
    quotient_quasigroup,
)
from .shifts import (
    AlphabetMismatchError,
    BlockCode,
    MarkovShift,
    full_shift,
    pair_name,
    product_shift,
)


class IncompatibleOperationError(ValueError):
    """Transitions are not closed under the operation.

    ``witness`` is the tuple ``(b, b2, a, a2)``: ``a`` follows ``b`` and
    ``a2`` follows ``b2``, yet ``a * a2`` does not follow ``b * b2``.
    The reported witness is the lexicographically least violation when
    ordered by ``(a, a2, b, b2)``.
    """

    def __init__(self, witness: tuple[str, str, str, str]):
        self.witness = witness
        b, b2, a, a2 = witness
        super().__init__(
            f"operation is incompatible with the transitions: "
            f"{a!r} follows {b!r} and {a2!r} follows {b2!r}, "
            f"but their product does not follow {b!r}*{b2!r}"
        )


class UnequalCardinalitiesError(ValueError):
    """Follower (or predecessor) sets do not all have the same size."""


class CellNotSingletonError(ValueError):
    """An inverse that needs singleton cells was requested with larger ones."""


@dataclass(frozen=True)
class QuasigroupShift:
    """A validated compatible pair plus a fixed base element.

    Use :func:`build`; the raw constructor performs no checks.
    """

    shift: MarkovShift
    op: FiniteQuasigroup
    base: BasePoint

    @property
    def symbols(self) -> tuple[str, ...]:
        return self.shift.symbols

    def follower(self, a: str) -> frozenset[str]:
        i = self.shift.index(a)
        return frozenset(self.shift.symbols[j] for j in self.shift.follower_indices(i))

    def predecessor(self, a: str) -> frozenset[str]:
        i = self.shift.index(a)
        return frozenset(self.shift.symbols[j] for j in self.shift.predecessor_indices(i))


def build(shift: MarkovShift, op: FiniteQuasigroup, base: str | None = None) -> QuasigroupShift:
    """Validate a (shift, operation) pair and fix a base element.

    Checks, exhaustively over symbols: closure of the transitions under
    the operation (the predecessor-side statement is the same condition
    with the roles of the quantifiers renamed, so one pass suffices),
    then equality of all follower-set sizes and all predecessor-set
    sizes, and equality of the two common sizes.

    Raises :class:`~quasishift.shifts.AlphabetMismatchError`,
    :class:`IncompatibleOperationError` (with the least witness) or
    :class:`UnequalCardinalitiesError`.
    """
    if shift.symbols != op.symbols:
        raise AlphabetMismatchError("shift and operation must share one alphabet")
    n = shift.order
    trans = shift.transitions
    table = op.table
    preds = [shift.predecessor_indices(i) for i in range(n)]
    for ia in range(n):
        for ia2 in range(n):
            ic = table[ia][ia2]
            for ib in preds[ia]:
                for ib2 in preds[ia2]:
                    if not trans[table[ib][ib2]][ic]:
                        syms = shift.symbols
                        raise IncompatibleOperationError(
                            (syms[ib], syms[ib2], syms[ia], syms[ia2])
                        )
    fsizes = {len(shift.follower_indices(i)) for i in range(n)}
    psizes = {len(shift.predecessor_indices(i)) for i in range(n)}
    if len(fsizes) != 1:
        raise UnequalCardinalitiesError(f"follower sets have sizes {sorted(fsizes)}")
    if len(psizes) != 1:
        raise UnequalCardinalitiesError(f"predecessor sets have sizes {sorted(psizes)}")
    if fsizes != psizes:
        raise UnequalCardinalitiesError(
            f"follower size {fsizes.pop()} differs from predecessor size {psizes.pop()}"
        )
    return QuasigroupShift(shift, op, base_point(op, base))


@dataclass(frozen=True)
class InducedPartitions:
    """The three class partitions of a compatible pair, with quotients.

    ``correspondence`` matches each follower class with the predecessor
    class of (any of) its members; it is a quasigroup isomorphism
    between the two quotients.
    """

    follower_classes: CosetPartition
    predecessor_classes: CosetPartition
    cells: CosetPartition
    follower_quotient: FiniteQuasigroup
    predecessor_quotient: FiniteQuasigroup
    cell_quotient: FiniteQuasigroup
    correspondence: tuple[int, ...]

    @property
    def cell_size(self) -> int:
        return self.cells.block_size


def _block_products(q: FiniteQuasigroup, p: CosetPartition) -> tuple[tuple[int, ...], ...]:
    sets = [frozenset(b) for b in p.blocks]
    lookup = {b: i for i, b in enumerate(sets)}
    return tuple(
        tuple(lookup[q.product_set(bi, bj)] for bj in sets) for bi in sets
    )


def induced_partitions(qs: QuasigroupShift) -> InducedPartitions:
    """Compute follower classes, predecessor classes and cells.

    Asserts the structural facts this package relies on: translation
    identities ``s * F(h) = F(r * h)`` for ``s`` following ``r``,
    disjointness of distinct classes, the matching of follower and
    predecessor classes, the cell product identities and the counting
    identity ``cell size x number of cells = alphabet size``.
    """
    op = qs.op
    syms = qs.symbols
    fsets = {a: qs.follower(a) for a in syms}
    psets = {a: qs.predecessor(a) for a in syms}

    for r in syms:
        fr = fsets[r]
        for s in fr:
            for h in syms:
                assert op.product_set([s], fsets[h]) == fsets[op.mul(r, h)]
                assert op.product_set(fsets[h], [s]) == fsets[op.mul(h, r)]

    follower_classes = partition_from_blocks(op, set(fsets.values()))
    predecessor_classes = partition_from_blocks(op, set(psets.values()))

    fclass_of = {a: frozenset(follower_classes.blocks[follower_classes.block_of(a)]) for a in syms}
    pclass_of = {a: frozenset(predecessor_classes.blocks[predecessor_classes.block_of(a)]) for a in syms}
    cells = partition_from_blocks(
        op, {fclass_of[a] & pclass_of[a] for a in syms}
    )
    assert cells.block_size * cells.block_count == len(syms)

    cell_sets = [frozenset(b) for b in cells.blocks]
    cell_lookup = {b: i for i, b in enumerate(cell_sets)}
    for a in syms:
        for b in syms:
            ca = cell_sets[cells.block_of(a)]
            cb = cell_sets[cells.block_of(b)]
            prod = op.product_set(ca, cb)
            assert prod == cell_sets[cells.block_of(op.mul(a, b))]
            assert prod == op.product_set([a], cb) == op.product_set(ca, [b])

    fset_list = [frozenset(b) for b in follower_classes.blocks]
    pset_list = [frozenset(b) for b in predecessor_classes.blocks]
    corr = []
    for fs in fset_list:
        images = {psets[b] for b in fs}
        assert len(images) == 1, "predecessor set must not depend on the chosen member"
        corr.append(pset_list.index(images.pop()))
    assert sorted(corr) == list(range(len(pset_list)))
    fprod = _block_products(op, follower_classes)
    pprod = _block_products(op, predecessor_classes)
    for i in range(len(fset_list)):
        for j in range(len(fset_list)):
            assert corr[fprod[i][j]] == pprod[corr[i]][corr[j]]

    return InducedPartitions(
        follower_classes,
        predecessor_classes,
        cells,
        quotient_quasigroup(op, follower_classes),
        quotient_quasigroup(op, predecessor_classes),
        quotient_quasigroup(op, cells),
        tuple(corr),
    )


@dataclass(frozen=True)
class Section:
    """One representative symbol per cell, indexed like the cell partition."""

    picks: tuple[str, ...]

    @classmethod
    def default(cls, parts: InducedPartitions) -> "Section":
        return cls(tuple(block[0] for block in parts.cells.blocks))

    @classmethod
    def from_mapping(cls, parts: InducedPartitions, mapping: dict[str, str]) -> "Section":
        """Build a section from ``member -> representative`` overrides."""
        picks = [block[0] for block in parts.cells.blocks]
        for member, pick in mapping.items():
            i = parts.cells.block_of(member)
            if pick not in parts.cells.blocks[i]:
                raise ValueError(f"{pick!r} is not in the cell of {member!r}")
            picks[i] = pick
        return cls(tuple(picks))

    def validate(self, parts: InducedPartitions) -> None:
        for i, pick in enumerate(self.picks):
            if pick not in parts.cells.blocks[i]:
                raise ValueError(f"section pick {pick!r} outside cell {i}")


def base_cell(qs: QuasigroupShift, parts: InducedPartitions) -> tuple[str, ...]:
    """The cell containing the base element."""
    return parts.cells.blocks[parts.cells.block_of(qs.base.element)]


def symbol_coordinates(
    qs: QuasigroupShift, parts: InducedPartitions, section: Section, a: str
) -> tuple[int, str]:
    """Split a symbol into (cell index, offset inside the base cell).

    The offset is ``inv(S(cell of a)) * a`` with ``inv`` the left inverse
    at the base element; it always lands in the base cell, and the map is
    a bijection onto cells x base cell.
    """
    ci = parts.cells.block_of(a)
    pick = section.picks[ci]
    inv = qs.base.left_of(qs.op, pick)
    offset = qs.op.mul(inv, a)
    assert offset in base_cell(qs, parts)
    return ci, offset


def symbol_from_coordinates(
    qs: QuasigroupShift, parts: InducedPartitions, section: Section, cell_index: int, offset: str
) -> str:
    """Inverse of :func:`symbol_coordinates`."""
    pick = section.picks[cell_index]
    inv = qs.base.left_of(qs.op, pick)
    g = qs.op.symbols[qs.op.right_solve_i(qs.op.index(inv), qs.op.index(offset))]
    assert parts.cells.block_of(g) == cell_index
    return g


def pair_product(
    qs: QuasigroupShift,
    parts: InducedPartitions,
    section: Section,
    x: tuple[int, str],
    y: tuple[int, str],
) -> tuple[int, str]:
    """The operation transported to (cell, offset) pairs.

    Defined as coordinates(preimage(x) * preimage(y)); its first
    component agrees with the cell quotient operation.
    """
    gx = symbol_from_coordinates(qs, parts, section, *x)
    gy = symbol_from_coordinates(qs, parts, section, *y)
    out = symbol_coordinates(qs, parts, section, qs.op.mul(gx, gy))
    cell_prod = _block_products(qs.op, parts.cells)[x[0]][y[0]]
    assert out[0] == cell_prod
    return out


def cell_shift(qs: QuasigroupShift, parts: InducedPartitions) -> QuasigroupShift:
    """The quotient shift on cells, as a validated quasigroup shift.

    Cell ``c`` may be followed by cell ``c'`` exactly when ``c'`` lies
    inside the follower set of the members of ``c`` (which is one set:
    members of a cell share their follower set).  The base element of
    the result is the cell of the original base element, and its own
    cell structure is trivial: singleton cells.
    """
    op = qs.op
    cell_sets = [frozenset(b) for b in parts.cells.blocks]
    names = parts.cells.names()
    fset_of_cell = []
    for block in parts.cells.blocks:
        fsets = {qs.follower(a) for a in block}
        assert len(fsets) == 1
        fset_of_cell.append(fsets.pop())
    matrix = tuple(
        tuple(1 if cell_sets[j] <= fset_of_cell[i] else 0 for j in range(len(names)))
        for i in range(len(names))
    )
    order = sorted(range(len(names)), key=lambda i: names[i])
    shift = MarkovShift(
        tuple(names[i] for i in order),
        tuple(tuple(matrix[i][j] for j in order) for i in order),
    )
    quotient = parts.cell_quotient
    e_cell = names[parts.cells.block_of(qs.base.element)]
    result = build(shift, quotient, e_cell)

    # The cell of the base element, seen inside the quotient, is a singleton,
    # independently of which predecessor/follower of the base anchors it.
    e = qs.base.element
    for xbar in sorted(qs.predecessor(e)):
        for ybar in sorted(qs.follower(e)):
            fx = result.follower(names[parts.cells.block_of(xbar)])
            py = result.predecessor(names[parts.cells.block_of(ybar)])
            assert fx & py == {e_cell}
    return result


@dataclass(frozen=True)
class CellSplitting:
    """The shift re-presented as cell shift times full shift on the base cell."""

    forward: BlockCode
    backward: BlockCode
    target: QuasigroupShift
    cell_factor: QuasigroupShift
    offsets: tuple[str, ...]


def split_by_cells(
    qs: QuasigroupShift, parts: InducedPartitions, section: Section | None = None
) -> CellSplitting:
    """Split the shift through the (cell, offset) coordinates.

    Both directions are one-block codes; the target is the product of
    the cell shift with the full shift on the base cell, carrying the
    transported pair operation.  The forward rule is checked to be an
    operation homomorphism symbol by symbol.
    """
    if section is None:
        section = Section.default(parts)
    section.validate(parts)
    cf = cell_shift(qs, parts)
    offsets = base_cell(qs, parts)
    names = parts.cells.names()

    coords = {a: symbol_coordinates(qs, parts, section, a) for a in qs.symbols}
    as_pair = {a: pair_name(names[c], off) for a, (c, off) in coords.items()}
    assert len(set(as_pair.values())) == len(qs.symbols)

    target_shift = product_shift(cf.shift, full_shift(offsets))
    pair_syms = set(target_shift.symbols)
    assert set(as_pair.values()) == pair_syms

    inverse = {v: k for k, v in as_pair.items()}

    def pair_op(u: str, v: str) -> str:
        return as_pair[qs.op.mul(inverse[u], inverse[v])]

    target_op = from_operation(sorted(pair_syms), pair_op)
    target = build(target_shift, target_op, as_pair[qs.base.element])

    for a in qs.symbols:
        for b in qs.symbols:
            assert as_pair[qs.op.mul(a, b)] == target_op.mul(as_pair[a], as_pair[b])

    forward = BlockCode(qs.symbols, target.symbols, 0, 0, {(a,): as_pair[a] for a in qs.symbols})
    backward = BlockCode(target.symbols, qs.symbols, 0, 0, {(v,): k for k, v in as_pair.items()})
    return CellSplitting(forward, backward, target, cf, offsets)


def follower_shift(qs: QuasigroupShift, parts: InducedPartitions) -> tuple[QuasigroupShift, BlockCode]:
    """Quotient onto follower classes, with the collapsing one-block code.

    Class ``C`` may be followed by class ``C'`` when some member of ``C``
    has follower set exactly ``C'``.  The code sends each symbol to the
    class that equals its follower set; it is onto and an operation
    homomorphism.
    """
    op = qs.op
    classes = parts.follower_classes
    sets = [frozenset(b) for b in classes.blocks]
    names = classes.names()
    theta_idx = {a: sets.index(qs.follower(a)) for a in qs.symbols}
    matrix = [[0] * len(sets) for _ in sets]
    for a in qs.symbols:
        matrix[classes.block_of(a)][theta_idx[a]] = 1
    order = sorted(range(len(names)), key=lambda i: names[i])
    shift = MarkovShift(
        tuple(names[i] for i in order),
        tuple(tuple(matrix[i][j] for j in order) for i in order),
    )
    e_class = names[theta_idx[qs.base.element]]
    target = build(shift, parts.follower_quotient, e_class)
    code = BlockCode(
        qs.symbols, target.symbols, 0, 0, {(a,): names[theta_idx[a]] for a in qs.symbols}
    )
    for a in qs.symbols:
        for b in qs.symbols:
            assert code.rule[(qs.op.mul(a, b),)] == target.op.mul(
                code.rule[(a,)], code.rule[(b,)]
            )
    return target, code


def follower_shift_inverse(qs: QuasigroupShift, parts: InducedPartitions) -> BlockCode:
    """Invert the follower-class quotient when cells are singletons.

    The inverse reads one symbol of memory: the pair (previous class,
    current class) determines the unique member of the previous class
    whose follower set is the current class.  With larger cells the
    quotient is not injective and :class:`CellNotSingletonError` is
    raised.
    """
    if parts.cell_size != 1:
        raise CellNotSingletonError(
            f"cells have size {parts.cell_size}; the quotient is not invertible"
        )
    classes = parts.follower_classes
    sets = [frozenset(b) for b in classes.blocks]
    names = classes.names()
    target, _code = follower_shift(qs, parts)
    rule: dict[tuple[str, ...], str] = {}
    for i, ci in enumerate(sets):
        for j, cj in enumerate(sets):
            members = [g for g in sorted(ci) if qs.follower(g) == cj]
            if not members:
                continue
            assert len(members) == 1, "singleton cells force a unique preimage"
            rule[(names[i], names[j])] = members[0]
    return BlockCode(target.symbols, qs.symbols, 1, 0, rule)
