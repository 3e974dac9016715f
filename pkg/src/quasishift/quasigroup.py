"""Finite quasigroups presented as Latin squares.

A finite quasigroup is a finite set with a binary operation whose Cayley
table is a Latin square: every row and every column is a permutation of
the alphabet, so left and right division are everywhere defined and
unique.  Symbols are opaque strings; the alphabet is kept in a canonical
(lexicographic) order fixed at construction so that all derived output
is deterministic.

Property checkers here are exhaustive, not sampled: at the alphabet
sizes this package targets (a few dozen at most) full enumeration is a
proof.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence


class LatinSquareError(ValueError):
    """The given table is not the Cayley table of a quasigroup."""


class RowNotPermutationError(LatinSquareError):
    def __init__(self, row: int):
        self.row = row
        super().__init__(f"row {row} is not a permutation of the alphabet")


class ColumnNotPermutationError(LatinSquareError):
    def __init__(self, column: int):
        self.column = column
        super().__init__(f"column {column} is not a permutation of the alphabet")


class UnknownSymbolError(LatinSquareError):
    def __init__(self, symbol: object):
        self.symbol = symbol
        super().__init__(f"symbol {symbol!r} is not in the alphabet")


class PartitionError(ValueError):
    """A family of symbol sets fails to be a usable partition."""


class NotAPartitionError(PartitionError):
    pass


class NotCompatibleError(PartitionError):
    """Blocks partition the alphabet but block products are not blocks."""


@dataclass(frozen=True)
class FiniteQuasigroup:
    """A Latin square over a canonically ordered alphabet.

    ``table[i][j]`` is the index of ``symbols[i] * symbols[j]``.  Use
    :func:`validate_latin_square` or :func:`from_operation` to build one
    from symbol-level data; the constructor itself re-checks the Latin
    property so an invalid instance cannot exist.
    """

    symbols: tuple[str, ...]
    table: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        n = len(self.symbols)
        if n < 1:
            raise LatinSquareError("alphabet must be non-empty")
        if list(self.symbols) != sorted(self.symbols):
            raise LatinSquareError("alphabet must be in canonical sorted order")
        if len(set(self.symbols)) != n:
            raise LatinSquareError("alphabet symbols must be distinct")
        if len(self.table) != n:
            raise LatinSquareError("table must be square over the alphabet")
        full = frozenset(range(n))
        for i, row in enumerate(self.table):
            if len(row) != n:
                raise LatinSquareError("table must be square over the alphabet")
            if frozenset(row) != full:
                raise RowNotPermutationError(i)
        for j in range(n):
            if frozenset(row[j] for row in self.table) != full:
                raise ColumnNotPermutationError(j)
        # Division tables: _left_solve[a][b] solves x*a = b, _right_solve[a][b]
        # solves a*x = b.
        left = [[0] * n for _ in range(n)]
        right = [[0] * n for _ in range(n)]
        for i in range(n):
            for j in range(n):
                k = self.table[i][j]
                left[j][k] = i
                right[i][k] = j
        object.__setattr__(self, "_left_solve", tuple(tuple(r) for r in left))
        object.__setattr__(self, "_right_solve", tuple(tuple(r) for r in right))
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(self.symbols)})

    @property
    def order(self) -> int:
        return len(self.symbols)

    def index(self, symbol: str) -> int:
        try:
            return self._index[symbol]  # type: ignore[attr-defined]
        except KeyError:
            raise UnknownSymbolError(symbol) from None

    def mul_i(self, i: int, j: int) -> int:
        return self.table[i][j]

    def mul(self, a: str, b: str) -> str:
        return self.symbols[self.table[self.index(a)][self.index(b)]]

    def left_solve_i(self, a: int, b: int) -> int:
        """Index ``x`` with ``x * a = b``."""
        return self._left_solve[a][b]  # type: ignore[attr-defined]

    def right_solve_i(self, a: int, b: int) -> int:
        """Index ``x`` with ``a * x = b``."""
        return self._right_solve[a][b]  # type: ignore[attr-defined]

    def product_set(self, left: Iterable[str], right: Iterable[str]) -> frozenset[str]:
        """Setwise product ``{a * b : a in left, b in right}``."""
        li = [self.index(a) for a in left]
        ri = [self.index(b) for b in right]
        return frozenset(self.symbols[self.table[i][j]] for i in li for j in ri)


def validate_latin_square(
    table: Sequence[Sequence[str]], alphabet: Sequence[str]
) -> FiniteQuasigroup:
    """Check a symbol-valued table and return the quasigroup it defines.

    The alphabet is sorted into canonical order and the table is permuted
    to match, so the result does not depend on the input ordering.
    Raises :class:`RowNotPermutationError`, :class:`ColumnNotPermutationError`
    or :class:`UnknownSymbolError` on bad input (rows are checked first).
    """
    alphabet = list(alphabet)
    if len(set(alphabet)) != len(alphabet):
        raise LatinSquareError("alphabet symbols must be distinct")
    if len(table) != len(alphabet) or any(len(r) != len(alphabet) for r in table):
        raise LatinSquareError("table must be square over the alphabet")
    symbols = tuple(sorted(alphabet))
    index = {s: i for i, s in enumerate(symbols)}
    order = [alphabet.index(s) for s in symbols]
    n = len(symbols)
    rows: list[tuple[int, ...]] = []
    for i in range(n):
        row = []
        for j in range(n):
            entry = table[order[i]][order[j]]
            if entry not in index:
                raise UnknownSymbolError(entry)
            row.append(index[entry])
        rows.append(tuple(row))
    full = frozenset(range(n))
    for i, row in enumerate(rows):
        if frozenset(row) != full:
            raise RowNotPermutationError(i)
    for j in range(n):
        if frozenset(row[j] for row in rows) != full:
            raise ColumnNotPermutationError(j)
    return FiniteQuasigroup(symbols, tuple(rows))


def from_operation(alphabet: Sequence[str], op: Callable[[str, str], str]) -> FiniteQuasigroup:
    """Build a quasigroup by tabulating ``op`` over the alphabet."""
    table = [[op(a, b) for b in alphabet] for a in alphabet]
    return validate_latin_square(table, alphabet)


def is_commutative(q: FiniteQuasigroup) -> bool:
    """True iff ``a * b == b * a`` for every pair."""
    t = q.table
    n = q.order
    return all(t[i][j] == t[j][i] for i in range(n) for j in range(i + 1, n))


def has_period_two(q: FiniteQuasigroup) -> bool:
    """True iff every left translation is an involution: ``a * (a * b) == b``."""
    t = q.table
    n = q.order
    return all(t[i][t[i][j]] == j for i in range(n) for j in range(n))


def is_medial(q: FiniteQuasigroup) -> bool:
    """True iff ``(a*b) * (c*d) == (a*c) * (b*d)`` for every quadruple."""
    t = q.table
    n = q.order
    rng = range(n)
    for a in rng:
        for b in rng:
            ab = t[a][b]
            for c in rng:
                ac = t[a][c]
                row_ab = t[ab]
                row_ac = t[ac]
                tb = t[b]
                tc = t[c]
                for d in rng:
                    if row_ab[tc[d]] != row_ac[tb[d]]:
                        return False
    return True


@dataclass(frozen=True)
class BasePoint:
    """A distinguished element together with its two inverse maps.

    ``left_inverse[a]`` is the unique ``x`` with ``x * a = element`` and
    ``right_inverse[a]`` the unique ``x`` with ``a * x = element``; both
    are stored as index tuples over the owning quasigroup's alphabet.
    """

    element: str
    left_inverse: tuple[int, ...]
    right_inverse: tuple[int, ...]

    def left_of(self, q: FiniteQuasigroup, a: str) -> str:
        return q.symbols[self.left_inverse[q.index(a)]]

    def right_of(self, q: FiniteQuasigroup, a: str) -> str:
        return q.symbols[self.right_inverse[q.index(a)]]


def base_point(q: FiniteQuasigroup, element: str | None = None) -> BasePoint:
    """Fix a base element (least symbol by default) and tabulate its inverses.

    The defining identities ``left(a) * a = e`` and ``a * right(a) = e``
    hold by construction; the exchange law ``right(left(a)) = a =
    left(right(a))`` is asserted, as is the coincidence of the two maps
    when the operation is commutative with period two.
    """
    if element is None:
        element = q.symbols[0]
    e = q.index(element)
    n = q.order
    left = tuple(q.left_solve_i(a, e) for a in range(n))
    right = tuple(q.right_solve_i(a, e) for a in range(n))
    for a in range(n):
        assert right[left[a]] == a and left[right[a]] == a
    if is_commutative(q) and has_period_two(q):
        assert left == right
    return BasePoint(element, left, right)


@dataclass(frozen=True)
class CosetPartition:
    """A partition of the alphabet whose blockwise products are blocks.

    Blocks are sorted tuples ordered by their least symbol, all of the
    same size.  ``block_index[i]`` gives the block of the ``i``-th
    alphabet symbol.
    """

    symbols: tuple[str, ...]
    blocks: tuple[tuple[str, ...], ...]
    block_index: tuple[int, ...]

    @property
    def block_count(self) -> int:
        return len(self.blocks)

    @property
    def block_size(self) -> int:
        return len(self.blocks[0])

    def block_of(self, symbol: str) -> int:
        return self.block_index[self.symbols.index(symbol)]

    def block_name(self, i: int) -> str:
        return f"[{self.blocks[i][0]}]"

    def names(self) -> tuple[str, ...]:
        return tuple(self.block_name(i) for i in range(len(self.blocks)))


def partition_from_blocks(
    q: FiniteQuasigroup, blocks: Iterable[Iterable[str]]
) -> CosetPartition:
    """Validate a family of blocks as a compatible partition.

    Raises :class:`NotAPartitionError` if the blocks fail to cover the
    alphabet disjointly, and :class:`NotCompatibleError` if some
    blockwise product is not exactly a block.  Equal block sizes are a
    consequence of cancellability and are asserted.
    """
    normal = sorted(tuple(sorted(set(b))) for b in blocks)
    if not normal or any(not b for b in normal):
        raise NotAPartitionError("blocks must be non-empty")
    seen: list[str] = [s for b in normal for s in b]
    if len(seen) != len(set(seen)) or set(seen) != set(q.symbols):
        raise NotAPartitionError("blocks do not partition the alphabet")
    block_sets = [frozenset(b) for b in normal]
    lookup = {b: i for i, b in enumerate(block_sets)}
    for i, bi in enumerate(block_sets):
        for j, bj in enumerate(block_sets):
            prod = q.product_set(bi, bj)
            if prod not in lookup:
                raise NotCompatibleError(
                    f"product of blocks {sorted(bi)} and {sorted(bj)} is not a block"
                )
    sizes = {len(b) for b in block_sets}
    assert len(sizes) == 1, "compatible partition with unequal block sizes"
    index = [0] * q.order
    for bi, block in enumerate(normal):
        for s in block:
            index[q.index(s)] = bi
    return CosetPartition(q.symbols, tuple(normal), tuple(index))


def coset_partition_from_block(q: FiniteQuasigroup, block: Iterable[str]) -> CosetPartition:
    """Partition the alphabet by the left translates ``g * block``.

    Succeeds iff the translates are pairwise disjoint-or-equal (else
    :class:`NotAPartitionError`) and the resulting partition is
    compatible with the operation (else :class:`NotCompatibleError`).
    """
    h = sorted(set(block))
    if not h:
        raise NotAPartitionError("block must be non-empty")
    for s in h:
        q.index(s)
    translates: list[frozenset[str]] = []
    for g in q.symbols:
        t = q.product_set([g], h)
        for prev in translates:
            if prev != t and prev & t:
                raise NotAPartitionError(
                    f"translates {sorted(prev)} and {sorted(t)} overlap"
                )
        if t not in translates:
            translates.append(t)
    return partition_from_blocks(q, translates)


def all_coset_partitions(q: FiniteQuasigroup) -> list[CosetPartition]:
    """Every compatible partition of the alphabet, in a deterministic order.

    Any compatible partition consists of the left translates of each of
    its blocks, so trying every subset that contains the least symbol is
    exhaustive.
    """
    n = q.order
    least = q.symbols[0]
    rest = q.symbols[1:]
    found: dict[tuple[tuple[str, ...], ...], CosetPartition] = {}
    for size in sorted(d for d in range(1, n + 1) if n % d == 0):
        for extra in _subsets(rest, size - 1):
            try:
                p = coset_partition_from_block(q, (least,) + extra)
            except PartitionError:
                continue
            found.setdefault(p.blocks, p)
    return [found[k] for k in sorted(found)]


def _subsets(items: Sequence[str], size: int):
    from itertools import combinations

    return combinations(items, size)


def quotient_quasigroup(q: FiniteQuasigroup, p: CosetPartition) -> FiniteQuasigroup:
    """The quasigroup induced on the blocks of a compatible partition.

    Blocks are named ``[least-member]``; the result is validated as a
    Latin square by construction.
    """
    names = p.names()
    block_sets = [frozenset(b) for b in p.blocks]
    lookup = {b: i for i, b in enumerate(block_sets)}
    table = []
    for bi in block_sets:
        row = []
        for bj in block_sets:
            row.append(names[lookup[q.product_set(bi, bj)]])
        table.append(row)
    return validate_latin_square(table, names)
