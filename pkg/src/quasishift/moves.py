"""Elementary isomorphisms of quasigroup shifts, and a bounded search over them.

Four moves, all anchored at a symbol ``a`` and a block ``h`` whose left
translates form a compatible partition of the alphabet into cosets:

* ``split_successors`` (``h`` inside the follower set of ``a``): symbols
  become pairs (symbol, coset of the next symbol); two-block forward
  code, one-block inverse.
* ``split_predecessors``: mirror image, pairing with the coset of the
  previous symbol.
* ``amalg_pred_common_succ_disjoint`` (``h`` inside a follower set, and
  no predecessor set meets ``h`` twice): symbols collapse to their
  cosets; one-block forward code, two-block inverse reading one symbol
  ahead.
* ``amalg_succ_common_pred_disjoint``: mirror image, inverse reading one
  symbol of memory.

Every move preserves validity of the pair and its exact entropy;
:func:`search_move_sequence` explores move sequences breadth-first to
connect two given shifts, testing isomorphism by exhaustive symbol
matching.  The search is sound but bounded: failure to find a sequence
within the depth proves nothing.
"""

from __future__ import annotations

from dataclasses import dataclass
from collections import deque

from .decomposition import verify_isomorphism
from .qgshift import QuasigroupShift, build
from .quasigroup import (
    CosetPartition,
    FiniteQuasigroup,
    NotAPartitionError,
    NotCompatibleError,
    coset_partition_from_block,
    from_operation,
    quotient_quasigroup,
)
from .shifts import (
    BlockCode,
    MarkovShift,
    entropy,
    pair_name,
    split_pair_name,
    uniform_follower_count,
)

MOVE_KINDS = (
    "split_successors",
    "split_predecessors",
    "amalg_pred_common_succ_disjoint",
    "amalg_succ_common_pred_disjoint",
)


class InvalidMoveError(ValueError):
    def __init__(self, reason: str, detail: str):
        self.reason = reason
        super().__init__(f"{reason}: {detail}")


class NotFoundWithinDepthError(Exception):
    """Inconclusive search outcome; not a proof of non-isomorphism."""

    def __init__(self, reason: str, depth: int):
        self.reason = reason
        self.depth = depth
        super().__init__(f"no move sequence found within depth {depth} ({reason})")


@dataclass(frozen=True)
class Move:
    kind: str
    anchor: str
    block: tuple[str, ...]

    def __post_init__(self):
        if self.kind not in MOVE_KINDS:
            raise ValueError(f"unknown move kind {self.kind!r}")
        object.__setattr__(self, "block", tuple(sorted(self.block)))


@dataclass(frozen=True)
class MoveResult:
    move: Move
    target: QuasigroupShift
    forward: BlockCode
    backward: BlockCode
    cosets: CosetPartition


def _cosets_for_move(qs: QuasigroupShift, move: Move) -> CosetPartition:
    if move.kind in ("split_successors", "amalg_pred_common_succ_disjoint"):
        anchor_set = qs.follower(move.anchor)
        set_name = "follower"
    else:
        anchor_set = qs.predecessor(move.anchor)
        set_name = "predecessor"
    block = set(move.block)
    if not block or not block <= anchor_set:
        raise InvalidMoveError(
            "block_not_in_follower_set",
            f"block {sorted(block)} is not inside the {set_name} set of {move.anchor!r}",
        )
    try:
        return coset_partition_from_block(qs.op, block)
    except (NotAPartitionError, NotCompatibleError) as exc:
        raise InvalidMoveError("not_a_partition", str(exc)) from None


def _coset_products(op: FiniteQuasigroup, p: CosetPartition) -> dict[tuple[int, int], int]:
    sets = [frozenset(b) for b in p.blocks]
    lookup = {b: i for i, b in enumerate(sets)}
    return {
        (i, j): lookup[op.product_set(bi, bj)]
        for i, bi in enumerate(sets)
        for j, bj in enumerate(sets)
    }


def apply_move(qs: QuasigroupShift, move: Move, verify_len: int = 8) -> MoveResult:
    """Apply an elementary isomorphism and return the new pair with both codes.

    The result is validated as a compatible pair, and (unless
    ``verify_len`` is zero) the code pair is brute-force verified as an
    isomorphism on all words up to that length.
    """
    p = _cosets_for_move(qs, move)
    if move.kind == "split_successors":
        result = _split(qs, p, by_successors=True)
    elif move.kind == "split_predecessors":
        result = _split(qs, p, by_successors=False)
    elif move.kind == "amalg_pred_common_succ_disjoint":
        result = _amalgamate(qs, p, move, successors_disjoint=True)
    else:
        result = _amalgamate(qs, p, move, successors_disjoint=False)
    target, forward, backward = result
    if verify_len:
        verify_isomorphism(
            forward, backward, qs.shift, target.shift, verify_len,
            source_op=qs.op, target_op=target.op,
        )
    return MoveResult(move, target, forward, backward, p)


def _split(
    qs: QuasigroupShift, p: CosetPartition, by_successors: bool
) -> tuple[QuasigroupShift, BlockCode, BlockCode]:
    op = qs.op
    names = p.names()
    coset_sets = [frozenset(b) for b in p.blocks]
    pairs = []
    for g in qs.symbols:
        ref = qs.follower(g) if by_successors else qs.predecessor(g)
        for i, c in enumerate(coset_sets):
            if c <= ref:
                pairs.append((g, i))
    pair_syms = sorted(pair_name(g, names[i]) for g, i in pairs)
    decode = {s: (split_pair_name(s)[0], names.index(split_pair_name(s)[1])) for s in pair_syms}

    def allowed(u: str, v: str) -> bool:
        (g, ci), (g2, ci2) = decode[u], decode[v]
        if by_successors:
            return g2 in coset_sets[ci]
        return g in coset_sets[ci2]

    matrix = tuple(
        tuple(1 if allowed(u, v) else 0 for v in pair_syms) for u in pair_syms
    )
    shift = MarkovShift(tuple(pair_syms), matrix)
    prods = _coset_products(op, p)

    def pair_op(u: str, v: str) -> str:
        (g, ci), (g2, ci2) = decode[u], decode[v]
        out = pair_name(op.mul(g, g2), names[prods[(ci, ci2)]])
        assert out in decode, "coset product escaped the pair alphabet"
        return out

    target_op = from_operation(pair_syms, pair_op)
    target = build(shift, target_op)

    coset_of = {s: p.block_of(s) for s in qs.symbols}
    if by_successors:
        fwd_rule = {
            (g, h): pair_name(g, names[coset_of[h]])
            for g in qs.symbols
            for h in qs.follower(g)
        }
        forward = BlockCode(qs.symbols, tuple(pair_syms), 0, 1, fwd_rule)
    else:
        fwd_rule = {
            (h, g): pair_name(g, names[coset_of[h]])
            for g in qs.symbols
            for h in qs.predecessor(g)
        }
        forward = BlockCode(qs.symbols, tuple(pair_syms), 1, 0, fwd_rule)
    backward = BlockCode(
        tuple(pair_syms), qs.symbols, 0, 0, {(s,): decode[s][0] for s in pair_syms}
    )
    return target, forward, backward


def _amalgamate(
    qs: QuasigroupShift, p: CosetPartition, move: Move, successors_disjoint: bool
) -> tuple[QuasigroupShift, BlockCode, BlockCode]:
    op = qs.op
    block = set(move.block)
    for x in qs.symbols:
        side = qs.predecessor(x) if successors_disjoint else qs.follower(x)
        if len(block & side) > 1:
            side_name = "predecessor" if successors_disjoint else "follower"
            raise InvalidMoveError(
                "predecessor_overlap",
                f"{side_name} set of {x!r} meets the block more than once",
            )
    names = p.names()
    coset_sets = [frozenset(b) for b in p.blocks]

    def trans(i: int, j: int) -> bool:
        if successors_disjoint:
            return any(coset_sets[j] <= qs.follower(s) for s in coset_sets[i])
        return any(coset_sets[i] <= qs.predecessor(s) for s in coset_sets[j])

    k = len(names)
    order = sorted(range(k), key=lambda i: names[i])
    matrix = tuple(
        tuple(1 if trans(order[i], order[j]) else 0 for j in range(k)) for i in range(k)
    )
    shift = MarkovShift(tuple(names[i] for i in order), matrix)
    target = build(shift, quotient_quasigroup(op, p))

    fwd_rule = {(g,): names[p.block_of(g)] for g in qs.symbols}
    forward = BlockCode(qs.symbols, shift.symbols, 0, 0, fwd_rule)
    bwd_rule: dict[tuple[str, ...], str] = {}
    for i in range(k):
        for j in range(k):
            if not trans(i, j):
                continue
            if successors_disjoint:
                members = [s for s in sorted(coset_sets[i]) if coset_sets[j] <= qs.follower(s)]
            else:
                members = [s for s in sorted(coset_sets[j]) if coset_sets[i] <= qs.predecessor(s)]
            assert len(members) == 1, "overlap condition must force a unique preimage"
            bwd_rule[(names[i], names[j])] = members[0]
    if successors_disjoint:
        backward = BlockCode(shift.symbols, qs.symbols, 0, 1, bwd_rule)
    else:
        backward = BlockCode(shift.symbols, qs.symbols, 1, 0, bwd_rule)
    return target, forward, backward


def round_trip_check(qs: QuasigroupShift, move: Move, max_len: int = 8) -> dict:
    """Apply a move and report that both code round trips are the identity."""
    res = apply_move(qs, move, verify_len=0)
    report = verify_isomorphism(
        res.forward, res.backward, qs.shift, res.target.shift, max_len,
        source_op=qs.op, target_op=res.target.op,
    )
    return {
        "move": {"kind": move.kind, "anchor": move.anchor, "block": list(move.block)},
        "verified_lengths": sorted(report["lengths"]),
        "target_alphabet": list(res.target.symbols),
    }


def enumerate_moves(qs: QuasigroupShift) -> list[Move]:
    """All valid moves, in the deterministic search order."""
    from itertools import combinations

    out = []
    for kind in MOVE_KINDS:
        for anchor in qs.symbols:
            base = (
                qs.follower(anchor)
                if kind in ("split_successors", "amalg_pred_common_succ_disjoint")
                else qs.predecessor(anchor)
            )
            members = sorted(base)
            for size in range(1, len(members) + 1):
                for block in combinations(members, size):
                    move = Move(kind, anchor, block)
                    try:
                        _validate_only(qs, move)
                    except InvalidMoveError:
                        continue
                    out.append(move)
    return out


def _validate_only(qs: QuasigroupShift, move: Move) -> None:
    p = _cosets_for_move(qs, move)
    if move.kind.startswith("amalg"):
        block = set(move.block)
        for x in qs.symbols:
            side = (
                qs.predecessor(x)
                if move.kind == "amalg_pred_common_succ_disjoint"
                else qs.follower(x)
            )
            if len(block & side) > 1:
                raise InvalidMoveError("predecessor_overlap", "overlapping block")
    del p


def find_isomorphism(a: QuasigroupShift, b: QuasigroupShift) -> dict[str, str] | None:
    """A symbol bijection matching transitions and operation tables, or None.

    Backtracking over symbol assignments; at the alphabet sizes reached
    by bounded searches this is effectively instant.
    """
    n = len(a.symbols)
    if n != len(b.symbols):
        return None
    if sorted(len(a.follower(s)) for s in a.symbols) != sorted(
        len(b.follower(s)) for s in b.symbols
    ):
        return None
    ta, tb = a.shift.transitions, b.shift.transitions
    oa, ob = a.op.table, b.op.table
    assign: list[int | None] = [None] * n
    used = [False] * n

    def consistent(i: int, j: int) -> bool:
        for i2 in range(n):
            j2 = assign[i2]
            if j2 is None:
                continue
            if ta[i][i2] != tb[j][j2] or ta[i2][i] != tb[j2][j]:
                return False
        return True

    def feasible_products(i: int) -> bool:
        # Products of assigned symbols must map consistently.
        for i1 in range(n):
            j1 = assign[i1]
            if j1 is None:
                continue
            for i2 in range(n):
                j2 = assign[i2]
                if j2 is None:
                    continue
                pa, pb = oa[i1][i2], ob[j1][j2]
                img = assign[pa]
                if img is not None and img != pb:
                    return False
                if img is None and used[pb]:
                    return False
        return True

    def backtrack(i: int) -> bool:
        if i == n:
            return True
        for j in range(n):
            if used[j]:
                continue
            if ta[i][i] != tb[j][j] or oa[i][i] != ob[j][j]:
                continue
            assign[i] = j
            used[j] = True
            if consistent(i, j) and feasible_products(i) and backtrack(i + 1):
                return True
            assign[i] = None
            used[j] = False
        return False

    if backtrack(0):
        return {a.symbols[i]: b.symbols[assign[i]] for i in range(n)}  # type: ignore[index]
    return None


def search_move_sequence(
    a: QuasigroupShift,
    b: QuasigroupShift,
    max_depth: int,
    max_alphabet: int | None = None,
    verify_len: int = 0,
) -> list[Move]:
    """Breadth-first search for a move sequence turning ``a`` into ``b``.

    Candidates are expanded in a fixed order (move kind, then anchor,
    then block), so the result is the shortest sequence with
    deterministic tie-breaking.  Entropy is compared first: a mismatch
    short-circuits, since every move preserves it exactly.  Raises
    :class:`NotFoundWithinDepthError` when the bounded search is
    exhausted; that outcome is inconclusive.
    """
    if max_alphabet is None:
        max_alphabet = 2 * max(len(a.symbols), len(b.symbols))
    ka, kb = uniform_follower_count(a.shift), uniform_follower_count(b.shift)
    if ka != kb or abs(entropy(a.shift) - entropy(b.shift)) > 1e-9:
        raise NotFoundWithinDepthError("entropy_mismatch", 0)
    frontier: deque[tuple[QuasigroupShift, list[Move]]] = deque([(a, [])])
    visited: list[QuasigroupShift] = [a]
    while frontier:
        current, path = frontier.popleft()
        if find_isomorphism(current, b) is not None:
            return path
        if len(path) >= max_depth:
            continue
        for move in enumerate_moves(current):
            try:
                res = apply_move(current, move, verify_len=verify_len)
            except InvalidMoveError:
                continue
            child = res.target
            if len(child.symbols) > max_alphabet:
                continue
            if any(find_isomorphism(child, seen) is not None for seen in visited):
                continue
            visited.append(child)
            frontier.append((child, path + [move]))
    raise NotFoundWithinDepthError("depth_exhausted", max_depth)
