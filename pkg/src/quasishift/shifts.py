"""Markov shifts, finite-type presentations, words and sliding block codes.

A shift space here is always handled through its language: the finite
words it allows.  A :class:`MarkovShift` is given by a 0/1 transition
matrix with no null rows or columns; an :class:`SftPresentation` by a
finite list of forbidden words and is normalized to a Markov shift via
the higher-block construction when needed.  Bi-infinite sequences are
never materialized.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import log
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import _kernels


class EmptyShiftError(ValueError):
    """No bi-infinite sequence survives the constraints."""


class WordNotAllowedError(ValueError):
    def __init__(self, word: Sequence[str]):
        self.word = tuple(word)
        super().__init__(f"word {''.join(self.word)!r} is not allowed")


class AlphabetMismatchError(ValueError):
    pass


class CodeDomainError(LookupError):
    """A block code was applied to a window outside its rule's domain."""


@dataclass(frozen=True)
class MarkovShift:
    """Shift of all bi-infinite walks on a finite directed graph.

    ``transitions[i][j] == 1`` allows ``symbols[j]`` directly after
    ``symbols[i]``.  Every symbol must have at least one follower and one
    predecessor; use :func:`pruned_markov_shift` to normalize raw input.
    """

    symbols: tuple[str, ...]
    transitions: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        n = len(self.symbols)
        if n < 1:
            raise EmptyShiftError("empty alphabet")
        if list(self.symbols) != sorted(self.symbols) or len(set(self.symbols)) != n:
            raise ValueError("alphabet must be distinct and canonically sorted")
        if len(self.transitions) != n or any(len(r) != n for r in self.transitions):
            raise ValueError("transition matrix shape does not match alphabet")
        if any(x not in (0, 1) for r in self.transitions for x in r):
            raise ValueError("transition entries must be 0 or 1")
        for i in range(n):
            if not any(self.transitions[i]):
                raise ValueError(f"symbol {self.symbols[i]!r} has no follower; prune first")
            if not any(r[i] for r in self.transitions):
                raise ValueError(f"symbol {self.symbols[i]!r} has no predecessor; prune first")
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(self.symbols)})

    @property
    def order(self) -> int:
        return len(self.symbols)

    def index(self, symbol: str) -> int:
        try:
            return self._index[symbol]  # type: ignore[attr-defined]
        except KeyError:
            raise WordNotAllowedError((symbol,)) from None

    def matrix(self) -> np.ndarray:
        return np.array(self.transitions, dtype=np.uint8)

    def follower_indices(self, i: int) -> tuple[int, ...]:
        return tuple(j for j, x in enumerate(self.transitions[i]) if x)

    def predecessor_indices(self, i: int) -> tuple[int, ...]:
        return tuple(j for j, r in enumerate(self.transitions) if r[i])

    def allows(self, word: Sequence[str]) -> bool:
        idx = [self.index(s) if s in self._index else -1 for s in word]  # type: ignore[attr-defined]
        if -1 in idx or not idx:
            return False
        return all(self.transitions[a][b] for a, b in zip(idx, idx[1:]))


def pruned_markov_shift(
    alphabet: Sequence[str], transitions: Sequence[Sequence[int]]
) -> tuple[MarkovShift, tuple[str, ...]]:
    """Drop symbols with no followers or no predecessors until stable.

    Returns the normalized shift and the removed symbols (pruning is
    reported, never silent).  Raises :class:`EmptyShiftError` if nothing
    survives.
    """
    order = sorted(range(len(alphabet)), key=lambda i: alphabet[i])
    syms = [alphabet[i] for i in order]
    if len(set(syms)) != len(syms):
        raise ValueError("alphabet symbols must be distinct")
    mat = [[int(transitions[i][j]) for j in order] for i in order]
    alive = list(range(len(syms)))
    removed: list[str] = []
    changed = True
    while changed:
        changed = False
        for i in list(alive):
            row = any(mat[i][j] for j in alive)
            col = any(mat[j][i] for j in alive)
            if not (row and col):
                alive.remove(i)
                removed.append(syms[i])
                changed = True
    if not alive:
        raise EmptyShiftError("every symbol was pruned")
    shift = MarkovShift(
        tuple(syms[i] for i in alive),
        tuple(tuple(mat[i][j] for j in alive) for i in alive),
    )
    return shift, tuple(sorted(removed))


@dataclass(frozen=True)
class SftPresentation:
    """Shift of finite type given by finitely many forbidden words.

    Each forbidden word has length at least two (a forbidden symbol is
    just a smaller alphabet).  Construction checks the shift is
    non-empty by building its Markov normalization.
    """

    symbols: tuple[str, ...]
    forbidden: tuple[tuple[str, ...], ...]

    def __post_init__(self):
        if list(self.symbols) != sorted(self.symbols) or len(set(self.symbols)) != len(self.symbols):
            raise ValueError("alphabet must be distinct and canonically sorted")
        for w in self.forbidden:
            if len(w) < 2:
                raise ValueError("forbidden words must have length >= 2")
            for s in w:
                if s not in self.symbols:
                    raise ValueError(f"forbidden word uses unknown symbol {s!r}")
        to_markov(self)  # raises EmptyShiftError when nothing survives

    @property
    def order(self) -> int:
        return len(self.symbols)

    def max_forbidden_length(self) -> int:
        return max((len(w) for w in self.forbidden), default=2)

    def allows(self, word: Sequence[str]) -> bool:
        word = tuple(word)
        if any(s not in self.symbols for s in word):
            return False
        for f in self.forbidden:
            k = len(f)
            for i in range(len(word) - k + 1):
                if word[i : i + k] == f:
                    return False
        return True


Shift = MarkovShift | SftPresentation


def word_array(shift: MarkovShift, length: int) -> np.ndarray:
    """Allowed words as an ``(count, length)`` int8 index array, lex order."""
    return _kernels.enumerate_words(shift.matrix(), length)


def words(shift: Shift, length: int) -> list[tuple[str, ...]]:
    """All allowed words of the given length, lexicographically ordered."""
    if length < 1:
        raise ValueError("word length must be >= 1")
    if isinstance(shift, MarkovShift):
        arr = word_array(shift, length)
        syms = shift.symbols
        return [tuple(syms[i] for i in row) for row in arr]
    out: list[tuple[str, ...]] = []

    # Depth-first in symbol order keeps the output lexicographic.
    def extend(prefix: tuple[str, ...]):
        if len(prefix) == length:
            out.append(prefix)
            return
        for s in shift.symbols:
            cand = prefix + (s,)
            if _sft_suffix_ok(shift, cand):
                extend(cand)

    extend(())
    if not out:
        raise EmptyShiftError("no allowed words at this length")
    return out


def _sft_suffix_ok(shift: SftPresentation, word: tuple[str, ...]) -> bool:
    for f in shift.forbidden:
        k = len(f)
        if len(word) >= k and word[-k:] == f:
            return False
    return True


def word_count(shift: Shift, length: int) -> int:
    """Number of allowed words, computed with exact integer arithmetic."""
    if isinstance(shift, SftPresentation):
        return len(words(shift, length))
    vec = [1] * shift.order
    for _ in range(length - 1):
        vec = [
            sum(vec[j] for j in shift.follower_indices(i))
            for i in range(shift.order)
        ]
    return sum(vec)


def follower_set(shift: Shift, word: Sequence[str]) -> tuple[str, ...]:
    """Symbols that may directly follow the word. Raises if the word is not allowed."""
    word = tuple(word)
    if not shift.allows(word):
        raise WordNotAllowedError(word)
    if isinstance(shift, MarkovShift):
        last = shift.index(word[-1])
        return tuple(shift.symbols[j] for j in shift.follower_indices(last))
    return tuple(s for s in shift.symbols if shift.allows(word + (s,)))


def predecessor_set(shift: Shift, word: Sequence[str]) -> tuple[str, ...]:
    """Symbols that may directly precede the word."""
    word = tuple(word)
    if not shift.allows(word):
        raise WordNotAllowedError(word)
    if isinstance(shift, MarkovShift):
        first = shift.index(word[0])
        return tuple(shift.symbols[j] for j in shift.predecessor_indices(first))
    return tuple(s for s in shift.symbols if shift.allows((s,) + word))


def sft_step(shift: Shift) -> int:
    """Smallest ``N`` such that follower sets depend only on the last ``N + 1`` symbols.

    A Markov shift is 1-step, so ``N = 0``.  For a forbidden-word
    presentation with longest word ``m``, follower sets of words of
    length ``>= m - 1`` are determined by their last ``m - 1`` symbols,
    so checking candidate values of ``N`` against all word lengths up to
    ``m`` is exhaustive.
    """
    if isinstance(shift, MarkovShift):
        return 0
    m = shift.max_forbidden_length()
    for candidate in range(0, m - 1):
        if _follower_sets_stable(shift, candidate, m):
            return candidate
    raise AssertionError("follower sets failed to stabilize below the forbidden length")


def _follower_sets_stable(shift: SftPresentation, n_hist: int, max_len: int) -> bool:
    for length in range(n_hist + 2, max_len + 1):
        for w in words(shift, length):
            if follower_set(shift, w) != follower_set(shift, w[-(n_hist + 1) :]):
                return False
    return True


@dataclass(frozen=True)
class BlockCode:
    """A sliding map given by a local rule on windows.

    The rule reads ``memory`` symbols of the past and ``anticipation``
    symbols of the future, so its window width is ``memory +
    anticipation + 1``.  Applied to a finite word of length ``L`` it
    produces the ``L - memory - anticipation`` symbols whose full window
    lies inside the word.
    """

    source: tuple[str, ...]
    target: tuple[str, ...]
    memory: int
    anticipation: int
    rule: Mapping[tuple[str, ...], str]

    @property
    def width(self) -> int:
        return self.memory + self.anticipation + 1

    def apply(self, word: Sequence[str]) -> tuple[str, ...]:
        word = tuple(word)
        w = self.width
        if len(word) < w:
            raise ValueError("word shorter than the code window")
        out = []
        for j in range(len(word) - w + 1):
            window = word[j : j + w]
            try:
                out.append(self.rule[window])
            except KeyError:
                raise CodeDomainError(f"rule not defined on window {window!r}") from None
        return tuple(out)


def identity_code(symbols: Sequence[str]) -> BlockCode:
    syms = tuple(symbols)
    return BlockCode(syms, syms, 0, 0, {(s,): s for s in syms})


def compose_codes(first: BlockCode, then: BlockCode, source_shift: Shift | None = None) -> BlockCode:
    """The sliding map "apply ``first``, then ``then``" as a single code.

    Memory and anticipation add.  The composite rule is tabulated over
    the allowed windows of ``source_shift`` when given, otherwise over
    every window on which ``first`` is defined.
    """
    if first.target != then.source:
        raise AlphabetMismatchError(
            "target alphabet of the first code must match the source of the second"
        )
    memory = first.memory + then.memory
    anticipation = first.anticipation + then.anticipation
    width = memory + anticipation + 1
    if source_shift is not None:
        domain = words(source_shift, width)
    else:
        domain = _rule_windows(first, width)
    rule: dict[tuple[str, ...], str] = {}
    for window in domain:
        try:
            mid = first.apply(window)
            rule[tuple(window)] = then.rule[mid]
        except (CodeDomainError, KeyError):
            continue
    return BlockCode(first.source, then.target, memory, anticipation, rule)


def _rule_windows(code: BlockCode, width: int) -> list[tuple[str, ...]]:
    from itertools import product

    out = []
    for combo in product(code.source, repeat=width):
        ok = all(combo[j : j + code.width] in code.rule for j in range(width - code.width + 1))
        if ok:
            out.append(combo)
    return out


def higher_block_presentation(
    shift: Shift, k: int
) -> tuple[MarkovShift, BlockCode, BlockCode]:
    """Re-present the shift on the alphabet of its allowed ``k``-words.

    Transitions are ``(k-1)``-overlaps whose union is still allowed.
    Returns the new shift with the forward code (width ``k``, reading the
    word starting at each position) and its one-block inverse.  Requires
    ``k >= sft_step(shift) + 1`` so that the re-presentation is faithful.
    """
    if k < 1:
        raise ValueError("block length must be >= 1")
    if k < sft_step(shift) + 1:
        raise ValueError("block length below the step of the shift")
    kwords = words(shift, k)
    sep = "" if _joining_unambiguous(kwords) else "."
    names = {w: sep.join(w) for w in kwords}
    trans: dict[tuple[str, ...], set[tuple[str, ...]]] = {w: set() for w in kwords}
    for u in kwords:
        for v in kwords:
            if u[1:] == v[:-1] and shift.allows(u + v[-1:]):
                trans[u].add(v)
    # Words that cannot continue for ever in both directions are dropped.
    alive = set(kwords)
    changed = True
    while changed:
        changed = False
        backward: dict[tuple[str, ...], set[tuple[str, ...]]] = {w: set() for w in alive}
        for u in alive:
            for v in trans[u]:
                if v in alive:
                    backward[v].add(u)
        for w in list(alive):
            if not (trans[w] & alive) or not backward[w]:
                alive.remove(w)
                changed = True
    if not alive:
        raise EmptyShiftError("no bi-infinite sequence survives")
    kept = sorted(alive, key=lambda w: names[w])
    kept_names = tuple(names[w] for w in kept)
    matrix = tuple(
        tuple(1 if v in trans[u] and v in alive else 0 for v in kept) for u in kept
    )
    block = MarkovShift(kept_names, matrix)
    fwd = BlockCode(
        tuple(shift.symbols), kept_names, 0, k - 1, {w: names[w] for w in kept}
    )
    bwd = BlockCode(
        kept_names, tuple(shift.symbols), 0, 0, {(names[w],): w[0] for w in kept}
    )
    return block, fwd, bwd


def _joining_unambiguous(all_words: Iterable[tuple[str, ...]]) -> bool:
    # Plain concatenation is ambiguous for multi-character symbols; callers
    # switch to a dotted separator when two distinct words would collide.
    seen: set[str] = set()
    for w in all_words:
        j = "".join(w)
        if j in seen:
            return False
        seen.add(j)
    return True


@dataclass(frozen=True)
class NormalizedShift:
    shift: MarkovShift
    forward: BlockCode
    backward: BlockCode
    pruned: tuple[str, ...]


def to_markov(sft: SftPresentation) -> NormalizedShift:
    """Markov normalization of a forbidden-word presentation.

    Uses the ``(N+1)``-block alphabet where ``N`` is the step; symbols
    pruned for lack of bi-infinite continuations are reported in the
    result, not silently dropped.
    """
    k = _sft_step_unchecked(sft) + 1
    shift, fwd, bwd = higher_block_presentation(sft, k)
    used = {w[0] for w in fwd.rule}
    pruned = tuple(s for s in sft.symbols if s not in used)
    return NormalizedShift(shift, fwd, bwd, pruned)


def _sft_step_unchecked(sft: SftPresentation) -> int:
    m = sft.max_forbidden_length()
    for candidate in range(0, m - 1):
        if _follower_sets_stable(sft, candidate, m):
            return candidate
    return m - 2


def is_irreducible(shift: MarkovShift) -> bool:
    """True iff iterated follower sets of some symbol reach the whole alphabet.

    Starting from ``{a}``, repeatedly replace the set by the union of its
    follower sets; the sequence is eventually periodic, so repetition
    detection terminates the search.
    """
    n = shift.order
    full = frozenset(range(n))
    followers = [frozenset(shift.follower_indices(i)) for i in range(n)]
    for a in range(n):
        current = frozenset([a])
        seen = set()
        while current not in seen:
            if current == full:
                return True
            seen.add(current)
            current = frozenset().union(*(followers[i] for i in current))
        if current == full:
            return True
    return False


def uniform_follower_count(shift: MarkovShift) -> int | None:
    """The common follower-set size when all agree, else ``None``.

    When every symbol has exactly ``k`` followers the topological entropy
    is exactly ``log k``.
    """
    sizes = {len(shift.follower_indices(i)) for i in range(shift.order)}
    if len(sizes) == 1:
        return sizes.pop()
    return None


def entropy(shift: MarkovShift, tol: float = 1e-10, max_iter: int = 100_000) -> float:
    """Topological entropy in nats: log of the spectral radius of the matrix.

    Power iteration on ``A + I`` (same eigenvectors, spectrum shifted by
    one, and the positive diagonal removes periodicity) with a relative
    tolerance on successive growth estimates.
    """
    a = shift.matrix().astype(np.float64)
    n = shift.order
    x = np.full(n, 1.0 / np.sqrt(n))
    prev = None
    est = 1.0
    for _ in range(max_iter):
        y = a @ x + x
        norm = float(np.linalg.norm(y))
        est = norm
        x = y / norm
        if prev is not None and abs(est - prev) <= tol * max(1.0, abs(est)):
            break
        prev = est
    return log(est - 1.0)


def full_shift(symbols: Sequence[str]) -> MarkovShift:
    syms = tuple(sorted(symbols))
    row = tuple(1 for _ in syms)
    return MarkovShift(syms, tuple(row for _ in syms))


def pair_name(a: str, b: str) -> str:
    return f"({a},{b})"


def split_pair_name(name: str) -> tuple[str, str]:
    if not (name.startswith("(") and name.endswith(")")):
        raise ValueError(f"not a pair symbol: {name!r}")
    left, _, right = name[1:-1].partition(",")
    return left, right


def product_shift(a: MarkovShift, b: MarkovShift) -> MarkovShift:
    """Markov shift on pair symbols with componentwise transitions."""
    names = sorted(pair_name(x, y) for x in a.symbols for y in b.symbols)
    lookup = {n: split_pair_name(n) for n in names}
    matrix = []
    for u in names:
        ux, uy = lookup[u]
        row = []
        for v in names:
            vx, vy = lookup[v]
            row.append(
                1
                if a.transitions[a.index(ux)][a.index(vx)]
                and b.transitions[b.index(uy)][b.index(vy)]
                else 0
            )
        matrix.append(tuple(row))
    return MarkovShift(tuple(names), tuple(matrix))
