"""Factoring a quasigroup shift into a finite part times a full shift.

The pipeline alternates two reductions until the shift is deterministic:

1. while cells have more than one element, split off the full shift on
   the base cell and continue on the cell factor (whose cells are then
   singletons);
2. while some symbol has more than one follower, quotient onto the
   follower-class shift, which is invertible by a memory-one code thanks
   to the singleton cells.

Each step strictly shrinks the alphabet, so the loop terminates at a
shift whose symbols have exactly one follower and one predecessor: a
finite union of periodic orbits, closed under the operation.  The
composed forward code stays one-block; the composed inverse accumulates
one symbol of memory per follower-class quotient and no anticipation.
All of it is re-verified on finite words by :func:`verify_isomorphism`.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import log

import numpy as np

from . import _kernels
from .blockops import BlockOperationRule
from .qgshift import (
    QuasigroupShift,
    Section,
    follower_shift,
    follower_shift_inverse,
    induced_partitions,
    split_by_cells,
)
from .quasigroup import FiniteQuasigroup
from .shifts import (
    BlockCode,
    MarkovShift,
    compose_codes,
    entropy,
    full_shift,
    is_irreducible,
    pair_name,
    product_shift,
    split_pair_name,
    uniform_follower_count,
    word_array,
    words,
)

_DIGIT_SEP = "|"
_EMPTY_DIGIT = "-"


class VerificationFailedError(AssertionError):
    def __init__(self, witness: dict):
        self.witness = witness
        super().__init__(f"word-level verification failed: {witness}")


class NotIrreducibleError(ValueError):
    pass


@dataclass(frozen=True)
class DecompositionStep:
    kind: str  # "cell_split" or "follower_quotient"
    alphabet_before: int
    alphabet_after: int
    detail: int  # split: size of the base cell; quotient: follower-set size


@dataclass(frozen=True)
class Decomposition:
    source: QuasigroupShift
    finite_factor: QuasigroupShift
    orbits: tuple[tuple[str, ...], ...]
    digit_symbols: tuple[str, ...]
    product: MarkovShift
    forward: BlockCode
    backward: BlockCode
    product_rule: BlockOperationRule
    steps: tuple[DecompositionStep, ...]

    @property
    def full_exponent(self) -> int:
        return len(self.digit_symbols)


def _merge_digit(offset: str, digit: str) -> str:
    return offset if digit == _EMPTY_DIGIT else offset + _DIGIT_SEP + digit


def _split_digit(digit: str) -> tuple[str, str]:
    if _DIGIT_SEP in digit:
        head, rest = digit.split(_DIGIT_SEP, 1)
        return head, rest
    return digit, _EMPTY_DIGIT


def decompose(qs: QuasigroupShift, verify_len: int = 8, section: Section | None = None) -> Decomposition:
    """Run the full reduction and verify the resulting isomorphism.

    ``section`` overrides the representative choice for the first cell
    split only; it does not change the exponent of the full-shift factor
    or the size of the finite factor.  ``verify_len`` bounds the
    word-level checks (all allowed words up to that length).
    """
    cur = qs
    digits: tuple[str, ...] = (_EMPTY_DIGIT,)
    prod = product_shift(cur.shift, full_shift(digits))
    forward = BlockCode(
        qs.symbols, prod.symbols, 0, 0,
        {(a,): pair_name(a, _EMPTY_DIGIT) for a in qs.symbols},
    )
    backward = BlockCode(
        prod.symbols, qs.symbols, 0, 0,
        {(pair_name(a, _EMPTY_DIGIT),): a for a in qs.symbols},
    )
    steps: list[DecompositionStep] = []
    first = True
    while True:
        parts = induced_partitions(cur)
        if steps and steps[-1].kind == "cell_split":
            assert parts.cell_size == 1, "cell split must leave singleton cells"
        if parts.cell_size > 1:
            sp = split_by_cells(cur, parts, section if first else None)
            new_digits = tuple(
                sorted(_merge_digit(off, d) for off in sp.offsets for d in digits)
            )
            new_prod = product_shift(sp.cell_factor.shift, full_shift(new_digits))
            phi = {a: split_pair_name(sp.forward.rule[(a,)]) for a in cur.symbols}
            step_fwd_rule = {}
            step_bwd_rule = {}
            for a in cur.symbols:
                cell_name, off = phi[a]
                for d in digits:
                    u = pair_name(a, d)
                    v = pair_name(cell_name, _merge_digit(off, d))
                    step_fwd_rule[(u,)] = v
                    step_bwd_rule[(v,)] = u
            step_fwd = BlockCode(prod.symbols, new_prod.symbols, 0, 0, step_fwd_rule)
            step_bwd = BlockCode(new_prod.symbols, prod.symbols, 0, 0, step_bwd_rule)
            forward = compose_codes(forward, step_fwd, qs.shift)
            backward = compose_codes(step_bwd, backward, new_prod)
            steps.append(
                DecompositionStep(
                    "cell_split", len(cur.symbols), len(sp.cell_factor.symbols), len(sp.offsets)
                )
            )
            cur, digits, prod = sp.cell_factor, new_digits, new_prod
            first = False
            continue
        k = uniform_follower_count(cur.shift)
        assert k is not None
        if k == 1:
            break
        target, theta = follower_shift(cur, parts)
        theta_inv = follower_shift_inverse(cur, parts)
        assert len(cur.symbols) % len(target.symbols) == 0
        new_prod = product_shift(target.shift, full_shift(digits))
        step_fwd_rule = {}
        for a in cur.symbols:
            for d in digits:
                step_fwd_rule[(pair_name(a, d),)] = pair_name(theta.rule[(a,)], d)
        step_bwd_rule = {}
        for (c0, c1), g in theta_inv.rule.items():
            for d0 in digits:
                for d1 in digits:
                    step_bwd_rule[(pair_name(c0, d0), pair_name(c1, d1))] = pair_name(g, d1)
        step_fwd = BlockCode(prod.symbols, new_prod.symbols, 0, 0, step_fwd_rule)
        step_bwd = BlockCode(new_prod.symbols, prod.symbols, 1, 0, step_bwd_rule)
        forward = compose_codes(forward, step_fwd, qs.shift)
        backward = compose_codes(step_bwd, backward, new_prod)
        steps.append(
            DecompositionStep("follower_quotient", len(cur.symbols), len(target.symbols), k)
        )
        cur, prod = target, new_prod
        first = False

    orbits = _orbits(cur.shift)
    n = len(digits)
    k0 = uniform_follower_count(qs.shift)
    assert k0 == n, "follower-set size must equal the full-shift exponent"
    assert abs(entropy(qs.shift) - log(n)) <= 1e-9
    product_rule = _transported_rule(qs, prod, forward, backward)
    dec = Decomposition(
        source=qs,
        finite_factor=cur,
        orbits=orbits,
        digit_symbols=digits,
        product=prod,
        forward=forward,
        backward=backward,
        product_rule=product_rule,
        steps=tuple(steps),
    )
    verify_isomorphism(
        forward, backward, qs.shift, prod, verify_len,
        source_op=qs.op, target_rule=product_rule,
    )
    return dec


def _orbits(shift: MarkovShift) -> tuple[tuple[str, ...], ...]:
    """Cycles of a deterministic shift (one follower and one predecessor each)."""
    succ = {}
    for i, s in enumerate(shift.symbols):
        nxt = shift.follower_indices(i)
        assert len(nxt) == 1
        succ[s] = shift.symbols[nxt[0]]
    seen: set[str] = set()
    orbits = []
    for s in shift.symbols:
        if s in seen:
            continue
        orbit = [s]
        seen.add(s)
        t = succ[s]
        while t != s:
            orbit.append(t)
            seen.add(t)
            t = succ[t]
        orbits.append(tuple(orbit))
    return tuple(orbits)


def _transported_rule(
    qs: QuasigroupShift, prod: MarkovShift, forward: BlockCode, backward: BlockCode
) -> BlockOperationRule:
    """The operation carried over to the product alphabet.

    On windows of the backward code's width: pull both windows back to
    source symbols, multiply, push the product forward.  Anticipation
    stays zero; memory equals the number of follower-class quotients.
    """
    assert backward.anticipation == 0
    width = backward.width
    table: dict[tuple[tuple[str, ...], tuple[str, ...]], str] = {}
    windows = words(prod, width)
    for u in windows:
        xu = backward.rule[u]
        for v in windows:
            xv = backward.rule[v]
            table[(u, v)] = forward.rule[(qs.op.mul(xu, xv),)]
    return BlockOperationRule(backward.memory, 0, table)


def block_width_bound(dec: Decomposition) -> dict:
    """Check the product operation's width against the prime structure of the exponent.

    Requires the source shift to be irreducible.  With exponent
    ``N = p1^q1 ... pr^qr`` the recorded window width must not exceed
    ``1 + q1 + ... + qr`` and the anticipation must be zero.  (The
    mirrored convention, memory zero and positive anticipation, is
    obtained by reversing all words.)
    """
    if not is_irreducible(dec.source.shift):
        raise NotIrreducibleError("block width bound applies to irreducible shifts only")
    n = dec.full_exponent
    exponents = _prime_exponents(n)
    bound = 1 + sum(exponents.values())
    width = dec.product_rule.width
    return {
        "full_shift_size": n,
        "prime_factorization": {str(p): q for p, q in sorted(exponents.items())},
        "width_bound": bound,
        "recorded_width": width,
        "recorded_memory": dec.product_rule.memory,
        "recorded_anticipation": dec.product_rule.anticipation,
        "within_bound": width <= bound and dec.product_rule.anticipation == 0,
        "note": "reversing words swaps the memory and anticipation conventions",
    }


def _prime_exponents(n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    p = 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def _dense_rule(code: BlockCode) -> np.ndarray:
    n = len(code.source)
    src_index = {s: i for i, s in enumerate(code.source)}
    tgt_index = {s: i for i, s in enumerate(code.target)}
    dense = np.full(n**code.width, -1, dtype=np.int64)
    for window, out in code.rule.items():
        key = 0
        for s in window:
            key = key * n + src_index[s]
        dense[key] = tgt_index[out]
    return dense


def _allowed_rows(shift: MarkovShift, arr: np.ndarray) -> np.ndarray:
    if arr.shape[1] < 2:
        return np.ones(arr.shape[0], dtype=bool)
    t = shift.matrix()
    steps = t[arr[:, :-1].astype(np.int64), arr[:, 1:].astype(np.int64)]
    return steps.all(axis=1)


def _decode(shift: MarkovShift, row: np.ndarray) -> tuple[str, ...]:
    return tuple(shift.symbols[int(i)] for i in row)


def verify_isomorphism(
    forward: BlockCode,
    backward: BlockCode,
    source: MarkovShift,
    target: MarkovShift,
    max_len: int,
    source_op: FiniteQuasigroup | None = None,
    target_op: FiniteQuasigroup | None = None,
    target_rule: BlockOperationRule | None = None,
) -> dict:
    """Brute-force check that a code pair is an isomorphism, on words up to ``max_len``.

    For every length: the forward image of each allowed source word is an
    allowed target word; composing with the backward code reproduces the
    central part of the input (and symmetrically on the target side); the
    forward map is onto the target words of the matching length with
    fibers of one uniform size, so the word counts match exactly through
    the code.  When operations are supplied, the forward rule is also
    checked to transport the source operation onto the target one.

    Returns a per-length report; raises :class:`VerificationFailedError`
    with the first (shortest, lexicographically least) witness otherwise.
    """
    report: dict = {"max_length": max_len, "lengths": {}, "backend": _kernels.BACKEND}
    wf = forward.memory + forward.anticipation
    wb = backward.memory + backward.anticipation
    dense_f = _dense_rule(forward)
    dense_b = _dense_rule(backward)
    n_src = len(forward.source)
    n_tgt = len(backward.source)

    for m in range(wf + 1, max_len + 1):
        src_words = word_array(source, m)
        try:
            image = _kernels.apply_rule(src_words, dense_f, forward.width, n_src)
        except ValueError:
            raise VerificationFailedError(
                {"check": "forward_total", "length": m}
            ) from None
        ok = _allowed_rows(target, image)
        if not ok.all():
            bad = int(np.flatnonzero(~ok)[0])
            raise VerificationFailedError(
                {
                    "check": "forward_into_target",
                    "length": m,
                    "source_word": _decode(source, src_words[bad]),
                    "image": _decode(target, image[bad]),
                }
            )
        entry: dict = {"source_words": int(src_words.shape[0])}
        out_len = m - wf
        tgt_count = _count_words(target, out_len)
        enc = _kernels.encode_words(image, n_tgt)
        uniq, counts = np.unique(enc, return_counts=True)
        if len(uniq) != tgt_count:
            raise VerificationFailedError(
                {
                    "check": "forward_onto",
                    "length": m,
                    "image_count": int(len(uniq)),
                    "target_count": tgt_count,
                }
            )
        if counts.min() != counts.max():
            raise VerificationFailedError(
                {"check": "uniform_fibers", "length": m,
                 "fiber_sizes": sorted(set(int(c) for c in counts))}
            )
        entry["target_words"] = tgt_count
        entry["fiber_size"] = int(counts[0])
        if int(counts[0]) * tgt_count != src_words.shape[0]:
            raise VerificationFailedError({"check": "count_identity", "length": m})
        if out_len >= backward.width:
            back = _kernels.apply_rule(image, dense_b, backward.width, n_tgt)
            lo = forward.memory + backward.memory
            hi = m - forward.anticipation - backward.anticipation
            central = src_words[:, lo:hi]
            if back.shape != central.shape or not (back == central).all():
                bad = int(np.flatnonzero((back != central).any(axis=1))[0])
                raise VerificationFailedError(
                    {
                        "check": "backward_after_forward",
                        "length": m,
                        "source_word": _decode(source, src_words[bad]),
                        "round_trip": _decode(source, back[bad]),
                    }
                )
            entry["round_trip"] = True
        report["lengths"][m] = entry

    for m in range(wb + 1, max_len + 1):
        tgt_words = word_array(target, m)
        try:
            pre = _kernels.apply_rule(tgt_words, dense_b, backward.width, n_tgt)
        except ValueError:
            raise VerificationFailedError(
                {"check": "backward_total", "length": m}
            ) from None
        ok = _allowed_rows(source, pre)
        if not ok.all():
            bad = int(np.flatnonzero(~ok)[0])
            raise VerificationFailedError(
                {
                    "check": "backward_into_source",
                    "length": m,
                    "target_word": _decode(target, tgt_words[bad]),
                    "image": _decode(source, pre[bad]),
                }
            )
        out_len = m - wb
        if out_len >= forward.width:
            fwd = _kernels.apply_rule(pre, dense_f, forward.width, n_src)
            lo = backward.memory + forward.memory
            hi = m - backward.anticipation - forward.anticipation
            central = tgt_words[:, lo:hi]
            if fwd.shape != central.shape or not (fwd == central).all():
                bad = int(np.flatnonzero((fwd != central).any(axis=1))[0])
                raise VerificationFailedError(
                    {
                        "check": "forward_after_backward",
                        "length": m,
                        "target_word": _decode(target, tgt_words[bad]),
                        "round_trip": _decode(target, fwd[bad]),
                    }
                )

    if source_op is not None and (target_op is not None or target_rule is not None):
        _check_homomorphism(
            forward, source, source_op, target_op, target_rule, max_len
        )
        report["operation_transport"] = True
    return report


def _count_words(shift: MarkovShift, length: int) -> int:
    vec = [1] * shift.order
    for _ in range(length - 1):
        vec = [sum(vec[j] for j in shift.follower_indices(i)) for i in range(shift.order)]
    return sum(vec)


def _check_homomorphism(
    forward: BlockCode,
    source: MarkovShift,
    source_op: FiniteQuasigroup,
    target_op: FiniteQuasigroup | None,
    target_rule: BlockOperationRule | None,
    max_len: int,
) -> None:
    """Check the forward code intertwines the operations.

    Sliding maps are determined by their local rules, so equality on
    windows of the determining width extends to every longer word.
    """
    if target_op is not None:
        for u in words(source, forward.width):
            for v in words(source, forward.width):
                prod = tuple(source_op.mul(a, b) for a, b in zip(u, v))
                lhs = forward.rule[prod]
                rhs = target_op.mul(forward.rule[u], forward.rule[v])
                if lhs != rhs:
                    raise VerificationFailedError(
                        {"check": "operation_transport", "pair": (u, v)}
                    )
        return
    assert target_rule is not None
    assert forward.width == 1, "windowed target rules are checked for one-block codes"
    m = min(max(target_rule.width, 1) + 1, max_len)
    m = max(m, target_rule.width)
    for x in words(source, m):
        fx = forward.apply(x)
        for y in words(source, m):
            prod = tuple(source_op.mul(a, b) for a, b in zip(x, y))
            lhs = forward.apply(prod)[target_rule.memory :]
            rhs = target_rule.apply(fx, forward.apply(y))
            if lhs != rhs:
                raise VerificationFailedError(
                    {"check": "operation_transport", "pair": (x, y)}
                )
