"""Pure-Python (numpy) word kernels.

Same contract as the compiled backend in ``_wordops.pyx``; selected at
import time by the package ``__init__`` when the extension is missing or
explicitly disabled.

Words are rows of ``int8`` arrays of symbol indices.  Rule tables are
dense ``int64`` arrays indexed by the base-``n`` encoding of a window,
with ``-1`` marking windows the rule is not defined on.
"""

from __future__ import annotations

import numpy as np

BACKEND = "pure"


def enumerate_words(transitions: np.ndarray, length: int) -> np.ndarray:
    """All transition-allowed words of ``length`` symbols, in lexicographic order.

    ``transitions`` is an ``(n, n)`` 0/1 array; a word ``w`` is allowed when
    ``transitions[w[i], w[i+1]] == 1`` for every step.
    """
    if length < 1:
        raise ValueError("word length must be >= 1")
    n = transitions.shape[0]
    followers = [np.flatnonzero(transitions[i]).astype(np.int8) for i in range(n)]
    counts = np.array([len(f) for f in followers], dtype=np.int64)
    flat = np.concatenate(followers) if n else np.zeros(0, dtype=np.int8)
    offsets = np.zeros(n, dtype=np.int64)
    if n > 1:
        offsets[1:] = np.cumsum(counts)[:-1]

    words = np.arange(n, dtype=np.int8).reshape(n, 1)
    for _ in range(length - 1):
        last = words[:, -1].astype(np.int64)
        reps = counts[last]
        total = int(reps.sum())
        grown = np.repeat(words, reps, axis=0)
        starts = np.zeros(len(words), dtype=np.int64)
        if len(words) > 1:
            starts[1:] = np.cumsum(reps)[:-1]
        within = np.arange(total, dtype=np.int64) - np.repeat(starts, reps)
        nxt = flat[np.repeat(offsets[last], reps) + within]
        words = np.concatenate([grown, nxt.reshape(-1, 1)], axis=1)
    return words


def apply_rule(words: np.ndarray, rule: np.ndarray, width: int, n_symbols: int) -> np.ndarray:
    """Slide a dense ``width``-window rule along each word.

    Output row ``i`` has ``L - width + 1`` symbols; raises ``ValueError``
    if any window hits an undefined (``-1``) rule entry.
    """
    count, length = words.shape
    out_len = length - width + 1
    if out_len < 1:
        raise ValueError("words shorter than the rule window")
    codes = np.zeros((count, out_len), dtype=np.int64)
    for k in range(width):
        codes *= n_symbols
        codes += words[:, k : k + out_len].astype(np.int64)
    out = rule[codes]
    if (out < 0).any():
        raise ValueError("rule not defined on some allowed window")
    return out.astype(np.int8)


def encode_words(words: np.ndarray, base: int) -> np.ndarray:
    """Base-``base`` integer encoding of each word (row)."""
    count, length = words.shape
    if length > 0 and base ** length > 2**62:
        raise OverflowError("word encoding does not fit in int64")
    enc = np.zeros(count, dtype=np.int64)
    for k in range(length):
        enc *= base
        enc += words[:, k].astype(np.int64)
    return enc
