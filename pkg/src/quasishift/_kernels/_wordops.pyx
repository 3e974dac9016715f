# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled word kernels; see ``pure.py`` for the reference semantics."""

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND = "cython"


def enumerate_words(transitions, int length):
    if length < 1:
        raise ValueError("word length must be >= 1")
    cdef cnp.uint8_t[:, ::1] trans = np.ascontiguousarray(transitions, dtype=np.uint8)
    cdef int n = trans.shape[0]
    cdef cnp.int64_t[:, ::1] deg = np.zeros((n, 1), dtype=np.int64)
    cdef int i, j
    for i in range(n):
        for j in range(n):
            if trans[i, j]:
                deg[i, 0] += 1

    cdef cnp.int8_t[:, ::1] cur = np.arange(n, dtype=np.int8).reshape(n, 1)
    cdef cnp.int8_t[:, ::1] nxt
    cdef Py_ssize_t rows, r, out, step
    cdef int last, c, k
    for step in range(length - 1):
        rows = cur.shape[0]
        out = 0
        for r in range(rows):
            out += deg[cur[r, step], 0]
        nxt = np.empty((out, step + 2), dtype=np.int8)
        out = 0
        for r in range(rows):
            last = cur[r, step]
            for c in range(n):
                if trans[last, c]:
                    for k in range(step + 1):
                        nxt[out, k] = cur[r, k]
                    nxt[out, step + 1] = <cnp.int8_t> c
                    out += 1
        cur = nxt
    return np.asarray(cur)


def apply_rule(words, rule, int width, int n_symbols):
    cdef cnp.int8_t[:, ::1] w = np.ascontiguousarray(words, dtype=np.int8)
    cdef cnp.int64_t[::1] r = np.ascontiguousarray(rule, dtype=np.int64)
    cdef Py_ssize_t count = w.shape[0]
    cdef Py_ssize_t length = w.shape[1]
    cdef Py_ssize_t out_len = length - width + 1
    if out_len < 1:
        raise ValueError("words shorter than the rule window")
    cdef cnp.int8_t[:, ::1] out = np.empty((count, out_len), dtype=np.int8)
    cdef Py_ssize_t i, j
    cdef int k
    cdef cnp.int64_t code, val
    for i in range(count):
        for j in range(out_len):
            code = 0
            for k in range(width):
                code = code * n_symbols + w[i, j + k]
            val = r[code]
            if val < 0:
                raise ValueError("rule not defined on some allowed window")
            out[i, j] = <cnp.int8_t> val
    return np.asarray(out)


def encode_words(words, long base):
    cdef cnp.int8_t[:, ::1] w = np.ascontiguousarray(words, dtype=np.int8)
    cdef Py_ssize_t count = w.shape[0]
    cdef Py_ssize_t length = w.shape[1]
    cdef double bound = 1.0
    cdef Py_ssize_t k
    for k in range(length):
        bound *= base
        if bound > 4.6e18:
            raise OverflowError("word encoding does not fit in int64")
    cdef cnp.int64_t[::1] enc = np.zeros(count, dtype=np.int64)
    cdef Py_ssize_t i
    cdef cnp.int64_t acc
    for i in range(count):
        acc = 0
        for k in range(length):
            acc = acc * base + w[i, k]
        enc[i] = acc
    return np.asarray(enc)
