# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot kernels: stack-program evaluation and panel quadrature.

Semantically identical to `fallback.py`; the instruction set lives in
``meanosc.program``.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport atan, cos, exp, fabs, log, sin

cnp.import_array()

NAME = "compiled"

cdef double INV_PI = 0.3183098861837906715377675267450287

cdef inline double _eval_one(const int* code, Py_ssize_t ncode,
                             const double* consts, double t) noexcept nogil:
    cdef double stack[32]
    cdef int sp = 0
    cdef Py_ssize_t k
    cdef int op, ia, n, j
    cdef double a, b, d, den, acc, r2
    for k in range(0, ncode, 2):
        op = code[k]
        ia = code[k + 1]
        if op == 0:    # CONST
            stack[sp] = consts[ia]; sp += 1
        elif op == 1:  # X
            stack[sp] = t; sp += 1
        elif op == 2:  # ADD
            sp -= 1; stack[sp - 1] += stack[sp]
        elif op == 3:  # SUB
            sp -= 1; stack[sp - 1] -= stack[sp]
        elif op == 4:  # MUL
            sp -= 1; stack[sp - 1] *= stack[sp]
        elif op == 5:  # DIV
            sp -= 1; stack[sp - 1] /= stack[sp]
        elif op == 6:  # NEG
            stack[sp - 1] = -stack[sp - 1]
        elif op == 7:  # ABS
            stack[sp - 1] = fabs(stack[sp - 1])
        elif op == 8:  # SIGN
            a = stack[sp - 1]
            stack[sp - 1] = 0.0 if a == 0.0 else (1.0 if a > 0.0 else -1.0)
        elif op == 9:  # LOGABS
            stack[sp - 1] = log(fabs(stack[sp - 1]))
        elif op == 10:  # EXP
            stack[sp - 1] = exp(stack[sp - 1])
        elif op == 11:  # SIN
            stack[sp - 1] = sin(stack[sp - 1])
        elif op == 12:  # COS
            stack[sp - 1] = cos(stack[sp - 1])
        elif op == 13:  # POWC
            stack[sp - 1] = stack[sp - 1] ** consts[ia]
        elif op == 14:  # INDICATOR
            a = stack[sp - 1]
            stack[sp - 1] = 1.0 if (a >= consts[ia] and a <= consts[ia + 1]) else 0.0
        elif op == 15:  # DUP
            stack[sp] = stack[sp - 1]; sp += 1
        elif op == 16:  # SWAP
            a = stack[sp - 1]; stack[sp - 1] = stack[sp - 2]; stack[sp - 2] = a
        elif op == 17:  # POLY
            n = <int>consts[ia]
            a = stack[sp - 1]
            acc = consts[ia + 1]
            for j in range(2, n + 2):
                acc = acc * a + consts[ia + j]
            stack[sp - 1] = acc
        elif op == 18:  # MINC
            if stack[sp - 1] > consts[ia]:
                stack[sp - 1] = consts[ia]
        elif op == 19:  # MAXC
            if stack[sp - 1] < consts[ia]:
                stack[sp - 1] = consts[ia]
        elif op == 20:  # ATAN
            stack[sp - 1] = atan(stack[sp - 1])
        elif op == 21:  # TABLE
            n = <int>consts[ia]
            a = stack[sp - 1]
            if a <= consts[ia + 2]:
                stack[sp - 1] = 0.0 if (consts[ia + 1] != 0.0 and a < consts[ia + 2]) \
                    else consts[ia + 2 + n]
            elif a >= consts[ia + 2 + n - 1]:
                stack[sp - 1] = 0.0 if (consts[ia + 1] != 0.0 and a > consts[ia + 2 + n - 1]) \
                    else consts[ia + 2 + 2 * n - 1]
            else:
                # binary search for the knot span
                j = 0
                n -= 1
                while n - j > 1:
                    if consts[ia + 2 + (j + n) // 2] <= a:
                        j = (j + n) // 2
                    else:
                        n = (j + n) // 2
                b = (a - consts[ia + 2 + j]) / (consts[ia + 3 + j] - consts[ia + 2 + j])
                n = <int>consts[ia]
                stack[sp - 1] = consts[ia + 2 + n + j] * (1.0 - b) + consts[ia + 3 + n + j] * b
        elif op == 22:  # POISSON_H
            d = consts[ia] - stack[sp - 1]
            stack[sp - 1] = INV_PI * consts[ia + 1] / (d * d + consts[ia + 1] * consts[ia + 1])
        elif op == 23:  # DPX_H
            d = consts[ia] - stack[sp - 1]
            den = d * d + consts[ia + 1] * consts[ia + 1]
            stack[sp - 1] = -2.0 * INV_PI * consts[ia + 1] * d / (den * den)
        elif op == 24:  # DPY_H
            d = consts[ia] - stack[sp - 1]
            den = d * d + consts[ia + 1] * consts[ia + 1]
            stack[sp - 1] = INV_PI * (d * d - consts[ia + 1] * consts[ia + 1]) / (den * den)
        elif op == 25:  # POISSON_D
            a = stack[sp - 1]
            r2 = consts[ia] * consts[ia] + consts[ia + 1] * consts[ia + 1]
            stack[sp - 1] = (1.0 - r2) / (1.0 - 2.0 * (consts[ia] * cos(a) + consts[ia + 1] * sin(a)) + r2)
        elif op == 26:  # PICK
            stack[sp] = stack[sp - 1 - <int>consts[ia]]; sp += 1
        elif op == 27:  # POP
            sp -= 1
    return stack[sp - 1]


def eval_program(code, consts, x):
    cdef cnp.ndarray[cnp.int32_t, ndim=1] c = np.ascontiguousarray(code, dtype=np.int32)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] cc = np.ascontiguousarray(consts, dtype=np.float64)
    arr = np.asarray(x, dtype=np.float64)
    scalar = arr.ndim == 0
    cdef cnp.ndarray[cnp.float64_t, ndim=1] flat = np.ascontiguousarray(arr.ravel())
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(flat.shape[0], dtype=np.float64)
    cdef Py_ssize_t i, m = flat.shape[0], ncode = c.shape[0]
    cdef const int* pc = <const int*>&c[0] if ncode else NULL
    cdef const double* pk = <const double*>&cc[0] if cc.shape[0] else NULL
    with nogil:
        for i in range(m):
            out[i] = _eval_one(pc, ncode, pk, flat[i])
    if scalar:
        return float(out[0])
    return out.reshape(arr.shape)


def panel_integrals(code, consts, edges, nodes, weights):
    cdef cnp.ndarray[cnp.int32_t, ndim=1] c = np.ascontiguousarray(code, dtype=np.int32)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] cc = np.ascontiguousarray(consts, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] e = np.ascontiguousarray(edges, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] nd = np.ascontiguousarray(nodes, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] wt = np.ascontiguousarray(weights, dtype=np.float64)
    cdef Py_ssize_t m = e.shape[0] - 1, nq = nd.shape[0], ncode = c.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(m, dtype=np.float64)
    cdef const int* pc = <const int*>&c[0] if ncode else NULL
    cdef const double* pk = <const double*>&cc[0] if cc.shape[0] else NULL
    cdef Py_ssize_t i, q
    cdef double half, mid, acc
    with nogil:
        for i in range(m):
            half = 0.5 * (e[i + 1] - e[i])
            mid = e[i] + half
            acc = 0.0
            for q in range(nq):
                acc += wt[q] * _eval_one(pc, ncode, pk, mid + half * nd[q])
            out[i] = acc * half
    return out


def integrate_bilinear_box(xs, ys, vals, x0, x1, y0, y1):
    # thin wrapper; this path is numpy-bound already
    from . import fallback

    return fallback.integrate_bilinear_box(xs, ys, vals, x0, x1, y0, y1)
