"""Pure-numpy implementations of the hot kernels.

Mirrors the compiled extension in `_core.pyx` instruction for instruction;
selected automatically when the extension is unavailable.
"""

from __future__ import annotations

import numpy as np

from ..program import (
    OP_ABS, OP_ADD, OP_ATAN, OP_CONST, OP_COS, OP_DIV, OP_DPX_H, OP_DPY_H,
    OP_DUP, OP_EXP, OP_INDICATOR, OP_LOGABS, OP_MAXC, OP_MINC, OP_MUL,
    OP_NEG, OP_PICK, OP_POISSON_D, OP_POISSON_H, OP_POLY, OP_POP, OP_POWC,
    OP_SIGN, OP_SIN, OP_SUB, OP_SWAP, OP_TABLE, OP_X,
)

NAME = "fallback"

_INV_PI = 1.0 / np.pi


def eval_program(code, consts, x):
    """Evaluate a stack program at the points `x` (any array shape)."""
    x = np.asarray(x, dtype=np.float64)
    scalar = x.ndim == 0
    t = np.atleast_1d(x)
    stack = []
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for k in range(0, len(code), 2):
            op = code[k]
            ia = code[k + 1]
            if op == OP_CONST:
                stack.append(np.full_like(t, consts[ia]))
            elif op == OP_X:
                stack.append(t.copy())
            elif op == OP_ADD:
                b = stack.pop()
                stack[-1] = stack[-1] + b
            elif op == OP_SUB:
                b = stack.pop()
                stack[-1] = stack[-1] - b
            elif op == OP_MUL:
                b = stack.pop()
                stack[-1] = stack[-1] * b
            elif op == OP_DIV:
                b = stack.pop()
                stack[-1] = stack[-1] / b
            elif op == OP_NEG:
                stack[-1] = -stack[-1]
            elif op == OP_ABS:
                stack[-1] = np.abs(stack[-1])
            elif op == OP_SIGN:
                stack[-1] = np.sign(stack[-1])
            elif op == OP_LOGABS:
                stack[-1] = np.log(np.abs(stack[-1]))
            elif op == OP_EXP:
                stack[-1] = np.exp(stack[-1])
            elif op == OP_SIN:
                stack[-1] = np.sin(stack[-1])
            elif op == OP_COS:
                stack[-1] = np.cos(stack[-1])
            elif op == OP_POWC:
                stack[-1] = stack[-1] ** consts[ia]
            elif op == OP_INDICATOR:
                u = stack[-1]
                stack[-1] = ((u >= consts[ia]) & (u <= consts[ia + 1])).astype(np.float64)
            elif op == OP_DUP:
                stack.append(stack[-1].copy())
            elif op == OP_SWAP:
                stack[-1], stack[-2] = stack[-2], stack[-1]
            elif op == OP_POLY:
                n = int(consts[ia])
                u = stack[-1]
                acc = np.full_like(u, consts[ia + 1])
                for j in range(2, n + 2):
                    acc = acc * u + consts[ia + j]
                stack[-1] = acc
            elif op == OP_MINC:
                stack[-1] = np.minimum(stack[-1], consts[ia])
            elif op == OP_MAXC:
                stack[-1] = np.maximum(stack[-1], consts[ia])
            elif op == OP_ATAN:
                stack[-1] = np.arctan(stack[-1])
            elif op == OP_TABLE:
                n = int(consts[ia])
                zero_outside = consts[ia + 1] != 0.0
                xs = consts[ia + 2 : ia + 2 + n]
                ys = consts[ia + 2 + n : ia + 2 + 2 * n]
                u = stack[-1]
                v = np.interp(u, xs, ys)
                if zero_outside:
                    v = np.where((u < xs[0]) | (u > xs[-1]), 0.0, v)
                stack[-1] = v
            elif op == OP_POISSON_H:
                px, py = consts[ia], consts[ia + 1]
                d = stack[-1]
                stack[-1] = _INV_PI * py / ((px - d) ** 2 + py * py)
            elif op == OP_DPX_H:
                px, py = consts[ia], consts[ia + 1]
                d = px - stack[-1]
                den = d * d + py * py
                stack[-1] = -2.0 * _INV_PI * py * d / (den * den)
            elif op == OP_DPY_H:
                px, py = consts[ia], consts[ia + 1]
                d = px - stack[-1]
                den = d * d + py * py
                stack[-1] = _INV_PI * (d * d - py * py) / (den * den)
            elif op == OP_POISSON_D:
                wu, wv = consts[ia], consts[ia + 1]
                th = stack[-1]
                r2 = wu * wu + wv * wv
                stack[-1] = (1.0 - r2) / (1.0 - 2.0 * (wu * np.cos(th) + wv * np.sin(th)) + r2)
            elif op == OP_PICK:
                stack.append(stack[-1 - int(consts[ia])].copy())
            elif op == OP_POP:
                stack.pop()
            else:
                raise ValueError(f"unknown opcode {op}")
    out = stack[-1].reshape(x.shape) if not scalar else stack[-1][0]
    return out


def panel_integrals(code, consts, edges, nodes, weights):
    """Gauss-Legendre integrals of a program over consecutive panels.

    `edges` has m+1 entries delimiting m panels; returns the m per-panel
    integrals using the reference nodes/weights on [-1, 1].
    """
    edges = np.asarray(edges, dtype=np.float64)
    lo = edges[:-1]
    half = 0.5 * (edges[1:] - lo)
    mid = lo + half
    pts = mid[:, None] + half[:, None] * nodes[None, :]
    vals = eval_program(code, consts, pts)
    return (vals @ weights) * half


def integrate_bilinear_box(xs, ys, vals, x0, x1, y0, y1):
    """Exact integral of the bilinear interpolant of a grid over a rectangle.

    The rectangle is clipped to the grid; the interpolant is integrated cell
    by cell (the integral of a bilinear function over an axis-aligned
    sub-rectangle is its area times the mean of the four corner values).
    """
    x0 = max(x0, xs[0])
    x1 = min(x1, xs[-1])
    y0 = max(y0, ys[0])
    y1 = min(y1, ys[-1])
    if x1 <= x0 or y1 <= y0:
        return 0.0

    def _axis_weights(knots, a, b):
        # per-cell overlap [lo, hi] and the linear-interpolation weights of the
        # cell mean over that overlap
        lo = np.maximum(knots[:-1], a)
        hi = np.minimum(knots[1:], b)
        w = np.maximum(hi - lo, 0.0)
        span = knots[1:] - knots[:-1]
        # mean of the hat coordinates over [lo, hi]
        mid = 0.5 * (lo + hi)
        tmid = np.where(w > 0, (mid - knots[:-1]) / span, 0.0)
        return w, tmid

    wx, tx = _axis_weights(xs, x0, x1)
    wy, ty = _axis_weights(ys, y0, y1)
    # vals indexed [iy, ix]; the mean of a bilinear function over a
    # sub-rectangle is the function at the per-axis mean coordinates
    v00 = vals[:-1, :-1]
    v01 = vals[:-1, 1:]
    v10 = vals[1:, :-1]
    v11 = vals[1:, 1:]
    cy = (1.0 - ty)[:, None]
    cy1 = ty[:, None]
    cx = (1.0 - tx)[None, :]
    cx1 = tx[None, :]
    mean = v00 * cy * cx + v01 * cy * cx1 + v10 * cy1 * cx + v11 * cy1 * cx1
    return float(np.sum(mean * wy[:, None] * wx[None, :]))
