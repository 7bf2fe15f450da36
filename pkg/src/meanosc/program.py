"""Stack-machine programs for real-valued integrands of one real variable.

Every integrand the quadrature engine sees (boundary functions, their
oscillation residuals |f - c|^r, Poisson-kernel weighted integrands,
mollifier windows, ...) is flattened into a tiny postfix program: an int32
opcode stream plus a float64 constant pool.  The same program is evaluated
either by the compiled kernel or by the numpy fallback, so the two backends
share one definition of every integrand.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Opcodes.  Each instruction is an (op, iarg) pair in the code stream; iarg
# indexes the constant pool (unused args are 0).
OP_CONST = 0       # push consts[iarg]
OP_X = 1           # push the integration variable
OP_ADD = 2
OP_SUB = 3
OP_MUL = 4
OP_DIV = 5
OP_NEG = 6
OP_ABS = 7
OP_SIGN = 8
OP_LOGABS = 9      # log|t|  (t = 0 yields -inf; quadrature never probes declared singular points)
OP_EXP = 10
OP_SIN = 11
OP_COS = 12
OP_POWC = 13       # t ** consts[iarg], caller guarantees t >= 0
OP_INDICATOR = 14  # 1 if consts[iarg] <= t <= consts[iarg+1] else 0
OP_DUP = 15
OP_SWAP = 16
OP_POLY = 17       # Horner; consts[iarg] = degree n, coefficients (high to low) follow
OP_MINC = 18       # min(t, consts[iarg])
OP_MAXC = 19       # max(t, consts[iarg])
OP_ATAN = 20
OP_TABLE = 21      # linear interpolation; consts[iarg] = n, consts[iarg+1] = mode
                   # (0 clamp to edge values, 1 zero outside), xs then ys follow
OP_POISSON_H = 22  # t -> y/pi / ((x-t)^2 + y^2), consts[iarg] = x, consts[iarg+1] = y
OP_DPX_H = 23      # d/dx of the half-plane kernel
OP_DPY_H = 24      # d/dy of the half-plane kernel
OP_POISSON_D = 25  # t=theta -> (1-|w|^2)/|e^{i theta} - w|^2, consts = (Re w, Im w)
OP_PICK = 26       # copy the stack entry iarg slots below the top
OP_POP = 27

_ARITY = {
    OP_CONST: 0, OP_X: 0,
    OP_ADD: 2, OP_SUB: 2, OP_MUL: 2, OP_DIV: 2,
    OP_NEG: 1, OP_ABS: 1, OP_SIGN: 1, OP_LOGABS: 1, OP_EXP: 1,
    OP_SIN: 1, OP_COS: 1, OP_POWC: 1, OP_INDICATOR: 1,
    OP_DUP: 1, OP_SWAP: 2, OP_POLY: 1, OP_MINC: 1, OP_MAXC: 1,
    OP_ATAN: 1, OP_TABLE: 1,
    OP_POISSON_H: 1, OP_DPX_H: 1, OP_DPY_H: 1, OP_POISSON_D: 1,
    OP_PICK: 0, OP_POP: 1,
}
_PUSES = {OP_SWAP: 2, OP_DUP: 2, OP_POP: 0}  # net pushes where not 1

MAX_STACK = 32


@dataclass(frozen=True)
class Program:
    code: np.ndarray    # int32, flat (op, iarg) pairs
    consts: np.ndarray  # float64 pool
    stack_need: int

    def __call__(self, x):
        from . import _kernels

        return _kernels.eval_program(self.code, self.consts, x)


class ProgramBuilder:
    """Emits instructions and tracks stack height for validation."""

    def __init__(self):
        self._code: list[int] = []
        self._consts: list[float] = []
        self._height = 0
        self._max_height = 0

    @property
    def height(self) -> int:
        return self._height

    def _emit(self, op: int, iarg: int = 0) -> None:
        arity = _ARITY[op]
        if self._height < arity:
            raise ValueError(f"stack underflow emitting op {op}")
        self._height += _PUSES.get(op, 1) - arity
        self._max_height = max(self._max_height, self._height)
        if self._max_height > MAX_STACK:
            raise ValueError("program exceeds maximum stack depth")
        self._code += [op, iarg]

    def _const_index(self, values) -> int:
        idx = len(self._consts)
        self._consts.extend(float(v) for v in values)
        return idx

    def const(self, c: float):
        self._emit(OP_CONST, self._const_index([c]))
        return self

    def x(self):
        self._emit(OP_X)
        return self

    def add(self):
        self._emit(OP_ADD)
        return self

    def sub(self):
        self._emit(OP_SUB)
        return self

    def mul(self):
        self._emit(OP_MUL)
        return self

    def div(self):
        self._emit(OP_DIV)
        return self

    def neg(self):
        self._emit(OP_NEG)
        return self

    def abs(self):
        self._emit(OP_ABS)
        return self

    def sign(self):
        self._emit(OP_SIGN)
        return self

    def log_abs(self):
        self._emit(OP_LOGABS)
        return self

    def exp(self):
        self._emit(OP_EXP)
        return self

    def sin(self):
        self._emit(OP_SIN)
        return self

    def cos(self):
        self._emit(OP_COS)
        return self

    def pow_const(self, p: float):
        self._emit(OP_POWC, self._const_index([p]))
        return self

    def indicator(self, a: float, b: float):
        self._emit(OP_INDICATOR, self._const_index([a, b]))
        return self

    def dup(self):
        self._emit(OP_DUP)
        return self

    def swap(self):
        self._emit(OP_SWAP)
        return self

    def poly(self, coeffs_high_to_low):
        coeffs = list(coeffs_high_to_low)
        self._emit(OP_POLY, self._const_index([len(coeffs) - 1] + coeffs))
        return self

    def min_const(self, c: float):
        self._emit(OP_MINC, self._const_index([c]))
        return self

    def max_const(self, c: float):
        self._emit(OP_MAXC, self._const_index([c]))
        return self

    def atan(self):
        self._emit(OP_ATAN)
        return self

    def table(self, xs, ys, zero_outside: bool):
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        if xs.ndim != 1 or xs.shape != ys.shape or xs.size < 2:
            raise ValueError("table needs matching 1-d knot/value arrays")
        if not np.all(np.diff(xs) > 0):
            raise ValueError("table knots must be strictly increasing")
        vals = [xs.size, 1.0 if zero_outside else 0.0] + list(xs) + list(ys)
        self._emit(OP_TABLE, self._const_index(vals))
        return self

    def poisson_h(self, x: float, y: float):
        self._emit(OP_POISSON_H, self._const_index([x, y]))
        return self

    def dpx_h(self, x: float, y: float):
        self._emit(OP_DPX_H, self._const_index([x, y]))
        return self

    def dpy_h(self, x: float, y: float):
        self._emit(OP_DPY_H, self._const_index([x, y]))
        return self

    def poisson_d(self, w_re: float, w_im: float):
        self._emit(OP_POISSON_D, self._const_index([w_re, w_im]))
        return self

    def pick(self, depth_below_top: int):
        if depth_below_top < 0 or depth_below_top >= self._height:
            raise ValueError("pick out of range")
        self._emit(OP_PICK, self._const_index([depth_below_top]))
        return self

    def pop(self):
        self._emit(OP_POP)
        return self

    def finish(self) -> Program:
        if self._height != 1:
            raise ValueError(f"program must leave one value on the stack, has {self._height}")
        return Program(
            code=np.asarray(self._code, dtype=np.int32),
            consts=np.asarray(self._consts, dtype=np.float64),
            stack_need=self._max_height,
        )
