"""Hot-kernel backend selection.

The compiled extension wins on the small batches that dominate adaptive
quadrature (per-point dispatch beats numpy's per-op array overhead there),
while numpy's vectorization wins on large grids, so the default backend is
a size-based hybrid.  Set MEANOSC_FORCE_FALLBACK=1 to run pure numpy (used
by the parity tests and the benchmark).
"""

from __future__ import annotations

import os

from . import fallback

_forced = os.environ.get("MEANOSC_FORCE_FALLBACK") == "1"
_impl = None
if not _forced:
    try:
        from . import _core as _impl
    except ImportError:
        _impl = None

# crossover measured on the panel-sweep benchmark (see benchmarks/)
_POINT_CUTOVER = 2048

if _impl is None:
    BACKEND = "fallback"
    eval_program = fallback.eval_program
    panel_integrals = fallback.panel_integrals
else:
    BACKEND = "compiled"
    _compiled = _impl

    def eval_program(code, consts, x):
        import numpy as np

        if np.size(x) <= _POINT_CUTOVER:
            return _compiled.eval_program(code, consts, x)
        return fallback.eval_program(code, consts, x)

    def panel_integrals(code, consts, edges, nodes, weights):
        if (len(edges) - 1) * len(nodes) <= _POINT_CUTOVER:
            return _compiled.panel_integrals(code, consts, edges, nodes, weights)
        return fallback.panel_integrals(code, consts, edges, nodes, weights)


integrate_bilinear_box = fallback.integrate_bilinear_box
