"""Hot inner loops: regret matching+ solvers and the simplex-QP projection.

The compiled extension is used when it was built; otherwise the numpy fallback
with identical semantics is loaded. ``BACKEND`` names the active one.
"""
try:
    from ._core import fw_simplex_qp, rm_plus_bimatrix, rm_plus_symmetric

    BACKEND = "compiled"
except ImportError:  # extension not built
    from ._fallback import fw_simplex_qp, rm_plus_bimatrix, rm_plus_symmetric

    BACKEND = "python"

__all__ = ["BACKEND", "fw_simplex_qp", "rm_plus_bimatrix", "rm_plus_symmetric"]
