"""Sparse, differentiable top-k operators."""

from ._core import (
    RelaxedOutput,
    dual_bca_solve,
    dykstra_solve,
    f_value,
    fy_topk_loss,
    lmo,
    pav_solve,
    relaxed_apply,
    soft_rank,
    soft_signed_topkmask,
    soft_sort,
    soft_topkmag,
    soft_topkmask,
    sort_desc,
    topk,
    topkmag,
    topkmask,
)

__all__ = [
    "RelaxedOutput",
    "dual_bca_solve",
    "dykstra_solve",
    "f_value",
    "fy_topk_loss",
    "lmo",
    "pav_solve",
    "relaxed_apply",
    "soft_rank",
    "soft_signed_topkmask",
    "soft_sort",
    "soft_topkmag",
    "soft_topkmask",
    "sort_desc",
    "topk",
    "topkmag",
    "topkmask",
]
