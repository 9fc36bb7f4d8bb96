"""Per-party (axis-wise) application of matrices to joint coefficient vectors."""

from __future__ import annotations

from math import prod
from typing import Sequence

from .ratlin import ZERO, RatMatrix


def apply_on_axis(coeffs: Sequence, dims: Sequence[int], k: int, M: RatMatrix) -> tuple:
    """Apply ``M`` to axis ``k`` of the tensor ``coeffs`` with shape ``dims``.

    Equivalent to multiplying by ``1 ⊗ … ⊗ M ⊗ … ⊗ 1``.
    """
    dk = dims[k]
    if M.ncols != dk:
        raise ValueError(f"matrix has {M.ncols} columns, axis {k} has size {dk}")
    pre = prod(dims[:k])
    post = prod(dims[k + 1:])
    nk = M.nrows
    columns = []
    for i in range(dk):
        columns.append([(j, M.rows[j][i]) for j in range(nk) if M.rows[j][i]])
    out = [ZERO] * (pre * nk * post)
    for p in range(pre):
        base_in = p * dk * post
        base_out = p * nk * post
        for i in range(dk):
            col = columns[i]
            if not col:
                continue
            off_in = base_in + i * post
            for q in range(post):
                v = coeffs[off_in + q]
                if v:
                    for j, m in col:
                        out[base_out + j * post + q] += m * v
    return tuple(out)


def apply_parts(coeffs: Sequence, dims: Sequence[int], parts: Sequence[RatMatrix | None]) -> tuple:
    """Apply one matrix per axis; ``None`` means identity."""
    if len(parts) != len(dims):
        raise ValueError(f"expected {len(dims)} parts, got {len(parts)}")
    out = tuple(coeffs)
    dims = list(dims)
    for k, M in enumerate(parts):
        if M is None:
            continue
        out = apply_on_axis(out, dims, k, M)
        dims[k] = M.nrows
    return out


def kron_all(mats: Sequence[RatMatrix]) -> RatMatrix:
    out = mats[0]
    for m in mats[1:]:
        out = out.kron(m)
    return out
