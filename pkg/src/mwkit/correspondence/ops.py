"""Module actions, inner products and tensor products on sampled elements.

Only the left action and the tensor product evaluate off the grid (at
phi_alpha(x)); both use the cached nearest-sample lookup of the grid, so
every identity between them holds exactly on a fixed grid.
"""

from __future__ import annotations

import numpy as np

from ..errors import OrderMismatch
from .elements import AlgebraElement, CorrElement, _check_grid


def right_action(xi: CorrElement, a: AlgebraElement) -> CorrElement:
    """(xi . a)(alpha, x) = xi(alpha, x) a(x)."""
    _check_grid(xi, a)
    g = xi.grid.mw.graph
    paths, slices, _ = xi.grid.layout(xi.order)
    out = xi.values.copy()
    for p in paths:
        out[slices[p]] *= a.on(g.r(p[-1]))
    return CorrElement(xi.grid, xi.order, out)


def left_action(a: AlgebraElement, xi: CorrElement) -> CorrElement:
    """(a . xi)(alpha, x) = a(phi_alpha(x)) xi(alpha, x).

    For order k this is the action through the composite map along alpha.
    """
    _check_grid(xi, a)
    g = xi.grid.mw.graph
    paths, slices, _ = xi.grid.layout(xi.order)
    out = xi.values.copy()
    for p in paths:
        idx, _ = xi.grid.push(p)
        out[slices[p]] *= a.on(g.s(p[0]))[idx]
    return CorrElement(xi.grid, xi.order, out)


def inner_product(xi: CorrElement, eta: CorrElement) -> AlgebraElement:
    """<xi, eta>(x) = sum over alpha with x in K_r(alpha) of conj(xi) eta."""
    _check_grid(xi, eta)
    if xi.order != eta.order:
        raise OrderMismatch(f"orders {xi.order} and {eta.order} differ")
    grid = xi.grid
    g = grid.mw.graph
    paths, slices, _ = grid.layout(xi.order)
    out = np.zeros(grid.size, dtype=complex)
    prod = xi.values.conj() * eta.values
    for p in paths:
        out[grid.offsets[g.r(p[-1])]] += prod[slices[p]]
    return AlgebraElement(grid, out)


def tensor(xi: CorrElement, eta: CorrElement) -> CorrElement:
    """(xi (x) eta)(alpha beta, x) = xi(alpha, phi_beta(x)) eta(beta, x)."""
    _check_grid(xi, eta)
    grid = xi.grid
    j, k = xi.order, eta.order
    paths, slices, total = grid.layout(j + k)
    out = np.zeros(total, dtype=complex)
    for p in paths:
        alpha, beta = p[:j], p[j:]
        idx, _ = grid.push(beta)
        out[slices[p]] = xi.block(alpha)[idx] * eta.block(beta)
    return CorrElement(grid, j + k, out)

