"""Finite-difference oracles for the closed-form geometry.

Nothing here reads the connection table or the curvature formula: the
Christoffel symbols come from differencing the coordinate metric, and the
Riemann tensor from differencing ``covariant_derivative`` itself.
"""
import numpy as np

from .geometry import (AmbientParams, VectorField, _as_xyz, covariant_derivative, fd_step,
                       metric_tensor)

__all__ = ["christoffel_fd", "koszul_derivative", "riemann_fd", "bracket_fd"]


def christoffel_fd(p, params: AmbientParams) -> np.ndarray:
    """Gamma[l, i, j] from central differences of g_ij (Koszul formula)."""
    q = _as_xyz(p)
    h = fd_step(q)
    dg = np.empty((3, 3, 3))  # dg[k] = d g / d x_k
    for k in range(3):
        e = np.zeros(3)
        e[k] = h
        dg[k] = (metric_tensor(q + e, params) - metric_tensor(q - e, params)) / (2 * h)
    ginv = np.linalg.inv(metric_tensor(q, params))
    # lower[m, i, j] = (d_i g_mj + d_j g_mi - d_m g_ij) / 2
    lower = 0.5 * (np.einsum("imj->mij", dg) + np.einsum("jmi->mij", dg) - dg)
    return np.einsum("lm,mij->lij", ginv, lower)


def koszul_derivative(X: VectorField, Y: VectorField, p, params: AmbientParams) -> np.ndarray:
    """nabla_X Y = DY.X + Gamma(X, Y) with the differenced Christoffel symbols."""
    q = _as_xyz(p)
    xv = X(q)
    return Y.jac(q) @ xv + np.einsum("lij,i,j->l", christoffel_fd(q, params), xv, Y(q))


def riemann_fd(X, Y, Z, p, params: AmbientParams) -> np.ndarray:
    """R(X,Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z for constant coordinate fields.

    The outer derivative differences ``covariant_derivative`` in space, so this
    checks the closed-form tensor against the connection it is built on.
    """
    q = _as_xyz(p)
    xc, yc, zc = (VectorField.constant(np.asarray(getattr(V, "array", V), dtype=float))
                  for V in (X, Y, Z))

    def inner(first):
        return VectorField(lambda r: covariant_derivative(first, zc, r, params).array)

    # [X, Y] = 0 for constant fields
    ny = inner(yc)
    nx = inner(xc)
    return (covariant_derivative(xc, ny, q, params).array
            - covariant_derivative(yc, nx, q, params).array)


def bracket_fd(X: VectorField, Y: VectorField, p) -> np.ndarray:
    """[X, Y] with both jacobians taken by central differences."""
    q = _as_xyz(p)
    h = fd_step(q)

    def jac(F):
        J = np.empty((3, 3))
        for k in range(3):
            e = np.zeros(3)
            e[k] = h
            J[:, k] = (F(q + e) - F(q - e)) / (2 * h)
        return J

    return jac(Y) @ X(q) - jac(X) @ Y(q)
