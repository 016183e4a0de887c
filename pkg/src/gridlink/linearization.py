"""State Jacobian at the operating point and its spectral abscissa.

The Jacobian is assembled in block form [[0, I], [coupling + control,
damping]] over (d delta, d omega).  All blocks are exact partial derivatives
of the implemented swing right-hand side, so finite differences of the
dynamics must reproduce them entry for entry.  Stability is judged by
alpha_max, the largest real part over the spectrum after deflating the
structural zero mode that comes from uniform-angle-shift invariance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from gridlink.dynamics import ControlConfig, uniform_control
from gridlink.model import SystemModel
from gridlink.reduction import ReducedNetwork


@dataclass(frozen=True)
class JacobianBlocks:
    coupling: np.ndarray  # (n, n) network block, 1/s^2
    control: np.ndarray  # (n, n) link-feedback block, 1/s^2
    damping: np.ndarray  # (n, n) diagonal -d_i/m_i, 1/s
    assembled: np.ndarray  # (2n, 2n)


@dataclass(frozen=True)
class SpectrumReport:
    eigenvalues: np.ndarray  # (2n,) complex, sorted by descending real part
    alpha_max: float  # max real part over the retained spectrum, 1/s
    deflated: bool  # True when the structural zero mode was removed
    deflated_magnitude: float | None  # |lambda| of the removed eigenvalue


def coupling_matrix(net: ReducedNetwork, delta_s: np.ndarray, m: np.ndarray) -> np.ndarray:
    """Angle-coupling block: d(d omega_i/dt)/d delta_k of the uncontrolled dynamics.

    Off-diagonal (c cos - d sin)/m_i at the equilibrium angle differences;
    the diagonal is minus the row sum, so rows annihilate the all-ones vector
    exactly.
    """
    delta_s = np.asarray(delta_s, dtype=float)
    m = np.asarray(m, dtype=float)
    dd = delta_s[:, None] - delta_s[None, :]
    t = (net.c * np.cos(dd) - net.d * np.sin(dd)) / m[:, None]
    np.fill_diagonal(t, 0.0)
    np.fill_diagonal(t, -t.sum(axis=1))
    return t


def control_matrix(ctl: ControlConfig, m: np.ndarray) -> np.ndarray:
    """Link-feedback block: -h_ik/m_i off-diagonal, row-sum-zero diagonal.

    With negative gains this is a weighted Laplacian scaled by 1/m_i:
    negative diagonal, positive off-diagonals.
    """
    m = np.asarray(m, dtype=float)
    n = m.size
    k = np.zeros((n, n))
    for link in ctl.links:
        i, j = link
        h = ctl.gains[link]
        k[i, j] += -h / m[i]
        k[j, i] += -h / m[j]
        k[i, i] += h / m[i]
        k[j, j] += h / m[j]
    return k


def damping_matrix(d: np.ndarray, m: np.ndarray) -> np.ndarray:
    """Diagonal block with entries -d_i/m_i."""
    return np.diag(-np.asarray(d, dtype=float) / np.asarray(m, dtype=float))


def assemble_jacobian(coupling: np.ndarray, control: np.ndarray, damping: np.ndarray) -> np.ndarray:
    """[[0, I], [coupling + control, damping]] over (d delta, d omega)."""
    n = coupling.shape[0]
    if coupling.shape != (n, n) or control.shape != (n, n) or damping.shape != (n, n):
        raise ValueError("blocks must be square and conformable")
    return np.block(
        [
            [np.zeros((n, n)), np.eye(n)],
            [coupling + control, damping],
        ]
    )


def jacobian_blocks(model: SystemModel, ctl: ControlConfig) -> JacobianBlocks:
    coupling = coupling_matrix(model.net, model.op.delta_s, model.m)
    control = control_matrix(ctl, model.m)
    damping = damping_matrix(model.d, model.m)
    return JacobianBlocks(
        coupling=coupling,
        control=control,
        damping=damping,
        assembled=assemble_jacobian(coupling, control, damping),
    )


def spectral_abscissa(j: np.ndarray, deflate: bool = True, zero_tol: float | None = None) -> SpectrumReport:
    """Eigenvalues of the assembled Jacobian and alpha_max of the retained set.

    With ``deflate`` the single smallest-magnitude eigenvalue is removed from
    the alpha computation, provided it is below ``zero_tol`` (default
    1e-8 * ||j||_2) and its eigenvector aligns with the uniform angle shift
    [1_n; 0_n] (cosine >= 0.99).  When no eigenvalue qualifies the report
    carries deflated=False and alpha_max covers the whole spectrum.
    """
    j = np.asarray(j, dtype=float)
    if not np.all(np.isfinite(j)):
        raise ValueError("Jacobian has non-finite entries")
    two_n = j.shape[0]
    if j.shape != (two_n, two_n) or two_n % 2 != 0:
        raise ValueError(f"expected a square 2n x 2n matrix, got {j.shape}")
    n = two_n // 2
    if zero_tol is None:
        zero_tol = 1e-8 * np.linalg.norm(j, 2)
    elif zero_tol <= 0:
        raise ValueError("zero_tol must be positive")

    eigvals, eigvecs = np.linalg.eig(j)
    order = np.lexsort((-eigvals.imag, -eigvals.real))
    eigvals = eigvals[order]
    eigvecs = eigvecs[:, order]

    deflated = False
    deflated_magnitude: float | None = None
    keep = np.ones(two_n, dtype=bool)
    if deflate:
        idx = int(np.argmin(np.abs(eigvals)))
        shift = np.zeros(two_n)
        shift[:n] = 1.0 / np.sqrt(n)
        vec = eigvecs[:, idx]
        cosine = abs(np.vdot(vec, shift)) / np.linalg.norm(vec)
        if abs(eigvals[idx]) <= zero_tol and cosine >= 0.99:
            keep[idx] = False
            deflated = True
            deflated_magnitude = float(abs(eigvals[idx]))
    alpha = float(np.max(eigvals[keep].real))
    return SpectrumReport(
        eigenvalues=eigvals, alpha_max=alpha, deflated=deflated, deflated_magnitude=deflated_magnitude
    )


def alpha_for_links(model: SystemModel, links, gain: float, deflate: bool = True) -> float:
    """alpha_max of the system with the given link set at one common gain."""
    ctl = uniform_control(links, gain, model.op.delta_s)
    blocks = jacobian_blocks(model, ctl)
    return spectral_abscissa(blocks.assembled, deflate=deflate).alpha_max
