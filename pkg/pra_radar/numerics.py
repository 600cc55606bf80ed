"""
Numerical Kernels
=================

Small self-contained kernels shared by the model, the bound and the
optimizer: composite Gauss-Legendre quadrature over the prior support,
weighted matrix integration, the strongest eigenpair of a Hermitian PSD
matrix and the Kronecker product.

All functions are pure; returned arrays are fresh copies.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss

logger = logging.getLogger(__name__)

# Complex 2-D numpy array; the alias only documents intent
ComplexMatrix = np.ndarray

# Half-width of the integration window around each mixture mean, in σ
SUPPORT_SIGMAS = 8.0

# B <- B² renormalized, applied this many times before power iterating
_SQUARINGS = 5

# Power steps without halving the residual before switching to Rayleigh-Ritz
_STALL_WINDOW = 64

# Block width of the Rayleigh-Ritz phase
_RITZ_BLOCK = 4


class ConvergenceError(RuntimeError):
    """Raised when an iterative kernel stops before meeting its tolerance"""

    def __init__(self, message: str, eigenvalue: float, eigenvector: np.ndarray):
        super().__init__(message)
        self.eigenvalue = eigenvalue
        self.eigenvector = eigenvector


@dataclass(frozen=True)
class QuadratureRule:
    """
    Composite quadrature rule over a union of disjoint intervals.

    Attributes:
        nodes: Abscissae in radians, ascending
        weights: Strictly positive weights, one per node
        segments: Merged integration intervals (a, b) in radians
    """
    nodes: np.ndarray
    weights: np.ndarray
    segments: Tuple[Tuple[float, float], ...]

    @property
    def total_length(self) -> float:
        return float(sum(b - a for a, b in self.segments))

    def integrate(self, values: np.ndarray) -> np.ndarray:
        """Integrate samples taken at ``nodes`` along the leading axis"""
        values = np.asarray(values)
        if values.shape[0] != self.nodes.shape[0]:
            raise ValueError(
                f"expected {self.nodes.shape[0]} samples along axis 0, got {values.shape[0]}"
            )
        return np.tensordot(self.weights, values, axes=(0, 0))


def _merge_intervals(intervals: List[Tuple[float, float, float]]) -> List[Tuple[float, float, float]]:
    """Merge overlapping (a, b, sigma) intervals, keeping the smallest sigma"""
    merged: List[Tuple[float, float, float]] = []
    for a, b, sigma in sorted(intervals):
        if merged and a <= merged[-1][1]:
            prev_a, prev_b, prev_sigma = merged[-1]
            merged[-1] = (prev_a, max(prev_b, b), min(prev_sigma, sigma))
        else:
            merged.append((a, b, sigma))
    return merged


def make_quadrature(prior, nodes_per_segment: int = 64) -> QuadratureRule:
    """
    Build the θ-integration rule for a Gaussian-mixture prior.

    The support is the union of [μ_k − 8σ_k, μ_k + 8σ_k]; overlapping windows
    are merged. Each merged segment is cut into equal panels no wider than the
    smallest σ_k it contains, and each panel gets ``nodes_per_segment``
    Gauss-Legendre nodes.

    Args:
        prior: PriorModel with K ≥ 1 components
        nodes_per_segment: Gauss-Legendre nodes per panel (≥ 2)

    Returns:
        QuadratureRule: nodes, weights and merged segments

    Raises:
        ValueError: if nodes_per_segment < 2 or a variance is not positive
    """
    if nodes_per_segment < 2:
        raise ValueError(f"nodes_per_segment must be >= 2, got {nodes_per_segment}")

    windows = []
    for component in prior.components:
        if component.variance <= 0:
            raise ValueError(f"component variance must be positive, got {component.variance}")
        sigma = math.sqrt(component.variance)
        windows.append((component.mean - SUPPORT_SIGMAS * sigma, component.mean + SUPPORT_SIGMAS * sigma, sigma))

    ref_nodes, ref_weights = leggauss(nodes_per_segment)

    nodes, weights, segments = [], [], []
    for a, b, sigma in _merge_intervals(windows):
        n_panels = max(1, math.ceil((b - a) / sigma - 1e-9))
        edges = np.linspace(a, b, n_panels + 1)
        for lo, hi in zip(edges[:-1], edges[1:]):
            half = 0.5 * (hi - lo)
            nodes.append(0.5 * (hi + lo) + half * ref_nodes)
            weights.append(half * ref_weights)
        segments.append((float(a), float(b)))

    rule = QuadratureRule(
        nodes=np.concatenate(nodes),
        weights=np.concatenate(weights),
        segments=tuple(segments),
    )
    logger.debug(f"Quadrature: {len(segments)} segment(s), {rule.nodes.size} nodes, length {rule.total_length:.6g}")
    return rule


def integrate_matrix(rule: QuadratureRule, f: Callable[[float], np.ndarray]) -> ComplexMatrix:
    """
    Weighted sum Σ_i w_i f(node_i) for a matrix-valued integrand.

    Raises:
        ValueError: if f changes shape across nodes
    """
    samples = []
    shape = None
    for theta in rule.nodes:
        value = np.asarray(f(float(theta)))
        if shape is None:
            shape = value.shape
        elif value.shape != shape:
            raise ValueError(f"integrand shape changed from {shape} to {value.shape} at θ={theta}")
        samples.append(value)
    return rule.integrate(np.stack(samples))


def _nudge(x: np.ndarray, attempt: int) -> np.ndarray:
    """Deterministic perturbation used when the iterate collapses"""
    n = x.shape[0]
    phases = np.exp(1j * (np.arange(1, n + 1) * (1.0 + attempt) * 0.6180339887498949))
    y = x + 1e-3 * phases / math.sqrt(n)
    return y / np.linalg.norm(y)


def _converged(res: float, lam: float, tol: float, norm: float) -> bool:
    return res <= tol * max(lam, 0.0) or res <= 1e-14 * norm


def _ritz_top_pair(
    h: np.ndarray, accel: np.ndarray, x: np.ndarray, tol: float, norm: float, max_iter: int
) -> Tuple[float, np.ndarray, float, bool]:
    """
    Block power iteration with a Rayleigh-Ritz step on each pass.

    Resolves clustered top eigenvalues, where any vector of the cluster is a
    valid answer but single-vector iteration stalls at a residual of the
    order of the gap.
    """
    n = h.shape[0]
    k = min(n, _RITZ_BLOCK)
    identity = np.eye(n, dtype=complex)
    start = np.column_stack([x] + [_nudge(identity[:, j], j) for j in range(k - 1)])
    basis, _ = np.linalg.qr(start)

    lam, vec, res = 0.0, x, np.inf
    for _ in range(max_iter):
        basis, _ = np.linalg.qr(accel @ basis)
        projected = basis.conj().T @ h @ basis
        _, ritz_vecs = np.linalg.eigh(0.5 * (projected + projected.conj().T))
        vec = basis @ ritz_vecs[:, -1]
        vec /= np.linalg.norm(vec)
        hv = h @ vec
        lam = float(np.real(np.vdot(vec, hv)))
        res = float(np.linalg.norm(hv - lam * vec))
        if _converged(res, lam, tol, norm):
            return lam, vec, res, True
        # strongest Ritz vector first
        basis = basis @ ritz_vecs[:, ::-1]
    return lam, vec, res, False


def top_hermitian_eigenpair(h: ComplexMatrix, tol: float = 1e-10, max_iter: int = 10_000) -> Tuple[float, np.ndarray]:
    """
    Strongest eigenpair of a Hermitian PSD matrix by power iteration.

    The iteration runs on a repeatedly squared (and renormalized) copy of H,
    which has the same eigenvectors and a much larger spectral gap; the
    convergence test is the residual against H itself. The start vector is
    the normalized all-ones vector, slightly perturbed (deterministic).

    When the residual stops improving (near-equal top eigenvalues) the
    search switches to a block iteration with Rayleigh-Ritz extraction,
    which returns some eigenvector of the top cluster.

    Args:
        h: Square Hermitian PSD matrix
        tol: Relative residual tolerance, ‖Hv − λv‖ ≤ tol·λ
        max_iter: Iteration limit of each phase

    Returns:
        tuple: (λ_max, unit eigenvector)

    Raises:
        ValueError: non-square or non-Hermitian input
        ConvergenceError: tolerance not met by either phase
    """
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {h.shape}")

    n = h.shape[0]
    scale = max(1.0, float(np.max(np.abs(h)))) if h.size else 1.0
    if np.max(np.abs(h - h.conj().T), initial=0.0) > 1e-10 * scale:
        raise ValueError("matrix is not Hermitian")
    h = 0.5 * (h + h.conj().T)

    # all-ones with a small phase ramp: structured matrices can have the
    # plain all-ones vector as a lower eigenvector
    x = _nudge(np.ones(n, dtype=complex) / math.sqrt(n), 0)
    norm = np.linalg.norm(h)
    if norm <= tol:
        return 0.0, x

    accel = h / norm
    for _ in range(_SQUARINGS):
        accel = accel @ accel
        accel = 0.5 * (accel + accel.conj().T)
        accel /= np.linalg.norm(accel)

    lam, res = 0.0, np.inf
    best_res, stalled = np.inf, 0
    for it in range(max_iter):
        y = accel @ x
        y_norm = np.linalg.norm(y)
        if y_norm < 1e-300:
            x = _nudge(x, it)
            continue
        x = y / y_norm
        hx = h @ x
        lam = float(np.real(np.vdot(x, hx)))
        res = float(np.linalg.norm(hx - lam * x))
        if _converged(res, lam, tol, norm):
            return lam, x
        if res < 0.5 * best_res:
            best_res, stalled = res, 0
        else:
            stalled += 1
            if stalled >= _STALL_WINDOW:
                break

    if max_iter > 0:
        logger.debug(f"power iteration stalled at residual {res:.3e} (λ={lam:.6g}); trying Rayleigh-Ritz")
        ritz_lam, ritz_vec, ritz_res, ok = _ritz_top_pair(h, accel, x, tol, norm, max_iter)
        if ok:
            return ritz_lam, ritz_vec
        if ritz_res < res:
            lam, x, res = ritz_lam, ritz_vec, ritz_res

    raise ConvergenceError(
        f"power iteration did not converge in {max_iter} iterations (residual {res:.3e}, λ={lam:.6g})",
        lam,
        x,
    )


def kron(a: ComplexMatrix, b: ComplexMatrix) -> ComplexMatrix:
    """Standard Kronecker product, shape (rA·rB) × (cA·cB)"""
    return np.kron(np.atleast_2d(a), np.atleast_2d(b))
