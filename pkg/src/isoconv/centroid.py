"""Empirical L_p-centroid bodies.

For a SampleSet X = {x_1..x_N} and p >= 1, the body Z_p(X) has support

    h(theta) = ( (1/N) sum_i |<x_i, theta>|^p )^{1/p},

a norm in theta, so Z_p is always an origin-symmetric convex body.  All the
classical inclusion/projection identities hold EXACTLY at the empirical level
(power-mean inequality, <x, theta> = <P_F x, theta> for theta in F), which is
what the deterministic checks below exploit: no tolerance debates, just
floating-point round-off.

Large p is evaluated in the log domain; zero dot products drop out of the
log-sum-exp but keep their 1/N mass, which is exactly the right thing since
0^p contributes nothing to the sum.
"""

from __future__ import annotations

import numpy as np
from scipy.special import logsumexp

from .bodies import ConvexBody
from .measures import SampleSet, project_samples
from .seeds import sphere_directions

P_CAP = float(2**20)
_LOG_DOMAIN_P = 32.0
_DOT_BLOCK = 1 << 24  # cap on N * directions-per-block scratch size


def zp_support(samples: SampleSet, p: float, directions: np.ndarray) -> np.ndarray:
    """h_{Z_p}(theta) for one direction (dim,) or a batch (m, dim).

    Direct power mean for p <= 32; log-mean-exp above that (overflow-safe up
    to the p cap).  A direction orthogonal to every sample gives 0.
    """
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if p > P_CAP:
        raise ValueError(f"p = {p:g} exceeds the cap {P_CAP:g}")
    theta = np.asarray(directions, dtype=float)
    single = theta.ndim == 1
    if single:
        theta = theta[None, :]
    if theta.shape[1] != samples.dim:
        raise ValueError(
            f"directions have dim {theta.shape[1]}, samples have dim {samples.dim}"
        )
    pts = samples.points
    n = samples.count
    out = np.empty(theta.shape[0])
    block = max(1, _DOT_BLOCK // n)
    log_n = np.log(n)
    for start in range(0, theta.shape[0], block):
        dots = pts @ theta[start : start + block].T  # (N, b)
        if p <= _LOG_DOMAIN_P:
            vals = (np.abs(dots) ** p).mean(axis=0) ** (1.0 / p)
        else:
            with np.errstate(divide="ignore"):
                logs = p * np.log(np.abs(dots))  # zeros -> -inf, dropped by lse
            lse = logsumexp(logs, axis=0)
            vals = np.exp((lse - log_n) / p)
        out[start : start + block] = vals
    return out[0] if single else out


def zp_touching_points(samples: SampleSet, p: float, directions: np.ndarray) -> np.ndarray:
    """Boundary point of Z_p touching the supporting hyperplane of each direction.

    For a differentiable support function the touching point is grad h; here
    grad h_{Z_p}(theta) = h^{1-p} (1/N) sum |<x,theta>|^{p-1} sign(<x,theta>) x,
    which normalizes to (h/M) X^T w / sum|u|^p with u = dots/M, M = max|dots|,
    so powers only ever underflow.  Convex hulls of these points are inner
    approximations of Z_p (the dual of the support-hull outer estimate).
    """
    if p < 1 or p > P_CAP:
        raise ValueError(f"p must be in [1, {P_CAP:g}], got {p}")
    theta = np.asarray(directions, dtype=float)
    if theta.ndim != 2 or theta.shape[1] != samples.dim:
        raise ValueError("directions must be (m, dim)")
    pts = samples.points
    n = samples.count
    out = np.empty_like(theta)
    block = max(1, _DOT_BLOCK // n)
    for start in range(0, theta.shape[0], block):
        dots = pts @ theta[start : start + block].T  # (N, b)
        scale = np.abs(dots).max(axis=0)
        if np.any(scale == 0):
            raise ValueError("a direction is orthogonal to every sample")
        u = dots / scale
        wp = np.abs(u) ** p
        h = scale * (wp.mean(axis=0)) ** (1.0 / p)
        wpm1 = np.abs(u) ** (p - 1.0) * np.sign(u)
        touch = (pts.T @ wpm1) / wp.sum(axis=0) * (h / scale)  # (dim, b)
        out[start : start + block] = touch.T
    return out


def centroid_body(samples: SampleSet, p: float) -> ConvexBody:
    """Z_p of the empirical measure, as a support-oracle body."""
    if p < 1 or p > P_CAP:
        raise ValueError(f"p must be in [1, {P_CAP:g}], got {p}")

    def sup(theta):
        return zp_support(samples, p, theta)

    return ConvexBody(
        dim=samples.dim,
        support=sup,
        membership=None,
        family=f"zp(p={p:g}, N={samples.count})",
        symmetric=True,
    )


def zp_monotonicity_check(
    samples: SampleSet, p: float, q: float, directions: np.ndarray
) -> float:
    """Max violation of h_{Z_p} <= h_{Z_q} over the directions; p <= q.

    The power-mean inequality is exact on the empirical measure, so the
    return value is round-off, < 1e-12 relative.  Positive return = violation.
    """
    if not 1 <= p <= q:
        raise ValueError(f"need 1 <= p <= q, got p={p}, q={q}")
    h_p = zp_support(samples, p, directions)
    h_q = zp_support(samples, q, directions)
    scale = np.maximum(h_q, 1e-300)
    return float(((h_p - h_q) / scale).max())


def borell_ratio(
    samples: SampleSet, p: float, q: float, directions: np.ndarray
) -> float:
    """Max over directions of h_{Z_q}(theta) / ((q/p) h_{Z_p}(theta)).

    Empirical estimate of the constant in the reverse inclusion
    Z_q subset C (q/p) Z_p; recorded, never asserted (C is not pinned).
    """
    if not 1 <= p <= q:
        raise ValueError(f"need 1 <= p <= q, got p={p}, q={q}")
    h_p = zp_support(samples, p, directions)
    h_q = zp_support(samples, q, directions)
    if np.any(h_p <= 0):
        raise ValueError("degenerate denominator: h_{Z_p} vanishes in a tested direction")
    return float((h_q / ((q / p) * h_p)).max())


def projection_identity_check(
    samples: SampleSet, p: float, subspace, directions: np.ndarray
) -> float:
    """Max relative deviation of h_{Z_p(S)}(theta) vs h_{Z_p(pi_F S)}(u).

    directions may be given in subspace coordinates (m, k) -- lifted to
    theta = B u -- or as ambient vectors (m, n) that must already lie in F.
    The identity <x, B u> = <B^T x, u> is exact, so deviation is round-off.
    """
    basis = np.asarray(subspace.basis if hasattr(subspace, "basis") else subspace, float)
    ambient, k = basis.shape
    theta = np.asarray(directions, dtype=float)
    if theta.ndim == 1:
        theta = theta[None, :]
    if theta.shape[1] == ambient:
        u = theta @ basis
        lifted = u @ basis.T
        off = np.abs(theta - lifted).max()
        if off > 1e-10:
            raise ValueError(
                f"a direction lies outside the subspace (component {off:g} off F)"
            )
        ambient_dirs = theta
    elif theta.shape[1] == k:
        u = theta
        ambient_dirs = u @ basis.T
    else:
        raise ValueError(
            f"directions have dim {theta.shape[1]}; expected {k} (in-F coords) or {ambient}"
        )
    h_full = zp_support(samples, p, ambient_dirs)
    h_proj = zp_support(project_samples(samples, basis), p, u)
    scale = np.maximum(np.maximum(h_full, h_proj), 1e-300)
    return float((np.abs(h_full - h_proj) / scale).max())


def z2_deviation_from_ball(samples: SampleSet, n_directions: int, seed: int) -> float:
    """max over unit directions of |h_{Z_2}(theta) - 1|.

    For a whitened SampleSet this is round-off: h_{Z_2}^2 is the quadratic
    form of the second-moment matrix, which whitening makes exactly I.
    """
    dirs = sphere_directions(samples.dim, n_directions, seed)
    return float(np.abs(zp_support(samples, 2.0, dirs) - 1.0).max())


def zn_vs_symhull(
    body: ConvexBody, n_samples: int, n_directions: int, seed: int
):
    """(min, max) over directions of h_{Z_n(uniform on K)} / h_{conv(K u -K)}.

    K should be unit-volume so the uniform measure is the natural one; dim n
    plays the role of p.  Both ratios are recorded (the comparison holds up
    to dimension-free constants, never asserted at a fixed value).
    """
    from .bodies import sym_hull
    from .measures import draw_samples, uniform_body_measure
    from .seeds import child_seed

    n = body.dim
    mu = uniform_body_measure(body)
    samples = draw_samples(mu, n_samples, child_seed(seed, 0))
    dirs = sphere_directions(n, n_directions, child_seed(seed, 1))
    h_zn = zp_support(samples, float(n), dirs)
    h_hull = sym_hull(body).support(dirs)
    ratios = h_zn / h_hull
    return float(ratios.min()), float(ratios.max())
