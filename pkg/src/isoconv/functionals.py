"""Mean width, entropy numbers, and the bound expressions under test.

Conventions that hold throughout: every unnamed constant in a bound
expression is taken as 1, so bound values are shape profiles, not certified
majorants -- the harness fits effective constants by ratio and checks that
the fit transfers.  The Rademacher-projection norm of a body is not
computable from oracles; RadModel supplies the standard surrogates (1,
log(1+min(k,p)), sqrt(log(1+k)), a constant) and results record which one
was used.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .bodies import ConvexBody, UnsupportedOracleError
from .estimates import Estimate
from .grassmann import VOLUME_DIM_CAP, volume_radius_lowdim
from .seeds import child_seed, rng_from, sphere_directions

DEFAULT_SPHERE_SAMPLES = 10_000

_RAD_KINDS = ("unit", "log-min", "sqrt-log", "constant")


@dataclass(frozen=True)
class RadModel:
    """Surrogate for the Rademacher-projection norm; nonnegative, nondecreasing in k."""

    kind: str
    c: float = 1.0

    def __post_init__(self):
        if self.kind not in _RAD_KINDS:
            raise ValueError(f"RadModel kind must be one of {_RAD_KINDS}, got {self.kind!r}")
        if self.kind == "constant" and self.c <= 0:
            raise ValueError(f"constant RadModel needs c > 0, got {self.c}")

    def value(self, k: int, p=None) -> float:
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        if self.kind == "unit":
            return 1.0
        if self.kind == "log-min":
            m = k if p is None else min(k, p)
            return math.log(1.0 + m)
        if self.kind == "sqrt-log":
            return math.sqrt(math.log(1.0 + k))
        return self.c


def parse_rad_model(text: str) -> RadModel:
    """`unit`, `log-min`, `sqrt-log`, or `constant:<c>`."""
    parts = text.strip().split(":")
    kind = parts[0].lower()
    if kind == "constant":
        if len(parts) != 2:
            raise ValueError("constant RadModel needs a value, e.g. constant:2.5")
        return RadModel("constant", float(parts[1]))
    if len(parts) != 1:
        raise ValueError(f"unexpected parameter for RadModel {kind!r}")
    return RadModel(kind)


# ---------------------------------------------------------------------------
# mean width
# ---------------------------------------------------------------------------


def mean_width(
    body: ConvexBody, sphere_samples: int = DEFAULT_SPHERE_SAMPLES, seed: int = 0
) -> Estimate:
    """(Half) mean width M*(K): average of h_K over the uniform sphere.

    Balls short-circuit to the exact value M* = radius.  Everything else is
    Monte Carlo over seeded directions, value +- SE.  Linearity M*(tK) =
    t M*(K) is exact on matched seeds since the direction set is identical.
    """
    if "ball_radius" in body.analytic:
        return Estimate(float(body.analytic["ball_radius"]), 0.0, 0, seed, "exact")
    if sphere_samples < 100:
        raise ValueError(f"need sphere_samples >= 100, got {sphere_samples}")
    dirs = sphere_directions(body.dim, sphere_samples, seed)
    h = np.asarray(body.support(dirs), dtype=float)
    value = float(h.mean())
    se = float(h.std(ddof=1) / math.sqrt(sphere_samples))
    return Estimate(value, se, sphere_samples, seed, "mc")


def urysohn_check(
    body: ConvexBody,
    sphere_samples: int = DEFAULT_SPHERE_SAMPLES,
    seed: int = 0,
    volume_method: str = "auto",
):
    """M*(K) >= volrad(K) with Monte Carlo slack.

    Returns (mstar, volrad, passed); passed iff value + 3*(sum of SEs) covers
    the volume radius.  Only meaningful in dims where volumes are computable.
    """
    mstar = mean_width(body, sphere_samples, child_seed(seed, 0))
    vr = volume_radius_lowdim(body, method=volume_method, seed=child_seed(seed, 1))
    slack = 3.0 * (mstar.std_error + vr.std_error)
    return mstar, vr, bool(mstar.value + slack >= vr.value)


# ---------------------------------------------------------------------------
# entropy numbers (low-dimensional, bounds only)
# ---------------------------------------------------------------------------

ENTROPY_DIM_CAP = 4


def _body_grid_cloud(body: ConvexBody, step: float):
    """Grid points of spacing `step` inside the body, plus a covering slack.

    Any x in K has a cloud point within slack = (step*sqrt(k)/2)(1 + R/r):
    shrink x toward the origin by step*sqrt(k)/(2r) so a full grid cell fits
    inside K around it (r = inradius, R = circumradius, origin interior).
    """
    if body.membership is None:
        raise UnsupportedOracleError(
            f"greedy covering needs a membership oracle; family {body.family!r} has none"
        )
    r_in = body.analytic.get("inradius")
    if r_in is None or r_in <= 0:
        raise ValueError("greedy covering needs a positive analytic inradius")
    k = body.dim
    eye = np.eye(k)
    hi = np.asarray(body.support(eye), dtype=float)
    lo = -np.asarray(body.support(-eye), dtype=float)
    axes = [np.arange(lo[j], hi[j] + step, step) for j in range(k)]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    inside = np.asarray(body.membership(pts), dtype=bool)
    cloud = pts[inside]
    if cloud.shape[0] == 0:
        raise ValueError("grid too coarse: no points landed inside the body")
    r_circ = float(np.linalg.norm(cloud, axis=1).max())
    slack = 0.5 * step * math.sqrt(k) * (1.0 + r_circ / r_in)
    return cloud, slack


def _greedy_covering_radii(cloud: np.ndarray, n_centers: int, seed: int) -> np.ndarray:
    """Farthest-point greedy: radii[j] = cloud covering radius with j+1 centers."""
    m = cloud.shape[0]
    first = int(rng_from(seed).integers(0, m))
    d2 = ((cloud - cloud[first]) ** 2).sum(axis=1)
    radii = np.empty(min(n_centers, m))
    radii[0] = math.sqrt(float(d2.max()))
    for j in range(1, len(radii)):
        nxt = int(np.argmax(d2))
        d2 = np.minimum(d2, ((cloud - cloud[nxt]) ** 2).sum(axis=1))
        radii[j] = math.sqrt(float(d2.max()))
    if len(radii) < n_centers:
        radii = np.concatenate([radii, np.zeros(n_centers - len(radii))])
    return radii


def entropy_numbers(
    body: ConvexBody,
    j_max: int,
    step: float = 0.05,
    seed: int = 0,
    volume_method: str = "auto",
):
    """Upper/lower brackets on e_j(K) for j = 1..j_max, dim <= 4.

    Upper: greedy farthest-point covering of a grid cloud with 2^j centers,
    plus the grid fill slack.  Lower: the volumetric estimate
    e_j >= volrad(K) / 2^{j/k} in ambient dimension k.  Dimension 1 is exact:
    an interval of length L has e_j = L / 2^{j+1}.
    Returns a list of (j, upper Estimate, lower Estimate).
    """
    k = body.dim
    if k > ENTROPY_DIM_CAP:
        raise ValueError(f"entropy numbers capped at dim {ENTROPY_DIM_CAP}, got {k}")
    if j_max < 1:
        raise ValueError(f"need j_max >= 1, got {j_max}")
    out = []
    if k == 1:
        e = np.ones(1)
        length = float(body.support(e) + body.support(-e))
        for j in range(1, j_max + 1):
            exact = Estimate(length / 2 ** (j + 1), 0.0, 0, seed, "exact")
            out.append((j, exact, exact))
        return out
    cloud, slack = _body_grid_cloud(body, step)
    radii = _greedy_covering_radii(cloud, 2**j_max, child_seed(seed, 0))
    if volume_method == "auto":
        # the lower bound needs a volrad that is itself not an upper estimate
        volume_method = "analytic" if "volume" in body.analytic else "membership-mc"
    vr = volume_radius_lowdim(body, method=volume_method, seed=child_seed(seed, 1))
    for j in range(1, j_max + 1):
        upper = Estimate(
            float(radii[2**j - 1]) + slack, 0.0, cloud.shape[0], seed, "upper"
        )
        factor = 2.0 ** (-j / k)
        lower = Estimate(
            vr.value * factor, vr.std_error * factor, vr.n_samples, seed, "lower"
        )
        out.append((j, upper, lower))
    return out


# ---------------------------------------------------------------------------
# bound expressions (all constants = 1)
# ---------------------------------------------------------------------------


def _check_spectrum(spectrum) -> np.ndarray:
    lam = np.asarray(spectrum, dtype=float)
    if lam.ndim != 1 or lam.size < 1:
        raise ValueError("spectrum must be a non-empty 1-D array")
    if np.any(lam <= 0):
        raise ValueError("spectrum entries must be positive")
    if np.any(np.diff(lam) > 1e-12 * lam[0]):
        raise ValueError("spectrum must be sorted in descending order")
    return lam


def _check_p(p) -> float:
    p = float(p)
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    return p


def _warn_range(kind: str, t: float, lo: float, hi: float):
    if not lo <= t <= hi:
        warnings.warn(
            f"{kind}: t = {t:g} outside the stated range [{lo:g}, {hi:g}]; "
            "evaluating anyway",
            stacklevel=3,
        )


def bound_rhs(kind: str, **params) -> float:
    """Evaluate a named bound expression with every constant set to 1.

    Spectral kinds take `spectrum` = (lambda_1 >= ... >= lambda_n > 0), the
    square roots of the covariance eigenvalues.  Kinds:

    thm-main-product  rad * (1/sqrt(n)) * sum_k max(sqrt(p/k), p/k) * gmean(lam_1..lam_k)
    thm-main-arith    same with the arithmetic mean (1/k) sum_{i<=k} lam_i;
                      dominates the product form term-by-term (AM-GM), and is
                      nondecreasing in p like every thm-main variant
    prop31            sqrt(p/k) * max(sqrt(p), sqrt(k)) * gmean(lam_1..lam_k)
    mp-sum            sum_k rad(k, p) * v_k / sqrt(k)   (vk_values supplied)
    dudley-sum        sum_k e_k / sqrt(k)               (ek_values supplied)
    summary-piecewise four-regime M*(Z_p) profile in (n, p)
    sudakov           n * (mstar / t)^2            [log covering count]
    hartzoulaki       n * l_k / t                  [log count, t*sqrt(n) balls]
    gpv               n/t^2 + sqrt(n)*sqrt(p)/t    [log count, t*sqrt(p) balls]
    gpv-piecewise     three-regime refinement of gpv in t
    thm14             n * (rad_value*l_k/t)^2 * log^2(1 + t^2/(rad_value*l_k)^2)

    Out-of-range t warns and still evaluates; structural errors raise.
    """
    if kind in ("thm-main-product", "thm-main-arith"):
        lam = _check_spectrum(params["spectrum"])
        p = _check_p(params["p"])
        rad = params.get("rad") or RadModel("unit")
        n = lam.size
        k = np.arange(1, n + 1, dtype=float)
        weights = np.maximum(np.sqrt(p / k), p / k)
        if kind == "thm-main-product":
            means = np.exp(np.cumsum(np.log(lam)) / k)  # geometric means
        else:
            means = np.cumsum(lam) / k
        return rad.value(n, p) / math.sqrt(n) * float((weights * means).sum())
    if kind == "prop31":
        lam = _check_spectrum(params["spectrum"])
        p = _check_p(params["p"])
        k = int(params["k"])
        if not 1 <= k <= lam.size:
            raise ValueError(f"k must be in [1, {lam.size}], got {k}")
        gmean = float(np.exp(np.log(lam[:k]).mean()))
        return math.sqrt(p / k) * max(math.sqrt(p), math.sqrt(k)) * gmean
    if kind == "mp-sum":
        vk = np.asarray(params["vk_values"], dtype=float)
        rad = params.get("rad") or RadModel("unit")
        p = params.get("p")
        ks = np.arange(1, vk.size + 1)
        rv = np.array([rad.value(int(k), p) for k in ks])
        return float((rv * vk / np.sqrt(ks)).sum())
    if kind == "dudley-sum":
        ek = np.asarray(params["ek_values"], dtype=float)
        ks = np.arange(1, ek.size + 1, dtype=float)
        return float((ek / np.sqrt(ks)).sum())
    if kind == "summary-piecewise":
        n = int(params["n"])
        p = _check_p(params["p"])
        if p > n:
            warnings.warn(
                f"summary-piecewise: p = {p:g} beyond the stated range [1, n={n}]",
                stacklevel=2,
            )
        log2n = math.log(1.0 + n) ** 2
        if p <= math.sqrt(n):
            return math.sqrt(p)
        if p <= math.sqrt(n) * log2n:
            return p / n**0.25
        if p <= n / log2n:
            return math.sqrt(p) * math.log(1.0 + n)
        return p / math.sqrt(n) * log2n
    if kind == "sudakov":
        n, mstar, t = int(params["n"]), float(params["mstar"]), float(params["t"])
        if t <= 0:
            raise ValueError(f"t must be positive, got {t}")
        return n * (mstar / t) ** 2
    if kind == "hartzoulaki":
        n, l_k, t = int(params["n"]), float(params["l_k"]), float(params["t"])
        if t <= 0:
            raise ValueError(f"t must be positive, got {t}")
        return n * l_k / t
    if kind == "gpv":
        n, p, t = int(params["n"]), _check_p(params["p"]), float(params["t"])
        _warn_range("gpv", t, 1.0, math.sqrt(p))
        return n / t**2 + math.sqrt(n) * math.sqrt(p) / t
    if kind == "gpv-piecewise":
        n, p, t = int(params["n"]), _check_p(params["p"]), float(params["t"])
        log2n = math.log(1.0 + n) ** 2
        if p > n / log2n:
            warnings.warn(
                f"gpv-piecewise: p = {p:g} beyond the stated range "
                f"[1, n/log^2(1+n) = {n / log2n:g}]",
                stacklevel=2,
            )
        _warn_range("gpv-piecewise", t, 1.0, math.sqrt(p))
        t_mid = math.sqrt(n / p)
        if t <= t_mid:
            return n / t**2
        if t <= t_mid * log2n:
            return math.sqrt(n) * math.sqrt(p) / t
        return n * log2n / t**2
    if kind == "thm14":
        n = int(params["n"])
        rad_value, l_k, t = (
            float(params["rad_value"]),
            float(params["l_k"]),
            float(params["t"]),
        )
        if t <= 0 or rad_value <= 0 or l_k <= 0:
            raise ValueError("thm14 needs positive t, rad_value and l_k")
        _warn_range("thm14", t, rad_value * l_k, math.sqrt(n) * l_k)
        base = rad_value * l_k / t
        return n * base**2 * math.log(1.0 + 1.0 / base**2) ** 2
    raise ValueError(f"unknown bound kind {kind!r}")


# ---------------------------------------------------------------------------
# Milman--Pisier comparison
# ---------------------------------------------------------------------------


def mp_comparison(
    body: ConvexBody,
    rad: RadModel,
    trials: int,
    sphere_samples: int,
    seed: int,
    p=None,
    spectrum=None,
    k_cap: int = VOLUME_DIM_CAP,
    volume_method: str = "auto",
) -> dict:
    """sqrt(n) M*(K) against sum_k rad(k) v_k / sqrt(k), term provenance kept.

    v_k is measured (sampled sup of projection volume radii) for k <= k_cap
    or wherever projections have closed-form volumes; beyond that, terms are
    filled from the analytic projection bound when (p, spectrum) describe the
    body as a Z_p, and otherwise dropped with the report marked truncated.
    The ratio is recorded, never asserted: the comparison constant is unknown.
    """
    from .grassmann import vk_estimate  # local to keep module import one-way

    n = body.dim
    mstar = mean_width(body, sphere_samples, child_seed(seed, 0))
    lhs = math.sqrt(n) * mstar.value
    terms = []
    truncated = False
    for k in range(1, n + 1):
        # beyond k_cap only closed-form projection volumes are worth trying
        method = volume_method if k <= k_cap else "analytic"
        try:
            est = vk_estimate(body, k, trials, child_seed(seed, k), method=method)
            terms.append((k, rad.value(k, p) * est.value / math.sqrt(k), "measured"))
            continue
        except (ValueError, UnsupportedOracleError):
            pass
        if p is not None and spectrum is not None:
            v = bound_rhs("prop31", spectrum=spectrum, p=p, k=k)
            terms.append((k, rad.value(k, p) * v / math.sqrt(k), "analytic"))
        else:
            truncated = True
    measured = sum(v for _, v, src in terms if src == "measured")
    analytic = sum(v for _, v, src in terms if src == "analytic")
    rhs = measured + analytic
    return {
        "n": n,
        "lhs_sqrt_n_mstar": lhs,
        "mstar": mstar.value,
        "mstar_se": mstar.std_error,
        "rhs_sum": rhs,
        "rhs_measured_part": measured,
        "rhs_analytic_part": analytic,
        "ratio": rhs / lhs if lhs > 0 else math.inf,
        "terms": terms,
        "truncated": truncated,
        "rad_kind": rad.kind,
        "seed": seed,
    }
