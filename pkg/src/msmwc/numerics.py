"""Bregman divergences and the constrained mirror-descent solves.

Everything here is a pure function of its arguments. Entropic solves work in
log space so that rates spanning many orders of magnitude do not overflow.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class NumericalError(RuntimeError):
    """A solve did not reach its residual target."""


class ConfigurationError(ValueError):
    """Inputs violate a structural precondition (empty active set, bad metric...)."""


class DomainError(ValueError):
    """A comparator has mass where the reference point has none."""


# ---------------------------------------------------------------------------
# domains
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConvexDomain:
    """Euclidean ball or axis-aligned box.

    Use :meth:`ball` / :meth:`box` rather than the raw constructor.
    """

    kind: str
    center: np.ndarray
    radius: float = 0.0
    lower: np.ndarray | None = field(default=None)
    upper: np.ndarray | None = field(default=None)

    @classmethod
    def ball(cls, center, radius: float) -> "ConvexDomain":
        center = np.asarray(center, dtype=float)
        if radius <= 0:
            raise ConfigurationError("ball radius must be positive")
        return cls("ball", center, float(radius))

    @classmethod
    def box(cls, lower, upper) -> "ConvexDomain":
        lower = np.asarray(lower, dtype=float)
        upper = np.asarray(upper, dtype=float)
        if lower.shape != upper.shape or np.any(upper <= lower):
            raise ConfigurationError("box needs lower < upper coordinate-wise")
        return cls("box", 0.5 * (lower + upper), 0.0, lower, upper)

    @property
    def dim(self) -> int:
        return int(self.center.shape[0])

    @property
    def diameter(self) -> float:
        if self.kind == "ball":
            return 2.0 * self.radius
        return float(np.linalg.norm(self.upper - self.lower))

    def contains(self, x, tol: float = 1e-9) -> bool:
        x = np.asarray(x, dtype=float)
        if self.kind == "ball":
            return bool(np.linalg.norm(x - self.center) <= self.radius * (1 + tol) + tol)
        return bool(np.all(x >= self.lower - tol) and np.all(x <= self.upper + tol))

    def project(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        if self.kind == "ball":
            diff = y - self.center
            n = np.linalg.norm(diff)
            if n <= self.radius:
                return y.copy()
            return self.center + diff * (self.radius / n)
        return np.clip(y, self.lower, self.upper)

    def project_many(self, Y: np.ndarray) -> np.ndarray:
        """Row-wise projection of a (n, d) array."""
        Y = np.asarray(Y, dtype=float)
        if self.kind == "ball":
            diff = Y - self.center
            n = np.linalg.norm(diff, axis=1)
            scale = np.where(n > self.radius, self.radius / np.maximum(n, 1e-300), 1.0)
            return self.center + diff * scale[:, None]
        return np.clip(Y, self.lower, self.upper)

    def to_dict(self) -> dict:
        if self.kind == "ball":
            return {"kind": "ball", "center": self.center.tolist(), "radius": self.radius}
        return {"kind": "box", "lower": self.lower.tolist(), "upper": self.upper.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "ConvexDomain":
        if d["kind"] == "ball":
            return cls.ball(d["center"], d["radius"])
        if d["kind"] == "box":
            return cls.box(d["lower"], d["upper"])
        raise ConfigurationError(f"unknown domain kind {d['kind']!r}")


# ---------------------------------------------------------------------------
# divergences
# ---------------------------------------------------------------------------


def _entropy_terms(w, w_ref, log_w=None, log_w_ref=None) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    w_ref = np.asarray(w_ref, dtype=float)
    if w.shape != w_ref.shape:
        raise ValueError("shape mismatch")
    if not (np.all(np.isfinite(w)) and np.all(np.isfinite(w_ref))):
        raise ValueError("non-finite entries")
    pos = w > 0
    lw = np.log(w[pos]) if log_w is None else np.asarray(log_w, dtype=float)[pos]
    lr = None
    if log_w_ref is None:
        if np.any(pos & (w_ref <= 0)):
            raise DomainError("w has mass outside the support of the reference point")
        lr = np.log(w_ref[pos])
    else:
        lr = np.asarray(log_w_ref, dtype=float)[pos]
        if not np.all(np.isfinite(lr)):
            raise DomainError("w has mass outside the support of the reference point")
    terms = w_ref - w
    terms[pos] += w[pos] * (lw - lr)
    return terms


def kl_divergence(w, w_ref) -> float:
    """Unnormalised KL: sum_i w_i log(w_i / w'_i) - w_i + w'_i, with 0 log 0 = 0."""
    return float(np.sum(_entropy_terms(w, w_ref)))


def weighted_entropy_bregman(w, w_ref, rates, log_w=None, log_w_ref=None) -> float:
    """Bregman divergence of sum_j (1/eta_j) w_j log w_j.

    ``log_w`` / ``log_w_ref`` may be passed when the weights come from a
    log-space solve; they keep the divergence finite where an entry has
    underflowed to 0 but is still strictly positive in exact arithmetic.
    """
    rates = np.asarray(rates, dtype=float)
    return float(np.sum(_entropy_terms(w, w_ref, log_w, log_w_ref) / rates))


# ---------------------------------------------------------------------------
# entropic OMD over the (restricted) simplex
# ---------------------------------------------------------------------------


@dataclass
class EntropicSolution:
    weights: np.ndarray
    log_weights: np.ndarray  # -inf off the support
    multiplier: float
    residual: float
    iterations: int


def _logsumexp(z: np.ndarray) -> tuple[float, np.ndarray]:
    zmax = np.max(z)
    e = np.exp(z - zmax)
    s = np.sum(e)
    return float(zmax + np.log(s)), e / s


def entropic_omd_solve_full(cost, prior, rates, active=None, log_prior=None, max_iter: int = 200) -> EntropicSolution:
    """Minimise <cost, w> + D_psi(w, prior) over the simplex restricted to ``active``.

    Stationarity gives w_j = prior_j * exp(-eta_j (cost_j + mu)); mu is the
    root of the strictly decreasing map mu -> log sum_j prior_j exp(-eta_j (cost_j + mu)).
    That map is convex, so Newton started at the left end of the bracket
    approaches the root monotonically; bisection guards against stalls.

    ``log_prior`` (if given) replaces log(prior); entries equal to -inf are
    treated as zero prior mass.
    """
    cost = np.asarray(cost, dtype=float)
    rates = np.asarray(rates, dtype=float)
    n = cost.shape[0]
    if log_prior is None:
        prior = np.asarray(prior, dtype=float)
        if prior.shape != (n,):
            raise ValueError("cost and prior must share one shape")
        if np.any(prior < 0) or not np.all(np.isfinite(prior)):
            raise ValueError("prior must be finite and nonnegative")
        with np.errstate(divide="ignore"):
            log_prior = np.log(prior)
    else:
        log_prior = np.asarray(log_prior, dtype=float)
        if log_prior.shape != (n,) or np.any(np.isnan(log_prior)) or np.any(log_prior == np.inf):
            raise ValueError("log prior must be a vector of reals or -inf")
    if rates.shape != (n,):
        raise ValueError("cost and rates must share one shape")
    if not np.all(np.isfinite(cost)):
        raise ValueError("non-finite cost")
    if np.any(rates <= 0) or not np.all(np.isfinite(rates)):
        raise ValueError("rates must be positive and finite")
    mask = np.ones(n, dtype=bool) if active is None else np.asarray(active, dtype=bool).copy()
    mask &= np.isfinite(log_prior)
    if not np.any(mask):
        raise ConfigurationError("empty active set")

    idx = np.flatnonzero(mask)
    eta = rates[idx]
    a = log_prior[idx] - eta * cost[idx]
    weights = np.zeros(n)
    log_weights = np.full(n, -np.inf)
    if idx.size == 1:
        weights[idx] = 1.0
        log_weights[idx] = 0.0
        return EntropicSolution(weights, log_weights, float(a[0] / eta[0]), 0.0, 0)

    # g(mu) = lse(a - eta*mu). Exact bracket: g(lo) >= 0 >= g(hi).
    lo = float(np.max(a / eta))
    hi = lo + np.log(idx.size) / float(np.min(eta))
    mu = lo
    g, soft = _logsumexp(a - eta * mu)
    it = 0
    for it in range(1, max_iter + 1):
        if g == 0.0:
            break
        if g > 0:
            lo = mu
        else:
            hi = mu
        slope = float(np.dot(soft, eta))
        step = mu + g / slope
        if not (lo < step < hi):
            step = 0.5 * (lo + hi)
        if step == mu or (hi - lo) <= 4 * np.finfo(float).eps * max(1.0, abs(mu)):
            break
        mu = step
        g, soft = _logsumexp(a - eta * mu)
        if abs(g) <= 1e-15:
            break
    else:
        raise NumericalError(f"multiplier search did not converge (residual {g:.3e})")

    # absorb the last log-residual into the normalisation; soft is exactly normalised
    z = a - eta * mu
    log_weights[idx] = z - g
    weights[idx] = soft
    return EntropicSolution(weights, log_weights, mu, abs(g), it)


def entropic_omd_solve(cost, prior, rates, active=None) -> np.ndarray:
    return entropic_omd_solve_full(cost, prior, rates, active).weights


def entropic_kkt_residual(w, cost, prior, rates, active=None, log_w=None) -> float:
    """Max of |sum w - 1| and the spread of eta_j (cost_j) + log(w_j / prior_j) / 1 scaled stationarity.

    On the support, log(w_j / prior_j) + eta_j (cost_j + mu) = 0 for one scalar mu.
    The residual reported is the worst deviation after the best mu is fitted,
    measured in log-weight units (relative error of each w_j).
    """
    w = np.asarray(w, dtype=float)
    cost = np.asarray(cost, dtype=float)
    prior = np.asarray(prior, dtype=float)
    rates = np.asarray(rates, dtype=float)
    mask = np.ones(w.shape[0], dtype=bool) if active is None else np.asarray(active, dtype=bool)
    mask = mask & (prior > 0)
    if np.any(w[~mask] != 0):
        return float("inf")
    lw = np.log(np.where(w > 0, w, 1.0)) if log_w is None else np.asarray(log_w, dtype=float)
    if log_w is None and np.any(w[mask] <= 0):
        return float("inf")
    if not np.all(np.isfinite(lw[mask])):
        return float("inf")
    eta = rates[mask]
    # r_j(mu) = log(w_j/prior_j) + eta_j cost_j + eta_j mu; least-squares mu in the relative metric
    base = lw[mask] - np.log(prior[mask]) + eta * cost[mask]
    mu = -float(np.dot(base, eta) / np.dot(eta, eta))
    stat = float(np.max(np.abs(base + eta * mu))) if eta.size else 0.0
    return max(abs(float(np.sum(w)) - 1.0), stat)


# ---------------------------------------------------------------------------
# Euclidean / matrix OMD half-steps
# ---------------------------------------------------------------------------


def euclidean_omd_step(gradient, center, step: float, domain: ConvexDomain) -> np.ndarray:
    """argmin_x <g, x> + (1/step) ||x - center||^2 over the domain.

    The quadratic carries no 1/2, so the free minimiser is center - (step/2) g.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    gradient = np.asarray(gradient, dtype=float)
    center = np.asarray(center, dtype=float)
    if not (np.all(np.isfinite(gradient)) and np.all(np.isfinite(center))):
        raise ValueError("non-finite input")
    return domain.project(center - 0.5 * step * gradient)


def _ball_metric_projection(y, evals, evecs, c, r, tol=1e-12):
    """argmin_x 1/2 ||x - y||_U^2 s.t. ||x - c|| <= r, with U = V diag(evals) V^T."""
    z = evecs.T @ (y - c)
    if np.dot(z, z) <= r * r:
        return y.copy()
    # x(nu) in eigen-coords: evals*z / (evals + nu); ||x(nu)|| decreasing in nu
    def norm2(nu):
        q = evals * z / (evals + nu)
        return float(np.dot(q, q))

    lo, hi = 0.0, float(np.max(evals)) * (np.linalg.norm(z) / r)
    while norm2(hi) > r * r:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if norm2(mid) > r * r:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol * max(1.0, hi):
            break
    q = evals * z / (evals + hi)
    # land exactly on the sphere; the bisection leaves a sub-1e-12 norm gap
    q *= r / np.linalg.norm(q)
    return c + evecs @ q


def matrix_omd_step(gradient, center, metric, domain: ConvexDomain) -> np.ndarray:
    """argmin_x <g, x> + 1/2 ||x - center||_U^2 over the domain."""
    gradient = np.asarray(gradient, dtype=float)
    center = np.asarray(center, dtype=float)
    U = np.asarray(metric, dtype=float)
    if not np.allclose(U, U.T, atol=1e-12, rtol=0):
        raise ConfigurationError("metric must be symmetric")
    evals, evecs = np.linalg.eigh(U)
    if evals[0] <= 0:
        raise NumericalError("metric is singular or indefinite")
    y = center - evecs @ ((evecs.T @ gradient) / evals)
    if domain.kind == "ball":
        return _ball_metric_projection(y, evals, evecs, domain.center, domain.radius)
    if np.allclose(U, np.diag(np.diag(U)), atol=1e-14, rtol=0):
        # diagonal metric: the box projection separates by coordinate
        return np.clip(y, domain.lower, domain.upper)
    raise ConfigurationError("box domains are supported only for diagonal metrics")


def matrix_omd_step_many(gradients, centers, metrics, domain: ConvexDomain, eig=None, n_iter: int = 60) -> np.ndarray:
    """Row-wise matrix_omd_step for a stack of (g_k, c_k, U_k) on one domain.

    Same minimiser as calling matrix_omd_step per row. ``eig`` may carry a
    precomputed (evals, evecs) of the metrics. On a ball the projection
    multiplier nu solves ||q(nu)|| = r with q = e z / (e + nu) in the eigenbasis;
    it is found by Newton steps on 1/||q|| - 1/r kept inside a bisection bracket.
    """
    G = np.asarray(gradients, dtype=float)
    C = np.asarray(centers, dtype=float)
    U = np.asarray(metrics, dtype=float)
    evals, evecs = np.linalg.eigh(U) if eig is None else eig
    if np.any(evals[:, 0] <= 0):
        raise NumericalError("metric is singular or indefinite")
    coef = np.einsum("nij,ni->nj", evecs, G) / evals
    Y = C - np.einsum("nij,nj->ni", evecs, coef)
    if domain.kind != "ball":
        off = U - np.einsum("nij,ij->nij", U, np.eye(U.shape[1]))
        if np.any(np.abs(off) > 1e-14):
            raise ConfigurationError("box domains are supported only for diagonal metrics")
        return np.clip(Y, domain.lower, domain.upper)
    r = domain.radius
    Z = np.einsum("nij,ni->nj", evecs, Y - domain.center)
    out = Y.copy()
    idx = np.nonzero(np.sum(Z * Z, axis=1) > r * r)[0]
    if idx.size == 0:
        return out
    z, ev = Z[idx], evals[idx]
    lo = np.zeros(idx.size)
    # at nu = max(ev) ||z|| / r the shrunk point is already inside the ball
    hi = ev[:, -1] * np.linalg.norm(z, axis=1) / r
    nu = lo.copy()
    for _ in range(n_iter):
        q = ev * z / (ev + nu[:, None])
        n = np.sqrt(np.sum(q * q, axis=1))
        done = np.abs(n - r) <= 1e-14 * r
        if np.all(done):
            break
        outside = n > r
        lo = np.where(outside, nu, lo)
        hi = np.where(outside, hi, nu)
        dn = -np.sum(q * q / (ev + nu[:, None]), axis=1) / n
        # psi = 1/n - 1/r increases in nu; Newton step on psi
        cand = nu + (1.0 / n - 1.0 / r) * n**2 / dn
        bad = ~np.isfinite(cand) | (cand < lo) | (cand > hi)
        nu = np.where(done, nu, np.where(bad, 0.5 * (lo + hi), cand))
    q = ev * z / (ev + nu[:, None])
    q *= (r / np.linalg.norm(q, axis=1))[:, None]
    out[idx] = domain.center + np.einsum("nij,nj->ni", evecs[idx], q)
    return out


# ---------------------------------------------------------------------------
# one-step OMD inequality
# ---------------------------------------------------------------------------


def omd_one_step_inequality(loss, optimism, w_t, w_next, w_prev, comparator, rates, logs=None):
    """Evaluate both sides of the one-step optimistic-OMD inequality.

    LHS = <loss, w_t - u>;
    RHS = <w_t - w_next, loss - optimism> + D(u, w_prev) - D(u, w_next)
          - D(w_next, w_t) - D(w_t, w_prev).
    Returns (holds, slack) with slack = RHS - LHS. ``logs`` optionally maps
    "w_t", "w_next", "w_prev", "u" to log-weights.
    """
    logs = logs or {}
    lt, ln, lp, lu = (logs.get(k) for k in ("w_t", "w_next", "w_prev", "u"))
    loss = np.asarray(loss, dtype=float)
    optimism = np.asarray(optimism, dtype=float)
    w_t = np.asarray(w_t, dtype=float)
    w_next = np.asarray(w_next, dtype=float)
    u = np.asarray(comparator, dtype=float)
    lhs = float(np.dot(loss, w_t - u))
    rhs = (
        float(np.dot(w_t - w_next, loss - optimism))
        + weighted_entropy_bregman(u, w_prev, rates, lu, lp)
        - weighted_entropy_bregman(u, w_next, rates, lu, ln)
        - weighted_entropy_bregman(w_next, w_t, rates, ln, lt)
        - weighted_entropy_bregman(w_t, w_prev, rates, lt, lp)
    )
    slack = rhs - lhs
    return slack >= -1e-9, slack
