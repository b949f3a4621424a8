"""Universal online learning ensembles: a meta MsMwC learner over OOMD base learners.

Full-information mode feeds the restart wrapper heterogeneous inputs: the
convex learner is judged by function-value differences, every other learner
by linearised losses. Because the convex learner's optimism depends on the
ensemble decision, it is found by a fixed-point binary search.

Single-gradient mode queries one gradient per round at the ensemble decision,
trains the base learners on surrogate losses and adds the cascaded correction
lambda ||x_{t,i} - x_{t-1,i}||^2 to both the meta loss and the meta optimism.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .base_learners import LearnerBank, roster_build, surrogate_gradients
from .numerics import ConfigurationError, ConvexDomain, NumericalError, entropic_omd_solve_full
from .pea_adaptive import RestartWrapper
from .pea_core import MsMwC, ceil_log2


# ---------------------------------------------------------------------------
# single-gradient constants
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SingleGradientConstants:
    G: float
    D: float
    L: float
    lam: float
    C0: float
    gamma_convex: float
    gamma_exp: float

    @property
    def C2(self) -> float:
        return c2_constant(self.G, self.D, self.L)

    def violations(self) -> list:
        G, D, L, C2 = self.G, self.D, self.L, self.C2
        checks = [
            ("C0 >= 1", self.C0 >= 1.0),
            ("C0 >= 4 D^4 L^2", self.C0 >= 4 * D**4 * L**2),
            ("C0 >= C2 D^2 / 2", self.C0 >= 0.5 * C2 * D**2),
            ("lambda >= 4 D^2 L^2", self.lam >= 4 * D**2 * L**2),
            ("lambda >= 2 C2", self.lam >= 2 * C2),
            ("gamma_convex >= 4 lambda", self.gamma_convex >= 4 * self.lam),
            ("gamma_exp >= 4 lambda + 32 G^4", self.gamma_exp >= 4 * self.lam + 32 * G**4),
            ("gamma_exp >= 1 + 4 G^2", self.gamma_exp >= 1 + 4 * G**2),
        ]
        return [name for name, ok in checks if not ok]

    def validate(self) -> "SingleGradientConstants":
        bad = self.violations()
        if bad:
            raise ConfigurationError("single-gradient constants violate: " + "; ".join(bad))
        return self


def c2_constant(G: float, D: float, L: float) -> float:
    return 4 * L**2 + 32 * G**2 * D**2 * L**2 + 8 * G**4


def single_gradient_constants(G: float, D: float, L: float, **overrides) -> SingleGradientConstants:
    """Smallest constants meeting the convex and exp-concave constraints jointly."""
    if G <= 0 or D <= 0 or L < 0:
        raise ConfigurationError("need G > 0, D > 0, L >= 0")
    C2 = c2_constant(G, D, L)
    lam = overrides.get("lam", max(4 * D**2 * L**2, 2 * C2))
    C0 = overrides.get("C0", max(4 * D**4 * L**2, 0.5 * C2 * D**2, 1.0))
    gc = overrides.get("gamma_convex", 4 * lam)
    ge = overrides.get("gamma_exp", max(4 * lam + 32 * G**4, 1 + 4 * G**2))
    return SingleGradientConstants(float(G), float(D), float(L), float(lam), float(C0), float(gc), float(ge)).validate()


# ---------------------------------------------------------------------------
# binary search for the convex learner's optimism
# ---------------------------------------------------------------------------


class _AggregatedMeta:
    """The meta predict solve with one free optimism coordinate j.

    Experts other than j have fixed optimism, so within each rate they can be
    merged into one coordinate carrying their summed prior mass and their
    weighted mean point. The solve over 2|G| coordinates gives the same mixture
    as the full solve over K|G| pairs.
    """

    def __init__(self, session: MsMwC, B: float, j: int, m_rest, X):
        mask = session.active_mask(B)[0]
        if not np.any(mask):
            raise ConfigurationError("all rates pruned")
        eta = session.rates[mask]
        logw = session.log_w_prime[:, mask]
        K = logw.shape[0]
        self.j = j
        self.xj = X[j]
        rest = np.array([i for i in range(K) if i != j], dtype=int)
        self.eta = eta
        self.log_b = logw[j]
        if rest.size:
            z = logw[rest] - eta[None, :] * np.asarray(m_rest, dtype=float)[rest, None]
            zmax = np.max(z, axis=0)
            fin = np.isfinite(zmax)
            e = np.exp(z - np.where(fin, zmax, 0.0)[None, :])
            s = e.sum(axis=0)
            with np.errstate(divide="ignore"):
                self.log_a = np.where(fin, zmax + np.log(s), -np.inf)
            wts = e / np.where(s > 0, s, 1.0)[None, :]
            self.xbar = wts.T @ X[rest]
        else:
            self.log_a = np.full(eta.size, -np.inf)
            self.xbar = np.zeros((eta.size, X.shape[1]))

    def mixture(self, mj: float):
        """(x, p_j) of the meta predict with m(j) = mj."""
        n = self.eta.size
        eta = np.concatenate([self.eta, self.eta])
        a = np.concatenate([self.log_a, self.log_b - self.eta * mj])
        fin = np.isfinite(a)
        if not np.all(fin):
            a, eta2 = a[fin], eta[fin]
        else:
            eta2 = eta
        w = np.zeros(2 * n)
        w[fin] = _simplex_tilt(a, eta2)
        pj = float(w[n:].sum())
        x = w[:n] @ self.xbar + pj * self.xj
        return x, pj


def _simplex_tilt(a, eta, max_iter: int = 100):
    """Normalised exp(a - eta mu): the same root search as the general solver
    without its input checks, for the small merged problems of the search."""
    if a.size == 1:
        return np.ones(1)
    r = a / eta
    lo = r.max()
    hi = lo + math.log(a.size) / eta.min()
    mu = lo
    for _ in range(max_iter):
        z = a - eta * mu
        zmax = z.max()
        e = np.exp(z - zmax)
        s = e.sum()
        g = zmax + math.log(s)
        if abs(g) <= 1e-15:
            break
        if g > 0:
            lo = mu
        else:
            hi = mu
        soft = e / s
        nxt = mu + g / float(soft @ eta)
        if not (lo < nxt < hi):
            nxt = 0.5 * (lo + hi)
        if nxt == mu:
            break
        mu = nxt
    return e / s


@dataclass
class SearchResult:
    alpha: float
    residual: float
    evaluations: int
    doublings: int


def binary_search_optimism(h, alpha1: float, D: float, tol: float, max_doublings: int = 64,
                           max_iter: int = 200) -> SearchResult:
    """Fixed point of h(alpha) = alpha with h(alpha1) <= alpha1.

    The lower end is found by alpha(k) = alpha1 - 2^k D, k = 0, 1, ..., until
    alpha(k) <= h(alpha(k)); bisection then keeps a sign change of h - alpha.
    """
    n_eval = 1
    h1 = h(alpha1)
    if abs(h1 - alpha1) <= tol:
        return SearchResult(alpha1, abs(h1 - alpha1), n_eval, 0)
    hi, lo = alpha1, None
    k = 0
    while k <= max_doublings:
        a = alpha1 - 2.0**k * D
        ha = h(a)
        n_eval += 1
        if abs(ha - a) <= tol:
            return SearchResult(a, abs(ha - a), n_eval, k)
        if a <= ha:
            lo = a
            break
        hi = a
        k += 1
    if lo is None:
        raise NumericalError(f"no lower bracket within {max_doublings} doublings (is f convex?)")
    best = (math.inf, hi)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        r = h(mid) - mid
        n_eval += 1
        if abs(r) < best[0]:
            best = (abs(r), mid)
        if abs(r) <= tol:
            return SearchResult(mid, abs(r), n_eval, k)
        if r > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 4 * np.finfo(float).eps * max(1.0, abs(mid)):
            break
    err = NumericalError(f"binary search stalled with residual {best[0]:.3e} > tol {tol:.3e}")
    err.residual = best[0]
    raise err


# ---------------------------------------------------------------------------
# traces
# ---------------------------------------------------------------------------


@dataclass
class UolTrace:
    mode: str
    d: int
    K: int
    labels: list
    x: list = field(default_factory=list)
    grads: list = field(default_factory=list)
    values: list = field(default_factory=list)
    B_fed: list = field(default_factory=list)
    residuals: list = field(default_factory=list)
    tolerances: list = field(default_factory=list)
    eq7_slack: list = field(default_factory=list)
    lemma25_slack: list = field(default_factory=list)
    p: list = field(default_factory=list)
    losses: list = field(default_factory=list)
    optimisms: list = field(default_factory=list)
    bases: list = field(default_factory=list)
    restarts: list = field(default_factory=list)
    doubling_rounds: list = field(default_factory=list)
    mixture_error: float = 0.0

    @property
    def T(self) -> int:
        return len(self.x)

    def decisions(self) -> np.ndarray:
        return np.array(self.x) if self.x else np.zeros((0, self.d))


class _Stability:
    """Running S^x, S^x_i, S^p and the stability slack on consecutive rounds."""

    def __init__(self, K: int, D: float):
        self.prev = None
        self.Sx = 0.0
        self.Sxi = np.zeros(K)
        self.Sp = 0.0
        self.D = D

    def push(self, x, X, p):
        slack = None
        if self.prev is not None:
            x0, X0, p0 = self.prev
            if X0.shape == X.shape:
                dx = float(np.sum((x - x0) ** 2))
                dxi = np.sum((X - X0) ** 2, axis=1)
                dp = float(np.sum(np.abs(p - p0))) ** 2
                self.Sx += dx
                self.Sxi += dxi
                self.Sp += dp
                # ||x - y||^2 <= 2 sum_i p(i) ||x_i - y_i||^2 + 2 D^2 ||p - q||_1^2
                slack = 2.0 * float(p @ dxi) + 2.0 * self.D**2 * dp - dx
        self.prev = (x.copy(), X.copy(), p.copy())
        return slack


# ---------------------------------------------------------------------------
# ensembles
# ---------------------------------------------------------------------------


class FullInfoEnsemble:
    """Lipschitz-adaptive ensemble with value and gradient access each round.

    Needs only the smoothness L (for the roster); no G and no curvature hints.
    """

    def __init__(self, domain: ConvexDomain, T: int, L: float, roster: str = "standard",
                 B0: float = 1.0, tol_const: float = 10.0, record_meta: bool = False, record_bases: bool = False,
                 trace: UolTrace | None = None):
        self.domain = domain
        self.T = int(T)
        self.D = domain.diameter
        self.specs = roster_build(roster, max(self.T, 2), L=L)
        self.K = len(self.specs)
        self.j = 0  # the convex learner leads every roster
        self.bank = LearnerBank(self.specs, domain)
        self.meta = RestartWrapper(np.full(self.K, 1.0 / self.K), self.T, B0, record=False)
        self.tol_const = float(tol_const)
        self.record_meta, self.record_bases = record_meta, record_bases
        self.trace = trace or UolTrace("fullinfo", domain.dim, self.K, [s.label() for s in self.specs])
        self.stab = _Stability(self.K, self.D)
        self.G_obs = 0.0
        self.prev_oracle = None
        self.t = 0

    def round(self, oracle) -> np.ndarray:
        self.t += 1
        X = self.bank.step()
        prev = self.prev_oracle
        if prev is None:
            fvals = np.zeros(self.K)
        else:
            fvals = prev.value_many(X)
        session = self.meta.prepare()
        B_fed = self.meta.B
        m = np.zeros(self.K)
        agg = _AggregatedMeta(session, B_fed, self.j, m, X)
        fj = fvals[self.j]

        def h(alpha):
            if prev is None:
                return 0.0
            x, _ = agg.mixture(fj - alpha)
            return prev.value(x)

        tol = self.tol_const * self.D * max(self.G_obs, 1e-12) / max(self.T, 1)
        tol = max(tol, 1e-12 * (1.0 + float(np.max(np.abs(fvals)))))
        res = binary_search_optimism(h, float(np.max(fvals)), self.D, tol)
        m[self.j] = fj - res.alpha
        p = self.meta.predict(m)
        x = p @ X
        # residual at the decision actually played (the search used the merged solve)
        resid = abs(prev.value(x) - res.alpha) if prev is not None else 0.0
        # after the decision: observe f_t
        g = oracle.gradient(x)
        fx = oracle.value(x)
        fj_now = oracle.value(X[self.j])
        loss = (X - x) @ g
        loss[self.j] = fj_now - fx
        self.meta.update(loss)
        G_base = oracle.gradient_many(X)
        self.bank.update(G_base)
        self.G_obs = max(self.G_obs, float(np.linalg.norm(g)), float(np.max(np.linalg.norm(G_base, axis=1))))
        self.prev_oracle = oracle

        tr = self.trace
        tr.x.append(x)
        tr.grads.append(g)
        tr.values.append(fx)
        tr.B_fed.append(B_fed)
        tr.residuals.append(resid)
        tr.tolerances.append(tol)
        # <l, p - e_i> + l(i) = <l, p> for every i
        tr.eq7_slack.append(float(loss @ p))
        tr.lemma25_slack.append(self.stab.push(x, X, p))
        tr.mixture_error = max(tr.mixture_error, float(np.max(np.abs(x - p @ X))))
        if self.record_meta:
            tr.p.append(p)
            tr.losses.append(loss)
            tr.optimisms.append(m.copy())
        if self.record_bases:
            tr.bases.append(X.copy())
        return x

    @property
    def restarts(self) -> list:
        return self.meta.tracker.restart_rounds


class SingleGradientEnsemble:
    """One gradient query per round; base learners train on surrogate losses."""

    def __init__(self, domain: ConvexDomain, T: int, G: float, L: float, constants: SingleGradientConstants | None = None,
                 record_meta: bool = False, record_bases: bool = False, trace: UolTrace | None = None):
        self.domain = domain
        self.D = domain.diameter
        self.consts = constants or single_gradient_constants(G, self.D, L)
        self.consts.validate()
        self.T = int(T)
        self.T_int = int(math.ceil(max(2 * G, G * self.D, T, 2)))
        self.B = max(1.0, 2.0 * G * self.D)
        self.specs = roster_build("single_gradient", self.T_int, constants=self.consts)
        self.K = len(self.specs)
        self.bank = LearnerBank(self.specs, domain)
        self.meta = MsMwC(np.full(self.K, 1.0 / self.K), self.T_int, self.B, scale=self.consts.C0)
        self.record_meta, self.record_bases = record_meta, record_bases
        self.trace = trace or UolTrace("singlegrad", domain.dim, self.K, [s.label() for s in self.specs])
        self.stab = _Stability(self.K, self.D)
        self.X_prev = self.bank.X.copy()
        self.x_prev = self.X_prev[0].copy()
        self.g_prev = np.zeros(domain.dim)
        self.t = 0

    def round(self, oracle) -> np.ndarray:
        self.t += 1
        X = self.bank.step()
        lam = self.consts.lam
        corr = lam * np.sum((X - self.X_prev) ** 2, axis=1)
        m = (self.X_prev - self.x_prev) @ self.g_prev + corr
        p, _ = self.meta.predict(m, self.B)
        x = p @ X
        g = oracle.gradient(x)
        loss = (X - x) @ g + corr
        self.meta.update(loss)
        self.bank.update(surrogate_gradients(self.specs, g, x, X))
        tr = self.trace
        tr.x.append(x)
        tr.grads.append(g)
        tr.B_fed.append(self.B)
        tr.eq7_slack.append(float((loss - corr) @ p))
        tr.lemma25_slack.append(self.stab.push(x, X, p))
        tr.mixture_error = max(tr.mixture_error, float(np.max(np.abs(x - p @ X))))
        if self.record_meta:
            tr.p.append(p)
            tr.losses.append(loss)
            tr.optimisms.append(m)
        if self.record_bases:
            tr.bases.append(X.copy())
        self.X_prev, self.x_prev, self.g_prev = X.copy(), x.copy(), g.copy()
        return x


def run_ensemble(stream, mode: str = "fullinfo", counter=None, L: float | None = None, G: float | None = None,
                 doubling: bool = False, M0: int = 1, roster: str = "standard", record_meta: bool = False,
                 record_bases: bool = False, constants: SingleGradientConstants | None = None, **kw) -> UolTrace:
    """Play an OcoStream to the end.

    With ``doubling`` the ensemble starts from horizon guess 2^M0 and restarts
    with M <- 2M when the round count exceeds 2^M or (full-info) when
    ||g_t|| > 2^M / max(2, D). Otherwise it is built for the stream's T.
    """
    from .environments import QueryCounter

    counter = counter if counter is not None else QueryCounter()
    L = stream.truth.get("L", 0.0) if L is None else L
    D = stream.domain.diameter

    def build(T, trace):
        if mode == "fullinfo":
            return FullInfoEnsemble(stream.domain, T, L, roster=roster, record_meta=record_meta,
                                    record_bases=record_bases, trace=trace, **kw)
        if mode == "singlegrad":
            Gv = stream.truth["G"] if G is None else G
            return SingleGradientEnsemble(stream.domain, T, Gv, L, constants=constants, record_meta=record_meta,
                                          record_bases=record_bases, trace=trace)
        raise ConfigurationError(f"unknown ensemble mode {mode!r}")

    M = int(M0) if doubling else max(ceil_log2(max(stream.T, 2)), 1)
    ens = build(2**M, None)
    trace = ens.trace
    for t in range(1, stream.T + 1):
        if doubling and t > 2**M:
            M *= 2
            trace.doubling_rounds.append(t - 1)
            ens = build(2**M, trace)
        x = ens.round(stream.oracle(t, counter))
        if doubling and mode == "fullinfo" and np.linalg.norm(trace.grads[-1]) > 2**M / max(2.0, D):
            M *= 2
            trace.doubling_rounds.append(t)
            ens = build(2**M, trace)
    if hasattr(ens, "meta") and isinstance(ens.meta, RestartWrapper):
        trace.restarts = list(ens.meta.tracker.restart_rounds)
    return trace


def stability_sums(trace: UolTrace) -> dict:
    """S^x_T from the decisions; S^x_{T,i}, S^p_T need recorded bases and weights."""
    X = trace.decisions()
    Sx = float(np.sum(np.diff(X, axis=0) ** 2)) if len(X) > 1 else 0.0
    out = {"S_x": Sx}
    if trace.bases:
        B = np.array(trace.bases)
        out["S_x_i"] = np.sum(np.sum(np.diff(B, axis=0) ** 2, axis=2), axis=0) if len(B) > 1 else np.zeros(trace.K)
    if trace.p:
        P = np.array(trace.p)
        out["S_p"] = float(np.sum(np.sum(np.abs(np.diff(P, axis=0)), axis=1) ** 2)) if len(P) > 1 else 0.0
    slacks = [s for s in trace.lemma25_slack if s is not None]
    out["lemma25_min_slack"] = min(slacks) if slacks else math.inf
    return out


def meta_lower_bound_check(trace: UolTrace, tol: float = 1e-9) -> dict:
    """Per-round <l_t, p_t - e_i> + l_t(i) >= -tol; the slack is the same for every i."""
    s = np.array(trace.eq7_slack) if trace.eq7_slack else np.zeros(0)
    mn = float(s.min()) if s.size else math.inf
    return {"min_slack": mn, "ok": bool(mn >= -tol), "slacks": s}
