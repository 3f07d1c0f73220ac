"""
The K* transform
Convex conjugate of K(u) = u beta(1/u), with exact integrals for F_a, its inverse and B
"""

import math
from typing import Optional

import numpy as np
from scipy.optimize import minimize_scalar

from config import get_settings
from errors import NumericalFailure
from rates.monotone import INF, Capped, Clipped, Constant, PowerLaw, Tabulated

SLOPE_TOL = 1e-12


class Conjugate:
    """K*(v): nonnegative, nondecreasing, convex, K*(0) = 0, +inf above `cap`."""

    cap: float = INF

    def __call__(self, v):
        raise NotImplementedError

    @property
    def zero_level(self) -> float:
        """sup{v : K*(v) = 0}"""
        raise NotImplementedError

    def F(self, x, a: float):
        """F_a(x) = int_x^a dv / K*(v)"""
        raise NotImplementedError

    def F_inverse(self, n, a: float):
        """gamma(n) = inf{x : F_a(x) <= n}"""
        raise NotImplementedError

    def B(self, v: float) -> float:
        """B(v) = int_0^v w / K*(w) dw"""
        raise NotImplementedError

    def id_minus_monotone(self, a: float) -> bool:
        """Is w - K*(w) nondecreasing on (0, a]?"""
        raise NotImplementedError

    def with_cap(self, cap: float) -> "Conjugate":
        raise NotImplementedError


class PowerConjugate(Conjugate):
    """K*(v) = kappa v^q, the conjugate of beta(s) = c s^-p."""

    def __init__(self, kappa: float, q: float, cap: float = INF):
        self.kappa = float(kappa)
        self.q = float(q)
        self.cap = float(cap)

    @classmethod
    def from_power_law(cls, beta: PowerLaw, cap: float = INF) -> "PowerConjugate":
        p, c = beta.p, beta.c
        kappa = p * c ** (-1.0 / p) * (1.0 + p) ** (-(1.0 + p) / p)
        return cls(kappa, 1.0 + 1.0 / p, cap)

    def with_cap(self, cap):
        return PowerConjugate(self.kappa, self.q, min(self.cap, cap))

    def __call__(self, v):
        v = np.asarray(v, dtype=float)
        out = np.where(v > self.cap, INF, self.kappa * np.maximum(v, 0.0) ** self.q)
        return float(out) if out.ndim == 0 else out

    @property
    def zero_level(self):
        return 0.0

    def _primitive(self, x):
        # G(x) with F_a(x) = G(x) - G(a)
        if self.q == 1.0:
            return -np.log(x) / self.kappa
        return x ** (1.0 - self.q) / (self.kappa * (self.q - 1.0))

    def F(self, x, a):
        hi = min(a, self.cap)
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            out = np.where(x >= hi, 0.0, self._primitive(np.maximum(x, 0.0)) - self._primitive(hi))
        return float(out) if out.ndim == 0 else out

    def F_inverse(self, n, a):
        hi = min(a, self.cap)
        n = np.asarray(n, dtype=float)
        if self.q == 1.0:
            out = hi * np.exp(-self.kappa * n)
        else:
            out = (hi ** (1.0 - self.q) + n * self.kappa * (self.q - 1.0)) ** (-1.0 / (self.q - 1.0))
        return float(out) if out.ndim == 0 else out

    def B(self, v):
        v = min(v, self.cap)
        if self.q >= 2.0:
            return INF
        return v ** (2.0 - self.q) / (self.kappa * (2.0 - self.q))

    def id_minus_monotone(self, a):
        top = min(a, self.cap)
        return self.kappa * self.q * top ** (self.q - 1.0) <= 1.0 + SLOPE_TOL and self.cap >= a


class EnvelopeConjugate(Conjugate):
    """
    Piecewise-linear K* as the upper envelope of the zero line and lines
    m v + c (m > 0, c <= 0). Any finite family of supporting lines of the
    true conjugate gives a lower bound on it.
    """

    def __init__(self, slopes, intercepts, cap: float = INF):
        self.cap = float(cap)
        m = np.asarray(slopes, dtype=float)
        c = np.asarray(intercepts, dtype=float)
        keep = np.isfinite(m) & np.isfinite(c) & (m > 0)
        self.slopes, self.intercepts, self.knots = _upper_hull(m[keep], c[keep])

    @classmethod
    def from_step(cls, step: Tabulated, cap: float = INF) -> "EnvelopeConjugate":
        """Exact conjugate of a right-continuous step beta"""
        grid = np.asarray(step.grid)
        vals = np.asarray(step.values)
        return cls(1.0 / grid, -vals / grid, cap=min(cap, step.below_value))

    @classmethod
    def from_points(cls, v, k, cap: Optional[float] = None) -> "EnvelopeConjugate":
        """Greatest convex minorant of the points (0,0), (v_i, k_i)"""
        v = np.concatenate([[0.0], np.asarray(v, dtype=float)])
        k = np.concatenate([[0.0], np.maximum(np.asarray(k, dtype=float), 0.0)])
        order = np.argsort(v, kind="stable")
        hull = _lower_hull(v[order], k[order])
        hv, hk = v[order][hull], k[order][hull]
        slopes = np.diff(hk) / np.diff(hv)
        intercepts = hk[:-1] - slopes * hv[:-1]
        return cls(slopes, intercepts, cap=float(v.max()) if cap is None else cap)

    @classmethod
    def from_supporting_lines(cls, beta, s_grid=None) -> "EnvelopeConjugate":
        """
        Lines (v - beta(s))/s on a log grid, refined by golden-section search
        on log s around the best grid line for a sweep of v values.
        """
        settings = get_settings()
        if s_grid is None:
            s_grid = np.geomspace(settings.grid_low, settings.grid_high, settings.grid_points)
        s_grid = np.asarray(s_grid, dtype=float)
        zero_at = beta.zero_point()
        if math.isfinite(zero_at) and zero_at > 0:
            s_grid = np.union1d(s_grid, [zero_at])
        b = np.asarray(beta(s_grid), dtype=float)
        finite = np.isfinite(b)
        if not finite.any():
            raise NumericalFailure("beta is not finite anywhere on the grid")
        s_ok, b_ok = s_grid[finite], b[finite]
        cap = float(beta.sup_value())
        extra = []
        top = cap if math.isfinite(cap) else float(b_ok.max())
        low = max(float(b_ok[b_ok > 0].min()) if (b_ok > 0).any() else top * 1e-12, top * 1e-12)
        log_s = np.log(s_ok)
        for v in np.geomspace(low, top, 96):
            h = (v - b_ok) / s_ok
            i = int(np.argmax(h))
            if h[i] <= 0 or i == 0 or i == len(s_ok) - 1:
                continue
            try:
                res = minimize_scalar(
                    lambda t: -(v - float(beta(math.exp(t)))) / math.exp(t),
                    bracket=(log_s[i - 1], log_s[i], log_s[i + 1]),
                    method="golden",
                    options={"maxiter": 200},
                )
            except ValueError:
                continue
            if not np.isfinite(res.x) or not np.isfinite(res.fun):
                raise NumericalFailure("golden-section refinement did not stabilize", witness={"v": float(v)})
            extra.append(math.exp(res.x))
        if extra:
            s_extra = np.asarray(extra)
            b_extra = np.asarray(beta(s_extra), dtype=float)
            s_ok = np.concatenate([s_ok, s_extra])
            b_ok = np.concatenate([b_ok, b_extra])
        return cls(1.0 / s_ok, -b_ok / s_ok, cap=cap)

    def with_cap(self, cap):
        out = object.__new__(EnvelopeConjugate)
        out.slopes, out.intercepts, out.knots = self.slopes, self.intercepts, self.knots
        out.cap = min(self.cap, cap)
        return out

    def __call__(self, v):
        arr = np.atleast_1d(np.asarray(v, dtype=float))
        if self.slopes.size:
            vals = np.max(np.outer(arr, self.slopes) + self.intercepts, axis=1)
            vals = np.maximum(vals, 0.0)
        else:
            vals = np.zeros_like(arr)
        vals = np.where(arr > self.cap, INF, vals)
        return float(vals[0]) if np.ndim(v) == 0 else vals

    @property
    def zero_level(self):
        if not self.slopes.size:
            return self.cap
        return min(float(self.knots[0]), self.cap)

    def _segments(self, a):
        """Positive pieces of K* on (zero_level, min(a, cap)], ascending"""
        hi = min(a, self.cap)
        lo_edges = self.knots
        up_edges = np.append(self.knots[1:], INF)
        keep = lo_edges < hi
        lo = lo_edges[keep]
        up = np.minimum(up_edges[keep], hi)
        return lo, up, self.slopes[keep], self.intercepts[keep], hi

    def _descending_table(self, a):
        lo, up, m, c, hi = self._segments(a)
        lo, up, m, c = lo[::-1], up[::-1], m[::-1], c[::-1]
        with np.errstate(divide="ignore", invalid="ignore"):
            bottom = m * lo + c
            full = np.where(bottom > 0, np.log((m * up + c) / np.where(bottom > 0, bottom, 1.0)) / m, INF)
        acc_end = np.cumsum(full)
        acc_start = np.concatenate([[0.0], acc_end[:-1]])
        return lo, up, m, c, acc_start, acc_end, hi

    def F(self, x, a):
        lo, up, m, c, acc_start, acc_end, hi = self._descending_table(a)
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.empty_like(xs)
        for idx, xv in enumerate(xs):
            if xv >= hi:
                out[idx] = 0.0
                continue
            if xv <= self.zero_level:
                out[idx] = INF
                continue
            k = int(np.flatnonzero(lo < xv)[0]) if np.any(lo < xv) else len(lo) - 1
            out[idx] = acc_start[k] + math.log((m[k] * up[k] + c[k]) / (m[k] * xv + c[k])) / m[k]
        return float(out[0]) if np.ndim(x) == 0 else out

    def F_inverse(self, n, a):
        lo, up, m, c, acc_start, acc_end, hi = self._descending_table(a)
        ns = np.atleast_1d(np.asarray(n, dtype=float))
        if not len(lo):
            out = np.full_like(ns, hi)
        else:
            k = np.minimum(np.searchsorted(acc_end, ns, side="left"), len(lo) - 1)
            mk, ck, upk = m[k], c[k], up[k]
            x = ((mk * upk + ck) * np.exp(-mk * (ns - acc_start[k])) - ck) / mk
            out = np.clip(x, lo[k], upk)
        out = np.where(ns <= 0, hi, out)
        return float(out[0]) if np.ndim(n) == 0 else out

    def B(self, v):
        if self.zero_level > 0:
            return INF
        lo, up, m, c, hi = self._segments(v)
        total = 0.0
        for l, u, mk, ck in zip(lo, up, m, c):
            if ck == 0:
                total += (u - l) / mk
            else:
                total += (u - l) / mk - ck / mk ** 2 * math.log((mk * u + ck) / (mk * l + ck))
        return total

    def id_minus_monotone(self, a):
        if self.cap < a:
            return False
        lo, up, m, c, hi = self._segments(a)
        return bool(np.all(m <= 1.0 + SLOPE_TOL))


def _upper_hull(m, c):
    """Upper envelope of y = m x + c on x >= 0, starting after the zero line"""
    if not m.size:
        return np.array([]), np.array([]), np.array([])
    order = np.lexsort((-c, m))
    m, c = m[order], c[order]
    # keep the best intercept per slope
    first = np.concatenate([[True], np.diff(m) > 0])
    m, c = m[first], c[first]
    hull_m, hull_c = [0.0], [0.0]
    for mk, ck in zip(m, c):
        while len(hull_m) >= 2:
            x_prev = (hull_c[-2] - hull_c[-1]) / (hull_m[-1] - hull_m[-2])
            x_new = (hull_c[-1] - ck) / (mk - hull_m[-1])
            if x_new <= x_prev:
                hull_m.pop()
                hull_c.pop()
            else:
                break
        hull_m.append(mk)
        hull_c.append(ck)
    hull_m, hull_c = np.array(hull_m[1:]), np.array(hull_c[1:])
    if not hull_m.size:
        return hull_m, hull_c, np.array([])
    knots = np.empty_like(hull_m)
    knots[0] = -hull_c[0] / hull_m[0]
    knots[1:] = (hull_c[:-1] - hull_c[1:]) / (hull_m[1:] - hull_m[:-1])
    return hull_m, hull_c, np.maximum(knots, 0.0)


def _lower_hull(x, y):
    """Indices of the lower convex hull (monotone chain), x sorted"""
    hull = []
    for i in range(len(x)):
        while len(hull) >= 2:
            i0, i1 = hull[-2], hull[-1]
            cross = (x[i1] - x[i0]) * (y[i] - y[i0]) - (y[i1] - y[i0]) * (x[i] - x[i0])
            if cross <= 0:
                hull.pop()
            else:
                break
        if hull and x[hull[-1]] == x[i]:
            if y[i] < y[hull[-1]]:
                hull[-1] = i
            continue
        hull.append(i)
    return np.asarray(hull)


def as_step(beta) -> Optional[Tabulated]:
    """Tabulated step view of a rate when one exists exactly"""
    if isinstance(beta, Tabulated) and beta.interpolation == "step":
        return beta
    if isinstance(beta, Clipped):
        inner = as_step(beta.of)
        if inner is None:
            return None
        grid = np.asarray(inner.grid)
        vals = np.asarray(inner.values)
        keep = grid < beta.at
        return Tabulated(grid=np.append(grid[keep], beta.at).tolist(),
                         values=np.append(vals[keep], 0.0).tolist(), below=inner.below_value)
    return None


def k_transform(beta) -> Conjugate:
    """K* for a beta-role rate: closed form for power laws, exact for steps, supporting lines otherwise"""
    if isinstance(beta, PowerLaw):
        return PowerConjugate.from_power_law(beta)
    if isinstance(beta, Capped):
        return k_transform(beta.of).with_cap(beta.cap)
    if isinstance(beta, Constant):
        return EnvelopeConjugate([], [], cap=beta.c)
    step = as_step(beta)
    if step is not None:
        return EnvelopeConjugate.from_step(step)
    return EnvelopeConjugate.from_supporting_lines(beta)


def beta_from_conjugate(conj: Conjugate, grid=None) -> Tabulated:
    """beta(s) = sup_v (v - s K*(v)), as a step majorant over the grid"""
    settings = get_settings()
    if grid is None:
        grid = np.geomspace(settings.grid_low, settings.grid_high, settings.grid_points)
    grid = np.asarray(grid, dtype=float)
    if isinstance(conj, PowerConjugate):
        if conj.q == 1.0:
            vals = np.where(grid * conj.kappa >= 1.0, 0.0, conj.cap)
        else:
            v_star = (grid * conj.kappa * conj.q) ** (-1.0 / (conj.q - 1.0))
            v_star = np.minimum(v_star, conj.cap)
            vals = v_star - grid * conj.kappa * v_star ** conj.q
    else:
        candidates = np.concatenate([[0.0], conj.knots])
        if math.isfinite(conj.cap):
            candidates = np.append(candidates, conj.cap)
        candidates = candidates[candidates <= conj.cap]
        kv = conj(candidates)
        vals = np.max(candidates[None, :] - grid[:, None] * kv[None, :], axis=1)
    vals = np.maximum(vals, 0.0)
    below = conj.cap if math.isfinite(conj.cap) else INF
    return Tabulated.upper_step(grid, vals, below=below)
