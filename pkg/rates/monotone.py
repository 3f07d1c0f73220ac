"""
Monotone rate functions
Nonincreasing, nonnegative functions on (0, inf) and their generalized inverses
"""

import math
from typing import Annotated, ClassVar, List, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, model_validator

from errors import InvalidInput

INF = float("inf")
DEFAULT_FLOOR = 1e-8


class _Rate(BaseModel):
    """Shared evaluation plumbing. Subclasses implement _eval on a float array."""

    model_config = ConfigDict(frozen=True)

    domain_floor: float = Field(default=DEFAULT_FLOOR, gt=0)

    clamps_to_floor: ClassVar[bool] = True

    def __call__(self, s):
        arr = np.asarray(s, dtype=float)
        if self.clamps_to_floor:
            arr = np.maximum(arr, self.domain_floor)
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            out = self._eval(np.atleast_1d(arr)).astype(float)
        if np.ndim(s) == 0:
            return float(out[0])
        return out.reshape(np.shape(s))

    def _eval(self, s: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def sup_value(self) -> float:
        """Value at 0+"""
        return self(0.0)

    def tail_value(self) -> float:
        """Limit at +inf"""
        return 0.0

    def zero_point(self) -> float:
        """Smallest s with value 0 (inf if never reached)"""
        return INF

    def vanishes(self) -> bool:
        return self.tail_value() == 0.0


class PowerLaw(_Rate):
    form: Literal["powerlaw"] = "powerlaw"
    c: float = Field(gt=0)
    p: float = Field(gt=0)

    def _eval(self, s):
        return self.c * s ** (-self.p)


class ExpPower(_Rate):
    form: Literal["exppower"] = "exppower"
    c: float = Field(gt=0)
    lam: float = Field(gt=0)
    theta: float = Field(gt=0)

    def _eval(self, s):
        return self.c * np.exp(-self.lam * s ** self.theta)


class Constant(_Rate):
    form: Literal["constant"] = "constant"
    c: float = Field(ge=0)

    def _eval(self, s):
        return np.full_like(s, self.c)

    def tail_value(self):
        return self.c

    def zero_point(self):
        return 0.0 if self.c == 0 else INF


class Tabulated(_Rate):
    """
    Tabulated rate on a strictly increasing positive grid.

    `step` is right-continuous: value[i] on [grid[i], grid[i+1]).
    `linear` interpolates between nodes. Below grid[0] the value is
    `below` (defaults to values[0]; may be the inf sentinel).
    """

    form: Literal["tabulated"] = "tabulated"
    grid: List[float]
    values: List[float]
    interpolation: Literal["step", "linear"] = "step"
    below: Optional[float] = None

    clamps_to_floor: ClassVar[bool] = False

    @model_validator(mode="after")
    def _check(self):
        g = np.asarray(self.grid, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if g.size == 0 or g.size != v.size:
            raise InvalidInput("grid and values must be non-empty and of equal length")
        if np.any(g <= 0) or np.any(np.diff(g) <= 0):
            raise InvalidInput("grid must be strictly increasing and positive")
        if np.any(v < 0) or np.any(np.isnan(v)) or np.any(np.isinf(v)):
            raise InvalidInput("values must be finite and nonnegative")
        if np.any(np.diff(v) > 0):
            raise InvalidInput("values must be nonincreasing", witness=int(np.argmax(np.diff(v) > 0)))
        if self.below is not None and self.below < v[0]:
            raise InvalidInput("below must dominate values[0]")
        return self

    @property
    def below_value(self) -> float:
        return self.values[0] if self.below is None else self.below

    def _eval(self, s):
        g = np.asarray(self.grid)
        v = np.asarray(self.values)
        out = np.empty_like(s)
        low = s < g[0]
        out[low] = self.below_value
        if self.interpolation == "step":
            idx = np.searchsorted(g, s[~low], side="right") - 1
            out[~low] = v[idx]
        else:
            out[~low] = np.interp(s[~low], g, v)
        return out

    def sup_value(self):
        return self.below_value

    def tail_value(self):
        return float(self.values[-1])

    def zero_point(self):
        if self.below_value == 0:
            return 0.0
        zeros = np.flatnonzero(np.asarray(self.values) == 0)
        return float(self.grid[zeros[0]]) if zeros.size else INF

    @classmethod
    def lower_step(cls, grid, values, tail: float = 0.0) -> "Tabulated":
        """Step minorant of a nonincreasing function known at the nodes"""
        grid = np.asarray(grid, dtype=float)
        values = np.asarray(values, dtype=float)
        shifted = np.append(values[1:], tail)
        return cls(grid=grid.tolist(), values=shifted.tolist(), below=float(values[0]))

    @classmethod
    def upper_step(cls, grid, values, below: float = INF) -> "Tabulated":
        """Step majorant: left-endpoint values, `below` before the first node"""
        values = np.maximum.accumulate(np.asarray(values, dtype=float)[::-1])[::-1]
        return cls(grid=np.asarray(grid, dtype=float).tolist(), values=values.tolist(),
                   below=max(float(below), float(values[0])))


class InverseOf(_Rate):
    """Exact pointwise generalized inverse of `of`"""

    form: Literal["inverse"] = "inverse"
    of: "MonotoneRate"

    clamps_to_floor: ClassVar[bool] = False

    def _eval(self, x):
        return np.array([_pointwise_inverse(self.of, float(xi)) for xi in x])

    def tail_value(self):
        return 0.0

    def zero_point(self):
        return self.of.sup_value()


class Clipped(_Rate):
    """`of` below `at`, zero from `at` on"""

    form: Literal["clipped"] = "clipped"
    of: "MonotoneRate"
    at: float = Field(gt=0)

    clamps_to_floor: ClassVar[bool] = False

    def _eval(self, s):
        return np.where(s < self.at, self.of(s), 0.0)

    def sup_value(self):
        return self.of.sup_value()

    def zero_point(self):
        return min(self.at, self.of.zero_point())


class Capped(_Rate):
    """min(of, cap)"""

    form: Literal["capped"] = "capped"
    of: "MonotoneRate"
    cap: float = Field(ge=0)

    clamps_to_floor: ClassVar[bool] = False

    def _eval(self, s):
        return np.minimum(self.of(s), self.cap)

    def sup_value(self):
        return min(self.of.sup_value(), self.cap)

    def tail_value(self):
        return min(self.of.tail_value(), self.cap)

    def zero_point(self):
        return 0.0 if self.cap == 0 else self.of.zero_point()


class Raised(_Rate):
    """`level` below `until`, `of` from `until` on; `of(until)` must not exceed `level`"""

    form: Literal["raised"] = "raised"
    of: "MonotoneRate"
    until: float = Field(gt=0)
    level: float = Field(ge=0)

    clamps_to_floor: ClassVar[bool] = False

    @model_validator(mode="after")
    def _check(self):
        if self.of(self.until) > self.level * (1 + 1e-12):
            raise InvalidInput("raised level must dominate the rate at the switch",
                               witness={"until": self.until, "level": self.level})
        return self

    def _eval(self, s):
        return np.where(s < self.until, self.level, self.of(s))

    def sup_value(self):
        return self.level

    def tail_value(self):
        return self.of.tail_value()

    def zero_point(self):
        return max(self.until, self.of.zero_point()) if self.level > 0 else 0.0


MonotoneRate = Annotated[
    Union[PowerLaw, ExpPower, Constant, Tabulated, InverseOf, Clipped, Capped, Raised],
    Field(discriminator="form"),
]

for _model in (InverseOf, Clipped, Capped, Raised):
    _model.model_rebuild()

rate_adapter = TypeAdapter(MonotoneRate)


def parse_rate(obj) -> "MonotoneRate":
    """Parse a rate from a dict or JSON string"""
    if isinstance(obj, (str, bytes)):
        return rate_adapter.validate_json(obj)
    return rate_adapter.validate_python(obj)


def parse_rate_flag(flag: str) -> "MonotoneRate":
    """
    Parse the compact CLI form, e.g. `powerlaw:1,1`, `exppower:1,0.5,1`, `constant:0.2`.
    """
    try:
        name, _, params = flag.partition(":")
        nums = [float(x) for x in params.split(",") if x.strip()]
        name = name.strip().lower()
        if name == "powerlaw":
            return PowerLaw(c=nums[0], p=nums[1])
        if name == "exppower":
            return ExpPower(c=nums[0], lam=nums[1], theta=nums[2])
        if name == "constant":
            return Constant(c=nums[0])
    except (IndexError, ValueError) as e:
        raise InvalidInput(f"Could not parse rate '{flag}': {e}")
    raise InvalidInput(f"Unknown rate family '{flag}'")


def generalized_inverse(f) -> "MonotoneRate":
    """
    g(x) = inf{y > 0 : f(y) <= x}, with inf of the empty set = inf.

    Closed forms stay closed, step tables invert to step tables, and the
    remaining families are wrapped in an exact pointwise inverse.
    """
    if isinstance(f, PowerLaw):
        return PowerLaw(c=f.c ** (1.0 / f.p), p=1.0 / f.p, domain_floor=f.domain_floor)
    if isinstance(f, Constant):
        if f.c == 0:
            return Constant(c=0.0)
        return Tabulated(grid=[f.c], values=[0.0], below=INF)
    if isinstance(f, Tabulated) and f.interpolation == "step":
        return _invert_step(f)
    if isinstance(f, InverseOf):
        return f.of
    if isinstance(f, Clipped):
        return Capped(of=generalized_inverse(f.of), cap=f.at)
    if isinstance(f, Capped):
        if f.cap == 0:
            return Constant(c=0.0)
        return Clipped(of=generalized_inverse(f.of), at=f.cap)
    return InverseOf(of=f)


def _invert_step(f: Tabulated) -> "MonotoneRate":
    grid = np.asarray(f.grid)
    vals = np.asarray(f.values)
    below = f.below_value
    levels = set(vals.tolist())
    if math.isfinite(below):
        levels.add(below)
    levels = np.array(sorted(levels))

    def at_level(level):
        if below <= level:
            return 0.0
        hit = np.flatnonzero(vals <= level)
        return float(grid[hit[0]]) if hit.size else INF

    out = np.array([at_level(level) for level in levels])
    if levels[0] == 0:
        head = float(out[0])
        if levels.size == 1:
            return Constant(c=head)
        return Tabulated(grid=levels[1:].tolist(), values=out[1:].tolist(), below=head)
    return Tabulated(grid=levels.tolist(), values=out.tolist(), below=INF)


def _pointwise_inverse(f, x: float) -> float:
    if x < 0:
        return INF
    if isinstance(f, ExpPower):
        if x >= f.c:
            return 0.0
        if x == 0:
            return INF
        y = (math.log(f.c / x) / f.lam) ** (1.0 / f.theta)
        return y if y >= f.domain_floor else 0.0
    if isinstance(f, Tabulated) and f.interpolation == "linear":
        if f.below_value <= x:
            return 0.0
        vals = np.asarray(f.values)
        hit = np.flatnonzero(vals <= x)
        if not hit.size:
            return INF
        i = int(hit[0])
        if i == 0:
            return float(f.grid[0])
        v0, v1 = vals[i - 1], vals[i]
        g0, g1 = f.grid[i - 1], f.grid[i]
        return float(g0 + (v0 - x) / (v0 - v1) * (g1 - g0))
    return _bisect_inverse(f, x)


def _bisect_inverse(f, x: float) -> float:
    """Monotone bisection in log-space for families without a closed inverse"""
    lo, hi = 1e-300, 1e300
    if f(lo) <= x:
        return 0.0
    if f(hi) > x:
        return INF
    lo_l, hi_l = math.log(lo), math.log(hi)
    for _ in range(200):
        mid = 0.5 * (lo_l + hi_l)
        if f(math.exp(mid)) <= x:
            hi_l = mid
        else:
            lo_l = mid
        if hi_l - lo_l < 1e-13:
            break
    return math.exp(hi_l)


def log_grid(low: float = 1e-8, high: float = 1e8, points: int = 512) -> np.ndarray:
    """Default log-spaced evaluation grid"""
    return np.geomspace(low, high, points)


def scale_rate(f, factor: float) -> "MonotoneRate":
    """factor * f, keeping the closed form where there is one"""
    if factor <= 0:
        raise InvalidInput(f"scale factor must be positive, got {factor}")
    if factor == 1:
        return f
    if isinstance(f, (PowerLaw, Constant)):
        return f.model_copy(update={"c": f.c * factor})
    if isinstance(f, ExpPower):
        return f.model_copy(update={"c": f.c * factor})
    if isinstance(f, Tabulated):
        below = None if f.below is None else f.below * factor
        return f.model_copy(update={"values": [v * factor for v in f.values], "below": below})
    if isinstance(f, Clipped):
        return Clipped(of=scale_rate(f.of, factor), at=f.at)
    if isinstance(f, Capped):
        return Capped(of=scale_rate(f.of, factor), cap=f.cap * factor)
    if isinstance(f, Raised):
        return Raised(of=scale_rate(f.of, factor), until=f.until, level=f.level * factor)
    raise InvalidInput(f"cannot scale a '{f.form}' rate")


def stretch_rate(f, factor: float) -> "MonotoneRate":
    """s -> f(s / factor)"""
    if factor <= 0:
        raise InvalidInput(f"stretch factor must be positive, got {factor}")
    if factor == 1 or isinstance(f, Constant):
        return f
    if isinstance(f, PowerLaw):
        return f.model_copy(update={"c": f.c * factor ** f.p})
    if isinstance(f, ExpPower):
        return f.model_copy(update={"lam": f.lam * factor ** (-f.theta)})
    if isinstance(f, Tabulated):
        return f.model_copy(update={"grid": [g * factor for g in f.grid]})
    if isinstance(f, Clipped):
        return Clipped(of=stretch_rate(f.of, factor), at=f.at * factor)
    if isinstance(f, Capped):
        return Capped(of=stretch_rate(f.of, factor), cap=f.cap)
    if isinstance(f, Raised):
        return Raised(of=stretch_rate(f.of, factor), until=f.until * factor, level=f.level)
    raise InvalidInput(f"cannot stretch a '{f.form}' rate")
