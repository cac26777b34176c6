"""Validated simple-class configurations and exact phase evaluation.

A configuration holds M+1 strictly increasing wave numbers p_k, constants c_k
and the frozen values of the higher hierarchy times. The phase of index k is

    theta_k = sum_{r=1}^{N} p_k**r * t_r + c_k

with t_1 = x, t_2 = y, t_3 = t and N the horizon.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .errors import ConfigError, InvalidInput
from .exact import as_rational, parse_rational

TIME_NAMES = {1: "x", 2: "y", 3: "t"}


def time_name(r: int) -> str:
    return TIME_NAMES.get(r, f"t{r}")


def _time_index(key) -> int:
    if isinstance(key, int):
        return key
    names = {"x": 1, "y": 2, "t": 3}
    if key in names:
        return names[key]
    if isinstance(key, str) and key.startswith("t") and key[1:].isdigit():
        return int(key[1:])
    raise InvalidInput(f"unknown time coordinate {key!r}")


@dataclass(frozen=True)
class SolitonConfig:
    M: int
    p: tuple[Fraction, ...]
    c: tuple[Fraction, ...]
    horizon: int
    fixed: tuple[tuple[int, Fraction], ...] = field(default=())

    @property
    def size(self) -> int:
        """Number of phases, M+1."""
        return self.M + 1

    @property
    def fixed_times(self) -> dict[int, Fraction]:
        return dict(self.fixed)

    def time_vector(self, times: Mapping | None = None) -> list[Fraction]:
        """Coordinates t_1..t_N as a 1-based list (slot 0 unused).

        ``times`` overrides the frozen values; anything unset is zero.
        """
        vec = [Fraction(0)] * (self.horizon + 1)
        for r, v in self.fixed:
            vec[r] = v
        if times:
            for key, v in times.items():
                r = _time_index(key)
                if not 1 <= r <= self.horizon:
                    raise InvalidInput(f"time index {r} outside 1..{self.horizon}")
                vec[r] = as_rational(v)
        return vec

    def with_times(self, times: Mapping) -> "SolitonConfig":
        merged = self.fixed_times
        for key, v in times.items():
            merged[_time_index(key)] = as_rational(v)
        return validate_config(self.M, self.p, self.c, merged, self.horizon)

    def coordinates(self, point) -> list[Fraction]:
        """Full 1-based coordinate list for a point.

        ``point`` is either a mapping of time indices/names to values, or a
        sequence (t_1, t_2, ...) that may be shorter than the horizon; missing
        coordinates come from the frozen times.
        """
        if isinstance(point, Mapping):
            return self.time_vector(point)
        vec = self.time_vector()
        if len(point) > self.horizon:
            raise InvalidInput(f"point has {len(point)} coordinates, horizon is {self.horizon}")
        for r, v in enumerate(point, start=1):
            vec[r] = as_rational(v)
        return vec

    def phase(self, i: int, point) -> Fraction:
        return phase_value(self, i, point)


def validate_config(M, p: Sequence, c: Sequence, fixed_times: Mapping | None = None,
                    horizon: int | None = None) -> SolitonConfig:
    """Build a :class:`SolitonConfig`, reporting every violated invariant."""
    problems = []
    if not isinstance(M, int) or isinstance(M, bool) or M < 1:
        problems.append(f"M must be an integer >= 1, got {M!r}")
        M = None
    try:
        ps = tuple(as_rational(v) for v in p)
    except InvalidInput as exc:
        problems.append(f"p: {exc}")
        ps = None
    try:
        cs = tuple(as_rational(v) for v in c)
    except InvalidInput as exc:
        problems.append(f"c: {exc}")
        cs = None
    if M is not None:
        if ps is not None and len(ps) != M + 1:
            problems.append(f"p has {len(ps)} entries, expected M+1 = {M + 1}")
        if cs is not None and len(cs) != M + 1:
            problems.append(f"c has {len(cs)} entries, expected M+1 = {M + 1}")
    if ps is not None and any(a >= b for a, b in zip(ps, ps[1:])):
        problems.append("p not strictly increasing")
    if horizon is None and M is not None:
        horizon = max(M, 3)
    if horizon is not None and M is not None and horizon < M:
        problems.append(f"horizon {horizon} below M = {M}")
    fixed = {}
    for key, v in (fixed_times or {}).items():
        try:
            r = _time_index(key)
            fixed[r] = as_rational(v)
        except InvalidInput as exc:
            problems.append(str(exc))
            continue
        if horizon is not None and not 1 <= r <= horizon:
            problems.append(f"fixed time t{r} outside 1..{horizon}")
    if problems:
        raise ConfigError(problems)
    return SolitonConfig(M, ps, cs, horizon, tuple(sorted(fixed.items())))


def phase_value(config: SolitonConfig, i: int, point) -> Fraction:
    """Exact value of theta_i at ``point`` (frozen times merged in)."""
    if not 1 <= i <= config.size:
        raise InvalidInput(f"phase index {i} outside 1..{config.size}")
    vec = config.coordinates(point)
    pk = config.p[i - 1]
    value = config.c[i - 1]
    power = Fraction(1)
    for r in range(1, config.horizon + 1):
        power *= pk
        value += power * vec[r]
    return value


def all_phases(config: SolitonConfig, point) -> list[Fraction]:
    """theta_1..theta_{M+1} at a point, as a 0-based list."""
    vec = config.coordinates(point)
    out = []
    for pk, ck in zip(config.p, config.c):
        # Horner: sum_r p^r t_r = p (t_1 + p (t_2 + ...))
        acc = Fraction(0)
        for r in range(config.horizon, 0, -1):
            acc = (acc + vec[r]) * pk
        out.append(acc + ck)
    return out


def config_from_json(data: Mapping) -> SolitonConfig:
    """Read the JSON configuration schema.

    ``times`` holds absolute frozen values (``{"t4": "-2"}``); ``offsets``
    holds values relative to the top critical value of each level, resolved
    from the highest time downwards (``{"t5": "-1", "t4": "-2"}`` means
    t5 = t5_{1..6} - 1 and then t4 = t4_{1..5}(t5) - 2).
    """
    if not isinstance(data, Mapping):
        raise InvalidInput("configuration must be a JSON object")
    unknown = set(data) - {"M", "p", "c", "times", "offsets", "horizon"}
    if unknown:
        raise InvalidInput(f"unknown configuration keys: {sorted(unknown)}")
    for key in ("M", "p", "c"):
        if key not in data:
            raise InvalidInput(f"configuration lacks {key!r}")
    times = {k: parse_rational(v, allow_decimal=False) for k, v in (data.get("times") or {}).items()}
    config = validate_config(data["M"], data["p"], data["c"], times, data.get("horizon"))
    offsets = data.get("offsets")
    if offsets:
        config = resolve_offsets(config, {k: parse_rational(v) for k, v in offsets.items()})
    return config


def resolve_offsets(config: SolitonConfig, offsets: Mapping) -> SolitonConfig:
    """Freeze t_n = t_n^{1..n+1} + offset_n, working from the top level down."""
    from .critical import critical_value

    pending = {_time_index(k): as_rational(v) for k, v in offsets.items()}
    for r in sorted(pending, reverse=True):
        if not 1 <= r <= config.M:
            raise InvalidInput(f"offset for t{r} needs 1 <= {r} <= M")
        base = critical_value(config, range(1, r + 2)).value
        config = config.with_times({r: base + pending[r]})
    return config


def config_to_json(config: SolitonConfig) -> dict:
    from .exact import format_rational

    return {
        "M": config.M,
        "p": [format_rational(v) for v in config.p],
        "c": [format_rational(v) for v in config.c],
        "horizon": config.horizon,
        "times": {f"t{r}": format_rational(v) for r, v in config.fixed},
    }
