"""The combined relatedness measures and their parameter tuning.

The concept-vector cosine is the base signal. Its value is multiplied by
(1 + lambda * sigmoid(path measure)) and then by (1 + lambda' *
sigmoid(mixed collocation index)): each sigmoid gate fades out the low,
unreliable range of its component while letting the high range boost the
base score.

The tuning objective (rank correlation against human judgments) is
piecewise constant, so plain gradients vanish almost everywhere;
`tune` runs finite-difference coordinate ascent with step decay and
uniform random restarts instead.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, fields, replace
from typing import Callable, Optional


@dataclass(frozen=True)
class CombineParams:
    lambda_: float = 0.0  # path-measure gate weight
    m: float = 0.25  # gate inflection for the path measure
    s: float = 0.05  # gate steepness for the path measure
    lambda_prime: float = 0.0  # collocation gate weight
    m_prime: float = 0.19
    s_prime: float = 0.05
    xi: float = 0.55  # weight of the reversed-order collocation

    def __post_init__(self):
        if self.s <= 0 or self.s_prime <= 0:
            raise ValueError("sigmoid steepness must be positive")
        if self.lambda_ < 0 or self.lambda_prime < 0:
            raise ValueError("gate weights must be non-negative")
        if not 0.0 <= self.xi <= 1.0:
            raise ValueError("xi must lie in [0, 1]")


# key names used in the flat key=value params file
_FILE_KEYS = {
    "lambda": "lambda_",
    "m": "m",
    "s": "s",
    "lambda_prime": "lambda_prime",
    "m_prime": "m_prime",
    "s_prime": "s_prime",
    "xi": "xi",
}
_FIELD_TO_KEY = {v: k for k, v in _FILE_KEYS.items()}


def sigmoid(x: float, m: float, s: float) -> float:
    """Logistic gate with inflection m and steepness s."""
    z = (x - m) / s
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-min(z, 700.0)))
    e = math.exp(max(z, -700.0))
    return e / (1.0 + e)


def ew(esa_val: float, wnp_val: float, p: CombineParams) -> float:
    """Base cosine boosted by the gated path measure."""
    return esa_val * (1.0 + p.lambda_ * sigmoid(wnp_val, p.m, p.s))


def ewc(esa_val: float, wnp_val: float, cxi_val: float, p: CombineParams) -> float:
    """`ew` further boosted by the gated mixed collocation index."""
    return ew(esa_val, wnp_val, p) * (
        1.0 + p.lambda_prime * sigmoid(cxi_val, p.m_prime, p.s_prime)
    )


def save_params(p: CombineParams, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for key, attr in _FILE_KEYS.items():
            fh.write(f"{key}={getattr(p, attr)!r}\n")


def load_params(path: str) -> CombineParams:
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, raw = line.partition("=")
            key = key.strip()
            if key not in _FILE_KEYS:
                raise ValueError(f"{path}:{lineno}: unknown parameter {key!r}")
            values[_FILE_KEYS[key]] = float(raw.strip())
    return CombineParams(**values)


# ---------------------------------------------------------------------------
# Tuning
# ---------------------------------------------------------------------------

DEFAULT_BOUNDS: dict[str, tuple[float, float]] = {
    "lambda_": (0.0, 60.0),
    "m": (0.0, 1.0),
    "s": (0.01, 0.5),
    "lambda_prime": (0.0, 60.0),
    "m_prime": (0.0, 1.0),
    "s_prime": (0.01, 0.5),
    "xi": (0.0, 1.0),
}


def _clamp(value: float, lo: float, hi: float) -> float:
    return min(max(value, lo), hi)


def _score(score_fn, params: CombineParams) -> float:
    value = score_fn(params)
    return value if value is not None and math.isfinite(value) else -math.inf


def _param_tuple(p: CombineParams) -> tuple:
    return tuple(getattr(p, f.name) for f in fields(CombineParams))


def _explore(score_fn, point: CombineParams, best: float, steps, bounds):
    """One exploratory sweep: nudge each coordinate both ways, keep gains."""
    for name, step in steps.items():
        lo, hi = bounds[name]
        base = getattr(point, name)
        for direction in (1.0, -1.0):
            value = _clamp(base + direction * step, lo, hi)
            if value == base:
                continue
            candidate = replace(point, **{name: value})
            score = _score(score_fn, candidate)
            if score > best:
                point, best = candidate, score
                break
    return point, best


def _ascend(
    score_fn, start: CombineParams, bounds: dict[str, tuple[float, float]],
    max_rounds: int,
) -> tuple[CombineParams, float]:
    """Pattern search: exploratory coordinate moves, extrapolated pattern
    steps while they pay off, halved steps on stagnation, and a few coarse
    re-expansions to hop between plateaus of a rank-valued objective."""
    current = start
    best = _score(score_fn, current)
    resolution = {k: 1e-6 * (hi - lo) for k, (lo, hi) in bounds.items()}
    for scale in (0.25, 0.05, 0.01, 0.002):  # progressively finer re-expansions
        steps = {k: scale * (bounds[k][1] - bounds[k][0]) for k in bounds}
        rounds = 0
        while rounds < max_rounds:
            rounds += 1
            point, score = _explore(score_fn, current, best, steps, bounds)
            if score > best:
                # pattern move: repeat the successful combined displacement
                while rounds < max_rounds:
                    rounds += 1
                    extrapolated = replace(point, **{
                        k: _clamp(2 * getattr(point, k) - getattr(current, k),
                                  *bounds[k])
                        for k in bounds
                    })
                    current, best = point, score
                    probe, probe_score = _explore(
                        score_fn, extrapolated, best, steps, bounds
                    )
                    if probe_score > best:
                        point, score = probe, probe_score
                    else:
                        break
                current, best = point, score
            else:
                if all(steps[k] <= resolution[k] for k in steps):
                    break
                steps = {k: v * 0.5 for k, v in steps.items()}
    return current, best


def tune(
    score_fn: Callable[[CombineParams], float],
    initial: CombineParams,
    bounds: Optional[dict[str, tuple[float, float]]] = None,
    restarts: int = 8,
    seed: int = 0,
    max_rounds: int = 60,
    hops: int = 6,
) -> tuple[CombineParams, float]:
    """Maximize score_fn over the bounded parameters.

    Runs pattern search from `initial` and from `restarts` uniform random
    points inside `bounds`, then `hops` seeded perturbation hops around the
    incumbent at shrinking radii; unspecified parameters stay fixed at their
    initial values. Non-finite scores discard the probed point. The result
    never scores below the initial parameters.
    """
    if bounds is None:
        bounds = DEFAULT_BOUNDS
    unknown = set(bounds) - {f.name for f in fields(CombineParams)}
    if unknown:
        raise ValueError(f"unknown parameters in bounds: {sorted(unknown)}")

    rng = random.Random(seed)
    starts = [initial]
    for _ in range(restarts):
        draw = {k: rng.uniform(lo, hi) for k, (lo, hi) in bounds.items()}
        starts.append(replace(initial, **draw))

    best_params, best_score = initial, _score(score_fn, initial)
    incumbent_is_initial = True

    def consider(params: CombineParams, value: float) -> None:
        # a flat objective keeps the initial parameters; ties above the
        # initial break on lexicographic parameter order
        nonlocal best_params, best_score, incumbent_is_initial
        if value > best_score or (
            value == best_score
            and not incumbent_is_initial
            and _param_tuple(params) < _param_tuple(best_params)
        ):
            best_params, best_score = params, value
            incumbent_is_initial = params == initial

    for start in starts:
        consider(*_ascend(score_fn, start, bounds, max_rounds))

    # perturbation hops around the incumbent: random diagonal moves reach
    # correlated-parameter improvements that axis steps cannot
    for radius in (0.08, 0.03, 0.01):
        for _ in range(hops):
            jitter = {
                k: _clamp(getattr(best_params, k) + rng.gauss(0.0, radius * (hi - lo)),
                          lo, hi)
                for k, (lo, hi) in bounds.items()
            }
            consider(*_ascend(score_fn, replace(best_params, **jitter), bounds,
                              max_rounds))
    return best_params, best_score
