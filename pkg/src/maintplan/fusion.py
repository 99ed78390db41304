"""Per-component binary Bayes filters over the existence of CAD components.

Beliefs are held as log-odds; the public interface speaks probabilities.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .errors import SchemaError, UnknownComponent

EPS = 1e-6
# accumulated log-odds bound; expit(30) is still strictly below 1.0
LOG_ODDS_LIMIT = 30.0
DEFAULT_PRIOR = 0.5
DEFAULT_TRUST = 0.95


def _logit(p: float) -> float:
    return math.log(p) - math.log1p(-p)


def _expit(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    z = math.exp(x)
    return z / (1.0 + z)


def _clamp(p: float) -> float:
    return min(max(p, EPS), 1.0 - EPS)


def _bound(x: float) -> float:
    return min(max(x, -LOG_ODDS_LIMIT), LOG_ODDS_LIMIT)


def update_belief(prior: float, p_detect: float) -> float:
    """One odds-product update: odds(out) = odds(p_detect) * odds(prior)."""
    if not 0.0 < prior < 1.0:
        raise ValueError(f"prior {prior} outside (0, 1)")
    return _expit(_bound(_logit(prior) + _logit(_clamp(p_detect))))


@dataclass(frozen=True)
class Observation:
    component: str
    p_detect: float
    position: tuple[float, float, float] | None = None
    t: int = 0

    def __post_init__(self):
        if not 0.0 <= self.p_detect <= 1.0:
            raise ValueError(f"p_detect {self.p_detect} outside [0, 1]")


@dataclass
class BeliefVector:
    log_odds: dict[str, float]
    priors: dict[str, float]
    trust: dict[str, float]
    positions: dict[str, tuple] = field(default_factory=dict)

    @classmethod
    def uniform(cls, components: Iterable[str], prior=DEFAULT_PRIOR, trust=DEFAULT_TRUST):
        comps = list(components)
        return cls(
            {c: _logit(prior) for c in comps},
            {c: prior for c in comps},
            {c: trust for c in comps},
        )

    @property
    def bel(self) -> dict[str, float]:
        return {c: _expit(x) for c, x in self.log_odds.items()}

    def __getitem__(self, component: str) -> float:
        return _expit(self.log_odds[component])

    def copy(self) -> "BeliefVector":
        return BeliefVector(dict(self.log_odds), dict(self.priors), dict(self.trust), dict(self.positions))


def update_all(beliefs: BeliefVector, obs: Iterable[Observation]) -> BeliefVector:
    """Independent per-component updates; unobserved components keep their belief."""
    out = beliefs.copy()
    for o in obs:
        if o.component not in out.log_odds:
            raise UnknownComponent(o.component)
        out.log_odds[o.component] = _bound(out.log_odds[o.component] + _logit(_clamp(o.p_detect)))
        if o.position is not None:
            out.positions[o.component] = tuple(o.position)
    return out


def visible_set(beliefs: BeliefVector) -> set[str]:
    return {c for c, p in beliefs.bel.items() if p >= beliefs.trust[c]}


def load_observations(path) -> list[Observation]:
    """Read a JSON-lines observation log, ordered by event index ``t``."""
    out = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            r = rec.get("r")
            out.append(
                Observation(
                    component=str(rec["component"]),
                    p_detect=float(rec["p"]),
                    position=None if r is None else tuple(float(v) for v in r),
                    t=int(rec.get("t", lineno)),
                )
            )
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise SchemaError(str(exc), f"{path}:{lineno}") from None
    out.sort(key=lambda o: o.t)
    return out


def beliefs_to_dict(beliefs: BeliefVector) -> dict:
    vis = visible_set(beliefs)
    return {
        "components": [
            {
                "id": c,
                "prior": beliefs.priors[c],
                "bel": beliefs[c],
                "trust": beliefs.trust[c],
                "visible": c in vis,
                **({"r": list(beliefs.positions[c])} if c in beliefs.positions else {}),
            }
            for c in sorted(beliefs.log_odds)
        ]
    }
