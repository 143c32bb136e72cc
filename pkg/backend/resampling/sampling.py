"""resampling/sampling.py — Bootstrap weight vectors and i.i.d. data samples.

Two weight schemes:
  Efron         integer counts ~ multinomial(m_n; 1/n, ..., 1/n)
  IidPositive   zeta_1..zeta_n i.i.d. from a positive law, m_n = sum(zeta)

and the data laws the experiments need (normal, centred exponential,
Student t, two-point, user dataset).  Every draw takes a Seed, so the same
labels give the same numbers regardless of worker count.

Public API
----------
draw_efron_weights(n, m, seed) -> WeightVector
draw_iid_positive_weights(n, law, seed) -> WeightVector
draw_weights(scheme, n, seed) -> WeightVector
draw_sample(generator, n, seed) -> Sample

Spec strings (used by configs and the CLI):
    m-rule     fixed:M | ratio:C | big-ratio:C | nlogn:C | sqrt-cap:C
    law        gamma:SHAPE,RATE | exp | const:C
    generator  normal[:MU,SIGMA] | exp-centered[:LAMBDA] | t:NU (NU > 1)
               | two-point[:LOW,HIGH,P] | csv:PATH
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Union

import numpy as np

from core.errors import ConfigurationError, InvalidArgumentError, InvariantViolation
from resampling.seeding import Seed
from resampling.statcore import Sample

logger = logging.getLogger(__name__)


class SchemeTag(str, enum.Enum):
    EFRON = "efron"
    IID_POSITIVE = "iid-positive"


# ---------------------------------------------------------------------------
# Weight vectors
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WeightVector:
    """Non-negative weights v_1..v_n with total mass m_n = sum(v)."""

    weights: np.ndarray
    total_mass: float
    scheme_tag: SchemeTag

    def __post_init__(self) -> None:
        if self.weights.ndim != 1 or self.weights.size == 0:
            raise InvalidArgumentError("weights must be a non-empty 1-d vector")
        if np.any(self.weights < 0):
            raise InvalidArgumentError("weights must be non-negative")

    @property
    def n(self) -> int:
        return int(self.weights.size)

    @classmethod
    def from_counts(cls, counts) -> "WeightVector":
        """Efron weights from integer resampling counts; m_n is their exact sum."""
        arr = np.asarray(counts, dtype=np.int64)
        return cls(weights=arr, total_mass=int(arr.sum()), scheme_tag=SchemeTag.EFRON)

    @classmethod
    def from_positive(cls, values) -> "WeightVector":
        """i.i.d.-positive weights; m_n is the computed floating-point sum."""
        arr = np.asarray(values, dtype=float)
        return cls(weights=arr, total_mass=float(arr.sum()), scheme_tag=SchemeTag.IID_POSITIVE)


# ---------------------------------------------------------------------------
# m_n rules (Efron), each naming the regime it instantiates
# ---------------------------------------------------------------------------

_M_RULE_REGIMES = {
    "fixed":    "fixed m",
    "ratio":    "m/n>=eps, m=o(n^2)",
    "big-ratio": "n=o(m)",
    "nlogn":    "m/(2n log n)->inf",
    "sqrt-cap": "n=o(m), m=o(n^2)",
}


def _spec_number(value: float) -> str:
    """Integers without a trailing '.0', everything else at full repr precision."""
    value = float(value)
    return str(int(value)) if value.is_integer() else repr(value)


@dataclass(frozen=True)
class MRule:
    """n -> m_n.

    kind:
      fixed      m = value
      ratio      m = ceil(value * n)           (m/n constant)
      big-ratio  m = ceil(value * n)           (same arithmetic, large value; n = o(m) regime)
      nlogn      m = ceil(value * n * ln n)
      sqrt-cap   m = ceil(value * n ** 1.5)    (both n = o(m) and m = o(n^2))
    """

    kind: str
    value: float

    def __post_init__(self) -> None:
        if self.kind not in _M_RULE_REGIMES:
            raise ConfigurationError(f"unknown m_rule kind {self.kind!r}", field="m_rule")
        if not (self.value > 0 and math.isfinite(self.value)):
            raise ConfigurationError(f"m_rule value must be positive, got {self.value}", field="m_rule")

    def __call__(self, n: int) -> int:
        if self.kind == "fixed":
            m = int(self.value)
        elif self.kind in ("ratio", "big-ratio"):
            m = math.ceil(self.value * n)
        elif self.kind == "nlogn":
            m = math.ceil(self.value * n * math.log(n)) if n > 1 else 1
        else:
            m = math.ceil(self.value * n ** 1.5)
        return max(m, 1)

    @property
    def regime(self) -> str:
        return _M_RULE_REGIMES[self.kind]

    @classmethod
    def parse(cls, spec: str) -> "MRule":
        kind, _, raw = spec.strip().partition(":")
        kind = {"square-root-cap": "sqrt-cap"}.get(kind, kind)
        if not raw and kind == "sqrt-cap":
            raw = "1"
        if not raw:
            raise ConfigurationError(f"m_rule {spec!r} needs a value, e.g. ratio:1", field="m_rule")
        try:
            return cls(kind=kind, value=float(raw))
        except ValueError as exc:
            raise ConfigurationError(f"bad m_rule value in {spec!r}", field="m_rule") from exc

    def to_spec(self) -> str:
        return f"{self.kind}:{_spec_number(self.value)}"


# ---------------------------------------------------------------------------
# Positive laws (i.i.d.-positive / Bayesian bootstrap)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PositiveLaw:
    """Strictly positive weight law: gamma(shape, rate), exponential, or constant(c)."""

    kind: str = "gamma"
    shape: float = 4.0
    rate: float = 1.0
    constant: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in ("gamma", "exp", "const"):
            raise ConfigurationError(f"unknown positive law {self.kind!r}", field="law")
        if self.kind == "gamma" and not (self.shape > 0 and self.rate > 0):
            raise ConfigurationError("gamma law needs shape > 0 and rate > 0", field="law")
        if self.kind == "const" and not self.constant > 0:
            raise ConfigurationError("constant law needs c > 0", field="law")

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.kind == "gamma":
            return rng.gamma(self.shape, 1.0 / self.rate, size=n)
        if self.kind == "exp":
            return rng.standard_exponential(size=n)
        return np.full(n, float(self.constant))

    @classmethod
    def parse(cls, spec: str) -> "PositiveLaw":
        kind, _, raw = spec.strip().partition(":")
        try:
            if kind == "gamma":
                shape, rate = (float(x) for x in raw.split(",")) if raw else (4.0, 1.0)
                return cls(kind="gamma", shape=shape, rate=rate)
            if kind == "exp":
                return cls(kind="exp")
            if kind == "const":
                return cls(kind="const", constant=float(raw))
        except ValueError as exc:
            raise ConfigurationError(f"bad positive law {spec!r}", field="law") from exc
        raise ConfigurationError(f"unknown positive law {spec!r}", field="law")

    def to_spec(self) -> str:
        if self.kind == "gamma":
            return f"gamma:{_spec_number(self.shape)},{_spec_number(self.rate)}"
        if self.kind == "exp":
            return "exp"
        return f"const:{_spec_number(self.constant)}"


# ---------------------------------------------------------------------------
# Schemes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EfronScheme:
    m_rule: MRule
    tag: SchemeTag = field(default=SchemeTag.EFRON, init=False)


@dataclass(frozen=True)
class IidPositiveScheme:
    law: PositiveLaw = field(default_factory=PositiveLaw)
    tag: SchemeTag = field(default=SchemeTag.IID_POSITIVE, init=False)


BootstrapScheme = Union[EfronScheme, IidPositiveScheme]


def regime_label(scheme: BootstrapScheme) -> str:
    if isinstance(scheme, EfronScheme):
        return scheme.m_rule.regime
    return f"iid-positive {scheme.law.to_spec()}"


# ---------------------------------------------------------------------------
# Data generators
# ---------------------------------------------------------------------------

_LAWS = ("normal", "exp-centered", "t", "two-point", "empirical")


@dataclass(frozen=True)
class DataGenerator:
    """An i.i.d. data law with its known mean and standard deviation.

    `params` holds the law's parameters:
        normal        (mu, sigma)
        exp-centered  (lambda,)          X = E - 1/lambda
        t             (nu,)
        two-point     (low, high, p)     P(X = high) = p
        empirical     dataset values     uniform picks with replacement

    `scale` and `shift` apply X -> scale * X + shift after drawing (scale > 0).
    """

    law: str
    params: tuple[float, ...] = ()
    scale: float = 1.0
    shift: float = 0.0
    source: str = ""    # spec string the generator was parsed from

    def __post_init__(self) -> None:
        if self.law not in _LAWS:
            raise ConfigurationError(f"unknown generator law {self.law!r}", field="generator")
        if not self.scale > 0:
            raise ConfigurationError("generator scale must be positive", field="generator")
        if self.law == "empirical" and len(self.params) == 0:
            raise InvalidArgumentError("empirical generator needs a non-empty dataset")
        if self.law == "t" and (len(self.params) != 1 or not self.params[0] > 1):
            # nu <= 1 has no mean to cover
            raise ConfigurationError("Student t needs nu > 1", field="generator")

    # ---- known moments ---------------------------------------------------

    @property
    def _base_mean(self) -> float:
        if self.law == "normal":
            return self.params[0]
        if self.law == "two-point":
            low, high, p = self.params
            return p * high + (1.0 - p) * low
        if self.law == "empirical":
            return float(np.mean(self.params))
        # exp-centered is centred by construction; t is symmetric about 0
        return 0.0

    @property
    def _base_sigma(self) -> float:
        if self.law == "normal":
            return self.params[1]
        if self.law == "exp-centered":
            return 1.0 / self.params[0]
        if self.law == "t":
            nu = self.params[0]
            return math.sqrt(nu / (nu - 2.0)) if nu > 2 else math.inf
        if self.law == "two-point":
            low, high, p = self.params
            return abs(high - low) * math.sqrt(p * (1.0 - p))
        return float(np.std(self.params))

    @property
    def known_mean(self) -> float:
        return self.scale * self._base_mean + self.shift

    @property
    def known_sigma(self) -> float:
        """math.inf marks an infinite-variance law (t with nu <= 2)."""
        return self.scale * self._base_sigma

    @property
    def has_finite_variance(self) -> bool:
        return math.isfinite(self.known_sigma)

    @property
    def is_dan_infinite_variance(self) -> bool:
        """t(2) is the exemplar: in the normal domain of attraction, E X^2 = inf."""
        return self.law == "t" and self.params[0] == 2

    def affine(self, scale: float, shift: float) -> "DataGenerator":
        """The generator of scale * X + shift."""
        return replace(self, scale=self.scale * scale, shift=self.shift * scale + shift)

    # ---- drawing -----------------------------------------------------------

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.law == "normal":
            mu, sigma = self.params
            x = rng.normal(mu, sigma, size=n)
        elif self.law == "exp-centered":
            lam = self.params[0]
            x = rng.exponential(1.0 / lam, size=n) - 1.0 / lam
        elif self.law == "t":
            x = rng.standard_t(self.params[0], size=n)
        elif self.law == "two-point":
            low, high, p = self.params
            x = np.where(rng.random(size=n) < p, high, low)
        else:
            data = np.asarray(self.params, dtype=float)
            x = data[rng.integers(0, data.size, size=n)]
        if self.scale != 1.0 or self.shift != 0.0:
            x = self.scale * x + self.shift
        return x

    # ---- spec strings ------------------------------------------------------

    @classmethod
    def parse(cls, spec: str, csv_header: bool | None = None) -> "DataGenerator":
        spec = spec.strip()
        kind, _, raw = spec.partition(":")
        try:
            nums = tuple(float(v) for v in raw.split(",")) if raw and kind != "csv" else ()
        except ValueError as exc:
            raise ConfigurationError(f"bad generator parameters in {spec!r}", field="generator") from exc

        if kind == "normal":
            params = nums or (0.0, 1.0)
            if len(params) != 2 or not params[1] > 0:
                raise ConfigurationError("normal needs MU,SIGMA with SIGMA > 0", field="generator")
            return cls("normal", params, source=spec)
        if kind == "exp-centered":
            params = nums or (1.0,)
            if len(params) != 1 or not params[0] > 0:
                raise ConfigurationError("exp-centered needs LAMBDA > 0", field="generator")
            return cls("exp-centered", params, source=spec)
        if kind == "t":
            if len(nums) != 1:
                raise ConfigurationError("t needs NU, e.g. t:2", field="generator")
            return cls("t", nums, source=spec)
        if kind == "two-point":
            params = nums or (-1.0, 1.0, 0.5)
            if len(params) != 3 or not (0.0 < params[2] < 1.0):
                raise ConfigurationError("two-point needs LOW,HIGH,P with 0 < P < 1", field="generator")
            return cls("two-point", params, source=spec)
        if kind == "csv":
            from resampling.datasets import load_dataset

            values = load_dataset(raw, header=csv_header)
            return cls("empirical", tuple(float(v) for v in values), source=spec)
        raise ConfigurationError(f"unknown generator {spec!r}", field="generator")

    def to_spec(self) -> str:
        return self.source or self.law


# ---------------------------------------------------------------------------
# Draws
# ---------------------------------------------------------------------------

def draw_efron_weights(n: int, m: int, seed: Seed) -> WeightVector:
    """Multinomial(m; 1/n, ..., 1/n) resampling counts.

    Generator.multinomial is the sequential conditional-binomial method:
    cell i receives Binomial(remaining, 1/(n - i + 1)) and the last cell
    takes what is left, so sum(counts) == m exactly in integer arithmetic.
    """
    if n < 1 or m < 1:
        raise InvalidArgumentError(f"Efron weights need n >= 1 and m >= 1, got n={n}, m={m}")
    rng = seed.generator()
    counts = rng.multinomial(m, np.full(n, 1.0 / n))
    return WeightVector(weights=counts.astype(np.int64), total_mass=int(m), scheme_tag=SchemeTag.EFRON)


def draw_iid_positive_weights(n: int, law: PositiveLaw, seed: Seed) -> WeightVector:
    """zeta_1..zeta_n i.i.d. from *law*; m_n is their computed sum."""
    if n < 1:
        raise InvalidArgumentError(f"i.i.d.-positive weights need n >= 1, got n={n}")
    rng = seed.generator()
    zeta = law.draw(rng, n)
    if not np.all(zeta > 0):
        raise InvariantViolation(f"positive law {law.to_spec()} produced a non-positive draw")
    return WeightVector.from_positive(zeta)


def draw_weights(scheme: BootstrapScheme, n: int, seed: Seed) -> WeightVector:
    if isinstance(scheme, EfronScheme):
        return draw_efron_weights(n, scheme.m_rule(n), seed)
    return draw_iid_positive_weights(n, scheme.law, seed)


def draw_sample(generator: DataGenerator, n: int, seed: Seed) -> Sample:
    """n i.i.d. draws from *generator* (uniform picks for a user dataset)."""
    if n < 1:
        raise InvalidArgumentError(f"draw_sample needs n >= 1, got n={n}")
    rng = seed.generator()
    return Sample.from_values(generator.draw(rng, n))
