"""Seeded logit-normal simulator of repeated softmax predictions.

This is a proxy generator. It matches aggregate AUC and uncertainty
orderings, and makes no claim about real pathology data.

Generative model, per input i and sample t::

    y_i   ~ Bernoulli(pi)
    m_i   ~ Normal(mu_{y_i} * (1 - delta), sigma_pop * (1 + delta))
    p_it  = logistic(m_i + k_i * tau * (1 + delta) * eps_it)

``k_i`` and the correlation of ``eps_it`` across t depend on the method
profile (see ``PROFILES``). The single-model score is sample 0.

Random numbers come from ``numpy.random.Generator(numpy.random.Philox(seed))``
and are drawn in this exact order:

1. ``random(N)``: uniforms for labels, ``y_i = u_i < pi``
2. ``standard_normal(N)``: population deviates ``z_i``
3. ``standard_normal(N)``: profile deviates ``g_i`` (dropout scale, tta shared noise)
4. ``standard_normal((N, T))``: per-sample deviates, row-major

Step 3 is drawn for every profile so the streams stay aligned across profiles.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, replace
from importlib import resources

import numpy as np

from .core import LabelVector, PreduncError, SampleSet, ScoreVector, positive_scores, validate_sample_set

RELEASE_SEED = 20220512


class InvalidConfig(PreduncError, ValueError):
    pass


class UnknownPreset(PreduncError, KeyError):
    pass


@dataclass(frozen=True)
class Profile:
    name: str
    t_samples: int
    tau_scale: float
    # log-normal spread of a per-input noise multiplier, independent of the logit
    scale_spread: float
    # correlation of sample noise across the T samples of one input
    shared_corr: float


PROFILES = {
    "ensemble": Profile("ensemble", 5, 1.0, 0.0, 0.0),
    "dropout": Profile("dropout", 50, 1.5, 0.5, 0.0),
    "tta": Profile("tta", 50, 1.0, 0.0, 0.5),
}


@dataclass(frozen=True)
class RegimeConfig:
    n_inputs: int = 8000
    t_samples: int = 5
    seed: int = RELEASE_SEED
    pi: float = 0.5
    mu_pos: float = 4.0
    mu_neg: float = -4.0
    sigma_pop: float = 1.0
    tau: float = 0.5
    delta: float = 0.0
    profile: str = "ensemble"

    def validate(self) -> None:
        if self.profile not in PROFILES:
            raise InvalidConfig(f"unknown profile {self.profile!r}; choose from {sorted(PROFILES)}")
        if self.n_inputs < 1 or self.t_samples < 1:
            raise InvalidConfig("n_inputs and t_samples must be >= 1")
        if not 0 < self.pi < 1:
            raise InvalidConfig(f"pi must be in (0, 1), got {self.pi}")
        if not self.sigma_pop > 0:
            raise InvalidConfig("sigma_pop must be > 0")
        if not (self.tau >= 0 and self.delta >= 0):
            raise InvalidConfig("tau and delta must be >= 0")
        if not 0 <= self.seed < 2**64:
            raise InvalidConfig("seed must be a 64-bit unsigned integer")
        for v in (self.mu_pos, self.mu_neg, self.sigma_pop, self.tau, self.delta, self.pi):
            if not math.isfinite(v):
                raise InvalidConfig("config values must be finite")

    def with_profile(self, profile: str) -> "RegimeConfig":
        """Switch profile and take that profile's default sample count."""
        if profile not in PROFILES:
            raise InvalidConfig(f"unknown profile {profile!r}")
        return replace(self, profile=profile, t_samples=PROFILES[profile].t_samples)

    def to_dict(self) -> dict:
        return asdict(self)


def _logistic(x: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def generate(config: RegimeConfig):
    """Draw a SampleSet with labels and the single-model scores (sample 0)."""
    config.validate()
    prof = PROFILES[config.profile]
    n, t = config.n_inputs, config.t_samples
    rng = np.random.Generator(np.random.Philox(config.seed))

    u = rng.random(n)
    z = rng.standard_normal(n)
    g = rng.standard_normal(n)
    e = rng.standard_normal((n, t))

    y = (u < config.pi).astype(np.int8)
    shrink = 1.0 - config.delta
    mu = np.where(y == 1, config.mu_pos, config.mu_neg) * shrink
    m = mu + config.sigma_pop * (1.0 + config.delta) * z

    scale = config.tau * (1.0 + config.delta) * prof.tau_scale * np.exp(prof.scale_spread * g)
    if prof.shared_corr > 0:
        eps = math.sqrt(prof.shared_corr) * g[:, None] + math.sqrt(1.0 - prof.shared_corr) * e
    else:
        eps = e
    logits = m[:, None] + scale[:, None] * eps

    p1 = _logistic(logits)
    p0 = _logistic(-logits)
    width = len(str(n - 1))
    ids = [f"x{i:0{width}d}" for i in range(n)]
    samples = validate_sample_set(np.stack([p0, p1], axis=2), ids)
    return samples, LabelVector(y), positive_scores(samples, 0)


def _load_presets() -> dict:
    text = resources.files(__package__).joinpath("presets.json").read_text(encoding="utf-8")
    return json.loads(text)


def preset_names() -> list:
    return sorted(_load_presets()["presets"])


def preset(name: str, profile: str = None, seed: int = None, n_inputs: int = None) -> RegimeConfig:
    """Frozen regime constants from ``presets.json``.

    ``in-domain`` stands in for a test set from the training centre,
    ``center-shift`` for a new medical centre, ``subtype-shift`` for an
    under-represented cancer subtype.
    """
    data = _load_presets()
    try:
        params = dict(data["presets"][name])
    except KeyError:
        raise UnknownPreset(f"unknown preset {name!r}; choose from {sorted(data['presets'])}") from None
    params.pop("description", None)
    params.setdefault("seed", data["release_seed"])
    config = RegimeConfig(**params)
    if profile is not None:
        config = config.with_profile(profile)
    if seed is not None:
        config = replace(config, seed=seed)
    if n_inputs is not None:
        config = replace(config, n_inputs=n_inputs)
    config.validate()
    return config
