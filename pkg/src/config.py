import io
import string
from dataclasses import dataclass, fields
from typing import Any, Mapping, Optional, Tuple

from dotenv import dotenv_values

from learner import ConfigError as ModelConfigError
from learner import ModelConfig
from sequences import GeneratorError, GeneratorSpec
from truth import TruthValue
from utils import format_int_list, in_range, parse_int_list


class ConfigError(ValueError):
    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass(frozen=True)
class RunConfig:
    # model
    nodes_per_column: int = 8
    max_new_links_per_step: int = 16
    hypothesis_sample_size: int = 2
    link_capacity_per_column: int = 64
    anticipation_threshold: float = 0.5
    perceptual_frequency: float = 1.0
    perceptual_confidence: float = 0.9
    initial_link_priority: float = 0.8
    link_durability: float = 0.9
    node_durability: float = 0.9
    evidential_horizon: float = 1.0
    rng_seed: int = 0
    # generator
    setting: int = 1
    m: int = 6
    k: int = 2
    p: int = 0
    n: int = 100
    alphabet: str = string.ascii_uppercase + string.ascii_lowercase
    seed: int = 0
    # outputs
    accuracy_csv: str = "accuracy.csv"
    dot_file: str = "network.dot"
    window: int = 50
    dot_min_expectation: float = 0.6
    # sweep
    sweep_csv: str = "sweep.csv"
    m_values: Tuple[int, ...] = (4, 6, 8)
    k_values: Tuple[int, ...] = (2, 4, 8, 16)
    jobs: int = 1

    def model_config(self) -> ModelConfig:
        try:
            perceptual = TruthValue(self.perceptual_frequency, self.perceptual_confidence)
        except ValueError as exc:
            raise ConfigError("perceptual_truth", str(exc)) from exc
        try:
            return ModelConfig(
                nodes_per_column=self.nodes_per_column,
                max_new_links_per_step=self.max_new_links_per_step,
                hypothesis_sample_size=self.hypothesis_sample_size,
                link_capacity_per_column=self.link_capacity_per_column,
                anticipation_threshold=self.anticipation_threshold,
                perceptual_truth=perceptual,
                initial_link_priority=self.initial_link_priority,
                link_durability=self.link_durability,
                node_durability=self.node_durability,
                evidential_horizon=self.evidential_horizon,
                rng_seed=self.rng_seed,
            )
        except ModelConfigError as exc:
            raise ConfigError(exc.field, str(exc)) from exc

    def generator_spec(self) -> GeneratorSpec:
        return GeneratorSpec(
            setting=self.setting,
            m=self.m,
            k=self.k,
            p=self.p,
            n=self.n,
            alphabet=tuple(self.alphabet),
            seed=self.seed,
        )


FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}

_TYPE_NAMES = {int: "an integer", float: "a number", str: "a string"}


def _convert(key: str, raw: Any) -> Any:
    kind = FIELD_TYPES[key]
    if kind == Tuple[int, ...]:
        if isinstance(raw, (tuple, list)):
            return tuple(int(v) for v in raw)
        try:
            return tuple(parse_int_list(raw))
        except ValueError:
            raise ConfigError(
                key, f"expected a comma separated list of integers, got {raw!r}"
            ) from None
    if not isinstance(raw, str):
        return raw
    try:
        return kind(raw.strip()) if kind is not str else raw
    except ValueError:
        raise ConfigError(key, f"expected {_TYPE_NAMES[kind]}, got {raw!r}") from None


def parse_config(overrides: Mapping[str, Any], text: Optional[str] = None) -> RunConfig:
    """
    Build a :class:`RunConfig` from defaults, config-file text and overrides.

    :param overrides: command-line values by field name; ``None`` means the
        flag was not given
    :param text: contents of a ``key = value`` config file, if any
    :raises ConfigError: on an unknown key, a malformed value, or a value
        the model or generator rejects
    """
    values = {}
    if text is not None:
        for key, raw in dotenv_values(stream=io.StringIO(text), interpolate=False).items():
            if key not in FIELD_TYPES:
                raise ConfigError(key, "unknown key")
            if raw is None:
                raise ConfigError(key, "missing value")
            values[key] = _convert(key, raw)

    for key, value in overrides.items():
        if key not in FIELD_TYPES:
            raise ConfigError(key, "unknown key")
        if value is not None:
            values[key] = _convert(key, value)

    cfg = RunConfig(**values)
    validate(cfg)
    return cfg


def validate(cfg: RunConfig) -> None:
    cfg.model_config()
    try:
        cfg.generator_spec().validate()
    except GeneratorError as exc:
        raise ConfigError("generator", str(exc)) from exc
    if cfg.window < 1:
        raise ConfigError("window", "must be at least 1")
    if not in_range(cfg.dot_min_expectation, 0.0, 1.0):
        raise ConfigError("dot_min_expectation", "must be within [0, 1]")
    if cfg.jobs < 1:
        raise ConfigError("jobs", "must be at least 1")


def _render_value(value: Any) -> str:
    if isinstance(value, tuple):
        return format_int_list(value)
    if isinstance(value, str):
        escaped = value.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'
    return repr(value)


def render_config(cfg: RunConfig) -> str:
    """Write ``cfg`` in the config-file format read by :func:`parse_config`."""
    return "".join(f"{f.name} = {_render_value(getattr(cfg, f.name))}\n" for f in fields(cfg))
