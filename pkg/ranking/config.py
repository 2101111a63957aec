"""
Experiment configuration: JSON documents turned into the stage configs of the pipeline.

Every key is optional; see README.md for the schema. Unknown keys, wrong
types and broken invariants raise ConfigError.
"""
import json
import logging
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Optional, Tuple, Union

from ranking.clustering import MERGE_RULES
from ranking.exceptions import ConfigError
from ranking.generators import Bounds, PlantedSpec, VotingConfig, derive_bounds

logger = logging.getLogger(__name__)

MODES = ('planted', 'voting')
VOTE_MODES = ('fixed', 'poisson')


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str = 'planted'
    n: Optional[int] = None
    k: int = 2
    domain_sizes: Optional[Tuple[int, ...]] = None
    p_intra: Union[float, Tuple[float, ...]] = 0.02
    p_cross: float = 0.5
    ratio: float = 0.05
    p_succ: float = 0.6
    votes: int = 100
    vote_mode: str = 'fixed'
    eps: float = 0.15
    k_u: Optional[int] = None
    gadget: str = 'qr7'
    seeds: Tuple[int, ...] = (1,)
    C: int = 15
    depth: Optional[int] = None
    quicksort_runs: Optional[int] = None
    sample_size: int = 0
    purify: bool = True
    merge: str = 'bound'
    queries: Optional[int] = None
    p_u: Optional[float] = None
    p_m: Optional[float] = None
    label: str = ''

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.vote_mode not in VOTE_MODES:
            raise ConfigError(f"vote_mode must be one of {VOTE_MODES}, got {self.vote_mode!r}")
        if self.domain_sizes is None and self.n is None:
            raise ConfigError("either n or domain_sizes is required")
        if self.domain_sizes is not None:
            if len(self.domain_sizes) == 0:
                raise ConfigError("domain_sizes must not be empty")
            if self.n is not None and self.n != sum(self.domain_sizes):
                raise ConfigError(f"n={self.n} does not match sum(domain_sizes)={sum(self.domain_sizes)}")
        elif self.k < 1 or self.n < 2 * self.k:
            raise ConfigError(f"n={self.n} cannot hold k={self.k} domains of at least 2 vertices")
        if not 0 < self.eps < 1:
            raise ConfigError(f"eps must lie in (0, 1), got {self.eps}")
        if not 0 <= self.ratio < 1:
            raise ConfigError(f"ratio must lie in [0, 1), got {self.ratio}")
        if not 0.5 < self.p_succ <= 1:
            raise ConfigError(f"p_succ must lie in (0.5, 1], got {self.p_succ}")
        if self.votes < 1:
            raise ConfigError(f"votes must be at least 1, got {self.votes}")
        if self.mode == 'voting' and self.purify and self.votes < 2:
            raise ConfigError(
                f"votes={self.votes} cannot be split in two halves for purify; "
                f"use votes >= 2 or set purify to false"
            )
        if self.mode == 'voting':
            try:
                self.voting_config(halved=self.purify)
            except ConfigError as e:
                raise ConfigError(f"votes={self.votes} with ratio={self.ratio}: {e}") from e
        if self.merge not in MERGE_RULES:
            raise ConfigError(f"merge must be one of {MERGE_RULES}, got {self.merge!r}")
        if not self.seeds:
            raise ConfigError("seeds must not be empty")
        if self.C < 1:
            raise ConfigError(f"C must be at least 1, got {self.C}")
        if self.queries is not None and self.queries < 1:
            raise ConfigError(f"queries must be at least 1, got {self.queries}")
        if self.sample_size < 0:
            raise ConfigError(f"sample_size must be non-negative, got {self.sample_size}")

    # ── Loading ──────────────────────────────────────────────────────────
    @classmethod
    def from_dict(cls, data: dict) -> 'ExperimentConfig':
        if not isinstance(data, dict):
            raise ConfigError("experiment config must be a JSON object")
        known = {f.name: f for f in fields(cls)}
        unknown = sorted(set(data) - set(known))
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        values = {}
        for name, raw in data.items():
            values[name] = _coerce(name, raw)
        return cls(**values)

    @classmethod
    def from_file(cls, path) -> 'ExperimentConfig':
        path = Path(path)
        try:
            data = json.loads(path.read_text())
        except OSError as e:
            raise ConfigError(f"cannot read config {path}: {e}") from e
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path} is not valid JSON: {e}") from e
        config = cls.from_dict(data)
        if not config.label:
            config = replace(config, label=path.stem)
        return config

    def to_dict(self) -> dict:
        data = asdict(self)
        for key, value in data.items():
            if isinstance(value, tuple):
                data[key] = list(value)
        return data

    def with_overrides(self, **overrides) -> 'ExperimentConfig':
        """Apply command-line overrides; None values are ignored."""
        values = {key: _coerce(key, value) for key, value in overrides.items() if value is not None}
        return replace(self, **values) if values else self

    # ── Derived values ───────────────────────────────────────────────────
    @property
    def sizes(self) -> Tuple[int, ...]:
        if self.domain_sizes is not None:
            return tuple(self.domain_sizes)
        base, extra = divmod(self.n, self.k)
        return tuple(base + (1 if i < extra else 0) for i in range(self.k))

    @property
    def total_n(self) -> int:
        return sum(self.sizes)

    @property
    def domain_count(self) -> int:
        return len(self.sizes)

    def intra_probabilities(self) -> Tuple[float, ...]:
        if isinstance(self.p_intra, tuple):
            if len(self.p_intra) != self.domain_count:
                raise ConfigError(f"p_intra has {len(self.p_intra)} entries for {self.domain_count} domains")
            return self.p_intra
        return tuple([float(self.p_intra)] * self.domain_count)

    def voting_config(self, halved: bool = False) -> VotingConfig:
        """Voting parameters; ``halved`` gives the per-half counts after a vote split."""
        config = VotingConfig.from_ratio(self.p_succ, self.votes, self.ratio,
                                         poisson=self.vote_mode == 'poisson')
        if halved:
            config = replace(config, M=config.M // 2, m=config.m // 2)
        return config

    def planted_spec(self) -> PlantedSpec:
        cross = PlantedSpec.uniform(self.sizes, 0.0, self.p_cross).p_cross
        return PlantedSpec(domain_sizes=self.sizes, p_intra=self.intra_probabilities(),
                           p_cross=cross, bounds=self.bounds())

    def bounds(self) -> Bounds:
        """Published (p_u, p_m, k_u); explicit values override the derived ones."""
        k_u = self.k_u if self.k_u is not None else self.domain_count
        if self.mode == 'voting':
            p_u, p_m = derive_bounds(self.voting_config(halved=self.purify))
        else:
            p_u = max(self.intra_probabilities())
            p_m = 0.5 if self.domain_count == 1 else min(self.p_cross, 1 - self.p_cross)
        p_u = self.p_u if self.p_u is not None else p_u
        p_m = self.p_m if self.p_m is not None else p_m
        if p_u <= 0:
            raise ConfigError("p_u is 0 for noiseless domains; set p_u explicitly")
        return Bounds(p_u=p_u, p_m=p_m, k_u=k_u)

    def query_count(self, default: int) -> int:
        return self.queries if self.queries is not None else default


_TUPLE_KEYS = {'domain_sizes': int, 'seeds': int}
_INT_KEYS = {'n', 'k', 'votes', 'k_u', 'C', 'depth', 'quicksort_runs', 'sample_size', 'queries'}
_FLOAT_KEYS = {'p_cross', 'ratio', 'p_succ', 'eps', 'p_u', 'p_m'}
_STR_KEYS = {'mode', 'vote_mode', 'gadget', 'label', 'merge'}


def _coerce(name: str, raw):
    """Type-check one config value."""
    if raw is None:
        return None
    if name in _TUPLE_KEYS:
        if not isinstance(raw, (list, tuple)) or not all(_is_int(v) for v in raw):
            raise ConfigError(f"{name} must be a list of integers")
        return tuple(int(v) for v in raw)
    if name == 'p_intra':
        if isinstance(raw, (list, tuple)):
            if not all(_is_number(v) for v in raw):
                raise ConfigError("p_intra must be a number or a list of numbers")
            return tuple(float(v) for v in raw)
        if not _is_number(raw):
            raise ConfigError("p_intra must be a number or a list of numbers")
        return float(raw)
    if name in _INT_KEYS:
        if not _is_int(raw):
            raise ConfigError(f"{name} must be an integer, got {raw!r}")
        return int(raw)
    if name in _FLOAT_KEYS:
        if not _is_number(raw):
            raise ConfigError(f"{name} must be a number, got {raw!r}")
        return float(raw)
    if name == 'purify':
        if not isinstance(raw, bool):
            raise ConfigError(f"purify must be true or false, got {raw!r}")
        return raw
    if name in _STR_KEYS:
        if not isinstance(raw, str):
            raise ConfigError(f"{name} must be a string, got {raw!r}")
        return raw
    raise ConfigError(f"unknown config key {name!r}")


def _is_int(value) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _is_number(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)
