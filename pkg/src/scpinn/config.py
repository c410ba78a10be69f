"""Run configuration: a flat, typed ``key = value`` text format.

Example::

    # 1D Poisson with the strong variational loss
    problem = "poisson1d"
    param.omega = 3.141592653589793
    loss = "strong_variational"
    n_r = 100
    hidden = [20, 20, 20, 20]
    epochs = 10000

Values are Python-style literals (strings in double quotes, ints, floats,
lists of ints); ``true``/``false`` are accepted for booleans.  ``#`` starts a
comment outside of strings.  Keys ``param.<name>`` are forwarded to the problem
builder; every other key must appear in :data:`SCHEMA`.
"""

from __future__ import annotations

import ast
import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

from .losses import LOSS_KINDS, LossSpec
from .nn import ACTIVATIONS, MLPArchitecture
from .optim import TrainConfig
from .problems import BUILDERS, ProblemError, get_problem


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    problem: str
    params: dict = field(default_factory=dict)
    loss: str = "strong_variational"
    k: int = 0
    l: int = 0
    n_r: int = 30
    n_s: int = 30
    boundary_kind: str = ""  # empty: derived from l
    boundary_sum: str = "per_face"
    w_interior: float = 1.0
    w_boundary: float = 1.0
    w_data: float = 0.0
    mse_seed: int = 0
    hidden: list = field(default_factory=lambda: [50, 50, 50, 50, 50])
    activation: str = "sin"
    epochs: int = 1000
    lr: float = 1e-3
    lr_lambda: float = 0.0  # 0: same as lr
    lambda0: float = 1.0
    seed: int = 0
    eval_n: int = 100
    checkpoint_every: int = 0
    output_dir: str = "runs"

    def __post_init__(self):
        if self.problem not in BUILDERS:
            raise ConfigError(f"unknown problem {self.problem!r}")
        if self.loss not in LOSS_KINDS:
            raise ConfigError(f"unknown loss {self.loss!r}")
        if self.activation not in ACTIVATIONS:
            raise ConfigError(f"unknown activation {self.activation!r}")
        if self.boundary_sum not in ("per_face", "pre"):
            raise ConfigError(f"boundary_sum must be per_face or pre, got {self.boundary_sum!r}")
        if self.boundary_kind not in ("", "W", "U"):
            raise ConfigError(f"boundary_kind must be W or U, got {self.boundary_kind!r}")
        if self.epochs < 0 or self.eval_n < 2 or self.n_r < 1 or self.n_s < 0:
            raise ConfigError("epochs, eval_n and grid degrees are out of range")
        if not self.hidden or any(int(h) < 1 for h in self.hidden):
            raise ConfigError(f"hidden widths must be positive, got {self.hidden}")

    def build_problem(self):
        try:
            return get_problem(self.problem, **self.params)
        except ProblemError as exc:
            raise ConfigError(str(exc)) from None

    def loss_spec(self) -> LossSpec:
        return LossSpec(self.loss, self.k, self.l, self.n_r, self.n_s, self.boundary_kind or None,
                        self.boundary_sum, self.w_interior, self.w_boundary, self.w_data, self.mse_seed)

    def architecture(self, dim: int) -> MLPArchitecture:
        return MLPArchitecture((dim, *self.hidden, 1), self.activation)

    def train_config(self) -> TrainConfig:
        return TrainConfig(self.epochs, self.lr, self.lr_lambda or None, self.seed, self.eval_n,
                           self.checkpoint_every)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        flat = {k: v for k, v in data.items() if k != "params"}
        flat.update({f"param.{k}": v for k, v in data.get("params", {}).items()})
        return _from_flat(flat)

    def to_text(self) -> str:
        lines = []
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if f.name == "params":
                lines.extend(f"param.{k} = {_fmt(v)}" for k, v in sorted(value.items()))
            else:
                lines.append(f"{f.name} = {_fmt(value)}")
        return "\n".join(lines) + "\n"


SCHEMA = {f.name: f.type for f in dataclasses.fields(RunConfig) if f.name != "params"}


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(value, float):
        return repr(value)
    return repr(value)


def _strip_comment(line: str) -> str:
    quoted = False
    escaped = False
    for i, ch in enumerate(line):
        if escaped:
            escaped = False
        elif ch == "\\":
            escaped = True
        elif ch == '"':
            quoted = not quoted
        elif ch == "#" and not quoted:
            return line[:i]
    return line


def _coerce(key: str, value, typ: str):
    if typ == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{key} must be an integer, got {value!r}")
        return value
    if typ == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{key} must be a number, got {value!r}")
        return float(value)
    if typ == "str":
        if not isinstance(value, str):
            raise ConfigError(f"{key} must be a string, got {value!r}")
        return value
    if typ == "list":
        if not isinstance(value, (list, tuple)) or not all(isinstance(v, int) and not isinstance(v, bool) for v in value):
            raise ConfigError(f"{key} must be a list of integers, got {value!r}")
        return list(value)
    raise ConfigError(f"unsupported type for {key}")


def _from_flat(flat: dict) -> RunConfig:
    kwargs = {}
    params = {}
    for key, value in flat.items():
        if key.startswith("param."):
            name = key[len("param."):]
            if not name.isidentifier() or isinstance(value, (list, str)):
                raise ConfigError(f"bad problem parameter {key} = {value!r}")
            params[name] = value
        elif key in SCHEMA:
            kwargs[key] = _coerce(key, value, SCHEMA[key])
        else:
            raise ConfigError(f"unknown key {key!r}")
    if "problem" not in kwargs:
        raise ConfigError("missing required key 'problem'")
    try:
        cfg = RunConfig(params=params, **kwargs)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    cfg.build_problem()
    return cfg


def parse_config(text: str) -> RunConfig:
    flat = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key or not value:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        if key in flat:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        if value in ("true", "false"):
            flat[key] = value == "true"
            continue
        try:
            flat[key] = ast.literal_eval(value)
        except (ValueError, SyntaxError):
            raise ConfigError(f"line {lineno}: cannot parse value {value!r}") from None
    return _from_flat(flat)


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    return parse_config(text)
