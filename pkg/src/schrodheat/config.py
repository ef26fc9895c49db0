"""Flat key=value run configuration with dotted section prefixes.

Example:

    params.N=3
    params.alpha=2
    params.beta=4
    grid.n=2048
    kernel.t=0.1,0.5

Command-line --set key=value entries override file values.  Accessors
raise ConfigError naming the offending key; the CLI maps that to exit 2.
"""

from dataclasses import dataclass, field

from .model import OperatorParams, make_params


class ConfigError(ValueError):
    def __init__(self, key, message):
        super().__init__(f"config key '{key}': {message}")
        self.key = key


def parse_config_text(text: str) -> dict:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(line, f"line {lineno} is not key=value")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def load_config(path=None, overrides=()) -> "RunConfig":
    raw = {}
    if path is not None:
        with open(path) as fh:
            raw.update(parse_config_text(fh.read()))
    for item in overrides:
        if "=" not in item:
            raise ConfigError(item, "override is not key=value")
        key, value = item.split("=", 1)
        raw[key.strip()] = value.strip()
    return RunConfig(raw)


_BOOL = {"true": True, "1": True, "yes": True,
         "false": False, "0": False, "no": False}


@dataclass
class RunConfig:
    raw: dict = field(default_factory=dict)

    def has(self, key) -> bool:
        return key in self.raw

    def _fetch(self, key, default):
        if key not in self.raw:
            if default is _REQUIRED:
                raise ConfigError(key, "missing required key")
            return None
        return self.raw[key]

    def get_int(self, key, default=None):
        v = self._fetch(key, default)
        if v is None:
            return default
        try:
            return int(v)
        except ValueError:
            raise ConfigError(key, f"expected integer, got {v!r}") from None

    def get_float(self, key, default=None):
        v = self._fetch(key, default)
        if v is None:
            return default
        try:
            return float(v)
        except ValueError:
            raise ConfigError(key, f"expected number, got {v!r}") from None

    def get_bool(self, key, default=None):
        v = self._fetch(key, default)
        if v is None:
            return default
        if isinstance(v, bool):
            return v
        if v.lower() not in _BOOL:
            raise ConfigError(key, f"expected boolean, got {v!r}")
        return _BOOL[v.lower()]

    def get_str(self, key, default=None):
        v = self._fetch(key, default)
        return default if v is None else str(v)

    def get_floats(self, key, default=None):
        v = self._fetch(key, default)
        if v is None:
            return default
        try:
            return [float(x) for x in str(v).split(",") if x.strip()]
        except ValueError:
            raise ConfigError(key, f"expected comma-separated numbers, got {v!r}") from None

    def require_float(self, key):
        v = self._fetch(key, _REQUIRED)
        try:
            return float(v)
        except ValueError:
            raise ConfigError(key, f"expected number, got {v!r}") from None

    def require_int(self, key):
        v = self._fetch(key, _REQUIRED)
        try:
            return int(v)
        except ValueError:
            raise ConfigError(key, f"expected integer, got {v!r}") from None

    def params(self) -> OperatorParams:
        N = self.require_int("params.N")
        alpha = self.require_float("params.alpha")
        beta = self.require_float("params.beta")
        sanity = self.get_bool("params.sanity", False)
        try:
            return make_params(N, alpha, beta, sanity_mode=sanity)
        except ValueError as exc:
            raise ConfigError("params", str(exc)) from None

    def resolved_text(self) -> str:
        return "".join(f"{k}={self.raw[k]}\n" for k in sorted(self.raw))


class _Required:
    pass


_REQUIRED = _Required()
