"""Flat ``key = value`` configuration files.

One entry per line, ``#`` starts a comment.  Lists are comma separated and
matrices are row-major with rows separated by ``;`` and entries by ``,``.
Entries are anything ``complex()`` accepts, e.g. ``0.5``, ``1-2j``.

Example::

    model = davies
    H_S_energy = 0, 0, 0; 0, 1, 0; 0, 0, 2.5
    beta_inv_energy = 1.0
    coupling_1 = 0, 1, 0; 1, 0, 1; 0, 1, 0
"""

import math

import numpy as np

from petzlab.errors import ConfigError

_MISSING = object()


class Config:
    """Parsed configuration with typed, key-naming accessors."""

    def __init__(self, entries, source="<config>"):
        self.entries = dict(entries)
        self.source = source

    def __contains__(self, key):
        return key in self.entries

    def keys_with_prefix(self, prefix):
        """Keys ``prefix1, prefix2, ...`` sorted by their numeric suffix."""
        found = []
        for key in self.entries:
            if key.startswith(prefix) and key[len(prefix):].isdigit():
                found.append((int(key[len(prefix):]), key))
        return [key for _, key in sorted(found)]

    def _raw(self, key, default):
        if key in self.entries:
            return self.entries[key]
        if default is _MISSING:
            raise ConfigError(key, "missing required entry")
        return None

    def string(self, key, default=_MISSING, choices=None):
        raw = self._raw(key, default)
        if raw is None:
            return default
        if choices is not None and raw not in choices:
            raise ConfigError(key, f"expected one of {', '.join(choices)}, got '{raw}'")
        return raw

    def real(self, key, default=_MISSING, low=None, high=None, open_low=False, open_high=False):
        raw = self._raw(key, default)
        if raw is None:
            return default
        try:
            value = float(raw)
        except ValueError:
            raise ConfigError(key, f"expected a real number, got '{raw}'") from None
        if not math.isfinite(value):
            raise ConfigError(key, f"expected a finite number, got '{raw}'")
        _check_range(key, value, low, high, open_low, open_high)
        return value

    def integer(self, key, default=_MISSING, low=None, high=None):
        raw = self._raw(key, default)
        if raw is None:
            return default
        try:
            value = int(raw)
        except ValueError:
            raise ConfigError(key, f"expected an integer, got '{raw}'") from None
        _check_range(key, value, low, high, False, False)
        return value

    def boolean(self, key, default=_MISSING):
        raw = self._raw(key, default)
        if raw is None:
            return default
        lowered = raw.lower()
        if lowered in ("1", "true", "yes", "on"):
            return True
        if lowered in ("0", "false", "no", "off"):
            return False
        raise ConfigError(key, f"expected a boolean, got '{raw}'")

    def reals(self, key, default=_MISSING, low=None, open_low=False):
        raw = self._raw(key, default)
        if raw is None:
            return default
        items = [item.strip() for item in raw.split(",")]
        if not items or any(not item for item in items):
            raise ConfigError(key, f"expected a comma-separated list, got '{raw}'")
        out = []
        for item in items:
            try:
                value = float(item)
            except ValueError:
                raise ConfigError(key, f"list entry '{item}' is not a real number") from None
            if not math.isfinite(value):
                raise ConfigError(key, f"list entry '{item}' is not finite")
            _check_range(key, value, low, None, open_low, False)
            out.append(value)
        return out

    def matrix(self, key, default=_MISSING, dim=None):
        raw = self._raw(key, default)
        if raw is None:
            return default
        value = parse_matrix(raw, key)
        if dim is not None and value.shape != (dim, dim):
            raise ConfigError(key, f"expected a {dim}x{dim} matrix, got {value.shape[0]}x{value.shape[1]}")
        return value


def _check_range(key, value, low, high, open_low, open_high):
    if low is not None and (value < low or (open_low and value == low)):
        bound = ">" if open_low else ">="
        raise ConfigError(key, f"must be {bound} {low}, got {value}")
    if high is not None and (value > high or (open_high and value == high)):
        bound = "<" if open_high else "<="
        raise ConfigError(key, f"must be {bound} {high}, got {value}")


def parse_matrix(raw, key="matrix"):
    rows = [r for r in raw.split(";")]
    parsed = []
    for row in rows:
        entries = [e.replace(" ", "") for e in row.split(",")]
        try:
            parsed.append([complex(e) for e in entries])
        except ValueError:
            raise ConfigError(key, f"cannot parse matrix row '{row.strip()}'") from None
    width = len(parsed[0])
    if any(len(r) != width for r in parsed):
        raise ConfigError(key, "matrix rows have different lengths")
    if len(parsed) != width:
        raise ConfigError(key, f"matrix must be square, got {len(parsed)}x{width}")
    return np.array(parsed, dtype=np.complex128)


def parse_config(text, source="<config>"):
    entries = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected 'key = value', got '{line}'")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}", "empty key")
        if key in entries:
            raise ConfigError(key, f"duplicate entry on line {lineno}")
        entries[key] = value
    return Config(entries, source)


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError("--config", f"cannot read '{path}': {exc.strerror}") from None
    except UnicodeDecodeError:
        raise ConfigError("--config", f"'{path}' is not valid UTF-8") from None
    return parse_config(text, source=str(path))
