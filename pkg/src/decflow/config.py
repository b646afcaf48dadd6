"""Run configuration for the command-line harness.

Configs are plain ``key = value`` text files: one setting per line, ``#``
starts a comment, blank lines are skipped.  The schema is fixed and strict —
unknown or repeated keys are errors, every numeric field is checked against
its documented bracket, and all parse errors carry the offending line number.
``seed`` is the only required key; everything else has a default.
"""

from __future__ import annotations

from dataclasses import dataclass, replace


class ConfigError(ValueError):
    """A malformed config file; message includes the source line number."""


@dataclass(frozen=True)
class RunConfig:
    """One harness invocation's worth of settings."""

    seed: int
    mesh: str = "flat_torus(64)"
    modes: int = 64
    T: float = 1.0
    dt: float = 0.01
    harmonic_class: tuple = ()
    field: str = "sobolev(2.5)"
    vanishing: int = 8
    quadrature: int = 64
    epsilon: float = 1e-3
    rank_tol: tuple = (1e-2, 1e-3)
    out: str = "out"

    def __post_init__(self):
        if self.seed < 0:
            raise ConfigError("seed must be a non-negative integer")
        if not 2 <= self.modes <= 4096:
            raise ConfigError(f"modes={self.modes} outside [2, 4096]")
        if self.T < 0:
            raise ConfigError(f"T={self.T} must be >= 0")
        if self.dt <= 0:
            raise ConfigError(f"dt={self.dt} must be > 0")
        if not 1 <= self.vanishing <= 32:
            raise ConfigError(f"vanishing={self.vanishing} outside [1, 32]")
        if not 8 <= self.quadrature <= 1024:
            raise ConfigError(f"quadrature={self.quadrature} outside [8, 1024]")
        if not 1e-4 <= self.epsilon <= 1e-2:
            raise ConfigError(f"epsilon={self.epsilon:g} outside [1e-4, 1e-2]")
        if not self.rank_tol:
            raise ConfigError("rank_tol needs at least one threshold")
        if any(not 0.0 < t < 1.0 for t in self.rank_tol):
            raise ConfigError("rank_tol thresholds must lie in (0, 1)")
        if list(self.rank_tol) != sorted(self.rank_tol, reverse=True):
            raise ConfigError("rank_tol thresholds must be strictly decreasing")

    def replace(self, **changes):
        return replace(self, **changes)


def _parse_int(text):
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"expected an integer, got {text!r}") from None


def _parse_float(text):
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"expected a number, got {text!r}") from None


def _parse_floats(text):
    parts = [p for p in text.replace(",", " ").split() if p]
    return tuple(_parse_float(p) for p in parts)


_PARSERS = {
    "seed": ("seed", _parse_int),
    "mesh": ("mesh", str),
    "modes": ("modes", _parse_int),
    "T": ("T", _parse_float),
    "dt": ("dt", _parse_float),
    "class": ("harmonic_class", _parse_floats),
    "field": ("field", str),
    "vanishing": ("vanishing", _parse_int),
    "quadrature": ("quadrature", _parse_int),
    "epsilon": ("epsilon", _parse_float),
    "rank_tol": ("rank_tol", _parse_floats),
    "out": ("out", str),
}


def parse_config(text, source="config"):
    """Parse ``key = value`` text into a RunConfig.

    ``source`` names the file in error messages.  Raises ConfigError on
    unknown keys, repeated keys, malformed values, a missing ``seed``, or
    any value outside its bracket.
    """
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source} line {lineno}: expected 'key = value', "
                              f"got {raw.strip()!r}")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key not in _PARSERS:
            raise ConfigError(f"{source} line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{source} line {lineno}: repeated key {key!r}")
        field_name, parse = _PARSERS[key]
        if not val:
            raise ConfigError(f"{source} line {lineno}: empty value for {key!r}")
        try:
            values[key] = (field_name, parse(val))
        except ConfigError as exc:
            raise ConfigError(f"{source} line {lineno}: {exc}") from None

    if "seed" not in values:
        raise ConfigError(f"{source}: missing required key 'seed'")
    kwargs = dict(values.values())
    try:
        return RunConfig(**kwargs)
    except ConfigError as exc:
        raise ConfigError(f"{source}: {exc}") from None


def load_config(path):
    """Read and parse a config file from disk."""
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read(), source=str(path))
