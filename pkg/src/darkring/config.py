"""Run configuration: flat INI sections with explicit unit suffixes.

A config file looks like

    [beam]
    w0 = 1.7mm
    power = 150mW
    detuning = 0.5nm
    ell = 1
    rc_over_w0 = 0.79

Unknown keys are rejected with the file line that carries them. Every value
is stored in SI units after suffix conversion.
"""

from dataclasses import dataclass, field as dc_field

from .errors import ConfigError

_SUFFIXES = {
    "mm": 1e-3, "um": 1e-6, "nm": 1e-9, "m": 1.0,
    "ms": 1e-3, "us": 1e-6, "s": 1.0,
    "uK": 1e-6, "K": 1.0,
    "mW": 1e-3, "W": 1.0,
}

# section -> key -> (kind, default); kind "q" is a suffixed quantity,
# "f" a bare float, "i" an integer, "b" a 0/1 flag, "s" a string
_SCHEMA = {
    "beam": {
        "w0": ("q", 1.7e-3),
        "power": ("q", 0.150),
        "detuning": ("q", 1.0e-9),       # wavelength offset below resonance
        "ell": ("i", 1),
        "rc_over_w0": ("f", 0.79),
        "decompose": ("b", 0),
        "p_max": ("i", 5),
    },
    "optics": {
        "f": ("q", 215e-3),
        "grid_n": ("i", 512),
        "grid_extent": ("q", 16e-3),
        "z_span": ("q", 24e-3),
        "n_planes": ("i", 201),
        "pad_factor": ("i", 8),
        "crop": ("i", 512),
        "n_rho": ("i", 512),
        "rho_max": ("q", 0.32e-3),
        "fast": ("b", 0),
    },
    "atoms": {
        "n": ("i", 4000),
        "sigma": ("q", 250e-6),
        "temperature": ("q", 5e-6),
        "seed": ("i", 1),
    },
    "schedule": {
        "ramp": ("q", 5e-3),
        "duration": ("q", 1.5),
        "dt": ("q", 10e-6),
        "displacement": ("q", 0.0),
        "record_interval": ("q", 10e-3),
        "strip_half_width": ("q", 40e-6),
        "gravity": ("b", 1),
        "recoil_kicks": ("b", 0),
    },
    "output": {
        "directory": ("s", "out"),
        "formats": ("s", "csv,pgm,raw,png"),
    },
    "fit": {
        "input": ("s", ""),
        "model": ("s", "both"),          # single | chirped | both
        "eval_time": ("q", 0.5),
    },
    "optimize": {
        "ells": ("s", "0,1,2"),
        "bracket_lo": ("f", 0.5),
        "bracket_hi": ("f", 1.0),
        "xtol": ("f", 2e-3),
    },
}


def _parse_scalar(raw: str, kind: str, where: str):
    raw = raw.strip()
    if kind == "s":
        return raw
    if kind == "b":
        if raw.lower() in ("1", "true", "yes", "on"):
            return 1
        if raw.lower() in ("0", "false", "no", "off"):
            return 0
        raise ConfigError(f"{where}: expected a boolean flag, got {raw!r}")
    if kind == "i":
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"{where}: expected an integer, got {raw!r}") from None
    if kind == "f":
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(f"{where}: expected a number, got {raw!r}") from None
    # suffixed quantity: longest suffix match wins
    for suffix in sorted(_SUFFIXES, key=len, reverse=True):
        if raw.endswith(suffix):
            body = raw[: -len(suffix)].strip()
            try:
                return float(body) * _SUFFIXES[suffix]
            except ValueError:
                raise ConfigError(
                    f"{where}: bad number {body!r} before unit {suffix!r}") from None
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(
            f"{where}: expected a number with an optional unit suffix "
            f"({', '.join(sorted(_SUFFIXES))}), got {raw!r}") from None


@dataclass
class RunConfig:
    """Fully resolved configuration: every schema key has an SI value.

    ``provided`` records which keys the file set explicitly, so commands can
    insist on their required inputs while defaults cover the long tail.
    """

    values: dict = dc_field(default_factory=dict)
    provided: set = dc_field(default_factory=set)
    source: str = "<defaults>"

    def __getitem__(self, section: str) -> dict:
        return self.values[section]

    def get(self, section: str, key: str):
        return self.values[section][key]

    def require(self, *keys: str):
        """keys are 'section.key' names that the file must set explicitly."""
        missing = [k for k in keys if tuple(k.split(".", 1)) not in self.provided]
        if missing:
            raise ConfigError(
                f"{self.source}: missing required key(s): {', '.join(missing)}")

    def manifest(self) -> str:
        """Resolved config as INI text (defaults filled in, SI units)."""
        lines = [f"# resolved from {self.source}"]
        for section in _SCHEMA:
            lines.append(f"[{section}]")
            for key in _SCHEMA[section]:
                lines.append(f"{key} = {self.values[section][key]}")
            lines.append("")
        return "\n".join(lines)


def default_config() -> RunConfig:
    values = {section: {key: spec[1] for key, spec in keys.items()}
              for section, keys in _SCHEMA.items()}
    return RunConfig(values=values)


def parse_config(text: str, source: str = "<string>") -> RunConfig:
    """Parse INI text against the schema; reject unknown names with lines."""
    cfg = default_config()
    cfg.source = source
    section = None
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].split(";", 1)[0].strip()
        if not line:
            continue
        where = f"{source}:{lineno}"
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in _SCHEMA:
                raise ConfigError(f"{where}: unknown section [{section}]")
            continue
        if "=" not in line:
            raise ConfigError(f"{where}: expected key = value, got {line!r}")
        if section is None:
            raise ConfigError(f"{where}: key outside any [section]")
        key, _, raw_value = line.partition("=")
        key = key.strip()
        if key not in _SCHEMA[section]:
            raise ConfigError(f"{where}: unknown key {key!r} in [{section}]")
        kind = _SCHEMA[section][key][0]
        cfg.values[section][key] = _parse_scalar(raw_value, kind, where)
        cfg.provided.add((section, key))
    return cfg


def load_config(path) -> RunConfig:
    try:
        with open(path, "r") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, source=str(path))
