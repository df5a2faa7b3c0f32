"""Attack descriptions and their compact string form.

The string form (`blur:sigma=1.0`, `semregen:tau=0.5,backend=builtin`)
doubles as the attack's identifier in reports, so parsing and formatting
must round-trip.
"""

from dataclasses import dataclass, fields

from ..errors import InvalidParameter


@dataclass(frozen=True)
class Identity:
    """No-op attack; the whole image is guaranteed preserved."""


@dataclass(frozen=True)
class Blur:
    sigma: float = 1.0


@dataclass(frozen=True)
class JpegProxy:
    quality: int = 50


@dataclass(frozen=True)
class Resize:
    """Downscale by `factor`, then upscale back to the original size."""

    factor: float = 0.5


@dataclass(frozen=True)
class Noise:
    sigma: float = 0.05


@dataclass(frozen=True)
class RegenProxy:
    strength: float = 0.1
    steps: int = 1


@dataclass(frozen=True)
class Rinse:
    cycles: int = 4
    strength: float = 0.1
    steps: int = 1


@dataclass(frozen=True)
class SemanticRegen:
    tau: float = 0.5
    tau_max: float = 0.85
    backend: str = "builtin"

    def validate(self):
        if not 0.0 < self.tau < 1.0:
            raise InvalidParameter("tau must be in (0, 1)")
        if not self.tau < self.tau_max <= 1.0:
            raise InvalidParameter("tau_max must be in (tau, 1]")
        if self.backend != "builtin" and not self.backend.startswith("exec:"):
            raise InvalidParameter(
                "backend must be 'builtin' or 'exec:<command>'"
            )


_SPEC_NAMES = {
    "identity": Identity,
    "blur": Blur,
    "jpeg": JpegProxy,
    "resize": Resize,
    "noise": Noise,
    "regen": RegenProxy,
    "rinse": Rinse,
    "semregen": SemanticRegen,
}
_NAME_OF = {cls: name for name, cls in _SPEC_NAMES.items()}


def parse_attack_spec(text):
    """Parse a compact attack string such as `rinse:cycles=4,steps=2`.

    Values keep everything after the first `=`, so an exec backend
    command may itself contain `=` and spaces (commas are the only
    reserved character).
    """
    name, _, rest = text.strip().partition(":")
    cls = _SPEC_NAMES.get(name)
    if cls is None:
        raise InvalidParameter(f"unknown attack {name!r}")
    allowed = {f.name: f.type for f in fields(cls)}
    kwargs = {}
    if rest:
        for part in rest.split(","):
            key, eq, value = part.partition("=")
            key = key.strip()
            if not eq or key not in allowed:
                raise InvalidParameter(f"bad attack parameter {part!r}")
            if allowed[key] is int:
                try:
                    kwargs[key] = int(value)
                except ValueError:
                    raise InvalidParameter(f"{key} must be an integer")
            elif allowed[key] is float:
                try:
                    kwargs[key] = float(value)
                except ValueError:
                    raise InvalidParameter(f"{key} must be a number")
            else:
                kwargs[key] = value.strip()
    spec = cls(**kwargs)
    if isinstance(spec, SemanticRegen):
        spec.validate()
    return spec


def format_attack_spec(spec):
    """Canonical compact string; inverse of parse_attack_spec."""
    name = _NAME_OF[type(spec)]
    parts = []
    for f in fields(spec):
        value = getattr(spec, f.name)
        if f.type is float:
            parts.append(f"{f.name}={value:g}")
        else:
            parts.append(f"{f.name}={value}")
    return name if not parts else f"{name}:{','.join(parts)}"
