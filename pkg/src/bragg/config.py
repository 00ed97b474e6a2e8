"""Flat ``section.key = value`` run configuration and its content hash."""
from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

from .comb import VanHoveSpec
from .errors import ValidationError

# keys a scheme file (or the ``scheme.`` section) may carry
SCHEME_KEYS = (
    "preset", "m", "basis.v1", "basis.v2", "window.lo", "window.hi",
    "weight.kind", "weight.halfwidth", "weight.height", "weight.lo", "weight.hi", "weight.step",
)


def parse_flat(text: str, source: str = "<config>") -> dict[str, str]:
    """``key = value`` lines; ``#`` starts a comment, blank lines are skipped."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"{source}:{lineno}: expected 'key = value'")
        key, value = (t.strip() for t in line.split("=", 1))
        if not key:
            raise ValidationError(f"{source}:{lineno}: empty key")
        out[key] = value
    return out


def read_flat(path) -> dict[str, str]:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read {p}: {exc.strerror}") from None
    return parse_flat(text, str(p))


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(t) for t in text.replace(",", " ").split())


@dataclass(frozen=True)
class RunConfig:
    scheme_path: str | None = None
    scheme: dict = field(default_factory=dict)
    L0: float = 1.0
    sizes: tuple[int, ...] = (50, 100, 200, 400)
    freq_lo: float = 0.0
    freq_hi: float = 10.0
    candidate_source: str = "dual"
    coeff_bound: int = 8
    internal_max: float | None = None
    epsilon: float | None = None
    eps_factor: float = 1e-3
    delta_rel: float = 0.05
    order_tol: float = 1e-9
    gram_tol: float = 1e-8
    radius: float = 20.0
    output_dir: str = "."
    seed: int = 42

    def __post_init__(self):
        if not self.L0 > 0:
            raise ValidationError("vanhove.L0 must be positive")
        if len(self.sizes) < 3:
            raise ValidationError("vanhove.sizes needs at least three sizes")
        if any(s <= 0 for s in self.sizes) or any(b <= a for a, b in zip(self.sizes, self.sizes[1:])):
            raise ValidationError("vanhove.sizes must be positive and increasing")
        if not self.freq_lo < self.freq_hi:
            raise ValidationError("freq.lo must be below freq.hi")
        if self.candidate_source not in ("dual", "grid", "refined"):
            raise ValidationError(f"unknown candidate source {self.candidate_source!r}")
        for name in ("eps_factor", "delta_rel", "order_tol", "gram_tol", "radius"):
            if not getattr(self, name) > 0:
                raise ValidationError(f"{name} must be positive")
        if self.coeff_bound < 1:
            raise ValidationError("freq.coeff_bound must be >= 1")
        if self.internal_max is not None and not self.internal_max > 0:
            raise ValidationError("freq.internal_max must be positive")
        if self.epsilon is not None and self.epsilon < 0:
            raise ValidationError("thresholds.epsilon must be nonnegative")
        if not 0 <= self.seed < 2**64:
            raise ValidationError("seed must fit in 64 bits")

    @property
    def spec(self) -> VanHoveSpec:
        return VanHoveSpec(self.L0, self.sizes)

    @property
    def freq_window(self) -> tuple[float, float]:
        return (self.freq_lo, self.freq_hi)

    def canonical(self) -> str:
        """Stable text form: one ``key = value`` line per field, sorted."""
        items = {
            "freq.coeff_bound": self.coeff_bound,
            "freq.hi": repr(self.freq_hi),
            "freq.internal_max": repr(self.internal_max),
            "freq.lo": repr(self.freq_lo),
            "freq.source": self.candidate_source,
            "run.radius": repr(self.radius),
            "run.seed": self.seed,
            "thresholds.delta_rel": repr(self.delta_rel),
            "thresholds.eps_factor": repr(self.eps_factor),
            "thresholds.epsilon": repr(self.epsilon),
            "thresholds.gram_tol": repr(self.gram_tol),
            "thresholds.order_tol": repr(self.order_tol),
            "vanhove.L0": repr(self.L0),
            "vanhove.sizes": " ".join(str(s) for s in self.sizes),
        }
        for k, v in self.scheme.items():
            items[f"scheme.{k}"] = v
        return "".join(f"{k} = {items[k]}\n" for k in sorted(items))

    def hash(self) -> str:
        return hashlib.sha256(self.canonical().encode("utf-8")).hexdigest()[:16]


_FIELDS = {
    "vanhove.L0": ("L0", float),
    "vanhove.sizes": ("sizes", lambda t: tuple(int(v) for v in _floats(t))),
    "freq.lo": ("freq_lo", float),
    "freq.hi": ("freq_hi", float),
    "freq.source": ("candidate_source", str),
    "freq.coeff_bound": ("coeff_bound", int),
    "freq.internal_max": ("internal_max", float),
    "thresholds.epsilon": ("epsilon", float),
    "thresholds.eps_factor": ("eps_factor", float),
    "thresholds.delta_rel": ("delta_rel", float),
    "thresholds.order_tol": ("order_tol", float),
    "thresholds.gram_tol": ("gram_tol", float),
    "run.radius": ("radius", float),
    "run.seed": ("seed", int),
    "output.dir": ("output_dir", str),
}


def build_config(values: Mapping[str, str], base_dir: str | os.PathLike = ".") -> RunConfig:
    """RunConfig from flat values.  ``scheme.path`` names a scheme file whose
    keys are overridden by inline ``scheme.<key>`` entries."""
    kw: dict = {}
    scheme: dict = {}
    path = values.get("scheme.path")
    if path:
        full = Path(base_dir) / path
        scheme.update(read_flat(full))
        kw["scheme_path"] = str(path)
    for key, raw in values.items():
        if key == "scheme.path":
            continue
        if key.startswith("scheme."):
            scheme[key[len("scheme."):]] = raw
            continue
        if key not in _FIELDS:
            raise ValidationError(f"unknown config key {key!r}")
        name, conv = _FIELDS[key]
        try:
            kw[name] = None if raw.lower() in ("none", "auto", "") and name in ("epsilon", "internal_max") else conv(raw)
        except ValueError:
            raise ValidationError(f"bad value for {key}: {raw!r}") from None
    unknown = set(scheme) - set(SCHEME_KEYS) - {"name"}
    if unknown:
        raise ValidationError(f"unknown scheme keys: {', '.join(sorted(unknown))}")
    if scheme:
        kw["scheme"] = scheme
    return RunConfig(**kw)


def load_config(path=None, overrides: Mapping[str, str] | None = None) -> RunConfig:
    values: dict[str, str] = {}
    base = "."
    if path is not None:
        values.update(read_flat(path))
        base = str(Path(path).parent)
    values.update(overrides or {})
    return build_config(values, base)
