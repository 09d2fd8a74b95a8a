"""Line-oriented analysis configuration files.

Example:

    source = M2 (+) M1
    hom = dsum(power(2), bar)
    mode = unitary
    analyses = lambda, verdict
    seed = 42
"""
from __future__ import annotations

import dataclasses

from . import dsl
from .algebra import AlgebraShape
from .errors import ConfigError, DslError, InvariantViolation, ParseError

UNITARY_ANALYSES = ("stone", "lambda", "k0", "pairing", "verdict", "dual", "thomsen", "ktu", "ftau")
GL_ANALYSES = ("gl",)
ALL_ANALYSES = UNITARY_ANALYSES + GL_ANALYSES


@dataclasses.dataclass(frozen=True)
class AnalysisConfig:
    source: AlgebraShape
    hom_text: str
    mode: str = "unitary"  # "unitary" | "gl"
    target: AlgebraShape | None = None
    analyses: tuple[str, ...] = ()
    seed: int = 0
    trials: int = 50
    tol: float | None = None

    def __post_init__(self):
        if self.mode not in ("unitary", "gl"):
            raise ConfigError(f"mode must be unitary or gl, got {self.mode!r}")
        analyses = tuple(self.analyses) or (
            UNITARY_ANALYSES if self.mode == "unitary" else GL_ANALYSES
        )
        object.__setattr__(self, "analyses", analyses)
        for name in analyses:
            if name not in ALL_ANALYSES:
                raise ConfigError(f"unknown analysis {name!r}")
        try:
            expr = dsl.parse_hom(self.hom_text)
            inferred = dsl.validate(expr, self.source, gl=self.mode == "gl")
        except (ParseError, DslError, InvariantViolation) as exc:
            raise ConfigError(f"invalid hom: {exc}") from exc
        if self.target is not None and self.target != inferred:
            raise ConfigError(
                f"declared target {self.target.text()} but expression maps to {inferred.text()}"
            )
        object.__setattr__(self, "target", inferred)

    @property
    def expr(self):
        return dsl.parse_hom(self.hom_text)

    def to_dict(self) -> dict:
        return {
            "source": self.source.text(),
            "target": self.target.text(),
            "hom": self.hom_text,
            "mode": self.mode,
            "analyses": list(self.analyses),
            "seed": self.seed,
            "trials": self.trials,
            "tol": self.tol,
        }


def parse_config_text(text: str, overrides: dict | None = None) -> AnalysisConfig:
    fields: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key in fields:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        fields[key] = value

    if overrides:
        fields.update({k: v for k, v in overrides.items() if v is not None})

    if "source" not in fields:
        raise ConfigError("missing required key 'source'")
    if "hom" not in fields:
        raise ConfigError("missing required key 'hom'")

    def as_int(key, default):
        if key not in fields:
            return default
        try:
            return int(fields[key])
        except ValueError as exc:
            raise ConfigError(f"{key} must be an integer, got {fields[key]!r}") from exc

    try:
        source = AlgebraShape.parse(str(fields["source"]))
        target = AlgebraShape.parse(str(fields["target"])) if "target" in fields else None
    except InvariantViolation as exc:
        raise ConfigError(str(exc)) from exc

    analyses: tuple = ()
    if "analyses" in fields:
        analyses = tuple(a.strip() for a in str(fields["analyses"]).split(",") if a.strip())

    tol = None
    if fields.get("tol") is not None:
        try:
            tol = float(fields["tol"])
        except ValueError as exc:
            raise ConfigError(f"tol must be a number, got {fields['tol']!r}") from exc

    return AnalysisConfig(
        source=source,
        hom_text=str(fields["hom"]),
        mode=str(fields.get("mode", "unitary")),
        target=target,
        analyses=analyses,
        seed=as_int("seed", 0),
        trials=as_int("trials", 50),
        tol=tol,
    )


def load_config(path: str, overrides: dict | None = None) -> AnalysisConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config_text(text, overrides)
