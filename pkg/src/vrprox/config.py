"""Experiment configuration: flat key=value files with # comments.

The regularization rule is symbolic ("1/10n", "1/100n" or a literal float)
and is resolved once the dataset size is known.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from .problem import Perturbation
from .prox import Regularizer
from .schedules import POLICY_KINDS

__all__ = ["ConfigError", "ExperimentConfig", "load_config", "parse_kv", "resolve_lambda"]


class ConfigError(ValueError):
    pass


def parse_kv(path) -> dict[str, str]:
    """Parse one key=value pair per line; '#' starts a comment."""
    out: dict[str, str] = {}
    text = Path(path).read_text()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = line.split("=", 1)
        key, value = key.strip(), value.strip()
        if not key:
            raise ConfigError(f"{path}:{lineno}: empty key")
        if key in out:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        out[key] = value
    return out


_LAMBDA_RULE = re.compile(r"^1\s*/\s*(\d+(?:\.\d+)?)\s*n$")


def resolve_lambda(rule: str, n: int) -> float:
    """Evaluate a symbolic rule like "1/10n" (meaning 1/(10*n)) or a float."""
    m = _LAMBDA_RULE.match(rule.strip())
    if m:
        value = 1.0 / (float(m.group(1)) * n)
    else:
        try:
            value = float(rule)
        except ValueError:
            raise ConfigError(f"cannot parse regularization rule {rule!r}") from None
    if not value > 0:
        raise ConfigError(f"regularization rule {rule!r} must evaluate positive")
    return value


def _parse_bool(value: str, key: str) -> bool:
    low = value.lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ConfigError(f"{key}: expected a boolean, got {value!r}")


def _parse_perturbation(value: str) -> Perturbation:
    parts = value.split(":")
    kind = parts[0].strip()
    if kind == "none":
        return Perturbation.none()
    if kind == "dropout":
        if len(parts) != 2:
            raise ConfigError("dropout perturbation needs a rate, e.g. dropout:0.1")
        return Perturbation.dropout(float(parts[1]))
    if kind == "gaussian":
        if len(parts) != 2:
            raise ConfigError("gaussian perturbation needs a std, e.g. gaussian:0.01")
        return Perturbation.gaussian(float(parts[1]))
    raise ConfigError(f"unknown perturbation {value!r}")


def _parse_regularizer(value: str) -> Regularizer:
    parts = value.split(":")
    kind = parts[0].strip()
    if kind == "none":
        return Regularizer.none()
    if kind == "l1":
        if len(parts) != 2:
            raise ConfigError("l1 regularizer needs a weight, e.g. l1:0.001")
        return Regularizer.l1(float(parts[1]))
    if kind == "box":
        if len(parts) != 3:
            raise ConfigError("box regularizer needs bounds, e.g. box:-1:1")
        return Regularizer.box(float(parts[1]), float(parts[2]))
    raise ConfigError(f"unknown regularizer {value!r}")


def _parse_label_map(value: str) -> dict[float, float]:
    out: dict[float, float] = {}
    for tok in value.split(","):
        tok = tok.strip()
        if not tok:
            continue
        try:
            src, dst = tok.split(":")
            out[float(src)] = float(dst)
        except ValueError:
            raise ConfigError(f"malformed label_map entry {tok!r}") from None
    return out


@dataclass
class ExperimentConfig:
    dataset: str  # "synthetic" or a LIBSVM file path
    loss: str = "logistic"
    lambda_rule: str = "1/10n"
    mu: float | None = None
    regularizer: Regularizer = field(default_factory=Regularizer.none)
    perturbation: Perturbation = field(default_factory=Perturbation.none)
    algorithms: tuple[str, ...] = ("svrg_const",)
    sampling: str = "uniform"
    budget: float = 100.0
    seeds: tuple[int, ...] = (0, 1, 2, 3, 4)
    record_every: float = 5.0
    mc_samples: int = 5
    stage1_epochs: float = 0.0
    averaging: bool = False
    normalize: bool = True
    label_map: dict[float, float] | None = None
    synthetic_n: int = 1000
    synthetic_p: int = 50
    synthetic_noise: float = 0.0
    synthetic_seed: int = 0
    output: str = "runs"
    record_timings: bool = False
    fstar: float | None = None

    def __post_init__(self):
        for algo in self.algorithms:
            if algo not in POLICY_KINDS:
                raise ConfigError(
                    f"unknown algorithm {algo!r}; choose from {', '.join(POLICY_KINDS)}"
                )
        if self.loss not in ("logistic", "squared"):
            raise ConfigError(f"unknown loss {self.loss!r}")
        if self.sampling not in ("uniform", "lipschitz"):
            raise ConfigError(f"unknown sampling mode {self.sampling!r}")
        if not self.seeds:
            raise ConfigError("at least one seed is required")


def load_config(path) -> ExperimentConfig:
    kv = parse_kv(path)
    known = {
        "dataset",
        "loss",
        "lambda",
        "mu",
        "regularizer",
        "perturbation",
        "algorithms",
        "sampling",
        "budget",
        "seeds",
        "record_every",
        "mc_samples",
        "stage1_epochs",
        "averaging",
        "normalize",
        "label_map",
        "synthetic.n",
        "synthetic.p",
        "synthetic.noise",
        "synthetic.seed",
        "output",
        "record_timings",
        "fstar",
    }
    unknown = set(kv) - known
    if unknown:
        raise ConfigError(f"{path}: unknown keys: {', '.join(sorted(unknown))}")
    if "dataset" not in kv:
        raise ConfigError(f"{path}: missing required key 'dataset'")

    def get(key, default=None):
        return kv.get(key, default)

    try:
        cfg = ExperimentConfig(
            dataset=kv["dataset"],
            loss=get("loss", "logistic"),
            lambda_rule=get("lambda", "1/10n"),
            mu=float(kv["mu"]) if "mu" in kv else None,
            regularizer=_parse_regularizer(get("regularizer", "none")),
            perturbation=_parse_perturbation(get("perturbation", "none")),
            algorithms=tuple(a.strip() for a in get("algorithms", "svrg_const").split(",") if a.strip()),
            sampling=get("sampling", "uniform"),
            budget=float(get("budget", "100")),
            seeds=tuple(int(s) for s in get("seeds", "0,1,2,3,4").split(",") if s.strip()),
            record_every=float(get("record_every", "5")),
            mc_samples=int(get("mc_samples", "5")),
            stage1_epochs=float(get("stage1_epochs", "0")),
            averaging=_parse_bool(get("averaging", "false"), "averaging"),
            normalize=_parse_bool(get("normalize", "true"), "normalize"),
            label_map=_parse_label_map(kv["label_map"]) if "label_map" in kv else None,
            synthetic_n=int(get("synthetic.n", "1000")),
            synthetic_p=int(get("synthetic.p", "50")),
            synthetic_noise=float(get("synthetic.noise", "0")),
            synthetic_seed=int(get("synthetic.seed", "0")),
            output=get("output", "runs"),
            record_timings=_parse_bool(get("record_timings", "false"), "record_timings"),
            fstar=float(kv["fstar"]) if "fstar" in kv else None,
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return cfg
