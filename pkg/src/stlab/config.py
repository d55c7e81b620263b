"""JSON run configurations.

Example (count)::

    {"command": "count", "curve": {"genus": 1, "f": [0, 1, 0, 1]}, "p_max": 100,
     "galois": {"discs": [-1]}}

Example (lefschetz)::

    {"command": "lefschetz", "n": 2, "pairing": [[0, 1], [-1, 0]],
     "generators": [[[0, -1], [1, 0]]],
     "galois": {"discs": [-1], "actions": [[[1, 0], [0, 1]], [[1, 0], [0, -1]]]}}

Rationals may be integers or strings such as ``"-3/4"``. Action matrices act
on coordinates in the algebra basis, which is the identity, then the
independent generators, then new products in discovery order.
"""
from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field

from .endo_galois import EndAlgebra, GaloisTwistGroup, validate_action
from .equidist import Policy
from .errors import ConfigError, StlabError
from .exact_linalg import RationalMatrix
from .frobenius import CurveSpec
from .haar import GROUPS, CompactGroupId
from .pairing import PolarizedSpace

COMMANDS = ("lefschetz", "haar-moments", "count", "analyze", "selftest")


@dataclass
class RunConfig:
    command: str
    raw: dict = field(default_factory=dict)
    curve: CurveSpec | None = None
    space: PolarizedSpace | None = None
    algebra: EndAlgebra | None = None
    group: GaloisTwistGroup | None = None
    p_max: int | None = None
    seed: int = 0
    parallelism: int | None = None
    budget: int = 100
    n_samples: int = 10 ** 6
    candidate: CompactGroupId | None = None
    catalog: tuple[str, ...] | None = None
    hypothesis: dict | None = None
    policy: Policy = field(default_factory=Policy)
    traces: str | None = None
    output: str | None = None
    allow_large: bool = False

    @property
    def config_hash(self) -> str:
        return config_hash(self.raw)


def config_hash(raw: dict) -> str:
    """sha256 of the canonical JSON form, ignoring keys that cannot change results."""
    clean = {k: v for k, v in raw.items() if k not in ("parallelism", "output", "out")}
    text = json.dumps(clean, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


def _line_of(text: str, key: str) -> int | None:
    m = re.search(r'"' + re.escape(key) + r'"\s*:', text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def _matrix(obj, n=None) -> RationalMatrix:
    if obj and not isinstance(obj[0], list):
        if n is None:
            raise ConfigError("flat matrix needs a known size")
        return RationalMatrix.from_flat(obj, n)
    return RationalMatrix(obj)


def _group(obj, algebra: EndAlgebra | None) -> GaloisTwistGroup:
    actions = obj.get("actions")
    mats = None
    if actions is not None:
        d = algebra.dim if algebra is not None else None
        mats = tuple(_matrix(a, d) for a in actions)
    if "discs" in obj:
        g = GaloisTwistGroup.multiquadratic(obj["discs"], mats)
        if "labels" in obj:
            g = GaloisTwistGroup(tuple(obj["labels"]), g.table, g.discs, g.actions)
        return g
    if "table" in obj:
        labels = tuple(obj.get("labels") or [str(i) for i in range(len(obj["table"]))])
        return GaloisTwistGroup(labels, tuple(tuple(int(x) for x in r) for r in obj["table"]), None, mats)
    raise ConfigError("galois needs either 'discs' or an abstract 'table'")


def parse_config(text: str) -> RunConfig:
    """Parse and eagerly validate a JSON run configuration."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"malformed JSON: {e.msg}", e.lineno) from None
    if not isinstance(raw, dict):
        raise ConfigError("configuration must be a JSON object", 1)
    cmd = raw.get("command")
    if cmd not in COMMANDS:
        raise ConfigError(f"unknown command {cmd!r}", _line_of(text, "command"))
    cfg = RunConfig(cmd, raw)

    def anchored(key, fn):
        try:
            return fn()
        except ConfigError:
            raise
        except (StlabError, ValueError, TypeError, KeyError, ZeroDivisionError) as e:
            msg = e.args[0] if isinstance(e, StlabError) else str(e)
            raise ConfigError(f"{key}: {msg}", _line_of(text, key)) from None

    if "curve" in raw:
        c = raw["curve"]
        cfg.curve = anchored("curve", lambda: CurveSpec(int(c["genus"]), tuple(int(x) for x in c["f"])))
    if "pairing" in raw:
        cfg.space = anchored("pairing", lambda: PolarizedSpace.from_json(raw))
    if "generators" in raw or cfg.space is not None:
        n = cfg.space.n if cfg.space else int(raw["n"])
        gens = raw.get("generators", [])
        cfg.algebra = anchored("generators", lambda: EndAlgebra.generated_by([_matrix(g, n) for g in gens], n))
    if "galois" in raw:
        cfg.group = anchored("galois", lambda: _group(raw["galois"], cfg.algebra))
        if cfg.group.actions is not None and cfg.algebra is not None:
            problems = anchored("galois", lambda: validate_action(cfg.algebra, cfg.group))
            if problems:
                raise ConfigError("galois: invalid action: " + "; ".join(problems), _line_of(text, "galois"))
    elif cfg.algebra is not None:
        cfg.group = GaloisTwistGroup.trivial(cfg.algebra.dim)

    for key, attr, conv in (("p_max", "p_max", int), ("seed", "seed", int), ("budget", "budget", int),
                            ("parallelism", "parallelism", int), ("n", "n_samples", int),
                            ("traces", "traces", str), ("allow_large", "allow_large", bool)):
        if key in raw and not (key == "n" and cmd != "haar-moments"):
            setattr(cfg, attr, anchored(key, lambda: conv(raw[key])))
    if "N" in raw:
        cfg.n_samples = anchored("N", lambda: int(raw["N"]))

    pol = {}
    if "k_max" in raw:
        pol["k_max"] = anchored("k_max", lambda: int(raw["k_max"]))
    if "z_threshold" in raw:
        pol["z_threshold"] = anchored("z_threshold", lambda: float(raw["z_threshold"]))
    cfg.policy = Policy(**pol)

    if "candidate" in raw:
        cand = raw["candidate"]
        cfg.candidate = anchored("candidate", lambda: CompactGroupId(cand["group"], cand.get("component"))
                                 if isinstance(cand, dict) else CompactGroupId(cand))
    if "catalog" in raw:
        bad = [g for g in raw["catalog"] if g not in GROUPS]
        if bad or not raw["catalog"]:
            raise ConfigError(f"catalog: unknown or empty entries {bad}", _line_of(text, "catalog"))
        cfg.catalog = tuple(raw["catalog"])
    if "hypothesis" in raw:
        hyp = {}
        for lab, val in raw["hypothesis"].items():
            g = anchored("hypothesis", lambda: CompactGroupId(*val))
            hyp[lab] = (g.name, g.component)
        cfg.hypothesis = hyp
        if cfg.group is None:
            raise ConfigError("hypothesis needs a 'galois' group", _line_of(text, "hypothesis"))

    if cmd in ("count",) and cfg.curve is None:
        raise ConfigError("count needs a 'curve'", 1)
    if cmd == "count" and cfg.p_max is None:
        raise ConfigError("count needs 'p_max'", 1)
    if cmd == "lefschetz" and cfg.space is None:
        raise ConfigError("lefschetz needs a 'pairing'", 1)
    return cfg
