"""Command-line front end.

    python -m cantorscatter <command> [--N ..] [--rho ..] ... [--config file] [--out path] [--format csv|json]

Exit codes: 0 success, 1 domain error (invalid spec, out-of-range physics),
2 usage or parse error.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import __version__
from .analysis import (
    SATURATION_DELTA,
    find_resonances,
    k_sweep,
    rho_k_grid,
    saturation_metric,
    scaling_fit,
)
from .errors import (
    DegenerateEnergy,
    DomainError,
    InsufficientPoints,
    InvalidSpec,
    LayoutTooLarge,
    NonPhysicalMatrix,
)
from .fractal import fractal_dimension, lacunarity_parameters
from .geometry import DEFAULT_MAX_SEGMENTS, PotentialSpec, build_layout, validate_spec
from .scattering import DEGENERATE_BAND, brute_force_matrix, transmission_from_matrix
from .spp import log_denominator

UNITS = "hbar=1, 2m=1"
COMMANDS = ("validate", "layout", "transmit", "sweep", "grid", "saturate", "scaling", "resonances", "descriptors")
SPEC_FIELDS = ("N", "rho", "mu", "nu", "S", "L", "V")
DOMAIN_ERRORS = (InvalidSpec, DomainError, LayoutTooLarge, InsufficientPoints, DegenerateEnergy, NonPhysicalMatrix)

# command -> {param: (type, default)}; default None means required
PARAMS = {
    "validate": {},
    "layout": {"max_segments": (int, DEFAULT_MAX_SEGMENTS)},
    "transmit": {"k": (float, None), "method": (str, "closed")},
    "sweep": {"k_min": (float, None), "k_max": (float, None), "n_points": (int, 1000), "method": (str, "closed")},
    "grid": {
        "rho_min": (float, None), "rho_max": (float, None), "n_rho": (int, 101),
        "k_min": (float, None), "k_max": (float, None), "n_k": (int, 101),
    },
    "saturate": {"stages": (list, None), "k_min": (float, None), "k_max": (float, None),
                 "n_points": (int, 2000), "delta": (float, SATURATION_DELTA)},
    "scaling": {"V0": (float, None), "k_lo": (float, 100.0), "k_hi": (float, 1e4), "n_points": (int, 400)},
    "resonances": {"k_min": (float, None), "k_max": (float, None), "coarse_points": (int, 2000),
                   "threshold": (float, 0.99)},
    "descriptors": {"zeta": (float, None)},
}
# spec fields each command needs
NEEDS = {c: SPEC_FIELDS for c in COMMANDS}
NEEDS["descriptors"] = ("N", "rho")
NEEDS["grid"] = ("N", "mu", "nu", "S")
SPEC_TYPES = {"N": int, "S": int}
SPEC_DEFAULTS = {"L": 1.0, "V": 0.0}
OPTIONAL = {("descriptors", "zeta")}  # may stay None


class UsageError(Exception):
    pass


def _int(text):
    if isinstance(text, bool):
        raise ValueError("boolean is not an integer")
    if isinstance(text, int):
        return text
    if isinstance(text, float):
        if not text.is_integer():
            raise ValueError(f"not an integer: {text!r}")
        return int(text)
    return int(str(text).strip())


def _stages(text):
    if isinstance(text, list):
        return [_int(s) for s in text]
    return [_int(s) for s in str(text).replace(" ", "").split(",") if s]


CONVERT = {int: _int, float: float, str: str, list: _stages}


@dataclass
class RunConfig:
    """One invocation. ``out`` and ``workers`` are execution details: they do
    not change any result, so they are excluded from equality and from the
    metadata written to outputs."""

    command: str
    N: int | None = None
    rho: float | None = None
    mu: float | None = None
    nu: float | None = None
    S: int | None = None
    L: float | None = None
    V: float | None = None
    params: dict = field(default_factory=dict)
    format: str = "csv"
    out: str | None = field(default=None, compare=False)
    workers: int = field(default=1, compare=False)

    def spec(self) -> PotentialSpec:
        return PotentialSpec(*(getattr(self, f) for f in SPEC_FIELDS))

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("out")
        d.pop("workers")
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise UsageError(f"unknown config keys: {sorted(extra)}")
        cfg = cls(**d)
        return _normalise(cfg)


def _normalise(cfg: RunConfig) -> RunConfig:
    if cfg.command not in COMMANDS:
        raise UsageError(f"unknown command {cfg.command!r}")
    if cfg.format not in ("csv", "json"):
        raise UsageError(f"format must be csv or json (got {cfg.format!r})")
    try:
        for name in SPEC_FIELDS:
            val = getattr(cfg, name)
            if val is None:
                val = SPEC_DEFAULTS.get(name)
            if val is not None:
                val = CONVERT[SPEC_TYPES.get(name, float)](val)
            setattr(cfg, name, val)
        params = {}
        for name, (typ, default) in PARAMS[cfg.command].items():
            val = cfg.params.get(name, default)
            if val is not None:
                val = CONVERT[typ](val)
            params[name] = val
        cfg.workers = _int(cfg.workers)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"malformed value: {exc}") from exc
    extra = set(cfg.params) - set(params)
    if extra:
        raise UsageError(f"parameters not used by {cfg.command}: {sorted(extra)}")
    cfg.params = params
    missing = [n for n in NEEDS[cfg.command] if getattr(cfg, n) is None]
    missing += [n for n, v in params.items() if v is None and (cfg.command, n) not in OPTIONAL]
    if missing:
        raise UsageError(f"{cfg.command}: missing {', '.join(missing)}")
    if cfg.workers < 0:
        raise UsageError("workers must be >= 0")
    return cfg


def read_config_file(path: str) -> dict:
    """Flat ``key = value`` lines with ``#`` comments, or a JSON output of this tool."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if text.lstrip().startswith("{"):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise UsageError(f"{path}: {exc}") from exc
        cfg = doc["meta"]["config"] if "meta" in doc else doc
        flat = {k: v for k, v in cfg.items() if k not in ("params", "command")}
        flat.update(cfg.get("params", {}))
        return flat
    out = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = val
    return out


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    for name in SPEC_FIELDS:
        common.add_argument(f"--{name}", dest=name, default=None)
    common.add_argument("--config")
    common.add_argument("--out")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--workers")
    parser = _Parser(prog="cantorscatter", description="Transmission through generalized Cantor potentials.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for cmd in COMMANDS:
        p = sub.add_parser(cmd, parents=[common])
        for name in PARAMS[cmd]:
            p.add_argument("--" + name.replace("_", "-"), dest=name, default=None)
    return parser


def parse_config(argv) -> RunConfig:
    ns = build_parser().parse_args(argv)
    merged = read_config_file(ns.config) if ns.config else {}
    for key, val in vars(ns).items():
        if val is not None and key not in ("config", "command"):
            merged[key] = val
    known = set(SPEC_FIELDS) | {"format", "out", "workers"}
    params = {k: v for k, v in merged.items() if k not in known}
    base = {k: v for k, v in merged.items() if k in known}
    base.setdefault("format", "csv")
    base.setdefault("workers", 1)
    return _normalise(RunConfig(command=ns.command, params=params, **base))


# ---- formatting ----

def _csv_num(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def _json_val(x):
    if isinstance(x, dict):
        return {k: _json_val(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_json_val(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    return x


def _meta_lines(meta: dict):
    for key, val in meta.items():
        if isinstance(val, dict):
            yield from (f"{key}.{k}" + " = " + _meta_text(v) for k, v in val.items())
        else:
            yield f"{key} = {_meta_text(val)}"


def _meta_text(v) -> str:
    if isinstance(v, dict):
        return json.dumps(_json_val(v), sort_keys=False)
    if isinstance(v, list):
        return ",".join(_csv_num(x) for x in v)
    return "" if v is None else (repr(float(v)) if isinstance(v, float) else str(v))


def render(cfg: RunConfig, columns: dict, extra: dict | None = None) -> str:
    meta = {
        "tool": "cantorscatter",
        "version": __version__,
        "units": UNITS,
        "config": cfg.to_dict(),
    }
    if extra:
        meta["result"] = extra
    if cfg.format == "json":
        doc = {"meta": _json_val(meta), "data": _json_val(columns)}
        return json.dumps(doc, indent=1, allow_nan=False) + "\n"
    buf = io.StringIO(newline="\n")
    flat = dict(meta)
    config = flat.pop("config")
    params = config.pop("params")
    result = flat.pop("result", {})
    for line in _meta_lines({**flat, **config, **params}):
        buf.write(f"# {line}\n")
    for line in _meta_lines(result):
        buf.write(f"# {line}\n")
    names = list(columns)
    buf.write(",".join(names) + "\n")
    cols = [np.atleast_1d(np.asarray(columns[n], dtype=object)) for n in names]
    for row in zip(*cols):
        buf.write(",".join(_csv_num(v) for v in row) + "\n")
    return buf.getvalue()


# ---- commands ----

def cmd_validate(cfg):
    problems = validate_spec(cfg.spec())
    return {"status": ["ok" if not problems else "invalid"], "problem": problems or [""]}, {"valid": not problems}


def cmd_layout(cfg):
    lay = build_layout(cfg.spec(), cfg.params["max_segments"])
    n = len(lay)
    return {
        "index": np.arange(n),
        "start": lay.starts,
        "end": lay.ends,
        "width": np.full(n, lay.width),
    }, None


def _check_method(m):
    if m not in ("closed", "oracle", "both"):
        raise UsageError(f"method must be closed, oracle or both (got {m!r})")


def cmd_transmit(cfg):
    spec, k, method = cfg.spec(), cfg.params["k"], cfg.params["method"]
    _check_method(method)
    if not k > 0:
        raise UsageError("k must be positive")
    extra = {"method": method}
    if abs(k * k - spec.V) < DEGENERATE_BAND:
        extra["warning"] = "E within the degenerate band of V; limit branch used"
    row = {}
    if method in ("closed", "both"):
        x = float(log_denominator(spec, k))
        lse = float(np.logaddexp(0.0, x))
        row["T"], row["R"] = math.exp(-lse), math.exp(x - lse)
    if method in ("oracle", "both"):
        t, r = transmission_from_matrix(brute_force_matrix(spec, k))
        if method == "oracle":
            row["T"], row["R"] = float(t), float(r)
        else:
            row["T_oracle"], row["R_oracle"] = float(t), float(r)
            row["discrepancy"] = abs(row["T"] - float(t))
    return {key: [v] for key, v in row.items()}, extra


def cmd_sweep(cfg):
    p = cfg.params
    _check_method(p["method"])
    tab = k_sweep(cfg.spec(), p["k_min"], p["k_max"], p["n_points"], p["method"], workers=cfg.workers)
    extra = {"method": p["method"]}
    if tab.discrepancy is not None:
        extra["discrepancy"] = tab.discrepancy
    return tab.columns(), extra


def cmd_grid(cfg):
    p = cfg.params
    rho = cfg.rho if cfg.rho is not None else p["rho_min"]
    template = cfg.spec().replace(rho=rho)
    g = rho_k_grid(template, p["rho_min"], p["rho_max"], p["n_rho"], p["k_min"], p["k_max"], p["n_k"],
                   workers=cfg.workers)
    rr, kk = np.meshgrid(g.rho_axis, g.k_axis, indexing="ij")
    invalid = [float(r) for r, ok in zip(g.rho_axis, g.valid) if not ok]
    return {"rho": rr.ravel(), "k": kk.ravel(), "T": g.t.ravel()}, {"invalid_rho": invalid}


def cmd_saturate(cfg):
    p = cfg.params
    res = saturation_metric(cfg.spec(), p["stages"], p["k_min"], p["k_max"], p["n_points"], workers=cfg.workers)
    st = res.stages
    a = [s for s in st for _ in st]
    b = [s2 for _ in st for s2 in st]
    beyond = res.saturated_beyond(p["delta"])
    return {"s": a, "s_prime": b, "D": res.distance.ravel()}, {"saturated_beyond": "none" if beyond is None else beyond}


def cmd_scaling(cfg):
    p = cfg.params
    fit = scaling_fit(cfg.spec(), p["V0"], p["k_lo"], p["k_hi"], p["n_points"])
    return {key: [v] for key, v in asdict(fit).items()}, None


def cmd_resonances(cfg):
    p = cfg.params
    scan = find_resonances(cfg.spec(), p["k_min"], p["k_max"], p["coarse_points"], p["threshold"])
    cols = {
        "k": [r.k for r in scan.peaks],
        "T": [r.T for r in scan.peaks],
        "width": [r.width for r in scan.peaks],
    }
    return cols, {"plateau": scan.plateau, "count": len(scan.peaks)}


def cmd_descriptors(cfg):
    N, rho = cfg.N, cfg.rho
    zeta = cfg.params["zeta"]
    if zeta is None:
        zeta = 1.0 / rho
    row = {"N": N, "rho": rho, "D": fractal_dimension(N, rho)}
    try:
        d = lacunarity_parameters(N, zeta).as_dict()
        d.pop("N")
        d.pop("D")
        row.update(d)
    except DomainError as exc:
        row["lacunarity"] = f"n/a: {exc}"
    return {key: [v] for key, v in row.items()}, None


HANDLERS = {name: globals()[f"cmd_{name}"] for name in COMMANDS}


def run(cfg: RunConfig) -> tuple[int, str]:
    columns, extra = HANDLERS[cfg.command](cfg)
    text = render(cfg, columns, extra)
    if cfg.command == "validate":
        return (0 if extra["valid"] else 1), text
    return 0, text


def validation_report(cfg: RunConfig) -> str:
    problems = validate_spec(cfg.spec())
    return "ok\n" if not problems else "".join(f"invalid: {p}\n" for p in problems)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_config(argv)
        code, text = run(cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except DOMAIN_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if cfg.command == "validate":
        sys.stdout.write(validation_report(cfg))
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    elif cfg.command != "validate":
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
