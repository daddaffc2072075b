"""Command-line front end.

Every invocation is turned into a run configuration (a JSON object checked
against ``schemas/run_config.schema.json``) before anything is computed, so a
saved ``--config`` file and the equivalent flags behave identically.

Exit codes: 0 on success whatever the verdict, 2 for invalid configuration or
input, 3 when an eigen/singular value solver fails to converge.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .bases import get_basis, validate_basis
from .bloch import DensityMatrix
from .criteria import (
    Bipartition,
    best_bipartition_report,
    evaluate_bipartite,
    gme_scores,
    theorem6_check,
)
from .errors import ConvergenceError, ValidationError
from .presets import FIGURES, PRESETS, QUOTED, REPORTED, Preset
from .search import CriterionConfig, ShapeSpec, best_over_x, margin_surface, optimize_params, scan_threshold
from .states import FAMILY_TAGS, StateFamily, make_family
from .stateio import read_state, state_to_json_dict, state_to_packed

SCHEMA_VERSION = 1
EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 2, 3

PRESET_BY_FAMILY = {p.family: p for p in PRESETS.values()}

REPRODUCE_HEADER = ["table", "setting", "method", "threshold", "relation", "provenance", "reported"]


def _schema() -> dict:
    text = resources.files("sepcrit").joinpath("schemas/run_config.schema.json").read_text("utf-8")
    return json.loads(text)


def validate_config(raw: dict) -> None:
    try:
        jsonschema.validate(raw, _schema())
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ValidationError(f"config error at {where}: {exc.message}") from None


@dataclass(frozen=True)
class RunConfig:
    command: str
    state: dict | None = None
    bases: tuple[str, ...] | None = None
    dim: int | None = None
    criterion: str | None = None
    params: dict | None = None
    alpha: tuple[float, ...] | None = None
    beta: tuple[float, ...] | None = None
    p1: int | None = None
    p2: int | None = None
    shape: dict | None = None
    bipartition: str | None = None
    pivots: tuple[int, int] | str | None = None
    seed: int = 0
    restarts: int = 8
    budget: int = 2000
    target: str | None = None
    grid: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        validate_config(raw)
        kw = {k: v for k, v in raw.items() if k != "schema_version"}
        for key in ("bases", "alpha", "beta"):
            if kw.get(key) is not None:
                kw[key] = tuple(kw[key])
        if isinstance(kw.get("pivots"), list):
            kw["pivots"] = tuple(kw["pivots"])
        return cls(**kw)

    @property
    def out_path(self) -> str | None:
        return self.output.get("path")

    @property
    def out_format(self) -> str | None:
        return self.output.get("format")


# State and criterion resolution

def _family_kwargs(state: dict) -> dict:
    kw = {k: state[k] for k in ("a", "eps") if k in state}
    if "dims" in state:
        kw["dims"] = tuple(state["dims"])
    return kw


def resolve_family(cfg: RunConfig) -> StateFamily:
    if not cfg.state or "family" not in cfg.state:
        raise ValidationError(f"'{cfg.command}' needs a builtin state family ({', '.join(FAMILY_TAGS)})")
    return make_family(cfg.state["family"], **_family_kwargs(cfg.state))


def resolve_state(cfg: RunConfig) -> tuple[DensityMatrix, dict]:
    if not cfg.state:
        raise ValidationError("a state is required (--state FAMILY or --state PATH)")
    if "path" in cfg.state:
        rho = read_state(cfg.state["path"], cfg.state.get("format"))
        return rho, {"path": cfg.state["path"], "dims": list(rho.dims)}
    family = resolve_family(cfg)
    p = cfg.state.get("p", 1.0)
    return family(p), {"family": family.tag, "p": p, **family.fixed, "dims": list(family.dims)}


def _preset_for(cfg: RunConfig, dims) -> Preset | None:
    if cfg.state and "family" in cfg.state:
        tag = cfg.state["family"]
        if tag in PRESET_BY_FAMILY:
            return PRESET_BY_FAMILY[tag]
    # any state shaped like a preset inherits its settings
    for pr in PRESETS.values():
        if pr.make_family().dims == tuple(dims):
            return pr
    return None


def resolve_criterion(cfg: RunConfig, dims) -> CriterionConfig:
    preset = _preset_for(cfg, dims)
    base = preset.config if preset is not None else None
    criterion = cfg.criterion or (base.criterion if base else None)
    if criterion is None:
        raise ValidationError("no default criterion for this state; pass --criterion")
    if base is not None and base.criterion != criterion:
        base = None
    bases = cfg.bases or (base.bases if base else None)
    if bases is None:
        raise ValidationError("no default bases for this state; pass --basis")
    kw = {
        "criterion": criterion,
        "bases": bases,
        "bipartition": cfg.bipartition,
        "pivots": cfg.pivots if cfg.pivots is not None else (base.pivots if base else (1, 1)),
    }
    if cfg.params is not None:
        p = cfg.params
        return CriterionConfig(structure="fixed", u=p["u"], v=p["v"], alpha=p["alpha"], beta=p["beta"], **kw)
    return CriterionConfig(
        alpha=cfg.alpha or (base.alpha if base else (1.0,)),
        beta=cfg.beta or (base.beta if base else (1.0,)),
        p1=cfg.p1 or (base.p1 if base else 1),
        p2=cfg.p2 or (base.p2 if base else 1),
        **kw,
    )


def full_report(cc: CriterionConfig, dec, params) -> dict:
    if cc.criterion == "thm1":
        return evaluate_bipartite(dec, None, params, cc.tol).as_dict()
    if cc.criterion == "thm4":
        return best_bipartition_report(dec, Bipartition.parse(cc.bipartition), params, cc.pivots, cc.tol).as_dict()
    if cc.criterion == "thm5":
        return gme_scores(dec, None, params, cc.pivots, cc.tol).as_dict()
    return theorem6_check(dec, tol=cc.tol).as_dict()


# Commands

def cmd_detect(cfg: RunConfig) -> dict:
    rho, desc = resolve_state(cfg)
    cc = resolve_criterion(cfg, rho.dims)
    dec = cc.decompose(rho)
    x = None
    if cc.uses_x:
        f = cc.margin_function(dec)
        _, x = best_over_x(lambda t: f(cc.params(t)))
    params = cc.params(1.0 if x is None else x)
    report = full_report(cc, dec, params)
    return {
        "schema_version": SCHEMA_VERSION,
        "command": "detect",
        "state": desc,
        "config": cc.as_dict(),
        "x": x,
        "params": None if cc.criterion == "thm6" else params.as_dict(),
        **report,
    }


def cmd_scan(cfg: RunConfig) -> dict:
    family = resolve_family(cfg)
    cc = resolve_criterion(cfg, family.dims)
    res = scan_threshold(family, cc, p_step=cfg.grid.get("p_step", 1e-2))
    return {
        "schema_version": SCHEMA_VERSION,
        "command": "scan",
        "state": {"family": family.tag, **family.fixed},
        "config": cc.as_dict(),
        **res.as_dict(),
    }


def cmd_optimize(cfg: RunConfig) -> dict:
    rho, desc = resolve_state(cfg)
    cc = resolve_criterion(cfg, rho.dims)
    if cfg.shape is not None:
        shape = ShapeSpec(**cfg.shape)
    else:
        shape = ShapeSpec(cc.p1, cc.p2, len(cc.alpha), len(cc.beta))
    res = optimize_params(rho, cc, shape, seed=cfg.seed, restarts=cfg.restarts, budget=cfg.budget)
    report = full_report(cc, cc.decompose(rho), res.params)
    return {
        "schema_version": SCHEMA_VERSION,
        "command": "optimize",
        "state": desc,
        "config": cc.as_dict(),
        "shape": {"p1": shape.p1, "p2": shape.p2, "q1": shape.q1, "q2": shape.q2, "structure": shape.structure},
        **res.as_dict(),
        "report": report,
    }


def _fmt(x) -> str:
    return "" if x is None else f"{float(x):.6f}"


def reproduce_rows(target: str, p_step: float = 1e-2) -> list[dict]:
    preset = PRESETS[target]
    rows = []
    settings = [({"eps": 0.1}, "eps=0.1"), ({"eps": 1.0}, "eps=1")] if target == "t4" else [({}, "")]
    for overrides, setting in settings:
        res = scan_threshold(preset.make_family(**overrides), preset.config, p_step=p_step)
        if res.detected_everywhere:
            value = "all p"
        elif res.threshold is None:
            value = "none"
        else:
            value = _fmt(res.threshold)
        reported = REPORTED[target]
        if isinstance(reported, dict):
            reported = reported[overrides["eps"]]
        rows.append({
            "table": target,
            "setting": setting,
            "method": preset.config.criterion,
            "threshold": value,
            "relation": "<=",
            "provenance": "computed",
            "reported": preset.reported if target == "t2" else f"{reported}",
        })
    for method, value, relation in QUOTED[target]:
        rows.append({
            "table": target,
            "setting": "",
            "method": method,
            "threshold": value,
            "relation": relation,
            "provenance": "quoted",
            "reported": "",
        })
    return rows


def cmd_reproduce(cfg: RunConfig) -> dict:
    if cfg.target not in PRESETS:
        raise ValidationError(f"reproduce target must be one of {sorted(PRESETS)}")
    rows = reproduce_rows(cfg.target, cfg.grid.get("p_step", 1e-2))
    return {"schema_version": SCHEMA_VERSION, "command": "reproduce", "table": cfg.target, "rows": rows}


def _summary(rows: list[dict]) -> str:
    lines = []
    for r in rows:
        if r["provenance"] != "computed":
            continue
        tag = f"{r['table']} {r['setting']}".strip()
        lines.append(f"{tag}: threshold {r['threshold']} (reported {r['reported']})")
    return "\n".join(lines)


def figure_rows(fig: str, grid: dict) -> tuple[list[str], list[tuple]]:
    preset = FIGURES[fig]
    p_grid = np.linspace(0.0, 1.0, grid.get("p_points", 21))
    if fig == "6":
        eps_grid = np.linspace(0.0, grid.get("eps_max", 1.0), grid.get("eps_points", 21))
        rows = []
        for p in p_grid:
            for eps in eps_grid:
                rho = preset.make_family(eps=float(eps))(float(p))
                margin = preset.config.margin_function(rho)(None)
                rows.append((float(p), float(eps), float(margin)))
        return ["p", "eps", "margin"], rows
    x_grid = np.linspace(0.0, grid.get("x_max", 2.0), grid.get("x_points", 21))
    return ["p", "x", "margin"], margin_surface(preset.make_family(), preset.config, p_grid, x_grid)


def cmd_figure(cfg: RunConfig) -> dict:
    if cfg.target not in FIGURES:
        raise ValidationError(f"figure must be one of {sorted(FIGURES)}")
    header, rows = figure_rows(cfg.target, cfg.grid)
    return {"schema_version": SCHEMA_VERSION, "command": "figure", "figure": cfg.target,
            "columns": header, "rows": [list(r) for r in rows]}


def cmd_basis_dump(cfg: RunConfig) -> dict:
    if not cfg.bases or cfg.dim is None:
        raise ValidationError("basis dump needs --basis FAMILY and --dim D")
    b = get_basis(cfg.bases[0], cfg.dim)
    diag = validate_basis(b)
    return {
        "schema_version": SCHEMA_VERSION,
        "command": "basis-dump",
        "family": b.label,
        "dim": b.dim,
        "kappa": b.kappa,
        "elements": [{"index": i, "re": g.real.tolist(), "im": g.imag.tolist()} for i, g in enumerate(b.elements)],
        "diagnostics": {
            "identity_error": diag.identity_error,
            "trace_error": diag.trace_error,
            "gram_error": diag.gram_error,
            "hermiticity_error": diag.hermiticity_error,
            "kappa_ok": diag.kappa_ok,
            "failing_elements": list(diag.failing_elements),
        },
    }


def cmd_state_dump(cfg: RunConfig) -> dict:
    rho, desc = resolve_state(cfg)
    return {"schema_version": SCHEMA_VERSION, "command": "state-dump", "state": desc, "_rho": rho}


COMMANDS = {
    "detect": cmd_detect,
    "scan": cmd_scan,
    "optimize": cmd_optimize,
    "reproduce": cmd_reproduce,
    "figure": cmd_figure,
    "basis-dump": cmd_basis_dump,
    "state-dump": cmd_state_dump,
}


# Rendering

def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([f"{v:.12g}" if isinstance(v, float) else v for v in r])
    return buf.getvalue()


def render(result: dict, fmt: str | None) -> bytes:
    cmd = result["command"]
    if cmd == "state-dump":
        rho = result.pop("_rho")
        if fmt == "packed":
            return state_to_packed(rho)
        if fmt == "csv":
            rows = [(r, c, float(rho.matrix[r, c].real), float(rho.matrix[r, c].imag))
                    for r in range(rho.dim) for c in range(rho.dim)]
            return _csv_text(["row", "col", "re", "im"], rows).encode()
        return (json.dumps({**state_to_json_dict(rho)}, indent=1) + "\n").encode()
    if fmt == "packed":
        raise ValidationError("--format packed is only available for state dump")
    if fmt == "csv":
        if cmd == "reproduce":
            return _csv_text(REPRODUCE_HEADER, [[r[k] for k in REPRODUCE_HEADER] for r in result["rows"]]).encode()
        if cmd == "figure":
            return _csv_text(result["columns"], result["rows"]).encode()
        if cmd == "scan":
            rows = [(g["p"], "" if g["x"] is None else g["x"], g["margin"]) for g in result["grid"]]
            return _csv_text(["p", "x", "margin"], rows).encode()
        if cmd == "basis-dump":
            rows = [(e["index"], r, c, e["re"][r][c], e["im"][r][c])
                    for e in result["elements"] for r in range(result["dim"]) for c in range(result["dim"])]
            return _csv_text(["index", "row", "col", "re", "im"], rows).encode()
        raise ValidationError(f"--format csv is not available for {cmd}")
    return (json.dumps(result, indent=1, sort_keys=True, allow_nan=False, default=_json_default) + "\n").encode()


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _default_format(cmd: str) -> str:
    return "csv" if cmd in ("reproduce", "figure") else "json"


def execute(cfg: RunConfig, stdout=None, stderr=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    result = COMMANDS[cfg.command](cfg)
    if cfg.command == "reproduce":
        print(_summary(result["rows"]), file=stderr)
    data = render(result, cfg.out_format or _default_format(cfg.command))
    if cfg.out_path:
        Path(cfg.out_path).write_bytes(data)
    elif hasattr(stdout, "buffer"):
        stdout.flush()
        stdout.buffer.write(data)
        stdout.buffer.flush()
    else:
        stdout.write(data.decode("utf-8", errors="replace"))
    return EXIT_OK


# Argument parsing

def _json_arg(text: str, what: str):
    if text.startswith("@"):
        try:
            text = Path(text[1:]).read_text("utf-8")
        except OSError as exc:
            raise ValidationError(f"cannot read {what} file {text[1:]}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{what}: invalid JSON at line {exc.lineno}, col {exc.colno}: {exc.msg}") from None


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise ValidationError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise ValidationError(f"expected comma-separated integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration; flags override its fields")
    common.add_argument("--state", help="builtin family name or path to a state file")
    common.add_argument("--family", help="basis family for basis dump, state family otherwise")
    common.add_argument("--state-format", choices=["json", "packed"])
    common.add_argument("--p", type=float, help="noise weight for builtin families")
    common.add_argument("--a", type=float, help="parameter a of the 2x4 family")
    common.add_argument("--eps", type=float, help="perturbation of the GHZ family")
    common.add_argument("--dims", help="comma-separated extents (maxmixed family)")
    common.add_argument("--basis", help="basis family, or one per subsystem comma-separated")
    common.add_argument("--criterion", choices=["thm1", "thm4", "thm5", "thm6"])
    common.add_argument("--params", help="JSON {u, v, alpha, beta} or @file")
    common.add_argument("--alpha", help="comma-separated alpha for the x-sqrt structure")
    common.add_argument("--beta", help="comma-separated beta for the x-sqrt structure")
    common.add_argument("--bipartition", help="cut such as 1|23 (thm4)")
    piv = common.add_mutually_exclusive_group()
    piv.add_argument("--pivots", help="pivot pair n,m")
    piv.add_argument("--all-pivots", action="store_true", help="maximize over every pivot pair")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--format", choices=["json", "csv", "packed", "hdf5-like"],
                        help="output format; hdf5-like is an alias of packed")

    parser = argparse.ArgumentParser(prog="sepcrit", description="Correlation-tensor separability tests.")
    sub = parser.add_subparsers(dest="command", required=True)

    basis = sub.add_parser("basis", help="operator bases")
    bsub = basis.add_subparsers(dest="action", required=True)
    bd = bsub.add_parser("dump", parents=[common], help="write a basis and its diagnostics")
    bd.add_argument("--dim", type=int)

    state = sub.add_parser("state", help="density matrices")
    ssub = state.add_subparsers(dest="action", required=True)
    ssub.add_parser("dump", parents=[common], help="write a state as JSON, CSV or packed binary")

    sub.add_parser("detect", parents=[common], help="run one criterion on one state")
    sc = sub.add_parser("scan", parents=[common], help="threshold scan over p")
    sc.add_argument("--p-step", type=float)
    op = sub.add_parser("optimize", parents=[common], help="Nelder-Mead search for parameters")
    op.add_argument("--shape", help='JSON {"p1", "p2", "q1", "q2", "structure"} or @file')
    op.add_argument("--restarts", type=int)
    op.add_argument("--budget", type=int)
    rp = sub.add_parser("reproduce", parents=[common], help="recompute a comparison table")
    rp.add_argument("target", choices=sorted(PRESETS))
    rp.add_argument("--p-step", type=float)
    fg = sub.add_parser("figure", parents=[common], help="emit margin surface data")
    fg.add_argument("target", choices=sorted(FIGURES))
    fg.add_argument("--p-points", type=int)
    fg.add_argument("--x-points", type=int)
    fg.add_argument("--x-max", type=float)
    fg.add_argument("--eps-points", type=int)
    fg.add_argument("--eps-max", type=float)
    return parser


def config_from_args(args: argparse.Namespace) -> dict:
    raw = _json_arg("@" + args.config, "config") if args.config else {}
    if not isinstance(raw, dict):
        raise ValidationError("config file must hold a JSON object")
    raw = dict(raw)
    command = args.command if args.command not in ("basis", "state") else f"{args.command}-{args.action}"
    raw["command"] = command

    if args.family is not None:
        if command == "basis-dump":
            args.basis = args.basis or args.family
        elif args.state is None:
            args.state = args.family
        else:
            raise ValidationError("--family and --state both name the state")
    if args.format == "hdf5-like":
        args.format = "packed"
    if args.state is not None:
        if args.state in FAMILY_TAGS:
            st = {"family": args.state}
        else:
            st = {"path": args.state}
            if args.state_format:
                st["format"] = args.state_format
        raw["state"] = st
    st = raw.get("state")
    if isinstance(st, dict) and "family" in st:
        st = dict(st)
        for key in ("p", "a", "eps"):
            if getattr(args, key) is not None:
                st[key] = getattr(args, key)
        if args.dims:
            st["dims"] = _ints(args.dims)
        raw["state"] = st
    elif any(getattr(args, k) is not None for k in ("p", "a", "eps")) and not (isinstance(st, dict) and "path" in st):
        raise ValidationError("--p, --a and --eps apply to builtin state families only")

    if args.basis:
        raw["bases"] = [b.strip() for b in args.basis.split(",")]
    if args.criterion:
        raw["criterion"] = args.criterion
    if args.params:
        raw["params"] = _json_arg(args.params, "--params")
    if args.alpha:
        raw["alpha"] = _floats(args.alpha)
    if args.beta:
        raw["beta"] = _floats(args.beta)
    if args.bipartition:
        raw["bipartition"] = args.bipartition
    if args.all_pivots:
        raw["pivots"] = "all"
    elif args.pivots:
        raw["pivots"] = _ints(args.pivots)
    if args.seed is not None:
        raw["seed"] = args.seed
    output = dict(raw.get("output", {}))
    if args.out:
        output["path"] = args.out
    if args.format:
        output["format"] = args.format
    if output:
        raw["output"] = output

    extra = {
        "dim": getattr(args, "dim", None),
        "restarts": getattr(args, "restarts", None),
        "budget": getattr(args, "budget", None),
        "target": getattr(args, "target", None),
    }
    raw.update({k: v for k, v in extra.items() if v is not None})
    if getattr(args, "shape", None):
        raw["shape"] = _json_arg(args.shape, "--shape")
    grid = dict(raw.get("grid", {}))
    for key in ("p_step", "p_points", "x_points", "x_max", "eps_points", "eps_max"):
        val = getattr(args, key, None)
        if val is not None:
            grid[key] = val
    if grid:
        raw["grid"] = grid
    return raw


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig.from_dict(config_from_args(args))
        return execute(cfg)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ConvergenceError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
