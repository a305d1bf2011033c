"""Scenario files and the ``qcond`` command line.

    qcond <run|bell-scan|filter|check> [--tol F] [--seed N]
          [--format json|csv|jsonl] [--output PATH] FILE

FILE is a JSON scenario (``-`` reads stdin). Exit codes: 0 success,
2 schema or validation error, 3 domain error raised while computing.
"""
import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from . import __version__
from .algebra import commutator, generated_algebra, is_commutative, observables_compatible
from .bell import bell_scan
from .dynamics import HamiltonianSchedule
from .errors import DomainError, SchemaError, UnsupportedFormat, ValidationError
from .filtering import RepeatedInteractionModel, filter_run, simulate_record
from .measurement import MeasurementPlan, PlanStep, run_plan
from .numerics import DEFAULT_TOL, fro
from .qpspace import PVM, Event, Observable, State, make_pure_state, spectral_pvm
from .serialize import matrix_from_json, matrix_to_json, vector_from_json

KINDS = ("measurement_plan", "bell_scan", "filter", "check")
EXIT_OK, EXIT_VALIDATION, EXIT_DOMAIN = 0, 2, 3


@dataclass
class Scenario:
    kind: str
    state: Optional[State]
    payload: Any
    tol: float = DEFAULT_TOL
    seed: int = 0
    options: dict = field(default_factory=dict)


def _at(path, build, *args, **kwargs):
    """Run a constructor, prefixing validation errors with the JSON path of the offending field."""
    try:
        return build(*args, **kwargs)
    except SchemaError:
        raise
    except ValidationError as exc:
        err = type(exc)(f"{path}: {exc}")
        err.path = path
        raise err from exc


def _require(obj, key, path, kind=None):
    if not isinstance(obj, dict):
        raise SchemaError(path, "expected an object")
    if key not in obj:
        raise SchemaError(f"{path}.{key}", "missing required field")
    value = obj[key]
    if kind is not None and (not isinstance(value, kind) or isinstance(value, bool)):
        raise SchemaError(f"{path}.{key}", f"expected {getattr(kind, '__name__', kind)}")
    return value


def _number(obj, key, path, default=None, integer=False):
    if key not in obj:
        if default is None:
            raise SchemaError(f"{path}.{key}", "missing required field")
        return default
    v = obj[key]
    ok = isinstance(v, int) if integer else isinstance(v, (int, float))
    if not ok or isinstance(v, bool):
        raise SchemaError(f"{path}.{key}", "expected an integer" if integer else "expected a number")
    return v


def parse_state(node, path, tol=DEFAULT_TOL) -> State:
    if isinstance(node, list):
        return _at(path, State, matrix_from_json(node, path), tol=tol)
    if not isinstance(node, dict):
        raise SchemaError(path, "expected a state object {psi | rho | maximally_mixed}")
    keys = [k for k in ("psi", "rho", "maximally_mixed") if k in node]
    if len(keys) != 1:
        raise SchemaError(path, "state needs exactly one of psi, rho, maximally_mixed")
    key = keys[0]
    if key == "psi":
        return _at(f"{path}.psi", make_pure_state, vector_from_json(node["psi"], f"{path}.psi"), tol=tol)
    if key == "rho":
        return _at(f"{path}.rho", State, matrix_from_json(node["rho"], f"{path}.rho"), tol=tol)
    d = _number(node, "maximally_mixed", path, integer=True)
    if d < 1:
        raise SchemaError(f"{path}.maximally_mixed", "dimension must be positive")
    return State.maximally_mixed(d)


def parse_pvm(node, path, tol=DEFAULT_TOL) -> PVM:
    if not isinstance(node, list) or not node:
        raise SchemaError(path, "expected a non-empty array of {value, projector}")
    outcomes = []
    for i, item in enumerate(node):
        p = f"{path}[{i}]"
        value = _number(item if isinstance(item, dict) else {}, "value", p)
        P = matrix_from_json(_require(item, "projector", p), f"{p}.projector")
        outcomes.append((float(value), _at(f"{p}.projector", Event, P, tol=tol)))
    return _at(path, PVM, tuple(outcomes), tol=tol)


def parse_observable(node, path, tol=DEFAULT_TOL, label="") -> Observable:
    return _at(path, Observable, matrix_from_json(node, path), label=label, tol=tol)


def parse_plan(node, path, tol) -> MeasurementPlan:
    if not isinstance(node, dict):
        raise SchemaError(path, "expected an object")
    schedule = None
    if node.get("schedule") is not None:
        sched = node["schedule"]
        if not isinstance(sched, list) or not sched:
            raise SchemaError(f"{path}.schedule", "expected a non-empty array of pieces")
        pieces = []
        for i, piece in enumerate(sched):
            p = f"{path}.schedule[{i}]"
            if not isinstance(piece, dict):
                raise SchemaError(p, "expected an object")
            pieces.append((_number(piece, "t_start", p), _number(piece, "t_end", p),
                           parse_observable(_require(piece, "H", p), f"{p}.H", tol)))
        schedule = _at(f"{path}.schedule", HamiltonianSchedule, tuple(pieces))
    steps_spec = _require(node, "steps", path, list)
    if not steps_spec:
        raise SchemaError(f"{path}.steps", "a plan needs at least one step")
    steps = []
    for i, st in enumerate(steps_spec):
        p = f"{path}.steps[{i}]"
        if not isinstance(st, dict):
            raise SchemaError(p, "expected an object")
        label = st.get("label", "")
        if not isinstance(label, str):
            raise SchemaError(f"{p}.label", "expected a string")
        if ("observable" in st) == ("pvm" in st):
            raise SchemaError(p, "step needs exactly one of observable, pvm")
        if "observable" in st:
            obs = parse_observable(st["observable"], f"{p}.observable", tol, label)
            pvm = _at(f"{p}.observable", spectral_pvm, obs, tol)
        else:
            pvm = parse_pvm(st["pvm"], f"{p}.pvm", tol)
        groups = st.get("groups")
        if groups is not None:
            if not isinstance(groups, list) or not all(isinstance(g, list) for g in groups):
                raise SchemaError(f"{p}.groups", "expected an array of arrays of outcome values")
            groups = tuple(tuple(g) for g in groups)
        steps.append(_at(p, PlanStep, float(_number(st, "time", p)), pvm, label, groups))
    return _at(path, MeasurementPlan, tuple(steps), schedule)


def parse_model(node, path, tol) -> RepeatedInteractionModel:
    if not isinstance(node, dict):
        raise SchemaError(path, "expected an object")
    sys_dim = _number(node, "sys_dim", path, integer=True)
    probe_dim = _number(node, "probe_dim", path, integer=True)
    U = matrix_from_json(_require(node, "U", path), f"{path}.U")
    probe_state = parse_state(_require(node, "probe_state", path), f"{path}.probe_state", tol)
    if "probe_pvm" in node:
        pvm = parse_pvm(node["probe_pvm"], f"{path}.probe_pvm", tol)
    elif "probe_observable" in node:
        pvm = spectral_pvm(parse_observable(node["probe_observable"], f"{path}.probe_observable", tol))
    else:
        raise SchemaError(f"{path}.probe_pvm", "missing required field")
    observed = parse_observable(_require(node, "observed", path), f"{path}.observed", tol)
    return _at(path, RepeatedInteractionModel, sys_dim, probe_dim, U, probe_state, pvm, observed, tol=tol)


def parse_scenario(text, default_kind: Optional[str] = None) -> Scenario:
    """Parse and validate a scenario document (JSON text or an already decoded dict)."""
    if isinstance(text, (str, bytes)):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SchemaError("$", f"invalid JSON: {exc}") from exc
    else:
        doc = text
    if not isinstance(doc, dict):
        raise SchemaError("$", "scenario must be a JSON object")
    kind = doc.get("kind", default_kind)
    if kind is None:
        raise SchemaError("$.kind", "missing required field")
    if kind not in KINDS:
        raise SchemaError("$.kind", f"unknown kind {kind!r}; expected one of {', '.join(KINDS)}")
    if default_kind is not None and kind != default_kind:
        raise SchemaError("$.kind", f"this command runs {default_kind!r} scenarios, file has {kind!r}")
    tol = float(_number(doc, "tol", "$", default=DEFAULT_TOL))
    if not tol > 0:
        raise SchemaError("$.tol", "tolerance must be positive")
    seed = _number(doc, "seed", "$", default=0, integer=True)

    state = None
    if "state" in doc:
        state = parse_state(doc["state"], "$.state", tol)
    elif kind in ("measurement_plan", "bell_scan", "filter"):
        raise SchemaError("$.state", "missing required field")

    options = {}
    if kind == "measurement_plan":
        payload = parse_plan(_require(doc, "plan", "$"), "$.plan", tol)
        if state.dim != payload.dim:
            raise SchemaError("$.state", f"state has dim {state.dim}, plan acts on dim {payload.dim}")
    elif kind == "bell_scan":
        scan = doc.get("scan", {})
        if not isinstance(scan, dict):
            raise SchemaError("$.scan", "expected an object")
        resolution = _number(scan, "resolution", "$.scan", default=32, integer=True)
        if resolution < 8:
            raise SchemaError("$.scan.resolution", "grid resolution must be at least 8")
        if state.dim != 2:
            raise SchemaError("$.state", "bell_scan needs a qubit state")
        payload = {"resolution": resolution}
        options["grid"] = bool(scan.get("grid", False))
    elif kind == "filter":
        model = parse_model(_require(doc, "model", "$"), "$.model", tol)
        steps = _number(doc, "steps", "$", default=0, integer=True)
        record = doc.get("record")
        if record is not None:
            if not isinstance(record, list):
                raise SchemaError("$.record", "expected an array of probe outcomes")
            for i, y in enumerate(record):
                if not isinstance(y, (int, float)) or isinstance(y, bool):
                    raise SchemaError(f"$.record[{i}]", "expected a number")
                try:
                    model.probe_pvm.event(float(y))
                except KeyError:
                    raise SchemaError(f"$.record[{i}]", f"{y} is not a probe outcome") from None
            record = [float(y) for y in record]
        elif steps < 1:
            raise SchemaError("$.steps", "need steps >= 1 (or an explicit record)")
        if state.dim != model.sys_dim:
            raise SchemaError("$.state", f"state has dim {state.dim}, system has dim {model.sys_dim}")
        payload = {"model": model, "steps": steps, "record": record}
    else:
        ops = _require(doc, "operators", "$", list)
        if not ops:
            raise SchemaError("$.operators", "need at least one operator")
        observables = []
        for i, op in enumerate(ops):
            p = f"$.operators[{i}]"
            if isinstance(op, dict):
                label = op.get("label", f"op{i}")
                observables.append(parse_observable(_require(op, "matrix", p), f"{p}.matrix", tol, label))
            else:
                observables.append(parse_observable(op, p, tol, f"op{i}"))
        dims = {o.dim for o in observables}
        if len(dims) != 1:
            raise SchemaError("$.operators", "operators have different dimensions")
        payload = observables
    return Scenario(kind, state, payload, tol, seed, options)


def _label_json(v):
    if isinstance(v, tuple):
        return [float(x) for x in v]
    return float(v)


def _header(kind, tol, seed) -> dict:
    return {"tool": "qcond", "version": __version__, "kind": kind, "tol": tol, "seed": seed}


def run_scenario(s: Scenario) -> dict:
    """Execute a validated scenario; the report is a JSON-ready dict with a fixed key order."""
    report = _header(s.kind, s.tol, s.seed)
    if s.kind == "measurement_plan":
        joint = run_plan(s.state, s.payload, s.tol)
        report["result"] = {
            "labels": list(joint.labels),
            "axes": [[_label_json(v) for v in ax] for ax in joint.axes],
            "records": [{"outcomes": [_label_json(v) for v in rec], "probability": p}
                        for rec, p in joint.records()],
            "total": joint.total,
        }
    elif s.kind == "bell_scan":
        res = bell_scan(s.state, s.payload["resolution"], keep_grid=s.options.get("grid", False))
        report["result"] = {
            "best_gap": res.best_gap,
            "angles": list(res.angles),
            "grid_resolution": res.grid_resolution,
            "violation": res.best_gap > s.tol,
        }
        if res.grid is not None:
            report["result"]["grid"] = [list(row) for row in res.grid_rows()]
    elif s.kind == "filter":
        model = s.payload["model"]
        if s.payload["record"] is not None:
            record, source = s.payload["record"], "given"
        else:
            record, _ = simulate_record(model, s.state, s.payload["steps"], seed=s.seed, tol=s.tol)
            source = "sampled"
        traj, estimates = filter_run(model, s.state, record, s.tol)
        steps = []
        for k in range(1, len(traj)):
            prev, cur = traj[k - 1], traj[k]
            steps.append({
                "k": k,
                "y": cur.record[-1],
                "p": cur.record_prob / prev.record_prob,
                "estimate": estimates[k],
                "conditioned_state": matrix_to_json(cur.conditioned.rho),
            })
        report["result"] = {
            "record_source": source,
            "record": list(record),
            "record_prob": traj[-1].record_prob,
            "prior_estimate": estimates[0],
            "trajectory": steps,
        }
    else:
        ops = s.payload
        pairs = []
        for i, a in enumerate(ops):
            for b in ops[i + 1:]:
                pairs.append({
                    "a": a.label,
                    "b": b.label,
                    "compatible": observables_compatible(a, b, s.tol),
                    "commutator_norm": fro(commutator(a.matrix, b.matrix)),
                })
        alg = generated_algebra([o.matrix for o in ops], s.tol)
        report["result"] = {
            "operators": [o.label for o in ops],
            "compatibility": all(p["compatible"] for p in pairs),
            "pairs": pairs,
            "algebra_dim": len(alg),
            "commutative": is_commutative(alg, 1e3 * s.tol),
        }
        if s.state is not None:
            report["result"]["expectations"] = [float(np.trace(s.state.rho @ o.matrix).real) for o in ops]
    return report


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _csv_label(v):
    if isinstance(v, list):
        return "{" + ";".join(repr(x) for x in v) + "}"
    return repr(v)


def emit(report: dict, fmt: str = "json") -> str:
    """Render a report as ``json``, ``csv`` or (filter reports only) ``jsonl``."""
    if fmt == "json":
        return json.dumps(report, indent=2) + "\n"
    kind = report["kind"]
    res = report["result"]
    if fmt == "jsonl":
        if kind != "filter":
            raise UnsupportedFormat("jsonl output is only available for filter reports")
        return "".join(json.dumps(step) + "\n" for step in res["trajectory"])
    if fmt != "csv":
        raise UnsupportedFormat(f"unknown format {fmt!r}")
    if kind == "measurement_plan":
        rows = [[_csv_label(v) for v in r["outcomes"]] + [repr(r["probability"])] for r in res["records"]]
        return _csv(res["labels"] + ["probability"], rows)
    if kind == "bell_scan":
        if "grid" in res:
            return _csv(["alpha", "beta", "gamma", "gap"], [[repr(x) for x in row] for row in res["grid"]])
        return _csv(["alpha", "beta", "gamma", "gap"], [[repr(x) for x in res["angles"]] + [repr(res["best_gap"])]])
    if kind == "filter":
        rows = [[s["k"], repr(s["y"]), repr(s["p"]), repr(s["estimate"])] for s in res["trajectory"]]
        return _csv(["k", "y", "p", "estimate"], rows)
    rows = [[p["a"], p["b"], str(p["compatible"]).lower(), repr(p["commutator_norm"])] for p in res["pairs"]]
    return _csv(["a", "b", "compatible", "commutator_norm"], rows)


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path) as fh:
        return fh.read()


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, help="numerical tolerance (overrides the scenario)")
    common.add_argument("--seed", type=int, help="RNG seed (overrides the scenario)")
    common.add_argument("--format", choices=("json", "csv", "jsonl"), help="output format")
    common.add_argument("--output", help="write the report here instead of stdout")

    parser = argparse.ArgumentParser(prog="qcond", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"qcond {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", parents=[common], help="run any scenario file")
    p.add_argument("file")

    p = sub.add_parser("bell-scan", parents=[common], help="grid search for Wigner-Bell violations")
    p.add_argument("file")
    p.add_argument("--resolution", type=int, help="grid points per angle")
    p.add_argument("--grid", action="store_true", help="include the whole grid (CSV output)")

    p = sub.add_parser("filter", parents=[common], help="run the discrete quantum filter")
    p.add_argument("file", nargs="?", help="filter scenario (state + model)")
    p.add_argument("--model", help="model file; the initial state is taken from its 'initial_state' "
                                   "field or is maximally mixed")
    p.add_argument("--steps", type=int, help="number of probe interactions to sample")
    p.add_argument("--record", help="comma-separated probe outcomes; overrides sampling")

    p = sub.add_parser("check", parents=[common], help="compatibility report for a list of operators")
    p.add_argument("file")
    return parser


_COMMAND_KIND = {"run": None, "bell-scan": "bell_scan", "filter": "filter", "check": "check"}


def _load_document(args) -> dict:
    if args.command == "filter" and args.model:
        model_doc = json.loads(_read(args.model))
        doc = json.loads(_read(args.file)) if args.file else {"kind": "filter"}
        if not isinstance(model_doc, dict):
            raise SchemaError("$model", "model file must be a JSON object")
        doc = dict(doc)
        doc["model"] = {k: v for k, v in model_doc.items() if k != "initial_state"}
        if "state" not in doc:
            doc["state"] = model_doc.get("initial_state", {"maximally_mixed": model_doc.get("sys_dim", 1)})
        return doc
    if args.file is None:
        raise SchemaError("$", "no scenario file given")
    try:
        doc = json.loads(_read(args.file))
    except json.JSONDecodeError as exc:
        raise SchemaError("$", f"invalid JSON: {exc}") from exc
    return doc


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        try:
            doc = _load_document(args)
        except json.JSONDecodeError as exc:
            raise SchemaError("$", f"invalid JSON: {exc}") from exc
        except OSError as exc:
            raise SchemaError("$", f"cannot read input: {exc}") from exc
        if not isinstance(doc, dict):
            raise SchemaError("$", "scenario must be a JSON object")
        doc = dict(doc)
        if args.tol is not None:
            doc["tol"] = args.tol
        if args.seed is not None:
            doc["seed"] = args.seed
        if args.command == "bell-scan":
            scan = dict(doc.get("scan") or {})
            if args.resolution is not None:
                scan["resolution"] = args.resolution
            if args.grid:
                scan["grid"] = True
            doc["scan"] = scan
        if args.command == "filter":
            if args.steps is not None:
                doc["steps"] = args.steps
            if args.record is not None:
                try:
                    doc["record"] = [float(y) for y in args.record.split(",") if y.strip()]
                except ValueError:
                    raise SchemaError("--record", "expected comma-separated numbers") from None
        scenario = parse_scenario(doc, default_kind=_COMMAND_KIND[args.command])
        report = run_scenario(scenario)
        fmt = args.format or ("jsonl" if scenario.kind == "filter" else "json")
        text = emit(report, fmt)
    except ValidationError as exc:
        print(f"qcond: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except DomainError as exc:
        print(f"qcond: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
