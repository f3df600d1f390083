"""Command-line front end.

Every subcommand reads an optional JSON config, validates it against a
small per-command schema, and writes a deterministic report (sorted JSON,
or CSV with ``#`` header lines).  Exit codes: 0 success, 1 acceptance
checks failed, 2 bad input (with the offending field path), 3 numerical
contract failure (with the violated invariant).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable

import numpy as np

from . import acceptance, algebra as alg, chsh, dressing, entwit, nosignal, protocol
from .errors import ConfigError, ContractError, GielabError
from .qmat import SX, SZ, op_norm
from .sampling import module_rng, random_hermitian, random_unitary

SCHEMA_VERSION = "gielab.report/1"
U64 = 2**64


# ---------------------------------------------------------------------------
# schema validation

@dataclass(frozen=True)
class Field:
    kind: str
    default: Any
    choices: tuple | None = None
    minimum: float | None = None


def _number(value, path: str, minimum=None, strict=False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(f"expected a finite number, got {value!r}", path)
    if minimum is not None and (value <= minimum if strict else value < minimum):
        op = ">" if strict else ">="
        raise ConfigError(f"must be {op} {minimum}, got {value!r}", path)
    return float(value)


def _integer(value, path: str, minimum=None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"expected an integer, got {value!r}", path)
    if minimum is not None and value < minimum:
        raise ConfigError(f"must be >= {minimum}, got {value!r}", path)
    return int(value)


def _check(f: Field, value, path: str):
    kind = f.kind
    if kind == "pos":
        return _number(value, path, 0.0, strict=True)
    if kind == "nonneg":
        return _number(value, path, 0.0)
    if kind == "float":
        return _number(value, path)
    if kind == "opt_nonneg":
        return None if value is None else _number(value, path, 0.0)
    if kind == "opt_float":
        return None if value is None else _number(value, path)
    if kind == "int":
        return _integer(value, path, f.minimum)
    if kind == "str":
        if not isinstance(value, str) or (f.choices and value not in f.choices):
            raise ConfigError(f"expected one of {list(f.choices)}, got {value!r}", path)
        return value
    if kind.startswith("list_"):
        if not isinstance(value, list) or not value:
            raise ConfigError("expected a nonempty list", path)
        inner = Field(kind[5:], None, f.choices, f.minimum)
        return [_check(inner, v, f"{path}[{i}]") for i, v in enumerate(value)]
    if kind == "opt_pairs":
        return None if value is None else _check(Field("pairs", None), value, path)
    if kind == "pairs":
        if not isinstance(value, list):
            raise ConfigError("expected a list of [a, b] pairs", path)
        out = []
        for i, pair in enumerate(value):
            if not isinstance(pair, list) or len(pair) != 2:
                raise ConfigError("expected a pair [a, b]", f"{path}[{i}]")
            out.append([_number(v, f"{path}[{i}][{j}]") for j, v in enumerate(pair)])
        return out
    raise AssertionError(kind)


def validate(params: dict, schema: dict[str, Field], prefix: str = "params") -> dict:
    if not isinstance(params, dict):
        raise ConfigError("expected a JSON object", prefix)
    unknown = sorted(set(params) - set(schema))
    if unknown:
        raise ConfigError(f"unknown field(s) {unknown}", f"{prefix}.{unknown[0]}")
    out = {}
    for name, f in schema.items():
        value = params.get(name, f.default)
        out[name] = _check(f, value, f"{prefix}.{name}")
    return out


BMV_FIELDS = {
    "m1": Field("pos", 1e-14),
    "m2": Field("pos", 1e-14),
    "d": Field("pos", 2e-4),
    "dx": Field("nonneg", 1e-4),
    "tau": Field("pos", 1.0),
}


def _bmv(p: dict) -> protocol.BmvParams:
    return protocol.BmvParams(p["m1"], p["m2"], p["d"], p["dx"], p["tau"])


# ---------------------------------------------------------------------------
# commands; each returns (rows, summary)

def cmd_phases(p, seed, jobs):
    ph = protocol.compute_phases(_bmv(p))
    row = {
        "phi": ph.phi, "phi_LR": ph.phi_LR, "phi_RL": ph.phi_RL,
        "dphi_LR": ph.dphi_LR, "dphi_RL": ph.dphi_RL,
        "entangling_phase": ph.entangling_phase,
        "entangled": entwit.phase_entanglement_criterion(ph),
    }
    return [row], {}


def _phases_from(p) -> protocol.PathPhases:
    if (p["dphi_LR"] is None) != (p["dphi_RL"] is None):
        raise ConfigError("dphi_LR and dphi_RL must be given together", "params.dphi_LR")
    if p["dphi_LR"] is not None:
        return protocol.PathPhases.from_deltas(p["dphi_LR"], p["dphi_RL"])
    return protocol.compute_phases(_bmv(p))


def cmd_bipartite(p, seed, jobs):
    ph = _phases_from(p)
    psi = protocol.bipartite_state(ph)
    rows = [{"basis": b, "re": float(a.real), "im": float(a.imag)}
            for b, a in zip(("LL", "LR", "RL", "RR"), psi)]
    neg = entwit.negativity(protocol.ket_density(psi))
    return rows, {"negativity": neg, "entangling_phase": ph.entangling_phase,
                  "entangled": entwit.phase_entanglement_criterion(ph)}


def cmd_tripartite(p, seed, jobs):
    ph = _phases_from(p)
    dim = p["mediator_dim"]
    rho_b = protocol.ket_density(protocol.bipartite_state(ph))
    if p["mediator"] == "diagonal":
        ms, extra = protocol.diagonal_phase_mediator(ph, dim)
    else:
        rng = module_rng(seed, "cli.tripartite")
        us = [random_unitary(rng, dim) for _ in range(4)]
        g0 = np.eye(dim, dtype=complex)[0]
        ms = protocol.MediatorSpec(*us, g0)
        extra = ph
    psi = protocol.tripartite_evolve(ms, extra, p["ordering"])
    rho_m = protocol.matter_state(psi, dim)
    gram = protocol.mediator_overlaps(ms, p["ordering"])
    summary = {
        "matter_negativity": entwit.negativity(rho_m),
        "bipartite_negativity": entwit.negativity(rho_b),
        "frobenius_to_bipartite": float(np.linalg.norm(rho_m - rho_b)),
        "min_record_overlap": float(np.min(np.abs(gram))),
    }
    rows = [{"branch": a + b, "phase_outside_mediator": float(t)}
            for (a, b), t in zip([(x, y) for x in "LR" for y in "LR"],
                                 protocol.phase_table(extra).reshape(-1))]
    return rows, summary


def cmd_modes(p, seed, jobs):
    bmv = _bmv(p)
    if len(p["box_over_d"]) != len(p["n_max"]):
        raise ConfigError("box_over_d and n_max must have equal length", "params.n_max")
    exact = protocol.newtonian_potential(bmv, bmv.d)
    newton = protocol.compute_phases(bmv)
    rows = []
    for boxes, n in zip(p["box_over_d"], p["n_max"]):
        grid = protocol.ModeGrid(boxes * bmv.d, n, p["source_width"])
        v = protocol.mode_sum_potential(grid, bmv, bmv.d)
        fr = protocol.field_phase_and_leakage(grid, bmv)
        row = {
            "box_over_d": boxes, "n_max": n, "n_modes": grid.n_modes,
            "potential_ratio": v / exact,
            "rel_error": abs(v - exact) / abs(exact),
            "leakage": fr.leakage, "min_omega_tau": fr.min_omega_tau,
        }
        if bmv.dx > 0:
            row["dphi_LR_ratio"] = fr.dphi_LR / newton.dphi_LR
            row["dphi_RL_ratio"] = fr.dphi_RL / newton.dphi_RL
        rows.append(row)
    return rows, {"newtonian_potential_J": exact}


def cmd_witness(p, seed, jobs):
    pairs = p["pairs"]
    if pairs is None:
        pairs = [[a, b] for _, a, b in acceptance.phase_pair_samples(seed, p["samples"])]
    rows = []
    for a, b in pairs:
        ph = protocol.PathPhases.from_deltas(a, b)
        neg = entwit.negativity(protocol.ket_density(protocol.bipartite_state(ph)))
        crit = entwit.phase_entanglement_criterion(ph)
        rows.append({"dphi_LR": a, "dphi_RL": b,
                     "distance_to_2pi": entwit.distance_to_2pi_multiple(a + b),
                     "negativity": neg, "criterion": crit, "negativity_positive": neg > 1e-12})
    agree = sum(r["criterion"] == r["negativity_positive"] for r in rows)
    return rows, {"samples": len(rows), "agreement": agree / max(1, len(rows))}


def _tuple_for(kind: str, rng, dim: int) -> chsh.ChshTuple:
    if kind == "singlet":
        return chsh.singlet_settings()
    if kind == "hermitian":
        return chsh.random_hermitian_tuple(rng, dim)
    return chsh.random_involution_tuple(rng, dim)


def cmd_chsh(p, seed, jobs):
    rng = module_rng(seed, "cli.chsh")
    rows = []
    count = 1 if p["kind"] == "singlet" else p["count"]
    for i in range(count):
        t = _tuple_for(p["kind"], rng, p["dim"])
        e = chsh.chsh_operator(t)
        es = chsh.symmetrized_chsh(t)
        rows.append({
            "index": i, "dim": t.dim,
            "max_eig_sym": chsh.max_eigenvalue(es),
            "op_norm_sym": op_norm(es),
            "E_hermitian": e.hermitian,
            "commuting": e.commuting,
            "commutator_norm": t.max_cross_commutator(),
            "sos_residual": chsh.sos_residual(t),
        })
    return rows, {"max_eig_sym": max(r["max_eig_sym"] for r in rows), "tsirelson": chsh.TSIRELSON}


def cmd_sos_check(p, seed, jobs):
    rows = []
    for dim in p["dims"]:
        rng = module_rng(seed, f"cli.sos.{dim}")
        worst = max(chsh.sos_residual(chsh.random_hermitian_tuple(rng, dim)) for _ in range(p["count"]))
        rows.append({"dim": dim, "count": p["count"], "worst_residual": worst, "ok": worst <= 1e-9})
    return rows, {"all_ok": all(r["ok"] for r in rows)}


def _scan_one(args) -> dict:
    seed, dim, count, restarts, target = args
    rng = module_rng(seed, f"cli.tsirelson.{dim}")
    worst = max(chsh.max_eigenvalue(chsh.symmetrized_chsh(chsh.random_involution_tuple(rng, dim)))
                for _ in range(count))
    ss = chsh.seesaw_maximize(dim, seed=seed, restarts=restarts, target=target)
    return {"dim": dim, "count": count, "max_eig_random": worst, "seesaw_value": ss.value,
            "seesaw_converged": ss.converged, "seesaw_rounds": ss.rounds,
            "gap_to_tsirelson": chsh.TSIRELSON - ss.value}


def cmd_tsirelson_scan(p, seed, jobs):
    work = [(seed, d, p["count"], p["restarts"], p["target"]) for d in p["dims"]]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            rows = list(ex.map(_scan_one, work))
    else:
        rows = [_scan_one(w) for w in work]
    return rows, {"tsirelson": chsh.TSIRELSON,
                  "ceiling_ok": all(r["max_eig_random"] <= chsh.TSIRELSON + 1e-9 for r in rows)}


def _algebra_preset(p, seed) -> alg.AlgebraSpec:
    preset, n = p["preset"], p["dim"]
    if preset == "pauli_pair":
        return alg.AlgebraSpec(2, [SX, SZ])
    if preset == "abelian":
        return alg.AlgebraSpec(2, [SZ])
    if preset == "tensor_factor":
        return alg.AlgebraSpec(4, [np.kron(SX, np.eye(2)), np.kron(SZ, np.eye(2))])
    if preset == "diagonal":
        return alg.AlgebraSpec(n, [np.diag(np.arange(1.0, n + 1)).astype(complex)])
    if preset == "example":
        a1, _, _, _ = nosignal.example_algebras((2, 2, 2), "cnot", seed)
        return a1
    rng = module_rng(seed, "cli.algebra")
    return alg.AlgebraSpec(n, [random_hermitian(rng, n) for _ in range(2)])


def cmd_algebra(p, seed, jobs):
    a = alg.generated_algebra(_algebra_preset(p, seed))
    comm = alg.commutant(a)
    c3 = alg.commutant(alg.commutant(comm))
    z, factor = alg.center_and_factor(a)
    _, words = alg.same_span(alg.word_closure(a), a.basis_columns())
    _, idem = alg.same_span(comm.basis_columns(), c3.basis_columns())
    ok_comm, res_comm = alg.commute_check(a, comm)
    membership = max(a.membership_residual(g) for g in a.generators)
    summary = {
        "ambient_dim": a.ambient_dim,
        "algebra_dim": a.dimension,
        "commutant_dim": comm.dimension,
        "center_dim": int(z.shape[0]),
        "is_factor": factor,
        "generator_membership_residual": membership,
        "commutes_with_commutant": ok_comm,
        "commutant_residual": res_comm,
        "word_closure_angle": words,
        "idempotence_angle": idem,
    }
    return [summary], {}


def cmd_nosignal(p, seed, jobs):
    rows = []
    for e in p["entanglers"]:
        rows.append(nosignal.restricted_example((2, 2, 2), e, seed, p["samples"]).summary())
    a1, a2, _, _ = nosignal.example_algebras((2, 2, 2), "cnot", seed)
    verdicts = {
        "qubit_sx_sz": nosignal.macrocausality_equiv_test(
            alg.algebrize([SX]), alg.algebrize([SZ]), p["budget"], seed).summary(),
        "entangler_cnot": nosignal.macrocausality_equiv_test(a1, a2, p["budget"], seed).summary(),
        "tensor_split": nosignal.macrocausality_equiv_test(
            alg.factor_embedding((2, 2), [0]), alg.factor_embedding((2, 2), [1]), p["budget"], seed).summary(),
    }
    return rows, verdicts


def cmd_dressing(p, seed, jobs):
    rows = dressing.sweep({"m": p["m"], "L": p["L"], "tau": p["tau"], "modes": p["modes"]})
    return rows, {"units": dressing.UNITS}


def cmd_suite(p, seed, jobs):
    results = acceptance.run_all(seed=seed, echo=lambda line: print(line, file=sys.stderr))
    rows = [{"number": r.number, "name": r.name, "passed": r.passed} for r in results]
    details = {str(r.number): r.details for r in results}
    return rows, {"all_passed": all(r.passed for r in results), "details": details}


MODES = tuple(m.value for m in dressing.FrequencyMode)

COMMANDS: dict[str, tuple[Callable, dict[str, Field], str]] = {
    "phases": (cmd_phases, dict(BMV_FIELDS), "branch phases of the two-mass protocol"),
    "bipartite": (cmd_bipartite, {**BMV_FIELDS, "dphi_LR": Field("opt_float", None),
                                  "dphi_RL": Field("opt_float", None)},
                  "final two-mass state and its negativity"),
    "tripartite": (cmd_tripartite, {**BMV_FIELDS, "dphi_LR": Field("opt_float", None),
                                    "dphi_RL": Field("opt_float", None),
                                    "mediator_dim": Field("int", 2, minimum=1),
                                    "mediator": Field("str", "diagonal", ("diagonal", "random")),
                                    "ordering": Field("str", "UV", ("UV", "VU"))},
                   "matter state with a path-controlled mediator"),
    "modes": (cmd_modes, {**BMV_FIELDS, "box_over_d": Field("list_pos", [20, 20, 40]),
                          "n_max": Field("list_int", [64, 128, 256], minimum=1),
                          "source_width": Field("opt_nonneg", None)},
              "mode-summed potential, phases and leakage on nested grids"),
    "witness": (cmd_witness, {"pairs": Field("opt_pairs", None),
                              "samples": Field("int", 16, minimum=1)},
                "negativity versus the phase criterion"),
    "chsh": (cmd_chsh, {"dim": Field("int", 2, minimum=1), "count": Field("int", 10, minimum=1),
                        "kind": Field("str", "involution", ("involution", "hermitian", "singlet"))},
             "CHSH and symmetrized CHSH operators for sampled tuples"),
    "sos-check": (cmd_sos_check, {"dims": Field("list_int", [2, 3, 4, 6, 8], minimum=1),
                                  "count": Field("int", 200, minimum=1)},
                  "sum-of-squares residuals by dimension"),
    "tsirelson-scan": (cmd_tsirelson_scan, {"dims": Field("list_int", [2, 4, 8], minimum=2),
                                            "count": Field("int", 1000, minimum=1),
                                            "restarts": Field("int", 20, minimum=0),
                                            "target": Field("str", "E_tensor", ("E_tensor", "E_sym"))},
                       "random-tuple ceiling and see-saw values by dimension"),
    "algebra": (cmd_algebra, {"preset": Field("str", "pauli_pair", ("pauli_pair", "abelian", "tensor_factor",
                                                                    "diagonal", "example", "random")),
                              "dim": Field("int", 3, minimum=1)},
                "commutant, center and closure diagnostics"),
    "nosignal": (cmd_nosignal, {"entanglers": Field("list_str", ["cnot", "swap", "random", "identity"],
                                                    nosignal.ENTANGLERS),
                                "samples": Field("int", 1000, minimum=1),
                                "budget": Field("int", 64, minimum=1)},
                 "restricted-operation example and signalling witnesses"),
    "dressing": (cmd_dressing, {"m": Field("list_pos", [1e-14]), "L": Field("list_pos", [1e-6]),
                                "tau": Field("list_nonneg", [1.0]),
                                "modes": Field("list_str", list(MODES), MODES)},
                 "dressing figures of merit over a grid"),
    "suite": (cmd_suite, {}, "run the acceptance battery"),
}



# ---------------------------------------------------------------------------
# reports

def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (np.floating, float)):
        return float(x)
    return x


def render(report: dict, fmt: str) -> str:
    report = _jsonable(report)
    if fmt == "json":
        return json.dumps(report, sort_keys=True, indent=2, allow_nan=False) + "\n"
    buf = io.StringIO()
    buf.write(f"# schema: {report['schema']}\n")
    buf.write(f"# command: {report['command']}\n")
    buf.write(f"# config: {json.dumps(report['config'], sort_keys=True)}\n")
    if report["summary"]:
        buf.write(f"# summary: {json.dumps(report['summary'], sort_keys=True)}\n")
    rows = report["rows"]
    if rows:
        if report["command"] == "dressing":
            fields = list(dressing.CSV_FIELDS)
        else:
            fields = list(rows[0])
            for r in rows[1:]:
                fields += [k for k in r if k not in fields]
        w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n", extrasaction="raise")
        w.writeheader()
        for r in rows:
            w.writerow({k: (json.dumps(v, sort_keys=True) if isinstance(v, (dict, list)) else v)
                        for k, v in r.items()})
    return buf.getvalue()


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", "config") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}",
                          "config") from None
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object", "config")
    return cfg


def build_run(command: str, cfg: dict, seed: int | None, fmt: str | None) -> dict:
    """Resolve a RunConfig-like dict: command, params, seed and format."""
    unknown = sorted(set(cfg) - {"command", "params", "seed", "format"})
    if unknown:
        raise ConfigError("unknown top-level field", unknown[0])
    if "command" in cfg and cfg["command"] != command:
        raise ConfigError(f"config is for {cfg['command']!r}, not {command!r}", "command")
    if seed is None:
        seed = cfg.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < U64:
        raise ConfigError(f"seed must be an unsigned 64-bit integer, got {seed!r}", "seed")
    if fmt is None:
        fmt = cfg.get("format", "json")
    if fmt not in ("csv", "json"):
        raise ConfigError(f"format must be 'csv' or 'json', got {fmt!r}", "format")
    _, schema, _ = COMMANDS[command]
    params = validate(cfg.get("params", {}), schema)
    return {"command": command, "params": params, "seed": seed, "format": fmt}


def run(run_cfg: dict, jobs: int = 1) -> tuple[int, str]:
    fn, _, _ = COMMANDS[run_cfg["command"]]
    rows, summary = fn(run_cfg["params"], run_cfg["seed"], jobs)
    report = {
        "schema": SCHEMA_VERSION,
        "command": run_cfg["command"],
        "config": run_cfg,
        "rows": rows,
        "summary": summary,
    }
    status = 0
    if run_cfg["command"] == "suite" and not summary["all_passed"]:
        status = 1
    return status, render(report, run_cfg["format"])


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file with optional params/seed/format")
    common.add_argument("--seed", type=int, default=None, help="master seed (unsigned 64-bit, default 0)")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--format", choices=("csv", "json"), default=None, help="report format (default json)")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for scans")
    ap = argparse.ArgumentParser(prog="gielab", description="Numerical laboratory for gravitationally "
                                 "induced entanglement, CHSH bounds and no-signalling tests.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, (_, _, help_text) in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=help_text, description=help_text)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.jobs < 1:
            raise ConfigError("must be >= 1", "--jobs")
        run_cfg = build_run(args.command, load_config(args.config), args.seed, args.format)
        status, text = run(run_cfg, args.jobs)
    except ConfigError as exc:
        print(f"gielab: config error: {exc}", file=sys.stderr)
        return 2
    except ContractError as exc:
        print(f"gielab: contract violated [{exc.invariant}]: {exc}", file=sys.stderr)
        return 3
    except GielabError as exc:
        print(f"gielab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status
