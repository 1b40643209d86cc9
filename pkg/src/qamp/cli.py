"""Command-line front end.

Reports go to stdout as JSON (fixed field order, floats with 17 significant
digits) or CSV (dotted keys, one row per run).  Exit codes: 0 success,
2 usage or parse error, 3 precondition violation, 4 resource cap.

Basis states accept either a decimal integer or, when the token is made of
0/1 characters and has exactly ``n`` of them, a big-endian bitstring: the
leftmost character is the most significant qubit (``--target 011`` with
``-n 3`` is state 3).
"""
from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .amplify import IterationTrace, amplify_general
from .circuits import circuit_from_json, load_circuit
from .errors import (
    ContractViolation,
    DataFormatError,
    DomainError,
    QampError,
    ResourceLimitError,
    ZeroCouplingError,
)
from .search_apps import (
    NearbyProblem,
    SearchResult,
    classical_search,
    nearby_search,
    search_from_basis,
    stirling_steps,
)
from .statistics import (
    DEFAULT_SHOTS,
    born_sample,
    epsilon_of,
    estimate_mean,
    estimate_median,
    load_values,
)

DEFAULT_MAX_DIM = 1 << 20
SEED_ENV = "QAMP_SEED"
TRACE_HEADER = ("iter", "a_s_re", "a_s_im", "a_t_re", "a_t_im", "residual")

EXIT_OK, EXIT_USAGE, EXIT_PRECONDITION, EXIT_RESOURCE = 0, 2, 3, 4


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"non-finite value in report: {x!r}")
    return format(x, ".17g")


def _scalar(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return _fmt_float(float(x))
    if x is None:
        return "null"
    if isinstance(x, str):
        import json

        return json.dumps(x)
    raise TypeError(f"cannot serialize {type(x).__name__}")


def dumps_report(obj, indent: int = 0) -> str:
    """JSON with insertion-ordered keys and 17-significant-digit floats."""
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{_scalar(str(k))}: {dumps_report(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [pad + dumps_report(v, indent + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    return _scalar(obj)


def _flatten(obj: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in obj.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        else:
            out[key] = v
    return out


def csv_report(reports: list[dict]) -> str:
    rows = [_flatten(r) for r in reports]
    header = list(rows[0])
    for r in rows[1:]:
        header += [k for k in r if k not in header]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow(["" if k not in r else _scalar(r[k]).strip('"') for k in header])
    return buf.getvalue()


def write_trace(trace: IterationTrace, path: str | Path) -> None:
    """One CSV row per iteration, header first, LF line endings."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_HEADER)
        for j in range(len(trace)):
            w.writerow(
                [
                    j,
                    _fmt_float(trace.a_s[j].real),
                    _fmt_float(trace.a_s[j].imag),
                    _fmt_float(trace.a_t[j].real),
                    _fmt_float(trace.a_t[j].imag),
                    _fmt_float(float(trace.residual[j])),
                ]
            )


# ---------------------------------------------------------------------------
# Parsing helpers
# ---------------------------------------------------------------------------


def parse_state(token: str, n: int) -> int:
    token = token.strip()
    if token and set(token) <= {"0", "1"} and len(token) == n:
        return int(token, 2)
    try:
        x = int(token, 10)
    except ValueError:
        raise UsageError(f"bad basis state {token!r}: expected an integer or a {n}-bit string") from None
    if not 0 <= x < (1 << n):
        raise ContractViolation(f"basis state {x} outside [0, {1 << n})")
    return x


def _check_dim(dim: int, cfg) -> None:
    if dim > cfg.max_dim:
        raise ResourceLimitError(
            f"state space of {dim} amplitudes exceeds --max-dim {cfg.max_dim}; raise it explicitly to proceed"
        )


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV}={raw!r} is not an integer") from None


# ---------------------------------------------------------------------------
# Report builders
# ---------------------------------------------------------------------------


def _coupling_block(c) -> dict:
    return {
        "u_ts_re": c.u_ts.real,
        "u_ts_im": c.u_ts.imag,
        "magnitude": c.magnitude,
        "theta": c.theta,
    }


def _amplification_blocks(c, eta: int, amp_t: complex, prob_t: float) -> dict:
    return {
        "coupling": _coupling_block(c),
        "eta": eta,
        "predicted": {
            "a_s": abs(math.cos(2 * eta * c.theta)),
            "a_t": abs(math.sin((2 * eta + 1) * c.theta)),
            "success": math.sin((2 * eta + 1) * c.theta) ** 2,
        },
        "simulated": {"amp_t_re": amp_t.real, "amp_t_im": amp_t.imag, "prob_t": prob_t},
    }


def _search_report(command: str, params: dict, r: SearchResult, target: int, cfg) -> dict:
    rep = {"command": command, "params": params}
    rep.update(_amplification_blocks(r.coupling, r.eta_used, r.amp_t, r.simulated_success))
    freq = born_sample(r.state, (target,), cfg.shots, np.random.default_rng([cfg.seed, 1]))
    rep["sampling"] = {"shots": cfg.shots, "frequency": freq, "outcome": r.sampled_outcome}
    rep["queries"] = r.oracle_applications
    rep["seed"] = cfg.seed
    return rep


def cmd_search(cfg) -> tuple[dict, IterationTrace | None]:
    n = cfg.n
    _check_dim(1 << n, cfg)
    target = parse_state(cfg.target, n)
    start = parse_state(cfg.start, n) if cfg.start is not None else 0
    r = search_from_basis(n, start, target, cfg.seed, cfg.eta, want_trace=cfg.trace is not None)
    params = {"n": n, "start": start, "target": target}
    return _search_report("search", params, r, target, cfg), r.trace


def cmd_search_near(cfg) -> tuple[dict, IterationTrace | None]:
    n = cfg.n
    _check_dim(1 << n, cfg)
    known = parse_state(cfg.known, n)
    target = parse_state(cfg.target, n)
    k = cfg.k if cfg.k is not None else bin(known ^ target).count("1")
    p = NearbyProblem(n, known, k, target, cfg.alpha)
    r = nearby_search(p, cfg.seed, cfg.eta, want_trace=cfg.trace is not None)
    params = {"n": n, "known": known, "target": target, "k": k, "alpha": float(p.alpha)}
    rep = _search_report("search-near", params, r, target, cfg)
    st = stirling_steps(n, k)
    rep["stirling"] = {"steps": st.steps, "sqrt_binomial": st.sqrt_binomial}
    return rep, r.trace


def _require_values(cfg) -> None:
    if cfg.values is None:
        raise UsageError("--values is required")
    if cfg.trace is not None:
        raise UsageError("--trace is only available for search, search-near and amplify-circuit")


def cmd_median(cfg) -> tuple[dict, None]:
    _require_values(cfg)
    d = load_values(cfg.values, "unit")
    _check_dim(2 * d.N, cfg)
    theta, rep = estimate_median(d, cfg.epsilon, cfg.seed, cfg.shots)
    eps_true = epsilon_of(d, theta)
    report = {
        "command": "median",
        "params": {"values": str(cfg.values), "N": d.N, "epsilon": cfg.epsilon, "shots": cfg.shots},
        "sampling": {"shots": cfg.shots, "probes": rep.probes, "runs": len(rep.runs)},
        "estimate": {
            "value": theta,
            "target_precision": cfg.epsilon,
            "epsilon_estimate": rep.epsilon_estimate if rep.epsilon_estimate is not None else 0.0,
            "terminated_by": rep.terminated_by,
        },
        "truth": {
            "value": eps_true,
            "abs_error": abs(eps_true),
            "median": float(np.median(d.values)),
        },
        "queries": rep.queries,
        "seed": cfg.seed,
    }
    return report, None


def cmd_mean(cfg) -> tuple[dict, None]:
    _require_values(cfg)
    d = load_values(cfg.values, "centered")
    _check_dim(4 * d.N, cfg)
    mu_hat, rep = estimate_mean(d, cfg.epsilon, cfg.seed, cfg.shots)
    mu = float(np.mean(d.values))
    report = {
        "command": "mean",
        "params": {"values": str(cfg.values), "N": d.N, "epsilon": cfg.epsilon, "shots": cfg.shots},
        "sampling": {"shots": cfg.shots, "stages": len(rep.stages)},
        "estimate": {"value": mu_hat, "target_precision": cfg.epsilon},
        "truth": {"value": mu, "abs_error": abs(mu_hat - mu)},
        "queries": rep.queries,
        "seed": cfg.seed,
    }
    return report, None


def cmd_amplify_circuit(cfg) -> tuple[dict, IterationTrace | None]:
    if cfg.circuit is None:
        raise UsageError("--circuit is required")
    spec = load_circuit(cfg.circuit)
    n = cfg.n if cfg.n is not None else spec["n"]
    if n is None:
        raise UsageError("qubit count missing: pass -n or set \"n\" in the circuit file")
    n = int(n)
    if n < 1:
        raise ContractViolation("n must be positive")
    _check_dim(1 << n, cfg)
    s = parse_state(cfg.start, n) if cfg.start is not None else int(spec["s"] or 0)
    if cfg.target is not None:
        t = parse_state(cfg.target, n)
    elif spec["t"] is not None:
        t = int(spec["t"])
    else:
        raise UsageError("target missing: pass --target or set \"t\" in the circuit file")
    alg = circuit_from_json(spec["gates"], n)
    r = amplify_general(alg, s, t, cfg.eta, want_trace=cfg.trace is not None)
    rep = {"command": "amplify-circuit", "params": {"n": n, "start": s, "target": t, "gates": len(spec["gates"])}}
    rep.update(_amplification_blocks(r.coupling, r.eta, r.state[t], r.final_probability))
    freq = born_sample(r.state, (t,), cfg.shots, np.random.default_rng([cfg.seed, 1]))
    rep["sampling"] = {"shots": cfg.shots, "frequency": freq}
    rep["amplification"] = {"initial_probability": r.initial_probability, "final_probability": r.final_probability}
    rep["queries"] = r.eta
    rep["seed"] = cfg.seed
    return rep, r.trace


def cmd_bench(cfg) -> tuple[dict, None]:
    n = cfg.n
    _check_dim(1 << n, cfg)
    target = parse_state(cfg.target, n)
    r = search_from_basis(n, 0, target, cfg.seed)
    N = 1 << n
    report = {
        "command": "bench",
        "params": {"n": n, "target": target},
        "quantum": {"oracle_applications": r.oracle_applications, "success": r.simulated_success},
        "classical": {"evaluations": classical_search(n, target, cfg.seed), "expected": (N + 1) / 2},
        "seed": cfg.seed,
    }
    return report, None


COMMANDS = {
    "search": cmd_search,
    "search-near": cmd_search_near,
    "median": cmd_median,
    "mean": cmd_mean,
    "amplify-circuit": cmd_amplify_circuit,
    "bench": cmd_bench,
}


# ---------------------------------------------------------------------------
# Argument parsing and dispatch
# ---------------------------------------------------------------------------


@dataclass
class RunConfig:
    command: str
    n: int | None = None
    target: str | None = None
    start: str | None = None
    known: str | None = None
    k: int | None = None
    alpha: float | None = None
    values: Path | None = None
    circuit: Path | None = None
    epsilon: float | None = None
    shots: int = DEFAULT_SHOTS
    eta: int | None = None
    seed: int = 0
    trace: Path | None = None
    format: str = "json"
    max_dim: int = DEFAULT_MAX_DIM
    repeat: int = 1
    timing: bool = False


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help=f"PRNG seed (default: ${SEED_ENV} or 0)")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--trace", type=Path, default=None, help="write the per-iteration trace CSV here")
    common.add_argument("--max-dim", type=int, default=DEFAULT_MAX_DIM, help="largest state space allowed")
    common.add_argument("--repeat", type=int, default=1, help="run K consecutive seeds concurrently")
    common.add_argument("--shots", type=int, default=DEFAULT_SHOTS)
    common.add_argument("--timing", action="store_true", help="add elapsed_ms (breaks byte-identical output)")

    parser = _Parser(prog="qamp", description="Amplitude amplification simulator")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("search", parents=[common], help="search with the W-H transform")
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--start", default=None, help="start state (default 0)")
    p.add_argument("--eta", type=int, default=None)

    p = sub.add_parser("search-near", parents=[common], help="search near a known word")
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--known", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--eta", type=int, default=None)

    for name, rng_doc in (("median", "values in [0, 1]"), ("mean", "values in (-0.5, 0.5)")):
        p = sub.add_parser(name, parents=[common], help=f"estimate the {name} ({rng_doc})")
        p.add_argument("--values", type=Path, default=None)
        p.add_argument("--epsilon", type=float, required=True)

    p = sub.add_parser("amplify-circuit", parents=[common], help="amplify a JSON-described circuit")
    p.add_argument("--circuit", type=Path, default=None)
    p.add_argument("-n", type=int, default=None)
    p.add_argument("--start", default=None)
    p.add_argument("--target", default=None)
    p.add_argument("--eta", type=int, default=None)

    p = sub.add_parser("bench", parents=[common], help="quantum vs classical query counts for search")
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--target", required=True)
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(command=ns.command)
    for key, value in vars(ns).items():
        if hasattr(cfg, key):
            setattr(cfg, key, value)
    cfg.seed = ns.seed if ns.seed is not None else _default_seed()
    if cfg.repeat < 1:
        raise UsageError("--repeat must be >= 1")
    if cfg.shots < 1:
        raise UsageError("--shots must be >= 1")
    if cfg.max_dim < 1:
        raise UsageError("--max-dim must be >= 1")
    if cfg.eta is not None and cfg.eta < 0:
        raise UsageError("--eta must be >= 0")
    if cfg.n is not None and cfg.n < 1:
        raise ContractViolation("-n must be >= 1")
    return cfg


def _trace_path(path: Path, seed: int, repeat: int) -> Path:
    if repeat == 1:
        return path
    return path.with_name(f"{path.stem}.seed{seed}{path.suffix}")


def execute(cfg: RunConfig) -> str:
    """Run the configured command and return the rendered report."""
    if cfg.max_dim > DEFAULT_MAX_DIM:
        print(
            f"warning: --max-dim {cfg.max_dim} allows ~{16 * cfg.max_dim / 2**20:.0f} MB per state vector",
            file=sys.stderr,
        )
    handler = COMMANDS[cfg.command]

    def one(seed: int):
        c = RunConfig(**{**cfg.__dict__, "seed": seed})
        t0 = time.perf_counter()
        report, trace = handler(c)
        if cfg.timing:
            report["elapsed_ms"] = (time.perf_counter() - t0) * 1e3
        if cfg.trace is not None and trace is not None:
            write_trace(trace, _trace_path(cfg.trace, seed, cfg.repeat))
        return report

    seeds = [cfg.seed + i for i in range(cfg.repeat)]
    if cfg.repeat == 1:
        reports = [one(cfg.seed)]
    else:
        with ThreadPoolExecutor(max_workers=min(cfg.repeat, os.cpu_count() or 1)) as pool:
            reports = list(pool.map(one, seeds))

    if cfg.format == "csv":
        return csv_report(reports)
    if cfg.repeat == 1:
        return dumps_report(reports[0]) + "\n"
    return dumps_report({"command": cfg.command, "seeds": seeds, "runs": reports}) + "\n"


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        cfg = config_from_args(ns)
        out = execute(cfg)
    except (UsageError, DataFormatError) as exc:
        print(f"qamp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceLimitError as exc:
        print(f"qamp: error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (ContractViolation, DomainError, ZeroCouplingError, FileNotFoundError, QampError) as exc:
        print(f"qamp: error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    sys.stdout.write(out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
