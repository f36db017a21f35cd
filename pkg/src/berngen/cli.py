"""Experiment harness: error tables and convergence sweeps as CSV."""

from __future__ import annotations

import argparse
import csv
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from time import perf_counter

import numpy as np

from .acceleration import G_approx, TauEndpointError, q0_shift
from .arnoldi import (KrylovDecomposition, arnoldi_extend, arnoldi_q_approx,
                      orthogonality_loss)
from .bvp import (circulant_shift, discretize_laplacian, geometric_grid,
                  uniform_grid)
from .fourier import (TWO_PI, ApproxParams, PoleProximityError, delta_of_N,
                      reference_q)
from .matfunc import ActionPlan, reference_solution

SCHEMA = ("experiment", "method", "p", "n", "N", "ell", "tau", "z",
          "value", "elapsed_s")


class UsageError(Exception):
    """Invalid configuration; maps to exit code 2."""


@dataclass(frozen=True)
class Row:
    """One report line; inapplicable parameters stay None (empty in CSV)."""

    experiment: str
    method: str
    p: int | None = None
    n: int | None = None
    N: int | None = None
    ell: int | None = None
    tau: float | None = None
    z: float | None = None
    value: float = 0.0
    elapsed_s: float = 0.0

    def key(self):
        """Total order on the parameter tuple (None sorts first)."""
        def fi(v):
            return -1 if v is None else v

        def ff(v):
            return -math.inf if v is None else v

        return (self.experiment, self.method, fi(self.p), fi(self.n),
                fi(self.N), fi(self.ell), ff(self.tau), ff(self.z))

    def formatted(self) -> list[str]:
        def fi(v):
            return "" if v is None else str(v)

        def ff(v):
            return "" if v is None else format(v, ".12g")

        return [self.experiment, self.method, fi(self.p), fi(self.n),
                fi(self.N), fi(self.ell), ff(self.tau), ff(self.z),
                format(self.value, ".16e"), format(self.elapsed_s, ".6e")]


@dataclass
class ExperimentReport:
    """Rows of one experiment run, written sorted under a single header."""

    rows: list

    def write(self, stream) -> None:
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(SCHEMA)
        for row in sorted(self.rows, key=Row.key):
            writer.writerow(row.formatted())


def _tokens(raw: str) -> list[str]:
    return [t for t in (tok.strip() for tok in raw.split(",")) if t]


def _parse_value(key: str, raw: str, kind: str):
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "ints":
            return [int(t) for t in _tokens(raw)]
        if kind == "floats":
            return [float(t) for t in _tokens(raw)]
        return raw
    except ValueError as exc:
        raise UsageError(f"invalid value for {key}: {raw!r}") from exc


def _parse_config_file(path: str) -> dict:
    """key=value per line; '#' starts a comment."""
    values: dict[str, str] = {}
    try:
        with open(path) as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                key, sep, raw = line.partition("=")
                if not sep:
                    raise UsageError(f"{path}:{lineno}: expected key=value")
                values[key.strip()] = raw.strip()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}")
    return values


def _resolve_config(args, spec: dict, defaults: dict) -> dict:
    """Defaults, overridden by the config file, overridden by flags."""
    cfg = dict(defaults)
    if getattr(args, "config", None):
        for key, raw in _parse_config_file(args.config).items():
            if key == "out":
                cfg["out"] = raw
                continue
            if key not in spec:
                raise UsageError(f"unknown config key {key!r}")
            cfg[key] = _parse_value(key, raw, spec[key])
    for key, kind in spec.items():
        raw = getattr(args, key, None)
        if raw is not None:
            cfg[key] = _parse_value(key, raw, kind)
    if getattr(args, "out", None) is not None:
        cfg["out"] = args.out
    if cfg.get("threads", 1) < 1:
        raise UsageError("threads must be >= 1")
    return cfg


def _run_cells(tasks, threads: int) -> list:
    """Evaluate independent parameter points, optionally concurrently.

    Each task returns its own row list; ordering is irrelevant because the
    report sorts by the parameter tuple before writing.
    """
    if threads > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(lambda t: t(), tasks))
    else:
        chunks = [t() for t in tasks]
    return [row for chunk in chunks for row in chunk]


def cmd_delta_table(config: dict) -> ExperimentReport:
    """Scaled residual norms Delta(N) per (z, N).

    The configured K is the tail length beyond N, so every cell resolves
    the same number of discarded modes.
    """
    z_list, n_list, K = config["z"], config["N"], config["K"]
    if n_list and K < max(n_list):
        raise UsageError(
            f"K={K} must be at least max(N)={max(n_list)} so the tail "
            "meets the K >= 2N requirement for every cell")

    def cell(z: float, N: int) -> list:
        t0 = perf_counter()
        value = delta_of_N(z, N, N + K)
        dt = perf_counter() - t0
        return [Row("delta-table", "parseval", p=4, n=1, N=N, z=z,
                    value=value, elapsed_s=dt)]

    tasks = [lambda z=z, N=N: cell(z, N) for z in z_list for N in n_list]
    return ExperimentReport(_run_cells(tasks, config["threads"]))


def cmd_scalar_error(config: dict) -> ExperimentReport:
    """Relative error of the accelerated scalar evaluation over a w grid.

    tau = 0 rows evaluate through the shift identity (q0_shift) with the
    configured alpha; interior tau uses G_approx directly.
    """
    ws = np.linspace(config["wmin"], config["wmax"], config["points"])
    N, alpha = config["N"], config["alpha"]

    def sweep(p: int, ell: int, tau: float) -> list:
        method = "truncated" if ell == 0 else "accelerated"
        rows = []
        for w in ws:
            w = float(w)
            t0 = perf_counter()
            exact = reference_q(tau, w)
            params = ApproxParams(p=p, N=N, tau=0.5 if tau == 0.0 else tau,
                                  w=w, ell=ell, alpha=alpha)
            if tau == 0.0:
                approx = q0_shift(w, alpha=alpha, params=params)
            else:
                approx = G_approx(params)
            value = abs(approx - exact) / abs(exact)
            dt = perf_counter() - t0
            rows.append(Row("scalar-error", method, p=p, N=N, ell=ell,
                            tau=tau, z=w / TWO_PI, value=value,
                            elapsed_s=dt))
        return rows

    tasks = [lambda p=p, ell=ell, tau=tau: sweep(p, ell, tau)
             for p in config["p"] for ell in config["ell"]
             for tau in config["tau"]]
    return ExperimentReport(_run_cells(tasks, config["threads"]))


def cmd_bvp_compare(config: dict) -> ExperimentReport:
    """Max-norm errors of both matrix methods on the heat test problems.

    The classical rows rebuild the full w-power mode vectors ('lanc',
    p = 2n + 2); the accelerated rows use the stabilized order-2 plan
    ('fastlanc') with the configured correction depths.
    """
    kind, s = config["grid"], config["s"]
    if kind == "uniform":
        grid = uniform_grid(24.0, s)
    elif kind == "geometric":
        grid = geometric_grid(0.01, 1.005, s)
    else:
        raise UsageError(f"--grid must be uniform or geometric, got {kind!r}")
    A = discretize_laplacian(grid)
    f = np.ones(A.dimension)
    taus = config["tau"]
    refs = {tau: reference_solution(A, tau, f) for tau in taus}
    experiment = f"bvp-{kind}"

    def errors(plan: ActionPlan) -> list:
        out = []
        for i, tau in enumerate(taus):
            t0 = perf_counter()
            err = float(np.max(np.abs(plan.evaluate(tau) - refs[tau])))
            out.append((tau, err, perf_counter() - t0))
        return out

    def lanc_cell(n: int, N: int) -> list:
        t0 = perf_counter()
        plan = ActionPlan(A, 2 * n + 2, N, 0, f, scheme="direct")
        build = perf_counter() - t0
        return [Row(experiment, "lanc", p=2 * n + 2, n=n, N=N, tau=tau,
                    value=err, elapsed_s=dt + (build if i == 0 else 0.0))
                for i, (tau, err, dt) in enumerate(errors(plan))]

    def fast_cell(ell: int, N: int) -> list:
        t0 = perf_counter()
        plan = ActionPlan(A, 2, N, ell, f)
        build = perf_counter() - t0
        return [Row(experiment, "fastlanc", p=2, N=N, ell=ell, tau=tau,
                    value=err, elapsed_s=dt + (build if i == 0 else 0.0))
                for i, (tau, err, dt) in enumerate(errors(plan))]

    tasks = [lambda n=n, N=N: lanc_cell(n, N)
             for n in config["n"] for N in config["N"]]
    tasks += [lambda ell=ell, N=N: fast_cell(ell, N)
              for ell in config["ell"] for N in config["N"]]
    return ExperimentReport(_run_cells(tasks, config["threads"]))


def cmd_arnoldi_compare(config: dict) -> ExperimentReport:
    """Krylov iteration history against one accelerated summary row.

    Per step j the report carries the projection error ('arnoldi') and
    the basis orthogonality loss ('arnoldi-loss'), both keyed by j in the
    N column; iteration stops at happy breakdown.
    """
    test = config["test"]
    if test not in (3, 4):
        raise UsageError(f"--test must be 3 or 4, got {test}")
    s, steps, tau, N = config["s"], config["steps"], config["tau"], config["N"]
    if steps < 1:
        raise UsageError("steps must be >= 1")
    ell = config["ell"]
    if ell is None:
        ell = 5 if test == 3 else 4
    if test == 3:
        A = discretize_laplacian(geometric_grid(0.01, 1.005, s))
    else:
        A = circulant_shift(s, 1e-8)
    f = np.ones(A.dimension)
    z = reference_solution(A, tau, f)
    experiment = f"arnoldi-test{test}"
    rows = []

    t0 = perf_counter()
    plan = ActionPlan(A, 2, N, ell, f)
    err = float(np.max(np.abs(plan.evaluate(tau) - z)))
    rows.append(Row(experiment, "fastlanc", p=2, N=N, ell=ell, tau=tau,
                    value=err, elapsed_s=perf_counter() - t0))

    t0 = perf_counter()
    dec = arnoldi_extend(A, f, min(steps, A.dimension))
    extend_time = perf_counter() - t0
    for j in range(1, dec.j + 1):
        if j == dec.j:
            pre = dec
        else:
            pre = KrylovDecomposition(V=dec.V[:, :j + 1],
                                      H=dec.H[:j + 1, :j],
                                      beta=dec.beta, j=j, breakdown=False)
        t1 = perf_counter()
        err = float(np.max(np.abs(arnoldi_q_approx(pre, tau) - z)))
        dt = perf_counter() - t1
        rows.append(Row(experiment, "arnoldi", N=j, tau=tau, value=err,
                        elapsed_s=dt + (extend_time if j == 1 else 0.0)))
        t1 = perf_counter()
        loss = orthogonality_loss(pre)
        rows.append(Row(experiment, "arnoldi-loss", N=j, tau=tau,
                        value=loss, elapsed_s=perf_counter() - t1))
    return ExperimentReport(rows)


_COMMANDS = {
    "delta-table": (
        cmd_delta_table,
        {"z": "floats", "N": "ints", "K": "int", "threads": "int"},
        {"z": [1.0, 0.1, 10.0], "N": [512, 1024, 2048], "K": 2048,
         "threads": 1, "out": None},
    ),
    "scalar-error": (
        cmd_scalar_error,
        {"p": "ints", "ell": "ints", "tau": "floats", "N": "int",
         "points": "int", "wmin": "float", "wmax": "float",
         "alpha": "float", "threads": "int"},
        {"p": [2], "ell": [0, 1, 2, 3], "tau": [0.125, 0.0078125], "N": 100,
         "points": 400, "wmin": -10.0, "wmax": 0.0, "alpha": 0.125,
         "threads": 1, "out": None},
    ),
    "bvp-compare": (
        cmd_bvp_compare,
        {"grid": "str", "s": "int", "tau": "floats", "N": "ints",
         "n": "ints", "ell": "ints", "threads": "int"},
        {"grid": "uniform", "s": 512, "tau": [1.0 / 12.0, 1.0 / 6.0],
         "N": [50, 100, 200], "n": [2, 3, 4], "ell": [2, 3, 4],
         "threads": 1, "out": None},
    ),
    "arnoldi-compare": (
        cmd_arnoldi_compare,
        {"test": "int", "steps": "int", "s": "int", "N": "int",
         "ell": "int", "tau": "float", "threads": "int"},
        {"test": 3, "steps": 100, "s": 512, "N": 50, "ell": None,
         "tau": 1.0 / 6.0, "threads": 1, "out": None},
    ),
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="berngen",
        description="Error tables and convergence sweeps for the "
                    "Bernoulli generating function, written as CSV.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help_text: str, flags: dict) -> None:
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--out", help="write CSV here instead of stdout")
        sp.add_argument("--config",
                        help="key=value file overriding the defaults")
        sp.add_argument("--threads",
                        help="worker threads for independent cells")
        for flag, help_line in flags.items():
            kwargs = {"help": help_line}
            if flag == "--grid":
                kwargs["choices"] = ["uniform", "geometric"]
            sp.add_argument(flag, **kwargs)

    add("delta-table", "scaled residual norms Delta(N)", {
        "--z": "comma-separated z values",
        "--N": "comma-separated mode counts",
        "--K": "tail length beyond each N",
    })
    add("scalar-error", "relative error sweep over a w grid", {
        "--p": "comma-separated orders",
        "--ell": "comma-separated correction depths",
        "--tau": "comma-separated evaluation points (0 uses the shift)",
        "--N": "retained modes",
        "--alpha": "offset for the tau = 0 shift identity",
    })
    add("bvp-compare", "matrix-action error tables on the heat problems", {
        "--grid": "grid family",
        "--s": "interior grid size",
        "--tau": "comma-separated evaluation times",
        "--N": "comma-separated mode counts",
        "--n": "comma-separated classical half-orders (p = 2n + 2)",
        "--ell": "comma-separated accelerated correction depths",
    })
    add("arnoldi-compare", "Krylov iteration history vs the accelerated run", {
        "--test": "test problem id (3 or 4)",
        "--steps": "maximum Krylov steps",
        "--s": "operator dimension",
        "--N": "accelerated mode count",
        "--ell": "accelerated correction depth",
        "--tau": "evaluation time",
    })
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    cmd, spec, defaults = _COMMANDS[args.command]
    try:
        config = _resolve_config(args, spec, defaults)
        report = cmd(config)
        out = config.get("out")
        if out:
            try:
                with open(out, "w", newline="") as fh:
                    report.write(fh)
            except OSError as exc:
                raise UsageError(f"cannot write output file {out}: {exc}")
        else:
            report.write(sys.stdout)
        return 0
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (PoleProximityError, TauEndpointError,
            np.linalg.LinAlgError, FloatingPointError,
            ZeroDivisionError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
