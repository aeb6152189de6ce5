"""Command-line interface.

Subcommands::

    ed     key-rate | scan | epsilon-scan | chi-e
    ising  chi-e | key-length | scan
    qfi    report
    sep2q  heisenberg | custom

Data goes to stdout (or --output), diagnostics to stderr. Exit codes:
0 success, 1 usage or validation error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence

import numpy as np

from . import __version__
from .errors import NumericalError, ValidationError
from .ising import IsingParams, QuadratureConfig, d2_chiE_ising, key_length_ising, x_mean
from .operators import (ModelSpec, Operator, build_hamiltonian, charge_operator, eigendecompose,
                        natural_symmetry, parity_operator, parse_pauli)
from .private_info import (WeakPovm, chi_E_exact, d2_chiE_eigensum, d2_chiE_spectral,
                           epsilon_mixing_scan, key_rate_report, strong_symmetry_chiE)
from .qfi import qfi_report
from .separability import (TwoQubitState, heisenberg_chain_check, heisenberg_rho_ab,
                           ppt_verdict)
from .thermal import ThermalState, canonical_state, gibbs_state, sector_mixture_state

SCHEMA_VERSION = 1
DIGITS = 12

ED_KEY_RATE_COLUMNS = ["model", "n", "g", "beta", "ensemble", "sector", "obs_a", "obs_b",
                       "d2_chiE", "d2_Iab", "d2_K", "verdict"]
ISING_SCAN_COLUMNS = ["g", "beta", "d2_chiE", "x", "d2_Iab", "d2_K", "x_K"]
# columns holding information quantities; --units bits divides these by ln 2
INFO_COLUMNS = {"d2_chiE", "d2_Iab", "d2_K", "margin", "chi_E", "d2_chiE_eigensum",
                "d2_chiE_spectral", "ratio"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# ---------------------------------------------------------------- parsing

def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _log_grid(text: str) -> list[float]:
    try:
        lo, hi, n = text.split(":")
        lo, hi, n = float(lo), float(hi), int(n)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo:hi:count, got {text!r}")
    if lo <= 0 or hi <= 0 or n < 1:
        raise argparse.ArgumentTypeError("log grid needs positive bounds and count >= 1")
    return [float(v) for v in np.geomspace(lo, hi, n)]


def _common(p: argparse.ArgumentParser):
    p.add_argument("--format", choices=["csv", "json"], default="json")
    p.add_argument("--units", choices=["nats", "bits"], default="nats")
    p.add_argument("--output", default=None, help="write data here instead of stdout")
    p.add_argument("--config", default=None, help="key=value file; flags take precedence")
    p.add_argument("--threads", type=int, default=1, help="worker cap for sweeps")
    p.add_argument("--verdict-tol", type=float, default=1e-9)


def _model_flags(p: argparse.ArgumentParser):
    p.add_argument("--model", choices=["tfim", "xx", "heisenberg"], required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--g", type=float, default=1.0)
    p.add_argument("--boundary", choices=["open", "periodic"], default="open")


def _ensemble_flags(p: argparse.ArgumentParser):
    p.add_argument("--ensemble", choices=["grand", "canonical", "mix"], default="grand")
    p.add_argument("--generator", choices=["Q", "PX", "PZ"], default="Q")
    p.add_argument("--sector", type=float, default=None)
    p.add_argument("--epsilon", type=float, default=None)


def _quad_flags(p: argparse.ArgumentParser):
    p.add_argument("--nodes-1d", type=int, default=2048)
    p.add_argument("--panels-2d", type=int, default=40)
    p.add_argument("--min-panels-per-oscillation", type=int, default=8)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="privtherm", description="Private correlations in thermal states.")
    parser.add_argument("--version", action="version", version=f"privtherm {__version__}")
    groups = parser.add_subparsers(dest="group", required=True, parser_class=_Parser)

    ed = groups.add_parser("ed", help="exact diagonalization of finite chains")
    ed_cmds = ed.add_subparsers(dest="command", required=True, parser_class=_Parser)
    p = ed_cmds.add_parser("key-rate")
    _model_flags(p), _ensemble_flags(p), _common(p)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--obs-a", required=True)
    p.add_argument("--obs-b", required=True)
    p = ed_cmds.add_parser("scan")
    _model_flags(p), _ensemble_flags(p), _common(p)
    grid = p.add_mutually_exclusive_group(required=True)
    grid.add_argument("--beta-grid", type=_float_list)
    grid.add_argument("--beta-log-grid", type=_log_grid)
    p.add_argument("--obs-a", required=True)
    p.add_argument("--obs-b", required=True,
                   help="observable, or a template such as X@{x} used with --x-max")
    p.add_argument("--x-max", type=int, default=None)
    p = ed_cmds.add_parser("epsilon-scan")
    _model_flags(p), _common(p)
    p.add_argument("--generator", choices=["Q", "PX", "PZ"], default="Q")
    p.add_argument("--sector", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--epsilon-grid", type=_float_list, required=True)
    p.add_argument("--obs-a", required=True)
    p.add_argument("--obs-b", required=True)
    p.add_argument("--beta-p-grid", type=_float_list, default=None,
                   help="grid on which beta_p is located for each epsilon")
    p.add_argument("--beta-p-log-grid", type=_log_grid, default=None)
    p = ed_cmds.add_parser("chi-e")
    _model_flags(p), _ensemble_flags(p), _common(p)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--obs-a", required=True)
    p.add_argument("--mu", type=float, required=True)

    ising = groups.add_parser("ising", help="infinite transverse-field Ising chain")
    ising_cmds = ising.add_subparsers(dest="command", required=True, parser_class=_Parser)
    p = ising_cmds.add_parser("chi-e")
    _common(p), _quad_flags(p)
    p.add_argument("--g", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p = ising_cmds.add_parser("key-length")
    _common(p), _quad_flags(p)
    p.add_argument("--g", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--x-max", type=int, required=True)
    p = ising_cmds.add_parser("scan")
    _common(p), _quad_flags(p)
    p.add_argument("--g", type=_float_list, required=True, help="one or more fields")
    grid = p.add_mutually_exclusive_group(required=True)
    grid.add_argument("--beta-grid", type=_float_list)
    grid.add_argument("--beta-log-grid", type=_log_grid)
    p.add_argument("--x-max", type=int, required=True)

    qfi = groups.add_parser("qfi", help="quantum Fisher information")
    qfi_cmds = qfi.add_subparsers(dest="command", required=True, parser_class=_Parser)
    p = qfi_cmds.add_parser("report")
    _model_flags(p), _common(p)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--sigma", default="sumZ",
                   help="sumZ, sumX, or a Pauli product such as Z@0*Z@1")
    p.add_argument("--obs-a", default=None)
    p.add_argument("--obs-b", default=None)

    sep = groups.add_parser("sep2q", help="two-qubit separability")
    sep_cmds = sep.add_subparsers(dest="command", required=True, parser_class=_Parser)
    p = sep_cmds.add_parser("heisenberg")
    _common(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--x", type=int, required=True)
    p = sep_cmds.add_parser("custom")
    _common(p)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--zz", type=float, help="SU(2)-invariant form with this <ZZ>")
    src.add_argument("--matrix", type=_float_list, help="16 real entries, row major")
    return parser


def _config_args(path: str) -> list[str]:
    args = []
    try:
        with open(path) as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path!r}: {exc}")
    for lineno, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("_", "-")
        if key == "config":
            raise UsageError(f"{path}:{lineno}: nested config is not allowed")
        args += [f"--{key}", value]
    return args


def _split_config(argv: list[str]) -> tuple[list[str], str | None]:
    rest, path = [], None
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok == "--config":
            if i + 1 >= len(argv):
                raise UsageError("--config needs a path")
            path = argv[i + 1]
            i += 2
            continue
        if tok.startswith("--config="):
            path = tok.split("=", 1)[1]
        else:
            rest.append(tok)
        i += 1
    return rest, path


def parse_args(argv: Sequence[str]) -> argparse.Namespace:
    parser = build_parser()
    argv, path = _split_config(list(argv))
    if path is not None:
        # config entries go right after the subcommand so explicit flags win
        argv = argv[:2] + _config_args(path) + argv[2:]
    ns = parser.parse_args(argv)
    ns.config = path
    if getattr(ns, "threads", 1) < 1:
        raise UsageError("--threads must be >= 1")
    return ns


# ---------------------------------------------------------------- formatting

def _fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return format(v, f".{DIGITS}g")
    if value is None:
        return ""
    return str(value)


def _json_value(value):
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if not math.isfinite(v):
            return None
        return float(format(v, f".{DIGITS}g"))
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (list, tuple)):
        return [_json_value(v) for v in value]
    if isinstance(value, dict):
        return {k: _json_value(v) for k, v in value.items()}
    return value


def _convert_units(row: dict, units: str) -> dict:
    if units == "nats":
        return row
    return {k: (v / math.log(2) if k in INFO_COLUMNS and isinstance(v, (float, np.floating)) else v)
            for k, v in row.items()}


def render(command: str, columns: list[str], rows: list[dict], fmt: str, units: str,
           single: bool = False, extra: dict | None = None) -> str:
    rows = [_convert_units(r, units) for r in rows]
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for r in rows:
            writer.writerow([_fmt(r.get(c)) for c in columns])
        return buf.getvalue()
    obj = {"schema_version": SCHEMA_VERSION, "command": command, "units": units}
    if extra:
        obj.update(_json_value(_convert_units(extra, units)))
    if single and len(rows) == 1:
        obj.update({k: _json_value(v) for k, v in rows[0].items()})
    else:
        obj["columns"] = columns
        obj["rows"] = [{c: _json_value(r.get(c)) for c in columns} for r in rows]
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def _parallel_map(fn: Callable, items: list, threads: int) -> list:
    if threads <= 1 or len(items) <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------- ED helpers

def _model(ns) -> tuple[ModelSpec, Operator]:
    spec = ModelSpec(ns.model, ns.n, g=ns.g, boundary=ns.boundary)
    return spec, build_hamiltonian(spec)


def _generator(name: str, n: int) -> Operator:
    if name == "Q":
        return charge_operator(n)
    return parity_operator(n, name[1])


def _symmetry_unitary(sym: Operator | None, n: int) -> Operator:
    # exp(i pi Q / 2) equals prod Z up to a global phase
    if sym is None or sym.label == "Q":
        return parity_operator(n, "Z")
    return sym


class _StateFactory:
    """Builds the requested ensemble at any beta, sharing one eigendecomposition."""

    def __init__(self, ns, spec: ModelSpec, H: Operator):
        self.ns, self.H = ns, H
        self.kind = getattr(ns, "ensemble", "grand")
        if self.kind == "grand":
            self.sym = natural_symmetry(spec)
        else:
            if ns.sector is None:
                raise ValidationError(f"--ensemble {self.kind} needs --sector")
            self.sym = _generator(ns.generator, spec.n_sites)
            if self.kind == "mix" and ns.epsilon is None:
                raise ValidationError("--ensemble mix needs --epsilon")
        eigendecompose(H, self.sym)

    def __call__(self, beta: float) -> ThermalState:
        if self.kind == "grand":
            return gibbs_state(self.H, beta, self.sym)
        if self.kind == "canonical":
            return canonical_state(self.H, self.sym, self.ns.sector, beta)
        return sector_mixture_state(self.H, self.sym, self.ns.sector, beta, self.ns.epsilon)

    def labels(self) -> tuple[str, str]:
        if self.kind == "grand":
            return "grand", ""
        ens = self.kind if self.kind == "canonical" else f"mix:{_fmt(self.ns.epsilon)}"
        return ens, _fmt(float(self.ns.sector))


def _ed_row(ns, beta, ens, sector, obs_b_label, rep) -> dict:
    return {"model": ns.model, "n": ns.n, "g": float(ns.g), "beta": float(beta), "ensemble": ens,
            "sector": sector, "obs_a": ns.obs_a, "obs_b": obs_b_label, "d2_chiE": rep.d2_chiE,
            "d2_Iab": rep.d2_Iab, "d2_K": rep.d2_K, "verdict": rep.verdict}


def cmd_ed_key_rate(ns) -> str:
    spec, H = _model(ns)
    factory = _StateFactory(ns, spec, H)
    st = factory(ns.beta)
    a, b = parse_pauli(ns.obs_a, ns.n), parse_pauli(ns.obs_b, ns.n)
    rep = key_rate_report(st, a, b, tol=ns.verdict_tol)
    ens, sector = factory.labels()
    row = _ed_row(ns, ns.beta, ens, sector, ns.obs_b, rep)
    row.update(margin=rep.margin, scale_b=rep.scale_b)
    return render("ed key-rate", ED_KEY_RATE_COLUMNS, [row], ns.format, ns.units, single=True)


def cmd_ed_scan(ns) -> str:
    spec, H = _model(ns)
    factory = _StateFactory(ns, spec, H)
    betas = ns.beta_grid or ns.beta_log_grid
    if "{x}" in ns.obs_b:
        if ns.x_max is None:
            raise ValidationError("--obs-b template needs --x-max")
        labels = [ns.obs_b.replace("{x}", str(x)) for x in range(1, ns.x_max + 1)]
    else:
        labels = [ns.obs_b]
    a = parse_pauli(ns.obs_a, ns.n)
    obs_b = [parse_pauli(lbl, ns.n) for lbl in labels]
    ens, sector = factory.labels()

    def point(beta):
        st = factory(beta)
        chi = d2_chiE_eigensum(st, a)
        return [_ed_row(ns, beta, ens, sector, lbl,
                        key_rate_report(st, a, ob, tol=ns.verdict_tol, d2_chiE=chi))
                for lbl, ob in zip(labels, obs_b)]

    rows = [r for block in _parallel_map(point, betas, ns.threads) for r in block]
    return render("ed scan", ED_KEY_RATE_COLUMNS, rows, ns.format, ns.units)


def cmd_ed_epsilon_scan(ns) -> str:
    spec, H = _model(ns)
    gen = _generator(ns.generator, ns.n)
    eigendecompose(H, gen)
    a, b = parse_pauli(ns.obs_a, ns.n), parse_pauli(ns.obs_b, ns.n)
    grid = ns.beta_p_grid or ns.beta_p_log_grid

    def point(eps):
        return epsilon_mixing_scan(H, gen, ns.sector, ns.beta, [eps], a, b, grid,
                                   tol=ns.verdict_tol)[0]

    results = _parallel_map(point, ns.epsilon_grid, ns.threads)
    columns = ["model", "n", "g", "beta", "sector", "epsilon", "obs_a", "obs_b", "d2_chiE",
               "d2_Iab", "d2_K", "ratio", "beta_p", "verdict"]
    rows = [{"model": ns.model, "n": ns.n, "g": float(ns.g), "beta": float(ns.beta),
             "sector": _fmt(float(ns.sector)), "epsilon": r.epsilon, "obs_a": ns.obs_a,
             "obs_b": ns.obs_b, "d2_chiE": r.report.d2_chiE, "d2_Iab": r.report.d2_Iab,
             "d2_K": r.report.d2_K, "ratio": r.ratio, "beta_p": r.beta_p,
             "verdict": r.report.verdict} for r in results]
    return render("ed epsilon-scan", columns, rows, ns.format, ns.units)


def cmd_ed_chi_e(ns) -> str:
    spec, H = _model(ns)
    factory = _StateFactory(ns, spec, H)
    st = factory(ns.beta)
    a = parse_pauli(ns.obs_a, ns.n)
    chi = chi_E_exact(st, WeakPovm(a, ns.mu))
    eig = d2_chiE_eigensum(st, a)
    spectral = d2_chiE_spectral(st, a) if st.is_thermal else None
    strong = strong_symmetry_chiE(st, _symmetry_unitary(factory.sym, ns.n), a)
    ens, sector = factory.labels()
    columns = ["model", "n", "g", "beta", "ensemble", "sector", "obs_a", "mu", "chi_E",
               "d2_chiE_eigensum", "d2_chiE_spectral", "strong_symmetry"]
    row = {"model": ns.model, "n": ns.n, "g": float(ns.g), "beta": float(ns.beta), "ensemble": ens,
           "sector": sector, "obs_a": ns.obs_a, "mu": float(ns.mu), "chi_E": chi,
           "d2_chiE_eigensum": eig, "d2_chiE_spectral": spectral, "strong_symmetry": strong}
    return render("ed chi-e", columns, [row], ns.format, ns.units, single=True)


# ---------------------------------------------------------------- Ising

def _quad(ns) -> QuadratureConfig:
    return QuadratureConfig(nodes_1d=ns.nodes_1d, panels_2d=ns.panels_2d,
                            min_panels_per_oscillation=ns.min_panels_per_oscillation)


def cmd_ising_chi_e(ns) -> str:
    p, q = IsingParams(ns.g, ns.beta), _quad(ns)
    row = {"g": float(ns.g), "beta": float(ns.beta), "d2_chiE": d2_chiE_ising(p, q),
           "x_mean": x_mean(p, q)}
    return render("ising chi-e", ["g", "beta", "d2_chiE", "x_mean"], [row], ns.format, ns.units,
                  single=True)


def cmd_ising_key_length(ns) -> str:
    p, q = IsingParams(ns.g, ns.beta), _quad(ns)
    rep = key_length_ising(p, ns.x_max, q, tol=ns.verdict_tol)
    row = {"g": float(ns.g), "beta": float(ns.beta), "d2_chiE": rep.d2_chiE, "x_K": rep.x_K,
           "censored": bool(rep.flags), "x_max": ns.x_max}
    return render("ising key-length", ["g", "beta", "d2_chiE", "x_K", "censored", "x_max"], [row],
                  ns.format, ns.units, single=True)


def cmd_ising_scan(ns) -> str:
    q = _quad(ns)
    betas = ns.beta_grid or ns.beta_log_grid
    points = [(g, b) for g in ns.g for b in betas]

    def point(gb):
        g, b = gb
        rep = key_length_ising(IsingParams(g, b), ns.x_max, q, tol=ns.verdict_tol)
        return [{"g": float(g), "beta": float(b), "d2_chiE": rep.d2_chiE, "x": x, "d2_Iab": iab,
                 "d2_K": k, "x_K": rep.x_K} for x, iab, k in rep.scan]

    rows = [r for block in _parallel_map(point, points, ns.threads) for r in block]
    return render("ising scan", ISING_SCAN_COLUMNS, rows, ns.format, ns.units)


# ---------------------------------------------------------------- QFI, sep2q

def _sigma(text: str, n: int) -> Operator:
    if text in ("sumZ", "sumX", "sumY"):
        from .operators import pauli_string, sum_operators
        axis = text[-1]
        return sum_operators([(1.0, pauli_string([(j, axis)], n)) for j in range(n)], n, text)
    return parse_pauli(text, n)


def cmd_qfi_report(ns) -> str:
    spec, H = _model(ns)
    st = gibbs_state(H, ns.beta, natural_symmetry(spec))
    sigma = _sigma(ns.sigma, ns.n)
    a = parse_pauli(ns.obs_a, ns.n) if ns.obs_a else None
    b = parse_pauli(ns.obs_b, ns.n) if ns.obs_b else None
    rep = qfi_report(st, sigma, ns.n, a, b)
    crypto = key_rate_report(st, a, b, tol=ns.verdict_tol).verdict if a is not None and b is not None else None
    columns = ["model", "n", "g", "beta", "sigma", "f_paper", "f_eigensum", "ratio", "bound_k",
               "max_violated_k", "bipartite_condition", "crypto_verdict"]
    row = {"model": ns.model, "n": ns.n, "g": float(ns.g), "beta": float(ns.beta), "sigma": ns.sigma,
           "f_paper": rep.f_paper, "f_eigensum": rep.f_eigensum, "ratio": rep.ratio,
           "bound_k": rep.bound_k, "max_violated_k": rep.max_violated_k,
           "bipartite_condition": rep.bipartite_condition, "crypto_verdict": crypto}
    return render("qfi report", columns, [row], ns.format, "nats", single=True)


SEP_COLUMNS = ["source", "zz", "verdict", "negativity", "min_eigenvalue"]


def cmd_sep2q_heisenberg(ns) -> str:
    res = heisenberg_chain_check(ns.n, ns.x)
    row = {"source": f"heisenberg ring N={ns.n} x={ns.x}", "n": ns.n, "x": ns.x, "zz": res.zz,
           "verdict": res.verdict, "negativity": res.negativity, "form_error": res.form_error,
           "gap": res.gap}
    return render("sep2q heisenberg", ["n", "x", "zz", "verdict", "negativity", "form_error", "gap"],
                  [row], ns.format, "nats", single=True)


def cmd_sep2q_custom(ns) -> str:
    if ns.zz is not None:
        state = heisenberg_rho_ab(ns.zz)
        zz = ns.zz
    else:
        if len(ns.matrix) != 16:
            raise ValidationError(f"--matrix needs 16 entries, got {len(ns.matrix)}")
        state = TwoQubitState(np.array(ns.matrix).reshape(4, 4), provenance="custom")
        zz = float(np.real(np.trace(state.matrix @ np.diag([1.0, -1.0, -1.0, 1.0]))))
    res = ppt_verdict(state)
    row = {"source": state.provenance, "zz": zz, "verdict": res.verdict,
           "negativity": res.negativity, "min_eigenvalue": res.min_eigenvalue}
    return render("sep2q custom", SEP_COLUMNS, [row], ns.format, "nats", single=True)


COMMANDS = {
    ("ed", "key-rate"): cmd_ed_key_rate,
    ("ed", "scan"): cmd_ed_scan,
    ("ed", "epsilon-scan"): cmd_ed_epsilon_scan,
    ("ed", "chi-e"): cmd_ed_chi_e,
    ("ising", "chi-e"): cmd_ising_chi_e,
    ("ising", "key-length"): cmd_ising_key_length,
    ("ising", "scan"): cmd_ising_scan,
    ("qfi", "report"): cmd_qfi_report,
    ("sep2q", "heisenberg"): cmd_sep2q_heisenberg,
    ("sep2q", "custom"): cmd_sep2q_custom,
}


def run(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        ns = parse_args(argv)
        text = COMMANDS[(ns.group, ns.command)](ns)
    except SystemExit as exc:  # --help and --version
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"usage error: {exc}", file=stderr)
        return 1
    except ValidationError as exc:
        print(f"error: {exc}", file=stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=stderr)
        return 2
    if ns.output:
        with open(ns.output, "w", newline="") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return 0


def main() -> None:
    try:
        code = run()
        sys.stdout.flush()
    except BrokenPipeError:
        # downstream closed the pipe (e.g. `| head`); silence the flush at exit
        sys.stdout = open(os.devnull, "w")
        code = 0
    sys.exit(code)
