"""Command-line driver: run / sweep / scan / selftest.

Configuration is a flat key = value file ('#' comments); every key can also
be given as a --key value flag, which wins over the file.  dt defaults to
0.25/N, resolved after all overrides.  Exit codes: 0 success, 1 bad
configuration or usage, 2 drift supervision gave up, 3 non-finite blowup.

Run output is a CSV with one row per sample and a '#'-prefixed footer of
summary statistics; reruns of the same configuration produce byte-identical
files.
"""

import argparse
import logging
import math
import os
import sys
from dataclasses import dataclass, fields, replace
from multiprocessing import Pool

import numpy as np

from .diagnostics import interpolation_checks, j_functional, l2_sum, sigma_and_Sigma
from .diagnostics import Sigma_rewritten, hm12_sum, shear_rate
from .lattice import Params, initial_data, make_random_state
from .quadform import (
    DEFAULT_SCAN_BOX,
    domination_constant,
    scan_grids,
    sigma_lower_bound_certificate,
)
from .tendency import rhs_direct, rhs_fast, triad_conservation_check
from .timeloop import BlowupError, DriftError, Sink, StepControl, run

log = logging.getLogger(__name__)

CSV_HEADER = "t,l2,hm12,combined,tail,theta_e,J,sigma,Sigma,W_phi,W_k2,low_mass,h_half,sob_half,sob_s,case"


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    """Everything a CLI invocation needs; mirrors the config-file keys."""

    tau: float = 0.05
    N: int = 64
    dt: float = None  # resolved to 0.25/N when left unset
    t_max: float = 100.0
    s: float = 11.0
    sample_every: int = 16
    method: str = "fast"
    output_path: str = "run.csv"
    sweep_tau: tuple = (0.1, 0.05, 0.02)
    drift_budget: float = 1e-9
    halve_on_breach: bool = True
    box: int = 64
    seed: int = 0
    emit_scan: bool = False
    parallel: bool = False


_TAU_LIST = object()  # sentinel type tag for comma-separated floats

FIELD_TYPES = {
    "tau": float,
    "N": int,
    "dt": float,
    "t_max": float,
    "s": float,
    "sample_every": int,
    "method": str,
    "output_path": str,
    "sweep_tau": _TAU_LIST,
    "drift_budget": float,
    "halve_on_breach": bool,
    "box": int,
    "seed": int,
    "emit_scan": bool,
    "parallel": bool,
}

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _coerce(key, text):
    ty = FIELD_TYPES[key]
    try:
        if ty is bool:
            low = text.strip().lower()
            if low in _TRUE:
                return True
            if low in _FALSE:
                return False
            raise ValueError(f"not a boolean: {text!r}")
        if ty is _TAU_LIST:
            vals = tuple(float(x) for x in text.split(",") if x.strip())
            if not vals:
                raise ValueError("empty tau list")
            return vals
        return ty(text)
    except ValueError as e:
        raise ConfigError(f"bad value for {key}: {e}") from None


def parse_config(path):
    """Read a flat key = value file into a raw string map."""
    out = {}
    try:
        fh = open(path)
    except OSError as e:
        raise ConfigError(f"cannot read config file: {e}") from None
    with fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            key, val = line.split("=", 1)
            key = key.strip()
            if key not in FIELD_TYPES:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            if key in out:
                raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
            out[key] = val.strip()
    return out


def build_config(file_values=None, overrides=None):
    """Defaults, then config file, then explicit flags; dt resolved last."""
    cfg = RunConfig()
    for source in (file_values or {}), (overrides or {}):
        for key, text in source.items():
            if text is None:
                continue
            setattr(cfg, key, _coerce(key, text) if isinstance(text, str) else text)
    if cfg.dt is None:
        cfg.dt = 0.25 / cfg.N
    if cfg.method not in ("fast", "direct"):
        raise ConfigError(f"method must be fast or direct, got {cfg.method!r}")
    return cfg


def _fmt(v):
    return format(float(v), ".17g")


class CsvSink(Sink):
    """Streams records to a CSV file and accumulates the footer statistics."""

    def __init__(self, path):
        self.path = path
        self.fh = None

    def begin(self, params, dt):
        if self.fh is not None:
            self.fh.close()
        d = os.path.dirname(self.path)
        if d:
            os.makedirs(d, exist_ok=True)
        self.fh = open(self.path, "w", newline="\n")
        self.fh.write(CSV_HEADER + "\n")
        self.max_J = -math.inf
        self.t_of_max_J = 0.0
        self.max_sob_s = -math.inf
        self.final_case = "NONE"

    def emit(self, record, state):
        vals = [
            record.t, record.l2, record.hm12, record.combined, record.tail,
            record.theta_e, record.J, record.sigma, record.Sigma, record.W_phi,
            record.W_k2, record.low_mass, record.h_half, record.sob_half, record.sob_s,
        ]
        self.fh.write(",".join(_fmt(v) for v in vals) + "," + record.case + "\n")
        if record.J > self.max_J:
            self.max_J = record.J
            self.t_of_max_J = record.t
        self.max_sob_s = max(self.max_sob_s, record.sob_s)
        self.final_case = record.case

    def finish(self, stats):
        c_star, _ = domination_constant(DEFAULT_SCAN_BOX)
        lines = [
            ("final_case", self.final_case),
            ("max_J", _fmt(self.max_J)),
            ("t_of_max_J", _fmt(self.t_of_max_J)),
            ("max_sob_s", _fmt(self.max_sob_s)),
            ("c_star", _fmt(c_star)),
            ("drift_l2", _fmt(stats.drift_l2)),
            ("drift_hm12", _fmt(stats.drift_hm12)),
            ("dt_final", _fmt(stats.dt_final)),
            ("restarts", str(stats.restarts)),
            ("blowup", str(int(stats.blowup))),
        ]
        for key, val in lines:
            self.fh.write(f"# {key} = {val}\n")
        self.fh.close()
        self.fh = None


def _evaluator(cfg):
    return rhs_fast if cfg.method == "fast" else rhs_direct


def _execute(cfg):
    dt = cfg.dt if cfg.dt is not None else 0.25 / cfg.N
    params = Params(tau=cfg.tau, N=cfg.N, dt=dt, t_max=cfg.t_max, s=cfg.s,
                    sample_every=cfg.sample_every)
    if params.tau_flagged:
        log.warning("tau = %g is above the small-amplitude window", params.tau)
    control = StepControl(dt=dt, drift_budget=cfg.drift_budget,
                          halve_on_breach=cfg.halve_on_breach)
    sink = CsvSink(cfg.output_path)
    state, stats = run(params, control, sink, evaluator=_evaluator(cfg))
    return state, stats, sink


def run_experiment(cfg):
    """One full run to CSV; returns (final_state, stats)."""
    state, stats, _ = _execute(cfg)
    if cfg.emit_scan:
        stem, _ = os.path.splitext(cfg.output_path)
        emit_quadform_scan(stem + "_scan.csv", cfg.box)
    return state, stats


def emit_quadform_scan(path, box=DEFAULT_SCAN_BOX):
    """Write the per-site form table over |k1| <= box, 1 <= k2 <= box.

    The axis column k1 = 0 is listed with its exact-zero eigenvalue; it and
    the two indefinite sites (+-1, 1) stay outside the c_star minimum.
    """
    k1g, k2g, a, b, c, lam = scan_grids(box)
    val = lam * np.hypot(k1g, k2g) ** 3
    a, b, c, lam, val = (np.broadcast_to(x, (box, 2 * box + 1)) for x in (a, b, c, lam, val))
    d = os.path.dirname(path)
    if d:
        os.makedirs(d, exist_ok=True)
    c_star, site = domination_constant(box)
    with open(path, "w", newline="\n") as fh:
        fh.write("k1,k2,a,b,c,lambda_min,lambda_min_times_k3\n")
        for r in range(box):
            for j in range(2 * box + 1):
                fh.write(f"{j - box},{r + 1},{_fmt(a[r, j])},{_fmt(b[r, j])},"
                         f"{_fmt(c[r, j])},{_fmt(lam[r, j])},{_fmt(val[r, j])}\n")
        fh.write(f"# box = {box}\n")
        fh.write(f"# c_star = {_fmt(c_star)}\n")
        fh.write(f"# c_star_site = {site[0]},{site[1]}\n")


def _sweep_worker(cfg):
    _, _, sink = _execute(cfg)
    return cfg.tau, sink.max_J / cfg.tau**2, sink.t_of_max_J


def run_sweep(cfg):
    """One run per tau in sweep_tau; per-run CSVs plus a summary CSV."""
    stem, ext = os.path.splitext(cfg.output_path)
    jobs = [replace(cfg, tau=tau, output_path=f"{stem}_tau{tau:g}{ext or '.csv'}")
            for tau in cfg.sweep_tau]
    if cfg.parallel and len(jobs) > 1:
        with Pool(processes=min(len(jobs), os.cpu_count() or 1)) as pool:
            rows = pool.map(_sweep_worker, jobs)
    else:
        rows = [_sweep_worker(job) for job in jobs]
    d = os.path.dirname(cfg.output_path)
    if d:
        os.makedirs(d, exist_ok=True)
    with open(cfg.output_path, "w", newline="\n") as fh:
        fh.write("tau,max_J_over_tau2,t_of_max\n")
        for tau, ratio, t_of_max in rows:
            fh.write(f"{_fmt(tau)},{_fmt(ratio)},{_fmt(t_of_max)}\n")
    return rows


def _selftest_checks(seed):
    tau = 0.1

    def orientation():
        st = make_random_state(8, seed=seed + 1, theta_e=0.8)
        ref = rhs_direct(st)
        err = float(np.max(np.abs(rhs_fast(st) - ref)))
        assert err <= 1e-12 * max(1.0, float(np.max(np.abs(ref)))), f"evaluator mismatch {err:.3e}"

    def conservation():
        st = make_random_state(8, seed=seed + 2, theta_e=0.8)
        d2, dm = triad_conservation_check(st)
        assert abs(d2) < 1e-11 and abs(dm) < 1e-11, f"conserved-sum rates {d2:.3e} {dm:.3e}"

    def initial_sums():
        st = initial_data(tau, 16)
        assert abs(l2_sum(st) - (2 + 4 * tau**2)) < 1e-14
        assert abs(hm12_sum(st) - (2 + 2 * tau**2 * (0.5 + 5**-0.5))) < 1e-14
        assert abs(j_functional(st) - tau**2 / 2) < 1e-16

    def rate_split():
        st = make_random_state(12, seed=seed + 3, theta_e=0.7)
        sigma, Sigma = sigma_and_Sigma(st, evaluator=rhs_direct)
        tend = rhs_direct(st)
        from .diagnostics import _j_rate
        from .lattice import geometry
        chain = _j_rate(st.coeff, tend, geometry(st.N)[4])
        assert abs(sigma + Sigma - chain) < 1e-12 * max(1.0, abs(chain)), "rate split broken"

    def rewritten():
        st = make_random_state(12, seed=seed + 4, margin=2, theta_e=0.7)
        Sigma = shear_rate(st)
        rw = Sigma_rewritten(st, strict=True)
        assert abs(rw - Sigma) < 1e-12 * max(1.0, abs(Sigma)), f"{rw} vs {Sigma}"

    def scan_constant():
        c_star, site = domination_constant(128)
        assert c_star > 0 and abs(site[1]) >= 1
        c_star2, _ = domination_constant(256)
        assert abs(c_star2 - c_star) <= 0.05 * c_star, "scan constant unstable in box"

    def certificate():
        st = make_random_state(12, seed=seed + 5, margin=2, theta_e=0.6)
        rep = sigma_lower_bound_certificate(st)
        assert rep.ok, f"Sigma {rep.Sigma} below bound {rep.bound}"

    def interpolation():
        st = make_random_state(12, seed=seed + 6, theta_e=0.5)
        rep = interpolation_checks(st)
        assert rep.ok_w_k2 and rep.ok_h_half, "interpolation bound violated"

    return [
        ("evaluator orientation", orientation),
        ("conserved-sum rates", conservation),
        ("initial-data sums", initial_sums),
        ("dJ/dt split", rate_split),
        ("rewritten shear form", rewritten),
        ("scan constant", scan_constant),
        ("lower-bound certificate", certificate),
        ("interpolation bounds", interpolation),
    ]


def run_selftest(seed=0, stream=None):
    stream = stream or sys.stdout
    failed = 0
    for name, fn in _selftest_checks(seed):
        try:
            fn()
        except AssertionError as e:
            failed += 1
            stream.write(f"selftest: {name}: FAIL ({e})\n")
        else:
            stream.write(f"selftest: {name}: ok\n")
    stream.write(f"selftest: {'PASS' if failed == 0 else 'FAIL'}\n")
    return 0 if failed == 0 else 1


class _Parser(argparse.ArgumentParser):
    # usage problems are configuration errors: exit 1, not argparse's 2
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.exit(1)


def _make_parser():
    p = _Parser(prog="sqgspec", description="truncated spectral runs and form scans")
    sub = p.add_subparsers(dest="command", required=True)
    helps = {
        "run": "integrate one configuration and write its CSV",
        "sweep": "run every tau in sweep_tau and write a summary CSV",
        "scan": "write the quadratic-form scan table",
        "selftest": "quick internal consistency checks",
    }
    for name in ("run", "sweep", "scan", "selftest"):
        sp = sub.add_parser(name, help=helps[name])
        sp.add_argument("--config", metavar="PATH", help="flat key = value file")
        for key in FIELD_TYPES:
            sp.add_argument(f"--{key}", metavar="V", help=f"override {key}")
    return p


def main(argv=None):
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    parser = _make_parser()
    args = parser.parse_args(argv)
    try:
        file_values = parse_config(args.config) if args.config else {}
        overrides = {k: getattr(args, k) for k in FIELD_TYPES if getattr(args, k) is not None}
        cfg = build_config(file_values, overrides)
        if args.command == "run":
            _, stats = run_experiment(cfg)
            log.info("run finished: %d steps, drift %.3e, wrote %s",
                     stats.steps, max(stats.drift_l2, stats.drift_hm12), cfg.output_path)
        elif args.command == "sweep":
            rows = run_sweep(cfg)
            for tau, ratio, t_of_max in rows:
                log.info("tau %g: max J / tau^2 = %.6g at t = %g", tau, ratio, t_of_max)
        elif args.command == "scan":
            emit_quadform_scan(cfg.output_path if cfg.output_path != "run.csv" else "scan.csv",
                               cfg.box)
        elif args.command == "selftest":
            return run_selftest(cfg.seed)
    except (ConfigError, ValueError) as e:
        sys.stderr.write(f"sqgspec: configuration error: {e}\n")
        return 1
    except DriftError as e:
        sys.stderr.write(f"sqgspec: drift supervision failed: {e}\n")
        return 2
    except BlowupError as e:
        sys.stderr.write(f"sqgspec: blowup: {e}\n")
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
