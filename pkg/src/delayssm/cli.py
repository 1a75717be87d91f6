"""Command line interface: ``delayssm <subcommand> ...``.

Outputs are deterministic: JSON with sorted keys and CSV with 17 significant
digits.  Every run carries a manifest with the system-file hash and all
numerical flags.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from . import __version__
from .errors import DegenerateHopf, DelaySSMError, SystemFileError
from .inertial import (
    certify_f_form,
    certify_gap,
    certify_small_delay,
    certify_with_cutoff,
    f_form_hmax,
    tau_curves,
)
from .model import DDESystem
from .projection import dichotomy_constants, eigen_data, projection_norm, xi_residue
from .simulate import extract_limit_cycle, integrate, measure_decay
from .spectrum import SpectrumSlice, Tolerances, roots_right_of
from .ssm import (
    LimitCycle,
    expansion_coeffs,
    invariance_residual,
    manifold_eval,
    normal_form,
    predict_limit_cycle,
    reduce_real,
)
from .sysfile import file_digest, load_system
from . import systems

__all__ = ["main", "build_parser", "RunManifest"]


@dataclass
class RunManifest:
    """Provenance of one invocation."""

    subcommand: str
    system_sha256: Optional[str]
    flags: dict
    version: str = __version__
    outputs: list = field(default_factory=list)


# -- formatting -----------------------------------------------------------------


def _num(x):
    if isinstance(x, (complex, np.complexfloating)):
        return {"re": _num(float(x.real)), "im": _num(float(x.imag))}
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    if isinstance(x, np.integer):
        return int(x)
    return x


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()] if obj.ndim else _jsonable(obj.item())
    if hasattr(obj, "as_dict"):
        return _jsonable(obj.as_dict())
    return _num(obj)


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _fmt(v) -> str:
    return format(float(v), ".17g")


def write_csv(path: Path, header: Sequence[str], rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([v if isinstance(v, str) else _fmt(v) for v in row])
    path.write_text(buf.getvalue())


def _parse_complex(text: str) -> complex:
    return complex(text.replace(" ", "").replace("i", "j"))


# -- shared helpers -------------------------------------------------------------


def _tol(args) -> Tolerances:
    return Tolerances(tol_root=args.tol_root)


def _slice(system: DDESystem, args, gamma: float, depth: Optional[float] = None) -> SpectrumSlice:
    return roots_right_of(gamma, system.kernel, depth=depth, tol=_tol(args), threads=args.threads)


def _roots_doc(sl: SpectrumSlice) -> dict:
    return {
        "gamma": sl.gamma,
        "roots": list(sl.roots),
        "multiplicities": list(sl.multiplicities),
        "beta": sl.beta,
        "others": list(sl.others),
        "floor": sl.floor,
    }


def _manifest(args, system_path: Optional[str]) -> RunManifest:
    flags = {
        k: v for k, v in sorted(vars(args).items())
        if k not in ("func", "command") and not callable(v)
    }
    return RunManifest(args.command, file_digest(system_path) if system_path else None, flags)


def _emit(args, doc: dict, manifest: RunManifest) -> None:
    out = getattr(args, "out", None)
    if out:
        manifest.outputs.append(str(out))
    doc = dict(doc, manifest=asdict(manifest))
    text = dumps(doc)
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# -- subcommands ---------------------------------------------------------------


def cmd_spectrum(args) -> int:
    system = load_system(args.system)
    sl = _slice(system, args, args.gamma, args.depth)
    man = _manifest(args, args.system)
    if args.csv:
        rows = [(z.real, z.imag, m) for z, m in zip(sl.roots, sl.multiplicities)]
        write_csv(Path(args.csv), ["re", "im", "multiplicity"], rows)
        man.outputs.append(args.csv)
    _emit(args, {"spectrum": _roots_doc(sl)}, man)
    return 0


def cmd_xi(args) -> int:
    system = load_system(args.system)
    if args.lam is not None:
        lam = _parse_complex(args.lam)
    else:
        sl = _slice(system, args, args.gamma)
        lam = max(sl.roots, key=lambda z: (z.real, z.imag))
    ed = eigen_data(lam, system.kernel)
    doc = {"lambda": ed.lam, "xi": xi_residue(ed.lam, system.kernel), "c": ed.c, "d": ed.d}
    _emit(args, doc, _manifest(args, args.system))
    return 0


def _ssm_doc(system: DDESystem, sl: SpectrumSlice, with_nf: bool = True) -> dict:
    model = expansion_coeffs(system, sl)
    doc: dict = {
        "trivial": system.jet.is_zero,
        "lambdas": list(model.lambdas),
        "ell": model.ell,
        "formal": model.formal,
        "H": {",".join(map(str, m)): v for m, v in sorted(model.H.items())},
        "K_at_0": {
            ",".join(map(str, m)): (None if k is None else k(np.array([0.0]))[0])
            for m, k in sorted(model.K.items())
        },
        "residual": invariance_residual(model).max_relative,
    }
    if model.is_real:
        lam1, c3 = reduce_real(model)
        doc["reduced"] = {"lambda1": lam1, "c3": c3}
    if model.is_pair and with_nf:
        nf = normal_form(model)
        try:
            cyc = predict_limit_cycle(nf)
        except DegenerateHopf:
            # no cubic coefficient (e.g. a linear system): nothing to predict
            cyc = LimitCycle(None, None, False, False)
        doc["normal_form"] = {
            "lambda1": nf.lam1,
            "beta21": nf.beta21,
            "p": list(nf.p_coeffs),
            "K30_at_0": nf.K30(np.array([0.0]))[0],
            "K21_at_0": nf.K21(np.array([0.0]))[0],
            "r_hat": cyc.r_hat,
            "omega": cyc.omega,
            "period": cyc.period,
            "stable": cyc.stable,
        }
    return doc


def cmd_ssm(args) -> int:
    system = load_system(args.system)
    sl = _slice(system, args, args.gamma)
    _emit(args, {"spectrum": _roots_doc(sl), "ssm": _ssm_doc(system, sl)}, _manifest(args, args.system))
    return 0


def _certificate(system, args, route: str, sl: Optional[SpectrumSlice]):
    if route == "gap":
        d = dichotomy_constants(sl, args.mode, kernel=system.kernel)
        return certify_gap(system, sl, d)
    if route == "small-delay":
        return certify_small_delay(system, mode=args.mode)
    if route == "f-form":
        return certify_f_form(system, args.beta2, lip_F=args.lip_f)
    if route == "cutoff":
        return certify_with_cutoff(system, args.rho, sl)
    raise ValueError(route)


def cmd_im_check(args) -> int:
    system = load_system(args.system)
    sl = None
    if args.route in ("gap", "cutoff"):
        sl = _slice(system, args, args.gamma, args.depth)
    cert = _certificate(system, args, args.route, sl)
    _emit(args, {"certificate": cert}, _manifest(args, args.system))
    return 0


def _history(spec: str, system: DDESystem):
    kind, _, rest = spec.partition(":")
    n = system.n
    if kind == "const":
        vals = [float(v) for v in rest.split(",")] if rest else [0.0]
        return np.broadcast_to(np.array(vals), (n,)).copy()
    if kind == "eigen":
        parts = rest.split(":")
        lam = _parse_complex(parts[0])
        amp = float(parts[1]) if len(parts) > 1 else 0.1
        ed = eigen_data(lam, system.kernel)
        return lambda th: amp * np.real(np.exp(np.multiply.outer(th, ed.lam))[..., None] * ed.c)
    if kind == "file":
        data = np.loadtxt(rest, delimiter=",", skiprows=1, ndmin=2)
        spline = CubicSpline(data[:, 0], data[:, 1:], axis=0)
        return lambda th: spline(np.asarray(th, dtype=float))
    raise SystemFileError(f"unknown history specification {spec!r}")


def cmd_simulate(args) -> int:
    system = load_system(args.system)
    traj = integrate(system, _history(args.history, system), args.t_end, args.dt)
    man = _manifest(args, args.system)
    if args.csv:
        write_csv(
            Path(args.csv),
            ["t"] + [f"x_{i + 1}" for i in range(system.n)],
            (np.concatenate([[t], x]) for t, x in zip(traj.t, traj.x)),
        )
        man.outputs.append(args.csv)
    fit = measure_decay(traj)
    doc = {"t_end": float(traj.t[-1]), "dt": traj.dt, "x_end": traj.x[-1], "decay": asdict(fit)}
    _emit(args, doc, man)
    return 0


def _stage(doc: dict, name: str, fn):
    try:
        doc[name] = fn()
        return doc[name]
    except (DelaySSMError, ValueError, ArithmeticError) as exc:
        doc[name] = {"error": f"{type(exc).__name__}: {exc}", "stage": name}
        return None


def cmd_pipeline(args) -> int:
    system = load_system(args.system)
    doc: dict = {"system": {"label": system.label, "n": system.n, "h": system.h}}
    sl_doc = _stage(doc, "spectrum", lambda: _roots_doc(_slice(system, args, args.gamma, args.depth)))
    sl = None
    if sl_doc is not None:
        sl = SpectrumSlice(
            sl_doc["gamma"], tuple(sl_doc["roots"]), tuple(sl_doc["multiplicities"]), sl_doc["beta"],
            tuple(sl_doc["others"]), (1,) * len(sl_doc["others"]), sl_doc["floor"],
        )
        _stage(doc, "projection", lambda: {
            "xi": [xi_residue(z, system.kernel, allow_semisimple=True) for z in sl.roots],
            "norm": projection_norm(system.kernel, sl.roots) if sl.roots else 0.0,
        })
        if len(sl.roots) in (1, 2):
            _stage(doc, "ssm", lambda: _ssm_doc(system, sl))
        certs: dict = {}
        if system.jet.lip_global is not None and sl.beta is not None:
            _stage(certs, "gap", lambda: certify_gap(system, sl).as_dict())
        if system.jet.lip_global is not None:
            _stage(certs, "small_delay", lambda: certify_small_delay(system).as_dict())
        if system.jet.lip_ball is not None and sl.beta is not None:
            _stage(certs, "cutoff", lambda: certify_with_cutoff(system, args.rho, sl).as_dict())
        doc["certificates"] = certs
    if args.simulate:
        def sim():
            traj = integrate(system, 0.1, args.t_end)
            return {"decay": asdict(measure_decay(traj)), "x_end": traj.x[-1]}
        _stage(doc, "simulation", sim)
    _emit(args, doc, _manifest(args, args.system))
    return 0


# -- reproduction of the worked examples ---------------------------------------------


def _reproduce_cushing(out: Path, args) -> list[str]:
    rows, doc = [], {}
    for b in (-0.3, -3.0):
        sys_ = systems.cushing(b)
        sl = _slice(sys_, args, -6.0)
        rows += [(b, z.real, z.imag) for z in sl.roots]
        entry = {"roots": list(sl.roots), "beta": sl.beta}
        entry["xi"] = [xi_residue(z, sys_.kernel)[0, 0] for z in sl.roots]
        if b == -0.3:
            s1 = sl.restrict(-1.0)
            entry["ssm"] = _ssm_doc(sys_, s1)
            entry["a_max_simplified"] = (s1.alpha - s1.beta) / (64 * math.log(2))
            entry["certificate_a1"] = certify_gap(sys_, s1)
            entry["certificate_a0.05"] = certify_gap(systems.cushing(b, a=0.05), s1)
        doc[f"b={b}"] = entry
    write_csv(out / "fig1_roots.csv", ["b", "re", "im"], rows)
    (out / "cushing.json").write_text(dumps(doc))
    return ["fig1_roots.csv", "cushing.json"]


def _tau_threshold(args, lo=0.13, hi=0.14, iters=30) -> float:
    def minimum(h):
        s = systems.sine_delay(h)
        sl = _slice(s, args, -3.0, depth=10.0 / h + 10.0)
        return tau_curves(s, sl, "R", npts=8).minimum - 1.0

    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if minimum(mid) < 0 else (lo, mid)
    return 0.5 * (lo + hi)


def _reproduce_small_delay(out: Path, args) -> list[str]:
    files = []
    rows = []
    for h in np.linspace(0.02, 0.36, 18):
        s = systems.sine_delay(float(h))
        sl = _slice(s, args, -3.0, depth=10.0 / h + 10.0)
        rows.append((h, sl.roots[0].real, sl.beta))
    write_csv(out / "fig2_real_roots.csv", ["h", "lambda1", "lambda2"], rows)
    files.append("fig2_real_roots.csv")

    curves = {}
    for h in (0.065, 0.13):
        s = systems.sine_delay(h)
        curves[h] = tau_curves(s, _slice(s, args, -3.0, depth=10.0 / h + 10.0), "R", npts=400)
    write_csv(
        out / "fig3_tau_R.csv",
        ["s_0.065", "tau_0.065", "s_0.13", "tau_0.13"],
        np.column_stack([curves[0.065].table(), curves[0.13].table()]),
    )
    files.append("fig3_tau_R.csv")

    betas = -np.geomspace(192.0, 2.0e4, 50)
    write_csv(out / "fig4_hmax.csv", ["beta2", "h_max"], np.column_stack([betas, f_form_hmax(betas, 3.0)]))
    files.append("fig4_hmax.csv")

    s = systems.sine_delay(0.002)
    sl = _slice(s, args, -3.0, depth=6000.0)
    tR = tau_curves(s, sl, "R", npts=400)
    tF = tau_curves(s, None, "F", beta2=-500.0, npts=400)
    write_csv(out / "fig4_tau_overlay.csv", ["s_R", "tau_R", "s_F", "tau_F"], np.column_stack([tR.table(), tF.table()]))
    files.append("fig4_tau_overlay.csv")

    cor = certify_small_delay(systems.sine_delay(0.065))
    doc = {
        "small_delay_h_bound": cor.inequalities[0].rhs,
        "small_delay_Q": cor.details["Q"],
        "small_delay_r": cor.details["r"],
        "tau_R_threshold": _tau_threshold(args),
        "tau_R_roots": {str(h): c.roots for h, c in curves.items()},
        "f_form_beta2_boundary": -192.0,
        "f_form_h0.002": certify_f_form(s, -500.0),
        "overlay_roots": {"R": tR.roots, "F": tF.roots},
    }
    (out / "small_delay.json").write_text(dumps(doc))
    return files + ["small_delay.json"]


def _reproduce_hopf(out: Path, args) -> list[str]:
    rows, table = [], []
    for h in math.pi / 2 + np.linspace(0.01, 0.1, 10):
        s = systems.cubic_delay(float(h))
        sl = _slice(s, args, -0.5)
        nf = normal_form(expansion_coeffs(s, sl))
        cyc = predict_limit_cycle(nf)
        cut = certify_with_cutoff(s, 0.005, sl)
        k30, k21 = nf.K30(np.array([0.0]))[0, 0], nf.K21(np.array([0.0]))[0, 0]
        rows.append((h, nf.lam1.real, nf.lam1.imag, nf.beta21.real, nf.beta21.imag,
                     k30.real, k30.imag, k21.real, k21.imag, cyc.r_hat, cyc.omega, cut.details["rho_crit"]))
        table.append({"h": h, "beta21": nf.beta21, "r_hat": cyc.r_hat, "rho_crit": cut.details["rho_crit"]})
    write_csv(
        out / "hopf_table.csv",
        ["h", "re_lambda1", "im_lambda1", "re_beta21", "im_beta21", "re_K30", "im_K30",
         "re_K21", "im_K21", "r_hat", "omega", "rho_crit"],
        rows,
    )
    h = math.pi / 2 + 0.05
    s = systems.cubic_delay(h)
    nf = normal_form(expansion_coeffs(s, _slice(s, args, -0.5)))
    cyc = predict_limit_cycle(nf)
    traj = integrate(s, lambda th: manifold_eval(nf, (cyc.r_hat, 0.0), theta=th), 500.0)
    fit = extract_limit_cycle(traj)
    doc = {
        "table": table,
        "simulation": {
            "h": h, "amplitude": fit.amplitude, "predicted_amplitude": 2 * cyc.r_hat,
            "period": fit.period, "predicted_period": cyc.period,
        },
    }
    (out / "hopf.json").write_text(dumps(doc))
    return ["hopf_table.csv", "hopf.json"]


_EXAMPLES = {"cushing": _reproduce_cushing, "small-delay": _reproduce_small_delay, "hopf": _reproduce_hopf}


def cmd_reproduce(args) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    names = list(_EXAMPLES) if args.example == "all" else [args.example]
    man = _manifest(args, None)
    for name in names:
        man.outputs += _EXAMPLES[name](out, args)
    (out / "manifest.json").write_text(dumps(asdict(man)))
    sys.stdout.write(dumps({"outputs": man.outputs}))
    return 0


# -- parser ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="delayssm", description="Spectra, SSMs and inertial manifolds of delay equations.")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("--tol-root", type=float, default=1e-12, help="root tolerance")
    p.add_argument("--seed", type=int, default=0, help="seed for randomized checks")
    p.add_argument("--threads", type=int, default=1, help="worker threads for root isolation")
    sub = p.add_subparsers(dest="command", required=True)

    def with_system(sp):
        sp.add_argument("--system", required=True, help="JSON or TOML system file")
        sp.add_argument("--out", help="write the JSON result here instead of stdout")

    sp = sub.add_parser("spectrum", help="characteristic roots right of a line")
    with_system(sp)
    sp.add_argument("--gamma", type=float, required=True)
    sp.add_argument("--depth", type=float)
    sp.add_argument("--csv")
    sp.set_defaults(func=cmd_spectrum)

    sp = sub.add_parser("xi", help="residue matrix at a root")
    with_system(sp)
    sp.add_argument("--lambda", dest="lam", help="root, e.g. -0.36 or -0.39+2.66i")
    sp.add_argument("--gamma", type=float, default=-1.0, help="use the rightmost root right of gamma")
    sp.set_defaults(func=cmd_xi)

    sp = sub.add_parser("ssm", help="third-order SSM and normal form")
    with_system(sp)
    sp.add_argument("--gamma", type=float, required=True)
    sp.set_defaults(func=cmd_ssm)

    sp = sub.add_parser("im-check", help="inertial-manifold certificate")
    with_system(sp)
    sp.add_argument("--route", choices=["gap", "small-delay", "f-form", "cutoff"], required=True)
    sp.add_argument("--gamma", type=float, default=-1.0)
    sp.add_argument("--depth", type=float)
    sp.add_argument("--mode", choices=["series", "conservative"], default="series")
    sp.add_argument("--beta2", type=float, default=-500.0)
    sp.add_argument("--lip-f", type=float)
    sp.add_argument("--rho", type=float, default=0.005)
    sp.set_defaults(func=cmd_im_check)

    sp = sub.add_parser("simulate", help="integrate from an initial history")
    with_system(sp)
    sp.add_argument("--history", default="const:0.1", help="const:<v>, eigen:<lambda>[:amp] or file:<csv>")
    sp.add_argument("--t-end", type=float, default=20.0)
    sp.add_argument("--dt", type=float)
    sp.add_argument("--csv")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("reproduce", help="regenerate the worked examples")
    sp.add_argument("example", choices=["cushing", "small-delay", "hopf", "all"])
    sp.add_argument("--out-dir", default="artifacts")
    sp.set_defaults(func=cmd_reproduce)

    sp = sub.add_parser("pipeline", help="spectrum, projections, SSM, certificates")
    with_system(sp)
    sp.add_argument("--gamma", type=float, required=True)
    sp.add_argument("--depth", type=float)
    sp.add_argument("--rho", type=float, default=0.005)
    sp.add_argument("--simulate", action="store_true")
    sp.add_argument("--t-end", type=float, default=20.0)
    sp.set_defaults(func=cmd_pipeline)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SystemFileError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except DelaySSMError as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
