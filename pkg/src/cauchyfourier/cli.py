"""Command-line experiment runner.

``cauchyfourier run config.json --out DIR`` writes ``results.csv``,
``summary.json`` and ``manifest.json``; ``cauchyfourier report DIR... --out
merged.csv`` merges result tables into long format.

Exit codes: 0 on success, 2 for unusable input (bad JSON, schema
violations, missing files), 3 when a numerical precondition fails.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import re
import sys
import tempfile
from pathlib import Path

THREADS_ENV = "CAUCHYFOURIER_THREADS"
_THREAD_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS")

KINDS = (
    "conjugate",
    "orlicz-norm",
    "majorant",
    "sa-run",
    "clark-check",
    "riesz-diag",
    "bloch-check",
    "cyclic-run",
    "model-check",
)


class SchemaError(Exception):
    """Config does not fit the schema; carries a ``file:line:`` prefix."""


# ----------------------------------------------------------------------------
# schema: per kind, key -> (type check, default)

_num = (int, float)

SCHEMAS = {
    "conjugate": {
        "young": (dict, {"family": "power", "params": [2.0]}),
        "x_max": (_num, 2.0),
        "n_points": (int, 2000),
        "brute_points": (int, 100_000),
    },
    "orlicz-norm": {
        "young": (dict, {"family": "power", "params": [2.0]}),
        "vectors": (list, None),
        "count": (int, 10),
        "length": (int, 16),
    },
    "majorant": {
        "psi": (dict, {"family": "power", "params": [4.0]}),
        "n_blocks": (int, 50),
        "dini_n": (int, 512),
    },
    "sa-run": {
        "weight": (dict, {"rule": "power", "params": [0.25, 2.0]}),
        "delta": (_num, 0.1),
        "gamma_seq": (list, [2.0**-n for n in range(1, 6)]),
        "delta_seq": (list, [0.1 * 2.0**-n for n in range(1, 6)]),
        "epsilon_seq": (list, None),
        "M": (int, None),
        "M_cap": (int, 2**16),
        "degree_cap": (int, 2**14),
        "k_points": (int, 256),
    },
    "clark-check": {
        "atoms": (list, [[0.1, 0.3], [0.45, 0.5], [0.8, 0.2]]),
        "alpha": (_num, 0.0),
        "degree": (int, 1024),
        "n_grid": (int, 20),
        "r_max": (_num, 0.9),
    },
    "riesz-diag": {
        "frequencies": (list, [3**k for k in range(1, 9)]),
        "amplitudes": (list, [0.5] * 8),
        "M": (int, 2**15),
    },
    "bloch-check": {
        "w_exponent": (_num, 0.5),
        "count": (int, 100),
        "degree": (int, 256),
    },
    "cyclic-run": {
        "w_exponent": (_num, 0.0),
        "c1": (_num, 1.0),
        "depth": (int, 6),
        "degree": (int, 4096),
    },
    "model-check": {
        "zeros": (list, [0.0, 0.5]),
        "p": (_num, 2.0),
        "trunc_N": (int, 16),
        "restarts": (int, 20),
    },
}
COMMON = {"kind": (str, None), "name": (str, None), "seed": (int, 0)}


def _line_of(text, key):
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    return text.count("\n", 0, m.start()) + 1 if m else 1


def load_config(path):
    """Parse and validate a config file, filling defaults."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise SchemaError(f"{path}: cannot read config: {exc.strerror}") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from None
    if not isinstance(raw, dict) or not raw:
        raise SchemaError(f"{path}:1: config must be a nonempty JSON object")
    kind = raw.get("kind")
    if kind not in KINDS:
        raise SchemaError(
            f"{path}:{_line_of(text, 'kind')}: 'kind' must be one of {', '.join(KINDS)} (got {kind!r})"
        )
    schema = {**COMMON, **SCHEMAS[kind]}
    cfg = {}
    for key, value in raw.items():
        if key not in schema:
            raise SchemaError(f"{path}:{_line_of(text, key)}: unknown key {key!r} for kind {kind!r}")
        typ = schema[key][0]
        ok = isinstance(value, typ) and not (isinstance(value, bool) and typ is not bool)
        if value is None and schema[key][1] is None:
            ok = True
        if not ok:
            want = typ.__name__ if isinstance(typ, type) else "number"
            raise SchemaError(f"{path}:{_line_of(text, key)}: {key!r} must be {want}")
        cfg[key] = value
    for key, (_, default) in schema.items():
        cfg.setdefault(key, default)
    return cfg


# ----------------------------------------------------------------------------
# experiments; each returns (rows, summary, grid)


def _young(d):
    from .orlicz import YoungFunction

    return YoungFunction.from_dict(d)


def _exp_conjugate(cfg):
    import numpy as np

    from .orlicz import conjugate, conjugate_values

    phi = _young(cfg["young"])
    x = np.linspace(0, cfg["x_max"], cfg["n_points"] + 1)[1:]
    num = conjugate_values(phi, x)
    y = np.linspace(0, phi.x_max, cfg["brute_points"])
    brute = np.array([np.max(xi * y - phi.values(y)) for xi in x])
    rows, closed = [], None
    if phi.family == "power" and phi.params[0] > 1:
        closed = conjugate(phi).values(x)
    for i, xi in enumerate(x):
        row = {"x": float(xi), "conjugate": float(num[i]), "brute": float(brute[i])}
        if closed is not None:
            row["closed"] = float(closed[i])
        rows.append(row)
    summary = {"max_err_brute": float(np.max(np.abs(num - brute)))}
    if closed is not None:
        summary["max_err_closed"] = float(np.max(np.abs(num - closed)))
    return rows, summary, {"n_points": cfg["n_points"], "brute_points": cfg["brute_points"]}


def _exp_orlicz_norm(cfg):
    import numpy as np

    from .orlicz import normalized_orlicz_norm, orlicz_norm

    phi = _young(cfg["young"])
    if cfg["vectors"] is not None:
        vecs = [np.array([complex(*v) if isinstance(v, list) else v for v in vec], dtype=complex) for vec in cfg["vectors"]]
    else:
        rng = np.random.default_rng(cfg["seed"])
        vecs = [
            rng.standard_normal(cfg["length"]) + 1j * rng.standard_normal(cfg["length"]) for _ in range(cfg["count"])
        ]
    rows = [
        {"index": i, "length": len(v), "norm": orlicz_norm(v, phi), "normalized": normalized_orlicz_norm(v, phi)}
        for i, v in enumerate(vecs)
    ]
    return rows, {"count": len(rows), "max_norm": max(r["norm"] for r in rows)}, {}


def _exp_majorant(cfg):
    from .majorants import construct_majorant, psi_node_series, square_dini_partial

    psi = _young(cfg["psi"])
    w, trace = construct_majorant(psi, cfg["n_blocks"])
    dini = square_dini_partial(w, cfg["dini_n"])
    _, _, n0 = psi_node_series(w, psi)
    rows = [{"n": i + 1, "t_n": float(t), "N_n": int(N)} for i, (t, N) in enumerate(zip(trace.t, trace.N))]
    summary = {
        "K": w.K,
        "c_ratio": w.c_ratio,
        "gamma": w.gamma_candidate,
        "dini_final": float(dini.S[-1]),
        "dini_growth_exponent": dini.growth_exponent,
        "dini_diverges": bool(dini.diverges),
        "n0": int(n0),
    }
    return rows, summary, {"n_blocks": cfg["n_blocks"], "dini_n": cfg["dini_n"]}


def _exp_sa_run(cfg):
    from .errors import ResourceError
    from .saconstruct import M_START, SAConfig, WeightSequence, sa_pipeline

    w = WeightSequence.from_dict(cfg["weight"])
    sa = SAConfig(
        delta=cfg["delta"],
        gamma_seq=cfg["gamma_seq"],
        delta_seq=cfg["delta_seq"],
        epsilon_seq=cfg["epsilon_seq"],
        M=cfg["M"],
        degree_cap=cfg["degree_cap"],
        M_cap=cfg["M_cap"],
        k_points=cfg["k_points"],
        seed=cfg["seed"],
    )
    wit = sa_pipeline(w, sa)
    rows = [s.row() for s in wit.stages]
    measure = wit.stages[-1].K_measure if wit.stages else None
    summary = {
        "stages_completed": len(wit.stages),
        "stages_requested": sa.stages,
        "checks": wit.checks,
        "failure": wit.failure,
        "K_measure_exact": str(measure) if measure is not None else None,
    }
    try:
        arcs = [[str(a), str(b)] for a, b in wit.K.to_arcset().arcs]
    except ResourceError:
        arcs = None
    files = {"K.json": {"lifted": wit.K.to_dict(), "arcs": arcs}}
    grid = {"M_start": sa.M or M_START, "M_cap": sa.M_cap, "degree_cap": sa.degree_cap, "outer_tol": 1e-6, "k_points": sa.k_points}
    return rows, summary, grid, files


def _exp_clark(cfg):
    import numpy as np

    from .analytic import BoundaryMeasure
    from .innerouter import clark_b_from_mu, kernel_identity_residual

    atoms = cfg["atoms"]
    mu = BoundaryMeasure([a[0] for a in atoms], [a[1] for a in atoms])
    pair = clark_b_from_mu(mu, cfg["alpha"], cfg["degree"])
    rng = np.random.default_rng(cfg["seed"])
    n = cfg["n_grid"]

    def pts():
        return cfg["r_max"] * np.sqrt(rng.uniform(0, 1, n)) * np.exp(2j * np.pi * rng.uniform(0, 1, n))

    lam, z = pts(), pts()
    res = np.abs(kernel_identity_residual(pair, lam[:, None], z[None, :]))
    rows = [
        {"lam_re": lam[i].real, "lam_im": lam[i].imag, "z_re": z[j].real, "z_im": z[j].imag, "residual": float(res[i, j])}
        for i in range(n)
        for j in range(n)
    ]
    return rows, {"max_residual": float(res.max()), "mass": float(mu.mass)}, {"degree": cfg["degree"], "n_grid": n}


def _exp_riesz(cfg):
    from .innerouter import RieszProductSpec, riesz_product_measure

    spec = RieszProductSpec(cfg["frequencies"], cfg["amplitudes"], cfg["M"])
    _, diag = riesz_product_measure(spec)
    rows = [{"j": j, "k": k, "ratio1": r1, "ratio2": r2} for j, k, r1, r2 in diag.rows]
    return rows, diag.summary(), {"M": cfg["M"]}


def _exp_bloch(cfg):
    import numpy as np

    from .analytic import TaylorSeries
    from .bloch import DEFAULT_ANGLES, FOURIER_C, fourier_bound_report
    from .majorants import Majorant

    a = cfg["w_exponent"]
    w = Majorant.constant(1.0) if a == 0 else Majorant.power(a)
    rng = np.random.default_rng(cfg["seed"])
    rows = []
    for i in range(cfg["count"]):
        d = int(rng.integers(1, cfg["degree"] + 1))
        c = (rng.standard_normal(d + 1) + 1j * rng.standard_normal(d + 1)) / np.sqrt(np.arange(1, d + 2))
        rep = fourier_bound_report(TaylorSeries(c), w)
        rows.append({"index": i, "degree": d, "norm": rep.norm, "max_sum_ratio": rep.max_sum_ratio, "max_coeff_ratio": rep.max_coeff_ratio})
    worst = max(r["max_sum_ratio"] for r in rows)
    summary = {"max_sum_ratio": worst, "bound": FOURIER_C, "holds": worst <= FOURIER_C}
    return rows, summary, {"radii": "1-2^-j, j=0..12", "n_theta": DEFAULT_ANGLES}


def _exp_cyclic(cfg):
    from .innerouter import cyclic_inner_candidate
    from .majorants import Majorant

    a = cfg["w_exponent"]
    w = Majorant.constant(1.0) if a == 0 else Majorant.power(a)
    _, diag = cyclic_inner_candidate(w, cfg["c1"], cfg["depth"], cfg["degree"])
    rows = [{"j": j, "k": k, "ratio1": r1, "ratio2": r2} for j, k, r1, r2 in diag.riesz.rows]
    summary = {
        "c1": diag.c1,
        "c2": diag.c2,
        "lower_ratio": diag.lower_ratio,
        "upper_ratio": diag.upper_ratio,
        "dini_exponent": diag.dini_exponent,
        **{f"riesz_{k}": v for k, v in diag.riesz.summary().items()},
    }
    return rows, summary, {"M": diag.spec.M, "degree": cfg["degree"], "n_theta": diag.n_theta}


def _exp_model(cfg):
    from .modelspace import FiniteBlaschke, dualcyc_gap, model_space_basis
    from .orlicz import YoungFunction

    theta = FiniteBlaschke([complex(*z) if isinstance(z, list) else z for z in cfg["zeros"]])
    rep = dualcyc_gap(theta, YoungFunction.power(cfg["p"]), cfg["trunc_N"], cfg["restarts"], cfg["seed"])
    basis = model_space_basis(theta, cfg["trunc_N"])
    rows = [
        {"basis": i, "n": n, "re": float(c.real), "im": float(c.imag)}
        for i, e in enumerate(basis)
        for n, c in enumerate(e.coeffs)
    ]
    summary = rep.to_dict()
    if cfg["p"] == 2:
        # distance from 1 to theta H^2 in H^2 is sqrt(1 - |theta(0)|^2)
        summary["h2_oracle"] = math.sqrt(max(0.0, 1 - abs(complex(theta(0.0))) ** 2))
    summary["boundary_defect"] = theta.boundary_defect()
    return rows, summary, {"trunc_N": cfg["trunc_N"]}


EXPERIMENTS = {
    "conjugate": _exp_conjugate,
    "orlicz-norm": _exp_orlicz_norm,
    "majorant": _exp_majorant,
    "sa-run": _exp_sa_run,
    "clark-check": _exp_clark,
    "riesz-diag": _exp_riesz,
    "bloch-check": _exp_bloch,
    "cyclic-run": _exp_cyclic,
    "model-check": _exp_model,
}


# ----------------------------------------------------------------------------
# output


def _csv_text(rows):
    buf = io.StringIO()
    fields = []
    for r in rows:
        fields.extend(k for k in r if k not in fields)
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({k: _cell(v) for k, v in r.items()})
    return buf.getvalue()


def _cell(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, complex):
        return repr(v)
    return v


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if hasattr(obj, "item"):
        return _jsonable(obj.item())
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


def write_atomic(path: Path, text: str):
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def run_experiment(config_path, out_dir, grid_m=None, degree_cap=None) -> int:
    from . import __version__
    from .errors import ToolkitError

    try:
        cfg = load_config(config_path)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if grid_m is not None:
        for key in ("M",):
            if key in cfg:
                cfg[key] = grid_m
    if degree_cap is not None:
        if "degree_cap" in cfg:
            cfg["degree_cap"] = degree_cap
        elif "degree" in cfg:
            cfg["degree"] = min(cfg["degree"], degree_cap)
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"error: cannot create {out}: {exc.strerror}", file=sys.stderr)
        return 2
    try:
        rows, summary, grid, *extra = EXPERIMENTS[cfg["kind"]](cfg)
    except (ToolkitError, ValueError, ZeroDivisionError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    grid = {**grid, "grid_m_override": grid_m, "degree_cap_override": degree_cap}
    manifest = {
        "tool": "cauchyfourier",
        "version": __version__,
        "config": cfg,
        "grid": grid,
        "threads": os.environ.get(THREADS_ENV),
    }
    for fname, payload in (extra[0] if extra else {}).items():
        write_atomic(out / fname, json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")
    write_atomic(out / "results.csv", _csv_text(rows))
    write_atomic(out / "summary.json", json.dumps(_jsonable(summary), indent=2, sort_keys=True) + "\n")
    write_atomic(out / "manifest.json", json.dumps(_jsonable(manifest), indent=2, sort_keys=True) + "\n")
    return 0


def _grid_tag(manifest):
    cfg, grid = manifest.get("config", {}), manifest.get("grid", {})
    for src in (grid, cfg):
        for key in ("M", "M_start"):
            if src.get(key) is not None:
                return src[key]
    return ""


def emit_report(dirs, out_path) -> int:
    """Merge ``results.csv`` tables into ``experiment,stage,metric,value,grid_M`` rows."""
    merged = []
    for d in dirs:
        d = Path(d)
        try:
            manifest = json.loads((d / "manifest.json").read_text())
            with open(d / "results.csv", newline="") as fh:
                rows = list(csv.DictReader(fh))
        except (OSError, json.JSONDecodeError) as exc:
            print(f"error: {d}: {exc}", file=sys.stderr)
            return 2
        name = manifest.get("config", {}).get("name") or d.name
        tag = _grid_tag(manifest)
        for i, row in enumerate(rows, start=1):
            stage = row.get("n", i)
            for metric, value in row.items():
                if metric == "n":
                    continue
                merged.append(
                    {"experiment": name, "stage": stage, "metric": metric, "value": value, "grid_M": row.get("grid_M") or tag}
                )
    out = Path(out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    text = _csv_text(merged) if merged else "experiment,stage,metric,value,grid_M\n"
    write_atomic(out, text)
    return 0


def _apply_threads():
    n = os.environ.get(THREADS_ENV)
    if n:
        for var in _THREAD_VARS:
            os.environ.setdefault(var, n)


def main(argv=None) -> int:
    _apply_threads()
    parser = argparse.ArgumentParser(prog="cauchyfourier", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run one experiment from a JSON config")
    p_run.add_argument("config")
    p_run.add_argument("--out", required=True)
    p_run.add_argument("--grid-m", type=int, default=None)
    p_run.add_argument("--degree-cap", type=int, default=None)
    p_rep = sub.add_parser("report", help="merge result tables into long-format CSV")
    p_rep.add_argument("dirs", nargs="+")
    p_rep.add_argument("--out", required=True)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and 2
    if args.command == "run":
        return run_experiment(args.config, args.out, args.grid_m, args.degree_cap)
    return emit_report(args.dirs, args.out)


if __name__ == "__main__":
    sys.exit(main())
