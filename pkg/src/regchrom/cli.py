"""Command-line entry point.

One executable, ten subcommands, machine-readable output:

    regchrom predict --d 10
    regchrom exact --n 4 --d 3 --k 2 --what ey
    regchrom verify --lemmas evec2,evec3,gaussdet --k-range 3..8

Configuration precedence is flags > config file > defaults; the config
file is a flat key=value text document whose keys are the long option
names of the chosen subcommand (plus the global seed/workers/out/format
keys). Unknown keys are rejected. Every option set is validated against
the OPTION table below before dispatch.

Exit codes: 0 success, 2 validation error, 3 guard refusal. Errors are
emitted as JSON with a machine-readable code. Output files are written
atomically (temp file in the target directory, then rename). CSV output
is RFC-4180 with a mandatory header row; JSON mirrors the same data.
With a fixed config the bytes written are identical run to run.
"""

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from fractions import Fraction

import numpy as np

from . import __version__, asymptotics, coloring, genfunc, montecarlo, spectral, variational
from .errors import GuardError, InputError, RegchromError
from .pairing import (
    count_cycles,
    is_simple,
    read_multigraph,
    sample_pairing,
    to_multigraph,
    write_multigraph,
)

SEED_ENV_VAR = "REGCHROM_SEED"


def _parse_int_list(text):
    return [int(x) for x in str(text).replace(" ", "").split(",") if x]


def _parse_range(text):
    """"3..12" -> [3..12]; a single integer is a one-element range."""
    text = str(text)
    if ".." in text:
        lo, hi = text.split("..")
        return list(range(int(lo), int(hi) + 1))
    return [int(text)]


def _parse_cycles(text):
    """"1:1,2:1" -> ((1,1),(2,1)); "+" groups joint factors: "2:1+3:1"."""
    specs = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        group = []
        for factor in part.split("+"):
            m, _, p = factor.partition(":")
            group.append((int(m), int(p or 1)))
        specs.append(tuple(group))
    return tuple(specs)


# name -> (type, default, help); None default means required unless noted
GLOBAL_OPTIONS = {
    "seed": (int, None, f"RNG seed (default: ${SEED_ENV_VAR} or 0)"),
    "workers": (int, 1, "worker processes for sampling subcommands"),
    "out": (str, None, "output path (atomic write); default stdout"),
    "format": (str, "json", "output format: json or csv"),
}

OPTIONS = {
    "predict": {
        "d": (int, None, "degree (alternative to --d-range)"),
        "d-range": (_parse_range, None, 'degree range "lo..hi"'),
    },
    "theory": {
        "n": (int, None, "number of vertices"),
        "d": (int, None, "degree"),
        "k": (int, None, "number of colours"),
    },
    "sample": {
        "n": (int, None, "number of vertices"),
        "d": (int, None, "degree"),
        "count": (int, 1, "how many multigraphs to sample"),
        "simple-only": (int, 0, "1 = rejection-sample simple graphs"),
        "max-cycle": (int, 4, "cycle counts X_1..X_m reported per sample"),
    },
    "color": {
        "in": (str, None, "multigraph text file to read"),
        "k": (int, None, "optional: also count balanced k-colourings"),
    },
    "exact": {
        "n": (int, None, "number of vertices"),
        "d": (int, None, "degree"),
        "k": (int, None, "number of colours"),
        "what": (str, None, "ey, ey2, or coeff"),
    },
    "moments": {
        "n": (int, None, "number of vertices"),
        "d": (int, None, "degree"),
        "k": (int, None, "number of colours"),
        "samples": (int, None, "number of Monte Carlo samples"),
        "cycles": (_parse_cycles, ((2, 1),), 'joint cycle spec, e.g. "1:1,2:1"'),
        "enumerate": (int, 0, "1 = full enumeration instead of sampling"),
    },
    "chifreq": {
        "n": (int, None, "number of vertices"),
        "d": (int, None, "degree"),
        "samples": (int, None, "number of sampled pairings"),
    },
    "converge": {
        "d": (int, None, "degree"),
        "k": (int, None, "number of colours"),
        "n-list": (_parse_int_list, None, 'comma list of n values, e.g. "6,12,18,24"'),
        "what": (str, "ey", "ey or coeff"),
    },
    "verify": {
        "lemmas": (str, "evec2,evec3,gaussdet", "comma list of lemma checks"),
        "k-range": (_parse_range, [3, 4, 5], 'k values "lo..hi"'),
        "trials": (int, 100, "random zero-sum matrices per k for evec3"),
    },
    "optimize-phi": {
        "k": (int, None, "number of colours"),
        "d": (int, None, "degree"),
        "restarts": (int, 50, "multistart count"),
        "tol": (float, 1e-12, "ascent tolerance"),
    },
}

REQUIRED = {
    "predict": [],  # checked specially: --d or --d-range
    "theory": ["n", "d", "k"],
    "sample": ["n", "d"],
    "color": ["in"],
    "exact": ["n", "d", "k", "what"],
    "moments": ["n", "d", "k", "samples"],
    "chifreq": ["n", "d", "samples"],
    "converge": ["d", "k", "n-list"],
    "verify": [],
    "optimize-phi": ["k", "d"],
}


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="regchrom",
        description="Pairing-model moments, exact colouring oracles, and the"
        " chromatic-number predictor for random regular graphs.",
    )
    parser.add_argument("--version", action="version", version=f"regchrom {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name, opts in OPTIONS.items():
        p = sub.add_parser(name, help=f"{name} subcommand")
        for opt, (_, _, help_text) in {**opts, **GLOBAL_OPTIONS}.items():
            p.add_argument(f"--{opt}", dest=opt.replace("-", "_"), default=None, help=help_text)
        p.add_argument("--config", default=None, help="flat key=value config file")
    return parser


def _read_config(path):
    values = {}
    with open(path) as fh:
        for line_no, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise InputError(f"config line {line_no}: expected key=value, got {line!r}")
            key, _, value = line.partition("=")
            values[key.strip()] = value.strip()
    return values


class RunConfig:
    """Validated, fully-resolved parameters for one dispatch."""

    def __init__(self, subcommand, params, seed, workers, out, fmt):
        self.subcommand = subcommand
        self.params = params
        self.seed = seed
        self.workers = workers
        self.out = out
        self.format = fmt


def _resolve_config(args):
    sub = args.subcommand
    spec = OPTIONS[sub]
    file_values = _read_config(args.config) if args.config else {}
    known = set(spec) | set(GLOBAL_OPTIONS)
    unknown = set(file_values) - known
    if unknown:
        raise InputError(f"unknown config keys for {sub}: {sorted(unknown)}")

    def resolve(opt, parse, default):
        cli_value = getattr(args, opt.replace("-", "_"))
        if cli_value is not None:
            raw = cli_value
        elif opt in file_values:
            raw = file_values[opt]
        else:
            return default
        try:
            return parse(raw)
        except (TypeError, ValueError) as exc:
            raise InputError(f"bad value for --{opt}: {raw!r} ({exc})")

    params = {}
    for opt, (parse, default, _) in spec.items():
        params[opt] = resolve(opt, parse, default)
    missing = [opt for opt in REQUIRED[sub] if params.get(opt) is None]
    if missing:
        raise InputError(f"{sub}: missing required options {['--' + m for m in missing]}")
    if sub == "predict" and params["d"] is None and params["d-range"] is None:
        raise InputError("predict: need --d or --d-range")

    seed = resolve("seed", int, None)
    if seed is None:
        seed = int(os.environ.get(SEED_ENV_VAR, "0"))
    workers = resolve("workers", int, 1)
    out = resolve("out", str, None)
    fmt = resolve("format", str, "json")
    if fmt not in ("json", "csv", "text"):
        raise InputError(f"unknown format {fmt!r}: expected json or csv")
    return RunConfig(sub, params, seed, workers, out, fmt)


def _jsonify(obj):
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, float) and (math.isnan(obj) or math.isinf(obj)):
        return str(obj)
    if isinstance(obj, dict):
        return {str(k): _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if hasattr(obj, "as_dict"):
        return _jsonify(obj.as_dict())
    return obj


def _render(result, fmt):
    if fmt == "text":
        if "text" not in result:
            raise InputError("this subcommand has no text format; use json or csv")
        return result["text"]
    if fmt == "csv":
        rows = result.get("rows")
        if rows is None:
            raise InputError("this subcommand has no CSV table; use --format json")
        buf = io.StringIO()
        header = list(rows[0]) if rows else []
        writer = csv.DictWriter(buf, fieldnames=header, lineterminator="\r\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _jsonify(v) for k, v in row.items()})
        return buf.getvalue()
    return json.dumps(_jsonify(result.get("json", result)), indent=2) + "\n"


def _emit(payload, out):
    if out is None:
        sys.stdout.write(payload)
        return
    directory = os.path.dirname(os.path.abspath(out))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".regchrom-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(payload)
        os.replace(tmp, out)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _cmd_predict(cfg):
    ds = cfg.params["d-range"] if cfg.params["d-range"] is not None else [cfg.params["d"]]
    rows = []
    for d in ds:
        pred = asymptotics.predict_chromatic(d)
        mr1 = asymptotics.molloy_reed_excludes(d, pred.k - 1)
        mr2 = asymptotics.molloy_reed_excludes(d, pred.k - 2)
        rows.append(
            {
                "d": d,
                "k": pred.k,
                "verdict": "/".join(map(str, pred.verdict)),
                "second_condition": pred.second_condition,
                "mr_excludes_k_minus_1": mr1.excludes,
                "mr_excludes_k_minus_2": mr2.excludes,
            }
        )
    if cfg.params["d-range"] is None:
        single = asymptotics.predict_chromatic(ds[0]).as_dict()
        single["mr_excludes_k_minus_1"] = rows[0]["mr_excludes_k_minus_1"]
        single["mr_excludes_k_minus_2"] = rows[0]["mr_excludes_k_minus_2"]
        return {"json": single, "rows": rows}
    return {"json": {"predictions": rows}, "rows": rows}


def _cmd_theory(cfg):
    n, d, k = cfg.params["n"], cfg.params["d"], cfg.params["k"]
    ey = asymptotics.ey_asym(n, d, k)
    within = asymptotics.within_theorem_range(d, k)
    result = {
        "n": n,
        "d": d,
        "k": k,
        "d_within_theorem": within,
        "ey_asym": {"log": ey.log, "value": ey.value},
        "cycle_corrections": [
            {
                "m": m,
                "lambda": str(asymptotics.cycle_correction(d, k, m).lam),
                "delta": str(asymptotics.cycle_correction(d, k, m).delta),
                "multiplier": float(asymptotics.cycle_correction(d, k, m).multiplier),
            }
            for m in (1, 2, 3)
        ],
        "coeff_c0": {"log": asymptotics.coeff_asym(n, d, k, 0).log},
        "gamma": {"log": asymptotics.gamma_const(k).log},
        "phi_center": variational.phi_center(d, k),
    }
    if within:
        ey2 = asymptotics.ey2_asym(n, d, k)
        result.update(
            {
                "ey2_asym": {"log": ey2.log, "value": ey2.value},
                "second_moment_ratio": asymptotics.second_moment_ratio(d, k),
                "sum_lambda_delta_sq": asymptotics.sum_lambda_delta_sq(d, k),
                "det_H": {"log": asymptotics.det_H(d, k).log},
                "s1_closed_form": {"log": asymptotics.s1_closed_form(n, d, k).log},
            }
        )
    rows = [
        {
            "n": n,
            "d": d,
            "k": k,
            "d_within_theorem": within,
            "ey_log": ey.log,
            "ey2_log": result.get("ey2_asym", {}).get("log"),
            "second_moment_ratio": result.get("second_moment_ratio"),
        }
    ]
    return {"json": result, "rows": rows}


def _cmd_sample(cfg):
    n, d = cfg.params["n"], cfg.params["d"]
    count = cfg.params["count"]
    simple_only = bool(cfg.params["simple-only"])
    m_max = cfg.params["max-cycle"]
    graphs = []
    stream = 0
    produced = 0
    rejected = 0
    while produced < count:
        if stream > 1000 * count + 10_000:
            raise GuardError("rejection sampling budget exhausted (graphs almost never simple)")
        g = to_multigraph(sample_pairing(n, d, cfg.seed, stream=stream))
        stream += 1
        if simple_only and not is_simple(g):
            rejected += 1
            continue
        graphs.append(g)
        produced += 1
    records = [
        {
            "n": g.n,
            "d": d,
            "edges": [list(e) for e in g.edges],
            "simple": is_simple(g),
            "cycles": count_cycles(g, m_max).as_dict(),
        }
        for g in graphs
    ]
    text_lines = []
    for g in graphs:
        text_lines.append(f"{g.n} {d}")
        text_lines.extend(f"{u} {v}" for u, v in g.edges)
    return {
        "json": {"seed": cfg.seed, "rejected": rejected, "graphs": records},
        "rows": [
            {"index": i, "n": r["n"], "d": r["d"], "simple": r["simple"],
             "edges": " ".join(f"{u}-{v}" for u, v in r["edges"])}
            for i, r in enumerate(records)
        ],
        "text": "\n".join(text_lines) + "\n",
    }


def _cmd_color(cfg):
    g = read_multigraph(cfg.params["in"])
    result = {"n": g.n, "edges": len(g.edges)}
    result["chromatic_number"] = coloring.chromatic_number(g)
    k = cfg.params["k"]
    if k is not None:
        result["k"] = k
        result["balanced_colourings"] = coloring.count_balanced_colourings(g, k)
    return {"json": result, "rows": [result]}


def _cmd_exact(cfg):
    n, d, k, what = (cfg.params[x] for x in ("n", "d", "k", "what"))
    if what == "ey":
        value = genfunc.exact_expected_Y(n, d, k)
    elif what == "ey2":
        value = genfunc.exact_second_moment(n, d, k)
    elif what == "coeff":
        value = genfunc.coeff_single(k, (n * d // k,) * k)
    else:
        raise InputError(f"unknown --what {what!r}: expected ey, ey2, or coeff")
    result = {
        "n": n,
        "d": d,
        "k": k,
        "what": what,
        "rational": str(value),
        "decimal": float(value),
    }
    return {"json": result, "rows": [result]}


def _cmd_moments(cfg):
    n, d, k = cfg.params["n"], cfg.params["d"], cfg.params["k"]
    if cfg.params["enumerate"]:
        report = montecarlo.enumerate_moments(n, d, k, cycle_spec=cfg.params["cycles"])
    else:
        report = montecarlo.estimate_moments(
            n,
            d,
            k,
            cfg.params["samples"],
            cycle_spec=cfg.params["cycles"],
            seed=cfg.seed,
            workers=cfg.workers,
        )
    rows = [
        {
            "quantity": "E[Y]",
            "estimate": report.ey["estimate"],
            "se": report.ey["se"],
            "exact": report.ey["exact_oracle"],
            "theory": report.ey["theory_asym"],
        },
        {
            "quantity": "E[Y^2]/E[Y]^2",
            "estimate": report.ratio_y2["estimate"],
            "se": report.ratio_y2["se"],
            "exact": report.ratio_y2["exact_oracle"],
            "theory": report.ratio_y2["theory_asym"],
        },
    ]
    for entry in report.joint:
        label = "*".join(f"[X{m}]_{p}" for m, p in entry["spec"])
        rows.append(
            {
                "quantity": f"E[Y*{label}]/E[Y]",
                "estimate": entry["estimate"],
                "se": entry["se"],
                "exact": None,
                "theory": entry["theory_asym"],
            }
        )
    return {"json": report.as_dict(), "rows": rows}


def _cmd_chifreq(cfg):
    table = montecarlo.chi_frequency(
        cfg.params["n"], cfg.params["d"], cfg.params["samples"],
        seed=cfg.seed, workers=cfg.workers,
    )
    rows = [
        {"chi": chi, "count": count}
        for chi, count in sorted(table.counts.items())
    ]
    rows.append({"chi": "rejected", "count": table.rejections})
    return {"json": table.as_dict(), "rows": rows}


def _cmd_converge(cfg):
    rows = montecarlo.convergence_study(
        cfg.params["d"], cfg.params["k"], cfg.params["n-list"], what=cfg.params["what"]
    )
    return {
        "json": {
            "d": cfg.params["d"],
            "k": cfg.params["k"],
            "what": cfg.params["what"],
            "rows": rows,
        },
        "rows": rows,
    }


def _cmd_verify(cfg):
    lemmas = [x.strip() for x in cfg.params["lemmas"].split(",") if x.strip()]
    unknown = set(lemmas) - {"evec2", "evec3", "gaussdet"}
    if unknown:
        raise InputError(f"unknown lemma checks: {sorted(unknown)}")
    ks = cfg.params["k-range"]
    trials = cfg.params["trials"]
    rng = np.random.default_rng(cfg.seed)
    rows = []
    all_passed = True
    for k in ks:
        if "evec2" in lemmas and k >= 3:
            rep = spectral.verify_evec2(k)
            rows.append(
                {
                    "lemma": "evec2",
                    "k": k,
                    "passed": rep["passed"],
                    "detail": max(rep["shifted"].max_residual, rep["plain"].max_residual),
                }
            )
            all_passed &= rep["passed"]
        if "evec3" in lemmas:
            worst = 0.0
            for _ in range(trials):
                A = rng.standard_normal((k, k))
                A -= A.mean(axis=1, keepdims=True)
                A -= A.mean(axis=0, keepdims=True)
                worst = max(worst, spectral.evec3_identities(A).max_residual())
            passed = worst <= spectral.RESIDUAL_TOL
            rows.append({"lemma": "evec3", "k": k, "passed": passed, "detail": worst})
            all_passed &= passed
        if "gaussdet" in lemmas and k >= 3:
            for r in (1, 2):
                ok = spectral.gaussian_det_check(k, r)
                rows.append({"lemma": "gaussdet", "k": k, "passed": ok, "detail": f"r={r}"})
                all_passed &= ok
    return {"json": {"passed": all_passed, "checks": rows}, "rows": rows}


def _cmd_optimize_phi(cfg):
    res = variational.maximize_phi(
        cfg.params["d"],
        cfg.params["k"],
        restarts=cfg.params["restarts"],
        seed=cfg.seed,
        tol=cfg.params["tol"],
    )
    k = cfg.params["k"]
    result = {
        "k": k,
        "d": cfg.params["d"],
        "M_star": res.M.tolist(),
        "phi_star": res.phi,
        "gap_to_center": variational.phi_center(cfg.params["d"], k) - res.phi,
        "distance_to_center": res.distance_to_center,
        "converged": res.converged,
        "within_uniqueness_range": res.within_uniqueness_range,
    }
    rows = [
        {
            "k": k,
            "d": cfg.params["d"],
            "phi_star": res.phi,
            "distance_to_center": res.distance_to_center,
            "converged": res.converged,
        }
    ]
    return {"json": result, "rows": rows}


COMMANDS = {
    "predict": _cmd_predict,
    "theory": _cmd_theory,
    "sample": _cmd_sample,
    "color": _cmd_color,
    "exact": _cmd_exact,
    "moments": _cmd_moments,
    "chifreq": _cmd_chifreq,
    "converge": _cmd_converge,
    "verify": _cmd_verify,
    "optimize-phi": _cmd_optimize_phi,
}


def dispatch(cfg):
    """Run a resolved config; returns the process exit status."""
    result = COMMANDS[cfg.subcommand](cfg)
    _emit(_render(result, cfg.format), cfg.out)
    return 0


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _resolve_config(args)
        return dispatch(cfg)
    except GuardError as exc:
        _emit_error(exc)
        return 3
    except RegchromError as exc:
        _emit_error(exc)
        return 2
    except FileNotFoundError as exc:
        _emit_error(exc, code="file-not-found")
        return 2


def _emit_error(exc, code=None):
    payload = {"error": {"code": code or getattr(exc, "code", "error"), "message": str(exc)}}
    sys.stderr.write(json.dumps(payload) + "\n")


if __name__ == "__main__":
    sys.exit(main())
