"""Batch experiment runner with reproducible artifacts.

Experiments are described by JSON configs (schema below), run through the
library modules, and leave three kinds of artifacts in the output
directory: a manifest (config echo, versions, wall time), data CSVs, and a
summary JSON listing every assertion with its outcome.  The exit status is
0 when all assertions pass, 1 when one fails (the summary names it), and 2
for an invalid config.  With a fixed seed the CSV and summary bytes are
identical across runs; the manifest carries the wall time and is excluded
from the determinism contract and from index deduplication.

Config schema (JSON object):

    experiment   one of oracle|asym|morse|volume|regularize|spectral|
                 optimize|conjecture
    model        {"kind": "proj_product", "factors": [..]} |
                 {"kind": "flat_torus", "n": int, "lattice": [[..]]} |
                 {"kind": "hirzebruch_f1"}
    class        coefficient list, or {"matrix_re": [[..]], "matrix_im": [[..]]}
    q            cohomology degree where applicable
    kmax, resolution, cluster_levels, epsilons, ks, budget, restarts,
    samples, lambda, twist, amplitude, tolerance    experiment parameters
    seed, threads                                   reproducibility knobs
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np
import scipy

from . import (__version__, asymptotics, cohomology, forms, kernels, models,
               optimizer, potentials, regularization, spectral, volume)

EXPERIMENTS = ("oracle", "asym", "morse", "volume", "regularize", "spectral",
               "optimize", "conjecture")


class SchemaError(ValueError):
    pass


# ---------------------------------------------------------------------------
# config parsing


def _require(config, key, types):
    if key not in config:
        raise SchemaError(f"missing config field {key!r}")
    if not isinstance(config[key], types):
        raise SchemaError(f"config field {key!r} has the wrong type")
    return config[key]


def parse_model(config) -> models.ModelManifold:
    spec = _require(config, "model", dict)
    kind = spec.get("kind")
    try:
        if kind == models.KIND_PRODUCT:
            return models.proj_product(_require(spec, "factors", list))
        if kind == models.KIND_TORUS:
            return models.flat_torus(_require(spec, "n", int),
                                     spec.get("lattice"))
        if kind == models.KIND_F1:
            return models.hirzebruch_f1()
    except ValueError as exc:
        raise SchemaError(str(exc)) from exc
    raise SchemaError(f"unknown model kind {kind!r}")


def parse_class(config, model, key="class") -> models.NSClass:
    data = _require(config, key, (list, dict))
    try:
        if isinstance(data, dict):
            mat = np.asarray(data["matrix_re"], dtype=float) \
                + 1j * np.asarray(data.get("matrix_im",
                                           np.zeros_like(data["matrix_re"])),
                                  dtype=float)
            return models.ns_class(model, mat)
        return models.ns_class(model, data)
    except (ValueError, KeyError) as exc:
        raise SchemaError(f"invalid class data: {exc}") from exc


def parse_q(config, model) -> int:
    q = _require(config, "q", int)
    if not 0 <= q <= model.n:
        raise SchemaError(f"q={q} out of range for a model of dimension {model.n}")
    return q


def _positive(config, key, default, types=(int,)):
    value = config.get(key, default)
    if not isinstance(value, types) or value <= 0:
        raise SchemaError(f"config field {key!r} must be positive")
    return value


# ---------------------------------------------------------------------------
# deterministic serialization


def _round_floats(obj):
    if isinstance(obj, float):
        return float(f"{obj:.12g}")
    if isinstance(obj, dict):
        return {str(k): _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(f"{float(obj):.12g}")
    if isinstance(obj, np.ndarray):
        return _round_floats(obj.tolist())
    return obj


def write_json(path: Path, payload) -> None:
    with open(path, "w") as fh:
        json.dump(_round_floats(payload), fh, sort_keys=True, indent=1)
        fh.write("\n")


def write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([f"{x:.12g}" if isinstance(x, float) else x
                             for x in row])


def _assertion(name, passed, detail) -> dict:
    return {"name": name, "passed": bool(passed), "detail": detail}


# ---------------------------------------------------------------------------
# experiment runners (each returns (summary_dict, [csv files]))


def _run_oracle(config, model, out: Path, rng):
    cls = parse_class(config, model)
    kmax = _positive(config, "kmax", 20)
    table = cohomology.hq_table(cls, kmax)
    cohomology.table_to_csv(table, out / "table.csv")
    cohomology.table_to_json(table, out / "table.json")
    assertions = []
    try:
        poly = cohomology.hilbert_fit(table)
        lead = cohomology.hilbert_leading_intersection(table)
        exact = models.top_self_intersection(cls)
        assertions.append(_assertion(
            "alternating_sums_polynomial", True,
            {"degree": len(poly) - 1}))
        assertions.append(_assertion(
            "leading_coefficient_matches_intersection",
            lead == exact, {"fit": float(lead), "exact": float(exact)}))
    except RuntimeError as exc:
        assertions.append(_assertion("alternating_sums_polynomial", False,
                                     str(exc)))
    summary = {"experiment": "oracle", "kmax": kmax,
               "assertions": assertions}
    return summary, ["table.csv"]


def _run_asym(config, model, out: Path, rng):
    cls = parse_class(config, model)
    q = parse_q(config, model)
    kmax = _positive(config, "kmax", 100)
    est = asymptotics.asym_hq(cls, q, kmax)
    write_csv(out / "sequence.csv", ["k", "scaled_value"],
              list(zip(est.ks.tolist(), est.values.tolist())))
    assertions = [_assertion(
        "tail_diagnostic_small",
        est.diagnostic <= max(0.01 * abs(est.limit), 1e-6),
        {"diagnostic": est.diagnostic, "limit": est.limit})]
    summary = {"experiment": "asym", "q": q, "kmax": kmax,
               "limit": est.limit, "diagnostic": est.diagnostic,
               "assertions": assertions}
    if "lambda" in config:
        rep = asymptotics.homogeneity_check(cls, q, config["lambda"], kmax)
        summary["homogeneity"] = rep
        assertions.append(_assertion(
            "homogeneity_table_identity",
            rep["table_identity_exact"] in (True, None), rep))
    if "twist" in config:
        twist = parse_class(config, model, key="twist")
        rep = asymptotics.twist_bound_check(cls, twist, q, kmax)
        summary["twist"] = rep
        slope_ok = rep["zero_difference"] or (
            rep["slope"] is not None
            and rep["slope"] <= model.n - 1 + 0.1)
        assertions.append(_assertion(
            "twist_growth_order_bounded",
            slope_ok and np.isfinite(rep["C"]), rep))
    if "lipschitz_mesh" in config:
        mesh = _require(config, "lipschitz_mesh", list)
        rep = asymptotics.lipschitz_sweep(model, [tuple(c) for c in mesh],
                                          q, kmax)
        summary["lipschitz"] = {"C_prime": rep["C_prime"],
                                "pairs": rep["pairs"]}
        assertions.append(_assertion(
            "lipschitz_constant_bounded",
            np.isfinite(rep["C_prime"]) and rep["C_prime"] <= 10.0,
            {"C_prime": rep["C_prime"]}))
    return summary, ["sequence.csv"]


def _run_morse(config, model, out: Path, rng):
    cls = parse_class(config, model)
    q = parse_q(config, model)
    resolution = _positive(config, "resolution", 64)
    tolerance = config.get("tolerance", 0.005)
    grid = models.build_grid(model, resolution,
                             config.get("cluster_levels", 0))
    coeffs = config.get("potential_coeffs")
    if coeffs:
        field = forms.hessian_form(cls, coeffs, grid)
    else:
        field = forms.reference_form(cls, grid)
    result = forms.morse_integral(field, q)
    target = asymptotics.asym_hq(cls, q, config.get("kmax", 80)).limit
    forms.dump_field_csv(field, out / "field.csv")
    rel = abs(result.value - target) / max(abs(target), 1e-9)
    assertions = [
        _assertion("morse_matches_growth_limit", rel <= tolerance,
                   {"value": result.value, "target": target, "rel": rel}),
        _assertion("degenerate_weight_reported", True,
                   {"weight": result.degenerate_weight}),
    ]
    summary = {"experiment": "morse", "q": q, "resolution": resolution,
               "value": result.value, "target": target,
               "degenerate_weight": result.degenerate_weight,
               "assertions": assertions}
    return summary, ["field.csv"]


def _run_volume(config, model, out: Path, rng):
    cls = parse_class(config, model)
    kmax = _positive(config, "kmax", 60)
    vol = volume.volume_class(cls)
    assertions = []
    summary = {"experiment": "volume", "volume": float(vol)}
    if model.n == 2 and model.kind != models.KIND_TORUS:
        if models.pseudoeffective(cls):
            decomp = volume.zariski(cls)
            volume.decomposition_to_json(decomp, out / "zariski.json")
            env = volume.toric_envelope(cls)
            volume.envelope_to_json(env, out / "polytope.json")
            assertions.append(_assertion(
                "polytope_volume_matches_nef_square",
                env.volume == decomp.volume,
                {"polytope": float(env.volume), "nef_square": float(decomp.volume)}))
        if float(vol) > 0:
            est = asymptotics.asym_hq(cls, 0, kmax)
            summary["h0_limit"] = est.limit
            assertions.append(_assertion(
                "volume_matches_section_growth",
                abs(est.limit - float(vol)) <= 0.01 * float(vol),
                {"growth": est.limit, "volume": float(vol)}))
    summary["assertions"] = assertions
    return summary, []


def _run_regularize(config, model, out: Path, rng):
    cls = parse_class(config, model)
    epsilons = config.get("epsilons", [1e-1, 1e-2, 1e-3])
    resolution = _positive(config, "resolution", 20)
    family = regularization.build_family(cls, epsilons, resolution=resolution)
    rows = []
    for eps in family.epsilons:
        field = regularization.u_epsilon(family, eps)
        split = regularization.mass_split(family, eps, field)
        m0 = forms.morse_integral(field, 0)
        m1 = forms.morse_integral(field, 1)
        rows.append([eps, family.grid.size, split["tube"], split["complement"],
                     m0.value, m1.value, split["total"]])
    write_csv(out / "family.csv",
              ["eps", "grid_nodes", "tube_mass", "complement_mass",
               "morse_q0", "morse_q1", "total_mass"], rows)
    measure = regularization.limit_measure_check(family)
    mvv = regularization.morse_vs_volume(
        cls, epsilons=family.epsilons,
        resolutions=(resolution, resolution + max(resolution // 2, 4)))
    total_target = measure["class_square"]
    assertions = [
        _assertion("total_mass_constant",
                   measure["max_total_error"] <= 0.005 * max(abs(total_target), 1.0),
                   {"max_error": measure["max_total_error"],
                    "target": total_target}),
        _assertion("tube_complement_split",
                   measure["converged"],
                   {"tube": measure["tube_limit"],
                    "complement": measure["complement_limit"],
                    "targets": measure["targets"]}),
        _assertion("morse_descends_to_volume",
                   mvv["converged"] and mvv["lower_bound_ok"],
                   {"volume": mvv["volume"], "finest": mvv["finest_value"]}),
    ]
    summary = {"experiment": "regularize", "epsilons": list(family.epsilons),
               "measure": {k: v for k, v in measure.items() if k != "rows"},
               "morse_vs_volume": {k: v for k, v in mvv.items() if k != "rows"},
               "assertions": assertions}
    return summary, ["family.csv"]


def _run_spectral(config, model, out: Path, rng):
    if config.get("mode") == "dioph":
        return _run_spectral_dioph(config, model, out, rng)
    cls = parse_class(config, model)
    q = parse_q(config, model)
    ks = config.get("ks", [4, 8, 12, 16, 20])
    rep = spectral.counting_convergence(model, cls.matrix, q, ks,
                                        config.get("epsilons"))
    problems = []
    pairing = models.lattice_pairing(model, cls.matrix)
    for k in ks:
        mk = spectral._round_alternating(k * pairing)
        gap = rep["epsilons"][0]
        problems.append(spectral.laplacian_spectrum(
            model, mk, int(k), q, max(4.0 * k * gap, 1.0)))
    spectral.spectrum_to_csv(problems, out / "spectra.csv")
    tol = 0.05 * max(abs(rep["target"]), 1.0)
    assertions = [_assertion(
        "scaled_counts_converge", rep["final_error"] <= tol,
        {"final": rep["final_scaled_count"], "target": rep["target"]})]
    if config.get("validate", True) and spectral._is_square_lattice(model):
        try:
            val = spectral.validate_level_formula(
                models.flat_torus(1), [max(2, abs(int(config.get("degree", 3))))], q=0)
            assertions.append(_assertion("level_formula_validated", True, val))
        except RuntimeError as exc:
            assertions.append(_assertion("level_formula_validated", False,
                                         str(exc)))
    summary = {"experiment": "spectral", "q": q, "ks": list(map(int, ks)),
               "target": rep["target"],
               "final_scaled_count": rep["final_scaled_count"],
               "assertions": assertions}
    return summary, ["spectra.csv"]


def _run_spectral_dioph(config, model, out: Path, rng):
    """Random-target approximation sweep certifying the pigeonhole rate."""
    if model.kind != models.KIND_TORUS:
        raise SchemaError("dioph mode needs a torus model")
    kmax = _positive(config, "kmax", 150)
    samples = _positive(config, "samples", 10)
    rows, constants, dominated = [], [], True
    for i in range(samples):
        h = rng.standard_normal((model.n, model.n)) \
            + 1j * rng.standard_normal((model.n, model.n))
        h = 0.5 * (h + h.conj().T)
        seq = spectral.dioph_approx(model, models.lattice_pairing(model, h),
                                    kmax)
        constants.append(seq.dirichlet_constant)
        dominated = dominated and bool(np.all(seq.n02 <= seq.errors + 1e-12))
        rows.append([i, seq.b2, len(seq.records), seq.dirichlet_constant])
    write_csv(out / "dioph.csv",
              ["target", "b2", "records", "dirichlet_constant"], rows)
    assertions = [
        _assertion("dirichlet_constant_finite",
                   all(np.isfinite(c) and c < 10.0 for c in constants),
                   {"max_C": max(constants)}),
        _assertion("mixed_type_norm_dominated", dominated,
                   {"samples": samples}),
    ]
    summary = {"experiment": "spectral", "mode": "dioph", "kmax": kmax,
               "samples": samples, "max_C": max(constants),
               "assertions": assertions}
    return summary, ["dioph.csv"]


def _run_optimize(config, model, out: Path, rng):
    cls = parse_class(config, model)
    q = parse_q(config, model)
    resolution = _positive(config, "resolution", 32)
    budget = _positive(config, "budget", 300)
    grid = models.build_grid(model, resolution, config.get("cluster_levels", 0))
    try:
        result = optimizer.minimize_morse(
            cls, q, grid, budget=budget,
            restarts=_positive(config, "restarts", 3),
            seed=int(config.get("seed", 0)))
    except optimizer.MorseBoundViolation as exc:
        summary = {"experiment": "optimize", "q": q,
                   "assertions": [_assertion("no_bound_violation", False,
                                             str(exc))]}
        return summary, []
    optimizer.trace_to_csv(result, out / "trace.csv")
    report = optimizer.gap_report(result)
    assertions = [
        _assertion("no_bound_violation", True,
                   {"worst": result.value - result.target}),
        _assertion("gap_within_threshold", not report["flagged"], report),
    ]
    summary = {"experiment": "optimize", "q": q,
               "report": report, "assertions": assertions}
    return summary, ["trace.csv"]


def _run_conjecture(config, model, out: Path, rng):
    cls = parse_class(config, model)
    resolution = _positive(config, "resolution", 24)
    samples = _positive(config, "samples", 20)
    amplitude = config.get("amplitude", 0.02)
    grid = models.build_grid(model, resolution,
                             config.get("cluster_levels", 6)
                             if model.kind == models.KIND_F1 else 0)
    basis = potentials.default_basis(model)
    fields = [forms.reference_form(cls, grid)]
    for _ in range(samples):
        coeffs = amplitude * rng.uniform(-1, 1, size=basis.size)
        fields.append(forms.hessian_form(cls, coeffs, grid, basis))
    if model.kind == models.KIND_F1 and models.pseudoeffective(cls) \
            and float(volume.volume_class(cls)) > 0:
        family = regularization.build_family(cls, (1e-1, 1e-2, 1e-3),
                                             resolution=resolution)
        fields.extend(regularization.u_epsilon(family, eps)
                      for eps in family.epsilons)
    rep = regularization.conjecture_lower_bound_check(
        cls, fields, tol=config.get("tolerance", 0.05))
    write_csv(out / "samples.csv", ["sample", "rhs", "q0_mass", "q1_mass"],
              [[i, r["rhs"], r["q0"], r["q1"]] for i, r in enumerate(rep["rows"])])
    assertions = [_assertion(
        "volume_dominates_mixed_mass", rep["violations"] == 0,
        {"volume": rep["volume"], "max_rhs": rep["max_rhs"],
         "samples": rep["samples"]})]
    summary = {"experiment": "conjecture", "volume": rep["volume"],
               "max_rhs": rep["max_rhs"], "samples": rep["samples"],
               "assertions": assertions}
    return summary, ["samples.csv"]


_RUNNERS = {
    "oracle": _run_oracle,
    "asym": _run_asym,
    "morse": _run_morse,
    "volume": _run_volume,
    "regularize": _run_regularize,
    "spectral": _run_spectral,
    "optimize": _run_optimize,
    "conjecture": _run_conjecture,
}


# ---------------------------------------------------------------------------
# run + report


def run(config: dict, out_dir, seed=None, threads=None) -> int:
    """Execute one experiment config; returns the process exit status."""
    start = time.time()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        experiment = _require(config, "experiment", str)
        if experiment not in _RUNNERS:
            raise SchemaError(f"unknown experiment {experiment!r}")
        if seed is not None:
            config = {**config, "seed": int(seed)}
        if threads is not None:
            config = {**config, "threads": int(threads)}
        config.setdefault("seed", 0)
        config.setdefault("threads", 1)
        if config["threads"] < 1:
            raise SchemaError("threads must be positive")
        model = parse_model(config)
        rng = np.random.default_rng(int(config["seed"]))
        summary, csv_files = _RUNNERS[experiment](config, model, out, rng)
    except SchemaError as exc:
        write_json(out / "summary.json",
                   {"error": f"schema: {exc}", "assertions": []})
        return 2
    except (ValueError, NotImplementedError) as exc:
        write_json(out / "summary.json",
                   {"error": f"schema: {exc}", "assertions": []})
        return 2

    summary["seed"] = config["seed"]
    summary["model"] = config["model"]
    failed = [a["name"] for a in summary["assertions"] if not a["passed"]]
    summary["failed_assertions"] = failed
    write_json(out / "summary.json", summary)

    digest = hashlib.sha256()
    digest.update((out / "summary.json").read_bytes())
    for name in sorted(csv_files):
        digest.update((out / name).read_bytes())
    manifest = {
        "config": config,
        "versions": {"morselab": __version__, "numpy": np.__version__,
                     "scipy": scipy.__version__,
                     "kernel_backend": kernels.backend_name()},
        "wall_time_s": time.time() - start,
        "artifacts": sorted(csv_files) + ["summary.json"],
        "content_hash": digest.hexdigest(),
    }
    write_json(out / "manifest.json", manifest)
    return 1 if failed else 0


def report_index(out_dir) -> dict:
    """Aggregate all run summaries under a directory into one index.

    Entries are keyed by experiment/model/class/q and deduplicated by
    content hash; corrupt manifests are skipped and listed as warnings.
    The aggregation is idempotent.
    """
    out = Path(out_dir)
    entries, warnings, seen = {}, [], set()
    for manifest_path in sorted(out.rglob("manifest.json")):
        try:
            manifest = json.loads(manifest_path.read_text())
            summary = json.loads((manifest_path.parent / "summary.json").read_text())
            config = manifest["config"]
        except (json.JSONDecodeError, OSError, KeyError) as exc:
            warnings.append({"path": str(manifest_path), "error": str(exc)})
            continue
        content = manifest.get("content_hash", "")
        if content in seen:
            continue
        seen.add(content)
        key = "|".join([
            str(config.get("experiment")),
            json.dumps(config.get("model", {}), sort_keys=True),
            json.dumps(config.get("class", None), sort_keys=True),
            str(config.get("q")),
        ])
        entries[key] = {
            "path": str(manifest_path.parent),
            "failed_assertions": summary.get("failed_assertions", []),
            "passed": not summary.get("failed_assertions", True),
            "content_hash": content,
        }
    index = {
        "runs": len(entries),
        "passed": sum(1 for e in entries.values() if e["passed"]),
        "entries": dict(sorted(entries.items())),
        "warnings": warnings,
    }
    write_json(out / "index.json", index)
    return index


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="morselab",
        description="batch experiments on the model-manifold laboratory")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=f"run a {name} experiment config")
        p.add_argument("--config", required=True)
        p.add_argument("--out", required=True)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--threads", type=int, default=None)
    p = sub.add_parser("report", help="aggregate run summaries into an index")
    p.add_argument("--out", required=True)
    args = parser.parse_args(argv)

    if args.command == "report":
        index = report_index(args.out)
        print(f"indexed {index['runs']} runs, {index['passed']} passed, "
              f"{len(index['warnings'])} warnings")
        return 0

    try:
        config = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return 2
    if not isinstance(config, dict):
        print("invalid config: expected a JSON object", file=sys.stderr)
        return 2
    if config.get("experiment", args.command) != args.command:
        print("config experiment does not match the subcommand", file=sys.stderr)
        return 2
    config["experiment"] = args.command
    status = run(config, args.out, seed=args.seed, threads=args.threads)
    summary = json.loads((Path(args.out) / "summary.json").read_text())
    if status == 2:
        print(f"config rejected: {summary.get('error')}", file=sys.stderr)
    elif status == 1:
        print("failed assertions: "
              + ", ".join(summary["failed_assertions"]), file=sys.stderr)
    else:
        print("all assertions passed")
    return status


if __name__ == "__main__":
    sys.exit(main())
