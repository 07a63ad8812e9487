"""Batch command-line front end.

Subcommands: spectrum, check, levels, jump, verify, euler.  Every command
emits JSON on stdout (or to --out); branch data is written as CSV next to the
JSON report.  Exit codes: 0 success, 1 computational failure (inconclusive
degree, Newton failure, incomplete table), 2 configuration errors.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import brouwer, continuation, euler_ring, potentials, predictor, spectral

_CONFIG_KEYS = (
    "domain",
    "dim",
    "potential",
    "potential_file",
    "beta_cutoff",
    "truncation",
    "window",
    "epsilon",
    "seed",
    "lambda0",
    "steps",
    "count",
    "lambda_samples",
)


def _load_config(path):
    import configparser

    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ValueError(f"cannot read config file {path!r}")
    flat = {}
    for section in parser.sections():
        for key, value in parser[section].items():
            flat[key.replace("-", "_").lower()] = value
    return flat


def _merged(args):
    """Config-file values with CLI flags winning."""
    cfg = {}
    if getattr(args, "config", None):
        cfg = _load_config(args.config)
    merged = dict(cfg)
    for key in _CONFIG_KEYS:
        val = getattr(args, key, None)
        if val is not None:
            merged[key] = val
    return merged


def _domain(opts) -> spectral.DomainId:
    kind = str(opts.get("domain", "")).lower()
    if kind not in ("sphere", "ball"):
        raise ValueError("--domain must be 'sphere' or 'ball'")
    dim = int(opts.get("dim", 0))
    return spectral.DomainId(kind, dim)


def _potential(opts) -> potentials.PotentialSpec:
    if opts.get("potential_file"):
        return potentials.from_config_file(opts["potential_file"])
    name = opts.get("potential")
    if not name:
        raise ValueError("need --potential or --potential-file")
    return potentials.builtin(str(name))


def _window(opts):
    raw = opts.get("window")
    if raw is None:
        raise ValueError("need --window a:b")
    lo, hi = (float(x) for x in str(raw).split(":"))
    if not hi > lo:
        raise ValueError("window must satisfy a < b")
    return lo, hi


def _seed(opts) -> int:
    return int(opts.get("seed", 0))


def _emit(doc, args) -> None:
    pretty = bool(getattr(args, "json_pretty", False))
    text = json.dumps(doc, indent=2 if pretty else None, sort_keys=True)
    out = getattr(args, "out", None)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")


# --------------------------------------------------------------------------
# subcommands


def cmd_spectrum(args):
    opts = _merged(args)
    domain = _domain(opts)
    cutoff = opts.get("beta_cutoff")
    if domain.kind == "sphere":
        count = opts.get("count")
        if count is not None:
            entries = spectral.sphere_spectrum(domain.dim, int(count))
        elif cutoff is not None:
            entries = predictor.eigen_catalog(domain, float(cutoff))
        else:
            raise ValueError("need --count or --beta-cutoff for sphere spectra")
    else:
        if cutoff is None:
            raise ValueError("need --beta-cutoff for ball spectra")
        entries = spectral.ball_neumann_spectrum(domain.dim, float(cutoff))
    return {
        "command": "spectrum",
        "domain": domain.kind,
        "dim": domain.dim,
        "entries": spectral.spectrum_to_json(entries),
        "seed": _seed(opts),
    }


def cmd_check(args):
    opts = _merged(args)
    spec = _potential(opts)
    samples = opts.get("lambda_samples")
    if samples:
        samples = tuple(float(x) for x in str(samples).split(","))
    else:
        samples = (-0.1, 0.1)
    rng = np.random.default_rng(_seed(opts))
    report = potentials.check_assumptions(spec, lambda_samples=samples, rng=rng)
    return {"command": "check", "seed": _seed(opts), **report.to_json()}


def cmd_levels(args):
    opts = _merged(args)
    domain = _domain(opts)
    spec = _potential(opts)
    cutoff = float(opts.get("beta_cutoff", 10.0))
    eps = opts.get("epsilon")
    rng = np.random.default_rng(_seed(opts))
    cands = predictor.predict(
        spec, domain, cutoff, epsilon=float(eps) if eps is not None else None, rng=rng
    )
    levels = predictor.lambda_set(spec, domain, cutoff)
    if domain.kind == "sphere":
        note = (
            "no admissible levels: the matrix A has no nonzero eigenvalues, so the "
            "candidate level set is empty and no bifurcation can occur"
            if not levels
            else "bifurcation on the sphere is confined to the listed levels; none occurs outside them"
        )
    else:
        note = "ball candidates carry interval alternatives, not exact levels"
    return {
        "command": "levels",
        "domain": domain.kind,
        "dim": domain.dim,
        "potential": spec.name,
        "beta_cutoff": cutoff,
        "lambda_set": levels,
        "candidates": [predictor.candidate_to_json(c) for c in cands],
        "note": note,
        "seed": _seed(opts),
    }


def cmd_jump(args):
    opts = _merged(args)
    domain = _domain(opts)
    spec = _potential(opts)
    lam0 = opts.get("lambda0")
    if lam0 is None:
        raise ValueError("need --lambda0 for the jump command")
    lam0 = float(lam0)
    cutoff = float(opts.get("beta_cutoff", max(10.0, 2.0 * abs(lam0))))
    eps = opts.get("epsilon")
    if eps is None:
        eps = predictor.default_epsilon(lam0, predictor.lambda_set(spec, domain, cutoff))
    rng = np.random.default_rng(_seed(opts))
    cand = predictor.degree_jump(spec, domain, lam0, float(eps), beta_cutoff=cutoff, rng=rng)
    return {
        "command": "jump",
        "domain": domain.kind,
        "dim": domain.dim,
        "potential": spec.name,
        "candidate": predictor.candidate_to_json(cand),
        "seed": _seed(opts),
    }


def _verify_branch(problem, lam_star, window):
    lo, hi = window
    try:
        seed = continuation.switch_branch(problem, lam_star)
    except (continuation.NoBranchError, continuation.NewtonError) as err:
        return {"captured": False, "error": str(err)}
    span = max(0.25 * max(1.0, abs(lam_star)), 10.0 * abs(seed.points[0].lam - lam_star))
    limits = (max(lo, lam_star - span), min(hi, lam_star + span))
    branch = continuation.continue_branch(problem, seed, limits, max_steps=80, ds_max=0.05)
    sups = [bp.sup_norm for bp in branch.points]
    return {
        "captured": True,
        "points": len(branch.points),
        "lambda_range": [min(bp.lam for bp in branch.points), max(bp.lam for bp in branch.points)],
        "max_sup_norm": max(sups),
        "termination": branch.termination,
        "branch": branch,
    }


def cmd_verify(args):
    opts = _merged(args)
    domain = _domain(opts)
    spec = _potential(opts)
    cutoff = float(opts.get("beta_cutoff", 10.0))
    window = _window(opts)
    steps = int(opts.get("steps", 200))
    rng = np.random.default_rng(_seed(opts))
    truncation = opts.get("truncation")
    # the Galerkin basis uses its own (denser) default truncation; the
    # prediction cutoff only bounds the candidate search
    problem = continuation.build_problem(
        domain,
        spec,
        truncation=int(truncation) if truncation is not None else None,
    )
    cands = predictor.predict(spec, domain, cutoff, rng=rng)
    detected = continuation.detect_bifurcation(problem, window, steps=steps)
    doc = {
        "command": "verify",
        "domain": domain.kind,
        "dim": domain.dim,
        "potential": spec.name,
        "beta_cutoff": cutoff,
        "window": list(window),
        "predicted": [predictor.candidate_to_json(c) for c in cands],
        "detected": detected,
        "seed": _seed(opts),
    }
    branches = []
    if domain.kind == "sphere":
        in_window = [c.lambda0 for c in cands if window[0] <= c.lambda0 <= window[1]]
        matches = []
        for lam0 in in_window:
            hit = [d for d in detected if abs(d - lam0) <= 1e-6]
            rec = {"lambda0": lam0, "detected_match": hit[0] if hit else None}
            if hit:
                res = _verify_branch(problem, hit[0], window)
                branch = res.pop("branch", None)
                if branch is not None:
                    branches.append((lam0, branch))
                rec["branch"] = res
            matches.append(rec)
        unexplained = [
            d for d in detected if not any(abs(d - lam0) <= 1e-6 for lam0 in in_window)
        ]
        consistent = all(m["detected_match"] is not None for m in matches) and not unexplained
        doc["levels"] = matches
        doc["unmatched_detected"] = unexplained
        doc["verdict"] = "CONSISTENT" if consistent else "INCONSISTENT"
        if not in_window and not detected:
            doc["summary"] = "no predicted levels; no detected branches"
    else:
        records = []
        all_ok = True
        for cand in cands:
            if cand.guarantee is None:
                continue
            lo, hi = cand.guarantee.lo, cand.guarantee.hi
            inside = [d for d in detected if lo < d < hi]
            rec = {
                "lambda0": cand.lambda0,
                "interval": [lo, hi],
                "detected_inside": inside,
            }
            if inside:
                target = min(inside, key=lambda d: abs(d - cand.lambda0))
                res = _verify_branch(problem, target, window)
                branch = res.pop("branch", None)
                if branch is not None:
                    branches.append((cand.lambda0, branch))
                rec["branch"] = res
                rec["observed_alternative"] = (
                    "global-bifurcation-in-interval" if res.get("captured") else "undetermined"
                )
                rec["heuristic"] = True
                all_ok = all_ok and res.get("captured", False)
            else:
                rec["observed_alternative"] = "undetermined"
                rec["heuristic"] = True
                all_ok = False
            records.append(rec)
        outside = [
            d
            for d in detected
            if not any(
                c.guarantee is not None and c.guarantee.lo < d < c.guarantee.hi for c in cands
            )
        ]
        doc["candidates"] = records
        doc["detected_outside_candidates"] = outside
        doc["verdict"] = "CONSISTENT" if all_ok else "INCONSISTENT"
    out = getattr(args, "out", None)
    if out and branches:
        include_coeffs = bool(getattr(args, "branch_coefficients", False))
        for lam0, branch in branches:
            stem = f"{out}.branch-{lam0:.6g}"
            continuation.branch_to_csv(branch, stem + ".csv")
            with open(stem + ".json", "w") as fh:
                json.dump(
                    continuation.branch_to_json(branch, include_coefficients=include_coeffs),
                    fh,
                    sort_keys=True,
                )
                fh.write("\n")
    return doc


def _element_from_json(doc):
    return euler_ring.element(doc["context"], doc.get("coefficients", {}))


def cmd_euler(args):
    opts = _merged(args)
    if not getattr(args, "input", None):
        raise ValueError("need --input with an operation document")
    with open(args.input) as fh:
        doc = json.load(fh)
    table = None
    if getattr(args, "table", None):
        with open(args.table) as fh:
            table = euler_ring.MultiplicationTable.from_json(json.load(fh))
    op = doc.get("op")
    if op == "add":
        result = euler_ring.add(_element_from_json(doc["e1"]), _element_from_json(doc["e2"]))
        payload = {"context": result.context, "coefficients": result.as_dict()}
    elif op == "star":
        result = euler_ring.star(
            _element_from_json(doc["e1"]), _element_from_json(doc["e2"]), table
        )
        payload = {"context": result.context, "coefficients": result.as_dict()}
    elif op == "push_forward":
        result = euler_ring.push_forward(
            _element_from_json(doc["element"]),
            doc["class_map"],
            target_context=doc["target_context"],
            admissible=bool(doc.get("admissible", False)),
        )
        payload = {"context": result.context, "coefficients": result.as_dict()}
    elif op == "scalar_unit_test":
        payload = {"scalar": euler_ring.scalar_unit_test(_element_from_json(doc["element"]))}
    elif op == "deg_minus_id":
        blocks = tuple(
            predictor.RepresentationBlock(
                beta=float(b.get("beta", 0.0)),
                copies=int(b.get("copies", 1)),
                dimension=int(b["dimension"]),
                nontrivial=bool(b["nontrivial"]),
            )
            for b in doc["blocks"]
        )
        rep = predictor.RepresentationDescriptor(blocks=blocks)
        deg = euler_ring.deg_minus_id(rep, context=doc.get("context", "H"))
        exact = deg.exact_value
        if exact is not None:
            payload = {"kind": "exact", "coefficients": exact.as_dict()}
        else:
            payload = {"kind": "atom", "dimension": rep.total_dimension, "scalar_unit": False}
    elif op == "product_decision":
        spec_deg = doc["degree"]
        if spec_deg.get("kind") == "exact":
            deg = euler_ring.SymbolicDegree.exact(_element_from_json(spec_deg["element"]))
        else:
            deg = euler_ring.SymbolicDegree.atom(
                spec_deg.get("context", "H"), int(spec_deg.get("dimension", 1))
            )
        payload = {
            "jump": euler_ring.product_decision(
                int(doc["b_plus"]), int(doc["b_minus"]), deg, doc.get("atom_side", "plus")
            )
        }
    else:
        raise ValueError(f"unknown euler op {op!r}")
    return {"command": "euler", "op": op, "result": payload, "seed": _seed(opts)}


# --------------------------------------------------------------------------
# argument parsing


def _add_common(sp):
    sp.add_argument("--config", help="config file with key = value sections")
    sp.add_argument("--domain", help="sphere or ball")
    sp.add_argument("--dim", type=int, help="ambient dimension N")
    sp.add_argument("--potential", help="builtin potential name")
    sp.add_argument("--potential-file", dest="potential_file", help="user potential config")
    sp.add_argument("--beta-cutoff", dest="beta_cutoff", type=float)
    sp.add_argument("--truncation", type=int)
    sp.add_argument("--window", help="a:b")
    sp.add_argument("--epsilon", type=float)
    sp.add_argument("--out", help="write JSON here instead of stdout")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--json-pretty", dest="json_pretty", action="store_true")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="symbif",
        description="Symmetry-breaking bifurcation levels for elliptic systems "
        "on spheres and balls, with numerical branch verification.",
    )
    sub = parser.add_subparsers(dest="cmd", required=True)
    for name, fn in (
        ("spectrum", cmd_spectrum),
        ("check", cmd_check),
        ("levels", cmd_levels),
        ("jump", cmd_jump),
        ("verify", cmd_verify),
        ("euler", cmd_euler),
    ):
        sp = sub.add_parser(name)
        _add_common(sp)
        sp.set_defaults(fn=fn)
        if name == "spectrum":
            sp.add_argument("--count", type=int, help="number of distinct eigenvalues")
        if name == "check":
            sp.add_argument("--lambda-samples", dest="lambda_samples", help="comma-separated")
        if name == "jump":
            sp.add_argument("--lambda0", type=float)
        if name == "verify":
            sp.add_argument("--steps", type=int)
            sp.add_argument(
                "--branch-coefficients",
                dest="branch_coefficients",
                action="store_true",
                help="include full coefficient vectors in branch JSON files",
            )
        if name == "euler":
            sp.add_argument("--input", help="JSON operation document")
            sp.add_argument("--table", help="JSON multiplication table")
    return parser


_COMPUTATIONAL = (
    brouwer.InconclusiveDegreeError,
    brouwer.AdmissibilityError,
    continuation.NewtonError,
    continuation.NoBranchError,
    euler_ring.TableIncompleteError,
)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        doc = args.fn(args)
    except _COMPUTATIONAL as err:
        sys.stderr.write(
            json.dumps({"error": {"type": type(err).__name__, "message": str(err)}}) + "\n"
        )
        return 1
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as err:
        sys.stderr.write(
            json.dumps({"error": {"type": type(err).__name__, "message": str(err)}}) + "\n"
        )
        return 2
    _emit(doc, args)
    return 0


if __name__ == "__main__":
    sys.exit(main())
