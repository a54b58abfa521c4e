"""Command-line entry point ``ccq``.

Exit status: 0 on success, 2 when an internal consistency check fails,
3 for configuration or input errors.
"""
import argparse
import json
import os
import sys

import numpy as np

from . import circuits as cq
from .channels import flag_povm_set, generate_choi_set, preparable_states
from .config import TOL
from .densemath import ValidationError, max_entangled, read_matrix, write_matrix
from .divergences import (
    DegeneratePair,
    InvariantViolation,
    comp_dh,
    comp_dmax,
    comp_guess,
    comp_hmin,
    comp_op_norm,
)
from .experiments import (
    ConfigError,
    ExperimentConfig,
    jsonable,
    records_csv,
    run_gap_report,
    run_separation_mixed,
    run_separation_pure,
    summarize,
)
from .rng import SeededRng

EXIT_INVARIANT = 2
EXIT_CONFIG = 3


def _emit(obj, args, name):
    text = json.dumps(jsonable(obj), sort_keys=True, indent=2) + "\n"
    sys.stdout.write(text)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, name), "w") as fh:
            fh.write(text)


def _dims(text):
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"bad dims {text!r}") from exc


def _state(spec, dims, seed):
    """Matrix from a file path or a preset name (bell, mixed, zero, one, plus, random)."""
    d = int(np.prod(dims))
    if os.path.exists(spec):
        m = read_matrix(spec)
        if m.shape != (d, d):
            raise ConfigError(f"{spec} has shape {m.shape}, expected {(d, d)}")
        return m
    if spec == "bell":
        if len(dims) != 2 or dims[0] != dims[1]:
            raise ConfigError("bell needs dims d,d")
        v = max_entangled(dims[0]).vec
        return np.outer(v, v.conj())
    if spec == "mixed":
        return np.eye(d) / d
    if spec in ("zero", "one", "plus"):
        v = {"zero": [1, 0], "one": [0, 1], "plus": [2**-0.5, 2**-0.5]}[spec]
        v = np.array(v, dtype=complex)
        if d != 2:
            raise ConfigError(f"{spec} is a single-qubit state")
        return np.outer(v, v.conj())
    if spec == "random":
        z = SeededRng(seed).complex_normals(0, d * d, stream=21).reshape(d, d)
        m = z @ z.conj().T
        return m / np.trace(m).real
    raise ConfigError(f"unknown state {spec!r}")


def _config(args):
    cfg = ExperimentConfig.from_file(args.config) if args.config else ExperimentConfig()
    if args.seed is not None:
        cfg.seed = args.seed
    for key in ("gateset", "G", "a_max"):
        val = getattr(args, key, None)
        if val is not None:
            setattr(cfg, key, val)
    return cfg.validate()


def _budget(cfg, n):
    return cq.EnumerationBudget(cfg.G, n, cfg.a_max)


def _qubits(d):
    n = int(round(np.log2(d)))
    if 2**n != d:
        raise ConfigError(f"dimension {d} is not a power of two")
    return n


def _tolerances():
    return {k: v for k, v in TOL.as_dict().items() if isinstance(v, float)}


def cmd_enumerate_channels(args):
    cfg = _config(args)
    gs = cfg.gate_set()
    n_in, n_out = args.n_in, args.n_out
    cs = generate_choi_set(gs, _budget(cfg, n_in), 2**n_out, 2**n_in, output_subsets=args.output_subsets)
    manifest = cs.export_manifest()
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "choiset.manifest"), "w") as fh:
            fh.write(manifest)
    _emit({
        "quantity": "choi-set",
        "generator_count": len(cs),
        "count_bound": str(cq.count_bound(gs, n_in, cfg.G)),
        "gateset": gs.name,
        "budget": {"G": cfg.G, "a_max": cfg.a_max, "n_in": n_in, "n_out": n_out},
        "generators": [g.label for g in cs],
    }, args, "enumerate-channels.json")


def _choi_for(cfg, dims):
    d_A, d_B = dims
    return generate_choi_set(cfg.gate_set(), _budget(cfg, _qubits(d_B)), d_A, d_B)


def cmd_divergence(args):
    cfg = _config(args)
    dims = _dims(args.dims)
    rho = _state(args.rho, dims, cfg.seed)
    sigma = _state(args.sigma, dims, cfg.seed + 1)
    cs = _choi_for(cfg, dims)
    if args.kind == "dmax":
        res = comp_dmax(rho, sigma, cs)
    else:
        res = comp_dh(rho, sigma, cs, args.eta)
    _emit({
        "quantity": f"comp_{args.kind}",
        "value": res.value,
        "witness_circuit": [cs.label(i) for i in res.witness],
        "generator_count": len(cs),
        "tolerances": _tolerances(),
    }, args, "divergence.json")


def cmd_min_entropy(args):
    cfg = _config(args)
    dims = _dims(args.dims)
    rho = _state(args.rho, dims, cfg.seed)
    cs = _choi_for(cfg, dims)
    rep = comp_hmin(rho, cs, SeededRng(cfg.seed))
    out = {
        "quantity": "comp_hmin",
        "value": rep.computational,
        "witness_circuit": cs.label(rep.witness[0]),
        "generator_count": len(cs),
        "tolerances": _tolerances(),
    }
    if dims[0] * dims[1] <= TOL.max_sdp_dim:
        from .refentropy import hmin_sdp

        out["informational"] = hmin_sdp(rho, dims).hmin
    _emit(out, args, "min-entropy.json")


def cmd_guess(args):
    cfg = _config(args)
    files = args.states.split(",")
    probs = [float(p) for p in args.probs.split(",")] if args.probs else [1 / len(files)] * len(files)
    d = args.dim
    states = [_state(f, (d,), cfg.seed + i) for i, f in enumerate(files)]
    outcomes = args.outcomes or 2 ** int(np.ceil(np.log2(max(len(files), 2))))
    fp = flag_povm_set(cfg.gate_set(), _budget(cfg, _qubits(d)), d, outcomes)
    val, idx, lab = comp_guess(probs, states, fp.povms)
    _emit({
        "quantity": "comp_guess",
        "value": val,
        "witness_circuit": fp.circuits[idx].to_text(),
        "relabeling": list(lab),
        "generator_count": len(fp),
        "tolerances": _tolerances(),
    }, args, "guess.json")


def cmd_opnorm(args):
    cfg = _config(args)
    d = args.dim
    x = _state(args.x, (d,), cfg.seed)
    prep = preparable_states(cfg.gate_set(), _budget(cfg, _qubits(d)), d)
    val, idx = comp_op_norm(x, prep)
    _emit({
        "quantity": "comp_op_norm",
        "value": val,
        "witness_circuit": prep.circuits[idx].to_text(),
        "generator_count": len(prep),
        "tolerances": _tolerances(),
    }, args, "opnorm.json")


def cmd_schur_demo(args):
    from .schurweyl import build_concentration_channel, decomposition_check, pr_lambda, schmidt_ket, schur_blocks

    k = args.k
    table = schur_blocks(k)
    probs = pr_lambda(np.eye(2) / 2, k)
    dec = decomposition_check(schmidt_ket(args.schmidt), k) if k <= 5 else None
    out = {
        "k": k,
        "blocks": [{"lam": list(b.lam.padded(2)), "dim_u": b.dim_u, "dim_v": b.dim_v,
                    "pr_maximally_mixed": float(p)} for b, p in zip(table.blocks, probs)],
        "dimension_total": int(sum(b.rank for b in table.blocks)),
    }
    if dec is not None:
        out["decomposition_residual"] = dec.residual
        out["concentration_tp_residual"] = build_concentration_channel(k).tp_residual
    _emit(out, args, "schur-demo.json")


def cmd_concentrate(args):
    from .schurweyl import concentrate_overlap, hmin_upper_bound, schmidt_ket, schur_blocks

    if not 1 <= args.k <= 5:
        raise ConfigError("concentrate supports 1 <= k <= 5")
    if not 0 <= args.schmidt <= 1:
        raise ConfigError("Schmidt weight must be in [0, 1]")
    psi = schmidt_ket(args.schmidt)
    res = concentrate_overlap(psi, args.k)
    rep = hmin_upper_bound(psi, args.k)
    table = schur_blocks(args.k)
    _emit({
        "k": args.k,
        "blocks": [{"lam": list(b.lam.padded(2)), "dim_u": b.dim_u, "dim_v": b.dim_v, "pr": float(p)}
                   for b, p in zip(table.blocks, res.probabilities)],
        "overlap": res.overlap,
        "overlap_local": res.overlap_local,
        "formula": res.formula,
        "bound": rep.bound,
        "achieved": rep.achieved,
        "achieved_tp": rep.achieved_tp,
        "tp_residual": res.tp_residual,
    }, args, "concentrate.json")


def cmd_ensemble_stats(args):
    from .ensembles import esd_stats, ghse_sample, ginibre_reduced, haar_pure, haar_subsystem, tr_sqrt_ratio

    seed = args.seed if args.seed is not None else 0
    rng = SeededRng(seed)
    d_A = 2**args.n
    ratios, ks, hist = [], [], np.zeros(16, dtype=int)
    for s in range(args.samples):
        if args.kind == "ghse":
            rho = ghse_sample(args.n, args.m, rng, s)
        elif args.kind == "ginibre":
            rho = ginibre_reduced(d_A, 2**args.m, rng, s)
        elif args.kind in ("haar_pure", "haar_subsystem"):
            nn = args.n + args.m
            v = haar_pure(2**nn, rng, s) if args.kind == "haar_pure" else haar_subsystem(nn, args.m, rng, s)
            c = v.reshape(d_A, -1)
            rho = c @ c.conj().T
        else:
            raise ConfigError(f"unknown ensemble kind {args.kind!r}")
        st = esd_stats(rho, d_A)
        ratios.append(tr_sqrt_ratio(rho, d_A))
        ks.append(st.ks)
        hist += np.array(st.histogram)
    _emit({
        "kind": args.kind,
        "params": {"n": args.n, "m": args.m, "samples": args.samples, "seed": seed},
        "tr_sqrt_ratio_mean": float(np.mean(ratios)) if ratios else None,
        "ks_mp": float(np.mean(ks)) if ks else None,
        "eigen_histogram": hist.tolist(),
    }, args, "ensemble-stats.json")


def cmd_sdp_check(args):
    from .refentropy import hmin_sdp

    seed = args.seed if args.seed is not None else 0
    dims = _dims(args.dims)
    rho = _state(args.rho, dims, seed)
    sol = hmin_sdp(rho, dims)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        write_matrix(os.path.join(args.out, "sigma_B.txt"), sol.sigma_B)
        write_matrix(os.path.join(args.out, "F.txt"), sol.F)
    _emit({"primal": sol.primal, "dual": sol.dual, "gap": sol.gap, "iterations": sol.iterations,
           "hmin": sol.hmin}, args, "sdp-check.json")


def _run_records(args, runner, name):
    cfg = _config(args)
    recs = runner(cfg)
    summary = summarize(recs, cfg)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "records.jsonl"), "w") as fh:
            for r in recs:
                fh.write(r.to_json() + "\n")
        with open(os.path.join(args.out, "summary.csv"), "w") as fh:
            fh.write(records_csv(recs))
    _emit({"experiment": name, "summary": summary}, args, f"{name}.json")


def cmd_separation_pure(args):
    _run_records(args, run_separation_pure, "separation-pure")


def cmd_separation_mixed(args):
    _run_records(args, run_separation_mixed, "separation-mixed")


def cmd_gap_report(args):
    cfg = _config(args)
    text = run_gap_report(cfg)
    sys.stdout.write(text)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "gap_report.csv"), "w") as fh:
            fh.write(text)


def build_parser():
    p = argparse.ArgumentParser(prog="ccq", description="Restricted versus unrestricted quantum entropies.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, budget=True):
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="experiment config file (INI sections)")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out", help="directory for output files")
        if budget:
            sp.add_argument("--gateset")
            sp.add_argument("--budget", dest="G", type=int)
            sp.add_argument("--ancillas", dest="a_max", type=int)
        sp.set_defaults(func=func)
        return sp

    sp = add("enumerate-channels", cmd_enumerate_channels)
    sp.add_argument("--n-in", type=int, default=1)
    sp.add_argument("--n-out", type=int, default=1)
    sp.add_argument("--output-subsets", action="store_true")

    sp = add("divergence", cmd_divergence)
    sp.add_argument("--rho", required=True)
    sp.add_argument("--sigma", required=True)
    sp.add_argument("--dims", default="2,2")
    sp.add_argument("--kind", choices=["dmax", "dh"], default="dmax")
    sp.add_argument("--eta", type=float, default=0.5)

    sp = add("min-entropy", cmd_min_entropy)
    sp.add_argument("--rho", required=True)
    sp.add_argument("--dims", default="2,2")

    sp = add("guess", cmd_guess)
    sp.add_argument("--states", required=True, help="comma-separated files or presets")
    sp.add_argument("--probs")
    sp.add_argument("--dim", type=int, default=2)
    sp.add_argument("--outcomes", type=int)

    sp = add("opnorm", cmd_opnorm)
    sp.add_argument("--x", required=True)
    sp.add_argument("--dim", type=int, default=2)

    sp = add("schur-demo", cmd_schur_demo, budget=False)
    sp.add_argument("--k", type=int, default=3)
    sp.add_argument("--schmidt", type=float, default=0.8)

    sp = add("concentrate", cmd_concentrate, budget=False)
    sp.add_argument("--k", type=int, default=2)
    sp.add_argument("--schmidt", type=float, default=0.5)

    sp = add("ensemble-stats", cmd_ensemble_stats, budget=False)
    sp.add_argument("--kind", default="ghse")
    sp.add_argument("--n", type=int, default=4)
    sp.add_argument("--m", type=int, default=4)
    sp.add_argument("--samples", type=int, default=200)

    sp = add("sdp-check", cmd_sdp_check, budget=False)
    sp.add_argument("--rho", default="random")
    sp.add_argument("--dims", default="2,2")

    add("separation-pure", cmd_separation_pure)
    add("separation-mixed", cmd_separation_mixed)
    add("gap-report", cmd_gap_report)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except InvariantViolation as exc:
        sys.stderr.write(f"invariant violation: {exc}\n")
        return EXIT_INVARIANT
    except (ConfigError, ValidationError, cq.GateSetError, cq.CircuitError, DegeneratePair, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_CONFIG
    return 0


if __name__ == "__main__":
    sys.exit(main())
