"""Command-line interface: ``ggmlearn <subcommand> ...``.

Every flag without an explicit value falls back to the environment variable
``GGMLEARN_<FLAG>`` (upper case, dashes as underscores), e.g.
``GGMLEARN_SEED`` or ``GGMLEARN_THREADS``.

Exit codes: 0 success, 2 invalid input, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__, evalbench, generators, kernels, learners, model, oracles, sampler, serialize
from .errors import GgmError, NumericalError, ValidationError

ENV_PREFIX = "GGMLEARN_"

FAMILY_PARAMS = {
    "path_cliques": ("n", "d", "rho", "standardize"),
    "gaussian_walk": ("n", "start_time", "standardize"),
    "break_greedy": ("d", "delta", "n_pad"),
    "possibly_hard": ("d", "delta", "tiles", "permute_seed"),
    "gff": (),
    "counterexample": ("name", "eps", "M", "C", "kappa", "r"),
}


class _Failure(Exception):
    def __init__(self, op: str, exc: GgmError):
        super().__init__(f"{op}: {type(exc).__name__}: {exc}")
        self.exc = exc


def _run(op: str, fn, *args, **kwargs):
    """Call ``fn`` and tag any library error with the operation name."""
    try:
        return fn(*args, **kwargs)
    except GgmError as exc:
        raise _Failure(op, exc) from exc


def _emit(text: str, path) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="\n") as fh:
            fh.write(text)


def _bool(text: str) -> bool:
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"not a boolean: {text!r}")


def _ints(text: str) -> list[int]:
    return [int(v) for v in str(text).split(",") if v.strip()]


def _apply_env(parser: argparse.ArgumentParser, args: argparse.Namespace) -> None:
    """Fill flags left unset on the command line from ``GGMLEARN_*`` variables."""
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            sub = action.choices.get(getattr(args, "command", None))
            if sub is not None:
                _apply_env(sub, args)
            continue
        dest = action.dest
        if not action.option_strings or getattr(args, dest, None) is not None:
            continue
        raw = os.environ.get(ENV_PREFIX + dest.upper())
        if raw is None:
            continue
        conv = action.type or str
        try:
            setattr(args, dest, conv(raw))
        except (TypeError, ValueError, argparse.ArgumentTypeError) as exc:
            parser.error(f"bad value in {ENV_PREFIX + dest.upper()}: {exc}")


# ----------------------------------------------------------------- parser


def _add_config_flags(p: argparse.ArgumentParser, with_d: bool = True) -> None:
    p.add_argument("--algorithm", choices=learners.ALGORITHMS, help="structure learner")
    p.add_argument("--kappa", type=float, help="minimum normalized edge strength")
    if with_d:
        p.add_argument("--d", type=int, help="maximum degree")
    p.add_argument("--nu", type=float, help="pruning / validation threshold")
    p.add_argument("--t-steps", dest="t_steps", type=int, help="greedy steps")
    p.add_argument("--tau", type=float, help="hybrid edge threshold")
    p.add_argument("--gamma", type=float, help="hybrid exit multiplier")
    p.add_argument("--gamma-prime", dest="gamma_prime", type=float, help="degree-free hybrid exit multiplier")
    p.add_argument("--split-mode", dest="split_mode", choices=("split", "single"), help="sample splitting")
    p.add_argument("--budget", type=int, help="subset enumeration budget")
    p.add_argument("--tol", type=float, help="l1 solver tolerance")
    p.add_argument("--max-iter", dest="max_iter", type=int, help="l1 solver iteration cap")


def _add_gen_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--family", help="path-cliques, gaussian-walk, break-greedy, possibly-hard, gff or counterexample")
    p.add_argument("--n", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--rho", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--start-time", dest="start_time", type=int)
    p.add_argument("--n-pad", dest="n_pad", type=int)
    p.add_argument("--tiles", type=int)
    p.add_argument("--permute-seed", dest="permute_seed", type=int)
    p.add_argument("--standardize", type=_bool)
    p.add_argument("--name", help="counterexample name")
    p.add_argument("--eps", type=float)
    p.add_argument("--M", dest="M", type=float)
    p.add_argument("--C", dest="C", type=float)
    p.add_argument("--r", type=float)
    p.add_argument("--gff-file", dest="gff_file", help='JSON {"weights": [[...]], "boundary": [...]}')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ggmlearn", description="Gaussian graphical model structure learning.")
    parser.add_argument("--version", action="version", version=f"ggmlearn {__version__} ({kernels.BACKEND} kernels)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write a model file")
    _add_gen_flags(p)
    p.add_argument("--kappa", type=float, help="counterexample parameter")
    p.add_argument("--out")

    p = sub.add_parser("sample", help="draw samples from a model")
    p.add_argument("--model")
    p.add_argument("--m", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")

    p = sub.add_parser("learn", help="estimate the graph")
    p.add_argument("--model", help="model file (truth for defaults, or the source with --population)")
    p.add_argument("--samples", help="sample CSV")
    p.add_argument("--population", action="store_const", const=True, help="use the model's exact covariance")
    p.add_argument("--standardize", type=_bool, help="standardize samples before learning")
    p.add_argument("--rule", choices=("intersection", "union"))
    p.add_argument("--seed", type=int)
    _add_config_flags(p)
    p.add_argument("--out")

    p = sub.add_parser("eval", help="score an estimate")
    p.add_argument("--result")
    p.add_argument("--truth")
    p.add_argument("--holdout", help="standardized holdout CSV")
    p.add_argument("--kappa", type=float)
    p.add_argument("--ws", type=_bool, help="also compute the walk-summable distance")
    p.add_argument("--out")

    p = sub.add_parser("sweep", help="minimal sample size per n")
    _add_gen_flags(p)
    p.add_argument("--ns", type=_ints, help="comma-separated model sizes")
    p.add_argument("--grid", help="JSON grid file (defaults to the shipped grid)")
    p.add_argument("--threshold", type=float)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--m-start", dest="m_start", type=int)
    p.add_argument("--m-max", dest="m_max", type=int)
    p.add_argument("--granularity", type=int)
    p.add_argument("--threads", type=int)
    _add_config_flags(p, with_d=False)
    p.add_argument("--csv")
    p.add_argument("--out", help="JSON summary")

    p = sub.add_parser("verify", help="check the structural inequalities on a model")
    p.add_argument("--model")
    p.add_argument("--json", help="also write the report as JSON")

    p = sub.add_parser("certify", help="classify a model and print an SDD rescaling")
    p.add_argument("--model")
    p.add_argument("--out")
    return parser


# --------------------------------------------------------------- commands


def _need(args, *names):
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        flags = ", ".join("--" + n.replace("_", "-") for n in missing)
        raise _Failure(args.command, ValidationError(f"missing required {flags}"))


def _family(args) -> str:
    fam = (args.family or "").replace("-", "_")
    if fam not in FAMILY_PARAMS:
        raise _Failure("gen", ValidationError(f"unknown family {args.family!r}"))
    return fam


def _gen_params(args, fam: str) -> dict:
    params = {k: getattr(args, k) for k in FAMILY_PARAMS[fam] if getattr(args, k, None) is not None}
    if fam == "gff":
        _need(args, "gff_file")
        doc = serialize.load(args.gff_file)
        params = {"weights": doc.get("weights"), "boundary": doc.get("boundary")}
    if fam == "counterexample" and "name" not in params:
        raise _Failure("gen", ValidationError("counterexample needs --name"))
    return params


def cmd_gen(args) -> None:
    fam = _family(args)
    spec = generators.GeneratorSpec(fam, _gen_params(args, fam))
    mdl = _run("gen", spec.build)
    _emit(serialize.dumps(serialize.model_to_dict(mdl)), args.out)


def cmd_sample(args) -> None:
    _need(args, "model", "m", "seed")
    mdl = _run("read_model", serialize.read_model, args.model)
    s = _run("sample", sampler.sample, mdl, args.m, args.seed)
    if args.out in (None, "-"):
        np.savetxt(sys.stdout, s.data, delimiter=",", fmt="%.17g", header=",".join(f"x{k + 1}" for k in range(s.n)),
                   comments="")
    else:
        sampler.write_csv(s, args.out)


def _config(args, mdl) -> learners.LearnerConfig:
    fields = ("kappa", "d", "nu", "t_steps", "tau", "gamma", "gamma_prime", "budget", "tol", "max_iter")
    over = {k: getattr(args, k) for k in fields if getattr(args, k, None) is not None}
    if getattr(args, "split_mode", None):
        over["sample_split_mode"] = args.split_mode
    elif getattr(args, "algorithm", None) == "hybrid-mb":
        over["sample_split_mode"] = "single"
    if mdl is not None:
        return _run("config", learners.config_for_model, mdl, **over)
    return _run("config", learners.LearnerConfig, **over)


def cmd_learn(args) -> None:
    _need(args, "seed", "algorithm")
    mdl = _run("read_model", serialize.read_model, args.model) if args.model else None
    if args.population:
        if mdl is None:
            raise _Failure("learn", ValidationError("--population needs --model"))
        source = mdl
    else:
        _need(args, "samples")
        source = _run("read_samples", sampler.read_csv, args.samples, args.seed, mdl.digest if mdl else "")
        if mdl is not None and source.n != mdl.n:
            raise _Failure("learn", ValidationError("sample columns do not match the model"))
        if args.standardize:
            source, _ = _run("standardize", sampler.standardize, source)
    cfg = _config(args, mdl)
    rule = args.rule or "intersection"
    est = _run(args.algorithm, learners.learn, source, args.algorithm, cfg, rule)
    doc = serialize.estimate_to_dict(est, args.algorithm, cfg.to_dict())
    doc["run"] = {
        "seed": args.seed,
        "population": bool(args.population),
        "standardize": bool(args.standardize),
        "rule": rule,
        "model": args.model,
        "samples": args.samples,
        "model_hash": mdl.digest if mdl else None,
    }
    _emit(serialize.dumps(doc), args.out)


def cmd_eval(args) -> None:
    _need(args, "result", "truth")
    est = _run("read_result", serialize.read_estimate, args.result)
    truth = _run("read_model", serialize.read_model, args.truth)
    out = {
        "structure_error": _run("structure_error", evalbench.structure_error, est, truth, args.kappa),
        "l1_error": _run("l1_error", evalbench.l1_error, est, truth),
        "kappa": args.kappa if args.kappa is not None else truth.kappa,
        "n": truth.n,
    }
    if args.holdout:
        hold = _run("read_samples", sampler.read_csv, args.holdout)
        out["cv_objective"] = _run("cv_objective", evalbench.cv_objective, est, hold)
    if args.ws:
        out["ws_distance"] = _run("ws_distance", evalbench.ws_distance, est)
    _emit(serialize.dumps(out), args.out)


def cmd_sweep(args) -> None:
    _need(args, "seed", "algorithm")
    fam = _family(args)
    params = _gen_params(args, fam)
    params.pop("n", None)
    spec = generators.GeneratorSpec(fam, params)
    if args.grid:
        grids = serialize.load(args.grid)
    else:
        grids = evalbench.default_grids()
    grid = grids.get(args.algorithm, grids) if isinstance(grids, dict) else grids
    ns = args.ns or ([args.n] if args.n else [None])
    over = {k: getattr(args, k) for k in ("kappa", "nu", "t_steps", "tau", "gamma", "gamma_prime")
            if getattr(args, k, None) is not None}
    if args.split_mode:
        over["sample_split_mode"] = args.split_mode
    elif args.algorithm == "hybrid-mb":
        over["sample_split_mode"] = "single"
    kwargs = {
        "error_threshold": args.threshold if args.threshold is not None else 1.0,
        "trials": args.trials or 8,
        "seed": args.seed,
        "ns": ns,
        "overrides": over,
        "m_start": args.m_start or 25,
        "m_max": args.m_max or 20000,
        "granularity": args.granularity or 25,
        "threads": args.threads,
    }
    res = _run("min_samples_sweep", evalbench.min_samples_sweep, spec, args.algorithm, grid, **kwargs)
    if args.csv:
        res.write_csv(args.csv)
    _emit(serialize.dumps(res.to_summary()), args.out)


def cmd_verify(args) -> None:
    _need(args, "model")
    mdl = _run("read_model", serialize.read_model, args.model)
    report = _run("verify_structural_lemmas", oracles.verify_structural_lemmas, mdl)
    sys.stdout.write(oracles.lemma_table(report) + "\n")
    if args.json:
        doc = {
            name: {"applies": o.applies, "slack": o.slack, "checked": o.checked, "passed": o.passed}
            for name, o in report.items()
        }
        serialize.dump(doc, args.json)


def cmd_certify(args) -> None:
    _need(args, "model")
    mdl = _run("read_model", serialize.read_model, args.model)
    cls = _run("classify", model.classify, mdl)
    doc = {"classification": cls, "walk_summable_margin": model.walk_summable_margin(mdl.theta)}
    if cls["walk_summable"]:
        scale = _run("sdd_rescaling", model.sdd_rescaling, mdl)
        doc["rescaling"] = scale
        doc["rescaled_precision"] = scale[:, None] * mdl.theta * scale[None, :]
    ws = "walk-summable" if cls["walk_summable"] else "not walk-summable"
    sdd = "SDD" if cls["sdd"] else "not SDD"
    att = "attractive" if cls["attractive"] else "not attractive"
    doc["summary"] = f"{ws}, {sdd}, {att}"
    _emit(serialize.dumps(doc), args.out)


COMMANDS = {
    "gen": cmd_gen,
    "sample": cmd_sample,
    "learn": cmd_learn,
    "eval": cmd_eval,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
    "certify": cmd_certify,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _apply_env(parser, args)
    try:
        COMMANDS[args.command](args)
    except _Failure as fail:
        print(f"ggmlearn {args.command}: {fail}", file=sys.stderr)
        return 3 if isinstance(fail.exc, NumericalError) else 2
    except (OSError, json.JSONDecodeError) as exc:
        print(f"ggmlearn {args.command}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
