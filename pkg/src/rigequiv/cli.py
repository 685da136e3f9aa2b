"""Command line entry point: ``rigequiv <subcommand> [flags]``.

Exit codes: 0 when every verdict passes, 1 when any fails, 2 on a bad config.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import fields

from .graph_core import project_to_graph
from .harness import ConfigError, ExperimentConfig, emit_report, render_report, run_experiment
from .samplers import RngStream, sample_er, sample_iid_hypergraph, sample_rig_graph
from .thresholds import MODES, ModelParams, edge_prob_hat

log = logging.getLogger("rigequiv")

SUBCOMMANDS = {
    "tv-exact": "tv_convergence",
    "squeeze": "squeeze",
    "triangles": "triangle_poisson",
    "coupling-check": "coupling_chain",
    "counterexample": "counterexample",
    "lemma8": "lemma8",
    "chernoff-audit": "chernoff_audit",
}
CONFIG_FIELDS = {f.name for f in fields(ExperimentConfig)} - {"kind", "params"}


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _ints(text: str) -> list[int]:
    return [int(float(x)) for x in text.split(",") if x.strip()]


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global")
    g.add_argument("--n", type=int)
    g.add_argument("--m", type=lambda s: int(float(s)))
    g.add_argument("--alpha", type=float)
    g.add_argument("--p", type=float)
    g.add_argument("--reps", type=int, default=1000)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--mode", choices=MODES, default="thm4")
    g.add_argument("--out", help="write the report here instead of stdout")
    g.add_argument("--format", choices=("csv", "json"), default="json")
    g.add_argument("--config", help="JSON file; its values override flags")
    g.add_argument("--workers", type=int, default=1)
    g.add_argument("--budget", type=float, default=1e9, help="max projected edge operations")
    g.add_argument("--timing", action="store_true", help="include wall-clock in the report")
    g.add_argument("-v", "--verbose", action="store_true")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="rigequiv", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sample", parents=[common], help="draw graphs in the canonical text format")
    s.add_argument("--model", choices=("rig", "er", "hypergraph"), default="rig")
    s.add_argument("--k", type=int, default=3, help="hyperedge size for --model hypergraph")
    s.add_argument("--q", type=float, help="hyperedge probability for --model hypergraph")

    t = sub.add_parser("tv-exact", parents=[common], help="exact TV between G(n,m,p) and G(n,p_hat), n <= 5")
    t.add_argument("--m-grid", type=_ints)
    t.add_argument("--p-scale", type=float, help="p = scale / (n m^(1/3)) when --p is absent")

    q = sub.add_parser("squeeze", parents=[common], help="P(G(p-)), P(RIG), P(G(p+)) for a monotone property")
    q.add_argument("--p-grid", type=_floats)
    q.add_argument("--property", default="connected")
    q.add_argument("--t", type=int, default=0, help="property threshold")

    tr = sub.add_parser("triangles", parents=[common], help="triangle counts at m = n^3, p = c / n^2")
    tr.add_argument("--c", type=float)

    sub.add_parser("coupling-check", parents=[common], help="containment and dominance checks")

    c = sub.add_parser("counterexample", parents=[common], help="the amplifier-necessity construction")
    c.add_argument("--q", type=float)
    c.add_argument("--n-grid", type=_ints)

    l8 = sub.add_parser("lemma8", parents=[common], help="exact count-vector TV along m with m p^2 fixed")
    l8.add_argument("--K", type=int)
    l8.add_argument("--m-grid", type=_ints)
    l8.add_argument("--mp2", type=float)

    ch = sub.add_parser("chernoff-audit", parents=[common], help="exact binomial tails against the bounds")
    ch.add_argument("--trials", type=int)
    return parser


def _params_from_args(args: argparse.Namespace) -> dict:
    params = {}
    for key in ("n", "m", "alpha"):
        if getattr(args, key) is not None:
            params[key] = getattr(args, key)
    if args.p is not None:
        if args.command == "squeeze":
            params["p_grid"] = [args.p]
        else:
            params["p"] = args.p
    if args.command == "tv-exact" and args.m is not None and args.m_grid is None:
        params["m_grid"] = [args.m]
    if args.command == "counterexample" and args.n is not None and args.n_grid is None:
        params["n_grid"] = [args.n]
    extra = {
        "m_grid": "m_grid", "p_scale": "p_scale", "p_grid": "p_grid", "property": "property", "t": "t",
        "c": "c", "q": "q", "n_grid": "n_grid", "K": "K", "mp2": "mp2", "trials": "trials",
    }
    for attr, key in extra.items():
        val = getattr(args, attr, None)
        if val is not None:
            params[key] = val
    return params


def _load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    return data


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    kwargs = {
        "reps": args.reps, "seed": args.seed, "mode": args.mode, "out_path": args.out,
        "format": args.format, "workers": args.workers, "budget": args.budget,
    }
    params = _params_from_args(args)
    if args.config:
        data = _load_config(args.config)
        params.update(data.pop("params", {}))
        data.pop("kind", None)
        for key, val in data.items():
            if key in CONFIG_FIELDS:
                kwargs[key] = val
            elif key == "out":
                kwargs["out_path"] = val
            else:
                params[key] = val
    return ExperimentConfig(kind=SUBCOMMANDS[args.command], params=params, **kwargs)


def _run_sample(args: argparse.Namespace) -> int:
    if args.config:
        for key, val in _load_config(args.config).items():
            setattr(args, key, val)
    if args.n is None:
        raise ConfigError("sample needs --n")
    chunks = []
    for i in range(args.reps):
        gen = RngStream(args.seed, 0).child(i)
        head = f"# rigequiv sample model={args.model} seed={args.seed} replicate={i}"
        if args.model == "hypergraph":
            if args.q is None:
                raise ConfigError("hypergraph sampling needs --q")
            h = sample_iid_hypergraph(args.n, args.k, args.q, gen)
            head += f" k={args.k} q={args.q!r}"
            g = project_to_graph(h)
        else:
            if args.p is None or (args.model == "rig" and args.m is None and args.alpha is None):
                raise ConfigError(f"{args.model} sampling needs --p (and --m or --alpha for rig)")
            if args.model == "rig":
                params = ModelParams.from_alpha(args.n, args.alpha, args.p) if args.m is None else ModelParams(
                    args.n, args.m, args.p)
                head += f" n={params.n} m={params.m} p={params.p!r} p_hat={edge_prob_hat(params)!r}"
                g = sample_rig_graph(params.n, params.m, params.p, gen)
            else:
                head += f" n={args.n} p={args.p!r}"
                g = sample_er(args.n, args.p, gen)
        chunks.append(head + "\n" + g.to_text())
    text = "\n".join(chunks)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "sample":
            return _run_sample(args)
        cfg = config_from_args(args)
        report = run_experiment(cfg)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for w in report.warnings:
        log.warning(w)
    if cfg.out_path:
        try:
            emit_report(report, cfg.out_path, cfg.format, args.timing)
        except OSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
    else:
        sys.stdout.write(render_report(report, cfg.format, args.timing))
    for name, ok in report.verdicts.items():
        print(f"{'PASS' if ok else 'FAIL'} {name}", file=sys.stderr)
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
