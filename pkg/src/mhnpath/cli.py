"""Command-line surface: train, rank, search, eval, extract, price sync.

Exit codes: 0 success, 1 runtime failure, 2 usage/config error. Flag values
override config-file values (JSON, --config or MHNPATH_CONFIG), which override
defaults. Every run directory gets a run_meta.json recording the seed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from .conditions import TablePredictor, load_conditions_table
from .evalharness import build_report, load_cases, save_report
from .mhn import (
    ConfigError,
    Ensemble,
    ModelConfig,
    init_model,
    load_model,
    load_training_set,
    rank_templates,
    save_history,
    save_model,
    train,
)
from .molecule import MoleculeError
from .pricing import (
    BuyabilityPolicy,
    VendorClient,
    load_catalog,
    save_catalog,
    sync_quotes,
)
from .scaffold import read_molecule_list
from .scoring import ScoreWeights, ToxicityDB, load_toxicity_db
from .search import (
    Prioritizers,
    SearchConfig,
    Services,
    extract_routes,
    run_search,
    serialize_tree,
    write_dot,
    write_expansion_log,
)
from .smiles import parse_smiles
from .templates import (
    LibraryError,
    TemplateSyntaxError,
    apply_template,
    build_library_from_reactions,
    load_reactions,
    load_template_library,
    save_template_library,
)

_USAGE_ERRORS = (ConfigError, LibraryError, TemplateSyntaxError, MoleculeError,
                 FileNotFoundError, ValueError)

_MODEL_FLAGS = [
    ("fp_bits", int), ("fp_radius", int), ("d_assoc", int), ("mol_layers", int),
    ("temp_layers", int), ("hopfield_layers", int), ("beta", float),
    ("dropout", float), ("lr", float), ("weight_decay", float), ("epochs", int),
    ("batch_size", int), ("concat_rand_template_threshold", int),
    ("association_activation", str), ("seed", int),
]


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return 2
    file_cfg = _load_file_config(args)
    try:
        return args.func(args, file_cfg)
    except _USAGE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except KeyboardInterrupt:
        print("interrupted", file=sys.stderr)
        return 1
    except Exception as exc:  # runtime failure
        print(f"error: {exc}", file=sys.stderr)
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mhnpath",
        description="Retrosynthesis planning: template ranking, route search, "
                    "and green-chemistry scoring.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command")
    parser.set_defaults(command=None)

    p_train = sub.add_parser("train", help="train a template prioritizer")
    p_train.add_argument("--config", help="JSON config file (or MHNPATH_CONFIG)")
    p_train.add_argument("--library", required=True, help="template library TSV")
    p_train.add_argument("--dataset", required=True,
                         help="training TSV: product_smiles, template_id")
    p_train.add_argument("--out", required=True, help="output model file")
    p_train.add_argument("--history", help="per-epoch metrics CSV")
    for name, kind in _MODEL_FLAGS:
        p_train.add_argument(f"--{name.replace('_', '-')}", type=kind, default=None,
                             help=f"model config: {name}")
    p_train.set_defaults(func=cmd_train)

    p_rank = sub.add_parser("rank", help="rank templates for one molecule")
    p_rank.add_argument("--config", help="JSON config file")
    p_rank.add_argument("--library", required=True, help="template library TSV")
    p_rank.add_argument("--model", action="append", required=True,
                        help="model file; repeat for an ensemble")
    p_rank.add_argument("--smiles", required=True, help="query molecule")
    p_rank.add_argument("-n", type=int, default=10, help="rows to print")
    p_rank.add_argument("--screen", action="store_true",
                        help="drop templates failing the substructure screen")
    p_rank.set_defaults(func=cmd_rank)

    p_search = sub.add_parser("search", help="run the retrosynthetic tree search")
    p_search.add_argument("--config", help="JSON config file")
    p_search.add_argument("--smiles", required=True, help="target molecule")
    p_search.add_argument("--out-dir", required=True, help="output directory")
    p_search.add_argument("--enz-library", help="enzymatic template library TSV")
    p_search.add_argument("--enz-model", action="append", default=[], help="enzymatic model file; repeatable")
    p_search.add_argument("--syn-library", help="synthetic template library TSV")
    p_search.add_argument("--syn-model", action="append", default=[], help="synthetic model file; repeatable")
    p_search.add_argument("--catalog", required=True, help="price catalog CSV")
    p_search.add_argument("--toxdb", help="toxicity DB CSV")
    p_search.add_argument("--conditions", help="conditions table CSV")
    p_search.add_argument("--w-cost", type=float, default=None, help="cost weight (default 1)")
    p_search.add_argument("--w-temp", type=float, default=None, help="temperature weight (default 1)")
    p_search.add_argument("--w-solv", type=float, default=None, help="solvent-toxicity weight (default 1)")
    p_search.add_argument("--max-depth", type=int, default=None, help="maximum tree depth (default 5)")
    p_search.add_argument("--time-limit", type=float, default=None,
                          help="wall-clock limit in seconds")
    p_search.add_argument("--max-expansions", type=int, default=None, help="stop after this many node expansions")
    p_search.add_argument("--top-n", type=int, default=None,
                          help="templates per prioritizer call")
    p_search.add_argument("--route-limit", type=int, default=None, help="stop after this many solved routes")
    p_search.add_argument("--buyable-threshold", type=float, default=None, help="buyable price cutoff USD/g (default 100)")
    p_search.add_argument("--nonbuyable-cap", type=float, default=None, help="cost cap USD/g (default 500)")
    p_search.add_argument("--style", choices=["celsius", "kelvin"], default="celsius",
                          help="temperature unit in the tree JSON")
    p_search.add_argument("--seed", type=int, default=None, help="run seed recorded in outputs")
    p_search.set_defaults(func=cmd_search)

    p_eval = sub.add_parser("eval", help="compute ranking metrics on cases")
    p_eval.add_argument("--config", help="JSON config file")
    p_eval.add_argument("--library", required=True, help="template library TSV")
    p_eval.add_argument("--model", action="append", required=True, help="model file; repeat for an ensemble")
    p_eval.add_argument("--cases", required=True,
                        help="TSV: product_smiles, template_id")
    p_eval.add_argument("--out-dir", required=True, help="output directory")
    p_eval.add_argument("--seed", type=int, default=None, help="run seed recorded in outputs")
    p_eval.set_defaults(func=cmd_eval)

    p_extract = sub.add_parser("extract",
                               help="extract a template library from mapped reactions")
    p_extract.add_argument("--config", help="JSON config file")
    p_extract.add_argument("--reactions", required=True,
                           help="TSV: reaction_smiles, source")
    p_extract.add_argument("--out", required=True, help="output library TSV")
    p_extract.add_argument("--radius", type=int, default=1,
                           help="environment radius around the reaction center")
    p_extract.add_argument("--rejects", help="write per-row failures here")
    p_extract.set_defaults(func=cmd_extract)

    p_price = sub.add_parser("price", help="price catalog operations")
    price_sub = p_price.add_subparsers(dest="price_command")
    p_sync = price_sub.add_parser("sync", help="fetch vendor quotes")
    p_sync.add_argument("--config", help="JSON config file")
    p_sync.add_argument("--catalog", required=True, help="price catalog CSV")
    p_sync.add_argument("--molecules", required=True,
                        help="molecule list file (one SMILES per line)")
    p_sync.add_argument("--endpoint", required=True, help="vendor API base URL")
    p_sync.add_argument("--merge", action="store_true",
                        help="write fetched quotes back into the catalog file")
    p_sync.add_argument("--timeout", type=float, default=10.0, help="HTTP timeout seconds")
    p_sync.add_argument("--retrieved-at", default="",
                        help="ISO-8601 stamp recorded on merged quotes")
    p_sync.set_defaults(func=cmd_price_sync)
    p_price.set_defaults(func=lambda a, c: (p_price.print_help(), 2)[1])

    return parser


def _load_file_config(args) -> dict:
    path = getattr(args, "config", None) or os.environ.get("MHNPATH_CONFIG")
    if not path:
        return {}
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    return data


def _resolve(args, file_cfg: dict, name: str, default=None):
    value = getattr(args, name, None)
    if value is not None and value != []:
        return value
    if name in file_cfg:
        return file_cfg[name]
    return default


def _write_meta(out_dir: Path, command: str, seed, extra: dict | None = None):
    meta = {"command": command, "seed": seed, "version": __version__}
    if extra:
        meta.update(extra)
    (out_dir / "run_meta.json").write_text(
        json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")


# -- commands -----------------------------------------------------------------


def cmd_train(args, file_cfg) -> int:
    lib = load_template_library(args.library)
    dataset = load_training_set(args.dataset)
    overrides = {}
    for name, _ in _MODEL_FLAGS:
        value = _resolve(args, file_cfg, name)
        if value is not None:
            overrides[name] = value
    cfg = ModelConfig(**overrides)
    model = init_model(cfg, lib)
    model, history = train(model, lib, dataset, log=lambda s: print(s, flush=True))
    save_model(model, args.out)
    history_path = _resolve(args, file_cfg, "history", args.out + ".history.csv")
    save_history(history, history_path)
    Path(str(args.out) + ".meta.json").write_text(
        json.dumps({"command": "train", "seed": cfg.seed,
                    "config": cfg.to_dict()}, indent=2, sort_keys=True) + "\n",
        encoding="utf-8")
    final = history.final
    print(f"final val_top1={final.get('val_top1')} val_top100={final.get('val_top100')}")
    print(f"model written to {args.out}")
    return 0


def _load_ensemble(library_path: str, model_paths: list, what: str) -> Ensemble:
    lib = load_template_library(library_path)
    models = [load_model(p, lib) for p in model_paths]
    if not models:
        raise ConfigError(f"no models supplied for the {what} ensemble")
    return Ensemble(models, lib)


def cmd_rank(args, file_cfg) -> int:
    ensemble = _load_ensemble(args.library, args.model, "requested")
    mol = parse_smiles(args.smiles)
    ranked = rank_templates(ensemble, mol, args.n, screen=args.screen)
    print("rank\ttemplate_id\tscore\tapplicable")
    for row, (tid, score) in enumerate(ranked, start=1):
        applicable = bool(apply_template(ensemble.library[tid], mol, max_matches=8))
        print(f"{row}\t{tid}\t{score:.6f}\t{'yes' if applicable else 'no'}")
    return 0


def cmd_search(args, file_cfg) -> int:
    prioritizers = {}
    enz_models = _resolve(args, file_cfg, "enz_model", [])
    syn_models = _resolve(args, file_cfg, "syn_model", [])
    if enz_models:
        prioritizers["enzymatic"] = _load_ensemble(
            _resolve(args, file_cfg, "enz_library"), enz_models, "enzymatic")
    if syn_models:
        prioritizers["synthetic"] = _load_ensemble(
            _resolve(args, file_cfg, "syn_library"), syn_models, "synthetic")
    if not prioritizers:
        raise ConfigError("supply --enz-model and/or --syn-model")

    catalog = load_catalog(args.catalog)
    toxdb_path = _resolve(args, file_cfg, "toxdb")
    toxdb = load_toxicity_db(toxdb_path) if toxdb_path else ToxicityDB()
    conditions_path = _resolve(args, file_cfg, "conditions")
    conditions = (load_conditions_table(conditions_path)
                  if conditions_path else TablePredictor())
    services = Services(catalog=catalog, toxicity=toxdb, conditions=conditions)

    weights = ScoreWeights(
        w_cost=_resolve(args, file_cfg, "w_cost", 1.0),
        w_temp=_resolve(args, file_cfg, "w_temp", 1.0),
        w_solv=_resolve(args, file_cfg, "w_solv", 1.0))
    policy = BuyabilityPolicy(
        buyable_threshold=_resolve(args, file_cfg, "buyable_threshold", 100.0),
        nonbuyable_cap=_resolve(args, file_cfg, "nonbuyable_cap", 500.0))
    seed = _resolve(args, file_cfg, "seed", 0)
    cfg = SearchConfig(
        max_depth=_resolve(args, file_cfg, "max_depth", 5),
        time_limit_s=_resolve(args, file_cfg, "time_limit"),
        max_expansions=_resolve(args, file_cfg, "max_expansions"),
        top_n_templates=_resolve(args, file_cfg, "top_n", 50),
        route_limit=_resolve(args, file_cfg, "route_limit"),
        weights=weights, policy=policy, seed=seed)

    target = parse_smiles(args.smiles)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    log_rows: list = []
    root = run_search(target, Prioritizers(**prioritizers), cfg, services,
                      log_rows=log_rows)
    (out_dir / "tree.json").write_text(serialize_tree(root, style=args.style),
                                       encoding="utf-8")
    (out_dir / "tree.dot").write_text(write_dot(root), encoding="utf-8")
    write_expansion_log(log_rows, out_dir / "expansion_log.csv")

    routes = extract_routes(root)
    lines = ["route,length,total_cost_usd_per_g,max_temperature_c,score"]
    for i, route in enumerate(routes):
        lines.append(f"{i},{route.length},{route.total_cost!r},"
                     f"{route.max_temperature!r},{route.score!r}")
    (out_dir / "routes.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    _write_meta(out_dir, "search", seed, {"target": args.smiles})

    solved = "solved" if (root.solved or routes) else "unsolved"
    print(f"{solved}: {len(routes)} route(s), tree written to {out_dir}/tree.json")
    return 0


def cmd_eval(args, file_cfg) -> int:
    ensemble = _load_ensemble(args.library, args.model, "requested")
    cases = load_cases(args.cases)
    report = build_report(cases, ensemble)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    save_report(report, out_dir / "metrics.csv", out_dir / "metrics.txt")
    _write_meta(out_dir, "eval", _resolve(args, file_cfg, "seed", 0),
                {"cases": args.cases})
    print(report.as_table())
    return 0


def cmd_extract(args, file_cfg) -> int:
    reactions = load_reactions(args.reactions)
    lib, rejects = build_library_from_reactions(reactions, env_radius=args.radius)
    save_template_library(lib, args.out)
    if args.rejects:
        lines = [f"line {row + 2}\t{name}\t{message}"
                 for row, name, message in rejects]
        Path(args.rejects).write_text(
            "\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")
    print(f"{len(lib)} template(s) written to {args.out}; "
          f"{len(rejects)} reaction(s) rejected")
    return 0


def cmd_price_sync(args, file_cfg) -> int:
    catalog = load_catalog(args.catalog)
    molecules = read_molecule_list(args.molecules)
    client = VendorClient(endpoint=args.endpoint, timeout_s=args.timeout)
    fetched = sync_quotes(catalog, client, molecules, merge=args.merge,
                          retrieved_at=args.retrieved_at)
    for key, source, price in fetched:
        print(f"{key}\t{source}\t{price}")
    if args.merge:
        save_catalog(catalog, args.catalog)
        print(f"catalog updated: {args.catalog}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
