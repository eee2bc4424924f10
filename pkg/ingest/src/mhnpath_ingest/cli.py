"""mhnpath-ingest: clean | templates | catalog | toxdb."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .catalog import build_catalog, build_toxdb
from .library import EngineError, build_template_library
from .manifest import write_manifest
from .reactions import clean_reactions


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return 2
    try:
        return args.func(args)
    except (FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except EngineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mhnpath-ingest",
        description="Convert raw reaction corpora and vendor/toxicity dumps "
                    "into mhnpath engine files.")
    sub = parser.add_subparsers(dest="command")
    parser.set_defaults(command=None)

    p_clean = sub.add_parser("clean", help="clean a raw reaction dump")
    p_clean.add_argument("--raw", required=True, help="raw reaction SMILES file")
    p_clean.add_argument("--out", required=True, help="cleaned reaction TSV")
    p_clean.add_argument("--source", default="syn", choices=["syn", "enz"],
                         help="default source tag for unlabeled rows")
    p_clean.set_defaults(func=cmd_clean)

    p_templates = sub.add_parser("templates",
                                 help="build a template library via the engine")
    p_templates.add_argument("--cleaned", required=True,
                             help="cleaned reaction TSV from 'clean'")
    p_templates.add_argument("--out", required=True, help="engine library TSV")
    p_templates.add_argument("--radius", type=int, default=1,
                             help="extraction environment radius")
    p_templates.add_argument("--rejects", help="rejected-row report path")
    p_templates.set_defaults(func=cmd_templates)

    p_catalog = sub.add_parser("catalog", help="convert a vendor price dump")
    p_catalog.add_argument("--dump", required=True,
                           help="CSV: smiles,price_usd_per_g,vendor[,retrieved_at]")
    p_catalog.add_argument("--out", required=True, help="engine catalog CSV")
    p_catalog.set_defaults(func=cmd_catalog)

    p_toxdb = sub.add_parser("toxdb", help="convert a toxicity dump")
    p_toxdb.add_argument("--dump", required=True,
                         help="CSV: smiles,label,source")
    p_toxdb.add_argument("--out", required=True, help="engine toxicity CSV")
    p_toxdb.set_defaults(func=cmd_toxdb)

    return parser


def cmd_clean(args) -> int:
    stats = clean_reactions(args.raw, args.out, source=args.source)
    write_manifest(Path(args.out).with_suffix(".manifest.json"),
                   inputs=[args.raw], output_dir=str(Path(args.out).parent),
                   source=args.source, stage_counts=stats.as_stage_counts())
    print(f"raw={stats.raw} parsed={stats.parsed} balanced={stats.balanced} "
          f"unique={stats.unique} -> {args.out}")
    return 0


def cmd_templates(args) -> int:
    counts = build_template_library(args.cleaned, args.out, radius=args.radius,
                                    rejects_path=args.rejects)
    write_manifest(Path(args.out).with_suffix(".manifest.json"),
                   inputs=[args.cleaned], output_dir=str(Path(args.out).parent),
                   source="syn", stage_counts=counts, radius=args.radius)
    print(f"{counts['templates']} template(s) from {counts['reactions']} "
          f"reaction(s); {counts['rejected']} rejected -> {args.out}")
    if counts["templates"] == 0:
        print("warning: empty template library", file=sys.stderr)
    return 0


def cmd_catalog(args) -> int:
    counts = build_catalog(args.dump, args.out)
    write_manifest(Path(args.out).with_suffix(".manifest.json"),
                   inputs=[args.dump], output_dir=str(Path(args.out).parent),
                   source="syn", stage_counts=counts)
    print(f"{counts['entries']} entries from {counts['rows']} rows -> {args.out}")
    return 0


def cmd_toxdb(args) -> int:
    counts = build_toxdb(args.dump, args.out)
    write_manifest(Path(args.out).with_suffix(".manifest.json"),
                   inputs=[args.dump], output_dir=str(Path(args.out).parent),
                   source="syn", stage_counts=counts)
    print(f"{counts['entries']} entries from {counts['rows']} rows -> {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
