import json
import subprocess
import sys

import pytest

from mhnpath.cli import build_parser, main
from mhnpath.templates import (
    TemplateLibrary,
    load_template_library,
    parse_template,
    save_template_library,
)

RULES = ["[C:1][O:2]>>[C:1].[O:2]", "[C:1][N:2]>>[C:1].[N:2]",
         "[C:1][S:2]>>[C:1].[S:2]", "[C:1][O:2][C:3]>>[C:1][O:2].[C:3]"]
CORPUS = [("CCO", 0), ("CCCO", 0), ("CCN", 1), ("CCCN", 1), ("CCS", 2),
          ("CCCS", 2), ("COC", 3), ("CCOC", 3), ("OCCO", 0), ("NCCN", 1),
          ("CCOCC", 3), ("CNC", 1)]

FAST_FLAGS = ["--fp-bits", "128", "--d-assoc", "16", "--epochs", "4",
              "--lr", "0.01", "--beta", "0.1", "--dropout", "0.0", "--seed", "5"]


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli")
    lib = TemplateLibrary([parse_template(r, id=i) for i, r in enumerate(RULES)])
    save_template_library(lib, path / "library.tsv")
    lines = ["product_smiles\ttemplate_id"]
    lines += [f"{s}\t{t}" for s, t in CORPUS]
    (path / "dataset.tsv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    lines = ["canonical_smiles,usd_per_g,source,retrieved_at"]
    for smiles, price in [("CCO", 1.0), ("C", 0.5), ("CO", 0.7), ("CC", 0.8)]:
        lines.append(f"{smiles},{price},test,2026-01-01T00:00:00Z")
    (path / "catalog.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


@pytest.fixture(scope="module")
def trained_model(workdir):
    model_path = workdir / "model.bin"
    code = main(["train", "--library", str(workdir / "library.tsv"),
                 "--dataset", str(workdir / "dataset.tsv"),
                 "--out", str(model_path),
                 "--history", str(workdir / "history.csv"), *FAST_FLAGS])
    assert code == 0
    return model_path


def test_every_flag_documented():
    parser = build_parser()
    subparsers = [a for a in parser._actions
                  if isinstance(a, type(parser._subparsers._group_actions[0]))]
    stack = [parser]
    while stack:
        current = stack.pop()
        for action in current._actions:
            if action.dest == "help":
                continue
            if hasattr(action, "choices") and isinstance(action.choices, dict):
                stack.extend(action.choices.values())
                continue
            assert action.help or action.dest in ("command", "price_command"), \
                f"undocumented flag {action.option_strings or action.dest}"


def test_no_command_prints_help():
    assert main([]) == 2


def test_train_smoke(workdir, trained_model):
    assert trained_model.exists()
    history = (workdir / "history.csv").read_text().splitlines()
    assert history[0] == "epoch,train_loss,val_loss,val_top1,val_top100"
    assert len(history) == 5
    meta = json.loads((workdir / "model.bin.meta.json").read_text())
    assert meta["seed"] == 5


def test_train_missing_dataset(workdir):
    code = main(["train", "--library", str(workdir / "library.tsv"),
                 "--dataset", str(workdir / "nope.tsv"),
                 "--out", str(workdir / "x.bin")])
    assert code == 2


def test_train_bad_epochs(workdir):
    code = main(["train", "--library", str(workdir / "library.tsv"),
                 "--dataset", str(workdir / "dataset.tsv"),
                 "--out", str(workdir / "x.bin"), "--epochs", "0"])
    assert code == 2


def test_train_deterministic(workdir, trained_model):
    other = workdir / "model2.bin"
    code = main(["train", "--library", str(workdir / "library.tsv"),
                 "--dataset", str(workdir / "dataset.tsv"),
                 "--out", str(other), "--history", str(workdir / "history2.csv"),
                 *FAST_FLAGS])
    assert code == 0
    assert other.read_bytes() == trained_model.read_bytes()
    assert (workdir / "history2.csv").read_text() == (workdir / "history.csv").read_text()


def test_rank_rows(workdir, trained_model, capsys):
    code = main(["rank", "--library", str(workdir / "library.tsv"),
                 "--model", str(trained_model), "--smiles", "CCO", "-n", "3"])
    assert code == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "rank\ttemplate_id\tscore\tapplicable"
    assert len(out) == 4


def test_rank_bad_smiles_exit2(workdir, trained_model, capsys):
    code = main(["rank", "--library", str(workdir / "library.tsv"),
                 "--model", str(trained_model), "--smiles", "C(("])
    assert code == 2
    assert "position" in capsys.readouterr().err


def test_rank_screen_filters(workdir, trained_model, capsys):
    # add a screened-out template: pinned bromine atom cannot match CCO
    lib = load_template_library(workdir / "library.tsv")
    extra = parse_template("[Br;H0;D1;+0:1][C:2]>>[Br;H0;D1;+0:1].[C:2]",
                           id=len(lib))
    bigger = TemplateLibrary(list(lib) + [extra])
    save_template_library(bigger, workdir / "library5.tsv")
    # 1024 bits: the pinned-bromine screen bit provably misses CCO's bits
    flags = [f if f != "128" else "1024" for f in FAST_FLAGS]
    code = main(["train", "--library", str(workdir / "library5.tsv"),
                 "--dataset", str(workdir / "dataset.tsv"),
                 "--out", str(workdir / "model5.bin"), *flags])
    assert code == 0
    capsys.readouterr()  # discard training logs
    main(["rank", "--library", str(workdir / "library5.tsv"),
          "--model", str(workdir / "model5.bin"), "--smiles", "CCO", "-n", "5"])
    unscreened = capsys.readouterr().out
    main(["rank", "--library", str(workdir / "library5.tsv"),
          "--model", str(workdir / "model5.bin"), "--smiles", "CCO", "-n", "5",
          "--screen"])
    screened = capsys.readouterr().out
    bromine_id = str(len(lib))
    assert any(line.split("\t")[1] == bromine_id
               for line in unscreened.splitlines()[1:])
    assert not any(line.split("\t")[1] == bromine_id
                   for line in screened.splitlines()[1:])


def test_search_buyable_target(workdir, trained_model, tmp_path, capsys):
    out_dir = tmp_path / "run"
    code = main(["search", "--smiles", "CCO", "--out-dir", str(out_dir),
                 "--syn-library", str(workdir / "library.tsv"),
                 "--syn-model", str(trained_model),
                 "--catalog", str(workdir / "catalog.csv")])
    assert code == 0
    tree = json.loads((out_dir / "tree.json").read_text())
    assert tree["subtrees"] == []
    meta = json.loads((out_dir / "run_meta.json").read_text())
    assert meta["command"] == "search" and "seed" in meta


def test_search_matches_api_trace(workdir, trained_model, tmp_path):
    """CLI byte output equals an independently constructed run_search trace."""
    from mhnpath import parse_smiles
    from mhnpath.conditions import TablePredictor
    from mhnpath.mhn import Ensemble, load_model
    from mhnpath.pricing import load_catalog
    from mhnpath.scoring import ToxicityDB
    from mhnpath.search import (Prioritizers, SearchConfig, Services,
                                run_search, serialize_tree)

    out_dir = tmp_path / "run2"
    code = main(["search", "--smiles", "CCOC", "--out-dir", str(out_dir),
                 "--syn-library", str(workdir / "library.tsv"),
                 "--syn-model", str(trained_model),
                 "--catalog", str(workdir / "catalog.csv"),
                 "--max-depth", "3", "--top-n", "4"])
    assert code == 0
    lib = load_template_library(workdir / "library.tsv")
    ens = Ensemble([load_model(trained_model, lib)], lib)
    services = Services(catalog=load_catalog(workdir / "catalog.csv"),
                        toxicity=ToxicityDB(), conditions=TablePredictor())
    cfg = SearchConfig(max_depth=3, top_n_templates=4)
    root = run_search(parse_smiles("CCOC"), Prioritizers(synthetic=ens), cfg,
                      services)
    assert (out_dir / "tree.json").read_text() == serialize_tree(root)
    assert (out_dir / "routes.csv").exists()
    assert (out_dir / "tree.dot").exists()
    assert (out_dir / "expansion_log.csv").exists()


def test_search_time_limit_partial(workdir, trained_model, tmp_path):
    out_dir = tmp_path / "run3"
    code = main(["search", "--smiles", "CCOC", "--out-dir", str(out_dir),
                 "--syn-library", str(workdir / "library.tsv"),
                 "--syn-model", str(trained_model),
                 "--catalog", str(workdir / "catalog.csv"),
                 "--time-limit", "0.0"])
    assert code == 0
    tree = json.loads((out_dir / "tree.json").read_text())
    assert tree["subtrees"] == []


def test_search_determinism(workdir, trained_model, tmp_path):
    outputs = []
    for name in ("a", "b"):
        out_dir = tmp_path / name
        code = main(["search", "--smiles", "CCOC", "--out-dir", str(out_dir),
                     "--syn-library", str(workdir / "library.tsv"),
                     "--syn-model", str(trained_model),
                     "--catalog", str(workdir / "catalog.csv"),
                     "--max-depth", "3"])
        assert code == 0
        outputs.append((out_dir / "tree.json").read_bytes())
    assert outputs[0] == outputs[1]


def test_eval_smoke(workdir, trained_model, tmp_path):
    out_dir = tmp_path / "eval"
    code = main(["eval", "--library", str(workdir / "library.tsv"),
                 "--model", str(trained_model),
                 "--cases", str(workdir / "dataset.tsv"),
                 "--out-dir", str(out_dir)])
    assert code == 0
    assert (out_dir / "metrics.csv").exists()
    assert (out_dir / "metrics.txt").exists()


def test_extract_matches_library_builder(workdir, fixtures_dir, tmp_path):
    out = tmp_path / "extracted.tsv"
    rejects = tmp_path / "rejects.txt"
    code = main(["extract", "--reactions", str(fixtures_dir / "reactions_100.tsv"),
                 "--out", str(out), "--radius", "1", "--rejects", str(rejects)])
    assert code == 0
    from mhnpath.templates import build_library_from_reactions, load_reactions

    lib, rej = build_library_from_reactions(
        load_reactions(fixtures_dir / "reactions_100.tsv"), env_radius=1)
    loaded = load_template_library(out)
    assert [t.text for t in loaded] == [t.text for t in lib]
    assert rejects.read_text() == ""


def test_config_file_precedence(workdir, tmp_path):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"epochs": 1, "fp_bits": 128, "d_assoc": 16,
                                  "dropout": 0.0, "seed": 9}), encoding="utf-8")
    out = tmp_path / "m.bin"
    code = main(["train", "--config", str(config),
                 "--library", str(workdir / "library.tsv"),
                 "--dataset", str(workdir / "dataset.tsv"),
                 "--out", str(out), "--epochs", "2"])
    assert code == 0
    meta = json.loads((tmp_path / "m.bin.meta.json").read_text())
    assert meta["config"]["epochs"] == 2      # flag beats file
    assert meta["config"]["fp_bits"] == 128   # file beats default
    assert meta["config"]["seed"] == 9


def test_price_sync_merge(workdir, tmp_path):
    import http.server
    import threading

    class Vendor(http.server.BaseHTTPRequestHandler):
        def do_GET(self):
            body = json.dumps({"quotes": [{"source": "mock", "usd_per_g": 2.5}]})
            self.send_response(200)
            self.end_headers()
            self.wfile.write(body.encode())

        def log_message(self, *args):
            pass

    server = http.server.HTTPServer(("127.0.0.1", 0), Vendor)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    try:
        catalog = tmp_path / "catalog.csv"
        catalog.write_text((workdir / "catalog.csv").read_text(), encoding="utf-8")
        molecules = tmp_path / "mols.smi"
        molecules.write_text("CCS\n", encoding="utf-8")
        endpoint = f"http://127.0.0.1:{server.server_port}"
        code = main(["price", "sync", "--catalog", str(catalog),
                     "--molecules", str(molecules), "--endpoint", endpoint])
        assert code == 0
        assert "CCS" not in catalog.read_text()  # no merge without --merge
        code = main(["price", "sync", "--catalog", str(catalog),
                     "--molecules", str(molecules), "--endpoint", endpoint,
                     "--merge", "--retrieved-at", "2026-02-02T00:00:00Z"])
        assert code == 0
        assert "2.5" in catalog.read_text()
    finally:
        server.shutdown()


def test_console_entry_point(workdir):
    result = subprocess.run([sys.executable, "-m", "mhnpath", "--version"],
                            capture_output=True, text=True)
    assert result.returncode == 0
