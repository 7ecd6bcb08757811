"""Command-line pipeline: ingest -> extract -> code -> analyses -> serve.

Every subcommand reads its inputs from --out-dir, writes its declared
artifacts there, and records a machine-readable run manifest (input/output
hashes, seeds, versions). Configuration comes from an optional TOML file;
command-line flags win over file values.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import __version__, codebook as cb, conet, metrics as mx, ontology as onto, scholnet
from .corpus import CorpusStore, corpus_stats, ingest_csv
from .extract import (
    StopLexicon,
    aggregate_firsts,
    candidates_from_jsonl,
    candidates_to_csv,
    candidates_to_jsonl,
    canonicalize_reversed,
    extract_candidates,
)
from .graphs import WeightedGraph, centrality_csv

EXIT_CONFIG = 2
EXIT_MISSING_UPSTREAM = 3


class ConfigError(Exception):
    pass


class MissingUpstream(Exception):
    def __init__(self, path: Path, subcommand: str):
        super().__init__(f"missing {path}; run `segforms {subcommand}` first")
        self.subcommand = subcommand


DEFAULTS = {
    "anchor": "segregation",
    "paths": {
        "corpus": "",
        "out_dir": "out",
        "journal": "",
        "embeddings": "",
        "labeling": "",
        "cluster_labels": "",
        "lexicon_dir": "",
        "static_dir": "",
    },
    "thresholds": {
        "min_cocitations": 10,
        "coupling_min": 5,
        "country_min_docs": 5,
        "top_k": 1000,
        "conet_min_weight": 1,
    },
    "analysis": {
        "discipline_universe": 169,
        "resolution": 1.0,
        "n_clusters": 32,
        "moving_average_window": 6,
    },
    "seeds": {"louvain": 0, "slm": 0},
    "serve": {"host": "127.0.0.1", "port": 8008, "token": ""},
}


def load_config(path: str | None) -> dict:
    cfg = json.loads(json.dumps(DEFAULTS))  # deep copy
    if not path:
        return cfg
    with open(path, "rb") as fh:
        data = tomllib.load(fh)
    for key, value in data.items():
        if key not in cfg:
            raise ConfigError(f"invalid config key: {key}")
        if isinstance(cfg[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"invalid config key: {key} (expected a table)")
            for sub, subval in value.items():
                if sub not in cfg[key]:
                    raise ConfigError(f"invalid config key: {key}.{sub}")
                cfg[key][sub] = subval
        else:
            cfg[key] = value
    validate_config(cfg)
    return cfg


def validate_config(cfg: dict) -> None:
    if not cfg["anchor"] or not isinstance(cfg["anchor"], str):
        raise ConfigError("invalid config key: anchor (must be a nonempty token)")
    for key, value in cfg["thresholds"].items():
        if not isinstance(value, int) or value <= 0:
            raise ConfigError(f"invalid config key: thresholds.{key} (must be a positive integer)")
    if cfg["analysis"]["discipline_universe"] < 2:
        raise ConfigError("invalid config key: analysis.discipline_universe (must be >= 2)")


def sha256_file(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_manifest(out_dir: Path, subcommand: str, inputs: list[Path], outputs: list[Path], seeds: dict) -> Path:
    manifest = {
        "subcommand": subcommand,
        "version": __version__,
        "inputs": {str(p): sha256_file(p) for p in sorted(set(inputs)) if p.exists()},
        "outputs": {str(p): sha256_file(p) for p in sorted(set(outputs)) if p.exists()},
        "seeds": seeds,
    }
    path = out_dir / f"manifest_{subcommand}.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def require(path: Path, subcommand: str) -> Path:
    if not path.exists():
        raise MissingUpstream(path, subcommand)
    return path


def load_lexicon(cfg) -> StopLexicon:
    lexdir = cfg["paths"]["lexicon_dir"]
    return StopLexicon.from_dir(lexdir) if lexdir else StopLexicon.bundled()


# -- subcommands -----------------------------------------------------------------


def cmd_ingest(args, cfg) -> int:
    out_dir = Path(cfg["paths"]["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    source = Path(cfg["paths"]["corpus"])
    if not source.exists():
        raise ConfigError(f"invalid config key: paths.corpus ({source} does not exist)")
    column_map = json.loads(Path(args.column_map).read_text()) if args.column_map else None
    store = ingest_csv(source, column_map=column_map)
    corpus_path = out_dir / "corpus.jsonl"
    store.save(corpus_path)
    stats_path = out_dir / "corpus_stats.json"
    stats_path.write_text(
        json.dumps(corpus_stats(store).to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    write_manifest(
        out_dir,
        "ingest",
        [source],
        [corpus_path, corpus_path.with_suffix(".jsonl.manifest.json"), stats_path],
        {},
    )
    print(f"ingested {len(store)} records ({store.manifest.rejected} rejected) -> {corpus_path}")
    return 0


def cmd_extract(args, cfg) -> int:
    out_dir = Path(cfg["paths"]["out_dir"])
    corpus_path = require(out_dir / "corpus.jsonl", "ingest")
    store = CorpusStore.load(corpus_path)
    anchored = store.filter_by_anchor(cfg["anchor"])
    lexicon = load_lexicon(cfg)
    cands = extract_candidates(anchored, cfg["anchor"], lexicon)
    cands = aggregate_firsts(cands, anchored)
    cands = canonicalize_reversed(cands)
    cands = aggregate_firsts(cands, anchored)
    jsonl_path = out_dir / "candidates.jsonl"
    csv_path = out_dir / "candidates.csv"
    candidates_to_jsonl(cands, jsonl_path)
    candidates_to_csv(cands, csv_path)
    write_manifest(out_dir, "extract", [corpus_path], [jsonl_path, csv_path], {})
    n_bi = sum(1 for t in cands if len(t) == 2)
    print(f"extracted {len(cands)} candidates ({n_bi} bigrams, {len(cands) - n_bi} trigrams) -> {csv_path}")
    return 0


def _load_codebook(cfg, out_dir: Path) -> tuple[cb.Codebook, dict]:
    cands_path = require(out_dir / "candidates.jsonl", "extract")
    cands = candidates_from_jsonl(cands_path)
    universe = {" ".join(t) for t in cands}
    journal = cfg["paths"]["journal"] or str(out_dir / "journal.jsonl")
    book = cb.Codebook.from_journal(journal, universe)
    return book, cands


def cmd_code(args, cfg) -> int:
    out_dir = Path(cfg["paths"]["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    book, cands = _load_codebook(cfg, out_dir)
    outputs: list[Path] = []
    if args.approve_all:
        if not args.coder:
            raise ConfigError("invalid config key: --coder is required with --approve-all")
        rnd = book.state.open_round
        for term in sorted(book.state.universe):
            book.record_decision(term, args.coder, rnd, "valid", comment="bulk approval")
        print(f"recorded {len(book.state.universe)} blanket approvals by {args.coder}")
    if args.discrepancies:
        for term, verdicts in cb.detect_discrepancies(book.state):
            print(f"{term}: {verdicts}")
    if args.progress:
        print(json.dumps(book.state.progress(), indent=2, sort_keys=True))
    if args.export_validated:
        forms = cb.export_validated(book.state, cands)
        validated_jsonl = out_dir / "validated.jsonl"
        validated_csv = out_dir / "validated.csv"
        candidates_to_jsonl(forms, validated_jsonl)
        cb.validated_table_csv(forms, validated_csv)
        outputs += [validated_jsonl, validated_csv]
        print(f"exported {len(forms)} validated forms -> {validated_csv}")
    journal_path = Path(book.journal_path) if book.journal_path else None
    write_manifest(
        out_dir,
        "code",
        [out_dir / "candidates.jsonl"] + ([journal_path] if journal_path else []),
        outputs,
        {},
    )
    return 0


def _load_validated(out_dir: Path):
    path = require(out_dir / "validated.jsonl", "code --export-validated")
    return candidates_from_jsonl(path)


def cmd_metrics(args, cfg) -> int:
    out_dir = Path(cfg["paths"]["out_dir"])
    store = CorpusStore.load(require(out_dir / "corpus.jsonl", "ingest"))
    forms = _load_validated(out_dir)
    universe_size = cfg["analysis"]["discipline_universe"]
    window = cfg["analysis"]["moving_average_window"]
    outputs: list[Path] = []

    diversity = mx.diversity_per_year(forms, store)
    outputs.append(out_dir / "diversity.csv")
    diversity.to_csv(outputs[-1], "entropy")
    if len(diversity) >= window:
        smoothed = mx.moving_average(diversity, window)
        outputs.append(out_dir / "diversity_smoothed.csv")
        smoothed.to_csv(outputs[-1], "entropy")

    counts_per_year = {}
    for cand in forms.values():
        for year, n in cand.per_year_counts.items():
            counts_per_year[year] = counts_per_year.get(year, 0) + n
    pub_series = mx.YearSeries.from_mapping({y: float(n) for y, n in counts_per_year.items()})
    outputs.append(out_dir / "form_publications.csv")
    pub_series.to_csv(outputs[-1], "n_form_publications")

    growth: dict = {}
    try:
        a, b, r2 = mx.exp_fit(pub_series)
        growth["exp_fit"] = {"a": a, "b": b, "r2": r2}
    except ValueError as exc:
        growth["exp_fit"] = {"error": str(exc)}
    try:
        growth["annual_growth_rate"] = mx.annual_growth_rate(pub_series)
    except ValueError as exc:
        growth["annual_growth_rate"] = None
        growth["annual_growth_rate_error"] = str(exc)
    outputs.append(out_dir / "growth_fit.json")
    outputs[-1].write_text(json.dumps(growth, indent=2, sort_keys=True) + "\n", encoding="utf-8")

    multi = mx.multidisciplinarity_per_year(forms, store)
    outputs.append(out_dir / "multidisciplinarity.csv")
    multi.to_csv(outputs[-1], "entropy")

    max_year = max((r.year for r in store), default=0)
    outputs.append(out_dir / "transdisciplinarity.csv")
    with outputs[-1].open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["form", "transdisciplinarity", "origin_vs_dominant", "dominant_discipline"])
        for terms in sorted(forms):
            cand = forms[terms]
            try:
                value = mx.transdisciplinarity_of_form(cand, store, max_year, universe_size)
            except ValueError:
                value = ""
            writer.writerow(
                [
                    cand.term,
                    value,
                    mx.classify_origin_vs_dominant(cand, store),
                    mx.dominant_discipline(cand, store) or "",
                ]
            )

    positions = mx.PositionLexicon.bundled()
    inter = mx.intersectionality(forms, store, positions)
    outputs.append(out_dir / "intersectionality.csv")
    with outputs[-1].open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["year", "n_intersectional_pairs", "entropy"])
        entropy_by_year = dict(inter.per_year_entropy.points)
        for year in sorted(inter.per_year_pair_counts):
            writer.writerow(
                [year, inter.per_year_pair_counts[year], entropy_by_year.get(year, "")]
            )
    outputs.append(out_dir / "intersectional_forms.json")
    outputs[-1].write_text(
        json.dumps(
            {
                "intersectional_forms": sorted(inter.intersectional_forms),
                "intersectional_works": sorted(inter.intersectional_works),
                "form_categories": {k: list(v) for k, v in sorted(inter.form_categories.items()) if v},
            },
            indent=2,
            sort_keys=True,
        )
        + "\n",
        encoding="utf-8",
    )

    by_country: dict[tuple[str, str], int] = {}
    for terms in sorted(forms):
        cand = forms[terms]
        for doc_id in cand.docs:
            for country in sorted(store.by_id[doc_id].countries):
                key = (country, cand.term)
                by_country[key] = by_country.get(key, 0) + 1
    outputs.append(out_dir / "forms_by_country.csv")
    with outputs[-1].open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["country", "form", "n_publications"])
        for (country, term) in sorted(by_country, key=lambda k: (k[0], -by_country[k], k[1])):
            writer.writerow([country, term, by_country[(country, term)]])

    co_first = None
    conet_json = out_dir / "conet.json"
    if conet_json.exists():
        co_first = conet.cooccurrence_first_years(WeightedGraph.from_json(conet_json))
    stats = mx.trigram_precedence_stats(forms, co_first_years=co_first)
    precedence = {
        "n_qualifying": stats.n_qualifying,
        "n_after_bigrams": stats.n_after_bigrams,
        "frac_after_bigrams": stats.frac_after_bigrams if stats.n_qualifying else None,
        "n_after_cooccurrence": stats.n_after_cooccurrence,
        "frac_after_cooccurrence": (
            stats.frac_after_cooccurrence if stats.n_qualifying and co_first is not None else None
        ),
    }
    outputs.append(out_dir / "precedence.json")
    outputs[-1].write_text(json.dumps(precedence, indent=2, sort_keys=True) + "\n", encoding="utf-8")

    write_manifest(
        out_dir,
        "metrics",
        [out_dir / "corpus.jsonl", out_dir / "validated.jsonl"],
        outputs,
        {},
    )
    print(f"metrics written to {out_dir} ({len(outputs)} files)")
    return 0


def _export_graph(g: WeightedGraph, out_dir: Path, stem: str, partition=None) -> list[Path]:
    json_path = out_dir / f"{stem}.json"
    graphml_path = out_dir / f"{stem}.graphml"
    if partition is not None:
        for node_id in g.nodes:
            g.nodes[node_id]["community"] = partition.assignment[node_id]
    g.to_json(json_path)
    g.to_graphml(graphml_path)
    return [json_path, graphml_path]


def cmd_conet(args, cfg) -> int:
    out_dir = Path(cfg["paths"]["out_dir"])
    store = CorpusStore.load(require(out_dir / "corpus.jsonl", "ingest"))
    forms = _load_validated(out_dir)
    g = conet.build_cooccurrence(forms, store, min_weight=cfg["thresholds"]["conet_min_weight"])
    seed = cfg["seeds"]["louvain"]
    outputs: list[Path] = []
    if len(g) > 0 and g.n_edges > 0:
        table = conet.centralities(g)
        part = conet.louvain(g, resolution=cfg["analysis"]["resolution"], seed=seed)
        for node_id in g.nodes:
            degree, wdeg, btw = table[node_id]
            g.nodes[node_id].update(degree=degree, weighted_degree=wdeg, betweenness=float(btw))
        outputs += _export_graph(g, out_dir, "conet", part)
        cent_path = out_dir / "conet_centrality.csv"
        centrality_csv(table, g, cent_path)
        outputs.append(cent_path)
        try:
            rho, p = conet.path_dependence(g, centrality_table=table)
            pd_payload = {"spearman_rho_age_vs_betweenness": rho, "p_value": p}
        except ValueError as exc:
            pd_payload = {"error": str(exc)}
        pd_payload["modularity"] = part.modularity
        pd_payload["n_communities"] = part.n_communities
        pd_path = out_dir / "conet_path_dependence.json"
        pd_path.write_text(json.dumps(pd_payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        outputs.append(pd_path)
        print(
            f"co-occurrence network: {len(g)} nodes, {g.n_edges} edges, "
            f"{part.n_communities} communities (Q={part.modularity:.4f})"
        )
    else:
        outputs += _export_graph(g, out_dir, "conet")
        print(f"co-occurrence network: {len(g)} nodes, no edges")
    if args.slice_years:
        for year in args.slice_years:
            sliced = conet.temporal_slice(g, year)
            outputs += _export_graph(sliced, out_dir, f"conet_{year}")
    write_manifest(
        out_dir,
        "conet",
        [out_dir / "corpus.jsonl", out_dir / "validated.jsonl"],
        outputs,
        {"louvain": seed},
    )
    return 0


def cmd_schol(args, cfg) -> int:
    out_dir = Path(cfg["paths"]["out_dir"])
    store = CorpusStore.load(require(out_dir / "corpus.jsonl", "ingest"))
    th = cfg["thresholds"]
    seed = cfg["seeds"]["slm"]
    outputs: list[Path] = []
    exclude = set()
    if args.exclude_references and Path(args.exclude_references).exists():
        exclude = {
            line.strip()
            for line in Path(args.exclude_references).read_text(encoding="utf-8").splitlines()
            if line.strip()
        }

    builds = [
        (
            "cocitation",
            scholnet.build_cocitation(
                store, min_cocitations=th["min_cocitations"], top_k=th["top_k"], exclude_keys=exclude
            ),
            "citation_count",
        ),
        (
            "coupling",
            scholnet.build_coupling(store, min_citations=th["coupling_min"], top_k=th["top_k"]),
            "doc_count",
        ),
        (
            "coauthorship",
            scholnet.build_coauthorship_countries(store, min_docs=th["country_min_docs"]),
            "doc_count",
        ),
    ]
    for stem, g, count_attr in builds:
        partition = None
        if len(g) > 0 and g.n_edges > 0:
            partition = scholnet.slm_cluster(g, seed=seed, resolution=cfg["analysis"]["resolution"])
        outputs += _export_graph(g, out_dir, stem, partition)
        table_path = out_dir / f"{stem}.csv"
        scholnet.node_table_csv(g, partition, table_path, count_attr=count_attr)
        outputs.append(table_path)
        n_comm = partition.n_communities if partition else 0
        print(f"{stem}: {len(g)} nodes, {g.n_edges} edges, {n_comm} clusters")
    write_manifest(out_dir, "schol", [out_dir / "corpus.jsonl"], outputs, {"slm": seed})
    return 0


def cmd_ontology(args, cfg) -> int:
    out_dir = Path(cfg["paths"]["out_dir"])
    forms = _load_validated(out_dir)
    terms = sorted(" ".join(t) for t in forms)
    outputs: list[Path] = []
    embeddings_path = cfg["paths"]["embeddings"]
    if embeddings_path:
        table = onto.load_embeddings(embeddings_path, expected_terms=set(terms))
        for warning in table.warnings:
            print(f"warning: {warning}", file=sys.stderr)
        labels = table.terms
        dmatrix = onto.cosine_distance_matrix(table)
        source = f"embeddings:{table.model_tag}"
    else:
        labels, dmatrix = onto.lexical_fallback_similarity(forms)
        source = "lexical-fallback"
    dg = onto.agglomerative_complete(dmatrix, labels)
    n_clusters = min(cfg["analysis"]["n_clusters"], dg.n_leaves)
    flat = onto.cut_dendrogram(dg, n_clusters=n_clusters)

    dendro_path = out_dir / "dendrogram.json"
    dendro_path.write_text(
        json.dumps(
            {
                "distance_source": source,
                "labels": dg.labels,
                "merges": [[a, b, d, nid] for a, b, d, nid in dg.merges],
            },
            indent=2,
            sort_keys=True,
        )
        + "\n",
        encoding="utf-8",
    )
    outputs.append(dendro_path)
    clusters_path = out_dir / "clusters.csv"
    with clusters_path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["form", "cluster"])
        for label in sorted(flat):
            writer.writerow([label, flat[label]])
    outputs.append(clusters_path)

    cluster_labels_path = cfg["paths"]["cluster_labels"]
    overrides_path = cfg["paths"]["labeling"]
    if cluster_labels_path or overrides_path:
        cluster_labels = {}
        if cluster_labels_path:
            with open(cluster_labels_path, encoding="utf-8", newline="") as fh:
                reader = csv.reader(fh)
                next(reader, None)
                for row in reader:
                    if row and row[0].strip():
                        cluster_labels[int(row[0])] = row[1].strip()
        overrides = onto.load_labeling_csv(overrides_path) if overrides_path else {}
        labeling = onto.apply_labeling(flat, cluster_labels, overrides)
        net = onto.type_network(labeling)
        json_path = out_dir / "ontology.json"
        graphml_path = out_dir / "ontology.graphml"
        net.to_json(json_path)
        net.to_graphml(graphml_path)
        outputs += [json_path, graphml_path]
        print(f"ontology: {len(labeling.labels)} forms, {len(net.type_freq)} types, "
              f"{len(net.type_edges)} type-type edges")
    else:
        print(f"clustered {len(labels)} forms into {n_clusters} clusters ({source}); "
              "supply paths.cluster_labels / paths.labeling to build the typed ontology")
    write_manifest(out_dir, "ontology", [out_dir / "validated.jsonl"], outputs, {})
    return 0


def cmd_serve(args, cfg) -> int:
    from .serve import AppState, LabelingStore, serve as make_server

    out_dir = Path(cfg["paths"]["out_dir"])
    book, cands = _load_codebook(cfg, out_dir)
    corpus_path = out_dir / "corpus.jsonl"
    store = CorpusStore.load(corpus_path) if corpus_path.exists() else None
    labeling_path = out_dir / "labeling_state.json"
    universe = None
    if args.type_universe:
        universe = [
            line.strip()
            for line in Path(args.type_universe).read_text(encoding="utf-8").splitlines()
            if line.strip()
        ]
    labeling = LabelingStore(labeling_path, universe=universe)
    static_dir = Path(cfg["paths"]["static_dir"]) if cfg["paths"]["static_dir"] else None
    app = AppState(
        book,
        cands,
        store=store,
        labeling=labeling,
        token=cfg["serve"]["token"] or None,
        static_dir=static_dir,
    )
    server = make_server(app, host=cfg["serve"]["host"], port=cfg["serve"]["port"])
    host, port = server.server_address[:2]
    print(f"serving review API on http://{host}:{port} (journal: {book.journal_path})")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


def cmd_export(args, cfg) -> int:
    from .metrics import YearSeries
    from .plotting import plot_series

    if args.series:
        src = Path(args.series)
        if not src.exists():
            raise ConfigError(f"invalid config key: --series ({src} does not exist)")
        points = {}
        with src.open(encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            for row in reader:
                if row:
                    points[int(row[0])] = float(row[1])
        series = YearSeries.from_mapping(points)
        out = Path(args.plot or src.with_suffix(".png"))
        plot_series(series, out, title=src.stem, ylabel=header[1] if len(header) > 1 else "")
        print(f"plot -> {out}")
    if args.graph_json:
        src = Path(args.graph_json)
        if not src.exists():
            raise ConfigError(f"invalid config key: --graph-json ({src} does not exist)")
        g = WeightedGraph.from_json(src)
        out = Path(args.graphml or src.with_suffix(".graphml"))
        g.to_graphml(out)
        print(f"graphml -> {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="segforms",
        description="Mine anchor-term forms from a bibliographic export, validate them, "
        "and analyze the resulting research landscape.",
    )
    parser.add_argument("--config", help="TOML config file (flags override file values)")
    parser.add_argument("--out-dir", help="artifact directory (default: out)")
    parser.add_argument("--anchor", help="anchor token (default: segregation)")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("ingest", help="parse a CSV/TSV export into the corpus store")
    p.add_argument("--in", dest="corpus", help="export file path")
    p.add_argument("--column-map", help="JSON file mapping record fields to export columns")

    p = sub.add_parser("extract", help="capture candidate term forms from the corpus")
    p.add_argument("--lexicon-dir", help="directory of stop-lexicon .txt files")

    p = sub.add_parser("code", help="coding-journal operations")
    p.add_argument("--journal", help="journal JSONL path (default: <out-dir>/journal.jsonl)")
    p.add_argument("--progress", action="store_true", help="print progress summary")
    p.add_argument("--discrepancies", action="store_true", help="list conflicting candidates")
    p.add_argument("--export-validated", action="store_true", help="write validated.{jsonl,csv}")
    p.add_argument("--approve-all", action="store_true",
                   help="record a blanket 'valid' decision for every candidate")
    p.add_argument("--coder", help="coder id for --approve-all")

    p = sub.add_parser("metrics", help="diversity, growth, disciplinarity, intersectionality")
    p.add_argument("--universe-size", type=int, help="discipline universe size (default 169)")

    p = sub.add_parser("conet", help="co-occurrence network, centralities, communities")
    p.add_argument("--min-weight", type=int, help="minimum edge weight")
    p.add_argument("--seed", type=int, help="louvain seed")
    p.add_argument("--slice-years", type=int, nargs="*", help="emit temporal slices at these years")

    p = sub.add_parser("schol", help="co-citation, coupling and co-authorship networks")
    p.add_argument("--min-cocitations", type=int)
    p.add_argument("--coupling-min", type=int)
    p.add_argument("--country-min-docs", type=int)
    p.add_argument("--top-k", type=int)
    p.add_argument("--seed", type=int, help="clustering seed")
    p.add_argument("--exclude-references", help="file of reference keys to drop")

    p = sub.add_parser("ontology", help="semantic clustering and the typed ontology")
    p.add_argument("--embeddings", help="embedding JSONL file")
    p.add_argument("--n-clusters", type=int, help="dendrogram cut (default 32)")
    p.add_argument("--labels", help="per-form override CSV (form,label1..label8)")
    p.add_argument("--cluster-labels", help="CSV of cluster_id,label defaults")

    p = sub.add_parser("serve", help="run the review HTTP API")
    p.add_argument("--journal", help="journal JSONL path")
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    p.add_argument("--token", help="shared auth token")
    p.add_argument("--static", dest="static_dir", help="directory of review-UI files to serve")
    p.add_argument("--type-universe", help="file with one ontology type per line")

    p = sub.add_parser("export", help="format conversions (series plots, graphml)")
    p.add_argument("--series", help="year,value CSV to plot")
    p.add_argument("--plot", help="output image path (.png or .svg)")
    p.add_argument("--graph-json", help="graph JSON to convert")
    p.add_argument("--graphml", help="output GraphML path")

    return parser


def apply_flag_overrides(args, cfg) -> None:
    if args.out_dir:
        cfg["paths"]["out_dir"] = args.out_dir
    if args.anchor:
        cfg["anchor"] = args.anchor
    flag_map = {
        "corpus": ("paths", "corpus"),
        "journal": ("paths", "journal"),
        "embeddings": ("paths", "embeddings"),
        "labels": ("paths", "labeling"),
        "cluster_labels": ("paths", "cluster_labels"),
        "lexicon_dir": ("paths", "lexicon_dir"),
        "static_dir": ("paths", "static_dir"),
        "min_cocitations": ("thresholds", "min_cocitations"),
        "coupling_min": ("thresholds", "coupling_min"),
        "country_min_docs": ("thresholds", "country_min_docs"),
        "top_k": ("thresholds", "top_k"),
        "min_weight": ("thresholds", "conet_min_weight"),
        "universe_size": ("analysis", "discipline_universe"),
        "n_clusters": ("analysis", "n_clusters"),
        "host": ("serve", "host"),
        "port": ("serve", "port"),
        "token": ("serve", "token"),
    }
    for flag, (section, key) in flag_map.items():
        value = getattr(args, flag, None)
        if value is not None:
            cfg[section][key] = value
    if getattr(args, "seed", None) is not None:
        cfg["seeds"]["louvain"] = args.seed
        cfg["seeds"]["slm"] = args.seed
    validate_config(cfg)


COMMANDS = {
    "ingest": cmd_ingest,
    "extract": cmd_extract,
    "code": cmd_code,
    "metrics": cmd_metrics,
    "conet": cmd_conet,
    "schol": cmd_schol,
    "ontology": cmd_ontology,
    "serve": cmd_serve,
    "export": cmd_export,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        apply_flag_overrides(args, cfg)
        Path(cfg["paths"]["out_dir"]).mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.subcommand](args, cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except MissingUpstream as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISSING_UPSTREAM


if __name__ == "__main__":
    sys.exit(main())
