"""Stage orchestration over an on-disk run directory.

A run directory holds one manifest plus the artifacts of seven stages:

    ingest -> build -> communities -> label -> polarisation | odds | activity

Each manifest entry records the stage's parameters, input digests, the
fingerprints of its prerequisite stages, and a digest per output file.
A stage fingerprint is the hash of (name, params, input digests, upstream
fingerprints), so rerunning with identical parameters is a no-op and any
parameter or input change invalidates everything downstream. `report` and
`export` are derived read-only views: they write no manifest entry and
take no lock, so they may run next to a writer.

Timestamps appear only in the manifest, never in fingerprints or in
report.json; equal inputs and parameters give byte-equal artifacts.
"""

from __future__ import annotations

import csv
import io
import os
import uuid
from datetime import datetime, timezone
from pathlib import Path
from typing import Mapping, Sequence

from .community import louvain
from .errors import EdgelessGraphError, LabelingError, StageError, RunLockError
from .gexf import gexf_document
from .graph import build_networks, undirected_projection
from .ingest import normalize_hashtag, parse_records, split_streams, corpus_stats, \
    write_jsonl, write_rejects
from .labeling import DEFAULT_MIN_COMMUNITY_SIZE, PRO, CONTRA, OTHER, \
    apply_overrides, label_by_seeds, manual_labeling, partisans, top_retweeted
from .metrics import BASIS_ACCOUNTS, BASIS_VOLUME, PolarisationProfile, \
    cluster_composition, concentration, polarisation, polarisation_shift
from .odds import hashjack_matrix
from .store import dump_json, file_digest, load_json, obj_digest, \
    labeling_from_obj, labeling_to_obj, network_from_obj, network_to_obj, \
    partition_from_obj, partition_to_obj, registry_from_obj, registry_to_obj

STAGE_ORDER = (
    "ingest", "build", "communities", "label", "polarisation", "odds", "activity"
)
PREREQS: dict[str, tuple[str, ...]] = {
    "ingest": (),
    "build": ("ingest",),
    "communities": ("build",),
    "label": ("communities",),
    "polarisation": ("label",),
    "odds": ("label",),
    "activity": ("label",),
}
DEFAULT_FRACTIONS = (0.01, 0.05, 0.1, 0.25, 0.5, 1.0)
EVIDENCE_K = 10


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds").replace(
        "+00:00", "Z"
    )


class RunLock:
    """Exclusive writer lock on a run directory, held via a pid file."""

    def __init__(self, root: Path):
        self.path = Path(root) / ".lock"

    def __enter__(self):
        self.path.parent.mkdir(parents=True, exist_ok=True)
        try:
            fd = os.open(self.path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            try:
                owner = self.path.read_text().strip() or "unknown"
            except OSError:
                owner = "unknown"
            raise RunLockError(
                f"run directory is locked by process {owner}; "
                f"remove {self.path} if that run is gone"
            ) from None
        with os.fdopen(fd, "w") as fh:
            fh.write(str(os.getpid()))
        return self

    def __exit__(self, *exc):
        self.path.unlink(missing_ok=True)
        return False


class RunDir:
    """Paths and manifest access for one run directory."""

    def __init__(self, root: Path | str):
        self.root = Path(root)

    @property
    def manifest_path(self) -> Path:
        return self.root / "manifest.json"

    def load_manifest(self) -> dict:
        if self.manifest_path.exists():
            return load_json(self.manifest_path)
        return {
            "run_id": uuid.uuid4().hex[:12],
            "created": _now(),
            "tracked": [],
            "stages": {},
        }

    def save_manifest(self, manifest: dict) -> None:
        dump_json(manifest, self.manifest_path)


# -- manifest bookkeeping -----------------------------------------------

def _fingerprint(name: str, params, inputs, upstream) -> str:
    return obj_digest(
        {"stage": name, "params": params, "inputs": inputs, "upstream": upstream}
    )


def _outputs_ok(run: RunDir, entry: Mapping) -> bool:
    for rel, digest in entry["outputs"].items():
        path = run.root / rel
        if not path.exists() or file_digest(path) != digest:
            return False
    return True


def _chain_valid(manifest: Mapping, name: str) -> bool:
    """Entry exists and its recorded upstream fingerprints still hold."""
    entry = manifest["stages"].get(name)
    if entry is None:
        return False
    for dep in PREREQS[name]:
        if not _chain_valid(manifest, dep):
            return False
        recorded = entry["upstream"].get(dep)
        if recorded != manifest["stages"][dep]["fingerprint"]:
            return False
    return True


def _drop_stale(manifest: dict) -> None:
    for name in STAGE_ORDER:
        if name in manifest["stages"] and not _chain_valid(manifest, name):
            del manifest["stages"][name]


def require_stage(run: RunDir, manifest: Mapping, name: str) -> dict:
    """The valid manifest entry for a prerequisite, or an actionable error."""
    entry = manifest["stages"].get(name)
    if entry is None or not _chain_valid(manifest, name):
        raise StageError(f"stage '{name}' has not been run; run `hashjack {name}` first")
    if not _outputs_ok(run, entry):
        raise StageError(
            f"artifacts of stage '{name}' are missing or modified; "
            f"rerun `hashjack {name}`"
        )
    return entry


def run_stage(run, name, params, execute, inputs=None, source=None):
    """Execute one writer stage under the run lock.

    Returns (ran, entry). A stage whose fingerprint matches the recorded
    entry and whose outputs are intact is skipped. After a real run every
    stage whose upstream chain no longer matches is dropped from the
    manifest.
    """
    inputs = inputs or {}
    with RunLock(run.root):
        manifest = run.load_manifest()
        upstream = {}
        for dep in PREREQS[name]:
            upstream[dep] = require_stage(run, manifest, dep)["fingerprint"]
        fp = _fingerprint(name, params, inputs, upstream)
        entry = manifest["stages"].get(name)
        if entry is not None and entry["fingerprint"] == fp and _outputs_ok(run, entry):
            return False, entry
        outputs = execute(run, manifest, params)
        entry = {
            "params": params,
            "inputs": inputs,
            "upstream": upstream,
            "fingerprint": fp,
            "outputs": outputs,
            "completed": _now(),
        }
        if source is not None:
            entry["source"] = source
        manifest["stages"][name] = entry
        _drop_stale(manifest)
        run.save_manifest(manifest)
        return True, entry


# -- artifact loading ---------------------------------------------------

def _built_tags(entry: Mapping) -> list[str]:
    out = entry["params"]["out"]
    tags = []
    for rel in entry["outputs"]:
        name = rel[len(out) + 1:]
        if name != "registry.json":
            tags.append(name[: -len(".json")])
    return sorted(tags)


def _load_registry(run: RunDir, build_entry: Mapping):
    path = run.root / build_entry["params"]["out"] / "registry.json"
    return registry_from_obj(load_json(path))


def _load_network(run: RunDir, build_entry: Mapping, tag: str):
    path = run.root / build_entry["params"]["out"] / f"{tag}.json"
    if not path.exists():
        raise StageError(f"no network built for #{tag}; check `--tracked` at ingest")
    return network_from_obj(load_json(path))


def _load_partition(run, communities_entry, tag, registry):
    path = run.root / communities_entry["params"]["out"] / f"{tag}.json"
    if not path.exists():
        raise StageError(
            f'no partition for #{tag}; run `hashjack communities --network "#{tag}"`'
        )
    return partition_from_obj(load_json(path), registry)


def _load_labeling(run, label_entry, tag):
    path = run.root / label_entry["params"]["out"] / f"{tag}.json"
    if not path.exists():
        raise StageError(f"no labeling for #{tag}; run `hashjack label apply` on it")
    labeling, _ = labeling_from_obj(load_json(path))
    return labeling


def _labeled_tags(entry: Mapping) -> list[str]:
    out = entry["params"]["out"]
    return sorted(rel[len(out) + 1: -len(".json")] for rel in entry["outputs"])


def _read_corpus(run: RunDir, ingest_entry: Mapping):
    rel = ingest_entry["params"]["out"] + "/corpus.jsonl"
    with open(run.root / rel, encoding="utf-8") as fh:
        records, rejects = parse_records(fh, "jsonl")
    if rejects:
        raise StageError(f"stored corpus {rel} is corrupt; rerun `hashjack ingest`")
    return records


# -- writer stages ------------------------------------------------------

def stage_ingest(run, input_path, tracked, fmt="jsonl", strict=False, out="store"):
    """Parse, validate and normalize a corpus into the run directory."""
    input_path = Path(input_path)
    if not input_path.exists():
        raise StageError(f"input file not found: {input_path}")
    tags = sorted({normalize_hashtag(t) for t in tracked})
    if not tags:
        raise StageError("at least one tracked hashtag is required")
    params = {"format": fmt, "tracked": tags, "strict": bool(strict), "out": out}
    inputs = {"corpus": file_digest(input_path)}

    def execute(run, manifest, params):
        with open(input_path, encoding="utf-8") as fh:
            records, rejects = parse_records(fh, fmt, strict=strict)
        if rejects:
            reject_path = input_path.with_name(input_path.name + ".rejects.jsonl")
            with open(reject_path, "w", encoding="utf-8") as fh:
                write_rejects(rejects, fh)
        if not records:
            raise StageError("no valid records in input")
        corpus_rel = f"{out}/corpus.jsonl"
        buffer = io.StringIO()
        write_jsonl(records, buffer)
        target = run.root / corpus_rel
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(buffer.getvalue(), encoding="utf-8")
        stats_rel = f"{out}/stats.json"
        stats = corpus_stats(records).to_dict()
        stats["reject_count"] = len(rejects)
        dump_json(stats, run.root / stats_rel)
        manifest["tracked"] = tags
        return {
            corpus_rel: file_digest(target),
            stats_rel: file_digest(run.root / stats_rel),
        }

    return run_stage(
        run, "ingest", params, execute, inputs=inputs, source=str(input_path)
    )


def stage_build(run, out="networks"):
    """Split the corpus into per-hashtag streams and build the networks."""
    params = {"out": out}

    def execute(run, manifest, params):
        ingest_entry = require_stage(run, manifest, "ingest")
        records = _read_corpus(run, ingest_entry)
        streams, _ = split_streams(records, ingest_entry["params"]["tracked"])
        streams = {tag: recs for tag, recs in streams.items() if recs}
        if not streams:
            raise StageError("no tracked hashtag appears in the corpus")
        nets, registry = build_networks(streams)
        outputs = {}
        rel = f"{out}/registry.json"
        dump_json(registry_to_obj(registry), run.root / rel)
        outputs[rel] = file_digest(run.root / rel)
        for tag in sorted(nets):
            rel = f"{out}/{tag}.json"
            dump_json(network_to_obj(nets[tag]), run.root / rel)
            outputs[rel] = file_digest(run.root / rel)
        return outputs

    return run_stage(run, "build", params, execute)


def stage_communities(run, networks=None, resolution=1.0, seed=42, out="partitions"):
    """Cluster the requested networks; untouched ones keep their artifacts."""
    if resolution <= 0:
        raise StageError("resolution must be positive")
    manifest = run.load_manifest()
    build_entry = require_stage(run, manifest, "build")
    built = _built_tags(build_entry)
    targets = built if networks is None else sorted(
        {normalize_hashtag(t) for t in networks}
    )
    for tag in targets:
        if tag not in built:
            raise StageError(
                f"#{tag} is not a built network; available: "
                + ", ".join("#" + t for t in built)
            )
    merged: dict[str, dict] = {}
    if _chain_valid(manifest, "communities"):
        prev = manifest["stages"]["communities"]
        if prev["params"]["out"] == out:
            merged = dict(prev["params"]["networks"])
    for tag in targets:
        merged[tag] = {"resolution": float(resolution), "seed": int(seed)}
    params = {"networks": dict(sorted(merged.items())), "out": out}

    def execute(run, manifest, params):
        build_entry = require_stage(run, manifest, "build")
        registry = _load_registry(run, build_entry)
        prev = manifest["stages"].get("communities", {})
        prev_networks = prev.get("params", {}).get("networks", {})
        prev_outputs = prev.get("outputs", {})
        outputs = {}
        for tag, opts in params["networks"].items():
            rel = f"{out}/{tag}.json"
            path = run.root / rel
            if (
                prev_networks.get(tag) == opts
                and rel in prev_outputs
                and path.exists()
                and file_digest(path) == prev_outputs[rel]
            ):
                outputs[rel] = prev_outputs[rel]
                continue
            net = _load_network(run, build_entry, tag)
            try:
                partition = louvain(
                    undirected_projection(net), resolution=opts["resolution"],
                    seed=opts["seed"],
                )
            except EdgelessGraphError:
                raise StageError(f"#{tag} has no retweet edges to cluster") from None
            dump_json(partition_to_obj(partition, registry, tag), path)
            outputs[rel] = file_digest(path)
        return outputs

    return run_stage(run, "communities", params, execute)


def normalize_label_request(obj: Mapping) -> tuple[str, dict]:
    """Validate one labels.json entry into (tag, canonical request)."""
    allowed = {"network", "seeds", "labels", "min_community_size"}
    unknown = set(obj) - allowed
    if unknown:
        raise LabelingError(f"unknown labels.json keys: {sorted(unknown)}")
    if "network" not in obj:
        raise LabelingError("labels.json entry is missing 'network'")
    tag = normalize_hashtag(obj["network"])
    request: dict = {"seeds": {"pro": [], "contra": []}, "labels": {}}
    seeds = obj.get("seeds") or {}
    for side in seeds:
        if side not in (PRO, CONTRA):
            raise LabelingError(f"seed side must be pro or contra, got {side!r}")
        request["seeds"][side] = sorted(map(str, seeds[side]))
    labels = obj.get("labels") or {}
    for cid, label in labels.items():
        if label not in (PRO, CONTRA, OTHER):
            raise LabelingError(f"community label must be pro/contra/other, got {label!r}")
        request["labels"][str(int(cid))] = label
    if not (request["labels"] or request["seeds"]["pro"] or request["seeds"]["contra"]):
        raise LabelingError(f"labels.json entry for #{tag} has neither seeds nor labels")
    if "min_community_size" in obj:
        request["min_community_size"] = int(obj["min_community_size"])
    return tag, request


def stage_label(run, requests: Sequence[Mapping], out="labels"):
    """Apply seed lists and manual overrides, writing one labeling per network."""
    normalized = dict(normalize_label_request(obj) for obj in requests)
    if not normalized:
        raise StageError("labels.json contains no entries")
    manifest = run.load_manifest()
    merged: dict[str, dict] = {}
    if _chain_valid(manifest, "label"):
        prev = manifest["stages"]["label"]
        if prev["params"]["out"] == out:
            merged = dict(prev["params"]["networks"])
    merged.update(normalized)
    params = {"networks": dict(sorted(merged.items())), "out": out}

    def execute(run, manifest, params):
        build_entry = require_stage(run, manifest, "build")
        communities_entry = require_stage(run, manifest, "communities")
        registry = _load_registry(run, build_entry)
        prev = manifest["stages"].get("label", {})
        prev_networks = prev.get("params", {}).get("networks", {})
        prev_outputs = prev.get("outputs", {})
        outputs = {}
        for tag, request in params["networks"].items():
            rel = f"{out}/{tag}.json"
            path = run.root / rel
            if (
                prev_networks.get(tag) == request
                and rel in prev_outputs
                and path.exists()
                and file_digest(path) == prev_outputs[rel]
            ):
                outputs[rel] = prev_outputs[rel]
                continue
            partition = _load_partition(run, communities_entry, tag, registry)
            net = _load_network(run, build_entry, tag)
            ranked = top_retweeted(net, partition, EVIDENCE_K, registry)
            evidence = {cid: tuple(rows) for cid, rows in ranked.items()}
            seeds = request["seeds"]
            overrides = {int(cid): label for cid, label in request["labels"].items()}
            if seeds["pro"] or seeds["contra"]:
                labeling = label_by_seeds(
                    partition,
                    seeds["pro"],
                    seeds["contra"],
                    registry,
                    network=tag,
                    min_community_size=request.get(
                        "min_community_size", DEFAULT_MIN_COMMUNITY_SIZE
                    ),
                    evidence=evidence,
                )
                if overrides:
                    labeling = apply_overrides(labeling, overrides)
            else:
                labeling = manual_labeling(
                    partition, overrides, network=tag, evidence=evidence
                )
            dump_json(labeling_to_obj(labeling, seeds=seeds), path)
            outputs[rel] = file_digest(path)
        return outputs

    return run_stage(run, "label", params, execute)


def _profile_from_row(row: Mapping) -> PolarisationProfile:
    return PolarisationProfile(
        network=normalize_hashtag(row["network"]),
        basis=row["basis"],
        share_pro=row["share_pro"],
        share_contra=row["share_contra"],
        share_other=row["share_other"],
        total=row["total"],
    )


def stage_polarisation(run, threshold=0.05, compare=None, out="polarisation.json"):
    """Pro/contra/other shares for every labeled network, on both bases."""
    params: dict = {"threshold": float(threshold), "out": out}
    inputs = {}
    if compare is not None:
        compare = Path(compare)
        if not compare.exists():
            raise StageError(f"comparison file not found: {compare}")
        inputs["compare"] = file_digest(compare)

    def execute(run, manifest, params):
        build_entry = require_stage(run, manifest, "build")
        communities_entry = require_stage(run, manifest, "communities")
        label_entry = require_stage(run, manifest, "label")
        registry = _load_registry(run, build_entry)
        rows = []
        for tag in _labeled_tags(label_entry):
            net = _load_network(run, build_entry, tag)
            partition = _load_partition(run, communities_entry, tag, registry)
            labeling = _load_labeling(run, label_entry, tag)
            for basis in (BASIS_VOLUME, BASIS_ACCOUNTS):
                rows.append(polarisation(net, partition, labeling, basis).to_dict())
        obj: dict = {"profiles": rows}
        if compare is not None:
            try:
                earlier = {
                    (r["network"], r["basis"]): r
                    for r in load_json(compare)["profiles"]
                }
            except (OSError, ValueError, KeyError, TypeError):
                raise StageError(
                    f"{compare} is not a polarisation artifact"
                ) from None
            shifts = []
            for row in rows:
                old = earlier.get((row["network"], row["basis"]))
                if old is None:
                    continue
                shifts.append(
                    polarisation_shift(
                        _profile_from_row(old),
                        _profile_from_row(row),
                        threshold=params["threshold"],
                    )
                )
            obj["shift"] = shifts
        dump_json(obj, run.root / out)
        return {out: file_digest(run.root / out)}

    return run_stage(
        run, "polarisation", params, execute, inputs=inputs,
        source=None if compare is None else str(compare),
    )


def _split_parties(run, manifest, targets):
    """(partisan sets of the non-target labeled networks, loaded targets)."""
    build_entry = require_stage(run, manifest, "build")
    label_entry = require_stage(run, manifest, "label")
    registry = _load_registry(run, build_entry)
    labeled = _labeled_tags(label_entry)
    for tag in targets:
        if tag not in labeled:
            raise StageError(
                f"target #{tag} has no labeling; run `hashjack label apply` on it"
            )
    parties = [tag for tag in labeled if tag not in targets]
    if not parties:
        raise StageError(
            "every labeled network is a target; label at least one party network"
        )
    communities_entry = require_stage(run, manifest, "communities")
    psets = []
    for tag in parties:
        partition = _load_partition(run, communities_entry, tag, registry)
        labeling = _load_labeling(run, label_entry, tag)
        psets.append(partisans(labeling, partition))
    loaded = {}
    for tag in targets:
        net = _load_network(run, build_entry, tag)
        partition = _load_partition(run, communities_entry, tag, registry)
        labeling = _load_labeling(run, label_entry, tag)
        loaded[tag] = (net, partition, labeling)
    return registry, psets, loaded


def stage_odds(run, targets, out="odds.json"):
    """Estimate the partisan-vs-contra odds matrix over the target networks."""
    tags = sorted({normalize_hashtag(t) for t in targets})
    if not tags:
        raise StageError("at least one target hashtag is required")
    params = {"targets": tags, "out": out}

    def execute(run, manifest, params):
        _, psets, loaded = _split_parties(run, manifest, tags)
        estimates = hashjack_matrix(psets, loaded)
        obj = {
            "targets": ["#" + t for t in tags],
            "rows": [estimate.to_dict() for estimate in estimates],
        }
        dump_json(obj, run.root / out)
        return {out: file_digest(run.root / out)}

    return run_stage(run, "odds", params, execute)


def stage_activity(run, targets=None, fractions=DEFAULT_FRACTIONS, out="activity.json"):
    """Concentration curves for each party's partisans over all networks."""
    manifest = run.load_manifest()
    if targets is None:
        if _chain_valid(manifest, "odds"):
            tags = manifest["stages"]["odds"]["params"]["targets"]
        else:
            raise StageError("pass --targets, or run `hashjack odds` first")
    else:
        tags = sorted({normalize_hashtag(t) for t in targets})
    fracs = sorted({float(q) for q in fractions})
    if not fracs or fracs[0] <= 0 or fracs[-1] > 1:
        raise StageError("fractions must lie in (0, 1]")
    params = {"targets": tags, "fractions": fracs, "out": out}

    def execute(run, manifest, params):
        build_entry = require_stage(run, manifest, "build")
        registry, psets, _ = _split_parties(run, manifest, tags)
        nets = [
            _load_network(run, build_entry, tag) for tag in _built_tags(build_entry)
        ]
        curves = [
            concentration(pset, nets, fracs, registry).to_dict()
            for pset in sorted(psets, key=lambda p: p.party)
        ]
        obj = {"fractions": fracs, "curves": curves}
        dump_json(obj, run.root / out)
        return {out: file_digest(run.root / out)}

    return run_stage(run, "activity", params, execute)


# -- derived views (no lock, no manifest entry) -------------------------

def _csv_text(header, rows) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(["" if v is None else v for v in row])
    return buffer.getvalue()


def write_report(run: RunDir, out="report.json", top_k=100):
    """Bundle every metric artifact plus one plot-ready CSV per figure."""
    manifest = run.load_manifest()
    for name in ("polarisation", "odds", "activity"):
        require_stage(run, manifest, name)
    build_entry = manifest["stages"]["build"]
    registry = _load_registry(run, build_entry)

    polar = load_json(run.root / manifest["stages"]["polarisation"]["params"]["out"])
    odds_obj = load_json(run.root / manifest["stages"]["odds"]["params"]["out"])
    act = load_json(run.root / manifest["stages"]["activity"]["params"]["out"])

    targets = manifest["stages"]["odds"]["params"]["targets"]
    _, psets, loaded = _split_parties(run, manifest, targets)
    pset_map = {p.party: p for p in psets}
    compositions = {}
    for tag in targets:
        net, partition, labeling = loaded[tag]
        contra_cid = labeling.contra_community
        if contra_cid is None:
            continue
        members = partition.members(contra_cid)
        report = cluster_composition(members, pset_map, net, top_k, registry)
        compositions["#" + tag] = report.to_dict()

    bundle = {
        "polarisation": polar,
        "odds": odds_obj,
        "activity": act,
        "compositions": compositions,
        "stages": {
            name: manifest["stages"][name]["fingerprint"]
            for name in STAGE_ORDER
            if name in manifest["stages"]
        },
    }
    report_path = run.root / out
    dump_json(bundle, report_path)

    fig1 = _csv_text(
        (
            "network", "basis", "share_pro", "share_contra", "share_other",
            "share_pro_excl_other", "share_contra_excl_other", "total",
        ),
        [
            (
                r["network"], r["basis"], r["share_pro"], r["share_contra"],
                r["share_other"], r["share_pro_excl_other"],
                r["share_contra_excl_other"], r["total"],
            )
            for r in polar["profiles"]
        ],
    )
    fig3a = _csv_text(
        (
            "party", "target", "a", "b", "c", "d",
            "odds_ratio", "ci_low", "ci_high", "flags",
        ),
        [
            (
                r["party"], r["target"], r.get("a"), r.get("b"), r.get("c"),
                r.get("d"), r["or"], r["ci_low"], r["ci_high"],
                "|".join(r["flags"]),
            )
            for r in odds_obj["rows"]
        ],
    )
    fig3b = _csv_text(
        ("group", "fraction", "share"),
        [
            (curve["group"], point[0], point[1])
            for curve in act["curves"]
            for point in curve["points"]
        ],
    )
    base = report_path.parent
    (base / "fig1.csv").write_text(fig1, encoding="utf-8")
    (base / "fig3a.csv").write_text(fig3a, encoding="utf-8")
    (base / "fig3b.csv").write_text(fig3b, encoding="utf-8")
    return report_path


def write_gexf(run: RunDir, network: str, out_path: Path | str):
    """Export one network with cluster, side and partisan annotations."""
    tag = normalize_hashtag(network)
    manifest = run.load_manifest()
    build_entry = require_stage(run, manifest, "build")
    registry = _load_registry(run, build_entry)
    net = _load_network(run, build_entry, tag)

    partition = labeling = None
    if _chain_valid(manifest, "communities"):
        rel = manifest["stages"]["communities"]["params"]["out"] + f"/{tag}.json"
        if (run.root / rel).exists():
            partition = partition_from_obj(load_json(run.root / rel), registry)
    if partition is not None and _chain_valid(manifest, "label"):
        rel = manifest["stages"]["label"]["params"]["out"] + f"/{tag}.json"
        if (run.root / rel).exists():
            labeling, _ = labeling_from_obj(load_json(run.root / rel))

    psets = []
    if partition is not None and _chain_valid(manifest, "label"):
        label_entry = manifest["stages"]["label"]
        communities_entry = manifest["stages"]["communities"]
        for other in _labeled_tags(label_entry):
            if other == tag:
                continue
            other_labeling = _load_labeling(run, label_entry, other)
            if other_labeling.pro_community is None:
                continue
            other_partition = _load_partition(run, communities_entry, other, registry)
            psets.append(partisans(other_labeling, other_partition))

    doc = gexf_document(
        net, registry, partition=partition, labeling=labeling, partisan_sets=psets
    )
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text(doc, encoding="utf-8")
    return out_path


def label_report(run: RunDir, network: str, top=50) -> str:
    """Human-readable evidence listing used to pick seeds; writes nothing."""
    tag = normalize_hashtag(network)
    manifest = run.load_manifest()
    build_entry = require_stage(run, manifest, "build")
    communities_entry = require_stage(run, manifest, "communities")
    registry = _load_registry(run, build_entry)
    net = _load_network(run, build_entry, tag)
    partition = _load_partition(run, communities_entry, tag, registry)
    ranked = top_retweeted(net, partition, top, registry)
    sizes = {cid: len(members) for cid, members in partition.communities().items()}
    lines = [
        f"#{tag}: {len(net.nodes)} accounts, {partition.n_communities} communities, "
        f"modularity {partition.modularity:.4f}"
    ]
    for cid in sorted(ranked):
        lines.append(f"community {cid} ({sizes[cid]} accounts)")
        for account, count in ranked[cid]:
            lines.append(f"  {count:8d}  {account}")
    return "\n".join(lines) + "\n"
