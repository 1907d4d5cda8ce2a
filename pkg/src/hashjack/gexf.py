"""GEXF 1.2draft serialization of one retweet network for Gephi.

Output is deterministic: nodes sorted by account id, edges by endpoint
pair, attribute ids assigned in a fixed order, no wall-clock metadata.
Cluster and side attributes appear only when a partition or labeling is
supplied; each partisan set becomes a boolean attribute defaulting to
false so Gephi filters can isolate a party directly.
"""

from __future__ import annotations

from typing import Iterable
from xml.etree import ElementTree as ET

from .community import CommunityPartition
from .graph import AccountRegistry, RetweetNetwork
from .labeling import ClusterLabeling, PartisanAssignment

XMLNS = "http://www.gexf.net/1.2draft"


def _declare(parent: ET.Element, attr_id: str, title: str, kind: str, default=None):
    el = ET.SubElement(
        parent, "attribute", {"id": attr_id, "title": title, "type": kind}
    )
    if default is not None:
        ET.SubElement(el, "default").text = default
    return el


def gexf_document(
    net: RetweetNetwork,
    registry: AccountRegistry,
    partition: CommunityPartition | None = None,
    labeling: ClusterLabeling | None = None,
    partisan_sets: Iterable[PartisanAssignment] = (),
) -> str:
    """Render the network as a GEXF 1.2 string, directed weighted edges."""
    psets = sorted(partisan_sets, key=lambda p: p.party)

    gexf = ET.Element("gexf", {"xmlns": XMLNS, "version": "1.2"})
    meta = ET.SubElement(gexf, "meta")
    ET.SubElement(meta, "creator").text = "hashjack"
    ET.SubElement(meta, "description").text = f"retweet network #{net.hashtag}"
    graph = ET.SubElement(
        gexf, "graph", {"mode": "static", "defaultedgetype": "directed"}
    )

    attrs = ET.SubElement(graph, "attributes", {"class": "node"})
    ids: dict[str, str] = {}

    def add_attr(title, kind, default=None):
        ids[title] = str(len(ids))
        _declare(attrs, ids[title], title, kind, default)

    if partition is not None:
        add_attr("cluster", "integer")
    if labeling is not None:
        add_attr("side", "string")
    for pset in psets:
        add_attr(f"partisan_#{pset.party}", "boolean", default="false")
    if not ids:
        graph.remove(attrs)

    nodes_el = ET.SubElement(graph, "nodes")
    ordered = sorted(net.nodes, key=registry.id_of)
    for node in ordered:
        account = registry.id_of(node)
        node_el = ET.SubElement(nodes_el, "node", {"id": account, "label": account})
        values = []
        if partition is not None and node in partition.assignment:
            cid = partition.assignment[node]
            values.append((ids["cluster"], str(cid)))
            if labeling is not None:
                values.append((ids["side"], labeling.labels.get(cid, "other")))
        for pset in psets:
            if node in pset.accounts:
                values.append((ids[f"partisan_#{pset.party}"], "true"))
        if values:
            holder = ET.SubElement(node_el, "attvalues")
            for attr_id, value in values:
                ET.SubElement(holder, "attvalue", {"for": attr_id, "value": value})

    edges_el = ET.SubElement(graph, "edges")
    ranked = sorted(
        net.edges.items(), key=lambda kv: (registry.id_of(kv[0][0]), registry.id_of(kv[0][1]))
    )
    for eid, ((src, dst), weight) in enumerate(ranked):
        ET.SubElement(
            edges_el,
            "edge",
            {
                "id": str(eid),
                "source": registry.id_of(src),
                "target": registry.id_of(dst),
                "weight": str(weight),
            },
        )

    ET.indent(gexf)
    body = ET.tostring(gexf, encoding="UTF-8", xml_declaration=True)
    return body.decode("utf-8") + "\n"
