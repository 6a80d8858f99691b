"""Network topology: nodes with roles, directed resistive links, validation,
builders for the stock experiments, and a JSON file format.

A link ``i -> j`` carries one element whose applied voltage is V_i - V_j;
direction only fixes that sign convention, the conductance itself is
bidirectional. Node roles: EXTERNAL nodes take a drive voltage, GROUNDED
nodes are held at 0 V, INTERNAL nodes float and are solved for.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from typing import Sequence

from .elements import MemristorParams


class NodeRole(enum.Enum):
    EXTERNAL = "external"
    GROUNDED = "grounded"
    INTERNAL = "internal"


@dataclass(frozen=True)
class Link:
    """Directed link carrying one element. Voltage convention V = V_from - V_to."""

    from_node: int
    to_node: int
    params: MemristorParams


@dataclass(frozen=True)
class Network:
    """Immutable node/link lists in declaration order."""

    nodes: tuple  # of (node_id, NodeRole)
    links: tuple  # of Link

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "links", tuple(self.links))

    @property
    def node_ids(self) -> tuple:
        return tuple(nid for nid, _ in self.nodes)

    @property
    def roles(self) -> dict:
        return {nid: role for nid, role in self.nodes}

    def nodes_with_role(self, role: NodeRole) -> tuple:
        return tuple(nid for nid, r in self.nodes if r is role)

    @property
    def external_nodes(self) -> tuple:
        return self.nodes_with_role(NodeRole.EXTERNAL)

    @property
    def grounded_nodes(self) -> tuple:
        return self.nodes_with_role(NodeRole.GROUNDED)

    @property
    def internal_nodes(self) -> tuple:
        return self.nodes_with_role(NodeRole.INTERNAL)


def validate(network: Network) -> list:
    """Structural checks. Returns a list of violation strings, empty if OK.

    Checks: unique node ids, link endpoints exist, no self-loops, no duplicate
    directed links, at least one fixed-voltage (external or grounded) node,
    and every internal node connected through the link graph to some fixed
    node (otherwise the nodal system is singular).
    """
    violations = []
    seen = set()
    for nid, _ in network.nodes:
        if nid in seen:
            violations.append(f"duplicate node id {nid}")
        seen.add(nid)
    ids = set(network.node_ids)

    seen_links = set()
    for link in network.links:
        name = f"{link.from_node}->{link.to_node}"
        if link.from_node not in ids:
            violations.append(f"link {name}: unknown node {link.from_node}")
        if link.to_node not in ids:
            violations.append(f"link {name}: unknown node {link.to_node}")
        if link.from_node == link.to_node:
            violations.append(f"link {name}: self-loop at node {link.from_node}")
        if (link.from_node, link.to_node) in seen_links:
            violations.append(f"duplicate link {name}")
        seen_links.add((link.from_node, link.to_node))

    fixed = [
        nid
        for nid, role in network.nodes
        if role in (NodeRole.EXTERNAL, NodeRole.GROUNDED)
    ]
    if not fixed:
        violations.append("no external or grounded node: nodal system is singular")
        return violations

    # Reachability from the fixed nodes over the undirected link graph.
    neighbors = {nid: set() for nid in ids}
    for link in network.links:
        if link.from_node in ids and link.to_node in ids:
            neighbors[link.from_node].add(link.to_node)
            neighbors[link.to_node].add(link.from_node)
    reached = set(fixed)
    frontier = list(fixed)
    while frontier:
        node = frontier.pop()
        for nxt in neighbors[node]:
            if nxt not in reached:
                reached.add(nxt)
                frontier.append(nxt)
    for nid in network.internal_nodes:
        if nid not in reached:
            violations.append(
                f"node {nid} has no path to a fixed-voltage node"
            )
    return violations


# --- stock networks ---------------------------------------------------------

# Series benchmark: drive -- 10 kOhm resistor -- memristor -- ground. The
# memristive element swings over [675, 10000] ohm with a 4 V threshold and
# equal slopes (146 kOhm per volt-second), starting at the upper limit.
BENCHMARK_SERIES_RESISTANCE = 10_000.0
BENCHMARK_MEMRISTOR = MemristorParams(
    alpha=146_000.0,
    beta=146_000.0,
    v_threshold=4.0,
    r_min=675.0,
    r_max=10_000.0,
    r_init=10_000.0,
)


def build_series_benchmark() -> Network:
    """Three nodes in series: external (1), internal (2), grounded (3)."""
    nodes = (
        (1, NodeRole.EXTERNAL),
        (2, NodeRole.INTERNAL),
        (3, NodeRole.GROUNDED),
    )
    links = (
        Link(1, 2, MemristorParams.passive(BENCHMARK_SERIES_RESISTANCE)),
        Link(2, 3, BENCHMARK_MEMRISTOR),
    )
    return Network(nodes, links)


# 3x3x3 cube of 27 nodes and 54 directed memristive links. Per-link columns:
# from, to, v_threshold (V), alpha, beta (ohm per volt-second). Every element
# is limited to [1.45, 1.55] ohm and starts at 1.5 ohm.
CUBE_R_MIN = 1.45
CUBE_R_MAX = 1.55
CUBE_R_INIT = 1.5

_CUBE_LINK_TABLE = (
    (10, 1, 0.374442, 0.339527, 0.76859),
    (1, 2, 0.338867, 0.766728, 1.681),
    (4, 1, 0.916852, 0.190449, 1.01836),
    (2, 3, 0.395556, 0.59712, 0.715665),
    (2, 5, 0.957822, 0.552519, 1.38086),
    (2, 11, 0.456982, 0.197251, 0.499046),
    (12, 3, 0.509442, 0.193125, 0.38095),
    (3, 6, 0.129586, 0.379953, 0.580798),
    (4, 7, 0.63842, 0.816642, 1.21164),
    (4, 5, 0.497659, 0.89305, 1.24712),
    (4, 13, 0.812996, 0.836584, 1.11225),
    (5, 8, 0.312802, 0.599889, 0.799181),
    (14, 5, 0.424215, 0.973887, 1.53969),
    (5, 6, 0.211621, 0.656048, 0.761047),
    (9, 6, 0.95086, 0.670889, 0.970032),
    (6, 15, 0.501306, 0.433332, 0.782898),
    (16, 7, 0.746284, 0.571936, 1.28032),
    (7, 8, 0.367929, 0.584094, 1.23548),
    (8, 17, 0.607931, 0.824092, 1.78827),
    (8, 9, 0.955427, 0.970764, 1.62366),
    (9, 18, 0.734346, 0.553811, 0.963794),
    (10, 19, 0.348097, 0.603011, 0.71191),
    (10, 11, 0.63911, 0.522766, 0.656083),
    (13, 10, 0.983575, 0.770146, 1.51798),
    (11, 14, 0.125702, 0.702939, 1.50984),
    (11, 12, 0.292193, 0.603787, 1.14385),
    (20, 11, 0.363118, 0.711326, 1.61589),
    (15, 12, 0.459023, 0.830813, 1.71065),
    (12, 21, 0.248844, 0.716935, 0.964279),
    (13, 22, 0.591142, 0.685118, 0.850874),
    (14, 13, 0.417162, 0.503876, 1.20527),
    (16, 13, 0.330005, 0.188323, 1.12526),
    (14, 15, 0.640415, 0.889584, 1.77304),
    (14, 17, 0.268105, 0.826208, 0.946175),
    (14, 23, 0.976, 0.920302, 1.71634),
    (24, 15, 0.124989, 0.257296, 0.473974),
    (15, 18, 0.761428, 0.73645, 1.17762),
    (25, 16, 0.848135, 0.475557, 1.45515),
    (17, 16, 0.134474, 0.606631, 1.58427),
    (26, 17, 0.879447, 0.610327, 0.764154),
    (17, 18, 0.80575, 0.205049, 0.8331),
    (18, 27, 0.164033, 0.458028, 1.00478),
    (20, 19, 0.263635, 0.958362, 1.59943),
    (19, 22, 0.319153, 0.679248, 0.933867),
    (23, 20, 0.374859, 0.436996, 0.831076),
    (21, 20, 0.110315, 0.223772, 0.589538),
    (21, 24, 0.448737, 0.352571, 0.710772),
    (22, 23, 0.803082, 0.646101, 0.806519),
    (25, 22, 0.655003, 0.947564, 1.39472),
    (23, 24, 0.394366, 0.693992, 1.68974),
    (23, 26, 0.790899, 0.792383, 1.54045),
    (24, 27, 0.587119, 0.493326, 0.967518),
    (26, 25, 0.253639, 0.787869, 1.65719),
    (27, 26, 0.388202, 0.511768, 0.809962),
)


def build_cube() -> Network:
    """The 27-node cube: nodes 1-3 driven, node 4 grounded, rest internal."""
    nodes = []
    for nid in range(1, 28):
        if nid <= 3:
            role = NodeRole.EXTERNAL
        elif nid == 4:
            role = NodeRole.GROUNDED
        else:
            role = NodeRole.INTERNAL
        nodes.append((nid, role))
    links = tuple(
        Link(
            src,
            dst,
            MemristorParams(
                alpha=alpha,
                beta=beta,
                v_threshold=v_t,
                r_min=CUBE_R_MIN,
                r_max=CUBE_R_MAX,
                r_init=CUBE_R_INIT,
            ),
        )
        for src, dst, v_t, alpha, beta in _CUBE_LINK_TABLE
    )
    return Network(tuple(nodes), links)


# --- file format -------------------------------------------------------------


class NetworkFormatError(Exception):
    """Raised when a network file cannot be parsed into a Network."""


class NetworkValidationError(Exception):
    """Raised when a parsed network fails structural validation."""

    def __init__(self, violations: Sequence):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


def store(network: Network) -> str:
    """Serialize to deterministic JSON: nodes ascending by id, links in
    declaration order."""
    doc = {
        "nodes": [
            {"id": nid, "role": role.value}
            for nid, role in sorted(network.nodes, key=lambda pair: pair[0])
        ],
        "links": [
            {
                "from": link.from_node,
                "to": link.to_node,
                "v_t": link.params.v_threshold,
                "alpha": link.params.alpha,
                "beta": link.params.beta,
                "r_min": link.params.r_min,
                "r_max": link.params.r_max,
                "r_init": link.params.r_init,
            }
            for link in network.links
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def _require(condition, message):
    if not condition:
        raise NetworkFormatError(message)


def load(text: str) -> Network:
    """Parse the JSON network format; inverse of store.

    Raises NetworkFormatError with a line/column position for malformed JSON
    and with the offending node/link named for schema problems, and
    NetworkValidationError if the parsed network fails validate().
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise NetworkFormatError(
            f"malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from None
    _require(isinstance(doc, dict), "top level must be an object")
    _require("nodes" in doc, "missing 'nodes' list")
    _require("links" in doc, "missing 'links' list")
    _require(isinstance(doc["nodes"], list), "'nodes' must be a list")
    _require(isinstance(doc["links"], list), "'links' must be a list")

    nodes = []
    for pos, entry in enumerate(doc["nodes"]):
        _require(isinstance(entry, dict), f"node #{pos} must be an object")
        _require("id" in entry, f"node #{pos} missing 'id'")
        _require("role" in entry, f"node #{pos} missing 'role'")
        nid = entry["id"]
        _require(
            isinstance(nid, int) and not isinstance(nid, bool),
            f"node #{pos}: id must be an integer, got {nid!r}",
        )
        try:
            role = NodeRole(entry["role"])
        except ValueError:
            raise NetworkFormatError(
                f"node {nid}: unknown role {entry['role']!r}"
            ) from None
        nodes.append((nid, role))

    links = []
    required = ("from", "to", "v_t", "alpha", "beta", "r_min", "r_max", "r_init")
    for pos, entry in enumerate(doc["links"]):
        _require(isinstance(entry, dict), f"link #{pos} must be an object")
        for key in required:
            _require(key in entry, f"link #{pos} missing '{key}'")
        for key in ("from", "to"):
            val = entry[key]
            _require(
                isinstance(val, int) and not isinstance(val, bool),
                f"link #{pos}: '{key}' must be an integer, got {val!r}",
            )
        name = f"{entry['from']}->{entry['to']}"
        for key in required[2:]:
            _require(
                isinstance(entry[key], (int, float)) and not isinstance(entry[key], bool),
                f"link {name}: '{key}' must be a number, got {entry[key]!r}",
            )
        try:
            params = MemristorParams(
                alpha=float(entry["alpha"]),
                beta=float(entry["beta"]),
                v_threshold=float(entry["v_t"]),
                r_min=float(entry["r_min"]),
                r_max=float(entry["r_max"]),
                r_init=float(entry["r_init"]),
            )
        except ValueError as exc:
            raise NetworkFormatError(f"link {name}: {exc}") from None
        links.append(Link(entry["from"], entry["to"], params))

    network = Network(tuple(nodes), tuple(links))
    violations = validate(network)
    if violations:
        raise NetworkValidationError(violations)
    return network


def load_file(path) -> Network:
    with open(path, "r", encoding="utf-8") as fh:
        return load(fh.read())


def store_file(network: Network, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(store(network))
