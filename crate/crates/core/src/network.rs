//! Directed road networks, TNTP ingestion and commodity enumeration.
//!
//! Nodes are stored densely (`NodeId(0..n)`) with their external labels kept
//! alongside for reporting. Edges keep file order, so every iteration over the
//! network is reproducible.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on commodity path length ("fewer than six edges").
pub const DEFAULT_MAX_PATH_EDGES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeId(pub usize);

impl EdgeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

/// TNTP columns that travel with a link but play no role in the cost model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkAttributes {
    pub length: f64,
    pub b: f64,
    pub power: f64,
    pub speed: f64,
    pub toll: f64,
    pub link_type: String,
}

impl Default for LinkAttributes {
    fn default() -> Self {
        Self {
            length: 0.0,
            b: 0.15,
            power: 4.0,
            speed: 0.0,
            toll: 0.0,
            link_type: "1".to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub id: EdgeId,
    pub tail: NodeId,
    pub head: NodeId,
    /// Free-flow traversal time in minutes.
    pub free_flow_time: f64,
    pub capacity: f64,
    pub attributes: LinkAttributes,
}

#[derive(Debug, Clone, PartialEq, Default)]
struct TntpHeader {
    zones: Option<usize>,
    first_thru_node: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrafficNetwork {
    labels: Vec<String>,
    edges: Vec<EdgeRecord>,
    adjacency: Vec<Vec<EdgeId>>,
    header: TntpHeader,
}

/// Incremental construction of a [`TrafficNetwork`] from labelled endpoints.
#[derive(Debug, Default)]
pub struct NetworkBuilder {
    labels: Vec<String>,
    index: BTreeMap<String, NodeId>,
    edges: Vec<(NodeId, NodeId, f64, f64, LinkAttributes)>,
}

impl NetworkBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn node(&mut self, label: &str) -> NodeId {
        if let Some(&id) = self.index.get(label) {
            return id;
        }
        let id = NodeId(self.labels.len());
        self.labels.push(label.to_string());
        self.index.insert(label.to_string(), id);
        id
    }

    pub fn edge(
        &mut self,
        tail: &str,
        head: &str,
        free_flow_time: f64,
        capacity: f64,
    ) -> &mut Self {
        self.edge_with(
            tail,
            head,
            free_flow_time,
            capacity,
            LinkAttributes::default(),
        )
    }

    pub fn edge_with(
        &mut self,
        tail: &str,
        head: &str,
        free_flow_time: f64,
        capacity: f64,
        attributes: LinkAttributes,
    ) -> &mut Self {
        let t = self.node(tail);
        let h = self.node(head);
        self.edges
            .push((t, h, free_flow_time, capacity, attributes));
        self
    }

    pub fn build(self) -> Result<TrafficNetwork> {
        let edges = self
            .edges
            .into_iter()
            .enumerate()
            .map(
                |(i, (tail, head, free_flow_time, capacity, attributes))| EdgeRecord {
                    id: EdgeId(i),
                    tail,
                    head,
                    free_flow_time,
                    capacity,
                    attributes,
                },
            )
            .collect();
        TrafficNetwork::from_parts(self.labels, edges, TntpHeader::default())
    }
}

impl TrafficNetwork {
    fn from_parts(labels: Vec<String>, edges: Vec<EdgeRecord>, header: TntpHeader) -> Result<Self> {
        let n = labels.len();
        let mut adjacency = vec![Vec::new(); n];
        for (i, e) in edges.iter().enumerate() {
            if e.id != EdgeId(i) {
                return Err(Error::Validation(format!("edge {i} carries id {}", e.id.0)));
            }
            if e.tail.0 >= n || e.head.0 >= n {
                return Err(Error::Validation(format!(
                    "edge {i} references a node outside 0..{n}"
                )));
            }
            if e.tail == e.head {
                return Err(Error::Validation(format!(
                    "edge {i} is a self-loop on node {}",
                    labels[e.tail.0]
                )));
            }
            if !(e.capacity > 0.0) || !e.capacity.is_finite() {
                return Err(Error::Validation(format!(
                    "edge {i} ({} -> {}) has nonpositive capacity {}",
                    labels[e.tail.0], labels[e.head.0], e.capacity
                )));
            }
            if !(e.free_flow_time >= 0.0) || !e.free_flow_time.is_finite() {
                return Err(Error::Validation(format!(
                    "edge {i} ({} -> {}) has negative free-flow time {}",
                    labels[e.tail.0], labels[e.head.0], e.free_flow_time
                )));
            }
            adjacency[e.tail.0].push(e.id);
        }
        Ok(Self {
            labels,
            edges,
            adjacency,
            header,
        })
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.labels.len()).map(NodeId)
    }

    pub fn edges(&self) -> &[EdgeRecord] {
        &self.edges
    }

    pub fn edge(&self, id: EdgeId) -> &EdgeRecord {
        &self.edges[id.0]
    }

    pub fn label(&self, node: NodeId) -> &str {
        &self.labels[node.0]
    }

    pub fn node_by_label(&self, label: &str) -> Result<NodeId> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(NodeId)
            .ok_or_else(|| Error::Key(format!("node {label}")))
    }

    /// `tail->head` rendering used in traces.
    pub fn edge_label(&self, id: EdgeId) -> String {
        let e = self.edge(id);
        format!("({},{})", self.label(e.tail), self.label(e.head))
    }

    pub fn edge_by_endpoints(&self, tail: &str, head: &str) -> Result<EdgeId> {
        let t = self.node_by_label(tail)?;
        let h = self.node_by_label(head)?;
        self.adjacency[t.0]
            .iter()
            .copied()
            .find(|&e| self.edges[e.0].head == h)
            .ok_or_else(|| Error::Key(format!("edge ({tail},{head})")))
    }

    /// Outgoing edges of `v` in edge order.
    pub fn outgoing_edges(&self, v: NodeId) -> Result<&[EdgeId]> {
        self.adjacency
            .get(v.0)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::Key(format!("node index {}", v.0)))
    }

    #[inline]
    pub(crate) fn out_edges(&self, v: NodeId) -> &[EdgeId] {
        &self.adjacency[v.0]
    }

    /// Checks that `path` is a connected edge sequence and returns its end vertex.
    pub fn path_end(&self, start: NodeId, path: &[EdgeId]) -> Result<NodeId> {
        let mut at = start;
        for (i, &e) in path.iter().enumerate() {
            let rec = self.edges.get(e.0).ok_or_else(|| {
                Error::Validation(format!("path references unknown edge {}", e.0))
            })?;
            if rec.tail != at {
                return Err(Error::Validation(format!(
                    "path is disconnected at position {i}: edge {} does not leave {}",
                    self.edge_label(e),
                    self.label(at)
                )));
            }
            at = rec.head;
        }
        Ok(at)
    }

    /// Vertices visited by `path` when it starts at its first edge's tail.
    pub fn path_vertices(&self, path: &[EdgeId]) -> Vec<NodeId> {
        let mut out = Vec::with_capacity(path.len() + 1);
        if let Some(first) = path.first() {
            out.push(self.edges[first.0].tail);
        }
        out.extend(path.iter().map(|e| self.edges[e.0].head));
        out
    }
}

fn parse_tag(line: &str) -> Option<(&str, &str)> {
    let rest = line.strip_prefix('<')?;
    let close = rest.find('>')?;
    Some((&rest[..close], rest[close + 1..].trim()))
}

fn parse_count(value: &str, line: usize, tag: &str) -> Result<usize> {
    value
        .split_whitespace()
        .next()
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| Error::parse(line, format!("<{tag}> expects an integer, found {value:?}")))
}

fn parse_field<T: std::str::FromStr>(
    cols: &[&str],
    i: usize,
    name: &str,
    line: usize,
) -> Result<T> {
    let raw = cols
        .get(i)
        .ok_or_else(|| Error::parse(line, format!("missing column {name}")))?;
    raw.parse()
        .map_err(|_| Error::parse(line, format!("column {name}: cannot parse {raw:?}")))
}

/// Parses a TNTP `_net.tntp` file.
pub fn parse_tntp(text: &str) -> Result<TrafficNetwork> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let mut nodes = None;
    let mut links = None;
    let mut header = TntpHeader::default();
    let mut saw_end = false;

    for (no, raw) in lines.by_ref() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('~') {
            continue;
        }
        let Some((tag, value)) = parse_tag(line) else {
            return Err(Error::parse(
                no,
                format!("expected a metadata tag, found {line:?}"),
            ));
        };
        match tag {
            "NUMBER OF NODES" => nodes = Some(parse_count(value, no, tag)?),
            "NUMBER OF LINKS" => links = Some(parse_count(value, no, tag)?),
            "NUMBER OF ZONES" => header.zones = Some(parse_count(value, no, tag)?),
            "FIRST THRU NODE" => header.first_thru_node = Some(parse_count(value, no, tag)?),
            "END OF METADATA" => {
                saw_end = true;
                break;
            }
            _ => {}
        }
    }
    if !saw_end {
        return Err(Error::parse(
            text.lines().count().max(1),
            "missing <END OF METADATA>",
        ));
    }
    let n = nodes.ok_or_else(|| Error::parse(1, "missing <NUMBER OF NODES>"))?;
    let m = links.ok_or_else(|| Error::parse(1, "missing <NUMBER OF LINKS>"))?;

    let mut edges = Vec::with_capacity(m);
    for (no, raw) in lines {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('~') {
            continue;
        }
        let body = line.split(';').next().unwrap_or("");
        let cols: Vec<&str> = body.split_whitespace().collect();
        if cols.len() < 5 {
            return Err(Error::parse(
                no,
                format!("link row needs at least 5 columns, found {}", cols.len()),
            ));
        }
        let init: usize = parse_field(&cols, 0, "init_node", no)?;
        let term: usize = parse_field(&cols, 1, "term_node", no)?;
        let capacity: f64 = parse_field(&cols, 2, "capacity", no)?;
        let length: f64 = parse_field(&cols, 3, "length", no)?;
        let free_flow_time: f64 = parse_field(&cols, 4, "free_flow_time", no)?;
        let mut attributes = LinkAttributes {
            length,
            ..LinkAttributes::default()
        };
        if cols.len() > 5 {
            attributes.b = parse_field(&cols, 5, "b", no)?;
        }
        if cols.len() > 6 {
            attributes.power = parse_field(&cols, 6, "power", no)?;
        }
        if cols.len() > 7 {
            attributes.speed = parse_field(&cols, 7, "speed", no)?;
        }
        if cols.len() > 8 {
            attributes.toll = parse_field(&cols, 8, "toll", no)?;
        }
        if cols.len() > 9 {
            attributes.link_type = cols[9].to_string();
        }
        for (which, id) in [("init", init), ("term", term)] {
            if id == 0 || id > n {
                return Err(Error::Validation(format!(
                    "line {no}: {which} node {id} outside the declared 1..={n}"
                )));
            }
        }
        edges.push(EdgeRecord {
            id: EdgeId(edges.len()),
            tail: NodeId(init - 1),
            head: NodeId(term - 1),
            free_flow_time,
            capacity,
            attributes,
        });
    }
    if edges.len() != m {
        return Err(Error::Validation(format!(
            "metadata declares {m} links but {} rows were read",
            edges.len()
        )));
    }
    let labels = (1..=n).map(|i| i.to_string()).collect();
    TrafficNetwork::from_parts(labels, edges, header)
}

/// Renders a network in TNTP layout. Labels must be the integers `1..=n`
/// for the output to parse back.
pub fn write_tntp(net: &TrafficNetwork) -> String {
    let mut out = String::new();
    if let Some(z) = net.header.zones {
        let _ = writeln!(out, "<NUMBER OF ZONES> {z}");
    }
    let _ = writeln!(out, "<NUMBER OF NODES> {}", net.node_count());
    if let Some(f) = net.header.first_thru_node {
        let _ = writeln!(out, "<FIRST THRU NODE> {f}");
    }
    let _ = writeln!(out, "<NUMBER OF LINKS> {}", net.edge_count());
    out.push_str("<END OF METADATA>\n\n");
    out.push_str("~\tinit_node\tterm_node\tcapacity\tlength\tfree_flow_time\tb\tpower\tspeed\ttoll\tlink_type\t;\n");
    for e in &net.edges {
        let a = &e.attributes;
        let _ = writeln!(
            out,
            "\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t;",
            net.label(e.tail),
            net.label(e.head),
            e.capacity,
            a.length,
            e.free_flow_time,
            a.b,
            a.power,
            a.speed,
            a.toll,
            a.link_type
        );
    }
    out
}

/// An origin-destination pair with its admissible simple paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Commodity {
    pub origin: NodeId,
    pub destination: NodeId,
    pub candidate_paths: Vec<Vec<EdgeId>>,
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// All simple paths of at most `max_edges` edges leaving `origin`, grouped
/// by end vertex. Paths come out in lexicographic edge-id order.
fn simple_paths_from(
    net: &TrafficNetwork,
    origin: NodeId,
    max_edges: usize,
) -> BTreeMap<NodeId, Vec<Vec<EdgeId>>> {
    fn dfs(
        net: &TrafficNetwork,
        at: NodeId,
        max_edges: usize,
        on_path: &mut [bool],
        stack: &mut Vec<EdgeId>,
        out: &mut BTreeMap<NodeId, Vec<Vec<EdgeId>>>,
    ) {
        if stack.len() >= max_edges {
            return;
        }
        for &e in net.out_edges(at) {
            let head = net.edge(e).head;
            if on_path[head.0] {
                continue;
            }
            stack.push(e);
            out.entry(head).or_default().push(stack.clone());
            on_path[head.0] = true;
            dfs(net, head, max_edges, on_path, stack, out);
            on_path[head.0] = false;
            stack.pop();
        }
    }

    let mut on_path = vec![false; net.node_count()];
    on_path[origin.0] = true;
    let mut out = BTreeMap::new();
    dfs(
        net,
        origin,
        max_edges,
        &mut on_path,
        &mut Vec::new(),
        &mut out,
    );
    out
}

/// Every ordered pair joined by at least one simple path of `max_edges` or fewer edges.
pub fn enumerate_commodities(net: &TrafficNetwork, max_edges: usize) -> Vec<Commodity> {
    let mut out = Vec::new();
    for origin in net.nodes() {
        for (destination, candidate_paths) in simple_paths_from(net, origin, max_edges) {
            out.push(Commodity {
                origin,
                destination,
                candidate_paths,
            });
        }
    }
    out
}
