//! Single-source multicast networks on unit-capacity channels.
//!
//! A [`NetworkSpec`] lists its channels in declaration order: the `rate`
//! imaginary channels `d1..dw` (virtual inputs to the source) first, then
//! the real channels. That order is the channel-id order used for tie
//! breaking, decoding-matrix columns and erasure sampling.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashMap, HashSet, VecDeque};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tail of every imaginary channel. Never a declared node.
pub const VIRTUAL_ORIGIN: &str = "<origin>";

/// Reserved name of the butterfly network.
pub const BUILTIN_BUTTERFLY: &str = "builtin:butterfly";

/// Version written to and expected from network description files.
pub const NETWORK_FILE_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("network contains a directed cycle")]
    CyclicNetwork,
    #[error("`{0}` is not a sink of this network")]
    UnknownSink(String),
    #[error("unknown builtin network `{0}`")]
    UnknownBuiltin(String),
    #[error("unsupported network file version {0} (expected {NETWORK_FILE_VERSION})")]
    UnsupportedVersion(u32),
    #[error("malformed network description: {0}")]
    Malformed(#[from] serde_json::Error),
    #[error("cannot read network file: {0}")]
    Io(#[from] std::io::Error),
    #[error("invalid network: {0}")]
    Invalid(ValidationReport),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelKind {
    Real,
    Imaginary,
}

/// A unit-capacity directed channel.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Channel {
    pub id: String,
    pub tail: String,
    pub head: String,
    pub kind: ChannelKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkSpec {
    pub nodes: Vec<String>,
    pub channels: Vec<Channel>,
    pub source: String,
    pub sinks: Vec<String>,
    pub rate: usize,
    pub imaginary_channels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    ZeroRate,
    NoSinks,
    UnknownSource(String),
    UnknownSinkNode(String),
    DuplicateNode(String),
    DuplicateChannel(String),
    UnknownEndpoint { channel: String, node: String },
    SelfLoop(String),
    ImaginaryCount { expected: usize, found: usize },
    /// Listed as imaginary but not declared as an imaginary channel into the source.
    BadImaginaryChannel(String),
    /// Declared imaginary but missing from the imaginary list.
    UnlistedImaginaryChannel(String),
    Cycle { nodes: Vec<String> },
    UnreachableSink(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::ZeroRate => write!(f, "rate must be at least 1"),
            Self::NoSinks => write!(f, "no sinks declared"),
            Self::UnknownSource(n) => write!(f, "source `{n}` is not a declared node"),
            Self::UnknownSinkNode(n) => write!(f, "sink `{n}` is not a declared node"),
            Self::DuplicateNode(n) => write!(f, "node `{n}` declared more than once"),
            Self::DuplicateChannel(c) => write!(f, "channel id `{c}` used more than once"),
            Self::UnknownEndpoint { channel, node } => {
                write!(f, "channel `{channel}` references undeclared node `{node}`")
            }
            Self::SelfLoop(c) => write!(f, "channel `{c}` is a self-loop"),
            Self::ImaginaryCount { expected, found } => {
                write!(f, "expected {expected} imaginary channels, found {found}")
            }
            Self::BadImaginaryChannel(c) => {
                write!(f, "`{c}` is not an imaginary channel entering the source")
            }
            Self::UnlistedImaginaryChannel(c) => {
                write!(f, "imaginary channel `{c}` is missing from the imaginary list")
            }
            Self::Cycle { nodes } => write!(f, "directed cycle through nodes {}", nodes.join(", ")),
            Self::UnreachableSink(n) => write!(f, "sink `{n}` is unreachable from the source"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Warning {
    /// Random coding on such an instance always fails at this sink.
    RateExceedsMinCut { sink: String, min_cut: usize, rate: usize },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::RateExceedsMinCut { sink, min_cut, rate } => {
                write!(f, "rate {rate} exceeds min cut {min_cut} at sink `{sink}`")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub warnings: Vec<Warning>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.violations.iter().map(ToString::to_string).collect();
        write!(f, "{}", parts.join("; "))
    }
}

/// On-disk network description.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkFile {
    pub version: u32,
    pub nodes: Vec<String>,
    pub channels: Vec<ChannelDecl>,
    pub source: String,
    pub sinks: Vec<String>,
    pub rate: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelDecl {
    pub id: String,
    pub tail: String,
    pub head: String,
}

impl NetworkSpec {
    /// Builds a network from real channels `(id, tail, head)`; imaginary
    /// channels `d1..d{rate}` into the source are generated. No validation.
    pub fn new<S: Into<String>>(
        nodes: impl IntoIterator<Item = S>,
        real_channels: impl IntoIterator<Item = (S, S, S)>,
        source: S,
        sinks: impl IntoIterator<Item = S>,
        rate: usize,
    ) -> Self {
        let source = source.into();
        let imaginary_channels: Vec<String> = (1..=rate).map(|k| format!("d{k}")).collect();
        let mut channels: Vec<Channel> = imaginary_channels
            .iter()
            .map(|id| Channel {
                id: id.clone(),
                tail: VIRTUAL_ORIGIN.to_string(),
                head: source.clone(),
                kind: ChannelKind::Imaginary,
            })
            .collect();
        channels.extend(real_channels.into_iter().map(|(id, tail, head)| Channel {
            id: id.into(),
            tail: tail.into(),
            head: head.into(),
            kind: ChannelKind::Real,
        }));
        Self {
            nodes: nodes.into_iter().map(Into::into).collect(),
            channels,
            source,
            sinks: sinks.into_iter().map(Into::into).collect(),
            rate,
            imaginary_channels,
        }
    }

    /// Appends a real channel.
    pub fn add_channel(&mut self, id: &str, tail: &str, head: &str) {
        self.channels.push(Channel {
            id: id.to_string(),
            tail: tail.to_string(),
            head: head.to_string(),
            kind: ChannelKind::Real,
        });
    }

    pub fn from_file(file: NetworkFile) -> Result<Self, NetworkError> {
        if file.version != NETWORK_FILE_VERSION {
            return Err(NetworkError::UnsupportedVersion(file.version));
        }
        Ok(Self::new(
            file.nodes,
            file.channels.into_iter().map(|c| (c.id, c.tail, c.head)),
            file.source,
            file.sinks,
            file.rate,
        ))
    }

    pub fn from_json(text: &str) -> Result<Self, NetworkError> {
        Self::from_file(serde_json::from_str(text)?)
    }

    pub fn to_file(&self) -> NetworkFile {
        NetworkFile {
            version: NETWORK_FILE_VERSION,
            nodes: self.nodes.clone(),
            channels: self
                .real_channels()
                .map(|c| ChannelDecl { id: c.id.clone(), tail: c.tail.clone(), head: c.head.clone() })
                .collect(),
            source: self.source.clone(),
            sinks: self.sinks.clone(),
            rate: self.rate,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("network file serializes")
    }

    /// Resolves `builtin:<name>` or reads a JSON description from disk.
    /// The result is validated.
    pub fn load(reference: &str) -> Result<Self, NetworkError> {
        let spec = if let Some(name) = reference.strip_prefix("builtin:") {
            match name {
                "butterfly" => build_butterfly(),
                _ => return Err(NetworkError::UnknownBuiltin(reference.to_string())),
            }
        } else {
            Self::from_json(&std::fs::read_to_string(Path::new(reference))?)?
        };
        let report = spec.validate();
        if !report.is_valid() {
            return Err(NetworkError::Invalid(report));
        }
        Ok(spec)
    }

    pub fn real_channels(&self) -> impl Iterator<Item = &Channel> {
        self.channels.iter().filter(|c| c.kind == ChannelKind::Real)
    }

    pub fn channel_index(&self, id: &str) -> Option<usize> {
        self.channels.iter().position(|c| c.id == id)
    }

    /// Indices of channels entering `node`, in channel-id order.
    pub fn incoming(&self, node: &str) -> Vec<usize> {
        (0..self.channels.len()).filter(|&i| self.channels[i].head == node).collect()
    }

    pub fn in_degree(&self, node: &str) -> usize {
        self.incoming(node).len()
    }

    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        let v = &mut report.violations;
        if self.rate == 0 {
            v.push(Violation::ZeroRate);
        }
        if self.sinks.is_empty() {
            v.push(Violation::NoSinks);
        }

        let mut node_set = HashSet::new();
        for n in &self.nodes {
            if !node_set.insert(n.as_str()) {
                v.push(Violation::DuplicateNode(n.clone()));
            }
        }
        if !node_set.contains(self.source.as_str()) {
            v.push(Violation::UnknownSource(self.source.clone()));
        }
        for s in &self.sinks {
            if !node_set.contains(s.as_str()) {
                v.push(Violation::UnknownSinkNode(s.clone()));
            }
        }

        let mut ids = HashSet::new();
        for c in &self.channels {
            if !ids.insert(c.id.as_str()) {
                v.push(Violation::DuplicateChannel(c.id.clone()));
            }
        }
        for c in self.real_channels() {
            for end in [&c.tail, &c.head] {
                if !node_set.contains(end.as_str()) {
                    v.push(Violation::UnknownEndpoint { channel: c.id.clone(), node: end.clone() });
                }
            }
            if c.tail == c.head {
                v.push(Violation::SelfLoop(c.id.clone()));
            }
        }

        if self.imaginary_channels.len() != self.rate {
            v.push(Violation::ImaginaryCount {
                expected: self.rate,
                found: self.imaginary_channels.len(),
            });
        }
        for id in &self.imaginary_channels {
            let ok = self.channels.iter().any(|c| {
                &c.id == id && c.kind == ChannelKind::Imaginary && c.head == self.source
            });
            if !ok {
                v.push(Violation::BadImaginaryChannel(id.clone()));
            }
        }
        for c in self.channels.iter().filter(|c| c.kind == ChannelKind::Imaginary) {
            if !self.imaginary_channels.contains(&c.id) {
                v.push(Violation::UnlistedImaginaryChannel(c.id.clone()));
            }
        }

        let edges: Vec<(&str, &str)> = self
            .real_channels()
            .filter(|c| node_set.contains(c.tail.as_str()) && node_set.contains(c.head.as_str()))
            .map(|c| (c.tail.as_str(), c.head.as_str()))
            .collect();
        if let Some(nodes) = cyclic_nodes(&self.nodes, &edges) {
            v.push(Violation::Cycle { nodes });
        }

        let reachable = reachable_from(&self.source, &edges);
        for s in &self.sinks {
            if node_set.contains(s.as_str()) && !reachable.contains(s.as_str()) {
                v.push(Violation::UnreachableSink(s.clone()));
            }
        }

        if report.violations.is_empty() {
            for s in &self.sinks {
                if let Ok(cut) = self.min_cut(s) {
                    if cut < self.rate {
                        report.warnings.push(Warning::RateExceedsMinCut {
                            sink: s.clone(),
                            min_cut: cut,
                            rate: self.rate,
                        });
                    }
                }
            }
        }
        report
    }

    /// Channel ids, imaginary first, each real channel after every channel
    /// entering its tail; ties go to the lower channel id.
    pub fn topological_order(&self) -> Result<Vec<&str>, NetworkError> {
        Ok(self.topological_indices()?.into_iter().map(|i| self.channels[i].id.as_str()).collect())
    }

    pub(crate) fn topological_indices(&self) -> Result<Vec<usize>, NetworkError> {
        let n = self.channels.len();
        let mut order: Vec<usize> =
            (0..n).filter(|&i| self.channels[i].kind == ChannelKind::Imaginary).collect();
        let real: Vec<usize> = (0..n).filter(|&i| self.channels[i].kind == ChannelKind::Real).collect();

        // a real channel waits on every real channel entering its tail
        let mut waiting: Vec<usize> = vec![0; n];
        let mut dependents: HashMap<usize, Vec<usize>> = HashMap::new();
        for &c in &real {
            for &u in &real {
                if self.channels[u].head == self.channels[c].tail {
                    waiting[c] += 1;
                    dependents.entry(u).or_default().push(c);
                }
            }
        }
        let mut ready: BinaryHeap<Reverse<usize>> =
            real.iter().copied().filter(|&c| waiting[c] == 0).map(Reverse).collect();
        while let Some(Reverse(c)) = ready.pop() {
            order.push(c);
            for &d in dependents.get(&c).map(Vec::as_slice).unwrap_or(&[]) {
                waiting[d] -= 1;
                if waiting[d] == 0 {
                    ready.push(Reverse(d));
                }
            }
        }
        if order.len() != n {
            return Err(NetworkError::CyclicNetwork);
        }
        Ok(order)
    }

    /// Maximum number of channel-disjoint source-to-sink paths over real
    /// channels, by BFS augmenting paths.
    pub fn min_cut(&self, sink: &str) -> Result<usize, NetworkError> {
        if !self.sinks.iter().any(|s| s == sink) {
            return Err(NetworkError::UnknownSink(sink.to_string()));
        }
        let index: HashMap<&str, usize> =
            self.nodes.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
        let (Some(&s), Some(&t)) = (index.get(self.source.as_str()), index.get(sink)) else {
            return Ok(0);
        };
        let mut graph = FlowGraph::new(self.nodes.len());
        for c in self.real_channels() {
            if let (Some(&u), Some(&v)) = (index.get(c.tail.as_str()), index.get(c.head.as_str())) {
                graph.add_edge(u, v, 1);
            }
        }
        Ok(graph.max_flow(s, t) as usize)
    }
}

/// Residual graph for unit-capacity max flow.
struct FlowGraph {
    adj: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<i64>,
}

impl FlowGraph {
    fn new(n: usize) -> Self {
        Self { adj: vec![Vec::new(); n], to: Vec::new(), cap: Vec::new() }
    }

    fn add_edge(&mut self, u: usize, v: usize, c: i64) {
        self.adj[u].push(self.to.len());
        self.to.push(v);
        self.cap.push(c);
        self.adj[v].push(self.to.len());
        self.to.push(u);
        self.cap.push(0);
    }

    fn max_flow(&mut self, s: usize, t: usize) -> i64 {
        if s == t {
            return 0;
        }
        let mut flow = 0;
        loop {
            let mut via: Vec<Option<usize>> = vec![None; self.adj.len()];
            let mut seen = vec![false; self.adj.len()];
            seen[s] = true;
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for &e in &self.adj[u] {
                    let v = self.to[e];
                    if self.cap[e] > 0 && !seen[v] {
                        seen[v] = true;
                        via[v] = Some(e);
                        queue.push_back(v);
                    }
                }
            }
            if !seen[t] {
                return flow;
            }
            let mut bottleneck = i64::MAX;
            let mut v = t;
            while let Some(e) = via[v] {
                bottleneck = bottleneck.min(self.cap[e]);
                v = self.to[e ^ 1];
            }
            let mut v = t;
            while let Some(e) = via[v] {
                self.cap[e] -= bottleneck;
                self.cap[e ^ 1] += bottleneck;
                v = self.to[e ^ 1];
            }
            flow += bottleneck;
        }
    }
}

/// Nodes left over by Kahn's algorithm, or `None` if the graph is acyclic.
fn cyclic_nodes(nodes: &[String], edges: &[(&str, &str)]) -> Option<Vec<String>> {
    let mut indeg: HashMap<&str, usize> = nodes.iter().map(|n| (n.as_str(), 0)).collect();
    for &(_, h) in edges {
        *indeg.entry(h).or_default() += 1;
    }
    let mut queue: VecDeque<&str> = nodes.iter().map(String::as_str).filter(|n| indeg[n] == 0).collect();
    let mut removed = 0;
    while let Some(n) = queue.pop_front() {
        removed += 1;
        for &(t, h) in edges {
            if t == n {
                let d = indeg.get_mut(h).unwrap();
                *d -= 1;
                if *d == 0 {
                    queue.push_back(h);
                }
            }
        }
    }
    if removed == indeg.len() {
        return None;
    }
    let left: BTreeSet<String> =
        indeg.into_iter().filter(|&(_, d)| d > 0).map(|(n, _)| n.to_string()).collect();
    Some(left.into_iter().collect())
}

fn reachable_from<'a>(source: &'a str, edges: &[(&'a str, &'a str)]) -> HashSet<&'a str> {
    let mut seen = HashSet::from([source]);
    let mut queue = VecDeque::from([source]);
    while let Some(n) = queue.pop_front() {
        for &(t, h) in edges {
            if t == n && seen.insert(h) {
                queue.push_back(h);
            }
        }
    }
    seen
}

/// The butterfly network: source `s`, relays `s1, s2, i, j`, sinks `t1, t2`,
/// nine real channels `e1..e9` and rate 2.
pub fn build_butterfly() -> NetworkSpec {
    NetworkSpec::new(
        ["s", "s1", "s2", "i", "j", "t1", "t2"],
        [
            ("e1", "s", "s1"),
            ("e2", "s", "s2"),
            ("e3", "s1", "t1"),
            ("e4", "s1", "i"),
            ("e5", "s2", "i"),
            ("e6", "s2", "t2"),
            ("e7", "i", "j"),
            ("e8", "j", "t1"),
            ("e9", "j", "t2"),
        ],
        "s",
        ["t1", "t2"],
        2,
    )
}
