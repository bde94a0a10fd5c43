//! Simple undirected graphs with labeled vertices and DOT round-trip.
//!
//! The graphs here are small and dense in usage (gadget skeletons, distance
//! graphs of finite spaces), so adjacency is kept as sorted neighbor lists
//! per vertex. Vertices are addressed by index; labels travel along for
//! display and DOT export.

use std::collections::HashMap;
use std::fmt::Write as _;

/// An undirected graph without loops or parallel edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimpleGraph {
    labels: Vec<String>,
    adj: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("duplicate vertex label {0:?}")]
    DuplicateLabel(String),
    #[error("vertex index {0} out of range (order {1})")]
    VertexOutOfRange(usize, usize),
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
}

impl SimpleGraph {
    /// An edgeless graph with the given vertex labels.
    pub fn with_labels(labels: Vec<String>) -> Result<SimpleGraph, GraphError> {
        let mut seen = HashMap::new();
        for (i, l) in labels.iter().enumerate() {
            if seen.insert(l.clone(), i).is_some() {
                return Err(GraphError::DuplicateLabel(l.clone()));
            }
        }
        let adj = vec![Vec::new(); labels.len()];
        Ok(SimpleGraph { labels, adj })
    }

    /// An edgeless graph on `n` vertices labeled `0..n`.
    pub fn with_order(n: usize) -> SimpleGraph {
        SimpleGraph {
            labels: (0..n).map(|i| i.to_string()).collect(),
            adj: vec![Vec::new(); n],
        }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<SimpleGraph, GraphError> {
        let mut g = SimpleGraph::with_order(n);
        for &(u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    /// Appends an isolated vertex and returns its index.
    pub fn add_vertex(&mut self, label: String) -> Result<usize, GraphError> {
        if self.labels.contains(&label) {
            return Err(GraphError::DuplicateLabel(label));
        }
        self.labels.push(label);
        self.adj.push(Vec::new());
        Ok(self.labels.len() - 1)
    }

    /// Inserts the edge `{u, v}`. Idempotent for existing edges.
    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<(), GraphError> {
        let n = self.order();
        for w in [u, v] {
            if w >= n {
                return Err(GraphError::VertexOutOfRange(w, n));
            }
        }
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        if let Err(pos) = self.adj[u].binary_search(&v) {
            self.adj[u].insert(pos, v);
            let pos = self.adj[v].binary_search(&u).unwrap_err();
            self.adj[v].insert(pos, u);
        }
        Ok(())
    }

    pub fn order(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    /// Neighbors of `u` in ascending order.
    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.adj[u]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.adj[u].len()
    }

    pub fn label(&self, u: usize) -> &str {
        &self.labels[u]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// All edges as `(u, v)` with `u < v`, lexicographically.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for u in 0..self.order() {
            for &v in &self.adj[u] {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        let n = self.order();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &v in &self.adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count == n
    }

    /// Serializes to DOT. Every vertex is written once (so isolated vertices
    /// and vertex order survive a round-trip), then every edge.
    pub fn to_dot(&self, name: &str) -> String {
        let mut out = String::new();
        writeln!(out, "graph {} {{", quote_dot(name)).unwrap();
        for l in &self.labels {
            writeln!(out, "  {};", quote_dot(l)).unwrap();
        }
        for (u, v) in self.edges() {
            writeln!(
                out,
                "  {} -- {};",
                quote_dot(&self.labels[u]),
                quote_dot(&self.labels[v])
            )
            .unwrap();
        }
        out.push_str("}\n");
        out
    }

    /// Parses the undirected subset of DOT: optional `strict`, `graph` with
    /// an optional name, node statements, `--` edge chains, and attribute
    /// lists (which are skipped). Subgraphs and directed edges are rejected.
    pub fn from_dot(input: &str) -> Result<SimpleGraph, DotError> {
        parse_dot(input)
    }
}

fn quote_dot(s: &str) -> String {
    let plain = !s.is_empty()
        && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !s.starts_with(|c: char| c.is_ascii_digit());
    let numeric = !s.is_empty() && s.chars().all(|c| c.is_ascii_digit());
    if plain || numeric {
        s.to_owned()
    } else {
        format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DotError {
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("unexpected token {0:?} at offset {1}")]
    UnexpectedToken(String, usize),
    #[error("directed graphs are not supported")]
    Directed,
    #[error("subgraphs are not supported")]
    Subgraph,
    #[error("unterminated string starting at offset {0}")]
    UnterminatedString(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Id(String),
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Semi,
    Comma,
    Equals,
    EdgeOp,
}

fn lex_dot(input: &str) -> Result<Vec<(Tok, usize)>, DotError> {
    let bytes = input.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            c if c.is_whitespace() => i += 1,
            '#' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            '/' if bytes.get(i + 1) == Some(&b'/') => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            '/' if bytes.get(i + 1) == Some(&b'*') => {
                let start = i;
                i += 2;
                loop {
                    if i + 1 >= bytes.len() {
                        return Err(DotError::UnterminatedString(start));
                    }
                    if bytes[i] == b'*' && bytes[i + 1] == b'/' {
                        i += 2;
                        break;
                    }
                    i += 1;
                }
            }
            '{' => {
                toks.push((Tok::LBrace, i));
                i += 1;
            }
            '}' => {
                toks.push((Tok::RBrace, i));
                i += 1;
            }
            '[' => {
                toks.push((Tok::LBracket, i));
                i += 1;
            }
            ']' => {
                toks.push((Tok::RBracket, i));
                i += 1;
            }
            ';' => {
                toks.push((Tok::Semi, i));
                i += 1;
            }
            ',' => {
                toks.push((Tok::Comma, i));
                i += 1;
            }
            '=' => {
                toks.push((Tok::Equals, i));
                i += 1;
            }
            '-' if bytes.get(i + 1) == Some(&b'-') => {
                toks.push((Tok::EdgeOp, i));
                i += 2;
            }
            '-' if bytes.get(i + 1) == Some(&b'>') => return Err(DotError::Directed),
            '"' => {
                let start = i;
                i += 1;
                let mut s = String::new();
                loop {
                    if i >= bytes.len() {
                        return Err(DotError::UnterminatedString(start));
                    }
                    match bytes[i] {
                        b'"' => {
                            i += 1;
                            break;
                        }
                        b'\\' if i + 1 < bytes.len() => {
                            s.push(bytes[i + 1] as char);
                            i += 2;
                        }
                        b => {
                            s.push(b as char);
                            i += 1;
                        }
                    }
                }
                toks.push((Tok::Id(s), start));
            }
            c if c.is_ascii_alphanumeric() || c == '_' || c == '.' => {
                let start = i;
                while i < bytes.len() {
                    let b = bytes[i] as char;
                    if b.is_ascii_alphanumeric() || b == '_' || b == '.' {
                        i += 1;
                    } else {
                        break;
                    }
                }
                toks.push((Tok::Id(input[start..i].to_owned()), start));
            }
            _ => return Err(DotError::UnexpectedToken(c.to_string(), i)),
        }
    }
    Ok(toks)
}

fn parse_dot(input: &str) -> Result<SimpleGraph, DotError> {
    let toks = lex_dot(input)?;
    let mut pos = 0;

    let peek = |pos: usize| toks.get(pos).map(|(t, _)| t);
    let offset = |pos: usize| toks.get(pos).map(|&(_, o)| o).unwrap_or(input.len());
    let unexpected = |pos: usize| match toks.get(pos) {
        Some((t, o)) => DotError::UnexpectedToken(format!("{t:?}"), *o),
        None => DotError::UnexpectedEnd,
    };

    // Header: [strict] graph [name] {
    if let Some(Tok::Id(id)) = peek(pos) {
        if id.eq_ignore_ascii_case("strict") {
            pos += 1;
        }
    }
    match peek(pos) {
        Some(Tok::Id(id)) if id.eq_ignore_ascii_case("graph") => pos += 1,
        Some(Tok::Id(id)) if id.eq_ignore_ascii_case("digraph") => return Err(DotError::Directed),
        _ => return Err(unexpected(pos)),
    }
    if let Some(Tok::Id(_)) = peek(pos) {
        pos += 1; // graph name
    }
    if peek(pos) != Some(&Tok::LBrace) {
        return Err(unexpected(pos));
    }
    pos += 1;

    let mut graph = SimpleGraph::with_order(0);
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut intern = |graph: &mut SimpleGraph, name: &str| -> usize {
        if let Some(&i) = index.get(name) {
            i
        } else {
            let i = graph.add_vertex(name.to_owned()).expect("fresh label");
            index.insert(name.to_owned(), i);
            i
        }
    };

    // Skips a bracketed attribute list, tolerating nesting.
    let skip_attrs = |pos: &mut usize| -> Result<(), DotError> {
        let mut depth = 0usize;
        loop {
            match peek(*pos) {
                Some(Tok::LBracket) => depth += 1,
                Some(Tok::RBracket) => {
                    depth -= 1;
                    if depth == 0 {
                        *pos += 1;
                        return Ok(());
                    }
                }
                Some(_) => {}
                None => return Err(DotError::UnexpectedEnd),
            }
            *pos += 1;
        }
    };

    loop {
        match peek(pos) {
            Some(Tok::RBrace) => {
                pos += 1;
                break;
            }
            Some(Tok::Semi) => {
                pos += 1;
            }
            Some(Tok::LBrace) => return Err(DotError::Subgraph),
            Some(Tok::Id(id)) => {
                let lower = id.to_ascii_lowercase();
                if lower == "subgraph" {
                    return Err(DotError::Subgraph);
                }
                if lower == "node" || lower == "edge" || lower == "graph" {
                    // Default-attribute statement: keyword [attrs];
                    pos += 1;
                    if peek(pos) == Some(&Tok::LBracket) {
                        skip_attrs(&mut pos)?;
                    }
                    continue;
                }
                // graph-level attribute: id = id
                if peek(pos + 1) == Some(&Tok::Equals) {
                    match peek(pos + 2) {
                        Some(Tok::Id(_)) => {
                            pos += 3;
                            continue;
                        }
                        _ => return Err(unexpected(pos + 2)),
                    }
                }
                // Node statement or edge chain.
                let mut chain = vec![intern(&mut graph, id)];
                pos += 1;
                while peek(pos) == Some(&Tok::EdgeOp) {
                    pos += 1;
                    match peek(pos) {
                        Some(Tok::Id(next)) => {
                            chain.push(intern(&mut graph, next));
                            pos += 1;
                        }
                        _ => return Err(unexpected(pos)),
                    }
                }
                if peek(pos) == Some(&Tok::LBracket) {
                    skip_attrs(&mut pos)?;
                }
                for w in chain.windows(2) {
                    graph
                        .add_edge(w[0], w[1])
                        .map_err(|_| DotError::UnexpectedToken("self-loop".into(), offset(pos)))?;
                }
            }
            Some(_) => return Err(unexpected(pos)),
            None => return Err(DotError::UnexpectedEnd),
        }
    }
    if pos != toks.len() {
        return Err(unexpected(pos));
    }
    Ok(graph)
}
