//! Automorphism search for graphs and finite metric spaces.
//!
//! Both structures are handled through one dense encoding: a complete
//! edge-colored graph (graphs use colors {0, 1}; metric spaces color each
//! pair by the rank of its exact distance). The search is backtracking with
//! equitable partition refinement, individualizing inside the first smallest
//! non-singleton cell, candidate extraction at leaves against the first
//! leaf, orbit pruning along the base path, and backjumps to the divergence
//! point after a success.
//!
//! A rigidity verdict is unconditional: with no automorphism found there is
//! nothing to prune, so the refutation is exhaustive. Group order is never
//! inferred from the search tree; it is re-derived by closing the generator
//! set under composition, which doubles as the audit that composing
//! generators never leaves the reported group.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::graph::SimpleGraph;
use crate::rational::Rational;
use crate::space::FiniteMetricSpace;

/// Search limits. `max_nodes` caps refinement nodes across one search;
/// `max_group_order` caps the closure enumeration.
#[derive(Debug, Clone, Copy)]
pub struct SearchBudget {
    pub max_nodes: u64,
    pub max_group_order: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            max_nodes: 5_000_000,
            max_group_order: 2_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SymmetryError {
    #[error("automorphism search exceeded the node budget ({explored} nodes)")]
    NodeBudget { explored: u64 },
    #[error("group closure exceeded the order cap of {cap}")]
    GroupClosureBudget { cap: u64 },
    #[error("coloring has {got} entries for {expected} vertices")]
    ColoringSizeMismatch { expected: usize, got: usize },
}

/// A vertex permutation given by images: `map[v]` is where `v` goes.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Permutation(pub Vec<usize>);

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation((0..n).collect())
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &v)| i == v)
    }

    pub fn apply(&self, v: usize) -> usize {
        self.0[v]
    }

    /// `self` then `other`.
    pub fn then(&self, other: &Permutation) -> Permutation {
        Permutation(self.0.iter().map(|&v| other.0[v]).collect())
    }
}

/// Generators, audited order, and the search transcript size.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AutomorphismReport {
    /// Sorted, deduplicated generating set (identity excluded).
    pub generators: Vec<Permutation>,
    /// Exact group order from generator closure.
    pub order: u128,
    pub is_trivial: bool,
    pub nodes_explored: u64,
}

/// The dense edge-colored encoding shared by both structure kinds.
#[derive(Debug, Clone)]
pub(crate) struct EdgeColored {
    n: usize,
    ncolors: usize,
    color: Vec<u16>,
    vcolor: Vec<u32>,
}

impl EdgeColored {
    pub(crate) fn from_graph(g: &SimpleGraph) -> Self {
        let n = g.order();
        let mut color = vec![0u16; n * n];
        for (u, v) in g.edges() {
            color[u * n + v] = 1;
            color[v * n + u] = 1;
        }
        EdgeColored {
            n,
            ncolors: 2,
            color,
            vcolor: vec![0; n],
        }
    }

    pub(crate) fn from_space(m: &FiniteMetricSpace) -> Self {
        let n = m.len();
        let mut distances: Vec<Rational> = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                distances.push(m.dist(i, j));
            }
        }
        distances.sort();
        distances.dedup();
        let mut color = vec![0u16; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let rank = distances.binary_search(&m.dist(i, j)).unwrap() + 1;
                    color[i * n + j] = rank as u16;
                }
            }
        }
        EdgeColored {
            n,
            ncolors: distances.len() + 1,
            color,
            vcolor: vec![0; n],
        }
    }

    fn with_vertex_colors(mut self, colors: &[usize]) -> Result<Self, SymmetryError> {
        if colors.len() != self.n {
            return Err(SymmetryError::ColoringSizeMismatch {
                expected: self.n,
                got: colors.len(),
            });
        }
        self.vcolor = colors.iter().map(|&c| c as u32).collect();
        Ok(self)
    }

    #[inline]
    fn edge(&self, u: usize, v: usize) -> u16 {
        self.color[u * self.n + v]
    }

    fn is_automorphism(&self, g: &[usize]) -> bool {
        for (v, &gv) in g.iter().enumerate() {
            if self.vcolor[gv] != self.vcolor[v] {
                return false;
            }
        }
        for u in 0..self.n {
            for v in (u + 1)..self.n {
                if self.edge(g[u], g[v]) != self.edge(u, v) {
                    return false;
                }
            }
        }
        true
    }
}

/// Ordered partition of vertices into cells. Cell ids are stable: a split
/// keeps the first (signature-least) part under the old id and appends the
/// rest, so id assignment commutes with any relabeling of the structure.
#[derive(Debug, Clone)]
struct Partition {
    cells: Vec<Vec<usize>>,
    cell_of: Vec<usize>,
}

impl Partition {
    fn unit(ec: &EdgeColored) -> Partition {
        let mut colors: Vec<u32> = ec.vcolor.clone();
        colors.sort_unstable();
        colors.dedup();
        let mut cells = vec![Vec::new(); colors.len()];
        let mut cell_of = vec![0; ec.n];
        for (v, &vc) in ec.vcolor.iter().enumerate() {
            let c = colors.binary_search(&vc).unwrap();
            cells[c].push(v);
            cell_of[v] = c;
        }
        Partition { cells, cell_of }
    }

    /// Vertex occupying each cell id, defined at discrete partitions.
    fn leaf(&self) -> Vec<usize> {
        self.cells.iter().map(|c| c[0]).collect()
    }

    /// First cell of minimal size > 1, by id. Cell ids are relabeling
    /// invariant, so this choice is too.
    fn target_cell(&self) -> Option<usize> {
        let mut best: Option<(usize, usize)> = None;
        for (id, cell) in self.cells.iter().enumerate() {
            if cell.len() > 1 {
                match best {
                    Some((sz, _)) if cell.len() >= sz => {}
                    _ => best = Some((cell.len(), id)),
                }
            }
        }
        best.map(|(_, id)| id)
    }

    /// Makes the partition equitable with respect to edge colors, starting
    /// from the given splitter queue.
    fn refine(&mut self, ec: &EdgeColored, mut queue: VecDeque<usize>) {
        let n = ec.n;
        let k = ec.ncolors;
        let mut counts = vec![0u32; n * k];
        while let Some(w) = queue.pop_front() {
            let splitter = self.cells[w].clone();
            counts.iter_mut().for_each(|c| *c = 0);
            for &u in &splitter {
                for v in 0..n {
                    if v != u {
                        counts[v * k + ec.edge(v, u) as usize] += 1;
                    }
                }
            }
            let live: Vec<usize> = (0..self.cells.len()).collect();
            for c in live {
                if self.cells[c].len() < 2 {
                    continue;
                }
                let mut members = self.cells[c].clone();
                members
                    .sort_by(|&a, &b| counts[a * k..(a + 1) * k].cmp(&counts[b * k..(b + 1) * k]));
                let mut groups: Vec<Vec<usize>> = Vec::new();
                for &v in &members {
                    let same = groups.last().is_some_and(|g| {
                        let u = g[0];
                        counts[u * k..(u + 1) * k] == counts[v * k..(v + 1) * k]
                    });
                    if same {
                        groups.last_mut().unwrap().push(v);
                    } else {
                        groups.push(vec![v]);
                    }
                }
                if groups.len() < 2 {
                    continue;
                }
                // To keep members within a cell in a deterministic order,
                // each group stays sorted by vertex id.
                for g in &mut groups {
                    g.sort_unstable();
                }
                let mut first = true;
                for g in groups {
                    let id = if first {
                        first = false;
                        self.cells[c] = g.clone();
                        c
                    } else {
                        self.cells.push(g.clone());
                        self.cells.len() - 1
                    };
                    for &v in &self.cells[id] {
                        self.cell_of[v] = id;
                    }
                    queue.push_back(id);
                }
            }
        }
    }

    /// Splits `v` out of its cell and re-refines.
    fn individualize(&self, ec: &EdgeColored, v: usize) -> Partition {
        let mut next = self.clone();
        let c = next.cell_of[v];
        let rest: Vec<usize> = next.cells[c].iter().copied().filter(|&u| u != v).collect();
        next.cells[c] = vec![v];
        let rid = next.cells.len();
        next.cells.push(rest);
        for &u in &next.cells[rid] {
            next.cell_of[u] = rid;
        }
        let mut queue = VecDeque::new();
        queue.push_back(c);
        queue.push_back(rid);
        next.refine(ec, queue);
        next
    }
}

struct SearchCtx<'a> {
    ec: &'a EdgeColored,
    budget: u64,
    explored: u64,
    base_leaf: Option<Vec<usize>>,
    base_choices: Vec<usize>,
    generators: Vec<Vec<usize>>,
    early_exit: bool,
}

enum Walk {
    Done,
    Unwind(usize),
}

impl SearchCtx<'_> {
    fn in_orbit_of_tried(&self, v: usize, tried: &[usize], depth: usize) -> bool {
        // Orbit of v under generators fixing the base prefix pointwise.
        let fixing: Vec<&Vec<usize>> = self
            .generators
            .iter()
            .filter(|g| (0..depth).all(|i| g[self.base_choices[i]] == self.base_choices[i]))
            .collect();
        if fixing.is_empty() {
            return false;
        }
        let mut seen = BTreeSet::new();
        let mut stack = vec![v];
        seen.insert(v);
        while let Some(u) = stack.pop() {
            if tried.contains(&u) {
                return true;
            }
            for g in &fixing {
                let w = g[u];
                if seen.insert(w) {
                    stack.push(w);
                }
            }
        }
        false
    }

    fn explore(
        &mut self,
        part: &Partition,
        depth: usize,
        choices: &mut Vec<usize>,
    ) -> Result<Walk, SymmetryError> {
        self.explored += 1;
        if self.explored > self.budget {
            return Err(SymmetryError::NodeBudget {
                explored: self.explored,
            });
        }
        let Some(cell) = part.target_cell() else {
            // Leaf.
            let leaf = part.leaf();
            match &self.base_leaf {
                None => {
                    self.base_leaf = Some(leaf);
                    self.base_choices = choices.clone();
                    return Ok(Walk::Done);
                }
                Some(base) => {
                    let n = self.ec.n;
                    let mut g = vec![0usize; n];
                    for p in 0..n {
                        g[leaf[p]] = base[p];
                    }
                    let nontrivial = g.iter().enumerate().any(|(i, &x)| i != x);
                    if nontrivial && self.ec.is_automorphism(&g) {
                        self.generators.push(g);
                        let dd = (0..choices.len())
                            .find(|&i| choices[i] != self.base_choices[i])
                            .expect("a non-base leaf diverges somewhere");
                        return Ok(Walk::Unwind(dd));
                    }
                    return Ok(Walk::Done);
                }
            }
        };

        let candidates = part.cells[cell].clone();
        let mut tried: Vec<usize> = Vec::new();
        for v in candidates {
            let on_base_node = match &self.base_leaf {
                None => true,
                Some(_) => choices[..] == self.base_choices[..depth],
            };
            if on_base_node && self.base_leaf.is_some() && self.in_orbit_of_tried(v, &tried, depth)
            {
                continue;
            }
            let child = part.individualize(self.ec, v);
            choices.push(v);
            let walk = self.explore(&child, depth + 1, choices)?;
            choices.pop();
            tried.push(v);
            if self.early_exit && !self.generators.is_empty() {
                return Ok(Walk::Done);
            }
            if let Walk::Unwind(dd) = walk {
                if dd < depth {
                    return Ok(Walk::Unwind(dd));
                }
            }
        }
        Ok(Walk::Done)
    }
}

fn run_search(
    ec: &EdgeColored,
    budget: &SearchBudget,
    early_exit: bool,
) -> Result<(Vec<Permutation>, u64), SymmetryError> {
    if ec.n == 0 {
        return Ok((Vec::new(), 0));
    }
    let mut root = Partition::unit(ec);
    let queue: VecDeque<usize> = (0..root.cells.len()).collect();
    root.refine(ec, queue);
    let mut ctx = SearchCtx {
        ec,
        budget: budget.max_nodes,
        explored: 0,
        base_leaf: None,
        base_choices: Vec::new(),
        generators: Vec::new(),
        early_exit,
    };
    let mut choices = Vec::new();
    ctx.explore(&root, 0, &mut choices)?;
    let mut gens: Vec<Permutation> = ctx.generators.into_iter().map(Permutation).collect();
    gens.sort();
    gens.dedup();
    Ok((gens, ctx.explored))
}

/// Exact group order by closing the generators under composition. This is
/// the audit demanded of every report: products never leave the enumerated
/// set, or the cap trips.
fn closure_order(n: usize, gens: &[Permutation], cap: u64) -> Result<u128, SymmetryError> {
    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    let id = Permutation::identity(n);
    seen.insert(id.0.clone());
    let mut frontier = vec![id];
    while let Some(p) = frontier.pop() {
        for g in gens {
            let q = p.then(g);
            if seen.len() as u64 >= cap && !seen.contains(&q.0) {
                return Err(SymmetryError::GroupClosureBudget { cap });
            }
            if seen.insert(q.0.clone()) {
                frontier.push(q);
            }
        }
    }
    Ok(seen.len() as u128)
}

fn report_from(
    ec: &EdgeColored,
    budget: &SearchBudget,
) -> Result<AutomorphismReport, SymmetryError> {
    let (generators, nodes_explored) = run_search(ec, budget, false)?;
    let order = closure_order(ec.n, &generators, budget.max_group_order)?;
    Ok(AutomorphismReport {
        is_trivial: generators.is_empty(),
        generators,
        order,
        nodes_explored,
    })
}

/// Full automorphism group of a graph.
pub fn graph_automorphism_group(
    g: &SimpleGraph,
    budget: &SearchBudget,
) -> Result<AutomorphismReport, SymmetryError> {
    report_from(&EdgeColored::from_graph(g), budget)
}

/// Full isometry group of a finite metric space.
pub fn space_automorphism_group(
    m: &FiniteMetricSpace,
    budget: &SearchBudget,
) -> Result<AutomorphismReport, SymmetryError> {
    report_from(&EdgeColored::from_space(m), budget)
}

/// Automorphisms of the graph preserving the vertex coloring.
pub fn graph_color_preserving(
    g: &SimpleGraph,
    colors: &[usize],
    budget: &SearchBudget,
) -> Result<AutomorphismReport, SymmetryError> {
    report_from(
        &EdgeColored::from_graph(g).with_vertex_colors(colors)?,
        budget,
    )
}

/// Isometries of the space preserving the point coloring.
pub fn space_color_preserving(
    m: &FiniteMetricSpace,
    colors: &[usize],
    budget: &SearchBudget,
) -> Result<AutomorphismReport, SymmetryError> {
    report_from(
        &EdgeColored::from_space(m).with_vertex_colors(colors)?,
        budget,
    )
}

/// Rigidity check, short-circuiting on the first nontrivial automorphism.
/// A `true` verdict is an exhaustive refutation.
pub fn graph_is_rigid(g: &SimpleGraph, budget: &SearchBudget) -> Result<bool, SymmetryError> {
    let (gens, _) = run_search(&EdgeColored::from_graph(g), budget, true)?;
    Ok(gens.is_empty())
}

/// Rigidity of a metric space under isometries.
pub fn space_is_rigid(m: &FiniteMetricSpace, budget: &SearchBudget) -> Result<bool, SymmetryError> {
    let (gens, _) = run_search(&EdgeColored::from_space(m), budget, true)?;
    Ok(gens.is_empty())
}

/// First nontrivial color-preserving isometry, if any.
pub fn space_nontrivial_color_preserving(
    m: &FiniteMetricSpace,
    colors: &[usize],
    budget: &SearchBudget,
) -> Result<Option<Permutation>, SymmetryError> {
    let ec = EdgeColored::from_space(m).with_vertex_colors(colors)?;
    let (gens, _) = run_search(&ec, budget, true)?;
    Ok(gens.into_iter().next())
}

/// First nontrivial color-preserving graph automorphism, if any.
pub fn graph_nontrivial_color_preserving(
    g: &SimpleGraph,
    colors: &[usize],
    budget: &SearchBudget,
) -> Result<Option<Permutation>, SymmetryError> {
    let ec = EdgeColored::from_graph(g).with_vertex_colors(colors)?;
    let (gens, _) = run_search(&ec, budget, true)?;
    Ok(gens.into_iter().next())
}

/// Exact distinguishing number search result.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum DistinguishingOutcome {
    /// Least color count with a symmetry-breaking coloring, plus a witness.
    Exact { number: usize, witness: Vec<usize> },
    /// Every coloring with up to `max_d` colors admits a nontrivial
    /// color-preserving automorphism.
    ExceedsMax { max_d: usize },
}

fn distinguishing_number(
    ec: &EdgeColored,
    max_d: usize,
    budget: &SearchBudget,
) -> Result<DistinguishingOutcome, SymmetryError> {
    let n = ec.n;
    for d in 1..=max_d.min(n) {
        // Colorings up to color permutation: restricted growth strings with
        // exactly d classes (fewer classes were covered at smaller d).
        let mut assignment = vec![0usize; n];
        let mut found: Option<Vec<usize>> = None;
        fn walk(
            ec: &EdgeColored,
            budget: &SearchBudget,
            assignment: &mut Vec<usize>,
            i: usize,
            used: usize,
            d: usize,
            found: &mut Option<Vec<usize>>,
        ) -> Result<(), SymmetryError> {
            if found.is_some() {
                return Ok(());
            }
            let n = assignment.len();
            if i == n {
                if used == d {
                    let colored = ec.clone().with_vertex_colors(assignment)?;
                    let (gens, _) = run_search(&colored, budget, true)?;
                    if gens.is_empty() {
                        *found = Some(assignment.clone());
                    }
                }
                return Ok(());
            }
            // Not enough positions left to reach d classes: prune.
            if used + (n - i) < d {
                return Ok(());
            }
            let top = (used + 1).min(d);
            for c in 0..top {
                assignment[i] = c;
                let nused = used.max(c + 1);
                walk(ec, budget, assignment, i + 1, nused, d, found)?;
                if found.is_some() {
                    return Ok(());
                }
            }
            Ok(())
        }
        walk(ec, budget, &mut assignment, 0, 0, d, &mut found)?;
        if let Some(witness) = found {
            return Ok(DistinguishingOutcome::Exact { number: d, witness });
        }
    }
    Ok(DistinguishingOutcome::ExceedsMax { max_d })
}

/// Least number of colors distinguishing the graph, up to `max_d`.
pub fn graph_distinguishing_number(
    g: &SimpleGraph,
    max_d: usize,
    budget: &SearchBudget,
) -> Result<DistinguishingOutcome, SymmetryError> {
    distinguishing_number(&EdgeColored::from_graph(g), max_d, budget)
}

/// Least number of colors distinguishing the metric space, up to `max_d`.
pub fn space_distinguishing_number(
    m: &FiniteMetricSpace,
    max_d: usize,
    budget: &SearchBudget,
) -> Result<DistinguishingOutcome, SymmetryError> {
    distinguishing_number(&EdgeColored::from_space(m), max_d, budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::Rational;

    fn qi(v: i64) -> Rational {
        Rational::from_int(v)
    }

    fn budget() -> SearchBudget {
        SearchBudget::default()
    }

    fn complete_graph(n: usize) -> SimpleGraph {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                edges.push((i, j));
            }
        }
        SimpleGraph::from_edges(n, &edges).unwrap()
    }

    fn cycle(n: usize) -> SimpleGraph {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        SimpleGraph::from_edges(n, &edges).unwrap()
    }

    fn path(n: usize) -> SimpleGraph {
        let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
        SimpleGraph::from_edges(n, &edges).unwrap()
    }

    /// The 7-vertex asymmetric tree: a path 0-1-2-3-4 with 5 hanging off
    /// vertex 1 and 6 off vertex 5 (legs of lengths 1, 2, 3 from vertex 1).
    fn rigid_tree_7() -> SimpleGraph {
        SimpleGraph::from_edges(7, &[(0, 1), (1, 2), (2, 3), (1, 4), (4, 5), (5, 6)]).unwrap()
    }

    #[test]
    fn known_group_orders() {
        let k4 = graph_automorphism_group(&complete_graph(4), &budget()).unwrap();
        assert_eq!(k4.order, 24);
        assert!(!k4.is_trivial);

        let p3 = graph_automorphism_group(&path(3), &budget()).unwrap();
        assert_eq!(p3.order, 2);

        let c5 = graph_automorphism_group(&cycle(5), &budget()).unwrap();
        assert_eq!(c5.order, 10);

        let k6 = graph_automorphism_group(&complete_graph(6), &budget()).unwrap();
        assert_eq!(k6.order, 720);

        let petersen = SimpleGraph::from_edges(
            10,
            &[
                (0, 1),
                (1, 2),
                (2, 3),
                (3, 4),
                (4, 0),
                (5, 7),
                (7, 9),
                (9, 6),
                (6, 8),
                (8, 5),
                (0, 5),
                (1, 6),
                (2, 7),
                (3, 8),
                (4, 9),
            ],
        )
        .unwrap();
        let report = graph_automorphism_group(&petersen, &budget()).unwrap();
        assert_eq!(report.order, 120);
    }

    #[test]
    fn generators_really_generate() {
        // Every reported generator must be an automorphism, and the closure
        // count must match the reported order by construction; spot-check a
        // couple of products stay inside.
        let g = cycle(6);
        let report = graph_automorphism_group(&g, &budget()).unwrap();
        assert_eq!(report.order, 12);
        let ec = EdgeColored::from_graph(&g);
        for gen in &report.generators {
            assert!(ec.is_automorphism(&gen.0));
            for other in &report.generators {
                assert!(ec.is_automorphism(&gen.then(other).0));
            }
        }
    }

    #[test]
    fn rigidity_examples() {
        let single = SimpleGraph::with_order(1);
        assert!(graph_is_rigid(&single, &budget()).unwrap());
        assert!(!graph_is_rigid(&cycle(5), &budget()).unwrap());
        assert!(graph_is_rigid(&rigid_tree_7(), &budget()).unwrap());
        // Every tree on fewer than 7 vertices has a symmetry.
        assert!(!graph_is_rigid(&path(6), &budget()).unwrap());
    }

    #[test]
    fn color_preserving_subgroup() {
        let g = cycle(5);
        // Constant coloring keeps the whole group.
        let full = graph_color_preserving(&g, &[0; 5], &budget()).unwrap();
        assert_eq!(full.order, 10);
        // A rainbow coloring kills everything.
        let rainbow = graph_color_preserving(&g, &[0, 1, 2, 3, 4], &budget()).unwrap();
        assert!(rainbow.is_trivial);
        // No 2-coloring distinguishes C5.
        let two = graph_color_preserving(&g, &[0, 0, 1, 0, 1], &budget()).unwrap();
        assert!(!two.is_trivial);
    }

    #[test]
    fn metric_space_as_complete_colored_graph() {
        // The pentagon metric has the dihedral group, same as the graph.
        let mut pairs = Vec::new();
        for i in 0..5usize {
            for j in (i + 1)..5 {
                let around = (j - i).min(5 - (j - i)) as i64;
                pairs.push((i, j, qi(around)));
            }
        }
        let labels: Vec<String> = (0..5).map(|i| format!("p{i}")).collect();
        let m = FiniteMetricSpace::from_pairs(labels, &pairs).unwrap();
        let report = space_automorphism_group(&m, &budget()).unwrap();
        assert_eq!(report.order, 10);
        assert!(!space_is_rigid(&m, &budget()).unwrap());
        // An isometry of the space preserves each distance graph; check by
        // restriction for the first generator.
        let g1 = m.distance_graph(qi(1)).graph;
        let gen = &report.generators[0];
        for (u, v) in g1.edges() {
            assert!(g1.has_edge(gen.apply(u), gen.apply(v)));
        }
    }

    #[test]
    fn distinguishing_numbers_small() {
        assert_eq!(
            graph_distinguishing_number(&cycle(5), 6, &budget()).unwrap(),
            DistinguishingOutcome::Exact {
                number: 3,
                witness: vec![0, 0, 0, 1, 2]
            }
        );
        match graph_distinguishing_number(&complete_graph(5), 6, &budget()).unwrap() {
            DistinguishingOutcome::Exact { number, .. } => assert_eq!(number, 5),
            other => panic!("unexpected outcome {other:?}"),
        }
        match graph_distinguishing_number(&rigid_tree_7(), 6, &budget()).unwrap() {
            DistinguishingOutcome::Exact { number, witness } => {
                assert_eq!(number, 1);
                assert_eq!(witness, vec![0; 7]);
            }
            other => panic!("unexpected outcome {other:?}"),
        }
        // Bounded search reports honestly when the cap is too low.
        assert_eq!(
            graph_distinguishing_number(&complete_graph(5), 3, &budget()).unwrap(),
            DistinguishingOutcome::ExceedsMax { max_d: 3 }
        );
    }

    #[test]
    fn witness_extraction() {
        let g = cycle(5);
        let w = graph_nontrivial_color_preserving(&g, &[0, 0, 1, 0, 1], &budget()).unwrap();
        let gperm = w.expect("two colors cannot distinguish C5");
        assert!(!gperm.is_identity());
        let ec = EdgeColored::from_graph(&g);
        assert!(ec.is_automorphism(&gperm.0));
        for v in 0..5 {
            let colors = [0, 0, 1, 0, 1];
            assert_eq!(colors[gperm.apply(v)], colors[v]);
        }
    }

    #[test]
    fn budget_is_enforced() {
        let tight = SearchBudget {
            max_nodes: 2,
            max_group_order: 10,
        };
        assert!(matches!(
            graph_automorphism_group(&complete_graph(6), &tight),
            Err(SymmetryError::NodeBudget { .. })
        ));
        let small_cap = SearchBudget {
            max_nodes: 5_000_000,
            max_group_order: 10,
        };
        assert!(matches!(
            graph_automorphism_group(&complete_graph(5), &small_cap),
            Err(SymmetryError::GroupClosureBudget { .. })
        ));
    }
}
