//! Rigid building blocks: trees, spiders, crabs, crab nests, and their
//! two-distance metric realizations.
//!
//! A spider is a tree with exactly one vertex of degree above two. A crab
//! replaces each spider vertex by a clique (the centre gets one extra
//! vertex) and each spider edge by a near-perfect matching between cliques;
//! the matching into the centre clique is arranged so that the i-th
//! centre-adjacent clique misses exactly the i-th centre vertex. A crab
//! nest strings together crabs of sharply growing heft with tightly
//! restricted cross edges. All three are rigid, which is what makes them
//! usable as symmetry anchors; the verifiers here re-check every
//! definitional clause from the raw graph rather than trusting the
//! constructors.
//!
//! The clique catalog of a crab consists of the maximal cliques on at
//! least three vertices. The matching edges between adjacent cliques are
//! themselves maximal as edges, so a catalog over all maximal cliques
//! would be impossible to reconcile with the order constraints.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::graph::SimpleGraph;
use crate::rational::Rational;
use crate::space::FiniteMetricSpace;
use crate::symmetry::{graph_is_rigid, SearchBudget, SymmetryError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GadgetError {
    #[error("spider needs at least three legs of positive length: {0}")]
    DegenerateSpider(String),
    #[error("crab heft must be at least 5, got {heft}")]
    HeftTooSmall { heft: usize },
    #[error("spider centre degree {got} does not match heft + 1 = {expected}")]
    CentreDegreeMismatch { expected: usize, got: usize },
    #[error("crab construction requires a rigid spider")]
    SpiderNotRigid,
    #[error("distances s={s}, r={r} admit no metric: the larger exceeds twice the smaller")]
    NotMetrizable { s: Rational, r: Rational },
    #[error("gadget distances must be positive and distinct, got s={s}, r={r}")]
    InvalidDistances { s: Rational, r: Rational },
    #[error("not a tree: {0}")]
    NotATree(String),
    #[error(transparent)]
    Symmetry(#[from] SymmetryError),
}

/// A tree with a unique vertex of degree above two.
#[derive(Debug, Clone)]
pub struct Spider {
    pub graph: SimpleGraph,
    pub centre: usize,
    pub legs: Vec<usize>,
    /// Verified by automorphism search, not assumed from the leg pattern.
    pub rigid: bool,
}

/// Builds the spider with the given leg lengths. Vertex 0 is the centre;
/// legs are laid out in argument order.
pub fn build_spider(leg_lengths: &[usize]) -> Result<Spider, GadgetError> {
    if leg_lengths.len() < 3 {
        return Err(GadgetError::DegenerateSpider(format!(
            "{} legs",
            leg_lengths.len()
        )));
    }
    if let Some(&z) = leg_lengths.iter().find(|&&l| l == 0) {
        return Err(GadgetError::DegenerateSpider(format!("leg of length {z}")));
    }
    let mut g = SimpleGraph::with_labels(vec!["c".to_string()]).unwrap();
    for (i, &len) in leg_lengths.iter().enumerate() {
        let mut prev = 0;
        for j in 0..len {
            let v = g.add_vertex(format!("l{i}.{j}")).unwrap();
            g.add_edge(prev, v).unwrap();
            prev = v;
        }
    }
    let rigid = graph_is_rigid(&g, &SearchBudget::default())?;
    Ok(Spider {
        graph: g,
        centre: 0,
        legs: leg_lengths.to_vec(),
        rigid,
    })
}

/// One clique per spider vertex, matched along spider edges.
#[derive(Debug, Clone)]
pub struct Crab {
    pub graph: SimpleGraph,
    pub heft: usize,
    /// Maximal cliques of order >= 3, indexed in spider-vertex order.
    pub cliques: Vec<Vec<usize>>,
    pub centre_clique: usize,
    pub spider: Spider,
    /// Catalog index to spider vertex.
    pub spider_map: Vec<usize>,
}

impl Crab {
    pub fn order(&self) -> usize {
        self.graph.order()
    }

    /// Catalog indices whose spider image is a leaf.
    pub fn end_cliques(&self) -> Vec<usize> {
        (0..self.cliques.len())
            .filter(|&k| self.spider.graph.degree(self.spider_map[k]) == 1)
            .collect()
    }

    pub fn catalog(&self) -> CrabCatalog {
        CrabCatalog {
            heft: self.heft,
            order: self.order(),
            centre_clique: self.centre_clique,
            cliques: self
                .cliques
                .iter()
                .map(|c| c.iter().map(|&v| self.graph.label(v).to_string()).collect())
                .collect(),
            spider_map: self.spider_map.clone(),
        }
    }
}

/// Serializable clique catalog of one crab.
#[derive(Debug, Clone, Serialize)]
pub struct CrabCatalog {
    pub heft: usize,
    pub order: usize,
    pub centre_clique: usize,
    pub cliques: Vec<Vec<String>>,
    pub spider_map: Vec<usize>,
}

/// Builds the crab of the given heft over a rigid spider whose centre
/// degree is heft + 1. Centre-clique labels are `c{j}`, other cliques use
/// `q{spider_vertex}.{j}`.
pub fn build_crab(heft: usize, spider: &Spider) -> Result<Crab, GadgetError> {
    if heft < 5 {
        return Err(GadgetError::HeftTooSmall { heft });
    }
    let centre_degree = spider.graph.degree(spider.centre);
    if centre_degree != heft + 1 {
        return Err(GadgetError::CentreDegreeMismatch {
            expected: heft + 1,
            got: centre_degree,
        });
    }
    if !spider.rigid {
        return Err(GadgetError::SpiderNotRigid);
    }

    let sn = spider.graph.order();
    let mut labels = Vec::new();
    let mut offsets = Vec::with_capacity(sn);
    for k in 0..sn {
        offsets.push(labels.len());
        let size = if k == spider.centre { heft + 1 } else { heft };
        for j in 0..size {
            if k == spider.centre {
                labels.push(format!("c{j}"));
            } else {
                labels.push(format!("q{k}.{j}"));
            }
        }
    }
    let mut g = SimpleGraph::with_labels(labels).unwrap();

    let clique_size = |k: usize| if k == spider.centre { heft + 1 } else { heft };
    for (k, &off) in offsets.iter().enumerate() {
        let size = clique_size(k);
        for a in 0..size {
            for b in (a + 1)..size {
                g.add_edge(off + a, off + b).unwrap();
            }
        }
    }

    // Centre-adjacent cliques in spider order; the i-th one misses centre
    // vertex i, covering the rest in order.
    let centre_neighbors: Vec<usize> = spider.graph.neighbors(spider.centre).to_vec();
    for (i, &k) in centre_neighbors.iter().enumerate() {
        for j in 0..heft {
            let target = if j < i { j } else { j + 1 };
            g.add_edge(offsets[k] + j, offsets[spider.centre] + target)
                .unwrap();
        }
    }
    // Remaining spider edges join equal-order cliques vertex by vertex.
    for (u, v) in spider.graph.edges() {
        if u == spider.centre || v == spider.centre {
            continue;
        }
        for j in 0..heft {
            g.add_edge(offsets[u] + j, offsets[v] + j).unwrap();
        }
    }

    let cliques: Vec<Vec<usize>> = (0..sn)
        .map(|k| (offsets[k]..offsets[k] + clique_size(k)).collect())
        .collect();
    Ok(Crab {
        graph: g,
        heft,
        cliques,
        centre_clique: spider.centre,
        spider: spider.clone(),
        spider_map: (0..sn).collect(),
    })
}

/// One definitional clause with its verdict.
#[derive(Debug, Clone, Serialize)]
pub struct ClauseCheck {
    pub clause: String,
    pub passed: bool,
    pub detail: String,
}

/// Clause-by-clause verification verdict.
#[derive(Debug, Clone, Serialize)]
pub struct StructureReport {
    pub passed: bool,
    pub clauses: Vec<ClauseCheck>,
}

impl StructureReport {
    fn from_clauses(clauses: Vec<ClauseCheck>) -> Self {
        StructureReport {
            passed: clauses.iter().all(|c| c.passed),
            clauses,
        }
    }

    pub fn first_failure(&self) -> Option<&ClauseCheck> {
        self.clauses.iter().find(|c| !c.passed)
    }
}

/// All maximal cliques with at least three vertices, each sorted, the
/// catalog ordered lexicographically.
fn maximal_cliques_min3(g: &SimpleGraph) -> Vec<Vec<usize>> {
    let n = g.order();
    let words = n.div_ceil(64);
    let mut adj = vec![vec![0u64; words]; n];
    for (u, v) in g.edges() {
        adj[u][v / 64] |= 1 << (v % 64);
        adj[v][u / 64] |= 1 << (u % 64);
    }

    fn bits(set: &[u64]) -> impl Iterator<Item = usize> + '_ {
        set.iter().enumerate().flat_map(|(w, &word)| {
            let mut word = word;
            std::iter::from_fn(move || {
                if word == 0 {
                    None
                } else {
                    let b = word.trailing_zeros() as usize;
                    word &= word - 1;
                    Some(w * 64 + b)
                }
            })
        })
    }

    fn count_and(a: &[u64], b: &[u64]) -> u32 {
        a.iter().zip(b).map(|(x, y)| (x & y).count_ones()).sum()
    }

    fn bk(
        adj: &[Vec<u64>],
        r: &mut Vec<usize>,
        mut p: Vec<u64>,
        mut x: Vec<u64>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if p.iter().all(|&w| w == 0) && x.iter().all(|&w| w == 0) {
            if r.len() >= 3 {
                let mut c = r.clone();
                c.sort_unstable();
                out.push(c);
            }
            return;
        }
        let pivot = bits(&p)
            .chain(bits(&x))
            .max_by_key(|&u| count_and(&p, &adj[u]))
            .unwrap();
        let cand: Vec<usize> = bits(&p)
            .filter(|&v| adj[pivot][v / 64] & (1 << (v % 64)) == 0)
            .collect();
        for v in cand {
            let np: Vec<u64> = p.iter().zip(&adj[v]).map(|(a, b)| a & b).collect();
            let nx: Vec<u64> = x.iter().zip(&adj[v]).map(|(a, b)| a & b).collect();
            r.push(v);
            bk(adj, r, np, nx, out);
            r.pop();
            p[v / 64] &= !(1 << (v % 64));
            x[v / 64] |= 1 << (v % 64);
        }
    }

    let mut p = vec![0u64; words];
    for v in 0..n {
        p[v / 64] |= 1 << (v % 64);
    }
    let mut out = Vec::new();
    bk(&adj, &mut Vec::new(), p, vec![0u64; words], &mut out);
    out.sort();
    out
}

/// How two catalog cliques relate across their cross edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PairKind {
    Independent,
    Adjacent,
    Malformed,
}

/// Adjacency per the definition: an injection from the smaller clique into
/// the larger with cross edges exactly on matched pairs.
fn classify_pair(g: &SimpleGraph, a: &[usize], b: &[usize]) -> PairKind {
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let mut images = Vec::new();
    let mut any_edge = false;
    let mut valid = true;
    for &x in small {
        let hits: Vec<usize> = large
            .iter()
            .copied()
            .filter(|&y| g.has_edge(x, y))
            .collect();
        if !hits.is_empty() {
            any_edge = true;
        }
        match hits.len() {
            1 => images.push(hits[0]),
            0 => valid = false,
            _ => valid = false,
        }
    }
    if !any_edge {
        return PairKind::Independent;
    }
    let mut seen = images.clone();
    seen.sort_unstable();
    seen.dedup();
    if valid && seen.len() == images.len() {
        PairKind::Adjacent
    } else {
        PairKind::Malformed
    }
}

/// Checks the four crab clauses from the raw graph: vertex partition,
/// clique orders, the missed-vertex rule at the centre, and the spider
/// quotient (tree shape, unique high-degree vertex at the centre clique,
/// rigidity).
pub fn verify_crab(g: &SimpleGraph, heft: usize, budget: &SearchBudget) -> StructureReport {
    let mut clauses = Vec::new();
    let push = |clauses: &mut Vec<ClauseCheck>, clause: &str, passed: bool, detail: String| {
        clauses.push(ClauseCheck {
            clause: clause.to_string(),
            passed,
            detail,
        });
    };

    push(
        &mut clauses,
        "heft",
        heft >= 5,
        format!("heft {heft}, minimum 5"),
    );

    let cliques = maximal_cliques_min3(g);
    let n = g.order();
    let mut membership = vec![0usize; n];
    for c in &cliques {
        for &v in c {
            membership[v] += 1;
        }
    }
    let uncovered = membership.iter().filter(|&&m| m != 1).count();
    push(
        &mut clauses,
        "vertex-partition",
        uncovered == 0,
        if uncovered == 0 {
            format!(
                "{} vertices each in exactly one of {} cliques",
                n,
                cliques.len()
            )
        } else {
            format!("{uncovered} vertices not in exactly one catalog clique")
        },
    );

    let big: Vec<usize> = (0..cliques.len())
        .filter(|&k| cliques[k].len() == heft + 1)
        .collect();
    let off_size = cliques
        .iter()
        .filter(|c| c.len() != heft && c.len() != heft + 1)
        .count();
    let orders_ok = big.len() == 1 && off_size == 0;
    push(
        &mut clauses,
        "clique-orders",
        orders_ok,
        format!(
            "{} cliques of order {}, {} off-size, centre candidates {}",
            cliques.len(),
            heft,
            off_size,
            big.len()
        ),
    );
    if !orders_ok || uncovered != 0 {
        return StructureReport::from_clauses(clauses);
    }
    let centre = big[0];

    let k = cliques.len();
    let mut kinds = vec![vec![PairKind::Independent; k]; k];
    let mut malformed = None;
    for i in 0..k {
        for j in (i + 1)..k {
            let kind = classify_pair(g, &cliques[i], &cliques[j]);
            kinds[i][j] = kind;
            kinds[j][i] = kind;
            if kind == PairKind::Malformed && malformed.is_none() {
                malformed = Some((i, j));
            }
        }
    }
    push(
        &mut clauses,
        "cross-edges",
        malformed.is_none(),
        match malformed {
            None => "every clique pair is independent or cleanly matched".to_string(),
            Some((i, j)) => format!("cliques {i} and {j} share edges without a matching pattern"),
        },
    );

    let centre_adjacent: Vec<usize> = (0..k)
        .filter(|&j| j != centre && kinds[centre][j] == PairKind::Adjacent)
        .collect();
    let mut missed_ok = true;
    let mut missed_detail = format!("{} centre-adjacent cliques", centre_adjacent.len());
    for &x in &cliques[centre] {
        let missing = centre_adjacent
            .iter()
            .filter(|&&j| cliques[j].iter().all(|&y| !g.has_edge(x, y)))
            .count();
        if missing != 1 {
            missed_ok = false;
            missed_detail = format!(
                "centre vertex {} is missed by {} adjacent cliques instead of one",
                g.label(x),
                missing
            );
            break;
        }
    }
    push(&mut clauses, "missed-vertex", missed_ok, missed_detail);

    // Quotient on the catalog must be a rigid spider centred at the big
    // clique, with centre degree heft + 1.
    let mut quotient = SimpleGraph::with_order(k);
    for (i, row) in kinds.iter().enumerate() {
        for (j, kind) in row.iter().enumerate().skip(i + 1) {
            if *kind == PairKind::Adjacent {
                quotient.add_edge(i, j).unwrap();
            }
        }
    }
    let is_tree = quotient.edge_count() == k.saturating_sub(1) && quotient.is_connected();
    let high: Vec<usize> = (0..k).filter(|&v| quotient.degree(v) > 2).collect();
    let shape_ok = is_tree && high == vec![centre] && quotient.degree(centre) == heft + 1;
    let rigid = if shape_ok {
        match graph_is_rigid(&quotient, budget) {
            Ok(r) => r,
            Err(e) => {
                push(
                    &mut clauses,
                    "spider-quotient",
                    false,
                    format!("rigidity check aborted: {e}"),
                );
                return StructureReport::from_clauses(clauses);
            }
        }
    } else {
        false
    };
    push(
        &mut clauses,
        "spider-quotient",
        shape_ok && rigid,
        if !is_tree {
            "clique quotient is not a tree".to_string()
        } else if high != vec![centre] {
            format!("high-degree quotient vertices {high:?}, expected only the centre clique")
        } else if quotient.degree(centre) != heft + 1 {
            format!(
                "centre quotient degree {} instead of {}",
                quotient.degree(centre),
                heft + 1
            )
        } else if !rigid {
            "quotient spider has a nontrivial automorphism".to_string()
        } else {
            format!("rigid spider on {k} cliques, centre degree {}", heft + 1)
        },
    );

    StructureReport::from_clauses(clauses)
}

/// Every triangle lies inside a single catalog clique.
pub fn triangles_confined(g: &SimpleGraph, cliques: &[Vec<usize>]) -> bool {
    let n = g.order();
    let mut clique_of = vec![usize::MAX; n];
    for (k, c) in cliques.iter().enumerate() {
        for &v in c {
            clique_of[v] = k;
        }
    }
    for (u, v) in g.edges() {
        for &w in g.neighbors(u) {
            if w != v && g.has_edge(v, w) {
                let k = clique_of[u];
                if k == usize::MAX || clique_of[v] != k || clique_of[w] != k {
                    return false;
                }
            }
        }
    }
    true
}

/// Crabs of sharply growing heft with cross edges restricted to one
/// marked end-clique vertex per crab.
#[derive(Debug, Clone)]
pub struct CrabNest {
    pub graph: SimpleGraph,
    pub components: Vec<Crab>,
    /// Vertices of component i inside `graph`, in component order.
    pub component_vertices: Vec<Vec<usize>>,
    /// Marked endpoint r_i of each component, as a `graph` index.
    pub endpoints: Vec<usize>,
}

impl CrabNest {
    pub fn catalog(&self) -> NestCatalog {
        NestCatalog {
            hefts: self.components.iter().map(|c| c.heft).collect(),
            orders: self.components.iter().map(|c| c.order()).collect(),
            endpoints: self
                .endpoints
                .iter()
                .map(|&v| self.graph.label(v).to_string())
                .collect(),
        }
    }
}

/// Serializable crab nest summary.
#[derive(Debug, Clone, Serialize)]
pub struct NestCatalog {
    pub hefts: Vec<usize>,
    pub orders: Vec<usize>,
    pub endpoints: Vec<String>,
}

/// Assembles a nest with one crab per heft, each over the spider with legs
/// 1..=heft+1. Component i's labels carry the prefix `h{i}.`. With
/// `linked`, each endpoint r_i (i >= 1) gets one cross edge down to the
/// previous component's centre clique, the only cross-edge pattern the
/// nest definition allows. Heft order is not enforced here; the verifier
/// is the arbiter, which keeps deliberately broken nests constructible
/// for testing.
pub fn build_crab_nest(hefts: &[usize], linked: bool) -> Result<CrabNest, GadgetError> {
    let mut components = Vec::new();
    for &h in hefts {
        let legs: Vec<usize> = (1..=h + 1).collect();
        let spider = build_spider(&legs)?;
        components.push(build_crab(h, &spider)?);
    }

    let mut labels = Vec::new();
    let mut component_vertices = Vec::new();
    for (i, crab) in components.iter().enumerate() {
        let base = labels.len();
        component_vertices.push((base..base + crab.order()).collect::<Vec<usize>>());
        for v in 0..crab.order() {
            labels.push(format!("h{i}.{}", crab.graph.label(v)));
        }
    }
    let mut g = SimpleGraph::with_labels(labels).unwrap();
    for (i, crab) in components.iter().enumerate() {
        let verts = &component_vertices[i];
        for (u, v) in crab.graph.edges() {
            g.add_edge(verts[u], verts[v]).unwrap();
        }
    }

    let mut endpoints = Vec::new();
    for (i, crab) in components.iter().enumerate() {
        let end = *crab.end_cliques().first().expect("spider has leaves");
        let local = crab.cliques[end][0];
        endpoints.push(component_vertices[i][local]);
    }
    if linked {
        for i in 1..components.len() {
            let prev_centre = components[i - 1].cliques[components[i - 1].centre_clique][0];
            let target = component_vertices[i - 1][prev_centre];
            g.add_edge(endpoints[i], target).unwrap();
        }
    }

    Ok(CrabNest {
        graph: g,
        components,
        component_vertices,
        endpoints,
    })
}

/// Checks the nest clauses: components partition the graph and sit induced,
/// each is a crab, hefts grow by more than two, one marked end-clique
/// vertex per component, and cross edges obey the endpoint rules: a cross
/// edge into a lower component leaves from the higher component's endpoint,
/// and an endpoint with a downward cross edge has no other cross edge.
pub fn verify_crab_nest(nest: &CrabNest, budget: &SearchBudget) -> StructureReport {
    let mut clauses = Vec::new();
    let g = &nest.graph;
    let n = g.order();

    let mut owner = vec![usize::MAX; n];
    let mut partition_ok = nest.component_vertices.len() == nest.components.len();
    for (i, verts) in nest.component_vertices.iter().enumerate() {
        for &v in verts {
            if v >= n || owner[v] != usize::MAX {
                partition_ok = false;
            } else {
                owner[v] = i;
            }
        }
    }
    partition_ok &= owner.iter().all(|&o| o != usize::MAX);
    let mut induced_ok = true;
    for (i, crab) in nest.components.iter().enumerate() {
        if !partition_ok {
            break;
        }
        let verts = &nest.component_vertices[i];
        if verts.len() != crab.order() {
            induced_ok = false;
            break;
        }
        let mapped: BTreeSet<(usize, usize)> = crab
            .graph
            .edges()
            .into_iter()
            .map(|(u, v)| {
                let (a, b) = (verts[u], verts[v]);
                (a.min(b), a.max(b))
            })
            .collect();
        let within: BTreeSet<(usize, usize)> = g
            .edges()
            .into_iter()
            .filter(|&(u, v)| owner[u] == i && owner[v] == i)
            .collect();
        if mapped != within {
            induced_ok = false;
            break;
        }
    }
    clauses.push(ClauseCheck {
        clause: "component-partition".to_string(),
        passed: partition_ok && induced_ok,
        detail: if partition_ok && induced_ok {
            format!(
                "{} components partition {} vertices, each induced",
                nest.components.len(),
                n
            )
        } else if !partition_ok {
            "component vertex sets do not partition the nest graph".to_string()
        } else {
            "a component is not an induced subgraph of the nest".to_string()
        },
    });

    let mut crab_ok = true;
    let mut crab_detail = "every component verifies as a crab".to_string();
    for (i, crab) in nest.components.iter().enumerate() {
        let report = verify_crab(&crab.graph, crab.heft, budget);
        if !report.passed {
            crab_ok = false;
            crab_detail = format!(
                "component {i} fails clause {}",
                report.first_failure().map_or("?", |c| c.clause.as_str())
            );
            break;
        }
    }
    clauses.push(ClauseCheck {
        clause: "component-crabs".to_string(),
        passed: crab_ok,
        detail: crab_detail,
    });

    let hefts: Vec<usize> = nest.components.iter().map(|c| c.heft).collect();
    let growth_ok = hefts.windows(2).all(|w| w[0] + 2 < w[1]);
    clauses.push(ClauseCheck {
        clause: "heft-growth".to_string(),
        passed: growth_ok,
        detail: format!("hefts {hefts:?}, required gap above 2"),
    });

    let mut endpoint_ok = nest.endpoints.len() == nest.components.len();
    let mut endpoint_detail = "one marked end-clique vertex per component".to_string();
    if endpoint_ok && partition_ok {
        for (i, &r) in nest.endpoints.iter().enumerate() {
            if owner[r] != i {
                endpoint_ok = false;
                endpoint_detail = format!("endpoint {} lies outside component {i}", g.label(r));
                break;
            }
            let crab = &nest.components[i];
            let local = nest.component_vertices[i]
                .iter()
                .position(|&v| v == r)
                .unwrap();
            let in_end = crab
                .end_cliques()
                .iter()
                .any(|&k| crab.cliques[k].contains(&local));
            if !in_end {
                endpoint_ok = false;
                endpoint_detail = format!(
                    "endpoint {} is not in an end clique of component {i}",
                    g.label(r)
                );
                break;
            }
        }
    }
    clauses.push(ClauseCheck {
        clause: "endpoint-marks".to_string(),
        passed: endpoint_ok,
        detail: endpoint_detail,
    });

    let mut rule_4a = true;
    let mut detail_4a = "downward cross edges leave only from endpoints".to_string();
    let mut rule_4b = true;
    let mut detail_4b = "no endpoint has a downward cross edge plus another".to_string();
    if partition_ok && endpoint_ok {
        let cross: Vec<(usize, usize)> = g
            .edges()
            .into_iter()
            .filter(|&(u, v)| owner[u] != owner[v])
            .collect();
        for &(u, v) in &cross {
            let (hi, lo) = if owner[u] > owner[v] { (u, v) } else { (v, u) };
            if hi != nest.endpoints[owner[hi]] {
                rule_4a = false;
                detail_4a = format!(
                    "cross edge {} -- {} leaves component {} away from its endpoint",
                    g.label(hi),
                    g.label(lo),
                    owner[hi]
                );
                break;
            }
        }
        for (i, &r) in nest.endpoints.iter().enumerate() {
            let partners: Vec<usize> = cross
                .iter()
                .filter_map(|&(u, v)| {
                    if u == r {
                        Some(v)
                    } else if v == r {
                        Some(u)
                    } else {
                        None
                    }
                })
                .collect();
            let downward = partners.iter().any(|&z| owner[z] < i);
            if downward && partners.len() > 1 {
                rule_4b = false;
                detail_4b = format!(
                    "endpoint {} carries {} cross edges alongside a downward one",
                    g.label(r),
                    partners.len()
                );
                break;
            }
        }
    }
    clauses.push(ClauseCheck {
        clause: "cross-edges-endpoint".to_string(),
        passed: rule_4a,
        detail: detail_4a,
    });
    clauses.push(ClauseCheck {
        clause: "cross-edges-single".to_string(),
        passed: rule_4b,
        detail: detail_4b,
    });

    StructureReport::from_clauses(clauses)
}

/// A two-distance metric realization of a graph: edges at `s`, everything
/// else at `r`.
#[derive(Debug, Clone)]
pub struct GadgetMetric {
    pub space: FiniteMetricSpace,
    pub base_graph: SimpleGraph,
}

/// Realizes the graph as a metric space with spectrum inside {s, r}. Two
/// positive distances form a metric exactly when the larger is at most
/// twice the smaller, so validation reduces to that single comparison.
pub fn gadget_metric(
    g: &SimpleGraph,
    s: Rational,
    r: Rational,
) -> Result<GadgetMetric, GadgetError> {
    if !s.is_positive() || !r.is_positive() || s == r {
        return Err(GadgetError::InvalidDistances { s, r });
    }
    if s.max(r) > s.min(r).doubled() {
        return Err(GadgetError::NotMetrizable { s, r });
    }
    let n = g.order();
    let mut dist = vec![Rational::ZERO; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                dist[i * n + j] = if g.has_edge(i, j) { s } else { r };
            }
        }
    }
    let labels: Vec<String> = g.labels().to_vec();
    debug_assert!({
        let rows: Vec<Vec<Rational>> = dist.chunks(n).map(|r| r.to_vec()).collect();
        crate::space::validate_matrix(&labels, &rows).is_empty()
    });
    let space = FiniteMetricSpace::from_validated_parts(labels, dist);
    Ok(GadgetMetric {
        space,
        base_graph: g.clone(),
    })
}

/// Canonical form of a tree, rooted at its centroid; `None` when the graph
/// is not a tree. Equal strings mean isomorphic trees.
pub fn tree_canonical(g: &SimpleGraph) -> Option<String> {
    let n = g.order();
    if n == 0 || g.edge_count() != n - 1 || !g.is_connected() {
        return None;
    }
    if n == 1 {
        return Some("()".to_string());
    }

    fn encode(g: &SimpleGraph, v: usize, parent: Option<usize>) -> String {
        let mut parts: Vec<String> = g
            .neighbors(v)
            .iter()
            .filter(|&&u| Some(u) != parent)
            .map(|&u| encode(g, u, Some(v)))
            .collect();
        parts.sort();
        format!("({})", parts.concat())
    }

    // Centroids minimize the largest remaining component.
    let mut sizes = vec![0usize; n];
    fn subtree(g: &SimpleGraph, v: usize, parent: Option<usize>, sizes: &mut Vec<usize>) {
        sizes[v] = 1;
        for &u in g.neighbors(v) {
            if Some(u) != parent {
                subtree(g, u, Some(v), sizes);
                sizes[v] += sizes[u];
            }
        }
    }
    subtree(g, 0, None, &mut sizes);
    fn centroids(
        g: &SimpleGraph,
        v: usize,
        parent: Option<usize>,
        n: usize,
        sizes: &[usize],
        out: &mut Vec<usize>,
    ) {
        let mut worst = n - sizes[v];
        for &u in g.neighbors(v) {
            if Some(u) != parent {
                worst = worst.max(sizes[u]);
                centroids(g, u, Some(v), n, sizes, out);
            }
        }
        if worst <= n / 2 {
            out.push(v);
        }
    }
    let mut cs = Vec::new();
    centroids(g, 0, None, n, &sizes, &mut cs);
    cs.sort_unstable();

    match cs.len() {
        1 => Some(encode(g, cs[0], None)),
        2 => {
            let mut halves = [encode(g, cs[0], Some(cs[1])), encode(g, cs[1], Some(cs[0]))];
            halves.sort();
            Some(format!("[{}{}]", halves[0], halves[1]))
        }
        _ => unreachable!("a tree has one or two centroids"),
    }
}

/// Smallest-first supply of rigid trees: spiders with pairwise distinct
/// legs, enumerated by total size then lexicographic leg pattern, skipping
/// anything isomorphic to a forbidden shape. Distinct-leg spiders exist at
/// every size from seven up, so the escalation always lands; sizes below
/// seven are unattainable and the floor is raised silently.
pub fn build_rigid_tree(
    min_vertices: usize,
    forbidden: &[SimpleGraph],
    budget: &SearchBudget,
) -> Result<SimpleGraph, GadgetError> {
    let skip: BTreeSet<String> = forbidden.iter().filter_map(tree_canonical).collect();
    let mut total = min_vertices.max(7) - 1;
    loop {
        for legs in distinct_leg_patterns(total) {
            let spider = build_spider(&legs)?;
            let canon = tree_canonical(&spider.graph).expect("spiders are trees");
            if skip.contains(&canon) {
                continue;
            }
            if graph_is_rigid(&spider.graph, budget)? {
                return Ok(spider.graph);
            }
        }
        total += 1;
    }
}

/// Partitions of `total` into at least three distinct positive parts,
/// ascending lexicographic.
fn distinct_leg_patterns(total: usize) -> Vec<Vec<usize>> {
    fn rec(remaining: usize, min_part: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if remaining == 0 {
            if prefix.len() >= 3 {
                out.push(prefix.clone());
            }
            return;
        }
        let mut part = min_part;
        while part <= remaining {
            prefix.push(part);
            rec(remaining - part, part + 1, prefix, out);
            prefix.pop();
            part += 1;
        }
    }
    let mut out = Vec::new();
    rec(total, 1, &mut Vec::new(), &mut out);
    out
}
