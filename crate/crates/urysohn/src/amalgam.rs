//! Amalgamation of finite metric spaces over a spectrum.
//!
//! Three mechanisms: a complete backtracking search for any in-spectrum
//! completion, a bounded-below variant that keeps all cross distances at or
//! above a floor, and the canonical ⊕-amalgam whose every cross distance is
//! `min over shared x of dist_A(a,x) ⊕ dist_B(x,b)`.
//!
//! The search assigns one distance per (A-only, B-only) pair. Every triangle
//! of the union has at most two unknown sides (two of its points always lie
//! on the same side), so forward checking through shared endpoints is a
//! complete consistency rule: a full assignment surviving it is a metric.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::rational::Rational;
use crate::space::{validate_matrix, FiniteMetricSpace, MetricViolation};
use crate::spectrum::Spectrum;

/// Two spaces with an identified common part on which they agree.
#[derive(Debug, Clone)]
pub struct AmalgamationInstance {
    a: FiniteMetricSpace,
    b: FiniteMetricSpace,
    /// Pairs (index in A, index in B), injective both ways.
    shared: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InstanceError {
    #[error("identification index ({0}, {1}) out of range")]
    IndexOutOfRange(usize, usize),
    #[error("identification is not injective at ({0}, {1})")]
    NotInjective(usize, usize),
    #[error("common part disagrees on ({x}, {y}): {in_a} in A, {in_b} in B")]
    CommonPartDisagrees {
        x: String,
        y: String,
        in_a: Rational,
        in_b: Rational,
    },
}

impl AmalgamationInstance {
    /// Validates the identification and the agreement of the common part.
    pub fn new(
        a: FiniteMetricSpace,
        b: FiniteMetricSpace,
        identification: &[(usize, usize)],
    ) -> Result<Self, InstanceError> {
        let mut seen_a = vec![false; a.len()];
        let mut seen_b = vec![false; b.len()];
        for &(i, j) in identification {
            if i >= a.len() || j >= b.len() {
                return Err(InstanceError::IndexOutOfRange(i, j));
            }
            if seen_a[i] || seen_b[j] {
                return Err(InstanceError::NotInjective(i, j));
            }
            seen_a[i] = true;
            seen_b[j] = true;
        }
        for (k, &(i1, j1)) in identification.iter().enumerate() {
            for &(i2, j2) in &identification[k + 1..] {
                let da = a.dist(i1, i2);
                let db = b.dist(j1, j2);
                if da != db {
                    return Err(InstanceError::CommonPartDisagrees {
                        x: a.label(i1).to_owned(),
                        y: a.label(i2).to_owned(),
                        in_a: da,
                        in_b: db,
                    });
                }
            }
        }
        Ok(AmalgamationInstance {
            a,
            b,
            shared: identification.to_vec(),
        })
    }

    pub fn a(&self) -> &FiniteMetricSpace {
        &self.a
    }

    pub fn b(&self) -> &FiniteMetricSpace {
        &self.b
    }

    pub fn shared(&self) -> &[(usize, usize)] {
        &self.shared
    }

    /// Result-space layout: all of A first, then B's unshared points in B
    /// order. Returns (labels, per-A index map, per-B index map).
    fn layout(&self) -> (Vec<String>, Vec<usize>, Vec<usize>) {
        let mut labels: Vec<String> = self.a.labels().to_vec();
        let a_map: Vec<usize> = (0..self.a.len()).collect();
        let mut b_map = vec![usize::MAX; self.b.len()];
        for &(i, j) in &self.shared {
            b_map[j] = i;
        }
        for (j, slot) in b_map.iter_mut().enumerate() {
            if *slot != usize::MAX {
                continue;
            }
            let mut label = self.b.label(j).to_owned();
            let mut tick = 0;
            while labels.contains(&label) {
                tick += 1;
                label = format!("{}~{tick}", self.b.label(j));
            }
            *slot = labels.len();
            labels.push(label);
        }
        (labels, a_map, b_map)
    }
}

/// Where a new cross distance came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    /// Chosen by the backtracking search.
    SearchChoice,
    /// Search value lifted to a floor.
    BoundedLift { floor: Rational },
    /// The ⊕-formula, with the minimizing shared point.
    OplusCanonical { mu: usize },
}

/// One completed cross pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct NewDistance {
    /// Index of the A-side point in the result space.
    pub a: usize,
    /// Index of the B-side point in the result space.
    pub b: usize,
    pub value: Rational,
    pub source: Provenance,
}

/// A completion: the union space plus provenance for every new distance.
#[derive(Debug, Clone)]
pub struct AmalgamResult {
    pub space: FiniteMetricSpace,
    pub new_distances: Vec<NewDistance>,
    /// Result index of each A point.
    pub a_indices: Vec<usize>,
    /// Result index of each B point.
    pub b_indices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AmalgamError {
    #[error("no in-spectrum completion exists ({explored} nodes explored)")]
    Unamalgamable { explored: u64 },
    #[error("search budget exhausted after {explored} nodes")]
    BudgetExceeded { explored: u64 },
    #[error("floor {s} is not an element of the spectrum")]
    FloorNotInSpectrum { s: Rational },
    #[error("bounded-amalgamation hypothesis fails: {detail}")]
    HypothesisViolated { detail: String },
    #[error("the ⊕-formula needs a nonempty common part; use the search instead")]
    EmptyCommonPart,
    #[error("completion is not a metric (spectrum violates the prerequisites): {0}")]
    NotMetric(MetricViolation),
    #[error("constraint references pair ({0}, {1}) which is not a new cross pair")]
    NotACrossPair(usize, usize),
}

/// Orientation constraint for the constrained search: the completed space
/// must satisfy `dist(p, x) <= dist(p, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Orientation {
    pub p: usize,
    pub x: usize,
    pub y: usize,
}

/// Extra requirements threaded through the constrained search.
#[derive(Debug, Clone, Default)]
pub struct CompletionConstraints {
    /// Minimum value per cross pair, keyed by result indices in either
    /// order.
    pub floors: BTreeMap<(usize, usize), Rational>,
    /// Floor applied to every cross pair.
    pub global_floor: Option<Rational>,
    /// `dist(p, x) <= dist(p, y)` constraints over result indices.
    pub orientations: Vec<Orientation>,
}

/// Completes the instance with any in-spectrum assignment, searching new
/// pairs in ascending interval-width order and values largest first. The
/// first completion in this deterministic order is returned. Exhaustion
/// within the budget is a genuine refutation.
pub fn amalgamate_search(
    instance: &AmalgamationInstance,
    s: &Spectrum,
    budget: u64,
) -> Result<AmalgamResult, AmalgamError> {
    search_with_constraints(instance, s, &CompletionConstraints::default(), budget)
}

/// Completes with every cross distance at least `floor`.
///
/// With a nonempty common part this follows the lift recipe: verify the
/// hypothesis `floor <= dist_A(a,x) + dist_B(x,b)` for all cross triples
/// through shared points, find any completion, then replace each cross
/// distance `d` with `max(d, floor)`. With an empty common part the
/// hypothesis is vacuous and the floor is instead imposed during the search.
pub fn amalgamate_bounded(
    instance: &AmalgamationInstance,
    s: &Spectrum,
    floor: Rational,
    budget: u64,
) -> Result<AmalgamResult, AmalgamError> {
    let a_only: Vec<usize> = (0..instance.a.len())
        .filter(|&i| !instance.shared.iter().any(|&(x, _)| x == i))
        .collect();
    let b_only: Vec<usize> = (0..instance.b.len())
        .filter(|&j| !instance.shared.iter().any(|&(_, y)| y == j))
        .collect();

    if instance.shared.is_empty() {
        // The lemma hypothesis is vacuous here; the floor is imposed during
        // the search itself. An unreachable floor is a hypothesis failure
        // before it is a membership failure.
        if floor > s.max() && !a_only.is_empty() && !b_only.is_empty() {
            return Err(AmalgamError::HypothesisViolated {
                detail: format!("empty common part and no spectrum element reaches {floor}"),
            });
        }
        if !s.contains(floor) {
            return Err(AmalgamError::FloorNotInSpectrum { s: floor });
        }
        let constraints = CompletionConstraints {
            global_floor: Some(floor),
            ..Default::default()
        };
        let mut result = search_with_constraints(instance, s, &constraints, budget)?;
        for nd in &mut result.new_distances {
            nd.source = Provenance::BoundedLift { floor };
        }
        return Ok(result);
    }

    if !s.contains(floor) {
        return Err(AmalgamError::FloorNotInSpectrum { s: floor });
    }

    for &ai in &a_only {
        for &(ci, cj) in &instance.shared {
            for &bj in &b_only {
                let sum = instance.a.dist(ai, ci) + instance.b.dist(cj, bj);
                if floor > sum {
                    return Err(AmalgamError::HypothesisViolated {
                        detail: format!(
                            "{floor} > dist({}, {}) + dist({}, {}) = {sum}",
                            instance.a.label(ai),
                            instance.a.label(ci),
                            instance.b.label(cj),
                            instance.b.label(bj)
                        ),
                    });
                }
            }
        }
    }

    let base = amalgamate_search(instance, s, budget)?;
    let n = base.space.len();
    let mut matrix = vec![vec![Rational::ZERO; n]; n];
    for (i, row) in matrix.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = base.space.dist(i, j);
        }
    }
    let mut lifted = Vec::with_capacity(base.new_distances.len());
    for nd in &base.new_distances {
        let value = nd.value.max(floor);
        matrix[nd.a][nd.b] = value;
        matrix[nd.b][nd.a] = value;
        lifted.push(NewDistance {
            a: nd.a,
            b: nd.b,
            value,
            source: Provenance::BoundedLift { floor },
        });
    }
    let labels = base.space.labels().to_vec();
    if let Some(v) = validate_matrix(&labels, &matrix).into_iter().next() {
        return Err(AmalgamError::NotMetric(v));
    }
    let space = FiniteMetricSpace::new(labels, matrix).expect("validated above");
    Ok(AmalgamResult {
        space,
        new_distances: lifted,
        a_indices: base.a_indices,
        b_indices: base.b_indices,
    })
}

/// The canonical ⊕-amalgam: `dist(a, b) = min over shared x of
/// dist_A(a, x) ⊕ dist_B(x, b)`, with `μ(a, b)` the shared point whose real
/// sum `dist_A(a, x) + dist_B(x, b)` is smallest (ties to the earlier point
/// in result order). The output is validated; a non-metric result means the
/// spectrum prerequisites were violated.
pub fn amalgamate_oplus(
    instance: &AmalgamationInstance,
    s: &Spectrum,
) -> Result<AmalgamResult, AmalgamError> {
    if instance.shared.is_empty() {
        return Err(AmalgamError::EmptyCommonPart);
    }
    let (labels, a_map, b_map) = instance.layout();
    let n = labels.len();
    let mut matrix = vec![vec![Rational::ZERO; n]; n];
    let mut known = vec![vec![false; n]; n];
    for (i, row) in known.iter_mut().enumerate() {
        row[i] = true;
    }
    for i1 in 0..instance.a.len() {
        for i2 in 0..instance.a.len() {
            let (u, v) = (a_map[i1], a_map[i2]);
            matrix[u][v] = instance.a.dist(i1, i2);
            known[u][v] = true;
        }
    }
    for j1 in 0..instance.b.len() {
        for j2 in 0..instance.b.len() {
            let (u, v) = (b_map[j1], b_map[j2]);
            matrix[u][v] = instance.b.dist(j1, j2);
            known[u][v] = true;
        }
    }

    let mut new_distances = Vec::new();
    let a_unshared =
        (0..instance.a.len()).filter(|&i| !instance.shared.iter().any(|&(x, _)| x == i));
    let b_unshared: Vec<usize> = (0..instance.b.len())
        .filter(|&j| !instance.shared.iter().any(|&(_, y)| y == j))
        .collect();
    for i in a_unshared {
        for &j in &b_unshared {
            let mut best: Option<(Rational, usize)> = None; // (real sum, mu)
            for &(ci, cj) in &instance.shared {
                let sum = instance.a.dist(i, ci) + instance.b.dist(cj, j);
                let mu = a_map[ci];
                match best {
                    Some((bs, bm)) if (sum, mu) >= (bs, bm) => {}
                    _ => best = Some((sum, mu)),
                }
            }
            let (sum, mu) = best.expect("common part nonempty");
            let value = s.floor_element(sum).expect("0 is in every core");
            let (u, v) = (a_map[i], b_map[j]);
            matrix[u][v] = value;
            matrix[v][u] = value;
            known[u][v] = true;
            known[v][u] = true;
            new_distances.push(NewDistance {
                a: u,
                b: v,
                value,
                source: Provenance::OplusCanonical { mu },
            });
        }
    }
    debug_assert!(known.iter().all(|row| row.iter().all(|&k| k)));

    if let Some(v) = validate_matrix(&labels, &matrix).into_iter().next() {
        return Err(AmalgamError::NotMetric(v));
    }
    let space = FiniteMetricSpace::new(labels, matrix).expect("validated above");
    Ok(AmalgamResult {
        space,
        new_distances,
        a_indices: a_map,
        b_indices: b_map,
    })
}

/// The full-control search used by the stabilizers: per-pair floors and
/// orientation constraints on top of the plain search.
pub fn search_with_constraints(
    instance: &AmalgamationInstance,
    s: &Spectrum,
    constraints: &CompletionConstraints,
    budget: u64,
) -> Result<AmalgamResult, AmalgamError> {
    let (labels, a_map, b_map) = instance.layout();
    let n = labels.len();
    let mut matrix = vec![vec![Rational::ZERO; n]; n];
    for i1 in 0..instance.a.len() {
        for i2 in 0..instance.a.len() {
            matrix[a_map[i1]][a_map[i2]] = instance.a.dist(i1, i2);
        }
    }
    for j1 in 0..instance.b.len() {
        for j2 in 0..instance.b.len() {
            matrix[b_map[j1]][b_map[j2]] = instance.b.dist(j1, j2);
        }
    }

    // Variables: one per (A-only, B-only) pair, addressed by result indices.
    let a_only: Vec<usize> = (0..instance.a.len())
        .filter(|&i| !instance.shared.iter().any(|&(x, _)| x == i))
        .map(|i| a_map[i])
        .collect();
    let b_only: Vec<usize> = (0..instance.b.len())
        .filter(|&j| !instance.shared.iter().any(|&(_, y)| y == j))
        .map(|j| b_map[j])
        .collect();
    let common: Vec<usize> = instance.shared.iter().map(|&(i, _)| a_map[i]).collect();

    let mut vars: Vec<(usize, usize)> = Vec::new();
    let mut var_of: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for &u in &a_only {
        for &v in &b_only {
            var_of.insert((u.min(v), u.max(v)), vars.len());
            vars.push((u, v));
        }
    }

    if vars.is_empty() {
        let space = FiniteMetricSpace::new(labels, matrix).expect("union of two agreeing metrics");
        return Ok(AmalgamResult {
            space,
            new_distances: Vec::new(),
            a_indices: a_map,
            b_indices: b_map,
        });
    }

    let key = |u: usize, v: usize| (u.min(v), u.max(v));
    let floor_for = |u: usize, v: usize| -> Rational {
        let mut f = s.min_positive();
        if let Some(&g) = constraints.floors.get(&key(u, v)) {
            f = f.max(g);
        }
        if let Some(g) = constraints.global_floor {
            f = f.max(g);
        }
        f
    };

    // Initial bounds from triangles through the common part.
    let mut lo = vec![Rational::ZERO; vars.len()];
    let mut hi = vec![Rational::ZERO; vars.len()];
    for (vid, &(u, v)) in vars.iter().enumerate() {
        let mut l = floor_for(u, v);
        let mut h = s.max();
        for &c in &common {
            let (du, dv) = (matrix[u][c], matrix[c][v]);
            l = l.max(du.abs_diff(dv));
            h = h.min(du + dv);
        }
        lo[vid] = l;
        hi[vid] = h;
    }

    // Orientation constraints indexed by variable.
    let mut after: Vec<Vec<(usize, bool)>> = vec![Vec::new(); vars.len()];
    for o in &constraints.orientations {
        let kx = key(o.p, o.x);
        let ky = key(o.p, o.y);
        let (vx, vy) = match (var_of.get(&kx), var_of.get(&ky)) {
            (Some(&vx), Some(&vy)) => (vx, vy),
            _ => return Err(AmalgamError::NotACrossPair(o.p, o.x)),
        };
        // Assigning vx pushes vy's lower bound up; assigning vy caps vx.
        after[vx].push((vy, true));
        after[vy].push((vx, false));
    }

    // Static order: narrow intervals first (fewest candidates), then index.
    let mut order: Vec<usize> = (0..vars.len()).collect();
    order.sort_by_key(|&vid| (hi[vid] - lo[vid], vars[vid]));

    struct Search<'a> {
        s: &'a Spectrum,
        vars: &'a [(usize, usize)],
        var_of: &'a BTreeMap<(usize, usize), usize>,
        order: &'a [usize],
        matrix: Vec<Vec<Rational>>,
        assigned: Vec<Option<Rational>>,
        lo: Vec<Rational>,
        hi: Vec<Rational>,
        after: &'a [Vec<(usize, bool)>],
        a_only: &'a [usize],
        b_only: &'a [usize],
        explored: u64,
        budget: u64,
    }

    enum Outcome {
        Found,
        Exhausted,
        OutOfBudget,
    }

    impl Search<'_> {
        fn tighten(
            &mut self,
            vid: usize,
            new_lo: Option<Rational>,
            new_hi: Option<Rational>,
            trail: &mut Vec<(usize, Rational, Rational)>,
        ) -> bool {
            let (l0, h0) = (self.lo[vid], self.hi[vid]);
            let l = new_lo.map_or(l0, |x| l0.max(x));
            let h = new_hi.map_or(h0, |x| h0.min(x));
            if l != l0 || h != h0 {
                trail.push((vid, l0, h0));
                self.lo[vid] = l;
                self.hi[vid] = h;
            }
            // Empty spectrum slice means a dead branch.
            match self.s.ceil_element(l) {
                Some(e) => e <= h,
                None => false,
            }
        }

        fn assign(&mut self, depth: usize) -> Outcome {
            if depth == self.order.len() {
                return Outcome::Found;
            }
            let vid = self.order[depth];
            let (u, v) = self.vars[vid];
            // Candidate values largest first.
            let mut candidates: Vec<Rational> = self
                .s
                .elements()
                .iter()
                .copied()
                .filter(|&e| e >= self.lo[vid] && e <= self.hi[vid])
                .collect();
            candidates.reverse();
            for d in candidates {
                if self.explored >= self.budget {
                    return Outcome::OutOfBudget;
                }
                self.explored += 1;
                self.assigned[vid] = Some(d);
                self.matrix[u][v] = d;
                self.matrix[v][u] = d;
                let mut trail: Vec<(usize, Rational, Rational)> = Vec::new();
                let mut consistent = true;

                // Forward-check triangles sharing an endpoint with (u, v):
                // (u, v, v') over side dist(v, v') and (u', u, v) over side
                // dist(u, u'). The slice references are Copy, which frees
                // `self` for the tightening calls.
                let (a_only, b_only, after) = (self.a_only, self.b_only, self.after);
                'fc: {
                    for &v2 in b_only {
                        if v2 == v {
                            continue;
                        }
                        let w = self.var_key(u, v2);
                        if self.assigned[w].is_some() {
                            continue;
                        }
                        let side = self.matrix[v][v2];
                        if !self.tighten(w, Some(d.abs_diff(side)), Some(d + side), &mut trail) {
                            consistent = false;
                            break 'fc;
                        }
                    }
                    for &u2 in a_only {
                        if u2 == u {
                            continue;
                        }
                        let w = self.var_key(u2, v);
                        if self.assigned[w].is_some() {
                            continue;
                        }
                        let side = self.matrix[u][u2];
                        if !self.tighten(w, Some(d.abs_diff(side)), Some(d + side), &mut trail) {
                            consistent = false;
                            break 'fc;
                        }
                    }
                    for &(w, is_lower) in &after[vid] {
                        if self.assigned[w].is_some() {
                            continue;
                        }
                        let (nl, nh) = if is_lower {
                            (Some(d), None)
                        } else {
                            (None, Some(d))
                        };
                        if !self.tighten(w, nl, nh, &mut trail) {
                            consistent = false;
                            break 'fc;
                        }
                    }
                }

                // Re-check already-assigned orientation partners exactly.
                if consistent {
                    for &(w, is_lower) in &after[vid] {
                        if let Some(dw) = self.assigned[w] {
                            let ok = if is_lower { dw >= d } else { dw <= d };
                            if !ok {
                                consistent = false;
                                break;
                            }
                        }
                    }
                }

                if consistent {
                    match self.assign(depth + 1) {
                        Outcome::Found => return Outcome::Found,
                        Outcome::OutOfBudget => return Outcome::OutOfBudget,
                        Outcome::Exhausted => {}
                    }
                }
                for (w, l0, h0) in trail.into_iter().rev() {
                    self.lo[w] = l0;
                    self.hi[w] = h0;
                }
                self.assigned[vid] = None;
            }
            Outcome::Exhausted
        }

        fn var_key(&self, u: usize, v: usize) -> usize {
            self.var_of[&(u.min(v), u.max(v))]
        }
    }

    let mut search = Search {
        s,
        vars: &vars,
        var_of: &var_of,
        order: &order,
        matrix,
        assigned: vec![None; vars.len()],
        lo,
        hi,
        after: &after,
        a_only: &a_only,
        b_only: &b_only,
        explored: 0,
        budget,
    };

    match search.assign(0) {
        Outcome::Found => {
            let matrix = search.matrix;
            debug_assert!(validate_matrix(&labels, &matrix).is_empty());
            let mut new_distances = Vec::with_capacity(vars.len());
            for &(u, v) in &vars {
                new_distances.push(NewDistance {
                    a: u,
                    b: v,
                    value: matrix[u][v],
                    source: Provenance::SearchChoice,
                });
            }
            let space = FiniteMetricSpace::new(labels, matrix)
                .expect("forward checking covers every triangle");
            Ok(AmalgamResult {
                space,
                new_distances,
                a_indices: a_map,
                b_indices: b_map,
            })
        }
        Outcome::Exhausted => Err(AmalgamError::Unamalgamable {
            explored: search.explored,
        }),
        Outcome::OutOfBudget => Err(AmalgamError::BudgetExceeded {
            explored: search.explored,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::Rational;

    fn qi(v: i64) -> Rational {
        Rational::from_int(v)
    }

    fn pair_space(l0: &str, l1: &str, d: i64) -> FiniteMetricSpace {
        FiniteMetricSpace::from_pairs(vec![l0.to_owned(), l1.to_owned()], &[(0, 1, qi(d))]).unwrap()
    }

    fn core() -> Spectrum {
        Spectrum::from_ints([0, 1, 2, 3, 5]).unwrap()
    }

    const BUDGET: u64 = 1_000_000;

    #[test]
    fn instance_validation() {
        let a = pair_space("x", "u", 1);
        let b = pair_space("x", "v", 2);
        assert!(AmalgamationInstance::new(a.clone(), b.clone(), &[(0, 0)]).is_ok());
        assert!(matches!(
            AmalgamationInstance::new(a.clone(), b.clone(), &[(0, 0), (1, 0)]),
            Err(InstanceError::NotInjective(_, _))
        ));
        assert!(matches!(
            AmalgamationInstance::new(a.clone(), b.clone(), &[(5, 0)]),
            Err(InstanceError::IndexOutOfRange(5, 0))
        ));
        // Shared edge at different distances.
        let a2 = pair_space("x", "y", 1);
        let b2 = pair_space("x", "y", 2);
        assert!(matches!(
            AmalgamationInstance::new(a2, b2, &[(0, 0), (1, 1)]),
            Err(InstanceError::CommonPartDisagrees { .. })
        ));
    }

    #[test]
    fn search_prefers_largest_value() {
        let a = pair_space("a", "x", 3);
        let b = pair_space("x", "b", 3);
        let inst = AmalgamationInstance::new(a, b, &[(1, 0)]).unwrap();
        let r = amalgamate_search(&inst, &core(), BUDGET).unwrap();
        assert_eq!(r.space.len(), 3);
        // Admissible range is [1, 6]; largest spectrum element wins.
        assert_eq!(r.new_distances[0].value, qi(5));
        assert_eq!(r.new_distances[0].source, Provenance::SearchChoice);
    }

    #[test]
    fn search_returns_sub_case_unchanged() {
        let b = FiniteMetricSpace::from_pairs(
            vec!["x".into(), "y".into(), "z".into()],
            &[(0, 1, qi(1)), (0, 2, qi(2)), (1, 2, qi(2))],
        )
        .unwrap();
        let a = b.subspace(&[0, 1]).unwrap();
        let inst = AmalgamationInstance::new(a, b.clone(), &[(0, 0), (1, 1)]).unwrap();
        let r = amalgamate_search(&inst, &core(), BUDGET).unwrap();
        assert_eq!(r.space, b);
        assert!(r.new_distances.is_empty());
    }

    #[test]
    fn four_values_witness_is_unamalgamable() {
        // Over {0,1,2,3,5}: triangles (2; 1, 1) and (2; 3, 5) admit no
        // common completion; the cross distance is pinned to the empty
        // slice [4, 4].
        let a = FiniteMetricSpace::from_pairs(
            vec!["x".into(), "y".into(), "u".into()],
            &[(0, 1, qi(2)), (0, 2, qi(1)), (1, 2, qi(1))],
        )
        .unwrap();
        let b = FiniteMetricSpace::from_pairs(
            vec!["x".into(), "y".into(), "v".into()],
            &[(0, 1, qi(2)), (0, 2, qi(3)), (1, 2, qi(5))],
        )
        .unwrap();
        let inst = AmalgamationInstance::new(a, b, &[(0, 0), (1, 1)]).unwrap();
        assert!(matches!(
            amalgamate_search(&inst, &core(), BUDGET),
            Err(AmalgamError::Unamalgamable { .. })
        ));
    }

    #[test]
    fn bounded_lifts_to_floor() {
        let a = pair_space("a", "x", 3);
        let b = pair_space("x", "b", 3);
        let inst = AmalgamationInstance::new(a, b, &[(1, 0)]).unwrap();
        let r = amalgamate_bounded(&inst, &core(), qi(5), BUDGET).unwrap();
        assert_eq!(r.new_distances[0].value, qi(5));
        assert_eq!(
            r.new_distances[0].source,
            Provenance::BoundedLift { floor: qi(5) }
        );
        // Floor 0 behaves exactly like the plain search.
        let r0 = amalgamate_bounded(&inst, &core(), qi(0), BUDGET).unwrap();
        let rs = amalgamate_search(&inst, &core(), BUDGET).unwrap();
        assert_eq!(r0.space, rs.space);
    }

    #[test]
    fn bounded_hypothesis_gate() {
        // dist(a,x) + dist(x,b) = 2 < 3: the lemma hypothesis fails.
        let a = pair_space("a", "x", 1);
        let b = pair_space("x", "b", 1);
        let inst = AmalgamationInstance::new(a, b, &[(1, 0)]).unwrap();
        assert!(matches!(
            amalgamate_bounded(&inst, &core(), qi(3), BUDGET),
            Err(AmalgamError::HypothesisViolated { .. })
        ));
    }

    #[test]
    fn bounded_empty_common_part() {
        let a = FiniteMetricSpace::single_point("a");
        let b = FiniteMetricSpace::single_point("b");
        let inst = AmalgamationInstance::new(a, b, &[]).unwrap();
        let r = amalgamate_bounded(&inst, &core(), qi(5), BUDGET).unwrap();
        assert_eq!(r.space.dist(0, 1), qi(5));
        // A floor above the whole spectrum is a hypothesis failure.
        let thin = Spectrum::from_ints([0, 1]).unwrap();
        assert!(matches!(
            amalgamate_bounded(&inst, &thin, qi(2), BUDGET),
            Err(AmalgamError::HypothesisViolated { .. })
        ));
    }

    #[test]
    fn oplus_formula_and_mu() {
        let a = pair_space("a", "x", 2);
        let b = pair_space("x", "b", 2);
        let inst = AmalgamationInstance::new(a, b, &[(1, 0)]).unwrap();
        let r = amalgamate_oplus(&inst, &core()).unwrap();
        assert_eq!(r.new_distances[0].value, qi(3)); // 2 ⊕ 2
        assert_eq!(
            r.new_distances[0].source,
            Provenance::OplusCanonical { mu: 1 }
        );
    }

    #[test]
    fn oplus_picks_smallest_real_sum() {
        // Two shared points: sums 1+1=2 via x1 and 3+1=4 via x2.
        let a = FiniteMetricSpace::from_pairs(
            vec!["a".into(), "x1".into(), "x2".into()],
            &[(0, 1, qi(1)), (0, 2, qi(3)), (1, 2, qi(2))],
        )
        .unwrap();
        let b = FiniteMetricSpace::from_pairs(
            vec!["x1".into(), "x2".into(), "b".into()],
            &[(0, 1, qi(2)), (0, 2, qi(1)), (1, 2, qi(1))],
        )
        .unwrap();
        let inst = AmalgamationInstance::new(a, b, &[(1, 0), (2, 1)]).unwrap();
        let r = amalgamate_oplus(&inst, &core()).unwrap();
        assert_eq!(r.new_distances[0].value, qi(2)); // 1 ⊕ 1
        assert_eq!(
            r.new_distances[0].source,
            Provenance::OplusCanonical { mu: 1 }
        );
        // Search result never exceeds the ⊕-amalgam.
        let rs = amalgamate_search(&inst, &core(), BUDGET).unwrap();
        assert!(rs.new_distances[0].value <= r.new_distances[0].value);
    }

    #[test]
    fn oplus_requires_common_part() {
        let a = FiniteMetricSpace::single_point("a");
        let b = FiniteMetricSpace::single_point("b");
        let inst = AmalgamationInstance::new(a, b, &[]).unwrap();
        assert!(matches!(
            amalgamate_oplus(&inst, &core()),
            Err(AmalgamError::EmptyCommonPart)
        ));
    }

    #[test]
    fn constrained_search_honors_floors_and_orientation() {
        // Ambient pair (x, y) at distance 2; gadget point v joins with
        // dist(v, x) <= dist(v, y) and a per-pair floor.
        let a = pair_space("x", "y", 2);
        let b = FiniteMetricSpace::single_point("v");
        let inst = AmalgamationInstance::new(a, b, &[]).unwrap();
        let mut constraints = CompletionConstraints::default();
        constraints
            .orientations
            .push(Orientation { p: 2, x: 0, y: 1 });
        constraints.floors.insert((0, 2), qi(2));
        let r = search_with_constraints(&inst, &core(), &constraints, BUDGET).unwrap();
        let dvx = r.space.dist(2, 0);
        let dvy = r.space.dist(2, 1);
        assert!(dvx <= dvy, "orientation violated: {dvx} > {dvy}");
        assert!(dvx >= qi(2), "floor violated: {dvx}");
    }

    #[test]
    fn label_collisions_get_renamed() {
        let a = pair_space("p", "q", 1);
        let b = pair_space("p", "q", 2);
        let inst = AmalgamationInstance::new(a, b, &[]).unwrap();
        let r = amalgamate_search(&inst, &core(), BUDGET).unwrap();
        let mut labels = r.space.labels().to_vec();
        labels.sort();
        labels.dedup();
        assert_eq!(labels.len(), 4);
    }
}
