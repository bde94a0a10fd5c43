//! Exact finite metric spaces.
//!
//! Points carry stable string labels; distances live in a symmetric table of
//! exact rationals. Spaces are immutable values: extension operations return
//! new spaces. Validation is verdict-style ([`validate_matrix`] lists every
//! violated axiom) so callers can either reject or report.

use std::collections::BTreeSet;

use serde::de::Error as _;
use serde::{Deserialize, Serialize};

use crate::graph::SimpleGraph;
use crate::rational::Rational;
use crate::spectrum::Spectrum;

/// A metric axiom violation, phrased against point labels.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricViolation {
    #[error("diagonal entry at {point} is {value}, not 0")]
    NonZeroDiagonal { point: String, value: Rational },
    #[error("table is asymmetric at ({x}, {y}): {forward} vs {backward}")]
    Asymmetric {
        x: String,
        y: String,
        forward: Rational,
        backward: Rational,
    },
    #[error("distinct points {x} and {y} are at distance {value} (must be positive)")]
    NonPositive {
        x: String,
        y: String,
        value: Rational,
    },
    #[error("triangle ({x}, {y}, {z}) violates the triangle inequality: {side} > {sum}")]
    Triangle {
        x: String,
        y: String,
        z: String,
        side: Rational,
        sum: Rational,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SpaceError {
    #[error("point labels must be unique; {0:?} repeats")]
    DuplicateLabel(String),
    #[error("distance table shape does not match {expected} points")]
    ShapeMismatch { expected: usize },
    #[error("space must contain at least one point")]
    Empty,
    #[error("missing distance for pair ({0}, {1})")]
    MissingPair(String, String),
    #[error("pair ({0}, {1}) listed more than once")]
    DuplicatePair(String, String),
    #[error("unknown point label {0:?}")]
    UnknownLabel(String),
    #[error("metric axioms violated: {0}")]
    NotMetric(MetricViolation),
    #[error("point index {0} out of range")]
    IndexOutOfRange(usize),
}

/// Checks the full table against the metric axioms and returns every
/// violation found (empty means the table is a metric).
pub fn validate_matrix(labels: &[String], dist: &[Vec<Rational>]) -> Vec<MetricViolation> {
    let n = labels.len();
    let mut out = Vec::new();
    for i in 0..n {
        if !dist[i][i].is_zero() {
            out.push(MetricViolation::NonZeroDiagonal {
                point: labels[i].clone(),
                value: dist[i][i],
            });
        }
        for j in (i + 1)..n {
            if dist[i][j] != dist[j][i] {
                out.push(MetricViolation::Asymmetric {
                    x: labels[i].clone(),
                    y: labels[j].clone(),
                    forward: dist[i][j],
                    backward: dist[j][i],
                });
            }
            if !dist[i][j].is_positive() {
                out.push(MetricViolation::NonPositive {
                    x: labels[i].clone(),
                    y: labels[j].clone(),
                    value: dist[i][j],
                });
            }
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            for k in 0..n {
                if k == i || k == j {
                    continue;
                }
                let sum = dist[i][k] + dist[k][j];
                if dist[i][j] > sum {
                    out.push(MetricViolation::Triangle {
                        x: labels[i].clone(),
                        y: labels[j].clone(),
                        z: labels[k].clone(),
                        side: dist[i][j],
                        sum,
                    });
                }
            }
        }
    }
    out
}

/// A finite metric space with exact rational distances.
#[derive(Clone, PartialEq, Eq)]
pub struct FiniteMetricSpace {
    labels: Vec<String>,
    dist: Vec<Rational>, // row-major n x n
}

impl FiniteMetricSpace {
    pub fn new(labels: Vec<String>, matrix: Vec<Vec<Rational>>) -> Result<Self, SpaceError> {
        let n = labels.len();
        if n == 0 {
            return Err(SpaceError::Empty);
        }
        let mut seen = BTreeSet::new();
        for l in &labels {
            if !seen.insert(l.clone()) {
                return Err(SpaceError::DuplicateLabel(l.clone()));
            }
        }
        if matrix.len() != n || matrix.iter().any(|row| row.len() != n) {
            return Err(SpaceError::ShapeMismatch { expected: n });
        }
        if let Some(v) = validate_matrix(&labels, &matrix).into_iter().next() {
            return Err(SpaceError::NotMetric(v));
        }
        let mut dist = Vec::with_capacity(n * n);
        for row in matrix {
            dist.extend(row);
        }
        Ok(FiniteMetricSpace { labels, dist })
    }

    /// Builds from one entry per unordered pair; every pair must appear
    /// exactly once.
    pub fn from_pairs(
        labels: Vec<String>,
        pairs: &[(usize, usize, Rational)],
    ) -> Result<Self, SpaceError> {
        let n = labels.len();
        let mut matrix = vec![vec![Rational::ZERO; n]; n];
        let mut filled = vec![vec![false; n]; n];
        for &(i, j, d) in pairs {
            for ix in [i, j] {
                if ix >= n {
                    return Err(SpaceError::IndexOutOfRange(ix));
                }
            }
            if i == j || filled[i][j] {
                return Err(SpaceError::DuplicatePair(
                    labels[i].clone(),
                    labels[j].clone(),
                ));
            }
            filled[i][j] = true;
            filled[j][i] = true;
            matrix[i][j] = d;
            matrix[j][i] = d;
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if !filled[i][j] {
                    return Err(SpaceError::MissingPair(
                        labels[i].clone(),
                        labels[j].clone(),
                    ));
                }
            }
        }
        FiniteMetricSpace::new(labels, matrix)
    }

    pub fn single_point(label: impl Into<String>) -> Self {
        FiniteMetricSpace {
            labels: vec![label.into()],
            dist: vec![Rational::ZERO],
        }
    }

    pub(crate) fn from_validated_parts(labels: Vec<String>, dist: Vec<Rational>) -> Self {
        debug_assert_eq!(labels.len() * labels.len(), dist.len());
        FiniteMetricSpace { labels, dist }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction requires at least one point
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> Rational {
        self.dist[i * self.labels.len() + j]
    }

    /// Extends by one point whose distances to the existing points are given
    /// in index order. Only the triangles through the new point need
    /// checking; existing ones are already valid.
    pub fn with_point(
        &self,
        label: impl Into<String>,
        dists: &[Rational],
    ) -> Result<Self, SpaceError> {
        let n = self.len();
        let label = label.into();
        if self.labels.contains(&label) {
            return Err(SpaceError::DuplicateLabel(label));
        }
        if dists.len() != n {
            return Err(SpaceError::ShapeMismatch { expected: n });
        }
        for (i, &d) in dists.iter().enumerate() {
            if !d.is_positive() {
                return Err(SpaceError::NotMetric(MetricViolation::NonPositive {
                    x: self.labels[i].clone(),
                    y: label.clone(),
                    value: d,
                }));
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let d = self.dist(i, j);
                let (a, b) = (dists[i], dists[j]);
                let (side, sum, ok) = if d > a + b {
                    (d, a + b, false)
                } else if a > d + b {
                    (a, d + b, false)
                } else if b > d + a {
                    (b, d + a, false)
                } else {
                    (d, d, true)
                };
                if !ok {
                    return Err(SpaceError::NotMetric(MetricViolation::Triangle {
                        x: self.labels[i].clone(),
                        y: self.labels[j].clone(),
                        z: label.clone(),
                        side,
                        sum,
                    }));
                }
            }
        }
        let m = n + 1;
        let mut dist = vec![Rational::ZERO; m * m];
        for i in 0..n {
            for j in 0..n {
                dist[i * m + j] = self.dist(i, j);
            }
        }
        for i in 0..n {
            dist[i * m + n] = dists[i];
            dist[n * m + i] = dists[i];
        }
        let mut labels = self.labels.clone();
        labels.push(label);
        Ok(FiniteMetricSpace { labels, dist })
    }

    /// The induced subspace on the given distinct indices, in the given
    /// order.
    pub fn subspace(&self, indices: &[usize]) -> Result<Self, SpaceError> {
        let mut seen = BTreeSet::new();
        for &i in indices {
            if i >= self.len() {
                return Err(SpaceError::IndexOutOfRange(i));
            }
            if !seen.insert(i) {
                return Err(SpaceError::DuplicateLabel(self.labels[i].clone()));
            }
        }
        if indices.is_empty() {
            return Err(SpaceError::Empty);
        }
        let m = indices.len();
        let mut dist = vec![Rational::ZERO; m * m];
        for (a, &i) in indices.iter().enumerate() {
            for (b, &j) in indices.iter().enumerate() {
                dist[a * m + b] = self.dist(i, j);
            }
        }
        Ok(FiniteMetricSpace {
            labels: indices.iter().map(|&i| self.labels[i].clone()).collect(),
            dist,
        })
    }

    /// The sorted set of realized distances, always including 0.
    pub fn spectrum_of(&self) -> Vec<Rational> {
        let mut out: BTreeSet<Rational> = BTreeSet::new();
        out.insert(Rational::ZERO);
        for i in 0..self.len() {
            for j in (i + 1)..self.len() {
                out.insert(self.dist(i, j));
            }
        }
        out.into_iter().collect()
    }

    /// Pairs whose distance lies outside the given spectrum core.
    pub fn off_spectrum_pairs(&self, s: &Spectrum) -> Vec<(usize, usize, Rational)> {
        let mut out = Vec::new();
        for i in 0..self.len() {
            for j in (i + 1)..self.len() {
                let d = self.dist(i, j);
                if !s.contains(d) {
                    out.push((i, j, d));
                }
            }
        }
        out
    }

    pub fn max_distance(&self) -> Rational {
        let mut m = Rational::ZERO;
        for i in 0..self.len() {
            for j in (i + 1)..self.len() {
                m = m.max(self.dist(i, j));
            }
        }
        m
    }

    /// The graph with an edge exactly between points at distance `s`.
    pub fn distance_graph(&self, s: Rational) -> DistanceGraph {
        let mut graph =
            SimpleGraph::with_labels(self.labels.clone()).expect("space labels are unique");
        for i in 0..self.len() {
            for j in (i + 1)..self.len() {
                if self.dist(i, j) == s {
                    graph.add_edge(i, j).expect("indices in range, i != j");
                }
            }
        }
        DistanceGraph { s, graph }
    }

    /// Partitions points by the relation `dist(x, y) <= s` and verifies it
    /// really is an equivalence on this space. `s` must belong to the
    /// ambient spectrum; transitivity holds exactly when `(s, 2s]` misses
    /// the realized distances.
    pub fn jump_classes(
        &self,
        s: Rational,
        ambient: &Spectrum,
    ) -> Result<JumpPartition, JumpClassError> {
        if !ambient.contains(s) {
            return Err(JumpClassError::NotInSpectrum(s));
        }
        let n = self.len();
        let mut class_of: Vec<Option<usize>> = vec![None; n];
        let mut classes: Vec<Vec<usize>> = Vec::new();
        for i in 0..n {
            if class_of[i].is_some() {
                continue;
            }
            // Flood the reflexive-symmetric relation; transitivity checked
            // after.
            let id = classes.len();
            let mut members = vec![i];
            class_of[i] = Some(id);
            let mut cursor = 0;
            while cursor < members.len() {
                let u = members[cursor];
                cursor += 1;
                for (v, slot) in class_of.iter_mut().enumerate() {
                    if slot.is_none() && self.dist(u, v) <= s {
                        *slot = Some(id);
                        members.push(v);
                    }
                }
            }
            classes.push(members);
        }
        for class in &mut classes {
            class.sort_unstable();
        }
        for class in &classes {
            for (a, &x) in class.iter().enumerate() {
                for &y in &class[a + 1..] {
                    if self.dist(x, y) > s {
                        return Err(JumpClassError::NotAJump {
                            s,
                            x: self.labels[x].clone(),
                            y: self.labels[y].clone(),
                            distance: self.dist(x, y),
                        });
                    }
                }
            }
        }
        Ok(JumpPartition { s, classes })
    }

    /// Does `subset` meet every `∼s` class for every positive jump number
    /// `s` of the ambient spectrum?
    pub fn density_of(
        &self,
        subset: &[usize],
        ambient: &Spectrum,
    ) -> Result<DensityReport, JumpClassError> {
        let jumps: Vec<Rational> = ambient
            .positives()
            .iter()
            .copied()
            .filter(|&s| ambient.is_jump(s))
            .collect();
        let member = {
            let set: BTreeSet<usize> = subset.iter().copied().collect();
            move |i: usize| set.contains(&i)
        };
        let mut first_miss = None;
        for &s in &jumps {
            let partition = self.jump_classes(s, ambient)?;
            for class in &partition.classes {
                if !class.iter().any(|&i| member(i)) {
                    first_miss = Some((s, class.clone()));
                    break;
                }
            }
            if first_miss.is_some() {
                break;
            }
        }
        Ok(DensityReport {
            is_dense: first_miss.is_none(),
            vacuous: jumps.is_empty(),
            checked_jumps: jumps,
            first_miss,
        })
    }

    /// Enumerates every isometry between ordered tuples of at most `k`
    /// distinct points, including all singleton maps. Output order is
    /// lexicographic in (length, domain tuple, image tuple).
    pub fn partial_isometries(
        &self,
        k: usize,
        cap: usize,
    ) -> Result<Vec<PartialIsometry>, IsometryBudgetExceeded> {
        let n = self.len();
        let mut out = Vec::new();
        // Depth-first over (domain tuple, image tuple) in lockstep.
        fn extend(
            space: &FiniteMetricSpace,
            k: usize,
            cap: usize,
            from: &mut Vec<usize>,
            to: &mut Vec<usize>,
            out: &mut Vec<PartialIsometry>,
        ) -> Result<(), IsometryBudgetExceeded> {
            if !from.is_empty() {
                if out.len() >= cap {
                    return Err(IsometryBudgetExceeded { cap });
                }
                out.push(PartialIsometry {
                    from: from.clone(),
                    to: to.clone(),
                });
            }
            if from.len() == k {
                return Ok(());
            }
            let n = space.len();
            for x in 0..n {
                if from.contains(&x) {
                    continue;
                }
                for y in 0..n {
                    if to.contains(&y) {
                        continue;
                    }
                    if from
                        .iter()
                        .zip(to.iter())
                        .all(|(&a, &b)| space.dist(a, x) == space.dist(b, y))
                    {
                        from.push(x);
                        to.push(y);
                        extend(space, k, cap, from, to, out)?;
                        from.pop();
                        to.pop();
                    }
                }
            }
            Ok(())
        }
        let mut from = Vec::new();
        let mut to = Vec::new();
        let k = k.min(n);
        // The recursion above emits tuples in DFS order (prefix before
        // extension); re-sort to the documented order.
        extend(self, k, cap, &mut from, &mut to, &mut out)?;
        out.sort();
        Ok(out)
    }
}

impl std::fmt::Debug for FiniteMetricSpace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "FiniteMetricSpace({} points)", self.len())?;
        for i in 0..self.len() {
            write!(f, "  {}:", self.labels[i])?;
            for j in 0..self.len() {
                write!(f, " {}", self.dist(i, j))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// An ordered-tuple isometry inside one space.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct PartialIsometry {
    pub from: Vec<usize>,
    pub to: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("partial isometry enumeration exceeded the cap of {cap}")]
pub struct IsometryBudgetExceeded {
    pub cap: usize,
}

/// The `s`-distance graph of a space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceGraph {
    pub s: Rational,
    pub graph: SimpleGraph,
}

/// Partition of points under `dist(x, y) <= s` for a jump number `s`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct JumpPartition {
    pub s: Rational,
    /// Classes as sorted index lists, ordered by smallest member.
    pub classes: Vec<Vec<usize>>,
}

impl JumpPartition {
    pub fn class_of(&self, i: usize) -> usize {
        self.classes
            .iter()
            .position(|c| c.binary_search(&i).is_ok())
            .expect("classes cover all points")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum JumpClassError {
    #[error("{0} is not an element of the ambient spectrum")]
    NotInSpectrum(Rational),
    #[error(
        "{s} is not a jump number here: {x} and {y} share a class but are at distance {distance}"
    )]
    NotAJump {
        s: Rational,
        x: String,
        y: String,
        distance: Rational,
    },
}

/// Outcome of a density check, including the vacuity flag for spectra whose
/// core exhibits no positive jump numbers in range.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DensityReport {
    pub is_dense: bool,
    pub vacuous: bool,
    pub checked_jumps: Vec<Rational>,
    pub first_miss: Option<(Rational, Vec<usize>)>,
}

impl Serialize for FiniteMetricSpace {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Raw<'a> {
            points: &'a [String],
            dist: Vec<(&'a str, &'a str, Rational)>,
        }
        let mut dist = Vec::new();
        for i in 0..self.len() {
            for j in (i + 1)..self.len() {
                dist.push((
                    self.labels[i].as_str(),
                    self.labels[j].as_str(),
                    self.dist(i, j),
                ));
            }
        }
        Raw {
            points: &self.labels,
            dist,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for FiniteMetricSpace {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            points: Vec<String>,
            dist: Vec<(String, String, Rational)>,
        }
        let raw = Raw::deserialize(deserializer)?;
        let index = |l: &String| -> Result<usize, D::Error> {
            raw.points
                .iter()
                .position(|p| p == l)
                .ok_or_else(|| D::Error::custom(SpaceError::UnknownLabel(l.clone())))
        };
        let mut pairs = Vec::with_capacity(raw.dist.len());
        for (p, q, d) in &raw.dist {
            pairs.push((index(p)?, index(q)?, *d));
        }
        FiniteMetricSpace::from_pairs(raw.points, &pairs).map_err(D::Error::custom)
    }
}
