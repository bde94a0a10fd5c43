//! Finite saturated approximations of the homogeneous space over a
//! spectrum: one-point extension enumeration, realization through
//! amalgamation, saturation driving, and homogeneity audits.
//!
//! A saturation run never fails outright: hitting the point cap is a
//! valid outcome, reported as the list of extension vectors that remain
//! unrealized. Realization goes through the canonical plus-floor amalgam
//! whenever the new point has anchors; only anchor-free points fall back
//! to search, which then picks the largest admissible distances.

use serde::{Deserialize, Serialize};

use crate::amalgam::{
    amalgamate_oplus, amalgamate_search, AmalgamError, AmalgamationInstance, InstanceError,
};
use crate::rational::Rational;
use crate::space::{FiniteMetricSpace, IsometryBudgetExceeded, SpaceError};
use crate::spectrum::{ProfiledSpectrum, Spectrum};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BuilderError {
    #[error("extension base is invalid: {0}")]
    BadBase(String),
    #[error("extension value {0} is not a positive spectrum element within the bound")]
    BadValue(Rational),
    #[error("vector violates the one-point extension condition: {0}")]
    VectorInvalid(String),
    #[error("extension vector enumeration exceeded the cap of {cap}")]
    VectorBudget { cap: usize },
    #[error("bound {bound} exceeds the declared truncation bound {truncation}")]
    BoundBeyondTruncation {
        bound: Rational,
        truncation: Rational,
    },
    #[error("spectrum core fails the amalgamation criterion: {0}")]
    CoreNotAmalgamable(String),
    #[error("labels cover {got} points, space has {expected}")]
    LabelsMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Amalgam(#[from] AmalgamError),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Isometry(#[from] IsometryBudgetExceeded),
    #[error("jump partition failed: {0}")]
    JumpPartition(String),
}

/// A one-point metric extension: prescribed distances to a base subset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KatetovVector {
    /// Point indices the new point is anchored to, strictly increasing.
    pub base: Vec<usize>,
    /// Prescribed distance to each base point, parallel to `base`.
    pub values: Vec<Rational>,
}

impl KatetovVector {
    /// The one-point extension condition over the space:
    /// |f(x) - f(y)| <= dist(x, y) <= f(x) + f(y) for base points x, y.
    pub fn validate(&self, space: &FiniteMetricSpace) -> Result<(), BuilderError> {
        if self.base.len() != self.values.len() {
            return Err(BuilderError::BadBase(format!(
                "{} base points, {} values",
                self.base.len(),
                self.values.len()
            )));
        }
        if self.base.windows(2).any(|w| w[0] >= w[1]) {
            return Err(BuilderError::BadBase(
                "base indices must be strictly increasing".to_string(),
            ));
        }
        if let Some(&i) = self.base.iter().find(|&&i| i >= space.len()) {
            return Err(BuilderError::BadBase(format!("index {i} out of range")));
        }
        if let Some(&v) = self.values.iter().find(|v| !v.is_positive()) {
            return Err(BuilderError::BadValue(v));
        }
        for i in 0..self.base.len() {
            for j in (i + 1)..self.base.len() {
                let d = space.dist(self.base[i], self.base[j]);
                let (fi, fj) = (self.values[i], self.values[j]);
                if fi.abs_diff(fj) > d || d > fi + fj {
                    return Err(BuilderError::VectorInvalid(format!(
                        "f({}) = {fi}, f({}) = {fj} against distance {d}",
                        space.label(self.base[i]),
                        space.label(self.base[j])
                    )));
                }
            }
        }
        Ok(())
    }
}

/// All extension vectors over `base` with values in the core, capped by
/// `bound`. Exhaustive, in lexicographic value order.
pub fn katetov_vectors(
    space: &FiniteMetricSpace,
    base: &[usize],
    core: &Spectrum,
    bound: Rational,
    max_vectors: usize,
) -> Result<Vec<KatetovVector>, BuilderError> {
    let probe = KatetovVector {
        base: base.to_vec(),
        values: vec![core.max(); base.len()],
    };
    if let Err(e @ BuilderError::BadBase(_)) = probe.validate(space) {
        return Err(e);
    }
    let candidates: Vec<Rational> = core
        .positives()
        .iter()
        .copied()
        .filter(|&v| v <= bound)
        .collect();
    let mut out = Vec::new();
    let mut values: Vec<Rational> = Vec::with_capacity(base.len());

    fn extend(
        space: &FiniteMetricSpace,
        base: &[usize],
        candidates: &[Rational],
        values: &mut Vec<Rational>,
        out: &mut Vec<KatetovVector>,
        max_vectors: usize,
    ) -> Result<(), BuilderError> {
        let i = values.len();
        if i == base.len() {
            if out.len() >= max_vectors {
                return Err(BuilderError::VectorBudget { cap: max_vectors });
            }
            out.push(KatetovVector {
                base: base.to_vec(),
                values: values.clone(),
            });
            return Ok(());
        }
        'candidate: for &v in candidates {
            for j in 0..i {
                let d = space.dist(base[j], base[i]);
                if values[j].abs_diff(v) > d || d > values[j] + v {
                    continue 'candidate;
                }
            }
            values.push(v);
            extend(space, base, candidates, values, out, max_vectors)?;
            values.pop();
        }
        Ok(())
    }

    extend(space, base, &candidates, &mut values, &mut out, max_vectors)?;
    Ok(out)
}

fn fresh_label(space: &FiniteMetricSpace) -> String {
    let mut k = space.len();
    loop {
        let candidate = format!("p{k}");
        if space.index_of(&candidate).is_none() {
            return candidate;
        }
        k += 1;
    }
}

/// Adds one point realizing the vector: base distances exactly as
/// prescribed, the rest through the canonical amalgam. An anchor-free
/// vector turns into a search amalgam, which assigns the largest
/// admissible distances.
pub fn realize_extension(
    space: &FiniteMetricSpace,
    v: &KatetovVector,
    core: &Spectrum,
) -> Result<FiniteMetricSpace, BuilderError> {
    v.validate(space)?;
    let label = fresh_label(space);
    if v.base.is_empty() {
        let b = FiniteMetricSpace::single_point(label);
        let instance = AmalgamationInstance::new(space.clone(), b, &[])?;
        let result = amalgamate_search(&instance, core, u64::MAX)?;
        return Ok(result.space);
    }
    let mut b = space.subspace(&v.base)?;
    b = b.with_point(label, &v.values)?;
    let shared: Vec<(usize, usize)> = v.base.iter().copied().zip(0..v.base.len()).collect();
    let instance = AmalgamationInstance::new(space.clone(), b, &shared)?;
    let result = match amalgamate_oplus(&instance, core) {
        Ok(r) => r,
        // A core without the amalgamation property can reject the
        // canonical completion; search may still find one.
        Err(AmalgamError::NotMetric(_)) => amalgamate_search(&instance, core, u64::MAX)?,
        Err(e) => return Err(e.into()),
    };
    debug_assert!({
        let z = result.space.len() - 1;
        v.base
            .iter()
            .zip(&v.values)
            .all(|(&x, &val)| result.space.dist(z, x) == val)
    });
    Ok(result.space)
}

/// One realized extension in an approximation's history.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtensionStep {
    pub base: Vec<String>,
    pub values: Vec<Rational>,
    pub new_label: String,
}

/// A vector the saturation run could not realize within its caps.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnrealizedVector {
    pub base: Vec<String>,
    pub values: Vec<Rational>,
}

/// What a saturation run achieved.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SaturationRecord {
    pub k: usize,
    pub bound: Rational,
    pub max_points: usize,
    /// Driver iterations: repair rounds plus free-point growth steps.
    pub passes: usize,
    /// Every vector over every nonempty <= k-subset within the bound is
    /// realized. The free vector is exempt: a finite space never exhausts it.
    pub closed: bool,
    pub unrealized: Vec<UnrealizedVector>,
}

/// A finite approximation with its construction history.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Approximation {
    pub space: FiniteMetricSpace,
    pub saturation: SaturationRecord,
    pub log: Vec<ExtensionStep>,
}

impl Approximation {
    /// Wraps an externally constructed space with an empty history.
    pub fn from_space(space: FiniteMetricSpace, core: &Spectrum) -> Approximation {
        Approximation {
            space,
            saturation: SaturationRecord {
                k: 0,
                bound: core.max(),
                max_points: 0,
                passes: 0,
                closed: false,
                unrealized: Vec::new(),
            },
            log: Vec::new(),
        }
    }
}

/// Is some existing point (outside the base) at exactly the prescribed
/// distances? The free vector is never realized by an existing point: its
/// meaning is a fresh point, which only growth provides.
fn is_realized(space: &FiniteMetricSpace, v: &KatetovVector) -> bool {
    !v.base.is_empty()
        && (0..space.len()).any(|z| {
            !v.base.contains(&z)
                && v.base
                    .iter()
                    .zip(&v.values)
                    .all(|(&x, &val)| space.dist(z, x) == val)
        })
}

fn subsets_of_size(n: usize, size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(size);
    fn rec(
        n: usize,
        size: usize,
        start: usize,
        current: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if current.len() == size {
            out.push(current.clone());
            return;
        }
        for i in start..n {
            if n - i < size - current.len() {
                break;
            }
            current.push(i);
            rec(n, size, i + 1, current, out);
            current.pop();
        }
    }
    rec(n, size, 0, &mut current, &mut out);
    out
}

const VECTOR_CAP: usize = 1_000_000;

/// Grows a single seed point until every extension vector over every
/// nonempty <= k-subset (values up to `bound`) is realized and the point
/// budget is spent. Each pass repairs unrealized anchored vectors; once the
/// current points are closed, one free point enters (the empty vector is
/// never satisfied by an existing point) and repair resumes. Breadth-first
/// over subset size, lexicographic over subsets and vectors, so runs are
/// reproducible. The record lists whatever remains unrealized; partial
/// saturation is an outcome, not an error.
pub fn saturate(
    profiled: &ProfiledSpectrum,
    k: usize,
    bound: Option<Rational>,
    max_points: usize,
) -> Result<Approximation, BuilderError> {
    let core = &profiled.core;
    if let crate::spectrum::FourValuesVerdict::Fails(w) = core.four_values() {
        return Err(BuilderError::CoreNotAmalgamable(format!(
            "no element in [{}, {}]",
            w.lower, w.upper
        )));
    }
    let bound = match bound {
        Some(b) if b > profiled.truncation_bound => {
            return Err(BuilderError::BoundBeyondTruncation {
                bound: b,
                truncation: profiled.truncation_bound,
            })
        }
        Some(b) => b,
        None => profiled.truncation_bound,
    };

    let mut space = FiniteMetricSpace::single_point("p0");
    let mut log = Vec::new();
    let mut passes = 0usize;
    loop {
        passes += 1;
        let n0 = space.len();
        let mut added = false;
        for size in 1..=k {
            for subset in subsets_of_size(n0, size) {
                for v in katetov_vectors(&space, &subset, core, bound, VECTOR_CAP)? {
                    if is_realized(&space, &v) || space.len() >= max_points {
                        continue;
                    }
                    let base_labels = v.base.iter().map(|&i| space.label(i).to_string()).collect();
                    space = realize_extension(&space, &v, core)?;
                    log.push(ExtensionStep {
                        base: base_labels,
                        values: v.values.clone(),
                        new_label: space.label(space.len() - 1).to_string(),
                    });
                    added = true;
                }
            }
        }
        if added {
            continue;
        }
        // Anchored vectors over the current points are closed (or the cap
        // blocks repairs). Spend remaining budget on a free point; stop once
        // the budget is gone.
        if space.len() >= max_points {
            break;
        }
        let free = KatetovVector {
            base: Vec::new(),
            values: Vec::new(),
        };
        space = realize_extension(&space, &free, core)?;
        log.push(ExtensionStep {
            base: Vec::new(),
            values: Vec::new(),
            new_label: space.label(space.len() - 1).to_string(),
        });
    }

    let mut unrealized = Vec::new();
    for size in 1..=k {
        for subset in subsets_of_size(space.len(), size) {
            for v in katetov_vectors(&space, &subset, core, bound, VECTOR_CAP)? {
                if !is_realized(&space, &v) {
                    unrealized.push(UnrealizedVector {
                        base: v.base.iter().map(|&i| space.label(i).to_string()).collect(),
                        values: v.values,
                    });
                }
            }
        }
    }

    Ok(Approximation {
        space,
        saturation: SaturationRecord {
            k,
            bound,
            max_points,
            passes,
            closed: unrealized.is_empty(),
            unrealized,
        },
        log,
    })
}

/// One isometry extension the space cannot match.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UncoveredExtension {
    pub domain: Vec<String>,
    pub image: Vec<String>,
    pub point: String,
}

/// How close the space comes to homogeneity at level k.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HomogeneityReport {
    pub k: usize,
    pub total: usize,
    pub covered: usize,
    pub ratio: f64,
    pub uncovered: Vec<UncoveredExtension>,
}

/// For every isometry between <= k-point subspaces and every in-space
/// extension of its domain, checks whether the image admits a matching
/// extension.
pub fn check_local_homogeneity(
    space: &FiniteMetricSpace,
    k: usize,
    isometry_cap: usize,
) -> Result<HomogeneityReport, BuilderError> {
    let isometries = space.partial_isometries(k, isometry_cap)?;
    let n = space.len();
    let mut total = 0usize;
    let mut covered = 0usize;
    let mut uncovered = Vec::new();
    for iso in &isometries {
        for z in 0..n {
            if iso.from.contains(&z) {
                continue;
            }
            total += 1;
            let matched = (0..n).any(|w| {
                !iso.to.contains(&w)
                    && iso
                        .from
                        .iter()
                        .zip(&iso.to)
                        .all(|(&x, &y)| space.dist(w, y) == space.dist(z, x))
            });
            if matched {
                covered += 1;
            } else {
                uncovered.push(UncoveredExtension {
                    domain: iso
                        .from
                        .iter()
                        .map(|&i| space.label(i).to_string())
                        .collect(),
                    image: iso.to.iter().map(|&i| space.label(i).to_string()).collect(),
                    point: space.label(z).to_string(),
                });
            }
        }
    }
    let ratio = if total == 0 {
        1.0
    } else {
        covered as f64 / total as f64
    };
    Ok(HomogeneityReport {
        k,
        total,
        covered,
        ratio,
        uncovered,
    })
}

/// A point inserted to populate an empty class/label cell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DensityInsertion {
    pub jump: Rational,
    pub class_anchor: String,
    pub label: usize,
    pub point: String,
}

/// Outcome of a density repair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DensityFix {
    pub added: Vec<DensityInsertion>,
    /// The core has no positive jump numbers, so density holds vacuously.
    pub vacuous: bool,
}

/// Extends the approximation until, for every trusted positive jump s of
/// the core, every equivalence class at s contains every label. Each
/// inserted point is anchored at distance s to a class member, which joins
/// it to that class and no other. Returns the grown approximation and the
/// extended label vector.
///
/// A jump is trusted only when its whole window (s, 2s] sits below the
/// truncation bound; the core maximum always looks like a jump in a finite
/// listing, and this filter is what keeps that artifact out.
pub fn ensure_dense_representation(
    mut approx: Approximation,
    labels: &[usize],
    profiled: &ProfiledSpectrum,
) -> Result<(Approximation, Vec<usize>, DensityFix), BuilderError> {
    let core = &profiled.core;
    if labels.len() != approx.space.len() {
        return Err(BuilderError::LabelsMismatch {
            expected: approx.space.len(),
            got: labels.len(),
        });
    }
    let mut labels = labels.to_vec();
    let mut wanted: Vec<usize> = labels.clone();
    wanted.sort_unstable();
    wanted.dedup();

    let jumps: Vec<Rational> = core
        .positives()
        .iter()
        .copied()
        .filter(|&s| core.is_jump(s) && s.doubled() <= profiled.truncation_bound)
        .collect();
    if jumps.is_empty() {
        return Ok((
            approx,
            labels,
            DensityFix {
                added: Vec::new(),
                vacuous: true,
            },
        ));
    }

    let mut added = Vec::new();
    for &s in &jumps {
        let partition = approx
            .space
            .jump_classes(s, core)
            .map_err(|e| BuilderError::JumpPartition(e.to_string()))?;
        for class in &partition.classes {
            let anchor = class[0];
            let anchor_label = approx.space.label(anchor).to_string();
            for &want in &wanted {
                if class.iter().any(|&i| labels[i] == want) {
                    continue;
                }
                let v = KatetovVector {
                    base: vec![anchor],
                    values: vec![s],
                };
                let base_labels = vec![anchor_label.clone()];
                approx.space = realize_extension(&approx.space, &v, core)?;
                let new_label = approx.space.label(approx.space.len() - 1).to_string();
                approx.log.push(ExtensionStep {
                    base: base_labels,
                    values: vec![s],
                    new_label: new_label.clone(),
                });
                labels.push(want);
                added.push(DensityInsertion {
                    jump: s,
                    class_anchor: anchor_label.clone(),
                    label: want,
                    point: new_label,
                });
            }
        }
    }
    Ok((
        approx,
        labels,
        DensityFix {
            added,
            vacuous: false,
        },
    ))
}
