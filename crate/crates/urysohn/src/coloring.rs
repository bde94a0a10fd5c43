//! Two-coloring construction and its adversaries.
//!
//! The engine answers the crate's headline question constructively. On the
//! two-color side it grows a finite approximation, then welds a rigid
//! scaffold `M` onto it: for every pair of ambient points it either finds a
//! scaffold point already telling them apart or attaches a fresh gadget
//! whose marked vertex does. Coloring `M` with 1 and the rest with 0 leaves
//! no nontrivial color-preserving isometry, and the certificate carries the
//! automorphism search transcript that proves it at this finite scale. On
//! the infinite side the defeaters take any proposed coloring and hand back
//! a color-preserving isometry that is not the identity.
//!
//! Strategy selection mirrors the verdict classifier: spectra with a
//! qualifying non-jump element get tree scaffolds, spectra whose only
//! structure sits at a positive limit get crab scaffolds, and no-limit
//! spectra with a close pair get trees driven by that pair. Everything the
//! engine claims is re-verified concretely: scaffold structure after every
//! attachment, defeater maps point by point.

use serde::{Deserialize, Serialize};

use crate::amalgam::{
    amalgamate_oplus, search_with_constraints, AmalgamError, AmalgamationInstance,
    CompletionConstraints, InstanceError, Orientation,
};
use crate::builder::{
    realize_extension, saturate, Approximation, BuilderError, ExtensionStep, KatetovVector,
};
use crate::gadgets::{
    build_crab, build_rigid_tree, build_spider, gadget_metric, tree_canonical, verify_crab_nest,
    Crab, CrabNest, GadgetError,
};
use crate::graph::SimpleGraph;
use crate::rational::Rational;
use crate::space::{FiniteMetricSpace, JumpClassError, SpaceError};
use crate::spectrum::{
    distinguishing_verdict, ClassifyError, ProfiledSpectrum, Spectrum, SpectrumProfile, Verdict,
    VerdictCase,
};
use crate::symmetry::{
    graph_is_rigid, space_color_preserving, AutomorphismReport, SearchBudget, SymmetryError,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EngineError {
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error("no qualifying parameters in the truncated core: {0}")]
    NoQualifyingParameters(String),
    #[error("wrong strategy for this operation: {0}")]
    WrongStrategy(String),
    #[error("scaffold invariant broken: {0}")]
    InvariantBroken(String),
    #[error("point budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("no ~{p} class repeats a color ({colors} colors, largest class {largest})")]
    ClassTooSmall {
        p: Rational,
        colors: usize,
        largest: usize,
    },
    #[error("partition class misses a jump class: {0}")]
    DensityUnmet(String),
    #[error("truncation too shallow: {0}")]
    TruncationTooShallow(String),
    #[error("no jump class supports a defeater: {0}")]
    NoSuitableClass(String),
    #[error("coloring has {got} entries for {expected} points")]
    ColoringMismatch { expected: usize, got: usize },
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error(transparent)]
    Amalgam(#[from] AmalgamError),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Builder(#[from] BuilderError),
    #[error(transparent)]
    Gadget(#[from] GadgetError),
    #[error(transparent)]
    Symmetry(#[from] SymmetryError),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    JumpClass(#[from] JumpClassError),
}

/// Which defeater an `InfiniteDefeat` plan calls for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DefeatKind {
    /// Swap two same-colored points of one ~p class; p insular makes the
    /// swap invisible to every other point.
    MinClassTransposition { p: Rational },
    /// Involution of a jump class on which the coloring is dense.
    DenseClassInvolution,
}

/// How the engine will attack a spectrum, with every distance parameter
/// pinned to a core element.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "snake_case")]
pub enum Strategy {
    /// Rigid trees over the two-distance metric {s, r}. Requires s < r <= 2s
    /// with close pairs above s left in the core for `select_ht_kt`.
    Forest { s: Rational, r: Rational },
    /// Rigid crabs over {r, s} with the separator ladder
    /// r < s < s1 < s2 < r + r. r stands in for the limit; everything the
    /// scaffold touches stays at distance r or more from itself.
    CrabNest {
        r: Rational,
        s: Rational,
        s1: Rational,
        s2: Rational,
    },
    /// Trees driven by the close pair itself: h/k come straight from (s, r),
    /// so s may be a jump number. Requires r - s at most the minimum
    /// positive element.
    BoundBelow {
        s: Rational,
        r: Rational,
        /// Smallest positive initial non-jump element, when the core shows
        /// one. Recorded so a disagreement with s is visible, not silent.
        initial_nonjump: Option<Rational>,
    },
    /// Two colors never suffice; run the matching defeater instead.
    InfiniteDefeat { kind: DefeatKind },
}

impl Strategy {
    pub fn case_name(&self) -> &'static str {
        match self {
            Strategy::Forest { .. } => "forest",
            Strategy::CrabNest { .. } => "crab-nest",
            Strategy::BoundBelow { .. } => "bound-below",
            Strategy::InfiniteDefeat { .. } => "infinite-defeat",
        }
    }
}

/// Picks the stabilizer or defeater for a classified spectrum.
///
/// Omega verdicts map to the defeater matching their case. Two verdicts
/// dispatch on the profile: a non-jump element strictly below a positive
/// limit seeds a forest; a positive limit with only insular elements below
/// it seeds a crab nest, with r, s, s1, s2 the four largest core elements
/// between the limit and its double; a zero limit with vanishing gaps seeds
/// a forest from the smallest non-jump; no limit uses the classifier's
/// close pair directly.
pub fn plan_strategy(ps: &ProfiledSpectrum) -> Result<Strategy, EngineError> {
    let report = distinguishing_verdict(ps)?;
    let core = &ps.core;

    if report.verdict == Verdict::Omega {
        let kind = match report.case {
            VerdictCase::NoLimit => DefeatKind::MinClassTransposition {
                p: core.min_positive(),
            },
            VerdictCase::ZeroLimit => DefeatKind::DenseClassInvolution,
            VerdictCase::PositiveLimit => {
                return Err(EngineError::PreconditionFailed(
                    "positive-limit spectra always admit a two-coloring".to_owned(),
                ))
            }
        };
        return Ok(Strategy::InfiniteDefeat { kind });
    }

    match &ps.profile {
        SpectrumProfile::PositiveLimit { limit_value, .. } => {
            let limit = *limit_value;
            // Smallest works best: it leaves the whole ladder of close pairs
            // above s available as (h, k) choices later.
            let forest_seed = core
                .positives()
                .iter()
                .copied()
                .find(|&s| s < limit && core.successor(s) <= s.doubled());
            if let Some(s) = forest_seed {
                let r = core.floor_element(s.doubled()).expect("successor <= 2s");
                return Ok(Strategy::Forest { s, r });
            }
            if let Some(&bad) = core
                .positives()
                .iter()
                .find(|&&p| p < limit && !core.is_insular(p))
            {
                return Err(EngineError::NoQualifyingParameters(format!(
                    "{bad} below the limit {limit} is neither a forest seed nor insular"
                )));
            }
            let window: Vec<Rational> = core
                .positives()
                .iter()
                .copied()
                .filter(|&e| e > limit && e < limit.doubled())
                .collect();
            if window.len() < 3 {
                return Err(EngineError::NoQualifyingParameters(format!(
                    "only {} core elements between the limit {limit} and its double",
                    window.len()
                )));
            }
            let s2 = window[window.len() - 1];
            let s1 = window[window.len() - 2];
            let s = window[window.len() - 3];
            let r = if core.contains(limit) {
                limit
            } else {
                match window.iter().rev().find(|&&e| e < s) {
                    Some(&e) => e,
                    None => {
                        return Err(EngineError::NoQualifyingParameters(format!(
                            "no core element between the limit {limit} and the edge distance {s}"
                        )))
                    }
                }
            };
            if s2 >= r.doubled() {
                return Err(EngineError::NoQualifyingParameters(format!(
                    "separator ladder breaks: {s2} is not below twice {r}"
                )));
            }
            Ok(Strategy::CrabNest { r, s, s1, s2 })
        }
        SpectrumProfile::ZeroLimit { .. } => {
            // Verdict Two plus a zero limit means gaps vanish at infinity, so
            // close pairs keep appearing above any fixed element. The
            // smallest non-jump leaves all of them available.
            let seed = core
                .positives()
                .iter()
                .copied()
                .filter(|&s| s < core.max())
                .find(|&s| core.successor(s) <= s.doubled());
            match seed {
                Some(s) => Ok(Strategy::Forest {
                    s,
                    r: core.floor_element(s.doubled()).expect("successor <= 2s"),
                }),
                None => Err(EngineError::NoQualifyingParameters(
                    "no non-jump element with a close pair above it".to_owned(),
                )),
            }
        }
        SpectrumProfile::NoLimit => {
            let (a, b) = report.close_pair.ok_or_else(|| {
                EngineError::PreconditionFailed(
                    "no-limit Two verdict carries no close pair".to_owned(),
                )
            })?;
            let initial_nonjump = core
                .positives()
                .iter()
                .copied()
                .find(|&s| core.is_initial(s) && !core.is_jump(s));
            Ok(Strategy::BoundBelow {
                s: a,
                r: b,
                initial_nonjump,
            })
        }
    }
}

/// Chooses the anchor distances (h, k) for a pair at distance t.
///
/// Every return satisfies h < k and the triangle band h + k >= t >= k - h,
/// so {x, y, anchor} is a metric space. The rule is per-case and
/// deterministic; when the truncation holds no qualifying pair the error
/// says so rather than bending the inequalities.
pub fn select_ht_kt(
    strategy: &Strategy,
    core: &Spectrum,
    t: Rational,
) -> Result<(Rational, Rational), EngineError> {
    if !t.is_positive() || !core.contains(t) {
        return Err(EngineError::PreconditionFailed(format!(
            "pair distance {t} is not a positive core element"
        )));
    }
    match strategy {
        Strategy::BoundBelow { s, r, .. } => Ok(if t <= *r { (*s, *r) } else { (*r, t) }),
        Strategy::Forest { s, .. } => {
            // Consecutive pairs above s, largest first; widening to
            // non-consecutive pairs only if no neighbor pair fits the band.
            let positives = core.positives();
            let consecutive = positives
                .windows(2)
                .rev()
                .map(|w| (w[0], w[1]))
                .find(|&(h, k)| h > *s && k - h <= t && t <= h + k);
            if let Some(found) = consecutive {
                return Ok(found);
            }
            let mut best: Option<(Rational, Rational)> = None;
            for (i, &h) in positives.iter().enumerate() {
                if h <= *s {
                    continue;
                }
                for &k in &positives[i + 1..] {
                    if k - h <= t && t <= h + k {
                        let better = match best {
                            None => true,
                            Some((bh, bk)) => {
                                let (w, bw) = (k - h, bk - bh);
                                w < bw || (w == bw && h > bh)
                            }
                        };
                        if better {
                            best = Some((h, k));
                        }
                    }
                }
            }
            best.ok_or_else(|| {
                EngineError::NoQualifyingParameters(format!(
                    "no pair above {s} within the band for t = {t}"
                ))
            })
        }
        Strategy::CrabNest { r, s1, s2, .. } => {
            if t < *r {
                // Closest consecutive pair at or above r whose gap fits
                // under t; keeping h >= r protects the scaffold floor.
                let found = core
                    .positives()
                    .windows(2)
                    .map(|w| (w[0], w[1]))
                    .find(|&(h, k)| h >= *r && k - h <= t);
                found.ok_or_else(|| {
                    EngineError::NoQualifyingParameters(format!(
                        "no consecutive pair at or above {r} with gap at most {t}"
                    ))
                })
            } else if t < r.doubled() {
                Ok((*s1, *s2))
            } else {
                Ok((*s1, t))
            }
        }
        Strategy::InfiniteDefeat { .. } => Err(EngineError::WrongStrategy(
            "infinite-defeat plans never anchor pairs".to_owned(),
        )),
    }
}

/// What happened to one queued pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PairAction {
    AlreadySeparated {
        witness: String,
    },
    Attached {
        h: Rational,
        k: Rational,
        /// Cross-distance floor enforced while amalgamating.
        floor: Rational,
        witness: String,
        gadget_order: usize,
        /// Crab heft, when the gadget is a crab.
        heft: Option<usize>,
        /// Canonical tree encoding, when the gadget is a tree.
        shape: Option<String>,
    },
}

/// One processed pair: the points, their distance, and the outcome.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairRecord {
    pub x: String,
    pub y: String,
    pub t: Rational,
    pub action: PairAction,
}

#[derive(Debug, Clone)]
enum Registry {
    Trees {
        shapes: Vec<SimpleGraph>,
        /// Ambient indices per shape, in tree-vertex order.
        blocks: Vec<Vec<usize>>,
    },
    Crabs {
        crabs: Vec<Crab>,
        /// Ambient indices per crab, in crab-vertex order.
        blocks: Vec<Vec<usize>>,
        /// Ambient index of each crab's marked end-clique vertex.
        endpoints: Vec<usize>,
    },
}

/// The scaffold under construction: the protected point set, the gadgets
/// it is made of, and the transcript of processed pairs.
#[derive(Debug, Clone)]
pub struct StabilizerState {
    pub strategy: Strategy,
    /// Ambient indices of the protected color-1 set, in creation order.
    pub protected: Vec<usize>,
    /// Pairs this scaffold answers for, frozen before the first attachment.
    pub queue: Vec<(usize, usize)>,
    pub processed: Vec<PairRecord>,
    registry: Registry,
}

impl StabilizerState {
    pub fn new(strategy: Strategy, queue: Vec<(usize, usize)>) -> Result<Self, EngineError> {
        let registry = match &strategy {
            Strategy::Forest { .. } | Strategy::BoundBelow { .. } => Registry::Trees {
                shapes: Vec::new(),
                blocks: Vec::new(),
            },
            Strategy::CrabNest { .. } => Registry::Crabs {
                crabs: Vec::new(),
                blocks: Vec::new(),
                endpoints: Vec::new(),
            },
            Strategy::InfiniteDefeat { .. } => {
                return Err(EngineError::WrongStrategy(
                    "infinite-defeat plans build no scaffold".to_owned(),
                ))
            }
        };
        Ok(StabilizerState {
            strategy,
            protected: Vec::new(),
            queue,
            processed: Vec::new(),
            registry,
        })
    }

    /// Hefts of the attached crabs, empty for tree scaffolds.
    pub fn hefts(&self) -> Vec<usize> {
        match &self.registry {
            Registry::Trees { .. } => Vec::new(),
            Registry::Crabs { crabs, .. } => crabs.iter().map(|c| c.heft).collect(),
        }
    }

    /// Number of gadgets attached so far.
    pub fn gadget_count(&self) -> usize {
        match &self.registry {
            Registry::Trees { shapes, .. } => shapes.len(),
            Registry::Crabs { crabs, .. } => crabs.len(),
        }
    }

    /// Scaffold points eligible to separate a pair. Crab scaffolds answer
    /// only through their marked endpoints.
    fn separators(&self) -> &[usize] {
        match &self.registry {
            Registry::Trees { .. } => &self.protected,
            Registry::Crabs { endpoints, .. } => endpoints,
        }
    }

    fn find_separator(&self, space: &FiniteMetricSpace, x: usize, y: usize) -> Option<usize> {
        self.separators()
            .iter()
            .copied()
            .find(|&z| space.dist(x, z) != space.dist(y, z))
    }
}

/// Builds the three-point anchor space {x, y, anchor} for a pair at
/// distance t with prescribed anchor distances h, k.
fn anchor_space(
    space: &FiniteMetricSpace,
    x: usize,
    y: usize,
    t: Rational,
    h: Rational,
    k: Rational,
) -> Result<FiniteMetricSpace, EngineError> {
    let z = Rational::ZERO;
    Ok(FiniteMetricSpace::new(
        vec![
            space.label(x).to_owned(),
            space.label(y).to_owned(),
            "anchor".to_owned(),
        ],
        vec![vec![z, t, h], vec![t, z, k], vec![h, k, z]],
    )?)
}

/// Realizes every unshared point of `merged` (the amalgam of the scaffold
/// base with an attached gadget) inside the ambient approximation, in
/// gadget order. Returns the new ambient indices.
fn realize_block(
    ambient: &mut Approximation,
    core: &Spectrum,
    merged: &crate::amalgam::AmalgamResult,
    base_ambient: &[usize],
    first_unshared: usize,
) -> Result<Vec<usize>, EngineError> {
    let b_len = merged.b_indices.len();
    let mut realized: Vec<usize> = Vec::new();
    for j in first_unshared..b_len {
        let rj = merged.b_indices[j];
        // Distances to the base come from the amalgam; distances to earlier
        // block points likewise, keeping the gadget metric exact.
        let mut entries: Vec<(usize, Rational)> = Vec::new();
        for (pos, &amb) in base_ambient.iter().enumerate() {
            entries.push((amb, merged.space.dist(rj, merged.a_indices[pos])));
        }
        for (offset, &amb) in realized.iter().enumerate() {
            let rp = merged.b_indices[first_unshared + offset];
            entries.push((amb, merged.space.dist(rj, rp)));
        }
        entries.sort_by_key(|&(amb, _)| amb);
        let vector = KatetovVector {
            base: entries.iter().map(|&(amb, _)| amb).collect(),
            values: entries.iter().map(|&(_, v)| v).collect(),
        };
        let base_labels: Vec<String> = vector
            .base
            .iter()
            .map(|&i| ambient.space.label(i).to_owned())
            .collect();
        let grown = realize_extension(&ambient.space, &vector, core)?;
        let new_idx = grown.len() - 1;
        ambient.log.push(ExtensionStep {
            base: base_labels,
            values: vector.values.clone(),
            new_label: grown.label(new_idx).to_owned(),
        });
        ambient.space = grown;
        realized.push(new_idx);
    }
    Ok(realized)
}

fn check_budget(
    ambient: &Approximation,
    incoming: usize,
    state: &StabilizerState,
    budget: &EngineBudget,
) -> Result<(), EngineError> {
    let need = ambient.space.len() + incoming;
    if need > budget.max_points {
        return Err(EngineError::BudgetExceeded(format!(
            "{need} points needed against a cap of {}; {} of {} pairs processed, {} gadgets attached",
            budget.max_points,
            state.processed.len(),
            state.queue.len(),
            state.gadget_count()
        )));
    }
    Ok(())
}

/// Resource limits for a full coloring run.
#[derive(Debug, Clone, Copy)]
pub struct EngineBudget {
    /// Points saturated before the pair queue freezes.
    pub seed_points: usize,
    /// Saturation level for the seeding pass.
    pub seed_level: usize,
    /// Hard cap on ambient points across all attachments.
    pub max_points: usize,
    /// Node budget per amalgamation search.
    pub search_nodes: u64,
    pub symmetry: SearchBudget,
}

impl Default for EngineBudget {
    fn default() -> Self {
        EngineBudget {
            seed_points: 6,
            seed_level: 1,
            max_points: 4000,
            search_nodes: 500_000,
            symmetry: SearchBudget::default(),
        }
    }
}

/// Separates one pair with a rigid tree, or records the scaffold point that
/// already does.
///
/// The attachment runs in two amalgamation steps. First the anchor space
/// {x, y, e} meets the gadget metric over the shared leaf e, with every
/// gadget-to-pair distance floored at min(r, h) (at r for bound-below
/// plans) and oriented dist(v, x) <= dist(v, y). Then that result meets the
/// scaffold-plus-pair subspace over {x, y} under the same floor, so no new
/// distance ever drops to the edge length s. Every new point is realized
/// into the ambient approximation with its amalgam distances pinned.
pub fn stabilize_pair_forest(
    state: &mut StabilizerState,
    ambient: &mut Approximation,
    ps: &ProfiledSpectrum,
    pair: (usize, usize),
    budget: &EngineBudget,
) -> Result<(), EngineError> {
    let (x, y) = pair;
    let (s, r, bound_below) = match state.strategy {
        Strategy::Forest { s, r } => (s, r, false),
        Strategy::BoundBelow { s, r, .. } => (s, r, true),
        _ => {
            return Err(EngineError::WrongStrategy(format!(
                "{} plans do not attach trees",
                state.strategy.case_name()
            )))
        }
    };
    let space = &ambient.space;
    if x == y || x >= space.len() || y >= space.len() {
        return Err(EngineError::PreconditionFailed(format!(
            "pair ({x}, {y}) is not two distinct ambient points"
        )));
    }
    let t = space.dist(x, y);
    let (x_label, y_label) = (space.label(x).to_owned(), space.label(y).to_owned());

    if let Some(z) = state.find_separator(space, x, y) {
        state.processed.push(PairRecord {
            x: x_label,
            y: y_label,
            t,
            action: PairAction::AlreadySeparated {
                witness: space.label(z).to_owned(),
            },
        });
        return Ok(());
    }

    let (h, k) = select_ht_kt(&state.strategy, &ps.core, t)?;
    let floor = if bound_below { r } else { r.min(h) };

    let shapes = match &state.registry {
        Registry::Trees { shapes, .. } => shapes,
        Registry::Crabs { .. } => unreachable!("strategy checked above"),
    };
    let tree = build_rigid_tree(7, shapes, &budget.symmetry)?;
    check_budget(ambient, tree.order(), state, budget)?;
    let gadget = gadget_metric(&tree, s, r)?;
    let e_local = (0..tree.order())
        .find(|&v| tree.degree(v) == 1)
        .expect("a tree on two or more vertices has a leaf");

    // Step one: hang the gadget off the anchor triangle.
    let anchor = anchor_space(space, x, y, t, h, k)?;
    let instance = AmalgamationInstance::new(anchor, gadget.space.clone(), &[(2, e_local)])?;
    let mut constraints = CompletionConstraints {
        global_floor: Some(floor),
        ..Default::default()
    };
    let mut slot = 3;
    for v in 0..tree.order() {
        if v != e_local {
            constraints.orientations.push(Orientation { p: slot, x: 0, y: 1 });
            slot += 1;
        }
    }
    let attached = search_with_constraints(&instance, &ps.core, &constraints, budget.search_nodes)?;

    // Step two: meet the scaffold over {x, y} without dropping below the
    // floor anywhere.
    let mut base_ambient = state.protected.clone();
    base_ambient.push(x);
    base_ambient.push(y);
    let m = state.protected.len();
    let scaffold_side = space.subspace(&base_ambient)?;
    let instance2 =
        AmalgamationInstance::new(scaffold_side, attached.space.clone(), &[(m, 0), (m + 1, 1)])?;
    let floored = CompletionConstraints {
        global_floor: Some(floor),
        ..Default::default()
    };
    let merged = search_with_constraints(&instance2, &ps.core, &floored, budget.search_nodes)?;

    let realized = realize_block(ambient, &ps.core, &merged, &base_ambient, 2)?;
    // realize order was anchor leaf first, then tree vertices ascending.
    let e_ambient = realized[0];
    let mut block = vec![usize::MAX; tree.order()];
    block[e_local] = e_ambient;
    let mut next = 1;
    for (v, slot) in block.iter_mut().enumerate() {
        if v != e_local {
            *slot = realized[next];
            next += 1;
        }
    }
    state.protected.extend(realized.iter().copied());
    let shape_code = tree_canonical(&tree);
    match &mut state.registry {
        Registry::Trees { shapes, blocks } => {
            shapes.push(tree.clone());
            blocks.push(block);
        }
        Registry::Crabs { .. } => unreachable!("strategy checked above"),
    }
    state.processed.push(PairRecord {
        x: x_label,
        y: y_label,
        t,
        action: PairAction::Attached {
            h,
            k,
            floor,
            witness: ambient.space.label(e_ambient).to_owned(),
            gadget_order: tree.order(),
            heft: None,
            shape: shape_code,
        },
    });
    verify_forest_state(state, &ambient.space, s, budget)
}

/// Separates one pair with a rigid crab through its marked end-clique
/// vertex.
///
/// Hefts grow by three per attachment starting at five, keeping each crab
/// structurally distinguishable from the last. The anchor amalgam floors
/// all unshared crab-to-pair distances at s1; the scaffold amalgam is the
/// canonical one, whose truncated-addition values never fall below the
/// non-edge distance r.
pub fn stabilize_pair_crab(
    state: &mut StabilizerState,
    ambient: &mut Approximation,
    ps: &ProfiledSpectrum,
    pair: (usize, usize),
    budget: &EngineBudget,
) -> Result<(), EngineError> {
    let (x, y) = pair;
    let (r, s, s1) = match state.strategy {
        Strategy::CrabNest { r, s, s1, .. } => (r, s, s1),
        _ => {
            return Err(EngineError::WrongStrategy(format!(
                "{} plans do not attach crabs",
                state.strategy.case_name()
            )))
        }
    };
    let space = &ambient.space;
    if x == y || x >= space.len() || y >= space.len() {
        return Err(EngineError::PreconditionFailed(format!(
            "pair ({x}, {y}) is not two distinct ambient points"
        )));
    }
    let t = space.dist(x, y);
    let (x_label, y_label) = (space.label(x).to_owned(), space.label(y).to_owned());

    if let Some(z) = state.find_separator(space, x, y) {
        state.processed.push(PairRecord {
            x: x_label,
            y: y_label,
            t,
            action: PairAction::AlreadySeparated {
                witness: space.label(z).to_owned(),
            },
        });
        return Ok(());
    }

    let (h, k) = select_ht_kt(&state.strategy, &ps.core, t)?;
    let heft = state.hefts().last().map_or(5, |&last| last + 3);
    let legs: Vec<usize> = (1..=heft + 1).collect();
    let spider = build_spider(&legs)?;
    let crab = build_crab(heft, &spider)?;
    check_budget(ambient, crab.order(), state, budget)?;
    let gadget = gadget_metric(&crab.graph, s, r)?;
    let r_local = crab.cliques[crab.end_cliques()[0]][0];

    let anchor = anchor_space(space, x, y, t, h, k)?;
    let instance = AmalgamationInstance::new(anchor, gadget.space.clone(), &[(2, r_local)])?;
    let mut constraints = CompletionConstraints {
        global_floor: Some(s1),
        ..Default::default()
    };
    let mut slot = 3;
    for v in 0..crab.order() {
        if v != r_local {
            constraints.orientations.push(Orientation { p: slot, x: 0, y: 1 });
            slot += 1;
        }
    }
    let attached = search_with_constraints(&instance, &ps.core, &constraints, budget.search_nodes)?;

    let mut base_ambient = state.protected.clone();
    base_ambient.push(x);
    base_ambient.push(y);
    let m = state.protected.len();
    let scaffold_side = space.subspace(&base_ambient)?;
    let instance2 =
        AmalgamationInstance::new(scaffold_side, attached.space.clone(), &[(m, 0), (m + 1, 1)])?;
    let merged = amalgamate_oplus(&instance2, &ps.core)?;

    let realized = realize_block(ambient, &ps.core, &merged, &base_ambient, 2)?;
    let r_ambient = realized[0];
    let mut block = vec![usize::MAX; crab.order()];
    block[r_local] = r_ambient;
    let mut next = 1;
    for (v, slot) in block.iter_mut().enumerate() {
        if v != r_local {
            *slot = realized[next];
            next += 1;
        }
    }
    state.protected.extend(realized.iter().copied());
    let order = crab.order();
    match &mut state.registry {
        Registry::Crabs {
            crabs,
            blocks,
            endpoints,
        } => {
            crabs.push(crab);
            blocks.push(block);
            endpoints.push(r_ambient);
        }
        Registry::Trees { .. } => unreachable!("strategy checked above"),
    }
    state.processed.push(PairRecord {
        x: x_label,
        y: y_label,
        t,
        action: PairAction::Attached {
            h,
            k,
            floor: s1,
            witness: ambient.space.label(r_ambient).to_owned(),
            gadget_order: order,
            heft: Some(heft),
            shape: None,
        },
    });
    verify_nest_state(state, &ambient.space, r, s, budget)
}

/// Re-checks the tree-scaffold invariants from scratch: the s-distance
/// graph over the protected set is exactly the registered forest, shapes
/// are rigid and pairwise distinct, and every processed pair still has its
/// separating witness.
fn verify_forest_state(
    state: &StabilizerState,
    space: &FiniteMetricSpace,
    s: Rational,
    budget: &EngineBudget,
) -> Result<(), EngineError> {
    let (shapes, blocks) = match &state.registry {
        Registry::Trees { shapes, blocks } => (shapes, blocks),
        Registry::Crabs { .. } => {
            return Err(EngineError::WrongStrategy(
                "crab registry under a tree verifier".to_owned(),
            ))
        }
    };
    // Position of each protected point inside its block.
    let mut owner: std::collections::BTreeMap<usize, (usize, usize)> =
        std::collections::BTreeMap::new();
    for (b, block) in blocks.iter().enumerate() {
        for (v, &amb) in block.iter().enumerate() {
            owner.insert(amb, (b, v));
        }
    }
    for &u in &state.protected {
        if !owner.contains_key(&u) {
            return Err(EngineError::InvariantBroken(format!(
                "protected point {} belongs to no registered tree",
                space.label(u)
            )));
        }
    }
    for (i, &u) in state.protected.iter().enumerate() {
        for &v in &state.protected[i + 1..] {
            let (bu, tu) = owner[&u];
            let (bv, tv) = owner[&v];
            let is_edge = space.dist(u, v) == s;
            let should = bu == bv && shapes[bu].has_edge(tu, tv);
            if is_edge != should {
                return Err(EngineError::InvariantBroken(format!(
                    "s-distance graph disagrees with the forest at ({}, {})",
                    space.label(u),
                    space.label(v)
                )));
            }
        }
    }
    let mut canons: Vec<String> = Vec::new();
    for shape in shapes {
        if !graph_is_rigid(shape, &budget.symmetry)? {
            return Err(EngineError::InvariantBroken(
                "a registered tree lost rigidity".to_owned(),
            ));
        }
        let canon = tree_canonical(shape).ok_or_else(|| {
            EngineError::InvariantBroken("a registered shape is not a tree".to_owned())
        })?;
        if canons.contains(&canon) {
            return Err(EngineError::InvariantBroken(
                "two registered trees share a shape".to_owned(),
            ));
        }
        canons.push(canon);
    }
    verify_separation(state, space)
}

/// Re-checks the crab-nest invariants: the s-distance graph over the
/// protected set passes the structural verifier against the registered
/// components, and no two scaffold points sit closer than r.
fn verify_nest_state(
    state: &StabilizerState,
    space: &FiniteMetricSpace,
    r: Rational,
    s: Rational,
    budget: &EngineBudget,
) -> Result<(), EngineError> {
    let (crabs, blocks, endpoints) = match &state.registry {
        Registry::Crabs {
            crabs,
            blocks,
            endpoints,
        } => (crabs, blocks, endpoints),
        Registry::Trees { .. } => {
            return Err(EngineError::WrongStrategy(
                "tree registry under a nest verifier".to_owned(),
            ))
        }
    };
    let sub = space.subspace(&state.protected)?;
    let position: std::collections::BTreeMap<usize, usize> = state
        .protected
        .iter()
        .enumerate()
        .map(|(local, &amb)| (amb, local))
        .collect();
    let nest = CrabNest {
        graph: sub.distance_graph(s).graph,
        components: crabs.clone(),
        component_vertices: blocks
            .iter()
            .map(|block| block.iter().map(|amb| position[amb]).collect())
            .collect(),
        endpoints: endpoints.iter().map(|amb| position[amb]).collect(),
    };
    let report = verify_crab_nest(&nest, &budget.symmetry);
    if !report.passed {
        let clause = report
            .first_failure()
            .map_or("unknown".to_owned(), |c| format!("{}: {}", c.clause, c.detail));
        return Err(EngineError::InvariantBroken(format!(
            "crab nest verification failed at {clause}"
        )));
    }
    for (i, &u) in state.protected.iter().enumerate() {
        for &v in &state.protected[i + 1..] {
            if space.dist(u, v) < r {
                return Err(EngineError::InvariantBroken(format!(
                    "scaffold points {} and {} sit below the floor {r}",
                    space.label(u),
                    space.label(v)
                )));
            }
        }
    }
    verify_separation(state, space)
}

fn labeled(space: &FiniteMetricSpace, label: &str) -> Result<usize, EngineError> {
    space.index_of(label).ok_or_else(|| {
        EngineError::InvariantBroken(format!("no point labeled {label} in the space"))
    })
}

fn verify_separation(state: &StabilizerState, space: &FiniteMetricSpace) -> Result<(), EngineError> {
    for record in &state.processed {
        let witness = match &record.action {
            PairAction::AlreadySeparated { witness } => witness,
            PairAction::Attached { witness, .. } => witness,
        };
        let x = labeled(space, &record.x)?;
        let y = labeled(space, &record.y)?;
        let z = labeled(space, witness)?;
        if space.dist(x, z) == space.dist(y, z) {
            return Err(EngineError::InvariantBroken(format!(
                "witness {witness} no longer separates ({}, {})",
                record.x, record.y
            )));
        }
    }
    Ok(())
}

/// A finite approximation, a two-coloring of it, and the automorphism
/// search transcript showing the coloring distinguishes it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DistinguishingCertificate {
    pub space: Approximation,
    /// 1 on the protected scaffold, 0 elsewhere.
    pub coloring: Vec<usize>,
    pub strategy: Strategy,
    pub protected: Vec<String>,
    pub pairs: Vec<PairRecord>,
    pub verification: AutomorphismReport,
    /// Finite-scale caveat, stamped on every certificate.
    pub scope: String,
}

/// What every certificate admits about itself.
pub const CERTIFICATE_SCOPE: &str =
    "distinguishing verified for this finite approximation only; the construction, \
     not this audit, is what extends";

/// Runs the full pipeline: saturate a seed, freeze the pair queue, stabilize
/// every pair, color the scaffold, and verify the coloring admits only the
/// trivial color-preserving isometry.
pub fn build_two_coloring(
    ps: &ProfiledSpectrum,
    budget: &EngineBudget,
) -> Result<DistinguishingCertificate, EngineError> {
    let strategy = plan_strategy(ps)?;
    if let Strategy::InfiniteDefeat { .. } = strategy {
        return Err(EngineError::WrongStrategy(
            "the verdict is Omega; run a defeater instead of a coloring".to_owned(),
        ));
    }
    let mut ambient = saturate(ps, budget.seed_level, None, budget.seed_points)?;
    let n0 = ambient.space.len();
    let queue: Vec<(usize, usize)> = (0..n0)
        .flat_map(|i| ((i + 1)..n0).map(move |j| (i, j)))
        .collect();
    let mut state = StabilizerState::new(strategy.clone(), queue.clone())?;
    for &(x, y) in &queue {
        match strategy {
            Strategy::Forest { .. } | Strategy::BoundBelow { .. } => {
                stabilize_pair_forest(&mut state, &mut ambient, ps, (x, y), budget)?
            }
            Strategy::CrabNest { .. } => {
                stabilize_pair_crab(&mut state, &mut ambient, ps, (x, y), budget)?
            }
            Strategy::InfiniteDefeat { .. } => unreachable!("rejected above"),
        }
    }
    let n = ambient.space.len();
    let mut coloring = vec![0usize; n];
    for &i in &state.protected {
        coloring[i] = 1;
    }
    let verification = space_color_preserving(&ambient.space, &coloring, &budget.symmetry)?;
    if !verification.is_trivial {
        return Err(EngineError::InvariantBroken(format!(
            "a nontrivial color-preserving isometry survived; group order {}",
            verification.order
        )));
    }
    let protected = state
        .protected
        .iter()
        .map(|&i| ambient.space.label(i).to_owned())
        .collect();
    Ok(DistinguishingCertificate {
        space: ambient,
        coloring,
        strategy,
        protected,
        pairs: state.processed,
        verification,
        scope: CERTIFICATE_SCOPE.to_owned(),
    })
}

/// The cheap half of a certificate audit: coloring shape, protected
/// labels, and stored witness separations. Does not touch the
/// color-preserving group.
pub fn audit_certificate_structure(
    cert: &DistinguishingCertificate,
) -> Result<(), EngineError> {
    let space = &cert.space.space;
    if cert.coloring.len() != space.len() {
        return Err(EngineError::ColoringMismatch {
            expected: space.len(),
            got: cert.coloring.len(),
        });
    }
    for label in &cert.protected {
        let i = labeled(space, label)?;
        if cert.coloring[i] != 1 {
            return Err(EngineError::InvariantBroken(format!(
                "protected point {label} is not colored 1"
            )));
        }
    }
    let ones = cert.coloring.iter().filter(|&&c| c == 1).count();
    if ones != cert.protected.len() {
        return Err(EngineError::InvariantBroken(format!(
            "{ones} points colored 1 against {} protected labels",
            cert.protected.len()
        )));
    }
    for record in &cert.pairs {
        let witness = match &record.action {
            PairAction::AlreadySeparated { witness } => witness,
            PairAction::Attached { witness, .. } => witness,
        };
        let x = labeled(space, &record.x)?;
        let y = labeled(space, &record.y)?;
        let z = labeled(space, witness)?;
        if space.dist(x, z) == space.dist(y, z) {
            return Err(EngineError::InvariantBroken(format!(
                "stored witness {witness} does not separate ({}, {})",
                record.x, record.y
            )));
        }
    }
    Ok(())
}

/// Re-checks a stored certificate from scratch: the structural audit plus a
/// fresh color-preserving group search on the serialized space and coloring
/// alone. Returns the fresh report so a failure can show its generators.
pub fn audit_certificate(
    cert: &DistinguishingCertificate,
    budget: &SearchBudget,
) -> Result<AutomorphismReport, EngineError> {
    audit_certificate_structure(cert)?;
    let verification = space_color_preserving(&cert.space.space, &cert.coloring, budget)?;
    if !verification.is_trivial {
        return Err(EngineError::InvariantBroken(format!(
            "color-preserving group has order {}, not 1; a nontrivial generator: {:?}",
            verification.order,
            verification
                .generators
                .first()
                .map(|g| g.0.clone())
                .unwrap_or_default()
        )));
    }
    Ok(verification)
}

/// Which construction produced a defeater.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DefeaterKind {
    Transposition,
    DenseInvolution,
}

/// A nontrivial color-preserving isometry of a finite space, produced
/// against a specific coloring.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Defeater {
    pub kind: DefeaterKind,
    /// The defeated coloring, echoed for the audit.
    pub coloring: Vec<usize>,
    /// Image of each point index.
    pub automorphism: Vec<usize>,
    /// Labels of the moved points.
    pub moved: Vec<String>,
    /// dist(x, f(x)) on every moved point.
    pub step: Rational,
}

/// Full validation of a defeater against its space: bijection, isometry,
/// color preservation, involution, nontriviality, and the step law on
/// moved points.
pub fn audit_defeater(space: &FiniteMetricSpace, d: &Defeater) -> Result<(), EngineError> {
    let n = space.len();
    if d.automorphism.len() != n {
        return Err(EngineError::ColoringMismatch {
            expected: n,
            got: d.automorphism.len(),
        });
    }
    if d.coloring.len() != n {
        return Err(EngineError::ColoringMismatch {
            expected: n,
            got: d.coloring.len(),
        });
    }
    let g = &d.automorphism;
    let mut seen = vec![false; n];
    for &img in g {
        if img >= n || seen[img] {
            return Err(EngineError::InvariantBroken(
                "the map is not a permutation".to_owned(),
            ));
        }
        seen[img] = true;
    }
    if g.iter().enumerate().all(|(i, &gi)| gi == i) {
        return Err(EngineError::InvariantBroken(
            "the identity defeats nothing".to_owned(),
        ));
    }
    for (i, &gi) in g.iter().enumerate() {
        if g[gi] != i {
            return Err(EngineError::InvariantBroken(format!(
                "not an involution at {}",
                space.label(i)
            )));
        }
        if d.coloring[gi] != d.coloring[i] {
            return Err(EngineError::InvariantBroken(format!(
                "color changes at {}",
                space.label(i)
            )));
        }
        for (j, &gj) in g.iter().enumerate() {
            if space.dist(gi, gj) != space.dist(i, j) {
                return Err(EngineError::InvariantBroken(format!(
                    "distances break at ({}, {})",
                    space.label(i),
                    space.label(j)
                )));
            }
        }
        if gi != i && space.dist(i, gi) != d.step {
            return Err(EngineError::InvariantBroken(format!(
                "moved point {} travels {} instead of {}",
                space.label(i),
                space.dist(i, gi),
                d.step
            )));
        }
    }
    for (i, &gi) in g.iter().enumerate() {
        let moved = gi != i;
        let listed = d.moved.contains(&space.label(i).to_owned());
        if moved != listed {
            return Err(EngineError::InvariantBroken(format!(
                "moved list disagrees with the map at {}",
                space.label(i)
            )));
        }
    }
    Ok(())
}

fn defeater_from_permutation(
    space: &FiniteMetricSpace,
    coloring: &[usize],
    automorphism: Vec<usize>,
    kind: DefeaterKind,
    step: Rational,
) -> Result<Defeater, EngineError> {
    let moved = automorphism
        .iter()
        .enumerate()
        .filter(|&(i, &gi)| gi != i)
        .map(|(i, _)| space.label(i).to_owned())
        .collect();
    let d = Defeater {
        kind,
        coloring: coloring.to_vec(),
        automorphism,
        moved,
        step,
    };
    audit_defeater(space, &d)?;
    Ok(d)
}

/// Defeats any coloring of a no-limit-Omega space by swapping two
/// same-colored points of one ~p class, p the minimum positive element.
///
/// Inside a class all mutual distances equal p, and every outside point
/// sits beyond the gap, so the swap moves nothing it should not. The swap
/// is still validated coordinate by coordinate before it is returned.
pub fn defeat_no_limit(
    space: &FiniteMetricSpace,
    coloring: &[usize],
    ps: &ProfiledSpectrum,
) -> Result<Defeater, EngineError> {
    if coloring.len() != space.len() {
        return Err(EngineError::ColoringMismatch {
            expected: space.len(),
            got: coloring.len(),
        });
    }
    let report = distinguishing_verdict(ps)?;
    if report.verdict != Verdict::Omega || report.case != VerdictCase::NoLimit {
        return Err(EngineError::PreconditionFailed(format!(
            "verdict is {:?}/{:?}, not Omega in the no-limit case",
            report.verdict, report.case
        )));
    }
    let p = ps.core.min_positive();
    let partition = space.jump_classes(p, &ps.core)?;
    let colors_used = {
        let mut cs: Vec<usize> = coloring.to_vec();
        cs.sort_unstable();
        cs.dedup();
        cs.len()
    };
    let mut largest = 0;
    for class in &partition.classes {
        largest = largest.max(class.len());
        let mut first_of: std::collections::BTreeMap<usize, usize> =
            std::collections::BTreeMap::new();
        for &i in class {
            if let Some(&u) = first_of.get(&coloring[i]) {
                let mut g: Vec<usize> = (0..space.len()).collect();
                g.swap(u, i);
                return defeater_from_permutation(
                    space,
                    coloring,
                    g,
                    DefeaterKind::Transposition,
                    p,
                );
            }
            first_of.insert(coloring[i], i);
        }
    }
    Err(EngineError::ClassTooSmall {
        p,
        colors: colors_used,
        largest,
    })
}

/// Builds an involution of a diameter-s space that moves points at distance
/// exactly s within their own partition classes.
///
/// Each point is matched to a partner agreeing with it against everything
/// already decided, or left fixed when the law allows; the search backtracks
/// over those choices and rejects the all-fixed outcome. Density of every
/// class against the jump numbers at or below s is required first: it is
/// what makes the same construction extend in the unbounded space.
pub fn dense_partition_involution(
    space: &FiniteMetricSpace,
    partition: &[usize],
    s: Rational,
    ps: &ProfiledSpectrum,
) -> Result<Defeater, EngineError> {
    if partition.len() != space.len() {
        return Err(EngineError::ColoringMismatch {
            expected: space.len(),
            got: partition.len(),
        });
    }
    if !matches!(ps.profile, SpectrumProfile::ZeroLimit { .. }) {
        return Err(EngineError::PreconditionFailed(
            "dense involutions need a zero-limit profile".to_owned(),
        ));
    }
    if !s.is_positive() || !ps.core.contains(s) {
        return Err(EngineError::PreconditionFailed(format!(
            "{s} is not a positive core element"
        )));
    }
    let n = space.len();
    if n == 0 {
        return Err(EngineError::PreconditionFailed("empty space".to_owned()));
    }
    if space.max_distance() > s {
        return Err(EngineError::PreconditionFailed(format!(
            "the space has diameter {} above the swap distance {s}",
            space.max_distance()
        )));
    }
    let truncated = Spectrum::new(
        ps.core
            .elements()
            .iter()
            .copied()
            .filter(|&e| e <= s)
            .collect::<Vec<_>>(),
    )
    .expect("a truncation of a valid core is a valid core");

    let mut class_members: std::collections::BTreeMap<usize, Vec<usize>> =
        std::collections::BTreeMap::new();
    for (i, &c) in partition.iter().enumerate() {
        class_members.entry(c).or_default().push(i);
    }
    for (c, members) in &class_members {
        let density = space.density_of(members, &truncated)?;
        if !density.is_dense {
            let miss = density
                .first_miss
                .map_or("unknown".to_owned(), |(jump, class)| {
                    format!(
                        "misses the ~{jump} class of {}",
                        space.label(class[0])
                    )
                });
            return Err(EngineError::DensityUnmet(format!("class {c} {miss}")));
        }
    }

    // Match-or-fix search, matching first. `image[i]` is usize::MAX until
    // point i is decided.
    fn extend(
        space: &FiniteMetricSpace,
        partition: &[usize],
        s: Rational,
        image: &mut Vec<usize>,
    ) -> bool {
        let n = space.len();
        let u = match image.iter().position(|&g| g == usize::MAX) {
            Some(u) => u,
            None => return image.iter().enumerate().any(|(i, &g)| g != i),
        };
        for w in (u + 1)..n {
            if image[w] != usize::MAX
                || partition[w] != partition[u]
                || space.dist(u, w) != s
            {
                continue;
            }
            let lawful = (0..n).filter(|&z| image[z] != usize::MAX).all(|z| {
                space.dist(w, image[z]) == space.dist(u, z)
                    && space.dist(u, image[z]) == space.dist(w, z)
            });
            if !lawful {
                continue;
            }
            image[u] = w;
            image[w] = u;
            if extend(space, partition, s, image) {
                return true;
            }
            image[u] = usize::MAX;
            image[w] = usize::MAX;
        }
        let fixable = (0..n)
            .filter(|&z| image[z] != usize::MAX)
            .all(|z| space.dist(u, image[z]) == space.dist(u, z));
        if fixable {
            image[u] = u;
            if extend(space, partition, s, image) {
                return true;
            }
            image[u] = usize::MAX;
        }
        false
    }

    let mut image = vec![usize::MAX; n];
    if !extend(space, partition, s, &mut image) {
        return Err(EngineError::TruncationTooShallow(format!(
            "no point admits a lawful partner at distance {s}"
        )));
    }
    defeater_from_permutation(space, partition, image, DefeaterKind::DenseInvolution, s)
}

/// Defeats a coloring of a zero-limit-Omega space: finds a jump class on
/// which the present colors are dense, builds the involution there, and
/// extends by the identity.
///
/// Candidates are scanned smallest jump first; a candidate whose local
/// involution fails to extend globally is skipped, not forced. A twin-pair
/// transposition is the last resort.
pub fn defeat_zero_limit(
    space: &FiniteMetricSpace,
    coloring: &[usize],
    ps: &ProfiledSpectrum,
) -> Result<Defeater, EngineError> {
    if coloring.len() != space.len() {
        return Err(EngineError::ColoringMismatch {
            expected: space.len(),
            got: coloring.len(),
        });
    }
    let report = distinguishing_verdict(ps)?;
    if report.verdict != Verdict::Omega || report.case != VerdictCase::ZeroLimit {
        return Err(EngineError::PreconditionFailed(format!(
            "verdict is {:?}/{:?}, not Omega in the zero-limit case",
            report.verdict, report.case
        )));
    }
    let jumps: Vec<Rational> = ps
        .core
        .positives()
        .iter()
        .copied()
        .filter(|&s| ps.core.is_jump(s))
        .collect();
    let mut tried = 0usize;
    for &s in &jumps {
        let partition = space.jump_classes(s, &ps.core)?;
        for class in &partition.classes {
            if class.len() < 2 {
                continue;
            }
            tried += 1;
            let sub = space.subspace(class)?;
            let local_colors: Vec<usize> = class.iter().map(|&i| coloring[i]).collect();
            let local = match dense_partition_involution(&sub, &local_colors, s, ps) {
                Ok(d) => d,
                Err(
                    EngineError::DensityUnmet(_)
                    | EngineError::TruncationTooShallow(_)
                    | EngineError::PreconditionFailed(_),
                ) => continue,
                Err(other) => return Err(other),
            };
            let mut g: Vec<usize> = (0..space.len()).collect();
            for (local_i, &amb) in class.iter().enumerate() {
                g[amb] = class[local.automorphism[local_i]];
            }
            match defeater_from_permutation(
                space,
                coloring,
                g,
                DefeaterKind::DenseInvolution,
                s,
            ) {
                Ok(d) => return Ok(d),
                Err(EngineError::InvariantBroken(_)) => continue,
                Err(other) => return Err(other),
            }
        }
    }
    // Twin pairs: same color, identical distances to everything else.
    for i in 0..space.len() {
        for j in (i + 1)..space.len() {
            if coloring[i] != coloring[j] {
                continue;
            }
            let twin = (0..space.len())
                .filter(|&z| z != i && z != j)
                .all(|z| space.dist(i, z) == space.dist(j, z));
            if !twin {
                continue;
            }
            let mut g: Vec<usize> = (0..space.len()).collect();
            g.swap(i, j);
            if let Ok(d) = defeater_from_permutation(
                space,
                coloring,
                g,
                DefeaterKind::Transposition,
                space.dist(i, j),
            ) {
                return Ok(d);
            }
        }
    }
    Err(EngineError::NoSuitableClass(format!(
        "{tried} candidate classes over {} jump numbers, none dense and matchable",
        jumps.len()
    )))
}
