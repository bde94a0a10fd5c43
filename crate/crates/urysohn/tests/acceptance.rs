//! End-to-end acceptance gate. Each test checks one numbered criterion and
//! ends with a single `criterion NN: pass` line; run with `--nocapture` to
//! see those lines alongside the harness verdicts. The numbered tests are
//! deliberately independent so a failure localizes to one claim.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use urysohn::amalgam::{
    amalgamate_bounded, amalgamate_oplus, amalgamate_search, AmalgamError, AmalgamationInstance,
};
use urysohn::builder::{realize_extension, saturate, KatetovVector};
use urysohn::catalog;
use urysohn::coloring::{
    audit_certificate, audit_defeater, build_two_coloring, defeat_no_limit, defeat_zero_limit,
    dense_partition_involution, EngineBudget,
};
use urysohn::gadgets::{build_crab, build_crab_nest, build_rigid_tree, build_spider};
use urysohn::rational::Rational;
use urysohn::space::FiniteMetricSpace;
use urysohn::spectrum::{
    distinguishing_verdict, FourValuesVerdict, ProfiledSpectrum, Spectrum, Verdict, VerdictCase,
};
use urysohn::symmetry::{
    graph_automorphism_group, graph_distinguishing_number, space_distinguishing_number,
    DistinguishingOutcome, SearchBudget,
};

fn qi(n: i64) -> Rational {
    Rational::from_int(n)
}

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

fn absdiff(a: Rational, b: Rational) -> Rational {
    if a >= b {
        a - b
    } else {
        b - a
    }
}

/// Every core over `{0, 1, .., max_value}` with at most `max_size` elements.
/// Zero is always included, so masks range over the positive values.
fn exhaustive_cores(max_value: i64, max_size: usize) -> Vec<Spectrum> {
    let positives: Vec<i64> = (1..=max_value).collect();
    let mut out = Vec::new();
    for mask in 1u32..(1 << positives.len()) {
        if mask.count_ones() as usize > max_size - 1 {
            continue;
        }
        let mut elems = vec![0i64];
        for (bit, &v) in positives.iter().enumerate() {
            if mask & (1 << bit) != 0 {
                elems.push(v);
            }
        }
        out.push(Spectrum::from_ints(elems).expect("sorted nonnegative ints form a core"));
    }
    out
}

/// A random core of 2 to 8 rationals including zero, with denominators small
/// enough that every combination in the tests stays exact.
fn random_rational_core(rng: &mut ChaCha8Rng) -> Spectrum {
    const DENOMS: [i64; 7] = [1, 2, 3, 4, 6, 9, 12];
    let size = rng.gen_range(1..=7usize);
    let mut elems = vec![Rational::ZERO];
    while elems.len() < size + 1 {
        let numer = rng.gen_range(1..=36i64);
        let denom = DENOMS[rng.gen_range(0..DENOMS.len())];
        elems.push(q(numer, denom));
    }
    Spectrum::new(elems).expect("positive rationals with zero form a core")
}

/// Extends `base` by `extra` fresh points with distances drawn from the
/// core's positives, rejection-sampling each new point against the one-point
/// extension condition so the result is always a metric. Returns `None` when
/// the sampler cannot place a point within its retry budget.
fn extend_random(
    rng: &mut ChaCha8Rng,
    s: &Spectrum,
    base: &FiniteMetricSpace,
    extra: usize,
    prefix: &str,
) -> Option<FiniteMetricSpace> {
    let positives = s.positives();
    assert!(!positives.is_empty(), "need a positive distance to extend");
    let mut labels: Vec<String> = base.labels().to_vec();
    let n0 = base.len();
    let mut pairs: Vec<(usize, usize, Rational)> = Vec::new();
    for i in 0..n0 {
        for j in (i + 1)..n0 {
            pairs.push((i, j, base.dist(i, j)));
        }
    }
    let dist = |pairs: &[(usize, usize, Rational)], i: usize, j: usize| -> Rational {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        pairs
            .iter()
            .find(|&&(x, y, _)| x == a && y == b)
            .map(|&(_, _, d)| d)
            .expect("earlier pairs are all recorded")
    };
    for added in 0..extra {
        let n = labels.len();
        let mut placed = false;
        'attempt: for _ in 0..128 {
            let values: Vec<Rational> = (0..n)
                .map(|_| positives[rng.gen_range(0..positives.len())])
                .collect();
            for i in 0..n {
                for j in (i + 1)..n {
                    let d = dist(&pairs, i, j);
                    if absdiff(values[i], values[j]) > d || d > values[i] + values[j] {
                        continue 'attempt;
                    }
                }
            }
            for (i, &v) in values.iter().enumerate() {
                pairs.push((i, n, v));
            }
            labels.push(format!("{prefix}{added}"));
            placed = true;
            break;
        }
        if !placed {
            return None;
        }
    }
    Some(FiniteMetricSpace::from_pairs(labels, &pairs).expect("extension condition gives a metric"))
}

fn random_space(
    rng: &mut ChaCha8Rng,
    s: &Spectrum,
    points: usize,
    prefix: &str,
) -> Option<FiniteMetricSpace> {
    let seed = FiniteMetricSpace::single_point(format!("{prefix}base"));
    extend_random(rng, s, &seed, points - 1, prefix)
}

/// A random amalgamation instance over `s`: a shared part of `shared` points
/// extended independently on each side. Sides keep the shared points first,
/// so the identification is the prefix.
fn random_instance(
    rng: &mut ChaCha8Rng,
    s: &Spectrum,
    shared: usize,
    a_extra: usize,
    b_extra: usize,
) -> Option<AmalgamationInstance> {
    let (a, b) = if shared == 0 {
        (
            random_space(rng, s, a_extra.max(1), "a")?,
            random_space(rng, s, b_extra.max(1), "b")?,
        )
    } else {
        let common = random_space(rng, s, shared, "s")?;
        (
            extend_random(rng, s, &common, a_extra, "a")?,
            extend_random(rng, s, &common, b_extra, "b")?,
        )
    };
    let identification: Vec<(usize, usize)> = (0..shared).map(|i| (i, i)).collect();
    Some(AmalgamationInstance::new(a, b, &identification).expect("shared prefix is isometric"))
}

/// All colorings of `n` points with at most `max_colors` colors, one
/// representative per color permutation (restricted growth strings).
fn canonical_colorings(n: usize, max_colors: usize) -> Vec<Vec<usize>> {
    fn rec(i: usize, used: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == cur.len() {
            out.push(cur.clone());
            return;
        }
        for c in 0..=used.min(max - 1) {
            cur[i] = c;
            rec(i + 1, used.max(c + 1), max, cur, out);
        }
    }
    let mut out = Vec::new();
    let mut cur = vec![0usize; n];
    rec(1, 1, max_colors, &mut cur, &mut out);
    out
}

/// Saturates the core at level 1, then keeps realizing extensions pinned at
/// the minimum positive distance to every member of the largest minimum-gap
/// class until that class reaches `class_target`. Level-1 saturation alone
/// stalls at small classes because growing a class needs an anchor over the
/// whole class at once.
fn grown_min_class_fixture(
    ps: &ProfiledSpectrum,
    base_points: usize,
    class_target: usize,
) -> FiniteMetricSpace {
    let approx = saturate(ps, 1, None, base_points).expect("catalog cores saturate");
    let mut space = approx.space;
    let p = ps.core.min_positive();
    loop {
        let part = space
            .jump_classes(p, &ps.core)
            .expect("min positive is in the core");
        let class = part
            .classes
            .iter()
            .max_by_key(|c| c.len())
            .expect("nonempty space")
            .clone();
        if class.len() >= class_target {
            return space;
        }
        let v = KatetovVector {
            values: vec![p; class.len()],
            base: class,
        };
        space = realize_extension(&space, &v, &ps.core).expect("clique extension realizes");
    }
}

fn real_triangle(a: Rational, b: Rational, c: Rational) -> bool {
    a + b >= c && b + c >= a && a + c >= b
}

fn assert_associativity_matches_four_values(s: &Spectrum) {
    let elems = s.elements();
    for &a in elems {
        for &b in elems {
            assert_eq!(s.oplus(a, b), s.oplus(b, a), "commutativity on {a}, {b}");
            for &c in elems {
                if b <= c {
                    assert!(
                        s.oplus(a, b) <= s.oplus(a, c),
                        "monotonicity on {a}: {b} <= {c}"
                    );
                }
            }
        }
    }
    let associative = elems.iter().all(|&a| {
        elems.iter().all(|&b| {
            elems
                .iter()
                .all(|&c| s.oplus(s.oplus(a, b), c) == s.oplus(a, s.oplus(b, c)))
        })
    });
    let holds = matches!(s.four_values(), FourValuesVerdict::Holds);
    assert_eq!(
        associative, holds,
        "associativity must coincide with the four-values condition on {:?}",
        elems
    );
}

#[test]
fn criterion_01_oplus_commutative_monotone_associative() {
    let start = Instant::now();
    let cores = exhaustive_cores(12, 8);
    for s in &cores {
        assert_associativity_matches_four_values(s);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for _ in 0..1000 {
        assert_associativity_matches_four_values(&random_rational_core(&mut rng));
    }
    assert!(
        start.elapsed().as_secs() < 60,
        "criterion carries a one minute budget"
    );
    println!(
        "criterion 01: pass - oplus commutative and monotone on {} exhaustive plus 1000 random cores; associativity coincides with four-values",
        cores.len()
    );
}

#[test]
fn criterion_02_triangle_test_equivalence() {
    let cores = exhaustive_cores(12, 8);
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let random: Vec<Spectrum> = (0..1000).map(|_| random_rational_core(&mut rng)).collect();
    let mut triples = 0u64;
    for s in cores.iter().chain(random.iter()) {
        let elems = s.elements();
        for &a in elems {
            for &b in elems {
                for &c in elems {
                    assert_eq!(
                        s.is_metric_triangle(a, b, c),
                        real_triangle(a, b, c),
                        "triangle tests disagree on ({a}, {b}, {c})"
                    );
                    triples += 1;
                }
            }
        }
    }
    println!("criterion 02: pass - oplus triangle test equals the real one on {triples} triples");
}

#[test]
fn criterion_03_four_values_governs_amalgamation() {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let mut holding = 0usize;
    let mut failing = 0usize;
    for s in exhaustive_cores(6, 5) {
        if s.positives().is_empty() {
            continue;
        }
        match s.four_values() {
            FourValuesVerdict::Holds => {
                holding += 1;
                for _ in 0..200 {
                    let shared = rng.gen_range(0..=2usize);
                    let a_extra = rng.gen_range(1..=(5 - shared));
                    let b_extra = rng.gen_range(1..=(5 - shared));
                    let Some(instance) = random_instance(&mut rng, &s, shared, a_extra, b_extra)
                    else {
                        continue;
                    };
                    let result = amalgamate_search(&instance, &s, 2_000_000);
                    assert!(
                        result.is_ok(),
                        "a four-values core refused an instance: {:?} over {:?}",
                        result.err(),
                        s.elements()
                    );
                }
            }
            FourValuesVerdict::Fails(w) => {
                failing += 1;
                let a = FiniteMetricSpace::from_pairs(
                    vec!["x".into(), "y".into(), "u".into()],
                    &[
                        (0, 1, w.shared_edge),
                        (0, 2, w.first_triangle.0),
                        (1, 2, w.first_triangle.1),
                    ],
                )
                .expect("the witness triangle is metric");
                let b = FiniteMetricSpace::from_pairs(
                    vec!["x".into(), "y".into(), "v".into()],
                    &[
                        (0, 1, w.shared_edge),
                        (0, 2, w.second_triangle.0),
                        (1, 2, w.second_triangle.1),
                    ],
                )
                .expect("the witness triangle is metric");
                let instance =
                    AmalgamationInstance::new(a, b, &[(0, 0), (1, 1)]).expect("shared edge agrees");
                match amalgamate_search(&instance, &s, 2_000_000) {
                    Err(AmalgamError::Unamalgamable { .. }) => {}
                    other => panic!(
                        "the recorded witness must be unamalgamable over {:?}, got {other:?}",
                        s.elements()
                    ),
                }
            }
        }
    }
    assert!(holding > 0 && failing > 0, "both verdicts must occur");
    println!(
        "criterion 03: pass - search succeeded on 200 instances for each of {holding} four-values cores; witnesses refuted all {failing} failing cores"
    );
}

#[test]
fn criterion_04_search_never_exceeds_oplus_amalgam() {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let cores: Vec<Spectrum> = exhaustive_cores(6, 5)
        .into_iter()
        .filter(|s| {
            !s.positives().is_empty() && matches!(s.four_values(), FourValuesVerdict::Holds)
        })
        .collect();
    let mut checked = 0usize;
    while checked < 500 {
        let s = &cores[rng.gen_range(0..cores.len())];
        let shared = rng.gen_range(1..=2usize);
        let a_extra = rng.gen_range(1..=3usize);
        let b_extra = rng.gen_range(1..=3usize);
        let Some(instance) = random_instance(&mut rng, s, shared, a_extra, b_extra) else {
            continue;
        };
        let search = amalgamate_search(&instance, s, 2_000_000).expect("four-values amalgamates");
        let oplus = amalgamate_oplus(&instance, s).expect("nonempty common part");
        let upper: BTreeMap<(usize, usize), Rational> = oplus
            .new_distances
            .iter()
            .map(|nd| ((nd.a, nd.b), nd.value))
            .collect();
        for nd in &search.new_distances {
            let bound = upper[&(nd.a, nd.b)];
            assert!(
                nd.value <= bound,
                "search assigned {} above the oplus amalgam {} on {:?}",
                nd.value,
                bound,
                (nd.a, nd.b)
            );
        }
        checked += 1;
    }
    println!("criterion 04: pass - 500 search completions stayed pointwise under the oplus amalgam");
}

#[test]
fn criterion_05_bounded_amalgamation_respects_floor() {
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    let cores: Vec<Spectrum> = exhaustive_cores(6, 5)
        .into_iter()
        .filter(|s| {
            !s.positives().is_empty() && matches!(s.four_values(), FourValuesVerdict::Holds)
        })
        .collect();
    let mut checked = 0usize;
    while checked < 500 {
        let s = &cores[rng.gen_range(0..cores.len())];
        let shared = rng.gen_range(1..=2usize);
        let a_extra = rng.gen_range(1..=3usize);
        let b_extra = rng.gen_range(1..=3usize);
        let Some(instance) = random_instance(&mut rng, s, shared, a_extra, b_extra) else {
            continue;
        };
        // The lift hypothesis: the floor may not exceed any route from one
        // side to the other through a shared point.
        let a_only: Vec<usize> = (shared..instance.a().len()).collect();
        let b_only: Vec<usize> = (shared..instance.b().len()).collect();
        let mut hypothesis_cap: Option<Rational> = None;
        for &i in &a_only {
            for &j in &b_only {
                for x in 0..shared {
                    let route = instance.a().dist(i, x) + instance.b().dist(x, j);
                    hypothesis_cap = Some(match hypothesis_cap {
                        Some(m) if m <= route => m,
                        _ => route,
                    });
                }
            }
        }
        let cap = hypothesis_cap.expect("both sides have proper points");
        let Some(floor) = s.floor_element(cap).filter(|f| f.is_positive()) else {
            continue;
        };
        let result =
            amalgamate_bounded(&instance, s, floor, 2_000_000).expect("hypothesis satisfied");
        let m = &result.space;
        for i in 0..m.len() {
            for j in (i + 1)..m.len() {
                assert!(s.contains(m.dist(i, j)), "distance left the core");
                for k in 0..m.len() {
                    assert!(
                        real_triangle(m.dist(i, j), m.dist(j, k), m.dist(i, k)),
                        "triangle broken in the bounded amalgam"
                    );
                }
            }
        }
        for &i in &a_only {
            for &j in &b_only {
                let d = m.dist(result.a_indices[i], result.b_indices[j]);
                assert!(
                    d >= floor,
                    "cross distance {d} fell below the floor {floor}"
                );
            }
        }
        checked += 1;
    }
    println!("criterion 05: pass - 500 bounded amalgams were metric, in-core, and floored on cross pairs");
}

#[test]
fn criterion_06_consecutive_pairs_have_initial_covers() {
    let mut cores = 0usize;
    let mut pairs = 0usize;
    for s in exhaustive_cores(9, 6) {
        if !matches!(s.four_values(), FourValuesVerdict::Holds) {
            continue;
        }
        cores += 1;
        let pos = s.positives();
        for w in pos.windows(2) {
            let (r, t) = (w[0], w[1]);
            if r.doubled() < t {
                continue;
            }
            let c = s
                .cover(r, t)
                .unwrap_or_else(|e| panic!("cover({r}, {t}) failed: {e}"));
            assert!(
                s.is_initial(c),
                "cover({r}, {t}) = {c} is not initial in {:?}",
                s.elements()
            );
            pairs += 1;
        }
    }
    assert!(pairs > 0, "the corpus must contain close consecutive pairs");
    println!("criterion 06: pass - {pairs} close consecutive pairs across {cores} four-values cores all have initial covers");
}

#[test]
fn criterion_07_crab_rigidity() {
    for (heft, expected_order) in [(5usize, 111usize), (6, 175)] {
        let legs: Vec<usize> = (1..=heft + 1).collect();
        let spider = build_spider(&legs).expect("legs 1..=heft+1 build a spider");
        let crab = build_crab(heft, &spider).expect("heft at least 5 builds");
        assert_eq!(crab.order(), expected_order, "vertex count of heft {heft}");
        let start = Instant::now();
        let report = graph_automorphism_group(&crab.graph, &SearchBudget::default())
            .expect("search fits the default budget");
        assert_eq!(report.order, 1, "crab of heft {heft} must be rigid");
        assert!(start.elapsed().as_secs() < 60, "sixty second budget");
    }
    println!("criterion 07: pass - crabs of heft 5 (111 vertices) and 6 (175 vertices) are rigid");
}

#[test]
fn criterion_08_crab_nest_rigidity() {
    let start = Instant::now();
    for hefts in [vec![5usize, 8], vec![5, 8, 11]] {
        let nest = build_crab_nest(&hefts, true).expect("distinct hefts build");
        let report = graph_automorphism_group(&nest.graph, &SearchBudget::default())
            .expect("search fits the default budget");
        assert_eq!(
            report.order, 1,
            "nest with hefts {hefts:?} ({} vertices) must be rigid",
            nest.graph.order()
        );
    }
    assert!(start.elapsed().as_secs() < 300, "five minute budget");
    println!("criterion 08: pass - nests with hefts (5,8) and (5,8,11) are rigid");
}

#[test]
fn criterion_09_distinguishing_fixtures() {
    let budget = SearchBudget::default();

    let mut pairs = Vec::new();
    for i in 0..5usize {
        for j in (i + 1)..5 {
            let step = if j - i == 1 || j - i == 4 { 1 } else { 2 };
            pairs.push((i, j, qi(step)));
        }
    }
    let c5 = FiniteMetricSpace::from_pairs(
        (0..5).map(|i| format!("c{i}")).collect(),
        &pairs,
    )
    .expect("the pentagon path metric is a metric");
    match space_distinguishing_number(&c5, 5, &budget).expect("five points fit any budget") {
        DistinguishingOutcome::Exact { number, .. } => assert_eq!(number, 3, "pentagon"),
        other => panic!("pentagon search did not finish: {other:?}"),
    }

    for n in 2..=6usize {
        let mut pairs = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                pairs.push((i, j, qi(1)));
            }
        }
        let clique =
            FiniteMetricSpace::from_pairs((0..n).map(|i| format!("k{i}")).collect(), &pairs)
                .expect("unit clique");
        match space_distinguishing_number(&clique, 7, &budget).expect("small search") {
            DistinguishingOutcome::Exact { number, .. } => {
                assert_eq!(number, n, "unit clique on {n} points needs every color")
            }
            other => panic!("clique search did not finish: {other:?}"),
        }
    }

    let first = build_rigid_tree(7, &[], &budget).expect("rigid trees exist from 7 vertices");
    let second =
        build_rigid_tree(7, std::slice::from_ref(&first), &budget).expect("a second shape exists");
    for tree in [&first, &second] {
        match graph_distinguishing_number(tree, 4, &budget).expect("small search") {
            DistinguishingOutcome::Exact { number, .. } => {
                assert_eq!(number, 1, "a rigid tree is distinguished by one color")
            }
            other => panic!("tree search did not finish: {other:?}"),
        }
    }

    println!("criterion 09: pass - pentagon needs 3 colors, unit cliques need n, rigid trees need 1");
}

#[test]
fn criterion_10_two_coloring_certificates() {
    let runs = [
        ("zero-one-two", 6usize, "bound-below"),
        ("positive-limit", 3, "crab-nest"),
        ("positive-limit-forest", 6, "forest"),
    ];
    let mut summary = Vec::new();
    for (name, seed_points, expected_case) in runs {
        let entry = catalog::lookup(name).expect("catalog name");
        let budget = EngineBudget {
            seed_points,
            ..EngineBudget::default()
        };
        let start = Instant::now();
        let cert = build_two_coloring(&entry.spectrum, &budget)
            .unwrap_or_else(|e| panic!("{name} failed to certify: {e}"));
        assert!(start.elapsed().as_secs() < 600, "ten minute budget");
        assert_eq!(cert.strategy.case_name(), expected_case, "{name} strategy");
        assert!(
            cert.space.space.len() >= 40,
            "{name} stopped at {} points",
            cert.space.space.len()
        );
        let report = audit_certificate(&cert, &SearchBudget::default())
            .unwrap_or_else(|e| panic!("{name} certificate failed its audit: {e}"));
        assert!(report.is_trivial, "{name} left a color-preserving symmetry");
        let colors: BTreeSet<usize> = cert.coloring.iter().copied().collect();
        assert!(colors.len() <= 2, "{name} used more than two colors");
        summary.push(format!("{name} ({} points)", cert.space.space.len()));
    }
    println!(
        "criterion 10: pass - two-coloring certificates audited trivial for {}",
        summary.join(", ")
    );
}

#[test]
fn criterion_11_small_colorings_always_defeated() {
    let mut total = 0usize;
    for name in ["zero-one", "powers-of-three", "geometric:3"] {
        let entry = catalog::lookup(name).expect("catalog name");
        let ps = &entry.spectrum;
        let verdict = distinguishing_verdict(ps).expect("catalog entries classify");
        assert_eq!(verdict.verdict, Verdict::Omega, "{name} must be a defeater case");
        let space = grown_min_class_fixture(ps, 6, 5);
        let p = ps.core.min_positive();
        let part = space.jump_classes(p, &ps.core).expect("p is in the core");
        let largest = part.classes.iter().map(|c| c.len()).max().unwrap_or(0);
        assert!(
            largest >= 5,
            "{name} fixture has no class of five, only {largest}"
        );
        assert!(
            space.len() <= 10,
            "{name} fixture too large for an exhaustive sweep"
        );
        for coloring in canonical_colorings(space.len(), 3) {
            let defeater = match verdict.case {
                VerdictCase::NoLimit => defeat_no_limit(&space, &coloring, ps),
                VerdictCase::ZeroLimit => defeat_zero_limit(&space, &coloring, ps),
                VerdictCase::PositiveLimit => unreachable!("not a defeater case"),
            }
            .unwrap_or_else(|e| {
                panic!("{name} left the coloring {coloring:?} standing: {e}")
            });
            audit_defeater(&space, &defeater)
                .unwrap_or_else(|e| panic!("{name} produced an invalid defeater: {e}"));
            assert!(!defeater.moved.is_empty(), "defeater must move something");
            total += 1;
        }
    }
    println!(
        "criterion 11: pass - all {total} colorings with up to three colors were defeated across the three fixtures"
    );
}

#[test]
fn criterion_12_dense_involution_contract() {
    let entry = catalog::lookup("geometric:3").expect("catalog name");
    let ps = &entry.spectrum;
    let tight = q(1, 9);

    // The constructor works inside one jump class at a time: the space may
    // not exceed the swap distance in diameter, and every partition class
    // must meet every finer jump class.
    let paired = FiniteMetricSpace::from_pairs(
        vec!["a".into(), "b".into(), "c".into(), "d".into()],
        &[
            (0, 1, tight),
            (2, 3, tight),
            (0, 2, qi(1)),
            (0, 3, qi(1)),
            (1, 2, qi(1)),
            (1, 3, qi(1)),
        ],
    )
    .expect("two tight pairs across one unit");

    let mut clique_pairs = Vec::new();
    for i in 0..5usize {
        for j in (i + 1)..5 {
            clique_pairs.push((i, j, tight));
        }
    }
    let clique = FiniteMetricSpace::from_pairs(
        (0..5).map(|i| format!("q{i}")).collect(),
        &clique_pairs,
    )
    .expect("a one-distance clique is a metric");

    match dense_partition_involution(&paired, &[0, 0, 1, 1], qi(1), ps) {
        Err(urysohn::coloring::EngineError::DensityUnmet(_)) => {}
        other => panic!("a class missing a tight pair must be refused, got {other:?}"),
    }

    let fixtures: Vec<(&str, FiniteMetricSpace, Vec<usize>, Rational)> = vec![
        ("pairs joined across", paired, vec![0, 1, 0, 1], qi(1)),
        ("tight clique", clique.clone(), vec![0; clique.len()], tight),
    ];

    for (label, space, partition, step) in fixtures {
        let d = dense_partition_involution(&space, &partition, step, ps)
            .unwrap_or_else(|e| panic!("{label}: construction failed: {e}"));
        let f = &d.automorphism;
        let moved: BTreeSet<usize> = (0..space.len()).filter(|&i| f[i] != i).collect();
        assert!(!moved.is_empty(), "{label}: the involution is trivial");
        for i in 0..space.len() {
            assert_eq!(f[f[i]], i, "{label}: not an involution at {i}");
            assert_eq!(
                partition[f[i]], partition[i],
                "{label}: partition class broken at {i}"
            );
            if moved.contains(&i) {
                assert_eq!(
                    space.dist(i, f[i]),
                    step,
                    "{label}: moved point {i} is off its step"
                );
            } else {
                assert_eq!(f[i], i, "{label}: identity broken off the moved set");
            }
        }
        let reported: BTreeSet<usize> = d
            .moved
            .iter()
            .map(|l| space.index_of(l).expect("moved labels name points"))
            .collect();
        assert_eq!(reported, moved, "{label}: moved list disagrees with the map");
        for i in 0..space.len() {
            for j in (i + 1)..space.len() {
                assert_eq!(
                    space.dist(f[i], f[j]),
                    space.dist(i, j),
                    "{label}: not an isometry on ({i}, {j})"
                );
            }
        }
    }
    println!("criterion 12: pass - dense involutions are isometric involutions, stepped on movers, identity elsewhere, class-preserving");
}

#[test]
fn criterion_13_catalog_verdict_table() {
    let expected: BTreeMap<&str, (Verdict, VerdictCase)> = BTreeMap::from([
        ("zero-one", (Verdict::Omega, VerdictCase::NoLimit)),
        ("zero-one-two", (Verdict::Two, VerdictCase::NoLimit)),
        ("integers:5", (Verdict::Two, VerdictCase::NoLimit)),
        ("powers-of-three", (Verdict::Omega, VerdictCase::NoLimit)),
        ("geometric:6", (Verdict::Omega, VerdictCase::ZeroLimit)),
        ("vanishing-gaps", (Verdict::Two, VerdictCase::ZeroLimit)),
        ("positive-limit", (Verdict::Two, VerdictCase::PositiveLimit)),
        (
            "positive-limit-forest",
            (Verdict::Two, VerdictCase::PositiveLimit),
        ),
    ]);
    let mut by_case: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    let entries = catalog::all_entries();
    assert_eq!(entries.len(), expected.len(), "every entry is covered");
    for entry in &entries {
        let report = distinguishing_verdict(&entry.spectrum)
            .unwrap_or_else(|e| panic!("{} failed to classify: {e}", entry.name));
        let want = expected
            .get(entry.name.as_str())
            .unwrap_or_else(|| panic!("unexpected catalog entry {}", entry.name));
        assert_eq!(
            (report.verdict, report.case),
            *want,
            "verdict table row {}",
            entry.name
        );
        let case = match report.case {
            VerdictCase::PositiveLimit => "positive-limit",
            VerdictCase::ZeroLimit => "zero-limit",
            VerdictCase::NoLimit => "no-limit",
        };
        let verdict = match report.verdict {
            Verdict::Two => "two",
            Verdict::Omega => "omega",
        };
        by_case.entry(case).or_default().insert(verdict);
        if report.verdict == Verdict::Two && report.case == VerdictCase::NoLimit {
            assert!(report.close_pair.is_some(), "{} needs a close pair", entry.name);
        }
    }
    assert_eq!(
        by_case["positive-limit"],
        BTreeSet::from(["two"]),
        "the positive-limit case admits only Two"
    );
    for case in ["zero-limit", "no-limit"] {
        assert_eq!(
            by_case[case],
            BTreeSet::from(["omega", "two"]),
            "the {case} case must show both verdicts"
        );
    }
    println!("criterion 13: pass - all 8 catalog entries match the verdict table with both verdicts in the split cases");
}

#[test]
fn criterion_14_close_points_share_far_distances() {
    let mut rng = ChaCha8Rng::seed_from_u64(114);
    let mut spaces = 0usize;
    let mut triples = 0u64;
    while spaces < 1000 {
        let s = if spaces.is_multiple_of(3) {
            random_rational_core(&mut rng)
        } else {
            let size = rng.gen_range(2..=6usize);
            let mut elems = vec![0i64];
            while elems.len() < size {
                elems.push(rng.gen_range(1..=9i64));
            }
            Spectrum::from_ints(elems).expect("integer core")
        };
        if s.positives().is_empty() {
            continue;
        }
        let n = rng.gen_range(3..=7usize);
        let Some(space) = random_space(&mut rng, &s, n, "g") else {
            continue;
        };
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    if x == y || x == z || y == z {
                        continue;
                    }
                    if space.dist(x, y) < s.gap_at(space.dist(x, z)) {
                        assert_eq!(
                            space.dist(x, z),
                            space.dist(y, z),
                            "gap property broken over {:?}",
                            s.elements()
                        );
                        triples += 1;
                    }
                }
            }
        }
        spaces += 1;
    }
    println!(
        "criterion 14: pass - {triples} close triples across 1000 random spaces agreed on far distances"
    );
}
