//! Named spectra shipped with the crate.
//!
//! Every entry is built through the profile audit and carries its
//! four-values verification result, computed at construction. The shipped
//! entries all pass: classification, coloring runs, and defeaters can start
//! from any of them without re-auditing by hand. Parameterized families
//! take a size suffix, `integers:7` or `geometric:3`; the bare name uses
//! the default size.

use serde::Serialize;

use crate::rational::Rational;
use crate::spectrum::{
    Approach, FourValuesVerdict, ProfileError, ProfiledSpectrum, Spectrum, SpectrumError,
    SpectrumProfile,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CatalogError {
    #[error(
        "no catalog entry named {0:?}; known: zero-one, zero-one-two, integers[:N], \
         powers-of-three, geometric[:N], vanishing-gaps, positive-limit, positive-limit-forest"
    )]
    UnknownName(String),
    #[error("bad size for {name}: {detail}")]
    BadSize { name: String, detail: String },
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
}

/// A named, audited spectrum with its build-time verification result.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CatalogEntry {
    pub name: String,
    pub description: String,
    pub spectrum: ProfiledSpectrum,
    /// Four-values verification, run when the entry was built.
    pub four_values: FourValuesVerdict,
}

fn entry(
    name: String,
    description: &str,
    core: Spectrum,
    profile: SpectrumProfile,
) -> Result<CatalogEntry, CatalogError> {
    let bound = core.max();
    let spectrum = ProfiledSpectrum::new(core, profile, bound)?;
    let four_values = spectrum.core.four_values();
    Ok(CatalogEntry {
        name,
        description: description.to_owned(),
        spectrum,
        four_values,
    })
}

fn third_power(n: u32) -> Rational {
    let mut d = 1i64;
    for _ in 0..n {
        d *= 3;
    }
    Rational::new(1, d)
}

fn zero_one() -> Result<CatalogEntry, CatalogError> {
    entry(
        "zero-one".to_owned(),
        "Distances 0 and 1: the countable complete graph. Its minimum element \
         carries whole classes of interchangeable points, so no finite \
         coloring distinguishes it.",
        Spectrum::from_ints([0, 1])?,
        SpectrumProfile::NoLimit,
    )
}

fn zero_one_two() -> Result<CatalogEntry, CatalogError> {
    entry(
        "zero-one-two".to_owned(),
        "Distances 0, 1, 2: the path metric of the countable random graph. \
         The close pair (1, 2) drives a bound-below tree scaffold.",
        Spectrum::from_ints([0, 1, 2])?,
        SpectrumProfile::NoLimit,
    )
}

fn integers(n: i64) -> Result<CatalogEntry, CatalogError> {
    if !(1..=1000).contains(&n) {
        return Err(CatalogError::BadSize {
            name: "integers".to_owned(),
            detail: format!("{n} is outside 1..=1000"),
        });
    }
    entry(
        format!("integers:{n}"),
        "Distances 0 through N. Two colors suffice as soon as N reaches 2.",
        Spectrum::from_ints(0..=n)?,
        SpectrumProfile::NoLimit,
    )
}

fn powers_of_three() -> Result<CatalogEntry, CatalogError> {
    entry(
        "powers-of-three".to_owned(),
        "Distances 0, 1, 3, 9. Gaps triple, so no pair is close and every \
         finite coloring is defeated by a transposition.",
        Spectrum::from_ints([0, 1, 3, 9])?,
        SpectrumProfile::NoLimit,
    )
}

fn geometric(n: u32) -> Result<CatalogEntry, CatalogError> {
    if !(2..=20).contains(&n) {
        return Err(CatalogError::BadSize {
            name: "geometric".to_owned(),
            detail: format!("{n} is outside 2..=20"),
        });
    }
    let mut elems = vec![Rational::ZERO];
    elems.extend((0..n).map(third_power));
    entry(
        format!("geometric:{n}"),
        "0 together with N distances shrinking by thirds from 1. The zero \
         limit without vanishing gaps at infinity puts it on the Omega side.",
        Spectrum::new(elems)?,
        SpectrumProfile::ZeroLimit {
            vanishing_gaps_at_infinity: false,
        },
    )
}

fn vanishing_gaps() -> Result<CatalogEntry, CatalogError> {
    let mut elems = vec![Rational::from_int(4)];
    for a in 0..=3i64 {
        for b in 0..=3u32 {
            elems.push(Rational::from_int(a) + if b == 0 { Rational::ZERO } else { third_power(b) });
        }
    }
    entry(
        "vanishing-gaps".to_owned(),
        "Each integer below 4 carries companions a third-power step above \
         it. Zero is the limit, yet tight pairs persist at every height, so \
         tree scaffolds work at any scale and two colors suffice. Truncated \
         addition splits into capped integer addition plus a max on the \
         fractional part, which keeps the set four-values clean.",
        Spectrum::new(elems)?,
        SpectrumProfile::ZeroLimit {
            vanishing_gaps_at_infinity: true,
        },
    )
}

fn positive_limit() -> Result<CatalogEntry, CatalogError> {
    let mut elems = vec![Rational::ZERO, Rational::from_int(1)];
    elems.extend((1..=12).map(|n| Rational::new(2 * n + 1, n)));
    entry(
        "positive-limit".to_owned(),
        "0, 1 and the tail 2 + 1/n descending toward 2. Everything below \
         the limit is insular, so the coloring engine builds a crab nest.",
        Spectrum::new(elems)?,
        SpectrumProfile::PositiveLimit {
            limit_value: Rational::from_int(2),
            approach: Approach::FromAbove,
        },
    )
}

fn positive_limit_forest() -> Result<CatalogEntry, CatalogError> {
    let mut elems = vec![
        Rational::ZERO,
        Rational::from_int(1),
        Rational::from_int(2),
    ];
    elems.extend((1..=12).map(|n| Rational::new(4 * n + 1, n)));
    entry(
        "positive-limit-forest".to_owned(),
        "0, 1, 2 and the tail 4 + 1/n descending toward 4. The non-jump \
         element 1 below the limit lets tree scaffolds do the work instead \
         of crabs.",
        Spectrum::new(elems)?,
        SpectrumProfile::PositiveLimit {
            limit_value: Rational::from_int(4),
            approach: Approach::FromAbove,
        },
    )
}

const DEFAULT_INTEGERS: i64 = 5;
const DEFAULT_GEOMETRIC: u32 = 6;

/// Bare names accepted by [`lookup`], parameterized families at their
/// default size.
pub fn known_names() -> Vec<&'static str> {
    vec![
        "zero-one",
        "zero-one-two",
        "integers",
        "powers-of-three",
        "geometric",
        "vanishing-gaps",
        "positive-limit",
        "positive-limit-forest",
    ]
}

/// Every entry at its default size.
pub fn all_entries() -> Vec<CatalogEntry> {
    known_names()
        .into_iter()
        .map(|name| lookup(name).expect("shipped entries always build"))
        .collect()
}

/// Resolves a catalog name, with an optional `:size` suffix for the
/// parameterized families.
pub fn lookup(name: &str) -> Result<CatalogEntry, CatalogError> {
    let (head, size) = match name.split_once(':') {
        Some((head, tail)) => (head, Some(tail)),
        None => (name, None),
    };
    let parse = |family: &str, tail: Option<&str>, default: i64| -> Result<i64, CatalogError> {
        match tail {
            None => Ok(default),
            Some(t) => t.parse().map_err(|_| CatalogError::BadSize {
                name: family.to_owned(),
                detail: format!("{t:?} is not an integer"),
            }),
        }
    };
    match head {
        "integers" => integers(parse("integers", size, DEFAULT_INTEGERS)?),
        "geometric" => {
            let n = parse("geometric", size, i64::from(DEFAULT_GEOMETRIC))?;
            let n = u32::try_from(n).map_err(|_| CatalogError::BadSize {
                name: "geometric".to_owned(),
                detail: format!("{n} is negative"),
            })?;
            geometric(n)
        }
        _ if size.is_some() => Err(CatalogError::BadSize {
            name: head.to_owned(),
            detail: "this entry takes no size".to_owned(),
        }),
        "zero-one" => zero_one(),
        "zero-one-two" => zero_one_two(),
        "powers-of-three" => powers_of_three(),
        "vanishing-gaps" => vanishing_gaps(),
        "positive-limit" => positive_limit(),
        "positive-limit-forest" => positive_limit_forest(),
        _ => Err(CatalogError::UnknownName(name.to_owned())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{distinguishing_verdict, Verdict, VerdictCase};

    #[test]
    fn every_shipped_entry_is_four_values_clean() {
        for e in all_entries() {
            assert!(
                e.four_values.holds(),
                "{} fails four-values: {:?}",
                e.name,
                e.four_values
            );
        }
    }

    #[test]
    fn verdict_table_over_the_catalog() {
        let expect = [
            ("zero-one", Verdict::Omega, VerdictCase::NoLimit),
            ("zero-one-two", Verdict::Two, VerdictCase::NoLimit),
            ("integers", Verdict::Two, VerdictCase::NoLimit),
            ("powers-of-three", Verdict::Omega, VerdictCase::NoLimit),
            ("geometric", Verdict::Omega, VerdictCase::ZeroLimit),
            ("vanishing-gaps", Verdict::Two, VerdictCase::ZeroLimit),
            ("positive-limit", Verdict::Two, VerdictCase::PositiveLimit),
            (
                "positive-limit-forest",
                Verdict::Two,
                VerdictCase::PositiveLimit,
            ),
        ];
        for (name, verdict, case) in expect {
            let e = lookup(name).unwrap();
            let report = distinguishing_verdict(&e.spectrum).unwrap();
            assert_eq!(report.verdict, verdict, "{name}");
            assert_eq!(report.case, case, "{name}");
        }
    }

    #[test]
    fn close_pairs_reported_where_they_drive_the_verdict() {
        let e = lookup("integers:3").unwrap();
        let report = distinguishing_verdict(&e.spectrum).unwrap();
        assert_eq!(
            report.close_pair,
            Some((Rational::from_int(1), Rational::from_int(2)))
        );
    }

    #[test]
    fn sizes_parameterize_the_families() {
        assert_eq!(lookup("integers:7").unwrap().spectrum.core.len(), 8);
        let g = lookup("geometric:3").unwrap();
        let elems: Vec<String> = g
            .spectrum
            .core
            .elements()
            .iter()
            .map(|r| r.to_string())
            .collect();
        assert_eq!(elems, vec!["0", "1/9", "1/3", "1"]);
        assert_eq!(
            lookup("integers").unwrap().spectrum.core.max(),
            Rational::from_int(DEFAULT_INTEGERS)
        );
    }

    #[test]
    fn bad_names_and_sizes_are_rejected() {
        assert!(matches!(
            lookup("nonesuch"),
            Err(CatalogError::UnknownName(_))
        ));
        assert!(matches!(
            lookup("integers:zero"),
            Err(CatalogError::BadSize { .. })
        ));
        assert!(matches!(
            lookup("integers:0"),
            Err(CatalogError::BadSize { .. })
        ));
        assert!(matches!(
            lookup("zero-one:3"),
            Err(CatalogError::BadSize { .. })
        ));
        assert!(matches!(
            lookup("geometric:1"),
            Err(CatalogError::BadSize { .. })
        ));
    }

    /// The literal union of thirds and integer companions misses mixed sums
    /// like 1 + 1/9 and fails the four-values test; the shipped
    /// vanishing-gaps entry is its closure under those sums.
    #[test]
    fn naive_vanishing_sketch_fails_four_values() {
        let mut elems = vec![Rational::ZERO];
        elems.extend((1..=4).map(third_power));
        for k in 1..=4i64 {
            elems.push(Rational::from_int(k));
            elems.push(Rational::from_int(k) + third_power(k as u32));
        }
        let naive = Spectrum::new(elems).unwrap();
        assert!(!naive.four_values().holds());
    }
}
