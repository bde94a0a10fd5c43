//! Finite approximations of countable homogeneous metric spaces.
//!
//! The crate builds finite metric spaces over a prescribed distance spectrum,
//! extends them by amalgamation, attaches rigid graph gadgets, and searches
//! for colorings that break every symmetry. The headline question it
//! mechanizes: given a spectrum, do two colors suffice to distinguish the
//! homogeneous space it generates, or does every finite coloring admit a
//! nontrivial color-preserving automorphism?
//!
//! Module map:
//!
//! * [`rational`]: exact rational arithmetic and its `"p/q"` JSON encoding.
//! * [`spectrum`]: spectrum cores, the truncated addition `⊕`, structural
//!   classification, the four-values test, and the verdict classifier.
//! * [`graph`]: simple graphs with DOT round-trip.
//! * [`space`]: finite metric spaces, distance graphs, jump partitions, and
//!   partial isometry enumeration.
//! * [`amalgam`]: completion of two spaces over a common part by search,
//!   bounded-below search, or the canonical ⊕-formula.
//! * [`gadgets`]: rigid trees, spiders, crabs, and the two-distance metrics
//!   they carry.
//! * [`symmetry`]: automorphism search over graphs and colored spaces.
//! * [`builder`]: Katetov extensions and saturation of approximations.
//! * [`coloring`]: the distinguishing engine; scaffolds, certificates, and
//!   defeaters.
//! * [`catalog`]: named audited spectra to start runs from.

pub mod amalgam;
pub mod builder;
pub mod catalog;
pub mod coloring;
pub mod gadgets;
pub mod graph;
pub mod rational;
pub mod space;
pub mod spectrum;
pub mod symmetry;
