//! Quadratic equations over free groups: data model, solvers and reductions.
//!
//! The crate is organized around five layers:
//!
//! * [`words`] — the free monoid with involution: reduction, cyclic words,
//!   substitution.
//! * [`equations`] — quadratic equations, their parser, normalization to
//!   standard form and solution checking.
//! * [`surfaces`] — discs with labeled directed boundary edges, gluing,
//!   orientability and Euler characteristics.
//! * [`certificates`] — the solvability certificate, its polynomial-time
//!   verifier, a bounded certificate search and a brute-force solution
//!   search.
//! * [`reduction`] — bin packing, the equation family it maps onto, ribbon
//!   tilings and the two witness translations.

pub mod certificates;
pub mod equations;
pub mod reduction;
pub mod surfaces;
pub mod words;
