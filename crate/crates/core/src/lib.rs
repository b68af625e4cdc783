//! Bijective plane Cremona transformations over finite fields and the
//! parities of the permutations they induce on rational points.

pub mod finite_field;
pub mod linalg;
pub mod permutations;
pub mod proj_geometry;
pub mod par;
pub mod rational_maps;
pub mod realization;
pub mod linear_parity;
pub mod classical_involutions;
pub mod quintic_scan;
