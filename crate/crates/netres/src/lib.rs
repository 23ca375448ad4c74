//! Two-point resistance of finite resistive networks whose nodal conductance
//! matrix (Laplacian) is in general non-symmetric.
//!
//! A resistor-only network has a symmetric Laplacian and its two-point
//! resistance follows from an orthonormal eigenbasis. Once active elements
//! enter — voltage-controlled current sources, or MOS devices modeled at an
//! operating point — the Laplacian loses symmetry and the orthonormal route
//! fails. This crate evaluates the resistance from a biorthogonal pair of
//! left and right eigenvector bases instead, summing
//! `(phi_ia - phi_ib)(psi_ia - psi_ib) / (lambda_i phi_i* psi_i)` over the
//! nonzero modes, and cross-checks every result against an independent
//! direct-solve path.
//!
//! # Pipeline
//!
//! 1. [`netlist`]: parse a SPICE-like netlist (resistors, VCCS, MOS
//!    operating-point models), apply `.short` merges, resolve node indices.
//! 2. [`laplacian`]: stamp elements into the dense conductance matrix and
//!    validate its Kirchhoff structure (zero row/column sums).
//! 3. [`spectral`]: eigendecompose, order the zero mode first, and build the
//!    left basis as the inverse of the right one so that
//!    `phi_i* psi_j = delta_ij` holds even inside repeated eigenspaces.
//! 4. [`resistance`]: evaluate two-point values, the all-pairs matrix, and
//!    the shift-regularized Green's function.
//! 5. [`oracle`]: ground a node, inject current, solve directly, compare.
//!
//! # Example
//!
//! ```
//! use netres::netlist::{apply_merges, parse_netlist};
//! use netres::laplacian::build_laplacian;
//! use netres::spectral::eigendecompose;
//! use netres::resistance::two_point_resistance;
//!
//! let netlist = parse_netlist("R1 a b 100\nR2 b c 50").unwrap();
//! let (merged, map, _) = apply_merges(&netlist).unwrap();
//! let (laplacian, _) = build_laplacian(&merged, &map).unwrap();
//! let spectrum = eigendecompose(&laplacian).unwrap();
//! let r = two_point_resistance(&spectrum, 0, 2).unwrap();
//! assert!((r.value - 150.0).abs() < 1e-9);
//! ```

pub mod cli;
pub mod error;
pub mod laplacian;
pub mod matio;
pub mod netlist;
pub mod oracle;
pub mod report;
pub mod resistance;
pub mod spectral;

#[cfg(test)]
pub(crate) mod test_fixtures;

pub use error::{Error, Result};
pub use laplacian::{build_laplacian, validate, Laplacian, ValidationReport};
pub use netlist::{apply_merges, expand_mos, parse_netlist, Element, Netlist, NodeMap};
pub use oracle::{compare, solve_direct, CompareReport, InjectionProblem};
pub use resistance::{
    all_pairs, greens_function, two_point_resistance, ResistanceMatrix, ResistanceResult,
};
pub use spectral::{eigendecompose, verify_biorthogonality, verify_zero_mode, Spectrum};
