//! Boolean-function analysis of graph subpopulations.
//!
//! - [`boolfn`]: truth tables and exact Walsh–Hadamard spectra.
//! - [`circuit`]: attribute circuits that define subpopulations.
//! - [`graph`]: the attributed graph model, CSV ingestion and a synthetic generator.
//! - [`invariants`]: WL-1, biconnectivity, Laplacian polynomial, homomorphism
//!   counts, subset-property tables and canonical forms.
//! - [`subiso`]: function isomorphism under variable permutation and the
//!   graph-isomorphism reduction.
//! - [`gnn`]: a small message-passing network with analytic gradients.
//! - [`fairsbf`]: gate-level fairness losses, metrics, training and audits.

pub mod boolfn;
pub mod circuit;
pub mod fairsbf;
pub mod gnn;
pub mod graph;
pub mod invariants;
pub mod subiso;
