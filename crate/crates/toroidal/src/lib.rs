//! Exact-arithmetic engine for nullity-2 toroidal extended affine Lie algebras.
//!
//! Everything is computed over arbitrary-precision rationals with formal
//! parameters (`mu`, `ell`, `alpha`, `beta`, `c`, ...), so every identity the
//! crate verifies is checked exactly, coefficient by coefficient, with no
//! floating point and no tolerances.
//!
//! The crate is organised bottom-up:
//!
//! ```text
//! src/
//! ├── scalar.rs      sparse multivariate polynomials over BigRational
//! ├── identities.rs  falling-factorial / binomial identity checkers
//! ├── liealg.rs      the bracket engine: loops, 1-forms, derivations
//! ├── formal.rs      windowed delta-function calculus + Laurent series
//! ├── genfun.rs      generating-function relation catalog (square/round)
//! ├── pbw.rs         induced modules with PBW normal ordering
//! ├── fock.rs        Virasoro-affine ⊗ Heisenberg-lattice realization
//! ├── zhu.rs         square-bracket modes and the φ-coordinated calculus
//! └── cli.rs         verification suites, reports, expression calculator
//! ```
//!
//! Each major capability has a runnable example:
//!
//! Bracket engine
//! ```text
//! cargo run -p toroidal --example bracket_calculator
//! cargo run -p toroidal --example closed_form_oracles
//! ```
//!
//! Formal distributions
//! ```text
//! cargo run -p toroidal --example delta_calculus
//! cargo run -p toroidal --example generating_functions
//! cargo run -p toroidal --example falling_factorials
//! ```
//!
//! Modules and realizations
//! ```text
//! cargo run -p toroidal --example vacuum_module
//! cargo run -p toroidal --example loop_modules
//! cargo run -p toroidal --example free_field
//! cargo run -p toroidal --example change_of_coordinates
//! ```
//!
//! Batch verification
//! ```text
//! cargo run -p toroidal --example verify_suite
//! cargo run -p toroidal -- verify --suite identities
//! cargo run -p toroidal -- eval --expr "bracket[dtilde(1,2), dtilde(2,1)]"
//! ```

pub mod scalar;
pub mod identities;
pub mod liealg;
pub mod formal;
pub mod genfun;
pub mod pbw;
pub mod fock;
pub mod zhu;
pub mod cli;
