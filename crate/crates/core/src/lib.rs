//! Numerical toolkit for contextual, quantum-like probability models.
//!
//! - [`context`]: finite state/context systems and transition kernels
//! - [`bell`]: coincidence tables, expectation values and the CHSH bound
//! - [`structure`]: classical (joint distribution) vs sphere-model fits
//! - [`sphere`] and [`poll`]: the ε-model and the three-question poll
//! - [`liar`] and [`dynamics`]: m-sentence liar chains, their step
//!   permutation and its continuous unitary interpolation

pub mod bell;
pub mod context;
pub mod dynamics;
pub mod fixtures;
pub mod liar;
pub mod lp;
pub mod poll;
pub mod rng;
pub mod sphere;
pub mod structure;
