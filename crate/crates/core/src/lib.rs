//! Computable lower bounds on the capacity of input-driven finite-state channels.
//!
//! An input-driven finite-state channel (FSC) has a state that evolves
//! deterministically with the input, `s_t = f(s_{t-1}, x_t)`, and an output law
//! `P(y | x, s)` that depends on the current input and the previous state. Its
//! capacity is bounded below by the reverse directed information rate, and that
//! rate can be computed as an average-reward dynamic program.
//!
//! The crate is organized as:
//!
//! - [`channel`]: channel representation, validation, the `(d,k)`-RLL
//!   constructors for binary symmetric and erasure channels, and the JSON
//!   channel file format.
//! - [`dp`]: relative value iteration for the average-reward program and a
//!   Bellman-equation residual checker.
//! - [`closed_form`]: analytical bounds for `(d,k)`-RLL input-constrained BSC
//!   and BEC, plus noiseless constraint capacities.
//! - [`vgraph`]: single-letter bounds from input distributions on V-graphs.
//! - [`oracle`]: exact enumeration of N-letter information quantities,
//!   spectral noiseless capacities and Monte Carlo policy evaluation.
//!
//! All information quantities are in bits.
//!
//! ```rust
//! use fsc_bounds::channel::{make_rll_dmc, Dmc, RllSpec};
//! use fsc_bounds::closed_form::bsc_dinf_bound;
//! use fsc_bounds::dp::{solve_average_reward, SolverOptions};
//!
//! let spec = RllSpec::d_inf(1);
//! let fsc = make_rll_dmc(spec, Dmc::Bsc(0.1)).unwrap();
//! let sol = solve_average_reward(&fsc, &SolverOptions::default()).unwrap();
//! let closed = bsc_dinf_bound(1, 0.1).unwrap();
//! assert!((sol.rho - closed.value).abs() < 1e-6);
//! ```

#![forbid(unsafe_code)]

pub mod channel;
pub mod closed_form;
pub mod dp;
mod error;
pub mod info;
mod markov;
pub mod optim;
pub mod oracle;
pub mod vgraph;

pub use error::{Error, Result};
