//! Henstock–Kurzweil–Stieltjes integration on computable compact lines.
//!
//! A compact line is a compact linearly ordered space with minimum `0_K`
//! and maximum `1_K`; four concrete families are provided (finite, real
//! interval, ordinal segments up to `omega * Q + R`, and split/doubled
//! intervals). Integrators are right-continuous functions of bounded
//! variation; integration is by gauge-fine tagged partitions with a
//! deterministic refinement ladder, plus:
//!
//! - variation functions, Jordan decomposition, and the induced interval
//!   measures with the `|mu_G| = mu_{T_G}` identity,
//! - improper (Hake-style) limits at the endpoints with the jump
//!   corrections and converse round-trip checks,
//! - step approximation of regulated functions,
//! - a measurability lab computing the dyadic envelopes `u_n`, `v_n`,
//!   the A/B/C point classification, and difference-quotient
//!   approximations of the integrand from its primitive,
//! - independent brute-force oracles for testing.

pub mod builtins;
pub mod engine;
pub mod error;
pub mod improper;
pub mod integrator;
pub mod lab;
pub mod line;
pub mod oracle;
pub mod quad;
pub mod special;

pub use engine::{
    cousin_partition, integrate, integrate_indicator, is_delta_fine, riemann_sum,
    saks_henstock_deviation, Cell, EngineConfig, Gauge, IntegralResult, TaggedPartition, Verdict,
};
pub use error::{KsError, Result};
pub use improper::{hake_backward, hake_converse_check, hake_forward, HakeConfig, HakeResult};
pub use integrator::{
    accumulator, jordan_decompose, measure_interval, step_approximation,
    total_variation_measure_check, variation_bound_check, variation_on_division, Integrand,
    Integrator, StepFunction,
};
pub use lab::{
    big_u, big_v, classify, convergence_report, f_n_probe, g_derivative_check, u_n, v_n,
    PointClass,
};
pub use line::{IntervalSpec, Line, PointKey, Side};
