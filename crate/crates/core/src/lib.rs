//! Recurrence and transience of random walks in stratified environments.
//!
//! A walk on Z^d × Z moves up with probability p_n, down with q_n and
//! horizontally by k with r_n μ_n(k), all depending only on the level n.
//! The crate computes the vertical sequences, the directional flux
//! functionals, the continued-fraction form of the excursion characteristic
//! function, and the series that decides recurrence.

pub mod cfrac;
pub mod chi;
pub mod criterion;
pub mod environment;
pub mod expansion;
pub mod flux;
pub mod montecarlo;
pub mod sequences;
