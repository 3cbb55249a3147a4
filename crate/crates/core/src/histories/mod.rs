//! History states over a time grid.
//!
//! A history is a complex superposition of operator strings, one operator per
//! time slot. Slots are stored earliest-first; [`std::fmt::Display`] renders
//! them latest-first, joined by `⊙`, the usual way of writing
//! `P_n ⊙ … ⊙ P_0`.
//!
//! The space of histories carries the slot-wise Hilbert–Schmidt inner product
//! `(A_n⊙…⊙A_0 | B_n⊙…⊙B_0) = Π_j Tr(A_j† B_j)`, under which operator strings
//! behave like vectors of a tensor product space. Evolution between slots is
//! supplied separately by a [`BridgingSet`].

mod chain;
mod overlap_search;
mod reduce;
mod state;

pub use chain::{
    chain_operator, chain_operator_sum, decoherence_functional, exhaustive_family,
    is_consistent_family, to_trivial_bridging, weight, ConsistencyReport,
};
pub use overlap_search::{
    bell_like_target, overlap_search, OverlapSearchConfig, OverlapSearchReport,
};
pub use reduce::{
    mix, purity, subsystem_trace_out, temporal_partial_trace, MixedHistory, SubsystemReduction,
};
pub use state::{hs_inner, normalize, BridgingSet, ElementaryHistory, HistoryState, TimeGrid};
