use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::state::{BridgingSet, ElementaryHistory, HistoryState, TimeGrid};
use crate::error::{argument, Result};
use crate::linalg::{dagger, ComplexMatrix, ONE};

/// `K = P_n T(t_n,t_{n−1}) P_{n−1} … P_1 T(t_1,t_0) P_0`, latest projector leftmost.
pub fn chain_operator(h: &ElementaryHistory, b: &BridgingSet) -> Result<ComplexMatrix> {
    h.grid().check_same(b.grid())?;
    let slots = h.slots();
    let mut k = slots[0].clone();
    for (p, t) in slots[1..].iter().zip(b.unitaries()) {
        k = &(p * t) * &k;
    }
    Ok(k)
}

/// `Σ c_α K(H^α)`; the chain operator extended linearly.
pub fn chain_operator_sum(h: &HistoryState, b: &BridgingSet) -> Result<ComplexMatrix> {
    h.grid().check_same(b.grid())?;
    let dims = h.grid().slot_dims();
    let mut acc = ComplexMatrix::zeros(dims[dims.len() - 1], dims[0]);
    for (z, e) in h.terms() {
        acc = &acc + &chain_operator(e, b)?.scale(*z);
    }
    Ok(acc)
}

/// `W = Tr(K† K)`.
pub fn weight(h: &HistoryState, b: &BridgingSet) -> Result<f64> {
    Ok(chain_operator_sum(h, b)?.hs_norm_sqr())
}

/// `D(h1, h2) = Tr(K(h1)† K(h2))`.
pub fn decoherence_functional(
    h1: &HistoryState,
    h2: &HistoryState,
    b: &BridgingSet,
) -> Result<Complex64> {
    h1.grid().check_same(h2.grid())?;
    chain_operator_sum(h1, b)?.hs_inner(&chain_operator_sum(h2, b)?)
}

/// Outcome of a medium-decoherence check over a family of histories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub consistent: bool,
    pub tol: f64,
    pub max_off_diagonal: f64,
    /// Full decoherence matrix `D[i][j] = D(h_i, h_j)`.
    pub decoherence: Vec<Vec<Complex64>>,
}

impl ConsistencyReport {
    /// Weights of the family members, the diagonal of the decoherence matrix.
    pub fn weights(&self) -> Vec<f64> {
        self.decoherence
            .iter()
            .enumerate()
            .map(|(i, row)| row[i].re)
            .collect()
    }
}

/// A family is consistent when `|D(h_i, h_j)| ≤ tol` for every `i ≠ j`.
pub fn is_consistent_family(
    family: &[HistoryState],
    b: &BridgingSet,
    tol: f64,
) -> Result<ConsistencyReport> {
    let chains = family
        .iter()
        .map(|h| chain_operator_sum(h, b))
        .collect::<Result<Vec<_>>>()?;
    let mut decoherence = vec![vec![Complex64::default(); chains.len()]; chains.len()];
    let mut max_off = 0.0f64;
    for (i, ki) in chains.iter().enumerate() {
        for (j, kj) in chains.iter().enumerate() {
            let d = ki.hs_inner(kj)?;
            decoherence[i][j] = d;
            if i != j {
                max_off = max_off.max(d.norm());
            }
        }
    }
    Ok(ConsistencyReport {
        consistent: max_off <= tol,
        tol,
        max_off_diagonal: max_off,
        decoherence,
    })
}

/// Every projector string drawn from one exhaustive projector set per slot.
///
/// `bases[j]` lists the alternatives at slot `j`; they should sum to the
/// identity. Strings are enumerated with the earliest slot varying slowest.
pub fn exhaustive_family(
    grid: &TimeGrid,
    bases: &[Vec<ComplexMatrix>],
) -> Result<Vec<HistoryState>> {
    if bases.len() != grid.len() || bases.iter().any(Vec::is_empty) {
        return Err(argument("need a non-empty projector set for every slot"));
    }
    let mut strings: Vec<Vec<ComplexMatrix>> = vec![Vec::new()];
    for alternatives in bases {
        strings = strings
            .into_iter()
            .flat_map(|prefix| {
                alternatives.iter().map(move |p| {
                    let mut s = prefix.clone();
                    s.push(p.clone());
                    s
                })
            })
            .collect();
    }
    strings
        .into_iter()
        .map(|slots| Ok(ElementaryHistory::projectors(grid.clone(), slots)?.into()))
        .collect()
}

/// Rewrites a history with bridging `T` as an equivalent history with trivial
/// bridging: slot `j` becomes `W_j† P_j W_j` with `W_j = T(t_j, t_0)`.
///
/// The chain operators are related by `K = W_n · K_trivial`, so weights and
/// decoherence functionals are unchanged.
pub fn to_trivial_bridging(
    h: &HistoryState,
    b: &BridgingSet,
) -> Result<(HistoryState, BridgingSet)> {
    h.grid().check_same(b.grid())?;
    let frames = (0..h.grid().len())
        .map(|j| b.between(0, j))
        .collect::<Result<Vec<_>>>()?;
    let rewritten = h.map_slots(|j, p| Ok(&(&dagger(&frames[j]) * p) * &frames[j]))?;
    let trivial = BridgingSet::trivial(h.grid())?;
    Ok((rewritten, trivial))
}

/// `Σ c_i h_i` helper used by tests and scenarios.
#[allow(dead_code)]
pub(crate) fn sum_states(states: &[HistoryState]) -> Result<HistoryState> {
    let parts: Vec<(Complex64, &HistoryState)> = states.iter().map(|h| (ONE, h)).collect();
    HistoryState::combine(&parts)
}
