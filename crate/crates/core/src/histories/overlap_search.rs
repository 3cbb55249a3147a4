//! Search for a three-slot qubit history whose two overlapping two-slot
//! reductions are both the Bell-like history `(1/√2)([e0]⊙[e0] + [e1]⊙[e1])`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::reduce::temporal_partial_trace;
use super::state::{ElementaryHistory, HistoryState, TimeGrid};
use crate::error::Result;
use crate::linalg::{ComplexMatrix, Ket};
use crate::optim::{nelder_mead, NelderMeadConfig};

/// `(1/√2)([e0]⊙[e0] + [e1]⊙[e1])` on a two-slot qubit grid.
pub fn bell_like_target(grid: &TimeGrid) -> Result<HistoryState> {
    let e = |k| ComplexMatrix::projector(&Ket::basis(2, k));
    let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    HistoryState::on_grid(grid, vec![(s, vec![e(0), e(0)]), (s, vec![e(1), e(1)])])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OverlapSearchConfig {
    pub starts: usize,
    pub seed: u64,
    pub local: NelderMeadConfig,
    /// Only `[e0]⊙[e0]⊙[e0]` and `[e1]⊙[e1]⊙[e1]` carry coefficients.
    pub matching_only: bool,
}

impl Default for OverlapSearchConfig {
    fn default() -> Self {
        OverlapSearchConfig {
            starts: 48,
            seed: 7,
            local: NelderMeadConfig {
                tol: 1e-13,
                max_evals: 20_000,
                initial_step: 0.5,
            },
            matching_only: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OverlapSearchReport {
    /// Largest `min(overlap_01, overlap_12)` found.
    pub best_value: f64,
    /// Overlaps at the best point, recomputed through `temporal_partial_trace`.
    pub overlaps: [f64; 2],
    /// Coefficients on `[e_i]⊙[e_j]⊙[e_k]`, index `4i + 2j + k` with `i` the earliest slot.
    pub best_coefficients: Vec<Complex64>,
    pub best_history: HistoryState,
    pub starts: usize,
    pub evaluations: usize,
    pub threshold: f64,
    /// True when some state reaches `threshold` on both overlaps.
    pub found: bool,
}

/// Both overlaps for coefficients `c` (not necessarily normalized).
///
/// The elementary strings form an orthonormal set, so keeping slots (0, 1)
/// gives `(t|ρ|t) = ½ Σ_k |c_00k + c_11k|² / Σ|c|²`, and similarly for (1, 2).
fn overlaps_closed_form(c: &[Complex64; 8]) -> [f64; 2] {
    let n: f64 = c.iter().map(|z| z.norm_sqr()).sum();
    if n <= 1e-300 {
        return [0.0, 0.0];
    }
    let idx = |i: usize, j: usize, k: usize| 4 * i + 2 * j + k;
    let ab: f64 = (0..2)
        .map(|k| (c[idx(0, 0, k)] + c[idx(1, 1, k)]).norm_sqr())
        .sum();
    let bc: f64 = (0..2)
        .map(|i| (c[idx(i, 0, 0)] + c[idx(i, 1, 1)]).norm_sqr())
        .sum();
    [0.5 * ab / n, 0.5 * bc / n]
}

fn unpack(x: &[f64], matching_only: bool) -> [Complex64; 8] {
    let mut c = [Complex64::new(0.0, 0.0); 8];
    if matching_only {
        c[0] = Complex64::new(x[0], x[1]);
        c[7] = Complex64::new(x[2], x[3]);
    } else {
        for (k, z) in c.iter_mut().enumerate() {
            *z = Complex64::new(x[2 * k], x[2 * k + 1]);
        }
    }
    c
}

/// History `Σ c_ijk [e_i]⊙[e_j]⊙[e_k]` on a uniform three-slot qubit grid.
pub(crate) fn basis_history(c: &[Complex64; 8]) -> Result<HistoryState> {
    let grid = TimeGrid::uniform(3, 2)?;
    let e = |k| ComplexMatrix::projector(&Ket::basis(2, k));
    let mut terms = Vec::new();
    for (n, z) in c.iter().enumerate() {
        let slots = vec![e(n >> 2), e((n >> 1) & 1), e(n & 1)];
        terms.push((*z, ElementaryHistory::new(grid.clone(), slots)?));
    }
    HistoryState::new(grid, terms)
}

/// Overlaps through the generic temporal partial trace.
pub(crate) fn overlaps_via_reduction(h: &HistoryState) -> Result<[f64; 2]> {
    let mut out = [0.0; 2];
    for (o, keep) in out.iter_mut().zip([[0usize, 1], [1, 2]]) {
        let red = temporal_partial_trace(h, &keep)?;
        let target = bell_like_target(red.grid())?;
        *o = red.overlap(&target)?;
    }
    Ok(out)
}

/// Multistart Nelder–Mead maximization of `min(overlap_01, overlap_12)` over
/// the complex coefficients on the elementary basis.
pub fn overlap_search(cfg: &OverlapSearchConfig) -> Result<OverlapSearchReport> {
    const THRESHOLD: f64 = 1.0 - 1e-6;
    let dim = if cfg.matching_only { 4 } else { 16 };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let starts: Vec<Vec<f64>> = (0..cfg.starts.max(1))
        .map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let runs: Vec<_> = starts
        .par_iter()
        .map(|x0| {
            nelder_mead(
                |x| {
                    let [a, b] = overlaps_closed_form(&unpack(x, cfg.matching_only));
                    -a.min(b)
                },
                x0,
                &cfg.local,
            )
        })
        .collect();
    let evaluations = runs.iter().map(|m| m.evals).sum();
    // First run wins ties so the result does not depend on scheduling.
    let best = runs
        .iter()
        .fold(None::<&crate::optim::Minimum>, |acc, m| match acc {
            Some(a) if a.value <= m.value => Some(a),
            _ => Some(m),
        })
        .expect("at least one start");
    let c = unpack(&best.x, cfg.matching_only);
    let norm = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let c: [Complex64; 8] = c.map(|z| z / norm);
    let history = basis_history(&c)?;
    let overlaps = overlaps_via_reduction(&history)?;
    let best_value = overlaps[0].min(overlaps[1]);
    Ok(OverlapSearchReport {
        best_value,
        overlaps,
        best_coefficients: c.to_vec(),
        best_history: history,
        starts: runs.len(),
        evaluations,
        threshold: THRESHOLD,
        found: best_value >= THRESHOLD,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_matches_reduction() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let c: [Complex64; 8] = std::array::from_fn(|_| {
                Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            });
            let a = overlaps_closed_form(&c);
            let b = overlaps_via_reduction(&basis_history(&c).unwrap()).unwrap();
            assert!(
                (a[0] - b[0]).abs() < 1e-10 && (a[1] - b[1]).abs() < 1e-10,
                "{a:?} {b:?}"
            );
        }
    }

    #[test]
    fn temporal_ghz_reduces_to_half() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut c = [Complex64::new(0.0, 0.0); 8];
        c[0] = Complex64::new(s, 0.0);
        c[7] = Complex64::new(s, 0.0);
        let o = overlaps_via_reduction(&basis_history(&c).unwrap()).unwrap();
        assert!((o[0] - 0.5).abs() < 1e-12 && (o[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn target_is_normalized() {
        let t = bell_like_target(&TimeGrid::uniform(2, 2).unwrap()).unwrap();
        assert!((t.norm_sqr() - 1.0).abs() < 1e-12);
        assert_eq!(
            t.terms()[0].0,
            Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0)
        );
    }

    #[test]
    fn three_quarters_is_reachable() {
        // (c000 + c110)² ≤ (3/2)(c000² + c110² + c011²) once c011 = c110, so
        // 2[000] + [011] + [110] saturates both overlaps at 3/4.
        let mut c = [Complex64::new(0.0, 0.0); 8];
        c[0] = Complex64::new(2.0, 0.0);
        c[3] = Complex64::new(1.0, 0.0);
        c[6] = Complex64::new(1.0, 0.0);
        let o = overlaps_via_reduction(&basis_history(&c).unwrap()).unwrap();
        assert!(
            (o[0] - 0.75).abs() < 1e-12 && (o[1] - 0.75).abs() < 1e-12,
            "{o:?}"
        );
    }

    #[test]
    fn small_search_stays_below_threshold() {
        let cfg = OverlapSearchConfig {
            starts: 6,
            ..OverlapSearchConfig::default()
        };
        let rep = overlap_search(&cfg).unwrap();
        assert!(!rep.found);
        assert!((rep.best_value - 0.75).abs() < 1e-6, "{}", rep.best_value);
    }
}
