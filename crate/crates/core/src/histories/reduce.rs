//! Mixed histories and the two reductions: tracing out time slots, and tracing
//! out a spatial subsystem across all times.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::chain::{is_consistent_family, ConsistencyReport};
use super::state::{hs_inner, normalize, BridgingSet, ElementaryHistory, HistoryState};
use crate::error::{argument, Error, Result};
use crate::linalg::{dagger, hermitian_eigen, kron, ComplexMatrix, Ket, DEFAULT_TOL, ONE, ZERO};

/// Eigenvalues below this are dropped from reductions.
const SPECTRAL_FLOOR: f64 = 1e-12;

/// Probability-weighted ensemble of normalized history states,
/// `ρ = Σ p_i |H_i)(H_i|`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixedHistory {
    ensemble: Vec<(f64, HistoryState)>,
}

impl MixedHistory {
    pub fn ensemble(&self) -> &[(f64, HistoryState)] {
        &self.ensemble
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.ensemble.iter().map(|(p, _)| *p).collect()
    }

    pub fn grid(&self) -> &super::TimeGrid {
        self.ensemble[0].1.grid()
    }

    /// `(a|ρ|b) = Σ_i p_i (a|H_i)(H_i|b)`.
    pub fn matrix_element(&self, a: &HistoryState, b: &HistoryState) -> Result<Complex64> {
        let mut acc = ZERO;
        for (p, h) in &self.ensemble {
            acc += hs_inner(a, h)? * hs_inner(h, b)? * *p;
        }
        Ok(acc)
    }

    /// `(t|ρ|t)`.
    pub fn overlap(&self, target: &HistoryState) -> Result<f64> {
        Ok(self.matrix_element(target, target)?.re)
    }

    pub fn is_pure(&self, tol: f64) -> bool {
        (purity(self) - 1.0).abs() <= tol
    }
}

impl<'de> Deserialize<'de> for MixedHistory {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Doc {
            ensemble: Vec<(f64, HistoryState)>,
        }
        let doc = Doc::deserialize(d)?;
        mix(doc.ensemble).map_err(serde::de::Error::custom)
    }
}

/// Builds a mixed history; members are normalized, probabilities must be
/// positive and sum to one.
pub fn mix(ensemble: Vec<(f64, HistoryState)>) -> Result<MixedHistory> {
    if ensemble.is_empty() {
        return Err(argument("a mixed history needs at least one member"));
    }
    let total: f64 = ensemble.iter().map(|(p, _)| p).sum();
    if ensemble.iter().any(|(p, _)| !(p.is_finite() && *p > 0.0)) || (total - 1.0).abs() > 1e-9 {
        return Err(argument(format!(
            "probabilities must be positive and sum to 1 (sum = {total})"
        )));
    }
    let grid = ensemble[0].1.grid().clone();
    let members = ensemble
        .into_iter()
        .map(|(p, h)| {
            grid.check_same(h.grid())?;
            Ok((p, normalize(&h)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MixedHistory { ensemble: members })
}

/// `Tr(ρ²) = Σ_ij p_i p_j |(H_i|H_j)|²`.
pub fn purity(m: &MixedHistory) -> f64 {
    let mut acc = 0.0;
    for (pi, hi) in &m.ensemble {
        for (pj, hj) in &m.ensemble {
            acc += pi * pj * hs_inner(hi, hj).map(|z| z.norm_sqr()).unwrap_or(0.0);
        }
    }
    acc
}

/// Traces `|h)(h|` over every slot not in `keep_slots`.
///
/// Each slot space carries the Hilbert–Schmidt inner product, so the history
/// is a vector in a tensor product and the reduction is an ordinary partial
/// trace. The resulting positive operator is returned through its spectral
/// decomposition, with each member written as a combination of the kept
/// parts of the original elementary strings.
pub fn temporal_partial_trace(h: &HistoryState, keep_slots: &[usize]) -> Result<MixedHistory> {
    let n = h.grid().len();
    let mut keep = keep_slots.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if keep.is_empty() || keep.len() >= n || keep.iter().any(|&s| s >= n) {
        return Err(argument(format!(
            "keep set {keep_slots:?} must be a non-empty proper subset of {n} slots"
        )));
    }
    let traced: Vec<usize> = (0..n).filter(|s| !keep.contains(s)).collect();
    let h = normalize(h)?;
    let sub = h.grid().select(&keep)?;

    // Distinct kept strings, and for every term the index of its kept string.
    let mut kept: Vec<ElementaryHistory> = Vec::new();
    let mut owner = Vec::with_capacity(h.terms().len());
    for (_, e) in h.terms() {
        let slots: Vec<ComplexMatrix> = keep.iter().map(|&s| e.slots()[s].clone()).collect();
        let k = ElementaryHistory::new(sub.clone(), slots)?;
        let idx = match kept.iter().position(|x| x.approx_eq(&k, 1e-12)) {
            Some(i) => i,
            None => {
                kept.push(k);
                kept.len() - 1
            }
        };
        owner.push(idx);
    }
    let m = kept.len();

    // ρ = Σ_{s,t} X[s][t] |u_s)(u_t| with X accumulating c_s c̄_t (traced_t|traced_s).
    let mut x = vec![vec![ZERO; m]; m];
    for (s, (cs, es)) in h.terms().iter().enumerate() {
        for (t, (ct, et)) in h.terms().iter().enumerate() {
            let mut g = ONE;
            for &j in &traced {
                g *= et.slots()[j].hs_inner(&es.slots()[j])?;
            }
            x[owner[s]][owner[t]] += cs * ct.conj() * g;
        }
    }

    // Gram matrix of the kept strings and an orthonormal basis e_a = Σ_b R[a][b] u_b.
    let gram: Vec<Vec<Complex64>> = kept
        .iter()
        .map(|a| {
            kept.iter()
                .map(|b| a.hs_inner(b))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let basis = gram_schmidt(&gram);
    let r = basis.len();
    // Q[a][s] = (e_a|u_s)
    let q: Vec<Vec<Complex64>> = basis
        .iter()
        .map(|ra| {
            (0..m)
                .map(|s| (0..m).map(|c| ra[c].conj() * gram[c][s]).sum())
                .collect()
        })
        .collect();
    let mut rho = vec![ZERO; r * r];
    for a in 0..r {
        for b in 0..r {
            let mut acc = ZERO;
            for s in 0..m {
                for t in 0..m {
                    acc += q[a][s] * x[s][t] * q[b][t].conj();
                }
            }
            rho[a * r + b] = acc;
        }
    }
    let rho = ComplexMatrix::new(r, r, rho)?;
    let rho = (&rho + &dagger(&rho)).scale(Complex64::new(0.5, 0.0));

    let mut ensemble = Vec::new();
    for (lambda, v) in hermitian_eigen(&rho)? {
        if lambda <= SPECTRAL_FLOOR {
            continue;
        }
        let coeffs: Vec<Complex64> = (0..m)
            .map(|s| (0..r).map(|a| v[a] * basis[a][s]).sum())
            .collect();
        let terms = coeffs
            .into_iter()
            .zip(&kept)
            .map(|(z, e)| (z, e.clone()))
            .collect();
        ensemble.push((lambda, HistoryState::new(sub.clone(), terms)?));
    }
    let total: f64 = ensemble.iter().map(|(p, _)| p).sum();
    if total <= SPECTRAL_FLOOR {
        return Err(Error::ZeroTotal("reduction has no support".into()));
    }
    mix(ensemble.into_iter().map(|(p, h)| (p / total, h)).collect())
}

/// Modified Gram–Schmidt in the metric `gram`; returns coefficient rows of an
/// orthonormal basis for the span, dropping dependent directions.
fn gram_schmidt(gram: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    let m = gram.len();
    let inner = |a: &[Complex64], b: &[Complex64]| -> Complex64 {
        let mut acc = ZERO;
        for i in 0..m {
            for j in 0..m {
                acc += a[i].conj() * gram[i][j] * b[j];
            }
        }
        acc
    };
    let mut basis: Vec<Vec<Complex64>> = Vec::new();
    for s in 0..m {
        let mut v = vec![ZERO; m];
        v[s] = ONE;
        let scale = gram[s][s].re.max(f64::MIN_POSITIVE);
        for e in &basis {
            let proj = inner(e, &v);
            for i in 0..m {
                v[i] -= proj * e[i];
            }
        }
        let n2 = inner(&v, &v).re;
        if n2 > 1e-20 * scale {
            let n = n2.sqrt();
            basis.push(v.into_iter().map(|z| z / n).collect());
        }
    }
    basis
}

/// Result of tracing a spatial subsystem out of a history across all times.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsystemReduction {
    /// Normalized reduced history of the kept factor.
    pub history: HistoryState,
    /// Induced bridging on the kept factor.
    pub bridging: BridgingSet,
    /// Unnormalized per-branch contributions, one per basis state of the
    /// discarded factor; they sum to the reduced history before normalization.
    pub branches: Vec<HistoryState>,
    /// Consistency of the non-vanishing branches under the induced bridging.
    pub consistency: ConsistencyReport,
}

/// Traces factor `discard` (0 or 1) of a bipartite `dims[0] × dims[1]` system
/// out of every slot while keeping the discarded factor's evolution coherent.
///
/// Bridging operators must be products `U_0 ⊗ U_1`. The discarded factor is
/// followed along branches: branch `k` starts in basis state `|k⟩` at the
/// first slot and is carried forward by the discarded factor's own bridging.
/// Each slot operator `S` contributes its block `⟨b_k| S |b_k⟩` on that branch,
/// and the reduced history is the sum over branches.
pub fn subsystem_trace_out(
    h: &HistoryState,
    b: &BridgingSet,
    dims: [usize; 2],
    discard: usize,
) -> Result<SubsystemReduction> {
    h.grid().check_same(b.grid())?;
    if discard > 1 {
        return Err(argument("discard must index factor 0 or 1"));
    }
    let total = dims[0] * dims[1];
    if h.grid().slot_dims().iter().any(|&d| d != total) {
        return Err(argument(format!(
            "every slot must factor as {}x{}",
            dims[0], dims[1]
        )));
    }
    let keep = 1 - discard;
    let factored = b
        .unitaries()
        .iter()
        .map(|u| factor_product(u, dims))
        .collect::<Result<Vec<_>>>()?;

    let reduced_grid =
        super::TimeGrid::new(h.grid().labels().to_vec(), vec![dims[keep]; h.grid().len()])?;
    let bridging = BridgingSet::new(
        reduced_grid.clone(),
        factored.iter().map(|f| f[keep].clone()).collect(),
    )?;

    let mut branches = Vec::with_capacity(dims[discard]);
    for k in 0..dims[discard] {
        // Branch state of the discarded factor at each slot.
        let mut states = vec![Ket::basis(dims[discard], k)];
        for f in &factored {
            let next = f[discard].apply(states.last().unwrap())?;
            states.push(next);
        }
        let terms = h
            .terms()
            .iter()
            .map(|(z, e)| {
                // Slot scales move into the coefficient so that the slots
                // stay unit-norm operators like `[0]`.
                let mut coeff = *z;
                let mut slots = Vec::with_capacity(states.len());
                for (s, bk) in e.slots().iter().zip(&states) {
                    let blk = branch_block(s, bk, dims, discard)?;
                    let n = blk.hs_norm_sqr().sqrt();
                    if n > 1e-300 {
                        coeff *= n;
                        slots.push(blk.scale(Complex64::new(1.0 / n, 0.0)));
                    } else {
                        coeff = ZERO;
                        slots.push(blk);
                    }
                }
                Ok((coeff, ElementaryHistory::new(reduced_grid.clone(), slots)?))
            })
            .collect::<Result<Vec<_>>>()?;
        branches.push(HistoryState::new(reduced_grid.clone(), terms)?);
    }
    let parts: Vec<(Complex64, &HistoryState)> = branches.iter().map(|h| (ONE, h)).collect();
    let history = normalize(&HistoryState::combine(&parts)?)?;
    let live: Vec<HistoryState> = branches.iter().filter(|h| !h.is_zero()).cloned().collect();
    let consistency = is_consistent_family(&live, &bridging, DEFAULT_TOL)?;
    Ok(SubsystemReduction {
        history,
        bridging,
        branches,
        consistency,
    })
}

/// `(I ⊗ ⟨b|) S (I ⊗ |b⟩)` for `discard = 1`, `(⟨b| ⊗ I) S (|b⟩ ⊗ I)` for `discard = 0`.
fn branch_block(
    s: &ComplexMatrix,
    bk: &Ket,
    dims: [usize; 2],
    discard: usize,
) -> Result<ComplexMatrix> {
    let keep = 1 - discard;
    let (dk, dd) = (dims[keep], dims[discard]);
    let mut out = vec![ZERO; dk * dk];
    let idx = |kept: usize, disc: usize| {
        if discard == 1 {
            kept * dd + disc
        } else {
            disc * dk + kept
        }
    };
    let amps = bk.amplitudes();
    for i in 0..dk {
        for j in 0..dk {
            let mut acc = ZERO;
            for (p, ap) in amps.iter().enumerate() {
                for (q, aq) in amps.iter().enumerate() {
                    acc += ap.conj() * s.get(idx(i, p), idx(j, q)) * aq;
                }
            }
            out[i * dk + j] = acc;
        }
    }
    ComplexMatrix::new(dk, dk, out)
}

/// Splits `u = u_0 ⊗ u_1` with both factors unitary, or reports that the
/// operator is not a product.
fn factor_product(u: &ComplexMatrix, dims: [usize; 2]) -> Result<[ComplexMatrix; 2]> {
    let (d0, d1) = (dims[0], dims[1]);
    // Pick the block of the second factor with the largest weight; it is
    // proportional to u_0.
    let mut best = (0, 0, -1.0);
    for k in 0..d1 {
        for l in 0..d1 {
            let w: f64 = (0..d0)
                .flat_map(|i| (0..d0).map(move |j| (i, j)))
                .map(|(i, j)| u.get(i * d1 + k, j * d1 + l).norm_sqr())
                .sum();
            if w > best.2 + 1e-12 {
                best = (k, l, w);
            }
        }
    }
    let (k0, l0, w) = best;
    let not_product =
        || Error::UnsupportedEvolution("bridging operator is not a product U_A ⊗ U_B".into());
    if w <= 1e-24 {
        return Err(not_product());
    }
    let block: Vec<Complex64> = (0..d0)
        .flat_map(|i| (0..d0).map(move |j| (i, j)))
        .map(|(i, j)| u.get(i * d1 + k0, j * d1 + l0))
        .collect();
    let s = (w / d0 as f64).sqrt();
    let u0 = ComplexMatrix::new(d0, d0, block)?.scale(Complex64::new(1.0 / s, 0.0));
    // u_1[k,l] = Tr((u_0† ⊗ |l⟩⟨k|) u) / d0
    let u0d = dagger(&u0);
    let mut u1 = vec![ZERO; d1 * d1];
    for k in 0..d1 {
        for l in 0..d1 {
            let mut acc = ZERO;
            for i in 0..d0 {
                for j in 0..d0 {
                    acc += u0d.get(j, i) * u.get(i * d1 + k, j * d1 + l);
                }
            }
            u1[k * d1 + l] = acc / d0 as f64;
        }
    }
    let u1 = ComplexMatrix::new(d1, d1, u1)?;
    if !kron(&u0, &u1).approx_eq(u, DEFAULT_TOL)
        || !u0.is_unitary(DEFAULT_TOL)
        || !u1.is_unitary(DEFAULT_TOL)
    {
        return Err(not_product());
    }
    Ok([u0, u1])
}
