//! Linear functionals of correlators and their deterministic (macrorealist) maxima.

use serde::{Deserialize, Serialize};

/// `Σ_t coeff_t · Π_{(party, setting) ∈ t} o(party, setting)` over dichotomic
/// outcomes `o ∈ {±1}`, two settings per party.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearFunctional {
    pub parties: usize,
    pub terms: Vec<(f64, Vec<(usize, usize)>)>,
}

impl LinearFunctional {
    /// Two parties; `coeffs[i][j]` multiplies `⟨A_i B_j⟩`.
    pub fn two_party(coeffs: [[f64; 2]; 2]) -> Self {
        let mut terms = Vec::new();
        for (i, row) in coeffs.iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                terms.push((*c, vec![(0, i), (1, j)]));
            }
        }
        LinearFunctional { parties: 2, terms }
    }

    pub fn chsh() -> Self {
        Self::two_party([[1.0, 1.0], [1.0, -1.0]])
    }

    fn chsh_block(first: usize, second: usize) -> Vec<(f64, Vec<(usize, usize)>)> {
        let sign = [[1.0, 1.0], [1.0, -1.0]];
        let mut out = Vec::new();
        for i in 0..2 {
            for j in 0..2 {
                out.push((sign[i][j], vec![(first, i), (second, j)]));
            }
        }
        out
    }

    /// `Σ_{i<n} B(A_i, A_{i+1})` over parties `A_0 … A_n`.
    pub fn chained(n: usize) -> Self {
        let terms = (0..n).flat_map(|i| Self::chsh_block(i, i + 1)).collect();
        LinearFunctional {
            parties: n + 1,
            terms,
        }
    }

    /// `S_AB + S_BC` over parties A, B, C.
    pub fn monogamy() -> Self {
        let mut terms = Self::chsh_block(0, 1);
        terms.extend(Self::chsh_block(1, 2));
        LinearFunctional { parties: 3, terms }
    }

    /// Value at a deterministic assignment; bit `2·party + setting` set means outcome −1.
    pub fn evaluate(&self, assignment: u64) -> f64 {
        self.terms
            .iter()
            .map(|(c, factors)| {
                let odd = factors
                    .iter()
                    .filter(|(p, s)| assignment >> (2 * p + s) & 1 == 1)
                    .count();
                if odd % 2 == 0 {
                    *c
                } else {
                    -c
                }
            })
            .sum()
    }
}

/// Maximum over all `2^(2·parties)` deterministic outcome assignments.
pub fn classical_bound_bruteforce(f: &LinearFunctional) -> f64 {
    assert!(
        f.parties <= 26,
        "too many parties for exhaustive enumeration"
    );
    (0..1u64 << (2 * f.parties))
        .map(|a| f.evaluate(a))
        .fold(f64::NEG_INFINITY, f64::max)
}
