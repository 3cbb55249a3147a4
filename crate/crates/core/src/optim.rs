//! Derivative-free minimization (Nelder–Mead) used by the settings optimizer
//! and the three-slot reduction search.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NelderMeadConfig {
    /// Stop when the spread of objective values over the simplex falls below this.
    pub tol: f64,
    pub max_evals: usize,
    pub initial_step: f64,
}

impl Default for NelderMeadConfig {
    fn default() -> Self {
        NelderMeadConfig {
            tol: 1e-10,
            max_evals: 10_000,
            initial_step: 0.25,
        }
    }
}

/// One row per simplex iteration: evaluations used so far, best point, best value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub evals: usize,
    pub x: Vec<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
    pub converged: bool,
    pub trace: Vec<TraceRow>,
}

/// Minimizes `f` from `x0` with the dimension-adaptive Nelder–Mead
/// coefficients of Gao and Han.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    cfg: &NelderMeadConfig,
) -> Minimum {
    let n = x0.len();
    let nf = n.max(1) as f64;
    let (alpha, beta, gamma, delta) = (1.0, 1.0 + 2.0 / nf, 0.75 - 0.5 / nf, 1.0 - 1.0 / nf);

    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let v0 = eval(x0, &mut evals);
    simplex.push((x0.to_vec(), v0));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += cfg.initial_step;
        let v = eval(&x, &mut evals);
        simplex.push((x, v));
    }

    let mut trace = Vec::new();
    let mut converged = false;
    let mut iteration = 0;
    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        trace.push(TraceRow {
            iteration,
            evals,
            x: simplex[0].0.clone(),
            value: simplex[0].1,
        });
        if n == 0 || (simplex[n].1 - simplex[0].1).abs() <= cfg.tol {
            converged = true;
            break;
        }
        if evals >= cfg.max_evals {
            break;
        }
        iteration += 1;

        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / nf;
            }
        }
        let along = |t: f64, worst: &[f64]| -> Vec<f64> {
            centroid
                .iter()
                .zip(worst)
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };
        let worst = simplex[n].0.clone();
        let xr = along(alpha, &worst);
        let fr = eval(&xr, &mut evals);
        if fr < simplex[0].1 {
            let xe = along(alpha * beta, &worst);
            let fe = eval(&xe, &mut evals);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < simplex[n].1 {
            let xc = along(alpha * gamma, &worst);
            let fc = eval(&xc, &mut evals);
            (xc, fc)
        } else {
            let xc = along(-gamma, &worst);
            let fc = eval(&xc, &mut evals);
            (xc, fc)
        };
        if fc < fr.min(simplex[n].1) {
            simplex[n] = (xc, fc);
            continue;
        }
        let best = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let x: Vec<f64> = best
                .iter()
                .zip(&vertex.0)
                .map(|(b, v)| b + delta * (v - b))
                .collect();
            let v = eval(&x, &mut evals);
            *vertex = (x, v);
        }
    }
    Minimum {
        x: simplex[0].0.clone(),
        value: simplex[0].1,
        evals,
        converged,
        trace,
    }
}
