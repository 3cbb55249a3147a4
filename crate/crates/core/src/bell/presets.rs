//! Settings that reach the quantum bounds on `I/2` with trivial evolution.
//! The optimizer reproduces these values; see the tests of `optimize`.

use std::f64::consts::FRAC_PI_2;
use std::f64::consts::FRAC_PI_4;
use std::f64::consts::PI;

use super::{CorrelatorSpec, EvaluationMode, MonogamySpec};
use crate::linalg::ComplexMatrix;
use crate::twostate::MeasurementSetting;

fn z() -> MeasurementSetting {
    MeasurementSetting::z()
}

fn x() -> MeasurementSetting {
    MeasurementSetting::x()
}

/// `(Z+X)/√2`.
pub fn zx_plus() -> MeasurementSetting {
    MeasurementSetting::bloch(FRAC_PI_4, 0.0).with_label("(Z+X)/√2")
}

/// `(Z−X)/√2`.
pub fn zx_minus() -> MeasurementSetting {
    MeasurementSetting::bloch(FRAC_PI_4, PI).with_label("(Z-X)/√2")
}

/// A = (Z, X), B = ((Z+X)/√2, (Z−X)/√2).
pub fn tsirelson(initial: ComplexMatrix) -> CorrelatorSpec {
    CorrelatorSpec::new(initial, [z(), x()], [zx_plus(), zx_minus()])
}

/// A = (Z, (Z+X)/√2), B = (Z, (Z−X)/√2); reaches only `1 + √2`.
pub fn paper_quoted(initial: ComplexMatrix) -> CorrelatorSpec {
    CorrelatorSpec::new(initial, [z(), zx_plus()], [z(), zx_minus()])
}

/// A = (Z, X), B = ((Z+X)/√2, (Z−X)/√2), C = (Z, X).
pub fn monogamy(initial: ComplexMatrix, mode: EvaluationMode) -> MonogamySpec {
    MonogamySpec::trivial(
        initial,
        [z(), x()],
        [zx_plus(), zx_minus()],
        [z(), x()],
        mode,
    )
}

/// Setting pairs for the chained loop `A_0, A_1, A_0, …`.
pub fn chained_loop() -> Vec<[MeasurementSetting; 2]> {
    vec![[z(), x()], [zx_plus(), zx_minus()]]
}

/// Bloch angles `(θ, φ)` of the tsirelson preset, in the order A1, A2, B1, B2.
pub fn tsirelson_angles() -> [(f64, f64); 4] {
    [
        (0.0, 0.0),
        (FRAC_PI_2, 0.0),
        (FRAC_PI_4, 0.0),
        (FRAC_PI_4, PI),
    ]
}
