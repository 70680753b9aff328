//! The third-order benchmark plant used throughout the tests and the `demo`
//! command, with the two published gains.

use crate::model::{DescriptorPlant, Mat, UncertainPlant, UncertaintyFactors};

/// Reported optimum of the `α = 0` program.
pub const GAMMA_ALPHA0: f64 = 1.9093;
/// Reported optimum of the `α = 1000` program.
pub const GAMMA_ALPHA1000: f64 = 1.1848;

pub fn plant() -> UncertainPlant {
    let e = Mat::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 2.0, 0.0, 1.0]);
    let a = Mat::from_row_slice(3, 3, &[-0.25, 0.0, 0.0, -0.5, 0.5, 2.0, 0.75, -1.0, -1.5]);
    let bu = Mat::from_row_slice(3, 1, &[0.0, 0.0, 1.0]);
    let bw = Mat::from_row_slice(3, 2, &[0.0, 0.0, 0.1, 0.0, 0.2, 0.1]);
    let c = Mat::from_row_slice(1, 3, &[2.0, 2.0, 0.0]);
    let dw = Mat::from_row_slice(1, 2, &[0.01, -0.5]);
    let plant = DescriptorPlant::new(e, a, bw, bu, c, dw).expect("example dimensions");
    UncertainPlant::new(
        plant,
        UncertaintyFactors {
            ma: Some(Mat::from_row_slice(3, 1, &[0.1, -0.1, 0.05])),
            na: Some(Mat::from_row_slice(1, 3, &[0.0, 0.1, 0.1])),
            s: Some(1),
            ..Default::default()
        },
    )
    .expect("example factors")
}

/// Published gain of the `α = 0` design.
pub fn gain_k1() -> Mat {
    Mat::from_row_slice(1, 3, &[0.2055, 1.0702, 1.4786])
}

/// Published gain of the `α = 1000` design.
pub fn gain_k2() -> Mat {
    Mat::from_row_slice(1, 3, &[-0.4887, 1.8633, 4.4607])
}
