//! Seeded generators of random descriptor plants, used by the property
//! suites and benches.

use rand::Rng;

use crate::model::{check_causal_controllability, DescriptorPlant, Mat, UncertainPlant, UncertaintyFactors};

pub fn matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize, scale: f64) -> Mat {
    Mat::from_fn(rows, cols, |_, _| scale * rng.gen_range(-1.0..1.0))
}

/// Random matrix with singular values in `[lo, hi]`.
pub fn well_conditioned<R: Rng>(rng: &mut R, n: usize, lo: f64, hi: f64) -> Mat {
    let u = matrix(rng, n, n, 1.0).qr().q();
    let v = matrix(rng, n, n, 1.0).qr().q();
    let d = Mat::from_diagonal(&nalgebra::DVector::from_fn(n, |_, _| rng.gen_range(lo..hi)));
    u * d * v.transpose()
}

/// Matrix with spectral radius `rho`.
pub fn with_spectral_radius<R: Rng>(rng: &mut R, n: usize, rho: f64) -> Mat {
    let m = matrix(rng, n, n, 1.0);
    let r = m.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max);
    if r > 0.0 {
        m * (rho / r)
    } else {
        m
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Dims {
    pub n: usize,
    pub r: usize,
    pub m: usize,
    pub q: usize,
    pub p: usize,
}

impl Dims {
    pub fn random<R: Rng>(rng: &mut R, max_n: usize) -> Self {
        let n = rng.gen_range(2..=max_n.max(2));
        Self {
            n,
            r: rng.gen_range(1..n),
            m: rng.gen_range(1..=2),
            q: rng.gen_range(1..=2),
            p: rng.gen_range(1..=2),
        }
    }
}

/// Hides a canonical-form plant behind random well-conditioned transforms:
/// `E = W⁻¹ diag(I, 0) V⁻¹`, `A = W⁻¹ A_c V⁻¹`, `B = W⁻¹ B_c`, `C = C_c V⁻¹`.
fn disguise<R: Rng>(
    rng: &mut R,
    d: Dims,
    ac: Mat,
    bwc: Mat,
    buc: Mat,
    cc: Mat,
    dw: Mat,
) -> (DescriptorPlant, Mat, Mat) {
    let w = well_conditioned(rng, d.n, 0.5, 2.0);
    let v = well_conditioned(rng, d.n, 0.5, 2.0);
    let wi = w.clone().try_inverse().expect("well conditioned");
    let vi = v.clone().try_inverse().expect("well conditioned");
    let mut ec = Mat::zeros(d.n, d.n);
    for i in 0..d.r {
        ec[(i, i)] = 1.0;
    }
    let plant = DescriptorPlant::new(&wi * ec * &vi, &wi * ac * &vi, &wi * bwc, &wi * buc, cc * &vi, dw)
        .expect("consistent dimensions");
    (plant, wi, vi)
}

/// Admissible plant: causal (`A22` well conditioned) and stable with
/// spectral radius below `rho`.
pub fn admissible_plant<R: Rng>(rng: &mut R, d: Dims, rho: f64) -> DescriptorPlant {
    let nr = d.n - d.r;
    let a22 = well_conditioned(rng, nr, 0.5, 2.0);
    let a12 = matrix(rng, d.r, nr, 0.5);
    let a21 = matrix(rng, nr, d.r, 0.5);
    // Pick A11 so that the reduced matrix A11 − A12 A22⁻¹ A21 has radius rho.
    let target = rng.gen_range(0.1..rho);
    let reduced = with_spectral_radius(rng, d.r, target);
    let a11 = &reduced + &a12 * a22.clone().try_inverse().unwrap() * &a21;
    let mut ac = Mat::zeros(d.n, d.n);
    ac.view_mut((0, 0), (d.r, d.r)).copy_from(&a11);
    ac.view_mut((0, d.r), (d.r, nr)).copy_from(&a12);
    ac.view_mut((d.r, 0), (nr, d.r)).copy_from(&a21);
    ac.view_mut((d.r, d.r), (nr, nr)).copy_from(&a22);
    let bw = matrix(rng, d.n, d.q, 1.0);
    let bu = matrix(rng, d.n, d.m, 1.0);
    let c = matrix(rng, d.p, d.n, 1.0);
    let dw = matrix(rng, d.p, d.q, 0.3);
    disguise(rng, d, ac, bw, bu, c, dw).0
}

/// Causally controllable plant with scalar uncertainty (`s = 1`) in every
/// factor pair; the open loop may be unstable and non-causal.
pub fn uncertain_plant<R: Rng>(rng: &mut R, d: Dims, factor_scale: f64) -> UncertainPlant {
    loop {
        let ac = matrix(rng, d.n, d.n, 1.0);
        let bw = matrix(rng, d.n, d.q, 1.0);
        let bu = matrix(rng, d.n, d.m, 1.0);
        let c = matrix(rng, d.p, d.n, 1.0);
        let dw = matrix(rng, d.p, d.q, 0.3);
        let (plant, wi, vi) = disguise(rng, d, ac, bw, bu, c, dw);
        if !check_causal_controllability(&plant.e, &plant.a, &plant.bu) {
            continue;
        }
        let f = UncertaintyFactors {
            ma: Some(&wi * matrix(rng, d.n, 1, factor_scale)),
            na: Some(matrix(rng, 1, d.n, factor_scale) * &vi),
            mb: Some(&wi * matrix(rng, d.n, 1, factor_scale)),
            nb: Some(matrix(rng, 1, d.q, factor_scale)),
            mc: Some(matrix(rng, d.p, 1, factor_scale)),
            nc: Some(matrix(rng, 1, d.n, factor_scale) * &vi),
            md: Some(matrix(rng, d.p, 1, factor_scale)),
            nd: Some(matrix(rng, 1, d.q, factor_scale)),
            s: Some(1),
        };
        return UncertainPlant::new(plant, f).expect("consistent factor shapes");
    }
}
