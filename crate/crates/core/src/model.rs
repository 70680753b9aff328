//! Descriptor plants, norm-bounded uncertainty structure, the SVD equivalent
//! form and the structural tests built on it (regularity, causality,
//! stability, causal controllability).

use nalgebra::{Complex, DMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Mat = DMatrix<f64>;
pub type CMat = DMatrix<Complex<f64>>;
pub type C64 = Complex<f64>;

/// Singular values below `DEFAULT_RANK_TOL * sigma_max` count as zero.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Radius of the circle the regularity test samples on.
const REGULARITY_RADIUS: f64 = 1.37;

/// `E x(k+1) = A x(k) + Bw w(k) + Bu u(k)`, `y(k) = C x(k) + Dw w(k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DescriptorPlant {
    pub e: Mat,
    pub a: Mat,
    pub bw: Mat,
    pub bu: Mat,
    pub c: Mat,
    pub dw: Mat,
    rank: usize,
}

impl DescriptorPlant {
    pub fn new(e: Mat, a: Mat, bw: Mat, bu: Mat, c: Mat, dw: Mat) -> Result<Self> {
        Self::with_rank_tol(e, a, bw, bu, c, dw, DEFAULT_RANK_TOL)
    }

    pub fn with_rank_tol(e: Mat, a: Mat, bw: Mat, bu: Mat, c: Mat, dw: Mat, tol: f64) -> Result<Self> {
        let n = e.nrows();
        if n == 0 {
            return Err(Error::Dimension("state dimension must be positive".into()));
        }
        check_shape("E", &e, n, n)?;
        check_shape("A", &a, n, n)?;
        if bw.nrows() != n {
            return Err(Error::Dimension(format!("Bw has {} rows, expected {n}", bw.nrows())));
        }
        if bu.nrows() != n {
            return Err(Error::Dimension(format!("Bu has {} rows, expected {n}", bu.nrows())));
        }
        if c.ncols() != n {
            return Err(Error::Dimension(format!("C has {} columns, expected {n}", c.ncols())));
        }
        check_shape("Dw", &dw, c.nrows(), bw.ncols())?;
        let rank = numerical_rank(&e, tol);
        Ok(Self {
            e,
            a,
            bw,
            bu,
            c,
            dw,
            rank,
        })
    }

    pub fn n(&self) -> usize {
        self.e.nrows()
    }
    /// Disturbance dimension.
    pub fn q(&self) -> usize {
        self.bw.ncols()
    }
    /// Control dimension.
    pub fn m(&self) -> usize {
        self.bu.ncols()
    }
    /// Output dimension.
    pub fn p(&self) -> usize {
        self.c.nrows()
    }
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Disturbance-to-output realization `(E, A, Bw, C, Dw)`.
    pub fn realization(&self) -> Realization {
        Realization {
            e: self.e.clone(),
            a: self.a.clone(),
            b: self.bw.clone(),
            c: self.c.clone(),
            d: self.dw.clone(),
        }
    }
}

fn check_shape(name: &str, m: &Mat, rows: usize, cols: usize) -> Result<()> {
    if m.nrows() != rows || m.ncols() != cols {
        return Err(Error::Dimension(format!(
            "{name} is {}x{}, expected {rows}x{cols}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

/// Factor pairs of `A + MA Δ NA`, `Bw + MB Δ NB`, `C + MC Δ NC`, `Dw + MD Δ ND`
/// with a common `s x s` block `Δ`, `‖Δ‖₂ ≤ 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct UncertainPlant {
    pub plant: DescriptorPlant,
    pub ma: Mat,
    pub na: Mat,
    pub mb: Mat,
    pub nb: Mat,
    pub mc: Mat,
    pub nc: Mat,
    pub md: Mat,
    pub nd: Mat,
    s: usize,
}

/// Optional factors; `None` means the corresponding matrix is certain.
#[derive(Clone, Debug, Default)]
pub struct UncertaintyFactors {
    pub ma: Option<Mat>,
    pub na: Option<Mat>,
    pub mb: Option<Mat>,
    pub nb: Option<Mat>,
    pub mc: Option<Mat>,
    pub nc: Option<Mat>,
    pub md: Option<Mat>,
    pub nd: Option<Mat>,
    pub s: Option<usize>,
}

impl UncertainPlant {
    pub fn nominal(plant: DescriptorPlant) -> Self {
        let (n, q, p) = (plant.n(), plant.q(), plant.p());
        Self {
            ma: Mat::zeros(n, 0),
            na: Mat::zeros(0, n),
            mb: Mat::zeros(n, 0),
            nb: Mat::zeros(0, q),
            mc: Mat::zeros(p, 0),
            nc: Mat::zeros(0, n),
            md: Mat::zeros(p, 0),
            nd: Mat::zeros(0, q),
            s: 0,
            plant,
        }
    }

    pub fn new(plant: DescriptorPlant, f: UncertaintyFactors) -> Result<Self> {
        let (n, q, p) = (plant.n(), plant.q(), plant.p());
        let inferred = [
            f.ma.as_ref().map(|m| m.ncols()),
            f.na.as_ref().map(|m| m.nrows()),
            f.mb.as_ref().map(|m| m.ncols()),
            f.nb.as_ref().map(|m| m.nrows()),
            f.mc.as_ref().map(|m| m.ncols()),
            f.nc.as_ref().map(|m| m.nrows()),
            f.md.as_ref().map(|m| m.ncols()),
            f.nd.as_ref().map(|m| m.nrows()),
        ];
        let s = match f.s {
            Some(s) => s,
            None => inferred.iter().flatten().copied().max().unwrap_or(0),
        };
        if let Some(bad) = inferred.iter().flatten().find(|&&d| d != s) {
            return Err(Error::Dimension(format!(
                "uncertainty factor has inner dimension {bad}, expected s = {s}"
            )));
        }
        let take = |m: Option<Mat>, r: usize, c: usize, name: &str| -> Result<Mat> {
            match m {
                Some(m) => {
                    check_shape(name, &m, r, c)?;
                    Ok(m)
                }
                None => Ok(Mat::zeros(r, c)),
            }
        };
        let up = Self {
            ma: take(f.ma, n, s, "MA")?,
            na: take(f.na, s, n, "NA")?,
            mb: take(f.mb, n, s, "MB")?,
            nb: take(f.nb, s, q, "NB")?,
            mc: take(f.mc, p, s, "MC")?,
            nc: take(f.nc, s, n, "NC")?,
            md: take(f.md, p, s, "MD")?,
            nd: take(f.nd, s, q, "ND")?,
            s,
            plant,
        };
        Ok(up)
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn has_uncertainty(&self) -> bool {
        self.s > 0
            && [
                &self.ma, &self.na, &self.mb, &self.nb, &self.mc, &self.nc, &self.md, &self.nd,
            ]
            .iter()
            .any(|m| m.iter().any(|&v| v != 0.0))
    }

    /// True when every factor pair other than `(MA, NA)` has a zero member.
    pub fn uncertain_only_in_a(&self) -> bool {
        let zero = |m: &Mat| m.iter().all(|&v| v == 0.0);
        (zero(&self.mb) || zero(&self.nb)) && (zero(&self.mc) || zero(&self.nc)) && (zero(&self.md) || zero(&self.nd))
    }

    /// The plant obtained for one admissible value of `Δ`.
    pub fn realize(&self, delta: &Mat) -> Result<DescriptorPlant> {
        check_shape("Delta", delta, self.s, self.s)?;
        let p = &self.plant;
        Ok(DescriptorPlant {
            e: p.e.clone(),
            a: &p.a + &self.ma * delta * &self.na,
            bw: &p.bw + &self.mb * delta * &self.nb,
            bu: p.bu.clone(),
            c: &p.c + &self.mc * delta * &self.nc,
            dw: &p.dw + &self.md * delta * &self.nd,
            rank: p.rank,
        })
    }

    /// Replaces `A` by `A + Bu F`; the uncertainty factors are unchanged.
    pub fn closed_loop(&self, gain: &Mat) -> Result<Self> {
        let mut out = self.clone();
        out.plant = closed_loop_plant(&self.plant, gain)?;
        Ok(out)
    }
}

pub fn closed_loop_plant(plant: &DescriptorPlant, gain: &Mat) -> Result<DescriptorPlant> {
    check_shape("F", gain, plant.m(), plant.n())?;
    let mut out = plant.clone();
    out.a = &plant.a + &plant.bu * gain;
    Ok(out)
}

/// `(E, A, B, C, D)` evaluated as `C (zE - A)^{-1} B + D`.
#[derive(Clone, Debug)]
pub struct Realization {
    pub e: Mat,
    pub a: Mat,
    pub b: Mat,
    pub c: Mat,
    pub d: Mat,
}

/// The system in coordinates where `W̄ E V̄ = diag(I_r, 0)`.
#[derive(Clone, Debug)]
pub struct SvdEquivalentForm {
    pub w: Mat,
    pub v: Mat,
    pub r: usize,
    pub a_d: Mat,
    pub bw_d: Mat,
    pub bu_d: Mat,
    pub c_d: Mat,
    pub dw_d: Mat,
    pub ma_d: Mat,
    pub na_d: Mat,
    pub mb_d: Mat,
    pub nb_d: Mat,
    pub mc_d: Mat,
    pub nc_d: Mat,
    pub md: Mat,
    pub nd: Mat,
    pub s: usize,
}

impl SvdEquivalentForm {
    /// Builds the form from the SVD `E = U diag(S, 0) Hᵀ`:
    /// `W̄ = diag(S⁻¹, I) Uᵀ`, `V̄ = H`.
    pub fn new(up: &UncertainPlant, tol: f64) -> Result<Self> {
        let e = &up.plant.e;
        let n = e.nrows();
        let (u, sv, h) = sorted_svd(e)?;
        let smax = sv.first().copied().unwrap_or(0.0);
        let r = sv.iter().filter(|&&s| smax > 0.0 && s > tol * smax).count();
        let mut scale = Mat::identity(n, n);
        for i in 0..r {
            scale[(i, i)] = 1.0 / sv[i];
        }
        let w = scale * u.transpose();
        let f = Self::from_transforms_unchecked(up, w, h, r)?;
        let residual = f.canonical_residual(e);
        if residual > 1e-10 * (1.0 + e.norm()) {
            return Err(Error::Numerical(format!(
                "W E V differs from diag(I_r, 0) by {residual:e}"
            )));
        }
        Ok(f)
    }

    /// Like [`SvdEquivalentForm::new`] but rejects a numerically nonsingular `E`.
    pub fn new_singular(up: &UncertainPlant, tol: f64) -> Result<Self> {
        let f = Self::new(up, tol)?;
        if f.r == f.n() {
            return Err(Error::InvalidInput("E is numerically full rank".into()));
        }
        Ok(f)
    }

    /// Uses caller-supplied nonsingular `W̄`, `V̄`; they must bring `E` to
    /// `diag(I_r, 0)` for some `r`.
    pub fn from_transforms(up: &UncertainPlant, w: Mat, v: Mat) -> Result<Self> {
        let n = up.plant.n();
        check_shape("W", &w, n, n)?;
        check_shape("V", &v, n, n)?;
        let r = up.plant.rank();
        let f = Self::from_transforms_unchecked(up, w, v, r)?;
        let residual = f.canonical_residual(&up.plant.e);
        if residual > 1e-10 * (1.0 + up.plant.e.norm()) {
            return Err(Error::InvalidInput(format!(
                "W E V differs from diag(I_r, 0) by {residual:e}"
            )));
        }
        Ok(f)
    }

    fn from_transforms_unchecked(up: &UncertainPlant, w: Mat, v: Mat, r: usize) -> Result<Self> {
        let p = &up.plant;
        Ok(Self {
            a_d: &w * &p.a * &v,
            bw_d: &w * &p.bw,
            bu_d: &w * &p.bu,
            c_d: &p.c * &v,
            dw_d: p.dw.clone(),
            ma_d: &w * &up.ma,
            na_d: &up.na * &v,
            mb_d: &w * &up.mb,
            nb_d: up.nb.clone(),
            mc_d: up.mc.clone(),
            nc_d: &up.nc * &v,
            md: up.md.clone(),
            nd: up.nd.clone(),
            s: up.s,
            w,
            v,
            r,
        })
    }

    /// `‖W̄ E V̄ − diag(I_r, 0)‖_F`.
    pub fn canonical_residual(&self, e: &Mat) -> f64 {
        (&self.w * e * &self.v - self.e_canonical()).norm()
    }

    pub fn n(&self) -> usize {
        self.a_d.nrows()
    }
    pub fn q(&self) -> usize {
        self.bw_d.ncols()
    }
    pub fn m(&self) -> usize {
        self.bu_d.ncols()
    }
    pub fn p(&self) -> usize {
        self.c_d.nrows()
    }

    pub fn e_canonical(&self) -> Mat {
        let n = self.n();
        let mut e = Mat::zeros(n, n);
        for i in 0..self.r {
            e[(i, i)] = 1.0;
        }
        e
    }

    pub fn a11(&self) -> Mat {
        self.a_d.view((0, 0), (self.r, self.r)).into_owned()
    }
    pub fn a12(&self) -> Mat {
        let (n, r) = (self.n(), self.r);
        self.a_d.view((0, r), (r, n - r)).into_owned()
    }
    pub fn a21(&self) -> Mat {
        let (n, r) = (self.n(), self.r);
        self.a_d.view((r, 0), (n - r, r)).into_owned()
    }
    pub fn a22(&self) -> Mat {
        let (n, r) = (self.n(), self.r);
        self.a_d.view((r, r), (n - r, n - r)).into_owned()
    }

    pub fn realization(&self) -> Realization {
        Realization {
            e: self.e_canonical(),
            a: self.a_d.clone(),
            b: self.bw_d.clone(),
            c: self.c_d.clone(),
            d: self.dw_d.clone(),
        }
    }
}

/// SVD with singular values in decreasing order and a full square `U`, `H`.
/// Full SVD with singular values in decreasing order. nalgebra's singular
/// vectors are unreliable for rank-deficient input, so faer computes them.
fn sorted_svd(m: &Mat) -> Result<(Mat, Vec<f64>, Mat)> {
    let n = m.nrows();
    let fm = faer::Mat::<f64>::from_fn(n, n, |i, j| m[(i, j)]);
    let svd = fm
        .svd()
        .map_err(|e| Error::Numerical(format!("SVD did not converge: {e:?}")))?;
    let (u, s, v) = (svd.U(), svd.S().column_vector(), svd.V());
    let us = Mat::from_fn(n, n, |i, j| u[(i, j)]);
    let hs = Mat::from_fn(n, n, |i, j| v[(i, j)]);
    Ok((us, (0..n).map(|i| s[i]).collect(), hs))
}

/// Count of singular values above `tol * sigma_max`.
pub fn numerical_rank(m: &Mat, tol: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().singular_values();
    let smax = sv.max();
    if smax <= 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * smax).count()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularityCheck {
    pub regular: bool,
    /// `(re, im)` of a point where `λE − A` is nonsingular.
    pub witness: Option<(f64, f64)>,
}

/// Samples `det(λE − A)` on a circle of radius 1.37 plus one seeded point.
/// One nonsingular sample proves regularity.
pub fn check_regularity(e: &Mat, a: &Mat, trials: usize, seed: u64) -> Result<RegularityCheck> {
    let n = e.nrows();
    check_shape("E", e, n, n)?;
    check_shape("A", a, n, n)?;
    let trials = if trials == 0 { n + 2 } else { trials };
    let mut points: Vec<C64> = (0..trials)
        .map(|k| C64::from_polar(REGULARITY_RADIUS, 2.0 * std::f64::consts::PI * k as f64 / trials as f64))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    points.push(C64::from_polar(
        0.5 + 2.0 * rng.gen::<f64>(),
        2.0 * std::f64::consts::PI * rng.gen::<f64>(),
    ));
    let ec = to_complex(e);
    let ac = to_complex(a);
    for lambda in points {
        let pencil = ec.map(|v| v * lambda) - &ac;
        if complex_full_rank(&pencil, DEFAULT_RANK_TOL) {
            return Ok(RegularityCheck {
                regular: true,
                witness: Some((lambda.re, lambda.im)),
            });
        }
    }
    Ok(RegularityCheck {
        regular: false,
        witness: None,
    })
}

fn complex_full_rank(m: &CMat, tol: f64) -> bool {
    let sv = m.clone().singular_values();
    let smax = sv.max();
    smax > 0.0 && sv.min() > tol * smax
}

pub(crate) fn to_complex(m: &Mat) -> CMat {
    m.map(|v| C64::new(v, 0.0))
}

/// Causal iff `A22` of the equivalent form is invertible.
pub fn check_causality(form: &SvdEquivalentForm) -> bool {
    if form.r == form.n() {
        return true;
    }
    let a22 = form.a22();
    numerical_rank(&a22, DEFAULT_RANK_TOL) == a22.nrows()
}

/// Largest modulus over the finite generalized eigenvalues of `(E, A)`;
/// zero when there is none.
///
/// Causal pencils use the reduced matrix `A11 − A12 A22⁻¹ A21`; otherwise the
/// finite spectrum is recovered from a shift-and-invert of the full pencil.
pub fn spectral_radius(form: &SvdEquivalentForm) -> Result<f64> {
    if form.r == 0 {
        return Ok(0.0);
    }
    if check_causality(form) {
        return Ok(max_modulus(&reduced_state_matrix(form)?));
    }
    let eigs = finite_generalized_eigenvalues(&form.e_canonical(), &form.a_d)?;
    Ok(eigs.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// `A11 − A12 A22⁻¹ A21`; only defined for causal forms.
pub fn reduced_state_matrix(form: &SvdEquivalentForm) -> Result<Mat> {
    if form.r == form.n() {
        return Ok(form.a_d.clone());
    }
    let a22 = form.a22();
    let lu = a22.lu();
    let x = lu.solve(&form.a21()).ok_or(Error::NotCausal)?;
    Ok(form.a11() - form.a12() * x)
}

fn max_modulus(m: &Mat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Finite roots of `det(zE − A)` via the eigenvalues `μ` of
/// `(λ₀E − A)⁻¹E`: each nonzero `μ` gives `z = λ₀ − 1/μ`.
pub fn finite_generalized_eigenvalues(e: &Mat, a: &Mat) -> Result<Vec<C64>> {
    const SHIFTS: [f64; 8] = [0.7311, -1.37, 2.113, -0.419, 3.77, -2.9, 0.1234, 5.5];
    let n = e.nrows();
    for &shift in &SHIFTS {
        let pencil = e * shift - a;
        if numerical_rank(&pencil, DEFAULT_RANK_TOL) < n {
            continue;
        }
        let Some(m) = pencil.lu().solve(e) else { continue };
        let scale = m.norm().max(1.0);
        let eigs = m.complex_eigenvalues();
        return Ok(eigs
            .iter()
            .filter(|mu| mu.norm() > 1e-9 * scale)
            .map(|mu| C64::new(shift, 0.0) - mu.inv())
            .collect());
    }
    Err(Error::Irregular)
}

pub fn check_causal_controllability(e: &Mat, a: &Mat, bu: &Mat) -> bool {
    let n = e.nrows();
    let m = bu.ncols();
    let mut big = Mat::zeros(2 * n, 2 * n + m);
    big.view_mut((0, 0), (n, n)).copy_from(e);
    big.view_mut((n, 0), (n, n)).copy_from(a);
    big.view_mut((n, n), (n, n)).copy_from(e);
    big.view_mut((n, 2 * n), (n, m)).copy_from(bu);
    numerical_rank(&big, DEFAULT_RANK_TOL) == numerical_rank(e, DEFAULT_RANK_TOL) + n
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub regular: bool,
    pub witness: Option<(f64, f64)>,
    /// `None` when regularity failed.
    pub causal: Option<bool>,
    pub stable: Option<bool>,
    pub spectral_radius: Option<f64>,
    pub admissible: bool,
}

pub fn check_admissibility(e: &Mat, a: &Mat) -> Result<AdmissibilityReport> {
    let reg = check_regularity(e, a, 0, 0)?;
    if !reg.regular {
        return Ok(AdmissibilityReport {
            regular: false,
            witness: None,
            causal: None,
            stable: None,
            spectral_radius: None,
            admissible: false,
        });
    }
    let n = e.nrows();
    let plant = DescriptorPlant::new(
        e.clone(),
        a.clone(),
        Mat::zeros(n, 0),
        Mat::zeros(n, 0),
        Mat::zeros(0, n),
        Mat::zeros(0, 0),
    )?;
    let form = SvdEquivalentForm::new(&UncertainPlant::nominal(plant), DEFAULT_RANK_TOL)?;
    let causal = check_causality(&form);
    let rho = spectral_radius(&form)?;
    let stable = rho < 1.0;
    Ok(AdmissibilityReport {
        regular: true,
        witness: reg.witness,
        causal: Some(causal),
        stable: Some(stable),
        spectral_radius: Some(rho),
        admissible: causal && stable,
    })
}

/// `C (zE − A)⁻¹ B + D`.
pub fn transfer_value(r: &Realization, z: C64) -> Result<CMat> {
    let pencil = to_complex(&r.e).map(|v| v * z) - to_complex(&r.a);
    if !complex_full_rank(&pencil, 1e-13) {
        return Err(Error::SingularPencil { re: z.re, im: z.im });
    }
    let x = pencil
        .lu()
        .solve(&to_complex(&r.b))
        .ok_or(Error::SingularPencil { re: z.re, im: z.im })?;
    Ok(to_complex(&r.c) * x + to_complex(&r.d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::example;
    use approx::assert_abs_diff_eq;

    fn dm(rows: usize, cols: usize, v: &[f64]) -> Mat {
        Mat::from_row_slice(rows, cols, v)
    }

    fn pencil_only(e: Mat, a: Mat) -> UncertainPlant {
        let n = e.nrows();
        UncertainPlant::nominal(
            DescriptorPlant::new(
                e,
                a,
                Mat::zeros(n, 1),
                Mat::zeros(n, 1),
                Mat::zeros(1, n),
                Mat::zeros(1, 1),
            )
            .unwrap(),
        )
    }

    #[test]
    fn rank_examples() {
        assert_eq!(numerical_rank(&example::plant().plant.e, DEFAULT_RANK_TOL), 2);
        assert_eq!(numerical_rank(&Mat::identity(3, 3), DEFAULT_RANK_TOL), 3);
        assert_eq!(numerical_rank(&Mat::zeros(2, 2), DEFAULT_RANK_TOL), 0);
    }

    #[test]
    fn example_form_is_canonical() {
        let up = example::plant();
        let f = SvdEquivalentForm::new(&up, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(f.r, 2);
        let canon = &f.w * &up.plant.e * &f.v;
        assert!((canon - Mat::from_diagonal(&nalgebra::dvector![1.0, 1.0, 0.0])).norm() < 1e-10);
    }

    #[test]
    fn nonsingular_e_has_no_algebraic_part() {
        let a = dm(3, 3, &[0.1, 0.2, 0.0, -0.3, 0.4, 0.1, 0.0, 0.5, -0.2]);
        let up = pencil_only(Mat::identity(3, 3), a.clone());
        let f = SvdEquivalentForm::new(&up, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(f.r, 3);
        assert_eq!(f.a22().nrows(), 0);
        // W̄ = V̄ᵀ with V̄ orthogonal: A_d is similar to A.
        let mut ev: Vec<f64> = f.a_d.complex_eigenvalues().iter().map(|z| z.norm()).collect();
        let mut ev0: Vec<f64> = a.complex_eigenvalues().iter().map(|z| z.norm()).collect();
        ev.sort_by(f64::total_cmp);
        ev0.sort_by(f64::total_cmp);
        for (x, y) in ev.iter().zip(&ev0) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-12);
        }
        assert!(SvdEquivalentForm::new_singular(&up, DEFAULT_RANK_TOL).is_err());
    }

    #[test]
    fn transfer_preserved_for_rank_two_product() {
        // E = X diag(1, 2, 0, 0) Y with fixed nonsingular X, Y.
        let x = dm(
            4,
            4,
            &[
                1.0, 0.2, -0.3, 0.0, 0.1, 1.1, 0.0, 0.4, 0.0, -0.5, 0.9, 0.2, 0.3, 0.0, 0.1, 1.2,
            ],
        );
        let y = dm(
            4,
            4,
            &[
                0.8, 0.0, 0.3, -0.1, 0.2, 1.0, 0.0, 0.5, -0.4, 0.1, 1.3, 0.0, 0.0, 0.2, 0.1, 0.7,
            ],
        );
        let e = &x * Mat::from_diagonal(&nalgebra::dvector![1.0, 2.0, 0.0, 0.0]) * &y;
        let a = dm(
            4,
            4,
            &[
                0.3, -0.2, 0.1, 0.5, 0.0, 0.4, -0.6, 0.2, 1.0, 0.1, 0.7, -0.3, 0.2, 0.9, 0.0, 1.1,
            ],
        );
        let plant = DescriptorPlant::new(
            e,
            a,
            dm(4, 2, &[1.0, 0.0, 0.5, -1.0, 0.0, 0.3, 0.2, 0.2]),
            Mat::zeros(4, 1),
            dm(1, 4, &[0.4, -0.1, 1.0, 0.6]),
            dm(1, 2, &[0.05, 0.0]),
        )
        .unwrap();
        assert_eq!(plant.rank(), 2);
        let up = UncertainPlant::nominal(plant);
        let f = SvdEquivalentForm::new(&up, DEFAULT_RANK_TOL).unwrap();
        let z = C64::new(1.37, 0.2);
        let p0 = transfer_value(&up.plant.realization(), z).unwrap();
        let p1 = transfer_value(&f.realization(), z).unwrap();
        assert!((p0 - p1).norm() < 1e-9);
    }

    #[test]
    fn regularity_examples() {
        let up = example::plant();
        assert!(check_regularity(&up.plant.e, &up.plant.a, 0, 1).unwrap().regular);
        let a = dm(2, 2, &[5.0, 1.0, -3.0, 2.0]);
        assert!(check_regularity(&Mat::identity(2, 2), &a, 0, 7).unwrap().regular);
        let r = check_regularity(&Mat::zeros(1, 1), &Mat::zeros(1, 1), 0, 7).unwrap();
        assert!(!r.regular);
        assert!(r.witness.is_none());
    }

    #[test]
    fn causality_examples() {
        let f = SvdEquivalentForm::new(&example::plant(), DEFAULT_RANK_TOL).unwrap();
        assert!(check_causality(&f));
        let up = pencil_only(Mat::identity(2, 2), Mat::zeros(2, 2));
        assert!(check_causality(&SvdEquivalentForm::new(&up, DEFAULT_RANK_TOL).unwrap()));
        let up = pencil_only(dm(2, 2, &[1.0, 0.0, 0.0, 0.0]), dm(2, 2, &[0.5, 1.0, 1.0, 0.0]));
        assert!(!check_causality(
            &SvdEquivalentForm::new(&up, DEFAULT_RANK_TOL).unwrap()
        ));
    }

    #[test]
    fn spectral_radius_examples() {
        let f = SvdEquivalentForm::new(&example::plant(), DEFAULT_RANK_TOL).unwrap();
        assert_abs_diff_eq!(spectral_radius(&f).unwrap(), 2.5, epsilon = 1e-9);

        let up = pencil_only(Mat::identity(2, 2), dm(2, 2, &[0.5, 0.0, 0.0, -0.25]));
        let f = SvdEquivalentForm::new(&up, DEFAULT_RANK_TOL).unwrap();
        assert_abs_diff_eq!(spectral_radius(&f).unwrap(), 0.5, epsilon = 1e-12);

        // det(zE − A) = −(z − 0.8)
        let up = pencil_only(dm(2, 2, &[1.0, 0.0, 0.0, 0.0]), dm(2, 2, &[0.8, 0.0, 0.0, 1.0]));
        let f = SvdEquivalentForm::new(&up, DEFAULT_RANK_TOL).unwrap();
        assert_abs_diff_eq!(spectral_radius(&f).unwrap(), 0.8, epsilon = 1e-12);
    }

    #[test]
    fn non_causal_pencil_uses_shift_invert() {
        // E = diag(1, 0, 0) with a nilpotent algebraic part: det(zE − A) = (z − 0.3)·c
        // but A22 = [[0, 1], [0, 0]] is singular.
        let e = Mat::from_diagonal(&nalgebra::dvector![1.0, 0.0, 0.0]);
        let mut a = Mat::zeros(3, 3);
        a[(0, 0)] = 0.3;
        a[(1, 1)] = 1.0;
        a[(2, 2)] = 1.0;
        let up = pencil_only(e.clone(), a.clone());
        let f = SvdEquivalentForm::new(&up, DEFAULT_RANK_TOL).unwrap();
        assert!(check_causality(&f));
        let mut e2 = Mat::zeros(3, 3);
        e2[(0, 0)] = 1.0;
        e2[(1, 2)] = 1.0;
        let up = pencil_only(e2.clone(), a);
        let f = SvdEquivalentForm::new(&up, DEFAULT_RANK_TOL).unwrap();
        assert!(!check_causality(&f));
        // det(zE2 − A) = z − 0.3: degree 1 < rank E2 = 2
        assert_abs_diff_eq!(spectral_radius(&f).unwrap(), 0.3, epsilon = 1e-9);
    }

    #[test]
    fn admissibility_examples() {
        let up = example::plant();
        let rep = check_admissibility(&up.plant.e, &up.plant.a).unwrap();
        assert!(rep.regular);
        assert_eq!(rep.causal, Some(true));
        assert_eq!(rep.stable, Some(false));
        assert!(!rep.admissible);

        let rep = check_admissibility(&Mat::identity(3, 3), &Mat::zeros(3, 3)).unwrap();
        assert!(rep.admissible);

        let rep = check_admissibility(&Mat::zeros(1, 1), &Mat::zeros(1, 1)).unwrap();
        assert!(!rep.regular && rep.causal.is_none() && !rep.admissible);
    }

    #[test]
    fn causal_controllability_examples() {
        let p = &example::plant().plant;
        assert!(check_causal_controllability(&p.e, &p.a, &p.bu));
        let a = dm(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        assert!(check_causal_controllability(
            &Mat::identity(2, 2),
            &a,
            &Mat::zeros(2, 1)
        ));
        // rank [0 0 0; 1 0 0] = 1 = rank E + n
        assert!(check_causal_controllability(
            &Mat::zeros(1, 1),
            &Mat::identity(1, 1),
            &Mat::zeros(1, 1)
        ));
        // A22 = 0 with no input into the algebraic row
        let e = dm(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let a = dm(2, 2, &[0.5, 0.0, 0.0, 0.0]);
        assert!(!check_causal_controllability(&e, &a, &dm(2, 1, &[1.0, 0.0])));
        assert!(check_causal_controllability(&e, &a, &dm(2, 1, &[0.0, 1.0])));
    }

    #[test]
    fn transfer_value_examples() {
        let r = Realization {
            e: Mat::identity(2, 2),
            a: dm(2, 2, &[0.3, 1.0, 0.0, 0.2]),
            b: Mat::zeros(2, 2),
            c: Mat::zeros(1, 2),
            d: dm(1, 2, &[0.01, -0.5]),
        };
        let v = transfer_value(&r, C64::new(0.3, 0.9)).unwrap();
        assert_abs_diff_eq!(v[(0, 1)].re, -0.5);
        let r = Realization {
            e: Mat::identity(1, 1),
            a: dm(1, 1, &[0.5]),
            b: Mat::identity(1, 1),
            c: Mat::identity(1, 1),
            d: Mat::zeros(1, 1),
        };
        let v = transfer_value(&r, C64::new(1.0, 0.0)).unwrap();
        assert_abs_diff_eq!(v[(0, 0)].re, 2.0, epsilon = 1e-14);
        assert!(matches!(
            transfer_value(&r, C64::new(0.5, 0.0)),
            Err(Error::SingularPencil { .. })
        ));
    }

    #[test]
    fn example_transfer_matches_equivalent_form() {
        let up = example::plant();
        let f = SvdEquivalentForm::new(&up, DEFAULT_RANK_TOL).unwrap();
        let z = C64::from_polar(1.0, std::f64::consts::PI / 3.0);
        let p0 = transfer_value(&up.plant.realization(), z).unwrap();
        let p1 = transfer_value(&f.realization(), z).unwrap();
        assert!((p0 - p1).norm() < 1e-9);
    }

    #[test]
    fn closed_loop_with_zero_gain_is_identity() {
        let up = example::plant();
        let cl = up.closed_loop(&Mat::zeros(1, 3)).unwrap();
        assert_eq!(cl, up);
    }

    #[test]
    fn factor_dimension_mismatch_rejected() {
        let p = example::plant().plant;
        let f = UncertaintyFactors {
            ma: Some(Mat::zeros(3, 2)),
            na: Some(Mat::zeros(1, 3)),
            ..Default::default()
        };
        assert!(UncertainPlant::new(p, f).is_err());
    }
}
