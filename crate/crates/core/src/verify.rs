//! Solver-independent checks: frequency-sweep H∞ norms, sampled robustness
//! reports over the uncertainty set, the analysis certificate, and the
//! `α`-sweep of the optimized synthesis bound.

use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::HinfConfig;
use crate::error::{Error, Result};
use crate::io::rows;
use crate::lmi::{assemble_robust_brl, GammaSpec};
use crate::model::{
    check_admissibility, transfer_value, Mat, Realization, SvdEquivalentForm, UncertainPlant, DEFAULT_RANK_TOL,
};
use crate::par;
use crate::sdp::{solve_feasibility, SdpProblem, SolveStatus, SolverConfig};
use crate::synth::synthesize_optimal;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HinfNorm {
    /// `+∞` when the realization is not admissible.
    pub norm: f64,
    pub omega: Option<f64>,
    pub admissible: bool,
    /// Frequencies where the pencil was singular and a nearby point was used.
    pub perturbed: Vec<f64>,
}

fn sigma_max(m: &nalgebra::DMatrix<Complex<f64>>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().max()
}

/// `σ̄(P(e^{iω}))`, nudging `ω` off singular points.
fn gain_at(r: &Realization, omega: f64) -> Result<(f64, bool)> {
    for k in 0..8 {
        let w = omega + k as f64 * 1e-7;
        match transfer_value(r, Complex::from_polar(1.0, w)) {
            Ok(g) => return Ok((sigma_max(&g), k > 0)),
            Err(Error::SingularPencil { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::Numerical(format!("pencil singular near omega = {omega}")))
}

/// Peak of `σ̄(P(e^{iω}))` over `[0, 2π)`: uniform grid, then golden-section
/// refinement around the best grid point.
pub fn hinf_norm(r: &Realization, cfg: &HinfConfig) -> Result<HinfNorm> {
    let adm = check_admissibility(&r.e, &r.a)?;
    if !adm.admissible {
        return Ok(HinfNorm {
            norm: f64::INFINITY,
            omega: None,
            admissible: false,
            perturbed: vec![],
        });
    }
    let n = cfg.grid_points.max(3);
    let step = 2.0 * PI / n as f64;
    let omegas: Vec<f64> = (0..n).map(|k| k as f64 * step).collect();
    let values = par::map(&omegas, |&w| gain_at(r, w));
    let mut perturbed = Vec::new();
    let mut best = (0.0, 0.0);
    for (w, v) in omegas.iter().zip(values) {
        let (g, moved) = v?;
        if moved {
            perturbed.push(*w);
        }
        if g > best.0 {
            best = (g, *w);
        }
    }
    let f = |w: f64| gain_at(r, w).map(|(g, _)| g).unwrap_or(0.0);
    let (mut a, mut b) = (best.1 - step, best.1 + step);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > cfg.refine_tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let w = 0.5 * (a + b);
    let g = f(w);
    if g > best.0 {
        best = (g, w.rem_euclid(2.0 * PI));
    }
    Ok(HinfNorm {
        norm: best.0,
        omega: Some(best.1),
        admissible: true,
        perturbed,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleMode {
    Grid,
    Random,
    Vertices,
}

/// Uncertainty samples with `‖Δ‖₂ ≤ 1`.
pub fn sample_uncertainty(s: usize, count: usize, mode: SampleMode, seed: u64) -> Result<Vec<Mat>> {
    if s == 0 {
        return Err(Error::InvalidInput("uncertainty dimension must be positive".into()));
    }
    match mode {
        SampleMode::Grid => {
            if s != 1 {
                return Err(Error::InvalidInput("grid sampling needs s = 1".into()));
            }
            if count == 1 {
                return Ok(vec![Mat::zeros(1, 1)]);
            }
            Ok((0..count)
                .map(|k| Mat::from_element(1, 1, -1.0 + 2.0 * k as f64 / (count - 1) as f64))
                .collect())
        }
        SampleMode::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            Ok((0..count)
                .map(|_| {
                    let m = Mat::from_fn(s, s, |_, _| rng.gen_range(-1.0..1.0));
                    let norm = m.clone().singular_values().max();
                    if norm > 0.0 {
                        m / norm
                    } else {
                        Mat::identity(s, s)
                    }
                })
                .collect())
        }
        SampleMode::Vertices => {
            if s > 16 {
                return Err(Error::InvalidInput("vertex enumeration limited to s <= 16".into()));
            }
            Ok((0..1usize << s)
                .map(|bits| {
                    Mat::from_diagonal(&nalgebra::DVector::from_fn(s, |i, _| {
                        if bits >> i & 1 == 0 {
                            1.0
                        } else {
                            -1.0
                        }
                    }))
                })
                .collect())
        }
    }
}

/// Default sample set: the uniform grid for `s = 1`, random unit-norm
/// matrices otherwise; nominal plants get the single sample `Δ = 0`.
pub fn default_samples(up: &UncertainPlant, grid: usize, random: usize, seed: u64) -> Result<Vec<Mat>> {
    match up.s() {
        0 => Ok(vec![Mat::zeros(0, 0)]),
        1 => sample_uncertainty(1, grid, SampleMode::Grid, seed),
        s => sample_uncertainty(s, random, SampleMode::Random, seed),
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SampleResult {
    #[serde(with = "rows")]
    pub delta: Mat,
    pub regular: bool,
    pub causal: Option<bool>,
    pub admissible: bool,
    pub spectral_radius: Option<f64>,
    pub hinf_norm: f64,
    pub omega: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RobustnessReport {
    pub samples: Vec<SampleResult>,
    pub all_admissible: bool,
    pub rho_min: Option<f64>,
    pub rho_max: Option<f64>,
    /// Maximum over the samples; a lower bound on the true worst case.
    pub sampled_worst_case_norm: f64,
    pub worst_omega: Option<f64>,
    pub worst_sample: Option<usize>,
    pub gamma_target: Option<f64>,
    pub pass: bool,
}

impl RobustnessReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let fmt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.6}"));
        let _ = writeln!(
            out,
            "{:>5}  {:>24}  {:>10}  {:>10}  {:>12}  {:>10}",
            "#", "delta", "admissible", "rho", "hinf_norm", "omega"
        );
        for (i, s) in self.samples.iter().enumerate() {
            let delta = if s.delta.len() == 1 {
                format!("{:.4}", s.delta[(0, 0)])
            } else {
                format!("{}x{}", s.delta.nrows(), s.delta.ncols())
            };
            let _ = writeln!(
                out,
                "{:>5}  {:>24}  {:>10}  {:>10}  {:>12}  {:>10}",
                i,
                delta,
                s.admissible,
                fmt(s.spectral_radius),
                format!("{:.6}", s.hinf_norm),
                fmt(s.omega)
            );
        }
        let _ = writeln!(out, "all admissible           {}", self.all_admissible);
        let _ = writeln!(
            out,
            "spectral radius range    [{}, {}]",
            fmt(self.rho_min),
            fmt(self.rho_max)
        );
        let _ = writeln!(out, "sampled worst case norm  {:.6}", self.sampled_worst_case_norm);
        let _ = writeln!(out, "gamma target             {}", fmt(self.gamma_target));
        let _ = writeln!(out, "pass                     {}", self.pass);
        out
    }
}

/// Closed loop `A + Bu F` (or the open loop) realized at every sample.
pub fn robust_verify(
    up: &UncertainPlant,
    gain: Option<&Mat>,
    samples: &[Mat],
    gamma_target: Option<f64>,
    hinf: &HinfConfig,
) -> Result<RobustnessReport> {
    if samples.is_empty() {
        return Err(Error::InvalidInput("no uncertainty samples".into()));
    }
    let cl = match gain {
        Some(f) => up.closed_loop(f)?,
        None => up.clone(),
    };
    let per_sample = par::map(samples, |delta| -> Result<SampleResult> {
        let plant = if up.s() == 0 {
            cl.plant.clone()
        } else {
            cl.realize(delta)?
        };
        let adm = check_admissibility(&plant.e, &plant.a)?;
        let norm = hinf_norm(&plant.realization(), hinf)?;
        Ok(SampleResult {
            delta: delta.clone(),
            regular: adm.regular,
            causal: adm.causal,
            admissible: adm.admissible,
            spectral_radius: adm.spectral_radius,
            hinf_norm: norm.norm,
            omega: norm.omega,
        })
    });
    let samples: Vec<SampleResult> = per_sample.into_iter().collect::<Result<_>>()?;
    let all_admissible = samples.iter().all(|s| s.admissible);
    let rhos: Vec<f64> = samples.iter().filter_map(|s| s.spectral_radius).collect();
    let rho_min = rhos.iter().copied().reduce(f64::min);
    let rho_max = rhos.iter().copied().reduce(f64::max);
    let mut worst = (f64::NEG_INFINITY, None, None);
    for (i, s) in samples.iter().enumerate() {
        if s.hinf_norm > worst.0 {
            worst = (s.hinf_norm, s.omega, Some(i));
        }
    }
    let pass = all_admissible && gamma_target.is_none_or(|g| worst.0 < g);
    Ok(RobustnessReport {
        samples,
        all_admissible,
        rho_min,
        rho_max,
        sampled_worst_case_norm: worst.0,
        worst_omega: worst.1,
        worst_sample: worst.2,
        gamma_target,
        pass,
    })
}

/// Outcome of the robust bounded-real certificate at a fixed `γ`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AnalysisCertificate {
    pub gamma: f64,
    pub status: SolveStatus,
    pub certified: bool,
    pub margin: f64,
    #[serde(rename = "L", with = "rows")]
    pub l: Mat,
    #[serde(rename = "Q", with = "rows")]
    pub q: Mat,
    #[serde(rename = "R", with = "rows")]
    pub r: Mat,
    #[serde(rename = "S", with = "rows")]
    pub s: Mat,
    pub eps: f64,
    pub iterations: usize,
}

/// Attempts to certify admissibility and `‖P_Δ‖∞ < γ` for every admissible
/// `Δ`; `Bu` plays no role.
pub fn certify_robust_performance(up: &UncertainPlant, gamma: f64, cfg: &SolverConfig) -> Result<AnalysisCertificate> {
    let form = SvdEquivalentForm::new(up, DEFAULT_RANK_TOL)?;
    let ami = assemble_robust_brl(&form, GammaSpec::Fixed(gamma))?;
    let problem = SdpProblem::from_ami(&ami, cfg.margin)?;
    let sol = solve_feasibility(&problem, cfg)?;
    let lay = &ami.layout;
    Ok(AnalysisCertificate {
        gamma,
        status: sol.status,
        certified: sol.status == SolveStatus::Feasible,
        margin: sol.margin,
        l: lay.value("L", &sol.x),
        q: lay.value("Q", &sol.x),
        r: lay.value("R", &sol.x),
        s: lay.value("S", &sol.x),
        eps: sol.x[lay.scalar_index("eps")],
        iterations: sol.iterations,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepStatus {
    Ok,
    Infeasible,
    NumericalFailure,
}

impl SweepStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepStatus::Ok => "ok",
            SweepStatus::Infeasible => "infeasible",
            SweepStatus::NumericalFailure => "numerical_failure",
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AlphaPoint {
    pub alpha: f64,
    pub gamma_min: Option<f64>,
    pub status: SweepStatus,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AlphaSweepCurve {
    pub points: Vec<AlphaPoint>,
    /// Requested values dropped as duplicates.
    pub duplicates: Vec<f64>,
}

impl AlphaSweepCurve {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("alpha,gamma_min,status\n");
        for p in &self.points {
            let g = p.gamma_min.map_or(String::new(), |g| format!("{g:.10}"));
            let _ = writeln!(out, "{},{},{}", p.alpha, g, p.status.as_str());
        }
        out
    }
}

/// Optimized `γ` for each distinct `α`, sorted by `α`.
pub fn alpha_sweep(up: &UncertainPlant, alphas: &[f64], cfg: &SolverConfig) -> Result<AlphaSweepCurve> {
    if alphas.is_empty() {
        return Err(Error::InvalidInput("empty alpha list".into()));
    }
    if let Some(a) = alphas.iter().find(|a| !(**a >= 0.0 && a.is_finite())) {
        return Err(Error::InvalidInput(format!("alpha must be nonnegative, got {a}")));
    }
    if !up.uncertain_only_in_a() {
        return Err(Error::InvalidAlphaPath(
            "alpha sweep requires uncertainty confined to A".into(),
        ));
    }
    let mut sorted = alphas.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut unique: Vec<f64> = Vec::with_capacity(sorted.len());
    let mut duplicates = Vec::new();
    for a in sorted {
        if unique.last() == Some(&a) {
            duplicates.push(a);
        } else {
            unique.push(a);
        }
    }
    let results = par::map(&unique, |&alpha| synthesize_optimal(up, alpha, cfg));
    let mut points = Vec::with_capacity(unique.len());
    for (alpha, r) in unique.into_iter().zip(results) {
        let (gamma_min, status) = match r {
            Ok(res) => (Some(res.gamma), SweepStatus::Ok),
            Err(Error::Infeasible(_)) => (None, SweepStatus::Infeasible),
            Err(Error::Numerical(_)) => (None, SweepStatus::NumericalFailure),
            Err(e) => return Err(e),
        };
        points.push(AlphaPoint {
            alpha,
            gamma_min,
            status,
        });
    }
    Ok(AlphaSweepCurve { points, duplicates })
}
