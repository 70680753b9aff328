//! State-feedback synthesis: assemble the robust synthesis inequality, solve
//! it, repair a near-singular `S`, and recover `F` from the certificate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::rows;
use crate::lmi::{assemble_synthesis, assemble_synthesis_alpha, AffineMatrixInequality, GammaSpec};
use crate::model::{check_causal_controllability, Mat, SvdEquivalentForm, UncertainPlant, DEFAULT_RANK_TOL};
use crate::sdp::{minimize_linear, solve_feasibility, verify_solution, SdpProblem, SolveStatus, SolverConfig};

/// Condition number above which `Q` or `S` counts as singular.
pub const COND_LIMIT: f64 = 1e12;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Certificate {
    #[serde(rename = "L", with = "rows")]
    pub l: Mat,
    #[serde(rename = "Q", with = "rows")]
    pub q: Mat,
    #[serde(rename = "R", with = "rows")]
    pub r: Mat,
    #[serde(rename = "S", with = "rows")]
    pub s: Mat,
    #[serde(rename = "Z", with = "rows")]
    pub z: Mat,
    pub eps: f64,
    /// `γ²`, either fixed or optimized.
    pub t: f64,
}

impl Certificate {
    fn from_solution(ami: &AffineMatrixInequality, x: &[f64], gamma: GammaSpec) -> Self {
        let lay = &ami.layout;
        let t = match gamma {
            GammaSpec::Fixed(g) => g * g,
            GammaSpec::Minimize => x[lay.scalar_index("t")],
        };
        Self {
            l: lay.value("L", x),
            q: lay.value("Q", x),
            r: lay.value("R", x),
            s: lay.value("S", x),
            z: lay.value("Z", x),
            eps: x[lay.scalar_index("eps")],
            t,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct SynthesisDiagnostics {
    pub cond_q: f64,
    pub cond_s: f64,
    pub lambda_min_l: f64,
    /// Margin reported by the solver, unscaled.
    pub solver_margin: f64,
    /// Margin of the certificate actually returned (after any `S` shift).
    pub certificate_margin: f64,
    /// `‖[Q R; 0 S](F V̄)ᵀ − Z‖_F / (1 + ‖Z‖_F)`.
    pub roundtrip_error: f64,
    pub iterations: usize,
    pub solver_accuracy: f64,
    pub causally_controllable: bool,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SynthesisResult {
    #[serde(with = "rows")]
    pub gain: Mat,
    pub gamma: f64,
    pub alpha: f64,
    pub certificate: Certificate,
    pub s_regularized: bool,
    pub s_shift: f64,
    pub diagnostics: SynthesisDiagnostics,
}

/// The synthesis inequality for `α`: the general assembly at `α = 0`, the
/// `A`-only variant otherwise.
pub fn synthesis_program(form: &SvdEquivalentForm, gamma: GammaSpec, alpha: f64) -> Result<AffineMatrixInequality> {
    if alpha == 0.0 {
        assemble_synthesis(form, gamma)
    } else {
        assemble_synthesis_alpha(form, gamma, alpha)
    }
}

pub fn synthesize(up: &UncertainPlant, gamma: f64, alpha: f64, cfg: &SolverConfig) -> Result<SynthesisResult> {
    run(up, GammaSpec::Fixed(gamma), alpha, cfg)
}

/// Minimizes `t = γ²` and reports `γ = √t*`.
pub fn synthesize_optimal(up: &UncertainPlant, alpha: f64, cfg: &SolverConfig) -> Result<SynthesisResult> {
    run(up, GammaSpec::Minimize, alpha, cfg)
}

fn run(up: &UncertainPlant, gamma: GammaSpec, alpha: f64, cfg: &SolverConfig) -> Result<SynthesisResult> {
    let form = SvdEquivalentForm::new(up, DEFAULT_RANK_TOL)?;
    synthesize_in_form(up, &form, gamma, alpha, cfg)
}

/// Synthesis in a caller-chosen equivalent form of `up`.
pub fn synthesize_in_form(
    up: &UncertainPlant,
    form: &SvdEquivalentForm,
    gamma: GammaSpec,
    alpha: f64,
    cfg: &SolverConfig,
) -> Result<SynthesisResult> {
    if up.plant.m() == 0 {
        return Err(Error::InvalidInput("synthesis needs a nonempty Bu".into()));
    }
    if alpha > 0.0 && !up.uncertain_only_in_a() {
        return Err(Error::InvalidAlphaPath(
            "alpha > 0 requires uncertainty confined to A".into(),
        ));
    }
    let mut warnings = Vec::new();
    let p = &up.plant;
    let causally_controllable = check_causal_controllability(&p.e, &p.a, &p.bu);
    if !causally_controllable {
        warnings.push("plant is not causally controllable".to_string());
    }
    let ami = synthesis_program(form, gamma, alpha)?;
    let problem = SdpProblem::from_ami(&ami, cfg.margin)?;
    let sol = match gamma {
        GammaSpec::Fixed(_) => solve_feasibility(&problem, cfg)?,
        GammaSpec::Minimize => {
            let mut c = vec![0.0; ami.num_vars()];
            c[ami.layout.scalar_index("t")] = 1.0;
            minimize_linear(&problem, &c, cfg)?
        }
    };
    let verified = verify_solution(&problem, &sol.x)?.satisfied;
    match sol.status {
        SolveStatus::Feasible => {}
        // A stalled minimization still leaves a verified certificate whose γ
        // bounds the optimum from above.
        SolveStatus::NumericalFailure if gamma == GammaSpec::Minimize && verified => {
            warnings.push(format!(
                "gamma minimization stopped at relative accuracy {:.1e}",
                sol.accuracy
            ));
        }
        SolveStatus::NumericalFailure => {
            return Err(Error::Numerical(format!(
                "solver failed after {} iterations",
                sol.iterations
            )))
        }
        SolveStatus::Infeasible | SolveStatus::Marginal => {
            let what = match gamma {
                GammaSpec::Fixed(g) => format!("gamma = {g}"),
                GammaSpec::Minimize => "gamma minimization".into(),
            };
            return Err(Error::Infeasible(format!(
                "synthesis inequality at {what} ({:?})",
                sol.status
            )));
        }
    }

    let mut x = sol.x.clone();
    let reg = regularize_s(&ami, &problem, &x)?;
    x = reg.x;
    let cert = Certificate::from_solution(&ami, &x, gamma);
    let gain = recover_gain(&cert.q, &cert.r, &cert.s, &cert.z, &form.v)?;
    let report = verify_solution(&problem, &x)?;
    if !report
        .block_margins
        .iter()
        .zip(&report.required)
        .all(|(m, d)| *m >= 0.25 * d)
    {
        return Err(Error::Numerical("certificate lost its margin".into()));
    }
    let diagnostics = SynthesisDiagnostics {
        cond_q: cond(&cert.q),
        cond_s: cond(&cert.s),
        lambda_min_l: if cert.l.is_empty() {
            f64::INFINITY
        } else {
            cert.l.clone().symmetric_eigenvalues().min()
        },
        solver_margin: sol.margin,
        certificate_margin: report.margin,
        roundtrip_error: roundtrip_error(&cert.q, &cert.r, &cert.s, &cert.z, &form.v, &gain),
        iterations: sol.iterations,
        solver_accuracy: sol.accuracy,
        causally_controllable,
        warnings,
    };
    Ok(SynthesisResult {
        gain,
        gamma: cert.t.sqrt(),
        alpha,
        certificate: cert,
        s_regularized: reg.applied,
        s_shift: reg.shift,
        diagnostics,
    })
}

/// `σ_max/σ_min`; 1 for an empty matrix, `∞` when singular.
pub fn cond(m: &Mat) -> f64 {
    if m.is_empty() {
        return 1.0;
    }
    let sv = m.clone().singular_values();
    let (hi, lo) = (sv.max(), sv.min());
    if lo == 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Regularized {
    pub x: Vec<f64>,
    pub applied: bool,
    pub shift: f64,
}

/// Replaces `S` by `S + ε̂I` when `cond(S) > 1e12`, taking the first
/// `ε̂ = 2⁻ᵏ‖S‖₂`, `k = 4..=40`, that keeps every block margin at a quarter
/// of its required value. A zero `S` uses the ladder `2⁻ᵏ`.
pub fn regularize_s(ami: &AffineMatrixInequality, problem: &SdpProblem, x: &[f64]) -> Result<Regularized> {
    let s = ami.layout.value("S", x);
    if cond(&s) <= COND_LIMIT {
        return Ok(Regularized {
            x: x.to_vec(),
            applied: false,
            shift: 0.0,
        });
    }
    let norm = s.clone().singular_values().max();
    let base = if norm > 0.0 { norm } else { 1.0 };
    let k = s.nrows();
    for e in 4..=40 {
        let shift = base * 2f64.powi(-e);
        let mut y = x.to_vec();
        ami.layout.set_value("S", &mut y, &(&s + Mat::identity(k, k) * shift));
        let report = verify_solution(problem, &y)?;
        let ok = report
            .block_margins
            .iter()
            .zip(&report.required)
            .all(|(m, d)| *m >= 0.25 * d);
        if ok && cond(&ami.layout.value("S", &y)) <= COND_LIMIT {
            return Ok(Regularized {
                x: y,
                applied: true,
                shift,
            });
        }
    }
    Err(Error::Numerical(
        "no shift of S preserves the certificate margin".into(),
    ))
}

fn upper_block(q: &Mat, r: &Mat, s: &Mat) -> Mat {
    let (nr, ns) = (q.nrows(), s.nrows());
    let n = nr + ns;
    let mut t = Mat::zeros(n, n);
    t.view_mut((0, 0), (nr, nr)).copy_from(q);
    t.view_mut((0, nr), (nr, ns)).copy_from(r);
    t.view_mut((nr, nr), (ns, ns)).copy_from(s);
    t
}

/// Solves `[Q R; 0 S] F_dᵀ = Z` and returns `F = F_d V̄⁻¹`.
pub fn recover_gain(q: &Mat, r: &Mat, s: &Mat, z: &Mat, v: &Mat) -> Result<Mat> {
    let n = q.nrows() + s.nrows();
    if r.shape() != (q.nrows(), s.nrows()) || z.nrows() != n || v.shape() != (n, n) {
        return Err(Error::Dimension("certificate blocks do not fit together".into()));
    }
    if cond(q) > COND_LIMIT {
        return Err(Error::Numerical("Q is singular".into()));
    }
    if cond(s) > COND_LIMIT {
        return Err(Error::Numerical("S is singular; regularize it first".into()));
    }
    let t = upper_block(q, r, s);
    let fd_t = t
        .lu()
        .solve(z)
        .ok_or_else(|| Error::Numerical("[Q R; 0 S] is singular".into()))?;
    let v_inv = v
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Numerical("V is singular".into()))?;
    Ok(fd_t.transpose() * v_inv)
}

pub fn roundtrip_error(q: &Mat, r: &Mat, s: &Mat, z: &Mat, v: &Mat, gain: &Mat) -> f64 {
    let t = upper_block(q, r, s);
    (t * (gain * v).transpose() - z).norm() / (1.0 + z.norm())
}

/// Largest γ on a bisection grid in `[lo, hi]` that is not certified and the
/// smallest one that is; used to cross-check the optimized value.
pub fn bisect_gamma(
    up: &UncertainPlant,
    alpha: f64,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
    cfg: &SolverConfig,
) -> Result<(f64, f64)> {
    let feasible = |g: f64| -> Result<bool> {
        match synthesize(up, g, alpha, cfg) {
            Ok(_) => Ok(true),
            Err(Error::Infeasible(_)) => Ok(false),
            Err(e) => Err(e),
        }
    };
    if !feasible(hi)? {
        return Err(Error::Infeasible(format!("not certified at the upper bracket {hi}")));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if feasible(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok((lo, hi))
}
