//! Semidefinite feasibility and linear minimization for block-diagonal
//! affine matrix inequalities `F₀ + Σ xᵢFᵢ ≺ 0`.
//!
//! Strict inequalities are solved as `⪯ −δI` with a per-block margin
//! `δ_k = margin·(1 + ‖F_k0‖₂)`. Internally each block is divided by
//! `1 + ‖F_k0‖₂`, every variable is rescaled to unit coefficient norm and
//! boxed to `|x̃ᵢ| ≤ bound`, and the result is handed to an infeasible-start
//! primal-dual path-following method (HKM direction, Mehrotra
//! predictor-corrector) on the standard dual form
//! `max bᵀy  s.t.  C − Σ yᵢAᵢ ⪰ 0`.
//!
//! Returned points are always re-checked by [`verify_solution`], which
//! recomputes eigenvalues from the unscaled data.

use nalgebra::{Cholesky, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lmi::{max_eigenvalue, AffineMatrixInequality};
use crate::model::Mat;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Relative strictness margin `δ`.
    pub margin: f64,
    pub max_iter: usize,
    /// Relative tolerance on residuals and duality gap.
    pub tol: f64,
    /// Box bound on the rescaled variables.
    pub bound: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            margin: 1e-7,
            max_iter: 200,
            tol: 1e-8,
            bound: 1e6,
        }
    }
}

/// One constraint `constant + Σ xᵢ coeffs[i] ⪯ −δI`.
#[derive(Clone, Debug)]
pub struct SdpBlock {
    pub name: String,
    pub constant: Mat,
    pub coeffs: Vec<Option<Mat>>,
}

#[derive(Clone, Debug)]
pub struct SdpProblem {
    pub num_vars: usize,
    /// Zero for pure feasibility.
    pub objective: Vec<f64>,
    pub blocks: Vec<SdpBlock>,
    pub margin: f64,
}

impl SdpProblem {
    pub fn new(num_vars: usize, blocks: Vec<SdpBlock>, margin: f64) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidInput("SDP needs at least one block".into()));
        }
        for b in &blocks {
            let d = b.constant.nrows();
            if b.constant.ncols() != d || b.coeffs.len() != num_vars {
                return Err(Error::Dimension(format!("block {} is malformed", b.name)));
            }
            let sym = |m: &Mat| (m - m.transpose()).amax() <= 1e-12 * (1.0 + m.amax());
            if !sym(&b.constant) || b.coeffs.iter().flatten().any(|c| c.shape() != (d, d) || !sym(c)) {
                return Err(Error::InvalidInput(format!("block {} is not symmetric", b.name)));
            }
        }
        if !(margin > 0.0) {
            return Err(Error::InvalidInput("margin must be positive".into()));
        }
        Ok(Self {
            num_vars,
            objective: vec![0.0; num_vars],
            blocks,
            margin,
        })
    }

    pub fn from_ami(ami: &AffineMatrixInequality, margin: f64) -> Result<Self> {
        let blocks = ami
            .blocks
            .iter()
            .map(|b| SdpBlock {
                name: b.name.clone(),
                constant: b.expr.constant.clone(),
                coeffs: b.expr.coeffs.clone(),
            })
            .collect();
        Self::new(ami.num_vars(), blocks, margin)
    }

    pub fn with_objective(mut self, c: Vec<f64>) -> Result<Self> {
        if c.len() != self.num_vars {
            return Err(Error::Dimension("objective length".into()));
        }
        self.objective = c;
        Ok(self)
    }

    /// `δ_k` for every block.
    pub fn required_margins(&self) -> Vec<f64> {
        self.blocks
            .iter()
            .map(|b| self.margin * (1.0 + spectral_norm(&b.constant)))
            .collect()
    }

    pub fn eval_block(&self, k: usize, x: &[f64]) -> Mat {
        let b = &self.blocks[k];
        let mut m = b.constant.clone();
        for (c, &xi) in b.coeffs.iter().zip(x) {
            if let Some(c) = c {
                m += c * xi;
            }
        }
        m
    }
}

fn spectral_norm(m: &Mat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().symmetric_eigenvalues().amax()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Feasible,
    Infeasible,
    Marginal,
    NumericalFailure,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SdpSolution {
    pub status: SolveStatus,
    pub x: Vec<f64>,
    /// `−max_k λ_max(F_k(x))`, unscaled.
    pub margin: f64,
    pub objective: f64,
    pub iterations: usize,
    /// Optimal scaled margin of the max-margin problem, when it was solved.
    pub best_scaled_margin: Option<f64>,
    /// Worst relative residual or duality gap of the final interior-point run.
    pub accuracy: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MarginReport {
    pub block_margins: Vec<f64>,
    pub required: Vec<f64>,
    pub margin: f64,
    /// Every block meets half its required margin.
    pub satisfied: bool,
}

/// Recomputes `−λ_max` of every block at `x` by symmetric eigendecomposition.
pub fn verify_solution(p: &SdpProblem, x: &[f64]) -> Result<MarginReport> {
    if x.len() != p.num_vars {
        return Err(Error::Dimension(format!(
            "x has {} entries, expected {}",
            x.len(),
            p.num_vars
        )));
    }
    let block_margins: Vec<f64> = (0..p.blocks.len())
        .map(|k| -max_eigenvalue(&p.eval_block(k, x)))
        .collect();
    let required = p.required_margins();
    let satisfied = block_margins.iter().zip(&required).all(|(m, d)| *m >= 0.5 * d);
    let margin = block_margins.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(MarginReport {
        block_margins,
        required,
        margin,
        satisfied,
    })
}

/// Searches for `x` with every block `⪯ −δ_k I` by maximizing the common
/// scaled margin. Non-feasible outcomes mean only that no certificate was
/// found.
pub fn solve_feasibility(p: &SdpProblem, cfg: &SolverConfig) -> Result<SdpSolution> {
    let scaled = Scaled::new(p, cfg);
    let n = p.num_vars;
    // Extra variable s: F̃_k(x̃) − sI ⪯ 0, minimize s.
    let mut std = scaled.standard(cfg.bound, Some(()), 0.0);
    let mut b = DVector::zeros(n + 1);
    b[n] = -1.0;
    std.b = b;
    let target = cfg.margin;
    let mut found: Option<Vec<f64>> = None;
    let run = ipm(&std, cfg, |y| {
        let x = scaled.unscale(&y[..n]);
        if scaled.scaled_margin(&x) >= target {
            found = Some(x);
            true
        } else {
            false
        }
    });
    let iterations = run.iterations;
    if let Some(x) = found {
        return finish(p, x, SolveStatus::Feasible, iterations, None, run.accuracy);
    }
    let x = scaled.unscale(&run.y.as_slice()[..n]);
    let best = -run.y[n];
    if !run.converged() {
        let status = if scaled.scaled_margin(&x) >= 0.5 * target {
            SolveStatus::Feasible
        } else {
            SolveStatus::NumericalFailure
        };
        return finish(p, x, status, iterations, Some(best), run.accuracy);
    }
    let status = if scaled.scaled_margin(&x) >= 0.5 * target {
        SolveStatus::Feasible
    } else if best < 0.5 * target - run.accuracy * (1.0 + best.abs()) {
        SolveStatus::Infeasible
    } else {
        SolveStatus::Marginal
    };
    finish(p, x, status, iterations, Some(best), run.accuracy)
}

/// Minimizes `cᵀx` over margin-feasible points.
pub fn minimize_linear(p: &SdpProblem, c: &[f64], cfg: &SolverConfig) -> Result<SdpSolution> {
    if c.len() != p.num_vars {
        return Err(Error::Dimension("objective length".into()));
    }
    let feas = solve_feasibility(p, cfg)?;
    if feas.status != SolveStatus::Feasible {
        return Ok(SdpSolution {
            objective: dot(c, &feas.x),
            ..feas
        });
    }
    let x0 = feas.x.clone();
    let scaled = Scaled::new(p, cfg);
    let cs = scaled.scale_objective(c);
    let obj_scaled = |xs: &[f64]| cs.iter().zip(xs).map(|(a, b)| a * b).sum::<f64>();

    // Multipliers stay of order one when the optimal objective is O(1). The
    // first pass normalizes by ‖c‖; a stalled pass is repeated once with the
    // objective normalized by its own estimate of the optimum.
    let mut iterations = feas.iterations;
    let mut norm = cs.norm().max(f64::MIN_POSITIVE);
    let mut best: Option<IpmRun> = None;
    for _pass in 0..2 {
        let mut std = scaled.standard(cfg.bound, None, cfg.margin);
        std.b = -&cs / norm;
        let run = ipm(&std, cfg, |_| false);
        iterations += run.iterations;
        if run.y.iter().any(|v| v.abs() > 0.5 * cfg.bound) {
            return Err(Error::InvalidInput(
                "objective is unbounded below on the feasible set".into(),
            ));
        }
        let done = run.converged();
        let estimate = obj_scaled(run.y.as_slice()).abs();
        if best.as_ref().is_none_or(|b| run.accuracy < b.accuracy) {
            best = Some(run);
        }
        if done || !(estimate > 0.0) {
            break;
        }
        norm = estimate;
    }
    let run = best.expect("at least one pass");

    let mut x = scaled.unscale(run.y.as_slice());
    if !run.y.iter().all(|v| v.is_finite()) {
        x = x0.clone();
    }
    // Pull back toward the strictly feasible start until the margin
    // condition holds; the margin is concave in x.
    let m0 = scaled.scaled_margin(&x0);
    let mut theta = 0.0;
    loop {
        let xt: Vec<f64> = x.iter().zip(&x0).map(|(a, b)| (1.0 - theta) * a + theta * b).collect();
        if scaled.scaled_margin(&xt) >= 0.75 * cfg.margin.min(m0) {
            x = xt;
            break;
        }
        theta = if theta == 0.0 { 1e-6 } else { (theta * 4.0).min(1.0) };
        if theta >= 1.0 {
            x = x0.clone();
            break;
        }
    }
    let status = if run.converged() {
        SolveStatus::Feasible
    } else {
        SolveStatus::NumericalFailure
    };
    let mut sol = finish(p, x, status, iterations, feas.best_scaled_margin, run.accuracy)?;
    sol.objective = dot(c, &sol.x);
    Ok(sol)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn finish(
    p: &SdpProblem,
    x: Vec<f64>,
    status: SolveStatus,
    iterations: usize,
    best: Option<f64>,
    accuracy: f64,
) -> Result<SdpSolution> {
    let report = verify_solution(p, &x)?;
    let status = match status {
        SolveStatus::Feasible if !report.satisfied => SolveStatus::Marginal,
        s => s,
    };
    Ok(SdpSolution {
        status,
        objective: dot(&p.objective, &x),
        margin: report.margin,
        x,
        iterations,
        best_scaled_margin: best,
        accuracy,
    })
}

/// Block-normalized, variable-normalized copy of the problem.
struct Scaled {
    blocks: Vec<(Mat, Vec<(usize, Mat)>)>,
    var_scale: Vec<f64>,
}

impl Scaled {
    fn new(p: &SdpProblem, _cfg: &SolverConfig) -> Self {
        let mut blocks: Vec<(Mat, Vec<(usize, Mat)>)> = p
            .blocks
            .iter()
            .map(|b| {
                let w = 1.0 / (1.0 + spectral_norm(&b.constant));
                let coeffs = b
                    .coeffs
                    .iter()
                    .enumerate()
                    .filter_map(|(i, c)| c.as_ref().filter(|c| c.amax() > 0.0).map(|c| (i, c * w)))
                    .collect();
                (&b.constant * w, coeffs)
            })
            .collect();
        let mut var_scale = vec![1.0; p.num_vars];
        for (i, v) in var_scale.iter_mut().enumerate() {
            let norm = blocks
                .iter()
                .flat_map(|(_, cs)| cs.iter().filter(|(j, _)| *j == i).map(|(_, c)| c.norm()))
                .fold(0.0, f64::max);
            if norm > 0.0 {
                *v = 1.0 / norm;
            }
        }
        for (_, cs) in &mut blocks {
            for (i, c) in cs.iter_mut() {
                *c *= var_scale[*i];
            }
        }
        Self { blocks, var_scale }
    }

    fn unscale(&self, y: &[f64]) -> Vec<f64> {
        y.iter().zip(&self.var_scale).map(|(v, s)| v * s).collect()
    }

    fn scale_objective(&self, c: &[f64]) -> DVector<f64> {
        DVector::from_iterator(c.len(), c.iter().zip(&self.var_scale).map(|(v, s)| v * s))
    }

    /// Minimum over blocks of `−λ_max` of the normalized block at original-scale `x`.
    fn scaled_margin(&self, x: &[f64]) -> f64 {
        self.blocks
            .iter()
            .map(|(c0, cs)| {
                let mut m = c0.clone();
                for (i, c) in cs {
                    m += c * (x[*i] / self.var_scale[*i]);
                }
                -max_eigenvalue(&m)
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Standard-form data `Z_k = C_k − Σ yᵢ A_ki`. With `shift`, variable
    /// `s` (index `n`) enters every block as `−sI`; otherwise each block is
    /// shifted by the fixed `margin`.
    fn standard(&self, bound: f64, shift: Option<()>, margin: f64) -> Standard {
        let n = self.var_scale.len();
        let m = n + usize::from(shift.is_some());
        let mut blocks = Vec::new();
        for (c0, cs) in &self.blocks {
            let d = c0.nrows();
            let mut a: Vec<(usize, Mat)> = cs.clone();
            if shift.is_some() {
                a.push((n, -Mat::identity(d, d)));
            }
            let c = -c0 - Mat::identity(d, d) * margin;
            blocks.push(StdBlock { c, a });
        }
        for i in 0..m {
            for sign in [1.0, -1.0] {
                blocks.push(StdBlock {
                    c: Mat::from_element(1, 1, bound),
                    a: vec![(i, Mat::from_element(1, 1, sign))],
                });
            }
        }
        Standard {
            m,
            b: DVector::zeros(m),
            blocks,
        }
    }
}

struct StdBlock {
    c: Mat,
    a: Vec<(usize, Mat)>,
}

struct Standard {
    m: usize,
    b: DVector<f64>,
    blocks: Vec<StdBlock>,
}

struct IpmRun {
    y: DVector<f64>,
    /// Largest relative residual or gap at the returned iterate.
    accuracy: f64,
    iterations: usize,
}

impl IpmRun {
    fn converged(&self) -> bool {
        self.accuracy < ACCEPTABLE_ACCURACY
    }
}

/// Runs that stall above the requested tolerance are still accepted below this.
const ACCEPTABLE_ACCURACY: f64 = 1e-6;

fn frob(a: &Mat, b: &Mat) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

fn sym(m: Mat) -> Mat {
    (&m + m.transpose()) * 0.5
}

/// Largest step `α ≤ cap` keeping `X + αΔX ⪰ 0`, or `None` if `X` is not PD.
fn max_step(x: &Mat, dx: &Mat) -> Option<f64> {
    let chol = Cholesky::<f64, Dyn>::new(x.clone())?;
    let l = chol.l();
    let linv = l.clone().try_inverse()?;
    let w = sym(&linv * dx * linv.transpose());
    let lmin = w.symmetric_eigenvalues().min();
    Some(if lmin >= 0.0 { f64::INFINITY } else { -1.0 / lmin })
}

/// Infeasible-start primal-dual path following. `stop` sees every dual
/// iterate `y` and may end the run early.
fn ipm(p: &Standard, cfg: &SolverConfig, mut stop: impl FnMut(&[f64]) -> bool) -> IpmRun {
    let m = p.m;
    let total_dim: usize = p.blocks.iter().map(|b| b.c.nrows()).sum();
    let bnorm = p.b.norm();
    let cnorm = p.blocks.iter().map(|b| b.c.norm_squared()).sum::<f64>().sqrt();

    let mut xs: Vec<Mat> = Vec::with_capacity(p.blocks.len());
    let mut zs: Vec<Mat> = Vec::with_capacity(p.blocks.len());
    for blk in &p.blocks {
        let d = blk.c.nrows();
        let amax = blk.a.iter().map(|(_, a)| a.norm()).fold(0.0, f64::max);
        let xi = blk
            .a
            .iter()
            .map(|(i, a)| (1.0 + p.b[*i].abs()) / (1.0 + a.norm()))
            .fold(1.0, f64::max)
            * d as f64;
        let eta = (1.0 + amax.max(blk.c.norm())) / (d as f64).sqrt();
        xs.push(Mat::identity(d, d) * (10.0 * xi));
        zs.push(Mat::identity(d, d) * (10.0 * eta));
    }
    let mut y = DVector::zeros(m);

    let mut best = (y.clone(), f64::INFINITY);
    let mut stalled = 0;
    let mut iterations = 0;
    for iter in 0..cfg.max_iter {
        iterations = iter + 1;
        if stop(y.as_slice()) {
            return IpmRun {
                y,
                accuracy: 0.0,
                iterations,
            };
        }
        // Residuals.
        let mut rp = p.b.clone();
        let mut rd: Vec<Mat> = Vec::with_capacity(p.blocks.len());
        let mut gap_sum = 0.0;
        let mut pobj = 0.0;
        for (k, blk) in p.blocks.iter().enumerate() {
            let mut r = &blk.c - &zs[k];
            for (i, a) in &blk.a {
                r -= a * y[*i];
                rp[*i] -= frob(a, &xs[k]);
            }
            rd.push(r);
            gap_sum += frob(&xs[k], &zs[k]);
            pobj += frob(&blk.c, &xs[k]);
        }
        let dobj = p.b.dot(&y);
        let mu = gap_sum / total_dim as f64;
        // Relative to the size of the terms that produce 𝒜(X).
        let xnorm: f64 = xs.iter().map(|x| x.norm()).sum();
        let pinf = rp.norm() / (1.0 + bnorm + xnorm);
        let dinf = rd.iter().map(|r| r.norm_squared()).sum::<f64>().sqrt() / (1.0 + cnorm);
        let rel_gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
        let merit = pinf.max(dinf).max(rel_gap);
        if merit < best.1 {
            best = (y.clone(), merit);
            stalled = 0;
        } else {
            stalled += 1;
        }
        if merit < cfg.tol || stalled >= 6 {
            break;
        }

        let zchol: Vec<Cholesky<f64, Dyn>> =
            match zs.iter().map(|z| Cholesky::new(z.clone())).collect::<Option<Vec<_>>>() {
                Some(v) => v,
                None => break,
            };

        // Schur complement M_ij = Σ_k tr(A_ki Z⁻¹ A_kj X), formed as the Gram
        // matrix of U_ki = L_z⁻¹ A_ki L_x.
        let mut schur = Mat::zeros(m, m);
        for (k, blk) in p.blocks.iter().enumerate() {
            let Some(lx) = Cholesky::<f64, Dyn>::new(xs[k].clone()).map(|c| c.unpack()) else {
                break;
            };
            let lz = zchol[k].l();
            let us: Vec<Mat> = blk
                .a
                .iter()
                .map(|(_, a)| lz.solve_lower_triangular(&(a * &lx)).unwrap_or_else(|| a * &lx))
                .collect();
            for (u, (i, _)) in us.iter().zip(&blk.a) {
                for (v, (j, _)) in us.iter().zip(&blk.a) {
                    if j <= i {
                        schur[(*i, *j)] += frob(u, v);
                    }
                }
            }
        }
        for i in 0..m {
            for j in 0..i {
                schur[(j, i)] = schur[(i, j)];
            }
        }
        let schur = sym(schur);
        let chol = match Cholesky::<f64, Dyn>::new(schur.clone()) {
            Some(c) => c,
            None => {
                let reg = 1e-12 * (1.0 + schur.diagonal().amax());
                match Cholesky::<f64, Dyn>::new(&schur + Mat::identity(m, m) * reg) {
                    Some(c) => c,
                    None => break,
                }
            }
        };

        let direction = |sigma_mu: f64, corr: Option<(&[Mat], &[Mat])>| {
            let mut g: Vec<Mat> = Vec::with_capacity(p.blocks.len());
            let mut rhs = rp.clone();
            for (k, blk) in p.blocks.iter().enumerate() {
                let mut inner = Mat::identity(xs[k].nrows(), xs[k].nrows()) * sigma_mu - &rd[k] * &xs[k];
                if let Some((dz, dx)) = corr {
                    inner -= &dz[k] * &dx[k];
                }
                let gk = zchol[k].solve(&inner) - &xs[k];
                for (i, a) in &blk.a {
                    rhs[*i] -= frob(a, &gk);
                }
                g.push(gk);
            }
            let mut dy = chol.solve(&rhs);
            dy += chol.solve(&(&rhs - &schur * &dy));
            let mut dzs = Vec::with_capacity(p.blocks.len());
            let mut dxs = Vec::with_capacity(p.blocks.len());
            for (k, blk) in p.blocks.iter().enumerate() {
                let mut aty = Mat::zeros(blk.c.nrows(), blk.c.nrows());
                for (i, a) in &blk.a {
                    aty += a * dy[*i];
                }
                let dz = sym(&rd[k] - &aty);
                let dx = sym(&g[k] + zchol[k].solve(&(&aty * &xs[k])));
                dzs.push(dz);
                dxs.push(dx);
            }
            (dy, dxs, dzs)
        };
        let steps = |dxs: &[Mat], dzs: &[Mat]| -> Option<(f64, f64)> {
            let mut ap = f64::INFINITY;
            let mut ad = f64::INFINITY;
            for k in 0..p.blocks.len() {
                ap = ap.min(max_step(&xs[k], &dxs[k])?);
                ad = ad.min(max_step(&zs[k], &dzs[k])?);
            }
            Some((ap, ad))
        };

        // Predictor.
        let (_, dxa, dza) = direction(0.0, None);
        let Some((apa, ada)) = steps(&dxa, &dza) else { break };
        let (apa, ada) = (apa.min(1.0), ada.min(1.0));
        let mut mu_aff = 0.0;
        for k in 0..p.blocks.len() {
            mu_aff += frob(&(&xs[k] + &dxa[k] * apa), &(&zs[k] + &dza[k] * ada));
        }
        mu_aff /= total_dim as f64;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        // Corrector.
        let (dy, dxs, dzs) = direction(sigma * mu, Some((&dza, &dxa)));
        let Some((ap, ad)) = steps(&dxs, &dzs) else { break };
        let ap = (0.95 * ap).min(1.0);
        let ad = (0.95 * ad).min(1.0);
        for k in 0..p.blocks.len() {
            xs[k] += &dxs[k] * ap;
            zs[k] += &dzs[k] * ad;
        }
        y += dy * ad;
        if !y.iter().all(|v| v.is_finite()) {
            break;
        }
    }
    let (y, accuracy) = best;
    if stop(y.as_slice()) {
        return IpmRun {
            y,
            accuracy: 0.0,
            iterations,
        };
    }
    IpmRun {
        y,
        accuracy,
        iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lmi::{petersen_absorb_numeric, AffineMatrixInequality};

    fn single(constant: Mat, coeffs: Vec<Option<Mat>>) -> SdpProblem {
        let n = coeffs.len();
        SdpProblem::new(
            n,
            vec![SdpBlock {
                name: "b".into(),
                constant,
                coeffs,
            }],
            1e-7,
        )
        .unwrap()
    }

    #[test]
    fn trivially_feasible_block() {
        let p = single(-Mat::identity(2, 2), vec![Some(Mat::zeros(2, 2))]);
        let s = solve_feasibility(&p, &SolverConfig::default()).unwrap();
        assert_eq!(s.status, SolveStatus::Feasible);
        assert!((s.margin - 1.0).abs() < 1e-9);
    }

    #[test]
    fn positive_block_is_infeasible() {
        let p = single(Mat::identity(2, 2), vec![Some(Mat::zeros(2, 2))]);
        let s = solve_feasibility(&p, &SolverConfig::default()).unwrap();
        assert_eq!(s.status, SolveStatus::Infeasible);
    }

    #[test]
    fn variable_free_problem_margin() {
        let p = single(-Mat::identity(3, 3), vec![]);
        let r = verify_solution(&p, &[]).unwrap();
        assert_eq!(r.margin, 1.0);
        assert!(r.satisfied);
    }

    #[test]
    fn minimize_with_lower_bound() {
        // blocks: −t ⪯ 0 and t0 − t ⪯ 0 → t* = t0
        let t0 = 2.5;
        let p = SdpProblem::new(
            1,
            vec![
                SdpBlock {
                    name: "pos".into(),
                    constant: Mat::zeros(1, 1),
                    coeffs: vec![Some(-Mat::identity(1, 1))],
                },
                SdpBlock {
                    name: "lb".into(),
                    constant: Mat::from_element(1, 1, t0),
                    coeffs: vec![Some(-Mat::identity(1, 1))],
                },
            ],
            1e-7,
        )
        .unwrap();
        let s = minimize_linear(&p, &[1.0], &SolverConfig::default()).unwrap();
        assert_eq!(s.status, SolveStatus::Feasible);
        assert!((s.x[0] - t0).abs() < 1e-5 * t0, "t = {}", s.x[0]);
        assert!(verify_solution(&p, &s.x).unwrap().satisfied);
    }

    #[test]
    fn eigenvalue_minimization_matches_closed_form() {
        // min t s.t. A − tI ⪯ 0 → t* = λ_max(A)
        let a = Mat::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 3.0, -1.0, 0.0, -1.0, 0.5]);
        let lmax = a.clone().symmetric_eigenvalues().max();
        let p = single(a, vec![Some(-Mat::identity(3, 3))]);
        let s = minimize_linear(&p, &[1.0], &SolverConfig::default()).unwrap();
        assert_eq!(s.status, SolveStatus::Feasible);
        assert!((s.x[0] - lmax).abs() < 1e-5 * lmax.abs());
    }

    #[test]
    fn petersen_instance_is_marginal() {
        // G = −2I, M = e₁, N = e₁ᵀ: the absorbed form touches zero only at ε = 1
        let g = Mat::identity(2, 2) * -2.0;
        let m = Mat::from_row_slice(2, 1, &[1.0, 0.0]);
        let n = Mat::from_row_slice(1, 2, &[1.0, 0.0]);
        let ami: AffineMatrixInequality = petersen_absorb_numeric(&g, &m, &n).unwrap();
        let p = SdpProblem::from_ami(&ami, 1e-7).unwrap();
        let s = solve_feasibility(&p, &SolverConfig::default()).unwrap();
        assert_ne!(s.status, SolveStatus::Feasible);
        let g = Mat::identity(2, 2) * -3.0;
        let ami = petersen_absorb_numeric(&g, &m, &n).unwrap();
        let s = solve_feasibility(&SdpProblem::from_ami(&ami, 1e-7).unwrap(), &SolverConfig::default()).unwrap();
        assert_eq!(s.status, SolveStatus::Feasible);
    }

    #[test]
    fn feasible_solutions_verify_independently() {
        // Lyapunov inequality AᵀPA − P ≺ 0, −P ≺ 0 for a stable A.
        let a = Mat::from_row_slice(2, 2, &[0.5, 0.4, -0.3, 0.7]);
        let mut coeffs = Vec::new();
        let mut pos = Vec::new();
        for (i, j) in [(0, 0), (0, 1), (1, 1)] {
            let mut e = Mat::zeros(2, 2);
            e[(i, j)] = 1.0;
            e[(j, i)] = 1.0;
            coeffs.push(Some(a.transpose() * &e * &a - &e));
            pos.push(Some(-e));
        }
        let p = SdpProblem::new(
            3,
            vec![
                SdpBlock {
                    name: "lyap".into(),
                    constant: Mat::zeros(2, 2),
                    coeffs,
                },
                SdpBlock {
                    name: "pos".into(),
                    constant: Mat::zeros(2, 2),
                    coeffs: pos,
                },
            ],
            1e-7,
        )
        .unwrap();
        let s = solve_feasibility(&p, &SolverConfig::default()).unwrap();
        assert_eq!(s.status, SolveStatus::Feasible);
        let r = verify_solution(&p, &s.x).unwrap();
        assert!(r.satisfied);
        let noisy: Vec<f64> =
            s.x.iter()
                .enumerate()
                .map(|(i, v)| v + if i == 1 { 1e3 } else { 0.0 })
                .collect();
        assert!(!verify_solution(&p, &noisy).unwrap().satisfied);
    }

    #[test]
    fn unbounded_objective_flagged() {
        // −I + x·0 ⪯ 0 with objective x: any x works
        let p = single(-Mat::identity(1, 1), vec![Some(Mat::zeros(1, 1))]);
        assert!(minimize_linear(&p, &[1.0], &SolverConfig::default()).is_err());
    }

    #[test]
    fn asymmetric_block_rejected() {
        let c = Mat::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(SdpProblem::new(
            0,
            vec![SdpBlock {
                name: "b".into(),
                constant: c,
                coeffs: vec![]
            }],
            1e-7
        )
        .is_err());
    }
}
