//! Assembly of the bounded-real and synthesis inequalities as affine maps
//! from named decision variables to symmetric block matrices.
//!
//! Every inequality is stored as a list of diagonal blocks, each meaning
//! `block(x) ≺ 0`. The main block comes first, followed by `−L ≺ 0` and,
//! when the multiplier is present, `−ε ≺ 0`.
//!
//! Block sizes always follow operand shapes. The analysis inequality has
//! row blocks `(r, n, q, r, p)`; the synthesis inequality is written for the
//! dual closed loop and has row blocks `(r, n, p, r, q)`.

mod affine;

pub use affine::{AffineExpr, Symmetry, VarBlock, VariableLayout};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{numerical_rank, Mat, SvdEquivalentForm, UncertainPlant, DEFAULT_RANK_TOL};

/// How `γ` enters: as a constant or through the decision variable `t = γ²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GammaSpec {
    Fixed(f64),
    Minimize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AmiBlock {
    pub name: String,
    pub expr: AffineExpr,
}

/// `F₀ + Σ xᵢ Fᵢ ≺ 0`, block-diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineMatrixInequality {
    pub layout: VariableLayout,
    pub blocks: Vec<AmiBlock>,
}

impl AffineMatrixInequality {
    pub fn dimension(&self) -> usize {
        self.blocks.iter().map(|b| b.expr.rows).sum()
    }

    pub fn num_vars(&self) -> usize {
        self.layout.count()
    }

    pub fn main(&self) -> &AffineExpr {
        &self.blocks[0].expr
    }

    pub fn eval_blocks(&self, x: &[f64]) -> Vec<Mat> {
        self.blocks.iter().map(|b| b.expr.eval(x)).collect()
    }

    /// `−max_k λ_max(block_k(x))`.
    pub fn margin(&self, x: &[f64]) -> f64 {
        self.eval_blocks(x)
            .iter()
            .map(|m| -max_eigenvalue(m))
            .fold(f64::INFINITY, f64::min)
    }

    /// Scalar index of the `t = γ²` variable, when minimizing.
    pub fn t_index(&self) -> Option<usize> {
        self.layout.find("t").map(|b| b.offset)
    }

    /// Dense debug dump: dimension, variable layout and every coefficient
    /// matrix of every block.
    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct BlockDump<'a> {
            name: &'a str,
            size: usize,
            constant: Vec<Vec<f64>>,
            coefficients: Vec<Vec<Vec<f64>>>,
        }
        let n = self.num_vars();
        let blocks: Vec<BlockDump> = self
            .blocks
            .iter()
            .map(|b| BlockDump {
                name: &b.name,
                size: b.expr.rows,
                constant: rows_of(&b.expr.constant),
                coefficients: (0..n)
                    .map(|i| match &b.expr.coeffs[i] {
                        Some(c) => rows_of(c),
                        None => rows_of(&Mat::zeros(b.expr.rows, b.expr.cols)),
                    })
                    .collect(),
            })
            .collect();
        serde_json::json!({
            "dimension": self.dimension(),
            "num_vars": n,
            "variables": self.layout.blocks,
            "blocks": blocks,
        })
    }
}

pub(crate) fn rows_of(m: &Mat) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

pub fn max_eigenvalue(m: &Mat) -> f64 {
    if m.is_empty() {
        return f64::NEG_INFINITY;
    }
    m.clone().symmetric_eigenvalues().max()
}

/// Decision variables `L, Q, R, S` (+ `Z`, `ε`, `t`) and the structured
/// matrices built from them.
struct Vars {
    layout: VariableLayout,
    r: usize,
    n: usize,
}

impl Vars {
    fn new(r: usize, n: usize, z_cols: Option<usize>, eps: bool, gamma: GammaSpec) -> Self {
        let mut layout = VariableLayout::new();
        layout
            .add("L", r, r, Symmetry::Symmetric)
            .add("Q", r, r, Symmetry::Full)
            .add("R", r, n - r, Symmetry::Full)
            .add("S", n - r, n - r, Symmetry::Full);
        if let Some(m) = z_cols {
            layout.add("Z", n, m, Symmetry::Full);
        }
        if eps {
            layout.add("eps", 1, 1, Symmetry::Full);
        }
        if gamma == GammaSpec::Minimize {
            layout.add("t", 1, 1, Symmetry::Full);
        }
        Self { layout, r, n }
    }

    fn nv(&self) -> usize {
        self.layout.count()
    }

    fn zeros(&self, rows: usize, cols: usize) -> AffineExpr {
        AffineExpr::zeros(rows, cols, self.nv())
    }

    fn konst(&self, m: &Mat) -> AffineExpr {
        AffineExpr::constant(m.clone(), self.nv())
    }

    fn var(&self, name: &str) -> AffineExpr {
        self.layout.expr(name)
    }

    /// `Γ = [Q R]`.
    fn gamma_mat(&self) -> AffineExpr {
        AffineExpr::block(&[vec![self.var("Q"), self.var("R")]])
    }

    /// `Π = diag(0, S)`.
    fn pi(&self) -> AffineExpr {
        let (r, nr) = (self.r, self.n - self.r);
        AffineExpr::block(&[
            vec![self.zeros(r, r), self.zeros(r, nr)],
            vec![self.zeros(nr, r), self.var("S")],
        ])
    }

    /// `Θ = diag(L, 0)`.
    fn theta(&self) -> AffineExpr {
        let (r, nr) = (self.r, self.n - self.r);
        AffineExpr::block(&[
            vec![self.var("L"), self.zeros(r, nr)],
            vec![self.zeros(nr, r), self.zeros(nr, nr)],
        ])
    }

    /// `−½Q − ½Qᵀ`.
    fn corner11(&self) -> AffineExpr {
        self.var("Q").sym().scale(-0.5)
    }

    /// `L − Q − ½Qᵀ`.
    fn corner41(&self) -> AffineExpr {
        let q = self.var("Q");
        self.var("L").sub(&q).sub(&q.transpose().scale(0.5))
    }

    fn neg_gamma_sq(&self, dim: usize, gamma: GammaSpec) -> AffineExpr {
        match gamma {
            GammaSpec::Fixed(g) => self.konst(&(Mat::identity(dim, dim) * (-g * g))),
            GammaSpec::Minimize => {
                AffineExpr::scaled_var(self.layout.scalar_index("t"), -Mat::identity(dim, dim), self.nv())
            }
        }
    }

    fn side_blocks(&self, eps: bool) -> Vec<AmiBlock> {
        let mut out = vec![AmiBlock {
            name: "L_pos".into(),
            expr: self.var("L").scale(-1.0),
        }];
        if eps {
            out.push(AmiBlock {
                name: "eps_pos".into(),
                expr: self.var("eps").scale(-1.0),
            });
        }
        out
    }

    /// Stacks column blocks `(r, n, ·, r, ·)` into one column.
    fn column(&self, parts: [AffineExpr; 5]) -> AffineExpr {
        let rows: Vec<Vec<AffineExpr>> = parts.into_iter().map(|p| vec![p]).collect();
        AffineExpr::block(&rows)
    }
}

fn check_gamma(gamma: GammaSpec) -> Result<()> {
    if let GammaSpec::Fixed(g) = gamma {
        if !(g > 0.0 && g.is_finite()) {
            return Err(Error::InvalidInput(format!("gamma must be positive, got {g}")));
        }
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidInput(format!("alpha must be nonnegative, got {alpha}")));
    }
    Ok(())
}

/// The 5x5 block matrix of the modified bounded real lemma for the nominal
/// realization `(A_d, B_d, C_d, D)` in equivalent-form coordinates.
fn brl_matrix(v: &Vars, ad: &Mat, bd: &Mat, cd: &Mat, dd: &Mat, gamma: GammaSpec, alpha: f64) -> AffineExpr {
    let (r, q, p) = (v.r, bd.ncols(), cd.nrows());
    let gm = v.gamma_mat();
    let pi = v.pi();
    let phi22 = pi.mul_right(ad).sym().sub(&v.theta());
    let phi52 = v.konst(cd).add(&pi.mul_left(cd).mul_right(ad).scale(alpha));
    let phi53 = v.konst(dd).add(&pi.mul_left(cd).mul_right(bd).scale(alpha));
    AffineExpr::symmetric_block(&[
        vec![v.corner11()],
        vec![gm.mul_right(ad).transpose(), phi22],
        vec![
            gm.mul_right(bd).transpose(),
            pi.mul_right(bd).transpose(),
            v.neg_gamma_sq(q, gamma),
        ],
        vec![
            v.corner41(),
            gm.mul_right(ad),
            gm.mul_right(bd),
            v.var("Q").sym().scale(-1.0),
        ],
        vec![
            v.zeros(p, r),
            phi52,
            phi53,
            v.zeros(p, r),
            v.konst(&-Mat::identity(p, p)),
        ],
    ])
}

/// Modified bounded real lemma for the nominal plant in equivalent form.
/// Variables `(L, Q, R, S)`; row blocks `(r, n, q, r, p)`.
pub fn assemble_nominal_brl(form: &SvdEquivalentForm, gamma: f64, alpha: f64) -> Result<AffineMatrixInequality> {
    check_gamma(GammaSpec::Fixed(gamma))?;
    check_alpha(alpha)?;
    let v = Vars::new(form.r, form.n(), None, false, GammaSpec::Fixed(gamma));
    let main = brl_matrix(
        &v,
        &form.a_d,
        &form.bw_d,
        &form.c_d,
        &form.dw_d,
        GammaSpec::Fixed(gamma),
        alpha,
    );
    let mut blocks = vec![AmiBlock {
        name: "main".into(),
        expr: main,
    }];
    blocks.extend(v.side_blocks(false));
    Ok(AffineMatrixInequality {
        layout: v.layout,
        blocks,
    })
}

/// `[G + εNᵀN, M; Mᵀ, −εI]`, the linear form of `G + εMMᵀ... ⪯ 0` obtained
/// from the norm-bounded S-procedure and a Schur complement. `eps` is the
/// scalar index of `ε` in the expressions' layout.
pub fn petersen_absorb(g: &AffineExpr, m: &AffineExpr, n: &Mat, eps: usize) -> Result<AffineExpr> {
    if m.is_zero() || n.iter().all(|&v| v == 0.0) {
        return Err(Error::InvalidInput("Petersen absorption needs nonzero M and N".into()));
    }
    absorb(g, m, n, eps)
}

fn absorb(g: &AffineExpr, m: &AffineExpr, n: &Mat, eps: usize) -> Result<AffineExpr> {
    if g.rows != g.cols || m.rows != g.rows || n.ncols() != g.rows || n.nrows() != m.cols {
        return Err(Error::Dimension(format!(
            "G {}x{}, M {}x{}, N {}x{}",
            g.rows,
            g.cols,
            m.rows,
            m.cols,
            n.nrows(),
            n.ncols()
        )));
    }
    let nv = g.nvars();
    let k = m.cols;
    let ntn = AffineExpr::scaled_var(eps, n.transpose() * n, nv);
    let neg_eps = AffineExpr::scaled_var(eps, -Mat::identity(k, k), nv);
    Ok(AffineExpr::symmetric_block(&[
        vec![g.add(&ntn)],
        vec![m.transpose(), neg_eps],
    ]))
}

/// Single-variable form of [`petersen_absorb`] for a constant `G`:
/// variable `ε` only, blocks `[G + εNᵀN, M; Mᵀ, −εI] ⪯ 0` and `−ε ≺ 0`.
pub fn petersen_absorb_numeric(g: &Mat, m: &Mat, n: &Mat) -> Result<AffineMatrixInequality> {
    let mut layout = VariableLayout::new();
    layout.add("eps", 1, 1, Symmetry::Full);
    let main = petersen_absorb(
        &AffineExpr::constant(g.clone(), 1),
        &AffineExpr::constant(m.clone(), 1),
        n,
        0,
    )?;
    let eps_pos = layout.expr("eps").scale(-1.0);
    Ok(AffineMatrixInequality {
        layout,
        blocks: vec![
            AmiBlock {
                name: "main".into(),
                expr: main,
            },
            AmiBlock {
                name: "eps_pos".into(),
                expr: eps_pos,
            },
        ],
    })
}

/// Uncertainty factors of the analysis inequality: `M₁` (affine, `N x 4s`)
/// and `N₁` (constant, `4s x N`) with row blocks `(r, n, q, r, p)`.
fn analysis_factors(v: &Vars, f: &SvdEquivalentForm) -> (AffineExpr, Mat) {
    let (r, n, q, p, s) = (v.r, v.n, f.q(), f.p(), f.s);
    let gm = v.gamma_mat();
    let pi = v.pi();
    let rank_one = |m: &Mat| -> AffineExpr {
        v.column([
            gm.mul_right(m),
            pi.mul_right(m),
            v.zeros(q, s),
            gm.mul_right(m),
            v.zeros(p, s),
        ])
    };
    let output =
        |m: &Mat| -> AffineExpr { v.column([v.zeros(r, s), v.zeros(n, s), v.zeros(q, s), v.zeros(r, s), v.konst(m)]) };
    let m1 = AffineExpr::block(&[vec![
        rank_one(&f.ma_d),
        rank_one(&f.mb_d),
        output(&f.mc_d),
        output(&f.md),
    ]]);
    let dim = 2 * r + n + q + p;
    let mut n1 = Mat::zeros(4 * s, dim);
    n1.view_mut((0, r), (s, n)).copy_from(&f.na_d);
    n1.view_mut((s, r + n), (s, q)).copy_from(&f.nb_d);
    n1.view_mut((2 * s, r), (s, n)).copy_from(&f.nc_d);
    n1.view_mut((3 * s, r + n), (s, q)).copy_from(&f.nd);
    (m1, n1)
}

/// The `α = 0` lemma matrix `Σ` and the factors `(M₁, N₁)` for the
/// uncertain plant, sharing one layout `(L, Q, R, S, ε[, t])`. Exposed so
/// the robust inequality can be rebuilt from its ingredients.
pub fn robust_brl_parts(
    form: &SvdEquivalentForm,
    gamma: GammaSpec,
) -> Result<(VariableLayout, AffineExpr, AffineExpr, Mat)> {
    check_gamma(gamma)?;
    let v = Vars::new(form.r, form.n(), None, true, gamma);
    let sigma = brl_matrix(&v, &form.a_d, &form.bw_d, &form.c_d, &form.dw_d, gamma, 0.0);
    let (m1, n1) = analysis_factors(&v, form);
    Ok((v.layout, sigma, m1, n1))
}

/// Robust bounded real lemma: `[Σ + εN₁ᵀN₁, M₁; M₁ᵀ, −εI₄ₛ] ≺ 0`,
/// variables `(L, Q, R, S, ε[, t])`. `Bu` is ignored.
pub fn assemble_robust_brl(form: &SvdEquivalentForm, gamma: GammaSpec) -> Result<AffineMatrixInequality> {
    let (layout, sigma, m1, n1) = robust_brl_parts(form, gamma)?;
    let v = Vars {
        layout,
        r: form.r,
        n: form.n(),
    };
    let eps = v.layout.scalar_index("eps");
    let main = absorb(&sigma, &m1, &n1, eps)?;
    let mut blocks = vec![AmiBlock {
        name: "main".into(),
        expr: main,
    }];
    blocks.extend(v.side_blocks(true));
    Ok(AffineMatrixInequality {
        layout: v.layout,
        blocks,
    })
}

/// `Λ` of the synthesis inequality: the lemma applied to the dual closed
/// loop after the change of variables `[Q R; 0 S] F_dᵀ = Z`.
fn synthesis_lambda(v: &Vars, f: &SvdEquivalentForm, gamma: GammaSpec, alpha: f64) -> AffineExpr {
    let (r, n, q, p) = (v.r, v.n, f.q(), f.p());
    let ad_t = f.a_d.transpose();
    let bud_t = f.bu_d.transpose();
    let gm = v.gamma_mat();
    let pi = v.pi();
    let z = v.var("Z");
    let mut phi = Mat::zeros(n, n);
    let mut omega = Mat::zeros(r, n);
    for i in r..n {
        phi[(i, i)] = 1.0;
    }
    for i in 0..r {
        omega[(i, i)] = 1.0;
    }
    // Λ21 = A_d Γᵀ + B_ud Zᵀ Ωᵀ
    let l21 = gm
        .transpose()
        .mul_left(&f.a_d)
        .add(&z.transpose().mul_right(&omega.transpose()).mul_left(&f.bu_d));
    // Λ22 = Π A_dᵀ + A_d Πᵀ + Φ Z B_udᵀ + B_ud Zᵀ Φᵀ − Θ
    let phi_z_bu = z.mul_left(&phi).mul_right(&bud_t);
    let l22 = pi.mul_right(&ad_t).sym().add(&phi_z_bu.sym()).sub(&v.theta());
    let l31 = gm.transpose().mul_left(&f.c_d);
    let l32 = pi.transpose().mul_left(&f.c_d);
    let l41 = v.corner41();
    let bwd_t = f.bw_d.transpose();
    // Λ52 = B_wdᵀ + α B_wdᵀ Π A_dᵀ + α B_wdᵀ Φᵀ Z B_udᵀ
    let l52 = v
        .konst(&bwd_t)
        .add(&pi.mul_left(&bwd_t).mul_right(&ad_t).scale(alpha))
        .add(&phi_z_bu.mul_left(&bwd_t).scale(alpha));
    // Λ53 = D_wᵀ + α B_wdᵀ Π C_dᵀ
    let l53 = v
        .konst(&f.dw_d.transpose())
        .add(&pi.mul_left(&bwd_t).mul_right(&f.c_d.transpose()).scale(alpha));
    AffineExpr::symmetric_block(&[
        vec![v.corner11()],
        vec![l21.clone(), l22],
        vec![l31.clone(), l32, v.neg_gamma_sq(p, gamma)],
        vec![l41, l21.transpose(), l31.transpose(), v.var("Q").sym().scale(-1.0)],
        vec![v.zeros(q, r), l52, l53, v.zeros(q, r), v.konst(&-Mat::identity(q, q))],
    ])
}

/// Factors of the synthesis inequality: `N₂` (affine, `N x 4s`) and `M₂`
/// (constant, `4s x N`), row blocks `(r, n, p, r, q)`.
fn synthesis_factors(v: &Vars, f: &SvdEquivalentForm, alpha_path: Option<f64>) -> (AffineExpr, Mat) {
    let (r, n, q, p, s) = (v.r, v.n, f.q(), f.p(), f.s);
    let gm = v.gamma_mat();
    let pi = v.pi();
    let rank_one = |m: &Mat| -> AffineExpr {
        v.column([
            gm.mul_right(m),
            pi.mul_right(m),
            v.zeros(p, s),
            gm.mul_right(m),
            v.zeros(q, s),
        ])
    };
    let output =
        |e: AffineExpr| -> AffineExpr { v.column([v.zeros(r, s), v.zeros(n, s), v.zeros(p, s), v.zeros(r, s), e]) };
    let na_t = f.na_d.transpose();
    let dim = 2 * r + n + q + p;
    let mut m2 = Mat::zeros(4 * s, dim);
    let n2 = match alpha_path {
        None => {
            m2.view_mut((0, r), (s, n)).copy_from(&f.ma_d.transpose());
            m2.view_mut((s, r + n), (s, p)).copy_from(&f.mc_d.transpose());
            m2.view_mut((2 * s, r), (s, n)).copy_from(&f.mb_d.transpose());
            m2.view_mut((3 * s, r + n), (s, p)).copy_from(&f.md.transpose());
            AffineExpr::block(&[vec![
                rank_one(&na_t),
                rank_one(&f.nc_d.transpose()),
                output(v.konst(&f.nb_d.transpose())),
                output(v.konst(&f.nd.transpose())),
            ]])
        }
        Some(alpha) => {
            m2.view_mut((0, r), (s, n)).copy_from(&f.ma_d.transpose());
            // The α-term of Λ52 carries Δ through its own factor pair; at
            // α = 0 the pair is void and is dropped.
            if alpha > 0.0 {
                m2.view_mut((2 * s, r), (s, n)).copy_from(&f.ma_d.transpose());
            }
            let bwd_t = f.bw_d.transpose();
            let alpha_col = pi.mul_left(&bwd_t).mul_right(&na_t).scale(alpha);
            AffineExpr::block(&[vec![
                rank_one(&na_t),
                v.zeros(dim, s),
                output(alpha_col),
                v.zeros(dim, s),
            ]])
        }
    };
    (n2, m2)
}

fn synthesis_program(
    form: &SvdEquivalentForm,
    gamma: GammaSpec,
    alpha_path: Option<f64>,
) -> Result<AffineMatrixInequality> {
    check_gamma(gamma)?;
    if form.m() == 0 {
        return Err(Error::Dimension(
            "synthesis needs a control input (Bu has no columns)".into(),
        ));
    }
    let alpha = alpha_path.unwrap_or(0.0);
    let v = Vars::new(form.r, form.n(), Some(form.m()), true, gamma);
    let lambda = synthesis_lambda(&v, form, gamma, alpha);
    let (n2, m2) = synthesis_factors(&v, form, alpha_path);
    let main = absorb(&lambda, &n2, &m2, v.layout.scalar_index("eps"))?;
    let mut blocks = vec![AmiBlock {
        name: "main".into(),
        expr: main,
    }];
    blocks.extend(v.side_blocks(true));
    Ok(AffineMatrixInequality {
        layout: v.layout,
        blocks,
    })
}

/// State-feedback synthesis inequality `[Λ + εM₂ᵀM₂, N₂; N₂ᵀ, −εI₄ₛ] ≺ 0`
/// in `(L, Q, R, S, Z, ε[, t])`.
pub fn assemble_synthesis(form: &SvdEquivalentForm, gamma: GammaSpec) -> Result<AffineMatrixInequality> {
    synthesis_program(form, gamma, None)
}

/// Synthesis inequality with the `α`-terms retained; only valid when the
/// uncertainty is confined to `A`.
pub fn assemble_synthesis_alpha(
    form: &SvdEquivalentForm,
    gamma: GammaSpec,
    alpha: f64,
) -> Result<AffineMatrixInequality> {
    check_alpha(alpha)?;
    let zero = |m: &Mat| m.iter().all(|&x| x == 0.0);
    let only_a = (zero(&form.mb_d) || zero(&form.nb_d))
        && (zero(&form.mc_d) || zero(&form.nc_d))
        && (zero(&form.md) || zero(&form.nd));
    if !only_a {
        return Err(Error::InvalidAlphaPath("uncertainty must be confined to A".into()));
    }
    synthesis_program(form, gamma, Some(alpha))
}

/// `rank Eᵀ = rank [Eᵀ Cᵀ N_Cᵀ]` and `rank E = rank [E Bw MB]`.
pub fn check_nonconservative_ranks(up: &UncertainPlant) -> bool {
    let p = &up.plant;
    let rank_e = numerical_rank(&p.e, DEFAULT_RANK_TOL);
    let hcat = |parts: &[&Mat]| -> Mat {
        let rows = parts[0].nrows();
        let cols = parts.iter().map(|m| m.ncols()).sum();
        let mut out = Mat::zeros(rows, cols);
        let mut c = 0;
        for m in parts {
            out.view_mut((0, c), (rows, m.ncols())).copy_from(m);
            c += m.ncols();
        }
        out
    };
    let left = hcat(&[&p.e.transpose(), &p.c.transpose(), &up.nc.transpose()]);
    let right = hcat(&[&p.e, &p.bw, &up.mb]);
    numerical_rank(&left, DEFAULT_RANK_TOL) == rank_e && numerical_rank(&right, DEFAULT_RANK_TOL) == rank_e
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::example;
    use crate::model::{DescriptorPlant, UncertaintyFactors};

    fn form() -> SvdEquivalentForm {
        SvdEquivalentForm::new(&example::plant(), DEFAULT_RANK_TOL).unwrap()
    }

    fn assert_symmetric(ami: &AffineMatrixInequality) {
        for b in &ami.blocks {
            assert_eq!(b.expr.constant, b.expr.constant.transpose());
            for c in b.expr.coeffs.iter().flatten() {
                assert_eq!(c, &c.transpose());
            }
        }
    }

    #[test]
    fn layout_count_formula() {
        let f = form();
        let (n, r, m) = (3, 2, 1);
        let ami = assemble_synthesis(&f, GammaSpec::Minimize).unwrap();
        assert_eq!(
            ami.num_vars(),
            r * (r + 1) / 2 + r * r + r * (n - r) + (n - r) * (n - r) + n * m + 1 + 1
        );
        let ami = assemble_robust_brl(&f, GammaSpec::Fixed(2.0)).unwrap();
        assert_eq!(
            ami.num_vars(),
            r * (r + 1) / 2 + r * r + r * (n - r) + (n - r) * (n - r) + 1
        );
    }

    #[test]
    fn robust_brl_dimensions_for_example() {
        let ami = assemble_robust_brl(&form(), GammaSpec::Fixed(2.1)).unwrap();
        assert_eq!(ami.main().rows, (2 + 3 + 2 + 2 + 1) + 4);
        assert_symmetric(&ami);
    }

    #[test]
    fn synthesis_dimensions_and_symmetry() {
        let ami = assemble_synthesis(&form(), GammaSpec::Minimize).unwrap();
        // (r, n, p, r, q) + 4s
        assert_eq!(ami.main().rows, (2 + 3 + 1 + 2 + 2) + 4);
        assert_symmetric(&ami);
        let ami = assemble_synthesis_alpha(&form(), GammaSpec::Fixed(1.2), 1000.0).unwrap();
        assert_symmetric(&ami);
    }

    #[test]
    fn assembly_is_deterministic() {
        let a = assemble_synthesis_alpha(&form(), GammaSpec::Minimize, 37.5).unwrap();
        let b = assemble_synthesis_alpha(&form(), GammaSpec::Minimize, 37.5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn alpha_zero_matches_plain_synthesis() {
        let a = assemble_synthesis_alpha(&form(), GammaSpec::Minimize, 0.0).unwrap();
        let b = assemble_synthesis(&form(), GammaSpec::Minimize).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn alpha_path_rejects_uncertainty_outside_a() {
        let up = example::plant();
        let bad = UncertainPlant::new(
            up.plant.clone(),
            UncertaintyFactors {
                ma: Some(up.ma.clone()),
                na: Some(up.na.clone()),
                mc: Some(Mat::from_element(1, 1, 0.1)),
                nc: Some(Mat::from_row_slice(1, 3, &[0.1, 0.0, 0.0])),
                ..Default::default()
            },
        )
        .unwrap();
        let f = SvdEquivalentForm::new(&bad, DEFAULT_RANK_TOL).unwrap();
        assert!(matches!(
            assemble_synthesis_alpha(&f, GammaSpec::Minimize, 10.0),
            Err(Error::InvalidAlphaPath(_))
        ));
        assert!(assemble_synthesis(&f, GammaSpec::Minimize).is_ok());
    }

    #[test]
    fn brl_blocks_follow_operand_shapes() {
        let f = form();
        let ami = assemble_nominal_brl(&f, 2.0, 0.0).unwrap();
        // (r, n, q, r, p) = (2, 3, 2, 2, 1)
        assert_eq!(ami.main().rows, 10);
        let x = vec![0.0; ami.num_vars()];
        let m = ami.main().eval(&x);
        // −γ²I over the two disturbance channels, −I over the single output
        assert_eq!(m[(5, 5)], -4.0);
        assert_eq!(m[(6, 6)], -4.0);
        assert_eq!(m[(9, 9)], -1.0);
        assert_symmetric(&ami);
    }

    #[test]
    fn alpha_enters_output_row_of_brl() {
        let f = form();
        let a0 = assemble_nominal_brl(&f, 2.0, 0.0).unwrap();
        let a1 = assemble_nominal_brl(&f, 2.0, 3.0).unwrap();
        let mut x = vec![0.0; a0.num_vars()];
        let s_idx = a0.layout.find("S").unwrap().offset;
        x[s_idx] = 1.0;
        let diff = a1.main().eval(&x) - a0.main().eval(&x);
        // Φ52 − C_d = α C_d Π A_d, located at rows 9.., cols 2..5
        let pi = a0.layout.find("S").map(|_| {
            let mut p = Mat::zeros(3, 3);
            p[(2, 2)] = 1.0;
            p
        });
        let expect = &f.c_d * pi.unwrap() * &f.a_d * 3.0;
        let got = diff.view((9, 2), (1, 3)).into_owned();
        assert!((got - expect).norm() < 1e-14);
    }

    #[test]
    fn nonconservative_rank_examples() {
        assert!(!check_nonconservative_ranks(&example::plant()));
        let e = Mat::from_diagonal(&nalgebra::dvector![1.0, 0.0]);
        let plant = DescriptorPlant::new(
            e,
            Mat::identity(2, 2),
            Mat::zeros(2, 1),
            Mat::zeros(2, 1),
            Mat::zeros(1, 2),
            Mat::zeros(1, 1),
        )
        .unwrap();
        assert!(check_nonconservative_ranks(&UncertainPlant::nominal(plant)));
        let plant = DescriptorPlant::new(
            Mat::identity(2, 2),
            Mat::identity(2, 2),
            Mat::from_element(2, 1, 1.0),
            Mat::zeros(2, 1),
            Mat::from_element(1, 2, 1.0),
            Mat::zeros(1, 1),
        )
        .unwrap();
        assert!(check_nonconservative_ranks(&UncertainPlant::nominal(plant)));
    }

    #[test]
    fn petersen_examples() {
        let g = Mat::identity(2, 2) * -2.0;
        let m = Mat::from_row_slice(2, 1, &[1.0, 0.0]);
        let n = Mat::from_row_slice(1, 2, &[1.0, 0.0]);
        let ami = petersen_absorb_numeric(&g, &m, &n).unwrap();
        assert!(max_eigenvalue(&ami.main().eval(&[1.0])) <= 1e-12);
        assert!(petersen_absorb_numeric(&g, &Mat::zeros(2, 1), &n).is_err());
        assert!(petersen_absorb_numeric(&g, &m, &Mat::zeros(1, 2)).is_err());
        // G = +I is never absorbed: the (1,1) block stays ⪰ I.
        let ami = petersen_absorb_numeric(&Mat::identity(2, 2), &m, &n).unwrap();
        for eps in [1e-6, 1e-2, 1.0, 1e2, 1e6] {
            assert!(max_eigenvalue(&ami.main().eval(&[eps])) > 0.0);
        }
    }

    #[test]
    fn robust_brl_is_absorbed_lemma_matrix() {
        let f = form();
        let (layout, sigma, m1, n1) = robust_brl_parts(&f, GammaSpec::Fixed(2.1)).unwrap();
        let rebuilt = petersen_absorb(&sigma, &m1, &n1, layout.scalar_index("eps")).unwrap();
        let ami = assemble_robust_brl(&f, GammaSpec::Fixed(2.1)).unwrap();
        assert_eq!(&rebuilt, ami.main());
    }

    #[test]
    fn json_dump_shape() {
        let ami = assemble_nominal_brl(&form(), 2.0, 0.0).unwrap();
        let j = ami.to_json();
        assert_eq!(j["dimension"], 10 + 2);
        assert_eq!(j["num_vars"], ami.num_vars());
        assert_eq!(j["blocks"][0]["coefficients"].as_array().unwrap().len(), ami.num_vars());
    }
}
