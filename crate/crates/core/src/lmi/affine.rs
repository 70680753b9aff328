//! Matrix-valued expressions affine in a flat vector of scalar decision
//! variables: `X(x) = X₀ + Σ xᵢ Xᵢ`.

use serde::{Deserialize, Serialize};

use crate::model::Mat;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Symmetry {
    Symmetric,
    Full,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarBlock {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    pub symmetry: Symmetry,
    /// Index of the first scalar belonging to this block.
    pub offset: usize,
}

impl VarBlock {
    pub fn scalar_count(&self) -> usize {
        match self.symmetry {
            Symmetry::Symmetric => self.rows * (self.rows + 1) / 2,
            Symmetry::Full => self.rows * self.cols,
        }
    }

    /// `(scalar index, row, col)` triples; symmetric blocks list the upper
    /// triangle only.
    fn entries(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::with_capacity(self.scalar_count());
        let mut k = self.offset;
        match self.symmetry {
            Symmetry::Symmetric => {
                for i in 0..self.rows {
                    for j in i..self.rows {
                        out.push((k, i, j));
                        k += 1;
                    }
                }
            }
            Symmetry::Full => {
                for i in 0..self.rows {
                    for j in 0..self.cols {
                        out.push((k, i, j));
                        k += 1;
                    }
                }
            }
        }
        out
    }
}

/// Named matrix blocks packed into one flat vector of scalars.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VariableLayout {
    pub blocks: Vec<VarBlock>,
    count: usize,
}

impl VariableLayout {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: &str, rows: usize, cols: usize, symmetry: Symmetry) -> &mut Self {
        assert!(self.find(name).is_none(), "duplicate variable block {name}");
        let block = VarBlock {
            name: name.to_string(),
            rows,
            cols,
            symmetry,
            offset: self.count,
        };
        self.count += block.scalar_count();
        self.blocks.push(block);
        self
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn find(&self, name: &str) -> Option<&VarBlock> {
        self.blocks.iter().find(|b| b.name == name)
    }

    fn block(&self, name: &str) -> &VarBlock {
        self.find(name)
            .unwrap_or_else(|| panic!("unknown variable block {name}"))
    }

    /// Scalar index of a 1x1 block.
    pub fn scalar_index(&self, name: &str) -> usize {
        let b = self.block(name);
        assert_eq!(b.scalar_count(), 1, "{name} is not a scalar block");
        b.offset
    }

    /// The block as an affine expression in the whole layout.
    pub fn expr(&self, name: &str) -> AffineExpr {
        let b = self.block(name);
        let mut e = AffineExpr::zeros(b.rows, b.cols, self.count);
        for (k, i, j) in b.entries() {
            let mut c = Mat::zeros(b.rows, b.cols);
            c[(i, j)] = 1.0;
            if i != j && b.symmetry == Symmetry::Symmetric {
                c[(j, i)] = 1.0;
            }
            e.coeffs[k] = Some(c);
        }
        e
    }

    /// Materializes block `name` from a full variable vector.
    pub fn value(&self, name: &str, x: &[f64]) -> Mat {
        let b = self.block(name);
        let mut m = Mat::zeros(b.rows, b.cols);
        for (k, i, j) in b.entries() {
            m[(i, j)] = x[k];
            if b.symmetry == Symmetry::Symmetric {
                m[(j, i)] = x[k];
            }
        }
        m
    }

    /// Writes `value` into the slots of block `name`; symmetric blocks read the
    /// upper triangle.
    pub fn set_value(&self, name: &str, x: &mut [f64], value: &Mat) {
        let b = self.block(name);
        assert_eq!((value.nrows(), value.ncols()), (b.rows, b.cols));
        for (k, i, j) in b.entries() {
            x[k] = value[(i, j)];
        }
    }
}

/// `constant + Σ xᵢ coeffs[i]`; absent coefficients are zero.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineExpr {
    pub rows: usize,
    pub cols: usize,
    pub constant: Mat,
    pub coeffs: Vec<Option<Mat>>,
}

impl AffineExpr {
    pub fn zeros(rows: usize, cols: usize, nvars: usize) -> Self {
        Self {
            rows,
            cols,
            constant: Mat::zeros(rows, cols),
            coeffs: vec![None; nvars],
        }
    }

    pub fn constant(m: Mat, nvars: usize) -> Self {
        Self {
            rows: m.nrows(),
            cols: m.ncols(),
            constant: m,
            coeffs: vec![None; nvars],
        }
    }

    /// `x[var] * m`.
    pub fn scaled_var(var: usize, m: Mat, nvars: usize) -> Self {
        let mut e = Self::zeros(m.nrows(), m.ncols(), nvars);
        e.coeffs[var] = Some(m);
        e
    }

    pub fn identity(n: usize, nvars: usize) -> Self {
        Self::constant(Mat::identity(n, n), nvars)
    }

    pub fn nvars(&self) -> usize {
        self.coeffs.len()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    fn map(&self, rows: usize, cols: usize, f: impl Fn(&Mat) -> Mat) -> Self {
        Self {
            rows,
            cols,
            constant: f(&self.constant),
            coeffs: self.coeffs.iter().map(|c| c.as_ref().map(&f)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.shape(), other.shape(), "shape mismatch in add");
        assert_eq!(self.nvars(), other.nvars());
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| match (a, b) {
                (Some(a), Some(b)) => Some(a + b),
                (Some(a), None) => Some(a.clone()),
                (None, Some(b)) => Some(b.clone()),
                (None, None) => None,
            })
            .collect();
        Self {
            rows: self.rows,
            cols: self.cols,
            constant: &self.constant + &other.constant,
            coeffs,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, k: f64) -> Self {
        self.map(self.rows, self.cols, |m| m * k)
    }

    pub fn add_constant(&self, m: &Mat) -> Self {
        let mut out = self.clone();
        out.constant += m;
        out
    }

    /// `self * m`.
    pub fn mul_right(&self, m: &Mat) -> Self {
        assert_eq!(self.cols, m.nrows(), "shape mismatch in mul_right");
        self.map(self.rows, m.ncols(), |c| c * m)
    }

    /// `m * self`.
    pub fn mul_left(&self, m: &Mat) -> Self {
        assert_eq!(m.ncols(), self.rows, "shape mismatch in mul_left");
        self.map(m.nrows(), self.cols, |c| m * c)
    }

    pub fn transpose(&self) -> Self {
        self.map(self.cols, self.rows, |c| c.transpose())
    }

    /// `X + Xᵀ`.
    pub fn sym(&self) -> Self {
        self.add(&self.transpose())
    }

    pub fn eval(&self, x: &[f64]) -> Mat {
        let mut m = self.constant.clone();
        for (c, &xi) in self.coeffs.iter().zip(x) {
            if let Some(c) = c {
                m += c * xi;
            }
        }
        m
    }

    pub fn is_zero(&self) -> bool {
        let z = |m: &Mat| m.iter().all(|&v| v == 0.0);
        z(&self.constant) && self.coeffs.iter().flatten().all(z)
    }

    /// Assembles a block matrix; `rows[i][j]` must share row heights and
    /// column widths with its neighbours.
    pub fn block(rows: &[Vec<AffineExpr>]) -> Self {
        let nvars = rows[0][0].nvars();
        let heights: Vec<usize> = rows.iter().map(|r| r[0].rows).collect();
        let widths: Vec<usize> = rows[0].iter().map(|e| e.cols).collect();
        let (h, w) = (heights.iter().sum(), widths.iter().sum());
        let mut out = Self::zeros(h, w, nvars);
        let mut r0 = 0;
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), widths.len(), "ragged block row {i}");
            let mut c0 = 0;
            for (j, e) in row.iter().enumerate() {
                assert_eq!(e.shape(), (heights[i], widths[j]), "block ({i},{j}) has wrong shape");
                out.constant.view_mut((r0, c0), e.shape()).copy_from(&e.constant);
                for (k, c) in e.coeffs.iter().enumerate() {
                    if let Some(c) = c {
                        out.coeffs[k]
                            .get_or_insert_with(|| Mat::zeros(h, w))
                            .view_mut((r0, c0), e.shape())
                            .copy_from(c);
                    }
                }
                c0 += widths[j];
            }
            r0 += heights[i];
        }
        out
    }

    /// Symmetric block matrix from its lower triangle: `lower[i]` holds the
    /// blocks `(i, 0..=i)`; the upper triangle is filled by transposition.
    pub fn symmetric_block(lower: &[Vec<AffineExpr>]) -> Self {
        let n = lower.len();
        let rows: Vec<Vec<AffineExpr>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if j <= i {
                            lower[i][j].clone()
                        } else {
                            lower[j][i].transpose()
                        }
                    })
                    .collect()
            })
            .collect();
        Self::block(&rows).symmetrized()
    }

    /// `(X + Xᵀ)/2` applied to every coefficient; exact for matrices that
    /// are already symmetric up to rounding.
    pub fn symmetrized(&self) -> Self {
        self.map(self.rows, self.cols, |m| (m + m.transpose()) * 0.5)
    }
}
