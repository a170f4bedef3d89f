//! Dense LU of the basis matrix with a product-form eta file between
//! refactorizations.

/// `P B = L U` with partial pivoting, stored row-major in one buffer.
#[derive(Debug, Clone)]
pub struct DenseLu {
    n: usize,
    lu: Vec<f64>,
    /// `perm[i]` is the row of `B` that ended up in row `i`.
    perm: Vec<usize>,
}

/// Elimination step at which no acceptable pivot was found.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Singular {
    pub step: usize,
}

const PIVOT_TOL: f64 = 1e-11;

impl DenseLu {
    /// Factors the `n x n` matrix whose columns are `cols`.
    pub fn factor(cols: &[Vec<f64>]) -> Result<Self, Singular> {
        let n = cols.len();
        let mut lu = vec![0.0; n * n];
        for (j, col) in cols.iter().enumerate() {
            for (i, &v) in col.iter().enumerate() {
                lu[i * n + j] = v;
            }
        }
        let scale = lu.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (mut best, mut best_abs) = (k, lu[k * n + k].abs());
            for i in k + 1..n {
                let v = lu[i * n + k].abs();
                if v > best_abs {
                    best = i;
                    best_abs = v;
                }
            }
            if best_abs <= PIVOT_TOL * scale {
                return Err(Singular { step: k });
            }
            if best != k {
                for j in 0..n {
                    lu.swap(k * n + j, best * n + j);
                }
                perm.swap(k, best);
            }
            let pivot = lu[k * n + k];
            for i in k + 1..n {
                let f = lu[i * n + k] / pivot;
                if f == 0.0 {
                    continue;
                }
                lu[i * n + k] = f;
                for j in k + 1..n {
                    lu[i * n + j] -= f * lu[k * n + j];
                }
            }
        }
        Ok(DenseLu { n, lu, perm })
    }

    /// Solves `B x = rhs` in place.
    pub fn solve(&self, rhs: &mut [f64]) {
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| rhs[p]).collect();
        for i in 0..n {
            let mut acc = x[i];
            for j in 0..i {
                acc -= self.lu[i * n + j] * x[j];
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in i + 1..n {
                acc -= self.lu[i * n + j] * x[j];
            }
            x[i] = acc / self.lu[i * n + i];
        }
        rhs.copy_from_slice(&x);
    }

    /// Solves `Bᵀ x = rhs` in place.
    pub fn solve_transpose(&self, rhs: &mut [f64]) {
        let n = self.n;
        // Bᵀ = Uᵀ Lᵀ P, so solve Uᵀ z = rhs, Lᵀ w = z, x = Pᵀ w.
        let mut z = rhs.to_vec();
        for i in 0..n {
            let mut acc = z[i];
            for j in 0..i {
                acc -= self.lu[j * n + i] * z[j];
            }
            z[i] = acc / self.lu[i * n + i];
        }
        for i in (0..n).rev() {
            let mut acc = z[i];
            for j in i + 1..n {
                acc -= self.lu[j * n + i] * z[j];
            }
            z[i] = acc;
        }
        for (i, &p) in self.perm.iter().enumerate() {
            rhs[p] = z[i];
        }
    }
}

/// `B_k = B_0 E_1 … E_k`; each eta replaces column `row` of the identity
/// with the entering column expressed in the previous basis.
#[derive(Debug, Clone)]
struct Eta {
    row: usize,
    column: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct BasisFactor {
    lu: DenseLu,
    etas: Vec<Eta>,
}

impl BasisFactor {
    pub fn new(cols: &[Vec<f64>]) -> Result<Self, Singular> {
        Ok(BasisFactor {
            lu: DenseLu::factor(cols)?,
            etas: Vec::new(),
        })
    }

    pub fn updates(&self) -> usize {
        self.etas.len()
    }

    /// `B⁻¹ a` in place.
    pub fn ftran(&self, a: &mut [f64]) {
        self.lu.solve(a);
        for eta in &self.etas {
            let xr = a[eta.row] / eta.column[eta.row];
            if xr != 0.0 {
                for (i, &d) in eta.column.iter().enumerate() {
                    a[i] -= d * xr;
                }
            }
            a[eta.row] = xr;
        }
    }

    /// `B⁻ᵀ c` in place.
    pub fn btran(&self, c: &mut [f64]) {
        for eta in self.etas.iter().rev() {
            let r = eta.row;
            let mut acc = c[r];
            for (i, &d) in eta.column.iter().enumerate() {
                if i != r {
                    acc -= d * c[i];
                }
            }
            c[r] = acc / eta.column[r];
        }
        self.lu.solve_transpose(c);
    }

    /// Records that basis position `row` now holds a column whose FTRAN image is `alpha`.
    pub fn update(&mut self, row: usize, alpha: Vec<f64>) {
        self.etas.push(Eta { row, column: alpha });
    }
}
