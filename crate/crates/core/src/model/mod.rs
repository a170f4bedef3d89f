//! LP/MILP models and their reduction to the canonical form
//! `min cᵀx  s.t.  Ax ≥ b, x ≥ 0` used by every solver in this crate.

mod mps;
mod presolve;
mod scaling;

pub use mps::{read_mps, write_mps, MpsError};
pub use presolve::{presolve, PresolveError};
pub use scaling::{ruiz_scale, ScalingDiagonals, RUIZ_PASSES};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sparse::{CsrMatrix, SparseError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VarKind {
    Continuous,
    Binary,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("variable {index} ({name}): lower bound {lower} exceeds upper bound {upper}")]
    InvertedBounds {
        index: usize,
        name: String,
        lower: f64,
        upper: f64,
    },
    #[error("binary variable {index} ({name}) has bounds [{lower}, {upper}] outside [0, 1]")]
    BinaryBounds {
        index: usize,
        name: String,
        lower: f64,
        upper: f64,
    },
    #[error("row {row} ({name}) references variable {col} but the model has {ncols}")]
    ColumnOutOfRange {
        row: usize,
        name: String,
        col: usize,
        ncols: usize,
    },
    #[error("row {row} ({name}) has a non-finite right-hand side")]
    NonFiniteRhs { row: usize, name: String },
    #[error("row {row} ({name}) has a non-finite coefficient")]
    NonFiniteCoefficient { row: usize, name: String },
    #[error("variable {index} has a non-finite cost or a NaN bound")]
    NonFiniteVariable { index: usize },
    #[error("expected a vector of length {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error(transparent)]
    Sparse(#[from] SparseError),
}

/// One linear constraint `Σ a_j x_j (≤|=|≥) rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub name: String,
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

/// A general LP or MILP in the user's own terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralLp {
    pub name: String,
    pub sense: Sense,
    pub costs: Vec<f64>,
    pub constant: f64,
    pub rows: Vec<Constraint>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub kinds: Vec<VarKind>,
    pub var_names: Vec<String>,
}

impl GeneralLp {
    pub fn new(name: impl Into<String>, sense: Sense) -> Self {
        GeneralLp {
            name: name.into(),
            sense,
            costs: Vec::new(),
            constant: 0.0,
            rows: Vec::new(),
            lower: Vec::new(),
            upper: Vec::new(),
            kinds: Vec::new(),
            var_names: Vec::new(),
        }
    }

    pub fn add_var(
        &mut self,
        name: impl Into<String>,
        cost: f64,
        lower: f64,
        upper: f64,
        kind: VarKind,
    ) -> usize {
        self.costs.push(cost);
        self.lower.push(lower);
        self.upper.push(upper);
        self.kinds.push(kind);
        self.var_names.push(name.into());
        self.costs.len() - 1
    }

    pub fn add_binary(&mut self, name: impl Into<String>, cost: f64) -> usize {
        self.add_var(name, cost, 0.0, 1.0, VarKind::Binary)
    }

    pub fn add_row(
        &mut self,
        name: impl Into<String>,
        coeffs: Vec<(usize, f64)>,
        relation: Relation,
        rhs: f64,
    ) -> usize {
        self.rows.push(Constraint {
            name: name.into(),
            coeffs,
            relation,
            rhs,
        });
        self.rows.len() - 1
    }

    pub fn num_vars(&self) -> usize {
        self.costs.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn binaries(&self) -> Vec<usize> {
        (0..self.num_vars())
            .filter(|&j| self.kinds[j] == VarKind::Binary)
            .collect()
    }

    /// Objective value `cᵀx + constant` in the model's own sense.
    pub fn objective_at(&self, x: &[f64]) -> f64 {
        self.costs.iter().zip(x).map(|(c, v)| c * v).sum::<f64>() + self.constant
    }

    /// Largest bound or row violation of `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for j in 0..self.num_vars() {
            worst = worst.max(self.lower[j] - x[j]).max(x[j] - self.upper[j]);
        }
        for row in &self.rows {
            let lhs: f64 = row.coeffs.iter().map(|&(j, a)| a * x[j]).sum();
            let v = match row.relation {
                Relation::Le => lhs - row.rhs,
                Relation::Ge => row.rhs - lhs,
                Relation::Eq => (lhs - row.rhs).abs(),
            };
            worst = worst.max(v);
        }
        worst
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let n = self.num_vars();
        for (len, what) in [
            (self.lower.len(), n),
            (self.upper.len(), n),
            (self.kinds.len(), n),
            (self.var_names.len(), n),
        ] {
            if len != what {
                return Err(ModelError::LengthMismatch {
                    expected: what,
                    actual: len,
                });
            }
        }
        for j in 0..n {
            let (lo, up) = (self.lower[j], self.upper[j]);
            if !self.costs[j].is_finite() || lo.is_nan() || up.is_nan() || lo == f64::INFINITY
                || up == f64::NEG_INFINITY
            {
                return Err(ModelError::NonFiniteVariable { index: j });
            }
            if lo > up {
                return Err(ModelError::InvertedBounds {
                    index: j,
                    name: self.var_names[j].clone(),
                    lower: lo,
                    upper: up,
                });
            }
            if self.kinds[j] == VarKind::Binary && (lo < 0.0 || up > 1.0) {
                return Err(ModelError::BinaryBounds {
                    index: j,
                    name: self.var_names[j].clone(),
                    lower: lo,
                    upper: up,
                });
            }
        }
        for (i, row) in self.rows.iter().enumerate() {
            if !row.rhs.is_finite() {
                return Err(ModelError::NonFiniteRhs {
                    row: i,
                    name: row.name.clone(),
                });
            }
            for &(j, a) in &row.coeffs {
                if j >= n {
                    return Err(ModelError::ColumnOutOfRange {
                        row: i,
                        name: row.name.clone(),
                        col: j,
                        ncols: n,
                    });
                }
                if !a.is_finite() {
                    return Err(ModelError::NonFiniteCoefficient {
                        row: i,
                        name: row.name.clone(),
                    });
                }
            }
        }
        if !self.constant.is_finite() {
            return Err(ModelError::NonFiniteVariable { index: n });
        }
        Ok(())
    }
}

/// How an original variable is expressed in standard-form columns.
#[derive(Debug, Clone, PartialEq)]
pub enum VarMap {
    /// `x = offset + x'[col]` (finite lower bound, possibly also an upper bound row).
    Shifted { col: usize, offset: f64 },
    /// `x = upper - x'[col]` (only an upper bound).
    Mirrored { col: usize, upper: f64 },
    /// `x = x'[pos] - x'[neg]` (free variable).
    Split { pos: usize, neg: usize },
}

/// Where a standard-form row came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RowOrigin {
    /// Original constraint `row`; `negated` for `≤` rows and the second half of an equality.
    Constraint { row: usize, negated: bool },
    /// `-x' ≥ -(u - l)` for original variable `var`.
    UpperBound { var: usize },
}

/// One reversible step applied on the way to standard form.
#[derive(Debug, Clone, PartialEq)]
pub enum Transform {
    /// Original variables mapped onto `ncols` fresh standard columns.
    Substitute { maps: Vec<VarMap>, ncols: usize },
    /// Columns removed with value 0; `kept[k]` is the previous index of column `k`.
    DropColumns { kept: Vec<usize>, ncols_before: usize },
    /// Rows removed; `kept[k]` is the previous index of row `k`.
    DropRows { kept: Vec<usize>, nrows_before: usize },
    /// `x_prev = x' / col_scale`, `y_prev = y' / row_scale`.
    Scale(ScalingDiagonals),
}

/// Everything needed to map a standard-form point back to the original model.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformLog {
    pub steps: Vec<Transform>,
    /// Original objective `= sign · (cᵀx' + offset)`.
    pub objective_sign: f64,
    pub objective_offset: f64,
    pub row_origin: Vec<RowOrigin>,
    original_costs: Vec<f64>,
    original_constant: f64,
}

impl TransformLog {
    pub fn identity(c: &[f64], nrows: usize) -> Self {
        TransformLog {
            steps: Vec::new(),
            objective_sign: 1.0,
            objective_offset: 0.0,
            row_origin: (0..nrows)
                .map(|row| RowOrigin::Constraint {
                    row,
                    negated: false,
                })
                .collect(),
            original_costs: c.to_vec(),
            original_constant: 0.0,
        }
    }

    pub fn negated_rows(&self) -> usize {
        self.row_origin
            .iter()
            .filter(|o| matches!(o, RowOrigin::Constraint { negated: true, .. }))
            .count()
    }
}

/// `min cᵀx  s.t.  Ax ≥ b, x ≥ 0`, plus the log to map back.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardLp {
    pub c: Vec<f64>,
    pub a: CsrMatrix,
    pub b: Vec<f64>,
    pub log: TransformLog,
}

impl StandardLp {
    /// A standard-form problem with no history (postsolve is the identity).
    pub fn new(c: Vec<f64>, a: CsrMatrix, b: Vec<f64>) -> Result<Self, ModelError> {
        if c.len() != a.ncols() {
            return Err(ModelError::LengthMismatch {
                expected: a.ncols(),
                actual: c.len(),
            });
        }
        if b.len() != a.nrows() {
            return Err(ModelError::LengthMismatch {
                expected: a.nrows(),
                actual: b.len(),
            });
        }
        let log = TransformLog::identity(&c, b.len());
        Ok(StandardLp { c, a, b, log })
    }

    pub fn num_vars(&self) -> usize {
        self.c.len()
    }

    pub fn num_rows(&self) -> usize {
        self.b.len()
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        crate::sparse::dot(&self.c, x)
    }

    /// Maps a standard-form objective value to the original model's.
    pub fn original_objective(&self, std_objective: f64) -> f64 {
        self.log.objective_sign * (std_objective + self.log.objective_offset)
    }

    /// Largest violation of `Ax ≥ b` and `x ≥ 0`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let ax = self.a.spmv(x).expect("length checked by caller");
        let rows = ax
            .iter()
            .zip(&self.b)
            .fold(0.0f64, |m, (l, r)| m.max(r - l));
        x.iter().fold(rows, |m, &v| m.max(-v))
    }
}

/// Reduces a general model to `min cᵀx, Ax ≥ b, x ≥ 0`. Integrality is ignored.
pub fn canonicalize(p: &GeneralLp) -> Result<StandardLp, ModelError> {
    p.validate()?;
    let sign = match p.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let n = p.num_vars();
    let mut maps = Vec::with_capacity(n);
    let mut c = Vec::with_capacity(n);
    let mut offset = sign * p.constant;
    let mut upper_rows: Vec<(usize, usize, f64)> = Vec::new();
    for j in 0..n {
        let (lo, up, cost) = (p.lower[j], p.upper[j], sign * p.costs[j]);
        let col = c.len();
        if lo.is_finite() {
            maps.push(VarMap::Shifted { col, offset: lo });
            c.push(cost);
            offset += cost * lo;
            if up.is_finite() {
                upper_rows.push((j, col, up - lo));
            }
        } else if up.is_finite() {
            maps.push(VarMap::Mirrored { col, upper: up });
            c.push(-cost);
            offset += cost * up;
        } else {
            maps.push(VarMap::Split { pos: col, neg: col + 1 });
            c.push(cost);
            c.push(-cost);
        }
    }
    let ncols = c.len();

    let mut triplets = Vec::new();
    let mut b = Vec::new();
    let mut origin = Vec::new();
    let mut push_row = |coeffs: &[(usize, f64)], rhs: f64, row: usize, negated: bool| {
        let s = if negated { -1.0 } else { 1.0 };
        let i = b.len();
        for &(col, a) in coeffs {
            triplets.push((i, col, s * a));
        }
        b.push(s * rhs);
        origin.push(RowOrigin::Constraint { row, negated });
    };
    for (i, row) in p.rows.iter().enumerate() {
        let mut rhs = row.rhs;
        let mut coeffs = Vec::with_capacity(row.coeffs.len() + 1);
        for &(j, a) in &row.coeffs {
            match maps[j] {
                VarMap::Shifted { col, offset } => {
                    rhs -= a * offset;
                    coeffs.push((col, a));
                }
                VarMap::Mirrored { col, upper } => {
                    rhs -= a * upper;
                    coeffs.push((col, -a));
                }
                VarMap::Split { pos, neg } => {
                    coeffs.push((pos, a));
                    coeffs.push((neg, -a));
                }
            }
        }
        match row.relation {
            Relation::Ge => push_row(&coeffs, rhs, i, false),
            Relation::Le => push_row(&coeffs, rhs, i, true),
            Relation::Eq => {
                push_row(&coeffs, rhs, i, false);
                push_row(&coeffs, rhs, i, true);
            }
        }
    }
    for &(var, col, width) in &upper_rows {
        let i = b.len();
        triplets.push((i, col, -1.0));
        b.push(-width);
        origin.push(RowOrigin::UpperBound { var });
    }
    let a = CsrMatrix::from_triplets(b.len(), ncols, &triplets)?;
    Ok(StandardLp {
        c,
        a,
        b,
        log: TransformLog {
            steps: vec![Transform::Substitute { maps, ncols }],
            objective_sign: sign,
            objective_offset: offset,
            row_origin: origin,
            original_costs: p.costs.clone(),
            original_constant: p.constant,
        },
    })
}

/// Standard-form column carrying original variable `var`, if it has exactly
/// one (shifted or mirrored) and that column survived presolve.
pub fn std_column(p: &StandardLp, var: usize) -> Option<usize> {
    let mut col = None;
    for step in &p.log.steps {
        match step {
            Transform::Substitute { maps, .. } => {
                col = match maps.get(var)? {
                    VarMap::Shifted { col, .. } | VarMap::Mirrored { col, .. } => Some(*col),
                    VarMap::Split { .. } => None,
                };
            }
            Transform::DropColumns { kept, .. } => {
                let c = col?;
                col = kept.iter().position(|&k| k == c);
            }
            Transform::DropRows { .. } | Transform::Scale(_) => {}
        }
    }
    col
}

/// Maps a standard-form point back to the original variables and evaluates
/// the original objective (sense and constant included) there.
pub fn postsolve(p: &StandardLp, x_std: &[f64]) -> Result<(Vec<f64>, f64), ModelError> {
    if x_std.len() != p.num_vars() {
        return Err(ModelError::LengthMismatch {
            expected: p.num_vars(),
            actual: x_std.len(),
        });
    }
    let mut x = x_std.to_vec();
    for step in p.log.steps.iter().rev() {
        x = match step {
            Transform::Scale(d) => d.unscale_primal(&x),
            Transform::DropColumns { kept, ncols_before } => {
                let mut full = vec![0.0; *ncols_before];
                for (k, &old) in kept.iter().enumerate() {
                    full[old] = x[k];
                }
                full
            }
            Transform::DropRows { .. } => x,
            Transform::Substitute { maps, .. } => maps
                .iter()
                .map(|m| match *m {
                    VarMap::Shifted { col, offset } => offset + x[col],
                    VarMap::Mirrored { col, upper } => upper - x[col],
                    VarMap::Split { pos, neg } => x[pos] - x[neg],
                })
                .collect(),
        };
    }
    let objective = p
        .log
        .original_costs
        .iter()
        .zip(&x)
        .map(|(c, v)| c * v)
        .sum::<f64>()
        + p.log.original_constant;
    Ok((x, objective))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn le_row_is_negated() {
        let mut p = GeneralLp::new("t", Sense::Minimize);
        let x = p.add_var("x", 1.0, 0.0, f64::INFINITY, VarKind::Continuous);
        p.add_row("r", vec![(x, 1.0)], Relation::Le, 5.0);
        let s = canonicalize(&p).unwrap();
        assert_eq!(s.a.to_dense(), vec![vec![-1.0]]);
        assert_eq!(s.b, vec![-5.0]);
        assert_eq!(s.c, vec![1.0]);
        assert_eq!(s.log.negated_rows(), 1);
    }

    #[test]
    fn equality_is_split() {
        let mut p = GeneralLp::new("t", Sense::Minimize);
        let x1 = p.add_var("x1", 1.0, 0.0, f64::INFINITY, VarKind::Continuous);
        let x2 = p.add_var("x2", 2.0, 0.0, f64::INFINITY, VarKind::Continuous);
        p.add_row("r", vec![(x1, 1.0), (x2, 1.0)], Relation::Eq, 4.0);
        let s = canonicalize(&p).unwrap();
        assert_eq!(s.a.to_dense(), vec![vec![1.0, 1.0], vec![-1.0, -1.0]]);
        assert_eq!(s.b, vec![4.0, -4.0]);
    }

    #[test]
    fn maximize_with_box_postsolves_to_upper_bound() {
        let mut p = GeneralLp::new("t", Sense::Maximize);
        p.add_var("x", 3.0, 0.0, 2.0, VarKind::Continuous);
        let s = canonicalize(&p).unwrap();
        // min -3x' s.t. -x' >= -2
        assert_eq!(s.c, vec![-3.0]);
        assert_eq!(s.b, vec![-2.0]);
        let (x, obj) = postsolve(&s, &[2.0]).unwrap();
        assert_eq!(x, vec![2.0]);
        assert_eq!(obj, 6.0);
        assert_eq!(s.original_objective(-6.0), 6.0);
    }

    #[test]
    fn identity_log_returns_input() {
        let a = CsrMatrix::from_dense(&[vec![1.0, 1.0]]);
        let s = StandardLp::new(vec![1.0, 2.0], a, vec![4.0]).unwrap();
        let (x, obj) = postsolve(&s, &[4.0, 0.0]).unwrap();
        assert_eq!(x, vec![4.0, 0.0]);
        assert_eq!(obj, 4.0);
    }

    #[test]
    fn shifted_variable_is_restored() {
        let mut p = GeneralLp::new("t", Sense::Minimize);
        p.add_var("x", 1.0, 2.0, f64::INFINITY, VarKind::Continuous);
        let s = canonicalize(&p).unwrap();
        let (x, obj) = postsolve(&s, &[1.0]).unwrap();
        assert_eq!(x, vec![3.0]);
        assert_eq!(obj, 3.0);
        assert_eq!(s.original_objective(1.0), 3.0);
    }

    #[test]
    fn free_and_upper_only_variables() {
        let mut p = GeneralLp::new("t", Sense::Minimize);
        let f = p.add_var("f", 1.0, f64::NEG_INFINITY, f64::INFINITY, VarKind::Continuous);
        let m = p.add_var("m", -1.0, f64::NEG_INFINITY, 3.0, VarKind::Continuous);
        p.add_row("r", vec![(f, 1.0), (m, 1.0)], Relation::Ge, 1.0);
        let s = canonicalize(&p).unwrap();
        assert_eq!(s.num_vars(), 3);
        // f = 2 - 0, m = 3 - 1 = 2
        let (x, obj) = postsolve(&s, &[2.0, 0.0, 1.0]).unwrap();
        assert_eq!(x, vec![2.0, 2.0]);
        assert_eq!(obj, 0.0);
        assert_eq!(s.original_objective(s.objective(&[2.0, 0.0, 1.0])), obj);
    }

    #[test]
    fn non_finite_rhs_is_rejected() {
        let mut p = GeneralLp::new("t", Sense::Minimize);
        let x = p.add_var("x", 1.0, 0.0, 1.0, VarKind::Continuous);
        p.add_row("r", vec![(x, 1.0)], Relation::Ge, f64::INFINITY);
        assert!(matches!(canonicalize(&p), Err(ModelError::NonFiniteRhs { row: 0, .. })));
        p.rows[0].rhs = 1.0;
        p.rows[0].coeffs[0].1 = f64::NAN;
        assert!(matches!(
            canonicalize(&p),
            Err(ModelError::NonFiniteCoefficient { row: 0, .. })
        ));
    }

    #[test]
    fn postsolve_rejects_wrong_length() {
        let a = CsrMatrix::from_dense(&[vec![1.0]]);
        let s = StandardLp::new(vec![1.0], a, vec![1.0]).unwrap();
        assert!(postsolve(&s, &[1.0, 2.0]).is_err());
    }
}
