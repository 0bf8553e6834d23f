use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{restart_rng, NormKind, NormedSpace, SearchBudget};
use crate::error::{argument, Error, Result};

/// A linear map between finite-dimensional normed spaces; `matrix` has one
/// row per codomain coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "OperatorRepr", into = "OperatorRepr")]
pub struct NormedOperator {
    matrix: DMatrix<f64>,
    domain: NormedSpace,
    codomain: NormedSpace,
    identity: bool,
}

#[derive(Serialize, Deserialize)]
struct OperatorRepr {
    matrix: Vec<Vec<f64>>,
    domain: NormedSpace,
    codomain: NormedSpace,
}

impl TryFrom<OperatorRepr> for NormedOperator {
    type Error = Error;

    fn try_from(r: OperatorRepr) -> Result<Self> {
        let rows = r.matrix.len();
        let cols = r.matrix.first().map_or(0, Vec::len);
        if r.matrix.iter().any(|row| row.len() != cols) {
            return Err(argument("operator matrix rows have unequal lengths"));
        }
        let m = DMatrix::from_fn(rows, cols, |i, j| r.matrix[i][j]);
        NormedOperator::new(m, r.domain, r.codomain)
    }
}

impl From<NormedOperator> for OperatorRepr {
    fn from(op: NormedOperator) -> Self {
        let matrix = (0..op.matrix.nrows())
            .map(|i| op.matrix.row(i).iter().copied().collect())
            .collect();
        OperatorRepr {
            matrix,
            domain: op.domain,
            codomain: op.codomain,
        }
    }
}

/// Bracket for `‖A‖`: `lower` is attained at an evaluated vector, `upper`
/// is a proven bound. They coincide when a closed form applies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OperatorNormEstimate {
    pub lower: f64,
    pub upper: f64,
    pub exact: bool,
}

impl NormedOperator {
    pub fn new(matrix: DMatrix<f64>, domain: NormedSpace, codomain: NormedSpace) -> Result<Self> {
        if matrix.nrows() != codomain.dim() || matrix.ncols() != domain.dim() {
            return Err(argument(format!(
                "matrix is {}×{} but maps dimension {} to {}",
                matrix.nrows(),
                matrix.ncols(),
                domain.dim(),
                codomain.dim()
            )));
        }
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(argument("operator matrix has non-finite entries"));
        }
        let identity = domain == codomain && matrix == DMatrix::identity(domain.dim(), domain.dim());
        Ok(Self {
            matrix,
            domain,
            codomain,
            identity,
        })
    }

    pub fn identity(space: &NormedSpace) -> Self {
        let d = space.dim();
        Self {
            matrix: DMatrix::identity(d, d),
            domain: space.clone(),
            codomain: space.clone(),
            identity: true,
        }
    }

    pub fn zero(domain: &NormedSpace, codomain: &NormedSpace) -> Self {
        Self {
            matrix: DMatrix::zeros(codomain.dim(), domain.dim()),
            domain: domain.clone(),
            codomain: codomain.clone(),
            identity: false,
        }
    }

    pub fn diagonal(space: &NormedSpace, diag: &[f64]) -> Result<Self> {
        if diag.len() != space.dim() {
            return Err(argument("diagonal length does not match the space"));
        }
        Self::new(
            DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(diag)),
            space.clone(),
            space.clone(),
        )
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn domain(&self) -> &NormedSpace {
        &self.domain
    }

    pub fn codomain(&self) -> &NormedSpace {
        &self.codomain
    }

    pub fn is_identity(&self) -> bool {
        self.identity
    }

    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.domain.dim() {
            return Err(argument(format!(
                "vector of length {} for an operator on dimension {}",
                v.len(),
                self.domain.dim()
            )));
        }
        Ok(self.apply_unchecked(v))
    }

    pub(crate) fn apply_unchecked(&self, v: &[f64]) -> Vec<f64> {
        if self.is_identity() {
            return v.to_vec();
        }
        (0..self.matrix.nrows())
            .map(|i| self.matrix.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            matrix: &self.matrix * factor,
            domain: self.domain.clone(),
            codomain: self.codomain.clone(),
            identity: self.identity && factor == 1.0,
        }
    }

    /// `‖Av‖ / ‖v‖`, zero at `v = 0`.
    fn ratio(&self, v: &[f64]) -> f64 {
        let nv = self.domain.eval(v);
        if nv == 0.0 {
            0.0
        } else {
            self.codomain.eval(&self.apply_unchecked(v)) / nv
        }
    }

    fn column(&self, j: usize) -> Vec<f64> {
        self.matrix.column(j).iter().copied().collect()
    }

    fn row(&self, i: usize) -> Vec<f64> {
        self.matrix.row(i).iter().copied().collect()
    }

    /// Operator norm with the default budget and seed 0.
    pub fn operator_norm(&self) -> OperatorNormEstimate {
        self.operator_norm_with(SearchBudget::default(), 0)
    }

    pub fn operator_norm_with(&self, budget: SearchBudget, seed: u64) -> OperatorNormEstimate {
        if self.matrix.iter().all(|&x| x == 0.0) {
            return OperatorNormEstimate {
                lower: 0.0,
                upper: 0.0,
                exact: true,
            };
        }
        let closed = if self.identity {
            Some(1.0)
        } else {
            self.closed_form_norm()
        };
        if let Some(exact) = closed {
            return OperatorNormEstimate {
                lower: exact,
                upper: exact,
                exact: true,
            };
        }
        let upper = self.certified_upper_bound();
        let lower = self.search_lower_bound(budget, seed).min(upper);
        OperatorNormEstimate {
            lower,
            upper,
            exact: false,
        }
    }

    fn closed_form_norm(&self) -> Option<f64> {
        let dom = self.domain.lp_exponent();
        let cod = self.codomain.lp_exponent();
        if dom == Some(1.0) {
            // Extreme points of the ℓ_1 ball are ±e_j.
            return Some(
                (0..self.matrix.ncols())
                    .map(|j| self.codomain.eval(&self.column(j)))
                    .fold(0.0, f64::max),
            );
        }
        if cod == Some(f64::INFINITY) {
            return Some(
                (0..self.matrix.nrows())
                    .map(|i| self.domain.dual_norm(&self.row(i)))
                    .fold(0.0, f64::max),
            );
        }
        if dom == Some(2.0) && cod == Some(2.0) {
            let sv = self.matrix.clone().singular_values();
            return Some(sv.iter().copied().fold(0.0, f64::max));
        }
        None
    }

    /// `min` of the column bound `‖(‖Ae_j‖)_j‖_{X*}` and the row bound
    /// `‖(‖row_i‖_{X*})_i‖_Y`; both hold for the absolute norms used here.
    fn certified_upper_bound(&self) -> f64 {
        let cols: Vec<f64> = (0..self.matrix.ncols())
            .map(|j| self.codomain.eval(&self.column(j)))
            .collect();
        let rows: Vec<f64> = (0..self.matrix.nrows())
            .map(|i| self.domain.dual_norm(&self.row(i)))
            .collect();
        self.domain.dual_norm(&cols).min(self.codomain.eval(&rows))
    }

    fn search_lower_bound(&self, budget: SearchBudget, seed: u64) -> f64 {
        let m = self.domain.dim();
        let mut best = 0.0f64;
        for j in 0..m {
            let mut e = vec![0.0; m];
            e[j] = 1.0;
            best = best.max(self.ratio(&e));
        }
        if matches!(self.domain.kind(), NormKind::Lp { p } if p.is_infinite()) && m <= 12 {
            for mask in 0..(1u32 << m) {
                let v: Vec<f64> = (0..m).map(|j| if mask >> j & 1 == 1 { 1.0 } else { -1.0 }).collect();
                best = best.max(self.ratio(&v));
            }
        }
        let searched = (0..budget.restarts as u64)
            .into_par_iter()
            .map(|r| {
                let mut rng = restart_rng(seed, r);
                let mut v: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
                let mut val = self.ratio(&v);
                let mut sigma = 0.5;
                for _ in 0..budget.steps {
                    let scale = v.iter().map(|x| x.abs()).fold(0.0, f64::max).max(1e-300);
                    let cand: Vec<f64> = v
                        .iter()
                        .map(|x| x + sigma * scale * rng.sample::<f64, _>(StandardNormal))
                        .collect();
                    let c = self.ratio(&cand);
                    if c > val {
                        v = cand;
                        val = c;
                        sigma = (sigma * 2.0).min(1.0);
                    } else {
                        sigma = (sigma * 0.84).max(1e-12);
                    }
                }
                val
            })
            .reduce(|| 0.0, f64::max);
        best.max(searched)
    }

    /// Rescales so that the proven bound on `‖A‖` is at most 1; returns the
    /// operator and the applied factor.
    pub fn normalized(&self) -> (Self, f64) {
        let est = self.operator_norm();
        if est.upper > 1.0 {
            let factor = 1.0 / est.upper;
            (self.scaled(factor), factor)
        } else {
            (self.clone(), 1.0)
        }
    }
}
