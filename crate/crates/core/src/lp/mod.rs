//! Linear-programming relaxation of a [`MipModel`].
//!
//! [`solve_lp`] runs a cold two-phase primal simplex. [`LpSolver`] keeps the
//! basis between calls so branch-and-bound can re-solve under tightened
//! bounds with the dual simplex.

mod lu;
mod simplex;

use serde::{Deserialize, Serialize};

use crate::model::{MipModel, Relation};
use simplex::{LpData, Outcome, Simplex};

pub use simplex::{FEAS_TOL, OPT_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// One value per model column; meaningful on `Optimal`.
    pub primal: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LpError {
    #[error("basis factorization failed after refactorization retry")]
    Singular,
    #[error("bound override names column {0}, model has {1}")]
    UnknownColumn(usize, usize),
}

/// Replacement bounds for one column, intersected with the model's bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundOverride {
    pub column: usize,
    pub lower: f64,
    pub upper: f64,
}

impl BoundOverride {
    pub fn new(column: usize, lower: f64, upper: f64) -> Self {
        BoundOverride { column, lower, upper }
    }
}

fn row_range(row: &crate::model::Row) -> (f64, f64) {
    match row.relation {
        Relation::Le => (f64::NEG_INFINITY, row.rhs),
        Relation::Ge => (row.rhs, f64::INFINITY),
        Relation::Eq => (row.rhs, row.rhs),
    }
}

fn lp_data(model: &MipModel) -> LpData {
    let n = model.n_columns();
    let m = model.n_rows();
    let mut counts = vec![0usize; n + 1];
    for row in &model.rows {
        for &(j, _) in &row.coeffs {
            counts[j + 1] += 1;
        }
    }
    for j in 0..n {
        counts[j + 1] += counts[j];
    }
    let col_start = counts.clone();
    let nnz = col_start[n];
    let mut fill = counts;
    let mut col_idx = vec![0usize; nnz];
    let mut col_val = vec![0.0; nnz];
    for (i, row) in model.rows.iter().enumerate() {
        for &(j, a) in &row.coeffs {
            col_idx[fill[j]] = i;
            col_val[fill[j]] = a;
            fill[j] += 1;
        }
    }
    let mut row_lower = Vec::with_capacity(m);
    let mut row_upper = Vec::with_capacity(m);
    for row in &model.rows {
        let (lo, hi) = row_range(row);
        row_lower.push(lo);
        row_upper.push(hi);
    }
    LpData {
        m,
        n,
        col_start,
        col_idx,
        col_val,
        cost: model.objective.clone(),
        col_lower: model.columns.iter().map(|c| c.lower).collect(),
        col_upper: model.columns.iter().map(|c| c.upper).collect(),
        row_lower,
        row_upper,
    }
}

/// Re-solvable LP relaxation of one model. Each instance is independent, so
/// several may run on separate threads over the same model.
#[derive(Debug, Clone)]
pub struct LpSolver {
    engine: Simplex,
    iter_limit: Option<usize>,
}

impl LpSolver {
    pub fn new(model: &MipModel) -> Self {
        LpSolver {
            engine: Simplex::new(lp_data(model)),
            iter_limit: None,
        }
    }

    /// Caps simplex iterations per solve; the default is 50 (rows + columns).
    pub fn with_iter_limit(mut self, limit: usize) -> Self {
        self.iter_limit = Some(limit);
        self
    }

    /// Seed for the random bound perturbation used against degeneracy.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.engine.seed = seed;
        self
    }

    pub fn n_columns(&self) -> usize {
        self.engine.data.n
    }

    fn bounds(&self, overrides: &[BoundOverride]) -> Result<(Vec<f64>, Vec<f64>), LpError> {
        let data = &self.engine.data;
        let mut lower = data.col_lower.clone();
        let mut upper = data.col_upper.clone();
        for o in overrides {
            if o.column >= data.n {
                return Err(LpError::UnknownColumn(o.column, data.n));
            }
            lower[o.column] = lower[o.column].max(o.lower);
            upper[o.column] = upper[o.column].min(o.upper);
        }
        Ok((lower, upper))
    }

    /// Solves under `overrides`, starting from the last basis if there is one.
    pub fn solve(&mut self, overrides: &[BoundOverride]) -> Result<LpSolution, LpError> {
        let data = &self.engine.data;
        let cap = self.iter_limit.unwrap_or(50 * (data.m + data.n));
        self.solve_capped(overrides, cap)
    }

    /// Like [`solve`](Self::solve) with at most `cap` iterations. A warm
    /// solve that stops early reports `IterLimit` with the objective of a
    /// dual feasible basis, which is a lower bound for the relaxation.
    pub fn solve_capped(&mut self, overrides: &[BoundOverride], cap: usize) -> Result<LpSolution, LpError> {
        let (lower, upper) = self.bounds(overrides)?;
        let outcome = self
            .engine
            .solve(&lower, &upper, cap)
            .map_err(|_| LpError::Singular)?;
        let n = self.engine.data.n;
        let status = match outcome {
            Outcome::Optimal => LpStatus::Optimal,
            Outcome::Infeasible => LpStatus::Infeasible,
            Outcome::Unbounded => LpStatus::Unbounded,
            Outcome::IterLimit => LpStatus::IterLimit,
        };
        let primal = self.engine.x[..n].to_vec();
        let objective = match status {
            LpStatus::Optimal | LpStatus::IterLimit => {
                primal.iter().zip(&self.engine.data.cost).map(|(x, c)| x * c).sum()
            }
            LpStatus::Infeasible => f64::INFINITY,
            LpStatus::Unbounded => f64::NEG_INFINITY,
        };
        Ok(LpSolution {
            status,
            primal,
            objective,
            iterations: self.engine.iterations,
        })
    }

    /// Appends rows to the relaxation; the next solve starts from the
    /// current basis.
    pub fn add_rows(&mut self, rows: &[crate::model::Row]) {
        let rows: Vec<_> = rows
            .iter()
            .map(|r| {
                let (lo, hi) = row_range(r);
                (r.coeffs.clone(), lo, hi)
            })
            .collect();
        self.engine.add_rows(&rows);
    }

    pub fn n_rows(&self) -> usize {
        self.engine.data.m
    }

    /// Reduced costs of the model columns at the last optimal basis.
    pub fn reduced_costs(&self) -> &[f64] {
        self.engine.structural_reduced_costs()
    }

    /// Solves that could not reuse the previous basis.
    pub fn cold_starts(&self) -> usize {
        self.engine.cold_starts
    }

    pub fn is_basic(&self, column: usize) -> bool {
        self.engine.is_basic(column)
    }
}

/// Cold solve of the relaxation of `model` with bound overrides.
pub fn solve_lp(model: &MipModel, overrides: &[BoundOverride]) -> Result<LpSolution, LpError> {
    LpSolver::new(model).solve(overrides)
}
