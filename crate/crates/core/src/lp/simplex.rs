//! Bounded-variable revised simplex over `A x - s = 0`, `l <= (x, s) <= u`.
//!
//! Variables `0..n` are structural, `n..n+m` are row slacks (column `-e_i`)
//! and `n+m..n+2m` are phase-one artificials (column `sign_i e_i`), fixed at
//! zero once phase one is over. A cold solve runs primal phase one and two;
//! after bound changes the previous basis stays dual feasible, so a warm
//! solve runs the dual simplex from it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::lu::{ColRef, LuFactors, Singular};

pub const FEAS_TOL: f64 = 1e-7;
pub const OPT_TOL: f64 = 1e-9;

/// Sparse row with its range, `(entries, lo, hi)`.
pub(crate) type RangeRow = (Vec<(usize, f64)>, f64, f64);
const PIVOT_TOL: f64 = 1e-7;
const REFACTOR_EVERY: usize = 100;
const STALL_LIMIT: usize = 50;
const PHASE_ONE_TOL: f64 = 1e-6;
const PERTURBATION: f64 = 1e-6;
const PERTURB_AFTER: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarState {
    Basic,
    AtLower,
    AtUpper,
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Outcome {
    Optimal,
    Infeasible,
    Unbounded,
    IterLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct SingularBasis;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum DualEnd {
    Optimal,
    Infeasible,
    IterLimit,
    NotDualFeasible,
}

/// Problem data in column-compressed form.
#[derive(Debug, Clone)]
pub(crate) struct LpData {
    pub m: usize,
    pub n: usize,
    pub col_start: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub col_val: Vec<f64>,
    pub cost: Vec<f64>,
    pub col_lower: Vec<f64>,
    pub col_upper: Vec<f64>,
    pub row_lower: Vec<f64>,
    pub row_upper: Vec<f64>,
}

#[derive(Debug, Clone)]
pub(crate) struct Simplex {
    pub data: LpData,
    ntot: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
    cost: Vec<f64>,
    art_sign: Vec<f64>,
    unit_idx: Vec<usize>,
    neg_one: Vec<f64>,
    pub x: Vec<f64>,
    state: Vec<VarState>,
    basis: Vec<usize>,
    lu: LuFactors,
    d: Vec<f64>,
    warm: bool,
    pub iterations: usize,
    pub cold_starts: usize,
    iter_cap: usize,
    /// Seeds the bound perturbation.
    pub seed: u64,
    /// Exact bounds while the working bounds are perturbed.
    saved_bounds: Option<(Vec<f64>, Vec<f64>)>,
    // scratch
    vec_m: Vec<f64>,
    vec_m2: Vec<f64>,
    alpha: Vec<f64>,
}

fn finite(v: f64) -> bool {
    v.is_finite()
}

impl Simplex {
    pub fn new(data: LpData) -> Simplex {
        let (m, n) = (data.m, data.n);
        let ntot = n + 2 * m;
        Simplex {
            ntot,
            lower: vec![0.0; ntot],
            upper: vec![0.0; ntot],
            cost: vec![0.0; ntot],
            art_sign: vec![1.0; m],
            unit_idx: (0..m).collect(),
            neg_one: vec![-1.0; m],
            x: vec![0.0; ntot],
            state: vec![VarState::AtLower; ntot],
            basis: Vec::new(),
            lu: LuFactors::default(),
            d: vec![0.0; ntot],
            warm: false,
            iterations: 0,
            cold_starts: 0,
            iter_cap: 0,
            seed: 0,
            saved_bounds: None,
            vec_m: vec![0.0; m],
            vec_m2: vec![0.0; m],
            alpha: vec![0.0; m],
            data,
        }
    }

    fn m(&self) -> usize {
        self.data.m
    }

    fn n(&self) -> usize {
        self.data.n
    }

    fn col_ref(&self, j: usize) -> ColRef<'_> {
        let (n, m) = (self.n(), self.m());
        if j < n {
            let (a, b) = (self.data.col_start[j], self.data.col_start[j + 1]);
            ColRef {
                idx: &self.data.col_idx[a..b],
                val: &self.data.col_val[a..b],
            }
        } else if j < n + m {
            let i = j - n;
            ColRef {
                idx: &self.unit_idx[i..i + 1],
                val: &self.neg_one[i..i + 1],
            }
        } else {
            let i = j - n - m;
            ColRef {
                idx: &self.unit_idx[i..i + 1],
                val: &self.art_sign[i..i + 1],
            }
        }
    }

    fn dot(&self, j: usize, y: &[f64]) -> f64 {
        let c = self.col_ref(j);
        c.idx.iter().zip(c.val).map(|(&i, &v)| v * y[i]).sum()
    }

    /// Solves from scratch (or warm, after a previous solve) under the given
    /// structural bounds.
    pub fn solve(&mut self, col_lower: &[f64], col_upper: &[f64], iter_cap: usize) -> Result<Outcome, SingularBasis> {
        self.iterations = 0;
        self.iter_cap = iter_cap;
        if col_lower.iter().zip(col_upper).any(|(l, u)| l > u) {
            return Ok(Outcome::Infeasible);
        }
        if self.warm {
            self.set_structural_bounds(col_lower, col_upper);
            if let Some(o) = self.warm_solve()? { return Ok(o) }
        }
        self.cold_solve(col_lower, col_upper)
    }

    fn set_structural_bounds(&mut self, col_lower: &[f64], col_upper: &[f64]) {
        for j in 0..self.n() {
            self.lower[j] = col_lower[j];
            self.upper[j] = col_upper[j];
            if self.state[j] != VarState::Basic {
                self.place_nonbasic(j);
            }
        }
    }

    /// Puts nonbasic `j` on a finite bound, keeping its side when possible.
    fn place_nonbasic(&mut self, j: usize) {
        let (l, u) = (self.lower[j], self.upper[j]);
        let prefer_upper = self.state[j] == VarState::AtUpper;
        let st = if prefer_upper && finite(u) {
            VarState::AtUpper
        } else if finite(l) {
            VarState::AtLower
        } else if finite(u) {
            VarState::AtUpper
        } else {
            VarState::Free
        };
        self.state[j] = st;
        self.x[j] = match st {
            VarState::AtLower => l,
            VarState::AtUpper => u,
            _ => 0.0,
        };
    }

    fn warm_solve(&mut self) -> Result<Option<Outcome>, SingularBasis> {
        self.refactor()?;
        // Columns that were fixed at the previous solve may sit on either
        // side; boxed columns go to the side their reduced cost asks for.
        self.compute_duals();
        let mut moved = false;
        for j in 0..self.ntot {
            if self.lower[j] == self.upper[j] {
                continue;
            }
            let d = self.d[j];
            match self.state[j] {
                VarState::AtLower if d < -OPT_TOL && finite(self.upper[j]) => {
                    self.state[j] = VarState::AtUpper;
                    self.x[j] = self.upper[j];
                    moved = true;
                }
                VarState::AtUpper if d > OPT_TOL && finite(self.lower[j]) => {
                    self.state[j] = VarState::AtLower;
                    self.x[j] = self.lower[j];
                    moved = true;
                }
                _ => {}
            }
        }
        if moved {
            self.recompute_basic_values();
        }
        self.finish(true)
    }

    fn cold_solve(&mut self, col_lower: &[f64], col_upper: &[f64]) -> Result<Outcome, SingularBasis> {
        let (n, m) = (self.n(), self.m());
        self.warm = false;
        self.cold_starts += 1;
        for j in 0..n {
            self.lower[j] = col_lower[j];
            self.upper[j] = col_upper[j];
            self.state[j] = VarState::AtLower;
            self.place_nonbasic(j);
        }
        let mut act = vec![0.0; m];
        for j in 0..n {
            if self.x[j] != 0.0 {
                let c = self.col_ref(j);
                for (&i, &v) in c.idx.iter().zip(c.val) {
                    act[i] += v * self.x[j];
                }
            }
        }
        self.basis.clear();
        for i in 0..m {
            let (s, a) = (n + i, n + m + i);
            let (lo, hi) = (self.data.row_lower[i], self.data.row_upper[i]);
            self.lower[s] = lo;
            self.upper[s] = hi;
            self.lower[a] = 0.0;
            let v = act[i];
            if v >= lo - FEAS_TOL && v <= hi + FEAS_TOL {
                self.state[s] = VarState::Basic;
                self.x[s] = v;
                self.basis.push(s);
                self.upper[a] = 0.0;
                self.art_sign[i] = 1.0;
                self.state[a] = VarState::AtLower;
                self.x[a] = 0.0;
            } else {
                let b = if v < lo { lo } else { hi };
                self.x[s] = b;
                self.state[s] = if v < lo { VarState::AtLower } else { VarState::AtUpper };
                self.art_sign[i] = if b > v { 1.0 } else { -1.0 };
                self.upper[a] = f64::INFINITY;
                self.state[a] = VarState::Basic;
                self.x[a] = (b - v).abs();
                self.basis.push(a);
            }
        }
        for j in 0..self.ntot {
            self.cost[j] = if j >= n + m { 1.0 } else { 0.0 };
        }
        self.refactor()?;
        if self.primal(true)? == Outcome::IterLimit {
            return Ok(Outcome::IterLimit);
        }
        let infeasibility = |s: &Self| -> f64 { (n + m..s.ntot).map(|a| s.x[a].max(0.0)).sum() };
        if infeasibility(self) > PHASE_ONE_TOL {
            // residue of the perturbation, or truly infeasible
            if self.primal(false)? == Outcome::IterLimit {
                return Ok(Outcome::IterLimit);
            }
            if infeasibility(self) > PHASE_ONE_TOL {
                return Ok(Outcome::Infeasible);
            }
        }
        for a in n + m..self.ntot {
            self.upper[a] = 0.0;
            if self.state[a] != VarState::Basic {
                self.state[a] = VarState::AtLower;
                self.x[a] = 0.0;
            }
        }
        for j in 0..self.ntot {
            self.cost[j] = if j < n { self.data.cost[j] } else { 0.0 };
        }
        self.warm = true;
        match self.primal(true)? {
            Outcome::Optimal => {}
            other => {
                self.warm = false;
                return Ok(other);
            }
        }
        match self.finish(false)? {
            Some(o) => Ok(o),
            None => {
                self.warm = false;
                Err(SingularBasis)
            }
        }
    }

    /// Alternates dual and primal passes until the basis is both primal and
    /// dual feasible on fresh factors. `None` means the basis lost dual
    /// feasibility while primal infeasible, which needs a cold start.
    fn finish(&mut self, allow_cold: bool) -> Result<Option<Outcome>, SingularBasis> {
        for _ in 0..8 {
            if self.lu.n_updates() > 0 {
                self.refactor()?;
            }
            if self.max_basic_infeasibility() > FEAS_TOL {
                match self.dual()? {
                    DualEnd::Optimal => continue,
                    DualEnd::Infeasible => return Ok(Some(Outcome::Infeasible)),
                    DualEnd::IterLimit => return Ok(Some(Outcome::IterLimit)),
                    DualEnd::NotDualFeasible => {
                        if allow_cold {
                            return Ok(None);
                        }
                        self.warm = false;
                        return Ok(Some(Outcome::IterLimit));
                    }
                }
            }
            self.compute_duals();
            if self.dual_infeasibility() > OPT_TOL {
                match self.primal(true)? {
                    Outcome::Optimal => continue,
                    other => return Ok(Some(other)),
                }
            }
            return Ok(Some(Outcome::Optimal));
        }
        Ok(if allow_cold { None } else { Some(Outcome::IterLimit) })
    }

    fn max_basic_infeasibility(&self) -> f64 {
        self.basis
            .iter()
            .map(|&j| (self.lower[j] - self.x[j]).max(self.x[j] - self.upper[j]).max(0.0))
            .fold(0.0, f64::max)
    }

    fn dual_infeasibility(&self) -> f64 {
        let mut worst = 0.0f64;
        for j in 0..self.ntot {
            if self.lower[j] == self.upper[j] {
                continue;
            }
            let d = self.d[j];
            let v = match self.state[j] {
                VarState::Basic => 0.0,
                VarState::AtLower => -d,
                VarState::AtUpper => d,
                VarState::Free => d.abs(),
            };
            worst = worst.max(v);
        }
        worst
    }

    fn refactor(&mut self) -> Result<(), SingularBasis> {
        let m = self.m();
        for attempt in 0..2 {
            let cols: Vec<ColRef> = self.basis.iter().map(|&j| self.col_ref(j)).collect();
            match LuFactors::factorize(m, &cols) {
                Ok(lu) => {
                    self.lu = lu;
                    self.recompute_basic_values();
                    return Ok(());
                }
                Err(Singular { positions, rows }) => {
                    if attempt == 1 {
                        return Err(SingularBasis);
                    }
                    self.repair(&positions, &rows);
                }
            }
        }
        Err(SingularBasis)
    }

    fn repair(&mut self, positions: &[usize], rows: &[usize]) {
        let (n, m) = (self.n(), self.m());
        for (&pos, &row) in positions.iter().zip(rows) {
            let old = self.basis[pos];
            let (l, u, v) = (self.lower[old], self.upper[old], self.x[old]);
            self.state[old] = if finite(l) && (!finite(u) || (v - l).abs() <= (u - v).abs()) {
                VarState::AtLower
            } else if finite(u) {
                VarState::AtUpper
            } else {
                VarState::Free
            };
            self.place_nonbasic(old);
            let slack = n + row;
            let new = if self.state[slack] != VarState::Basic { slack } else { n + m + row };
            self.state[new] = VarState::Basic;
            self.basis[pos] = new;
        }
    }

    fn recompute_basic_values(&mut self) {
        let mut rhs = std::mem::take(&mut self.vec_m);
        rhs.iter_mut().for_each(|v| *v = 0.0);
        for j in 0..self.ntot {
            if self.state[j] == VarState::Basic || self.x[j] == 0.0 {
                continue;
            }
            let xj = self.x[j];
            let c = self.col_ref(j);
            for (&i, &v) in c.idx.iter().zip(c.val) {
                rhs[i] -= v * xj;
            }
        }
        let mut xb = std::mem::take(&mut self.vec_m2);
        self.lu.ftran(&mut rhs, &mut xb);
        for (pos, &j) in self.basis.iter().enumerate() {
            self.x[j] = xb[pos];
        }
        self.vec_m = rhs;
        self.vec_m2 = xb;
    }

    fn compute_duals(&mut self) {
        let mut cb = std::mem::take(&mut self.vec_m);
        for (pos, &j) in self.basis.iter().enumerate() {
            cb[pos] = self.cost[j];
        }
        let mut y = std::mem::take(&mut self.vec_m2);
        self.lu.btran(&mut cb, &mut y);
        for j in 0..self.ntot {
            self.d[j] = if self.state[j] == VarState::Basic {
                0.0
            } else {
                self.cost[j] - self.dot(j, &y)
            };
        }
        self.vec_m = cb;
        self.vec_m2 = y;
    }

    fn ftran_column(&mut self, q: usize) {
        let mut rhs = std::mem::take(&mut self.vec_m);
        rhs.iter_mut().for_each(|v| *v = 0.0);
        let c = self.col_ref(q);
        for (&i, &v) in c.idx.iter().zip(c.val) {
            rhs[i] = v;
        }
        let mut alpha = std::mem::take(&mut self.alpha);
        self.lu.ftran(&mut rhs, &mut alpha);
        self.alpha = alpha;
        self.vec_m = rhs;
    }

    /// Widens every finite bound still in play by a small random amount so
    /// that degenerate ratio ties break.
    fn perturb(&mut self) {
        let saved = (self.lower.clone(), self.upper.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(0x9e37_79b9 ^ self.seed);
        for j in 0..self.ntot {
            let basic = self.state[j] == VarState::Basic;
            if self.lower[j] == self.upper[j] && !basic {
                continue;
            }
            if finite(self.lower[j]) {
                self.lower[j] -= (1.0 + rng.gen::<f64>()) * PERTURBATION * (1.0 + self.lower[j].abs());
                if self.state[j] == VarState::AtLower {
                    self.x[j] = self.lower[j];
                }
            }
            if finite(self.upper[j]) {
                self.upper[j] += (1.0 + rng.gen::<f64>()) * PERTURBATION * (1.0 + self.upper[j].abs());
                if self.state[j] == VarState::AtUpper {
                    self.x[j] = self.upper[j];
                }
            }
        }
        self.saved_bounds = Some(saved);
        self.recompute_basic_values();
    }

    fn unperturb(&mut self) {
        let Some((lower, upper)) = self.saved_bounds.take() else {
            return;
        };
        self.lower = lower;
        self.upper = upper;
        for j in 0..self.ntot {
            match self.state[j] {
                VarState::AtLower => self.x[j] = self.lower[j],
                VarState::AtUpper => self.x[j] = self.upper[j],
                _ => {}
            }
        }
        self.recompute_basic_values();
    }

    fn primal(&mut self, allow_perturb: bool) -> Result<Outcome, SingularBasis> {
        let result = self.primal_loop(allow_perturb);
        self.unperturb();
        result
    }

    fn primal_loop(&mut self, allow_perturb: bool) -> Result<Outcome, SingularBasis> {
        let mut stall = 0usize;
        let mut bland = false;
        loop {
            if self.lu.n_updates() >= REFACTOR_EVERY {
                self.refactor()?;
            }
            self.compute_duals();
            let mut entering: Option<(usize, f64)> = None;
            let mut best = 0.0;
            for j in 0..self.ntot {
                if self.lower[j] == self.upper[j] {
                    continue;
                }
                let dj = self.d[j];
                let dir = match self.state[j] {
                    VarState::AtLower if dj < -OPT_TOL => 1.0,
                    VarState::AtUpper if dj > OPT_TOL => -1.0,
                    VarState::Free if dj.abs() > OPT_TOL => -dj.signum(),
                    _ => continue,
                };
                if bland {
                    entering = Some((j, dir));
                    break;
                }
                if dj.abs() > best {
                    best = dj.abs();
                    entering = Some((j, dir));
                }
            }
            let Some((q, dir)) = entering else {
                return Ok(Outcome::Optimal);
            };
            if self.iterations >= self.iter_cap {
                return Ok(Outcome::IterLimit);
            }
            self.iterations += 1;
            self.ftran_column(q);

            let mut theta_max = f64::INFINITY;
            let mut blocker: Option<(usize, bool)> = None;
            for (pos, &j) in self.basis.iter().enumerate() {
                let a = dir * self.alpha[pos];
                let (r, to_upper) = if a > PIVOT_TOL && finite(self.lower[j]) {
                    ((self.x[j] - self.lower[j] + FEAS_TOL) / a, false)
                } else if a < -PIVOT_TOL && finite(self.upper[j]) {
                    ((self.upper[j] - self.x[j] + FEAS_TOL) / -a, true)
                } else {
                    continue;
                };
                if r < theta_max {
                    theta_max = r;
                    blocker = Some((pos, to_upper));
                }
            }
            theta_max = theta_max.max(0.0);
            let range = self.upper[q] - self.lower[q];
            if !theta_max.is_finite() && !range.is_finite() {
                return Ok(Outcome::Unbounded);
            }
            // (pos, exact ratio, leaves at upper)
            let mut choice: Option<(usize, f64, bool)> = None;
            let mut choice_key = 0.0f64;
            let mut min_ratio = f64::INFINITY;
            for (pos, &j) in self.basis.iter().enumerate() {
                let a = dir * self.alpha[pos];
                let (r, to_upper) = if a > PIVOT_TOL && finite(self.lower[j]) {
                    (((self.x[j] - self.lower[j]) / a).max(0.0), false)
                } else if a < -PIVOT_TOL && finite(self.upper[j]) {
                    (((self.upper[j] - self.x[j]) / -a).max(0.0), true)
                } else {
                    continue;
                };
                if bland {
                    let better = match choice {
                        None => true,
                        Some((p, cr, _)) => r < cr - 1e-12 || (r <= cr + 1e-12 && j < self.basis[p]),
                    };
                    if better {
                        choice = Some((pos, r, to_upper));
                    }
                    min_ratio = min_ratio.min(r);
                } else if r <= theta_max && a.abs() > choice_key {
                    choice_key = a.abs();
                    choice = Some((pos, r, to_upper));
                }
            }
            if choice.is_none() {
                choice = blocker.map(|(pos, up)| (pos, 0.0, up));
            }
            let step = match choice {
                Some((_, r, _)) if range.is_finite() && range <= r => None,
                Some(c) => Some(c),
                None => None,
            };
            let theta = match step {
                Some((_, r, _)) => r,
                None => range,
            };
            if theta != 0.0 {
                self.x[q] += dir * theta;
                for (pos, &j) in self.basis.iter().enumerate() {
                    self.x[j] -= dir * theta * self.alpha[pos];
                }
            }
            match step {
                None => {
                    self.state[q] = if dir > 0.0 { VarState::AtUpper } else { VarState::AtLower };
                    self.x[q] = if dir > 0.0 { self.upper[q] } else { self.lower[q] };
                }
                Some((pos, _, to_upper)) => {
                    let leave = self.basis[pos];
                    self.state[leave] = if to_upper { VarState::AtUpper } else { VarState::AtLower };
                    self.x[leave] = if to_upper { self.upper[leave] } else { self.lower[leave] };
                    self.basis[pos] = q;
                    self.state[q] = VarState::Basic;
                    let alpha = std::mem::take(&mut self.alpha);
                    self.lu.push_update(pos, &alpha);
                    self.alpha = alpha;
                }
            }
            if theta <= 1e-12 {
                stall += 1;
                if allow_perturb && stall > PERTURB_AFTER && self.saved_bounds.is_none() {
                    self.perturb();
                    stall = 0;
                } else if stall > STALL_LIMIT {
                    bland = true;
                }
            } else {
                stall = 0;
                bland = false;
            }
        }
    }

    fn dual(&mut self) -> Result<DualEnd, SingularBasis> {
        self.compute_duals();
        if self.dual_infeasibility() > 1e-7 {
            return Ok(DualEnd::NotDualFeasible);
        }
        let (n, m) = (self.n(), self.m());
        let mut alpha_row = vec![0.0; self.ntot];
        let mut stall = 0usize;
        let mut bland = false;
        loop {
            if self.lu.n_updates() >= REFACTOR_EVERY {
                self.refactor()?;
                self.compute_duals();
            }
            let mut leaving: Option<usize> = None;
            let mut worst = FEAS_TOL;
            for (pos, &j) in self.basis.iter().enumerate() {
                let v = (self.lower[j] - self.x[j]).max(self.x[j] - self.upper[j]);
                if v <= FEAS_TOL {
                    continue;
                }
                if bland {
                    if leaving.is_none_or(|p| j < self.basis[p]) {
                        leaving = Some(pos);
                    }
                } else if v > worst {
                    worst = v;
                    leaving = Some(pos);
                }
            }
            let Some(r) = leaving else {
                return Ok(DualEnd::Optimal);
            };
            if self.iterations >= self.iter_cap {
                return Ok(DualEnd::IterLimit);
            }
            self.iterations += 1;
            let jr = self.basis[r];
            let sigma = if self.x[jr] > self.upper[jr] { 1.0 } else { -1.0 };

            let mut er = std::mem::take(&mut self.vec_m);
            er.iter_mut().for_each(|v| *v = 0.0);
            er[r] = 1.0;
            let mut rho = std::mem::take(&mut self.vec_m2);
            self.lu.btran(&mut er, &mut rho);
            for j in 0..n {
                alpha_row[j] = if self.state[j] == VarState::Basic { 0.0 } else { self.dot(j, &rho) };
            }
            for i in 0..m {
                alpha_row[n + i] = -rho[i];
                alpha_row[n + m + i] = self.art_sign[i] * rho[i];
            }
            self.vec_m = er;
            self.vec_m2 = rho;

            let eligible = |st: VarState, at: f64| match st {
                VarState::AtLower => at > PIVOT_TOL,
                VarState::AtUpper => at < -PIVOT_TOL,
                VarState::Free => at.abs() > PIVOT_TOL,
                VarState::Basic => false,
            };
            let mut t_max = f64::INFINITY;
            for j in 0..self.ntot {
                if self.lower[j] == self.upper[j] {
                    continue;
                }
                let at = sigma * alpha_row[j];
                if !eligible(self.state[j], at) {
                    continue;
                }
                let d = self.d[j];
                let bound = match self.state[j] {
                    VarState::AtLower => (d + OPT_TOL) / at,
                    VarState::AtUpper => (d - OPT_TOL) / at,
                    _ => OPT_TOL / at.abs(),
                };
                t_max = t_max.min(bound);
            }
            if !t_max.is_finite() {
                return Ok(DualEnd::Infeasible);
            }
            let mut q: Option<usize> = None;
            let mut key = 0.0f64;
            let mut best_ratio = f64::INFINITY;
            for j in 0..self.ntot {
                if self.lower[j] == self.upper[j] {
                    continue;
                }
                let at = sigma * alpha_row[j];
                if !eligible(self.state[j], at) {
                    continue;
                }
                let ratio = if self.state[j] == VarState::Free {
                    self.d[j].abs() / at.abs()
                } else {
                    (self.d[j] / at).max(0.0)
                };
                if bland {
                    if ratio < best_ratio - 1e-12 {
                        best_ratio = ratio;
                        q = Some(j);
                    }
                } else if ratio <= t_max && at.abs() > key {
                    key = at.abs();
                    q = Some(j);
                }
            }
            let Some(q) = q else {
                return Ok(DualEnd::Infeasible);
            };
            self.ftran_column(q);
            let arq = self.alpha[r];
            if (arq - alpha_row[q]).abs() > 1e-6 * (1.0 + arq.abs()) && self.lu.n_updates() > 0 {
                self.refactor()?;
                self.compute_duals();
                continue;
            }
            if arq.abs() < PIVOT_TOL {
                return Err(SingularBasis);
            }
            let at_q = sigma * alpha_row[q];
            let t = if self.state[q] == VarState::Free {
                0.0
            } else {
                (self.d[q] / at_q).max(0.0)
            };
            if t != 0.0 {
                for j in 0..self.ntot {
                    if self.state[j] != VarState::Basic {
                        self.d[j] -= t * sigma * alpha_row[j];
                    }
                }
            }
            self.d[q] = 0.0;
            self.d[jr] = -sigma * t;

            let bound = if sigma > 0.0 { self.upper[jr] } else { self.lower[jr] };
            let theta = (self.x[jr] - bound) / arq;
            self.x[q] += theta;
            for (pos, &j) in self.basis.iter().enumerate() {
                self.x[j] -= theta * self.alpha[pos];
            }
            self.x[jr] = bound;
            self.state[jr] = if sigma > 0.0 { VarState::AtUpper } else { VarState::AtLower };
            self.basis[r] = q;
            self.state[q] = VarState::Basic;
            let alpha = std::mem::take(&mut self.alpha);
            self.lu.push_update(r, &alpha);
            self.alpha = alpha;

            if t <= 1e-12 {
                stall += 1;
                if stall > STALL_LIMIT {
                    bland = true;
                }
            } else {
                stall = 0;
                bland = false;
            }
        }
    }

    /// Appends rows `lo <= a x <= hi`. Their slacks join the basis, so a
    /// previous optimal basis stays dual feasible and the next solve is warm.
    pub fn add_rows(&mut self, rows: &[RangeRow]) {
        let (n, m, k) = (self.n(), self.m(), rows.len());
        if k == 0 {
            return;
        }
        let m2 = m + k;
        let mut cols: Vec<Vec<(usize, f64)>> = (0..n)
            .map(|j| {
                let (a, b) = (self.data.col_start[j], self.data.col_start[j + 1]);
                (a..b).map(|p| (self.data.col_idx[p], self.data.col_val[p])).collect()
            })
            .collect();
        for (r, (coeffs, lo, hi)) in rows.iter().enumerate() {
            for &(j, a) in coeffs {
                cols[j].push((m + r, a));
            }
            self.data.row_lower.push(*lo);
            self.data.row_upper.push(*hi);
        }
        self.data.col_start.clear();
        self.data.col_idx.clear();
        self.data.col_val.clear();
        self.data.col_start.push(0);
        for col in &cols {
            for &(i, a) in col {
                self.data.col_idx.push(i);
                self.data.col_val.push(a);
            }
            self.data.col_start.push(self.data.col_idx.len());
        }
        self.data.m = m2;

        // artificials move up by k to make room for the new slacks
        let shift = |v: &mut Vec<f64>, fill_slack: f64, fill_art: f64| {
            let arts = v.split_off(n + m);
            v.extend(std::iter::repeat_n(fill_slack, k));
            v.extend(arts);
            v.extend(std::iter::repeat_n(fill_art, k));
        };
        let activity: Vec<f64> = rows
            .iter()
            .map(|(coeffs, _, _)| coeffs.iter().map(|&(j, a)| a * self.x[j]).sum())
            .collect();
        shift(&mut self.lower, 0.0, 0.0);
        shift(&mut self.upper, 0.0, 0.0);
        shift(&mut self.cost, 0.0, 0.0);
        shift(&mut self.x, 0.0, 0.0);
        shift(&mut self.d, 0.0, 0.0);
        let arts = self.state.split_off(n + m);
        self.state.extend(std::iter::repeat_n(VarState::Basic, k));
        self.state.extend(arts);
        self.state.extend(std::iter::repeat_n(VarState::AtLower, k));
        for j in self.basis.iter_mut() {
            if *j >= n + m {
                *j += k;
            }
        }
        for (r, (_, lo, hi)) in rows.iter().enumerate() {
            let s = n + m + r;
            self.lower[s] = *lo;
            self.upper[s] = *hi;
            self.x[s] = activity[r];
            self.basis.push(s);
        }
        if self.cost.iter().skip(n).any(|&c| c != 0.0) {
            // phase-one costs are only live inside a cold solve
            self.warm = false;
        }
        self.ntot = n + 2 * m2;
        self.art_sign.extend(std::iter::repeat_n(1.0, k));
        self.unit_idx = (0..m2).collect();
        self.neg_one = vec![-1.0; m2];
        self.vec_m = vec![0.0; m2];
        self.vec_m2 = vec![0.0; m2];
        self.alpha = vec![0.0; m2];
        self.lu = LuFactors::default();
    }

    /// Current reduced costs of the structural columns (valid after an
    /// optimal solve).
    pub fn structural_reduced_costs(&self) -> &[f64] {
        &self.d[..self.n()]
    }

    pub fn is_basic(&self, j: usize) -> bool {
        self.state[j] == VarState::Basic
    }
}
