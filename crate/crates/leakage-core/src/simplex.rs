//! Dense two-phase simplex for small linear programs.
//!
//! Minimizes `c . x` subject to mixed equality / inequality rows and
//! `x >= 0`. Pivoting follows Bland's rule throughout (entering: lowest
//! eligible column; leaving: lowest basic variable index among the ratio
//! ties), which rules out cycling and makes every solve deterministic. The
//! rank programs this crate builds stay far below a thousand rows, so a
//! dense tableau is the simplest thing that works.

const PIVOT_TOL: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConstraintOp {
    Eq,
    Ge,
    Le,
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub op: ConstraintOp,
    pub rhs: f64,
}

/// `min objective . x` over `x >= 0` under the listed rows.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Meaningful only when `status == Optimal`.
    pub objective_value: f64,
    pub values: Vec<f64>,
}

pub fn solve(lp: &LinearProgram) -> LpSolution {
    Tableau::new(lp).run(lp)
}

struct Tableau {
    /// rows x (total_cols + 1); last column is the rhs.
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    num_structural: usize,
    num_total: usize,
    first_artificial: usize,
}

impl Tableau {
    fn new(lp: &LinearProgram) -> Self {
        let m = lp.constraints.len();
        let n = lp.num_vars;
        // normalize rows to rhs >= 0 and count slack columns
        let mut slack_of_row = vec![None; m];
        let mut num_slack = 0;
        let mut norm: Vec<(Vec<f64>, ConstraintOp, f64)> = Vec::with_capacity(m);
        for c in &lp.constraints {
            assert_eq!(c.coeffs.len(), n, "constraint arity mismatch");
            let (coeffs, op, rhs) = if c.rhs < 0.0 {
                let flipped = match c.op {
                    ConstraintOp::Eq => ConstraintOp::Eq,
                    ConstraintOp::Ge => ConstraintOp::Le,
                    ConstraintOp::Le => ConstraintOp::Ge,
                };
                (c.coeffs.iter().map(|&v| -v).collect(), flipped, -c.rhs)
            } else {
                (c.coeffs.clone(), c.op, c.rhs)
            };
            norm.push((coeffs, op, rhs));
        }
        for (i, (_, op, _)) in norm.iter().enumerate() {
            if *op != ConstraintOp::Eq {
                slack_of_row[i] = Some(n + num_slack);
                num_slack += 1;
            }
        }
        // artificial columns: Le rows start basic on their slack, the rest
        // need one artificial each
        let first_artificial = n + num_slack;
        let mut num_art = 0;
        let mut art_of_row = vec![None; m];
        for (i, (_, op, _)) in norm.iter().enumerate() {
            if *op != ConstraintOp::Le {
                art_of_row[i] = Some(first_artificial + num_art);
                num_art += 1;
            }
        }
        let total = first_artificial + num_art;
        let mut rows = vec![vec![0.0; total + 1]; m];
        let mut basis = vec![0usize; m];
        for (i, (coeffs, op, rhs)) in norm.iter().enumerate() {
            rows[i][..n].copy_from_slice(coeffs);
            rows[i][total] = *rhs;
            if let Some(s) = slack_of_row[i] {
                rows[i][s] = match op {
                    ConstraintOp::Le => 1.0,
                    ConstraintOp::Ge => -1.0,
                    ConstraintOp::Eq => unreachable!(),
                };
            }
            basis[i] = match art_of_row[i] {
                Some(a) => {
                    rows[i][a] = 1.0;
                    a
                }
                None => slack_of_row[i].expect("Le row has a slack"),
            };
        }
        Tableau {
            rows,
            basis,
            num_structural: n,
            num_total: total,
            first_artificial,
        }
    }

    fn run(mut self, lp: &LinearProgram) -> LpSolution {
        // Phase 1: minimize the sum of artificials.
        let mut cost = vec![0.0; self.num_total];
        for c in cost[self.first_artificial..].iter_mut() {
            *c = 1.0;
        }
        let mut z = self.reduced_cost_row(&cost);
        if self.pivot_loop(&mut z, self.num_total) == LpStatus::Unbounded {
            // a sum of nonnegative variables cannot be unbounded below
            unreachable!("phase 1 objective is bounded");
        }
        let phase1_value: f64 = (0..self.rows.len())
            .filter(|&i| self.basis[i] >= self.first_artificial)
            .map(|i| self.rows[i][self.num_total])
            .sum();
        if phase1_value > FEAS_TOL {
            return LpSolution {
                status: LpStatus::Infeasible,
                objective_value: 0.0,
                values: vec![0.0; self.num_structural],
            };
        }
        self.evict_artificials();
        // Phase 2: the real objective over structural columns only.
        let mut cost = vec![0.0; self.num_total];
        cost[..self.num_structural].copy_from_slice(&lp.objective);
        let mut z = self.reduced_cost_row(&cost);
        if self.pivot_loop(&mut z, self.first_artificial) == LpStatus::Unbounded {
            return LpSolution {
                status: LpStatus::Unbounded,
                objective_value: 0.0,
                values: vec![0.0; self.num_structural],
            };
        }
        let mut values = vec![0.0; self.num_structural];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.num_structural {
                values[b] = self.rows[i][self.num_total];
            }
        }
        let objective_value = lp
            .objective
            .iter()
            .zip(&values)
            .map(|(&c, &x)| c * x)
            .sum();
        LpSolution {
            status: LpStatus::Optimal,
            objective_value,
            values,
        }
    }

    /// Objective row in canonical form w.r.t. the current basis:
    /// `z[j] = cost[j] - sum_i cost[basis[i]] * rows[i][j]`.
    fn reduced_cost_row(&self, cost: &[f64]) -> Vec<f64> {
        let mut z = vec![0.0; self.num_total + 1];
        z[..self.num_total].copy_from_slice(cost);
        for (i, row) in self.rows.iter().enumerate() {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                for (zj, rj) in z.iter_mut().zip(row) {
                    *zj -= cb * rj;
                }
            }
        }
        z
    }

    /// Bland pivoting until optimal or unbounded. Columns at or beyond
    /// `col_limit` never enter (phase 2 excludes artificials this way).
    fn pivot_loop(&mut self, z: &mut [f64], col_limit: usize) -> LpStatus {
        loop {
            let entering = (0..col_limit).find(|&j| z[j] < -PIVOT_TOL);
            let Some(col) = entering else {
                return LpStatus::Optimal;
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows.len() {
                let a = self.rows[i][col];
                if a > PIVOT_TOL {
                    let ratio = self.rows[i][self.num_total] / a;
                    let better = match leave {
                        None => true,
                        Some((best_row, best_ratio)) => {
                            ratio < best_ratio - PIVOT_TOL
                                || (ratio < best_ratio + PIVOT_TOL
                                    && self.basis[i] < self.basis[best_row])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((row, _)) = leave else {
                return LpStatus::Unbounded;
            };
            self.pivot(row, col, z);
        }
    }

    fn pivot(&mut self, row: usize, col: usize, z: &mut [f64]) {
        let piv = self.rows[row][col];
        for v in self.rows[row].iter_mut() {
            *v /= piv;
        }
        let pivot_row = self.rows[row].clone();
        for (i, r) in self.rows.iter_mut().enumerate() {
            if i != row {
                let f = r[col];
                if f != 0.0 {
                    for (v, p) in r.iter_mut().zip(&pivot_row) {
                        *v -= f * p;
                    }
                }
            }
        }
        let f = z[col];
        if f != 0.0 {
            for (v, p) in z.iter_mut().zip(&pivot_row) {
                *v -= f * p;
            }
        }
        self.basis[row] = col;
    }

    /// After phase 1, swap any basic artificial for a genuine column; rows
    /// that cannot be repaired are redundant and get dropped.
    fn evict_artificials(&mut self) {
        let mut i = 0;
        while i < self.rows.len() {
            if self.basis[i] >= self.first_artificial {
                let col = (0..self.first_artificial)
                    .find(|&j| self.rows[i][j].abs() > PIVOT_TOL);
                match col {
                    Some(col) => {
                        let mut dummy = vec![0.0; self.num_total + 1];
                        self.pivot(i, col, &mut dummy);
                        i += 1;
                    }
                    None => {
                        self.rows.remove(i);
                        self.basis.remove(i);
                    }
                }
            } else {
                i += 1;
            }
        }
    }
}
