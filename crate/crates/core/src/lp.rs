//! Dense two-phase simplex for small equality-form linear programs.
//!
//! Solves `min c·x` subject to `A x = b`, `x ≥ 0`. Pivoting follows Bland's
//! rule.

const EPS: f64 = 1e-11;
/// Phase-one residual above which the constraints count as inconsistent.
pub const FEASIBILITY_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal { value: f64, x: Vec<f64> },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn value(&self) -> Option<f64> {
        match self {
            LpOutcome::Optimal { value, .. } => Some(*value),
            _ => None,
        }
    }
}

struct Tableau {
    /// `rows x (cols + 1)`; the last column is the right-hand side.
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.t[r][c];
        for v in self.t[r].iter_mut() {
            *v /= w;
        }
        let pivot_row = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, p) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * p;
                }
                row[c] = 0.0;
            }
        }
        self.basis[r] = c;
    }

    /// Minimizes `cost · x` over the columns flagged in `allowed`.
    fn optimize(&mut self, cost: &[f64], allowed: &[bool]) -> Result<(), ()> {
        loop {
            let reduced = |j: usize| -> f64 {
                cost[j] - self.t.iter().zip(&self.basis).map(|(row, &b)| cost[b] * row[j]).sum::<f64>()
            };
            let Some(enter) = (0..self.cols).find(|&j| allowed[j] && !self.basis.contains(&j) && reduced(j) < -EPS) else {
                return Ok(());
            };
            let rhs = self.cols;
            let mut leave: Option<(usize, f64)> = None;
            for (i, row) in self.t.iter().enumerate() {
                if row[enter] > EPS {
                    let ratio = row[rhs] / row[enter];
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((li, lr)) => {
                            if ratio < lr - EPS || (ratio <= lr + EPS && self.basis[i] < self.basis[li]) {
                                Some((i, ratio))
                            } else {
                                Some((li, lr))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = leave else { return Err(()) };
            self.pivot(r, enter);
        }
    }

    fn objective(&self, cost: &[f64]) -> f64 {
        self.t.iter().zip(&self.basis).map(|(row, &b)| cost[b] * row[self.cols]).sum()
    }
}

/// Minimizes `c·x` subject to `a x = b`, `x ≥ 0`.
pub fn minimize(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> LpOutcome {
    let n = c.len();
    let m = a.len();
    assert_eq!(b.len(), m, "one right-hand side per row");
    let cols = n + m;
    let mut t = Vec::with_capacity(m);
    for (row, &rhs) in a.iter().zip(b) {
        assert_eq!(row.len(), n, "rows must match the cost vector");
        let sign = if rhs < 0.0 { -1.0 } else { 1.0 };
        let mut r: Vec<f64> = row.iter().map(|v| v * sign).collect();
        r.resize(cols + 1, 0.0);
        r[cols] = rhs * sign;
        t.push(r);
    }
    for (i, r) in t.iter_mut().enumerate() {
        r[n + i] = 1.0;
    }
    let mut tab = Tableau {
        t,
        basis: (n..cols).collect(),
        cols,
    };

    let phase1: Vec<f64> = (0..cols).map(|j| if j >= n { 1.0 } else { 0.0 }).collect();
    let everything = vec![true; cols];
    tab.optimize(&phase1, &everything).expect("phase one is bounded below by zero");
    if tab.objective(&phase1) > FEASIBILITY_TOL {
        return LpOutcome::Infeasible;
    }

    // Drive artificials out of the basis; rows where that is impossible are redundant.
    let mut r = 0;
    while r < tab.t.len() {
        if tab.basis[r] >= n {
            if let Some(j) = (0..n).find(|&j| tab.t[r][j].abs() > 1e-9) {
                tab.pivot(r, j);
            } else {
                tab.t.remove(r);
                tab.basis.remove(r);
                continue;
            }
        }
        r += 1;
    }

    let mut cost = c.to_vec();
    cost.resize(cols, 0.0);
    let originals: Vec<bool> = (0..cols).map(|j| j < n).collect();
    if tab.optimize(&cost, &originals).is_err() {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![0.0; n];
    for (row, &bv) in tab.t.iter().zip(&tab.basis) {
        if bv < n {
            x[bv] = row[cols].max(0.0);
        }
    }
    let value = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    LpOutcome::Optimal { value, x }
}

/// Maximizes `c·x` subject to `a x = b`, `x ≥ 0`.
pub fn maximize(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> LpOutcome {
    let neg: Vec<f64> = c.iter().map(|v| -v).collect();
    match minimize(&neg, a, b) {
        LpOutcome::Optimal { value, x } => LpOutcome::Optimal { value: -value, x },
        other => other,
    }
}
