//! Dense two-phase simplex used as an independent optimisation oracle.
//!
//! Problems are `min c.x` subject to `A_eq x = b_eq`, `A_ub x <= b_ub` and
//! `x >= 0`. Bland's rule keeps the pivoting finite; the problems solved in the
//! tests have at most a few hundred columns.

const EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn value(&self) -> f64 {
        match self {
            LpOutcome::Optimal { value, .. } => *value,
            other => panic!("LP has no optimum: {other:?}"),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Lp {
    pub vars: usize,
    eq: Vec<(Vec<f64>, f64)>,
    ub: Vec<(Vec<f64>, f64)>,
}

impl Lp {
    pub fn new(vars: usize) -> Self {
        Self { vars, ..Default::default() }
    }

    pub fn eq(&mut self, row: Vec<f64>, rhs: f64) {
        assert_eq!(row.len(), self.vars);
        self.eq.push((row, rhs));
    }

    pub fn le(&mut self, row: Vec<f64>, rhs: f64) {
        assert_eq!(row.len(), self.vars);
        self.ub.push((row, rhs));
    }

    /// Sparse helper: `sum coeff * x[idx] <= rhs`.
    pub fn le_sparse(&mut self, terms: &[(usize, f64)], rhs: f64) {
        let mut row = vec![0.0; self.vars];
        for &(j, c) in terms {
            row[j] += c;
        }
        self.le(row, rhs);
    }

    pub fn minimize(&self, c: &[f64]) -> LpOutcome {
        solve(self, c)
    }

    pub fn maximize(&self, c: &[f64]) -> LpOutcome {
        let neg: Vec<f64> = c.iter().map(|v| -v).collect();
        match solve(self, &neg) {
            LpOutcome::Optimal { x, value } => LpOutcome::Optimal { x, value: -value },
            other => other,
        }
    }

    /// Minimum and maximum of `x[j]`.
    pub fn range_of(&self, j: usize) -> (f64, f64) {
        let mut c = vec![0.0; self.vars];
        c[j] = 1.0;
        (self.minimize(&c).value(), self.maximize(&c).value())
    }
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.rows[i][self.width]
    }

    fn pivot(&mut self, obj: &mut [f64], r: usize, c: usize) {
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r && row[c] != 0.0 {
                let f = row[c];
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
            }
        }
        let f = obj[c];
        if f != 0.0 {
            for (v, pv) in obj.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
        }
        self.basis[r] = c;
    }

    /// Runs simplex iterations with entering columns restricted to `0..allowed`.
    fn run(&mut self, obj: &mut [f64], allowed: usize) -> bool {
        loop {
            let Some(enter) = (0..allowed).find(|&j| obj[j] < -EPS) else {
                return true;
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows.len() {
                let a = self.rows[i][enter];
                if a > EPS {
                    let ratio = self.rhs(i) / a;
                    let better = match leave {
                        None => true,
                        Some((l, best)) => {
                            ratio < best - EPS || (ratio <= best + EPS && self.basis[i] < self.basis[l])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            match leave {
                Some((r, _)) => self.pivot(obj, r, enter),
                None => return false,
            }
        }
    }
}

fn solve(lp: &Lp, c: &[f64]) -> LpOutcome {
    let n = lp.vars;
    let n_slack = lp.ub.len();
    let m = lp.eq.len() + n_slack;
    let n_art = m;
    let width = n + n_slack + n_art;

    let mut rows = Vec::with_capacity(m);
    for (row, rhs) in &lp.eq {
        let mut r = vec![0.0; width + 1];
        r[..n].copy_from_slice(row);
        r[width] = *rhs;
        rows.push(r);
    }
    for (k, (row, rhs)) in lp.ub.iter().enumerate() {
        let mut r = vec![0.0; width + 1];
        r[..n].copy_from_slice(row);
        r[n + k] = 1.0;
        r[width] = *rhs;
        rows.push(r);
    }
    for (i, r) in rows.iter_mut().enumerate() {
        if r[width] < 0.0 {
            for v in r.iter_mut() {
                *v = -*v;
            }
        }
        r[n + n_slack + i] = 1.0;
    }
    let mut t = Tableau { rows, basis: (0..m).map(|i| n + n_slack + i).collect(), width };

    // Phase 1: minimise the sum of artificials.
    let mut obj = vec![0.0; width + 1];
    for r in &t.rows {
        for j in 0..n + n_slack {
            obj[j] -= r[j];
        }
        obj[width] -= r[width];
    }
    t.run(&mut obj, n + n_slack);
    if -obj[width] > 1e-9 {
        return LpOutcome::Infeasible;
    }
    // Drive zero-valued artificials out of the basis where possible.
    for i in 0..m {
        if t.basis[i] >= n + n_slack {
            if let Some(j) = (0..n + n_slack).find(|&j| t.rows[i][j].abs() > 1e-9) {
                let mut dummy = vec![0.0; width + 1];
                t.pivot(&mut dummy, i, j);
            }
        }
    }

    // Phase 2.
    let mut obj = vec![0.0; width + 1];
    obj[..n].copy_from_slice(c);
    for i in 0..m {
        let b = t.basis[i];
        let cb = if b < n { c[b] } else { 0.0 };
        if cb != 0.0 {
            for (v, rv) in obj.iter_mut().zip(&t.rows[i]) {
                *v -= cb * rv;
            }
        }
    }
    if !t.run(&mut obj, n + n_slack) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![0.0; n];
    for i in 0..m {
        if t.basis[i] < n {
            x[t.basis[i]] = t.rhs(i);
        }
    }
    let value = c.iter().zip(&x).map(|(a, b)| a * b).sum();
    LpOutcome::Optimal { x, value }
}
