//! Independent reference computations.

use super::lp::Lp;

/// Forward substitution of the annual OIS rows `S_i sum_{k<i} P_k + (1 + S_i) P_i = 1`.
pub fn forward_substitution(rates: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::with_capacity(rates.len());
    for &s in rates {
        let annuity: f64 = out.iter().sum();
        out.push((1.0 - s * annuity) / (1.0 + s));
    }
    out
}

/// Gaussian short-rate bond price with constant level `b`; `sigma` is the
/// instantaneous volatility of the rate.
pub fn vasicek_bond(r0: f64, a: f64, sigma: f64, b: f64, t: f64) -> f64 {
    let bb = (1.0 - (-a * t).exp()) / a;
    let ln_a = (b - sigma * sigma / (2.0 * a * a)) * (bb - t) - sigma * sigma * bb * bb / (4.0 * a);
    (ln_a - bb * r0).exp()
}

/// Square-root short-rate bond price with constant level `b`.
pub fn cir_bond(r0: f64, a: f64, sigma: f64, b: f64, t: f64) -> f64 {
    let h = (a * a + 2.0 * sigma * sigma).sqrt();
    let g = (h * t).exp() - 1.0;
    let den = (h + a) * g + 2.0 * h;
    let bb = 2.0 * g / den;
    let aa = (2.0 * h * ((a + h) * t / 2.0).exp() / den).powf(2.0 * a * b / (sigma * sigma));
    aa * (-bb * r0).exp()
}

/// Discrete OIS feasibility set on the annual grid `1..=T_n`: every market
/// equation, `P_1 <= 1` and `P_{k+1} <= P_k`. Variables are `P_1..P_{T_n}`.
pub fn ois_grid_lp(maturities: &[f64], rates: &[f64]) -> Lp {
    let n = *maturities.last().unwrap() as usize;
    let mut lp = Lp::new(n);
    for (&t, &s) in maturities.iter().zip(rates) {
        let p = t as usize;
        let mut row = vec![0.0; n];
        for x in row.iter_mut().take(p) {
            *x = s;
        }
        row[p - 1] += 1.0;
        lp.eq(row, 1.0);
    }
    lp.le_sparse(&[(0, 1.0)], 1.0);
    for k in 1..n {
        lp.le_sparse(&[(k, 1.0), (k - 1, -1.0)], 0.0);
    }
    lp
}

/// Sharp OIS range of `P(t_k)` (one-based grid index).
pub fn ois_lp_range(maturities: &[f64], rates: &[f64], k: usize) -> (f64, f64) {
    ois_grid_lp(maturities, rates).range_of(k - 1)
}

/// Survival feasibility set for CDS quotes paid on a uniform grid with flat
/// discounting, with the protection leg written exactly.
///
/// Variables are `Q_1..Q_m` at the premium dates followed by the per-period
/// default-leg integrals `I_j = int_{t_{j-1}}^{t_j} P^D dF`. Monotonicity of `Q`
/// gives `m_j Q_j <= I_j <= m_j Q_{j-1}` with `m_j = P^D(t_{j-1}) - P^D(t_j)`;
/// integrating the protection leg by parts gives the pricing rows
///
/// ```text
/// S_i sum_{j<=p_i} d P^D(t_j) Q_j + (1-R) P^D(T_i) Q_{p_i} + (1-R) sum_{j<=p_i} I_j = 1 - R.
/// ```
pub struct CdsEnvelope {
    pub lp: Lp,
    pub grid: usize,
    pub freq: usize,
}

pub fn cds_envelope_lp(
    maturities: &[f64],
    spreads: &[f64],
    freq: usize,
    recovery: f64,
    flat_rate: f64,
) -> CdsEnvelope {
    let d = 1.0 / freq as f64;
    let grid = (maturities.last().unwrap() * freq as f64).round() as usize;
    let disc = |t: f64| (-flat_rate * t).exp();
    let lgd = 1.0 - recovery;
    let mut lp = Lp::new(2 * grid);
    for (&t, &s) in maturities.iter().zip(spreads) {
        let p = (t * freq as f64).round() as usize;
        let mut row = vec![0.0; 2 * grid];
        for j in 1..=p {
            row[j - 1] += s * d * disc(j as f64 * d);
            row[grid + j - 1] = lgd;
        }
        row[p - 1] += lgd * disc(t);
        lp.eq(row, lgd);
    }
    for j in 1..=grid {
        let m = disc((j - 1) as f64 * d) - disc(j as f64 * d);
        lp.le_sparse(&[(j - 1, m), (grid + j - 1, -1.0)], 0.0);
        if j == 1 {
            lp.le_sparse(&[(grid, 1.0)], m);
            lp.le_sparse(&[(0, 1.0)], 1.0);
        } else {
            lp.le_sparse(&[(grid + j - 1, 1.0), (j - 2, -m)], 0.0);
            lp.le_sparse(&[(j - 1, 1.0), (j - 2, -1.0)], 0.0);
        }
    }
    CdsEnvelope { lp, grid, freq }
}

impl CdsEnvelope {
    /// Sharp range of `Q(t)` for a grid date `t`.
    pub fn range_at(&self, t: f64) -> (f64, f64) {
        let k = (t * self.freq as f64).round() as usize;
        self.lp.range_of(k - 1)
    }
}
