use super::{ArbitrageReport, BoundValue, BoundsError, BoundsResult};
use crate::term_structures::{DiscountCurveFn, QuoteKind, QuoteSet};
use crate::tolerances::Tolerances;

/// Model-free `[Q_min, Q_max]` survival bounds at every CDS maturity.
///
/// With `M_k = P^D(T_{k-1}) - P^D(T_k)` and `N_k = sum_{j = p_{k-1}}^{p_k - 1} delta_j P^D(t_j)`
/// (`p_0 := 1`), the bounds follow the recursions
///
/// ```text
/// Q_min(T_i) = [1 - R - sum_{k<=i} ((1-R) M_k + S_i N_k) Q_max(T_{k-1})]
///              / [P^D(T_i) (1 - R + S_i delta_{p_i})]
/// Q_max(T_i) = [1 - R - sum_{k<i} ((1-R) M_k + S_i N_k) Q_min(T_k)]
///              / [P^D(T_{i-1}) (1 - R) + S_i (N_i + delta_{p_i} P^D(T_i))]
/// ```
///
/// seeded with `Q_max(T_0) = 1`. Values outside `[0, 1]` are clipped and the
/// indices recorded in [`BoundsResult::clipped`].
pub fn cds_model_free_bounds(q: &QuoteSet, disc: &DiscountCurveFn) -> Result<BoundsResult, BoundsError> {
    cds_model_free_bounds_with(q, disc, &Tolerances::default())
}

pub fn cds_model_free_bounds_with(
    q: &QuoteSet,
    disc: &DiscountCurveFn,
    tol: &Tolerances,
) -> Result<BoundsResult, BoundsError> {
    if q.kind() != QuoteKind::Cds {
        return Err(BoundsError::WrongKind { expected: QuoteKind::Cds });
    }
    let recovery = q.recovery().expect("CDS quotes carry a recovery rate");
    let lgd = 1.0 - recovery;
    let sched = q.schedule();
    let n = q.len();

    let mut m = Vec::with_capacity(n);
    let mut nn = Vec::with_capacity(n);
    for k in 1..=n {
        m.push(disc.discount(q.maturity(k - 1))? - disc.discount(q.maturity(k))?);
        let from = if k == 1 { 1 } else { sched.p(k - 1) };
        let mut acc = 0.0;
        for j in from..sched.p(k) {
            acc += sched.accrual(j) * disc.discount(sched.date(j))?;
        }
        nn.push(acc);
    }

    // q_max[k] = Q_max(T_k) with q_max[0] = 1; q_min[k - 1] = Q_min(T_k).
    let mut q_max = vec![1.0];
    let mut q_min: Vec<f64> = Vec::with_capacity(n);
    let mut clipped = Vec::new();
    let arbitrage = |i: usize, detail: String| {
        BoundsError::Arbitrage(ArbitrageReport {
            kind: QuoteKind::Cds,
            index: Some(i),
            maturity: Some(q.maturity(i)),
            rate: Some(q.rate(i)),
            threshold: None,
            detail,
        })
    };
    for i in 1..=n {
        let s = q.rate(i);
        let delta = sched.accrual(sched.p(i));
        let weight = |k: usize| lgd * m[k - 1] + s * nn[k - 1];
        let p_i = disc.discount(q.maturity(i))?;
        let p_prev = disc.discount(q.maturity(i - 1))?;

        let num_min = lgd - (1..=i).map(|k| weight(k) * q_max[k - 1]).sum::<f64>();
        let num_max = lgd - (1..i).map(|k| weight(k) * q_min[k - 1]).sum::<f64>();
        if num_min < -tol.equality || num_max < -tol.equality {
            return Err(arbitrage(i, format!("negative bound numerator (min {num_min}, max {num_max})")));
        }
        let raw_min = num_min / (p_i * (lgd + s * delta));
        let raw_max = num_max / (p_prev * lgd + s * (nn[i - 1] + delta * p_i));
        if raw_min > raw_max + tol.equality {
            return Err(arbitrage(i, format!("Q_min = {raw_min} exceeds Q_max = {raw_max}")));
        }
        let lo = raw_min.clamp(0.0, 1.0);
        let hi = raw_max.clamp(0.0, 1.0);
        if lo != raw_min || hi != raw_max {
            log::warn!(
                "CDS bounds at T_{i} = {} clipped from [{raw_min}, {raw_max}] to [{lo}, {hi}]",
                q.maturity(i)
            );
            clipped.push(i);
        }
        q_min.push(lo);
        q_max.push(hi);
    }

    let maturities: Vec<f64> = (1..=n).map(|i| q.maturity(i)).collect();
    let values: Vec<BoundValue> =
        q_min.iter().zip(&q_max[1..]).map(|(&min, &max)| BoundValue::Interval { min, max }).collect();
    Ok(BoundsResult {
        kind: QuoteKind::Cds,
        rectangles: BoundsResult::rectangles_from(&maturities, &values),
        maturities,
        values,
        h: Vec::new(),
        m,
        n: nn,
        clipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn aig(recovery: f64) -> QuoteSet {
        QuoteSet::cds_uniform(&[3.0, 5.0, 7.0, 10.0], &[0.0058, 0.0054, 0.0052, 0.0049], 4, recovery).unwrap()
    }

    #[test]
    fn table2_bounds() {
        let b = cds_model_free_bounds(&aig(0.4), &DiscountCurveFn::flat(0.03)).unwrap();
        assert_eq!(b.values.len(), 4);
        assert!(b.clipped.is_empty());
        // Reference values from an independent evaluation of the recursions.
        let expected = [
            (0.969_841_487_783_381, 0.973_113_444_860_147),
            (0.953_898_507_448_662, 0.958_877_743_405_860),
            (0.938_436_739_611_226, 0.945_191_551_374_266),
            (0.917_858_999_866_828, 0.927_818_559_584_112),
        ];
        for (v, (lo, hi)) in b.values.iter().zip(expected) {
            assert!((v.lower() - lo).abs() < 1e-12, "{} vs {lo}", v.lower());
            assert!((v.upper() - hi).abs() < 1e-12, "{} vs {hi}", v.upper());
        }
        for w in b.rectangles.windows(2) {
            assert!(w[1].v_top <= w[0].v_top);
            assert!(w[1].v_bottom <= w[0].v_bottom);
        }
    }

    #[test]
    fn auxiliary_sums_partition_the_premium_leg() {
        let disc = DiscountCurveFn::flat(0.03);
        let q = aig(0.4);
        let b = cds_model_free_bounds(&q, &disc).unwrap();
        let sched = q.schedule();
        let direct: f64 =
            (1..sched.len()).map(|j| sched.accrual(j) * disc.discount(sched.date(j)).unwrap()).sum();
        assert!((b.n.iter().sum::<f64>() - direct).abs() < 1e-14);
        assert!((b.m.iter().sum::<f64>() - (1.0 - (-0.3f64).exp())).abs() < 1e-14);
    }

    #[test]
    fn zero_spread_means_no_default() {
        let q = QuoteSet::cds_uniform(&[1.0], &[0.0], 4, 0.4).unwrap();
        let b = cds_model_free_bounds(&q, &DiscountCurveFn::flat(0.02)).unwrap();
        assert!((b.values[0].lower() - 1.0).abs() < 1e-14);
        assert!((b.values[0].upper() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn wrong_kind() {
        let q = QuoteSet::ois_annual(&[1.0], &[0.01]).unwrap();
        assert!(matches!(
            cds_model_free_bounds(&q, &DiscountCurveFn::flat(0.0)),
            Err(BoundsError::WrongKind { .. })
        ));
    }

    proptest! {
        #[test]
        fn bounds_decrease_with_recovery(r1 in 0.0f64..0.7, gap in 0.01f64..0.25) {
            let disc = DiscountCurveFn::flat(0.03);
            let lo = cds_model_free_bounds(&aig(r1), &disc).unwrap();
            let hi = cds_model_free_bounds(&aig(r1 + gap), &disc).unwrap();
            for (a, b) in lo.values.iter().zip(&hi.values) {
                prop_assert!(a.lower() >= b.lower() - 1e-15);
                prop_assert!(a.upper() >= b.upper() - 1e-15);
            }
        }
    }
}
