use super::LossKind;

/// `ln(1 + eˣ)` without overflow.
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Loss of one (positive, negative) score pair.
pub fn loss(kind: LossKind, pos_score: f64, neg_score: f64, margin: f64) -> f64 {
    match kind {
        LossKind::PairwiseHinge => (margin + neg_score - pos_score).max(0.0),
        LossKind::PointwiseLogistic => softplus(-pos_score) + softplus(neg_score),
    }
}

/// `(∂loss/∂pos_score, ∂loss/∂neg_score)`. The hinge uses the zero subgradient at its kink.
pub fn loss_derivatives(kind: LossKind, pos_score: f64, neg_score: f64, margin: f64) -> (f64, f64) {
    match kind {
        LossKind::PairwiseHinge => {
            if margin + neg_score - pos_score > 0.0 {
                (-1.0, 1.0)
            } else {
                (0.0, 0.0)
            }
        }
        LossKind::PointwiseLogistic => (-sigmoid(-pos_score), sigmoid(neg_score)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hinge_cases() {
        assert_eq!(loss(LossKind::PairwiseHinge, 5.0, 1.0, 1.0), 0.0);
        assert_eq!(loss(LossKind::PairwiseHinge, 1.0, 1.0, 1.0), 1.0);
    }

    #[test]
    fn logistic_at_zero() {
        let l = loss(LossKind::PointwiseLogistic, 0.0, 0.0, 1.0);
        assert!((l - 2.0 * std::f64::consts::LN_2).abs() < 1e-15);
        assert!((l - 1.3863).abs() < 1e-4);
    }

    #[test]
    fn softplus_is_stable() {
        assert_eq!(softplus(1000.0), 1000.0);
        assert!(softplus(-1000.0) >= 0.0 && softplus(-1000.0) < 1e-300);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let h = 1e-6;
        for &(p, n) in &[(0.3, -0.2), (-1.5, 2.0), (4.0, 3.5)] {
            for kind in [LossKind::PairwiseHinge, LossKind::PointwiseLogistic] {
                let (dp, dn) = loss_derivatives(kind, p, n, 1.0);
                let fp = (loss(kind, p + h, n, 1.0) - loss(kind, p - h, n, 1.0)) / (2.0 * h);
                let fn_ = (loss(kind, p, n + h, 1.0) - loss(kind, p, n - h, 1.0)) / (2.0 * h);
                assert!((dp - fp).abs() < 1e-6 && (dn - fn_).abs() < 1e-6);
            }
        }
    }
}
