use serde::{Deserialize, Serialize};

use super::BehaviorError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImputeMethod {
    Linear,
    ForwardFill,
}

/// Fills missing entries of a series.
///
/// `Linear` interpolates between the surrounding present values; `ForwardFill`
/// carries the last present value forward. Gaps before the first or after the
/// last present value take the nearest present value under both methods.
pub fn impute_missing(
    series: &[Option<f64>],
    method: ImputeMethod,
) -> Result<Vec<f64>, BehaviorError> {
    let first = series
        .iter()
        .position(Option::is_some)
        .ok_or(BehaviorError::AllMissing)?;
    let mut out = Vec::with_capacity(series.len());
    let lead = series[first].unwrap_or_default();
    out.extend(std::iter::repeat_n(lead, first));

    let mut last_idx = first;
    let mut last_val = lead;
    out.push(lead);
    for (i, v) in series.iter().enumerate().skip(first + 1) {
        if let Some(v) = *v {
            if method == ImputeMethod::Linear && i > last_idx + 1 {
                let span = (i - last_idx) as f64;
                for (k, slot) in out[last_idx + 1..i].iter_mut().enumerate() {
                    let w = (k + 1) as f64 / span;
                    *slot = last_val + (v - last_val) * w;
                }
            }
            out.push(v);
            last_idx = i;
            last_val = v;
        } else {
            out.push(last_val);
        }
    }
    Ok(out)
}

/// Sample mean and (n-1) standard deviation.
pub fn mean_std(xs: &[f64]) -> Result<(f64, f64), BehaviorError> {
    if xs.len() < 2 {
        return Err(BehaviorError::TooShort(xs.len()));
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.iter().all(|x| *x == xs[0]) {
        return Ok((xs[0], 0.0));
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok((mean, var.sqrt()))
}

/// Product-moment correlation coefficient.
pub fn pearson_correlation(a: &[f64], b: &[f64]) -> Result<f64, BehaviorError> {
    if a.len() != b.len() {
        return Err(BehaviorError::LengthMismatch(a.len(), b.len()));
    }
    if a.len() < 2 {
        return Err(BehaviorError::TooShort(a.len()));
    }
    let constant = |s: &[f64]| s.iter().all(|x| *x == s[0]);
    if constant(a) || constant(b) {
        return Err(BehaviorError::ZeroVariance);
    }
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(BehaviorError::ZeroVariance);
    }
    Ok((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn linear_midpoint() {
        let s = [Some(1.0), None, Some(3.0)];
        assert_eq!(
            impute_missing(&s, ImputeMethod::Linear).unwrap(),
            vec![1.0, 2.0, 3.0]
        );
    }

    #[test]
    fn forward_fill_tail() {
        let s = [Some(5.0), None, None];
        assert_eq!(
            impute_missing(&s, ImputeMethod::ForwardFill).unwrap(),
            vec![5.0, 5.0, 5.0]
        );
    }

    #[test]
    fn leading_gap_back_fills() {
        let s = [None, None, Some(4.0), None, Some(8.0), None];
        assert_eq!(
            impute_missing(&s, ImputeMethod::Linear).unwrap(),
            vec![4.0, 4.0, 4.0, 6.0, 8.0, 8.0]
        );
        assert_eq!(
            impute_missing(&s, ImputeMethod::ForwardFill).unwrap(),
            vec![4.0, 4.0, 4.0, 4.0, 8.0, 8.0]
        );
    }

    #[test]
    fn all_missing_is_an_error() {
        assert_eq!(
            impute_missing(&[None, None], ImputeMethod::Linear),
            Err(BehaviorError::AllMissing)
        );
    }

    #[test]
    fn pearson_hand_case() {
        // mean(a)=2, mean(b)=5; sab=-1, saa=2, sbb=2 -> -0.5
        let r = pearson_correlation(&[1.0, 2.0, 3.0], &[6.0, 4.0, 5.0]).unwrap();
        assert!((r + 0.5).abs() < 1e-15);
    }

    #[test]
    fn pearson_identity_and_negation() {
        let a = [0.3, 1.7, -2.0, 4.4, 0.0];
        let neg: Vec<f64> = a.iter().map(|x| -x).collect();
        assert!((pearson_correlation(&a, &a).unwrap() - 1.0).abs() < 1e-15);
        assert!((pearson_correlation(&a, &neg).unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn pearson_errors() {
        assert_eq!(
            pearson_correlation(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(BehaviorError::ZeroVariance)
        );
        assert_eq!(
            pearson_correlation(&[1.0, 2.0], &[1.0, 2.0, 3.0]),
            Err(BehaviorError::LengthMismatch(2, 3))
        );
        assert_eq!(
            pearson_correlation(&[1.0], &[1.0]),
            Err(BehaviorError::TooShort(1))
        );
    }

    #[test]
    fn constant_series_has_zero_std() {
        assert_eq!(mean_std(&[0.1, 0.1, 0.1]).unwrap(), (0.1, 0.0));
    }

    fn series() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-100.0f64..100.0, 3..40)
    }

    proptest! {
        #[test]
        fn pearson_bounds_symmetry_affine(a in series(), seed in 0u64..1000, scale in 0.01f64..50.0, shift in -50.0f64..50.0) {
            let b: Vec<f64> = a.iter().enumerate()
                .map(|(i, x)| x * 0.3 + ((i as u64 * 7919 + seed) % 97) as f64)
                .collect();
            if let (Ok(r), Ok(r2)) = (pearson_correlation(&a, &b), pearson_correlation(&b, &a)) {
                prop_assert!((-1.0..=1.0).contains(&r));
                prop_assert!((r - r2).abs() < 1e-12);
                let a2: Vec<f64> = a.iter().map(|x| scale * x + shift).collect();
                let r3 = pearson_correlation(&a2, &b).unwrap();
                prop_assert!((r - r3).abs() < 1e-12);
            }
        }

        #[test]
        fn imputation_is_idempotent(raw in prop::collection::vec(prop::option::of(-10.0f64..10.0), 1..30), linear in any::<bool>()) {
            prop_assume!(raw.iter().any(Option::is_some));
            let method = if linear { ImputeMethod::Linear } else { ImputeMethod::ForwardFill };
            let once = impute_missing(&raw, method).unwrap();
            let wrapped: Vec<Option<f64>> = once.iter().copied().map(Some).collect();
            let twice = impute_missing(&wrapped, method).unwrap();
            prop_assert_eq!(&once, &twice);
            for (o, r) in once.iter().zip(&raw) {
                if let Some(r) = r { prop_assert_eq!(o, r); }
            }
        }
    }
}
