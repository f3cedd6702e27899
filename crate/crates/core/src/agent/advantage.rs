use super::AgentError;

/// Discounted suffix sums `G_t = sum_{k>=t} gamma^(k-t) r_k`.
pub fn returns_to_go(rewards: &[f64], gamma: f64) -> Vec<f64> {
    let mut out = vec![0.0; rewards.len()];
    let mut acc = 0.0;
    for t in (0..rewards.len()).rev() {
        acc = rewards[t] + gamma * acc;
        out[t] = acc;
    }
    out
}

/// GAE(lambda) over one finished episode, bootstrapping with 0 after the last
/// step. Returns `(advantages, value_targets)` with
/// `value_targets = advantages + values`.
pub fn compute_advantages(
    rewards: &[f64],
    values: &[f64],
    gamma: f64,
    lambda: f64,
) -> Result<(Vec<f64>, Vec<f64>), AgentError> {
    if rewards.is_empty() {
        return Err(AgentError::EmptyTrajectory);
    }
    if rewards.len() != values.len() {
        return Err(AgentError::Dimension(format!(
            "{} rewards but {} values",
            rewards.len(),
            values.len()
        )));
    }
    let n = rewards.len();
    let mut adv = vec![0.0; n];
    let mut acc = 0.0;
    for t in (0..n).rev() {
        let next = if t + 1 < n { values[t + 1] } else { 0.0 };
        let delta = rewards[t] + gamma * next - values[t];
        acc = delta + gamma * lambda * acc;
        adv[t] = acc;
    }
    let targets = adv.iter().zip(values).map(|(a, v)| a + v).collect();
    Ok((adv, targets))
}

/// Shifts and scales to mean 0 and unit (population) standard deviation.
/// A constant input becomes all zeros.
pub fn normalize_advantages(adv: &mut [f64]) {
    if adv.is_empty() {
        return;
    }
    let n = adv.len() as f64;
    let mean = adv.iter().sum::<f64>() / n;
    let var = adv.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n;
    let std = var.sqrt();
    for a in adv.iter_mut() {
        *a = if std > 1e-12 { (*a - mean) / std } else { 0.0 };
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn suffix_sums() {
        assert_eq!(returns_to_go(&[1.0, 2.0, 3.0], 1.0), vec![6.0, 5.0, 3.0]);
        let (adv, ret) = compute_advantages(&[1.0, 2.0, 3.0], &[0.5, 0.5, 0.5], 1.0, 1.0).unwrap();
        assert_eq!(ret, vec![6.0, 5.0, 3.0]);
        assert_eq!(adv, vec![5.5, 4.5, 2.5]);
    }

    #[test]
    fn zero_rewards() {
        let (adv, ret) = compute_advantages(&[0.0; 3], &[1.0, -2.0, 0.5], 1.0, 1.0).unwrap();
        assert_eq!(ret, vec![0.0; 3]);
        assert_eq!(adv, vec![-1.0, 2.0, -0.5]);
    }

    #[test]
    fn lambda_zero_gives_td_residuals() {
        let r = [1.0, 0.5, 2.0];
        let v = [0.3, 0.8, 1.1];
        let g = 0.9;
        let (adv, _) = compute_advantages(&r, &v, g, 0.0).unwrap();
        // hand-computed residuals
        let expected = [1.0 + 0.9 * 0.8 - 0.3, 0.5 + 0.9 * 1.1 - 0.8, 2.0 - 1.1];
        for (a, e) in adv.iter().zip(expected) {
            assert!((a - e).abs() < 1e-15);
        }
    }

    #[test]
    fn errors() {
        assert_eq!(
            compute_advantages(&[], &[], 1.0, 1.0),
            Err(AgentError::EmptyTrajectory)
        );
        assert!(compute_advantages(&[1.0], &[], 1.0, 1.0).is_err());
    }

    #[test]
    fn normalization() {
        let mut a = [1.0, 2.0, 3.0, 4.0];
        normalize_advantages(&mut a);
        let mean: f64 = a.iter().sum::<f64>() / 4.0;
        let var: f64 = a.iter().map(|x| x * x).sum::<f64>() / 4.0;
        assert!(mean.abs() < 1e-15 && (var - 1.0).abs() < 1e-12);
        let mut c = [2.0; 3];
        normalize_advantages(&mut c);
        assert_eq!(c, [0.0; 3]);
    }

    proptest! {
        #[test]
        fn lambda_one_matches_returns(
            r in prop::collection::vec(0.0..10.0f64, 1..20),
            g in 0.5..=1.0f64,
        ) {
            let v: Vec<f64> = r.iter().map(|x| x * 0.3 - 1.0).collect();
            let (adv, targets) = compute_advantages(&r, &v, g, 1.0).unwrap();
            let ret = returns_to_go(&r, g);
            for t in 0..r.len() {
                prop_assert!((targets[t] - ret[t]).abs() < 1e-9);
                prop_assert!((adv[t] - (ret[t] - v[t])).abs() < 1e-9);
            }
        }
    }
}
