use super::AgentError;

fn ratio(logp_new: f64, logp_old: f64) -> Result<f64, AgentError> {
    let r = (logp_new - logp_old).exp();
    if !r.is_finite() {
        return Err(AgentError::NonFinite(format!(
            "probability ratio from log-probs {logp_new} and {logp_old}"
        )));
    }
    Ok(r)
}

/// `min(r A, clip(r, 1-eps, 1+eps) A)` with `r = exp(logp_new - logp_old)`.
pub fn ppo_clip_objective(
    logp_new: f64,
    logp_old: f64,
    advantage: f64,
    clip_epsilon: f64,
) -> Result<f64, AgentError> {
    let r = ratio(logp_new, logp_old)?;
    let clipped = r.clamp(1.0 - clip_epsilon, 1.0 + clip_epsilon);
    Ok((r * advantage).min(clipped * advantage))
}

/// Derivative of [`ppo_clip_objective`] with respect to `logp_new`. Zero
/// where the clipped branch is active.
pub fn ppo_clip_grad(
    logp_new: f64,
    logp_old: f64,
    advantage: f64,
    clip_epsilon: f64,
) -> Result<f64, AgentError> {
    let r = ratio(logp_new, logp_old)?;
    let clipped =
        (advantage > 0.0 && r > 1.0 + clip_epsilon) || (advantage < 0.0 && r < 1.0 - clip_epsilon);
    Ok(if clipped { 0.0 } else { r * advantage })
}

/// Mean squared error.
pub fn critic_loss(targets: &[f64], values: &[f64]) -> f64 {
    if targets.is_empty() {
        return 0.0;
    }
    targets
        .iter()
        .zip(values)
        .map(|(t, v)| (t - v).powi(2))
        .sum::<f64>()
        / targets.len() as f64
}

/// Derivative of `(target - value)^2` with respect to `value`.
pub fn critic_loss_grad(target: f64, value: f64) -> f64 {
    2.0 * (value - target)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_cases() {
        let ln = f64::ln;
        assert_eq!(ppo_clip_objective(0.3, 0.3, 1.7, 0.2).unwrap(), 1.7);
        let t = ppo_clip_objective(ln(2.0), 0.0, 1.0, 0.2).unwrap();
        assert!((t - 1.2).abs() < 1e-15);
        let t = ppo_clip_objective(ln(0.5), 0.0, -1.0, 0.2).unwrap();
        assert!((t + 0.8).abs() < 1e-15);
        assert!(ppo_clip_objective(1000.0, 0.0, 1.0, 0.2).is_err());
    }

    #[test]
    fn critic() {
        assert_eq!(critic_loss(&[3.0], &[3.0]), 0.0);
        assert_eq!(critic_loss(&[3.0], &[1.0]), 4.0);
        assert_eq!(critic_loss(&[3.0, 1.0], &[1.0, 1.0]), 2.0);
        assert_eq!(critic_loss_grad(3.0, 1.0), -4.0);
    }

    #[test]
    fn gradient_matches_differences_off_the_kinks() {
        for (lp, adv) in [
            (0.05, 1.0),
            (0.5, 1.0),
            (-0.5, 1.0),
            (0.05, -2.0),
            (-0.5, -2.0),
            (0.5, -2.0),
        ] {
            let h = 1e-6;
            let num = (ppo_clip_objective(lp + h, 0.0, adv, 0.2).unwrap()
                - ppo_clip_objective(lp - h, 0.0, adv, 0.2).unwrap())
                / (2.0 * h);
            let g = ppo_clip_grad(lp, 0.0, adv, 0.2).unwrap();
            assert!((num - g).abs() < 1e-6, "lp={lp} adv={adv}: {num} vs {g}");
        }
    }
}
