use rand::Rng;

use super::AgentError;
use crate::env::Action;
use crate::neural::sigmoid;

/// `ln(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Masked categorical over capacity levels times independent Bernoulli
/// provisioning decisions, one per user.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyDistribution {
    capacity_logits: Vec<f64>,
    provision_logits: Vec<f64>,
    mask: Vec<bool>,
    capacity_probs: Vec<f64>,
}

impl PolicyDistribution {
    pub fn new(
        capacity_logits: Vec<f64>,
        provision_logits: Vec<f64>,
        mask: Vec<bool>,
    ) -> Result<Self, AgentError> {
        if mask.len() != capacity_logits.len() {
            return Err(AgentError::Dimension(format!(
                "mask has {} entries for {} capacity logits",
                mask.len(),
                capacity_logits.len()
            )));
        }
        if capacity_logits
            .iter()
            .chain(&provision_logits)
            .any(|v| !v.is_finite())
        {
            return Err(AgentError::NonFinite("policy logits".into()));
        }
        let max = capacity_logits
            .iter()
            .zip(&mask)
            .filter(|(_, ok)| **ok)
            .map(|(z, _)| *z)
            .fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return Err(AgentError::NoFeasibleAction);
        }
        let mut capacity_probs: Vec<f64> = capacity_logits
            .iter()
            .zip(&mask)
            .map(|(z, ok)| if *ok { (z - max).exp() } else { 0.0 })
            .collect();
        let total: f64 = capacity_probs.iter().sum();
        capacity_probs.iter_mut().for_each(|p| *p /= total);
        Ok(Self {
            capacity_logits,
            provision_logits,
            mask,
            capacity_probs,
        })
    }

    /// Splits a raw actor output into `m` capacity logits followed by `n`
    /// provisioning logits.
    pub fn from_actor_output(actor: &[f64], mask: &[bool]) -> Result<Self, AgentError> {
        let m = mask.len();
        if actor.len() < m {
            return Err(AgentError::Dimension(format!(
                "actor output of {} values cannot hold {m} capacity logits",
                actor.len()
            )));
        }
        Self::new(actor[..m].to_vec(), actor[m..].to_vec(), mask.to_vec())
    }

    pub fn n_levels(&self) -> usize {
        self.capacity_logits.len()
    }

    pub fn n_users(&self) -> usize {
        self.provision_logits.len()
    }

    pub fn capacity_probs(&self) -> &[f64] {
        &self.capacity_probs
    }

    pub fn provision_probs(&self) -> Vec<f64> {
        self.provision_logits.iter().map(|l| sigmoid(*l)).collect()
    }

    fn check_action(&self, action: &Action) -> Result<(), AgentError> {
        if action.capacity_index >= self.n_levels() || action.provision.len() != self.n_users() {
            return Err(AgentError::Dimension(format!(
                "action ({}, {} bits) does not fit {} levels and {} users",
                action.capacity_index,
                action.provision.len(),
                self.n_levels(),
                self.n_users()
            )));
        }
        Ok(())
    }

    /// Joint log-probability; `-inf` for a masked capacity level.
    pub fn log_prob(&self, action: &Action) -> Result<f64, AgentError> {
        self.check_action(action)?;
        let p = self.capacity_probs[action.capacity_index];
        if p == 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        let bits: f64 = self
            .provision_logits
            .iter()
            .zip(&action.provision)
            .map(|(l, y)| if *y { -softplus(-l) } else { -softplus(*l) })
            .sum();
        Ok(p.ln() + bits)
    }

    fn capacity_entropy(&self) -> f64 {
        -self
            .capacity_probs
            .iter()
            .filter(|p| **p > 0.0)
            .map(|p| p * p.ln())
            .sum::<f64>()
    }

    pub fn entropy(&self) -> f64 {
        let bits: f64 = self
            .provision_logits
            .iter()
            .map(|l| {
                let p = sigmoid(*l);
                p * softplus(-l) + (1.0 - p) * softplus(*l)
            })
            .sum();
        self.capacity_entropy() + bits
    }

    /// Most likely capacity (lowest index on ties) and every user whose
    /// provisioning probability exceeds one half.
    pub fn mode(&self) -> Action {
        let mut best = 0;
        for (j, p) in self.capacity_probs.iter().enumerate() {
            if *p > self.capacity_probs[best] {
                best = j;
            }
        }
        Action::new(
            best,
            self.provision_logits.iter().map(|l| *l > 0.0).collect(),
        )
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (Action, f64) {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut capacity = None;
        let mut last = 0;
        for (j, p) in self.capacity_probs.iter().enumerate() {
            if *p == 0.0 {
                continue;
            }
            last = j;
            acc += p;
            if u < acc {
                capacity = Some(j);
                break;
            }
        }
        let provision = self
            .provision_logits
            .iter()
            .map(|l| rng.gen::<f64>() < sigmoid(*l))
            .collect();
        let action = Action::new(capacity.unwrap_or(last), provision);
        let lp = self
            .log_prob(&action)
            .expect("sampled action fits the distribution");
        (action, lp)
    }

    /// Gradient of `log_prob(action)` with respect to the concatenated logits.
    pub fn grad_log_prob(&self, action: &Action) -> Result<Vec<f64>, AgentError> {
        self.check_action(action)?;
        let mut g: Vec<f64> = self.capacity_probs.iter().map(|p| -p).collect();
        g[action.capacity_index] += 1.0;
        for (l, y) in self.provision_logits.iter().zip(&action.provision) {
            g.push(f64::from(u8::from(*y)) - sigmoid(*l));
        }
        Ok(g)
    }

    /// Gradient of `entropy()` with respect to the concatenated logits.
    pub fn grad_entropy(&self) -> Vec<f64> {
        let h = self.capacity_entropy();
        let mut g: Vec<f64> = self
            .capacity_probs
            .iter()
            .map(|p| if *p > 0.0 { -p * (p.ln() + h) } else { 0.0 })
            .collect();
        for l in &self.provision_logits {
            let s = sigmoid(*l);
            g.push(-l * s * (1.0 - s));
        }
        g
    }
}
