//! Data loss, the version space it induces, and generalized concentrability.

use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;

use crate::data::Dataset;
use crate::math::ln;
use crate::mdp::{check_distribution, evaluate, tv_unchecked, Policy, TabularMdp};
use crate::{Error, Result};

/// A finite candidate model class sharing states, actions, discount and start distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelClass {
    models: Vec<TabularMdp>,
    truth_index: Option<usize>,
}

impl ModelClass {
    pub fn new(models: Vec<TabularMdp>, truth_index: Option<usize>) -> Result<Self> {
        let first = models
            .first()
            .ok_or_else(|| Error::InvalidArgument("model class is empty".to_string()))?;
        if let Some(i) = models.iter().position(|m| !m.same_frame(first)) {
            return Err(Error::DimensionMismatch(format!(
                "model {i} does not share states, actions, discount and initial distribution with model 0"
            )));
        }
        if let Some(t) = truth_index {
            if t >= models.len() {
                return Err(Error::IndexOutOfRange(format!(
                    "truth index {t} in a class of {}",
                    models.len()
                )));
            }
        }
        Ok(Self { models, truth_index })
    }

    pub fn models(&self) -> &[TabularMdp] {
        &self.models
    }

    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }

    pub fn truth_index(&self) -> Option<usize> {
        self.truth_index
    }

    pub fn model(&self, i: usize) -> &TabularMdp {
        &self.models[i]
    }
}

/// Models whose loss is within `alpha` of the best loss in the class.
#[derive(Debug, Clone, PartialEq)]
pub struct VersionSpace {
    /// Ascending model indices.
    pub members: Vec<usize>,
    /// Per-model loss; `-inf` for zero-likelihood models.
    pub losses: Vec<f64>,
    pub alpha: f64,
    pub max_loss: f64,
}

impl VersionSpace {
    pub fn contains(&self, i: usize) -> bool {
        self.members.binary_search(&i).is_ok()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// `max_loss - losses[i]`, `+inf` for zero-likelihood models.
    pub fn gap(&self, i: usize) -> f64 {
        self.max_loss - self.losses[i]
    }

    /// Copies of the member models, in index order.
    pub fn member_models(&self, class: &ModelClass) -> Vec<TabularMdp> {
        self.members.iter().map(|&i| class.model(i).clone()).collect()
    }
}

/// `sum_D [ln P_M(s'|s,a) - (R_M(s,a) - r)^2]`, or `-inf` if any observed
/// transition has zero probability under `M`.
pub fn loss(m: &TabularMdp, d: &Dataset) -> Result<f64> {
    d.check_against(m)?;
    let mut total = 0.0;
    for t in d.transitions() {
        let p = m.p(t.state, t.action, t.next_state);
        if p == 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        let err = m.r(t.state, t.action) - t.reward;
        total += ln(p) - err * err;
    }
    Ok(total)
}

/// Log-likelihood part `sum_D ln P_M(s'|s,a)`, `-inf` on zero support.
pub fn log_likelihood(m: &TabularMdp, d: &Dataset) -> Result<f64> {
    d.check_against(m)?;
    let mut total = 0.0;
    for t in d.transitions() {
        let p = m.p(t.state, t.action, t.next_state);
        if p == 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        total += ln(p);
    }
    Ok(total)
}

/// Squared reward-error part `sum_D (R_M(s,a) - r)^2`.
pub fn squared_reward_error(m: &TabularMdp, d: &Dataset) -> Result<f64> {
    d.check_against(m)?;
    Ok(d.transitions()
        .iter()
        .map(|t| {
            let e = m.r(t.state, t.action) - t.reward;
            e * e
        })
        .sum())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_nan() || alpha < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "alpha must be non-negative, got {alpha}"
        )));
    }
    Ok(())
}

/// Membership from precomputed losses.
pub fn version_space_from_losses(losses: Vec<f64>, alpha: f64) -> Result<VersionSpace> {
    check_alpha(alpha)?;
    let max_loss = losses
        .iter()
        .copied()
        .filter(|l| l.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    if max_loss == f64::NEG_INFINITY {
        return Err(Error::AllModelsZeroLikelihood);
    }
    let members = losses
        .iter()
        .enumerate()
        .filter(|(_, l)| l.is_finite() && max_loss - **l <= alpha)
        .map(|(i, _)| i)
        .collect();
    Ok(VersionSpace {
        members,
        losses,
        alpha,
        max_loss,
    })
}

/// Version space `{M : max_M' L(M') - L(M) <= alpha}`; `alpha = inf` keeps
/// every finite-loss model.
pub fn build_version_space(class: &ModelClass, d: &Dataset, alpha: f64) -> Result<VersionSpace> {
    check_alpha(alpha)?;
    let losses = class.models().iter().map(|m| loss(m, d)).collect::<Result<Vec<_>>>()?;
    version_space_from_losses(losses, alpha)
}

/// Theory-suggested threshold `c * ln(class_size / delta)`.
pub fn alpha_from_theory(class_size: usize, delta: f64, c: f64) -> Result<f64> {
    if class_size == 0 {
        return Err(Error::InvalidArgument("class size must be at least 1".to_string()));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidArgument(format!("delta must lie in (0, 1], got {delta}")));
    }
    if !(c.is_finite() && c >= 1.0) {
        return Err(Error::InvalidArgument(format!("constant c must be >= 1, got {c}")));
    }
    Ok(c * ln(class_size as f64 / delta))
}

fn check_pair(m: &TabularMdp, m_star: &TabularMdp, weights: &[f64]) -> Result<()> {
    if m.n_states() != m_star.n_states() || m.n_actions() != m_star.n_actions() {
        return Err(Error::DimensionMismatch(
            "models differ in state or action count".to_string(),
        ));
    }
    if weights.len() != m.n_states() * m.n_actions() {
        return Err(Error::DimensionMismatch(format!(
            "weighting has {} entries, expected {}",
            weights.len(),
            m.n_states() * m.n_actions()
        )));
    }
    Ok(())
}

fn support_error_unchecked(m: &TabularMdp, m_star: &TabularMdp, weights: &[f64]) -> f64 {
    let na = m.n_actions();
    let mut total = 0.0;
    for (k, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let (s, a) = (k / na, k % na);
        let tv = tv_unchecked(m.transition_row(s, a), m_star.transition_row(s, a));
        let dr = m.r(s, a) - m_star.r(s, a);
        total += w * (tv * tv + dr * dr);
    }
    total
}

/// `sum_{s,a} w(s,a) [TV(P_M, P*)^2 + (R_M - R*)^2]` for a distribution `w` over pairs.
pub fn on_support_error(m: &TabularMdp, m_star: &TabularMdp, weights: &[f64]) -> Result<f64> {
    check_pair(m, m_star, weights)?;
    check_distribution(weights, "state-action weighting")?;
    Ok(support_error_unchecked(m, m_star, weights))
}

const OCCUPANCY_ZERO: f64 = 1e-14;

/// Generalized single-policy concentrability `C(pi)`: the largest ratio over
/// the class of model error under `d^pi_{M*}` to model error under `mu`.
/// `0/0` counts as 0; positive over zero is `+inf`.
pub fn concentrability(class: &ModelClass, pi: &Policy, mu: &[f64], m_star: &TabularMdp) -> Result<f64> {
    // Unreachable pairs can come out of the solve as +-1e-17; they must not
    // register as visited.
    let occupancy: Vec<f64> = evaluate(m_star, pi)?
        .occupancy
        .into_iter()
        .map(|d| if d < OCCUPANCY_ZERO { 0.0 } else { d })
        .collect();
    check_distribution(mu, "behavior distribution")?;
    let mut sup = 0.0f64;
    for m in class.models() {
        check_pair(m, m_star, mu)?;
        let num = support_error_unchecked(m, m_star, &occupancy);
        if num == 0.0 {
            continue;
        }
        let den = support_error_unchecked(m, m_star, mu);
        if den == 0.0 {
            return Ok(f64::INFINITY);
        }
        sup = sup.max(num / den);
    }
    Ok(sup)
}

/// Standard coefficient `max_{d^pi > 0} d^pi(s,a) / mu(s,a)` (`+inf` when uncovered).
pub fn density_ratio_coefficient(occupancy: &[f64], mu: &[f64]) -> f64 {
    occupancy
        .iter()
        .zip(mu)
        .filter(|(d, _)| **d > 0.0)
        .map(|(d, m)| if *m == 0.0 { f64::INFINITY } else { d / m })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{DatasetMeta, Transition};
    use alloc::string::String;
    use alloc::vec;

    fn dataset(ts: Vec<Transition>) -> Dataset {
        let n = ts.len();
        Dataset::new(
            ts,
            DatasetMeta {
                seed: 0,
                n,
                behavior_id: String::from("test"),
                noise: None,
            },
        )
        .unwrap()
    }

    fn coin(p_heads: f64, r: f64) -> TabularMdp {
        TabularMdp::new(
            2,
            1,
            vec![p_heads, 1.0 - p_heads, p_heads, 1.0 - p_heads],
            vec![r, r],
            0.5,
            vec![1.0, 0.0],
        )
        .unwrap()
    }

    fn t(s: usize, a: usize, r: f64, s2: usize) -> Transition {
        Transition {
            state: s,
            action: a,
            reward: r,
            next_state: s2,
        }
    }

    #[test]
    fn loss_examples() {
        let m = coin(0.5, 0.5);
        assert_eq!(loss(&m, &dataset(vec![])).unwrap(), 0.0);
        let one = dataset(vec![t(0, 0, 0.5, 1)]);
        assert!((loss(&m, &one).unwrap() - (-core::f64::consts::LN_2)).abs() < 1e-12);
        let sure = coin(1.0, 0.5);
        assert_eq!(loss(&sure, &one).unwrap(), f64::NEG_INFINITY);
        let bad = dataset(vec![t(0, 3, 0.5, 1)]);
        assert!(matches!(loss(&m, &bad), Err(Error::IndexOutOfRange(_))));
    }

    #[test]
    fn zero_likelihood_model_is_excluded() {
        let class = ModelClass::new(vec![coin(1.0, 0.5), coin(0.5, 0.5)], Some(1)).unwrap();
        let d = dataset(vec![t(0, 0, 0.5, 1), t(0, 0, 0.5, 0)]);
        for alpha in [0.0, 1.0, 1e6, f64::INFINITY] {
            let vs = build_version_space(&class, &d, alpha).unwrap();
            assert_eq!(vs.members, vec![1]);
        }
    }

    #[test]
    fn all_zero_likelihood_is_an_error() {
        let class = ModelClass::new(vec![coin(1.0, 0.5)], None).unwrap();
        let d = dataset(vec![t(0, 0, 0.5, 1)]);
        assert_eq!(
            build_version_space(&class, &d, 1.0),
            Err(Error::AllModelsZeroLikelihood)
        );
    }

    #[test]
    fn singleton_and_slack_thresholds() {
        let d = dataset(vec![t(0, 0, 0.5, 1), t(1, 0, 0.5, 1)]);
        let single = ModelClass::new(vec![coin(0.3, 0.5)], Some(0)).unwrap();
        assert_eq!(build_version_space(&single, &d, 0.0).unwrap().members, vec![0]);
        let class = ModelClass::new(vec![coin(0.3, 0.5), coin(0.5, 0.1), coin(0.9, 1.0)], None).unwrap();
        assert_eq!(
            build_version_space(&class, &d, f64::INFINITY).unwrap().members,
            vec![0, 1, 2]
        );
        assert!(build_version_space(&class, &d, -1.0).is_err());
    }

    #[test]
    fn alpha_examples() {
        assert_eq!(alpha_from_theory(1, 1.0, 3.0).unwrap(), 0.0);
        assert!((alpha_from_theory(8, 0.1, 1.0).unwrap() - 4.382_026_634_673_881).abs() < 1e-12);
        let a = alpha_from_theory(5, 0.2, 2.0).unwrap();
        let b = alpha_from_theory(10, 0.2, 2.0).unwrap();
        assert!((b - a - 2.0 * core::f64::consts::LN_2).abs() < 1e-12);
        assert!(alpha_from_theory(5, 0.0, 1.0).is_err());
        assert!(alpha_from_theory(5, 1.5, 1.0).is_err());
        assert!(alpha_from_theory(0, 0.5, 1.0).is_err());
    }

    #[test]
    fn on_support_examples() {
        let m = coin(0.5, 0.5);
        let w = [0.5, 0.5];
        assert_eq!(on_support_error(&m, &m, &w).unwrap(), 0.0);
        let shifted =
            TabularMdp::new(2, 1, m.transition_table().to_vec(), vec![0.5, 0.7], 0.5, vec![1.0, 0.0]).unwrap();
        let w = [0.3, 0.7];
        assert!((on_support_error(&shifted, &m, &w).unwrap() - 0.7 * 0.04).abs() < 1e-15);
        assert!(on_support_error(&shifted, &m, &[1.0]).is_err());
    }

    #[test]
    fn concentrability_conventions() {
        // Two states, two actions; action 1 at state 0 moves to state 1.
        let base = TabularMdp::new(
            2,
            2,
            vec![1.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0],
            vec![0.1, 0.2, 0.3, 0.4],
            0.9,
            vec![1.0, 0.0],
        )
        .unwrap();
        let pi = Policy::deterministic(vec![1, 0], 2).unwrap();
        let truth_only = ModelClass::new(vec![base.clone()], Some(0)).unwrap();
        let mu = [0.25; 4];
        assert_eq!(concentrability(&truth_only, &pi, &mu, &base).unwrap(), 0.0);

        // Same mu as d^pi: every ratio is 1.
        let occ = evaluate(&base, &pi).unwrap().occupancy;
        let other = TabularMdp::new(
            2,
            2,
            base.transition_table().to_vec(),
            vec![0.1, 0.25, 0.35, 0.4],
            0.9,
            vec![1.0, 0.0],
        )
        .unwrap();
        let class = ModelClass::new(vec![base.clone(), other.clone()], Some(0)).unwrap();
        let c = concentrability(&class, &pi, &occ, &base).unwrap();
        assert!(c <= 1.0 + 1e-12);

        // Error on (s1, a0), visited by pi but never by mu.
        let uncovered = TabularMdp::new(
            2,
            2,
            base.transition_table().to_vec(),
            vec![0.1, 0.2, 0.9, 0.4],
            0.9,
            vec![1.0, 0.0],
        )
        .unwrap();
        let class = ModelClass::new(vec![base.clone(), uncovered], Some(0)).unwrap();
        let mu = [0.5, 0.5, 0.0, 0.0];
        assert_eq!(concentrability(&class, &pi, &mu, &base).unwrap(), f64::INFINITY);
    }
}
