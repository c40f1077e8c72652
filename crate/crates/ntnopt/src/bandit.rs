//! Constrained online mirror descent under bandit feedback.
//!
//! The learner keeps a distribution over arms on the gamma-clipped simplex.
//! Each step samples an arm, turns the observed cost and violation into
//! importance-weighted gradient estimates, takes a negative-entropy mirror
//! step (the exponentiated-gradient closed form), projects back onto the
//! clipped simplex, and nudges the dual variable by the realized violation.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::{ArmGridConfig, BanditConfig};
use crate::heuristic::ThetaConfig;
use crate::{Error, Result};

/// Exponent clip applied before `exp` to keep mirror steps finite.
const EXP_CLIP: f64 = 700.0;

/// The arm grid: the Cartesian product of the four value lists, indexed
/// row-major in the order (epsilon, tau_nu, tau_rsrp, alpha).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmSpace {
    pub epsilon: Vec<f64>,
    pub tau_nu: Vec<f64>,
    pub tau_rsrp_dbm: Vec<f64>,
    pub alpha: Vec<f64>,
}

impl ArmSpace {
    pub fn from_config(cfg: &ArmGridConfig) -> Result<ArmSpace> {
        if cfg.arm_count() == 0 {
            return Err(Error::config("arm grids must be non-empty"));
        }
        Ok(ArmSpace {
            epsilon: cfg.epsilon.clone(),
            tau_nu: cfg.tau_nu.clone(),
            tau_rsrp_dbm: cfg.tau_rsrp_dbm.clone(),
            alpha: cfg.alpha.clone(),
        })
    }

    pub fn len(&self) -> usize {
        self.epsilon.len() * self.tau_nu.len() * self.tau_rsrp_dbm.len() * self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Arm index -> configuration tuple.
    pub fn theta(&self, index: usize) -> ThetaConfig {
        assert!(index < self.len(), "arm index {index} out of range");
        let n_alpha = self.alpha.len();
        let n_rsrp = self.tau_rsrp_dbm.len();
        let n_tau = self.tau_nu.len();
        let alpha_i = index % n_alpha;
        let rest = index / n_alpha;
        let rsrp_i = rest % n_rsrp;
        let rest = rest / n_rsrp;
        let tau_i = rest % n_tau;
        let eps_i = rest / n_tau;
        ThetaConfig {
            epsilon: self.epsilon[eps_i],
            tau_nu: self.tau_nu[tau_i],
            tau_rsrp_dbm: self.tau_rsrp_dbm[rsrp_i],
            alpha: self.alpha[alpha_i],
        }
    }

    /// Configuration tuple -> arm index, when every field is on its grid.
    pub fn index_of(&self, theta: &ThetaConfig) -> Option<usize> {
        let pos = |grid: &[f64], v: f64| grid.iter().position(|&g| g == v);
        let eps_i = pos(&self.epsilon, theta.epsilon)?;
        let tau_i = pos(&self.tau_nu, theta.tau_nu)?;
        let rsrp_i = pos(&self.tau_rsrp_dbm, theta.tau_rsrp_dbm)?;
        let alpha_i = pos(&self.alpha, theta.alpha)?;
        Some(
            ((eps_i * self.tau_nu.len() + tau_i) * self.tau_rsrp_dbm.len() + rsrp_i)
                * self.alpha.len()
                + alpha_i,
        )
    }
}

/// Resolved learner hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub eta: f64,
    pub gamma_floor: f64,
    pub omega: f64,
    pub mu: f64,
}

impl Hyperparams {
    /// Horizon-scaled defaults: `eta = sqrt(ln n / (nT))`, `gamma =
    /// min(1/(2n), 1/sqrt(T))`, `omega = 1/sqrt(T)`, `mu = T^(-1/4)`.
    pub fn defaults(n_arms: usize, horizon: usize) -> Hyperparams {
        let n = n_arms.max(2) as f64;
        let t = horizon.max(1) as f64;
        Hyperparams {
            eta: (n.ln() / (n * t)).sqrt(),
            gamma_floor: (1.0 / (2.0 * n)).min(1.0 / t.sqrt()),
            omega: 1.0 / t.sqrt(),
            mu: t.powf(-0.25),
        }
    }

    /// Defaults overridden by any explicitly configured values.
    pub fn resolve(cfg: &BanditConfig, n_arms: usize, horizon: usize) -> Hyperparams {
        let d = Self::defaults(n_arms, horizon);
        Hyperparams {
            eta: cfg.eta.unwrap_or(d.eta),
            gamma_floor: cfg.gamma_floor.unwrap_or(d.gamma_floor),
            omega: cfg.omega.unwrap_or(d.omega),
            mu: cfg.mu.unwrap_or(d.mu),
        }
    }
}

/// Bandit feedback from one step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeedbackRecord {
    pub step: u64,
    pub arm: usize,
    /// Normalized cost in [0, 1].
    pub cost: f64,
    /// Violation in [0, 1].
    pub violation: f64,
    /// Probability the chosen arm carried when sampled.
    pub x_at: f64,
}

/// A one-hot gradient estimate: `value` at `arm`, zero elsewhere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SparseGrad {
    pub arm: usize,
    pub value: f64,
}

/// Importance-weighted estimates of the cost and violation gradients:
/// `(f/x_at) e_a` and `(g/x_at) e_a`.
pub fn gradient_estimates(record: &FeedbackRecord) -> (SparseGrad, SparseGrad) {
    debug_assert!(record.x_at > 0.0);
    (
        SparseGrad {
            arm: record.arm,
            value: record.cost / record.x_at,
        },
        SparseGrad {
            arm: record.arm,
            value: record.violation / record.x_at,
        },
    )
}

/// Update direction of the Lagrangian: bias plus cost estimate plus the
/// dual-weighted violation estimate, all collapsing onto the sampled arm.
pub fn combined_gradient(record: &FeedbackRecord, lambda: f64, omega: f64) -> SparseGrad {
    let (f_tilde, g_tilde) = gradient_estimates(record);
    SparseGrad {
        arm: record.arm,
        value: omega / record.x_at + f_tilde.value + lambda * g_tilde.value,
    }
}

/// Negative-entropy mirror step in closed form: `y_a = x_a * exp(-eta b_a)`.
/// Only the sampled coordinate moves; the exponent is clipped at +-700.
pub fn omd_step(x: &[f64], b: &SparseGrad, eta: f64) -> Vec<f64> {
    let mut y = x.to_vec();
    let exponent = (-eta * b.value).clamp(-EXP_CLIP, EXP_CLIP);
    y[b.arm] *= exponent.exp();
    y
}

/// Dense variant used by the dual-path equivalence checks.
pub fn omd_step_dense(x: &[f64], b: &[f64], eta: f64) -> Vec<f64> {
    x.iter()
        .zip(b)
        .map(|(&xi, &bi)| xi * (-eta * bi).clamp(-EXP_CLIP, EXP_CLIP).exp())
        .collect()
}

/// Bregman (KL) projection onto the clipped simplex `{x : sum x = 1,
/// x_a >= gamma}`. The solution has the form `x_a = max(gamma, c y_a)` with
/// `c` fixed by the mass constraint; found by sort-and-scan.
pub fn project_clipped_simplex(y: &[f64], gamma: f64) -> Vec<f64> {
    let n = y.len();
    assert!(n > 0, "cannot project an empty vector");
    assert!(
        gamma >= 0.0 && gamma * n as f64 <= 1.0 + 1e-12,
        "gamma_floor {gamma} exceeds 1/n"
    );
    debug_assert!(y.iter().all(|&v| v > 0.0), "projection input must be positive");

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| y[b].partial_cmp(&y[a]).unwrap());

    // Prefix sums of y in descending order; free the k largest coordinates
    // and pin the rest to gamma, taking the largest feasible k.
    let mut prefix = 0.0;
    let mut prefixes = Vec::with_capacity(n);
    for &idx in &order {
        prefix += y[idx];
        prefixes.push(prefix);
    }
    for k in (1..=n).rev() {
        let mass_free = 1.0 - gamma * (n - k) as f64;
        if mass_free <= 0.0 {
            continue;
        }
        let c = mass_free / prefixes[k - 1];
        if c * y[order[k - 1]] >= gamma - 1e-15 {
            let mut x = vec![gamma; n];
            for &idx in &order[..k] {
                x[idx] = (c * y[idx]).max(gamma);
            }
            return x;
        }
    }
    // Only reachable when gamma = 1/n: everything sits on the floor.
    vec![gamma; n]
}

/// Dual ascent on the violation: `lambda' = max(0, lambda + mu g)`.
pub fn dual_update(lambda: f64, mu: f64, violation: f64) -> f64 {
    (lambda + mu * violation).max(0.0)
}

/// Learner state: the action distribution, the dual variable, and the step
/// counter. Strictly sequential; one update per observed step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyState {
    pub x: Vec<f64>,
    pub lambda: f64,
    pub hyper: Hyperparams,
    pub step: u64,
}

impl PolicyState {
    /// Uniform initial distribution with `lambda = 0`.
    pub fn new_uniform(n_arms: usize, hyper: Hyperparams) -> Result<PolicyState> {
        if n_arms == 0 {
            return Err(Error::config("policy needs at least one arm"));
        }
        if hyper.gamma_floor < 0.0 || hyper.gamma_floor > 1.0 / n_arms as f64 {
            return Err(Error::config(format!(
                "gamma_floor {} outside [0, 1/n]",
                hyper.gamma_floor
            )));
        }
        if hyper.eta < 0.0 || hyper.mu < 0.0 || hyper.omega < 0.0 {
            return Err(Error::config("eta, mu, omega must be >= 0"));
        }
        Ok(PolicyState {
            x: vec![1.0 / n_arms as f64; n_arms],
            lambda: 0.0,
            hyper,
            step: 0,
        })
    }

    pub fn n_arms(&self) -> usize {
        self.x.len()
    }

    /// Draw an arm from the current distribution.
    pub fn sample_action(&self, rng: &mut impl Rng) -> usize {
        let r: f64 = rng.gen();
        let mut cdf = 0.0;
        for (arm, &p) in self.x.iter().enumerate() {
            cdf += p;
            if r < cdf {
                return arm;
            }
        }
        self.x.len() - 1
    }

    /// Arm with the highest probability (ties to the lowest index).
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (arm, &p) in self.x.iter().enumerate() {
            if p > self.x[best] {
                best = arm;
            }
        }
        best
    }

    /// One full update from the feedback of the sampled arm.
    pub fn update(&mut self, arm: usize, cost: f64, violation: f64) -> FeedbackRecord {
        let record = FeedbackRecord {
            step: self.step,
            arm,
            cost,
            violation,
            x_at: self.x[arm],
        };
        let b = combined_gradient(&record, self.lambda, self.hyper.omega);
        let y = omd_step(&self.x, &b, self.hyper.eta);
        self.x = project_clipped_simplex(&y, self.hyper.gamma_floor);
        self.lambda = dual_update(self.lambda, self.hyper.mu, violation);
        self.step += 1;
        record
    }

    /// Distribution / dual invariants; checked by tests after every step.
    pub fn invariants_hold(&self) -> bool {
        let sum: f64 = self.x.iter().sum();
        (sum - 1.0).abs() <= 1e-9
            && self
                .x
                .iter()
                .all(|&p| p >= self.hyper.gamma_floor - 1e-12 && p.is_finite())
            && self.lambda >= 0.0
    }
}

/// The oracle action at one step: the cheapest zero-violation arm, or the
/// cheapest minimum-violation arm when no feasible arm exists (flagged).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleStep {
    pub arm: usize,
    pub loss: f64,
    /// False when the zero-violation feasible set was empty at this step.
    pub feasible: bool,
}

/// Per-step oracle sequence from full-information loss/violation vectors.
pub fn oracle_policy(costs: &[Vec<f64>], violations: &[Vec<f64>]) -> Vec<OracleStep> {
    assert_eq!(costs.len(), violations.len());
    costs
        .iter()
        .zip(violations)
        .map(|(f, g)| {
            assert_eq!(f.len(), g.len());
            let min_violation = g.iter().copied().fold(f64::INFINITY, f64::min);
            let feasible = min_violation == 0.0;
            let mut best: Option<usize> = None;
            for arm in 0..f.len() {
                if g[arm] > min_violation {
                    continue;
                }
                if best.is_none_or(|b| f[arm] < f[b]) {
                    best = Some(arm);
                }
            }
            let arm = best.expect("non-empty arm set");
            OracleStep {
                arm,
                loss: f[arm],
                feasible,
            }
        })
        .collect()
}

/// Cumulative regret and violation curves: `R_t = sum realized cost - sum
/// oracle loss`, `V_t = sum realized violation`.
pub fn regret_and_violation(
    realized_costs: &[f64],
    realized_violations: &[f64],
    oracle_losses: &[f64],
) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(realized_costs.len(), oracle_losses.len());
    assert_eq!(realized_costs.len(), realized_violations.len());
    let mut regret = Vec::with_capacity(realized_costs.len());
    let mut violation = Vec::with_capacity(realized_costs.len());
    let mut cost_sum = 0.0;
    let mut oracle_sum = 0.0;
    let mut violation_sum = 0.0;
    for t in 0..realized_costs.len() {
        cost_sum += realized_costs[t];
        oracle_sum += oracle_losses[t];
        violation_sum += realized_violations[t];
        regret.push(cost_sum - oracle_sum);
        violation.push(violation_sum);
    }
    (regret, violation)
}
