//! Proportional response on quasi-linear Fisher markets.
//!
//! The spending dynamics minimize the Shmyrev-type convex objective
//!
//! ```text
//! F(b) = - sum_ij b_ij ln v_ij + sum_i w_i + sum_j p_j ln p_j
//! ```
//!
//! over the box `b >= 0`, `sum_j b_ij <= K_i`, with `p_j = sum_i b_ij` and
//! `w_i = K_i - sum_j b_ij` eliminated through the constraints. The
//! objective is 1-Bregman convex w.r.t. the KL divergence, and the KL
//! mirror-descent step with unit step parameter has a closed form: it is
//! exactly the proportional response update ([`pr_step`]). [`run_pr`]
//! iterates it until the market-equilibrium first-order conditions hold.

use crate::economy::{Economy, SpendingState};
use crate::equilibrium;
use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::scalar::{lit, Scalar};

/// Configuration for the mirror-descent / proportional-response run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MdConfig<F> {
    /// Reciprocal step size of the mirror-descent step. The proportional
    /// response protocol is the closed-form step at `gamma_md = 1`; other
    /// values are exposed for experimentation only and carry no
    /// convergence-rate contract.
    pub gamma_md: F,
    /// Iteration cap.
    pub max_iters: usize,
    /// Convergence tolerance on the market-equilibrium FOC residual.
    pub tol: F,
    /// Record the full spending matrix at every step (needed for CSV
    /// trajectory dumps; off by default to keep long runs cheap).
    pub record_states: bool,
}

impl<F: Scalar> Default for MdConfig<F> {
    fn default() -> Self {
        Self {
            gamma_md: F::one(),
            max_iters: 100_000,
            tol: lit(1e-8),
            record_states: false,
        }
    }
}

impl<F: Scalar> MdConfig<F> {
    pub fn validate(&self) -> Result<()> {
        if self.gamma_md <= F::zero() {
            return Err(Error::Precondition("gamma_md must be > 0".into()));
        }
        if self.tol <= F::zero() {
            return Err(Error::Precondition("tol must be > 0".into()));
        }
        Ok(())
    }
}

/// Per-step diagnostics of a proportional-response run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryStep<F> {
    pub objective: F,
    pub residual: F,
}

/// Time-indexed record of a run, plus the final state.
#[derive(Debug, Clone)]
pub struct Trajectory<F> {
    /// Diagnostics for `t = 0, 1, ..., T`.
    pub steps: Vec<TrajectoryStep<F>>,
    /// Spending snapshots per step when requested in the config.
    pub states: Option<Vec<Mat<F>>>,
    /// The state at the last recorded step.
    pub final_state: SpendingState<F>,
    /// Whether the FOC residual reached the tolerance before the cap.
    pub converged: bool,
}

impl<F: Scalar> Trajectory<F> {
    /// Number of iterations actually performed.
    pub fn iterations(&self) -> usize {
        self.steps.len().saturating_sub(1)
    }
}

/// Objective value `F(b)` of the spending convex program.
///
/// Conventions: `0 ln 0 = 0` for the price entropy term, and `b ln v`
/// contributes nothing when `b = 0`. Positive spending on a zero-valuation
/// entry makes the objective infinite and is a domain error.
pub fn sh_objective<F: Scalar>(econ: &Economy<F>, state: &SpendingState<F>) -> Result<F> {
    let b = state.spending();
    let mut total = F::zero();
    for i in 0..econ.firms() {
        for j in 0..econ.goods() {
            let bij = b.at(i, j);
            if bij > F::zero() {
                let v = econ.valuation(i, j);
                if v <= F::zero() {
                    return Err(Error::Domain(format!(
                        "positive spending on zero-valuation entry ({i},{j}); objective is infinite"
                    )));
                }
                total = total - bij * v.ln();
            }
        }
    }
    for &w in state.leftover() {
        total = total + w;
    }
    for &p in state.prices() {
        if p > F::zero() {
            total = total + p * p.ln();
        }
    }
    Ok(total)
}

/// Gradient `dF/db_ij = ln p_j - ln v_ij` after eliminating `w` and `p`
/// through the program's equality constraints.
pub fn sh_gradient<F: Scalar>(econ: &Economy<F>, state: &SpendingState<F>) -> Result<Mat<F>> {
    let mut grad = Mat::filled(econ.firms(), econ.goods(), F::zero());
    for j in 0..econ.goods() {
        let p = state.prices()[j];
        if p <= F::zero() {
            return Err(Error::Domain(format!("price of good {j} must be > 0")));
        }
        let lnp = p.ln();
        for i in 0..econ.firms() {
            let v = econ.valuation(i, j);
            if v <= F::zero() {
                return Err(Error::Domain(format!(
                    "gradient undefined on zero-valuation entry ({i},{j})"
                )));
            }
            grad.set(i, j, lnp - v.ln());
        }
    }
    Ok(grad)
}

/// Generalized KL divergence `sum z' ln(z'/z) - sum z' + sum z` for
/// unnormalized nonnegative vectors (`0 ln 0 = 0`).
pub fn kl_divergence<F: Scalar>(z_prime: &[F], z: &[F]) -> Result<F> {
    if z_prime.len() != z.len() {
        return Err(Error::Dimension("KL arguments must have equal length".into()));
    }
    let mut total = F::zero();
    for (&a, &b) in z_prime.iter().zip(z) {
        if b <= F::zero() {
            return Err(Error::Domain("KL reference entries must be > 0".into()));
        }
        if a < F::zero() {
            return Err(Error::Domain("KL entries must be >= 0".into()));
        }
        if a > F::zero() {
            total = total + a * (a / b).ln() - a;
        }
        total = total + b;
    }
    Ok(total)
}

/// Bregman gap of the objective between two feasible points:
/// `Phi(b, b') = F(b') - F(b) - <grad F(b), b' - b>`, returned together with
/// `KL(b' || b)`.
///
/// The gap collapses onto the price aggregates: `Phi = KL(p' || p)` exactly,
/// which callers can cross-check against the returned pair.
pub fn bregman_gap<F: Scalar>(
    econ: &Economy<F>,
    b: &SpendingState<F>,
    b_prime: &SpendingState<F>,
) -> Result<(F, F)> {
    if !b.spending().same_shape(b_prime.spending()) {
        return Err(Error::Dimension("spending matrices differ in shape".into()));
    }
    if b.spending().as_slice().iter().any(|x| *x <= F::zero()) {
        return Err(Error::Domain(
            "base point must be strictly positive (relative interior)".into(),
        ));
    }
    let grad = sh_gradient(econ, b)?;
    let f_b = sh_objective(econ, b)?;
    let f_bp = sh_objective(econ, b_prime)?;
    let mut inner = F::zero();
    for (g, (&x_new, &x_old)) in grad
        .as_slice()
        .iter()
        .zip(b_prime.spending().as_slice().iter().zip(b.spending().as_slice()))
    {
        inner = inner + *g * (x_new - x_old);
    }
    let gap = f_bp - f_b - inner;
    let kl = kl_divergence(b_prime.spending().as_slice(), b.spending().as_slice())?;
    Ok((gap, kl))
}

/// One proportional-response step at unit step parameter.
///
/// Each firm computes its gross utility `S_i = sum_j v_ij y_ij` and
/// reinvests `min(S_i, K_i)` in proportion to the per-good utilities
/// `v_ij y_ij`. This is the KL mirror-descent argmin of the spending
/// program in closed form.
pub fn pr_step<F: Scalar>(econ: &Economy<F>, state: &SpendingState<F>) -> Result<SpendingState<F>> {
    pr_step_md(econ, state, F::one())
}

/// Mirror-descent step with reciprocal step size `gamma_md`.
///
/// For `gamma_md = 1` this is [`pr_step`]. For other values the argmin is
/// still closed-form (`q_ij = b_ij (v_ij / p_j)^(1/gamma)`, normalized to
/// the budget when it overshoots), but no convergence rate is claimed.
pub fn pr_step_md<F: Scalar>(
    econ: &Economy<F>,
    state: &SpendingState<F>,
    gamma_md: F,
) -> Result<SpendingState<F>> {
    if gamma_md <= F::zero() {
        return Err(Error::Precondition("gamma_md must be > 0".into()));
    }
    let unit = gamma_md == F::one();
    let b = state.spending();
    let y = state.shares();
    let mut next = Mat::filled(econ.firms(), econ.goods(), F::zero());
    for i in 0..econ.firms() {
        let mut gross = F::zero();
        let mut targets = vec![F::zero(); econ.goods()];
        for (j, t) in targets.iter_mut().enumerate() {
            let v = econ.valuation(i, j);
            if v <= F::zero() {
                continue; // pinned at zero: never valued, never funded
            }
            *t = if unit {
                v * y.at(i, j)
            } else {
                let p = state.prices()[j];
                if p <= F::zero() {
                    F::zero()
                } else {
                    b.at(i, j) * (v / p).powf(gamma_md.recip())
                }
            };
            gross = gross + *t;
        }
        if gross <= F::zero() {
            return Err(Error::Degenerate(format!(
                "firm {i} attains zero utility on all valued goods; cannot reinvest"
            )));
        }
        let k = econ.budget(i);
        let scale = if gross > k { k / gross } else { F::one() };
        for (j, t) in targets.iter().enumerate() {
            next.set(i, j, *t * scale);
        }
    }
    SpendingState::from_spending(econ, next)
}

/// Run proportional response from a positive start until the
/// market-equilibrium FOC residual drops below `cfg.tol` or the iteration
/// cap is reached.
///
/// The start must be strictly positive on every entry the firm values;
/// entries with `v_ij = 0` are pinned to zero before the first step (the
/// update sends them there in one round anyway, and the objective is only
/// finite on that face).
pub fn run_pr<F: Scalar>(econ: &Economy<F>, b0: &Mat<F>, cfg: &MdConfig<F>) -> Result<Trajectory<F>> {
    cfg.validate()?;
    if b0.rows() != econ.firms() || b0.cols() != econ.goods() {
        return Err(Error::Dimension("starting matrix shape".into()));
    }
    let mut start = b0.clone();
    for i in 0..econ.firms() {
        for j in 0..econ.goods() {
            if econ.valuation(i, j) > F::zero() {
                if b0.at(i, j) <= F::zero() {
                    return Err(Error::Precondition(format!(
                        "starting point must be strictly positive on valued entries; ({i},{j}) is not"
                    )));
                }
            } else {
                start.set(i, j, F::zero());
            }
        }
    }

    let mut state = SpendingState::from_spending(econ, start)?;
    let mut steps = Vec::new();
    let mut states = cfg.record_states.then(Vec::new);
    let mut converged = false;
    for t in 0..=cfg.max_iters {
        let objective = sh_objective(econ, &state)?;
        let (residual, _) = equilibrium::foc_residual_me(econ, &state)?;
        steps.push(TrajectoryStep { objective, residual });
        if let Some(history) = states.as_mut() {
            history.push(state.spending().clone());
        }
        if residual <= cfg.tol {
            converged = true;
            break;
        }
        if t == cfg.max_iters {
            break;
        }
        state = pr_step_md(econ, &state, cfg.gamma_md)?;
    }
    Ok(Trajectory {
        steps,
        states,
        final_state: state,
        converged,
    })
}
