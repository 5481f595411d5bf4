//! Equilibrium certification.
//!
//! Two first-order-condition checkers certify computed points: the Nash
//! conditions of the contest game (marginal profit
//! `m_ij = (v_ij/p_j)(1 - b_ij/p_j)`) and the market-equilibrium conditions
//! of the price-taking model (bang-per-buck `v_ij/p_j`). Both follow the
//! same pattern: firms that exhaust their budget need a common multiplier
//! `C_i >= 1` on their support, firms with slack need the multiplier 1, and
//! off-support entries must not beat it. The residual is the largest
//! violation of that pattern over all firms.
//!
//! [`delta_prime_bound`] quantifies how good a market equilibrium is as an
//! approximate Nash equilibrium of the contest game in a large economy, and
//! [`best_response_oracle`] measures it empirically by grid search.

use serde::{Deserialize, Serialize};

use crate::economy::{Economy, SpendingState};
use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::scalar::{lit, Scalar};

/// "Budget exhausted" means `K_i - sum_j b_ij <= FOC_BUDGET_TOL * K_i`.
pub const FOC_BUDGET_TOL: f64 = 1e-8;
/// "On support" means `b_ij >= FOC_SUPPORT_TOL * K_i`.
pub const FOC_SUPPORT_TOL: f64 = 1e-8;

/// Which first-order-condition system a report refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportKind {
    /// Nash equilibrium of the contest game (endogenous prices).
    Ne,
    /// Market equilibrium of the price-taking model.
    Me,
}

/// The approximation bound carried by a report: either a finite value or a
/// flag that no finite bound exists for this state (see
/// [`delta_prime_from_parts`] for the two ways that happens).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "lowercase")]
pub enum DeltaPrimeBound<F> {
    Bound(F),
    Undefined,
}

impl<F: Scalar> DeltaPrimeBound<F> {
    pub fn value(&self) -> Option<F> {
        match self {
            Self::Bound(v) => Some(*v),
            Self::Undefined => None,
        }
    }
}

/// Certification summary for one spending state.
#[derive(Debug, Clone)]
pub struct EquilibriumReport<F> {
    pub kind: ReportKind,
    /// Largest violation of the FOC pattern over all firms.
    pub residual: F,
    /// Per-firm multiplier (support maximum); `None` when the firm has no
    /// support entries.
    pub per_firm_c: Vec<Option<F>>,
    /// Bang-per-buck `beta_i = max_j v_ij / p_j`.
    pub bang_per_buck: Vec<F>,
    /// Largeness parameter `delta = max_{i,j} K_i / p_j`.
    pub delta: F,
    /// Approximation bound for the market-to-contest bridge.
    pub delta_prime: DeltaPrimeBound<F>,
}

impl<F: Scalar> EquilibriumReport<F> {
    pub fn to_json(&self) -> String {
        let to = |x: F| x.to_f64().unwrap_or(f64::NAN);
        let dto = ReportJson {
            kind: self.kind,
            residual: to(self.residual),
            per_firm_c: self.per_firm_c.iter().map(|c| c.map(&to)).collect(),
            bang_per_buck: self.bang_per_buck.iter().map(|&b| to(b)).collect(),
            delta: to(self.delta),
            delta_prime: match self.delta_prime {
                DeltaPrimeBound::Bound(v) => DeltaPrimeBound::Bound(to(v)),
                DeltaPrimeBound::Undefined => DeltaPrimeBound::Undefined,
            },
        };
        serde_json::to_string_pretty(&dto).expect("report serialization cannot fail")
    }
}

#[derive(Serialize, Deserialize)]
struct ReportJson {
    kind: ReportKind,
    residual: f64,
    per_firm_c: Vec<Option<f64>>,
    bang_per_buck: Vec<f64>,
    delta: f64,
    delta_prime: DeltaPrimeBound<f64>,
}

/// Residual of the Nash first-order conditions, with the per-firm
/// multipliers estimated as the support maximum of the marginal profit.
pub fn foc_residual_ne<F: Scalar>(
    econ: &Economy<F>,
    state: &SpendingState<F>,
) -> Result<(F, Vec<Option<F>>)> {
    foc_residual(econ, state, |v, p, b| (v / p) * (F::one() - b / p))
}

/// Residual of the market-equilibrium first-order conditions (no
/// own-spending correction: the margin is the bang-per-buck `v_ij/p_j`).
pub fn foc_residual_me<F: Scalar>(
    econ: &Economy<F>,
    state: &SpendingState<F>,
) -> Result<(F, Vec<Option<F>>)> {
    foc_residual(econ, state, |v, p, _b| v / p)
}

fn foc_residual<F: Scalar>(
    econ: &Economy<F>,
    state: &SpendingState<F>,
    margin: impl Fn(F, F, F) -> F,
) -> Result<(F, Vec<Option<F>>)> {
    let b = state.spending();
    let p = state.prices();
    let budget_tol = lit::<F>(FOC_BUDGET_TOL);
    let support_tol = lit::<F>(FOC_SUPPORT_TOL);

    let mut worst = F::zero();
    let mut multipliers = Vec::with_capacity(econ.firms());
    for i in 0..econ.firms() {
        let k = econ.budget(i);
        let spent: F = b.row(i).iter().copied().sum();
        let tight = k - spent <= budget_tol * k;

        // margins; a positively valued good with zero price admits an
        // unboundedly profitable deviation, so it contributes infinity
        let m_of = |j: usize| -> F {
            let v = econ.valuation(i, j);
            if p[j] > F::zero() {
                margin(v, p[j], b.at(i, j))
            } else if v > F::zero() {
                F::infinity()
            } else {
                F::zero()
            }
        };

        let support: Vec<bool> = (0..econ.goods())
            .map(|j| b.at(i, j) >= support_tol * k)
            .collect();

        let c_i = if support.iter().any(|&s| s) && tight {
            let mut c = F::neg_infinity();
            for (j, &on) in support.iter().enumerate() {
                if on {
                    c = c.max(m_of(j));
                }
            }
            Some(c)
        } else {
            None
        };

        // target multiplier: the estimated C_i on tight budgets, 1 otherwise
        let target = if tight { c_i.unwrap_or(F::one()) } else { F::one() };

        // firm residual: equality spread on the support, plus one-sided
        // excess off the support, plus the shortfall of the multiplier
        // below 1 on tight budgets
        let mut on_support = F::zero();
        let mut off_support = F::zero();
        for (j, &on) in support.iter().enumerate() {
            let m = m_of(j);
            if on {
                on_support = on_support.max((m - target).abs());
            } else {
                off_support = off_support.max((m - target).max(F::zero()));
            }
        }
        let mut firm_res = on_support + off_support;
        if tight {
            firm_res = firm_res + (F::one() - target).max(F::zero());
        }
        worst = worst.max(firm_res);
        multipliers.push(c_i);
    }
    Ok((worst, multipliers))
}

/// Largeness parameter `delta = max_{i,j} K_i / p_j` of a state.
pub fn largeness_delta<F: Scalar>(econ: &Economy<F>, state: &SpendingState<F>) -> F {
    let mut delta = F::zero();
    let kmax = econ
        .budgets()
        .iter()
        .copied()
        .fold(F::neg_infinity(), F::max);
    for &p in state.prices() {
        if p > F::zero() {
            delta = delta.max(kmax / p);
        } else {
            return F::infinity();
        }
    }
    delta
}

/// Bang-per-buck `beta_i = max_j v_ij / p_j` per firm.
pub fn bang_per_buck<F: Scalar>(econ: &Economy<F>, state: &SpendingState<F>) -> Vec<F> {
    (0..econ.firms())
        .map(|i| {
            let mut best = F::zero();
            for j in 0..econ.goods() {
                let p = state.prices()[j];
                if p > F::zero() {
                    best = best.max(econ.valuation(i, j) / p);
                } else if econ.valuation(i, j) > F::zero() {
                    best = F::infinity();
                }
            }
            best
        })
        .collect()
}

/// Approximation-quality bound for a market-equilibrium spending viewed as
/// a strategy profile of the contest game.
///
/// With `delta = max K_i/p_j` and `beta_i = max_j v_ij/p_j`, the bound is
///
/// ```text
/// delta' = max_{i: beta_i > 1} (beta_i/(1-delta) - 1)/(beta_i - 1) - 1
/// ```
///
/// and the profile is a `delta'`-Nash equilibrium. The bound is undefined
/// when `delta >= 1` (vacuous) or when some firm has
/// `1 - delta < beta_k < 1` (such a firm earns zero at the market
/// equilibrium but could earn a positive amount by deviating, so no finite
/// multiplicative bound exists). An empty max-set yields `delta' = 0`.
///
/// The caller is responsible for `state` actually being a market
/// equilibrium (residual within tolerance).
pub fn delta_prime_bound<F: Scalar>(
    econ: &Economy<F>,
    state: &SpendingState<F>,
) -> DeltaPrimeBound<F> {
    let delta = largeness_delta(econ, state);
    let betas = bang_per_buck(econ, state);
    delta_prime_from_parts(delta, &betas)
}

/// The bound as a pure function of `delta` and the per-firm `beta_i`.
pub fn delta_prime_from_parts<F: Scalar>(delta: F, betas: &[F]) -> DeltaPrimeBound<F> {
    if delta >= F::one() || !delta.is_finite() {
        return DeltaPrimeBound::Undefined;
    }
    let one = F::one();
    if betas.iter().any(|&b| one - delta < b && b < one) {
        return DeltaPrimeBound::Undefined;
    }
    let mut best: Option<F> = None;
    for &beta in betas {
        if beta > one {
            let ratio = (beta / (one - delta) - one) / (beta - one);
            best = Some(best.map_or(ratio, |b: F| b.max(ratio)));
        }
    }
    match best {
        Some(r) => DeltaPrimeBound::Bound(r - one),
        None => DeltaPrimeBound::Bound(F::zero()),
    }
}

/// Exhaustive grid search for firm `firm`'s best contest-game response
/// against the other rows of `profile`.
///
/// The feasible set `{b_i >= 0, sum_j b_ij <= K_i}` is discretized with
/// `grid` points per axis (lattice of step `K_i/grid`); utilities are the
/// contest utilities with prices endogenous to the deviation. Only
/// economies with at most three goods are supported.
///
/// Returns the best utility found and the maximizing row.
pub fn best_response_oracle<F: Scalar>(
    econ: &Economy<F>,
    firm: usize,
    profile: &Mat<F>,
    grid: usize,
) -> Result<(F, Vec<F>)> {
    let m = econ.goods();
    if m > 3 {
        return Err(Error::Unsupported(
            "exhaustive oracle is limited to at most 3 goods".into(),
        ));
    }
    if firm >= econ.firms() {
        return Err(Error::Dimension(format!("firm index {firm} out of range")));
    }
    if profile.rows() != econ.firms() || profile.cols() != m {
        return Err(Error::Dimension("profile shape".into()));
    }
    if grid < 2 {
        return Err(Error::Precondition("grid must have at least 2 points".into()));
    }

    // opponents' spending per good
    let mut opp = vec![F::zero(); m];
    for i in 0..econ.firms() {
        if i == firm {
            continue;
        }
        for (j, o) in opp.iter_mut().enumerate() {
            *o = *o + profile.at(i, j);
        }
    }

    let k = econ.budget(firm);
    let step = k / F::from_usize(grid).unwrap();
    let utility = |row: &[F]| -> F {
        let mut u = F::zero();
        for j in 0..m {
            let total = opp[j] + row[j];
            if total > F::zero() {
                u = u + econ.valuation(firm, j) * row[j] / total;
            }
            u = u - row[j];
        }
        u
    };

    let mut best = F::neg_infinity();
    let mut best_row = vec![F::zero(); m];
    let mut consider = |row: &[F]| {
        let u = utility(row);
        if u > best {
            best = u;
            best_row = row.to_vec();
        }
    };
    match m {
        1 => {
            for a in 0..=grid {
                consider(&[step * F::from_usize(a).unwrap()]);
            }
        }
        2 => {
            for a in 0..=grid {
                for b in 0..=(grid - a) {
                    consider(&[
                        step * F::from_usize(a).unwrap(),
                        step * F::from_usize(b).unwrap(),
                    ]);
                }
            }
        }
        _ => {
            for a in 0..=grid {
                for b in 0..=(grid - a) {
                    for c in 0..=(grid - a - b) {
                        consider(&[
                            step * F::from_usize(a).unwrap(),
                            step * F::from_usize(b).unwrap(),
                            step * F::from_usize(c).unwrap(),
                        ]);
                    }
                }
            }
        }
    }
    Ok((best, best_row))
}

/// Assemble the full certification report for a state.
pub fn assess<F: Scalar>(
    econ: &Economy<F>,
    state: &SpendingState<F>,
    kind: ReportKind,
) -> Result<EquilibriumReport<F>> {
    let (residual, per_firm_c) = match kind {
        ReportKind::Ne => foc_residual_ne(econ, state)?,
        ReportKind::Me => foc_residual_me(econ, state)?,
    };
    Ok(EquilibriumReport {
        kind,
        residual,
        per_firm_c,
        bang_per_buck: bang_per_buck(econ, state),
        delta: largeness_delta(econ, state),
        delta_prime: delta_prime_bound(econ, state),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::economy::PriceFamily;

    fn econ(v: &[Vec<f64>], k: &[f64]) -> Economy<f64> {
        let m = v[0].len();
        Economy::new(
            Mat::from_rows(v).unwrap(),
            k.to_vec(),
            vec![1.0; m],
            PriceFamily::Isoelastic,
        )
        .unwrap()
    }

    fn state(e: &Economy<f64>, rows: &[Vec<f64>]) -> SpendingState<f64> {
        SpendingState::from_spending(e, Mat::from_rows(rows).unwrap()).unwrap()
    }

    #[test]
    fn ne_interior_symmetric_duopoly() {
        // v=1 both firms, one good, interior NE at b_i = 1/4 each:
        // p = 1/2, m = (1/(1/2)) * (1 - 1/2) = 1, slack budgets -> residual 0
        let e = econ(&[vec![1.0], vec![1.0]], &[1.0, 1.0]);
        let s = state(&e, &[vec![0.25], vec![0.25]]);
        let (r, c) = foc_residual_ne(&e, &s).unwrap();
        assert!(r < 1e-14, "residual {r}");
        assert_eq!(c, vec![None, None]); // slack budgets carry no multiplier

        // perturbing one entry by +1% breaks the condition
        let s = state(&e, &[vec![0.2525], vec![0.25]]);
        let (r, _) = foc_residual_ne(&e, &s).unwrap();
        assert!(r > 1e-4);
    }

    #[test]
    fn ne_vacuous_support_firm() {
        // symmetric duopoly at its interior equilibrium plus a third firm
        // with too little value to enter: m_3 = (0.4/0.5)(1 - 0) = 0.8 <= 1,
        // so the outsider contributes no violation and carries no multiplier
        let e = econ(&[vec![1.0], vec![1.0], vec![0.4]], &[1.0, 1.0, 1.0]);
        let s = state(&e, &[vec![0.25], vec![0.25], vec![0.0]]);
        let (r, c) = foc_residual_ne(&e, &s).unwrap();
        assert!(r < 1e-14, "residual {r}");
        assert_eq!(c[2], None);

        // a valuable enough outsider does violate the conditions
        let e = econ(&[vec![1.0], vec![1.0], vec![0.7]], &[1.0, 1.0, 1.0]);
        let s = state(&e, &[vec![0.25], vec![0.25], vec![0.0]]);
        let (r, _) = foc_residual_ne(&e, &s).unwrap();
        assert!((r - 0.4).abs() < 1e-12, "residual {r}"); // 0.7/0.5 - 1
    }

    #[test]
    fn me_hand_examples() {
        // n=1, m=2, v=(2,1), b=(2/3,1/3), K=1: v/p = (3,3), tight, C=3
        let e = econ(&[vec![2.0, 1.0]], &[1.0]);
        let s = state(&e, &[vec![2.0 / 3.0, 1.0 / 3.0]]);
        let (r, c) = foc_residual_me(&e, &s).unwrap();
        assert!(r < 1e-12, "residual {r}");
        assert!((c[0].unwrap() - 3.0).abs() < 1e-12);

        // n=m=1, v=0.5, b=0.5, K=1: slack, v/p = 1 -> residual 0
        let e = econ(&[vec![0.5]], &[1.0]);
        let s = state(&e, &[vec![0.5]]);
        let (r, c) = foc_residual_me(&e, &s).unwrap();
        assert!(r < 1e-12);
        assert_eq!(c[0], None);

        // the same point fails the NE conditions: m = 1*(1 - 1) = 0 != 1
        let (r_ne, _) = foc_residual_ne(&e, &s).unwrap();
        assert!(r_ne > 0.5);
    }

    #[test]
    fn delta_prime_formula_values() {
        // delta = 0.1, all beta = 2 -> (2/0.9 - 1)/1 - 1 = 2/9
        let d = delta_prime_from_parts(0.1_f64, &[2.0, 2.0]);
        let v = d.value().unwrap();
        assert!((v - 2.0 / 9.0).abs() < 1e-12);

        // delta = 0 -> 0 for any beta > 1
        for beta in [1.5_f64, 10.0, 1e6] {
            let v: f64 = delta_prime_from_parts(0.0, &[beta]).value().unwrap();
            assert!(v.abs() < 1e-12);
        }

        // vacuous when delta >= 1
        assert_eq!(delta_prime_from_parts(1.0_f64, &[2.0]), DeltaPrimeBound::Undefined);

        // a firm in the dead zone (1-delta, 1) spoils the bound
        assert_eq!(
            delta_prime_from_parts(0.2_f64, &[2.0, 0.9]),
            DeltaPrimeBound::Undefined
        );
        // but beta <= 1 - delta is fine (firm never wants to enter)
        assert!(delta_prime_from_parts(0.2_f64, &[2.0, 0.7]).value().is_some());

        // empty max-set
        assert_eq!(
            delta_prime_from_parts(0.2_f64, &[0.5]).value().unwrap(),
            0.0
        );
    }

    #[test]
    fn delta_prime_monotone_in_beta() {
        let delta = 0.1_f64;
        let limit = delta / (1.0 - delta);
        let mut last = f64::INFINITY;
        for beta in [10.0, 100.0, 1000.0] {
            let v = delta_prime_from_parts(delta, &[beta]).value().unwrap();
            assert!(v < last, "delta' should decrease in beta");
            assert!(v > limit);
            last = v;
        }
        assert!((last - limit).abs() < 2e-4);
    }

    #[test]
    fn oracle_single_good_closed_form() {
        // best response to opponent spending b2: sqrt(v b2) - b2
        let e = econ(&[vec![2.0], vec![2.0]], &[10.0, 10.0]);
        let profile = Mat::from_rows(&[vec![0.0], vec![0.5]]).unwrap();
        let (best, arg) = best_response_oracle(&e, 0, &profile, 2000).unwrap();
        let closed = (2.0_f64 * 0.5).sqrt() - 0.5;
        assert!((arg[0] - closed).abs() < 10.0 / 2000.0 + 1e-12);
        let u_closed = 2.0 * closed / (closed + 0.5) - closed;
        assert!((best - u_closed).abs() < 1e-3);
    }

    #[test]
    fn oracle_against_zero_opponent_grabs_everything() {
        let e = econ(&[vec![2.0], vec![2.0]], &[1.0, 1.0]);
        let profile = Mat::from_rows(&[vec![0.0], vec![0.0]]).unwrap();
        let (best, arg) = best_response_oracle(&e, 0, &profile, 500).unwrap();
        // share jumps to 1 at the smallest positive grid point
        assert!(arg[0] > 0.0 && arg[0] <= 1.0 / 500.0 + 1e-12);
        assert!(best > 2.0 - 2.0 / 500.0 - 1e-12);
    }

    #[test]
    fn oracle_rejects_many_goods() {
        let e = econ(&[vec![1.0, 1.0, 1.0, 1.0]], &[1.0]);
        let profile = Mat::filled(1, 4, 0.0);
        assert!(matches!(
            best_response_oracle(&e, 0, &profile, 100),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn residual_continuity_under_perturbation() {
        let e = econ(&[vec![2.0, 1.0]], &[1.0]);
        let s = state(&e, &[vec![2.0 / 3.0, 1.0 / 3.0]]);
        let (r0, _) = foc_residual_me(&e, &s).unwrap();
        let eps = 1e-6;
        let s_eps = state(&e, &[vec![2.0 / 3.0 + eps, 1.0 / 3.0 - eps]]);
        let (r1, _) = foc_residual_me(&e, &s_eps).unwrap();
        // O(eps) movement of the residual on interior points
        assert!((r1 - r0).abs() < 100.0 * eps);
    }

    #[test]
    fn report_serializes() {
        let e = econ(&[vec![2.0, 1.0]], &[1.0]);
        let s = state(&e, &[vec![2.0 / 3.0, 1.0 / 3.0]]);
        let rep = assess(&e, &s, ReportKind::Me).unwrap();
        let text = rep.to_json();
        assert!(text.contains("\"kind\": \"me\""));
        assert!(text.contains("\"residual\""));
    }
}
