//! Immutable market instances and the shared market arithmetic.
//!
//! An [`Economy`] holds the primitives every dynamic consumes: valuations,
//! budgets, marginal costs and the price-function family. A
//! [`SpendingState`] is one point of the spending dynamics together with its
//! derived prices, market shares and leftover budgets. Both are immutable
//! after construction and all operations here are pure, so values can be
//! shared freely across threads.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::scalar::{lit, Scalar};

/// Price-function family for the goods.
///
/// `Isoelastic` is constant total sales revenue, `P(X) = v/X`; `Power` is
/// `P(X) = X^(-gamma)` with `gamma > 0` the inverse demand elasticity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PriceFamily<F> {
    Isoelastic,
    Power { gamma: F },
}

/// Immutable market instance: `n` firms spending on `m` goods.
#[derive(Debug, Clone, PartialEq)]
pub struct Economy<F> {
    valuations: Mat<F>,
    budgets: Vec<F>,
    costs: Vec<F>,
    price_family: PriceFamily<F>,
}

impl<F: Scalar> Economy<F> {
    /// Validating constructor.
    ///
    /// `valuations` is firms x goods with `v_ij >= 0` and at least one
    /// positive entry per firm; budgets and marginal costs are strictly
    /// positive; `gamma > 0` for the power family.
    pub fn new(
        valuations: Mat<F>,
        budgets: Vec<F>,
        costs: Vec<F>,
        price_family: PriceFamily<F>,
    ) -> Result<Self> {
        let (n, m) = (valuations.rows(), valuations.cols());
        if n == 0 || m == 0 {
            return Err(Error::InvalidEconomy("need at least one firm and one good".into()));
        }
        if budgets.len() != n {
            return Err(Error::Dimension(format!(
                "budget vector length {} != firm count {n}",
                budgets.len()
            )));
        }
        if costs.len() != m {
            return Err(Error::Dimension(format!(
                "cost vector length {} != good count {m}",
                costs.len()
            )));
        }
        if valuations.as_slice().iter().any(|v| *v < F::zero() || !v.is_finite()) {
            return Err(Error::InvalidEconomy("valuations must be finite and >= 0".into()));
        }
        for i in 0..n {
            if valuations.row(i).iter().all(|v| *v <= F::zero()) {
                return Err(Error::InvalidEconomy(format!(
                    "firm {i} values no good (all-zero valuation row)"
                )));
            }
        }
        if budgets.iter().any(|k| *k <= F::zero() || !k.is_finite()) {
            return Err(Error::InvalidEconomy("budgets must be finite and > 0".into()));
        }
        if costs.iter().any(|a| *a <= F::zero() || !a.is_finite()) {
            return Err(Error::InvalidEconomy("marginal costs must be finite and > 0".into()));
        }
        if let PriceFamily::Power { gamma } = price_family {
            if gamma <= F::zero() || !gamma.is_finite() {
                return Err(Error::InvalidEconomy("power family needs gamma > 0".into()));
            }
        }
        Ok(Self {
            valuations,
            budgets,
            costs,
            price_family,
        })
    }

    pub fn firms(&self) -> usize {
        self.valuations.rows()
    }

    pub fn goods(&self) -> usize {
        self.valuations.cols()
    }

    pub fn valuations(&self) -> &Mat<F> {
        &self.valuations
    }

    /// `v_ij`.
    #[inline]
    pub fn valuation(&self, firm: usize, good: usize) -> F {
        self.valuations.at(firm, good)
    }

    pub fn budgets(&self) -> &[F] {
        &self.budgets
    }

    #[inline]
    pub fn budget(&self, firm: usize) -> F {
        self.budgets[firm]
    }

    pub fn costs(&self) -> &[F] {
        &self.costs
    }

    pub fn price_family(&self) -> PriceFamily<F> {
        self.price_family
    }

    /// Price of good `good` at aggregate output `x > 0`.
    ///
    /// Isoelastic: `v_j / x`, with `v_j` the good's sales-revenue constant
    /// (valuations are row-constant in that model; the first firm's row is
    /// used). Power: `x^(-gamma)`.
    pub fn price_at(&self, good: usize, x: F) -> Result<F> {
        if good >= self.goods() {
            return Err(Error::Dimension(format!("good index {good} out of range")));
        }
        if x <= F::zero() {
            return Err(Error::Domain("aggregate output must be > 0".into()));
        }
        Ok(match self.price_family {
            PriceFamily::Isoelastic => self.valuations.at(0, good) / x,
            PriceFamily::Power { gamma } => x.powf(-gamma),
        })
    }

    /// Parse from the canonical JSON document.
    pub fn from_json(text: &str) -> Result<Self> {
        let dto: EconomyJson =
            serde_json::from_str(text).map_err(|e| Error::InvalidEconomy(e.to_string()))?;
        dto.into_economy()
    }

    /// Serialize to the canonical JSON document.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&EconomyJson::from_economy(self))
            .expect("economy serialization cannot fail")
    }
}

/// Wire form of an [`Economy`]:
/// `{"n":..,"m":..,"V":[[..]],"K":[..],"alpha":[..],"price_family":{"kind":..,"gamma":..}}`.
#[derive(Debug, Serialize, Deserialize)]
struct EconomyJson {
    n: usize,
    m: usize,
    #[serde(rename = "V")]
    v: Vec<Vec<f64>>,
    #[serde(rename = "K")]
    k: Vec<f64>,
    alpha: Vec<f64>,
    price_family: PriceFamilyJson,
}

#[derive(Debug, Serialize, Deserialize)]
struct PriceFamilyJson {
    kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma: Option<f64>,
}

impl EconomyJson {
    fn from_economy<F: Scalar>(e: &Economy<F>) -> Self {
        let to = |x: F| x.to_f64().unwrap_or(f64::NAN);
        Self {
            n: e.firms(),
            m: e.goods(),
            v: e.valuations.to_rows().iter().map(|r| r.iter().map(|&x| to(x)).collect()).collect(),
            k: e.budgets.iter().map(|&x| to(x)).collect(),
            alpha: e.costs.iter().map(|&x| to(x)).collect(),
            price_family: match e.price_family {
                PriceFamily::Isoelastic => PriceFamilyJson {
                    kind: "isoelastic".into(),
                    gamma: None,
                },
                PriceFamily::Power { gamma } => PriceFamilyJson {
                    kind: "power".into(),
                    gamma: Some(to(gamma)),
                },
            },
        }
    }

    fn into_economy<F: Scalar>(self) -> Result<Economy<F>> {
        if self.v.len() != self.n || self.v.iter().any(|r| r.len() != self.m) {
            return Err(Error::Dimension(format!(
                "V must be {}x{} to match n, m",
                self.n, self.m
            )));
        }
        let from = |x: f64| -> Result<F> {
            F::from_f64(x).ok_or_else(|| Error::InvalidEconomy(format!("value {x} not representable")))
        };
        let rows: Vec<Vec<F>> = self
            .v
            .iter()
            .map(|r| r.iter().map(|&x| from(x)).collect::<Result<Vec<F>>>())
            .collect::<Result<_>>()?;
        let family = match self.price_family.kind.as_str() {
            "isoelastic" => PriceFamily::Isoelastic,
            "power" => {
                let gamma = self
                    .price_family
                    .gamma
                    .ok_or_else(|| Error::InvalidEconomy("power family needs a gamma field".into()))?;
                PriceFamily::Power { gamma: from(gamma)? }
            }
            other => {
                return Err(Error::InvalidEconomy(format!(
                    "unknown price family kind {other:?}"
                )))
            }
        };
        Economy::new(
            Mat::from_rows(&rows)?,
            self.k.iter().map(|&x| from(x)).collect::<Result<_>>()?,
            self.alpha.iter().map(|&x| from(x)).collect::<Result<_>>()?,
            family,
        )
    }
}

/// Market shares `y_ij = b_ij / sum_k b_kj`.
///
/// Columns with zero total spending yield zero shares for every firm, which
/// keeps trajectories total when a good is abandoned; on positive columns
/// the shares sum to one.
pub fn market_share<F: Scalar>(spending: &Mat<F>) -> Result<Mat<F>> {
    if spending.as_slice().iter().any(|b| *b < F::zero()) {
        return Err(Error::Domain("spending must be >= 0".into()));
    }
    let sums = spending.col_sums();
    let mut shares = Mat::filled(spending.rows(), spending.cols(), F::zero());
    for i in 0..spending.rows() {
        for (j, &s) in sums.iter().enumerate() {
            if s > F::zero() {
                shares.set(i, j, spending.at(i, j) / s);
            }
        }
    }
    Ok(shares)
}

/// Contest utility of firm `firm` at the full spending profile:
/// `sum_j v_ij y_ij - sum_j b_ij` with shares endogenous to `spending`.
pub fn tc_utility<F: Scalar>(econ: &Economy<F>, spending: &Mat<F>, firm: usize) -> Result<F> {
    check_profile(econ, spending)?;
    if firm >= econ.firms() {
        return Err(Error::Dimension(format!("firm index {firm} out of range")));
    }
    let shares = market_share(spending)?;
    let mut u = F::zero();
    for j in 0..econ.goods() {
        u = u + econ.valuation(firm, j) * shares.at(firm, j) - spending.at(firm, j);
    }
    Ok(u)
}

/// Price-taking (Fisher) utility of firm `firm` at spending row `row` under
/// exogenous prices: `sum_j v_ij b_ij / p_j - sum_j b_ij`.
///
/// Spending a positive amount on a zero-priced good is a domain error.
pub fn fm_utility<F: Scalar>(econ: &Economy<F>, row: &[F], prices: &[F], firm: usize) -> Result<F> {
    if row.len() != econ.goods() || prices.len() != econ.goods() {
        return Err(Error::Dimension("spending row / price vector length".into()));
    }
    if firm >= econ.firms() {
        return Err(Error::Dimension(format!("firm index {firm} out of range")));
    }
    let mut u = F::zero();
    for j in 0..econ.goods() {
        let b = row[j];
        if b < F::zero() {
            return Err(Error::Domain("spending must be >= 0".into()));
        }
        if b > F::zero() {
            if prices[j] <= F::zero() {
                return Err(Error::Domain(format!(
                    "positive spending on good {j} with non-positive price"
                )));
            }
            u = u + econ.valuation(firm, j) * b / prices[j] - b;
        }
    }
    Ok(u)
}

fn check_profile<F: Scalar>(econ: &Economy<F>, spending: &Mat<F>) -> Result<()> {
    if spending.rows() != econ.firms() || spending.cols() != econ.goods() {
        return Err(Error::Dimension(format!(
            "spending is {}x{}, economy is {}x{}",
            spending.rows(),
            spending.cols(),
            econ.firms(),
            econ.goods()
        )));
    }
    Ok(())
}

/// One state of the spending dynamics with its derived quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct SpendingState<F> {
    spending: Mat<F>,
    prices: Vec<F>,
    shares: Mat<F>,
    leftover: Vec<F>,
}

impl<F: Scalar> SpendingState<F> {
    /// Build the state from a spending matrix, deriving prices
    /// `p_j = sum_i b_ij`, shares and leftovers `w_i = K_i - sum_j b_ij`.
    ///
    /// Row sums may exceed the budget only by floating-point slack (1e-12
    /// relative); leftovers are clamped at zero.
    pub fn from_spending(econ: &Economy<F>, spending: Mat<F>) -> Result<Self> {
        check_profile(econ, &spending)?;
        if spending.as_slice().iter().any(|b| *b < F::zero() || !b.is_finite()) {
            return Err(Error::Domain("spending must be finite and >= 0".into()));
        }
        let slack = lit::<F>(1e-12);
        let mut leftover = Vec::with_capacity(econ.firms());
        for (i, &k) in econ.budgets().iter().enumerate() {
            let spent: F = spending.row(i).iter().copied().sum();
            if spent > k * (F::one() + slack) {
                return Err(Error::Domain(format!(
                    "firm {i} spends {spent} which exceeds its budget {k}"
                )));
            }
            leftover.push((k - spent).max(F::zero()));
        }
        let prices = spending.col_sums();
        let shares = market_share(&spending)?;
        Ok(Self {
            spending,
            prices,
            shares,
            leftover,
        })
    }

    pub fn spending(&self) -> &Mat<F> {
        &self.spending
    }

    pub fn prices(&self) -> &[F] {
        &self.prices
    }

    pub fn shares(&self) -> &Mat<F> {
        &self.shares
    }

    pub fn leftover(&self) -> &[F] {
        &self.leftover
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn econ_1x1(v: f64, k: f64) -> Economy<f64> {
        Economy::new(
            Mat::from_rows(&[vec![v]]).unwrap(),
            vec![k],
            vec![1.0],
            PriceFamily::Isoelastic,
        )
        .unwrap()
    }

    #[test]
    fn share_single_firm_is_one() {
        let y = market_share(&Mat::from_rows(&[vec![5.0]]).unwrap()).unwrap();
        assert_eq!(y.at(0, 0), 1.0);
    }

    #[test]
    fn share_equal_spending_splits_evenly() {
        let y = market_share(&Mat::from_rows(&[vec![2.0], vec![2.0]]).unwrap()).unwrap();
        assert_eq!(y.at(0, 0), 0.5);
        assert_eq!(y.at(1, 0), 0.5);
    }

    #[test]
    fn share_one_three_column() {
        let y = market_share(&Mat::from_rows(&[vec![1.0], vec![3.0]]).unwrap()).unwrap();
        assert_eq!(y.at(0, 0), 0.25);
        assert_eq!(y.at(1, 0), 0.75);
    }

    #[test]
    fn share_zero_column_is_zero() {
        let y = market_share(&Mat::from_rows(&[vec![0.0, 1.0], vec![0.0, 1.0]]).unwrap()).unwrap();
        assert_eq!(y.at(0, 0), 0.0);
        assert_eq!(y.at(1, 0), 0.0);
        assert_eq!(y.at(0, 1), 0.5);
    }

    #[test]
    fn tc_utility_hand_values() {
        // one firm, one good, v=2, b=0.5: y=1, u = 2 - 0.5
        let e = econ_1x1(2.0, 1.0);
        let b = Mat::from_rows(&[vec![0.5]]).unwrap();
        assert_eq!(tc_utility(&e, &b, 0).unwrap(), 1.5);

        // zero spending everywhere: utility 0
        let b0 = Mat::from_rows(&[vec![0.0]]).unwrap();
        assert_eq!(tc_utility(&e, &b0, 0).unwrap(), 0.0);
    }

    #[test]
    fn tc_utility_symmetric_two_firms() {
        // v=1 both, one good, both spend x: u_i = 0.5 - x
        let e: Economy<f64> = Economy::new(
            Mat::from_rows(&[vec![1.0], vec![1.0]]).unwrap(),
            vec![1.0, 1.0],
            vec![1.0],
            PriceFamily::Isoelastic,
        )
        .unwrap();
        for x in [0.1, 0.25, 0.4] {
            let b = Mat::from_rows(&[vec![x], vec![x]]).unwrap();
            let u = tc_utility(&e, &b, 0).unwrap();
            assert!((u - (0.5 - x)).abs() < 1e-15);
        }
    }

    #[test]
    fn fm_utility_hand_values() {
        let e: Economy<f64> = Economy::new(
            Mat::from_rows(&[vec![2.0, 1.0]]).unwrap(),
            vec![1.0],
            vec![1.0, 1.0],
            PriceFamily::Isoelastic,
        )
        .unwrap();
        // b_i = 0 -> 0
        assert_eq!(fm_utility(&e, &[0.0, 0.0], &[1.0, 1.0], 0).unwrap(), 0.0);
        // v=(2,1), p=(1,1), b=(1,0) -> 2 - 1 = 1
        assert_eq!(fm_utility(&e, &[1.0, 0.0], &[1.0, 1.0], 0).unwrap(), 1.0);
        // v_ij = p_j: utility 0 for any feasible row
        assert!(fm_utility(&e, &[0.3, 0.6], &[2.0, 1.0], 0).unwrap().abs() < 1e-15);
        // positive spending on a zero-priced good is a domain error
        assert!(matches!(
            fm_utility(&e, &[0.0, 0.5], &[1.0, 0.0], 0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn price_at_families() {
        let iso = econ_1x1(1.0, 1.0);
        assert_eq!(iso.price_at(0, 2.0).unwrap(), 0.5);
        assert!(matches!(iso.price_at(0, 0.0), Err(Error::Domain(_))));

        let pow1: Economy<f64> = Economy::new(
            Mat::from_rows(&[vec![1.0]]).unwrap(),
            vec![1.0],
            vec![1.0],
            PriceFamily::Power { gamma: 1.0 },
        )
        .unwrap();
        assert_eq!(pow1.price_at(0, 1.0).unwrap(), 1.0);

        let pow2: Economy<f64> = Economy::new(
            Mat::from_rows(&[vec![1.0]]).unwrap(),
            vec![1.0],
            vec![1.0],
            PriceFamily::Power { gamma: 2.0 },
        )
        .unwrap();
        assert_eq!(pow2.price_at(0, 2.0).unwrap(), 0.25);
    }

    #[test]
    fn constructor_rejects_bad_instances() {
        let v: Mat<f64> = Mat::from_rows(&[vec![1.0]]).unwrap();
        assert!(Economy::new(v.clone(), vec![0.0], vec![1.0], PriceFamily::Isoelastic).is_err());
        assert!(Economy::new(v.clone(), vec![1.0], vec![-1.0], PriceFamily::Isoelastic).is_err());
        assert!(Economy::new(v.clone(), vec![1.0, 1.0], vec![1.0], PriceFamily::Isoelastic).is_err());
        assert!(
            Economy::new(v, vec![1.0], vec![1.0], PriceFamily::Power { gamma: 0.0 }).is_err()
        );
        let zero_row: Mat<f64> = Mat::from_rows(&[vec![0.0, 0.0], vec![1.0, 1.0]]).unwrap();
        assert!(Economy::new(
            zero_row,
            vec![1.0, 1.0],
            vec![1.0, 1.0],
            PriceFamily::Isoelastic
        )
        .is_err());
    }

    #[test]
    fn state_derives_prices_and_leftovers() {
        let e: Economy<f64> = Economy::new(
            Mat::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap(),
            vec![1.0, 1.0],
            vec![1.0, 1.0],
            PriceFamily::Isoelastic,
        )
        .unwrap();
        let s = SpendingState::from_spending(
            &e,
            Mat::from_rows(&[vec![0.6, 0.2], vec![0.1, 0.5]]).unwrap(),
        )
        .unwrap();
        assert!((s.prices()[0] - 0.7).abs() < 1e-15);
        assert!((s.prices()[1] - 0.7).abs() < 1e-15);
        assert!((s.leftover()[0] - 0.2).abs() < 1e-15);
        assert!((s.leftover()[1] - 0.4).abs() < 1e-15);

        let over = Mat::from_rows(&[vec![0.8, 0.3], vec![0.1, 0.5]]).unwrap();
        assert!(SpendingState::from_spending(&e, over).is_err());
    }

    #[test]
    fn json_round_trip() {
        let e: Economy<f64> = Economy::new(
            Mat::from_rows(&[vec![2.0, 1.0], vec![0.5, 3.0]]).unwrap(),
            vec![1.0, 2.0],
            vec![0.5, 1.5],
            PriceFamily::Power { gamma: 1.25 },
        )
        .unwrap();
        let text = e.to_json();
        let back: Economy<f64> = Economy::from_json(&text).unwrap();
        assert_eq!(e, back);

        let iso = econ_1x1(1.0, 1.0);
        let back: Economy<f64> = Economy::from_json(&iso.to_json()).unwrap();
        assert_eq!(iso, back);
    }
}
