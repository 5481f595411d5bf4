//! Gradient-ascent dynamics on the one-good market and their chaos
//! certification.
//!
//! The symmetric gradient-ascent update reduces to a one-dimensional
//! interval map. A certificate of Li-Yorke chaos consists of an invariant
//! interval `[L, U]` containing the interior fixed point together with a
//! period-3 point of the map; period 3 forces every period and a scrambled
//! set for continuous interval maps, so the certificate cites that theorem
//! rather than re-verifying it.
//!
//! For the isoelastic two-firm map the invariant interval has closed-form
//! endpoints on a known step-size range ([`invariant_interval`]); outside
//! that range, and for the power price family, the interval is constructed
//! numerically from the map's argmin ([`numeric_invariant_interval`]) and
//! every claim is probed on a dense grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};

/// Price-function family of the reduced map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MapFamily<F> {
    /// Constant sales revenue `P(X) = 1/X` (unit revenue: the reduced map
    /// assumes the good's revenue constant is normalized to one).
    Isoelastic,
    /// `P(X) = X^(-gamma)`, `gamma > 0`.
    Power { gamma: F },
}

/// Parameters of the symmetric gradient-ascent map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaMapParams<F> {
    /// Number of firms (>= 2 for a non-trivial market).
    pub n: usize,
    /// Marginal cost, > 0.
    pub alpha: F,
    /// Gradient step size, > 0.
    pub eta: F,
    /// Price family.
    pub family: MapFamily<F>,
}

/// Marginal profit of one firm at a symmetric point, for aggregate output
/// `s`, own output `x` and cost `alpha`, under isoelastic prices.
///
/// Shared by the reduced map and the full n-dimensional simulator so the
/// two produce identical floating-point orbits on symmetric states.
#[inline]
fn isoelastic_own_gradient<F: Scalar>(s: F, x: F, alpha: F) -> F {
    (s - x) / (s * s) - alpha
}

impl<F: Scalar> GaMapParams<F> {
    pub fn isoelastic(n: usize, alpha: F, eta: F) -> Self {
        Self {
            n,
            alpha,
            eta,
            family: MapFamily::Isoelastic,
        }
    }

    pub fn power(n: usize, alpha: F, eta: F, gamma: F) -> Self {
        Self {
            n,
            alpha,
            eta,
            family: MapFamily::Power { gamma },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::Precondition("need at least one firm".into()));
        }
        if self.alpha <= F::zero() || self.eta <= F::zero() {
            return Err(Error::Precondition("alpha and eta must be > 0".into()));
        }
        if let MapFamily::Power { gamma } = self.family {
            if gamma <= F::zero() {
                return Err(Error::Precondition("gamma must be > 0".into()));
            }
        }
        Ok(())
    }

    fn n_f(&self) -> F {
        F::from_usize(self.n).unwrap()
    }

    /// Marginal-profit factor of the map: positive iff the symmetric
    /// dynamics have an interior fixed point. For the power family this is
    /// `1 - gamma/n`, which vanishes or turns negative once `gamma >= n`
    /// (own output then only depresses the price, and the map drifts to
    /// zero with no interior dynamics at all).
    pub fn gradient_factor(&self) -> F {
        match self.family {
            MapFamily::Isoelastic => {
                let n = self.n_f();
                (n - F::one()) / (n * n)
            }
            MapFamily::Power { gamma } => F::one() - gamma / self.n_f(),
        }
    }

    /// One application of the map. `x` must be positive.
    pub fn apply(&self, x: F) -> Result<F> {
        if x <= F::zero() {
            return Err(Error::Domain("map escaped the positive orbit".into()));
        }
        Ok(self.apply_unchecked(x))
    }

    /// The raw map without the positivity check (probing helper;
    /// the result may be non-positive).
    #[inline]
    pub fn apply_unchecked(&self, x: F) -> F {
        match self.family {
            MapFamily::Isoelastic => {
                let s = self.n_f() * x;
                x + self.eta * isoelastic_own_gradient(s, x, self.alpha)
            }
            MapFamily::Power { gamma } => {
                let nx = self.n_f() * x;
                x + self.eta * (nx.powf(-gamma) * self.gradient_factor() - self.alpha)
            }
        }
    }

    /// Third iterate minus identity, the function whose interior roots are
    /// period-3 points.
    #[inline]
    pub fn third_iterate_gap(&self, x: F) -> F {
        self.apply_unchecked(self.apply_unchecked(self.apply_unchecked(x))) - x
    }

    /// Interior fixed point of the map.
    pub fn fixed_point(&self) -> Result<F> {
        let k = self.gradient_factor();
        if k <= F::zero() {
            return Err(Error::Degenerate(
                "no interior fixed point: marginal profit is never positive".into(),
            ));
        }
        Ok(match self.family {
            // (n-1)/(n^2 alpha)
            MapFamily::Isoelastic => k / self.alpha,
            // ((1 - gamma/n)/alpha)^(1/gamma) / n
            MapFamily::Power { gamma } => (k / self.alpha).powf(gamma.recip()) / self.n_f(),
        })
    }

    /// Argmin of the map (the unique zero of its derivative), closed form.
    pub fn argmin(&self) -> Result<F> {
        let k = self.gradient_factor();
        if k <= F::zero() {
            return Err(Error::Degenerate(
                "map is monotone: no interior minimum".into(),
            ));
        }
        Ok(match self.family {
            // sqrt(eta (n-1)) / n, which is sqrt(eta)/2 for two firms
            MapFamily::Isoelastic => {
                let n = self.n_f();
                (self.eta * (n - F::one())).sqrt() / n
            }
            // ((eta gamma k n)^(1/(gamma+1))) / n
            MapFamily::Power { gamma } => {
                let n = self.n_f();
                (self.eta * gamma * k * n).powf((gamma + F::one()).recip()) / n
            }
        })
    }
}

/// Closed-form invariant interval of the two-firm isoelastic map.
///
/// Valid for `eta` in `[3/(4 alpha^2), 1/alpha^2)`:
/// `L = sqrt(eta) (1 - alpha sqrt(eta))` and
/// `U = sqrt(eta)/(4(1 - alpha sqrt(eta))) * (5 - 12 alpha sqrt(eta) + 8 alpha^2 eta)`,
/// with `f([L,U]) ⊆ [L,U]`, `L < 1/(4 alpha) < sqrt(eta)/2 < U`,
/// `f(sqrt(eta)/2) = L` and `f(L) = U`.
pub fn invariant_interval<F: Scalar>(alpha: F, eta: F) -> Result<(F, F)> {
    if alpha <= F::zero() || eta <= F::zero() {
        return Err(Error::Precondition("alpha and eta must be > 0".into()));
    }
    let a2 = alpha * alpha;
    let lo = lit::<F>(0.75) / a2;
    let hi = F::one() / a2;
    if eta < lo || eta >= hi {
        return Err(Error::Range(format!(
            "eta = {eta} outside [{lo}, {hi}) where the closed form is established"
        )));
    }
    let s = eta.sqrt();
    let one = F::one();
    let l = s * (one - alpha * s);
    let u = s / (lit::<F>(4.0) * (one - alpha * s))
        * (lit::<F>(5.0) - lit::<F>(12.0) * alpha * s + lit::<F>(8.0) * a2 * eta);
    Ok((l, u))
}

/// Numerically constructed invariant interval: `L = f(argmin)`, `U = f(L)`,
/// then `f(U) <= U` and grid containment are verified. One relative
/// widening by 1e-3 is attempted if the probe fails.
///
/// Returns `(L, U, residual)` where `residual` is the grid invariance
/// residual `max(0, L - f(x), f(x) - U)`.
pub fn numeric_invariant_interval<F: Scalar>(
    params: &GaMapParams<F>,
    probe_points: usize,
) -> Result<(F, F, F)> {
    let xhat = params.argmin()?;
    let l = params.apply_unchecked(xhat);
    if l <= F::zero() {
        return Err(Error::Domain(
            "orbit escapes positivity: the map's minimum is non-positive".into(),
        ));
    }
    let u = params.apply_unchecked(l);
    if u.is_nan() || u <= l {
        return Err(Error::Degenerate("interval construction collapsed".into()));
    }
    let widen = lit::<F>(1e-3);
    let mut lo = l;
    let mut hi = u;
    for attempt in 0..2 {
        if params.apply_unchecked(hi) <= hi {
            let residual = probe_invariance(params, lo, hi, probe_points);
            if residual <= lit::<F>(1e-9) {
                return Ok((lo, hi, residual));
            }
        }
        if attempt == 0 {
            lo = l * (F::one() - widen);
            hi = u * (F::one() + widen);
        }
    }
    Err(Error::Degenerate(
        "no invariant interval found around the argmin (after one widening)".into(),
    ))
}

/// Grid invariance residual of `[lo, hi]` under the map.
pub fn probe_invariance<F: Scalar>(params: &GaMapParams<F>, lo: F, hi: F, points: usize) -> F {
    let mut worst = F::zero();
    let steps = F::from_usize(points.max(2) - 1).unwrap();
    for idx in 0..points.max(2) {
        let t = F::from_usize(idx).unwrap() / steps;
        let x = lo + (hi - lo) * t;
        let fx = params.apply_unchecked(x);
        worst = worst.max(lo - fx).max(fx - hi);
    }
    worst.max(F::zero())
}

/// Bisection root of `f^3(x) - x` in `bracket`, rejecting the trivial root
/// at the map's fixed point.
///
/// Preconditions: the gap function changes sign over the bracket. When the
/// bisected root coincides with `fixed_point` (within `10 tol`), the two
/// sub-brackets on either side are retried.
pub fn find_period3<F: Scalar>(
    map: &impl Fn(F) -> F,
    bracket: (F, F),
    fixed_point: F,
    tol: F,
) -> Result<F> {
    let gap = |x: F| map(map(map(x))) - x;
    let (a, b) = bracket;
    if a.is_nan() || b.is_nan() || b <= a {
        return Err(Error::Precondition("empty bracket".into()));
    }
    let ga = gap(a);
    let gb = gap(b);
    if ga * gb > F::zero() {
        return Err(Error::Precondition(
            "gap function has the same sign at both bracket ends".into(),
        ));
    }
    bisect_deflating(&gap, a, b, ga, fixed_point, tol, 0)
}

fn bisect_deflating<F: Scalar>(
    gap: &impl Fn(F) -> F,
    mut a: F,
    mut b: F,
    mut ga: F,
    fixed_point: F,
    tol: F,
    depth: usize,
) -> Result<F> {
    // bisect until the bracket stops shrinking in floating point
    for _ in 0..200 {
        let mid = (a + b) / lit::<F>(2.0);
        if mid <= a || mid >= b {
            break;
        }
        let gm = gap(mid);
        if ga * gm <= F::zero() {
            b = mid;
        } else {
            a = mid;
            ga = gm;
        }
    }
    let root = (a + b) / lit::<F>(2.0);
    let guard = lit::<F>(10.0) * tol;
    if (root - fixed_point).abs() > guard {
        return Ok(root);
    }
    if depth >= 4 {
        return Err(Error::Degenerate(
            "every root in the bracket coincides with the fixed point".into(),
        ));
    }
    // deflate: retry on both sides of the fixed point
    for (lo, hi) in [(a, fixed_point - guard), (fixed_point + guard, b)] {
        if hi > lo {
            let gl = gap(lo);
            let gh = gap(hi);
            if gl * gh <= F::zero() {
                if let Ok(r) = bisect_deflating(gap, lo, hi, gl, fixed_point, tol, depth + 1) {
                    return Ok(r);
                }
            }
        }
    }
    Err(Error::Degenerate(
        "every root in the bracket coincides with the fixed point".into(),
    ))
}

/// Certification outcome.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", content = "reason", rename_all = "lowercase")]
pub enum CertStatus {
    Certified,
    Inconclusive(String),
    Failed(String),
}

impl CertStatus {
    pub fn is_certified(&self) -> bool {
        matches!(self, CertStatus::Certified)
    }
}

/// Li-Yorke chaos certificate for a one-dimensional map.
#[derive(Debug, Clone)]
pub struct LiYorkeCertificate<F> {
    /// Invariant interval `[L, U]`.
    pub interval: Option<(F, F)>,
    /// Interior fixed point of the map.
    pub fixed_point: Option<F>,
    /// Period-3 point, distinct from the fixed point.
    pub period3_point: Option<F>,
    /// `(f^3(argmin) - argmin, f^3(U) - U)`: the sign pattern `(>= 0, < 0)`
    /// is the closed-form certification route; interior-bracket
    /// certificates may carry a negative first component.
    pub sign_conditions: Option<(F, F)>,
    /// Grid invariance residual of the interval.
    pub invariance_residual: Option<F>,
    /// Whether the period-3 point was found on the `[argmin, U]` endpoint
    /// bracket (true) or by an interior grid scan (false).
    pub endpoint_bracket: bool,
    pub status: CertStatus,
}

impl<F: Scalar> LiYorkeCertificate<F> {
    fn not_certified(status: CertStatus) -> Self {
        Self {
            interval: None,
            fixed_point: None,
            period3_point: None,
            sign_conditions: None,
            invariance_residual: None,
            endpoint_bracket: false,
            status,
        }
    }

    pub fn to_json(&self) -> String {
        let to = |x: F| x.to_f64().unwrap_or(f64::NAN);
        let (status, reason) = match &self.status {
            CertStatus::Certified => ("certified", None),
            CertStatus::Inconclusive(r) => ("inconclusive", Some(r.clone())),
            CertStatus::Failed(r) => ("failed", Some(r.clone())),
        };
        let dto = CertificateJson {
            status: status.into(),
            reason,
            interval: self.interval.map(|(l, u)| [to(l), to(u)]),
            fixed_point: self.fixed_point.map(&to),
            period3_point: self.period3_point.map(&to),
            sign_conditions: self.sign_conditions.map(|(a, b)| [to(a), to(b)]),
            invariance_residual: self.invariance_residual.map(&to),
            endpoint_bracket: self.endpoint_bracket,
        };
        serde_json::to_string_pretty(&dto).expect("certificate serialization cannot fail")
    }
}

#[derive(Serialize, Deserialize)]
struct CertificateJson {
    status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    reason: Option<String>,
    interval: Option<[f64; 2]>,
    fixed_point: Option<f64>,
    period3_point: Option<f64>,
    sign_conditions: Option<[f64; 2]>,
    invariance_residual: Option<f64>,
    endpoint_bracket: bool,
}

/// Tolerances and probe sizes for certification.
#[derive(Debug, Clone, Copy)]
pub struct CertifyOptions<F> {
    /// Points on the invariance probe grid.
    pub probe_points: usize,
    /// Points on the interior period-3 scan grid.
    pub scan_points: usize,
    /// Root tolerance for bisections.
    pub root_tol: F,
    /// Acceptable grid invariance residual.
    pub invariance_tol: F,
}

impl<F: Scalar> Default for CertifyOptions<F> {
    fn default() -> Self {
        Self {
            probe_points: 100_000,
            scan_points: 20_000,
            root_tol: lit(1e-12),
            invariance_tol: lit(1e-9),
        }
    }
}

impl<F: Scalar> CertifyOptions<F> {
    /// Cheaper probes for parameter sweeps; final answers should be
    /// re-validated with the defaults.
    pub fn coarse() -> Self {
        Self {
            probe_points: 20_000,
            scan_points: 8_192,
            ..Self::default()
        }
    }
}

/// Certify Li-Yorke chaos of the symmetric gradient-ascent map.
///
/// The invariant interval is the closed form when it applies (two firms,
/// isoelastic prices, `eta` in the established range) and the numeric
/// construction otherwise. The period-3 point is searched first on the
/// `[argmin, U]` bracket, whose sign pattern is the closed-form route, and
/// then by an interior sign-change scan over the whole interval.
pub fn certify_li_yorke<F: Scalar>(
    params: &GaMapParams<F>,
    opts: &CertifyOptions<F>,
) -> Result<LiYorkeCertificate<F>> {
    params.validate()?;
    if params.n < 2 {
        return Ok(LiYorkeCertificate::not_certified(CertStatus::Failed(
            "a single firm has no competition to destabilize".into(),
        )));
    }
    if params.gradient_factor() <= F::zero() {
        return Ok(LiYorkeCertificate::not_certified(CertStatus::Failed(
            "degenerate map: marginal profit is never positive (gamma >= n)".into(),
        )));
    }
    let fixed_point = params.fixed_point()?;
    let xhat = params.argmin()?;

    // invariant interval: closed form where established, numeric otherwise
    let analytic = matches!(params.family, MapFamily::Isoelastic)
        && params.n == 2
        && invariant_interval(params.alpha, params.eta).is_ok();
    let (l, u, residual) = if analytic {
        let (l, u) = invariant_interval(params.alpha, params.eta)?;
        let residual = probe_invariance(params, l, u, opts.probe_points);
        (l, u, residual)
    } else {
        match numeric_invariant_interval(params, opts.probe_points) {
            Ok(t) => t,
            Err(Error::Domain(reason)) => {
                return Ok(LiYorkeCertificate::not_certified(CertStatus::Failed(reason)))
            }
            Err(Error::Degenerate(reason)) => {
                return Ok(LiYorkeCertificate::not_certified(CertStatus::Inconclusive(
                    reason,
                )))
            }
            Err(e) => return Err(e),
        }
    };

    let map = |x: F| params.apply_unchecked(x);
    let sign_conditions = (
        params.third_iterate_gap(xhat),
        params.third_iterate_gap(u),
    );

    let mut base = LiYorkeCertificate {
        interval: Some((l, u)),
        fixed_point: Some(fixed_point),
        period3_point: None,
        sign_conditions: Some(sign_conditions),
        invariance_residual: Some(residual),
        endpoint_bracket: false,
        status: CertStatus::Certified,
    };

    if residual > opts.invariance_tol {
        base.status = CertStatus::Inconclusive(format!(
            "invariance residual {residual} exceeds tolerance"
        ));
        return Ok(base);
    }
    if !(l < fixed_point && fixed_point < u) {
        base.status = CertStatus::Inconclusive(
            "fixed point lies outside the constructed interval".into(),
        );
        return Ok(base);
    }

    // closed-form route: sign pattern (>= 0, < 0) on [argmin, U]
    if sign_conditions.0 >= F::zero() && sign_conditions.1 < F::zero() {
        if let Ok(p) = find_period3(&map, (xhat, u), fixed_point, opts.root_tol) {
            base.period3_point = Some(p);
            base.endpoint_bracket = true;
            return Ok(base);
        }
    }

    // interior route: scan [L, U] for sign changes of the gap function
    let guard = lit::<F>(10.0) * opts.root_tol;
    let pts = opts.scan_points.max(16);
    let steps = F::from_usize(pts - 1).unwrap();
    let mut prev_x = l;
    let mut prev_g = params.third_iterate_gap(l);
    for idx in 1..pts {
        let x = l + (u - l) * F::from_usize(idx).unwrap() / steps;
        let g = params.third_iterate_gap(x);
        if prev_g * g <= F::zero() && (prev_g != F::zero() || g != F::zero()) {
            if let Ok(p) = find_period3(&map, (prev_x, x), fixed_point, opts.root_tol) {
                if (p - fixed_point).abs() > guard {
                    base.period3_point = Some(p);
                    return Ok(base);
                }
            }
        }
        prev_x = x;
        prev_g = g;
    }
    base.status = CertStatus::Inconclusive(
        "no period-3 sign change found on the invariant interval".into(),
    );
    Ok(base)
}

/// Result of a minimum-chaotic-step-size scan.
#[derive(Debug, Clone)]
pub struct EtaScan<F> {
    /// Smallest certified step size found, within the scan tolerance.
    pub eta_min: Option<F>,
    /// Largest step size for which the interval construction stays
    /// positive (upper end of the scan bracket).
    pub eta_ceiling: Option<F>,
    /// The dense certification grid that was scanned, for detecting
    /// non-monotone certifiability windows.
    pub samples: Vec<(F, bool)>,
}

/// Smallest step size whose chaos certificate is granted, for the given
/// family, cost and firm count.
///
/// Certifiability is a window in `eta` (for large steps the interval
/// escapes positivity), so a dense grid first locates the window and the
/// lower edge is then bisected to relative tolerance `tol`. The final
/// candidate is re-validated with full-precision options; the dense grid
/// is returned for non-monotonicity diagnostics.
pub fn min_chaotic_eta<F: Scalar>(
    family: MapFamily<F>,
    alpha: F,
    n: usize,
    tol: F,
) -> Result<EtaScan<F>> {
    let probe = GaMapParams {
        n,
        alpha,
        eta: F::one(),
        family,
    };
    probe.validate()?;
    if tol <= F::zero() {
        return Err(Error::Precondition("tol must be > 0".into()));
    }
    if n < 2 || probe.gradient_factor() <= F::zero() {
        return Ok(EtaScan {
            eta_min: None,
            eta_ceiling: None,
            samples: Vec::new(),
        });
    }

    let with_eta = |eta: F| GaMapParams {
        n,
        alpha,
        eta,
        family,
    };
    // interval floor L(eta) = f(argmin): positive for small eta, negative
    // for large; its zero caps the scan bracket
    let floor = |eta: F| -> F {
        let p = with_eta(eta);
        p.apply_unchecked(p.argmin().expect("nondegenerate map has an argmin"))
    };
    let mut hi = F::one();
    let mut doubling = 0;
    while floor(hi) > F::zero() {
        hi = hi + hi;
        doubling += 1;
        if doubling > 200 {
            return Err(Error::Range("no positive ceiling for the scan".into()));
        }
    }
    let mut lo = hi * lit::<F>(1e-9);
    for _ in 0..100 {
        let mid = (lo + hi) / lit::<F>(2.0);
        if floor(mid) > F::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let ceiling = lo;

    let coarse = CertifyOptions::coarse();
    let certified = |eta: F, o: &CertifyOptions<F>| -> Result<bool> {
        Ok(certify_li_yorke(&with_eta(eta), o)?.status.is_certified())
    };

    // dense scan of the admissible range
    let pts = 160;
    let start = ceiling * lit::<F>(1e-3);
    let span = ceiling * lit::<F>(0.999) - start;
    let mut samples = Vec::with_capacity(pts);
    let mut first_hit = None;
    for idx in 0..pts {
        let eta = start + span * F::from_usize(idx).unwrap() / F::from_usize(pts - 1).unwrap();
        let ok = certified(eta, &coarse)?;
        samples.push((eta, ok));
        if ok && first_hit.is_none() {
            first_hit = Some(idx);
        }
    }
    let Some(hit) = first_hit else {
        return Ok(EtaScan {
            eta_min: None,
            eta_ceiling: Some(ceiling),
            samples,
        });
    };

    // bisect the lower edge of the window
    let mut lo = if hit == 0 { start * lit::<F>(0.1) } else { samples[hit - 1].0 };
    let mut hi = samples[hit].0;
    while hi - lo > tol * hi {
        let mid = (lo + hi) / lit::<F>(2.0);
        if certified(mid, &coarse)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    // re-validate at full precision, nudging up within the window if the
    // coarse and full probes disagree at the very edge
    let full = CertifyOptions::default();
    let mut eta_min = hi;
    for _ in 0..32 {
        if certified(eta_min, &full)? {
            return Ok(EtaScan {
                eta_min: Some(eta_min),
                eta_ceiling: Some(ceiling),
                samples,
            });
        }
        eta_min = eta_min + tol * eta_min;
    }
    Ok(EtaScan {
        eta_min: None,
        eta_ceiling: Some(ceiling),
        samples,
    })
}

/// Positivity floor of the n-dimensional simulator.
pub const GA_POSITIVITY_FLOOR: f64 = 1e-12;

/// Trajectory of the full n-dimensional gradient ascent.
#[derive(Debug, Clone)]
pub struct GaTrajectory<F> {
    /// Aggregate output per step, `t = 0..=T`.
    pub aggregate: Vec<F>,
    /// Per-step states when recording was requested.
    pub states: Option<Vec<Vec<F>>>,
    /// Final output vector.
    pub final_state: Vec<F>,
    /// Steps (1-based transition index) at which some coordinate was
    /// clamped at the positivity floor.
    pub clamped_steps: Vec<usize>,
}

/// Full n-dimensional gradient ascent on the one-good market with
/// per-firm costs: firm `i` updates by the own-gradient of
/// `x_i / sum_k x_k - alpha_i x_i`.
///
/// Coordinates that would cross zero are clamped at a small positivity
/// floor and the step is flagged, never fatal.
pub fn simulate_ga<F: Scalar>(
    costs: &[F],
    x0: &[F],
    eta: F,
    steps: usize,
    record_states: bool,
) -> Result<GaTrajectory<F>> {
    if costs.len() != x0.len() || costs.is_empty() {
        return Err(Error::Dimension("costs and start must have equal nonzero length".into()));
    }
    if x0.iter().any(|&x| x <= F::zero()) {
        return Err(Error::Precondition("start must be strictly positive".into()));
    }
    if costs.iter().any(|&a| a <= F::zero()) {
        return Err(Error::Precondition("costs must be strictly positive".into()));
    }
    if eta <= F::zero() {
        return Err(Error::Precondition("eta must be > 0".into()));
    }
    let floor = lit::<F>(GA_POSITIVITY_FLOOR);
    let mut x = x0.to_vec();
    let mut aggregate = Vec::with_capacity(steps + 1);
    let mut states = record_states.then(|| Vec::with_capacity(steps + 1));
    let mut clamped_steps = Vec::new();
    for t in 0..=steps {
        let total: F = x.iter().copied().sum();
        aggregate.push(total);
        if let Some(h) = states.as_mut() {
            h.push(x.clone());
        }
        if t == steps {
            break;
        }
        let mut clamped = false;
        for (xi, &ai) in x.iter_mut().zip(costs) {
            let next = *xi + eta * isoelastic_own_gradient(total, *xi, ai);
            if next <= floor {
                *xi = floor;
                clamped = true;
            } else {
                *xi = next;
            }
        }
        if clamped {
            clamped_steps.push(t + 1);
        }
    }
    Ok(GaTrajectory {
        aggregate,
        states,
        final_state: x,
        clamped_steps,
    })
}
