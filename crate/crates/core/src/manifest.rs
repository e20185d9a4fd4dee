//! Exact manifest probabilities for a model on the uniform trait.
//!
//! The joint probability of any response pattern is an integral of a product
//! of IRFs over (0, 1). Integrands are smooth on compact subintervals but
//! steep near the endpoints where IRF derivatives blow up, so integration
//! uses composite Gauss-Legendre panels refined geometrically toward 0 and 1
//! (outermost breakpoints at 1e-12; integrands are bounded by 1, so the
//! truncation is below 2e-12).
//!
//! Conditioning on rest-score events reduces to the Poisson-binomial law of
//! a sum of independent, non-identical Bernoulli variables, computed exactly
//! by the standard O(n^2) convolution recurrence at each quadrature node.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::irf::Irf;
use crate::special::phi_inv;

const THETA_EPS: f64 = 1e-12;
/// Conditionals with a smaller event probability are reported undefined.
const PMF_FLOOR: f64 = 1e-300;
/// Accuracy target for `joint_prob` under derivative-bounded integrands.
const JOINT_PROB_TOL: f64 = 1e-10;
/// Guard against exponential blowup in `full_manifest`.
pub const MAX_FULL_MANIFEST_ITEMS: usize = 20;

// ---------------------------------------------------------------------------
// Kahan accumulation
// ---------------------------------------------------------------------------

/// Compensated accumulator; quadrature sums over a thousand nodes dominate
/// the error budget otherwise.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Kahan {
    sum: f64,
    carry: f64,
}

impl Kahan {
    #[inline]
    pub fn add(&mut self, v: f64) {
        let y = v - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.sum
    }
}

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

/// Composite Gauss-Legendre rule with precomputed (theta, weight) nodes.
#[derive(Debug, Clone)]
pub struct Quadrature {
    nodes: Vec<(f64, f64)>,
}

/// Legendre P_n and its derivative by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let pk = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = pk;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 2, "need at least two nodes");
    let mut out = vec![(0.0, 0.0); n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out[i] = (x, w);
        out[n - 1 - i] = (-x, w);
    }
    out
}

impl Quadrature {
    /// Rule for the open unit interval, truncated to [1e-12, 1 - 1e-12],
    /// with `panels` total panels spaced geometrically toward both
    /// endpoints and `nodes_per_panel` Gauss-Legendre nodes each.
    pub fn open_unit(panels: usize, nodes_per_panel: usize) -> Self {
        let half = (panels / 2).max(1);
        let mut breaks = Vec::with_capacity(2 * half + 1);
        let (lo_ln, mid_ln) = (THETA_EPS.ln(), 0.5f64.ln());
        for j in 0..=half {
            breaks.push((lo_ln + (mid_ln - lo_ln) * j as f64 / half as f64).exp());
        }
        for j in (0..half).rev() {
            breaks.push(1.0 - breaks[j]);
        }
        Self::from_breakpoints(&breaks, nodes_per_panel)
    }

    /// Rule on [lo, hi] with panels spaced geometrically from lo.
    pub fn geometric(lo: f64, hi: f64, panels: usize, nodes_per_panel: usize) -> Self {
        assert!(0.0 < lo && lo < hi);
        let mut breaks = Vec::with_capacity(panels + 1);
        let (lo_ln, hi_ln) = (lo.ln(), hi.ln());
        for j in 0..=panels {
            breaks.push((lo_ln + (hi_ln - lo_ln) * j as f64 / panels as f64).exp());
        }
        Self::from_breakpoints(&breaks, nodes_per_panel)
    }

    fn from_breakpoints(breaks: &[f64], nodes_per_panel: usize) -> Self {
        let base = gauss_legendre(nodes_per_panel);
        let mut nodes = Vec::with_capacity((breaks.len() - 1) * nodes_per_panel);
        for w in breaks.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let mid = 0.5 * (lo + hi);
            let rad = 0.5 * (hi - lo);
            for &(x, wt) in &base {
                nodes.push((mid + rad * x, rad * wt));
            }
        }
        Quadrature { nodes }
    }

    /// The same rule reflected through theta -> 1 - theta.
    pub fn mirrored(&self) -> Self {
        Quadrature {
            nodes: self.nodes.iter().rev().map(|&(t, w)| (1.0 - t, w)).collect(),
        }
    }

    pub fn nodes(&self) -> &[(f64, f64)] {
        &self.nodes
    }

    /// Integrate with compensated summation in a fixed node order.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        let mut acc = Kahan::default();
        for &(t, w) in &self.nodes {
            acc.add(w * f(t));
        }
        acc.value()
    }
}

pub(crate) fn default_quadrature() -> &'static Quadrature {
    static Q: OnceLock<Quadrature> = OnceLock::new();
    Q.get_or_init(|| Quadrature::open_unit(32, 32))
}

fn fine_quadrature() -> &'static Quadrature {
    static Q: OnceLock<Quadrature> = OnceLock::new();
    Q.get_or_init(|| Quadrature::open_unit(64, 32))
}

// ---------------------------------------------------------------------------
// Model
// ---------------------------------------------------------------------------

/// An ordered collection of n >= 2 items on the fixed U(0, 1) latent trait.
///
/// Any other continuous trait must be pre-transformed with
/// [`crate::irf::transform_irf`]. Flat items (a = 0) are rejected because
/// the positive-derivative condition cannot hold for them.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    items: Vec<Irf>,
}

impl ModelSpec {
    pub fn new(items: Vec<Irf>) -> Result<Self> {
        if items.len() < 2 {
            return Err(Error::InvalidParams {
                index: None,
                reason: format!("a model needs at least 2 items, got {}", items.len()),
            });
        }
        for (i, item) in items.iter().enumerate() {
            if let Some(p) = item.params() {
                if p.a() == 0.0 {
                    return Err(Error::InvalidParams {
                        index: Some(i),
                        reason: "flat item (a = 0) has no strictly increasing response".into(),
                    });
                }
            }
        }
        Ok(ModelSpec { items })
    }

    /// n copies of the same response function.
    pub fn homogeneous(irf: Irf, n: usize) -> Result<Self> {
        Self::new(vec![irf; n])
    }

    pub fn items(&self) -> &[Irf] {
        &self.items
    }

    pub fn n_items(&self) -> usize {
        self.items.len()
    }

    pub(crate) fn check_item(&self, op: &'static str, index: usize) -> Result<()> {
        if index < self.items.len() {
            Ok(())
        } else {
            Err(Error::Domain {
                op,
                message: format!("item index {index} out of range for n = {}", self.items.len()),
            })
        }
    }
}

/// A nonempty set of distinct item indices whose joint all-ones probability
/// is requested.
#[derive(Debug, Clone)]
pub struct PatternQuery {
    indices: Vec<usize>,
}

impl PatternQuery {
    pub fn new(indices: Vec<usize>, n_items: usize) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::Domain {
                op: "PatternQuery",
                message: "index set must be nonempty".into(),
            });
        }
        let mut sorted = indices.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != indices.len() {
            return Err(Error::Domain {
                op: "PatternQuery",
                message: "indices must be distinct".into(),
            });
        }
        if let Some(&max) = sorted.last() {
            if max >= n_items {
                return Err(Error::Domain {
                    op: "PatternQuery",
                    message: format!("index {max} out of range for n = {n_items}"),
                });
            }
        }
        Ok(PatternQuery { indices })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// P(Y_{i_1} = 1, ..., Y_{i_k} = 1): the integral of the product of the
/// selected IRFs against the uniform trait density.
///
/// The value is computed on the default rule and re-checked on a rule with
/// twice the panels; disagreement beyond 1e-10 is reported as an error
/// carrying the achieved estimate.
pub fn joint_prob(model: &ModelSpec, query: &PatternQuery) -> Result<f64> {
    for &i in query.indices() {
        model.check_item("joint_prob", i)?;
    }
    let integrand = |theta: f64| {
        let x = phi_inv(theta);
        query
            .indices()
            .iter()
            .map(|&i| model.items()[i].eval_with_x(theta, x))
            .product::<f64>()
    };
    let coarse = default_quadrature().integrate(integrand);
    let fine = fine_quadrature().integrate(integrand);
    let estimate = (fine - coarse).abs();
    if estimate > JOINT_PROB_TOL {
        return Err(Error::QuadratureAccuracy {
            estimate,
            target: JOINT_PROB_TOL,
        });
    }
    Ok(fine)
}

/// Probabilities of all 2^n response patterns; bit i of the pattern index is
/// item i's response. Refused above 20 items.
pub fn full_manifest(model: &ModelSpec) -> Result<Vec<f64>> {
    let n = model.n_items();
    if n > MAX_FULL_MANIFEST_ITEMS {
        return Err(Error::TooManyItems {
            n,
            max: MAX_FULL_MANIFEST_ITEMS,
        });
    }
    let size = 1usize << n;
    let mut acc = vec![Kahan::default(); size];
    let mut buf = vec![0.0f64; size];
    let mut probs = vec![0.0f64; n];
    for &(theta, w) in default_quadrature().nodes() {
        let x = phi_inv(theta);
        for (i, item) in model.items().iter().enumerate() {
            probs[i] = item.eval_with_x(theta, x);
        }
        // Tensor product of (1 - p_i, p_i) over items, seeded with the node
        // weight.
        buf[0] = w;
        for (i, &p) in probs.iter().enumerate() {
            let bit = 1usize << i;
            for s in 0..bit {
                let v = buf[s];
                buf[s | bit] = v * p;
                buf[s] = v * (1.0 - p);
            }
        }
        for (a, &v) in acc.iter_mut().zip(buf.iter()) {
            a.add(v);
        }
    }
    Ok(acc.into_iter().map(Kahan::value).collect())
}

/// Exact PMF of a sum of independent Bernoulli variables by the O(n^2)
/// convolution recurrence.
pub fn poisson_binomial_pmf(probs: &[f64]) -> Result<Vec<f64>> {
    if probs.is_empty() {
        return Err(Error::Domain {
            op: "poisson_binomial_pmf",
            message: "probability list must be nonempty".into(),
        });
    }
    for (i, &p) in probs.iter().enumerate() {
        if !(p.is_finite() && (0.0..=1.0).contains(&p)) {
            return Err(Error::Domain {
                op: "poisson_binomial_pmf",
                message: format!("probs[{i}] = {p} outside [0, 1]"),
            });
        }
    }
    let mut pmf = vec![0.0; probs.len() + 1];
    pb_pmf_into(probs, &mut pmf);
    Ok(pmf)
}

/// In-place Poisson-binomial recurrence; `pmf` must have length
/// `probs.len() + 1`.
pub(crate) fn pb_pmf_into(probs: &[f64], pmf: &mut [f64]) {
    debug_assert_eq!(pmf.len(), probs.len() + 1);
    pmf.fill(0.0);
    pmf[0] = 1.0;
    for (j, &p) in probs.iter().enumerate() {
        let q = 1.0 - p;
        pmf[j + 1] = pmf[j] * p;
        for k in (1..=j).rev() {
            pmf[k] = pmf[k] * q + pmf[k - 1] * p;
        }
        pmf[0] *= q;
    }
}

/// Conditional mean and variance of the rest-score count given theta.
#[derive(Debug, Clone, Copy)]
pub struct PoissonBinomialMoments {
    /// mu = sum of the other items' response probabilities at theta.
    pub mu: f64,
    /// sigma^2 = sum of p(1 - p) over the other items.
    pub sigma2: f64,
}

/// Moments of (n-1) * rest score given Theta = theta.
pub fn rest_score_moments(
    model: &ModelSpec,
    excluded_item: usize,
    theta: f64,
) -> Result<PoissonBinomialMoments> {
    model.check_item("rest_score_moments", excluded_item)?;
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::Domain {
            op: "rest_score_moments",
            message: format!("theta = {theta} outside (0, 1)"),
        });
    }
    let x = phi_inv(theta);
    let mut mu = 0.0;
    let mut sigma2 = 0.0;
    for (j, item) in model.items().iter().enumerate() {
        if j == excluded_item {
            continue;
        }
        let p = item.eval_with_x(theta, x);
        mu += p;
        sigma2 += p * (1.0 - p);
    }
    Ok(PoissonBinomialMoments { mu, sigma2 })
}

/// Distribution of the rest score excluding one item, with conditional item
/// probabilities and (optionally) the conditional mass of the trait inside
/// I_delta = (delta, 1 - delta).
///
/// Entry k corresponds to the event that exactly k of the other n-1 items
/// are answered positively. Conditionals at entries whose probability falls
/// below 1e-300 are reported as `None` rather than 0/0.
#[derive(Debug, Clone)]
pub struct RestScoreTable {
    pub excluded_item: usize,
    /// P(rest count = k), k = 0..=n-2.
    pub pmf: Vec<f64>,
    /// P(Y_i = 1 | rest count = k).
    pub cond_item: Vec<Option<f64>>,
    /// P(Theta in I_delta | rest count = k), when delta was supplied.
    pub cond_trait_tail: Option<Vec<Option<f64>>>,
    /// The complement P(Theta outside I_delta | rest count = k), kept
    /// separately because it retains full relative precision where
    /// 1 - cond_trait_tail would round to zero.
    pub cond_trait_outside: Option<Vec<Option<f64>>>,
    pub delta: Option<f64>,
}

/// Exact rest-score table by integrating the Poisson-binomial PMF of the
/// other items' responses over the trait.
///
/// The tail mass for `cond_trait_tail` is integrated on dedicated geometric
/// rules over [1e-12, delta] and [1 - delta, 1 - 1e-12], so the reported
/// complement keeps full relative precision even when it is astronomically
/// small.
pub fn rest_score_table(
    model: &ModelSpec,
    excluded_item: usize,
    delta: Option<f64>,
) -> Result<RestScoreTable> {
    model.check_item("rest_score_table", excluded_item)?;
    if let Some(d) = delta {
        if !(d > 0.0 && d < 0.5) {
            return Err(Error::Domain {
                op: "rest_score_table",
                message: format!("delta = {d} outside (0, 1/2)"),
            });
        }
    }

    let n = model.n_items();
    let m = n - 1;
    let mut probs = vec![0.0f64; m];
    let mut pb = vec![0.0f64; n];
    let mut pmf_acc = vec![Kahan::default(); n];
    let mut num_acc = vec![Kahan::default(); n];

    let fill_probs = |theta: f64, probs: &mut [f64]| -> f64 {
        let x = phi_inv(theta);
        let mut slot = 0;
        let mut p_excluded = 0.0;
        for (j, item) in model.items().iter().enumerate() {
            let p = item.eval_with_x(theta, x);
            if j == excluded_item {
                p_excluded = p;
            } else {
                probs[slot] = p;
                slot += 1;
            }
        }
        p_excluded
    };

    for &(theta, w) in default_quadrature().nodes() {
        let p_i = fill_probs(theta, &mut probs);
        pb_pmf_into(&probs, &mut pb);
        for k in 0..n {
            pmf_acc[k].add(w * pb[k]);
            num_acc[k].add(w * p_i * pb[k]);
        }
    }

    let tail = if let Some(d) = delta {
        let lower = Quadrature::geometric(THETA_EPS, d, 12, 32);
        let upper = lower.mirrored();
        let mut tail_acc = vec![Kahan::default(); n];
        for rule in [&lower, &upper] {
            for &(theta, w) in rule.nodes() {
                fill_probs(theta, &mut probs);
                pb_pmf_into(&probs, &mut pb);
                for k in 0..n {
                    tail_acc[k].add(w * pb[k]);
                }
            }
        }
        Some(tail_acc)
    } else {
        None
    };

    let pmf: Vec<f64> = pmf_acc.into_iter().map(Kahan::value).collect();
    let cond_item = pmf
        .iter()
        .zip(num_acc)
        .map(|(&p, num)| (p > PMF_FLOOR).then(|| (num.value() / p).clamp(0.0, 1.0)))
        .collect();
    let (cond_trait_tail, cond_trait_outside) = match tail {
        Some(tail_acc) => {
            let outside: Vec<Option<f64>> = pmf
                .iter()
                .zip(tail_acc)
                .map(|(&p, t)| (p > PMF_FLOOR).then(|| (t.value() / p).clamp(0.0, 1.0)))
                .collect();
            let inside = outside
                .iter()
                .map(|o| o.map(|v| (1.0 - v).clamp(0.0, 1.0)))
                .collect();
            (Some(inside), Some(outside))
        }
        None => (None, None),
    };

    Ok(RestScoreTable {
        excluded_item,
        pmf,
        cond_item,
        cond_trait_tail,
        cond_trait_outside,
        delta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::irf::ItemParams;

    fn ogive(a: f64, b: f64) -> Irf {
        Irf::from_params(ItemParams::normal_ogive(a, b).unwrap())
    }

    fn fourpl(a: f64, b: f64, c: f64, d: f64) -> Irf {
        Irf::from_params(ItemParams::logistic_4pl(a, b, c, d).unwrap())
    }

    fn identity_model(n: usize) -> ModelSpec {
        ModelSpec::homogeneous(Irf::identity(), n).unwrap()
    }

    #[test]
    fn quadrature_integrates_monomials() {
        // Truncation to [1e-12, 1 - 1e-12] costs up to 2e-12 per monomial.
        let q = Quadrature::open_unit(32, 32);
        assert!((q.integrate(|_| 1.0) - 1.0).abs() < 3e-12);
        assert!((q.integrate(|t| t) - 0.5).abs() < 3e-12);
        for k in 2..=8u32 {
            let v = q.integrate(|t| t.powi(k as i32));
            assert!((v - 1.0 / (k as f64 + 1.0)).abs() < 3e-12, "k = {k}");
        }
    }

    #[test]
    fn model_validation() {
        assert!(ModelSpec::new(vec![Irf::identity()]).is_err());
        let flat = Irf::from_params(ItemParams::normal_ogive(0.0, 0.0).unwrap());
        let err = ModelSpec::new(vec![Irf::identity(), flat]).unwrap_err();
        assert!(err.to_string().contains("index 1"), "{err}");
    }

    #[test]
    fn pattern_query_validation() {
        assert!(PatternQuery::new(vec![], 3).is_err());
        assert!(PatternQuery::new(vec![0, 0], 3).is_err());
        assert!(PatternQuery::new(vec![3], 3).is_err());
        assert!(PatternQuery::new(vec![2, 0], 3).is_ok());
    }

    #[test]
    fn joint_prob_identity_products() {
        // k identity items all positive: integral of theta^k = 1/(k+1).
        let model = identity_model(8);
        for k in 1..=8 {
            let q = PatternQuery::new((0..k).collect(), 8).unwrap();
            let v = joint_prob(&model, &q).unwrap();
            assert!(
                (v - 1.0 / (k as f64 + 1.0)).abs() < 1e-10,
                "k = {k}, v = {v}"
            );
        }
    }

    #[test]
    fn joint_prob_single_ogive() {
        let model = ModelSpec::new(vec![ogive(1.0, 0.0), ogive(1.0, 1.0)]).unwrap();
        let v = joint_prob(&model, &PatternQuery::new(vec![0], 2).unwrap()).unwrap();
        assert!((v - 0.5).abs() < 1e-10);
    }

    #[test]
    fn joint_prob_matches_trapezoid_oracle() {
        // Independent brute-force oracle: composite trapezoid with 1e6
        // panels on [1e-9, 1 - 1e-9].
        let items = vec![ogive(1.0, 1.0), fourpl(1.0, 1.0, 0.2, 0.8)];
        let model = ModelSpec::new(items.clone()).unwrap();
        let q = PatternQuery::new(vec![0, 1], 2).unwrap();
        let v = joint_prob(&model, &q).unwrap();

        let n = 1_000_000usize;
        let (lo, hi) = (1e-9, 1.0 - 1e-9);
        let h = (hi - lo) / n as f64;
        let f = |t: f64| items[0].eval_raw(t) * items[1].eval_raw(t);
        let mut acc = Kahan::default();
        acc.add(0.5 * (f(lo) + f(hi)));
        for j in 1..n {
            acc.add(f(lo + h * j as f64));
        }
        let oracle = acc.value() * h;
        assert!((v - oracle).abs() < 1e-8, "v = {v}, oracle = {oracle}");
    }

    #[test]
    fn full_manifest_two_identity_items() {
        // Analytic pattern probabilities: integrals of (1-t)^2, t(1-t), t^2.
        let model = identity_model(2);
        let m = full_manifest(&model).unwrap();
        assert!((m[0b00] - 1.0 / 3.0).abs() < 1e-9);
        assert!((m[0b01] - 1.0 / 6.0).abs() < 1e-9);
        assert!((m[0b10] - 1.0 / 6.0).abs() < 1e-9);
        assert!((m[0b11] - 1.0 / 3.0).abs() < 1e-9);
        let total: f64 = m.iter().sum();
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn full_manifest_refuses_large_models() {
        let model = identity_model(21);
        assert!(matches!(
            full_manifest(&model),
            Err(Error::TooManyItems { n: 21, .. })
        ));
    }

    #[test]
    fn full_manifest_marginals_match_joint_prob() {
        let items = vec![
            ogive(1.0, 0.0),
            ogive(0.8, -0.5),
            fourpl(1.2, 0.3, 0.1, 0.9),
            fourpl(0.7, -1.0, 0.0, 1.0),
            ogive(1.5, 1.0),
        ];
        let model = ModelSpec::new(items).unwrap();
        let m = full_manifest(&model).unwrap();
        let total: f64 = m.iter().sum();
        assert!((total - 1.0).abs() < 1e-9);

        for i in 0..5 {
            let marginal: f64 = (0..32).filter(|pat| pat & (1 << i) != 0).map(|pat| m[pat]).sum();
            let jp = joint_prob(&model, &PatternQuery::new(vec![i], 5).unwrap()).unwrap();
            assert!((marginal - jp).abs() < 1e-9, "item {i}");
            for j in (i + 1)..5 {
                let pair: f64 = (0..32usize)
                    .filter(|pat| pat & (1 << i) != 0 && pat & (1 << j) != 0)
                    .map(|pat| m[pat])
                    .sum();
                let jp = joint_prob(&model, &PatternQuery::new(vec![i, j], 5).unwrap()).unwrap();
                assert!((pair - jp).abs() < 1e-9, "pair ({i}, {j})");
            }
        }
    }

    #[test]
    fn poisson_binomial_small_cases() {
        let pmf = poisson_binomial_pmf(&[0.5, 0.5]).unwrap();
        assert!((pmf[0] - 0.25).abs() < 1e-15);
        assert!((pmf[1] - 0.5).abs() < 1e-15);
        assert!((pmf[2] - 0.25).abs() < 1e-15);

        let pmf = poisson_binomial_pmf(&[1.0, 1.0, 0.0]).unwrap();
        assert_eq!(pmf, vec![0.0, 0.0, 1.0, 0.0]);

        assert!(poisson_binomial_pmf(&[]).is_err());
        assert!(poisson_binomial_pmf(&[1.2]).is_err());
        assert!(poisson_binomial_pmf(&[f64::NAN]).is_err());
    }

    /// Exhaustive 2^n enumeration oracle for the Poisson-binomial PMF.
    pub(crate) fn pb_enumeration_oracle(probs: &[f64]) -> Vec<f64> {
        let n = probs.len();
        let mut pmf = vec![0.0; n + 1];
        for pattern in 0..(1usize << n) {
            let mut prob = 1.0;
            let mut count = 0;
            for (i, &p) in probs.iter().enumerate() {
                if pattern & (1 << i) != 0 {
                    prob *= p;
                    count += 1;
                } else {
                    prob *= 1.0 - p;
                }
            }
            pmf[count] += prob;
        }
        pmf
    }

    #[test]
    fn poisson_binomial_matches_enumeration() {
        let probs = [0.13, 0.87, 0.5, 0.02, 0.99, 0.44, 0.61, 0.3, 0.7, 0.25, 0.8, 0.09];
        let dp = poisson_binomial_pmf(&probs).unwrap();
        let oracle = pb_enumeration_oracle(&probs);
        for (k, (a, b)) in dp.iter().zip(oracle.iter()).enumerate() {
            assert!((a - b).abs() < 1e-12, "k = {k}");
        }
        let total: f64 = dp.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn moments_match_pmf() {
        let model = ModelSpec::new(vec![
            ogive(1.0, 0.0),
            fourpl(1.0, 1.0, 0.2, 0.8),
            ogive(0.7, -0.4),
            fourpl(1.5, 0.2, 0.05, 0.95),
        ])
        .unwrap();
        let theta = 0.37;
        let m = rest_score_moments(&model, 1, theta).unwrap();
        let x = phi_inv(theta);
        let probs: Vec<f64> = model
            .items()
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != 1)
            .map(|(_, it)| it.eval_with_x(theta, x))
            .collect();
        let pmf = poisson_binomial_pmf(&probs).unwrap();
        let mean: f64 = pmf.iter().enumerate().map(|(k, p)| k as f64 * p).sum();
        let var: f64 = pmf
            .iter()
            .enumerate()
            .map(|(k, p)| (k as f64 - mean).powi(2) * p)
            .sum();
        assert!((m.mu - mean).abs() < 1e-10);
        assert!((m.sigma2 - var).abs() < 1e-10);
        assert!(m.sigma2 <= m.mu && m.mu <= 3.0);
    }

    #[test]
    fn rest_table_two_identity_items() {
        let model = identity_model(2);
        let t = rest_score_table(&model, 0, None).unwrap();
        assert!((t.pmf[0] - 0.5).abs() < 1e-9);
        assert!((t.pmf[1] - 0.5).abs() < 1e-9);
        assert!((t.cond_item[0].unwrap() - 1.0 / 3.0).abs() < 1e-9);
        assert!((t.cond_item[1].unwrap() - 2.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn rest_table_identity_closed_form() {
        // For n identity items the rest count given theta is
        // Binomial(n - 1, theta), so P(rest = k) = 1/n for every k and the
        // conditional item probability is the Beta(k + 1, n - k) posterior
        // mean (k + 1)/(n + 1).
        let n = 11;
        let model = identity_model(n);
        let t = rest_score_table(&model, 0, None).unwrap();
        for k in 0..n {
            assert!((t.pmf[k] - 1.0 / n as f64).abs() < 1e-9, "pmf k = {k}");
            let expect = (k as f64 + 1.0) / (n as f64 + 1.0);
            assert!(
                (t.cond_item[k].unwrap() - expect).abs() < 1e-9,
                "cond k = {k}"
            );
        }
        let total: f64 = t.pmf.iter().sum();
        assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn rest_table_cond_item_increasing_for_homogeneous_model() {
        let model = ModelSpec::homogeneous(ogive(1.0, 0.5), 6).unwrap();
        let t = rest_score_table(&model, 2, None).unwrap();
        let vals: Vec<f64> = t.cond_item.iter().map(|c| c.unwrap()).collect();
        for w in vals.windows(2) {
            assert!(w[1] > w[0], "cond_item not increasing: {vals:?}");
        }
    }

    #[test]
    fn rest_table_total_probability_law() {
        let model = ModelSpec::new(vec![
            ogive(1.0, 1.0),
            fourpl(1.0, 1.0, 0.2, 0.8),
            ogive(0.8, -0.3),
            fourpl(1.3, 0.4, 0.1, 0.9),
            ogive(1.2, 0.2),
        ])
        .unwrap();
        for i in 0..model.n_items() {
            let t = rest_score_table(&model, i, None).unwrap();
            let total: f64 = t.pmf.iter().sum();
            assert!((total - 1.0).abs() < 1e-10, "pmf sum, item {i}");
            let lhs: f64 = t
                .pmf
                .iter()
                .zip(&t.cond_item)
                .map(|(p, c)| p * c.unwrap())
                .sum();
            let rhs =
                joint_prob(&model, &PatternQuery::new(vec![i], model.n_items()).unwrap()).unwrap();
            assert!((lhs - rhs).abs() < 1e-9, "total probability, item {i}");
        }
    }

    #[test]
    fn rest_table_trait_tail_against_trapezoid_oracle() {
        // Identity items: the conditional trait density given rest = k is
        // Beta(k + 1, n - k); check the I_delta mass against a dense
        // trapezoid integral of t^k (1-t)^(n-1-k).
        let n = 11;
        let delta = 0.25;
        let model = identity_model(n);
        let t = rest_score_table(&model, 0, Some(delta)).unwrap();
        for k in [2usize, 5, 8] {
            let f = |t: f64| t.powi(k as i32) * (1.0 - t).powi((n - 1 - k) as i32);
            let panels = 400_000;
            let simpson = |lo: f64, hi: f64| {
                let h = (hi - lo) / panels as f64;
                let mut acc = 0.5 * (f(lo) + f(hi));
                for j in 1..panels {
                    acc += f(lo + h * j as f64);
                }
                acc * h
            };
            let inside = simpson(delta, 1.0 - delta);
            let whole = simpson(0.0, 1.0);
            let expect = inside / whole;
            let got = t.cond_trait_tail.as_ref().unwrap()[k].unwrap();
            assert!((got - expect).abs() < 1e-7, "k = {k}: {got} vs {expect}");
        }
    }

    #[test]
    fn rest_table_delta_validation() {
        let model = identity_model(3);
        assert!(rest_score_table(&model, 0, Some(0.6)).is_err());
        assert!(rest_score_table(&model, 0, Some(0.0)).is_err());
        assert!(rest_score_table(&model, 5, None).is_err());
    }
}
