//! Constructive recovery of item response functions from manifest-level
//! quantities.
//!
//! For an excluded item i, the mean response of the remaining items is a
//! strictly increasing function of the trait; inverting it at the attainable
//! rest-score levels k/(n-1) yields a grid of trait locations theta_k. The
//! conditional probability of a positive response on item i given the
//! rest-score event at k then approximates P_i(theta_k) — that conditional is
//! observable from the manifest distribution, so the procedure never reads
//! the target item's own response function (it consumes a
//! [`RestScoreTable`] only).

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::irf::Irf;
use crate::manifest::{rest_score_table, ModelSpec, RestScoreTable};
use crate::special::phi_inv;

// ---------------------------------------------------------------------------
// Mean response and its inversion
// ---------------------------------------------------------------------------

pub(crate) fn mean_irf_raw(model: &ModelSpec, excluded_item: usize, theta: f64) -> f64 {
    let x = phi_inv(theta);
    let mut sum = 0.0;
    for (j, item) in model.items().iter().enumerate() {
        if j != excluded_item {
            sum += item.eval_with_x(theta, x);
        }
    }
    sum / (model.n_items() - 1) as f64
}

fn mean_deriv_raw(model: &ModelSpec, excluded_item: usize, theta: f64) -> f64 {
    let x = phi_inv(theta);
    let mut sum = 0.0;
    for (j, item) in model.items().iter().enumerate() {
        if j != excluded_item {
            sum += item.deriv_with_x(theta, x);
        }
    }
    sum / (model.n_items() - 1) as f64
}

/// Arithmetic mean of the other items' response probabilities at theta.
pub fn mean_irf(model: &ModelSpec, excluded_item: usize, theta: f64) -> Result<f64> {
    model.check_item("mean_irf", excluded_item)?;
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::Domain {
            op: "mean_irf",
            message: format!("theta = {theta} outside (0, 1)"),
        });
    }
    Ok(mean_irf_raw(model, excluded_item, theta))
}

const ROOT_TOL: f64 = 1e-12;
const ROOT_BRACKET_LO: f64 = 1e-10;
const ROOT_BRACKET_HI: f64 = 1.0 - 1e-10;

/// Solve mean_irf(theta) = target for the unique theta in (0, 1).
///
/// Bisection narrows the bracket, then Newton steps (guarded to stay inside
/// the bracket; the derivative blows up near the endpoints, so unguarded
/// Newton is unstable there) polish to |mean - target| <= 1e-12.
pub fn invert_mean_irf(model: &ModelSpec, excluded_item: usize, target: f64) -> Result<f64> {
    model.check_item("invert_mean_irf", excluded_item)?;
    invert_in_bracket(model, excluded_item, target, ROOT_BRACKET_LO, ROOT_BRACKET_HI)
}

fn invert_in_bracket(
    model: &ModelSpec,
    excluded_item: usize,
    target: f64,
    mut lo: f64,
    mut hi: f64,
) -> Result<f64> {
    let f = |t: f64| mean_irf_raw(model, excluded_item, t) - target;
    let (flo, fhi) = (f(lo), f(hi));
    if !(flo < 0.0 && fhi > 0.0) {
        return Err(Error::TargetOutOfRange {
            target,
            lo: flo + target,
            hi: fhi + target,
        });
    }

    // Bisection to a narrow bracket.
    while hi - lo > 1e-4 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    // Guarded Newton.
    let mut x = 0.5 * (lo + hi);
    let mut fx = f(x);
    for _ in 0..60 {
        if fx.abs() <= ROOT_TOL {
            return Ok(x);
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let d = mean_deriv_raw(model, excluded_item, x);
        let step = fx / d;
        let mut next = x - step;
        if !next.is_finite() || next <= lo || next >= hi {
            next = 0.5 * (lo + hi);
        }
        x = next;
        fx = f(x);
    }
    if fx.abs() <= ROOT_TOL {
        Ok(x)
    } else {
        Err(Error::RootFind {
            target,
            residual: fx.abs(),
        })
    }
}

// ---------------------------------------------------------------------------
// Oracle recovery
// ---------------------------------------------------------------------------

/// One recovered grid point: the rest-score level k, the trait location
/// theta_k where the mean response equals k/(n-1), and the conditional
/// probability of the target item given the rest-score event.
#[derive(Debug, Clone, Copy)]
pub struct RecoveryEntry {
    pub k: usize,
    pub theta_k: f64,
    pub p_hat: f64,
}

/// Recovered response values for one item on (alpha, beta); theta_k is
/// strictly increasing across entries.
#[derive(Debug, Clone)]
pub struct RecoveryGrid {
    pub item: usize,
    pub alpha: f64,
    pub beta: f64,
    pub entries: Vec<RecoveryEntry>,
}

impl RecoveryGrid {
    /// Piecewise-linear interpolation between grid knots, constant beyond
    /// the first and last knot (knot spacing is O(1/n), so both
    /// approximations are second order in the recovery error).
    pub fn interp(&self, theta: f64) -> f64 {
        let es = &self.entries;
        if es.is_empty() {
            return f64::NAN;
        }
        if theta <= es[0].theta_k {
            return es[0].p_hat;
        }
        if theta >= es[es.len() - 1].theta_k {
            return es[es.len() - 1].p_hat;
        }
        let mut idx = match es.binary_search_by(|e| e.theta_k.partial_cmp(&theta).unwrap()) {
            Ok(i) => return es[i].p_hat,
            Err(i) => i,
        };
        idx = idx.clamp(1, es.len() - 1);
        let (a, b) = (&es[idx - 1], &es[idx]);
        let w = (theta - a.theta_k) / (b.theta_k - a.theta_k);
        a.p_hat + w * (b.p_hat - a.p_hat)
    }
}

/// Recover item `item` from manifest-level quantities alone: theta_k from
/// inverting the rest-mean, p_hat from the rest-score conditionals.
pub fn recover_irf_oracle(
    model: &ModelSpec,
    item: usize,
    alpha: f64,
    beta: f64,
) -> Result<RecoveryGrid> {
    model.check_item("recover_irf_oracle", item)?;
    if !(alpha > 0.0 && alpha < beta && beta < 1.0) {
        return Err(Error::Domain {
            op: "recover_irf_oracle",
            message: format!("need 0 < alpha < beta < 1, got ({alpha}, {beta})"),
        });
    }

    let table = rest_score_table(model, item, None)?;
    recover_from_table(model, &table, item, alpha, beta)
}

fn recover_from_table(
    model: &ModelSpec,
    table: &RestScoreTable,
    item: usize,
    alpha: f64,
    beta: f64,
) -> Result<RecoveryGrid> {
    let m = model.n_items() - 1;
    // theta_k lands in (alpha, beta) exactly when the target level lies
    // strictly between the mean response at alpha and at beta.
    let mean_alpha = mean_irf_raw(model, item, alpha);
    let mean_beta = mean_irf_raw(model, item, beta);

    let mut entries = Vec::new();
    let mut prev_theta = alpha;
    for k in 0..=m {
        let target = k as f64 / m as f64;
        if target <= mean_alpha || target >= mean_beta {
            continue;
        }
        let theta_k = invert_in_bracket(model, item, target, prev_theta, beta)?;
        let Some(p_hat) = table.cond_item[k] else {
            continue;
        };
        entries.push(RecoveryEntry { k, theta_k, p_hat });
        prev_theta = theta_k;
    }

    if entries.is_empty() {
        return Err(Error::EmptyRecoveryGrid {
            alpha,
            beta,
            n: model.n_items(),
        });
    }
    Ok(RecoveryGrid {
        item,
        alpha,
        beta,
        entries,
    })
}

/// Oracle recovery for every item, in parallel; output order follows item
/// order regardless of scheduling.
pub fn recover_all_items(model: &ModelSpec, alpha: f64, beta: f64) -> Result<Vec<RecoveryGrid>> {
    (0..model.n_items())
        .into_par_iter()
        .map(|i| recover_irf_oracle(model, i, alpha, beta))
        .collect()
}

// ---------------------------------------------------------------------------
// Empirical recovery (regressogram)
// ---------------------------------------------------------------------------

/// Dichotomous response data: rows are respondents, columns are items.
#[derive(Debug, Clone)]
pub struct ResponseMatrix {
    n_respondents: usize,
    n_items: usize,
    data: Vec<u8>,
}

impl ResponseMatrix {
    pub fn new(data: Vec<u8>, n_respondents: usize, n_items: usize) -> Result<Self> {
        if data.len() != n_respondents * n_items {
            return Err(Error::Domain {
                op: "ResponseMatrix",
                message: format!(
                    "data length {} does not match {n_respondents} x {n_items}",
                    data.len()
                ),
            });
        }
        if let Some(bad) = data.iter().find(|&&v| v > 1) {
            return Err(Error::Domain {
                op: "ResponseMatrix",
                message: format!("responses must be 0/1, found {bad}"),
            });
        }
        Ok(ResponseMatrix {
            n_respondents,
            n_items,
            data,
        })
    }

    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self> {
        let n_respondents = rows.len();
        let n_items = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(n_respondents * n_items);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != n_items {
                return Err(Error::Domain {
                    op: "ResponseMatrix",
                    message: format!("row {r} has {} columns, expected {n_items}", row.len()),
                });
            }
            data.extend_from_slice(row);
        }
        Self::new(data, n_respondents, n_items)
    }

    pub fn n_respondents(&self) -> usize {
        self.n_respondents
    }

    pub fn n_items(&self) -> usize {
        self.n_items
    }

    #[inline]
    pub fn get(&self, respondent: usize, item: usize) -> u8 {
        self.data[respondent * self.n_items + item]
    }

    pub fn row(&self, respondent: usize) -> &[u8] {
        &self.data[respondent * self.n_items..(respondent + 1) * self.n_items]
    }

    /// Number of positive responses outside the given item.
    pub fn rest_count(&self, respondent: usize, excluded_item: usize) -> usize {
        let row = self.row(respondent);
        let total: usize = row.iter().map(|&v| v as usize).sum();
        total - row[excluded_item] as usize
    }
}

/// Minimum respondents per regressogram bin before merging stops.
pub const MIN_BIN_SIZE: usize = 25;

/// Regressogram recovery from observed responses: group respondents by rest
/// score, estimate each group's trait location by the midpoint of its rank
/// range (the empirical quantile, matching the uniform trait), and report
/// the per-group proportion correct. Adjacent groups are merged until every
/// bin holds at least [`MIN_BIN_SIZE`] respondents, then down to `max_bins`.
///
/// Each entry's `k` is the bin's median rest score.
pub fn recover_irf_empirical(
    responses: &ResponseMatrix,
    item: usize,
    max_bins: usize,
) -> Result<RecoveryGrid> {
    if item >= responses.n_items() {
        return Err(Error::Domain {
            op: "recover_irf_empirical",
            message: format!("item {item} out of range"),
        });
    }
    if responses.n_respondents() < 100 {
        return Err(Error::Domain {
            op: "recover_irf_empirical",
            message: format!(
                "need at least 100 respondents, got {}",
                responses.n_respondents()
            ),
        });
    }
    if max_bins == 0 {
        return Err(Error::Domain {
            op: "recover_irf_empirical",
            message: "max_bins must be positive".into(),
        });
    }
    let n_resp = responses.n_respondents();
    let col_sum: usize = (0..n_resp).map(|r| responses.get(r, item) as usize).sum();
    if col_sum == 0 || col_sum == n_resp {
        return Err(Error::DegenerateItem { index: item });
    }

    // Histogram over rest-score values; grouping by value keeps the
    // regressogram invariant to respondent order.
    let n_values = responses.n_items();
    let mut count = vec![0usize; n_values];
    let mut hits = vec![0usize; n_values];
    for r in 0..n_resp {
        let v = responses.rest_count(r, item);
        count[v] += 1;
        hits[v] += responses.get(r, item) as usize;
    }

    #[derive(Clone)]
    struct Bin {
        lo: usize,
        hi: usize,
        count: usize,
        hits: usize,
    }
    let mut bins: Vec<Bin> = (0..n_values)
        .filter(|&v| count[v] > 0)
        .map(|v| Bin {
            lo: v,
            hi: v,
            count: count[v],
            hits: hits[v],
        })
        .collect();

    let merge = |bins: &mut Vec<Bin>, idx: usize| {
        let removed = bins.remove(idx + 1);
        bins[idx].hi = removed.hi;
        bins[idx].count += removed.count;
        bins[idx].hits += removed.hits;
    };

    // Merge undersized bins into their smaller neighbor.
    while let Some(idx) = bins.iter().position(|b| b.count < MIN_BIN_SIZE) {
        if bins.len() == 1 {
            break;
        }
        let left_smaller = idx > 0
            && (idx + 1 >= bins.len() || bins[idx - 1].count <= bins[idx + 1].count);
        if left_smaller {
            merge(&mut bins, idx - 1);
        } else {
            merge(&mut bins, idx);
        }
    }
    // Cap the bin count, merging the lightest adjacent pair first.
    while bins.len() > max_bins {
        let idx = (0..bins.len() - 1)
            .min_by_key(|&i| bins[i].count + bins[i + 1].count)
            .expect("at least two bins");
        merge(&mut bins, idx);
    }

    let mut entries = Vec::with_capacity(bins.len());
    let mut rank_start = 0usize;
    for bin in &bins {
        let theta = (rank_start as f64 + bin.count as f64 / 2.0) / n_resp as f64;
        let p_hat = bin.hits as f64 / bin.count as f64;
        // Median rest score within the bin.
        let mut seen = 0usize;
        let mut median = bin.lo;
        for (v, &c) in count.iter().enumerate().take(bin.hi + 1).skip(bin.lo) {
            seen += c;
            if seen * 2 >= bin.count {
                median = v;
                break;
            }
        }
        entries.push(RecoveryEntry {
            k: median,
            theta_k: theta,
            p_hat,
        });
        rank_start += bin.count;
    }

    Ok(RecoveryGrid {
        item,
        alpha: 0.0,
        beta: 1.0,
        entries,
    })
}

// ---------------------------------------------------------------------------
// Sup-difference metrics
// ---------------------------------------------------------------------------

/// Per-item maxima of |P_i - P_i*| over a deterministic evaluation grid.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SupDiffReport {
    pub per_item: Vec<f64>,
    pub max_over_items: f64,
    pub alpha: f64,
    pub beta: f64,
}

fn check_interval(op: &'static str, alpha: f64, beta: f64, grid_points: usize) -> Result<()> {
    if !(0.0..1.0).contains(&alpha) || !(alpha < beta && beta <= 1.0) {
        return Err(Error::Domain {
            op,
            message: format!("need 0 <= alpha < beta <= 1, got ({alpha}, {beta})"),
        });
    }
    if grid_points == 0 {
        return Err(Error::Domain {
            op,
            message: "grid_points must be positive".into(),
        });
    }
    Ok(())
}

/// Evaluation points strictly inside (alpha, beta).
fn sup_grid(alpha: f64, beta: f64, grid_points: usize) -> impl Iterator<Item = f64> {
    let width = beta - alpha;
    (0..grid_points).map(move |j| alpha + width * (j as f64 + 0.5) / grid_points as f64)
}

/// Sup difference between two models item by item.
pub fn sup_diff_models(
    a: &ModelSpec,
    b: &ModelSpec,
    alpha: f64,
    beta: f64,
    grid_points: usize,
) -> Result<SupDiffReport> {
    if a.n_items() != b.n_items() {
        return Err(Error::ItemCountMismatch {
            left: a.n_items(),
            right: b.n_items(),
        });
    }
    check_interval("sup_diff_models", alpha, beta, grid_points)?;
    let per_item: Vec<f64> = a
        .items()
        .iter()
        .zip(b.items())
        .map(|(ia, ib)| {
            sup_grid(alpha, beta, grid_points)
                .map(|t| {
                    let x = phi_inv(t);
                    (ia.eval_with_x(t, x) - ib.eval_with_x(t, x)).abs()
                })
                .fold(0.0, f64::max)
        })
        .collect();
    let max_over_items = per_item.iter().copied().fold(0.0, f64::max);
    Ok(SupDiffReport {
        per_item,
        max_over_items,
        alpha,
        beta,
    })
}

/// Sup difference between one recovered grid and a smooth response.
pub fn sup_diff_grid_vs_irf(
    grid: &RecoveryGrid,
    irf: &Irf,
    alpha: f64,
    beta: f64,
    grid_points: usize,
) -> Result<f64> {
    check_interval("sup_diff_grid_vs_irf", alpha, beta, grid_points)?;
    Ok(sup_grid(alpha, beta, grid_points)
        .map(|t| (grid.interp(t) - irf.eval_raw(t)).abs())
        .fold(0.0, f64::max))
}

/// Sup difference between recovered grids and the true model, item by item.
pub fn sup_diff_grids_vs_model(
    grids: &[RecoveryGrid],
    model: &ModelSpec,
    alpha: f64,
    beta: f64,
    grid_points: usize,
) -> Result<SupDiffReport> {
    if grids.len() != model.n_items() {
        return Err(Error::ItemCountMismatch {
            left: grids.len(),
            right: model.n_items(),
        });
    }
    let per_item = grids
        .iter()
        .map(|g| {
            model.check_item("sup_diff_grids_vs_model", g.item)?;
            sup_diff_grid_vs_irf(g, &model.items()[g.item], alpha, beta, grid_points)
        })
        .collect::<Result<Vec<f64>>>()?;
    let max_over_items = per_item.iter().copied().fold(0.0, f64::max);
    Ok(SupDiffReport {
        per_item,
        max_over_items,
        alpha,
        beta,
    })
}


#[cfg(test)]
mod proptests {
    use super::*;
    use crate::irf::ItemParams;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn theta_grid_monotone_for_random_models(
            seed_params in proptest::collection::vec(
                (0.5f64..2.0, -1.2f64..1.2, 0.0f64..0.2, 0.8f64..1.0),
                6..10,
            ),
            item in 0usize..6,
        ) {
            let items: Vec<Irf> = seed_params
                .iter()
                .map(|&(a, b, c, d)| Irf::from_params(ItemParams::logistic_4pl(a, b, c, d).unwrap()))
                .collect();
            let model = ModelSpec::new(items).unwrap();
            let item = item % model.n_items();
            if let Ok(grid) = recover_irf_oracle(&model, item, 0.1, 0.9) {
                for w in grid.entries.windows(2) {
                    prop_assert!(w[1].theta_k > w[0].theta_k);
                }
                for e in &grid.entries {
                    prop_assert!(e.theta_k > 0.1 && e.theta_k < 0.9);
                    prop_assert!((0.0..=1.0).contains(&e.p_hat));
                }
            }
        }

        #[test]
        fn mean_inversion_round_trip(t in 0.15f64..0.85) {
            let model = ModelSpec::homogeneous(
                Irf::from_params(ItemParams::normal_ogive(1.0, 0.7).unwrap()),
                7,
            ).unwrap();
            let target = mean_irf_raw(&model, 0, t);
            let theta = invert_mean_irf(&model, 0, target).unwrap();
            prop_assert!((theta - t).abs() < 1e-9);
        }
    }
}
