//! Monte Carlo cross-checks tying the exact quadrature machinery to seeded
//! simulation: slower than unit tests, faster than the acceptance suite.

use irt_identify::experiments::{simulate_responses, FamilySampler, SimConfig};
use irt_identify::irf::{Irf, ItemParams};
use irt_identify::manifest::{rest_score_table, ModelSpec};
use irt_identify::recovery::{recover_irf_empirical, sup_diff_grid_vs_irf};

#[test]
fn rest_table_conditionals_match_simulation() {
    // Exact P(Y_i = 1 | rest = k) versus grouped frequencies from one
    // million simulated respondents, within 3 binomial standard errors for
    // every adequately populated rest-score group.
    let family = FamilySampler::Heterogeneous4Pl { seed: 2024 };
    let model = family.model(10).unwrap();
    let table = rest_score_table(&model, 0, None).unwrap();

    let n_resp = 1_000_000usize;
    let data = simulate_responses(
        &model,
        &SimConfig {
            seed: 8,
            num_respondents: n_resp,
        },
    );
    let mut count = vec![0usize; 10];
    let mut hits = vec![0usize; 10];
    for r in 0..n_resp {
        let k = data.rest_count(r, 0);
        count[k] += 1;
        hits[k] += data.get(r, 0) as usize;
    }

    let mut checked = 0;
    for k in 0..10 {
        if count[k] < 100 {
            continue;
        }
        let freq = hits[k] as f64 / count[k] as f64;
        let exact = table.cond_item[k].expect("conditional defined");
        let se = (exact * (1.0 - exact) / count[k] as f64).sqrt();
        assert!(
            (freq - exact).abs() <= 3.0 * se,
            "k = {k}: freq = {freq}, exact = {exact}, se = {se}"
        );
        checked += 1;
    }
    assert!(checked >= 8, "only {checked} groups were populated");

    // Rest-score frequencies against the exact pmf as well.
    for k in 0..10 {
        let freq = count[k] as f64 / n_resp as f64;
        let p = table.pmf[k];
        let se = (p * (1.0 - p) / n_resp as f64).sqrt().max(1e-9);
        assert!((freq - p).abs() <= 4.0 * se, "pmf k = {k}");
    }
}

#[test]
fn regressogram_tracks_truth_for_large_samples() {
    // 2PL-style item set (4PL with c = 0, d = 1): the empirical
    // regressogram from 1e5 respondents stays within 0.05 of the true
    // response on (0.2, 0.8).
    let irf = Irf::from_params(ItemParams::logistic_4pl(1.2, 0.3, 0.0, 1.0).unwrap());
    let model = ModelSpec::homogeneous(irf, 50).unwrap();
    let data = simulate_responses(
        &model,
        &SimConfig {
            seed: 4321,
            num_respondents: 100_000,
        },
    );
    let grid = recover_irf_empirical(&data, 0, 50).unwrap();
    let sup = sup_diff_grid_vs_irf(&grid, &model.items()[0], 0.2, 0.8, 601).unwrap();
    assert!(sup <= 0.05, "sup diff = {sup}");
}
