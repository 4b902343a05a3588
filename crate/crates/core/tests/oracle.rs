mod common;

use basket_mem::{fit_exact, fit_mcmc, AnalysisConfig, PriorConfig, TrialData};
use common::{random_case, SplitMix};

fn library_inputs(case: &common::OracleCase) -> (TrialData, PriorConfig) {
    let data = TrialData::unnamed(case.responses.clone(), case.sizes.clone()).unwrap();
    let prior = PriorConfig::new(case.shape1_f64(), case.shape2_f64(), case.prior_matrix()).unwrap();
    (data, prior)
}

#[test]
fn exact_engine_matches_rational_enumeration() {
    let mut rng = SplitMix(2024);
    for _ in 0..40 {
        let case = random_case(&mut rng);
        let (data, prior) = library_inputs(&case);
        let oracle = case.pep();
        let fitted = fit_exact(&data, &prior).unwrap();
        for (r, row) in oracle.iter().enumerate() {
            for (c, &want) in row.iter().enumerate() {
                let got = fitted.pep()[r][c];
                assert!((got - want).abs() < 1e-10, "{case:?}: ({r},{c}) {got} vs {want}");
            }
        }
    }
}

#[test]
fn mcmc_engine_matches_rational_enumeration() {
    let mut rng = SplitMix(77);
    for k in 0..4 {
        let case = random_case(&mut rng);
        let (data, prior) = library_inputs(&case);
        let oracle = case.pep();
        let mut cfg = AnalysisConfig::defaults(case.baskets());
        cfg.seed = 500 + k;
        cfg.mcmc_iter = 500_000;
        cfg.mcmc_burnin = 5_000;
        let trace = fit_mcmc(&data, &prior, &cfg).unwrap();
        for (r, row) in oracle.iter().enumerate() {
            for (c, &want) in row.iter().enumerate() {
                let got = trace.pep[r][c];
                assert!((got - want).abs() < 0.01, "{case:?}: ({r},{c}) {got} vs {want}");
            }
        }
    }
}

#[test]
fn forced_prior_entries_pin_the_posterior() {
    let data = TrialData::unnamed(vec![1, 9, 5], vec![10, 10, 10]).unwrap();
    let mut m = vec![vec![1.0; 3]; 3];
    m[0][1] = 1.0;
    m[1][0] = 1.0;
    m[0][2] = 0.0;
    m[2][0] = 0.0;
    m[1][2] = 0.5;
    m[2][1] = 0.5;
    let prior = PriorConfig::new(vec![0.5; 3], vec![0.5; 3], m).unwrap();
    let exact = fit_exact(&data, &prior).unwrap();
    assert_eq!(exact.pep()[0][1], 1.0);
    assert_eq!(exact.pep()[0][2], 0.0);

    let mut cfg = AnalysisConfig::defaults(3);
    cfg.mcmc_iter = 20_000;
    cfg.mcmc_burnin = 1_000;
    let trace = fit_mcmc(&data, &prior, &cfg).unwrap();
    assert_eq!(trace.pep[0][1], 1.0);
    assert_eq!(trace.pep[0][2], 0.0);
    assert!((trace.pep[1][2] - exact.pep()[1][2]).abs() < 0.02);
}
