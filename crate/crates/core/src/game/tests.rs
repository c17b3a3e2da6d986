use super::*;
use crate::error::Error;
use crate::protocols::ConcentrationMode;
use crate::states::{make_hiding_pair, HidingPairSpec, PsiSpec};

fn oracle(p: f64) -> impl Fn() -> crate::Result<Box<dyn Strategy>> + Sync {
    move || Ok(Box::new(OracleStrategy::new(p)?) as Box<dyn Strategy>)
}

#[test]
fn perfect_oracle_scores_every_round() {
    let mut s = OracleStrategy::new(1.0).unwrap();
    let t = run_game(&mut s, &RoundSource::Synthetic, 100, 3, GameMode::Catalytic).unwrap();
    assert_eq!(t.s_n(), 100);
    t.check_invariants().unwrap();
}

#[test]
fn uniform_guess_concentrates() {
    let mut s = OracleStrategy::uniform();
    let t = run_game(&mut s, &RoundSource::Synthetic, 10_000, 11, GameMode::Memory).unwrap();
    let f = t.s_n() as f64 / 1e4;
    assert!((0.47..=0.53).contains(&f), "{f}");
}

#[test]
fn helstrom_oracle_mean_rate() {
    let l = crate::qmat::TensorLayout::single("A", 2).unwrap();
    let zero = crate::qmat::DensityOperator::basis(l.clone(), 0).unwrap();
    let mixed = crate::qmat::DensityOperator::maximally_mixed(l);
    let o = OracleStrategy::helstrom(&zero, &mixed).unwrap();
    assert!((o.success() - 0.75).abs() < 1e-12);
    let make = move || Ok(Box::new(o.clone()) as Box<dyn Strategy>);
    let s = run_trials(&make, &RoundSource::Synthetic, 1000, 200, 5, GameMode::Memory, |_, t| t.s_n()).unwrap();
    let mean = s.iter().sum::<u64>() as f64 / (200.0 * 1000.0);
    assert!((mean - 0.75).abs() < 0.02);
}

#[test]
fn games_are_reproducible() {
    let a = run_game(&mut OracleStrategy::new(0.6).unwrap(), &RoundSource::Synthetic, 300, 9, GameMode::Memory).unwrap();
    let b = run_game(&mut OracleStrategy::new(0.6).unwrap(), &RoundSource::Synthetic, 300, 9, GameMode::Memory).unwrap();
    assert_eq!(a, b);
}

#[test]
fn bound_formulas() {
    assert!((hoeffding_bound(100, 0.1) - (1.0 - 2.0 * (-2.0f64).exp())).abs() < 1e-15);
    assert!((hoeffding_bound(100, 0.1) - 0.72933).abs() < 1e-5);
    assert!((azuma_bound(200, 0.1) - (-1.0f64).exp()).abs() < 1e-15);
    assert!((hoeffding_bound(1_000_000, 0.1) - 1.0).abs() < 1e-12);
}

#[test]
fn min_rounds_values_and_domain() {
    assert_eq!(min_rounds(0.1, 1.0).unwrap(), 278);
    let mut last = u64::MAX;
    for d in [0.05, 0.1, 0.2, 0.4, 0.8] {
        let n = min_rounds(d, 1.0).unwrap();
        assert!(n <= last);
        last = n;
    }
    assert!(min_rounds(0.1, 1.9).unwrap() > 0);
    assert!(matches!(min_rounds(0.1, 2.0), Err(Error::Domain(_))));
    assert!(matches!(min_rounds(0.0, 1.0), Err(Error::Domain(_))));
}

fn catalyst_config(p_tau: f64, delta: f64, n: usize) -> DetectionConfig {
    DetectionConfig {
        p_tau,
        p_locc: 0.75,
        delta,
        n,
        mode: DetectionMode::CatalystThreshold,
    }
}

#[test]
fn detection_rejects_bad_delta() {
    for d in [0.0, 0.08, 0.2, -0.01] {
        let c = catalyst_config(0.9, d, 100);
        assert!(matches!(c.validate(), Err(Error::Spec(_))), "{d}");
    }
}

#[test]
fn deterministic_tau_is_always_recognised() {
    let c = catalyst_config(1.0, 0.1, 50);
    let (tau, gamma) = c.default_oracles(0.1);
    let s = detection_trials(&c, &tau, &gamma, 200, 1).unwrap();
    assert_eq!(s.p_corr_tau, 1.0);
}

#[test]
fn detection_gamma_oracle_must_respect_cap() {
    let c = catalyst_config(0.9, 0.05, 100);
    let r = detection_trials(&c, &SyntheticOracle::Iid { p: 0.9 }, &SyntheticOracle::Iid { p: 0.8 }, 10, 1);
    assert!(matches!(r, Err(Error::Spec(_))));
}

#[test]
fn memory_threshold_rule() {
    let c = DetectionConfig {
        mode: DetectionMode::MemoryThreshold,
        ..catalyst_config(0.9, 0.1, 100)
    };
    c.validate().unwrap();
    assert_eq!(c.decide(85), World::Tau);
    assert_eq!(c.decide(84), World::Gamma);
}

#[test]
fn martingale_equality_case() {
    let make = oracle(0.75);
    let ts = run_trials(&make, &RoundSource::Synthetic, 200, 2000, 4, GameMode::Memory, |_, t| t).unwrap();
    let rep = check_supermartingale(&ts, 0.75, 50).unwrap();
    assert!(rep.ok(), "{rep:?}");
    assert!(rep.pooled_drift.abs() <= 3.0 * rep.pooled_std_error);
    assert!((rep.max_increment - 0.25).abs() < 1e-12);
}

#[test]
fn capped_oracle_has_negative_drift() {
    let make = || Ok(Box::new(HistoryCappedOracle::new(0.75, 0.1)?) as Box<dyn Strategy>);
    let ts = run_trials(&make, &RoundSource::Synthetic, 200, 2000, 8, GameMode::Memory, |_, t| t).unwrap();
    let rep = check_supermartingale(&ts, 0.75, 50).unwrap();
    assert!(rep.ok());
    assert!(rep.pooled_drift + 3.0 * rep.pooled_std_error < 0.0);
}

#[test]
fn rate_trivial_cases() {
    let make = oracle(0.5);
    let r0 = estimate_rate(&make, &RoundSource::Synthetic, 0.0, 50, &[10, 100], 2).unwrap();
    assert_eq!(r0.success_frac, vec![1.0, 1.0]);
    let r1 = estimate_rate(&make, &RoundSource::Synthetic, 1.0, 200, &[100], 2).unwrap();
    assert_eq!(r1.success_frac, vec![0.0]);
    assert!(estimate_rate(&make, &RoundSource::Synthetic, 1.5, 1, &[1], 2).is_err());
}

#[test]
fn memory_block_requires_entropy_excess() {
    let low = PsiSpec::new(0.99, 2).unwrap();
    assert!(matches!(memory_block_strategy(2, low, 8), Err(Error::Spec(_))));
}

#[test]
fn memory_block_failed_blocks_score_half() {
    // Blocks of length 1 at λ=0.5, d₂=8 never refill a qubit budget
    // (a single copy has log-dimension 0), so every block after the first is
    // a fair guess.
    let psi = PsiSpec::new(0.5, 8).unwrap();
    let mut s = memory_block_strategy(2, psi, 1).unwrap();
    let t = run_game(&mut s, &RoundSource::Synthetic, 20_001, 6, GameMode::Memory).unwrap();
    assert_eq!(t.records[0].x, 1);
    let rest = (t.s_n() - 1) as f64 / 20_000.0;
    assert!((rest - 0.5).abs() < 0.02, "{rest}");
    assert_eq!(s.failed_blocks(), 20_001);
}

#[test]
fn memory_block_choice_meets_target() {
    let psi = PsiSpec::new(0.5, 8).unwrap();
    let (n, est) = choose_block_length(2, &psi, 0.05, 64, 20_000, 1).unwrap();
    assert!(1.0 - est.lower <= 0.05);
    let s = memory_block_strategy(2, psi, n).unwrap();
    let exact = s.failure_estimate(ConcentrationMode::Exact).unwrap();
    assert!(exact.probability >= 0.95);
}

#[test]
fn teleport_measure_breaks_hiding_with_memory_but_not_catalytically() {
    let (s0, s1) = make_hiding_pair(&HidingPairSpec::werner(2)).unwrap();
    let source = RoundSource::states(s0, s1);
    let mut st = TeleportMeasureStrategy::new(2, 50).unwrap();
    let t = run_game(&mut st, &source, 50, 2, GameMode::Memory).unwrap();
    assert_eq!(t.s_n(), 50);
    assert_eq!(st.remaining(), 0);

    let mut st = TeleportMeasureStrategy::new(2, 5).unwrap();
    let r = run_game(&mut st, &source, 5, 2, GameMode::Catalytic);
    assert!(matches!(r, Err(Error::CatalystViolation { round: 1, .. })));

    let mut st = TeleportMeasureStrategy::new(2, 1).unwrap();
    assert!(matches!(run_game(&mut st, &source, 2, 2, GameMode::Memory), Err(Error::Resource(_))));
    let mut st = TeleportMeasureStrategy::new(2, 1).unwrap();
    assert!(matches!(run_game(&mut st, &RoundSource::Synthetic, 1, 2, GameMode::Memory), Err(Error::Mode(_))));
}
