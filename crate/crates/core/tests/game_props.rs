use rand::Rng;

use locclab::game::{
    detection_trials, memory_block_strategy, run_game, DetectionConfig, DetectionMode, GameMode,
    HistoryCappedOracle, OracleStrategy, Preparation, RoundSource, Strategy, SyntheticOracle, World,
};
use locclab::rng::{LabRng, SeedStream};
use locclab::states::PsiSpec;
use locclab::Error;

/// Draws a fresh success probability every round.
struct RandomStrategy {
    id: u64,
}

impl Strategy for RandomStrategy {
    fn protocol_id(&self) -> String {
        format!("random-{}", self.id)
    }

    fn memory_descriptor(&self) -> String {
        String::new()
    }

    fn play(&mut self, _j: usize, prep: &mut Preparation<'_>, rng: &mut LabRng) -> locclab::Result<()> {
        let p = rng.gen::<f64>();
        prep.guess_with_success(p).map(|_| ())
    }
}

/// Changes its memory every round.
struct Leaky(usize);

impl Strategy for Leaky {
    fn protocol_id(&self) -> String {
        "leaky".into()
    }

    fn memory_descriptor(&self) -> String {
        self.0.to_string()
    }

    fn play(&mut self, _j: usize, prep: &mut Preparation<'_>, _rng: &mut LabRng) -> locclab::Result<()> {
        self.0 += 1;
        prep.guess_with_success(0.5).map(|_| ())
    }
}

#[test]
fn transcripts_satisfy_invariants_for_random_strategies() {
    let streams = SeedStream::new(11);
    for k in 0..1000u64 {
        let mut meta = streams.rng("meta", k);
        let n = meta.gen_range(1..60);
        let seed = meta.gen::<u64>();
        let mut s = RandomStrategy { id: k };
        let tr = run_game(&mut s, &RoundSource::Synthetic, n, seed, GameMode::Catalytic).unwrap();
        tr.check_invariants().unwrap();
        assert_eq!(tr.records.len(), n);
        assert_eq!(tr.s_n(), tr.outcomes().map(u64::from).sum::<u64>());
        for j in 1..=n {
            assert!(tr.s_at(j) >= tr.s_at(j - 1) && tr.s_at(j) - tr.s_at(j - 1) <= 1);
        }
        let again = run_game(&mut RandomStrategy { id: k }, &RoundSource::Synthetic, n, seed, GameMode::Catalytic).unwrap();
        assert_eq!(tr, again);
    }
}

#[test]
fn catalytic_mode_rejects_memory_change() {
    let err = run_game(&mut Leaky(0), &RoundSource::Synthetic, 5, 1, GameMode::Catalytic).unwrap_err();
    assert!(matches!(err, Error::CatalystViolation { round: 1, .. }));
    run_game(&mut Leaky(0), &RoundSource::Synthetic, 5, 1, GameMode::Memory).unwrap();
}

fn block_scores(s: &mut dyn Strategy, n_block: usize, blocks: usize, seed: u64) -> Vec<u64> {
    let tr = run_game(s, &RoundSource::Synthetic, n_block * blocks, seed, GameMode::Memory).unwrap();
    (1..=blocks)
        .map(|b| tr.s_at(b * n_block) - tr.s_at((b - 1) * n_block))
        .collect()
}

#[test]
fn coupled_block_scores_are_ordered() {
    let psi = PsiSpec::new(0.5, 8).unwrap();
    for seed in 0..200u64 {
        let mut mb = memory_block_strategy(2, psi, 16).unwrap();
        let mut uniform = OracleStrategy::uniform();
        let hi = block_scores(&mut mb, 16, 20, seed);
        let lo = block_scores(&mut uniform, 16, 20, seed);
        assert!(hi.iter().zip(&lo).all(|(a, b)| a >= b), "seed {seed}");

        let mut iid = OracleStrategy::new(0.75).unwrap();
        let mut capped = HistoryCappedOracle::new(0.75, 0.1).unwrap();
        let a = block_scores(&mut iid, 16, 20, seed);
        let b = block_scores(&mut capped, 16, 20, seed);
        assert!(a.iter().zip(&b).all(|(x, y)| x >= y), "seed {seed}");
    }
}

#[test]
fn detection_summary_combines_worlds() {
    let config = DetectionConfig {
        p_tau: 0.9,
        p_locc: 0.75,
        delta: 0.05,
        n: 200,
        mode: DetectionMode::CatalystThreshold,
    };
    let tau = SyntheticOracle::Iid { p: 0.9 };
    let gamma = SyntheticOracle::HistoryCapped { p: 0.75, penalty: 0.1 };
    let summary = detection_trials(&config, &tau, &gamma, 300, 5).unwrap();
    assert_eq!(summary.records.len(), 600);
    let frac = |w: World| summary.records.iter().filter(|r| r.world == w && r.guess == w).count() as f64 / 300.0;
    assert_eq!(summary.p_corr_tau, frac(World::Tau));
    assert_eq!(summary.p_corr_gamma, frac(World::Gamma));
    assert_eq!(summary.p_corr, 0.5 * (summary.p_corr_tau + summary.p_corr_gamma));
    assert!(summary.p_corr_tau >= summary.hoeffding_target - 0.05);
    assert!(summary.p_corr_gamma >= summary.azuma_target - 0.05);
    let again = detection_trials(&config, &tau, &gamma, 300, 5).unwrap();
    assert_eq!(summary, again);
}
