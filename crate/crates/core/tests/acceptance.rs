//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use locclab::cli::{run_config, CommandParams, DetectParams, ExperimentConfig, ProtocolSpec, SimulateParams};
use locclab::distinguish::{helstrom, ppt_upper_bound, thm2_locc_bound, BoundBracket, StrategyLibrary};
use locclab::game::{
    choose_block_length, detection_trials, hoeffding_bound, azuma_bound, memory_block_strategy, min_rounds,
    run_game, run_trials, DetectionConfig, DetectionMode, GameMode, HistoryCappedOracle, RoundSource,
    Strategy, SupermartingaleCheck, TeleportMeasureStrategy,
};
use locclab::protocols::{concentration_distribution, concentration_success_prob, teleport, ConcentrationMode};
use locclab::qmat::{eigenvalues, fidelity, CMatrix, DensityOperator, Operator, PureState, TensorLayout};
use locclab::rng::SeedStream;
use locclab::states::{
    haar_vector, make_hiding_pair, make_max_entangled, make_rho_pair, sample_ginibre, sample_separable,
    symmetric_projectors, HidingPairSpec, PsiSpec,
};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn criterion(id: u32, name: &str, budget: Duration, f: impl FnOnce() -> Verdict) -> bool {
    let start = Instant::now();
    let result = catch_unwind(AssertUnwindSafe(f));
    let elapsed = start.elapsed();
    let (pass, detail) = match result {
        Ok(v) => (v.pass, v.detail),
        Err(e) => {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            (false, format!("panicked: {msg}"))
        }
    };
    let in_time = elapsed <= budget;
    let ok = pass && in_time;
    println!(
        "{} criterion {id} {name}: {detail}; runtime {:.2}s (budget {}s{})",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        budget.as_secs(),
        if in_time { "" } else { ", exceeded" }
    );
    ok
}

fn c1_helstrom() -> Verdict {
    let mut worst: f64 = 0.0;
    for d in 2..=6 {
        let (s0, s1) = make_hiding_pair(&HidingPairSpec::werner(d)).unwrap();
        worst = worst.max((helstrom(&s0, &s1).unwrap() - 1.0).abs());
    }
    let l = TensorLayout::single("A", 2).unwrap();
    let p = helstrom(
        &DensityOperator::basis(l.clone(), 0).unwrap(),
        &DensityOperator::maximally_mixed(l),
    )
    .unwrap();
    let dev = (p - 0.75).abs();
    verdict(
        worst <= 1e-10 && dev <= 1e-10,
        format!("werner d=2..6 max |p-1| = {worst:.2e}; (|0><0|, I/2) p = {p} (|p-0.75| = {dev:.2e})"),
    )
}

/// Best success over M = α P_sym + β P_asym subject to 0 ≤ M ≤ I and
/// 0 ≤ M^Γ ≤ I, by iterated grid refinement over (α, β).
fn commutant_oracle(d: usize) -> f64 {
    let (ps, pa) = symmetric_projectors(d);
    let layout = TensorLayout::from_pairs(&[("A1", d), ("B1", d)]).unwrap();
    let feasible = |a: f64, b: f64| -> bool {
        if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) {
            return false;
        }
        let m: CMatrix = ps.scale(a) + pa.scale(b);
        let mg = Operator::new(layout.clone(), m).unwrap().partial_transpose(&["A1"]).unwrap();
        let ev = eigenvalues(mg.matrix());
        ev.iter().all(|&x| x >= -1e-12 && x <= 1.0 + 1e-12)
    };
    // Tr[(αP_sym + βP_asym)(σ₀ - σ₁)] = α - β.
    let (mut ca, mut cb, mut half) = (0.5, 0.5, 0.5);
    let mut best = (0.0, 0.5, 0.5);
    for _ in 0..8 {
        let steps = 40;
        for i in 0..=steps {
            for j in 0..=steps {
                let a = ca - half + 2.0 * half * i as f64 / steps as f64;
                let b = cb - half + 2.0 * half * j as f64 / steps as f64;
                if a - b > best.0 && feasible(a, b) {
                    best = (a - b, a, b);
                }
            }
        }
        ca = best.1;
        cb = best.2;
        half /= 8.0;
    }
    0.5 + best.0 / 2.0
}

fn c2_ppt_bracket() -> Verdict {
    let mut details = Vec::new();
    let mut ok = true;
    for d in 2..=4 {
        let (s0, s1) = make_hiding_pair(&HidingPairSpec::werner(d)).unwrap();
        let v = ppt_upper_bound(&s0, &s1).unwrap().value;
        let closed = 0.5 + 1.0 / (d as f64 + 1.0);
        let oracle = commutant_oracle(d);
        ok &= (v - closed).abs() <= 1e-5 && (oracle - closed).abs() <= 1e-5;
        details.push(format!("d={d} ppt={v:.7} oracle={oracle:.7} closed={closed:.7}"));
    }
    let streams = SeedStream::new(2024);
    let library = StrategyLibrary::default();
    let mut ordered = 0;
    for k in 0..50u64 {
        let mut rng = streams.rng("bracket-pair", k);
        let layout = if k % 3 == 2 {
            TensorLayout::from_pairs(&[("A", 2), ("B", 3)]).unwrap()
        } else {
            TensorLayout::from_pairs(&[("A", 2), ("B", 2)]).unwrap()
        };
        let rho0 = sample_ginibre(&layout, &mut rng).unwrap();
        let rho1 = if k % 5 == 4 {
            sample_separable(&layout, 3, k).unwrap()
        } else {
            sample_ginibre(&layout, &mut rng).unwrap()
        };
        let b = BoundBracket::compute(&rho0, &rho1, &library).unwrap();
        let tol = 1e-6;
        if b.check().is_ok()
            && 0.5 - 1e-12 <= b.locc_lower
            && b.locc_lower <= b.ppt_upper + tol
            && b.ppt_upper <= b.helstrom + tol
            && b.helstrom <= 1.0 + 1e-12
        {
            ordered += 1;
        }
    }
    ok &= ordered == 50;
    details.push(format!("ordered brackets {ordered}/50"));
    verdict(ok, details.join("; "))
}

fn c3_bound_chain() -> Verdict {
    let (s0, s1) = make_hiding_pair(&HidingPairSpec::werner(2)).unwrap();
    let eps = ppt_upper_bound(&s0, &s1).unwrap().value - 0.5;
    let mut ok = true;
    let mut rows = Vec::new();
    for d2 in [2, 3, 4] {
        for lambda in [0.9, 0.99] {
            let eps_prime = 2.0 * (1.0f64 - lambda).sqrt();
            let bound = thm2_locc_bound(eps, eps_prime).unwrap();
            ok &= bound == eps + (1.0 + eps_prime) / 2.0;
            let psi = PsiSpec::new(lambda, d2).unwrap();
            let (r0, r1) = make_rho_pair(&HidingPairSpec::werner(2), &psi).unwrap();
            let ppt = ppt_upper_bound(&r0, &r1).unwrap().value;
            ok &= ppt <= bound + 1e-5;
            rows.push(format!("d2={d2} lambda={lambda} ppt={ppt:.5} <= thm2={bound:.5}"));
        }
    }
    let mut curve = Vec::new();
    let mut prev = f64::INFINITY;
    for k in 1..=8 {
        let lambda = 1.0 - 10f64.powi(-k);
        let b = thm2_locc_bound(eps, 2.0 * (1.0 - lambda).sqrt()).unwrap();
        ok &= b < prev;
        prev = b;
        curve.push(format!("(1-1e-{k}, {b:.6})"));
    }
    ok &= (prev - (eps + 0.5)).abs() < 1e-3;
    verdict(
        ok,
        format!("eps={eps:.7}; {}; thm2 curve lambda->1: {}", rows.join(", "), curve.join(" ")),
    )
}

fn c4_concentration() -> Verdict {
    let bell = PsiSpec::new(0.5, 2).unwrap().spectrum().unwrap();
    let exact = concentration_success_prob(&bell, 2, 1.0, ConcentrationMode::Exact).unwrap();
    let exact_ok = exact.probability == 0.5;

    let psi = PsiSpec::new(0.5, 8).unwrap();
    let dist = concentration_distribution(
        &psi.spectrum().unwrap(),
        64,
        ConcentrationMode::Sampled {
            samples: 100_000,
            seed: 4,
        },
    )
    .unwrap();
    let rate = dist.mean_log2_dim() / 64.0;
    let target = 2.403;
    let sampled_ok = (rate - target).abs() <= 0.05;
    verdict(
        exact_ok && sampled_ok,
        format!(
            "exact P(log2_dim>=1) = {} (want 0.5); sampled mean log2_dim/n = {rate:.4} vs {target} (|diff| = {:.4}, tol 0.05); entropy = {:.4}",
            exact.probability,
            (rate - target).abs(),
            psi.entropy()
        ),
    )
}

fn c5_memory_block() -> Verdict {
    let psi = PsiSpec::new(0.5, 8).unwrap();
    let (n_block, est) = choose_block_length(2, &psi, 0.05, 512, 100_000, 5).unwrap();
    let eps_tilde = 1.0 - est.probability;
    let k = 200;
    let trials = 500;
    let n = k * n_block;
    let r = 1.0 - eps_tilde - 0.05;
    let make = move || Ok(Box::new(memory_block_strategy(2, psi, n_block)?) as Box<dyn Strategy>);
    let s = run_trials(&make, &RoundSource::Synthetic, n, trials, 55, GameMode::Memory, |_, t| t.s_n()).unwrap();
    let hits = s.iter().filter(|&&x| x as f64 >= r * n as f64).count();
    let frac = hits as f64 / trials as f64;
    verdict(
        eps_tilde <= 0.05 && frac >= 0.99,
        format!(
            "n_block={n_block} eps_tilde={eps_tilde:.4} (exact={}) r={r:.4} Pr(S_kn >= r*kn) = {frac:.4} over {trials} trials of {k} blocks",
            est.exact
        ),
    )
}

fn c6_detection() -> Verdict {
    let cfg = DetectionConfig {
        p_tau: 0.9,
        p_locc: 0.75,
        delta: 0.05,
        n: 2000,
        mode: DetectionMode::CatalystThreshold,
    };
    let (tau, gamma) = cfg.default_oracles(0.1);
    let s = detection_trials(&cfg, &tau, &gamma, 10_000, 66).unwrap();
    let t_tau = 1.0 - 2.0 * (-2.0 * 2000.0 * 0.05f64 * 0.05).exp() - 0.01;
    let t_gamma = 1.0 - (-2000.0 * 0.05f64 * 0.05 / 2.0).exp() - 0.01;
    let consistent = (hoeffding_bound(2000, 0.05) - 0.01 - t_tau).abs() < 1e-15
        && (1.0 - azuma_bound(2000, 0.05) - 0.01 - t_gamma).abs() < 1e-15;
    let m = min_rounds(0.1, 1.0).unwrap();
    verdict(
        s.p_corr_tau >= t_tau && s.p_corr_gamma >= t_gamma && m == 278 && consistent,
        format!(
            "P_corr(tau) = {:.4} >= {t_tau:.5}; P_corr(gamma) = {:.4} >= {t_gamma:.5}; min_rounds(0.1, 1) = {m}",
            s.p_corr_tau, s.p_corr_gamma
        ),
    )
}

fn c7_supermartingale() -> Verdict {
    let make = || Ok(Box::new(HistoryCappedOracle::new(0.75, 0.1)?) as Box<dyn Strategy>);
    let outcomes = run_trials(&make, &RoundSource::Synthetic, 500, 10_000, 77, GameMode::Memory, |_, t| {
        t.check_invariants().map(|_| t.outcomes().collect::<Vec<u8>>())
    })
    .unwrap();
    let mut check = SupermartingaleCheck::new(0.75, 50);
    for xs in outcomes {
        check.add_outcomes(&xs.unwrap()).unwrap();
    }
    let rep = check.report();
    let worst = rep
        .buckets
        .iter()
        .map(|b| b.mean_drift - 3.0 * b.std_error)
        .fold(f64::NEG_INFINITY, f64::max);
    verdict(
        rep.ok(),
        format!(
            "{} trajectories, {} buckets; pooled drift {:.5} ± {:.5}; max(drift - 3σ) over buckets = {worst:.5}; max increment {}",
            rep.trajectories,
            rep.buckets.len(),
            rep.pooled_drift,
            rep.pooled_std_error,
            rep.max_increment
        ),
    )
}

fn c8_teleportation() -> Verdict {
    let streams = SeedStream::new(88);
    let mut worst: f64 = 1.0;
    for l in [2usize, 3] {
        for k in 0..100u64 {
            let mut rng = streams.rng(&format!("teleport-{l}"), k);
            let input = if k % 2 == 0 {
                let layout = TensorLayout::single("A", l).unwrap();
                PureState::normalized(layout, haar_vector(l, &mut rng)).unwrap().density()
            } else {
                let layout = TensorLayout::from_pairs(&[("A", l), ("R", 2)]).unwrap();
                sample_ginibre(&layout, &mut rng).unwrap()
            };
            let out = teleport(&input, "A", make_max_entangled(l).unwrap(), "BT").unwrap();
            let mut expected = input.relabel("A", "BT").unwrap();
            if input.layout().len() == 2 {
                expected = expected.permute(&["R", "BT"]).unwrap();
            }
            worst = worst.min(fidelity(&out.state, &expected).unwrap());
        }
    }
    let (s0, s1) = make_hiding_pair(&HidingPairSpec::werner(2)).unwrap();
    let mut st = TeleportMeasureStrategy::new(2, 1000).unwrap();
    let t = run_game(&mut st, &RoundSource::states(s0, s1), 1000, 8, GameMode::Memory).unwrap();
    let success = t.s_n() as f64 / 1000.0;
    verdict(
        worst >= 1.0 - 1e-10 && success == 1.0,
        format!("min fidelity over 200 states = {worst:.15}; teleport-then-measure success = {success}"),
    )
}

fn artifacts(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| matches!(p.extension().and_then(|e| e.to_str()), Some("jsonl" | "csv")))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    v.sort();
    v
}

fn c9_determinism() -> Verdict {
    let configs = [
        CommandParams::Simulate(SimulateParams {
            protocol: ProtocolSpec::MemoryBlock {
                d1: 2,
                lambda: 0.5,
                d2: 8,
                n_block: None,
                eps_target: 0.05,
            },
            n: None,
            blocks: Some(10),
            trials: 40,
            mode: GameMode::Memory,
            r: None,
            transcript_trials: None,
        }),
        CommandParams::Detect(DetectParams {
            p_tau: 0.9,
            p_locc: 0.75,
            delta: 0.05,
            n: Some(300),
            trace_distance: None,
            mode: DetectionMode::CatalystThreshold,
            trials: 200,
            penalty: 0.1,
        }),
        CommandParams::Simulate(SimulateParams {
            protocol: ProtocolSpec::CappedOracle { p: 0.75, penalty: 0.1 },
            n: Some(200),
            blocks: None,
            trials: 30,
            mode: GameMode::Memory,
            r: Some(0.7),
            transcript_trials: None,
        }),
    ];
    let tmp = tempfile::tempdir().unwrap();
    let mut ok = true;
    let mut files = 0;
    for (i, params) in configs.iter().enumerate() {
        let mut runs = Vec::new();
        for (j, threads) in [1usize, 1, 4, 4].iter().enumerate() {
            let dir = tmp.path().join(format!("c{i}-r{j}"));
            let cfg = ExperimentConfig {
                seed: 99,
                out: Some(dir.clone()),
                params: params.clone(),
            };
            run_config(&cfg, *threads).unwrap();
            runs.push(artifacts(&dir));
        }
        files += runs[0].len();
        ok &= runs[0].len() >= 2 && runs.iter().all(|r| *r == runs[0]);
    }
    verdict(
        ok,
        format!("{files} JSONL/CSV artifacts byte-identical across 2 serial and 2 four-thread runs"),
    )
}

fn main() {
    let secs = Duration::from_secs;
    let results = [
        criterion(1, "helstrom-exactness", secs(1), c1_helstrom),
        criterion(2, "ppt-bracket", secs(30), c2_ppt_bracket),
        criterion(3, "bound-chain", secs(60), c3_bound_chain),
        criterion(4, "concentration", secs(60), c4_concentration),
        criterion(5, "memory-block-protocol", secs(300), c5_memory_block),
        criterion(6, "detection", secs(120), c6_detection),
        criterion(7, "supermartingale", secs(60), c7_supermartingale),
        criterion(8, "teleportation", secs(30), c8_teleportation),
        criterion(9, "determinism", secs(120), c9_determinism),
    ];
    let passed = results.iter().filter(|&&r| r).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
