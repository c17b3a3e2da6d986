//! Command execution: parameters in, summary and artifacts out.

use std::fs;
use std::path::PathBuf;

use serde::Serialize;
use serde_json::{json, Value};

use super::config::*;
use crate::distinguish::{helstrom, ppt_upper_bound, thm2_locc_bound, BoundBracket, StrategyLibrary};
use crate::error::{Error, Result};
use crate::game::{
    choose_block_length, detection_trials, memory_block_strategy, min_rounds, run_trials,
    estimate_rate, GameTranscript, HistoryCappedOracle, OracleStrategy, RoundRecord, RoundSource, Strategy,
    TeleportMeasureStrategy,
};
use crate::protocols::{
    auto_mode, concentration_distribution, concentration_success_prob, counts_hash, ConcentrationMode,
};
use crate::qmat::{density_from_json, operator_to_json, trace_norm, DensityOperator};
use crate::rng::SeedStream;
use crate::states::{
    check_psi_conditions, make_hiding_pair, make_max_entangled, make_psi, make_rho_pair, HidingPairSpec, PsiSpec,
};

/// Rows of a CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| Error::Config(e.to_string());
        w.write_record(&self.header).map_err(err)?;
        for r in &self.rows {
            w.write_record(r).map_err(err)?;
        }
        w.into_inner().map_err(|e| Error::Config(e.to_string()))
    }

    /// Header plus one row built from the scalar fields of a JSON object.
    fn from_scalars(v: &Value) -> Option<Table> {
        let obj = v.as_object()?;
        let mut header = Vec::new();
        let mut row = Vec::new();
        for (k, val) in obj {
            let cell = match val {
                Value::Number(n) => n.to_string(),
                Value::String(s) => s.clone(),
                Value::Bool(b) => b.to_string(),
                _ => continue,
            };
            header.push(k.clone());
            row.push(cell);
        }
        Some(Table { header, rows: vec![row] })
    }
}

/// Everything a command produced.
#[derive(Debug, Default)]
pub struct RunOutput {
    pub summary: Value,
    /// Written as summary.csv (or the file named in `table_name`).
    pub table: Option<Table>,
    pub table_name: Option<&'static str>,
    /// Additional artifacts, written under the output directory.
    pub files: Vec<(String, Vec<u8>)>,
    pub inputs: Vec<PathBuf>,
    pub seed_streams: Vec<String>,
}

impl RunOutput {
    /// Table for `--format csv` on stdout.
    pub fn stdout_table(&self) -> Option<Table> {
        self.table.clone().or_else(|| Table::from_scalars(&self.summary))
    }
}

fn to_value<T: Serialize>(v: &T) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| Error::Config(e.to_string()))
}

fn json_line<T: Serialize>(out: &mut Vec<u8>, v: &T) -> Result<()> {
    serde_json::to_writer(&mut *out, v).map_err(|e| Error::Config(e.to_string()))?;
    out.push(b'\n');
    Ok(())
}

fn cols(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn fmt(x: f64) -> String {
    format!("{x}")
}

pub fn execute(params: &CommandParams, seed: u64) -> Result<RunOutput> {
    match params {
        CommandParams::Helstrom(p) => cmd_helstrom(p),
        CommandParams::Bounds(p) => cmd_bounds(p, seed),
        CommandParams::Entropy(p) => cmd_entropy(p),
        CommandParams::Construct(p) => cmd_construct(p),
        CommandParams::Simulate(p) => cmd_simulate(p, params, seed),
        CommandParams::Detect(p) => cmd_detect(p, params, seed),
        CommandParams::Concentrate(p) => cmd_concentrate(p, params, seed),
        CommandParams::Rate(p) => cmd_rate(p, seed),
    }
}

fn load_pair(src: &StateSource) -> Result<(DensityOperator, DensityOperator, Vec<PathBuf>)> {
    match src {
        StateSource::Files { rho0, rho1 } => {
            let a = density_from_json(&fs::read_to_string(rho0)?)?;
            let b = density_from_json(&fs::read_to_string(rho1)?)?;
            Ok((a, b, vec![rho0.clone(), rho1.clone()]))
        }
        StateSource::Werner { d } => {
            let (a, b) = make_hiding_pair(&HidingPairSpec::werner(*d))?;
            Ok((a, b, vec![]))
        }
        StateSource::Rho { d, lambda, d2 } => {
            let (a, b) = make_rho_pair(&HidingPairSpec::werner(*d), &PsiSpec::new(*lambda, *d2)?)?;
            Ok((a, b, vec![]))
        }
    }
}

fn cmd_helstrom(p: &StateParams) -> Result<RunOutput> {
    let (a, b, inputs) = load_pair(&p.states)?;
    let t = trace_norm(&a.difference(&b)?)?;
    Ok(RunOutput {
        summary: json!({ "trace_distance": t, "p_opt": helstrom(&a, &b)? }),
        inputs,
        ..Default::default()
    })
}

fn cmd_bounds(p: &BoundsParams, seed: u64) -> Result<RunOutput> {
    let (a, b, inputs) = load_pair(&p.states)?;
    let library = StrategyLibrary::with_random_bases(p.random_bases, SeedStream::new(seed).child("library", 0).root());
    let bracket = BoundBracket::compute(&a, &b, &library)?;
    let mut summary = to_value(&bracket.report())?;
    if let StateSource::Rho { d, lambda, .. } = p.states {
        let (s0, s1) = make_hiding_pair(&HidingPairSpec::werner(d))?;
        let eps = (ppt_upper_bound(&s0, &s1)?.value - 0.5).max(0.0);
        let eps_prime = 2.0 * (1.0 - lambda).sqrt();
        summary["thm2"] = json!({
            "eps": eps,
            "eps_prime": eps_prime,
            "bound": thm2_locc_bound(eps, eps_prime)?,
        });
    }
    Ok(RunOutput {
        summary,
        inputs,
        seed_streams: vec!["library".into()],
        ..Default::default()
    })
}

fn cmd_entropy(p: &EntropyParams) -> Result<RunOutput> {
    let spec = PsiSpec::new(p.lambda, p.d2)?;
    let report = check_psi_conditions(&spec, p.d1, p.eps_prime.unwrap_or(f64::INFINITY))?;
    let mut summary = json!({
        "lambda": p.lambda,
        "d2": p.d2,
        "d1": p.d1,
        "entropy": report.entropy,
        "entropy_excess": report.entropy_excess,
        "distance_to_product": report.distance_to_product,
        "schmidt_probabilities": spec.spectrum()?.values(),
    });
    if let Some(e) = p.eps_prime {
        summary["eps_prime"] = json!(e);
        summary["near_product"] = json!(report.near_product);
    }
    Ok(RunOutput {
        summary,
        ..Default::default()
    })
}

fn cmd_construct(p: &ConstructParams) -> Result<RunOutput> {
    let mut ops: Vec<(&str, DensityOperator)> = Vec::new();
    let mut inputs = Vec::new();
    match p.what {
        ConstructWhat::Pair => {
            let src = p
                .states
                .as_ref()
                .ok_or_else(|| Error::Config("construct pair needs a state family".into()))?;
            let (a, b, i) = load_pair(src)?;
            inputs = i;
            ops.push(("rho0", a));
            ops.push(("rho1", b));
        }
        ConstructWhat::Psi => {
            let (l, d2) = p
                .lambda
                .zip(p.d2)
                .ok_or_else(|| Error::Config("construct psi needs lambda and d2".into()))?;
            ops.push(("psi", make_psi(&PsiSpec::new(l, d2)?)?.density()));
        }
        ConstructWhat::MaxEntangled => {
            let dim = p.dim.ok_or_else(|| Error::Config("construct max-entangled needs dim".into()))?;
            ops.push(("phi", make_max_entangled(dim)?.density()));
        }
    }
    let mut summary = serde_json::Map::new();
    let mut files = Vec::new();
    for (name, op) in ops {
        let text = operator_to_json(op.operator())?;
        summary.insert(
            name.to_string(),
            serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))?,
        );
        files.push((format!("{name}.json"), text.into_bytes()));
    }
    Ok(RunOutput {
        summary: Value::Object(summary),
        files,
        inputs,
        ..Default::default()
    })
}

/// Resolved protocol: a strategy factory plus what the summary should say
/// about it.
struct Resolved {
    make: Box<dyn Fn() -> Result<Box<dyn Strategy>> + Sync>,
    source: RoundSource,
    n_block: Option<usize>,
    eps_tilde: Option<(f64, f64)>,
    pairs_per_round: bool,
}

fn resolve_protocol(spec: &ProtocolSpec, seed: u64) -> Result<Resolved> {
    Ok(match *spec {
        ProtocolSpec::Oracle { p } => {
            OracleStrategy::new(p)?;
            Resolved {
                make: Box::new(move || Ok(Box::new(OracleStrategy::new(p)?) as Box<dyn Strategy>)),
                source: RoundSource::Synthetic,
                n_block: None,
                eps_tilde: None,
                pairs_per_round: false,
            }
        }
        ProtocolSpec::CappedOracle { p, penalty } => {
            HistoryCappedOracle::new(p, penalty)?;
            Resolved {
                make: Box::new(move || Ok(Box::new(HistoryCappedOracle::new(p, penalty)?) as Box<dyn Strategy>)),
                source: RoundSource::Synthetic,
                n_block: None,
                eps_tilde: None,
                pairs_per_round: false,
            }
        }
        ProtocolSpec::MemoryBlock {
            d1,
            lambda,
            d2,
            n_block,
            eps_target,
        } => {
            let psi = PsiSpec::new(lambda, d2)?;
            memory_block_strategy(d1, psi, 1)?;
            let choice_seed = SeedStream::new(seed).child("block-length", 0).root();
            let (nb, est) = match n_block {
                Some(nb) => {
                    let s = memory_block_strategy(d1, psi, nb)?;
                    let mode = auto_mode(&psi.spectrum()?, nb, 100_000, choice_seed);
                    (nb, s.failure_estimate(mode)?)
                }
                None => choose_block_length(d1, &psi, eps_target, 512, 100_000, choice_seed)?,
            };
            Resolved {
                make: Box::new(move || Ok(Box::new(memory_block_strategy(d1, psi, nb)?) as Box<dyn Strategy>)),
                source: RoundSource::Synthetic,
                n_block: Some(nb),
                eps_tilde: Some((1.0 - est.probability, 1.0 - est.lower)),
                pairs_per_round: false,
            }
        }
        ProtocolSpec::TeleportMeasure { d } => {
            let (s0, s1) = make_hiding_pair(&HidingPairSpec::werner(d))?;
            Resolved {
                make: Box::new(move || Ok(Box::new(TeleportMeasureStrategy::new(d, 0)?) as Box<dyn Strategy>)),
                source: RoundSource::states(s0, s1),
                n_block: None,
                eps_tilde: None,
                pairs_per_round: true,
            }
        }
    })
}

#[derive(Serialize)]
struct TrialHeader<'a> {
    protocol_id: &'a str,
    trial: usize,
    seed: u64,
    n: usize,
    config: &'a CommandParams,
}

#[derive(Serialize)]
struct TrialRecord<'a> {
    trial: usize,
    #[serde(flatten)]
    record: &'a RoundRecord,
}

fn transcript_lines(t: usize, tr: &GameTranscript, config: &CommandParams) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    json_line(
        &mut out,
        &TrialHeader {
            protocol_id: &tr.protocol_id,
            trial: t,
            seed: tr.seed,
            n: tr.n,
            config,
        },
    )?;
    for r in &tr.records {
        json_line(&mut out, &TrialRecord { trial: t, record: r })?;
    }
    Ok(out)
}

const GAME_STREAMS: [&str; 4] = ["trial", "trial/z", "trial/measure", "trial/strategy"];

fn cmd_simulate(p: &SimulateParams, params: &CommandParams, seed: u64) -> Result<RunOutput> {
    let resolved = resolve_protocol(&p.protocol, seed)?;
    let n = match (p.n, p.blocks, resolved.n_block) {
        (Some(n), None, _) => n,
        (None, Some(b), Some(nb)) => b * nb,
        (None, Some(_), None) => return Err(Error::Config("blocks only applies to memory-block".into())),
        _ => return Err(Error::Config("give exactly one of n and blocks".into())),
    };
    if p.trials == 0 || n == 0 {
        return Err(Error::Config("trials and n must be positive".into()));
    }
    let r = match (p.r, resolved.eps_tilde) {
        (Some(r), _) => r,
        (None, Some((eps, _))) => (1.0 - eps - 0.05).max(0.0),
        (None, None) => 0.5,
    };
    let keep = p.transcript_trials.unwrap_or(p.trials);
    let make: Box<dyn Fn() -> Result<Box<dyn Strategy>> + Sync> = if resolved.pairs_per_round {
        let ProtocolSpec::TeleportMeasure { d } = p.protocol else { unreachable!() };
        Box::new(move || Ok(Box::new(TeleportMeasureStrategy::new(d, n)?) as Box<dyn Strategy>))
    } else {
        resolved.make
    };
    let results = run_trials(&*make, &resolved.source, n, p.trials, seed, p.mode, |t, tr| {
        tr.check_invariants()?;
        let lines = if t < keep { Some(transcript_lines(t, &tr, params)?) } else { None };
        Ok::<_, Error>((tr.s_n(), tr.protocol_id, lines))
    })?
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let protocol_id = results[0].1.clone();
    let mut jsonl = Vec::new();
    let mut rows = Vec::with_capacity(results.len());
    let mut hits = 0usize;
    let mut rates = Vec::with_capacity(results.len());
    for (t, (s_n, _, lines)) in results.into_iter().enumerate() {
        if let Some(l) = lines {
            jsonl.extend(l);
        }
        let rate = s_n as f64 / n as f64;
        if s_n as f64 >= r * n as f64 {
            hits += 1;
        }
        rates.push(rate);
        rows.push(vec![t.to_string(), n.to_string(), s_n.to_string(), fmt(rate), String::new()]);
    }
    let mean_rate = rates.iter().sum::<f64>() / rates.len() as f64;
    let min_rate = rates.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut summary = json!({
        "protocol_id": protocol_id,
        "mode": p.mode,
        "trials": p.trials,
        "n": n,
        "r": r,
        "success_frac": hits as f64 / p.trials as f64,
        "mean_rate": mean_rate,
        "min_rate": min_rate,
    });
    if let Some(nb) = resolved.n_block {
        summary["n_block"] = json!(nb);
        summary["blocks"] = json!(n / nb);
    }
    if let Some((eps, eps_hi)) = resolved.eps_tilde {
        summary["eps_tilde"] = json!(eps);
        summary["eps_tilde_upper"] = json!(eps_hi);
    }
    let mut streams: Vec<String> = GAME_STREAMS.iter().map(|s| s.to_string()).collect();
    if resolved.n_block.is_some() {
        streams.push("block-length".into());
    }
    Ok(RunOutput {
        summary,
        table: Some(Table {
            header: cols(&["trial", "n", "S_n", "rate", "guess"]),
            rows,
        }),
        table_name: None,
        files: vec![("transcripts.jsonl".into(), jsonl)],
        inputs: vec![],
        seed_streams: streams,
    })
}

fn cmd_detect(p: &DetectParams, params: &CommandParams, seed: u64) -> Result<RunOutput> {
    let n = match (p.n, p.trace_distance) {
        (Some(n), _) => n,
        (None, Some(t)) => min_rounds(p.delta, t)? as usize,
        (None, None) => return Err(Error::Config("give n or trace_distance".into())),
    };
    let config = crate::game::DetectionConfig {
        p_tau: p.p_tau,
        p_locc: p.p_locc,
        delta: p.delta,
        n,
        mode: p.mode,
    };
    let (tau, gamma) = config.default_oracles(p.penalty);
    let s = detection_trials(&config, &tau, &gamma, p.trials, seed)?;

    let mut jsonl = Vec::new();
    json_line(
        &mut jsonl,
        &json!({ "protocol_id": "detect", "seed": seed, "n": n, "config": params }),
    )?;
    let mut rows = Vec::with_capacity(s.records.len());
    for (i, rec) in s.records.iter().enumerate() {
        json_line(&mut jsonl, rec)?;
        rows.push(vec![
            i.to_string(),
            n.to_string(),
            rec.s_n.to_string(),
            fmt(rec.s_n as f64 / n as f64),
            to_value(&rec.guess)?.as_str().unwrap_or_default().to_string(),
        ]);
    }
    let mut summary = json!({
        "n": n,
        "trials_per_world": s.trials,
        "p_corr_tau": s.p_corr_tau,
        "p_corr_gamma": s.p_corr_gamma,
        "p_corr": s.p_corr,
        "hoeffding_target": s.hoeffding_target,
        "azuma_target": s.azuma_target,
        "tau_oracle": tau,
        "gamma_oracle": gamma,
        "config": config,
    });
    if let Some(t) = p.trace_distance {
        summary["trace_distance"] = json!(t);
        summary["min_rounds"] = json!(min_rounds(p.delta, t)?);
        summary["single_copy_optimum"] = json!(0.5 + t / 4.0);
        summary["beats_single_copy"] = json!(s.p_corr > 0.5 + t / 4.0);
    }
    Ok(RunOutput {
        summary,
        table: Some(Table {
            header: cols(&["trial", "n", "S_n", "rate", "guess"]),
            rows,
        }),
        table_name: None,
        files: vec![("transcripts.jsonl".into(), jsonl)],
        inputs: vec![],
        seed_streams: vec!["trial-tau".into(), "trial-gamma".into(), "trial-*/z".into(), "trial-*/measure".into()],
    })
}

fn cmd_concentrate(p: &ConcentrateParams, params: &CommandParams, seed: u64) -> Result<RunOutput> {
    let psi = PsiSpec::new(p.lambda, p.d2)?;
    let spectrum = psi.spectrum()?;
    let mode = match p.mode {
        EnumerationMode::Exact => ConcentrationMode::Exact,
        EnumerationMode::Sampled => ConcentrationMode::Sampled {
            samples: p.samples,
            seed,
        },
        EnumerationMode::Auto => auto_mode(&spectrum, p.n, p.samples, seed),
    };
    let target = p.target.unwrap_or(p.n as f64 * (p.d1 as f64).log2());
    let dist = concentration_distribution(&spectrum, p.n, mode)?;
    let success = concentration_success_prob(&spectrum, p.n, target, mode)?;
    let mean = dist.mean_log2_dim();

    let mut jsonl = Vec::new();
    json_line(
        &mut jsonl,
        &json!({ "protocol_id": "concentrate", "seed": seed, "n": p.n, "config": params }),
    )?;
    let mut rows = Vec::with_capacity(dist.outcomes.len());
    for o in &dist.outcomes {
        let h = counts_hash(&o.counts);
        json_line(
            &mut jsonl,
            &json!({ "counts": o.counts, "counts_hash": h, "log2_dim": o.log2_dim, "probability": o.probability }),
        )?;
        let counts = o.counts.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(";");
        rows.push(vec![h, counts, fmt(o.log2_dim), fmt(o.probability)]);
    }
    let summary = json!({
        "lambda": p.lambda,
        "d2": p.d2,
        "n": p.n,
        "d1": p.d1,
        "exact": dist.exact,
        "samples": dist.samples,
        "outcomes": dist.outcomes.len(),
        "entropy": psi.entropy(),
        "mean_log2_dim": mean,
        "mean_rate": mean / p.n as f64,
        "target": target,
        "success": success,
    });
    Ok(RunOutput {
        summary,
        table: Some(Table {
            header: cols(&["counts_hash", "counts", "log2_dim", "probability"]),
            rows,
        }),
        table_name: Some("distribution.csv"),
        files: vec![("outcomes.jsonl".into(), jsonl)],
        inputs: vec![],
        seed_streams: if dist.exact { vec![] } else { vec!["concentration".into()] },
    })
}

fn cmd_rate(p: &RateParams, seed: u64) -> Result<RunOutput> {
    let resolved = resolve_protocol(&p.protocol, seed)?;
    if resolved.pairs_per_round {
        return Err(Error::Config("rate estimates use probability-accounting protocols".into()));
    }
    let n_list = match (&p.n_list, &p.blocks_list, resolved.n_block) {
        (Some(l), None, _) => l.clone(),
        (None, Some(b), Some(nb)) => b.iter().map(|k| k * nb).collect(),
        _ => return Err(Error::Config("give n_list, or blocks_list for memory-block".into())),
    };
    let est = estimate_rate(&*resolved.make, &resolved.source, p.r, p.trials, &n_list, seed)?;
    let rows = est
        .n_list
        .iter()
        .zip(&est.success_frac)
        .map(|(n, f)| vec![n.to_string(), fmt(*f)])
        .collect();
    let mut summary = to_value(&est)?;
    if let Some(nb) = resolved.n_block {
        summary["n_block"] = json!(nb);
    }
    if let Some((eps, eps_hi)) = resolved.eps_tilde {
        summary["eps_tilde"] = json!(eps);
        summary["eps_tilde_upper"] = json!(eps_hi);
    }
    Ok(RunOutput {
        summary,
        table: Some(Table {
            header: cols(&["n", "success_frac"]),
            rows,
        }),
        table_name: Some("rate.csv"),
        files: vec![],
        inputs: vec![],
        seed_streams: GAME_STREAMS.iter().map(|s| s.to_string()).collect(),
    })
}
