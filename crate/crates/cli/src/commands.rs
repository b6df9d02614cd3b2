use std::path::Path;

use qcontext::bell::{evaluate_bell_scenario, BellScenario};
use qcontext::context::{validate_kernel, KernelFile, TransitionKernel};
use qcontext::dynamics::{
    extract_hamiltonian, find_contradiction_times, probability_trace, time_grid, BRANCH,
};
use qcontext::liar::{build_step_matrix, is_paradoxical, parse_config, Claim};
use qcontext::poll::{run_opinion_poll, PollConfig};
use qcontext::structure::{classify_structure, TransitionData};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::CliError;
use crate::grid::{parse_grid, GridSpec};
use crate::output::{fmt_f64, OutputDir, RunManifest};
use crate::svg::{line_chart, Series};
use crate::Common;

fn read_input(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|source| CliError::Read { path: path.to_path_buf(), source })
}

fn parse_json<T: DeserializeOwned>(path: &Path, bytes: &[u8]) -> Result<T, CliError> {
    serde_json::from_slice(bytes).map_err(|source| CliError::Json { path: path.to_path_buf(), source })
}

fn finish(mut out: OutputDir, mut manifest: RunManifest) -> Result<(), CliError> {
    manifest.outputs = out.written().to_vec();
    out.write_json("manifest.json", &manifest)?;
    Ok(())
}

pub fn bell(common: &Common) -> Result<(), CliError> {
    let bytes = read_input(&common.input)?;
    let scenario: BellScenario = parse_json(&common.input, &bytes)?;
    let report = evaluate_bell_scenario(&scenario)?;
    let mut out = OutputDir::create(&common.out)?;
    out.write_json("bell_report.json", &report)?;
    println!("{}", report.summary());
    finish(out, RunManifest::new("bell", &common.input, &bytes, None))
}

pub fn poll(
    common: &Common,
    seed: Option<u64>,
    epsilon: Option<f64>,
    randomize_order: bool,
    svg: bool,
) -> Result<(), CliError> {
    let bytes = read_input(&common.input)?;
    let mut config: PollConfig = parse_json(&common.input, &bytes)?;
    if let Some(s) = seed {
        config.seed = s;
    }
    if let Some(e) = epsilon {
        config.epsilon = e;
    }
    config.randomize_order |= randomize_order;
    let report = run_opinion_poll(&config)?;
    let classification = classify_structure(&report.conditional)?;

    let mut out = OutputDir::create(&common.out)?;
    out.write_json("poll_report.json", &report)?;
    out.write("census.csv", &report.census_csv())?;
    out.write_json("classification.json", &classification)?;
    if svg {
        let metric = |name: &str, v: [f64; 3]| Series {
            name: name.to_string(),
            points: (0..3).map(|k| ((k + 1) as f64, v[k])).collect(),
        };
        let series = [
            metric("yes (first asking)", report.marginal_yes),
            metric("predetermined yes", report.predetermined_yes),
            metric("predetermined no", report.predetermined_no),
            metric("formed", report.formed),
        ];
        let title = format!("poll, epsilon = {:.4}, N = {}", config.epsilon, config.population);
        out.write("poll.svg", &line_chart(&title, "question", "fraction", &series, Some((0.0, 1.0))))?;
    }
    let v = serde_json::to_value(classification.verdict).map_err(|e| CliError::Internal(e.to_string()))?;
    println!(
        "verdict={} marginal_yes={:.4?} predetermined_yes={:.4?} formed={:.4?}",
        v.as_str().unwrap_or("?"),
        report.marginal_yes,
        report.predetermined_yes,
        report.formed
    );
    finish(out, RunManifest::new("poll", &common.input, &bytes, Some(config.seed)))
}

#[derive(Serialize)]
struct LiarMeta {
    m: usize,
    paradoxical: bool,
    hypothesis: String,
    tau: f64,
    branch: &'static str,
    grid: GridSpecOut,
    /// Where one inference step sends each claim.
    step: Vec<(String, String)>,
    step_cycles: Vec<Vec<String>>,
    step_cycle_type: Vec<usize>,
    eigenphases: Vec<f64>,
    contradiction_times: Vec<f64>,
}

#[derive(Serialize)]
struct GridSpecOut {
    start: f64,
    stop: f64,
    step: f64,
    points: usize,
}

pub fn liar(common: &Common, hypothesis: &str, tau: f64, grid: &str, svg: bool) -> Result<(), CliError> {
    let bytes = read_input(&common.input)?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| CliError::Input(format!("{} is not UTF-8 text", common.input.display())))?;
    let config = parse_config(&text)?;
    let h: Claim = hypothesis.parse()?;
    config.check_claim(h)?;
    let GridSpec { start, stop, step } = parse_grid(grid)?;
    let times = time_grid(start, stop, step)?;

    let matrix = build_step_matrix(&config);
    let op = extract_hamiltonian(&matrix, tau)?;
    let trace = probability_trace(&config, h, &times, tau)?;
    let hits = find_contradiction_times(&trace, h);

    let mut csv = String::from("time,claim,probability\n");
    for (t, row) in trace.times.iter().zip(&trace.probs) {
        for (c, p) in trace.claims.iter().zip(row) {
            csv.push_str(&format!("{},{c},{}\n", fmt_f64(*t), fmt_f64(*p)));
        }
    }
    let label = |k: usize| config.claim_at(k).to_string();
    let meta = LiarMeta {
        m: config.m(),
        paradoxical: is_paradoxical(&config),
        hypothesis: h.to_string(),
        tau,
        branch: BRANCH,
        grid: GridSpecOut { start, stop, step, points: times.len() },
        step: matrix.image().iter().enumerate().map(|(k, &to)| (label(k), label(to))).collect(),
        step_cycles: matrix.cycles().iter().map(|c| c.iter().map(|&k| label(k)).collect()).collect(),
        step_cycle_type: matrix.cycle_type(),
        eigenphases: op.eigenphases(),
        contradiction_times: hits.clone(),
    };

    let mut out = OutputDir::create(&common.out)?;
    out.write("trace.csv", &csv)?;
    out.write_json("liar_meta.json", &meta)?;
    if svg {
        let series: Vec<Series> = trace
            .claims
            .iter()
            .enumerate()
            .map(|(k, c)| Series {
                name: c.to_string(),
                points: trace.times.iter().zip(&trace.probs).map(|(t, row)| (*t, row[k])).collect(),
            })
            .collect();
        let title = format!("hypothesis {h}, tau = {tau:.4}");
        out.write("trace.svg", &line_chart(&title, "t", "probability", &series, Some((0.0, 1.0))))?;
    }
    let shown: Vec<String> = hits.iter().map(|t| format!("{:.4}pi", t / std::f64::consts::PI)).collect();
    println!(
        "m={} paradoxical={} contradiction_times=[{}]",
        config.m(),
        meta.paradoxical,
        shown.join(", ")
    );
    finish(out, RunManifest::new("liar", &common.input, &bytes, None))
}

pub fn classify(common: &Common) -> Result<(), CliError> {
    let bytes = read_input(&common.input)?;
    let data: TransitionData = parse_json(&common.input, &bytes)?;
    let c = classify_structure(&data)?;
    let mut out = OutputDir::create(&common.out)?;
    out.write_json("classification.json", &c)?;
    let v = serde_json::to_value(c.verdict).map_err(|e| CliError::Internal(e.to_string()))?;
    println!("verdict={}", v.as_str().unwrap_or("?"));
    finish(out, RunManifest::new("classify", &common.input, &bytes, None))
}

pub fn kernel_validate(common: &Common) -> Result<(), CliError> {
    let bytes = read_input(&common.input)?;
    let file: KernelFile = parse_json(&common.input, &bytes)?;
    let kernel = TransitionKernel::new(file.states, file.contexts, file.prob)?;
    let report = validate_kernel(&kernel);
    let mut out = OutputDir::create(&common.out)?;
    out.write_json("kernel_report.json", &report)?;
    if report.valid {
        println!("valid: {} states, {} contexts", kernel.states().len(), kernel.contexts().len());
    } else {
        println!("invalid: {} row violation(s)", report.violations.len());
    }
    finish(out, RunManifest::new("kernel-validate", &common.input, &bytes, None))
}
