use std::fs;
use std::path::Path;

use log::info;
use reldyad_core::augment::{fit_component, run_chains, AugmentModel, LatentLabels, PosteriorDraw, TraceRow};
use reldyad_core::events::{
    ingest_covariates, ingest_dyadic, ingest_events, ingest_risk_set, write_events, ActorTable, EventStream, RiskSet,
};
use reldyad_core::netstats::StatEvaluator;
use reldyad_core::ppois::Component;
use reldyad_core::report::{baseline_curve, combine, plain_report, summary_table, FitReport};
use reldyad_core::rng::rng_from_seed;
use reldyad_core::simulate::{generate, GeneratorSpec};
use reldyad_core::study::{run_study, table_csv, table_markdown, StudyConfig};
use serde::Serialize;

use crate::config::{Command, IoConfig, RunConfig, StudyBlock};
use crate::Failure;

const BASELINE_POINTS: usize = 201;

fn create_out(out: &Path) -> Result<(), Failure> {
    fs::create_dir_all(out).map_err(|e| Failure::input(format!("cannot create {}: {e}", out.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Failure::numerical(e.to_string()))?;
    text.push('\n');
    write_file(path, &text)
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>, Failure> {
    csv::Writer::from_path(path).map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))
}

fn csv_fail(path: &Path) -> impl Fn(csv::Error) -> Failure + '_ {
    move |e| Failure::input(format!("cannot write {}: {e}", path.display()))
}

pub fn load_stream(io: &IoConfig) -> Result<EventStream, Failure> {
    let path = io
        .events
        .as_ref()
        .ok_or_else(|| Failure::input("config lacks io.events"))?;
    let mut stream = ingest_events(path, &io.schema)?;
    if let Some(c) = &io.covariates {
        let table = ingest_covariates(&c.path, stream.actors(), &c.kinds)?;
        stream = stream.with_actors(table)?;
    }
    for d in &io.dyadic {
        let table = ingest_dyadic(&d.path, &d.name, stream.actors())?;
        stream = stream.with_actors(table)?;
    }
    Ok(stream)
}

/// `report.json`: the combined report with the resolved run configuration.
#[derive(Serialize)]
struct FitDocument<'a> {
    #[serde(flatten)]
    report: &'a FitReport,
    seed: u64,
    n_events: usize,
    n_actors: usize,
    horizon: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    chains: Vec<FitReport>,
    config: &'a RunConfig,
}

pub fn fit(mut cfg: RunConfig, seed_flag: Option<u64>, out: &Path, quiet: bool) -> Result<(), Failure> {
    cfg.check_command(Command::Fit)?;
    let seed = cfg.resolve_seed(seed_flag);
    cfg.validate_models()?;
    let stream = load_stream(&cfg.io)?;
    let true_spec = cfg.true_spec();
    StatEvaluator::new(&true_spec.statistics, stream.actors())?;
    if let Some(s) = &cfg.spurious_model {
        StatEvaluator::new(&s.statistics, stream.actors())?;
    }
    let rs = match &cfg.io.risk_set {
        Some(p) => ingest_risk_set(p, stream.actors())?,
        None => RiskSet::all_pairs(stream.actors().len()),
    };
    let model = AugmentModel::new(&stream, true_spec, cfg.spurious_model.clone(), rs, cfg.fit)?;
    create_out(out)?;
    info!(
        "{} events, {} actors, horizon {}",
        stream.len(),
        stream.actors().len(),
        stream.horizon()
    );

    let mut chain_reports = Vec::new();
    let mut trace: Vec<(usize, TraceRow)> = Vec::new();
    let report = if model.has_spurious() {
        let chains = run_chains(&stream, &model, &cfg.chain)?;
        let draws: Vec<PosteriorDraw> = chains.iter().flat_map(|c| c.draws.iter().cloned()).collect();
        let mut report = combine(&model, &draws)?;
        report.burn_in = cfg.chain.burn_in;
        report.failed_psteps = chains.iter().map(|c| c.failed_psteps).sum();
        if chains.len() > 1 {
            for c in &chains {
                let mut r = combine(&model, &c.draws)?;
                r.burn_in = c.burn_in;
                r.failed_psteps = c.failed_psteps;
                chain_reports.push(r);
            }
        }
        for (i, c) in chains.into_iter().enumerate() {
            trace.extend(c.trace.into_iter().map(|row| (i, row)));
        }
        report
    } else {
        let labels = LatentLabels::all_true(stream.len());
        let fit = fit_component(&stream, &model, &labels, Component::True, None)?;
        trace.push((
            0,
            TraceRow {
                iteration: 0,
                spurious_count: 0,
                theta: fit.theta_hat.iter().copied().collect(),
                failed: false,
            },
        ));
        plain_report(&model.true_model, &fit)
    };

    let doc = FitDocument {
        report: &report,
        seed,
        n_events: stream.len(),
        n_actors: stream.actors().len(),
        horizon: stream.horizon(),
        chains: chain_reports,
        config: &cfg,
    };
    write_json(&out.join("report.json"), &doc)?;
    write_trace(&out.join("trace.csv"), &model, &trace)?;
    let curve = baseline_curve(&report, &model.true_model, BASELINE_POINTS)?;
    let path = out.join("baseline.csv");
    let mut w = csv_writer(&path)?;
    w.write_record(["t", "estimate", "lower", "upper"]).map_err(csv_fail(&path))?;
    for p in curve {
        w.write_record([p.t, p.estimate, p.lower, p.upper].map(|v| v.to_string()))
            .map_err(csv_fail(&path))?;
    }
    w.flush().map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))?;

    if !quiet {
        print!("{}", summary_table(&report));
    }
    Ok(())
}

fn write_trace(path: &Path, model: &AugmentModel, rows: &[(usize, TraceRow)]) -> Result<(), Failure> {
    let mut w = csv_writer(path)?;
    let mut header: Vec<String> = ["chain", "iteration", "spurious_count", "failed"].map(String::from).to_vec();
    header.extend(model.names().into_iter().map(|(c, n)| match c {
        Component::True => format!("true:{n}"),
        Component::Spurious => format!("spurious:{n}"),
    }));
    w.write_record(&header).map_err(csv_fail(path))?;
    for (chain, r) in rows {
        let mut rec = vec![
            chain.to_string(),
            r.iteration.to_string(),
            r.spurious_count.to_string(),
            (r.failed as u8).to_string(),
        ];
        if r.theta.is_empty() {
            rec.resize(header.len(), String::new());
        } else {
            rec.extend(r.theta.iter().map(f64::to_string));
        }
        w.write_record(&rec).map_err(csv_fail(path))?;
    }
    w.flush().map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))
}

#[derive(Serialize)]
struct SimulationMeta<'a> {
    seed: u64,
    realized_pfe: f64,
    n_events: usize,
    n_true: usize,
    n_spurious: usize,
    horizon: f64,
    generator: &'a GeneratorSpec,
}

pub fn simulate(
    mut cfg: RunConfig,
    seed_flag: Option<u64>,
    preset: GeneratorSpec,
    out: &Path,
    quiet: bool,
) -> Result<(), Failure> {
    cfg.check_command(Command::Simulate)?;
    let seed = cfg.resolve_seed(seed_flag);
    let spec = cfg.generator.clone().unwrap_or(preset);
    spec.validate()?;
    create_out(out)?;
    let mut rng = rng_from_seed(seed);
    let sim = generate(&spec, &mut rng)?;
    write_events(&sim.stream, out.join("events.csv"))?;
    write_actors(&out.join("actors.csv"), sim.stream.actors())?;
    let meta = SimulationMeta {
        seed,
        realized_pfe: sim.realized_pfe,
        n_events: sim.stream.len(),
        n_true: sim.n_true(),
        n_spurious: sim.n_spurious(),
        horizon: sim.stream.horizon(),
        generator: &spec,
    };
    write_json(&out.join("meta.json"), &meta)?;
    if !quiet {
        println!(
            "{} events ({} true, {} spurious, PFE {:.3} %) over horizon {:.4}",
            meta.n_events, meta.n_true, meta.n_spurious, meta.realized_pfe, meta.horizon
        );
    }
    Ok(())
}

fn write_actors(path: &Path, actors: &ActorTable) -> Result<(), Failure> {
    let mut w = csv_writer(path)?;
    let cont: Vec<&str> = actors.continuous_names().collect();
    let cat: Vec<&str> = actors.categorical_names().collect();
    let mut header = vec!["actor"];
    header.extend(&cont);
    header.extend(&cat);
    w.write_record(&header).map_err(csv_fail(path))?;
    for (i, id) in actors.ids().iter().enumerate() {
        let mut rec = vec![id.clone()];
        for c in &cont {
            rec.push(actors.continuous(c).expect("listed column")[i].to_string());
        }
        for c in &cat {
            let col = actors.categorical(c).expect("listed column");
            rec.push(col.levels[col.codes[i] as usize].clone());
        }
        w.write_record(&rec).map_err(csv_fail(path))?;
    }
    w.flush().map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))
}

pub fn study(
    mut cfg: RunConfig,
    seed_flag: Option<u64>,
    block: StudyBlock,
    out: &Path,
    quiet: bool,
) -> Result<(), Failure> {
    cfg.check_command(Command::Study)?;
    let seed = cfg.resolve_seed(seed_flag);
    let mut sc = StudyConfig::new(block.dg, block.scale, seed);
    if let Some(r) = block.reps {
        sc.reps = r;
    }
    sc.chain = cfg.chain;
    sc.fit = cfg.fit;
    create_out(out)?;
    info!(
        "{}: {} replications, n = {}, {} true events",
        block.dg.label(),
        sc.reps,
        sc.n_actors,
        sc.true_events
    );
    let res = run_study(&sc)?;
    write_file(&out.join("table1.csv"), &table_csv(&res))?;
    let md = table_markdown(&res);
    write_file(&out.join("table1.md"), &md)?;
    write_json(&out.join("study.json"), &res)?;
    if !quiet {
        print!("{md}");
    }
    Ok(())
}
