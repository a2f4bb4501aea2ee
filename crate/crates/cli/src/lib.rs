//! Command-line front end for `ratiobandit`: model files, index tables,
//! parameter sweeps, ensemble experiments and Monte Carlo checks.

pub mod args;
pub mod csv;
pub mod error;
pub mod experiment;
pub mod grid;
pub mod indices;
pub mod modelfile;
pub mod simulate;
pub mod sweep;

use std::fs;
use std::io::Write;
use std::path::Path;

use ratiobandit::gittins::IndexMethod;
use ratiobandit::modelgen::{generate_model, switch_delay_for, EnsembleSpec};

use args::{Cli, Command, EnsembleArgs, MethodArg, OutArg, PolicyArg};
pub use error::{CliError, CliResult};
use experiment::ExperimentConfig;
use modelfile::ModelFile;
use simulate::PolicyChoice;
use sweep::SweepSpec;

pub fn run(cli: Cli) -> CliResult<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n as usize)
            .build_global()
            .map_err(|e| CliError::Failure(format!("cannot start thread pool: {e}")))?;
    }
    match cli.command {
        Command::Validate { model } => validate(&model),
        Command::Indices { model, method, arm, check_consistency, precision, out } => {
            let file = ModelFile::load(&model)?;
            let k = pick_arm(&file, arm.as_deref())?;
            let arm = file.arm(k)?;
            let method = match method {
                MethodArg::Elimination => IndexMethod::Elimination,
                MethodArg::Restart => IndexMethod::Restart,
            };
            let rows = indices::compute(&arm, method)?;
            emit(&out, &indices::render(&rows, precision))?;
            if check_consistency {
                let gap = indices::max_method_gap(&arm)?;
                if gap <= 1e-8 {
                    eprintln!("max |Δ| = {gap:e} ≤ 1e-8");
                } else {
                    return Err(CliError::Failure(format!("max |Δ| = {gap:e} exceeds 1e-8")));
                }
            }
            Ok(())
        }
        Command::Sweep { model, arm, state, against, r_grid, d_grid, out } => {
            let file = ModelFile::load(&model)?;
            let k = pick_arm(&file, arm.as_deref())?;
            let chain = file.arm(k)?.active_source().clone();
            let spec = SweepSpec {
                state,
                against,
                r_values: r_grid.log().map_err(CliError::Usage)?,
                d_values: d_grid.log().map_err(CliError::Usage)?,
            };
            let points = sweep::run(&chain, &spec)?;
            emit(&out, &sweep::render(&points, &spec))?;
            let region = sweep::handover_region(&points, spec.r_values.len(), spec.d_values.len());
            eprintln!(
                "ratio > 1 in {} of {} cells ({} connected region(s))",
                region.cells,
                points.len(),
                region.components
            );
            Ok(())
        }
        Command::Experiment { ensemble, percentiles, flat_percentiles, out_dir, gnuplot, cap } => {
            if let Some(p) = percentiles.iter().find(|p| !(0.0..=100.0).contains(*p)) {
                return Err(CliError::Usage(format!("percentile {p} outside [0, 100]")));
            }
            let spec = ensemble_spec(&ensemble)?;
            let config = ExperimentConfig { spec, cap };
            let records = experiment::run(&config)?;
            fs::create_dir_all(&out_dir)?;
            fs::write(out_dir.join("records.csv"), experiment::records_csv(&records))?;
            let rows = experiment::percentiles(&records, &percentiles, flat_percentiles);
            fs::write(out_dir.join("percentiles.csv"), experiment::percentiles_csv(&rows))?;
            let mut spec_json = serde_json::to_string_pretty(&config.spec).expect("spec serializes");
            spec_json.push('\n');
            fs::write(out_dir.join("spec.json"), spec_json)?;
            if gnuplot {
                fs::write(out_dir.join("plot.gp"), experiment::gnuplot_script("records.csv", "percentiles.csv"))?;
            }
            print!("{}", experiment::render_summary(&experiment::summarize(&records)));
            Ok(())
        }
        Command::Simulate { model, policy, runs, seed, cap } => {
            let model = ModelFile::load(&model)?.to_model()?;
            let policy = match policy {
                PolicyArg::Index => PolicyChoice::Index,
                PolicyArg::Optimal => PolicyChoice::Optimal,
            };
            let report = simulate::run(&model, policy, runs as usize, seed, cap)?;
            print!("{}", simulate::render(&report));
            Ok(())
        }
        Command::Generate { ensemble, index, kappa, out } => {
            let spec = ensemble_spec(&ensemble)?;
            let model = generate_model(&spec, index)?;
            let model = model.with_switch_delay(switch_delay_for(&model, kappa)?)?;
            emit(&out, &ModelFile::from_model(&model).to_json())
        }
    }
}

fn validate(path: &Path) -> CliResult<()> {
    let file = ModelFile::load(path)?;
    let mut failed = false;
    let mut text = String::new();
    for (what, report) in file.validate() {
        if report.is_ok() {
            text.push_str(&format!("{what}: ok\n"));
        }
        for v in &report.violations {
            failed = true;
            text.push_str(&format!("{what}: {v}\n"));
        }
    }
    print!("{text}");
    if failed {
        return Err(CliError::Failure("model is invalid".into()));
    }
    file.to_model()?;
    Ok(())
}

fn pick_arm(file: &ModelFile, key: Option<&str>) -> CliResult<usize> {
    match key {
        None => Ok(0),
        Some(k) => file
            .arm_index(k)
            .ok_or_else(|| CliError::Usage(format!("no arm named or numbered '{k}'"))),
    }
}

fn ensemble_spec(args: &EnsembleArgs) -> CliResult<EnsembleSpec> {
    let spec = match &args.spec {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("malformed ensemble spec: {e}")))?
        }
        None => {
            let mut spec = EnsembleSpec::new(args.seed, args.models, args.states, args.arms);
            if let Some(g) = &args.kappa_grid {
                spec.switch_cost_grid = g.linear();
            }
            spec
        }
    };
    spec.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(spec)
}

fn emit(out: &OutArg, text: &str) -> CliResult<()> {
    match &out.out {
        Some(path) => fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}
