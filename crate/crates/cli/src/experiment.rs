//! Optimal versus index policy over a seeded ensemble and a grid of
//! switching costs.
//!
//! Each (model, kappa) cell charges a switching delay of `kappa` times the
//! model's mean handover sojourn, solves the optimum on the augmented
//! product and evaluates the index policy exactly. Cells run in parallel;
//! records are sorted by `(model_id, kappa)` before anything is written.
//!
//! Aggregation: for each model the minimum, median and maximum deviation
//! over the kappa grid, then percentiles of each aggregate across models.
//! Optionally also percentiles over all cells (`cell`).

use rayon::prelude::*;

use ratiobandit::bandit::{compare_policies, DeviationRecord};
use ratiobandit::modelgen::{generate_model, switch_delay_for, EnsembleSpec};

use crate::csv;
use crate::error::{CliError, CliResult};

pub const DEFAULT_PERCENTILES: [f64; 3] = [0.0, 50.0, 100.0];

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub spec: EnsembleSpec,
    pub cap: usize,
}

pub fn run(config: &ExperimentConfig) -> CliResult<Vec<DeviationRecord>> {
    let spec = &config.spec;
    spec.validate()?;
    let models = (0..spec.count)
        .into_par_iter()
        .map(|k| generate_model(spec, k))
        .collect::<Result<Vec<_>, _>>()?;
    let cells: Vec<(usize, f64)> = (0..spec.count)
        .flat_map(|k| spec.switch_cost_grid.iter().map(move |&kappa| (k, kappa)))
        .collect();
    let results: Vec<_> = cells
        .into_par_iter()
        .map(|(k, kappa)| {
            let model = &models[k];
            switch_delay_for(model, kappa)
                .and_then(|delay| model.with_switch_delay(delay))
                .and_then(|m| compare_policies(&m, k, kappa, config.cap))
                .map_err(|e| (k, kappa, e))
        })
        .collect();
    // Report the first failing cell in grid order, whatever the scheduling.
    let mut records = Vec::with_capacity(results.len());
    for r in results {
        match r {
            Ok(rec) => records.push(rec),
            Err((k, kappa, e)) => return Err(CliError::Failure(format!("model {k} (kappa {kappa}): {e}"))),
        }
    }
    records.sort_by(|a, b| a.model_id.cmp(&b.model_id).then(a.kappa.total_cmp(&b.kappa)));
    Ok(records)
}

pub fn records_csv(records: &[DeviationRecord]) -> String {
    let mut out = String::new();
    csv::push_row(&mut out, &["model_id", "kappa", "r_opt", "r_index", "deviation"]);
    for r in records {
        csv::push_row(
            &mut out,
            &[r.model_id.to_string(), csv::num(r.kappa), csv::num(r.r_opt), csv::num(r.r_index), csv::num(r.deviation)],
        );
    }
    out
}

/// Percentile `p` (0–100) of sorted data, linear interpolation between
/// closest ranks.
pub fn percentile(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "percentile of no data");
    let pos = p / 100.0 * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let w = pos - lo as f64;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + w * (sorted[hi] - sorted[lo])
    }
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

/// Per-model `(min, median, max)` deviation over the kappa grid, by model id.
pub fn per_model(records: &[DeviationRecord]) -> Vec<(usize, [f64; 3])> {
    let mut out = Vec::new();
    let mut start = 0;
    while start < records.len() {
        let id = records[start].model_id;
        let end = records[start..].iter().position(|r| r.model_id != id).map_or(records.len(), |k| start + k);
        let devs = sorted(records[start..end].iter().map(|r| r.deviation).collect());
        out.push((id, [devs[0], percentile(&devs, 50.0), devs[devs.len() - 1]]));
        start = end;
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct PercentileRow {
    pub aggregate: &'static str,
    pub percentile: f64,
    pub deviation: f64,
}

pub fn percentiles(records: &[DeviationRecord], ps: &[f64], flat: bool) -> Vec<PercentileRow> {
    let mut rows = Vec::new();
    if records.is_empty() {
        return rows;
    }
    let models = per_model(records);
    for (a, name) in ["min", "median", "max"].into_iter().enumerate() {
        let values = sorted(models.iter().map(|(_, agg)| agg[a]).collect());
        rows.extend(ps.iter().map(|&p| PercentileRow { aggregate: name, percentile: p, deviation: percentile(&values, p) }));
    }
    if flat {
        let values = sorted(records.iter().map(|r| r.deviation).collect());
        rows.extend(ps.iter().map(|&p| PercentileRow { aggregate: "cell", percentile: p, deviation: percentile(&values, p) }));
    }
    rows
}

pub fn percentiles_csv(rows: &[PercentileRow]) -> String {
    let mut out = String::new();
    csv::push_row(&mut out, &["kappa_aggregate", "percentile", "deviation"]);
    for r in rows {
        csv::push_row(&mut out, &[r.aggregate.to_string(), csv::num(r.percentile), csv::num(r.deviation)]);
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub cells: usize,
    pub models: usize,
    pub max_deviation: f64,
    pub min_deviation: f64,
    pub median_of_model_max: f64,
    pub max_abs_at_zero_kappa: Option<f64>,
    pub dominance_violations: usize,
}

pub fn summarize(records: &[DeviationRecord]) -> Summary {
    let models = per_model(records);
    let maxes = sorted(models.iter().map(|(_, a)| a[2]).collect());
    let zero: Vec<f64> = records.iter().filter(|r| r.kappa == 0.0).map(|r| r.deviation.abs()).collect();
    Summary {
        cells: records.len(),
        models: models.len(),
        max_deviation: records.iter().map(|r| r.deviation).fold(f64::NEG_INFINITY, f64::max),
        min_deviation: records.iter().map(|r| r.deviation).fold(f64::INFINITY, f64::min),
        median_of_model_max: if maxes.is_empty() { f64::NAN } else { percentile(&maxes, 50.0) },
        max_abs_at_zero_kappa: (!zero.is_empty()).then(|| zero.iter().copied().fold(0.0, f64::max)),
        dominance_violations: records.iter().filter(|r| r.r_opt < r.r_index - 1e-9).count(),
    }
}

pub fn render_summary(s: &Summary) -> String {
    let mut out = format!(
        "cells: {}\nmodels: {}\nmax deviation: {}\nmin deviation: {}\nmedian of per-model max deviation: {}\n",
        s.cells, s.models, s.max_deviation, s.min_deviation, s.median_of_model_max
    );
    if let Some(z) = s.max_abs_at_zero_kappa {
        out.push_str(&format!("max |deviation| at kappa 0: {z}\n"));
    }
    out.push_str(&format!("dominance violations: {}\n", s.dominance_violations));
    out
}

/// Gnuplot script plotting per-model maximum deviation against kappa and
/// the percentile table.
pub fn gnuplot_script(records_file: &str, percentiles_file: &str) -> String {
    format!(
        "set datafile separator ','\n\
         set key autotitle columnhead\n\
         set terminal pngcairo size 900,600\n\
         set output 'deviation.png'\n\
         set xlabel 'switching cost (fraction of mean handover sojourn)'\n\
         set ylabel 'relative deviation'\n\
         plot '{records_file}' using 2:5 with points pointtype 7 pointsize 0.5 title 'cells'\n\
         set output 'percentiles.png'\n\
         set style data histograms\n\
         set xlabel 'aggregate / percentile'\n\
         plot '{percentiles_file}' using 3:xticlabels(stringcolumn(1).' '.stringcolumn(2)) title 'deviation'\n"
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(model_id: usize, kappa: f64, deviation: f64) -> DeviationRecord {
        DeviationRecord { model_id, kappa, r_opt: 1.0, r_index: 1.0 - deviation, deviation }
    }

    #[test]
    fn percentile_interpolates() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(percentile(&v, 0.0), 1.0);
        assert_eq!(percentile(&v, 100.0), 4.0);
        assert_eq!(percentile(&v, 50.0), 2.5);
        assert_eq!(percentile(&[7.0], 50.0), 7.0);
    }

    #[test]
    fn aggregates_per_model_then_across() {
        let records = vec![
            rec(0, 0.0, 0.0),
            rec(0, 0.5, 0.1),
            rec(0, 1.0, 0.3),
            rec(1, 0.0, 0.0),
            rec(1, 0.5, 0.0),
            rec(1, 1.0, 0.1),
        ];
        assert_eq!(per_model(&records), vec![(0, [0.0, 0.1, 0.3]), (1, [0.0, 0.0, 0.1])]);
        let rows = percentiles(&records, &DEFAULT_PERCENTILES, false);
        assert_eq!(rows.len(), 9);
        let max_median = rows.iter().find(|r| r.aggregate == "max" && r.percentile == 50.0).unwrap();
        assert!((max_median.deviation - 0.2).abs() < 1e-15);
        let flat = percentiles(&records, &[100.0], true);
        assert_eq!(flat.last().unwrap(), &PercentileRow { aggregate: "cell", percentile: 100.0, deviation: 0.3 });
        let text = percentiles_csv(&flat);
        assert!(text.starts_with("kappa_aggregate,percentile,deviation\nmin,100,0\n"));
    }

    #[test]
    fn single_cell_run() {
        let mut spec = EnsembleSpec::new(1, 1, 4, 2);
        spec.switch_cost_grid = vec![0.5];
        let records = run(&ExperimentConfig { spec, cap: 10_000 }).unwrap();
        assert_eq!(records.len(), 1);
        assert_eq!(records_csv(&records).lines().count(), 2);
    }

    #[test]
    fn cap_failure_names_model() {
        let mut spec = EnsembleSpec::new(1, 2, 4, 2);
        spec.switch_cost_grid = vec![0.5];
        let err = run(&ExperimentConfig { spec, cap: 20 }).unwrap_err();
        assert_eq!(err.exit_code(), 1);
        assert!(err.to_string().starts_with("model 0 (kappa 0.5): joint state space"), "{err}");
    }
}
