//! `eval`: score a run file against ground-truth labels.

use std::collections::HashMap;
use std::fs::File;

use serde::Serialize;

use fastatdc::eval::evaluate;
use fastatdc::pipeline::read_run;
use fastatdc::trajdata::ClassLabel;
use fastatdc::{MetricsReport64, RunFile64};

use crate::common::{load, CliError, Ctx};
use crate::EvalArgs;

#[derive(Serialize)]
struct MetricsDocument<'a> {
    dataset: &'a str,
    method: &'a str,
    n: usize,
    seconds_per_100_trajectories: f64,
    #[serde(flatten)]
    report: &'a MetricsReport64,
}

pub fn run(args: &EvalArgs, ctx: &Ctx) -> Result<(), CliError> {
    let ds = load(&args.dataset)?;
    let file = File::open(&args.run)
        .map_err(|e| CliError::Data(format!("{}: {e}", args.run.display())))?;
    let run: RunFile64 = read_run(file)?;

    let truth_by_id: HashMap<u64, ClassLabel> = ds
        .iter()
        .map(|t| {
            t.label()
                .map(|l| (t.id(), l))
                .ok_or_else(|| CliError::Data(format!("trajectory {} has no label", t.id())))
        })
        .collect::<Result<_, _>>()?;
    let pred_by_id: HashMap<u64, ClassLabel> = run
        .records
        .iter()
        .map(|r| (r.trajectory_id, r.predicted))
        .collect();

    // Pair up in dataset order; name the first id missing on either side.
    let mut truth = Vec::with_capacity(ds.n());
    let mut pred = Vec::with_capacity(ds.n());
    for t in &ds {
        let p = pred_by_id.get(&t.id()).ok_or_else(|| {
            CliError::Data(format!("run file has no record for trajectory {}", t.id()))
        })?;
        truth.push(truth_by_id[&t.id()]);
        pred.push(*p);
    }
    if let Some(record) = run
        .records
        .iter()
        .find(|r| !truth_by_id.contains_key(&r.trajectory_id))
    {
        return Err(CliError::Data(format!(
            "run file records trajectory {} absent from the dataset",
            record.trajectory_id
        )));
    }

    let report: MetricsReport64 =
        evaluate(&truth, &pred).map_err(|e| CliError::Data(e.to_string()))?;

    let dataset_name = if run.summary.dataset.is_empty() {
        ds.name().to_string()
    } else {
        run.summary.dataset.clone()
    };
    let seconds_per_100 = run.summary.timings.seconds_per_100_trajectories;
    let mut out = ctx.writer()?;
    if ctx.csv {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(MetricsReport64::CSV_HEADER.split(','))?;
        w.write_record(report.csv_record(
            &dataset_name,
            run.summary.method.name(),
            seconds_per_100,
        ))?;
        w.flush()?;
    } else {
        let doc = MetricsDocument {
            dataset: &dataset_name,
            method: run.summary.method.name(),
            n: truth.len(),
            seconds_per_100_trajectories: seconds_per_100,
            report: &report,
        };
        serde_json::to_writer_pretty(&mut out, &doc).map_err(|e| CliError::Data(e.to_string()))?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
