//! `bench`: wall-clock comparison of ATDC vs FastATDC per dataset.

use fastatdc::pipeline::{run_atdc, run_fastatdc, Method};
use crate::common::{dataset_label, load, median, CliError, Ctx};
use crate::BenchArgs;

const CSV_HEADER: &str = "dataset,method,seconds_per_100,speedup";

pub fn run(args: &BenchArgs, ctx: &Ctx) -> Result<(), CliError> {
    let reps = args.reps.max(1);
    let mut w = csv::Writer::from_writer(ctx.writer()?);
    w.write_record(CSV_HEADER.split(','))?;
    for path in &args.datasets {
        let ds = load(path)?;
        let label = dataset_label(ds.name(), path);
        let cfg = args.scoring.config(args.r1, args.r2, ctx.seed)?;

        let mut medians = [0.0f64; 2];
        for (idx, method) in [Method::Atdc, Method::FastAtdc].into_iter().enumerate() {
            let mut times = Vec::with_capacity(reps);
            for _ in 0..reps {
                let result = match method {
                    Method::Atdc => run_atdc(&ds, &cfg)?,
                    Method::FastAtdc => run_fastatdc(&ds, &cfg)?,
                };
                times.push(result.timings.seconds_per_100_trajectories);
            }
            medians[idx] = median(times);
        }
        let speedup = medians[0] / medians[1];
        for (idx, method) in [Method::Atdc, Method::FastAtdc].into_iter().enumerate() {
            w.write_record([
                label.as_str(),
                method.name(),
                &medians[idx].to_string(),
                &speedup.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
