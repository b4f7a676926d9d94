//! `detect`: run ATDC or FastATDC over a dataset file.

use fastatdc::pipeline::{run_atdc, run_fastatdc, write_run};
use crate::common::{load, CliError, Ctx};
use crate::{DetectArgs, MethodArg};

pub fn run(args: &DetectArgs, ctx: &Ctx) -> Result<(), CliError> {
    let ds = load(&args.input)?;
    let cfg = args.scoring.config(args.r1, args.r2, ctx.seed)?;
    let result = match args.method {
        MethodArg::Atdc => run_atdc(&ds, &cfg)?,
        MethodArg::Fastatdc => run_fastatdc(&ds, &cfg)?,
    };
    eprintln!(
        "{}: {} trajectories, {} ANT, {:.3}s ({:.4}s per 100)",
        result.method,
        result.records.len(),
        result.ant_ids.len(),
        result.timings.total_seconds,
        result.timings.seconds_per_100_trajectories
    );
    write_run(&result, ctx.writer()?)?;
    Ok(())
}
