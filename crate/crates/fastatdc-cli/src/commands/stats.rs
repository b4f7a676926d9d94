//! `stats`: per-class stage-1 score statistics and the mean-ordering check.

use fastatdc::diagnostics::{class_score_statistics, ordering_check};
use fastatdc::pipeline::stage1_scores;
use fastatdc::scoring::Theta;
use fastatdc::{ClassStats64, DetectionConfig64};

use crate::common::{load, CliError, Ctx};
use crate::{S1Mode, StatsArgs};

pub fn run(args: &StatsArgs, ctx: &Ctx) -> Result<(), CliError> {
    let ds = load(&args.dataset)?;
    let r1 = match args.s1_mode {
        S1Mode::Full => 1.0,
        S1Mode::Sampled => args.r1,
    };
    let cfg = DetectionConfig64::new(10, args.phi, Theta::standard(), r1, 1.0, ctx.seed)?;
    let s1 = stage1_scores(&ds, &cfg)?;
    let stats = class_score_statistics(&ds, &s1).map_err(|e| CliError::Data(e.to_string()))?;

    let mut w = csv::Writer::from_writer(ctx.writer()?);
    w.write_record(ClassStats64::CSV_HEADER.split(','))?;
    for row in &stats {
        w.write_record(row.csv_record())?;
    }
    w.flush()?;

    match ordering_check(&stats, args.phi) {
        Ok(report) => {
            eprintln!(
                "ordering check: {} ({report})",
                if report.pass() { "PASS" } else { "FAIL" }
            );
        }
        Err(missing) => eprintln!("ordering check: skipped — {missing}"),
    }
    Ok(())
}
