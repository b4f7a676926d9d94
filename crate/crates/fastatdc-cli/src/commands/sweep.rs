//! `sweep`: metrics across a sampling-rate grid, one CSV row per cell.

use fastatdc::eval::evaluate;
use fastatdc::pipeline::run_fastatdc;
use fastatdc::trajdata::{ClassLabel, Dataset};
use fastatdc::MetricsReport64;

use crate::common::{load, parse_f64_list, parse_u64_list, CliError, Ctx};
use crate::{StageArg, SweepArgs};

/// The canonical rate grids swept in the benchmarks.
const STAGE1_RATES: [f64; 8] = [0.004, 0.01, 0.05, 0.10, 0.20, 0.30, 0.50, 1.0];
const STAGE2_RATES: [f64; 8] = [0.01, 0.05, 0.10, 0.20, 0.30, 0.50, 0.70, 1.0];

const CSV_HEADER: &str = "rate,seed,rep,f1_gd,f1_ld,f1_nt,f1_ls,f1_gs,macro_f1_anomaly,stage1_seconds,stage2_seconds,total_seconds,error";

/// Everything one sweep executes.
pub struct SweepSpec {
    pub rates: Vec<f64>,
    pub stage: StageArg,
    pub fixed_r1: f64,
    pub fixed_r2: f64,
    pub seeds: Vec<u64>,
    pub reps: usize,
}

impl SweepSpec {
    pub fn from_args(args: &SweepArgs) -> Result<Self, CliError> {
        let rates = match &args.rates {
            Some(raw) => parse_f64_list(raw).map_err(CliError::Usage)?,
            None => match args.stage {
                StageArg::Stage1 => STAGE1_RATES.to_vec(),
                StageArg::Both => STAGE2_RATES.to_vec(),
            },
        };
        let seeds = parse_u64_list(&args.seeds).map_err(CliError::Usage)?;
        let spec = SweepSpec {
            rates,
            stage: args.stage,
            fixed_r1: args.fixed_r1,
            fixed_r2: args.fixed_r2,
            seeds,
            reps: args.reps.max(1),
        };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.rates.is_empty() {
            return Err(CliError::Usage("rates must be non-empty".into()));
        }
        if let Some(bad) = self.rates.iter().find(|r| !(**r > 0.0 && **r <= 1.0)) {
            return Err(CliError::Usage(format!("rate {bad} outside (0, 1]")));
        }
        if self.seeds.is_empty() {
            return Err(CliError::Usage("seeds must be non-empty".into()));
        }
        Ok(())
    }

    fn rates_for(&self, rate: f64) -> (f64, f64) {
        match self.stage {
            StageArg::Stage1 => (rate, self.fixed_r2),
            StageArg::Both => (self.fixed_r1, rate),
        }
    }
}

pub fn run(args: &SweepArgs, ctx: &Ctx) -> Result<(), CliError> {
    let ds = load(&args.dataset)?;
    let truth: Vec<ClassLabel> = ds
        .labels()
        .map_err(|id| CliError::Data(format!("trajectory {id} has no label")))?;
    let spec = SweepSpec::from_args(args)?;

    let mut w = csv::Writer::from_writer(ctx.writer()?);
    w.write_record(CSV_HEADER.split(','))?;
    for &rate in &spec.rates {
        let (r1, r2) = spec.rates_for(rate);
        let cfg = args.scoring.config(r1, r2, 0)?;
        for &seed in &spec.seeds {
            for rep in 0..spec.reps {
                let row = run_cell(&ds, &cfg.with_seed(seed), &truth);
                let mut record = vec![rate.to_string(), seed.to_string(), rep.to_string()];
                match row {
                    Ok((report, timings)) => {
                        record.extend(report.f1_per_class.iter().map(|v| v.to_string()));
                        record.push(report.macro_f1_anomaly.to_string());
                        record.push(timings.0.to_string());
                        record.push(timings.1.to_string());
                        record.push(timings.2.to_string());
                        record.push(String::new());
                    }
                    Err(tag) => {
                        record.extend(std::iter::repeat_with(String::new).take(9));
                        record.push(tag);
                    }
                }
                w.write_record(&record)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

type CellOutcome = Result<(MetricsReport64, (f64, f64, f64)), String>;

/// Failed cells carry an error tag; the sweep continues.
fn run_cell(ds: &Dataset, cfg: &fastatdc::DetectionConfig64, truth: &[ClassLabel]) -> CellOutcome {
    let result = run_fastatdc(ds, cfg).map_err(|e| error_tag(&e))?;
    let pred: Vec<ClassLabel> = result.records.iter().map(|r| r.predicted).collect();
    let report = evaluate(truth, &pred).map_err(|e| e.to_string())?;
    let t = result.timings;
    Ok((
        report,
        (t.stage1_seconds, t.stage2_seconds, t.total_seconds),
    ))
}

fn error_tag(err: &fastatdc::pipeline::PipelineError) -> String {
    use fastatdc::pipeline::PipelineError::*;
    match err {
        EmptyAnt { .. } => "EmptyAnt".to_string(),
        DatasetTooSmall { .. } => "DatasetTooSmall".to_string(),
        BadSampleCount { .. } => "BadSampleCount".to_string(),
    }
}
