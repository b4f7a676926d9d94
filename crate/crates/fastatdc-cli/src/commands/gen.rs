//! `gen`: synthesize a labeled dataset and print its class counts.

use fastatdc::trajdata::{generate, write_dataset, ClassLabel, GeneratorSpec};

use crate::common::{CliError, Ctx};
use crate::GenArgs;

pub fn run(args: &GenArgs, ctx: &Ctx) -> Result<(), CliError> {
    let mut spec = match args.preset {
        Some(preset) => GeneratorSpec::preset(preset, ctx.seed),
        None => GeneratorSpec {
            seed: ctx.seed,
            ..GeneratorSpec::default()
        },
    };
    if let Some(n) = args.n {
        spec.n = n;
    }
    if let Some(probs) = &args.probs {
        spec.probs = probs.0;
    }
    if let Some(w) = args.grid_w {
        spec.grid_w = w;
    }
    if let Some(h) = args.grid_h {
        spec.grid_h = h;
    }
    if let Some(len) = args.route_len {
        spec.route_len = len;
    }
    if let Some(f) = args.detour_frac {
        spec.detour_frac = f;
    }
    if let Some(f) = args.shortcut_frac {
        spec.shortcut_frac = f;
    }

    let mut ds = generate(&spec)?;
    if let Some(preset) = args.preset {
        ds.set_name(preset.name());
    }

    let counts = ds.class_counts();
    let summary: Vec<String> = ClassLabel::ALL
        .iter()
        .map(|c| format!("{} {}", c.name(), counts[c.code() as usize]))
        .collect();
    eprintln!("generated {} trajectories: {}", ds.n(), summary.join(", "));

    write_dataset(&ds, ctx.writer()?)?;
    Ok(())
}
