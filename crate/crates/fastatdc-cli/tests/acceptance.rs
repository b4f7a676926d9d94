//! Acceptance suite: eight go/no-go checks covering oracle equivalence,
//! metric arithmetic against the published table, score-ordering structure,
//! sampling robustness and degradation, speedup, determinism, and classifier
//! boundary conformance. Each test prints one pass/fail line (visible with
//! `cargo test --test acceptance -- --nocapture`).

use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fastatdc::diagnostics::class_score_statistics;
use fastatdc::eval::{evaluate, f1_scores, Confusion};
use fastatdc::pipeline::{run_atdc, run_fastatdc, stage1_scores, PipelineError};
use fastatdc::scoring::{classify, dis, intersection_size, DetectionConfig, Theta};
use fastatdc::trajdata::{
    generate, CellId, ClassLabel, Dataset, DatasetPreset, GeneratorSpec, Trajectory,
};
use fastatdc::{DetectionConfig64, MetricsReport64};

fn default_cfg() -> DetectionConfig64 {
    DetectionConfig::default()
}

fn full_cfg(seed: u64) -> DetectionConfig64 {
    default_cfg().with_rates(1.0, 1.0).unwrap().with_seed(seed)
}

fn preset_dataset(preset: DatasetPreset, seed: u64) -> Dataset {
    generate(&GeneratorSpec::preset(preset, seed)).unwrap()
}

fn macro_f1(ds: &Dataset, cfg: &DetectionConfig64) -> Result<f64, PipelineError> {
    let result = run_fastatdc(ds, cfg)?;
    let truth: Vec<ClassLabel> = ds.labels().unwrap();
    let pred: Vec<ClassLabel> = result.records.iter().map(|r| r.predicted).collect();
    let report: MetricsReport64 = evaluate(&truth, &pred).unwrap();
    Ok(report.macro_f1_anomaly)
}

fn median(mut values: Vec<f64>) -> f64 {
    assert!(!values.is_empty());
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    values[values.len() / 2]
}

/// Criterion 1: at full sampling rates FastATDC is bit-identical to ATDC on
/// 50 random datasets, and the pipeline's full stage-1 scores match an
/// independent naive evaluation of the ratio-of-sums score within 1e-12
/// relative. Budget: 30 s.
#[test]
fn acceptance_1_oracle_equivalence() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE);
    for case in 0..50u64 {
        let n = rng.random_range(10..=200);
        let ds = random_dataset(&mut rng, case, n);
        let cfg = full_cfg(case);

        let scores = stage1_scores(&ds, &cfg).unwrap();
        let oracle = naive_stage1(&ds);
        for ((_, s), o) in scores.iter().zip(&oracle) {
            match o {
                None => assert!(!s.is_finite()),
                Some(o) if *o == 0.0 => assert_eq!(*s, 0.0),
                Some(o) => assert!(((s - o) / o).abs() < 1e-12, "case {case}: {s} vs {o}"),
            }
        }

        match (run_fastatdc(&ds, &cfg), run_atdc(&ds, &cfg)) {
            (Ok(fast), Ok(slow)) => {
                for (a, b) in fast.records.iter().zip(&slow.records) {
                    assert_eq!(a.score.to_bits(), b.score.to_bits());
                    assert_eq!(a.predicted, b.predicted);
                    assert_eq!(a.is_ant, b.is_ant);
                }
            }
            // Random data can leave the ANT interval empty; both runners must
            // then fail identically.
            (Err(PipelineError::EmptyAnt { .. }), Err(PipelineError::EmptyAnt { .. })) => {}
            (fast, slow) => panic!(
                "case {case}: divergent outcomes {:?} vs {:?}",
                fast.map(|_| ()),
                slow.map(|_| ())
            ),
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 30.0, "criterion 1 took {elapsed:.1}s (budget 30s)");
    println!("criterion 1 PASS: oracle equivalence on 50 datasets in {elapsed:.1}s");
}

fn random_dataset(rng: &mut ChaCha8Rng, case: u64, n: usize) -> Dataset {
    let trajectories = (0..n as u64)
        .map(|id| {
            let len = rng.random_range(2..=12);
            let mut cells: Vec<u32> = (0u32..24).collect();
            for i in 0..len {
                let j = rng.random_range(i..24);
                cells.swap(i, j);
            }
            cells.truncate(len);
            Trajectory::new(id, cells.into_iter().map(CellId::new).collect(), None).unwrap()
        })
        .collect();
    Dataset::new(6, 4, format!("rand-{case}"), trajectories).unwrap()
}

/// Independent route: per-reference loops with membership tests, no shared
/// code with the pipeline. `None` where the score is undefined.
fn naive_stage1(ds: &Dataset) -> Vec<Option<f64>> {
    ds.iter()
        .map(|i| {
            let mut num = 0.0f64;
            let mut den = 0.0f64;
            for j in ds {
                if j.id() == i.id() {
                    continue;
                }
                num += i.len() as f64 - j.len() as f64;
                den += i
                    .cells()
                    .iter()
                    .filter(|c| j.cells().contains(c))
                    .count() as f64;
            }
            (den > 0.0).then(|| num / den)
        })
        .collect()
}

/// Published per-class F1 rows (GD, LD, LS, GS, Macro-F1), two methods per
/// dataset.
const TABLE_ROWS: [(&str, [f64; 4], f64); 12] = [
    ("T-1 ATDC", [0.9677, 0.8095, 0.8, 1.0], 0.8943),
    ("T-1 FastATDC", [0.9677, 0.8026, 0.8488, 0.9179], 0.8842),
    ("T-2 ATDC", [1.0, 0.8571, 0.7778, 1.0], 0.9087),
    ("T-2 FastATDC", [1.0, 0.8476, 0.7326, 1.0], 0.8951),
    ("T-3 ATDC", [1.0, 0.8, 0.8554, 0.8889], 0.8861),
    ("T-3 FastATDC", [1.0, 0.7378, 0.8888, 0.8472], 0.8685),
    ("T-4 ATDC", [1.0, 0.8333, 0.7857, 1.0], 0.9048),
    ("T-4 FastATDC", [1.0, 0.7665, 0.8230, 1.0], 0.8974),
    ("T-5 ATDC", [1.0, 0.7473, 0.9706, 0.9296], 0.9086),
    ("T-5 FastATDC", [0.9816, 0.7665, 0.9207, 0.9292], 0.8995),
    ("T-6 ATDC", [0.9767, 0.8767, 0.9144, 0.9411], 0.9273),
    ("T-6 FastATDC", [0.9634, 0.8627, 0.8926, 0.8924], 0.9028),
];

/// Criterion 2: synthetic confusion matrices whose anomaly-class F1s equal
/// each published row reproduce the printed Macro-F1 within 5e-4 — for the
/// 11 rows whose printed figures are arithmetically self-consistent. The
/// T-5/ATDC row prints 0.9086 while its own per-class values average
/// 0.911875; no implementation can bridge that, so for it we assert the
/// correct mean and flag the source discrepancy.
#[test]
fn acceptance_2_macro_f1_anchor() {
    let mut inconsistent_rows = Vec::new();
    for (label, per_class, printed_macro) in TABLE_ROWS {
        let confusion = confusion_with_f1s(&per_class);
        let breakdown = f1_scores::<f64>(&confusion);
        // The construction hits each target F1 exactly.
        let achieved = [
            breakdown.per_class[0],
            breakdown.per_class[1],
            breakdown.per_class[3],
            breakdown.per_class[4],
        ];
        for (a, t) in achieved.iter().zip(&per_class) {
            assert!((a - t).abs() < 1e-12, "{label}: built F1 {a} for target {t}");
        }
        let mean_of_printed: f64 = per_class.iter().sum::<f64>() / 4.0;
        assert!(
            (breakdown.macro_f1_anomaly - mean_of_printed).abs() < 1e-12,
            "{label}: macro {} vs mean {mean_of_printed}",
            breakdown.macro_f1_anomaly
        );
        let delta = (breakdown.macro_f1_anomaly - printed_macro).abs();
        let row_self_consistent = (mean_of_printed - printed_macro).abs() <= 5e-4;
        if row_self_consistent {
            assert!(delta <= 5e-4, "{label}: |{delta}| > 5e-4");
        } else {
            inconsistent_rows.push((label, mean_of_printed, printed_macro, delta));
            assert!(delta > 5e-4, "{label} unexpectedly became consistent");
        }
    }
    assert_eq!(
        inconsistent_rows.len(),
        1,
        "exactly the T-5 ATDC row is known to be self-inconsistent"
    );
    let (label, mean, printed, delta) = inconsistent_rows[0];
    assert_eq!(label, "T-5 ATDC");
    println!(
        "criterion 2 PASS: 11/12 rows within 5e-4; {label} is self-inconsistent in the source \
         (per-class mean {mean:.6} vs printed {printed}, delta {delta:.4}) and is reproduced \
         as the correct mean"
    );
}

/// Confusion matrix whose anomaly-class F1s are exactly the given targets:
/// for F1 = a/b in lowest terms, TP = a and FN = FP = b - a gives
/// 2a / (2a + 2(b-a)) = a/b.
fn confusion_with_f1s(targets: &[f64; 4]) -> Confusion {
    let mut m = [[0u64; 5]; 5];
    m[2][2] = 10_000;
    for (slot, &target) in [0usize, 1, 3, 4].iter().zip(targets) {
        let p = (target * 10_000.0).round() as u64;
        let g = gcd(p, 10_000);
        let (a, b) = (p / g, 10_000 / g);
        m[*slot][*slot] = a;
        m[*slot][2] += b - a;
        m[2][*slot] += b - a;
    }
    m
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Criterion 3: on presets t1-t6 x generation seeds 0-9, full-ATDC per-class
/// mean S1 orders GS < LS < NT < LD < GD with |mean NT| <= phi in >= 95% of
/// cells. Classes absent from a cell (i.i.d. sampling leaves the 0.3-0.6%
/// classes empty sometimes) make their inequalities vacuous. Budget: 2 min.
#[test]
fn acceptance_3_score_ordering() {
    let start = Instant::now();
    let mut pass = 0usize;
    let mut strict = 0usize;
    let total = 60usize;
    for preset in DatasetPreset::ALL {
        for seed in 0..10u64 {
            let ds = preset_dataset(preset, seed);
            let cfg = full_cfg(seed);
            let s1 = stage1_scores(&ds, &cfg).unwrap();
            let stats = class_score_statistics(&ds, &s1).unwrap();
            let mean = |c: ClassLabel| stats.iter().find(|s| s.class == c).map(|s| s.mean_s1);
            let chain: Vec<f64> = [
                ClassLabel::Gs,
                ClassLabel::Ls,
                ClassLabel::Nt,
                ClassLabel::Ld,
                ClassLabel::Gd,
            ]
            .iter()
            .filter_map(|&c| mean(c))
            .collect();
            let ordered = chain.windows(2).all(|w| w[0] < w[1]);
            let nt_near_zero = mean(ClassLabel::Nt)
                .map(|m| m.abs() <= cfg.phi())
                .unwrap_or(false);
            if chain.len() == 5 {
                strict += 1;
            }
            if ordered && nt_near_zero {
                pass += 1;
            } else {
                println!(
                    "  ordering cell {}/{seed} failed: chain {chain:?}",
                    preset.name()
                );
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(
        pass * 100 >= 95 * total,
        "ordering held in only {pass}/{total} cells"
    );
    assert!(elapsed < 120.0, "criterion 3 took {elapsed:.1}s (budget 120s)");
    println!(
        "criterion 3 PASS: ordering held in {pass}/{total} cells ({strict} with all five \
         classes) in {elapsed:.1}s"
    );
}

/// Criterion 4: on preset t2 with r2 = 30%, the median Macro-F1 over 20
/// sampling seeds at r1 = 0.4% is within 0.05 of the median at r1 = 100%.
/// Seeds whose stage-1 sample empties the ANT set abort per contract and are
/// excluded from both medians.
#[test]
fn acceptance_4_stage1_sampling_robustness() {
    let ds = preset_dataset(DatasetPreset::T2, 0);
    let mut low = Vec::new();
    let mut full = Vec::new();
    let mut aborted = 0usize;
    for seed in 0..20u64 {
        let base = default_cfg().with_seed(seed);
        let lo = macro_f1(&ds, &base.with_rates(0.004, 0.3).unwrap());
        let hi = macro_f1(&ds, &base.with_rates(1.0, 0.3).unwrap());
        match (lo, hi) {
            (Ok(lo), Ok(hi)) => {
                low.push(lo);
                full.push(hi);
            }
            _ => aborted += 1,
        }
    }
    assert!(low.len() >= 10, "too many aborted seeds ({aborted})");
    let diff = (median(low.clone()) - median(full.clone())).abs();
    assert!(
        diff <= 0.05,
        "macro-F1 medians differ by {diff:.4} (r1=0.4% {:.4} vs r1=100% {:.4})",
        median(low),
        median(full)
    );
    println!(
        "criterion 4 PASS: t2 median macro-F1 {:.4} @ r1=0.4% vs {:.4} @ r1=100% \
         (diff {diff:.4}, {aborted} aborted seeds excluded)",
        median(low),
        median(full)
    );
}

/// Criterion 5: on presets t5 and t6 at r1 = 0.4%, the median Macro-F1 at
/// r2 = 30% exceeds the median at r2 = 1% by at least 0.03 over 20 sampling
/// seeds. Both arms of a seed share the stage-1 draw, so aborted seeds drop
/// from both.
#[test]
fn acceptance_5_stage2_sampling_degradation() {
    for preset in [DatasetPreset::T5, DatasetPreset::T6] {
        let ds = preset_dataset(preset, 0);
        let mut hi = Vec::new();
        let mut lo = Vec::new();
        let mut aborted = 0usize;
        for seed in 0..20u64 {
            let base = default_cfg().with_seed(seed);
            let at30 = macro_f1(&ds, &base.with_rates(0.004, 0.30).unwrap());
            let at1 = macro_f1(&ds, &base.with_rates(0.004, 0.01).unwrap());
            match (at30, at1) {
                (Ok(a), Ok(b)) => {
                    hi.push(a);
                    lo.push(b);
                }
                _ => aborted += 1,
            }
        }
        assert!(hi.len() >= 10, "{}: too many aborted seeds", preset.name());
        let gap = median(hi.clone()) - median(lo.clone());
        assert!(
            gap >= 0.03,
            "{}: macro-F1 gap {gap:.4} < 0.03 (r2=30% {:.4} vs r2=1% {:.4})",
            preset.name(),
            median(hi),
            median(lo)
        );
        println!(
            "criterion 5 PASS: {} median macro-F1 {:.4} @ r2=30% vs {:.4} @ r2=1% \
             (gap {gap:.4}, {aborted} aborted seeds excluded)",
            preset.name(),
            median(hi),
            median(lo)
        );
    }
}

/// Criterion 6: on a generated N = 2000 dataset, median-of-5 FastATDC wall
/// time at default rates is at most 1/5 of ATDC's. Budget: 5 min.
#[test]
fn acceptance_6_speedup() {
    let start = Instant::now();
    let ds = generate(&GeneratorSpec {
        n: 2000,
        seed: 0,
        ..GeneratorSpec::default()
    })
    .unwrap();
    // The 8-trajectory stage-1 sample occasionally catches a global anomaly
    // and aborts (EmptyAnt); timing needs completed runs, so take the first
    // sampling seed that completes.
    let cfg = (0..20u64)
        .map(|seed| default_cfg().with_seed(seed))
        .find(|cfg| run_fastatdc(&ds, cfg).is_ok())
        .expect("some sampling seed completes");
    let mut fast_times = Vec::new();
    let mut slow_times = Vec::new();
    for _ in 0..5 {
        slow_times.push(run_atdc(&ds, &cfg).unwrap().timings.total_seconds);
        fast_times.push(run_fastatdc(&ds, &cfg).unwrap().timings.total_seconds);
    }
    let fast = median(fast_times);
    let slow = median(slow_times);
    let elapsed = start.elapsed().as_secs_f64();
    assert!(
        fast * 5.0 <= slow,
        "speedup only {:.1}x (fastatdc {fast:.3}s vs atdc {slow:.3}s)",
        slow / fast
    );
    assert!(elapsed < 300.0, "criterion 6 took {elapsed:.1}s (budget 300s)");
    println!(
        "criterion 6 PASS: {:.1}x speedup (fastatdc {fast:.3}s vs atdc {slow:.3}s median of 5) \
         in {elapsed:.1}s",
        slow / fast
    );
}

/// Criterion 7: fixed-seed commands are reproducible byte for byte (timings
/// aside), including across thread counts.
#[test]
fn acceptance_7_cli_determinism() {
    let bin = env!("CARGO_BIN_EXE_fastatdc");
    let dir = tempfile::tempdir().unwrap();
    let path = |name: &str| dir.path().join(name).display().to_string();

    let run_ok = |args: &[&str]| {
        let output = Command::new(bin).args(args).output().unwrap();
        assert!(
            output.status.success(),
            "fastatdc {args:?} failed: {}",
            String::from_utf8_lossy(&output.stderr)
        );
    };

    run_ok(&["gen", "--preset", "t6", "--seed", "7", "-o", &path("a.jsonl")]);
    run_ok(&["gen", "--preset", "t6", "--seed", "7", "-o", &path("b.jsonl")]);
    let gen_a = std::fs::read(path("a.jsonl")).unwrap();
    let gen_b = std::fs::read(path("b.jsonl")).unwrap();
    assert_eq!(gen_a, gen_b, "gen is not reproducible");

    let detect =
        |threads: &str, out: &str| {
            run_ok(&[
                "detect",
                &path("a.jsonl"),
                "--seed",
                "3",
                "--threads",
                threads,
                "-o",
                &path(out),
            ])
        };
    detect("1", "run1.jsonl");
    detect("1", "run2.jsonl");
    detect("8", "run8.jsonl");
    let records = |name: &str| {
        let text = std::fs::read_to_string(path(name)).unwrap();
        let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
        let summary = lines.pop().expect("summary line");
        assert!(summary.contains("\"summary\""));
        lines
    };
    assert_eq!(records("run1.jsonl"), records("run2.jsonl"), "detect differs across runs");
    assert_eq!(
        records("run1.jsonl"),
        records("run8.jsonl"),
        "detect differs across thread counts"
    );

    for out in ["m1.json", "m2.json"] {
        run_ok(&[
            "eval",
            "--dataset",
            &path("a.jsonl"),
            "--run",
            &path("run1.jsonl"),
            "-o",
            &path(out),
        ]);
    }
    let m1 = std::fs::read(path("m1.json")).unwrap();
    let m2 = std::fs::read(path("m2.json")).unwrap();
    assert_eq!(m1, m2, "eval is not reproducible");

    println!("criterion 7 PASS: gen/detect/eval byte-stable across reruns and 1 vs 8 threads");
}

/// Criterion 8: 10,000 random (score, theta) pairs follow the exact boundary
/// pattern (>= t1 GD; >= t2 LD; > t3 NT; > t4 LS; else GS), plus DIS
/// antisymmetry over 10,000 random trajectory pairs.
#[test]
fn acceptance_8_classifier_boundaries_and_dis_antisymmetry() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xB0DA);
    for case in 0..10_000 {
        let t2 = rng.random_range(1e-6..2.0);
        let t1 = t2 + rng.random_range(1e-6..2.0);
        let t3 = -rng.random_range(1e-6..2.0);
        let t4 = t3 - rng.random_range(1e-6..2.0);
        let theta = Theta::new([t1, t2, t3, t4]).unwrap();
        // Mix interior draws with exact boundary values.
        let score = match case % 5 {
            0 => t1,
            1 => t2,
            2 => t3,
            3 => t4,
            _ => rng.random_range(-5.0..5.0),
        };
        let expected = if score >= t1 {
            ClassLabel::Gd
        } else if score >= t2 {
            ClassLabel::Ld
        } else if score > t3 {
            ClassLabel::Nt
        } else if score > t4 {
            ClassLabel::Ls
        } else {
            ClassLabel::Gs
        };
        assert_eq!(classify(score, &theta), expected, "score {score} theta {theta:?}");
    }

    let mut checked = 0;
    let mut case = 0u64;
    while checked < 10_000 {
        let a = random_trajectory(&mut rng, 0);
        let b = random_trajectory(&mut rng, 1);
        case += 1;
        if intersection_size(&a, &b) == 0 {
            assert!(dis::<f64>(&a, &b).is_err());
            continue;
        }
        let ab: f64 = dis(&a, &b).unwrap();
        let ba: f64 = dis(&b, &a).unwrap();
        assert_eq!(ab, -ba, "case {case}");
        checked += 1;
    }
    println!(
        "criterion 8 PASS: 10000 boundary cases and 10000 antisymmetric DIS pairs"
    );
}

fn random_trajectory(rng: &mut ChaCha8Rng, id: u64) -> Trajectory {
    let len = rng.random_range(1..=12);
    let mut cells: Vec<u32> = (0u32..30).collect();
    for i in 0..len {
        let j = rng.random_range(i..30);
        cells.swap(i, j);
    }
    cells.truncate(len);
    Trajectory::new(id, cells.into_iter().map(CellId::new).collect(), None).unwrap()
}
