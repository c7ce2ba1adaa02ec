//! Command-line surface: window rendering, the origin cycle, the exact
//! length sequence, the Monte Carlo estimators, the variant models, and the
//! structural verification suite. Exit codes: 0 on success, 1 when a
//! structural property is violated, 2 on usage errors.

use crate::builder::{cycle_from_pair_hikers, cycle_from_pair_trace};
use crate::contour::{
    check_trichotomy, classification_of_pair, cycle_of_origin, direction_by_color, full_census,
    passages, CycleRecord, DEFAULT_MAX_HALF,
};
use crate::error::{Error, Result};
use crate::excursion::Direction;
use crate::lattice::WindowSpec;
use crate::mc::{self, LengthByDiameterParams, SweepTarget, TailParams, Violations};
use crate::render;
use crate::report::FitReport;
use crate::rng::RngKey;
use crate::series;
use crate::xor;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use std::io::Write;
use std::time::Instant;

#[derive(Debug, Parser)]
#[command(name = "cornerlab", version, about = "corner percolation laboratory")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Clone)]
struct Global {
    /// master seed; every derived stream is keyed from it
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// probability of a +1 sign
    #[arg(long, global = true, default_value_t = 0.5)]
    bias: f64,
    /// sample count for the sampling commands
    #[arg(long, global = true)]
    samples: Option<u64>,
    /// output file (stdout when omitted)
    #[arg(long, global = true)]
    out: Option<std::path::PathBuf>,
    /// report format
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// half-width cap for the adaptive origin-cycle search
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_HALF)]
    max_window: i64,
    /// worker threads (CORNERLAB_THREADS overrides)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// record wall-clock time in reports (breaks byte determinism)
    #[arg(long, global = true, default_value_t = false)]
    timing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Svg,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Render a configuration window
    Sample {
        /// vertex half-width of the window
        #[arg(long, default_value_t = 32)]
        size: i64,
        /// render the face heights instead of the edges
        #[arg(long, default_value_t = false)]
        heights: bool,
    },
    /// Find and describe the cycle through the origin
    Cycle {
        /// include the full vertex list in JSON output
        #[arg(long, default_value_t = false)]
        vertices: bool,
    },
    /// Exact expected-length sequence and its growth exponent
    ExactL {
        #[arg(long, default_value_t = 256)]
        hmax: i64,
        /// largest height kept in exact rational arithmetic
        #[arg(long, default_value_t = 64)]
        exact_cutoff: i64,
        #[arg(long, default_value_t = 16)]
        fit_lo: i64,
    },
    /// Monte Carlo estimators
    Estimate {
        #[command(subcommand)]
        which: EstimateCommand,
    },
    /// Linear-entropy variant models
    Variant {
        #[command(subcommand)]
        which: VariantCommand,
    },
    /// Run the structural property suite; exits 1 on any violation
    Verify {
        /// windows (and pair batches) to check
        #[arg(long, default_value_t = 50)]
        windows: u64,
    },
}

#[derive(Debug, Subcommand)]
enum EstimateCommand {
    /// Tail of the origin cycle's marginal height, fit to h^(-2 gamma)
    PTail {
        #[arg(long, default_value_t = 64)]
        hmax: i64,
    },
    /// Tail of the origin cycle's diameter, fit to n^(-gamma)
    DiamTail {
        #[arg(long, default_value_t = 256)]
        nmax: i64,
    },
    /// Mean built-cycle length at one height
    LengthMc {
        #[arg(long, default_value_t = 2)]
        h: i64,
    },
    /// Mean cycle length binned by measured diameter, fit to n^delta
    LengthByDiameter {
        #[arg(long, default_value_t = 44)]
        hmax: i64,
    },
    /// Total level-0 contour edges in growing boxes, fit to N^(3/2)
    Level0 {
        #[arg(long, value_delimiter = ',', default_values_t = vec![64, 128, 256, 512])]
        sizes: Vec<i64>,
    },
    /// Left-right crossing probability of an n x n window
    Crossing {
        #[arg(long, default_value_t = 128)]
        size: i64,
    },
    /// Noncontractible cycles of the doubly periodic configuration
    Torus {
        #[arg(long, default_value_t = 16)]
        size: i64,
    },
    /// Re-run the closure or crossing estimator across bias values
    BiasSweep {
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.5, 0.55, 0.6])]
        biases: Vec<f64>,
        /// bias the walk steps instead of the signs
        #[arg(long, default_value_t = false)]
        walk: bool,
        #[arg(long, value_enum, default_value_t = SweepKind::Closure)]
        target: SweepKind,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SweepKind {
    Closure,
    Crossing,
}

#[derive(Debug, Subcommand)]
enum VariantCommand {
    /// 2-xor bond model on the square lattice
    TwoXor {
        #[arg(long, default_value_t = 128)]
        size: i64,
    },
    /// trixor site model on the triangular lattice
    Trixor {
        #[arg(long, default_value_t = 256)]
        size: i64,
    },
    /// 4-xor site model on the triangular lattice
    FourXor {
        #[arg(long, default_value_t = 256)]
        size: i64,
    },
}

/// Entry point used by the binary; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    init_threads(&cli.global);
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn init_threads(global: &Global) {
    let threads = std::env::var("CORNERLAB_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .or(global.threads);
    if let Some(n) = threads {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
}

fn emit(global: &Global, text: &str) -> Result<()> {
    match &global.out {
        Some(path) => {
            let mut f = std::fs::File::create(path)?;
            f.write_all(text.as_bytes())?;
            Ok(())
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json<S: serde::Serialize>(global: &Global, value: &S) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    emit(global, &s)
}

fn stamp(report: &mut FitReport, t0: Instant, timing: bool) {
    if timing {
        report.wall_time_ms = Some(t0.elapsed().as_millis() as u64);
    }
}

fn dispatch(cli: &Cli) -> Result<i32> {
    let g = &cli.global;
    let samples = g.samples;
    match &cli.command {
        Command::Sample { size, heights } => {
            let spec = WindowSpec {
                seed: g.seed,
                bias_xi: g.bias,
                bias_eta: g.bias,
                x_range: (-size, *size),
                y_range: (-size, *size),
                walk_bias: false,
            };
            let window = spec.build()?;
            match g.format.unwrap_or(Format::Svg) {
                Format::Svg => {
                    let svg = if *heights {
                        render::render_height_map(&window)?
                    } else {
                        render::render_window(&window)?
                    };
                    emit(g, &svg)?;
                }
                Format::Json => {
                    let cycles = render::all_closed_cycles(&window);
                    let records: Vec<CycleRecord> = cycles
                        .iter()
                        .filter_map(|c| {
                            let cls = crate::contour::classify(&window, c).ok()?;
                            let ps = passages(&window, c).ok()?;
                            Some(CycleRecord::new(g.seed, c, cls, ps, false))
                        })
                        .collect();
                    emit_json(g, &json!({"spec": spec, "cycles": records}))?;
                }
                Format::Csv => return Err(Error::InvalidArgument("sample has no CSV form".into())),
            }
            Ok(0)
        }
        Command::Cycle { vertices } => {
            let spec = WindowSpec {
                seed: g.seed,
                bias_xi: g.bias,
                bias_eta: g.bias,
                x_range: (0, 0),
                y_range: (0, 0),
                walk_bias: false,
            };
            let oc = cycle_of_origin(&spec, g.max_window)?;
            match g.format.unwrap_or(Format::Json) {
                Format::Svg => {
                    emit(g, &render::render_cycle(&oc.cycle)?)?;
                }
                _ => {
                    let window = spec.with_half(oc.window_half).build()?;
                    let ps = passages(&window, &oc.cycle)?;
                    let record =
                        CycleRecord::new(g.seed, &oc.cycle, oc.classification, ps, *vertices);
                    emit_json(
                        g,
                        &json!({"height": oc.height, "window_half": oc.window_half, "cycle": record}),
                    )?;
                }
            }
            Ok(0)
        }
        Command::ExactL {
            hmax,
            exact_cutoff,
            fit_lo,
        } => {
            let series = series::l_sequence(*hmax, *exact_cutoff)?;
            match g.format.unwrap_or(Format::Csv) {
                Format::Csv => emit(g, &series.to_csv())?,
                _ => {
                    let fit = series::fit_exponent(&series, *fit_lo, *hmax).ok();
                    emit_json(
                        g,
                        &json!({
                            "h_max": series.h_max,
                            "exact_cutoff": series.exact_cutoff,
                            "l": (1..=series.h_max).map(|h| series.l(h)).collect::<Vec<_>>(),
                            "nondecreasing": series.is_nondecreasing(),
                            "slopes": fit.as_ref().map(|f| f.slopes.clone()),
                            "raw_exponent": fit.as_ref().map(|f| f.raw),
                            "extrapolated_exponent": fit.as_ref().map(|f| f.extrapolated),
                            "target": series::two_delta(),
                        }),
                    )?;
                }
            }
            Ok(0)
        }
        Command::Estimate { which } => run_estimate(g, which, samples),
        Command::Variant { which } => run_variant(g, which, samples),
        Command::Verify { windows } => {
            let report = run_verify(g.seed, samples.unwrap_or(*windows));
            emit_json(g, &report)?;
            Ok(if report.violations.is_clean() { 0 } else { 1 })
        }
    }
}

fn run_estimate(g: &Global, which: &EstimateCommand, samples: Option<u64>) -> Result<i32> {
    let t0 = Instant::now();
    match which {
        EstimateCommand::PTail { hmax } => {
            let params = TailParams {
                values: dyadic(1, *hmax),
                samples: samples.unwrap_or(10_000),
                max_half: g.max_window,
                bias: g.bias,
            };
            let mut r = mc::estimate_p(&params, g.seed);
            stamp(&mut r, t0, g.timing);
            emit_fit(g, &r)
        }
        EstimateCommand::DiamTail { nmax } => {
            let params = TailParams {
                values: dyadic(4, *nmax),
                samples: samples.unwrap_or(10_000),
                max_half: g.max_window,
                bias: g.bias,
            };
            let mut r = mc::estimate_diam_tail(&params, g.seed);
            stamp(&mut r, t0, g.timing);
            emit_fit(g, &r)
        }
        EstimateCommand::LengthMc { h } => {
            let mut r = mc::estimate_l_mc(*h, samples.unwrap_or(100_000), g.seed)?;
            if g.timing {
                r.wall_time_ms = Some(t0.elapsed().as_millis() as u64);
            }
            emit_json(g, &r)?;
            Ok(0)
        }
        EstimateCommand::LengthByDiameter { hmax } => {
            let params = LengthByDiameterParams {
                h_max: *hmax,
                samples_per_h: samples.unwrap_or(1200),
                ..LengthByDiameterParams::default()
            };
            let mut r = mc::estimate_length_by_diameter(&params, g.seed);
            stamp(&mut r, t0, g.timing);
            emit_fit(g, &r)
        }
        EstimateCommand::Level0 { sizes } => {
            let mut r = mc::estimate_level0_total(sizes, samples.unwrap_or(100), g.seed)?;
            stamp(&mut r, t0, g.timing);
            emit_fit(g, &r)
        }
        EstimateCommand::Crossing { size } => {
            let (mut r, v) = mc::estimate_crossing(*size, samples.unwrap_or(2_000), g.seed, g.bias);
            if g.timing {
                r.wall_time_ms = Some(t0.elapsed().as_millis() as u64);
            }
            emit_json(g, &r)?;
            Ok(if v.is_clean() { 0 } else { 1 })
        }
        EstimateCommand::Torus { size } => {
            let mut r = mc::estimate_torus(*size, samples.unwrap_or(2_000), g.seed);
            if g.timing {
                r.wall_time_ms = Some(t0.elapsed().as_millis() as u64);
            }
            emit_json(g, &r)?;
            Ok(0)
        }
        EstimateCommand::BiasSweep {
            biases,
            walk,
            target,
        } => {
            let target = match target {
                SweepKind::Closure => SweepTarget::Closure {
                    budgets: vec![1 << 8, 1 << 10, 1 << 12],
                    samples: samples.unwrap_or(500),
                },
                SweepKind::Crossing => SweepTarget::Crossing {
                    n: 64,
                    samples: samples.unwrap_or(1_000),
                },
            };
            let reports = mc::biased_sweep(biases, &target, *walk, g.seed);
            emit_json(g, &reports)?;
            Ok(0)
        }
    }
}

fn run_variant(g: &Global, which: &VariantCommand, samples: Option<u64>) -> Result<i32> {
    match which {
        VariantCommand::TwoXor { size } => {
            // open-edge frequency and cluster count summary on keyed fields
            let n = samples.unwrap_or(200);
            let mut cluster_counts = Vec::new();
            for k in 0..n {
                let field = xor::TwoXorField::new(RngKey::new(g.seed).substream(0x2a).word(k));
                let mut open = 0u64;
                for x in 0..*size {
                    for y in 0..*size {
                        if field.edge_open(crate::lattice::Edge::H { x, y }) {
                            open += 1;
                        }
                        if field.edge_open(crate::lattice::Edge::V { x, y }) {
                            open += 1;
                        }
                    }
                }
                cluster_counts.push(open as f64 / (2 * size * size) as f64);
            }
            let mean = cluster_counts.iter().sum::<f64>() / n as f64;
            emit_json(
                g,
                &json!({
                    "variant": "two_xor",
                    "size": size,
                    "samples": n,
                    "open_fraction": mean,
                    "seed": g.seed,
                }),
            )?;
            Ok(0)
        }
        VariantCommand::Trixor { size } => {
            let (gamma, delta) = xor::variant_exponents(
                xor::trixor_families(),
                "trixor",
                *size,
                samples.unwrap_or(2_000),
                g.seed,
                (0.16, 0.2),
                (1.3, 1.34),
            )?;
            // the even-neighborhood constraint is exact on every sample
            let mut bad = 0;
            for k in 0..20 {
                let f = xor::gen_trixor(*size.min(&128), RngKey::new(g.seed).substream(7).word(k))?;
                bad += xor::odd_neighborhood_count(&f);
            }
            let grid = xor::rle_encode(&xor::gen_trixor(
                64,
                RngKey::new(g.seed).substream(8).word(0),
            )?);
            emit_json(
                g,
                &json!({"gamma": gamma, "delta": delta, "odd_neighborhoods": bad, "sample_grid_rle": grid}),
            )?;
            Ok(if bad == 0 { 0 } else { 1 })
        }
        VariantCommand::FourXor { size } => {
            let (gamma, delta) = xor::variant_exponents(
                xor::four_xor_families(),
                "four_xor",
                *size,
                samples.unwrap_or(2_000),
                g.seed,
                (0.93, 1.05),
                (1.74, 1.76),
            )?;
            emit_json(g, &json!({"gamma": gamma, "delta": delta}))?;
            Ok(0)
        }
    }
}

fn emit_fit(g: &Global, r: &FitReport) -> Result<i32> {
    match g.format.unwrap_or(Format::Json) {
        Format::Csv => emit(g, &r.points_csv())?,
        _ => emit_json(g, r)?,
    }
    Ok(0)
}

fn dyadic(lo: i64, hi: i64) -> Vec<i64> {
    let mut v = Vec::new();
    let mut x = lo;
    while x <= hi {
        v.push(x);
        x *= 2;
    }
    v
}

/// Outcome of the structural verification suite.
#[derive(Debug, Clone, serde::Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub windows: u64,
    pub cycles_checked: u64,
    pub pairs_checked: u64,
    pub height_mismatches: u64,
    pub level_identity_failures: u64,
    pub builder_mismatches: u64,
    pub passage_failures: u64,
    pub violations: Violations,
}

/// The full property suite: height consistency, the excursion-pair
/// bijection with its level identity, the same-level arrangement rules,
/// passage structure, builder equivalence, and crossing exclusivity.
pub fn run_verify(seed: u64, windows: u64) -> VerifyReport {
    let mut report = VerifyReport {
        seed,
        windows,
        cycles_checked: 0,
        pairs_checked: 0,
        height_mismatches: 0,
        level_identity_failures: 0,
        builder_mismatches: 0,
        passage_failures: 0,
        violations: Violations::default(),
    };
    let key = RngKey::new(seed).substream(0xf00d);
    let half = 32;
    for w in 0..windows {
        let spec = WindowSpec::square(key.word(w), half);
        let window = spec.build().expect("window builds");
        // degree regularity (structurally guaranteed; checked anyway)
        for x in (-half + 1)..half {
            for y in (-half + 1)..half {
                if window.degree_in_window((x, y)) != 2 {
                    report.violations.bad_degree += 1;
                }
            }
        }
        // height function: formula against the path definition
        for n in -half..half {
            for m in -half..half {
                let f = crate::lattice::Face::new(n, m);
                if window.height_unchecked(f) != window.height_by_path(f).expect("in range") {
                    report.height_mismatches += 1;
                }
            }
        }
        // censuses: bijection, levels, trichotomy, passages
        for census in full_census(&window).expect("census") {
            let v = check_trichotomy(&census);
            if !v.is_clean() {
                report.violations.trichotomy += 1;
            }
            for (cycle, cls) in &census.cycles {
                report.cycles_checked += 1;
                match crate::contour::marginals(&window, &cycle.rect) {
                    Ok((ex, ey)) => {
                        let from_pair = classification_of_pair(&ex, &ey);
                        if from_pair != *cls
                            || cls.direction != direction_by_color(cycle)
                            || cls.level != census.level
                        {
                            report.level_identity_failures += 1;
                        }
                        let h = ex.height();
                        let s = ex.base + ey.base;
                        let identity_ok = match cls.direction {
                            Direction::Up => 2 * cls.level == s + h,
                            Direction::Down => 2 * cls.level + 1 == s - h,
                        };
                        if !identity_ok {
                            report.level_identity_failures += 1;
                        }
                    }
                    Err(_) => {
                        report.violations.bijection += 1;
                    }
                }
                // passages end on cycle edges at the rectangle sides
                if let Ok(ps) = passages(&window, cycle) {
                    let edges = cycle.edge_set();
                    for p in ps {
                        let ok = match p {
                            crate::contour::Passage::Column(n) => {
                                edges.contains(&crate::lattice::Edge::H {
                                    x: n,
                                    y: cycle.rect.b + 1,
                                }) && edges.contains(&crate::lattice::Edge::H {
                                    x: n,
                                    y: cycle.rect.d,
                                })
                            }
                            crate::contour::Passage::Row(m) => {
                                edges.contains(&crate::lattice::Edge::V {
                                    x: cycle.rect.a + 1,
                                    y: m,
                                }) && edges.contains(&crate::lattice::Edge::V {
                                    x: cycle.rect.c,
                                    y: m,
                                })
                            }
                        };
                        if !ok {
                            report.passage_failures += 1;
                        }
                    }
                }
            }
        }
        // crossing exclusivity on the same window
        let s = mc::crossing_sample(&window);
        if s.left_right && s.up_down {
            report.violations.both_crossings += 1;
        }
    }
    // builder equivalence on sampled pairs
    let pair_key = key.substream(0xbead);
    for k in 0..(windows * 4) {
        let mut rng = pair_key.substream(k).rng();
        let h = 1 + (rng.below(12) as i64);
        let direction = if rng.bernoulli(0.5) {
            Direction::Up
        } else {
            Direction::Down
        };
        let pair = mc::sample_pair(h, direction, &mut rng);
        report.pairs_checked += 1;
        match (cycle_from_pair_trace(&pair), cycle_from_pair_hikers(&pair)) {
            (Ok(a), Ok(b)) if a == b => {}
            _ => report.builder_mismatches += 1,
        }
    }
    if report.height_mismatches > 0 || report.level_identity_failures > 0 {
        report.violations.bijection += report.height_mismatches + report.level_identity_failures;
    }
    if report.builder_mismatches > 0 || report.passage_failures > 0 {
        report.violations.bijection += report.builder_mismatches + report.passage_failures;
    }
    report
}
