use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use sparse_denoise::dictionary_learning::{load_dictionary_csv, overcomplete_dct, render_atlas};
use sparse_denoise::image::{read_image, write_image};
use sparse_denoise::metrics::{psnr, ssim, SsimConfig};
use sparse_denoise::pipeline::SPARSITY_SCHEDULE;
use sparse_denoise_cli::{
    best_per_sigma, image_name, run_denoise, sweep_sparsity, BenchmarkRecord, CoderKind,
    OutputFormat, RunSpec,
};

#[derive(Parser)]
#[command(name = "sparse-denoise", version, about = "Sparse-coding image denoising with K-SVD")]
struct Cli {
    /// Worker threads for patch coding.
    #[arg(long, global = true, env = "SPARSE_DENOISE_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Add noise to each input, denoise it and record PSNR/SSIM.
    Denoise(JobArgs),
    /// Full grid over the standard noise levels with PDAS and OMP.
    Benchmark(JobArgs),
    /// PSNR of PDAS denoising over a range of sparsity levels.
    SweepT0(SweepArgs),
    /// Render a dictionary as a tiled grayscale image.
    ExportDict(ExportArgs),
    /// Print PSNR and SSIM between two images.
    Metrics(MetricsArgs),
}

#[derive(Args)]
struct JobArgs {
    /// JSON run file; flags override its values.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long = "input", num_args = 1..)]
    inputs: Vec<PathBuf>,
    /// Noise levels, comma separated or repeated.
    #[arg(long = "sigma", value_delimiter = ',', num_args = 1..)]
    sigmas: Vec<f64>,
    #[arg(long = "coder", value_enum, value_delimiter = ',', num_args = 1..)]
    coders: Vec<CoderKind>,
    /// Sparsity for PDAS and OMP (default: per-noise schedule for PDAS, 5 for OMP).
    #[arg(long)]
    t0: Option<usize>,
    /// LASSO penalty (default: calibrated per noise level).
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    /// Image format of written images: pgm or png.
    #[arg(long)]
    image_format: Option<String>,
    /// Also write each trained dictionary as CSV.
    #[arg(long)]
    save_dict: bool,
    /// Also write the (clipped) noisy input.
    #[arg(long)]
    save_noisy: bool,
    /// Skip writing denoised images.
    #[arg(long)]
    no_images: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long = "sigma", value_delimiter = ',', num_args = 1..)]
    sigmas: Vec<f64>,
    /// Explicit sparsity levels; overrides the min/max range.
    #[arg(long = "t0", value_delimiter = ',', num_args = 1..)]
    t0s: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    t0_min: usize,
    #[arg(long, default_value_t = 25)]
    t0_max: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
}

#[derive(Args)]
struct ExportArgs {
    /// Dictionary CSV as written by `denoise --save-dict`.
    #[arg(long, conflicts_with = "dct", required_unless_present = "dct")]
    dict: Option<PathBuf>,
    /// Render the overcomplete DCT with this many atoms instead.
    #[arg(long)]
    dct: Option<usize>,
    /// Signal dimension for `--dct`.
    #[arg(long, default_value_t = 64)]
    signal_dim: usize,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct MetricsArgs {
    reference: PathBuf,
    test: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Denoise(args) => {
            let spec = job_spec(args, cli.threads, &[], &[CoderKind::Pdas])?;
            denoise_jobs(&spec, false)
        }
        Command::Benchmark(args) => {
            let sigmas: Vec<f64> = SPARSITY_SCHEDULE.iter().map(|s| s.0).collect();
            let spec = job_spec(args, cli.threads, &sigmas, &[CoderKind::Pdas, CoderKind::Omp])?;
            denoise_jobs(&spec, true)
        }
        Command::SweepT0(args) => {
            configure_threads(cli.threads)?;
            sweep(args).map(|_| true)
        }
        Command::ExportDict(args) => export(args).map(|_| true),
        Command::Metrics(args) => metrics(args).map(|_| true),
    }
}

fn configure_threads(threads: Option<usize>) -> anyhow::Result<()> {
    if let Some(n) = threads {
        if n == 0 {
            bail!("--threads must be positive");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    Ok(())
}

fn job_spec(
    args: JobArgs,
    threads: Option<usize>,
    default_sigmas: &[f64],
    default_coders: &[CoderKind],
) -> anyhow::Result<RunSpec> {
    let mut spec = match &args.spec {
        Some(path) => RunSpec::load(path)?,
        None => RunSpec {
            sigmas: default_sigmas.to_vec(),
            coders: default_coders.to_vec(),
            ..RunSpec::default()
        },
    };
    if !args.inputs.is_empty() {
        spec.inputs = args.inputs;
    }
    if !args.sigmas.is_empty() {
        spec.sigmas = args.sigmas;
    }
    if !args.coders.is_empty() {
        spec.coders = args.coders;
    }
    spec.t0 = args.t0.or(spec.t0);
    spec.lambda = args.lambda.or(spec.lambda);
    spec.seed = args.seed.unwrap_or(spec.seed);
    if let Some(dir) = args.out_dir {
        spec.out_dir = dir;
    }
    if let Some(f) = args.format {
        spec.format = f;
    }
    if let Some(f) = args.image_format {
        spec.image_format = f;
    }
    spec.save_dictionary |= args.save_dict;
    spec.save_noisy |= args.save_noisy;
    if args.no_images {
        spec.save_images = false;
    }
    spec.threads = threads.or(spec.threads);
    configure_threads(spec.threads)?;
    Ok(spec)
}

fn print_record(r: &BenchmarkRecord) {
    let param = match (r.t0, r.lambda) {
        (Some(t), _) => format!("t0={t}"),
        (None, Some(l)) => format!("lambda={l}"),
        _ => String::new(),
    };
    eprintln!(
        "{} sigma={} {} {param}: PSNR={:.2} dB SSIM={:.4} ({:.1} s)",
        r.image, r.sigma, r.coder, r.psnr_db, r.ssim, r.seconds
    );
}

fn denoise_jobs(spec: &RunSpec, table: bool) -> anyhow::Result<bool> {
    let summary = run_denoise(spec, print_record)?;
    if table {
        print_table(&summary.records);
    }
    eprintln!(
        "{} record(s) written to {}",
        summary.records.len(),
        summary.records_path.display()
    );
    for failure in &summary.failures {
        eprintln!("failed: {failure}");
    }
    Ok(summary.success())
}

fn print_table(records: &[BenchmarkRecord]) {
    let mut coders: Vec<&str> = Vec::new();
    for r in records {
        if !coders.contains(&r.coder.as_str()) {
            coders.push(&r.coder);
        }
    }
    print!("{:<12} {:>6}", "image", "sigma");
    for c in &coders {
        print!(" {:>14}", format!("{c} PSNR/SSIM"));
    }
    println!();
    let mut seen: Vec<(&str, f64)> = Vec::new();
    for r in records {
        if seen.contains(&(r.image.as_str(), r.sigma)) {
            continue;
        }
        seen.push((&r.image, r.sigma));
        print!("{:<12} {:>6}", r.image, r.sigma);
        for c in &coders {
            match records.iter().find(|q| q.image == r.image && q.sigma == r.sigma && q.coder == *c) {
                Some(q) => print!(" {:>14}", format!("{:.2}/{:.3}", q.psnr_db, q.ssim)),
                None => print!(" {:>14}", "-"),
            }
        }
        println!();
    }
}

fn sweep(args: SweepArgs) -> anyhow::Result<()> {
    if args.sigmas.is_empty() {
        bail!("no noise levels given");
    }
    let t0s: Vec<usize> = if args.t0s.is_empty() {
        (args.t0_min..=args.t0_max).collect()
    } else {
        args.t0s
    };
    if t0s.is_empty() {
        bail!("empty sparsity range");
    }
    let clean = read_image(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    let name = image_name(&args.input);
    let points = sweep_sparsity(&clean, &args.sigmas, &t0s, args.seed, |p| {
        eprintln!("sigma={} t0={}: PSNR={:.2} dB", p.sigma, p.t0, p.psnr_db);
    })?;
    let best = best_per_sigma(&points);
    std::fs::create_dir_all(&args.out_dir)?;
    match args.format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_path(args.out_dir.join("sweep.csv"))?;
            w.write_record(["image", "sigma", "t0", "psnr_db", "ssim", "seconds", "seed"])?;
            for p in &points {
                w.write_record([
                    name.clone(),
                    p.sigma.to_string(),
                    p.t0.to_string(),
                    format!("{:.6}", p.psnr_db),
                    format!("{:.6}", p.ssim),
                    format!("{:.6}", p.seconds),
                    args.seed.to_string(),
                ])?;
            }
            w.flush()?;
            let mut w = csv::Writer::from_path(args.out_dir.join("sweep_best.csv"))?;
            w.write_record(["image", "sigma", "best_t0", "psnr_db"])?;
            for b in &best {
                w.write_record([name.clone(), b.sigma.to_string(), b.t0.to_string(), format!("{:.6}", b.psnr_db)])?;
            }
            w.flush()?;
        }
        OutputFormat::Json => {
            let doc = serde_json::json!({ "image": name, "seed": args.seed, "points": points, "best": best });
            std::fs::write(args.out_dir.join("sweep.json"), serde_json::to_string_pretty(&doc)?)?;
        }
    }
    for b in &best {
        println!("sigma={} best_t0={} psnr_db={:.6}", b.sigma, b.t0, b.psnr_db);
    }
    Ok(())
}

fn export(args: ExportArgs) -> anyhow::Result<()> {
    let dict = match (&args.dict, args.dct) {
        (Some(path), _) => load_dictionary_csv(path).with_context(|| format!("reading {}", path.display()))?,
        (None, Some(k)) => overcomplete_dct(args.signal_dim, k)?,
        (None, None) => bail!("either --dict or --dct is required"),
    };
    let atlas = render_atlas(&dict)?;
    write_image(&atlas, &args.output).with_context(|| format!("writing {}", args.output.display()))?;
    eprintln!(
        "{} atoms rendered to {} ({}x{})",
        dict.num_atoms(),
        args.output.display(),
        atlas.width(),
        atlas.height()
    );
    Ok(())
}

fn load(path: &Path) -> anyhow::Result<sparse_denoise::GrayImage> {
    read_image(path).with_context(|| format!("reading {}", path.display()))
}

fn metrics(args: MetricsArgs) -> anyhow::Result<()> {
    let a = load(&args.reference)?;
    let b = load(&args.test)?;
    let p = psnr(&a, &b)?;
    let s = ssim(&a, &b, &SsimConfig::default())?;
    println!("PSNR={p:.6} dB SSIM={s:.6}");
    Ok(())
}
