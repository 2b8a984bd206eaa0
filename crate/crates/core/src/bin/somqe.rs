use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use somqe::image::{read_image, write_image, Normalize};
use somqe::persist::{load_map, save_map};
use somqe::plot::{emit_plot, PlotSeries};
use somqe::reproduce::{reproduce, Experiment, ReproOptions};
use somqe::series::{compare_series, run_series, QeSeriesReport, SeriesConfig, TrainMode};
use somqe::som::{Neighborhood, Topology};
use somqe::stats::{self, read_groups_csv, write_results_csv, StatResult, TableId};
use somqe::synth::{self, DotFieldSpec, LesionPattern, LesionSpec, PhantomSpec};
use somqe::{extract_samples, quantization_error, train, FeatureMode, TrainConfig};

#[derive(Parser)]
#[command(name = "somqe", version, about = "SOM quantization error for image series")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a map on one image and save it.
    Train {
        image: PathBuf,
        #[command(flatten)]
        train: TrainArgs,
        #[command(flatten)]
        feature: FeatureArgs,
        /// Output map file.
        #[arg(long)]
        out: PathBuf,
    },
    /// QE of an image against a saved map.
    Qe {
        image: PathBuf,
        #[arg(long)]
        som: PathBuf,
        #[command(flatten)]
        feature: FeatureArgs,
    },
    /// QE of every image in a series.
    Series {
        #[arg(required = true)]
        images: Vec<PathBuf>,
        #[command(flatten)]
        train: TrainArgs,
        #[command(flatten)]
        feature: FeatureArgs,
        #[arg(long, default_value = "per-image")]
        mode: TrainMode,
        /// Training runs averaged per image.
        #[arg(long, default_value_t = 1)]
        repeats: usize,
        /// Worker threads (0: all cores).
        #[arg(long, default_value_t = 0)]
        threads: usize,
        /// Directory for series.csv, report.txt and maps/.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Student t of series B against series A (CSV files from `series`).
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        welch: bool,
        /// Write `kind,statistic,df1,df2,p` CSV here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Synthetic images.
    #[command(subcommand)]
    Synth(SynthCommand),
    /// Tests on group data (CSV, one column per group).
    #[command(subcommand)]
    Stats(StatsCommand),
    /// Published tables.
    #[command(subcommand)]
    Fixtures(FixturesCommand),
    /// Run a seeded experiment; exits with 3 if its check fails.
    Reproduce {
        name: Experiment,
        /// Number of seeds, starting at 0.
        #[arg(long, default_value_t = 20)]
        seeds: u64,
        #[arg(long, default_value_t = 0)]
        threads: usize,
    },
    /// SVG chart of one or more series CSV files.
    Plot {
        #[arg(required = true)]
        series: Vec<PathBuf>,
        /// Legend labels, in input order (default: file stems).
        #[arg(long)]
        label: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum SynthCommand {
    Lesion {
        input: PathBuf,
        #[arg(long)]
        cx: usize,
        #[arg(long)]
        cy: usize,
        #[arg(long, default_value_t = 22)]
        semi_a: u32,
        #[arg(long, default_value_t = 13)]
        semi_b: u32,
        #[arg(long, value_enum, default_value = "checker2")]
        pattern: PatternArg,
        #[arg(long)]
        out: PathBuf,
    },
    Noise {
        input: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    Dots {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[arg(long, default_value_t = 512)]
        width: usize,
        #[arg(long, default_value_t = 512)]
        height: usize,
        #[arg(long, default_value_t = 50)]
        n_dots: usize,
        #[arg(long, default_value_t = 5.0)]
        radius: f64,
        #[arg(long, default_value_t = 0.7)]
        michelson: f64,
        #[arg(long, default_value_t = 8)]
        supersample: usize,
        #[arg(long)]
        out: PathBuf,
    },
    Phantom {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum PatternArg {
    Checker2,
    Solid,
}

#[derive(Subcommand)]
enum StatsCommand {
    Ttest {
        csv: PathBuf,
        /// First group column (default: first column).
        #[arg(long)]
        a: Option<String>,
        /// Second group column (default: second column).
        #[arg(long)]
        b: Option<String>,
        #[arg(long)]
        welch: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Anova {
        csv: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum FixturesCommand {
    /// Print a table as CSV.
    Dump {
        table: TableId,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct TrainArgs {
    /// Map size as ROWSxCOLS.
    #[arg(long, default_value = "16x16", value_parser = parse_map_size)]
    map: (usize, usize),
    #[arg(long, default_value_t = 5.0)]
    radius: f64,
    #[arg(long, default_value_t = 1.0)]
    radius_final: f64,
    #[arg(long, default_value_t = 0.2)]
    alpha: f64,
    #[arg(long, default_value_t = 0.01)]
    alpha_final: f64,
    #[arg(long, default_value_t = 10_000)]
    iters: usize,
    #[arg(long, default_value = "gaussian")]
    neighborhood: Neighborhood,
    #[arg(long, default_value = "rectangular")]
    topology: Topology,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl TrainArgs {
    fn config(&self, dim: usize) -> TrainConfig {
        TrainConfig {
            rows: self.map.0,
            cols: self.map.1,
            dim,
            radius0: self.radius,
            radius_final: self.radius_final,
            alpha0: self.alpha,
            alpha_final: self.alpha_final,
            iterations: self.iters,
            neighborhood: self.neighborhood,
            topology: self.topology,
            seed: self.seed,
        }
    }
}

#[derive(Args)]
struct FeatureArgs {
    /// `pixel` or `patch:K` with odd K.
    #[arg(long, default_value = "pixel")]
    feature: FeatureMode,
    /// Scale intensities to [0, 1].
    #[arg(long)]
    normalize: bool,
}

impl FeatureArgs {
    fn mode(&self) -> FeatureMode {
        if self.normalize {
            self.feature.normalized(Normalize::UnitRange)
        } else {
            self.feature
        }
    }
}

fn parse_map_size(s: &str) -> Result<(usize, usize), String> {
    let (r, c) = s.split_once(['x', 'X']).ok_or_else(|| format!("expected ROWSxCOLS, got `{s}`"))?;
    let r: usize = r.parse().map_err(|_| format!("bad row count `{r}`"))?;
    let c: usize = c.parse().map_err(|_| format!("bad column count `{c}`"))?;
    if r == 0 || c == 0 {
        return Err("map dimensions must be positive".into());
    }
    Ok((r, c))
}

enum Failure {
    Usage(String),
    Run(somqe::Error),
    Reproduction,
}

impl From<somqe::Error> for Failure {
    fn from(e: somqe::Error) -> Self {
        Failure::Run(e)
    }
}

impl From<somqe::som::SomError> for Failure {
    fn from(e: somqe::som::SomError) -> Self {
        Failure::Run(e.into())
    }
}

impl From<somqe::stats::StatsError> for Failure {
    fn from(e: somqe::stats::StatsError) -> Self {
        Failure::Run(e.into())
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Reproduction) => ExitCode::from(3),
    }
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Train { image, train: targs, feature, out } => {
            let mut cfg = checked(targs.config(1))?;
            let img = read_image(&image)?;
            let mode = feature.mode();
            cfg.dim = mode.dim(img.channels());
            let samples = extract_samples(&img, mode).map_err(somqe::Error::from)?;
            let map = train(&cfg, &samples)?;
            save_map(&map, &out).map_err(somqe::Error::from)?;
            println!("{}feature={mode}", cfg.echo());
            println!("qe={}", quantization_error(&map, &samples)?);
        }
        Command::Qe { image, som, feature } => {
            let img = read_image(&image)?;
            let map = load_map(&som).map_err(somqe::Error::from)?;
            let samples = extract_samples(&img, feature.mode()).map_err(somqe::Error::from)?;
            println!("{}", quantization_error(&map, &samples)?);
        }
        Command::Series { images, train: targs, feature, mode, repeats, threads, out } => {
            if repeats == 0 {
                return Err(Failure::Usage("--repeats must be at least 1".into()));
            }
            let feature = feature.mode();
            let cfg = SeriesConfig {
                train_mode: mode,
                train: checked(targs.config(1))?,
                feature,
                input: images,
                repeats,
                threads,
            };
            let report = run_series(&cfg)?;
            match out {
                Some(dir) => {
                    report.write_to(&dir)?;
                    print!("{}", report.to_text());
                }
                None => print!("{}", report.to_csv()),
            }
        }
        Command::Compare { a, b, welch, out } => {
            let ra = read_series(&a)?;
            let rb = read_series(&b)?;
            let result = if welch {
                stats::two_sample_t(&rb.qe_values(), &ra.qe_values(), false)?
            } else {
                compare_series(&ra, &rb)?
            };
            println!(
                "{}: mean={:.4} sd={:.4} sem={:.4} n={}",
                a.display(),
                ra.mean(),
                ra.sd(),
                ra.sem(),
                ra.entries.len()
            );
            println!(
                "{}: mean={:.4} sd={:.4} sem={:.4} n={}",
                b.display(),
                rb.mean(),
                rb.sd(),
                rb.sem(),
                rb.entries.len()
            );
            emit_stats(&[result], out.as_deref())?;
        }
        Command::Synth(cmd) => run_synth(cmd)?,
        Command::Stats(cmd) => run_stats(cmd)?,
        Command::Fixtures(FixturesCommand::Dump { table, out }) => {
            let csv = stats::published_table(table).to_csv();
            write_or_print(out.as_deref(), &csv)?;
        }
        Command::Reproduce { name, seeds, threads } => {
            let opts = ReproOptions { seeds: (0..seeds).collect(), threads };
            let report = reproduce(name, &opts)?;
            print!("{report}");
            if !report.passed() {
                return Err(Failure::Reproduction);
            }
        }
        Command::Plot { series, label, out } => {
            if !label.is_empty() && label.len() != series.len() {
                return Err(Failure::Usage(format!("{} labels for {} series", label.len(), series.len())));
            }
            let plots = series
                .iter()
                .enumerate()
                .map(|(i, path)| {
                    let report = read_series(path)?;
                    let name = label.get(i).cloned().unwrap_or_else(|| {
                        path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned())
                    });
                    Ok(PlotSeries::from_report(name, &report))
                })
                .collect::<Result<Vec<_>, Failure>>()?;
            emit_plot(&plots, &out)?;
        }
    }
    Ok(())
}

fn checked(cfg: TrainConfig) -> Result<TrainConfig, Failure> {
    cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(cfg)
}

fn run_synth(cmd: SynthCommand) -> Outcome {
    let (img, manifest, out) = match cmd {
        SynthCommand::Lesion { input, cx, cy, semi_a, semi_b, pattern, out } => {
            let base = read_image(&input)?;
            let spec = LesionSpec {
                semi_axis_a: semi_a,
                semi_axis_b: semi_b,
                pattern: match pattern {
                    PatternArg::Checker2 => LesionPattern::Checker2,
                    PatternArg::Solid => LesionPattern::Solid,
                },
                ..LesionSpec::at(cx, cy)
            };
            let img = synth::inject_lesion(&base, &spec).map_err(synth_failure)?;
            (img, format!("{}input={}\n", spec.manifest(), input.display()), out)
        }
        SynthCommand::Noise { input, seed, out } => {
            let base = read_image(&input)?;
            let img = synth::add_poisson_noise(&base, seed);
            (img, format!("kind=noise\nmodel=poisson\nseed={seed}\ninput={}\n", input.display()), out)
        }
        SynthCommand::Dots { seed, scale, width, height, n_dots, radius, michelson, supersample, out } => {
            let spec = DotFieldSpec {
                width,
                height,
                n_dots,
                base_radius: radius,
                michelson,
                scale,
                supersample,
                ..DotFieldSpec::default()
            };
            let img = synth::generate_dot_field(&spec, seed).map_err(synth_failure)?;
            (img, spec.manifest(seed), out)
        }
        SynthCommand::Phantom { seed, out } => {
            let spec = PhantomSpec::default();
            let img = synth::generate_phantom(&spec, seed).map_err(synth_failure)?;
            (img, spec.manifest(seed), out)
        }
    };
    write_image(&img, &out)?;
    let sidecar = manifest_path(&out);
    fs::write(&sidecar, manifest).map_err(|e| somqe::Error::io(&sidecar, e))?;
    Ok(())
}

fn synth_failure(e: synth::SynthError) -> Failure {
    match e {
        synth::SynthError::Image(e) => Failure::Run(e.into()),
        other => Failure::Usage(other.to_string()),
    }
}

/// `out.pgm` gets its manifest at `out.pgm.manifest`.
fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest");
    PathBuf::from(s)
}

fn run_stats(cmd: StatsCommand) -> Outcome {
    match cmd {
        StatsCommand::Ttest { csv, a, b, welch, out } => {
            let groups = read_groups(&csv)?;
            let pick = |name: Option<String>, default: usize| -> Result<Vec<f64>, Failure> {
                let idx = match name {
                    Some(n) => groups
                        .names
                        .iter()
                        .position(|g| *g == n)
                        .ok_or_else(|| Failure::Usage(format!("no column `{n}` in {}", csv.display())))?,
                    None => default,
                };
                groups
                    .values
                    .get(idx)
                    .cloned()
                    .ok_or_else(|| Failure::Usage(format!("{} has fewer than two columns", csv.display())))
            };
            let (ga, gb) = (pick(a, 0)?, pick(b, 1)?);
            emit_stats(&[stats::two_sample_t(&ga, &gb, !welch)?], out.as_deref())
        }
        StatsCommand::Anova { csv, out } => {
            let groups = read_groups(&csv)?;
            emit_stats(&[stats::one_way_anova(&groups.values)?], out.as_deref())
        }
    }
}

fn read_groups(path: &Path) -> Result<stats::Groups, Failure> {
    let file = fs::File::open(path).map_err(|e| somqe::Error::io(path, e))?;
    Ok(read_groups_csv(file)?)
}

fn read_series(path: &Path) -> Result<QeSeriesReport, Failure> {
    let text = fs::read_to_string(path).map_err(|e| somqe::Error::io(path, e))?;
    QeSeriesReport::from_csv(&text).map_err(|e| Failure::Run(somqe::Error::Series(format!("{}: {e}", path.display()))))
}

fn emit_stats(results: &[StatResult], out: Option<&Path>) -> Outcome {
    for r in results {
        println!("{r}");
    }
    if let Some(path) = out {
        let mut buf = Vec::new();
        write_results_csv(&mut buf, results).map_err(|e| somqe::Error::io(path, e))?;
        fs::write(path, buf).map_err(|e| somqe::Error::io(path, e))?;
    }
    Ok(())
}

fn write_or_print(out: Option<&Path>, text: &str) -> Outcome {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| somqe::Error::io(path, e).into()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
