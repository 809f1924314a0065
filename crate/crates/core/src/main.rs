use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use texseg::colltex::CollTexConfig;
use texseg::dataset::{generate_dataset, run_baseline_dataset, CorpusInfo, Generator};
use texseg::matcher::{Aggregation, Centering, FilterBankConfig};
use texseg::metrics::{evaluate_dataset, DEFAULT_THRESHOLD};
use texseg::omniglot::{load_glyphs, OmniglotConfig};
use texseg::{load_textures, Split};

#[derive(Debug, Parser)]
#[command(
    name = "texseg",
    version,
    about = "One-shot texture segmentation benchmark tooling"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Synthesize a benchmark dataset.
    #[command(subcommand)]
    Generate(GenerateCommand),
    /// Run the non-learned matching baseline.
    #[command(subcommand)]
    Baseline(BaselineCommand),
    /// Score predictions against a dataset's ground truth.
    Eval(EvalArgs),
    /// Inspect the deterministic train/test split.
    #[command(subcommand)]
    Split(SplitCommand),
}

#[derive(Debug, Subcommand)]
enum GenerateCommand {
    /// Collages of textures over a nearest-anchor partition.
    Colltex(ColltexArgs),
    /// Textured characters composited with occlusion.
    Omniglot(OmniglotArgs),
}

#[derive(Debug, Subcommand)]
enum BaselineCommand {
    Run(BaselineArgs),
}

#[derive(Debug, Subcommand)]
enum SplitCommand {
    Export(SplitArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SplitArg {
    Train,
    Test,
}

impl From<SplitArg> for Split {
    fn from(s: SplitArg) -> Self {
        match s {
            SplitArg::Train => Split::Train,
            SplitArg::Test => Split::Test,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ReportFormat {
    Json,
    Table,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CenteringArg {
    None,
    MidGray,
    InputMean,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    Mean,
    Xcorr,
}

/// `MIN..MAX` or a single value.
fn parse_range(s: &str) -> Result<[usize; 2], String> {
    let parse = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("{v:?}: {e}"));
    let (lo, hi) = match s.split_once("..") {
        Some((a, b)) => (parse(a)?, parse(b.trim_start_matches('='))?),
        None => {
            let v = parse(s)?;
            (v, v)
        }
    };
    if lo > hi {
        return Err(format!("empty range {lo}..{hi}"));
    }
    Ok([lo, hi])
}

fn default_workers() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

#[derive(Debug, Args)]
struct CommonGenerate {
    /// Directory of texture images (PNG or JPEG).
    #[arg(long)]
    textures: PathBuf,
    /// Output dataset directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 10)]
    num_samples: u64,
    /// Global seed; sample i depends only on (seed, i).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Reference patch side, `MIN..MAX` or a single value.
    #[arg(long, value_parser = parse_range, default_value = "64")]
    patch_size: [usize; 2],
    #[arg(long, value_enum, default_value_t = SplitArg::Train)]
    split: SplitArg,
    /// Worker threads; never changes the output.
    #[arg(long, env = "TEXSEG_WORKERS")]
    workers: Option<usize>,
    /// Number of held-out textures.
    #[arg(long, default_value_t = 100)]
    holdout: usize,
    /// Seed of the train/test split.
    #[arg(long, default_value_t = 0)]
    split_seed: u64,
}

#[derive(Debug, Args)]
struct ColltexArgs {
    #[command(flatten)]
    common: CommonGenerate,
    /// Number of regions, `MIN..MAX` or a single value.
    #[arg(long, value_parser = parse_range, default_value = "2..10")]
    regions: [usize; 2],
    /// Allow several regions to share a texture.
    #[arg(long)]
    with_replacement: bool,
}

#[derive(Debug, Args)]
struct OmniglotArgs {
    #[command(flatten)]
    common: CommonGenerate,
    /// Directory of 105×105 character images.
    #[arg(long)]
    glyphs: PathBuf,
    /// Characters per image.
    #[arg(long, default_value_t = 8)]
    chars: usize,
    /// Fill the background with a distinct texture.
    #[arg(long)]
    background: bool,
    /// Textures are already short-scale; crop them instead of synthesizing.
    #[arg(long)]
    presynthesized: bool,
    /// Number of held-out characters.
    #[arg(long, default_value_t = 100)]
    glyph_holdout: usize,
}

#[derive(Debug, Args)]
struct BaselineArgs {
    /// Dataset directory to segment.
    #[arg(long)]
    truth: PathBuf,
    /// Prediction output directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::Mean)]
    mode: Mode,
    /// Cosine-similarity threshold of the baseline segmentation.
    #[arg(long, default_value_t = 0.55)]
    threshold: f64,
    /// Feature origin subtracted before normalisation.
    #[arg(long, value_enum, default_value_t = CenteringArg::InputMean)]
    centering: CenteringArg,
    #[arg(long, env = "TEXSEG_WORKERS")]
    workers: Option<usize>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// Prediction directory (`samples/<id>/pred.png` or `mask.png`).
    #[arg(long)]
    pred: PathBuf,
    /// Dataset directory holding the ground truth.
    #[arg(long)]
    truth: PathBuf,
    /// Binarization threshold for predicted probabilities.
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    threshold: f64,
    #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
    report: ReportFormat,
    /// Also write the report to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SplitArgs {
    /// Texture directory to split.
    #[arg(long, conflicts_with = "glyphs", required_unless_present = "glyphs")]
    textures: Option<PathBuf>,
    /// Character directory to split.
    #[arg(long)]
    glyphs: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    holdout: usize,
    #[arg(long, default_value_t = 0)]
    split_seed: u64,
    /// Output JSON file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn display(p: &Path) -> String {
    p.display().to_string()
}

fn generate_colltex(args: ColltexArgs) -> anyhow::Result<()> {
    let c = &args.common;
    let store = load_textures(&c.textures, c.holdout, c.split_seed)?;
    let config = CollTexConfig {
        patch_size_range: c.patch_size,
        regions_range: args.regions,
        textures_with_replacement: args.with_replacement,
        split: c.split.into(),
        global_seed: c.seed,
        ..Default::default()
    };
    config.validate()?;
    let corpus = CorpusInfo {
        textures: display(&c.textures),
        num_textures: store.len(),
        texture_holdout: c.holdout,
        glyphs: None,
        num_glyphs: None,
        glyph_holdout: None,
        split_seed: c.split_seed,
    };
    let generator = Generator::CollTex {
        config: &config,
        store: &store,
    };
    let workers = c.workers.unwrap_or_else(default_workers);
    let manifest = generate_dataset(generator, corpus, &c.out, c.num_samples, workers)
        .with_context(|| format!("generating collages into {}", c.out.display()))?;
    eprintln!(
        "wrote {} samples to {}",
        manifest.samples.len(),
        c.out.display()
    );
    Ok(())
}

fn generate_omniglot(args: OmniglotArgs) -> anyhow::Result<()> {
    let c = &args.common;
    let store = load_textures(&c.textures, c.holdout, c.split_seed)?;
    let glyphs = load_glyphs(&args.glyphs, args.glyph_holdout, c.split_seed)?;
    let config = OmniglotConfig {
        num_characters: args.chars,
        background_textured: args.background,
        patch_size_range: c.patch_size,
        split: c.split.into(),
        global_seed: c.seed,
        use_synth_textures: !args.presynthesized,
        ..Default::default()
    };
    config.validate()?;
    let corpus = CorpusInfo {
        textures: display(&c.textures),
        num_textures: store.len(),
        texture_holdout: c.holdout,
        glyphs: Some(display(&args.glyphs)),
        num_glyphs: Some(glyphs.len()),
        glyph_holdout: Some(args.glyph_holdout),
        split_seed: c.split_seed,
    };
    let generator = Generator::Omniglot {
        config: &config,
        glyphs: &glyphs,
        store: &store,
    };
    let workers = c.workers.unwrap_or_else(default_workers);
    let manifest = generate_dataset(generator, corpus, &c.out, c.num_samples, workers)
        .with_context(|| format!("generating scenes into {}", c.out.display()))?;
    eprintln!(
        "wrote {} samples to {}",
        manifest.samples.len(),
        c.out.display()
    );
    Ok(())
}

fn baseline(args: BaselineArgs) -> anyhow::Result<()> {
    let cfg = FilterBankConfig {
        aggregation: match args.mode {
            Mode::Mean => Aggregation::MeanReference,
            Mode::Xcorr => Aggregation::FullXcorr,
        },
        threshold: args.threshold,
        centering: match args.centering {
            CenteringArg::None => Centering::None,
            CenteringArg::MidGray => Centering::MidGray,
            CenteringArg::InputMean => Centering::InputMean,
        },
        ..Default::default()
    };
    let workers = args.workers.unwrap_or_else(default_workers);
    let run = run_baseline_dataset(&args.truth, &args.out, &cfg, workers)?;
    eprintln!(
        "wrote {} predictions to {}",
        run.samples.len(),
        args.out.display()
    );
    Ok(())
}

fn eval(args: EvalArgs) -> anyhow::Result<()> {
    let report = evaluate_dataset(&args.pred, &args.truth, args.threshold)?;
    let text = match args.report {
        ReportFormat::Json => serde_json::to_string_pretty(&report)? + "\n",
        ReportFormat::Table => report.to_table(),
    };
    print!("{text}");
    if let Some(out) = &args.out {
        std::fs::write(out, &text).with_context(|| format!("writing {}", out.display()))?;
    }
    Ok(())
}

fn split_export(args: SplitArgs) -> anyhow::Result<()> {
    let manifest = match (&args.textures, &args.glyphs) {
        (Some(dir), None) => load_textures(dir, args.holdout, args.split_seed)?.split_manifest(),
        (None, Some(dir)) => load_glyphs(dir, args.holdout, args.split_seed)?.split_manifest(),
        _ => bail!("pass exactly one of --textures or --glyphs"),
    };
    let text = serde_json::to_string_pretty(&manifest)? + "\n";
    match &args.out {
        Some(out) => {
            std::fs::write(out, text).with_context(|| format!("writing {}", out.display()))?
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Generate(GenerateCommand::Colltex(a)) => generate_colltex(a),
        Command::Generate(GenerateCommand::Omniglot(a)) => generate_omniglot(a),
        Command::Baseline(BaselineCommand::Run(a)) => baseline(a),
        Command::Eval(a) => eval(a),
        Command::Split(SplitCommand::Export(a)) => split_export(a),
    }
}

/// The error chain, skipping causes an outer message already quotes.
fn describe(e: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in e.chain() {
        let text = cause.to_string();
        if !out.contains(&text) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&text);
        }
    }
    out
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Help and version requests are not usage errors.
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("texseg: error: {}", describe(&e));
            ExitCode::from(2)
        }
    }
}
