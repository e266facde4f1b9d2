//! Command-line front end: `factorize`, `train`, `experiment`, `dataset-synth`.
//!
//! Settings are resolved in this order, later winning: built-in defaults, the
//! `--config` file, command-line flags. The seed is special: `--seed`, then the
//! config file, then `SANN_SEED`, then 1.
//!
//! Exit codes: 0 success, 1 at least one experiment verdict failed, 2 usage error or
//! missing input, 3 any other failure.

mod config;

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::dataset::{
    build_samples, load_pgm, mean_grayscale, read_manifest, synth_dataset, write_manifest, write_pgm, Image,
    ManifestRow, PgmFormat, Sample, SynthConfig,
};
use crate::error::{Result, SannError};
use crate::experiments::{
    run_experiment, ExperimentConfig, ExperimentId, SALIENT_INDICES, STREAM_DATA, STREAM_ENCODE, STREAM_NET, STREAM_NMF,
};
use crate::nmf::{nmf_factorize_traced, NmfModel};
use crate::numerics::{Matrix, Rng};
use crate::sann::{init_network, train_multi_trial, train_single_trial, SalienceMode, SalienceTag};

pub use config::{apply_setting, parse_config, Settings, CONFIG_KEYS};

pub const EXIT_OK: u8 = 0;
pub const EXIT_VERDICT: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_FAILURE: u8 = 3;

/// Default seed when neither flag, config file nor `SANN_SEED` provides one.
pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Parser)]
#[command(name = "sann", version, about = "Salience-affected neural networks")]
pub struct Cli {
    /// RNG seed [env: SANN_SEED] [default: 1]
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Flat `key = value` settings file; flags override it
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Factorize a face set into an NMF basis (writes model.nmf)
    Factorize {
        #[command(flatten)]
        source: Source,
        /// Basis rank
        #[arg(long)]
        rank: Option<usize>,
    },
    /// Train a network on NMF features (writes network.sann and curve.csv)
    Train {
        /// NMF model file from `factorize`
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        net: NetFlags,
        /// Salience-free training followed by one salience pass
        #[arg(long)]
        single_trial: bool,
    },
    /// Run one of the experiments E1..E6 (writes <ID>.csv and <ID>.verdict.txt)
    Experiment {
        /// Experiment id, E1..E6
        id: String,
        #[command(flatten)]
        net: NetFlags,
    },
    /// Write a synthetic face set as PGM files plus manifest.csv
    DatasetSynth {
        /// Number of images [default: 100]
        #[arg(long)]
        images: Option<usize>,
        /// Number of persons
        #[arg(long)]
        persons: Option<usize>,
    },
}

#[derive(Debug, Args)]
pub struct Source {
    /// Directory of .pgm images (and optional manifest.csv)
    #[arg(long, conflicts_with = "synthetic")]
    pub input: Option<PathBuf>,
    /// Generate this many synthetic images instead of reading --input
    #[arg(long)]
    pub synthetic: Option<usize>,
}

#[derive(Debug, Args)]
pub struct NetFlags {
    /// Training epochs
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Hidden layer size
    #[arg(long)]
    pub hidden: Option<usize>,
    /// Salience influence B, in (0, 1]
    #[arg(long)]
    pub b: Option<f64>,
    /// Threshold limit
    #[arg(long)]
    pub t_lim: Option<f64>,
    /// Salience amplification, >= 1 (single-trial factor for `train`, E6 sweep factor for `experiment`)
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub amplification: Option<u32>,
    /// Threshold update rule
    #[arg(long, value_parser = parse_mode)]
    pub mode: Option<SalienceMode>,
}

fn parse_mode(s: &str) -> std::result::Result<SalienceMode, String> {
    s.parse().map_err(|e: SannError| e.to_string())
}

/// Parses arguments, runs the command and maps the outcome to an exit code.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_OK });
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

/// Exit code for a failed command.
pub fn exit_code_for(err: &SannError) -> u8 {
    match err {
        SannError::Config(_) => EXIT_USAGE,
        SannError::Io(e) if e.kind() == std::io::ErrorKind::NotFound => EXIT_USAGE,
        _ => EXIT_FAILURE,
    }
}

/// Runs a parsed command; `Ok` carries the exit code.
pub fn run(cli: &Cli) -> Result<u8> {
    let file = match &cli.config {
        Some(path) => parse_config(&read_to_string(path)?)?,
        None => Vec::new(),
    };
    let env_seed = match std::env::var("SANN_SEED") {
        Ok(s) => Some(
            s.trim()
                .parse::<u64>()
                .map_err(|e| SannError::Config(format!("SANN_SEED {s:?}: {e}")))?,
        ),
        Err(_) => None,
    };
    let base = match &cli.command {
        Command::Experiment { id, .. } => ExperimentConfig::new(id.parse::<ExperimentId>()?),
        _ => ExperimentConfig::new(ExperimentId::E1),
    };
    let mut settings = Settings::new(base);
    settings.exp.seed = env_seed.unwrap_or(DEFAULT_SEED);
    for (key, value) in &file {
        apply_setting(&mut settings, key, value)?;
    }
    if let Some(seed) = cli.seed {
        settings.exp.seed = seed;
    }
    fs::create_dir_all(&cli.out)?;

    match &cli.command {
        Command::Factorize { source, rank } => {
            if let Some(r) = rank {
                settings.exp.nmf.rank = *r;
            }
            cmd_factorize(&settings, source, &cli.out)
        }
        Command::Train {
            model,
            source,
            net,
            single_trial,
        } => {
            apply_net_flags(&mut settings, net);
            settings.single_trial |= *single_trial;
            if let Some(a) = net.amplification {
                settings.amplification = a;
            }
            cmd_train(&settings, model, source, &cli.out)
        }
        Command::Experiment { net, .. } => {
            apply_net_flags(&mut settings, net);
            if let Some(a) = net.amplification {
                settings.exp.sweep_amplification = a;
            }
            cmd_experiment(&settings.exp, &cli.out)
        }
        Command::DatasetSynth { images, persons } => {
            if let Some(n) = images {
                settings.exp.n_images = *n;
            }
            if let Some(p) = persons {
                settings.exp.n_persons = *p;
            }
            cmd_dataset_synth(&settings.exp, &cli.out)
        }
    }
}

fn apply_net_flags(settings: &mut Settings, net: &NetFlags) {
    let exp = &mut settings.exp;
    if let Some(v) = net.epochs {
        exp.epochs = v;
    }
    if let Some(v) = net.hidden {
        exp.n_hidden = v;
    }
    if let Some(v) = net.b {
        exp.b = v;
    }
    if let Some(v) = net.t_lim {
        exp.t_lim = v;
    }
    if let Some(v) = net.mode {
        exp.mode = v;
    }
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| SannError::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| SannError::Io(e.error))?;
    Ok(())
}

/// Images with 1-based salience per image (from a manifest when there is one).
struct Loaded {
    images: Vec<Image>,
    salience: Vec<f64>,
}

fn default_salience(n: usize) -> Vec<f64> {
    (1..=n).map(|i| if SALIENT_INDICES.contains(&i) { 1.0 } else { 0.0 }).collect()
}

fn load_source(settings: &Settings, source: &Source) -> Result<Loaded> {
    match (&source.input, source.synthetic) {
        (Some(dir), _) => load_dir(dir),
        (None, Some(n)) => {
            let cfg = SynthConfig {
                n_images: n,
                n_persons: settings.exp.n_persons,
                noise_sigma: settings.exp.noise_sigma,
                ..SynthConfig::default()
            };
            let data = synth_dataset(&cfg, &mut Rng::new(settings.exp.seed).derive(STREAM_DATA))?;
            Ok(Loaded {
                salience: default_salience(n),
                images: data.images,
            })
        }
        (None, None) => Err(SannError::Config("one of --input or --synthetic is required".into())),
    }
}

fn load_dir(dir: &Path) -> Result<Loaded> {
    if !dir.is_dir() {
        return Err(SannError::Io(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("input directory {} not found", dir.display()),
        )));
    }
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    paths.retain(|p| p.extension().is_some_and(|e| e.eq_ignore_ascii_case("pgm")));
    paths.sort();
    if paths.is_empty() {
        return Err(SannError::Io(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("no .pgm files in {}", dir.display()),
        )));
    }
    let images = paths
        .iter()
        .map(|p| load_pgm(&fs::read(p)?).map_err(|e| SannError::Parse(format!("{}: {e}", p.display()))))
        .collect::<Result<Vec<_>>>()?;
    if images.iter().any(|i| (i.width(), i.height()) != (images[0].width(), images[0].height())) {
        return Err(SannError::Shape("images differ in size".into()));
    }
    let manifest = dir.join("manifest.csv");
    let salience = if manifest.is_file() {
        let rows = read_manifest(fs::File::open(&manifest)?)?;
        let mut s = vec![0.0; images.len()];
        for r in rows {
            if r.index == 0 || r.index > images.len() {
                return Err(SannError::Parse(format!("manifest index {} out of range", r.index)));
            }
            s[r.index - 1] = r.salience;
        }
        s
    } else {
        default_salience(images.len())
    };
    Ok(Loaded { images, salience })
}

fn cmd_factorize(settings: &Settings, source: &Source, out: &Path) -> Result<u8> {
    let loaded = load_source(settings, source)?;
    let columns: Vec<Vec<f64>> = loaded.images.iter().map(|i| i.pixels().to_vec()).collect();
    let v = Matrix::from_columns(&columns)?;
    let fit = nmf_factorize_traced(&v, &settings.exp.nmf, &mut Rng::new(settings.exp.seed).derive(STREAM_NMF))?;
    let path = out.join("model.nmf");
    write_atomic(&path, fit.model.to_text().as_bytes())?;
    println!("wrote {}", path.display());
    let r = fit.final_residual();
    println!(
        "final residual {r:.6e} (relative {:.6e}) after {} sweeps",
        r / v.frobenius_norm(),
        fit.residuals.len() - 1
    );
    Ok(EXIT_OK)
}

fn cmd_train(settings: &Settings, model_path: &Path, source: &Source, out: &Path) -> Result<u8> {
    let exp = &settings.exp;
    let model = NmfModel::from_text(&read_to_string(model_path)?)?;
    let loaded = load_source(settings, source)?;
    if model.w().rows() != loaded.images[0].pixels().len() {
        return Err(SannError::Shape(format!(
            "model basis has {} pixels, images have {}",
            model.w().rows(),
            loaded.images[0].pixels().len()
        )));
    }
    let mut nmf = exp.nmf;
    nmf.rank = model.rank();
    let root = Rng::new(exp.seed);
    let (samples, _) = build_samples(&loaded.images, model.w(), &nmf, None, &root.derive(STREAM_ENCODE))?;
    let samples: Vec<Sample> = samples
        .into_iter()
        .zip(&loaded.salience)
        .map(|(s, &sal)| Sample {
            tag: SalienceTag::new(sal),
            ..s
        })
        .collect();
    let mut net = init_network(nmf.rank, exp.n_hidden, 1, exp.t_lim, exp.b, &mut root.derive(STREAM_NET))?;
    let params = exp.train_params();
    let curve = if settings.single_trial {
        train_single_trial(&mut net, &samples, &params, settings.amplification)?
    } else {
        train_multi_trial(&mut net, &samples, &params)?
    };
    let net_path = out.join("network.sann");
    write_atomic(&net_path, net.to_text().as_bytes())?;
    let mut csv = String::from("epoch,error\n");
    for (i, e) in curve.iter().enumerate() {
        csv.push_str(&format!("{},{e:.9e}\n", i + 1));
    }
    let curve_path = out.join("curve.csv");
    write_atomic(&curve_path, csv.as_bytes())?;
    println!(
        "trained {}-{}-1 for {} epochs: error {:.6e} -> {:.6e}",
        nmf.rank,
        exp.n_hidden,
        curve.len(),
        curve[0],
        curve[curve.len() - 1]
    );
    println!("wrote {} and {}", net_path.display(), curve_path.display());
    Ok(EXIT_OK)
}

fn cmd_experiment(cfg: &ExperimentConfig, out: &Path) -> Result<u8> {
    let report = run_experiment(cfg)?;
    let csv_path = out.join(format!("{}.csv", cfg.id));
    let verdict_path = out.join(format!("{}.verdict.txt", cfg.id));
    write_atomic(&csv_path, report.to_csv().as_bytes())?;
    let text = report.verdict_text();
    write_atomic(&verdict_path, text.as_bytes())?;
    for line in text.lines().filter(|l| !l.starts_with('#')) {
        println!("{line}");
    }
    Ok(if report.all_passed() { EXIT_OK } else { EXIT_VERDICT })
}

fn cmd_dataset_synth(exp: &ExperimentConfig, out: &Path) -> Result<u8> {
    let cfg = SynthConfig {
        n_images: exp.n_images,
        n_persons: exp.n_persons,
        noise_sigma: exp.noise_sigma,
        ..SynthConfig::default()
    };
    let data = synth_dataset(&cfg, &mut Rng::new(exp.seed).derive(STREAM_DATA))?;
    let salience = default_salience(data.images.len());
    let mut rows = Vec::with_capacity(data.images.len());
    for (i, img) in data.images.iter().enumerate() {
        let name = format!("face_{:04}.pgm", i + 1);
        write_atomic(&out.join(&name), &write_pgm(img, PgmFormat::Raw))?;
        rows.push(ManifestRow {
            index: i + 1,
            person: data.persons[i],
            source: name,
            target: mean_grayscale(img)?,
            salience: salience[i],
        });
    }
    let mut buf = Vec::new();
    write_manifest(&mut buf, &rows)?;
    write_atomic(&out.join("manifest.csv"), &buf)?;
    println!("wrote {} images and manifest.csv to {}", rows.len(), out.display());
    Ok(EXIT_OK)
}
