//! Command-line front end: embedding, extraction, attack simulation, batch
//! evaluation, identity verification, and inspection helpers.
//!
//! Exit codes: 0 on success, 2 for parameter/size/IO problems, 3 when
//! extraction completes but the fragile channel reports tampering, 1 when
//! `verify` finds identity residuals out of tolerance.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use sobomark_core::{
    ber, embed, extract, psnr, run_identity_suite, ChannelPolicy, ExtractReport, IdentityGrid,
    MomentBasis, MultiImage, WatermarkParams, BLOCK, EPS_ID, WM_BITS, WM_SIDE,
};

use crate::attacks::{self, AttackKind, AttackSpec};
use crate::imgio;
use crate::keyfile::{self, KeyMaterial};
use crate::presets::{self, Preset};
use crate::report::{self, EmbedSidecar, EvalRow};
use crate::testimage;

#[derive(Parser, Debug)]
#[command(
    name = "sobomark",
    version,
    about = "Dual robust/fragile image watermarking on discrete orthogonal moments"
)]
pub struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Embed a 64x64 watermark into a cover image
    Embed(EmbedArgs),
    /// Recover the watermark and tamper map from a marked image
    Extract(ExtractArgs),
    /// Apply a single simulated attack to an image
    Attack(AttackArgs),
    /// Batch embed/attack/extract sweep producing a CSV report
    Evaluate(EvaluateArgs),
    /// Check the polynomial identity suite at a parameter set
    Verify(VerifyArgs),
    /// Inspect the weighted moment basis
    Basis(BasisArgs),
    /// List or dump parameter presets
    Preset(PresetArgs),
    /// Generate a deterministic synthetic cover image
    GenCover(GenCoverArgs),
}

#[derive(Clone, Copy, ValueEnum, Debug)]
enum Channels {
    /// Embed the robust payload in the blue plane only (last plane wins
    /// for grayscale input)
    Blue,
    /// Embed in every plane and extract by majority vote
    All,
}

impl Channels {
    fn policy(self) -> ChannelPolicy {
        match self {
            Channels::Blue => ChannelPolicy::Blue,
            Channels::All => ChannelPolicy::All,
        }
    }

    fn label(self) -> &'static str {
        match self {
            Channels::Blue => "blue",
            Channels::All => "all",
        }
    }
}

#[derive(Args, Debug, Clone)]
struct PresetOpt {
    /// Built-in preset name (see `preset list`)
    #[arg(long, default_value = "CS_I")]
    preset: String,
    /// Load the preset from a key=value file instead
    #[arg(long, conflicts_with = "preset")]
    preset_file: Option<PathBuf>,
    /// Override the quantization step
    #[arg(long)]
    delta: Option<f64>,
    /// Override the carrier coefficient (zigzag position, 0-based)
    #[arg(long)]
    coeff_index: Option<usize>,
}

impl PresetOpt {
    fn resolve(&self) -> Result<Preset> {
        let mut p = match &self.preset_file {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                presets::parse(&text)?
            }
            None => presets::find(&self.preset)?,
        };
        if let Some(d) = self.delta {
            if !(d > 0.0) {
                bail!("--delta must be positive");
            }
            p.qim_delta = d;
        }
        if let Some(i) = self.coeff_index {
            if i >= BLOCK * BLOCK {
                bail!("--coeff-index must be below {}", BLOCK * BLOCK);
            }
            p.coeff_index = i;
        }
        Ok(p)
    }
}

#[derive(Args, Debug, Clone)]
struct KeyOpt {
    /// Secret key file with kappa=/kappa_hex=, x0=, chaos_mu= lines
    #[arg(long)]
    key_file: PathBuf,
    /// Override the chaotic seed from the key file
    #[arg(long)]
    x0: Option<f64>,
    /// Override the chaotic map parameter from the key file
    #[arg(long)]
    chaos_mu: Option<f64>,
}

impl KeyOpt {
    fn resolve(&self) -> Result<KeyMaterial> {
        let text = std::fs::read_to_string(&self.key_file)
            .with_context(|| format!("reading {}", self.key_file.display()))?;
        let mut km = keyfile::parse(&text)?;
        if let Some(x0) = self.x0 {
            km.x0 = x0;
        }
        if let Some(mu) = self.chaos_mu {
            km.mu_c = mu;
        }
        km.chaos_key()?; // re-validate after overrides
        Ok(km)
    }
}

#[derive(Args, Debug)]
struct EmbedArgs {
    /// Cover image (PNG or BMP, 8x8-aligned, at least 512x512)
    #[arg(long)]
    cover: PathBuf,
    /// 64x64 watermark bitmap (.pbm, .bin, .png, .bmp)
    #[arg(long)]
    watermark: PathBuf,
    #[command(flatten)]
    key: KeyOpt,
    #[command(flatten)]
    preset: PresetOpt,
    /// Robust-channel policy
    #[arg(long, value_enum, default_value_t = Channels::Blue)]
    channels: Channels,
    /// Output path; defaults to `<cover>-marked.<ext>`
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ExtractArgs {
    /// Marked image
    #[arg(long)]
    image: PathBuf,
    #[command(flatten)]
    key: KeyOpt,
    #[command(flatten)]
    preset: PresetOpt,
    #[arg(long, value_enum, default_value_t = Channels::Blue)]
    channels: Channels,
    /// Recovered watermark path; defaults to `<image>-watermark.pbm`
    #[arg(long)]
    out: Option<PathBuf>,
    /// Tamper-map image path; defaults to `<image>-tamper.png`
    #[arg(long)]
    tamper_map: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AttackArgs {
    /// Image to degrade
    #[arg(long)]
    image: PathBuf,
    /// Attack name (cropping, fourier-ellipsoid, gaussian,
    /// gaussian-laplace, minimum-filter, salt-pepper)
    #[arg(long)]
    attack: String,
    /// Attack strength parameter
    #[arg(long)]
    param: f64,
    /// RNG seed for stochastic attacks
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path; defaults to `<image>-attacked.<ext>`
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    /// Directory scanned for PNG/BMP cover images
    #[arg(long)]
    cover_dir: Option<PathBuf>,
    /// Individual cover image (repeatable, appended to --cover-dir finds)
    #[arg(long = "cover")]
    covers: Vec<PathBuf>,
    /// Preset name (repeatable; defaults to CS_I)
    #[arg(long = "preset")]
    preset_names: Vec<String>,
    /// Watermark bitmap; a seeded random payload is used when omitted
    #[arg(long)]
    watermark: Option<PathBuf>,
    #[command(flatten)]
    key: KeyOpt,
    #[arg(long, value_enum, default_value_t = Channels::Blue)]
    channels: Channels,
    /// Seed for the generated payload and for stochastic attacks
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Where to write the CSV report
    #[arg(long)]
    csv: PathBuf,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    preset: PresetOpt,
    /// Check every built-in preset instead of one
    #[arg(long)]
    all: bool,
    /// Highest polynomial degree exercised
    #[arg(long, default_value_t = 8)]
    n_max: usize,
    /// Highest lattice point exercised (from 0)
    #[arg(long, default_value_t = 20)]
    x_max: i64,
}

#[derive(Args, Debug)]
struct BasisArgs {
    #[command(subcommand)]
    cmd: BasisCmd,
}

#[derive(Subcommand, Debug)]
enum BasisCmd {
    /// Print the weighted basis table as CSV (rows = degree, cols = x)
    Dump(BasisDumpArgs),
}

#[derive(Args, Debug)]
struct BasisDumpArgs {
    #[command(flatten)]
    preset: PresetOpt,
    /// Basis size (block side)
    #[arg(long, default_value_t = BLOCK)]
    n: usize,
    /// Output file; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PresetArgs {
    #[command(subcommand)]
    cmd: PresetCmd,
}

#[derive(Subcommand, Debug)]
enum PresetCmd {
    /// List built-in presets
    List,
    /// Print one preset in key=value form
    Dump { name: String },
}

#[derive(Args, Debug)]
struct GenCoverArgs {
    /// Output image path (PNG or BMP)
    #[arg(long)]
    out: PathBuf,
    /// Square side length
    #[arg(long, default_value_t = 512)]
    side: usize,
    /// Generate three planes instead of one
    #[arg(long)]
    rgb: bool,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

/// Parse argv and run. Returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // Help/version requests print and succeed; usage errors exit 2.
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    init_threads();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            2
        }
    }
}

/// Honour the SOBOMARK_THREADS cap before any parallel work starts.
fn init_threads() {
    if let Ok(raw) = std::env::var("SOBOMARK_THREADS") {
        if let Ok(n) = raw.parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

fn run(cli: Cli) -> Result<i32> {
    match cli.cmd {
        Cmd::Embed(a) => cmd_embed(a),
        Cmd::Extract(a) => cmd_extract(a),
        Cmd::Attack(a) => cmd_attack(a),
        Cmd::Evaluate(a) => cmd_evaluate(a),
        Cmd::Verify(a) => cmd_verify(a),
        Cmd::Basis(a) => match a.cmd {
            BasisCmd::Dump(d) => cmd_basis_dump(d),
        },
        Cmd::Preset(a) => match a.cmd {
            PresetCmd::List => cmd_preset_list(),
            PresetCmd::Dump { name } => cmd_preset_dump(&name),
        },
        Cmd::GenCover(a) => cmd_gen_cover(a),
    }
}

fn with_suffix(path: &Path, suffix: &str, force_ext: Option<&str>) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let ext = force_ext
        .map(str::to_owned)
        .or_else(|| path.extension().and_then(|e| e.to_str()).map(str::to_owned))
        .unwrap_or_else(|| "png".into());
    path.with_file_name(format!("{stem}{suffix}.{ext}"))
}

/// Everything needed to run the pipeline repeatedly with one parameter set.
pub struct Engine {
    pub preset: Preset,
    pub km: KeyMaterial,
    pub policy: ChannelPolicy,
    basis: MomentBasis,
}

impl Engine {
    pub fn new(preset: Preset, km: KeyMaterial, policy: ChannelPolicy) -> Result<Self> {
        let sf = preset.sobolev_family()?;
        let basis = MomentBasis::build(&sf, BLOCK)
            .map_err(|e| anyhow::anyhow!("building moment basis: {e}"))?;
        Ok(Engine {
            preset,
            km,
            policy,
            basis,
        })
    }

    fn params(&self) -> Result<WatermarkParams<'_>> {
        Ok(WatermarkParams {
            basis: &self.basis,
            key: self.km.chaos_key()?,
            kappa: &self.km.kappa,
            delta: self.preset.qim_delta,
            coeff_index: self.preset.coeff_index,
            policy: self.policy,
        })
    }

    pub fn embed(&self, cover: &MultiImage, bits: &[u8]) -> Result<MultiImage> {
        embed(cover, bits, &self.params()?).map_err(|e| anyhow::anyhow!("embedding: {e}"))
    }

    pub fn extract(&self, img: &MultiImage) -> Result<ExtractReport> {
        extract(img, &self.params()?).map_err(|e| anyhow::anyhow!("extracting: {e}"))
    }
}

fn load_watermark_bits(path: &Path) -> Result<Vec<u8>> {
    let (w, h, bits) = imgio::load_bits(path)?;
    if w != WM_SIDE || h != WM_SIDE {
        bail!(
            "{}: watermark must be {WM_SIDE}x{WM_SIDE}, got {w}x{h}",
            path.display()
        );
    }
    Ok(bits)
}

fn cmd_embed(a: EmbedArgs) -> Result<i32> {
    let preset = a.preset.resolve()?;
    let km = a.key.resolve()?;
    let cover = imgio::load_image(&a.cover)?;
    let bits = load_watermark_bits(&a.watermark)?;
    let engine = Engine::new(preset, km, a.channels.policy())?;
    let marked = engine.embed(&cover, &bits)?;
    let out = a
        .out
        .unwrap_or_else(|| with_suffix(&a.cover, "-marked", None));
    imgio::save_image(&marked, &out)?;
    report::write_sidecar(
        &EmbedSidecar {
            preset: &engine.preset,
            delta: engine.preset.qim_delta,
            coeff_index: engine.preset.coeff_index,
            channels: a.channels.label(),
            kappa_sha256: report::kappa_digest(&engine.km.kappa),
            x0: engine.km.x0,
            chaos_mu: engine.km.mu_c,
        },
        &out,
    )?;
    let (db, _) = psnr(&cover, &marked).map_err(|e| anyhow::anyhow!("{e}"))?;
    println!("marked={} psnr_db={db:.4}", out.display());
    Ok(0)
}

fn cmd_extract(a: ExtractArgs) -> Result<i32> {
    let preset = a.preset.resolve()?;
    let km = a.key.resolve()?;
    let img = imgio::load_image(&a.image)?;
    let engine = Engine::new(preset, km, a.channels.policy())?;
    let rep = engine.extract(&img)?;

    let out = a
        .out
        .unwrap_or_else(|| with_suffix(&a.image, "-watermark", Some("pbm")));
    imgio::save_bits(&rep.bits, WM_SIDE, WM_SIDE, &out)?;

    let map_path = a
        .tamper_map
        .unwrap_or_else(|| with_suffix(&a.image, "-tamper", Some("png")));
    // Tamper map image: white = signature verified, black = failed.
    imgio::save_bits(&rep.tamper_map, rep.map_w, rep.map_h, &map_path)?;

    println!(
        "watermark={} tamper_map={} authentic={}",
        out.display(),
        map_path.display(),
        rep.authentic
    );
    Ok(if rep.authentic { 0 } else { 3 })
}

fn cmd_attack(a: AttackArgs) -> Result<i32> {
    let kind = AttackKind::from_name(&a.attack)?;
    let img = imgio::load_image(&a.image)?;
    let spec = AttackSpec {
        kind,
        param: a.param,
        seed: a.seed,
    };
    let out_img = attacks::apply(&img, &spec)?;
    let out = a
        .out
        .unwrap_or_else(|| with_suffix(&a.image, "-attacked", None));
    imgio::save_image(&out_img, &out)?;
    println!("attacked={}", out.display());
    Ok(0)
}

/// Deterministic pseudo-random payload for evaluation runs without an
/// explicit watermark file.
fn generated_payload(seed: u64) -> Vec<u8> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x5f5f_5f5f);
    (0..WM_BITS).map(|_| rng.gen_range(0..=1u8)).collect()
}

fn gather_covers(a: &EvaluateArgs) -> Result<Vec<PathBuf>> {
    let mut covers = Vec::new();
    if let Some(dir) = &a.cover_dir {
        let entries =
            std::fs::read_dir(dir).with_context(|| format!("reading {}", dir.display()))?;
        let mut found: Vec<PathBuf> = entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| {
                matches!(
                    p.extension().and_then(|e| e.to_str()),
                    Some("png") | Some("bmp") | Some("PNG") | Some("BMP")
                )
            })
            .collect();
        found.sort();
        covers.extend(found);
    }
    covers.extend(a.covers.iter().cloned());
    if covers.is_empty() {
        bail!("no cover images given (use --cover-dir or --cover)");
    }
    Ok(covers)
}

fn cmd_evaluate(a: EvaluateArgs) -> Result<i32> {
    let covers = gather_covers(&a)?;
    let preset_names = if a.preset_names.is_empty() {
        vec!["CS_I".to_string()]
    } else {
        a.preset_names.clone()
    };
    let presets: Vec<Preset> = preset_names
        .iter()
        .map(|n| presets::find(n))
        .collect::<Result<_>>()?;
    let km = a.key.resolve()?;
    let bits = match &a.watermark {
        Some(p) => load_watermark_bits(p)?,
        None => generated_payload(a.seed),
    };

    let mut jobs = Vec::new();
    for cover_path in &covers {
        for preset in &presets {
            jobs.push((cover_path.clone(), preset.clone()));
        }
    }

    let policy = a.channels.policy();
    let rows: Vec<Vec<EvalRow>> = jobs
        .par_iter()
        .map(|(cover_path, preset)| -> Result<Vec<EvalRow>> {
            let cover = imgio::load_image(cover_path)?;
            let engine = Engine::new(preset.clone(), km.clone(), policy)?;
            let marked = engine.embed(&cover, &bits)?;
            let image_label = cover_path
                .file_name()
                .and_then(|s| s.to_str())
                .unwrap_or("cover")
                .to_string();

            let mut out = Vec::with_capacity(1 + 6 * 8);
            let (db, _) = psnr(&cover, &marked).map_err(|e| anyhow::anyhow!("{e}"))?;
            let clean = engine.extract(&marked)?;
            out.push(EvalRow {
                image: image_label.clone(),
                preset: preset.name.clone(),
                attack: "none".into(),
                param: 0.0,
                psnr_db: Some(db),
                ber: Some(ber(&clean.bits, &bits).map_err(|e| anyhow::anyhow!("{e}"))?),
                authentic: clean.authentic,
            });
            for kind in AttackKind::ALL {
                for param in kind.grid() {
                    let spec = AttackSpec {
                        kind,
                        param,
                        seed: a.seed,
                    };
                    let attacked = attacks::apply(&marked, &spec)?;
                    let rep = engine.extract(&attacked)?;
                    out.push(EvalRow {
                        image: image_label.clone(),
                        preset: preset.name.clone(),
                        attack: kind.name().into(),
                        param,
                        psnr_db: None,
                        ber: Some(ber(&rep.bits, &bits).map_err(|e| anyhow::anyhow!("{e}"))?),
                        authentic: rep.authentic,
                    });
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let flat: Vec<EvalRow> = rows.into_iter().flatten().collect();
    report::write_csv(&flat, &a.csv)?;
    println!("csv={} rows={}", a.csv.display(), flat.len());
    Ok(0)
}

fn cmd_verify(a: VerifyArgs) -> Result<i32> {
    let targets: Vec<Preset> = if a.all {
        presets::builtins()
    } else {
        vec![a.preset.resolve()?]
    };
    if a.n_max == 0 {
        bail!("--n-max must be at least 1");
    }
    let grid = IdentityGrid {
        n_lo: 1,
        n_hi: a.n_max,
        x_lo: 0,
        x_hi: a.x_max,
    };
    let mut all_ok = true;
    for preset in targets {
        let sf = preset.sobolev_family()?;
        let outcomes =
            run_identity_suite(&sf, &grid).map_err(|e| anyhow::anyhow!("{}: {e}", preset.name))?;
        println!(
            "preset={} n<={} x<={} tolerance={EPS_ID:.1e}",
            preset.name, a.n_max, a.x_max
        );
        for o in outcomes {
            let ok = o.passed(EPS_ID);
            all_ok &= ok;
            println!(
                "  {:<28} max {:>10.3e} at n={} x={} points={} skipped={} {}",
                o.kind.name(),
                o.max_ratio,
                o.worst_n,
                o.worst_x,
                o.points,
                o.skipped,
                if ok { "pass" } else { "FAIL" }
            );
        }
    }
    println!("result: {}", if all_ok { "pass" } else { "FAIL" });
    Ok(if all_ok { 0 } else { 1 })
}

fn cmd_basis_dump(a: BasisDumpArgs) -> Result<i32> {
    let preset = a.preset.resolve()?;
    if a.n == 0 {
        bail!("--n must be at least 1");
    }
    let sf = preset.sobolev_family()?;
    let basis =
        MomentBasis::build(&sf, a.n).map_err(|e| anyhow::anyhow!("building moment basis: {e}"))?;
    let mut text = String::new();
    text.push_str("degree");
    for x in 0..a.n {
        text.push_str(&format!(",x{x}"));
    }
    text.push('\n');
    for k in 0..a.n {
        text.push_str(&format!("{k}"));
        for x in 0..a.n {
            // 17 significant digits: enough to reproduce the f64 exactly.
            text.push_str(&format!(",{:.16e}", basis.value(k, x)));
        }
        text.push('\n');
    }
    match a.out {
        Some(path) => {
            std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
            println!("basis={}", path.display());
        }
        None => print!("{text}"),
    }
    Ok(0)
}

fn cmd_preset_list() -> Result<i32> {
    for p in presets::builtins() {
        let gamma = p.gamma.map(|g| format!(" gamma={g}")).unwrap_or_default();
        println!(
            "{:<6} family={} mu={}{gamma} lambda={:e} alpha={} j={} delta={} coeff={}",
            p.name, p.family, p.mu, p.lambda, p.alpha, p.j, p.qim_delta, p.coeff_index
        );
    }
    Ok(0)
}

fn cmd_preset_dump(name: &str) -> Result<i32> {
    let p = presets::find(name)?;
    print!("{}", p.dump());
    Ok(0)
}

fn cmd_gen_cover(a: GenCoverArgs) -> Result<i32> {
    if a.side == 0 || a.side % BLOCK != 0 {
        bail!("--side must be a positive multiple of {BLOCK}");
    }
    let img = testimage::gen_cover(a.side, if a.rgb { 3 } else { 1 }, a.seed)?;
    imgio::save_image(&img, &a.out)?;
    println!("cover={}", a.out.display());
    Ok(0)
}
