//! Evaluation CSV rows and the JSON sidecar written next to marked images.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::presets::Preset;

pub const CSV_HEADER: &str = "image,preset,attack,param,psnr_db,ber,authentic";

/// One evaluation measurement. Fidelity rows (no attack) carry PSNR;
/// robustness rows carry the post-attack bit error rate.
#[derive(Clone, Debug)]
pub struct EvalRow {
    pub image: String,
    pub preset: String,
    pub attack: String,
    pub param: f64,
    pub psnr_db: Option<f64>,
    pub ber: Option<f64>,
    pub authentic: bool,
}

fn field(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x}"),
        None => String::new(),
    }
}

pub fn to_csv(rows: &[EvalRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.image,
            r.preset,
            r.attack,
            r.param,
            field(r.psnr_db),
            field(r.ber),
            r.authentic
        ));
    }
    out
}

pub fn write_csv(rows: &[EvalRow], path: &Path) -> Result<()> {
    fs::write(path, to_csv(rows)).with_context(|| format!("writing {}", path.display()))
}

/// Metadata describing how a marked image was produced. The chaotic seed
/// pair is echoed at full precision so runs are reproducible; the secret
/// byte string is only hashed.
#[derive(Serialize, Debug)]
pub struct EmbedSidecar<'a> {
    pub preset: &'a Preset,
    pub delta: f64,
    pub coeff_index: usize,
    pub channels: &'a str,
    pub kappa_sha256: String,
    pub x0: f64,
    pub chaos_mu: f64,
}

pub fn kappa_digest(kappa: &[u8]) -> String {
    let mut hex = String::with_capacity(64);
    for b in Sha256::digest(kappa) {
        hex.push_str(&format!("{b:02x}"));
    }
    hex
}

/// Write the sidecar as `<image path>.json`.
pub fn write_sidecar(sidecar: &EmbedSidecar, image_path: &Path) -> Result<()> {
    let mut path = image_path.as_os_str().to_owned();
    path.push(".json");
    let text = serde_json::to_string_pretty(sidecar).context("serializing sidecar")?;
    fs::write(&path, text).with_context(|| format!("writing {}", Path::new(&path).display()))
}
