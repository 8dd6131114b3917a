//! Secret-key files: the shared secret bytes for the fragile signature and
//! the chaotic-map seed for the robust scrambler.

use anyhow::{bail, Context, Result};
use sobomark_core::ChaosKey;

#[derive(Clone, Debug)]
pub struct KeyMaterial {
    pub kappa: Vec<u8>,
    pub x0: f64,
    pub mu_c: f64,
}

impl KeyMaterial {
    pub fn chaos_key(&self) -> Result<ChaosKey> {
        ChaosKey::new(self.x0, self.mu_c).map_err(|e| anyhow::anyhow!("key file: {e}"))
    }
}

fn decode_hex(s: &str) -> Result<Vec<u8>> {
    if s.len() % 2 != 0 {
        bail!("kappa_hex needs an even number of digits");
    }
    (0..s.len())
        .step_by(2)
        .map(|i| u8::from_str_radix(&s[i..i + 2], 16).context("kappa_hex: invalid hex digit"))
        .collect()
}

/// Parse `key=value` lines: one of `kappa=` (UTF-8 bytes) or `kappa_hex=`,
/// plus `x0=` and `chaos_mu=`. `#` comments and blank lines are skipped.
pub fn parse(text: &str) -> Result<KeyMaterial> {
    let mut kappa = None;
    let mut x0 = None;
    let mut mu_c = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .with_context(|| format!("key file line {}: expected key=value", idx + 1))?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "kappa" => {
                if kappa.is_some() {
                    bail!("key file: kappa given twice");
                }
                kappa = Some(value.as_bytes().to_vec());
            }
            "kappa_hex" => {
                if kappa.is_some() {
                    bail!("key file: kappa given twice");
                }
                kappa = Some(decode_hex(value)?);
            }
            "x0" => x0 = Some(value.parse::<f64>().context("key file: bad x0")?),
            "chaos_mu" => mu_c = Some(value.parse::<f64>().context("key file: bad chaos_mu")?),
            other => bail!("key file line {}: unknown key {other:?}", idx + 1),
        }
    }
    let material = KeyMaterial {
        kappa: kappa.context("key file missing kappa= or kappa_hex=")?,
        x0: x0.context("key file missing x0=")?,
        mu_c: mu_c.context("key file missing chaos_mu=")?,
    };
    if material.kappa.is_empty() {
        bail!("key file: kappa must be non-empty");
    }
    material.chaos_key()?;
    Ok(material)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_utf8_and_hex_kappa() {
        let m = parse("kappa=hello\nx0=0.31\nchaos_mu=0.24\n").unwrap();
        assert_eq!(m.kappa, b"hello");
        let h = parse("kappa_hex=68656c6c6f\nx0=0.31\nchaos_mu=0.24\n").unwrap();
        assert_eq!(h.kappa, b"hello");
        assert_eq!(h.x0, 0.31);
        assert_eq!(h.mu_c, 0.24);
        h.chaos_key().unwrap();
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse("x0=0.3\nchaos_mu=0.2\n").is_err()); // no kappa
        assert!(parse("kappa=a\nx0=0.3\n").is_err()); // no chaos_mu
        assert!(parse("kappa=a\nkappa_hex=61\nx0=0.3\nchaos_mu=0.2\n").is_err());
        assert!(parse("kappa_hex=6\nx0=0.3\nchaos_mu=0.2\n").is_err()); // odd hex
        assert!(parse("kappa=a\nx0=0.3\nchaos_mu=0.7\n").is_err()); // mu out of range
        assert!(parse("kappa=a\nx0=1.5\nchaos_mu=0.2\n").is_err()); // x0 out of range
        assert!(parse("kappa=\nx0=0.3\nchaos_mu=0.2\n").is_err()); // empty kappa
    }

    #[test]
    fn comments_are_ignored() {
        let m = parse("# secret\nkappa=k1 # inline\nx0=0.4\nchaos_mu=0.1\n").unwrap();
        assert_eq!(m.kappa, b"k1");
    }
}
