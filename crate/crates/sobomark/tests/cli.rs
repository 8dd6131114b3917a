//! Black-box tests of the installed binary: exit codes, stdout contracts,
//! and determinism of every subcommand.

use std::path::{Path, PathBuf};
use std::process::Command;

use sobomark::imgio;
use sobomark::report::CSV_HEADER;
use sobomark_core::MultiImage;
use tempfile::TempDir;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_sobomark")
}

fn run(args: &[&str]) -> (i32, String, String) {
    run_env(args, &[])
}

fn run_env(args: &[&str], envs: &[(&str, &str)]) -> (i32, String, String) {
    let mut cmd = Command::new(bin());
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("spawning the sobomark binary");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn write_key(dir: &Path) -> PathBuf {
    let path = dir.join("key.txt");
    std::fs::write(
        &path,
        "kappa=cli-test-secret\nx0=0.3141592653589793\nchaos_mu=0.2718281828459045\n",
    )
    .unwrap();
    path
}

fn write_watermark(dir: &Path) -> (PathBuf, Vec<u8>) {
    let bits: Vec<u8> = (0..64 * 64)
        .map(|i| {
            let (x, y) = (i % 64, i / 64);
            ((x / 8 + y / 8) % 2) as u8
        })
        .collect();
    let path = dir.join("wm.pbm");
    imgio::save_bits(&bits, 64, 64, &path).unwrap();
    (path, bits)
}

fn gen_cover(dir: &Path, name: &str, seed: u64) -> PathBuf {
    let path = dir.join(name);
    let (code, out, err) = run(&[
        "gen-cover",
        "--out",
        path.to_str().unwrap(),
        "--seed",
        &seed.to_string(),
    ]);
    assert_eq!(code, 0, "gen-cover failed: {out}{err}");
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn embed_extract_round_trip_succeeds() {
    let dir = TempDir::new().unwrap();
    let key = write_key(dir.path());
    let (wm, bits) = write_watermark(dir.path());
    let cover = gen_cover(dir.path(), "cover.png", 1);
    let marked = dir.path().join("marked.png");

    let (code, out, err) = run(&[
        "embed",
        "--cover",
        s(&cover),
        "--watermark",
        s(&wm),
        "--key-file",
        s(&key),
        "--out",
        s(&marked),
    ]);
    assert_eq!(code, 0, "{out}{err}");
    assert!(out.contains("psnr_db="), "missing psnr in: {out}");

    let sidecar = std::fs::read_to_string(marked.with_extension("png.json")).unwrap();
    assert!(sidecar.contains("kappa_sha256"));
    assert!(sidecar.contains("\"x0\""));

    let recovered = dir.path().join("rec.pbm");
    let (code, out, err) = run(&[
        "extract",
        "--image",
        s(&marked),
        "--key-file",
        s(&key),
        "--out",
        s(&recovered),
    ]);
    assert_eq!(code, 0, "{out}{err}");
    assert!(out.contains("authentic=true"), "{out}");
    let (w, h, got) = imgio::load_bits(&recovered).unwrap();
    assert_eq!((w, h), (64, 64));
    assert_eq!(got, bits, "recovered payload must match bit for bit");
}

#[test]
fn undersized_or_misaligned_covers_are_rejected() {
    let dir = TempDir::new().unwrap();
    let key = write_key(dir.path());
    let (wm, _) = write_watermark(dir.path());

    let odd = dir.path().join("odd.png");
    let mut img = MultiImage::new(100, 100, 1).unwrap();
    img.plane_mut(0).iter_mut().for_each(|p| *p = 128);
    imgio::save_image(&img, &odd).unwrap();

    let small = dir.path().join("small.png");
    let img = MultiImage::new(256, 256, 1).unwrap();
    imgio::save_image(&img, &small).unwrap();

    for cover in [&odd, &small] {
        let (code, _, err) = run(&[
            "embed",
            "--cover",
            s(cover),
            "--watermark",
            s(&wm),
            "--key-file",
            s(&key),
        ]);
        assert_eq!(code, 2, "{cover:?} should be refused: {err}");
    }
}

#[test]
fn unknown_preset_names_the_alternatives() {
    let dir = TempDir::new().unwrap();
    let key = write_key(dir.path());
    let (wm, _) = write_watermark(dir.path());
    let cover = gen_cover(dir.path(), "c.png", 2);
    let (code, _, err) = run(&[
        "embed",
        "--cover",
        s(&cover),
        "--watermark",
        s(&wm),
        "--key-file",
        s(&key),
        "--preset",
        "CS_IX",
    ]);
    assert_eq!(code, 2);
    assert!(err.contains("CS_I") && err.contains("MS_II"), "{err}");
}

#[test]
fn unknown_attack_is_rejected() {
    let dir = TempDir::new().unwrap();
    let cover = gen_cover(dir.path(), "c.png", 3);
    let (code, _, err) = run(&[
        "attack",
        "--image",
        s(&cover),
        "--attack",
        "warp",
        "--param",
        "1",
    ]);
    assert_eq!(code, 2);
    assert!(err.contains("attack"), "{err}");
}

#[test]
fn salt_pepper_attack_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let cover = gen_cover(dir.path(), "c.png", 4);
    let mut paths = Vec::new();
    for (name, seed) in [("a.png", 9), ("b.png", 9), ("c2.png", 10)] {
        let out = dir.path().join(name);
        let (code, _, err) = run(&[
            "attack",
            "--image",
            s(&cover),
            "--attack",
            "salt-pepper",
            "--param",
            "0.02",
            "--seed",
            &seed.to_string(),
            "--out",
            s(&out),
        ]);
        assert_eq!(code, 0, "{err}");
        paths.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(paths[0], paths[1], "same seed must give identical bytes");
    assert_ne!(paths[0], paths[2], "different seed must move the noise");
}

#[test]
fn tampering_yields_exit_three_with_outputs_written() {
    let dir = TempDir::new().unwrap();
    let key = write_key(dir.path());
    let (wm, _) = write_watermark(dir.path());
    let cover = gen_cover(dir.path(), "cover.png", 5);
    let marked = dir.path().join("marked.png");
    let (code, _, err) = run(&[
        "embed",
        "--cover",
        s(&cover),
        "--watermark",
        s(&wm),
        "--key-file",
        s(&key),
        "--out",
        s(&marked),
    ]);
    assert_eq!(code, 0, "{err}");

    let mut img = imgio::load_image(&marked).unwrap();
    for y in 64..80 {
        for x in 64..80 {
            img.set(0, x, y, 0);
        }
    }
    let doctored = dir.path().join("doctored.png");
    imgio::save_image(&img, &doctored).unwrap();

    let recovered = dir.path().join("rec.pbm");
    let map = dir.path().join("map.png");
    let (code, out, err) = run(&[
        "extract",
        "--image",
        s(&doctored),
        "--key-file",
        s(&key),
        "--out",
        s(&recovered),
        "--tamper-map",
        s(&map),
    ]);
    assert_eq!(code, 3, "{out}{err}");
    assert!(out.contains("authentic=false"), "{out}");
    assert!(recovered.exists(), "payload must still be written");
    assert!(map.exists(), "tamper map must still be written");
}

#[test]
fn wrong_secret_fails_authenticity() {
    let dir = TempDir::new().unwrap();
    let key = write_key(dir.path());
    let (wm, _) = write_watermark(dir.path());
    let cover = gen_cover(dir.path(), "cover.png", 6);
    let marked = dir.path().join("marked.png");
    let (code, _, err) = run(&[
        "embed",
        "--cover",
        s(&cover),
        "--watermark",
        s(&wm),
        "--key-file",
        s(&key),
        "--out",
        s(&marked),
    ]);
    assert_eq!(code, 0, "{err}");

    let other = dir.path().join("other.txt");
    std::fs::write(&other, "kappa=not-the-secret\nx0=0.4\nchaos_mu=0.3\n").unwrap();
    let (code, out, _) = run(&[
        "extract",
        "--image",
        s(&marked),
        "--key-file",
        s(&other),
        "--out",
        s(&dir.path().join("noise.pbm")),
    ]);
    assert_eq!(code, 3, "{out}");
    assert!(out.contains("authentic=false"), "{out}");
}

#[test]
fn preset_list_and_dump_round_trip() {
    let (code, out, _) = run(&["preset", "list"]);
    assert_eq!(code, 0);
    for name in ["CS_I", "CS_II", "MS_I", "MS_II"] {
        assert!(out.contains(name), "missing {name} in: {out}");
    }

    let dir = TempDir::new().unwrap();
    let (code, dump, _) = run(&["preset", "dump", "MS_I"]);
    assert_eq!(code, 0);
    assert!(dump.contains("family=meixner"), "{dump}");
    let pf = dir.path().join("ms1.preset");
    std::fs::write(&pf, &dump).unwrap();
    let table = dir.path().join("basis.csv");
    let (code, _, err) = run(&[
        "basis",
        "dump",
        "--preset-file",
        s(&pf),
        "--out",
        s(&table),
    ]);
    assert_eq!(code, 0, "dumped preset must parse back: {err}");
    let text = std::fs::read_to_string(&table).unwrap();
    assert!(text.starts_with("degree,x0,"), "{text}");
    assert_eq!(text.lines().count(), 9, "8 degrees plus header");
}

#[test]
fn gen_cover_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let a = gen_cover(dir.path(), "a.png", 42);
    let b = gen_cover(dir.path(), "b.png", 42);
    let c = gen_cover(dir.path(), "c.png", 43);
    let (a, b, c) = (
        std::fs::read(a).unwrap(),
        std::fs::read(b).unwrap(),
        std::fs::read(c).unwrap(),
    );
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn evaluate_writes_the_full_grid_deterministically() {
    let dir = TempDir::new().unwrap();
    let key = write_key(dir.path());
    let cover = gen_cover(dir.path(), "cover.png", 7);
    let csv = dir.path().join("report.csv");
    let (code, out, err) = run(&[
        "evaluate",
        "--cover",
        s(&cover),
        "--preset",
        "CS_II",
        "--key-file",
        s(&key),
        "--seed",
        "3",
        "--csv",
        s(&csv),
    ]);
    assert_eq!(code, 0, "{out}{err}");
    assert!(out.contains("rows=49"), "{out}");

    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 49);
    for row in &rows {
        assert_eq!(row.split(',').count(), 7, "bad row: {row}");
    }
    let first: Vec<&str> = rows[0].split(',').collect();
    assert_eq!(first[2], "none");
    assert_eq!(first[6], "true");
    assert_eq!(first[5], "0", "clean extraction must be error free");
    let mut kinds: Vec<&str> = rows.iter().map(|r| r.split(',').nth(2).unwrap()).collect();
    kinds.sort_unstable();
    kinds.dedup();
    assert_eq!(kinds.len(), 7, "six attacks plus the clean row: {kinds:?}");

    // A thread cap must not change a single byte of the report.
    let csv1 = dir.path().join("report1.csv");
    let (code, _, err) = run_env(
        &[
            "evaluate",
            "--cover",
            s(&cover),
            "--preset",
            "CS_II",
            "--key-file",
            s(&key),
            "--seed",
            "3",
            "--csv",
            s(&csv1),
        ],
        &[("SOBOMARK_THREADS", "1")],
    );
    assert_eq!(code, 0, "{err}");
    assert_eq!(std::fs::read(&csv).unwrap(), std::fs::read(&csv1).unwrap());
}

#[test]
fn evaluate_without_covers_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let key = write_key(dir.path());
    let empty = dir.path().join("none");
    std::fs::create_dir(&empty).unwrap();
    let (code, _, err) = run(&[
        "evaluate",
        "--cover-dir",
        s(&empty),
        "--key-file",
        s(&key),
        "--csv",
        s(&dir.path().join("r.csv")),
    ]);
    assert_eq!(code, 2);
    assert!(err.contains("cover"), "{err}");
}

#[test]
fn verify_passes_at_stress_parameters() {
    let dir = TempDir::new().unwrap();
    let pf = dir.path().join("stress.preset");
    std::fs::write(
        &pf,
        "name=stress\nfamily=charlier\nmu=1.0\nlambda=1.0\nalpha=-1\nj=0\n",
    )
    .unwrap();
    let (code, out, err) = run(&["verify", "--preset-file", s(&pf)]);
    assert_eq!(code, 0, "{out}{err}");
    assert!(out.contains("result: pass"), "{out}");
}

#[test]
fn verify_covers_every_builtin() {
    let (code, out, _) = run(&["verify", "--all", "--n-max", "6", "--x-max", "12"]);
    assert_eq!(code, 0, "{out}");
    assert_eq!(out.matches("preset=").count(), 4);
    assert!(out.contains("result: pass"), "{out}");
}
