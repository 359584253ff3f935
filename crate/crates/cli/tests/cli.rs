use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rdh_core::{save_pgm, GrayImage};
use tempfile::TempDir;

fn rdh(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rdh"))
        .args(args)
        .output()
        .expect("run rdh")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn cover(dir: &Path) -> PathBuf {
    let mut x: u32 = 0x1234_5678;
    let img = GrayImage::from_fn(96, 80, |r, c| {
        x ^= x << 13;
        x ^= x >> 17;
        x ^= x << 5;
        let wave = 40.0 * (r as f64 / 9.0).sin() + 30.0 * (c as f64 / 7.0).cos();
        (120.0 + wave) as u8 + (x % 3) as u8
    })
    .unwrap();
    let path = dir.join("cover.pgm");
    std::fs::write(&path, save_pgm(&img)).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn verify_reports_pass_and_psnr() {
    let dir = TempDir::new().unwrap();
    let c = cover(dir.path());
    let before: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
    let o = rdh(&["verify", "--cover", s(&c), "--bits", "1000", "--seed", "7"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("PASS psnr "), "{out}");
    assert!(out.contains(" dB"));
    let after: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
    assert_eq!(before.len(), after.len());
}

#[test]
fn embed_then_extract_restores_everything() {
    let dir = TempDir::new().unwrap();
    let c = cover(dir.path());
    let payload = dir.path().join("secret.bin");
    std::fs::write(&payload, b"reversible hiding").unwrap();
    let marked = dir.path().join("marked.pgm");
    let o = rdh(&[
        "embed",
        "--cover",
        s(&c),
        "--out",
        s(&marked),
        "--payload",
        s(&payload),
        "--start-color",
        "black",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report = stdout(&o);
    assert!(report.contains("embedded 136 bits"), "{report}");
    assert!(report.contains("psnr"));
    assert!(report.contains("levels"));
    assert!(report.contains("segments"));

    let restored = dir.path().join("restored.pgm");
    let got = dir.path().join("got.bin");
    let o = rdh(&[
        "extract",
        "--marked",
        s(&marked),
        "--out",
        s(&restored),
        "--payload",
        s(&got),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        std::fs::read(&restored).unwrap(),
        std::fs::read(&c).unwrap()
    );
    assert_eq!(std::fs::read(&got).unwrap(), b"reversible hiding");
}

#[test]
fn extract_defaults_payload_path() {
    let dir = TempDir::new().unwrap();
    let c = cover(dir.path());
    let marked = dir.path().join("marked.pgm");
    assert!(rdh(&[
        "embed",
        "--cover",
        s(&c),
        "--out",
        s(&marked),
        "--bits",
        "64"
    ])
    .status
    .success());
    let restored = dir.path().join("restored.pgm");
    assert!(
        rdh(&["extract", "--marked", s(&marked), "--out", s(&restored)])
            .status
            .success()
    );
    assert_eq!(
        std::fs::read(dir.path().join("restored.bin"))
            .unwrap()
            .len(),
        8
    );
}

#[test]
fn identical_arguments_give_identical_bytes() {
    let dir = TempDir::new().unwrap();
    let c = cover(dir.path());
    let a = dir.path().join("a.pgm");
    let b = dir.path().join("b.pgm");
    for out in [&a, &b] {
        let o = rdh(&[
            "embed",
            "--cover",
            s(&c),
            "--out",
            s(out),
            "--bits",
            "800",
            "--seed",
            "3",
            "--tau1",
            "2",
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn oversized_payload_writes_nothing() {
    let dir = TempDir::new().unwrap();
    let c = cover(dir.path());
    let out = dir.path().join("marked.pgm");
    let o = rdh(&[
        "embed",
        "--cover",
        s(&c),
        "--out",
        s(&out),
        "--bits",
        "200000",
    ]);
    assert_eq!(o.status.code(), Some(5));
    assert!(
        stderr(&o).starts_with("error[E_CAPACITY]: "),
        "{}",
        stderr(&o)
    );
    assert_eq!(stderr(&o).lines().count(), 1);
    assert!(!out.exists());
}

#[test]
fn analyze_writes_profile_csv() {
    let dir = TempDir::new().unwrap();
    let c = cover(dir.path());
    let csv = dir.path().join("profile.csv");
    let o = rdh(&["analyze", "--cover", s(&c), "--out", s(&csv)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(!text.contains('\r'));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "h,N,M,f");
    assert_eq!(lines.len(), 257);
    for (h, line) in lines[1..].iter().enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 4);
        assert_eq!(fields[0], h.to_string());
        let f: f64 = fields[3].parse().unwrap();
        assert!((0.0..=1.0).contains(&f));
    }
    let report = stdout(&o);
    assert!(report.contains("band populations"));
    assert!(
        report.contains("ULCF1 (a)\nNumber,SV,N_sv,N_usv,HI,PoH\n1,{-1,0},"),
        "{report}"
    );
    assert!(report.contains("ULCF1 (b)"));
    assert!(report.contains("max PoH"));
}

#[test]
fn capacity_prints_scan_table() {
    let dir = TempDir::new().unwrap();
    let c = cover(dir.path());
    let o = rdh(&["capacity", "--cover", s(&c), "--f-threshold", "0.05,0.01"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("pass,color,slot,sites,k,sv,n_sv,n_usv\n"));
    // three sub-bands: 2*3 + 4 slots per pass
    assert_eq!(
        out.lines()
            .filter(|l| l.starts_with("0,") || l.starts_with("1,"))
            .count(),
        20
    );
    assert!(out.contains("payload capacity"));
}

#[test]
fn show_config_prints_defaults() {
    let o = rdh(&["--show-config"]);
    assert!(o.status.success());
    let out = stdout(&o);
    for line in [
        "thresholds = 3.3,4.5,6,9,13,18",
        "bias = 0.3",
        "l_ulcf_size = 3000",
        "f_thresholds = 0.03",
        "k = 5",
        "poh_mode = table2",
        "tau1 = 0",
        "max_levels = 8",
        "start_color = white",
    ] {
        assert!(out.lines().any(|l| l == line), "missing {line}\n{out}");
    }
    let dir = TempDir::new().unwrap();
    let c = cover(dir.path());
    let o = rdh(&[
        "capacity",
        "--cover",
        s(&c),
        "--k",
        "3",
        "--poh-mode",
        "eq14",
        "--show-config",
    ]);
    assert!(stdout(&o).contains("k = 3\npoh_mode = eq14\n"));
}

#[test]
fn errors_have_codes_and_statuses() {
    let dir = TempDir::new().unwrap();
    let c = cover(dir.path());
    let out = dir.path().join("x.pgm");

    let o = rdh(&["extract", "--marked", s(&c), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(7));
    assert!(stderr(&o).starts_with("error[E_MAGIC]"));

    let o = rdh(&["verify", "--cover", s(&c), "--bits", "10", "--k", "0"]);
    assert_eq!(o.status.code(), Some(9));
    assert!(stderr(&o).starts_with("error[E_CONFIG]"));

    let o = rdh(&[
        "verify",
        "--cover",
        s(&dir.path().join("missing.pgm")),
        "--bits",
        "10",
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).starts_with("error[E_IO]"));

    let bad = dir.path().join("bad.pgm");
    std::fs::write(&bad, b"P2\n2 2\n255\n1 2 3 4\n").unwrap();
    let o = rdh(&["verify", "--cover", s(&bad), "--bits", "10"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).starts_with("error[E_FORMAT]"));

    let o = rdh(&["verify", "--cover", s(&c)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn corrupted_marked_image_is_rejected() {
    let dir = TempDir::new().unwrap();
    let c = cover(dir.path());
    let marked = dir.path().join("marked.pgm");
    assert!(rdh(&[
        "embed",
        "--cover",
        s(&c),
        "--out",
        s(&marked),
        "--bits",
        "300"
    ])
    .status
    .success());
    let mut bytes = std::fs::read(&marked).unwrap();
    // the bottom row carries the start of the header
    let n = bytes.len();
    bytes[n - 40] ^= 1;
    std::fs::write(&marked, &bytes).unwrap();
    let o = rdh(&[
        "extract",
        "--marked",
        s(&marked),
        "--out",
        s(&dir.path().join("r.pgm")),
    ]);
    assert!(
        matches!(o.status.code(), Some(7) | Some(8)),
        "{}",
        stderr(&o)
    );
    assert!(stderr(&o).starts_with("error[E_"));
}
