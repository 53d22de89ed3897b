use std::fs;
use std::path::Path;

use vidmark::bitstream::pack_picture_header;
use vidmark::cli::{run_with, EXIT_MISMATCH, EXIT_OK, EXIT_USAGE};

fn run(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["vidmark"];
    full.extend_from_slice(args);
    let code = run_with(full, &mut out, &mut err);
    let mut text = String::from_utf8(out).unwrap();
    text.push_str(&String::from_utf8(err).unwrap());
    (code, text)
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).to_string_lossy().into_owned()
}

fn sample_and_embed(dir: &Path) {
    let (code, _) = run(&["make-sample", "-o", &p(dir, "in.mv1"), "--width", "32", "--height", "24", "--gops", "2"]);
    assert_eq!(code, EXIT_OK);
    fs::write(dir.join("wm.txt"), "Owner: Example Studios\nLicense: internal review only\n").unwrap();
    let (code, text) = run(&[
        "embed",
        &p(dir, "in.mv1"),
        &p(dir, "wm.txt"),
        "-o",
        &p(dir, "marked.mv1"),
        "-k",
        &p(dir, "key.wmk"),
        "--workers",
        "3",
    ]);
    assert_eq!(code, EXIT_OK, "{text}");
}

#[test]
fn embed_restore_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    sample_and_embed(dir.path());
    let (code, text) = run(&["restore", &p(dir.path(), "marked.mv1"), "-k", &p(dir.path(), "key.wmk"), "-o", &p(dir.path(), "out.mv1")]);
    assert_eq!(code, EXIT_OK, "{text}");
    assert_eq!(fs::read(dir.path().join("out.mv1")).unwrap(), fs::read(dir.path().join("in.mv1")).unwrap());
    assert_ne!(fs::read(dir.path().join("marked.mv1")).unwrap(), fs::read(dir.path().join("in.mv1")).unwrap());
}

#[test]
fn verify_clean_and_tampered() {
    let dir = tempfile::tempdir().unwrap();
    sample_and_embed(dir.path());
    let (code, text) = run(&["--porcelain", "verify", &p(dir.path(), "marked.mv1"), "-k", &p(dir.path(), "key.wmk")]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(text.lines().filter(|l| l.contains(",match,")).count(), 2);

    // first I-frame pixel data starts after magic, sequence, GOP and picture records
    let mut bytes = fs::read(dir.path().join("marked.mv1")).unwrap();
    bytes[4 + 9 + 8 + 11 + 12 * 3] ^= 0x01;
    fs::write(dir.path().join("tampered.mv1"), &bytes).unwrap();
    let (code, text) = run(&["--porcelain", "verify", &p(dir.path(), "tampered.mv1"), "-k", &p(dir.path(), "key.wmk")]);
    assert_eq!(code, EXIT_MISMATCH, "{text}");
    assert!(text.lines().next().unwrap().starts_with("frame,0,mismatch,"));
}

#[test]
fn verify_with_bad_key_file_is_a_format_error() {
    let dir = tempfile::tempdir().unwrap();
    sample_and_embed(dir.path());
    fs::write(dir.path().join("bad.wmk"), b"WMK0garbage").unwrap();
    let (code, text) = run(&["verify", &p(dir.path(), "marked.mv1"), "-k", &p(dir.path(), "bad.wmk")]);
    assert_eq!(code, EXIT_USAGE);
    assert!(text.contains("not a key file"));
}

#[test]
fn embed_rejects_oversized_watermark() {
    let dir = tempfile::tempdir().unwrap();
    run(&["make-sample", "-o", &p(dir.path(), "tiny.mv1"), "--width", "4", "--height", "4"]);
    fs::write(dir.path().join("wm"), [1u8]).unwrap();
    let (code, text) = run(&["embed", &p(dir.path(), "tiny.mv1"), &p(dir.path(), "wm"), "-o", &p(dir.path(), "m"), "-k", &p(dir.path(), "k")]);
    assert_eq!(code, EXIT_USAGE);
    assert!(text.contains("needs 17 pixels"), "{text}");
}

#[test]
fn index_mv1_and_mpeg1() {
    let dir = tempfile::tempdir().unwrap();
    run(&["make-sample", "-o", &p(dir.path(), "s.mv1"), "--width", "16", "--height", "16", "--gops", "2", "--pictures", "2"]);
    let (code, text) = run(&["--porcelain", "index", &p(dir.path(), "s.mv1")]);
    assert_eq!(code, EXIT_OK);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "format,mv1");
    assert_eq!(lines[1], "counts,2,2,0,0");
    // 256 pixels - 15 header pixels = 241 sextets = 180 bytes
    assert_eq!(lines[2], "iframe,21,0,0,180");
    assert_eq!(lines.len(), 4);

    let mut s = vec![0, 0, 1, 0xB3, 0x01, 0x00, 0x10, 0x13];
    s.extend([0, 0, 1, 0xB8, 0, 0, 0, 0]);
    for (tr, ct) in [(0u16, 1u8), (1, 2), (2, 3)] {
        s.extend([0, 0, 1, 0]);
        s.extend(pack_picture_header(tr, ct));
    }
    fs::write(dir.path().join("s.mpg"), &s).unwrap();
    let (code, text) = run(&["--porcelain", "index", &p(dir.path(), "s.mpg")]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(text, "format,mpeg1\ncounts,1,1,1,0\niframe,16,0,0,180\n");
    let (code, text) = run(&["index", &p(dir.path(), "s.mpg")]);
    assert_eq!(code, EXIT_OK);
    assert!(text.contains("dimensions:       16x16"));
}

#[test]
fn index_without_start_codes() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("plain.bin"), b"no start codes here").unwrap();
    let (code, text) = run(&["--porcelain", "index", &p(dir.path(), "plain.bin")]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(text, "format,mpeg1\ncounts,0,0,0,0\n");
}

#[test]
fn bench_prints_csv() {
    let (code, text) = run(&["--porcelain", "bench", "--workers", "1,2", "--width", "64", "--height", "32", "--wm-bytes", "100", "--reps", "2"]);
    assert_eq!(code, EXIT_OK);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "workers,width,height,wm_bytes,median_ms,speedup");
    assert!(lines[1].starts_with("1,64,32,100,") && lines[1].ends_with(",1.000"));
    assert!(lines[2].starts_with("2,64,32,100,"));
}
