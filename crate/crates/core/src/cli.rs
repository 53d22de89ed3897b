//! Command-line front end. Each subcommand is a thin wrapper over the
//! library operations.
//!
//! Exit codes: 0 success, 1 verification mismatch, 2 usage or format error.

use std::collections::HashMap;
use std::error::Error;
use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::bitstream::{index_mpeg1, PictureCodingType};
use crate::container::{read_mv1, synth_sample, write_mv1, Mv1Video, MV1_MAGIC};
use crate::netproto::{fetch, read_keyfile, write_keyfile, Server, VerifyStatus};
use crate::parallel::bench_embed;
use crate::watermark::{capacity_bytes, embed_video_with, restore_and_verify_video, verify_frame, FrameCheck};

pub const EXIT_OK: i32 = 0;
pub const EXIT_MISMATCH: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

pub type CliResult = Result<i32, Box<dyn Error>>;

#[derive(Debug, Parser)]
#[command(name = "vidmark", version, about = "Invisible 2-bit LSB watermarking for I-frames")]
pub struct CliConfig {
    /// Print stable comma-separated records instead of the human report.
    #[arg(long, global = true)]
    pub porcelain: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Report the I-frames of an MPEG-1 stream or MV1 file.
    Index { file: PathBuf },
    /// Write a synthesized MV1 video.
    MakeSample(MakeSampleArgs),
    /// Embed a watermark into every I-frame.
    Embed {
        video: PathBuf,
        watermark: PathBuf,
        #[arg(short = 'o', long = "output")]
        marked: PathBuf,
        #[arg(short = 'k', long = "key")]
        key: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u16).range(1..))]
        workers: Option<u16>,
    },
    /// Restore the original video from a marked one and its key.
    Restore {
        marked: PathBuf,
        #[arg(short = 'k', long = "key")]
        key: PathBuf,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
    /// Compare each I-frame's embedded checksum with the key.
    Verify {
        marked: PathBuf,
        #[arg(short = 'k', long = "key")]
        key: PathBuf,
    },
    /// Serve a video, embedding the watermark per request.
    Serve {
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long)]
        port: u16,
        #[arg(long)]
        video: PathBuf,
        #[arg(long)]
        watermark: PathBuf,
        /// Id clients request; defaults to the video file stem.
        #[arg(long)]
        id: Option<String>,
    },
    /// Fetch, restore and verify a video from a server.
    Fetch {
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long)]
        port: u16,
        #[arg(long)]
        id: String,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
    /// Time embedding for several worker counts.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct MakeSampleArgs {
    #[arg(short = 'o', long = "output")]
    pub output: PathBuf,
    #[arg(long, default_value_t = 64)]
    pub width: u16,
    #[arg(long, default_value_t = 64)]
    pub height: u16,
    #[arg(long, default_value_t = 3)]
    pub gops: u32,
    #[arg(long, default_value_t = 3)]
    pub pictures: u16,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "1,2,4")]
    pub workers: Vec<usize>,
    #[arg(long, default_value_t = 1920)]
    pub width: u16,
    #[arg(long, default_value_t = 1080)]
    pub height: u16,
    #[arg(long = "wm-bytes", default_value_t = 200 * 1024)]
    pub wm_bytes: usize,
    #[arg(long, default_value_t = 5)]
    pub reps: usize,
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = io::stdout();
    let stderr = io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match CliConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(&config, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

fn dispatch(config: &CliConfig, out: &mut dyn Write) -> CliResult {
    let porcelain = config.porcelain;
    match &config.command {
        Command::Index { file } => index(file, porcelain, out),
        Command::MakeSample(a) => {
            if a.width == 0 || a.height == 0 || a.gops == 0 || a.pictures == 0 {
                return Err("width, height, gops and pictures must be at least 1".into());
            }
            let video = synth_sample(a.width, a.height, a.gops, a.pictures, a.seed);
            write_file(&a.output, write_mv1(&video)?)?;
            if !porcelain {
                writeln!(
                    out,
                    "wrote {} ({}x{}, {} GOPs, {} pictures each)",
                    a.output.display(),
                    a.width,
                    a.height,
                    a.gops,
                    a.pictures
                )?;
            }
            Ok(EXIT_OK)
        }
        Command::Embed {
            video,
            watermark,
            marked,
            key,
            workers,
        } => {
            let v = load_video(video)?;
            let wm = read_file(watermark)?;
            let workers = workers.map_or_else(crate::watermark::default_workers, usize::from);
            let (m, k) = embed_video_with(&v, &wm, workers)?;
            write_file(marked, write_mv1(&m)?)?;
            write_file(key, write_keyfile(&k))?;
            if porcelain {
                writeln!(out, "embedded,{},{},{:08x}", k.header_backups.len(), wm.len(), k.crc32)?;
            } else {
                writeln!(
                    out,
                    "embedded {} bytes (crc32 {:08x}) into {} I-frame(s)",
                    wm.len(),
                    k.crc32,
                    k.header_backups.len()
                )?;
            }
            Ok(EXIT_OK)
        }
        Command::Restore { marked, key, output } => {
            let m = load_video(marked)?;
            let k = read_keyfile(&read_file(key)?)?;
            let (restored, checks) = restore_and_verify_video(&m, &k)?;
            write_file(output, write_mv1(&restored)?)?;
            report_checks(&checks, porcelain, out)
        }
        Command::Verify { marked, key } => {
            let m = load_video(marked)?;
            let k = read_keyfile(&read_file(key)?)?;
            let checks: Vec<FrameCheck> = m
                .i_frames()
                .enumerate()
                .map(|(i, f)| match verify_frame(f, &k, i) {
                    Ok(r) => FrameCheck::Verified(r),
                    Err(error) => FrameCheck::Unreadable { frame: i, error },
                })
                .collect();
            if checks.len() != k.header_backups.len() {
                return Err(format!(
                    "key covers {} I-frames, video has {}",
                    k.header_backups.len(),
                    checks.len()
                )
                .into());
            }
            report_checks(&checks, porcelain, out)
        }
        Command::Serve {
            host,
            port,
            video,
            watermark,
            id,
        } => {
            let v = load_video(video)?;
            let id = id.clone().unwrap_or_else(|| {
                video
                    .file_stem()
                    .map_or_else(|| "video".to_string(), |s| s.to_string_lossy().into_owned())
            });
            let wm = read_file(watermark)?;
            let server = Server::bind((host.as_str(), *port), HashMap::from([(id.clone(), v)]), wm)?;
            writeln!(out, "serving '{id}' on {}", server.local_addr()?)?;
            out.flush()?;
            server.run()?;
            Ok(EXIT_OK)
        }
        Command::Fetch { host, port, id, output } => {
            let summary = fetch((host.as_str(), *port), id, output)?;
            let r = summary.report;
            if porcelain {
                writeln!(
                    out,
                    "fetch,{},{},{},{:08x},{:08x}",
                    r.status as u8, r.frame_count, r.mismatch_count, r.embedded_crc, r.computed_crc
                )?;
            } else {
                writeln!(out, "marked video: {}", summary.marked_path.display())?;
                writeln!(out, "key:          {}", summary.key_path.display())?;
                if let Some(p) = &summary.restored_path {
                    writeln!(out, "restored:     {}", p.display())?;
                }
                if let Some(reason) = &summary.format_error {
                    writeln!(out, "format error: {reason}")?;
                }
            }
            if !summary.checks.is_empty() {
                report_checks(&summary.checks, porcelain, out)?;
            }
            Ok(if r.status == VerifyStatus::Ok { EXIT_OK } else { EXIT_MISMATCH })
        }
        Command::Bench(a) => {
            if a.workers.is_empty() || a.workers.contains(&0) {
                return Err("--workers needs a list of counts >= 1".into());
            }
            let result = bench_embed(a.width, a.height, a.wm_bytes, &a.workers, a.reps)?;
            writeln!(out, "workers,width,height,wm_bytes,median_ms,speedup")?;
            for line in result.csv_lines() {
                writeln!(out, "{line}")?;
            }
            if !porcelain {
                let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
                writeln!(
                    out,
                    "{}x{} frame, {} byte watermark, median of {} runs on {} core(s)",
                    result.width, result.height, result.watermark_bytes, result.repetitions, cores
                )?;
                for s in &result.samples {
                    writeln!(
                        out,
                        "  {:>3} worker(s): {:>9.3} ms  speedup {:.2}x",
                        s.workers,
                        s.median.as_secs_f64() * 1e3,
                        s.speedup
                    )?;
                }
            }
            Ok(EXIT_OK)
        }
    }
}

fn load_video(path: &Path) -> Result<Mv1Video, Box<dyn Error>> {
    let bytes = read_file(path)?;
    read_mv1(&bytes).map_err(|e| format!("{}: {e}", path.display()).into())
}

fn report_checks(checks: &[FrameCheck], porcelain: bool, out: &mut dyn Write) -> CliResult {
    let mut failures = 0;
    for c in checks {
        match c {
            FrameCheck::Verified(r) => {
                let verdict = if r.matched { "match" } else { "mismatch" };
                if !r.matched {
                    failures += 1;
                }
                if porcelain {
                    writeln!(out, "frame,{},{verdict},{:08x},{:08x}", r.frame, r.embedded_crc, r.computed_crc)?;
                } else {
                    writeln!(
                        out,
                        "I-frame {:>4}: {verdict:<8} embedded {:08x} computed {:08x}",
                        r.frame, r.embedded_crc, r.computed_crc
                    )?;
                }
            }
            FrameCheck::Unreadable { frame, error } => {
                failures += 1;
                if porcelain {
                    writeln!(out, "frame,{frame},mismatch,unreadable,{error}")?;
                } else {
                    writeln!(out, "I-frame {frame:>4}: mismatch (header unreadable: {error})")?;
                }
            }
        }
    }
    if !porcelain {
        writeln!(out, "{} of {} I-frame(s) verified", checks.len() - failures, checks.len())?;
    }
    Ok(if failures == 0 { EXIT_OK } else { EXIT_MISMATCH })
}

fn index(file: &Path, porcelain: bool, out: &mut dyn Write) -> CliResult {
    write_index_report(&read_file(file)?, porcelain, out)
}

fn read_file(path: &Path) -> io::Result<Vec<u8>> {
    fs::read(path).map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, bytes: impl AsRef<[u8]>) -> io::Result<()> {
    fs::write(path, bytes).map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

/// The `index` report for in-memory bytes: MV1 files are walked structurally,
/// anything else is scanned as an MPEG-1 stream.
pub fn write_index_report(bytes: &[u8], porcelain: bool, out: &mut dyn Write) -> CliResult {
    if bytes.starts_with(&MV1_MAGIC) {
        let video = read_mv1(bytes)?;
        index_mv1(&video, porcelain, out)
    } else {
        index_stream(bytes, porcelain, out)
    }
}

fn index_mv1(video: &Mv1Video, porcelain: bool, out: &mut dyn Write) -> CliResult {
    let capacity = capacity_bytes(usize::from(video.width) * usize::from(video.height));
    let offsets = video.picture_offsets();
    let mut counts = crate::bitstream::TypeCounts::default();
    let mut rows = Vec::new();
    let mut ordinal = 0;
    for (g, gop) in video.gops.iter().enumerate() {
        for pic in &gop.pictures {
            counts.add(pic.coding_type);
            if pic.coding_type == PictureCodingType::I {
                rows.push((offsets[ordinal], g, pic.temporal_reference));
            }
            ordinal += 1;
        }
    }
    let summary = IndexSummary {
        format: "mv1",
        dimensions: Some((video.width, video.height)),
        sequence_headers: 1,
        gops: video.gops.len(),
        counts,
        capacity: Some(capacity),
        i_frames: rows,
        warnings: Vec::new(),
    };
    summary.print(porcelain, out)
}

fn index_stream(bytes: &[u8], porcelain: bool, out: &mut dyn Write) -> CliResult {
    let idx = index_mpeg1(bytes);
    let dims = idx.dimensions.map(|d| (d.width, d.height));
    let mut warnings: Vec<String> = idx.diagnostics.iter().map(|d| d.to_string()).collect();
    if idx.gop_without_leading_i {
        warnings.push("a GOP does not start with an I picture".into());
    }
    let summary = IndexSummary {
        format: "mpeg1",
        dimensions: dims,
        sequence_headers: idx.sequence_header_offsets.len(),
        gops: idx.gop_offsets.len(),
        counts: idx.counts,
        capacity: dims.map(|(w, h)| capacity_bytes(usize::from(w) * usize::from(h))),
        i_frames: idx
            .i_frames()
            .map(|p| (p.offset, p.gop_index.unwrap_or(0), p.temporal_reference))
            .collect(),
        warnings,
    };
    summary.print(porcelain, out)
}

struct IndexSummary {
    format: &'static str,
    dimensions: Option<(u16, u16)>,
    sequence_headers: usize,
    gops: usize,
    counts: crate::bitstream::TypeCounts,
    capacity: Option<usize>,
    /// (offset, gop, temporal reference)
    i_frames: Vec<(usize, usize, u16)>,
    warnings: Vec<String>,
}

impl IndexSummary {
    fn print(&self, porcelain: bool, out: &mut dyn Write) -> CliResult {
        let c = &self.counts;
        let cap = self.capacity.map_or_else(|| "unknown".to_string(), |b| b.to_string());
        if porcelain {
            writeln!(out, "format,{}", self.format)?;
            writeln!(out, "counts,{},{},{},{}", c.i, c.p, c.b, c.d)?;
            for (offset, gop, tr) in &self.i_frames {
                writeln!(out, "iframe,{offset},{gop},{tr},{cap}")?;
            }
            for w in &self.warnings {
                writeln!(out, "warning,{w}")?;
            }
        } else {
            writeln!(out, "format:           {}", self.format)?;
            match self.dimensions {
                Some((w, h)) => writeln!(out, "dimensions:       {w}x{h}")?,
                None => writeln!(out, "dimensions:       unknown")?,
            }
            writeln!(out, "sequence headers: {}", self.sequence_headers)?;
            writeln!(out, "GOPs:             {}", self.gops)?;
            writeln!(out, "pictures:         {} (I {}, P {}, B {}, D {})", c.total(), c.i, c.p, c.b, c.d)?;
            writeln!(out, "capacity/I-frame: {cap} bytes")?;
            if !self.i_frames.is_empty() {
                writeln!(out, "{:>10}  {:>5}  {:>5}", "offset", "gop", "tref")?;
                for (offset, gop, tr) in &self.i_frames {
                    writeln!(out, "{offset:>10}  {gop:>5}  {tr:>5}")?;
                }
            }
            for w in &self.warnings {
                writeln!(out, "warning: {w}")?;
            }
        }
        Ok(EXIT_OK)
    }
}
