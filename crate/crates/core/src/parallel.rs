//! Fork-join execution of per-pixel kernels over contiguous row ranges.
//!
//! Each worker reads the shared input frame and writes only its own rows of
//! the output, so the result is bit-identical to a sequential row-major pass
//! for any worker count.

use std::ops::Range;
use std::time::{Duration, Instant};

use crate::container::{synth_sample, RgbFrame, RgbPixel};
use crate::watermark::{embed_frame_with, pixels_needed, WatermarkError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowPartition {
    pub ranges: Vec<Range<usize>>,
    pub worker_count: usize,
}

/// Splits `height` rows into at most `workers` contiguous chunks whose sizes
/// differ by at most one; the larger chunks come first.
pub fn partition_rows(height: usize, workers: usize) -> RowPartition {
    assert!(height >= 1, "height must be at least 1");
    assert!(workers >= 1, "need at least one worker");
    let chunks = workers.min(height);
    let base = height / chunks;
    let extra = height % chunks;
    let mut ranges = Vec::with_capacity(chunks);
    let mut start = 0;
    for i in 0..chunks {
        let len = base + usize::from(i < extra);
        ranges.push(start..start + len);
        start += len;
    }
    RowPartition {
        ranges,
        worker_count: chunks,
    }
}

/// Applies `kernel` to every pixel. Pixel `i` receives `aux.get(i)`, so pixels
/// past the end of `aux` see `None`.
///
/// The kernel must depend only on its own pixel and auxiliary value.
pub fn par_apply<A, K>(frame: &RgbFrame, aux: &[A], workers: usize, kernel: K) -> RgbFrame
where
    A: Sync,
    K: Fn(RgbPixel, Option<&A>) -> RgbPixel + Sync,
{
    let width = frame.width();
    let src = frame.pixels();
    let mut out = vec![RgbPixel::default(); src.len()];
    let partition = partition_rows(frame.height(), workers);

    let run = |rows: &Range<usize>, dst: &mut [RgbPixel]| {
        let base = rows.start * width;
        let input = &src[base..base + dst.len()];
        for (k, (d, s)) in dst.iter_mut().zip(input).enumerate() {
            *d = kernel(*s, aux.get(base + k));
        }
    };

    if partition.worker_count == 1 {
        run(&partition.ranges[0], &mut out);
    } else {
        std::thread::scope(|scope| {
            let mut rest = out.as_mut_slice();
            for rows in &partition.ranges {
                let (dst, tail) = rest.split_at_mut(rows.len() * width);
                rest = tail;
                let run = &run;
                scope.spawn(move || run(rows, dst));
            }
        });
    }
    RgbFrame::new(width, frame.height(), out).expect("output has the input's shape")
}

/// Reference row-major pass; what `par_apply` must reproduce.
pub fn seq_apply<A, K>(frame: &RgbFrame, aux: &[A], kernel: K) -> RgbFrame
where
    K: Fn(RgbPixel, Option<&A>) -> RgbPixel,
{
    let pixels = frame
        .pixels()
        .iter()
        .enumerate()
        .map(|(i, p)| kernel(*p, aux.get(i)))
        .collect();
    RgbFrame::new(frame.width(), frame.height(), pixels).expect("output has the input's shape")
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchSample {
    pub workers: usize,
    pub median: Duration,
    pub speedup: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchResult {
    pub width: usize,
    pub height: usize,
    pub watermark_bytes: usize,
    pub repetitions: usize,
    pub samples: Vec<BenchSample>,
}

impl BenchResult {
    /// One `workers,width,height,wm_bytes,median_ms,speedup` line per sample.
    pub fn csv_lines(&self) -> Vec<String> {
        self.samples
            .iter()
            .map(|s| {
                format!(
                    "{},{},{},{},{:.3},{:.3}",
                    s.workers,
                    self.width,
                    self.height,
                    self.watermark_bytes,
                    s.median.as_secs_f64() * 1e3,
                    s.speedup
                )
            })
            .collect()
    }

    pub fn speedup(&self, workers: usize) -> Option<f64> {
        self.samples.iter().find(|s| s.workers == workers).map(|s| s.speedup)
    }
}

pub(crate) fn median(mut times: Vec<Duration>) -> Duration {
    times.sort();
    let n = times.len();
    if n % 2 == 1 {
        times[n / 2]
    } else {
        (times[n / 2 - 1] + times[n / 2]) / 2
    }
}

/// Times `op` for each worker count. The first output is the reference; every
/// other worker count must reproduce it exactly before its timings count.
pub(crate) fn bench_with<T, F>(worker_list: &[usize], repetitions: usize, mut op: F) -> Result<Vec<BenchSample>, usize>
where
    T: PartialEq,
    F: FnMut(usize) -> T,
{
    assert!(repetitions >= 1);
    let mut baseline: Option<T> = None;
    let mut medians = Vec::with_capacity(worker_list.len());
    for &workers in worker_list {
        let mut times = Vec::with_capacity(repetitions);
        for _ in 0..repetitions {
            let start = Instant::now();
            let out = op(workers);
            times.push(start.elapsed().max(Duration::from_nanos(1)));
            match &baseline {
                None => baseline = Some(out),
                Some(b) if *b != out => return Err(workers),
                Some(_) => {}
            }
        }
        medians.push((workers, median(times)));
    }
    let reference = medians
        .iter()
        .find(|(w, _)| *w == 1)
        .map(|(_, t)| *t)
        .unwrap_or(medians[0].1);
    Ok(medians
        .into_iter()
        .map(|(workers, median)| BenchSample {
            workers,
            median,
            speedup: if workers == 1 {
                1.0
            } else {
                reference.as_secs_f64() / median.as_secs_f64()
            },
        })
        .collect())
}

/// Times [`embed_frame_with`] on a synthesized frame for each worker count.
///
/// Outputs for all worker counts are compared against the first before any
/// timing is reported.
pub fn bench_embed(
    width: u16,
    height: u16,
    watermark_size: usize,
    worker_list: &[usize],
    repetitions: usize,
) -> Result<BenchResult, WatermarkError> {
    let video = synth_sample(width, height, 1, 1, 0x5EED);
    let frame = video.i_frames().next().expect("sample has an I-frame").clone();
    if pixels_needed(watermark_size) > frame.pixel_count() {
        return Err(WatermarkError::Capacity {
            frame: None,
            needed: pixels_needed(watermark_size),
            available: frame.pixel_count(),
        });
    }
    let watermark: Vec<u8> = (0..watermark_size).map(|i| (i * 31 + 7) as u8).collect();
    let samples = bench_with(worker_list, repetitions.max(1), |workers| {
        embed_frame_with(&frame, &watermark, workers).expect("capacity checked").0
    })
    .unwrap_or_else(|workers| panic!("embedding with {workers} workers diverged from the reference output"));
    Ok(BenchResult {
        width: usize::from(width),
        height: usize::from(height),
        watermark_bytes: watermark_size,
        repetitions: repetitions.max(1),
        samples,
    })
}
