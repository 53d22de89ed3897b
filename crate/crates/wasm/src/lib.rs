//! Browser bindings for the vidmark demo page.
//!
//! Three things are exposed: embedding a watermark into a synthesized
//! I-frame (with an amplified view of the changed low bits), indexing a
//! user-supplied stream, and tabulating the Base64 sextet split of a text.

use vidmark::base64codec::{b64_encode, sextets_of, split_sextet};
use vidmark::bitstream::{pack_picture_header, GROUP_START_CODE, PICTURE_START_CODE, SEQUENCE_HEADER_CODE};
use vidmark::container::{synth_sample, write_mv1, RgbFrame};
use vidmark::watermark::{
    capacity_bytes, embed_frame_with, pixels_needed, read_header, restore_frame, verify_frame, WatermarkKey,
};
use wasm_bindgen::prelude::*;

/// Result of embedding a watermark into one synthesized frame.
#[wasm_bindgen]
pub struct EmbedDemo {
    original: RgbFrame,
    marked: RgbFrame,
    key: WatermarkKey,
    restored_exact: bool,
}

#[wasm_bindgen]
impl EmbedDemo {
    /// Synthesizes a `width` x `height` I-frame from `seed` and embeds `text`.
    #[wasm_bindgen(constructor)]
    pub fn new(width: u16, height: u16, seed: u32, text: &str) -> Result<EmbedDemo, String> {
        if width == 0 || height == 0 {
            return Err("frame must be at least 1x1".into());
        }
        let video = synth_sample(width, height, 1, 1, u64::from(seed));
        let original = video.i_frames().next().expect("sample has one I-frame").clone();
        // wasm32 has no threads; one worker keeps the kernel on the main thread
        let (marked, key) = embed_frame_with(&original, text.as_bytes(), 1).map_err(|e| e.to_string())?;
        let restored_exact = restore_frame(&marked, &key).is_ok_and(|r| r == original);
        Ok(EmbedDemo {
            original,
            marked,
            key,
            restored_exact,
        })
    }

    pub fn width(&self) -> usize {
        self.original.width()
    }

    pub fn height(&self) -> usize {
        self.original.height()
    }

    pub fn original_rgba(&self) -> Vec<u8> {
        rgba(&self.original)
    }

    pub fn marked_rgba(&self) -> Vec<u8> {
        rgba(&self.marked)
    }

    /// Per-channel `|marked - original|` scaled by `gain` so 2-bit changes are visible.
    pub fn diff_rgba(&self, gain: u8) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.original.pixel_count() * 4);
        for (a, b) in self.original.pixels().iter().zip(self.marked.pixels()) {
            out.extend_from_slice(&[
                a.r.abs_diff(b.r).saturating_mul(gain),
                a.g.abs_diff(b.g).saturating_mul(gain),
                a.b.abs_diff(b.b).saturating_mul(gain),
                255,
            ]);
        }
        out
    }

    pub fn max_delta(&self) -> u8 {
        self.original
            .pixels()
            .iter()
            .zip(self.marked.pixels())
            .map(|(a, b)| a.r.abs_diff(b.r).max(a.g.abs_diff(b.g)).max(a.b.abs_diff(b.b)))
            .max()
            .unwrap_or(0)
    }

    pub fn changed_pixels(&self) -> usize {
        self.original
            .pixels()
            .iter()
            .zip(self.marked.pixels())
            .filter(|(a, b)| a != b)
            .count()
    }

    pub fn pixels_used(&self) -> usize {
        let len = read_header(&self.marked).map_or(0, |h| h.payload_len as usize);
        pixels_needed(len)
    }

    pub fn capacity_bytes(&self) -> usize {
        capacity_bytes(self.original.pixel_count())
    }

    pub fn crc32_hex(&self) -> String {
        format!("{:08x}", self.key.crc32)
    }

    pub fn key_base64(&self) -> String {
        self.key.base64_text.clone()
    }

    pub fn restored_exact(&self) -> bool {
        self.restored_exact
    }

    /// Flips the low bit of one channel (0 = R, 1 = G, 2 = B) of pixel
    /// `index` in a copy of the marked frame, then verifies and restores it.
    pub fn tamper(&self, index: usize, channel: u8) -> String {
        let mut copy = self.marked.clone();
        let Some(p) = copy.pixels_mut().get_mut(index) else {
            return format!("pixel {index} is outside the frame");
        };
        match channel {
            0 => p.r ^= 1,
            1 => p.g ^= 1,
            _ => p.b ^= 1,
        }
        let verdict = match verify_frame(&copy, &self.key, 0) {
            Ok(r) if r.matched => "checksum match".to_string(),
            Ok(r) => format!("checksum mismatch (embedded {:08x}, key {:08x})", r.embedded_crc, r.computed_crc),
            Err(e) => format!("header unreadable: {e}"),
        };
        let restored = match restore_frame(&copy, &self.key) {
            Ok(r) if r == self.original => "restoration exact",
            Ok(_) => "restoration differs from the original",
            Err(_) => "restoration refused",
        };
        format!("{verdict}; {restored}")
    }
}

fn rgba(frame: &RgbFrame) -> Vec<u8> {
    let mut out = Vec::with_capacity(frame.pixel_count() * 4);
    for p in frame.pixels() {
        out.extend_from_slice(&[p.r, p.g, p.b, 255]);
    }
    out
}

/// Human-readable I-frame index of an MPEG-1 stream or MV1 file.
#[wasm_bindgen]
pub fn index_report(bytes: &[u8]) -> String {
    let mut out = Vec::new();
    match vidmark::cli::write_index_report(bytes, false, &mut out) {
        Ok(_) => String::from_utf8_lossy(&out).into_owned(),
        Err(e) => format!("error: {e}"),
    }
}

/// A headers-only MPEG-1 elementary stream: one sequence header, then
/// `gops` GOPs whose pictures follow `pattern` (letters I, P, B, D).
#[wasm_bindgen]
pub fn sample_mpeg1_stream(width: u16, height: u16, gops: u32, pattern: &str) -> Vec<u8> {
    let (w, h) = (width & 0xFFF, height & 0xFFF);
    let mut s = vec![
        0,
        0,
        1,
        SEQUENCE_HEADER_CODE,
        (w >> 4) as u8,
        (((w & 0xF) << 4) as u8) | ((h >> 8) as u8),
        h as u8,
        0x13,
    ];
    for _ in 0..gops {
        s.extend_from_slice(&[0, 0, 1, GROUP_START_CODE, 0x08, 0x00, 0x08, 0x00]);
        for (tr, c) in pattern.chars().enumerate() {
            let value = match c.to_ascii_uppercase() {
                'I' => 1,
                'P' => 2,
                'B' => 3,
                'D' => 4,
                _ => continue,
            };
            s.extend_from_slice(&[0, 0, 1, PICTURE_START_CODE]);
            s.extend_from_slice(&pack_picture_header(tr as u16, value));
            // filler standing in for slice data
            s.extend_from_slice(&[0xFF, 0xF8, 0x12, 0x34]);
        }
    }
    s
}

/// A synthesized MV1 file, for feeding back into [`index_report`].
#[wasm_bindgen]
pub fn sample_mv1(width: u16, height: u16, gops: u32, pictures_per_gop: u16, seed: u32) -> Vec<u8> {
    if width == 0 || height == 0 || gops == 0 || pictures_per_gop == 0 {
        return Vec::new();
    }
    write_mv1(&synth_sample(width, height, gops, pictures_per_gop, u64::from(seed))).unwrap_or_default()
}

/// Base64 text of `text`, followed by one line per sextet:
/// `symbol value binary v1 v2 v3`. At most `limit` sextet lines are listed.
#[wasm_bindgen]
pub fn sextet_table(text: &str, limit: usize) -> String {
    let encoded = b64_encode(text.as_bytes());
    let sextets = sextets_of(text.as_bytes());
    let mut out = format!("base64: {encoded}\n");
    out.push_str("sym  val  bits    V1 V2 V3\n");
    for (s, sym) in sextets.iter().zip(encoded.chars()).take(limit) {
        let t = split_sextet(*s);
        out.push_str(&format!(
            " {sym}   {:>2}   {:06b}   {}  {}  {}\n",
            s.value(),
            s.value(),
            t.v1,
            t.v2,
            t.v3
        ));
    }
    if sextets.len() > limit {
        out.push_str(&format!("... {} more\n", sextets.len() - limit));
    }
    out
}
