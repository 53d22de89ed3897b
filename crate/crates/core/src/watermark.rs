//! 2-bit LSB watermarking of I-frames.
//!
//! Pixels are visited in row-major order. The first [`HEADER_PIXELS`] pixels
//! carry an 11-byte [`PayloadHeader`] by substituting the two low bits of each
//! channel, which keeps the checksum readable without the original frame.
//! The watermark bytes follow as sextets XORed into the two low bits, so the
//! same sextets applied again restore the original pixels. The header pixels'
//! original low bits travel in the [`WatermarkKey`].

use thiserror::Error;

use crate::base64codec::{
    b64_decode, b64_encode, bytes_of_sextets, pack_sextets, sextet_count, sextets_of, split_sextet, Base64Error,
    Sextet, TwoBitTriple,
};
use crate::bitstream::PictureCodingType;
use crate::container::{Mv1Video, Payload, RgbFrame, RgbPixel};
use crate::parallel::par_apply;

pub const HEADER_MAGIC: [u8; 2] = *b"WM";
pub const HEADER_VERSION: u8 = 0x01;
pub const HEADER_LEN: usize = 11;
/// Pixels occupied by the header: ceil(11 * 8 / 6).
pub const HEADER_PIXELS: usize = 15;
/// Packed size of one frame's header-pixel backup: ceil(15 * 6 / 8).
pub const HEADER_BACKUP_LEN: usize = 12;

const CRC_TABLE: [u32; 256] = {
    let mut table = [0u32; 256];
    let mut i = 0;
    while i < 256 {
        let mut c = i as u32;
        let mut k = 0;
        while k < 8 {
            c = if c & 1 != 0 { 0xEDB8_8320 ^ (c >> 1) } else { c >> 1 };
            k += 1;
        }
        table[i] = c;
        i += 1;
    }
    table
};

/// CRC-32/ISO-HDLC (the zlib / PNG checksum).
pub fn crc32(data: &[u8]) -> u32 {
    !data.iter().fold(!0u32, |c, &b| CRC_TABLE[((c ^ u32::from(b)) & 0xFF) as usize] ^ (c >> 8))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WatermarkError {
    #[error("watermark needs {needed} pixels but frame{} has {available}", frame.map(|f| format!(" {f}")).unwrap_or_default())]
    Capacity {
        frame: Option<usize>,
        needed: usize,
        available: usize,
    },
    #[error("frame carries no watermark header")]
    BadMagic,
    #[error("unsupported watermark header version {0}")]
    BadVersion(u8),
    #[error("invalid key: {0}")]
    InvalidKey(String),
    #[error(transparent)]
    InvalidBase64(#[from] Base64Error),
    #[error("key holds {key} header backups but the video has {video} I-frames")]
    KeyFrameCountMismatch { key: usize, video: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PayloadHeader {
    pub payload_len: u32,
    pub crc32: u32,
}

impl PayloadHeader {
    pub fn for_watermark(watermark: &[u8]) -> Self {
        Self {
            payload_len: watermark.len() as u32,
            crc32: crc32(watermark),
        }
    }

    pub fn to_bytes(self) -> [u8; HEADER_LEN] {
        let mut b = [0u8; HEADER_LEN];
        b[..2].copy_from_slice(&HEADER_MAGIC);
        b[2] = HEADER_VERSION;
        b[3..7].copy_from_slice(&self.payload_len.to_be_bytes());
        b[7..11].copy_from_slice(&self.crc32.to_be_bytes());
        b
    }

    pub fn from_bytes(b: &[u8; HEADER_LEN]) -> Result<Self, WatermarkError> {
        if b[..2] != HEADER_MAGIC {
            return Err(WatermarkError::BadMagic);
        }
        if b[2] != HEADER_VERSION {
            return Err(WatermarkError::BadVersion(b[2]));
        }
        Ok(Self {
            payload_len: u32::from_be_bytes([b[3], b[4], b[5], b[6]]),
            crc32: u32::from_be_bytes([b[7], b[8], b[9], b[10]]),
        })
    }
}

/// Original low bits of one frame's header pixels, packed as 15 sextets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HeaderBackup(pub [u8; HEADER_BACKUP_LEN]);

impl HeaderBackup {
    fn capture(frame: &RgbFrame) -> Self {
        let sextets: Vec<Sextet> = frame.pixels()[..HEADER_PIXELS].iter().map(|&p| low_bits(p)).collect();
        let packed = pack_sextets(&sextets);
        Self(packed.try_into().expect("15 sextets pack into 12 bytes"))
    }

    /// The packed form leaves the last six bits unused; they must be zero.
    pub fn is_canonical(&self) -> bool {
        self.0[HEADER_BACKUP_LEN - 1] & 0x3F == 0
    }

    fn sextets(&self) -> Vec<Sextet> {
        let mut s = sextets_of(&self.0);
        s.truncate(HEADER_PIXELS);
        s
    }
}

/// Everything the receiving side needs to restore and verify marked I-frames.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WatermarkKey {
    pub base64_text: String,
    /// One entry per marked I-frame, in stream order.
    pub header_backups: Vec<HeaderBackup>,
    pub crc32: u32,
}

impl WatermarkKey {
    /// Decodes the watermark and checks it against the stored checksum.
    pub fn watermark(&self) -> Result<Vec<u8>, WatermarkError> {
        let bytes = b64_decode(&self.base64_text)?;
        if crc32(&bytes) != self.crc32 {
            return Err(WatermarkError::InvalidKey("stored checksum does not match key text".into()));
        }
        Ok(bytes)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerificationReport {
    pub frame: usize,
    pub embedded_crc: u32,
    pub computed_crc: u32,
    pub matched: bool,
}

/// Per-frame result of [`restore_and_verify_video`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FrameCheck {
    Verified(VerificationReport),
    /// The frame's header could not be read or disagrees with the key.
    Unreadable { frame: usize, error: WatermarkError },
}

impl FrameCheck {
    pub fn frame(&self) -> usize {
        match self {
            Self::Verified(r) => r.frame,
            Self::Unreadable { frame, .. } => *frame,
        }
    }

    pub fn is_match(&self) -> bool {
        matches!(self, Self::Verified(r) if r.matched)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum LsbOp {
    Set(TwoBitTriple),
    Xor(TwoBitTriple),
}

fn low_bits(p: RgbPixel) -> Sextet {
    TwoBitTriple {
        v1: p.r & 3,
        v2: p.g & 3,
        v3: p.b & 3,
    }
    .recombine()
}

fn apply_op(p: RgbPixel, op: Option<&LsbOp>) -> RgbPixel {
    match op {
        None => p,
        Some(LsbOp::Xor(t)) => RgbPixel::new(p.r ^ t.v1, p.g ^ t.v2, p.b ^ t.v3),
        Some(LsbOp::Set(t)) => RgbPixel::new((p.r & !3) | t.v1, (p.g & !3) | t.v2, (p.b & !3) | t.v3),
    }
}

/// Pixels needed to carry a watermark of `len` bytes plus the header.
pub fn pixels_needed(len: usize) -> usize {
    HEADER_PIXELS + sextet_count(len)
}

/// Largest watermark, in bytes, that fits into a frame of `pixels` pixels.
pub fn capacity_bytes(pixels: usize) -> usize {
    pixels.saturating_sub(HEADER_PIXELS) * 3 / 4
}

fn check_capacity(frame: &RgbFrame, len: usize, ordinal: Option<usize>) -> Result<(), WatermarkError> {
    let needed = pixels_needed(len);
    if needed > frame.pixel_count() {
        return Err(WatermarkError::Capacity {
            frame: ordinal,
            needed,
            available: frame.pixel_count(),
        });
    }
    Ok(())
}

fn plan(header: impl IntoIterator<Item = Sextet>, body: &[Sextet]) -> Vec<LsbOp> {
    let mut ops = Vec::with_capacity(HEADER_PIXELS + body.len());
    ops.extend(header.into_iter().map(|s| LsbOp::Set(split_sextet(s))));
    ops.extend(body.iter().map(|&s| LsbOp::Xor(split_sextet(s))));
    ops
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn embed_with_sextets(
    frame: &RgbFrame,
    header: &PayloadHeader,
    body: &[Sextet],
    workers: usize,
) -> (RgbFrame, HeaderBackup) {
    let backup = HeaderBackup::capture(frame);
    let ops = plan(sextets_of(&header.to_bytes()), body);
    (par_apply(frame, &ops, workers, apply_op), backup)
}

pub fn embed_frame(frame: &RgbFrame, watermark: &[u8]) -> Result<(RgbFrame, WatermarkKey), WatermarkError> {
    embed_frame_with(frame, watermark, default_workers())
}

/// [`embed_frame`] with an explicit worker count; output is identical for any count.
pub fn embed_frame_with(
    frame: &RgbFrame,
    watermark: &[u8],
    workers: usize,
) -> Result<(RgbFrame, WatermarkKey), WatermarkError> {
    check_capacity(frame, watermark.len(), None)?;
    let header = PayloadHeader::for_watermark(watermark);
    let (marked, backup) = embed_with_sextets(frame, &header, &sextets_of(watermark), workers);
    Ok((
        marked,
        WatermarkKey {
            base64_text: b64_encode(watermark),
            header_backups: vec![backup],
            crc32: header.crc32,
        },
    ))
}

/// Reads the header from the low bits of the first 15 pixels. Needs no key.
pub fn read_header(marked: &RgbFrame) -> Result<PayloadHeader, WatermarkError> {
    if marked.pixel_count() < HEADER_PIXELS {
        return Err(WatermarkError::Capacity {
            frame: None,
            needed: HEADER_PIXELS,
            available: marked.pixel_count(),
        });
    }
    let sextets: Vec<Sextet> = marked.pixels()[..HEADER_PIXELS].iter().map(|&p| low_bits(p)).collect();
    let bytes: [u8; HEADER_LEN] = bytes_of_sextets(&sextets, HEADER_LEN)
        .try_into()
        .expect("15 sextets hold 11 bytes");
    PayloadHeader::from_bytes(&bytes)
}

fn restore_with(marked: &RgbFrame, body: &[Sextet], backup: &HeaderBackup, workers: usize) -> RgbFrame {
    let ops = plan(backup.sextets(), body);
    par_apply(marked, &ops, workers, apply_op)
}

fn checked_restore(
    marked: &RgbFrame,
    watermark: &[u8],
    backup: &HeaderBackup,
    workers: usize,
) -> Result<RgbFrame, WatermarkError> {
    check_capacity(marked, watermark.len(), None)?;
    if !backup.is_canonical() {
        return Err(WatermarkError::InvalidKey("header backup has non-zero padding bits".into()));
    }
    let header = read_header(marked)?;
    if header.payload_len as usize != watermark.len() {
        return Err(WatermarkError::InvalidKey(format!(
            "key carries {} watermark bytes, frame header declares {}",
            watermark.len(),
            header.payload_len
        )));
    }
    Ok(restore_with(marked, &sextets_of(watermark), backup, workers))
}

/// Restores a frame marked by [`embed_frame`] using the key's first header backup.
pub fn restore_frame(marked: &RgbFrame, key: &WatermarkKey) -> Result<RgbFrame, WatermarkError> {
    restore_frame_at(marked, key, 0)
}

/// Restores the `ordinal`-th marked I-frame of a video.
pub fn restore_frame_at(marked: &RgbFrame, key: &WatermarkKey, ordinal: usize) -> Result<RgbFrame, WatermarkError> {
    let backup = key
        .header_backups
        .get(ordinal)
        .ok_or_else(|| WatermarkError::InvalidKey(format!("no header backup for frame {ordinal}")))?;
    let watermark = b64_decode(&key.base64_text)?;
    checked_restore(marked, &watermark, backup, default_workers())
}

/// Compares the checksum embedded in the frame with one computed from the key text.
pub fn verify_frame(marked: &RgbFrame, key: &WatermarkKey, ordinal: usize) -> Result<VerificationReport, WatermarkError> {
    let computed_crc = crc32(&b64_decode(&key.base64_text)?);
    verify_against(marked, computed_crc, ordinal)
}

fn verify_against(marked: &RgbFrame, computed_crc: u32, frame: usize) -> Result<VerificationReport, WatermarkError> {
    let header = read_header(marked)?;
    Ok(VerificationReport {
        frame,
        embedded_crc: header.crc32,
        computed_crc,
        matched: header.crc32 == computed_crc,
    })
}

/// Embeds the same watermark into every I-frame; other pictures pass through.
pub fn embed_video(video: &Mv1Video, watermark: &[u8]) -> Result<(Mv1Video, WatermarkKey), WatermarkError> {
    embed_video_with(video, watermark, default_workers())
}

pub fn embed_video_with(
    video: &Mv1Video,
    watermark: &[u8],
    workers: usize,
) -> Result<(Mv1Video, WatermarkKey), WatermarkError> {
    for (i, frame) in video.i_frames().enumerate() {
        check_capacity(frame, watermark.len(), Some(i))?;
    }
    let header = PayloadHeader::for_watermark(watermark);
    let body = sextets_of(watermark);
    let mut backups = Vec::new();
    let mut marked = video.clone();
    for pic in marked.gops.iter_mut().flat_map(|g| g.pictures.iter_mut()) {
        if let (PictureCodingType::I, Payload::Frame(frame)) = (pic.coding_type, &mut pic.payload) {
            let (m, backup) = embed_with_sextets(frame, &header, &body, workers);
            *frame = m;
            backups.push(backup);
        }
    }
    Ok((
        marked,
        WatermarkKey {
            base64_text: b64_encode(watermark),
            header_backups: backups,
            crc32: header.crc32,
        },
    ))
}

/// Restores every I-frame with the key and checks each frame's embedded checksum.
///
/// Frames whose header cannot be read are still restored from the key and
/// reported as [`FrameCheck::Unreadable`].
pub fn restore_and_verify_video(
    marked: &Mv1Video,
    key: &WatermarkKey,
) -> Result<(Mv1Video, Vec<FrameCheck>), WatermarkError> {
    let i_count = marked.i_frame_count();
    if key.header_backups.len() != i_count {
        return Err(WatermarkError::KeyFrameCountMismatch {
            key: key.header_backups.len(),
            video: i_count,
        });
    }
    if let Some(i) = key.header_backups.iter().position(|b| !b.is_canonical()) {
        return Err(WatermarkError::InvalidKey(format!("header backup {i} has non-zero padding bits")));
    }
    let watermark = b64_decode(&key.base64_text)?;
    let computed_crc = crc32(&watermark);
    let body = sextets_of(&watermark);
    let workers = default_workers();

    let mut restored = marked.clone();
    let mut checks = Vec::with_capacity(i_count);
    let frames = restored
        .gops
        .iter_mut()
        .flat_map(|g| g.pictures.iter_mut())
        .filter_map(|p| match (p.coding_type, &mut p.payload) {
            (PictureCodingType::I, Payload::Frame(f)) => Some(f),
            _ => None,
        });
    for (ordinal, (frame, backup)) in frames.zip(&key.header_backups).enumerate() {
        check_capacity(frame, watermark.len(), Some(ordinal))?;
        let check = match verify_against(frame, computed_crc, ordinal) {
            Ok(report) => match read_header(frame) {
                Ok(h) if h.payload_len as usize != watermark.len() => FrameCheck::Unreadable {
                    frame: ordinal,
                    error: WatermarkError::InvalidKey(format!(
                        "frame header declares {} watermark bytes, key carries {}",
                        h.payload_len,
                        watermark.len()
                    )),
                },
                _ => FrameCheck::Verified(report),
            },
            Err(error) => FrameCheck::Unreadable { frame: ordinal, error },
        };
        checks.push(check);
        *frame = restore_with(frame, &body, backup, workers);
    }
    Ok((restored, checks))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::container::synth_sample;
    use proptest::prelude::*;

    fn noise_frame(w: usize, h: usize, seed: u32) -> RgbFrame {
        let mut x = seed.wrapping_mul(2_654_435_761).wrapping_add(1);
        let pixels = (0..w * h)
            .map(|_| {
                x ^= x << 13;
                x ^= x >> 17;
                x ^= x << 5;
                RgbPixel::new(x as u8, (x >> 8) as u8, (x >> 16) as u8)
            })
            .collect();
        RgbFrame::new(w, h, pixels).unwrap()
    }

    #[test]
    fn crc_check_value() {
        assert_eq!(crc32(b"123456789"), 0xCBF4_3926);
        assert_eq!(crc32(b""), 0);
        assert_eq!(crc32(b"abc"), crc32(b"abc"));
    }

    #[test]
    fn header_is_eleven_bytes() {
        let h = PayloadHeader { payload_len: 10, crc32: 0xDEAD_BEEF };
        let b = h.to_bytes();
        assert_eq!(b, [b'W', b'M', 1, 0, 0, 0, 10, 0xDE, 0xAD, 0xBE, 0xEF]);
        assert_eq!(PayloadHeader::from_bytes(&b).unwrap(), h);
        let mut bad = b;
        bad[2] = 2;
        assert_eq!(PayloadHeader::from_bytes(&bad), Err(WatermarkError::BadVersion(2)));
        assert_eq!(sextets_of(&b).len(), HEADER_PIXELS);
    }

    #[test]
    fn body_pixel_xor_example() {
        let op = LsbOp::Xor(split_sextet(Sextet::new(0b110100).unwrap()));
        assert_eq!(apply_op(RgbPixel::new(200, 100, 50), Some(&op)), RgbPixel::new(203, 101, 50));
        let twice = apply_op(apply_op(RgbPixel::new(200, 100, 50), Some(&op)), Some(&op));
        assert_eq!(twice, RgbPixel::new(200, 100, 50));
    }

    #[test]
    fn capacity_arithmetic() {
        let f = noise_frame(4, 4, 1);
        assert_eq!(
            embed_frame(&f, &[7]),
            Err(WatermarkError::Capacity { frame: None, needed: 17, available: 16 })
        );
        assert!(embed_frame(&f, &[]).is_ok());
        assert_eq!(capacity_bytes(17), 1);
        assert_eq!(capacity_bytes(16), 0);
        for pixels in 15..200 {
            let n = capacity_bytes(pixels);
            assert!(pixels_needed(n) <= pixels);
            assert!(pixels_needed(n + 1) > pixels);
        }
    }

    #[test]
    fn header_round_trip_and_delta_bound() {
        let f = noise_frame(8, 8, 3);
        let w = b"owner: studio";
        let (m, key) = embed_frame(&f, w).unwrap();
        let h = read_header(&m).unwrap();
        assert_eq!(h.payload_len as usize, w.len());
        assert_eq!(h.crc32, crc32(w));
        assert_eq!(key.crc32, crc32(w));
        for (a, b) in f.pixels().iter().zip(m.pixels()) {
            assert!(a.r.abs_diff(b.r) <= 3 && a.g.abs_diff(b.g) <= 3 && a.b.abs_diff(b.b) <= 3);
        }
        let used = pixels_needed(w.len());
        assert_eq!(&f.pixels()[used..], &m.pixels()[used..]);
        assert_eq!(restore_frame(&m, &key).unwrap(), f);
    }

    #[test]
    fn unmarked_frame_has_bad_magic() {
        // 'W' opens with sextet 21; an all-zero frame reads sextet 0
        let f = RgbFrame::filled(5, 5, RgbPixel::new(0, 0, 0)).unwrap();
        assert_eq!(read_header(&f), Err(WatermarkError::BadMagic));
    }

    #[test]
    fn flipped_pixel_zero_breaks_header() {
        let (mut m, key) = embed_frame(&noise_frame(6, 6, 9), b"abc").unwrap();
        m.pixels_mut()[0].r ^= 1;
        assert_eq!(read_header(&m), Err(WatermarkError::BadMagic));
        assert_eq!(verify_frame(&m, &key, 0), Err(WatermarkError::BadMagic));
    }

    #[test]
    fn verify_outcomes() {
        let (m, key) = embed_frame(&noise_frame(8, 8, 5), b"hello").unwrap();
        assert!(verify_frame(&m, &key, 0).unwrap().matched);

        // body tamper is invisible to the checksum
        let mut body = m.clone();
        body.pixels_mut()[HEADER_PIXELS + 1].g ^= 2;
        assert!(verify_frame(&body, &key, 0).unwrap().matched);
        assert_ne!(restore_frame(&body, &key).unwrap(), noise_frame(8, 8, 5));

        // crc byte tampered inside the header region
        let mut hdr = m.clone();
        hdr.pixels_mut()[12].b ^= 1;
        let r = verify_frame(&hdr, &key, 0).unwrap();
        assert!(!r.matched);

        let mut altered = key.clone();
        altered.base64_text = b64_encode(b"jello");
        let r = verify_frame(&m, &altered, 0).unwrap();
        assert!(!r.matched);
        assert_eq!(r.embedded_crc, crc32(b"hello"));
    }

    #[test]
    fn restore_rejects_length_mismatch() {
        let (m, key) = embed_frame(&noise_frame(8, 8, 5), b"hello").unwrap();
        let mut wrong = key.clone();
        wrong.base64_text = b64_encode(b"hello!");
        assert!(matches!(restore_frame(&m, &wrong), Err(WatermarkError::InvalidKey(_))));
        let mut bad = key;
        bad.base64_text = "@@@@".into();
        assert!(matches!(restore_frame(&m, &bad), Err(WatermarkError::InvalidBase64(_))));
    }

    #[test]
    fn worker_count_does_not_change_output() {
        let f = noise_frame(31, 17, 2);
        let w: Vec<u8> = (0..200).map(|i| i as u8).collect();
        let (reference, _) = embed_frame_with(&f, &w, 1).unwrap();
        for workers in [2, 3, 4, 7, 40] {
            assert_eq!(embed_frame_with(&f, &w, workers).unwrap().0, reference);
        }
    }

    #[test]
    fn video_embed_and_restore() {
        let v = synth_sample(16, 16, 2, 2, 11);
        let (m, key) = embed_video(&v, b"0123456789").unwrap();
        assert_eq!(key.header_backups.len(), 2);
        for (a, b) in v.pictures().zip(m.pictures()) {
            match (&a.payload, &b.payload) {
                (Payload::Frame(fa), Payload::Frame(fb)) => assert_ne!(fa, fb),
                (pa, pb) => assert_eq!(pa, pb),
            }
        }
        let (r, checks) = restore_and_verify_video(&m, &key).unwrap();
        assert_eq!(r, v);
        assert_eq!(checks.len(), 2);
        assert!(checks.iter().all(FrameCheck::is_match));
    }

    #[test]
    fn empty_watermark_is_header_only() {
        let v = synth_sample(4, 4, 1, 1, 0);
        let (m, key) = embed_video(&v, b"").unwrap();
        let f = m.i_frames().next().unwrap();
        assert_eq!(read_header(f).unwrap(), PayloadHeader { payload_len: 0, crc32: 0 });
        assert_eq!(&f.pixels()[HEADER_PIXELS..], &v.i_frames().next().unwrap().pixels()[HEADER_PIXELS..]);
        assert_eq!(restore_and_verify_video(&m, &key).unwrap().0, v);
    }

    #[test]
    fn video_capacity_names_frame() {
        let v = synth_sample(4, 4, 2, 1, 0);
        assert_eq!(
            embed_video(&v, b"x").unwrap_err(),
            WatermarkError::Capacity { frame: Some(0), needed: 17, available: 16 }
        );
    }

    #[test]
    fn corrupted_frame_is_isolated() {
        let v = synth_sample(8, 8, 3, 2, 4);
        let (mut m, key) = embed_video(&v, b"fingerprint").unwrap();
        if let Payload::Frame(f) = &mut m.gops[1].pictures[0].payload {
            f.pixels_mut()[0].r ^= 0xFF;
        }
        let (_, checks) = restore_and_verify_video(&m, &key).unwrap();
        let failing: Vec<usize> = checks.iter().filter(|c| !c.is_match()).map(FrameCheck::frame).collect();
        assert_eq!(failing, vec![1]);
    }

    #[test]
    fn key_backup_count_checked() {
        let v = synth_sample(8, 8, 2, 1, 4);
        let (m, mut key) = embed_video(&v, b"x").unwrap();
        key.header_backups.pop();
        assert_eq!(
            restore_and_verify_video(&m, &key).unwrap_err(),
            WatermarkError::KeyFrameCountMismatch { key: 1, video: 2 }
        );
    }

    proptest! {
        #[test]
        fn embed_restore_identity(
            w in 4usize..24, h in 4usize..24, seed in any::<u32>(),
            wm in proptest::collection::vec(any::<u8>(), 0..64),
        ) {
            let f = noise_frame(w, h, seed);
            prop_assume!(pixels_needed(wm.len()) <= f.pixel_count());
            let (m, key) = embed_frame(&f, &wm).unwrap();
            for (a, b) in f.pixels().iter().zip(m.pixels()) {
                prop_assert!(a.r.abs_diff(b.r) <= 3 && a.g.abs_diff(b.g) <= 3 && a.b.abs_diff(b.b) <= 3);
            }
            let used = pixels_needed(wm.len());
            prop_assert_eq!(&f.pixels()[used..], &m.pixels()[used..]);
            prop_assert_eq!(restore_frame(&m, &key).unwrap(), f);
        }
    }
}
