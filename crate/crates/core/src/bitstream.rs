//! Start-code scanning and picture-header indexing for MPEG-1 video streams.
//!
//! Only the layers above the slice are interpreted: sequence headers, GOP
//! headers and the leading fields of each picture header. Everything below
//! (slices, macroblocks, blocks) is left alone.

use std::fmt;

use thiserror::Error;

pub const SEQUENCE_HEADER_CODE: u8 = 0xB3;
pub const GROUP_START_CODE: u8 = 0xB8;
pub const PICTURE_START_CODE: u8 = 0x00;

/// Length of a start-code prefix plus its code byte.
pub const START_CODE_LEN: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StartCodeHit {
    pub offset: usize,
    pub code: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PictureCodingType {
    I,
    P,
    B,
    D,
}

impl PictureCodingType {
    pub const ALL: [PictureCodingType; 4] = [Self::I, Self::P, Self::B, Self::D];

    /// The 3-bit field value carried in the picture header.
    pub fn value(self) -> u8 {
        match self {
            Self::I => 1,
            Self::P => 2,
            Self::B => 3,
            Self::D => 4,
        }
    }

    pub fn from_value(value: u8) -> Option<Self> {
        match value {
            1 => Some(Self::I),
            2 => Some(Self::P),
            3 => Some(Self::B),
            4 => Some(Self::D),
            _ => None,
        }
    }
}

impl fmt::Display for PictureCodingType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            Self::I => "I",
            Self::P => "P",
            Self::B => "B",
            Self::D => "D",
        };
        f.write_str(c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum HeaderError {
    #[error("no picture start code at offset {0}")]
    NotPictureStartCode(usize),
    #[error("picture header at offset {0} is truncated")]
    TruncatedHeader(usize),
    #[error("invalid picture coding type {value} at offset {offset}")]
    InvalidCodingType { offset: usize, value: u8 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PictureRecord {
    /// Offset of the picture start code.
    pub offset: usize,
    /// 10-bit display-order counter.
    pub temporal_reference: u16,
    pub coding_type: PictureCodingType,
    /// Ordinal of the most recent GOP header before this picture.
    pub gop_index: Option<usize>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TypeCounts {
    pub i: usize,
    pub p: usize,
    pub b: usize,
    pub d: usize,
}

impl TypeCounts {
    pub fn add(&mut self, kind: PictureCodingType) {
        match kind {
            PictureCodingType::I => self.i += 1,
            PictureCodingType::P => self.p += 1,
            PictureCodingType::B => self.b += 1,
            PictureCodingType::D => self.d += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.i + self.p + self.b + self.d
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SequenceDimensions {
    pub width: u16,
    pub height: u16,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VideoIndex {
    pub sequence_header_offsets: Vec<usize>,
    pub gop_offsets: Vec<usize>,
    pub pictures: Vec<PictureRecord>,
    pub counts: TypeCounts,
    /// Frame size from the first complete sequence header, if any.
    pub dimensions: Option<SequenceDimensions>,
    /// Picture headers that could not be parsed.
    pub diagnostics: Vec<HeaderError>,
    /// Set when some GOP's first picture is not an I picture.
    pub gop_without_leading_i: bool,
}

impl VideoIndex {
    pub fn i_frames(&self) -> impl Iterator<Item = &PictureRecord> {
        self.pictures
            .iter()
            .filter(|p| p.coding_type == PictureCodingType::I)
    }
}

/// Reports every byte-aligned `00 00 01 xx` in ascending offset order.
pub fn scan_start_codes(stream: &[u8]) -> Vec<StartCodeHit> {
    let mut hits = Vec::new();
    let mut i = 0;
    while i + 3 < stream.len() {
        match stream[i + 2] {
            // no window starting at i, i+1 or i+2 can match
            b if b > 1 => i += 3,
            0 => i += 1,
            _ => {
                if stream[i] == 0 && stream[i + 1] == 0 {
                    hits.push(StartCodeHit {
                        offset: i,
                        code: stream[i + 3],
                    });
                }
                i += 3;
            }
        }
    }
    hits
}

/// Packs temporal reference and coding type into the two bytes that follow a
/// picture start code. Bits below the coding type (vbv_delay) are zero.
pub fn pack_picture_header(temporal_reference: u16, coding_type: u8) -> [u8; 2] {
    let tr = temporal_reference & 0x3FF;
    let ct = coding_type & 0x7;
    [(tr >> 2) as u8, (((tr & 0x3) as u8) << 6) | (ct << 3)]
}

/// Parses the picture header whose start code begins at `offset`.
/// `gop_index` is left empty for the caller to fill.
pub fn parse_picture_header(stream: &[u8], offset: usize) -> Result<PictureRecord, HeaderError> {
    let prefix = stream
        .get(offset..offset + START_CODE_LEN)
        .ok_or(HeaderError::NotPictureStartCode(offset))?;
    if prefix != [0, 0, 1, PICTURE_START_CODE] {
        return Err(HeaderError::NotPictureStartCode(offset));
    }
    let body = stream
        .get(offset + START_CODE_LEN..offset + START_CODE_LEN + 2)
        .ok_or(HeaderError::TruncatedHeader(offset))?;
    let temporal_reference = (u16::from(body[0]) << 2) | u16::from(body[1] >> 6);
    let value = (body[1] >> 3) & 0x7;
    let coding_type =
        PictureCodingType::from_value(value).ok_or(HeaderError::InvalidCodingType { offset, value })?;
    Ok(PictureRecord {
        offset,
        temporal_reference,
        coding_type,
        gop_index: None,
    })
}

fn parse_sequence_dimensions(stream: &[u8], offset: usize) -> Option<SequenceDimensions> {
    let b = stream.get(offset + START_CODE_LEN..offset + START_CODE_LEN + 3)?;
    Some(SequenceDimensions {
        width: (u16::from(b[0]) << 4) | u16::from(b[1] >> 4),
        height: (u16::from(b[1] & 0x0F) << 8) | u16::from(b[2]),
    })
}

/// Builds the sequence/GOP/picture index of an MPEG-1 video stream.
///
/// Never fails: unparsable picture headers land in `diagnostics`.
pub fn index_mpeg1(stream: &[u8]) -> VideoIndex {
    let mut index = VideoIndex::default();
    let mut first_kind_seen_for_gop: Option<usize> = None;

    for hit in scan_start_codes(stream) {
        match hit.code {
            SEQUENCE_HEADER_CODE => {
                index.sequence_header_offsets.push(hit.offset);
                if index.dimensions.is_none() {
                    index.dimensions = parse_sequence_dimensions(stream, hit.offset);
                }
            }
            GROUP_START_CODE => index.gop_offsets.push(hit.offset),
            PICTURE_START_CODE => match parse_picture_header(stream, hit.offset) {
                Ok(mut record) => {
                    record.gop_index = index.gop_offsets.len().checked_sub(1);
                    if let Some(gop) = record.gop_index {
                        if first_kind_seen_for_gop != Some(gop) {
                            first_kind_seen_for_gop = Some(gop);
                            if record.coding_type != PictureCodingType::I {
                                index.gop_without_leading_i = true;
                            }
                        }
                    }
                    index.counts.add(record.coding_type);
                    index.pictures.push(record);
                }
                Err(e) => index.diagnostics.push(e),
            },
            _ => {}
        }
    }
    index
}

#[cfg(test)]
mod tests {
    use super::*;

    fn picture(tr: u16, ct: u8) -> Vec<u8> {
        let mut v = vec![0, 0, 1, PICTURE_START_CODE];
        v.extend_from_slice(&pack_picture_header(tr, ct));
        v.extend_from_slice(&[0xFF, 0xF8]);
        v
    }

    fn gop() -> Vec<u8> {
        vec![0, 0, 1, GROUP_START_CODE, 0x08, 0x00, 0x08, 0x00]
    }

    #[test]
    fn scan_named_codes() {
        let s = [0, 0, 1, 0xB3, 0, 0, 1, 0xB8, 0, 0, 1, 0x00];
        let hits = scan_start_codes(&s);
        assert_eq!(
            hits,
            vec![
                StartCodeHit { offset: 0, code: 0xB3 },
                StartCodeHit { offset: 4, code: 0xB8 },
                StartCodeHit { offset: 8, code: 0x00 },
            ]
        );
    }

    #[test]
    fn scan_empty_and_overlap() {
        assert!(scan_start_codes(&[]).is_empty());
        assert_eq!(
            scan_start_codes(&[0, 0, 0, 1, 0xB3]),
            vec![StartCodeHit { offset: 1, code: 0xB3 }]
        );
        // prefix without a code byte is not a hit
        assert!(scan_start_codes(&[0, 0, 1]).is_empty());
    }

    #[test]
    fn picture_header_examples() {
        let mut s = vec![0, 0, 1, 0];
        s.extend_from_slice(&[0x00, 0x08]);
        let r = parse_picture_header(&s, 0).unwrap();
        assert_eq!((r.temporal_reference, r.coding_type), (0, PictureCodingType::I));

        s.truncate(4);
        s.extend_from_slice(&[0x01, 0x50]);
        let r = parse_picture_header(&s, 0).unwrap();
        assert_eq!((r.temporal_reference, r.coding_type), (5, PictureCodingType::P));

        s.truncate(4);
        s.extend_from_slice(&[0x00, 0x00]);
        assert_eq!(
            parse_picture_header(&s, 0),
            Err(HeaderError::InvalidCodingType { offset: 0, value: 0 })
        );
    }

    #[test]
    fn picture_header_truncated() {
        assert_eq!(
            parse_picture_header(&[0, 0, 1, 0, 0x00], 0),
            Err(HeaderError::TruncatedHeader(0))
        );
        assert_eq!(
            parse_picture_header(&[0, 0, 1, 0xB8, 0, 8], 0),
            Err(HeaderError::NotPictureStartCode(0))
        );
    }

    #[test]
    fn pack_parse_exhaustive() {
        for tr in 0..1024u16 {
            for ct in 1..=4u8 {
                let mut s = vec![0, 0, 1, 0];
                s.extend_from_slice(&pack_picture_header(tr, ct));
                let r = parse_picture_header(&s, 0).unwrap();
                assert_eq!(r.temporal_reference, tr);
                assert_eq!(r.coding_type.value(), ct);
            }
        }
        for ct in [0u8, 5, 6, 7] {
            let mut s = vec![0, 0, 1, 0];
            s.extend_from_slice(&pack_picture_header(3, ct));
            assert!(matches!(
                parse_picture_header(&s, 0),
                Err(HeaderError::InvalidCodingType { .. })
            ));
        }
    }

    #[test]
    fn index_single_gop_ibbp() {
        let mut s = vec![0, 0, 1, SEQUENCE_HEADER_CODE, 0x16, 0x01, 0x20, 0x13];
        s.extend(gop());
        s.extend(picture(2, 1));
        s.extend(picture(0, 3));
        s.extend(picture(1, 3));
        s.extend(picture(5, 2));
        let idx = index_mpeg1(&s);
        assert_eq!(idx.counts, TypeCounts { i: 1, p: 1, b: 2, d: 0 });
        assert_eq!(idx.counts.total(), idx.pictures.len());
        assert!(idx.pictures.iter().all(|p| p.gop_index == Some(0)));
        assert!(!idx.gop_without_leading_i);
        assert_eq!(idx.dimensions, Some(SequenceDimensions { width: 352, height: 288 }));
    }

    #[test]
    fn index_flags_gop_starting_with_p() {
        let mut s = gop();
        s.extend(picture(0, 1));
        s.extend(gop());
        s.extend(picture(0, 2));
        let idx = index_mpeg1(&s);
        assert!(idx.gop_without_leading_i);

        let mut s = gop();
        s.extend(picture(0, 1));
        s.extend(gop());
        s.extend(picture(0, 1));
        assert!(!index_mpeg1(&s).gop_without_leading_i);
    }

    #[test]
    fn index_collects_diagnostics() {
        let mut s = gop();
        s.extend(picture(0, 1));
        s.extend([0, 0, 1, 0, 0x00, 0x38]); // coding type 7
        s.extend([0, 0, 1, 0, 0x00]); // truncated
        let idx = index_mpeg1(&s);
        assert_eq!(idx.pictures.len(), 1);
        assert_eq!(idx.diagnostics.len(), 2);
    }

    #[test]
    fn index_without_start_codes() {
        let idx = index_mpeg1(b"plain bytes, nothing to see");
        assert_eq!(idx, VideoIndex::default());
    }

    #[test]
    fn pictures_before_any_gop() {
        let idx = index_mpeg1(&picture(0, 2));
        assert_eq!(idx.pictures[0].gop_index, None);
        assert!(!idx.gop_without_leading_i);
    }
}
