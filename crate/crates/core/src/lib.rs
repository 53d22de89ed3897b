//! Invisible video watermarking over a client-server framework.
//!
//! The crate indexes I-frames in MPEG-1 elementary streams, embeds a document
//! watermark into the I-frames of an [`Mv1Video`](container::Mv1Video) with
//! Base64-driven 2-bit LSB XOR plus a blind-readable CRC-32 header, ships the
//! marked video and its key over a small framed TCP protocol, and restores and
//! verifies on the receiving side.

pub mod base64codec;
pub mod bitstream;
pub mod cli;
pub mod container;
pub mod netproto;
pub mod parallel;
pub mod watermark;

pub use base64codec::{b64_decode, b64_encode, sextets_of, split_sextet, Sextet, TwoBitTriple};
pub use bitstream::{index_mpeg1, parse_picture_header, scan_start_codes, PictureCodingType, VideoIndex};
pub use container::{read_mv1, synth_sample, write_mv1, Mv1Video, RgbFrame, RgbPixel};
pub use watermark::{crc32, embed_frame, embed_video, restore_and_verify_video, restore_frame, verify_frame, WatermarkKey};
