//! Standard-alphabet Base64 and the sextet pipeline that feeds the embedder:
//! bytes are regrouped MSB-first into 6-bit values, and each 6-bit value is
//! split into three 2-bit pairs destined for the R, G and B channels.

use thiserror::Error;

const ALPHABET: &[u8; 64] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
const PAD: u8 = b'=';
const INVALID: u8 = 0xFF;

const DECODE: [u8; 256] = {
    let mut t = [INVALID; 256];
    let mut i = 0;
    while i < 64 {
        t[ALPHABET[i] as usize] = i as u8;
        i += 1;
    }
    t
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum Base64Error {
    #[error("invalid Base64 character {byte:#04x} at position {position}")]
    InvalidCharacter { position: usize, byte: u8 },
    #[error("Base64 length {0} is not a multiple of 4")]
    InvalidLength(usize),
    #[error("malformed Base64 padding")]
    InvalidPadding,
    #[error("non-zero bits after the last Base64 symbol")]
    NonCanonicalTrailingBits,
}

/// A 6-bit value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sextet(u8);

impl Sextet {
    pub fn new(v: u8) -> Option<Self> {
        (v < 64).then_some(Self(v))
    }

    pub fn value(self) -> u8 {
        self.0
    }
}

/// Three 2-bit values, `v1` holding the most significant pair.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct TwoBitTriple {
    pub v1: u8,
    pub v2: u8,
    pub v3: u8,
}

impl TwoBitTriple {
    pub fn recombine(self) -> Sextet {
        Sextet(((self.v1 & 3) << 4) | ((self.v2 & 3) << 2) | (self.v3 & 3))
    }
}

pub fn split_sextet(s: Sextet) -> TwoBitTriple {
    TwoBitTriple {
        v1: (s.0 >> 4) & 3,
        v2: (s.0 >> 2) & 3,
        v3: s.0 & 3,
    }
}

/// Number of sextets needed to carry `byte_len` bytes: ceil(8n/6).
pub fn sextet_count(byte_len: usize) -> usize {
    (byte_len * 4).div_ceil(3)
}

/// Regroups a byte stream MSB-first into 6-bit values, zero-padding the last.
pub fn sextets_of(data: &[u8]) -> Vec<Sextet> {
    let mut out = Vec::with_capacity(sextet_count(data.len()));
    let mut chunks = data.chunks_exact(3);
    for c in &mut chunks {
        let n = (u32::from(c[0]) << 16) | (u32::from(c[1]) << 8) | u32::from(c[2]);
        out.extend([
            Sextet((n >> 18) as u8 & 63),
            Sextet((n >> 12) as u8 & 63),
            Sextet((n >> 6) as u8 & 63),
            Sextet(n as u8 & 63),
        ]);
    }
    match *chunks.remainder() {
        [a] => out.extend([Sextet(a >> 2), Sextet((a & 3) << 4)]),
        [a, b] => out.extend([
            Sextet(a >> 2),
            Sextet(((a & 3) << 4) | (b >> 4)),
            Sextet((b & 0x0F) << 2),
        ]),
        _ => {}
    }
    out
}

/// Inverse of [`sextets_of`]: packs 6-bit values MSB-first into `byte_len` bytes.
/// Trailing pad bits are dropped.
pub fn bytes_of_sextets(sextets: &[Sextet], byte_len: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(byte_len);
    let mut acc: u32 = 0;
    let mut bits = 0;
    for s in sextets {
        acc = (acc << 6) | u32::from(s.0);
        bits += 6;
        if bits >= 8 {
            bits -= 8;
            if out.len() < byte_len {
                out.push((acc >> bits) as u8);
            }
            acc &= (1 << bits) - 1;
        }
    }
    out
}

/// Packs 6-bit values MSB-first, zero-padding the final partial byte.
pub fn pack_sextets(sextets: &[Sextet]) -> Vec<u8> {
    let byte_len = (sextets.len() * 6).div_ceil(8);
    let mut padded = sextets.to_vec();
    // one zero sextet is always enough to flush the remaining bits
    padded.push(Sextet(0));
    bytes_of_sextets(&padded, byte_len)
}

pub fn b64_encode(data: &[u8]) -> String {
    let sextets = sextets_of(data);
    let mut out = String::with_capacity(data.len().div_ceil(3) * 4);
    for s in &sextets {
        out.push(ALPHABET[s.0 as usize] as char);
    }
    while !out.len().is_multiple_of(4) {
        out.push(PAD as char);
    }
    out
}

/// Strict decoder: standard alphabet, mandatory padding, no whitespace, and
/// the unused bits of the final symbol must be zero.
pub fn b64_decode(text: &str) -> Result<Vec<u8>, Base64Error> {
    let bytes = text.as_bytes();
    if !bytes.len().is_multiple_of(4) {
        return Err(Base64Error::InvalidLength(bytes.len()));
    }
    let pad = bytes.iter().rev().take_while(|&&b| b == PAD).count();
    if pad > 2 {
        return Err(Base64Error::InvalidPadding);
    }
    let body = &bytes[..bytes.len() - pad];
    let mut sextets = Vec::with_capacity(body.len());
    for (position, &byte) in body.iter().enumerate() {
        match DECODE[byte as usize] {
            INVALID if byte == PAD => return Err(Base64Error::InvalidPadding),
            INVALID => return Err(Base64Error::InvalidCharacter { position, byte }),
            v => sextets.push(Sextet(v)),
        }
    }
    let byte_len = body.len() * 6 / 8;
    let spare_bits = body.len() * 6 - byte_len * 8;
    if let Some(last) = sextets.last() {
        if last.0 & ((1u8 << spare_bits) - 1) != 0 {
            return Err(Base64Error::NonCanonicalTrailingBits);
        }
    }
    Ok(bytes_of_sextets(&sextets, byte_len))
}

/// Index of a Base64 alphabet symbol, if it is one.
pub fn alphabet_index(symbol: u8) -> Option<u8> {
    match DECODE[symbol as usize] {
        INVALID => None,
        v => Some(v),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn values(s: &[Sextet]) -> Vec<u8> {
        s.iter().map(|s| s.value()).collect()
    }

    #[test]
    fn encode_vectors() {
        assert_eq!(b64_encode(b"Man"), "TWFu");
        assert_eq!(b64_encode(b""), "");
        assert_eq!(b64_encode(&[0x4D]), "TQ==");
        assert_eq!(b64_encode(b"Ma"), "TWE=");
    }

    #[test]
    fn decode_vectors() {
        assert_eq!(b64_decode("TWFu").unwrap(), b"Man");
        assert_eq!(b64_decode("TQ==").unwrap(), [0x4D]);
        assert_eq!(b64_decode("").unwrap(), b"");
    }

    #[test]
    fn decode_rejects_malformed() {
        assert!(matches!(b64_decode("T?=="), Err(Base64Error::InvalidCharacter { position: 1, .. })));
        assert_eq!(b64_decode("TQ="), Err(Base64Error::InvalidLength(3)));
        assert_eq!(b64_decode("T==="), Err(Base64Error::InvalidPadding));
        assert_eq!(b64_decode("T=Q="), Err(Base64Error::InvalidPadding));
        assert_eq!(b64_decode("TR=="), Err(Base64Error::NonCanonicalTrailingBits));
        assert!(b64_decode("TWFu\n").is_err());
    }

    #[test]
    fn sextet_examples() {
        assert_eq!(values(&sextets_of(&[0x4D, 0x61, 0x6E])), [19, 22, 5, 46]);
        assert_eq!(values(&sextets_of(&[0x4D])), [19, 16]);
        assert!(sextets_of(&[]).is_empty());
    }

    #[test]
    fn sextet_count_matches() {
        for n in 0..50 {
            assert_eq!(sextets_of(&vec![0xA5; n]).len(), sextet_count(n));
            assert_eq!(sextet_count(n), (8 * n).div_ceil(6));
        }
    }

    #[test]
    fn split_examples() {
        let t = split_sextet(Sextet::new(0b110100).unwrap());
        assert_eq!((t.v1, t.v2, t.v3), (3, 1, 0));
        assert_eq!(split_sextet(Sextet::new(0).unwrap()), TwoBitTriple::default());
        let t = split_sextet(Sextet::new(63).unwrap());
        assert_eq!((t.v1, t.v2, t.v3), (3, 3, 3));
        assert!(Sextet::new(64).is_none());
    }

    #[test]
    fn split_recombine_exhaustive() {
        for v in 0..64 {
            let s = Sextet::new(v).unwrap();
            let t = split_sextet(s);
            assert!(t.v1 < 4 && t.v2 < 4 && t.v3 < 4);
            assert_eq!(t.recombine(), s);
        }
    }

    #[test]
    fn pack_sextets_pads() {
        let s: Vec<Sextet> = (0..15).map(|v| Sextet::new(v * 4 + 3).unwrap()).collect();
        let packed = pack_sextets(&s);
        assert_eq!(packed.len(), 12);
        assert_eq!(packed[11] & 0x3F, 0);
        assert_eq!(&sextets_of(&packed)[..15], &s[..]);
        assert_eq!(pack_sextets(&[Sextet(63)]), [0xFC]);
    }

    #[test]
    fn sextets_pack_back() {
        for n in 0..20usize {
            let data: Vec<u8> = (0..n as u8).map(|b| b.wrapping_mul(37) ^ 0x5A).collect();
            assert_eq!(bytes_of_sextets(&sextets_of(&data), n), data);
        }
    }
}
