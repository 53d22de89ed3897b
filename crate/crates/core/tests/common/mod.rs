#![allow(dead_code)]

use std::io::{Read, Write};
use std::net::{Shutdown, SocketAddr, TcpListener, TcpStream};
use std::thread;

use vidmark::bitstream::StartCodeHit;

/// Checks every 4-byte window independently of the scanner's skip logic.
pub fn brute_force_start_codes(stream: &[u8]) -> Vec<StartCodeHit> {
    stream
        .windows(4)
        .enumerate()
        .filter(|(_, w)| w[0] == 0 && w[1] == 0 && w[2] == 1)
        .map(|(offset, w)| StartCodeHit { offset, code: w[3] })
        .collect()
}

/// xorshift64*, so buffers are reproducible without pulling in an RNG crate.
pub struct TestRng(u64);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        Self(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 ^= self.0 >> 12;
        self.0 ^= self.0 << 25;
        self.0 ^= self.0 >> 27;
        self.0.wrapping_mul(0x2545_F491_4F6C_DD1D)
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }

    pub fn bytes(&mut self, n: usize) -> Vec<u8> {
        (0..n).map(|_| self.next_u64() as u8).collect()
    }
}

/// Bytes of the server-to-client stream before the first I-frame's pixels:
/// VIDEO message header, then MV1 magic, sequence, GOP and picture records.
pub const FIRST_PIXEL_STREAM_OFFSET: usize = 5 + 4 + 9 + 8 + 11;

/// A one-shot TCP proxy that XORs `mask` into the server-to-client byte at
/// `flip_offset`.
pub fn start_flipping_proxy(upstream: SocketAddr, flip_offset: usize, mask: u8) -> SocketAddr {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    thread::spawn(move || {
        let (client, _) = listener.accept().unwrap();
        let server = TcpStream::connect(upstream).unwrap();
        let (mut c_read, mut s_write) = (client.try_clone().unwrap(), server.try_clone().unwrap());
        let up = thread::spawn(move || {
            let mut buf = [0u8; 4096];
            loop {
                match c_read.read(&mut buf) {
                    Ok(0) | Err(_) => break,
                    Ok(n) => {
                        if s_write.write_all(&buf[..n]).is_err() {
                            break;
                        }
                    }
                }
            }
            let _ = s_write.shutdown(Shutdown::Write);
        });
        let (mut s_read, mut c_write) = (server, client);
        let mut seen = 0usize;
        let mut buf = [0u8; 4096];
        loop {
            match s_read.read(&mut buf) {
                Ok(0) | Err(_) => break,
                Ok(n) => {
                    if (seen..seen + n).contains(&flip_offset) {
                        buf[flip_offset - seen] ^= mask;
                    }
                    seen += n;
                    if c_write.write_all(&buf[..n]).is_err() {
                        break;
                    }
                }
            }
        }
        let _ = c_write.shutdown(Shutdown::Write);
        let _ = up.join();
    });
    addr
}
