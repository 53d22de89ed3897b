//! Length-prefixed message protocol for distributing marked video.
//!
//! Every message is `type:u8  payload_len:u32be  payload`. A session is:
//!
//! ```text
//! client -> REQUEST(video id)
//! server -> VIDEO(marked MV1 bytes)   or ERROR(text)
//! server -> KEY(key file bytes)
//! client -> VERIFY_REPORT            (optional)
//! ```

use std::collections::HashMap;
use std::fs;
use std::io::{self, Read, Write};
use std::net::{Shutdown, SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::{self, JoinHandle};
use std::time::Duration;

use log::{debug, info, warn};
use thiserror::Error;

use crate::base64codec::{b64_decode, Base64Error};
use crate::container::{read_mv1, write_mv1, ContainerError, Mv1Video};
use crate::watermark::{
    crc32, embed_video, pixels_needed, restore_and_verify_video, FrameCheck, HeaderBackup, WatermarkError,
    WatermarkKey, HEADER_BACKUP_LEN,
};

/// Largest payload a peer may declare: 256 MiB.
pub const MAX_PAYLOAD: u32 = 256 * 1024 * 1024;
pub const MESSAGE_HEADER_LEN: usize = 5;
pub const KEY_MAGIC: [u8; 4] = *b"WMK1";

const SESSION_TIMEOUT: Duration = Duration::from_secs(30);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum MessageType {
    Request = 0x01,
    Video = 0x02,
    Key = 0x03,
    Error = 0x04,
    VerifyReport = 0x05,
}

impl MessageType {
    pub fn from_byte(b: u8) -> Option<Self> {
        Some(match b {
            0x01 => Self::Request,
            0x02 => Self::Video,
            0x03 => Self::Key,
            0x04 => Self::Error,
            0x05 => Self::VerifyReport,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProtocolMessage {
    pub msg_type: MessageType,
    pub payload: Vec<u8>,
}

impl ProtocolMessage {
    pub fn new(msg_type: MessageType, payload: impl Into<Vec<u8>>) -> Self {
        Self {
            msg_type,
            payload: payload.into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("unknown message type {0:#04x}")]
    UnknownType(u8),
    #[error("declared payload of {0} bytes exceeds the 256 MiB cap")]
    OversizedPayload(u64),
    #[error("message truncated: need {needed} bytes, have {available}")]
    Truncated { needed: usize, available: usize },
    #[error("connection closed before a complete message arrived")]
    UnexpectedEof,
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub fn encode_message(m: &ProtocolMessage) -> Result<Vec<u8>, ProtocolError> {
    let len = m.payload.len() as u64;
    if len > u64::from(MAX_PAYLOAD) {
        return Err(ProtocolError::OversizedPayload(len));
    }
    let mut out = Vec::with_capacity(MESSAGE_HEADER_LEN + m.payload.len());
    out.push(m.msg_type as u8);
    out.extend_from_slice(&(len as u32).to_be_bytes());
    out.extend_from_slice(&m.payload);
    Ok(out)
}

fn parse_header(h: &[u8; MESSAGE_HEADER_LEN]) -> Result<(MessageType, usize), ProtocolError> {
    let msg_type = MessageType::from_byte(h[0]).ok_or(ProtocolError::UnknownType(h[0]))?;
    let len = u32::from_be_bytes([h[1], h[2], h[3], h[4]]);
    if len > MAX_PAYLOAD {
        return Err(ProtocolError::OversizedPayload(u64::from(len)));
    }
    Ok((msg_type, len as usize))
}

/// Decodes one message from the front of `bytes`, returning it and the
/// number of bytes consumed (always `5 + payload_len`).
pub fn decode_message(bytes: &[u8]) -> Result<(ProtocolMessage, usize), ProtocolError> {
    let header: &[u8; MESSAGE_HEADER_LEN] = bytes
        .get(..MESSAGE_HEADER_LEN)
        .and_then(|h| h.try_into().ok())
        .ok_or(ProtocolError::Truncated {
            needed: MESSAGE_HEADER_LEN,
            available: bytes.len(),
        })?;
    let (msg_type, len) = parse_header(header)?;
    let end = MESSAGE_HEADER_LEN + len;
    let payload = bytes.get(MESSAGE_HEADER_LEN..end).ok_or(ProtocolError::Truncated {
        needed: end,
        available: bytes.len(),
    })?;
    Ok((ProtocolMessage::new(msg_type, payload), end))
}

fn eof_to_protocol(e: io::Error) -> ProtocolError {
    if e.kind() == io::ErrorKind::UnexpectedEof {
        ProtocolError::UnexpectedEof
    } else {
        ProtocolError::Io(e)
    }
}

/// Reads exactly one message. The length cap is checked before allocating.
pub fn read_message<R: Read>(r: &mut R) -> Result<ProtocolMessage, ProtocolError> {
    let mut header = [0u8; MESSAGE_HEADER_LEN];
    r.read_exact(&mut header).map_err(eof_to_protocol)?;
    let (msg_type, len) = parse_header(&header)?;
    let mut payload = vec![0u8; len];
    r.read_exact(&mut payload).map_err(eof_to_protocol)?;
    Ok(ProtocolMessage { msg_type, payload })
}

pub fn write_message<W: Write>(w: &mut W, m: &ProtocolMessage) -> Result<(), ProtocolError> {
    w.write_all(&encode_message(m)?)?;
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum VerifyStatus {
    Ok = 0,
    Mismatch = 1,
    FormatError = 2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyReportWire {
    pub status: VerifyStatus,
    pub frame_count: u32,
    pub mismatch_count: u32,
    pub embedded_crc: u32,
    pub computed_crc: u32,
}

pub const VERIFY_REPORT_LEN: usize = 17;

impl VerifyReportWire {
    /// Summarizes per-frame checks. The CRC pair comes from the first failing
    /// frame that still had a readable header, else from the first frame.
    pub fn from_checks(checks: &[FrameCheck], computed_crc: u32) -> Self {
        let unreadable = checks.iter().any(|c| matches!(c, FrameCheck::Unreadable { .. }));
        let mismatch_count = checks.iter().filter(|c| !c.is_match()).count() as u32;
        let verified = || {
            checks.iter().filter_map(|c| match c {
                FrameCheck::Verified(r) => Some(r),
                _ => None,
            })
        };
        let shown = verified().find(|r| !r.matched).or_else(|| verified().next());
        let status = if unreadable {
            VerifyStatus::FormatError
        } else if mismatch_count > 0 {
            VerifyStatus::Mismatch
        } else {
            VerifyStatus::Ok
        };
        Self {
            status,
            frame_count: checks.len() as u32,
            mismatch_count,
            embedded_crc: shown.map_or(0, |r| r.embedded_crc),
            computed_crc: shown.map_or(computed_crc, |r| r.computed_crc),
        }
    }

    pub fn format_error(computed_crc: u32) -> Self {
        Self {
            status: VerifyStatus::FormatError,
            frame_count: 0,
            mismatch_count: 0,
            embedded_crc: 0,
            computed_crc,
        }
    }

    pub fn to_bytes(&self) -> [u8; VERIFY_REPORT_LEN] {
        let mut b = [0u8; VERIFY_REPORT_LEN];
        b[0] = self.status as u8;
        b[1..5].copy_from_slice(&self.frame_count.to_be_bytes());
        b[5..9].copy_from_slice(&self.mismatch_count.to_be_bytes());
        b[9..13].copy_from_slice(&self.embedded_crc.to_be_bytes());
        b[13..17].copy_from_slice(&self.computed_crc.to_be_bytes());
        b
    }

    pub fn from_bytes(b: &[u8]) -> Option<Self> {
        if b.len() != VERIFY_REPORT_LEN {
            return None;
        }
        let status = match b[0] {
            0 => VerifyStatus::Ok,
            1 => VerifyStatus::Mismatch,
            2 => VerifyStatus::FormatError,
            _ => return None,
        };
        let u = |i: usize| u32::from_be_bytes([b[i], b[i + 1], b[i + 2], b[i + 3]]);
        Some(Self {
            status,
            frame_count: u(1),
            mismatch_count: u(5),
            embedded_crc: u(9),
            computed_crc: u(13),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KeyFileError {
    #[error("not a key file")]
    BadKeyMagic,
    #[error("key file truncated")]
    Truncated,
    #[error("key file has {0} trailing bytes")]
    TrailingBytes(usize),
    #[error("key text is not valid Base64: {0}")]
    InvalidBase64(#[from] Base64Error),
    #[error("key text is not ASCII")]
    NonAsciiText,
    #[error("header backup {index} is malformed")]
    BadBackup { index: usize },
    #[error("stored checksum {stored:#010x} does not match key text ({computed:#010x})")]
    CrcFieldMismatch { stored: u32, computed: u32 },
}

/// `"WMK1"  u32 len + Base64 text  u32 frame count  (u32 len + backup)*  u32 crc32`
pub fn write_keyfile(key: &WatermarkKey) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + key.base64_text.len() + key.header_backups.len() * (4 + HEADER_BACKUP_LEN));
    out.extend_from_slice(&KEY_MAGIC);
    out.extend_from_slice(&(key.base64_text.len() as u32).to_be_bytes());
    out.extend_from_slice(key.base64_text.as_bytes());
    out.extend_from_slice(&(key.header_backups.len() as u32).to_be_bytes());
    for b in &key.header_backups {
        out.extend_from_slice(&(HEADER_BACKUP_LEN as u32).to_be_bytes());
        out.extend_from_slice(&b.0);
    }
    out.extend_from_slice(&key.crc32.to_be_bytes());
    out
}

pub fn read_keyfile(bytes: &[u8]) -> Result<WatermarkKey, KeyFileError> {
    let mut pos: usize = 0;
    let mut take = |n: usize| -> Result<&[u8], KeyFileError> {
        let s = bytes.get(pos..pos.checked_add(n).ok_or(KeyFileError::Truncated)?).ok_or(KeyFileError::Truncated)?;
        pos += n;
        Ok(s)
    };
    let magic = take(4).map_err(|_| KeyFileError::BadKeyMagic)?;
    if magic != KEY_MAGIC {
        return Err(KeyFileError::BadKeyMagic);
    }
    let be = |s: &[u8]| u32::from_be_bytes([s[0], s[1], s[2], s[3]]);
    let text_len = be(take(4)?) as usize;
    let text = take(text_len)?;
    if !text.is_ascii() {
        return Err(KeyFileError::NonAsciiText);
    }
    let base64_text = String::from_utf8(text.to_vec()).map_err(|_| KeyFileError::NonAsciiText)?;
    let count = be(take(4)?) as usize;
    let mut header_backups = Vec::with_capacity(count.min(bytes.len() / (4 + HEADER_BACKUP_LEN)));
    for index in 0..count {
        let len = be(take(4)?) as usize;
        if len != HEADER_BACKUP_LEN {
            return Err(KeyFileError::BadBackup { index });
        }
        let backup = HeaderBackup(take(len)?.try_into().expect("length checked"));
        if !backup.is_canonical() {
            return Err(KeyFileError::BadBackup { index });
        }
        header_backups.push(backup);
    }
    let stored = be(take(4)?);
    if pos != bytes.len() {
        return Err(KeyFileError::TrailingBytes(bytes.len() - pos));
    }
    let computed = crc32(&b64_decode(&base64_text)?);
    if stored != computed {
        return Err(KeyFileError::CrcFieldMismatch { stored, computed });
    }
    Ok(WatermarkKey {
        base64_text,
        header_backups,
        crc32: stored,
    })
}

/// A verification report the server received, tagged with the video id.
pub type ReceivedReport = (String, VerifyReportWire);

#[derive(Debug, Error)]
pub enum ServeError {
    #[error("video store is empty")]
    EmptyStore,
    #[error("watermark of {len} bytes does not fit video '{id}'")]
    Capacity { id: String, len: usize },
    #[error(transparent)]
    Io(#[from] io::Error),
}

struct Shared {
    store: HashMap<String, Mv1Video>,
    watermark: Vec<u8>,
    reports: Mutex<Vec<ReceivedReport>>,
}

/// A bound, not yet running server.
pub struct Server {
    listener: TcpListener,
    shared: Arc<Shared>,
}

impl Server {
    pub fn bind(
        addr: impl ToSocketAddrs,
        store: HashMap<String, Mv1Video>,
        watermark: Vec<u8>,
    ) -> Result<Self, ServeError> {
        if store.is_empty() {
            return Err(ServeError::EmptyStore);
        }
        for (id, video) in &store {
            let pixels = usize::from(video.width) * usize::from(video.height);
            if pixels_needed(watermark.len()) > pixels {
                return Err(ServeError::Capacity {
                    id: id.clone(),
                    len: watermark.len(),
                });
            }
        }
        Ok(Self {
            listener: TcpListener::bind(addr)?,
            shared: Arc::new(Shared {
                store,
                watermark,
                reports: Mutex::new(Vec::new()),
            }),
        })
    }

    pub fn local_addr(&self) -> io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    /// Serves until the process exits.
    pub fn run(self) -> io::Result<()> {
        self.accept_loop(&AtomicBool::new(false))
    }

    /// Serves on a background thread until [`ServerHandle::shutdown`].
    pub fn spawn(self) -> io::Result<ServerHandle> {
        let addr = self.local_addr()?;
        let stop = Arc::new(AtomicBool::new(false));
        let shared = Arc::clone(&self.shared);
        let flag = Arc::clone(&stop);
        let thread = thread::spawn(move || self.accept_loop(&flag));
        Ok(ServerHandle {
            addr,
            stop,
            shared,
            thread: Some(thread),
        })
    }

    fn accept_loop(self, stop: &AtomicBool) -> io::Result<()> {
        info!("serving {} video(s) on {}", self.shared.store.len(), self.listener.local_addr()?);
        for conn in self.listener.incoming() {
            if stop.load(Ordering::SeqCst) {
                break;
            }
            let stream = match conn {
                Ok(s) => s,
                Err(e) => {
                    warn!("accept failed: {e}");
                    continue;
                }
            };
            let shared = Arc::clone(&self.shared);
            thread::spawn(move || {
                let peer = stream.peer_addr().ok();
                if let Err(e) = handle_connection(stream, &shared) {
                    warn!("session with {peer:?} ended: {e}");
                }
            });
        }
        Ok(())
    }
}

pub struct ServerHandle {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    shared: Arc<Shared>,
    thread: Option<JoinHandle<io::Result<()>>>,
}

impl ServerHandle {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    /// Reports received so far, in arrival order.
    pub fn reports(&self) -> Vec<ReceivedReport> {
        self.shared.reports.lock().expect("report log poisoned").clone()
    }

    pub fn shutdown(mut self) {
        self.stop_and_join();
    }

    fn stop_and_join(&mut self) {
        if let Some(t) = self.thread.take() {
            self.stop.store(true, Ordering::SeqCst);
            // wake the blocking accept
            let _ = TcpStream::connect(self.addr);
            let _ = t.join();
        }
    }
}

impl Drop for ServerHandle {
    fn drop(&mut self) {
        self.stop_and_join();
    }
}

fn handle_connection(mut stream: TcpStream, shared: &Shared) -> Result<(), ProtocolError> {
    stream.set_read_timeout(Some(SESSION_TIMEOUT))?;
    let request = read_message(&mut stream)?;
    if request.msg_type != MessageType::Request {
        write_message(&mut stream, &ProtocolMessage::new(MessageType::Error, "expected REQUEST"))?;
        return Ok(());
    }
    let id = String::from_utf8_lossy(&request.payload).into_owned();
    let Some(video) = shared.store.get(&id) else {
        debug!("unknown video id {id:?}");
        write_message(&mut stream, &ProtocolMessage::new(MessageType::Error, "unknown video id"))?;
        let _ = stream.shutdown(Shutdown::Write);
        return Ok(());
    };

    let marked = embed_video(video, &shared.watermark).and_then(|(m, key)| {
        let bytes = write_mv1(&m).map_err(|e| WatermarkError::InvalidKey(e.to_string()))?;
        Ok((bytes, write_keyfile(&key)))
    });
    let (video_bytes, key_bytes) = match marked {
        Ok(v) => v,
        Err(e) => {
            write_message(&mut stream, &ProtocolMessage::new(MessageType::Error, e.to_string()))?;
            return Ok(());
        }
    };
    write_message(&mut stream, &ProtocolMessage::new(MessageType::Video, video_bytes))?;
    write_message(&mut stream, &ProtocolMessage::new(MessageType::Key, key_bytes))?;
    info!("sent '{id}' to {:?}", stream.peer_addr().ok());

    match read_message(&mut stream) {
        Ok(m) if m.msg_type == MessageType::VerifyReport => match VerifyReportWire::from_bytes(&m.payload) {
            Some(report) => {
                info!(
                    "client report for '{id}': status={} frames={} mismatches={}",
                    report.status as u8, report.frame_count, report.mismatch_count
                );
                shared.reports.lock().expect("report log poisoned").push((id, report));
            }
            None => warn!("malformed VERIFY_REPORT for '{id}'"),
        },
        Ok(m) => warn!("unexpected {:?} after KEY", m.msg_type),
        // the report is optional
        Err(ProtocolError::UnexpectedEof) => {}
        Err(e) => return Err(e),
    }
    Ok(())
}

/// Blocking server entry point.
pub fn serve(
    listen_address: impl ToSocketAddrs,
    video_store: HashMap<String, Mv1Video>,
    watermark: Vec<u8>,
) -> Result<(), ServeError> {
    Server::bind(listen_address, video_store, watermark)?.run()?;
    Ok(())
}

#[derive(Debug, Error)]
pub enum FetchError {
    #[error("cannot connect: {0}")]
    ConnectionFailed(io::Error),
    #[error("protocol violation: {0}")]
    ProtocolViolation(String),
    #[error("server error: {0}")]
    Server(String),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error("cannot write output: {0}")]
    Output(io::Error),
}

#[derive(Debug)]
pub struct FetchSummary {
    pub report: VerifyReportWire,
    pub checks: Vec<FrameCheck>,
    pub marked_path: PathBuf,
    pub key_path: PathBuf,
    /// Absent when the received video or key could not be parsed.
    pub restored_path: Option<PathBuf>,
    /// Why the received data could not be processed, if it could not.
    pub format_error: Option<String>,
}

pub const MARKED_FILE: &str = "marked.mv1";
pub const KEY_FILE: &str = "key.wmk";
pub const RESTORED_FILE: &str = "restored.mv1";

fn expect(stream: &mut TcpStream, want: MessageType) -> Result<Vec<u8>, FetchError> {
    let m = read_message(stream)?;
    match m.msg_type {
        t if t == want => Ok(m.payload),
        MessageType::Error => Err(FetchError::Server(String::from_utf8_lossy(&m.payload).into_owned())),
        other => Err(FetchError::ProtocolViolation(format!("expected {want:?}, got {other:?}"))),
    }
}

enum Received {
    Ok(Mv1Video, Vec<FrameCheck>, u32),
    Malformed(String, u32),
}

fn process(video_bytes: &[u8], key_bytes: &[u8]) -> Received {
    let key = match read_keyfile(key_bytes) {
        Ok(k) => k,
        Err(e) => return Received::Malformed(format!("key: {e}"), 0),
    };
    let computed = key.crc32;
    let video = match read_mv1(video_bytes) {
        Ok(v) => v,
        Err(e) => return Received::Malformed(format!("video: {e}"), computed),
    };
    match restore_and_verify_video(&video, &key) {
        Ok((restored, checks)) => Received::Ok(restored, checks, computed),
        Err(e) => Received::Malformed(e.to_string(), computed),
    }
}

/// Requests `video_id`, writes the marked video, key and restored video into
/// `output_dir`, and sends a verification report back to the server.
pub fn fetch(
    server_address: impl ToSocketAddrs,
    video_id: &str,
    output_dir: &Path,
) -> Result<FetchSummary, FetchError> {
    let mut stream = TcpStream::connect(server_address).map_err(FetchError::ConnectionFailed)?;
    stream.set_read_timeout(Some(SESSION_TIMEOUT)).map_err(FetchError::ConnectionFailed)?;
    write_message(&mut stream, &ProtocolMessage::new(MessageType::Request, video_id.as_bytes()))?;
    let video_bytes = expect(&mut stream, MessageType::Video)?;
    let key_bytes = expect(&mut stream, MessageType::Key)?;

    fs::create_dir_all(output_dir).map_err(FetchError::Output)?;
    let marked_path = output_dir.join(MARKED_FILE);
    let key_path = output_dir.join(KEY_FILE);
    fs::write(&marked_path, &video_bytes).map_err(FetchError::Output)?;
    fs::write(&key_path, &key_bytes).map_err(FetchError::Output)?;

    let mut summary = FetchSummary {
        report: VerifyReportWire::format_error(0),
        checks: Vec::new(),
        marked_path,
        key_path,
        restored_path: None,
        format_error: None,
    };
    match process(&video_bytes, &key_bytes) {
        Received::Ok(restored, checks, computed) => {
            let restored_path = output_dir.join(RESTORED_FILE);
            let bytes = write_mv1(&restored).map_err(|e: ContainerError| FetchError::Output(io::Error::other(e)))?;
            fs::write(&restored_path, bytes).map_err(FetchError::Output)?;
            summary.report = VerifyReportWire::from_checks(&checks, computed);
            summary.checks = checks;
            summary.restored_path = Some(restored_path);
        }
        Received::Malformed(reason, computed) => {
            summary.report = VerifyReportWire::format_error(computed);
            summary.format_error = Some(reason);
        }
    }
    write_message(
        &mut stream,
        &ProtocolMessage::new(MessageType::VerifyReport, summary.report.to_bytes()),
    )?;
    let _ = stream.shutdown(Shutdown::Write);
    Ok(summary)
}
