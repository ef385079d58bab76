//! Part-time generator backends.
//!
//! A backend consumes low-resolution semantic maps plus previously
//! synthesized full-resolution frames and emits one full-resolution
//! key-frame. Two backends ship here: a deterministic oracle (upsamples
//! the most recent map) that makes the whole pipeline testable without any
//! neural network, and a subprocess backend that drives an external
//! process over a binary wire protocol so real generators attach without
//! linking.
//!
//! Wire protocol, little-endian, over the child's standard streams:
//!
//! ```text
//! request  = "MAIG" u32 p, u32 d, u32 H, u32 W, u32 channels,
//!            (p+1) low-res frames, p full-res frames   (8-bit raw planes)
//! response = "MAIR" H*W*channels bytes
//! ```
//!
//! One request/response pair per frame; the child persists across frames
//! and exits cleanly when its input closes.

use std::io::{BufReader, BufWriter, Read, Write};
use std::process::{Child, Command, Stdio};

use crate::error::{Error, Result};
use crate::frame::{resize, upsample, FrameBuffer, ResizeFilter, Sequence, UpsampleMode};
use crate::keyframe::KeyframeSet;

const REQUEST_MAGIC: &[u8; 4] = b"MAIG";
const RESPONSE_MAGIC: &[u8; 4] = b"MAIR";

/// One generation step's inputs: `p + 1` semantic maps at `h x w` (the
/// current key and its `p` predecessors in the sparse stream) and the `p`
/// most recent synthesized frames at `(h * 2^d) x (w * 2^d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorRequest {
    semantic_maps: Vec<FrameBuffer>,
    previous_frames: Vec<FrameBuffer>,
    p: usize,
    d: u32,
}

impl GeneratorRequest {
    pub fn new(
        semantic_maps: Vec<FrameBuffer>,
        previous_frames: Vec<FrameBuffer>,
        p: usize,
        d: u32,
    ) -> Result<Self> {
        if semantic_maps.len() != p + 1 {
            return Err(Error::validation(format!(
                "expected {} semantic maps for p={p}, got {}",
                p + 1,
                semantic_maps.len()
            )));
        }
        if previous_frames.len() != p {
            return Err(Error::validation(format!(
                "expected {p} previous frames, got {}",
                previous_frames.len()
            )));
        }
        let map0 = &semantic_maps[0];
        for m in &semantic_maps {
            if !m.same_dims(map0) {
                return Err(Error::validation(
                    "semantic maps must share one geometry".to_string(),
                ));
            }
        }
        let scale = 1usize << d;
        let (full_w, full_h) = (map0.width() * scale, map0.height() * scale);
        for f in &previous_frames {
            if f.width() != full_w || f.height() != full_h || f.channels() != map0.channels() {
                return Err(Error::validation(format!(
                    "previous frame is {}x{}x{}, expected {full_w}x{full_h}x{}",
                    f.width(),
                    f.height(),
                    f.channels(),
                    map0.channels()
                )));
            }
        }
        Ok(GeneratorRequest {
            semantic_maps,
            previous_frames,
            p,
            d,
        })
    }

    pub fn semantic_maps(&self) -> &[FrameBuffer] {
        &self.semantic_maps
    }

    pub fn previous_frames(&self) -> &[FrameBuffer] {
        &self.previous_frames
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    /// Full-resolution output geometry implied by the maps and `d`.
    pub fn output_dims(&self) -> (usize, usize, usize) {
        let scale = 1usize << self.d;
        let m = &self.semantic_maps[0];
        (m.width() * scale, m.height() * scale, m.channels())
    }
}

/// A key-frame synthesizer. `macs_per_frame` is the declared cost of one
/// invocation in MACs; it only feeds the budget report.
pub trait GeneratorBackend {
    fn generate(&mut self, request: &GeneratorRequest) -> Result<FrameBuffer>;

    fn macs_per_frame(&self) -> f64;
}

/// Deterministic stand-in backend: upsamples the most recent semantic map
/// to full resolution, ignoring the previous frames.
#[derive(Debug, Clone, Copy)]
pub struct OracleBackend {
    pub mode: UpsampleMode,
    pub macs_per_frame: f64,
}

impl Default for OracleBackend {
    fn default() -> Self {
        OracleBackend {
            mode: UpsampleMode::Nearest,
            macs_per_frame: 0.0,
        }
    }
}

impl GeneratorBackend for OracleBackend {
    fn generate(&mut self, request: &GeneratorRequest) -> Result<FrameBuffer> {
        oracle_generate(request, self.mode)
    }

    fn macs_per_frame(&self) -> f64 {
        self.macs_per_frame
    }
}

/// The oracle generation rule; see [`OracleBackend`].
pub fn oracle_generate(request: &GeneratorRequest, mode: UpsampleMode) -> Result<FrameBuffer> {
    let latest = request
        .semantic_maps
        .last()
        .expect("request holds p+1 maps");
    upsample(latest, request.d, mode)
}

fn write_u32(w: &mut impl Write, v: usize) -> std::io::Result<()> {
    w.write_all(&u32::try_from(v).expect("dimension fits u32").to_le_bytes())
}

fn read_u32(r: &mut impl Read) -> std::io::Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

/// Serialize one request.
pub fn write_request(w: &mut impl Write, request: &GeneratorRequest) -> Result<()> {
    let (full_w, full_h, channels) = request.output_dims();
    w.write_all(REQUEST_MAGIC)?;
    write_u32(w, request.p)?;
    write_u32(w, request.d as usize)?;
    write_u32(w, full_h)?;
    write_u32(w, full_w)?;
    write_u32(w, channels)?;
    for m in &request.semantic_maps {
        w.write_all(&m.to_bytes())?;
    }
    for f in &request.previous_frames {
        w.write_all(&f.to_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Parse one request. Returns `Ok(None)` on clean end-of-stream (no bytes
/// before the next magic); anything partial is a backend error.
pub fn read_request(r: &mut impl Read) -> Result<Option<GeneratorRequest>> {
    let mut magic = [0u8; 4];
    let first = r.read(&mut magic[..1])?;
    if first == 0 {
        return Ok(None);
    }
    r.read_exact(&mut magic[1..])
        .map_err(|e| Error::backend(format!("truncated request magic: {e}"), None))?;
    if &magic != REQUEST_MAGIC {
        return Err(Error::backend(
            format!("bad request magic {magic:?}, expected {REQUEST_MAGIC:?}"),
            None,
        ));
    }
    let p = read_u32(r).map_err(trunc("request header"))? as usize;
    let d = read_u32(r).map_err(trunc("request header"))?;
    let full_h = read_u32(r).map_err(trunc("request header"))? as usize;
    let full_w = read_u32(r).map_err(trunc("request header"))? as usize;
    let channels = read_u32(r).map_err(trunc("request header"))? as usize;
    let scale = 1usize << d;
    if full_w == 0 || full_h == 0 || full_w % scale != 0 || full_h % scale != 0 {
        return Err(Error::backend(
            format!("request dimensions {full_w}x{full_h} not divisible by 2^{d}"),
            None,
        ));
    }
    let (low_w, low_h) = (full_w / scale, full_h / scale);
    let mut maps = Vec::with_capacity(p + 1);
    let mut buf = vec![0u8; low_w * low_h * channels];
    for i in 0..=p {
        r.read_exact(&mut buf)
            .map_err(trunc(&format!("semantic map {i}")))?;
        maps.push(FrameBuffer::from_bytes(low_w, low_h, channels, &buf)?);
    }
    let mut prev = Vec::with_capacity(p);
    let mut buf = vec![0u8; full_w * full_h * channels];
    for i in 0..p {
        r.read_exact(&mut buf)
            .map_err(trunc(&format!("previous frame {i}")))?;
        prev.push(FrameBuffer::from_bytes(full_w, full_h, channels, &buf)?);
    }
    Ok(Some(GeneratorRequest::new(maps, prev, p, d)?))
}

fn trunc(what: &str) -> impl Fn(std::io::Error) -> Error + '_ {
    move |e| Error::backend(format!("stream ended inside {what}: {e}"), None)
}

/// Serialize one response frame.
pub fn write_response(w: &mut impl Write, frame: &FrameBuffer) -> Result<()> {
    w.write_all(RESPONSE_MAGIC)?;
    w.write_all(&frame.to_bytes())?;
    w.flush()?;
    Ok(())
}

/// Parse one response of the expected geometry.
pub fn read_response(
    r: &mut impl Read,
    width: usize,
    height: usize,
    channels: usize,
) -> Result<FrameBuffer> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)
        .map_err(|e| Error::backend(format!("missing response magic: {e}"), None))?;
    if &magic != RESPONSE_MAGIC {
        return Err(Error::backend(
            format!("bad response magic {magic:?}, expected {RESPONSE_MAGIC:?}"),
            None,
        ));
    }
    let mut buf = vec![0u8; width * height * channels];
    r.read_exact(&mut buf)
        .map_err(|e| Error::backend(format!("response frame truncated: {e}"), None))?;
    FrameBuffer::from_bytes(width, height, channels, &buf)
}

/// Reference wire-protocol server: answers every request with the
/// nearest-upsampled latest map, exactly like the nearest oracle. With
/// `fail_after = Some(n)` it dies mid-frame while answering request `n`
/// (0-based), which is how the tests simulate a crashing generator.
/// Returns the number of frames served.
pub fn serve_echo(
    reader: &mut impl Read,
    writer: &mut impl Write,
    fail_after: Option<usize>,
) -> Result<usize> {
    let mut served = 0usize;
    while let Some(request) = read_request(reader)? {
        let frame = oracle_generate(&request, UpsampleMode::Nearest)?;
        if fail_after == Some(served) {
            let bytes = frame.to_bytes();
            writer.write_all(RESPONSE_MAGIC)?;
            writer.write_all(&bytes[..bytes.len() / 2])?;
            writer.flush()?;
            return Err(Error::backend(
                format!("simulated crash while answering request {served}"),
                None,
            ));
        }
        write_response(writer, &frame)?;
        served += 1;
    }
    Ok(served)
}

/// Drives an external generator process over the wire protocol.
pub struct SubprocessBackend {
    child: Child,
    stdin: Option<BufWriter<std::process::ChildStdin>>,
    stdout: BufReader<std::process::ChildStdout>,
    macs_per_frame: f64,
    command_line: String,
}

impl SubprocessBackend {
    /// Launch `command_line` (whitespace-split into program and arguments)
    /// with piped standard streams. `macs_per_frame` is the declared cost
    /// of one invocation, in MACs.
    pub fn launch(command_line: &str, macs_per_frame: f64) -> Result<Self> {
        let mut parts = command_line.split_whitespace();
        let program = parts.next().ok_or_else(|| {
            Error::validation("backend command line must name a program".to_string())
        })?;
        let mut child = Command::new(program)
            .args(parts)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| Error::backend(format!("cannot launch {command_line:?}: {e}"), None))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        Ok(SubprocessBackend {
            child,
            stdin: Some(BufWriter::new(stdin)),
            stdout: BufReader::new(stdout),
            macs_per_frame,
            command_line: command_line.to_string(),
        })
    }

    /// One request/response exchange.
    pub fn subprocess_generate(&mut self, request: &GeneratorRequest) -> Result<FrameBuffer> {
        let (w, h, c) = request.output_dims();
        let stdin = self
            .stdin
            .as_mut()
            .ok_or_else(|| Error::backend("backend already shut down".to_string(), None))?;
        write_request(stdin, request).map_err(|e| self.enrich(e))?;
        read_response(&mut self.stdout, w, h, c).map_err(|e| self.enrich(e))
    }

    /// Close the child's input and reap it; a nonzero exit status is a
    /// backend error.
    pub fn finish(mut self) -> Result<()> {
        drop(self.stdin.take());
        let status = self.child.wait()?;
        if !status.success() {
            return Err(Error::backend(
                format!("{:?} exited with {status}", self.command_line),
                None,
            ));
        }
        Ok(())
    }

    /// Add the child's exit status to an error when it already died.
    fn enrich(&mut self, err: Error) -> Error {
        if let Ok(Some(status)) = self.child.try_wait() {
            if let Error::Backend {
                message,
                frame_index,
            } = err
            {
                return Error::Backend {
                    message: format!("{message}; child {:?} exited with {status}", self.command_line),
                    frame_index,
                };
            }
        }
        err
    }
}

impl GeneratorBackend for SubprocessBackend {
    fn generate(&mut self, request: &GeneratorRequest) -> Result<FrameBuffer> {
        self.subprocess_generate(request)
    }

    fn macs_per_frame(&self) -> f64 {
        self.macs_per_frame
    }
}

impl Drop for SubprocessBackend {
    fn drop(&mut self) {
        drop(self.stdin.take());
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// Synthesize every key frame of `keys` in order.
///
/// For the key at list position `i`, the semantic context is the maps at
/// the current and `p` previous key indices (positions clamped to the
/// start of the list, so the first keys replicate the earliest map), each
/// reduced by the box filter to `1/2^d` per side. The previous-frame
/// context is the `p` most recently generated key-frames; before any
/// exist, `initial` is replicated when given, otherwise a black frame
/// stands in. The recurrence makes this inherently sequential: frame
/// `k+1`'s request contains frame `k`'s output.
pub fn run_keyframes(
    semantic_seq: &Sequence,
    keys: &KeyframeSet,
    backend: &mut dyn GeneratorBackend,
    p: usize,
    d: u32,
    initial: Option<&FrameBuffer>,
) -> Result<Vec<(usize, FrameBuffer)>> {
    if keys.source_length() != semantic_seq.len() {
        return Err(Error::validation(format!(
            "key-frame set is for {} frames, sequence has {}",
            keys.source_length(),
            semantic_seq.len()
        )));
    }
    let (full_w, full_h, channels) = (
        semantic_seq.width(),
        semantic_seq.height(),
        semantic_seq.channels(),
    );
    if let Some(f) = initial {
        if f.width() != full_w || f.height() != full_h || f.channels() != channels {
            return Err(Error::validation(
                "initial frame must match the sequence geometry".to_string(),
            ));
        }
    }

    // Context maps repeat across requests; resize each key index once.
    let mut low_res: std::collections::HashMap<usize, FrameBuffer> =
        std::collections::HashMap::new();
    for &k in keys.indices() {
        low_res.insert(k, resize(semantic_seq.frame(k), d, ResizeFilter::Box)?);
    }

    let fallback = match initial {
        Some(f) => f.clone(),
        None => FrameBuffer::constant(full_w, full_h, channels, 0.0)?,
    };

    let mut generated: Vec<(usize, FrameBuffer)> = Vec::with_capacity(keys.len());
    for (i, &k) in keys.indices().iter().enumerate() {
        let mut maps = Vec::with_capacity(p + 1);
        for j in 0..=p {
            // Positions i-p .. i, clamped to the first key.
            let pos = (i + j).saturating_sub(p);
            maps.push(low_res[&keys.indices()[pos]].clone());
        }
        let mut prev = Vec::with_capacity(p);
        for j in 0..p {
            // Positions i-p .. i-1 of the generated list; before anything
            // exists the earliest generated frame (or the fallback) repeats.
            let pos = i as i64 - p as i64 + j as i64;
            prev.push(if pos >= 0 {
                generated[pos as usize].1.clone()
            } else if let Some((_, f)) = generated.first() {
                f.clone()
            } else {
                fallback.clone()
            });
        }
        let request = GeneratorRequest::new(maps, prev, p, d)?;
        let frame = backend
            .generate(&request)
            .map_err(|e| e.with_frame_index(k))?;
        if frame.width() != full_w || frame.height() != full_h || frame.channels() != channels {
            return Err(Error::backend(
                format!(
                    "backend returned {}x{}x{}, expected {full_w}x{full_h}x{channels}",
                    frame.width(),
                    frame.height(),
                    frame.channels()
                ),
                Some(k),
            ));
        }
        generated.push((k, frame));
    }
    Ok(generated)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::FrameRate;

    fn map(w: usize, h: usize, seed: usize) -> FrameBuffer {
        FrameBuffer::from_fn(w, h, |x, y| (((x * 3 + y * 5 + seed * 17) % 256) as f64) / 255.0)
            .unwrap()
    }

    fn semantic_seq(t: usize, w: usize, h: usize) -> Sequence {
        Sequence::new(
            (0..t).map(|k| map(w, h, k)).collect(),
            FrameRate::default(),
        )
        .unwrap()
    }

    #[test]
    fn request_validation() {
        let m = map(8, 8, 0);
        let f = map(16, 16, 1);
        assert!(GeneratorRequest::new(vec![m.clone(), m.clone()], vec![f.clone()], 1, 1).is_ok());
        // Wrong counts.
        assert!(GeneratorRequest::new(vec![m.clone()], vec![f.clone()], 1, 1).is_err());
        assert!(GeneratorRequest::new(vec![m.clone(), m.clone()], vec![], 1, 1).is_err());
        // Wrong previous-frame scale.
        let small = map(8, 8, 2);
        assert!(GeneratorRequest::new(vec![m.clone(), m], vec![small], 1, 1).is_err());
    }

    #[test]
    fn oracle_upsamples_latest_map() {
        let m = FrameBuffer::constant(8, 8, 1, 0.5).unwrap();
        let req = GeneratorRequest::new(vec![m], vec![], 0, 1).unwrap();
        let out = oracle_generate(&req, UpsampleMode::Nearest).unwrap();
        assert_eq!((out.width(), out.height()), (16, 16));
        assert!(out.samples().iter().all(|&v| v == 0.5));

        let one = FrameBuffer::constant(1, 1, 1, 0.3).unwrap();
        let req = GeneratorRequest::new(vec![one], vec![], 0, 1).unwrap();
        let out = oracle_generate(&req, UpsampleMode::Nearest).unwrap();
        assert_eq!((out.width(), out.height()), (2, 2));
        assert!(out.samples().iter().all(|&v| v == 0.3));
    }

    #[test]
    fn oracle_nearest_round_trips_through_box_resize() {
        // Checkerboard map: nearest-up then box-down recovers it exactly.
        let board = FrameBuffer::from_fn(8, 8, |x, y| ((x + y) % 2) as f64).unwrap();
        let req = GeneratorRequest::new(vec![board.clone()], vec![], 0, 1).unwrap();
        let up = oracle_generate(&req, UpsampleMode::Nearest).unwrap();
        let down = resize(&up, 1, ResizeFilter::Box).unwrap();
        assert_eq!(down, board);
    }

    #[test]
    fn wire_round_trip_in_memory() {
        let m0 = map(8, 8, 0);
        let m1 = map(8, 8, 1);
        let f0 = map(16, 16, 2);
        let req = GeneratorRequest::new(vec![m0, m1], vec![f0], 1, 1).unwrap();
        let mut buf = Vec::new();
        write_request(&mut buf, &req).unwrap();
        let back = read_request(&mut buf.as_slice()).unwrap().unwrap();
        // 8-bit quantization is lossless for byte-derived fixtures.
        assert_eq!(back, req);
        // Clean EOF after a full request.
        let mut cursor = buf.as_slice();
        read_request(&mut cursor).unwrap().unwrap();
        assert!(read_request(&mut cursor).unwrap().is_none());
    }

    #[test]
    fn wire_rejects_garbage_and_truncation() {
        let mut cursor = &b"MAIX\x00\x00\x00\x00"[..];
        assert!(matches!(
            read_request(&mut cursor),
            Err(Error::Backend { .. })
        ));
        let m = map(8, 8, 0);
        let req = GeneratorRequest::new(vec![m], vec![], 0, 1).unwrap();
        let mut buf = Vec::new();
        write_request(&mut buf, &req).unwrap();
        buf.truncate(buf.len() - 3);
        assert!(matches!(
            read_request(&mut buf.as_slice()),
            Err(Error::Backend { .. })
        ));
    }

    #[test]
    fn echo_server_matches_oracle_in_memory() {
        let m0 = map(8, 8, 3);
        let m1 = map(8, 8, 4);
        let prev = map(16, 16, 5);
        let req = GeneratorRequest::new(vec![m0, m1.clone()], vec![prev], 1, 1).unwrap();
        let mut input = Vec::new();
        write_request(&mut input, &req).unwrap();
        write_request(&mut input, &req).unwrap();
        let mut output = Vec::new();
        let served = serve_echo(&mut input.as_slice(), &mut output, None).unwrap();
        assert_eq!(served, 2);
        let mut cursor = output.as_slice();
        let expect = oracle_generate(&req, UpsampleMode::Nearest).unwrap();
        for _ in 0..2 {
            let frame = read_response(&mut cursor, 16, 16, 1).unwrap();
            assert_eq!(frame, expect);
        }
    }

    #[test]
    fn echo_server_fail_after_truncates_mid_frame() {
        let m = map(8, 8, 3);
        let req = GeneratorRequest::new(vec![m], vec![], 0, 1).unwrap();
        let mut input = Vec::new();
        write_request(&mut input, &req).unwrap();
        let mut output = Vec::new();
        let err = serve_echo(&mut input.as_slice(), &mut output, Some(0)).unwrap_err();
        assert!(matches!(err, Error::Backend { .. }));
        // The partial response must fail the reader too.
        assert!(matches!(
            read_response(&mut output.as_slice(), 16, 16, 1),
            Err(Error::Backend { .. })
        ));
    }

    /// Backend that records every request and counts invocations.
    struct RecordingBackend {
        requests: Vec<GeneratorRequest>,
    }

    impl GeneratorBackend for RecordingBackend {
        fn generate(&mut self, request: &GeneratorRequest) -> Result<FrameBuffer> {
            self.requests.push(request.clone());
            oracle_generate(request, UpsampleMode::Nearest)
        }

        fn macs_per_frame(&self) -> f64 {
            1.0
        }
    }

    #[test]
    fn run_keyframes_invocation_count_and_dense_case() {
        let seq = semantic_seq(6, 16, 16);
        let dense = KeyframeSet::new((0..6).collect(), 6).unwrap();
        let mut backend = RecordingBackend { requests: vec![] };
        let out = run_keyframes(&seq, &dense, &mut backend, 1, 1, None).unwrap();
        assert_eq!(out.len(), 6);
        assert_eq!(backend.requests.len(), 6);
        // Dense keys with the oracle equal running the oracle per frame.
        for (k, frame) in &out {
            let m = resize(seq.frame(*k), 1, ResizeFilter::Box).unwrap();
            let expect = upsample(&m, 1, UpsampleMode::Nearest).unwrap();
            assert_eq!(frame, &expect);
        }

        let sparse = KeyframeSet::new(vec![0, 5], 6).unwrap();
        let mut backend = RecordingBackend { requests: vec![] };
        let out = run_keyframes(&seq, &sparse, &mut backend, 1, 1, None).unwrap();
        assert_eq!(out.len(), 2);
        assert_eq!(backend.requests.len(), 2);
    }

    #[test]
    fn run_keyframes_constant_input_constant_output() {
        let f = FrameBuffer::constant(16, 16, 1, 0.25).unwrap();
        let seq = Sequence::new(vec![f; 8], FrameRate::default()).unwrap();
        let keys = KeyframeSet::new(vec![0, 3, 7], 8).unwrap();
        let mut backend = OracleBackend::default();
        let out = run_keyframes(&seq, &keys, &mut backend, 1, 1, None).unwrap();
        for (_, frame) in &out[1..] {
            assert_eq!(frame, &out[0].1);
        }
    }

    #[test]
    fn run_keyframes_prefix_property() {
        // Removing a later key leaves the earlier requests untouched.
        let seq = semantic_seq(10, 16, 16);
        let full = KeyframeSet::new(vec![0, 2, 5, 7, 9], 10).unwrap();
        let pruned = KeyframeSet::new(vec![0, 2, 5, 9], 10).unwrap();
        let mut b1 = RecordingBackend { requests: vec![] };
        let mut b2 = RecordingBackend { requests: vec![] };
        run_keyframes(&seq, &full, &mut b1, 2, 1, None).unwrap();
        run_keyframes(&seq, &pruned, &mut b2, 2, 1, None).unwrap();
        for i in 0..3 {
            assert_eq!(b1.requests[i], b2.requests[i], "request {i}");
        }
        assert_ne!(b1.requests[3], b2.requests[3]);
    }

    #[test]
    fn run_keyframes_uses_initial_frame() {
        let seq = semantic_seq(4, 16, 16);
        let keys = KeyframeSet::new(vec![0, 3], 4).unwrap();
        let initial = FrameBuffer::constant(16, 16, 1, 0.9).unwrap();
        let mut backend = RecordingBackend { requests: vec![] };
        run_keyframes(&seq, &keys, &mut backend, 1, 1, Some(&initial)).unwrap();
        assert_eq!(backend.requests[0].previous_frames()[0], initial);
        // Second key sees the first generated frame, not the initial.
        let first_out = oracle_generate(&backend.requests[0], UpsampleMode::Nearest).unwrap();
        assert_eq!(backend.requests[1].previous_frames()[0], first_out);
    }

    /// Backend that lies about its output geometry.
    struct WrongDimsBackend;

    impl GeneratorBackend for WrongDimsBackend {
        fn generate(&mut self, _request: &GeneratorRequest) -> Result<FrameBuffer> {
            Ok(FrameBuffer::constant(4, 4, 1, 0.0).unwrap())
        }

        fn macs_per_frame(&self) -> f64 {
            0.0
        }
    }

    #[test]
    fn run_keyframes_checks_backend_dims() {
        let seq = semantic_seq(4, 16, 16);
        let keys = KeyframeSet::new(vec![0, 3], 4).unwrap();
        match run_keyframes(&seq, &keys, &mut WrongDimsBackend, 1, 1, None) {
            Err(Error::Backend { frame_index, .. }) => assert_eq!(frame_index, Some(0)),
            other => panic!("expected backend error, got {other:?}"),
        }
    }
}
