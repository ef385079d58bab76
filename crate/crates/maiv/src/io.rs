//! Lossless sequence I/O.
//!
//! Two formats are supported:
//!
//! * `raw` — a single file with the ASCII header line
//!   `MAIV1 <width> <height> <channels> <frames> <fps_num>/<fps_den>\n`
//!   followed by `frames * channels * height * width` bytes, frame-major,
//!   channel-planar, row-major.
//! * `pnm-dir` — a directory of binary PGM (1 channel) or PPM (3 channel)
//!   files named `000000.pgm`, `000001.pgm`, ... with maxval 255.
//!
//! Both store 8 bits per sample; byte `v` maps to intensity `v / 255`
//! exactly, so load(save(seq)) reproduces any 8-bit-quantized sequence
//! bit-exactly.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::frame::{FrameBuffer, FrameRate, Sequence};

const RAW_MAGIC: &str = "MAIV1";

/// On-disk sequence container format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SequenceFormat {
    Raw,
    PnmDir,
}

impl std::str::FromStr for SequenceFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(SequenceFormat::Raw),
            "pnm-dir" => Ok(SequenceFormat::PnmDir),
            other => Err(Error::validation(format!(
                "unknown sequence format {other:?}, expected \"raw\" or \"pnm-dir\""
            ))),
        }
    }
}

/// Load a sequence from `path` in the given format.
pub fn load_sequence(path: impl AsRef<Path>, format: SequenceFormat) -> Result<Sequence> {
    let path = path.as_ref();
    match format {
        SequenceFormat::Raw => load_raw(path),
        SequenceFormat::PnmDir => load_pnm_dir(path),
    }
}

/// Save a sequence to `path` in the given format. For `pnm-dir` the
/// directory is created if missing.
pub fn save_sequence(seq: &Sequence, path: impl AsRef<Path>, format: SequenceFormat) -> Result<()> {
    let path = path.as_ref();
    match format {
        SequenceFormat::Raw => save_raw(seq, path),
        SequenceFormat::PnmDir => save_pnm_dir(seq, path),
    }
}

/// Guess the format from the path: directories are `pnm-dir`, files `raw`.
pub fn detect_format(path: impl AsRef<Path>) -> SequenceFormat {
    if path.as_ref().is_dir() {
        SequenceFormat::PnmDir
    } else {
        SequenceFormat::Raw
    }
}

fn load_raw(path: &Path) -> Result<Sequence> {
    let file = fs::File::open(path).map_err(|e| Error::io(e, path))?;
    let mut reader = BufReader::new(file);

    let mut header = String::new();
    reader
        .read_line(&mut header)
        .map_err(|e| Error::io(e, path))?;
    let header = header.trim_end_matches('\n');
    let fields: Vec<&str> = header.split_ascii_whitespace().collect();
    if fields.len() != 6 || fields[0] != RAW_MAGIC {
        return Err(Error::format(format!(
            "bad raw header {header:?}: expected \"{RAW_MAGIC} <w> <h> <c> <frames> <num>/<den>\""
        )));
    }
    let parse = |s: &str, what: &str| -> Result<usize> {
        s.parse::<usize>()
            .map_err(|_| Error::format(format!("bad {what} {s:?} in raw header")))
    };
    let width = parse(fields[1], "width")?;
    let height = parse(fields[2], "height")?;
    let channels = parse(fields[3], "channels")?;
    let frames = parse(fields[4], "frame count")?;
    let (num, den) = fields[5]
        .split_once('/')
        .ok_or_else(|| Error::format(format!("bad frame rate {:?} in raw header", fields[5])))?;
    let rate = FrameRate::new(
        num.parse()
            .map_err(|_| Error::format(format!("bad frame rate numerator {num:?}")))?,
        den.parse()
            .map_err(|_| Error::format(format!("bad frame rate denominator {den:?}")))?,
    )?;

    let frame_bytes = width * height * channels;
    let mut out = Vec::with_capacity(frames);
    let mut buf = vec![0u8; frame_bytes];
    for i in 0..frames {
        reader.read_exact(&mut buf).map_err(|e| {
            if e.kind() == std::io::ErrorKind::UnexpectedEof {
                Error::format(format!(
                    "raw stream truncated in frame {i}: header declares {frames} frames of {frame_bytes} bytes"
                ))
            } else {
                Error::io(e, path)
            }
        })?;
        out.push(FrameBuffer::from_bytes(width, height, channels, &buf)?);
    }
    let mut trailing = [0u8; 1];
    if reader.read(&mut trailing).map_err(|e| Error::io(e, path))? != 0 {
        return Err(Error::format(format!(
            "raw stream has trailing bytes after {frames} declared frames"
        )));
    }
    Sequence::new(out, rate)
}

fn save_raw(seq: &Sequence, path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(e, path))?;
    let mut writer = BufWriter::new(file);
    let rate = seq.frame_rate();
    writeln!(
        writer,
        "{RAW_MAGIC} {} {} {} {} {}/{}",
        seq.width(),
        seq.height(),
        seq.channels(),
        seq.len(),
        rate.num,
        rate.den
    )
    .map_err(|e| Error::io(e, path))?;
    for frame in seq.frames() {
        writer
            .write_all(&frame.to_bytes())
            .map_err(|e| Error::io(e, path))?;
    }
    writer.flush().map_err(|e| Error::io(e, path))?;
    Ok(())
}

/// Load a single binary PGM/PPM frame.
pub fn load_frame(path: impl AsRef<Path>) -> Result<FrameBuffer> {
    load_pnm(path.as_ref())
}

/// Save a single frame as binary PGM (1 channel) or PPM (3 channels).
pub fn save_frame(frame: &FrameBuffer, path: impl AsRef<Path>) -> Result<()> {
    save_pnm(frame, path.as_ref())
}

fn pnm_name(index: usize, channels: usize) -> String {
    if channels == 1 {
        format!("{index:06}.pgm")
    } else {
        format!("{index:06}.ppm")
    }
}

fn load_pnm_dir(path: &Path) -> Result<Sequence> {
    if !path.is_dir() {
        return Err(Error::format(format!(
            "{} is not a directory of PNM frames",
            path.display()
        )));
    }
    // Frames must be contiguous from 000000 in a single flavor.
    let mut frames = Vec::new();
    let mut index = 0usize;
    loop {
        let pgm = path.join(pnm_name(index, 1));
        let ppm = path.join(pnm_name(index, 3));
        let file = if pgm.is_file() {
            pgm
        } else if ppm.is_file() {
            ppm
        } else {
            break;
        };
        frames.push(load_pnm(&file)?);
        index += 1;
    }
    if frames.is_empty() {
        return Err(Error::format(format!(
            "no 000000.pgm or 000000.ppm in {}",
            path.display()
        )));
    }
    Sequence::new(frames, FrameRate::default())
}

fn save_pnm_dir(seq: &Sequence, path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(e, path))?;
    for (i, frame) in seq.frames().iter().enumerate() {
        save_pnm(frame, &path.join(pnm_name(i, frame.channels())))?;
    }
    Ok(())
}

fn load_pnm(path: &Path) -> Result<FrameBuffer> {
    let data = fs::read(path).map_err(|e| Error::io(e, path))?;
    let (magic, rest) = pnm_token(&data)
        .ok_or_else(|| Error::format(format!("{}: empty PNM file", path.display())))?;
    let channels = match magic {
        "P5" => 1,
        "P6" => 3,
        other => {
            return Err(Error::format(format!(
                "{}: unsupported PNM magic {other:?} (binary P5/P6 only)",
                path.display()
            )))
        }
    };
    let (w, rest) = pnm_usize(rest, path, "width")?;
    let (h, rest) = pnm_usize(rest, path, "height")?;
    let (maxval, rest) = pnm_usize(rest, path, "maxval")?;
    if maxval != 255 {
        return Err(Error::format(format!(
            "{}: maxval {maxval} unsupported, expected 255",
            path.display()
        )));
    }
    // Exactly one whitespace byte separates the header from the raster.
    let raster = &rest[1..];
    let expected = w * h * channels;
    if raster.len() != expected {
        return Err(Error::format(format!(
            "{}: raster is {} bytes, expected {expected}",
            path.display(),
            raster.len()
        )));
    }
    // PPM rasters interleave RGB; our planes are channel-planar.
    let mut planar = vec![0u8; expected];
    if channels == 1 {
        planar.copy_from_slice(raster);
    } else {
        for p in 0..w * h {
            for c in 0..3 {
                planar[c * w * h + p] = raster[p * 3 + c];
            }
        }
    }
    FrameBuffer::from_bytes(w, h, channels, &planar)
}

fn save_pnm(frame: &FrameBuffer, path: &Path) -> Result<()> {
    let magic = if frame.channels() == 1 { "P5" } else { "P6" };
    let mut out = format!("{magic}\n{} {}\n255\n", frame.width(), frame.height()).into_bytes();
    let planar = frame.to_bytes();
    if frame.channels() == 1 {
        out.extend_from_slice(&planar);
    } else {
        let n = frame.width() * frame.height();
        for p in 0..n {
            for c in 0..3 {
                out.push(planar[c * n + p]);
            }
        }
    }
    fs::write(path, out).map_err(|e| Error::io(e, path))
}

/// Next whitespace-delimited PNM header token, skipping `#` comments.
fn pnm_token(data: &[u8]) -> Option<(&str, &[u8])> {
    let mut i = 0;
    loop {
        while i < data.len() && data[i].is_ascii_whitespace() {
            i += 1;
        }
        if i < data.len() && data[i] == b'#' {
            while i < data.len() && data[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        break;
    }
    let start = i;
    while i < data.len() && !data[i].is_ascii_whitespace() {
        i += 1;
    }
    if start == i {
        return None;
    }
    std::str::from_utf8(&data[start..i])
        .ok()
        .map(|s| (s, &data[i..]))
}

fn pnm_usize<'a>(data: &'a [u8], path: &Path, what: &str) -> Result<(usize, &'a [u8])> {
    let (tok, rest) = pnm_token(data)
        .ok_or_else(|| Error::format(format!("{}: missing {what}", path.display())))?;
    let v = tok
        .parse::<usize>()
        .map_err(|_| Error::format(format!("{}: bad {what} {tok:?}", path.display())))?;
    Ok((v, rest))
}
