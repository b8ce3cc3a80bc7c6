//! Frame input and output: binary PGM, raw little-endian f32 planes and
//! their text sidecar headers.

use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use tcrf::Frame;

/// Reads a binary (P5) PGM, scaling samples to `[0, 1]` by the maxval.
pub fn read_pgm(path: &Path) -> Result<Frame> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    parse_pgm(&bytes).with_context(|| format!("decoding {}", path.display()))
}

pub fn parse_pgm(bytes: &[u8]) -> Result<Frame> {
    let mut pos = 0;
    let mut token = || -> Result<String> {
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            break;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            bail!("truncated PGM header");
        }
        Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
    };
    let magic = token()?;
    if magic != "P5" {
        bail!("unsupported PGM magic '{magic}', only binary P5 is read");
    }
    let width: usize = token()?.parse().context("PGM width")?;
    let height: usize = token()?.parse().context("PGM height")?;
    let maxval: u32 = token()?.parse().context("PGM maxval")?;
    if width == 0 || height == 0 {
        bail!("PGM has zero extent");
    }
    if maxval == 0 || maxval > 65535 {
        bail!("PGM maxval {maxval} outside 1..=65535");
    }
    // Exactly one whitespace byte separates the header from the raster.
    let raster = &bytes[pos + 1.min(bytes.len() - pos)..];
    let wide = maxval > 255;
    let n = width * height;
    let needed = if wide { 2 * n } else { n };
    if raster.len() < needed {
        bail!("PGM raster has {} bytes, expected {needed}", raster.len());
    }
    let scale = 1.0 / maxval as f64;
    let data = if wide {
        raster[..needed]
            .chunks_exact(2)
            .map(|b| u16::from_be_bytes([b[0], b[1]]) as f64 * scale)
            .collect()
    } else {
        raster[..n].iter().map(|&b| b as f64 * scale).collect()
    };
    Ok(Frame::from_vec(width, height, data)?)
}

/// Writes an 8-bit PGM with a linear min-max mapping.
pub fn write_pgm_preview(path: &Path, frame: &Frame) -> Result<()> {
    let (lo, hi) = frame.min_max();
    let span = if hi > lo { hi - lo } else { 1.0 };
    let mut out =
        BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    write!(out, "P5\n{} {}\n255\n", frame.width(), frame.height())?;
    let raster: Vec<u8> = frame
        .as_slice()
        .iter()
        .map(|&v| ((v - lo) / span * 255.0).round().clamp(0.0, 255.0) as u8)
        .collect();
    out.write_all(&raster)?;
    out.flush()?;
    Ok(())
}

/// Dimensions of a raw plane file, stored next to it as `key=value` lines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RawHeader {
    pub width: usize,
    pub height: usize,
    pub frames: usize,
}

impl RawHeader {
    pub fn parse(text: &str) -> Result<Self> {
        let (mut width, mut height, mut frames) = (None, None, None);
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("header line '{line}' is not key=value"))?;
            let value = value.trim();
            match key.trim() {
                "width" => width = Some(value.parse()?),
                "height" => height = Some(value.parse()?),
                "frames" => frames = Some(value.parse()?),
                "format" if value == "f32le" => {}
                "format" => bail!("unsupported raw format '{value}', expected f32le"),
                other => bail!("unknown header key '{other}'"),
            }
        }
        let header = RawHeader {
            width: width.ok_or_else(|| anyhow!("header lacks width"))?,
            height: height.ok_or_else(|| anyhow!("header lacks height"))?,
            frames: frames.ok_or_else(|| anyhow!("header lacks frames"))?,
        };
        if header.width == 0 || header.height == 0 {
            bail!("raw header has zero extent");
        }
        Ok(header)
    }

    pub fn render(&self) -> String {
        format!(
            "width={}\nheight={}\nframes={}\nformat=f32le\n",
            self.width, self.height, self.frames
        )
    }

    pub fn plane_bytes(&self) -> usize {
        self.width * self.height * 4
    }
}

/// Sidecar path for a raw file: `<file>.hdr`.
pub fn sidecar_path(raw: &Path) -> PathBuf {
    let mut name = raw.as_os_str().to_owned();
    name.push(".hdr");
    PathBuf::from(name)
}

pub fn write_raw_plane(out: &mut impl Write, frame: &Frame) -> io::Result<()> {
    let mut buf = Vec::with_capacity(frame.len() * 4);
    for &v in frame.as_slice() {
        buf.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out.write_all(&buf)
}

pub fn read_raw_plane(input: &mut impl Read, width: usize, height: usize) -> io::Result<Frame> {
    let mut buf = vec![0u8; width * height * 4];
    input.read_exact(&mut buf)?;
    let data = buf
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64)
        .collect();
    Ok(Frame::from_vec(width, height, data).expect("buffer sized from header"))
}

/// Yields input frames one at a time.
pub enum FrameSource {
    Pgm {
        files: std::vec::IntoIter<PathBuf>,
    },
    Raw {
        reader: BufReader<File>,
        header: RawHeader,
        remaining: usize,
    },
}

impl FrameSource {
    /// A directory is read as sorted `*.pgm` files; any other path as a raw
    /// plane file with a `.hdr` sidecar.
    pub fn open(path: &Path) -> Result<Self> {
        if path.is_dir() {
            let mut files: Vec<PathBuf> = fs::read_dir(path)
                .with_context(|| format!("listing {}", path.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|e| e.eq_ignore_ascii_case("pgm")))
                .collect();
            files.sort();
            if files.is_empty() {
                bail!("no .pgm files in {}", path.display());
            }
            return Ok(FrameSource::Pgm {
                files: files.into_iter(),
            });
        }
        let hdr_path = sidecar_path(path);
        let text = fs::read_to_string(&hdr_path)
            .with_context(|| format!("reading {}", hdr_path.display()))?;
        let header =
            RawHeader::parse(&text).with_context(|| format!("parsing {}", hdr_path.display()))?;
        let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
        let len = file.metadata()?.len() as usize;
        if len < header.plane_bytes() * header.frames {
            bail!(
                "{} holds {len} bytes, header promises {}",
                path.display(),
                header.plane_bytes() * header.frames
            );
        }
        Ok(FrameSource::Raw {
            reader: BufReader::new(file),
            header,
            remaining: header.frames,
        })
    }
}

impl Iterator for FrameSource {
    type Item = Result<Frame>;

    fn next(&mut self) -> Option<Result<Frame>> {
        match self {
            FrameSource::Pgm { files } => files.next().map(|p| read_pgm(&p)),
            FrameSource::Raw {
                reader,
                header,
                remaining,
            } => {
                if *remaining == 0 {
                    return None;
                }
                *remaining -= 1;
                Some(
                    read_raw_plane(reader, header.width, header.height)
                        .context("reading raw frame"),
                )
            }
        }
    }
}

/// Writes frames as one raw file plus sidecar.
pub fn write_raw_volume(path: &Path, frames: &[Frame]) -> Result<()> {
    let first = frames.first().ok_or_else(|| anyhow!("empty volume"))?;
    let mut out =
        BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    for f in frames {
        write_raw_plane(&mut out, f)?;
    }
    out.flush()?;
    let header = RawHeader {
        width: first.width(),
        height: first.height(),
        frames: frames.len(),
    };
    fs::write(sidecar_path(path), header.render())?;
    Ok(())
}

pub fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}
