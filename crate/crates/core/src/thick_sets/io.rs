//! Raster serialization.
//!
//! Binary layout (little endian): magic `WLRS`, version byte, `d`, periodic
//! byte, reserved byte, then per axis `origin: f64`, `extent: f64`,
//! `resolution: u32`, then the cell bits packed LSB first (axis 0 fastest).
//!
//! Text layout: `raster v1` followed by `d`, `origin`, `extent`,
//! `resolution`, `periodic` and `runs` lines; `runs` holds the first bit and
//! then alternating run lengths.

use super::RasterSet;
use crate::error::{Error, Result};

pub(super) const MAGIC: &[u8; 4] = b"WLRS";
const VERSION: u8 = 1;

pub(super) fn to_bytes(r: &RasterSet) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + 20 * r.d() + r.len() / 8 + 1);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&[VERSION, r.d() as u8, r.periodic as u8, 0]);
    for a in 0..r.d() {
        out.extend_from_slice(&r.origin[a].to_le_bytes());
        out.extend_from_slice(&r.extent[a].to_le_bytes());
        out.extend_from_slice(&r.resolution[a].to_le_bytes());
    }
    let mut byte = 0u8;
    for (i, bit) in r.cells.iter().enumerate() {
        if *bit {
            byte |= 1 << (i % 8);
        }
        if i % 8 == 7 {
            out.push(byte);
            byte = 0;
        }
    }
    if r.len() % 8 != 0 {
        out.push(byte);
    }
    out
}

fn take<'a>(bytes: &'a [u8], pos: &mut usize, n: usize) -> Result<&'a [u8]> {
    let s = bytes.get(*pos..*pos + n).ok_or_else(|| Error::Format("truncated raster".into()))?;
    *pos += n;
    Ok(s)
}

pub(super) fn from_bytes(bytes: &[u8]) -> Result<RasterSet> {
    let mut pos = 0;
    if take(bytes, &mut pos, 4)? != MAGIC {
        return Err(Error::Format("not a raster file".into()));
    }
    let head = take(bytes, &mut pos, 4)?;
    if head[0] != VERSION {
        return Err(Error::Format(format!("unsupported raster version {}", head[0])));
    }
    let (d, periodic) = (head[1] as usize, head[2] != 0);
    let (mut origin, mut extent, mut resolution) = (vec![], vec![], vec![]);
    for _ in 0..d {
        origin.push(f64::from_le_bytes(take(bytes, &mut pos, 8)?.try_into().expect("8 bytes")));
        extent.push(f64::from_le_bytes(take(bytes, &mut pos, 8)?.try_into().expect("8 bytes")));
        resolution.push(u32::from_le_bytes(take(bytes, &mut pos, 4)?.try_into().expect("4 bytes")));
    }
    let mut r = RasterSet::empty(origin, extent, resolution, periodic)?;
    let payload = take(bytes, &mut pos, r.len().div_ceil(8))?;
    if pos != bytes.len() {
        return Err(Error::Format("trailing bytes after raster payload".into()));
    }
    for i in 0..r.len() {
        if payload[i / 8] >> (i % 8) & 1 == 1 {
            r.set(i, true);
        }
    }
    Ok(r)
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

pub(super) fn to_text(r: &RasterSet) -> String {
    let mut runs = Vec::new();
    let first = r.len() > 0 && r.cells[0];
    let mut cur = first;
    let mut len = 0usize;
    for bit in r.cells.iter() {
        if *bit == cur {
            len += 1;
        } else {
            runs.push(len);
            cur = *bit;
            len = 1;
        }
    }
    runs.push(len);
    format!(
        "raster v1\nd {}\norigin {}\nextent {}\nresolution {}\nperiodic {}\nruns {} {}\n",
        r.d(),
        join(&r.origin),
        join(&r.extent),
        join(&r.resolution),
        r.periodic,
        first as u8,
        join(&runs)
    )
}

fn field<'a>(lines: &mut impl Iterator<Item = &'a str>, key: &str) -> Result<Vec<&'a str>> {
    let line = lines.next().ok_or_else(|| Error::Format(format!("missing `{key}` line")))?;
    let mut parts = line.split_whitespace();
    if parts.next() != Some(key) {
        return Err(Error::Format(format!("expected `{key}`, found `{line}`")));
    }
    Ok(parts.collect())
}

fn parse_all<T: std::str::FromStr>(parts: &[&str], key: &str) -> Result<Vec<T>> {
    parts
        .iter()
        .map(|p| p.parse().map_err(|_| Error::Format(format!("bad `{key}` value `{p}`"))))
        .collect()
}

pub(super) fn from_text(text: &str) -> Result<RasterSet> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
    if lines.next() != Some("raster v1") {
        return Err(Error::Format("missing `raster v1` header".into()));
    }
    let d: Vec<usize> = parse_all(&field(&mut lines, "d")?, "d")?;
    let origin: Vec<f64> = parse_all(&field(&mut lines, "origin")?, "origin")?;
    let extent: Vec<f64> = parse_all(&field(&mut lines, "extent")?, "extent")?;
    let resolution: Vec<u32> = parse_all(&field(&mut lines, "resolution")?, "resolution")?;
    let periodic: Vec<bool> = parse_all(&field(&mut lines, "periodic")?, "periodic")?;
    let runs: Vec<usize> = parse_all(&field(&mut lines, "runs")?, "runs")?;
    if d.len() != 1 || origin.len() != d[0] || periodic.len() != 1 || runs.is_empty() {
        return Err(Error::Format("malformed raster header".into()));
    }
    let mut r = RasterSet::empty(origin, extent, resolution, periodic[0])?;
    let mut bit = runs[0] == 1;
    let mut pos = 0usize;
    for &len in &runs[1..] {
        if pos + len > r.len() {
            return Err(Error::Format("runs exceed raster size".into()));
        }
        if bit {
            for i in pos..pos + len {
                r.set(i, true);
            }
        }
        pos += len;
        bit = !bit;
    }
    if pos != r.len() {
        return Err(Error::Format(format!("runs cover {pos} of {} cells", r.len())));
    }
    Ok(r)
}
