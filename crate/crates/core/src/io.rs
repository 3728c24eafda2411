//! File exports and imports: contour CSV, binary PGM masks, raw f32 fields.

use crate::contour::Contour;
use crate::error::{Error, Result};
use crate::grid::{Grid2, RegionMask, ScalarField};
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

/// Write a contour as CSV with columns polyline_id, vertex_index, x, y.
pub fn write_contour_csv(path: &Path, contour: &Contour) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "polyline_id,vertex_index,x,y")?;
    for (pid, pl) in contour.polylines.iter().enumerate() {
        for (vid, p) in pl.points.iter().enumerate() {
            writeln!(w, "{},{},{:.17e},{:.17e}", pid, vid, p.x, p.y)?;
        }
    }
    Ok(())
}

/// Write a mask as binary PGM (P5, maxval 255): 0 = outside, 255 = inside.
pub fn write_mask_pgm(path: &Path, mask: &RegionMask) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    write!(w, "P5\n{} {}\n255\n", mask.grid.nx, mask.grid.ny)?;
    let bytes: Vec<u8> = mask.inside.iter().map(|&b| if b { 255 } else { 0 }).collect();
    w.write_all(&bytes)?;
    Ok(())
}

/// Read a binary PGM into a mask on the given grid geometry; pixel values are
/// thresholded at 128.
pub fn read_mask_pgm(path: &Path, spacing: f64, origin: (f64, f64)) -> Result<RegionMask> {
    let mut r = BufReader::new(std::fs::File::open(path)?);
    let mut header = Vec::new();
    // P5 header: magic, width, height, maxval, each possibly comment-separated.
    let mut tokens = Vec::new();
    while tokens.len() < 4 {
        let mut line = String::new();
        if r.read_line(&mut line)? == 0 {
            return Err(Error::Format("truncated PGM header".into()));
        }
        header.extend_from_slice(line.as_bytes());
        let stripped = line.split('#').next().unwrap_or("");
        tokens.extend(stripped.split_whitespace().map(|s| s.to_string()));
    }
    if tokens[0] != "P5" {
        return Err(Error::Format(format!("expected P5 magic, got {}", tokens[0])));
    }
    let nx: usize = tokens[1].parse().map_err(|_| Error::Format("bad PGM width".into()))?;
    let ny: usize = tokens[2].parse().map_err(|_| Error::Format("bad PGM height".into()))?;
    let maxval: usize = tokens[3].parse().map_err(|_| Error::Format("bad PGM maxval".into()))?;
    if maxval != 255 {
        return Err(Error::Format(format!("expected maxval 255, got {maxval}")));
    }
    let mut bytes = vec![0u8; nx * ny];
    r.read_exact(&mut bytes)?;
    let grid = Grid2::new(nx, ny, spacing, origin)?;
    RegionMask::new(grid, bytes.iter().map(|&b| b >= 128).collect())
}

/// Write a field as raw little-endian f32 with a small text header
/// (nx, ny, spacing, origin).
pub fn write_field_raw(path: &Path, field: &ScalarField) -> Result<()> {
    let g = &field.grid;
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(
        w,
        "mcfobs-field nx={} ny={} spacing={:.17e} origin={:.17e},{:.17e}",
        g.nx, g.ny, g.spacing, g.origin.0, g.origin.1
    )?;
    for v in &field.values {
        w.write_all(&(*v as f32).to_le_bytes())?;
    }
    Ok(())
}

/// Read back a raw f32 field written by [`write_field_raw`].
pub fn read_field_raw(path: &Path) -> Result<ScalarField> {
    let mut r = BufReader::new(std::fs::File::open(path)?);
    let mut header = String::new();
    r.read_line(&mut header)?;
    let mut nx = 0usize;
    let mut ny = 0usize;
    let mut spacing = 0.0f64;
    let mut origin = (0.0f64, 0.0f64);
    for tok in header.split_whitespace() {
        if let Some(v) = tok.strip_prefix("nx=") {
            nx = v.parse().map_err(|_| Error::Format("bad nx".into()))?;
        } else if let Some(v) = tok.strip_prefix("ny=") {
            ny = v.parse().map_err(|_| Error::Format("bad ny".into()))?;
        } else if let Some(v) = tok.strip_prefix("spacing=") {
            spacing = v.parse().map_err(|_| Error::Format("bad spacing".into()))?;
        } else if let Some(v) = tok.strip_prefix("origin=") {
            let mut it = v.split(',');
            let ox: f64 = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::Format("bad origin".into()))?;
            let oy: f64 = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::Format("bad origin".into()))?;
            origin = (ox, oy);
        }
    }
    let grid = Grid2::new(nx, ny, spacing, origin)?;
    let mut bytes = vec![0u8; nx * ny * 4];
    r.read_exact(&mut bytes)?;
    let values = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
        .collect();
    ScalarField::new(grid, values)
}
