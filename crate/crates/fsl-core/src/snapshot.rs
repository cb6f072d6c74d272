//! FSL1 snapshot format: a field, its grid, its time label, and its
//! background descriptor in one little-endian binary file.
//!
//! Layout: magic "FSL1", u8 dim, u64 points per axis, f64 half width,
//! f64 time, background tag (0 none, 1 step with a/mu/tau, 2 angular with
//! table length, tau, table), then the row-major f64 samples.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::farfield::{FarFieldProfile, FarFieldShape};
use crate::field::Field;
use crate::grid::Grid;

const MAGIC: &[u8; 4] = b"FSL1";

pub fn save_snapshot(field: &Field, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    let grid = field.grid();
    w.write_all(&[grid.dim() as u8])?;
    w.write_all(&(grid.points() as u64).to_le_bytes())?;
    w.write_all(&grid.half_width().to_le_bytes())?;
    w.write_all(&field.time().to_le_bytes())?;
    match field.background().map(FarFieldProfile::shape) {
        None => w.write_all(&[0u8])?,
        Some(FarFieldShape::Step { a, mu }) => {
            w.write_all(&[1u8])?;
            w.write_all(&a.to_le_bytes())?;
            w.write_all(&mu.to_le_bytes())?;
            w.write_all(&field.background().unwrap().tau().to_le_bytes())?;
        }
        Some(FarFieldShape::Angular { h }) => {
            w.write_all(&[2u8])?;
            w.write_all(&(h.len() as u64).to_le_bytes())?;
            w.write_all(&field.background().unwrap().tau().to_le_bytes())?;
            for v in h.iter() {
                w.write_all(&v.to_le_bytes())?;
            }
        }
    }
    for v in field.values() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

struct Reader<R> {
    inner: R,
}

impl<R: Read> Reader<R> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut buf = [0u8; N];
        self.inner
            .read_exact(&mut buf)
            .map_err(|_| Error::Snapshot("truncated snapshot".into()))?;
        Ok(buf)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.bytes::<1>()?[0])
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.bytes::<8>()?))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.bytes::<8>()?))
    }
}

pub fn load_snapshot(path: &Path) -> Result<Field> {
    let mut r = Reader { inner: BufReader::new(File::open(path)?) };
    if &r.bytes::<4>()? != MAGIC {
        return Err(Error::Snapshot("bad magic, not an FSL1 snapshot".into()));
    }
    let dim = r.u8()? as usize;
    let points = r.u64()? as usize;
    let half_width = r.f64()?;
    let time = r.f64()?;
    let grid = Grid::new(dim, points, half_width)
        .map_err(|e| Error::Snapshot(format!("snapshot header: {e}")))?;
    let background = match r.u8()? {
        0 => None,
        1 => {
            let a = r.f64()?;
            let mu = r.f64()?;
            let tau = r.f64()?;
            Some(
                FarFieldProfile::step(a, mu, tau)
                    .map_err(|e| Error::Snapshot(format!("snapshot background: {e}")))?,
            )
        }
        2 => {
            let len = r.u64()? as usize;
            if len > 1 << 24 {
                return Err(Error::Snapshot(format!("unreasonable angular table length {len}")));
            }
            let tau = r.f64()?;
            let mut h = Vec::with_capacity(len);
            for _ in 0..len {
                h.push(r.f64()?);
            }
            Some(
                FarFieldProfile::angular(h, tau)
                    .map_err(|e| Error::Snapshot(format!("snapshot background: {e}")))?,
            )
        }
        tag => return Err(Error::Snapshot(format!("unknown background tag {tag}"))),
    };
    let mut values = Vec::with_capacity(grid.len());
    for _ in 0..grid.len() {
        values.push(r.f64()?);
    }
    // anything left over means the header lied about the shape
    let mut probe = [0u8; 1];
    if r.inner.read(&mut probe)? != 0 {
        return Err(Error::Snapshot("trailing bytes after samples".into()));
    }
    Ok(Field::new(grid, values, background)?.with_time(time))
}

/// Header plus summary statistics, for `snapshot-info`.
#[derive(Debug, Clone)]
pub struct SnapshotInfo {
    pub dim: usize,
    pub points: usize,
    pub half_width: f64,
    pub time: f64,
    pub background: Option<String>,
    pub min: f64,
    pub max: f64,
    pub deviation_mass: f64,
}

pub fn snapshot_info(path: &Path) -> Result<SnapshotInfo> {
    let field = load_snapshot(path)?;
    let (min, max) = field
        .values()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let background = field.background().map(|bg| match bg.shape() {
        FarFieldShape::Step { a, mu } => {
            format!("step a={a} mu={mu} tau={}", bg.tau())
        }
        FarFieldShape::Angular { h } => {
            format!("angular table={} tau={}", h.len(), bg.tau())
        }
    });
    Ok(SnapshotInfo {
        dim: field.grid().dim(),
        points: field.grid().points(),
        half_width: field.grid().half_width(),
        time: field.time(),
        background,
        min,
        max,
        deviation_mass: field.deviation_mass()?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmp(name: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join("fsl-snapshot-tests");
        std::fs::create_dir_all(&dir).unwrap();
        dir.join(name)
    }

    #[test]
    fn roundtrip_bitexact_with_step_background() {
        let g = Grid::new_1d(64, 4.0).unwrap();
        let bg = FarFieldProfile::step(0.9, -0.2, 1.7).unwrap();
        let (field, _) =
            crate::field::make_shock_data(g, bg, Some(&|p: &[f64]| (0.3 * p[0]).sin())).unwrap();
        let field = field.with_time(2.5);
        let path = tmp("step.fsl");
        save_snapshot(&field, &path).unwrap();
        let loaded = load_snapshot(&path).unwrap();
        assert_eq!(loaded.values(), field.values());
        assert_eq!(loaded.time(), 2.5);
        let bg = loaded.background().unwrap();
        assert_eq!(bg.step_params(), Some((0.9, -0.2)));
        assert_eq!(bg.tau(), 1.7);
    }

    #[test]
    fn roundtrip_2d_angular() {
        let g = Grid::new_2d(16, 2.0).unwrap();
        let h: Vec<f64> = (0..8).map(|k| (k as f64).sin()).collect();
        let bg = FarFieldProfile::angular(h.clone(), 0.5).unwrap();
        let mut field = Field::from_fn_2d(g, |x, y| x * y).unwrap();
        field.set_background(Some(bg));
        let path = tmp("angular.fsl");
        save_snapshot(&field, &path).unwrap();
        let loaded = load_snapshot(&path).unwrap();
        assert_eq!(loaded.values(), field.values());
        match loaded.background().unwrap().shape() {
            FarFieldShape::Angular { h: hh } => assert_eq!(hh.as_slice(), h.as_slice()),
            _ => panic!("wrong background shape"),
        }
    }

    #[test]
    fn rejects_bad_magic_and_truncation() {
        let path = tmp("junk.fsl");
        std::fs::write(&path, b"NOPE").unwrap();
        assert!(matches!(load_snapshot(&path), Err(Error::Snapshot(_))));

        let g = Grid::new_1d(32, 1.0).unwrap();
        let field = Field::zeros(g);
        let good = tmp("short.fsl");
        save_snapshot(&field, &good).unwrap();
        let bytes = std::fs::read(&good).unwrap();
        std::fs::write(&good, &bytes[..bytes.len() - 9]).unwrap();
        assert!(matches!(load_snapshot(&good), Err(Error::Snapshot(_))));
    }

    #[test]
    fn info_summarizes_header() {
        let g = Grid::new_1d(32, 2.0).unwrap();
        let bg = FarFieldProfile::step(1.0, 0.0, 1.0).unwrap();
        let (field, _) = crate::field::make_shock_data(g, bg, None).unwrap();
        let path = tmp("info.fsl");
        save_snapshot(&field.with_time(4.0), &path).unwrap();
        let info = snapshot_info(&path).unwrap();
        assert_eq!((info.dim, info.points), (1, 32));
        assert_eq!(info.time, 4.0);
        assert!(info.background.unwrap().starts_with("step"));
    }
}
