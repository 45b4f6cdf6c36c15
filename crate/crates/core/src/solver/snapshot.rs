//! Binary field snapshots.
//!
//! Layout, little-endian: magic `NLSF1`, `D` as u32, points per axis as u32,
//! box lengths as f64, time as f64, then interleaved re/im f64 samples.

use std::io::{self, Read, Write};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use num_complex::Complex;

use super::FieldGrid;
use crate::Real;

pub const MAGIC: &[u8; 5] = b"NLSF1";

fn f64_of<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

pub fn write_snapshot<T: Real, W: Write>(mut w: W, field: &FieldGrid<T>, t: T) -> io::Result<()> {
    w.write_all(MAGIC)?;
    w.write_u32::<LittleEndian>(field.dim() as u32)?;
    for &n in field.points() {
        w.write_u32::<LittleEndian>(n as u32)?;
    }
    for &l in field.lengths() {
        w.write_f64::<LittleEndian>(f64_of(l))?;
    }
    w.write_f64::<LittleEndian>(f64_of(t))?;
    for z in field.samples() {
        w.write_f64::<LittleEndian>(f64_of(z.re))?;
        w.write_f64::<LittleEndian>(f64_of(z.im))?;
    }
    w.flush()
}

fn invalid(msg: impl Into<String>) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg.into())
}

/// Returns the field and its time stamp.
pub fn read_snapshot<R: Read>(mut r: R) -> io::Result<(FieldGrid<f64>, f64)> {
    let mut magic = [0u8; 5];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(invalid("not an NLSF1 snapshot"));
    }
    let dim = r.read_u32::<LittleEndian>()? as usize;
    if !(1..=2).contains(&dim) {
        return Err(invalid(format!("unsupported dimension {dim}")));
    }
    let mut points = Vec::with_capacity(dim);
    for _ in 0..dim {
        points.push(r.read_u32::<LittleEndian>()? as usize);
    }
    let mut lengths = Vec::with_capacity(dim);
    for _ in 0..dim {
        lengths.push(r.read_f64::<LittleEndian>()?);
    }
    let t = r.read_f64::<LittleEndian>()?;
    let n: usize = points.iter().product();
    let mut samples = Vec::with_capacity(n);
    for _ in 0..n {
        let re = r.read_f64::<LittleEndian>()?;
        let im = r.read_f64::<LittleEndian>()?;
        samples.push(Complex::new(re, im));
    }
    let field = FieldGrid::from_samples(&points, &lengths, samples).map_err(|e| invalid(e.to_string()))?;
    Ok((field, t))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let g = FieldGrid::from_fn(&[4, 8], &[1.5, 3.0], |x| Complex::new(x[0], x[1] * 2.0)).unwrap();
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &g, 0.25).unwrap();
        assert_eq!(&buf[..5], b"NLSF1");
        assert_eq!(buf.len(), 5 + 4 + 8 + 16 + 8 + 32 * 16);
        let (back, t) = read_snapshot(&buf[..]).unwrap();
        assert_eq!(back, g);
        assert_eq!(t, 0.25);
    }

    #[test]
    fn rejects_other_files() {
        assert!(read_snapshot(&b"NLSF2\x01\x00\x00\x00"[..]).is_err());
        assert!(read_snapshot(&b"NLS"[..]).is_err());
    }
}
