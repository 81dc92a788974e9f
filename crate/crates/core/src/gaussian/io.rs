//! Binary storage: 16-byte header ("GFQF", version, n_sites, reserved; u32
//! little endian) followed by the 2n x 2n matrix as row-major complex f64.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::Array2;
use num_complex::Complex64 as C64;

use super::CorrelationMatrix;
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"GFQF";
const VERSION: u32 = 1;

pub fn write_to<W: Write>(g: &CorrelationMatrix, mut w: W) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(g.n_sites() as u32).to_le_bytes())?;
    w.write_all(&0u32.to_le_bytes())?;
    for v in g.data().iter() {
        w.write_all(&v.re.to_le_bytes())?;
        w.write_all(&v.im.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_from<R: Read>(mut r: R) -> Result<CorrelationMatrix> {
    let mut head = [0u8; 16];
    r.read_exact(&mut head)?;
    if &head[..4] != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let word = |i: usize| u32::from_le_bytes(head[i..i + 4].try_into().unwrap());
    if word(4) != VERSION {
        return Err(Error::Format(format!("unsupported version {}", word(4))));
    }
    let n = 2 * word(8) as usize;
    let mut buf = vec![0u8; n * n * 16];
    r.read_exact(&mut buf)?;
    let vals: Vec<C64> = buf
        .chunks_exact(16)
        .map(|c| {
            C64::new(
                f64::from_le_bytes(c[..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..].try_into().unwrap()),
            )
        })
        .collect();
    let data = Array2::from_shape_vec((n, n), vals).map_err(|e| Error::Format(e.to_string()))?;
    CorrelationMatrix::new(data)
}

pub fn save(g: &CorrelationMatrix, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_to(g, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load(path: &Path) -> Result<CorrelationMatrix> {
    read_from(BufReader::new(File::open(path)?))
}
