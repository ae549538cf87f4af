//! Dense per-question feature files.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! magic   8 bytes  b"PSFEAT01"
//! count   u64      number of records
//! dim     u64      values per record
//! count × { question_id u64, dim × f64 }
//! ```

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::dataset::Dataset;
use crate::error::{Error, Result};

pub const FEATURE_MAGIC: &[u8; 8] = b"PSFEAT01";

/// `(question_id, feature vector)` pairs in file order.
pub type FeatureRows = Vec<(u64, Vec<f64>)>;

pub fn write_features<W: Write>(mut w: W, dim: usize, rows: &[(u64, Vec<f64>)]) -> std::io::Result<()> {
    w.write_all(FEATURE_MAGIC)?;
    w.write_all(&(rows.len() as u64).to_le_bytes())?;
    w.write_all(&(dim as u64).to_le_bytes())?;
    for (qid, v) in rows {
        assert_eq!(v.len(), dim, "feature row for question {qid} has wrong length");
        w.write_all(&qid.to_le_bytes())?;
        for x in v {
            w.write_all(&x.to_le_bytes())?;
        }
    }
    w.flush()
}

fn read_u64<R: Read>(r: &mut R) -> std::io::Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

pub fn read_features<R: Read>(mut r: R, path: &Path) -> Result<(usize, FeatureRows)> {
    let io = |e| Error::io(path, e);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic).map_err(io)?;
    if &magic != FEATURE_MAGIC {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            offset: 0,
            message: "not a feature file (bad magic)".into(),
        });
    }
    let count = read_u64(&mut r).map_err(io)? as usize;
    let dim = read_u64(&mut r).map_err(io)? as usize;
    let mut rows = Vec::with_capacity(count.min(1 << 20));
    for _ in 0..count {
        let qid = read_u64(&mut r).map_err(io)?;
        let mut v = Vec::with_capacity(dim);
        for _ in 0..dim {
            v.push(f64::from_bits(read_u64(&mut r).map_err(io)?));
        }
        rows.push((qid, v));
    }
    Ok((dim, rows))
}

pub fn load_features(path: &Path) -> Result<(usize, FeatureRows)> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    read_features(BufReader::new(f), path)
}

pub fn save_features(path: &Path, dim: usize, rows: &[(u64, Vec<f64>)]) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    write_features(BufWriter::new(f), dim, rows).map_err(|e| Error::io(path, e))
}

/// Attaches features by question id; returns how many instances got none.
pub fn attach_features(data: &mut Dataset, rows: Vec<(u64, Vec<f64>)>) -> usize {
    let mut by_id: HashMap<u64, Vec<f64>> = rows.into_iter().collect();
    let mut missing = 0;
    for inst in &mut data.instances {
        inst.features = by_id.remove(&inst.question_id);
        if inst.features.is_none() {
            missing += 1;
        }
    }
    missing
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_round_trip() {
        let rows = vec![(7u64, vec![0.5, -1.25, f64::MIN_POSITIVE]), (9, vec![1e300, 0.0, -0.0])];
        let mut buf = Vec::new();
        write_features(&mut buf, 3, &rows).unwrap();
        assert_eq!(buf.len(), 8 + 16 + 2 * (8 + 24));
        let (dim, back) = read_features(buf.as_slice(), Path::new("m")).unwrap();
        assert_eq!(dim, 3);
        assert_eq!(back.len(), 2);
        for ((a, va), (b, vb)) in rows.iter().zip(&back) {
            assert_eq!(a, b);
            let bits = |v: &Vec<f64>| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
            assert_eq!(bits(va), bits(vb));
        }
    }

    #[test]
    fn rejects_bad_magic_and_truncation() {
        assert!(matches!(read_features(&b"NOTMAGIC"[..], Path::new("m")), Err(Error::Parse { .. })));
        let mut buf = Vec::new();
        write_features(&mut buf, 2, &[(1, vec![1.0, 2.0])]).unwrap();
        buf.truncate(buf.len() - 3);
        assert!(matches!(read_features(buf.as_slice(), Path::new("m")), Err(Error::Io { .. })));
    }
}
