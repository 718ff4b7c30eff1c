//! Binary checkpoints for kinetic runs.
//!
//! Format `KCS1`: the four magic bytes, then the dimension as a `u64`, the
//! simulation time and relaxation scale as `f64`, and three length-prefixed
//! little-endian `f64` arrays: flattened positions, flattened velocities,
//! weights.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::domain::{ParticleEnsemble, TorusPoint};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"KCS1";

/// A kinetic run frozen to disk: ensemble state plus the scalars needed to
/// resume it.
#[derive(Debug, Clone)]
pub struct Checkpoint<const D: usize> {
    pub time: f64,
    pub epsilon: f64,
    pub ensemble: ParticleEnsemble<D>,
}

fn put_u64(w: &mut impl Write, x: u64) -> Result<()> {
    w.write_all(&x.to_le_bytes())?;
    Ok(())
}

fn put_f64_slice(w: &mut impl Write, xs: &[f64]) -> Result<()> {
    put_u64(w, xs.len() as u64)?;
    for x in xs {
        w.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

fn get_u64(r: &mut impl Read) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn get_f64(r: &mut impl Read) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

fn get_f64_vec(r: &mut impl Read, expect: usize) -> Result<Vec<f64>> {
    let len = get_u64(r)? as usize;
    if len != expect {
        return Err(Error::Checkpoint(format!(
            "array length {len} does not match expected {expect}"
        )));
    }
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push(get_f64(r)?);
    }
    Ok(out)
}

pub fn write_checkpoint_to<const D: usize>(
    w: &mut impl Write,
    cp: &Checkpoint<D>,
) -> Result<()> {
    let e = &cp.ensemble;
    w.write_all(MAGIC)?;
    put_u64(w, D as u64)?;
    w.write_all(&cp.time.to_le_bytes())?;
    w.write_all(&cp.epsilon.to_le_bytes())?;
    let flat_pos: Vec<f64> = e.positions.iter().flat_map(|p| p.coords()).collect();
    let flat_vel: Vec<f64> = e.velocities.iter().flatten().copied().collect();
    put_f64_slice(w, &flat_pos)?;
    put_f64_slice(w, &flat_vel)?;
    put_f64_slice(w, &e.weights)?;
    Ok(())
}

pub fn read_checkpoint_from<const D: usize>(r: &mut impl Read) -> Result<Checkpoint<D>> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Checkpoint("bad magic, not a KCS1 file".into()));
    }
    let dim = get_u64(r)? as usize;
    if dim != D {
        return Err(Error::Checkpoint(format!(
            "dimension {dim} in file, expected {D}"
        )));
    }
    let time = get_f64(r)?;
    let epsilon = get_f64(r)?;
    let n = {
        // Positions come first; their length fixes N.
        let len = get_u64(r)? as usize;
        if len % D != 0 || len == 0 {
            return Err(Error::Checkpoint(format!(
                "position array length {len} is not a positive multiple of {D}"
            )));
        }
        len / D
    };
    let mut positions = Vec::with_capacity(n);
    for _ in 0..n {
        let mut c = [0.0; D];
        for x in c.iter_mut() {
            *x = get_f64(r)?;
        }
        positions.push(TorusPoint::new(c));
    }
    let flat_vel = get_f64_vec(r, n * D)?;
    let velocities: Vec<[f64; D]> = flat_vel
        .chunks_exact(D)
        .map(|c| {
            let mut v = [0.0; D];
            v.copy_from_slice(c);
            v
        })
        .collect();
    let weights = get_f64_vec(r, n)?;
    let ensemble = ParticleEnsemble::new(positions, velocities, weights)?;
    Ok(Checkpoint { time, epsilon, ensemble })
}

/// Write a `KCS1` checkpoint file.
pub fn write_checkpoint<const D: usize>(
    path: impl AsRef<Path>,
    cp: &Checkpoint<D>,
) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_checkpoint_to(&mut w, cp)?;
    w.flush()?;
    Ok(())
}

/// Read a `KCS1` checkpoint file, validating magic, dimension and lengths.
pub fn read_checkpoint<const D: usize>(path: impl AsRef<Path>) -> Result<Checkpoint<D>> {
    let mut r = BufReader::new(File::open(path)?);
    read_checkpoint_from(&mut r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;

    fn sample_checkpoint() -> Checkpoint<2> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        let n = 137;
        let positions = (0..n)
            .map(|_| TorusPoint::new([rng.gen(), rng.gen()]))
            .collect();
        let velocities = (0..n)
            .map(|_| [rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5])
            .collect();
        let ensemble = ParticleEnsemble::with_uniform_weights(positions, velocities).unwrap();
        Checkpoint { time: 0.625, epsilon: 0.05, ensemble }
    }

    #[test]
    fn roundtrip_is_bit_exact() {
        let cp = sample_checkpoint();
        let mut buf = Vec::new();
        write_checkpoint_to(&mut buf, &cp).unwrap();
        let back: Checkpoint<2> = read_checkpoint_from(&mut buf.as_slice()).unwrap();
        assert_eq!(back.time.to_bits(), cp.time.to_bits());
        assert_eq!(back.epsilon.to_bits(), cp.epsilon.to_bits());
        assert_eq!(back.ensemble.len(), cp.ensemble.len());
        for i in 0..cp.ensemble.len() {
            for a in 0..2 {
                assert_eq!(
                    back.ensemble.positions[i].coords()[a].to_bits(),
                    cp.ensemble.positions[i].coords()[a].to_bits()
                );
                assert_eq!(
                    back.ensemble.velocities[i][a].to_bits(),
                    cp.ensemble.velocities[i][a].to_bits()
                );
            }
            assert_eq!(
                back.ensemble.weights[i].to_bits(),
                cp.ensemble.weights[i].to_bits()
            );
        }
    }

    #[test]
    fn file_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("state.kcs1");
        let cp = sample_checkpoint();
        write_checkpoint(&path, &cp).unwrap();
        let back: Checkpoint<2> = read_checkpoint(&path).unwrap();
        assert_eq!(back.ensemble.len(), cp.ensemble.len());
        assert_eq!(back.time, cp.time);
    }

    #[test]
    fn rejects_bad_magic_and_wrong_dimension() {
        let cp = sample_checkpoint();
        let mut buf = Vec::new();
        write_checkpoint_to(&mut buf, &cp).unwrap();

        let mut corrupted = buf.clone();
        corrupted[0] = b'X';
        assert!(matches!(
            read_checkpoint_from::<2>(&mut corrupted.as_slice()),
            Err(Error::Checkpoint(_))
        ));

        assert!(matches!(
            read_checkpoint_from::<1>(&mut buf.as_slice()),
            Err(Error::Checkpoint(_))
        ));
    }

    #[test]
    fn rejects_truncated_stream() {
        let cp = sample_checkpoint();
        let mut buf = Vec::new();
        write_checkpoint_to(&mut buf, &cp).unwrap();
        buf.truncate(buf.len() - 9);
        assert!(read_checkpoint_from::<2>(&mut buf.as_slice()).is_err());
    }
}
