//! Raw sample dumps: `FASOTFS1` followed by little-endian `f64`s, with a
//! `.meta` text sidecar.

use crate::csvio::write_atomic;
use crate::error::{io_err, Error, Result};
use fasotfs_core::montecarlo::SimulationRun;
use std::path::{Path, PathBuf};

pub const MAGIC: &[u8; 8] = b"FASOTFS1";

/// Sidecar path: `samples.bin` -> `samples.meta`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("meta")
}

/// Writes the samples of `run` and its sidecar. `config_digest` is the
/// experiment digest; the sampler digest is recorded alongside it.
pub fn write_dump(path: &Path, run: &SimulationRun, config_digest: &str) -> Result<()> {
    let mut bytes = Vec::with_capacity(8 + 8 * run.samples.len());
    bytes.extend_from_slice(MAGIC);
    for s in &run.samples {
        bytes.extend_from_slice(&s.to_le_bytes());
    }
    write_atomic(path, &bytes)?;
    let meta = format!(
        "seed = {}\nconfig_digest = {}\nsampler_digest = {}\ntrials = {}\n",
        run.seed,
        config_digest,
        hex::encode(run.config_digest),
        run.trials
    );
    write_atomic(&sidecar_path(path), meta.as_bytes())
}

/// Reads the samples back.
pub fn read_dump(path: &Path) -> Result<Vec<f64>> {
    let bytes = std::fs::read(path).map_err(io_err(path))?;
    let bad = |msg: &str| Error::Format { path: path.into(), msg: msg.into() };
    let body = bytes.strip_prefix(MAGIC.as_slice()).ok_or_else(|| bad("missing FASOTFS1 header"))?;
    if body.len() % 8 != 0 {
        return Err(bad("payload is not a whole number of f64 values"));
    }
    Ok(body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_with_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.bin");
        let run = SimulationRun { seed: 4, trials: 3, samples: vec![0.5, 1e-300, 7.25], config_digest: [7; 32] };
        write_dump(&p, &run, "abc").unwrap();
        assert_eq!(read_dump(&p).unwrap(), run.samples);
        let raw = std::fs::read(&p).unwrap();
        assert_eq!(&raw[..8], b"FASOTFS1");
        assert_eq!(raw.len(), 8 + 24);
        let meta = std::fs::read_to_string(sidecar_path(&p)).unwrap();
        assert!(meta.contains("seed = 4") && meta.contains("config_digest = abc") && meta.contains("trials = 3"));
    }

    #[test]
    fn rejects_foreign_files() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.bin");
        std::fs::write(&p, b"NOTMAGIC").unwrap();
        assert!(read_dump(&p).is_err());
        std::fs::write(&p, b"FASOTFS1abc").unwrap();
        assert!(read_dump(&p).is_err());
    }
}
