//! Binary network checkpoints.
//!
//! Little-endian layout:
//!   magic "MPQDPG01"
//!   u32 network count
//!   per network: u32 layer count, then per layer u32 in_width,
//!                u32 out_width, u32 activation code
//!   payload: per network, per layer, row-major f64 weights then biases
//! Adam state is not persisted.

use crate::error::{Error, Result};
use crate::neural::{Activation, Layer, LayerSpec, MlpNetwork};
use std::io::{Read, Write};
use std::path::Path;

pub const MAGIC: &[u8; 8] = b"MPQDPG01";

pub fn save(path: &Path, networks: &[&MlpNetwork]) -> Result<()> {
    let mut buf: Vec<u8> = Vec::new();
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&(networks.len() as u32).to_le_bytes());
    for net in networks {
        buf.extend_from_slice(&(net.layers().len() as u32).to_le_bytes());
        for layer in net.layers() {
            buf.extend_from_slice(&(layer.spec.input_width as u32).to_le_bytes());
            buf.extend_from_slice(&(layer.spec.output_width as u32).to_le_bytes());
            buf.extend_from_slice(&layer.spec.activation.code().to_le_bytes());
        }
    }
    for net in networks {
        for layer in net.layers() {
            for w in &layer.weights {
                buf.extend_from_slice(&w.to_le_bytes());
            }
            for b in &layer.biases {
                buf.extend_from_slice(&b.to_le_bytes());
            }
        }
    }
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(&buf).map_err(|e| Error::io(path, e))?;
    Ok(())
}

struct Reader {
    data: Vec<u8>,
    pos: usize,
}

impl Reader {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        if self.pos + n > self.data.len() {
            return Err(Error::Checkpoint(format!(
                "truncated payload: wanted {} bytes at offset {}, file has {}",
                n,
                self.pos,
                self.data.len()
            )));
        }
        let slice = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

/// Loads all networks. Injection topology is reconstructed from the width
/// chain: any excess of a layer's input over the previous layer's output is
/// treated as input injected before that layer. Adam state starts fresh;
/// learning rates default to zero and are the caller's to set.
pub fn load(path: &Path) -> Result<Vec<MlpNetwork>> {
    let mut data = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut data))
        .map_err(|e| Error::io(path, e))?;
    let mut r = Reader { data, pos: 0 };
    if r.take(8)? != MAGIC {
        return Err(Error::Checkpoint(format!(
            "{}: bad magic (expected {:?})",
            path.display(),
            std::str::from_utf8(MAGIC).unwrap()
        )));
    }
    let count = r.u32()? as usize;
    let mut specs: Vec<Vec<LayerSpec>> = Vec::with_capacity(count);
    for _ in 0..count {
        let layer_count = r.u32()? as usize;
        if layer_count == 0 {
            return Err(Error::Checkpoint("network with zero layers".into()));
        }
        let mut layers = Vec::with_capacity(layer_count);
        for _ in 0..layer_count {
            let input_width = r.u32()? as usize;
            let output_width = r.u32()? as usize;
            let activation = Activation::from_code(r.u32()?)?;
            layers.push(LayerSpec {
                input_width,
                output_width,
                activation,
            });
        }
        specs.push(layers);
    }
    let mut networks = Vec::with_capacity(count);
    for net_specs in &specs {
        let mut layers = Vec::with_capacity(net_specs.len());
        for spec in net_specs {
            let mut weights = Vec::with_capacity(spec.input_width * spec.output_width);
            for _ in 0..spec.input_width * spec.output_width {
                weights.push(r.f64()?);
            }
            let mut biases = Vec::with_capacity(spec.output_width);
            for _ in 0..spec.output_width {
                biases.push(r.f64()?);
            }
            layers.push(Layer {
                spec: *spec,
                weights,
                biases,
            });
        }
        let inject_width = if net_specs.len() > 1 {
            net_specs[1]
                .input_width
                .saturating_sub(net_specs[0].output_width)
        } else {
            0
        };
        networks.push(MlpNetwork::from_layers(layers, inject_width, 0.0, 0.0));
    }
    if r.pos != r.data.len() {
        return Err(Error::Checkpoint(format!(
            "{} trailing bytes after payload",
            r.data.len() - r.pos
        )));
    }
    Ok(networks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::{actor_network, critic_network};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tmpdir() -> std::path::PathBuf {
        let dir = std::env::temp_dir().join(format!("mpq_ckpt_{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        dir
    }

    #[test]
    fn round_trip_is_bitwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(60);
        let actor = actor_network(10, 2, (16, 12), 1e-4, &mut rng);
        let critic = critic_network(10, 2, (16, 12), 1e-3, 1e-2, &mut rng);
        let path = tmpdir().join("roundtrip.bin");
        save(&path, &[&actor, &critic]).unwrap();
        let loaded = load(&path).unwrap();
        assert_eq!(loaded.len(), 2);
        assert_eq!(loaded[1].inject_width(), 2);
        let path2 = tmpdir().join("roundtrip2.bin");
        save(&path2, &[&loaded[0], &loaded[1]]).unwrap();
        assert_eq!(
            std::fs::read(&path).unwrap(),
            std::fs::read(&path2).unwrap()
        );
        for (a, b) in actor.layers().iter().zip(loaded[0].layers()) {
            assert_eq!(a.weights, b.weights);
            assert_eq!(a.biases, b.biases);
        }
    }

    #[test]
    fn bad_magic_is_rejected() {
        let path = tmpdir().join("badmagic.bin");
        std::fs::write(&path, b"NOTMAGIC\x01\x00\x00\x00").unwrap();
        assert!(matches!(load(&path), Err(Error::Checkpoint(_))));
    }

    #[test]
    fn truncated_payload_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let actor = actor_network(4, 2, (4, 4), 1e-4, &mut rng);
        let path = tmpdir().join("trunc.bin");
        save(&path, &[&actor]).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes.truncate(bytes.len() - 9);
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(load(&path), Err(Error::Checkpoint(_))));
    }
}
