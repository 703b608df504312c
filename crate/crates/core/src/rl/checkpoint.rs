//! Versioned text checkpoint format for actor networks.
//!
//! Layout:
//!
//! ```text
//! cfmec-ckpt v1
//! output logistic            (or: identity)
//! layers 3 128 64 64 2
//! tensor w0 128 3
//! <one row of whitespace-separated f64 values per line>
//! tensor b0 128
//! <single line>
//! ...
//! ```
//!
//! Values round-trip exactly: Rust's shortest float formatting parses back to
//! the identical bits.

use std::fmt::Write as _;
use std::path::Path;

use ndarray::{Array1, Array2};

use crate::error::Error;
use crate::rl::mlp::{Mlp, OutputActivation, Real};
use crate::Result;

const MAGIC: &str = "cfmec-ckpt v1";

/// Serialize a network (parameters are widened to f64).
pub fn save_mlp<T: Real>(path: &Path, net: &Mlp<T>) -> Result<()> {
    let mut out = String::new();
    out.push_str(MAGIC);
    out.push('\n');
    out.push_str(match net.output {
        OutputActivation::Logistic => "output logistic\n",
        OutputActivation::Identity => "output identity\n",
    });
    out.push_str("layers");
    for s in net.layer_sizes() {
        let _ = write!(out, " {s}");
    }
    out.push('\n');
    for (l, (w, b)) in net.weights.iter().zip(&net.biases).enumerate() {
        let _ = writeln!(out, "tensor w{l} {} {}", w.nrows(), w.ncols());
        for row in w.rows() {
            for (c, v) in row.iter().enumerate() {
                if c > 0 {
                    out.push(' ');
                }
                let _ = write!(out, "{}", v.as_f64());
            }
            out.push('\n');
        }
        let _ = writeln!(out, "tensor b{l} {}", b.len());
        for (c, v) in b.iter().enumerate() {
            if c > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{}", v.as_f64());
        }
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

fn bad(path: &Path, what: impl std::fmt::Display) -> Error {
    Error::Checkpoint(format!("{}: {what}", path.display()))
}

fn parse_row(path: &Path, line: Option<&str>, expected: usize) -> Result<Vec<f64>> {
    let line = line.ok_or_else(|| bad(path, "truncated tensor"))?;
    let vals: Vec<f64> = line
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| bad(path, format!("bad float '{t}'"))))
        .collect::<Result<_>>()?;
    if vals.len() != expected {
        return Err(bad(
            path,
            format!("expected {expected} values per row, found {}", vals.len()),
        ));
    }
    Ok(vals)
}

/// Load a checkpoint saved by [`save_mlp`].
pub fn load_mlp(path: &Path) -> Result<Mlp<f64>> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some(l) if l == MAGIC => {}
        Some(other) => return Err(bad(path, format!("unsupported header '{other}'"))),
        None => return Err(bad(path, "empty file")),
    }
    let output = match lines.next() {
        Some("output logistic") => OutputActivation::Logistic,
        Some("output identity") => OutputActivation::Identity,
        other => return Err(bad(path, format!("bad output line {other:?}"))),
    };
    let sizes: Vec<usize> = match lines.next() {
        Some(l) if l.starts_with("layers ") => l["layers ".len()..]
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| bad(path, "bad layer size")))
            .collect::<Result<_>>()?,
        other => return Err(bad(path, format!("bad layers line {other:?}"))),
    };
    if sizes.len() < 2 {
        return Err(bad(path, "need at least two layer sizes"));
    }

    let mut weights = Vec::with_capacity(sizes.len() - 1);
    let mut biases = Vec::with_capacity(sizes.len() - 1);
    for l in 0..sizes.len() - 1 {
        let (rows, cols) = (sizes[l + 1], sizes[l]);
        let head = lines.next().ok_or_else(|| bad(path, "missing tensor"))?;
        if head != format!("tensor w{l} {rows} {cols}") {
            return Err(bad(path, format!("unexpected tensor header '{head}'")));
        }
        let mut w = Array2::zeros((rows, cols));
        for r in 0..rows {
            let vals = parse_row(path, lines.next(), cols)?;
            for (c, v) in vals.into_iter().enumerate() {
                w[[r, c]] = v;
            }
        }
        weights.push(w);

        let head = lines.next().ok_or_else(|| bad(path, "missing tensor"))?;
        if head != format!("tensor b{l} {rows}") {
            return Err(bad(path, format!("unexpected tensor header '{head}'")));
        }
        biases.push(Array1::from_vec(parse_row(path, lines.next(), rows)?));
    }
    Ok(Mlp {
        weights,
        biases,
        output,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("actor.ckpt");
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let net = Mlp::<f32>::new(&[3, 8, 4, 2], OutputActivation::Logistic, 0.1, &mut rng);
        save_mlp(&path, &net).unwrap();
        let loaded = load_mlp(&path).unwrap();
        assert_eq!(loaded.layer_sizes(), vec![3, 8, 4, 2]);
        assert_eq!(loaded.output, OutputActivation::Logistic);
        let back: Mlp<f32> = loaded.convert();
        assert_eq!(net.weights[1], back.weights[1]);
        assert_eq!(net.biases[2], back.biases[2]);
    }

    #[test]
    fn f64_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("critic.ckpt");
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let net = Mlp::<f64>::new(&[5, 6, 1], OutputActivation::Identity, 1.0, &mut rng);
        save_mlp(&path, &net).unwrap();
        let loaded = load_mlp(&path).unwrap();
        assert_eq!(net.weights, loaded.weights);
        assert_eq!(net.biases, loaded.biases);
    }

    #[test]
    fn rejects_garbage_and_version_drift() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.ckpt");
        std::fs::write(&path, "cfmec-ckpt v999\noutput logistic\nlayers 2 2\n").unwrap();
        assert!(load_mlp(&path).is_err());
        std::fs::write(&path, "not a checkpoint").unwrap();
        assert!(load_mlp(&path).is_err());
        std::fs::write(&path, "").unwrap();
        assert!(load_mlp(&path).is_err());
    }

    #[test]
    fn rejects_truncation() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.ckpt");
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let net = Mlp::<f64>::new(&[2, 3, 1], OutputActivation::Identity, 1.0, &mut rng);
        save_mlp(&path, &net).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let cut: String = text.lines().take(5).collect::<Vec<_>>().join("\n");
        std::fs::write(&path, cut).unwrap();
        assert!(load_mlp(&path).is_err());
    }
}
