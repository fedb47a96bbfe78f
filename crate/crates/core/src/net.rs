//! ReLU network container: alternating affine layers and ReLU activations.
//!
//! A net with affine layers `M_1, ..., M_k` computes
//! `M_k ∘ relu ∘ M_{k-1} ∘ ... ∘ relu ∘ M_1`; the depth is `k` (the number of
//! affine maps) and the hidden widths are the output dimensions of
//! `M_1 ... M_{k-1}`.

use serde::{Deserialize, Serialize};

use crate::affine::{AffineMap, AffineMapData};
use crate::error::{Error, Result};
use crate::geometry::Ball;

/// Provenance and domain information carried inside net files.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NetMeta {
    /// Free-form description of how the net was produced (command line,
    /// seed, tool version). Never interpreted.
    #[serde(default)]
    pub provenance: String,
    /// Ball on which the net is certified to agree with its source string.
    #[serde(default)]
    pub domain: Option<Ball>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NetData", into = "NetData")]
pub struct ReluNet {
    d_in: usize,
    d_out: usize,
    layers: Vec<AffineMap>,
    pub meta: NetMeta,
}

impl ReluNet {
    pub fn new(layers: Vec<AffineMap>, meta: NetMeta) -> Result<Self> {
        let first = layers
            .first()
            .ok_or_else(|| Error::InvalidInput("a net needs at least one layer".into()))?;
        let d_in = first.cols();
        let mut width = first.rows();
        for layer in &layers[1..] {
            if layer.cols() != width {
                return Err(Error::DimensionMismatch { expected: width, got: layer.cols() });
            }
            width = layer.rows();
        }
        Ok(ReluNet { d_in, d_out: width, layers, meta })
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    /// Number of affine layers.
    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn layers(&self) -> &[AffineMap] {
        &self.layers
    }

    /// Output widths of all layers but the last.
    pub fn hidden_widths(&self) -> Vec<usize> {
        self.layers[..self.layers.len() - 1].iter().map(|l| l.rows()).collect()
    }

    pub fn forward_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        if x.len() != self.d_in {
            return Err(Error::DimensionMismatch { expected: self.d_in, got: x.len() });
        }
        if out.len() != self.d_out {
            return Err(Error::DimensionMismatch { expected: self.d_out, got: out.len() });
        }
        let mut cur = x.to_vec();
        let mut next: Vec<f64> = Vec::new();
        let last = self.layers.len() - 1;
        for (idx, layer) in self.layers.iter().enumerate() {
            next.clear();
            next.resize(layer.rows(), 0.0);
            layer.eval_into(&cur, &mut next)?;
            if !next.iter().all(|v| v.is_finite()) {
                return Err(Error::NonFinite { layer: idx });
            }
            if idx != last {
                for v in next.iter_mut() {
                    if *v < 0.0 {
                        *v = 0.0;
                    }
                }
            }
            std::mem::swap(&mut cur, &mut next);
        }
        out.copy_from_slice(&cur);
        Ok(())
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.d_out];
        self.forward_into(x, &mut out)?;
        Ok(out)
    }

    /// Upper bound on the Lipschitz constant: product of the layer operator
    /// norms (ReLU is 1-Lipschitz).
    pub fn lipschitz_bound(&self) -> f64 {
        self.layers.iter().map(|l| l.linear_norm()).product()
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        write_atomic(path, self.to_json_string()?.as_bytes())
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct NetData {
    version: u32,
    d_in: usize,
    d_out: usize,
    layers: Vec<AffineMapData>,
    #[serde(default)]
    meta: NetMeta,
}

impl From<ReluNet> for NetData {
    fn from(n: ReluNet) -> Self {
        NetData {
            version: 1,
            d_in: n.d_in,
            d_out: n.d_out,
            layers: n.layers.into_iter().map(AffineMapData::from).collect(),
            meta: n.meta,
        }
    }
}

impl TryFrom<NetData> for ReluNet {
    type Error = Error;

    fn try_from(d: NetData) -> Result<Self> {
        if d.version != 1 {
            return Err(Error::Schema(format!("unsupported net version {}", d.version)));
        }
        let layers: Vec<AffineMap> =
            d.layers.into_iter().map(AffineMap::try_from).collect::<Result<_>>()?;
        let net = ReluNet::new(layers, d.meta).map_err(|e| Error::Schema(e.to_string()))?;
        if net.d_in != d.d_in || net.d_out != d.d_out {
            return Err(Error::Schema("layer dimensions disagree with header".into()));
        }
        Ok(net)
    }
}

/// Writes a file atomically: everything goes to a sibling temp file which is
/// then renamed over the target, so readers never observe partial content.
pub fn write_atomic(path: &std::path::Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::InvalidInput(format!("not a file path: {}", path.display())))?;
    let mut tmp_name = file_name.to_os_string();
    tmp_name.push(format!(".tmp.{}", std::process::id()));
    let tmp = match dir {
        Some(d) => d.join(&tmp_name),
        None => std::path::PathBuf::from(&tmp_name),
    };
    std::fs::write(&tmp, bytes)?;
    match std::fs::rename(&tmp, path) {
        Ok(()) => Ok(()),
        Err(e) => {
            let _ = std::fs::remove_file(&tmp);
            Err(e.into())
        }
    }
}
