//! Affine maps and max-min strings.
//!
//! A [`MaxMinString`] of length `L` is the left-deep lattice expression
//!
//! ```text
//! g = op[L-2]( l[L-1], op[L-3]( l[L-2], ... op[0]( l[0], l[1] ) ... ) )
//! ```
//!
//! over affine maps `l[i]: R^d_in -> R^d_out`, with `max`/`min` applied
//! coordinate-wise. Evaluation folds left to right: start with `l[0]`, then
//! combine each subsequent affine into the accumulator. Since `max` and `min`
//! are commutative the pair order inside each node does not matter.
//!
//! Strings are stored columnar (one flat weight buffer, one flat offset
//! buffer) so that approximations with millions of entries stay compact and
//! evaluation streams memory linearly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// Dense affine map `x -> W x + b` with `W` row-major `(rows x cols)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AffineMapData", into = "AffineMapData")]
pub struct AffineMap {
    rows: usize,
    cols: usize,
    weights: Vec<f64>,
    offset: Vec<f64>,
}

impl AffineMap {
    pub fn new(rows: usize, cols: usize, weights: Vec<f64>, offset: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidInput("affine map dimensions must be positive".into()));
        }
        if weights.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, got: weights.len() });
        }
        if offset.len() != rows {
            return Err(Error::DimensionMismatch { expected: rows, got: offset.len() });
        }
        if !weights.iter().chain(&offset).all(|v| v.is_finite()) {
            return Err(Error::InvalidInput("affine map entries must be finite".into()));
        }
        Ok(Self { rows, cols, weights, offset })
    }

    /// Constant map (zero linear part).
    pub fn constant(cols: usize, value: &[f64]) -> Result<Self> {
        Self::new(value.len(), cols, vec![0.0; value.len() * cols], value.to_vec())
    }

    pub fn identity(dim: usize) -> Self {
        let mut weights = vec![0.0; dim * dim];
        for i in 0..dim {
            weights[i * dim + i] = 1.0;
        }
        Self { rows: dim, cols: dim, weights, offset: vec![0.0; dim] }
    }

    /// Map with the given linear part whose value at `point` is exactly zero:
    /// the offset is `-W point` computed with the same dot product used by
    /// evaluation, so `eval(point) == 0.0` bitwise.
    pub fn vanishing_at(rows: usize, cols: usize, weights: Vec<f64>, point: &[f64]) -> Result<Self> {
        if point.len() != cols {
            return Err(Error::DimensionMismatch { expected: cols, got: point.len() });
        }
        let offset: Vec<f64> =
            (0..rows).map(|r| -linalg::dot(&weights[r * cols..(r + 1) * cols], point)).collect();
        Self::new(rows, cols, weights, offset)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight_row(&self, r: usize) -> &[f64] {
        &self.weights[r * self.cols..(r + 1) * self.cols]
    }

    pub fn offset(&self) -> &[f64] {
        &self.offset
    }

    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch { expected: self.cols, got: x.len() });
        }
        if out.len() != self.rows {
            return Err(Error::DimensionMismatch { expected: self.rows, got: out.len() });
        }
        for r in 0..self.rows {
            out[r] = linalg::dot(self.weight_row(r), x) + self.offset[r];
        }
        Ok(())
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.rows];
        self.eval_into(x, &mut out)?;
        Ok(out)
    }

    /// Composition `self ∘ inner`.
    pub fn compose(&self, inner: &AffineMap) -> Result<AffineMap> {
        if inner.rows != self.cols {
            return Err(Error::DimensionMismatch { expected: self.cols, got: inner.rows });
        }
        let weights = linalg::matmul(&self.weights, self.rows, self.cols, &inner.weights, inner.cols);
        let mut offset = self.offset.clone();
        let mut tmp = vec![0.0; self.rows];
        linalg::matvec(&self.weights, self.rows, self.cols, &inner.offset, &mut tmp);
        for r in 0..self.rows {
            offset[r] += tmp[r];
        }
        AffineMap::new(self.rows, inner.cols, weights, offset)
    }

    /// Input translation: returns `h(x) = self(x - shift)`.
    pub fn translated(&self, shift: &[f64]) -> Result<AffineMap> {
        if shift.len() != self.cols {
            return Err(Error::DimensionMismatch { expected: self.cols, got: shift.len() });
        }
        let mut offset = self.offset.clone();
        for r in 0..self.rows {
            offset[r] -= linalg::dot(self.weight_row(r), shift);
        }
        AffineMap::new(self.rows, self.cols, self.weights.clone(), offset)
    }

    /// Euclidean operator norm of the linear part.
    pub fn linear_norm(&self) -> f64 {
        linalg::operator_norm(&self.weights, self.rows, self.cols)
    }
}

/// The pair `(value + ell, value - ell)` used to clamp a string onto `value`
/// near the point where `ell` vanishes. Both maps share `ell`'s weights (one
/// negated), so where `ell(x) = 0` exactly, both evaluate to `value` up to
/// one rounding of the offset sum.
pub(crate) fn clamp_pair(value: &[f64], ell: &AffineMap) -> Result<(AffineMap, AffineMap)> {
    let (rows, cols) = (ell.rows, ell.cols);
    if value.len() != rows {
        return Err(Error::DimensionMismatch { expected: rows, got: value.len() });
    }
    let mut wminus = Vec::with_capacity(rows * cols);
    let mut bplus = Vec::with_capacity(rows);
    let mut bminus = Vec::with_capacity(rows);
    for r in 0..rows {
        wminus.extend(ell.weight_row(r).iter().map(|v| -v));
        bplus.push(value[r] + ell.offset[r]);
        bminus.push(value[r] - ell.offset[r]);
    }
    let plus = AffineMap::new(rows, cols, ell.weights.clone(), bplus)?;
    let minus = AffineMap::new(rows, cols, wminus, bminus)?;
    Ok((plus, minus))
}

/// Serialized form: `{"W": [[row], ...], "b": [...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct AffineMapData {
    #[serde(rename = "W")]
    pub w: Vec<Vec<f64>>,
    pub b: Vec<f64>,
}

impl From<AffineMap> for AffineMapData {
    fn from(m: AffineMap) -> Self {
        let w = (0..m.rows).map(|r| m.weight_row(r).to_vec()).collect();
        AffineMapData { w, b: m.offset }
    }
}

impl TryFrom<AffineMapData> for AffineMap {
    type Error = Error;

    fn try_from(d: AffineMapData) -> Result<Self> {
        let rows = d.w.len();
        if rows == 0 {
            return Err(Error::Schema("affine map with no rows".into()));
        }
        let cols = d.w[0].len();
        if d.w.iter().any(|row| row.len() != cols) {
            return Err(Error::Schema("ragged weight matrix".into()));
        }
        let weights: Vec<f64> = d.w.into_iter().flatten().collect();
        AffineMap::new(rows, cols, weights, d.b).map_err(|e| Error::Schema(e.to_string()))
    }
}

/// Lattice operation applied coordinate-wise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaxMin {
    Max,
    Min,
}

impl MaxMin {
    /// Returns one of the two operands exactly (no rounding).
    #[inline]
    pub fn combine(self, acc: f64, v: f64) -> f64 {
        match self {
            MaxMin::Max => {
                if v > acc {
                    v
                } else {
                    acc
                }
            }
            MaxMin::Min => {
                if v < acc {
                    v
                } else {
                    acc
                }
            }
        }
    }
}

/// Max-min string over affine maps; see the module docs for semantics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StringData", into = "StringData")]
pub struct MaxMinString {
    d_in: usize,
    d_out: usize,
    len: usize,
    // weights: len * d_out * d_in, offsets: len * d_out, ops: len - 1
    weights: Vec<f64>,
    offsets: Vec<f64>,
    ops: Vec<MaxMin>,
}

impl MaxMinString {
    pub fn new(affines: Vec<AffineMap>, ops: Vec<MaxMin>) -> Result<Self> {
        let first = affines
            .first()
            .ok_or_else(|| Error::InvalidInput("a string needs at least one affine map".into()))?;
        let (d_in, d_out) = (first.cols(), first.rows());
        if ops.len() + 1 != affines.len() {
            return Err(Error::DimensionMismatch { expected: affines.len() - 1, got: ops.len() });
        }
        let mut s = Self::from_first(affines[0].clone());
        for (op, a) in ops.into_iter().zip(affines.into_iter().skip(1)) {
            if a.cols() != d_in || a.rows() != d_out {
                return Err(Error::DimensionMismatch { expected: d_in * d_out, got: a.cols() * a.rows() });
            }
            s.push(op, &a);
        }
        Ok(s)
    }

    fn from_first(a: AffineMap) -> Self {
        MaxMinString {
            d_in: a.cols(),
            d_out: a.rows(),
            len: 1,
            weights: a.weights,
            offsets: a.offset,
            ops: Vec::new(),
        }
    }

    /// String of length 1 holding a single affine map.
    pub fn from_affine(a: AffineMap) -> Self {
        Self::from_first(a)
    }

    /// Constant string `x -> value`.
    pub fn constant(d_in: usize, value: &[f64]) -> Result<Self> {
        Ok(Self::from_first(AffineMap::constant(d_in, value)?))
    }

    /// Appends `op(affine, current)` at the outermost level.
    pub fn push(&mut self, op: MaxMin, a: &AffineMap) {
        assert_eq!(a.cols(), self.d_in, "affine input dim mismatch");
        assert_eq!(a.rows(), self.d_out, "affine output dim mismatch");
        self.weights.extend_from_slice(a.weights());
        self.offsets.extend_from_slice(a.offset());
        self.ops.push(op);
        self.len += 1;
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    /// Number of affine maps.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn ops(&self) -> &[MaxMin] {
        &self.ops
    }

    pub fn affine_weights(&self, i: usize) -> &[f64] {
        let n = self.d_out * self.d_in;
        &self.weights[i * n..(i + 1) * n]
    }

    pub fn affine_offset(&self, i: usize) -> &[f64] {
        &self.offsets[i * self.d_out..(i + 1) * self.d_out]
    }

    /// Materializes affine `i` (row-major, same layout as stored).
    pub fn affine(&self, i: usize) -> AffineMap {
        AffineMap {
            rows: self.d_out,
            cols: self.d_in,
            weights: self.affine_weights(i).to_vec(),
            offset: self.affine_offset(i).to_vec(),
        }
    }

    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        if x.len() != self.d_in {
            return Err(Error::DimensionMismatch { expected: self.d_in, got: x.len() });
        }
        if out.len() != self.d_out {
            return Err(Error::DimensionMismatch { expected: self.d_out, got: out.len() });
        }
        let (din, dout) = (self.d_in, self.d_out);
        for k in 0..dout {
            out[k] = linalg::dot(&self.weights[k * din..(k + 1) * din], x) + self.offsets[k];
        }
        for i in 1..self.len {
            let op = self.ops[i - 1];
            let wbase = i * dout * din;
            let obase = i * dout;
            for k in 0..dout {
                let v = linalg::dot(&self.weights[wbase + k * din..wbase + (k + 1) * din], x)
                    + self.offsets[obase + k];
                out[k] = op.combine(out[k], v);
            }
        }
        Ok(())
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.d_out];
        self.eval_into(x, &mut out)?;
        Ok(out)
    }

    /// Evaluates many points at once, streaming the affine buffers linearly
    /// (point-major input `n x d_in`, output `n x d_out`).
    pub fn eval_batch(&self, points: &[f64], out: &mut [f64]) -> Result<()> {
        let (din, dout) = (self.d_in, self.d_out);
        if points.len() % din != 0 {
            return Err(Error::DimensionMismatch { expected: din, got: points.len() });
        }
        let n = points.len() / din;
        if out.len() != n * dout {
            return Err(Error::DimensionMismatch { expected: n * dout, got: out.len() });
        }
        // First affine initializes the accumulator.
        for p in 0..n {
            let x = &points[p * din..(p + 1) * din];
            for k in 0..dout {
                out[p * dout + k] = linalg::dot(&self.weights[k * din..(k + 1) * din], x) + self.offsets[k];
            }
        }
        for i in 1..self.len {
            let op = self.ops[i - 1];
            let wbase = i * dout * din;
            let obase = i * dout;
            if dout == 1 && din == 2 {
                // Hot path for planar scalar strings (the deep builder output).
                let (w0, w1, b) = (self.weights[wbase], self.weights[wbase + 1], self.offsets[obase]);
                match op {
                    MaxMin::Max => {
                        for p in 0..n {
                            let v = w0 * points[2 * p] + w1 * points[2 * p + 1] + b;
                            if v > out[p] {
                                out[p] = v;
                            }
                        }
                    }
                    MaxMin::Min => {
                        for p in 0..n {
                            let v = w0 * points[2 * p] + w1 * points[2 * p + 1] + b;
                            if v < out[p] {
                                out[p] = v;
                            }
                        }
                    }
                }
                continue;
            }
            for p in 0..n {
                let x = &points[p * din..(p + 1) * din];
                for k in 0..dout {
                    let v = linalg::dot(&self.weights[wbase + k * din..wbase + (k + 1) * din], x)
                        + self.offsets[obase + k];
                    let acc = &mut out[p * dout + k];
                    *acc = op.combine(*acc, v);
                }
            }
        }
        Ok(())
    }

    /// Upper bound on the Lipschitz constant (Euclidean norms): the lattice
    /// operations are 1-Lipschitz, so the max of the affine operator norms
    /// dominates.
    pub fn lipschitz_bound(&self) -> f64 {
        let mut best = 0.0f64;
        for i in 0..self.len {
            best = best.max(linalg::operator_norm(self.affine_weights(i), self.d_out, self.d_in));
        }
        best
    }

    /// Input translation: returns `h(x) = self(x - shift)`.
    pub fn translated(&self, shift: &[f64]) -> Result<MaxMinString> {
        if shift.len() != self.d_in {
            return Err(Error::DimensionMismatch { expected: self.d_in, got: shift.len() });
        }
        let mut out = self.clone();
        let (din, dout) = (self.d_in, self.d_out);
        for i in 0..self.len {
            for k in 0..dout {
                let row = &self.weights[(i * dout + k) * din..(i * dout + k + 1) * din];
                out.offsets[i * dout + k] -= linalg::dot(row, shift);
            }
        }
        Ok(out)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        crate::net::write_atomic(path, self.to_json_string()?.as_bytes())
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }
}

/// Serialized form of a string file (`version` is pinned to 1).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct StringData {
    version: u32,
    d_in: usize,
    d_out: usize,
    affines: Vec<AffineMapData>,
    ops: Vec<MaxMin>,
}

impl From<MaxMinString> for StringData {
    fn from(s: MaxMinString) -> Self {
        let affines = (0..s.len()).map(|i| AffineMapData::from(s.affine(i))).collect();
        StringData { version: 1, d_in: s.d_in, d_out: s.d_out, affines, ops: s.ops }
    }
}

impl TryFrom<StringData> for MaxMinString {
    type Error = Error;

    fn try_from(d: StringData) -> Result<Self> {
        if d.version != 1 {
            return Err(Error::Schema(format!("unsupported string version {}", d.version)));
        }
        let affines: Vec<AffineMap> =
            d.affines.into_iter().map(AffineMap::try_from).collect::<Result<_>>()?;
        if affines.is_empty() {
            return Err(Error::Schema("string with no affine maps".into()));
        }
        if affines.iter().any(|a| a.cols() != d.d_in || a.rows() != d.d_out) {
            return Err(Error::Schema("affine dimensions disagree with header".into()));
        }
        if d.ops.len() + 1 != affines.len() {
            return Err(Error::Schema(format!(
                "expected {} ops for {} affines, got {}",
                affines.len() - 1,
                affines.len(),
                d.ops.len()
            )));
        }
        MaxMinString::new(affines, d.ops).map_err(|e| Error::Schema(e.to_string()))
    }
}
