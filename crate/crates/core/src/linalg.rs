//! Small dense-matrix helpers over flat `f64` slices.
//!
//! Everything here operates on row-major matrices of modest size (input and
//! output dimensions are single digits); no external linear algebra crate is
//! warranted.

/// Dot product. Callers guarantee equal lengths.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0.0;
    for i in 0..a.len() {
        acc += a[i] * b[i];
    }
    acc
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0.0;
    for i in 0..a.len() {
        let d = a[i] - b[i];
        acc += d * d;
    }
    acc.sqrt()
}

/// Row-major matrix product `(ra x ca) * (ca x cb)`.
pub fn matmul(a: &[f64], ra: usize, ca: usize, b: &[f64], cb: usize) -> Vec<f64> {
    debug_assert_eq!(a.len(), ra * ca);
    debug_assert_eq!(b.len(), ca * cb);
    let mut out = vec![0.0; ra * cb];
    for i in 0..ra {
        for k in 0..ca {
            let aik = a[i * ca + k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..cb {
                out[i * cb + j] += aik * b[k * cb + j];
            }
        }
    }
    out
}

/// Matrix-vector product of a row-major `(rows x cols)` matrix.
pub fn matvec(m: &[f64], rows: usize, cols: usize, v: &[f64], out: &mut [f64]) {
    debug_assert_eq!(m.len(), rows * cols);
    debug_assert_eq!(v.len(), cols);
    debug_assert_eq!(out.len(), rows);
    for r in 0..rows {
        out[r] = dot(&m[r * cols..(r + 1) * cols], v);
    }
}

/// Euclidean operator norm (largest singular value) of a row-major matrix.
///
/// Power iteration on the Gram matrix from a few deterministic starts; the
/// result is clamped into the rigorous bracket
/// `[max(row, column norms), Frobenius norm]`.
pub fn operator_norm(m: &[f64], rows: usize, cols: usize) -> f64 {
    debug_assert_eq!(m.len(), rows * cols);
    if rows == 0 || cols == 0 || m.iter().all(|&x| x == 0.0) {
        return 0.0;
    }
    if rows == 1 {
        return norm(m);
    }
    if cols == 1 {
        return norm(m);
    }

    let mut lo: f64 = 0.0;
    let mut frob = 0.0;
    for r in 0..rows {
        lo = lo.max(norm(&m[r * cols..(r + 1) * cols]));
    }
    for c in 0..cols {
        let mut s = 0.0;
        for r in 0..rows {
            let x = m[r * cols + c];
            s += x * x;
            frob += x * x;
        }
        lo = lo.max(s.sqrt());
    }
    let hi = frob.sqrt();

    // Gram matrix G = M^T M (cols x cols).
    let mut gram = vec![0.0; cols * cols];
    for i in 0..cols {
        for j in 0..cols {
            let mut s = 0.0;
            for r in 0..rows {
                s += m[r * cols + i] * m[r * cols + j];
            }
            gram[i * cols + j] = s;
        }
    }

    let starts: [&dyn Fn(usize) -> f64; 3] = [
        &|_| 1.0,
        &|i| if i % 2 == 0 { 1.0 } else { -1.0 },
        &|i| 1.0 + (i as f64) * 0.5,
    ];
    let mut best = lo;
    let mut v = vec![0.0; cols];
    let mut gv = vec![0.0; cols];
    for start in starts {
        for (i, x) in v.iter_mut().enumerate() {
            *x = start(i);
        }
        let mut lambda = 0.0;
        for _ in 0..200 {
            matvec(&gram, cols, cols, &v, &mut gv);
            let n = norm(&gv);
            if n == 0.0 {
                break;
            }
            for i in 0..cols {
                v[i] = gv[i] / n;
            }
            let prev = lambda;
            lambda = n;
            if (lambda - prev).abs() <= 1e-15 * lambda {
                break;
            }
        }
        best = best.max(lambda.sqrt());
    }
    best.min(hi)
}

/// Numerical rank via Gaussian elimination with partial pivoting.
pub fn rank(m: &[f64], rows: usize, cols: usize, rel_tol: f64) -> usize {
    let mut a = m.to_vec();
    let scale = m.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    if scale == 0.0 {
        return 0;
    }
    let tol = rel_tol * scale;
    let mut rank = 0;
    let mut row = 0;
    for col in 0..cols {
        let mut piv = row;
        for r in row..rows {
            if a[r * cols + col].abs() > a[piv * cols + col].abs() {
                piv = r;
            }
        }
        if row >= rows || a[piv * cols + col].abs() <= tol {
            continue;
        }
        if piv != row {
            for c in 0..cols {
                a.swap(row * cols + c, piv * cols + c);
            }
        }
        for r in (row + 1)..rows {
            let f = a[r * cols + col] / a[row * cols + col];
            for c in col..cols {
                a[r * cols + c] -= f * a[row * cols + c];
            }
        }
        rank += 1;
        row += 1;
    }
    rank
}
