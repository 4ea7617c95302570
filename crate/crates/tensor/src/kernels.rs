//! Plain slice kernels shared by the graph and by graph-free inference.

/// Additive value for disallowed attention entries.
pub const MASK_VALUE: f64 = -1e9;

pub const LAYER_NORM_EPS: f64 = 1e-5;

/// `c = alpha * op(a) * op(b) + beta * c` where `op(a)` is `m x k` and
/// `op(b)` is `k x n`. A transposed operand is stored in the other layout.
#[allow(clippy::too_many_arguments)]
pub fn gemm(m: usize, k: usize, n: usize, a: &[f64], a_t: bool, b: &[f64], b_t: bool, c: &mut [f64], beta: f64) {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), k * n);
    debug_assert_eq!(c.len(), m * n);
    if m == 0 || n == 0 {
        return;
    }
    if k == 0 {
        c.iter_mut().for_each(|x| *x *= beta);
        return;
    }
    let (rsa, csa) = if a_t { (1, m as isize) } else { (k as isize, 1) };
    let (rsb, csb) = if b_t { (1, k as isize) } else { (n as isize, 1) };
    // SAFETY: lengths are checked above and strides describe the stated
    // row-major layouts, so every access stays inside the slices.
    unsafe {
        matrixmultiply::dgemm(
            m, k, n, 1.0, a.as_ptr(), rsa, csa, b.as_ptr(), rsb, csb, beta, c.as_mut_ptr(), n as isize, 1,
        );
    }
}

/// `a (m x k) * b (k x n)`.
pub fn matmul(a: &[f64], m: usize, k: usize, b: &[f64], n: usize) -> Vec<f64> {
    let mut c = vec![0.0; m * n];
    gemm(m, k, n, a, false, b, false, &mut c, 0.0);
    c
}

/// In-place numerically stable softmax of one row.
pub fn softmax_in_place(row: &mut [f64]) {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for x in row.iter_mut() {
        *x = (*x - max).exp();
        sum += *x;
    }
    for x in row.iter_mut() {
        *x /= sum;
    }
}

/// Normalises one row; returns `(xhat, 1/std)`.
pub fn layer_norm_row(x: &[f64], xhat: &mut [f64]) -> f64 {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let inv = 1.0 / (var + LAYER_NORM_EPS).sqrt();
    for (h, v) in xhat.iter_mut().zip(x) {
        *h = (v - mean) * inv;
    }
    inv
}

/// Row-wise layer norm with gain and bias.
pub fn layer_norm(x: &[f64], cols: usize, gamma: &[f64], beta: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; x.len()];
    for (xr, or) in x.chunks(cols).zip(out.chunks_mut(cols)) {
        layer_norm_row(xr, or);
        for ((o, g), b) in or.iter_mut().zip(gamma).zip(beta) {
            *o = *o * g + b;
        }
    }
    out
}

/// `x (rows x in) * w (in x out) + b`.
pub fn linear(x: &[f64], rows: usize, w: &[f64], inp: usize, out: usize, b: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; rows * out];
    for r in y.chunks_mut(out) {
        r.copy_from_slice(b);
    }
    gemm(rows, inp, out, x, false, w, false, &mut y, 1.0);
    y
}

/// Multi-head scaled dot-product attention for plain buffers.
/// `allowed(i, j)` says whether query `i` may attend key `j`.
#[allow(clippy::too_many_arguments)]
pub fn attention(
    q: &[f64],
    lq: usize,
    k: &[f64],
    v: &[f64],
    lk: usize,
    d: usize,
    heads: usize,
    allowed: impl Fn(usize, usize) -> bool,
) -> Vec<f64> {
    let dh = d / heads;
    let scale = 1.0 / (dh as f64).sqrt();
    let mut out = vec![0.0; lq * d];
    let mut scores = vec![0.0; lk];
    for h in 0..heads {
        for i in 0..lq {
            let qi = &q[i * d + h * dh..i * d + (h + 1) * dh];
            for (j, s) in scores.iter_mut().enumerate() {
                let kj = &k[j * d + h * dh..j * d + (h + 1) * dh];
                let dot: f64 = qi.iter().zip(kj).map(|(a, b)| a * b).sum();
                *s = dot * scale + if allowed(i, j) { 0.0 } else { MASK_VALUE };
            }
            softmax_in_place(&mut scores);
            let oi = &mut out[i * d + h * dh..i * d + (h + 1) * dh];
            for (j, p) in scores.iter().enumerate() {
                let vj = &v[j * d + h * dh..j * d + (h + 1) * dh];
                for (o, x) in oi.iter_mut().zip(vj) {
                    *o += p * x;
                }
            }
        }
    }
    out
}
