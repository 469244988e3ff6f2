//! Small dense matrix multiply used by the convolution kernels.
//!
//! Every output element accumulates its `k` products in increasing `k`
//! order, so results do not depend on the blocking.

const MR: usize = 4;
const NR: usize = 4;

/// `c[m x n] += a[m x k] * b[k x n]`, all row-major.
pub(crate) fn gemm_acc(m: usize, k: usize, n: usize, a: &[f64], b: &[f64], c: &mut [f64]) {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), k * n);
    debug_assert_eq!(c.len(), m * n);
    if m == 0 || n == 0 {
        return;
    }

    // pack B into column panels of width NR: panel[p][kk][0..NR]
    let panels = n.div_ceil(NR);
    let mut packed = vec![0.0; panels * k * NR];
    for p in 0..panels {
        let j0 = p * NR;
        let w = NR.min(n - j0);
        let dst = &mut packed[p * k * NR..(p + 1) * k * NR];
        for kk in 0..k {
            dst[kk * NR..kk * NR + w].copy_from_slice(&b[kk * n + j0..kk * n + j0 + w]);
        }
    }

    for p in 0..panels {
        let j0 = p * NR;
        let w = NR.min(n - j0);
        let panel = &packed[p * k * NR..(p + 1) * k * NR];
        let mut i0 = 0;
        while i0 < m {
            let h = MR.min(m - i0);
            if h == MR {
                micro_4xn(k, &a[i0 * k..(i0 + MR) * k], panel, c, i0, j0, w, n);
            } else {
                for i in i0..i0 + h {
                    micro_1xn(k, &a[i * k..(i + 1) * k], panel, c, i, j0, w, n);
                }
            }
            i0 += h;
        }
    }
}

#[inline(always)]
#[allow(clippy::too_many_arguments)]
fn micro_4xn(
    k: usize,
    a: &[f64],
    panel: &[f64],
    c: &mut [f64],
    i0: usize,
    j0: usize,
    w: usize,
    n: usize,
) {
    let mut acc = [[0.0f64; NR]; MR];
    for (r, row) in acc.iter_mut().enumerate() {
        row[..w].copy_from_slice(&c[(i0 + r) * n + j0..(i0 + r) * n + j0 + w]);
    }
    let (a0, rest) = a.split_at(k);
    let (a1, rest) = rest.split_at(k);
    let (a2, a3) = rest.split_at(k);
    for (kk, bv) in panel.chunks_exact(NR).enumerate() {
        let av = [a0[kk], a1[kk], a2[kk], a3[kk]];
        for r in 0..MR {
            for j in 0..NR {
                acc[r][j] += av[r] * bv[j];
            }
        }
    }
    for (r, row) in acc.iter().enumerate() {
        c[(i0 + r) * n + j0..(i0 + r) * n + j0 + w].copy_from_slice(&row[..w]);
    }
}

#[inline(always)]
#[allow(clippy::too_many_arguments)]
fn micro_1xn(
    k: usize,
    a: &[f64],
    panel: &[f64],
    c: &mut [f64],
    i: usize,
    j0: usize,
    w: usize,
    n: usize,
) {
    let mut acc = [0.0f64; NR];
    acc[..w].copy_from_slice(&c[i * n + j0..i * n + j0 + w]);
    for (kk, bv) in panel.chunks_exact(NR).take(k).enumerate() {
        let av = a[kk];
        for j in 0..NR {
            acc[j] += av * bv[j];
        }
    }
    c[i * n + j0..i * n + j0 + w].copy_from_slice(&acc[..w]);
}

/// Row-major transpose of an `rows x cols` matrix.
pub(crate) fn transpose(rows: usize, cols: usize, src: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            out[c * rows + r] = src[r * cols + c];
        }
    }
    out
}
