//! Direct sparse LU with partial pivoting.
//!
//! The matrix is first symmetrically permuted with reverse Cuthill-McKee to
//! shrink its bandwidth, then factored as a banded LU with row pivoting
//! (LAPACK `gbtrf`-style: `A = P_1 L_1 ... P_{n-1} L_{n-1} U`). Both the
//! forward and the transposed solve are supported, which is what the
//! normal-form preconditioner needs.

use super::{CsrMatrix, DenseVector};
use crate::error::{Error, Result};

/// Factored form of a square sparse matrix, with the fill-reducing
/// permutation and the pivot sequence needed to solve `M x = b` and
/// `M^T x = b`.
pub struct LuFactors {
    n: usize,
    /// symmetric permutation: `perm[new] = old`
    perm: Vec<usize>,
    /// pivot row chosen at each elimination step (in permuted numbering)
    ipiv: Vec<usize>,
    /// lower bandwidth of the permuted matrix
    kl: usize,
    /// upper bandwidth of the permuted matrix
    ku: usize,
    /// row-major band storage: row `i` covers columns `[i-kl, i+kl+ku]`
    band: Vec<f64>,
}

impl LuFactors {
    fn width(&self) -> usize {
        2 * self.kl + self.ku + 1
    }

    #[inline]
    fn at(&self, i: usize, c: usize) -> f64 {
        self.band[i * self.width() + (c + self.kl - i)]
    }
}

/// Reverse Cuthill-McKee ordering of the symmetrized pattern.
/// Ties are broken by node index, so the result is deterministic.
fn rcm_order(m: &CsrMatrix) -> Vec<usize> {
    let n = m.nrows();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for r in 0..n {
        for (c, _) in m.row(r) {
            if c != r {
                adj[r].push(c);
                adj[c].push(r);
            }
        }
    }
    for list in adj.iter_mut() {
        list.sort_unstable();
        list.dedup();
    }
    let degree: Vec<usize> = adj.iter().map(|l| l.len()).collect();

    let mut order = Vec::with_capacity(n);
    let mut visited = vec![false; n];
    loop {
        // start each component from a minimum-degree node
        let start = (0..n)
            .filter(|&i| !visited[i])
            .min_by_key(|&i| (degree[i], i));
        let Some(start) = start else { break };
        visited[start] = true;
        order.push(start);
        let mut head = order.len() - 1;
        while head < order.len() {
            let u = order[head];
            head += 1;
            let mut next: Vec<usize> = adj[u].iter().copied().filter(|&v| !visited[v]).collect();
            next.sort_unstable_by_key(|&v| (degree[v], v));
            for v in next {
                visited[v] = true;
                order.push(v);
            }
        }
    }
    order.reverse();
    order
}

/// Factors a square, structurally nonsingular sparse matrix.
pub fn lu_factor(m: &CsrMatrix) -> Result<LuFactors> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            context: "lu_factor",
            expected: m.nrows(),
            got: m.ncols(),
        });
    }
    let n = m.nrows();
    let perm = rcm_order(m);
    let mut new_of = vec![0usize; n];
    for (new, &old) in perm.iter().enumerate() {
        new_of[old] = new;
    }

    // bandwidths of the permuted matrix
    let mut kl = 0usize;
    let mut ku = 0usize;
    for r in 0..n {
        let pr = new_of[r];
        for (c, _) in m.row(r) {
            let pc = new_of[c];
            if pr > pc {
                kl = kl.max(pr - pc);
            } else {
                ku = ku.max(pc - pr);
            }
        }
    }

    let width = 2 * kl + ku + 1;
    let mut band = vec![0.0f64; n * width];
    for r in 0..n {
        let pr = new_of[r];
        for (c, v) in m.row(r) {
            let pc = new_of[c];
            band[pr * width + (pc + kl - pr)] += v;
        }
    }

    let mut ipiv: Vec<usize> = (0..n).collect();
    for j in 0..n {
        let ilast = (j + kl).min(n - 1);
        let clast = (j + kl + ku).min(n - 1);
        // partial pivoting over the kl rows below the diagonal
        let mut jp = j;
        let mut best = band[j * width + (j + kl - j)].abs();
        for i in (j + 1)..=ilast {
            let v = band[i * width + (j + kl - i)].abs();
            if v > best {
                best = v;
                jp = i;
            }
        }
        if best == 0.0 || !best.is_finite() {
            return Err(Error::SingularMatrix { row: perm[j] });
        }
        ipiv[j] = jp;
        if jp != j {
            for c in j..=clast {
                band.swap(j * width + (c + kl - j), jp * width + (c + kl - jp));
            }
        }
        let piv = band[j * width + kl];
        let len = clast - j; // live entries strictly right of the diagonal
        for i in (j + 1)..=ilast {
            let mult = band[i * width + (j + kl - i)] / piv;
            band[i * width + (j + kl - i)] = mult;
            if mult != 0.0 && len > 0 {
                let (top, bottom) = band.split_at_mut(i * width);
                let row_j = &top[j * width + kl + 1..j * width + kl + 1 + len];
                let off_i = j + 1 + kl - i;
                let row_i = &mut bottom[off_i..off_i + len];
                for (a, &b) in row_i.iter_mut().zip(row_j.iter()) {
                    *a -= mult * b;
                }
            }
        }
    }

    Ok(LuFactors {
        n,
        perm,
        ipiv,
        kl,
        ku,
        band,
    })
}

/// Solves `M x = b` from the factors of `M`.
pub fn lu_solve(f: &LuFactors, b: &DenseVector) -> Result<DenseVector> {
    if b.len() != f.n {
        return Err(Error::DimensionMismatch {
            context: "lu_solve",
            expected: f.n,
            got: b.len(),
        });
    }
    let n = f.n;
    let mut x = DenseVector::zeros(n);
    for i in 0..n {
        x[i] = b[f.perm[i]];
    }
    // L side, interleaved with the pivot swaps
    for j in 0..n {
        if f.ipiv[j] != j {
            x.swap(j, f.ipiv[j]);
        }
        let xj = x[j];
        if xj != 0.0 {
            for i in (j + 1)..=(j + f.kl).min(n - 1) {
                x[i] -= f.at(i, j) * xj;
            }
        }
    }
    // U back substitution
    for j in (0..n).rev() {
        let mut acc = x[j];
        for c in (j + 1)..=(j + f.kl + f.ku).min(n - 1) {
            acc -= f.at(j, c) * x[c];
        }
        x[j] = acc / f.at(j, j);
    }
    let mut out = DenseVector::zeros(n);
    for i in 0..n {
        out[f.perm[i]] = x[i];
    }
    debug_assert!(out.is_finite());
    Ok(out)
}

/// Solves `M^T x = b` from the factors of `M`.
pub fn lu_solve_transpose(f: &LuFactors, b: &DenseVector) -> Result<DenseVector> {
    if b.len() != f.n {
        return Err(Error::DimensionMismatch {
            context: "lu_solve_transpose",
            expected: f.n,
            got: b.len(),
        });
    }
    let n = f.n;
    let mut x = DenseVector::zeros(n);
    for i in 0..n {
        x[i] = b[f.perm[i]];
    }
    // U^T forward substitution
    for j in 0..n {
        let mut acc = x[j];
        let rfirst = (j).saturating_sub(f.kl + f.ku);
        for r in rfirst..j {
            if j <= r + f.kl + f.ku {
                acc -= f.at(r, j) * x[r];
            }
        }
        x[j] = acc / f.at(j, j);
    }
    // (P_j L_j)^T factors applied in reverse order
    for j in (0..n).rev() {
        let mut acc = x[j];
        for i in (j + 1)..=(j + f.kl).min(n - 1) {
            acc -= f.at(i, j) * x[i];
        }
        x[j] = acc;
        if f.ipiv[j] != j {
            x.swap(j, f.ipiv[j]);
        }
    }
    let mut out = DenseVector::zeros(n);
    for i in 0..n {
        out[f.perm[i]] = x[i];
    }
    debug_assert!(out.is_finite());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::{spmv, spmv_transpose};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    /// Dense Gaussian elimination with partial pivoting, as an independent
    /// oracle for the banded solver.
    fn dense_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
        let n = b.len();
        let mut m: Vec<Vec<f64>> = a.to_vec();
        let mut x: Vec<f64> = b.to_vec();
        for j in 0..n {
            let p = (j..n)
                .max_by(|&r, &s| m[r][j].abs().partial_cmp(&m[s][j].abs()).unwrap())
                .unwrap();
            m.swap(j, p);
            x.swap(j, p);
            for i in (j + 1)..n {
                let f = m[i][j] / m[j][j];
                for c in j..n {
                    m[i][c] -= f * m[j][c];
                }
                x[i] -= f * x[j];
            }
        }
        for j in (0..n).rev() {
            for c in (j + 1)..n {
                x[j] -= m[j][c] * x[c];
            }
            x[j] /= m[j][j];
        }
        x
    }

    fn to_dense(m: &CsrMatrix) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; m.ncols()]; m.nrows()];
        for r in 0..m.nrows() {
            for (c, v) in m.row(r) {
                d[r][c] = v;
            }
        }
        d
    }

    #[test]
    fn identity_solves_return_input() {
        let f = lu_factor(&CsrMatrix::identity(4)).unwrap();
        let b = DenseVector::from_vec(vec![1.0, -2.0, 0.5, 3.0]);
        assert_eq!(lu_solve(&f, &b).unwrap().deref(), b.deref());
        assert_eq!(lu_solve_transpose(&f, &b).unwrap().deref(), b.deref());
    }

    #[test]
    fn hand_example_inverse() {
        let m = CsrMatrix::from_triplets(2, 2, &[(0, 0, 2.0), (0, 1, 1.0), (1, 1, 3.0)]);
        let f = lu_factor(&m).unwrap();
        let x = lu_solve(&f, &DenseVector::from_vec(vec![3.0, 3.0])).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14);
        assert!((x[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_1x1_is_singular() {
        let m = CsrMatrix::from_triplets(1, 1, &[(0, 0, 0.0)]);
        match lu_factor(&m) {
            Err(Error::SingularMatrix { row }) => assert_eq!(row, 0),
            other => panic!("expected SingularMatrix, got {other:?}"),
        }
    }

    #[test]
    fn spd_tridiagonal_solve_equals_transpose_solve() {
        let mut triplets = Vec::new();
        for i in 0..4 {
            triplets.push((i, i, 2.0));
            if i > 0 {
                triplets.push((i, i - 1, -1.0));
                triplets.push((i - 1, i, -1.0));
            }
        }
        let m = CsrMatrix::from_triplets(4, 4, &triplets);
        let f = lu_factor(&m).unwrap();
        let b = DenseVector::from_vec(vec![1.0, 0.0, -1.0, 2.0]);
        let x = lu_solve(&f, &b).unwrap();
        let xt = lu_solve_transpose(&f, &b).unwrap();
        for (a, b) in x.iter().zip(xt.iter()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn random_6x6_matches_dense_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let mut triplets = Vec::new();
            for r in 0..6 {
                triplets.push((r, r, rng.gen_range(2.0..4.0)));
                for c in 0..6 {
                    if c != r && rng.gen_bool(0.6) {
                        triplets.push((r, c, rng.gen_range(-1.0..1.0)));
                    }
                }
            }
            let m = CsrMatrix::from_triplets(6, 6, &triplets);
            let b: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let f = lu_factor(&m).unwrap();
            let x = lu_solve(&f, &DenseVector::from_vec(b.clone())).unwrap();
            let xd = dense_solve(&to_dense(&m), &b);
            for (a, b) in x.iter().zip(xd.iter()) {
                assert!((a - b).abs() < 1e-12, "banded {a} vs dense {b}");
            }
            // transposed solve against the dense oracle on the transpose
            let xt = lu_solve_transpose(&f, &DenseVector::from_vec(b.clone())).unwrap();
            let td = to_dense(&m.transpose());
            let xtd = dense_solve(&td, &b);
            for (a, b) in xt.iter().zip(xtd.iter()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn solve_after_spmv_is_identity_up_to_5000() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for &n in &[50usize, 700, 5000] {
            // banded random matrix with a dominant diagonal
            let half = 3usize;
            let mut triplets = Vec::new();
            for r in 0..n {
                triplets.push((r, r, 8.0 + rng.gen_range(0.0..1.0)));
                for d in 1..=half {
                    if r >= d {
                        triplets.push((r, r - d, rng.gen_range(-1.0..1.0)));
                    }
                    if r + d < n {
                        triplets.push((r, r + d, rng.gen_range(-1.0..1.0)));
                    }
                }
            }
            let m = CsrMatrix::from_triplets(n, n, &triplets);
            let x = DenseVector::from_vec((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect());
            let f = lu_factor(&m).unwrap();

            let b = spmv(&m, &x).unwrap();
            let x2 = lu_solve(&f, &b).unwrap();
            let num: f64 = x2.iter().zip(x.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
            assert!(num.sqrt() / x.norm() < 1e-11);

            let bt = spmv_transpose(&m, &x).unwrap();
            let x3 = lu_solve_transpose(&f, &bt).unwrap();
            let num: f64 = x3.iter().zip(x.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
            assert!(num.sqrt() / x.norm() < 1e-11);
        }
    }

    #[test]
    fn residual_below_1e12_on_random_sparse() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let n = 300;
        let mut triplets = Vec::new();
        for r in 0..n {
            triplets.push((r, r, 5.0));
            for _ in 0..4 {
                let c = rng.gen_range(0..n);
                if c != r {
                    triplets.push((r, c, rng.gen_range(-1.0..1.0)));
                }
            }
        }
        let m = CsrMatrix::from_triplets(n, n, &triplets);
        let b = DenseVector::from_vec((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let f = lu_factor(&m).unwrap();
        let x = lu_solve(&f, &b).unwrap();
        let r = spmv(&m, &x).unwrap();
        let res: f64 = r
            .iter()
            .zip(b.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        assert!(res / b.norm() < 1e-12);
    }
}
