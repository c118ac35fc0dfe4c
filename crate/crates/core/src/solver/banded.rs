use crate::solver::sparse::SparseMatrix;

/// LU factors of a banded matrix with partial pivoting.
///
/// Row `r` stores columns `r − kl ..= r + kl + ku`; the extra `kl` columns on
/// the right absorb fill from row interchanges.
#[derive(Clone, Debug)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
    pivots: Vec<usize>,
}

/// Failed factorization: the pivot column was numerically zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZeroPivot {
    pub row: usize,
    pub value: f64,
}

impl BandedLu {
    pub fn factor(matrix: &SparseMatrix) -> Result<Self, ZeroPivot> {
        let n = matrix.n;
        let (kl, ku) = matrix.bandwidths();
        let width = 2 * kl + ku + 1;
        let mut data = vec![0.0; n * width];
        for r in 0..n {
            for (c, v) in matrix.row(r) {
                data[r * width + (c + kl - r)] += v;
            }
        }
        let threshold = f64::EPSILON * matrix.max_abs().max(f64::MIN_POSITIVE);
        let mut pivots = vec![0; n];
        let at = |row: usize, col: usize| row * width + (col + kl - row);
        for r in 0..n {
            let last_row = (r + kl).min(n - 1);
            let mut p = r;
            let mut best = data[at(r, r)].abs();
            for q in r + 1..=last_row {
                let v = data[at(q, r)].abs();
                if v > best {
                    best = v;
                    p = q;
                }
            }
            if !(best > threshold) {
                return Err(ZeroPivot {
                    row: r,
                    value: best,
                });
            }
            pivots[r] = p;
            let last_col = (r + kl + ku).min(n - 1);
            if p != r {
                for c in r..=last_col {
                    data.swap(at(r, c), at(p, c));
                }
            }
            let pivot = data[at(r, r)];
            let (head, tail) = data.split_at_mut((r + 1) * width);
            let urow = &head[at(r, r)..=at(r, last_col)];
            for q in r + 1..=last_row {
                let base = (q - r - 1) * width;
                let lpos = base + (r + kl - q);
                let l = tail[lpos] / pivot;
                tail[lpos] = l;
                if l != 0.0 {
                    let start = base + (r + 1 + kl - q);
                    let row = &mut tail[start..start + (last_col - r)];
                    for (x, u) in row.iter_mut().zip(&urow[1..]) {
                        *x -= l * u;
                    }
                }
            }
        }
        Ok(Self {
            n,
            kl,
            ku,
            width,
            data,
            pivots,
        })
    }

    /// Overwrites `b` with the solution of `A x = b`.
    pub fn solve(&self, b: &mut [f64]) {
        let (n, kl, ku, width) = (self.n, self.kl, self.ku, self.width);
        let at = |row: usize, col: usize| row * width + (col + kl - row);
        for r in 0..n {
            b.swap(r, self.pivots[r]);
            let br = b[r];
            if br != 0.0 {
                for q in r + 1..=(r + kl).min(n - 1) {
                    b[q] -= self.data[at(q, r)] * br;
                }
            }
        }
        for r in (0..n).rev() {
            let last_col = (r + kl + ku).min(n - 1);
            let mut s = b[r];
            for c in r + 1..=last_col {
                s -= self.data[at(r, c)] * b[c];
            }
            b[r] = s / self.data[at(r, r)];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_banded(n: usize, kl: usize, ku: usize, seed: u64) -> SparseMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pattern = Vec::new();
        let mut rows = Vec::new();
        for r in 0..n {
            let lo = r.saturating_sub(kl);
            let hi = (r + ku).min(n - 1);
            let cols: Vec<usize> = (lo..=hi).collect();
            let vals = cols.iter().map(|_| rng.gen_range(-1.0..1.0)).collect();
            pattern.push(cols);
            rows.push(vals);
        }
        SparseMatrix::from_rows(pattern, rows)
    }

    #[test]
    fn solves_random_banded_systems() {
        for (n, kl, ku, seed) in [(50, 3, 2, 1), (200, 10, 10, 2), (7, 6, 6, 3), (40, 0, 0, 4)] {
            let a = random_banded(n, kl, ku, seed);
            let mut rng = ChaCha8Rng::seed_from_u64(seed + 100);
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut b = a.mul_vec(&x);
            BandedLu::factor(&a).unwrap().solve(&mut b);
            let err = b.iter().zip(&x).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
            assert!(err < 1e-8, "n={n} err={err}");
        }
    }

    #[test]
    fn needs_pivoting() {
        let a = SparseMatrix::from_rows(vec![vec![0, 1], vec![0, 1]], vec![vec![0.0, 1.0], vec![1.0, 1.0]]);
        let mut b = vec![2.0, 5.0];
        BandedLu::factor(&a).unwrap().solve(&mut b);
        assert!((b[0] - 3.0).abs() < 1e-15 && (b[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a = SparseMatrix::from_rows(vec![vec![0, 1], vec![0, 1]], vec![vec![1.0, 2.0], vec![2.0, 4.0]]);
        assert_eq!(BandedLu::factor(&a).unwrap_err().row, 1);
    }
}
