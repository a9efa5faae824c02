use crate::error::{Error, Result};

/// Symmetric band matrix, lower triangle stored row by row.
///
/// Row `i` holds columns `i - bw ..= i` at offsets `0 ..= bw`; the diagonal sits at `bw`.
/// Entries left of column 0 are padding and stay zero.
#[derive(Clone, Debug, PartialEq)]
pub struct BandMatrix {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, bw: usize) -> Self {
        Self { n, bw, data: vec![0.0; n * (bw + 1)] }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    #[inline]
    fn pos(&self, i: usize, j: usize) -> usize {
        debug_assert!(j <= i && i - j <= self.bw);
        i * (self.bw + 1) + j + self.bw - i
    }

    /// `A[i][j]` for any `i, j`; zero outside the band.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        if i - j > self.bw {
            0.0
        } else {
            self.data[self.pos(i, j)]
        }
    }

    /// Adds `v` to the symmetric pair `(i, j)`, `(j, i)`.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        assert!(i - j <= self.bw, "entry ({i}, {j}) outside bandwidth {}", self.bw);
        let p = self.pos(i, j);
        self.data[p] += v;
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.data[self.pos(i, i)]).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `A x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let lo = i.saturating_sub(self.bw);
            let row = &self.data[i * (self.bw + 1)..(i + 1) * (self.bw + 1)];
            let off = self.bw + lo - i;
            let mut acc = row[self.bw] * x[i];
            for (k, &a) in row[off..self.bw].iter().enumerate() {
                let c = lo + k;
                acc += a * x[c];
                y[c] += a * x[i];
            }
            y[i] += acc;
        }
        y
    }

    /// `x^T A x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        self.mul_vec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// Nonzero lower-triangle entries `(row, col, value)`.
    pub fn lower_entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| {
            (i.saturating_sub(self.bw)..=i).filter_map(move |j| {
                let v = self.data[self.pos(i, j)];
                (v != 0.0).then_some((i, j, v))
            })
        })
    }

    /// Band Cholesky `A = L L^T`.
    pub fn cholesky(&self) -> Result<BandCholesky> {
        let (n, bw) = (self.n, self.bw);
        let stride = bw + 1;
        let mut l = self.data.clone();
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            for c in lo..=i {
                let k0 = lo.max(c.saturating_sub(bw));
                // L[i][k] and L[c][k] for k in k0..c are contiguous in their rows.
                let ri = i * stride + k0 + bw - i;
                let rc = c * stride + k0 + bw - c;
                let len = c - k0;
                let dot: f64 = l[ri..ri + len].iter().zip(&l[rc..rc + len]).map(|(a, b)| a * b).sum();
                let p = i * stride + c + bw - i;
                let v = l[p] - dot;
                if c < i {
                    l[p] = v / l[c * stride + bw];
                } else {
                    if !(v > 0.0) || !v.is_finite() {
                        return Err(Error::NotPositiveDefinite { pivot: i, value: v });
                    }
                    l[p] = v.sqrt();
                }
            }
        }
        Ok(BandCholesky { n, bw, data: l })
    }
}

/// Lower factor of a band Cholesky decomposition.
#[derive(Clone, Debug)]
pub struct BandCholesky {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl BandCholesky {
    pub fn size(&self) -> usize {
        self.n
    }

    pub fn min_pivot(&self) -> f64 {
        (0..self.n).map(|i| self.data[i * (self.bw + 1) + self.bw]).fold(f64::INFINITY, f64::min)
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        let (n, bw) = (self.n, self.bw);
        let stride = bw + 1;
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            let row = &self.data[i * stride..(i + 1) * stride];
            let dot: f64 = row[lo + bw - i..bw].iter().zip(&b[lo..i]).map(|(a, x)| a * x).sum();
            b[i] = (b[i] - dot) / row[bw];
        }
        for i in (0..n).rev() {
            let row = &self.data[i * stride..(i + 1) * stride];
            b[i] /= row[bw];
            let xi = b[i];
            let lo = i.saturating_sub(bw);
            for (k, a) in row[lo + bw - i..bw].iter().enumerate() {
                b[lo + k] -= a * xi;
            }
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `||b - A x|| / ||b||`, zero when `b = 0` and `x = 0`.
pub fn relative_residual(a: &BandMatrix, x: &[f64], b: &[f64]) -> f64 {
    let ax = a.mul_vec(x);
    let r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let nb = norm2(b);
    if nb == 0.0 {
        norm2(&r)
    } else {
        norm2(&r) / nb
    }
}

/// Conjugate gradients with Jacobi preconditioning, started from `x`.
pub fn pcg(a: &BandMatrix, b: &[f64], x: &mut [f64], tol: f64, max_iter: usize) -> Result<(f64, usize)> {
    let nb = norm2(b);
    if nb == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok((0.0, 0));
    }
    let inv_diag: Vec<f64> = a.diagonal().iter().map(|d| if *d > 0.0 { 1.0 / d } else { 1.0 }).collect();
    let ax = a.mul_vec(x);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut res = norm2(&r) / nb;
    for it in 0..max_iter {
        if res <= tol {
            return Ok((res, it));
        }
        let ap = a.mul_vec(&p);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if !(pap > 0.0) {
            return Err(Error::NotPositiveDefinite { pivot: it, value: pap });
        }
        let alpha = rz / pap;
        x.iter_mut().zip(&p).for_each(|(x, p)| *x += alpha * p);
        r.iter_mut().zip(&ap).for_each(|(r, ap)| *r -= alpha * ap);
        z.iter_mut().zip(r.iter().zip(&inv_diag)).for_each(|(z, (r, d))| *z = r * d);
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let gamma = rz_new / rz;
        rz = rz_new;
        p.iter_mut().zip(&z).for_each(|(p, z)| *p = z + gamma * *p);
        res = norm2(&r) / nb;
    }
    if res <= tol {
        Ok((res, max_iter))
    } else {
        Err(Error::SolverNotConverged { residual: res, iterations: max_iter })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Diagonally dominant symmetric band test matrix.
    fn sample(n: usize, bw: usize) -> BandMatrix {
        let mut a = BandMatrix::zeros(n, bw);
        for i in 0..n {
            a.add(i, i, 4.0 + bw as f64 * 2.0 + (i % 3) as f64);
            for d in 1..=bw.min(i) {
                a.add(i, i - d, -1.0 / d as f64 + 0.1 * ((i * 7 + d) % 5) as f64 / 5.0);
            }
        }
        a
    }

    fn dense(a: &BandMatrix) -> Vec<Vec<f64>> {
        (0..a.size()).map(|i| (0..a.size()).map(|j| a.get(i, j)).collect()).collect()
    }

    #[test]
    fn matvec_matches_dense() {
        let a = sample(30, 4);
        let d = dense(&a);
        let x: Vec<f64> = (0..30).map(|i| (i as f64 * 0.37).sin()).collect();
        let y = a.mul_vec(&x);
        for i in 0..30 {
            let e: f64 = (0..30).map(|j| d[i][j] * x[j]).sum();
            assert!((y[i] - e).abs() < 1e-12);
        }
    }

    #[test]
    fn cholesky_solves() {
        for (n, bw) in [(1, 0), (5, 4), (40, 3), (60, 10), (8, 20)] {
            let a = sample(n, bw.min(n.saturating_sub(1)));
            let f = a.cholesky().unwrap();
            let b: Vec<f64> = (0..n).map(|i| 1.0 + i as f64).collect();
            let x = f.solve(&b);
            assert!(relative_residual(&a, &x, &b) < 1e-13, "n {n} bw {bw}");
        }
    }

    #[test]
    fn pcg_matches_cholesky() {
        let a = sample(80, 6);
        let b: Vec<f64> = (0..80).map(|i| (i as f64).cos()).collect();
        let x_ref = a.cholesky().unwrap().solve(&b);
        let mut x = vec![0.0; 80];
        let (res, _) = pcg(&a, &b, &mut x, 1e-12, 500).unwrap();
        assert!(res <= 1e-12);
        let err = x.iter().zip(&x_ref).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-9);
    }

    #[test]
    fn indefinite_is_rejected() {
        let mut a = BandMatrix::zeros(3, 1);
        a.add(0, 0, 1.0);
        a.add(1, 1, 1.0);
        a.add(2, 2, 1.0);
        a.add(1, 0, 2.0);
        assert!(matches!(a.cholesky(), Err(Error::NotPositiveDefinite { pivot: 1, .. })));
    }

    #[test]
    fn lower_entries_round_trip() {
        let a = sample(12, 3);
        let mut b = BandMatrix::zeros(12, 3);
        for (i, j, v) in a.lower_entries() {
            b.add(i, j, v);
        }
        assert_eq!(a, b);
    }
}
