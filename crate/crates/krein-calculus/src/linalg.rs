//! Dense complex-float linear algebra kernel.
//!
//! Everything here operates on small matrices (n <= 64): LU solves,
//! Hermitian eigendecomposition by cyclic Jacobi rotations, and a complex
//! Schur decomposition (Hessenberg reduction + shifted QR) for the
//! eigenvalues of general matrices. Zero-dimensional matrices are legal
//! operands throughout; they arise as embedding factors of rank zero.

use crate::error::{Error, Result};
use num_complex::Complex64;
use num_traits::Zero;
use std::fmt;

const EPS: f64 = 2.2e-16;

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Complex64::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for k in 0..n {
            m[(k, k)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged rows");
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            data.extend(row);
        }
        Self { rows: r, cols: c, data }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn diag(entries: &[Complex64]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (k, &v) in entries.iter().enumerate() {
            m[(k, k)] = v;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0 || self.cols == 0
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "dimension mismatch");
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "dimension mismatch");
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let data = self.data.iter().map(|a| a * c).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch in matmul");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self[(i, k)];
                if aik.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += aik * rhs[(k, j)];
                }
            }
        }
        out
    }

    pub fn conj_transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|k| self[(k, k)]).sum()
    }

    pub fn fro_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Spectral norm via the Hermitian eigenvalues of A*A.
    pub fn spectral_norm(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        let gram = self.conj_transpose().matmul(self);
        let (vals, _) = gram.eigh();
        vals.iter().fold(0.0f64, |m, &v| m.max(v.max(0.0))).sqrt()
    }

    pub fn hermitian_residual(&self) -> f64 {
        self.sub(&self.conj_transpose()).fro_norm()
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn columns(&self, idx: &[usize]) -> Self {
        let mut out = Self::zeros(self.rows, idx.len());
        for (jj, &j) in idx.iter().enumerate() {
            for i in 0..self.rows {
                out[(i, jj)] = self[(i, j)];
            }
        }
        out
    }

    /// Solve A X = B by LU with partial pivoting (A square).
    pub fn solve(&self, rhs: &Self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch("solve needs a square matrix".into()));
        }
        if self.rows != rhs.rows {
            return Err(Error::DimensionMismatch("solve rhs row mismatch".into()));
        }
        let n = self.rows;
        if n == 0 {
            return Ok(Self::zeros(0, rhs.cols));
        }
        let mut lu = self.clone();
        let mut piv: Vec<usize> = (0..n).collect();
        let scale = self.max_abs().max(1.0);
        for k in 0..n {
            // pivot
            let (mut imax, mut vmax) = (k, lu[(k, k)].norm());
            for i in k + 1..n {
                let v = lu[(i, k)].norm();
                if v > vmax {
                    imax = i;
                    vmax = v;
                }
            }
            if vmax <= EPS * scale * 16.0 {
                return Err(Error::Singular);
            }
            if imax != k {
                for j in 0..n {
                    self::swap(&mut lu, k, imax, j);
                }
                piv.swap(k, imax);
            }
            let pivval = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / pivval;
                lu[(i, k)] = f;
                for j in k + 1..n {
                    let sub = f * lu[(k, j)];
                    lu[(i, j)] -= sub;
                }
            }
        }
        // forward/back substitution per column
        let mut x = Self::zeros(n, rhs.cols);
        for c in 0..rhs.cols {
            let mut y = vec![Complex64::zero(); n];
            for i in 0..n {
                let mut acc = rhs[(piv[i], c)];
                for j in 0..i {
                    acc -= lu[(i, j)] * y[j];
                }
                y[i] = acc;
            }
            for i in (0..n).rev() {
                let mut acc = y[i];
                for j in i + 1..n {
                    acc -= lu[(i, j)] * x[(j, c)];
                }
                x[(i, c)] = acc / lu[(i, i)];
            }
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Result<Self> {
        self.solve(&Self::identity(self.rows))
    }

    /// Moore-Penrose inverse for a full-column-rank matrix: (A*A)^{-1} A*.
    pub fn pinv_full_col(&self) -> Result<Self> {
        if self.cols == 0 {
            return Ok(Self::zeros(0, self.rows));
        }
        let at = self.conj_transpose();
        let gram = at.matmul(self);
        gram.solve(&at)
    }

    /// Moore-Penrose inverse for a full-row-rank matrix: A* (A A*)^{-1}.
    pub fn pinv_full_row(&self) -> Result<Self> {
        if self.rows == 0 {
            return Ok(Self::zeros(self.cols, 0));
        }
        let at = self.conj_transpose();
        let gram = self.matmul(&at);
        Ok(at.matmul(&gram.inverse()?))
    }

    /// Hermitian eigendecomposition by cyclic Jacobi: returns eigenvalues in
    /// ascending order and a unitary U with self ≈ U diag U*. The input is
    /// symmetrized first; callers check Hermitian-ness where it matters.
    pub fn eigh(&self) -> (Vec<f64>, CMatrix) {
        assert!(self.is_square(), "eigh needs a square matrix");
        let n = self.rows;
        if n == 0 {
            return (Vec::new(), CMatrix::zeros(0, 0));
        }
        // work on the Hermitian part
        let mut a = self.add(&self.conj_transpose()).scale(Complex64::new(0.5, 0.0));
        let mut u = CMatrix::identity(n);
        let norm = a.fro_norm().max(1e-300);
        for _sweep in 0..60 {
            let mut off = 0.0;
            for p in 0..n {
                for q in p + 1..n {
                    off += a[(p, q)].norm_sqr();
                }
            }
            if off.sqrt() <= 1e-15 * norm {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    let apq = a[(p, q)];
                    let b = apq.norm();
                    if b <= 1e-18 * norm {
                        continue;
                    }
                    let app = a[(p, p)].re;
                    let aqq = a[(q, q)].re;
                    let phase = apq / b; // e^{i theta}
                    let theta = (aqq - app) / (2.0 * b);
                    let t = if theta == 0.0 {
                        1.0
                    } else {
                        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                    };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    // G = [[c, s],[-s*conj(phase), c*conj(phase)]] acting on
                    // the (p, q) plane; update A <- G* A G and U <- U G.
                    let cs = Complex64::new(c, 0.0);
                    let sp = phase.conj() * s; // the (q,p)-ish entry pieces
                    // columns: (A G)
                    for r in 0..n {
                        let arp = a[(r, p)];
                        let arq = a[(r, q)];
                        a[(r, p)] = arp * cs - arq * sp;
                        a[(r, q)] = arp * s + arq * (phase.conj() * c);
                    }
                    // rows: (G* A)
                    for col in 0..n {
                        let apc = a[(p, col)];
                        let aqc = a[(q, col)];
                        a[(p, col)] = apc * cs - aqc * (phase * s);
                        a[(q, col)] = apc * s + aqc * (phase * c);
                    }
                    for r in 0..n {
                        let urp = u[(r, p)];
                        let urq = u[(r, q)];
                        u[(r, p)] = urp * cs - urq * sp;
                        u[(r, q)] = urp * s + urq * (phase.conj() * c);
                    }
                }
            }
        }
        // sort ascending by the (real) diagonal
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).unwrap());
        let vals: Vec<f64> = order.iter().map(|&k| a[(k, k)].re).collect();
        let usorted = u.columns(&order);
        (vals, usorted)
    }

    /// Complex Schur decomposition: self = Q T Q* with Q unitary and T upper
    /// triangular. Eigenvalues are the diagonal of T.
    pub fn schur(&self) -> Result<(CMatrix, CMatrix)> {
        assert!(self.is_square(), "schur needs a square matrix");
        let n = self.rows;
        if n == 0 {
            return Ok((CMatrix::zeros(0, 0), CMatrix::zeros(0, 0)));
        }
        let (mut h, mut q) = self.hessenberg();
        let norm = self.fro_norm().max(1e-300);
        let mut hi = n - 1;
        let mut iters_at_level = 0usize;
        loop {
            // deflate tiny subdiagonals anywhere in the active range
            let mut k = hi;
            while k > 0 {
                let sub = h[(k, k - 1)].norm();
                if sub <= EPS * (h[(k - 1, k - 1)].norm() + h[(k, k)].norm()).max(EPS * norm) {
                    h[(k, k - 1)] = Complex64::zero();
                }
                k -= 1;
            }
            // shrink hi past converged eigenvalues
            while hi > 0 && h[(hi, hi - 1)].is_zero() {
                hi -= 1;
                iters_at_level = 0;
            }
            if hi == 0 {
                break;
            }
            // find the start of the active unreduced block
            let mut lo = hi;
            while lo > 0 && !h[(lo, lo - 1)].is_zero() {
                lo -= 1;
            }
            iters_at_level += 1;
            if iters_at_level > 90 {
                return Err(Error::EigenNoConverge);
            }
            // Wilkinson shift from the trailing 2x2 of the active block
            let a = h[(hi - 1, hi - 1)];
            let b = h[(hi - 1, hi)];
            let c = h[(hi, hi - 1)];
            let d = h[(hi, hi)];
            let mut mu = {
                let tr = a + d;
                let det = a * d - b * c;
                let disc = (tr * tr - det.scale_by(4.0)).sqrt();
                let l1 = (tr + disc) * 0.5;
                let l2 = (tr - disc) * 0.5;
                if (l1 - d).norm() <= (l2 - d).norm() {
                    l1
                } else {
                    l2
                }
            };
            if iters_at_level.is_multiple_of(20) {
                // exceptional shift to break rare limit cycles
                mu = d + Complex64::new(0.75 * h[(hi, hi - 1)].norm(), 0.0);
            }
            // explicit single-shift QR step on [lo..=hi]:
            // H - mu I = G* R, then H <- R G + mu I.
            for k in lo..=hi {
                h[(k, k)] -= mu;
            }
            let mut rots: Vec<(f64, Complex64)> = Vec::with_capacity(hi - lo);
            for k in lo..hi {
                let (cg, sg) = givens(h[(k, k)], h[(k + 1, k)]);
                for j in k..n {
                    let hkj = h[(k, j)];
                    let hk1j = h[(k + 1, j)];
                    h[(k, j)] = hkj * cg + hk1j * sg;
                    h[(k + 1, j)] = -hkj * sg.conj() + hk1j * cg;
                }
                h[(k + 1, k)] = Complex64::zero();
                rots.push((cg, sg));
            }
            for (k, (cg, sg)) in rots.iter().enumerate().map(|(i, r)| (lo + i, r)) {
                // apply G* on the right to columns k, k+1 (rows 0..=k+1 can be nonzero)
                let top = (k + 2).min(n);
                for i in 0..top {
                    let hik = h[(i, k)];
                    let hik1 = h[(i, k + 1)];
                    h[(i, k)] = hik * cg + hik1 * sg.conj();
                    h[(i, k + 1)] = -hik * *sg + hik1 * cg;
                }
                for i in 0..n {
                    let qik = q[(i, k)];
                    let qik1 = q[(i, k + 1)];
                    q[(i, k)] = qik * cg + qik1 * sg.conj();
                    q[(i, k + 1)] = -qik * *sg + qik1 * cg;
                }
            }
            for k in lo..=hi {
                h[(k, k)] += mu;
            }
        }
        // clean the strict lower triangle
        for i in 0..n {
            for j in 0..i {
                h[(i, j)] = Complex64::zero();
            }
        }
        Ok((q, h))
    }

    /// Eigenvalues of a general square matrix (diagonal of the Schur factor).
    pub fn eigenvalues(&self) -> Result<Vec<Complex64>> {
        let (_, t) = self.schur()?;
        Ok((0..self.rows).map(|k| t[(k, k)]).collect())
    }

    /// Householder reduction to upper Hessenberg form: self = Q H Q*.
    fn hessenberg(&self) -> (CMatrix, CMatrix) {
        let n = self.rows;
        let mut h = self.clone();
        let mut q = CMatrix::identity(n);
        for k in 0..n.saturating_sub(2) {
            // build the reflector for column k below the subdiagonal
            let mut norm2 = 0.0;
            for i in k + 1..n {
                norm2 += h[(i, k)].norm_sqr();
            }
            let norm = norm2.sqrt();
            if norm <= EPS * h.fro_norm().max(1e-300) {
                continue;
            }
            let x0 = h[(k + 1, k)];
            let phase = if x0.is_zero() { Complex64::new(1.0, 0.0) } else { x0 / x0.norm() };
            let alpha = -phase * norm;
            let mut v: Vec<Complex64> = (k + 1..n).map(|i| h[(i, k)]).collect();
            v[0] -= alpha;
            let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if vnorm <= EPS * norm {
                continue;
            }
            for z in v.iter_mut() {
                *z /= vnorm;
            }
            // H <- P H P with P = I - 2 v v* acting on rows/cols k+1..
            // left: rows
            for j in 0..n {
                let mut dot = Complex64::zero();
                for (idx, i) in (k + 1..n).enumerate() {
                    dot += v[idx].conj() * h[(i, j)];
                }
                let dot = dot * 2.0;
                for (idx, i) in (k + 1..n).enumerate() {
                    let sub = v[idx] * dot;
                    h[(i, j)] -= sub;
                }
            }
            // right: cols
            for i in 0..n {
                let mut dot = Complex64::zero();
                for (idx, j) in (k + 1..n).enumerate() {
                    dot += h[(i, j)] * v[idx];
                }
                let dot = dot * 2.0;
                for (idx, j) in (k + 1..n).enumerate() {
                    let sub = dot * v[idx].conj();
                    h[(i, j)] -= sub;
                }
            }
            // accumulate Q <- Q P
            for i in 0..n {
                let mut dot = Complex64::zero();
                for (idx, j) in (k + 1..n).enumerate() {
                    dot += q[(i, j)] * v[idx];
                }
                let dot = dot * 2.0;
                for (idx, j) in (k + 1..n).enumerate() {
                    let sub = dot * v[idx].conj();
                    q[(i, j)] -= sub;
                }
            }
            // zero below the subdiagonal explicitly
            for i in k + 2..n {
                h[(i, k)] = Complex64::zero();
            }
        }
        (h, q)
    }
}

fn swap(m: &mut CMatrix, r1: usize, r2: usize, col: usize) {
    let a = m[(r1, col)];
    m[(r1, col)] = m[(r2, col)];
    m[(r2, col)] = a;
}

/// Complex Givens rotation: returns (c real, s) with
/// [[c, s], [-conj(s), c]] * (f, g)^T = (r, 0)^T.
fn givens(f: Complex64, g: Complex64) -> (f64, Complex64) {
    if g.is_zero() {
        return (1.0, Complex64::zero());
    }
    if f.is_zero() {
        return (0.0, g.conj() / g.norm());
    }
    let h = (f.norm_sqr() + g.norm_sqr()).sqrt();
    let c = f.norm() / h;
    let s = (f / f.norm()) * g.conj() / h;
    (c, s)
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Display for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            write!(f, "[")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, " {:+.4}{:+.4}i", z.re, z.im)?;
            }
            writeln!(f, " ]")?;
        }
        Ok(())
    }
}

trait ScaleBy {
    fn scale_by(self, f: f64) -> Self;
}
impl ScaleBy for Complex64 {
    fn scale_by(self, f: f64) -> Self {
        self * f
    }
}
