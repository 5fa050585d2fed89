use std::fmt;

use nalgebra::{DMatrix, Schur};

use crate::scalar::Scalar;

/// Dense square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(n: usize) -> Self {
        Matrix { n, data: vec![T::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, T::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "matrix must be square");
        Matrix { n, data: rows.into_iter().flatten().collect() }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| v.is_zero())
    }

    pub fn is_nonneg(&self) -> bool {
        self.data.iter().all(|v| !v.is_negative_value())
    }

    pub fn sub(&self, other: &Self) -> Self {
        Matrix { n: self.n, data: self.data.iter().zip(&other.data).map(|(a, b)| a.clone() - b.clone()).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let v = out.get(i, j).clone() + a.clone() * other.get(k, j).clone();
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    /// Gauss–Jordan inverse with largest-magnitude pivoting; `None` if singular.
    pub fn inverse(&self) -> Option<Self> {
        let n = self.n;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let pivot = (col..n)
                .filter(|&r| !a.get(r, col).is_zero())
                .max_by(|&r, &s| a.get(r, col).abs().partial_cmp(&a.get(s, col).abs()).unwrap())?;
            a.swap_rows(col, pivot);
            inv.swap_rows(col, pivot);
            let p = a.get(col, col).clone();
            for j in 0..n {
                a.set(col, j, a.get(col, j).clone() / p.clone());
                inv.set(col, j, inv.get(col, j).clone() / p.clone());
            }
            for r in 0..n {
                if r == col || a.get(r, col).is_zero() {
                    continue;
                }
                let f = a.get(r, col).clone();
                for j in 0..n {
                    a.set(r, j, a.get(r, j).clone() - f.clone() * a.get(col, j).clone());
                    inv.set(r, j, inv.get(r, j).clone() - f.clone() * inv.get(col, j).clone());
                }
            }
        }
        Some(inv)
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for c in 0..self.n {
            self.data.swap(i * self.n + c, j * self.n + c);
        }
    }

    /// Floating-point spectral radius; advisory only.
    pub fn spectral_radius_estimate(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        let m = DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j).to_f64().unwrap_or(f64::NAN));
        match Schur::try_new(m.clone(), f64::EPSILON, 10_000) {
            Some(schur) => schur.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max),
            None => gelfand_estimate(m),
        }
    }
}

// ‖M^(2^k)‖^(1/2^k) with renormalization, for when the QR sweep stalls.
fn gelfand_estimate(mut m: DMatrix<f64>) -> f64 {
    let mut log_scale = 0.0;
    let mut power = 1.0;
    for _ in 0..40 {
        let norm = m.amax();
        if norm == 0.0 || !norm.is_finite() {
            return 0.0;
        }
        m /= norm;
        log_scale += norm.ln() / power;
        m = &m * &m;
        power *= 2.0;
    }
    (log_scale + m.amax().max(f64::MIN_POSITIVE).ln() / power).exp()
}

impl<T: Scalar> fmt::Display for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = (0..self.n)
            .map(|i| {
                let r: Vec<String> = self.row(i).iter().map(|v| v.to_string()).collect();
                format!("({})", r.join(","))
            })
            .collect();
        write!(f, "({})", rows.join(","))
    }
}

/// Outcome of testing `(I − M)⁻¹ ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub enum NeumannVerdict<T> {
    NonnegInverse(Matrix<T>),
    Singular,
    NegativeEntries(Matrix<T>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct NeumannReport<T> {
    pub verdict: NeumannVerdict<T>,
    /// Floating estimate of the spectral radius of `M`.
    pub advisory_radius: f64,
}

/// Exact test whether `I − M` has an entrywise non-negative inverse.
pub fn neumann_check<T: Scalar>(m: &Matrix<T>) -> NeumannReport<T> {
    let advisory_radius = m.spectral_radius_estimate();
    let verdict = match Matrix::identity(m.size()).sub(m).inverse() {
        None => NeumannVerdict::Singular,
        Some(inv) if inv.is_nonneg() => NeumannVerdict::NonnegInverse(inv),
        Some(inv) => NeumannVerdict::NegativeEntries(inv),
    };
    NeumannReport { verdict, advisory_radius }
}
