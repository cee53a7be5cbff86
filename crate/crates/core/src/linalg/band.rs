//! Symmetric band matrices and their unpivoted `LDLᵀ` factorization.
//!
//! The number of negative pivots of `A - σI` equals the number of
//! eigenvalues of `A` below `σ` (Sylvester's law of inertia).

use crate::scalar::Real;

/// Lower band of a symmetric matrix: entries `(i, j)` with `i - b ≤ j ≤ i`.
#[derive(Debug, Clone)]
pub struct SymBand<T> {
    n: usize,
    b: usize,
    data: Vec<T>,
}

impl<T: Real> SymBand<T> {
    pub fn zeros(n: usize, b: usize) -> Self {
        let b = b.min(n.saturating_sub(1));
        SymBand { n, b, data: vec![T::zero(); n * (b + 1)] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.b
    }

    #[inline]
    fn pos(&self, i: usize, j: usize) -> usize {
        debug_assert!(j <= i && i - j <= self.b);
        i * (self.b + 1) + self.b - (i - j)
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let (i, j) = if j > i { (j, i) } else { (i, j) };
        if i - j > self.b {
            T::zero()
        } else {
            self.data[self.pos(i, j)]
        }
    }

    /// Adds `v` to entry `(i, j)`, `j ≤ i`.
    pub fn add(&mut self, i: usize, j: usize, v: T) {
        let p = self.pos(i, j);
        self.data[p] = self.data[p] + v;
    }

    /// Unpivoted `LDLᵀ`. Pivots smaller than `pivmin` in magnitude are
    /// replaced by `-pivmin`, which keeps the inertia count well defined when
    /// the shift sits on an eigenvalue.
    pub fn ldlt(&self) -> Ldlt<T> {
        let (n, b) = (self.n, self.b);
        let scale = self.data.iter().fold(T::zero(), |m, x| m.max(x.abs())).max(T::min_positive_value());
        let pivmin = scale * T::epsilon() * T::epsilon();
        let mut l = self.data.clone();
        let mut d = vec![T::zero(); n];
        let mut tiny = 0usize;
        let w = b + 1;
        // row-oriented: l[i, j] = (a[i, j] - Σ_k l[i,k] d[k] l[j,k]) / d[j]
        let mut work = vec![T::zero(); w];
        for i in 0..n {
            let j0 = i.saturating_sub(b);
            for j in j0..i {
                let mut s = l[i * w + b - (i - j)];
                let k0 = j0.max(j.saturating_sub(b));
                for k in k0..j {
                    s = s - work[k - j0] * l[j * w + b - (j - k)];
                }
                // work holds l[i,k]·d[k]
                work[j - j0] = s;
                l[i * w + b - (i - j)] = s / d[j];
            }
            let mut dii = l[i * w + b];
            for k in j0..i {
                dii = dii - work[k - j0] * l[i * w + b - (i - k)];
            }
            if dii.abs() < pivmin {
                dii = -pivmin;
                tiny += 1;
            }
            d[i] = dii;
            l[i * w + b] = T::one();
        }
        Ldlt { n, b, l, d, tiny_pivots: tiny }
    }
}

#[derive(Debug, Clone)]
pub struct Ldlt<T> {
    n: usize,
    b: usize,
    l: Vec<T>,
    d: Vec<T>,
    tiny_pivots: usize,
}

impl<T: Real> Ldlt<T> {
    /// Number of negative pivots.
    pub fn negative_count(&self) -> usize {
        self.d.iter().filter(|&&x| x < T::zero()).count()
    }

    /// Pivots that had to be perturbed.
    pub fn tiny_pivots(&self) -> usize {
        self.tiny_pivots
    }

    pub fn pivots(&self) -> &[T] {
        &self.d
    }

    /// Solves `A x = rhs` in place.
    pub fn solve_in_place(&self, x: &mut [T]) {
        let (n, b) = (self.n, self.b);
        let w = b + 1;
        for i in 0..n {
            let j0 = i.saturating_sub(b);
            let mut s = x[i];
            for j in j0..i {
                s = s - self.l[i * w + b - (i - j)] * x[j];
            }
            x[i] = s;
        }
        for i in 0..n {
            x[i] = x[i] / self.d[i];
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in (i + 1)..n.min(i + b + 1) {
                s = s - self.l[k * w + b - (k - i)] * x[k];
            }
            x[i] = s;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_band(n: usize, b: usize, seed: u64) -> SymBand<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = SymBand::zeros(n, b);
        for i in 0..n {
            for j in i.saturating_sub(b)..=i {
                m.add(i, j, rng.gen_range(-1.0..1.0));
            }
            m.add(i, i, 4.0 * b as f64);
        }
        m
    }

    fn matvec(m: &SymBand<f64>, x: &[f64]) -> Vec<f64> {
        (0..m.dim())
            .map(|i| (0..m.dim()).map(|j| m.get(i, j) * x[j]).sum())
            .collect()
    }

    #[test]
    fn solve_recovers_rhs() {
        for (n, b) in [(1, 0), (5, 1), (20, 3), (30, 29)] {
            let m = random_band(n, b, n as u64);
            let x: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
            let rhs = matvec(&m, &x);
            let mut sol = rhs.clone();
            m.ldlt().solve_in_place(&mut sol);
            for (p, q) in sol.iter().zip(&x) {
                assert!((p - q).abs() < 1e-12, "n={n} b={b}");
            }
        }
    }

    #[test]
    fn inertia_counts_eigenvalues() {
        let n = 40;
        let mut m = SymBand::zeros(n, 1);
        for i in 0..n {
            m.add(i, i, 2.0);
            if i > 0 {
                m.add(i, i - 1, -1.0);
            }
        }
        let eig: Vec<f64> = (1..=n)
            .map(|k| 2.0 - 2.0 * (k as f64 * std::f64::consts::PI / (n + 1) as f64).cos())
            .collect();
        for sigma in [-0.5, 0.1, 1.0, 2.0, 3.3, 5.0] {
            let mut s = m.clone();
            for i in 0..n {
                s.add(i, i, -sigma);
            }
            let want = eig.iter().filter(|&&e| e < sigma).count();
            assert_eq!(s.ldlt().negative_count(), want, "sigma={sigma}");
        }
    }
}
