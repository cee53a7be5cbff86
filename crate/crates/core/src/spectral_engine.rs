//! Eigenvalue counting, low-lying eigenpairs, off-diagonal resolvent blocks
//! and the compressed-indicator Gram constant.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid_operator::DiscreteHamiltonian;
use crate::linalg::band::Ldlt;
use crate::linalg::dense::{symmetric_eigen, tridiagonal_eigen};
use crate::linalg::lanczos::{lowest_eigenpairs, LanczosOptions};
use crate::linalg::{axpy, dot, norm};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    Dense,
    Lanczos,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MethodChoice {
    #[default]
    Auto,
    Dense,
    Lanczos,
}

#[derive(Debug, Clone, Copy)]
pub struct EigenOptions {
    pub want_vectors: bool,
    pub method: MethodChoice,
    /// Largest dimension handled by the dense path under `Auto`.
    pub dense_limit: usize,
    pub lanczos: LanczosOptions,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            want_vectors: false,
            method: MethodChoice::Auto,
            dense_limit: 2000,
            lanczos: LanczosOptions::default(),
        }
    }
}

impl EigenOptions {
    pub fn with_vectors() -> Self {
        EigenOptions { want_vectors: true, ..Default::default() }
    }
}

#[derive(Debug, Clone)]
pub struct EigenResult<T> {
    pub eigenvalues: Vec<T>,
    pub eigenvectors: Option<Vec<Vec<T>>>,
    pub method: Method,
    /// Bound on `‖Hv − λv‖ / ‖H‖` for the returned pairs.
    pub residual_bound: T,
    /// Count of eigenvalues `≤ e_max` from the inertia of `H − e_max`.
    pub inertia_count: usize,
}

/// Closed energy window `[center − half_width, center + half_width]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralWindow<T> {
    pub center: T,
    pub half_width: T,
}

impl<T: Real> SpectralWindow<T> {
    pub fn new(center: T, half_width: T) -> Result<Self> {
        if !(half_width > T::zero()) || !half_width.is_finite() || !center.is_finite() {
            return Err(Error::Precondition(format!(
                "spectral window needs a finite positive half-width, got {half_width}"
            )));
        }
        Ok(SpectralWindow { center, half_width })
    }

    pub fn lower(&self) -> T {
        self.center - self.half_width
    }

    pub fn upper(&self) -> T {
        self.center + self.half_width
    }
}

/// Outward displacement applied to window endpoints.
pub fn endpoint_nudge<T: Real>(e: T) -> T {
    T::lit(1e-12).max(T::lit(4.0) * T::epsilon()) * e.abs().max(T::one())
}

fn factor_shifted<T: Real>(h: &DiscreteHamiltonian<T>, sigma: T) -> Ldlt<T> {
    h.to_band(sigma).ldlt()
}

/// Number of eigenvalues strictly below `sigma` (Sylvester inertia).
pub fn count_below<T: Real>(h: &DiscreteHamiltonian<T>, sigma: T) -> usize {
    factor_shifted(h, sigma).negative_count()
}

/// Number of eigenvalues `≤ e`, with the outward endpoint nudge.
pub fn count_at_most<T: Real>(h: &DiscreteHamiltonian<T>, e: T) -> usize {
    count_below(h, e + endpoint_nudge(e))
}

/// All eigenpairs with `λ ≤ e_max`.
pub fn eigs_below<T: Real>(
    h: &DiscreteHamiltonian<T>,
    e_max: T,
    opts: &EigenOptions,
) -> Result<EigenResult<T>> {
    if !e_max.is_finite() {
        return Err(Error::Precondition("e_max must be finite".into()));
    }
    let n = h.dim();
    let target = count_at_most(h, e_max);
    let method = match opts.method {
        MethodChoice::Dense => Method::Dense,
        MethodChoice::Lanczos => Method::Lanczos,
        MethodChoice::Auto if n <= opts.dense_limit => Method::Dense,
        MethodChoice::Auto => Method::Lanczos,
    };
    if target == 0 {
        return Ok(EigenResult {
            eigenvalues: vec![],
            eigenvectors: opts.want_vectors.then(Vec::new),
            method,
            residual_bound: T::zero(),
            inertia_count: 0,
        });
    }
    match method {
        Method::Dense => {
            let cutoff = e_max + endpoint_nudge(e_max);
            let (values, vectors) = match h.tridiagonal() {
                // few vectors of a long chain: QL values plus inverse iteration
                Some((d, e)) if opts.want_vectors && 4 * target < n => {
                    let eig = tridiagonal_eigen(d.clone(), e.clone(), false)?;
                    let found = eig.values.iter().take_while(|&&l| l < cutoff).count();
                    if found != target {
                        return Err(Error::CountMismatch { found, inertia: target });
                    }
                    let values = eig.values[..found].to_vec();
                    match inverse_iteration(h, &values) {
                        Some(v) => (values, Some(v)),
                        None => {
                            let eig = tridiagonal_eigen(d, e, true)?;
                            let mut v = eig.vectors.expect("requested");
                            v.truncate(found);
                            (eig.values[..found].to_vec(), Some(v))
                        }
                    }
                }
                tri => {
                    let eig = match tri {
                        Some((d, e)) => tridiagonal_eigen(d, e, opts.want_vectors)?,
                        None => symmetric_eigen(h.to_dense(), n, opts.want_vectors)?,
                    };
                    let found = eig.values.iter().take_while(|&&l| l < cutoff).count();
                    if found != target {
                        return Err(Error::CountMismatch { found, inertia: target });
                    }
                    let vectors = eig.vectors.map(|mut v| {
                        v.truncate(found);
                        v
                    });
                    (eig.values[..found].to_vec(), vectors)
                }
            };
            let residual_bound = match &vectors {
                Some(v) => max_residual(h, &values, v),
                None => T::from_usize_lossy(n.max(1)) * T::epsilon(),
            };
            Ok(EigenResult {
                eigenvalues: values,
                eigenvectors: vectors,
                method,
                residual_bound,
                inertia_count: target,
            })
        }
        Method::Lanczos => {
            let (lo, hi) = h.gershgorin();
            let sigma = lo - T::one().max((hi - lo) * T::lit(1e-3));
            let fact = factor_shifted(h, sigma);
            let out = lowest_eigenpairs(h, &fact, sigma, target, e_max + endpoint_nudge(e_max), opts.lanczos)?;
            if out.values.len() != target {
                return Err(Error::CountMismatch { found: out.values.len(), inertia: target });
            }
            Ok(EigenResult {
                eigenvalues: out.values,
                eigenvectors: opts.want_vectors.then_some(out.vectors),
                method,
                residual_bound: out.residual,
                inertia_count: target,
            })
        }
    }
}

/// Eigenvectors for accurately known eigenvalues; `None` if any residual
/// stays above the acceptance level.
fn inverse_iteration<T: Real>(h: &DiscreteHamiltonian<T>, values: &[T]) -> Option<Vec<Vec<T>>> {
    let n = h.dim();
    let hn = h.norm_bound().max(T::min_positive_value());
    let accept = T::lit(100.0) * T::epsilon().powf(T::lit(0.75));
    let mut rng = ChaCha8Rng::seed_from_u64(0x1f1f_0b0b);
    let mut out: Vec<Vec<T>> = Vec::with_capacity(values.len());
    for &lambda in values {
        let fact = factor_shifted(h, lambda + T::epsilon() * hn);
        let mut x: Vec<T> = (0..n).map(|_| T::lit(rng.gen_range(-1.0..1.0))).collect();
        for _ in 0..4 {
            fact.solve_in_place(&mut x);
            for _ in 0..2 {
                for v in &out {
                    let c = dot(v, &x);
                    axpy(-c, v, &mut x);
                }
            }
            let xn = norm(&x);
            if !(xn > T::zero()) || !xn.is_finite() {
                return None;
            }
            x.iter_mut().for_each(|xi| *xi = *xi / xn);
        }
        let mut r = h.apply_vec(&x);
        axpy(-lambda, &x, &mut r);
        if norm(&r) / hn > accept {
            return None;
        }
        out.push(x);
    }
    Some(out)
}

fn max_residual<T: Real>(h: &DiscreteHamiltonian<T>, values: &[T], vectors: &[Vec<T>]) -> T {
    let hn = h.norm_bound().max(T::min_positive_value());
    let mut worst = T::zero();
    for (l, v) in values.iter().zip(vectors) {
        let mut r = h.apply_vec(v);
        axpy(-*l, v, &mut r);
        worst = worst.max(norm(&r) / hn);
    }
    worst
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IntervalCount {
    pub count: usize,
    /// An eigenvalue sat within the nudge distance of an endpoint.
    pub nudged: bool,
}

/// Number of eigenvalues in the closed window.
pub fn count_in_interval<T: Real>(h: &DiscreteHamiltonian<T>, w: &SpectralWindow<T>) -> IntervalCount {
    let (a, b) = (w.lower(), w.upper());
    let (da, db) = (endpoint_nudge(a), endpoint_nudge(b));
    let upper = count_below(h, b + db);
    let lower = count_below(h, a - da);
    let nudged = count_below(h, b - db) != upper || count_below(h, a + da) != lower;
    IntervalCount { count: upper.saturating_sub(lower), nudged }
}

/// Closed-window count from a sorted list of eigenvalues that is complete
/// on the window.
pub fn count_sorted_in_window<T: Real>(sorted: &[T], w: &SpectralWindow<T>) -> usize {
    let (a, b) = (w.lower(), w.upper());
    let lo = a - endpoint_nudge(a);
    let hi = b + endpoint_nudge(b);
    let start = sorted.partition_point(|&x| x < lo);
    let end = sorted.partition_point(|&x| x < hi);
    end.saturating_sub(start)
}

/// Smallest eigenvalue by bisection on inertia counts, to relative accuracy
/// about `1e-13`.
pub fn lowest_eigenvalue<T: Real>(h: &DiscreteHamiltonian<T>) -> T {
    let (mut lo, mut hi) = h.gershgorin();
    let tol = T::lit(1e-13).max(T::lit(8.0) * T::epsilon());
    for _ in 0..200 {
        if hi - lo <= tol * hi.abs().max(lo.abs()).max(T::one()) {
            break;
        }
        let mid = T::lit(0.5) * (lo + hi);
        if count_below(h, mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    T::lit(0.5) * (lo + hi)
}

/// `dist(e, σ(H))` when it is at most `t_max`, by bisection on closed-window
/// counts; `None` when the window `[e − t_max, e + t_max]` is empty.
pub fn distance_to_spectrum<T: Real>(h: &DiscreteHamiltonian<T>, e: T, t_max: T) -> Result<Option<T>> {
    let occupied = |t: T| -> Result<bool> { Ok(count_in_interval(h, &SpectralWindow::new(e, t)?).count > 0) };
    if !occupied(t_max)? {
        return Ok(None);
    }
    let (mut lo, mut hi) = (T::zero(), t_max);
    for _ in 0..60 {
        let mid = T::lit(0.5) * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if occupied(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi))
}

/// Grid nodes whose positions lie in the closed box `[lower, upper]`.
pub fn nodes_in_box<T: Real>(h: &DiscreteHamiltonian<T>, lower: &[T], upper: &[T]) -> Vec<usize> {
    let b = h.boxspec();
    (0..h.dim())
        .filter(|&idx| {
            let p = b.position(idx);
            p.iter().zip(lower).zip(upper).all(|((&x, &lo), &hi)| x >= lo && x <= hi)
        })
        .collect()
}

/// Relative accuracy target of [`resolvent_block_norm`].
pub const RESOLVENT_RTOL: f64 = 1e-6;

/// `‖1_A (H − z)^{-1} 1_B‖` for disjoint node sets `a` and `b`.
pub fn resolvent_block_norm<T: Real>(
    h: &DiscreteHamiltonian<T>,
    z: T,
    a: &[usize],
    b: &[usize],
) -> Result<T> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Precondition("resolvent blocks must be non-empty".into()));
    }
    let mut in_a = vec![false; h.dim()];
    for &i in a {
        in_a[i] = true;
    }
    if b.iter().any(|&i| in_a[i]) {
        return Err(Error::Precondition("resolvent blocks A and B must be disjoint".into()));
    }
    let tol = T::lit(1e-10);
    if count_below(h, z - tol) != count_below(h, z + tol) {
        return Err(Error::Resonant { z: z.as_f64(), tol: 1e-10 });
    }
    let fact = factor_shifted(h, z);
    let solve = |rhs: &[T]| -> Vec<T> {
        let mut x = rhs.to_vec();
        fact.solve_in_place(&mut x);
        // one step of iterative refinement
        let mut r = h.apply_vec(&x);
        axpy(-z, &x.clone(), &mut r);
        for (ri, &bi) in r.iter_mut().zip(rhs) {
            *ri = bi - *ri;
        }
        fact.solve_in_place(&mut r);
        axpy(T::one(), &r, &mut x);
        x
    };

    let mut rng = ChaCha8Rng::seed_from_u64(0x7e50_1e17);
    let mut v = vec![T::zero(); h.dim()];
    for &i in b {
        v[i] = T::lit(rng.gen_range(0.5..1.5));
    }
    let vn = norm(&v);
    v.iter_mut().for_each(|x| *x = *x / vn);
    let mut estimate = T::zero();
    for _ in 0..2000 {
        let gv = solve(&v);
        let mut ga = vec![T::zero(); h.dim()];
        for &i in a {
            ga[i] = gv[i];
        }
        let next = norm(&ga);
        if next == T::zero() {
            return Ok(T::zero());
        }
        let w = solve(&ga);
        let mut wb = vec![T::zero(); h.dim()];
        for &i in b {
            wb[i] = w[i];
        }
        let wn = norm(&wb);
        if wn == T::zero() {
            return Ok(next);
        }
        let converged = (next - estimate).abs() <= T::lit(RESOLVENT_RTOL * 1e-2) * next;
        estimate = next;
        v = wb.into_iter().map(|x| x / wn).collect();
        if converged {
            return Ok(estimate);
        }
    }
    Ok(estimate)
}

/// Smallest eigenvalue of `G_mn = ⟨φ_m, 1_S φ_n⟩`.
///
/// `basis` holds Euclidean-orthonormal nodal vectors; with a uniform mesh the
/// cell-volume weights cancel, so `G` equals the Gram matrix in the
/// discrete `L²` inner product.
pub fn compressed_indicator_min_eig<T: Real>(basis: &[Vec<T>], mask: &[bool]) -> Result<T> {
    let k = basis.len();
    if k == 0 {
        return Err(Error::Precondition("spectral subspace is empty".into()));
    }
    let mut dev = T::zero();
    for i in 0..k {
        if basis[i].len() != mask.len() {
            return Err(Error::LengthMismatch { expected: mask.len(), got: basis[i].len() });
        }
        for j in 0..=i {
            let want = if i == j { T::one() } else { T::zero() };
            dev = dev.max((dot(&basis[i], &basis[j]) - want).abs());
        }
    }
    if dev > T::lit(1e-8) {
        return Err(Error::NotOrthonormal(dev.as_f64()));
    }
    let mut g = vec![T::zero(); k * k];
    for i in 0..k {
        for j in 0..=i {
            let s = basis[i]
                .iter()
                .zip(&basis[j])
                .zip(mask)
                .filter(|(_, &m)| m)
                .fold(T::zero(), |acc, ((&x, &y), _)| acc + x * y);
            g[i * k + j] = s;
            g[j * k + i] = s;
        }
    }
    let eig = symmetric_eigen(g, k, false)?;
    Ok(eig.values[0].max(T::zero()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_operator::{
        add_potential, build_free_laplacian, discrete_dirichlet_mode, BoxSpec, Boundary,
    };
    use std::f64::consts::PI;

    #[test]
    fn free_dirichlet_low_modes() {
        let b = BoxSpec::centered(1, PI, 500, Boundary::Dirichlet).unwrap();
        let h = build_free_laplacian(&b).unwrap();
        let r = eigs_below(&h, 10.0, &EigenOptions::default()).unwrap();
        assert_eq!(r.eigenvalues.len(), 3);
        for (l, want) in r.eigenvalues.iter().zip([1.0, 4.0, 9.0]) {
            assert!((l - want).abs() / want < 5e-3);
        }
        assert!(eigs_below(&h, 0.5, &EigenOptions::default()).unwrap().eigenvalues.is_empty());
    }

    #[test]
    fn diagonal_operator() {
        let b = BoxSpec::centered(1, 1.0, 8, Boundary::Dirichlet).unwrap();
        let v: Vec<f64> = (1..=8).rev().map(|x| x as f64).collect();
        let h = DiscreteHamiltonian::multiplication(&b, v).unwrap();
        let r = eigs_below(&h, 100.0, &EigenOptions::with_vectors()).unwrap();
        assert_eq!(r.eigenvalues, (1..=8).map(|x| x as f64).collect::<Vec<_>>());
    }

    #[test]
    fn interval_counts() {
        let b = BoxSpec::centered(1, PI, 400, Boundary::Dirichlet).unwrap();
        let h = build_free_laplacian(&b).unwrap();
        let w = SpectralWindow::new(2.5, 2.0).unwrap();
        assert_eq!(count_in_interval(&h, &w).count, 2);
        let w = SpectralWindow::new(0.4, 0.3).unwrap();
        assert_eq!(count_in_interval(&h, &w).count, 0);
        assert!(SpectralWindow::new(1.0, 0.0).is_err());
    }

    #[test]
    fn tiny_window_sees_multiplicity() {
        let b = BoxSpec::centered(2, 1.0, 20, Boundary::Dirichlet).unwrap();
        let h = build_free_laplacian(&b).unwrap();
        let hh = b.h();
        let l12 = discrete_dirichlet_mode(1.0, hh, 1) + discrete_dirichlet_mode(1.0, hh, 2);
        let c = count_in_interval(&h, &SpectralWindow::new(l12, 1e-6).unwrap());
        assert_eq!(c.count, 2);
        let l11 = 2.0 * discrete_dirichlet_mode(1.0, hh, 1);
        let c = count_in_interval(&h, &SpectralWindow::new(l11, 1e-6).unwrap());
        assert_eq!(c.count, 1);
    }

    #[test]
    fn endpoint_on_eigenvalue_is_included() {
        let b = BoxSpec::centered(1, 1.0, 3, Boundary::Dirichlet).unwrap();
        let h = DiscreteHamiltonian::multiplication(&b, vec![1.0, 2.0, 3.0]).unwrap();
        let c = count_in_interval(&h, &SpectralWindow::new(1.5, 0.5).unwrap());
        assert_eq!(c, IntervalCount { count: 2, nudged: true });
    }

    #[test]
    fn adjacent_windows_add_up() {
        let b = BoxSpec::centered(2, 2.0, 14, Boundary::Neumann).unwrap();
        let v: Vec<f64> = (0..b.dof()).map(|i| ((i * 37) % 11) as f64 / 11.0).collect();
        let h = add_potential(&build_free_laplacian(&b).unwrap(), &v).unwrap();
        let e_max = 40.0;
        let total = eigs_below(&h, e_max, &EigenOptions::default()).unwrap().eigenvalues.len();
        // half-open pieces [a, b) partition [-1, e_max]
        let cuts = [-1.0, 3.3, 10.0, 17.1, 25.0, e_max];
        let mut sum = 0;
        for w in cuts.windows(2) {
            sum += count_below(&h, w[1]) - count_below(&h, w[0]);
        }
        sum += count_at_most(&h, e_max) - count_below(&h, e_max);
        assert_eq!(sum, total);
    }

    #[test]
    fn dense_and_lanczos_agree() {
        let b = BoxSpec::centered(2, 1.0, 30, Boundary::Dirichlet).unwrap();
        let v: Vec<f64> = (0..b.dof()).map(|i| ((i * 7919) % 101) as f64 / 10.0).collect();
        for pot in [vec![0.0; b.dof()], v] {
            let h = add_potential(&build_free_laplacian(&b).unwrap(), &pot).unwrap();
            let opts = EigenOptions { method: MethodChoice::Dense, ..EigenOptions::with_vectors() };
            let dense = eigs_below(&h, 260.0, &opts).unwrap();
            let opts = EigenOptions { method: MethodChoice::Lanczos, ..EigenOptions::with_vectors() };
            let lanczos = eigs_below(&h, 260.0, &opts).unwrap();
            assert_eq!(lanczos.method, Method::Lanczos);
            assert_eq!(dense.eigenvalues.len(), lanczos.eigenvalues.len());
            assert!(dense.eigenvalues.len() >= 8);
            for (p, q) in dense.eigenvalues.iter().zip(&lanczos.eigenvalues) {
                assert!((p - q).abs() <= 1e-8 * p.abs(), "{p} vs {q}");
            }
            let vecs = lanczos.eigenvectors.unwrap();
            for i in 0..vecs.len() {
                for j in 0..=i {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((dot(&vecs[i], &vecs[j]) - want).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn diagonal_resolvent_has_no_off_diagonal_block() {
        let b = BoxSpec::centered(1, 1.0, 10, Boundary::Dirichlet).unwrap();
        let h = DiscreteHamiltonian::multiplication(&b, vec![2.0; 10]).unwrap();
        let n = resolvent_block_norm(&h, -1.0, &[0, 1], &[8, 9]).unwrap();
        assert_eq!(n, 0.0);
        assert!(matches!(
            resolvent_block_norm(&h, -1.0, &[0, 1], &[1, 2]),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(resolvent_block_norm(&h, 2.0, &[0], &[9]), Err(Error::Resonant { .. })));
    }

    #[test]
    fn resolvent_matches_dense_inverse() {
        let b = BoxSpec::centered(1, 4.0, 30, Boundary::Dirichlet).unwrap();
        let v: Vec<f64> = (0..30).map(|i| ((i * 13) % 7) as f64 / 3.0).collect();
        let h = add_potential(&build_free_laplacian(&b).unwrap(), &v).unwrap();
        let z = 0.37;
        let a: Vec<usize> = (0..5).collect();
        let bb: Vec<usize> = (25..30).collect();
        let got = resolvent_block_norm(&h, z, &a, &bb).unwrap();
        // oracle: spectral sum for the block, then its largest singular value
        let eig = symmetric_eigen(h.to_dense(), 30, true).unwrap();
        let vecs = eig.vectors.unwrap();
        let mut blk = vec![0.0; 25];
        for (l, phi) in eig.values.iter().zip(&vecs) {
            for (r, &i) in a.iter().enumerate() {
                for (c, &j) in bb.iter().enumerate() {
                    blk[r * 5 + c] += phi[i] * phi[j] / (l - z);
                }
            }
        }
        let mut gram = vec![0.0; 25];
        for i in 0..5 {
            for j in 0..5 {
                gram[i * 5 + j] = (0..5).map(|k| blk[k * 5 + i] * blk[k * 5 + j]).sum();
            }
        }
        let top = symmetric_eigen(gram, 5, false).unwrap().values[4].sqrt();
        assert!((got - top).abs() <= 1e-6 * top, "{got} vs {top}");
    }

    #[test]
    fn resolvent_decays_with_length() {
        let mut prev = f64::INFINITY;
        for side in [4.0, 8.0] {
            let b = BoxSpec::with_mesh(1, side, vec![0.0], 8, Boundary::Dirichlet).unwrap();
            let h = build_free_laplacian(&b).unwrap();
            let q = side / 4.0;
            let a = nodes_in_box(&h, &[-side / 2.0], &[-side / 2.0 + q]);
            let bb = nodes_in_box(&h, &[side / 2.0 - q], &[side / 2.0]);
            let n = resolvent_block_norm(&h, -1.0, &a, &bb).unwrap();
            assert!(n < prev);
            prev = n;
        }
    }

    #[test]
    fn gram_trivial_cases() {
        let b = BoxSpec::centered(1, 1.0, 50, Boundary::Dirichlet).unwrap();
        let h = build_free_laplacian(&b).unwrap();
        let r = eigs_below(&h, 200.0, &EigenOptions::with_vectors()).unwrap();
        let basis = r.eigenvectors.unwrap();
        let full: f64 = compressed_indicator_min_eig(&basis, &vec![true; 50]).unwrap();
        assert!((full - 1.0).abs() < 1e-10);
        let empty = compressed_indicator_min_eig(&basis, &vec![false; 50]).unwrap();
        assert_eq!(empty, 0.0);
        let mut bad = basis.clone();
        bad[0][0] += 1e-3;
        assert!(matches!(
            compressed_indicator_min_eig(&bad, &vec![true; 50]),
            Err(Error::NotOrthonormal(_))
        ));
    }

    #[test]
    fn gram_two_sine_modes_on_half_interval() {
        // Oracle from the sine integrals:
        //   2∫₀^{1/2} sin²(kπx) dx = 1/2,  2∫₀^{1/2} sin(πx) sin(2πx) dx = 4/(3π).
        let oracle = 0.5 - 4.0 / (3.0 * PI);
        let n = 999;
        let b = BoxSpec::new(1, 1.0, vec![0.5], n, Boundary::Dirichlet).unwrap();
        let h = build_free_laplacian(&b).unwrap();
        let r = eigs_below(&h, 45.0, &EigenOptions::with_vectors()).unwrap();
        let basis = r.eigenvectors.unwrap();
        assert_eq!(basis.len(), 2);
        let mask: Vec<bool> = (0..n).map(|i| b.coord(0, i) <= 0.5).collect();
        let got = compressed_indicator_min_eig(&basis, &mask).unwrap();
        assert!((got - oracle).abs() < 5e-3, "{got} vs {oracle}");
    }

    #[test]
    fn gram_monotone_in_set() {
        let b = BoxSpec::new(1, 2.0, vec![1.0], 120, Boundary::Dirichlet).unwrap();
        let h = build_free_laplacian(&b).unwrap();
        let basis = eigs_below(&h, 60.0, &EigenOptions::with_vectors()).unwrap().eigenvectors.unwrap();
        let small: Vec<bool> = (0..120).map(|i| (i / 10) % 3 == 0).collect();
        let big: Vec<bool> = (0..120).map(|i| (i / 10) % 3 != 1).collect();
        let (a, c) = (
            compressed_indicator_min_eig(&basis, &small).unwrap(),
            compressed_indicator_min_eig(&basis, &big).unwrap(),
        );
        assert!(a <= c);
        let mean_diag: f64 = basis
            .iter()
            .map(|v| v.iter().zip(&small).filter(|(_, &m)| m).map(|(x, _)| x * x).sum::<f64>())
            .sum::<f64>()
            / basis.len() as f64;
        assert!(a >= 0.0 && a <= mean_diag + 1e-12);
    }

    #[test]
    fn lowest_and_distance() {
        let b = BoxSpec::<f64>::centered(1, std::f64::consts::PI, 199, Boundary::Dirichlet).unwrap();
        let h = build_free_laplacian(&b).unwrap();
        let e1 = discrete_dirichlet_mode(std::f64::consts::PI, b.h(), 1);
        assert!((lowest_eigenvalue(&h) - e1).abs() < 1e-11);
        let e2 = discrete_dirichlet_mode(std::f64::consts::PI, b.h(), 2);
        let d = distance_to_spectrum(&h, 2.0, 1.5).unwrap().unwrap();
        assert!((d - (2.0 - e1).min(e2 - 2.0)).abs() < 1e-9);
        assert!(distance_to_spectrum(&h, 2.0, 0.5).unwrap().is_none());
    }
}
