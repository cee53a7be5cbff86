//! Single-site coupling distributions and their concentration modulus.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Law of one coupling constant. All kinds are bounded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Distribution {
    Uniform { lo: f64, hi: f64 },
    /// Two atoms; `p` is the mass at `v0`.
    Bernoulli { v0: f64, v1: f64, p: f64 },
    /// Distribution function `(x / hi)^alpha` on `[0, hi]`.
    PowerHolder { hi: f64, alpha: f64 },
}

impl Distribution {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidDistribution(m));
        match *self {
            Distribution::Uniform { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                    return bad(format!("uniform needs lo < hi, got [{lo}, {hi}]"));
                }
            }
            Distribution::Bernoulli { v0, v1, p } => {
                if !(v0.is_finite() && v1.is_finite()) || v0 == v1 {
                    return bad(format!("bernoulli atoms must be distinct, got {v0} and {v1}"));
                }
                if !(p > 0.0 && p < 1.0) {
                    return bad(format!("bernoulli weight must lie in (0, 1), got {p}"));
                }
            }
            Distribution::PowerHolder { hi, alpha } => {
                if !(hi > 0.0 && hi.is_finite() && alpha > 0.0 && alpha.is_finite()) {
                    return bad(format!("power law needs hi > 0 and alpha > 0, got {hi}, {alpha}"));
                }
            }
        }
        Ok(())
    }

    pub fn min_support(&self) -> f64 {
        match *self {
            Distribution::Uniform { lo, .. } => lo,
            Distribution::Bernoulli { v0, v1, .. } => v0.min(v1),
            Distribution::PowerHolder { .. } => 0.0,
        }
    }

    pub fn max_support(&self) -> f64 {
        match *self {
            Distribution::Uniform { hi, .. } => hi,
            Distribution::Bernoulli { v0, v1, .. } => v0.max(v1),
            Distribution::PowerHolder { hi, .. } => hi,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.gen();
        self.quantile(u)
    }

    fn quantile(&self, u: f64) -> f64 {
        match *self {
            Distribution::Uniform { lo, hi } => lo + (hi - lo) * u,
            Distribution::Bernoulli { v0, v1, p } => {
                if u < p {
                    v0
                } else {
                    v1
                }
            }
            Distribution::PowerHolder { hi, alpha } => hi * u.powf(1.0 / alpha),
        }
    }

    fn cdf(&self, x: f64) -> f64 {
        match *self {
            Distribution::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
            Distribution::Bernoulli { v0, v1, p } => {
                let mut m = 0.0;
                if v0 <= x {
                    m += p;
                }
                if v1 <= x {
                    m += 1.0 - p;
                }
                m
            }
            Distribution::PowerHolder { hi, alpha } => (x.clamp(0.0, hi) / hi).powf(alpha),
        }
    }

    /// Sample conditioned on the coupling being at most `t`.
    pub fn sample_at_most<R: Rng + ?Sized>(&self, rng: &mut R, t: f64) -> Result<f64> {
        let mass = self.cdf(t);
        if mass <= 0.0 {
            return Err(Error::InvalidDistribution(format!("no mass at or below {t}")));
        }
        let u: f64 = rng.gen();
        Ok(match *self {
            Distribution::Bernoulli { v0, v1, .. } => {
                let lo = v0.min(v1);
                if t >= v0.max(v1) {
                    self.quantile(u)
                } else {
                    lo
                }
            }
            _ => self.quantile(u * mass).min(t),
        })
    }

    /// `μ([a, b])`.
    pub fn interval_mass(&self, a: f64, b: f64) -> f64 {
        if b < a {
            return 0.0;
        }
        match *self {
            Distribution::Bernoulli { v0, v1, p } => {
                let mut m = 0.0;
                if (a..=b).contains(&v0) {
                    m += p;
                }
                if (a..=b).contains(&v1) {
                    m += 1.0 - p;
                }
                m
            }
            // atomless: closed and half-open intervals carry the same mass
            _ => self.cdf(b) - self.cdf(a),
        }
    }

    /// `sup_E μ([E − ε/2, E + ε/2])`.
    pub fn modulus(&self, eps: f64) -> f64 {
        let eps = eps.max(0.0);
        match *self {
            Distribution::Uniform { lo, hi } => (eps / (hi - lo)).min(1.0),
            Distribution::Bernoulli { v0, v1, p } => {
                if eps >= (v1 - v0).abs() {
                    1.0
                } else {
                    p.max(1.0 - p)
                }
            }
            // the density x^{α-1} is monotone, so the heaviest window sits at
            // the left end for α ≤ 1 and at the right end otherwise
            Distribution::PowerHolder { hi, alpha } => {
                if eps >= hi {
                    1.0
                } else if alpha <= 1.0 {
                    self.cdf(eps)
                } else {
                    1.0 - self.cdf(hi - eps)
                }
            }
        }
    }
}

/// `s(ε) = sup_j sup_E μ_j([E − ε/2, E + ε/2])` over a family.
pub fn modulus_s<'a>(dists: impl IntoIterator<Item = &'a Distribution>, eps: f64) -> f64 {
    dists.into_iter().map(|d| d.modulus(eps)).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn kinds() -> Vec<Distribution> {
        vec![
            Distribution::Uniform { lo: 0.0, hi: 1.0 },
            Distribution::Uniform { lo: -2.0, hi: 3.0 },
            Distribution::Bernoulli { v0: 0.0, v1: 1.0, p: 0.3 },
            Distribution::Bernoulli { v0: 2.0, v1: -1.0, p: 0.6 },
            Distribution::PowerHolder { hi: 1.0, alpha: 0.5 },
            Distribution::PowerHolder { hi: 2.0, alpha: 3.0 },
        ]
    }

    #[test]
    fn examples() {
        let u = Distribution::Uniform { lo: 0.0, hi: 1.0 };
        assert!((u.modulus(0.1) - 0.1).abs() < 1e-15);
        let b = Distribution::Bernoulli { v0: 0.0, v1: 1.0, p: 0.3 };
        assert_eq!(b.modulus(0.5), 0.7);
        assert_eq!(b.modulus(1.0), 1.0);
        assert_eq!(u.modulus(0.0), 0.0);
        assert_eq!(Distribution::PowerHolder { hi: 1.0, alpha: 2.0 }.modulus(0.0), 0.0);
        assert_eq!(modulus_s(&[u, b], 0.2), 0.7);
        assert!(Distribution::Bernoulli { v0: 1.0, v1: 1.0, p: 0.5 }.validate().is_err());
        assert!(Distribution::Uniform { lo: 1.0, hi: 1.0 }.validate().is_err());
    }

    #[test]
    fn total_mass_and_support() {
        for d in kinds() {
            d.validate().unwrap();
            let m = d.interval_mass(d.min_support(), d.max_support());
            assert!((m - 1.0).abs() < 1e-12, "{d:?}");
            assert!(d.modulus(d.max_support() - d.min_support()) > 1.0 - 1e-12);
        }
    }

    #[test]
    fn interval_mass_matches_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 100_000;
        for d in kinds() {
            let (lo, hi) = (d.min_support(), d.max_support());
            let (a, b) = (lo + 0.2 * (hi - lo), lo + 0.7 * (hi - lo));
            let p = d.interval_mass(a, b);
            let hits = (0..n).filter(|_| (a..=b).contains(&d.sample(&mut rng))).count();
            let se = (p * (1.0 - p) / n as f64).sqrt().max(1.0 / n as f64);
            assert!((hits as f64 / n as f64 - p).abs() <= 3.0 * se, "{d:?}");
        }
    }

    #[test]
    fn conditioned_samples_respect_threshold() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for d in kinds() {
            let t = d.min_support() + 0.01 * (d.max_support() - d.min_support());
            for _ in 0..200 {
                let x = d.sample_at_most(&mut rng, t).unwrap();
                assert!(x <= t && x >= d.min_support());
            }
        }
        let u = Distribution::Uniform { lo: 0.0, hi: 1.0 };
        assert!(u.sample_at_most(&mut rng, -1.0).is_err());
    }

    proptest! {
        #[test]
        fn modulus_monotone_and_dominates_windows(k in 0usize..6, e1 in 0.0f64..3.0, e2 in 0.0f64..3.0, c in -3.0f64..4.0) {
            let d = kinds()[k];
            let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
            prop_assert!(d.modulus(lo) <= d.modulus(hi) + 1e-15);
            prop_assert!(d.interval_mass(c - hi / 2.0, c + hi / 2.0) <= d.modulus(hi) + 1e-12);
        }
    }
}
