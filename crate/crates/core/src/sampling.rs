//! Deterministic parameter sampling for randomized identity checks.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::theta::{lattice_distance, BasePair, Nome};

/// Smallest relative lattice distance accepted for a theta argument that
/// ends up in a denominator or in a node pair.
pub const ADMISSIBLE_GAP: f64 = 0.02;

/// Ranges for the nome, the base, and free parameters, with optional fixed
/// values for `p` and `q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerConfig {
    pub p_abs: (f64, f64),
    pub q_abs: (f64, f64),
    pub p: Option<Complex64>,
    pub q: Option<Complex64>,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self { p_abs: (0.02, 0.5), q_abs: (0.1, 0.9), p: None, q: None }
    }
}

impl SamplerConfig {
    /// Validates the ranges and any fixed nome or base.
    pub fn validate(&self) -> Result<()> {
        if let Some(p) = self.p {
            Nome::new(p)?;
        }
        if let Some(q) = self.q {
            if q == Complex64::new(0.0, 0.0) || !q.norm().is_finite() {
                return Err(Error::InvalidArgument(format!("q must be finite and nonzero (got {q})")));
            }
        }
        let ok = |(lo, hi): (f64, f64), cap: f64| lo > 0.0 && lo <= hi && hi < cap;
        if !ok(self.p_abs, 1.0) || !ok(self.q_abs, f64::INFINITY) {
            return Err(Error::InvalidArgument("sampling ranges must satisfy 0 < lo <= hi (and |p| < 1)".into()));
        }
        Ok(())
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// FNV-1a hash of a case id, stable across platforms and releases.
pub fn id_hash(id: &str) -> u64 {
    id.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// Generator for one `(seed, case, trial, attempt)` cell. Cells are
/// independent so trials can run in any order.
pub fn cell_rng(seed: u64, case: &str, trial: u64, attempt: u64) -> ChaCha8Rng {
    let mut s = splitmix64(seed);
    for v in [id_hash(case), trial, attempt] {
        s = splitmix64(s ^ v);
    }
    ChaCha8Rng::seed_from_u64(s)
}

/// Draws parameters for a single attempt.
pub struct Sampler {
    rng: ChaCha8Rng,
    cfg: SamplerConfig,
}

impl Sampler {
    pub fn new(rng: ChaCha8Rng, cfg: SamplerConfig) -> Self {
        Self { rng, cfg }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn size(&mut self, lo: usize, hi: usize) -> usize {
        self.rng.gen_range(lo..=hi)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.gen_range(lo..hi)
    }

    fn polar(&mut self, (lo, hi): (f64, f64)) -> Complex64 {
        let r = if lo == hi { lo } else { lo * (hi / lo).powf(self.rng.gen::<f64>()) };
        Complex64::from_polar(r, self.rng.gen_range(0.0..TAU))
    }

    /// Complex nome with log-uniform magnitude and uniform phase.
    pub fn nome(&mut self) -> Result<Nome> {
        match self.cfg.p {
            Some(p) => Nome::new(p),
            None => Nome::new(self.polar(self.cfg.p_abs)),
        }
    }

    pub fn base_pair(&mut self) -> Result<BasePair> {
        let p = self.nome()?;
        let q = match self.cfg.q {
            Some(q) => q,
            None => self.polar(self.cfg.q_abs),
        };
        BasePair::new(q, p)
    }

    /// Free parameter in the annulus `|p|^{3/4} <= |z| <= |p|^{1/4}`, which
    /// keeps clear of both theta-zero circles `|z| = 1` and `|z| = |p|`.
    pub fn annulus(&mut self, p: Nome) -> Complex64 {
        let a = p.value().norm();
        let (lo, hi) = if a == 0.0 { (0.25, 0.5) } else { (a.powf(0.75), a.powf(0.25)) };
        self.polar((lo, hi))
    }

    /// Coefficient with real and imaginary parts uniform in `[-1, 1)`.
    pub fn coefficient(&mut self) -> Complex64 {
        Complex64::new(self.rng.gen_range(-1.0..1.0), self.rng.gen_range(-1.0..1.0))
    }

    pub fn coefficients(&mut self, count: usize) -> Vec<Complex64> {
        (0..count).map(|_| self.coefficient()).collect()
    }

    /// `count` annulus points such that every pair `(u, v)`, and every pair
    /// with a point of `against`, keeps `u v` and `u / v` off the lattice.
    /// Each point gets up to 100 draws.
    pub fn separated(&mut self, p: Nome, count: usize, against: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut out: Vec<Complex64> = Vec::with_capacity(count);
        for _ in 0..count {
            let z = (0..100)
                .map(|_| self.annulus(p))
                .find(|&z| out.iter().chain(against).all(|&w| pair_admissible(z, w, p)))
                .ok_or_else(|| Error::Inadmissible("could not place a separated node in 100 draws".into()))?;
            out.push(z);
        }
        Ok(out)
    }
}

/// `θ(u v)` and `θ(u / v)` both stay away from their zeros.
pub fn pair_admissible(u: Complex64, v: Complex64, p: Nome) -> bool {
    lattice_distance(u * v, p) > ADMISSIBLE_GAP && lattice_distance(u / v, p) > ADMISSIBLE_GAP
}

/// Rejects the draw unless every argument keeps its theta value off zero.
pub fn require_off_lattice(args: &[Complex64], p: Nome, what: &str) -> Result<()> {
    match args.iter().find(|&&z| lattice_distance(z, p) <= ADMISSIBLE_GAP) {
        Some(z) => Err(Error::Inadmissible(format!("{what}: argument {z} is near a theta zero"))),
        None => Ok(()),
    }
}
