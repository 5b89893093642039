//! Reproducible random points for the check suites.
//!
//! The stream is ChaCha8 (`rand_chacha::ChaCha8Rng::seed_from_u64`), whose
//! output is fixed across platforms. A uniform draw on `[lo, hi)` is
//! `lo + (hi − lo)·u` with `u = (next_u64 >> 11)·2⁻⁵³`. Coordinates are drawn in
//! frame order `t, q1.., (qt|p)1.., qtt1..`, and a configuration with
//! `|q| < r_min` is redrawn as a whole.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ExtendedPhasePoint, Jet2Point, JetPoint, PhasePoint};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SamplingBox {
    pub t: [f64; 2],
    pub q: [f64; 2],
    /// Range for velocities and momenta.
    pub v: [f64; 2],
    /// Range for accelerations and `p0`.
    pub a: [f64; 2],
    pub r_min: f64,
}

impl Default for SamplingBox {
    fn default() -> Self {
        SamplingBox {
            t: [0.0, 1.0],
            q: [-2.0, 2.0],
            v: [-2.0, 2.0],
            a: [-2.0, 2.0],
            r_min: 0.1,
        }
    }
}

impl SamplingBox {
    pub fn validate(&self) -> Result<()> {
        for (name, [lo, hi]) in [("t", self.t), ("q", self.q), ("v", self.v), ("a", self.a)] {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::Config(format!("sampling range `{name}` = [{lo}, {hi}] is invalid")));
            }
        }
        let reach = self.q[0].abs().max(self.q[1].abs());
        if !(self.r_min >= 0.0) || (self.r_min > 0.0 && self.r_min >= reach) {
            return Err(Error::Config(format!(
                "r_min = {} leaves no admissible configurations",
                self.r_min
            )));
        }
        Ok(())
    }
}

/// Attempts allowed before a rejection loop gives up.
pub const MAX_REJECTIONS: usize = 100_000;

pub struct Sampler {
    rng: ChaCha8Rng,
    bounds: SamplingBox,
}

impl Sampler {
    pub fn new(seed: u64, bounds: SamplingBox) -> Self {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
            bounds,
        }
    }

    pub fn bounds(&self) -> &SamplingBox {
        &self.bounds
    }

    pub fn unit(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform(&mut self, [lo, hi]: [f64; 2]) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    fn vec(&mut self, range: [f64; 2], n: usize) -> Vec<f64> {
        (0..n).map(|_| self.uniform(range)).collect()
    }

    pub fn time(&mut self) -> f64 {
        self.uniform(self.bounds.t)
    }

    pub fn positions(&mut self, n: usize) -> Vec<f64> {
        loop {
            let q = self.vec(self.bounds.q, n);
            if q.iter().map(|x| x * x).sum::<f64>().sqrt() >= self.bounds.r_min {
                return q;
            }
        }
    }

    /// `(t, q1..qn)`
    pub fn config(&mut self, n: usize) -> Vec<f64> {
        let mut x = vec![self.time()];
        x.extend(self.positions(n));
        x
    }

    pub fn jet(&mut self, n: usize) -> JetPoint {
        let t = self.time();
        let q = self.positions(n);
        let qt = self.vec(self.bounds.v, n);
        JetPoint { t, q, qt }
    }

    pub fn jet2(&mut self, n: usize) -> Jet2Point {
        let JetPoint { t, q, qt } = self.jet(n);
        let qtt = self.vec(self.bounds.a, n);
        Jet2Point { t, q, qt, qtt }
    }

    pub fn phase(&mut self, n: usize) -> PhasePoint {
        let t = self.time();
        let q = self.positions(n);
        let p = self.vec(self.bounds.v, n);
        PhasePoint { t, q, p }
    }

    pub fn extended(&mut self, n: usize) -> ExtendedPhasePoint {
        let point = self.phase(n);
        let p0 = self.uniform(self.bounds.a);
        ExtendedPhasePoint { point, p0 }
    }

    /// Coordinates of a frame with `len = 1 + k·n` slots: the config part
    /// uses the position rule, the remaining blocks the velocity range.
    pub fn coords(&mut self, n: usize, len: usize) -> Vec<f64> {
        let mut x = self.config(n);
        while x.len() < len {
            let block = if x.len() < 1 + 2 * n { self.bounds.v } else { self.bounds.a };
            x.push(self.uniform(block));
        }
        x
    }

    /// Draws phase points until `accept` holds.
    pub fn phase_where(&mut self, n: usize, mut accept: impl FnMut(&PhasePoint) -> bool) -> Result<PhasePoint> {
        for _ in 0..MAX_REJECTIONS {
            let p = self.phase(n);
            if accept(&p) {
                return Ok(p);
            }
        }
        Err(Error::Config(format!(
            "no admissible sample after {MAX_REJECTIONS} draws; widen the sampling box"
        )))
    }
}
