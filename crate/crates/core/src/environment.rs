//! Discretized Brownian driving noise.
//!
//! An [`EnvironmentGrid`] holds one realization of the independent Brownian
//! motions {B_i}, one per level, sampled on a shared uniform time grid. It
//! is the single source of randomness for every partition function: two
//! computations that share an environment are coupled, and regenerating
//! from the same seed reproduces the environment bit-exactly.

use std::io::{Read, Write};

use crate::error::{CoreError, Result};
use crate::rng::{CounterRng, Domain};
use crate::stats::KahanSum;

/// Uniform time grid spanning [t_min, t_max] with step dt, carrying levels
/// level_min..=level_max. Time 0 must be a grid point: every Brownian
/// motion is anchored to B(0) = 0, including two-sided grids with t_min < 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub t_min: f64,
    pub t_max: f64,
    pub dt: f64,
    pub level_min: i32,
    pub level_max: i32,
}

const STEP_TOL: f64 = 1e-9;

impl GridSpec {
    pub fn new(t_min: f64, t_max: f64, dt: f64, level_min: i32, level_max: i32) -> Result<Self> {
        let spec = GridSpec {
            t_min,
            t_max,
            dt,
            level_min,
            level_max,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Single-sided grid on [0, t_max], the common point-to-point case.
    pub fn forward(t_max: f64, dt: f64, level_min: i32, level_max: i32) -> Result<Self> {
        Self::new(0.0, t_max, dt, level_min, level_max)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.t_min.is_finite() || !self.t_max.is_finite() || !(self.dt > 0.0) {
            return Err(CoreError::Grid(format!(
                "need finite t_min < t_max and dt > 0, got [{}, {}] dt {}",
                self.t_min, self.t_max, self.dt
            )));
        }
        if self.t_min >= self.t_max {
            return Err(CoreError::Grid(format!(
                "t_min {} must be below t_max {}",
                self.t_min, self.t_max
            )));
        }
        let steps = (self.t_max - self.t_min) / self.dt;
        if (steps - steps.round()).abs() > STEP_TOL || steps.round() < 1.0 {
            return Err(CoreError::Grid(format!(
                "(t_max - t_min)/dt = {steps} is not a whole number of steps"
            )));
        }
        if self.t_min > 0.0 || self.t_max < 0.0 {
            return Err(CoreError::Grid(format!(
                "time 0 must lie inside [{}, {}]",
                self.t_min, self.t_max
            )));
        }
        let zero = -self.t_min / self.dt;
        if (zero - zero.round()).abs() > STEP_TOL {
            return Err(CoreError::Grid(format!(
                "time 0 is off-grid: -t_min/dt = {zero}"
            )));
        }
        if self.level_min > self.level_max {
            return Err(CoreError::Grid(format!(
                "level_min {} above level_max {}",
                self.level_min, self.level_max
            )));
        }
        Ok(())
    }

    /// Number of increments per level; grid points number one more.
    pub fn n_steps(&self) -> usize {
        ((self.t_max - self.t_min) / self.dt).round() as usize
    }

    pub fn n_levels(&self) -> usize {
        (self.level_max - self.level_min) as usize + 1
    }

    /// Grid point index of time 0, where the motions are anchored.
    pub fn zero_index(&self) -> usize {
        (-self.t_min / self.dt).round() as usize
    }

    pub fn time_at(&self, index: usize) -> f64 {
        self.t_min + index as f64 * self.dt
    }

    /// Index of a grid time, accepting float noise up to 1e-9 steps.
    pub fn time_index(&self, t: f64) -> Result<usize> {
        let pos = (t - self.t_min) / self.dt;
        let idx = pos.round();
        if (pos - idx).abs() > STEP_TOL || idx < 0.0 || idx > self.n_steps() as f64 {
            return Err(CoreError::Index(format!(
                "time {t} is not on the grid [{}, {}] step {}",
                self.t_min, self.t_max, self.dt
            )));
        }
        Ok(idx as usize)
    }

    pub fn level_offset(&self, level: i32) -> Result<usize> {
        if level < self.level_min || level > self.level_max {
            return Err(CoreError::Index(format!(
                "level {level} outside [{}, {}]",
                self.level_min, self.level_max
            )));
        }
        Ok((level - self.level_min) as usize)
    }
}

/// One realization of the leveled Brownian environment on a grid.
pub struct EnvironmentGrid {
    spec: GridSpec,
    seed: u64,
    /// increments[l][j] = B_l(t_{j+1}) - B_l(t_j), i.i.d. N(0, dt).
    increments: Vec<Vec<f64>>,
    /// values[l][j] = B_l(t_j), compensated cumulative sums anchored so
    /// values[l][zero_index] = 0 exactly.
    values: Vec<Vec<f64>>,
}

impl EnvironmentGrid {
    /// Sample the environment for (seed, spec). Level l draws from the
    /// stream (seed, Level, l), so widening the level range or running
    /// levels in parallel cannot change any level's increments.
    pub fn generate(seed: u64, spec: GridSpec) -> Result<Self> {
        spec.validate()?;
        let n = spec.n_steps();
        let sqrt_dt = spec.dt.sqrt();
        let increments: Vec<Vec<f64>> = (spec.level_min..=spec.level_max)
            .map(|level| {
                let mut rng = CounterRng::new(seed, Domain::Level, level as i64);
                (0..n).map(|_| sqrt_dt * rng.standard_normal()).collect()
            })
            .collect();
        Ok(Self::assemble(spec, seed, increments))
    }

    /// Build an environment from explicit increments (sign walks, refinement
    /// couplings, regression fixtures). Dimensions must match the spec.
    pub fn from_increments(spec: GridSpec, seed: u64, increments: Vec<Vec<f64>>) -> Result<Self> {
        spec.validate()?;
        if increments.len() != spec.n_levels()
            || increments.iter().any(|row| row.len() != spec.n_steps())
        {
            return Err(CoreError::Grid(format!(
                "increment array shape {}x{} does not match spec {}x{}",
                increments.len(),
                increments.first().map_or(0, |r| r.len()),
                spec.n_levels(),
                spec.n_steps()
            )));
        }
        Ok(Self::assemble(spec, seed, increments))
    }

    fn assemble(spec: GridSpec, seed: u64, increments: Vec<Vec<f64>>) -> Self {
        let zero = spec.zero_index();
        let values = increments
            .iter()
            .map(|row| {
                let mut vals = vec![0.0; row.len() + 1];
                let mut acc = KahanSum::new();
                for j in zero..row.len() {
                    acc.add(row[j]);
                    vals[j + 1] = acc.value();
                }
                let mut acc = KahanSum::new();
                for j in (0..zero).rev() {
                    acc.add(-row[j]);
                    vals[j] = acc.value();
                }
                vals
            })
            .collect();
        EnvironmentGrid {
            spec,
            seed,
            increments,
            values,
        }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// B_level(t) for a grid time t.
    pub fn bm_value(&self, level: i32, t: f64) -> Result<f64> {
        let l = self.spec.level_offset(level)?;
        let j = self.spec.time_index(t)?;
        Ok(self.values[l][j])
    }

    /// Full row of B_level over grid indices 0..=n_steps. The hot path for
    /// the dynamic programs, which index by grid position.
    pub fn values_row(&self, level: i32) -> Result<&[f64]> {
        Ok(&self.values[self.spec.level_offset(level)?])
    }

    /// Raw increment B(t_{j+1}) - B(t_j).
    pub fn increment(&self, level: i32, step: usize) -> Result<f64> {
        let l = self.spec.level_offset(level)?;
        if step >= self.spec.n_steps() {
            return Err(CoreError::Index(format!("step {step} out of range")));
        }
        Ok(self.increments[l][step])
    }

    /// Coarsen the grid by an integer factor, summing runs of increments.
    /// The result is the same Brownian path sampled at the coarser step, so
    /// fine and coarse partition functions are coupled path by path.
    pub fn coarsen(&self, factor: usize) -> Result<EnvironmentGrid> {
        if factor < 2 || self.spec.n_steps() % factor != 0 || self.spec.zero_index() % factor != 0
        {
            return Err(CoreError::Grid(format!(
                "factor {factor} does not evenly divide the grid"
            )));
        }
        let spec = GridSpec::new(
            self.spec.t_min,
            self.spec.t_max,
            self.spec.dt * factor as f64,
            self.spec.level_min,
            self.spec.level_max,
        )?;
        let increments = self
            .increments
            .iter()
            .map(|row| {
                row.chunks_exact(factor)
                    .map(|chunk| {
                        let mut acc = KahanSum::new();
                        chunk.iter().for_each(|&x| acc.add(x));
                        acc.value()
                    })
                    .collect()
            })
            .collect();
        Ok(Self::assemble(spec, self.seed, increments))
    }

    /// Serialize to a little-endian binary stream for experiment replay.
    pub fn dump(&self, w: &mut impl Write) -> Result<()> {
        w.write_all(MAGIC)?;
        for x in [self.spec.t_min, self.spec.t_max, self.spec.dt] {
            w.write_all(&x.to_le_bytes())?;
        }
        w.write_all(&self.spec.level_min.to_le_bytes())?;
        w.write_all(&self.spec.level_max.to_le_bytes())?;
        w.write_all(&self.seed.to_le_bytes())?;
        for row in &self.increments {
            for x in row {
                w.write_all(&x.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn restore(r: &mut impl Read) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(CoreError::Grid("unrecognized environment header".into()));
        }
        let mut f = [0u8; 8];
        let mut next_f64 = |r: &mut dyn Read| -> Result<f64> {
            r.read_exact(&mut f)?;
            Ok(f64::from_le_bytes(f))
        };
        let t_min = next_f64(r)?;
        let t_max = next_f64(r)?;
        let dt = next_f64(r)?;
        let mut i = [0u8; 4];
        r.read_exact(&mut i)?;
        let level_min = i32::from_le_bytes(i);
        r.read_exact(&mut i)?;
        let level_max = i32::from_le_bytes(i);
        let mut s = [0u8; 8];
        r.read_exact(&mut s)?;
        let seed = u64::from_le_bytes(s);
        let spec = GridSpec::new(t_min, t_max, dt, level_min, level_max)?;
        let mut increments = Vec::with_capacity(spec.n_levels());
        let mut buf = vec![0u8; spec.n_steps() * 8];
        for _ in 0..spec.n_levels() {
            r.read_exact(&mut buf)?;
            increments.push(
                buf.chunks_exact(8)
                    .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
                    .collect(),
            );
        }
        Self::from_increments(spec, seed, increments)
    }
}

const MAGIC: &[u8; 8] = b"OYENV01\0";
