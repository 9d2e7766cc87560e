//! Discrete partition functions for the up-right polymer in a leveled
//! Brownian environment.
//!
//! A path from p = (s, m) to q = (t, n) is a right-continuous step function
//! with unit up-jumps at grid times s <= s_m < s_{m+1} < ... < s_{n-1} < t:
//! the first jump may sit on the start time, the last lies strictly before
//! the end time. Its weight is exp(sum of B_k(s_k) - B_k(s_{k-1})) times
//! dt per jump, and the partition function sums the weights. All arithmetic
//! is carried in log domain.

mod constrained;
mod crossing;
mod deviation;
mod dp;
mod stationary;

pub use constrained::{
    log_partition_constrained, log_partition_tf_constrained, log_partition_tf_restricted,
    tf_distance, Corridor,
};
pub use crossing::crossing_decomposition_check;
pub use deviation::deviation_bound_check;
pub use dp::{
    antidiag_component, log_partition, log_partition_compensated, log_partition_segments,
    DpTable,
};
pub use stationary::{
    log_partition_stationary, log_partition_stationary_restricted, S0Restriction,
    StationarySpec,
};

use crate::environment::EnvironmentGrid;
use crate::error::{CoreError, Result};

/// A space-time lattice site: grid time and integer level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticePoint {
    pub time: f64,
    pub level: i32,
}

impl LatticePoint {
    pub fn new(time: f64, level: i32) -> Self {
        LatticePoint { time, level }
    }

    /// Componentwise partial order; paths exist only from smaller to larger.
    pub fn leq(&self, other: &LatticePoint) -> bool {
        self.time <= other.time && self.level <= other.level
    }

    /// Anti-diagonal offset of the displacement q - p, in lattice units.
    pub fn ad_to(&self, q: &LatticePoint) -> f64 {
        antidiag_component(q.time - self.time, (q.level - self.level) as f64)
    }

    pub(crate) fn locate(&self, env: &EnvironmentGrid) -> Result<(usize, usize)> {
        let level = env.spec().level_offset(self.level)?;
        let time = env.spec().time_index(self.time)?;
        Ok((level, time))
    }
}

/// Anti-diagonal line segment of lattice sites (anchor - j, anchor + j) for
/// integer offsets j in [offset_min, offset_max].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub anchor_level: i32,
    pub offset_min: i32,
    pub offset_max: i32,
}

impl Segment {
    pub fn new(anchor_level: i32, offset_min: i32, offset_max: i32) -> Result<Self> {
        if offset_min > offset_max {
            return Err(CoreError::Geometry(format!(
                "empty offset range [{offset_min}, {offset_max}]"
            )));
        }
        Ok(Segment {
            anchor_level,
            offset_min,
            offset_max,
        })
    }

    pub fn points(&self) -> impl Iterator<Item = LatticePoint> + '_ {
        let anchor = self.anchor_level;
        (self.offset_min..=self.offset_max)
            .map(move |j| LatticePoint::new((anchor - j) as f64, anchor + j))
    }
}
