//! Forward and backward dynamic programs over the path space.
//!
//! Both directions scan the grid once per level with a streaming
//! log-sum-exp, so a value costs O(levels x grid points) time and two grid
//! rows of memory; the table builders keep every level row for samplers and
//! decomposition checks.

use crate::environment::EnvironmentGrid;
use crate::error::{CoreError, Result};
use crate::logweight::{StreamingLse, LOG_ZERO};

use super::LatticePoint;

/// Inclusive window of admissible grid indices for one path level. A state
/// outside its level's window carries no weight.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LevelMask {
    pub lo: usize,
    pub hi: usize,
}

impl LevelMask {
    pub fn contains(&self, j: usize) -> bool {
        self.lo <= j && j <= self.hi
    }
}

/// Anti-diagonal component of a displacement vector, in lattice units:
/// the vector (n - m, n + m) has component m.
pub fn antidiag_component(d_time: f64, d_level: f64) -> f64 {
    (d_level - d_time) / 2.0
}

fn locate_pair(
    env: &EnvironmentGrid,
    p: &LatticePoint,
    q: &LatticePoint,
) -> Result<(usize, usize)> {
    p.locate(env)?;
    let (_, jp) = p.locate(env)?;
    let (_, jq) = q.locate(env)?;
    Ok((jp, jq))
}

/// log Z_{p,q}, optionally restricted by per-level index windows. The masks
/// slice, when present, has one window per path level m..=n; a path is kept
/// only if every corner (jump entry and exit site) lies in its window.
pub(crate) fn dp_value(
    env: &EnvironmentGrid,
    p: &LatticePoint,
    q: &LatticePoint,
    masks: Option<&[LevelMask]>,
) -> Result<f64> {
    let (jp, jq) = locate_pair(env, p, q)?;
    if !p.leq(q) {
        return Ok(LOG_ZERO);
    }
    let levels = (q.level - p.level) as usize + 1;
    if let Some(ms) = masks {
        debug_assert_eq!(ms.len(), levels);
        if !ms[0].contains(jp) || !ms[levels - 1].contains(jq) {
            return Ok(LOG_ZERO);
        }
    }
    let width = jq - jp + 1;
    let lndt = env.spec().dt.ln();
    let row_m = env.values_row(p.level)?;
    let mut prev: Vec<f64> = (jp..=jq).map(|j| row_m[j] - row_m[jp]).collect();
    if levels == 1 {
        return Ok(prev[width - 1]);
    }
    let mut cur = vec![LOG_ZERO; width];
    for k in 1..levels {
        let brow = env.values_row(p.level + k as i32)?;
        let mut acc = StreamingLse::new();
        for off in 0..width {
            let j = jp + off;
            cur[off] = brow[j] + acc.value();
            let open = masks.map_or(true, |ms| ms[k - 1].contains(j) && ms[k].contains(j));
            if open && prev[off] != LOG_ZERO {
                acc.push(prev[off] - brow[j] + lndt);
            }
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev[width - 1])
}

/// log Z_{p,q}: negative infinity when p <= q fails or the window is too
/// short for the required jumps; B_n(t) - B_n(s) on a single level.
pub fn log_partition(env: &EnvironmentGrid, p: &LatticePoint, q: &LatticePoint) -> Result<f64> {
    dp_value(env, p, q, None)
}

/// log Z_{p,q} + a_slope * ad(p - q): subtracts the linear anti-diagonal
/// trend of the limit shape so off-diagonal values are comparable.
pub fn log_partition_compensated(
    env: &EnvironmentGrid,
    p: &LatticePoint,
    q: &LatticePoint,
    a_slope: f64,
) -> Result<f64> {
    let base = log_partition(env, p, q)?;
    let ad = antidiag_component(p.time - q.time, (p.level - q.level) as f64);
    Ok(base + a_slope * ad)
}

/// log of the sum of compensated partition functions over all site pairs of
/// two anti-diagonal segments; negative infinity when no pair is ordered.
pub fn log_partition_segments(
    env: &EnvironmentGrid,
    seg1: &super::Segment,
    seg2: &super::Segment,
    a_slope: f64,
) -> Result<f64> {
    let mut acc = StreamingLse::new();
    for p in seg1.points() {
        for q in seg2.points() {
            acc.push(log_partition_compensated(env, &p, &q, a_slope)?);
        }
    }
    Ok(acc.value())
}

/// Forward DP table: every level's prefix values, retained for exact
/// backward path sampling and decomposition checks.
pub struct DpTable {
    p: LatticePoint,
    q: LatticePoint,
    jp: usize,
    rows: Vec<Vec<f64>>,
}

impl DpTable {
    /// Builds rows[k][j - jp] = log Z_{p, (t_j, m + k)} for j in [jp, jq].
    pub fn build(env: &EnvironmentGrid, p: &LatticePoint, q: &LatticePoint) -> Result<DpTable> {
        let (jp, jq) = locate_pair(env, p, q)?;
        if !p.leq(q) {
            return Err(CoreError::NoPath(format!(
                "({}, {}) does not precede ({}, {})",
                p.time, p.level, q.time, q.level
            )));
        }
        let width = jq - jp + 1;
        let lndt = env.spec().dt.ln();
        let levels = (q.level - p.level) as usize + 1;
        let mut rows = Vec::with_capacity(levels);
        let row_m = env.values_row(p.level)?;
        rows.push((jp..=jq).map(|j| row_m[j] - row_m[jp]).collect::<Vec<_>>());
        for k in 1..levels {
            let brow = env.values_row(p.level + k as i32)?;
            let prev = &rows[k - 1];
            let mut cur = vec![LOG_ZERO; width];
            let mut acc = StreamingLse::new();
            for off in 0..width {
                let j = jp + off;
                cur[off] = brow[j] + acc.value();
                if prev[off] != LOG_ZERO {
                    acc.push(prev[off] - brow[j] + lndt);
                }
            }
            rows.push(cur);
        }
        Ok(DpTable { p: *p, q: *q, jp, rows })
    }

    pub fn start(&self) -> LatticePoint {
        self.p
    }

    pub fn end(&self) -> LatticePoint {
        self.q
    }

    /// Grid index of the start time.
    pub fn start_index(&self) -> usize {
        self.jp
    }

    /// Prefix row for an absolute level, indexed by j - start_index.
    pub fn row(&self, level: i32) -> &[f64] {
        &self.rows[(level - self.p.level) as usize]
    }

    pub fn log_partition(&self) -> f64 {
        *self.rows[self.rows.len() - 1].last().expect("nonempty row")
    }
}

/// Backward table: rows[k][j - jp] = log Z_{(t_j, m + k), q}, the weight of
/// path suffixes entering level m + k at time t_j.
pub(crate) fn backward_rows(
    env: &EnvironmentGrid,
    p: &LatticePoint,
    q: &LatticePoint,
) -> Result<Vec<Vec<f64>>> {
    let (jp, jq) = locate_pair(env, p, q)?;
    if !p.leq(q) {
        return Err(CoreError::NoPath(format!(
            "({}, {}) does not precede ({}, {})",
            p.time, p.level, q.time, q.level
        )));
    }
    let width = jq - jp + 1;
    let lndt = env.spec().dt.ln();
    let levels = (q.level - p.level) as usize + 1;
    let top = env.values_row(q.level)?;
    let mut rows = vec![Vec::new(); levels];
    rows[levels - 1] = (jp..=jq).map(|j| top[jq] - top[j]).collect();
    for k in (0..levels - 1).rev() {
        let brow = env.values_row(p.level + k as i32)?;
        let brow_next = env.values_row(p.level + k as i32 + 1)?;
        let next = &rows[k + 1];
        let mut cur = vec![LOG_ZERO; width];
        let mut acc = StreamingLse::new();
        // Suffixes from (t_j, k) first jump at j' >= j; the jump enters
        // level k+1 at j'+1 carrying that level's increment over [j', j'+1].
        for off in (0..width - 1).rev() {
            let j = jp + off;
            let hop = next[off + 1] + brow_next[j + 1] - brow_next[j];
            if hop != LOG_ZERO {
                acc.push(brow[j] + lndt + hop);
            }
            cur[off] = acc.value() - brow[j];
        }
        rows[k] = cur;
    }
    Ok(rows)
}
