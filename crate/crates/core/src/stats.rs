//! Statistical support shared by the verification suites: compensated
//! summation, binomial confidence intervals, goodness-of-fit tests, and the
//! scalar samplers the identity checks need.

use crate::rng::CounterRng;
use statrs::function::erf::erfc;
use statrs::function::gamma::gamma_ur;

/// Neumaier-compensated accumulator. Keeps Monte Carlo reductions stable
/// under reassociation so batching order does not move estimates.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

pub fn kahan_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = KahanSum::new();
    for x in xs {
        acc.add(x);
    }
    acc.value()
}

/// Sample mean with its standard error (two-pass, compensated).
#[derive(Debug, Clone, Copy)]
pub struct MeanStats {
    pub n: usize,
    pub mean: f64,
    pub se: f64,
}

pub fn mean_stats(samples: &[f64]) -> MeanStats {
    let n = samples.len();
    assert!(n >= 2, "need at least two samples");
    let mean = kahan_sum(samples.iter().copied()) / n as f64;
    let ss = kahan_sum(samples.iter().map(|&x| (x - mean) * (x - mean)));
    let var = ss / (n - 1) as f64;
    MeanStats {
        n,
        mean,
        se: (var / n as f64).sqrt(),
    }
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    assert!(trials > 0 && successes <= trials);
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Kolmogorov survival function Q(lambda) = 2 sum_k (-1)^{k-1} e^{-2k^2 lambda^2}.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let mut s = 0.0;
    let mut sign = 1.0;
    for k in 1..=100u32 {
        let term = (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        s += sign * term;
        sign = -sign;
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

fn ks_p(d: f64, effective_n: f64) -> f64 {
    let sq = effective_n.sqrt();
    kolmogorov_q((sq + 0.12 + 0.11 / sq) * d)
}

/// One-sample KS test against a continuous CDF. Sorts a copy of the input.
pub fn ks_1samp(samples: &[f64], cdf: impl Fn(f64) -> f64) -> KsResult {
    let mut xs = samples.to_vec();
    assert!(xs.len() >= 8, "KS needs a nontrivial sample");
    xs.sort_by(|a, b| a.partial_cmp(b).expect("non-NaN samples"));
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    KsResult {
        statistic: d,
        p_value: ks_p(d, n),
    }
}

/// Two-sample KS test.
pub fn ks_2samp(a: &[f64], b: &[f64]) -> KsResult {
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    assert!(xs.len() >= 8 && ys.len() >= 8, "KS needs nontrivial samples");
    xs.sort_by(|u, v| u.partial_cmp(v).expect("non-NaN samples"));
    ys.sort_by(|u, v| u.partial_cmp(v).expect("non-NaN samples"));
    let (n1, n2) = (xs.len(), ys.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < n1 && j < n2 {
        let x = xs[i];
        let y = ys[j];
        if x <= y {
            i += 1;
        }
        if y <= x {
            j += 1;
        }
        d = d.max((i as f64 / n1 as f64 - j as f64 / n2 as f64).abs());
    }
    let ne = (n1 * n2) as f64 / (n1 + n2) as f64;
    KsResult {
        statistic: d,
        p_value: ks_p(d, ne),
    }
}

/// Upper-tail p-value of a chi-square statistic.
pub fn chi_square_p(stat: f64, dof: f64) -> f64 {
    assert!(dof > 0.0 && stat >= 0.0);
    if stat == 0.0 {
        return 1.0;
    }
    gamma_ur(dof / 2.0, stat / 2.0)
}

/// Pearson chi-square statistic and p-value for observed counts against
/// expected counts (same total). Bins with expected < 5 are pooled into
/// their left neighbor to keep the asymptotic distribution honest.
pub fn chi_square_test(observed: &[u64], expected: &[f64]) -> KsResult {
    assert_eq!(observed.len(), expected.len());
    let mut pooled: Vec<(f64, f64)> = Vec::new();
    for (&o, &e) in observed.iter().zip(expected) {
        assert!(e >= 0.0);
        match pooled.last_mut() {
            Some(last) if last.1 < 5.0 => {
                last.0 += o as f64;
                last.1 += e;
            }
            _ => pooled.push((o as f64, e)),
        }
    }
    if pooled.len() >= 2 && pooled.last().unwrap().1 < 5.0 {
        let (o, e) = pooled.pop().unwrap();
        let last = pooled.last_mut().unwrap();
        last.0 += o;
        last.1 += e;
    }
    let stat: f64 = pooled
        .iter()
        .map(|&(o, e)| (o - e) * (o - e) / e)
        .sum();
    let dof = (pooled.len().max(2) - 1) as f64;
    KsResult {
        statistic: stat,
        p_value: chi_square_p(stat, dof),
    }
}

/// Sample Pearson correlation coefficient.
pub fn pearson_correlation(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let n = a.len() as f64;
    let ma = kahan_sum(a.iter().copied()) / n;
    let mb = kahan_sum(b.iter().copied()) / n;
    let cov = kahan_sum(a.iter().zip(b).map(|(&x, &y)| (x - ma) * (y - mb)));
    let va = kahan_sum(a.iter().map(|&x| (x - ma) * (x - ma)));
    let vb = kahan_sum(b.iter().map(|&y| (y - mb) * (y - mb)));
    cov / (va * vb).sqrt()
}

/// Ordinary least squares y = slope * x + intercept.
#[derive(Debug, Clone, Copy)]
pub struct LinFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> LinFit {
    assert_eq!(x.len(), y.len());
    assert!(x.len() >= 2, "need at least two points");
    let n = x.len() as f64;
    let mx = kahan_sum(x.iter().copied()) / n;
    let my = kahan_sum(y.iter().copied()) / n;
    let sxx = kahan_sum(x.iter().map(|&u| (u - mx) * (u - mx)));
    let sxy = kahan_sum(x.iter().zip(y).map(|(&u, &v)| (u - mx) * (v - my)));
    let syy = kahan_sum(y.iter().map(|&v| (v - my) * (v - my)));
    assert!(sxx > 0.0, "x values must not be constant");
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy) / (sxx * syy)
    };
    LinFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
    }
}

/// Pool-adjacent-violators projection onto nonincreasing sequences
/// (least squares, unit weights).
pub fn isotonic_nonincreasing(y: &[f64]) -> Vec<f64> {
    // PAVA on the negated sequence gives the nondecreasing projection.
    let mut vals: Vec<f64> = Vec::with_capacity(y.len());
    let mut wts: Vec<f64> = Vec::with_capacity(y.len());
    for &orig in y {
        let mut v = -orig;
        let mut w = 1.0;
        while let Some(&last) = vals.last() {
            if last > v {
                let lw = wts.pop().expect("parallel stacks");
                vals.pop();
                v = (v * w + last * lw) / (w + lw);
                w += lw;
            } else {
                break;
            }
        }
        vals.push(v);
        wts.push(w);
    }
    let mut out = Vec::with_capacity(y.len());
    for (v, w) in vals.iter().zip(&wts) {
        for _ in 0..(w.round() as usize) {
            out.push(-v);
        }
    }
    out
}

/// Gamma(shape, rate 1) variate (Marsaglia-Tsang squeeze; boosted by a
/// uniform power for shape < 1). Consumes a variable number of draws.
pub fn sample_gamma(rng: &mut CounterRng, shape: f64) -> f64 {
    assert!(shape > 0.0 && shape.is_finite());
    if shape < 1.0 {
        let u = rng.uniform();
        return sample_gamma(rng, shape + 1.0) * u.powf(1.0 / shape);
    }
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let x = rng.standard_normal();
        let t = 1.0 + c * x;
        if t <= 0.0 {
            continue;
        }
        let v = t * t * t;
        let u = rng.uniform();
        if u < 1.0 - 0.0331 * x * x * x * x {
            return d * v;
        }
        if u.ln() < 0.5 * x * x + d * (1.0 - v + v.ln()) {
            return d * v;
        }
    }
}

/// Binomial(n, p) variate: waiting-time method when the rarer side has mean
/// at most 30, normal approximation (rounded, clamped) otherwise. The
/// approximation branch only serves bootstrap resampling, where its error is
/// far below the resampling noise itself.
pub fn sample_binomial(rng: &mut CounterRng, n: u64, p: f64) -> u64 {
    assert!((0.0..=1.0).contains(&p));
    if p <= 0.0 || n == 0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    let flip = p > 0.5;
    let q = if flip { 1.0 - p } else { p };
    let x = if (n as f64) * q <= 30.0 {
        let log1mq = (-q).ln_1p();
        let mut count = 0u64;
        let mut cursor = 0u64;
        loop {
            let gap = (rng.uniform().ln() / log1mq).floor() as u64 + 1;
            cursor = cursor.saturating_add(gap);
            if cursor > n {
                break;
            }
            count += 1;
        }
        count
    } else {
        let mean = n as f64 * q;
        let sd = (n as f64 * q * (1.0 - q)).sqrt();
        let z = rng.standard_normal();
        (mean + sd * z).round().clamp(0.0, n as f64) as u64
    };
    if flip {
        n - x
    } else {
        x
    }
}
