//! Kernels and Nadaraya–Watson conditional-mean estimators.
//!
//! All estimators use a single global bandwidth and keep the points sorted
//! so compact-support kernels only visit their window. Point estimates are
//! direct sums over that window.
//!
//! The Epanechnikov leave-one-out pass is the hot loop of fitting. Its
//! weight `¾(1 − (vᵢ − vⱼ)²)` is a quadratic in `vⱼ`, so each window sum
//! is assembled from compensated prefix sums of `vʲ` and `vʲ·t` (j ≤ 2),
//! taken relative to a local anchor to limit cancellation. Rows whose
//! weight total is small compared with their neighbour count are
//! recomputed by direct summation.
//!
//! When every weight is zero (an isolated query under the Epanechnikov
//! kernel) the estimate falls back to the plain mean of the targets (the
//! leave-one-out mean for [`nw_residuals_loo`]) and the fallback is counted.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Second-order smoothing kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Kernel {
    /// `0.75 (1 − t²)` on `|t| ≤ 1`.
    #[default]
    Epanechnikov,
    /// Standard normal density.
    Gaussian,
}

impl Kernel {
    /// Kernel value at a finite `t`.
    #[inline]
    pub fn eval(self, t: f64) -> f64 {
        match self {
            Kernel::Epanechnikov => {
                if t.abs() <= 1.0 {
                    0.75 * (1.0 - t * t)
                } else {
                    0.0
                }
            }
            Kernel::Gaussian => INV_SQRT_2PI * libm::exp(-0.5 * t * t),
        }
    }

    /// Half-width beyond which the kernel is exactly zero in `f64`.
    pub fn support_radius(self) -> f64 {
        match self {
            Kernel::Epanechnikov => 1.0,
            // exp(-39²/2) underflows to 0.0
            Kernel::Gaussian => 39.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Kernel::Epanechnikov => "epanechnikov",
            Kernel::Gaussian => "gaussian",
        }
    }
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Kernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "epanechnikov" | "epa" => Ok(Kernel::Epanechnikov),
            "gaussian" | "normal" => Ok(Kernel::Gaussian),
            other => Err(Error::InvalidInput(alloc::format!("unknown kernel '{other}'"))),
        }
    }
}

/// Checked kernel evaluation.
pub fn kernel_eval(kernel: Kernel, t: f64) -> Result<f64> {
    if !t.is_finite() {
        return Err(Error::invalid("kernel argument must be finite"));
    }
    Ok(kernel.eval(t))
}

fn check_bandwidth(bandwidth: f64) -> Result<()> {
    if !(bandwidth > 0.0 && bandwidth.is_finite()) {
        return Err(Error::invalid("bandwidth must be positive and finite"));
    }
    Ok(())
}

fn check_points(z: &[f64], targets: &Matrix) -> Result<()> {
    if z.is_empty() {
        return Err(Error::invalid("no points to smooth"));
    }
    if targets.rows() != z.len() {
        return Err(Error::DimensionMismatch {
            expected: z.len(),
            found: targets.rows(),
        });
    }
    if !crate::stats::all_finite(z) || !targets.is_finite() {
        return Err(Error::invalid("smoothing inputs must be finite"));
    }
    Ok(())
}

/// Nadaraya–Watson estimate of `E[target | z = query]`.
pub fn nw_estimate(
    z_points: &[f64],
    targets: &Matrix,
    query: f64,
    bandwidth: f64,
    kernel: Kernel,
) -> Result<Vec<f64>> {
    check_points(z_points, targets)?;
    check_bandwidth(bandwidth)?;
    if !query.is_finite() {
        return Err(Error::invalid("query must be finite"));
    }
    let d = targets.cols();
    let mut num = vec![0.0; d];
    let mut den = 0.0;
    for (i, &z) in z_points.iter().enumerate() {
        let w = kernel.eval((z - query) / bandwidth);
        if w > 0.0 {
            den += w;
            for (acc, t) in num.iter_mut().zip(targets.row(i)) {
                *acc += w * t;
            }
        }
    }
    if den > 0.0 {
        num.iter_mut().for_each(|v| *v /= den);
        Ok(num)
    } else {
        Ok(column_means(targets))
    }
}

fn column_means(targets: &Matrix) -> Vec<f64> {
    let d = targets.cols();
    let mut m = vec![0.0; d];
    for i in 0..targets.rows() {
        for (acc, t) in m.iter_mut().zip(targets.row(i)) {
            *acc += t;
        }
    }
    let n = targets.rows() as f64;
    m.iter_mut().for_each(|v| *v /= n);
    m
}

/// Leave-one-out residuals together with the number of rows that needed the
/// fallback mean.
#[derive(Debug, Clone, PartialEq)]
pub struct LooResiduals {
    pub residuals: Matrix,
    pub fallbacks: usize,
}

/// Row `i` of the result is `targetᵢ` minus the Nadaraya–Watson estimate at
/// `zᵢ` computed from all rows `j ≠ i`.
pub fn nw_residuals_loo(
    z_points: &[f64],
    targets: &Matrix,
    bandwidth: f64,
    kernel: Kernel,
) -> Result<LooResiduals> {
    check_points(z_points, targets)?;
    check_bandwidth(bandwidth)?;
    if z_points.len() < 2 {
        return Err(Error::invalid("leave-one-out smoothing needs at least 2 points"));
    }
    Ok(loo_residuals_unchecked(z_points, targets, bandwidth, kernel))
}

/// Sorting permutation of `z` (stable, total order).
pub(crate) fn sort_order(z: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..z.len()).collect();
    order.sort_by(|&a, &b| z[a].total_cmp(&z[b]));
    order
}

pub(crate) fn loo_residuals_unchecked(
    z_points: &[f64],
    targets: &Matrix,
    bandwidth: f64,
    kernel: Kernel,
) -> LooResiduals {
    let n = z_points.len();
    let d = targets.cols();
    let order = sort_order(z_points);
    let zs: Vec<f64> = order.iter().map(|&i| z_points[i]).collect();
    let mut ts = Vec::with_capacity(n * d);
    for &i in &order {
        ts.extend_from_slice(targets.row(i));
    }
    let sorted = SortedPoints {
        z: &zs,
        t: &ts,
        d,
        inv_h: 1.0 / bandwidth,
        kernel,
    };
    let mut fitted = vec![0.0; n * d];
    let mut has_neighbours = vec![false; n];
    match kernel {
        Kernel::Epanechnikov => sorted.epanechnikov_loo(bandwidth, &mut fitted, &mut has_neighbours),
        Kernel::Gaussian => sorted.pairwise_loo(bandwidth, &mut fitted, &mut has_neighbours),
    }

    let mut totals = vec![0.0; d];
    for row in ts.chunks_exact(d.max(1)) {
        for (acc, t) in totals.iter_mut().zip(row) {
            *acc += t;
        }
    }
    let mut residuals = Matrix::zeros(n, d);
    let mut fallbacks = 0;
    for (a, &orig) in order.iter().enumerate() {
        let t_a = &ts[a * d..a * d + d];
        let out = residuals.row_mut(orig);
        if has_neighbours[a] {
            // fitted holds the weighted mean of t_j − t_a, so constant
            // targets give exact zeros
            for k in 0..d {
                out[k] = -fitted[a * d + k];
            }
        } else {
            fallbacks += 1;
            let m = (n - 1) as f64;
            for k in 0..d {
                out[k] = t_a[k] - (totals[k] - t_a[k]) / m;
            }
        }
    }
    LooResiduals {
        residuals,
        fallbacks,
    }
}

/// Points sorted by index value with their target rows.
struct SortedPoints<'a> {
    z: &'a [f64],
    t: &'a [f64],
    d: usize,
    inv_h: f64,
    kernel: Kernel,
}

impl SortedPoints<'_> {
    /// Direct sum over the neighbours of sorted point `a`; writes the
    /// weighted mean of `t_j − t_a` and reports whether any weight was
    /// positive.
    fn direct_point(&self, a: usize, reach: f64, out: &mut [f64]) -> bool {
        let d = self.d;
        let za = self.z[a];
        let t_a = &self.t[a * d..a * d + d];
        let lo = self.z[..a].partition_point(|&z| z < za - reach);
        out.iter_mut().for_each(|v| *v = 0.0);
        let mut den = 0.0;
        for b in lo..self.z.len() {
            let gap = self.z[b] - za;
            if gap > reach {
                break;
            }
            if b == a {
                continue;
            }
            let w = self.kernel.eval(gap * self.inv_h);
            if w > 0.0 {
                den += w;
                let t_b = &self.t[b * d..b * d + d];
                for k in 0..d {
                    out[k] += w * (t_b[k] - t_a[k]);
                }
            }
        }
        if den > 0.0 {
            out.iter_mut().for_each(|v| *v /= den);
            true
        } else {
            false
        }
    }

    /// Symmetric pair loop; each pair's weight is computed once.
    fn pairwise_loo(&self, bandwidth: f64, fitted: &mut [f64], has: &mut [bool]) {
        let n = self.z.len();
        let d = self.d;
        let reach = self.kernel.support_radius() * bandwidth;
        let mut den = vec![0.0; n];
        for a in 0..n {
            let za = self.z[a];
            for b in a + 1..n {
                let gap = self.z[b] - za;
                if gap > reach {
                    break;
                }
                let w = self.kernel.eval(gap * self.inv_h);
                if w <= 0.0 {
                    continue;
                }
                den[a] += w;
                den[b] += w;
                let (head, tail) = fitted.split_at_mut(b * d);
                let num_a = &mut head[a * d..a * d + d];
                let num_b = &mut tail[..d];
                let t_a = &self.t[a * d..a * d + d];
                let t_b = &self.t[b * d..b * d + d];
                for k in 0..d {
                    let step = w * (t_b[k] - t_a[k]);
                    num_a[k] += step;
                    num_b[k] -= step;
                }
            }
        }
        for a in 0..n {
            if den[a] > 0.0 {
                has[a] = true;
                fitted[a * d..a * d + d].iter_mut().for_each(|v| *v /= den[a]);
            }
        }
    }

    /// Epanechnikov weights are quadratic in the gap, so each window sum
    /// is a combination of moment sums `Σ xᵏ` and `Σ xᵏ t` (k ≤ 2) over a
    /// contiguous run of sorted points. Moments are taken relative to an
    /// anchor that moves every bandwidth, which keeps the prefix sums on the
    /// scale of a few windows, and they are accumulated with compensated
    /// summation. Rows whose total weight is small relative to their
    /// neighbour count are recomputed directly.
    fn epanechnikov_loo(&self, bandwidth: f64, fitted: &mut [f64], has: &mut [bool]) {
        let n = self.z.len();
        let d = self.d;
        let v: Vec<f64> = self.z.iter().map(|z| z * self.inv_h).collect();
        // targets relative to the first row; residuals are shift invariant
        let offset: Vec<f64> = self.t[..d].to_vec();
        let width = 3 + 3 * d;
        let mut prefix = CompensatedPrefix::new(width);
        let mut moments = vec![0.0; width];
        let mut sums = vec![0.0; width];

        let mut start = 0;
        while start < n {
            let c = v[start];
            let end = start + v[start..].partition_point(|&x| x < c + 1.0);
            let lo = v[..start].partition_point(|&x| x <= c - 1.0);
            let hi = end + v[end..].partition_point(|&x| x < c + 2.0);
            prefix.reset();
            for b in lo..hi {
                let x = v[b] - c;
                let x2 = x * x;
                moments[0] = 1.0;
                moments[1] = x;
                moments[2] = x2;
                let t_b = &self.t[b * d..b * d + d];
                for k in 0..d {
                    let t = t_b[k] - offset[k];
                    moments[3 + 3 * k] = t;
                    moments[4 + 3 * k] = t * x;
                    moments[5 + 3 * k] = t * x2;
                }
                prefix.push(&moments);
            }
            let (mut wlo, mut whi) = (lo, lo);
            for a in start..end {
                while v[wlo] <= v[a] - 1.0 {
                    wlo += 1;
                }
                while whi < hi && v[whi] < v[a] + 1.0 {
                    whi += 1;
                }
                let neighbours = whi - wlo - 1;
                if neighbours == 0 {
                    continue;
                }
                prefix.range_sum(wlo - lo, whi - lo, &mut sums);
                let x = v[a] - c;
                let c0 = 1.0 - x * x;
                let c1 = 2.0 * x;
                let combine = |m0: f64, m1: f64, m2: f64| 0.75 * (c0 * m0 + c1 * m1 - m2);
                let den = combine(sums[0], sums[1], sums[2]) - 0.75;
                let out = &mut fitted[a * d..a * d + d];
                if den > 0.1 * neighbours as f64 {
                    let t_a = &self.t[a * d..a * d + d];
                    for k in 0..d {
                        let s = combine(sums[3 + 3 * k], sums[4 + 3 * k], sums[5 + 3 * k]);
                        // drop the self term 0.75·t_a, then centre on t_a
                        let ta = t_a[k] - offset[k];
                        out[k] = (s - 0.75 * ta) / den - ta;
                    }
                    has[a] = true;
                } else {
                    has[a] = self.direct_point(a, bandwidth, out);
                }
            }
            start = end;
        }
    }
}

/// Prefix sums of several series with Neumaier-style compensation.
struct CompensatedPrefix {
    width: usize,
    sum: Vec<f64>,
    comp: Vec<f64>,
    run_sum: Vec<f64>,
    run_comp: Vec<f64>,
}

impl CompensatedPrefix {
    fn new(width: usize) -> Self {
        CompensatedPrefix {
            width,
            sum: Vec::new(),
            comp: Vec::new(),
            run_sum: vec![0.0; width],
            run_comp: vec![0.0; width],
        }
    }

    fn reset(&mut self) {
        self.sum.clear();
        self.comp.clear();
        self.run_sum.iter_mut().for_each(|v| *v = 0.0);
        self.run_comp.iter_mut().for_each(|v| *v = 0.0);
        self.sum.extend_from_slice(&self.run_sum);
        self.comp.extend_from_slice(&self.run_comp);
    }

    fn push(&mut self, values: &[f64]) {
        for k in 0..self.width {
            let (s, e) = two_sum(self.run_sum[k], values[k]);
            self.run_sum[k] = s;
            self.run_comp[k] += e;
        }
        self.sum.extend_from_slice(&self.run_sum);
        self.comp.extend_from_slice(&self.run_comp);
    }

    /// Sum of entries `from..to` in push order.
    fn range_sum(&self, from: usize, to: usize, out: &mut [f64]) {
        let w = self.width;
        for k in 0..w {
            let (s, e) = two_sum(self.sum[to * w + k], -self.sum[from * w + k]);
            out[k] = s + (e + (self.comp[to * w + k] - self.comp[from * w + k]));
        }
    }
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// Pre-sorted Nadaraya–Watson smoother for repeated queries against fixed
/// training points.
#[derive(Debug, Clone, PartialEq)]
pub struct Smoother {
    z: Vec<f64>,
    targets: Vec<f64>,
    dims: usize,
    bandwidth: f64,
    kernel: Kernel,
    means: Vec<f64>,
}

impl Smoother {
    pub fn new(z_points: &[f64], targets: &Matrix, bandwidth: f64, kernel: Kernel) -> Result<Self> {
        check_points(z_points, targets)?;
        check_bandwidth(bandwidth)?;
        let order = sort_order(z_points);
        let d = targets.cols();
        let mut ts = Vec::with_capacity(order.len() * d);
        for &i in &order {
            ts.extend_from_slice(targets.row(i));
        }
        Ok(Smoother {
            z: order.iter().map(|&i| z_points[i]).collect(),
            targets: ts,
            dims: d,
            bandwidth,
            kernel,
            means: column_means(targets),
        })
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    /// Writes the estimate at `query` into `out`; returns `true` when the
    /// fallback mean was used.
    pub fn estimate_into(&self, query: f64, out: &mut [f64]) -> bool {
        let d = self.dims;
        let reach = self.kernel.support_radius() * self.bandwidth;
        let lo = self.z.partition_point(|&z| z < query - reach);
        out.iter_mut().for_each(|v| *v = 0.0);
        let mut den = 0.0;
        for (i, &z) in self.z.iter().enumerate().skip(lo) {
            if z > query + reach {
                break;
            }
            let w = self.kernel.eval((z - query) / self.bandwidth);
            if w > 0.0 {
                den += w;
                for (acc, t) in out.iter_mut().zip(&self.targets[i * d..i * d + d]) {
                    *acc += w * t;
                }
            }
        }
        if den > 0.0 {
            out.iter_mut().for_each(|v| *v /= den);
            false
        } else {
            out.copy_from_slice(&self.means);
            true
        }
    }

    pub fn estimate(&self, query: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dims];
        self.estimate_into(query, &mut out);
        out
    }
}
