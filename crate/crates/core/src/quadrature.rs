//! Expectations against the standard normal weight.
//!
//! Two independent rules are available. The fixed rule applies an `n`-point
//! Gauss-Legendre formula on every panel of a truncated partition of the line;
//! the adaptive rule runs Gauss-Kronrod 7/15 with global bisection over the
//! same starting panels. [`Integrator::expect`] evaluates both and fails when
//! they disagree.
//!
//! Panels always break at the feature centres supplied by the caller and are
//! refined geometrically around them, so kinks and narrow transitions (for
//! example at `z = 0` with width `1/beta`) are resolved without relying on the
//! adaptive rule to find them.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::INV_SQRT_2PI;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    /// Gauss-Legendre order per panel.
    pub nodes: usize,
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Integration range is `[-radius, radius]`.
    pub radius: f64,
    /// Cap on adaptive subintervals per one-dimensional integral.
    pub max_intervals: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            nodes: 64,
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            radius: 12.0,
            max_intervals: 4000,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.nodes < 64 {
            return Err(Error::InvalidConfig(format!(
                "quadrature node count {} is below 64",
                self.nodes
            )));
        }
        let tol_ok = |t: f64| t > 0.0 && t <= 1e-10;
        if !tol_ok(self.abs_tol) || !(self.rel_tol >= 0.0 && self.rel_tol <= 1e-10) {
            return Err(Error::InvalidConfig(format!(
                "quadrature tolerances must lie in (0, 1e-10], got abs {} rel {}",
                self.abs_tol, self.rel_tol
            )));
        }
        if !(self.radius >= 8.0 && self.radius.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "truncation radius {} is too small",
                self.radius
            )));
        }
        if self.max_intervals < 16 {
            return Err(Error::InvalidConfig("max_intervals must be at least 16".into()));
        }
        Ok(())
    }

    fn tolerance(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

/// A point where the integrand has a kink or a transition of width `scale`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Feature {
    pub at: f64,
    pub scale: f64,
}

impl Feature {
    pub fn new(at: f64, scale: f64) -> Self {
        Self { at, scale }
    }

    /// A kink at the origin with unit width.
    pub fn origin() -> Self {
        Self { at: 0.0, scale: 1.0 }
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss 7-point weights on the odd Kronrod nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// `(kronrod, |kronrod - gauss|)` for `int_a^b g`.
fn gk15<G: Fn(f64) -> f64>(g: &G, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = g(c);
    let mut k = WGK[7] * fc;
    let mut gs = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = g(c - dx) + g(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            gs += WG[j / 2] * s;
        }
    }
    (k * h, ((k - gs) * h).abs())
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Quadrature engine holding a validated config and cached Legendre nodes.
#[derive(Clone, Debug)]
pub struct Integrator {
    config: QuadratureConfig,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Default for Integrator {
    fn default() -> Self {
        Self::new(QuadratureConfig::default()).expect("default quadrature config is valid")
    }
}

impl Integrator {
    pub fn new(config: QuadratureConfig) -> Result<Self> {
        config.validate()?;
        let (nodes, weights) = gauss_legendre(config.nodes);
        Ok(Self {
            config,
            nodes,
            weights,
        })
    }

    /// Shared instance with the default configuration.
    pub fn shared() -> &'static Integrator {
        static SHARED: OnceLock<Integrator> = OnceLock::new();
        SHARED.get_or_init(Integrator::default)
    }

    pub fn config(&self) -> &QuadratureConfig {
        &self.config
    }

    /// Panel boundaries on `[-radius, radius]`.
    pub fn panels(&self, features: &[Feature]) -> Vec<f64> {
        let r = self.config.radius;
        let mut edges = Vec::new();
        let steps = (r / 2.0).ceil() as i64;
        for k in -steps..=steps {
            edges.push((2.0 * k as f64).clamp(-r, r));
        }
        for f in features {
            if !f.at.is_finite() || f.at.abs() >= r {
                continue;
            }
            edges.push(f.at);
            let scale = f.scale.abs();
            if !(scale > 0.0 && scale.is_finite()) {
                continue;
            }
            let mut h = scale / 4.0;
            while h < 2.0 * r {
                for e in [f.at - h, f.at + h] {
                    if e > -r && e < r {
                        edges.push(e);
                    }
                }
                h *= 2.0;
            }
        }
        edges.sort_by(f64::total_cmp);
        let min_gap = 1e-12 * r;
        let mut out: Vec<f64> = Vec::with_capacity(edges.len());
        for e in edges {
            match out.last() {
                Some(&last) if e - last <= min_gap => {}
                _ => out.push(e),
            }
        }
        out
    }

    /// `int g(t) dt` over the panels with the fixed rule (no weight applied).
    fn integrate_fixed<G: Fn(f64) -> f64>(&self, g: &G, edges: &[f64]) -> f64 {
        let mut total = 0.0;
        for w in edges.windows(2) {
            let (a, b) = (w[0], w[1]);
            let c = 0.5 * (a + b);
            let h = 0.5 * (b - a);
            let mut s = 0.0;
            for (x, wt) in self.nodes.iter().zip(&self.weights) {
                s += wt * g(c + h * x);
            }
            total += h * s;
        }
        total
    }

    fn integrate_adaptive<G: Fn(f64) -> f64>(&self, g: &G, edges: &[f64]) -> Result<(f64, f64)> {
        let mut heap = BinaryHeap::with_capacity(edges.len() * 4);
        let mut err_sum = 0.0;
        for w in edges.windows(2) {
            let (value, error) = gk15(g, w[0], w[1]);
            err_sum += error;
            heap.push(Segment {
                a: w[0],
                b: w[1],
                value,
                error,
            });
        }
        let mut count = heap.len();
        loop {
            let value: f64 = heap.iter().map(|s| s.value).sum();
            if !value.is_finite() {
                return Err(Error::QuadratureNonConvergence {
                    estimate: value,
                    error: f64::INFINITY,
                });
            }
            if err_sum <= self.config.tolerance(value) {
                return Ok((value, err_sum));
            }
            if count >= self.config.max_intervals {
                return Err(Error::QuadratureNonConvergence {
                    estimate: value,
                    error: err_sum,
                });
            }
            let worst = heap.pop().expect("heap is nonempty");
            let mid = 0.5 * (worst.a + worst.b);
            if mid <= worst.a || mid >= worst.b {
                // interval cannot be split further; accept its contribution
                err_sum -= worst.error;
                heap.push(Segment { error: 0.0, ..worst });
                continue;
            }
            let (lv, le) = gk15(g, worst.a, mid);
            let (rv, re) = gk15(g, mid, worst.b);
            err_sum += le + re - worst.error;
            heap.push(Segment {
                a: worst.a,
                b: mid,
                value: lv,
                error: le,
            });
            heap.push(Segment {
                a: mid,
                b: worst.b,
                value: rv,
                error: re,
            });
            count += 1;
            // refresh the running sum occasionally to avoid drift
            if count % 64 == 0 {
                err_sum = heap.iter().map(|s| s.error).sum();
            }
        }
    }

    /// `E[f(z)]` by the fixed rule only.
    pub fn expect_fixed<F: Fn(f64) -> f64>(&self, f: F, features: &[Feature]) -> f64 {
        let edges = self.panels(features);
        self.integrate_fixed(&|t| f(t) * INV_SQRT_2PI * (-0.5 * t * t).exp(), &edges)
    }

    /// `E[f(z)]` by the adaptive rule; returns the estimate and its error bound.
    pub fn expect_adaptive<F: Fn(f64) -> f64>(&self, f: F, features: &[Feature]) -> Result<(f64, f64)> {
        let edges = self.panels(features);
        self.integrate_adaptive(&|t| f(t) * INV_SQRT_2PI * (-0.5 * t * t).exp(), &edges)
    }

    fn reconcile(&self, fixed: f64, adaptive: f64) -> Result<f64> {
        let allowed = 10.0 * self.config.tolerance(adaptive);
        if (fixed - adaptive).abs() > allowed || !fixed.is_finite() {
            return Err(Error::QuadratureDisagreement { fixed, adaptive });
        }
        Ok(fixed)
    }

    /// `E[f(z)]`, evaluated by both rules and checked for agreement.
    pub fn expect<F: Fn(f64) -> f64>(&self, f: F, features: &[Feature]) -> Result<f64> {
        let fixed = self.expect_fixed(&f, features);
        let (adaptive, _) = self.expect_adaptive(&f, features)?;
        self.reconcile(fixed, adaptive)
    }

    /// `E[f(z, z')]` for standard normals with correlation `rho`, using
    /// `z' = rho z + sqrt(1 - rho^2) w` and nested one-dimensional rules.
    /// `z_features` apply to the outer variable, `zp_features` to `z'`.
    pub fn expect_pair<F: Fn(f64, f64) -> f64>(
        &self,
        f: F,
        rho: f64,
        z_features: &[Feature],
        zp_features: &[Feature],
    ) -> Result<f64> {
        let fixed = self.expect_pair_fixed(&f, rho, z_features, zp_features)?;
        let adaptive = self.expect_pair_adaptive(&f, rho, z_features, zp_features)?;
        self.reconcile(fixed, adaptive)
    }

    fn pair_geometry(rho: f64) -> Result<(f64, f64)> {
        if !(-1.0..=1.0).contains(&rho) {
            return Err(Error::OutOfRange {
                value: rho,
                range: "[-1, 1]",
            });
        }
        Ok((rho, (1.0 - rho * rho).max(0.0).sqrt()))
    }

    /// Features of `w -> f(z, rho z + s w)` given features of `z'`.
    fn inner_features(z: f64, rho: f64, s: f64, zp_features: &[Feature]) -> Vec<Feature> {
        let mut out = Vec::with_capacity(zp_features.len() + 1);
        out.push(Feature::origin());
        for f in zp_features {
            out.push(Feature::new((f.at - rho * z) / s, f.scale / s));
        }
        out
    }

    pub fn expect_pair_fixed<F: Fn(f64, f64) -> f64>(
        &self,
        f: &F,
        rho: f64,
        z_features: &[Feature],
        zp_features: &[Feature],
    ) -> Result<f64> {
        let (rho, s) = Self::pair_geometry(rho)?;
        if s < 1e-10 {
            let mut all = z_features.to_vec();
            all.extend(zp_features.iter().map(|ft| Feature::new(ft.at * rho, ft.scale)));
            return Ok(self.expect_fixed(|z| f(z, rho * z), &all));
        }
        Ok(self.expect_fixed(
            |z| {
                let inner = Self::inner_features(z, rho, s, zp_features);
                self.expect_fixed(|w| f(z, rho * z + s * w), &inner)
            },
            z_features,
        ))
    }

    pub fn expect_pair_adaptive<F: Fn(f64, f64) -> f64>(
        &self,
        f: &F,
        rho: f64,
        z_features: &[Feature],
        zp_features: &[Feature],
    ) -> Result<f64> {
        let (rho, s) = Self::pair_geometry(rho)?;
        if s < 1e-10 {
            let mut all = z_features.to_vec();
            all.extend(zp_features.iter().map(|ft| Feature::new(ft.at * rho, ft.scale)));
            return self.expect_adaptive(|z| f(z, rho * z), &all).map(|r| r.0);
        }
        let failure = std::cell::Cell::new(None);
        let outer = self.expect_adaptive(
            |z| {
                let inner = Self::inner_features(z, rho, s, zp_features);
                match self.expect_adaptive(|w| f(z, rho * z + s * w), &inner) {
                    Ok((v, _)) => v,
                    Err(e) => {
                        failure.set(Some(e));
                        f64::NAN
                    }
                }
            },
            z_features,
        );
        if let Some(e) = failure.take() {
            return Err(e);
        }
        outer.map(|r| r.0)
    }
}

/// `E[f(z)]` for standard normal `z`, with a kink allowed at the origin.
pub fn gauss_expect<F: Fn(f64) -> f64>(f: F, config: &QuadratureConfig) -> Result<f64> {
    Integrator::new(*config)?.expect(f, &[Feature::origin()])
}
