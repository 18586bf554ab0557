//! Packings and covers of the unit sphere, and sign-pattern counting for
//! homogeneous halfspaces.

use std::collections::{HashMap, HashSet};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{RngSeed, UnitVector};
use crate::scalar::Real;

/// Nets predicted to exceed this many points are refused.
pub const MAX_NET_POINTS: f64 = 1e7;

/// Probes used by the statistical cover certificate.
pub const CERTIFICATE_PROBES: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NetKind {
    Packing,
    Cover,
}

impl fmt::Display for NetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Packing => "packing",
            Self::Cover => "cover",
        })
    }
}

impl FromStr for NetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "packing" => Ok(Self::Packing),
            "cover" => Ok(Self::Cover),
            other => Err(Error::InvalidConfig(format!("unknown net kind '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SphereNet {
    pub points: Vec<UnitVector>,
    pub radius: f64,
    pub kind: NetKind,
    pub construction: String,
}

impl SphereNet {
    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, UnitVector::dim)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Header `# d=<d> radius=<r> kind=<kind>`, a construction comment, then
    /// one point per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# d={} radius={} kind={}", self.dim(), self.radius, self.kind);
        let _ = writeln!(out, "# construction={}", self.construction);
        for p in &self.points {
            let line: Vec<String> = p.coords().iter().map(|c| c.to_string()).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "missing header".into(),
        })?;
        let bad_header = || Error::Parse {
            line: 1,
            message: "expected '# d=<d> radius=<r> kind=<kind>'".into(),
        };
        let fields: HashMap<&str, &str> = header
            .strip_prefix('#')
            .ok_or_else(bad_header)?
            .split_whitespace()
            .filter_map(|kv| kv.split_once('='))
            .collect();
        let dim: usize = fields.get("d").and_then(|v| v.parse().ok()).ok_or_else(bad_header)?;
        let radius: f64 = fields
            .get("radius")
            .and_then(|v| v.parse().ok())
            .ok_or_else(bad_header)?;
        let kind: NetKind = fields.get("kind").ok_or_else(bad_header)?.parse()?;
        let mut construction = String::new();
        let mut points = Vec::new();
        for (i, line) in lines {
            let line_no = i + 1;
            let t = line.trim();
            if t.is_empty() {
                continue;
            }
            if let Some(rest) = t.strip_prefix('#') {
                if let Some(c) = rest.trim().strip_prefix("construction=") {
                    construction = c.to_string();
                }
                continue;
            }
            let coords: Vec<f64> = t
                .split_whitespace()
                .map(|v| {
                    v.parse::<f64>().map_err(|_| Error::Parse {
                        line: line_no,
                        message: format!("invalid number '{v}'"),
                    })
                })
                .collect::<Result<_>>()?;
            if coords.len() != dim {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected {dim} coordinates, found {}", coords.len()),
                });
            }
            let p = UnitVector::new(coords).map_err(|e| Error::Parse {
                line: line_no,
                message: e.to_string(),
            })?;
            points.push(p);
        }
        Ok(Self {
            points,
            radius,
            kind,
            construction,
        })
    }
}

/// Uniform-grid index over points in `[-1, 1]^d` for radius queries.
struct PointIndex {
    cell: f64,
    dim: usize,
    buckets: HashMap<Vec<i64>, Vec<usize>>,
    coords: Vec<Vec<f64>>,
}

impl PointIndex {
    fn new(dim: usize, cell: f64) -> Self {
        Self {
            cell,
            dim,
            buckets: HashMap::new(),
            coords: Vec::new(),
        }
    }

    fn key(&self, p: &[f64]) -> Vec<i64> {
        p.iter().map(|&c| (c / self.cell).floor() as i64).collect()
    }

    fn insert(&mut self, p: &[f64]) {
        let k = self.key(p);
        self.buckets.entry(k).or_default().push(self.coords.len());
        self.coords.push(p.to_vec());
    }

    /// Whether some stored point lies strictly closer than `r` (`r <= cell`).
    fn any_within(&self, p: &[f64], r: f64) -> bool {
        let r2 = r * r;
        if self.dim > 4 {
            return self.coords.iter().any(|q| sq_dist(p, q) < r2);
        }
        let base = self.key(p);
        let mut offset = vec![-1i64; self.dim];
        let mut key = base.clone();
        loop {
            for (k, (b, o)) in key.iter_mut().zip(base.iter().zip(&offset)) {
                *k = b + o;
            }
            if let Some(ids) = self.buckets.get(&key) {
                if ids.iter().any(|&i| sq_dist(p, &self.coords[i]) < r2) {
                    return true;
                }
            }
            // odometer over {-1, 0, 1}^d
            let mut j = 0;
            while j < self.dim {
                offset[j] += 1;
                if offset[j] <= 1 {
                    break;
                }
                offset[j] = -1;
                j += 1;
            }
            if j == self.dim {
                return false;
            }
        }
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn predicted_size(d: usize, eps: f64) -> f64 {
    (1.0 + 2.0 / eps).powi(d as i32)
}

fn memory_guard(d: usize, eps: f64) -> Result<()> {
    let predicted = predicted_size(d, eps);
    if predicted > MAX_NET_POINTS {
        return Err(Error::MemoryGuard {
            predicted,
            limit: MAX_NET_POINTS,
        });
    }
    Ok(())
}

/// Points of the cube grid projected to the sphere: the vertices of an
/// `m`-fold subdivision of every facet of `[-1, 1]^d`, normalized. Radial
/// projection from outside the unit ball is 1-Lipschitz, so the cover radius
/// is at most the facet cell half-diagonal `sqrt(d-1)/m`. In `d = 2` the
/// regular polygon is used instead.
pub fn grid_cover(d: usize, radius: f64) -> Result<Vec<UnitVector>> {
    if d < 2 {
        return Err(Error::DimensionTooSmall(d));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::OutOfRange {
            value: radius,
            range: "(0, inf)",
        });
    }
    if d == 2 {
        let half = (radius / 2.0).min(1.0).asin();
        let count = (std::f64::consts::PI / (2.0 * half)).ceil().max(1.0) as usize;
        return (0..count)
            .map(|k| {
                let a = std::f64::consts::TAU * k as f64 / count as f64;
                UnitVector::normalize(vec![a.cos(), a.sin()])
            })
            .collect();
    }
    let m = (((d - 1) as f64).sqrt() / radius).ceil().max(1.0) as usize;
    let per_face = (m + 1) as f64;
    let total = 2.0 * d as f64 * per_face.powi(d as i32 - 1);
    if total > MAX_NET_POINTS {
        return Err(Error::MemoryGuard {
            predicted: total,
            limit: MAX_NET_POINTS,
        });
    }
    let ticks: Vec<f64> = (0..=m).map(|i| -1.0 + 2.0 * i as f64 / m as f64).collect();
    let mut out = Vec::with_capacity(total as usize);
    let mut idx = vec![0usize; d - 1];
    for axis in 0..d {
        for sign in [-1.0, 1.0] {
            idx.iter_mut().for_each(|i| *i = 0);
            loop {
                let mut p = Vec::with_capacity(d);
                let mut it = idx.iter();
                for a in 0..d {
                    if a == axis {
                        p.push(sign);
                    } else {
                        p.push(ticks[*it.next().expect("d-1 free coordinates")]);
                    }
                }
                out.push(UnitVector::normalize(p)?);
                let mut j = 0;
                while j < d - 1 {
                    idx[j] += 1;
                    if idx[j] <= m {
                        break;
                    }
                    idx[j] = 0;
                    j += 1;
                }
                if j == d - 1 {
                    break;
                }
            }
        }
    }
    Ok(out)
}

struct Greedy {
    index: PointIndex,
    points: Vec<UnitVector>,
    separation: f64,
}

impl Greedy {
    fn new(d: usize, separation: f64) -> Self {
        Self {
            index: PointIndex::new(d, separation.max(1e-9)),
            points: Vec::new(),
            separation,
        }
    }

    /// Keeps `p` if it is at distance `>= separation` from every kept point.
    fn offer(&mut self, p: UnitVector) -> bool {
        if self.index.any_within(p.coords(), self.separation) {
            return false;
        }
        self.index.insert(p.coords());
        self.points.push(p);
        true
    }

    /// Draws from `draw` until `10 * size` consecutive rejections.
    fn run<F: FnMut() -> Result<UnitVector>>(&mut self, mut draw: F) -> Result<()> {
        let mut streak = 0usize;
        loop {
            let limit = 10 * self.points.len().max(1);
            if streak >= limit {
                return Ok(());
            }
            if self.offer(draw()?) {
                streak = 0;
            } else {
                streak += 1;
            }
        }
    }
}

// Repair grids larger than this are skipped.
const MAX_REPAIR_GRID: f64 = 2e6;

fn repair_grid(d: usize, radius: f64) -> Option<Vec<UnitVector>> {
    let m = (((d - 1) as f64).sqrt() / radius).ceil();
    let size = if d == 2 {
        std::f64::consts::PI / radius
    } else {
        2.0 * d as f64 * (m + 1.0).powi(d as i32 - 1)
    };
    if size > MAX_REPAIR_GRID {
        return None;
    }
    grid_cover(d, radius).ok()
}

/// Greedy maximal `epsilon`-packing from uniform draws.
///
/// Random draws stop after `10 * size` consecutive rejections; when the
/// dimension allows, every point of a grid with cover radius `epsilon/8` is
/// then offered as well, which fills remaining holes.
pub fn build_packing(d: usize, epsilon: f64, seed: RngSeed) -> Result<SphereNet> {
    if d < 2 {
        return Err(Error::DimensionTooSmall(d));
    }
    if !(epsilon > 0.0 && epsilon <= 2.0) {
        return Err(Error::OutOfRange {
            value: epsilon,
            range: "(0, 2]",
        });
    }
    memory_guard(d, epsilon)?;
    let mut rng = seed.rng();
    let mut greedy = Greedy::new(d, epsilon);
    greedy.run(|| UnitVector::uniform(d, &mut rng))?;
    let mut construction = "greedy-random".to_string();
    if d <= 3 {
        if let Some(grid) = repair_grid(d, epsilon / 8.0) {
            for p in grid {
                greedy.offer(p);
            }
            construction.push_str("+grid-repair");
        }
    }
    Ok(SphereNet {
        points: greedy.points,
        radius: epsilon,
        kind: NetKind::Packing,
        construction,
    })
}

/// Cover of the cap `{theta : |theta - center| <= cap_radius}` at
/// `cover_radius`.
///
/// Points are packed greedily at separation `0.8 cover_radius` inside the cap,
/// then every point of a grid with cover radius `0.2 cover_radius` lying
/// within `cap_radius + 0.2 cover_radius` of the centre is offered. Each cap
/// point has such a grid point within `0.2 cover_radius`, and each grid point
/// has a kept point within `0.8 cover_radius`, so the result covers the cap
/// whenever the repair grid fits in memory. Net points may sit up to
/// `0.2 cover_radius` outside the cap.
pub fn build_cap_cover(center: &UnitVector, cap_radius: f64, cover_radius: f64, seed: RngSeed) -> Result<SphereNet> {
    if !(cover_radius > 0.0 && cover_radius <= cap_radius && cap_radius <= 2.0) {
        return Err(Error::OutOfRange {
            value: cover_radius,
            range: "0 < cover_radius <= cap_radius <= 2",
        });
    }
    let d = center.dim();
    if cover_radius >= cap_radius {
        return Ok(SphereNet {
            points: vec![center.clone()],
            radius: cover_radius,
            kind: NetKind::Cover,
            construction: "center".into(),
        });
    }
    let sep = 0.8 * cover_radius;
    let slack = 0.2 * cover_radius;
    memory_guard(d, sep)?;
    let mut rng = seed.rng();
    let mut greedy = Greedy::new(d, sep);
    let exponent = 1.0 / (d as f64 - 1.0);
    greedy.run(|| {
        let u: f64 = f64::unit_uniform(&mut rng);
        let dist = cap_radius * u.powf(exponent);
        center.random_at_distance(dist, &mut rng)
    })?;
    let mut construction = "greedy-cap".to_string();
    if let Some(grid) = repair_grid(d, slack) {
        let reach = cap_radius + slack;
        for p in grid {
            if p.distance(center) <= reach {
                greedy.offer(p);
            }
        }
        construction.push_str("+grid-repair");
    }
    Ok(SphereNet {
        points: greedy.points,
        radius: cover_radius,
        kind: NetKind::Cover,
        construction,
    })
}

/// Smallest pairwise distance: exhaustive up to 5000 points, otherwise over
/// `1e6` sampled pairs.
pub fn min_pairwise_distance(net: &SphereNet, seed: RngSeed) -> f64 {
    let pts = &net.points;
    if pts.len() < 2 {
        return f64::INFINITY;
    }
    if pts.len() <= 5000 {
        return (0..pts.len())
            .into_par_iter()
            .map(|i| {
                ((i + 1)..pts.len())
                    .map(|j| pts[i].distance(&pts[j]))
                    .fold(f64::INFINITY, f64::min)
            })
            .reduce(|| f64::INFINITY, f64::min);
    }
    use rand::Rng;
    let mut rng = seed.rng();
    let mut best = f64::INFINITY;
    for _ in 0..1_000_000 {
        let i = rng.random_range(0..pts.len());
        let mut j = rng.random_range(0..pts.len() - 1);
        if j >= i {
            j += 1;
        }
        best = best.min(pts[i].distance(&pts[j]));
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverCertificate {
    pub probes: usize,
    pub uncovered: usize,
}

impl CoverCertificate {
    pub fn passed(&self) -> bool {
        self.uncovered == 0
    }
}

/// Draws `probes` uniform points (restricted to the cap when given) and counts
/// those with no net point within the net radius.
pub fn cover_certificate(
    net: &SphereNet,
    cap: Option<(&UnitVector, f64)>,
    probes: usize,
    seed: RngSeed,
) -> Result<CoverCertificate> {
    let d = net.dim();
    if d < 2 {
        return Err(Error::EmptyDataset);
    }
    let r = net.radius;
    let mut index = PointIndex::new(d, r.max(1e-9));
    for p in &net.points {
        index.insert(p.coords());
    }
    let chunks = probes.div_ceil(4096);
    let uncovered: usize = (0..chunks)
        .into_par_iter()
        .map(|c| -> Result<usize> {
            let mut rng = seed.derive(&[c as u64]).rng();
            let len = 4096.min(probes - c * 4096);
            let mut missed = 0;
            for _ in 0..len {
                let p = match cap {
                    None => UnitVector::uniform(d, &mut rng)?,
                    Some((center, radius)) => {
                        let u: f64 = f64::unit_uniform(&mut rng);
                        let dist = radius * u.powf(1.0 / (d as f64 - 1.0));
                        center.random_at_distance(dist, &mut rng)?
                    }
                };
                // within r, allowing for rounding in the distance
                if !index.any_within(p.coords(), r * (1.0 + 1e-12)) {
                    missed += 1;
                }
            }
            Ok(missed)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .sum();
    Ok(CoverCertificate { probes, uncovered })
}

/// `2 (n e / (d - 1))^(d - 1)`.
pub fn winder_bound(n: usize, d: usize) -> f64 {
    let k = (d - 1) as f64;
    2.0 * (n as f64 * std::f64::consts::E / k).powf(k)
}

fn pattern(points: &[Vec<f64>], norms: &[f64], theta: &[f64]) -> u64 {
    let mut bits = 0u64;
    for (i, (x, n)) in points.iter().zip(norms).enumerate() {
        let s: f64 = x.iter().zip(theta).map(|(a, b)| a * b).sum();
        // points orthogonal to theta up to rounding are on the boundary: -1
        if s > 1e-12 * n {
            bits |= 1 << i;
        }
    }
    bits
}

fn cross(a: &[f64], b: &[f64]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Number of distinct sign patterns `(h_theta(x_i))_i` over unit `theta`,
/// with `h_theta(x) = +1` iff `x^T theta > 0`.
///
/// `d = 2` is an exact sweep over the critical angles and the arcs between
/// them. `d = 3` evaluates every arrangement vertex `+-(x_i x x_j)` and the
/// four cells around it, then adds any pattern found by random sampling.
/// Both are exact for points in general position.
pub fn count_halfspace_labelings(points: &[Vec<f64>], seed: RngSeed) -> Result<u64> {
    let n = points.len();
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    if n > 64 {
        return Err(Error::OutOfRange {
            value: n as f64,
            range: "n <= 64",
        });
    }
    let d = points[0].len();
    if let Some(p) = points.iter().find(|p| p.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: p.len(),
        });
    }
    if d != 2 && d != 3 {
        return Err(Error::OutOfRange {
            value: d as f64,
            range: "d in {2, 3}",
        });
    }
    let norms: Vec<f64> = points
        .iter()
        .map(|p| p.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    if norms.iter().any(|&v| v == 0.0 || !v.is_finite()) {
        return Err(Error::DegenerateVector);
    }
    let mut seen = HashSet::new();
    if d == 2 {
        let mut angles: Vec<f64> = points
            .iter()
            .flat_map(|p| {
                let a = p[1].atan2(p[0]);
                [a + std::f64::consts::FRAC_PI_2, a - std::f64::consts::FRAC_PI_2]
            })
            .map(|a| a.rem_euclid(std::f64::consts::TAU))
            .collect();
        angles.sort_by(f64::total_cmp);
        for (k, &a) in angles.iter().enumerate() {
            let next = if k + 1 < angles.len() {
                angles[k + 1]
            } else {
                angles[0] + std::f64::consts::TAU
            };
            for t in [a, 0.5 * (a + next)] {
                seen.insert(pattern(points, &norms, &[t.cos(), t.sin()]));
            }
        }
        return Ok(seen.len() as u64);
    }
    for (x, nx) in points.iter().zip(&norms) {
        for s in [1.0, -1.0] {
            let t: Vec<f64> = x.iter().map(|v| s * v / nx).collect();
            seen.insert(pattern(points, &norms, &t));
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let (xi, xj) = (&points[i], &points[j]);
            let c = cross(xi, xj);
            let cn = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
            if cn <= 1e-12 * norms[i] * norms[j] {
                continue;
            }
            let gii: f64 = xi.iter().map(|v| v * v).sum();
            let gjj: f64 = xj.iter().map(|v| v * v).sum();
            let gij: f64 = xi.iter().zip(xj).map(|(a, b)| a * b).sum();
            let det = gii * gjj - gij * gij;
            for sv in [1.0, -1.0] {
                let v: Vec<f64> = c.iter().map(|&ci| sv * ci / cn).collect();
                seen.insert(pattern(points, &norms, &v));
                for (si, sj) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                    // coefficients giving x_i^T w = si |x_i|, x_j^T w = sj |x_j|
                    let (bi, bj) = (si * norms[i], sj * norms[j]);
                    let a = (gjj * bi - gij * bj) / det;
                    let g = (gii * bj - gij * bi) / det;
                    let eta = 1e-7;
                    let th: Vec<f64> = (0..3).map(|k| v[k] + eta * (a * xi[k] + g * xj[k])).collect();
                    seen.insert(pattern(points, &norms, &th));
                }
            }
        }
    }
    let mut rng = seed.rng();
    for _ in 0..20_000 {
        let t = UnitVector::<f64>::uniform(3, &mut rng)?;
        seen.insert(pattern(points, &norms, t.coords()));
    }
    Ok(seen.len() as u64)
}

/// Pattern count for points in general position,
/// `2 sum_{k < d} C(n - 1, k)`.
pub fn general_position_count(n: usize, d: usize) -> u64 {
    let mut total = 0u64;
    let mut binom = 1u64;
    for k in 0..d.min(n) {
        if k > 0 {
            binom = binom * (n - k) as u64 / k as u64;
        }
        total += binom;
    }
    2 * total
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn random_points(n: usize, d: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = RngSeed::new(seed, 3).rng();
        (0..n)
            .map(|_| (0..d).map(|_| f64::standard_normal(&mut rng)).collect())
            .collect()
    }

    #[test]
    fn general_position_formula() {
        for n in 1..15 {
            assert_eq!(general_position_count(n, 2), 2 * n as u64);
            assert_eq!(general_position_count(n, 3), (n * n - n + 2) as u64);
        }
    }

    #[test]
    fn labeling_examples() {
        assert_eq!(count_halfspace_labelings(&[vec![1.0, 2.0]], RngSeed::new(0, 0)).unwrap(), 2);
        assert_eq!(count_halfspace_labelings(&[vec![1.0, 2.0, 3.0]], RngSeed::new(0, 0)).unwrap(), 2);
        let three = random_points(3, 2, 1);
        let c = count_halfspace_labelings(&three, RngSeed::new(0, 0)).unwrap();
        assert_eq!(c, 6);
        assert!((c as f64) <= winder_bound(3, 2));
        let four = random_points(4, 3, 2);
        let c = count_halfspace_labelings(&four, RngSeed::new(0, 0)).unwrap();
        assert_eq!(c, 14);
        assert!((c as f64) <= 59.1);
        assert!(count_halfspace_labelings(&[vec![0.0, 0.0]], RngSeed::new(0, 0)).is_err());
    }

    #[test]
    fn counts_match_general_position_formula() {
        for d in [2, 3] {
            for n in 3..=12 {
                for s in 0..5 {
                    let pts = random_points(n, d, 100 * n as u64 + s);
                    let c = count_halfspace_labelings(&pts, RngSeed::new(s, 1)).unwrap();
                    assert_eq!(c, general_position_count(n, d), "d={d} n={n}");
                }
            }
        }
    }

    #[test]
    fn antipodal_pair_has_boundary_pattern() {
        // theta orthogonal to both labels both -1
        let pts = vec![vec![1.0, 0.0], vec![-1.0, 0.0]];
        assert_eq!(count_halfspace_labelings(&pts, RngSeed::new(0, 0)).unwrap(), 3);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn rescaling_invariance(seed in 0u64..10_000, n in 1usize..10, d in 2usize..4, scale in 0.01f64..100.0, which in 0usize..10) {
            let mut pts = random_points(n, d, seed);
            let before = count_halfspace_labelings(&pts, RngSeed::new(seed, 0)).unwrap();
            let i = which % n;
            pts[i].iter_mut().for_each(|v| *v *= scale);
            let after = count_halfspace_labelings(&pts, RngSeed::new(seed, 0)).unwrap();
            prop_assert_eq!(before, after);
        }
    }

    #[test]
    fn packing_invariants() {
        for (d, eps) in [(2, 0.3), (2, 0.05), (3, 0.3), (3, 0.5), (4, 0.5)] {
            let net = build_packing(d, eps, RngSeed::new(11, d as u64)).unwrap();
            assert!(min_pairwise_distance(&net, RngSeed::new(0, 0)) >= eps, "d={d} eps={eps}");
            assert!(net.len() as f64 >= (1.0 / eps).powi(d as i32 - 1));
        }
        let d2 = build_packing(2, 0.05, RngSeed::new(1, 1)).unwrap();
        assert!(d2.len() as f64 >= 1.0 / 0.05);
        let circle_max = std::f64::consts::PI / (0.025f64).asin();
        assert!(d2.len() as f64 <= circle_max);
        let two = build_packing(3, 2.0, RngSeed::new(1, 1)).unwrap();
        assert!(two.len() <= 2);
        assert!(matches!(build_packing(30, 0.1, RngSeed::new(1, 1)), Err(Error::MemoryGuard { .. })));
    }

    #[test]
    fn cap_cover_certificate() {
        let center = UnitVector::basis(3, 2).unwrap();
        let net = build_cap_cover(&center, 0.5, 0.1, RngSeed::new(2, 2)).unwrap();
        let cert = cover_certificate(&net, Some((&center, 0.5)), CERTIFICATE_PROBES, RngSeed::new(3, 3)).unwrap();
        assert!(cert.passed(), "{cert:?}");
        let coarse = build_cap_cover(&center, 0.5, 0.2, RngSeed::new(2, 2)).unwrap();
        assert!(net.len() >= 2 * coarse.len());
        let single = build_cap_cover(&center, 0.5, 0.5, RngSeed::new(2, 2)).unwrap();
        assert_eq!(single.len(), 1);
    }

    #[test]
    fn grid_cover_radius() {
        for (d, r) in [(2, 0.1), (3, 0.2), (4, 0.5)] {
            let grid = grid_cover(d, r).unwrap();
            let net = SphereNet {
                points: grid,
                radius: r,
                kind: NetKind::Cover,
                construction: "grid".into(),
            };
            let cert = cover_certificate(&net, None, 20_000, RngSeed::new(4, d as u64)).unwrap();
            assert!(cert.passed());
        }
        assert_eq!(grid_cover(2, 2.0).unwrap().len(), 1);
    }

    #[test]
    fn text_round_trip() {
        let net = build_packing(3, 0.6, RngSeed::new(5, 5)).unwrap();
        let text = net.to_text();
        assert!(text.starts_with("# d=3 radius=0.6 kind=packing\n"));
        let back = SphereNet::from_text(&text).unwrap();
        assert_eq!(back, net);
        let broken = text.replacen("\n", "\n1.0 abc 0\n", 2);
        match SphereNet::from_text(&broken) {
            Err(Error::Parse { line, .. }) => assert!(line >= 2),
            other => panic!("{other:?}"),
        }
    }
}
