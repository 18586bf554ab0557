//! Zero-one empirical risk minimization.
//!
//! `d = 2` is an exact angular sweep. `d = 3` is exact as well: every cell
//! of the arrangement of great circles `x_i^T theta = 0` borders an arc of
//! some circle, so sweeping each circle and stepping off it to the side
//! that classifies `x_i` correctly visits a minimizing cell. `d >= 4` falls
//! back to local search from the ReLU estimate.

use super::relu::relu_erm_estimate;
use super::{check_nonempty, is_error, zero_one_errors, EstimateResult, EstimatorSpec, Objective};
use crate::error::Result;
use crate::model::{label_hash, vector_norm, Dataset, Label, RngSeed, UnitVector};
use crate::scalar::Real;

// Consecutive rejections before the local-search scale halves.
const REJECTIONS_PER_SCALE: usize = 50;
const INITIAL_SCALE: f64 = 0.5;
const SCALE_FLOOR: f64 = 1e-3;

pub fn zero_one_erm_estimate<T: Real>(ds: &Dataset<T>, spec: &EstimatorSpec) -> Result<EstimateResult<T>> {
    spec.validate()?;
    check_nonempty(ds)?;
    match ds.dim() {
        2 => {
            let (angle, _) = zero_one_sweep_2d(ds)?;
            let (s, c) = angle.sin_cos();
            let theta = UnitVector::normalize(vec![c, s])?;
            Ok(EstimateResult::new(ds, theta, Objective::ZeroOne))
        }
        3 => Ok(EstimateResult::new(ds, sweep_3d(ds)?, Objective::ZeroOne)),
        _ => local_search(ds, spec),
    }
}

/// One point's contribution along a circle `cos t u + sin t v`:
/// score `a cos t + b sin t`.
#[derive(Clone, Copy)]
struct Trace<T> {
    a: T,
    b: T,
    y: Label,
}

impl<T: Real> Trace<T> {
    fn error_at(&self, t: T) -> bool {
        let (s, c) = t.sin_cos();
        is_error(self.a * c + self.b * s, self.y)
    }

    fn is_null(&self) -> bool {
        self.a == T::zero() && self.b == T::zero()
    }
}

fn wrap<T: Real>(x: T) -> T {
    let tau = T::TAU();
    let w = x % tau;
    let w = if w < T::zero() { w + tau } else { w };
    if w >= tau {
        T::zero()
    } else {
        w
    }
}

/// Distinct critical angles in `[0, 2pi)` with the points that cross at each.
fn critical_angles<T: Real>(traces: &[Trace<T>]) -> Vec<(T, Vec<usize>)> {
    let mut events: Vec<(T, usize)> = Vec::with_capacity(2 * traces.len());
    for (i, tr) in traces.iter().enumerate() {
        if tr.is_null() {
            continue;
        }
        let psi = tr.b.atan2(tr.a);
        events.push((wrap(psi + T::FRAC_PI_2()), i));
        events.push((wrap(psi - T::FRAC_PI_2()), i));
    }
    events.sort_by(|x, y| x.0.partial_cmp(&y.0).expect("finite").then(x.1.cmp(&y.1)));
    let mut out: Vec<(T, Vec<usize>)> = Vec::new();
    for (t, i) in events {
        match out.last_mut() {
            Some((last, ids)) if *last == t => ids.push(i),
            _ => out.push((t, vec![i])),
        }
    }
    out
}

/// Midpoint of the arc that starts at critical angle `j`, in `[0, 2pi)`.
fn arc_midpoint<T: Real>(angles: &[(T, Vec<usize>)], j: usize) -> T {
    let start = angles[j].0;
    let end = if j + 1 < angles.len() {
        angles[j + 1].0
    } else {
        angles[0].0 + T::TAU()
    };
    wrap((start + end) / T::lit(2.0))
}

/// `(midpoint, error count)` for every arc, in angular order, updating the
/// count only for the points that cross between consecutive arcs.
fn sweep_arcs<T: Real>(traces: &[Trace<T>]) -> Vec<(T, usize)> {
    let angles = critical_angles(traces);
    if angles.is_empty() {
        let count = traces.iter().filter(|tr| tr.error_at(T::zero())).count();
        return vec![(T::zero(), count)];
    }
    let mid0 = arc_midpoint(&angles, 0);
    let mut status: Vec<bool> = traces.iter().map(|tr| tr.error_at(mid0)).collect();
    let mut count = status.iter().filter(|&&e| e).count();
    let mut out = Vec::with_capacity(angles.len());
    out.push((mid0, count));
    for j in 1..angles.len() {
        let mid = arc_midpoint(&angles, j);
        for &i in &angles[j].1 {
            let now = traces[i].error_at(mid);
            if now != status[i] {
                if now {
                    count += 1;
                } else {
                    count -= 1;
                }
                status[i] = now;
            }
        }
        out.push((mid, count));
    }
    out
}

/// Lowest count, smallest angle on ties.
fn best_arc<T: Real>(arcs: &[(T, usize)]) -> (T, usize) {
    *arcs
        .iter()
        .min_by(|x, y| x.1.cmp(&y.1).then(x.0.partial_cmp(&y.0).expect("finite")))
        .expect("at least one arc")
}

fn planar_traces<T: Real>(ds: &Dataset<T>) -> Vec<Trace<T>> {
    ds.iter().map(|(x, y)| Trace { a: x[0], b: x[1], y }).collect()
}

/// Exact zero-one minimizer in `d = 2`: the angle of a minimizing arc
/// midpoint and its error count.
pub fn zero_one_sweep_2d<T: Real>(ds: &Dataset<T>) -> Result<(T, usize)> {
    check_nonempty(ds)?;
    ds_dim_is(ds, 2)?;
    Ok(best_arc(&sweep_arcs(&planar_traces(ds))))
}

/// Every arc midpoint in `d = 2` with its error count evaluated directly.
pub fn enumerate_arc_midpoints<T: Real>(ds: &Dataset<T>) -> Result<Vec<(T, usize)>> {
    check_nonempty(ds)?;
    ds_dim_is(ds, 2)?;
    let traces = planar_traces(ds);
    let angles = critical_angles(&traces);
    if angles.is_empty() {
        return Ok(vec![(T::zero(), traces.iter().filter(|tr| tr.error_at(T::zero())).count())]);
    }
    Ok((0..angles.len())
        .map(|j| {
            let mid = arc_midpoint(&angles, j);
            (mid, traces.iter().filter(|tr| tr.error_at(mid)).count())
        })
        .collect())
}

fn ds_dim_is<T: Real>(ds: &Dataset<T>, d: usize) -> Result<()> {
    if ds.dim() != d {
        return Err(crate::error::Error::DimensionMismatch {
            expected: d,
            got: ds.dim(),
        });
    }
    Ok(())
}

fn cross<T: Real>(a: &[T], b: &[T]) -> [T; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Orthonormal `(u, v)` spanning the plane orthogonal to the unit `w`.
fn plane_basis<T: Real>(w: &[T]) -> ([T; 3], [T; 3]) {
    let axis = (0..3)
        .min_by(|&i, &j| w[i].abs().partial_cmp(&w[j].abs()).expect("finite"))
        .expect("three axes");
    let mut e = [T::zero(); 3];
    e[axis] = T::one();
    let along = w.iter().zip(&e).fold(T::zero(), |acc, (&a, &b)| acc + a * b);
    let mut u = [T::zero(); 3];
    for k in 0..3 {
        u[k] = e[k] - along * w[k];
    }
    let un = vector_norm(&u);
    u.iter_mut().for_each(|x| *x = *x / un);
    let v = cross(w, &u);
    (u, v)
}

struct Candidate<T> {
    count: usize,
    circle: usize,
    angle: T,
    side: T,
}

fn sweep_3d<T: Real>(ds: &Dataset<T>) -> Result<UnitVector<T>> {
    let rows: Vec<(&[T], Label, T)> = ds.iter().map(|(x, y)| (x, y, vector_norm(x))).collect();
    let mut best: Option<Candidate<T>> = None;
    let tol = T::lit(1e-12);
    for (i, &(xi, yi, ni)) in rows.iter().enumerate() {
        if ni == T::zero() {
            continue;
        }
        let w: Vec<T> = xi.iter().map(|&c| c / ni).collect();
        let (u, v) = plane_basis(&w);
        let mut traces = Vec::with_capacity(rows.len());
        // points whose circle coincides with circle i, as the sign of x_j^T w
        let mut parallel: Vec<(T, Label)> = Vec::new();
        for (j, &(xj, yj, nj)) in rows.iter().enumerate() {
            if j == i {
                continue;
            }
            let a = xj.iter().zip(&u).fold(T::zero(), |acc, (&p, &q)| acc + p * q);
            let b = xj.iter().zip(&v).fold(T::zero(), |acc, (&p, &q)| acc + p * q);
            if (a * a + b * b).sqrt() <= tol * nj {
                let c = xj.iter().zip(&w).fold(T::zero(), |acc, (&p, &q)| acc + p * q);
                parallel.push((c, yj));
            } else {
                traces.push(Trace { a, b, y: yj });
            }
        }
        let arcs = sweep_arcs(&traces);
        for side in [T::one(), -T::one()] {
            let off = usize::from(is_error(side, yi))
                + parallel.iter().filter(|(c, y)| is_error(*c * side, *y)).count();
            for &(angle, count) in &arcs {
                let total = count + off;
                if best.as_ref().is_none_or(|b| total < b.count) {
                    best = Some(Candidate {
                        count: total,
                        circle: i,
                        angle,
                        side,
                    });
                }
            }
        }
    }
    let Some(best) = best else {
        return UnitVector::basis(3, 0);
    };
    // step off circle `circle` by less than the angular margin of every
    // other trace, so no other sign changes
    let (xi, _, ni) = rows[best.circle];
    let w: Vec<T> = xi.iter().map(|&c| c / ni).collect();
    let (u, v) = plane_basis(&w);
    let (s, c) = best.angle.sin_cos();
    let on_circle: Vec<T> = (0..3).map(|k| c * u[k] + s * v[k]).collect();
    let mut margin = T::one();
    for (j, &(xj, _, nj)) in rows.iter().enumerate() {
        if j == best.circle || nj == T::zero() {
            continue;
        }
        let m = xj.iter().zip(&on_circle).fold(T::zero(), |acc, (&p, &q)| acc + p * q).abs() / nj;
        if m > tol {
            margin = margin.min(m);
        }
    }
    let eta = margin / T::lit(2.0);
    let coords = (0..3).map(|k| on_circle[k] + best.side * eta * w[k]).collect();
    UnitVector::normalize(coords)
}

fn local_search<T: Real>(ds: &Dataset<T>, spec: &EstimatorSpec) -> Result<EstimateResult<T>> {
    let start = relu_erm_estimate(ds, spec)?;
    let mut theta = start.estimate;
    let mut count = zero_one_errors(ds, &theta);
    let mut rng = RngSeed::new(spec.seed, label_hash("zero-one-search")).rng();
    let mut scale = T::lit(INITIAL_SCALE);
    let mut rejections = 0;
    let mut converged = count == 0;
    for _ in 0..spec.local_search_budget {
        if count == 0 {
            converged = true;
            break;
        }
        let proposal: Vec<T> = theta
            .coords()
            .iter()
            .map(|&c| c + scale * T::standard_normal(&mut rng))
            .collect();
        let Ok(candidate) = UnitVector::normalize(proposal) else {
            continue;
        };
        let c = zero_one_errors(ds, &candidate);
        if c < count {
            theta = candidate;
            count = c;
            rejections = 0;
        } else {
            rejections += 1;
            if rejections >= REJECTIONS_PER_SCALE {
                scale = scale / T::lit(2.0);
                rejections = 0;
                if scale < T::lit(SCALE_FLOOR) {
                    converged = true;
                    break;
                }
            }
        }
    }
    let mut out = EstimateResult::new(ds, theta, Objective::ZeroOne);
    out.restarts_used = start.restarts_used;
    out.converged = converged;
    out.approximate = true;
    Ok(out)
}
