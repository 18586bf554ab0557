//! Empirical ReLU risk minimization over the sphere.
//!
//! Projected subgradient descent from several starts, then a polish by exact
//! line search along great circles. Along a great circle the risk is a sum
//! of terms `[-(a_i cos t + b_i sin t)]_+`; between kinks it equals
//! `-(A cos t + B sin t)` with `A, B` fixed, which is positive and therefore
//! concave there, so the minimum over the circle sits at a kink. A sweep
//! over the sorted kinks finds it exactly.

use super::linear::linear_direction;
use super::{check_nonempty, row_dot, EstimateResult, EstimatorSpec, Objective};
use crate::error::{Error, Result};
use crate::model::{label_hash, vector_norm, Dataset, RngSeed, UnitVector};
use crate::scalar::Real;

// Subgradient iterations without a new best before the descent stops.
const PATIENCE: usize = 100;
// Relative size below which `s^T theta` counts as a kink and objective
// differences count as ties. Rounding noise at kinks would otherwise steer
// otherwise identical runs (rotated data, flipped labels) apart.
const KINK: f64 = 1e-12;
// Objective change per step (or polish round) regarded as converged.
const CONVERGED: f64 = 1e-10;

/// Runs from the linear estimate plus `restarts - 1` uniform random starts.
pub fn relu_erm_estimate<T: Real>(ds: &Dataset<T>, spec: &EstimatorSpec) -> Result<EstimateResult<T>> {
    spec.validate()?;
    check_nonempty(ds)?;
    let mut inits = Vec::with_capacity(spec.restarts);
    match linear_direction(ds) {
        Ok(u) => inits.push(u),
        Err(Error::Degenerate(_)) => {}
        Err(e) => return Err(e),
    }
    let mut rng = RngSeed::new(spec.seed, label_hash("relu-restarts")).rng();
    while inits.len() < spec.restarts {
        inits.push(UnitVector::uniform(ds.dim(), &mut rng)?);
    }
    relu_erm_from(ds, spec, &inits)
}

/// Runs from the given starting points and keeps the best by objective,
/// the earliest start on ties.
pub fn relu_erm_from<T: Real>(
    ds: &Dataset<T>,
    spec: &EstimatorSpec,
    inits: &[UnitVector<T>],
) -> Result<EstimateResult<T>> {
    spec.validate()?;
    check_nonempty(ds)?;
    if inits.is_empty() {
        return Err(Error::InvalidConfig("at least one initial point is required".into()));
    }
    let problem = Problem::new(ds);
    let mut best: Option<(UnitVector<T>, T, bool)> = None;
    for init in inits {
        init.check_len(ds.dim())?;
        let (theta, value, converged) = problem.solve(init.clone(), spec);
        if best.as_ref().is_none_or(|(_, b, _)| value < *b - problem.slack) {
            best = Some((theta, value, converged));
        }
    }
    let (theta, _, converged) = best.expect("nonempty starts");
    let mut out = EstimateResult::new(ds, theta, Objective::Relu);
    out.restarts_used = inits.len();
    out.converged = converged;
    Ok(out)
}

struct Problem<T: Real> {
    dim: usize,
    n: T,
    signed: Vec<T>,
    row_norms: Vec<T>,
    /// Ties in objective value below this are ignored.
    slack: T,
}

impl<T: Real> Problem<T> {
    fn new(ds: &Dataset<T>) -> Self {
        let dim = ds.dim();
        let signed = ds.signed_covariates();
        let row_norms: Vec<T> = signed.chunks_exact(dim).map(vector_norm).collect();
        let n = T::lit(ds.len() as f64);
        let mean_norm = row_norms.iter().fold(T::zero(), |a, &b| a + b) / n;
        Self {
            dim,
            n,
            signed,
            row_norms,
            slack: T::lit(KINK) * mean_norm,
        }
    }

    fn rows(&self) -> std::slice::ChunksExact<'_, T> {
        self.signed.chunks_exact(self.dim)
    }

    fn risk(&self, theta: &[T]) -> T {
        let total = self.rows().fold(T::zero(), |acc, s| {
            let m = row_dot(s, theta);
            if m < T::zero() {
                acc - m
            } else {
                acc
            }
        });
        total / self.n
    }

    /// Risk and a subgradient; the kink `s^T theta = 0` contributes zero.
    fn risk_and_subgradient(&self, theta: &[T], g: &mut [T]) -> T {
        g.iter_mut().for_each(|v| *v = T::zero());
        let mut total = T::zero();
        for (s, &nrm) in self.rows().zip(&self.row_norms) {
            let m = row_dot(s, theta);
            if m < T::zero() {
                total = total - m;
                if m < -T::lit(KINK) * nrm {
                    for (gi, &si) in g.iter_mut().zip(s) {
                        *gi = *gi - si;
                    }
                }
            }
        }
        g.iter_mut().for_each(|v| *v = *v / self.n);
        total / self.n
    }

    fn step_scale(&self, spec: &EstimatorSpec) -> T {
        if let Some(c) = spec.step_scale {
            return T::lit(c);
        }
        let mean = self.row_norms.iter().fold(T::zero(), |a, &b| a + b) / self.n;
        if mean > T::zero() {
            T::one() / mean
        } else {
            T::one()
        }
    }

    fn solve(&self, init: UnitVector<T>, spec: &EstimatorSpec) -> (UnitVector<T>, T, bool) {
        let (theta, value, last_change) = self.descend(init, spec);
        if spec.polish_rounds == 0 {
            return (theta, value, last_change < T::lit(CONVERGED));
        }
        self.polish(theta, value, spec.polish_rounds)
    }

    fn descend(&self, init: UnitVector<T>, spec: &EstimatorSpec) -> (UnitVector<T>, T, T) {
        let c = self.step_scale(spec);
        let mut g = vec![T::zero(); self.dim];
        let mut theta = init;
        let mut value = self.risk_and_subgradient(theta.coords(), &mut g);
        let mut best = (theta.clone(), value);
        let mut last_change = T::infinity();
        let mut since_best = 0;
        for t in 1..=spec.max_iterations {
            if g.iter().all(|v| *v == T::zero()) {
                last_change = T::zero();
                break;
            }
            let eta = c / T::lit(t as f64).sqrt();
            let next: Vec<T> = theta.coords().iter().zip(&g).map(|(&a, &b)| a - eta * b).collect();
            theta = match UnitVector::normalize(next) {
                Ok(v) => v,
                Err(_) => break,
            };
            let new_value = self.risk_and_subgradient(theta.coords(), &mut g);
            last_change = (new_value - value).abs();
            value = new_value;
            if value < best.1 - self.slack {
                best = (theta.clone(), value);
                since_best = 0;
            } else {
                since_best += 1;
                if since_best >= PATIENCE {
                    break;
                }
            }
        }
        (best.0, best.1, last_change)
    }

    /// Line searches along the descent direction and towards the hyperplanes
    /// of the `2d` samples closest to the boundary. Every direction is built
    /// from the data, so the polish commutes with rotations and with the
    /// label flip `y -> -y, theta -> -theta`.
    fn polish(&self, mut theta: UnitVector<T>, mut value: T, rounds: usize) -> (UnitVector<T>, T, bool) {
        let mut g = vec![T::zero(); self.dim];
        for _ in 0..rounds {
            value = value.min(self.risk_and_subgradient(theta.coords(), &mut g));
            if value == T::zero() {
                return (theta, value, true);
            }
            let mut dirs: Vec<Vec<T>> = vec![g.iter().map(|&v| -v).collect()];
            let mut near: Vec<(T, usize)> = self
                .rows()
                .zip(&self.row_norms)
                .enumerate()
                .filter(|(_, (_, &nrm))| nrm > T::zero())
                .map(|(i, (s, &nrm))| {
                    let m = row_dot(s, theta.coords()).abs() / nrm;
                    (if m < T::lit(KINK) { T::zero() } else { m }, i)
                })
                .collect();
            let k = (2 * self.dim).min(near.len());
            if k > 0 && k < near.len() {
                near.select_nth_unstable_by(k - 1, |a, b| a.0.partial_cmp(&b.0).expect("finite"));
            }
            near.truncate(k);
            near.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite").then(a.1.cmp(&b.1)));
            for (_, i) in near {
                dirs.push(self.signed[i * self.dim..(i + 1) * self.dim].to_vec());
            }
            let start = value;
            for dir in dirs {
                if let Some(candidate) = self.line_search(&theta, &dir) {
                    let v = self.risk(candidate.coords());
                    if v < value - self.slack {
                        theta = candidate;
                        value = v;
                    }
                }
            }
            if start - value < T::lit(CONVERGED) {
                return (theta, value, true);
            }
        }
        (theta, value, false)
    }

    /// Exact minimizer of the risk over the great circle through `u` in the
    /// tangent direction of `dir`. Returns `None` when `dir` is parallel to
    /// `u`.
    fn line_search(&self, u: &UnitVector<T>, dir: &[T]) -> Option<UnitVector<T>> {
        let along = u.dot_slice(dir);
        let tangent: Vec<T> = dir.iter().zip(u.coords()).map(|(&d, &x)| d - along * x).collect();
        let tn = vector_norm(&tangent);
        if tn <= T::lit(1e-12) * vector_norm(dir) || tn == T::zero() {
            return None;
        }
        let v: Vec<T> = tangent.iter().map(|&x| x / tn).collect();
        let tau = T::TAU();
        let half = T::FRAC_PI_2();
        let mut events: Vec<(T, bool, usize)> = Vec::with_capacity(2 * self.signed.len() / self.dim);
        let mut ab = Vec::with_capacity(self.signed.len() / self.dim);
        let mut active = Vec::with_capacity(ab.capacity());
        let (mut sum_a, mut sum_b) = (T::zero(), T::zero());
        for (i, s) in self.rows().enumerate() {
            let a = u.dot_slice(s);
            let b = row_dot(s, &v);
            ab.push((a, b));
            let on = a < T::zero();
            active.push(on);
            if on {
                sum_a = sum_a + a;
                sum_b = sum_b + b;
            }
            if a == T::zero() && b == T::zero() {
                continue;
            }
            // a cos t + b sin t = r cos(t - psi) is negative on (psi + pi/2, psi + 3pi/2)
            let psi = b.atan2(a);
            let wrap = |x: T| {
                let w = x % tau;
                let w = if w < T::zero() { w + tau } else { w };
                if w >= tau {
                    T::zero()
                } else {
                    w
                }
            };
            events.push((wrap(psi + half), true, i));
            events.push((wrap(psi - half), false, i));
        }
        events.sort_by(|x, y| x.0.partial_cmp(&y.0).expect("finite").then(x.2.cmp(&y.2)));
        let value_at = |t: T, sa: T, sb: T| -(sa * t.cos() + sb * t.sin());
        let mut n_active = active.iter().filter(|&&x| x).count();
        let mut best = (value_at(T::zero(), sum_a, sum_b), T::zero());
        if events.is_empty() {
            return Some(u.clone());
        }
        // the first arc with an empty active set, if any: its midpoint has
        // risk exactly zero, unlike the kinks bounding it
        let mut zero_arc = None;
        for k in 0..events.len() {
            let (t, enter, i) = events[k];
            let (a, b) = ab[i];
            if enter && !active[i] {
                active[i] = true;
                n_active += 1;
                sum_a = sum_a + a;
                sum_b = sum_b + b;
            } else if !enter && active[i] {
                active[i] = false;
                n_active -= 1;
                sum_a = sum_a - a;
                sum_b = sum_b - b;
            }
            let val = value_at(t, sum_a, sum_b);
            if val < best.0 - self.slack {
                best = (val, t);
            }
            if n_active == 0 && zero_arc.is_none() {
                let next = events.get(k + 1).map_or(events[0].0 + tau, |e| e.0);
                if next > t {
                    zero_arc = Some((t + next) / T::lit(2.0));
                }
            }
        }
        let angle = zero_arc.unwrap_or(best.1);
        let (s, c) = angle.sin_cos();
        let coords = u.coords().iter().zip(&v).map(|(&x, &y)| c * x + s * y).collect();
        UnitVector::normalize(coords).ok()
    }
}
