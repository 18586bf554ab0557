use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// A point on the unit sphere `S^{d-1}`, `d >= 2`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct UnitVector<T: Real = f64> {
    coords: Vec<T>,
}

fn norm<T: Real>(v: &[T]) -> T {
    let scale = v.iter().fold(T::zero(), |m, x| m.max(x.abs()));
    if scale == T::zero() || !scale.is_finite() {
        return scale;
    }
    let ss = v.iter().fold(T::zero(), |acc, &x| {
        let r = x / scale;
        acc + r * r
    });
    scale * ss.sqrt()
}

impl<T: Real> UnitVector<T> {
    /// Wraps coordinates that are already unit norm.
    pub fn new(coords: Vec<T>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::DimensionTooSmall(coords.len()));
        }
        let n = norm(&coords);
        if (n - T::one()).abs() > T::unit_tolerance() {
            return Err(Error::NotUnit(n.as_f64()));
        }
        Ok(Self { coords })
    }

    /// Rescales a nonzero vector onto the sphere.
    pub fn normalize(mut coords: Vec<T>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::DimensionTooSmall(coords.len()));
        }
        let n = norm(&coords);
        if n == T::zero() || !n.is_finite() {
            return Err(Error::DegenerateVector);
        }
        coords.iter_mut().for_each(|x| *x = *x / n);
        Ok(Self { coords })
    }

    /// Uniform draw on the sphere (normalized Gaussian vector).
    pub fn uniform<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<Self> {
        if dim < 2 {
            return Err(Error::DimensionTooSmall(dim));
        }
        loop {
            let v: Vec<T> = (0..dim).map(|_| T::standard_normal(rng)).collect();
            if let Ok(u) = Self::normalize(v) {
                return Ok(u);
            }
        }
    }

    pub fn basis(dim: usize, axis: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::DimensionTooSmall(dim));
        }
        if axis >= dim {
            return Err(Error::DimensionMismatch { expected: dim, got: axis });
        }
        let mut coords = vec![T::zero(); dim];
        coords[axis] = T::one();
        Ok(Self { coords })
    }

    /// `cos(angle) u + sin(angle) w` where `w` is the unit tangent obtained by
    /// projecting `direction` off `self`.
    pub fn rotate_towards(&self, direction: &[T], angle: T) -> Result<Self> {
        self.check_len(direction.len())?;
        let along = dot(&self.coords, direction);
        let tangent: Vec<T> = direction
            .iter()
            .zip(&self.coords)
            .map(|(&d, &u)| d - along * u)
            .collect();
        let tn = norm(&tangent);
        if tn <= T::epsilon() * T::lit(64.0) * norm(direction) {
            return Err(Error::Degenerate("direction is parallel to the base point".into()));
        }
        let (s, c) = angle.sin_cos();
        let coords = self
            .coords
            .iter()
            .zip(&tangent)
            .map(|(&u, &t)| c * u + s * t / tn)
            .collect();
        Self::normalize(coords)
    }

    /// A random point at Euclidean (chord) distance `dist` from `self`.
    pub fn random_at_distance<R: Rng + ?Sized>(&self, dist: T, rng: &mut R) -> Result<Self> {
        let rho = crate::model::param_distance_to_correlation(dist)?;
        let angle = rho.max(-T::one()).min(T::one()).acos();
        loop {
            let dir: Vec<T> = (0..self.dim()).map(|_| T::standard_normal(rng)).collect();
            if let Ok(p) = self.rotate_towards(&dir, angle) {
                return Ok(p);
            }
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    #[inline]
    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    pub fn into_inner(self) -> Vec<T> {
        self.coords
    }

    #[inline]
    pub fn dot(&self, other: &Self) -> T {
        dot(&self.coords, &other.coords)
    }

    /// Inner product with an arbitrary vector of the same length.
    #[inline]
    pub fn dot_slice(&self, v: &[T]) -> T {
        dot(&self.coords, v)
    }

    pub fn distance(&self, other: &Self) -> T {
        let d: Vec<T> = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(&a, &b)| a - b)
            .collect();
        norm(&d)
    }

    pub fn negated(&self) -> Self {
        Self {
            coords: self.coords.iter().map(|&x| -x).collect(),
        }
    }

    pub fn norm(&self) -> T {
        norm(&self.coords)
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<()> {
        if len != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: len,
            });
        }
        Ok(())
    }

    pub fn cast<U: Real>(&self) -> UnitVector<U> {
        UnitVector {
            coords: self.coords.iter().map(|x| U::lit(x.as_f64())).collect(),
        }
    }
}

#[inline]
pub(crate) fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

pub(crate) fn vector_norm<T: Real>(v: &[T]) -> T {
    norm(v)
}

/// Inverse temperature `beta in (0, inf]`.
///
/// `Infinite` is a distinguished state (noiseless halfspace labels), never a
/// floating point infinity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InverseTemperature<T: Real = f64> {
    Finite(T),
    Infinite,
}

impl<T: Real> InverseTemperature<T> {
    pub fn finite(beta: T) -> Result<Self> {
        if beta > T::zero() && beta.is_finite() {
            Ok(Self::Finite(beta))
        } else {
            Err(Error::InvalidBeta(beta.as_f64()))
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Self::Infinite)
    }

    pub fn value(&self) -> Option<T> {
        match *self {
            Self::Finite(b) => Some(b),
            Self::Infinite => None,
        }
    }

    /// Value used for sorting and plotting; `Infinite` maps to `+inf`.
    pub fn as_f64_extended(&self) -> f64 {
        match *self {
            Self::Finite(b) => b.as_f64(),
            Self::Infinite => f64::INFINITY,
        }
    }
}

impl<T: Real> fmt::Display for InverseTemperature<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(b) => write!(f, "{b}"),
            Self::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for InverseTemperature<f64> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinity") {
            return Ok(Self::Infinite);
        }
        let v: f64 = t
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("cannot parse inverse temperature '{t}'")))?;
        Self::finite(v)
    }
}

impl Serialize for InverseTemperature<f64> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Self::Finite(b) => s.serialize_f64(*b),
            Self::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for InverseTemperature<f64> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Int(i64),
            Text(String),
        }
        let parsed = match Raw::deserialize(d)? {
            Raw::Num(v) => Self::finite(v),
            Raw::Int(v) => Self::finite(v as f64),
            Raw::Text(s) => s.parse(),
        };
        parsed.map_err(serde::de::Error::custom)
    }
}

/// Binary response in `{-1, +1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    pub fn from_int(v: i64) -> Result<Self> {
        match v {
            -1 => Ok(Self::Negative),
            1 => Ok(Self::Positive),
            other => Err(Error::InvalidLabel(other)),
        }
    }

    /// `h(x) = +1` iff the score is strictly positive.
    #[inline]
    pub fn from_score<T: Real>(score: T) -> Self {
        if score > T::zero() {
            Self::Positive
        } else {
            Self::Negative
        }
    }

    #[inline]
    pub fn sign<T: Real>(self) -> T {
        match self {
            Self::Negative => -T::one(),
            Self::Positive => T::one(),
        }
    }

    #[inline]
    pub fn as_int(self) -> i8 {
        match self {
            Self::Negative => -1,
            Self::Positive => 1,
        }
    }

    #[inline]
    pub fn flipped(self) -> Self {
        match self {
            Self::Negative => Self::Positive,
            Self::Positive => Self::Negative,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledSample<T: Real = f64> {
    pub covariate: Vec<T>,
    pub label: Label,
}

/// An ordered collection of labeled samples sharing one dimension,
/// stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset<T: Real = f64> {
    dim: usize,
    covariates: Vec<T>,
    labels: Vec<Label>,
}

impl<T: Real> Dataset<T> {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::DimensionTooSmall(dim));
        }
        Ok(Self {
            dim,
            covariates: Vec::new(),
            labels: Vec::new(),
        })
    }

    pub fn with_capacity(dim: usize, n: usize) -> Result<Self> {
        let mut ds = Self::new(dim)?;
        ds.covariates.reserve(n * dim);
        ds.labels.reserve(n);
        Ok(ds)
    }

    pub fn from_samples(dim: usize, samples: impl IntoIterator<Item = LabeledSample<T>>) -> Result<Self> {
        let mut ds = Self::new(dim)?;
        for s in samples {
            ds.push(&s.covariate, s.label)?;
        }
        Ok(ds)
    }

    pub fn push(&mut self, covariate: &[T], label: Label) -> Result<()> {
        if covariate.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: covariate.len(),
            });
        }
        self.covariates.extend_from_slice(covariate);
        self.labels.push(label);
        Ok(())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    #[inline]
    pub fn covariate(&self, i: usize) -> &[T] {
        &self.covariates[i * self.dim..(i + 1) * self.dim]
    }

    #[inline]
    pub fn label(&self, i: usize) -> Label {
        self.labels[i]
    }

    pub fn sample(&self, i: usize) -> LabeledSample<T> {
        LabeledSample {
            covariate: self.covariate(i).to_vec(),
            label: self.labels[i],
        }
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = (&[T], Label)> + '_ {
        self.covariates
            .chunks_exact(self.dim)
            .zip(self.labels.iter().copied())
    }

    /// Row-major `y_i x_i`; every estimator's objective depends on the data
    /// only through these vectors.
    pub fn signed_covariates(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.covariates.len());
        for (x, y) in self.iter() {
            let s = y.sign::<T>();
            out.extend(x.iter().map(|&v| s * v));
        }
        out
    }

    pub fn concat(&self, other: &Self) -> Result<Self> {
        if other.dim != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        let mut out = self.clone();
        out.covariates.extend_from_slice(&other.covariates);
        out.labels.extend_from_slice(&other.labels);
        Ok(out)
    }

    pub fn with_flipped_labels(&self) -> Self {
        Self {
            dim: self.dim,
            covariates: self.covariates.clone(),
            labels: self.labels.iter().map(|l| l.flipped()).collect(),
        }
    }

    /// Applies `f` to every covariate vector, keeping labels.
    pub fn map_covariates(&self, mut f: impl FnMut(&[T]) -> Vec<T>) -> Result<Self> {
        let mut out = Self::with_capacity(self.dim, self.len())?;
        for (x, y) in self.iter() {
            out.push(&f(x), y)?;
        }
        Ok(out)
    }
}
