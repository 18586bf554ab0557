//! Log partition function of the Bernoulli family and its derivatives.

use crate::scalar::Real;

/// `g(eta) = ln(1 + e^eta)`, evaluated without overflow.
#[inline]
pub fn log_partition<T: Real>(eta: T) -> T {
    if eta > T::zero() {
        eta + (-eta).exp().ln_1p()
    } else {
        eta.exp().ln_1p()
    }
}

/// `g'(eta) = 1 / (1 + e^-eta)`. Total on the extended reals.
#[inline]
pub fn logistic_link<T: Real>(eta: T) -> T {
    if eta >= T::zero() {
        T::one() / (T::one() + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (T::one() + e)
    }
}

/// `g''(eta) = g'(eta) g'(-eta)`, written in terms of `e^{-|eta|}`.
#[inline]
pub fn logistic_curvature<T: Real>(eta: T) -> T {
    let e = (-eta.abs()).exp();
    let d = T::one() + e;
    e / (d * d)
}

/// KL divergence between the Bernoulli distributions with natural
/// parameters `eta` and `eta_prime`, in Bregman form:
/// `g(eta') - g(eta) - g'(eta) (eta' - eta)`.
///
/// Rounding can push the result a few ulps below zero when the arguments
/// nearly coincide; it is clamped to zero.
#[inline]
pub fn bernoulli_kl_bregman<T: Real>(eta: T, eta_prime: T) -> T {
    let kl = log_partition(eta_prime) - log_partition(eta) - logistic_link(eta) * (eta_prime - eta);
    kl.max(T::zero())
}
