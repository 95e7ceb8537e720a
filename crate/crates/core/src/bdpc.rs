//! Blind dirty-paper coding over a faded channel with one known and one
//! unknown interference term.
//!
//! The receiver sees `sqrt(a) (x + s1 + s2) + z`; the transmitter knows `s1`
//! but not the fading gain `a`, so the precoding coefficient `alpha` is fixed
//! in advance. Everything here works at the level of the conditional
//! achievable rate `J(alpha, a)` and the outage event `J(alpha, a) <= R`.

use crate::error::{Error, Result};
use crate::fading::FadingModel;
use crate::regions::{layer_rate, PowerAllocation, SystemSpec};
use crate::scalar::{bisect_increasing, Scalar};

/// Powers of the dirty-paper channel and the law of its fading gain.
#[derive(Debug, Clone, PartialEq)]
pub struct DirtyPaperChannel<T> {
    pub power: T,
    /// Power of the interference known to the encoder.
    pub known: T,
    /// Power of the interference nobody knows.
    pub unknown: T,
    pub noise: T,
    pub fading: FadingModel<T>,
}

/// Linear precoding coefficient of the auxiliary `U = x + alpha s1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrecoderChoice<T> {
    pub alpha: T,
}

impl<T: Scalar> DirtyPaperChannel<T> {
    pub fn new(power: T, known: T, unknown: T, noise: T, fading: FadingModel<T>) -> Result<Self> {
        let ok = power.is_finite()
            && power > T::zero()
            && noise.is_finite()
            && noise > T::zero()
            && known.is_finite()
            && known >= T::zero()
            && unknown.is_finite()
            && unknown >= T::zero();
        if !ok {
            return Err(Error::InvalidParameter(format!(
                "need P, N0 > 0 and Q1, Q2 >= 0 (got P={power}, Q1={known}, Q2={unknown}, N0={noise})"
            )));
        }
        Ok(Self {
            power,
            known,
            unknown,
            noise,
            fading,
        })
    }

    /// `J(alpha, a) = ln( P [a (P + Q1 + Q2) + N0] /
    ///   ((1 - alpha)^2 a P Q1 + (P + alpha^2 Q1)(a Q2 + N0)) )`.
    pub fn conditional_rate(&self, alpha: T, a: T) -> T {
        let (p, q1, q2, n0) = (self.power, self.known, self.unknown, self.noise);
        let num = p * (a * (p + q1 + q2) + n0);
        let miss = T::one() - alpha;
        let den = miss * miss * a * p * q1 + (p + alpha * alpha * q1) * (a * q2 + n0);
        (num / den).ln()
    }

    /// Gain threshold `a_th` with `J(alpha, a) <= R  <=>  a <= a_th`.
    ///
    /// `J` is a ratio of affine functions of `a`, so the outage set is a
    /// half-line. Returns `+inf` when `R` is never reached.
    pub fn outage_threshold(&self, alpha: T, rate: T) -> T {
        let (p, q1, q2, n0) = (self.power, self.known, self.unknown, self.noise);
        let growth = rate.exp();
        let miss = T::one() - alpha;
        let lifted = p + alpha * alpha * q1;
        let slope = p * (p + q1 + q2) - growth * (miss * miss * p * q1 + lifted * q2);
        let offset = n0 * (growth * lifted - p);
        if offset < T::zero() {
            // J(alpha, 0) > R, which needs R < 0.
            return T::zero();
        }
        if slope <= T::zero() {
            return T::infinity();
        }
        offset / slope
    }

    /// `P[J(alpha, a) <= R]`.
    pub fn outage_prob(&self, alpha: T, rate: T) -> T {
        self.fading
            .cdf_unchecked(self.outage_threshold(alpha, rate))
    }

    /// Minimum over `alpha` of the outage probability:
    /// `P[R >= ln(1 + P a / (Q2 a + N0))]`, the interference-free outage.
    pub fn min_outage_prob(&self, rate: T) -> T {
        let need = rate.exp_m1();
        let headroom = self.power - need * self.unknown;
        if headroom <= T::zero() {
            return T::one();
        }
        self.fading.cdf_unchecked(self.noise * need / headroom)
    }

    /// Outage probability on `points` equally spaced coefficients in `[0, 1]`.
    pub fn alpha_sweep(&self, rate: T, points: usize) -> Vec<(T, T)> {
        let steps = T::from_usize_lossy(points.max(2) - 1);
        (0..points.max(2))
            .map(|i| {
                let alpha = T::from_usize_lossy(i) / steps;
                (alpha, self.outage_prob(alpha, rate))
            })
            .collect()
    }

    /// Coefficient maximizing `J(., a)` when `a` is known: `aP / (aP + aQ2 + N0)`.
    pub fn alpha_dpc(&self, a: T) -> PrecoderChoice<T> {
        let ap = a * self.power;
        PrecoderChoice {
            alpha: ap / (ap + a * self.unknown + self.noise),
        }
    }

    /// Rate with the informed coefficient, `ln(1 + P a / (Q2 a + N0))`.
    pub fn informed_rate(&self, a: T) -> T {
        (self.power * a / (self.unknown * a + self.noise)).ln_1p()
    }

    /// Unique gain `a*` with `J(alpha_dpc(a*), a*) = R`, by bisection.
    pub fn a_star(&self, rate: T) -> Result<T> {
        if rate.is_nan() || rate < T::zero() {
            return Err(Error::Domain(format!(
                "rate must be nonnegative, got {rate}"
            )));
        }
        if rate == T::zero() {
            return Ok(T::zero());
        }
        let ceiling = if self.unknown > T::zero() {
            (self.power / self.unknown).ln_1p()
        } else {
            T::infinity()
        };
        if rate >= ceiling {
            return Err(Error::Domain(format!(
                "rate {rate} is not achievable; the informed rate saturates at {ceiling}"
            )));
        }
        let mut hi = self.noise / self.power;
        while self.informed_rate(hi) < rate {
            hi = hi * T::lit(2.0);
        }
        Ok(bisect_increasing(
            |a| self.informed_rate(a),
            rate,
            T::zero(),
            hi,
            T::root_tol(),
        ))
    }
}

/// Outage-optimal blind coefficient `alpha* = 1 - e^{-R}`.
pub fn optimal_alpha<T: Scalar>(rate: T) -> Result<PrecoderChoice<T>> {
    if rate.is_nan() || rate < T::zero() {
        return Err(Error::Domain(format!(
            "rate must be nonnegative, got {rate}"
        )));
    }
    Ok(PrecoderChoice {
        alpha: -(-rate).exp_m1(),
    })
}

/// Gain threshold below which user `k` (sorted index) is in outage at rate
/// `R_k`: `(e^R - 1) / (gamma_k rho - (e^R - 1) sum_{m<k} gamma_m rho)`.
/// `+inf` when the denominator is not positive.
pub fn layer_threshold<T: Scalar>(
    spec: &SystemSpec<T>,
    alloc: &PowerAllocation<T>,
    k: usize,
    rate: T,
) -> T {
    if rate == T::zero() {
        return T::zero();
    }
    let rho = spec.rho();
    let gamma = alloc.as_slice();
    let stronger: T = gamma[..k].iter().copied().sum();
    let need = rate.exp_m1();
    let den = gamma[k] * rho - need * stronger * rho;
    if den <= T::zero() {
        T::infinity()
    } else {
        need / den
    }
}

/// Outage of user `k` when its layer is dirty-paper coded against the
/// weaker users' layers and treats the stronger users' layers as noise.
pub fn bdpc_user_outage<T: Scalar>(
    spec: &SystemSpec<T>,
    alloc: &PowerAllocation<T>,
    k: usize,
    rate: T,
) -> T {
    spec.users()[k]
        .model
        .cdf_unchecked(layer_threshold(spec, alloc, k, rate))
}

/// Supremum rate of user `k` meeting its outage target `epsilon_k`, with the
/// quantile gain taken at `epsilon_k`.
pub fn bdpc_max_rate<T: Scalar>(
    spec: &SystemSpec<T>,
    alloc: &PowerAllocation<T>,
    k: usize,
    epsilon: T,
) -> Result<T> {
    let gain = spec.users()[k].model.quantile(epsilon)?;
    let gamma = alloc.as_slice();
    let stronger: T = gamma[..k].iter().copied().sum();
    Ok(layer_rate(gain, gamma[k], stronger, spec.rho()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp1() -> FadingModel<f64> {
        FadingModel::exponential(1.0).unwrap()
    }

    fn ch(p: f64, q1: f64, q2: f64, n0: f64) -> DirtyPaperChannel<f64> {
        DirtyPaperChannel::new(p, q1, q2, n0, exp1()).unwrap()
    }

    #[test]
    fn conditional_rate_examples() {
        let c = ch(3.0, 2.0, 0.5, 1.5);
        let a = 0.7;
        let treat_as_noise = ((a * 5.5 + 1.5) / (a * 2.5 + 1.5f64)).ln();
        assert!((c.conditional_rate(0.0, a) - treat_as_noise).abs() < 1e-14);
        let c = ch(1.0, 1.0, 0.0, 1.0);
        assert!((c.conditional_rate(0.5, 1.0) - 2f64.ln()).abs() < 1e-15);
        let c = ch(2.0, 0.0, 0.5, 1.0);
        let clean = (2.0 * (0.3 * 2.5 + 1.0) / (2.0 * (0.3 * 0.5 + 1.0f64))).ln();
        for alpha in [-1.0, 0.0, 0.4, 2.0] {
            assert!((c.conditional_rate(alpha, 0.3) - clean).abs() < 1e-14);
        }
    }

    #[test]
    fn optimal_alpha_examples() {
        assert_eq!(optimal_alpha(0.0).unwrap().alpha, 0.0);
        assert!((optimal_alpha(2f64.ln()).unwrap().alpha - 0.5).abs() < 1e-15);
        let mut prev = 0.0;
        for r in [0.1, 1.0, 5.0, 20.0, 40.0] {
            let a = optimal_alpha(r).unwrap().alpha;
            assert!(a > prev && a <= 1.0);
            prev = a;
        }
        assert!(optimal_alpha(-0.1f64).is_err());
        // Virtual-SNR form rho*/(1 + rho*).
        let r = 0.8f64;
        let v = r.exp() - 1.0;
        assert!((optimal_alpha(r).unwrap().alpha - v / (1.0 + v)).abs() < 1e-15);
    }

    #[test]
    fn thresholds_and_outage() {
        let c = ch(10.0, 0.0, 0.0, 1.0);
        for alpha in [0.0, 0.3, 0.9] {
            assert!((c.outage_threshold(alpha, 2f64.ln()) - 0.1).abs() < 1e-14);
        }
        assert!((c.outage_prob(0.3, 2f64.ln()) - 0.095163).abs() < 1e-6);
        assert_eq!(c.outage_threshold(0.0, 0.0), 0.0);
        assert_eq!(c.outage_prob(0.0, 0.0), 0.0);
        let sat = ch(1.0, 0.5, 4.0, 1.0);
        assert_eq!(sat.outage_threshold(0.5, 1.0), f64::INFINITY);
        assert_eq!(sat.outage_prob(0.5, 1.0), 1.0);
    }

    #[test]
    fn min_outage_examples() {
        let c = ch(10.0, 0.0, 0.0, 1.0);
        assert!((c.min_outage_prob(2f64.ln()) - 0.095163).abs() < 1e-6);
        assert_eq!(c.min_outage_prob(0.0), 0.0);
        let sat = ch(1.0, 3.0, 1.0, 1.0);
        assert_eq!(sat.min_outage_prob(1.0), 1.0);
    }

    #[test]
    fn optimal_alpha_attains_minimum_exactly() {
        let c = ch(4.0, 3.0, 0.7, 2.0);
        for r in [0.05, 0.4, 1.0, 1.5] {
            let a = optimal_alpha(r).unwrap().alpha;
            assert!((c.outage_prob(a, r) - c.min_outage_prob(r)).abs() < 1e-13);
        }
    }

    #[test]
    fn alpha_dpc_and_a_star() {
        let c = ch(1.0, 0.3, 0.0, 1.0);
        assert_eq!(c.alpha_dpc(0.0).alpha, 0.0);
        assert!((c.alpha_dpc(1.0).alpha - 0.5).abs() < 1e-15);
        let c = ch(1.0, 0.3, 0.25, 1.0);
        assert!((c.alpha_dpc(1e12).alpha - 0.8).abs() < 1e-10);
        let c = ch(10.0, 2.0, 0.0, 1.0);
        assert!((c.a_star(2f64.ln()).unwrap() - 0.1).abs() < 1e-12);
        assert_eq!(c.a_star(0.0).unwrap(), 0.0);
        let sat = ch(1.0, 0.0, 1.0, 1.0);
        assert!(sat.a_star(2f64.ln()).is_err());
    }

    #[test]
    fn user_outage_case_study() {
        let spec = SystemSpec::<f64>::new(
            100.0,
            vec![
                (FadingModel::exponential(10.0).unwrap(), 0.01),
                (FadingModel::exponential(1.0).unwrap(), 0.01),
            ],
        )
        .unwrap();
        let g = PowerAllocation::new(vec![0.5, 0.5]).unwrap();
        let t = layer_threshold(&spec, &g, 1, 0.28);
        assert!((t - 0.0095478).abs() < 1e-7);
        let p = bdpc_user_outage(&spec, &g, 1, 0.28);
        assert!((p - 0.0095024).abs() < 1e-7 && p < 0.01);
        assert_eq!(bdpc_user_outage(&spec, &g, 1, 0.0), 0.0);
        assert_eq!(bdpc_user_outage(&spec, &g, 1, 5.0), 1.0);
        let r0 = bdpc_max_rate(&spec, &g, 0, 0.01).unwrap();
        let r1 = bdpc_max_rate(&spec, &g, 1, 0.01).unwrap();
        assert!((r0 - 1.795945).abs() < 1e-6 && (r1 - 0.288519).abs() < 1e-6);
        let zero = PowerAllocation::new(vec![1.0, 0.0]).unwrap();
        assert_eq!(bdpc_max_rate(&spec, &zero, 1, 0.01).unwrap(), 0.0);
    }
}
