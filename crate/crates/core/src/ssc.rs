//! Statistical superposition coding: independently coded layers, and
//! receivers that run a successive-decoding cascade whose path depends on the
//! realized fading gain.
//!
//! Receiver `k` (sorted index) attempts layers `K-1, K-2, ..., k` in turn.
//! A decoded layer is cancelled; a failed layer stays in the noise for every
//! later step. [`DecodingIndicator`] records the outcome of each attempt.

use rayon::prelude::*;

use crate::bdpc::layer_threshold;
use crate::error::{Error, Result};
use crate::regions::{star_rate, PowerAllocation, RatePoint, SystemSpec};
use crate::rng::substream_seed;
use crate::scalar::Scalar;

/// Per-attempt success bits of one cascade, in decoding order: element `l`
/// refers to layer `K-1-l` (weakest user first, the receiver's own layer last).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodingIndicator {
    receiver: usize,
    bits: Vec<bool>,
}

impl DecodingIndicator {
    pub fn receiver(&self) -> usize {
        self.receiver
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// Whether the receiver recovered its own message.
    pub fn own_success(&self) -> bool {
        *self
            .bits
            .last()
            .expect("indicator has at least one attempt")
    }

    /// True when the decoded layers are exactly the weakest users down to
    /// some index, i.e. no success follows a failure.
    pub fn is_suffix_form(&self) -> bool {
        self.bits.windows(2).all(|w| w[0] || !w[1])
    }

    /// Renders as `[1, 0, 0]`.
    pub fn to_bit_string(&self) -> String {
        let inner: Vec<&str> = self
            .bits
            .iter()
            .map(|b| if *b { "1" } else { "0" })
            .collect();
        format!("[{}]", inner.join(", "))
    }
}

/// Runs the cascade of receiver `k` at realized gain `a`.
///
/// The attempt on layer `j` succeeds iff
/// `R_j < ln(1 + a gamma_j rho / (1 + a rho (sum_{i<j} gamma_i + undecoded above j)))`.
pub fn cascade<T: Scalar>(
    spec: &SystemSpec<T>,
    alloc: &PowerAllocation<T>,
    rates: &RatePoint<T>,
    k: usize,
    a: T,
) -> DecodingIndicator {
    let gamma = alloc.as_slice();
    let rates = rates.as_slice();
    let num = spec.num_users();
    assert!(k < num, "receiver index out of range");
    assert!(
        gamma.len() == num && rates.len() == num,
        "one entry per user"
    );
    let rho = spec.rho();
    let mut below: T = gamma[..num - 1].iter().copied().sum();
    let mut failed_above = T::zero();
    let mut bits = Vec::with_capacity(num - k);
    for j in (k..num).rev() {
        let interference = below + failed_above;
        let sinr = a * gamma[j] * rho / (T::one() + a * rho * interference);
        let ok = rates[j] < sinr.ln_1p();
        if !ok {
            failed_above = failed_above + gamma[j];
        }
        bits.push(ok);
        if j > 0 {
            below = below - gamma[j - 1];
        }
    }
    DecodingIndicator { receiver: k, bits }
}

/// Checks that `rates` is strictly inside the boundary for `alloc` on every user.
pub fn check_in_region<T: Scalar>(
    spec: &SystemSpec<T>,
    alloc: &PowerAllocation<T>,
    rates: &RatePoint<T>,
) -> Result<()> {
    let limit = star_rate(spec, alloc);
    for (j, (r, m)) in rates.as_slice().iter().zip(limit.as_slice()).enumerate() {
        if m.is_nan() || r >= m {
            return Err(Error::Precondition(format!(
                "rate {r} of user {} is not below its boundary {m} for this allocation",
                j + 1
            )));
        }
    }
    Ok(())
}

/// Closed-form outage of receiver `k`: `F_k(max_{j >= k} t_j)` with `t_j` the
/// layer thresholds.
///
/// Requires a sorted spec and rates inside the region for `alloc`. The
/// value is exact whenever every cascade is of suffix form, and an upper
/// bound otherwise; either way it does not exceed `epsilon_k`.
pub fn analytic_outage<T: Scalar>(
    spec: &SystemSpec<T>,
    alloc: &PowerAllocation<T>,
    rates: &RatePoint<T>,
    k: usize,
) -> Result<T> {
    if !spec.is_sorted() {
        return Err(Error::Precondition(
            "users must be sorted by quantile gain".into(),
        ));
    }
    check_in_region(spec, alloc, rates)?;
    let worst = (k..spec.num_users())
        .map(|j| layer_threshold(spec, alloc, j, rates.as_slice()[j]))
        .fold(T::zero(), T::max);
    Ok(spec.users()[k].model.cdf_unchecked(worst))
}

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `count` successes in `n` trials.
pub fn wilson_interval(count: u64, n: u64, z: f64) -> (f64, f64) {
    let nf = n as f64;
    let p = count as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let centre = (p + z2 / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    (
        (centre - half).max(0.0).min(p),
        (centre + half).min(1.0).max(p),
    )
}

/// Monte Carlo outcome for one user.
#[derive(Debug, Clone, PartialEq)]
pub struct UserEstimate {
    pub samples: u64,
    pub outages: u64,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Cascades whose indicator was not of suffix form.
    pub violations: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct McReport {
    pub seed: u64,
    pub samples: u64,
    /// Per user, in sorted order.
    pub users: Vec<UserEstimate>,
}

impl McReport {
    pub fn total_violations(&self) -> u64 {
        self.users.iter().map(|u| u.violations).sum()
    }
}

/// Seed of the gain stream of sorted user `k`.
pub fn user_stream_seed(seed: u64, k: usize) -> u64 {
    substream_seed(seed, k as u64)
}

/// Draws `n` gains per user, runs the cascade for each draw and counts
/// own-message failures and non-suffix indicators.
///
/// Gains of user `k` come from [`user_stream_seed`]; cascades are evaluated
/// in parallel and aggregated by counting, so the report is identical for
/// any number of worker threads.
pub fn mc_outage<T: Scalar>(
    spec: &SystemSpec<T>,
    alloc: &PowerAllocation<T>,
    rates: &RatePoint<T>,
    n: usize,
    seed: u64,
) -> Result<McReport> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "sample count must be at least 1".into(),
        ));
    }
    let users = (0..spec.num_users())
        .map(|k| {
            let gains = spec.users()[k].model.sample(user_stream_seed(seed, k), n);
            let (outages, violations) = gains
                .par_chunks(4096)
                .map(|chunk| {
                    chunk.iter().fold((0u64, 0u64), |(out, bad), &a| {
                        let d = cascade(spec, alloc, rates, k, a);
                        (
                            out + u64::from(!d.own_success()),
                            bad + u64::from(!d.is_suffix_form()),
                        )
                    })
                })
                .reduce(|| (0, 0), |x, y| (x.0 + y.0, x.1 + y.1));
            let samples = n as u64;
            let (ci_low, ci_high) = wilson_interval(outages, samples, Z95);
            UserEstimate {
                samples,
                outages,
                estimate: outages as f64 / samples as f64,
                ci_low,
                ci_high,
                violations,
            }
        })
        .collect();
    Ok(McReport {
        seed,
        samples: n as u64,
        users,
    })
}

/// Total number of non-suffix indicators over `n` draws for every receiver.
///
/// Zero is expected for sorted specs with rates close to the boundary; the
/// checker itself runs on any ordering so it can exhibit counterexamples.
pub fn suffix_claim_check<T: Scalar>(
    spec: &SystemSpec<T>,
    alloc: &PowerAllocation<T>,
    rates: &RatePoint<T>,
    n: usize,
    seed: u64,
) -> Result<u64> {
    Ok(mc_outage(spec, alloc, rates, n, seed)?.total_violations())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bdpc::bdpc_user_outage;
    use crate::fading::FadingModel;

    fn fig2() -> SystemSpec<f64> {
        SystemSpec::new(
            100.0,
            vec![
                (FadingModel::exponential(10.0).unwrap(), 0.01),
                (FadingModel::exponential(1.0).unwrap(), 0.01),
            ],
        )
        .unwrap()
    }

    fn half() -> PowerAllocation<f64> {
        PowerAllocation::new(vec![0.5, 0.5]).unwrap()
    }

    fn rates(v: &[f64]) -> RatePoint<f64> {
        RatePoint::new(v.to_vec()).unwrap()
    }

    #[test]
    fn cascade_examples() {
        let s = fig2();
        let r = rates(&[1.79, 0.288]);
        let d = cascade(&s, &half(), &r, 0, 0.2);
        assert_eq!(d.bits(), &[true, true]);
        let d = cascade(&s, &half(), &r, 0, 0.05);
        assert_eq!(d.bits(), &[true, false]);
        assert!(!d.own_success() && d.is_suffix_form());
        let d = cascade(&s, &half(), &r, 0, 0.0);
        assert_eq!(d.bits(), &[false, false]);
        assert_eq!(d.to_bit_string(), "[0, 0]");
        let d = cascade(&s, &half(), &r, 1, 0.02);
        assert_eq!(d.bits().len(), 1);
    }

    #[test]
    fn suffix_form_detection() {
        let d = |bits: &[bool]| DecodingIndicator {
            receiver: 0,
            bits: bits.to_vec(),
        };
        assert!(d(&[true, true, true]).is_suffix_form());
        assert!(d(&[true, true, false]).is_suffix_form());
        assert!(d(&[true, false, false]).is_suffix_form());
        assert!(d(&[false, false, false]).is_suffix_form());
        assert!(!d(&[true, false, true]).is_suffix_form());
        assert!(!d(&[false, true]).is_suffix_form());
    }

    #[test]
    fn analytic_outage_case_study() {
        let s = fig2();
        let r = rates(&[1.79, 0.288]);
        let p1 = analytic_outage(&s, &half(), &r, 0).unwrap();
        // t1 = (e^1.79 - 1) / 50 exceeds t2, so F1(t1) with the mean-10 law.
        let t1 = (1.79f64.exp() - 1.0) / 50.0;
        assert!((p1 - (1.0 - (-t1 / 10.0).exp())).abs() < 1e-15);
        assert!((p1 - 0.009929281).abs() < 1e-8);
        let p2 = analytic_outage(&s, &half(), &r, 1).unwrap();
        assert_eq!(p2, bdpc_user_outage(&s, &half(), 1, 0.288));
        assert!(p1 <= 0.01 && p2 <= 0.01);
        let tiny = analytic_outage(&s, &half(), &rates(&[1e-9, 1e-9]), 0).unwrap();
        assert!(tiny < 1e-9);
    }

    #[test]
    fn analytic_outage_refuses_out_of_region() {
        let s = fig2();
        assert!(matches!(
            analytic_outage(&s, &half(), &rates(&[1.8, 0.1]), 0),
            Err(Error::Precondition(_))
        ));
        let unsorted = SystemSpec::in_given_order(
            100.0,
            vec![
                (FadingModel::exponential(1.0).unwrap(), 0.01),
                (FadingModel::exponential(10.0).unwrap(), 0.01),
            ],
        )
        .unwrap();
        assert!(analytic_outage(&unsorted, &half(), &rates(&[0.01, 0.01]), 0).is_err());
    }

    #[test]
    fn oversized_rates_always_fail() {
        let s = fig2();
        let r = rates(&[50.0, 50.0]);
        let rep = mc_outage(&s, &half(), &r, 1000, 3).unwrap();
        assert!(rep
            .users
            .iter()
            .all(|u| u.outages == 1000 && u.estimate == 1.0));
    }

    #[test]
    fn wilson_interval_contains_estimate() {
        for (c, n) in [(0u64, 10u64), (10, 10), (3, 1000), (500, 1000)] {
            let (lo, hi) = wilson_interval(c, n, Z95);
            let p = c as f64 / n as f64;
            assert!(lo <= p && p <= hi && lo >= 0.0 && hi <= 1.0);
        }
    }

    #[test]
    fn three_user_exhaustive_atoms() {
        // Quantile gains 0.3, 0.1, 0.01 at epsilon 0.5 (second of four atoms).
        let atoms = |g: f64| FadingModel::empirical(vec![g / 4.0, g, 3.0 * g, 30.0 * g]).unwrap();
        let s = SystemSpec::new(
            10.0,
            vec![(atoms(0.3), 0.5), (atoms(0.1), 0.5), (atoms(0.01), 0.5)],
        )
        .unwrap();
        assert_eq!(s.gains(), vec![0.3, 0.1, 0.01]);
        let g = PowerAllocation::new(vec![0.2, 0.3, 0.5]).unwrap();
        let r = star_rate(&s, &g).scaled(0.99);
        for k in 0..3 {
            let mut values: Vec<f64> = s
                .users()
                .iter()
                .flat_map(|u| match u.model.kind() {
                    crate::fading::FadingKind::Empirical { samples } => samples.clone(),
                    _ => unreachable!(),
                })
                .collect();
            values.push(0.0);
            for a in values {
                let d = cascade(&s, &g, &r, k, a);
                assert!(
                    d.is_suffix_form(),
                    "receiver {k}, a = {a}: {}",
                    d.to_bit_string()
                );
                assert_ne!(d.bits(), &[true, false, true]);
            }
        }
    }

    #[test]
    fn deep_interior_rates_can_break_suffix_form_without_breaking_outage() {
        // Equal gains and a rate-starved strong user: receiver 1 cannot decode
        // layer 2 below t2 yet still decodes its own tiny-rate layer.
        let s = SystemSpec::new(
            10.0,
            vec![
                (FadingModel::exponential(1.0).unwrap(), 0.1),
                (FadingModel::exponential(1.0).unwrap(), 0.1),
            ],
        )
        .unwrap();
        let g = PowerAllocation::new(vec![0.5, 0.5]).unwrap();
        let top = star_rate(&s, &g);
        let r = rates(&[0.01, 0.99 * top.as_slice()[1]]);
        let t2 = layer_threshold(&s, &g, 1, r.as_slice()[1]);
        let d = cascade(&s, &g, &r, 0, 0.9 * t2);
        assert_eq!(d.bits(), &[false, true]);
        let bound = analytic_outage(&s, &g, &r, 0).unwrap();
        let rep = mc_outage(&s, &g, &r, 20_000, 5).unwrap();
        assert!(rep.users[0].violations > 0);
        assert!(rep.users[0].estimate <= bound);
        assert!(bound <= 0.1);
    }
}
