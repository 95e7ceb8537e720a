//! Per-allocation rate vectors for the superposition region and for
//! time-sharing, plus closed-form region membership.
//!
//! Users are indexed from 0 in sorted order (largest quantile gain first).
//! All rates are in nats per channel use.

use crate::error::{Error, Result};
use crate::fading::FadingModel;
use crate::scalar::Scalar;

/// One receiver: its fading law, outage target and cached quantile gain
/// `g = G(epsilon)`.
#[derive(Debug, Clone, PartialEq)]
pub struct User<T> {
    pub model: FadingModel<T>,
    pub epsilon: T,
    pub gain: T,
}

/// Average SNR plus the users, kept in decreasing order of quantile gain.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec<T> {
    rho: T,
    users: Vec<User<T>>,
    /// `order[k]` is the caller's index of sorted user `k`.
    order: Vec<usize>,
}

impl<T: Scalar> SystemSpec<T> {
    /// Builds the spec and stably sorts users so that `g_1 >= g_2 >= ... >= g_K`.
    pub fn new(rho: T, users: Vec<(FadingModel<T>, T)>) -> Result<Self> {
        let mut spec = Self::in_given_order(rho, users)?;
        let mut idx: Vec<usize> = (0..spec.users.len()).collect();
        idx.sort_by(|&a, &b| {
            spec.users[b]
                .gain
                .partial_cmp(&spec.users[a].gain)
                .expect("finite gains")
        });
        let mut slots: Vec<Option<User<T>>> = spec.users.drain(..).map(Some).collect();
        spec.users = idx
            .iter()
            .map(|&i| slots[i].take().expect("each index once"))
            .collect();
        spec.order = idx;
        Ok(spec)
    }

    /// Builds the spec keeping the caller's ordering, sorted or not.
    ///
    /// Rate formulas still apply in this order; the resulting region is only
    /// the largest one when the ordering happens to be sorted.
    pub fn in_given_order(rho: T, users: Vec<(FadingModel<T>, T)>) -> Result<Self> {
        if !(rho.is_finite() && rho > T::zero()) {
            return Err(Error::InvalidParameter(format!(
                "rho must be positive, got {rho}"
            )));
        }
        if users.is_empty() {
            return Err(Error::InvalidParameter(
                "at least one user is required".into(),
            ));
        }
        let users = users
            .into_iter()
            .map(|(model, epsilon)| {
                if !(epsilon > T::zero() && epsilon < T::one()) {
                    return Err(Error::InvalidParameter(format!(
                        "epsilon must lie in (0, 1), got {epsilon}"
                    )));
                }
                let gain = model.quantile(epsilon)?;
                Ok(User {
                    model,
                    epsilon,
                    gain,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let order = (0..users.len()).collect();
        Ok(Self { rho, users, order })
    }

    /// Same users with a different SNR.
    pub fn with_rho(&self, rho: T) -> Result<Self> {
        if !(rho.is_finite() && rho > T::zero()) {
            return Err(Error::InvalidParameter(format!(
                "rho must be positive, got {rho}"
            )));
        }
        Ok(Self {
            rho,
            ..self.clone()
        })
    }

    pub fn rho(&self) -> T {
        self.rho
    }

    pub fn users(&self) -> &[User<T>] {
        &self.users
    }

    pub fn num_users(&self) -> usize {
        self.users.len()
    }

    pub fn gain(&self, k: usize) -> T {
        self.users[k].gain
    }

    pub fn gains(&self) -> Vec<T> {
        self.users.iter().map(|u| u.gain).collect()
    }

    /// Caller's index of each sorted user.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn is_sorted(&self) -> bool {
        self.users.windows(2).all(|w| w[0].gain >= w[1].gain)
    }

    /// Reorders per-user values given in the caller's order into sorted order.
    pub fn to_sorted_order<V: Clone>(&self, original: &[V]) -> Vec<V> {
        assert_eq!(original.len(), self.users.len(), "one value per user");
        self.order.iter().map(|&i| original[i].clone()).collect()
    }

    /// Reorders per-user values given in sorted order back into the caller's order.
    pub fn to_original_order<V: Clone>(&self, sorted: &[V]) -> Vec<V> {
        assert_eq!(sorted.len(), self.users.len(), "one value per user");
        let mut out: Vec<Option<V>> = vec![None; sorted.len()];
        for (k, &orig) in self.order.iter().enumerate() {
            out[orig] = Some(sorted[k].clone());
        }
        out.into_iter().map(|v| v.expect("permutation")).collect()
    }
}

/// Power split `gamma` over the users; entries in `[0, 1]` summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation<T>(Vec<T>);

impl<T: Scalar> PowerAllocation<T> {
    pub fn new(gamma: Vec<T>) -> Result<Self> {
        check_simplex("gamma", &gamma)?;
        Ok(Self(gamma))
    }

    pub fn uniform(k: usize) -> Self {
        Self(vec![T::one() / T::from_usize_lossy(k); k])
    }

    /// Whole power to user `index` out of `len`.
    pub fn vertex(len: usize, index: usize) -> Self {
        let mut v = vec![T::zero(); len];
        v[index] = T::one();
        Self(v)
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<T> {
        self.0
    }
}

fn check_simplex<T: Scalar>(name: &str, v: &[T]) -> Result<()> {
    if v.is_empty() {
        return Err(Error::InvalidParameter(format!("{name} must be nonempty")));
    }
    let tol = T::root_tol();
    if let Some(x) = v.iter().find(|x| !(**x >= -tol && **x <= T::one() + tol)) {
        return Err(Error::InvalidParameter(format!(
            "{name} entries must lie in [0, 1], got {x}"
        )));
    }
    let sum: T = v.iter().copied().sum();
    if (sum - T::one()).abs() > tol {
        return Err(Error::InvalidParameter(format!(
            "{name} must sum to 1, got {sum}"
        )));
    }
    Ok(())
}

/// Rate vector in nats per channel use.
#[derive(Debug, Clone, PartialEq)]
pub struct RatePoint<T>(Vec<T>);

impl<T: Scalar> RatePoint<T> {
    pub fn new(rates: Vec<T>) -> Result<Self> {
        if let Some(r) = rates.iter().find(|r| !(r.is_finite() && **r >= T::zero())) {
            return Err(Error::InvalidParameter(format!(
                "rates must be finite and nonnegative, got {r}"
            )));
        }
        Ok(Self(rates))
    }

    pub fn zeros(k: usize) -> Self {
        Self(vec![T::zero(); k])
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sum(&self) -> T {
        self.0.iter().copied().sum()
    }

    /// Scales every component by `factor`.
    pub fn scaled(&self, factor: T) -> Self {
        Self(self.0.iter().map(|r| *r * factor).collect())
    }

    /// `self >= other` componentwise with at least one strict inequality.
    pub fn dominates(&self, other: &Self) -> bool {
        let mut strict = false;
        for (a, b) in self.0.iter().zip(&other.0) {
            if a < b {
                return false;
            }
            if a > b {
                strict = true;
            }
        }
        strict
    }

    pub fn into_inner(self) -> Vec<T> {
        self.0
    }
}

/// Airtime shares `mu` and per-slot power factors `eta` with
/// `sum mu = 1` and `sum mu * eta = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSharingPolicy<T> {
    mu: Vec<T>,
    eta: Vec<T>,
}

impl<T: Scalar> TimeSharingPolicy<T> {
    pub fn new(mu: Vec<T>, eta: Vec<T>) -> Result<Self> {
        check_simplex("mu", &mu)?;
        if mu.len() != eta.len() {
            return Err(Error::InvalidParameter("mu and eta lengths differ".into()));
        }
        if let Some(e) = eta.iter().find(|e| !(e.is_finite() && **e >= T::zero())) {
            return Err(Error::InvalidParameter(format!(
                "eta must be nonnegative, got {e}"
            )));
        }
        let energy: T = mu.iter().zip(&eta).map(|(m, e)| *m * *e).sum();
        if (energy - T::one()).abs() > T::root_tol() {
            return Err(Error::InvalidParameter(format!(
                "sum of mu * eta must be 1, got {energy}"
            )));
        }
        Ok(Self { mu, eta })
    }

    pub fn mu(&self) -> &[T] {
        &self.mu
    }

    pub fn eta(&self) -> &[T] {
        &self.eta
    }
}

/// SINR-limited rate of a layer with gain `g`, own power `own` and
/// residual interference power `interference` (both as fractions of `rho`).
#[inline]
pub(crate) fn layer_rate<T: Scalar>(g: T, own: T, interference: T, rho: T) -> T {
    (g * own * rho / (g * interference * rho + T::one())).ln_1p()
}

/// Boundary rates of the superposition region for allocation `alloc`:
/// `r_k = ln(1 + g_k gamma_k rho / (g_k (gamma_1 + ... + gamma_{k-1}) rho + 1))`.
///
/// These are suprema; strictly achievable targets sit any margin below.
pub fn star_rate<T: Scalar>(spec: &SystemSpec<T>, alloc: &PowerAllocation<T>) -> RatePoint<T> {
    assert_eq!(
        alloc.len(),
        spec.num_users(),
        "allocation length must match user count"
    );
    let mut stronger = T::zero();
    let rates = spec
        .users
        .iter()
        .zip(alloc.as_slice())
        .map(|(u, &g)| {
            let r = layer_rate(u.gain, g, stronger, spec.rho);
            stronger = stronger + g;
            r
        })
        .collect();
    RatePoint(rates)
}

/// Time-sharing rates `r_k = mu_k ln(1 + g_k eta_k rho)`.
pub fn td_rate<T: Scalar>(spec: &SystemSpec<T>, policy: &TimeSharingPolicy<T>) -> RatePoint<T> {
    assert_eq!(
        policy.mu.len(),
        spec.num_users(),
        "policy length must match user count"
    );
    let rates = spec
        .users
        .iter()
        .zip(policy.mu.iter().zip(&policy.eta))
        .map(|(u, (&mu, &eta))| {
            if mu == T::zero() {
                T::zero()
            } else {
                mu * (u.gain * eta * spec.rho).ln_1p()
            }
        })
        .collect();
    RatePoint(rates)
}

/// Certificate that a rate point lies in the superposition region.
#[derive(Debug, Clone, PartialEq)]
pub struct Membership<T> {
    /// Least power per user that supports the target; may sum to less than one.
    pub gamma: Vec<T>,
    pub total: T,
}

impl<T: Scalar> Membership<T> {
    /// A full allocation that supports the target: leftover power goes to the
    /// last user, whose share appears in no other user's interference.
    pub fn allocation(&self) -> PowerAllocation<T> {
        let mut gamma = self.gamma.clone();
        if self.total <= T::one() {
            let last = gamma.len() - 1;
            gamma[last] = gamma[last] + (T::one() - self.total);
        } else {
            for g in &mut gamma {
                *g = *g / self.total;
            }
        }
        PowerAllocation(gamma)
    }
}

/// Greedy closed-form inversion of [`star_rate`]: the least allocation whose
/// rates reach `target`, or `None` if it needs more than the full power.
pub fn star_membership<T: Scalar>(
    spec: &SystemSpec<T>,
    target: &RatePoint<T>,
) -> Option<Membership<T>> {
    star_membership_with_tol(spec, target, T::membership_tol())
}

/// [`star_membership`] with an explicit slack on the power sum.
pub fn star_membership_with_tol<T: Scalar>(
    spec: &SystemSpec<T>,
    target: &RatePoint<T>,
    tol: T,
) -> Option<Membership<T>> {
    assert_eq!(
        target.len(),
        spec.num_users(),
        "target length must match user count"
    );
    let rho = spec.rho;
    let mut total = T::zero();
    let mut gamma = Vec::with_capacity(target.len());
    for (u, &r) in spec.users.iter().zip(target.as_slice()) {
        let need = if r == T::zero() {
            T::zero()
        } else if u.gain == T::zero() {
            return None;
        } else {
            r.exp_m1() * (u.gain * rho * total + T::one()) / (u.gain * rho)
        };
        total = total + need;
        if total.is_nan() || total > T::one() + tol {
            return None;
        }
        gamma.push(need);
    }
    Some(Membership { gamma, total })
}

/// Largest rate for the last user given the rates of all earlier users, i.e.
/// the boundary of the superposition region above the point `leading`.
pub fn star_boundary_last<T: Scalar>(spec: &SystemSpec<T>, leading: &[T]) -> Option<T> {
    let k = spec.num_users();
    assert_eq!(leading.len() + 1, k, "rates for all but the last user");
    let mut padded = leading.to_vec();
    padded.push(T::zero());
    let m = star_membership_with_tol(spec, &RatePoint(padded), T::zero())?;
    let last = &spec.users[k - 1];
    Some(layer_rate(last.gain, T::one() - m.total, m.total, spec.rho))
}
