//! Distributions of squared fading gains `a = |h|^2`.
//!
//! Four families are supported: a single Rayleigh branch (exponential power),
//! the average or sum of i.i.d. Rayleigh branches (Gamma law of integer
//! shape), the sum of two correlated Rayleigh branches, and an empirical law
//! backed by a sample list. The multi-antenna aggregates map receive and
//! transmit diversity configurations onto these families.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, SimRng};
use crate::scalar::{bisect_increasing, Scalar};

/// Parameterization of a fading law.
#[derive(Debug, Clone, PartialEq)]
pub enum FadingKind<T> {
    /// Squared Rayleigh gain with the given mean.
    Exponential { mean: T },
    /// `scale * (e_1 + ... + e_count)` with i.i.d. exponential `e_i` of mean `branch_mean`.
    IidSum {
        count: u32,
        branch_mean: T,
        scale: T,
    },
    /// `|h1|^2 + |h2|^2` for jointly circular complex Gaussians with
    /// `E|h_i|^2 = mean_i` and `E[h1 h2*] = zeta * sqrt(mean1 * mean2)`.
    CorrelatedPair { mean1: T, mean2: T, zeta: T },
    /// Empirical law; samples are sorted ascending.
    Empirical { samples: Vec<T> },
}

/// A validated fading law. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct FadingModel<T> {
    kind: FadingKind<T>,
}

fn positive<T: Scalar>(name: &str, v: T) -> Result<()> {
    if v.is_finite() && v > T::zero() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

impl<T: Scalar> FadingModel<T> {
    pub fn exponential(mean: T) -> Result<Self> {
        positive("mean", mean)?;
        Ok(Self {
            kind: FadingKind::Exponential { mean },
        })
    }

    pub fn iid_sum(count: u32, branch_mean: T, scale: T) -> Result<Self> {
        if count == 0 {
            return Err(Error::InvalidParameter(
                "branch count must be at least 1".into(),
            ));
        }
        positive("branch mean", branch_mean)?;
        positive("scale", scale)?;
        Ok(Self {
            kind: FadingKind::IidSum {
                count,
                branch_mean,
                scale,
            },
        })
    }

    pub fn correlated_pair(mean1: T, mean2: T, zeta: T) -> Result<Self> {
        positive("mean1", mean1)?;
        positive("mean2", mean2)?;
        if !(zeta >= -T::one() && zeta <= T::one()) {
            return Err(Error::InvalidParameter(format!(
                "zeta must lie in [-1, 1], got {zeta}"
            )));
        }
        Ok(Self {
            kind: FadingKind::CorrelatedPair { mean1, mean2, zeta },
        })
    }

    pub fn empirical(mut samples: Vec<T>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidParameter(
                "empirical law needs at least one sample".into(),
            ));
        }
        if let Some(bad) = samples
            .iter()
            .find(|s| !(s.is_finite() && **s >= T::zero()))
        {
            return Err(Error::InvalidParameter(format!(
                "empirical samples must be finite and nonnegative, got {bad}"
            )));
        }
        samples.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
        Ok(Self {
            kind: FadingKind::Empirical { samples },
        })
    }

    pub fn kind(&self) -> &FadingKind<T> {
        &self.kind
    }

    /// True for every family except `Empirical`.
    pub fn is_continuous(&self) -> bool {
        !matches!(self.kind, FadingKind::Empirical { .. })
    }

    pub fn mean(&self) -> T {
        match &self.kind {
            FadingKind::Exponential { mean } => *mean,
            FadingKind::IidSum {
                count,
                branch_mean,
                scale,
            } => T::lit(*count as f64) * *branch_mean * *scale,
            FadingKind::CorrelatedPair { mean1, mean2, .. } => *mean1 + *mean2,
            FadingKind::Empirical { samples } => {
                samples.iter().copied().sum::<T>() / T::from_usize_lossy(samples.len())
            }
        }
    }

    /// `P[a_k <= a]`. Accepts `a = +inf` (returns 1).
    pub fn cdf(&self, a: T) -> Result<T> {
        if a.is_nan() || a < T::zero() {
            return Err(Error::Domain(format!(
                "cdf argument must be nonnegative, got {a}"
            )));
        }
        Ok(self.cdf_unchecked(a))
    }

    pub(crate) fn cdf_unchecked(&self, a: T) -> T {
        if a == T::infinity() {
            return T::one();
        }
        match &self.kind {
            FadingKind::Exponential { mean } => -(-a / *mean).exp_m1(),
            FadingKind::IidSum {
                count,
                branch_mean,
                scale,
            } => gamma_p_integer(*count, a / (*scale * *branch_mean)),
            FadingKind::CorrelatedPair { mean1, mean2, zeta } => {
                let (l1, l2) = pair_eigenvalues(*mean1, *mean2, *zeta);
                pair_cdf(a, l1, l2)
            }
            FadingKind::Empirical { samples } => {
                let below = samples.partition_point(|s| *s <= a);
                T::from_usize_lossy(below) / T::from_usize_lossy(samples.len())
            }
        }
    }

    /// Quantile function: the supremum of `{a : F(a) = t}` for continuous laws,
    /// the `ceil(t n)`-th order statistic (1-indexed, `t = 0` gives the minimum)
    /// for empirical laws.
    pub fn quantile(&self, t: T) -> Result<T> {
        if !(t >= T::zero() && t < T::one()) {
            return Err(Error::Domain(format!(
                "quantile level must lie in [0, 1), got {t}"
            )));
        }
        Ok(match &self.kind {
            FadingKind::Exponential { mean } => -*mean * (-t).ln_1p(),
            FadingKind::Empirical { samples } => {
                let n = samples.len();
                let rank = (t * T::from_usize_lossy(n)).ceil().to_usize().unwrap_or(n);
                samples[rank.clamp(1, n) - 1]
            }
            _ => {
                if t == T::zero() {
                    return Ok(T::zero());
                }
                let spread = T::one().max(-(-t).ln_1p());
                let mut hi = self.mean() * spread * T::lit(64.0);
                while self.cdf_unchecked(hi) < t {
                    hi = hi * T::lit(2.0);
                }
                bisect_increasing(|a| self.cdf_unchecked(a), t, T::zero(), hi, T::root_tol())
            }
        })
    }

    /// `n` i.i.d. draws from the law with a generator seeded by `seed`.
    pub fn sample(&self, seed: u64, n: usize) -> Vec<T> {
        let mut rng = rng_from_seed(seed);
        self.sample_with(&mut rng, n)
    }

    pub fn sample_with(&self, rng: &mut SimRng, n: usize) -> Vec<T> {
        (0..n).map(|_| self.draw(rng)).collect()
    }

    fn draw(&self, rng: &mut SimRng) -> T {
        match &self.kind {
            FadingKind::Exponential { mean } => {
                let e: f64 = Exp1.sample(rng);
                *mean * T::lit(e)
            }
            FadingKind::IidSum {
                count,
                branch_mean,
                scale,
            } => {
                let total: f64 = (0..*count).map(|_| -> f64 { Exp1.sample(rng) }).sum();
                *scale * *branch_mean * T::lit(total)
            }
            FadingKind::CorrelatedPair { mean1, mean2, zeta } => {
                // Square-root factor of [[m1, c], [c, m2]] applied to two CN(0, 1) draws.
                let half = std::f64::consts::FRAC_1_SQRT_2;
                let mut cn = || -> (f64, f64) {
                    let re: f64 = StandardNormal.sample(rng);
                    let im: f64 = StandardNormal.sample(rng);
                    (re * half, im * half)
                };
                let w1 = cn();
                let w2 = cn();
                let (m1, m2, z) = (
                    mean1.to_f64_lossy(),
                    mean2.to_f64_lossy(),
                    zeta.to_f64_lossy(),
                );
                let s1 = m1.sqrt();
                let c = z * m2.sqrt();
                let d = (m2 * (1.0 - z * z)).max(0.0).sqrt();
                let h1 = (s1 * w1.0, s1 * w1.1);
                let h2 = (c * w1.0 + d * w2.0, c * w1.1 + d * w2.1);
                T::lit(h1.0 * h1.0 + h1.1 * h1.1 + h2.0 * h2.0 + h2.1 * h2.1)
            }
            FadingKind::Empirical { samples } => samples[rng.random_range(0..samples.len())],
        }
    }

    /// Effective gain of a receiver that combines its receive branches:
    /// the sum of the branch squared magnitudes.
    ///
    /// One branch gives the scalar model, two branches a correlated pair, and
    /// more than two branches are supported only when uncorrelated with equal means.
    pub fn simo_aggregate(branch_means: &[T], zeta: T) -> Result<Self> {
        match branch_means {
            [] => Err(Error::InvalidParameter(
                "at least one receive branch is required".into(),
            )),
            [m] => Self::exponential(*m),
            [m1, m2] => Self::correlated_pair(*m1, *m2, zeta),
            [first, rest @ ..] => {
                if zeta != T::zero() {
                    return Err(Error::Unsupported(
                        "correlated receive branches are supported only for pairs".into(),
                    ));
                }
                if rest.iter().any(|m| m != first) {
                    return Err(Error::Unsupported(
                        "more than two branches require equal branch means".into(),
                    ));
                }
                Self::iid_sum(branch_means.len() as u32, *first, T::one())
            }
        }
    }

    /// Effective gain with `m_t` transmit antennas sharing the power equally:
    /// the average of the `m_t` i.i.d. squared coefficients.
    pub fn miso_aggregate(m_t: u32, branch_mean: T) -> Result<Self> {
        if m_t == 0 {
            return Err(Error::InvalidParameter("m_t must be at least 1".into()));
        }
        Self::iid_sum(m_t, branch_mean, T::one() / T::lit(m_t as f64))
    }

    /// Parses the textual form, resolving `empirical(path=...)` against `base`
    /// (or the working directory when `base` is `None`).
    pub fn parse_with_base(text: &str, base: Option<&Path>) -> Result<Self> {
        let text = text.trim();
        let open = text
            .find('(')
            .ok_or_else(|| Error::Parse(format!("expected name(args) in '{text}'")))?;
        if !text.ends_with(')') {
            return Err(Error::Parse(format!(
                "missing closing parenthesis in '{text}'"
            )));
        }
        let name = text[..open].trim().to_ascii_lowercase();
        let body = &text[open + 1..text.len() - 1];
        let args = parse_args(body)?;
        let get = |key: &str| -> Result<&str> {
            args.iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| v.as_str())
                .ok_or_else(|| Error::Parse(format!("'{name}' is missing argument '{key}'")))
        };
        let num = |key: &str| -> Result<T> {
            let raw = get(key)?;
            raw.parse::<T>()
                .map_err(|_| Error::Parse(format!("argument '{key}' is not a number: '{raw}'")))
        };
        let expect_keys = |keys: &[&str]| -> Result<()> {
            match args.iter().find(|(k, _)| !keys.contains(&k.as_str())) {
                Some((k, _)) => Err(Error::Parse(format!("unknown argument '{k}' for '{name}'"))),
                None => Ok(()),
            }
        };
        match name.as_str() {
            "exp" => {
                expect_keys(&["mean"])?;
                Self::exponential(num("mean")?)
            }
            "iidsum" => {
                expect_keys(&["m", "mean", "scale"])?;
                let raw = get("m")?;
                let count = raw
                    .parse::<u32>()
                    .map_err(|_| Error::Parse(format!("argument 'm' is not a count: '{raw}'")))?;
                Self::iid_sum(count, num("mean")?, num("scale")?)
            }
            "pair" => {
                expect_keys(&["m1", "m2", "zeta"])?;
                Self::correlated_pair(num("m1")?, num("m2")?, num("zeta")?)
            }
            "empirical" => {
                expect_keys(&["path", "values"])?;
                if let Ok(values) = get("values") {
                    let samples = values
                        .split(';')
                        .map(|v| {
                            v.trim().parse::<T>().map_err(|_| {
                                Error::Parse(format!("empirical value is not a number: '{v}'"))
                            })
                        })
                        .collect::<Result<Vec<_>>>()?;
                    Self::empirical(samples)
                } else {
                    let raw = get("path")?;
                    let path = match base {
                        Some(dir) => dir.join(raw),
                        None => raw.into(),
                    };
                    Self::empirical(read_samples(&path)?)
                }
            }
            other => Err(Error::Parse(format!("unknown fading family '{other}'"))),
        }
    }
}

fn parse_args(body: &str) -> Result<Vec<(String, String)>> {
    if body.trim().is_empty() {
        return Ok(Vec::new());
    }
    body.split(',')
        .map(|part| {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got '{part}'")))?;
            Ok((k.trim().to_ascii_lowercase(), v.trim().to_string()))
        })
        .collect()
}

/// Reads a newline-separated list of decimal reals. Blank lines are skipped.
pub fn read_samples<T: Scalar>(path: &Path) -> Result<Vec<T>> {
    let text = std::fs::read_to_string(path)?;
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(|l| {
            l.parse::<T>()
                .map_err(|_| Error::Parse(format!("{}: not a number: '{l}'", path.display())))
        })
        .collect()
}

impl<T: Scalar> FromStr for FadingModel<T> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse_with_base(s, None)
    }
}

impl<T: Scalar> fmt::Display for FadingModel<T> {
    /// Canonical textual form. Empirical laws are written inline as
    /// `empirical(values=a;b;...)` so the output parses back without a file.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            FadingKind::Exponential { mean } => write!(f, "exp(mean={mean})"),
            FadingKind::IidSum {
                count,
                branch_mean,
                scale,
            } => {
                write!(f, "iidsum(m={count},mean={branch_mean},scale={scale})")
            }
            FadingKind::CorrelatedPair { mean1, mean2, zeta } => {
                write!(f, "pair(m1={mean1},m2={mean2},zeta={zeta})")
            }
            FadingKind::Empirical { samples } => {
                write!(f, "empirical(values=")?;
                for (i, s) in samples.iter().enumerate() {
                    if i > 0 {
                        write!(f, ";")?;
                    }
                    write!(f, "{s}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Eigenvalues `(l1 >= l2 >= 0)` of the branch covariance `[[m1, c], [c, m2]]`,
/// `c = zeta sqrt(m1 m2)`. Only `|zeta|` matters.
pub fn pair_eigenvalues<T: Scalar>(mean1: T, mean2: T, zeta: T) -> (T, T) {
    let two = T::lit(2.0);
    let half_trace = (mean1 + mean2) / two;
    let half_gap = (mean1 - mean2) / two;
    let off = zeta * (mean1 * mean2).sqrt();
    let radius = half_gap.hypot(off);
    let l1 = half_trace + radius;
    // l1 * l2 = m1 m2 (1 - zeta^2): avoids cancellation in half_trace - radius.
    let l2 = (mean1 * mean2 * (T::one() - zeta * zeta)).max(T::zero()) / l1;
    (l1, l2)
}

/// CDF of a hypoexponential sum `l1 E1 + l2 E2` (`E_i` unit exponentials).
fn pair_cdf<T: Scalar>(a: T, l1: T, l2: T) -> T {
    if a <= T::zero() {
        return T::zero();
    }
    if l2 <= T::zero() {
        return -(-a / l1).exp_m1();
    }
    let gap = l1 - l2;
    if gap <= T::zero() {
        let x = a / l1;
        return T::one() - (-x).exp() * (T::one() + x);
    }
    // Survival = e^{-a/l1} + l2 (e^{-a/l1} - e^{-a/l2}) / (l1 - l2).
    let e1 = (-a / l1).exp();
    let spread = a * gap / (l1 * l2);
    let tail = if spread < T::one() {
        l2 * (-a / l2).exp() * spread.exp_m1() / gap
    } else {
        l2 * (e1 - (-a / l2).exp()) / gap
    };
    (T::one() - e1 - tail).max(T::zero()).min(T::one())
}

/// Regularized lower incomplete gamma `P(m, x)` for integer shape `m >= 1`.
pub fn gamma_p_integer<T: Scalar>(m: u32, x: T) -> T {
    if x <= T::zero() {
        return T::zero();
    }
    let mf = T::lit(m as f64);
    if x < mf + T::one() {
        // e^{-x} sum_{j >= m} x^j / j!
        let mut term = (-x).exp();
        for j in 1..=m {
            term = term * x / T::lit(j as f64);
        }
        let mut sum = term;
        let mut j = mf;
        loop {
            j = j + T::one();
            term = term * x / j;
            sum = sum + term;
            if term <= sum * T::epsilon() {
                break;
            }
        }
        sum.min(T::one())
    } else {
        // 1 - e^{-x} sum_{j < m} x^j / j!
        let mut term = (-x).exp();
        let mut sum = term;
        for j in 1..m {
            term = term * x / T::lit(j as f64);
            sum = sum + term;
        }
        (T::one() - sum).max(T::zero())
    }
}
