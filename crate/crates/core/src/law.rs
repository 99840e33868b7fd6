//! First-layer distributions and the induced kink geometry.
//!
//! A law describes how the frozen first layer `(b_k, v_k)` is drawn. From it
//! we derive, analytically where possible:
//!
//! * the kink position density `g_xi` of `xi = -b/v`,
//! * the conditional second moment `E[v^2 | xi = x]`,
//! * the curvature weighting function `g(x) = g_xi(x) E[v^2|xi=x] / 2`,
//! * the sign-conditioned weights `g_plus`, `g_minus`,
//! * truncated supports realizing a compact working interval.
//!
//! The [`montecarlo`] submodule provides a sampling-based estimator of the
//! same quantities, used as an independent oracle in tests and reports.

use crate::error::{Error, Result};
use crate::rng::SeedStream;
use crate::scalar::Real;

/// Compact working interval `[lower, upper]` for the spline solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedSupport<S: Real> {
    pub lower: S,
    pub upper: S,
}

impl<S: Real> TruncatedSupport<S> {
    pub fn new(lower: S, upper: S) -> Result<Self> {
        if !(lower < upper) {
            return Err(Error::InvalidParameter(format!(
                "support needs lower < upper (got [{}, {}])",
                lower.to_f(),
                upper.to_f()
            )));
        }
        Ok(Self { lower, upper })
    }

    #[inline]
    pub fn len(&self) -> S {
        self.upper - self.lower
    }

    #[inline]
    pub fn contains(&self, x: S) -> bool {
        x >= self.lower && x <= self.upper
    }

    #[inline]
    pub fn contains_strictly(&self, x: S) -> bool {
        x > self.lower && x < self.upper
    }
}

/// Supported first-layer families. `b` and `v` are independent and i.i.d.
/// across neurons in every family.
#[derive(Debug, Clone)]
pub enum FirstLayerLaw<S: Real> {
    /// `b, v ~ U(-c, c)` independently; symmetric with respect to sign.
    UniformSymmetric { c: S },
    /// `b ~ N(0, sigma_b^2)`, `v ~ N(0, sigma_v^2)` independently.
    Gaussian { sigma_b: S, sigma_v: S },
    /// Resampling from observed pairs. Analytic kink formulas are not
    /// available; use [`montecarlo::McLawEstimate`] for density work.
    Empirical { b: Vec<S>, v: Vec<S> },
}

impl<S: Real> FirstLayerLaw<S> {
    pub fn uniform_symmetric(c: S) -> Result<Self> {
        if !(c > S::zero()) {
            return Err(Error::InvalidParameter("uniform scale c must be positive".into()));
        }
        Ok(Self::UniformSymmetric { c })
    }

    pub fn gaussian(sigma_b: S, sigma_v: S) -> Result<Self> {
        if !(sigma_b > S::zero()) || !(sigma_v > S::zero()) {
            return Err(Error::InvalidParameter("gaussian sigmas must be positive".into()));
        }
        Ok(Self::Gaussian { sigma_b, sigma_v })
    }

    pub fn empirical(b: Vec<S>, v: Vec<S>) -> Result<Self> {
        if b.is_empty() || b.len() != v.len() {
            return Err(Error::InvalidParameter(
                "empirical law needs matching nonempty b, v samples".into(),
            ));
        }
        if v.iter().any(|&x| x == S::zero()) {
            return Err(Error::InvalidParameter("empirical v samples must be nonzero".into()));
        }
        Ok(Self::Empirical { b, v })
    }

    /// Draws `n` first-layer pairs. Deterministic in `(law, n, seed)`;
    /// exact zeros of `v` are rejected and resampled.
    pub fn sample_first_layer(&self, n: usize, seed: u64) -> Result<(Vec<S>, Vec<S>)> {
        if n == 0 {
            return Err(Error::InvalidParameter("width n must be at least 1".into()));
        }
        let mut stream = SeedStream::new(seed);
        let mut b = Vec::with_capacity(n);
        let mut v = Vec::with_capacity(n);
        match self {
            Self::UniformSymmetric { c } => {
                let c = c.to_f();
                for _ in 0..n {
                    b.push(S::from_f(stream.uniform_sym(c)));
                    loop {
                        let vk = S::from_f(stream.uniform_sym_nonzero(c));
                        if vk != S::zero() {
                            v.push(vk);
                            break;
                        }
                    }
                }
            }
            Self::Gaussian { sigma_b, sigma_v } => {
                let (sb, sv) = (sigma_b.to_f(), sigma_v.to_f());
                for _ in 0..n {
                    b.push(S::from_f(sb * stream.normal()));
                    loop {
                        let vk = S::from_f(sv * stream.normal());
                        if vk != S::zero() {
                            v.push(vk);
                            break;
                        }
                    }
                }
            }
            Self::Empirical { b: bs, v: vs } => {
                let m = bs.len() as u64;
                for _ in 0..n {
                    let idx = (stream.next_u64() % m) as usize;
                    b.push(bs[idx]);
                    v.push(vs[idx]);
                }
            }
        }
        Ok((b, v))
    }

    /// Kink position density `g_xi(x)`.
    pub fn kink_density(&self, x: S) -> Result<S> {
        match self {
            Self::UniformSymmetric { .. } => {
                // Ratio of two symmetric uniforms; scale-free in c.
                let ax = x.abs();
                if ax <= S::one() {
                    Ok(S::from_f(0.25))
                } else {
                    Ok(S::from_f(0.25) / (x * x))
                }
            }
            Self::Gaussian { sigma_b, sigma_v } => {
                // Ratio of centered normals: Cauchy with scale sigma_b/sigma_v.
                let gamma = *sigma_b / *sigma_v;
                Ok(gamma / (S::pi() * (gamma * gamma + x * x)))
            }
            Self::Empirical { .. } => Err(Error::UnsupportedFamily(
                "empirical law has no analytic kink density".into(),
            )),
        }
    }

    /// Distribution function `P(xi <= x)`; closed form per family.
    pub fn kink_cdf(&self, x: S) -> Result<S> {
        match self {
            Self::UniformSymmetric { .. } => {
                let half = S::from_f(0.5);
                let quarter = S::from_f(0.25);
                if x < -S::one() {
                    Ok(-quarter / x)
                } else if x <= S::one() {
                    Ok(half + quarter * x)
                } else {
                    Ok(S::one() - quarter / x)
                }
            }
            Self::Gaussian { sigma_b, sigma_v } => {
                let gamma = *sigma_b / *sigma_v;
                Ok(S::from_f(0.5) + (x / gamma).atan() / S::pi())
            }
            Self::Empirical { .. } => Err(Error::UnsupportedFamily(
                "empirical law has no analytic kink cdf".into(),
            )),
        }
    }

    /// Conditional second moment `E[v^2 | xi = x]`.
    pub fn conditional_second_moment(&self, x: S) -> Result<S> {
        match self {
            Self::UniformSymmetric { c } => {
                // Conditional density of v given xi = x is proportional to |v|
                // on the admissible interval; the interval shrinks to c/|x|
                // once |x| exceeds one.
                let ax = x.abs();
                let half = S::from_f(0.5);
                if ax <= S::one() {
                    Ok(half * *c * *c)
                } else {
                    Ok(half * *c * *c / (x * x))
                }
            }
            Self::Gaussian { sigma_b, sigma_v } => {
                let sb2 = *sigma_b * *sigma_b;
                let sv2 = *sigma_v * *sigma_v;
                Ok(S::from_f(2.0) * sb2 * sv2 / (sb2 + sv2 * x * x))
            }
            Self::Empirical { .. } => Err(Error::UnsupportedFamily(
                "empirical law has no analytic conditional moment".into(),
            )),
        }
    }

    /// Curvature weighting function `g(x) = g_xi(x) E[v^2|xi=x] / 2`.
    pub fn weight_function(&self, x: S) -> Result<S> {
        Ok(self.kink_density(x)? * self.conditional_second_moment(x)? * S::from_f(0.5))
    }

    /// Sign-conditioned weights `(g_plus, g_minus)` with
    /// `g_plus(x) = g_xi^+(x) E[v^2 | xi = x, v > 0] P[v > 0]` and the mirror
    /// expression for `g_minus`. For sign-symmetric families both collapse to
    /// the plain weighting function.
    pub fn asymmetric_weight_functions(&self, x: S) -> Result<(S, S)> {
        match self {
            Self::UniformSymmetric { .. } | Self::Gaussian { .. } => {
                // Conditioning on sgn(v) changes neither the kink density nor
                // the v^2 moment for these families, and P[v>0] = 1/2 cancels
                // against the doubled conditional density.
                let g = self.weight_function(x)?;
                Ok((g, g))
            }
            Self::Empirical { .. } => Err(Error::UnsupportedFamily(
                "empirical law has no analytic sign-conditioned weights".into(),
            )),
        }
    }

    /// Smallest symmetric interval holding at least `mass` of the kink
    /// distribution, expanded so that `data_range` lies strictly inside.
    pub fn default_truncation(
        &self,
        data_range: (S, S),
        mass: S,
    ) -> Result<TruncatedSupport<S>> {
        if !(mass > S::zero() && mass < S::one()) {
            return Err(Error::InvalidParameter("mass must lie in (0, 1)".into()));
        }
        let l_mass: f64 = match self {
            Self::UniformSymmetric { .. } => {
                let m = mass.to_f();
                if m <= 0.5 {
                    2.0 * m
                } else {
                    1.0 / (2.0 * (1.0 - m))
                }
            }
            Self::Gaussian { sigma_b, sigma_v } => {
                let gamma = (*sigma_b / *sigma_v).to_f();
                gamma * (std::f64::consts::PI * mass.to_f() / 2.0).tan()
            }
            Self::Empirical { b, v } => {
                let mut abs_xi: Vec<f64> = b
                    .iter()
                    .zip(v)
                    .map(|(&bk, &vk)| (bk / vk).to_f().abs())
                    .collect();
                abs_xi.sort_by(|a, b| a.partial_cmp(b).unwrap());
                let k = (mass.to_f() * abs_xi.len() as f64).ceil() as usize;
                if k == 0 || k > abs_xi.len() {
                    return Err(Error::UnreachableMass { mass: mass.to_f() });
                }
                abs_xi[k - 1]
            }
        };
        let data_abs = data_range.0.to_f().abs().max(data_range.1.to_f().abs());
        // Strict containment margin so grid solvers can place data inside.
        let l = l_mass.max(data_abs * (1.0 + 1e-6) + 1e-12);
        TruncatedSupport::new(S::from_f(-l), S::from_f(l))
    }
}

/// Parses CLI law specs: `uniform:c=0.05` or `gaussian:sb=1,sv=1`.
impl<S: Real> std::str::FromStr for FirstLayerLaw<S> {
    type Err = Error;

    fn from_str(spec: &str) -> Result<Self> {
        let bad = |msg: &str| Error::InvalidParameter(format!("law spec '{spec}': {msg}"));
        let (family, args) = spec
            .split_once(':')
            .ok_or_else(|| bad("expected '<family>:<key>=<value>,...'"))?;
        let mut kv = std::collections::BTreeMap::new();
        for part in args.split(',') {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| bad("expected key=value pairs"))?;
            let value: f64 = v
                .trim()
                .parse()
                .map_err(|_| bad(&format!("cannot parse value '{v}'")))?;
            kv.insert(k.trim().to_string(), value);
        }
        match family.trim() {
            "uniform" => {
                let c = *kv.get("c").ok_or_else(|| bad("missing c"))?;
                FirstLayerLaw::uniform_symmetric(S::from_f(c))
            }
            "gaussian" => {
                let sb = *kv.get("sb").ok_or_else(|| bad("missing sb"))?;
                let sv = *kv.get("sv").ok_or_else(|| bad("missing sv"))?;
                FirstLayerLaw::gaussian(S::from_f(sb), S::from_f(sv))
            }
            other => Err(bad(&format!("unknown family '{other}'"))),
        }
    }
}

pub mod montecarlo {
    //! Sampling-based estimates of the kink density and conditional moments.
    //!
    //! This path never touches the analytic formulas above; it exists to
    //! cross-examine them. Strip statistics come with standard errors so the
    //! comparison can be phrased in z-scores.

    use super::FirstLayerLaw;
    use crate::error::Result;
    use crate::scalar::Real;

    /// Histogram of kink positions plus per-strip moments of `v`.
    #[derive(Debug, Clone)]
    pub struct McLawEstimate {
        pub lo: f64,
        pub hi: f64,
        pub bins: usize,
        pub n_samples: u64,
        /// Kink count per strip.
        pub count: Vec<u64>,
        /// Sum of `v^2` per strip.
        pub sum_v2: Vec<f64>,
        /// Sum of `v^4` per strip (for the moment estimator's variance).
        pub sum_v4: Vec<f64>,
        /// Count of `v > 0` kinks per strip.
        pub count_pos: Vec<u64>,
        /// Sum of `v^2` over `v > 0` kinks per strip.
        pub sum_v2_pos: Vec<f64>,
        /// Samples that fell outside `[lo, hi]`.
        pub outside: u64,
    }

    impl McLawEstimate {
        pub fn build<S: Real>(
            law: &FirstLayerLaw<S>,
            n_samples: u64,
            seed: u64,
            lo: f64,
            hi: f64,
            bins: usize,
        ) -> Result<Self> {
            assert!(bins >= 1 && hi > lo);
            let mut est = Self {
                lo,
                hi,
                bins,
                n_samples,
                count: vec![0; bins],
                sum_v2: vec![0.0; bins],
                sum_v4: vec![0.0; bins],
                count_pos: vec![0; bins],
                sum_v2_pos: vec![0.0; bins],
                outside: 0,
            };
            // Draw in manageable chunks so the law's sampler can stay simple.
            let chunk: usize = 1 << 16;
            let mut remaining = n_samples;
            let mut piece = 0u64;
            while remaining > 0 {
                let take = chunk.min(remaining as usize);
                let (b, v) =
                    law.sample_first_layer(take, crate::rng::derive_seed(seed, piece))?;
                for k in 0..take {
                    let xi = (-b[k] / v[k]).to_f();
                    let vv = v[k].to_f();
                    match est.bin_of(xi) {
                        Some(i) => {
                            est.count[i] += 1;
                            est.sum_v2[i] += vv * vv;
                            est.sum_v4[i] += vv * vv * vv * vv;
                            if vv > 0.0 {
                                est.count_pos[i] += 1;
                                est.sum_v2_pos[i] += vv * vv;
                            }
                        }
                        None => est.outside += 1,
                    }
                }
                remaining -= take as u64;
                piece += 1;
            }
            Ok(est)
        }

        #[inline]
        pub fn bin_width(&self) -> f64 {
            (self.hi - self.lo) / self.bins as f64
        }

        #[inline]
        fn bin_of(&self, x: f64) -> Option<usize> {
            if x < self.lo || x >= self.hi {
                return None;
            }
            let i = ((x - self.lo) / self.bin_width()).floor() as usize;
            Some(i.min(self.bins - 1))
        }

        pub fn bin_edges(&self, i: usize) -> (f64, f64) {
            let w = self.bin_width();
            (self.lo + w * i as f64, self.lo + w * (i + 1) as f64)
        }

        /// Density estimate on strip `i`.
        pub fn density(&self, i: usize) -> f64 {
            self.count[i] as f64 / (self.n_samples as f64 * self.bin_width())
        }

        /// z-score of the strip count against an expected strip mass.
        pub fn count_z(&self, i: usize, expected_mass: f64) -> f64 {
            let n = self.n_samples as f64;
            let mu = n * expected_mass;
            let sd = (n * expected_mass * (1.0 - expected_mass)).sqrt();
            (self.count[i] as f64 - mu) / sd
        }

        /// Strip estimate of `E[v^2 | xi in strip]` with its standard error.
        pub fn second_moment(&self, i: usize) -> Option<(f64, f64)> {
            let c = self.count[i];
            if c < 2 {
                return None;
            }
            let mean = self.sum_v2[i] / c as f64;
            let var = (self.sum_v4[i] / c as f64 - mean * mean).max(0.0);
            Some((mean, (var / c as f64).sqrt()))
        }

        /// Strip estimate of the sign-conditioned weight
        /// `g_plus(x) = g_xi^+(x) E[v^2|xi=x, v>0] P[v>0]`, obtained as
        /// `sum_{v>0, xi in strip} v^2 / (n * width)`.
        pub fn g_plus(&self, i: usize) -> f64 {
            self.sum_v2_pos[i] / (self.n_samples as f64 * self.bin_width())
        }

        /// Mirror estimate for `g_minus`.
        pub fn g_minus(&self, i: usize) -> f64 {
            (self.sum_v2[i] - self.sum_v2_pos[i]) / (self.n_samples as f64 * self.bin_width())
        }
    }

    /// Composite Simpson quadrature of `f` over `[a, b]`.
    pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
        let n = if intervals % 2 == 0 { intervals } else { intervals + 1 };
        let h = (b - a) / n as f64;
        let mut acc = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(a + h * i as f64);
        }
        acc * h / 3.0
    }
}
