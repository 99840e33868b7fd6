//! One-dimensional ReLU networks with a frozen random first layer.
//!
//! A network is the map `x -> sum_k w_k * max(0, b_k + v_k x) + c`. Only the
//! terminal weights `w` (and optionally the terminal bias `c`) are ever
//! trained; `b` and `v` are sampled once and kept fixed. The function is
//! piecewise affine with breakpoints ("kinks") at `xi_k = -b_k / v_k`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Parameters of one realized network.
#[derive(Debug, Clone)]
pub struct RsnParams<S: Real> {
    /// First-layer biases, length `n`.
    pub b: Vec<S>,
    /// First-layer weights, length `n`, all nonzero.
    pub v: Vec<S>,
    /// Terminal weights, length `n`.
    pub w: Vec<S>,
    /// Optional terminal bias, defaults to zero.
    pub terminal_bias: S,
}

impl<S: Real> RsnParams<S> {
    /// Builds a network, validating lengths and the `v_k != 0` requirement.
    pub fn new(b: Vec<S>, v: Vec<S>, w: Vec<S>, terminal_bias: S) -> Result<Self> {
        if b.is_empty() || b.len() != v.len() || b.len() != w.len() {
            return Err(Error::InvalidParameter(format!(
                "b, v, w must share a positive length (got {}, {}, {})",
                b.len(),
                v.len(),
                w.len()
            )));
        }
        if v.iter().any(|&vk| vk == S::zero()) {
            return Err(Error::InvalidParameter(
                "first-layer weights must be nonzero".into(),
            ));
        }
        Ok(Self {
            b,
            v,
            w,
            terminal_bias,
        })
    }

    /// Hidden width.
    #[inline]
    pub fn n(&self) -> usize {
        self.b.len()
    }

    /// Replaces the terminal weights, keeping the first layer.
    pub fn with_weights(&self, w: Vec<S>, terminal_bias: S) -> Result<Self> {
        Self::new(self.b.clone(), self.v.clone(), w, terminal_bias)
    }

    /// Restriction to the neurons with `v_k > 0` (resp. `< 0`). Used when the
    /// network is split into its left-activating and right-activating parts.
    pub fn signed_part(&self, positive: bool) -> Option<Self> {
        let keep: Vec<usize> = (0..self.n())
            .filter(|&k| (self.v[k] > S::zero()) == positive)
            .collect();
        if keep.is_empty() {
            return None;
        }
        Some(Self {
            b: keep.iter().map(|&k| self.b[k]).collect(),
            v: keep.iter().map(|&k| self.v[k]).collect(),
            w: keep.iter().map(|&k| self.w[k]).collect(),
            terminal_bias: S::zero(),
        })
    }

    /// Exact network value at `x`.
    pub fn evaluate(&self, x: S) -> S {
        let mut acc = self.terminal_bias;
        for k in 0..self.n() {
            let pre = self.b[k] + self.v[k] * x;
            if pre > S::zero() {
                acc += self.w[k] * pre;
            }
        }
        acc
    }

    /// Almost-everywhere derivative `sum_k w_k v_k 1{b_k + v_k x >= 0}`.
    ///
    /// The weak inequality fixes the value on the measure-zero set of kinks.
    pub fn derivative(&self, x: S) -> S {
        let mut acc = S::zero();
        for k in 0..self.n() {
            if self.b[k] + self.v[k] * x >= S::zero() {
                acc += self.w[k] * self.v[k];
            }
        }
        acc
    }

    /// Atoms `(xi_k, w_k v_k)` of the distributional second derivative,
    /// sorted by position.
    pub fn second_derivative_atoms(&self) -> Vec<(S, S)> {
        let mut atoms: Vec<(S, S)> = (0..self.n())
            .map(|k| (-self.b[k] / self.v[k], self.w[k] * self.v[k]))
            .collect();
        atoms.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        atoms
    }

    /// Feature matrix `X[i][k] = max(0, b_k + v_k xs[i])`.
    ///
    /// `X w` reproduces the network values minus the terminal bias.
    pub fn design_matrix(&self, xs: &[S]) -> DMatrix<S> {
        DMatrix::from_fn(xs.len(), self.n(), |i, k| {
            let pre = self.b[k] + self.v[k] * xs[i];
            if pre > S::zero() {
                pre
            } else {
                S::zero()
            }
        })
    }

    /// Kink positions, signs and orderings.
    pub fn kinks(&self) -> KinkSet<S> {
        KinkSet::of(self)
    }

    /// Precomputed piecewise-affine form for fast repeated evaluation.
    pub fn profile(&self) -> PiecewiseLinear<S> {
        PiecewiseLinear::of(self)
    }
}

/// Kink positions of a network together with their signs and sort order.
#[derive(Debug, Clone)]
pub struct KinkSet<S: Real> {
    /// `xi_k = -b_k / v_k` in neuron order.
    pub xi: Vec<S>,
    /// `sgn(v_k)` in neuron order (`+1` or `-1`).
    pub sign: Vec<i8>,
    /// Permutation sorting `xi` ascending.
    pub order: Vec<usize>,
    /// Indices with `v_k > 0`.
    pub pos_index: Vec<usize>,
    /// Indices with `v_k < 0`.
    pub neg_index: Vec<usize>,
}

impl<S: Real> KinkSet<S> {
    fn of(params: &RsnParams<S>) -> Self {
        let n = params.n();
        let xi: Vec<S> = (0..n).map(|k| -params.b[k] / params.v[k]).collect();
        let sign: Vec<i8> = params
            .v
            .iter()
            .map(|&v| if v > S::zero() { 1 } else { -1 })
            .collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| xi[a].partial_cmp(&xi[b]).unwrap());
        let pos_index = (0..n).filter(|&k| sign[k] > 0).collect();
        let neg_index = (0..n).filter(|&k| sign[k] < 0).collect();
        Self {
            xi,
            sign,
            order,
            pos_index,
            neg_index,
        }
    }

    /// Kink positions in ascending order.
    pub fn sorted_xi(&self) -> Vec<S> {
        self.order.iter().map(|&k| self.xi[k]).collect()
    }
}

/// Piecewise-affine closed form of a network: sorted breakpoints plus the
/// affine coefficients of each segment. Evaluation is a binary search
/// instead of an `O(n)` sum, which matters when curves are sampled densely.
#[derive(Debug, Clone)]
pub struct PiecewiseLinear<S: Real> {
    /// Segment boundaries, ascending (may contain duplicates collapsed away).
    breaks: Vec<S>,
    /// `(slope, intercept)` of the segment left of `breaks[0]`, between
    /// consecutive breaks, and right of the last break: `breaks.len() + 1`
    /// entries.
    segments: Vec<(S, S)>,
}

impl<S: Real> PiecewiseLinear<S> {
    fn of(params: &RsnParams<S>) -> Self {
        let n = params.n();
        let mut events: Vec<(S, usize)> = (0..n)
            .map(|k| (-params.b[k] / params.v[k], k))
            .collect();
        events.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

        // Left of every kink only the v<0 neurons are active.
        let mut slope = S::zero();
        let mut intercept = params.terminal_bias;
        for k in 0..n {
            if params.v[k] < S::zero() {
                slope += params.w[k] * params.v[k];
                intercept += params.w[k] * params.b[k];
            }
        }

        let mut breaks = Vec::with_capacity(n);
        let mut segments = Vec::with_capacity(n + 1);
        segments.push((slope, intercept));
        let mut i = 0;
        while i < events.len() {
            let x = events[i].0;
            while i < events.len() && events[i].0 == x {
                let k = events[i].1;
                if params.v[k] < S::zero() {
                    slope -= params.w[k] * params.v[k];
                    intercept -= params.w[k] * params.b[k];
                } else {
                    slope += params.w[k] * params.v[k];
                    intercept += params.w[k] * params.b[k];
                }
                i += 1;
            }
            breaks.push(x);
            segments.push((slope, intercept));
        }
        Self { breaks, segments }
    }

    /// Index of the segment containing `x` (right-continuous at breaks).
    #[inline]
    fn segment_of(&self, x: S) -> usize {
        self.breaks.partition_point(|&b| b <= x)
    }

    pub fn eval(&self, x: S) -> S {
        let (a, c) = self.segments[self.segment_of(x)];
        c + a * x
    }

    pub fn deriv(&self, x: S) -> S {
        self.segments[self.segment_of(x)].0
    }

    /// Breakpoints inside `[lo, hi]`, ascending.
    pub fn breaks_in(&self, lo: S, hi: S) -> Vec<S> {
        self.breaks
            .iter()
            .copied()
            .filter(|&b| b >= lo && b <= hi)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedStream;
    use approx::assert_relative_eq;

    fn net(b: &[f64], v: &[f64], w: &[f64]) -> RsnParams<f64> {
        RsnParams::new(b.to_vec(), v.to_vec(), w.to_vec(), 0.0).unwrap()
    }

    #[test]
    fn rejects_bad_shapes_and_zero_v() {
        assert!(RsnParams::new(vec![0.0], vec![1.0], vec![], 0.0).is_err());
        assert!(RsnParams::new(vec![0.0], vec![0.0], vec![1.0], 0.0).is_err());
        assert!(RsnParams::<f64>::new(vec![], vec![], vec![], 0.0).is_err());
    }

    #[test]
    fn evaluate_zero_weights_gives_bias() {
        let p = RsnParams::new(vec![0.3, -0.2], vec![1.0, -1.0], vec![0.0, 0.0], 1.5).unwrap();
        for x in [-2.0, 0.0, 0.7, 3.0] {
            assert_eq!(p.evaluate(x), 1.5);
            assert_eq!(p.derivative(x), 0.0);
        }
    }

    #[test]
    fn evaluate_single_relu() {
        let p = net(&[0.0], &[1.0], &[2.0]);
        assert_eq!(p.evaluate(3.0), 6.0);
        assert_eq!(p.evaluate(-1.0), 0.0);
        assert_eq!(p.derivative(3.0), 2.0);
    }

    #[test]
    fn evaluate_two_units_hand_value() {
        let p = net(&[0.0, 1.0], &[1.0, -1.0], &[1.0, 1.0]);
        // x = 0: first unit inactive boundary, second contributes max(0,1) = 1
        assert_eq!(p.evaluate(0.0), 1.0);
        // x = -0.5: derivative = 0*1 + 1*(-1) = -1
        assert_eq!(p.derivative(-0.5), -1.0);
    }

    #[test]
    fn atoms_single_unit() {
        let p = net(&[0.0], &[2.0], &[3.0]);
        let atoms = p.second_derivative_atoms();
        assert_eq!(atoms.len(), 1);
        assert_eq!(atoms[0], (0.0, 6.0));
    }

    #[test]
    fn atoms_sum_matches_total_slope_change() {
        let mut s = SeedStream::new(11);
        let n = 40;
        let b: Vec<f64> = (0..n).map(|_| s.uniform_sym(1.0)).collect();
        let v: Vec<f64> = (0..n).map(|_| s.uniform_sym_nonzero(1.0)).collect();
        let w: Vec<f64> = (0..n).map(|_| s.uniform_sym(1.0)).collect();
        let p = net(&b, &v, &w);
        let xs = p.kinks().sorted_xi();
        let lo = xs[0] - 1.0;
        let hi = xs[n - 1] + 1.0;
        let mass: f64 = p.second_derivative_atoms().iter().map(|a| a.1).sum();
        assert_relative_eq!(
            mass,
            p.derivative(hi) - p.derivative(lo),
            max_relative = 1e-12,
            epsilon = 1e-12
        );
    }

    #[test]
    fn design_matrix_contract() {
        let p = net(&[0.0], &[1.0], &[1.0]);
        let x = p.design_matrix(&[-1.0, 2.0]);
        assert_eq!(x.nrows(), 2);
        assert_eq!(x[(0, 0)], 0.0);
        assert_eq!(x[(1, 0)], 2.0);
        let empty = p.design_matrix(&[]);
        assert_eq!(empty.nrows(), 0);
        assert_eq!(empty.ncols(), 1);
    }

    #[test]
    fn design_matrix_times_w_equals_evaluate() {
        let mut s = SeedStream::new(5);
        for _ in 0..20 {
            let n = 8;
            let b: Vec<f64> = (0..n).map(|_| s.uniform_sym(2.0)).collect();
            let v: Vec<f64> = (0..n).map(|_| s.uniform_sym_nonzero(2.0)).collect();
            let w: Vec<f64> = (0..n).map(|_| s.uniform_sym(2.0)).collect();
            let p = RsnParams::new(b, v, w, 0.25).unwrap();
            let xs: Vec<f64> = (0..6).map(|_| s.uniform_sym(3.0)).collect();
            let x = p.design_matrix(&xs);
            let wv = nalgebra::DVector::from_vec(p.w.clone());
            let pred = &x * &wv;
            for (i, &xi) in xs.iter().enumerate() {
                assert_relative_eq!(
                    pred[i],
                    p.evaluate(xi) - p.terminal_bias,
                    max_relative = 1e-12,
                    epsilon = 1e-12
                );
            }
        }
    }

    #[test]
    fn piecewise_affine_between_kinks() {
        let mut s = SeedStream::new(9);
        let n = 16;
        let b: Vec<f64> = (0..n).map(|_| s.uniform_sym(1.0)).collect();
        let v: Vec<f64> = (0..n).map(|_| s.uniform_sym_nonzero(1.0)).collect();
        let w: Vec<f64> = (0..n).map(|_| s.uniform_sym(1.0)).collect();
        let p = net(&b, &v, &w);
        let xi = p.kinks().sorted_xi();
        for j in 0..xi.len() - 1 {
            if xi[j + 1] - xi[j] < 1e-9 {
                continue;
            }
            let a = xi[j] + (xi[j + 1] - xi[j]) * 0.25;
            let c = xi[j] + (xi[j + 1] - xi[j]) * 0.75;
            let fd = (p.evaluate(c) - p.evaluate(a)) / (c - a);
            let mid = 0.5 * (a + c);
            assert_relative_eq!(fd, p.derivative(mid), max_relative = 1e-9, epsilon = 1e-9);
        }
    }

    #[test]
    fn kinks_invariant_under_first_layer_scaling() {
        let p = net(&[0.5, -0.25, 1.0], &[1.0, 0.5, -2.0], &[1.0, 1.0, 1.0]);
        let scaled = net(
            &[0.5 * 3.0, -0.25 * 3.0, 3.0],
            &[3.0, 1.5, -6.0],
            &[1.0, 1.0, 1.0],
        );
        let k1 = p.kinks();
        let k2 = scaled.kinks();
        for k in 0..3 {
            assert_relative_eq!(k1.xi[k], k2.xi[k], max_relative = 1e-14);
            assert_eq!(k1.sign[k], k2.sign[k]);
        }
    }

    #[test]
    fn kink_set_partitions_indices() {
        let p = net(&[0.0, 1.0, -1.0], &[1.0, -1.0, 2.0], &[1.0, 1.0, 1.0]);
        let k = p.kinks();
        let mut all: Vec<usize> = k.pos_index.iter().chain(k.neg_index.iter()).copied().collect();
        all.sort_unstable();
        assert_eq!(all, vec![0, 1, 2]);
        let sorted = k.sorted_xi();
        assert!(sorted.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn profile_matches_direct_evaluation() {
        let mut s = SeedStream::new(21);
        let n = 64;
        let b: Vec<f64> = (0..n).map(|_| s.uniform_sym(1.0)).collect();
        let v: Vec<f64> = (0..n).map(|_| s.uniform_sym_nonzero(1.0)).collect();
        let w: Vec<f64> = (0..n).map(|_| s.uniform_sym(1.0)).collect();
        let p = RsnParams::new(b, v, w, -0.4).unwrap();
        let prof = p.profile();
        for i in 0..500 {
            let x = -6.0 + 12.0 * (i as f64) / 499.0;
            assert_relative_eq!(prof.eval(x), p.evaluate(x), max_relative = 1e-11, epsilon = 1e-11);
            assert_relative_eq!(prof.deriv(x), p.derivative(x), max_relative = 1e-11, epsilon = 1e-11);
        }
    }
}
