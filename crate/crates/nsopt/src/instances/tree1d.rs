//! A family of one-dimensional convex piecewise-linear functions built over
//! a binary address word, with all geometry kept in exact rational
//! arithmetic.
//!
//! Level `k` of the construction picks one of two candidate subintervals of
//! the current interval according to bit `k` of the address, shrinking the
//! width by `M_k = 8^(k+1)` each time. The function descends linearly into
//! the innermost interval, is flat on it, and climbs back out, with slope
//! magnitudes chosen so that:
//!
//! - the function is convex and exactly 1-Lipschitz,
//! - every non-plateau slope has magnitude at least 1/2,
//! - the witnessed minimum value and all slope magnitudes are independent of
//!   the address word, so evaluations far from the plateau reveal nothing
//!   about where it hides.
//!
//! Floating-point cannot express the deeper levels (interval widths shrink
//! below one ulp long before the maximum depth), so breakpoints, values and
//! slopes are `BigRational` end to end and only converted to `f64` at the
//! oracle boundary.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::oracle::{ActiveSet, Oracle, OracleReply};
use crate::vector::Vector;

use super::InstanceMeta;

/// Converts an arbitrary-precision rational to the nearest `f64` (within a
/// couple of ulp), without overflowing on huge numerators or denominators.
///
/// `Ratio::to_f64` computes `numer as f64 / denom as f64`, which turns into
/// `inf / inf = NaN` once both sides exceed the `f64` range; the deep-level
/// denominators here do exactly that. Instead, shift the quotient into a
/// 52-54 bit integer, convert, and scale back by the (exact) power of two.
pub fn ratio_to_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    let negative = r.is_negative();
    let num = r.numer().magnitude();
    let den = r.denom().magnitude();
    let shift = 53 + den.bits() as i64 - num.bits() as i64;
    let scaled = if shift >= 0 {
        (num << shift as usize) / den
    } else {
        num / (den << (-shift) as usize)
    };
    let mant = scaled.to_f64().expect("a 52-54 bit integer converts");
    // Two-step scaling: the first factor keeps the product in normal range
    // whenever the true value is representable at all, the second lands it.
    // A single factor would underflow to zero (or overflow) too early.
    let e = -shift;
    let e1 = e.clamp(-1022, 1023);
    let mag = mant * pow2(e1) * pow2(e - e1);
    if negative {
        -mag
    } else {
        mag
    }
}

/// `2^e` built exactly from bits; saturates to `inf` and `0` outside the
/// `f64` range. `powi` is useless here: it computes negative powers as the
/// reciprocal of the positive one, which overflows to `inf` (and thus `0`)
/// long before the true value leaves the subnormal range.
fn pow2(e: i64) -> f64 {
    if e > 1023 {
        f64::INFINITY
    } else if e >= -1022 {
        f64::from_bits(((e + 1023) as u64) << 52)
    } else if e >= -1074 {
        f64::from_bits(1u64 << (e + 1074))
    } else {
        0.0
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum PiecewiseLinearError {
    #[error("a piecewise-linear function needs at least one breakpoint")]
    Empty,
    #[error("{breakpoints} breakpoints need {breakpoints} values and one more slope, got {values} and {slopes}")]
    LengthMismatch {
        breakpoints: usize,
        values: usize,
        slopes: usize,
    },
    #[error("breakpoints must increase strictly (violated at index {index})")]
    NotIncreasing { index: usize },
    #[error("slope on piece {index} does not connect its endpoint values")]
    Discontinuous { index: usize },
}

/// A continuous piecewise-linear function on the whole line, represented by
/// `n` breakpoints, their values, and `n + 1` piece slopes (the outer two
/// extend to infinity). All data is exact.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PiecewiseLinear {
    breakpoints: Vec<BigRational>,
    values: Vec<BigRational>,
    slopes: Vec<BigRational>,
}

impl PiecewiseLinear {
    pub fn new(
        breakpoints: Vec<BigRational>,
        values: Vec<BigRational>,
        slopes: Vec<BigRational>,
    ) -> Result<Self, PiecewiseLinearError> {
        if breakpoints.is_empty() {
            return Err(PiecewiseLinearError::Empty);
        }
        if values.len() != breakpoints.len() || slopes.len() != breakpoints.len() + 1 {
            return Err(PiecewiseLinearError::LengthMismatch {
                breakpoints: breakpoints.len(),
                values: values.len(),
                slopes: slopes.len(),
            });
        }
        for i in 1..breakpoints.len() {
            if breakpoints[i] <= breakpoints[i - 1] {
                return Err(PiecewiseLinearError::NotIncreasing { index: i });
            }
            let rise = &values[i] - &values[i - 1];
            let run = &breakpoints[i] - &breakpoints[i - 1];
            if rise != &slopes[i] * run {
                return Err(PiecewiseLinearError::Discontinuous { index: i });
            }
        }
        Ok(PiecewiseLinear {
            breakpoints,
            values,
            slopes,
        })
    }

    pub fn breakpoints(&self) -> &[BigRational] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[BigRational] {
        &self.values
    }

    /// Piece slopes; `slopes()[i]` applies between `breakpoints()[i-1]` and
    /// `breakpoints()[i]`, with the two outer pieces unbounded.
    pub fn slopes(&self) -> &[BigRational] {
        &self.slopes
    }

    pub fn is_convex(&self) -> bool {
        self.slopes.windows(2).all(|w| w[0] <= w[1])
    }

    pub fn max_abs_slope(&self) -> BigRational {
        self.slopes
            .iter()
            .map(|s| s.abs())
            .max()
            .expect("at least two slopes")
    }

    /// Index of the piece containing `x`, or the breakpoint it sits on.
    fn locate(&self, x: &BigRational) -> Location {
        let idx = self.breakpoints.partition_point(|b| b < x);
        if idx < self.breakpoints.len() && &self.breakpoints[idx] == x {
            Location::Breakpoint(idx)
        } else {
            Location::Piece(idx)
        }
    }

    pub fn value_exact(&self, x: &BigRational) -> BigRational {
        match self.locate(x) {
            Location::Breakpoint(i) => self.values[i].clone(),
            Location::Piece(i) => {
                let anchor = if i == 0 { 0 } else { i - 1 };
                &self.values[anchor] + &self.slopes[i] * (x - &self.breakpoints[anchor])
            }
        }
    }

    /// The interval of Clarke slopes at `x`: a single slope inside a piece,
    /// the two adjacent slopes (ordered) at a breakpoint.
    pub fn clarke_exact(&self, x: &BigRational) -> (BigRational, BigRational) {
        match self.locate(x) {
            Location::Breakpoint(i) => {
                let a = self.slopes[i].clone();
                let b = self.slopes[i + 1].clone();
                if a <= b {
                    (a, b)
                } else {
                    (b, a)
                }
            }
            Location::Piece(i) => (self.slopes[i].clone(), self.slopes[i].clone()),
        }
    }

    /// Oracle view. At a breakpoint the returned subgradient is the left
    /// slope, and the active set carries both adjacent slopes as vertices.
    pub fn eval_f64(&self, x: f64) -> OracleReply {
        assert!(x.is_finite(), "oracle probed at a non-finite point");
        let xr = BigRational::from_float(x).expect("finite f64 is rational");
        match self.locate(&xr) {
            Location::Breakpoint(i) => {
                let left = ratio_to_f64(&self.slopes[i]);
                let right = ratio_to_f64(&self.slopes[i + 1]);
                let mut vertices = vec![Vector(vec![left])];
                if right != left {
                    vertices.push(Vector(vec![right]));
                }
                let kink = if self.slopes[i] == self.slopes[i + 1] {
                    vec![]
                } else {
                    vec![i]
                };
                OracleReply {
                    value: ratio_to_f64(&self.values[i]),
                    subgrad: Vector(vec![left]),
                    active_set: Some(ActiveSet {
                        vertices,
                        active_indices: vec![i],
                        kink_indices: kink,
                    }),
                }
            }
            Location::Piece(i) => OracleReply {
                value: ratio_to_f64(&self.value_exact(&xr)),
                subgrad: Vector(vec![ratio_to_f64(&self.slopes[i])]),
                active_set: None,
            },
        }
    }

    /// The function scaled by a positive factor (same breakpoints).
    pub fn scaled(&self, factor: &BigRational) -> PiecewiseLinear {
        assert!(factor.is_positive());
        PiecewiseLinear {
            breakpoints: self.breakpoints.clone(),
            values: self.values.iter().map(|v| v * factor).collect(),
            slopes: self.slopes.iter().map(|s| s * factor).collect(),
        }
    }
}

enum Location {
    Breakpoint(usize),
    Piece(usize),
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum Tree1dError {
    #[error("address word length {len} outside {min}..={max}", min = SigmaWord::MIN_LEN, max = SigmaWord::MAX_LEN)]
    BadLength { len: usize },
    #[error("address words are written in 0s and 1s, got {ch:?}")]
    BadChar { ch: char },
}

/// The binary address selecting one leaf interval per level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SigmaWord {
    bits: Vec<bool>,
}

impl SigmaWord {
    pub const MIN_LEN: usize = 2;
    pub const MAX_LEN: usize = 32;

    pub fn new(bits: Vec<bool>) -> Result<Self, Tree1dError> {
        if bits.len() < Self::MIN_LEN || bits.len() > Self::MAX_LEN {
            return Err(Tree1dError::BadLength { len: bits.len() });
        }
        Ok(SigmaWord { bits })
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Bit for level `k`, 0-based.
    pub fn bit(&self, k: usize) -> bool {
        self.bits[k]
    }
}

impl FromStr for SigmaWord {
    type Err = Tree1dError;

    fn from_str(s: &str) -> Result<Self, Tree1dError> {
        let bits = s
            .chars()
            .map(|ch| match ch {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Tree1dError::BadChar { ch: other }),
            })
            .collect::<Result<Vec<bool>, _>>()?;
        SigmaWord::new(bits)
    }
}

impl fmt::Display for SigmaWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            write!(f, "{}", if b { '1' } else { '0' })?;
        }
        Ok(())
    }
}

/// The address-indexed hard instance on the line. See the module docs for
/// the construction; `rescaled` halves the function (and so its Lipschitz
/// constant and value gap) leaving the geometry unchanged.
#[derive(Clone, Debug)]
pub struct Tree1d {
    sigma: SigmaWord,
    rescaled: bool,
    pwl: PiecewiseLinear,
    lo: Vec<BigRational>,
    hi: Vec<BigRational>,
    q: Vec<BigRational>,
    rho: Vec<BigRational>,
    v: Vec<BigRational>,
}

fn br(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl Tree1d {
    pub fn new(sigma: SigmaWord, rescaled: bool) -> Self {
        let n = sigma.len();
        let half = br(1, 2);
        let one = BigRational::from_integer(BigInt::from(1));

        // Per-level data, index 0 is level 1.
        let mut lo: Vec<BigRational> = Vec::with_capacity(n);
        let mut hi: Vec<BigRational> = Vec::with_capacity(n);
        let mut q: Vec<BigRational> = vec![one.clone()];
        let mut rho: Vec<BigRational> = Vec::with_capacity(n);
        let mut v: Vec<BigRational> = vec![one.clone()];
        let mut w_left: Vec<BigRational> = Vec::with_capacity(n);
        let mut w_right: Vec<BigRational> = Vec::with_capacity(n);

        for k in 1..=n {
            let m_k = BigRational::from_integer(num_traits::pow(BigInt::from(8), k + 1));
            let narrow = &half - br(2, 1) / &m_k; // width fraction 1/2 - 2/M
            let wide = &half + &one / &m_k; // width fraction 1/2 + 1/M
            let (wl, wr) = if sigma.bit(k - 1) {
                (wide.clone(), narrow.clone())
            } else {
                (narrow.clone(), wide.clone())
            };

            let prev_lo = if k == 1 {
                BigRational::zero()
            } else {
                lo[k - 2].clone()
            };
            let lo_k = prev_lo + &q[k - 1] * &wl;
            let q_k = &q[k - 1] / &m_k;
            let hi_k = &lo_k + &q_k;

            // Slope scale: starts at the level-1 narrow fraction and decays
            // by narrow/wide each level, independently of the address bits.
            let rho_k = if k == 1 {
                narrow.clone()
            } else {
                let m_prev = BigRational::from_integer(num_traits::pow(BigInt::from(8), k));
                let wide_prev = &half + &one / &m_prev;
                &rho[k - 2] * &narrow / wide_prev
            };
            let v_k = &v[k - 1] - &rho_k * &q[k - 1];

            lo.push(lo_k);
            hi.push(hi_k);
            q.push(q_k);
            rho.push(rho_k);
            v.push(v_k);
            w_left.push(wl);
            w_right.push(wr);
        }

        let mut breakpoints = Vec::with_capacity(2 * n + 2);
        let mut values = Vec::with_capacity(2 * n + 2);
        let mut slopes = Vec::with_capacity(2 * n + 3);

        breakpoints.push(BigRational::zero());
        values.push(one.clone());
        slopes.push(-one.clone());
        for k in 1..=n {
            breakpoints.push(lo[k - 1].clone());
            values.push(v[k].clone());
            slopes.push(-&rho[k - 1] / &w_left[k - 1]);
        }
        slopes.push(BigRational::zero());
        for k in (1..=n).rev() {
            breakpoints.push(hi[k - 1].clone());
            values.push(v[k].clone());
            slopes.push(&rho[k - 1] / &w_right[k - 1]);
        }
        breakpoints.push(one.clone());
        values.push(one.clone());
        slopes.push(one);

        let mut pwl =
            PiecewiseLinear::new(breakpoints, values, slopes).expect("construction is continuous");
        if rescaled {
            pwl = pwl.scaled(&half);
        }

        Tree1d {
            sigma,
            rescaled,
            pwl,
            lo,
            hi,
            q,
            rho,
            v,
        }
    }

    pub fn sigma(&self) -> &SigmaWord {
        &self.sigma
    }

    pub fn rescaled(&self) -> bool {
        self.rescaled
    }

    pub fn pwl(&self) -> &PiecewiseLinear {
        &self.pwl
    }

    pub fn levels(&self) -> usize {
        self.sigma.len()
    }

    /// The level-`k` interval, `k = 0` being the unit interval.
    pub fn level_interval(&self, k: usize) -> (BigRational, BigRational) {
        assert!(k <= self.levels());
        if k == 0 {
            (BigRational::zero(), BigRational::from_integer(BigInt::from(1)))
        } else {
            (self.lo[k - 1].clone(), self.hi[k - 1].clone())
        }
    }

    /// The innermost (flat) interval, where the minimum is attained.
    pub fn min_interval(&self) -> (&BigRational, &BigRational) {
        (
            self.lo.last().expect("at least two levels"),
            self.hi.last().expect("at least two levels"),
        )
    }

    /// Exact minimum value (already rescaled when applicable).
    pub fn infimum_exact(&self) -> BigRational {
        let v_n = self.v.last().expect("at least two levels");
        if self.rescaled {
            v_n * br(1, 2)
        } else {
            v_n.clone()
        }
    }

    /// Widths `q_0..q_N` of the nested intervals.
    pub fn widths(&self) -> &[BigRational] {
        &self.q
    }

    /// Slope scales `rho_1..rho_N`; address-independent by construction.
    pub fn slope_scales(&self) -> &[BigRational] {
        &self.rho
    }

    /// Plateau heights `V_0..V_N` (unscaled); address-independent.
    pub fn plateau_values(&self) -> &[BigRational] {
        &self.v
    }

    /// Deepest level a resolution-`delta` observer is entitled to: points
    /// within `delta` of the plateau stay strictly inside the level-`k`
    /// interval for `k = floor(sqrt(log2(1/delta)) / 4)`.
    pub fn delta_level(delta: f64) -> usize {
        assert!(delta > 0.0 && delta < 1.0);
        (0.25 * (1.0 / delta).log2().sqrt()).floor() as usize
    }

    /// Exact check that the plateau padded by `delta` sits strictly inside
    /// the level-`k` interval.
    pub fn delta_separation_holds(&self, k: usize, delta: &BigRational) -> bool {
        let (lo_k, hi_k) = self.level_interval(k);
        let (lo_n, hi_n) = self.min_interval();
        lo_k < lo_n - delta && hi_n + delta < hi_k
    }

    pub fn default_start(&self) -> Vector {
        Vector(vec![0.0])
    }

    pub fn infimum(&self) -> f64 {
        ratio_to_f64(&self.infimum_exact())
    }

    pub fn meta(&self) -> InstanceMeta {
        let scale = if self.rescaled { 0.5 } else { 1.0 };
        let gap = BigRational::from_integer(BigInt::from(1))
            - self.v.last().expect("at least two levels");
        InstanceMeta {
            dim: 1,
            lipschitz: scale,
            smoothness: None,
            value_gap: scale * ratio_to_f64(&gap),
            // hi_1 <= 17/32, so the plateau is well within 0.6 of the start.
            radius: Some(0.6),
            convex: true,
        }
    }
}

impl Oracle for Tree1d {
    fn dim(&self) -> usize {
        1
    }

    fn eval(&self, x: &Vector) -> OracleReply {
        debug_assert_eq!(x.dim(), 1);
        self.pwl.eval_f64(x[0])
    }
}
