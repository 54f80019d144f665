//! Exact univariate polynomials over the rationals.
//!
//! Identities (evaluation, interpolation, limits of inverse shifts) are exact;
//! only the tail inverse and the leading constant of a composition with an
//! inverse are real-valued and use `f64`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolyError {
    #[error("the zero polynomial has no leading coefficient")]
    ZeroPolynomial,
    #[error("polynomial must be nonconstant")]
    Constant,
    #[error("leading coefficient must be positive")]
    NonPositiveLead,
    #[error("value {y} lies below the monotone tail, which starts at {tail_start}")]
    BelowTail { y: f64, tail_start: f64 },
    #[error("tolerance {0} not reachable in floating point")]
    ToleranceUnachievable(f64),
    #[error("need at least 3 strictly increasing probe points")]
    BadProbes,
    #[error("cannot parse polynomial: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InterpolationError {
    #[error("duplicate abscissa {0}")]
    DuplicateAbscissa(BigRational),
    #[error("need at least {needed} points, got {got}")]
    InsufficientPoints { needed: usize, got: usize },
    #[error("no polynomial of degree at most {0} fits every point")]
    NoFit(usize),
}

pub fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn integer(n: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(n.into())
}

pub(crate) fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Exact `r^(1/k)` when both the reduced numerator and denominator are
/// perfect `k`-th powers.
pub fn exact_root(r: &BigRational, k: u32) -> Option<BigRational> {
    if k == 0 || r.is_negative() {
        return None;
    }
    let root = |n: &BigInt| {
        let c = n.nth_root(k);
        (num_traits::pow(c.clone(), k as usize) == *n).then_some(c)
    };
    Some(BigRational::new(root(r.numer())?, root(r.denom())?))
}

/// A polynomial in `X`, constant term first, with no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct RationalPolynomial {
    coeffs: Vec<BigRational>,
}

impl RationalPolynomial {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        RationalPolynomial { coeffs }
    }

    pub fn zero() -> Self {
        RationalPolynomial::default()
    }

    pub fn constant(c: BigRational) -> Self {
        RationalPolynomial::new(vec![c])
    }

    pub fn from_integers(coeffs: &[i64]) -> Self {
        RationalPolynomial::new(coeffs.iter().map(|&c| integer(c)).collect())
    }

    /// `c·X^k`
    pub fn monomial(c: BigRational, k: usize) -> Self {
        let mut coeffs = vec![BigRational::zero(); k];
        coeffs.push(c);
        RationalPolynomial::new(coeffs)
    }

    pub fn coefficients(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn coefficient(&self, k: usize) -> BigRational {
        self.coeffs
            .get(k)
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn leading_coefficient(&self) -> Option<&BigRational> {
        self.coeffs.last()
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        self.coeffs
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| acc * x + c)
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * x + to_f64(c))
    }

    pub fn derivative(&self) -> Self {
        RationalPolynomial::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * integer(k as i64))
                .collect(),
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        RationalPolynomial::new(
            (0..n)
                .map(|k| self.coefficient(k) + other.coefficient(k))
                .collect(),
        )
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return RationalPolynomial::zero();
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        RationalPolynomial::new(out)
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        RationalPolynomial::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    /// `p(c·X)`
    pub fn rescale_argument(&self, c: &BigRational) -> Self {
        let mut power = BigRational::one();
        let mut out = Vec::with_capacity(self.coeffs.len());
        for a in &self.coeffs {
            out.push(a * &power);
            power *= c;
        }
        RationalPolynomial::new(out)
    }
}

fn fmt_coeff(c: &BigRational) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("({}/{})", c.numer(), c.denom())
    }
}

/// `c0 + c1*X + c2*X^2 + …`, zero terms omitted, fractions as `(p/q)`.
impl fmt::Display for RationalPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            let power = match k {
                0 => String::new(),
                1 => "X".to_string(),
                _ => format!("X^{k}"),
            };
            if k == 0 {
                f.write_str(&fmt_coeff(c))?;
            } else if c.is_one() {
                f.write_str(&power)?;
            } else if *c == -BigRational::one() {
                write!(f, "-{power}")?;
            } else {
                write!(f, "{}*{power}", fmt_coeff(c))?;
            }
        }
        Ok(())
    }
}

impl Serialize for RationalPolynomial {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

fn parse_rational(s: &str) -> Result<BigRational, PolyError> {
    let err = || PolyError::Parse(format!("bad coefficient `{s}`"));
    let s = s.trim();
    let s = s
        .strip_prefix('(')
        .and_then(|t| t.strip_suffix(')'))
        .unwrap_or(s);
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| err())?;
            let d: BigInt = d.trim().parse().map_err(|_| err())?;
            if d.is_zero() {
                return Err(err());
            }
            Ok(BigRational::new(n, d))
        }
        None => Ok(BigRational::from_integer(s.parse().map_err(|_| err())?)),
    }
}

impl FromStr for RationalPolynomial {
    type Err = PolyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut coeffs: Vec<BigRational> = Vec::new();
        for term in s.split(" + ") {
            let term = term.trim();
            let (coeff, power) = match term.split_once('*') {
                Some((c, p)) => (parse_rational(c)?, p.trim()),
                None if term.contains('X') => {
                    let (sign, p) = match term.strip_prefix('-') {
                        Some(p) => (-BigRational::one(), p),
                        None => (BigRational::one(), term),
                    };
                    (sign, p)
                }
                None => (parse_rational(term)?, ""),
            };
            let k = match power {
                "" => 0,
                "X" => 1,
                p => p
                    .strip_prefix("X^")
                    .and_then(|e| e.parse::<usize>().ok())
                    .ok_or_else(|| PolyError::Parse(format!("bad power `{p}`")))?,
            };
            if coeffs.len() <= k {
                coeffs.resize(k + 1, BigRational::zero());
            }
            coeffs[k] += coeff;
        }
        Ok(RationalPolynomial::new(coeffs))
    }
}

pub fn eval_poly(p: &RationalPolynomial, x: &BigRational) -> BigRational {
    p.eval(x)
}

/// Outcome of [`interpolate`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FitResult {
    pub poly: RationalPolynomial,
    #[serde(serialize_with = "serialize_points")]
    pub sample_points: Vec<(BigRational, BigRational)>,
    /// How many leading points built the interpolant; the rest were held out.
    pub construction_points: usize,
    pub held_out_verified: bool,
}

fn serialize_points<S: Serializer>(
    pts: &[(BigRational, BigRational)],
    s: S,
) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(pts.len()))?;
    for (x, y) in pts {
        seq.serialize_element(&[x.to_string(), y.to_string()])?;
    }
    seq.end()
}

/// Finds the least degree `d <= max_degree` whose interpolant through the
/// first `d + 1` points matches every remaining point exactly.
///
/// Newton divided differences over the rationals; at least `max_degree + 2`
/// points are required so that one point is always held out.
pub fn interpolate(
    points: &[(BigRational, BigRational)],
    max_degree: usize,
) -> Result<FitResult, InterpolationError> {
    let needed = max_degree + 2;
    if points.len() < needed {
        return Err(InterpolationError::InsufficientPoints {
            needed,
            got: points.len(),
        });
    }
    for (i, (x, _)) in points.iter().enumerate() {
        if points[..i].iter().any(|(x2, _)| x2 == x) {
            return Err(InterpolationError::DuplicateAbscissa(x.clone()));
        }
    }
    let xs: Vec<&BigRational> = points.iter().map(|(x, _)| x).collect();
    // `table[i]` holds f[x_j, …, x_{j+i}] for the current column.
    let mut column: Vec<BigRational> = points.iter().map(|(_, y)| y.clone()).collect();
    let mut newton: Vec<BigRational> = Vec::new();
    for d in 0..=max_degree {
        if d > 0 {
            column = (0..column.len() - 1)
                .map(|j| (&column[j + 1] - &column[j]) / (xs[j + d] - xs[j]))
                .collect();
        }
        newton.push(column[0].clone());
        let fits = points[d + 1..]
            .iter()
            .all(|(x, y)| eval_newton(&newton, &xs, x) == *y);
        if fits {
            return Ok(FitResult {
                poly: newton_to_monomial(&newton, &xs),
                sample_points: points.to_vec(),
                construction_points: d + 1,
                held_out_verified: points.len() > d + 1,
            });
        }
    }
    Err(InterpolationError::NoFit(max_degree))
}

fn eval_newton(coeffs: &[BigRational], xs: &[&BigRational], x: &BigRational) -> BigRational {
    let mut acc = BigRational::zero();
    for k in (0..coeffs.len()).rev() {
        acc = acc * (x - xs[k]) + &coeffs[k];
    }
    acc
}

fn newton_to_monomial(coeffs: &[BigRational], xs: &[&BigRational]) -> RationalPolynomial {
    let mut acc = RationalPolynomial::zero();
    for k in (0..coeffs.len()).rev() {
        let factor = RationalPolynomial::new(vec![-xs[k].clone(), BigRational::one()]);
        acc = acc
            .mul(&factor)
            .add(&RationalPolynomial::constant(coeffs[k].clone()));
    }
    acc
}

pub fn leading_coefficient_sign(p: &RationalPolynomial) -> Result<Ordering, PolyError> {
    p.leading_coefficient()
        .map(|c| c.cmp(&BigRational::zero()))
        .ok_or(PolyError::ZeroPolynomial)
}

fn require_increasing_tail(p: &RationalPolynomial) -> Result<(), PolyError> {
    match leading_coefficient_sign(p)? {
        _ if p.is_constant() => Err(PolyError::Constant),
        Ordering::Greater => Ok(()),
        _ => Err(PolyError::NonPositiveLead),
    }
}

const THRESHOLD_GRID: usize = 4096;

/// Start `C` of the increasing tail: the largest sign change of `p′` on
/// `[0, 1 + Σ|c_i|/|lead|]`, plus 1, or 0 when `p′` never changes sign there.
pub fn monotonicity_threshold(p: &RationalPolynomial) -> f64 {
    let dp = p.derivative();
    let Some(lead) = dp.leading_coefficient() else {
        return 0.0;
    };
    if dp.is_constant() {
        return 0.0;
    }
    let bound = 1.0
        + dp.coefficients()
            .iter()
            .map(|c| to_f64(&(c / lead).abs()))
            .sum::<f64>();
    let step = bound / THRESHOLD_GRID as f64;
    let mut largest: Option<f64> = None;
    let mut prev_x = 0.0;
    let mut prev = dp.eval_f64(0.0);
    if prev == 0.0 {
        largest = Some(0.0);
    }
    for i in 1..=THRESHOLD_GRID {
        let x = step * i as f64;
        let v = dp.eval_f64(x);
        if v == 0.0 {
            largest = Some(x);
        } else if prev != 0.0 && (v < 0.0) != (prev < 0.0) {
            let (mut lo, mut hi) = (prev_x, x);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if (dp.eval_f64(mid) < 0.0) == (prev < 0.0) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            largest = Some(hi);
        }
        prev_x = x;
        prev = v;
    }
    largest.map_or(0.0, |r| r + 1.0)
}

/// Solves `p(x) = y` for `x` on the increasing tail by bisection.
pub fn inverse_on_tail(p: &RationalPolynomial, y: f64, abs_tol: f64) -> Result<f64, PolyError> {
    require_increasing_tail(p)?;
    let c = monotonicity_threshold(p);
    if y < p.eval_f64(c) {
        return Err(PolyError::BelowTail { y, tail_start: c });
    }
    let mut lo = c;
    let mut hi = (c + 1.0).max(1.0);
    while p.eval_f64(hi) < y {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(PolyError::ToleranceUnachievable(abs_tol));
        }
    }
    while hi - lo > abs_tol {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            return Err(PolyError::ToleranceUnachievable(abs_tol));
        }
        if p.eval_f64(mid) < y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo + 0.5 * (hi - lo))
}

/// `lim (x/a_n)^{1/n} − p⁻¹(x) = a_{n−1} / (n·a_n)`, exactly.
pub fn inverse_shift_limit(p: &RationalPolynomial) -> Result<BigRational, PolyError> {
    require_increasing_tail(p)?;
    let n = p.degree().expect("nonconstant");
    let lead = p.leading_coefficient().expect("nonzero");
    Ok(p.coefficient(n - 1) / (integer(n as i64) * lead))
}

/// Leading behaviour of `g ∘ f⁻¹`: `g(f⁻¹(x)) ~ mu · x^exponent`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComposedLeading {
    pub mu: f64,
    /// Present when `a_n^{m/n}` is rational.
    #[serde(serialize_with = "serialize_opt_rational")]
    pub mu_exact: Option<BigRational>,
    #[serde(serialize_with = "serialize_rational")]
    pub exponent: BigRational,
}

pub(crate) fn serialize_rational<S: Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(r)
}

pub(crate) fn serialize_opt_rational<S: Serializer>(
    r: &Option<BigRational>,
    s: S,
) -> Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.collect_str(r),
        None => s.serialize_none(),
    }
}

/// `lead(f)^e` for a rational exponent `e = m/n`, exactly when possible.
pub fn rational_power(base: &BigRational, exponent: &BigRational) -> (f64, Option<BigRational>) {
    let (m, n) = (exponent.numer(), exponent.denom());
    let exact = match (m.to_u32(), n.to_u32()) {
        (Some(m), Some(n)) => exact_root(&num_traits::pow(base.clone(), m as usize), n),
        _ => None,
    };
    let approx = match &exact {
        Some(e) => to_f64(e),
        None => to_f64(base).powf(to_f64(exponent)),
    };
    (approx, exact)
}

/// `mu = b_m / a_n^{m/n}` and `exponent = m/n` for `g` of degree `m` with
/// lead `b_m` and `f` of degree `n` with lead `a_n`.
pub fn composed_leading(
    g: &RationalPolynomial,
    f: &RationalPolynomial,
) -> Result<ComposedLeading, PolyError> {
    require_increasing_tail(g)?;
    require_increasing_tail(f)?;
    let (m, n) = (g.degree().expect("nonzero"), f.degree().expect("nonzero"));
    let exponent = rational(m as i64, n as i64);
    let b = g.leading_coefficient().expect("nonzero");
    let a = f.leading_coefficient().expect("nonzero");
    let (denominator, exact_den) = rational_power(a, &exponent);
    let mu_exact = exact_den.map(|d| b / d);
    let mu = match &mu_exact {
        Some(e) => to_f64(e),
        None => to_f64(b) / denominator,
    };
    Ok(ComposedLeading {
        mu,
        mu_exact,
        exponent,
    })
}

/// Which limit expression [`empirical_limit_check`] probes.
#[derive(Debug, Clone, Copy)]
pub enum LimitExpr<'a> {
    /// `(x/a_n)^{1/n} − p⁻¹(x)`
    InverseShift(&'a RationalPolynomial),
    /// `g(f⁻¹(x)) / x^{m/n}`
    Composed {
        g: &'a RationalPolynomial,
        f: &'a RationalPolynomial,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitSample {
    pub probe: f64,
    pub value: f64,
    pub deviation: f64,
    /// Deviation left after subtracting the floating-point error bound.
    pub resolved_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitCheck {
    pub target: f64,
    pub rel_tol: f64,
    pub samples: Vec<LimitSample>,
    pub pass: bool,
}

/// Probes a limit expression at increasing points.
///
/// Deviations are taken net of a floating-point error bound for the tail
/// inverse. Passes when the last one is within `rel_tol · max(|target|, 1)`
/// and they do not increase over the final three probes.
pub fn empirical_limit_check(
    expr: LimitExpr<'_>,
    probes: &[f64],
    target: f64,
    rel_tol: f64,
) -> Result<LimitCheck, PolyError> {
    if probes.len() < 3 || probes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(PolyError::BadProbes);
    }
    let f = match expr {
        LimitExpr::InverseShift(p) => p,
        LimitExpr::Composed { g, f } => {
            require_increasing_tail(g)?;
            f
        }
    };
    require_increasing_tail(f)?;
    let n = f.degree().expect("nonconstant") as f64;
    let a = to_f64(f.leading_coefficient().expect("nonzero"));
    let c = monotonicity_threshold(f);
    let mut samples = Vec::with_capacity(probes.len());
    for &x in probes {
        let root = (x / a).powf(1.0 / n);
        let abs_tol = 64.0 * f64::EPSILON * (root.abs() + c + 1.0);
        let inv = inverse_on_tail(f, x, abs_tol)?;
        let (value, floor) = match expr {
            LimitExpr::InverseShift(_) => {
                let v = root - inv;
                (v, 4.0 * abs_tol + 8.0 * f64::EPSILON * root.abs())
            }
            LimitExpr::Composed { g, .. } => {
                let m = g.degree().expect("nonconstant") as f64;
                let scale = x.powf(m / n);
                let v = g.eval_f64(inv) / scale;
                (
                    v,
                    4.0 * m * v.abs() * abs_tol / inv.max(1.0) + 8.0 * f64::EPSILON * v.abs(),
                )
            }
        };
        let deviation = (value - target).abs();
        samples.push(LimitSample {
            probe: x,
            value,
            deviation,
            resolved_deviation: (deviation - floor).max(0.0),
        });
    }
    let last = samples.last().expect("at least three probes");
    let close = last.resolved_deviation <= rel_tol * target.abs().max(1.0);
    let tail = &samples[samples.len() - 3..];
    let settling = tail
        .windows(2)
        .all(|w| w[1].resolved_deviation <= w[0].resolved_deviation);
    Ok(LimitCheck {
        target,
        rel_tol,
        pass: close && settling,
        samples,
    })
}
