//! The admissible weight `f_m(t) = (4t(1-t))^m` and its derived quantities:
//! exact norms, `nu(f_m, a)`, the `F_{k,m,delta}` integrals with their
//! Cauchy-Schwarz ceilings, and the certified piecewise integral of
//! `|f_m^(m)|` through the roots of the shifted Legendre polynomial.
//!
//! `f_m^(m)(t) = 4^m m! P_m(1-2t)` (Rodrigues), so the integral of
//! `(1+delta t)^(m+1) |f_m^(m)|` splits into sign-constant polynomial pieces
//! between consecutive roots of `P_m(1-2t)`. Roots are isolated into
//! certified dyadic enclosures; the piece integrals are evaluated as exact
//! antiderivatives at rational points inside those enclosures, and the
//! residual root slack is added to keep the result an honest upper bound.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rug::ops::Pow;
use rug::{Integer, Rational};
use thiserror::Error;

use crate::numerics::{
    binomial, factorial, pow2_rational, Enclosure, Precision,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WeightError {
    #[error("root isolation failed for shifted Legendre polynomial of degree {degree}")]
    RootIsolation { degree: u32 },
    #[error("unsupported F index k={k} for m={m}; only k in {{0, 1, m}} arises")]
    UnsupportedK { k: u32, m: u32 },
    #[error("weight parameter out of range: {0}")]
    ParamRange(String),
}

/// Polynomial with exact rational coefficients, ascending order.
#[derive(Debug, Clone, PartialEq)]
pub struct RatPoly {
    coeffs: Vec<Rational>,
}

impl RatPoly {
    pub fn new(coeffs: Vec<Rational>) -> Self {
        let mut p = RatPoly { coeffs };
        p.trim();
        p
    }

    fn trim(&mut self) {
        while self.coeffs.len() > 1 && *self.coeffs.last().unwrap() == 0 {
            self.coeffs.pop();
        }
    }

    pub fn zero() -> Self {
        RatPoly { coeffs: vec![Rational::new()] }
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn mul(&self, other: &RatPoly) -> RatPoly {
        let mut out = vec![Rational::new(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if *a == 0 {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += Rational::from(a * b);
            }
        }
        RatPoly::new(out)
    }

    pub fn derivative(&self) -> RatPoly {
        if self.coeffs.len() == 1 {
            return RatPoly::zero();
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| Rational::from(c * Rational::from(k as u64)))
            .collect();
        RatPoly::new(coeffs)
    }

    /// Antiderivative with zero constant term.
    pub fn antiderivative(&self) -> RatPoly {
        let mut coeffs = vec![Rational::new()];
        for (k, c) in self.coeffs.iter().enumerate() {
            coeffs.push(Rational::from(c / Rational::from((k + 1) as u64)));
        }
        RatPoly::new(coeffs)
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::new();
        for c in self.coeffs.iter().rev() {
            acc *= x;
            acc += c;
        }
        acc
    }

    /// Exact integral over `[a, b]`.
    pub fn integral(&self, a: &Rational, b: &Rational) -> Rational {
        let anti = self.antiderivative();
        anti.eval(b) - anti.eval(a)
    }

    /// Directed Horner evaluation.
    pub fn eval_enclosure(&self, x: &Enclosure, prec: Precision) -> Enclosure {
        let mut acc = Enclosure::zero(prec);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(x).add(&Enclosure::from_rational(c, prec));
        }
        acc
    }
}

/// `(4t(1-t))^m` expanded exactly: `4^m sum_k C(m,k) (-1)^k t^(m+k)`.
pub fn f_poly(m: u32) -> RatPoly {
    let four_m = Rational::from(Integer::from(4).pow(m));
    let mut coeffs = vec![Rational::new(); (2 * m + 1) as usize];
    for k in 0..=m {
        let mut c = Rational::from(binomial(m, k)) * &four_m;
        if k % 2 == 1 {
            c = -c;
        }
        coeffs[(m + k) as usize] = c;
    }
    RatPoly::new(coeffs)
}

/// `(1 + delta t)^n` expanded exactly.
pub fn one_plus_delta_t_pow(delta: &Rational, n: u32) -> RatPoly {
    let coeffs = (0..=n)
        .map(|k| Rational::from(binomial(n, k)) * Rational::from(delta.pow(k as i32)))
        .collect();
    RatPoly::new(coeffs)
}

/// `||f_m||_1 = 2^(2m) (m!)^2 / (2m+1)!`, exact.
pub fn norm1(m: u32) -> Rational {
    assert!(m >= 1, "norm1 requires m >= 1");
    let num = Integer::from(4).pow(m) * factorial(m).pow(2);
    Rational::from((num, factorial(2 * m + 1)))
}

/// `||f_m^(m)||_2^2 = (2^(2m) m!)^2 / (2m+1)`, exact.
pub fn norm2_mth_derivative_sq(m: u32) -> Rational {
    assert!(m >= 1, "norm2 requires m >= 1");
    let num = (Integer::from(4).pow(m) * factorial(m)).pow(2);
    Rational::from((num, Integer::from(2 * m + 1)))
}

/// `nu(f_m, a) = 2 * integral of f_m over [0, a]`, exact (f_m is symmetric
/// about 1/2, so the two edge masses agree).
pub fn nu(m: u32, a: &Rational) -> Rational {
    assert!(*a >= 0 && *a <= Rational::from((1, 2)), "nu requires 0 <= a <= 1/2");
    let f = f_poly(m);
    let val = f.integral(&Rational::new(), a);
    Rational::from(2) * val
}

/// Exact `F_{0,m,delta} = integral of (1+delta t) f_m / ||f_m||_1` (equals
/// `1 + delta/2` by symmetry; computed generically).
pub fn f0_exact(m: u32, delta: &Rational) -> Rational {
    let g = one_plus_delta_t_pow(delta, 1).mul(&f_poly(m));
    let val = g.integral(&Rational::new(), &Rational::from(1));
    let r = val / norm1(m);
    debug_assert_eq!(r, Rational::from(1) + Rational::from(delta / Rational::from(2)));
    r
}

/// Exact `F_{1,m,delta}`: piecewise integral of `(1+delta t)^2 |f_m'|` split
/// at `t = 1/2` (where `f_m'` changes sign), normalized by `||f_m||_1`.
pub fn f1_exact(m: u32, delta: &Rational) -> Rational {
    let g = one_plus_delta_t_pow(delta, 2).mul(&f_poly(m).derivative());
    let half = Rational::from((1, 2));
    let one = Rational::from(1);
    let val = g.integral(&Rational::new(), &half) - g.integral(&half, &one);
    val / norm1(m)
}

/// The Cauchy-Schwarz ceilings of the `F` integrals.
#[derive(Debug, Clone)]
pub struct LambdaBounds {
    /// `lambda_0 = (2m+1)! / (2^(2m-1) (m!)^2)`, exact.
    pub lambda0: Rational,
    /// `lambda_1 = (1+delta)^2 lambda_0`, exact.
    pub lambda1: Rational,
    /// `lambda = sqrt(((1+delta)^(2m+3) - 1)/(delta (2m+3))) (2m+1)!/(m! sqrt(2m+1))`.
    pub lambda: Enclosure,
}

pub fn lambda_bounds(m: u32, delta: &Rational, prec: Precision) -> LambdaBounds {
    assert!(m >= 1 && *delta > 0);
    let lambda0 = Rational::from(2) / norm1(m);
    let one_plus = Rational::from(1) + delta.clone();
    let lambda1 = Rational::from(one_plus.clone().pow(2)) * &lambda0;
    let ratio = (Rational::from(one_plus.pow(2 * m as i32 + 3)) - 1u32)
        / (Rational::from(delta * Rational::from(2 * m + 3)));
    let scale = Rational::from((factorial(2 * m + 1), factorial(m)));
    let lambda = Enclosure::from_rational(&ratio, prec)
        .sqrt()
        .mul(&Enclosure::from_rational(&scale, prec))
        .div(&Enclosure::from_u64(u64::from(2 * m + 1), prec).sqrt());
    LambdaBounds { lambda0, lambda1, lambda }
}

/// A certified root enclosure `[lo, hi]` with dyadic rational endpoints.
#[derive(Debug, Clone)]
pub struct Breakpoint {
    pub lo: Rational,
    pub hi: Rational,
}

impl Breakpoint {
    fn exact(v: Rational) -> Self {
        Breakpoint { hi: v.clone(), lo: v }
    }

    pub fn width(&self) -> Rational {
        Rational::from(&self.hi - &self.lo)
    }

    pub fn midpoint(&self) -> Rational {
        Rational::from(&self.hi + &self.lo) / Rational::from(2)
    }
}

/// `P_m(1-2t)` with exact coefficients and certified breakpoints
/// `{0, the m interior roots ascending, 1}`.
#[derive(Debug, Clone)]
pub struct ShiftedLegendre {
    pub m: u32,
    /// Ascending coefficients of `P_m(1-2t) = sum_k (-1)^k C(m,k) C(m+k,k) t^k`.
    pub coefficients: Vec<Rational>,
    /// m+2 breakpoints: 0, the m interior root enclosures, 1.
    pub breakpoints: Vec<Breakpoint>,
}

pub fn shifted_legendre_coeffs(m: u32) -> Vec<Rational> {
    // P_m(1-2t) = sum_k (-1)^k C(m,k) C(m+k,k) t^k; P_m(1) = 1 for every m
    (0..=m)
        .map(|k| {
            let mut c = Rational::from(binomial(m, k) * binomial(m + k, k));
            if k % 2 == 1 {
                c = -c;
            }
            c
        })
        .collect()
}

/// f64 evaluation of `(P_m(x), P_{m-1}(x))` by the three-term recurrence.
fn legendre_rec(m: u32, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if m == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=m {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    (p1, p0)
}

/// Newton-refined f64 seed for the k-th positive root of `P_m` (k = 1 is the
/// largest). Soundness never depends on seed quality; brackets are verified
/// exactly afterwards.
fn legendre_root_seed(m: u32, k: u32) -> f64 {
    let mf = m as f64;
    let mut x = (std::f64::consts::PI * (4.0 * k as f64 - 1.0) / (4.0 * mf + 2.0)).cos();
    for _ in 0..40 {
        let (pm, pm1) = legendre_rec(m, x);
        let dp = mf * (x * pm - pm1) / (x * x - 1.0);
        let step = pm / dp;
        x -= step;
        if step.abs() < 1e-15 {
            break;
        }
    }
    x
}

fn sign_of(r: &Rational) -> i32 {
    match r.cmp0() {
        std::cmp::Ordering::Less => -1,
        std::cmp::Ordering::Equal => 0,
        std::cmp::Ordering::Greater => 1,
    }
}

impl ShiftedLegendre {
    /// Isolates the m interior roots of `P_m(1-2t)` into enclosures of width
    /// at most `2^-(p-8)` and verifies the sign alternation across pieces.
    pub fn new(m: u32, prec: Precision) -> Result<Arc<Self>, WeightError> {
        static CACHE: OnceLock<Mutex<HashMap<(u32, u32), Arc<ShiftedLegendre>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(hit) = cache.lock().unwrap().get(&(m, prec.bits())) {
            return Ok(hit.clone());
        }
        let built = Arc::new(Self::build(m, prec)?);
        cache
            .lock()
            .unwrap()
            .insert((m, prec.bits()), built.clone());
        Ok(built)
    }

    fn build(m: u32, prec: Precision) -> Result<Self, WeightError> {
        assert!(m >= 1, "shifted Legendre needs m >= 1");
        let coefficients = shifted_legendre_coeffs(m);
        let poly = RatPoly::new(coefficients.clone());
        let err = || WeightError::RootIsolation { degree: m };
        let target_width = pow2_rational(i64::from(prec.bits()) - 8);

        // interior roots in t, ascending; roots come in mirror pairs about 1/2
        let mut enclosures: Vec<Breakpoint> = Vec::with_capacity(m as usize);
        let half = Rational::from((1, 2));
        let iso_prec = Precision::new(prec.bits() + 64).unwrap_or(prec);
        let coeff_enc: Vec<Enclosure> = poly
            .coeffs()
            .iter()
            .map(|c| Enclosure::from_rational(c, iso_prec))
            .collect();

        let eval_enc = |x: &Rational| -> Enclosure {
            let xe = Enclosure::from_rational(x, iso_prec);
            let mut acc = Enclosure::zero(iso_prec);
            for c in coeff_enc.iter().rev() {
                acc = acc.mul(&xe).add(c);
            }
            acc
        };
        // certified sign: enclosure first, exact rational arithmetic as fallback
        let sign_at = |x: &Rational| -> i32 {
            let e = eval_enc(x);
            if *e.lo() > 0 {
                1
            } else if *e.hi() < 0 {
                -1
            } else {
                sign_of(&poly.eval(x))
            }
        };

        for k in 1..=(m / 2) {
            // k-th largest positive root of P_m maps to the k-th smallest t
            let x = legendre_root_seed(m, k);
            let t = (1.0 - x) / 2.0;
            let mut eps = pow2_rational(36);
            let t_rat = Rational::from_f64(t).ok_or_else(err)?;
            let mut bracket = None;
            for _ in 0..12 {
                let lo = Rational::from(&t_rat - &eps);
                let hi = Rational::from(&t_rat + &eps);
                if lo > 0 && hi < half && sign_at(&lo) * sign_at(&hi) < 0 {
                    bracket = Some((lo, hi));
                    break;
                }
                eps *= Rational::from(4);
            }
            let (mut lo, mut hi) = bracket.ok_or_else(err)?;
            let mut sign_lo = sign_at(&lo);
            while Rational::from(&hi - &lo) > target_width {
                let mut mid = Rational::from(&hi + &lo) / Rational::from(2);
                let mut s_mid = sign_at(&mid);
                if s_mid == 0 {
                    // dyadic midpoints are never roots here; nudge off-center
                    mid = (Rational::from(&lo * Rational::from(3)) + &hi) / Rational::from(4);
                    s_mid = sign_at(&mid);
                    if s_mid == 0 {
                        return Err(err());
                    }
                }
                if s_mid == sign_lo {
                    lo = mid;
                } else {
                    hi = mid;
                    let _ = &mut sign_lo;
                }
            }
            enclosures.push(Breakpoint { lo, hi });
        }
        // mirror to the upper half; odd m has the exact middle root t = 1/2
        let mut upper: Vec<Breakpoint> = enclosures
            .iter()
            .rev()
            .map(|b| Breakpoint {
                lo: Rational::from(1) - &b.hi,
                hi: Rational::from(1) - &b.lo,
            })
            .collect();
        if m % 2 == 1 {
            enclosures.push(Breakpoint::exact(half.clone()));
        }
        enclosures.append(&mut upper);

        let mut breakpoints = Vec::with_capacity(m as usize + 2);
        breakpoints.push(Breakpoint::exact(Rational::new()));
        breakpoints.extend(enclosures);
        breakpoints.push(Breakpoint::exact(Rational::from(1)));

        // verify ordering and sign alternation on the m+1 pieces
        let mut expected = 1; // P_m(1-2*0) = P_m(1) = 1
        for w in breakpoints.windows(2) {
            if w[0].hi >= w[1].lo {
                return Err(err());
            }
            let mid = (Rational::from(&w[0].hi) + &w[1].lo) / Rational::from(2);
            if sign_at(&mid) != expected {
                return Err(err());
            }
            expected = -expected;
        }

        Ok(ShiftedLegendre { m, coefficients, breakpoints })
    }
}

/// Certified upper bound of
/// `integral of (1+delta t)^(m+1) |f_m^(m)(t)| / ||f_m||_1` via exact
/// antiderivatives between breakpoint midpoints plus root-slack.
pub fn legendre_fmm_upper(
    m: u32,
    delta: &Rational,
    prec: Precision,
) -> Result<Enclosure, WeightError> {
    assert!(m >= 1, "legendre_fmm_upper requires m >= 1");
    let leg = ShiftedLegendre::new(m, prec)?;
    let poly = RatPoly::new(leg.coefficients.clone());
    let anti = one_plus_delta_t_pow(delta, m + 1).mul(&poly).antiderivative();

    let eval_prec = Precision::new(prec.bits() + 64).unwrap_or(prec);
    let points: Vec<Rational> = leg.breakpoints.iter().map(|b| b.midpoint()).collect();
    let values: Vec<Enclosure> = points
        .iter()
        .map(|s| anti.eval_enclosure(&Enclosure::from_rational(s, eval_prec), eval_prec))
        .collect();

    let mut total = Enclosure::zero(eval_prec);
    for w in values.windows(2) {
        total = total.add(&w[1].sub(&w[0]).abs());
    }
    // slack: the true breakpoints differ from the midpoints by at most the
    // enclosure half-width, and |(1+delta t)^(m+1) P_m(1-2t)| <= (1+delta)^(m+1)
    let width_sum: Rational = leg
        .breakpoints
        .iter()
        .fold(Rational::new(), |acc, b| acc + b.width());
    let gmax = Rational::from(1) + delta.clone();
    let slack = width_sum * Rational::from(gmax.pow(m as i32 + 1));
    total = total.add(&Enclosure::from_rational(&slack, eval_prec));

    let scale = Rational::from(Integer::from(4).pow(m) * factorial(m)) / norm1(m);
    let scaled = total.mul(&Enclosure::from_rational(&scale, eval_prec));
    Ok(scaled)
}

/// Enclosure of `F_{k,m,delta}` for the supported indices `k in {0, 1, m}`.
///
/// `k = 0` and `k = 1` are exact rational integrals; `k = m` is the
/// min of the certified piecewise Legendre bound and the Cauchy-Schwarz
/// ceiling `lambda(m, delta)`.
pub fn f_k(k: u32, m: u32, delta: &Rational, prec: Precision) -> Result<Enclosure, WeightError> {
    if k == 0 {
        Ok(Enclosure::from_rational(&f0_exact(m, delta), prec))
    } else if k == 1 {
        Ok(Enclosure::from_rational(&f1_exact(m, delta), prec))
    } else if k == m {
        let piecewise = legendre_fmm_upper(m, delta, prec)?;
        let lb = lambda_bounds(m, delta, prec);
        Ok(piecewise.min(&lb.lambda))
    } else {
        Err(WeightError::UnsupportedK { k, m })
    }
}

/// Exact and certified values of the weight quantities for one `(m, delta, a)`.
#[derive(Debug, Clone)]
pub struct WeightProfile {
    pub m: u32,
    pub delta: Rational,
    pub a: Rational,
    /// `||f_m||_1`, exact.
    pub norm1: Rational,
    /// `F_{0,m,delta}`, exact rational with its enclosure.
    pub f0: Rational,
    pub f0_enclosure: Enclosure,
    /// `F_{1,m,delta}`, exact rational with its enclosure.
    pub f1: Rational,
    pub f1_enclosure: Enclosure,
    /// Certified upper bound of `F_{m,m,delta}` (piecewise Legendre min lambda).
    pub fmm_upper: Enclosure,
    /// `nu(f_m, a)`, exact.
    pub nu_a: Rational,
    /// `integral of f_m over [a, 1-a] = norm1 - nu_a`, exact.
    pub mid_mass: Rational,
}

impl WeightProfile {
    pub fn compute(
        m: u32,
        delta: &Rational,
        a: &Rational,
        prec: Precision,
    ) -> Result<Arc<WeightProfile>, WeightError> {
        if m < 2 {
            return Err(WeightError::ParamRange(format!("m = {m} < 2")));
        }
        if !(*delta > 0 && *delta <= Rational::from((1, 10_000))) {
            return Err(WeightError::ParamRange(format!("delta = {delta} outside (0, 1e-4]")));
        }
        if !(*a >= 0 && *a <= Rational::from((1, 2))) {
            return Err(WeightError::ParamRange(format!("a = {a} outside [0, 1/2]")));
        }
        let core = WeightCore::get(m, delta, prec)?;
        let nu_a = nu(m, a);
        let mid_mass = Rational::from(&core.norm1 - &nu_a);
        let profile = WeightProfile {
            m,
            delta: delta.clone(),
            a: a.clone(),
            norm1: core.norm1.clone(),
            f0: core.f0.clone(),
            f0_enclosure: core.f0_enclosure.clone(),
            f1: core.f1.clone(),
            f1_enclosure: core.f1_enclosure.clone(),
            fmm_upper: core.fmm_upper.clone(),
            nu_a,
            mid_mass,
        };
        profile.check_invariants()?;
        Ok(Arc::new(profile))
    }

    fn check_invariants(&self) -> Result<(), WeightError> {
        let one_plus = Rational::from(1) + self.delta.clone();
        if !(self.f0 >= 1 && self.f0 <= one_plus) {
            return Err(WeightError::ParamRange("F0 outside [1, 1+delta]".into()));
        }
        let lambda0 = Rational::from(2) / self.norm1.clone();
        let lambda1 = Rational::from(one_plus.pow(2)) * &lambda0;
        if !(self.f1 >= lambda0 && self.f1 <= lambda1) {
            return Err(WeightError::ParamRange("F1 outside [lambda0, lambda1]".into()));
        }
        if self.nu_a.cmp0() == std::cmp::Ordering::Less {
            return Err(WeightError::ParamRange("nu < 0".into()));
        }
        debug_assert_eq!(Rational::from(&self.nu_a + &self.mid_mass), self.norm1);
        Ok(())
    }
}

/// Per-(m, delta) cached pieces of a profile (everything except `nu`).
struct WeightCore {
    norm1: Rational,
    f0: Rational,
    f0_enclosure: Enclosure,
    f1: Rational,
    f1_enclosure: Enclosure,
    fmm_upper: Enclosure,
}

impl WeightCore {
    fn get(m: u32, delta: &Rational, prec: Precision) -> Result<Arc<WeightCore>, WeightError> {
        static CACHE: OnceLock<Mutex<HashMap<(u32, Rational, u32), Arc<WeightCore>>>> =
            OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let key = (m, delta.clone(), prec.bits());
        if let Some(hit) = cache.lock().unwrap().get(&key) {
            return Ok(hit.clone());
        }
        let f0 = f0_exact(m, delta);
        let f1 = f1_exact(m, delta);
        let core = Arc::new(WeightCore {
            norm1: norm1(m),
            f0_enclosure: Enclosure::from_rational(&f0, prec),
            f0,
            f1_enclosure: Enclosure::from_rational(&f1, prec),
            f1,
            fmm_upper: f_k(m, m, delta, prec)?,
        });
        cache.lock().unwrap().insert(key, core.clone());
        Ok(core)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> Precision {
        Precision::DEFAULT
    }

    fn rat(n: i64, d: u64) -> Rational {
        Rational::from((n, d))
    }

    /// Composite-Simpson quadrature oracle on a smooth piece, doubling the
    /// panel count until two refinements agree.
    fn simpson_oracle(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        let mut n = 64;
        let mut prev = f64::NAN;
        loop {
            let h = (b - a) / n as f64;
            let mut s = f(a) + f(b);
            for i in 1..n {
                let x = a + i as f64 * h;
                s += f(x) * if i % 2 == 1 { 4.0 } else { 2.0 };
            }
            let val = s * h / 3.0;
            if (val - prev).abs() <= 1e-15 * val.abs().max(1e-300) || n >= 1 << 22 {
                return val;
            }
            prev = val;
            n *= 2;
        }
    }

    #[test]
    fn norm1_matches_quadrature_oracle() {
        for (m, expected) in [(2u32, rat(8, 15)), (3, rat(16, 35)), (5, rat(256, 693))] {
            assert_eq!(norm1(m), expected);
            let q = simpson_oracle(&|t: f64| (4.0 * t * (1.0 - t)).powi(m as i32), 0.0, 1.0);
            let exact = expected.to_f64();
            assert!((q - exact).abs() < 1e-12 * exact, "m={m}: {q} vs {exact}");
        }
    }

    #[test]
    fn norm2_matches_symbolic_differentiation_oracle() {
        // independent route: m-fold RatPoly differentiation + exact integration
        for m in [1u32, 2, 5] {
            let mut d = f_poly(m);
            for _ in 0..m {
                d = d.derivative();
            }
            let sq = d.mul(&d);
            let exact = sq.integral(&Rational::new(), &Rational::from(1));
            assert_eq!(exact, norm2_mth_derivative_sq(m), "m={m}");
        }
        assert_eq!(norm2_mth_derivative_sq(1), rat(16, 3));
        assert_eq!(norm2_mth_derivative_sq(2), rat(1024, 5));
        let m5 = Rational::from((Integer::from(1024) * Integer::from(120)).pow(2)) / Rational::from(11);
        assert_eq!(norm2_mth_derivative_sq(5), m5);
    }

    #[test]
    fn nu_examples() {
        assert_eq!(nu(3, &Rational::new()), Rational::new());
        for m in [2u32, 5, 9] {
            assert_eq!(nu(m, &rat(1, 2)), norm1(m), "full mass at a = 1/2");
        }
        assert_eq!(nu(2, &rat(1, 4)), rat(53, 480));
    }

    #[test]
    fn nu_is_increasing_in_a() {
        let mut prev = Rational::new();
        for k in 1..=50 {
            let a = Rational::from((k, 100u32));
            let v = nu(7, &a);
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn f0_is_one_plus_half_delta() {
        let d = rat(1, 100_000_000);
        assert_eq!(f0_exact(4, &d), Rational::from(1) + Rational::from(&d / Rational::from(2)));
    }

    #[test]
    fn f1_matches_norm_ratio_at_delta_zero() {
        // ||f2'||_1 / ||f2||_1 = 2/(8/15) = 15/4 = lambda0(2)
        assert_eq!(f1_exact(2, &Rational::new()), rat(15, 4));
        let lb = lambda_bounds(2, &rat(1, 1_000_000), p());
        assert_eq!(lb.lambda0, rat(15, 4));
        assert_eq!(lb.lambda1, Rational::from(rat(1_000_001, 1_000_000).pow(2)) * rat(15, 4));
    }

    #[test]
    fn f1_agrees_with_quadrature_oracle() {
        for (m, dl) in [(2u32, 1e-6), (5, 3.58e-8), (8, 1.134e-8)] {
            let delta = Rational::from_f64(dl).unwrap();
            let exact = f1_exact(m, &delta).to_f64();
            let fp = |t: f64| {
                let fprime = (m as f64)
                    * (4.0 * t * (1.0 - t)).powi(m as i32 - 1)
                    * (4.0 - 8.0 * t);
                (1.0 + dl * t) * (1.0 + dl * t) * fprime.abs()
            };
            let oracle = (simpson_oracle(&fp, 0.0, 0.5) + simpson_oracle(&fp, 0.5, 1.0))
                / norm1(m).to_f64();
            assert!((exact - oracle).abs() < 1e-12 * exact, "m={m}: {exact} vs {oracle}");
        }
    }

    #[test]
    fn shifted_legendre_m2_matches_quadratic_formula() {
        // P_2(1-2t) = 6t^2 - 6t + 1, interior roots (1 -+ 1/sqrt(3))/2
        let leg = ShiftedLegendre::new(2, p()).unwrap();
        assert_eq!(
            leg.coefficients,
            vec![Rational::from(1), Rational::from(-6), Rational::from(6)]
        );
        let r0 = (1.0 - 1.0 / 3.0f64.sqrt()) / 2.0;
        let r1 = (1.0 + 1.0 / 3.0f64.sqrt()) / 2.0;
        let b = &leg.breakpoints;
        assert_eq!(b.len(), 4);
        assert!(b[1].lo.to_f64() <= r0 && r0 <= b[1].hi.to_f64());
        assert!(b[2].lo.to_f64() <= r1 && r1 <= b[2].hi.to_f64());
    }

    #[test]
    fn breakpoints_are_tight_ordered_and_cover_unit_interval() {
        for m in [2u32, 3, 5, 20, 61] {
            let leg = ShiftedLegendre::new(m, p()).unwrap();
            assert_eq!(leg.breakpoints.len(), m as usize + 2);
            let target = pow2_rational(i64::from(p().bits()) - 8);
            let mut total = Rational::new();
            for w in leg.breakpoints.windows(2) {
                assert!(w[0].hi < w[1].lo);
                total += w[1].midpoint() - w[0].midpoint();
            }
            for b in &leg.breakpoints[1..leg.breakpoints.len() - 1] {
                assert!(b.width() <= target);
            }
            assert_eq!(total, Rational::from(1), "piece lengths sum to 1 exactly");
        }
    }

    #[test]
    fn legendre_fmm_m1_delta0_limit() {
        // integral |f_1'| / ||f_1||_1 = 2 / (2/3) = 3; approach with tiny delta
        let tiny = Rational::from((1, Integer::from(10).pow(12)));
        let v = legendre_fmm_upper(1, &tiny, p()).unwrap();
        assert!((v.to_f64() - 3.0).abs() < 1e-6);
    }

    #[test]
    fn fmm_upper_stays_below_lambda() {
        for (m, dl) in [(2u32, "1e-8"), (5, "3.580e-8"), (20, "3.889e-9"), (61, "4.589e-9")] {
            let delta = crate::numerics::parse_decimal(dl).unwrap();
            let piece = legendre_fmm_upper(m, &delta, p()).unwrap();
            let lb = lambda_bounds(m, &delta, p());
            // bnd-Fm: the piecewise value never exceeds lambda (with margin)
            assert!(
                piece.hi().to_f64() <= lb.lambda.lo().to_f64() * (1.0 + 1e-10),
                "m={m}"
            );
        }
    }

    #[test]
    fn fmm_agrees_with_piecewise_quadrature_oracle() {
        for (m, dl) in [(2u32, 1e-8), (3, 1e-8), (5, 3.58e-8), (8, 1.134e-8)] {
            let delta = Rational::from_f64(dl).unwrap();
            let certified = legendre_fmm_upper(m, &delta, p()).unwrap();
            // oracle path: f64 Newton roots + Simpson per smooth piece
            let scale = (4.0f64.powi(m as i32)) * factorial(m).to_f64() / norm1(m).to_f64();
            let coeffs: Vec<f64> = shifted_legendre_coeffs(m).iter().map(|c| c.to_f64()).collect();
            let pm = move |t: f64| {
                let mut acc = 0.0;
                for c in coeffs.iter().rev() {
                    acc = acc * t + c;
                }
                acc
            };
            let mut pts = vec![0.0f64];
            for k in 1..=m {
                let idx = if k <= m / 2 { k } else { m + 1 - k };
                let x = legendre_root_seed(m, idx);
                let t = if k <= m / 2 { (1.0 - x) / 2.0 } else { (1.0 + x) / 2.0 };
                pts.push(t);
            }
            if m % 2 == 1 {
                pts[(m / 2 + 1) as usize] = 0.5;
            }
            pts.push(1.0);
            pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let mut oracle = 0.0;
            for w in pts.windows(2) {
                let g = |t: f64| (1.0 + dl * t).powi(m as i32 + 1) * pm(t);
                oracle += simpson_oracle(&g, w[0], w[1]).abs();
            }
            oracle *= scale;
            let mid = certified.to_f64();
            assert!(
                (mid - oracle).abs() < 1e-12 * oracle,
                "m={m}: certified {mid} vs oracle {oracle}"
            );
        }
    }

    #[test]
    fn f_k_rejects_unsupported_index() {
        let d = rat(1, 1_000_000_000);
        assert!(matches!(f_k(2, 5, &d, p()), Err(WeightError::UnsupportedK { k: 2, m: 5 })));
    }

    #[test]
    fn profile_invariants_hold_across_m_range() {
        let delta = crate::numerics::parse_decimal("1e-8").unwrap();
        let a = rat(1, 5);
        for m in [2u32, 5, 17, 40, 64] {
            let prof = WeightProfile::compute(m, &delta, &a, p()).unwrap();
            assert_eq!(Rational::from(&prof.nu_a + &prof.mid_mass), prof.norm1);
            // independent mid-mass route: direct integral over [a, 1-a]
            let direct = f_poly(m).integral(&a, &(Rational::from(1) - &a));
            assert_eq!(direct, prof.mid_mass);
        }
    }

    #[test]
    fn profile_rejects_out_of_range_parameters() {
        let d = rat(1, 1_000_000_000);
        let a = rat(1, 5);
        assert!(WeightProfile::compute(1, &d, &a, p()).is_err());
        assert!(WeightProfile::compute(5, &rat(1, 1000), &a, p()).is_err());
        assert!(WeightProfile::compute(5, &d, &rat(3, 4), p()).is_err());
    }
}
