//! Complex polynomials and rational functions in one or several variables.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{domain, QqbfError, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A point of the extended complex plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtendedComplex {
    Finite(Complex64),
    Infinity,
}

impl ExtendedComplex {
    pub fn finite(re: f64, im: f64) -> Self {
        ExtendedComplex::Finite(Complex64::new(re, im))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtendedComplex::Infinity)
    }

    pub fn as_finite(&self) -> Option<Complex64> {
        match self {
            ExtendedComplex::Finite(z) => Some(*z),
            ExtendedComplex::Infinity => None,
        }
    }
}

impl From<Complex64> for ExtendedComplex {
    fn from(z: Complex64) -> Self {
        ExtendedComplex::Finite(z)
    }
}

impl From<f64> for ExtendedComplex {
    fn from(x: f64) -> Self {
        ExtendedComplex::Finite(Complex64::new(x, 0.0))
    }
}

impl fmt::Display for ExtendedComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedComplex::Infinity => write!(f, "inf"),
            ExtendedComplex::Finite(z) => {
                let sign = if z.im.is_sign_negative() { '-' } else { '+' };
                write!(f, "{:?}{}{:?}i", z.re, sign, z.im.abs())
            }
        }
    }
}

impl FromStr for ExtendedComplex {
    type Err = QqbfError;

    /// Accepts `inf`, `3`, `-1.5e-2`, `2i`, `-i`, `1+2i`, `0.5-1e-3i`.
    fn from_str(s: &str) -> Result<Self> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || QqbfError::Parse(format!("cannot parse complex number {s:?}"));
        match t.to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "+inf" | "∞" => return Ok(ExtendedComplex::Infinity),
            "" => return Err(bad()),
            _ => {}
        }
        let num = |x: &str| -> Result<f64> {
            let v: f64 = x.parse().map_err(|_| bad())?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(bad())
            }
        };
        let Some(body) = t.strip_suffix('i') else {
            return Ok(ExtendedComplex::finite(num(&t)?, 0.0));
        };
        let bytes = body.as_bytes();
        let split = (1..bytes.len())
            .rev()
            .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
        let imag = |x: &str| -> Result<f64> {
            match x {
                "" | "+" => Ok(1.0),
                "-" => Ok(-1.0),
                _ => num(x),
            }
        };
        match split {
            Some(k) => Ok(ExtendedComplex::finite(num(&body[..k])?, imag(&body[k..])?)),
            None => Ok(ExtendedComplex::finite(0.0, imag(body)?)),
        }
    }
}

fn check_finite(c: Complex64) -> Result<()> {
    if c.re.is_finite() && c.im.is_finite() {
        Ok(())
    } else {
        domain("non-finite coefficient")
    }
}

/// Dense univariate polynomial, ascending powers.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly {
    coeffs: Vec<Complex64>,
}

impl Poly {
    /// Trailing zero coefficients are dropped; the zero polynomial is `[0]`.
    pub fn new(mut coeffs: Vec<Complex64>) -> Result<Self> {
        for c in &coeffs {
            check_finite(*c)?;
        }
        while coeffs.len() > 1 && coeffs.last() == Some(&ZERO) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(ZERO);
        }
        Ok(Poly { coeffs })
    }

    pub fn from_real(coeffs: &[f64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Poly { coeffs: vec![ZERO] }
    }

    pub fn constant(c: Complex64) -> Self {
        Poly { coeffs: vec![c] }
    }

    /// `c z^power`.
    pub fn monomial(c: Complex64, power: usize) -> Self {
        let mut coeffs = vec![ZERO; power + 1];
        coeffs[power] = c;
        Poly::new(coeffs).unwrap_or_else(|_| Poly::zero())
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient of `z^j`, zero beyond the degree.
    pub fn coeff(&self, j: usize) -> Complex64 {
        self.coeffs.get(j).copied().unwrap_or(ZERO)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == ZERO
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        if self.is_zero() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, c| acc * z + c)
    }

    pub fn eval_ext(&self, z: ExtendedComplex) -> ExtendedComplex {
        match z {
            ExtendedComplex::Finite(z) => ExtendedComplex::Finite(self.eval(z)),
            ExtendedComplex::Infinity => match self.degree() {
                Some(d) if d >= 1 => ExtendedComplex::Infinity,
                _ => ExtendedComplex::Finite(self.coeffs[0]),
            },
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = vec![ZERO; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out).unwrap_or_else(|_| Poly::zero())
    }

    pub fn scale(&self, s: Complex64) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| c * s).collect()).unwrap_or_else(|_| Poly::zero())
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Sylvester resultant of two polynomials of degree >= 1.
pub fn resultant(p: &Poly, q: &Poly) -> Complex64 {
    let (Some(m), Some(n)) = (p.degree(), q.degree()) else {
        return ZERO;
    };
    let size = m + n;
    if size == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let mut s = DMatrix::<Complex64>::zeros(size, size);
    for row in 0..n {
        for k in 0..=m {
            s[(row, row + k)] = p.coeffs[m - k];
        }
    }
    for row in 0..m {
        for k in 0..=n {
            s[(n + row, row + k)] = q.coeffs[n - k];
        }
    }
    s.determinant()
}

/// Resultant magnitude divided by its Hadamard bound `|P|^deg Q |Q|^deg P`.
pub fn normalized_resultant(p: &Poly, q: &Poly) -> f64 {
    let (Some(m), Some(n)) = (p.degree(), q.degree()) else {
        return 0.0;
    };
    if m == 0 || n == 0 {
        return 1.0;
    }
    let bound = p.norm().powi(n as i32) * q.norm().powi(m as i32);
    resultant(p, q).norm() / bound
}

/// True when P and Q share no root, judged by the normalized resultant.
pub fn coprime_check(p: &Poly, q: &Poly, tol: f64) -> bool {
    match (p.degree(), q.degree()) {
        (None, None) => false,
        (None, Some(d)) | (Some(d), None) => d == 0,
        _ => normalized_resultant(p, q) > tol,
    }
}

/// Coprime pair P/Q with Q nonzero.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalFn {
    p: Poly,
    q: Poly,
}

impl RationalFn {
    pub fn new(p: Poly, q: Poly) -> Result<Self> {
        Self::with_tolerance(p, q, crate::NumericPolicy::default().coprime)
    }

    pub fn with_tolerance(p: Poly, q: Poly, tol: f64) -> Result<Self> {
        if q.is_zero() {
            return domain("denominator is the zero polynomial");
        }
        if !coprime_check(&p, &q, tol) {
            return Err(QqbfError::NotCoprime(format!(
                "normalized resultant {:.3e} <= {tol:.1e}",
                normalized_resultant(&p, &q)
            )));
        }
        Ok(RationalFn { p, q })
    }

    /// The identity function z.
    pub fn identity() -> Self {
        RationalFn {
            p: Poly::monomial(Complex64::new(1.0, 0.0), 1),
            q: Poly::constant(Complex64::new(1.0, 0.0)),
        }
    }

    pub fn p(&self) -> &Poly {
        &self.p
    }

    pub fn q(&self) -> &Poly {
        &self.q
    }

    pub fn degree(&self) -> usize {
        self.p.degree().unwrap_or(0).max(self.q.degree().unwrap_or(0))
    }

    pub fn eval(&self, z: ExtendedComplex) -> ExtendedComplex {
        ratio_at(&self.p, &self.q, z, self.degree()).unwrap_or(ExtendedComplex::Infinity)
    }

    pub fn to_multi(&self) -> MultiRationalFn {
        MultiRationalFn {
            p: MultiPoly::from_univariate(&self.p),
            q: MultiPoly::from_univariate(&self.q),
        }
    }
}

/// P(z)/Q(z); at infinity the ratio of the degree-n coefficients. `None` for 0/0.
fn ratio_at(p: &Poly, q: &Poly, z: ExtendedComplex, n: usize) -> Option<ExtendedComplex> {
    let (num, den) = match z {
        ExtendedComplex::Finite(z) => (p.eval(z), q.eval(z)),
        ExtendedComplex::Infinity => (p.coeff(n), q.coeff(n)),
    };
    match (num == ZERO, den == ZERO) {
        (true, true) => None,
        (false, true) => Some(ExtendedComplex::Infinity),
        _ => Some(ExtendedComplex::Finite(num / den)),
    }
}

pub fn rational_eval(f: &RationalFn, z: ExtendedComplex) -> ExtendedComplex {
    f.eval(z)
}

/// `(P(z-r), Q(z-r))` or, for r = infinity, the unchanged pair with its
/// target degree raised by one. Not coprime by design.
#[derive(Clone, Debug, PartialEq)]
pub struct PaddedPair {
    pub p: Poly,
    pub q: Poly,
    pub target_degree: usize,
}

impl PaddedPair {
    /// Ratio at z; `None` at the inserted common root.
    pub fn eval(&self, z: ExtendedComplex) -> Option<ExtendedComplex> {
        let n = self.p.degree().unwrap_or(0).max(self.q.degree().unwrap_or(0));
        ratio_at(&self.p, &self.q, z, n)
    }

    pub fn to_multi(&self) -> MultiRationalFn {
        MultiRationalFn {
            p: MultiPoly::from_univariate(&self.p),
            q: MultiPoly::from_univariate(&self.q),
        }
    }
}

pub fn pad(f: &RationalFn, r: ExtendedComplex) -> PaddedPair {
    match r {
        ExtendedComplex::Infinity => PaddedPair {
            p: f.p.clone(),
            q: f.q.clone(),
            target_degree: f.degree() + 1,
        },
        ExtendedComplex::Finite(r) => {
            let factor = Poly { coeffs: vec![-r, Complex64::new(1.0, 0.0)] };
            PaddedPair {
                p: f.p.mul(&factor),
                q: f.q.mul(&factor),
                target_degree: f.degree() + 1,
            }
        }
    }
}

/// Sparse multivariate polynomial keyed by exponent multi-index.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiPoly {
    k: usize,
    terms: BTreeMap<Vec<usize>, Complex64>,
}

impl MultiPoly {
    /// Duplicate indices are summed, zero terms dropped.
    pub fn new(k: usize, terms: impl IntoIterator<Item = (Vec<usize>, Complex64)>) -> Result<Self> {
        if k == 0 {
            return domain("a multivariate polynomial needs at least one variable");
        }
        let mut map = BTreeMap::new();
        for (idx, c) in terms {
            check_finite(c)?;
            if idx.len() != k {
                return Err(QqbfError::Dimension { expected: k, got: idx.len() });
            }
            *map.entry(idx).or_insert(ZERO) += c;
        }
        map.retain(|_, c| *c != ZERO);
        Ok(MultiPoly { k, terms: map })
    }

    pub fn zero(k: usize) -> Self {
        MultiPoly { k, terms: BTreeMap::new() }
    }

    pub fn from_univariate(p: &Poly) -> Self {
        let terms = p
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != ZERO)
            .map(|(j, c)| (vec![j], *c))
            .collect();
        MultiPoly { k: 1, terms }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[usize], Complex64)> {
        self.terms.iter().map(|(i, c)| (i.as_slice(), *c))
    }

    pub fn coeff(&self, idx: &[usize]) -> Complex64 {
        self.terms.get(idx).copied().unwrap_or(ZERO)
    }

    /// Per-variable degree; `None` entries for the zero polynomial.
    pub fn degrees(&self) -> Vec<Option<usize>> {
        let mut d = vec![None; self.k];
        for idx in self.terms.keys() {
            for (slot, &j) in d.iter_mut().zip(idx) {
                *slot = Some(slot.map_or(j, |v: usize| v.max(j)));
            }
        }
        d
    }

    pub fn eval(&self, zs: &[Complex64]) -> Result<Complex64> {
        if zs.len() != self.k {
            return Err(QqbfError::Dimension { expected: self.k, got: zs.len() });
        }
        Ok(self
            .terms
            .iter()
            .map(|(idx, c)| idx.iter().zip(zs).fold(*c, |acc, (&j, z)| acc * z.powu(j as u32)))
            .sum())
    }

    pub fn scale(&self, s: Complex64) -> MultiPoly {
        MultiPoly::new(self.k, self.terms.iter().map(|(i, c)| (i.clone(), c * s)))
            .unwrap_or_else(|_| MultiPoly::zero(self.k))
    }
}

pub fn multi_eval(p: &MultiPoly, zs: &[Complex64]) -> Result<Complex64> {
    p.eval(zs)
}

/// P/Q in k variables. Coprimality is not checked.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiRationalFn {
    p: MultiPoly,
    q: MultiPoly,
}

impl MultiRationalFn {
    pub fn new(p: MultiPoly, q: MultiPoly) -> Result<Self> {
        if p.k != q.k {
            return Err(QqbfError::Dimension { expected: p.k, got: q.k });
        }
        if q.is_zero() {
            return domain("denominator is the zero polynomial");
        }
        Ok(MultiRationalFn { p, q })
    }

    pub fn p(&self) -> &MultiPoly {
        &self.p
    }

    pub fn q(&self) -> &MultiPoly {
        &self.q
    }

    pub fn k(&self) -> usize {
        self.p.k
    }

    /// Per-variable degree max(deg_i P, deg_i Q).
    pub fn degrees(&self) -> Vec<usize> {
        self.p
            .degrees()
            .into_iter()
            .zip(self.q.degrees())
            .map(|(a, b)| a.unwrap_or(0).max(b.unwrap_or(0)))
            .collect()
    }

    /// The univariate view, if k = 1.
    pub fn as_univariate(&self) -> Option<(Poly, Poly)> {
        if self.k() != 1 {
            return None;
        }
        let dense = |m: &MultiPoly| {
            let d = m.degrees()[0].unwrap_or(0);
            let mut c = vec![ZERO; d + 1];
            for (idx, v) in m.terms() {
                c[idx[0]] = v;
            }
            Poly::new(c).unwrap_or_else(|_| Poly::zero())
        };
        Some((dense(&self.p), dense(&self.q)))
    }

    /// Whether the pair is reduced: coprime for k = 1, assumed for k > 1.
    pub fn is_reduced(&self, tol: f64) -> bool {
        match self.as_univariate() {
            Some((p, q)) => coprime_check(&p, &q, tol),
            None => true,
        }
    }

    /// P(zs)/Q(zs) at a finite point; `None` for 0/0.
    pub fn eval(&self, zs: &[Complex64]) -> Result<Option<ExtendedComplex>> {
        let num = self.p.eval(zs)?;
        let den = self.q.eval(zs)?;
        Ok(match (num == ZERO, den == ZERO) {
            (true, true) => None,
            (false, true) => Some(ExtendedComplex::Infinity),
            _ => Some(ExtendedComplex::Finite(num / den)),
        })
    }

    pub fn scale(&self, s: Complex64) -> MultiRationalFn {
        MultiRationalFn { p: self.p.scale(s), q: self.q.scale(s) }
    }
}

impl From<&RationalFn> for MultiRationalFn {
    fn from(f: &RationalFn) -> Self {
        f.to_multi()
    }
}

impl From<RationalFn> for MultiRationalFn {
    fn from(f: RationalFn) -> Self {
        f.to_multi()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn fin(re: f64, im: f64) -> ExtendedComplex {
        ExtendedComplex::finite(re, im)
    }

    #[test]
    fn eval_examples() {
        let p = Poly::from_real(&[1.0, 0.0]).unwrap();
        assert_eq!(p.eval_ext(fin(5.0, 0.0)), fin(1.0, 0.0));
        let z2 = Poly::from_real(&[0.0, 0.0, 1.0]).unwrap();
        assert_eq!(z2.eval(c(1.0, 1.0)), c(0.0, 2.0));
        let p = Poly::from_real(&[1.0, -2.0, 3.0]).unwrap();
        assert_eq!(p.eval(c(2.0, 0.0)), c(9.0, 0.0));
    }

    #[test]
    fn eval_at_infinity() {
        let z2 = Poly::from_real(&[0.0, 0.0, 1.0]).unwrap();
        assert!(z2.eval_ext(ExtendedComplex::Infinity).is_infinite());
        let k = Poly::from_real(&[4.0]).unwrap();
        assert_eq!(k.eval_ext(ExtendedComplex::Infinity), fin(4.0, 0.0));
    }

    #[test]
    fn zero_poly_has_no_degree() {
        let z = Poly::from_real(&[0.0, 0.0]).unwrap();
        assert!(z.is_zero());
        assert_eq!(z.degree(), None);
        assert_eq!(Poly::new(vec![]).unwrap(), Poly::zero());
    }

    #[test]
    fn non_finite_rejected() {
        assert!(Poly::new(vec![c(f64::NAN, 0.0)]).is_err());
    }

    #[test]
    fn rational_eval_examples() {
        let id = RationalFn::identity();
        assert_eq!(id.eval(fin(3.0, -4.0)), fin(3.0, -4.0));

        let inv = RationalFn::new(Poly::from_real(&[1.0]).unwrap(), Poly::from_real(&[0.0, 1.0]).unwrap())
            .unwrap();
        assert!(inv.eval(fin(0.0, 0.0)).is_infinite());
        assert_eq!(inv.eval(ExtendedComplex::Infinity), fin(0.0, 0.0));

        let f = RationalFn::new(
            Poly::from_real(&[2.0, 1.0]).unwrap(),
            Poly::from_real(&[-1.0, 1.0]).unwrap(),
        )
        .unwrap();
        assert_eq!(f.eval(ExtendedComplex::Infinity), fin(1.0, 0.0));
    }

    #[test]
    fn coprime_examples() {
        let p = Poly::from_real(&[0.0, 1.0]).unwrap();
        let one = Poly::from_real(&[1.0]).unwrap();
        assert!(coprime_check(&p, &one, 1e-9));
        let a = Poly::from_real(&[-1.0, 0.0, 1.0]).unwrap();
        let b = Poly::from_real(&[-1.0, 1.0]).unwrap();
        assert!(!coprime_check(&a, &b, 1e-9));
        let a = Poly::from_real(&[1.0, 0.0, 1.0]).unwrap();
        let b = Poly::from_real(&[-1.0, 0.0, 1.0]).unwrap();
        assert!(coprime_check(&a, &b, 1e-9));
    }

    #[test]
    fn resultant_of_linear_factors() {
        // Res(z - a, z - b) = b - a up to sign.
        let p = Poly::new(vec![c(-2.0, 1.0), c(1.0, 0.0)]).unwrap();
        let q = Poly::new(vec![c(0.5, 0.0), c(1.0, 0.0)]).unwrap();
        let r = resultant(&p, &q);
        assert!((r.norm() - (c(2.0, -1.0) + c(0.5, 0.0)).norm()).abs() < 1e-12);
    }

    #[test]
    fn non_coprime_rational_rejected() {
        let a = Poly::from_real(&[-1.0, 0.0, 1.0]).unwrap();
        let b = Poly::from_real(&[-1.0, 1.0]).unwrap();
        assert!(matches!(RationalFn::new(a, b), Err(QqbfError::NotCoprime(_))));
        assert!(RationalFn::new(Poly::zero(), Poly::zero()).is_err());
    }

    #[test]
    fn pad_examples() {
        let pp = pad(&RationalFn::identity(), ExtendedComplex::Infinity);
        assert_eq!(pp.p, Poly::from_real(&[0.0, 1.0]).unwrap());
        assert_eq!(pp.q, Poly::from_real(&[1.0]).unwrap());
        assert_eq!(pp.target_degree, 2);

        let one = RationalFn::new(Poly::from_real(&[1.0]).unwrap(), Poly::from_real(&[1.0]).unwrap()).unwrap();
        let pp = pad(&one, fin(0.0, 0.0));
        assert_eq!(pp.p, Poly::from_real(&[0.0, 1.0]).unwrap());
        assert_eq!(pp.q, Poly::from_real(&[0.0, 1.0]).unwrap());

        let z2 = RationalFn::new(Poly::from_real(&[0.0, 0.0, 1.0]).unwrap(), Poly::from_real(&[1.0]).unwrap())
            .unwrap();
        let pp = pad(&z2, fin(1.0, 0.0));
        assert_eq!(pp.p, Poly::from_real(&[0.0, 0.0, -1.0, 1.0]).unwrap());
        assert_eq!(pp.q, Poly::from_real(&[-1.0, 1.0]).unwrap());
        assert_eq!(pp.eval(fin(1.0, 0.0)), None);
    }

    #[test]
    fn multi_eval_examples() {
        let one = c(1.0, 0.0);
        let p = MultiPoly::new(2, [(vec![1, 1], one)]).unwrap();
        assert_eq!(p.eval(&[c(2.0, 0.0), c(3.0, 0.0)]).unwrap(), c(6.0, 0.0));
        let p = MultiPoly::new(2, [(vec![1, 0], one), (vec![0, 1], one)]).unwrap();
        assert_eq!(p.eval(&[c(1.0, 1.0), c(1.0, -1.0)]).unwrap(), c(2.0, 0.0));
        let p = MultiPoly::new(2, [(vec![2, 1], one), (vec![0, 0], c(3.0, 0.0))]).unwrap();
        assert_eq!(p.eval(&[c(2.0, 0.0), c(0.0, 1.0)]).unwrap(), c(3.0, 4.0));
        assert!(matches!(p.eval(&[one]), Err(QqbfError::Dimension { .. })));
    }

    #[test]
    fn multi_degrees() {
        let one = c(1.0, 0.0);
        let p = MultiPoly::new(2, [(vec![2, 0], one), (vec![0, 1], one), (vec![1, 1], ZERO)]).unwrap();
        assert_eq!(p.degrees(), vec![Some(2), Some(1)]);
        let q = MultiPoly::new(2, [(vec![0, 0], one)]).unwrap();
        let f = MultiRationalFn::new(p, q).unwrap();
        assert_eq!(f.degrees(), vec![2, 1]);
        assert_eq!(MultiPoly::zero(3).degrees(), vec![None; 3]);
    }

    #[test]
    fn parse_complex() {
        let cases = [
            ("inf", ExtendedComplex::Infinity),
            ("3", fin(3.0, 0.0)),
            ("-1.5e-2", fin(-0.015, 0.0)),
            ("2i", fin(0.0, 2.0)),
            ("-i", fin(0.0, -1.0)),
            ("i", fin(0.0, 1.0)),
            ("1+2i", fin(1.0, 2.0)),
            ("0.5-1e-3i", fin(0.5, -1e-3)),
            ("1e+2-3.5e-1i", fin(100.0, -0.35)),
            ("-2+i", fin(-2.0, 1.0)),
        ];
        for (s, want) in cases {
            assert_eq!(s.parse::<ExtendedComplex>().unwrap(), want, "{s}");
        }
        for bad in ["", "abc", "1+2j", "nan", "1++2i"] {
            assert!(bad.parse::<ExtendedComplex>().is_err(), "{bad}");
        }
    }

    #[test]
    fn display_round_trips() {
        for z in [fin(0.1, -0.3), fin(-2.0, 0.0), fin(1e-300, 5e300), ExtendedComplex::Infinity] {
            assert_eq!(z.to_string().parse::<ExtendedComplex>().unwrap(), z);
        }
    }

    fn arb_c() -> impl Strategy<Value = Complex64> {
        (-3.0f64..3.0, -3.0f64..3.0).prop_map(|(a, b)| Complex64::new(a, b))
    }

    fn arb_poly(max_deg: usize) -> impl Strategy<Value = Poly> {
        prop::collection::vec(arb_c(), 1..=max_deg + 1).prop_map(|v| Poly::new(v).unwrap())
    }

    proptest! {
        #[test]
        fn horner_matches_power_sum(p in arb_poly(8), z in arb_c()) {
            let naive: Complex64 = p.coeffs().iter().enumerate().map(|(j, c)| c * z.powu(j as u32)).sum();
            let h = p.eval(z);
            let scale = p.coeffs().iter().enumerate().map(|(j, c)| c.norm() * z.norm().powi(j as i32)).sum::<f64>();
            prop_assert!((h - naive).norm() <= 1e-12 * scale.max(1e-300));
        }

        #[test]
        fn coprime_is_symmetric(p in arb_poly(4), q in arb_poly(4)) {
            prop_assume!(!p.is_zero() && !q.is_zero());
            prop_assert_eq!(coprime_check(&p, &q, 1e-9), coprime_check(&q, &p, 1e-9));
        }

        #[test]
        fn rational_eval_scale_invariant(p in arb_poly(4), q in arb_poly(4), lam in arb_c(), z in arb_c()) {
            prop_assume!(lam.norm() > 0.1);
            let Ok(f) = RationalFn::new(p.clone(), q.clone()) else { return Ok(()); };
            let g = RationalFn::new(p.scale(lam), q.scale(lam)).unwrap();
            for pt in [ExtendedComplex::Finite(z), ExtendedComplex::Infinity] {
                match (f.eval(pt), g.eval(pt)) {
                    (ExtendedComplex::Finite(a), ExtendedComplex::Finite(b)) => {
                        prop_assert!((a - b).norm() <= 1e-12 * a.norm().max(1.0));
                    }
                    (ExtendedComplex::Infinity, ExtendedComplex::Infinity) => {}
                    (a, b) => {
                        // A near-pole may land on either side of the exact zero test.
                        let big = |x: ExtendedComplex| x.as_finite().is_none_or(|v| v.norm() > 1e12);
                        prop_assert!(big(a) && big(b));
                    }
                }
            }
        }

        #[test]
        fn pad_preserves_values_away_from_r(p in arb_poly(3), q in arb_poly(3), r in arb_c(), z in arb_c()) {
            prop_assume!((z - r).norm() > 1e-3);
            let Ok(f) = RationalFn::new(p, q) else { return Ok(()); };
            let pp = pad(&f, ExtendedComplex::Finite(r));
            let want = f.eval(ExtendedComplex::Finite(z));
            let got = pp.eval(ExtendedComplex::Finite(z)).unwrap();
            if let (ExtendedComplex::Finite(a), ExtendedComplex::Finite(b)) = (want, got) {
                prop_assert!((a - b).norm() <= 1e-9 * a.norm().max(1.0));
            }
            let inf = pad(&f, ExtendedComplex::Infinity);
            prop_assert_eq!(inf.eval(ExtendedComplex::Finite(z)), Some(want));
        }
    }
}
