//! From rational-function coefficients to the circuit unitary.

mod unitary;

pub use unitary::{complete_unitary, UnitaryMatrix, MAX_UNITARY_QUBITS};

use num_complex::Complex64;

use crate::error::{domain, QqbfError, Result};
use crate::policy::NumericPolicy;
use crate::poly::{MultiPoly, MultiRationalFn};
use crate::states::{binomial, symmetric_product_vector, zero_counts, StateVector};

/// Scalars of the optimal solution for one function at fixed coin counts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SynthScalars {
    pub a: f64,
    pub b: f64,
    pub c: Complex64,
    pub l: f64,
    pub x: f64,
    pub y: Complex64,
    /// Normalization K of v0 and v1.
    pub k: f64,
    pub w: f64,
}

impl SynthScalars {
    pub fn needs_theta(&self) -> bool {
        self.x != 0.0 || self.y != Complex64::new(0.0, 0.0)
    }
}

/// A synthesized factory. Row 0 of `unitary` is `<v0|`, row 1 is `<v1|`.
#[derive(Clone, Debug)]
pub struct QqbfCircuit {
    pub function: MultiRationalFn,
    pub ns: Vec<usize>,
    pub m: usize,
    pub unitary: UnitaryMatrix,
    pub v0: StateVector,
    pub v1: StateVector,
    pub theta0: Option<StateVector>,
    pub scalars: SynthScalars,
}

impl QqbfCircuit {
    pub fn k(&self) -> usize {
        self.ns.len()
    }

    pub fn coin_qubits(&self) -> usize {
        self.ns.iter().sum()
    }

    pub fn num_qubits(&self) -> usize {
        self.coin_qubits() + self.m
    }
}

/// All multi-indices J with 0 <= j_i <= n_i.
pub(crate) fn multi_indices(ns: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for &n in ns {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..=n).map(move |j| {
                    let mut p = prefix.clone();
                    p.push(j);
                    p
                })
            })
            .collect();
    }
    out
}

pub(crate) fn binomial_weight(ns: &[usize], js: &[usize]) -> f64 {
    ns.iter().zip(js).map(|(&n, &j)| binomial(n, j)).product()
}

/// Rejects coin counts below the function's degrees.
pub(crate) fn check_ns(f: &MultiRationalFn, ns: &[usize]) -> Result<()> {
    if ns.len() != f.k() {
        return Err(QqbfError::Dimension { expected: f.k(), got: ns.len() });
    }
    for (i, (&n, d)) in ns.iter().zip(f.degrees()).enumerate() {
        if n < d {
            return domain(format!("variable {}: {n} coins below degree {d}", i + 1));
        }
    }
    Ok(())
}

/// `sum_J x_J conj(y_J) / prod C(n_i, j_i)`.
pub(crate) fn weighted_inner(x: &MultiPoly, y: &MultiPoly, ns: &[usize]) -> Complex64 {
    x.terms()
        .map(|(idx, c)| c * y.coeff(idx).conj() / binomial_weight(ns, idx))
        .sum()
}

pub(crate) fn weighted_norm(x: &MultiPoly, ns: &[usize]) -> f64 {
    x.terms().map(|(idx, c)| c.norm_sqr() / binomial_weight(ns, idx)).sum()
}

/// a = sum |q_J|^2/C_J, b = sum |p_J|^2/C_J, c = sum p_J conj(q_J)/C_J.
pub fn abc(f: &MultiRationalFn, ns: &[usize]) -> Result<(f64, f64, Complex64)> {
    check_ns(f, ns)?;
    Ok((weighted_norm(f.q(), ns), weighted_norm(f.p(), ns), weighted_inner(f.p(), f.q(), ns)))
}

pub fn solve_xyk(a: f64, b: f64, c: Complex64, w: f64) -> Result<SynthScalars> {
    solve_xyk_with(a, b, c, w, NumericPolicy::default().residual)
}

/// Solves the orthonormality system for x >= 0, y and K. Differences below
/// `tol * (a + b)` are treated as exact zeros so degenerate inputs give
/// x = y = 0 exactly.
pub fn solve_xyk_with(a: f64, b: f64, c: Complex64, w: f64, tol: f64) -> Result<SynthScalars> {
    if !(a >= 0.0 && b >= 0.0 && w >= 0.0) || !(a > 0.0 || b > 0.0) {
        return domain(format!("solve_xyk needs a, b >= 0 not both zero and w >= 0 (a={a}, b={b}, w={w})"));
    }
    let scale = a + b;
    let mut d = w * w + a - b;
    if d.abs() <= tol * (scale + w * w) {
        d = 0.0;
    }
    let c_eff = if c.norm() <= tol * scale { Complex64::new(0.0, 0.0) } else { c };
    let cn = c_eff.norm();
    let l = d.hypot(2.0 * cn);
    let x = ((l + d) / 2.0).max(0.0).sqrt();
    let ymag = ((l - d) / 2.0).max(0.0).sqrt();
    let y = if cn > 0.0 { -c_eff / cn * ymag } else { Complex64::new(ymag, 0.0) };
    let k = (2.0 / (l + w * w + a + b)).sqrt();
    Ok(SynthScalars { a, b, c, l, x, y, k, w })
}

/// An ancilla is needed only when the symmetric span fills the coin
/// register (every n_i <= 1) and the solution uses a theta direction.
pub fn needs_ancilla(ns: &[usize], x: f64, y: Complex64) -> bool {
    let total: usize = ns.iter().sum();
    let span: f64 = ns.iter().map(|&n| (n + 1) as f64).product();
    let full = 2f64.powi(total as i32) == span;
    full && !(x == 0.0 && y == Complex64::new(0.0, 0.0))
}

/// First `count` unit vectors orthogonal to the symmetric product span and
/// to each other. With ancillas, the first one is the basis state with the
/// lowest ancilla bit set; the rest come from Gram-Schmidt on the
/// computational basis in ascending order.
pub fn complement_directions(ns: &[usize], m: usize, count: usize) -> Result<Vec<StateVector>> {
    let coins: usize = ns.iter().sum();
    let total = coins + m;
    if total > MAX_UNITARY_QUBITS {
        return Err(QqbfError::Capacity(format!("{total} qubits exceed {MAX_UNITARY_QUBITS}")));
    }
    let dim = 1usize << total;
    let span: Vec<StateVector> = multi_indices(ns)
        .iter()
        .map(|js| symmetric_product_vector(ns, js, m))
        .collect::<Result<_>>()?;
    if span.len() + count > dim {
        return Err(QqbfError::Capacity(format!(
            "need {count} direction(s) outside a {}-dim symmetric span in dimension {dim}",
            span.len()
        )));
    }
    let mut basis: Vec<Vec<Complex64>> = span.into_iter().map(StateVector::into_amps).collect();
    let n_span = basis.len();
    let candidates = (m >= 1)
        .then_some(1usize << coins)
        .into_iter()
        .chain((0..dim).filter(move |&i| m == 0 || i != 1 << coins));
    for idx in candidates {
        if basis.len() == n_span + count {
            break;
        }
        let mut r = vec![Complex64::new(0.0, 0.0); dim];
        r[idx] = Complex64::new(1.0, 0.0);
        for b in &basis {
            let p = b[idx].conj();
            if p != Complex64::new(0.0, 0.0) {
                for (ri, bi) in r.iter_mut().zip(b) {
                    *ri -= bi * p;
                }
            }
        }
        let nrm = r.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if nrm > 1e-10 {
            basis.push(r.into_iter().map(|c| c / nrm).collect());
        }
    }
    if basis.len() < n_span + count {
        return Err(QqbfError::Capacity("orthogonal complement exhausted".into()));
    }
    Ok(basis
        .into_iter()
        .skip(n_span)
        .map(|a| StateVector::from_raw(total, a))
        .collect())
}

pub fn theta0(ns: &[usize], m: usize) -> Result<StateVector> {
    Ok(complement_directions(ns, m, 1)?.remove(0))
}

/// `sum_J K conj(x_J)/sqrt(C_J) |s_J>` laid out over `coins + m` qubits.
pub(crate) fn coefficient_vector(x: &MultiPoly, ns: &[usize], m: usize, k: f64) -> Vec<Complex64> {
    let coins: usize = ns.iter().sum();
    let mut out = vec![Complex64::new(0.0, 0.0); 1 << (coins + m)];
    for (idx, slot) in out.iter_mut().enumerate().take(1 << coins) {
        let js = zero_counts(idx, ns);
        let c = x.coeff(&js);
        if c != Complex64::new(0.0, 0.0) {
            *slot = c.conj() * (k / binomial_weight(ns, &js));
        }
    }
    out
}

fn add_scaled(v: &mut [Complex64], t: &StateVector, s: Complex64) {
    for (vi, ti) in v.iter_mut().zip(t.amps()) {
        *vi += ti * s;
    }
}

/// v0 and v1 for the given scalars, plus the theta0 used (if any).
pub fn build_v0_v1(
    f: &MultiRationalFn,
    ns: &[usize],
    m: usize,
    s: &SynthScalars,
) -> Result<(StateVector, StateVector, Option<StateVector>)> {
    check_ns(f, ns)?;
    let total = ns.iter().sum::<usize>() + m;
    let mut v0 = coefficient_vector(f.p(), ns, m, s.k);
    let mut v1 = coefficient_vector(f.q(), ns, m, s.k);
    let theta = if s.needs_theta() {
        let t = theta0(ns, m)?;
        add_scaled(&mut v0, &t, Complex64::new(s.k * s.x, 0.0));
        add_scaled(&mut v1, &t, s.y * s.k);
        Some(t)
    } else {
        None
    };
    Ok((StateVector::from_raw(total, v0), StateVector::from_raw(total, v1), theta))
}

/// Synthesis options; everything defaults to the minimal circuit.
#[derive(Clone, Debug, Default)]
pub struct SynthOptions {
    pub ns: Option<Vec<usize>>,
    pub m: Option<usize>,
    pub policy: NumericPolicy,
}

pub fn synthesize(f: &MultiRationalFn, ns: Option<&[usize]>) -> Result<QqbfCircuit> {
    synthesize_with(f, &SynthOptions { ns: ns.map(<[usize]>::to_vec), ..Default::default() })
}

/// Minimal ancilla count for `f` at `ns`.
pub fn required_ancillas(ns: &[usize], s: &SynthScalars) -> usize {
    usize::from(needs_ancilla(ns, s.x, s.y))
}

pub fn synthesize_with(f: &MultiRationalFn, opts: &SynthOptions) -> Result<QqbfCircuit> {
    let ns = opts.ns.clone().unwrap_or_else(|| f.degrees());
    check_ns(f, &ns)?;
    let (a, b, c) = abc(f, &ns)?;
    let scalars = solve_xyk_with(a, b, c, 0.0, opts.policy.residual)?;
    let min_m = required_ancillas(&ns, &scalars);
    let m = match opts.m {
        Some(m) if m < min_m => {
            return domain(format!("m = {m} is below the required {min_m} ancilla(s)"));
        }
        Some(m) => m,
        None => min_m,
    };
    let coins: usize = ns.iter().sum();
    if coins + m == 0 {
        // Constant function with no coins: the output qubit is an ancilla.
        return synthesize_with(f, &SynthOptions { m: Some(1), ..opts.clone() });
    }
    if coins + m > MAX_UNITARY_QUBITS {
        return Err(QqbfError::Capacity(format!(
            "{} qubits exceed the dense unitary limit of {MAX_UNITARY_QUBITS}",
            coins + m
        )));
    }
    let (v0, v1, theta0) = build_v0_v1(f, &ns, m, &scalars)?;
    for (name, v) in [("v0", &v0), ("v1", &v1)] {
        let e = (v.norm_sqr() - 1.0).abs();
        if e > opts.policy.orthonormality {
            return Err(QqbfError::Numeric(format!("{name} norm^2 off by {e:.3e}")));
        }
    }
    let unitary = complete_unitary(&[v0.clone(), v1.clone()], opts.policy.orthonormality, opts.policy.pivot)?;
    Ok(QqbfCircuit { function: f.clone(), ns, m, unitary, v0, v1, theta0, scalars })
}
