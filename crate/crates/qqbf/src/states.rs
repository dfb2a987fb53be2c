//! Coin states, dense statevectors and the symmetric basis.
//!
//! Basis index bit 0 is qubit 1. Variable 1's coins take the lowest bits,
//! ancillas the highest.

use num_complex::Complex64;

use crate::error::{domain, QqbfError, Result};
use crate::poly::{ExtendedComplex, MultiPoly};

/// Largest register a dense statevector may span.
pub const MAX_STATE_QUBITS: usize = 24;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// The coin |z> = (z|0> + |1>)/sqrt(1+|z|^2).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QubitState {
    pub z: ExtendedComplex,
}

impl QubitState {
    pub fn new(z: ExtendedComplex) -> Self {
        QubitState { z }
    }

    pub fn amplitudes(&self) -> (Complex64, Complex64) {
        coin_amplitudes(self.z)
    }

    pub fn to_state_vector(&self) -> StateVector {
        let (a, b) = self.amplitudes();
        StateVector { num_qubits: 1, amps: vec![a, b] }
    }
}

/// Amplitudes on |0> and |1>, computed without overflow for huge |z|.
pub fn coin_amplitudes(z: ExtendedComplex) -> (Complex64, Complex64) {
    match z {
        ExtendedComplex::Infinity => (ONE, ZERO),
        ExtendedComplex::Finite(z) => {
            let r = z.norm();
            if r <= 1.0 {
                let s = 1.0 / (1.0 + r * r).sqrt();
                (z * s, Complex64::new(s, 0.0))
            } else {
                let t = 1.0 / r;
                let s = 1.0 / (1.0 + t * t).sqrt();
                (z * (t * s), Complex64::new(t * s, 0.0))
            }
        }
    }
}

/// `z^j / (1+|z|^2)^(n/2)`, which tends to `[j == n]` at infinity.
pub fn monomial_weight(z: ExtendedComplex, j: usize, n: usize) -> Complex64 {
    let (a, b) = coin_amplitudes(z);
    a.powu(j as u32) * b.powu((n - j) as u32)
}

/// `P(z) / prod (1+|z_i|^2)^(n_i/2)`, finite everywhere including infinity.
pub fn coin_weighted_eval(p: &MultiPoly, zs: &[ExtendedComplex], ns: &[usize]) -> Result<Complex64> {
    if zs.len() != p.k() {
        return Err(QqbfError::Dimension { expected: p.k(), got: zs.len() });
    }
    if ns.len() != p.k() {
        return Err(QqbfError::Dimension { expected: p.k(), got: ns.len() });
    }
    let amps: Vec<_> = zs.iter().map(|z| coin_amplitudes(*z)).collect();
    let mut acc = ZERO;
    for (idx, c) in p.terms() {
        let mut t = c;
        for ((&j, &n), (a, b)) in idx.iter().zip(ns).zip(&amps) {
            if j > n {
                return domain(format!("exponent {j} exceeds coin count {n}"));
            }
            t *= a.powu(j as u32) * b.powu((n - j) as u32);
        }
        acc += t;
    }
    Ok(acc)
}

/// Binomial coefficient as a float.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64).round()
}

/// Dense amplitude vector over `2^num_qubits` basis states.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// Checks the length and that the norm is 0 or 1 within 1e-10.
    pub fn new(num_qubits: usize, amps: Vec<Complex64>) -> Result<Self> {
        if num_qubits > MAX_STATE_QUBITS {
            return Err(QqbfError::Capacity(format!(
                "{num_qubits} qubits exceed the statevector limit of {MAX_STATE_QUBITS}"
            )));
        }
        if amps.len() != 1usize << num_qubits {
            return Err(QqbfError::Dimension { expected: 1 << num_qubits, got: amps.len() });
        }
        if amps.iter().any(|a| !(a.re.is_finite() && a.im.is_finite())) {
            return domain("non-finite amplitude");
        }
        let v = StateVector { num_qubits, amps };
        let n2 = v.norm_sqr();
        if n2 != 0.0 && (n2 - 1.0).abs() > 1e-10 {
            return domain(format!("statevector norm^2 {n2} is neither 0 nor 1"));
        }
        Ok(v)
    }

    /// Unchecked constructor for intermediate, possibly unnormalized vectors.
    pub(crate) fn from_raw(num_qubits: usize, amps: Vec<Complex64>) -> Self {
        debug_assert_eq!(amps.len(), 1 << num_qubits);
        StateVector { num_qubits, amps }
    }

    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        if num_qubits > MAX_STATE_QUBITS {
            return Err(QqbfError::Capacity(format!("{num_qubits} qubits exceed {MAX_STATE_QUBITS}")));
        }
        let dim = 1usize << num_qubits;
        if index >= dim {
            return domain(format!("basis index {index} out of range for {num_qubits} qubits"));
        }
        let mut amps = vec![ZERO; dim];
        amps[index] = ONE;
        Ok(StateVector { num_qubits, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amps(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// `other` on the high bits, `self` on the low bits.
    pub fn tensor_high(&self, other: &StateVector) -> Result<StateVector> {
        let n = self.num_qubits + other.num_qubits;
        if n > MAX_STATE_QUBITS {
            return Err(QqbfError::Capacity(format!("{n} qubits exceed {MAX_STATE_QUBITS}")));
        }
        let mut amps = Vec::with_capacity(1 << n);
        for h in &other.amps {
            for l in &self.amps {
                amps.push(h * l);
            }
        }
        Ok(StateVector { num_qubits: n, amps })
    }

    pub fn normalized(&self) -> Option<StateVector> {
        let n = self.norm_sqr().sqrt();
        (n > 0.0).then(|| StateVector {
            num_qubits: self.num_qubits,
            amps: self.amps.iter().map(|a| a / n).collect(),
        })
    }
}

/// Label of |s_j^n>: n qubits, j of them in |0>.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SymmetricIndex {
    pub n: usize,
    pub j: usize,
}

impl SymmetricIndex {
    pub fn new(n: usize, j: usize) -> Result<Self> {
        if j > n {
            return domain(format!("symmetric index j={j} exceeds n={n}"));
        }
        Ok(SymmetricIndex { n, j })
    }
}

pub fn symmetric_basis_vector(idx: SymmetricIndex) -> Result<StateVector> {
    symmetric_product_vector(&[idx.n], &[idx.j], 0)
}

/// `|0>^m (x) |s_{j_k}^{n_k}> (x) ... (x) |s_{j_1}^{n_1}>`.
pub fn symmetric_product_vector(ns: &[usize], js: &[usize], m: usize) -> Result<StateVector> {
    if ns.len() != js.len() {
        return Err(QqbfError::Dimension { expected: ns.len(), got: js.len() });
    }
    for (&n, &j) in ns.iter().zip(js) {
        SymmetricIndex::new(n, j)?;
    }
    let coins: usize = ns.iter().sum();
    let total = coins + m;
    if total > MAX_STATE_QUBITS {
        return Err(QqbfError::Capacity(format!("{total} qubits exceed {MAX_STATE_QUBITS}")));
    }
    let weight: f64 = ns.iter().zip(js).map(|(&n, &j)| binomial(n, j)).product();
    let amp = Complex64::new(1.0 / weight.sqrt(), 0.0);
    let mut amps = vec![ZERO; 1 << total];
    for (idx, slot) in amps.iter_mut().enumerate().take(1 << coins) {
        if zero_counts(idx, ns).iter().zip(js).all(|(a, b)| a == b) {
            *slot = amp;
        }
    }
    Ok(StateVector { num_qubits: total, amps })
}

/// Number of |0> coins per variable block in a coin-register index.
pub fn zero_counts(mut idx: usize, ns: &[usize]) -> Vec<usize> {
    ns.iter()
        .map(|&n| {
            let block = idx & ((1usize << n) - 1);
            idx >>= n;
            n - block.count_ones() as usize
        })
        .collect()
}

/// `|0>^m (x) |z_k>^{n_k} (x) ... (x) |z_1>^{n_1}`. A variable with zero
/// coins contributes nothing.
pub fn input_state(zs: &[ExtendedComplex], ns: &[usize], m: usize) -> Result<StateVector> {
    if zs.is_empty() {
        return domain("input_state needs at least one variable");
    }
    if zs.len() != ns.len() {
        return Err(QqbfError::Dimension { expected: ns.len(), got: zs.len() });
    }
    let total = ns.iter().sum::<usize>() + m;
    if total > MAX_STATE_QUBITS {
        return Err(QqbfError::Capacity(format!("{total} qubits exceed {MAX_STATE_QUBITS}")));
    }
    let mut amps = vec![ONE];
    for (z, &n) in zs.iter().zip(ns) {
        let (a, b) = coin_amplitudes(*z);
        for _ in 0..n {
            let mut next = Vec::with_capacity(amps.len() * 2);
            next.extend(amps.iter().map(|x| x * a));
            next.extend(amps.iter().map(|x| x * b));
            amps = next;
        }
    }
    amps.resize(1 << total, ZERO);
    Ok(StateVector { num_qubits: total, amps })
}

/// `|<z|v>|^2` for a normalized single-qubit state.
pub fn fidelity_to_coin(v: &StateVector, z: ExtendedComplex) -> Result<f64> {
    if v.num_qubits != 1 {
        return Err(QqbfError::Dimension { expected: 1, got: v.num_qubits });
    }
    if (v.norm_sqr() - 1.0).abs() > 1e-10 {
        return domain("fidelity_to_coin needs a normalized state");
    }
    let (a, b) = coin_amplitudes(z);
    Ok((a.conj() * v.amps[0] + b.conj() * v.amps[1]).norm_sqr().min(1.0))
}
