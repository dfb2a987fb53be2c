//! Dense statevector execution with post-selection on the herald qubits.

use num_complex::Complex64;
use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{domain, QqbfError, Result};
use crate::multifunc::MultifunctionalCircuit;
use crate::policy::NumericPolicy;
use crate::poly::{ExtendedComplex, MultiRationalFn};
use crate::states::{coin_weighted_eval, input_state, StateVector};
use crate::synth::{QqbfCircuit, UnitaryMatrix};

/// Outcome of one heralded branch.
#[derive(Clone, Debug, PartialEq)]
pub struct SimulationResult {
    pub success_prob: f64,
    /// Unnormalized amplitudes on the branch's two basis states.
    pub herald_amps: [Complex64; 2],
    /// Normalized output qubit; `None` when the branch never fires.
    pub output: Option<StateVector>,
    /// `|<f(z)|out>|^2`; `None` when either state is undefined.
    pub fidelity: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampleResult {
    pub shots: u64,
    /// Shots whose herald qubits were all zero (branch 0).
    pub herald_successes: u64,
    /// Per branch, counts of output 0 and output 1.
    pub branch_counts: Vec<[u64; 2]>,
    pub rng_seed: u64,
}

/// The state `(P~, Q~)/norm` a circuit for `f` should emit at `zs`, computed
/// from coin-weighted values so infinity needs no special case.
pub fn target_state(f: &MultiRationalFn, ns: &[usize], zs: &[ExtendedComplex]) -> Result<Option<StateVector>> {
    let p = coin_weighted_eval(f.p(), zs, ns)?;
    let q = coin_weighted_eval(f.q(), zs, ns)?;
    Ok(StateVector::from_raw(1, vec![p, q]).normalized())
}

fn branch(u: &UnitaryMatrix, input: &StateVector, rows: std::ops::Range<usize>) -> Result<SimulationResult> {
    let amps = u.apply_rows(input, rows)?;
    let herald_amps = [amps[0], amps[1]];
    let success_prob = (amps[0].norm_sqr() + amps[1].norm_sqr()).min(1.0);
    let output = if success_prob > 0.0 { StateVector::from_raw(1, amps).normalized() } else { None };
    Ok(SimulationResult { success_prob, herald_amps, output, fidelity: None })
}

fn with_fidelity(mut r: SimulationResult, target: Option<StateVector>) -> SimulationResult {
    if let (Some(out), Some(t)) = (&r.output, &target) {
        r.fidelity = Some(t.inner(out).norm_sqr().min(1.0));
    }
    r
}

fn check_point(k: usize, zs: &[ExtendedComplex]) -> Result<()> {
    if zs.len() != k {
        return Err(QqbfError::Dimension { expected: k, got: zs.len() });
    }
    Ok(())
}

pub fn run(c: &QqbfCircuit, zs: &[ExtendedComplex]) -> Result<SimulationResult> {
    check_point(c.k(), zs)?;
    let input = input_state(zs, &c.ns, c.m)?;
    let r = branch(&c.unitary, &input, 0..2)?;
    Ok(with_fidelity(r, target_state(&c.function, &c.ns, zs)?))
}

/// Runs the circuit on an arbitrary register state (e.g. the output of
/// another circuit). No fidelity is computed.
pub fn run_with_input(c: &QqbfCircuit, input: &StateVector) -> Result<SimulationResult> {
    branch(&c.unitary, input, 0..2)
}

pub fn run_multifunctional(
    c: &MultifunctionalCircuit,
    zs: &[ExtendedComplex],
) -> Result<(SimulationResult, SimulationResult)> {
    check_point(c.k(), zs)?;
    let input = input_state(zs, &c.ns, c.m)?;
    let r0 = branch(&c.unitary, &input, 0..2)?;
    let r1 = branch(&c.unitary, &input, 2..4)?;
    Ok((
        with_fidelity(r0, target_state(&c.g0, &c.ns, zs)?),
        with_fidelity(r1, target_state(&c.g1, &c.ns, zs)?),
    ))
}

fn sample_state(u: &UnitaryMatrix, input: &StateVector, branches: usize, shots: u64, seed: u64) -> Result<SampleResult> {
    if shots == 0 {
        return domain("shots must be >= 1");
    }
    let psi = u.apply(input)?;
    let weights: Vec<f64> = psi.amps().iter().map(|a| a.norm_sqr()).collect();
    let dist = WeightedIndex::new(&weights).map_err(|e| QqbfError::Numeric(format!("sampling weights: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut branch_counts = vec![[0u64; 2]; branches];
    for _ in 0..shots {
        let outcome = dist.sample(&mut rng);
        let b = outcome >> 1;
        if b < branches {
            branch_counts[b][outcome & 1] += 1;
        }
    }
    let herald_successes = branch_counts[0][0] + branch_counts[0][1];
    Ok(SampleResult { shots, herald_successes, branch_counts, rng_seed: seed })
}

/// Draws full-register measurements from the output state.
pub fn sample(c: &QqbfCircuit, zs: &[ExtendedComplex], shots: u64, seed: u64) -> Result<SampleResult> {
    check_point(c.k(), zs)?;
    sample_state(&c.unitary, &input_state(zs, &c.ns, c.m)?, 1, shots, seed)
}

pub fn sample_multifunctional(
    c: &MultifunctionalCircuit,
    zs: &[ExtendedComplex],
    shots: u64,
    seed: u64,
) -> Result<SampleResult> {
    check_point(c.k(), zs)?;
    sample_state(&c.unitary, &input_state(zs, &c.ns, c.m)?, 2, shots, seed)
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyPoint {
    pub zs: Vec<ExtendedComplex>,
    pub success_prob: f64,
    pub fidelity: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyFailure {
    pub index: usize,
    pub zs: Vec<ExtendedComplex>,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    pub points: Vec<VerifyPoint>,
    pub failures: Vec<VerifyFailure>,
    /// Whether strict positivity was required (coin counts equal the degrees
    /// of a reduced function).
    pub positivity_required: bool,
}

pub fn verify(c: &QqbfCircuit, f: &MultiRationalFn, grid: &[Vec<ExtendedComplex>]) -> Result<VerifyReport> {
    verify_with(c, f, grid, &NumericPolicy::default())
}

/// Checks the circuit output against `f` at every grid point. Returns
/// `QqbfError::Verification` carrying the full report on any failure.
pub fn verify_with(
    c: &QqbfCircuit,
    f: &MultiRationalFn,
    grid: &[Vec<ExtendedComplex>],
    policy: &NumericPolicy,
) -> Result<VerifyReport> {
    if grid.is_empty() {
        return domain("verification grid is empty");
    }
    if f.k() != c.k() {
        return Err(QqbfError::Dimension { expected: c.k(), got: f.k() });
    }
    let positivity_required = c.ns == f.degrees() && f.is_reduced(policy.coprime);
    let mut points = Vec::with_capacity(grid.len());
    let mut failures = Vec::new();
    for (index, zs) in grid.iter().enumerate() {
        check_point(c.k(), zs)?;
        let input = input_state(zs, &c.ns, c.m)?;
        let r = with_fidelity(branch(&c.unitary, &input, 0..2)?, target_state(f, &c.ns, zs)?);
        let mut fail = |reason: String| failures.push(VerifyFailure { index, zs: zs.clone(), reason });
        if r.success_prob > policy.verify_prob {
            match r.fidelity {
                Some(fid) if fid >= 1.0 - policy.fidelity => {}
                Some(fid) => fail(format!("fidelity {fid} below 1 - {:.1e}", policy.fidelity)),
                None => fail("target state undefined where the herald fires".into()),
            }
        }
        if positivity_required && (r.success_prob.is_nan() || r.success_prob <= 0.0) {
            fail("success probability is zero".into());
        }
        points.push(VerifyPoint { zs: zs.clone(), success_prob: r.success_prob, fidelity: r.fidelity });
    }
    let report = VerifyReport { points, failures, positivity_required };
    if report.failures.is_empty() {
        Ok(report)
    } else {
        Err(QqbfError::Verification(Box::new(report)))
    }
}
