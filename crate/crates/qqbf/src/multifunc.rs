//! Two functions in one circuit: g0 heralded on outcome 0, g1 on outcome 1
//! of the second qubit.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{domain, QqbfError, Result};
use crate::policy::NumericPolicy;
use crate::poly::{MultiPoly, MultiRationalFn};
use crate::states::StateVector;
use crate::synth::{
    abc, build_v0_v1, check_ns, coefficient_vector, complement_directions, complete_unitary, required_ancillas,
    solve_xyk_with, weighted_inner, weighted_norm, SynthScalars, UnitaryMatrix, MAX_UNITARY_QUBITS,
};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// One rung of the perturbation ladder (g0's numerator constant += epsilon).
#[derive(Clone, Debug, PartialEq)]
pub struct EpsilonSample {
    pub epsilon: f64,
    pub s1: Option<Complex64>,
    pub s2: Option<Complex64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompatibilityReport {
    pub x: f64,
    pub y: Complex64,
    /// `None` when x or y vanishes and the ratio is undefined.
    pub s1: Option<Complex64>,
    pub s2: Option<Complex64>,
    /// Normalized residuals of the two solvability conditions.
    pub residual1: f64,
    pub residual2: f64,
    pub compatible: bool,
    /// Filled when x or y vanishes.
    pub epsilon_trace: Vec<EpsilonSample>,
    /// Ladder classification of s1 and s2 (true = tends to zero).
    pub limit_s1: Option<bool>,
    pub limit_s2: Option<bool>,
}

struct Overlaps {
    x: f64,
    y: Complex64,
    /// y conj(S_p.) - x conj(S_q.), i.e. x y s_i.
    cleared: [Complex64; 2],
    residual: [f64; 2],
}

/// S_pt = sum p_J conj(t_J)/C_J for t = r, s; the a1/a3 systems are
/// x a + S_pt = 0 and conj(y) a + S_qt = 0.
fn overlaps(g0: &MultiRationalFn, g1: &MultiRationalFn, ns: &[usize], s: &SynthScalars) -> Overlaps {
    let n0 = (weighted_norm(g0.p(), ns) + weighted_norm(g0.q(), ns)).sqrt();
    let n1 = (weighted_norm(g1.p(), ns) + weighted_norm(g1.q(), ns)).sqrt();
    let t = (s.x * s.x + s.y.norm_sqr()).sqrt();
    let mut cleared = [ZERO; 2];
    let mut residual = [0.0; 2];
    for (i, target) in [g1.p(), g1.q()].into_iter().enumerate() {
        let sp = weighted_inner(g0.p(), target, ns);
        let sq = weighted_inner(g0.q(), target, ns);
        cleared[i] = s.y * sp.conj() - sq.conj() * s.x;
        residual[i] = if t > 0.0 {
            cleared[i].norm() / (t * n0 * n1)
        } else {
            (sp.norm_sqr() + sq.norm_sqr()).sqrt() / (n0 * n1)
        };
    }
    Overlaps { x: s.x, y: s.y, cleared, residual }
}

fn ratio(o: &Overlaps, i: usize) -> Option<Complex64> {
    (o.x != 0.0 && o.y != ZERO).then(|| o.cleared[i] / (o.y * o.x))
}

fn scalars_for(f: &MultiRationalFn, ns: &[usize], policy: &NumericPolicy) -> Result<SynthScalars> {
    let (a, b, c) = abc(f, ns)?;
    solve_xyk_with(a, b, c, 0.0, policy.residual)
}

/// Ladder sequence tends to zero: magnitudes never increase and the last is
/// below `ratio` times the first.
fn vanishes(seq: &[Option<Complex64>], ratio: f64) -> bool {
    let mags: Option<Vec<f64>> = seq.iter().map(|s| s.map(|v| v.norm())).collect();
    let Some(m) = mags else { return false };
    let (Some(first), Some(last)) = (m.first(), m.last()) else { return false };
    m.windows(2).all(|w| w[1] <= w[0]) && (*last <= ratio * first || *last == 0.0)
}

pub fn compatibility(g0: &MultiRationalFn, g1: &MultiRationalFn, ns: &[usize]) -> Result<CompatibilityReport> {
    compatibility_with(g0, g1, ns, &NumericPolicy::default())
}

/// Whether g1 can share a circuit with g0 without lowering g0's success
/// probability. The verdict is the exact solvability of the a1/a3 systems;
/// the epsilon trace is recorded alongside when x or y vanishes.
pub fn compatibility_with(
    g0: &MultiRationalFn,
    g1: &MultiRationalFn,
    ns: &[usize],
    policy: &NumericPolicy,
) -> Result<CompatibilityReport> {
    check_ns(g0, ns)?;
    check_ns(g1, ns)?;
    let s = scalars_for(g0, ns, policy)?;
    let o = overlaps(g0, g1, ns, &s);
    let compatible = o.residual.iter().all(|r| *r <= policy.compat);

    let degenerate = s.x <= policy.residual * (s.a + s.b).sqrt() || s.y.norm() <= policy.residual * (s.a + s.b).sqrt();
    let mut epsilon_trace = Vec::new();
    let (mut limit_s1, mut limit_s2) = (None, None);
    if degenerate {
        for &eps in &policy.epsilon_ladder {
            let zero_idx = vec![0; g0.k()];
            let bumped = MultiPoly::new(
                g0.k(),
                g0.p().terms().map(|(i, c)| (i.to_vec(), c)).chain([(zero_idx, Complex64::new(eps, 0.0))]),
            )?;
            let ge = MultiRationalFn::new(bumped, g0.q().clone())?;
            let se = scalars_for(&ge, ns, policy)?;
            let oe = overlaps(&ge, g1, ns, &se);
            epsilon_trace.push(EpsilonSample { epsilon: eps, s1: ratio(&oe, 0), s2: ratio(&oe, 1) });
        }
        let s1s: Vec<_> = epsilon_trace.iter().map(|e| e.s1).collect();
        let s2s: Vec<_> = epsilon_trace.iter().map(|e| e.s2).collect();
        limit_s1 = Some(vanishes(&s1s, policy.ladder_ratio));
        limit_s2 = Some(vanishes(&s2s, policy.ladder_ratio));
    }
    Ok(CompatibilityReport {
        x: s.x,
        y: s.y,
        s1: ratio(&o, 0),
        s2: ratio(&o, 1),
        residual1: o.residual[0],
        residual2: o.residual[1],
        compatible,
        epsilon_trace,
        limit_s1,
        limit_s2,
    })
}

/// Free parameters of the priority construction (a5 = 0).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PriorityScalars {
    pub g0: SynthScalars,
    pub a1: Complex64,
    pub a2: f64,
    pub a3: Complex64,
    pub a4: Complex64,
    pub h: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DilationInfo {
    /// The user factor r >= 1.
    pub scale: f64,
    /// Spectral norm of the unscaled coefficient matrix.
    pub spectral_norm: f64,
    pub k0: f64,
    pub k1: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Construction {
    Priority(PriorityScalars),
    Dilation(DilationInfo),
}

/// Rows 0..4 of `unitary` are `<v0|..<v3|`.
#[derive(Clone, Debug)]
pub struct MultifunctionalCircuit {
    pub g0: MultiRationalFn,
    pub g1: MultiRationalFn,
    pub ns: Vec<usize>,
    pub m: usize,
    pub unitary: UnitaryMatrix,
    pub rows: Vec<StateVector>,
    pub construction: Construction,
}

impl MultifunctionalCircuit {
    pub fn k(&self) -> usize {
        self.ns.len()
    }

    pub fn num_qubits(&self) -> usize {
        self.ns.iter().sum::<usize>() + self.m
    }
}

pub fn synthesize_priority(g0: &MultiRationalFn, g1: &MultiRationalFn, ns: &[usize]) -> Result<MultifunctionalCircuit> {
    synthesize_priority_with(g0, g1, ns, &NumericPolicy::default())
}

/// g0 keeps its dedicated-circuit probability, g1 takes what is left.
pub fn synthesize_priority_with(
    g0: &MultiRationalFn,
    g1: &MultiRationalFn,
    ns: &[usize],
    policy: &NumericPolicy,
) -> Result<MultifunctionalCircuit> {
    let report = compatibility_with(g0, g1, ns, policy)?;
    if !report.compatible {
        return Err(QqbfError::Incompatible(format!(
            "solvability residuals {:.3e}, {:.3e} exceed {:.1e}",
            report.residual1, report.residual2, policy.compat
        )));
    }
    let s = scalars_for(g0, ns, policy)?;
    let scale = (s.a + s.b).sqrt();
    let solve = |target: &MultiPoly| -> Complex64 {
        let sp = weighted_inner(g0.p(), target, ns);
        let sq = weighted_inner(g0.q(), target, ns);
        let a = if s.x == 0.0 && s.y == ZERO {
            ZERO
        } else if s.x >= s.y.norm() {
            -sp / s.x
        } else {
            -sq / s.y.conj()
        };
        if a.norm() <= policy.residual * scale.max(1.0) {
            ZERO
        } else {
            a
        }
    };
    let a1 = solve(g1.p());
    let a3 = solve(g1.q());

    let a2_norm = weighted_norm(g1.p(), ns) + a1.norm_sqr();
    let b2_norm = weighted_norm(g1.q(), ns) + a3.norm_sqr();
    let mut c2 = weighted_inner(g1.p(), g1.q(), ns) + a1.conj() * a3;
    let tol = policy.residual * (a2_norm + b2_norm);
    if c2.norm() <= tol {
        c2 = ZERO;
    }
    let diff = b2_norm - a2_norm;
    let mut a2 = ((diff + diff.hypot(2.0 * c2.norm())) / 2.0).max(0.0).sqrt();
    if a2 * a2 <= tol {
        a2 = 0.0;
    }
    let a4 = if a2 > 0.0 {
        -c2 / a2
    } else if c2 == ZERO {
        Complex64::new((a2_norm - b2_norm).max(0.0).sqrt(), 0.0)
    } else {
        return Err(QqbfError::Numeric("a2 = 0 with nonzero C2".into()));
    };
    let h = 1.0 / (a2_norm + a2 * a2).sqrt();

    let need0 = s.needs_theta() || a1 != ZERO || a3 != ZERO;
    let need1 = a2 != 0.0 || a4 != ZERO;
    let coins: usize = ns.iter().sum();
    let span: usize = ns.iter().map(|n| n + 1).product();
    let mut m = required_ancillas(ns, &s);
    while (1usize << (coins + m)) < (span + usize::from(need0) + usize::from(need1)).max(4) {
        m += 1;
    }
    if coins + m > MAX_UNITARY_QUBITS {
        return Err(QqbfError::Capacity(format!("{} qubits exceed {MAX_UNITARY_QUBITS}", coins + m)));
    }

    let (v0, v1, _) = build_v0_v1(g0, ns, m, &s)?;
    let dirs = complement_directions(ns, m, usize::from(need0) + usize::from(need1))?;
    let theta0 = need0.then(|| &dirs[0]);
    let theta1 = need1.then(|| &dirs[usize::from(need0)]);
    let total = coins + m;
    let make = |target: &MultiPoly, a: Complex64, b: Complex64| {
        let mut v = coefficient_vector(target, ns, m, h);
        for (t, coef) in [(theta0, a), (theta1, b)] {
            if let Some(t) = t {
                for (vi, ti) in v.iter_mut().zip(t.amps()) {
                    *vi += ti * coef * h;
                }
            }
        }
        StateVector::from_raw(total, v)
    };
    let v2 = make(g1.p(), a1, Complex64::new(a2, 0.0));
    let v3 = make(g1.q(), a3, a4);
    let rows = vec![v0, v1, v2, v3];
    let unitary = complete_unitary(&rows, policy.orthonormality, policy.pivot)?;
    Ok(MultifunctionalCircuit {
        g0: g0.clone(),
        g1: g1.clone(),
        ns: ns.to_vec(),
        m,
        unitary,
        rows,
        construction: Construction::Priority(PriorityScalars { g0: s, a1, a2, a3, a4, h }),
    })
}

/// Matrix with spectral norm at most one.
#[derive(Clone, Debug, PartialEq)]
pub struct Contraction {
    a: DMatrix<Complex64>,
}

impl Contraction {
    pub fn new(a: DMatrix<Complex64>) -> Result<Self> {
        Self::with_tolerance(a, NumericPolicy::default().contraction)
    }

    pub fn with_tolerance(a: DMatrix<Complex64>, tol: f64) -> Result<Self> {
        if a.nrows() == 0 || a.ncols() == 0 {
            return domain("empty contraction");
        }
        if a.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return domain("non-finite contraction entry");
        }
        let n = spectral_norm(&a);
        if n > 1.0 + tol {
            return domain(format!("spectral norm {n} exceeds 1"));
        }
        Ok(Contraction { a })
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.a
    }
}

pub fn spectral_norm(a: &DMatrix<Complex64>) -> f64 {
    a.clone().singular_values().iter().copied().fold(0.0, f64::max)
}

/// `[[A, sqrt(I - AA^+)], [sqrt(I - A^+A), -A^+]]`, the square roots taken
/// through one SVD of A so the blocks stay mutually consistent.
pub fn dilation_unitary(c: &Contraction) -> Result<UnitaryMatrix> {
    let a = &c.a;
    let (n, mdim) = a.shape();
    let svd = a.clone().svd(true, true);
    let u = svd.u.as_ref().ok_or_else(|| QqbfError::Numeric("SVD without U".into()))?;
    let vt = svd.v_t.as_ref().ok_or_else(|| QqbfError::Numeric("SVD without V".into()))?;
    let v = vt.adjoint();
    // sqrt(1 - s^2) - 1 per singular value
    let shift: Vec<f64> = svd
        .singular_values
        .iter()
        .map(|&s| ((1.0 - s) * (1.0 + s)).max(0.0).sqrt() - 1.0)
        .collect();
    let root = |basis: &DMatrix<Complex64>, dim: usize| {
        let mut scaled = basis.clone();
        for (j, d) in shift.iter().enumerate() {
            scaled.column_mut(j).iter_mut().for_each(|x| *x *= *d);
        }
        DMatrix::<Complex64>::identity(dim, dim) + scaled * basis.adjoint()
    };
    let top_right = root(u, n);
    let bottom_left = root(&v, mdim);
    let dim = n + mdim;
    let mut out = DMatrix::<Complex64>::zeros(dim, dim);
    out.view_mut((0, 0), (n, mdim)).copy_from(a);
    out.view_mut((0, mdim), (n, n)).copy_from(&top_right);
    out.view_mut((n, 0), (mdim, mdim)).copy_from(&bottom_left);
    out.view_mut((n, mdim), (mdim, n)).copy_from(&(-a.adjoint()));
    let unitary = UnitaryMatrix::from_matrix_unchecked(out);
    let d = unitary.unitarity_defect();
    if d.is_nan() || d > 1e-9 {
        return Err(QqbfError::Numeric(format!("dilation unitarity defect {d:.3e}")));
    }
    Ok(unitary)
}

pub fn synthesize_dilation(
    g0: &MultiRationalFn,
    g1: &MultiRationalFn,
    ns: &[usize],
    r: f64,
) -> Result<MultifunctionalCircuit> {
    synthesize_dilation_with(g0, g1, ns, r, &NumericPolicy::default())
}

/// Embeds the dilation of M/(r |M|_2), M = |00><p| + |01><q| + |10><r| + |11><s|.
/// Works for any pair; costs g0 some probability unless the pair is compatible.
pub fn synthesize_dilation_with(
    g0: &MultiRationalFn,
    g1: &MultiRationalFn,
    ns: &[usize],
    r: f64,
    policy: &NumericPolicy,
) -> Result<MultifunctionalCircuit> {
    if !(r.is_finite() && r >= 1.0) {
        return domain(format!("dilation scale r = {r} must be >= 1"));
    }
    check_ns(g0, ns)?;
    check_ns(g1, ns)?;
    let s0 = scalars_for(g0, ns, policy)?;
    let s1 = scalars_for(g1, ns, policy)?;
    let coins: usize = ns.iter().sum();
    let d = 1usize << coins;
    let mut extra = 0;
    while (1usize << (coins + extra)) < d + 4 {
        extra += 1;
    }
    let total = coins + extra;
    if total > MAX_UNITARY_QUBITS {
        return Err(QqbfError::Capacity(format!("{total} qubits exceed {MAX_UNITARY_QUBITS}")));
    }
    let kets = [
        coefficient_vector(g0.p(), ns, 0, s0.k),
        coefficient_vector(g0.q(), ns, 0, s0.k),
        coefficient_vector(g1.p(), ns, 0, s1.k),
        coefficient_vector(g1.q(), ns, 0, s1.k),
    ];
    let m = DMatrix::from_fn(4, d, |i, j| kets[i][j].conj());
    let sigma = spectral_norm(&m);
    if sigma.is_nan() || sigma <= 0.0 {
        return Err(QqbfError::Numeric("zero coefficient matrix".into()));
    }
    let a = Contraction::with_tolerance(m / Complex64::new(r * sigma, 0.0), 1e-9)?;
    let ud = dilation_unitary(&a)?;
    let dim = 1usize << total;
    let mut big = DMatrix::<Complex64>::identity(dim, dim);
    big.view_mut((0, 0), (d + 4, d + 4)).copy_from(ud.matrix());
    let unitary = UnitaryMatrix::from_matrix_unchecked(big);
    let rows = (0..4)
        .map(|i| StateVector::from_raw(total, unitary.row(i).iter().map(|c| c.conj()).collect()))
        .collect();
    Ok(MultifunctionalCircuit {
        g0: g0.clone(),
        g1: g1.clone(),
        ns: ns.to_vec(),
        m: extra,
        unitary,
        rows,
        construction: Construction::Dilation(DilationInfo { scale: r, spectral_norm: sigma, k0: s0.k, k1: s1.k }),
    })
}
