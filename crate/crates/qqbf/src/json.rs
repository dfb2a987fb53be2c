//! JSON exchange formats. Complex numbers are `[re, im]`; points of the
//! extended plane are strings such as `"1-2i"` or `"inf"`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{QqbfError, Result};
use crate::multifunc::{CompatibilityReport, Construction, MultifunctionalCircuit};
use crate::policy::NumericPolicy;
use crate::poly::{ExtendedComplex, MultiPoly, MultiRationalFn, Poly, RationalFn};
use crate::sim::{SampleResult, SimulationResult, VerifyReport};
use crate::states::StateVector;
use crate::synth::{theta0, QqbfCircuit, SynthScalars, UnitaryMatrix};

pub const BIT_ORDER: &str = "lsb-first";

fn parse_err(what: &str, e: impl std::fmt::Display) -> QqbfError {
    QqbfError::Parse(format!("{what}: {e}"))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermJson {
    pub index: Vec<usize>,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PolyJson {
    Dense {
        coeffs: Vec<Complex64>,
    },
    Sparse {
        k: usize,
        terms: Vec<TermJson>,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionJson {
    #[serde(rename = "P")]
    pub p: PolyJson,
    #[serde(rename = "Q")]
    pub q: PolyJson,
}

impl PolyJson {
    fn k(&self) -> usize {
        match self {
            PolyJson::Dense { .. } => 1,
            PolyJson::Sparse { k, .. } => *k,
        }
    }

    fn to_multi(&self) -> Result<MultiPoly> {
        match self {
            PolyJson::Dense { coeffs } => Ok(MultiPoly::from_univariate(&Poly::new(coeffs.clone())?)),
            PolyJson::Sparse { k, terms } => {
                MultiPoly::new(*k, terms.iter().map(|t| (t.index.clone(), Complex64::new(t.re, t.im))))
            }
        }
    }
}

pub fn poly_to_json(p: &Poly) -> PolyJson {
    PolyJson::Dense { coeffs: p.coeffs().to_vec() }
}

pub fn multi_poly_to_json(p: &MultiPoly) -> PolyJson {
    PolyJson::Sparse {
        k: p.k(),
        terms: p.terms().map(|(i, c)| TermJson { index: i.to_vec(), re: c.re, im: c.im }).collect(),
    }
}

/// Univariate functions use the dense form, others the sparse one.
pub fn function_to_json(f: &MultiRationalFn) -> FunctionJson {
    match f.as_univariate() {
        Some((p, q)) => FunctionJson { p: poly_to_json(&p), q: poly_to_json(&q) },
        None => FunctionJson { p: multi_poly_to_json(f.p()), q: multi_poly_to_json(f.q()) },
    }
}

impl FunctionJson {
    /// Univariate inputs must be coprime within `coprime_tol`.
    pub fn to_function(&self, coprime_tol: f64) -> Result<MultiRationalFn> {
        if self.p.k() != self.q.k() {
            return Err(QqbfError::Dimension { expected: self.p.k(), got: self.q.k() });
        }
        let f = MultiRationalFn::new(self.p.to_multi()?, self.q.to_multi()?)?;
        if let Some((p, q)) = f.as_univariate() {
            RationalFn::with_tolerance(p, q, coprime_tol)?;
        }
        Ok(f)
    }

    /// Accepts any pair, coprime or not.
    pub fn to_raw_pair(&self) -> Result<MultiRationalFn> {
        if self.p.k() != self.q.k() {
            return Err(QqbfError::Dimension { expected: self.p.k(), got: self.q.k() });
        }
        MultiRationalFn::new(self.p.to_multi()?, self.q.to_multi()?)
    }
}

pub fn parse_function(text: &str, coprime_tol: f64) -> Result<MultiRationalFn> {
    let fj: FunctionJson = serde_json::from_str(text).map_err(|e| parse_err("function", e))?;
    fj.to_function(coprime_tol)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateVectorJson {
    pub num_qubits: usize,
    pub amps: Vec<Complex64>,
}

pub fn state_to_json(v: &StateVector) -> StateVectorJson {
    StateVectorJson { num_qubits: v.num_qubits(), amps: v.amps().to_vec() }
}

pub fn state_from_json(j: &StateVectorJson) -> Result<StateVector> {
    StateVector::new(j.num_qubits, j.amps.clone())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalarsJson {
    pub a: f64,
    pub b: f64,
    pub c: Complex64,
    pub l: f64,
    pub x: f64,
    pub y: Complex64,
    #[serde(rename = "K")]
    pub k: f64,
    pub w: f64,
}

impl From<&SynthScalars> for ScalarsJson {
    fn from(s: &SynthScalars) -> Self {
        ScalarsJson { a: s.a, b: s.b, c: s.c, l: s.l, x: s.x, y: s.y, k: s.k, w: s.w }
    }
}

impl From<&ScalarsJson> for SynthScalars {
    fn from(s: &ScalarsJson) -> Self {
        SynthScalars { a: s.a, b: s.b, c: s.c, l: s.l, x: s.x, y: s.y, k: s.k, w: s.w }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitJson {
    pub k: usize,
    pub ns: Vec<usize>,
    pub m: usize,
    pub bit_order: String,
    pub function: FunctionJson,
    pub scalars: ScalarsJson,
    pub unitary: Vec<Vec<Complex64>>,
}

pub fn circuit_to_json(c: &QqbfCircuit) -> CircuitJson {
    CircuitJson {
        k: c.k(),
        ns: c.ns.clone(),
        m: c.m,
        bit_order: BIT_ORDER.into(),
        function: function_to_json(&c.function),
        scalars: (&c.scalars).into(),
        unitary: c.unitary.to_rows(),
    }
}

pub fn circuit_from_json(j: &CircuitJson, policy: &NumericPolicy) -> Result<QqbfCircuit> {
    if j.bit_order != BIT_ORDER {
        return Err(QqbfError::Parse(format!("unsupported bit_order {:?}", j.bit_order)));
    }
    if j.k != j.ns.len() {
        return Err(QqbfError::Dimension { expected: j.k, got: j.ns.len() });
    }
    let function = j.function.to_raw_pair()?;
    if function.k() != j.k {
        return Err(QqbfError::Dimension { expected: j.k, got: function.k() });
    }
    let total = j.ns.iter().sum::<usize>() + j.m;
    if total > crate::synth::MAX_UNITARY_QUBITS {
        return Err(QqbfError::Capacity(format!("{total} qubits in circuit file")));
    }
    if j.unitary.len() != 1 << total {
        return Err(QqbfError::Dimension { expected: 1 << total, got: j.unitary.len() });
    }
    let unitary = UnitaryMatrix::from_rows(&j.unitary, 1e-9)?;
    let ket = |i: usize| StateVector::from_raw(total, unitary.row(i).iter().map(|c| c.conj()).collect());
    let scalars: SynthScalars = (&j.scalars).into();
    let theta0 = if scalars.needs_theta() { Some(theta0(&j.ns, j.m)?) } else { None };
    let _ = policy;
    Ok(QqbfCircuit {
        function,
        ns: j.ns.clone(),
        m: j.m,
        v0: ket(0),
        v1: ket(1),
        unitary,
        theta0,
        scalars,
    })
}

pub fn parse_circuit(text: &str, policy: &NumericPolicy) -> Result<QqbfCircuit> {
    let j: CircuitJson = serde_json::from_str(text).map_err(|e| parse_err("circuit", e))?;
    circuit_from_json(&j, policy)
}

pub fn ext_to_value(z: &ExtendedComplex) -> Value {
    Value::String(z.to_string())
}

pub fn multifunctional_to_json(c: &MultifunctionalCircuit) -> Value {
    let construction = match &c.construction {
        Construction::Priority(p) => json!({
            "kind": "priority",
            "g0_scalars": ScalarsJson::from(&p.g0),
            "a1": p.a1, "a2": p.a2, "a3": p.a3, "a4": p.a4, "a5": 0.0, "H": p.h,
        }),
        Construction::Dilation(d) => json!({
            "kind": "dilation",
            "r": d.scale, "spectral_norm": d.spectral_norm, "K0": d.k0, "K1": d.k1,
        }),
    };
    json!({
        "k": c.k(),
        "ns": c.ns,
        "m": c.m,
        "bit_order": BIT_ORDER,
        "g0": function_to_json(&c.g0),
        "g1": function_to_json(&c.g1),
        "construction": construction,
        "rows": c.rows.iter().map(state_to_json).collect::<Vec<_>>(),
        "unitary": c.unitary.to_rows(),
    })
}

pub fn compatibility_to_json(r: &CompatibilityReport) -> Value {
    json!({
        "compatible": r.compatible,
        "x": r.x,
        "y": r.y,
        "s1": r.s1,
        "s2": r.s2,
        "residual1": r.residual1,
        "residual2": r.residual2,
        "limit_s1_vanishes": r.limit_s1,
        "limit_s2_vanishes": r.limit_s2,
        "epsilon_trace": r.epsilon_trace.iter().map(|e| json!({
            "epsilon": e.epsilon, "s1": e.s1, "s2": e.s2,
        })).collect::<Vec<_>>(),
    })
}

pub fn simulation_to_json(r: &SimulationResult) -> Value {
    json!({
        "success_prob": r.success_prob,
        "herald_amps": r.herald_amps,
        "output": r.output.as_ref().map(|o| o.amps().to_vec()),
        "fidelity": r.fidelity,
    })
}

pub fn sample_to_json(r: &SampleResult) -> Value {
    json!({
        "shots": r.shots,
        "herald_successes": r.herald_successes,
        "branch_counts": r.branch_counts,
        "rng_seed": r.rng_seed,
    })
}

pub fn verify_to_json(r: &VerifyReport) -> Value {
    json!({
        "passed": r.failures.is_empty(),
        "positivity_required": r.positivity_required,
        "points": r.points.iter().map(|p| json!({
            "z": p.zs.iter().map(ext_to_value).collect::<Vec<_>>(),
            "success_prob": p.success_prob,
            "fidelity": p.fidelity,
        })).collect::<Vec<_>>(),
        "failures": r.failures.iter().map(|f| json!({
            "index": f.index,
            "z": f.zs.iter().map(ext_to_value).collect::<Vec<_>>(),
            "reason": f.reason,
        })).collect::<Vec<_>>(),
    })
}

pub fn unitary_to_json(u: &UnitaryMatrix) -> Value {
    json!({ "dim": u.dim(), "unitary": u.to_rows() })
}

/// Rectangular complex matrix as nested `[re, im]` rows.
pub fn parse_matrix(text: &str) -> Result<DMatrix<Complex64>> {
    let rows: Vec<Vec<Complex64>> = serde_json::from_str(text).map_err(|e| parse_err("matrix", e))?;
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if n == 0 || m == 0 {
        return Err(QqbfError::Parse("matrix must be non-empty".into()));
    }
    if let Some(r) = rows.iter().find(|r| r.len() != m) {
        return Err(QqbfError::Dimension { expected: m, got: r.len() });
    }
    Ok(DMatrix::from_fn(n, m, |i, j| rows[i][j]))
}

pub fn error_to_json(e: &QqbfError) -> Value {
    let mut v = json!({ "error": { "kind": e.kind(), "detail": e.to_string() } });
    if let QqbfError::Verification(rep) = e {
        v["error"]["report"] = verify_to_json(rep);
    }
    v
}
