use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{domain, QqbfError, Result};
use crate::states::StateVector;

/// Largest register for which a dense unitary is built.
pub const MAX_UNITARY_QUBITS: usize = 12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Dense square complex matrix, unitary up to rounding.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryMatrix {
    m: DMatrix<Complex64>,
}

impl UnitaryMatrix {
    /// Wraps `m` after checking it is square and unitary within `tol` (Frobenius).
    pub fn new(m: DMatrix<Complex64>, tol: f64) -> Result<Self> {
        if !m.is_square() {
            return domain(format!("matrix is {}x{}, not square", m.nrows(), m.ncols()));
        }
        let u = UnitaryMatrix { m };
        let d = u.unitarity_defect();
        if d.is_nan() || d > tol {
            return domain(format!("matrix is not unitary: |U^+U - I|_F = {d:.3e}"));
        }
        Ok(u)
    }

    pub(crate) fn from_matrix_unchecked(m: DMatrix<Complex64>) -> Self {
        UnitaryMatrix { m }
    }

    pub fn from_rows(rows: &[Vec<Complex64>], tol: f64) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(QqbfError::Dimension { expected: n, got: bad.len() });
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]), tol)
    }

    pub fn identity(dim: usize) -> Self {
        UnitaryMatrix { m: DMatrix::identity(dim, dim) }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.m[(i, j)]
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.m
    }

    pub fn row(&self, i: usize) -> Vec<Complex64> {
        self.m.row(i).iter().copied().collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<Complex64>> {
        (0..self.dim()).map(|i| self.row(i)).collect()
    }

    /// `|U^+ U - I|_F`.
    pub fn unitarity_defect(&self) -> f64 {
        let g = self.m.adjoint() * &self.m;
        (g - DMatrix::<Complex64>::identity(self.dim(), self.dim())).norm()
    }

    pub fn apply(&self, v: &StateVector) -> Result<StateVector> {
        if v.dim() != self.dim() {
            return Err(QqbfError::Dimension { expected: self.dim(), got: v.dim() });
        }
        let amps = v.amps();
        let out = (0..self.dim())
            .map(|i| self.m.row(i).iter().zip(amps).map(|(u, a)| u * a).sum())
            .collect();
        Ok(StateVector::from_raw(v.num_qubits(), out))
    }

    /// Only rows `rows` of `U v`.
    pub fn apply_rows(&self, v: &StateVector, rows: std::ops::Range<usize>) -> Result<Vec<Complex64>> {
        if v.dim() != self.dim() {
            return Err(QqbfError::Dimension { expected: self.dim(), got: v.dim() });
        }
        let amps = v.amps();
        Ok(rows
            .map(|i| self.m.row(i).iter().zip(amps).map(|(u, a)| u * a).sum())
            .collect())
    }
}

fn phase(z: Complex64) -> Complex64 {
    z / z.norm()
}

/// Unitary whose first rows are `<v_0|, <v_1|, ...`.
///
/// Householder reflections Q_i map each (already reflected) v_i onto
/// alpha_i e_i with alpha_i = -phase(<e_i|x_i>), or -1 at a zero pivot.
/// Then U = (Q_0 ... Q_{k-1} D)^+ with D = diag(alpha). Each remaining row
/// is rotated so its diagonal entry (or first nonzero entry) is real positive.
pub fn complete_unitary(rows: &[StateVector], orth_tol: f64, pivot_tol: f64) -> Result<UnitaryMatrix> {
    let Some(first) = rows.first() else {
        return domain("complete_unitary needs at least one row");
    };
    let d = first.dim();
    if rows.len() > d {
        return domain(format!("{} rows do not fit in dimension {d}", rows.len()));
    }
    if first.num_qubits() > MAX_UNITARY_QUBITS {
        return Err(QqbfError::Capacity(format!(
            "{} qubits exceed the dense unitary limit of {MAX_UNITARY_QUBITS}",
            first.num_qubits()
        )));
    }
    for r in rows {
        if r.dim() != d {
            return Err(QqbfError::Dimension { expected: d, got: r.dim() });
        }
    }
    for (i, a) in rows.iter().enumerate() {
        for (j, b) in rows.iter().enumerate().skip(i) {
            let want = if i == j { ONE } else { ZERO };
            let g = a.inner(b);
            if (g - want).norm() > orth_tol {
                return domain(format!("rows {i} and {j} are not orthonormal (<v|w> = {g})"));
            }
        }
    }

    let k = rows.len();
    let mut reflectors: Vec<Option<Vec<Complex64>>> = Vec::with_capacity(k);
    let mut alphas = Vec::with_capacity(k);
    for (i, v) in rows.iter().enumerate() {
        let mut x = v.amps().to_vec();
        for u in reflectors.iter().flatten() {
            reflect(u, &mut x);
        }
        let pivot = x[i];
        let alpha = if pivot.norm() > pivot_tol { -phase(pivot) } else { -ONE };
        x[i] -= alpha;
        let un = x.iter().map(|c| c.norm_sqr()).sum::<f64>();
        reflectors.push((un > 1e-28).then_some(x));
        alphas.push(alpha);
    }

    let mut m = DMatrix::<Complex64>::identity(d, d);
    for (i, a) in alphas.iter().enumerate() {
        m[(i, i)] = *a;
    }
    for u in reflectors.iter().rev().flatten() {
        for c in 0..d {
            let mut col: Vec<Complex64> = m.column(c).iter().copied().collect();
            reflect(u, &mut col);
            for (r, v) in col.into_iter().enumerate() {
                m[(r, c)] = v;
            }
        }
    }
    let mut u = m.adjoint();

    for j in k..d {
        let lead = if u[(j, j)].norm() > 1e-10 {
            u[(j, j)]
        } else {
            match u.row(j).iter().find(|c| c.norm() > 1e-10) {
                Some(c) => *c,
                None => continue,
            }
        };
        let g = phase(lead).conj();
        for c in 0..d {
            u[(j, c)] *= g;
        }
    }

    for (i, v) in rows.iter().enumerate() {
        let err = v
            .amps()
            .iter()
            .enumerate()
            .map(|(c, a)| (u[(i, c)] - a.conj()).norm())
            .fold(0.0, f64::max);
        if err > 1e-9 {
            return Err(QqbfError::Numeric(format!("completed row {i} drifted by {err:.3e}")));
        }
    }
    Ok(UnitaryMatrix { m: u })
}

/// x <- (I - 2 u u^+ / u^+u) x
fn reflect(u: &[Complex64], x: &mut [Complex64]) {
    let uu: f64 = u.iter().map(|c| c.norm_sqr()).sum();
    let ux: Complex64 = u.iter().zip(x.iter()).map(|(a, b)| a.conj() * b).sum();
    let s = ux * (2.0 / uu);
    for (xi, ui) in x.iter_mut().zip(u) {
        *xi -= ui * s;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sv(amps: &[(f64, f64)]) -> StateVector {
        let n = amps.len().trailing_zeros() as usize;
        StateVector::new(n, amps.iter().map(|&(a, b)| Complex64::new(a, b)).collect()).unwrap()
    }

    #[test]
    fn basis_rows_give_identity() {
        let rows = [sv(&[(1.0, 0.0), (0.0, 0.0)]), sv(&[(0.0, 0.0), (1.0, 0.0)])];
        let u = complete_unitary(&rows, 1e-10, 1e-12).unwrap();
        assert_eq!(u, UnitaryMatrix::identity(2));
    }

    #[test]
    fn single_row_completion_is_unitary() {
        let h = 0.5;
        let rows = [sv(&[(h, 0.0), (0.0, h), (-h, 0.0), (0.0, -h)])];
        let u = complete_unitary(&rows, 1e-10, 1e-12).unwrap();
        assert!(u.unitarity_defect() < 1e-14);
        for c in 0..4 {
            assert!((u.get(0, c) - rows[0].amps()[c].conj()).norm() < 1e-15);
        }
    }

    #[test]
    fn non_orthonormal_rows_rejected() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let rows = [sv(&[(1.0, 0.0), (0.0, 0.0)]), sv(&[(h, 0.0), (h, 0.0)])];
        assert!(matches!(complete_unitary(&rows, 1e-10, 1e-12), Err(QqbfError::Domain(_))));
    }

    #[test]
    fn too_many_rows_rejected() {
        let e = |i| StateVector::basis(1, i).unwrap();
        assert!(complete_unitary(&[e(0), e(1), e(0)], 1e-10, 1e-12).is_err());
    }

    #[test]
    fn non_unitary_matrix_rejected() {
        let m = DMatrix::from_element(2, 2, ONE);
        assert!(UnitaryMatrix::new(m, 1e-10).is_err());
    }

    fn random_orthonormal(dim: usize, k: usize, seed: u64) -> Vec<StateVector> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let n = dim.trailing_zeros() as usize;
        let mut out: Vec<Vec<Complex64>> = Vec::new();
        while out.len() < k {
            let mut v: Vec<Complex64> = (0..dim)
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            for b in &out {
                let p: Complex64 = b.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= bi * p;
                }
            }
            let nrm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            if nrm < 1e-6 {
                continue;
            }
            out.push(v.into_iter().map(|c| c / nrm).collect());
        }
        out.into_iter().map(|a| StateVector::new(n, a).unwrap()).collect()
    }

    proptest! {
        #[test]
        fn completion_is_unitary_with_given_rows(
            qubits in 1usize..5,
            frac in 0.0f64..1.0,
            seed in any::<u64>(),
        ) {
            let dim = 1usize << qubits;
            let k = 1 + ((dim - 1) as f64 * frac) as usize;
            let rows = random_orthonormal(dim, k, seed);
            let u = complete_unitary(&rows, 1e-10, 1e-12).unwrap();
            prop_assert!(u.unitarity_defect() < 1e-10);
            for (i, r) in rows.iter().enumerate() {
                for c in 0..dim {
                    prop_assert!((u.get(i, c) - r.amps()[c].conj()).norm() < 1e-12);
                }
            }
        }
    }
}
