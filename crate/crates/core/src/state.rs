//! Dense Hermitian operators and normalized state vectors.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = nalgebra::Complex<f64>;

/// Tolerance on `| ‖ψ‖ - 1 |` for states accepted as initial or detection states.
pub const NORM_TOL: f64 = 1e-12;

/// A square complex matrix with `H[i][j] == conj(H[j][i])` bit for bit.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix(DMatrix<C64>);

impl HermitianMatrix {
    /// Accepts `m` only if it is exactly Hermitian.
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::InvalidGraph(format!(
                "Hamiltonian must be square and non-empty, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let n = m.nrows();
        for i in 0..n {
            for j in i..n {
                let d = (m[(i, j)] - m[(j, i)].conj()).norm();
                if d != 0.0 {
                    return Err(Error::NotHermitian {
                        row: i,
                        col: j,
                        deviation: d,
                    });
                }
            }
        }
        Ok(Self(m))
    }

    /// Replaces `m` by `(m + m†)/2`, with the lower triangle copied from the
    /// conjugated upper triangle so the result is exactly Hermitian.
    pub fn hermitize(m: DMatrix<C64>) -> Self {
        let n = m.nrows();
        assert!(
            m.is_square() && n > 0,
            "hermitize needs a non-empty square matrix"
        );
        let mut out = DMatrix::zeros(n, n);
        for i in 0..n {
            out[(i, i)] = C64::new(m[(i, i)].re, 0.0);
            for j in (i + 1)..n {
                let v = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
                out[(i, j)] = v;
                out[(j, i)] = v.conj();
            }
        }
        Self(out)
    }

    pub fn from_real(m: &DMatrix<f64>) -> Result<Self> {
        Self::new(m.map(|x| C64::new(x, 0.0)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.0
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
    }

    /// Frobenius norm, used as the scale for residual checks.
    pub fn norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_real(&self) -> bool {
        self.0.iter().all(|z| z.im == 0.0)
    }
}

/// A normalized state vector.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState(DVector<C64>);

impl QuantumState {
    /// Accepts `v` if its norm is one within [`NORM_TOL`].
    pub fn new(v: DVector<C64>) -> Result<Self> {
        if v.is_empty() {
            return Err(Error::InvalidState("empty state vector".into()));
        }
        if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidState("non-finite amplitude".into()));
        }
        let n = v.norm();
        if (n - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!(
                "state norm {n} differs from 1 by more than {NORM_TOL:e}"
            )));
        }
        Ok(Self(v))
    }

    /// Divides `v` by its norm.
    pub fn normalized(v: DVector<C64>) -> Result<Self> {
        let n = v.norm();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::InvalidState("cannot normalize a zero vector".into()));
        }
        Self::new(v / C64::new(n, 0.0))
    }

    pub fn localized(dim: usize, node: usize) -> Result<Self> {
        if node >= dim {
            return Err(Error::InvalidState(format!(
                "node {node} out of range for dimension {dim}"
            )));
        }
        let mut v = DVector::zeros(dim);
        v[node] = C64::new(1.0, 0.0);
        Ok(Self(v))
    }

    pub fn from_real(amps: &[f64]) -> Result<Self> {
        Self::new(DVector::from_iterator(
            amps.len(),
            amps.iter().map(|&x| C64::new(x, 0.0)),
        ))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn vector(&self) -> &DVector<C64> {
        &self.0
    }

    pub fn into_vector(self) -> DVector<C64> {
        self.0
    }

    /// The node carrying the whole amplitude, if the state is localized.
    pub fn localized_node(&self) -> Option<usize> {
        let mut found = None;
        for (i, z) in self.0.iter().enumerate() {
            let p = z.norm_sqr();
            if p > 1e-24 {
                if found.is_some() || (p - 1.0).abs() > 1e-12 {
                    return None;
                }
                found = Some(i);
            }
        }
        found
    }
}

/// On-disk form of a state: a list of `[re, im]` pairs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StateFile {
    pub amplitudes: Vec<[f64; 2]>,
}

impl StateFile {
    pub fn parse(bytes: &[u8]) -> Result<QuantumState> {
        let f: StateFile = serde_json::from_slice(bytes).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        QuantumState::new(DVector::from_iterator(
            f.amplitudes.len(),
            f.amplitudes.iter().map(|a| C64::new(a[0], a[1])),
        ))
    }

    pub fn from_state(s: &QuantumState) -> Self {
        Self {
            amplitudes: s.vector().iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// `⟨a|b⟩`.
pub(crate) fn inner(a: &DVector<C64>, b: &DVector<C64>) -> C64 {
    a.dotc(b)
}

/// Orthogonalizes `v` against the orthonormal `basis` (two passes) and
/// appends it if the remaining norm exceeds `tol`. Returns whether it was kept.
pub(crate) fn orthonormal_push(basis: &mut Vec<DVector<C64>>, v: &DVector<C64>, tol: f64) -> bool {
    let mut r = v.clone();
    for _ in 0..2 {
        for b in basis.iter() {
            let c = inner(b, &r);
            r -= b * c;
        }
    }
    let n = r.norm();
    if n > tol {
        basis.push(r / C64::new(n, 0.0));
        true
    } else {
        false
    }
}

/// `Σ_b |⟨b|v⟩|²` for an orthonormal set.
pub fn projected_weight(basis: &[DVector<C64>], v: &DVector<C64>) -> f64 {
    basis.iter().map(|b| inner(b, v).norm_sqr()).sum()
}

/// Largest distance of a vector of either orthonormal set from the span of
/// the other; zero iff the spans coincide.
pub fn span_distance(a: &[DVector<C64>], b: &[DVector<C64>]) -> f64 {
    let one_way = |x: &[DVector<C64>], y: &[DVector<C64>]| {
        x.iter()
            .map(|v| {
                let mut r = v.clone();
                for w in y {
                    r -= w * inner(w, v);
                }
                r.norm()
            })
            .fold(0.0, f64::max)
    };
    one_way(a, b).max(one_way(b, a))
}
