//! Symmetrized Hamiltonian on the stabilizer orbits of a localized detection
//! state, and `P_det` computed in that reduced space.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::detection::{pdet_spectral_raw, Method, PdetReport};
use crate::error::{Error, Result};
use crate::graph::{Edge, WeightedGraph};
use crate::spectral::{diagonalize, fold_sectors, EigenSystem};
use crate::state::{check_dim, HermitianMatrix, QuantumState, C64};
use crate::symmetry::StabilizerGroup;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NodeClass {
    pub id: usize,
    pub members: Vec<usize>,
    pub nu: usize,
}

#[derive(Clone, Debug)]
pub struct QuotientSystem {
    h_s: HermitianMatrix,
    classes: Vec<NodeClass>,
    /// Columns are the class states `u(x)` in the original basis.
    lift: DMatrix<C64>,
    detect_class: usize,
    detect: DVector<C64>,
}

impl QuotientSystem {
    pub fn h_s(&self) -> &HermitianMatrix {
        &self.h_s
    }

    pub fn classes(&self) -> &[NodeClass] {
        &self.classes
    }

    pub fn lift_matrix(&self) -> &DMatrix<C64> {
        &self.lift
    }

    pub fn detect_class(&self) -> usize {
        self.detect_class
    }

    pub fn dim(&self) -> usize {
        self.classes.len()
    }

    pub fn original_dim(&self) -> usize {
        self.lift.nrows()
    }

    /// Class id of every original node.
    pub fn class_of(&self) -> Vec<usize> {
        let mut out = vec![0; self.original_dim()];
        for c in &self.classes {
            for &m in &c.members {
                out[m] = c.id;
            }
        }
        out
    }

    /// Maps a class-space vector back to the original space.
    pub fn lift(&self, v: &DVector<C64>) -> DVector<C64> {
        &self.lift * v
    }

    /// Coordinates of the symmetric part of `psi` and the norm² left out.
    pub fn reduce(&self, psi: &QuantumState) -> Result<(DVector<C64>, f64)> {
        check_dim(self.original_dim(), psi.dim())?;
        let c = self.lift.adjoint() * psi.vector();
        let discarded = (1.0 - c.norm_squared()).max(0.0);
        Ok((c, discarded))
    }

    /// The reduced system as a graph: coupling `-H_S[x][y]/γ` on each link,
    /// diagonal as on-site energy, class members as labels.
    pub fn quotient_graph(&self, gamma: f64) -> Result<WeightedGraph> {
        if !(gamma.is_finite() && gamma != 0.0) {
            return Err(Error::InvalidGraph(format!(
                "hopping rate must be non-zero, got {gamma}"
            )));
        }
        if !self.h_s.is_real() {
            return Err(Error::Unsupported(
                "complex symmetrized Hamiltonian has no graph form".into(),
            ));
        }
        let m = self.h_s.matrix();
        let n = self.dim();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let h = m[(i, j)].re;
                if h != 0.0 {
                    edges.push(Edge {
                        i,
                        j,
                        w: -h / gamma,
                    });
                }
            }
        }
        let onsite = (0..n).map(|i| m[(i, i)].re).collect();
        let labels = self
            .classes
            .iter()
            .map(|c| {
                c.members
                    .iter()
                    .map(usize::to_string)
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect();
        WeightedGraph::new(n, edges, onsite, Some(labels))
    }
}

/// Builds `H_S` with `h^S_xy = Σ_{x'∈x} Σ_{y'∈y} h_{x'y'} / √(ν_x ν_y)`.
///
/// `stab` must stabilize `psi_d` and commute with `h`.
pub fn symmetrize(
    h: &HermitianMatrix,
    stab: &StabilizerGroup,
    psi_d: &QuantumState,
) -> Result<QuotientSystem> {
    check_dim(h.dim(), stab.dim())?;
    check_dim(h.dim(), psi_d.dim())?;
    let Some(r) = psi_d.localized_node() else {
        return Err(Error::Unsupported(
            "quotient requires a detection state localized on one node".into(),
        ));
    };
    let m = h.matrix();
    let n = h.dim();
    let scale = h.max_abs().max(1.0);
    for e in stab.elements() {
        let p = e.perm.image();
        if p[r] != r {
            return Err(Error::Unsupported(format!(
                "symmetry moves detection node {r}"
            )));
        }
        for i in 0..n {
            for j in 0..n {
                if (m[(p[i], p[j])] - m[(i, j)]).norm() > 1e-10 * scale {
                    return Err(Error::Unsupported(
                        "symmetry does not commute with H".into(),
                    ));
                }
            }
        }
    }

    let classes: Vec<NodeClass> = stab
        .orbits()
        .into_iter()
        .enumerate()
        .map(|(id, members)| NodeClass {
            id,
            nu: members.len(),
            members,
        })
        .collect();
    let k = classes.len();
    let mut lift = DMatrix::zeros(n, k);
    for c in &classes {
        let a = C64::new(1.0 / (c.nu as f64).sqrt(), 0.0);
        for &x in &c.members {
            lift[(x, c.id)] = a;
        }
    }
    let mut hs = DMatrix::zeros(k, k);
    for x in &classes {
        for y in &classes {
            let mut s = C64::new(0.0, 0.0);
            for &a in &x.members {
                for &b in &y.members {
                    s += m[(a, b)];
                }
            }
            hs[(x.id, y.id)] = s / ((x.nu * y.nu) as f64).sqrt();
        }
    }
    let detect_class = classes.iter().position(|c| c.members.contains(&r)).unwrap();
    let detect = lift.adjoint() * psi_d.vector();
    Ok(QuotientSystem {
        h_s: HermitianMatrix::hermitize(hs),
        classes,
        lift,
        detect_class,
        detect,
    })
}

pub fn symmetric_eigensystem(q: &QuotientSystem) -> Result<EigenSystem> {
    diagonalize(&q.h_s)
}

/// `P_det` from the reduced system, with sectors folded at `tau`. Sector
/// degeneracies in the report are the symmetric ones.
pub fn pdet_symmetrized(q: &QuotientSystem, psi_in: &QuantumState, tau: f64) -> Result<PdetReport> {
    let (c, discarded) = q.reduce(psi_in)?;
    let es = symmetric_eigensystem(q)?;
    let sd = fold_sectors(&es, tau)?;
    let mut report = pdet_spectral_raw(&sd, &q.detect, &c, Method::Symmetrized);
    report.discarded_weight = Some(discarded);
    Ok(report)
}
