//! Per-setup reports combining the spectral formula, the symmetry bound and
//! the direct protocol simulation. These are the payloads the command-line
//! tool prints.

use serde::Serialize;

use crate::detection::{
    bright_eigenstates, pdet_spectral, PdetReport, Protocol, SeriesOptions, SeriesOutcome,
};
use crate::error::{Error, Result};
use crate::graph::{hamiltonian, WeightedGraph};
use crate::rational::{fraction, Fraction};
use crate::spectral::{
    diagonalize, fold_sectors, EigenSystem, SpectralDecomposition, RESONANCE_TOL,
};
use crate::state::{check_dim, HermitianMatrix, QuantumState};
use crate::sweep::{self, Execution};
use crate::symmetry::{
    automorphisms, nu, saturation_check, stabilizer, upper_bound, Saturation, StabilizerGroup,
};

/// Bound counted as attained when `|bound - P_det|` is below this.
pub const ATTAIN_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub enum Init {
    Node(usize),
    State(QuantumState),
}

#[derive(Clone, Debug, Serialize)]
pub struct InitRow {
    /// Node id for localized states, `None` for a supplied state vector.
    pub init: Option<usize>,
    pub pdet: f64,
    pub pdet_fraction: Option<Fraction>,
    pub nu: Option<usize>,
    pub upper_bound: Option<f64>,
    pub upper_bound_fraction: Option<Fraction>,
    pub attains_bound: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AnalysisReport {
    pub nodes: usize,
    pub gamma: f64,
    pub tau: f64,
    pub detect: Option<usize>,
    pub automorphism_order: Option<usize>,
    pub stabilizer_order: Option<usize>,
    pub stabilizer_phases_trivial: Option<bool>,
    pub bright_dim: usize,
    pub dark_dim: usize,
    pub saturation: Option<Saturation>,
    pub resonant: bool,
    pub warnings: Vec<String>,
    pub rows: Vec<InitRow>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SimulationStep {
    pub n: usize,
    pub f: f64,
    pub partial_sum: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SimulationReport {
    pub nodes: usize,
    pub gamma: f64,
    pub tau: f64,
    pub detect: Option<usize>,
    pub init: Option<usize>,
    pub series: SeriesOutcome,
    pub spectral: f64,
    pub difference: f64,
    pub resonant: bool,
    pub warnings: Vec<String>,
    pub steps: Vec<SimulationStep>,
}

/// Everything about one (graph, γ, detection state, τ) that does not depend
/// on the initial state.
#[derive(Debug)]
pub struct Analyzer {
    gamma: f64,
    tau: f64,
    psi_d: QuantumState,
    es: EigenSystem,
    sd: SpectralDecomposition,
    automorphism_order: Option<usize>,
    stab: Option<StabilizerGroup>,
    warnings: Vec<String>,
}

impl Analyzer {
    pub fn new(g: &WeightedGraph, gamma: f64, psi_d: QuantumState, tau: f64) -> Result<Self> {
        check_dim(g.node_count(), psi_d.dim())?;
        let h = hamiltonian(g, gamma);
        let mut warnings = Vec::new();
        let (automorphism_order, stab) = match automorphisms(g) {
            Ok(group) => (Some(group.order()), Some(stabilizer(&group, &psi_d)?)),
            Err(e @ (Error::NodeCap { .. } | Error::GroupTooLarge { .. })) => {
                warnings.push(format!("symmetry analysis skipped: {e}"));
                (None, None)
            }
            Err(e) => return Err(e),
        };
        Self::assemble(&h, gamma, psi_d, tau, automorphism_order, stab, warnings)
    }

    fn assemble(
        h: &HermitianMatrix,
        gamma: f64,
        psi_d: QuantumState,
        tau: f64,
        automorphism_order: Option<usize>,
        stab: Option<StabilizerGroup>,
        mut warnings: Vec<String>,
    ) -> Result<Self> {
        let es = diagonalize(h)?;
        let sd = fold_sectors(&es, tau)?;
        warnings.extend(resonance_warnings(&es, tau));
        for (a, b) in es.near_degenerate_gaps() {
            warnings.push(format!(
                "levels {a} and {b} are nearly degenerate; sector grouping may be fragile"
            ));
        }
        Ok(Self {
            gamma,
            tau,
            psi_d,
            es,
            sd,
            automorphism_order,
            stab,
            warnings,
        })
    }

    pub fn dim(&self) -> usize {
        self.es.dim()
    }

    pub fn eigensystem(&self) -> &EigenSystem {
        &self.es
    }

    pub fn decomposition(&self) -> &SpectralDecomposition {
        &self.sd
    }

    pub fn stabilizer(&self) -> Option<&StabilizerGroup> {
        self.stab.as_ref()
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn resonant(&self) -> bool {
        crate::spectral::is_resonant(&self.es, self.tau)
    }

    fn state(&self, init: &Init) -> Result<QuantumState> {
        match init {
            Init::Node(r) => QuantumState::localized(self.dim(), *r),
            Init::State(s) => {
                check_dim(self.dim(), s.dim())?;
                Ok(s.clone())
            }
        }
    }

    pub fn pdet(&self, init: &Init) -> Result<PdetReport> {
        pdet_spectral(&self.sd, &self.psi_d, &self.state(init)?)
    }

    pub fn row(&self, init: &Init) -> Result<InitRow> {
        let psi = self.state(init)?;
        let pdet = pdet_spectral(&self.sd, &self.psi_d, &psi)?.pdet;
        let (nu, bound) = match &self.stab {
            Some(s) => (Some(nu(s, &psi)?), Some(upper_bound(s, &psi)?)),
            None => (None, None),
        };
        Ok(InitRow {
            init: match init {
                Init::Node(r) => Some(*r),
                Init::State(_) => None,
            },
            pdet,
            pdet_fraction: fraction(pdet),
            nu,
            upper_bound: bound,
            upper_bound_fraction: bound.and_then(fraction),
            attains_bound: bound.map(|b| (b - pdet).abs() < ATTAIN_TOL),
        })
    }

    /// One row per localized initial state, sorted by node id.
    pub fn rows_all(&self, exec: Execution) -> Result<Vec<InitRow>> {
        let nodes: Vec<usize> = (0..self.dim()).collect();
        sweep::map(exec, &nodes, |&r| self.row(&Init::Node(r)))
            .into_iter()
            .collect()
    }

    pub fn report(&self, rows: Vec<InitRow>) -> Result<AnalysisReport> {
        let bright_dim = bright_eigenstates(&self.sd, &self.psi_d)?.bright.len();
        let saturation = match &self.stab {
            Some(s) => Some(saturation_check(&self.sd, s, &self.psi_d)?),
            None => None,
        };
        Ok(AnalysisReport {
            nodes: self.dim(),
            gamma: self.gamma,
            tau: self.tau,
            detect: self.psi_d.localized_node(),
            automorphism_order: self.automorphism_order,
            stabilizer_order: self.stab.as_ref().map(StabilizerGroup::order),
            stabilizer_phases_trivial: self.stab.as_ref().map(StabilizerGroup::all_phases_trivial),
            bright_dim,
            dark_dim: self.dim() - bright_dim,
            saturation,
            resonant: self.resonant(),
            warnings: self.warnings.clone(),
            rows,
        })
    }

    /// Runs the protocol until the series converges, recording at most
    /// `record` steps, and sets the spectral value beside it.
    pub fn simulate(
        &self,
        init: &Init,
        opts: &SeriesOptions,
        record: usize,
    ) -> Result<SimulationReport> {
        let psi = self.state(init)?;
        let protocol = Protocol::new(&self.es, &self.psi_d, self.tau)?;
        let series = protocol.pdet_series(psi.vector(), opts);
        let spectral = pdet_spectral(&self.sd, &self.psi_d, &psi)?.pdet;
        let mut partial = 0.0;
        let steps = protocol
            .amplitudes(psi.vector(), series.n_used.min(record))
            .into_iter()
            .enumerate()
            .map(|(k, phi)| {
                let f = phi.norm_sqr();
                partial += f;
                SimulationStep {
                    n: k + 1,
                    f,
                    partial_sum: partial,
                }
            })
            .collect();
        let mut warnings = self.warnings.clone();
        if !series.converged {
            warnings.push(format!(
                "series did not converge within {} attempts",
                opts.n_cap
            ));
        }
        Ok(SimulationReport {
            nodes: self.dim(),
            gamma: self.gamma,
            tau: self.tau,
            detect: self.psi_d.localized_node(),
            init: match init {
                Init::Node(r) => Some(*r),
                Init::State(_) => None,
            },
            series,
            spectral,
            difference: (series.estimate - spectral).abs(),
            resonant: self.resonant(),
            warnings,
            steps,
        })
    }
}

/// Level pairs folding onto the same eigenphase at exactly this `τ`.
fn resonance_warnings(es: &EigenSystem, tau: f64) -> Vec<String> {
    let levels = es.levels();
    let mut out = Vec::new();
    for (a, la) in levels.iter().enumerate() {
        for lb in &levels[a + 1..] {
            let x = (lb.energy - la.energy) * tau;
            let k = (x / std::f64::consts::TAU).round();
            if k >= 1.0 && (x - k * std::f64::consts::TAU).abs() < RESONANCE_TOL {
                out.push(format!(
                    "tau = {tau} is resonant: levels {} and {} fold together (k = {k})",
                    la.energy, lb.energy
                ));
            }
        }
    }
    out
}
