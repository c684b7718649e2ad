//! The stroboscopic detection protocol.
//!
//! Between detection attempts the state evolves with `U(τ)`; a failed attempt
//! removes the component along the detection state. The first-detection
//! amplitude after `n` attempts is
//! `φ_n = ⟨ψ_d| U [(1 - D) U]^{n-1} |ψ_in⟩` and `P_det = Σ_n |φ_n|²`.
//!
//! [`pdet_series`] sums the series directly and serves as an oracle for the
//! spectral formula in [`pdet_spectral`], which only needs the bright
//! eigenstates `β_l = P_l ψ_d / ‖P_l ψ_d‖`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectral::{diagonalize, fold_sectors, EigenSystem, SpectralDecomposition};
use crate::state::{check_dim, inner, orthonormal_push, HermitianMatrix, QuantumState, C64};

/// Sectors with `‖P_l ψ_d‖²` below this are completely dark.
pub const DARK_THRESHOLD: f64 = 1e-12;
/// Rank tolerance of the Krylov construction.
pub const KRYLOV_RANK_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct DetectionSetup {
    pub h: HermitianMatrix,
    pub psi_d: QuantumState,
    pub psi_in: QuantumState,
    pub tau: f64,
}

impl DetectionSetup {
    pub fn new(
        h: HermitianMatrix,
        psi_d: QuantumState,
        psi_in: QuantumState,
        tau: f64,
    ) -> Result<Self> {
        check_dim(h.dim(), psi_d.dim())?;
        check_dim(h.dim(), psi_in.dim())?;
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::InvalidPeriod(tau));
        }
        Ok(Self {
            h,
            psi_d,
            psi_in,
            tau,
        })
    }
}

/// `U(τ)` and the detection state, ready to run the protocol on many
/// initial states.
#[derive(Clone, Debug)]
pub struct Protocol {
    u: DMatrix<C64>,
    detect: DVector<C64>,
    tau: f64,
    energy_scale: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct SeriesOptions {
    pub rel_tol: f64,
    pub n_cap: usize,
    /// Number of attempts per block in the geometric tail fit.
    pub window: usize,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-6,
            n_cap: 100_000,
            window: 32,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SeriesOutcome {
    /// `Σ_{n ≤ n_used} F_n`.
    pub estimate: f64,
    pub n_used: usize,
    pub converged: bool,
    /// Extrapolated `Σ_{n > n_used} F_n` at the last block boundary.
    pub tail_estimate: f64,
    /// Squared norm of the undetected state after `n_used` attempts.
    pub survival: f64,
}

/// Windows with a combined probability below this are treated as empty once
/// the walk has had time to cross the graph several times.
const EMPTY_WINDOW: f64 = 1e-28;

impl Protocol {
    pub fn new(es: &EigenSystem, psi_d: &QuantumState, tau: f64) -> Result<Self> {
        check_dim(es.dim(), psi_d.dim())?;
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::InvalidPeriod(tau));
        }
        let energy_scale = es.eigenvalues().iter().fold(0.0_f64, |a, e| a.max(e.abs()));
        Ok(Self {
            u: es.propagator(tau),
            detect: psi_d.vector().clone(),
            tau,
            energy_scale,
        })
    }

    pub fn from_setup(s: &DetectionSetup) -> Result<Self> {
        Self::new(&diagonalize(&s.h)?, &s.psi_d, s.tau)
    }

    pub fn dim(&self) -> usize {
        self.detect.len()
    }

    pub fn evolution_operator(&self) -> &DMatrix<C64> {
        &self.u
    }

    /// One evolution/detection double step: returns `φ` and leaves the
    /// undetected remainder in `state`.
    fn step(&self, state: &mut DVector<C64>) -> C64 {
        *state = &self.u * &*state;
        let phi = inner(&self.detect, state);
        state.axpy(-phi, &self.detect, C64::new(1.0, 0.0));
        phi
    }

    /// `φ_1 .. φ_{n_max}` for an arbitrary (not necessarily normalized) vector.
    pub fn amplitudes(&self, psi_in: &DVector<C64>, n_max: usize) -> Vec<C64> {
        let mut state = psi_in.clone();
        (0..n_max).map(|_| self.step(&mut state)).collect()
    }

    /// Amplitudes together with the squared survival norm after each attempt.
    pub fn trace(&self, psi_in: &DVector<C64>, n_max: usize) -> Vec<(C64, f64)> {
        let mut state = psi_in.clone();
        (0..n_max)
            .map(|_| {
                let phi = self.step(&mut state);
                (phi, state.norm_squared())
            })
            .collect()
    }

    /// Partial sums of `F_n` until the geometric tail estimate drops below
    /// `rel_tol` times the running sum for two consecutive blocks.
    ///
    /// The tail is extrapolated from the ratio `q` of the last two block sums
    /// `A` and `B` as `A·q/(1-q)`.
    pub fn pdet_series(&self, psi_in: &DVector<C64>, opts: &SeriesOptions) -> SeriesOutcome {
        let w = opts.window.max(1);
        let mut state = psi_in.clone();
        let mut sum = 0.0;
        let mut block = 0.0;
        let mut prev_block = f64::NAN;
        let mut streak = 0;
        let mut tail = f64::INFINITY;
        // attempts needed to cross the graph a few times
        let crossing = if self.energy_scale > 0.0 {
            (4.0 * std::f64::consts::PI * self.dim() as f64 / (self.energy_scale * self.tau)).ceil()
                as usize
        } else {
            0
        };
        for n in 1..=opts.n_cap {
            let f = self.step(&mut state).norm_sqr();
            sum += f;
            block += f;
            if n % w != 0 {
                continue;
            }
            if prev_block.is_finite() {
                tail = if block == 0.0 {
                    0.0
                } else if block < prev_block {
                    let q = block / prev_block;
                    block * q / (1.0 - q)
                } else {
                    f64::INFINITY
                };
                let empty = block + prev_block <= EMPTY_WINDOW && n >= crossing;
                if tail <= opts.rel_tol * sum || empty {
                    streak += 1;
                } else {
                    streak = 0;
                }
                if streak >= 2 {
                    return SeriesOutcome {
                        estimate: sum,
                        n_used: n,
                        converged: true,
                        tail_estimate: tail,
                        survival: state.norm_squared(),
                    };
                }
            }
            prev_block = block;
            block = 0.0;
        }
        SeriesOutcome {
            estimate: sum,
            n_used: opts.n_cap,
            converged: false,
            tail_estimate: tail,
            survival: state.norm_squared(),
        }
    }
}

/// `φ_1 .. φ_{n_max}` by iterating the survival operator.
pub fn first_detection_amplitudes(s: &DetectionSetup, n_max: usize) -> Result<Vec<C64>> {
    Ok(Protocol::from_setup(s)?.amplitudes(s.psi_in.vector(), n_max))
}

/// Direct summation of the first-detection probabilities.
pub fn pdet_series(s: &DetectionSetup, rel_tol: f64, n_cap: usize) -> Result<SeriesOutcome> {
    let opts = SeriesOptions {
        rel_tol,
        n_cap,
        ..Default::default()
    };
    Ok(Protocol::from_setup(s)?.pdet_series(s.psi_in.vector(), &opts))
}

#[derive(Clone, Debug)]
pub struct BrightState {
    pub sector: usize,
    /// `‖P_l ψ_d‖²`.
    pub weight: f64,
    pub state: DVector<C64>,
}

#[derive(Clone, Debug)]
pub struct BrightDecomposition {
    pub bright: Vec<BrightState>,
    /// Sectors without overlap with the detection state.
    pub dark_sectors: Vec<usize>,
}

impl BrightDecomposition {
    pub fn basis(&self) -> Vec<DVector<C64>> {
        self.bright.iter().map(|b| b.state.clone()).collect()
    }
}

pub fn bright_eigenstates(
    sd: &SpectralDecomposition,
    psi_d: &QuantumState,
) -> Result<BrightDecomposition> {
    check_dim(sd.dim(), psi_d.dim())?;
    Ok(bright_of(sd, psi_d.vector()))
}

fn bright_of(sd: &SpectralDecomposition, d: &DVector<C64>) -> BrightDecomposition {
    let mut bright = Vec::new();
    let mut dark_sectors = Vec::new();
    for (l, s) in sd.sectors().iter().enumerate() {
        let p = s.project(d);
        let weight = p.norm_squared();
        if weight < DARK_THRESHOLD {
            dark_sectors.push(l);
        } else {
            bright.push(BrightState {
                sector: l,
                weight,
                state: p / C64::new(weight.sqrt(), 0.0),
            });
        }
    }
    BrightDecomposition {
        bright,
        dark_sectors,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Spectral,
    Series,
    Symmetrized,
}

#[derive(Clone, Debug, Serialize)]
pub struct SectorContribution {
    pub sector: usize,
    pub phase: f64,
    pub energies: Vec<f64>,
    pub degeneracy: usize,
    /// `Σ_m |⟨ψ_d|E_{l,m}⟩|²`.
    pub detect_weight: f64,
    pub contribution: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PdetReport {
    pub pdet: f64,
    pub per_sector: Vec<SectorContribution>,
    pub bright_dim: usize,
    pub dark_dim: usize,
    pub excluded_sectors: Vec<usize>,
    pub method: Method,
    /// Norm² of the initial state outside the reduced space (symmetrized method only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub discarded_weight: Option<f64>,
}

/// The spectral formula
/// `P_det = Σ'_l |Σ_m ⟨ψ_d|E_lm⟩⟨E_lm|ψ_in⟩|² / Σ_m |⟨ψ_d|E_lm⟩|²`.
pub fn pdet_spectral(
    sd: &SpectralDecomposition,
    psi_d: &QuantumState,
    psi_in: &QuantumState,
) -> Result<PdetReport> {
    check_dim(sd.dim(), psi_d.dim())?;
    check_dim(sd.dim(), psi_in.dim())?;
    Ok(pdet_spectral_raw(
        sd,
        psi_d.vector(),
        psi_in.vector(),
        Method::Spectral,
    ))
}

pub(crate) fn pdet_spectral_raw(
    sd: &SpectralDecomposition,
    d: &DVector<C64>,
    psi: &DVector<C64>,
    method: Method,
) -> PdetReport {
    let mut per_sector = Vec::new();
    let mut excluded = Vec::new();
    let mut pdet = 0.0;
    for (l, s) in sd.sectors().iter().enumerate() {
        let cd = s.block.adjoint() * d;
        let denom = cd.norm_squared();
        if denom < DARK_THRESHOLD {
            excluded.push(l);
            continue;
        }
        let cin = s.block.adjoint() * psi;
        let num = cd.dotc(&cin).norm_sqr();
        let contribution = num / denom;
        pdet += contribution;
        per_sector.push(SectorContribution {
            sector: l,
            phase: s.phase,
            energies: s.energies.clone(),
            degeneracy: s.degeneracy(),
            detect_weight: denom,
            contribution,
        });
    }
    let bright_dim = per_sector.len();
    PdetReport {
        pdet,
        per_sector,
        bright_dim,
        dark_dim: sd.dim() - bright_dim,
        excluded_sectors: excluded,
        method,
        discarded_weight: None,
    }
}

/// Orthonormal basis of the dark space: the complement of the bright
/// eigenstates, built sector by sector so every vector is stationary.
pub fn dark_space_basis(
    sd: &SpectralDecomposition,
    psi_d: &QuantumState,
) -> Result<Vec<DVector<C64>>> {
    check_dim(sd.dim(), psi_d.dim())?;
    let mut out = Vec::new();
    for s in sd.sectors() {
        let g = s.degeneracy();
        let c = s.block.adjoint() * psi_d.vector();
        let mut local: Vec<DVector<C64>> = Vec::with_capacity(g);
        let bright = c.norm_squared() >= DARK_THRESHOLD;
        if bright {
            local.push(&c / C64::new(c.norm(), 0.0));
        }
        for k in 0..g {
            if local.len() == g {
                break;
            }
            let mut e = DVector::zeros(g);
            e[k] = C64::new(1.0, 0.0);
            orthonormal_push(&mut local, &e, 1e-8);
        }
        let skip = usize::from(bright);
        out.extend(local.into_iter().skip(skip).map(|v| &s.block * v));
    }
    Ok(out)
}

/// Orthonormal basis of `span{U(τ)^n ψ_d}` by Arnoldi iteration.
///
/// Off resonance this span equals the bright space; it is computed without
/// grouping eigenvalues into sectors.
pub fn krylov_bright_span(
    h: &HermitianMatrix,
    psi_d: &QuantumState,
    tau: f64,
) -> Result<Vec<DVector<C64>>> {
    check_dim(h.dim(), psi_d.dim())?;
    let es = diagonalize(h)?;
    krylov_from(&es.propagator(tau), psi_d.vector())
}

pub(crate) fn krylov_from(u: &DMatrix<C64>, d: &DVector<C64>) -> Result<Vec<DVector<C64>>> {
    let mut basis = vec![d / C64::new(d.norm(), 0.0)];
    while basis.len() < d.len() {
        let next = u * basis.last().unwrap();
        if !orthonormal_push(&mut basis, &next, KRYLOV_RANK_TOL) {
            break;
        }
    }
    Ok(basis)
}

/// Spectral route with sector folding at the setup's `τ`.
pub fn analyze_setup(s: &DetectionSetup) -> Result<PdetReport> {
    let es = diagonalize(&s.h)?;
    let sd = fold_sectors(&es, s.tau)?;
    pdet_spectral(&sd, &s.psi_d, &s.psi_in)
}
