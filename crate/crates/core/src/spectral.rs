//! Hermitian eigendecomposition, quasienergy sectors of `U(τ) = exp(-iτH)` and
//! resonant detection periods.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::state::{HermitianMatrix, C64};

/// Relative tolerance on eigenvalue gaps below which two eigenvalues form one level.
pub const DEGENERACY_TOL: f64 = 1e-8;
/// Relative gaps between `DEGENERACY_TOL` and this value are reported as near-degenerate.
pub const NEAR_DEGENERACY_WARN: f64 = 1e-6;
/// Absolute tolerance on eigenphase gaps below which two levels share a sector.
pub const PHASE_TOL: f64 = 1e-8;
/// Absolute tolerance on `|ΔE·τ - 2πk|` for the resonance test.
pub const RESONANCE_TOL: f64 = 1e-9;

const RESIDUAL_TOL: f64 = 1e-10;
const ORTHO_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug)]
pub struct SpectralOptions {
    pub max_dim: usize,
    pub max_iterations: usize,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        Self {
            max_dim: 512,
            max_iterations: 10_000,
        }
    }
}

/// Eigenvalues in ascending order with orthonormal eigenvectors as columns.
///
/// Each eigenvector is normalized so that its first component of modulus
/// above `1e-10` is real and positive.
#[derive(Clone, Debug)]
pub struct EigenSystem {
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<C64>,
}

/// A group of (numerically) equal eigenvalues.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Level {
    pub energy: f64,
    pub first: usize,
    pub degeneracy: usize,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<C64> {
        &self.eigenvectors
    }

    pub fn eigenvector(&self, k: usize) -> DVector<C64> {
        self.eigenvectors.column(k).into_owned()
    }

    fn scale(&self) -> f64 {
        self.eigenvalues
            .iter()
            .fold(1.0_f64, |acc, e| acc.max(e.abs()))
    }

    /// Distinct energy levels, grouping gaps below `DEGENERACY_TOL · max(1, max|E|)`.
    pub fn levels(&self) -> Vec<Level> {
        let tol = DEGENERACY_TOL * self.scale();
        let mut out: Vec<Level> = Vec::new();
        for (k, &e) in self.eigenvalues.iter().enumerate() {
            match out.last_mut() {
                Some(l) if e - self.eigenvalues[k - 1] <= tol => l.degeneracy += 1,
                _ => out.push(Level {
                    energy: e,
                    first: k,
                    degeneracy: 1,
                }),
            }
        }
        for l in &mut out {
            let s: f64 = self.eigenvalues[l.first..l.first + l.degeneracy]
                .iter()
                .sum();
            l.energy = s / l.degeneracy as f64;
        }
        out
    }

    /// Gaps between adjacent eigenvalues that were not merged into one level
    /// but are smaller than `NEAR_DEGENERACY_WARN` (relative).
    pub fn near_degenerate_gaps(&self) -> Vec<(f64, f64)> {
        let scale = self.scale();
        self.eigenvalues
            .windows(2)
            .filter(|w| {
                let gap = w[1] - w[0];
                gap > DEGENERACY_TOL * scale && gap <= NEAR_DEGENERACY_WARN * scale
            })
            .map(|w| (w[0], w[1]))
            .collect()
    }

    /// `exp(-iτH)` assembled from the eigenpairs.
    pub fn propagator(&self, tau: f64) -> DMatrix<C64> {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (k, &e) in self.eigenvalues.iter().enumerate() {
            let ph = C64::from_polar(1.0, -e * tau);
            for z in scaled.column_mut(k).iter_mut() {
                *z *= ph;
            }
        }
        &scaled * v.adjoint()
    }
}

/// Diagonalizes `h` with the default options.
pub fn diagonalize(h: &HermitianMatrix) -> Result<EigenSystem> {
    diagonalize_with(h, &SpectralOptions::default())
}

pub fn diagonalize_with(h: &HermitianMatrix, opts: &SpectralOptions) -> Result<EigenSystem> {
    let n = h.dim();
    if n > opts.max_dim {
        return Err(Error::DimensionCap {
            dim: n,
            cap: opts.max_dim,
        });
    }
    let name = format!("{n}x{n} Hamiltonian");
    let eig = SymmetricEigen::try_new(h.matrix().clone(), f64::EPSILON, opts.max_iterations)
        .ok_or_else(|| Error::NonConvergence {
            name: name.clone(),
            residual: f64::NAN,
        })?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let mut values = Vec::with_capacity(n);
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        values.push(eig.eigenvalues[src]);
        let mut col = eig.eigenvectors.column(src).into_owned();
        let nrm = col.norm();
        col /= C64::new(nrm, 0.0);
        if let Some(z) = col.iter().find(|z| z.norm() > 1e-10).copied() {
            let fix = z.conj() / z.norm();
            col *= fix;
        }
        vectors.set_column(dst, &col);
    }
    let es = EigenSystem {
        eigenvalues: values,
        eigenvectors: vectors,
    };

    let scale = h.norm();
    let residual = max_residual(h, &es);
    if residual.is_nan() || residual > RESIDUAL_TOL * scale {
        return Err(Error::NonConvergence { name, residual });
    }
    let gram = es.eigenvectors.adjoint() * &es.eigenvectors;
    let ortho = (gram - DMatrix::identity(n, n))
        .iter()
        .fold(0.0_f64, |acc, z| acc.max(z.norm()));
    if ortho.is_nan() || ortho > ORTHO_TOL {
        return Err(Error::NonConvergence {
            name: format!("{name} (orthonormality)"),
            residual: ortho,
        });
    }
    Ok(es)
}

/// `max_k ‖H v_k - E_k v_k‖`.
pub fn max_residual(h: &HermitianMatrix, es: &EigenSystem) -> f64 {
    let hv = h.matrix() * es.eigenvectors();
    (0..es.dim())
        .map(|k| {
            let r = hv.column(k) - es.eigenvectors().column(k) * C64::new(es.eigenvalues[k], 0.0);
            r.norm()
        })
        .fold(0.0, f64::max)
}

/// One eigenphase `λ` of `U(τ)` with its eigenvector block.
#[derive(Clone, Debug)]
pub struct Sector {
    pub phase: f64,
    /// Distinct energy levels folded onto this phase.
    pub energies: Vec<f64>,
    /// Columns of the parent eigensystem spanning the sector.
    pub columns: Vec<usize>,
    pub block: DMatrix<C64>,
}

impl Sector {
    pub fn degeneracy(&self) -> usize {
        self.columns.len()
    }

    /// `P_l v`.
    pub fn project(&self, v: &DVector<C64>) -> DVector<C64> {
        &self.block * (self.block.adjoint() * v)
    }

    pub fn projector(&self) -> DMatrix<C64> {
        &self.block * self.block.adjoint()
    }
}

/// Sectors of `U(τ) = Σ_l e^{-iλ_l} P_l`, ordered by lowest member energy.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    dim: usize,
    tau: f64,
    sectors: Vec<Sector>,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn sectors(&self) -> &[Sector] {
        &self.sectors
    }

    /// `Σ_l e^{-iλ_l} P_l`.
    pub fn evolution_operator(&self) -> DMatrix<C64> {
        let mut u = DMatrix::zeros(self.dim, self.dim);
        for s in &self.sectors {
            u += s.projector() * C64::from_polar(1.0, -s.phase);
        }
        u
    }
}

fn wrap_phase(x: f64) -> f64 {
    let p = x.rem_euclid(TAU);
    if p >= TAU {
        0.0
    } else {
        p
    }
}

/// Circular distance between two phases.
fn phase_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// Groups the levels of `es` into eigenphase sectors of `U(tau)`.
///
/// Levels whose phases `E·τ mod 2π` agree within [`PHASE_TOL`] (also across
/// the 0/2π seam) are merged.
pub fn fold_sectors(es: &EigenSystem, tau: f64) -> Result<SpectralDecomposition> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::InvalidPeriod(tau));
    }
    let levels = es.levels();
    let phases: Vec<f64> = levels.iter().map(|l| wrap_phase(l.energy * tau)).collect();

    let mut by_phase: Vec<usize> = (0..levels.len()).collect();
    by_phase.sort_by(|&a, &b| phases[a].total_cmp(&phases[b]).then(a.cmp(&b)));

    // Clusters of consecutive phases, then the seam between the last and first.
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for (pos, &l) in by_phase.iter().enumerate() {
        match clusters.last_mut() {
            Some(c) if pos > 0 && phases[l] - phases[by_phase[pos - 1]] <= PHASE_TOL => c.push(l),
            _ => clusters.push(vec![l]),
        }
    }
    if clusters.len() > 1 {
        let first = phases[by_phase[0]];
        let last = phases[*by_phase.last().unwrap()];
        if phase_distance(first, last) <= PHASE_TOL {
            let tail = clusters.pop().unwrap();
            clusters[0].extend(tail);
        }
    }

    let mut sectors: Vec<Sector> = clusters
        .into_iter()
        .map(|mut members| {
            members.sort_unstable();
            let phase = phases[members[0]];
            let columns: Vec<usize> = members
                .iter()
                .flat_map(|&l| levels[l].first..levels[l].first + levels[l].degeneracy)
                .collect();
            let mut block = DMatrix::zeros(es.dim(), columns.len());
            for (c, &k) in columns.iter().enumerate() {
                block.set_column(c, &es.eigenvectors().column(k));
            }
            Sector {
                phase,
                energies: members.iter().map(|&l| levels[l].energy).collect(),
                columns,
                block,
            }
        })
        .collect();
    sectors.sort_by_key(|s| s.columns[0]);
    Ok(SpectralDecomposition {
        dim: es.dim(),
        tau,
        sectors,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResonanceCause {
    pub lower: f64,
    pub upper: f64,
    /// `k` in `τ_c·|ΔE| = 2πk`.
    pub harmonic: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Resonance {
    pub tau: f64,
    pub causes: Vec<ResonanceCause>,
}

/// All resonant periods `τ_c = 2πk/|E_l - E_l'| ≤ tau_max`, ascending, with
/// coinciding periods (relative `1e-9`) merged.
pub fn resonant_periods(es: &EigenSystem, tau_max: f64) -> Vec<Resonance> {
    let levels = es.levels();
    let mut raw: Vec<(f64, ResonanceCause)> = Vec::new();
    for (a, la) in levels.iter().enumerate() {
        for lb in &levels[a + 1..] {
            let gap = lb.energy - la.energy;
            let mut k = 1u64;
            loop {
                let t = TAU * k as f64 / gap;
                if t > tau_max {
                    break;
                }
                raw.push((
                    t,
                    ResonanceCause {
                        lower: la.energy,
                        upper: lb.energy,
                        harmonic: k,
                    },
                ));
                k += 1;
            }
        }
    }
    raw.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<Resonance> = Vec::new();
    for (t, cause) in raw {
        match out.last_mut() {
            Some(r) if (t - r.tau).abs() <= 1e-9 * r.tau.max(1.0) => r.causes.push(cause),
            _ => out.push(Resonance {
                tau: t,
                causes: vec![cause],
            }),
        }
    }
    out
}

/// True if two distinct levels satisfy `|ΔE·τ - 2πk| < RESONANCE_TOL` for some `k ≥ 1`.
pub fn is_resonant(es: &EigenSystem, tau: f64) -> bool {
    let levels = es.levels();
    levels.iter().enumerate().any(|(a, la)| {
        levels[a + 1..].iter().any(|lb| {
            let x = (lb.energy - la.energy) * tau;
            let k = (x / TAU).round();
            k >= 1.0 && (x - TAU * k).abs() < RESONANCE_TOL
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_named, hamiltonian};

    fn ham(spec: &str) -> HermitianMatrix {
        hamiltonian(&build_named(spec).unwrap(), 1.0)
    }

    /// Scaling-and-squaring Taylor exponential of `-iτH`.
    fn expm_oracle(h: &HermitianMatrix, tau: f64) -> DMatrix<C64> {
        let n = h.dim();
        let a = h.matrix() * C64::new(0.0, -tau);
        let norm = a.iter().map(|z| z.norm()).sum::<f64>();
        let s = (norm.max(1.0)).log2().ceil() as i32 + 4;
        let a = a / C64::new(2f64.powi(s), 0.0);
        let mut term = DMatrix::<C64>::identity(n, n);
        let mut sum = term.clone();
        for k in 1..30 {
            term = &term * &a / C64::new(k as f64, 0.0);
            sum += &term;
        }
        for _ in 0..s {
            sum = &sum * &sum;
        }
        sum
    }

    fn max_abs(m: &DMatrix<C64>) -> f64 {
        m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
    }

    #[test]
    fn two_by_two() {
        let es = diagonalize(&ham("complete:2")).unwrap();
        assert!((es.eigenvalues()[0] + 1.0).abs() < 1e-14);
        assert!((es.eigenvalues()[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn ring6_matches_cosine_law() {
        let es = diagonalize(&ham("ring:6")).unwrap();
        let mut oracle: Vec<f64> = (0..6)
            .map(|k| -2.0 * (TAU * k as f64 / 6.0).cos())
            .collect();
        oracle.sort_by(f64::total_cmp);
        for (a, b) in es.eigenvalues().iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
        let degs: Vec<usize> = es.levels().iter().map(|l| l.degeneracy).collect();
        assert_eq!(degs, vec![1, 2, 2, 1]);
    }

    #[test]
    fn tree2_levels() {
        let es = diagonalize(&ham("tree:2")).unwrap();
        let s2 = 2f64.sqrt();
        let expect = [(-2.0, 1), (-s2, 1), (0.0, 3), (s2, 1), (2.0, 1)];
        let levels = es.levels();
        assert_eq!(levels.len(), expect.len());
        for (l, (e, g)) in levels.iter().zip(expect) {
            assert!((l.energy - e).abs() < 1e-12);
            assert_eq!(l.degeneracy, g);
        }
    }

    #[test]
    fn sign_convention_and_residuals() {
        let h = ham("lattice:4x4");
        let es = diagonalize(&h).unwrap();
        assert!(max_residual(&h, &es) < 1e-12);
        for k in 0..es.dim() {
            let v = es.eigenvector(k);
            let z = v.iter().find(|z| z.norm() > 1e-10).unwrap();
            assert!(z.re > 0.0 && z.im.abs() < 1e-15);
        }
        let again = diagonalize(&h).unwrap();
        assert_eq!(es.eigenvalues(), again.eigenvalues());
        assert_eq!(es.eigenvectors(), again.eigenvectors());
    }

    #[test]
    fn dimension_cap() {
        let h = ham("ring:8");
        let opts = SpectralOptions {
            max_dim: 4,
            ..Default::default()
        };
        assert!(matches!(
            diagonalize_with(&h, &opts),
            Err(Error::DimensionCap { dim: 8, cap: 4 })
        ));
    }

    #[test]
    fn ring6_sectors_at_unit_period() {
        let es = diagonalize(&ham("ring:6")).unwrap();
        let sd = fold_sectors(&es, 1.0).unwrap();
        let sizes: Vec<usize> = sd.sectors().iter().map(Sector::degeneracy).collect();
        assert_eq!(sizes, vec![1, 2, 2, 1]);
        // direct phase computation
        for s in sd.sectors() {
            assert!((s.phase - wrap_phase(s.energies[0])).abs() < 1e-15);
        }
    }

    #[test]
    fn ring6_full_revival_at_two_pi() {
        let h = ham("ring:6");
        let es = diagonalize(&h).unwrap();
        let sd = fold_sectors(&es, TAU).unwrap();
        assert_eq!(sd.sectors().len(), 1);
        assert_eq!(sd.sectors()[0].degeneracy(), 6);
        let u = expm_oracle(&h, TAU);
        assert!(max_abs(&(u - DMatrix::identity(6, 6))) < 1e-8);
    }

    #[test]
    fn ring6_quarter_pi_is_not_a_revival() {
        let h = ham("ring:6");
        let es = diagonalize(&h).unwrap();
        let sd = fold_sectors(&es, std::f64::consts::FRAC_PI_2).unwrap();
        assert!(sd.sectors().len() > 1);
        let u = expm_oracle(&h, std::f64::consts::FRAC_PI_2);
        assert!(max_abs(&(u - DMatrix::identity(6, 6))) > 0.5);
    }

    #[test]
    fn completeness_and_unitarity() {
        for spec in ["tree:2", "ring:6", "hypercube:3", "square_center"] {
            let h = ham(spec);
            let es = diagonalize(&h).unwrap();
            for tau in [0.7, 1.3] {
                let sd = fold_sectors(&es, tau).unwrap();
                let n = h.dim();
                let mut sum = DMatrix::zeros(n, n);
                for s in sd.sectors() {
                    sum += s.projector();
                }
                assert!(max_abs(&(sum - DMatrix::identity(n, n))) < 1e-10);
                let u = sd.evolution_operator();
                assert!(max_abs(&(u.adjoint() * &u - DMatrix::identity(n, n))) < 1e-10);
                assert!(max_abs(&(&u - expm_oracle(&h, tau))) < 1e-8, "{spec} {tau}");
                assert!(max_abs(&(es.propagator(tau) - expm_oracle(&h, tau))) < 1e-10);
            }
        }
    }

    #[test]
    fn seam_merge() {
        // Energies 0 and 2π/τ - tiny fold to phases 0 and 2π - tiny.
        let tau = 1.0;
        let e = TAU - 1e-10;
        let mut m = DMatrix::zeros(2, 2);
        m[(1, 1)] = e;
        let es = diagonalize(&HermitianMatrix::from_real(&m).unwrap()).unwrap();
        let sd = fold_sectors(&es, tau).unwrap();
        assert_eq!(sd.sectors().len(), 1);
    }

    #[test]
    fn sector_count_is_tau_independent_off_resonance() {
        let es = diagonalize(&ham("tree:2")).unwrap();
        let a = fold_sectors(&es, 0.7).unwrap();
        let b = fold_sectors(&es, 1.9).unwrap();
        let da: Vec<usize> = a.sectors().iter().map(Sector::degeneracy).collect();
        let db: Vec<usize> = b.sectors().iter().map(Sector::degeneracy).collect();
        assert_eq!(da, db);
        assert_eq!(da.len(), es.levels().len());
    }

    #[test]
    fn invalid_period() {
        let es = diagonalize(&ham("ring:6")).unwrap();
        assert!(fold_sectors(&es, 0.0).is_err());
        assert!(fold_sectors(&es, f64::NAN).is_err());
    }

    #[test]
    fn ring6_resonances_match_pair_enumeration() {
        let es = diagonalize(&ham("ring:6")).unwrap();
        let res = resonant_periods(&es, 7.0);
        // brute force over level pairs of {-2,-1,1,2}
        let energies = [-2.0, -1.0, 1.0, 2.0];
        let mut oracle: Vec<f64> = Vec::new();
        for a in 0..4 {
            for b in a + 1..4 {
                let gap: f64 = energies[b] - energies[a];
                for k in 1..100 {
                    let t = TAU * k as f64 / gap;
                    if t <= 7.0 {
                        oracle.push(t);
                    }
                }
            }
        }
        oracle.sort_by(f64::total_cmp);
        oracle.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        let got: Vec<f64> = res.iter().map(|r| r.tau).collect();
        assert_eq!(got.len(), oracle.len());
        for (g, o) in got.iter().zip(&oracle) {
            assert!((g - o).abs() < 1e-12);
        }
        for gap in [4.0, 3.0, 2.0, 1.0] {
            assert!(got.iter().any(|t| (t - TAU / gap).abs() < 1e-12));
        }
        assert!(got.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn single_level_has_no_resonances() {
        let h = HermitianMatrix::from_real(&DMatrix::from_element(1, 1, 0.0)).unwrap();
        let es = diagonalize(&h).unwrap();
        assert!(resonant_periods(&es, 100.0).is_empty());
        assert!(!is_resonant(&es, TAU));
    }

    #[test]
    fn irrational_gap_families_do_not_coincide() {
        let s2 = 2f64.sqrt();
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![0.0, 1.0, 1.0 + s2]));
        let es = diagonalize(&HermitianMatrix::from_real(&m).unwrap()).unwrap();
        let res = resonant_periods(&es, TAU);
        // gaps 1, √2, 1+√2 -> k with 2πk/gap ≤ 2π: gap 1: k=1; √2: k=1; 1+√2: k=1,2
        let mut oracle = vec![TAU, TAU / s2, TAU / (1.0 + s2), 2.0 * TAU / (1.0 + s2)];
        oracle.sort_by(f64::total_cmp);
        assert_eq!(res.len(), oracle.len());
        for (r, o) in res.iter().zip(&oracle) {
            assert!((r.tau - o).abs() < 1e-12);
            assert_eq!(r.causes.len(), 1);
        }
    }

    #[test]
    fn resonance_flags() {
        let es = diagonalize(&ham("ring:6")).unwrap();
        assert!(is_resonant(&es, std::f64::consts::PI));
        assert!(is_resonant(&es, TAU));
        assert!(!is_resonant(&es, 1.0));
        assert!(!is_resonant(&es, 1e-12));
        let first = resonant_periods(&es, 10.0)[0].tau;
        assert!(!is_resonant(&es, 0.5 * first));
    }
}
