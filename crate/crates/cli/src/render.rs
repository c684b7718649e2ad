//! Text and CSV renderings of the reports.

use std::fmt::Write as _;

use csv::Writer;

use crate::{AnalyzeBody, QuotientBody, ResonanceBody, SimulateBody, SpectrumBody};

pub trait Render {
    fn text(&self) -> String;
    fn csv(&self, w: &mut Writer<Vec<u8>>) -> csv::Result<()>;
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(|| "-".to_string(), |x| x.to_string())
}

fn frac<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(String::new, ToString::to_string)
}

impl Render for AnalyzeBody {
    fn text(&self) -> String {
        let mut s = String::new();
        for r in &self.reports {
            let _ = writeln!(
                s,
                "nodes {}  gamma {}  tau {}  detect {}",
                r.nodes,
                r.gamma,
                r.tau,
                r.detect
                    .map_or_else(|| "state".to_string(), |d| d.to_string())
            );
            let _ = writeln!(
                s,
                "automorphisms {}  stabilizer {}  bright {}  dark {}  saturates {}{}",
                opt(r.automorphism_order),
                opt(r.stabilizer_order),
                r.bright_dim,
                r.dark_dim,
                opt(r.saturation.map(|x| x.saturates)),
                if r.resonant { "  RESONANT" } else { "" }
            );
            let _ = writeln!(
                s,
                "{:>6} {:>12} {:>6} {:>4} {:>12} {:>6} {:>9}",
                "init", "pdet", "", "nu", "bound", "", "attained"
            );
            for row in &r.rows {
                let _ = writeln!(
                    s,
                    "{:>6} {:>12.9} {:>6} {:>4} {:>12} {:>6} {:>9}",
                    row.init
                        .map_or_else(|| "state".to_string(), |x| x.to_string()),
                    row.pdet,
                    frac(&row.pdet_fraction),
                    opt(row.nu),
                    row.upper_bound
                        .map_or_else(|| "-".to_string(), |b| format!("{b:.9}")),
                    frac(&row.upper_bound_fraction),
                    opt(row.attains_bound)
                );
            }
        }
        s
    }

    fn csv(&self, w: &mut Writer<Vec<u8>>) -> csv::Result<()> {
        w.write_record([
            "tau",
            "detect",
            "init",
            "pdet",
            "pdet_fraction",
            "nu",
            "upper_bound",
            "upper_bound_fraction",
            "attains_bound",
        ])?;
        for r in &self.reports {
            for row in &r.rows {
                w.write_record([
                    r.tau.to_string(),
                    frac(&r.detect),
                    frac(&row.init),
                    row.pdet.to_string(),
                    frac(&row.pdet_fraction),
                    frac(&row.nu),
                    frac(&row.upper_bound),
                    frac(&row.upper_bound_fraction),
                    frac(&row.attains_bound),
                ])?;
            }
        }
        Ok(())
    }
}

impl Render for SimulateBody {
    fn text(&self) -> String {
        let r = &self.report;
        let mut s = String::new();
        let _ = writeln!(
            s,
            "series {:.12} after {} attempts ({})",
            r.series.estimate,
            r.series.n_used,
            if r.series.converged {
                "converged"
            } else {
                "not converged"
            }
        );
        let _ = writeln!(
            s,
            "spectral {:.12}  difference {:.3e}",
            r.spectral, r.difference
        );
        let _ = writeln!(s, "{:>6} {:>22} {:>16}", "n", "F_n", "partial sum");
        for st in &r.steps {
            let _ = writeln!(s, "{:>6} {:>22.15e} {:>16.12}", st.n, st.f, st.partial_sum);
        }
        s
    }

    fn csv(&self, w: &mut Writer<Vec<u8>>) -> csv::Result<()> {
        w.write_record(["n", "f", "partial_sum"])?;
        for st in &self.report.steps {
            w.write_record([
                st.n.to_string(),
                st.f.to_string(),
                st.partial_sum.to_string(),
            ])?;
        }
        Ok(())
    }
}

impl Render for QuotientBody {
    fn text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{} nodes -> {} classes, detection class {}",
            self.original_dim, self.reduced_dim, self.detect_class
        );
        for c in &self.classes {
            let _ = writeln!(
                s,
                "  class {:>3}  nu {:>3}  members {:?}",
                c.id, c.nu, c.members
            );
        }
        let _ = writeln!(s, "symmetric spectrum:");
        for l in &self.levels {
            let _ = writeln!(s, "  {:>14.10}  x{}", l.energy, l.degeneracy);
        }
        if let (Some(g), Some(c)) = (&self.graph_file, &self.classes_file) {
            let _ = writeln!(s, "wrote {g} and {c}");
        }
        s
    }

    fn csv(&self, w: &mut Writer<Vec<u8>>) -> csv::Result<()> {
        w.write_record(["class", "nu", "members"])?;
        for c in &self.classes {
            let members: Vec<String> = c.members.iter().map(usize::to_string).collect();
            w.write_record([c.id.to_string(), c.nu.to_string(), members.join(" ")])?;
        }
        Ok(())
    }
}

impl Render for ResonanceBody {
    fn text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{} resonant periods in [{}, {}]",
            self.resonances.len(),
            self.tau_min,
            self.tau_max
        );
        for r in &self.resonances {
            let causes: Vec<String> = r
                .causes
                .iter()
                .map(|c| format!("{}<->{} (k={})", c.lower, c.upper, c.harmonic))
                .collect();
            let _ = writeln!(s, "  {:>14.10}  {}", r.tau, causes.join(", "));
        }
        s
    }

    fn csv(&self, w: &mut Writer<Vec<u8>>) -> csv::Result<()> {
        w.write_record(["tau", "lower", "upper", "harmonic"])?;
        for r in &self.resonances {
            for c in &r.causes {
                w.write_record([
                    r.tau.to_string(),
                    c.lower.to_string(),
                    c.upper.to_string(),
                    c.harmonic.to_string(),
                ])?;
            }
        }
        Ok(())
    }
}

impl Render for SpectrumBody {
    fn text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "levels:");
        for l in &self.levels {
            let _ = writeln!(s, "  {:>14.10}  x{}", l.energy, l.degeneracy);
        }
        let _ = writeln!(
            s,
            "sectors at tau {}{}:",
            self.tau,
            if self.resonant { " (resonant)" } else { "" }
        );
        for sec in &self.sectors {
            let _ = writeln!(s, "  phase {:>12.10}  x{}", sec.phase, sec.degeneracy);
        }
        for (a, b) in &self.near_degenerate {
            let _ = writeln!(s, "near-degenerate: {a} {b}");
        }
        s
    }

    fn csv(&self, w: &mut Writer<Vec<u8>>) -> csv::Result<()> {
        w.write_record(["energy", "degeneracy"])?;
        for l in &self.levels {
            w.write_record([l.energy.to_string(), l.degeneracy.to_string()])?;
        }
        Ok(())
    }
}
