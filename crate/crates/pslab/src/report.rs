//! Reproduction report: every published number the toolkit reproduces,
//! one row each, with its computed value, relative deviation and verdict.
//!
//! Two rows are permanently `flagged` rather than passed — the structure
//! radius and the chamber unit count — where the source arithmetic is
//! internally inconsistent. Flags keep the exit code green while refusing
//! to silently reconcile the numbers.

use crate::anomaly::{relative_deviation, sigma_discrepancy, Dataset};
use crate::config::Config;
use crate::field;
use crate::ps;
use crate::units::{CM, CM_PER_S2, NANOSECOND, PER_MICROSECOND, VOLT_PER_CM};
use crate::vsm;
use crate::walk;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum RowStatus {
    Pass,
    Fail,
    Flagged,
}

impl RowStatus {
    pub fn name(self) -> &'static str {
        match self {
            RowStatus::Pass => "pass",
            RowStatus::Fail => "FAIL",
            RowStatus::Flagged => "flagged",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ReproductionRow {
    /// stable machine key
    pub key: &'static str,
    pub title: &'static str,
    pub computed: f64,
    pub paper_value: f64,
    pub units: &'static str,
    pub rel_dev: f64,
    pub tolerance: f64,
    pub status: RowStatus,
    pub note: Option<String>,
}

fn tolerance_row(
    key: &'static str,
    title: &'static str,
    computed: f64,
    paper_value: f64,
    units: &'static str,
    tolerance: f64,
    note: Option<String>,
) -> ReproductionRow {
    let rel_dev = computed / paper_value - 1.0;
    let status = if rel_dev.abs() <= tolerance {
        RowStatus::Pass
    } else {
        RowStatus::Fail
    };
    ReproductionRow {
        key,
        title,
        computed,
        paper_value,
        units,
        rel_dev,
        tolerance,
        status,
        note,
    }
}

/// A documented internal inconsistency: never passes, flags while the
/// computed value stays inside its band, fails outside it.
fn flagged_row(
    key: &'static str,
    title: &'static str,
    computed: f64,
    paper_value: f64,
    units: &'static str,
    band: (f64, f64),
    note: String,
) -> ReproductionRow {
    let rel_dev = computed / paper_value - 1.0;
    let status = if computed >= band.0 && computed <= band.1 {
        RowStatus::Flagged
    } else {
        RowStatus::Fail
    };
    let tolerance = (band.1 - band.0) / (band.0 + band.1);
    ReproductionRow {
        key,
        title,
        computed,
        paper_value,
        units,
        rel_dev,
        tolerance,
        status,
        note: Some(note),
    }
}

#[derive(Clone, Debug)]
pub struct Report {
    pub rows: Vec<ReproductionRow>,
}

impl Report {
    pub fn generate(cfg: &Config) -> Report {
        let c = cfg.constants();
        let mut rows = Vec::new();

        // Ground-state level physics.
        let w_ev = c.to_ev(ps::binding_energy(&c)).unwrap();
        rows.push(tolerance_row(
            "binding_energy_ev",
            "Ps binding energy W",
            w_ev,
            6.8,
            "eV",
            2e-3,
            None,
        ));
        let dw_ev = c.to_ev(ps::hyperfine_splitting(&c)).unwrap();
        rows.push(tolerance_row(
            "hyperfine_splitting_ev",
            "hyperfine splitting dW",
            dw_ev,
            8.4e-4,
            "eV",
            0.01,
            None,
        ));
        let sf_ev = c.to_ev(ps::superfine_shift(&c)).unwrap();
        rows.push(tolerance_row(
            "superfine_shift_ev",
            "superfine (annihilation) shift",
            sf_ev,
            3.6e-4,
            "eV",
            0.01,
            None,
        ));
        let x1 = ps::zeeman_x(&c, 1.0).expect("B=1 kG");
        rows.push(tolerance_row(
            "zeeman_x_per_kg",
            "Zeeman mixing coefficient",
            x1,
            2.75e-2,
            "1/kG",
            0.01,
            None,
        ));
        let shift_ev = c
            .to_ev(ps::sublevel_shift(&c, cfg.b_kg).expect("field >= 0"))
            .unwrap();
        rows.push(tolerance_row(
            "sublevel_shift_ev",
            "m=0 sub-level shift",
            shift_ev,
            1.25e-6,
            "eV",
            0.6,
            Some(format!(
                "band [0.5,2]e-6 around printed ~1e-6, at B={} kG",
                cfg.b_kg
            )),
        ));

        // Anomaly statistics.
        let ds = Dataset::builtin();
        let modern = ds.modern().expect("builtin");
        let lambda_modern = modern.value().expect("has value");
        let f2g = ps::two_gamma_fraction_m0(
            &c,
            cfg.b_kg,
            PER_MICROSECOND.quantity(lambda_modern),
            PER_MICROSECOND.quantity(cfg.lambda_s_per_us),
        )
        .expect("positive rates");
        rows.push(tolerance_row(
            "two_gamma_fraction",
            "quenched 2-gamma share (m=0)",
            f2g,
            0.64,
            "",
            0.02 / 0.64,
            Some(format!("complement {:.3} vs quoted 36%", 1.0 - f2g)),
        ));
        let theory = ds.infer_theory_rate().expect("builtin dataset consistent");
        let theory_m = theory.as_measurement();
        let gas = ds.gas().expect("builtin");
        let vacuum = ds.vacuum().expect("builtin");
        rows.push(tolerance_row(
            "sigma_gas",
            "gas rate vs theory",
            sigma_discrepancy(gas, &theory_m).expect("errors nonzero"),
            9.4,
            "sigma",
            0.3 / 9.4,
            None,
        ));
        rows.push(tolerance_row(
            "sigma_vacuum",
            "vacuum rate vs theory",
            sigma_discrepancy(vacuum, &theory_m).expect("errors nonzero"),
            6.2,
            "sigma",
            0.3 / 6.2,
            None,
        ));
        rows.push(tolerance_row(
            "rel_dev_gas_pct",
            "gas excess over theory",
            relative_deviation(gas, &theory_m).expect("values") * 100.0,
            0.19,
            "%",
            0.01 / 0.19,
            None,
        ));
        rows.push(tolerance_row(
            "rel_dev_vacuum_pct",
            "vacuum excess over theory",
            relative_deviation(vacuum, &theory_m).expect("values") * 100.0,
            0.14,
            "%",
            0.01 / 0.14,
            None,
        ));
        rows.push(tolerance_row(
            "theory_rate_consistency",
            "2003 rate vs inferred theory",
            lambda_modern,
            theory.rate,
            "1/us",
            5e-4,
            Some(format!(
                "inferred-theory spread {:.2e} 1/us; quoted combined precision 180 ppm",
                theory.spread
            )),
        ));

        // Structure chain.
        let delta = vsm::fundamental_length(&c);
        rows.push(tolerance_row(
            "fundamental_length_cm",
            "fundamental length Delta",
            delta.in_unit(&CM).unwrap(),
            5.5e-2,
            "cm",
            0.02,
            None,
        ));
        let n3 = vsm::cells_count(&c);
        rows.push(tolerance_row(
            "cells_count",
            "structure cell count N^3",
            n3,
            1.302e19,
            "",
            5e-3,
            None,
        ));
        let (r_mu, tau_mu) = vsm::structure_radius(&c);
        rows.push(flagged_row(
            "structure_radius_cm",
            "structure radius R_mu",
            r_mu.in_unit(&CM).unwrap(),
            5.57e4,
            "cm",
            (5.5e4, 5.9e4),
            "direct evaluation gives 5.86e4 cm vs printed 5.57e4 cm; both reported, not reconciled"
                .to_string(),
        ));
        rows.push(tolerance_row(
            "tau_mu_s",
            "structure time constant tau_mu",
            tau_mu.magnitude(),
            2e-6,
            "s",
            0.05,
            None,
        ));
        let (m_mu, m_pl, ratio_dev) = vsm::fundamental_mass(&c);
        rows.push(tolerance_row(
            "fundamental_mass_g",
            "fundamental mass M_mu",
            m_mu.magnitude(),
            2.179e-5,
            "g",
            3e-3,
            None,
        ));
        rows.push(tolerance_row(
            "planck_mass_g",
            "Planck mass",
            m_pl.magnitude(),
            2.177e-5,
            "g",
            3e-3,
            None,
        ));
        rows.push(tolerance_row(
            "mass_ratio_dev",
            "|M_mu/M_Pl - 1|",
            ratio_dev,
            1.5e-3,
            "",
            1.0,
            Some("bound <= 3e-3; printed accuracy ~0.1%".to_string()),
        ));
        let m_gold = c.to_ev(vsm::goldstone_mass(&c)).unwrap();
        rows.push(tolerance_row(
            "goldstone_mass_ev",
            "residual zero-mode mass",
            m_gold,
            2e-10,
            "eV",
            0.5,
            Some("order band [1,3]e-10 around printed ~2e-10".to_string()),
        ));
        let (_, diameter) = vsm::nucleus_params(&c, cfg.n_bar);
        rows.push(tolerance_row(
            "nucleus_diameter_cm",
            "nucleus diameter 2r",
            diameter.in_unit(&CM).unwrap(),
            2.6,
            "cm",
            0.05,
            None,
        ));

        // Lattice-walk lifetime bracket, at the quoted cell side.
        let delta_walk = CM.quantity(cfg.walk_delta_cm);
        let (t_min, t_max) = walk::lifetime_bounds(cfg.n_bar, delta_walk, &c);
        let t_min_ns = t_min.in_unit(&NANOSECOND).unwrap();
        let t_max_ns = t_max.in_unit(&NANOSECOND).unwrap();
        rows.push(tolerance_row(
            "walk_t_min_ns",
            "traversal time, all edges",
            t_min_ns,
            96.9,
            "ns",
            0.01,
            None,
        ));
        rows.push(tolerance_row(
            "walk_t_max_ns",
            "traversal time, all body diagonals",
            t_max_ns,
            167.8,
            "ns",
            0.01,
            None,
        ));
        let lifetime_ns = 1e3 / lambda_modern;
        rows.push(tolerance_row(
            "lifetime_in_bracket_ns",
            "1/lambda_T inside the bracket",
            lifetime_ns,
            142.0,
            "ns",
            0.01,
            Some(format!(
                "{t_min_ns:.2} < {lifetime_ns:.2} < {t_max_ns:.2} ns"
            )),
        ));

        // Field suppression.
        let lambda_p = field::proton_compton(&c);
        rows.push(tolerance_row(
            "proton_compton_cm",
            "proton Compton length",
            lambda_p.in_unit(&CM).unwrap(),
            2e-14,
            "cm",
            0.06,
            None,
        ));
        let lifetime = PER_MICROSECOND.quantity(lambda_modern).recip();
        let gamma_cr = field::critical_acceleration(lambda_p, lifetime);
        rows.push(tolerance_row(
            "gamma_cr_cm_s2",
            "critical acceleration (Compton)",
            gamma_cr.in_unit(&CM_PER_S2).unwrap(),
            1.0,
            "cm/s^2",
            0.05,
            None,
        ));
        let gamma_nuclear = field::critical_acceleration(CM.quantity(2.5e-13), lifetime);
        rows.push(tolerance_row(
            "gamma_cr_nuclear_cm_s2",
            "critical acceleration (nuclear range)",
            gamma_nuclear.in_unit(&CM_PER_S2).unwrap(),
            11.5,
            "cm/s^2",
            3.5 / 11.5,
            Some("band [8,15] around printed ~10".to_string()),
        ));
        let chamber = field::ChamberConfig {
            side: CM.quantity(cfg.chamber_side_cm),
            efield: VOLT_PER_CM.quantity(4e3),
            alpha: 0.0,
            g: CM_PER_S2.quantity(cfg.g_cm_s2),
        };
        let n_units = field::units_in_chamber(&chamber, delta_walk);
        rows.push(flagged_row(
            "chamber_units",
            "cells in the chamber volume",
            n_units,
            1.7e4,
            "",
            (1.8e4, 2.2e4),
            "side^3/Delta^3 gives 2.0e4 vs printed 1.7e4; both reported, not reconciled"
                .to_string(),
        ));
        let e_cr = field::critical_field(
            &c,
            0.0,
            gamma_cr,
            cfg.n_bar,
            vsm::stoney_mass(&c),
            CM_PER_S2.quantity(cfg.g_cm_s2),
        )
        .expect("criterion valid at alpha=0");
        rows.push(tolerance_row(
            "critical_field_v_cm",
            "suppression field E_cr(0)",
            e_cr.in_unit(&VOLT_PER_CM).unwrap(),
            1.1e4,
            "V/cm",
            4.0 / 11.0,
            Some("band [0.7,1.5]e4 around printed ~1e4".to_string()),
        ));
        let beam = field::BeamConfig::standard(&c);
        let e_required = field::required_field(&c, &beam, CM.quantity(0.75));
        rows.push(tolerance_row(
            "deflection_field_v_cm",
            "field deflecting the beam 0.75 cm",
            e_required.in_unit(&VOLT_PER_CM).unwrap(),
            3.65e3,
            "V/cm",
            0.35 / 3.65,
            Some("band [3.3,4.0]e3 under printed bound <4e3".to_string()),
        ));

        Report { rows }
    }

    pub fn n_failed(&self) -> usize {
        self.rows
            .iter()
            .filter(|r| r.status == RowStatus::Fail)
            .count()
    }

    pub fn n_flagged(&self) -> usize {
        self.rows
            .iter()
            .filter(|r| r.status == RowStatus::Flagged)
            .count()
    }

    /// 0 when nothing failed (flags allowed), 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.n_failed() == 0 {
            0
        } else {
            1
        }
    }

    /// Aligned human-readable table; byte-deterministic for a given config.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str("orthopositronium reproduction report\n");
        out.push_str(&format!(
            "{:<26} {:>13} {:>13} {:>10} {:>8}  {}\n",
            "name", "computed", "published", "dev", "tol", "status"
        ));
        for r in &self.rows {
            out.push_str(&format!(
                "{:<26} {:>13.6e} {:>13.6e} {:>9.3}% {:>8.3}  {}{}\n",
                r.key,
                r.computed,
                r.paper_value,
                100.0 * r.rel_dev,
                r.tolerance,
                r.status.name(),
                if r.units.is_empty() {
                    String::new()
                } else {
                    format!("  [{}]", r.units)
                },
            ));
        }
        out.push_str(&format!(
            "rows: {} pass, {} flagged, {} failed\n",
            self.rows.len() - self.n_failed() - self.n_flagged(),
            self.n_flagged(),
            self.n_failed()
        ));
        for r in &self.rows {
            if let Some(note) = &r.note {
                out.push_str(&format!("note [{}]: {}\n", r.key, note));
            }
        }
        out
    }

    /// Line-delimited `name computed paper rel_dev tol status`.
    pub fn render_machine(&self) -> String {
        let mut out = String::new();
        for r in &self.rows {
            out.push_str(&format!(
                "{} {:.10e} {:.10e} {:.10e} {:.10e} {}\n",
                r.key,
                r.computed,
                r.paper_value,
                r.rel_dev,
                r.tolerance,
                r.status.name()
            ));
        }
        out
    }
}
