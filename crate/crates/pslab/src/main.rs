use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pslab::anomaly::{relative_deviation, sigma_discrepancy, Dataset, IsotopeAnomalyRecord};
use pslab::config::Config;
use pslab::field;
use pslab::ps;
use pslab::report::Report;
use pslab::spectrum::{
    extra_mode_detectability, fit_spectrum, synthesize, thermalization_bias_study, FitComponent,
    FitTemplate, LifetimeSpectrum, Param, RateModel, SpectrumModel,
};
use pslab::units::{CM, CM_PER_S2, GRAM, PER_MICROSECOND, VOLT_PER_CM};
use pslab::vsm;
use pslab::walk::{self, LatticeRegion, Policy};

#[derive(Parser)]
#[command(
    name = "pslab",
    version,
    about = "Orthopositronium annihilation toolkit"
)]
struct Cli {
    /// Configuration file: key=value lines, '#' comments
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Base random seed (overrides the config value)
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Machine-readable line output where supported
    #[arg(long, global = true)]
    machine: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reproduction report against the published values
    Report,
    /// Ground-state levels and magnetic mixing
    Ps {
        /// Field in kG; without it both 2.85 and 3.5 kG are reported
        #[arg(long = "field-kG", value_name = "X")]
        field_kg: Option<f64>,
    },
    /// Decay-rate dataset and discrepancy statistics
    Anomaly,
    /// Structure-chain parameters
    Vsm,
    /// Lattice-walk trials over a spherical region
    Walk {
        #[arg(long, value_name = "R")]
        radius: f64,
        #[arg(long, default_value_t = 1000, value_name = "N")]
        trials: usize,
        /// uniform | greedy | edge | diagonal
        #[arg(long, value_name = "P")]
        policy: Option<String>,
        /// Run the backtracking path search instead of stochastic trials
        #[arg(long)]
        exact: bool,
    },
    /// Field-suppression assessment
    Suppress {
        /// Field strength, V/cm
        #[arg(long, value_name = "V")]
        efield: f64,
        /// Angle between the field and gravity, degrees
        #[arg(long, default_value_t = 0.0, value_name = "DEG")]
        alpha: f64,
        /// Emit a grid of (E, alpha) records instead of one assessment
        #[arg(long)]
        sweep: bool,
    },
    /// Lifetime-spectrum synthesis, fitting and studies
    Spectrum {
        #[command(subcommand)]
        cmd: SpectrumCmd,
    },
}

#[derive(Subcommand)]
enum SpectrumCmd {
    /// Generate a spectrum file
    Simulate {
        #[arg(long, default_value_t = 100_000)]
        events: u64,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        /// o-Ps rate, 1/us
        #[arg(long, default_value_t = 7.0404)]
        lambda: f64,
        /// Add a p-Ps-like fast component (25% intensity, 7990.9 1/us)
        #[arg(long)]
        two_component: bool,
        #[arg(long, default_value_t = 0.0)]
        sigma_ns: f64,
        #[arg(long, default_value_t = 0.0)]
        background: f64,
        #[arg(long, default_value_t = 0.0)]
        t0_ns: f64,
        #[arg(long, default_value_t = 1420.0)]
        t1_ns: f64,
        #[arg(long, default_value_t = 2.0)]
        bin_ns: f64,
    },
    /// Fit a spectrum file with a 1- or 2-exponential template
    Fit {
        #[arg(long, value_name = "FILE")]
        input: PathBuf,
        #[arg(long, default_value_t = 1)]
        components: usize,
        #[arg(long, default_value_t = 0.0)]
        sigma_ns: f64,
        /// Initial rate guess, 1/us
        #[arg(long, default_value_t = 7.5)]
        init_rate: f64,
        /// Initial second rate guess, 1/us (two-component fits)
        #[arg(long, default_value_t = 6000.0)]
        init_rate2: f64,
        /// Fit a flat background level too
        #[arg(long)]
        fit_background: bool,
    },
    /// Thermalization-bias study: constant fit against a relaxing truth
    Bias {
        #[arg(long, default_value_t = 7.0404)]
        lambda: f64,
        #[arg(long, default_value_t = 0.01)]
        pickoff: f64,
        #[arg(long, default_value_t = 1.0)]
        delta: f64,
        #[arg(long, default_value_t = 100.0)]
        tau_th_ns: f64,
        #[arg(long, default_value_t = 30.0)]
        window_lo_ns: f64,
        #[arg(long, default_value_t = 550.0)]
        window_hi_ns: f64,
        #[arg(long, default_value_t = 200_000)]
        events: u64,
        #[arg(long, default_value_t = 8)]
        mc: usize,
    },
    /// Significance of an extra rate contribution at given statistics
    Detect {
        #[arg(long, default_value_t = 1.9e-3)]
        contribution: f64,
        #[arg(long, default_value_t = 25_000_000)]
        events: u64,
        #[arg(long, default_value_t = 7.0404)]
        lambda: f64,
    },
}

fn main() -> ExitCode {
    // Die quietly on a closed pipe (`pslab report | head`) instead of
    // panicking in println.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn load_config(cli: &Cli) -> Result<Config, Box<dyn std::error::Error>> {
    let mut cfg = match &cli.config {
        Some(path) => Config::parse(&std::fs::read_to_string(path)?)?,
        None => Config::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<u8, Box<dyn std::error::Error>> {
    let cfg = load_config(&cli)?;
    let c = cfg.constants();
    match &cli.command {
        Command::Report => {
            let report = Report::generate(&cfg);
            if cli.machine {
                print!("{}", report.render_machine());
            } else {
                print!("{}", report.render_text());
            }
            Ok(report.exit_code() as u8)
        }
        Command::Ps { field_kg } => {
            let levels = ps::PsLevels::from_constants(&c);
            println!("binding_energy_ev={}", c.to_ev(levels.binding)?);
            println!("hyperfine_splitting_ev={}", c.to_ev(levels.hyperfine)?);
            println!("superfine_shift_ev={}", c.to_ev(levels.superfine)?);
            let fields = match field_kg {
                Some(b) => vec![*b],
                None => vec![2.85, 3.5],
            };
            let lambda_t = PER_MICROSECOND.quantity(7.0404);
            let lambda_s = PER_MICROSECOND.quantity(cfg.lambda_s_per_us);
            for b in fields {
                let mix = ps::FieldMixing::at_field(&c, b)?;
                let f2g = ps::two_gamma_fraction_m0(&c, b, lambda_t, lambda_s)?;
                println!("field_kg={b}");
                println!("  x={}", mix.x);
                println!("  y={}", mix.y);
                println!("  sublevel_shift_ev={}", c.to_ev(mix.shift)?);
                println!("  two_gamma_fraction={f2g}");
            }
            Ok(0)
        }
        Command::Anomaly => {
            let ds = Dataset::builtin();
            print!("{}", ds.to_lines());
            let theory = ds.infer_theory_rate()?;
            println!("theory_rate_per_us={}", theory.rate);
            println!("theory_spread_per_us={}", theory.spread);
            let th = theory.as_measurement();
            for rec in [ds.gas()?, ds.vacuum()?, ds.modern()?] {
                println!(
                    "{}: sigma={:.2} rel_dev_pct={:.4}",
                    rec.label,
                    sigma_discrepancy(rec, &th)?,
                    relative_deviation(rec, &th)? * 100.0
                );
            }
            let iso = IsotopeAnomalyRecord::builtin();
            println!(
                "isotope_anomaly: factor={}+-{} abundance {}% -> {}% (standard estimate {})",
                iso.intensity_factor,
                iso.intensity_factor_err,
                iso.abundance_hi * 100.0,
                iso.abundance_lo * 100.0,
                iso.standard_estimate
            );
            Ok(0)
        }
        Command::Vsm => {
            let p = vsm::VsmParameters::derive_with_n_bar(&c, cfg.n_bar);
            println!("delta_cm={}", p.delta.in_unit(&CM)?);
            println!("cells_count={}", p.n_cells);
            println!("n_quantum={}", p.n_quantum);
            println!("r_mu_cm={}", p.r_mu.in_unit(&CM)?);
            println!("tau_mu_s={}", p.tau_mu.magnitude());
            println!("m_mu_g={}", p.m_mu.in_unit(&GRAM)?);
            println!("m_planck_g={}", p.m_planck.in_unit(&GRAM)?);
            println!(
                "mass_ratio_dev={}",
                (p.m_mu.magnitude() / p.m_planck.magnitude() - 1.0).abs()
            );
            println!("goldstone_mass_ev={}", c.to_ev(p.m_goldstone)?);
            println!("n_bar={}", p.n_bar);
            println!("r_n_bar_cm={}", p.r_n_bar.in_unit(&CM)?);
            println!("stoney_mass_g={}", vsm::stoney_mass(&c).in_unit(&GRAM)?);
            Ok(0)
        }
        Command::Walk {
            radius,
            trials,
            policy,
            exact,
        } => {
            let region = LatticeRegion::sphere_capped(*radius, cfg.region_cell_cap)?;
            let delta = CM.quantity(cfg.walk_delta_cm);
            if *exact {
                let search = walk::hamiltonian_path_search(
                    &region,
                    cfg.seed,
                    walk::DEFAULT_NODE_BUDGET,
                    false,
                );
                println!("{}", search.walk.to_record(delta, &c));
                println!(
                    "# nodes_expanded={} budget_exhausted={}",
                    search.nodes_expanded, search.budget_exhausted
                );
                return Ok(if search.walk.complete { 0 } else { 1 });
            }
            let pol = match policy {
                Some(name) => {
                    Policy::parse(name).ok_or_else(|| format!("unknown policy {name}"))?
                }
                None => cfg.walk_policy,
            };
            let walks = walk::run_trials(&region, *trials, pol, cfg.seed, cfg.walk_retries);
            for w in &walks {
                println!("{}", w.to_record(delta, &c));
            }
            match walk::summarize(&walks, delta, &c, cfg.n_bar) {
                Ok(stats) => {
                    println!(
                        "# completed={}/{} mean_ns={} stddev_ns={} min_ns={} max_ns={} mean_step={} scaled_full_ns={}",
                        stats.completed,
                        stats.trials,
                        stats.mean_ns,
                        stats.stddev_ns,
                        stats.min_ns,
                        stats.max_ns,
                        stats.mean_step_length,
                        stats.scaled_full_ns
                    );
                }
                Err(walk::WalkError::NoCompleteWalks { trials }) => {
                    println!("# completed=0/{trials} (no complete walks at this radius)");
                }
                Err(e) => return Err(e.into()),
            }
            Ok(0)
        }
        Command::Suppress {
            efield,
            alpha,
            sweep,
        } => {
            let lifetime = PER_MICROSECOND.quantity(7.0404).recip();
            let mut ctx = field::SuppressionContext::standard(&c, lifetime);
            ctx.n_bar = cfg.n_bar;
            ctx.margins = field::Margins {
                lo: cfg.margin_lo,
                hi: cfg.margin_hi,
            };
            let delta = CM.quantity(cfg.walk_delta_cm);
            let assess = |e_vcm: f64, alpha_deg: f64| -> Result<String, field::FieldError> {
                let chamber = field::ChamberConfig {
                    side: CM.quantity(cfg.chamber_side_cm),
                    efield: VOLT_PER_CM.quantity(e_vcm),
                    alpha: alpha_deg.to_radians(),
                    g: CM_PER_S2.quantity(cfg.g_cm_s2),
                };
                let a = field::classify_regime(&c, &chamber, &ctx, delta)?;
                let mode = if a.expected_extra_mode.lo == a.expected_extra_mode.hi {
                    format!("{}", a.expected_extra_mode.lo)
                } else {
                    format!("{}:{}", a.expected_extra_mode.lo, a.expected_extra_mode.hi)
                };
                Ok(format!(
                    "{} {} {} {} {}",
                    e_vcm,
                    alpha_deg,
                    a.regime.name(),
                    a.e_cr0.in_unit(&VOLT_PER_CM).unwrap(),
                    mode
                ))
            };
            if *sweep {
                for alpha_deg in [0.0, 15.0, 30.0, 45.0, 60.0, 75.0, 90.0] {
                    for e in [0.0, 1e3, 2e3, 4e3, 8e3, 1.2e4, 2e4, 4e4] {
                        println!("{}", assess(e, alpha_deg)?);
                    }
                }
                return Ok(0);
            }
            let line = assess(*efield, *alpha)?;
            if cli.machine {
                println!("{line}");
            } else {
                let chamber = field::ChamberConfig {
                    side: CM.quantity(cfg.chamber_side_cm),
                    efield: VOLT_PER_CM.quantity(*efield),
                    alpha: alpha.to_radians(),
                    g: CM_PER_S2.quantity(cfg.g_cm_s2),
                };
                let a = field::classify_regime(&c, &chamber, &ctx, delta)?;
                println!("regime={}", a.regime.name());
                println!("ratio_to_criterion={}", a.ratio);
                println!("e_cr0_v_cm={}", a.e_cr0.in_unit(&VOLT_PER_CM)?);
                println!("gamma_cr_cm_s2={}", a.gamma_cr.in_unit(&CM_PER_S2)?);
                println!("chamber_units={}", a.n_units);
                println!("braking_cm_s2={}", a.braking.in_unit(&CM_PER_S2)?);
                println!(
                    "expected_extra_mode=[{},{}]",
                    a.expected_extra_mode.lo, a.expected_extra_mode.hi
                );
            }
            Ok(0)
        }
        Command::Spectrum { cmd } => run_spectrum(cmd, &cfg, cli.machine),
    }
}

fn run_spectrum(
    cmd: &SpectrumCmd,
    cfg: &Config,
    _machine: bool,
) -> Result<u8, Box<dyn std::error::Error>> {
    match cmd {
        SpectrumCmd::Simulate {
            events,
            out,
            lambda,
            two_component,
            sigma_ns,
            background,
            t0_ns,
            t1_ns,
            bin_ns,
        } => {
            let components = if *two_component {
                vec![
                    (0.75, RateModel::constant(*lambda)),
                    (0.25, RateModel::constant(ps::DEFAULT_LAMBDA_S_PER_US)),
                ]
            } else {
                vec![(1.0, RateModel::constant(*lambda))]
            };
            let model = SpectrumModel {
                components,
                resolution_sigma_ns: *sigma_ns,
                background_per_bin: *background,
                t0_ns: *t0_ns,
                t1_ns: *t1_ns,
                bin_width_ns: *bin_ns,
            };
            let spec = synthesize(&model, *events, cfg.seed)?;
            match out {
                Some(path) => std::fs::write(path, spec.to_text())?,
                None => print!("{}", spec.to_text()),
            }
            Ok(0)
        }
        SpectrumCmd::Fit {
            input,
            components,
            sigma_ns,
            init_rate,
            init_rate2,
            fit_background,
        } => {
            let spec = LifetimeSpectrum::from_text(&std::fs::read_to_string(input)?)?;
            let total = spec.total_counts() as f64;
            let mut comps = vec![FitComponent {
                amplitude: Param::free(total.max(1.0)),
                rate_per_us: Param::Free {
                    init: *init_rate,
                    lo: 1e-4,
                    hi: 1e6,
                },
            }];
            if *components >= 2 {
                comps.push(FitComponent {
                    amplitude: Param::free(total.max(1.0) / 4.0),
                    rate_per_us: Param::Free {
                        init: *init_rate2,
                        lo: 1e-4,
                        hi: 1e6,
                    },
                });
            }
            let template = FitTemplate {
                components: comps,
                background_per_bin: if *fit_background {
                    Param::Free {
                        init: 1.0,
                        lo: 0.0,
                        hi: f64::INFINITY,
                    }
                } else {
                    Param::Fixed(0.0)
                },
                resolution_sigma_ns: *sigma_ns,
            };
            let fit = fit_spectrum(&spec, &template)?;
            print!("{}", fit.to_kv());
            Ok(if fit.converged { 0 } else { 1 })
        }
        SpectrumCmd::Bias {
            lambda,
            pickoff,
            delta,
            tau_th_ns,
            window_lo_ns,
            window_hi_ns,
            events,
            mc,
        } => {
            let truth = RateModel::with_pickoff(*lambda, *pickoff, *delta, *tau_th_ns);
            let study = thermalization_bias_study(
                &truth,
                (*window_lo_ns, *window_hi_ns),
                2.0,
                *events,
                *mc,
                cfg.seed,
            )?;
            println!("bias_ppm={}", study.bias_ppm);
            println!("lambda_fit_per_us={}", study.lambda_fit);
            println!("lambda_reference_per_us={}", study.lambda_reference);
            println!("mc_mean_ppm={}", study.mc_mean_ppm);
            println!("mc_stderr_ppm={}", study.mc_stderr_ppm);
            println!("mc_runs={}", study.mc_runs);
            Ok(0)
        }
        SpectrumCmd::Detect {
            contribution,
            events,
            lambda,
        } => {
            let d = extra_mode_detectability(*contribution, *events, *lambda, (0.0, 1420.0), 2.0)?;
            println!("significance_sigma={}", d.significance_sigma);
            println!("rel_stat_err={}", d.rel_stat_err);
            println!("n_events={}", d.n_events);
            Ok(0)
        }
    }
}
