//! `dpk` — command-line front end wiring ingest → compute → emit.
//!
//! Data goes to stdout, diagnostics to stderr. Exit codes: 0 success,
//! 1 computation error, 2 usage error. Output is byte-deterministic for
//! fixed inputs; floats print with 6 significant digits and units live in
//! the flag names.

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use std::path::{Path, PathBuf};

use dpk_core::ingest::{parse_grid, parse_manifest, parse_phonons, parse_structure};
use dpk_core::kinetics::{
    build_network, odmr_contrast, pl_curve, steady_state, MwPair, RateConfig,
};
use dpk_core::levels::{
    ctl_diagram, formation_energy, transition_level, LevelsError,
};
use dpk_core::lineshape::{
    debye_waller, generating_function_spectrum, mass_weighted_displacement, partial_hr_factors,
    SpectrumGrid, ZplShape,
};
use dpk_core::photophysics::{
    dipole_allowed, quantum_yield, radiative_rate, transition_dipole_grid, DipoleSource,
    IrrepLabel, RadiativeLifetime,
};
use dpk_core::spinham::{
    isotope_risk, odmr_frequencies, triplet_levels, zfs_from_point_spins, zfs_from_spin_density,
    hyperfine_from_spin_density, NucleusSpec, PointSpin, ZfsTensor,
};

#[derive(Parser)]
#[command(name = "dpk", version, about = "Defect-qubit photophysics toolkit")]
struct Cli {
    /// Directory holding the bundled case-study inputs; used as the default
    /// location for any omitted file argument.
    #[arg(long, global = true)]
    fixtures: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum ShapeArg {
    Gaussian,
    Lorentzian,
}

#[derive(Clone, Copy, ValueEnum)]
enum PairArg {
    #[value(name = "t0-t+")]
    T0Tplus,
    #[value(name = "t0-t-")]
    T0Tminus,
}

#[derive(Subcommand)]
enum Cmd {
    /// Phonon-sideband emission lineshape via the generating function.
    Lineshape {
        #[arg(long)]
        ground: Option<PathBuf>,
        #[arg(long)]
        excited: Option<PathBuf>,
        #[arg(long)]
        phonons: Option<PathBuf>,
        #[arg(long, allow_negative_numbers = true)]
        ezpl_ev: f64,
        #[arg(long, default_value_t = 0.0)]
        temperature_k: f64,
        #[arg(long, default_value_t = 2.0)]
        gamma_zpl_mev: f64,
        #[arg(long, value_enum, default_value_t = ShapeArg::Gaussian)]
        shape: ShapeArg,
        #[arg(long, allow_negative_numbers = true)]
        emin_ev: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        emax_ev: Option<f64>,
        #[arg(long, default_value_t = 1e-3)]
        step_ev: f64,
    },
    /// Radiative rate and lifetime from E_ZPL, dipole and refractive index.
    Lifetime {
        #[arg(long, allow_negative_numbers = true)]
        ezpl_ev: f64,
        #[arg(long)]
        dipole_debye: f64,
        #[arg(long)]
        n: f64,
        /// Observed PL lifetime; adds a quantum-yield line when given.
        #[arg(long)]
        tau_pl_s: Option<f64>,
    },
    /// Transition dipole moment from two orbital grids.
    Dipole {
        #[arg(long)]
        psi_i: PathBuf,
        #[arg(long)]
        psi_f: PathBuf,
    },
    /// C2v electric-dipole selection-rule verdict.
    Selection {
        #[arg(long)]
        initial: String,
        #[arg(long = "final")]
        final_: String,
    },
    /// Zero-field-splitting tensor from a spin-density grid or point spins.
    Zfs {
        #[arg(long, conflicts_with = "points")]
        density: Option<PathBuf>,
        /// Text file of point spins: `x y z moment` per line (Å, unpaired electrons).
        #[arg(long)]
        points: Option<PathBuf>,
    },
    /// Hyperfine tensor of one nucleus from a spin-density grid.
    Hyperfine {
        #[arg(long)]
        density: PathBuf,
        #[arg(long)]
        species: String,
        /// Nucleus position as `x,y,z` in Å.
        #[arg(long, allow_hyphen_values = true)]
        position: String,
        /// Nuclear g-factor.
        #[arg(long, allow_negative_numbers = true)]
        gn: f64,
        #[arg(long, default_value_t = 1.0)]
        spin: f64,
        /// Dipolar-sum exclusion radius in Å (default: one voxel diagonal).
        #[arg(long)]
        exclusion_a: Option<f64>,
    },
    /// Triplet sublevels and allowed transitions for given D, E, B.
    SpinLevels {
        #[arg(long, allow_negative_numbers = true)]
        d_mhz: f64,
        #[arg(long, allow_negative_numbers = true)]
        e_mhz: f64,
        /// Magnetic field as `x,y,z` in mT.
        #[arg(long, default_value = "0,0,0", allow_hyphen_values = true)]
        b_mt: String,
    },
    /// All pairwise ODMR transition frequencies with intensities.
    Odmr {
        #[arg(long, allow_negative_numbers = true)]
        d_mhz: f64,
        #[arg(long, allow_negative_numbers = true)]
        e_mhz: f64,
        #[arg(long, default_value = "0,0,0", allow_hyphen_values = true)]
        b_mt: String,
    },
    /// Probability that any listed lattice site hosts a spinful isotope.
    Isotope {
        /// Site count per shell; repeat the flag for several shells.
        #[arg(long, required = true)]
        sites: Vec<u64>,
        #[arg(long)]
        abundance: f64,
    },
    /// Formation energies and transition levels from an energy manifest.
    Levels {
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        efermi_ev: f64,
    },
    /// Stable-charge diagram over the gap.
    CtlDiagram {
        #[arg(long)]
        manifest: Option<PathBuf>,
        /// Defaults to the manifest's e_c − e_v.
        #[arg(long)]
        gap_ev: Option<f64>,
        #[arg(long, default_value_t = 0.005)]
        resolution_ev: f64,
    },
    /// Generalized-Koopmans residual from two manifest entries.
    Koopmans {
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long)]
        entry_n: String,
        #[arg(long)]
        entry_nm1: String,
        #[arg(long, allow_negative_numbers = true)]
        eps_homo_ev: f64,
    },
    /// Steady-state populations of the optical-cycle rate network.
    Kinetics {
        #[arg(long)]
        rates: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        power: f64,
    },
    /// PL rate versus pump power.
    PlCurve {
        #[arg(long)]
        rates: Option<PathBuf>,
        #[arg(long, default_value_t = 0.0)]
        pmin: f64,
        #[arg(long, default_value_t = 10.0)]
        pmax: f64,
        #[arg(long, default_value_t = 21)]
        points: usize,
    },
    /// Steady-state ODMR contrast for a driven T0<->T± pair.
    OdmrContrast {
        #[arg(long)]
        rates: Option<PathBuf>,
        #[arg(long, value_enum)]
        pair: PairArg,
        /// Microwave drive rate, 1/s.
        #[arg(long)]
        drive: f64,
        #[arg(long, default_value_t = 1.0)]
        power: f64,
    },
}

fn main() {
    if let Ok(v) = std::env::var("DPK_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

/// 6 significant digits.
fn f6(x: f64) -> String {
    format!("{x:.5e}")
}

fn resolve(explicit: Option<PathBuf>, fixtures: &Option<PathBuf>, name: &str) -> Result<PathBuf> {
    if let Some(p) = explicit {
        return Ok(p);
    }
    if let Some(dir) = fixtures {
        return Ok(dir.join(name));
    }
    bail!("no input file given (pass the file flag or --fixtures <dir> holding {name})");
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn parse_vec3(s: &str) -> Result<[f64; 3]> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .with_context(|| format!("expected `x,y,z`, got '{s}'"))?;
    if parts.len() != 3 {
        bail!("expected exactly three components in '{s}'");
    }
    Ok([parts[0], parts[1], parts[2]])
}

fn parse_irrep(s: &str) -> Result<IrrepLabel> {
    IrrepLabel::parse(s).ok_or_else(|| anyhow!("unknown C2v irrep '{s}' (use A1, A2, B1, B2)"))
}

fn print_zfs(zfs: &ZfsTensor, source: &str) {
    println!("# zero-field-splitting tensor ({source}), MHz");
    println!("# convention: principal axes ordered by |eigenvalue|; D signed as D_zz; E >= 0");
    for row in &zfs.tensor {
        println!("tensor {} {} {}", f6(row[0]), f6(row[1]), f6(row[2]));
    }
    println!("d_mhz = {}", f6(zfs.d_mhz));
    println!("e_mhz = {}", f6(zfs.e_mhz));
    for (name, v, ax) in [
        ("x", zfs.principal_values[0], zfs.principal_axes[0]),
        ("y", zfs.principal_values[1], zfs.principal_axes[1]),
        ("z", zfs.principal_values[2], zfs.principal_axes[2]),
    ] {
        println!(
            "principal_{name} = {} axis = {} {} {}",
            f6(v),
            f6(ax[0]),
            f6(ax[1]),
            f6(ax[2])
        );
    }
}

fn run(cli: Cli) -> Result<()> {
    let fixtures = cli.fixtures;
    match cli.cmd {
        Cmd::Lineshape {
            ground,
            excited,
            phonons,
            ezpl_ev,
            temperature_k,
            gamma_zpl_mev,
            shape,
            emin_ev,
            emax_ev,
            step_ev,
        } => {
            let ground = parse_structure(&read(&resolve(ground, &fixtures, "ground.txt")?)?)?;
            let excited = parse_structure(&read(&resolve(excited, &fixtures, "excited.txt")?)?)?;
            let basis = parse_phonons(&read(&resolve(phonons, &fixtures, "phonons.txt")?)?)?;
            let q = mass_weighted_displacement(&ground, &excited)?;
            let hr = partial_hr_factors(&q, &basis)?;
            eprintln!("total Huang-Rhys factor S = {}", f6(hr.s_total()));
            eprintln!("Debye-Waller factor = {}", f6(debye_waller(&hr)));
            let omega_max = hr.modes.iter().map(|m| m.frequency_mev).fold(0.0f64, f64::max);
            let grid = SpectrumGrid {
                e_min_ev: emin_ev.unwrap_or(ezpl_ev - 0.6),
                e_max_ev: emax_ev
                    .unwrap_or(ezpl_ev + (5.0 * omega_max).max(10.0 * gamma_zpl_mev) * 1e-3 + 0.01),
                step_ev,
            };
            let shape = match shape {
                ShapeArg::Gaussian => ZplShape::Gaussian,
                ShapeArg::Lorentzian => ZplShape::Lorentzian,
            };
            let sp = generating_function_spectrum(
                &hr,
                ezpl_ev,
                temperature_k,
                gamma_zpl_mev,
                shape,
                grid,
            )?;
            print!("{}", sp.to_text());
        }
        Cmd::Lifetime { ezpl_ev, dipole_debye, n, tau_pl_s } => {
            let optics = radiative_rate(ezpl_ev, dipole_debye, n)?;
            println!("# radiative transition optics");
            println!("e_zpl_ev = {}", f6(optics.e_zpl_ev));
            println!("mu_debye = {}", f6(optics.mu_debye));
            println!("n = {}", f6(optics.refractive_index));
            println!("gamma_rad_per_s = {}", f6(optics.gamma_rad));
            println!("tau_rad_s = {}", optics.tau_rad);
            if let Some(tau_pl) = tau_pl_s {
                match optics.tau_rad {
                    RadiativeLifetime::Finite(tau_rad) => {
                        println!("tau_pl_s = {}", f6(tau_pl));
                        println!("quantum_yield = {}", f6(quantum_yield(tau_rad, tau_pl)?));
                    }
                    RadiativeLifetime::Infinite => println!("quantum_yield = 0.00000e0"),
                }
            }
        }
        Cmd::Dipole { psi_i, psi_f } => {
            let a = parse_grid(&read(&psi_i)?)?;
            let b = parse_grid(&read(&psi_f)?)?;
            for w in a.warnings.iter().chain(&b.warnings) {
                eprintln!("warning: {w}");
            }
            let mu = transition_dipole_grid(&a.value, &b.value)?;
            let src = match mu.source {
                DipoleSource::GridComputed => "grid-computed",
                DipoleSource::UserSupplied => "user-supplied",
            };
            println!("# transition dipole ({src})");
            println!("mu_x_debye = {}", f6(mu.vector[0]));
            println!("mu_y_debye = {}", f6(mu.vector[1]));
            println!("mu_z_debye = {}", f6(mu.vector[2]));
            println!("mu_debye = {}", f6(mu.magnitude()));
        }
        Cmd::Selection { initial, final_ } => {
            let i = parse_irrep(&initial)?;
            let f = parse_irrep(&final_)?;
            let verdict = dipole_allowed(i, f);
            println!("# C2v electric-dipole selection rule");
            println!("initial = {i}");
            println!("final = {f}");
            println!("allowed = {}", verdict.allowed);
            let pols: Vec<String> = verdict.polarizations.iter().map(|p| p.to_string()).collect();
            println!("polarizations = {}", pols.join(" "));
        }
        Cmd::Zfs { density, points } => match (density, points) {
            (Some(path), None) => {
                let parsed = parse_grid(&read(&path)?)?;
                for w in &parsed.warnings {
                    eprintln!("warning: {w}");
                }
                let zfs = zfs_from_spin_density(&parsed.value)?;
                print_zfs(&zfs, "spin-density grid");
            }
            (None, Some(path)) => {
                let mut spins = Vec::new();
                for (k, line) in read(&path)?.lines().enumerate() {
                    let line = line.split('#').next().unwrap_or("").trim();
                    if line.is_empty() {
                        continue;
                    }
                    let v: Vec<f64> = line
                        .split_whitespace()
                        .map(|t| t.parse::<f64>())
                        .collect::<Result<_, _>>()
                        .with_context(|| format!("point-spin line {}", k + 1))?;
                    if v.len() != 4 {
                        bail!("point-spin line {} needs `x y z moment`", k + 1);
                    }
                    spins.push(PointSpin { position: [v[0], v[1], v[2]], moment: v[3] });
                }
                let zfs = zfs_from_point_spins(&spins);
                print_zfs(&zfs, "point spins");
            }
            _ => bail!("pass exactly one of --density or --points"),
        },
        Cmd::Hyperfine { density, species, position, gn, spin, exclusion_a } => {
            let parsed = parse_grid(&read(&density)?)?;
            for w in &parsed.warnings {
                eprintln!("warning: {w}");
            }
            let nucleus = NucleusSpec { species, position: parse_vec3(&position)?, g_n: gn };
            let hf = hyperfine_from_spin_density(&parsed.value, &nucleus, spin, exclusion_a)?;
            println!("# hyperfine tensor for {} at {}, MHz", hf.nucleus.species, position);
            for row in &hf.tensor {
                println!("tensor {} {} {}", f6(row[0]), f6(row[1]), f6(row[2]));
            }
            println!("a_iso_mhz = {}", f6(hf.a_iso()));
            let pv = hf.principal_values();
            println!("principal_mhz = {} {} {}", f6(pv[0]), f6(pv[1]), f6(pv[2]));
        }
        Cmd::SpinLevels { d_mhz, e_mhz, b_mt } => {
            let b = parse_vec3(&b_mt)?;
            let zfs = ZfsTensor::from_d_e(d_mhz, e_mhz);
            let levels = triplet_levels(&zfs, b, &[])?;
            println!(
                "# triplet levels, d_mhz = {}, e_mhz = {}, b_mt = {} {} {}",
                f6(d_mhz),
                f6(e_mhz),
                f6(b[0]),
                f6(b[1]),
                f6(b[2])
            );
            for (k, e) in levels.energies_mhz.iter().enumerate() {
                println!("level {k} {}", f6(*e));
            }
            for line in odmr_frequencies(&levels).iter().filter(|l| !l.forbidden) {
                println!(
                    "transition {}->{} {}",
                    line.lower,
                    line.upper,
                    f6(line.frequency_mhz)
                );
            }
        }
        Cmd::Odmr { d_mhz, e_mhz, b_mt } => {
            let b = parse_vec3(&b_mt)?;
            let zfs = ZfsTensor::from_d_e(d_mhz, e_mhz);
            let levels = triplet_levels(&zfs, b, &[])?;
            println!(
                "# ODMR transitions, d_mhz = {}, e_mhz = {}, b_mt = {} {} {}",
                f6(d_mhz),
                f6(e_mhz),
                f6(b[0]),
                f6(b[1]),
                f6(b[2])
            );
            println!("# columns: lower upper frequency_mhz intensity flag");
            for l in odmr_frequencies(&levels) {
                let flag = if l.forbidden { "forbidden" } else { "allowed" };
                println!(
                    "{} {} {} {} {flag}",
                    l.lower,
                    l.upper,
                    f6(l.frequency_mhz),
                    f6(l.intensity)
                );
            }
        }
        Cmd::Isotope { sites, abundance } => {
            let risk = isotope_risk(&sites, abundance)?;
            let shells: Vec<String> = sites.iter().map(|s| s.to_string()).collect();
            println!("# isotope occupation risk");
            println!("sites = {}", shells.join(" "));
            println!("abundance = {}", f6(abundance));
            println!("risk = {}", f6(risk));
        }
        Cmd::Levels { manifest, efermi_ev } => {
            let m = parse_manifest(&read(&resolve(manifest, &fixtures, "manifest.txt")?)?)?;
            println!("# formation energies at e_fermi_ev = {} above e_v", f6(efermi_ev));
            for entry in &m.entries {
                let ef = formation_energy(&m, &entry.label, efermi_ev)?;
                println!("entry {} charge={} formation_ev = {}", entry.label, entry.charge, f6(ef));
            }
            let mut charges: Vec<i32> = m.entries.iter().map(|e| e.charge).collect();
            charges.sort_unstable();
            charges.dedup();
            charges.reverse(); // higher charge first, donor-style labels
            println!("# transition levels (eV above e_v)");
            for pair in charges.windows(2) {
                match transition_level(&m, pair[0], pair[1]) {
                    Ok(level) => {
                        let tag = if level.in_gap { "" } else { " outside-gap" };
                        println!("level {} {}{tag}", level.label(), f6(level.position_ev));
                    }
                    Err(LevelsError::LevelOutsideWindow { level, .. }) => {
                        eprintln!(
                            "warning: ({}/{}) level at {} eV outside the sanity window",
                            pair[0], pair[1], f6(level)
                        );
                    }
                    Err(e) => return Err(e.into()),
                }
            }
        }
        Cmd::CtlDiagram { manifest, gap_ev, resolution_ev } => {
            let m = parse_manifest(&read(&resolve(manifest, &fixtures, "manifest.txt")?)?)?;
            let gap = gap_ev.unwrap_or_else(|| m.gap());
            let d = ctl_diagram(&m, gap, resolution_ev)?;
            print!("{}", d.to_text());
        }
        Cmd::Koopmans { manifest, entry_n, entry_nm1, eps_homo_ev } => {
            let m = parse_manifest(&read(&resolve(manifest, &fixtures, "manifest.txt")?)?)?;
            let residual =
                dpk_core::levels::koopmans_check(&m, &entry_n, &entry_nm1, eps_homo_ev)?;
            println!("# generalized-Koopmans check");
            println!("eps_homo_ev = {}", f6(eps_homo_ev));
            println!("ionization_ev = {}", f6(eps_homo_ev - residual));
            println!("non_koopmans_ev = {}", f6(residual));
        }
        Cmd::Kinetics { rates, power } => {
            let cfg = RateConfig::parse(&read(&resolve(rates, &fixtures, "rates.txt")?)?)?;
            let net = build_network(&cfg)?;
            let p = steady_state(&net, power)?;
            println!("# steady-state populations at power = {}", f6(power));
            for line in net.config.header_lines() {
                println!("{line}");
            }
            for (label, v) in net.labels.iter().zip(&p) {
                println!("{label} {}", f6(*v));
            }
            println!("pl_rate_per_s = {}", f6(net.gamma_rad() * p[net.bright_index()]));
        }
        Cmd::PlCurve { rates, pmin, pmax, points } => {
            if points < 2 {
                bail!("--points must be at least 2");
            }
            let cfg = RateConfig::parse(&read(&resolve(rates, &fixtures, "rates.txt")?)?)?;
            let net = build_network(&cfg)?;
            let powers: Vec<f64> = (0..points)
                .map(|k| pmin + (pmax - pmin) * k as f64 / (points - 1) as f64)
                .collect();
            let curve = pl_curve(&net, &powers)?;
            println!("# PL rate versus pump power");
            for line in net.config.header_lines() {
                println!("{line}");
            }
            println!("# columns: power pl_rate_per_s");
            for (p, pl) in curve {
                println!("{} {}", f6(p), f6(pl));
            }
        }
        Cmd::OdmrContrast { rates, pair, drive, power } => {
            let cfg = RateConfig::parse(&read(&resolve(rates, &fixtures, "rates.txt")?)?)?;
            let net = build_network(&cfg)?;
            let pair = match pair {
                PairArg::T0Tplus => MwPair::T0Tplus,
                PairArg::T0Tminus => MwPair::T0Tminus,
            };
            let c = odmr_contrast(&net, pair, drive, power)?;
            println!("# steady-state ODMR contrast");
            for line in net.config.header_lines() {
                println!("{line}");
            }
            println!("pair = {pair}");
            println!("drive_per_s = {}", f6(drive));
            println!("power = {}", f6(power));
            println!("contrast = {}", f6(c));
        }
    }
    Ok(())
}
