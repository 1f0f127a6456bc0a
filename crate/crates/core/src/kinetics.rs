//! Rate-equation model of the optical cycle: ground and bright singlets,
//! optional dark singlet, triplet sublevels (T₀, T₊, T₋) and an ionized
//! state. Produces steady-state populations, trajectories, PL-vs-power
//! curves and ODMR contrast.
//!
//! The generator matrix G holds G[i][j] = rate j→i (1/s) for i ≠ j, with
//! column sums zero. Pump-scaled entries carry the `.per_power` suffix in
//! the config and multiply the dimensionless power; microwave drive adds a
//! symmetric rate on one T₀↔T± pair.

use crate::ingest::content_lines;
use nalgebra::{DMatrix, DVector};
use thiserror::Error;

pub const STEADY_RESIDUAL_TOL: f64 = 1e-10;
pub const INTEGRATE_RTOL: f64 = 1e-8;
pub const INTEGRATE_ATOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum KineticsError {
    #[error("malformed config line {0}: {1}")]
    MalformedLine(usize, String),
    #[error("missing rate '{0}'")]
    MissingRate(String),
    #[error("rate '{0}' is negative: {1}")]
    NegativeRate(String, f64),
    #[error("intersystem-crossing ordering violated: T0→g rate {t0} must exceed T±→g rates ({tp}, {tm})")]
    SelectionRuleViolation { t0: f64, tp: f64, tm: f64 },
    #[error("network is reducible at this power: state '{0}' disconnected from the cycle")]
    Reducible(String),
    #[error("steady-state residual {0:e} exceeds tolerance")]
    NonConvergent(f64),
    #[error("integrator step size underflowed at t = {0:e} s")]
    StepFailure(f64),
    #[error("network has no microwave pair '{0}' (no triplet states)")]
    NoSuchPair(String),
    #[error("initial populations must be non-negative and sum to 1, got sum {0}")]
    BadInitial(f64),
}

/// Parsed `key = value` rate table. Keys with the `.per_power` suffix scale
/// linearly with pump power; a trailing `assumed=true` token marks
/// placeholder magnitudes and is echoed into output headers.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RateConfig {
    pub rates: std::collections::BTreeMap<String, f64>,
    pub assumed: std::collections::BTreeSet<String>,
}

impl RateConfig {
    pub fn parse(text: &str) -> Result<RateConfig, KineticsError> {
        let mut cfg = RateConfig::default();
        for (ln, line) in content_lines(text) {
            let toks: Vec<&str> = line.split_whitespace().collect();
            let (key, value, rest) = match toks.as_slice() {
                [k, "=", v] => (*k, *v, false),
                [k, "=", v, "assumed=true"] => (*k, *v, true),
                _ => {
                    return Err(KineticsError::MalformedLine(
                        ln,
                        format!("expected '<key> = <rate> [assumed=true]', got '{}'", line.trim()),
                    ))
                }
            };
            let v: f64 = value.parse().map_err(|_| {
                KineticsError::MalformedLine(ln, format!("bad rate value '{value}'"))
            })?;
            if !v.is_finite() || v < 0.0 {
                return Err(KineticsError::NegativeRate(key.to_string(), v));
            }
            cfg.rates.insert(key.to_string(), v);
            if rest {
                cfg.assumed.insert(key.to_string());
            }
        }
        Ok(cfg)
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.rates.get(key).copied()
    }

    fn require(&self, key: &str) -> Result<f64, KineticsError> {
        self.get(key).ok_or_else(|| KineticsError::MissingRate(key.to_string()))
    }

    /// Header lines echoing every effective rate with its `assumed` flag.
    pub fn header_lines(&self) -> Vec<String> {
        self.rates
            .iter()
            .map(|(k, v)| {
                let flag = if self.assumed.contains(k) { " assumed=true" } else { "" };
                format!("# rate {k} = {v:e}{flag}")
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MwPair {
    T0Tplus,
    T0Tminus,
}

impl std::fmt::Display for MwPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MwPair::T0Tplus => write!(f, "t0<->t+"),
            MwPair::T0Tminus => write!(f, "t0<->t-"),
        }
    }
}

/// Immutable rate network; the generator is assembled per (power, drive).
#[derive(Debug, Clone)]
pub struct RateNetwork {
    pub labels: Vec<String>,
    /// Power-independent rates, entry \[i]\[j] = rate j→i, 1/s.
    base: DMatrix<f64>,
    /// Rates multiplied by the dimensionless power before use.
    pump_scaled: DMatrix<f64>,
    /// Index of the bright state (PL source) and its radiative rate.
    bright: usize,
    gamma_rad: f64,
    triplet: Option<(usize, usize, usize)>,
    pub config: RateConfig,
}

const GROUND: usize = 0;

impl RateNetwork {
    pub fn index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn gamma_rad(&self) -> f64 {
        self.gamma_rad
    }

    pub fn bright_index(&self) -> usize {
        self.bright
    }

    /// Generator at the given power and optional microwave drive
    /// (pair, rate in 1/s); columns sum to zero.
    pub fn generator(&self, power: f64, microwave: Option<(MwPair, f64)>) -> DMatrix<f64> {
        let n = self.len();
        let mut g = &self.base + &self.pump_scaled * power;
        if let Some((pair, drive)) = microwave {
            if let Some((t0, tp, tm)) = self.triplet {
                let other = match pair {
                    MwPair::T0Tplus => tp,
                    MwPair::T0Tminus => tm,
                };
                g[(t0, other)] += drive;
                g[(other, t0)] += drive;
            }
        }
        for j in 0..n {
            g[(j, j)] = 0.0;
            let col_sum: f64 = (0..n).map(|i| g[(i, j)]).sum();
            g[(j, j)] = -col_sum;
        }
        g
    }

    fn microwave_indices(&self, pair: MwPair) -> Result<(usize, usize), KineticsError> {
        let (t0, tp, tm) = self
            .triplet
            .ok_or_else(|| KineticsError::NoSuchPair(pair.to_string()))?;
        Ok(match pair {
            MwPair::T0Tplus => (t0, tp),
            MwPair::T0Tminus => (t0, tm),
        })
    }
}

/// Assemble the network from a rate config. Topology is presence-driven:
/// ground and bright always exist (`gamma_rad`, `pump.per_power`
/// required); triplet sublevels appear when ISC rates are given, the
/// ionized state with `ionization.per_power`/`recapture.per_power`, and
/// the dark singlet with `dark_activation`/`dark_decay`.
pub fn build_network(config: &RateConfig) -> Result<RateNetwork, KineticsError> {
    let gamma_rad = config.require("gamma_rad")?;
    let pump = config.require("pump.per_power")?;
    let gamma_nonrad = config.get("gamma_nonrad").unwrap_or(0.0);

    let mut labels = vec!["ground".to_string(), "bright".to_string()];
    let has_triplet = config.get("isc_out_t0").is_some()
        || config.get("isc_in_t0").is_some();
    let mut triplet = None;
    if has_triplet {
        let t0 = labels.len();
        labels.push("t0".into());
        labels.push("t+".into());
        labels.push("t-".into());
        triplet = Some((t0, t0 + 1, t0 + 2));
    }
    let ionized = config.get("ionization.per_power").map(|_| {
        labels.push("ionized".into());
        labels.len() - 1
    });
    let dark = config.get("dark_activation").map(|_| {
        labels.push("dark".into());
        labels.len() - 1
    });

    let n = labels.len();
    let mut base = DMatrix::zeros(n, n);
    let mut pump_scaled = DMatrix::zeros(n, n);
    let bright = 1;

    pump_scaled[(bright, GROUND)] = pump;
    base[(GROUND, bright)] = gamma_rad + gamma_nonrad;

    if let Some((t0, tp, tm)) = triplet {
        let in_t0 = config.require("isc_in_t0")?;
        let in_tp = config.require("isc_in_tplus")?;
        let in_tm = config.require("isc_in_tminus")?;
        let out_t0 = config.require("isc_out_t0")?;
        let out_tp = config.require("isc_out_tplus")?;
        let out_tm = config.require("isc_out_tminus")?;
        if out_t0 <= out_tp || out_t0 <= out_tm {
            return Err(KineticsError::SelectionRuleViolation {
                t0: out_t0,
                tp: out_tp,
                tm: out_tm,
            });
        }
        base[(t0, bright)] = in_t0;
        base[(tp, bright)] = in_tp;
        base[(tm, bright)] = in_tm;
        base[(GROUND, t0)] = out_t0;
        base[(GROUND, tp)] = out_tp;
        base[(GROUND, tm)] = out_tm;
    }
    if let Some(ion) = ionized {
        pump_scaled[(ion, bright)] = config.require("ionization.per_power")?;
        pump_scaled[(GROUND, ion)] = config.require("recapture.per_power")?;
    }
    if let Some(d) = dark {
        base[(d, bright)] = config.require("dark_activation")?;
        base[(GROUND, d)] = config.require("dark_decay")?;
    }

    Ok(RateNetwork {
        labels,
        base,
        pump_scaled,
        bright,
        gamma_rad,
        triplet,
        config: config.clone(),
    })
}

/// A unique stationary distribution exists iff the positive entries of G
/// leave exactly one closed communicating class; a second closed class
/// (e.g. an absorbing state cut off from the cycle) makes the steady state
/// ambiguous.
fn check_unique_closed_class(net: &RateNetwork, g: &DMatrix<f64>) -> Result<(), KineticsError> {
    let n = g.nrows();
    // Floyd-Warshall reachability over j→i edges
    let mut reach = vec![vec![false; n]; n];
    for j in 0..n {
        reach[j][j] = true;
        for i in 0..n {
            if i != j && g[(i, j)] > 0.0 {
                reach[j][i] = true;
            }
        }
    }
    for k in 0..n {
        for a in 0..n {
            if reach[a][k] {
                for b in 0..n {
                    if reach[k][b] {
                        reach[a][b] = true;
                    }
                }
            }
        }
    }
    // recurrent: every reachable state can reach back
    let recurrent: Vec<bool> = (0..n)
        .map(|i| (0..n).all(|j| !reach[i][j] || reach[j][i]))
        .collect();
    let mut representative: Option<usize> = None;
    for i in 0..n {
        if !recurrent[i] {
            continue;
        }
        match representative {
            None => representative = Some(i),
            Some(r) => {
                if !reach[r][i] {
                    return Err(KineticsError::Reducible(net.labels[i].clone()));
                }
            }
        }
    }
    Ok(())
}

fn steady_state_of(net: &RateNetwork, g: &DMatrix<f64>) -> Result<DVector<f64>, KineticsError> {
    check_unique_closed_class(net, g)?;
    let n = g.nrows();
    // replace the last row with the conservation constraint Σp = 1
    let mut a = g.clone();
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut rhs = DVector::zeros(n);
    rhs[n - 1] = 1.0;
    let lu = a.lu();
    let mut p = lu
        .solve(&rhs)
        .ok_or(KineticsError::NonConvergent(f64::INFINITY))?;
    for v in p.iter_mut() {
        if *v < 0.0 && *v > -1e-12 {
            *v = 0.0;
        }
    }
    let g_norm = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let residual = (g * &p).amax();
    if residual > STEADY_RESIDUAL_TOL * g_norm.max(1.0) {
        return Err(KineticsError::NonConvergent(residual));
    }
    Ok(p)
}

/// Null-space steady state of the power-scaled generator, normalized to
/// Σp = 1.
pub fn steady_state(net: &RateNetwork, power: f64) -> Result<Vec<f64>, KineticsError> {
    steady_state_with(net, power, None)
}

pub fn steady_state_with(
    net: &RateNetwork,
    power: f64,
    microwave: Option<(MwPair, f64)>,
) -> Result<Vec<f64>, KineticsError> {
    let g = net.generator(power, microwave);
    Ok(steady_state_of(net, &g)?.iter().cloned().collect())
}

#[derive(Debug, Clone)]
pub struct PopulationTrajectory {
    /// s
    pub times: Vec<f64>,
    /// One population vector per time point, fractions summing to 1.
    pub populations: Vec<Vec<f64>>,
}

impl PopulationTrajectory {
    pub fn last(&self) -> &Vec<f64> {
        self.populations.last().expect("trajectory never empty")
    }
}

/// Adaptive Dormand-Prince (RK45) integration of dp/dt = G(t)·p with
/// relative tolerance 1e−8 and non-negativity enforced by step rejection.
/// `power` and `microwave` are piecewise profiles of time in seconds.
pub fn integrate(
    net: &RateNetwork,
    initial: &[f64],
    duration_s: f64,
    power: &dyn Fn(f64) -> f64,
    microwave: &dyn Fn(f64) -> Option<(MwPair, f64)>,
) -> Result<PopulationTrajectory, KineticsError> {
    let n = net.len();
    let sum: f64 = initial.iter().sum();
    if initial.len() != n || initial.iter().any(|&v| v < 0.0) || (sum - 1.0).abs() > 1e-9 {
        return Err(KineticsError::BadInitial(sum));
    }

    // Dormand-Prince coefficients
    const A: [[f64; 6]; 6] = [
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const C: [f64; 6] = [0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
    const B5: [f64; 7] =
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];

    let deriv = |t: f64, y: &DVector<f64>| -> DVector<f64> {
        net.generator(power(t), microwave(t)) * y
    };

    let mut t = 0.0;
    let mut y = DVector::from_column_slice(initial);
    let mut times = vec![0.0];
    let mut populations = vec![initial.to_vec()];

    // initial step from the stiffest rate present
    let max_rate = {
        let g = net.generator(power(0.0), microwave(0.0));
        g.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0 / duration_s)
    };
    let mut h = (0.1 / max_rate).min(duration_s);
    let h_min = duration_s * 1e-14;

    while t < duration_s {
        h = h.min(duration_s - t);
        let mut k: Vec<DVector<f64>> = Vec::with_capacity(7);
        k.push(deriv(t, &y));
        for s in 0..6 {
            let mut ys = y.clone();
            for (j, kj) in k.iter().enumerate() {
                if A[s][j] != 0.0 {
                    ys += kj * (h * A[s][j]);
                }
            }
            k.push(deriv(t + C[s] * h, &ys));
        }
        let mut y5 = y.clone();
        let mut y4 = y.clone();
        for (j, kj) in k.iter().enumerate() {
            if B5[j] != 0.0 {
                y5 += kj * (h * B5[j]);
            }
            if B4[j] != 0.0 {
                y4 += kj * (h * B4[j]);
            }
        }
        let mut err = 0.0f64;
        for i in 0..n {
            let scale = INTEGRATE_ATOL + INTEGRATE_RTOL * y[i].abs().max(y5[i].abs());
            err = err.max(((y5[i] - y4[i]) / scale).abs());
        }
        let negative = y5.iter().any(|&v| v < -1e-12);
        if err <= 1.0 && !negative {
            t += h;
            for v in y5.iter_mut() {
                if *v < 0.0 {
                    *v = 0.0;
                }
            }
            y = y5;
            times.push(t);
            populations.push(y.iter().cloned().collect());
            let factor = if err > 0.0 { 0.9 * err.powf(-0.2) } else { 5.0 };
            h *= factor.clamp(0.2, 5.0);
        } else {
            h *= if negative { 0.5 } else { (0.9 * err.powf(-0.2)).clamp(0.1, 0.5) };
            if h < h_min {
                return Err(KineticsError::StepFailure(t));
            }
        }
    }
    Ok(PopulationTrajectory { times, populations })
}

/// PL rate Γ_rad·p_bright at steady state for each power.
pub fn pl_curve(net: &RateNetwork, powers: &[f64]) -> Result<Vec<(f64, f64)>, KineticsError> {
    let mut out = Vec::with_capacity(powers.len());
    for &p in powers {
        let rate = if p == 0.0 {
            0.0
        } else {
            let ss = steady_state(net, p)?;
            net.gamma_rad * ss[net.bright]
        };
        out.push((p, rate));
    }
    Ok(out)
}

/// (PL_on − PL_off)/PL_off at steady state for a microwave drive on one
/// T₀↔T± pair.
pub fn odmr_contrast(
    net: &RateNetwork,
    pair: MwPair,
    drive: f64,
    power: f64,
) -> Result<f64, KineticsError> {
    net.microwave_indices(pair)?;
    let off = steady_state(net, power)?;
    let on = steady_state_with(net, power, Some((pair, drive)))?;
    let pl_off = net.gamma_rad * off[net.bright];
    let pl_on = net.gamma_rad * on[net.bright];
    Ok((pl_on - pl_off) / pl_off)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const TWO_LEVEL: &str = "\
gamma_rad = 2e8
pump.per_power = 1e8
";

    fn default_config() -> RateConfig {
        RateConfig::parse(
            "\
gamma_rad = 3.5336e5
gamma_nonrad = 1.996466e8
pump.per_power = 1e8
isc_in_t0 = 1e6 assumed=true
isc_in_tplus = 1e6 assumed=true
isc_in_tminus = 1e6 assumed=true
isc_out_t0 = 1e5 assumed=true
isc_out_tplus = 1e4 assumed=true
isc_out_tminus = 1e4 assumed=true
ionization.per_power = 1e7 assumed=true
recapture.per_power = 1e6 assumed=true
",
        )
        .unwrap()
    }

    #[test]
    fn two_level_generator_columns_sum_to_zero() {
        let net = build_network(&RateConfig::parse(TWO_LEVEL).unwrap()).unwrap();
        assert_eq!(net.len(), 2);
        let g = net.generator(0.7, None);
        for j in 0..2 {
            let s: f64 = (0..2).map(|i| g[(i, j)]).sum();
            assert!(s.abs() <= 1e-12 * g[(j, j)].abs().max(1.0));
        }
    }

    #[test]
    fn default_network_topology() {
        let net = build_network(&default_config()).unwrap();
        assert_eq!(
            net.labels,
            vec!["ground", "bright", "t0", "t+", "t-", "ionized"]
        );
        let g = net.generator(1.0, None);
        for j in 0..net.len() {
            let s: f64 = (0..net.len()).map(|i| g[(i, j)]).sum();
            assert!(s.abs() <= 1e-9, "column {j} sums to {s}");
        }
    }

    #[test]
    fn selection_rule_enforced() {
        let mut cfg = default_config();
        cfg.rates.insert("isc_out_tplus".into(), 2e5);
        assert!(matches!(
            build_network(&cfg),
            Err(KineticsError::SelectionRuleViolation { .. })
        ));
    }

    #[test]
    fn two_level_saturation() {
        let net = build_network(&RateConfig::parse(TWO_LEVEL).unwrap()).unwrap();
        for power in [0.1, 1.0, 3.0, 10.0] {
            let p = steady_state(&net, power).unwrap();
            let pump = 1e8 * power;
            assert_relative_eq!(p[1], pump / (pump + 2e8), epsilon = 1e-8);
            assert_relative_eq!(p.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn zero_power_steady_state_is_ground() {
        let net = build_network(&RateConfig::parse(TWO_LEVEL).unwrap()).unwrap();
        let p = steady_state(&net, 0.0).unwrap();
        assert_relative_eq!(p[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(p[1], 0.0, epsilon = 1e-12);
        // long-time integration from the bright state agrees
        let traj = integrate(&net, &[0.0, 1.0], 1e-6, &|_| 0.0, &|_| None).unwrap();
        assert_relative_eq!(traj.last()[0], 1.0, epsilon = 1e-6);
    }

    #[test]
    fn isolated_absorbing_state_is_reducible() {
        // ionization channels configured but pump off: the ionized state is
        // a second closed class and the steady state is ambiguous
        let net = build_network(&default_config()).unwrap();
        assert!(matches!(steady_state(&net, 0.0), Err(KineticsError::Reducible(_))));
    }

    #[test]
    fn default_steady_state_valid_and_matches_integration() {
        let net = build_network(&default_config()).unwrap();
        let ss = steady_state(&net, 1.0).unwrap();
        assert_relative_eq!(ss.iter().sum::<f64>(), 1.0, epsilon = 1e-10);
        assert!(ss.iter().all(|&v| v >= 0.0));
        // long-time ODE limit: several multiples of the slowest timescale
        let mut init = vec![0.0; net.len()];
        init[0] = 1.0;
        let traj = integrate(&net, &init, 3e-3, &|_| 1.0, &|_| None).unwrap();
        for (a, b) in traj.last().iter().zip(&ss) {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn conservation_along_trajectories() {
        let net = build_network(&default_config()).unwrap();
        let mut init = vec![0.0; net.len()];
        init[0] = 1.0;
        // pulsed pump with a microwave window
        let power = |t: f64| if t < 1e-4 { 1.0 } else { 0.0 };
        let mw = |t: f64| if t > 5e-5 { Some((MwPair::T0Tplus, 1e6)) } else { None };
        let traj = integrate(&net, &init, 3e-4, &power, &mw).unwrap();
        for p in &traj.populations {
            let s: f64 = p.iter().sum();
            assert!((s - 1.0).abs() < 1e-9, "sum {s}");
            assert!(p.iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn two_level_decay_is_exponential() {
        let net = build_network(&RateConfig::parse(TWO_LEVEL).unwrap()).unwrap();
        let traj = integrate(&net, &[0.0, 1.0], 2e-8, &|_| 0.0, &|_| None).unwrap();
        for (t, p) in traj.times.iter().zip(&traj.populations) {
            assert!((p[1] - (-2e8 * t).exp()).abs() < 1e-6);
        }
    }

    #[test]
    fn shelved_triplet_decays_at_configured_rate() {
        let net = build_network(&default_config()).unwrap();
        let tp = net.index("t+").unwrap();
        let mut init = vec![0.0; net.len()];
        init[tp] = 1.0;
        let traj = integrate(&net, &init, 5e-5, &|_| 0.0, &|_| None).unwrap();
        // only outflow from T+ is isc_out_tplus = 1e4: exact exponential
        for (t, p) in traj.times.iter().zip(&traj.populations) {
            assert!((p[tp] - (-1e4 * t).exp()).abs() < 1e-6);
        }
    }

    #[test]
    fn constant_generator_zero_is_constant_trajectory() {
        let cfg = RateConfig::parse("gamma_rad = 0\npump.per_power = 0\n").unwrap();
        let net = build_network(&cfg).unwrap();
        let traj = integrate(&net, &[0.25, 0.75], 1e-3, &|_| 1.0, &|_| None).unwrap();
        for p in &traj.populations {
            assert_relative_eq!(p[0], 0.25, epsilon = 1e-12);
            assert_relative_eq!(p[1], 0.75, epsilon = 1e-12);
        }
    }

    #[test]
    fn saturation_curve_and_ionization_loss() {
        let two = build_network(&RateConfig::parse(TWO_LEVEL).unwrap()).unwrap();
        let powers: Vec<f64> = vec![0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0];
        let curve = pl_curve(&two, &powers).unwrap();
        assert_eq!(curve[0].1, 0.0);
        for (p, pl) in &curve[1..] {
            let pump = 1e8 * p;
            assert_relative_eq!(*pl, 2e8 * pump / (pump + 2e8), epsilon = 1e-6);
        }

        // same bright-state rates plus ionization: PL strictly below at high power
        let mut with_ion = RateConfig::parse(TWO_LEVEL).unwrap();
        with_ion.rates.insert("ionization.per_power".into(), 5e7);
        with_ion.rates.insert("recapture.per_power".into(), 1e6);
        let ion_net = build_network(&with_ion).unwrap();
        let ion_curve = pl_curve(&ion_net, &powers).unwrap();
        for ((_, a), (_, b)) in curve[1..].iter().zip(&ion_curve[1..]) {
            assert!(b < a, "ionization must cost PL: {b} !< {a}");
        }
        // sublinear beyond saturation: second difference ≤ 0
        for w in ion_curve[1..].windows(3) {
            let d2 = (w[2].1 - w[1].1) / (w[2].0 - w[1].0) - (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
            assert!(d2 <= 1e-9 * w[1].1.max(1.0));
        }
    }

    #[test]
    fn odmr_contrast_sign_and_symmetry() {
        let net = build_network(&default_config()).unwrap();
        // driving population out of the long-lived T± shelf helps PL
        let c = odmr_contrast(&net, MwPair::T0Tplus, 1e6, 1.0).unwrap();
        assert!(c > 0.0, "contrast {c}");
        assert_relative_eq!(odmr_contrast(&net, MwPair::T0Tminus, 0.0, 1.0).unwrap(), 0.0);

        // sublevel-independent ISC-out rates can carry no contrast
        let mut cfg = default_config();
        cfg.rates.insert("isc_out_tplus".into(), 1e5 - 1e-6);
        cfg.rates.insert("isc_out_tminus".into(), 1e5 - 1e-6);
        let flat = build_network(&cfg).unwrap();
        let c0 = odmr_contrast(&flat, MwPair::T0Tplus, 1e6, 1.0).unwrap();
        assert!(c0.abs() < 1e-9, "contrast {c0}");
    }

    #[test]
    fn no_pair_without_triplet() {
        let net = build_network(&RateConfig::parse(TWO_LEVEL).unwrap()).unwrap();
        assert!(matches!(
            odmr_contrast(&net, MwPair::T0Tplus, 1e6, 1.0),
            Err(KineticsError::NoSuchPair(_))
        ));
    }

    #[test]
    fn config_parse_errors() {
        assert!(matches!(
            RateConfig::parse("gamma_rad 2e8\n"),
            Err(KineticsError::MalformedLine(1, _))
        ));
        assert!(matches!(
            RateConfig::parse("gamma_rad = -1\n"),
            Err(KineticsError::NegativeRate(..))
        ));
        let cfg = RateConfig::parse("gamma_rad = 2e8\n").unwrap();
        assert!(matches!(build_network(&cfg), Err(KineticsError::MissingRate(k)) if k == "pump.per_power"));
    }
}
