//! Impedance-matrix assembly and steady-state solution of a coupled
//! network under current- and voltage-source drives, plus frequency
//! sweeps.
//!
//! Each loop is a series RLC branch; loop `i` couples to loop `j`
//! through `jωM_ij`. Current sources pin their loop currents exactly and
//! the remaining loops solve
//!
//! `Z_pp I_p = V_p - Z_pd I_d`
//!
//! by dense LU with partial pivoting. The solver is pure per frequency;
//! sweep points are evaluated concurrently and assembled in sweep order.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec;
use crate::magnetics::{self_inductance, series_resistance, tuning_capacitance};
use crate::model::{CoupledNetwork, DriveKind, SteadyState, SweepTable, Tuning};
use crate::COPPER_RESISTIVITY;

use std::f64::consts::TAU;

/// Condition-number estimate above which a sweep row gets a warning.
pub const CONDITION_WARN_THRESHOLD: f64 = 1e12;

/// Complex impedance matrix of a network at one frequency:
/// `Z_ii = R_i + j(ωL_i - 1/(ωC_i))`, `Z_ij = jωM_ij`.
#[derive(Clone, Debug, PartialEq)]
pub struct ImpedanceMatrix {
    frequency: f64,
    entries: DMatrix<Complex64>,
}

impl ImpedanceMatrix {
    fn new(frequency: f64, entries: DMatrix<Complex64>) -> Result<Self> {
        for i in 0..entries.nrows() {
            if !(entries[(i, i)].re > 0.0) {
                return Err(Error::Numerical(format!(
                    "impedance diagonal {i} has non-positive real part at {frequency} Hz"
                )));
            }
        }
        Ok(ImpedanceMatrix { frequency, entries })
    }

    pub fn frequency(&self) -> f64 {
        self.frequency
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.entries[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<Complex64> {
        &self.entries
    }
}

/// A network with its lumped elements resolved: per-coil series
/// resistance, self-inductance (formula or override), and tuning
/// capacitance (explicit or derived from `tune_to`). Resolution happens
/// once; sweeps reuse it at every frequency.
#[derive(Clone, Debug)]
pub struct CircuitModel<'n> {
    network: &'n CoupledNetwork,
    resistance: Vec<f64>,
    inductance: Vec<f64>,
    capacitance: Vec<f64>,
}

impl<'n> CircuitModel<'n> {
    pub fn new(network: &'n CoupledNetwork) -> Result<Self> {
        let mut resistance = Vec::with_capacity(network.len());
        let mut inductance = Vec::with_capacity(network.len());
        let mut capacitance = Vec::with_capacity(network.len());
        for coil in network.coils() {
            let l = match coil.inductance_override() {
                Some(l) => l,
                None => self_inductance(coil).map_err(|e| {
                    Error::Config(format!("coil '{}': cannot resolve inductance: {e}", coil.id()))
                })?,
            };
            let c = match coil.tuning() {
                Tuning::Capacitance(c) => c,
                Tuning::TuneTo(f0) => tuning_capacitance(l, f0).map_err(|e| {
                    Error::Config(format!("coil '{}': cannot resolve tuning: {e}", coil.id()))
                })?,
            };
            let r = series_resistance(coil, COPPER_RESISTIVITY)?;
            resistance.push(r);
            inductance.push(l);
            capacitance.push(c);
        }
        Ok(CircuitModel { network, resistance, inductance, capacitance })
    }

    pub fn network(&self) -> &CoupledNetwork {
        self.network
    }
    pub fn resistance(&self) -> &[f64] {
        &self.resistance
    }
    pub fn inductance(&self) -> &[f64] {
        &self.inductance
    }
    pub fn capacitance(&self) -> &[f64] {
        &self.capacitance
    }

    pub fn impedance_matrix(&self, frequency: f64) -> Result<ImpedanceMatrix> {
        if !(frequency > 0.0) || !frequency.is_finite() {
            return Err(Error::Parameter(format!("frequency must be > 0, got {frequency}")));
        }
        let n = self.network.len();
        let omega = TAU * frequency;
        let mut entries = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
        for i in 0..n {
            let reactance = omega * self.inductance[i] - 1.0 / (omega * self.capacitance[i]);
            entries[(i, i)] = Complex64::new(self.resistance[i], reactance);
            for j in (i + 1)..n {
                let off = Complex64::new(0.0, omega * self.network.mutual().get(i, j));
                entries[(i, j)] = off;
                entries[(j, i)] = off;
            }
        }
        ImpedanceMatrix::new(frequency, entries)
    }

    /// Steady-state loop currents at one frequency. Loops with current
    /// sources are pinned to their phasors; passive and voltage-driven
    /// loops are solved together.
    pub fn solve(&self, frequency: f64) -> Result<SteadyState> {
        let n = self.network.len();
        let drives = self.network.drives();
        if !self.network.has_source() {
            return Err(Error::Config("all-passive network: no drive to excite it".into()));
        }
        let z = self.impedance_matrix(frequency)?;

        let pinned: Vec<usize> =
            (0..n).filter(|&i| drives[i].kind() == DriveKind::CurrentSource).collect();
        let free: Vec<usize> =
            (0..n).filter(|&i| drives[i].kind() != DriveKind::CurrentSource).collect();

        let mut currents = vec![Complex64::new(0.0, 0.0); n];
        for &i in &pinned {
            currents[i] = drives[i].phasor();
        }

        let condition = if free.is_empty() {
            1.0
        } else {
            let np = free.len();
            let zpp = DMatrix::from_fn(np, np, |r, c| z.entry(free[r], free[c]));
            let mut rhs = DVector::from_fn(np, |r, _| match drives[free[r]].kind() {
                DriveKind::VoltageSource => drives[free[r]].phasor(),
                _ => Complex64::new(0.0, 0.0),
            });
            for (r, &i) in free.iter().enumerate() {
                for &d in &pinned {
                    rhs[r] -= z.entry(i, d) * currents[d];
                }
            }
            let condition = condition_estimate(&zpp);
            let solution = zpp.lu().solve(&rhs).ok_or_else(|| {
                Error::Numerical(format!(
                    "singular impedance matrix on the passive partition at {frequency} Hz"
                ))
            })?;
            for (r, &i) in free.iter().enumerate() {
                currents[i] = solution[r];
            }
            condition
        };

        // Power delivered by each non-passive loop is Re{(Z I)_i conj(I_i)};
        // for passive loops (Z I)_i = 0 by KVL.
        let mut source_power = 0.0;
        for i in 0..n {
            if drives[i].kind() == DriveKind::Passive {
                continue;
            }
            let branch_voltage: Complex64 =
                (0..n).map(|j| z.entry(i, j) * currents[j]).sum();
            source_power += (branch_voltage * currents[i].conj()).re;
        }
        let dissipated: f64 =
            (0..n).map(|i| currents[i].norm_sqr() * self.resistance[i]).sum();

        SteadyState::new(frequency, currents, source_power, dissipated, condition)
    }
}

/// 1-norm condition estimate of a complex matrix via explicit inversion
/// (the solver works on a handful of loops, so this is cheap). Singular
/// matrices report infinity.
pub(crate) fn condition_estimate(m: &DMatrix<Complex64>) -> f64 {
    match m.clone().try_inverse() {
        Some(inv) => one_norm(m) * one_norm(&inv),
        None => f64::INFINITY,
    }
}

fn one_norm(m: &DMatrix<Complex64>) -> f64 {
    let mut best = 0.0_f64;
    for c in 0..m.ncols() {
        let sum: f64 = (0..m.nrows()).map(|r| m[(r, c)].norm()).sum();
        best = best.max(sum);
    }
    best
}

// ---------------------------------------------------------------------------
// Frequency sweep

/// Spacing of the frequency grid.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrequencySweepSpacing {
    #[default]
    Linear,
    Log,
}

/// `steps` grid values over `[min, max]`. A single step collapses to
/// `min` (and then `min == max` is allowed).
pub(crate) fn grid(min: f64, max: f64, steps: usize, spacing: FrequencySweepSpacing) -> Result<Vec<f64>> {
    if steps == 0 {
        return Err(Error::Parameter("sweep needs at least one step".into()));
    }
    if !min.is_finite() || !max.is_finite() {
        return Err(Error::Parameter("sweep bounds must be finite".into()));
    }
    if steps == 1 {
        if !(min <= max) {
            return Err(Error::Parameter(format!("sweep bounds out of order: {min} > {max}")));
        }
        return Ok(vec![min]);
    }
    if !(min < max) {
        return Err(Error::Parameter(format!(
            "sweep needs min < max for {steps} steps, got [{min}, {max}]"
        )));
    }
    if spacing == FrequencySweepSpacing::Log && !(min > 0.0) {
        return Err(Error::Parameter("log spacing needs min > 0".into()));
    }
    let last = (steps - 1) as f64;
    let values = (0..steps)
        .map(|k| {
            let t = k as f64 / last;
            match spacing {
                FrequencySweepSpacing::Linear => min + (max - min) * t,
                FrequencySweepSpacing::Log => (min.ln() + (max.ln() - min.ln()) * t).exp(),
            }
        })
        .collect();
    Ok(values)
}

/// Collects per-point solutions into a table, annotating the first
/// failure with its sweep point and attaching ill-conditioning warnings.
pub(crate) fn assemble_sweep(
    variable_name: &str,
    coil_ids: Vec<String>,
    values: &[f64],
    results: Vec<Result<SteadyState>>,
) -> Result<SweepTable> {
    let mut states = Vec::with_capacity(results.len());
    for (k, result) in results.into_iter().enumerate() {
        match result {
            Ok(state) => states.push(state),
            Err(e) => return Err(e.with_context(&format!("at {variable_name} = {}", values[k]))),
        }
    }
    let mut table = SweepTable::from_solutions(variable_name, coil_ids, values, &states)?;
    for (k, state) in states.iter().enumerate() {
        if state.condition_estimate() > CONDITION_WARN_THRESHOLD {
            table.add_warning(format!(
                "row {k} ({variable_name} = {}): condition estimate {:.3e} exceeds {CONDITION_WARN_THRESHOLD:.0e}",
                values[k],
                state.condition_estimate()
            ));
        }
    }
    Ok(table)
}

/// Solves the network at `steps` frequencies spanning `[f_min, f_max]`.
pub fn frequency_sweep(
    network: &CoupledNetwork,
    f_min: f64,
    f_max: f64,
    steps: usize,
    spacing: FrequencySweepSpacing,
) -> Result<SweepTable> {
    if !(f_min > 0.0) {
        return Err(Error::Parameter("frequency sweep needs f_min > 0".into()));
    }
    let values = grid(f_min, f_max, steps, spacing)?;
    let model = CircuitModel::new(network)?;
    let results = exec::map_ordered(values.len(), |k| model.solve(values[k]));
    assemble_sweep("frequency_hz", network.coil_ids(), &values, results)
}

/// Series resonance `f0 = 1 / (2 pi sqrt(L C))`.
pub fn resonant_frequency(inductance: f64, capacitance: f64) -> Result<f64> {
    if !(inductance > 0.0) || !(capacitance > 0.0) {
        return Err(Error::Parameter("resonant_frequency needs L > 0 and C > 0".into()));
    }
    Ok(1.0 / (TAU * (inductance * capacitance).sqrt()))
}

/// Convenience wrappers over [`CircuitModel`] for single calls.
pub fn impedance_matrix(network: &CoupledNetwork, frequency: f64) -> Result<ImpedanceMatrix> {
    CircuitModel::new(network)?.impedance_matrix(frequency)
}

pub fn solve_steady_state(network: &CoupledNetwork, frequency: f64) -> Result<SteadyState> {
    CircuitModel::new(network)?.solve(frequency)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CoilSpec, Drive, Medium, MutualMatrix, Vec3};

    const F0: f64 = 46770.0;
    const L_V: f64 = 2.463812563954066e-3; // 1/((2 pi f0)^2 4.7nF)
    const M_AB: f64 = 9.138522593601258e-6;
    const R_V: f64 = 7.475970096119616;

    fn tuned_coil(id: &str, x: f64) -> CoilSpec {
        CoilSpec::new(id, Vec3::new(x, 0.0, 0.0), Vec3::X, 0.1, 100, 2.12e-4, Tuning::Capacitance(4.7e-9))
            .unwrap()
            .with_inductance_override(L_V)
            .unwrap()
    }

    fn two_coil_link(m: f64, drives: Vec<Drive>) -> CoupledNetwork {
        let coils = vec![tuned_coil("A1", 0.0), tuned_coil("B1", 0.6)];
        let mut mutual = MutualMatrix::zeros(2);
        mutual.set(0, 1, m);
        CoupledNetwork::new(coils, Medium::default(), mutual, drives).unwrap()
    }

    #[test]
    fn single_coil_reactance_cancels_at_resonance() {
        let net = two_coil_link(0.0, vec![Drive::current(1.0).unwrap(), Drive::passive()]);
        let z = impedance_matrix(&net, F0).unwrap();
        let z11 = z.entry(0, 0);
        assert!(z11.im.abs() <= 1e-9 * z11.norm(), "X = {}", z11.im);
        assert_eq!(z.entry(0, 1), Complex64::new(0.0, 0.0), "uncoupled off-diagonal");
    }

    #[test]
    fn off_diagonal_is_omega_m() {
        let net = two_coil_link(M_AB, vec![Drive::current(1.0).unwrap(), Drive::passive()]);
        let z = impedance_matrix(&net, F0).unwrap();
        let expect = 2.685488074699301; // 2 pi 46770 * M_AB
        assert!((z.entry(0, 1).im - expect).abs() <= 1e-9 * expect);
        assert_eq!(z.entry(0, 1), z.entry(1, 0));
    }

    // Independent route: the two-loop link has the closed form
    // I_rx = -j w M I_tx / (R + j(wL - 1/(wC))).
    #[test]
    fn two_coil_solve_matches_closed_form() {
        let net = two_coil_link(M_AB, vec![Drive::current(1.0).unwrap(), Drive::passive()]);
        for f in [F0, 40_000.0, 52_345.0] {
            let state = solve_steady_state(&net, f).unwrap();
            let w = TAU * f;
            let z_rx = Complex64::new(R_V, w * L_V - 1.0 / (w * 4.7e-9));
            let expect = -Complex64::new(0.0, w * M_AB) / z_rx;
            let got = state.currents()[1];
            assert!((got - expect).norm() <= 1e-9 * expect.norm(), "f = {f}: {got} vs {expect}");
        }
        // at resonance the magnitude reduces to wM/R
        let state = solve_steady_state(&net, F0).unwrap();
        assert!((state.magnitude(1) - 0.359216000087159).abs() <= 1e-9 * 0.36);
    }

    #[test]
    fn decoupled_passive_loop_carries_exactly_zero() {
        let net = two_coil_link(0.0, vec![Drive::current(1.0).unwrap(), Drive::passive()]);
        let state = solve_steady_state(&net, F0).unwrap();
        assert_eq!(state.currents()[1], Complex64::new(0.0, 0.0));
        assert_eq!(state.magnitude(0), 1.0);
    }

    #[test]
    fn voltage_driven_coil_at_resonance() {
        let net = two_coil_link(0.0, vec![Drive::voltage(1.0).unwrap(), Drive::passive()]);
        let state = solve_steady_state(&net, F0).unwrap();
        let expect = 1.0 / R_V;
        assert!((state.magnitude(0) - expect).abs() <= 1e-9 * expect);
    }

    #[test]
    fn all_passive_network_is_a_configuration_error() {
        let net = two_coil_link(M_AB, vec![Drive::passive(), Drive::passive()]);
        assert!(matches!(solve_steady_state(&net, F0), Err(Error::Config(_))));
    }

    #[test]
    fn energy_balance_holds_across_the_band() {
        let net = two_coil_link(M_AB, vec![Drive::current(1.0).unwrap(), Drive::passive()]);
        for f in [31_000.0, 40_000.0, F0, 55_500.0] {
            let state = solve_steady_state(&net, f).unwrap();
            let imbalance = (state.source_power() - state.dissipated_power()).abs();
            assert!(imbalance <= 1e-9 * state.source_power().max(1.0), "f = {f}");
        }
    }

    #[test]
    fn superposition_of_two_current_sources() {
        // three coupled loops, sources on 0 and 2
        let coils = vec![tuned_coil("a", 0.0), tuned_coil("b", 0.4), tuned_coil("c", 0.9)];
        let mut mutual = MutualMatrix::zeros(3);
        mutual.set(0, 1, 4e-6);
        mutual.set(1, 2, 2.5e-6);
        mutual.set(0, 2, 0.8e-6);
        let drives = |a0: f64, a2: f64| {
            vec![
                Drive::new(DriveKind::CurrentSource, a0, 0.0).unwrap(),
                Drive::passive(),
                Drive::new(DriveKind::CurrentSource, a2, 0.4).unwrap(),
            ]
        };
        let net = |a0, a2| {
            CoupledNetwork::new(coils.clone(), Medium::default(), mutual.clone(), drives(a0, a2)).unwrap()
        };
        let f = 43_210.0;
        let both = solve_steady_state(&net(1.0, 0.7), f).unwrap();
        let only0 = solve_steady_state(&net(1.0, 0.0), f).unwrap();
        let only2 = solve_steady_state(&net(0.0, 0.7), f).unwrap();
        for i in 0..3 {
            let sum = only0.currents()[i] + only2.currents()[i];
            let got = both.currents()[i];
            assert!(
                (got - sum).norm() <= 1e-9 * got.norm().max(1e-30),
                "coil {i}: {got} vs {sum}"
            );
        }
    }

    #[test]
    fn transfer_reciprocity_for_identical_pair() {
        let forward = two_coil_link(M_AB, vec![Drive::current(1.0).unwrap(), Drive::passive()]);
        let back = two_coil_link(M_AB, vec![Drive::passive(), Drive::current(1.0).unwrap()]);
        let f = 48_400.0;
        let i_fwd = solve_steady_state(&forward, f).unwrap().currents()[1];
        let i_bwd = solve_steady_state(&back, f).unwrap().currents()[0];
        assert!((i_fwd - i_bwd).norm() <= 1e-9 * i_fwd.norm());
    }

    #[test]
    fn sweep_peaks_at_the_shared_resonance() {
        let net = two_coil_link(M_AB, vec![Drive::current(1.0).unwrap(), Drive::passive()]);
        let table = frequency_sweep(&net, 30_000.0, 60_000.0, 301, FrequencySweepSpacing::Linear).unwrap();
        assert_eq!(table.rows().len(), 301);
        let peak_row = table.argmax_magnitude(1);
        let peak_f = table.rows()[peak_row].variable;
        assert!((peak_f - F0).abs() <= 100.0, "peak at {peak_f}");
        assert!(table.warnings().is_empty());
        // pinned source shows as a constant column
        assert!(table.magnitudes(0).iter().all(|&a| a == 1.0));
    }

    #[test]
    fn doubling_steps_reproduces_shared_grid_points() {
        let net = two_coil_link(M_AB, vec![Drive::current(1.0).unwrap(), Drive::passive()]);
        let coarse = frequency_sweep(&net, 30_000.0, 60_000.0, 301, FrequencySweepSpacing::Linear).unwrap();
        let fine = frequency_sweep(&net, 30_000.0, 60_000.0, 601, FrequencySweepSpacing::Linear).unwrap();
        for (k, row) in coarse.rows().iter().enumerate() {
            let twin = &fine.rows()[2 * k];
            assert_eq!(row.variable, twin.variable, "grid point {k}");
            for (a, b) in row.phasors.iter().zip(&twin.phasors) {
                assert!((a.amps - b.amps).abs() <= 1e-12 * a.amps.max(1e-30));
            }
        }
    }

    #[test]
    fn sweep_parameter_validation() {
        let net = two_coil_link(M_AB, vec![Drive::current(1.0).unwrap(), Drive::passive()]);
        assert!(frequency_sweep(&net, 60_000.0, 30_000.0, 11, FrequencySweepSpacing::Linear).is_err());
        assert!(frequency_sweep(&net, 30_000.0, 60_000.0, 0, FrequencySweepSpacing::Linear).is_err());
        assert!(frequency_sweep(&net, -1.0, 60_000.0, 11, FrequencySweepSpacing::Linear).is_err());
        let single = frequency_sweep(&net, F0, F0, 1, FrequencySweepSpacing::Linear).unwrap();
        assert_eq!(single.rows().len(), 1);
    }

    #[test]
    fn log_spacing_is_monotone_and_hits_bounds() {
        let values = grid(1e3, 1e6, 31, FrequencySweepSpacing::Log).unwrap();
        assert_eq!(values.len(), 31);
        assert!((values[0] - 1e3).abs() < 1e-9);
        assert!((values[30] - 1e6).abs() < 1e-3);
        assert!(values.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn resonant_frequency_reference_and_scaling() {
        let f = resonant_frequency(L_V, 4.7e-9).unwrap();
        assert!((f - F0).abs() <= 1e-9 * F0, "f0 = {f}");
        let f = resonant_frequency(4.726497571666983e-3, 2.45e-9).unwrap();
        assert!((f - F0).abs() <= 1e-9 * F0, "f0 = {f}");
        let quad = resonant_frequency(4.0 * L_V, 4.7e-9).unwrap();
        assert_eq!(quad, resonant_frequency(L_V, 4.7e-9).unwrap() / 2.0);
    }

    #[test]
    fn condition_estimate_flags_near_singular_matrices() {
        let well = DMatrix::from_row_slice(2, 2, &[
            Complex64::new(7.5, 0.0), Complex64::new(0.0, 2.7),
            Complex64::new(0.0, 2.7), Complex64::new(7.5, 0.0),
        ]);
        assert!(condition_estimate(&well) < 10.0);

        let near = DMatrix::from_row_slice(2, 2, &[
            Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 0.0), Complex64::new(1.0 + 1e-13, 0.0),
        ]);
        assert!(condition_estimate(&near) > CONDITION_WARN_THRESHOLD);
    }

    #[test]
    fn tune_to_resolves_the_capacitance() {
        let coil = CoilSpec::new("t", Vec3::ZERO, Vec3::X, 0.1, 100, 2.12e-4, Tuning::TuneTo(F0))
            .unwrap()
            .with_inductance_override(L_V)
            .unwrap();
        let net = CoupledNetwork::new(
            vec![coil],
            Medium::default(),
            MutualMatrix::zeros(1),
            vec![Drive::current(1.0).unwrap()],
        )
        .unwrap();
        let model = CircuitModel::new(&net).unwrap();
        assert!((model.capacitance()[0] - 4.7e-9).abs() <= 1e-12 * 4.7e-9);
        let z = model.impedance_matrix(F0).unwrap();
        assert!(z.entry(0, 0).im.abs() <= 1e-9 * z.entry(0, 0).norm());
    }
}
