//! Physics invariant suite behind the `selfcheck` CLI subcommand:
//! reciprocity, passivity, superposition, the 1/d³ distance law, the
//! cos θ rotation law, orthogonality nulls, coupling bounds, tuning
//! round trips, and the skin-depth reference point. Randomized checks
//! use fixed seeds and fail loudly on any violation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::CircuitModel;
use crate::error::Result;
use crate::magnetics::{
    coupling_coefficient, inductance_from_tuning, mutual_inductance_dipole,
    mutual_inductance_neumann, self_inductance, skin_depth, tuning_capacitance,
};
use crate::model::{CoilSpec, Medium, SteadyState, Tuning, Vec3};
use crate::scenarios::{
    build_fd_link, case_network, orientation_sweep, CaseId, FdLinkParams, RotationAxis,
    ORIENTATION_PRESET_DISTANCE,
};

/// Result of one invariant check.
#[derive(Clone, Debug)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn pass(name: &'static str, detail: String) -> Self {
        CheckOutcome { name, passed: true, detail }
    }
    fn fail(name: &'static str, detail: String) -> Self {
        CheckOutcome { name, passed: false, detail }
    }
    fn from_result(name: &'static str, result: Result<String>) -> Self {
        match result {
            Ok(detail) => CheckOutcome::pass(name, detail),
            Err(e) => CheckOutcome::fail(name, e.to_string()),
        }
    }
}

/// Runs every invariant check. Deterministic across runs.
pub fn run_all() -> Vec<CheckOutcome> {
    vec![
        CheckOutcome::from_result("tuning_roundtrip", tuning_roundtrip()),
        CheckOutcome::from_result("skin_depth_reference", skin_depth_reference()),
        CheckOutcome::from_result("impedance_symmetry", impedance_symmetry()),
        CheckOutcome::from_result("passivity", passivity()),
        CheckOutcome::from_result("superposition", superposition()),
        CheckOutcome::from_result("mutual_reciprocity", mutual_reciprocity()),
        CheckOutcome::from_result("distance_law", distance_law()),
        CheckOutcome::from_result("rotation_law", rotation_law()),
        CheckOutcome::from_result("orthogonality_nulls", orthogonality_nulls()),
        CheckOutcome::from_result("coupling_bound", coupling_bound()),
    ]
}

fn ensure(ok: bool, message: String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(crate::error::Error::Numerical(message))
    }
}

fn random_unit(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = Vec3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let n = v.norm();
        if (0.2..=1.0).contains(&n) {
            return v.scaled(1.0 / n);
        }
    }
}

fn random_loop(rng: &mut ChaCha8Rng, id: &str, center: Vec3) -> Result<CoilSpec> {
    let radius = rng.random_range(0.03..0.2);
    CoilSpec::new(id, center, random_unit(rng), radius, 1, 1e-4, Tuning::Capacitance(1e-9))
}

fn tuning_roundtrip() -> Result<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0_f64;
    for _ in 0..200 {
        let c = 10f64.powf(rng.random_range(-12.0..-6.0));
        let f = 10f64.powf(rng.random_range(2.0..7.0));
        let l = inductance_from_tuning(c, f)?;
        let back = tuning_capacitance(l, f)?;
        worst = worst.max((back - c).abs() / c);
    }
    ensure(worst <= 1e-12, format!("L<->C round trip drift {worst:.3e} > 1e-12"))?;
    Ok(format!("200 random L<->C round trips, worst relative drift {worst:.3e}"))
}

fn skin_depth_reference() -> Result<String> {
    let fresh = Medium::new(0.01, 1.0, 81.0)?;
    let delta = skin_depth(&fresh, 46_770.0)?;
    ensure(
        (delta - 23.3).abs() <= 0.1,
        format!("skin depth {delta:.4} m not within 23.3 +/- 0.1 m"),
    )?;
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let reference = delta * 0.01_f64.sqrt();
    for _ in 0..100 {
        let sigma = 10f64.powf(rng.random_range(-4.0..1.0));
        let medium = Medium::new(sigma, 1.0, 81.0)?;
        let scaled = skin_depth(&medium, 46_770.0)? * sigma.sqrt();
        ensure(
            (scaled - reference).abs() <= 1e-12 * reference,
            format!("delta*sqrt(sigma) drifts at sigma = {sigma}"),
        )?;
    }
    Ok(format!("delta(0.01 S/m, 46.77 kHz) = {delta:.4} m; delta*sqrt(sigma) constant"))
}

fn impedance_symmetry() -> Result<String> {
    let network = case_network(CaseId::Case3, &FdLinkParams::default())?;
    let model = CircuitModel::new(&network)?;
    for f in [30_000.0, 46_770.0, 60_000.0] {
        let z = model.impedance_matrix(f)?;
        for i in 0..z.n() {
            for j in 0..z.n() {
                ensure(
                    z.entry(i, j) == z.entry(j, i),
                    format!("Z[{i}][{j}] != Z[{j}][{i}] at {f} Hz"),
                )?;
            }
        }
    }
    Ok("Z exactly symmetric at 30/46.77/60 kHz".to_string())
}

fn passivity() -> Result<String> {
    let network = case_network(CaseId::Case3, &FdLinkParams::default())?;
    let model = CircuitModel::new(&network)?;
    let mut worst = 0.0_f64;
    for k in 0..33 {
        let f = 30_000.0 + 30_000.0 * k as f64 / 32.0;
        let state = model.solve(f)?;
        let rel = (state.source_power() - state.dissipated_power()).abs()
            / state.source_power().max(1.0);
        worst = worst.max(rel);
    }
    ensure(worst <= 1e-9, format!("energy imbalance {worst:.3e} > 1e-9"))?;
    Ok(format!("source power equals dissipated power, worst relative gap {worst:.3e}"))
}

fn superposition() -> Result<String> {
    // rotate node B so every coupling is non-zero; superposition must
    // still hold exactly on the linear network
    let params = FdLinkParams::default();
    let solve = |amp_a1: f64, amp_b2: f64| -> Result<SteadyState> {
        let mut p = params.clone();
        p.drive_amplitude = 1.0;
        let network = case_network(CaseId::Case3, &p)?;
        let mut drives = network.drives().to_vec();
        drives[0] = crate::model::Drive::current(amp_a1)?;
        drives[3] = crate::model::Drive::current(amp_b2)?;
        CircuitModel::new(&network.with_drives(drives)?)?.solve(p.f0)
    };
    let both = solve(1.0, 1.0)?;
    let first = solve(1.0, 0.0)?;
    let second = solve(0.0, 1.0)?;
    let mut worst = 0.0_f64;
    for i in 0..4 {
        let sum = first.currents()[i] + second.currents()[i];
        let got = both.currents()[i];
        worst = worst.max((got - sum).norm() / got.norm().max(1e-30));
    }
    ensure(worst <= 1e-9, format!("superposition drift {worst:.3e} > 1e-9"))?;
    Ok(format!("case3 equals case1 + case2 per coil, worst relative drift {worst:.3e}"))
}

fn mutual_reciprocity() -> Result<String> {
    let medium = Medium::default();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut worst_dipole = 0.0_f64;
    let mut worst_neumann = 0.0_f64;
    for _ in 0..24 {
        let x = rng.random_range(-1.0..1.0);
        let a = random_loop(&mut rng, "a", Vec3::new(x, 0.0, 0.0))?;
        let offset = random_unit(&mut rng).scaled(rng.random_range(0.8..2.0));
        let b = random_loop(&mut rng, "b", a.center() + offset)?;
        let ab = mutual_inductance_dipole(&a, &b, &medium)?.value;
        let ba = mutual_inductance_dipole(&b, &a, &medium)?.value;
        worst_dipole = worst_dipole.max((ab - ba).abs() / ab.abs().max(1e-300));
        let ab = mutual_inductance_neumann(&a, &b, &medium, 128)?.value;
        let ba = mutual_inductance_neumann(&b, &a, &medium, 128)?.value;
        worst_neumann = worst_neumann.max((ab - ba).abs() / ab.abs().max(1e-300));
    }
    ensure(
        worst_dipole <= 1e-12 && worst_neumann <= 1e-12,
        format!("reciprocity drift dipole {worst_dipole:.3e}, neumann {worst_neumann:.3e}"),
    )?;
    Ok(format!(
        "M(tx,rx) = M(rx,tx) over 24 random pairs (dipole {worst_dipole:.1e}, neumann {worst_neumann:.1e})"
    ))
}

fn distance_law() -> Result<String> {
    let params = FdLinkParams::default();
    let mut points = Vec::new();
    for k in 0..21 {
        let d = 1.0 + k as f64 / 20.0;
        let mut p = params.clone();
        p.node_distance = d;
        let network = case_network(CaseId::Case3, &p)?;
        let state = CircuitModel::new(&network)?.solve(p.f0)?;
        let b1 = network.coil_index("B1").expect("canonical id");
        points.push((d.ln(), state.magnitude(b1).ln()));
    }
    let slope = slope(&points);
    ensure((slope + 3.0).abs() <= 0.05, format!("|I_B1| log-log slope {slope:.4} not -3 +/- 0.05"))?;
    Ok(format!("|I_B1| vs distance follows 1/d^3 (slope {slope:.4} over 1..2 m)"))
}

fn rotation_law() -> Result<String> {
    let mut params = FdLinkParams::default();
    params.node_distance = ORIENTATION_PRESET_DISTANCE;
    let angles = [0.0, 15.0, 30.0, 45.0, 60.0, 75.0];
    let table = orientation_sweep(&params, &angles, RotationAxis::Vertical)?;
    let b1 = 2; // COIL_ORDER
    let base = table.rows()[0].phasors[b1].amps;
    let mut worst = 0.0_f64;
    for (k, &deg) in angles.iter().enumerate().skip(1) {
        let ratio = table.rows()[k].phasors[b1].amps / base;
        worst = worst.max((ratio - deg.to_radians().cos()).abs());
    }
    ensure(worst <= 1e-6, format!("cos-law drift {worst:.3e} > 1e-6"))?;
    Ok(format!("|I_B1(theta)|/|I_B1(0)| = cos(theta), worst drift {worst:.1e}"))
}

fn orthogonality_nulls() -> Result<String> {
    let dipole = build_fd_link(&FdLinkParams::default())?;
    let mut neumann_params = FdLinkParams::default();
    neumann_params.mutual_method = crate::magnetics::MutualMethod::Neumann;
    neumann_params.neumann_segments = 64;
    let neumann = build_fd_link(&neumann_params)?;
    let cross = [(0usize, 1usize), (0, 3), (1, 2), (2, 3)];
    for (i, j) in cross {
        ensure(
            dipole.mutual().get(i, j) == 0.0,
            format!("dipole cross coupling [{i}][{j}] not exactly zero"),
        )?;
        ensure(
            neumann.mutual().get(i, j).abs() < 1e-12,
            format!("neumann cross coupling [{i}][{j}] = {}", neumann.mutual().get(i, j)),
        )?;
    }
    Ok("all four cross couplings vanish (dipole exactly, neumann < 1e-12 H)".to_string())
}

fn coupling_bound() -> Result<String> {
    let medium = Medium::default();
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let mut max_k = 0.0_f64;
    for _ in 0..48 {
        let a = random_loop(&mut rng, "a", Vec3::ZERO)?;
        let direction = random_unit(&mut rng);
        let candidate = random_loop(&mut rng, "b", Vec3::ZERO)?;
        let d = (a.radius() + candidate.radius()) * rng.random_range(1.1..6.0);
        let b = candidate.with_pose(direction.scaled(d), random_unit(&mut rng))?;
        let m = mutual_inductance_neumann(&a, &b, &medium, 64)?.value;
        let la = self_inductance(&a)?;
        let lb = self_inductance(&b)?;
        let k = coupling_coefficient(m, la, lb)?.abs();
        max_k = max_k.max(k);
        ensure(k <= 1.0, format!("|k| = {k} exceeds 1"))?;
    }
    Ok(format!("|k| <= 1 over 48 random close pairs (max |k| = {max_k:.4})"))
}

fn slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}
