//! Core domain types: coils, media, drives, coupled networks, solver
//! output, and sweep tables.
//!
//! Every type validates its invariants at construction; `serde`
//! deserialization goes through the same checks, so an instance that
//! exists is valid. All types are immutable after construction and safe
//! to share across threads.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::DEFAULT_WIRE_RADIUS;

/// Tolerance on the Euclidean norm of a coil normal.
pub const UNIT_NORM_TOL: f64 = 1e-9;

/// Relative tolerance on the steady-state energy balance.
pub const ENERGY_BALANCE_TOL: f64 = 1e-9;

// ---------------------------------------------------------------------------
// Vec3

/// Cartesian triple. Meters for positions, dimensionless for unit normals.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const X: Vec3 = Vec3 { x: 1.0, y: 0.0, z: 0.0 };
    pub const Y: Vec3 = Vec3 { x: 0.0, y: 1.0, z: 0.0 };
    pub const Z: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 1.0 };
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, other: Vec3) -> Vec3 {
        Vec3 {
            x: self.y * other.z - self.z * other.y,
            y: self.z * other.x - self.x * other.z,
            z: self.x * other.y - self.y * other.x,
        }
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn scaled(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// True when the norm is 1 within [`UNIT_NORM_TOL`].
    pub fn is_unit(self) -> bool {
        (self.norm() - 1.0).abs() <= UNIT_NORM_TOL
    }

    /// Rodrigues rotation of `self` about the unit `axis` by `angle` radians.
    pub fn rotated_about(self, axis: Vec3, angle: f64) -> Vec3 {
        let (sin, cos) = angle.sin_cos();
        let cross = axis.cross(self);
        let along = axis.scaled(axis.dot(self) * (1.0 - cos));
        Vec3::new(
            self.x * cos + cross.x * sin + along.x,
            self.y * cos + cross.y * sin + along.y,
            self.z * cos + cross.z * sin + along.z,
        )
    }
}

impl std::ops::Add for Vec3 {
    type Output = Vec3;
    fn add(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl std::ops::Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl std::ops::Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

// ---------------------------------------------------------------------------
// CoilSpec

/// Series tuning element of a coil: either an explicit capacitance or a
/// request to auto-tune the loop to a resonant frequency. Exactly one of
/// the two is present.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Tuning {
    /// Series tuning capacitor, farads.
    Capacitance(f64),
    /// Derive the capacitor so the loop resonates at this frequency, Hz.
    TuneTo(f64),
}

/// Physical description of one tuned loop.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CoilSpecRaw", into = "CoilSpecRaw")]
pub struct CoilSpec {
    id: String,
    center: Vec3,
    normal: Vec3,
    radius: f64,
    turns: u32,
    wire_radius: f64,
    tuning: Tuning,
    inductance_override: Option<f64>,
}

impl CoilSpec {
    /// Validates and builds a coil. `normal` must already be a unit vector.
    pub fn new(
        id: impl Into<String>,
        center: Vec3,
        normal: Vec3,
        radius: f64,
        turns: u32,
        wire_radius: f64,
        tuning: Tuning,
    ) -> Result<Self> {
        let id = id.into();
        let fail = |reason: &str| Error::Parameter(format!("coil '{id}': {reason}"));
        if id.is_empty() {
            return Err(Error::Parameter("coil id must be non-empty".into()));
        }
        if !center.is_finite() {
            return Err(fail("center must be finite"));
        }
        if !normal.is_finite() || !normal.is_unit() {
            return Err(fail("normal must be a unit vector (norm = 1 within 1e-9)"));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(fail("radius must be > 0"));
        }
        if turns < 1 {
            return Err(fail("turns must be >= 1"));
        }
        if !(wire_radius > 0.0) || !wire_radius.is_finite() {
            return Err(fail("wire_radius must be > 0"));
        }
        if wire_radius >= radius {
            return Err(fail("wire_radius must be smaller than the loop radius"));
        }
        match tuning {
            Tuning::Capacitance(c) if !(c > 0.0) || !c.is_finite() => {
                return Err(fail("capacitance must be > 0"));
            }
            Tuning::TuneTo(f) if !(f > 0.0) || !f.is_finite() => {
                return Err(fail("tune_to must be > 0"));
            }
            _ => {}
        }
        Ok(CoilSpec {
            id,
            center,
            normal,
            radius,
            turns,
            wire_radius,
            tuning,
            inductance_override: None,
        })
    }

    /// Sets an explicit self-inductance, bypassing the loop formula.
    pub fn with_inductance_override(mut self, henries: f64) -> Result<Self> {
        if !(henries > 0.0) || !henries.is_finite() {
            return Err(Error::Parameter(format!(
                "coil '{}': inductance override must be > 0",
                self.id
            )));
        }
        self.inductance_override = Some(henries);
        Ok(self)
    }

    /// Same coil at a different pose.
    pub fn with_pose(mut self, center: Vec3, normal: Vec3) -> Result<Self> {
        if !center.is_finite() {
            return Err(Error::Parameter(format!("coil '{}': center must be finite", self.id)));
        }
        if !normal.is_finite() || !normal.is_unit() {
            return Err(Error::Parameter(format!("coil '{}': normal must be a unit vector", self.id)));
        }
        self.center = center;
        self.normal = normal;
        Ok(self)
    }

    pub fn id(&self) -> &str {
        &self.id
    }
    pub fn center(&self) -> Vec3 {
        self.center
    }
    pub fn normal(&self) -> Vec3 {
        self.normal
    }
    pub fn radius(&self) -> f64 {
        self.radius
    }
    pub fn turns(&self) -> u32 {
        self.turns
    }
    pub fn wire_radius(&self) -> f64 {
        self.wire_radius
    }
    pub fn tuning(&self) -> Tuning {
        self.tuning
    }
    pub fn inductance_override(&self) -> Option<f64> {
        self.inductance_override
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CoilSpecRaw {
    id: String,
    center_m: Vec3,
    normal: Vec3,
    radius_m: f64,
    turns: u32,
    #[serde(default = "default_wire_radius")]
    wire_radius_m: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    capacitance_f: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tune_to_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    inductance_override_h: Option<f64>,
}

fn default_wire_radius() -> f64 {
    DEFAULT_WIRE_RADIUS
}

impl TryFrom<CoilSpecRaw> for CoilSpec {
    type Error = Error;
    fn try_from(raw: CoilSpecRaw) -> Result<Self> {
        let tuning = match (raw.capacitance_f, raw.tune_to_hz) {
            (Some(c), None) => Tuning::Capacitance(c),
            (None, Some(f)) => Tuning::TuneTo(f),
            (Some(_), Some(_)) => {
                return Err(Error::Config(format!(
                    "coil '{}': `capacitance_f` and `tune_to_hz` are mutually exclusive",
                    raw.id
                )));
            }
            (None, None) => {
                return Err(Error::Config(format!(
                    "coil '{}': exactly one of `capacitance_f` or `tune_to_hz` is required",
                    raw.id
                )));
            }
        };
        let coil = CoilSpec::new(
            raw.id,
            raw.center_m,
            raw.normal,
            raw.radius_m,
            raw.turns,
            raw.wire_radius_m,
            tuning,
        )?;
        match raw.inductance_override_h {
            Some(h) => coil.with_inductance_override(h),
            None => Ok(coil),
        }
    }
}

impl From<CoilSpec> for CoilSpecRaw {
    fn from(coil: CoilSpec) -> Self {
        let (capacitance_f, tune_to_hz) = match coil.tuning {
            Tuning::Capacitance(c) => (Some(c), None),
            Tuning::TuneTo(f) => (None, Some(f)),
        };
        CoilSpecRaw {
            id: coil.id,
            center_m: coil.center,
            normal: coil.normal,
            radius_m: coil.radius,
            turns: coil.turns,
            wire_radius_m: coil.wire_radius,
            capacitance_f,
            tune_to_hz,
            inductance_override_h: coil.inductance_override,
        }
    }
}

// ---------------------------------------------------------------------------
// Medium

/// Surrounding medium. Conductivity drives the skin-depth check; the
/// permittivity is informational only at these frequencies.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MediumRaw", into = "MediumRaw")]
pub struct Medium {
    conductivity: f64,
    relative_permeability: f64,
    relative_permittivity: f64,
}

impl Medium {
    pub fn new(conductivity: f64, relative_permeability: f64, relative_permittivity: f64) -> Result<Self> {
        if !(conductivity >= 0.0) || !conductivity.is_finite() {
            return Err(Error::Parameter("medium conductivity must be >= 0".into()));
        }
        if !(relative_permeability > 0.0) || !relative_permeability.is_finite() {
            return Err(Error::Parameter("medium relative permeability must be > 0".into()));
        }
        if !(relative_permittivity > 0.0) || !relative_permittivity.is_finite() {
            return Err(Error::Parameter("medium relative permittivity must be > 0".into()));
        }
        Ok(Medium { conductivity, relative_permeability, relative_permittivity })
    }

    /// Fresh water: 0.01 S/m, non-magnetic.
    pub fn fresh_water() -> Self {
        Medium { conductivity: 0.01, relative_permeability: 1.0, relative_permittivity: 81.0 }
    }

    pub fn conductivity(&self) -> f64 {
        self.conductivity
    }
    pub fn relative_permeability(&self) -> f64 {
        self.relative_permeability
    }
    pub fn relative_permittivity(&self) -> f64 {
        self.relative_permittivity
    }
}

impl Default for Medium {
    fn default() -> Self {
        Medium::fresh_water()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MediumRaw {
    conductivity_s_per_m: f64,
    #[serde(default = "one")]
    relative_permeability: f64,
    #[serde(default = "eighty_one")]
    relative_permittivity: f64,
}

fn one() -> f64 {
    1.0
}
fn eighty_one() -> f64 {
    81.0
}

impl TryFrom<MediumRaw> for Medium {
    type Error = Error;
    fn try_from(raw: MediumRaw) -> Result<Self> {
        Medium::new(raw.conductivity_s_per_m, raw.relative_permeability, raw.relative_permittivity)
    }
}

impl From<Medium> for MediumRaw {
    fn from(m: Medium) -> Self {
        MediumRaw {
            conductivity_s_per_m: m.conductivity,
            relative_permeability: m.relative_permeability,
            relative_permittivity: m.relative_permittivity,
        }
    }
}

// ---------------------------------------------------------------------------
// Drive

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriveKind {
    CurrentSource,
    VoltageSource,
    Passive,
}

/// Excitation applied to one loop. A zero-amplitude current source pins
/// the loop current to zero; a passive loop is closed and free to carry
/// induced current.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DriveRaw", into = "DriveRaw")]
pub struct Drive {
    kind: DriveKind,
    amplitude: f64,
    phase: f64,
}

impl Drive {
    pub fn new(kind: DriveKind, amplitude: f64, phase: f64) -> Result<Self> {
        if !(amplitude >= 0.0) || !amplitude.is_finite() {
            return Err(Error::Parameter("drive amplitude must be >= 0".into()));
        }
        if !phase.is_finite() {
            return Err(Error::Parameter("drive phase must be finite".into()));
        }
        if kind == DriveKind::Passive && amplitude != 0.0 {
            return Err(Error::Parameter("passive drive must have zero amplitude".into()));
        }
        Ok(Drive { kind, amplitude, phase })
    }

    pub fn passive() -> Self {
        Drive { kind: DriveKind::Passive, amplitude: 0.0, phase: 0.0 }
    }

    /// Ideal current source, amperes, zero phase.
    pub fn current(amplitude: f64) -> Result<Self> {
        Drive::new(DriveKind::CurrentSource, amplitude, 0.0)
    }

    /// Ideal voltage source, volts, zero phase.
    pub fn voltage(amplitude: f64) -> Result<Self> {
        Drive::new(DriveKind::VoltageSource, amplitude, 0.0)
    }

    pub fn kind(&self) -> DriveKind {
        self.kind
    }
    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }
    pub fn phase(&self) -> f64 {
        self.phase
    }

    /// Complex amplitude under the e^{+jωt} convention.
    pub fn phasor(&self) -> Complex64 {
        Complex64::from_polar(self.amplitude, self.phase)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DriveRaw {
    kind: DriveKind,
    #[serde(default)]
    amplitude: f64,
    #[serde(default)]
    phase_rad: f64,
}

impl TryFrom<DriveRaw> for Drive {
    type Error = Error;
    fn try_from(raw: DriveRaw) -> Result<Self> {
        Drive::new(raw.kind, raw.amplitude, raw.phase_rad)
    }
}

impl From<Drive> for DriveRaw {
    fn from(d: Drive) -> Self {
        DriveRaw { kind: d.kind, amplitude: d.amplitude, phase_rad: d.phase }
    }
}

// ---------------------------------------------------------------------------
// MutualMatrix

/// Symmetric mutual-inductance matrix with zero diagonal, henries.
/// Each value is stored once (strict upper triangle) and mirrored on read.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MutualMatrixRaw", into = "MutualMatrixRaw")]
pub struct MutualMatrix {
    n: usize,
    upper: Vec<f64>,
}

impl MutualMatrix {
    pub fn zeros(n: usize) -> Self {
        MutualMatrix { n, upper: vec![0.0; n * (n - 1) / 2] }
    }

    fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j && j < self.n);
        // offset of row i into the strict upper triangle, then column j
        i * self.n - i * (i + 1) / 2 + (j - i - 1)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// M\[i\]\[j\]; zero on the diagonal by definition.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        assert!(i < self.n && j < self.n, "mutual index out of range");
        if i == j {
            return 0.0;
        }
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.upper[self.index(a, b)]
    }

    /// Sets M\[i\]\[j\] = M\[j\]\[i\]. Panics on a diagonal index.
    pub fn set(&mut self, i: usize, j: usize, henries: f64) {
        assert!(i < self.n && j < self.n, "mutual index out of range");
        assert!(i != j, "diagonal of the mutual matrix is fixed at zero");
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        let idx = self.index(a, b);
        self.upper[idx] = henries;
    }

    /// Builds from a full square matrix, requiring exact symmetry and a
    /// zero diagonal.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut m = MutualMatrix::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Config("mutual matrix must be square".into()));
            }
            if row[i] != 0.0 {
                return Err(Error::Config(format!("mutual[{i}][{i}] must be 0 (self-inductance is not stored here)")));
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::Config(format!("mutual[{i}][{j}] must be finite")));
                }
                if rows[j][i] != v {
                    return Err(Error::Config(format!("mutual[{i}][{j}] != mutual[{j}][{i}]")));
                }
                if i < j {
                    m.set(i, j, v);
                }
            }
        }
        Ok(m)
    }

    /// Iterates over the stored pairs `(i, j, M)` with `i < j`.
    pub fn iter_pairs(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| {
            ((i + 1)..self.n).map(move |j| (i, j, self.get(i, j)))
        })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MutualMatrixRaw {
    n: usize,
    upper_triangle_h: Vec<f64>,
}

impl TryFrom<MutualMatrixRaw> for MutualMatrix {
    type Error = Error;
    fn try_from(raw: MutualMatrixRaw) -> Result<Self> {
        let expect = raw.n * raw.n.saturating_sub(1) / 2;
        if raw.upper_triangle_h.len() != expect {
            return Err(Error::Config(format!(
                "mutual matrix: expected {expect} upper-triangle entries for n={}, got {}",
                raw.n,
                raw.upper_triangle_h.len()
            )));
        }
        if raw.upper_triangle_h.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("mutual matrix entries must be finite".into()));
        }
        Ok(MutualMatrix { n: raw.n, upper: raw.upper_triangle_h })
    }
}

impl From<MutualMatrix> for MutualMatrixRaw {
    fn from(m: MutualMatrix) -> Self {
        MutualMatrixRaw { n: m.n, upper_triangle_h: m.upper }
    }
}

// ---------------------------------------------------------------------------
// CoupledNetwork

/// N tuned loops, the medium around them, their mutual-inductance matrix,
/// and the per-loop drive assignment. Input to the circuit solver.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CoupledNetworkRaw", into = "CoupledNetworkRaw")]
pub struct CoupledNetwork {
    coils: Vec<CoilSpec>,
    medium: Medium,
    mutual: MutualMatrix,
    drives: Vec<Drive>,
}

impl CoupledNetwork {
    pub fn new(coils: Vec<CoilSpec>, medium: Medium, mutual: MutualMatrix, drives: Vec<Drive>) -> Result<Self> {
        if coils.is_empty() {
            return Err(Error::Config("network must contain at least one coil".into()));
        }
        if mutual.n() != coils.len() {
            return Err(Error::Config(format!(
                "mutual matrix is {}x{} but the network has {} coils",
                mutual.n(),
                mutual.n(),
                coils.len()
            )));
        }
        if drives.len() != coils.len() {
            return Err(Error::Config(format!(
                "{} drives for {} coils",
                drives.len(),
                coils.len()
            )));
        }
        for (i, a) in coils.iter().enumerate() {
            for b in coils.iter().skip(i + 1) {
                if a.id() == b.id() {
                    return Err(Error::Config(format!("duplicate coil id '{}'", a.id())));
                }
            }
        }
        Ok(CoupledNetwork { coils, medium, mutual, drives })
    }

    /// Same network with a different drive assignment.
    pub fn with_drives(&self, drives: Vec<Drive>) -> Result<Self> {
        CoupledNetwork::new(self.coils.clone(), self.medium, self.mutual.clone(), drives)
    }

    pub fn len(&self) -> usize {
        self.coils.len()
    }
    pub fn is_empty(&self) -> bool {
        self.coils.is_empty()
    }
    pub fn coils(&self) -> &[CoilSpec] {
        &self.coils
    }
    pub fn medium(&self) -> &Medium {
        &self.medium
    }
    pub fn mutual(&self) -> &MutualMatrix {
        &self.mutual
    }
    pub fn drives(&self) -> &[Drive] {
        &self.drives
    }

    pub fn coil_ids(&self) -> Vec<String> {
        self.coils.iter().map(|c| c.id().to_string()).collect()
    }

    pub fn coil_index(&self, id: &str) -> Option<usize> {
        self.coils.iter().position(|c| c.id() == id)
    }

    /// True when at least one loop is driven (required by solve operations).
    pub fn has_source(&self) -> bool {
        self.drives.iter().any(|d| d.kind() != DriveKind::Passive)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CoupledNetworkRaw {
    coils: Vec<CoilSpec>,
    medium: Medium,
    mutual: MutualMatrix,
    drives: Vec<Drive>,
}

impl TryFrom<CoupledNetworkRaw> for CoupledNetwork {
    type Error = Error;
    fn try_from(raw: CoupledNetworkRaw) -> Result<Self> {
        CoupledNetwork::new(raw.coils, raw.medium, raw.mutual, raw.drives)
    }
}

impl From<CoupledNetwork> for CoupledNetworkRaw {
    fn from(n: CoupledNetwork) -> Self {
        CoupledNetworkRaw { coils: n.coils, medium: n.medium, mutual: n.mutual, drives: n.drives }
    }
}

// ---------------------------------------------------------------------------
// SteadyState

/// Per-coil complex loop currents at one frequency, with the energy
/// bookkeeping of the solve.
#[derive(Clone, Debug, PartialEq)]
pub struct SteadyState {
    frequency: f64,
    currents: Vec<Complex64>,
    source_power: f64,
    dissipated_power: f64,
    condition_estimate: f64,
}

impl SteadyState {
    /// Validates the passivity invariant
    /// `|source_power - dissipated_power| <= 1e-9 * max(1, source_power)`.
    pub fn new(
        frequency: f64,
        currents: Vec<Complex64>,
        source_power: f64,
        dissipated_power: f64,
        condition_estimate: f64,
    ) -> Result<Self> {
        if !(frequency > 0.0) || !frequency.is_finite() {
            return Err(Error::Parameter("steady state frequency must be > 0".into()));
        }
        if currents.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Numerical(format!("non-finite current at {frequency} Hz")));
        }
        let imbalance = (source_power - dissipated_power).abs();
        if imbalance > ENERGY_BALANCE_TOL * source_power.max(1.0) {
            return Err(Error::Numerical(format!(
                "energy balance violated at {frequency} Hz: source {source_power} W vs dissipated {dissipated_power} W"
            )));
        }
        Ok(SteadyState { frequency, currents, source_power, dissipated_power, condition_estimate })
    }

    pub fn frequency(&self) -> f64 {
        self.frequency
    }
    pub fn currents(&self) -> &[Complex64] {
        &self.currents
    }
    pub fn source_power(&self) -> f64 {
        self.source_power
    }
    pub fn dissipated_power(&self) -> f64 {
        self.dissipated_power
    }
    /// 1-norm condition estimate of the passive partition of the
    /// impedance matrix (1.0 when every loop was pinned).
    pub fn condition_estimate(&self) -> f64 {
        self.condition_estimate
    }

    pub fn magnitude(&self, coil: usize) -> f64 {
        self.currents[coil].norm()
    }
    pub fn phase(&self, coil: usize) -> f64 {
        self.currents[coil].arg()
    }
}

// ---------------------------------------------------------------------------
// SweepTable

/// Current magnitude and phase of one coil at one sweep point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Phasor {
    pub amps: f64,
    pub phase_rad: f64,
}

impl From<Complex64> for Phasor {
    fn from(c: Complex64) -> Self {
        Phasor { amps: c.norm(), phase_rad: c.arg() }
    }
}

/// One sweep row: the sweep-variable value plus one polar phasor per coil.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub variable: f64,
    pub phasors: Vec<Phasor>,
}

/// Sweep-variable names accepted by [`SweepTable`].
pub const SWEEP_VARIABLES: [&str; 3] = ["frequency_hz", "distance_m", "angle_deg"];

/// Ordered sweep results: the unit of CSV/JSON export.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepTable {
    variable_name: String,
    coil_ids: Vec<String>,
    rows: Vec<SweepRow>,
    warnings: Vec<String>,
}

impl SweepTable {
    /// Validates strictly increasing variable values and a constant row
    /// width of `1 + 2 * coil count`.
    pub fn new(variable_name: &str, coil_ids: Vec<String>, rows: Vec<SweepRow>) -> Result<Self> {
        if !SWEEP_VARIABLES.contains(&variable_name) {
            return Err(Error::Parameter(format!(
                "sweep variable must be one of {SWEEP_VARIABLES:?}, got '{variable_name}'"
            )));
        }
        if coil_ids.is_empty() {
            return Err(Error::Parameter("sweep table needs at least one coil".into()));
        }
        for row in &rows {
            if row.phasors.len() != coil_ids.len() {
                return Err(Error::Parameter(format!(
                    "row width {} does not match {} coils",
                    row.phasors.len(),
                    coil_ids.len()
                )));
            }
        }
        for pair in rows.windows(2) {
            if !(pair[1].variable > pair[0].variable) {
                return Err(Error::Parameter(format!(
                    "sweep values must be strictly increasing ({} then {})",
                    pair[0].variable, pair[1].variable
                )));
            }
        }
        Ok(SweepTable { variable_name: variable_name.to_string(), coil_ids, rows, warnings: Vec::new() })
    }

    /// Assembles a table from per-point solver output, in sweep order.
    pub fn from_solutions(
        variable_name: &str,
        coil_ids: Vec<String>,
        values: &[f64],
        states: &[SteadyState],
    ) -> Result<Self> {
        debug_assert_eq!(values.len(), states.len());
        let rows = values
            .iter()
            .zip(states)
            .map(|(&variable, state)| SweepRow {
                variable,
                phasors: state.currents().iter().map(|&c| Phasor::from(c)).collect(),
            })
            .collect();
        SweepTable::new(variable_name, coil_ids, rows)
    }

    pub fn variable_name(&self) -> &str {
        &self.variable_name
    }
    pub fn coil_ids(&self) -> &[String] {
        &self.coil_ids
    }
    pub fn rows(&self) -> &[SweepRow] {
        &self.rows
    }
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn add_warning(&mut self, warning: String) {
        self.warnings.push(warning);
    }

    /// |I| column of one coil, in row order.
    pub fn magnitudes(&self, coil: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r.phasors[coil].amps).collect()
    }

    /// Row index of the maximum |I| for one coil.
    pub fn argmax_magnitude(&self, coil: usize) -> usize {
        let mut best = 0;
        for (k, row) in self.rows.iter().enumerate() {
            if row.phasors[coil].amps > self.rows[best].phasors[coil].amps {
                best = k;
            }
        }
        best
    }
}
