//! The canonical two-node full-duplex link and its experiments.
//!
//! Node A sits at the origin with two concentric orthogonal coils: A1
//! normal along the node axis (+x) and A2 normal vertical (+z). Node B
//! mirrors it at `node_distance` along x. The A1/B1 pair carries one
//! direction of the link, B2/A2 the other; in perfect alignment all four
//! cross couplings vanish, which is what suppresses self-interference.
//!
//! Cases: case1 drives A1 alone (signal of interest at B1, SI point A2),
//! case2 drives B2 alone (SoI at A2, SI point B1), case3 drives both
//! transmitters at once. The distance and orientation sweeps rerun case3
//! while translating or rigidly rotating node B.

use serde::{Deserialize, Serialize};

use crate::circuit::{assemble_sweep, grid, CircuitModel, FrequencySweepSpacing};
use crate::error::{Error, Result};
use crate::exec;
use crate::magnetics::{
    attenuated_mutual, inductance_from_tuning, mutual_matrix, skin_depth, MutualMethod,
    DEFAULT_NEUMANN_SEGMENTS,
};
use crate::model::{CoilSpec, CoupledNetwork, Drive, Medium, SteadyState, SweepTable, Tuning, Vec3};
use crate::DEFAULT_WIRE_RADIUS;

/// Coil order used by every network this module builds.
pub const COIL_ORDER: [&str; 4] = ["A1", "A2", "B1", "B2"];

/// Node separation of the orientation-sensitivity figure, meters.
pub const ORIENTATION_PRESET_DISTANCE: f64 = 0.675;

/// Floor applied to -inf suppression values in serialized output, dB.
pub const SI_FLOOR_DB: f64 = -300.0;

/// Parameters of the canonical link. The defaults reproduce the
/// reference setup: 10 cm / 12.1 cm coils, 100 turns, 60 cm separation,
/// 4.7 nF / 2.45 nF tuning at 46.77 kHz, 1 A excitation, fresh water.
#[derive(Clone, Debug, PartialEq)]
pub struct FdLinkParams {
    /// Node separation along the node axis, m.
    pub node_distance: f64,
    /// Radius of the axis-aligned pair A1/B1, m.
    pub r_vertical: f64,
    /// Radius of the vertical-normal pair A2/B2, m.
    pub r_horizontal: f64,
    pub turns: u32,
    /// Shared resonance, Hz.
    pub f0: f64,
    /// Series capacitance of A1/B1, F.
    pub c_vertical: f64,
    /// Series capacitance of A2/B2, F.
    pub c_horizontal: f64,
    /// Transmitter current amplitude, A.
    pub drive_amplitude: f64,
    /// Conductor radius for the resistance calibration, m.
    pub wire_radius: f64,
    pub medium: Medium,
    pub mutual_method: MutualMethod,
    pub neumann_segments: usize,
    /// Multiply couplings by exp(-d/delta). Off by default: at fresh
    /// water skin depths (tens of meters) the factor is ~1.
    pub medium_attenuation: bool,
}

impl Default for FdLinkParams {
    fn default() -> Self {
        FdLinkParams {
            node_distance: 0.6,
            r_vertical: 0.1,
            r_horizontal: 0.121,
            turns: 100,
            f0: 46_770.0,
            c_vertical: 4.7e-9,
            c_horizontal: 2.45e-9,
            drive_amplitude: 1.0,
            wire_radius: DEFAULT_WIRE_RADIUS,
            medium: Medium::fresh_water(),
            mutual_method: MutualMethod::Dipole,
            neumann_segments: DEFAULT_NEUMANN_SEGMENTS,
            medium_attenuation: false,
        }
    }
}

impl FdLinkParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("node_distance", self.node_distance),
            ("r_vertical", self.r_vertical),
            ("r_horizontal", self.r_horizontal),
            ("f0", self.f0),
            ("c_vertical", self.c_vertical),
            ("c_horizontal", self.c_horizontal),
            ("wire_radius", self.wire_radius),
        ];
        for (name, value) in positive {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::Parameter(format!("link parameter {name} must be > 0, got {value}")));
            }
        }
        if !(self.drive_amplitude >= 0.0) || !self.drive_amplitude.is_finite() {
            return Err(Error::Parameter("drive_amplitude must be >= 0".into()));
        }
        if self.turns < 1 {
            return Err(Error::Parameter("turns must be >= 1".into()));
        }
        Ok(())
    }

    fn with_node_distance(&self, d: f64) -> Self {
        let mut p = self.clone();
        p.node_distance = d;
        p
    }
}

/// Which transmitters are excited.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CaseId {
    /// A1 transmits; B1 is the intended receiver, A2 the SI point.
    Case1,
    /// B2 transmits; A2 is the intended receiver, B1 the SI point.
    Case2,
    /// Both A1 and B2 transmit (full duplex).
    Case3,
}

/// Rigid-rotation axis for the orientation sweep, through node B's center.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RotationAxis {
    /// Vertical (z). B2's normal is invariant under this rotation.
    #[default]
    Vertical,
    /// The node axis (x). B1's normal is invariant.
    NodeAxis,
    /// Horizontal transverse (y). Changes the elevation of both coils.
    HorizontalTransverse,
}

impl RotationAxis {
    pub fn unit(self) -> Vec3 {
        match self {
            RotationAxis::Vertical => Vec3::Z,
            RotationAxis::NodeAxis => Vec3::X,
            RotationAxis::HorizontalTransverse => Vec3::Y,
        }
    }
}

/// Induced-current observables of one case at the operating frequency.
#[derive(Clone, Debug, PartialEq)]
pub struct SiReport {
    pub case_id: CaseId,
    /// Solve frequency, Hz.
    pub frequency: f64,
    /// Intended receivers: (coil id, |I| in amperes).
    pub soi_currents: Vec<(String, f64)>,
    /// Self-interference points: (coil id, |I| in amperes).
    pub si_currents: Vec<(String, f64)>,
    /// Per SI point: 20 log10(si/soi) against the same-index SoI channel;
    /// -inf when the SI current is exactly zero.
    pub suppression_db: Vec<(String, f64)>,
}

impl SiReport {
    fn new(
        case_id: CaseId,
        frequency: f64,
        soi_currents: Vec<(String, f64)>,
        si_currents: Vec<(String, f64)>,
    ) -> Result<Self> {
        let mut suppression_db = Vec::with_capacity(si_currents.len());
        for (k, (id, si)) in si_currents.iter().enumerate() {
            let soi = soi_currents[k.min(soi_currents.len() - 1)].1;
            suppression_db.push((id.clone(), suppression(*si, soi)?));
        }
        Ok(SiReport { case_id, frequency, soi_currents, si_currents, suppression_db })
    }

    /// JSON rendering with the -inf sentinel floored to
    /// [`SI_FLOOR_DB`] (CSV/JSON cannot carry -inf portably).
    pub fn to_json(&self) -> String {
        let map = |pairs: &[(String, f64)]| -> serde_json::Value {
            pairs
                .iter()
                .map(|(id, v)| (id.clone(), serde_json::json!(v.max(SI_FLOOR_DB))))
                .collect::<serde_json::Map<_, _>>()
                .into()
        };
        let value = serde_json::json!({
            "case_id": self.case_id,
            "frequency_hz": self.frequency,
            "soi_a": map(&self.soi_currents),
            "si_a": map(&self.si_currents),
            "suppression_db": map(&self.suppression_db),
        });
        serde_json::to_string_pretty(&value).expect("json rendering cannot fail")
    }
}

fn suppression(si: f64, soi: f64) -> Result<f64> {
    if si == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    if soi == 0.0 {
        return Err(Error::Parameter(
            "SI suppression undefined: SoI current is zero while SI current is not".into(),
        ));
    }
    Ok(20.0 * (si / soi).log10())
}

/// Recomputes the per-channel suppression of a report. Errors when a
/// channel has zero SoI current but non-zero SI current.
pub fn si_suppression_db(report: &SiReport) -> Result<Vec<(String, f64)>> {
    let mut out = Vec::with_capacity(report.si_currents.len());
    for (k, (id, si)) in report.si_currents.iter().enumerate() {
        let soi = report.soi_currents[k.min(report.soi_currents.len() - 1)].1;
        out.push((id.clone(), suppression(*si, soi)?));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Network construction

fn fd_coils(params: &FdLinkParams) -> Result<Vec<CoilSpec>> {
    params.validate()?;
    // Tune each loop to f0 exactly: the capacitors are the given values
    // and the self-inductance is pinned to 1/(w0^2 C).
    let l_vertical = inductance_from_tuning(params.c_vertical, params.f0)?;
    let l_horizontal = inductance_from_tuning(params.c_horizontal, params.f0)?;
    let node_b = Vec3::new(params.node_distance, 0.0, 0.0);
    let coil = |id: &str, center: Vec3, normal: Vec3, radius: f64, c: f64, l: f64| {
        CoilSpec::new(id, center, normal, radius, params.turns, params.wire_radius, Tuning::Capacitance(c))?
            .with_inductance_override(l)
    };
    Ok(vec![
        coil("A1", Vec3::ZERO, Vec3::X, params.r_vertical, params.c_vertical, l_vertical)?,
        coil("A2", Vec3::ZERO, Vec3::Z, params.r_horizontal, params.c_horizontal, l_horizontal)?,
        coil("B1", node_b, Vec3::X, params.r_vertical, params.c_vertical, l_vertical)?,
        coil("B2", node_b, Vec3::Z, params.r_horizontal, params.c_horizontal, l_horizontal)?,
    ])
}

/// Rigidly rotates node B's coils about `axis` through node B's center.
fn rotate_node_b(coils: &mut [CoilSpec], node_b: Vec3, axis: Vec3, angle_rad: f64) -> Result<()> {
    for coil in coils.iter_mut().filter(|c| c.id().starts_with('B')) {
        let center = node_b + (coil.center() - node_b).rotated_about(axis, angle_rad);
        let normal = coil.normal().rotated_about(axis, angle_rad);
        *coil = coil.clone().with_pose(center, normal)?;
    }
    Ok(())
}

fn network_from_coils(
    params: &FdLinkParams,
    coils: Vec<CoilSpec>,
    drives: Vec<Drive>,
) -> Result<CoupledNetwork> {
    let mut mutual = mutual_matrix(&coils, &params.medium, params.mutual_method, params.neumann_segments)?;
    if params.medium_attenuation {
        let delta = skin_depth(&params.medium, params.f0)?;
        for (i, j, value) in mutual.clone().iter_pairs() {
            let d = (coils[j].center() - coils[i].center()).norm();
            mutual.set(i, j, attenuated_mutual(value, d, delta));
        }
    }
    CoupledNetwork::new(coils, params.medium, mutual, drives)
}

fn case_drives(case: CaseId, amplitude: f64) -> Result<Vec<Drive>> {
    let tx = Drive::current(amplitude)?;
    let off = Drive::passive();
    // order: A1, A2, B1, B2
    Ok(match case {
        CaseId::Case1 => vec![tx, off, off, off],
        CaseId::Case2 => vec![off, off, off, tx],
        CaseId::Case3 => vec![tx, off, off, tx],
    })
}

/// Builds the canonical 4-coil network with all loops passive.
pub fn build_fd_link(params: &FdLinkParams) -> Result<CoupledNetwork> {
    let coils = fd_coils(params)?;
    network_from_coils(params, coils, vec![Drive::passive(); 4])
}

/// Builds the canonical network with the drive assignment of one case.
pub fn case_network(case: CaseId, params: &FdLinkParams) -> Result<CoupledNetwork> {
    let coils = fd_coils(params)?;
    network_from_coils(params, coils, case_drives(case, params.drive_amplitude)?)
}

/// Solves one case at `params.f0` and reports the SoI/SI observables.
pub fn run_case(case: CaseId, params: &FdLinkParams) -> Result<SiReport> {
    let network = case_network(case, params)?;
    let state = CircuitModel::new(&network)?.solve(params.f0)?;
    let amp = |id: &str| -> (String, f64) {
        let idx = network.coil_index(id).expect("canonical coil id");
        (id.to_string(), state.magnitude(idx))
    };
    let (soi, si) = match case {
        CaseId::Case1 => (vec![amp("B1")], vec![amp("A2")]),
        CaseId::Case2 => (vec![amp("A2")], vec![amp("B1")]),
        CaseId::Case3 => (vec![amp("B1"), amp("A2")], vec![]),
    };
    SiReport::new(case, params.f0, soi, si)
}

/// Case-3 solve at every distance in `[d_min, d_max]`, node A fixed.
pub fn distance_sweep(params: &FdLinkParams, d_min: f64, d_max: f64, steps: usize) -> Result<SweepTable> {
    params.validate()?;
    if !(d_min > 0.0) {
        return Err(Error::Parameter("distance sweep needs d_min > 0".into()));
    }
    let values = grid(d_min, d_max, steps, FrequencySweepSpacing::Linear)?;
    let results = exec::map_ordered(values.len(), |k| -> Result<SteadyState> {
        let local = params.with_node_distance(values[k]);
        let network = case_network(CaseId::Case3, &local)?;
        CircuitModel::new(&network)?.solve(local.f0)
    });
    let ids = COIL_ORDER.iter().map(|s| s.to_string()).collect();
    assemble_sweep("distance_m", ids, &values, results)
}

/// Case-3 solve at every angle, node A fixed, node B rigidly rotated
/// about `axis` through its own center. Angles in degrees, within
/// \[0, 90\], strictly increasing.
pub fn orientation_sweep(params: &FdLinkParams, angles_deg: &[f64], axis: RotationAxis) -> Result<SweepTable> {
    params.validate()?;
    if angles_deg.is_empty() {
        return Err(Error::Parameter("orientation sweep needs at least one angle".into()));
    }
    for &a in angles_deg {
        if !a.is_finite() || !(0.0..=90.0).contains(&a) {
            return Err(Error::Parameter(format!("angle {a} outside [0, 90] degrees")));
        }
    }
    let node_b = Vec3::new(params.node_distance, 0.0, 0.0);
    let results = exec::map_ordered(angles_deg.len(), |k| -> Result<SteadyState> {
        let mut coils = fd_coils(params)?;
        rotate_node_b(&mut coils, node_b, axis.unit(), angles_deg[k].to_radians())?;
        let network = network_from_coils(params, coils, case_drives(CaseId::Case3, params.drive_amplitude)?)?;
        CircuitModel::new(&network)?.solve(params.f0)
    });
    let ids = COIL_ORDER.iter().map(|s| s.to_string()).collect();
    assemble_sweep("angle_deg", ids, angles_deg, results)
}
