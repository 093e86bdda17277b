//! CSV tables for trajectories and reflection events.

use std::path::Path;

use confbill_core::{ForceField, Trajectory};

use crate::Result;

pub const TRAJECTORY_HEADER: [&str; 7] = ["arc", "t", "q1", "q2", "p1", "p2", "energy"];
pub const EVENTS_HEADER: [&str; 9] =
    ["index", "t", "q1", "q2", "p_in1", "p_in2", "p_out1", "p_out2", "component"];

/// Every recorded sample, one row each. Energies are evaluated in `field`.
pub fn trajectory_csv(traj: &Trajectory, field: &ForceField) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(TRAJECTORY_HEADER)?;
    for (arc, s) in traj.samples() {
        let (q, p) = (s.state.q, s.state.p);
        let e = field.hamiltonian(&s.state).unwrap_or(f64::NAN);
        w.write_record([
            arc.to_string(),
            s.t.to_string(),
            q.x.to_string(),
            q.y.to_string(),
            p.x.to_string(),
            p.y.to_string(),
            e.to_string(),
        ])?;
    }
    Ok(w.into_inner().map_err(|e| e.into_error())?)
}

pub fn events_csv(traj: &Trajectory, names: &[String]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(EVENTS_HEADER)?;
    for (i, e) in traj.events.iter().enumerate() {
        let name = names.get(e.component).cloned().unwrap_or_else(|| e.component.to_string());
        w.write_record([
            i.to_string(),
            e.t.to_string(),
            e.q.x.to_string(),
            e.q.y.to_string(),
            e.p_in.x.to_string(),
            e.p_in.y.to_string(),
            e.p_out.x.to_string(),
            e.p_out.y.to_string(),
            name,
        ])?;
    }
    Ok(w.into_inner().map_err(|e| e.into_error())?)
}

/// Parse a trajectory table back into rows of floats, skipping the header.
pub fn read_rows(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        rows.push(rec.iter().map(|x| x.parse().unwrap_or(f64::NAN)).collect());
    }
    Ok(rows)
}
