//! CSV dumps of trajectories, cycles, weights and coupled pairs.
//!
//! Per-step columns describe the step leaving row `i`; the last row of a
//! path has no outgoing step and leaves them empty.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use erw_core::coupling::CoupledPair;
use erw_core::renewal::Cycle;
use erw_core::weights::WeightState;
use erw_core::Trajectory;

use crate::error::{LabError, LabResult};

fn flag(b: bool) -> String {
    u8::from(b).to_string()
}

fn transverse_header(d: usize) -> impl Iterator<Item = String> {
    (1..d).map(|j| format!("z{j}"))
}

pub fn write_trajectory<W: Write>(out: W, traj: &Trajectory) -> LabResult<()> {
    let d = traj.dim();
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["step".to_string(), "x".to_string()];
    header.extend(transverse_header(d));
    header.extend(["eps", "novel", "excited"].map(String::from));
    w.write_record(&header)?;
    let n = traj.len();
    for i in 0..=n {
        let p = traj.point(i);
        let mut row = vec![i.to_string()];
        row.extend(p.iter().map(|c| c.to_string()));
        if i < n {
            row.push(traj.increments()[i].to_string());
            row.push(flag(traj.novelty()[i]));
            row.push(flag(traj.excitation()[i]));
        } else {
            row.extend([String::new(), String::new(), String::new()]);
        }
        w.write_record(&row)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_cycles<W: Write>(out: W, cycles: &[Cycle]) -> LabResult<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["k", "dt", "dx", "dn", "dv"])?;
    for c in cycles {
        w.write_record([
            c.k.to_string(),
            c.dt.to_string(),
            c.dx.to_string(),
            c.dn.to_string(),
            c.dv.to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_weights<W: Write>(out: W, rows: &[(u64, WeightState)]) -> LabResult<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["replicate", "log_m", "v_score"])?;
    for (r, s) in rows {
        w.write_record([r.to_string(), s.log_m.to_string(), s.v_score.to_string()])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_coupled<W: Write>(out: W, pair: &CoupledPair) -> LabResult<()> {
    let d = pair.y.dim();
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["step".to_string(), "xbar".to_string(), "x".to_string()];
    header.extend(transverse_header(d));
    header.extend(["eta", "xi_bar", "zeta_bar", "zeta", "znew", "excited"].map(String::from));
    w.write_record(&header)?;
    let n = pair.y.len();
    let noise = &pair.noise;
    for i in 0..=n {
        let mut row = vec![
            i.to_string(),
            pair.ybar.x(i).to_string(),
            pair.y.x(i).to_string(),
        ];
        row.extend(pair.y.point(i)[1..].iter().map(|c| c.to_string()));
        if i < n {
            row.extend([
                flag(noise.eta[i]),
                flag(noise.xi_bar(i)),
                flag(noise.zeta_bar(i)),
                flag(noise.zeta(i)),
                flag(pair.znew[i]),
                flag(pair.y.excitation()[i]),
            ]);
        } else {
            row.extend(std::iter::repeat_n(String::new(), 6));
        }
        w.write_record(&row)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Creates `path` for writing; the parent directory must exist.
pub fn create(path: &Path) -> LabResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| LabError::io(path, e))
}
