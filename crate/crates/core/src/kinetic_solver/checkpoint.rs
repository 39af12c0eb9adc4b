//! Binary checkpoints: magic, `u32` version, `u64` header length, JSON header,
//! then `F1` and `F2` as little-endian `f64`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{BoundaryMode, FarField, SimulationState, Totals};
use crate::error::{Result, VpbError};
use crate::phase_space::{DistributionField, SpaceGrid, VelocityGrid};

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"VPBCKPT\0";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Header {
    cells: usize,
    x_lo: f64,
    x_hi: f64,
    nv: usize,
    v_center: [f64; 3],
    theta_ref: f64,
    half_width_thermal: f64,
    time: f64,
    step: u64,
    far: FarField,
    boundary: BoundaryMode,
    inflow: Totals,
}

pub fn write_checkpoint(state: &SimulationState, boundary: BoundaryMode, path: &Path) -> Result<()> {
    let io = |e| VpbError::io(path, e);
    let header = Header {
        cells: state.space.cells(),
        x_lo: state.space.x_lo(),
        x_hi: state.space.x_hi(),
        nv: state.velocity.n(),
        v_center: state.velocity.center(),
        theta_ref: state.velocity.theta_ref(),
        half_width_thermal: state.velocity.half_width_thermal(),
        time: state.dist.t,
        step: state.step,
        far: state.far.clone(),
        boundary,
        inflow: state.inflow,
    };
    let json = serde_json::to_vec(&header).map_err(|e| VpbError::Checkpoint(e.to_string()))?;
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    w.write_all(CHECKPOINT_MAGIC).map_err(io)?;
    w.write_all(&CHECKPOINT_VERSION.to_le_bytes()).map_err(io)?;
    w.write_all(&(json.len() as u64).to_le_bytes()).map_err(io)?;
    w.write_all(&json).map_err(io)?;
    for x in state.dist.f1.iter().chain(&state.dist.f2) {
        w.write_all(&x.to_le_bytes()).map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Restores a state written by [`write_checkpoint`] together with its boundary mode.
pub fn read_checkpoint(path: &Path) -> Result<(SimulationState, BoundaryMode)> {
    let io = |e| VpbError::io(path, e);
    let mut r = BufReader::new(File::open(path).map_err(io)?);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic).map_err(io)?;
    if &magic != CHECKPOINT_MAGIC {
        return Err(VpbError::Checkpoint("bad magic".into()));
    }
    let mut b4 = [0u8; 4];
    r.read_exact(&mut b4).map_err(io)?;
    let version = u32::from_le_bytes(b4);
    if version != CHECKPOINT_VERSION {
        return Err(VpbError::Checkpoint(format!("unsupported version {version}")));
    }
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b8).map_err(io)?;
    let len = u64::from_le_bytes(b8) as usize;
    let mut json = vec![0u8; len];
    r.read_exact(&mut json).map_err(io)?;
    let h: Header = serde_json::from_slice(&json).map_err(|e| VpbError::Checkpoint(e.to_string()))?;
    let space = SpaceGrid::new(h.cells, h.x_lo, h.x_hi)?;
    let velocity = VelocityGrid::new(h.nv, h.v_center, h.theta_ref, h.half_width_thermal)?;
    let n = h.cells * velocity.len();
    let mut read_block = || -> Result<Vec<f64>> {
        let mut v = Vec::with_capacity(n);
        for _ in 0..n {
            r.read_exact(&mut b8).map_err(io)?;
            v.push(f64::from_le_bytes(b8));
        }
        Ok(v)
    };
    let f1 = read_block()?;
    let f2 = read_block()?;
    let dist = DistributionField::from_parts(h.cells, velocity.len(), f1, f2, h.time)?;
    let mut st = SimulationState::new(space, velocity, dist, h.far, h.boundary)?;
    st.step = h.step;
    st.inflow = h.inflow;
    Ok((st, h.boundary))
}
