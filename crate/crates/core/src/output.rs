//! CSV dumps. Floats use 17 significant digits so values survive a round
//! trip; NaN marks masked or unavailable entries.

use crate::error::Result;
use crate::rays::RayFan;
use crate::synthesis::{FieldSample, GridField};
use crate::transport::Transport;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

pub const RAY_HEADER: &str = "t0,omega,branch,t,x,y,p,q,S_star,alive";
pub const TRANSPORT_HEADER: &str = "t0,omega,branch,t,D,psi,P,C,caustic_flag";
pub const FIELD_HEADER: &str = "t,x,y,z,mode,wave_kind,S_star,sigma_arg,amplitude,value,quality";

pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

/// Every stored sample, then the termination state of rays that stopped
/// early (with `alive = 0`).
pub fn write_rays(path: &Path, fan: &RayFan) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "{RAY_HEADER}")?;
    let mut line = String::new();
    for ray in &fan.rays {
        let head = format!("{},{},{}", num(ray.t0), num(ray.omega), ray.branch);
        let mut states: Vec<_> = ray.samples.iter().flatten().collect();
        if let Some(last) = ray.last.as_ref().filter(|l| !l.alive) {
            states.push(last);
        }
        for s in states {
            line.clear();
            write!(
                line,
                "{head},{},{},{},{},{},{},{}",
                num(s.t),
                num(s.x),
                num(s.y),
                num(s.p),
                num(s.q),
                num(s.s_star),
                flag(s.alive)
            )
            .unwrap();
            writeln!(w, "{line}")?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_transport(path: &Path, fan: &RayFan, tr: &Transport) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "{TRANSPORT_HEADER}")?;
    for (ray, row) in fan.rays.iter().zip(&tr.samples) {
        for s in row.iter().flatten() {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{}",
                num(ray.t0),
                num(ray.omega),
                ray.branch,
                num(s.t),
                num(s.d),
                num(s.psi),
                num(s.p),
                num(s.c),
                flag(s.caustic)
            )?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_field(path: &Path, samples: &[FieldSample]) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "{FIELD_HEADER}")?;
    for s in samples {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{}",
            num(s.t),
            num(s.x),
            num(s.y),
            num(s.z),
            s.mode,
            s.wave_kind.name(),
            num(s.s_star),
            num(s.sigma_arg),
            num(s.amplitude),
            num(s.value),
            s.quality.as_str()
        )?;
    }
    w.flush()?;
    Ok(())
}

/// `#`-prefixed header lines with the grid geometry, then one line of
/// comma-separated values per y row, x increasing.
pub fn write_grid(path: &Path, grid: &GridField, label: &str, t: f64, z: f64) -> Result<()> {
    let g = &grid.spec;
    let mut w = create(path)?;
    writeln!(w, "# {label} t={} z={}", num(t), num(z))?;
    writeln!(
        w,
        "# x_min={},x_max={},nx={},y_min={},y_max={},ny={},radius={}",
        num(g.x_min),
        num(g.x_max),
        g.nx,
        num(g.y_min),
        num(g.y_max),
        g.ny,
        num(g.radius)
    )?;
    for row in grid.values.chunks(g.nx.max(1)) {
        let cells: Vec<String> = row.iter().map(|&v| num(v)).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    w.flush()?;
    Ok(())
}
