//! Output files. Everything is written as `<name>.partial` and renamed only
//! once the whole run has succeeded.

use crate::error::RunError;
use mechstate::plant::{PhotonKernels, SampledKernels};
use mechstate::units::LEDGER_VERSION;
use mechstate::WignerGrid;
use serde::Serialize;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub const PARTIAL_SUFFIX: &str = ".partial";

pub struct Staged {
    dir: PathBuf,
    names: Vec<String>,
}

impl Staged {
    pub fn new(dir: &Path) -> Self {
        Staged {
            dir: dir.to_path_buf(),
            names: Vec::new(),
        }
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<(), RunError> {
        let path = self.dir.join(format!("{name}{PARTIAL_SUFFIX}"));
        std::fs::write(&path, contents).map_err(|e| RunError::io(&path, e))?;
        if !self.names.iter().any(|n| n == name) {
            self.names.push(name.to_string());
        }
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), RunError> {
        let mut text = serde_json::to_string_pretty(value)
            .map_err(|e| RunError::Numerical(format!("cannot serialize {name}: {e}")))?;
        text.push('\n');
        self.write(name, &text)
    }

    /// Moves every staged file to its final name.
    pub fn commit(self) -> Result<(), RunError> {
        for name in &self.names {
            let from = self.dir.join(format!("{name}{PARTIAL_SUFFIX}"));
            let to = self.dir.join(name);
            std::fs::rename(&from, &to).map_err(|e| RunError::io(&to, e))?;
        }
        Ok(())
    }
}

fn header(out: &mut String, ranges: &str, size: &str) {
    let _ = writeln!(out, "# {ranges}");
    let _ = writeln!(out, "# {size}");
    let _ = writeln!(out, "# {LEDGER_VERSION}");
}

/// `wigner.csv`: three comment lines, a column header, then `X,P,W` rows
/// with `P` varying fastest.
pub fn write_wigner(staged: &mut Staged, grid: &WignerGrid) -> Result<(), RunError> {
    let (xa, pa) = (grid.x_axis, grid.p_axis);
    let mut out = String::with_capacity(xa.len * pa.len * 72);
    header(
        &mut out,
        &format!(
            "X in [{:e}, {:e}], P in [{:e}, {:e}]",
            xa.start,
            xa.end(),
            pa.start,
            pa.end()
        ),
        &format!("grid {} x {}", xa.len, pa.len),
    );
    out.push_str("X,P,W\n");
    for ix in 0..xa.len {
        let x = xa.at(ix);
        for ip in 0..pa.len {
            let _ = writeln!(out, "{:e},{:e},{:e}", x, pa.at(ip), grid.get(ix, ip));
        }
    }
    staged.write("wigner.csv", &out)
}

/// `kernels.csv`: filters at `t = -s` and the photon kernel `L(t)`.
pub fn write_kernels(
    staged: &mut Staged,
    k: &SampledKernels,
    photon: &PhotonKernels,
) -> Result<(), RunError> {
    let g = k.grid;
    let mut out = String::new();
    header(
        &mut out,
        &format!(
            "t in [{:e}, 0], tail ratio at horizon {:e}",
            -g.horizon(),
            k.tail_ratio
        ),
        &format!("rows {}, dt {:e}", g.len, g.dt),
    );
    out.push_str("t,K_x,K_p,whitening,Re_L,Im_L\n");
    for (i, s) in g.lags().into_iter().enumerate() {
        let l = photon.l_at(-s);
        let _ = writeln!(
            out,
            "{:e},{:e},{:e},{:e},{:e},{:e}",
            -s, k.k_x[i], k.k_p[i], k.whitening[i], l.re, l.im
        );
    }
    staged.write("kernels.csv", &out)
}

/// `outcome_density.csv`: `w[Z]` on the Z plane, along the support line, or
/// the single atom at the origin.
pub fn write_density(
    staged: &mut Staged,
    support: &str,
    rows: &[[f64; 3]],
) -> Result<(), RunError> {
    let (lo, hi) = rows
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
            (lo.min(r[0]).min(r[1]), hi.max(r[0]).max(r[1]))
        });
    let mut out = String::new();
    header(
        &mut out,
        &format!("Re Z, Im Z in [{lo:e}, {hi:e}]"),
        &format!("{} rows, support {support}", rows.len()),
    );
    out.push_str("Re_Z,Im_Z,w\n");
    for r in rows {
        let _ = writeln!(out, "{:e},{:e},{:e}", r[0], r[1], r[2]);
    }
    staged.write("outcome_density.csv", &out)
}
