use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

use super::{KDistribution, StretchProfile};

/// `g,k` dump of every knot.
pub fn write_kdist_csv(dist: &KDistribution, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let io = |e| Error::io(path, e);
    let mut out = BufWriter::new(fs::File::create(path).map_err(io)?);
    writeln!(out, "g,k").map_err(io)?;
    for (g, k) in dist.g().iter().zip(dist.k()) {
        writeln!(out, "{g:.16e},{k:.16e}").map_err(io)?;
    }
    out.flush().map_err(io)
}

/// `g0,kstar,a,ka` dump.
pub fn write_stretch_csv(profile: &StretchProfile, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let io = |e| Error::io(path, e);
    let mut out = BufWriter::new(fs::File::create(path).map_err(io)?);
    writeln!(out, "g0,kstar,a,ka").map_err(io)?;
    for j in 0..profile.len() {
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e}",
            profile.g0[j], profile.kstar[j], profile.a[j], profile.ka[j]
        )
        .map_err(io)?;
    }
    out.flush().map_err(io)
}
