use std::io::Write;

use super::MetricSeries;
use crate::error::{Error, Result};
use crate::grid::{Grid, ScalarFieldSnapshot};

/// CSV with header `t,rel_mse,label`; floats in shortest round-trip form.
pub fn write_metric_csv<W: Write>(mut w: W, series: &[&MetricSeries]) -> Result<()> {
    writeln!(w, "t,rel_mse,label")?;
    for s in series {
        for (t, v) in s.rows() {
            writeln!(w, "{t:?},{v:?},{}", s.label())?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Binary PGM (`P5`, maxval 255). Values map linearly from `[lo, hi]` to
/// `[0, 255]` with clamping; row `r` of the image is the grid row `j = n-1-r`
/// so that `y` increases upward.
pub fn write_pgm<W: Write>(mut w: W, snap: &ScalarFieldSnapshot, lo: f64, hi: f64) -> Result<()> {
    let Grid::D2(g) = snap.grid() else {
        return Err(Error::InvalidArgument("PGM output needs a 2D field".into()));
    };
    if !(hi > lo) {
        return Err(Error::InvalidArgument(format!("empty gray range [{lo}, {hi}]")));
    }
    let n = g.n();
    write!(w, "P5\n{n} {n}\n255\n")?;
    let mut row = vec![0u8; n];
    for r in 0..n {
        let j = n - 1 - r;
        for (i, px) in row.iter_mut().enumerate() {
            let v = (snap.values()[g.index(i, j)] - lo) / (hi - lo);
            *px = (v.clamp(0.0, 1.0) * 255.0).round() as u8;
        }
        w.write_all(&row)?;
    }
    w.flush()?;
    Ok(())
}
