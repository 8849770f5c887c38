//! CSV helpers shared by the grid, curve and loss-trace exports.

use std::io::{self, Write};

use crate::addiplication::InterpolationCurve;

/// Formats a double with 17 significant digits, enough to round-trip.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes `n,value_re,value_im,flag` rows, optionally prefixed by a label
/// column (the header then starts with `backend,`).
pub fn write_curve_csv<W: Write>(w: &mut W, curves: &[&InterpolationCurve], labelled: bool) -> io::Result<()> {
    if labelled {
        writeln!(w, "backend,n,value_re,value_im,flag")?;
    } else {
        writeln!(w, "n,value_re,value_im,flag")?;
    }
    for curve in curves {
        for p in &curve.points {
            if labelled {
                write!(w, "{},", curve.backend)?;
            }
            writeln!(w, "{},{},{},{}", fmt_f64(p.n), fmt_f64(p.value.re), fmt_f64(p.value.im), p.flag)?;
        }
    }
    Ok(())
}
