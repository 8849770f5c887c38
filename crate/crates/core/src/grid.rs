//! Sampling `chi` or `exp^(n)` on a rectangular grid for domain-coloring
//! plots. Cells are flagged rather than skipped, so the discontinuity
//! structure around the singular set survives the export.

use std::io::{self, Write};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::backend::{Backend, ExpIterate};
use crate::error::{Error, Result, SampleFlag};
use crate::export::fmt_f64;
use crate::schroeder::Schroeder;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridQuantity {
    Chi,
    ExpIter(f64),
}

/// Rectangle `[re_min, re_max] x [im_min, im_max]` sampled at `nx * ny`
/// points, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub re_range: (f64, f64),
    pub im_range: (f64, f64),
    pub resolution: (usize, usize),
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        let (nx, ny) = self.resolution;
        if nx < 2 || ny < 2 {
            return Err(Error::InvalidConfig(format!("grid resolution must be at least 2x2, got {nx}x{ny}")));
        }
        for (lo, hi) in [self.re_range, self.im_range] {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidConfig(format!("invalid grid range [{lo}, {hi}]")));
            }
        }
        Ok(())
    }

    fn step(&self) -> (f64, f64) {
        let (nx, ny) = self.resolution;
        (
            (self.re_range.1 - self.re_range.0) / (nx - 1) as f64,
            (self.im_range.1 - self.im_range.0) / (ny - 1) as f64,
        )
    }

    /// Sample point of column `ix`, row `iy`.
    pub fn point(&self, ix: usize, iy: usize) -> Complex64 {
        let (dx, dy) = self.step();
        Complex64::new(self.re_range.0 + ix as f64 * dx, self.im_range.0 + iy as f64 * dy)
    }

    /// Whether the pixel `[re - dx/2, re + dx/2) x [im - dy/2, im + dy/2)`
    /// around sample `(ix, iy)` contains `p`.
    fn cell_contains(&self, ix: usize, iy: usize, p: Complex64) -> bool {
        let (dx, dy) = self.step();
        let z = self.point(ix, iy);
        p.re >= z.re - dx / 2.0 && p.re < z.re + dx / 2.0 && p.im >= z.im - dy / 2.0 && p.im < z.im + dy / 2.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridCell {
    pub z: Complex64,
    /// `NaN` when evaluation failed.
    pub value: Complex64,
    pub flag: SampleFlag,
}

/// Row-major samples: row `iy` (imaginary axis) outer, column `ix` inner.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainGrid {
    pub spec: GridSpec,
    pub cells: Vec<GridCell>,
}

impl DomainGrid {
    pub fn cell(&self, ix: usize, iy: usize) -> &GridCell {
        &self.cells[iy * self.spec.resolution.0 + ix]
    }

    pub fn count(&self, flag: SampleFlag) -> usize {
        self.cells.iter().filter(|c| c.flag == flag).count()
    }

    /// CSV with header `re,im,out_re,out_im,flag`.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "re,im,out_re,out_im,flag")?;
        for c in &self.cells {
            writeln!(
                w,
                "{},{},{},{},{}",
                fmt_f64(c.z.re),
                fmt_f64(c.z.im),
                fmt_f64(c.value.re),
                fmt_f64(c.value.im),
                c.flag
            )?;
        }
        Ok(())
    }
}

/// Evaluates `quantity` on the grid. Cells whose pixel contains a point of
/// the singular set are flagged `domain` even when the sample itself
/// evaluates, since the function is discontinuous there. Non-negative
/// integer iterates are entire, so their cells are never flagged that way.
pub fn domain_grid(spec: GridSpec, quantity: GridQuantity, schroeder: &Schroeder) -> Result<DomainGrid> {
    spec.validate()?;
    let (nx, ny) = spec.resolution;
    let entire = matches!(quantity, GridQuantity::ExpIter(n) if n >= 0.0 && n.fract() == 0.0);
    let singular: Vec<Complex64> = if entire {
        Vec::new()
    } else {
        schroeder.singular_points().into_iter().map(|p| Complex64::new(p, 0.0)).collect()
    };
    // integer orders are composed exactly by the shared backend
    let backend = Backend::SchroederComplex(schroeder.clone());
    let cells = (0..nx * ny)
        .into_par_iter()
        .map(|idx| {
            let (ix, iy) = (idx % nx, idx / nx);
            let z = spec.point(ix, iy);
            let result = match quantity {
                GridQuantity::Chi => schroeder.chi(z),
                GridQuantity::ExpIter(n) => backend.iterate(z, n),
            };
            let (value, mut flag) = match result {
                Ok(v) => (v, SampleFlag::Ok),
                Err(e) => (Complex64::new(f64::NAN, f64::NAN), SampleFlag::from(&e)),
            };
            if flag == SampleFlag::Ok && singular.iter().any(|&p| spec.cell_contains(ix, iy, p)) {
                flag = SampleFlag::Domain;
            }
            GridCell { z, value, flag }
        })
        .collect();
    Ok(DomainGrid { spec, cells })
}
