//! Planar images projected onto the northern hemisphere.
//!
//! A point at colatitude `β` and longitude `α` maps by inverse stereographic
//! projection (from the south pole onto the plane tangent at the north pole)
//! to radius `r = 2 tan(β/2)` in direction `α`. The image square is scaled by
//! `√2` so its corners touch the equator; normalized image coordinates are
//! `(u, v) = (x, y) / √2 ∈ [-1, 1]²`, with `v` pointing up (image rows run down).

use std::path::Path;

use crate::error::{Error, Result};
use crate::gft::S2Signal;
use crate::grids::{Bandwidth, S2Grid};

/// Row-major grayscale image with values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarImage {
    pub width: usize,
    pub height: usize,
    pub values: Vec<f64>,
}

impl PlanarImage {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Shape("image must be at least 1x1".into()));
        }
        if values.len() != width * height {
            return Err(Error::Shape(format!(
                "{}x{} image needs {} values, found {}",
                width,
                height,
                width * height,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("image pixels"));
        }
        Ok(Self { width, height, values })
    }

    /// Loads a portable graymap (P2 or P5), scaling to `[0, 1]`.
    pub fn from_pgm(path: impl AsRef<Path>) -> Result<Self> {
        let img = image::ImageReader::open(path)?
            .with_guessed_format()?
            .decode()
            .map_err(|e| Error::Parse(format!("image: {e}")))?
            .into_luma16();
        let (w, h) = img.dimensions();
        let values = img.into_raw().into_iter().map(|p| p as f64 / u16::MAX as f64).collect();
        Self::new(w as usize, h as usize, values)
    }

    pub fn pixel(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width + col]
    }

    /// Bilinear sample at normalized coordinates; 0 outside `[-1, 1]²`.
    pub fn sample(&self, u: f64, v: f64) -> f64 {
        if !(-1.0..=1.0).contains(&u) || !(-1.0..=1.0).contains(&v) {
            return 0.0;
        }
        // pixel centers sit at half-integer offsets
        let x = ((u + 1.0) * 0.5 * self.width as f64 - 0.5).clamp(0.0, (self.width - 1) as f64);
        let y = ((1.0 - v) * 0.5 * self.height as f64 - 0.5).clamp(0.0, (self.height - 1) as f64);
        let (x0, y0) = (x.floor() as usize, y.floor() as usize);
        let (x1, y1) = ((x0 + 1).min(self.width - 1), (y0 + 1).min(self.height - 1));
        let (fx, fy) = (x - x0 as f64, y - y0 as f64);
        let top = self.pixel(y0, x0) * (1.0 - fx) + self.pixel(y0, x1) * fx;
        let bottom = self.pixel(y1, x0) * (1.0 - fx) + self.pixel(y1, x1) * fx;
        top * (1.0 - fy) + bottom * fy
    }
}

/// Samples `f(u, v)` over the northern hemisphere; the southern hemisphere is 0.
pub fn project_planar(b: Bandwidth, f: impl Fn(f64, f64) -> f64) -> S2Signal {
    let grid = S2Grid::new(b);
    let mut data = Vec::with_capacity(grid.len());
    for &beta in &grid.betas {
        for &alpha in &grid.alphas {
            if beta >= std::f64::consts::FRAC_PI_2 {
                data.push(0.0);
                continue;
            }
            let r = 2.0 * (beta / 2.0).tan() / std::f64::consts::SQRT_2;
            data.push(f(r * alpha.cos(), r * alpha.sin()));
        }
    }
    S2Signal {
        bandwidth: b,
        channels: 1,
        data,
    }
}

pub fn project_image(img: &PlanarImage, b: Bandwidth) -> S2Signal {
    project_planar(b, |u, v| img.sample(u, v))
}
