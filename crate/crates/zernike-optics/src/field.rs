//! Sampled complex fields on rectangular grids, plus their on-disk formats.
//!
//! Sampling convention: pixel centers, row-major storage with x fastest.
//! Pixel `(ix, iy)` sits at
//! `x = −extent_x + (ix + 1/2)·(2·extent_x/width)` and likewise for `y`,
//! so no sample ever lands on the grid boundary.
//!
//! Two formats, both byte-exact:
//!
//! * CSV — header line `# width,height,extent_x,extent_y,plane` followed by
//!   one `ix,iy,re,im` row per pixel (iy outer, ix inner), floats with 17
//!   significant digits;
//! * PGM — binary `P5`, 16-bit big-endian, carrying `|field|²` min–max
//!   normalized to `0..=65535`, for quick viewing.

use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::zernike::fmt_f64;
use crate::{Complex, Error, Result};

/// Which plane a grid samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Plane {
    /// Pupil plane (unit-disc coordinates).
    Pupil,
    /// Fraunhofer / image plane (spatial-frequency coordinates).
    Image,
    /// Fresnel plane at propagation distance `z`.
    Fresnel(f64),
}

impl Plane {
    pub fn label(&self) -> String {
        match self {
            Plane::Pupil => "pupil".to_string(),
            Plane::Image => "image".to_string(),
            Plane::Fresnel(z) => format!("fresnel({})", fmt_f64(*z)),
        }
    }

    fn parse(text: &str) -> Result<Self> {
        match text {
            "pupil" => Ok(Plane::Pupil),
            "image" => Ok(Plane::Image),
            other => {
                if let Some(inner) = other
                    .strip_prefix("fresnel(")
                    .and_then(|s| s.strip_suffix(')'))
                {
                    let z: f64 = inner
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad fresnel distance: {inner}")))?;
                    Ok(Plane::Fresnel(z))
                } else {
                    Err(Error::Parse(format!("unknown plane tag: {other}")))
                }
            }
        }
    }
}

/// Grid geometry: pixel counts and physical half-widths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub width: usize,
    pub height: usize,
    pub extent_x: f64,
    pub extent_y: f64,
}

impl GridSpec {
    pub fn square(size: usize, extent: f64) -> Self {
        Self {
            width: size,
            height: size,
            extent_x: extent,
            extent_y: extent,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::Domain("grid dimensions must be positive".into()));
        }
        if !self.extent_x.is_finite()
            || !self.extent_y.is_finite()
            || self.extent_x <= 0.0
            || self.extent_y <= 0.0
        {
            return Err(Error::Domain("grid extents must be positive".into()));
        }
        Ok(())
    }

    /// Center coordinate of pixel `(ix, iy)`.
    #[inline]
    pub fn pixel_center(&self, ix: usize, iy: usize) -> (f64, f64) {
        let dx = 2.0 * self.extent_x / self.width as f64;
        let dy = 2.0 * self.extent_y / self.height as f64;
        (
            -self.extent_x + (ix as f64 + 0.5) * dx,
            -self.extent_y + (iy as f64 + 0.5) * dy,
        )
    }

    /// Pixel area, for energy-style Riemann sums.
    pub fn pixel_area(&self) -> f64 {
        (2.0 * self.extent_x / self.width as f64) * (2.0 * self.extent_y / self.height as f64)
    }
}

/// Uniformly sampled complex field with physical extent metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid {
    pub spec: GridSpec,
    pub plane: Plane,
    /// Row-major, x fastest: `samples[iy * width + ix]`.
    pub samples: Vec<Complex>,
}

impl FieldGrid {
    /// Samples `f(x, y)` at every pixel center, in parallel. Every pixel is
    /// computed independently, so the output is identical for any thread
    /// count.
    pub fn sample<F>(spec: GridSpec, plane: Plane, f: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> Complex + Sync,
    {
        use rayon::prelude::*;
        spec.validate()?;
        let samples: Vec<Complex> = (0..spec.width * spec.height)
            .into_par_iter()
            .map(|k| {
                let (ix, iy) = (k % spec.width, k / spec.width);
                let (x, y) = spec.pixel_center(ix, iy);
                f(x, y)
            })
            .collect();
        Ok(Self {
            spec,
            plane,
            samples,
        })
    }

    #[inline]
    pub fn get(&self, ix: usize, iy: usize) -> Complex {
        self.samples[iy * self.spec.width + ix]
    }

    /// Bilinear interpolation at `(x, y)`; clamps to the sampled region so
    /// fitting rules may probe all the way to the disc boundary.
    pub fn sample_bilinear(&self, x: f64, y: f64) -> Complex {
        let w = self.spec.width;
        let h = self.spec.height;
        let dx = 2.0 * self.spec.extent_x / w as f64;
        let dy = 2.0 * self.spec.extent_y / h as f64;
        let fx = ((x + self.spec.extent_x) / dx - 0.5).clamp(0.0, (w - 1) as f64);
        let fy = ((y + self.spec.extent_y) / dy - 0.5).clamp(0.0, (h - 1) as f64);
        let ix = (fx.floor() as usize).min(w.saturating_sub(2));
        let iy = (fy.floor() as usize).min(h.saturating_sub(2));
        let ix1 = (ix + 1).min(w - 1);
        let iy1 = (iy + 1).min(h - 1);
        let tx = fx - ix as f64;
        let ty = fy - iy as f64;
        self.get(ix, iy) * ((1.0 - tx) * (1.0 - ty))
            + self.get(ix1, iy) * (tx * (1.0 - ty))
            + self.get(ix, iy1) * ((1.0 - tx) * ty)
            + self.get(ix1, iy1) * (tx * ty)
    }

    /// Grid-summed `|field|²` times pixel area.
    pub fn energy_proxy(&self) -> f64 {
        let sum: f64 = self.samples.iter().map(|c| c.norm_sqr()).sum();
        sum * self.spec.pixel_area()
    }

    /// Writes the CSV format.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = BufWriter::new(out);
        writeln!(
            w,
            "# {},{},{},{},{}",
            self.spec.width,
            self.spec.height,
            fmt_f64(self.spec.extent_x),
            fmt_f64(self.spec.extent_y),
            self.plane.label()
        )?;
        for iy in 0..self.spec.height {
            for ix in 0..self.spec.width {
                let c = self.get(ix, iy);
                writeln!(w, "{},{},{},{}", ix, iy, fmt_f64(c.re), fmt_f64(c.im))?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the CSV format.
    pub fn read_csv<R: Read>(mut input: R) -> Result<Self> {
        let mut text = String::new();
        input.read_to_string(&mut text)?;
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty field CSV".into()))?;
        let header = header
            .strip_prefix("# ")
            .ok_or_else(|| Error::Parse("field CSV must start with '# '".into()))?;
        let parts: Vec<&str> = header.split(',').collect();
        if parts.len() != 5 {
            return Err(Error::Parse(format!(
                "field CSV header needs 5 fields, got {}",
                parts.len()
            )));
        }
        let width: usize = parts[0]
            .parse()
            .map_err(|_| Error::Parse("bad width".into()))?;
        let height: usize = parts[1]
            .parse()
            .map_err(|_| Error::Parse("bad height".into()))?;
        let extent_x: f64 = parts[2]
            .parse()
            .map_err(|_| Error::Parse("bad extent_x".into()))?;
        let extent_y: f64 = parts[3]
            .parse()
            .map_err(|_| Error::Parse("bad extent_y".into()))?;
        let plane = Plane::parse(parts[4])?;
        let spec = GridSpec {
            width,
            height,
            extent_x,
            extent_y,
        };
        spec.validate()?;
        let mut samples = vec![Complex::new(0.0, 0.0); width * height];
        let mut seen = 0usize;
        for line in lines {
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 4 {
                return Err(Error::Parse(format!("bad field CSV row: {line}")));
            }
            let ix: usize = cols[0]
                .parse()
                .map_err(|_| Error::Parse(format!("bad ix in: {line}")))?;
            let iy: usize = cols[1]
                .parse()
                .map_err(|_| Error::Parse(format!("bad iy in: {line}")))?;
            let re: f64 = cols[2]
                .parse()
                .map_err(|_| Error::Parse(format!("bad re in: {line}")))?;
            let im: f64 = cols[3]
                .parse()
                .map_err(|_| Error::Parse(format!("bad im in: {line}")))?;
            if ix >= width || iy >= height {
                return Err(Error::Parse(format!("pixel ({ix},{iy}) out of range")));
            }
            samples[iy * width + ix] = Complex::new(re, im);
            seen += 1;
        }
        if seen != width * height {
            return Err(Error::Parse(format!(
                "field CSV has {seen} rows, expected {}",
                width * height
            )));
        }
        Ok(Self {
            spec,
            plane,
            samples,
        })
    }

    /// Writes `|field|²` as a 16-bit big-endian binary PGM (`P5`), min–max
    /// normalized. A constant field maps to all zeros.
    pub fn write_pgm<W: Write>(&self, out: W) -> Result<()> {
        let mut w = BufWriter::new(out);
        write!(w, "P5\n{} {}\n65535\n", self.spec.width, self.spec.height)?;
        let intensity: Vec<f64> = self.samples.iter().map(|c| c.norm_sqr()).collect();
        let min = intensity.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = intensity.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let range = max - min;
        for v in intensity {
            let scaled: u16 = if range > 0.0 {
                ((v - min) / range * 65535.0).round() as u16
            } else {
                0
            };
            w.write_all(&scaled.to_be_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_csv_path(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    pub fn read_csv_path(path: &Path) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }

    pub fn write_pgm_path(&self, path: &Path) -> Result<()> {
        self.write_pgm(std::fs::File::create(path)?)
    }
}
