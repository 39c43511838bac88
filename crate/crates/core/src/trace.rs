//! Sampled spectra: the common currency of the simulator, the CSV reader
//! and the fitter.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SCHEMA: &str = "fano-cqed/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    /// Vacuum wavelength, nm.
    WavelengthNm,
    /// ν_ref − ν in Hz (grows with wavelength).
    DetuningHz,
    /// Absolute angular frequency, rad/s.
    OmegaRadS,
}

impl Axis {
    pub fn column(self) -> &'static str {
        match self {
            Axis::WavelengthNm => "wavelength_nm",
            Axis::DetuningHz => "detuning_hz",
            Axis::OmegaRadS => "omega_rad_s",
        }
    }

    pub fn from_column(name: &str) -> Option<Self> {
        match name {
            "wavelength_nm" => Some(Axis::WavelengthNm),
            "detuning_hz" => Some(Axis::DetuningHz),
            "omega_rad_s" => Some(Axis::OmegaRadS),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumTrace {
    pub axis: Axis,
    pub abscissa: Vec<f64>,
    pub intensity: Vec<f64>,
    pub uncertainty: Option<Vec<f64>>,
}

impl SpectrumTrace {
    pub fn new(axis: Axis, abscissa: Vec<f64>, intensity: Vec<f64>) -> Result<Self> {
        let t = Self {
            axis,
            abscissa,
            intensity,
            uncertainty: None,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn with_uncertainty(mut self, sigma: Vec<f64>) -> Result<Self> {
        self.uncertainty = Some(sigma);
        self.validate()?;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.abscissa.len()
    }

    pub fn is_empty(&self) -> bool {
        self.abscissa.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if self.abscissa.len() != self.intensity.len() {
            return Err(Error::Validation(format!(
                "abscissa has {} points but intensity has {}",
                self.abscissa.len(),
                self.intensity.len()
            )));
        }
        if let Some(u) = &self.uncertainty {
            if u.len() != self.abscissa.len() {
                return Err(Error::Validation("uncertainty length mismatch".into()));
            }
            if u.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
                return Err(Error::Validation("uncertainties must be finite and > 0".into()));
            }
        }
        if self.abscissa.iter().any(|x| !x.is_finite()) {
            return Err(Error::Validation("non-finite abscissa".into()));
        }
        if self.intensity.iter().any(|y| !y.is_finite()) {
            return Err(Error::Validation("non-finite intensity".into()));
        }
        if !is_strictly_monotone(&self.abscissa) {
            return Err(Error::Validation("abscissa is not strictly monotone".into()));
        }
        Ok(())
    }

    pub fn max(&self) -> Option<(f64, f64)> {
        self.abscissa
            .iter()
            .zip(&self.intensity)
            .map(|(&x, &y)| (x, y))
            .max_by(|a, b| a.1.total_cmp(&b.1))
    }

    pub fn min(&self) -> Option<(f64, f64)> {
        self.abscissa
            .iter()
            .zip(&self.intensity)
            .map(|(&x, &y)| (x, y))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// Read a `#`-commented CSV with an abscissa column named after an
    /// [`Axis`], an `intensity` column and optionally `uncertainty`.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers()?.clone();
        let (x_idx, axis) = headers
            .iter()
            .enumerate()
            .find_map(|(i, h)| Axis::from_column(h).map(|a| (i, a)))
            .ok_or_else(|| Error::Validation("no abscissa column (wavelength_nm, detuning_hz, omega_rad_s)".into()))?;
        let y_idx = headers
            .iter()
            .position(|h| h == "intensity")
            .ok_or_else(|| Error::Validation("no `intensity` column".into()))?;
        let u_idx = headers.iter().position(|h| h == "uncertainty");

        let parse = |rec: &csv::StringRecord, i: usize| -> Result<f64> {
            let field = rec.get(i).unwrap_or("");
            field
                .parse::<f64>()
                .map_err(|_| Error::Validation(format!("cannot parse `{field}` as a number")))
        };
        let (mut xs, mut ys, mut us) = (Vec::new(), Vec::new(), Vec::new());
        for rec in rdr.records() {
            let rec = rec?;
            xs.push(parse(&rec, x_idx)?);
            ys.push(parse(&rec, y_idx)?);
            if let Some(j) = u_idx {
                us.push(parse(&rec, j)?);
            }
        }
        let t = Self {
            axis,
            abscissa: xs,
            intensity: ys,
            uncertainty: u_idx.map(|_| us),
        };
        t.validate()?;
        Ok(t)
    }

    pub fn write_csv<W: Write>(&self, mut w: W, comments: &[String]) -> Result<()> {
        writeln!(w, "# schema: {SCHEMA}")?;
        for c in comments {
            writeln!(w, "# {c}")?;
        }
        match &self.uncertainty {
            Some(u) => {
                writeln!(w, "{},intensity,uncertainty", self.axis.column())?;
                for ((x, y), s) in self.abscissa.iter().zip(&self.intensity).zip(u) {
                    writeln!(w, "{x:e},{y:e},{s:e}")?;
                }
            }
            None => {
                writeln!(w, "{},intensity", self.axis.column())?;
                for (x, y) in self.abscissa.iter().zip(&self.intensity) {
                    writeln!(w, "{x:e},{y:e}")?;
                }
            }
        }
        Ok(())
    }
}

pub fn is_strictly_monotone(xs: &[f64]) -> bool {
    if xs.len() < 2 {
        return true;
    }
    let inc = xs.windows(2).all(|w| w[1] > w[0]);
    inc || xs.windows(2).all(|w| w[1] < w[0])
}

/// `n` evenly spaced points from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (stop - start) / (n - 1) as f64;
            (0..n).map(|i| start + step * i as f64).collect()
        }
    }
}
