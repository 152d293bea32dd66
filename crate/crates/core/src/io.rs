//! File formats shared by the library and the CLI.
//!
//! Grids travel as raw little-endian `f64` in row-major order (`<name>.f64`)
//! next to a JSON sidecar (`<name>.json`) that captures the dimensions, what
//! the grid is, how it was produced, and — when written by the CLI — the
//! exact resolved configuration, so any artifact can be regenerated from its
//! sidecar alone. Small grids and analysis outputs also export as CSV with
//! a header row.

use crate::analysis::RadialSpectrum;
use crate::field::{FieldRealization, LatticeSpec, Provenance};
use crate::spectral::SpectralGrid;
use crate::theta::{PhiSpec, SupportSign};
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("sidecar parse error: {0}")]
    Sidecar(#[from] serde_json::Error),
    #[error("grid data length {found} does not match sidecar dimensions {n1} x {n2}")]
    LengthMismatch { found: usize, n1: usize, n2: usize },
    #[error("{0}")]
    Format(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridKind {
    Field,
    Spectrum,
    Periodogram,
    Autocovariance,
}

/// Sidecar describing one raw grid file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridSidecar {
    pub kind: GridKind,
    pub n1: usize,
    pub n2: usize,
    /// Always `f64le`, row-major.
    pub dtype: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi: Option<PhiSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub support: Option<SupportSign>,
    /// `zeroed_singular_bin` or `true_value`, for spectrum grids.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dc_policy: Option<String>,
    /// Resolved experiment configuration, embedded verbatim by the CLI.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<serde_json::Value>,
}

impl GridSidecar {
    pub fn for_field(field: &FieldRealization) -> Self {
        Self {
            kind: GridKind::Field,
            n1: field.lattice.n1,
            n2: field.lattice.n2,
            dtype: "f64le".into(),
            provenance: Some(field.provenance.clone()),
            seed: Some(field.seed),
            sigma2: Some(field.sigma2_eps),
            alpha: None,
            phi: None,
            support: None,
            dc_policy: None,
            config: None,
        }
    }

    pub fn for_spectrum(
        grid: &SpectralGrid,
        alpha: f64,
        phi: &PhiSpec,
        support: SupportSign,
        sigma2: f64,
    ) -> Self {
        Self {
            kind: GridKind::Spectrum,
            n1: grid.n1,
            n2: grid.n2,
            dtype: "f64le".into(),
            provenance: None,
            seed: None,
            sigma2: Some(sigma2),
            alpha: Some(alpha),
            phi: Some(phi.clone()),
            support: Some(support),
            dc_policy: Some(
                if grid.zeroed_singular_bin {
                    "zeroed_singular_bin"
                } else {
                    "true_value"
                }
                .into(),
            ),
            config: None,
        }
    }
}

/// `name.f64` -> `name.json`.
pub fn sidecar_path(data_path: &Path) -> PathBuf {
    data_path.with_extension("json")
}

/// Writes the raw grid and its sidecar next to each other.
pub fn write_raw_grid(data_path: &Path, values: &[f64], sidecar: &GridSidecar) -> Result<(), IoError> {
    if values.len() != sidecar.n1 * sidecar.n2 {
        return Err(IoError::LengthMismatch {
            found: values.len(),
            n1: sidecar.n1,
            n2: sidecar.n2,
        });
    }
    let mut buf = Vec::with_capacity(values.len() * 8);
    for v in values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    let mut f = fs::File::create(data_path)?;
    f.write_all(&buf)?;
    let sc = serde_json::to_vec_pretty(sidecar)?;
    fs::write(sidecar_path(data_path), sc)?;
    Ok(())
}

/// Reads a raw grid and its sidecar; checks the declared dimensions.
pub fn read_raw_grid(data_path: &Path) -> Result<(Vec<f64>, GridSidecar), IoError> {
    let sc_text = fs::read_to_string(sidecar_path(data_path))?;
    let sidecar: GridSidecar = serde_json::from_str(&sc_text)?;
    if sidecar.dtype != "f64le" {
        return Err(IoError::Format(format!(
            "unsupported dtype {:?}",
            sidecar.dtype
        )));
    }
    let mut f = fs::File::open(data_path)?;
    let mut buf = Vec::new();
    f.read_to_end(&mut buf)?;
    if buf.len() % 8 != 0 {
        return Err(IoError::Format("data not a multiple of 8 bytes".into()));
    }
    let values: Vec<f64> = buf
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    if values.len() != sidecar.n1 * sidecar.n2 {
        return Err(IoError::LengthMismatch {
            found: values.len(),
            n1: sidecar.n1,
            n2: sidecar.n2,
        });
    }
    Ok((values, sidecar))
}

/// Reads a field realization written with [`write_raw_grid`] +
/// [`GridSidecar::for_field`].
pub fn read_field(data_path: &Path) -> Result<FieldRealization, IoError> {
    let (values, sidecar) = read_raw_grid(data_path)?;
    if sidecar.kind != GridKind::Field {
        return Err(IoError::Format(format!(
            "expected a field grid, found {:?}",
            sidecar.kind
        )));
    }
    let provenance = sidecar
        .provenance
        .ok_or_else(|| IoError::Format("field sidecar lacks provenance".into()))?;
    Ok(FieldRealization {
        lattice: LatticeSpec {
            n1: sidecar.n1,
            n2: sidecar.n2,
        },
        values,
        provenance,
        seed: sidecar.seed.unwrap_or(0),
        sigma2_eps: sidecar.sigma2.unwrap_or(f64::NAN),
    })
}

/// CSV `(i, j, value)` for small field grids.
pub fn write_field_csv<W: Write>(mut w: W, field: &FieldRealization) -> Result<(), IoError> {
    writeln!(w, "i,j,value")?;
    for i in 0..field.lattice.n1 {
        for j in 0..field.lattice.n2 {
            writeln!(w, "{},{},{}", i, j, field.value(i, j))?;
        }
    }
    Ok(())
}

/// CSV `(k1, k2, lambda1, lambda2, f)` for a spectral grid; optional extra
/// columns carry asymptote values and ratio when the caller provides them.
pub fn write_spectrum_csv<W: Write>(
    mut w: W,
    grid: &SpectralGrid,
    asymptote: Option<&[f64]>,
) -> Result<(), IoError> {
    if let Some(a) = asymptote {
        if a.len() != grid.values.len() {
            return Err(IoError::Format(
                "asymptote column length mismatch".into(),
            ));
        }
        writeln!(w, "k1,k2,lambda1,lambda2,f,asymptote,ratio")?;
    } else {
        writeln!(w, "k1,k2,lambda1,lambda2,f")?;
    }
    for k1 in 0..grid.n1 {
        for k2 in 0..grid.n2 {
            let fr = grid.frequency(k1, k2);
            let v = grid.value(k1, k2);
            match asymptote {
                Some(a) => {
                    let asym = a[k1 * grid.n2 + k2];
                    let ratio = if asym != 0.0 { v / asym } else { f64::NAN };
                    writeln!(
                        w,
                        "{},{},{},{},{},{},{}",
                        k1, k2, fr.lambda1, fr.lambda2, v, asym, ratio
                    )?;
                }
                None => writeln!(w, "{},{},{},{},{}", k1, k2, fr.lambda1, fr.lambda2, v)?,
            }
        }
    }
    Ok(())
}

/// CSV export of a radial spectrum: one row per bin.
pub fn write_radial_csv<W: Write>(mut w: W, rad: &RadialSpectrum) -> Result<(), IoError> {
    writeln!(w, "bin_lo,bin_hi,rep_radius,mean_ordinate,count")?;
    let n = rad.mean_ordinate.len();
    for b in 0..n {
        writeln!(
            w,
            "{},{},{},{},{}",
            rad.bin_edges[b],
            rad.bin_edges[b + 1],
            rad.rep_radius[b],
            rad.mean_ordinate[b],
            rad.count[b]
        )?;
    }
    Ok(())
}
