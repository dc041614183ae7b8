//! CSV sidecars for plotting symbols and Bessel profiles.

use std::path::Path;

use super::PipelineError;
use crate::numverify::{BesselKind, Endpoint, IntegrabilityProbe};
use crate::specfun::{bessel_i, bessel_k};

fn io(path: &Path, e: impl std::fmt::Display) -> PipelineError {
    PipelineError::Io(format!("{}: {e}", path.display()))
}

/// Columns `xi, modulus_sq`.
pub fn write_symbol(path: &Path, rows: &[(f64, f64)]) -> Result<(), PipelineError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io(path, e))?;
    w.write_record(["xi", "modulus_sq"]).map_err(|e| io(path, e))?;
    for (xi, m) in rows {
        w.write_record([xi.to_string(), m.to_string()])
            .map_err(|e| io(path, e))?;
    }
    w.flush().map_err(|e| io(path, e))
}

/// Columns `x, i_nu, k_nu, shell_sum_i, shell_sum_k`: Bessel values at
/// `x^2/2` and the probe window integrals starting at `x`, one row per
/// window.
pub fn write_bessel(path: &Path, nu: f64, probes: &[IntegrabilityProbe]) -> Result<(), PipelineError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io(path, e))?;
    w.write_record(["x", "i_nu", "k_nu", "shell_sum_i", "shell_sum_k"])
        .map_err(|e| io(path, e))?;
    for end in [Endpoint::Zero, Endpoint::Infinity] {
        let pick = |k: BesselKind| probes.iter().find(|p| p.kind == k && p.endpoint == end);
        let (Some(pi), Some(pk)) = (pick(BesselKind::I), pick(BesselKind::K)) else {
            continue;
        };
        let mut rows: Vec<_> = pi.shells.iter().zip(&pk.shells).collect();
        rows.sort_by(|a, b| a.0 .0.total_cmp(&b.0 .0));
        for (si, sk) in rows {
            let x = si.0;
            let z = 0.5 * x * x;
            let iv = bessel_i(nu, z).map(|b| b.value).unwrap_or(f64::NAN);
            let kv = bessel_k(nu, z).map(|b| b.value).unwrap_or(f64::NAN);
            w.write_record([x, iv, kv, si.2, sk.2].map(|v| v.to_string()))
                .map_err(|e| io(path, e))?;
        }
    }
    w.flush().map_err(|e| io(path, e))
}
