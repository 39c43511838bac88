use fano_cqed::coupling::{coupling_rate, DipoleEmitter};
use fano_cqed::scatterer::{backscatter, scattering_q};
use fano_cqed::units::{ModeGeometry, Scatterer};
use log::warn;
use serde::Deserialize;

use crate::failure::{CliResult, Failure};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModesDoc {
    pub rows: Vec<ModeRow>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeRow {
    #[serde(default)]
    pub name: Option<String>,
    pub mode: ModeGeometry,
    pub scatterer: Scatterer,
    /// Needed for the g_max column.
    #[serde(default)]
    pub emitter: Option<DipoleEmitter>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeSummary {
    pub q_ss: f64,
    pub inv_q_beta: f64,
    pub split_ghz: f64,
    /// Coupling at the field maximum, GHz.
    pub g_max_ghz: Option<f64>,
}

pub fn evaluate(row: &ModeRow) -> fano_cqed::Result<ModeSummary> {
    let q_ss = scattering_q(&row.mode, &row.scatterer)?;
    let b = backscatter(&row.mode, &row.scatterer)?;
    let g_max_ghz = match &row.emitter {
        Some(e) => Some(coupling_rate(e, &row.mode, 1.0, e.n_host)?.hz() / 1e9),
        None => None,
    };
    Ok(ModeSummary {
        q_ss,
        inv_q_beta: b.normalized_splitting(),
        split_ghz: b.splitting_hz() / 1e9,
        g_max_ghz,
    })
}

/// Renders the table; rows that fail are reported and leave their cells
/// empty. Returns the CSV and the number of failed rows.
pub fn run(doc: &ModesDoc) -> (String, usize) {
    let mut out = String::from("# schema: fano-cqed/1\nname,q_ss,inv_q_beta,split_ghz,g_max_ghz,error\n");
    let mut failed = 0;
    for (i, row) in doc.rows.iter().enumerate() {
        let name = row.name.clone().unwrap_or_else(|| format!("row{i}"));
        match evaluate(row) {
            Ok(s) => {
                let g = s.g_max_ghz.map(|g| format!("{g:e}")).unwrap_or_default();
                out.push_str(&format!("{name},{:e},{:e},{:e},{g},\n", s.q_ss, s.inv_q_beta, s.split_ghz));
            }
            Err(e) => {
                warn!("{name}: {e}");
                failed += 1;
                out.push_str(&format!("{name},,,,,\"{}\"\n", e.to_string().replace('"', "'")));
            }
        }
    }
    (out, failed)
}

pub fn check(failed: usize) -> CliResult<()> {
    if failed > 0 {
        return Err(Failure::Numerical(format!("{failed} row(s) failed")));
    }
    Ok(())
}
