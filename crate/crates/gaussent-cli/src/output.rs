//! Deterministic result formatting: CSV with a versioned header and JSON.
//! Floats are printed with 12 significant digits so reruns are byte-stable.

use serde::Serialize;

use crate::sweep::SweepRow;

pub const SWEEP_CSV_VERSION: &str = "gaussent-sweep-v1";

/// 12 significant digits in scientific notation.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.11e}")
}

pub fn sweep_rows_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::new();
    out.push_str(&format!("# {SWEEP_CSV_VERSION}\n"));
    out.push_str("sweep_value,reduction,partition,criterion,value,entangled,certified,direction\n");
    for row in rows {
        let direction = row
            .direction
            .iter()
            .map(|c| fmt_float(*c))
            .collect::<Vec<_>>()
            .join(";");
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            fmt_float(row.sweep_value),
            row.reduction,
            row.partition,
            row.criterion,
            fmt_float(row.value),
            row.entangled,
            row.certified,
            direction
        ));
    }
    out
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("serializable output");
    text.push('\n');
    text
}

/// Write to the given path, or stdout when absent.
pub fn emit(out: Option<&std::path::Path>, content: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => {
            if let Some(parent) = path.parent() {
                if !parent.as_os_str().is_empty() {
                    std::fs::create_dir_all(parent)?;
                }
            }
            std::fs::write(path, content)?;
        }
        None => print!("{content}"),
    }
    Ok(())
}
