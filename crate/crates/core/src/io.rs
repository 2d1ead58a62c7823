//! Text formatting shared by every CSV and environment file.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::error::Result;

/// Decimal text with 17 significant digits, which round-trips any `f64`.
pub fn fmt_real(x: f64) -> String {
    if x == 0.0 {
        // keep the sign of negative zero out of the files
        return "0.0000000000000000e0".to_string();
    }
    format!("{x:.16e}")
}

pub fn parse_real(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok()
}

/// `state,action,reward` rows for a reward table.
pub fn write_reward_csv(path: &Path, rewards: &DMatrix<f64>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["state", "action", "reward"])?;
    for s in 0..rewards.nrows() {
        for a in 0..rewards.ncols() {
            w.write_record([s.to_string(), a.to_string(), fmt_real(rewards[(s, a)])])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `feature_index,weight` rows.
pub fn write_weights_csv(path: &Path, theta: &DVector<f64>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["feature_index", "weight"])?;
    for (i, x) in theta.iter().enumerate() {
        w.write_record([i.to_string(), fmt_real(*x)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    f.write_all(text.as_bytes())?;
    f.flush()?;
    Ok(())
}
