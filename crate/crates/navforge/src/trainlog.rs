//! Learning-curve CSV: one row per training epoch.

use crate::error::{read_err, write_err, CliError, Result};
use navforge_core::ppo::IterationStats;
use std::io::Write as _;
use std::path::Path;

pub const HEADER: &str = "epoch,mean_reward,std_reward,kl,lr,wall_clock";

pub struct TrainLog {
    file: std::fs::File,
    path: std::path::PathBuf,
}

impl TrainLog {
    pub fn create(path: &Path) -> Result<Self> {
        let mut file = std::fs::File::create(path).map_err(|e| write_err(path, e))?;
        writeln!(file, "{HEADER}").map_err(|e| write_err(path, e))?;
        Ok(TrainLog { file, path: path.to_path_buf() })
    }

    pub fn push(&mut self, epoch: usize, stats: &IterationStats, wall_clock_s: f64) -> Result<()> {
        writeln!(
            self.file,
            "{epoch},{},{},{},{},{:.3}",
            stats.mean_reward, stats.reward_std, stats.kl, stats.lr, wall_clock_s
        )
        .map_err(|e| write_err(&self.path, e))
    }
}

/// Reads back (epoch, mean_reward) pairs for plotting.
pub fn read_curve(path: &Path) -> Result<Vec<(f64, f64)>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| match e.kind() {
        csv::ErrorKind::Io(_) => read_err(path, std::io::Error::other(e.to_string())),
        _ => CliError::Usage(format!("invalid training log {}: {e}", path.display())),
    })?;
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| {
            CliError::Usage(format!("invalid training log {} line {}: {e}", path.display(), i + 2))
        })?;
        let parse = |j: usize| -> Result<f64> {
            rec.get(j)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| {
                    CliError::Usage(format!(
                        "invalid training log {} line {}: bad field {}",
                        path.display(),
                        i + 2,
                        j + 1
                    ))
                })
        };
        out.push((parse(0)?, parse(1)?));
    }
    Ok(out)
}
