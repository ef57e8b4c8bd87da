//! Trajectory dump: one CSV row per control step per environment, with a
//! JSON sidecar describing the run (robot, task, arena, goals) so replays
//! need nothing else.

use crate::error::{read_err, write_err, CliError, Result};
use serde::{Deserialize, Serialize};
use std::io::Write as _;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Sidecar {
    pub robot: String,
    pub task: String,
    pub arena_radius: f64,
    pub num_envs: usize,
    pub action_dim: usize,
    /// Goal poses seen during the dump, as [x, y, yaw].
    pub goals: Vec<[f64; 3]>,
    /// Obstacles as [x, y, radius].
    pub obstacles: Vec<[f64; 3]>,
    /// Resolved run settings.
    pub config: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub env: usize,
    pub t: usize,
    pub x: f64,
    pub y: f64,
    pub yaw: f64,
    pub vx: f64,
    pub vy: f64,
    pub omega: f64,
    pub actions: Vec<f64>,
    pub reward: f64,
    /// Semicolon-joined event tags ("goal;terminated" etc.), often empty.
    pub events: String,
}

pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

pub struct TrajectoryWriter {
    file: std::fs::File,
    path: PathBuf,
    action_dim: usize,
}

impl TrajectoryWriter {
    pub fn create(path: &Path, action_dim: usize) -> Result<Self> {
        let mut file = std::fs::File::create(path).map_err(|e| write_err(path, e))?;
        let mut header = String::from("env,t,x,y,yaw,vx,vy,omega");
        for i in 0..action_dim {
            header.push_str(&format!(",a{i}"));
        }
        header.push_str(",reward,events");
        writeln!(file, "{header}").map_err(|e| write_err(path, e))?;
        Ok(TrajectoryWriter { file, path: path.to_path_buf(), action_dim })
    }

    pub fn push(&mut self, row: &Row) -> Result<()> {
        debug_assert_eq!(row.actions.len(), self.action_dim);
        let mut line = format!(
            "{},{},{},{},{},{},{},{}",
            row.env, row.t, row.x, row.y, row.yaw, row.vx, row.vy, row.omega
        );
        for a in &row.actions {
            line.push_str(&format!(",{a}"));
        }
        line.push_str(&format!(",{},{}", row.reward, row.events));
        writeln!(self.file, "{line}").map_err(|e| write_err(&self.path, e))
    }

    pub fn finish(self, sidecar: &Sidecar) -> Result<()> {
        let path = sidecar_path(&self.path);
        let text = serde_json::to_string_pretty(sidecar)
            .map_err(|e| CliError::Fault(format!("sidecar encode: {e}")))?;
        std::fs::write(&path, text).map_err(|e| write_err(&path, e))
    }
}

/// Parses a trajectory CSV; malformed input names the offending line.
pub fn read(path: &Path) -> Result<Vec<Row>> {
    let text = std::fs::read_to_string(path).map_err(|e| read_err(path, e))?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| CliError::Usage(format!("{}: empty file, expected a header", path.display())))?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.len() < 10 || cols[..8] != ["env", "t", "x", "y", "yaw", "vx", "vy", "omega"] {
        return Err(CliError::Usage(format!(
            "{} line 1: unrecognized trajectory header",
            path.display()
        )));
    }
    let action_dim = cols.len() - 10;
    let mut rows = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols.len() {
            return Err(CliError::Usage(format!(
                "{} line {lineno}: expected {} fields, found {}",
                path.display(),
                cols.len(),
                fields.len()
            )));
        }
        let num = |j: usize| -> Result<f64> {
            fields[j].parse().map_err(|_| {
                CliError::Usage(format!(
                    "{} line {lineno}: field {:?} ({}) is not a number",
                    path.display(),
                    cols[j],
                    fields[j]
                ))
            })
        };
        let int = |j: usize| -> Result<usize> {
            fields[j].parse().map_err(|_| {
                CliError::Usage(format!(
                    "{} line {lineno}: field {:?} ({}) is not an integer",
                    path.display(),
                    cols[j],
                    fields[j]
                ))
            })
        };
        rows.push(Row {
            env: int(0)?,
            t: int(1)?,
            x: num(2)?,
            y: num(3)?,
            yaw: num(4)?,
            vx: num(5)?,
            vy: num(6)?,
            omega: num(7)?,
            actions: (8..8 + action_dim).map(num).collect::<Result<_>>()?,
            reward: num(8 + action_dim)?,
            events: fields[9 + action_dim].to_string(),
        });
    }
    Ok(rows)
}

pub fn read_sidecar(csv_path: &Path) -> Result<Option<Sidecar>> {
    let path = sidecar_path(csv_path);
    match std::fs::read_to_string(&path) {
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(read_err(&path, e)),
        Ok(text) => serde_json::from_str(&text)
            .map(Some)
            .map_err(|e| CliError::Usage(format!("invalid sidecar {}: {e}", path.display()))),
    }
}
