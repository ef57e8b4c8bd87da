//! Evaluation summaries and the cross-robot/task comparison table.
//!
//! Heading metrics are stored and rendered in degrees (radians × 180/π);
//! metrics that do not apply to a task render as "---".

use crate::error::{read_err, CliError, Result};
use navforge_core::metrics::{AggregateMetrics, Summary};
use navforge_core::tasks::TaskKind;
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
    pub n: u64,
}

impl From<Summary> for Stat {
    fn from(s: Summary) -> Self {
        Stat { mean: s.mean, std: s.std, n: s.n }
    }
}

impl Stat {
    fn scaled(s: Summary, k: f64) -> Self {
        Stat { mean: s.mean * k, std: s.std * k, n: s.n }
    }
}

/// Per-run evaluation summary, written as `summary.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalSummary {
    pub schema_version: u32,
    pub robot: String,
    pub task: String,
    pub seed: u64,
    pub episodes: u64,
    pub success_rate: f64,
    pub early_termination_rate: f64,
    pub episode_return: Stat,
    pub episode_length: Stat,
    /// Distance to the active goal at episode end [m].
    pub final_distance: Stat,
    /// |heading error| at episode end [degrees].
    pub final_heading_error_deg: Stat,
    /// First step at which the success condition held, successful episodes only.
    pub time_to_success: Stat,
    /// Mean |v_ref − v| [m/s] (velocity tracking).
    pub lin_vel_error: Stat,
    /// Mean |ω_ref − ω| [degrees/s] (velocity tracking).
    pub ang_vel_error_deg: Stat,
    pub ctrl_variation: Stat,
    pub goals_reached: Stat,
    pub config: serde_json::Value,
}

const RAD_TO_DEG: f64 = 180.0 / core::f64::consts::PI;

impl EvalSummary {
    pub fn from_aggregate(
        robot: &str,
        task: &str,
        seed: u64,
        agg: &AggregateMetrics,
        config: serde_json::Value,
    ) -> Self {
        EvalSummary {
            schema_version: SCHEMA_VERSION,
            robot: robot.to_string(),
            task: task.to_string(),
            seed,
            episodes: agg.episodes,
            success_rate: agg.success_rate,
            early_termination_rate: agg.early_termination_rate,
            episode_return: agg.episode_return.into(),
            episode_length: agg.episode_length.into(),
            final_distance: agg.final_distance.into(),
            final_heading_error_deg: Stat::scaled(agg.final_heading_error, RAD_TO_DEG),
            time_to_success: agg.time_to_success.into(),
            lin_vel_error: agg.mean_lin_vel_error.into(),
            ang_vel_error_deg: Stat::scaled(agg.mean_ang_vel_error, RAD_TO_DEG),
            ctrl_variation: agg.ctrl_variation.into(),
            goals_reached: agg.goals_reached.into(),
            config,
        }
    }
}

pub fn read_summary(dir: &Path) -> Result<EvalSummary> {
    let path = dir.join("summary.json");
    let text = std::fs::read_to_string(&path).map_err(|e| read_err(&path, e))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("invalid summary {}: {e}", path.display())))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Column {
    Success,
    DistErr,
    HeadingErr,
    TimeToTarget,
    LinVelErr,
    AngVelErr,
    CtrlVariation,
    GoalsReached,
}

const COLUMNS: [(Column, &str); 8] = [
    (Column::Success, "Success"),
    (Column::DistErr, "Dist Err [m]"),
    (Column::HeadingErr, "Heading Err [deg]"),
    (Column::TimeToTarget, "Time [steps]"),
    (Column::LinVelErr, "Lin Vel Err [m/s]"),
    (Column::AngVelErr, "Ang Vel Err [deg/s]"),
    (Column::CtrlVariation, "Ctrl Var"),
    (Column::GoalsReached, "Goals"),
];

fn applicable(col: Column, task: TaskKind) -> bool {
    use Column::*;
    match col {
        Success | CtrlVariation => true,
        DistErr => task != TaskKind::TrackVelocities,
        HeadingErr => task == TaskKind::GoToPose,
        TimeToTarget => matches!(
            task,
            TaskKind::GoToPosition | TaskKind::GoToPose | TaskKind::GoToPositionObstacles
        ),
        LinVelErr | AngVelErr => task == TaskKind::TrackVelocities,
        GoalsReached => task == TaskKind::GoThroughPositions,
    }
}

fn cell(col: Column, s: &EvalSummary) -> String {
    let task = match TaskKind::by_name(&s.task) {
        Some(t) => t,
        None => return "---".into(),
    };
    if !applicable(col, task) {
        return "---".into();
    }
    let stat = |st: &Stat| format!("{:.3} ± {:.3}", st.mean, st.std);
    match col {
        Column::Success => format!("{:.2}", s.success_rate),
        Column::DistErr => stat(&s.final_distance),
        Column::HeadingErr => stat(&s.final_heading_error_deg),
        Column::TimeToTarget => stat(&s.time_to_success),
        Column::LinVelErr => stat(&s.lin_vel_error),
        Column::AngVelErr => stat(&s.ang_vel_error_deg),
        Column::CtrlVariation => stat(&s.ctrl_variation),
        Column::GoalsReached => stat(&s.goals_reached),
    }
}

/// Comparison table in plain text and JSON, one row per summary.
pub fn render(summaries: &[EvalSummary]) -> Result<(String, serde_json::Value)> {
    if summaries.is_empty() {
        return Err(CliError::Usage("no evaluation summaries to report".into()));
    }
    let version = summaries[0].schema_version;
    if let Some(bad) = summaries.iter().find(|s| s.schema_version != version) {
        return Err(CliError::Usage(format!(
            "mixed summary schema versions: {} and {}",
            version, bad.schema_version
        )));
    }

    let mut header: Vec<String> = vec!["Robot".into(), "Task".into()];
    header.extend(COLUMNS.iter().map(|(_, label)| label.to_string()));
    let mut rows: Vec<Vec<String>> = Vec::new();
    for s in summaries {
        let mut row = vec![s.robot.clone(), s.task.clone()];
        row.extend(COLUMNS.iter().map(|(c, _)| cell(*c, s)));
        rows.push(row);
    }

    let mut widths: Vec<usize> = header.iter().map(String::len).collect();
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let fmt_row = |cells: &[String]| -> String {
        cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect::<Vec<_>>()
            .join("  ")
    };
    let mut text = fmt_row(&header);
    text.push('\n');
    text.push_str(&"-".repeat(text.len() - 1));
    text.push('\n');
    for row in &rows {
        text.push_str(&fmt_row(row));
        text.push('\n');
    }

    let json = serde_json::json!({
        "schema_version": version,
        "columns": header,
        "rows": rows,
        "summaries": summaries,
    });
    Ok((text, json))
}
