//! Versioned checkpoint container.
//!
//! Layout: 8-byte magic, little-endian u32 format version, little-endian
//! u64 JSON header length, the JSON header, then all tensor data as
//! little-endian f32 in the order listed by the header. The header names
//! and shapes every tensor and carries the scaler statistics, learning
//! rate, and RNG state (global seed + update counter), so a run can be
//! evaluated or resumed from the file alone plus the environment config.

use crate::error::{read_err, write_err, CliError, Result};
use navforge_core::envman::EnvBatch;
use navforge_core::ppo::{HeadKind, PpoConfig, RunningScaler, Trainer};
use serde::{Deserialize, Serialize};
use std::io::Write as _;
use std::path::Path;

const MAGIC: &[u8; 8] = b"NAVFCKPT";
const VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TensorInfo {
    pub name: String,
    pub shape: Vec<usize>,
    /// Element offset into the data blob.
    pub offset: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalerState {
    pub mean: Vec<f64>,
    pub var: Vec<f64>,
    pub count: f64,
}

impl ScalerState {
    fn capture(s: &RunningScaler) -> Self {
        ScalerState { mean: s.mean.clone(), var: s.var.clone(), count: s.count }
    }

    fn restore(&self, s: &mut RunningScaler) -> Result<()> {
        if self.mean.len() != s.dim() || self.var.len() != s.dim() {
            return Err(CliError::Usage(format!(
                "checkpoint scaler dimension {} does not match environment {}",
                self.mean.len(),
                s.dim()
            )));
        }
        s.mean = self.mean.clone();
        s.var = self.var.clone();
        s.count = self.count;
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Header {
    pub version: u32,
    pub robot: String,
    pub task: String,
    pub obs_dim: usize,
    pub action_dim: usize,
    pub hidden_sizes: Vec<usize>,
    /// "gaussian" or "bernoulli".
    pub head: String,
    pub global_seed: u64,
    pub updates: u64,
    pub lr: f64,
    pub obs_scaler: ScalerState,
    pub val_scaler: ScalerState,
    pub tensors: Vec<TensorInfo>,
    /// Informational copy of the resolved run settings.
    pub config_echo: serde_json::Value,
}

/// A loaded checkpoint: parsed header plus the flat tensor blob widened
/// back to f64.
#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub header: Header,
    pub data: Vec<f64>,
}

fn layer_tensors(prefix: &str, sizes: &[usize], offset: &mut usize, out: &mut Vec<TensorInfo>) {
    for l in 0..sizes.len() - 1 {
        let (fan_in, fan_out) = (sizes[l], sizes[l + 1]);
        out.push(TensorInfo {
            name: format!("{prefix}/layer{l}/weight"),
            shape: vec![fan_out, fan_in],
            offset: *offset,
        });
        *offset += fan_out * fan_in;
        out.push(TensorInfo {
            name: format!("{prefix}/layer{l}/bias"),
            shape: vec![fan_out],
            offset: *offset,
        });
        *offset += fan_out;
    }
}

/// Writes `trainer` to `path`. `robot`/`task` are the registry names the
/// trainer was built for; `config_echo` is stored verbatim.
pub fn save(
    path: &Path,
    trainer: &Trainer,
    robot: &str,
    task: &str,
    config_echo: serde_json::Value,
) -> Result<()> {
    let mut tensors = Vec::new();
    let mut offset = 0usize;
    layer_tensors("policy", &trainer.policy.net.sizes, &mut offset, &mut tensors);
    if !trainer.policy.log_std.is_empty() {
        tensors.push(TensorInfo {
            name: "policy/log_std".into(),
            shape: vec![trainer.policy.log_std.len()],
            offset,
        });
        offset += trainer.policy.log_std.len();
    }
    layer_tensors("value", &trainer.value.sizes, &mut offset, &mut tensors);

    let data = trainer.params_flat();
    debug_assert_eq!(data.len(), offset);

    let header = Header {
        version: VERSION,
        robot: robot.to_string(),
        task: task.to_string(),
        obs_dim: trainer.policy.net.input_dim(),
        action_dim: trainer.policy.action_dim(),
        hidden_sizes: trainer.cfg.hidden_sizes.clone(),
        head: match trainer.policy.head {
            HeadKind::Gaussian => "gaussian".into(),
            HeadKind::Bernoulli => "bernoulli".into(),
        },
        global_seed: trainer.global_seed(),
        updates: trainer.updates,
        lr: trainer.lr,
        obs_scaler: ScalerState::capture(&trainer.obs_scaler),
        val_scaler: ScalerState::capture(&trainer.val_scaler),
        tensors,
        config_echo,
    };
    let header_json =
        serde_json::to_vec(&header).map_err(|e| CliError::Fault(format!("header encode: {e}")))?;

    let mut buf = Vec::with_capacity(16 + header_json.len() + data.len() * 4);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(header_json.len() as u64).to_le_bytes());
    buf.extend_from_slice(&header_json);
    for v in &data {
        buf.extend_from_slice(&(*v as f32).to_le_bytes());
    }

    let mut f = std::fs::File::create(path).map_err(|e| write_err(path, e))?;
    f.write_all(&buf).map_err(|e| write_err(path, e))
}

pub fn load(path: &Path) -> Result<Checkpoint> {
    let bytes = std::fs::read(path).map_err(|e| read_err(path, e))?;
    let bad = |what: &str| {
        CliError::Usage(format!("corrupted checkpoint {}: {what}", path.display()))
    };
    if bytes.len() < 20 {
        return Err(bad("file shorter than the fixed header"));
    }
    if &bytes[..8] != MAGIC {
        return Err(bad("bad magic (not a checkpoint file)"));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    if version != VERSION {
        return Err(bad(&format!("unsupported format version {version}")));
    }
    let hlen = u64::from_le_bytes(bytes[12..20].try_into().unwrap()) as usize;
    let data_start = 20 + hlen;
    if bytes.len() < data_start {
        return Err(bad("truncated JSON header"));
    }
    let header: Header = serde_json::from_slice(&bytes[20..data_start])
        .map_err(|e| bad(&format!("unreadable JSON header: {e}")))?;

    let expected: usize = header
        .tensors
        .iter()
        .map(|t| t.shape.iter().product::<usize>())
        .sum();
    let blob = &bytes[data_start..];
    if blob.len() != expected * 4 {
        return Err(bad(&format!(
            "tensor blob holds {} bytes, header promises {}",
            blob.len(),
            expected * 4
        )));
    }
    let data = blob
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
        .collect();
    Ok(Checkpoint { header, data })
}

impl Checkpoint {
    /// Rebuilds a trainer for `env`, restoring parameters, scalers,
    /// learning rate, and the update counter. Fails if the checkpoint was
    /// produced for a different robot/task or observation layout.
    pub fn into_trainer(self, env: &EnvBatch) -> Result<Trainer> {
        let cfg = env.config();
        let (robot, task) = (cfg.robot.kind.name(), cfg.task.kind.name());
        if self.header.robot != robot || self.header.task != task {
            return Err(CliError::Usage(format!(
                "checkpoint was trained for {}/{} but the environment is {robot}/{task}",
                self.header.robot, self.header.task
            )));
        }
        if self.header.obs_dim != env.obs_dim() || self.header.action_dim != env.action_dim() {
            return Err(CliError::Usage(format!(
                "checkpoint dimensions (obs {}, action {}) do not match the environment (obs {}, action {})",
                self.header.obs_dim,
                self.header.action_dim,
                env.obs_dim(),
                env.action_dim()
            )));
        }
        let ppo = PpoConfig { hidden_sizes: self.header.hidden_sizes.clone(), ..PpoConfig::default() };
        let mut trainer = Trainer::new(ppo, env, self.header.global_seed);
        trainer
            .set_params_flat(&self.data)
            .map_err(|e| CliError::Usage(format!("checkpoint/network mismatch: {e}")))?;
        self.header.obs_scaler.restore(&mut trainer.obs_scaler)?;
        self.header.val_scaler.restore(&mut trainer.val_scaler)?;
        trainer.lr = self.header.lr;
        trainer.updates = self.header.updates;
        Ok(trainer)
    }
}
