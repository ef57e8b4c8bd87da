//! End-to-end tests of the `navforge` binary: exit codes, artifact
//! layout, and determinism of the command pipeline.

use std::path::Path;
use std::process::{Command, Output};

fn navforge(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_navforge"));
    cmd.args(args);
    cmd.env_remove("NAVFORGE_SEED");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary should run")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no exit code")
}

fn train_tiny(out_dir: &Path, seed: &str, epochs: &str) -> Output {
    navforge(
        &[
            "train",
            "--robot",
            "turtlebot2",
            "--task",
            "goto_position",
            "--seed",
            seed,
            "--epochs",
            epochs,
            "--num-envs",
            "4",
            "--config",
            tiny_config().to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
            "--workers",
            "1",
        ],
        &[],
    )
}

/// Small net + short episodes so the pipeline tests stay fast.
fn tiny_config() -> std::path::PathBuf {
    let dir = std::env::temp_dir().join("navforge-cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("tiny.toml");
    std::fs::write(
        &path,
        "max_episode_steps = 40\n[ppo]\nhidden_sizes = [8]\nrollout_steps = 8\nminibatches = 2\nepochs = 2\n",
    )
    .unwrap();
    path
}

#[test]
fn unknown_task_exits_2_with_registry_listing() {
    let out = navforge(
        &["train", "--robot", "turtlebot2", "--task", "fly_to_moon", "--epochs", "1"],
        &[],
    );
    assert_eq!(code(&out), 2);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("goto_position"), "should list available tasks: {stderr}");
}

#[test]
fn zero_epochs_writes_initial_checkpoint_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = train_tiny(dir.path(), "1", "0");
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("checkpoint.bin").exists());
    assert!(dir.path().join("curve.csv").exists());
    let manifest = std::fs::read_to_string(dir.path().join("manifest.json")).unwrap();
    let m: serde_json::Value = serde_json::from_str(&manifest).unwrap();
    assert_eq!(m["command"], "train");
    assert!(m["finished_at"].is_string());
}

#[test]
fn train_eval_replay_report_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let train_out = dir.path().join("train");
    let out = train_tiny(&train_out, "2", "3");
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let ck = train_out.join("checkpoint.bin");

    let eval_out = dir.path().join("eval");
    let traj = eval_out.join("traj.csv");
    std::fs::create_dir_all(&eval_out).unwrap();
    let out = navforge(
        &[
            "eval",
            "--checkpoint",
            ck.to_str().unwrap(),
            "--config",
            tiny_config().to_str().unwrap(),
            "--seed",
            "5",
            "--num-envs",
            "4",
            "--episodes",
            "8",
            "--trajectory",
            traj.to_str().unwrap(),
            "--out",
            eval_out.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(eval_out.join("summary.json").exists());
    assert!(eval_out.join("episodes.csv").exists());

    let replay_out = dir.path().join("replay");
    let out = navforge(
        &[
            "replay",
            "--trajectory",
            traj.to_str().unwrap(),
            "--out",
            replay_out.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let svg = std::fs::read_to_string(replay_out.join("paths.svg")).unwrap();
    assert!(svg.contains("<polyline"));

    let report_out = dir.path().join("report");
    let out = navforge(
        &[
            "report",
            "--eval-dirs",
            eval_out.to_str().unwrap(),
            "--out",
            report_out.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("turtlebot2"));
    assert!(stdout.contains("---"), "inapplicable metrics should render as dashes");
    assert!(report_out.join("report.json").exists());
}

#[test]
fn eval_twice_produces_identical_summaries() {
    let dir = tempfile::tempdir().unwrap();
    let train_out = dir.path().join("train");
    assert_eq!(code(&train_tiny(&train_out, "3", "2")), 0);
    let ck = train_out.join("checkpoint.bin");

    let mut texts = Vec::new();
    for name in ["a", "b"] {
        let eval_out = dir.path().join(name);
        std::fs::create_dir_all(&eval_out).unwrap();
        let out = navforge(
            &[
                "eval",
                "--checkpoint",
                ck.to_str().unwrap(),
                "--config",
                tiny_config().to_str().unwrap(),
                "--seed",
                "7",
                "--num-envs",
                "4",
                "--episodes",
                "8",
                "--out",
                eval_out.to_str().unwrap(),
            ],
            &[],
        );
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        texts.push(std::fs::read_to_string(eval_out.join("summary.json")).unwrap());
    }
    assert_eq!(texts[0], texts[1]);
}

#[test]
fn corrupted_checkpoint_exits_2_with_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let ck = dir.path().join("bad.bin");
    std::fs::write(&ck, b"NAVFCKPTgarbage").unwrap();
    let out = navforge(
        &[
            "eval",
            "--robot",
            "turtlebot2",
            "--task",
            "goto_position",
            "--checkpoint",
            ck.to_str().unwrap(),
            "--out",
            dir.path().to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(code(&out), 2);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("corrupted checkpoint"), "{stderr}");
}

#[test]
fn malformed_trajectory_exits_2_naming_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let traj = dir.path().join("bad.csv");
    std::fs::write(
        &traj,
        "env,t,x,y,yaw,vx,vy,omega,a0,reward,events\n0,0,1,2,0.5,0,0,0,0.1,1.0,\nnot,a,valid,row\n",
    )
    .unwrap();
    let out = navforge(
        &["replay", "--trajectory", traj.to_str().unwrap(), "--out", dir.path().to_str().unwrap()],
        &[],
    );
    assert_eq!(code(&out), 2);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line 3"), "{stderr}");
}

#[test]
fn navforge_seed_env_var_is_the_seed_fallback() {
    let dir = tempfile::tempdir().unwrap();
    let out = navforge(
        &[
            "train",
            "--robot",
            "turtlebot2",
            "--task",
            "goto_position",
            "--epochs",
            "0",
            "--num-envs",
            "4",
            "--config",
            tiny_config().to_str().unwrap(),
            "--out",
            dir.path().to_str().unwrap(),
        ],
        &[("NAVFORGE_SEED", "123")],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["global_seed"], 123);
}

#[test]
fn scripted_multi_seed_training_yields_per_seed_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    for seed in ["10", "11", "12"] {
        let out_dir = dir.path().join(format!("seed-{seed}"));
        let out = train_tiny(&out_dir, seed, "1");
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        assert!(out_dir.join("checkpoint.bin").exists());
        assert!(out_dir.join("curve.csv").exists());
    }
}

#[test]
fn incompatible_pair_exits_2() {
    let out = navforge(
        &["train", "--robot", "kingfisher", "--task", "goto_pose", "--epochs", "0"],
        &[],
    );
    assert_eq!(code(&out), 2);
}
