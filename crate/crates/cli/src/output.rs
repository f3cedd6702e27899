use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use cocreate_core::agent::CurveRow;

/// Collects the files a command writes, each written atomically, and the
/// manifest describing them.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    artifacts: Vec<Artifact>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Artifact {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Serialize)]
pub struct Toolchain {
    pub rustc: &'static str,
    pub package: &'static str,
    pub version: &'static str,
}

pub const TOOLCHAIN: Toolchain = Toolchain {
    rustc: env!("COCREATE_RUSTC_VERSION"),
    package: env!("CARGO_PKG_NAME"),
    version: env!("CARGO_PKG_VERSION"),
};

#[derive(Debug, Serialize)]
pub struct Manifest<'a, C: Serialize> {
    pub command: &'a str,
    pub config: &'a C,
    pub seeds: &'a [u64],
    pub artifacts: &'a [Artifact],
    pub wall_clock_seconds: f64,
    pub toolchain: &'a Toolchain,
}

/// Writes `bytes` to a sibling temporary file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl OutputDir {
    pub fn new(root: PathBuf) -> Self {
        Self {
            root,
            artifacts: Vec::new(),
        }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> std::io::Result<PathBuf> {
        let path = self.path(name);
        write_atomic(&path, bytes)?;
        self.artifacts.retain(|a| a.path != name);
        self.artifacts.push(Artifact {
            path: name.to_string(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len(),
        });
        Ok(path)
    }

    pub fn artifacts(&self) -> &[Artifact] {
        &self.artifacts
    }

    /// Writes `manifest.json` last.
    pub fn finish<C: Serialize>(
        self,
        command: &str,
        config: &C,
        seeds: &[u64],
        wall_clock_seconds: f64,
    ) -> std::io::Result<PathBuf> {
        let manifest = Manifest {
            command,
            config,
            seeds,
            artifacts: &self.artifacts,
            wall_clock_seconds,
            toolchain: &TOOLCHAIN,
        };
        let mut bytes = serde_json::to_vec_pretty(&manifest)?;
        bytes.push(b'\n');
        let path = self.path("manifest.json");
        write_atomic(&path, &bytes)?;
        Ok(path)
    }
}

pub const CURVE_HEADER: &str = "batch,mean_objective,actor_loss,critic_loss,entropy,approx_kl";
pub const COMPARE_HEADER: &str =
    "user_id,adaptive,plan1,plan1_impr_pct,plan2,plan2_impr_pct,plan3,plan3_impr_pct";
pub const SWEEP_HEADER: &str = "param,value,seed,mean_total_reward";
pub const TOTALS_HEADER: &str = "user_id,total_reward";
pub const CORRELATION_HEADER: &str = "indicator,r,n";

/// Label of the summary row appended after the per-user rows.
pub const AGGREGATE_ROW: &str = "aggregate";

pub fn curve_csv(rows: &[CurveRow]) -> String {
    let mut s = format!("{CURVE_HEADER}\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            r.batch, r.mean_objective, r.actor_loss, r.critic_loss, r.entropy, r.approx_kl
        );
    }
    s
}

/// Per-user totals followed by their sum.
pub fn totals_csv(per_user: &[f64]) -> String {
    let mut s = format!("{TOTALS_HEADER}\n");
    for (i, v) in per_user.iter().enumerate() {
        let _ = writeln!(s, "{},{v}", i + 1);
    }
    let _ = writeln!(s, "{AGGREGATE_ROW},{}", per_user.iter().sum::<f64>());
    s
}
