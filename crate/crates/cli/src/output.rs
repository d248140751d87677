//! Artifact writing. Every file goes through [`OutDir`], which only accepts
//! bare file names so nothing lands outside the output directory.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::Serialize;

use crate::error::{Classify, CmdResult};

pub struct OutDir {
    root: PathBuf,
    written: Vec<String>,
}

impl OutDir {
    pub fn create(root: &Path) -> CmdResult<Self> {
        std::fs::create_dir_all(root)
            .with_context(|| format!("cannot create output directory {}", root.display()))
            .runtime()?;
        Ok(Self { root: root.to_path_buf(), written: Vec::new() })
    }

    fn path_for(&self, name: &str) -> anyhow::Result<PathBuf> {
        let p = Path::new(name);
        if p.components().count() != 1 || p.file_name().is_none() {
            bail!("artifact name {name:?} must be a bare file name");
        }
        Ok(self.root.join(p))
    }

    /// Creates `name` and hands a buffered writer to `fill`.
    pub fn write_with<F>(&mut self, name: &str, fill: F) -> CmdResult<()>
    where
        F: FnOnce(&mut dyn Write) -> anyhow::Result<()>,
    {
        let path = self.path_for(name).runtime()?;
        let f = File::create(&path).with_context(|| format!("cannot create {}", path.display())).runtime()?;
        let mut w = BufWriter::new(f);
        fill(&mut w).with_context(|| format!("writing {}", path.display())).runtime()?;
        w.flush().with_context(|| format!("writing {}", path.display())).runtime()?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> CmdResult<()> {
        self.write_with(name, |w| Ok(w.write_all(text.as_bytes())?))
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> CmdResult<()> {
        let mut text = serde_json::to_string_pretty(value).runtime()?;
        text.push('\n');
        self.write_text(name, &text)
    }

    pub fn written(&self) -> &[String] {
        &self.written
    }
}

/// Provenance block embedded in every summary.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub command: String,
    pub scenario_path: Option<String>,
    pub scenario_name: Option<String>,
    pub inputs_sha256: String,
    pub seed: Option<u64>,
    pub overrides: Vec<String>,
    pub cli_version: &'static str,
    pub core_version: &'static str,
}

impl Provenance {
    pub fn new(command: &str, inputs_sha256: String) -> Self {
        Self {
            command: command.into(),
            scenario_path: None,
            scenario_name: None,
            inputs_sha256,
            seed: None,
            overrides: Vec::new(),
            cli_version: env!("CARGO_PKG_VERSION"),
            core_version: mmot::VERSION,
        }
    }
}

pub fn loading_gnuplot(alpha: Option<f64>, beta: Option<f64>) -> String {
    let mut s = String::from(
        "set datafile separator \",\"\n\
         set xlabel \"t (s)\"\n\
         set ylabel \"atoms in trap region\"\n\
         set key left top\n",
    );
    match (alpha, beta) {
        (Some(a), Some(b)) => {
            s.push_str(&format!("A = {a:e}\nB = {b:e}\nf(x) = A / B * (1 - exp(-B * x))\n"));
            s.push_str("plot \"loading.csv\" using 1:3 every ::1 with points title \"simulation\", \\\n     f(x) with lines title \"fit\"\n");
        }
        _ => s.push_str("plot \"loading.csv\" using 1:3 every ::1 with points title \"simulation\"\n"),
    }
    s
}

pub fn tof_gnuplot() -> String {
    "set datafile separator \",\"\n\
     set xlabel \"t^2 (ms^2)\"\n\
     set ylabel \"sigma^2 (um^2)\"\n\
     plot \"tof.csv\" using (($1*1e3)**2):(($2*5e5)**2) every ::1 with linespoints title \"horizontal\", \\\n     \
     \"tof.csv\" using (($1*1e3)**2):(($3*5e5)**2) every ::1 with linespoints title \"vertical\"\n"
        .to_string()
}

pub fn sweep_gnuplot(key: &str, columns: &[&str]) -> String {
    let mut s = format!(
        "set datafile separator \",\"\nset xlabel \"{key}\"\nset key outside\nset multiplot layout {} ,1\n",
        columns.len()
    );
    for c in columns {
        s.push_str(&format!(
            "set ylabel \"{c}\"\nplot \"sweep.csv\" using \"value\":\"{c}\" with linespoints title \"{c}\"\n"
        ));
    }
    s.push_str("unset multiplot\n");
    s
}
