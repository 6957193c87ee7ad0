use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use riesz_lab::verify::overall;
use riesz_lab::{DomainConfig, LabError, Result, Verdict};

use crate::job::{config, Defaults, EngineConfig, FnRef, Job, JobOutput, JobSpec};
use crate::output::{exit_code, verdict, write_atomic, write_job};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub jobs: Option<usize>,
    #[serde(default)]
    pub domain: Option<DomainConfig>,
    #[serde(default)]
    pub engine: Option<EngineConfig>,
    #[serde(default)]
    pub functions: BTreeMap<String, FnRef>,
    pub checks: Vec<JobSpec>,
}

impl SuiteConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| config(format!("{}: {e}", path.display())))
    }
}

/// FNV-1a over the seed bytes and the job name.
pub fn job_seed(seed: u64, name: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in seed.to_le_bytes().iter().chain(name.as_bytes()) {
        h ^= *b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && name != "summary"
        && !name.starts_with('.')
        && name.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
}

/// Every job, validated before anything runs.
pub fn prepare(cfg: &SuiteConfig, seed: u64) -> Result<Vec<Job>> {
    if cfg.checks.is_empty() {
        return Err(config("the suite has no checks"));
    }
    if cfg.jobs == Some(0) {
        return Err(config("jobs must be positive"));
    }
    let mut seen = BTreeSet::new();
    for c in &cfg.checks {
        if !valid_name(&c.name) {
            return Err(config(format!("bad check name {:?}: use letters, digits, '-', '_', '.'", c.name)));
        }
        if !seen.insert(c.name.as_str()) {
            return Err(config(format!("duplicate check name {:?}", c.name)));
        }
    }
    for (k, f) in &cfg.functions {
        if let FnRef::Text(t) = f {
            if cfg.functions.contains_key(t) {
                return Err(config(format!("function {k:?} refers to another name")));
            }
        }
    }
    let defaults = Defaults {
        domain: cfg.domain.clone(),
        engine: cfg.engine.clone().unwrap_or_default(),
        functions: cfg.functions.clone(),
    };
    cfg.checks
        .iter()
        .map(|c| {
            Job::prepare(c, &defaults, job_seed(c.seed.unwrap_or(seed), &c.name)).map_err(|e| match e {
                LabError::Config(m) => config(format!("{}: {m}", c.name)),
                other => other,
            })
        })
        .collect()
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn summary_csv(jobs: &[Job], results: &[Result<JobOutput>]) -> String {
    let mut s = String::from("name,check,index,lhs,bound,margin,error,verdict,message\n");
    for (job, res) in jobs.iter().zip(results) {
        let name = csv_field(&job.spec.name);
        let check = job.spec.check.name();
        match res {
            Ok(out) => {
                for (i, r) in out.reports.iter().enumerate() {
                    let _ = writeln!(s, "{name},{check},{i},{},{},{},{},{},", r.lhs, r.bound, r.margin, r.error, r.verdict);
                }
            }
            Err(e) => {
                let _ = writeln!(s, "{name},{check},,,,,,error,{}", csv_field(&e.to_string()));
            }
        }
    }
    s
}

/// Run a validated suite; returns the exit code.
pub fn run(jobs: &[Job], out_dir: &Path, threads: usize) -> Result<i32> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| config(format!("thread pool: {e}")))?;
    let io_err = |e: std::io::Error| config(format!("writing to {}: {e}", out_dir.display()));
    let results: Vec<Result<JobOutput>> = pool.install(|| {
        jobs.par_iter()
            .map(|job| {
                let out = job.run()?;
                write_job(out_dir, &job.spec.name, &out).map_err(io_err)?;
                Ok(out)
            })
            .collect()
    });
    write_atomic(&out_dir.join("summary.csv"), summary_csv(jobs, &results).as_bytes()).map_err(io_err)?;
    let mut errors = false;
    let mut verdicts = Vec::new();
    for (job, res) in jobs.iter().zip(&results) {
        match res {
            Ok(out) => {
                let v = verdict(out);
                println!("{}\t{}", job.spec.name, v);
                verdicts.push(v);
            }
            Err(e) => {
                eprintln!("{}\terror: {e}", job.spec.name);
                errors = true;
            }
        }
    }
    if errors {
        return Ok(1);
    }
    let v: Verdict = overall(verdicts);
    Ok(exit_code(v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_depend_on_name_and_seed() {
        assert_ne!(job_seed(1, "a"), job_seed(1, "b"));
        assert_ne!(job_seed(1, "a"), job_seed(2, "a"));
        assert_eq!(job_seed(7, "riesz"), job_seed(7, "riesz"));
    }

    #[test]
    fn config_validation() {
        let bad = r#"{"checks": [{"name": "a", "check": "riesz", "function": "poly:0,1", "bogus": 1}]}"#;
        assert!(serde_json::from_str::<SuiteConfig>(bad).is_err());
        let dup: SuiteConfig = serde_json::from_str(
            r#"{"checks": [{"name": "a", "check": "riesz", "function": "poly:0,1"},
                           {"name": "a", "check": "riesz", "function": "poly:1,1"}]}"#,
        )
        .unwrap();
        assert!(prepare(&dup, 0).is_err());
        let named: SuiteConfig = serde_json::from_str(
            r#"{"functions": {"z": "poly:0,1"},
                "checks": [{"name": "a", "check": "riesz", "function": "z", "p": 1.5}]}"#,
        )
        .unwrap();
        assert_eq!(prepare(&named, 0).unwrap().len(), 1);
        let p_out: SuiteConfig =
            serde_json::from_str(r#"{"checks": [{"name": "a", "check": "riesz", "function": "poly:0,1", "p": 0.5}]}"#).unwrap();
        assert!(matches!(prepare(&p_out, 0), Err(LabError::Config(_))));
    }
}
