use std::fs;
use std::io::{self, Write};
use std::path::Path;

use riesz_lab::verify::overall;
use riesz_lab::{CheckReport, Verdict};

use crate::job::JobOutput;

/// Write through a temporary file in the same directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
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

/// A single report as an object, several as an array; trailing newline.
pub fn reports_json(reports: &[CheckReport]) -> String {
    let mut s = match reports {
        [one] => serde_json::to_string_pretty(one),
        many => serde_json::to_string_pretty(many),
    }
    .expect("reports serialize");
    s.push('\n');
    s
}

pub fn verdict(out: &JobOutput) -> Verdict {
    overall(out.reports.iter().map(|r| r.verdict))
}

/// Files for one job: `<name>.json` and, with a table, `<name>.csv`.
pub fn write_job(dir: &Path, name: &str, out: &JobOutput) -> io::Result<()> {
    write_atomic(&dir.join(format!("{name}.json")), reports_json(&out.reports).as_bytes())?;
    if let Some(t) = &out.table {
        write_atomic(&dir.join(format!("{name}.csv")), t)?;
    }
    Ok(())
}

pub fn exit_code(v: Verdict) -> i32 {
    match v {
        Verdict::Pass => 0,
        Verdict::Fail => 2,
        Verdict::Inconclusive => 3,
    }
}
