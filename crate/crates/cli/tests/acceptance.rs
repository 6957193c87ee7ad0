//! Acceptance criteria, one test per criterion. Each prints a single
//! `[PASS]`/`[FAIL]` line; run with `--nocapture` to see them all.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use riesz_lab::functions::{psh_certificate, psh_certificate_with_coefficient, sample_interior_points};
use riesz_lab::measure::harmonic_measure_wos;
use riesz_lab::potential::pluriharmonic_measure;
use riesz_lab::verify::{
    check_kolmogorov, check_kolmogorov_ps, check_lelong_jensen, check_poisson_jensen, check_riesz,
    check_zygmund, check_zygmund_sharpness, riesz_battery, ZygmundSchedule,
};
use riesz_lab::{Complex64, DomainKind, Engine, FnSpec, ModelDomain, Scheme, TestFunction, Verdict};

// 1
const RIESZ_EQUALITY_TOL: f64 = 1e-4;
const RIESZ_EQUALITY_TIME: Duration = Duration::from_secs(1);
const RIESZ_EQUALITY_NODES: usize = 4096;
// 2
const BATTERY_SIZE: usize = 12;
const BATTERY_P: [f64; 7] = [1.1, 1.5, 2.0, 2.5, 3.0, 4.0, 5.0];
const BATTERY_MIN_PASS_FRACTION: f64 = 0.90;
const BATTERY_TIME: Duration = Duration::from_secs(60);
// 3
const CERT_P: [f64; 3] = [1.1, 1.5, 2.0];
const CERT_TAU: [f64; 2] = [0.1, 1.0];
const CERT_POINTS: usize = 100;
const CERT_H: f64 = 1e-4;
const CERT_MIN_EIGENVALUE: f64 = -1e-5;
const CERT_CONTROL_COEFFICIENT: f64 = 1.0;
const CERT_CONTROL_MIN_FAIL_FRACTION: f64 = 0.5;
// 4
const PJ_RESIDUAL_TOL: f64 = 1e-4;
// 5
const LJ_DISC_REL_TOL: f64 = 1e-4;
const LJ_BALL_REL_TOL: f64 = 1e-3;
// 6
const MASS_REL_TOL: f64 = 1e-6;
const REPRODUCING_TOL: f64 = 1e-4;
// 7
const ZYGMUND_RADII: [f64; 3] = [0.9, 0.99, 0.999];
const ZYGMUND_ALPHA: f64 = 2.0;
const ZYGMUND_EXTRAPOLATION_FACTOR: f64 = 2.0;
const SHARPNESS_RADII: [f64; 3] = [0.5, 0.9, 0.99];
const SHARPNESS_MIN_RATIO: f64 = 10.0;
const ZYGMUND_TIME: Duration = Duration::from_secs(30);
// 8
const KOLMOGOROV_ALPHA: [f64; 3] = [1.5, 2.0, 3.0];
const KOLMOGOROV_PS_REL_TOL: f64 = 1e-6;
// 9
const WOS_WALKS: usize = 100_000;
const WOS_SIGMAS: f64 = 3.0;
const WOS_MIN_SEEDS: usize = 2;
const WOS_SEEDS: [u64; 3] = [1, 2, 3];
const WOS_TIME: Duration = Duration::from_secs(10);

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn report(id: u32, title: &str, ok: bool, detail: String) {
    println!("[{}] {id:>2} {title}: {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {id} ({title}) failed: {detail}");
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn criterion_01_riesz_equality_case() {
    let d = ModelDomain::disc();
    let f = TestFunction::build(FnSpec::poly(&[0.0, 1.0]), &d).unwrap();
    let levels = d.levels(Scheme::Dilation, Scheme::Dilation.default_params()).unwrap();
    let start = Instant::now();
    let r = check_riesz(&f, 2.0, &d, &levels, &Engine::exact(RIESZ_EQUALITY_NODES), true).unwrap();
    let elapsed = start.elapsed();
    let ok = (r.lhs - 1.0).abs() <= RIESZ_EQUALITY_TOL
        && (r.bound - 1.0).abs() <= RIESZ_EQUALITY_TOL
        && elapsed < RIESZ_EQUALITY_TIME;
    report(1, "Riesz equality case", ok, format!("lhs = {:.7}, bound = {:.7}, verdict {}, {elapsed:.2?}", r.lhs, r.bound, r.verdict));
}

#[test]
fn criterion_02_riesz_battery() {
    let d = ModelDomain::disc();
    let battery: Vec<TestFunction> = riesz_battery().into_iter().map(|s| TestFunction::build(s, &d).unwrap()).collect();
    assert_eq!(battery.len(), BATTERY_SIZE);
    let levels = d.levels(Scheme::Dilation, Scheme::Dilation.default_params()).unwrap();
    let start = Instant::now();
    let (mut pass, mut fail, mut total) = (0, 0, 0);
    let mut notes = Vec::new();
    for f in &battery {
        for p in BATTERY_P {
            let r = check_riesz(f, p, &d, &levels, &Engine::default(), true).unwrap();
            total += 1;
            match r.verdict {
                Verdict::Pass => pass += 1,
                Verdict::Fail => fail += 1,
                Verdict::Inconclusive => notes.push(format!("{} @ p={p}", f.tag())),
            }
        }
    }
    let elapsed = start.elapsed();
    let frac = pass as f64 / total as f64;
    let ok = fail == 0 && frac >= BATTERY_MIN_PASS_FRACTION && elapsed < BATTERY_TIME;
    report(
        2,
        "Riesz battery",
        ok,
        format!("{pass}/{total} pass ({:.1}%), {fail} fail, inconclusive: [{}], {elapsed:.2?}", 100.0 * frac, notes.join("; ")),
    );
}

#[test]
fn criterion_03_certificate() {
    let mut worst = f64::INFINITY;
    let mut all = true;
    let mut control_min_frac = f64::INFINITY;
    for d in [ModelDomain::disc(), ModelDomain::ball(2)] {
        let pts = sample_interior_points(&d, CERT_POINTS, 2.0 * CERT_H, 11).unwrap();
        for spec in [FnSpec::poly(&[0.0, 1.0]), FnSpec::poly(&[1.0, 1.0]), FnSpec::poly(&[0.0, 0.0, 1.0])] {
            let f = TestFunction::build(spec, &d).unwrap();
            for p in CERT_P {
                for tau in CERT_TAU {
                    let cert = psh_certificate(&f, &d, p, tau, &pts, CERT_H).unwrap();
                    worst = worst.min(cert.min_eigenvalue());
                    all &= cert.pass && cert.min_eigenvalue() >= CERT_MIN_EIGENVALUE;
                }
            }
            for tau in CERT_TAU {
                let control = psh_certificate_with_coefficient(&f, &d, 2.0, tau, CERT_CONTROL_COEFFICIENT, &pts, CERT_H).unwrap();
                control_min_frac = control_min_frac.min(control.fail_fraction());
            }
        }
    }
    let ok = all && control_min_frac >= CERT_CONTROL_MIN_FAIL_FRACTION;
    report(3, "psh certificate", ok, format!("min eigenvalue {worst:.3e}, control fails at >= {:.0}% of points", 100.0 * control_min_frac));
}

#[test]
fn criterion_04_poisson_jensen() {
    let d = ModelDomain::disc();
    let level = d.dilation(0.9).unwrap();
    let phi = |z: &[Complex64]| z[0].norm_sqr();
    let r = check_poisson_jensen(&phi, &d, &level, 20_000, &Engine::default()).unwrap();
    // closed form: the mean of |z|^2 over |z| = 0.9 is 0.81 and phi(0) = 0
    let closed = 0.81;
    let res = (r.lhs - r.bound).abs().max((r.bound - closed).abs());
    let h = |z: &[Complex64]| (z[0] * z[0] * z[0]).re - 2.0 * z[0].im + 0.5;
    let rh = check_poisson_jensen(&h, &d, &level, 20_000, &Engine::default()).unwrap();
    let ok = res <= PJ_RESIDUAL_TOL && (rh.lhs - rh.bound).abs() <= rh.error;
    report(
        4,
        "Poisson-Jensen residual",
        ok,
        format!("|z|^2 residual {res:.2e}; harmonic residual {:.2e} vs error {:.2e}", (rh.lhs - rh.bound).abs(), rh.error),
    );
}

#[test]
fn criterion_05_lelong_jensen() {
    let phi = |z: &[Complex64]| z.iter().map(|w| w.norm_sqr()).sum::<f64>();
    let mut worst_disc: f64 = 0.0;
    for t in [0.1, 0.5, 1.0] {
        let r = check_lelong_jensen(&phi, &ModelDomain::disc(), t, 20_000, &Engine::default()).unwrap();
        let want = 2.0 * PI * (-2.0 * t).exp();
        worst_disc = worst_disc.max(rel(r.lhs, r.bound)).max(rel(r.lhs, want)).max(rel(r.bound, want));
    }
    let mut worst_ball: f64 = 0.0;
    for t in [0.1, 0.5] {
        let r = check_lelong_jensen(&phi, &ModelDomain::ball(2), t, 40_000, &Engine::default()).unwrap();
        worst_ball = worst_ball.max(rel(r.lhs, r.bound));
    }
    let ok = worst_disc <= LJ_DISC_REL_TOL && worst_ball <= LJ_BALL_REL_TOL;
    report(5, "Lelong-Jensen", ok, format!("disc relative residual {worst_disc:.2e}, Ball(2) {worst_ball:.2e}"));
}

#[test]
fn criterion_06_pluriharmonic_measure() {
    let hs: [&dyn Fn(&[Complex64]) -> f64; 5] = [
        &|z| z[0].re,
        &|z| (z[0] * z[z.len() - 1]).im,
        &|z| (z[0] * z[0]).re + 3.0,
        &|z| (z[0] + z[z.len() - 1] * 0.5).exp().re,
        &|z| (c(1.0, 0.0) / (c(2.0, 0.0) - z[0])).re,
    ];
    let domains = [
        ModelDomain::disc().with_z0(vec![c(0.3, -0.2)]).unwrap(),
        ModelDomain::ball(2).with_z0(vec![c(0.2, 0.1), c(-0.3, 0.0)]).unwrap(),
        ModelDomain::polydisc(2).with_z0(vec![c(0.4, 0.0), c(0.0, 0.5)]).unwrap(),
    ];
    let (mut mass_err, mut repro_err): (f64, f64) = (0.0, 0.0);
    for d in &domains {
        let total = (2.0 * PI).powi(d.dim() as i32);
        for t in [0.5, 0.05] {
            let q = pluriharmonic_measure(d, d.z0(), t, 4096).unwrap();
            mass_err = mass_err.max(rel(q.mass(), total));
            for h in hs {
                let s: f64 = q.nodes.iter().zip(&q.weights).map(|(z, w)| w * h(z)).sum();
                repro_err = repro_err.max((s - total * h(d.z0())).abs() / total);
            }
        }
    }
    let ok = mass_err <= MASS_REL_TOL && repro_err <= REPRODUCING_TOL;
    report(6, "pluriharmonic measure", ok, format!("mass relative error {mass_err:.2e}, reproducing error {repro_err:.2e} x (2pi)^n"));
}

#[test]
fn criterion_07_zygmund() {
    let d = ModelDomain::disc();
    let f = TestFunction::build(FnSpec::moebius_log(), &d).unwrap();
    let start = Instant::now();
    let r = check_zygmund(&f, ZYGMUND_ALPHA, &d, &ZygmundSchedule::Scaling(ZYGMUND_RADII.to_vec()), &Engine::default(), false)
        .unwrap();
    let vals: Vec<f64> = r.details["values"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    let depth = |r: f64| -(1.0 - r).ln();
    let (x0, x1, x2) = (depth(ZYGMUND_RADII[0]), depth(ZYGMUND_RADII[1]), depth(ZYGMUND_RADII[2]));
    let extrapolated = vals[1] + (vals[1] - vals[0]) / (x1 - x0) * (x2 - x1);
    let bounded = vals[2] <= ZYGMUND_EXTRAPOLATION_FACTOR * extrapolated && r.verdict == Verdict::Pass;
    let s = check_zygmund_sharpness(1.0, &SHARPNESS_RADII).unwrap();
    let sv: Vec<f64> = s.details["values"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    let ratio = sv[2] / sv[0];
    let elapsed = start.elapsed();
    let ok = bounded && ratio > SHARPNESS_MIN_RATIO && elapsed < ZYGMUND_TIME;
    report(
        7,
        "Zygmund boundedness and sharpness",
        ok,
        format!(
            "integrals {vals:.4?} bounded = {bounded} (extrapolation {extrapolated:.4}); sharpness I(0.99)/I(0.5) = {ratio:.3} (need > {SHARPNESS_MIN_RATIO}), {elapsed:.2?}"
        ),
    );
}

#[test]
fn criterion_08_kolmogorov() {
    let specs: Vec<FnSpec> = [
        "poly:2,0.5",
        "poly:1.5,0,0.4",
        "strip_exp:+,scale:0.9,moebius_log",
        "add:1,0,scale:0.5,moebius_log",
        "poly:3,1,0.5",
    ]
    .iter()
    .map(|s| s.parse().unwrap())
    .collect();
    let mut strict = 0;
    let mut total = 0;
    let mut min_slack = f64::INFINITY;
    for d in [ModelDomain::disc(), ModelDomain::ball(2)] {
        for spec in &specs {
            let f = TestFunction::build(spec.clone(), &d).unwrap();
            for alpha in KOLMOGOROV_ALPHA {
                for level in d.levels(Scheme::Dilation, &[0.5, 0.9, 0.99]).unwrap() {
                    let r = check_kolmogorov(&f, alpha, &d, &level, &Engine::default()).unwrap();
                    total += 1;
                    if r.verdict == Verdict::Pass && r.margin > r.error {
                        strict += 1;
                    }
                    min_slack = min_slack.min(r.margin - r.error);
                }
            }
        }
    }
    let d = ModelDomain::disc();
    let mut agree: f64 = 0.0;
    for spec in specs.iter().filter(|s| !s.to_string().starts_with("add")) {
        let f = TestFunction::build(spec.clone(), &d).unwrap();
        for alpha in KOLMOGOROV_ALPHA {
            for t in [0.5, 0.05] {
                let ps = check_kolmogorov_ps(&f, alpha, &d, t, &Engine::default(), false).unwrap();
                let cl = check_kolmogorov(&f, alpha, &d, &d.dilation((-t).exp()).unwrap(), &Engine::default()).unwrap();
                agree = agree.max(rel(ps.lhs, cl.lhs)).max(rel(ps.bound, cl.bound));
            }
        }
    }
    let ok = strict == total && agree <= KOLMOGOROV_PS_REL_TOL;
    report(8, "Kolmogorov-type", ok, format!("{strict}/{total} strict passes (min margin - error {min_slack:.3e}); PS vs classical {agree:.2e}"));
}

#[test]
fn criterion_09_walk_on_spheres() {
    let start = Instant::now();
    let disc = ModelDomain::disc();
    let z0 = [c(0.5, 0.0)];
    let mut within = 0;
    let mut zs = Vec::new();
    for seed in WOS_SEEDS {
        let m = harmonic_measure_wos(&disc.shape(), &z0, WOS_WALKS, 1e-6, seed).unwrap();
        let xs: Vec<f64> = m.samples.iter().map(|z| z[0].re).collect();
        let (mean, se) = mean_se(&xs);
        let score = (mean - 0.5).abs() / se;
        within += (score <= WOS_SIGMAS) as usize;
        zs.push(score);
    }
    let annulus = ModelDomain::new(DomainKind::Annulus { r_inner: 0.25 }, vec![c(0.6, 0.0)]).unwrap();
    let m = harmonic_measure_wos(&annulus.shape(), annulus.z0(), WOS_WALKS, 1e-6, 17).unwrap();
    let hits: Vec<f64> = m.samples.iter().map(|z| if z[0].norm() > 0.5 { 1.0 } else { 0.0 }).collect();
    let (p_outer, se) = mean_se(&hits);
    let want = (0.6f64 / 0.25).ln() / 4f64.ln();
    let annulus_score = (p_outer - want).abs() / se;
    let elapsed = start.elapsed();
    let ok = within >= WOS_MIN_SEEDS && annulus_score <= WOS_SIGMAS && elapsed < WOS_TIME;
    report(
        9,
        "walk-on-spheres",
        ok,
        format!("disc |z| scores {zs:.2?} sigma; annulus {p_outer:.4} vs {want:.4} ({annulus_score:.2} sigma), {elapsed:.2?}"),
    );
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn run_suite(out: &Path) -> i32 {
    let cfg = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/suite.json");
    Command::new(env!("CARGO_BIN_EXE_riesz-lab"))
        .args(["suite", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .env_remove("RIESZ_LAB_SEED")
        .output()
        .unwrap()
        .status
        .code()
        .unwrap()
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

#[test]
fn criterion_10_determinism() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ca = run_suite(a.path());
    let cb = run_suite(b.path());
    let fa = read_dir_sorted(a.path());
    let fb = read_dir_sorted(b.path());
    let names: Vec<&str> = fa.iter().map(|(n, _)| n.as_str()).collect();
    let ok = ca == cb && !fa.is_empty() && names.contains(&"summary.csv") && fa == fb;
    report(10, "suite determinism", ok, format!("{} files byte-identical across two runs (exit {ca})", fa.len()));
}
