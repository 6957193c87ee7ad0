//! A single check with its parameters, shared by the subcommands and the suite.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::json;

use riesz_lab::functions::{psh_certificate, psh_certificate_with_coefficient, sample_interior_points};
use riesz_lab::geometry::{DEFAULT_DILATIONS, DEFAULT_SUBLEVELS};
use riesz_lab::verify::{
    check_kolmogorov, check_kolmogorov_ps, check_lelong_jensen, check_poisson_jensen, check_riesz,
    check_riesz_ps, check_zygmund, check_zygmund_sharpness, riesz_battery, sweep_best_constant, Criterion,
    ZygmundSchedule,
};
use riesz_lab::{
    CheckReport, Complex64, DomainConfig, Engine, EngineKind, ExhaustionLevel, FnSpec, LabError, ModelDomain,
    Result, Scheme, TestFunction,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    Riesz,
    RieszPs,
    Zygmund,
    ZygmundSharpness,
    Kolmogorov,
    KolmogorovPs,
    PoissonJensen,
    LelongJensen,
    Certificate,
    Sweep,
}

impl CheckKind {
    pub fn name(self) -> &'static str {
        match self {
            CheckKind::Riesz => "riesz",
            CheckKind::RieszPs => "riesz-ps",
            CheckKind::Zygmund => "zygmund",
            CheckKind::ZygmundSharpness => "zygmund-sharpness",
            CheckKind::Kolmogorov => "kolmogorov",
            CheckKind::KolmogorovPs => "kolmogorov-ps",
            CheckKind::PoissonJensen => "poisson-jensen",
            CheckKind::LelongJensen => "lelong-jensen",
            CheckKind::Certificate => "certificate",
            CheckKind::Sweep => "sweep",
        }
    }

    fn needs_function(self) -> bool {
        !matches!(self, CheckKind::ZygmundSharpness | CheckKind::Sweep)
    }
}

/// The real function fed to the Jensen-type identities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum PhiKind {
    /// `|f|^p`
    #[default]
    AbsPow,
    /// `Re f`
    Re,
}

/// A function given in the mini-language or as a JSON spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FnRef {
    Text(String),
    Spec(FnSpec),
}

impl FnRef {
    /// Strings name an entry of `named` first, then parse as the mini-language.
    pub fn resolve(&self, named: &BTreeMap<String, FnRef>) -> Result<FnSpec> {
        match self {
            FnRef::Spec(s) => Ok(s.clone()),
            FnRef::Text(t) => match named.get(t) {
                Some(FnRef::Spec(s)) => Ok(s.clone()),
                Some(FnRef::Text(s)) => s.parse(),
                None => t.parse(),
            },
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<EngineKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adaptive: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub walks: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_shell: Option<f64>,
}

impl EngineConfig {
    /// Fields set here override `base`.
    pub fn merged(&self, base: &EngineConfig) -> EngineConfig {
        EngineConfig {
            kind: self.kind.or(base.kind),
            nodes: self.nodes.or(base.nodes),
            adaptive: self.adaptive.or(base.adaptive),
            walks: self.walks.or(base.walks),
            eps_shell: self.eps_shell.or(base.eps_shell),
        }
    }

    pub fn build(&self, seed: u64) -> Result<Engine> {
        let d = Engine::default();
        let e = Engine {
            kind: self.kind.unwrap_or(d.kind),
            nodes: self.nodes.unwrap_or(d.nodes),
            adaptive: self.adaptive.unwrap_or(d.adaptive),
            walks: self.walks.unwrap_or(d.walks),
            eps_shell: self.eps_shell.unwrap_or(d.eps_shell),
            seed,
        };
        if e.nodes < 8 {
            return Err(config("nodes must be at least 8"));
        }
        if e.walks < 2 {
            return Err(config("walks must be at least 2"));
        }
        if !(e.eps_shell > 0.0 && e.eps_shell < 0.5) {
            return Err(config("eps_shell must lie in (0, 0.5)"));
        }
        Ok(e)
    }
}

/// One check of a suite, or the check behind a subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobSpec {
    pub name: String,
    pub check: CheckKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<DomainConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub function: Option<FnRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub battery: Option<Vec<FnRef>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<Scheme>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_power: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficient: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<PhiKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_interior: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub renormalize: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub engine: Option<EngineConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl JobSpec {
    pub fn new(name: &str, check: CheckKind) -> Self {
        Self {
            name: name.into(),
            check,
            domain: None,
            function: None,
            battery: None,
            p: None,
            p_grid: None,
            alpha: None,
            levels: None,
            scheme: None,
            radii: None,
            log_power: None,
            tau: None,
            points: None,
            h: None,
            coefficient: None,
            phi: None,
            n_interior: None,
            renormalize: None,
            engine: None,
            seed: None,
        }
    }
}

/// Settings a job inherits when it does not set them itself.
#[derive(Debug, Clone, Default)]
pub struct Defaults {
    pub domain: Option<DomainConfig>,
    pub engine: EngineConfig,
    pub functions: BTreeMap<String, FnRef>,
}

pub fn config(msg: impl Into<String>) -> LabError {
    LabError::Config(msg.into())
}

/// A validated job, ready to run.
#[derive(Debug, Clone)]
pub struct Job {
    pub spec: JobSpec,
    domain: ModelDomain,
    function: Option<TestFunction>,
    battery: Vec<TestFunction>,
    engine: Engine,
    levels: Vec<ExhaustionLevel>,
    params: Vec<f64>,
}

/// Reports of a job plus an optional CSV table.
#[derive(Debug, Clone)]
pub struct JobOutput {
    pub reports: Vec<CheckReport>,
    pub table: Option<Vec<u8>>,
}

fn positive_list(name: &str, xs: &[f64]) -> Result<()> {
    if xs.is_empty() || xs.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
        return Err(config(format!("{name} must be a nonempty list of positive numbers")));
    }
    Ok(())
}

impl Job {
    /// Resolve references and check parameters without running anything.
    pub fn prepare(spec: &JobSpec, defaults: &Defaults, seed: u64) -> Result<Job> {
        let kind = spec.check;
        let domain_cfg = spec.domain.clone().or_else(|| defaults.domain.clone()).unwrap_or(DomainConfig {
            kind: "disc".into(),
            n: None,
            r_inner: None,
            z0: None,
        });
        let domain = domain_cfg.build()?;
        let function = match (&spec.function, kind.needs_function()) {
            (Some(f), true) => Some(TestFunction::build(f.resolve(&defaults.functions)?, &domain)?),
            (None, true) => return Err(config(format!("{}: a function is required", spec.name))),
            (Some(_), false) => return Err(config(format!("{}: {} takes no function", spec.name, kind.name()))),
            (None, false) => None,
        };
        let battery = match (&spec.battery, kind) {
            (Some(b), CheckKind::Sweep) => b
                .iter()
                .map(|f| TestFunction::build(f.resolve(&defaults.functions)?, &domain))
                .collect::<Result<Vec<_>>>()?,
            (None, CheckKind::Sweep) => {
                riesz_battery().into_iter().map(|f| TestFunction::build(f, &domain)).collect::<Result<Vec<_>>>()?
            }
            (Some(_), _) => return Err(config(format!("{}: only sweep takes a battery", spec.name))),
            (None, _) => Vec::new(),
        };
        let engine = spec.engine.clone().unwrap_or_default().merged(&defaults.engine).build(seed)?;

        let p = spec.p.unwrap_or(2.0);
        if !(p > 1.0 && p.is_finite()) {
            return Err(config(format!("p must satisfy 1 < p < inf (got {p})")));
        }
        let alpha = spec.alpha.unwrap_or(2.0);
        if matches!(kind, CheckKind::Zygmund | CheckKind::Kolmogorov | CheckKind::KolmogorovPs) && !(alpha > 1.0) {
            return Err(config(format!("alpha must exceed 1 (got {alpha})")));
        }
        let ps_like = matches!(kind, CheckKind::RieszPs | CheckKind::KolmogorovPs | CheckKind::LelongJensen);
        let scheme = spec.scheme.unwrap_or(if ps_like { Scheme::GreenSublevel } else { Scheme::Dilation });
        let default_levels: &[f64] = match kind {
            CheckKind::Riesz | CheckKind::Sweep => scheme.default_params(),
            CheckKind::RieszPs => &DEFAULT_SUBLEVELS,
            CheckKind::Kolmogorov | CheckKind::PoissonJensen => &[0.9],
            CheckKind::KolmogorovPs => &[0.1],
            CheckKind::LelongJensen => &[0.5],
            _ => &DEFAULT_DILATIONS,
        };
        let params = spec.levels.clone().unwrap_or_else(|| default_levels.to_vec());
        positive_list("levels", &params)?;
        let levels = match kind {
            CheckKind::Riesz | CheckKind::Sweep | CheckKind::Kolmogorov | CheckKind::PoissonJensen => {
                domain.levels(scheme, &params)?
            }
            CheckKind::Zygmund if spec.levels.is_some() => domain.levels(scheme, &params)?,
            _ => Vec::new(),
        };
        if ps_like && spec.scheme == Some(Scheme::Dilation) {
            return Err(config(format!("{} runs on Green sublevels", kind.name())));
        }
        if let Some(r) = &spec.radii {
            positive_list("radii", r)?;
        }
        if let Some(g) = &spec.p_grid {
            positive_list("p_grid", g)?;
        }
        if let Some(t) = spec.tau {
            positive_list("tau", &[t])?;
        }
        if let Some(h) = spec.h {
            positive_list("h", &[h])?;
        }
        if spec.points == Some(0) || spec.n_interior == Some(0) {
            return Err(config("point counts must be positive"));
        }
        if kind == CheckKind::Certificate && spec.coefficient.is_none() && p > 2.0 {
            return Err(LabError::Hypothesis { check: "certificate".into(), hypothesis: format!("1 < p <= 2 (got {p})") });
        }
        Ok(Job { spec: spec.clone(), domain, function, battery, engine, levels, params })
    }

    pub fn run(&self) -> Result<JobOutput> {
        let s = &self.spec;
        let d = &self.domain;
        let e = &self.engine;
        let p = s.p.unwrap_or(2.0);
        let alpha = s.alpha.unwrap_or(2.0);
        let renorm = s.renormalize.unwrap_or(true);
        let f = || self.function.as_ref().expect("validated");
        let one = |r: CheckReport| JobOutput { reports: vec![r], table: None };
        Ok(match s.check {
            CheckKind::Riesz => one(check_riesz(f(), p, d, &self.levels, e, renorm)?),
            CheckKind::RieszPs => one(check_riesz_ps(f(), p, d, &self.params, e, renorm)?),
            CheckKind::Zygmund => {
                let schedule = if self.levels.is_empty() {
                    ZygmundSchedule::Scaling(s.radii.clone().unwrap_or_else(|| vec![0.9, 0.99, 0.999]))
                } else {
                    ZygmundSchedule::Levels(self.levels.clone())
                };
                one(check_zygmund(f(), alpha, d, &schedule, e, renorm)?)
            }
            CheckKind::ZygmundSharpness => {
                let radii = s.radii.clone().unwrap_or_else(|| vec![0.5, 0.9, 0.99]);
                one(check_zygmund_sharpness(s.log_power.unwrap_or(1.0), &radii)?)
            }
            CheckKind::Kolmogorov => JobOutput {
                reports: self.levels.iter().map(|l| check_kolmogorov(f(), alpha, d, l, e)).collect::<Result<_>>()?,
                table: None,
            },
            CheckKind::KolmogorovPs => JobOutput {
                reports: self
                    .params
                    .iter()
                    .map(|t| check_kolmogorov_ps(f(), alpha, d, *t, e, renorm))
                    .collect::<Result<_>>()?,
                table: None,
            },
            CheckKind::PoissonJensen | CheckKind::LelongJensen => {
                let g = f();
                let kind = s.phi.unwrap_or_default();
                let phi = move |z: &[Complex64]| match kind {
                    PhiKind::AbsPow => g.eval(z).norm().powf(p),
                    PhiKind::Re => g.u(z),
                };
                let n_interior = s.n_interior.unwrap_or(20_000);
                let reports = if s.check == CheckKind::PoissonJensen {
                    self.levels.iter().map(|l| check_poisson_jensen(&phi, d, l, n_interior, e)).collect::<Result<_>>()?
                } else {
                    self.params.iter().map(|t| check_lelong_jensen(&phi, d, *t, n_interior, e)).collect::<Result<_>>()?
                };
                JobOutput { reports, table: None }
            }
            CheckKind::Certificate => self.certificate()?,
            CheckKind::Sweep => {
                let grid = s.p_grid.clone().unwrap_or_else(|| vec![2.25, 2.5, 2.75, 3.0]);
                let t = sweep_best_constant(&grid, &self.battery, d, &self.levels, e)?;
                let worst = t.rows.iter().map(|r| r.max_ratio / r.bound).fold(0.0, f64::max);
                let mut buf = Vec::new();
                t.write_csv(&mut buf).map_err(|err| config(err.to_string()))?;
                let inputs = json!({"domain": d.name(), "p_grid": grid, "battery": self.battery.iter().map(|f| f.tag()).collect::<Vec<_>>()});
                let report = CheckReport::new("sweep", inputs, worst, 1.0, 1e-6, Criterion::Inequality)
                    .detail("lhs_meaning", "max over p of observed ratio / constructive constant")
                    .detail("rows", &t.rows)
                    .require_converged(t.rows.iter().all(|r| r.converged));
                JobOutput { reports: vec![report], table: Some(buf) }
            }
        })
    }

    fn certificate(&self) -> Result<JobOutput> {
        let s = &self.spec;
        let p = s.p.unwrap_or(2.0);
        let tau = s.tau.unwrap_or(1.0);
        let h = s.h.unwrap_or(1e-4);
        let pts = sample_interior_points(&self.domain, s.points.unwrap_or(100), 2.0 * h, self.engine.seed)?;
        let f = self.function.as_ref().expect("validated");
        let cert = match s.coefficient {
            Some(c) => psh_certificate_with_coefficient(f, &self.domain, p, tau, c, &pts, h)?,
            None => psh_certificate(f, &self.domain, p, tau, &pts, h)?,
        };
        let inputs = json!({"function": f.tag(), "domain": self.domain.name(), "p": p, "tau": tau, "h": h,
            "points": pts.len(), "coefficient": cert.coefficient, "seed": self.engine.seed});
        let report = CheckReport::new("certificate", inputs, -cert.min_eigenvalue(), cert.tolerance, 0.0, Criterion::Inequality)
            .detail("lhs_meaning", "minus the smallest Levi eigenvalue over the sample")
            .detail("failures", cert.failures())
            .detail("fail_fraction", cert.fail_fraction());
        let mut buf = Vec::new();
        cert.write_csv(&mut buf).map_err(|err| config(err.to_string()))?;
        Ok(JobOutput { reports: vec![report], table: Some(buf) })
    }
}
