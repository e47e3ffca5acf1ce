use hankel_hs::certificate::{certify, Certificate};
use hankel_hs::hankel::{dbar_canonical_report, s_alpha_report, DbarReport, SAlphaReport};
use hankel_hs::wiegerinck::{omega0_s11, omegak_report, OmegaKReport};
use hankel_hs::{classify_growth, DomainSpec, Growth, Moment, MomentTable, MultiIndex};
use serde::{Deserialize, Serialize};

use crate::config::{Format, RunConfig, Task};
use crate::output::{csv_number, csv_optional, to_json};
use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentEntry {
    pub gamma: MultiIndex,
    pub divergent: bool,
    pub log_c_sq: Option<f64>,
    pub c_sq: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentsReport {
    pub domain: String,
    pub n_max: u32,
    pub entries: Vec<MomentEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertifyReport {
    pub certificate: Certificate,
    pub series: SAlphaReport,
    /// Whether `λ_α|I_N| ≤ S_α(N) + 1e−9` at every level.
    pub sound: bool,
    pub verdict: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WiegerinckReport {
    pub m: u32,
    pub partial_sum: f64,
    pub telescoped: f64,
    pub limit_estimate: f64,
    pub tail_bound: f64,
    pub samples: Vec<(u32, f64)>,
    pub classification: Growth,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "report", rename_all = "snake_case")]
pub enum WiegerinckOutput {
    Omega0(WiegerinckReport),
    OmegaK(OmegaKReport),
}

pub struct RunOutput {
    pub body: String,
    pub summary: String,
}

pub fn run(config: &RunConfig) -> Result<RunOutput, CliError> {
    let format = config.format();
    if format == Format::Csv && !matches!(config.task, Task::Moments | Task::Salpha | Task::Certify) {
        return Err(CliError::Invalid(format!("csv output is not available for {:?}", config.task)));
    }
    match config.task {
        Task::Moments => moments(config, format),
        Task::Salpha => salpha(config, format),
        Task::Certify => certify_task(config, format),
        Task::Wiegerinck => wiegerinck(config),
        Task::Dbar => dbar(config),
    }
}

fn table(config: &RunConfig) -> Result<MomentTable, CliError> {
    Ok(MomentTable::new(config.domain()?, config.settings()?)?)
}

fn moments(config: &RunConfig, format: Format) -> Result<RunOutput, CliError> {
    let table = table(config)?;
    let n_max = config.n_max()?;
    let lattice = table.spec().lattice();
    let gammas: Vec<MultiIndex> = (0..=n_max).flat_map(|n| lattice.level(n)).collect();
    table.prefetch(&gammas)?;
    let entries = gammas
        .iter()
        .map(|&g| {
            let m = table.moment(g)?;
            Ok(match m {
                Moment::Finite(v) => MomentEntry {
                    gamma: g,
                    divergent: false,
                    log_c_sq: Some(v.ln()).filter(|x| x.is_finite()),
                    c_sq: Some(v.value()).filter(|x| x.is_finite()),
                },
                Moment::Divergent => MomentEntry {
                    gamma: g,
                    divergent: true,
                    log_c_sq: None,
                    c_sq: None,
                },
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let report = MomentsReport {
        domain: table.spec().label(),
        n_max,
        entries,
    };
    let summary = format!("moments: {} indices on {}", report.entries.len(), report.domain);
    let body = match format {
        Format::Json => to_json(&report)?,
        Format::Csv => {
            let mut s = String::from("g1,g2,log_c_sq,c_sq\n");
            for e in &report.entries {
                s.push_str(&format!(
                    "{},{},{},{}\n",
                    e.gamma.g1,
                    e.gamma.g2,
                    csv_optional(e.log_c_sq),
                    csv_optional(e.c_sq)
                ));
            }
            s
        }
    };
    Ok(RunOutput { body, summary })
}

fn salpha_csv(report: &SAlphaReport) -> String {
    let mut s = String::from("N,S_alpha,shell_bound,cert_bound\n");
    for (i, &(n, v)) in report.partials.iter().enumerate() {
        let cert = report
            .certificate_bound
            .as_ref()
            .and_then(|b| b.iter().find(|c| c.0 == n).map(|c| c.1));
        s.push_str(&format!(
            "{n},{},{},{}\n",
            csv_number(v),
            csv_number(report.shell_bounds[i].1),
            csv_optional(cert)
        ));
    }
    s
}

/// The certificate when the domain is a profile it applies to; `None` otherwise.
fn optional_certificate(
    spec: &DomainSpec,
    alpha: MultiIndex,
    levels: &[u32],
    config: &RunConfig,
) -> Result<Option<Certificate>, CliError> {
    let Some(profile) = spec.profile() else {
        return Ok(None);
    };
    match certify(profile, alpha, levels, &config.settings()?) {
        Ok(c) => Ok(Some(c)),
        Err(e) if e.is_invalid_input() => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn salpha(config: &RunConfig, format: Format) -> Result<RunOutput, CliError> {
    let table = table(config)?;
    let alpha = config.alpha()?;
    let levels = config.levels()?;
    let mut report = s_alpha_report(&table, alpha, &levels)?;
    if let Some(c) = optional_certificate(table.spec(), alpha, &levels, config)? {
        report.certificate_bound = Some(c.bounds);
    }
    let (n, s) = *report.partials.last().expect("levels are nonempty");
    let summary = format!(
        "salpha {} alpha={}: S({n}) = {} [{}]",
        report.domain,
        alpha,
        csv_number(s),
        report.classification.name()
    );
    let body = match format {
        Format::Json => to_json(&report)?,
        Format::Csv => salpha_csv(&report),
    };
    Ok(RunOutput { body, summary })
}

fn certify_task(config: &RunConfig, format: Format) -> Result<RunOutput, CliError> {
    let spec = config.domain()?;
    let profile = spec
        .profile()
        .ok_or_else(|| CliError::Invalid("certify needs a profile domain".into()))?
        .clone();
    let alpha = config.alpha()?;
    let levels = config.levels()?;
    let settings = config.settings()?;
    let certificate = certify(&profile, alpha, &levels, &settings)?;
    let table = MomentTable::new(spec, settings)?;
    let mut series = s_alpha_report(&table, alpha, &levels)?;
    series.certificate_bound = Some(certificate.bounds.clone());
    let sound = certificate
        .bounds
        .iter()
        .zip(&series.partials)
        .all(|(b, s)| b.1 <= s.1 + 1e-9);
    let verdict = series.classification.name().to_string();
    let summary = format!(
        "certify {} alpha={}: lambda = {}, min mass = {}, sound = {sound} [{verdict}]",
        series.domain,
        alpha,
        csv_number(certificate.lambda),
        csv_number(certificate.min_mass)
    );
    let report = CertifyReport {
        certificate,
        series,
        sound,
        verdict,
    };
    let body = match format {
        Format::Json => to_json(&report)?,
        Format::Csv => salpha_csv(&report.series),
    };
    Ok(RunOutput { body, summary })
}

fn wiegerinck(config: &RunConfig) -> Result<RunOutput, CliError> {
    if let Some(k) = config.k {
        let report = omegak_report(k)?;
        let summary = format!("omegak k={k}: basis dimension {} [{}]", report.basis.len(), report.verdict);
        return Ok(RunOutput {
            body: to_json(&WiegerinckOutput::OmegaK(report))?,
            summary,
        });
    }
    let m = config
        .n_max
        .ok_or_else(|| CliError::Invalid("wiegerinck needs --k or --n-max (the bound M)".into()))?;
    let summary_m = omega0_s11(m)?;
    let levels = config.levels()?;
    let samples = levels
        .iter()
        .map(|&n| omega0_s11(n).map(|s| (n, s.partial_sum)))
        .collect::<Result<Vec<_>, _>>()?;
    let classification = if samples.len() >= 8 {
        let pts: Vec<(f64, f64)> = samples.iter().map(|&(n, v)| (n as f64, v)).collect();
        classify_growth(&pts)?
    } else {
        Growth::Inconclusive
    };
    let report = WiegerinckReport {
        m,
        partial_sum: summary_m.partial_sum,
        telescoped: summary_m.telescoped,
        limit_estimate: summary_m.limit_estimate,
        tail_bound: summary_m.tail_bound,
        samples,
        classification,
    };
    let summary = format!(
        "omega0 S_(1,1)({m}) = {}, limit {} [{}]",
        csv_number(report.partial_sum),
        csv_number(report.limit_estimate),
        classification.name()
    );
    Ok(RunOutput {
        body: to_json(&WiegerinckOutput::Omega0(report))?,
        summary,
    })
}

fn dbar(config: &RunConfig) -> Result<RunOutput, CliError> {
    let table = table(config)?;
    let report: DbarReport = dbar_canonical_report(&table, config.n_max()?)?;
    let summary = format!("dbar {} N={}: {}", report.domain, report.n, report.verdict.as_str());
    Ok(RunOutput {
        body: to_json(&report)?,
        summary,
    })
}
