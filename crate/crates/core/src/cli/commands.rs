use super::model_spec::{load_table, parse_inline, read_model_file, Model};
use super::{Command, ModelSource, OutputFormat, RunConfig, EXIT_FAILED, EXIT_OK};
use crate::argfield::ArgField;
use crate::bench::{run_bench, BenchConfig, BenchSummary};
use crate::certifier::{certify, CertMethod, CertifyOutcome, Partial};
use crate::complex::{NumericPolicy, Rectangle};
use crate::error::{Error, Result};
use crate::locator::{locate, LocateReport};
use crate::special::{
    build_gamma, build_xi, covers_tail, digamma_real_zeros, xi_critical_line_derivative_zeros, CriticalLineReport,
    TailBound,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocateDocument {
    pub model_digest: Option<String>,
    pub report: LocateReport,
}

/// Whether a certificate of a truncated model extends past the truncation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailCheck {
    pub bound: Option<TailBound>,
    pub holds_beyond_truncation: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertifyDocument {
    pub region: Rectangle,
    pub partial: Partial,
    pub method: CertMethod,
    pub model_digest: Option<String>,
    pub result: CertifyOutcome,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail: Option<TailCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldRow {
    pub sigma: f64,
    pub t: f64,
    pub d_sigma: Option<f64>,
    pub d_t: Option<f64>,
    pub abs_w: Option<f64>,
    pub routes_agree: Option<bool>,
    pub masked: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldDocument {
    pub region: Rectangle,
    pub grid: usize,
    pub rows: Vec<FieldRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DigammaDocument {
    pub count: usize,
    pub n: usize,
    pub zeros: Vec<f64>,
    pub certificates: Vec<CertifyDocument>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XiDocument {
    pub n: usize,
    pub assumed_sigma: f64,
    pub source_digest: String,
    pub exterior: Vec<CertifyDocument>,
    pub critical_line: Option<CriticalLineReport>,
}

/// Runs the configured command; returns the exit code and the document.
pub(super) fn execute(config: &RunConfig) -> Result<(i32, String)> {
    match &config.command {
        Command::Locate => {
            let (model, region) = model_and_region(config)?;
            let report = locate(model.as_meromorphic(), region, &config.policy)?;
            let doc = LocateDocument { model_digest: model.factored().map(|f| f.digest()), report };
            Ok((EXIT_OK, render(config, &doc, locate_csv)?))
        }
        Command::Certify { partial, method } => {
            let (model, region) = model_and_region(config)?;
            let doc = certify_document(&model, region, *partial, *method)?;
            let code = if doc.result.is_certified() { EXIT_OK } else { EXIT_FAILED };
            Ok((code, render(config, &doc, |d| certify_csv(std::slice::from_ref(d)))?))
        }
        Command::Field => {
            let (model, region) = model_and_region(config)?;
            let doc = field(&model, region, &config.policy)?;
            Ok((EXIT_OK, render(config, &doc, field_csv)?))
        }
        Command::Bench { instances, seed, timing } => {
            let bench = BenchConfig { instances: *instances, seed: *seed, timing: *timing, ..Default::default() };
            let summary = run_bench(&bench, &config.policy)?;
            let code = if summary.passed() { EXIT_OK } else { EXIT_FAILED };
            Ok((code, render(config, &summary, bench_csv)?))
        }
        Command::Digamma { count, n } => {
            let zeros = digamma_real_zeros(*count, *n)?;
            let model = Model::Gamma(build_gamma(*n)?);
            let certificates = vec![
                certify_document(&model, Rectangle::new(-10.0, 10.0, 0.1, 10.0)?, Partial::Sigma, CertMethod::TermwiseSign)?,
                certify_document(&model, Rectangle::new(-10.0, 10.0, -10.0, -0.1)?, Partial::Sigma, CertMethod::TermwiseSign)?,
            ];
            let code = exit_for(&certificates);
            let doc = DigammaDocument { count: *count, n: *n, zeros, certificates };
            Ok((code, render(config, &doc, digamma_csv)?))
        }
        Command::Xi { zeros, n, sigma, pairs, height } => {
            let table = load_table(Some(zeros))?;
            let xi = build_xi(&table, *n, *sigma)?;
            let ords = xi.ordinates().to_vec();
            let model = Model::Xi(xi);
            let exterior = vec![
                certify_document(&model, Rectangle::new(1.05, 3.0, -height, *height)?, Partial::T, CertMethod::TermwiseSign)?,
                certify_document(&model, Rectangle::new(-2.0, -0.05, -height, *height)?, Partial::T, CertMethod::TermwiseSign)?,
            ];
            let Model::Xi(xi) = &model else { unreachable!() };
            let critical_line = if *sigma == 0.5 && *pairs > 0 {
                if *pairs >= ords.len() {
                    return Err(Error::Domain(format!("{pairs} ordinate pairs need n > {pairs}")));
                }
                Some(xi_critical_line_derivative_zeros(xi, (ords[0], ords[*pairs]))?)
            } else {
                None
            };
            let code = exit_for(&exterior);
            let doc = XiDocument {
                n: *n,
                assumed_sigma: *sigma,
                source_digest: xi.source_digest().to_string(),
                exterior,
                critical_line,
            };
            Ok((code, render(config, &doc, xi_csv)?))
        }
    }
}

fn exit_for(docs: &[CertifyDocument]) -> i32 {
    if docs.iter().all(|d| d.result.is_certified()) {
        EXIT_OK
    } else {
        EXIT_FAILED
    }
}

fn model_and_region(config: &RunConfig) -> Result<(Model, Rectangle)> {
    let file = match config.model_source.as_ref().expect("model commands carry a source") {
        ModelSource::Inline(s) => parse_inline(s)?,
        ModelSource::File(p) => read_model_file(p)?,
    };
    Ok((file.build()?, config.region.expect("model commands carry a region")))
}

fn certify_document(model: &Model, region: Rectangle, partial: Partial, method: CertMethod) -> Result<CertifyDocument> {
    let f = model
        .factored()
        .ok_or_else(|| Error::InvalidModel("certification needs a factored model".into()))?;
    let result = certify(f, region, partial, method)?;
    let tail_bound = match model {
        Model::Gamma(g) => Some(g.tail_margin(&region, partial)),
        Model::Xi(x) => Some(x.tail_margin(&region, partial)),
        _ => None,
    };
    let tail = tail_bound.map(|b| match (b, result.certificate()) {
        (Ok(bound), Some(cert)) => {
            TailCheck { bound: Some(bound), holds_beyond_truncation: covers_tail(cert, &bound), note: None }
        }
        (Ok(bound), None) => TailCheck { bound: Some(bound), holds_beyond_truncation: false, note: None },
        (Err(e), _) => TailCheck { bound: None, holds_beyond_truncation: false, note: Some(e.to_string()) },
    });
    Ok(CertifyDocument { region, partial, method, model_digest: Some(f.digest()), result, tail })
}

fn field(model: &Model, region: Rectangle, policy: &NumericPolicy) -> Result<FieldDocument> {
    let m = model.as_meromorphic();
    let field = ArgField::new(m, *policy)?;
    let singular = m.zeros_and_poles()?;
    let rows = region
        .lattice(policy.grid_density)
        .into_iter()
        .map(|p| {
            let s = p.to_complex();
            if singular.nearest_distance(s) < policy.singular_radius {
                return Ok(FieldRow { sigma: p.sigma, t: p.t, d_sigma: None, d_t: None, abs_w: None, routes_agree: None, masked: true });
            }
            let cmp = field.compare_routes(p)?;
            let g = cmp.logd;
            Ok(FieldRow {
                sigma: p.sigma,
                t: p.t,
                d_sigma: Some(g.d_sigma),
                d_t: Some(g.d_t),
                abs_w: m.evaluate(s).ok().map(|w| w.norm()),
                routes_agree: Some(cmp.max_discrepancy() <= policy.route_tol * (1.0 + g.max_abs())),
                masked: false,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FieldDocument { region, grid: policy.grid_density, rows })
}

fn render<T: Serialize>(config: &RunConfig, doc: &T, csv: impl Fn(&T) -> Result<String>) -> Result<String> {
    match config.output_format {
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(doc).map_err(|e| Error::Domain(e.to_string()))?;
            s.push('\n');
            Ok(s)
        }
        OutputFormat::Csv => csv(doc),
    }
}

fn csv_text(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Domain(e.to_string());
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(&r).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Domain(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn locate_csv(doc: &LocateDocument) -> Result<String> {
    csv_text(
        &["sigma", "t", "grad_norm", "wprime_residual", "status"],
        doc.report.roots.iter().map(|r| {
            vec![
                r.point.sigma.to_string(),
                r.point.t.to_string(),
                r.grad_norm.to_string(),
                opt(r.wprime_residual),
                serde_json::to_value(r.status).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
            ]
        }),
    )
}

fn certify_csv(docs: &[CertifyDocument]) -> Result<String> {
    csv_text(
        &[
            "outcome", "sigma_min", "sigma_max", "t_min", "t_max", "partial", "sign", "method", "margin", "model_digest",
            "tail_lower", "tail_upper", "holds_beyond_truncation", "detail",
        ],
        docs.iter().map(|d| {
            let r = d.region;
            let cert = d.result.certificate();
            let detail = match &d.result {
                CertifyOutcome::Failed(f) => serde_json::to_string(f).unwrap_or_default(),
                CertifyOutcome::Certified(_) => String::new(),
            };
            let bound = d.tail.as_ref().and_then(|t| t.bound);
            vec![
                if cert.is_some() { "certified" } else { "failed" }.to_string(),
                r.sigma_min.to_string(),
                r.sigma_max.to_string(),
                r.t_min.to_string(),
                r.t_max.to_string(),
                d.partial.to_string(),
                opt(cert.map(|c| c.sign)),
                d.method.to_string(),
                opt(cert.map(|c| c.margin)),
                d.model_digest.clone().unwrap_or_default(),
                opt(bound.map(|b| b.lower)),
                opt(bound.map(|b| b.upper)),
                opt(d.tail.as_ref().map(|t| t.holds_beyond_truncation)),
                detail,
            ]
        }),
    )
}

fn field_csv(doc: &FieldDocument) -> Result<String> {
    csv_text(
        &["sigma", "t", "d_sigma", "d_t", "abs_w", "routes_agree", "masked"],
        doc.rows.iter().map(|r| {
            vec![
                r.sigma.to_string(),
                r.t.to_string(),
                opt(r.d_sigma),
                opt(r.d_t),
                opt(r.abs_w),
                opt(r.routes_agree),
                r.masked.to_string(),
            ]
        }),
    )
}

fn bench_csv(s: &BenchSummary) -> Result<String> {
    csv_text(
        &[
            "index", "numerator_degree", "denominator_degree", "oracle_roots", "located", "matched", "missed", "spurious",
            "max_pair_distance", "elapsed_ms",
        ],
        s.instances.iter().map(|r| {
            vec![
                r.index.to_string(),
                r.numerator_degree.to_string(),
                r.denominator_degree.to_string(),
                r.oracle_roots.to_string(),
                r.located.to_string(),
                r.matched.to_string(),
                r.missed.to_string(),
                r.spurious.to_string(),
                r.max_pair_distance.to_string(),
                opt(r.elapsed_ms),
            ]
        }),
    )
}

fn digamma_csv(d: &DigammaDocument) -> Result<String> {
    csv_text(&["index", "zero"], d.zeros.iter().enumerate().map(|(i, z)| vec![i.to_string(), z.to_string()]))
}

fn xi_csv(d: &XiDocument) -> Result<String> {
    let rows = d.critical_line.iter().flat_map(|cl| {
        cl.gaps.iter().flat_map(|g| {
            g.roots.iter().map(move |r| {
                vec![g.lower_ordinate.to_string(), g.upper_ordinate.to_string(), r.to_string(), g.max_sigma_deviation.to_string()]
            })
        })
    });
    csv_text(&["lower_ordinate", "upper_ordinate", "root_t", "sigma_deviation"], rows)
}
