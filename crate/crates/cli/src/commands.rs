use std::fmt::Write as _;
use std::path::PathBuf;

use circmetric::conformal::{almost_conformal, f_determinant};
use circmetric::fields::{
    nabla_q_sweep, transform_consistency, transformed_fields, ConditionReport, NablaSweep, Region, ScalarField,
    DEFAULT_STEP, DEFAULT_TOLERANCE,
};
use circmetric::flow::{iterate_angle, iterate_metrics};
use circmetric::{CirculantMetric, ConformalParams, FlowConfig, Vector3};
use serde::Serialize;

use crate::config::{FileConfig, NumOrText, Triple};
use crate::error::{CliError, EXIT_CHECK_FAILED, EXIT_OK};
use crate::format::{emit, json, sig, sig_point, Format};
use crate::{AngleArgs, CheckFieldsArgs, Common, IterateArgs, TransformArgs};

pub const DEFAULT_MAX_STEPS: usize = 500;
pub const DEFAULT_EPSILON: f64 = 1e-9;
pub const DEFAULT_GRID: usize = 5;

type CmdResult = Result<u8, CliError>;

const INVARIANT_PLANE_NOTE: &str =
    "w lies in the invariant plane x+y+z = 0: cos phi stays at -0.5 and never approaches 1";

/// Output settings after merging flags with the config file.
struct Output {
    format: Format,
    out: Option<PathBuf>,
}

impl Output {
    fn resolve(common: &Common, cfg: &FileConfig) -> Result<Self, CliError> {
        let format = match common.format.clone().or_else(|| cfg.format.clone()) {
            Some(s) => Format::parse(&s)?,
            None => Format::Text,
        };
        let out = common.out.clone().or_else(|| cfg.out.clone().map(PathBuf::from));
        Ok(Self { format, out })
    }

    fn emit(&self, content: &str) -> Result<(), CliError> {
        emit(content, self.out.as_deref())
    }
}

fn merged(flag: &Option<String>, cfg: &Option<NumOrText>) -> Option<String> {
    flag.clone().or_else(|| cfg.clone().map(NumOrText::into_text))
}

fn merged_triple(flag: &Option<String>, cfg: &Option<Triple>) -> Option<String> {
    flag.clone().or_else(|| cfg.clone().map(Triple::into_text))
}

fn required(name: &str, value: Option<String>) -> Result<String, CliError> {
    value.ok_or_else(|| CliError::Usage(format!("missing required value --{name}")))
}

fn parse_number(name: &str, text: &str) -> Result<f64, CliError> {
    match text.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(CliError::Usage(format!(
            "invalid value for --{name}: '{text}' is not a finite number"
        ))),
    }
}

fn finite(name: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Usage(format!(
            "invalid value for --{name}: {v} is not finite"
        )))
    }
}

fn parse_triple(name: &str, text: &str) -> Result<[f64; 3], CliError> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 3 {
        return Err(CliError::Usage(format!(
            "invalid value for --{name}: expected x,y,z, got '{text}'"
        )));
    }
    Ok([
        parse_number(name, parts[0])?,
        parse_number(name, parts[1])?,
        parse_number(name, parts[2])?,
    ])
}

fn number_arg(name: &str, flag: &Option<String>, cfg: &Option<NumOrText>) -> Result<f64, CliError> {
    parse_number(name, &required(name, merged(flag, cfg))?)
}

fn angle_value(cos_phi: f64, degrees: bool) -> f64 {
    let phi = cos_phi.clamp(-1.0, 1.0).acos();
    if degrees {
        phi.to_degrees()
    } else {
        phi
    }
}

fn unit(degrees: bool) -> &'static str {
    if degrees {
        "deg"
    } else {
        "rad"
    }
}

#[derive(Serialize)]
struct AngleReport {
    #[serde(rename = "A")]
    a: f64,
    #[serde(rename = "B")]
    b: f64,
    w: [f64; 3],
    cos_phi: f64,
    phi: f64,
    unit: &'static str,
}

pub fn angle(args: AngleArgs) -> CmdResult {
    let cfg = FileConfig::load_optional(args.common.config.as_deref())?;
    let output = Output::resolve(&args.common, &cfg)?;
    let a = number_arg("A", &args.metric.a, &cfg.a)?;
    let b = number_arg("B", &args.metric.b, &cfg.b)?;
    let w = parse_triple("w", &required("w", merged_triple(&args.w, &cfg.w))?)?;
    let degrees = args.degrees || cfg.degrees.unwrap_or(false);

    let cos_phi = CirculantMetric::new(a, b).angle_cos(Vector3::from(w))?;
    let report = AngleReport {
        a,
        b,
        w,
        cos_phi,
        phi: angle_value(cos_phi, degrees),
        unit: unit(degrees),
    };
    let text = match output.format {
        Format::Text => format!(
            "cos_phi = {}\nphi = {} {}\n",
            sig(report.cos_phi),
            sig(report.phi),
            report.unit
        ),
        Format::Csv => format!("cos_phi,phi\n{},{}\n", sig(report.cos_phi), sig(report.phi)),
        Format::Json => json(&report),
    };
    output.emit(&text)?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct StepRow {
    n: usize,
    #[serde(rename = "A_n")]
    a_n: f64,
    #[serde(rename = "B_n")]
    b_n: f64,
    cos_phi: f64,
    phi: f64,
    delta: Option<f64>,
}

#[derive(Serialize)]
struct IterateSummary {
    converged: bool,
    steps_taken: usize,
    limit_gap: f64,
    on_invariant_plane: bool,
    unit: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<&'static str>,
}

#[derive(Serialize)]
struct IterateReport {
    steps: Vec<StepRow>,
    summary: IterateSummary,
}

pub fn iterate(args: IterateArgs) -> CmdResult {
    let cfg = FileConfig::load_optional(args.common.config.as_deref())?;
    let output = Output::resolve(&args.common, &cfg)?;
    let a = number_arg("A", &args.metric.a, &cfg.a)?;
    let b = number_arg("B", &args.metric.b, &cfg.b)?;
    let alpha = number_arg("alpha", &args.params.alpha, &cfg.alpha)?;
    let beta = number_arg("beta", &args.params.beta, &cfg.beta)?;
    let w = match merged_triple(&args.w, &cfg.w) {
        Some(text) => parse_triple("w", &text)?,
        None => [1.0, 0.0, 0.0],
    };
    let max_steps = args.max_steps.or(cfg.max_steps).unwrap_or(DEFAULT_MAX_STEPS);
    let epsilon = finite("epsilon", args.epsilon.or(cfg.epsilon).unwrap_or(DEFAULT_EPSILON))?;
    let normalize = args.normalize || cfg.normalize.unwrap_or(false);
    let degrees = args.degrees || cfg.degrees.unwrap_or(false);

    let g0 = CirculantMetric::new(a, b);
    let params = ConformalParams::new(alpha, beta).admissible()?;
    let flow = FlowConfig::new(g0, params)
        .with_w(Vector3::from(w))
        .with_max_steps(max_steps)
        .with_epsilon(epsilon)
        .with_normalize(normalize);
    flow.validate()?;

    let cos0 = g0.angle_cos(Vector3::from(w))?;
    let trace = iterate_angle(cos0, &params, max_steps, epsilon)?;
    let metrics = iterate_metrics(&flow.with_max_steps(trace.steps_taken.max(1)))?;

    let steps: Vec<StepRow> = trace
        .cosines
        .iter()
        .enumerate()
        .map(|(n, &c)| StepRow {
            n,
            a_n: metrics[n].a(),
            b_n: metrics[n].b(),
            cos_phi: c,
            phi: angle_value(c, degrees),
            delta: (n > 0).then(|| c - trace.cosines[n - 1]),
        })
        .collect();
    let report = IterateReport {
        steps,
        summary: IterateSummary {
            converged: trace.converged,
            steps_taken: trace.steps_taken,
            limit_gap: trace.limit_gap,
            on_invariant_plane: trace.on_invariant_plane,
            unit: unit(degrees),
            note: trace.on_invariant_plane.then_some(INVARIANT_PLANE_NOTE),
        },
    };

    let text = match output.format {
        Format::Json => json(&report),
        Format::Csv => iterate_csv(&report),
        Format::Text => iterate_text(&report),
    };
    output.emit(&text)?;
    Ok(EXIT_OK)
}

fn iterate_csv(r: &IterateReport) -> String {
    let mut s = String::from("n,A_n,B_n,cos_phi,phi,delta\n");
    for row in &r.steps {
        let delta = row.delta.map(sig).unwrap_or_default();
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            row.n,
            sig(row.a_n),
            sig(row.b_n),
            sig(row.cos_phi),
            sig(row.phi),
            delta
        );
    }
    let m = &r.summary;
    let _ = writeln!(
        s,
        "# converged={},steps_taken={},limit_gap={},unit={}",
        m.converged,
        m.steps_taken,
        sig(m.limit_gap),
        m.unit
    );
    if let Some(note) = m.note {
        let _ = writeln!(s, "# note: {note}");
    }
    s
}

fn iterate_text(r: &IterateReport) -> String {
    let mut s = format!(
        "{:>5}  {:>16}  {:>16}  {:>16}  {:>16}  {:>16}\n",
        "n", "A_n", "B_n", "cos_phi", "phi", "delta"
    );
    for row in &r.steps {
        let delta = row.delta.map(sig).unwrap_or_else(|| "-".into());
        let _ = writeln!(
            s,
            "{:>5}  {:>16}  {:>16}  {:>16}  {:>16}  {:>16}",
            row.n,
            sig(row.a_n),
            sig(row.b_n),
            sig(row.cos_phi),
            sig(row.phi),
            delta
        );
    }
    let m = &r.summary;
    let _ = writeln!(s, "converged: {}", m.converged);
    let _ = writeln!(s, "steps_taken: {}", m.steps_taken);
    let _ = writeln!(s, "limit_gap: {}", sig(m.limit_gap));
    if let Some(note) = m.note {
        let _ = writeln!(s, "note: {note}");
    }
    s
}

#[derive(Serialize)]
struct TransformReport {
    #[serde(rename = "A")]
    a: f64,
    #[serde(rename = "B")]
    b: f64,
    alpha: f64,
    beta: f64,
    #[serde(rename = "A1")]
    a1: f64,
    #[serde(rename = "B1")]
    b1: f64,
    det_f: f64,
    g_positive_definite: bool,
    g1_positive_definite: bool,
}

pub fn transform(args: TransformArgs) -> CmdResult {
    let cfg = FileConfig::load_optional(args.common.config.as_deref())?;
    let output = Output::resolve(&args.common, &cfg)?;
    let a = number_arg("A", &args.metric.a, &cfg.a)?;
    let b = number_arg("B", &args.metric.b, &cfg.b)?;
    let alpha = number_arg("alpha", &args.params.alpha, &cfg.alpha)?;
    let beta = number_arg("beta", &args.params.beta, &cfg.beta)?;

    let g = CirculantMetric::new(a, b);
    let params = ConformalParams::new(alpha, beta);
    let r = TransformReport {
        a,
        b,
        alpha,
        beta,
        a1: alpha * a + 2.0 * beta * b,
        b1: beta * a + (alpha + beta) * b,
        det_f: f_determinant(&g),
        g_positive_definite: g.is_positive_definite(),
        g1_positive_definite: almost_conformal(&g, &params).is_positive_definite(),
    };
    let text = match output.format {
        Format::Json => json(&r),
        Format::Csv => format!(
            "A1,B1,det_f,g_positive_definite,g1_positive_definite\n{},{},{},{},{}\n",
            sig(r.a1),
            sig(r.b1),
            sig(r.det_f),
            r.g_positive_definite,
            r.g1_positive_definite
        ),
        Format::Text => format!(
            "A1 = {}\nB1 = {}\ndet_f = {}\ng positive definite: {}\ng1 positive definite: {}\n",
            sig(r.a1),
            sig(r.b1),
            sig(r.det_f),
            r.g_positive_definite,
            r.g1_positive_definite
        ),
    };
    output.emit(&text)?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct ConditionJson {
    rule: &'static str,
    max_residual: f64,
    mean_residual: f64,
    tolerance: f64,
    pass: bool,
    worst_point: Option<[f64; 3]>,
}

impl From<&ConditionReport> for ConditionJson {
    fn from(r: &ConditionReport) -> Self {
        Self {
            rule: r.rule.key(),
            max_residual: r.max_residual,
            mean_residual: r.mean_residual,
            tolerance: r.tolerance,
            pass: r.pass,
            worst_point: r.worst_point(),
        }
    }
}

#[derive(Serialize)]
struct NablaJson {
    max_abs: f64,
    mean_abs: f64,
    worst_point: Option<[f64; 3]>,
    evaluated: usize,
    singular_points: Vec<[f64; 3]>,
    pass: bool,
}

impl NablaJson {
    fn new(s: &NablaSweep, tol: f64) -> Self {
        Self {
            max_abs: s.max_abs,
            mean_abs: s.mean_abs,
            worst_point: s.worst_point,
            evaluated: s.evaluated,
            singular_points: s.singular_points.clone(),
            pass: s.passes(tol),
        }
    }
}

#[derive(Serialize)]
struct RegionJson {
    lower: [f64; 3],
    upper: [f64; 3],
    n: usize,
}

#[derive(Serialize)]
struct FieldsJson {
    #[serde(rename = "A")]
    a: String,
    #[serde(rename = "B")]
    b: String,
    alpha: String,
    beta: String,
}

#[derive(Serialize)]
struct CheckReport {
    fields: FieldsJson,
    region: RegionJson,
    h: f64,
    tol: f64,
    conditions: Vec<ConditionJson>,
    amplification: f64,
    implied_tolerance: f64,
    implication_holds: bool,
    nabla_q_g: NablaJson,
    nabla_q_g1: NablaJson,
    pass: bool,
}

pub fn check_fields(args: CheckFieldsArgs) -> CmdResult {
    let cfg = FileConfig::load_optional(args.common.config.as_deref())?;
    let output = Output::resolve(&args.common, &cfg)?;
    let sources = [
        ("A", required("A", merged(&args.a, &cfg.a))?),
        ("B", required("B", merged(&args.b, &cfg.b))?),
        ("alpha", required("alpha", merged(&args.alpha, &cfg.alpha))?),
        ("beta", required("beta", merged(&args.beta, &cfg.beta))?),
    ];
    let mut fields = Vec::with_capacity(4);
    for (name, src) in &sources {
        let f = ScalarField::parse(*name, src)
            .map_err(|e| CliError::Usage(format!("cannot parse --{name} '{src}': {e}")))?;
        fields.push(f);
    }
    let lower = match merged_triple(&args.lower, &cfg.lower) {
        Some(t) => parse_triple("lower", &t)?,
        None => [0.0; 3],
    };
    let upper = match merged_triple(&args.upper, &cfg.upper) {
        Some(t) => parse_triple("upper", &t)?,
        None => [1.0; 3],
    };
    let n = args.n.or(cfg.n).unwrap_or(DEFAULT_GRID);
    let h = finite("h", args.h.or(cfg.h).unwrap_or(DEFAULT_STEP))?;
    let tol = finite("tol", args.tol.or(cfg.tol).unwrap_or(DEFAULT_TOLERANCE))?;
    let region = Region::new(lower, upper, n)?;
    if h <= 0.0 {
        return Err(CliError::Usage(format!("invalid value for --h: {h} must be positive")));
    }
    if tol < 0.0 {
        return Err(CliError::Usage(format!(
            "invalid value for --tol: {tol} must be non-negative"
        )));
    }

    let (a, b, alpha, beta) = (&fields[0], &fields[1], &fields[2], &fields[3]);
    for f in &fields {
        f.check_on_grid(&region, h)?;
    }
    let consistency = transform_consistency(a, b, alpha, beta, &region, h, tol)?;
    let sweep_g = nabla_q_sweep(a, b, &region, h)?;
    let (a1, b1) = transformed_fields(a, b, alpha, beta);
    let sweep_g1 = nabla_q_sweep(&a1, &b1, &region, h)?;

    let pass = consistency.all_pass() && sweep_g.passes(tol) && sweep_g1.passes(tol);
    let report = CheckReport {
        fields: FieldsJson {
            a: sources[0].1.clone(),
            b: sources[1].1.clone(),
            alpha: sources[2].1.clone(),
            beta: sources[3].1.clone(),
        },
        region: RegionJson { lower, upper, n },
        h,
        tol,
        conditions: consistency.reports().iter().map(|r| ConditionJson::from(*r)).collect(),
        amplification: consistency.amplification,
        implied_tolerance: consistency.implied_tolerance,
        implication_holds: consistency.implication_holds,
        nabla_q_g: NablaJson::new(&sweep_g, tol),
        nabla_q_g1: NablaJson::new(&sweep_g1, tol),
        pass,
    };
    let text = match output.format {
        Format::Json => json(&report),
        Format::Csv => check_csv(&report),
        Format::Text => check_text(&report),
    };
    output.emit(&text)?;
    Ok(if pass { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn csv_point(p: Option<[f64; 3]>) -> String {
    match p {
        Some([x, y, z]) => format!("{},{},{}", sig(x), sig(y), sig(z)),
        None => ",,".into(),
    }
}

fn check_csv(r: &CheckReport) -> String {
    let mut s = String::from("check,max,mean,tolerance,pass,worst_x,worst_y,worst_z\n");
    for c in &r.conditions {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            c.rule,
            sig(c.max_residual),
            sig(c.mean_residual),
            sig(c.tolerance),
            c.pass,
            csv_point(c.worst_point)
        );
    }
    for (label, q) in [("nabla_q_g", &r.nabla_q_g), ("nabla_q_g1", &r.nabla_q_g1)] {
        let _ = writeln!(
            s,
            "{label},{},{},{},{},{}",
            sig(q.max_abs),
            sig(q.mean_abs),
            sig(r.tol),
            q.pass,
            csv_point(q.worst_point)
        );
    }
    s
}

fn check_text(r: &CheckReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "region {} .. {}, n = {}, h = {}, tol = {}",
        sig_point(r.region.lower),
        sig_point(r.region.upper),
        r.region.n,
        sig(r.h),
        sig(r.tol)
    );
    for c in &r.conditions {
        let _ = write!(
            s,
            "condition {:<10}  max {:>14}  mean {:>14}  {}",
            c.rule,
            sig(c.max_residual),
            sig(c.mean_residual),
            verdict(c.pass)
        );
        if let (false, Some(p)) = (c.pass, c.worst_point) {
            let _ = write!(s, "  worst at {}", sig_point(p));
        }
        s.push('\n');
    }
    let _ = writeln!(
        s,
        "amplification {}  implied tolerance {}  implication {}",
        sig(r.amplification),
        sig(r.implied_tolerance),
        if r.implication_holds { "holds" } else { "violated" }
    );
    for (label, q) in [("g", &r.nabla_q_g), ("g1", &r.nabla_q_g1)] {
        let _ = write!(
            s,
            "nabla_q {:<3}  max {:>14}  mean {:>14}  {}",
            label,
            sig(q.max_abs),
            sig(q.mean_abs),
            verdict(q.pass)
        );
        if !q.singular_points.is_empty() {
            let _ = write!(s, "  ({} singular points skipped)", q.singular_points.len());
        }
        s.push('\n');
    }
    let _ = writeln!(s, "result: {}", verdict(r.pass));
    s
}
