mod args;

use std::fmt::Write as _;
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;
use dhinf::io::{parse_plant, plant_to_json, rows};
use dhinf::model::{check_admissibility, AdmissibilityReport};
use dhinf::verify::{
    alpha_sweep, certify_robust_performance, default_samples, robust_verify, AnalysisCertificate, RobustnessReport,
};
use dhinf::{example, Config, Error, Mat, SynthesisResult, UncertainPlant};
use serde::Serialize;

use args::{AnalyzeArgs, Cli, Command, Common, DemoArgs, Format, GammaArgs, Source, SweepArgs, SynthArgs, VerifyArgs};

const USAGE: u8 = 2;
const UNCERTIFIED: u8 = 3;
const NUMERICAL: u8 = 4;
const ALPHA_PATH: u8 = 5;

#[derive(Debug)]
struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn new(code: u8, msg: impl Into<String>) -> Self {
        Self { code, msg: msg.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Json(_) | Error::Dimension(_) | Error::InvalidInput(_) => USAGE,
            Error::Infeasible(_) => UNCERTIFIED,
            Error::InvalidAlphaPath(_) => ALPHA_PATH,
            Error::SingularPencil { .. } | Error::NotCausal | Error::Irregular | Error::Numerical(_) => NUMERICAL,
        };
        Self::new(code, e.to_string())
    }
}

/// Rendered report plus the exit status it implies.
struct Outcome {
    report: String,
    code: u8,
    note: Option<String>,
}

type CmdResult = Result<Outcome, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::new(USAGE, format!("cannot read {}: {e}", path.display())))
}

fn load_plant(src: &Source) -> Result<UncertainPlant, Failure> {
    match &src.input {
        Some(path) => Ok(parse_plant(&read(path)?)?),
        None => Ok(example::plant()),
    }
}

fn load_config(common: &Common, alpha: Option<f64>) -> Result<Config, Failure> {
    let mut cfg = match &common.config {
        Some(path) => Config::from_json(&read(path)?)?,
        None => Config::default(),
    };
    if let Some(v) = common.solver_margin {
        cfg.solver.margin = v;
    }
    if let Some(v) = common.solver_tol {
        cfg.solver.tol = v;
    }
    if let Some(v) = common.delta_grid {
        cfg.sampling.delta_grid = v;
    }
    if let Some(v) = common.samples {
        cfg.sampling.samples = v;
    }
    if let Some(v) = common.seed {
        cfg.sampling.seed = v;
    }
    if let Some(v) = alpha {
        cfg.alpha = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// A bare matrix, an object with a `gain` matrix, or a synthesis report.
fn load_gain(path: &Path) -> Result<Mat, Failure> {
    let value: serde_json::Value = serde_json::from_str(&read(path)?).map_err(Error::from)?;
    let raw = if value.is_array() {
        value
    } else {
        value
            .pointer("/gain")
            .or_else(|| value.pointer("/synthesis/gain"))
            .cloned()
            .ok_or_else(|| Failure::new(USAGE, "gain file has no `gain` matrix"))?
    };
    let r: Vec<Vec<f64>> = serde_json::from_value(raw).map_err(Error::from)?;
    rows::from_rows(&r).map_err(|e| Failure::new(USAGE, e))
}

fn json<T: Serialize>(v: &T) -> Result<String, Failure> {
    let mut s = serde_json::to_string_pretty(v).map_err(Error::from)?;
    s.push('\n');
    Ok(s)
}

fn unsupported(format: Format, cmd: &str) -> Failure {
    Failure::new(
        USAGE,
        format!("{cmd} does not support --format {format:?}").to_lowercase(),
    )
}

fn samples(up: &UncertainPlant, cfg: &Config) -> Result<Vec<Mat>, Failure> {
    Ok(default_samples(
        up,
        cfg.sampling.delta_grid,
        cfg.sampling.samples,
        cfg.sampling.seed,
    )?)
}

fn fmt_gain(m: &Mat) -> String {
    let rows: Vec<String> = m
        .row_iter()
        .map(|r| r.iter().map(|v| format!("{v:.6}")).collect::<Vec<_>>().join(", "))
        .collect();
    format!("[{}]", rows.join("; "))
}

fn sweep_summary(out: &mut String, rep: &RobustnessReport) {
    let opt = |v: Option<f64>| v.map_or("-".into(), |x| format!("{x:.6}"));
    let _ = writeln!(out, "samples                  {}", rep.samples.len());
    let _ = writeln!(out, "all admissible           {}", rep.all_admissible);
    let _ = writeln!(
        out,
        "spectral radius range    [{}, {}]",
        opt(rep.rho_min),
        opt(rep.rho_max)
    );
    let _ = writeln!(out, "sampled worst case norm  {:.6}", rep.sampled_worst_case_norm);
}

#[derive(Serialize)]
struct AnalyzeReport {
    gamma: f64,
    #[serde(with = "dhinf::io::opt_rows")]
    gain: Option<Mat>,
    nominal: AdmissibilityReport,
    certificate: AnalysisCertificate,
    sweep: RobustnessReport,
    certified: bool,
}

fn analyze(a: AnalyzeArgs) -> CmdResult {
    let cfg = load_config(&a.common, None)?;
    let up = load_plant(&a.source)?;
    let gain = a.gain.as_deref().map(load_gain).transpose()?;
    let cl = match &gain {
        Some(k) => up.closed_loop(k)?,
        None => {
            if up.plant.m() > 0 && up.plant.bu.iter().any(|&v| v != 0.0) {
                eprintln!("warning: Bu is ignored; pass --gain to analyze a closed loop");
            }
            up
        }
    };
    let nominal = check_admissibility(&cl.plant.e, &cl.plant.a)?;
    let certificate = certify_robust_performance(&cl, a.gamma, &cfg.solver)?;
    let sweep = robust_verify(&cl, None, &samples(&cl, &cfg)?, Some(a.gamma), &cfg.hinf)?;
    let certified = certificate.certified;
    let (code, note) = match (certified, sweep.pass) {
        (true, true) => (0, None),
        (true, false) => (
            NUMERICAL,
            Some("certificate contradicted by the sampled sweep".to_string()),
        ),
        (false, _) => (
            UNCERTIFIED,
            Some(format!("no robust certificate at gamma = {}", a.gamma)),
        ),
    };
    let report = AnalyzeReport {
        gamma: a.gamma,
        gain,
        nominal,
        certificate,
        sweep,
        certified,
    };
    let text = match a.common.format {
        Format::Json => json(&report)?,
        Format::Text => {
            let mut out = String::new();
            let n = &report.nominal;
            let _ = writeln!(out, "gamma                    {}", report.gamma);
            let _ = writeln!(out, "nominal admissible       {}", n.admissible);
            let _ = writeln!(
                out,
                "nominal spectral radius  {}",
                n.spectral_radius.map_or("-".into(), |r| format!("{r:.6}"))
            );
            let _ = writeln!(out, "certified                {}", report.certified);
            let _ = writeln!(out, "certificate margin       {:.3e}", report.certificate.margin);
            sweep_summary(&mut out, &report.sweep);
            out
        }
        Format::Csv => return Err(unsupported(Format::Csv, "analyze")),
    };
    Ok(Outcome {
        report: text,
        code,
        note,
    })
}

#[derive(Serialize)]
struct SynthReport {
    synthesis: SynthesisResult,
    verification: RobustnessReport,
    verified: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    reported_gamma: Option<f64>,
}

fn run_synthesis(up: &UncertainPlant, g: &GammaArgs, common: &Common, reported: bool) -> CmdResult {
    let cfg = load_config(common, g.alpha)?;
    let result = match g.gamma {
        Some(gamma) => dhinf::synthesize(up, gamma, cfg.alpha, &cfg.solver)?,
        None => dhinf::synthesize_optimal(up, cfg.alpha, &cfg.solver)?,
    };
    for w in &result.diagnostics.warnings {
        eprintln!("warning: {w}");
    }
    // The certificate is only reported once the closed loop is admissible and
    // below gamma on every sample.
    let verification = robust_verify(
        up,
        Some(&result.gain),
        &samples(up, &cfg)?,
        Some(result.gamma),
        &cfg.hinf,
    )?;
    let verified = verification.pass;
    let reported_gamma = match (reported && g.gamma.is_none(), cfg.alpha) {
        (true, 0.0) => Some(example::GAMMA_ALPHA0),
        (true, 1000.0) => Some(example::GAMMA_ALPHA1000),
        _ => None,
    };
    let report = SynthReport {
        synthesis: result,
        verification,
        verified,
        reported_gamma,
    };
    let (code, note) = if verified {
        (0, None)
    } else {
        (
            NUMERICAL,
            Some("synthesized gain failed the sampled closed-loop check".to_string()),
        )
    };
    let text = match common.format {
        Format::Json => json(&report)?,
        Format::Text => {
            let s = &report.synthesis;
            let mut out = String::new();
            let _ = writeln!(out, "gain                     {}", fmt_gain(&s.gain));
            let _ = writeln!(out, "gamma                    {:.6}", s.gamma);
            if let Some(r) = report.reported_gamma {
                let _ = writeln!(out, "reference gamma          {r}");
            }
            let _ = writeln!(out, "alpha                    {}", s.alpha);
            let _ = writeln!(
                out,
                "cond(Q), cond(S)         {:.3e}, {:.3e}",
                s.diagnostics.cond_q, s.diagnostics.cond_s
            );
            let _ = writeln!(out, "S regularized            {}", s.s_regularized);
            let _ = writeln!(out, "round-trip error         {:.3e}", s.diagnostics.roundtrip_error);
            sweep_summary(&mut out, &report.verification);
            let _ = writeln!(out, "verified                 {}", report.verified);
            out
        }
        Format::Csv => return Err(unsupported(Format::Csv, "synthesize")),
    };
    Ok(Outcome {
        report: text,
        code,
        note,
    })
}

fn synthesize(a: SynthArgs) -> CmdResult {
    let up = load_plant(&a.source)?;
    if up.plant.m() == 0 || up.plant.bu.iter().all(|&v| v == 0.0) {
        return Err(Failure::new(USAGE, "synthesis needs a nonzero Bu"));
    }
    run_synthesis(&up, &a.gamma, &a.common, a.source.example)
}

fn demo(a: DemoArgs) -> CmdResult {
    let up = example::plant();
    if let Some(path) = &a.export_plant {
        std::fs::write(path, plant_to_json(&up)?)
            .map_err(|e| Failure::new(USAGE, format!("cannot write {}: {e}", path.display())))?;
    }
    run_synthesis(&up, &a.gamma, &a.common, true)
}

fn verify(a: VerifyArgs) -> CmdResult {
    let cfg = load_config(&a.common, None)?;
    let up = load_plant(&a.source)?;
    let gain = a.gain.as_deref().map(load_gain).transpose()?;
    let rep = robust_verify(&up, gain.as_ref(), &samples(&up, &cfg)?, a.gamma, &cfg.hinf)?;
    let (code, note) = if rep.pass {
        (0, None)
    } else {
        (UNCERTIFIED, Some("sampled check failed".to_string()))
    };
    let text = match a.common.format {
        Format::Json => json(&rep)?,
        Format::Text => rep.to_text(),
        Format::Csv => {
            let mut out = String::from("sample,admissible,spectral_radius,hinf_norm,omega\n");
            let opt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:.10}"));
            for (i, s) in rep.samples.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{i},{},{},{:.10},{}",
                    s.admissible,
                    opt(s.spectral_radius),
                    s.hinf_norm,
                    opt(s.omega)
                );
            }
            out
        }
    };
    Ok(Outcome {
        report: text,
        code,
        note,
    })
}

fn sweep_alpha(a: SweepArgs) -> CmdResult {
    let cfg = load_config(&a.common, None)?;
    let up = load_plant(&a.source)?;
    let curve = alpha_sweep(&up, &a.alphas, &cfg.solver)?;
    if !curve.duplicates.is_empty() {
        eprintln!("warning: dropped duplicate alpha values {:?}", curve.duplicates);
    }
    let text = match a.common.format {
        Format::Json => json(&curve)?,
        Format::Csv => curve.to_csv(),
        Format::Text => {
            let mut out = format!("{:>12}  {:>12}  {}\n", "alpha", "gamma_min", "status");
            for p in &curve.points {
                let g = p.gamma_min.map_or("-".into(), |g| format!("{g:.6}"));
                let _ = writeln!(out, "{:>12}  {:>12}  {}", p.alpha, g, p.status.as_str());
            }
            out
        }
    };
    Ok(Outcome {
        report: text,
        code: 0,
        note: None,
    })
}

fn emit(out: &Outcome, path: Option<&Path>) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, &out.report)
            .map_err(|e| Failure::new(USAGE, format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{}", out.report);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let output = match &cli.command {
        Command::Analyze(a) => a.common.output.clone(),
        Command::Synthesize(a) => a.common.output.clone(),
        Command::Verify(a) => a.common.output.clone(),
        Command::SweepAlpha(a) => a.common.output.clone(),
        Command::Demo(a) => a.common.output.clone(),
    };
    let result = match cli.command {
        Command::Analyze(a) => analyze(a),
        Command::Synthesize(a) => synthesize(a),
        Command::Verify(a) => verify(a),
        Command::SweepAlpha(a) => sweep_alpha(a),
        Command::Demo(a) => demo(a),
    };
    let outcome = result.and_then(|o| emit(&o, output.as_deref()).map(|_| o));
    match outcome {
        Ok(o) => {
            if let Some(note) = o.note {
                eprintln!("dhinf: {note}");
            }
            ExitCode::from(o.code)
        }
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
