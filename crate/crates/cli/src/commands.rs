use crate::grid::parse_grid;
use crate::metric_spec::{Kind, MetricSpec, Parameters};
use crate::output::{csv, emit, metadata, report_csv, write_file, Cell};
use crate::{
    BuildArgs, Cert, CertArgs, Cli, Command, Format, MetricArgs, OutputArgs, Potential, SpectralArgs, SweepArgs,
    SweepParam, TableArgs, Usage, VerifyArgs,
};
use anyhow::{Context, Result};
use clap::ValueEnum;
use rayon::prelude::*;
use serde_json::json;
use vglab::comparison::{bishop_gromov_check, thm_a_certificate};
use vglab::constructions::{
    assemble_growth_schedule, build_lemma1_metric_with_delta, delta_star, lemma1_certificate_for, lemma2_certificate,
    thm_b_certificate, thm_c_certificate,
};
use vglab::geometry::{curvature_at, evg_report, second_variation_certificate};
use vglab::profile::QuadratureSpec;
use vglab::report::{fmt_e12, to_json_string, Outcome, VerificationReport};
use vglab::spectral::{
    davies_simon_operator, nonnegativity_verdict, theorem_d_chain, theorem_e_chain, RadialOperator,
    DEFAULT_VERDICT_TOL,
};

fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(Usage(msg.into()).into())
}

/// Everything a command needs besides its own arguments.
struct Ctx {
    tol: f64,
    quad: QuadratureSpec,
}

pub fn run(cli: Cli) -> Result<u8> {
    if !(cli.tol > 0.0 && cli.tol.is_finite()) {
        return usage(format!("--tol must be positive, got {}", cli.tol));
    }
    configure_threads()?;
    vglab::report::set_tolerance_scale(cli.tol);
    let ctx = Ctx { tol: cli.tol, quad: QuadratureSpec::default().scaled(cli.tol) };
    match cli.command {
        Command::Build(a) => build(&ctx, a),
        Command::Curvature(a) => curvature(&ctx, a),
        Command::Volume(a) => volume(&ctx, a),
        Command::Verify(a) => verify(&ctx, a),
        Command::Spectral(a) => spectral(&ctx, a),
        Command::Sweep(a) => sweep(&ctx, a),
    }
}

/// `VGLAB_MAX_THREADS` caps the worker pool for the whole process and
/// enables parallel sweeps.
fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("VGLAB_MAX_THREADS") else {
        return Ok(());
    };
    let threads: usize = match raw.trim().parse() {
        Ok(k) if k >= 1 => k,
        _ => return usage(format!("VGLAB_MAX_THREADS must be a positive integer, got `{raw}`")),
    };
    rayon::ThreadPoolBuilder::new().num_threads(threads).build_global().context("cannot configure the thread pool")
}

fn metric_spec(args: &MetricArgs, default_kind: Option<Kind>) -> Result<MetricSpec> {
    let mut spec = match &args.metric {
        Some(path) => {
            let spec = MetricSpec::load(path)?;
            if args.kind.is_some_and(|k| k != spec.kind) {
                return usage(format!("--kind conflicts with kind {:?} in {}", spec.kind, path.display()));
            }
            spec
        }
        None => {
            let Some(kind) = args.kind.or(default_kind) else {
                return usage("give --metric FILE or --kind");
            };
            let Some(n) = args.n else {
                return usage("give --n with --kind");
            };
            MetricSpec { kind, n, parameters: Parameters::default() }
        }
    };
    // Flags override the file, which is how sweeps vary one parameter.
    let p = &mut spec.parameters;
    spec.n = args.n.unwrap_or(spec.n);
    p.r = args.r.or(p.r);
    p.rbar = args.rbar.or(p.rbar);
    p.k = args.k.or(p.k);
    p.delta = args.delta.or(p.delta);
    p.a = args.a.clone().or(p.a.take());
    spec.validate().map_err(|e| Usage(e.to_string()))?;
    Ok(spec)
}

fn require_kind(spec: &MetricSpec, cert: Cert, kind: Kind) -> Result<()> {
    if spec.kind != kind {
        return usage(format!("{cert:?} needs a metric of kind {kind:?}, got {:?}", spec.kind));
    }
    Ok(())
}

fn require(value: Option<f64>, flag: &str, cert: Cert) -> Result<f64> {
    match value {
        Some(v) => Ok(v),
        None => usage(format!("{cert:?} needs {flag}")),
    }
}

fn radii(args: &CertArgs, cert: Cert) -> Result<Vec<f64>> {
    let Some(text) = &args.radii else {
        return usage(format!("{cert:?} needs --radii"));
    };
    parse_grid(text, args.grid).map_err(|e| Usage(e.to_string()).into())
}

fn default_kind(cert: Cert) -> Option<Kind> {
    match cert {
        Cert::Lemma1 => Some(Kind::Lemma1),
        Cert::Lemma2 => Some(Kind::Lemma2),
        Cert::ThmB => Some(Kind::ThmB),
        Cert::ThmC => Some(Kind::ThmC),
        Cert::Growth => Some(Kind::GrowthSchedule),
        _ => None,
    }
}

fn run_cert(ctx: &Ctx, cert: Cert, args: &CertArgs) -> Result<VerificationReport> {
    let spec = metric_spec(&args.metric, default_kind(cert))?;
    let n = spec.n;
    let p = spec.parameters.clone();
    let q = &ctx.quad;
    let mut rep = match cert {
        Cert::Lemma1 => {
            require_kind(&spec, cert, Kind::Lemma1)?;
            let m = build_lemma1_metric_with_delta(n, p.r.unwrap_or_default(), p.delta.unwrap_or_else(delta_star))?;
            lemma1_certificate_for(&m, q)?
        }
        Cert::Lemma2 => {
            require_kind(&spec, cert, Kind::Lemma2)?;
            lemma2_certificate(n, p.rbar.unwrap_or_default(), p.r.unwrap_or_default(), q)?
        }
        Cert::ThmB => {
            require_kind(&spec, cert, Kind::ThmB)?;
            thm_b_certificate(n, p.r.unwrap_or_default(), q)?
        }
        Cert::ThmC => {
            require_kind(&spec, cert, Kind::ThmC)?;
            thm_c_certificate(n, p.k.unwrap_or_default(), q)?
        }
        Cert::Growth => {
            require_kind(&spec, cert, Kind::GrowthSchedule)?;
            assemble_growth_schedule(n, p.a.as_deref().unwrap_or_default(), q)?.1
        }
        Cert::ThmA => {
            let nu = require(args.nu, "--nu", cert)?;
            let radii = radii(args, cert)?;
            let resolved = spec.resolve(q)?;
            thm_a_certificate(resolved.cone()?, nu, &radii, q)?
        }
        Cert::Bishop => {
            let radii = radii(args, cert)?;
            bishop_gromov_check(spec.resolve(q)?.model()?, &radii, q)?
        }
        Cert::SecondVariation => {
            let radii = radii(args, cert)?;
            second_variation_certificate(spec.resolve(q)?.model()?, &radii)?
        }
        Cert::ThmD | Cert::ThmE => {
            let lambda = require(args.lambda, "--lambda", cert)?;
            let alpha = require(args.alpha, "--alpha", cert)?;
            let radii = radii(args, cert)?;
            let resolved = spec.resolve(q)?;
            let m = resolved.cone()?;
            let chain = if cert == Cert::ThmD { theorem_d_chain } else { theorem_e_chain };
            let parts = radii.iter().map(|&r| chain(m, lambda, alpha, r, q)).collect::<vglab::Result<Vec<_>>>()?;
            merge_over_radii(parts, &radii)
        }
    };
    rep.tolerance("scale", ctx.tol);
    Ok(rep)
}

/// One report from per-radius chain reports, suffixing names with `@R=`.
fn merge_over_radii(parts: Vec<VerificationReport>, radii: &[f64]) -> VerificationReport {
    let mut out = VerificationReport::new(parts[0].certificate_id.clone());
    for (key, value) in &parts[0].inputs {
        if key != "R" {
            out.input(key, value.clone());
        }
    }
    out.input("radii", radii.to_vec());
    for (part, &r) in parts.iter().zip(radii) {
        let tag = format!("@R={}", fmt_e12(r));
        for (k, v) in &part.constants_used {
            out.constant(&format!("{k}{tag}"), *v);
        }
        for (k, v) in &part.tolerances {
            out.tolerance(k, *v);
        }
        out.extend(part.checks.iter().cloned().map(|mut c| {
            c.name.push_str(&tag);
            c
        }));
    }
    out
}

fn build(ctx: &Ctx, a: BuildArgs) -> Result<u8> {
    let spec = metric_spec(&a.metric, None)?;
    let resolved = spec.resolve(&ctx.quad)?;
    let body = to_json_string(&json!({ "spec": spec, "derived": resolved.derived() }));
    emit(a.out.as_deref(), &body, ctx.tol)?;
    Ok(0)
}

fn table_grid(a: &TableArgs) -> Result<Vec<f64>> {
    parse_grid(&a.radii, a.grid).map_err(|e| Usage(e.to_string()).into())
}

fn emit_table(ctx: &Ctx, out: &OutputArgs, header: &[&str], rows: Vec<Vec<f64>>) -> Result<()> {
    let body = match out.format.unwrap_or(Format::Csv) {
        Format::Csv => csv(header, rows.into_iter().map(|r| r.into_iter().map(Cell::Num).collect())),
        Format::Json => {
            let objects: Vec<serde_json::Map<String, serde_json::Value>> = rows
                .into_iter()
                .map(|r| header.iter().zip(r).map(|(h, x)| (h.to_string(), json!(x))).collect())
                .collect();
            to_json_string(&objects)
        }
    };
    emit(out.out.as_deref(), &body, ctx.tol)
}

fn curvature(ctx: &Ctx, a: TableArgs) -> Result<u8> {
    let spec = metric_spec(&a.metric, None)?;
    let resolved = spec.resolve(&ctx.quad)?;
    let m = resolved.model()?;
    let rows = table_grid(&a)?
        .into_iter()
        .map(|t| {
            let c = curvature_at(m, t)?;
            Ok(vec![t, c.k_rad, c.k_tan, c.ric_rad, c.ric_tan, c.scal, c.sigma_minus, c.ricm, c.rho])
        })
        .collect::<Result<Vec<_>>>()?;
    let header = ["t", "k_rad", "k_tan", "ric_rad", "ric_tan", "scal", "sigma_minus", "ricm", "rho"];
    emit_table(ctx, &a.output, &header, rows)?;
    Ok(0)
}

fn volume(ctx: &Ctx, a: TableArgs) -> Result<u8> {
    let spec = metric_spec(&a.metric, None)?;
    let resolved = spec.resolve(&ctx.quad)?;
    let rows = evg_report(resolved.cone()?, &table_grid(&a)?, &ctx.quad)?;
    let rows = rows.into_iter().map(|r| vec![r.r, r.volume, r.ratio]).collect();
    emit_table(ctx, &a.output, &["r", "volume", "ratio"], rows)?;
    Ok(0)
}

fn verify(ctx: &Ctx, a: VerifyArgs) -> Result<u8> {
    let rep = run_cert(ctx, a.cert, &a.cert_args)?;
    let body = match a.output.format.unwrap_or(Format::Json) {
        Format::Json => rep.to_json(),
        Format::Csv => report_csv(&rep),
    };
    emit(a.output.out.as_deref(), &body, ctx.tol)?;
    Ok(rep.overall.exit_code() as u8)
}

fn spectral(ctx: &Ctx, a: SpectralArgs) -> Result<u8> {
    let spec = metric_spec(&a.metric, None)?;
    let op = match a.potential {
        Potential::InverseSquare => {
            if spec.kind != Kind::Euclidean {
                return usage("the inverse-square potential is defined on euclidean space only");
            }
            davies_simon_operator(spec.n, a.lambda)?
        }
        potential => {
            let resolved = spec.resolve(&ctx.quad)?;
            let m = resolved.cone()?;
            match potential {
                Potential::Rho => RadialOperator::rho(m, a.lambda)?,
                Potential::Ricm => RadialOperator::ricm(m, a.lambda)?,
                _ => RadialOperator::shifted(m, a.lambda)?,
            }
        }
    };
    let op = op.with_angular(a.angular);
    let v = nonnegativity_verdict(&op, DEFAULT_VERDICT_TOL * ctx.tol)?;
    let outcome = match v.nonneg {
        Some(true) => Outcome::Pass,
        Some(false) => Outcome::Fail,
        None => Outcome::Inconclusive,
    };
    let body = match a.output.format.unwrap_or(Format::Json) {
        Format::Json => to_json_string(&json!({
            "metric": spec,
            "lambda": a.lambda,
            "potential": value_name(&a.potential),
            "angular": a.angular,
            "verdict": v,
            "overall": outcome,
        })),
        Format::Csv => {
            let rows = v.l_grid.iter().zip(&v.lambda1).zip(&v.lambda1_free);
            csv(
                &["L", "lambda1", "lambda1_free"],
                rows.map(|((&l, &a), &b)| vec![Cell::Num(l), Cell::Num(a), Cell::Num(b)]),
            )
        }
    };
    emit(a.output.out.as_deref(), &body, ctx.tol)?;
    Ok(outcome.exit_code() as u8)
}

fn with_param(base: &CertArgs, param: SweepParam, v: f64) -> Result<CertArgs> {
    let mut args = base.clone();
    let integer = || -> Result<usize> {
        if v >= 0.0 && v.fract() == 0.0 {
            Ok(v as usize)
        } else {
            usage(format!("{param:?} takes integer values, got {v}"))
        }
    };
    match param {
        SweepParam::N => args.metric.n = Some(integer()?),
        SweepParam::K => args.metric.k = Some(integer()?),
        SweepParam::R => args.metric.r = Some(v),
        SweepParam::Rbar => args.metric.rbar = Some(v),
        SweepParam::Nu => args.nu = Some(v),
        SweepParam::Lambda => args.lambda = Some(v),
        SweepParam::Alpha => args.alpha = Some(v),
    }
    Ok(args)
}

fn value_name(v: &impl ValueEnum) -> String {
    v.to_possible_value().map(|p| p.get_name().to_string()).unwrap_or_default()
}

fn sweep(ctx: &Ctx, a: SweepArgs) -> Result<u8> {
    let values = parse_grid(&a.values, a.values_grid).map_err(|e| Usage(e.to_string()))?;
    let points = values.iter().map(|&v| with_param(&a.cert_args, a.param, v)).collect::<Result<Vec<_>>>()?;
    std::fs::create_dir_all(&a.out_dir).with_context(|| format!("cannot create {}", a.out_dir.display()))?;
    let cert_name = value_name(&a.cert);

    // Points fan out only when the thread cap is set explicitly.
    let results: Vec<Result<VerificationReport>> = if std::env::var_os("VGLAB_MAX_THREADS").is_some() {
        points.par_iter().map(|p| run_cert(ctx, a.cert, p)).collect()
    } else {
        points.iter().map(|p| run_cert(ctx, a.cert, p)).collect()
    };
    let mut entries = vec![];
    let mut outcomes = vec![];
    for (i, (value, result)) in values.iter().zip(results).enumerate() {
        let file = format!("{cert_name}-{i:03}.json");
        match result {
            Ok(rep) => {
                write_file(&a.out_dir.join(&file), &rep.to_json())?;
                outcomes.push(rep.overall);
                entries.push(json!({ "value": value, "file": file, "overall": rep.overall }));
            }
            Err(e) if crate::exit_status(&e) == 1 => {
                outcomes.push(Outcome::Fail);
                entries.push(json!({ "value": value, "error": format!("{e:#}"), "overall": Outcome::Fail }));
            }
            Err(e) => return Err(e.context(format!("at {:?} = {value}", a.param))),
        }
    }
    let overall = if outcomes.contains(&Outcome::Fail) {
        Outcome::Fail
    } else if outcomes.contains(&Outcome::Inconclusive) {
        Outcome::Inconclusive
    } else {
        Outcome::Pass
    };
    let param = value_name(&a.param);
    let index = to_json_string(&json!({ "cert": cert_name, "param": param, "points": entries, "overall": overall }));
    let index_path = a.out_dir.join("index.json");
    write_file(&index_path, &index)?;
    let meta = serde_json::to_string_pretty(&metadata(ctx.tol))? + "\n";
    write_file(&crate::output::sidecar_path(&index_path), &meta)?;
    Ok(overall.exit_code() as u8)
}
