use std::collections::BTreeMap;
use std::path::Path;

use gkz_core::arith::{rational_string, require_prime};
use gkz_core::config::{enumerate_orthant, kernel_basis, relation_slab};
use gkz_core::congruence::scan_congruences;
use gkz_core::corpus::corpus_entry;
use gkz_core::geometry::{cone_check, duplicate_vector_check, ConeCertificate};
use gkz_core::integrality::{
    dwork_criterion_primes, exp_integrality, mirror_map_from, verify_orthant_congruences, IntegralityReport,
};
use gkz_core::solutions::{
    box_relations, build_gk, check_box, check_euler, check_euler_termwise, log_plus_gk, log_solution,
};
use gkz_core::{AConfiguration, ConfigFile, Error, GkSeries, Relation, Report, SearchLimits, Verdict};

use crate::{finish, Artifact, CliError, Command, OutputArgs, RunManifest, RunOutput, SourceArgs};

type CliResult<T> = std::result::Result<T, CliError>;

/// Reads and validates a configuration file, reporting JSON errors with line and column.
pub fn load_config(path: &Path) -> CliResult<AConfiguration> {
    let shown = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
        path: shown.clone(),
        message: e.to_string(),
    })?;
    let file: ConfigFile = serde_json::from_str(&text).map_err(|e| CliError::BadConfigFile {
        path: shown.clone(),
        position: Some((e.line(), e.column())),
        message: e.to_string(),
    })?;
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned());
    let named = file.name.is_some();
    let cfg = file.into_configuration().map_err(|e| CliError::BadConfigFile {
        path: shown.clone(),
        position: None,
        message: e.to_string(),
    })?;
    Ok(match (named, stem) {
        (false, Some(stem)) => cfg.with_name(stem),
        _ => cfg,
    })
}

struct Source {
    cfg: AConfiguration,
    label: String,
    limits: SearchLimits,
}

fn open(source: &SourceArgs) -> CliResult<Source> {
    let limits = SearchLimits {
        node_cap: source.node_cap,
    };
    match (&source.config, &source.corpus) {
        (Some(path), _) => Ok(Source {
            cfg: load_config(path)?,
            label: path.display().to_string(),
            limits,
        }),
        (None, Some(name)) => {
            let cfg = corpus_entry(name)
                .ok_or_else(|| CliError::Usage(format!("unknown corpus entry {name:?} (expected E1..E5)")))?;
            Ok(Source {
                cfg,
                label: format!("corpus:{}", name.to_ascii_uppercase()),
                limits,
            })
        }
        (None, None) => Err(CliError::Usage("one of --config or --corpus is required".into())),
    }
}

pub(crate) fn parse_primes(csv: &str) -> CliResult<Vec<u64>> {
    let mut out = Vec::new();
    for item in csv.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let p: u64 = item
            .parse()
            .map_err(|_| CliError::Usage(format!("--primes: {item:?} is not an integer")))?;
        require_prime(p)?;
        if !out.contains(&p) {
            out.push(p);
        }
    }
    if out.is_empty() {
        return Err(CliError::Usage("--primes: empty list".into()));
    }
    Ok(out)
}

fn parse_relation(cfg: &AConfiguration, csv: &str) -> CliResult<Relation> {
    let entries = csv
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<i64>()
                .map_err(|_| CliError::Usage(format!("--relation: {s:?} is not an integer")))
        })
        .collect::<CliResult<Vec<i64>>>()?;
    if entries.len() != cfg.len() {
        return Err(CliError::Usage(format!(
            "--relation: expected {} entries, found {}",
            cfg.len(),
            entries.len()
        )));
    }
    Ok(cfg.relation(entries)?)
}

fn indices(cfg: &AConfiguration, k: Option<usize>) -> CliResult<Vec<usize>> {
    match k {
        Some(k) => {
            cfg.check_index(k)?;
            Ok(vec![k])
        }
        None => Ok((1..=cfg.len()).collect()),
    }
}

fn csv<T: ToString>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

struct Run {
    manifest: RunManifest,
    artifacts: Vec<Artifact>,
    reports: Vec<Report>,
}

impl Run {
    fn new(command: &str, config: Option<String>) -> Self {
        Run {
            manifest: RunManifest {
                command: command.to_string(),
                config,
                params: BTreeMap::new(),
                version: env!("CARGO_PKG_VERSION").to_string(),
                timing_ms: None,
            },
            artifacts: Vec::new(),
            reports: Vec::new(),
        }
    }

    fn param(&mut self, key: &str, value: impl ToString) {
        self.manifest.params.insert(key.to_string(), value.to_string());
    }

    fn artifact(&mut self, a: Artifact) {
        self.artifacts.push(a);
    }

    fn report(&mut self, r: Report) {
        self.reports.push(r);
    }

    fn done(self) -> RunOutput {
        finish(self.manifest, self.artifacts, self.reports)
    }
}

fn skipped(check: &str, target: &str, reason: &Error) -> Report {
    Report::new(check, target, Verdict::Skipped).stat("reason", reason)
}

fn config_artifacts(run: &mut Run, cfg: &AConfiguration) {
    run.artifact(Artifact::new("configuration", cfg.to_string(), cfg.to_file()));
    let h: Vec<String> = cfg.unit_form().iter().map(rational_string).collect();
    run.artifact(Artifact::new("unit_form", format!("({})", h.join(",")), h));
}

fn validate_report(cfg: &AConfiguration) -> Report {
    let h: Vec<String> = cfg.unit_form().iter().map(rational_string).collect();
    let ok = cfg.vectors().iter().all(|a| {
        let dot = a
            .iter()
            .zip(cfg.unit_form())
            .fold(gkz_core::arith::int_rational(0), |acc, (&x, h)| acc + h * gkz_core::arith::int_rational(x));
        dot == gkz_core::arith::int_rational(1)
    });
    Report::new("validate", cfg.to_string(), Verdict::from_bool(ok))
        .stat("n", cfg.dim())
        .stat("N", cfg.len())
        .stat("unit_form", format!("({})", h.join(",")))
}

fn lattice_step(run: &mut Run, src: &Source, ks: &[usize], level: u32, slab: Option<u32>) -> CliResult<()> {
    let cfg = &src.cfg;
    let basis = kernel_basis(cfg)?;
    let mut report = Report::pass("lattice", cfg.to_string())
        .with_valid_level(level)
        .stat("rank", basis.len());
    let basis_ok = basis.iter().all(|l| cfg.is_relation(l.entries()));
    if !basis_ok {
        report.verdict = Verdict::Fail;
    }
    run.artifact(Artifact::new(
        "kernel_basis",
        format!("[{}]", csv(&basis)),
        &basis,
    ));
    for &k in ks {
        let set = enumerate_orthant(cfg, k, level, src.limits)?;
        let ok = set.complete && set.relations.iter().all(|l| cfg.is_relation(l.entries()));
        report.push(
            Report::new("orthant", format!("L_{k}"), Verdict::from_bool(ok))
                .with_valid_level(level)
                .stat("relations", set.relations.len())
                .stat("nodes", set.nodes),
        );
        run.artifact(Artifact::new(format!("L_{k}"), format!("[{}]", csv(&set.relations)), &set));
    }
    if let Some(b) = slab {
        let rels = relation_slab(cfg, b, src.limits)?;
        report = report.stat("slab_relations", rels.len());
        run.artifact(Artifact::new(format!("slab |l_j|<={b}"), format!("[{}]", csv(&rels)), &rels));
    }
    run.report(report);
    Ok(())
}

fn gk_artifact(gk: &GkSeries) -> Artifact {
    Artifact::new(format!("G_{}", gk.k), gk.series.to_string(), gk.series.to_json())
}

fn build_gks(src: &Source, level: u32) -> CliResult<Vec<GkSeries>> {
    Ok((1..=src.cfg.len())
        .map(|k| build_gk(&src.cfg, k, level, src.limits))
        .collect::<gkz_core::Result<Vec<_>>>()?)
}

fn cone_step(run: &mut Run, src: &Source, level: u32) -> CliResult<()> {
    run.report(duplicate_vector_check(&src.cfg));
    let (cert, report) = cone_check(&src.cfg, level, src.limits)?;
    let text = match &cert {
        ConeCertificate::Pointed(c) => {
            let w: Vec<String> = c.w.iter().map(rational_string).collect();
            format!("pointed, w = ({})", w.join(","))
        }
        ConeCertificate::NotPointed(w) => {
            let parts: Vec<String> = w.support().iter().map(|(g, c)| format!("{c}*{g}")).collect();
            format!("not pointed, {} = 0", parts.join(" + "))
        }
    };
    run.artifact(Artifact::new("cone_certificate", text, &cert));
    run.report(report);
    Ok(())
}

fn euler_step(run: &mut Run, src: &Source, gks: &[GkSeries], ks: &[usize], basis: &[Relation]) {
    for &k in ks {
        let gk = &gks[k - 1];
        run.report(check_euler_termwise(&src.cfg, &gk.series, &format!("G_{k}")));
    }
    for l in basis {
        let target = format!("log λ^{l} + Σ l_k G_k");
        match log_solution(&src.cfg, l, gks) {
            Ok(f) => run.report(check_euler(&src.cfg, &f, &target)),
            Err(e) => run.report(skipped("euler", &target, &e)),
        }
    }
}

fn box_step(run: &mut Run, src: &Source, gks: &[GkSeries], ks: &[usize], basis: &[Relation], rels: &[Relation]) {
    for &k in ks {
        let f = log_plus_gk(&gks[k - 1]);
        run.report(check_box(&src.cfg, &f, rels, &format!("log λ_{k} + G_{k}")));
    }
    for l in basis {
        let target = format!("log λ^{l} + Σ l_k G_k");
        match log_solution(&src.cfg, l, gks) {
            Ok(f) => run.report(check_box(&src.cfg, &f, rels, &target)),
            Err(e) => run.report(skipped("box", &target, &e)),
        }
    }
}

fn dwork_step(run: &mut Run, src: &Source, gks: &[GkSeries], ks: &[usize], primes: &[u64], level: u32) -> CliResult<()> {
    for &k in ks {
        let series = dwork_criterion_primes(&gks[k - 1], primes, level)?;
        let terms = verify_orthant_congruences(&src.cfg, k, level, primes, src.limits)?;
        let agree = series.verdict == terms.verdict;
        run.report(series.to_report("dwork"));
        run.report(
            Report::new("route-agreement", format!("G_{k}"), Verdict::from_bool(agree))
                .stat("series_route", series.verdict)
                .stat("congruence_route", terms.verdict),
        );
    }
    Ok(())
}

fn congruence_step(run: &mut Run, src: &Source, ks: &[usize], primes: &[u64], level: u32) -> CliResult<()> {
    for &k in ks {
        run.report(verify_orthant_congruences(&src.cfg, k, level, primes, src.limits)?);
    }
    Ok(())
}

fn exp_step(run: &mut Run, gks: &[GkSeries], ks: &[usize], level: u32) -> CliResult<()> {
    for &k in ks {
        let (e, report): (_, IntegralityReport) = exp_integrality(&gks[k - 1], level)?;
        run.artifact(Artifact::new(format!("exp G_{k}"), e.to_string(), e.to_json()));
        run.report(report.to_report("exp-integrality"));
    }
    Ok(())
}

fn mirror_one(run: &mut Run, src: &Source, gks: &[GkSeries], l: &Relation, skip_not_pointed: bool) -> CliResult<()> {
    match mirror_map_from(&src.cfg, l, gks) {
        Ok(mm) => {
            run.artifact(Artifact::new(
                format!("q/λ^{l}"),
                mm.series.to_string(),
                mm.series.to_json(),
            ));
            let r = mm
                .report
                .to_report("mirror")
                .stat("forms_agree", mm.forms_agree())
                .stat("terms", mm.series.len());
            run.report(r);
            Ok(())
        }
        Err(e @ Error::NotPointed { .. }) if skip_not_pointed => {
            run.report(skipped("mirror", &format!("q/λ^{l}"), &e));
            Ok(())
        }
        Err(e) => Err(e.into()),
    }
}

/// Runs `command`; returns the output options alongside the result so that
/// errors can still be reported in the requested form.
pub(crate) fn execute(command: Command) -> (OutputArgs, CliResult<RunOutput>) {
    match command {
        Command::Validate { source, out } => (out, validate(&source)),
        Command::Lattice {
            source,
            out,
            k,
            max_level,
            coord_bound,
        } => (out, lattice(&source, k, max_level, coord_bound)),
        Command::Gk {
            source,
            out,
            k,
            max_level,
        } => (out, gk(&source, k, max_level)),
        Command::ExpCheck {
            source,
            out,
            k,
            max_level,
        } => (out, exp_check(&source, k, max_level)),
        Command::DworkCheck {
            source,
            out,
            k,
            primes,
            max_level,
        } => (out, dwork_check(&source, k, &primes, max_level)),
        Command::OperatorsCheck {
            source,
            out,
            k,
            max_level,
            coord_bound,
        } => (out, operators_check(&source, k, max_level, coord_bound)),
        Command::Mirror {
            source,
            out,
            relation,
            max_level,
        } => (out, mirror(&source, relation.as_deref(), max_level)),
        Command::CongruenceScan { out, nmax, emax, primes } => (out, congruence(nmax, emax, &primes)),
        Command::ConeCheck { source, out, max_level } => (out, cone(&source, max_level)),
        Command::ReportAll {
            source,
            out,
            max_level,
            primes,
            coord_bound,
        } => (out, report_all(&source, max_level, &primes, coord_bound)),
    }
}

fn validate(source: &SourceArgs) -> CliResult<RunOutput> {
    let src = open(source)?;
    let mut run = Run::new("validate", Some(src.label.clone()));
    config_artifacts(&mut run, &src.cfg);
    run.report(validate_report(&src.cfg));
    Ok(run.done())
}

fn lattice(source: &SourceArgs, k: Option<usize>, level: u32, slab: Option<u32>) -> CliResult<RunOutput> {
    let src = open(source)?;
    let ks = indices(&src.cfg, k)?;
    let mut run = Run::new("lattice", Some(src.label.clone()));
    run.param("max_level", level);
    run.param("k", csv(&ks));
    if let Some(b) = slab {
        run.param("coord_bound", b);
    }
    lattice_step(&mut run, &src, &ks, level, slab)?;
    Ok(run.done())
}

fn gk(source: &SourceArgs, k: Option<usize>, level: u32) -> CliResult<RunOutput> {
    let src = open(source)?;
    let ks = indices(&src.cfg, k)?;
    let mut run = Run::new("gk", Some(src.label.clone()));
    run.param("max_level", level);
    run.param("k", csv(&ks));
    for &k in &ks {
        let g = build_gk(&src.cfg, k, level, src.limits)?;
        run.artifact(gk_artifact(&g));
        run.report(
            Report::pass("gk", format!("G_{k}"))
                .with_valid_level(level)
                .stat("terms", g.series.len()),
        );
    }
    Ok(run.done())
}

fn exp_check(source: &SourceArgs, k: Option<usize>, level: u32) -> CliResult<RunOutput> {
    let src = open(source)?;
    let ks = indices(&src.cfg, k)?;
    let mut run = Run::new("exp-check", Some(src.label.clone()));
    run.param("max_level", level);
    run.param("k", csv(&ks));
    for &k in &ks {
        let g = build_gk(&src.cfg, k, level, src.limits)?;
        let (e, report) = exp_integrality(&g, level)?;
        run.artifact(Artifact::new(format!("exp G_{k}"), e.to_string(), e.to_json()));
        run.report(report.to_report("exp-integrality"));
    }
    Ok(run.done())
}

fn dwork_check(source: &SourceArgs, k: Option<usize>, primes: &str, level: u32) -> CliResult<RunOutput> {
    let src = open(source)?;
    let ks = indices(&src.cfg, k)?;
    let primes = parse_primes(primes)?;
    let mut run = Run::new("dwork-check", Some(src.label.clone()));
    run.param("max_level", level);
    run.param("k", csv(&ks));
    run.param("primes", csv(&primes));
    let gks = build_gks(&src, level)?;
    dwork_step(&mut run, &src, &gks, &ks, &primes, level)?;
    Ok(run.done())
}

fn operators_check(source: &SourceArgs, k: Option<usize>, level: u32, coord_bound: u32) -> CliResult<RunOutput> {
    let src = open(source)?;
    let ks = indices(&src.cfg, k)?;
    let mut run = Run::new("operators-check", Some(src.label.clone()));
    run.param("max_level", level);
    run.param("k", csv(&ks));
    run.param("coord_bound", coord_bound);
    let gks = build_gks(&src, level)?;
    let basis = kernel_basis(&src.cfg)?;
    let rels = box_relations(&src.cfg, coord_bound, src.limits)?;
    euler_step(&mut run, &src, &gks, &ks, &basis);
    box_step(&mut run, &src, &gks, &ks, &basis, &rels);
    Ok(run.done())
}

fn mirror(source: &SourceArgs, relation: Option<&str>, level: u32) -> CliResult<RunOutput> {
    let src = open(source)?;
    let rels = match relation {
        Some(s) => vec![parse_relation(&src.cfg, s)?],
        None => kernel_basis(&src.cfg)?,
    };
    let mut run = Run::new("mirror", Some(src.label.clone()));
    run.param("max_level", level);
    run.param("relation", rels.iter().map(|l| format!("{l}")).collect::<Vec<_>>().join(" "));
    let gks = build_gks(&src, level)?;
    for l in &rels {
        mirror_one(&mut run, &src, &gks, l, false)?;
    }
    Ok(run.done())
}

fn congruence(nmax: usize, emax: u64, primes: &str) -> CliResult<RunOutput> {
    let primes = parse_primes(primes)?;
    let mut run = Run::new("congruence-scan", None);
    run.param("nmax", nmax);
    run.param("emax", emax);
    run.param("primes", csv(&primes));
    run.report(scan_congruences(nmax, emax, &primes)?);
    Ok(run.done())
}

fn cone(source: &SourceArgs, level: u32) -> CliResult<RunOutput> {
    let src = open(source)?;
    let mut run = Run::new("cone-check", Some(src.label.clone()));
    run.param("max_level", level);
    cone_step(&mut run, &src, level)?;
    Ok(run.done())
}

fn report_all(source: &SourceArgs, level: u32, primes: &str, coord_bound: u32) -> CliResult<RunOutput> {
    let src = open(source)?;
    let primes = parse_primes(primes)?;
    let ks: Vec<usize> = (1..=src.cfg.len()).collect();
    let mut run = Run::new("report-all", Some(src.label.clone()));
    run.param("max_level", level);
    run.param("primes", csv(&primes));
    run.param("coord_bound", coord_bound);

    config_artifacts(&mut run, &src.cfg);
    run.report(validate_report(&src.cfg));
    lattice_step(&mut run, &src, &ks, level, None)?;
    cone_step(&mut run, &src, level)?;

    let gks = build_gks(&src, level)?;
    for g in &gks {
        run.artifact(gk_artifact(g));
        run.report(
            Report::pass("gk", format!("G_{}", g.k))
                .with_valid_level(level)
                .stat("terms", g.series.len()),
        );
    }
    let basis = kernel_basis(&src.cfg)?;
    let rels = box_relations(&src.cfg, coord_bound, src.limits)?;
    euler_step(&mut run, &src, &gks, &ks, &basis);
    box_step(&mut run, &src, &gks, &ks, &basis, &rels);
    congruence_step(&mut run, &src, &ks, &primes, level)?;
    dwork_step(&mut run, &src, &gks, &ks, &primes, level)?;
    exp_step(&mut run, &gks, &ks, level)?;
    for l in &basis {
        mirror_one(&mut run, &src, &gks, l, true)?;
    }
    Ok(run.done())
}
