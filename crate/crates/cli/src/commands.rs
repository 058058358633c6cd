use contracta::metric::AxiomReport;
use contracta::picard::{PicardTrace, PicardVerdict};
use contracta::sampling::check_metric_axioms;
use contracta::verifier::{
    classify, containment_demo, estimate_mk_modulus, picard_uniqueness_probe, verify_certificate, ClassificationReport,
    DemoTable, ModulusRow, ModulusVerdict, RowStatus, Uniqueness, UniquenessReport, VerificationOutcome,
};
use contracta::{library, picard_iterate, Certificate, Error, MetricSpace, Point, Sampler, SelfMap, StoppingRule};
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::{render, CliError, Outcome, Rendered, Table, EXIT_NEGATIVE, EXIT_OK};

fn num(x: f64) -> String {
    format!("{x}")
}

fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// The offending point when a map leaves its domain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelfMapWitness {
    pub input: Point,
    pub output: Point,
}

fn self_map_witness(e: Error) -> Result<SelfMapWitness, CliError> {
    match e {
        Error::SelfMapViolation { input, output } => Ok(SelfMapWitness { input, output }),
        e => Err(e.into()),
    }
}

fn self_map_outcome<R>(w: SelfMapWitness, result: R) -> Outcome<R> {
    let mut table = Table::new(&["status", "input", "output"]);
    table.push(["self_map_violation".to_string(), w.input.to_string(), w.output.to_string()]);
    Outcome {
        exit_code: EXIT_NEGATIVE,
        status: "self_map_violation".into(),
        result,
        table,
    }
}

#[derive(Debug, Serialize)]
pub struct MapInfo {
    pub name: String,
    pub exprs: Vec<String>,
    pub space: MetricSpace,
}

impl MapInfo {
    fn of(map: &SelfMap) -> Self {
        MapInfo {
            name: map.name().to_owned(),
            exprs: map.exprs().iter().map(ToString::to_string).collect(),
            space: map.space().clone(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct CertificateVerification {
    pub index: usize,
    pub kind: &'static str,
    pub name: Option<String>,
    pub certificate: String,
    pub outcome: VerificationOutcome,
}

#[derive(Debug, Serialize)]
pub struct VerifyResult {
    pub map: MapInfo,
    pub certificates: Vec<CertificateVerification>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub self_map_violation: Option<SelfMapWitness>,
}

fn verify(cfg: &ExperimentConfig) -> Result<Outcome<VerifyResult>, CliError> {
    let map = cfg.build_map()?;
    if cfg.certificates.is_empty() {
        return Err(CliError::config("verify needs at least one entry in `certificates`"));
    }
    let certs = cfg
        .certificates
        .iter()
        .map(|c| c.build())
        .collect::<Result<Vec<Certificate>, _>>()?;
    let vcfg = cfg.verification.build()?;
    let mut result = VerifyResult {
        map: MapInfo::of(&map),
        certificates: Vec::new(),
        self_map_violation: None,
    };
    let mut table = Table::new(&[
        "index",
        "kind",
        "certificate",
        "status",
        "pairs_checked",
        "worst_margin",
        "p",
        "q",
        "distance",
        "mapped_distance",
        "margin",
        "epsilon",
    ]);
    for (index, (spec, cert)) in cfg.certificates.iter().zip(&certs).enumerate() {
        let outcome = match verify_certificate(cert, &map, &vcfg) {
            Ok(o) => o,
            Err(e) => {
                result.self_map_violation = Some(self_map_witness(e)?);
                let w = result.self_map_violation.clone().expect("just set");
                return Ok(self_map_outcome(w, result));
            }
        };
        let mut row = vec![index.to_string(), cert.kind().to_string(), cert.label()];
        match &outcome {
            VerificationOutcome::NoViolationFound {
                pairs_checked,
                worst_margin,
                ..
            } => {
                row.extend(["no_violation_found".into(), pairs_checked.to_string(), opt_num(*worst_margin)]);
                row.extend(std::iter::repeat_n(String::new(), 6));
            }
            VerificationOutcome::Violation(w) => {
                let p = &w.pairs[0];
                row.extend(["violation".into(), String::new(), String::new()]);
                row.extend([
                    p.p.to_string(),
                    p.q.to_string(),
                    num(p.distance),
                    num(p.mapped_distance),
                    num(p.margin),
                    opt_num(p.epsilon),
                ]);
            }
        }
        table.push(row);
        result.certificates.push(CertificateVerification {
            index,
            kind: cert.kind(),
            name: spec.display_name().map(str::to_owned),
            certificate: cert.label(),
            outcome,
        });
    }
    let violated = result.certificates.iter().any(|c| c.outcome.is_violation());
    Ok(Outcome {
        exit_code: if violated { EXIT_NEGATIVE } else { EXIT_OK },
        status: if violated { "violation" } else { "no_violation_found" }.into(),
        result,
        table,
    })
}

#[derive(Debug, Serialize)]
#[serde(untagged)]
pub enum ClassifyResult {
    Report(Box<ClassificationReport>),
    SelfMap { map: MapInfo, self_map_violation: SelfMapWitness },
}

fn classify_cmd(cfg: &ExperimentConfig) -> Result<Outcome<ClassifyResult>, CliError> {
    let map = cfg.build_map()?;
    let vcfg = cfg.verification.build()?;
    let mut zetas = library::zeta_library();
    let mut triples = library::triple_library();
    for (i, spec) in cfg.certificates.iter().enumerate() {
        let name = spec.display_name().map_or_else(|| format!("config_{i}"), str::to_owned);
        match spec.build()? {
            Certificate::Zeta(z) => zetas.push(z),
            Certificate::WeaklyType(w) => triples.push((name, w)),
            _ => {}
        }
    }
    let report = match classify(&map, &zetas, &triples, &vcfg) {
        Ok(r) => r,
        Err(e) => {
            let w = self_map_witness(e)?;
            return Ok(self_map_outcome(
                w.clone(),
                ClassifyResult::SelfMap {
                    map: MapInfo::of(&map),
                    self_map_violation: w,
                },
            ));
        }
    };
    let mut table = Table::new(&["check", "name", "certificate", "verdict", "value"]);
    table.push([
        "lipschitz".into(),
        "lambda_hat".into(),
        String::new(),
        String::new(),
        num(report.lipschitz.lambda_hat),
    ]);
    let verdict = |o: &VerificationOutcome| if o.is_violation() { "violation" } else { "no_violation_found" };
    let worst = |o: &VerificationOutcome| match o {
        VerificationOutcome::NoViolationFound { worst_margin, .. } => opt_num(*worst_margin),
        VerificationOutcome::Violation(w) => num(w.pairs[0].margin),
    };
    for (check, rows) in [
        ("banach", report.banach.iter().collect::<Vec<_>>()),
        ("zeta", report.zeta.iter().collect()),
        ("weakly_type", report.weakly_type.iter().collect()),
    ] {
        for r in rows {
            table.push([
                check.into(),
                r.name.clone(),
                r.certificate.clone(),
                verdict(&r.outcome).into(),
                worst(&r.outcome),
            ]);
        }
    }
    for row in &report.modulus {
        let (eps, status, delta) = match row {
            ModulusRow::Estimated(e) => (e.epsilon, modulus_status(&e.verdict), e.is_positive().then_some(e.delta_hat)),
            ModulusRow::Infeasible { epsilon } => (*epsilon, "infeasible", None),
        };
        table.push(["meir_keeler".into(), num(eps), String::new(), status.into(), opt_num(delta)]);
    }
    let c = report.classes;
    for (name, v) in [
        ("banach", c.banach),
        ("z_contraction", c.z_contraction),
        ("weakly_type", c.weakly_type),
        ("meir_keeler", c.meir_keeler),
    ] {
        table.push(["class".into(), name.into(), String::new(), v.to_string(), String::new()]);
    }
    Ok(Outcome {
        exit_code: EXIT_OK,
        status: "classified".into(),
        result: ClassifyResult::Report(Box::new(report)),
        table,
    })
}

fn modulus_status(v: &ModulusVerdict) -> &'static str {
    match v {
        ModulusVerdict::Positive => "positive",
        ModulusVerdict::Failed(_) => "failed",
        ModulusVerdict::Inconclusive => "inconclusive",
    }
}

#[derive(Debug, Serialize)]
pub struct IterateResult {
    pub map: MapInfo,
    pub x0: Point,
    pub stopping_rule: StoppingRule,
    pub verdict: PicardVerdict,
    pub steps: usize,
    pub step_distances: Vec<f64>,
    /// The first and last iterates when the trace is longer than the cap.
    pub iterates: Vec<Point>,
    pub iterates_elided: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub uniqueness: Option<UniquenessReport>,
}

fn elide(trace: &PicardTrace, cap: usize) -> (Vec<Point>, usize) {
    let n = trace.iterates.len();
    if n <= cap {
        return (trace.iterates.clone(), 0);
    }
    let head = cap.div_ceil(2);
    let tail = cap - head;
    let mut kept = trace.iterates[..head].to_vec();
    kept.extend_from_slice(&trace.iterates[n - tail..]);
    (kept, n - cap)
}

fn iterate(cfg: &ExperimentConfig) -> Result<Outcome<IterateResult>, CliError> {
    let map = cfg.build_map()?;
    let x0 = cfg.picard.start()?;
    let stop = cfg.picard.stopping_rule(&map)?;
    let trace = picard_iterate(&map, &x0, &stop)?;
    let uniqueness = match cfg.picard.n_starts {
        Some(n) => Some(picard_uniqueness_probe(&map, n, cfg.verification.seed, &stop)?),
        None => None,
    };
    let mut table = Table::new(&["step", "step_distance"]);
    for (k, d) in trace.step_distances.iter().enumerate() {
        table.push([k.to_string(), num(*d)]);
    }
    let agree = uniqueness
        .as_ref()
        .is_none_or(|u| matches!(u.outcome, Uniqueness::Agree { .. }));
    let status = match &trace.verdict {
        PicardVerdict::Converged { .. } if agree => "converged",
        PicardVerdict::Converged { .. } => "uniqueness_disagreement",
        PicardVerdict::MaxIterExceeded => "max_iter_exceeded",
        PicardVerdict::Diverged { .. } => "diverged",
        PicardVerdict::SelfMapViolation { .. } => "self_map_violation",
    };
    let (iterates, iterates_elided) = elide(&trace, cfg.picard.max_reported_iterates);
    Ok(Outcome {
        exit_code: if status == "converged" { EXIT_OK } else { EXIT_NEGATIVE },
        status: status.into(),
        result: IterateResult {
            map: MapInfo::of(&map),
            x0,
            stopping_rule: stop,
            steps: trace.steps(),
            step_distances: trace.step_distances.clone(),
            verdict: trace.verdict,
            iterates,
            iterates_elided,
            uniqueness,
        },
        table,
    })
}

#[derive(Debug, Serialize)]
pub struct ModulusResult {
    pub map: MapInfo,
    pub estimates: Vec<ModulusRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub self_map_violation: Option<SelfMapWitness>,
}

fn estimate_modulus(cfg: &ExperimentConfig) -> Result<Outcome<ModulusResult>, CliError> {
    let map = cfg.build_map()?;
    let vcfg = cfg.verification.build()?;
    let mut result = ModulusResult {
        map: MapInfo::of(&map),
        estimates: Vec::new(),
        self_map_violation: None,
    };
    for &eps in &vcfg.epsilon_grid {
        match estimate_mk_modulus(&map, eps, &vcfg) {
            Ok(est) => result.estimates.push(ModulusRow::Estimated(est)),
            Err(Error::InfeasibleBand { .. }) => result.estimates.push(ModulusRow::Infeasible { epsilon: eps }),
            Err(e) => {
                let w = self_map_witness(e)?;
                result.self_map_violation = Some(w.clone());
                return Ok(self_map_outcome(w, result));
            }
        }
    }
    let feasible: Vec<_> = result
        .estimates
        .iter()
        .filter_map(|r| match r {
            ModulusRow::Estimated(e) => Some(e),
            ModulusRow::Infeasible { .. } => None,
        })
        .collect();
    if feasible.is_empty() {
        return Err(CliError::config(format!(
            "every epsilon in the grid exceeds the sampled diameter {} of the space",
            map.space().sampled_diameter()
        )));
    }
    let positive = feasible.iter().all(|e| e.is_positive());
    let mut table = Table::new(&["epsilon", "status", "delta_hat", "pairs_examined", "levels"]);
    for row in &result.estimates {
        match row {
            ModulusRow::Estimated(e) => table.push([
                num(e.epsilon),
                modulus_status(&e.verdict).into(),
                opt_num(e.is_positive().then_some(e.delta_hat)),
                e.pairs_examined.to_string(),
                e.levels.len().to_string(),
            ]),
            ModulusRow::Infeasible { epsilon } => {
                table.push([num(*epsilon), "infeasible".into(), String::new(), "0".into(), "0".into()])
            }
        }
    }
    Ok(Outcome {
        exit_code: if positive { EXIT_OK } else { EXIT_NEGATIVE },
        status: if positive { "positive" } else { "not_positive" }.into(),
        result,
        table,
    })
}

fn demo_containment(cfg: &ExperimentConfig) -> Result<Outcome<DemoTable>, CliError> {
    let instances = cfg.build_instances()?;
    let vcfg = cfg.verification.build()?;
    let demo = containment_demo(&instances, &vcfg)?;
    let mut table = Table::new(&[
        "instance",
        "certificate",
        "epsilon",
        "status",
        "delta_hat",
        "pairs_examined",
        "note",
    ]);
    for r in &demo.rows {
        let (status, note) = match &r.status {
            RowStatus::Positive => ("positive", ""),
            RowStatus::Failed => ("failed", ""),
            RowStatus::Inconclusive => ("inconclusive", ""),
            RowStatus::Infeasible => ("infeasible", ""),
            RowStatus::Skipped { reason } => ("skipped", reason.as_str()),
        };
        table.push([
            r.instance.clone(),
            r.certificate.clone(),
            opt_num(r.epsilon),
            status.into(),
            opt_num(r.delta_hat),
            r.pairs_examined.to_string(),
            note.into(),
        ]);
    }
    let ok = demo.all_verified_positive();
    Ok(Outcome {
        exit_code: if ok { EXIT_OK } else { EXIT_NEGATIVE },
        status: if ok { "all_verified_positive" } else { "not_all_positive" }.into(),
        result: demo,
        table,
    })
}

#[derive(Debug, Serialize)]
pub struct MetricCheckResult {
    pub space: MetricSpace,
    pub report: AxiomReport,
}

fn check_metric(cfg: &ExperimentConfig) -> Result<Outcome<MetricCheckResult>, CliError> {
    let space = cfg.build_space()?;
    let sampler = Sampler::uniform(cfg.verification.seed).fork("check-metric", &[]);
    let report = check_metric_axioms(&space, &sampler, cfg.metric_check.n_triples)?;
    let mut table = Table::new(&["axiom", "violations", "witness"]);
    for a in &report.axioms {
        let witness = a
            .witness
            .as_ref()
            .map(|[p, q, r]| format!("{p} {q} {r}"))
            .unwrap_or_default();
        let axiom = serde_json::to_value(a.axiom).expect("axiom serializes");
        table.push([
            axiom.as_str().unwrap_or_default().to_owned(),
            a.violations.to_string(),
            witness,
        ]);
    }
    let clean = report.total_violations() == 0;
    Ok(Outcome {
        exit_code: if clean { EXIT_OK } else { EXIT_NEGATIVE },
        status: if clean { "metric_axioms_hold" } else { "axiom_violation" }.into(),
        result: MetricCheckResult {
            space: (*space).clone(),
            report,
        },
        table,
    })
}

/// Run `command` against an already-resolved config.
/// Run the command called `name` (as spelled on the command line).
pub fn run(name: &str, cfg: &ExperimentConfig) -> Result<Rendered, CliError> {
    match name {
        "verify" => render(name, cfg, &verify(cfg)?),
        "classify" => render(name, cfg, &classify_cmd(cfg)?),
        "iterate" => render(name, cfg, &iterate(cfg)?),
        "estimate-modulus" => render(name, cfg, &estimate_modulus(cfg)?),
        "demo-containment" => render(name, cfg, &demo_containment(cfg)?),
        "check-metric" => render(name, cfg, &check_metric(cfg)?),
        other => Err(CliError::config(format!("unknown command `{other}`"))),
    }
}
