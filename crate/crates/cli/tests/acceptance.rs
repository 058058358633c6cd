//! Acceptance suite: one PASS/FAIL line per criterion.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use contracta::certificates::{
    banach_as_z, banach_holds, banach_mk_modulus, mk_condition_holds, z_contraction_holds, DeltaFn,
};
use contracta::library::{
    builtin_map, identity_weakly_type_instance, identity_z_instance, triple_library, weakly_type_instances,
    z_instances, zeta_library, Instance, BUILTIN_MAPS,
};
use contracta::metric::{check_axioms_on, Axiom};
use contracta::picard::banach_a_priori_bound;
use contracta::sampling::{check_metric_axioms, check_metric_axioms_with};
use contracta::verifier::{
    containment_demo, estimate_mk_modulus, picard_uniqueness_from, picard_uniqueness_probe, verify_certificate,
    DemoTable, ModulusVerdict, RowStatus, Uniqueness, VerificationOutcome,
};
use contracta::{
    picard_iterate, BanachCertificate, Certificate, Expr, Interval, MeirKeelerModulus, MetricKind, MetricSpace,
    Point, Sampler, SelfMap, StoppingRule, VerificationConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Debug>(e: E) -> String {
    format!("{e:?}")
}

fn interval(lo: f64, hi: f64) -> Arc<MetricSpace> {
    Arc::new(MetricSpace::interval(lo, hi).unwrap())
}

fn map(lo: f64, hi: f64, src: &str) -> SelfMap {
    SelfMap::parse(src, interval(lo, hi), &[src]).unwrap()
}

// ---- independent extended-precision oracle for the cos fixed point ----

#[derive(Clone, Copy)]
struct Dd(f64, f64);

fn two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    let bb = s - a;
    Dd(s, (a - (s - bb)) + (b - bb))
}

fn dd_add(x: Dd, y: Dd) -> Dd {
    let s = two_sum(x.0, y.0);
    let r = two_sum(s.0, s.1 + x.1 + y.1);
    two_sum(r.0, r.1)
}

fn dd_mul(x: Dd, y: Dd) -> Dd {
    let p = x.0 * y.0;
    two_sum(p, x.0.mul_add(y.0, -p) + x.0 * y.1 + x.1 * y.0)
}

fn dd_div(x: Dd, d: f64) -> Dd {
    let q = x.0 / d;
    let r = dd_add(x, dd_mul(Dd(q, 0.0), Dd(-d, 0.0)));
    two_sum(q, r.0 / d)
}

fn dd_cos(x: Dd) -> Dd {
    let x2 = dd_mul(x, x);
    let (mut term, mut sum) = (Dd(1.0, 0.0), Dd(1.0, 0.0));
    for k in 1..30 {
        term = dd_div(dd_mul(term, x2), ((2 * k - 1) * (2 * k)) as f64);
        term = Dd(-term.0, -term.1);
        sum = dd_add(sum, term);
    }
    sum
}

fn cos_fixed_point_oracle() -> f64 {
    let mut x = Dd(0.0, 0.0);
    for _ in 0..10_000 {
        x = dd_cos(x);
    }
    x.0 + x.1
}

// ---- criteria ----

fn c1_metric_axioms() -> Outcome {
    let started = Instant::now();
    let mut spaces: Vec<MetricSpace> = Vec::new();
    for kind in [
        MetricKind::Euclidean,
        MetricKind::Chebyshev,
        MetricKind::Manhattan,
        MetricKind::Discrete,
    ] {
        for dim in 1..=3 {
            spaces.push(MetricSpace::boxed(format!("{kind:?}^{dim}"), vec![Interval::new(-10.0, 10.0); dim], kind).unwrap());
        }
    }
    for inst in z_instances().into_iter().chain(weakly_type_instances()) {
        spaces.push(inst.map.space().clone());
    }
    for (i, space) in spaces.iter().enumerate() {
        let r = check_metric_axioms(space, &Sampler::uniform(i as u64), 10_000).map_err(err)?;
        ensure(r.triples_checked == 10_000 && r.total_violations() == 0, || {
            format!("{}: {:?}", space.name(), r)
        })?;
    }
    let line = MetricSpace::interval(0.0, 2.0).unwrap();
    let fake = |p: &Point, q: &Point| (p.coords()[0] - q.coords()[0]).powi(2);
    let triple = [Point::from(0.0), Point::from(1.0), Point::from(2.0)];
    let direct = check_axioms_on(&fake, [triple.clone()]);
    let tri = direct.violations(Axiom::Triangle);
    ensure(tri.violations == 1 && tri.witness.as_ref() == Some(&triple), || format!("{direct:?}"))?;
    let sampled = check_metric_axioms_with(&fake, &line, &Sampler::uniform(0), 10_000).map_err(err)?;
    let w = sampled.violations(Axiom::Triangle);
    let [p, q, r] = w.witness.clone().ok_or("fake metric not flagged on samples")?;
    let (pq, qr, pr) = (fake(&p, &q), fake(&q, &r), fake(&p, &r));
    ensure(pr > pq + qr || pq > pr + qr || qr > pq + pr, || "witness does not replay".into())?;
    let elapsed = started.elapsed();
    ensure(elapsed < Duration::from_secs(5), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "{} spaces x 10^4 triples clean; (p-q)^2 flagged on {} sampled triples; {:.2?}",
        spaces.len(),
        w.violations,
        elapsed
    ))
}

fn c2_banach_z_equivalence() -> Outcome {
    let mut compared = 0u64;
    let mut violated = 0u64;
    for lambda in [0.0, 0.25, 0.5, 0.9] {
        let cert = BanachCertificate::new(lambda).unwrap();
        let z = banach_as_z(&cert);
        for (k, src) in ["x1/2", "cos(x1)", "x1", "0.9*x1", "x1^2", "0"].iter().enumerate() {
            let m = map(0.0, 1.0, src);
            let s = Sampler::uniform(k as u64);
            for i in 0..10_000 {
                let (p, q) = s.pair(m.space(), i);
                let b = banach_holds(&cert, &m, &p, &q, 0.0).map_err(err)?;
                let zv = z_contraction_holds(&z, &m, &p, &q, 0.0).map_err(err)?;
                let same = b.is_violated() == zv.is_violated()
                    && b.margin().map(f64::to_bits) == zv.margin().map(f64::to_bits);
                ensure(same, || format!("lambda {lambda}, {src}, pair {i}: {b:?} vs {zv:?}"))?;
                compared += 1;
                violated += u64::from(b.is_violated());
            }
        }
    }
    Ok(format!("{compared} pairs, identical verdicts and margins ({violated} violations on both sides)"))
}

fn c3_banach_embeds_in_mk() -> Outcome {
    let mut checked = 0;
    for k in 1..=9 {
        let lambda = f64::from(k) / 10.0;
        let cert = BanachCertificate::new(lambda).unwrap();
        let modulus = banach_mk_modulus(&cert, 10.0).map_err(err)?;
        let m = SelfMap::parse("linear", interval(0.0, 10.0), &[format!("{lambda}*x1")]).unwrap();
        let cfg = VerificationConfig {
            n_pairs: 100_000,
            seed: k as u64,
            ..Default::default()
        };
        let mk = Certificate::MeirKeeler(modulus.clone());
        match verify_certificate(&mk, &m, &cfg).map_err(err)? {
            VerificationOutcome::NoViolationFound {
                pairs_checked,
                skipped_epsilons,
                ..
            } => {
                ensure(pairs_checked == 100_000 && skipped_epsilons.is_empty(), || {
                    format!("lambda {lambda}: only {pairs_checked} pairs, skipped {skipped_epsilons:?}")
                })?;
                checked += pairs_checked;
            }
            VerificationOutcome::Violation(w) => return Err(format!("lambda {lambda}: {w:?}")),
        }
        // the public predicate agrees on a replay of the first band
        let s = Sampler::uniform(99).fork("c3", &[k as u64]);
        let delta = modulus.delta(1.0).map_err(err)?;
        let sample = contracta::sampling::sample_pair_in_annulus(m.space(), &s, None, 1.0, delta, 100).map_err(err)?;
        for (p, q) in &sample.pairs {
            let v = mk_condition_holds(&modulus, &m, 1.0, p, q, 0.0).map_err(err)?;
            ensure(!v.is_violated(), || format!("lambda {lambda}: {p} {q}"))?;
        }
    }
    Ok(format!("0 violations on {checked} annulus pairs over lambda 0.1..0.9"))
}

fn assert_demo_positive(table: &DemoTable) -> Result<(usize, usize), String> {
    let mut positive = 0;
    let mut infeasible = 0;
    for row in &table.rows {
        match row.status {
            RowStatus::Positive => positive += 1,
            RowStatus::Infeasible => infeasible += 1,
            _ => return Err(format!("{row:?}")),
        }
    }
    Ok((positive, infeasible))
}

fn c4_z_containment() -> Outcome {
    let cfg = VerificationConfig::default();
    let table = containment_demo(&z_instances(), &cfg).map_err(err)?;
    let (positive, infeasible) = assert_demo_positive(&table)?;
    let mut third = 0;
    for row in table.rows.iter().filter(|r| r.instance == "third/half") {
        let (eps, delta) = (row.epsilon.unwrap(), row.delta_hat.unwrap());
        ensure(delta >= 0.9 * 2.0 * eps, || format!("x/3 at eps {eps}: delta_hat {delta}"))?;
        third += 1;
    }
    ensure(third == cfg.epsilon_grid.len(), || "x/3 rows missing".into())?;
    Ok(format!(
        "{positive} positive rows, {infeasible} infeasible excluded; x/3 delta_hat >= 1.8 eps on all {third} eps"
    ))
}

fn c5_weakly_type_containment() -> Outcome {
    let cfg = VerificationConfig::default();
    let mut instances = weakly_type_instances();
    instances.push(identity_weakly_type_instance());
    instances.push(identity_z_instance());
    let table = containment_demo(&instances, &cfg).map_err(err)?;
    let (identity, rest): (Vec<_>, Vec<_>) = table.rows.iter().partition(|r| r.instance.starts_with("identity/"));
    ensure(identity.len() == 2, || format!("{identity:?}"))?;
    for r in &identity {
        ensure(matches!(r.status, RowStatus::Skipped { .. }) && r.delta_hat.is_none(), || format!("{r:?}"))?;
    }
    let (positive, infeasible) = assert_demo_positive(&DemoTable {
        rows: rest.into_iter().cloned().collect(),
    })?;
    Ok(format!("{positive} positive rows, {infeasible} infeasible excluded; identity skipped"))
}

fn c6_falsifier() -> Outcome {
    let m = map(0.0, 2.0, "x1");
    let cfg = VerificationConfig::default();
    let est = estimate_mk_modulus(&m, 1.0, &cfg).map_err(err)?;
    let ModulusVerdict::Failed(w) = &est.verdict else {
        return Err(format!("verdict {:?}", est.verdict));
    };
    ensure(est.pairs_examined <= 100_000, || format!("{} samples", est.pairs_examined))?;
    ensure(w.pairs.len() == cfg.shrink_levels as usize, || format!("{} witness pairs", w.pairs.len()))?;
    let width = cfg.width_factor;
    for (k, pair) in w.pairs.iter().enumerate() {
        let delta = width / 2f64.powi(k as i32);
        let d = m.space().distance(&pair.p, &pair.q).map_err(err)?;
        let tp = m.apply(&pair.p).map_err(err)?;
        let tq = m.apply(&pair.q).map_err(err)?;
        let dt = m.space().distance(&tp, &tq).map_err(err)?;
        ensure((1.0..1.0 + delta).contains(&d) && dt >= 1.0 && dt == d, || {
            format!("level {k}: d {d}, dT {dt}, delta {delta}")
        })?;
    }
    let band = Certificate::MeirKeeler(MeirKeelerModulus::parse(&format!("{width}")).unwrap());
    ensure(w.replay(&band, &m, 0.0).map_err(err)?, || "witness does not replay".into())?;
    Ok(format!(
        "failed with {} replayable pairs, one per level, {} samples examined",
        w.pairs.len(),
        est.pairs_examined
    ))
}

fn c7_picard_cos() -> Outcome {
    let oracle = cos_fixed_point_oracle();
    let started = Instant::now();
    let m = map(0.0, 1.0, "cos(x1)");
    let stop = StoppingRule::new(1e-10, 100_000, 1e6).unwrap();
    let trace = picard_iterate(&m, &Point::from(0.0), &stop).map_err(err)?;
    let elapsed = started.elapsed();
    let u = trace.fixed_point().ok_or_else(|| format!("{:?}", trace.verdict))?.coords()[0];
    ensure((u - oracle).abs() <= 1e-9, || format!("u {u}, oracle {oracle}"))?;
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "u = {u:.12} after {} steps, |u - oracle| = {:.1e}, {elapsed:.2?}",
        trace.steps(),
        (u - oracle).abs()
    ))
}

fn c8_a_priori_bound() -> Outcome {
    let m = map(-5.0, 5.0, "x1/2");
    let stop = StoppingRule::new(1e-9, 100_000, 1e6).unwrap();
    let s = Sampler::uniform(8);
    let mut starts: Vec<Point> = (0..64).map(|i| s.point(m.space(), i)).collect();
    starts.extend([-5.0, 0.0, 5.0].map(Point::from));
    let mut checks = 0;
    for x0 in &starts {
        let trace = picard_iterate(&m, x0, &stop).map_err(err)?;
        let u = trace.fixed_point().ok_or_else(|| format!("{x0}: {:?}", trace.verdict))?;
        for (n, x) in trace.iterates.iter().enumerate() {
            let bound = banach_a_priori_bound(0.5, trace.step_distances[0], n as u32).map_err(err)?;
            let d = m.space().distance(x, u).map_err(err)?;
            ensure(d <= bound + stop.tol, || format!("x0 {x0}, n {n}: {d} > {bound}"))?;
            checks += 1;
        }
    }
    Ok(format!("{} traces, {checks} iterates within the bound", starts.len()))
}

fn c9_monotone_steps() -> Outcome {
    let cfg = VerificationConfig {
        n_pairs: 20_000,
        ..Default::default()
    };
    let instances: Vec<Instance> = z_instances().into_iter().chain(weakly_type_instances()).collect();
    let table = containment_demo(&instances, &cfg).map_err(err)?;
    let mut traces = 0;
    let mut covered = 0;
    for inst in &instances {
        let rows: Vec<_> = table.rows.iter().filter(|r| r.instance == inst.name).collect();
        let positive = rows.iter().any(|r| r.status == RowStatus::Positive)
            && rows.iter().all(|r| matches!(r.status, RowStatus::Positive | RowStatus::Infeasible));
        if !positive {
            continue;
        }
        covered += 1;
        let stop = StoppingRule::for_map(&inst.map, 1e-9, 100_000).map_err(err)?;
        let s = Sampler::uniform(9).fork(&inst.name, &[]);
        for i in 0..16 {
            let x0 = s.point(inst.map.space(), i);
            let trace = picard_iterate(&inst.map, &x0, &stop).map_err(err)?;
            for (k, w) in trace.step_distances.windows(2).enumerate() {
                if w[0] < stop.tol {
                    break;
                }
                ensure(w[1] < w[0], || format!("{}: x0 {x0}, step {k}: {} then {}", inst.name, w[0], w[1]))?;
            }
            traces += 1;
        }
    }
    ensure(covered == instances.len(), || format!("only {covered} instances had positive moduli"))?;
    Ok(format!("{traces} traces over {covered} instances strictly decreasing above tol"))
}

fn c10_uniqueness() -> Outcome {
    let oracle = cos_fixed_point_oracle();
    let stop = StoppingRule::new(1e-10, 100_000, 1e6).unwrap();
    let r = picard_uniqueness_probe(&map(0.0, 1.0, "cos(x1)"), 8, 0, &stop).map_err(err)?;
    let Uniqueness::Agree { fixed_point, max_spread } = &r.outcome else {
        return Err(format!("cos: {:?}", r.outcome));
    };
    ensure(*max_spread <= 1e-8 && (fixed_point.coords()[0] - oracle).abs() <= 1e-8, || {
        format!("spread {max_spread}, u {fixed_point}")
    })?;
    let sq = map(0.0, 1.0, "x1^2");
    let r2 = picard_uniqueness_from(&sq, &[Point::from(0.2), Point::from(1.0)], &stop).map_err(err)?;
    ensure(matches!(r2.outcome, Uniqueness::Disagree { .. }), || format!("{:?}", r2.outcome))?;
    let limits: Vec<f64> = r2.limits.iter().map(|l| l.as_ref().map_or(f64::NAN, |p| p.coords()[0])).collect();
    ensure(limits[0].abs() <= 1e-9 && limits[1] == 1.0, || format!("limits {limits:?}"))?;
    Ok(format!(
        "cos: 8 starts agree, spread {max_spread:.1e}; x^2: disagree with limits {{{:.1e}, {}}}",
        limits[0], limits[1]
    ))
}

fn run_classify(config: &PathBuf, out: &PathBuf, threads: Option<&str>) -> Result<Vec<u8>, String> {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_contracta"));
    cmd.args(["classify", "--config"]).arg(config).arg("--out").arg(out);
    cmd.env_remove("CONTRACTA_SEED").env_remove("CONTRACTA_OUT");
    if let Some(t) = threads {
        cmd.env("RAYON_NUM_THREADS", t);
    }
    let status = cmd.status().map_err(err)?;
    ensure(status.code() == Some(0), || format!("classify exited {status:?}"))?;
    std::fs::read(out).map_err(err)
}

fn c11_determinism() -> Outcome {
    let dir = std::env::temp_dir().join(format!("contracta-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(err)?;
    let config = dir.join("classify.json");
    std::fs::write(
        &config,
        r#"{
  "schema_version": 1,
  "space": {"name": "unit", "bounds": [[0, 1]]},
  "map": {"builtin": "cos"},
  "verification": {"seed": 11, "n_pairs": 20000}
}"#,
    )
    .map_err(err)?;
    let a = run_classify(&config, &dir.join("a.json"), None)?;
    let b = run_classify(&config, &dir.join("b.json"), None)?;
    let one = run_classify(&config, &dir.join("t1.json"), Some("1"))?;
    let many = run_classify(&config, &dir.join("t4.json"), Some("4"))?;
    ensure(a == b, || "two runs differ".into())?;
    ensure(one == many && one == a, || "1 vs 4 threads differ".into())?;

    // in-process, with explicit pools
    let m = map(0.0, 1.0, "cos(x1)");
    let vcfg = VerificationConfig {
        n_pairs: 20_000,
        seed: 11,
        ..Default::default()
    };
    let classify = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| contracta::verifier::classify(&m, &zeta_library(), &triple_library(), &vcfg).unwrap())
    };
    ensure(classify(1) == classify(4), || "in-process 1 vs 4 threads differ".into())?;
    let _ = std::fs::remove_dir_all(&dir);
    Ok(format!("{} byte payloads identical across reruns and 1 vs 4 threads", a.len()))
}

const FUZZ_TOKENS: &[&str] = &[
    "x1", "t", "s", "eps", "pi", "e", "1", "0.5", "2e3", "1e-7", "1e400", ".", "+", "-", "*", "/", "^", "(", ")",
    ",", " ", "sin", "cos", "exp", "ln", "sqrt", "abs", "min", "max", "zz", "#", "é", "\n",
];

fn fuzz_source(rng: &mut ChaCha8Rng) -> String {
    // log-uniform length from 1 byte to 64 KiB
    let target = 2f64.powf(rng.random_range(0.0..16.0)) as usize;
    let mut s = String::with_capacity(target + 8);
    let nest = rng.random_bool(0.1);
    while s.len() < target {
        if nest && rng.random_bool(0.5) {
            s.push('(');
            continue;
        }
        if rng.random_bool(0.05) {
            s.push(char::from(rng.random_range(0x20u8..0x7f)));
        } else {
            s.push_str(FUZZ_TOKENS[rng.random_range(0..FUZZ_TOKENS.len())]);
        }
    }
    s.truncate(s.floor_char_boundary(65_536));
    s
}

fn c12_parser() -> Outcome {
    let sig = ["x1", "t", "s", "eps"];
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut parsed = 0;
    let mut longest = 0;
    for i in 0..10_000 {
        let src = fuzz_source(&mut rng);
        longest = longest.max(src.len());
        let outcome = catch_unwind(AssertUnwindSafe(|| match Expr::parse(&src, &sig) {
            Ok(e) => {
                let _ = e.eval(&[0.5, 1.0, 2.0, 0.25]);
                Ok(true)
            }
            Err(e) if e.position <= src.len() => Ok(false),
            Err(e) => Err(format!("position {} beyond input of {}", e.position, src.len())),
        }));
        match outcome {
            Ok(Ok(ok)) => parsed += usize::from(ok),
            Ok(Err(msg)) => return Err(format!("input {i}: {msg}")),
            Err(_) => return Err(format!("input {i} panicked")),
        }
    }

    let mut exprs: Vec<Expr> = Vec::new();
    for z in zeta_library() {
        exprs.push(z.expr().clone());
    }
    for (_, w) in triple_library() {
        exprs.extend([w.psi.clone(), w.alpha.clone(), w.beta.clone()]);
    }
    for lambda in [0.0, 0.25, 0.5, 0.9] {
        exprs.push(banach_as_z(&BanachCertificate::new(lambda).unwrap()).expr().clone());
        if let DeltaFn::Expr(e) = banach_mk_modulus(&BanachCertificate::new(lambda).unwrap(), 10.0)
            .unwrap()
            .delta_fn()
        {
            exprs.push(e.clone());
        }
    }
    let plane = Arc::new(MetricSpace::boxed("sq", vec![Interval::new(-1.0, 1.0); 2], MetricKind::Euclidean).unwrap());
    for name in BUILTIN_MAPS {
        let space = if *name == "rotate_half" { plane.clone() } else { interval(0.0, 1.0) };
        exprs.extend(builtin_map(name, space).unwrap().exprs().iter().cloned());
    }
    let grid: Vec<f64> = (0..=200).map(|i| f64::from(i) / 20.0).collect();
    let mut evals = 0;
    for e in &exprs {
        let printed = e.to_string();
        let back = Expr::parse(&printed, e.signature()).map_err(|x| format!("{printed}: {x}"))?;
        ensure(back.root() == e.root(), || format!("tree changed: {printed}"))?;
        for &a in &grid {
            for &b in &[0.0, 0.3, 1.0, 7.5] {
                let v: Vec<f64> = [a, b].into_iter().cycle().take(e.signature().len()).collect();
                let same = match (e.eval(&v), back.eval(&v)) {
                    (Ok(x), Ok(y)) => x.to_bits() == y.to_bits(),
                    (Err(x), Err(y)) => format!("{x:?}") == format!("{y:?}"),
                    _ => false,
                };
                ensure(same, || format!("{printed} at {v:?}"))?;
                evals += 1;
            }
        }
    }
    Ok(format!(
        "10^4 fuzz inputs up to {longest} bytes ({parsed} parsed), no panic; {} library expressions round-trip bit-exactly on {evals} points",
        exprs.len()
    ))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 12] = [
        ("metric axiom suite", c1_metric_axioms),
        ("Banach/Z equivalence", c2_banach_z_equivalence),
        ("Banach => Meir-Keeler embedding", c3_banach_embeds_in_mk),
        ("Z-contraction containment demo", c4_z_containment),
        ("weakly-type containment demo", c5_weakly_type_containment),
        ("falsifier sharpness", c6_falsifier),
        ("Picard convergence for cos", c7_picard_cos),
        ("Banach a priori bound", c8_a_priori_bound),
        ("monotone Picard steps", c9_monotone_steps),
        ("uniqueness probe", c10_uniqueness),
        ("determinism", c11_determinism),
        ("parser fuzz and round trip", c12_parser),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failures = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let label = format!("criterion {:>2}: {name}", i + 1);
        if !filter.is_empty() && !filter.iter().any(|p| label.contains(p.as_str())) {
            continue;
        }
        let started = Instant::now();
        let result = catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = started.elapsed();
        match result {
            Ok(detail) => println!("PASS {label} ({elapsed:.2?}): {detail}"),
            Err(detail) => {
                failures += 1;
                println!("FAIL {label} ({elapsed:.2?}): {detail}");
            }
        }
    }
    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
