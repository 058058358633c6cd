//! Builtin maps, certificate libraries and demo instances.

use std::sync::Arc;

use crate::certificates::{Certificate, SimulationFunction, Strictness, WeaklyTypeTriple};
use crate::error::{Error, Result};
use crate::metric::{Interval, MetricKind, MetricSpace, SelfMap};

/// Names accepted by [`builtin_map`].
pub const BUILTIN_MAPS: &[&str] = &[
    "identity", "half", "third", "cos", "zero", "shift", "square", "mobius", "rotate_half",
];

/// A named map, applied coordinatewise unless noted.
///
/// `rotate_half` is the planar rotation by one radian scaled by 1/2 and
/// needs a 2-dimensional space; `mobius` is x ↦ x/(1 + x).
pub fn builtin_map(name: &str, space: Arc<MetricSpace>) -> Result<SelfMap> {
    let dim = space.dimension();
    let per_coord = |f: &dyn Fn(&str) -> String| -> Vec<String> {
        SelfMap::signature(dim).iter().map(|x| f(x)).collect()
    };
    let sources = match name {
        "identity" => per_coord(&|x| x.to_string()),
        "half" => per_coord(&|x| format!("{x}/2")),
        "third" => per_coord(&|x| format!("{x}/3")),
        "cos" => per_coord(&|x| format!("cos({x})")),
        "zero" => per_coord(&|_| "0".to_string()),
        "shift" => per_coord(&|x| format!("{x} + 1")),
        "square" => per_coord(&|x| format!("{x}^2")),
        "mobius" => per_coord(&|x| format!("{x}/(1 + {x})")),
        "rotate_half" => {
            if dim != 2 {
                return Err(Error::Usage("rotate_half needs a 2-dimensional space".into()));
            }
            vec![
                "0.5*(x1*cos(1) - x2*sin(1))".to_string(),
                "0.5*(x1*sin(1) + x2*cos(1))".to_string(),
            ]
        }
        other => {
            return Err(Error::Usage(format!(
                "unknown builtin map `{other}` (known: {})",
                BUILTIN_MAPS.join(", ")
            )))
        }
    };
    SelfMap::parse(name, space, &sources)
}

pub fn linear_zeta(lambda: f64) -> SimulationFunction {
    SimulationFunction::parse(format!("linear_{lambda}"), &format!("{lambda}*s - t"))
        .expect("linear zeta parses")
}

/// λs − t (λ = 0.9), s/(1 + s) − t, and ψ(s) − t with ψ(s) = s/2.
pub fn zeta_library() -> Vec<SimulationFunction> {
    vec![
        linear_zeta(0.9),
        SimulationFunction::parse("rational", "s/(1 + s) - t").expect("static"),
        SimulationFunction::parse("half", "s/2 - t").expect("static"),
    ]
}

/// Named weakly-type triples.
pub fn triple_library() -> Vec<(String, WeaklyTypeTriple)> {
    let t = |name: &str, psi, alpha, beta, strictness| {
        (
            name.to_string(),
            WeaklyTypeTriple::parse(psi, alpha, beta, strictness).expect("static"),
        )
    };
    vec![
        t("linear_half", "t", "t/2", "0", Strictness::Strict),
        t("rational", "t", "t", "t^2/(1 + t)", Strictness::Strict),
        t("tenth_gap", "t", "t", "t/10", Strictness::Strict),
        t("shifted_psi", "t + 1", "t + 1", "t/4", Strictness::Relaxed),
    ]
}

/// Log-spaced positive grid from 10⁻³ to 10³, used for admissibility probes.
pub fn probe_grid() -> Vec<f64> {
    (0..25).map(|i| 10f64.powf(-3.0 + 0.25 * f64::from(i))).collect()
}

/// A map paired with a certificate it is claimed to satisfy.
#[derive(Debug, Clone)]
pub struct Instance {
    pub name: String,
    pub map: SelfMap,
    pub certificate: Certificate,
}

fn interval(lo: f64, hi: f64) -> Arc<MetricSpace> {
    Arc::new(MetricSpace::interval(lo, hi).expect("static bounds"))
}

fn square(lo: f64, hi: f64) -> Arc<MetricSpace> {
    Arc::new(
        MetricSpace::boxed("square", vec![Interval::new(lo, hi); 2], MetricKind::Euclidean)
            .expect("static bounds"),
    )
}

fn zeta(name: &str) -> Certificate {
    let z = zeta_library()
        .into_iter()
        .find(|z| z.name() == name)
        .expect("library zeta");
    Certificate::Zeta(z)
}

fn triple(name: &str) -> Certificate {
    let (_, w) = triple_library()
        .into_iter()
        .find(|(n, _)| n == name)
        .expect("library triple");
    Certificate::WeaklyType(w)
}

fn instance(name: &str, map: &str, space: Arc<MetricSpace>, certificate: Certificate) -> Instance {
    Instance {
        name: name.to_string(),
        map: builtin_map(map, space).expect("builtin map"),
        certificate,
    }
}

/// Z-contraction instances.
pub fn z_instances() -> Vec<Instance> {
    vec![
        instance("third/half", "third", interval(0.0, 9.0), zeta("half")),
        instance("mobius/rational", "mobius", interval(0.0, 10.0), zeta("rational")),
        instance("cos/linear_0.9", "cos", interval(-1.0, 1.0), zeta("linear_0.9")),
        instance("rotate_half/linear_0.9", "rotate_half", square(-1.0, 1.0), zeta("linear_0.9")),
    ]
}

/// Weakly-type contraction instances.
pub fn weakly_type_instances() -> Vec<Instance> {
    vec![
        instance("third/linear_half", "third", interval(0.0, 9.0), triple("linear_half")),
        instance("mobius/rational", "mobius", interval(0.0, 10.0), triple("rational")),
        instance("cos/tenth_gap", "cos", interval(-1.0, 1.0), triple("tenth_gap")),
        instance("half/shifted_psi", "half", interval(0.0, 10.0), triple("shifted_psi")),
    ]
}

/// The identity on [0, 2] with a Z certificate it does not satisfy.
pub fn identity_z_instance() -> Instance {
    instance("identity/half", "identity", interval(0.0, 2.0), zeta("half"))
}

/// The identity on [0, 2] with a weakly-type certificate it does not satisfy.
pub fn identity_weakly_type_instance() -> Instance {
    instance("identity/linear_half", "identity", interval(0.0, 2.0), triple("linear_half"))
}

/// Every builtin instance, Z first.
pub fn all_instances() -> Vec<Instance> {
    let mut v = z_instances();
    v.extend(weakly_type_instances());
    v
}
