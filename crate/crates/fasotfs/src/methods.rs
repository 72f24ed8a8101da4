//! Method labels accepted in a config's `methods` list.

use crate::config::ModelKind;
use crate::error::{Error, Result};

/// One column of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ExactSubsets,
    EnvelopeIndep,
    EnvelopeComono,
    RefinedNeff,
    AsymptoticSmall,
    AsymptoticLarge,
    CapacityExact,
    CapacityLower,
    CapacityUpper,
    Mrc(usize),
    /// Monte-Carlo outage.
    Mc,
    /// Monte-Carlo ergodic capacity.
    McCapacity,
    SpExact,
    /// Gauss-Hermite outage; `None` takes the order from the grid point.
    SpQuad(Option<usize>),
    SpCapExact,
    /// Calibrated capacity sum with `(M, L)`; `None` takes both from the
    /// point and the quadrature settings.
    SpCapQuad(Option<(usize, usize)>),
}

const GENERAL: &[&str] = &[
    "exact_subsets",
    "envelope_indep",
    "envelope_comono",
    "refined_neff",
    "asymptotic_small",
    "asymptotic_large",
    "capacity_exact",
    "capacity_lower",
    "capacity_upper",
    "mrc",
    "mrc{n}",
    "mc",
    "mc_capacity",
    "envelope (= envelope_indep + envelope_comono)",
    "refined (= refined_neff)",
];

const SINGLEPATH: &[&str] = &[
    "sp_exact",
    "sp_quad",
    "sp_quad_M{M}",
    "sp_cap_exact",
    "sp_cap_quad",
    "sp_cap_quad_M{M}_L{L}",
    "mrc",
    "mrc{n}",
    "mc",
    "mc_capacity",
];

impl Method {
    /// Whether the method evaluates an outage probability.
    pub fn is_outage(self) -> bool {
        !matches!(
            self,
            Method::CapacityExact
                | Method::CapacityLower
                | Method::CapacityUpper
                | Method::McCapacity
                | Method::SpCapExact
                | Method::SpCapQuad(_)
        )
    }

    pub fn needs_mc(self) -> bool {
        matches!(self, Method::Mc | Method::McCapacity)
    }

    /// CSV label with orders resolved for one grid point.
    pub fn label(self, hermite: usize, laguerre: usize) -> String {
        match self {
            Method::ExactSubsets => "exact_subsets".into(),
            Method::EnvelopeIndep => "envelope_indep".into(),
            Method::EnvelopeComono => "envelope_comono".into(),
            Method::RefinedNeff => "refined_neff".into(),
            Method::AsymptoticSmall => "asymptotic_small".into(),
            Method::AsymptoticLarge => "asymptotic_large".into(),
            Method::CapacityExact => "capacity_exact".into(),
            Method::CapacityLower => "capacity_lower".into(),
            Method::CapacityUpper => "capacity_upper".into(),
            Method::Mrc(n) => format!("mrc{n}"),
            Method::Mc => "mc".into(),
            Method::McCapacity => "mc_capacity".into(),
            Method::SpExact => "sp_exact".into(),
            Method::SpQuad(m) => format!("sp_quad_M{}", m.unwrap_or(hermite)),
            Method::SpCapExact => "sp_cap_exact".into(),
            Method::SpCapQuad(o) => {
                let (m, l) = o.unwrap_or((hermite, laguerre));
                format!("sp_cap_quad_M{m}_L{l}")
            }
        }
    }

    fn model(self) -> Option<ModelKind> {
        match self {
            Method::Mrc(_) | Method::Mc | Method::McCapacity => None,
            Method::SpExact | Method::SpQuad(_) | Method::SpCapExact | Method::SpCapQuad(_) => {
                Some(ModelKind::Singlepath)
            }
            _ => Some(ModelKind::General),
        }
    }
}

fn positive(s: &str) -> Option<usize> {
    s.parse::<usize>().ok().filter(|&v| v > 0)
}

fn parse_one(label: &str, mrc_antennas: usize) -> Option<Vec<Method>> {
    let one = |m| Some(vec![m]);
    match label {
        "exact_subsets" => one(Method::ExactSubsets),
        "envelope" => Some(vec![Method::EnvelopeIndep, Method::EnvelopeComono]),
        "envelope_indep" => one(Method::EnvelopeIndep),
        "envelope_comono" => one(Method::EnvelopeComono),
        "refined" | "refined_neff" => one(Method::RefinedNeff),
        "asymptotic_small" => one(Method::AsymptoticSmall),
        "asymptotic_large" => one(Method::AsymptoticLarge),
        "capacity_exact" => one(Method::CapacityExact),
        "capacity_lower" => one(Method::CapacityLower),
        "capacity_upper" => one(Method::CapacityUpper),
        "mrc" => one(Method::Mrc(mrc_antennas)),
        "mc" => one(Method::Mc),
        "mc_capacity" => one(Method::McCapacity),
        "sp_exact" => one(Method::SpExact),
        "sp_quad" => one(Method::SpQuad(None)),
        "sp_cap_exact" => one(Method::SpCapExact),
        "sp_cap_quad" => one(Method::SpCapQuad(None)),
        _ => {
            if let Some(n) = label.strip_prefix("mrc").and_then(positive) {
                return one(Method::Mrc(n));
            }
            if let Some(m) = label.strip_prefix("sp_quad_M").and_then(positive) {
                return one(Method::SpQuad(Some(m)));
            }
            let (m, l) = label.strip_prefix("sp_cap_quad_M")?.split_once("_L")?;
            one(Method::SpCapQuad(Some((positive(m)?, positive(l)?))))
        }
    }
}

/// Parses `labels`, expanding aliases, and checks them against `model`.
pub fn parse_all(labels: &[String], model: ModelKind, mrc_antennas: usize) -> Result<Vec<Method>> {
    let valid = match model {
        ModelKind::General => GENERAL,
        ModelKind::Singlepath => SINGLEPATH,
    };
    let invalid = |label: &str| {
        Error::Config(format!(
            "method {label:?} is not available for model {model:?}; valid labels: {}",
            valid.join(", ")
        ))
    };
    if labels.is_empty() {
        return Err(Error::Config(format!("methods is empty; valid labels: {}", valid.join(", "))));
    }
    let mut out: Vec<Method> = Vec::new();
    for label in labels {
        let parsed = parse_one(label, mrc_antennas).ok_or_else(|| invalid(label))?;
        for m in parsed {
            if m.model().is_some_and(|k| k != model) {
                return Err(invalid(label));
            }
            if !out.contains(&m) {
                out.push(m);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(labels: &[&str], model: ModelKind) -> Result<Vec<Method>> {
        let v: Vec<String> = labels.iter().map(|s| s.to_string()).collect();
        parse_all(&v, model, 4)
    }

    #[test]
    fn aliases_expand() {
        let m = parse(&["envelope", "refined", "mc"], ModelKind::General).unwrap();
        assert_eq!(m, vec![Method::EnvelopeIndep, Method::EnvelopeComono, Method::RefinedNeff, Method::Mc]);
    }

    #[test]
    fn parameterized_labels() {
        let m = parse(&["mrc", "mrc6", "sp_quad_M15", "sp_cap_quad_M20_L40"], ModelKind::Singlepath).unwrap();
        assert_eq!(
            m,
            vec![Method::Mrc(4), Method::Mrc(6), Method::SpQuad(Some(15)), Method::SpCapQuad(Some((20, 40)))]
        );
        assert_eq!(Method::SpQuad(None).label(10, 40), "sp_quad_M10");
        assert_eq!(Method::SpCapQuad(None).label(20, 40), "sp_cap_quad_M20_L40");
    }

    #[test]
    fn model_mismatch_lists_valid_labels() {
        let e = parse(&["sp_exact"], ModelKind::General).unwrap_err().to_string();
        assert!(e.contains("refined_neff") && e.contains("sp_exact"));
        assert!(parse(&["envelope"], ModelKind::Singlepath).is_err());
        assert!(parse(&["mrc0"], ModelKind::General).is_err());
        assert!(parse(&["sp_quad_M"], ModelKind::Singlepath).is_err());
        assert!(parse(&[], ModelKind::General).is_err());
    }
}
