//! JSON schemas for inputs and reports. Rationals travel as `"p/q"` strings;
//! floats use serde_json's shortest round-trip formatting.

use std::cmp::Ordering;

use num::BigInt;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Value};

use crate::error::Result;
use crate::optimizer::{CriticalPoint, CriticalSet, RectangleAudit, ScanRow, SearchOptions, StationarityCheck, Unconverged};
use crate::polytope::LabelledPolytope;
use crate::reeb::{DerivativeReport, EhReport, ReebVector};
use crate::scalar::{format_rational, parse_rational, Rational};
use crate::testconfig::{Calibration, DsCheck, PLConcaveFunction, SfReport, TestConfigReport};

/// A rational accepted as a `"p/q"` / decimal string or a JSON integer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rat(pub Rational);

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(i) => Ok(Rat(Rational::from_integer(i.into()))),
            Raw::Str(s) => parse_rational(&s).map(Rat).map_err(D::Error::custom),
        }
    }
}

impl Serialize for Rat {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(&self.0))
    }
}

/// An integer accepted as a JSON number or a decimal string (for big values).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Int(pub BigInt);

impl<'de> Deserialize<'de> for Int {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(i) => Ok(Int(i.into())),
            Raw::Str(s) => s
                .trim()
                .parse()
                .map(Int)
                .map_err(|_| D::Error::custom(format!("not an integer: {s:?}"))),
        }
    }
}

impl Serialize for Int {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match i64::try_from(&self.0) {
            Ok(i) => s.serialize_i64(i),
            Err(_) => s.serialize_str(&self.0.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FacetJson {
    pub normal: Vec<Int>,
    pub offset: Rat,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolytopeJson {
    pub dim: usize,
    pub facets: Vec<FacetJson>,
}

impl PolytopeJson {
    pub fn build(&self) -> Result<LabelledPolytope> {
        let facets = self
            .facets
            .iter()
            .map(|f| (f.normal.iter().map(|u| u.0.clone()).collect(), f.offset.0.clone()))
            .collect();
        LabelledPolytope::new(self.dim, facets)
    }

    pub fn from_polytope(p: &LabelledPolytope) -> Self {
        PolytopeJson {
            dim: p.dim(),
            facets: p
                .facets()
                .iter()
                .map(|f| FacetJson {
                    normal: f.normal.iter().map(|u| Int(u * &f.label_scale)).collect(),
                    offset: Rat(&f.offset * Rational::from_integer(f.label_scale.clone())),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReebJson {
    pub a0: Rat,
    pub a: Vec<Rat>,
}

impl ReebJson {
    pub fn build(&self) -> ReebVector {
        ReebVector::new(self.a0.0.clone(), self.a.iter().map(|x| x.0.clone()).collect())
    }

    pub fn from_reeb(chi: &ReebVector) -> Self {
        ReebJson {
            a0: Rat(chi.a0.clone()),
            a: chi.a.iter().cloned().map(Rat).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeightJson {
    pub pieces: Vec<ReebJson>,
}

impl HeightJson {
    pub fn build(&self) -> Result<PLConcaveFunction> {
        PLConcaveFunction::new(self.pieces.iter().map(ReebJson::build).collect())
    }
}

pub fn parse_polytope(text: &str) -> Result<PolytopeJson> {
    Ok(serde_json::from_str(text)?)
}

pub fn parse_reeb(text: &str) -> Result<ReebJson> {
    Ok(serde_json::from_str(text)?)
}

pub fn parse_height(text: &str) -> Result<HeightJson> {
    Ok(serde_json::from_str(text)?)
}

pub fn parse_options(text: &str) -> Result<SearchOptions> {
    Ok(serde_json::from_str(text)?)
}

pub fn rational(q: &Rational) -> Value {
    Value::String(format_rational(q))
}

fn rationals(v: &[Rational]) -> Value {
    Value::Array(v.iter().map(rational).collect())
}

fn reeb(chi: &ReebVector) -> Value {
    serde_json::to_value(ReebJson::from_reeb(chi)).expect("serializable")
}

pub fn ordering(o: Ordering) -> &'static str {
    match o {
        Ordering::Less => "less",
        Ordering::Equal => "equal",
        Ordering::Greater => "greater",
    }
}

pub fn polytope_summary(p: &LabelledPolytope) -> Value {
    json!({
        "dim": p.dim(),
        "vertices": p.vertices().iter().map(|v| rationals(v)).collect::<Vec<_>>(),
        "facet_vertices": p.facet_vertices(),
        "volume": rational(&p.volume()),
        "barycenter": rationals(&p.barycenter()),
        "simple": p.is_simple(),
        "delzant": p.is_delzant(),
        "warnings": p.warnings(),
    })
}

pub fn eh_report(r: &EhReport) -> Value {
    json!({
        "V": rational(&r.v),
        "S": rational(&r.s),
        "eh_power": rational(&r.eh_power),
        "sign": r.sign,
        "eh_float": r.eh_float,
    })
}

pub fn derivative_report(d: &DerivativeReport) -> Value {
    json!({
        "scaled_gradient": rationals(&d.gradient),
        "scaled_hessian": d.hessian.iter().map(|r| rationals(r)).collect::<Vec<_>>(),
        "grad_volume": rationals(&d.grad_volume),
        "grad_scal": rationals(&d.grad_scal),
        "scale": d.scale,
        "gradient": d.eh_gradient(),
        "hessian": d.eh_hessian(),
    })
}

pub fn critical_point(p: &CriticalPoint) -> Value {
    json!({
        "chi": reeb(&p.chi),
        "coords": p.coords,
        "eh_value": p.eh_value,
        "eh_power": rational(&p.eh_power),
        "grad_norm": p.grad_norm,
        "exact_grad_norm": p.exact_grad_norm,
        "verified": p.verified(),
        "slice_hessian_spectrum": p.slice_hessian_spectrum,
        "classification": p.classification,
        "iterations": p.iterations,
        "start": p.start,
    })
}

fn unconverged(u: &Unconverged) -> Value {
    json!({
        "start": u.start,
        "coords": u.coords,
        "eh_value": u.eh_value,
        "grad_norm": u.grad_norm,
        "iterations": u.iterations,
    })
}

pub fn critical_set(set: &CriticalSet) -> Value {
    json!({
        "points": set.points.iter().map(critical_point).collect::<Vec<_>>(),
        "unconverged": set.unconverged.iter().map(unconverged).collect::<Vec<_>>(),
    })
}

pub fn stationarity(c: &StationarityCheck) -> Value {
    json!({
        "chi": reeb(&c.chi),
        "eh": eh_report(&c.report),
        "compare_to_xi0": ordering(c.compare_to_xi0),
        "scaled_slice_gradient": rationals(&c.scaled_slice_gradient),
        "slice_gradient": c.slice_gradient,
        "stationary": c.stationary,
    })
}

pub fn rectangle_audit(a: &RectangleAudit) -> Value {
    json!({
        "p": rational(&a.p),
        "q": rational(&a.q),
        "b_squared": rational(&a.b_squared),
        "b_exact": a.b_exact.as_ref().map(rational),
        "plus": stationarity(&a.plus),
        "minus": stationarity(&a.minus),
    })
}

pub fn scan_row(r: &ScanRow) -> Value {
    json!({
        "t": rational(&r.t),
        "chi": reeb(&r.chi),
        "eh": eh_report(&r.report),
        "min_vertex_value": r.min_vertex_value,
        "near_boundary": r.near_boundary,
    })
}

pub fn scan_csv(rows: &[ScanRow]) -> String {
    let mut out = String::from("t,V,S,eh_power,eh_float,min_vertex_value,near_boundary\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            format_rational(&r.t),
            format_rational(&r.report.v),
            format_rational(&r.report.s),
            format_rational(&r.report.eh_power),
            r.report.eh_float,
            r.min_vertex_value,
            r.near_boundary
        ));
    }
    out
}

pub fn testconfig_report(r: &TestConfigReport) -> Value {
    json!({
        "s": rational(&r.s),
        "mu_max": rational(&r.mu_max),
        "V_s": rational(&r.volume.value),
        "V_s_terms": {
            "prefactor": rational(&r.volume.prefactor),
            "volume": rational(&r.volume.volume),
            "total_volume": rational(&r.volume.total_volume),
        },
        "S_s": r.scal.value,
        "S_s_terms": {
            "prefactor": rational(&r.scal.prefactor),
            "scal": rational(&r.scal.scal),
            "total_scal": rational(&r.scal.total_scal),
            "exact_part": rational(&r.scal.exact),
            "fs_wedge": r.scal.fs_wedge,
            "fs_moment": r.scal.fs_moment,
        },
        "EH_s": r.eh_s,
        "dictionary": r.dictionary,
        "calibration_status": r.calibration_status,
        "trusted": r.calibration_status.trusted(),
    })
}

pub fn sf_report(r: &SfReport) -> Value {
    json!({
        "volume": rational(&r.volume),
        "scal": rational(&r.scal),
        "total_volume": rational(&r.total_volume),
        "total_scal": rational(&r.total_scal),
        "exact_part": rational(&r.exact),
        "fs_wedge": r.fs_wedge,
        "bracket": r.bracket,
        "SF": r.sf,
        "slope": r.slope,
        "dictionary": r.dictionary,
        "calibration_status": r.calibration_status,
        "trusted": r.calibration_status.trusted(),
    })
}

pub fn ds_check(d: &DsCheck) -> Value {
    json!({
        "predicted": d.predicted,
        "rows": d.rows.iter().map(|r| json!({
            "step": rational(&r.step),
            "finite_difference": r.finite_difference,
            "abs_error": r.abs_error,
            "rel_error": r.rel_error,
        })).collect::<Vec<_>>(),
        "orders": d.orders,
        "agreement": d.agreement,
        "extrapolated": d.extrapolated,
        "extrapolated_agreement": d.extrapolated_agreement,
        "passed": d.passed,
    })
}

pub fn calibration(c: &Calibration) -> Value {
    serde_json::to_value(c).expect("serializable")
}
