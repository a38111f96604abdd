//! Rendering of results as JSON, CSV, or a human table.
//!
//! JSON is the default and is byte-deterministic (sorted keys). Support
//! values appear as integer numerator/denominator pairs, never as decimals;
//! float columns in CSV use 17-significant-digit scientific notation so
//! regression diffs are bit-exact. Infinite interval endpoints serialize as
//! the string `"inf"`.

use serde_json::{json, Value};

use tis_core::design::{PlanCertificate, PlanMethod, PlanVariant};
use tis_core::dist::PmfTable;
use tis_core::intervals::{ConfidenceInterval, FiniteInterval, IntervalKind};
use tis_core::sim::{SimReport, TrialRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Table,
}

pub fn f(x: f64) -> String {
    format!("{x:.17e}")
}

fn finite_or_inf(x: f64) -> Value {
    if x.is_infinite() {
        json!("inf")
    } else {
        json!(x)
    }
}

fn opt(x: Option<f64>) -> Value {
    match x {
        Some(v) => json!(v),
        None => Value::Null,
    }
}

pub fn method_str(method: PlanMethod) -> &'static str {
    match method {
        PlanMethod::Explicit => "explicit",
        PlanMethod::Refined => "refined",
        PlanMethod::Checked => "checked",
    }
}

pub fn variant_str(variant: PlanVariant) -> &'static str {
    match variant {
        PlanVariant::Binomial => "binomial",
        PlanVariant::Finite { .. } => "finite",
    }
}

fn checks_json(cert: &PlanCertificate) -> Value {
    Value::Array(
        cert.checks
            .iter()
            .map(|c| {
                json!({
                    "condition": c.condition.as_str(),
                    "point": c.point,
                    "point_num": c.point_num,
                    "point_den": c.point_den,
                    "tail": c.tail,
                    "bound": c.bound,
                    "pass": c.pass,
                    "borderline": c.borderline,
                })
            })
            .collect(),
    )
}

pub fn certificate_json(cert: &PlanCertificate, delta: f64, capped: Option<bool>) -> Value {
    let gamma = match cert.plan.integer_gamma() {
        Some(g) => json!(g),
        None => json!(cert.plan.gamma()),
    };
    let mut v = json!({
        "variant": variant_str(cert.variant),
        "eps_a": cert.spec.eps_a(),
        "eps_r": cert.spec.eps_r(),
        "delta": delta,
        "p_star": cert.spec.p_star(),
        "gamma": gamma,
        "n": cert.plan.n_max(),
        "method": method_str(cert.method),
        "passed": cert.passed,
        "checks": checks_json(cert),
    });
    if let PlanVariant::Finite { population } = cert.variant {
        v["population"] = json!(population);
    }
    if let Some(z) = cert.zeta {
        v["zeta"] = json!(z);
    }
    if let Some(c) = capped {
        v["capped"] = json!(c);
    }
    v
}

pub fn certificate_csv(cert: &PlanCertificate) -> String {
    let mut out =
        String::from("condition,point_num,point_den,point,tail,bound,pass,borderline\n");
    for c in &cert.checks {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            c.condition.as_str(),
            c.point_num,
            c.point_den,
            f(c.point),
            f(c.tail),
            f(c.bound),
            u8::from(c.pass),
            u8::from(c.borderline),
        ));
    }
    out
}

pub fn certificate_table(cert: &PlanCertificate, delta: f64) -> String {
    let mut out = format!(
        "variant   {}\nmethod    {}\ngamma     {}\nn         {}\ndelta     {}\npassed    {}\n",
        variant_str(cert.variant),
        method_str(cert.method),
        cert.plan.gamma(),
        cert.plan.n_max(),
        delta,
        cert.passed,
    );
    if let Some(z) = cert.zeta {
        out.push_str(&format!("zeta      {z}\n"));
    }
    if !cert.checks.is_empty() {
        out.push_str(&format!(
            "checks    {} evaluated, {} failing\n",
            cert.checks.len(),
            cert.checks.iter().filter(|c| !c.pass).count()
        ));
        out.push_str(&format!(
            "{:<18} {:>12} {:>24} {:>24} {:>5}\n",
            "condition", "point", "tail", "bound", "pass"
        ));
        for c in &cert.checks {
            out.push_str(&format!(
                "{:<18} {:>12.6} {:>24e} {:>24e} {:>5}\n",
                c.condition.as_str(),
                c.point,
                c.tail,
                c.bound,
                c.pass
            ));
        }
    }
    out
}

fn kind_str(kind: IntervalKind) -> &'static str {
    match kind {
        IntervalKind::RealValued => "real-valued",
        IntervalKind::IntegerValued => "integer-valued",
    }
}

pub fn interval_json(variant: &str, ci: &ConfidenceInterval) -> Value {
    json!({
        "variant": variant,
        "lower": ci.lower,
        "upper": finite_or_inf(ci.upper),
        "level": ci.level,
        "kind": kind_str(ci.kind),
    })
}

pub fn finite_interval_json(fi: &FiniteInterval) -> Value {
    let prop = fi.proportions();
    json!({
        "variant": "finite",
        "m_lower": fi.m_lower,
        "m_upper": fi.m_upper,
        "population": fi.population,
        "lower": prop.lower,
        "upper": prop.upper,
        "level": fi.level,
        "kind": kind_str(prop.kind),
    })
}

pub fn interval_csv(ci: &ConfidenceInterval) -> String {
    let upper = if ci.upper.is_infinite() {
        "inf".to_string()
    } else {
        f(ci.upper)
    };
    format!(
        "lower,upper,level\n{},{},{}\n",
        f(ci.lower),
        upper,
        f(ci.level)
    )
}

pub fn finite_interval_csv(fi: &FiniteInterval) -> String {
    let prop = fi.proportions();
    format!(
        "m_lower,m_upper,population,lower,upper,level\n{},{},{},{},{},{}\n",
        fi.m_lower,
        fi.m_upper,
        fi.population,
        f(prop.lower),
        f(prop.upper),
        f(fi.level)
    )
}

pub fn finite_interval_table(fi: &FiniteInterval) -> String {
    let prop = fi.proportions();
    format!(
        "marked units   [{}, {}] of {}\nproportion     [{}, {}]\nlevel          {}\n",
        fi.m_lower, fi.m_upper, fi.population, prop.lower, prop.upper, fi.level
    )
}

pub fn interval_table(ci: &ConfidenceInterval) -> String {
    let upper = if ci.upper.is_infinite() {
        "inf".to_string()
    } else {
        format!("{}", ci.upper)
    };
    format!(
        "lower   {}\nupper   {}\nlevel   {}\nkind    {}\n",
        ci.lower,
        upper,
        ci.level,
        kind_str(ci.kind)
    )
}

pub fn pmf_json(variant: &str, table: &PmfTable) -> Value {
    let entries: Vec<Value> = table
        .entries()
        .iter()
        .map(|e| {
            let stops: Vec<Value> = e
                .stop_times
                .iter()
                .map(|(m, p)| json!({"n_stop": m, "probability": p}))
                .collect();
            json!({
                "value_num": *e.value.numer(),
                "value_den": *e.value.denom(),
                "probability": e.prob,
                "stop_times": stops,
            })
        })
        .collect();
    json!({
        "variant": variant,
        "entries": entries,
        "total_probability": table.total_prob(),
        "mean_stop_time": table.mean_stop_time(),
    })
}

pub fn pmf_csv(table: &PmfTable) -> String {
    let mut out = String::from("support_value_num,support_value_den,probability\n");
    for e in table.entries() {
        out.push_str(&format!(
            "{},{},{}\n",
            e.value.numer(),
            e.value.denom(),
            f(e.prob)
        ));
    }
    out
}

pub fn pmf_table(table: &PmfTable) -> String {
    let mut out = format!(
        "{:>10} {:>24} {:>12}\n",
        "value", "probability", "mean stop"
    );
    for e in table.entries() {
        let stop: f64 = e.stop_times.iter().map(|(m, p)| *m as f64 * p).sum();
        out.push_str(&format!(
            "{:>10} {:>24e} {:>12.4}\n",
            format!("{}/{}", e.value.numer(), e.value.denom()),
            e.prob,
            stop / e.prob.max(f64::MIN_POSITIVE)
        ));
    }
    out.push_str(&format!("total {}\n", table.total_prob()));
    out
}

pub fn sim_json(report: &SimReport) -> Value {
    let flag = |x: Option<bool>| match x {
        Some(b) => json!(b),
        None => Value::Null,
    };
    json!({
        "trials": report.trials,
        "coverage": report.coverage.value,
        "coverage_se": opt(report.coverage.std_error),
        "coverage_pass": flag(report.coverage_pass),
        "ci_coverage": report.ci_coverage.value,
        "ci_coverage_se": opt(report.ci_coverage.std_error),
        "ci_coverage_pass": flag(report.ci_coverage_pass),
        "mean_n": report.mean_n.value,
        "mean_n_se": opt(report.mean_n.std_error),
        "expected_n_bound": report.expected_n_bound,
        "mean_n_bound_pass": flag(report.mean_n_bound_pass),
    })
}

pub fn sim_csv(report: &SimReport) -> String {
    let se = |x: Option<f64>| x.map(f).unwrap_or_default();
    let flag = |x: Option<bool>| x.map(|b| u8::from(b).to_string()).unwrap_or_default();
    let mut out = String::from("metric,value,std_error,pass\n");
    out.push_str(&format!(
        "coverage,{},{},{}\n",
        f(report.coverage.value),
        se(report.coverage.std_error),
        flag(report.coverage_pass)
    ));
    out.push_str(&format!(
        "ci_coverage,{},{},{}\n",
        f(report.ci_coverage.value),
        se(report.ci_coverage.std_error),
        flag(report.ci_coverage_pass)
    ));
    out.push_str(&format!(
        "mean_n,{},{},{}\n",
        f(report.mean_n.value),
        se(report.mean_n.std_error),
        flag(report.mean_n_bound_pass)
    ));
    out.push_str(&format!("expected_n_bound,{},,\n", f(report.expected_n_bound)));
    out
}

pub fn sim_table(report: &SimReport) -> String {
    let se = |x: Option<f64>| {
        x.map(|v| format!("+/- {v:.6}"))
            .unwrap_or_else(|| "(se undefined)".into())
    };
    let flag = |x: Option<bool>| match x {
        Some(true) => "pass",
        Some(false) => "FAIL",
        None => "-",
    };
    format!(
        "trials            {}\ncoverage          {:.6} {} [{}]\nci coverage       {:.6} {} [{}]\nmean n            {:.4} {} [{}]\nexpected n bound  {:.4}\n",
        report.trials,
        report.coverage.value,
        se(report.coverage.std_error),
        flag(report.coverage_pass),
        report.ci_coverage.value,
        se(report.ci_coverage.std_error),
        flag(report.ci_coverage_pass),
        report.mean_n.value,
        se(report.mean_n.std_error),
        flag(report.mean_n_bound_pass),
        report.expected_n_bound,
    )
}

pub fn trials_csv(records: &[TrialRecord]) -> String {
    let mut out = String::from("trial,n_stop,k_sum,estimate,covered,ci_lo,ci_hi\n");
    for r in records {
        let hi = if r.ci_upper.is_infinite() {
            "inf".to_string()
        } else {
            f(r.ci_upper)
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.trial,
            r.n_stop,
            f(r.k_sum),
            f(r.estimate),
            u8::from(r.covered),
            f(r.ci_lower),
            hi
        ));
    }
    out
}
