use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde_json::{json, Value};

use darboux_lab::darboux::{
    assemble_darboux_integrals, independent_certificates, rational_obstruction, search_exp_factors, solve_lattice,
    CofactorLattice, DarbouxCert, DarbouxFunction, ExpFactorCert,
};
use darboux_lab::field::VectorField;
use darboux_lab::numerics::{self, conservation_drift, lyapunov_with, Method};
use darboux_lab::series::{formal_integral_space, formal_space_extended, ExtendedField, SeriesSpace};
use darboux_lab::verify::{recheck_darboux, recheck_exp_factor, recheck_function};

/// Failure of a run, mapped to an exit code by the caller.
#[derive(Debug)]
pub enum Failure {
    /// Bad input: exit 2.
    Usage(String),
    /// A certificate failed re-verification: exit 1.
    Invalid(String),
}

/// One part of a report, in both output forms.
pub struct Section {
    pub key: &'static str,
    pub json: Value,
    pub text: Vec<String>,
}

pub fn field_section(field: &VectorField) -> Section {
    let params: serde_json::Map<String, Value> = field
        .params()
        .iter()
        .map(|(k, v)| (k.clone(), json!(v.to_string())))
        .collect();
    let equations: serde_json::Map<String, Value> = field
        .vars()
        .iter()
        .zip(field.components())
        .map(|(v, p)| (v.clone(), json!(p.to_string())))
        .collect();
    let mut text = vec![format!("variables: {}", field.vars().join(" "))];
    if !field.params().is_empty() {
        let ps: Vec<String> = field.params().iter().map(|(k, v)| format!("{k} = {v}")).collect();
        text.push(format!("parameters: {}", ps.join(", ")));
    }
    for (v, p) in field.vars().iter().zip(field.components()) {
        text.push(format!("d{v}/dt = {p}"));
    }
    text.push(format!("degree {}", field.degree()));
    Section {
        key: "field",
        json: json!({
            "vars": field.vars().to_vec(),
            "params": params,
            "equations": equations,
            "degree": field.degree(),
            "kolmogorov": field.is_kolmogorov(),
        }),
        text,
    }
}

fn check_certs(field: &VectorField, certs: &[DarbouxCert]) -> Result<(), Failure> {
    for c in certs {
        recheck_darboux(field, c).map_err(|e| Failure::Invalid(e.to_string()))?;
    }
    Ok(())
}

fn check_efacts(field: &VectorField, efacts: &[ExpFactorCert]) -> Result<(), Failure> {
    for e in efacts {
        recheck_exp_factor(field, e).map_err(|e| Failure::Invalid(e.to_string()))?;
    }
    Ok(())
}

fn cert_json(c: &DarbouxCert) -> Value {
    json!({"poly": c.f.to_string(), "cofactor": c.cofactor.to_string()})
}

fn efact_json(e: &ExpFactorCert) -> Value {
    json!({"g": e.g.to_string(), "s": e.s, "L": e.cofactor.to_string()})
}

fn lattice_json(lattice: &CofactorLattice) -> Value {
    let gens: Vec<String> = lattice.generators().iter().map(|g| g.to_string()).collect();
    json!({"generators": gens, "bound": lattice.bound()})
}

pub struct DarbouxRun {
    pub certs: Vec<DarbouxCert>,
    pub section: Section,
}

pub fn darboux(field: &VectorField, degree: u32, bound: u32) -> Result<DarbouxRun, Failure> {
    let lattice = CofactorLattice::default_for(field, bound);
    let (spaces, stats) = solve_lattice(field, degree, &lattice);
    let certs = independent_certificates(field, &spaces);
    check_certs(field, &certs)?;
    let mut text = vec![format!(
        "Darboux polynomials of degree <= {degree}, relative to the default cofactor lattice (bound {bound}):"
    )];
    text.extend(certs.iter().map(|c| format!("  {}   cofactor {}", c.f, c.cofactor)));
    if certs.is_empty() {
        text.push("  none".into());
    }
    let json = json!({
        "degree": degree,
        "relative_to_lattice": lattice_json(&lattice),
        "certificates": certs.iter().map(cert_json).collect::<Vec<_>>(),
        "search": {
            "top_layers_tested": stats.top_layers_tested,
            "second_layers_tested": stats.second_layers_tested,
            "exact_solves": stats.exact_solves,
        },
    });
    Ok(DarbouxRun {
        certs,
        section: Section {
            key: "darboux",
            json,
            text,
        },
    })
}

pub struct ExpRun {
    pub efacts: Vec<ExpFactorCert>,
    pub section: Section,
}

pub fn exp_factors(field: &VectorField, g_degree: u32, s_bound: u32) -> Result<ExpRun, Failure> {
    let efacts = search_exp_factors(field, g_degree, s_bound);
    check_efacts(field, &efacts)?;
    let mut text = vec![format!(
        "Exponential factors with deg g <= {g_degree}, coordinate denominators up to power {s_bound}:"
    )];
    text.extend(
        efacts
            .iter()
            .map(|e| format!("  exp({})   cofactor {}", e.exponent_text(), e.cofactor)),
    );
    if efacts.is_empty() {
        text.push("  none".into());
    }
    let json = json!({
        "g_degree": g_degree,
        "s_bound": s_bound,
        "factors": efacts.iter().map(efact_json).collect::<Vec<_>>(),
    });
    Ok(ExpRun {
        efacts,
        section: Section {
            key: "exp_factors",
            json,
            text,
        },
    })
}

pub struct IntegralRun {
    pub functions: Vec<DarbouxFunction>,
    pub section: Section,
}

fn function_json(h: &DarbouxFunction) -> Value {
    let factors: Vec<Value> = h
        .darboux_terms
        .iter()
        .map(|(c, l)| json!({"poly": c.f.to_string(), "exponent": l.to_string()}))
        .collect();
    let exps: Vec<Value> = h
        .exp_terms
        .iter()
        .map(|(e, m)| json!({"g": e.g.to_string(), "s": e.s, "exponent": m.to_string()}))
        .collect();
    json!({"expression": h.to_string(), "darboux_factors": factors, "exp_factors": exps})
}

pub fn integrals(
    field: &VectorField,
    certs: &[DarbouxCert],
    efacts: &[ExpFactorCert],
    degree: u32,
    bound: u32,
) -> Result<IntegralRun, Failure> {
    let functions = assemble_darboux_integrals(certs, efacts);
    for h in &functions {
        recheck_function(field, h).map_err(|e| Failure::Invalid(e.to_string()))?;
    }
    let lattice = CofactorLattice::default_for(field, bound);
    let obstruction = rational_obstruction(field, degree, &lattice);
    let mut text = Vec::new();
    if functions.is_empty() {
        text.push("no Darboux first integral from certificates".to_string());
    } else {
        text.push("Darboux first integrals:".to_string());
        text.extend(functions.iter().map(|h| format!("  H = {h}")));
    }
    if obstruction.holds() {
        text.push(format!("rational obstruction holds to degree {degree}"));
    } else {
        text.push(format!("rational obstruction fails at degree {degree}:"));
        text.extend(
            obstruction
                .polynomial_integrals
                .iter()
                .map(|p| format!("  polynomial first integral {p}")),
        );
        for s in &obstruction.repeated_cofactors {
            let b: Vec<String> = s.basis.iter().map(|p| p.to_string()).collect();
            text.push(format!("  cofactor {} shared by {}", s.cofactor, b.join(", ")));
        }
    }
    let repeated: Vec<Value> = obstruction
        .repeated_cofactors
        .iter()
        .map(|s| {
            json!({
                "cofactor": s.cofactor.to_string(),
                "basis": s.basis.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
            })
        })
        .collect();
    let json = json!({
        "functions": functions.iter().map(function_json).collect::<Vec<_>>(),
        "rational_obstruction": {
            "degree": degree,
            "relative_to_lattice": lattice_json(&lattice),
            "holds": obstruction.holds(),
            "polynomial_integrals": obstruction.polynomial_integrals.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
            "repeated_cofactors": repeated,
        },
    });
    Ok(IntegralRun {
        functions,
        section: Section {
            key: "integrals",
            json,
            text,
        },
    })
}

fn series_json(s: &SeriesSpace) -> Value {
    let deps = s.depends_only_on();
    json!({
        "N": s.order,
        "margin": s.margin,
        "dimension": s.dimension(),
        "basis": s.basis.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
        "depends_only_on": if deps.is_empty() { Value::Null } else { json!(deps) },
    })
}

pub fn formal(field: &VectorField, order: u32, margin: u32, promote: Option<&str>) -> Result<Section, Failure> {
    if order == 0 {
        return Err(Failure::Usage("--order must be at least 1".into()));
    }
    let (space, only, promoted) = match promote {
        Some(name) => {
            let ext = ExtendedField::promote(field, name).map_err(|e| Failure::Usage(e.to_string()))?;
            let (s, only) = formal_space_extended(&ext, order, margin);
            (s, Some(only), Some(name))
        }
        None => (formal_integral_space(field, order, margin), None, None),
    };
    let mut json = series_json(&space);
    let mut text = vec![format!(
        "truncated formal first integrals, degree <= {order}, margin {margin}: dimension {}",
        space.dimension()
    )];
    text.extend(space.basis.iter().map(|p| format!("  {p}")));
    if let (Some(only), Some(name)) = (only, promoted) {
        json["promoted"] = json!(name);
        json["only_promoted"] = json!(only);
        text.push(if only {
            format!("every basis element is a polynomial in {name} alone")
        } else {
            format!("some basis element involves variables other than {name}")
        });
    }
    Ok(Section {
        key: "formal",
        json,
        text,
    })
}

pub fn method_json(m: &Method) -> Value {
    match *m {
        Method::Rk4 { dt } => json!({"name": "rk4", "dt": dt}),
        Method::Dopri5 { rtol, atol } => json!({
            "name": "dopri5",
            "rtol": rtol,
            "atol": atol,
            "initial_dt": numerics::INITIAL_DT,
        }),
    }
}

fn numeric_failure(e: numerics::NumericsError) -> Failure {
    Failure::Usage(e.to_string())
}

pub fn simulate(
    field: &VectorField,
    x0: &[f64],
    t_end: f64,
    method: Method,
    functions: &[DarbouxFunction],
    emit: Option<&Path>,
) -> Result<Section, Failure> {
    let traj = numerics::simulate(field, x0, t_end, method).map_err(numeric_failure)?;
    if let Some(path) = emit {
        let file = File::create(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        let mut w = BufWriter::new(file);
        numerics::write_csv(&mut w, &traj, functions)
            .and_then(|_| w.flush())
            .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    }
    let (_, last) = traj.last().expect("trajectory starts at x0");
    let mut text = vec![format!(
        "{} from t = 0 to {t_end}: {} accepted steps, {} rejected",
        method, traj.stats.accepted, traj.stats.rejected
    )];
    text.push(format!("final state {:?}", last));
    let mut drifts = Vec::new();
    for (i, h) in functions.iter().enumerate() {
        match conservation_drift(&traj, h) {
            Ok(d) => {
                text.push(format!(
                    "H{} = {}: max |H - H(0)| = {:e}, relative {:e}",
                    i + 1,
                    d.integral,
                    d.max_abs_drift,
                    d.relative_drift
                ));
                drifts.push(json!({
                    "integral": d.integral,
                    "initial": d.initial,
                    "max_abs_drift": d.max_abs_drift,
                    "relative_drift": d.relative_drift,
                }));
            }
            Err(e) => {
                text.push(format!("H{} = {h}: {e}", i + 1));
                drifts.push(json!({"integral": h.to_string(), "error": e.to_string()}));
            }
        }
    }
    Ok(Section {
        key: "simulation",
        json: json!({
            "x0": x0,
            "t_end": t_end,
            "method": method_json(&method),
            "accepted_steps": traj.stats.accepted,
            "rejected_steps": traj.stats.rejected,
            "evaluations": traj.stats.evaluations,
            "final_state": last,
            "drift": drifts,
            "csv": emit.map(|p| p.display().to_string()),
        }),
        text,
    })
}

pub fn lyapunov(
    field: &VectorField,
    x0: &[f64],
    t_end: f64,
    renorm_dt: f64,
    method: Method,
) -> Result<Section, Failure> {
    let l = lyapunov_with(field, x0, t_end, renorm_dt, method).map_err(numeric_failure)?;
    Ok(Section {
        key: "lyapunov",
        json: json!({
            "x0": x0,
            "t_end": t_end,
            "renorm_dt": renorm_dt,
            "method": method_json(&method),
            "largest_exponent": l.value,
            "renormalizations": l.renormalizations,
        }),
        text: vec![format!(
            "largest Lyapunov exponent {:.6} (t_end {t_end}, renormalized every {renorm_dt})",
            l.value
        )],
    })
}
