//! Polynomial vector fields with parameters bound to exact rationals.
//!
//! A field remembers the symbolic form it was written in (components over
//! the state variables and the parameter names) so that it can be printed
//! back with its parameters and so that a parameter can later be promoted to
//! a state variable with zero derivative.

use std::fmt;

use num_traits::Zero;

use crate::poly::{parse_expression, vars, ParseError, Poly, PolyError, Vars};
use crate::rational::{parse_rational, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FieldError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}, column {column}: non-rational literal `{literal}` (write it as p/q)")]
    NonRational {
        line: usize,
        column: usize,
        literal: String,
    },
    #[error("line {line}, column {column}: unbound parameter `{name}`")]
    UnboundParameter { line: usize, column: usize, name: String },
    #[error("line {line}: duplicate equation for `{var}`")]
    DuplicateEquation { line: usize, var: String },
    #[error("line {line}: duplicate parameter `{name}`")]
    DuplicateParameter { line: usize, name: String },
    #[error("missing equation for `{0}`")]
    MissingEquation(String),
    #[error("plane {0} = 0 is not invariant: its component is not divisible by {0}")]
    NotInvariant(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),
    #[error("{0}")]
    Poly(#[from] PolyError),
}

/// A polynomial vector field `X = Σ P_i ∂/∂x_i`.
#[derive(Clone, PartialEq, Eq)]
pub struct VectorField {
    vars: Vars,
    components: Vec<Poly>,
    params: Vec<(String, Rational)>,
    /// Components over `vars ++ param names`.
    symbolic: Vec<Poly>,
}

impl VectorField {
    /// A field without parameters.
    pub fn new(vars: &Vars, components: Vec<Poly>) -> Result<Self, FieldError> {
        if components.len() != vars.len() {
            let missing = vars.get(components.len()).cloned().unwrap_or_default();
            return Err(FieldError::MissingEquation(missing));
        }
        for c in &components {
            if c.vars() != vars {
                return Err(PolyError::VarMismatch {
                    left: vars.join(" "),
                    right: c.vars().join(" "),
                }
                .into());
            }
        }
        Ok(VectorField {
            vars: vars.clone(),
            symbolic: components.clone(),
            components,
            params: Vec::new(),
        })
    }

    /// A field given symbolically over `state ++ parameter names`, with the
    /// parameters bound to `params` (same order as the trailing names).
    pub fn with_params(state: &Vars, params: Vec<(String, Rational)>, symbolic: Vec<Poly>) -> Result<Self, FieldError> {
        let sym_vars = symbolic_vars(state, &params);
        if symbolic.len() != state.len() {
            let missing = state.get(symbolic.len()).cloned().unwrap_or_default();
            return Err(FieldError::MissingEquation(missing));
        }
        let symbolic = symbolic
            .into_iter()
            .map(|p| p.embed(&sym_vars))
            .collect::<Result<Vec<_>, _>>()?;
        let assignment: Vec<Option<Rational>> = (0..state.len())
            .map(|_| None)
            .chain(params.iter().map(|(_, v)| Some(v.clone())))
            .collect();
        let components = symbolic.iter().map(|p| p.specialize(&assignment, state)).collect();
        Ok(VectorField {
            vars: state.clone(),
            components,
            params,
            symbolic,
        })
    }

    pub fn vars(&self) -> &Vars {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn components(&self) -> &[Poly] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &Poly {
        &self.components[i]
    }

    /// Maximum total degree of the components.
    pub fn degree(&self) -> u32 {
        self.components.iter().map(Poly::degree).max().unwrap_or(0)
    }

    /// Parameter bindings in declaration order.
    pub fn params(&self) -> &[(String, Rational)] {
        &self.params
    }

    pub fn param(&self, name: &str) -> Option<&Rational> {
        self.params.iter().find(|(n, _)| n == name).map(|(_, v)| v)
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    /// Same symbolic field with one parameter rebound.
    pub fn with_param(&self, name: &str, value: Rational) -> Result<Self, FieldError> {
        let mut params = self.params.clone();
        let slot = params
            .iter_mut()
            .find(|(n, _)| n == name)
            .ok_or_else(|| FieldError::UnknownParameter(name.to_string()))?;
        slot.1 = value;
        VectorField::with_params(&self.vars, params, self.symbolic.clone())
    }

    /// `X f = Σ P_i ∂f/∂x_i`.
    pub fn lie_derivative(&self, f: &Poly) -> Result<Poly, PolyError> {
        if f.vars() != &self.vars {
            return Err(PolyError::VarMismatch {
                left: self.vars.join(" "),
                right: f.vars().join(" "),
            });
        }
        let mut acc = Poly::zero(&self.vars);
        for (i, p) in self.components.iter().enumerate() {
            let df = f.partial(i);
            if df.is_zero() {
                continue;
            }
            acc = acc.checked_add(&p.checked_mul(&df)?)?;
        }
        Ok(acc)
    }

    /// Homogeneous layer of degree `k` of every component.
    pub fn layer(&self, k: u32) -> Vec<Poly> {
        self.components.iter().map(|p| p.homogeneous_part(k)).collect()
    }

    /// Splits into homogeneous fields, one per degree that occurs, in
    /// increasing degree. Their sum is the original field.
    pub fn degree_split(&self) -> Vec<VectorField> {
        (0..=self.degree())
            .map(|k| self.layer(k))
            .filter(|l| l.iter().any(|p| !p.is_zero()))
            .map(|l| VectorField::new(&self.vars, l).expect("same variables"))
            .collect()
    }

    /// `P_i / x_i` for every component divisible by its own variable.
    pub fn coordinate_cofactors(&self) -> Vec<Option<Poly>> {
        (0..self.nvars())
            .map(|i| self.components[i].exact_quotient(&Poly::var(&self.vars, i)))
            .collect()
    }

    /// True when every component `P_i` is divisible by `x_i`.
    pub fn is_kolmogorov(&self) -> bool {
        self.coordinate_cofactors().iter().all(Option::is_some)
    }

    /// Restriction to the invariant plane `var = 0`.
    pub fn restrict_to_plane(&self, var: &str) -> Result<VectorField, FieldError> {
        let i = self
            .var_index(var)
            .ok_or_else(|| FieldError::UnknownVariable(var.to_string()))?;
        if self.components[i].exact_quotient(&Poly::var(&self.vars, i)).is_none() {
            return Err(FieldError::NotInvariant(var.to_string()));
        }
        let kept: Vec<String> = self
            .vars
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, v)| v.clone())
            .collect();
        let state = vars(&kept);
        let sym_vars = symbolic_vars(&self.vars, &self.params);
        let target = symbolic_vars(&state, &self.params);
        let mut assignment = vec![None; sym_vars.len()];
        assignment[i] = Some(Rational::zero());
        let symbolic = self
            .symbolic
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, p)| p.specialize(&assignment, &target))
            .collect();
        VectorField::with_params(&state, self.params.clone(), symbolic)
    }

    /// Turns a parameter into an extra state variable with zero derivative.
    pub fn promote_parameter(&self, name: &str) -> Result<VectorField, FieldError> {
        if self.param(name).is_none() {
            return Err(FieldError::UnknownParameter(name.to_string()));
        }
        let mut names: Vec<String> = self.vars.to_vec();
        names.push(name.to_string());
        let state = vars(&names);
        let params: Vec<(String, Rational)> = self.params.iter().filter(|(n, _)| n != name).cloned().collect();
        let target = symbolic_vars(&state, &params);
        let mut symbolic = self
            .symbolic
            .iter()
            .map(|p| p.embed(&target))
            .collect::<Result<Vec<_>, _>>()?;
        symbolic.push(Poly::zero(&target));
        VectorField::with_params(&state, params, symbolic)
    }

    /// Field-file text; [`parse_field`] reads it back to an equal field.
    pub fn to_field_file(&self) -> String {
        let mut out = format!("vars: {}\n", self.vars.join(" "));
        for (name, value) in &self.params {
            out.push_str(&format!("param {name} = {value}\n"));
        }
        for (v, p) in self.vars.iter().zip(&self.symbolic) {
            out.push_str(&format!("d{v}/dt = {p}\n"));
        }
        out
    }
}

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "VectorField[")?;
        for (k, (v, p)) in self.vars.iter().zip(&self.components).enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "d{v}/dt = {p}")?;
        }
        write!(f, "]")
    }
}

fn symbolic_vars(state: &Vars, params: &[(String, Rational)]) -> Vars {
    let names: Vec<&str> = state
        .iter()
        .map(String::as_str)
        .chain(params.iter().map(|(n, _)| n.as_str()))
        .collect();
    vars(&names)
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Column (1-based, in characters) of byte offset `at` in `line`.
fn col(line: &str, at: usize) -> usize {
    line[..at].chars().count() + 1
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> FieldError {
    FieldError::Syntax {
        line,
        column,
        message: message.into(),
    }
}

/// Offset of `part` inside `whole` (both slices of the same buffer).
fn offset(whole: &str, part: &str) -> usize {
    part.as_ptr() as usize - whole.as_ptr() as usize
}

/// Parses the text of a field file.
///
/// ```text
/// vars: x y z
/// param <name> = <int>[/<posint>]
/// d<var>/dt = <expr>
/// ```
/// One statement per line; `#` starts a comment. Parameters may be declared
/// anywhere in the file.
pub fn parse_field(text: &str) -> Result<VectorField, FieldError> {
    let mut state: Option<Vec<String>> = None;
    let mut params: Vec<(String, Rational)> = Vec::new();
    let mut equations: Vec<(usize, String, usize, &str, &str)> = Vec::new();

    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        let code = raw.split('#').next().unwrap_or("");
        let stmt = code.trim();
        if stmt.is_empty() {
            continue;
        }
        let start = offset(raw, stmt);
        if let Some(rest) = stmt.strip_prefix("vars:") {
            if state.is_some() {
                return Err(syntax(line_no, col(raw, start), "second `vars:` declaration"));
            }
            let names: Vec<String> = rest.split_whitespace().map(str::to_string).collect();
            if names.is_empty() {
                return Err(syntax(line_no, col(raw, start), "`vars:` needs at least one name"));
            }
            for name in rest.split_whitespace() {
                if !is_identifier(name) {
                    return Err(syntax(
                        line_no,
                        col(raw, offset(raw, name)),
                        format!("bad variable name `{name}`"),
                    ));
                }
                if names.iter().filter(|n| *n == name).count() > 1 {
                    return Err(syntax(
                        line_no,
                        col(raw, offset(raw, name)),
                        format!("variable `{name}` declared twice"),
                    ));
                }
            }
            state = Some(names);
        } else if let Some(rest) = stmt.strip_prefix("param ") {
            let (name, value) = rest
                .split_once('=')
                .ok_or_else(|| syntax(line_no, col(raw, start), "expected `param <name> = <value>`"))?;
            let name_t = name.trim();
            if !is_identifier(name_t) {
                return Err(syntax(
                    line_no,
                    col(raw, start + 6),
                    format!("bad parameter name `{name_t}`"),
                ));
            }
            let value_t = value.trim();
            let vcol = if value_t.is_empty() {
                col(raw, raw.len())
            } else {
                col(raw, offset(raw, value_t))
            };
            let parsed = parse_rational(value_t).ok_or_else(|| {
                if value_t.contains(['.', 'e', 'E']) {
                    FieldError::NonRational {
                        line: line_no,
                        column: vcol,
                        literal: value_t.to_string(),
                    }
                } else {
                    syntax(line_no, vcol, "expected <int> or <int>/<posint>")
                }
            })?;
            if params.iter().any(|(n, _)| n == name_t) {
                return Err(FieldError::DuplicateParameter {
                    line: line_no,
                    name: name_t.to_string(),
                });
            }
            params.push((name_t.to_string(), parsed));
        } else if stmt.starts_with('d') && stmt.contains("/dt") {
            let (lhs, rhs) = stmt
                .split_once('=')
                .ok_or_else(|| syntax(line_no, col(raw, start), "expected `d<var>/dt = <expr>`"))?;
            let var = lhs
                .trim()
                .strip_prefix('d')
                .and_then(|s| s.strip_suffix("/dt"))
                .filter(|v| is_identifier(v))
                .ok_or_else(|| syntax(line_no, col(raw, start), "expected `d<var>/dt` on the left"))?;
            let rhs_off = offset(raw, rhs);
            equations.push((line_no, var.to_string(), rhs_off, rhs, raw));
        } else {
            return Err(syntax(line_no, col(raw, start), "unrecognized statement"));
        }
    }

    let state_names = state.ok_or_else(|| syntax(1, 1, "missing `vars:` declaration"))?;
    for (name, _) in &params {
        if state_names.contains(name) {
            return Err(FieldError::DuplicateParameter {
                line: 0,
                name: name.clone(),
            });
        }
    }
    let state = vars(&state_names);
    let sym_vars = symbolic_vars(&state, &params);
    let mut symbolic: Vec<Option<Poly>> = vec![None; state.len()];
    for (line_no, var, rhs_off, rhs, raw) in equations {
        let i = state_names.iter().position(|v| *v == var).ok_or_else(|| {
            syntax(
                line_no,
                col(raw, offset(raw, raw.trim_start())),
                format!("`{var}` is not a declared variable"),
            )
        })?;
        if symbolic[i].is_some() {
            return Err(FieldError::DuplicateEquation { line: line_no, var });
        }
        let lookup = |name: &str| sym_vars.iter().position(|v| v == name).map(|j| Poly::var(&sym_vars, j));
        let poly = parse_expression(rhs, &sym_vars, &lookup).map_err(|e| {
            let column = col(raw, rhs_off) + e.column() - 1;
            match e {
                ParseError::Syntax { message, .. } => FieldError::Syntax {
                    line: line_no,
                    column,
                    message,
                },
                ParseError::NonRational { literal, .. } => FieldError::NonRational {
                    line: line_no,
                    column,
                    literal,
                },
                ParseError::Unbound { name, .. } => FieldError::UnboundParameter {
                    line: line_no,
                    column,
                    name,
                },
            }
        })?;
        symbolic[i] = Some(poly);
    }
    let symbolic = symbolic
        .into_iter()
        .zip(state_names.iter())
        .map(|(p, v)| p.ok_or_else(|| FieldError::MissingEquation(v.clone())))
        .collect::<Result<Vec<_>, _>>()?;
    VectorField::with_params(&state, params, symbolic)
}

/// Reads and parses a field file from disk.
pub fn load_field(path: &std::path::Path) -> Result<VectorField, LoadError> {
    let text = std::fs::read_to_string(path).map_err(|e| LoadError::Io(path.display().to_string(), e.to_string()))?;
    parse_field(&text).map_err(LoadError::Field)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LoadError {
    #[error("{0}: {1}")]
    Io(String, String),
    #[error("{0}")]
    Field(FieldError),
}

/// The three-species reference system
/// `x' = x(1 - y + c x - a x z)`, `y' = y(-1 + x)`, `z' = z(-b + a x^2)`.
pub fn lotka_volterra_3(a: Rational, b: Rational, c: Rational) -> VectorField {
    let text = format!(
        "vars: x y z\nparam a = {a}\nparam b = {b}\nparam c = {c}\n\
         dx/dt = x*(1 - y + c*x - a*x*z)\ndy/dt = y*(-1 + x)\ndz/dt = z*(-b + a*x^2)\n"
    );
    parse_field(&text).expect("built-in field parses")
}
