use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use surfmotif::expr::{Expr, DEFAULT_PARAM_RANGE};
use surfmotif::render::RenderStats;

/// One parse problem, located by byte offset into the submitted text.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Problem {
    pub offset: usize,
    pub message: String,
}

/// What `validate` and the render endpoints report about an equation.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub errors: Vec<Problem>,
    pub free_parameters: Vec<String>,
    /// Slider range per free parameter.
    pub parameter_ranges: BTreeMap<String, [f64; 2]>,
    /// Total degree in `x, y, z`; `null` for non-polynomials and unparsable input.
    pub degree: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stats: Option<RenderStats>,
}

impl Diagnostics {
    pub fn for_expr(expr: &Expr) -> Diagnostics {
        let free_parameters: Vec<String> = expr.parameters().into_iter().collect();
        let (lo, hi) = DEFAULT_PARAM_RANGE;
        let parameter_ranges = free_parameters.iter().map(|p| (p.clone(), [lo, hi])).collect();
        Diagnostics { errors: Vec::new(), free_parameters, parameter_ranges, degree: expr.degree(), stats: None }
    }

    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("diagnostics serialize")
    }
}

/// Parses `text` and describes it; never fails.
pub fn validate(text: &str) -> Diagnostics {
    match Expr::parse(text) {
        Ok(expr) => Diagnostics::for_expr(&expr),
        Err(e) => Diagnostics {
            errors: vec![Problem { offset: e.offset.min(text.len()), message: e.message }],
            ..Diagnostics::default()
        },
    }
}
