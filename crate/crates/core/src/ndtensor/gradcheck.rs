use super::{Tape, Tensor, Var};
use crate::error::{Error, Result};

/// Denominator floor for relative error. Entries whose analytic and
/// numerical gradients are both below this are compared on an absolute
/// scale, since central differences cannot resolve them any better.
pub const RELATIVE_ERROR_FLOOR: f64 = 1e-7;

#[derive(Clone, Debug, PartialEq)]
pub struct GradCheckReport {
    pub max_relative_error: f64,
    /// `(parameter index, flat entry index)` of the worst entry.
    pub worst: Option<(usize, usize)>,
    pub analytic_at_worst: f64,
    pub numeric_at_worst: f64,
    pub entries_checked: usize,
    pub tolerance: f64,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.max_relative_error < self.tolerance
    }
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    let diff = (analytic - numeric).abs();
    if diff == 0.0 {
        return 0.0;
    }
    diff / analytic.abs().max(numeric.abs()).max(RELATIVE_ERROR_FLOOR)
}

/// Compares reverse-mode gradients of `f` against central differences
/// `(f(θ+ε) - f(θ-ε)) / 2ε` for every entry of every parameter.
///
/// `f` receives a fresh tape and one leaf per parameter and must return a
/// scalar node.
pub fn grad_check<F>(f: F, params: &[Tensor], epsilon: f64, tolerance: f64) -> Result<GradCheckReport>
where
    F: Fn(&mut Tape, &[Var]) -> Result<Var>,
{
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "grad_check epsilon must be positive, got {epsilon}"
        )));
    }
    let eval = |ps: &[Tensor]| -> Result<(Tape, Vec<Var>, Var)> {
        let mut tape = Tape::new();
        let vars: Vec<Var> = ps.iter().map(|p| tape.leaf(p.clone())).collect();
        let out = f(&mut tape, &vars)?;
        if !tape.value(out).is_scalar() {
            return Err(Error::NotScalar(tape.shape(out).to_vec()));
        }
        Ok((tape, vars, out))
    };

    let (tape, vars, out) = eval(params)?;
    let grads = tape.backward(out)?;
    let analytic: Vec<Tensor> = vars
        .iter()
        .zip(params)
        .map(|(&v, p)| grads.get_or_zeros(v, p))
        .collect();

    let mut report = GradCheckReport {
        max_relative_error: 0.0,
        worst: None,
        analytic_at_worst: 0.0,
        numeric_at_worst: 0.0,
        entries_checked: 0,
        tolerance,
    };
    let mut work = params.to_vec();
    for (pi, param) in params.iter().enumerate() {
        for ei in 0..param.len() {
            let orig = param.data()[ei];
            work[pi].data_mut()[ei] = orig + epsilon;
            let (t_plus, _, o_plus) = eval(&work)?;
            work[pi].data_mut()[ei] = orig - epsilon;
            let (t_minus, _, o_minus) = eval(&work)?;
            work[pi].data_mut()[ei] = orig;

            let numeric = (t_plus.value(o_plus).item() - t_minus.value(o_minus).item()) / (2.0 * epsilon);
            let a = analytic[pi].data()[ei];
            let rel = relative_error(a, numeric);
            report.entries_checked += 1;
            if rel > report.max_relative_error || report.worst.is_none() {
                report.max_relative_error = rel;
                report.worst = Some((pi, ei));
                report.analytic_at_worst = a;
                report.numeric_at_worst = numeric;
            }
        }
    }
    Ok(report)
}
