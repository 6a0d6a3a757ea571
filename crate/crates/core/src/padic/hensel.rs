use super::{Ext, PadicError};

/// Horner evaluation; coefficients are listed from the constant term up.
pub fn poly_eval(coeffs: &[Ext], x: &Ext) -> Ext {
    let mut acc = coeffs.last().expect("nonempty polynomial").clone();
    for c in coeffs.iter().rev().skip(1) {
        acc = &(&acc * x) + c;
    }
    acc
}

fn derivative(coeffs: &[Ext]) -> Vec<Ext> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c.scale(&super::Padic::from_i64(c.ctx(), i as i64)))
        .collect()
}

const MAX_STEPS: usize = 200;

/// Newton iteration from `a` to the unique root of f in the disc |x - a| < |f'(a)|.
///
/// Requires integral coefficients and v(f(a)) > 2 v(f'(a)). An exact root is returned as is.
pub fn hensel_root(coeffs: &[Ext], a: &Ext) -> Result<Ext, PadicError> {
    if coeffs.len() < 2 {
        return Err(PadicError::HenselConditionFailed(
            "constant polynomial".into(),
        ));
    }
    if coeffs
        .iter()
        .chain(std::iter::once(a))
        .any(|c| c.defect() < 0.0)
    {
        return Err(PadicError::NonIntegral);
    }
    let df = derivative(coeffs);
    let fa = poly_eval(coeffs, a);
    if fa.is_exact_zero() {
        return Ok(a.clone());
    }
    let dfa = poly_eval(&df, a);
    if dfa.is_zero() {
        return Err(PadicError::HenselConditionFailed(format!(
            "f'({a}) vanishes"
        )));
    }
    let vd = dfa.valuation();
    if fa.valuation() <= 2.0 * vd {
        return Err(PadicError::HenselConditionFailed(format!(
            "v(f(a)) = {} but 2 v(f'(a)) = {}",
            fa.valuation(),
            2.0 * vd
        )));
    }
    // the root is pinned down only beyond the radius |f'(a)|
    let floor = vd + 1.0;
    let mut x = a.clone();
    for _ in 0..MAX_STEPS {
        let fx = poly_eval(coeffs, &x);
        if fx.is_zero() {
            return Ok(x);
        }
        let step = fx.div(&poly_eval(&df, &x))?;
        if step.is_zero() {
            return Ok(x);
        }
        x = &x - &step;
        let known = x.coords().iter().filter_map(|c| c.abs_prec()).min();
        if let Some(k) = known {
            if (k as f64) < floor {
                return Err(PadicError::PrecisionExhausted(format!(
                    "root known only below p^{k}, need p^{floor}"
                )));
            }
        }
    }
    Err(PadicError::PrecisionExhausted(
        "Newton iteration did not stabilize".into(),
    ))
}
