//! Shared text rendering for sums of monomials.

use crate::field::FieldElement;

/// True when `s` can be followed by `*monomial` without parentheses.
pub(crate) fn is_atomic(s: &str) -> bool {
    !s.chars().enumerate().any(|(k, c)| c == '+' || c == ' ' || (c == '-' && k > 0))
}

/// Renders `sum coefficient*monomial`, highest order first. Terms are
/// `(coefficient text, monomial text)`; an empty monomial denotes a constant.
pub(crate) fn format_sum(terms: impl IntoIterator<Item = (String, String)>) -> String {
    let mut out = String::new();
    for (coef, mono) in terms {
        let term = if mono.is_empty() {
            coef
        } else if coef == "1" {
            mono
        } else if coef == "-1" {
            format!("-{mono}")
        } else if is_atomic(&coef) || (coef.starts_with('-') && is_atomic(&coef[1..])) {
            format!("{coef}*{mono}")
        } else {
            format!("({coef})*{mono}")
        };
        if out.is_empty() {
            out = term;
        } else if let Some(rest) = term.strip_prefix('-') {
            out.push_str(" - ");
            out.push_str(rest);
        } else {
            out.push_str(" + ");
            out.push_str(&term);
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

pub(crate) fn monomial(var: &str, k: usize) -> String {
    match k {
        0 => String::new(),
        1 => var.to_string(),
        _ => format!("{var}^{k}"),
    }
}

pub(crate) fn format_poly(coeffs: &[FieldElement], var: &str, fmt: impl Fn(&FieldElement) -> String) -> String {
    format_sum(
        coeffs
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| (fmt(c), monomial(var, k))),
    )
}
