//! Plain-text and CSV rendering of study results.
//!
//! Both formats print the same strings: errors and constants with 6 significant
//! digits (`2.53070e-01`), rates with 2 decimals.

use std::fmt::Write;

use crate::analysis::InfSupReport;
use crate::scalar::Real;
use crate::study::{ErrorRecord, LemmaLevel};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Csv,
}

pub const CONVERGENCE_HEADER: &str = "level,n_elements,h,err_u_h1,rate_u,err_p_l2,rate_p";
pub const INFSUP_HEADER: &str = "pair,level,n_u,n_p,beta_h,kernel_dim,beta_h_off_kernel";
pub const LEMMAS_HEADER: &str = "level,identity_pairs,max_identity_gap,ratio_samples,ratio_min,ratio_max";

/// Scientific notation with 6 significant digits and a two-digit signed exponent.
pub fn sci6<T: Real>(x: T) -> String {
    let s = format!("{:.5e}", x.as_f64());
    match s.split_once('e') {
        Some((mantissa, exp)) => {
            let (sign, digits) = match exp.strip_prefix('-') {
                Some(d) => ('-', d),
                None => ('+', exp),
            };
            format!("{mantissa}e{sign}{digits:0>2}")
        }
        None => s,
    }
}

pub fn rate2<T: Real>(rate: Option<T>) -> String {
    rate.map(|r| format!("{:.2}", r.as_f64())).unwrap_or_default()
}

fn convergence_cells<T: Real>(r: &ErrorRecord<T>) -> [String; 7] {
    [
        r.level.to_string(),
        r.n_elements.to_string(),
        sci6(r.h),
        sci6(r.err_u_h1_broken),
        rate2(r.rate_u),
        sci6(r.err_p_l2),
        rate2(r.rate_p),
    ]
}

pub fn convergence_header(format: Format) -> String {
    match format {
        Format::Csv => CONVERGENCE_HEADER.to_string(),
        Format::Text => format!(
            "{:>5} {:>8} {:>12} {:>14} {:>5} {:>14} {:>5}",
            "level", "# elem.", "h", "|u-u_h|_1,h", "rate", "|p-p_h|_0", "rate"
        ),
    }
}

pub fn convergence_row<T: Real>(r: &ErrorRecord<T>, format: Format) -> String {
    let c = convergence_cells(r);
    match format {
        Format::Csv => c.join(","),
        Format::Text => format!(
            "{:>5} {:>8} {:>12} {:>14} {:>5} {:>14} {:>5}",
            c[0], c[1], c[2], c[3], c[4], c[5], c[6]
        ),
    }
}

pub fn render_convergence<T: Real>(records: &[ErrorRecord<T>], format: Format) -> String {
    let mut out = convergence_header(format);
    out.push('\n');
    for r in records {
        out.push_str(&convergence_row(r, format));
        out.push('\n');
    }
    out
}

pub fn infsup_header(format: Format) -> String {
    match format {
        Format::Csv => INFSUP_HEADER.to_string(),
        Format::Text => format!(
            "{:>6} {:>5} {:>7} {:>7} {:>12} {:>6} {:>12}",
            "pair", "level", "n_u", "n_p", "beta_h", "kernel", "off kernel"
        ),
    }
}

pub fn infsup_row<T: Real>(r: &InfSupReport<T>, format: Format) -> String {
    let c = [
        r.pair.to_string(),
        r.level.to_string(),
        r.n_u.to_string(),
        r.n_p.to_string(),
        sci6(r.beta_h),
        r.kernel_dimension.to_string(),
        sci6(r.beta_h_off_kernel),
    ];
    match format {
        Format::Csv => c.join(","),
        Format::Text => format!(
            "{:>6} {:>5} {:>7} {:>7} {:>12} {:>6} {:>12}",
            c[0], c[1], c[2], c[3], c[4], c[5], c[6]
        ),
    }
}

pub fn render_infsup<T: Real>(reports: &[InfSupReport<T>], format: Format) -> String {
    let mut out = infsup_header(format);
    out.push('\n');
    for r in reports {
        let _ = writeln!(out, "{}", infsup_row(r, format));
    }
    out
}

pub fn lemmas_header(format: Format) -> String {
    match format {
        Format::Csv => LEMMAS_HEADER.to_string(),
        Format::Text => format!(
            "{:>5} {:>6} {:>12} {:>7} {:>12} {:>12}",
            "level", "pairs", "max gap", "samples", "ratio min", "ratio max"
        ),
    }
}

pub fn lemmas_row<T: Real>(l: &LemmaLevel<T>, format: Format) -> String {
    let c = [
        l.level.to_string(),
        l.identity_pairs.to_string(),
        sci6(l.max_identity_gap),
        l.ratio_samples.to_string(),
        sci6(l.ratio_min),
        sci6(l.ratio_max),
    ];
    match format {
        Format::Csv => c.join(","),
        Format::Text => format!("{:>5} {:>6} {:>12} {:>7} {:>12} {:>12}", c[0], c[1], c[2], c[3], c[4], c[5]),
    }
}

pub fn render_lemmas<T: Real>(levels: &[LemmaLevel<T>], format: Format) -> String {
    let mut out = lemmas_header(format);
    out.push('\n');
    for l in levels {
        let _ = writeln!(out, "{}", lemmas_row(l, format));
    }
    out
}
