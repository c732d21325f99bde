//! The `list` catalog.

use crate::config::Kind;
use crate::validate::*;

pub fn summary(kind: Kind) -> &'static str {
    match kind {
        Kind::Lemma1 => "three-sequence inequality on random unit-disk triples",
        Kind::Converge2 => {
            "two-function cube averages along a grid, or FFT vs naive on random inputs"
        }
        Kind::Converge3 => {
            "seven-function cube averages along a grid, or FFT vs naive on random inputs"
        }
        Kind::Twisted => "cube averages twisted by e(n t)",
        Kind::Cor1 => "finite permutation averages against their exact limit",
        Kind::Khintchine => "exact limit against mu(A)^3 on finite permutation systems",
        Kind::Syndetic => "return-set scan in a window [1, W]^k",
        Kind::Supdecay => "certified sup of exponential sums, or dense-grid soundness check",
        Kind::Eq4decay => "averaged squared sup of shifted products",
    }
}

pub fn fields(kind: Kind) -> &'static str {
    match kind {
        Kind::Lemma1 => "grid, seeds, trials, oversample?",
        Kind::Converge2 => "grid, seeds, 3 observables (a, b, c), mode? | [random] + trials",
        Kind::Converge3 => "grid, seeds, 7 observables, mode? | [random] + trials",
        Kind::Twisted => "grid, seeds, phases, 2 observables (b, c)",
        Kind::Cor1 => "grid, [finite] | seeds + [random], include_period?",
        Kind::Khintchine => "[finite] | seeds + [random]",
        Kind::Syndetic => {
            "seeds, 2-3 systems, 1 indicator observable, window, lambda, condition_start?"
        }
        Kind::Supdecay => {
            "grid, seeds, 1 observable, oversample? | mode = certify, seeds, [random]"
        }
        Kind::Eq4decay => "grid, seeds, 2 observables (u, v), oversample?",
    }
}

pub fn limits(kind: Kind) -> String {
    match kind {
        Kind::Lemma1 => format!("N <= {MAX_N_LEMMA1}"),
        Kind::Converge2 => {
            format!("N <= {MAX_N_CONVERGE2} (fft), {MAX_N_CONVERGE2_NAIVE} (naive, random)")
        }
        Kind::Converge3 => {
            format!("N <= {MAX_N_CONVERGE3} (fft), {MAX_N_CONVERGE3_NAIVE} (naive, random)")
        }
        Kind::Twisted => format!("N <= {MAX_N_TWISTED}"),
        Kind::Cor1 => format!("N <= {MAX_N_COR1}, points <= {MAX_POINTS}"),
        Kind::Khintchine => format!("points <= {MAX_POINTS}"),
        Kind::Syndetic => format!(
            "W <= {} (k = 2), {} (k = 3)",
            cubelab::oracle::MAX_WINDOW_2D,
            cubelab::oracle::MAX_WINDOW_3D
        ),
        Kind::Supdecay => format!("N <= {MAX_N_SUPDECAY}, degree <= {MAX_DEGREE_CERTIFY}"),
        Kind::Eq4decay => format!("N <= {MAX_N_EQ4}"),
    }
}

/// One block per kind, in a fixed order.
pub fn render() -> String {
    let mut out = String::new();
    for kind in Kind::ALL {
        out.push_str(&format!(
            "{}\n  {}\n  fields: {}\n  limits: {}\n",
            kind.name(),
            summary(kind),
            fields(kind),
            limits(kind)
        ));
    }
    out
}
