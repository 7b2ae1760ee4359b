//! Text formatting shared by the CSV and DOT writers.

/// Format with 12 significant digits, trimming trailing zeros.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-5..12).contains(&exp) {
        let s = format!("{:.11e}", x);
        let (m, e) = s.split_once('e').unwrap();
        return format!("{}e{}", trim(m), e);
    }
    let decimals = (11 - exp).max(0) as usize;
    trim(&format!("{:.*}", decimals, x)).to_string()
}

fn trim(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Render a word of 0-based letters as 1-based, space separated.
pub fn fmt_word(word: &[usize]) -> String {
    word.iter().map(|k| (k + 1).to_string()).collect::<Vec<_>>().join(" ")
}

pub fn fmt_bool(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}
