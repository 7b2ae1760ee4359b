//! Reference systems used by tests, benches and the command line.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ifs::{validate, Cplifs, RawMap};
use crate::number::Number;
use crate::Result;

fn rational_map(breakpoints: &[&str], slopes: &[&str], offset: &str) -> RawMap {
    let p = |s: &&str| Number::parse(s).expect("literal parses");
    RawMap { breakpoints: breakpoints.iter().map(p).collect(), slopes: slopes.iter().map(p).collect(), offset: p(&offset) }
}

/// `{x/3, x/3 + 2/3}`.
pub fn cantor() -> Result<Cplifs> {
    validate(&[rational_map(&[], &["1/3"], "0"), rational_map(&[], &["1/3"], "2/3")])
}

/// `{x/2, x/2 + 1/2}`, attractor `[0, 1]`.
pub fn full_interval() -> Result<Cplifs> {
    validate(&[rational_map(&[], &["1/2"], "0"), rational_map(&[], &["1/2"], "1/2")])
}

/// `{x/2, x/2 + 1/2, x/2 + 1/4}`: words `(1,2)` and `(3,1)` coincide.
pub fn three_map_overlap() -> Result<Cplifs> {
    validate(&[
        rational_map(&[], &["1/2"], "0"),
        rational_map(&[], &["1/2"], "1/2"),
        rational_map(&[], &["1/2"], "1/4"),
    ])
}

/// `f_1` with slopes `2/5` left of 0 and `1/5` right of it, `f_2 = x/3`.
/// Every branch fixes 0.
pub fn example_5_1() -> Result<Cplifs> {
    validate(&[rational_map(&["0"], &["2/5", "1/5"], "0"), rational_map(&[], &["1/3"], "0")])
}

/// [`example_5_1`] with `f_2` replaced by `x/3 + eps`.
pub fn example_5_1_perturbed(eps: f64) -> Result<Cplifs> {
    let mut raw = example_5_1()?.raw();
    raw[1].offset = Number::from_f64(eps);
    validate(&raw)
}

/// One kinked map and one similarity with disjoint images:
/// `f_1` has slopes `0.3, 0.1` around 0.5 and fixes 0, `f_2 = x/4 + 0.7`.
pub fn kinked_separated() -> Result<Cplifs> {
    validate(&[rational_map(&["1/2"], &["3/10", "1/10"], "0"), rational_map(&[], &["1/4"], "7/10")])
}

/// Orientation-reversing pieces on both maps, first cylinders disjoint.
pub fn negative_slopes() -> Result<Cplifs> {
    validate(&[rational_map(&["1/2"], &["-3/10", "1/5"], "3/10"), rational_map(&[], &["-7/20"], "1")])
}

/// `{0.7x, 0.7x + 0.3}`: similarity dimension above 1, attractor `[0, 1]`.
pub fn lebesgue_positive() -> Result<Cplifs> {
    validate(&[rational_map(&[], &["7/10"], "0"), rational_map(&[], &["7/10"], "3/10")])
}

/// Reference systems without exact overlaps, with names.
pub fn separated_suite() -> Vec<(&'static str, Cplifs)> {
    vec![
        ("cantor", cantor().unwrap()),
        ("kinked_separated", kinked_separated().unwrap()),
        ("negative_slopes", negative_slopes().unwrap()),
    ]
}

/// Random two-map similarity system on `[0, 1]` with first-level images
/// `[0, r_1]` and `[1 - r_2, 1]`, `r_i ∈ [0.1, 0.45]`, random orientation.
pub fn random_separated(seed: u64, index: u64) -> Cplifs {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let r1: f64 = rng.gen_range(0.1..=0.45);
    let r2: f64 = rng.gen_range(0.1..=0.45);
    let (s1, t1) = if rng.gen_bool(0.5) { (r1, 0.0) } else { (-r1, r1) };
    let (s2, t2) = if rng.gen_bool(0.5) { (r2, 1.0 - r2) } else { (-r2, 1.0) };
    Cplifs::from_params(&[(&[], &[s1], t1), (&[], &[s2], t2)]).expect("slopes in range")
}

/// Look up a reference system by name.
pub fn by_name(name: &str) -> Option<Cplifs> {
    let f = match name {
        "cantor" => cantor(),
        "full" | "full_interval" => full_interval(),
        "three_map_overlap" => three_map_overlap(),
        "example_5_1" | "example51" => example_5_1(),
        "kinked_separated" => kinked_separated(),
        "negative_slopes" => negative_slopes(),
        "lebesgue_positive" => lebesgue_positive(),
        _ => return None,
    };
    f.ok()
}
