#![allow(dead_code)]

use std::path::PathBuf;

use ctmax::sut::{parse_model, SutModel};
use ctmax::verify::{brute_force_can, CAN_ORACLE_MAX_N, TN_ORACLE_MAX_TESTS};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn load(name: &str) -> SutModel {
    parse_model(&std::fs::read_to_string(fixture(name)).unwrap()).unwrap()
}

pub fn autonomous() -> SutModel {
    load("autonomous.sut")
}

pub struct CorpusModel {
    pub name: String,
    pub text: String,
    pub model: SutModel,
    /// Exact covering array number at t = 2 from the brute-force oracle.
    pub can: usize,
}

fn atom(rng: &mut ChaCha8Rng, sizes: &[usize]) -> String {
    let p = rng.gen_range(0..sizes.len());
    let v = rng.gen_range(0..sizes[p]);
    let op = if rng.gen_bool(0.3) { "!=" } else { "=" };
    format!("p{p} {op} v{v}")
}

fn constraint(rng: &mut ChaCha8Rng, sizes: &[usize]) -> String {
    let (a, b) = (atom(rng, sizes), atom(rng, sizes));
    match rng.gen_range(0..5) {
        0 => format!("{a} -> {b}"),
        1 => format!("{a} || {b}"),
        2 => format!("!({a} && {b})"),
        3 => format!("({a} && {}) -> {b}", atom(rng, sizes)),
        _ => format!("{a} <-> {b}"),
    }
}

/// Text of a random model: 2–4 parameters, domains 2–3, 0–2 constraints.
pub fn random_model_text(rng: &mut ChaCha8Rng) -> String {
    let n = rng.gen_range(2..=4);
    let sizes: Vec<usize> = (0..n).map(|_| rng.gen_range(2..=3)).collect();
    let mut text = String::from("[PARAMETERS]\n");
    for (p, &s) in sizes.iter().enumerate() {
        let vals: Vec<String> = (0..s).map(|v| format!("v{v}")).collect();
        text += &format!("p{p}: {};\n", vals.join(", "));
    }
    text += "[CONSTRAINTS]\n";
    for _ in 0..rng.gen_range(0..=2) {
        text += &format!("{};\n", constraint(rng, &sizes));
    }
    text
}

/// Random models small enough for every oracle: at most 32 valid tests and
/// CAN at most 6.
pub fn corpus(count: usize) -> Vec<CorpusModel> {
    let mut rng = ChaCha8Rng::seed_from_u64(20240601);
    let mut out = Vec::new();
    let mut attempt = 0;
    while out.len() < count {
        attempt += 1;
        let text = random_model_text(&mut rng);
        let model = parse_model(&text).unwrap();
        let valid = model.valid_tests().len();
        if valid == 0 || valid > TN_ORACLE_MAX_TESTS {
            continue;
        }
        let Ok(Some(can)) = brute_force_can(&model, 2, CAN_ORACLE_MAX_N) else { continue };
        out.push(CorpusModel { name: format!("m{attempt:03}"), text, model, can });
    }
    out
}
