//! Acceptance suite: one line per criterion, non-zero exit if any fails.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_8};
use std::process::Command;
use std::time::{Duration, Instant};

use otmlab::adversaries::{
    breidbart_exact, rewinding_attack, run_attack_trials, run_bounded_key_trials, AdaptiveGuess, Breidbart,
    HonestSingleChoice, MemoryAttackConfig,
};
use otmlab::bounds::{breidbart_vectors, dual_witness, interactive_bound, numeric_search_n1, v_bc};
use otmlab::protocol::{distinguishing_experiment, honest_receiver_execute, sender_create, ExperimentConfig};
use otmlab::quantum::C64;
use otmlab::token::{make_toy_ma_memory, SuperpositionOracle, TokenProgram, WrapInstance};
use otmlab::{BB84Key, BitString, SeedStream, DEFAULT_SEED};
use rand::Rng;
use serde_json::Value;

// α = 1/2 + 1/(2√2) and its powers, evaluated independently with mpmath.
const ALPHA: f64 = 0.853_553_390_593_273_7;
const ALPHA_POW: [(usize, f64); 4] = [
    (1, 0.853_553_390_593_273_7),
    (2, 0.728_553_390_593_273_7),
    (4, 0.530_790_042_944_955_4),
    (8, 0.281_738_069_689_507_54),
];

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn binomial_sigma(p: f64, trials: u64) -> f64 {
    (p * (1.0 - p) / trials as f64).sqrt()
}

fn config(n: usize, m: usize, trials: u64, seed: u64) -> ExperimentConfig {
    ExperimentConfig { n, m, trials, seed, s0: None, s1: None }
}

fn sdp_certificate() -> Outcome {
    let start = Instant::now();
    let output = Command::new(env!("CARGO_BIN_EXE_otm-lab")).arg("verify-sdp").output().map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let json: Value = serde_json::from_slice(&output.stdout).map_err(|e| e.to_string())?;
    let r = &json["report"];
    let gap = r["duality_gap"].as_f64().unwrap_or(f64::INFINITY);
    let (primal, dual) = (r["primal_value"].as_f64().unwrap_or(0.0), r["dual_value"].as_f64().unwrap_or(0.0));
    let ok = output.status.success()
        && r["primal_feasible"] == Value::Bool(true)
        && r["dual_feasible"] == Value::Bool(true)
        && gap <= 1e-10
        && (primal - 0.853_553_390_6).abs() <= 1e-10
        && (dual - 0.853_553_390_6).abs() <= 1e-10
        && elapsed < Duration::from_secs(1);
    check(ok, format!("gap {gap:.2e}, value {primal:.10}, {elapsed:.2?}"))
}

fn eigenstructure() -> Outcome {
    let (lo, hi) = (1.0 - FRAC_1_SQRT_2, 1.0 + FRAC_1_SQRT_2);
    let mut worst: f64 = 0.0;
    for b in [false, true] {
        for c in [false, true] {
            let spec = v_bc(b, c).eigen();
            worst = worst.max((spec.values[0] - lo).abs()).max((spec.values[1] - hi).abs());
        }
    }
    let top = &v_bc(false, false).eigen().vectors[1];
    let breidbart = [C64::new(FRAC_PI_8.cos(), 0.0), C64::new(FRAC_PI_8.sin(), 0.0)];
    let overlap = top[0].conj() * breidbart[0] + top[1].conj() * breidbart[1];
    let phase = overlap / overlap.norm();
    let distance = ((top[0] * phase - breidbart[0]).norm_sqr() + (top[1] * phase - breidbart[1]).norm_sqr()).sqrt();
    let reference = breidbart_vectors()[0];
    let consistent = (reference[0] - breidbart[0]).norm() < 1e-15 && (reference[1] - breidbart[1]).norm() < 1e-15;
    check(
        worst <= 1e-12 && distance <= 1e-10 && consistent,
        format!("eigenvalue error {worst:.1e}, Breidbart vector distance {distance:.1e}"),
    )
}

fn optimal_attack() -> Outcome {
    let start = Instant::now();
    let trials = 1_000_000;
    let mut details = Vec::new();
    let mut ok = true;
    for (n, p) in ALPHA_POW {
        let r = run_attack_trials(&Breidbart, &config(n, 2, trials, DEFAULT_SEED)).map_err(|e| e.to_string())?;
        let z = (r.both_accepted_frequency - p) / binomial_sigma(p, trials);
        ok &= z.abs() <= 3.0;
        details.push(format!("n={n} z={z:+.2}"));
    }
    let mut worst_exact: f64 = 0.0;
    for n in 1..=6 {
        worst_exact = worst_exact.max((breidbart_exact(n).map_err(|e| e.to_string())? - ALPHA.powi(n as i32)).abs());
    }
    let elapsed = start.elapsed();
    ok &= worst_exact <= 1e-10 && elapsed < Duration::from_secs(60);
    check(ok, format!("{}; exact error {worst_exact:.1e}; {elapsed:.1?}", details.join(", ")))
}

fn achievability_search() -> Outcome {
    let r = numeric_search_n1(10_000).map_err(|e| e.to_string())?;
    let offset = (r.best_angle - FRAC_PI_8).rem_euclid(FRAC_PI_2);
    let angle_error = offset.min(FRAC_PI_2 - offset);
    let certificate = dual_witness().trace();
    let mut never_above = true;
    for res in [8, 100, 1000, 10_000] {
        never_above &= numeric_search_n1(res).map_err(|e| e.to_string())?.best_value <= certificate + 1e-9;
    }
    check(
        (r.best_value - 0.853553).abs() <= 1e-6 && angle_error <= 2.0 * std::f64::consts::PI / 1e4 && never_above,
        format!("max {:.9} at {:.6} rad ({:?})", r.best_value, r.best_angle, r.convention),
    )
}

fn interactive_bound_respected() -> Outcome {
    let start = Instant::now();
    let trials = 100_000;
    let mut worst_margin = f64::INFINITY;
    let mut failures = Vec::new();
    for n in [4usize, 8, 12, 16, 20] {
        for m in [2usize, 4, 8, 16, 32] {
            let r = run_attack_trials(&AdaptiveGuess { max_queries: m }, &config(n, m, trials, DEFAULT_SEED))
                .map_err(|e| e.to_string())?;
            let bound = interactive_bound(n as u32, m as u64);
            let sigma = binomial_sigma(r.both_accepted_frequency, trials);
            let margin = bound + 3.0 * sigma - r.both_accepted_frequency;
            worst_margin = worst_margin.min(margin);
            if margin < 0.0 {
                failures.push(format!("(n={n}, m={m})"));
            }
        }
    }
    let elapsed = start.elapsed();
    check(
        failures.is_empty() && elapsed < Duration::from_secs(300),
        format!("25 cells, smallest margin {worst_margin:.4}, {elapsed:.1?} {}", failures.join(" ")),
    )
}

fn honest_correctness() -> Outcome {
    let streams = SeedStream::new(DEFAULT_SEED);
    let mut wrong = 0;
    let mut runs = 0;
    for n in 1..=10usize {
        for case in 0..8u64 {
            let (s0, s1, b) = (case & 4 != 0, case & 2 != 0, case & 1 != 0);
            let mut rng = streams.fork(n as u64 * 8 + case).stream(0);
            for _ in 0..1000 {
                let mut out = sender_create(s0, s1, n, &mut rng).map_err(|e| e.to_string())?;
                let got = honest_receiver_execute(b, &mut out, &mut rng).map_err(|e| e.to_string())?;
                wrong += (got != if b { s1 } else { s0 }) as u32;
                runs += 1;
            }
        }
    }
    check(wrong == 0, format!("{}/{runs} runs returned s_b", runs - wrong))
}

fn uc_experiment() -> Outcome {
    let trials = 100_000;
    let honest = distinguishing_experiment(&HonestSingleChoice::default(), &config(8, 2, trials, DEFAULT_SEED))
        .map_err(|e| e.to_string())?;
    let breidbart =
        distinguishing_experiment(&Breidbart, &config(8, 2, trials, DEFAULT_SEED)).map_err(|e| e.to_string())?;
    let alpha8 = ALPHA_POW[3].1;
    let case2 = breidbart.case2_frequency;
    let ok = honest.case2_frequency == 0.0
        && honest.empirical_advantage <= 3.0 * honest.sigma
        && (case2 - 0.2820).abs() <= 3.0 * binomial_sigma(0.2820, trials)
        && (case2 - alpha8).abs() <= 3.0 * binomial_sigma(alpha8, trials)
        && breidbart.empirical_advantage <= interactive_bound(8, 2)
        && honest.max_ideal_calls <= 1
        && breidbart.max_ideal_calls <= 1;
    check(
        ok,
        format!(
            "honest advantage {:.4}; Breidbart case-2 {case2:.5}, advantage {:.4} ≤ {:.4}",
            honest.empirical_advantage,
            breidbart.empirical_advantage,
            interactive_bound(8, 2)
        ),
    )
}

fn rewinding_demo() -> Outcome {
    let streams = SeedStream::new(DEFAULT_SEED);
    let mut worst: f64 = 0.0;
    let mut memories = 0;
    let mut wrong = 0;
    for n in 1..=4usize {
        for delta in 1..=1usize << (n - 1) {
            for (k, secrets) in [[false, false], [false, true], [true, false], [true, true]].into_iter().enumerate() {
                for rep in 0..5u64 {
                    let mut rng = streams.fork((n * 100 + delta) as u64).stream(k as u64 * 5 + rep);
                    let (spec, initial) = make_toy_ma_memory(n, delta, secrets, &mut rng).map_err(|e| e.to_string())?;
                    let out =
                        rewinding_attack(&SuperpositionOracle::new(&spec), &initial).map_err(|e| e.to_string())?;
                    worst = worst.max((1.0 - out.joint_probability).abs());
                    wrong += (out.bits != secrets) as u32;
                    memories += 1;
                }
            }
        }
    }
    check(wrong == 0 && worst <= 1e-10, format!("{memories} memories, n ≤ 4, max |1 − P(both)| = {worst:.1e}"))
}

fn bounded_key_demo() -> Outcome {
    let mut details = Vec::new();
    let mut ok = true;
    for delta in [1usize, 2, 4] {
        let r = run_bounded_key_trials(&MemoryAttackConfig {
            n: 4,
            delta,
            trials: 100_000,
            seed: DEFAULT_SEED,
            s0: Some(false),
            s1: Some(true),
        })
        .map_err(|e| e.to_string())?;
        ok &= r.success_frequency >= r.lower_bound;
        details.push(format!("Δ={delta}: {:.4} ≥ {:.4}", r.success_frequency, r.lower_bound));
    }
    check(ok, details.join(", "))
}

fn statelessness() -> Outcome {
    let mut rng = SeedStream::new(DEFAULT_SEED).stream(10);
    let mut queries = 0;
    for _ in 0..500 {
        let n = rng.random_range(1..=12);
        let key = BB84Key::random(n, &mut rng);
        let program = TokenProgram::new(rng.random(), rng.random(), key.clone());
        let mut wrap = WrapInstance::new(program.clone(), 64);
        let mut asked: Vec<(BitString, bool)> = Vec::new();
        for _ in 0..32 {
            // Mix fresh strings with the key itself and with repeats.
            let y = match rng.random_range(0..3) {
                0 if !asked.is_empty() => asked[rng.random_range(0..asked.len())].0.clone(),
                1 => key.x().clone(),
                _ => BitString::random(n, &mut rng),
            };
            let b: bool = rng.random();
            let first = wrap.run(&y, b).map_err(|e| e.to_string())?;
            let again = wrap.run(&y, b).map_err(|e| e.to_string())?;
            if first != again {
                return Err(format!("repeat of ({y}, {}) changed the answer", b as u8));
            }
            asked.push((y, b));
            queries += 2;
        }
        if !wrap.replay_matches() {
            return Err("replayed log disagrees".into());
        }
        let mut fresh = WrapInstance::new(program, 64);
        for record in wrap.log().iter().rev() {
            if fresh.run(&record.y, record.b).map_err(|e| e.to_string())? != record.output {
                return Err("reverse-order replay on a fresh instance disagrees".into());
            }
        }
    }
    check(true, format!("{queries} queries over 500 tokens replayed identically"))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("SDP witness certificate", sdp_certificate),
        ("V_{b,c} eigenstructure and Breidbart vector", eigenstructure),
        ("optimal-attack reproduction", optimal_attack),
        ("achievability search", achievability_search),
        ("interactive bound respected", interactive_bound_respected),
        ("honest correctness", honest_correctness),
        ("UC distinguishing experiment", uc_experiment),
        ("rewinding impossibility demo", rewinding_demo),
        ("bounded-key impossibility demo", bounded_key_demo),
        ("statelessness", statelessness),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS criterion {:>2}: {name} ({detail})", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {:>2}: {name} ({detail})", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
