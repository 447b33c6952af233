//! Acceptance run: one PASS/FAIL line per criterion, with timings.
//!
//! Runs without the libtest harness so the lines show up in `cargo test`
//! output. Two criteria are red by analysis (the per-pair NPCC wording and
//! freedom of settings for the two-history derivations). For those the run
//! asserts the known outcome, so a change in either direction is caught.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use locality_core::enumerate::{run_oracle, OracleBounds, OracleReport};
use locality_core::eprb::{
    build_eprb_model, eprb_truth_table, independent_outcome_distribution, pr_box_distribution, uniform_settings, verify_eprb,
    DerivationChoice,
};
use locality_core::meta::demonstrate_meta_objection;
use locality_core::modelspec::{distribution_weights, load, serialize, theories_equal};
use locality_core::probability::{chsh_value, correlator, local_deterministic_bound, parse_weight, to_f64};
use locality_core::theory::Theory;
use locality_core::valuation::{check_conjunction_table, coarse_grain, evaluate, ThreeValuation, Truth};
use num::{BigRational, One};

const TOL: f64 = 1e-9;

struct Line {
    id: usize,
    title: &'static str,
    pass: bool,
    /// Red by analysis; the run still succeeds if the red outcome is the
    /// known one.
    known_red: bool,
    detail: String,
    elapsed: Duration,
    budget: Duration,
}

fn criterion(
    id: usize,
    title: &'static str,
    budget_secs: u64,
    run: impl FnOnce() -> (bool, bool, String),
) -> Line {
    let start = Instant::now();
    let (pass, known_red, detail) = run();
    Line { id, title, pass, known_red, detail, elapsed: start.elapsed(), budget: Duration::from_secs(budget_secs) }
}

fn stat<'a>(r: &'a OracleReport, label: &str) -> &'a str {
    r.stats.iter().find(|(k, _)| k == label).map(|(_, v)| v.as_str()).unwrap_or_else(|| panic!("missing stat {label}"))
}

fn oracle(suite: &str) -> OracleReport {
    run_oracle(suite, OracleBounds::default(), TOL).expect("known suite").expect("default bounds run")
}

// Reference table, row r = 1..16, columns A_s, B_s, A_r, B_r, P_A0, P_A1,
// P_B0, P_B1.
const REFERENCE: [&str; 16] = [
    "0000 0h0h", "0001 0h1h", "0010 1h0h", "0011 1h1h", "0100 0hh0", "0101 0hh1", "0110 1hh0", "0111 1hh1",
    "1000 h00h", "1001 h01h", "1010 h10h", "1011 h11h", "1100 h0h0", "1101 h0h1", "1110 h1h0", "1111 h1h1",
];

fn truth_char(t: Truth) -> char {
    match t {
        Truth::False => '0',
        Truth::Half => 'h',
        Truth::True => '1',
    }
}

fn table_reproduction() -> (bool, bool, String) {
    let table = eprb_truth_table();
    let mut mismatches = 0;
    for (r, row) in table.iter().enumerate() {
        let got: String = row.iter().map(|&t| truth_char(t)).collect();
        let want: String = REFERENCE[r].chars().filter(|c| *c != ' ').collect();
        mismatches += got.chars().zip(want.chars()).filter(|(a, b)| a != b).count();
    }
    (mismatches == 0, false, format!("{} of 128 entries differ", mismatches))
}

fn eprb_suite() -> (bool, bool, String) {
    let mut parts = Vec::new();
    let mut all = true;
    let mut known = true;
    for choice in [DerivationChoice::Full, DerivationChoice::Pair14, DerivationChoice::Pair23] {
        let name = choice.name();
        let m = build_eprb_model(choice).unwrap();
        let d = pr_box_distribution(&m, &uniform_settings()).unwrap();
        let r = verify_eprb(&m, &d, TOL).unwrap();
        let off: Vec<&str> = r.items.iter().filter(|i| i.holds != i.expected).map(|i| i.item.as_str()).collect();
        all &= off.is_empty();
        // known: the full derivation matches; the pair derivations differ
        // exactly on freedom of settings
        known &= if name == "full" { off.is_empty() } else { off == ["freedom of settings"] };
        parts.push(if off.is_empty() { format!("{name} ok") } else { format!("{name} differs on {}", off.join(", ")) });
    }
    (all, !all && known, parts.join("; "))
}

fn chsh() -> (bool, bool, String) {
    let m = build_eprb_model(DerivationChoice::Full).unwrap();
    let scen = m.scenario();
    let pr = pr_box_distribution(&m, &uniform_settings()).unwrap();
    let cells = [(false, false), (false, true), (true, false), (true, true)];
    let corr: Vec<BigRational> = cells.iter().map(|&(a, b)| correlator(&pr, &scen, a, b).unwrap()).collect();
    let one = BigRational::one();
    let corr_ok = corr == vec![one.clone(), one.clone(), one.clone(), -one];
    let value = to_f64(&chsh_value(&pr, &scen).unwrap());
    let bound = local_deterministic_bound();
    let uniform = independent_outcome_distribution(&m, &uniform_settings()).unwrap();
    let zero = to_f64(&chsh_value(&uniform, &scen).unwrap());
    let pass = corr_ok && (value - 4.0).abs() <= 1e-12 && bound == BigRational::from_integer(2.into()) && zero.abs() <= 1e-12;
    let shown: Vec<String> = corr.iter().map(|c| c.to_string()).collect();
    (pass, false, format!("correlators ({}), chsh {value}, bound {bound}, independent {zero}", shown.join(", ")))
}

fn el_equiv() -> (bool, bool, String) {
    let r = oracle("el-equiv");
    let pass = r.passed && r.disagreements == 0 && r.theories >= 10_000;
    (pass, false, format!("{} theories, {} disagreements", r.theories, r.disagreements))
}

fn npcc_equiv() -> (bool, bool, String) {
    let r = oracle("npcc-equiv");
    let pairs: u64 = stat(&r, "spacelike pairs compared").parse().unwrap();
    let differ: u64 = stat(&r, "pairs where the per-pair verdicts differ").parse().unwrap();
    let m_not_j: u64 = stat(&r, "pairs where mutual holds and joint fails").parse().unwrap();
    let pass = differ == 0;
    // known: globally equivalent, mutual ⇒ joint per pair, yet per-pair
    // verdicts differ
    let known = r.passed && r.disagreements == 0 && m_not_j == 0 && differ > 0;
    let detail = format!(
        "{} theories; global disagreements {}; per-pair verdicts differ on {differ} of {pairs} pairs; mutual-without-joint {m_not_j}",
        r.theories, r.disagreements
    );
    (pass, !pass && known, detail)
}

fn el_so2() -> (bool, bool, String) {
    let r = oracle("el-so2");
    let el: u64 = stat(&r, "theories satisfying EL").parse().unwrap();
    let dists = stat(&r, "distributions checked");
    let pass = r.passed && r.disagreements == 0 && r.theories >= 10_000 && el > 0;
    (pass, false, format!("{} theories, {el} satisfy EL, {dists} distributions, {} failures", r.theories, r.disagreements))
}

fn bell() -> (bool, bool, String) {
    let r = oracle("bell-bound");
    let max = to_f64(&parse_weight(stat(&r, "max CHSH")).unwrap());
    let rejected = stat(&r, "max CHSH among rejected theories");
    let accepted = stat(&r, "theories satisfying EL with settings, freedom of settings and ontic definiteness");
    let pass = r.passed && (max - 2.0).abs() <= TOL;
    (pass, false, format!("{} theories, {accepted} accepted, max chsh {max}, rejected reach {rejected}", r.theories))
}

fn meta() -> (bool, bool, String) {
    let m = build_eprb_model(DerivationChoice::Full).unwrap();
    let r = demonstrate_meta_objection(&m).unwrap();
    let pass = r.definiteness_determines_setting && r.definiteness_weakly_influences_setting && !r.meta_fos.holds && r.object_fos.holds;
    (
        pass,
        false,
        format!(
            "?P_A1 correlated with A_s {}, meta fos {}, object fos {}",
            r.definiteness_determines_setting, r.meta_fos.holds, r.object_fos.holds
        ),
    )
}

fn logic_kernel() -> (bool, bool, String) {
    let mut ok = true;
    let mut realized = std::collections::BTreeSet::new();
    for n in 1..=6u32 {
        let omega = (1u64 << n) - 1;
        for x in 1..=omega {
            let v = ThreeValuation::new(x).unwrap();
            for a in 0..=omega {
                ok &= evaluate(x, omega & !a) == !evaluate(x, a);
                for b in 0..=omega {
                    realized.insert((v.value(a), v.value(b), v.value(a & b)));
                    if x.count_ones() == 1 {
                        ok &= v.is_definite_on(a) && (v.value(a & b) == Truth::True) == (v.value(a) == Truth::True && v.value(b) == Truth::True);
                    }
                }
            }
        }
        // correlation on two derivation sets extends to their coarse-graining
        for a in 0..=omega {
            for b in a..=omega {
                let agree: Vec<u64> = (1..=omega).filter(|&x| evaluate(x, a) == evaluate(x, b)).collect();
                for &x in &agree {
                    for &y in &agree {
                        let c = coarse_grain(&[ThreeValuation::new(x).unwrap(), ThreeValuation::new(y).unwrap()]).unwrap();
                        ok &= c.value(a) == c.value(b);
                    }
                }
            }
        }
    }
    use Truth::{Half as H, True as T, False as F};
    let partial = !realized.contains(&(H, H, T)) && realized.contains(&(H, H, F)) && realized.contains(&(H, H, H));
    let table = !check_conjunction_table(H, H, T) && check_conjunction_table(H, H, F) && check_conjunction_table(H, H, H);
    let pass = ok && partial && table && realized.len() == 10;
    (pass, false, format!("{} realized conjunction rows, (½,½,1) realized {}", realized.len(), realized.contains(&(H, H, T))))
}

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "fixtures", name].iter().collect();
    std::fs::read_to_string(p).expect("fixture exists")
}

fn dsl_round_trip() -> (bool, bool, String) {
    use rand::{Rng, SeedableRng};
    let mut ok = 0;
    let mut total = 0;
    let names = ["eprb_full.model", "box_ball.model", "conspiriton.model", "trivial.model"];
    for name in names {
        let text = fixture(name);
        let m = load(&text).unwrap();
        let again = load(&serialize(&m.theory, m.distribution.as_ref())).unwrap();
        total += 1;
        ok += (theories_equal(&m.theory, &again.theory) && serialize(&again.theory, again.distribution.as_ref()) == text) as u32;
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
    let mut random = 0;
    while random < 100 {
        let n = rng.gen_range(1..=4usize);
        let site = locality_core::enumerate::enumerate_sites(3);
        let site = site[rng.gen_range(0..site.len())].clone();
        let space = std::sync::Arc::new(locality_core::histories::HistorySpace::numbered(n).unwrap());
        let omega = space.all();
        let mut frame = locality_core::theory::Frame::new(site.clone(), space);
        for k in 0..rng.gen_range(0..=3) {
            let region = site.region_from_mask(rng.gen_range(1..=site.all_mask()));
            frame.add_event(format!("E{k}"), rng.gen_range(0..=omega), region).unwrap();
        }
        let theory: Theory = if rng.gen_bool(0.5) {
            locality_core::theory::OnticTheory::new(frame, rng.gen_range(1..=omega)).unwrap().into()
        } else {
            let basics = (0..rng.gen_range(1..=3)).map(|i| (format!("v{i}"), rng.gen_range(1..=omega))).collect();
            match locality_core::theory::ThreeValuedTheory::new(frame, basics) {
                Ok(t) => t.into(),
                Err(_) => continue,
            }
        };
        random += 1;
        total += 1;
        let text = serialize(&theory, None);
        if let Ok(m) = load(&text) {
            ok += (theories_equal(&theory, &m.theory) && serialize(&m.theory, None) == text) as u32;
        }
    }
    let model = build_eprb_model(DerivationChoice::Full).unwrap();
    let dist = pr_box_distribution(&model, &uniform_settings()).unwrap();
    let built: Theory = model.theory.into();
    let loaded = load(&fixture("eprb_full.model")).unwrap();
    let golden = theories_equal(&built, &loaded.theory)
        && distribution_weights(loaded.distribution.as_ref().unwrap()) == distribution_weights(&dist)
        && serialize(&built, Some(&dist)) == fixture("eprb_full.model");
    (ok == total && golden, false, format!("{ok} of {total} round trips, golden eprb_full {golden}"))
}

fn main() {
    let lines = vec![
        criterion(1, "truth table reproduction", 1, table_reproduction),
        criterion(2, "EPRB causal suite per derivation", 5, eprb_suite),
        criterion(3, "CHSH values and local bound", 1, chsh),
        criterion(4, "EL1/EL2 enumeration oracle", 120, el_equiv),
        criterion(5, "NPCCj/NPCCm per-pair agreement", 120, npcc_equiv),
        criterion(6, "EL implies SO2 and SO1", 300, el_so2),
        criterion(7, "Bell bound over local definite theories", 300, bell),
        criterion(8, "meta-level objection", 1, meta),
        criterion(9, "three-valued logic kernel", 30, logic_kernel),
        criterion(10, "model format round trip", 30, dsl_round_trip),
    ];
    let mut unexpected = 0;
    for l in &lines {
        let in_time = l.elapsed <= l.budget;
        let verdict = if l.pass && in_time { "PASS" } else { "FAIL" };
        let note = match (l.pass, l.known_red, in_time) {
            (_, _, false) => " (over time budget)",
            (false, true, _) => " (known, by analysis)",
            _ => "",
        };
        println!(
            "{verdict} [{:>2}] {}: {} [{:.2?} of {:?}]{note}",
            l.id, l.title, l.detail, l.elapsed, l.budget
        );
        if !(l.pass && in_time) && !(l.known_red && in_time) {
            unexpected += 1;
        }
    }
    let red = lines.iter().filter(|l| !l.pass).count();
    println!("acceptance: {} of {} PASS, {red} red, {unexpected} unexpected", lines.len() - red, lines.len());
    if unexpected > 0 {
        std::process::exit(1);
    }
}
