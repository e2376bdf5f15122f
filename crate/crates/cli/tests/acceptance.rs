//! Acceptance suite: one line per criterion, all at exact tolerance.
//!
//! Run with `cargo test -p gkz-cli --test acceptance -- --nocapture` to see
//! the per-criterion lines.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use gkz_core::config::SearchLimits;
use gkz_core::corpus::{corpus, corpus_entry};
use gkz_core::geometry::{duplicate_vector_check, orthant_generators, pointedness_certificate, ConeCertificate};
use gkz_core::integrality::{dwork_criterion, verify_orthant_congruences};
use gkz_core::solutions::build_gk;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde_json::Value;

const PAIRS: [(&str, usize); 5] = [("e1", 2), ("e2", 1), ("e4", 3), ("e5", 1), ("e5", 2)];
const PRIMES: [u64; 6] = [2, 3, 5, 7, 11, 13];

type Outcome = Result<String, String>;

fn corpus_file(name: &str) -> String {
    let mut p = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    p.push("../../corpus");
    p.push(format!("{name}.json"));
    p.to_string_lossy().into_owned()
}

fn gkz(args: &[&str]) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_gkz"))
        .args(args)
        .output()
        .expect("run gkz");
    (out.status.code().unwrap_or(-1), out.stdout)
}

fn gkz_json(args: &[&str]) -> Result<Value, String> {
    let mut full = args.to_vec();
    full.extend(["--format", "json"]);
    let (code, stdout) = gkz(&full);
    let v: Value = serde_json::from_slice(&stdout).map_err(|e| format!("{args:?}: bad JSON: {e}"))?;
    if code != 0 || v["verdict"] != "pass" {
        return Err(format!("{args:?}: exit {code}, verdict {}", v["verdict"]));
    }
    Ok(v)
}

fn parse_q(s: &str) -> BigRational {
    match s.split_once('/') {
        Some((n, d)) => BigRational::new(n.parse().unwrap(), d.parse().unwrap()),
        None => BigRational::from_integer(s.parse().unwrap()),
    }
}

/// Series artifact `name` as exponent -> coefficient.
fn series(v: &Value, name: &str) -> Result<BTreeMap<Vec<i64>, BigRational>, String> {
    let art = v["artifacts"]
        .as_array()
        .and_then(|a| a.iter().find(|x| x["name"] == name))
        .ok_or_else(|| format!("no artifact {name:?}"))?;
    let mut out = BTreeMap::new();
    for t in art["value"]["terms"].as_array().ok_or("terms missing")? {
        let u: Vec<i64> = t["u"]
            .as_array()
            .ok_or("u missing")?
            .iter()
            .map(|x| x.as_i64().unwrap())
            .collect();
        out.insert(u, parse_q(t["c"].as_str().ok_or("c missing")?));
    }
    Ok(out)
}

fn catalan(n: usize) -> Vec<BigInt> {
    let mut c = vec![BigInt::one()];
    for i in 1..=n {
        let next = (0..i).fold(BigInt::zero(), |acc, j| acc + &c[j] * &c[i - 1 - j]);
        c.push(next);
    }
    c
}

fn binomial(n: u64, k: u64) -> u64 {
    (1..=k).fold(1u64, |acc, i| acc * (n - k + i) / i)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn criterion_1() -> Outcome {
    let mut terms = 0;
    for (name, k) in PAIRS {
        let ks = k.to_string();
        let file = corpus_file(name);
        let v = gkz_json(&["exp-check", "--config", &file, "--k", &ks, "--max-level", "30"])?;
        let s = series(&v, &format!("exp G_{k}"))?;
        for (u, c) in &s {
            ensure(c.is_integer(), || format!("{name} k={k}: coefficient {c} at {u:?}"))?;
        }
        terms += s.len();
    }
    Ok(format!("{terms} coefficients, all integers"))
}

fn criterion_2() -> Outcome {
    let primes = PRIMES.map(|p| p.to_string()).join(",");
    let mut checked = 0;
    for (name, k) in PAIRS {
        let ks = k.to_string();
        let file = corpus_file(name);
        let v = gkz_json(&["dwork-check", "--config", &file, "--k", &ks, "--primes", &primes, "--max-level", "20"])?;
        let dwork = v["reports"]
            .as_array()
            .and_then(|r| r.iter().find(|x| x["check"] == "dwork"))
            .ok_or("no dwork report")?;
        let per_prime = dwork["details"].as_array().ok_or("no per-prime reports")?;
        ensure(per_prime.len() == PRIMES.len(), || format!("{name}: {} primes reported", per_prime.len()))?;
        for r in per_prime {
            ensure(r["verdict"] == "pass", || format!("{name} k={k}: {}", r["target"]))?;
            if let Some(val) = r["witness"]["valuation"].as_str() {
                ensure(val == "inf" || val.parse::<i64>().unwrap() >= 1, || format!("{name}: v_p = {val}"))?;
            }
            checked += r["stats"]["terms"].as_str().unwrap().parse::<usize>().unwrap();
        }
    }
    Ok(format!("{checked} coefficients with v_p >= 1"))
}

fn criterion_3() -> Outcome {
    let lim = SearchLimits::default();
    let mut agreements = 0;
    for (name, k) in PAIRS {
        let cfg = corpus_entry(name).unwrap();
        let g = build_gk(&cfg, k, 20, lim).map_err(|e| e.to_string())?;
        for p in PRIMES {
            let series = dwork_criterion(&g, p, 20).map_err(|e| e.to_string())?;
            let terms = verify_orthant_congruences(&cfg, k, 20, &[p], lim).map_err(|e| e.to_string())?;
            ensure(series.passed() && terms.passed(), || {
                format!("{name} k={k} p={p}: series {:?}, congruences {:?}", series.verdict, terms.verdict)
            })?;
            agreements += 1;
        }
    }
    Ok(format!("{agreements} (pair, prime) cases, both routes pass"))
}

fn criterion_4() -> Outcome {
    let v = gkz_json(&["congruence-scan", "--nmax", "4", "--emax", "12", "--primes", "2,3,5,7"])?;
    let r = &v["reports"][0];
    ensure(r["verdict"] == "pass", || format!("scan failed: {}", r["witness"]))?;
    ensure(r.get("details").is_none(), || "scan recorded a failure".into())?;
    // Multi-indices with N <= 4 parts and total <= 12, once per prime.
    let indices: u64 = (1..=4u64)
        .map(|n| (0..=12u64).map(|e| binomial(e + n - 1, n - 1)).sum::<u64>())
        .sum();
    let cases: u64 = r["stats"]["cases"].as_str().unwrap().parse().unwrap();
    ensure(cases == indices * 4, || format!("{cases} cases, expected {}", indices * 4))?;
    Ok(format!("{cases} cases, zero failures"))
}

fn criterion_5() -> Outcome {
    let mut reports = 0;
    for name in ["e1", "e2", "e3", "e4", "e5"] {
        let file = corpus_file(name);
        let v = gkz_json(&["operators-check", "--config", &file, "--coord-bound", "3"])?;
        let cfg = corpus_entry(name).unwrap();
        let distinct = cfg.duplicate_pairs().is_empty();
        for r in v["reports"].as_array().unwrap() {
            match r["verdict"].as_str().unwrap() {
                "pass" => reports += 1,
                "skipped" => ensure(!distinct, || format!("{name}: unexpected skip {}", r["target"]))?,
                other => return Err(format!("{name}: {} {other}", r["target"])),
            }
        }
        let euler = v["reports"].as_array().unwrap().iter().filter(|r| r["check"] == "euler-termwise").count();
        ensure(euler == cfg.len(), || format!("{name}: {euler} termwise Euler reports"))?;
    }
    Ok(format!("{reports} operator reports pass"))
}

fn criterion_6() -> Outcome {
    // E1: exp G_2 = 1 + λ_1/λ_2 to level 30.
    let v = gkz_json(&["exp-check", "--config", &corpus_file("e1"), "--k", "2", "--max-level", "30"])?;
    let s = series(&v, "exp G_2")?;
    let mut want = BTreeMap::new();
    want.insert(vec![0, 0], BigRational::one());
    want.insert(vec![1, -1], BigRational::one());
    ensure(s == want, || format!("E1 exp G_2 = {s:?}"))?;

    // E2: x = λ^(-2,1,1) has level 2, so 12 powers of x need level 24.
    let c = catalan(13);
    let v = gkz_json(&["exp-check", "--config", &corpus_file("e2"), "--k", "1", "--max-level", "24"])?;
    let s = series(&v, "exp G_1")?;
    for t in 0..=12i64 {
        let want = if t == 0 {
            BigRational::one()
        } else {
            BigRational::from_integer(-c[(t - 1) as usize].clone())
        };
        let got = s.get(&vec![-2 * t, t, t]).cloned().unwrap_or_else(BigRational::zero);
        ensure(got == want, || format!("E2 exp G_1 at x^{t}: {got} != {want}"))?;
    }

    // Mirror map q = x C(x)^2 = C(x) - 1: q/x has coefficients C_{t+1}.
    let v = gkz_json(&["mirror", "--config", &corpus_file("e2"), "--relation", "-2,1,1", "--max-level", "24"])?;
    let s = series(&v, "q/λ^(-2,1,1)")?;
    for t in 0..12i64 {
        let want = BigRational::from_integer(c[(t + 1) as usize].clone());
        let got = s.get(&vec![-2 * t, t, t]).cloned().unwrap_or_else(BigRational::zero);
        ensure(got == want, || format!("E2 q/x at x^{t}: {got} != {want}"))?;
    }
    Ok("E1 binomial, E2 Catalan exponential and mirror map, 12 powers each".into())
}

fn criterion_7() -> Outcome {
    let lim = SearchLimits::default();
    for name in ["E2", "E3", "E5"] {
        let cfg = corpus_entry(name).unwrap();
        let gens = orthant_generators(&cfg, 6, lim).map_err(|e| e.to_string())?;
        let cert = match pointedness_certificate(&gens) {
            ConeCertificate::Pointed(c) => c,
            ConeCertificate::NotPointed(_) => return Err(format!("{name}: no certificate")),
        };
        ensure(cert.generators == gens, || format!("{name}: certificate covers other generators"))?;
        // Margins recomputed here, exactly.
        for (g, m) in gens.iter().zip(&cert.margins) {
            let dot = cert
                .w
                .iter()
                .zip(g.entries())
                .fold(BigRational::zero(), |acc, (w, &x)| acc + w * BigRational::from_integer(x.into()));
            ensure(&dot == m && dot >= BigRational::one(), || format!("{name}: margin {dot} at {g}"))?;
        }
    }
    let e1 = corpus_entry("E1").unwrap();
    let gens = orthant_generators(&e1, 6, lim).map_err(|e| e.to_string())?;
    let w = match pointedness_certificate(&gens) {
        ConeCertificate::NotPointed(w) => w,
        ConeCertificate::Pointed(_) => return Err("E1: claimed pointed".into()),
    };
    ensure(w.multipliers.iter().all(|&c| c >= 0) && w.multipliers.iter().any(|&c| c > 0), || {
        "E1: multipliers not a nonnegative nonzero vector".into()
    })?;
    for j in 0..e1.len() {
        let s: i64 = gens.iter().zip(&w.multipliers).map(|(g, &c)| c * g.entries()[j]).sum();
        ensure(s == 0, || format!("E1: dependency coordinate {j} sums to {s}"))?;
    }
    for cfg in corpus() {
        let name = cfg.name().unwrap().to_string();
        let flagged = duplicate_vector_check(&cfg).witness.is_some();
        let expect = name == "E1" || name == "E4";
        ensure(flagged == expect, || format!("{name}: duplicate flag {flagged}"))?;
    }
    Ok("E2, E3, E5 certified; E1 dependency verified; E1, E4 flagged".into())
}

fn criterion_8() -> Outcome {
    let file = corpus_file("e2");
    let args = ["report-all", "--config", &file, "--format", "json"];
    let (c1, a) = gkz(&args);
    let (c2, b) = gkz(&args);
    ensure(c1 == 0 && c2 == 0, || format!("exit codes {c1}, {c2}"))?;
    ensure(a == b, || "outputs differ".into())?;
    let v: Value = serde_json::from_slice(&a).map_err(|e| e.to_string())?;
    ensure(v["verdict"] == "pass", || "report-all did not pass".into())?;
    Ok(format!("{} bytes, identical", a.len()))
}

#[test]
fn acceptance_criteria() {
    let criteria: [(u32, &str, u64, fn() -> Outcome); 8] = [
        (1, "exp G_k integral at level 30", 10, criterion_1),
        (2, "Frobenius criterion, primes <= 13, level 20", 30, criterion_2),
        (3, "series and congruence routes agree", 30, criterion_3),
        (4, "multinomial congruence scan N<=4, total<=12", 60, criterion_4),
        (5, "Euler and box operators, slab |l_j|<=3", 30, criterion_5),
        (6, "closed-form oracles", 30, criterion_6),
        (7, "cone certificates and duplicate flags", 30, criterion_7),
        (8, "report-all byte-identical on E2", 30, criterion_8),
    ];
    let mut failed = Vec::new();
    for (id, title, limit, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > Duration::from_secs(limit) => {
                Err(format!("{detail}; took {:.2}s", elapsed.as_secs_f64()))
            }
            other => other,
        };
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d.clone()),
            Err(e) => ("FAIL", e.clone()),
        };
        println!(
            "criterion {id} [{tag}] {title} ({:.2}s, limit {limit}s): {detail}",
            elapsed.as_secs_f64()
        );
        if outcome.is_err() {
            failed.push(id);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
