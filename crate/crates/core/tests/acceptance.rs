// SPDX-License-Identifier: Apache-2.0

//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

mod common;

use std::collections::BTreeSet;
use std::fs;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use causalc_core::circuit::build::{input_id, output_id};
use causalc_core::circuit::SpacetimeCircuit;
use causalc_core::compiler::{normalize_trace_line, remove_all_gates, transfer};
use causalc_core::geometry::{bipartite_causal_set, Point, Region, Spacetime};
use causalc_core::quantum::matrix::CMatrix;
use causalc_core::quantum::{channel_distance, DensityState, Leg};
use causalc_core::random::{layout_with_coarse, random_channel, random_circuit, CircuitParams};
use causalc_core::simulate::effective_channel;
use causalc_core::task::{io, library, same_coarse, same_fine, Task, TaskPoint};
use causalc_core::teleport::{bell_pairs, nt_decrypt, nt_encrypt_branches, pbt_fidelity};
use common::pbt::{dense_fidelity, lanczos_fidelity};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// Criterion 1: Gate removal preserves the effective channel on random circuits.
fn random_compilation() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC1);
    let params = CircuitParams::default();
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let circ = random_circuit(&mut rng, &params);
        let compiled = remove_all_gates(&circ).map_err(|e| format!("circuit {i}: {e}"))?;
        check(compiled.circuit.is_gate_free(), || format!("circuit {i}: gates left"))?;
        let a = effective_channel(&circ).map_err(err)?;
        let b = effective_channel(&compiled.circuit).map_err(|e| format!("circuit {i}: {e}"))?;
        let d = channel_distance(&a, &b).map_err(err)?;
        worst = worst.max(d);
        check(d <= 1e-8, || format!("circuit {i}: Choi distance {d:.3e}"))?;
    }
    let took = start.elapsed();
    check(took <= Duration::from_secs(60), || format!("took {took:.1?}, limit 60 s"))?;
    Ok(format!("50 circuits, max Choi distance {worst:.2e}, {took:.1?}"))
}

/// Keeps the coarse matrix by a monotone reparametrisation of light-cone
/// coordinates, used when rejection sampling finds no fresh layout.
fn squeeze(p: &Point, rng_a: f64, rng_b: f64) -> Point {
    let Point::Minkowski { t, x } = p else { return p.clone() };
    let (u, v) = (t + x, t - x);
    let f = |s: f64, k: f64| if s >= 0.0 { s * k } else { s / k };
    let (u2, v2) = (f(u, rng_a), f(v, rng_b));
    Point::minkowski((u2 + v2) / 2.0, (u2 - v2) / 2.0)
}

fn renamed(prefix: &str, pts: Vec<Point>) -> Vec<TaskPoint> {
    pts.into_iter().enumerate().map(|(i, p)| TaskPoint::new(&format!("{prefix}{}", i + 1), p)).collect()
}

/// Criterion 2: Compiled circuits keep working after transfer to any spacetime with
/// the same coarse signature.
fn transfer_after_compilation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC2);
    let params = CircuitParams::default();
    let mut fresh = 0;
    for i in 0..20 {
        let circ = random_circuit(&mut rng, &params);
        let task = Task::from_circuit(&circ, 1e-8).map_err(err)?;
        let coarse = task.coarse_signature().map_err(err)?;
        let compiled = remove_all_gates(&circ).map_err(err)?.circuit;

        let (cs, rs) = match layout_with_coarse(&mut rng, &coarse.matrix, 20_000) {
            Some(l) => {
                fresh += 1;
                l
            }
            None => {
                let (a, b) = (rng.gen_range(0.3..3.0), rng.gen_range(0.3..3.0));
                let sq = |ps: &[TaskPoint]| ps.iter().map(|p| squeeze(&p.at, a, b)).collect::<Vec<_>>();
                (sq(&task.inputs), sq(&task.outputs))
            }
        };
        let mink = task.moved_to(Spacetime::minkowski(), renamed("a", cs), renamed("b", rs)).map_err(err)?;

        let ins: Vec<String> = (1..=coarse.n).map(|k| format!("x{k}")).collect();
        let outs: Vec<String> = (1..=coarse.m).map(|k| format!("y{k}")).collect();
        let set = bipartite_causal_set(&ins, &outs, &coarse.matrix).map_err(err)?;
        let elems = |ids: &[String]| ids.iter().map(|s| Point::element(s.as_str())).collect::<Vec<_>>();
        let cset = task
            .moved_to(Spacetime::CausalSet(set), renamed("x", elems(&ins)), renamed("y", elems(&outs)))
            .map_err(err)?;

        for (label, u) in [("Minkowski", &mink), ("causal set", &cset)] {
            check(same_coarse(&task, u).map_err(err)?, || format!("pair {i}: {label} target has another coarse signature"))?;
            let moved = transfer(&compiled, u).map_err(|e| format!("pair {i} ({label}): {e}"))?;
            let ch = effective_channel(&moved).map_err(err)?;
            let d = u.distance(&ch).map_err(err)?;
            check(d <= 1e-8, || format!("pair {i} ({label}): distance {d:.3e}"))?;
        }
    }
    Ok(format!("20 pairs x 2 backends accomplished ({fresh} fresh Minkowski layouts)"))
}

/// Criterion 3: The gate-removal trace of the two-layer example.
fn two_layer_trace() -> Outcome {
    let out = remove_all_gates(&library::two_layer_circuit()).map_err(err)?;
    let trace: Vec<String> = out.trace.iter().map(|l| normalize_trace_line(l)).collect();
    let golden_path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/two_layer_trace.txt");
    let golden: Vec<String> =
        fs::read_to_string(&golden_path).map_err(err)?.lines().map(normalize_trace_line).collect();
    check(trace == golden, || "trace differs from the golden file".into())?;
    let wanted = [
        "$I_1^{(c_1)}I_2$ at $c_2$",
        "${}^{(c_2)}(\\Lambda_{g_1}(I_1I_2))",
        "$^{(c_2,c_3,c_4)}(S_{in}(r_2))$ at $c_1$",
    ];
    let mut from = 0;
    for w in wanted {
        let w = normalize_trace_line(w);
        let pos = trace[from..].iter().position(|l| l.contains(&w)).ok_or_else(|| format!("`{w}` missing or out of order"))?;
        from += pos + 1;
    }
    Ok(format!("{} trace lines match golden, 3 required states in order", trace.len()))
}

/// Criterion 4: PBQC with a random channel on a causal set with nothing between the
/// inputs and the outputs.
fn pbqc_empty_region() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC4);
    let q = |s: causalc_core::circuit::SystemId| Leg::new(s.to_string(), 1);
    let target = random_channel(&mut rng, vec![q(input_id("c1")), q(input_id("c2"))], vec![q(output_id("r1")), q(output_id("r2"))], 3);
    let gate = target.kraus.clone();
    let circ = library::naive_pbqc_circuit_with(gate);
    let u = library::interior_free_pbqc_task_with(target.kraus.clone());
    let fine = u.fine_signature().map_err(err)?;
    check(fine.get(&[1, 2], &[1, 2]) == Some(false), || "middle region is not empty".into())?;
    let compiled = remove_all_gates(&circ).map_err(err)?.circuit;
    let moved = transfer(&compiled, &u).map_err(err)?;
    let d = u.distance(&effective_channel(&moved).map_err(err)?).map_err(err)?;
    check(d <= 1e-8, || format!("distance {d:.3e}"))?;
    Ok(format!("random 2-qubit channel reproduced, distance {d:.2e}"))
}

fn phi_plus(d: usize) -> CMatrix {
    let mut v = CMatrix::zeros(d * d, 1);
    for i in 0..d {
        v[(i * d + i, 0)] = causalc_core::quantum::matrix::c(1.0 / (d as f64).sqrt(), 0.0);
    }
    &v * v.adjoint()
}

/// Trace-norm bound `d · ‖A − B‖_F`.
fn bound(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).norm() * (a.nrows() as f64)
}

/// Criterion 5: Normal teleportation: decryption undoes it exactly; without the key
/// the receiver holds a maximally mixed state.
fn normal_teleportation() -> Outcome {
    let mut worst: f64 = 0.0;
    for qubits in 1..=3u32 {
        let d = 1usize << qubits;
        let parts: Vec<String> = (0..qubits).map(|j| format!("s{j}")).collect();
        let start = DensityState::max_entangled(Leg::new("ref", qubits), Leg::new("src", qubits))
            .and_then(|s| s.split("src", &parts))
            .map_err(err)?;
        let (mut keyed, mut keyless) = (start.clone(), start);
        for (j, part) in parts.iter().enumerate() {
            let dest = format!("d{j}");
            let run = |st: &DensityState, decrypt: bool| -> Result<DensityState, String> {
                let st = st.tensor(&bell_pairs(1).map_err(err)?).map_err(err)?;
                let res = [("a0".to_string(), "b0".to_string())];
                let mut acc: Option<DensityState> = None;
                for (key, b) in nt_encrypt_branches(&st, part, &res, &dest).map_err(err)? {
                    let b = if decrypt { nt_decrypt(&b, &dest, &key).map_err(err)? } else { b };
                    acc = Some(match acc {
                        None => b,
                        Some(a) => a.add(&b).map_err(err)?,
                    });
                }
                Ok(acc.expect("four branches"))
            };
            keyed = run(&keyed, true)?;
            keyless = run(&keyless, false)?;
        }
        let dests: Vec<String> = (0..qubits).map(|j| format!("d{j}")).collect();
        let names: Vec<&str> = std::iter::once("ref").chain(dests.iter().map(String::as_str)).collect();
        let a = keyed.permute(&names).map_err(err)?;
        let b = keyless.permute(&names).map_err(err)?;
        let e1 = bound(a.matrix(), &phi_plus(d));
        let mixed = CMatrix::identity(d * d, d * d).unscale((d * d) as f64);
        let e2 = bound(b.matrix(), &mixed);
        worst = worst.max(e1).max(e2);
        check(e1 <= 1e-10, || format!("{qubits} qubits: decrypted channel off identity by {e1:.3e}"))?;
        check(e2 <= 1e-10, || format!("{qubits} qubits: keyless channel off depolarizing by {e2:.3e}"))?;
    }
    Ok(format!("1-3 qubits, max deviation {worst:.2e}"))
}

/// Criterion 6: Port-based teleportation fidelity grows with the number of ports
/// and agrees with brute-force oracles.
fn pbt_fidelities() -> Outcome {
    let mut prev = 0.0;
    let mut shown = Vec::new();
    for n in [2usize, 4, 8, 16] {
        let lib = pbt_fidelity(n).map_err(err)?;
        let oracle = if n <= 8 { dense_fidelity(n) } else { lanczos_fidelity(n) };
        check((lib - oracle).abs() <= 1e-6, || format!("F({n}) = {lib} but oracle gives {oracle}"))?;
        check(lib > prev, || format!("F({n}) = {lib} does not exceed {prev}"))?;
        prev = lib;
        shown.push(format!("F({n})={lib:.6}"));
    }
    Ok(shown.join(" < "))
}

fn uv(p: &Point) -> (f64, f64) {
    match p {
        Point::Minkowski { t, x } => (t + x, t - x),
        Point::Element(_) => unreachable!(),
    }
}

/// Criterion 7: Minkowski queries against light-cone and grid oracles; cyclic causal
/// relations are refused by the loader.
fn geometry_queries() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC7);
    let st = Spacetime::minkowski();
    let pt = |rng: &mut ChaCha8Rng| Point::minkowski(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
    let mut grid_checked = 0;
    for i in 0..500 {
        let (a, b) = (pt(&mut rng), pt(&mut rng));
        let ((ua, va), (ub, vb)) = (uv(&a), uv(&b));
        let oracle = ub >= ua && vb >= va;
        check(st.precedes(&a, &b).map_err(err)? == oracle, || format!("precedence query {i}: {a:?} vs {b:?}"))?;
    }
    for i in 0..500 {
        let fut: Vec<Point> = (0..rng.gen_range(0..=2)).map(|_| pt(&mut rng)).collect();
        let past: Vec<Point> = (0..rng.gen_range(0..=2)).map(|_| pt(&mut rng)).collect();
        let got = st.region_nonempty(&Region::new(fut.clone(), past.clone())).map_err(err)?;
        let lo_u = fut.iter().map(|p| uv(p).0).fold(f64::NEG_INFINITY, f64::max);
        let lo_v = fut.iter().map(|p| uv(p).1).fold(f64::NEG_INFINITY, f64::max);
        let hi_u = past.iter().map(|p| uv(p).0).fold(f64::INFINITY, f64::min);
        let hi_v = past.iter().map(|p| uv(p).1).fold(f64::INFINITY, f64::min);
        let cone = lo_u <= hi_u && lo_v <= hi_v;
        check(got == cone, || format!("region query {i}: light-cone oracle disagrees"))?;
        // Grid oracle where the answer is not decided within one grid step.
        let step = 0.05;
        let margin = (hi_u - lo_u).min(hi_v - lo_v);
        if margin.abs() > 2.0 * step || !margin.is_finite() {
            let mut hit = false;
            'scan: for ti in -200..=200 {
                for xi in -200..=200 {
                    let p = Point::minkowski(ti as f64 * step, xi as f64 * step);
                    let inside = fut.iter().all(|f| st.precedes(f, &p).unwrap()) && past.iter().all(|q| st.precedes(&p, q).unwrap());
                    if inside {
                        hit = true;
                        break 'scan;
                    }
                }
            }
            check(hit == got, || format!("region query {i}: grid oracle disagrees"))?;
            grid_checked += 1;
        }
    }
    let dir = std::env::temp_dir().join(format!("causalc-acceptance-{}", std::process::id()));
    fs::create_dir_all(&dir).map_err(err)?;
    for k in 0..20 {
        let n = rng.gen_range(3..8);
        let names: Vec<String> = (0..n).map(|i| format!("e{i}")).collect();
        let mut rel: BTreeSet<(usize, usize)> = BTreeSet::new();
        for a in 0..n {
            for b in a + 1..n {
                if rng.gen_bool(0.3) {
                    rel.insert((a, b));
                }
            }
        }
        // close a cycle along a random increasing chain
        let len = rng.gen_range(2..=n.min(4));
        let mut chain: Vec<usize> = rand::seq::index::sample(&mut rng, n, len).into_vec();
        chain.sort();
        for w in chain.windows(2) {
            rel.insert((w[0], w[1]));
        }
        rel.insert((chain[len - 1], chain[0]));
        let json = serde_json::json!({
            "backend": "causal_set",
            "elements": names,
            "relations": rel.iter().map(|&(a, b)| [names[a].clone(), names[b].clone()]).collect::<Vec<_>>(),
        });
        let path = dir.join(format!("cyclic_{k}.json"));
        fs::write(&path, json.to_string()).map_err(err)?;
        check(io::load_spacetime(&path).is_err(), || format!("cyclic file {k} was accepted"))?;
    }
    let _ = fs::remove_dir_all(&dir);
    Ok(format!("1000 queries agree ({grid_checked} region queries also grid-checked), 20 cyclic files rejected"))
}

/// Criterion 8: Same coarse, different fine: one compiled circuit serves both.
fn coarse_not_fine() -> Outcome {
    let t = library::pbqc_task();
    let u = library::interior_free_pbqc_task();
    check(same_coarse(&t, &u).map_err(err)?, || "coarse signatures differ".into())?;
    check(!same_fine(&t, &u).map_err(err)?, || "fine signatures agree".into())?;
    let compiled: SpacetimeCircuit = remove_all_gates(&library::naive_pbqc_circuit()).map_err(err)?.circuit;
    for (label, task) in [("Minkowski", &t), ("causal set", &u)] {
        let moved = transfer(&compiled, task).map_err(err)?;
        check(task.accomplished_by(&moved).map_err(err)?, || format!("{label} task not accomplished"))?;
    }
    Ok("same_coarse=true, same_fine=false, one compiled circuit accomplishes both".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("gate removal preserves channels on 50 random circuits", random_compilation),
        ("transfer to same-coarse spacetimes accomplishes the task", transfer_after_compilation),
        ("two-layer example gate-removal trace", two_layer_trace),
        ("PBQC on an interior-free causal set", pbqc_empty_region),
        ("normal teleportation identity and keyless depolarization", normal_teleportation),
        ("port-based teleportation fidelities", pbt_fidelities),
        ("Minkowski queries and cyclic relation rejection", geometry_queries),
        ("same coarse / different fine PBQC witness", coarse_not_fine),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let res = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let took = start.elapsed();
        match res {
            Ok(detail) => println!("acceptance {} PASS  {name}: {detail} [{took:.1?}]", i + 1),
            Err(why) => {
                failed += 1;
                println!("acceptance {} FAIL  {name}: {why} [{took:.1?}]", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all 8 acceptance criteria passed");
}
