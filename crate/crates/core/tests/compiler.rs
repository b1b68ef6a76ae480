// SPDX-License-Identifier: Apache-2.0

use causalc_core::compiler::{normalize_trace_line, remove_all_gates, transfer, CompileError};
use causalc_core::circuit::Step;
use causalc_core::quantum::channel_distance;
use causalc_core::simulate::{effective_channel, effective_channel_with, Mode};
use causalc_core::task::library;

fn assert_same_channel(a: &causalc_core::circuit::SpacetimeCircuit, b: &causalc_core::circuit::SpacetimeCircuit) {
    let (x, y) = (effective_channel(a).unwrap(), effective_channel(b).unwrap());
    let d = channel_distance(&x, &y).unwrap();
    assert!(d < 1e-9, "distance {d}");
}

#[test]
fn naive_pbqc_single_gate_script() {
    let circ = library::naive_pbqc_circuit();
    let out = remove_all_gates(&circ).unwrap();
    let ops: Vec<&str> = out.script.steps.iter().map(Step::name).collect();
    // c1 -> c2 normal, c2 -> c1 port, decrypt and apply at c1
    let core: Vec<&str> = ops.iter().copied().filter(|o| *o != "apply_channel" && *o != "emit_output").collect();
    assert_eq!(&core[..4], &["normal_teleport", "merge", "port_teleport", "normal_decrypt"]);
    assert!(out.circuit.is_gate_free());
    assert_same_channel(&circ, &out.circuit);
}

#[test]
fn two_layer_trace_and_channel() {
    let circ = library::two_layer_circuit();
    let out = remove_all_gates(&circ).unwrap();
    let golden: Vec<String> = include_str!("golden/two_layer_trace.txt").lines().map(normalize_trace_line).collect();
    let got: Vec<String> = out.trace.iter().map(|l| normalize_trace_line(l)).collect();
    assert_eq!(got, golden);
    let wanted = [
        "$I_1^{(c_1)}I_2$ at $c_2$",
        "${}^{(c_2)}(\\Lambda_{g_1}(I_1I_2))",
        "$^{(c_2,c_3,c_4)}(S_{in}(r_2))$ at $c_1$",
    ];
    let mut from = 0;
    for w in wanted {
        let w = normalize_trace_line(w);
        let pos = out.trace[from..].iter().position(|l| normalize_trace_line(l).contains(&w));
        let pos = pos.unwrap_or_else(|| panic!("`{w}` not found after line {from}"));
        from += pos + 1;
    }
    assert_same_channel(&circ, &out.circuit);
    let x = effective_channel(&circ).unwrap();
    let y = effective_channel_with(&out.circuit, Mode::Sampled { seed: 5 }).unwrap();
    assert!(channel_distance(&x, &y).unwrap() < 1e-9);
}

#[test]
fn summoning_compiles_and_transfers() {
    let ex = library::example("summoning").unwrap();
    let (task, circ) = (ex.task.unwrap(), ex.circuit.unwrap());
    assert!(task.accomplished_by(&circ).unwrap());
    let out = remove_all_gates(&circ).unwrap();
    assert_same_channel(&circ, &out.circuit);
    assert!(task.accomplished_by(&out.circuit).unwrap());
    let hard = library::hard_summoning_task();
    let moved = transfer(&out.circuit, &hard).unwrap();
    assert!(hard.accomplished_by(&moved).unwrap());
}

#[test]
fn gate_free_is_unchanged() {
    let circ = library::naive_pbqc_circuit();
    let compiled = remove_all_gates(&circ).unwrap().circuit;
    let again = remove_all_gates(&compiled).unwrap();
    assert!(again.script.steps.is_empty());
    assert_eq!(again.circuit, compiled);
}

#[test]
fn transfer_requires_gate_free_and_matching_coarse() {
    let circ = library::naive_pbqc_circuit();
    let target = library::interior_free_pbqc_task();
    assert!(matches!(transfer(&circ, &target), Err(CompileError::GatePointsPresent(_))));
    let compiled = remove_all_gates(&circ).unwrap().circuit;
    let moved = transfer(&compiled, &target).unwrap();
    assert!(target.accomplished_by(&moved).unwrap());
    let summoning = library::hard_summoning_task();
    assert!(matches!(transfer(&compiled, &summoning), Err(CompileError::CoarseMismatch(_))));
}
