// SPDX-License-Identifier: Apache-2.0

//! The JSON files under `data/` are the example library written out.

use std::path::PathBuf;

use causalc_core::task::{io, library};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

#[test]
fn data_files_match_the_library() {
    for ex in library::example_library() {
        if let Some(t) = &ex.task {
            let loaded = io::load_task(data(&format!("{}.task.json", ex.name))).unwrap();
            assert_eq!(&loaded, t, "{}", ex.name);
        }
        if let Some(c) = &ex.circuit {
            let loaded = io::load_circuit(data(&format!("{}.circuit.json", ex.name))).unwrap();
            assert_eq!(&loaded, c, "{}", ex.name);
        }
    }
}

#[test]
fn bundled_circuits_accomplish_their_tasks() {
    for ex in library::example_library() {
        if let (Some(t), Some(c)) = (&ex.task, &ex.circuit) {
            assert!(t.accomplished_by(c).unwrap(), "{}", ex.name);
        }
    }
}
