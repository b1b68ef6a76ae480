// SPDX-License-Identifier: Apache-2.0

//! `causalc`: validate, compile, simulate and compare spacetime circuits.
//!
//! Exit codes: 0 success or true, 1 false, 2 error.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use causalc_core::circuit::SpacetimeCircuit;
use causalc_core::compiler::{remove_all_gates, transfer};
use causalc_core::quantum::{channel_distance, matrix, DensityState, Leg};
use causalc_core::simulate::{effective_channel_with, Mode};
use causalc_core::task::{io, library, Task};
use causalc_core::teleport::{bell_pairs, pbt_fidelity, pbt_finite_send};
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "causalc", version, about = "Spacetime circuits and relativistic quantum tasks")]
struct Cli {
    /// Plain-text output instead of JSON.
    #[arg(long, global = true)]
    human: bool,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a circuit, task or spacetime file.
    Validate { file: PathBuf },
    /// Causal signature of a task, or of a circuit's input/output layout.
    Signature {
        file: PathBuf,
        #[arg(long, conflicts_with = "fine")]
        coarse: bool,
        #[arg(long)]
        fine: bool,
    },
    /// Remove every gate point.
    Compile {
        circuit: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Also write the step list.
        #[arg(long)]
        script: Option<PathBuf>,
        /// Print teleportation counts.
        #[arg(long)]
        resources: bool,
        /// Report the channel distance when port teleportation uses N ports.
        #[arg(long, value_name = "N")]
        physical_ports: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Effective channel of a circuit.
    Simulate {
        circuit: PathBuf,
        /// Print the Choi matrix instead of Kraus operators.
        #[arg(long)]
        choi: bool,
        #[command(flatten)]
        mode: ModeArgs,
    },
    /// Compare the effective channels of two circuits.
    Equiv {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Move a gate-free circuit onto a task's input and output points.
    Transfer {
        circuit: PathBuf,
        task: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Whether a circuit accomplishes a task.
    Accomplishes { circuit: PathBuf, task: PathBuf },
    /// Bundled examples.
    Examples {
        #[command(subcommand)]
        cmd: ExamplesCmd,
    },
    /// Port-based teleportation fidelity for one qubit.
    PbtFidelity {
        #[arg(long)]
        ports: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Haar-random inputs for the sampled estimate (up to 4 ports).
        #[arg(long, default_value_t = 20)]
        samples: usize,
    },
}

#[derive(Args)]
struct ModeArgs {
    /// Follow one run with keys drawn from this seed.
    #[arg(long, conflicts_with = "averaged")]
    seed: Option<u64>,
    /// Average over all keys (default).
    #[arg(long)]
    averaged: bool,
    /// Use N-port teleportation for every port teleport.
    #[arg(long, value_name = "N")]
    physical_ports: Option<usize>,
}

impl ModeArgs {
    fn mode(&self) -> Mode {
        match (self.physical_ports, self.seed) {
            (Some(ports), seed) => Mode::Physical { ports, seed: seed.unwrap_or(0) },
            (None, Some(seed)) => Mode::Sampled { seed },
            (None, None) => Mode::Averaged,
        }
    }
}

#[derive(Subcommand)]
enum ExamplesCmd {
    List,
    /// Write `<name>.task.json` and `<name>.circuit.json`, or print them.
    Emit {
        name: String,
        #[arg(short, long)]
        dir: Option<PathBuf>,
    },
}

/// What a command reports: a JSON value, its plain rendering and a verdict.
struct Report {
    json: Value,
    human: String,
    ok: bool,
}

impl Report {
    fn ok(json: Value, human: impl Into<String>) -> Self {
        Report { json, human: human.into(), ok: true }
    }
}

fn load_circuit(p: &Path) -> Result<SpacetimeCircuit> {
    Ok(io::load_circuit(p)?)
}

fn load_task(p: &Path) -> Result<Task> {
    Ok(io::load_task(p)?)
}

fn has_key(p: &Path, key: &str) -> Result<bool> {
    let v: Value = io::load(p)?;
    Ok(v.get(key).is_some())
}

fn validate(file: &Path) -> Result<Report> {
    if has_key(file, "points")? {
        let circ = load_circuit(file)?;
        let rep = circ.validate();
        let issues: Vec<String> = rep.issues.iter().map(ToString::to_string).collect();
        let human = if issues.is_empty() { "valid circuit".to_string() } else { issues.join("\n") };
        return Ok(Report { json: json!({"kind": "circuit", "valid": rep.is_valid(), "issues": rep.issues}), human, ok: rep.is_valid() });
    }
    if has_key(file, "target")? {
        let task = load_task(file)?;
        return Ok(match task.validate() {
            Ok(()) => Report::ok(json!({"kind": "task", "valid": true}), "valid task"),
            Err(e) => Report { json: json!({"kind": "task", "valid": false, "issues": [e.to_string()]}), human: e.to_string(), ok: false },
        });
    }
    let st = io::load_spacetime(file)?;
    Ok(Report::ok(json!({"kind": "spacetime", "backend": st.backend_name(), "valid": true}), "valid spacetime"))
}

fn task_or_circuit(file: &Path) -> Result<Task> {
    if has_key(file, "points")? {
        Ok(Task::from_circuit(&load_circuit(file)?, 1e-8)?)
    } else {
        load_task(file)
    }
}

fn bits(row: &[bool]) -> String {
    row.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

fn signature(file: &Path, fine: bool) -> Result<Report> {
    let task = task_or_circuit(file)?;
    if fine {
        let sig = task.fine_signature()?;
        let human = sig
            .entries
            .iter()
            .map(|e| format!("{:?} {:?} {}", e.inputs, e.outputs, if e.nonempty { "nonempty" } else { "empty" }))
            .collect::<Vec<_>>()
            .join("\n");
        Ok(Report::ok(serde_json::to_value(&sig)?, human))
    } else {
        let sig = task.coarse_signature()?;
        let human = sig.matrix.iter().map(|r| bits(r)).collect::<Vec<_>>().join("\n");
        Ok(Report::ok(serde_json::to_value(&sig)?, human))
    }
}

fn compile(circuit: &Path, output: &Path, script: Option<&Path>, resources: bool, ports: Option<usize>, seed: u64) -> Result<Report> {
    let circ = load_circuit(circuit)?;
    let out = remove_all_gates(&circ)?;
    io::save(output, &out.circuit).with_context(|| format!("writing {}", output.display()))?;
    if let Some(p) = script {
        io::save(p, &out.script).with_context(|| format!("writing {}", p.display()))?;
    }
    let r = &out.resources;
    let mut json = json!({"output": output, "steps": out.script.steps.len()});
    let mut human = format!("wrote {} ({} steps)", output.display(), out.script.steps.len());
    if resources {
        json["resources"] = serde_json::to_value(r)?;
        human.push_str(&format!(
            "\n{:<22}{:>6}\n{:<22}{:>6}\n{:<22}{:>6}\n{:<22}{:>6}\n{:<22}{:>6}",
            "normal teleports", r.normal_teleports,
            "port teleports", r.port_teleports,
            "max port depth", r.max_port_depth,
            "Bell pairs (ideal)", r.bell_pairs_ideal,
            "classical broadcasts", r.classical_broadcasts,
        ));
    }
    if let Some(ports) = ports {
        let ideal = effective_channel_with(&circ, Mode::Averaged)?;
        let phys = effective_channel_with(&out.circuit, Mode::Physical { ports, seed })?;
        let d = channel_distance(&ideal, &phys)?;
        json["physical"] = json!({"ports": ports, "seed": seed, "choi_distance": d});
        human.push_str(&format!("\nChoi distance with {ports}-port teleportation: {d:.3e}"));
    }
    Ok(Report::ok(json, human))
}

fn simulate(circuit: &Path, choi: bool, mode: Mode) -> Result<Report> {
    let ch = effective_channel_with(&load_circuit(circuit)?, mode)?;
    if choi {
        let j = ch.choi();
        let rows = matrix::serde_cmatrix::to_rows(&j.matrix);
        let json = json!({"d_in": j.d_in, "d_out": j.d_out, "choi": rows});
        let human = format!("Choi matrix ({}x{}):\n{:.4}", j.matrix.nrows(), j.matrix.ncols(), j.matrix);
        Ok(Report::ok(json, human))
    } else {
        let human = format!("channel {} -> {} qubits, {} Kraus operators", ch.in_legs.len(), ch.out_legs.len(), ch.kraus.len());
        Ok(Report::ok(serde_json::to_value(&ch)?, human))
    }
}

fn equiv(a: &Path, b: &Path, tol: f64) -> Result<Report> {
    let x = effective_channel_with(&load_circuit(a)?, Mode::Averaged)?;
    let y = effective_channel_with(&load_circuit(b)?, Mode::Averaged)?;
    let d = channel_distance(&x, &y)?;
    let eq = d <= tol;
    Ok(Report { json: json!({"equivalent": eq, "choi_distance": d, "tol": tol}), human: format!("{} (distance {d:.3e})", if eq { "equivalent" } else { "different" }), ok: eq })
}

fn run_transfer(circuit: &Path, task: &Path, output: Option<&Path>) -> Result<Report> {
    let (circ, task) = (load_circuit(circuit)?, load_task(task)?);
    let moved = transfer(&circ, &task)?;
    match output {
        Some(p) => {
            io::save(p, &moved).with_context(|| format!("writing {}", p.display()))?;
            Ok(Report::ok(json!({"output": p}), format!("wrote {}", p.display())))
        }
        None => Ok(Report::ok(serde_json::to_value(&moved)?, io::to_json(&moved))),
    }
}

fn accomplishes(circuit: &Path, task: &Path) -> Result<Report> {
    let (circ, task) = (load_circuit(circuit)?, load_task(task)?);
    let ch = effective_channel_with(&circ, Mode::Averaged)?;
    let ok = task.accomplished_by(&circ)?;
    let d = task.distance(&ch)?;
    Ok(Report { json: json!({"accomplished": ok, "distance": d, "tol": task.tol}), human: format!("{} (distance {d:.3e})", if ok { "accomplished" } else { "not accomplished" }), ok })
}

fn examples(cmd: &ExamplesCmd) -> Result<Report> {
    match cmd {
        ExamplesCmd::List => {
            let lib = library::example_library();
            let json: Vec<Value> = lib
                .iter()
                .map(|e| json!({"name": e.name, "title": e.title, "task": e.task.is_some(), "circuit": e.circuit.is_some()}))
                .collect();
            let human = lib.iter().map(|e| format!("{:<16}{}", e.name, e.title)).collect::<Vec<_>>().join("\n");
            Ok(Report::ok(Value::Array(json), human))
        }
        ExamplesCmd::Emit { name, dir } => {
            let Some(ex) = library::example(name) else { bail!("unknown example `{name}`") };
            match dir {
                Some(dir) => {
                    std::fs::create_dir_all(dir)?;
                    let mut written = Vec::new();
                    if let Some(t) = &ex.task {
                        let p = dir.join(format!("{name}.task.json"));
                        io::save(&p, t)?;
                        written.push(p);
                    }
                    if let Some(c) = &ex.circuit {
                        let p = dir.join(format!("{name}.circuit.json"));
                        io::save(&p, c)?;
                        written.push(p);
                    }
                    let human = written.iter().map(|p| format!("wrote {}", p.display())).collect::<Vec<_>>().join("\n");
                    Ok(Report::ok(json!({"written": written}), human))
                }
                None => {
                    let json = json!({"name": ex.name, "task": ex.task, "circuit": ex.circuit});
                    Ok(Report::ok(json.clone(), serde_json::to_string_pretty(&json)?))
                }
            }
        }
    }
}

/// Average `⟨ψ|ρ_out|ψ⟩` over Haar-random inputs with a sampled port per run.
fn sampled_pbt_fidelity(ports: usize, samples: usize, rng: &mut ChaCha8Rng) -> Result<(f64, f64)> {
    use rand_distr::{Distribution, StandardNormal};
    let senders: Vec<String> = (0..ports).map(|i| format!("a{i}")).collect();
    let receivers: Vec<String> = (0..ports).map(|i| format!("b{i}")).collect();
    let pairs = bell_pairs(ports)?;
    let mut vals = Vec::with_capacity(samples);
    for _ in 0..samples {
        let mut g = || -> f64 { StandardNormal.sample(&mut *rng) };
        let v = [matrix::c(g(), g()), matrix::c(g(), g())];
        let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
        let psi = [v[0] / n, v[1] / n];
        let st = DensityState::pure(vec![Leg::new("psi", 1)], &psi)?.tensor(&pairs)?;
        let (out, _) = pbt_finite_send(&st, "psi", &senders, &receivers, "out", rng)?;
        let rho = out.reduce_to(&["out"])?;
        let m = rho.matrix();
        let f = (psi[0].conj() * m[(0, 0)] * psi[0] + psi[0].conj() * m[(0, 1)] * psi[1] + psi[1].conj() * m[(1, 0)] * psi[0] + psi[1].conj() * m[(1, 1)] * psi[1]).re;
        vals.push(f);
    }
    let mean = vals.iter().sum::<f64>() / samples as f64;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (samples.max(2) - 1) as f64;
    Ok((mean, (var / samples as f64).sqrt()))
}

fn pbt(ports: usize, seed: u64, samples: usize) -> Result<Report> {
    let exact = pbt_fidelity(ports)?;
    if ports > 4 || samples == 0 {
        return Ok(Report::ok(json!({"ports": ports, "fidelity": exact, "estimate": null}), format!("F({ports}) = {exact:.6}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (est, se) = sampled_pbt_fidelity(ports, samples, &mut rng)?;
    // the sampled quantity is the average fidelity (2F + 1) / 3
    let average = (2.0 * exact + 1.0) / 3.0;
    let agrees = (est - average).abs() <= 5.0 * se + 1e-9;
    let json = json!({
        "ports": ports, "fidelity": exact, "average_fidelity": average,
        "estimate": est, "stderr": se, "samples": samples, "seed": seed, "agrees": agrees,
    });
    let human = format!(
        "F({ports}) = {exact:.6}, average fidelity {average:.6}; sampled {est:.6} ± {se:.1e} over {samples} runs{}",
        if agrees { "" } else { " (MISMATCH)" }
    );
    Ok(Report { json, human, ok: agrees })
}

fn run(cli: &Cli) -> Result<Report> {
    match &cli.cmd {
        Command::Validate { file } => validate(file),
        Command::Signature { file, coarse: _, fine } => signature(file, *fine),
        Command::Compile { circuit, output, script, resources, physical_ports, seed } => {
            compile(circuit, output, script.as_deref(), *resources, *physical_ports, *seed)
        }
        Command::Simulate { circuit, choi, mode } => simulate(circuit, *choi, mode.mode()),
        Command::Equiv { a, b, tol } => equiv(a, b, *tol),
        Command::Transfer { circuit, task, output } => run_transfer(circuit, task, output.as_deref()),
        Command::Accomplishes { circuit, task } => accomplishes(circuit, task),
        Command::Examples { cmd } => examples(cmd),
        Command::PbtFidelity { ports, seed, samples } => pbt(*ports, *seed, *samples),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(rep) => {
            let text = if cli.human { rep.human } else { serde_json::to_string_pretty(&rep.json).expect("JSON values serialize") };
            // a closed pipe downstream is not an error of ours
            let _ = writeln!(std::io::stdout(), "{text}");
            ExitCode::from(if rep.ok { 0 } else { 1 })
        }
        Err(e) => {
            if cli.human {
                eprintln!("error: {e:#}");
            } else {
                println!("{}", json!({"error": format!("{e:#}")}));
            }
            ExitCode::from(2)
        }
    }
}
