//! `qnet`: compile counter machines into queueing networks, simulate
//! networks, and check compiled networks against their machines.

mod probe;

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, Context};
use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use serde::Serialize;

use qnet_core::compile::{compile_scm, network_stats, normalize_loads};
use qnet_core::machine::{parse_cm, parse_scm, serialize_scm, MachineError};
use qnet_core::sim::{Observation, ProbeSchedule, SimError, SimState};
use qnet_core::verify::{audit_loads, verify_boundedness, verify_compiled, Boundedness, VerifyError, VerifyOptions, VerifyReport};
use qnet_core::{parse_network, serialize_network, ClassId, NetworkDoc, Rational};

use probe::ProbeSpec;

const USAGE: u8 = 1;
const INPUT: u8 = 2;
const MISMATCH: u8 = 3;
const LEMMA: u8 = 4;
const JOB_LIMIT: u8 = 5;
const ORACLE: u8 = 6;

#[derive(Parser)]
#[command(name = "qnet", version, about = "Deterministic queueing networks and the counter machines they simulate")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compile an SCM file into a network file.
    Compile {
        scm: PathBuf,
        /// Apply the load-normalizing rewrite.
        #[arg(long)]
        normalized: bool,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Turn a counter machine file into an SCM file.
    Cm2scm {
        cm: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Run a network and export its event trace and probes.
    Simulate {
        net: PathBuf,
        /// Horizon, as a rational such as 20, 2.5 or 7/3.
        #[arg(long)]
        until: Rational,
        /// Event trace CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Workload probe NAME:CLASS,...@CADENCE (repeatable).
        #[arg(long)]
        probe: Vec<ProbeSpec>,
        /// Probe CSV (standard output if omitted).
        #[arg(long)]
        probe_out: Option<PathBuf>,
        #[arg(long)]
        job_limit: Option<u64>,
    },
    /// Check a compiled SCM cycle by cycle against the machine.
    Verify {
        scm: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        cycles: u64,
        #[arg(long)]
        normalized: bool,
        /// JSON report.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Per-cycle CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        job_limit: Option<u64>,
    },
    /// Print the load factor of every server.
    Loads { net: PathBuf },
}

struct Fail {
    code: u8,
    err: anyhow::Error,
}

type Res<T = ()> = Result<T, Fail>;

fn fail<E: Into<anyhow::Error>>(code: u8) -> impl FnOnce(E) -> Fail {
    move |e| Fail { code, err: e.into() }
}

fn read(path: &Path) -> Res<String> {
    fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .map_err(fail(INPUT))
}

fn write(path: &Path, text: &str) -> Res {
    fs::write(path, text)
        .with_context(|| format!("cannot write {}", path.display()))
        .map_err(fail(INPUT))
}

fn distinct(input: &Path, outputs: &[Option<&PathBuf>]) -> Res {
    let mut seen = BTreeSet::from([input.to_path_buf()]);
    for p in outputs.iter().flatten() {
        if !seen.insert(p.to_path_buf()) {
            return Err(fail(USAGE)(anyhow!("{} is used twice", p.display())));
        }
    }
    Ok(())
}

fn sim_code(e: &SimError) -> u8 {
    match e {
        SimError::JobLimit { .. } => JOB_LIMIT,
        _ => INPUT,
    }
}

fn compile(scm: &Path, normalized: bool, output: &Path) -> Res {
    distinct(scm, &[Some(&output.to_path_buf())])?;
    let machine = parse_scm(&read(scm)?).map_err(fail(INPUT))?;
    let mut cn = compile_scm(&machine).map_err(fail(INPUT))?;
    if normalized {
        cn = normalize_loads(&cn).map_err(fail(INPUT))?;
    }
    write(output, &serialize_network(&cn.doc))?;
    let st = network_stats(&cn);
    eprintln!("{}: {} states, {} servers, {} classes", output.display(), cn.m(), st.servers, st.classes);
    Ok(())
}

fn cm2scm(cm: &Path, output: &Path) -> Res {
    distinct(cm, &[Some(&output.to_path_buf())])?;
    let machine = parse_cm(&read(cm)?).map_err(fail(INPUT))?;
    let scm = qnet_core::machine::cm_to_scm(&machine);
    write(output, &serialize_scm(&scm))
}

/// Class index for a directory key or a class id.
fn lookup(doc: &NetworkDoc, net: &qnet_core::Network, name: &str) -> Res<usize> {
    let id = doc.directory.get(name).cloned().unwrap_or_else(|| ClassId::new(name));
    net.class_idx(&id)
        .ok_or_else(|| fail(INPUT)(anyhow!("unknown class {name:?}")))
}

fn probe_times(probes: &[ProbeSpec], until: Rational) -> Vec<Rational> {
    let mut times = BTreeSet::new();
    for p in probes {
        let mut t = Rational::ZERO;
        while t <= until {
            times.insert(t);
            t += p.cadence;
        }
    }
    times.into_iter().collect()
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    path: &Path,
    until: Rational,
    trace: Option<&PathBuf>,
    probes: &[ProbeSpec],
    probe_out: Option<&PathBuf>,
    job_limit: Option<u64>,
) -> Res {
    distinct(path, &[trace, probe_out])?;
    if until.is_negative() {
        return Err(fail(USAGE)(anyhow!("--until must not be negative")));
    }
    let doc = parse_network(&read(path)?).map_err(fail(INPUT))?;
    let net = Arc::new(doc.spec.clone().validate().map_err(fail(INPUT))?);
    let sets: Vec<Vec<usize>> = probes
        .iter()
        .map(|p| p.classes.iter().map(|c| lookup(&doc, &net, c)).collect())
        .collect::<Res<_>>()?;
    let mut columns: Vec<usize> = Vec::new();
    for c in sets.iter().flatten() {
        if !columns.contains(c) {
            columns.push(*c);
        }
    }

    let mut sim = SimState::new(net.clone(), &doc.initial).map_err(|e| fail(sim_code(&e))(e))?;
    sim.set_job_limit(job_limit);

    let mut trace_w = trace.map(|_| csv::Writer::from_writer(Vec::new()));
    if let Some(w) = trace_w.as_mut() {
        w.write_record(["time", "time_decimal", "seq", "kind", "class", "server", "job"]).unwrap();
    }
    let mut probe_w = (!probes.is_empty()).then(|| csv::Writer::from_writer(Vec::new()));
    if let Some(w) = probe_w.as_mut() {
        let mut header = vec!["time".to_string(), "class".into(), "queue_len".into()];
        header.extend(probes.iter().map(|p| format!("workload_{}", p.name)));
        w.write_record(&header).unwrap();
    }

    let schedule = if probes.is_empty() {
        ProbeSchedule::None
    } else {
        ProbeSchedule::at(probe_times(probes, until))
    };
    let mut observer = |o: &Observation<'_>| {
        if let Some(w) = trace_w.as_mut() {
            for e in o.events {
                w.write_record([
                    e.time.to_string(),
                    e.time.to_decimal_string(6),
                    e.seq.to_string(),
                    e.kind.as_str().to_string(),
                    net.class(e.class).id.to_string(),
                    net.server(e.server).id.to_string(),
                    e.job.to_string(),
                ])
                .unwrap();
            }
        }
        if let Some(w) = probe_w.as_mut() {
            let loads: Vec<String> = sets.iter().map(|s| o.post.workload(s).to_string()).collect();
            for &c in &columns {
                let mut row = vec![o.time.to_string(), net.class(c).id.to_string(), o.post.class_count(c).to_string()];
                row.extend(loads.iter().cloned());
                w.write_record(&row).unwrap();
            }
        }
    };
    let stats = sim
        .run_until(until, &schedule, &mut observer)
        .map_err(|e| fail(sim_code(&e))(e));

    // whatever was recorded is written even when the run stopped early
    if let (Some(path), Some(w)) = (trace, trace_w) {
        write(path, &String::from_utf8(w.into_inner().unwrap()).unwrap())?;
    }
    if let Some(w) = probe_w {
        let text = String::from_utf8(w.into_inner().unwrap()).unwrap();
        match probe_out {
            Some(path) => write(path, &text)?,
            None => print!("{text}"),
        }
    }
    let stats = stats?;
    eprintln!(
        "simulated to {}: {} instants, {} events, {} jobs present",
        until,
        stats.instants,
        stats.events,
        sim.total_jobs()
    );
    Ok(())
}

#[derive(Serialize)]
struct VerifyOutput<'a> {
    report: &'a VerifyReport,
    boundedness: Boundedness,
}

fn per_cycle_csv(r: &VerifyReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "cycle",
        "status_mn",
        "status_sn1",
        "status_sn2",
        "expected_state",
        "expected_z1",
        "expected_z2",
        "match",
        "jobs_at_start",
        "max_jobs_in_cycle",
    ])
    .unwrap();
    for (s, o) in r.reports.iter().zip(&r.occupancy) {
        w.write_record([
            s.cycle.to_string(),
            s.status_mn.to_string(),
            s.status_sn1.to_string(),
            s.status_sn2.to_string(),
            s.expected_state.to_string(),
            s.expected_z1.to_string(),
            s.expected_z2.to_string(),
            s.matched.to_string(),
            o.jobs_at_start.to_string(),
            o.max_jobs_in_cycle.to_string(),
        ])
        .unwrap();
    }
    String::from_utf8(w.into_inner().unwrap()).unwrap()
}

fn verify(scm: &Path, cycles: u64, normalized: bool, output: Option<&PathBuf>, csv_out: Option<&PathBuf>, job_limit: Option<u64>) -> Res {
    distinct(scm, &[output, csv_out])?;
    let machine = parse_scm(&read(scm)?).map_err(|e| match e {
        MachineError::Parse { .. } => fail(INPUT)(e),
        // a well-formed file describing an unusable machine
        _ => fail(ORACLE)(e),
    })?;
    let mut cn = compile_scm(&machine).map_err(fail(INPUT))?;
    if normalized {
        cn = normalize_loads(&cn).map_err(fail(INPUT))?;
    }
    let report = verify_compiled(&machine, &cn, cycles, VerifyOptions { job_limit }).map_err(|e| match &e {
        VerifyError::Oracle { .. } => fail(ORACLE)(e),
        VerifyError::Sim(s) => fail(sim_code(s))(e),
        _ => fail(INPUT)(e),
    })?;
    let boundedness = verify_boundedness(&report);
    if let Some(path) = output {
        let out = VerifyOutput {
            report: &report,
            boundedness: boundedness.clone(),
        };
        write(path, &(serde_json::to_string_pretty(&out).unwrap() + "\n"))?;
    }
    if let Some(path) = csv_out {
        write(path, &per_cycle_csv(&report))?;
    }

    let mut out = std::io::stdout().lock();
    let _ = match report.first_mismatch {
        None => writeln!(out, "{} cycles: network matches the machine", cycles),
        Some(t) => writeln!(out, "{} cycles: first mismatch at cycle {t}", cycles),
    };
    let _ = writeln!(out, "invariant violations: {}", report.violations.len());
    for v in report.violations.iter().take(10) {
        let _ = writeln!(out, "  {:?} cycle {} at {}: {}", v.lemma, v.cycle, v.time, v.detail);
    }
    let _ = writeln!(
        out,
        "largest counter {}; jobs at cycle starts within 2M + 1: {}; in-cycle excess {}",
        boundedness.max_counter,
        if boundedness.start_bound_holds { "yes" } else { "no" },
        boundedness.intra_cycle_constant
    );
    if boundedness.growing {
        let _ = writeln!(out, "job count grows every cycle: unbounded trend");
    }
    if report.first_mismatch.is_some() {
        Err(Fail {
            code: MISMATCH,
            err: anyhow!("status mismatch"),
        })
    } else if !report.violations.is_empty() {
        Err(Fail {
            code: LEMMA,
            err: anyhow!("invariant violations"),
        })
    } else {
        Ok(())
    }
}

fn loads(path: &Path) -> Res {
    let doc = parse_network(&read(path)?).map_err(fail(INPUT))?;
    let net = doc.spec.validate().map_err(fail(INPUT))?;
    let audit = audit_loads(&net);
    let width = audit.keys().map(|s| s.as_str().len()).max().unwrap_or(6).max(6);
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{:<width$}  {:>12}  {:>10}", "server", "load", "approx");
    for (s, a) in &audit {
        let flag = if a.below_one { "" } else { "  >= 1" };
        let _ = writeln!(out, "{:<width$}  {:>12}  {:>10}{flag}", s.as_str(), a.load.to_string(), a.load.to_decimal_string(4));
    }
    Ok(())
}

fn run(cli: Cli) -> Res {
    match cli.cmd {
        Cmd::Compile { scm, normalized, output } => compile(&scm, normalized, &output),
        Cmd::Cm2scm { cm, output } => cm2scm(&cm, &output),
        Cmd::Simulate {
            net,
            until,
            trace,
            probe,
            probe_out,
            job_limit,
        } => simulate(&net, until, trace.as_ref(), &probe, probe_out.as_ref(), job_limit),
        Cmd::Verify {
            scm,
            cycles,
            normalized,
            output,
            csv,
            job_limit,
        } => verify(&scm, cycles, normalized, output.as_ref(), csv.as_ref(), job_limit),
        Cmd::Loads { net } => loads(&net),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(USAGE),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.err);
            ExitCode::from(f.code)
        }
    }
}
