//! Subcommand bodies. Each validates everything first, then calls into the
//! library and serializes the result.

use std::collections::BTreeMap;

use graphcert::bell::{self, settings_code, MAX_BRUTE_FORCE_PARTIES};
use graphcert::certify::{self, Pipeline, Shots};
use graphcert::fidelity;
use graphcert::format::{format_float, to_report_json};
use graphcert::sim::OutcomeCounts;
use graphcert::{run_certification, LocalObservable};
use serde::Serialize;

use crate::config::{
    emit, resolve_format, resolve_grid, resolve_model, resolve_noise, resolve_shots,
    resolve_target, usage, ConfigFile, Failure, Format,
};
use crate::{BoundsArgs, CommonArgs, FidelityArgs, RunArgs, SweepArgs};

#[derive(Serialize)]
struct InequalityOutput<'a> {
    inequality: &'a bell::BellInequality,
    settings: Vec<[LocalObservable; 2]>,
    joint_settings: Vec<String>,
}

pub fn inequality(common: &CommonArgs, file: &ConfigFile) -> Result<(), Failure> {
    let target = resolve_target(common, file)?;
    resolve_format(common, file, &[Format::Json])?;
    let (b, m) = target.inequality()?;
    let out = InequalityOutput {
        inequality: &b,
        settings: (1..=b.parties()).map(|p| m.party(p)).collect(),
        joint_settings: bell::required_joint_settings(&b)
            .iter()
            .map(|s| settings_code(s))
            .collect(),
    };
    emit(common, file, &to_report_json(&out))?;
    Ok(())
}

pub fn certify(args: &RunArgs, file: &ConfigFile) -> Result<(), Failure> {
    let target = resolve_target(&args.common, file)?;
    let noise = resolve_noise(args.stats.noise.as_deref(), file)?;
    let (shots, seed) = resolve_shots(args.stats.exact, args.stats.shots, args.stats.seed, file)?;
    let format = resolve_format(&args.common, file, &[Format::Json, Format::Text])?;
    let report = run_certification(&target, &noise, shots, seed)?;
    let summary = report.summary();
    match format {
        Format::Text => {
            emit(&args.common, file, &format!("{summary}\n"))?;
        }
        _ => {
            if emit(&args.common, file, &report.to_json())? {
                println!("{summary}");
            } else {
                eprintln!("{summary}");
            }
        }
    }
    Ok(())
}

pub fn sweep(args: &SweepArgs, file: &ConfigFile) -> Result<(), Failure> {
    let target = resolve_target(&args.common, file)?;
    let model = resolve_model(args.noise.as_deref(), file)?;
    let grid = resolve_grid(args.grid.as_deref(), file)?;
    let (shots, seed) = resolve_shots(args.exact, args.shots, args.seed, file)?;
    let format = resolve_format(&args.common, file, &[Format::Csv, Format::Json])?;
    let result = certify::noise_sweep(&target, model, &grid, shots, seed)?;
    let text = match format {
        Format::Json => result.to_json(),
        _ => result.to_csv(),
    };
    emit(&args.common, file, &text)?;
    Ok(())
}

pub fn bounds(args: &BoundsArgs, file: &ConfigFile) -> Result<(), Failure> {
    let target = resolve_target(&args.common, file)?;
    let brute_force = args.brute_force || file.brute_force;
    if brute_force && target.qubit_count() > MAX_BRUTE_FORCE_PARTIES {
        return Err(usage(format!(
            "--brute-force supports at most {MAX_BRUTE_FORCE_PARTIES} parties, got {}",
            target.qubit_count()
        )));
    }
    let format = resolve_format(&args.common, file, &[Format::Text, Format::Json])?;
    let table = certify::bound_table(&target, brute_force)?;
    let text = match format {
        Format::Json => to_report_json(&table),
        _ => {
            let mut s = format!(
                "{} N={}\nbeta_c {}\nbeta_q {}\n",
                table.state_family.name(),
                table.qubits,
                format_float(table.bounds.classical),
                format_float(table.bounds.quantum)
            );
            if let Some(b) = table.bounds.nontrivial {
                s.push_str(&format!("beta_b {}\n", format_float(b)));
            }
            if let (Some(e), Some(agree)) = (table.enumerated_classical, table.agree) {
                s.push_str(&format!("beta_c_enumerated {}\n", format_float(e)));
                s.push_str(if agree { "AGREE\n" } else { "DISAGREE\n" });
            }
            s
        }
    };
    emit(&args.common, file, &text)?;
    Ok(())
}

#[derive(Serialize)]
struct FidelityOutput {
    state_family: bell::StateFamily,
    n: usize,
    noise: graphcert::NoiseSpec,
    shots: Shots,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    fidelity: certify::ReportEstimate,
    fidelity_direct: f64,
    terms: usize,
    joint_settings: usize,
}

pub fn fidelity(args: &FidelityArgs, file: &ConfigFile) -> Result<(), Failure> {
    let target = resolve_target(&args.common, file)?;
    let noise = resolve_noise(args.stats.noise.as_deref(), file)?;
    let (shots, seed) = resolve_shots(args.stats.exact, args.stats.shots, args.stats.seed, file)?;
    resolve_format(&args.common, file, &[Format::Json])?;
    let d = target.fidelity_decomposition()?;
    if args.decomposition || file.decomposition {
        emit(&args.common, file, &to_report_json(&d))?;
        return Ok(());
    }
    let ideal = target.ideal_state()?;
    let state = noise.apply(&ideal)?;
    let tallies = fidelity::measure_tallies(&d, &state, shots.as_option(), seed)?;
    let out = FidelityOutput {
        state_family: target.family(),
        n: target.qubit_count(),
        noise,
        shots,
        seed: shots.as_option().map(|_| seed),
        fidelity: fidelity::fidelity_from_counts(&d, &tallies)?.into(),
        fidelity_direct: fidelity::fidelity_exact(&state, &ideal)?,
        terms: d.terms().len(),
        joint_settings: d.joint_settings().len(),
    };
    emit(&args.common, file, &to_report_json(&out))?;
    Ok(())
}

#[derive(Serialize)]
struct SampledSetting {
    choices: String,
    observables: Vec<LocalObservable>,
    counts: BTreeMap<String, u64>,
}

#[derive(Serialize)]
struct SampleOutput {
    state_family: bell::StateFamily,
    n: usize,
    noise: graphcert::NoiseSpec,
    shots: u64,
    seed: u64,
    settings: Vec<SampledSetting>,
}

pub fn sample(args: &RunArgs, file: &ConfigFile) -> Result<(), Failure> {
    let target = resolve_target(&args.common, file)?;
    let noise = resolve_noise(args.stats.noise.as_deref(), file)?;
    let (shots, seed) = resolve_shots(args.stats.exact, args.stats.shots, args.stats.seed, file)?;
    let Shots::PerSetting(shots) = shots else {
        return Err(usage("sample needs --shots and --seed"));
    };
    resolve_format(&args.common, file, &[Format::Json])?;
    let pipeline = Pipeline::new(target.clone())?;
    let state = noise.apply(&pipeline.ideal)?;
    let n = target.qubit_count();
    let settings = bell::sample_counts(
        &pipeline.inequality,
        &pipeline.settings,
        &state,
        shots,
        seed,
    )?
    .into_iter()
    .map(|(choices, counts)| SampledSetting {
        choices: settings_code(&choices),
        counts: counts
            .counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(i, &c)| (OutcomeCounts::outcome_label(n, i), c))
            .collect(),
        observables: counts.setting,
    })
    .collect();
    let out = SampleOutput {
        state_family: target.family(),
        n,
        noise,
        shots,
        seed,
        settings,
    };
    emit(&args.common, file, &to_report_json(&out))?;
    Ok(())
}
