use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use equitel_core::channel::transmit;
use equitel_core::character::{
    a5_three_dim_characters, character_of_rep, monomial_check, ClassFunction, ClassStructure, Cyclotomic,
};
use equitel_core::fixtures;
use equitel_core::group::preset;
use equitel_core::numeric::TOL;
use equitel_core::oeb::{catalog_rep, discrete_catalog, nonexistence_certificate, table1 as build_table1};
use equitel_core::teleport::{dynamical_robustness_run, no_leakage_experiment, rf_teleport, Outcome};
use equitel_core::ueb::{
    binary_cover, commuting_hadamard, hadamard_ueb, lift_oeb, verify_equivariant, verify_ueb, MATCH_TOL,
};
use equitel_core::unitary::C64;
use equitel_core::{ComplexMatrix, Error, ProtocolSpec, PureState, Representation};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::output::{read_json, write_file, CliError, Report};
use crate::{Context, SpecSource};

type CmdResult = Result<Report, CliError>;

fn tolerances(ctx: &Context) -> Value {
    json!({ "tol": ctx.tol, "numeric": TOL, "phase_match": MATCH_TOL })
}

fn load_spec(source: &SpecSource) -> Result<(String, ProtocolSpec), CliError> {
    if let Some(path) = &source.spec {
        return Ok((path.display().to_string(), ProtocolSpec::from_json(&read_json(path)?)?));
    }
    let name = source.fixture.as_str();
    let parts: Vec<&str> = name.split(':').collect();
    let spec = match parts.as_slice() {
        ["z3"] => fixtures::z3_protocol()?,
        ["a4"] => fixtures::a4_protocol()?,
        ["binary-tetrahedral"] => fixtures::binary_tetrahedral_protocol()?,
        ["catalog", tag, index] => {
            let index = index.parse().map_err(|_| CliError::Usage(format!("bad catalog index in `{name}`")))?;
            fixtures::catalog_protocol(tag, index)?
        }
        ["hadamard", group] => fixtures::hadamard_protocol(group)?,
        _ => return Err(CliError::Usage(format!("unknown fixture `{name}`"))),
    };
    Ok((name.to_string(), spec))
}

fn element(spec: &ProtocolSpec, label: &str) -> Result<usize, CliError> {
    spec.rho()
        .group()
        .find(label)
        .ok_or_else(|| CliError::Usage(format!("`{label}` is not an element of {}", spec.rho().group().name())))
}

fn input_state(spec: &str, n: usize, seed: u64) -> Result<PureState, CliError> {
    if spec == "random" {
        return Ok(PureState::random(n, &mut ChaCha8Rng::seed_from_u64(seed)));
    }
    if let Some(k) = spec.strip_prefix("basis:") {
        let k: usize = k.parse().map_err(|_| CliError::Usage(format!("bad basis index `{k}`")))?;
        if k >= n {
            return Err(CliError::Usage(format!("basis index {k} out of range for dimension {n}")));
        }
        return Ok(PureState::basis(n, k));
    }
    let pairs: Vec<[f64; 2]> = serde_json::from_value(read_json(Path::new(spec))?)?;
    if pairs.len() != n {
        return Err(CliError::Core(Error::DimensionMismatch(format!(
            "state has {} amplitudes, protocol needs {n}",
            pairs.len()
        ))));
    }
    Ok(PureState::normalized(pairs.iter().map(|[re, im]| C64::new(*re, *im)).collect())?)
}

pub fn table1(ctx: &Context, samples: usize, trials: usize) -> CmdResult {
    let report = build_table1(samples, trials, ctx.seed)?;
    let worst = report
        .rows
        .iter()
        .flat_map(|r| &r.entries)
        .map(|e| e.max_orthogonality_residual.max(e.max_closure_residual))
        .fold(0.0, f64::max);
    let mut csv = String::from("image_class,orbit_type,kind,verified,distinct,max_residual\n");
    for row in &report.rows {
        for e in &row.entries {
            let kind = serde_json::to_value(e.kind)?;
            let distinct = e.distinct.map(|d| d.to_string()).unwrap_or_default();
            writeln!(
                csv,
                "{},\"{}\",{},{},{},{:e}",
                row.image_class,
                e.orbit_type,
                kind.as_str().unwrap_or_default(),
                e.verified,
                distinct,
                e.max_orthogonality_residual.max(e.max_closure_residual)
            )
            .unwrap();
        }
        for r in &row.refusals {
            writeln!(csv, "{},none,refused,0,,", r.group).unwrap();
        }
    }
    let md = report.to_markdown();
    let json = json!({ "command": "table1", "seed": ctx.seed, "tolerances": tolerances(ctx), "report": report, "max_residual": worst });
    Ok(Report::new(json, worst < ctx.tol.max(TOL)).with_md(md).with_csv(csv))
}

pub fn catalog(ctx: &Context, tag: &str, ball_csv: Option<&Path>) -> CmdResult {
    let list = match discrete_catalog(tag) {
        Ok(list) => list,
        Err(Error::InvalidInput(msg)) => {
            // groups with no solutions get a structured refusal
            return match nonexistence_certificate(tag, 0, ctx.seed) {
                Ok(refusal) => Ok(Report::refusal(json!({ "command": "catalog", "group": tag, "refusal": refusal }))),
                Err(_) => Err(CliError::Usage(msg)),
            };
        }
        Err(e) => return Err(e.into()),
    };
    let mut csv = String::from("entry,family,index,x,y,z\n");
    for (k, o) in list.iter().enumerate() {
        for line in o.ball_csv().lines().skip(1) {
            writeln!(csv, "{k},{},{line}", o.family()).unwrap();
        }
    }
    if let Some(path) = ball_csv {
        write_file(path, &csv)?;
    }
    let entries: Vec<Value> = list.iter().map(|o| o.to_json()).collect();
    let mut md = String::from("| # | family | orbit type | max residual |\n|---|---|---|---|\n");
    for (k, o) in list.iter().enumerate() {
        writeln!(
            md,
            "| {k} | {} | {:?} | {:.1e} |",
            o.family(),
            equitel_core::oeb::orbit_type(o),
            o.orthogonality_residual().max(o.closure_residual())
        )
        .unwrap();
    }
    let json = json!({
        "command": "catalog",
        "group": tag,
        "seed": ctx.seed,
        "tolerances": tolerances(ctx),
        "count": list.len(),
        "distinct": equitel_core::oeb::count_distinct(&list),
        "entries": entries,
    });
    Ok(Report::new(json, true).with_md(md).with_csv(csv))
}

pub fn verify(ctx: &Context, ueb_path: &Path, rep_path: Option<&Path>) -> CmdResult {
    let doc = read_json(ueb_path)?;
    let raw = doc.get("elements").cloned().ok_or_else(|| CliError::Usage("UEB file needs `elements`".into()))?;
    let elements: Vec<ComplexMatrix> = serde_json::from_value(raw)?;
    let rep = rep_path.map(|p| Representation::from_json(&read_json(p)?).map_err(CliError::from)).transpose()?;
    let mut json = json!({
        "command": "verify",
        "file": ueb_path.display().to_string(),
        "seed": ctx.seed,
        "tolerances": tolerances(ctx),
    });
    let fail = |mut json: Value, stage: &str, e: Error| -> CmdResult {
        json["valid"] = json!(false);
        json["stage"] = json!(stage);
        json["violation"] = json!(e.to_string());
        Ok(Report::new(json, false))
    };
    let ueb = match verify_ueb(elements) {
        Ok(u) => u,
        Err(e @ (Error::NotAUeb(_) | Error::NotUnitary { .. } | Error::DimensionMismatch(_))) => {
            return fail(json, "unitary_error_basis", e)
        }
        Err(e) => return Err(e.into()),
    };
    json["ueb_residual"] = json!(ueb.residual());
    if ueb.residual() > ctx.tol.max(TOL) {
        return fail(json, "tolerance", Error::NotAUeb(format!("residual {:e} exceeds {:e}", ueb.residual(), ctx.tol)));
    }
    if let Some(rep) = rep {
        match verify_equivariant(&ueb, &rep) {
            Ok(e) => json["equivariant"] = e.to_json(),
            Err(e @ (Error::NotEquivariant(_) | Error::DimensionMismatch(_))) => return fail(json, "equivariance", e),
            Err(e) => return Err(e.into()),
        }
    }
    json["valid"] = json!(true);
    Ok(Report::new(json, true))
}

pub fn lift(ctx: &Context, tag: &str, index: usize) -> CmdResult {
    let list = discrete_catalog(tag)?;
    let oeb = list.get(index).ok_or_else(|| CliError::Usage(format!("{tag} has {} catalog entries", list.len())))?;
    let cover = binary_cover(&catalog_rep(tag)?)?;
    let lifted = lift_oeb(oeb, &cover)?;
    let json = json!({
        "command": "lift",
        "seed": ctx.seed,
        "tolerances": tolerances(ctx),
        "oeb": oeb.to_json(),
        "cover": cover.to_json(),
        "ueb": lifted.to_json(),
    });
    Ok(Report::new(json, lifted.residual() < ctx.tol.max(MATCH_TOL)))
}

pub fn hadamard(ctx: &Context, n: usize, group: Option<&str>) -> CmdResult {
    let h = match commuting_hadamard(n) {
        Ok(h) => h,
        Err(Error::Refused(reason)) => {
            return Ok(Report::refusal(json!({
                "command": "hadamard",
                "n": n,
                "refused": true,
                "reason": reason,
                "bound": { "lower": (n as f64 - 2.0) / n as f64, "required": 1.0 / (n as f64).sqrt() },
            })))
        }
        Err(e) => return Err(e.into()),
    };
    let name = group.map(str::to_string).unwrap_or_else(|| format!("S{n}"));
    let rho = Representation::natural(preset(&name)?)?;
    if rho.dim() != n {
        return Err(CliError::Usage(format!("{name} acts on {} points, not {n}", rho.dim())));
    }
    let eueb = hadamard_ueb(&rho, &h)?;
    let json = json!({
        "command": "hadamard",
        "n": n,
        "group": name,
        "seed": ctx.seed,
        "tolerances": tolerances(ctx),
        "hadamard": h,
        "ueb": eueb.to_json(),
    });
    Ok(Report::new(json, true))
}

pub fn channel(ctx: &Context, source: &SpecSource, message: Option<usize>, g: Option<&str>) -> CmdResult {
    let (name, spec) = load_spec(source)?;
    let ch = spec.channel();
    let group = ch.group();
    let messages: Vec<usize> = match message {
        Some(m) if m < ch.len() => vec![m],
        Some(m) => return Err(CliError::Usage(format!("message {m} out of range for {} messages", ch.len()))),
        None => (0..ch.len()).collect(),
    };
    let elements: Vec<usize> = match g {
        Some(label) => vec![element(&spec, label)?],
        None => group.elements().collect(),
    };
    let tau_inv = spec.eueb().tau_inverse();
    let mut transcripts = Vec::new();
    let mut csv = String::from("message,g,wire,received\n");
    let mut consistent = true;
    for &g in &elements {
        for &m in &messages {
            let t = transmit(ch, m, g, ctx.seed)?;
            consistent &= t.received == tau_inv.act(g, m);
            let wire: Vec<String> = t.wire.iter().map(usize::to_string).collect();
            writeln!(csv, "{m},{},{},{}", t.g, wire.join(" "), t.received).unwrap();
            transcripts.push(serde_json::to_value(&t)?);
        }
    }
    let json = json!({
        "command": "channel",
        "protocol": name,
        "seed": ctx.seed,
        "channel": ch.to_json(),
        "reads_tau_inverse": consistent,
        "transcripts": transcripts,
    });
    Ok(Report::new(json, consistent).with_csv(csv))
}

pub fn teleport(
    ctx: &Context,
    source: &SpecSource,
    g: Option<&str>,
    psi: &str,
    outcome: Option<usize>,
    states: usize,
) -> CmdResult {
    let (name, spec) = load_spec(source)?;
    let n = spec.dim();
    let outcome_of = |seed| outcome.map(Outcome::Forced).unwrap_or(Outcome::Sampled(seed));
    if let Some(label) = g {
        let g = element(&spec, label)?;
        let state = input_state(psi, n, ctx.seed)?;
        let t = rf_teleport(&spec, &state, g, outcome_of(ctx.seed), ctx.seed)?;
        let passed = t.fidelity >= 1.0 - ctx.tol;
        let json = json!({
            "command": "teleport",
            "protocol": name,
            "seed": ctx.seed,
            "tolerances": tolerances(ctx),
            "transcript": t.to_json(),
            "passed": passed,
        });
        return Ok(Report::new(json, passed));
    }
    // sweep: every misalignment, every outcome, `states` seeded inputs
    let group = spec.rho().group();
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let inputs: Vec<PureState> = if psi == "random" {
        (0..states).map(|_| PureState::random(n, &mut rng)).collect()
    } else {
        vec![input_state(psi, n, ctx.seed)?]
    };
    let outcomes: Vec<usize> = match outcome {
        Some(i) => vec![i],
        None => (0..n * n).collect(),
    };
    let mut rows = Vec::new();
    let mut md = String::from("| g | runs | min fidelity |\n|---|---|---|\n");
    let mut csv = String::from("g,runs,min_fidelity\n");
    let mut overall = f64::INFINITY;
    for g in group.elements() {
        let mut min = f64::INFINITY;
        for state in &inputs {
            for &i in &outcomes {
                let t = rf_teleport(&spec, state, g, Outcome::Forced(i), ctx.seed)?;
                min = min.min(t.fidelity);
            }
        }
        let runs = inputs.len() * outcomes.len();
        overall = overall.min(min);
        writeln!(md, "| {} | {runs} | {min:.12} |", group.label(g)).unwrap();
        writeln!(csv, "{},{runs},{min:.12}", group.label(g)).unwrap();
        rows.push(json!({ "g": group.label(g), "runs": runs, "min_fidelity": min }));
    }
    let passed = overall >= 1.0 - ctx.tol;
    let json = json!({
        "command": "teleport",
        "protocol": name,
        "seed": ctx.seed,
        "tolerances": tolerances(ctx),
        "states": inputs.len(),
        "per_g": rows,
        "min_fidelity": overall,
        "passed": passed,
    });
    Ok(Report::new(json, passed).with_md(md).with_csv(csv))
}

pub fn dr_test(ctx: &Context, source: &SpecSource, states: usize) -> CmdResult {
    let (name, spec) = load_spec(source)?;
    let n = spec.dim();
    let group = spec.rho().group();
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let inputs: Vec<PureState> = (0..states).map(|_| PureState::random(n, &mut rng)).collect();
    let mut csv = String::from("g_send,g_receive,min_fidelity\n");
    let mut pairs = Vec::new();
    let mut overall = f64::INFINITY;
    for gs in group.elements() {
        for gr in group.elements() {
            let mut min = f64::INFINITY;
            for state in &inputs {
                for i in 0..n * n {
                    let t = dynamical_robustness_run(&spec, state, gs, gr, Outcome::Forced(i), ctx.seed)?;
                    min = min.min(t.fidelity);
                }
            }
            overall = overall.min(min);
            writeln!(csv, "{},{},{min:.12}", group.label(gs), group.label(gr)).unwrap();
            pairs.push(json!({ "g_send": group.label(gs), "g_receive": group.label(gr), "min_fidelity": min }));
        }
    }
    let passed = overall >= 1.0 - ctx.tol;
    let json = json!({
        "command": "dr-test",
        "protocol": name,
        "seed": ctx.seed,
        "tolerances": tolerances(ctx),
        "states": states,
        "pairs": pairs,
        "min_fidelity": overall,
        "passed": passed,
    });
    Ok(Report::new(json, passed).with_csv(csv))
}

pub fn leakage(ctx: &Context, source: &SpecSource, samples: usize, forced: Option<usize>, max_tv: f64) -> CmdResult {
    let (name, spec) = load_spec(source)?;
    let report = no_leakage_experiment(&spec, samples, ctx.seed, forced)?;
    // a forced outcome is a negative control, so it is reported, not judged
    let passed = forced.is_some() || report.max_tv < max_tv;
    let mut csv = String::from("g,wire,frequency\n");
    for (g, row) in &report.per_g {
        for (wire, f) in row {
            writeln!(csv, "{g},{wire},{f}").unwrap();
        }
    }
    let json = json!({
        "command": "leakage",
        "protocol": name,
        "seed": ctx.seed,
        "tolerances": { "max_tv": max_tv },
        "forced": forced,
        "report": report,
        "passed": passed,
    });
    Ok(Report::new(json, passed).with_csv(csv))
}

fn shifted_by_trivial(chi: &ClassFunction) -> Result<ClassFunction, CliError> {
    let m = chi.structure().modulus;
    let values = chi
        .exact_values()
        .ok_or_else(|| CliError::Usage("character is not exact".into()))?
        .iter()
        .map(|v| v.clone() - Cyclotomic::integer(m, 1))
        .collect();
    Ok(ClassFunction::exact(chi.structure().clone(), values))
}

pub fn monomial(ctx: &Context, group_name: &str, rep: &str) -> CmdResult {
    let (group, chi) = match rep {
        "3d-irrep" | "3d-irrep-conj" => {
            let group = preset(group_name)?;
            let s = Arc::new(ClassStructure::new(&group));
            let [a, b] = a5_three_dim_characters(&s)?;
            (group, if rep == "3d-irrep" { a } else { b })
        }
        "natural" | "standard" | "trivial" => {
            let group = preset(group_name)?;
            let chi = match rep {
                "trivial" => character_of_rep(&Representation::trivial(group.clone(), 1)),
                "natural" => character_of_rep(&Representation::natural(group.clone())?),
                _ => shifted_by_trivial(&character_of_rep(&Representation::natural(group.clone())?))?,
            };
            (group, chi)
        }
        path => {
            let r = Representation::from_json(&read_json(Path::new(path))?)?;
            (r.group().clone(), character_of_rep(&r))
        }
    };
    let verdict = monomial_check(&group, &chi)?;
    let json = json!({
        "command": "monomial-check",
        "group": group_name,
        "rep": rep,
        "seed": ctx.seed,
        "tolerances": tolerances(ctx),
        "feasible": verdict.result.is_feasible(),
        "verdict": verdict,
    });
    Ok(Report::new(json, true))
}
