//! Acceptance suite: one PASS/FAIL line per criterion, then a non-zero exit
//! if any criterion failed. Runs without the libtest harness so every line
//! is printed on every run.

use std::f64::consts::{FRAC_PI_2, PI};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

use equitel_core::channel::{compatible_channel_for, quotient_channel, rf_channel, transmit};
use equitel_core::character::{
    a5_three_dim_characters, character_of_rep, induce_character, linear_characters_of, monomial_candidates,
    monomial_check, Certificate, ClassFunction, ClassStructure, Cyclotomic, Feasibility,
};
use equitel_core::fixtures::{
    a4_protocol, arrow_channel, catalog_protocol, z3_group, z3_protocol, z3_rep, z3_twist, z3_ueb_matrices,
};
use equitel_core::group::{
    coset_gset, enumerate_subgroups, orbits, preset, right_cosets, stabilizer, FiniteGroup, GSet,
};
use equitel_core::oeb::{
    catalog_rep, discrete_catalog, table1, z2_oeb_22, z3_oeb_31, z3_polar_min, EquivariantOEB, Parity, SolutionKind,
};
use equitel_core::rotation::{are_orthogonal, compose, composite_angle, dot, q_map, su2_lift, Rotation};
use equitel_core::teleport::{
    dynamical_robustness_run, misaligned_conventional, no_leakage_experiment, rf_teleport, Outcome,
};
use equitel_core::ueb::{binary_cover, commuting_hadamard, hadamard_ueb, lift_oeb, verify_equivariant, verify_ueb};
use equitel_core::unitary::{
    bell_state, cis, invariant_entangled_state, ComplexMatrix, PureState, Representation, C64,
};
use equitel_core::Subgroup;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Fidelity threshold for every teleportation run.
const FIDELITY_TOL: f64 = 1e-9;
/// Orthogonality and equivariance residual bound for table reproduction.
const RESIDUAL_TOL: f64 = 1e-9;
/// Ball distance for figure fixtures.
const BALL_TOL: f64 = 1e-9;
/// Purity gap that counts as a mixed output.
const PURITY_GAP: f64 = 1e-3;
/// Leakage thresholds at `LEAKAGE_SAMPLES` samples.
const LEAKAGE_MAX_TV: f64 = 0.02;
const LEAKAGE_CONTROL_MIN_TV: f64 = 0.1;
const LEAKAGE_SAMPLES: usize = 100_000;
/// Invariance residual for entangled-state witnesses.
const WITNESS_TOL: f64 = 1e-9;
/// Random pairs in the rotation property checks.
const PROPERTY_PAIRS: usize = 10_000;

/// Average fidelity of conventional teleportation of `|+⟩` on the qubit Z3
/// fixture with a uniformly random misalignment. Frozen after the first
/// computation; the test recomputes it with an independent oracle.
const FROZEN_MISALIGNED_FIDELITY: f64 = 0.666_666_666_666_666_3;

type Check = Result<String, String>;
type Criterion = (u8, &'static str, fn() -> Check);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($fmt)+));
        }
    };
}

fn within(start: Instant, bound: Duration, what: &str) -> Result<Duration, String> {
    let took = start.elapsed();
    ensure!(took < bound, "{what} took {took:?}, bound {bound:?}");
    Ok(took)
}

fn random_states(n: usize, count: usize, seed: u64) -> Vec<PureState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| PureState::random(n, &mut rng)).collect()
}

fn contains(o: &EquivariantOEB, r: &Rotation) -> bool {
    o.elements().iter().any(|e| e.ball_distance(r) < BALL_TOL)
}

fn criterion_1() -> Check {
    let start = Instant::now();
    let rho = z3_rep();
    let a = rho.group().find("a").unwrap();
    let ueb = verify_ueb(z3_ueb_matrices()).map_err(|e| e.to_string())?;
    let eueb = verify_equivariant(&ueb, &rho).map_err(|e| e.to_string())?;
    // (0)(1 3 2): 1 → 3 → 2 → 1
    ensure!(eueb.tau().permutation(a) == [0, 3, 1, 2], "τ(·,a) = {:?}", eueb.tau().permutation(a));
    // conjugation table, recomputed from the matrices
    let r = rho.image(a);
    for (i, u) in ueb.elements().iter().enumerate() {
        let conj = &(&r.dagger() * u) * r;
        let j = eueb.tau().act(a, i);
        let z = conj.scalar_multiple_of(ueb.element(j), 1e-12);
        ensure!(z.is_some_and(|z| (z.norm() - 1.0).abs() < 1e-12), "ρ(a)†U_{i}ρ(a) is not a phase times U_{j}");
    }
    let arrow = arrow_channel().map_err(|e| e.to_string())?;
    ensure!(arrow.sigma().permutation(a) == [0, 2, 3, 1], "arrow σ(a) = {:?}", arrow.sigma().permutation(a));
    let spec = z3_protocol().map_err(|e| e.to_string())?;
    let mut worst = f64::INFINITY;
    let mut runs = 0;
    for psi in random_states(2, 100, 1) {
        for g in rho.group().elements() {
            for i in 0..4 {
                let t = rf_teleport(&spec, &psi, g, Outcome::Forced(i), 0).map_err(|e| e.to_string())?;
                worst = worst.min(t.fidelity);
                runs += 1;
            }
        }
    }
    ensure!(worst >= 1.0 - FIDELITY_TOL, "worst fidelity {worst}");
    let took = within(start, Duration::from_secs(1), "criterion 1")?;
    Ok(format!("τ(·,a) = (0)(1 3 2), {runs} runs, min fidelity {worst:.15}, {took:.2?}"))
}

fn criterion_2() -> Check {
    let start = Instant::now();
    let report = table1(50, 200, 2024).map_err(|e| e.to_string())?;
    let mut problems = Vec::new();
    let multiset = |s: &str| {
        let mut v: Vec<u32> = s.chars().filter_map(|c| c.to_digit(10)).collect();
        v.sort_unstable();
        v
    };
    let expect_isolated = |class: &str, wanted: &[(&str, usize)], problems: &mut Vec<String>| {
        let Some(row) = report.row(class) else {
            problems.push(format!("row {class} missing"));
            return;
        };
        for (ty, count) in wanted {
            match row.entries.iter().find(|e| multiset(&e.orbit_type) == multiset(ty)) {
                Some(e) if e.kind == SolutionKind::Isolated && e.distinct == Some(*count) => {}
                Some(e) => problems.push(format!("{class} {ty}: {:?} distinct sets, expected {count}", e.distinct)),
                None => problems.push(format!("{class} {ty}: no solutions found")),
            }
        }
        if row.entries.len() != wanted.len() {
            problems.push(format!("{class}: {} orbit types, expected {}", row.entries.len(), wanted.len()));
        }
    };
    expect_isolated("D2", &[("(1,1,1,1)", 1), ("(2,1,1)", 6), ("(2,2)", 3), ("(4)", 2)], &mut problems);
    expect_isolated("D3", &[("(3,1)", 6)], &mut problems);
    expect_isolated("D4", &[("(2,1,1)", 2), ("(2,2)", 2)], &mut problems);
    expect_isolated("Tetrahedral (A4)", &[("(4)", 2)], &mut problems);
    expect_isolated("Octahedral (S4)", &[("(1,3)", 1)], &mut problems);
    for (class, types) in [
        ("Trivial", vec!["(1,1,1,1)"]),
        ("Z2", vec!["(1,1,1,1)", "(2,1,1)", "(2,2)"]),
        ("Z3", vec!["(3,1)"]),
        ("Z4", vec!["(2,1,1)"]),
    ] {
        let row = report.row(class).ok_or(format!("row {class} missing"))?;
        let got: Vec<Vec<u32>> = row.entries.iter().map(|e| multiset(&e.orbit_type)).collect();
        let want: Vec<Vec<u32>> = types.iter().map(|t| multiset(t)).collect();
        if got != want {
            problems.push(format!("{class}: orbit types {got:?}"));
        }
        if row.entries.iter().any(|e| e.verified < 50) {
            problems.push(format!("{class}: fewer than 50 samples"));
        }
    }
    for (class, groups) in [
        ("Zn, n>=5", &["Z5", "Z6", "Z7", "Z8", "Z9"][..]),
        ("Dn, n>=5", &["D5", "D6", "D7", "D8"][..]),
        ("Icosahedral (A5)", &["icosahedral"][..]),
    ] {
        let row = report.row(class).ok_or(format!("row {class} missing"))?;
        let refused: Vec<&str> = row.refusals.iter().map(|r| r.group.as_str()).collect();
        if refused != groups || !row.entries.is_empty() {
            problems.push(format!("{class}: refusals {refused:?}"));
        }
        if row.refusals.iter().any(|r| r.search.as_ref().is_some_and(|s| s.passing > 0)) {
            problems.push(format!("{class}: random search found a solution"));
        }
    }
    let worst = report
        .rows
        .iter()
        .flat_map(|r| &r.entries)
        .map(|e| e.max_orthogonality_residual.max(e.max_closure_residual))
        .fold(0.0, f64::max);
    if worst >= RESIDUAL_TOL {
        problems.push(format!("max residual {worst:e}"));
    }
    let took = within(start, Duration::from_secs(30), "criterion 2")?;
    ensure!(problems.is_empty(), "{}", problems.join("; "));
    Ok(format!("all rows reproduced, max residual {worst:.1e}, {took:.2?}"))
}

fn criterion_3() -> Check {
    let s2 = 2f64.sqrt();
    let left = z2_oeb_22(PI, 0.0, Parity::Below).map_err(|e| e.to_string())?;
    ensure!(contains(&left, &Rotation::about_x(FRAC_PI_2)), "Z2 (2,2) misses r(π/2, x̂)");
    ensure!(contains(&left, &Rotation::new([0.0, 1.0, 1.0], PI)), "Z2 (2,2) misses r(π, (ŷ+ẑ)/√2)");
    let right = z2_oeb_22(2.0 * PI / 3.0, FRAC_PI_2, Parity::Below).map_err(|e| e.to_string())?;
    ensure!(contains(&right, &Rotation::new([0.0, s2, 1.0], 2.0 * PI / 3.0)), "Z2 (2,2) misses s1");
    ensure!(contains(&right, &Rotation::new([s2, 0.0, -1.0], 2.0 * PI / 3.0)), "Z2 (2,2) misses s2");
    let lo = z3_polar_min();
    ensure!((lo.sin() - (2.0f64 / 3.0).sqrt()).abs() < 1e-15, "polar minimum {lo}");
    let f5l = z3_oeb_31(FRAC_PI_2, 0.0).map_err(|e| e.to_string())?;
    ensure!(contains(&f5l, &Rotation::about_x(2.0 * lo)), "Z3 ψ=π/2 misses r(2 s⁻¹(√(2/3)), x̂)");
    ensure!(contains(&f5l, &Rotation::about_z(PI)), "Z3 ψ=π/2 misses r(π, ẑ)");
    let f5r = z3_oeb_31(lo, 0.0).map_err(|e| e.to_string())?;
    ensure!(contains(&f5r, &Rotation::new([s2, 0.0, 1.0], PI)), "Z3 ψ=s⁻¹(√(2/3)) misses r(π, (√2x̂+ẑ)/√3)");
    ensure!(contains(&f5r, &Rotation::IDENTITY), "Z3 ψ=s⁻¹(√(2/3)) misses r(0, ẑ)");
    Ok("both Z2 (2,2) and both Z3 (3,1) figure bases contain their generators".into())
}

/// Density-matrix oracle: Bob's branch is `U_i†ψ`, his correction `U_i` in
/// his frame acts as `ρ(g)† U_i ρ(g)`.
fn misaligned_oracle(psi: &PureState) -> (f64, f64) {
    let rho = z3_rep();
    let us = z3_ueb_matrices();
    let mut density = ComplexMatrix::zeros(2, 2);
    for g in rho.group().elements() {
        let r = rho.image(g);
        for u in &us {
            let out = psi.evolve(&u.dagger()).evolve(&(&(&r.dagger() * u) * r));
            density = &density + &out.density().scale(C64::new(1.0 / 12.0, 0.0));
        }
    }
    let fidelity = psi.evolve(&density).inner(psi).re;
    let purity = (&density * &density).trace().re;
    (fidelity, purity)
}

fn criterion_4() -> Check {
    let rho = z3_rep();
    let ueb = verify_ueb(z3_ueb_matrices()).map_err(|e| e.to_string())?;
    let uniform = [1.0; 3];
    let mut min_purity = f64::INFINITY;
    for psi in random_states(2, 20, 4) {
        let out = misaligned_conventional(&psi, &ueb, &z3_twist(), &rho, &uniform).map_err(|e| e.to_string())?;
        min_purity = min_purity.min(out.purity);
    }
    ensure!(min_purity < 1.0 - PURITY_GAP, "every output is pure to within {PURITY_GAP} (min purity {min_purity})");
    let h = 1.0 / 2f64.sqrt();
    let plus = PureState::new(vec![C64::new(h, 0.0), C64::new(h, 0.0)]).map_err(|e| e.to_string())?;
    let out = misaligned_conventional(&plus, &ueb, &z3_twist(), &rho, &uniform).map_err(|e| e.to_string())?;
    let (oracle_f, oracle_p) = misaligned_oracle(&plus);
    ensure!((out.fidelity - oracle_f).abs() < 1e-12, "fidelity {} vs oracle {oracle_f}", out.fidelity);
    ensure!((out.purity - oracle_p).abs() < 1e-12, "purity {} vs oracle {oracle_p}", out.purity);
    ensure!(
        (out.fidelity - FROZEN_MISALIGNED_FIDELITY).abs() < 1e-12,
        "fidelity {:.17} differs from the frozen {FROZEN_MISALIGNED_FIDELITY:.17}",
        out.fidelity
    );
    Ok(format!("min purity {min_purity:.6}, average fidelity of |+⟩ {:.15}", out.fidelity))
}

fn permutation_matrix(perm: &[usize]) -> ComplexMatrix {
    ComplexMatrix::permutation(perm)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for k in 0..n {
            let mut q = p.clone();
            q.insert(k, n - 1);
            out.push(q);
        }
    }
    out
}

fn criterion_5() -> Check {
    let start = Instant::now();
    let mut details = Vec::new();
    for n in 2..=4 {
        let h = commuting_hadamard(n).map_err(|e| e.to_string())?;
        let perms = permutations(n);
        ensure!(perms.len() == (1..=n).product::<usize>(), "permutation count for n = {n}");
        for p in &perms {
            let m = permutation_matrix(p);
            ensure!((&h * &m).approx_eq(&(&m * &h), 1e-12), "H does not commute with {p:?} for n = {n}");
        }
        // entries of modulus one and H H† = n·1
        ensure!(h.data().iter().all(|z| (z.norm() - 1.0).abs() < 1e-12), "entries of H for n = {n} are not unimodular");
        let hh = &h * &h.dagger();
        ensure!(
            hh.approx_eq(&ComplexMatrix::identity(n).scale(C64::new(n as f64, 0.0)), 1e-12),
            "H H† ≠ n for n = {n}"
        );
        let rho = Representation::natural(preset(&format!("S{n}")).unwrap()).map_err(|e| e.to_string())?;
        let built = hadamard_ueb(&rho, &h).map_err(|e| e.to_string())?;
        let ueb = verify_ueb(built.ueb().elements().to_vec()).map_err(|e| e.to_string())?;
        let eq = verify_equivariant(&ueb, &rho).map_err(|e| e.to_string())?;
        ensure!(eq.residual() < 1e-9, "equivariance residual {} for n = {n}", eq.residual());
        details.push(format!("n={n}: {} permutations, orbit type {:?}", perms.len(), eq.orbit_type()));
    }
    match commuting_hadamard(5) {
        Err(equitel_core::Error::Refused(reason)) => {
            ensure!(
                reason.contains("0.6000") && reason.contains("0.4472"),
                "refusal does not cite 3/5 > 1/√5: {reason}"
            );
        }
        other => return Err(format!("n = 5 not refused: {other:?}")),
    }
    let took = within(start, Duration::from_secs(5), "criterion 5")?;
    Ok(format!("{}; n=5 refused (3/5 > 1/√5); {took:.2?}", details.join(", ")))
}

fn criterion_6() -> Check {
    let start = Instant::now();
    let a5 = preset("A5").unwrap();
    let cands = monomial_candidates(&a5, 9).map_err(|e| e.to_string())?;
    let rows: Vec<Vec<Option<i64>>> = cands
        .iter()
        .map(|c| c.character.exact_values().map(|v| v.iter().map(Cyclotomic::as_integer).collect()).unwrap_or_default())
        .collect();
    let table: Vec<Vec<Option<i64>>> =
        [[1, 1, 1, 1, 1], [5, 1, -1, 0, 0], [5, 1, 2, 0, 0], [6, -2, 0, 1, 1], [6, 2, 0, 1, 1]]
            .iter()
            .map(|r| r.iter().map(|&x| Some(x)).collect())
            .collect();
    ensure!(rows == table, "induced characters {rows:?}");
    // float and exact agree
    for c in &cands {
        let exact = c.character.exact_values().unwrap();
        for (e, f) in exact.iter().zip(c.character.float_values()) {
            ensure!((e.to_complex() - f).norm() < 1e-9, "float and exact values disagree");
        }
    }
    let s = Arc::new(ClassStructure::new(&a5));
    for chi in a5_three_dim_characters(&s).map_err(|e| e.to_string())? {
        let verdict = monomial_check(&a5, &chi).map_err(|e| e.to_string())?;
        match verdict.result {
            Feasibility::Infeasible { certificate: Certificate::Irrational { ref class, .. } }
                if class == "(1,2,3,4,5)" => {}
            other => return Err(format!("A5 3-dim irrep: {other:?}")),
        }
    }
    let s3 = preset("S3").unwrap();
    let natural = character_of_rep(&Representation::natural(s3.clone()).unwrap());
    let m = natural.structure().modulus;
    let standard = ClassFunction::exact(
        natural.structure().clone(),
        natural.exact_values().unwrap().iter().map(|v| v.clone() - Cyclotomic::integer(m, 1)).collect(),
    );
    let verdict = monomial_check(&s3, &standard).map_err(|e| e.to_string())?;
    let Feasibility::Feasible { witness, .. } = &verdict.result else {
        return Err(format!("S3 control: {:?}", verdict.result));
    };
    // the witness really sums to the target
    let mut sum = vec![C64::new(0.0, 0.0); verdict.target.float_values().len()];
    for &(k, mult) in witness {
        for (acc, v) in sum.iter_mut().zip(verdict.candidates[k].character.float_values()) {
            *acc += v * mult as f64;
        }
    }
    let gap = sum.iter().zip(verdict.target.float_values()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    ensure!(gap < 1e-9, "S3 witness misses the target by {gap}");
    let took = within(start, Duration::from_secs(10), "criterion 6")?;
    Ok(format!(
        "monomial table rows exact, both A5 irreps infeasible on (1,2,3,4,5), S3 witness {witness:?}, {took:.2?}"
    ))
}

fn check_left_action(group: &FiniteGroup, x: &GSet) -> Result<(), String> {
    for p in 0..x.len() {
        ensure!(x.act(group.identity(), p) == p, "identity moves {p}");
    }
    for g in group.elements() {
        for h in group.elements() {
            for p in 0..x.len() {
                ensure!(x.act(g, x.act(h, p)) == x.act(group.mul(g, h), p), "action axiom fails at ({g},{h},{p})");
            }
        }
    }
    Ok(())
}

fn criterion_7() -> Check {
    let mut quotients = 0;
    for name in ["Z3", "Z4", "S3", "A4"] {
        let group = preset(name).unwrap();
        let rf = rf_channel(&group).map_err(|e| e.to_string())?;
        check_left_action(&group, rf.sigma())?;
        for g in group.elements() {
            for x in group.elements() {
                ensure!(rf.sigma().act(g, x) == group.mul(x, group.inv(g)), "{name}: rf σ(g,x) ≠ x g⁻¹");
                let t = transmit(&rf, x, g, 3).map_err(|e| e.to_string())?;
                ensure!(t.received == group.mul(x, group.inv(g)), "{name}: rf transmission misread");
            }
        }
        for k in enumerate_subgroups(&group) {
            let ch = quotient_channel(&rf, &Subgroup::trivial(&group), &k, 11).map_err(|e| e.to_string())?;
            check_left_action(&group, ch.sigma())?;
            let cosets = right_cosets(&group, &k);
            ensure!(ch.len() == cosets.len(), "{name}: quotient by order {} has {} messages", k.order(), ch.len());
            let which = |y: usize| cosets.iter().position(|c| c.contains(&y)).unwrap();
            for g in group.elements() {
                for (c, coset) in cosets.iter().enumerate() {
                    let expected = which(group.mul(coset[0], group.inv(g)));
                    ensure!(ch.sigma().act(g, c) == expected, "{name}: σ(g, Kx) ≠ K x g⁻¹");
                    let t = transmit(&ch, c, g, 5).map_err(|e| e.to_string())?;
                    ensure!(t.received == expected, "{name}: quotient transmission misread");
                }
            }
            quotients += 1;
        }
    }
    // every equivariant basis on hand: catalog lifts, the qubit Z3 basis, Hadamard bases
    let mut bases = Vec::new();
    for tag in ["D2", "D3", "D4", "tetrahedral", "octahedral"] {
        let cover = binary_cover(&catalog_rep(tag).unwrap()).map_err(|e| e.to_string())?;
        for oeb in discrete_catalog(tag).map_err(|e| e.to_string())? {
            bases.push(lift_oeb(&oeb, &cover).map_err(|e| e.to_string())?);
        }
    }
    bases.push(verify_equivariant(&verify_ueb(z3_ueb_matrices()).unwrap(), &z3_rep()).map_err(|e| e.to_string())?);
    for n in 2..=4 {
        let rho = Representation::natural(preset(&format!("S{n}")).unwrap()).unwrap();
        bases.push(hadamard_ueb(&rho, &commuting_hadamard(n).unwrap()).map_err(|e| e.to_string())?);
    }
    for b in &bases {
        let ch = compatible_channel_for(b.group(), b.tau(), None).map_err(|e| e.to_string())?;
        let inv = b.tau_inverse();
        for g in b.group().elements() {
            ensure!(ch.sigma().permutation(g) == inv.permutation(g), "{}: channel is not τ⁻¹", b.group().name());
        }
    }
    let composite = compatible_channel_for(
        &z3_group(),
        verify_equivariant(&verify_ueb(z3_ueb_matrices()).unwrap(), &z3_rep()).unwrap().tau(),
        None,
    )
    .map_err(|e| e.to_string())?;
    let arrow = arrow_channel().map_err(|e| e.to_string())?;
    ensure!(
        composite.len() == 4 && arrow.len() == 4,
        "composite channels carry {} and {} messages",
        composite.len(),
        arrow.len()
    );
    Ok(format!(
        "{quotients} quotient channels checked, τ⁻¹ reproduced for {} bases, composite carries 4 messages",
        bases.len()
    ))
}

fn criterion_8() -> Check {
    let mut details = Vec::new();
    for (name, spec) in [("Z3", z3_protocol()), ("A4", a4_protocol())] {
        let spec = spec.map_err(|e| e.to_string())?;
        let n = spec.dim();
        let group = spec.rho().group().clone();
        let mut worst = f64::INFINITY;
        for psi in random_states(n, 3, 8) {
            for gs in group.elements() {
                for gr in group.elements() {
                    for i in 0..n * n {
                        let t = dynamical_robustness_run(&spec, &psi, gs, gr, Outcome::Forced(i), 2)
                            .map_err(|e| e.to_string())?;
                        worst = worst.min(t.fidelity);
                    }
                }
            }
        }
        ensure!(worst >= 1.0 - FIDELITY_TOL, "{name}: DR fidelity {worst}");
        details.push(format!("{name} DR min fidelity {worst:.12}"));
    }
    let spec = z3_protocol().map_err(|e| e.to_string())?;
    let honest = no_leakage_experiment(&spec, LEAKAGE_SAMPLES, 2024, None).map_err(|e| e.to_string())?;
    ensure!(honest.max_tv < LEAKAGE_MAX_TV, "leakage TV {}", honest.max_tv);
    let control = no_leakage_experiment(&spec, LEAKAGE_SAMPLES, 2024, Some(1)).map_err(|e| e.to_string())?;
    ensure!(control.max_tv > LEAKAGE_CONTROL_MIN_TV, "control TV {}", control.max_tv);
    details.push(format!("leakage TV {:.4} (control {:.4})", honest.max_tv, control.max_tv));
    Ok(details.join(", "))
}

fn state_invariance_residual(rho_a: &Representation, rho_b: &Representation, v: &ComplexMatrix, theta: &[C64]) -> f64 {
    let n = rho_a.dim();
    let state = bell_state(n).evolve(&ComplexMatrix::identity(n).tensor(v));
    rho_a
        .group()
        .elements()
        .map(|g| {
            let moved = state.evolve(&rho_a.image(g).tensor(rho_b.image(g)));
            moved
                .amplitudes()
                .iter()
                .zip(state.amplitudes())
                .map(|(x, y)| (x - theta[g] * y).norm())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

fn criterion_9() -> Check {
    let rho = z3_rep();
    let a = rho.group().find("a").unwrap();
    let (v, theta) =
        invariant_entangled_state(&rho, &rho).map_err(|e| e.to_string())?.ok_or("no witness for the qubit Z3 pair")?;
    let z = v.scalar_multiple_of(&ComplexMatrix::pauli_x(), 1e-9);
    ensure!(z.is_some_and(|z| (z.norm() - 1.0).abs() < 1e-9), "V is not Pauli X up to phase: {v:?}");
    ensure!((theta[a] - cis(2.0 * PI / 3.0)).norm() < 1e-9, "θ(a) = {}", theta[a]);
    let mut witnesses = vec![state_invariance_residual(&rho, &rho, &v, &theta)];
    // a pair with no invariant maximally entangled state
    let flat = Representation::trivial(z3_group(), 2);
    let none = invariant_entangled_state(&flat, &rho).map_err(|e| e.to_string())?;
    ensure!(none.is_none(), "found a witness for a non-dual pair");
    let w = cis(2.0 * PI / 3.0);
    // a nontrivial scalar character on Bob's side: ρ(a) would have to be scalar
    let scalar = Representation::from_generators(z3_group(), &[ComplexMatrix::diag(&[w, w])]).unwrap();
    let none = invariant_entangled_state(&rho, &scalar).map_err(|e| e.to_string())?;
    ensure!(none.is_none(), "found a witness for ρ against a scalar character");
    for spec in [catalog_protocol("octahedral", 0), catalog_protocol("tetrahedral", 1), a4_protocol()] {
        let spec = spec.map_err(|e| e.to_string())?;
        let (v, theta) = invariant_entangled_state(spec.alice_half(), spec.bob_half())
            .map_err(|e| e.to_string())?
            .ok_or("no witness for a dual pair")?;
        witnesses.push(state_invariance_residual(spec.alice_half(), spec.bob_half(), &v, &theta));
    }
    let worst = witnesses.iter().copied().fold(0.0, f64::max);
    ensure!(worst < WITNESS_TOL, "state invariance residual {worst:e}");
    Ok(format!(
        "V = X, θ(a) = e^(2πi/3); two non-dual pairs refused; {} witnesses invariant to {worst:.1e}",
        witnesses.len()
    ))
}

fn criterion_10() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..PROPERTY_PAIRS {
        let r = Rotation::random(&mut rng);
        let back = q_map(&su2_lift(&r, cis(rng.gen_range(0.0..2.0 * PI)))).map_err(|e| e.to_string())?;
        ensure!(back.ball_distance(&r) < 1e-9, "q∘lift moved {r:?} to {back:?}");
        let s = Rotation::random(&mut rng);
        let via_q = compose(&r, &s.inverse()).angle();
        ensure!((composite_angle(&r, &s) - via_q).abs() < 1e-9, "composite angle formula disagrees");
        // orthogonal partner by a half-turn: axes are never acute
        let h = Rotation::new(Rotation::random(&mut rng).axis(), PI);
        let t = compose(&h, &r);
        ensure!(are_orthogonal(&r, &t, 1e-9), "half-turn partner is not orthogonal");
        ensure!(dot(r.axis(), t.axis()) <= 1e-9, "orthogonal pair with acute axes");
    }
    let mut orbit_checks = 0;
    for name in ["S4", "A4", "D4", "A5"] {
        let group = preset(name).unwrap();
        for k in enumerate_subgroups(&group) {
            let x = coset_gset(&group, &k).map_err(|e| e.to_string())?;
            for orbit in orbits(&x) {
                let stab = stabilizer(&group, &x, orbit[0]).map_err(|e| e.to_string())?;
                ensure!(orbit.len() * stab.order() == group.order(), "orbit-stabilizer fails in {name}");
                orbit_checks += 1;
            }
        }
    }
    let mut frobenius = 0;
    for name in ["S4", "A5"] {
        let group = preset(name).unwrap();
        let s = Arc::new(ClassStructure::new(&group));
        let tests: Vec<ClassFunction> = vec![
            character_of_rep(&Representation::natural(group.clone()).unwrap()),
            character_of_rep(&Representation::trivial(group.clone(), 1)),
        ]
        .into_iter()
        .chain(monomial_candidates(&group, 12).unwrap().into_iter().map(|c| c.character))
        .collect();
        let subs = enumerate_subgroups(&group);
        for _ in 0..40 {
            let h = &subs[rng.gen_range(0..subs.len())];
            let chars = linear_characters_of(&group, h, s.modulus);
            let chi = &chars[rng.gen_range(0..chars.len())];
            let psi = &tests[rng.gen_range(0..tests.len())];
            let lhs = induce_character(&group, &s, chi).map_err(|e| e.to_string())?.inner(psi).to_complex();
            let rhs: C64 = h.members().iter().zip(chi.values()).map(|(&m, c)| c * psi.at(m).conj()).sum::<C64>()
                / h.order() as f64;
            ensure!((lhs - rhs).norm() < 1e-9, "Frobenius reciprocity fails in {name}");
            frobenius += 1;
        }
    }
    Ok(format!(
        "{PROPERTY_PAIRS} rotation pairs, {orbit_checks} orbit-stabilizer checks, {frobenius} reciprocity spot-checks"
    ))
}

fn main() {
    let criteria: [Criterion; 10] = [
        (1, "qubit Z3 example end to end", criterion_1),
        (2, "qubit classification table", criterion_2),
        (3, "figure fixtures", criterion_3),
        (4, "conventional protocol under misalignment", criterion_4),
        (5, "Hadamard pipeline", criterion_5),
        (6, "monomial check", criterion_6),
        (7, "channel laws", criterion_7),
        (8, "dynamical robustness and no leakage", criterion_8),
        (9, "invariant entangled states", criterion_9),
        (10, "property suites", criterion_10),
    ];
    let mut failed = Vec::new();
    for (n, name, check) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("criterion {n:>2} PASS  {name}: {detail}"),
            Err(why) => {
                println!("criterion {n:>2} FAIL  {name}: {why}");
                failed.push(n);
            }
        }
    }
    if !failed.is_empty() {
        println!("acceptance: {} of 10 criteria failed: {failed:?}", failed.len());
        std::process::exit(1);
    }
    println!("acceptance: all 10 criteria passed");
}
