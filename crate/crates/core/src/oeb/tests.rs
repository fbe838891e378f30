use super::*;
use crate::group::enumerate_subgroups;
use crate::rotation::{composite_angle, X_AXIS, Y_AXIS, Z_AXIS};
use proptest::prelude::{prop_assert_eq, proptest, ProptestConfig};

fn contains(o: &EquivariantOEB, r: &Rotation) -> bool {
    o.elements().iter().any(|e| e.ball_distance(r) < 1e-9)
}

fn pauli_set() -> Vec<Rotation> {
    vec![Rotation::IDENTITY, Rotation::about_x(PI), Rotation::about_y(PI), Rotation::about_z(PI)]
}

fn hausdorff(a: &[Rotation], b: &[Rotation]) -> f64 {
    let one = |a: &[Rotation], b: &[Rotation]| {
        a.iter().map(|x| b.iter().map(|y| x.ball_distance(y)).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max)
    };
    one(a, b).max(one(b, a))
}

#[test]
fn catalog_orders() {
    for (tag, n) in [
        ("trivial", 1),
        ("Z2", 2),
        ("Z5", 5),
        ("D1", 2),
        ("D2", 4),
        ("D3", 6),
        ("D4", 8),
        ("tetrahedral", 12),
        ("octahedral", 24),
        ("icosahedral", 60),
    ] {
        assert_eq!(catalog_rep(tag).unwrap().group().order(), n, "{tag}");
    }
    assert!(catalog_rep("Q8").is_err());
}

#[test]
fn octahedral_pauli_set_is_one_three() {
    let o = verify_oeb(&pauli_set(), &catalog_rep("octahedral").unwrap()).unwrap();
    assert_eq!(orbit_type(&o), vec![3, 1]);
    assert!(o.clone().with_family("Octahedral-(1,3)", &[]).is_ok());
    let trivial = verify_oeb(&pauli_set(), &catalog_rep("trivial").unwrap()).unwrap();
    assert_eq!(orbit_type(&trivial), vec![1, 1, 1, 1]);
    let z4 = verify_oeb(&pauli_set(), &catalog_rep("Z4").unwrap()).unwrap();
    assert_eq!(orbit_type(&z4), vec![2, 1, 1]);
}

#[test]
fn perturbed_angle_fails_orthogonality() {
    let mut set = pauli_set();
    set[1] = Rotation::about_x(PI - 1e-3);
    match verify_oeb(&set, &catalog_rep("octahedral").unwrap()) {
        Err(OebViolation::NotOrthogonal { i, j, .. }) => assert!(i == 1 || j == 1),
        other => panic!("{other:?}"),
    }
}

#[test]
fn non_preserved_set_names_the_element() {
    // Orthogonal, but a generic rotation of the Pauli set is not preserved.
    let g = Rotation::new([0.3, -0.2, 0.9], 0.7);
    let set: Vec<Rotation> = pauli_set().iter().map(|r| r.conjugated_by(&g)).collect();
    match verify_oeb(&set, &catalog_rep("Z2").unwrap()) {
        Err(OebViolation::NotPreserved { element, .. }) => assert_eq!(element, "a"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn tetrahedron_valid_under_d2_subgroup_of_a4() {
    let a4 = catalog_rep("tetrahedral").unwrap();
    let v4 = enumerate_subgroups(a4.group()).into_iter().find(|h| h.order() == 4).unwrap();
    let d2 = a4.restrict(&v4, "V4").unwrap();
    let o = verify_oeb(&tetrahedron_points(true), &d2).unwrap();
    assert_eq!(orbit_type(&o), vec![4]);
    // Every order-2 subgroup as well.
    for h in enumerate_subgroups(a4.group()).into_iter().filter(|h| h.order() == 2) {
        let z2 = a4.restrict(&h, "Z2").unwrap();
        assert_eq!(orbit_type(&verify_oeb(&tetrahedron_points(true), &z2).unwrap()), vec![2, 2]);
    }
}

#[test]
fn z2_1111_examples() {
    let o = z2_oeb_1111(0.0, 0.0).unwrap();
    assert!(same_rotation_set(o.elements(), &pauli_set()));
    let o = z2_oeb_1111(FRAC_PI_2, FRAC_PI_4).unwrap();
    assert_eq!(orbit_type(&o), vec![1, 1, 1, 1]);
    let a = o.group().find("a").unwrap();
    assert_eq!(o.tau().permutation(a), &[0, 1, 2, 3]);
    // Canonicalized mod 2π.
    let p = z2_oeb_1111(0.4 + 2.0 * PI, -1.0).unwrap();
    let q = z2_oeb_1111(0.4, -1.0 + 2.0 * PI).unwrap();
    assert!(p.same_set(&q));
}

#[test]
fn z2_211_examples() {
    assert!((two_orbit_angle(PI) - FRAC_PI_2).abs() < 1e-12);
    assert!((two_orbit_angle(FRAC_PI_2) - PI).abs() < 1e-7);
    let o = z2_oeb_211(PI, 0.3).unwrap();
    assert_eq!(orbit_type(&o), vec![2, 1, 1]);
    assert!(o.orthogonality_residual() < 1e-9);
    assert!(z2_oeb_211(FRAC_PI_2, 0.0).is_ok());
    assert!(matches!(z2_oeb_211(FRAC_PI_4, 0.0), Err(Error::NoSolutionInFamily(_))));
    assert!(z2_oeb_211(1.6 * PI, 0.0).is_err());
}

#[test]
fn z2_211_height_matches_closed_form() {
    for k in 0..=40 {
        let theta = FRAC_PI_2 + PI * k as f64 / 40.0;
        if (theta - PI).abs() < 1e-9 {
            continue;
        }
        let o = z2_oeb_211(theta, 0.0).unwrap();
        let r = two_orbit_angle(theta);
        let expect = 2.0 * (-(0.5 * r).cos() / (0.5 * r).sin() / (0.5 * theta).cos()).atan();
        let on_axis = Rotation::about_z(expect);
        assert!(contains(&o, &on_axis), "theta {theta}");
    }
}

#[test]
fn z2_211_converges_to_rotated_pauli_at_boundary() {
    let twist = Rotation::about_x(FRAC_PI_4);
    let limit: Vec<Rotation> = pauli_set().iter().map(|r| r.conjugated_by(&twist)).collect();
    let mut last = f64::INFINITY;
    for eps in [1e-2, 1e-4, 1e-6, 1e-8, 1e-10] {
        let o = z2_oeb_211(FRAC_PI_2 + eps, 0.0).unwrap();
        let d = hausdorff(o.elements(), &limit);
        assert!(d < last);
        last = d;
    }
    assert!(last < 1e-4, "{last}");
    // The limit itself is the Z2 (1,1,1,1) specialization conjugated rigidly.
    let spec = z2_oeb_1111(0.0, 0.0).unwrap();
    let moved: Vec<Rotation> = spec.elements().iter().map(|r| r.conjugated_by(&twist)).collect();
    assert!(same_rotation_set(&moved, &limit));
}

#[test]
fn z2_22_figure_four() {
    let left = z2_oeb_22(PI, 0.0, Parity::Below).unwrap();
    assert!(contains(&left, &Rotation::about_x(FRAC_PI_2)));
    assert!(contains(&left, &Rotation::new([0.0, 1.0, 1.0], PI)));
    assert!((z22_partner_angle(2.0 * PI / 3.0) - 2.0 * PI / 3.0).abs() < 1e-12);
    let right = z2_oeb_22(2.0 * PI / 3.0, FRAC_PI_2, Parity::Below).unwrap();
    let s2 = 2f64.sqrt();
    assert!(contains(&right, &Rotation::new([0.0, s2, 1.0], 2.0 * PI / 3.0)));
    assert!(contains(&right, &Rotation::new([s2, 0.0, -1.0], 2.0 * PI / 3.0)));
    assert_eq!(orbit_type(&right), vec![2, 2]);
    assert!(z2_oeb_22(1.0, 0.0, Parity::Below).is_err());
}

#[test]
fn central_angle_bisection_matches_closed_form() {
    for k in 0..=50 {
        let r = FRAC_PI_2 + FRAC_PI_2 * k as f64 / 50.0;
        let cot = (0.5 * r).cos() / (0.5 * r).sin();
        // Compare cosines: the root is double at θ = π, so the angle itself is
        // only determined to about √ε there.
        let t = central_angle_for(r).unwrap();
        assert!((t.cos() + cot * cot).abs() < 1e-12, "r {r}");
    }
    assert!(central_angle_for(1.0).is_err());
}

#[test]
fn z2_22_sweep_all_pairs_orthogonal() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..60 {
        let r2 = rng.gen_range(FRAC_PI_2..=PI);
        let parity = if rng.gen_bool(0.5) { Parity::Below } else { Parity::Above };
        let o = z2_oeb_22(r2, rng.gen_range(-PI..PI), parity).unwrap();
        for i in 0..4 {
            for j in i + 1..4 {
                let a = composite_angle(&o.elements()[i], &o.elements()[j]);
                assert!((a - PI).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn z3_figure_five() {
    let lo = z3_polar_min();
    let left = z3_oeb_31(FRAC_PI_2, 0.0).unwrap();
    assert!(contains(&left, &Rotation::about_x(2.0 * lo)));
    assert!(contains(&left, &Rotation::about_z(PI)));
    let right = z3_oeb_31(lo, 0.0).unwrap();
    assert!(contains(&right, &Rotation::new([2f64.sqrt(), 0.0, 1.0], PI)));
    assert!(contains(&right, &Rotation::IDENTITY));
    assert!(z3_oeb_31(1.1, 0.2).is_ok());
    // 0.9 sits just below asin(√(2/3)) ≈ 0.9553.
    assert!(matches!(z3_oeb_31(0.9, 0.0), Err(Error::NoSolutionInFamily(_))));
}

#[test]
fn z3_generator_three_cycles_the_orbit() {
    let o = z3_oeb_31(1.1, 0.4).unwrap();
    let a = o.group().find("a").unwrap();
    assert_eq!(o.tau().permutation(a), &[0, 3, 1, 2]);
    // Height on the far side of the xy-plane, and the closed form for it.
    let z = o.parameters()["z"];
    assert!(z < 0.0);
    let r = z3_orbit_angle(1.1);
    let closed = 2.0 * (-(1.5f64).sqrt() * (0.5 * r).cos() * 1.1f64.tan()).atan();
    assert!((z - closed).abs() < 1e-9);
}

#[test]
fn z4_examples() {
    let o = z4_oeb_211(0.0, 0.0).unwrap();
    assert_eq!(orbit_type(&o), vec![2, 1, 1]);
    let a = o.group().find("a").unwrap();
    assert_eq!(o.tau().permutation(a), &[0, 1, 3, 2]);
}

#[test]
fn d2_catalog_counts() {
    let list = discrete_catalog("D2").unwrap();
    let count = |t: &str| list.iter().filter(|o| o.family() == t).count();
    assert_eq!(count("D2-(1,1,1,1)"), 1);
    assert_eq!(count("D2-(2,1,1)"), 6);
    assert_eq!(count("D2-(2,2)"), 3);
    assert_eq!(count("D2-(4)"), 2);
    assert_eq!(count_distinct(&list), 12);
}

#[test]
fn d4_catalog_counts() {
    let list = discrete_catalog("D4").unwrap();
    assert_eq!(list.iter().filter(|o| o.family() == "D4-(2,1,1)").count(), 2);
    assert_eq!(list.iter().filter(|o| o.family() == "D4-(2,2)").count(), 2);
}

#[test]
fn tetrahedral_and_octahedral_catalogs() {
    let tet = discrete_catalog("A4").unwrap();
    assert_eq!(tet.len(), 2);
    for o in &tet {
        assert!(o.elements().iter().all(|r| (r.angle() - 2.0 * PI / 3.0).abs() < 1e-12));
        for (i, a) in o.elements().iter().enumerate() {
            for b in &o.elements()[i + 1..] {
                assert!((dot(a.axis(), b.axis()) + 1.0 / 3.0).abs() < 1e-12);
            }
        }
    }
    let oct = discrete_catalog("S4").unwrap();
    assert_eq!(oct.len(), 1);
    assert!(same_rotation_set(oct[0].elements(), &pauli_set()));
    assert!(discrete_catalog("Z3").is_err());
}

/// Independent count of D3 solutions from the line picture: four orthogonal
/// lines in R⁴ permuted by the conjugation action. The only fixed lines are
/// `w` and `k`, size-2 orbits live in `span(w, k)`, and 3-orbits lie in a
/// flip's eigenplanes, which leaves exactly the four frames below.
fn d3_oracle_frames() -> Vec<Vec<Rotation>> {
    let to_rot = |q: [f64; 4]| Rotation::from_quaternion(Quaternion { w: q[0], v: [q[1], q[2], q[3]] });
    let mut frames = Vec::new();
    let alpha = (1.0f64 / 3.0).sqrt().asin();
    let beta = 2f64.sqrt().atan();
    for sign in [1.0, -1.0] {
        let mut f = vec![Rotation::IDENTITY];
        for k in 0..3 {
            let t = 2.0 * PI * k as f64 / 3.0;
            let y = [-t.sin(), t.cos(), 0.0];
            let (ca, sa) = (alpha.cos(), sign * alpha.sin());
            f.push(to_rot([0.0, ca * y[0], ca * y[1], sa]));
        }
        frames.push(f);
        let mut f = vec![Rotation::about_z(PI)];
        for k in 0..3 {
            let t = 2.0 * PI * k as f64 / 3.0;
            let (cb, sb) = (beta.cos(), sign * beta.sin());
            f.push(to_rot([cb, sb * t.cos(), sb * t.sin(), 0.0]));
        }
        frames.push(f);
    }
    frames
}

#[test]
fn d3_catalog_matches_line_orbit_oracle() {
    let rep = catalog_rep("D3").unwrap();
    let catalog = discrete_catalog("D3").unwrap();
    let oracle = d3_oracle_frames();
    assert_eq!(count_distinct(&catalog), 4);
    for frame in &oracle {
        let o = verify_oeb(frame, &rep).unwrap();
        assert_eq!(orbit_type(&o), vec![3, 1]);
        assert!(catalog.iter().any(|c| same_rotation_set(c.elements(), frame)));
    }
    assert_eq!(catalog.len(), oracle.len());
}

#[test]
fn d3_grid_scan_finds_nothing_else() {
    // Flip residual over a grid of the Z3 family; every near-solution must be
    // one of the four known sets.
    let flip = Rotation::about_x(PI);
    let lo = z3_polar_min();
    let oracle = d3_oracle_frames();
    let mut near = 0;
    for i in 0..=120 {
        let psi = lo + (PI - 2.0 * lo) * i as f64 / 120.0;
        for j in 0..240 {
            let phi = 2.0 * PI * j as f64 / 240.0;
            let o = z3_oeb_31(psi, phi).unwrap();
            let moved: Vec<Rotation> = o.elements().iter().map(|r| r.conjugated_by(&flip)).collect();
            if hausdorff(&moved, o.elements()) < 1e-7 {
                near += 1;
                assert!(oracle.iter().any(|f| same_rotation_set(f, o.elements())));
            }
        }
    }
    assert!(near >= 4);
}

#[test]
fn d3_median_orientations_coincide() {
    // Rotating the triangle by a third of a turn gives the same set, so the
    // three median choices for each axis point collapse to one.
    let lo = z3_polar_min();
    for psi in [lo, FRAC_PI_2] {
        let base = z3_oeb_31(psi, FRAC_PI_2).unwrap();
        for k in 1..3 {
            let other = z3_oeb_31(psi, FRAC_PI_2 - 2.0 * PI * k as f64 / 3.0).unwrap();
            assert!(base.same_set(&other));
        }
    }
}

#[test]
fn restriction_compatibility() {
    let d2 = catalog_rep("D2").unwrap();
    for h in enumerate_subgroups(d2.group()).into_iter().filter(|h| h.order() == 2) {
        let sub = d2.restrict(&h, "Z2").unwrap();
        for o in discrete_catalog("D2").unwrap() {
            assert!(o.reverify(&sub).is_ok());
        }
    }
    let tet = catalog_rep("tetrahedral").unwrap();
    let z3s: Vec<_> = enumerate_subgroups(tet.group()).into_iter().filter(|h| h.order() == 3).collect();
    assert_eq!(z3s.len(), 4);
    for h in z3s {
        let sub = tet.restrict(&h, "Z3").unwrap();
        for o in discrete_catalog("tetrahedral").unwrap() {
            assert_eq!(orbit_type(&o.reverify(&sub).unwrap()), vec![3, 1]);
        }
    }
    let oct = catalog_rep("octahedral").unwrap();
    let d4s: Vec<_> = enumerate_subgroups(oct.group()).into_iter().filter(|h| h.order() == 8).collect();
    assert_eq!(d4s.len(), 3);
    for h in d4s {
        let sub = oct.restrict(&h, "D4").unwrap();
        assert!(discrete_catalog("octahedral").unwrap()[0].reverify(&sub).is_ok());
    }
    let d4 = catalog_rep("D4").unwrap();
    let z4 = enumerate_subgroups(d4.group())
        .into_iter()
        .find(|h| {
            h.order() == 4 && d4.group().element_order(h.members()[1]) == 4 || {
                h.order() == 4 && h.members().iter().any(|&m| d4.group().element_order(m) == 4)
            }
        })
        .unwrap();
    let sub = d4.restrict(&z4, "Z4").unwrap();
    for o in discrete_catalog("D4").unwrap() {
        assert_eq!(orbit_type(&o.reverify(&sub).unwrap()), vec![2, 1, 1]);
    }
}

#[test]
fn refusals() {
    let z5 = nonexistence_certificate("Z5", 2000, 1).unwrap();
    assert!(z5.reason.contains("1 and 5"));
    assert_eq!(z5.search.as_ref().unwrap().passing, 0);
    let d7 = nonexistence_certificate("D7", 0, 1).unwrap();
    assert_eq!(d7.via_subgroup.as_deref(), Some("Z7"));
    let ico = nonexistence_certificate("icosahedral", 0, 1).unwrap();
    assert_eq!(ico.via_subgroup.as_deref(), Some("D5"));
    for tag in ["Z6", "Z8", "Z10"] {
        assert!(nonexistence_certificate(tag, 0, 0).is_ok());
    }
    assert!(nonexistence_certificate("Z3", 0, 0).is_err());
    assert!(nonexistence_certificate("D4", 0, 0).is_err());
}

#[test]
fn random_oeb_is_orthogonal() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..100 {
        let set = random_oeb(&mut rng);
        assert!(verify_oeb(&set, &catalog_rep("trivial").unwrap()).is_ok());
    }
}

#[test]
fn json_and_csv() {
    let o = z3_oeb_31(1.2, 0.0).unwrap();
    let v = o.to_json();
    assert_eq!(v["family"], "Z3-(3,1)");
    assert_eq!(v["elements"].as_array().unwrap().len(), 4);
    assert!(v["parameters"]["psi"].is_number());
    assert_eq!(o.ball_csv().lines().count(), 5);
}

#[test]
fn table1_report_small() {
    let report = table1(5, 50, 3).unwrap();
    assert_eq!(report.row("D2").unwrap().entries.len(), 4);
    assert_eq!(report.row("Icosahedral (A5)").unwrap().refusals.len(), 1);
    assert!(report.to_markdown().contains("| Octahedral (S4) | (1,3) | 1 isolated |"));
}

#[test]
fn so3_rep_from_unitary_and_axis_constants() {
    let rep = crate::unitary::matrix_group(
        "Z2",
        &[crate::rotation::su2_lift(&Rotation::about_z(PI), crate::unitary::ONE)],
        &["a"],
    )
    .unwrap();
    let so3 = So3Rep::from_unitary(&rep).unwrap();
    // Binary cover: order 4 in SU(2), images repeat.
    assert_eq!(so3.group().order(), 4);
    assert!(verify_oeb(&pauli_set(), &so3).is_ok());
    assert_eq!(dot(X_AXIS, Y_AXIS), 0.0);
    assert_eq!(Z_AXIS[2], 1.0);
}

fn sampled<F: Fn(&mut ChaCha8Rng) -> Result<EquivariantOEB>>(seed: u64, n: usize, f: F, ty: &[usize]) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..n {
        let o = f(&mut rng).unwrap();
        assert_eq!(orbit_type(&o), ty);
        assert!(o.orthogonality_residual() < 1e-9 && o.closure_residual() < 1e-9);
    }
}

#[test]
fn every_family_verifies_for_many_samples() {
    sampled(1, 100, |r| z2_oeb_1111(r.gen_range(-PI..PI), r.gen_range(-PI..PI)), &[1, 1, 1, 1]);
    sampled(2, 100, |r| z2_oeb_211(r.gen_range(FRAC_PI_2..=1.5 * PI), r.gen_range(-PI..PI)), &[2, 1, 1]);
    sampled(3, 100, |r| z2_oeb_22(r.gen_range(FRAC_PI_2..=PI), r.gen_range(-PI..PI), Parity::Above), &[2, 2]);
    let lo = z3_polar_min();
    sampled(4, 100, |r| z3_oeb_31(r.gen_range(lo..=PI - lo), r.gen_range(-PI..PI)), &[3, 1]);
    sampled(5, 100, |r| z4_oeb_211(r.gen_range(-PI..PI), r.gen_range(-PI..PI)), &[2, 1, 1]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn z2_211_always_verifies(theta in FRAC_PI_2..=1.5 * PI, phi in -PI..PI) {
        let o = z2_oeb_211(theta, phi).unwrap();
        prop_assert_eq!(orbit_type(&o), vec![2, 1, 1]);
    }

    #[test]
    fn z3_always_verifies(t in 0.0f64..=1.0, phi in -PI..PI) {
        let lo = z3_polar_min();
        let o = z3_oeb_31(lo + t * (PI - 2.0 * lo), phi).unwrap();
        let a = o.group().find("a").unwrap();
        prop_assert_eq!(o.tau().permutation(a), &[0, 3, 1, 2]);
    }

    #[test]
    fn z2_1111_fixed_by_generator(tz in -10.0f64..10.0, phi in -10.0f64..10.0) {
        let o = z2_oeb_1111(tz, phi).unwrap();
        prop_assert_eq!(o.tau().permutation(1), &[0, 1, 2, 3]);
    }
}
