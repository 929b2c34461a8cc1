mod common;

use std::f64::consts::SQRT_2;

use common::*;
use graphcert::bell::{
    build_graph_inequality, cluster_inequality, evaluate, ghz_inequality, optimal_settings,
    ring_inequality, rotate_inequality, MeasurementAssignment, Setting,
};
use graphcert::fidelity::{
    fidelity_exact, ghz_fidelity_decomposition, stabilizer_fidelity_decomposition,
    stabilizer_group, DecompositionTerm, FidelityDecomposition,
};
use graphcert::sim::gates;
use graphcert::{Graph, LocalObservable, PauliTerm, QuantumState, StabilizerGenerator};

fn bell_operator(b: &graphcert::BellInequality, m: &MeasurementAssignment) -> Dense {
    let n = b.parties();
    let mut op = zeros(1 << n);
    for t in b.terms() {
        let factors: Vec<Dense> = t
            .settings
            .iter()
            .enumerate()
            .map(|(k, s)| match s {
                Setting::Identity => eye(2),
                Setting::Zero => observable_matrix(&m.observable(k + 1, 0)),
                Setting::One => observable_matrix(&m.observable(k + 1, 1)),
            })
            .collect();
        op = add(&op, &scale(&kron_all(&factors), t.coefficient));
    }
    op
}

fn decomposition_matrix(d: &FidelityDecomposition) -> Dense {
    let n = d.qubit_count();
    let mut op = zeros(1 << n);
    for t in d.terms() {
        let m = match t {
            DecompositionTerm::Pauli(p) => pauli_string_matrix(&p.letters.to_string()),
            DecompositionTerm::Product { observables, .. } => kron_all(
                &observables
                    .iter()
                    .map(observable_matrix)
                    .collect::<Vec<_>>(),
            ),
            DecompositionTerm::Projector { projector, .. } => {
                let mut m = zeros(1 << n);
                for bits in projector {
                    let i = usize::from_str_radix(bits, 2).unwrap();
                    m[i][i] = c(1.0, 0.0);
                }
                m
            }
        };
        op = add(&op, &scale(&m, t.coefficient()));
    }
    op
}

fn gens(list: &[&str]) -> Vec<StabilizerGenerator> {
    list.iter().map(|s| s.parse().unwrap()).collect()
}

#[test]
fn bell_values_match_dense_trace_on_random_states() {
    let mut r = rng(11);
    let cases: Vec<(graphcert::BellInequality, MeasurementAssignment)> = vec![
        (
            ghz_inequality(3).unwrap(),
            MeasurementAssignment::standard(3, 1),
        ),
        (
            ghz_inequality(4).unwrap(),
            MeasurementAssignment::standard(4, 1),
        ),
        (
            ring_inequality(4).unwrap(),
            MeasurementAssignment::standard(4, 1),
        ),
        cluster_inequality(3).unwrap(),
        cluster_inequality(4).unwrap(),
        {
            let g = Graph::line(5).unwrap();
            (build_graph_inequality(&g).unwrap(), optimal_settings(&g))
        },
    ];
    for (b, m) in &cases {
        let op = bell_operator(b, m);
        for _ in 0..5 {
            let s = random_density(b.parties(), &mut r);
            let oracle = trace_product(&density(&s), &op);
            assert!(oracle.im.abs() < 1e-10);
            assert!((evaluate(b, m, &s).unwrap() - oracle.re).abs() < 1e-10);
            let p = random_pure(b.parties(), &mut r);
            let oracle = trace_product(&density(&p), &op).re;
            assert!((evaluate(b, m, &p).unwrap() - oracle).abs() < 1e-10);
        }
    }
}

#[test]
fn pauli_expectations_match_dense_trace() {
    let mut r = rng(5);
    for letters in ["XYZ", "YYI", "IZX", "ZZZ", "XIY", "III"] {
        let op = pauli_string_matrix(letters);
        let term = PauliTerm::parse(letters, 1.0).unwrap();
        for _ in 0..4 {
            let s = random_density(3, &mut r);
            let oracle = trace_product(&density(&s), &op).re;
            assert!(
                (s.expectation(&term).unwrap() - oracle).abs() < 1e-12,
                "{letters}"
            );
        }
    }
}

#[test]
fn operator_terms_reconstruct_bell_operator() {
    for (b, m) in [
        cluster_inequality(3).unwrap(),
        cluster_inequality(4).unwrap(),
    ] {
        let dense = bell_operator(&b, &m);
        let mut from_terms = zeros(1 << b.parties());
        for t in b.operator_terms(&m).unwrap() {
            from_terms = add(
                &from_terms,
                &scale(&pauli_string_matrix(&t.letters.to_string()), t.coefficient),
            );
        }
        assert!(max_abs_diff(&dense, &from_terms) < 1e-12);
    }
}

#[test]
fn decompositions_reconstruct_target_projectors() {
    for n in 2..=6 {
        let d = ghz_fidelity_decomposition(n).unwrap();
        let target = outer(QuantumState::ghz(n).unwrap().amplitudes().unwrap());
        assert!(
            max_abs_diff(&decomposition_matrix(&d), &target) < 1e-12,
            "ghz {n}"
        );
    }
    let c3 = stabilizer_fidelity_decomposition(&gens(&["XZI", "ZXZ", "IZX"])).unwrap();
    let target = outer(
        QuantumState::cluster_linear(3)
            .unwrap()
            .amplitudes()
            .unwrap(),
    );
    assert!(max_abs_diff(&decomposition_matrix(&c3), &target) < 1e-12);
    let c4 = stabilizer_fidelity_decomposition(&gens(&["XXZI", "ZZII", "IZXX", "IIZZ"])).unwrap();
    let target = outer(
        QuantumState::cluster_linear(4)
            .unwrap()
            .amplitudes()
            .unwrap(),
    );
    assert!(max_abs_diff(&decomposition_matrix(&c4), &target) < 1e-12);
    for g in [
        Graph::ring(5).unwrap(),
        Graph::star(6).unwrap(),
        Graph::line(6).unwrap(),
    ] {
        let d = stabilizer_fidelity_decomposition(&g.stabilizers()).unwrap();
        let target = outer(QuantumState::graph_state(&g).unwrap().amplitudes().unwrap());
        assert!(max_abs_diff(&decomposition_matrix(&d), &target) < 1e-12);
    }
}

#[test]
fn three_qubit_cluster_sum_matches_expected_signs() {
    let fixture = [
        ("XZI", 1.0),
        ("ZXZ", 1.0),
        ("IZX", 1.0),
        ("XIX", 1.0),
        ("ZYY", 1.0),
        ("YYZ", 1.0),
        ("YXY", -1.0),
        ("III", 1.0),
    ];
    let group = stabilizer_group(&gens(&["XZI", "ZXZ", "IZX"])).unwrap();
    assert_eq!(group.len(), fixture.len());
    for (letters, sign) in fixture {
        let t = group
            .iter()
            .find(|t| t.letters.to_string() == letters)
            .unwrap();
        assert_eq!(t.coefficient, sign / 8.0, "{letters}");
    }
    let negatives: Vec<String> = group
        .iter()
        .filter(|t| t.coefficient < 0.0)
        .map(|t| t.letters.to_string())
        .collect();
    assert_eq!(negatives, ["YXY"]);
}

#[test]
fn four_qubit_cluster_sum_matches_expected_signs() {
    let fixture = [
        ("ZZII", 1.0),
        ("YYZI", -1.0),
        ("XXIZ", 1.0),
        ("ZIYY", -1.0),
        ("XXZI", 1.0),
        ("ZIXX", 1.0),
        ("IZYY", -1.0),
        ("XYXY", 1.0),
        ("IZXX", 1.0),
        ("ZZZZ", 1.0),
        ("YXYX", 1.0),
        ("YXXY", 1.0),
        ("IIZZ", 1.0),
        ("XYYX", 1.0),
        ("YYIZ", -1.0),
        ("IIII", 1.0),
    ];
    let group = stabilizer_group(&gens(&["XXZI", "ZZII", "IZXX", "IIZZ"])).unwrap();
    assert_eq!(group.len(), 16);
    for (letters, sign) in fixture {
        let t = group
            .iter()
            .find(|t| t.letters.to_string() == letters)
            .unwrap();
        assert_eq!(t.coefficient, sign / 16.0, "{letters}");
    }
}

#[test]
fn ghz_to_cluster_overlap_by_inner_product() {
    let g = QuantumState::ghz(3).unwrap();
    let c3 = QuantumState::cluster_linear(3).unwrap();
    let a = g.amplitudes().unwrap();
    let b = c3.amplitudes().unwrap();
    let inner: num_complex::Complex64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    assert!((fidelity_exact(&g, &c3).unwrap() - inner.norm_sqr()).abs() < 1e-12);
}

#[test]
fn rotated_inequality_matches_rotated_dense_operator() {
    let mut r = rng(3);
    let b = ring_inequality(4).unwrap();
    let m = MeasurementAssignment::standard(4, 1);
    let us: Vec<_> = (0..4).map(|_| random_unitary(&mut r)).collect();
    let perm = [2, 4, 1, 3];
    let (rb, rm) = rotate_inequality(&b, &m, &us, Some(&perm)).unwrap();
    let s = random_density(4, &mut r);
    let moved = s
        .relabel_qubits(&perm)
        .unwrap()
        .apply_local_unitaries(&us)
        .unwrap();
    let before = evaluate(&b, &m, &s).unwrap();
    let after = evaluate(&rb, &rm, &moved).unwrap();
    assert!((before - after).abs() < 1e-10);
    let direct = trace_product(&density(&moved), &bell_operator(&rb, &rm)).re;
    let original = trace_product(&density(&s), &bell_operator(&b, &m)).re;
    assert!((direct - original).abs() < 1e-10);
    assert!((after - direct).abs() < 1e-10);
}

#[test]
fn cluster_three_state_from_ring_by_square_root_gates() {
    let ring = QuantumState::graph_state(&Graph::ring(3).unwrap()).unwrap();
    let u = [gates::s(), gates::sqrt_x_dag(), gates::s()];
    let moved = ring.apply_local_unitaries(&u).unwrap();
    let c3 = QuantumState::cluster_linear(3).unwrap();
    assert!((fidelity_exact(&moved, &c3).unwrap() - 1.0).abs() < 1e-12);
    // the other square-root convention does not reach the cluster state
    let other: Vec<_> = [gates::s(), gates::sqrt_x(), gates::s()]
        .iter()
        .map(gates::dagger)
        .collect();
    let f = fidelity_exact(&ring.apply_local_unitaries(&other).unwrap(), &c3).unwrap();
    assert!(f < 0.5, "{f}");
}

#[test]
fn standard_assignment_observables() {
    let m = MeasurementAssignment::standard(3, 2);
    assert_eq!(m.party(1), [LocalObservable::X, LocalObservable::Z]);
    let [a0, a1] = m.party(2);
    assert!((a0.bloch()[0] - 1.0 / SQRT_2).abs() < 1e-15);
    assert!((a1.bloch()[2] + 1.0 / SQRT_2).abs() < 1e-15);
}
