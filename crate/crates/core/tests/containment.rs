use contracta::library::{
    identity_weakly_type_instance, identity_z_instance, weakly_type_instances, z_instances,
};
use contracta::verifier::{containment_demo, RowStatus};
use contracta::VerificationConfig;

fn assert_all_positive(table: &contracta::verifier::DemoTable) {
    for row in &table.rows {
        assert!(
            matches!(row.status, RowStatus::Positive | RowStatus::Infeasible),
            "{row:?}"
        );
    }
    assert!(table.all_verified_positive());
}

#[test]
fn z_instances_have_positive_moduli() {
    let cfg = VerificationConfig::default();
    let table = containment_demo(&z_instances(), &cfg).unwrap();
    assert_all_positive(&table);
    let third: Vec<_> = table.rows.iter().filter(|r| r.instance == "third/half").collect();
    assert_eq!(third.len(), cfg.epsilon_grid.len());
    for row in third {
        let eps = row.epsilon.unwrap();
        let delta = row.delta_hat.unwrap();
        // x/3 has δ(ε) = ε(1 − λ)/λ = 2ε
        assert!(delta >= 0.9 * 2.0 * eps, "eps {eps}: {delta}");
    }
}

#[test]
fn weakly_type_instances_have_positive_moduli() {
    let table = containment_demo(&weakly_type_instances(), &VerificationConfig::default()).unwrap();
    assert_all_positive(&table);
}

#[test]
fn identity_instances_are_skipped() {
    let cfg = VerificationConfig {
        n_pairs: 10_000,
        ..Default::default()
    };
    let mut instances = z_instances();
    instances.push(identity_z_instance());
    instances.push(identity_weakly_type_instance());
    let table = containment_demo(&instances, &cfg).unwrap();
    for name in ["identity/half", "identity/linear_half"] {
        let rows: Vec<_> = table.rows.iter().filter(|r| r.instance == name).collect();
        assert_eq!(rows.len(), 1);
        assert!(matches!(rows[0].status, RowStatus::Skipped { .. }));
        assert_eq!(rows[0].delta_hat, None);
    }
    assert!(table.all_verified_positive());
}

#[test]
fn oversized_epsilon_is_infeasible_not_failed() {
    let cfg = VerificationConfig {
        n_pairs: 10_000,
        epsilon_grid: vec![0.5, 50.0],
        ..Default::default()
    };
    let table = containment_demo(&z_instances(), &cfg).unwrap();
    let big: Vec<_> = table.rows.iter().filter(|r| r.epsilon == Some(50.0)).collect();
    assert_eq!(big.len(), z_instances().len());
    assert!(big.iter().all(|r| r.status == RowStatus::Infeasible));
    assert!(table.all_verified_positive());
}
