//! JSON entry points against the fuzz seed corpus: valid seeds parse,
//! malformed ones are rejected with an error rather than a panic.

use blurlab::fock::FockOperator;
use blurlab::free_sets::FreeFamily;
use blurlab::linalg::DenseOperator;
use blurlab::types::TypeVector;

fn seed(target: &str, name: &str) -> String {
    let path = format!("{}/../../fuzz/corpus/{target}/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

#[test]
fn dense_operators() {
    let op = DenseOperator::from_json(&seed("dense_operator_json", "pure_zero")).unwrap();
    assert!(op.validate_state().is_ok());
    let op = DenseOperator::from_json(&seed("dense_operator_json", "complex_offdiag")).unwrap();
    assert!(op.is_hermitian(1e-15));
    assert_eq!(DenseOperator::from_json(&seed("dense_operator_json", "scalar")).unwrap().dim(), 1);
    assert!(DenseOperator::from_json(&seed("dense_operator_json", "ragged")).is_err());
    assert!(DenseOperator::from_json("[[[1e999,0]]]").is_err());
}

#[test]
fn type_vectors() {
    let t = TypeVector::from_json(&seed("type_vector_json", "basic")).unwrap();
    assert_eq!(t.counts(), &[2, 1]);
    assert_eq!(TypeVector::from_json(&seed("type_vector_json", "empty")).unwrap().n(), 0);
    assert!(TypeVector::from_json(&seed("type_vector_json", "wrong_sum")).is_err());
}

#[test]
fn free_families() {
    let f = FreeFamily::from_json(&seed("free_family_json", "explicit_qubit")).unwrap();
    assert_eq!(f.level(1).unwrap().len(), 2);
    let f = FreeFamily::from_json(&seed("free_family_json", "product_maximally_mixed")).unwrap();
    assert!((f.c() - 0.5).abs() < 1e-12);
    assert!(FreeFamily::from_json(&seed("free_family_json", "empty_levels")).is_err());
}

#[test]
fn fock_operators() {
    let x = FockOperator::from_json(&seed("fock_operator_json", "one_photon")).unwrap();
    assert_eq!(x.entry(&[1], &[1]).re, 1.0);
    let x = FockOperator::from_json(&seed("fock_operator_json", "two_mode_vacuum")).unwrap();
    assert_eq!(x.dim(), 4);
    assert!(FockOperator::from_json(&seed("fock_operator_json", "oversized")).is_err());
}
