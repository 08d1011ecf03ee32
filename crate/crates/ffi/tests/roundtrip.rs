//! End-to-end exercises of the C interface, driven through the same
//! exported symbols and raw pointers a C caller would use.

use std::ffi::{CStr, CString};
use std::ptr;

use libc::c_char;
use sparse_vqe_ffi::*;

const PAULI_X_COO: &str = r#"{"num_qubits": 1, "entries": [[0, 1, 1.0, 0.0]]}"#;
const HOPPING: &str = r#"{
    "num_modes": 2,
    "terms": [
        {"coeff": [1.0, 0.0], "ops": [["+", 0], ["-", 1]]},
        {"coeff": [1.0, 0.0], "ops": [["+", 1], ["-", 0]]}
    ]
}"#;
const RY_TEMPLATE: &str = r#"{"layers": 1, "entangler": "cnot_ring", "rotations": ["ry"]}"#;
const VQE_TEMPLATE: &str = r#"{"layers": 2, "entangler": "cnot_ring", "rotations": ["ry"]}"#;

fn parse_operator(json: &str) -> *mut svqe_operator {
    let text = CString::new(json).unwrap();
    let mut op = ptr::null_mut();
    let status = unsafe { svqe_operator_parse(text.as_ptr(), &mut op) };
    assert_eq!(status, svqe_status::SVQE_OK, "{}", last_error());
    assert!(!op.is_null());
    op
}

fn parse_ansatz(template: &str, num_qubits: usize) -> *mut svqe_ansatz {
    let text = CString::new(template).unwrap();
    let mut ansatz = ptr::null_mut();
    let status = unsafe { svqe_ansatz_parse(text.as_ptr(), num_qubits, &mut ansatz) };
    assert_eq!(status, svqe_status::SVQE_OK, "{}", last_error());
    ansatz
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(svqe_last_error_message()) }
        .to_str()
        .unwrap()
        .to_string()
}

#[test]
fn version_is_a_nonempty_dotted_string() {
    let version = unsafe { CStr::from_ptr(svqe_version()) }.to_str().unwrap();
    assert!(version.contains('.'), "unexpected version {version:?}");
}

#[test]
fn coo_pipeline_decomposes_and_estimates() {
    unsafe {
        let op = parse_operator(PAULI_X_COO);
        assert_eq!(svqe_operator_num_qubits(op), 1);
        assert_eq!(svqe_operator_validate(op), svqe_status::SVQE_OK);

        // gamma = 0.5 on a unit entry: Lambda = 2, L = 2, 4L = 8 terms,
        // and 1.0 = Lambda/2 is exactly representable.
        let mut terms = ptr::null_mut();
        assert_eq!(
            svqe_decompose(op, 0.5, &mut terms),
            svqe_status::SVQE_OK,
            "{}",
            last_error()
        );
        assert_eq!(svqe_terms_count(terms), 8);
        assert_eq!(svqe_terms_num_qubits(terms), 1);
        assert_eq!(svqe_terms_num_bits(terms), 2);
        assert_eq!(svqe_terms_lambda(terms), 2.0);
        assert!((svqe_terms_residual_bound(terms) - 2.0_f64.sqrt() * 2.0 / 4.0).abs() < 1e-15);
        assert!(!svqe_terms_fallback_split_used(terms));

        // Term metadata: four terms per bit level with coefficient
        // Lambda/2^(l+1), each (class, branch) pair once per level.
        let mut by_level = [0usize; 2];
        let mut coefficient_sum = 0.0;
        for index in 0..8 {
            let mut info = svqe_term_info {
                phase_class: svqe_phase_class::SVQE_PHASE_REAL,
                bit_index: 0,
                branch: svqe_branch::SVQE_BRANCH_PLUS,
                coefficient: 0.0,
            };
            assert_eq!(
                svqe_terms_info(terms, index, &mut info),
                svqe_status::SVQE_OK
            );
            assert!(info.bit_index == 1 || info.bit_index == 2);
            by_level[info.bit_index - 1] += 1;
            assert_eq!(
                info.coefficient,
                2.0 / f64::powi(2.0, info.bit_index as i32 + 1)
            );
            coefficient_sum += info.coefficient;
        }
        assert_eq!(by_level, [4, 4]);
        assert_eq!(coefficient_sum, 3.0);

        let mut info = svqe_term_info {
            phase_class: svqe_phase_class::SVQE_PHASE_REAL,
            bit_index: 0,
            branch: svqe_branch::SVQE_BRANCH_PLUS,
            coefficient: 0.0,
        };
        assert_eq!(
            svqe_terms_info(terms, 8, &mut info),
            svqe_status::SVQE_BAD_INPUT
        );
        assert!(last_error().contains("out of range"), "{}", last_error());

        // One qubit, two RY slots that add their angles: <X> = sin(total).
        let ansatz = parse_ansatz(RY_TEMPLATE, 1);
        assert_eq!(svqe_ansatz_num_qubits(ansatz), 1);
        assert_eq!(svqe_ansatz_parameter_count(ansatz), 2);

        let quarter = std::f64::consts::FRAC_PI_4;
        let mut energy = 0.0;
        assert_eq!(
            svqe_expectation_exact(terms, ansatz, [quarter, quarter].as_ptr(), 2, &mut energy),
            svqe_status::SVQE_OK,
            "{}",
            last_error()
        );
        assert!((energy - 1.0).abs() < 1e-12, "got {energy}");

        assert_eq!(
            svqe_expectation_exact(terms, ansatz, [quarter].as_ptr(), 1, &mut energy),
            svqe_status::SVQE_BAD_INPUT
        );

        // Sampling is seed-deterministic and mode-independent.
        let eighth = std::f64::consts::FRAC_PI_8;
        let theta = [eighth, eighth];
        let mut first = 0.0;
        let mut std_error = 0.0;
        assert_eq!(
            svqe_expectation_sampled(
                terms,
                ansatz,
                theta.as_ptr(),
                2,
                4096,
                9,
                svqe_apply_mode::SVQE_APPLY_DIRECT,
                &mut first,
                &mut std_error,
            ),
            svqe_status::SVQE_OK,
            "{}",
            last_error()
        );
        let expected = (2.0 * eighth).sin();
        assert!(
            (first - expected).abs() < 0.08,
            "got {first}, want {expected}"
        );
        assert!(std_error > 0.0);

        let mut second = 0.0;
        for mode in [
            svqe_apply_mode::SVQE_APPLY_DIRECT,
            svqe_apply_mode::SVQE_APPLY_ORACLE_FAITHFUL,
        ] {
            assert_eq!(
                svqe_expectation_sampled(
                    terms,
                    ansatz,
                    theta.as_ptr(),
                    2,
                    4096,
                    9,
                    mode,
                    &mut second,
                    ptr::null_mut(),
                ),
                svqe_status::SVQE_OK,
                "{}",
                last_error()
            );
            assert_eq!(second.to_bits(), first.to_bits());
        }

        assert_eq!(
            svqe_expectation_sampled(
                terms,
                ansatz,
                theta.as_ptr(),
                2,
                0,
                9,
                svqe_apply_mode::SVQE_APPLY_DIRECT,
                &mut second,
                ptr::null_mut(),
            ),
            svqe_status::SVQE_BAD_INPUT
        );

        svqe_ansatz_free(ansatz);
        svqe_terms_free(terms);
        svqe_operator_free(op);
    }
}

#[test]
fn fermionic_operator_runs_vqe_to_the_ground_energy() {
    unsafe {
        let op = parse_operator(HOPPING);
        assert_eq!(svqe_operator_num_qubits(op), 2);
        assert_eq!(svqe_operator_validate(op), svqe_status::SVQE_OK);

        let mut terms = ptr::null_mut();
        assert_eq!(
            svqe_decompose(op, 1e-3, &mut terms),
            svqe_status::SVQE_OK,
            "{}",
            last_error()
        );
        // One conjugate pair, L = 11 levels at gamma = 1e-3.
        assert_eq!(svqe_terms_count(terms), 44);
        assert_eq!(svqe_terms_num_qubits(terms), 2);

        let ansatz = parse_ansatz(VQE_TEMPLATE, 2);
        assert_eq!(svqe_ansatz_parameter_count(ansatz), 6);

        let mut options = svqe_vqe_options {
            optimizer: svqe_optimizer::SVQE_OPTIMIZER_SPSA,
            mode: svqe_apply_mode::SVQE_APPLY_ORACLE_FAITHFUL,
            shots_per_term: 123,
            max_iters: 0,
            f_tol: 0.0,
            seed: 77,
            restarts: 0,
        };
        assert_eq!(
            svqe_vqe_options_defaults(&mut options),
            svqe_status::SVQE_OK
        );
        assert_eq!(options.optimizer, svqe_optimizer::SVQE_OPTIMIZER_SIMPLEX);
        assert_eq!(options.mode, svqe_apply_mode::SVQE_APPLY_DIRECT);
        assert_eq!(options.shots_per_term, 0);
        assert_eq!(options.max_iters, 2000);
        assert_eq!(options.f_tol, 1e-9);
        assert_eq!(options.restarts, 1);

        options.seed = 3;
        options.restarts = 2;
        options.max_iters = 4000;

        let mut result = ptr::null_mut();
        assert_eq!(
            svqe_vqe_run(terms, ansatz, &options, &mut result),
            svqe_status::SVQE_OK,
            "{}",
            last_error()
        );

        let best = svqe_vqe_result_best_energy(result);
        assert!((best - (-1.0)).abs() < 1e-6, "best energy {best}");
        assert!(svqe_vqe_result_converged(result));
        assert_eq!(
            svqe_vqe_result_stop_reason(result),
            svqe_stop_reason::SVQE_STOP_TOLERANCE
        );
        assert_eq!(svqe_vqe_result_total_shots(result), 0);

        let parameter_count = svqe_vqe_result_parameter_count(result);
        assert_eq!(parameter_count, 6);
        let mut theta = vec![0.0; parameter_count];
        assert_eq!(
            svqe_vqe_result_best_theta(result, theta.as_mut_ptr(), parameter_count),
            svqe_status::SVQE_OK
        );
        assert_eq!(
            svqe_vqe_result_best_theta(result, theta.as_mut_ptr(), parameter_count - 1),
            svqe_status::SVQE_BAD_INPUT
        );

        // Re-evaluating the returned point reproduces the returned energy.
        let mut energy = 0.0;
        assert_eq!(
            svqe_expectation_exact(terms, ansatz, theta.as_ptr(), parameter_count, &mut energy),
            svqe_status::SVQE_OK
        );
        assert!((energy - best).abs() < 1e-12);

        let evaluations = svqe_vqe_result_evaluations(result);
        assert!(evaluations > 0);
        let mut trace = vec![0.0; evaluations];
        assert_eq!(
            svqe_vqe_result_energy_trace(result, trace.as_mut_ptr(), evaluations),
            svqe_status::SVQE_OK
        );
        let trace_min = trace.iter().cloned().fold(f64::INFINITY, f64::min);
        assert_eq!(trace_min, best);

        svqe_vqe_result_free(result);

        // A sampled run consumes shots and still lands near the minimum.
        options.shots_per_term = 1000;
        options.seed = 5;
        options.max_iters = 600;
        options.restarts = 1;
        options.f_tol = 1e-3;
        let mut sampled = ptr::null_mut();
        assert_eq!(
            svqe_vqe_run(terms, ansatz, &options, &mut sampled),
            svqe_status::SVQE_OK,
            "{}",
            last_error()
        );
        assert!(svqe_vqe_result_total_shots(sampled) > 0);
        let sampled_best = svqe_vqe_result_best_energy(sampled);
        assert!((sampled_best - (-1.0)).abs() < 0.2, "got {sampled_best}");

        svqe_vqe_result_free(sampled);
        svqe_ansatz_free(ansatz);
        svqe_terms_free(terms);
        svqe_operator_free(op);
    }
}

#[test]
fn error_paths_set_status_and_message() {
    unsafe {
        let mut op = ptr::null_mut();

        let broken = CString::new("{").unwrap();
        assert_eq!(
            svqe_operator_parse(broken.as_ptr(), &mut op),
            svqe_status::SVQE_BAD_INPUT
        );
        assert!(last_error().contains("JSON"), "{}", last_error());

        let unknown = CString::new(r#"{"foo": 1}"#).unwrap();
        assert_eq!(
            svqe_operator_parse(unknown.as_ptr(), &mut op),
            svqe_status::SVQE_BAD_INPUT
        );

        let not_utf8: [u8; 2] = [0xff, 0];
        assert_eq!(
            svqe_operator_parse(not_utf8.as_ptr() as *const c_char, &mut op),
            svqe_status::SVQE_BAD_INPUT
        );
        assert!(last_error().contains("UTF-8"), "{}", last_error());

        assert_eq!(
            svqe_operator_parse(ptr::null(), &mut op),
            svqe_status::SVQE_NULL_ARGUMENT
        );
        let ok = CString::new(PAULI_X_COO).unwrap();
        assert_eq!(
            svqe_operator_parse(ok.as_ptr(), ptr::null_mut()),
            svqe_status::SVQE_NULL_ARGUMENT
        );

        // A lone hopping monomial has no conjugate: the operator parses
        // (the format is fine) but fails validation and decomposition.
        let lone = CString::new(
            r#"{"num_modes": 2, "terms": [{"coeff": [1.0, 0.0], "ops": [["+", 0], ["-", 1]]}]}"#,
        )
        .unwrap();
        let mut lopsided = ptr::null_mut();
        assert_eq!(
            svqe_operator_parse(lone.as_ptr(), &mut lopsided),
            svqe_status::SVQE_OK
        );
        assert_eq!(
            svqe_operator_validate(lopsided),
            svqe_status::SVQE_VALIDATION_FAILED
        );
        assert!(last_error().contains("conjugate"), "{}", last_error());
        let mut terms = ptr::null_mut();
        assert_eq!(
            svqe_decompose(lopsided, 1e-3, &mut terms),
            svqe_status::SVQE_VALIDATION_FAILED
        );
        svqe_operator_free(lopsided);

        // NULL handles: scalar getters return their documented defaults,
        // frees are no-ops.
        assert_eq!(svqe_operator_num_qubits(ptr::null()), 0);
        assert_eq!(svqe_terms_count(ptr::null()), 0);
        assert_eq!(svqe_terms_lambda(ptr::null()), 0.0);
        assert!(!svqe_terms_fallback_split_used(ptr::null()));
        assert_eq!(svqe_ansatz_parameter_count(ptr::null()), 0);
        assert!(svqe_vqe_result_best_energy(ptr::null()).is_nan());
        assert!(!svqe_vqe_result_converged(ptr::null()));
        assert_eq!(
            svqe_vqe_result_stop_reason(ptr::null()),
            svqe_stop_reason::SVQE_STOP_STALLED
        );
        assert_eq!(svqe_vqe_result_total_shots(ptr::null()), 0);
        svqe_operator_free(ptr::null_mut());
        svqe_terms_free(ptr::null_mut());
        svqe_ansatz_free(ptr::null_mut());
        svqe_vqe_result_free(ptr::null_mut());
    }
}
