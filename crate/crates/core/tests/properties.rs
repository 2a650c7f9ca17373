mod common;

use proptest::prelude::*;
use uomkit::{is_orthogonal_matrix, parse_matrix, FormalMatrix, Var};

fn run(check: common::Check, seed: u64) -> Result<(), TestCaseError> {
    check(seed).map_err(TestCaseError::fail)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn composition_is_uom_iff_parts_are(seed in any::<u64>()) {
        run(common::compose_biconditional, seed)?;
    }

    #[test]
    fn doubling_blocks_are_orthogonal(seed in any::<u64>()) {
        run(common::doubling_blocks_orthogonal, seed)?;
    }

    #[test]
    fn merge_order_respects_uom(seed in any::<u64>()) {
        run(common::merge_order, seed)?;
    }

    #[test]
    fn canonical_form_is_invariant(seed in any::<u64>()) {
        run(common::canonical_invariance, seed)?;
    }

    #[test]
    fn evaluation_resolves_identity(seed in any::<u64>()) {
        run(common::evaluation_resolution, seed)?;
    }

    #[test]
    fn mu_one_criterion(seed in any::<u64>()) {
        run(common::mu_one_criterion, seed)?;
    }

    #[test]
    fn text_round_trip(cells in prop::collection::vec((0u32..30, any::<bool>()), 1..40), n in 1usize..6) {
        let m = cells.len().div_ceil(n);
        let entries: Vec<Var> = (0..m * n).map(|k| {
            let (id, p) = cells[k % cells.len()];
            Var::new(id, p)
        }).collect();
        let x = FormalMatrix::new(m, n, entries).unwrap();
        let norm = x.normalized();
        prop_assert_eq!(parse_matrix(&x.to_text()).unwrap().normalized(), norm.clone());
        prop_assert_eq!(parse_matrix(&x.to_extended()).unwrap().normalized(), norm.clone());
        prop_assert_eq!(FormalMatrix::from_json(&x.to_json()).unwrap().normalized(), norm);
        prop_assert_eq!(is_orthogonal_matrix(&x), is_orthogonal_matrix(&x.normalized()));
    }
}
