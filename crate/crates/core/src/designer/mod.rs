//! Minimum-distance constrained power minimization by successive linearization.
//!
//! The non-convex program `min ‖r‖²` subject to `‖A_c r‖² ≥ 1` for every pair of
//! superimposed codewords is linearized around a feasible iterate; each linearized
//! program is a minimum-norm point problem over a polyhedron, solved by a dual
//! active-set method with cutting planes over the (large) constraint family.

mod instance;
pub mod qp;
mod sca;

pub use instance::{
    default_sign_structure, BuildOptions, DesignInstance, DiffMap, LabelTable, VariableBlock,
    DEFAULT_COLUMN_ORDER_M4,
};
pub use sca::{
    design, design_from, initialize, linearize, med, med_with_cap, scale_to_feasible, solve_subproblem,
    ConvergenceTrace, DesignOutcome, SolverOptions, StepStatus, StopReason, Subproblem, SubproblemSolution,
    TraceEntry, MED_COLUMN_CAP,
};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symmetric::hadamard_sign;
    use crate::{complexity_report, Codebook, Error, FactorGraph, Matrix, Scheme};
    use alloc::vec;
    use alloc::vec::Vec;

    fn no_dedup() -> BuildOptions {
        BuildOptions { antipodal_dedup: false, ..BuildOptions::default() }
    }

    fn single_user() -> DesignInstance {
        let g = FactorGraph::new(&[[1u8]]).unwrap();
        DesignInstance::build(g, Scheme::Full, 2, None, &no_dedup()).unwrap()
    }

    #[test]
    fn counts_match_complexity_report() {
        let g = FactorGraph::canonical().doubled();
        for scheme in [Scheme::Symmetric, Scheme::ConventionalDifference, Scheme::Full] {
            let inst = DesignInstance::build(g.clone(), scheme, 4, None, &no_dedup()).unwrap();
            let report = complexity_report(scheme, 4, 6, 4, None).unwrap();
            assert_eq!(inst.num_variables() as u64, report.num_variables, "{scheme}");
            assert_eq!(inst.num_constraints(), report.num_constraints, "{scheme}");
        }
        let sym = DesignInstance::build(g, Scheme::Symmetric, 4, None, &BuildOptions::default()).unwrap();
        assert_eq!(sym.num_constraints(), 265_720);
        assert_eq!(sym.num_variables(), 24);
    }

    #[test]
    fn enumeration_agrees_with_count() {
        let g = FactorGraph::canonical().doubled();
        for dedup in [false, true] {
            let opts = BuildOptions { antipodal_dedup: dedup, ..BuildOptions::default() };
            let inst = DesignInstance::build(g.clone(), Scheme::Symmetric, 4, None, &opts).unwrap();
            let mut n = 0u64;
            inst.for_each_constraint(|labels| {
                assert_eq!(inst.constraint_labels(inst.constraint_id(labels)), labels);
                n += 1;
            });
            assert_eq!(n, inst.num_constraints());
        }
    }

    #[test]
    fn cap_enforced() {
        let g = FactorGraph::canonical().doubled();
        let opts = BuildOptions { antipodal_dedup: false, constraint_cap: 1_000_000 };
        assert!(matches!(
            DesignInstance::build(g, Scheme::Full, 4, None, &opts),
            Err(Error::TooManyConstraints { count: 8_386_560, cap: 1_000_000 })
        ));
    }

    #[test]
    fn single_user_instance() {
        let inst = single_user();
        assert_eq!(inst.num_variables(), 2);
        assert_eq!(inst.num_constraints(), 1);
        let mut forms = Vec::new();
        inst.for_each_constraint(|l| forms.push(inst.constraint_matrix(l)));
        assert_eq!(forms, vec![Matrix::from_rows(&[[1.0, -1.0]]).unwrap()]);
    }

    #[test]
    fn sign_structure_checked() {
        let g = FactorGraph::canonical();
        let wrong = vec![hadamard_sign(2); 6];
        assert!(matches!(
            DesignInstance::build(g.clone(), Scheme::Symmetric, 4, Some(wrong), &BuildOptions::default()),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(matches!(
            DesignInstance::build(g, Scheme::Symmetric, 3, None, &BuildOptions::default()),
            Err(Error::NotPowerOfTwo(3))
        ));
    }

    #[test]
    fn scaling_example() {
        let inst = single_user();
        let r = scale_to_feasible(&inst, &[0.3, -0.2], 0.002).unwrap();
        // Oracle: minimum pairwise distance 0.5, factor 1.002 / 0.5.
        let factor = 1.002 / (0.3f64 - -0.2).abs();
        assert!((r[0] - 0.3 * factor).abs() < 1e-12 && (r[1] + 0.2 * factor).abs() < 1e-12);
        assert!((r[0] - 0.6012).abs() < 1e-12 && (r[1] + 0.4008).abs() < 1e-12);
        assert!(inst.min_quadratic(&r) >= 1.0);
        assert!(matches!(scale_to_feasible(&inst, &[0.4, 0.4], 0.0), Err(Error::InfeasiblePoint(_))));
    }

    #[test]
    fn initialization_is_feasible_and_deterministic() {
        let g = FactorGraph::canonical().doubled();
        let inst = DesignInstance::build(g, Scheme::Symmetric, 4, None, &BuildOptions::default()).unwrap();
        let a = initialize(&inst, 9, 1e-3).unwrap();
        let b = initialize(&inst, 9, 1e-3).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|&v| v >= 0.0));
        assert!(inst.min_quadratic(&a) >= 1.0);
        assert_ne!(a, initialize(&inst, 10, 1e-3).unwrap());
    }

    #[test]
    fn linearization_example() {
        let inst = single_user();
        let sub = linearize(&inst, &[1.0, 0.0], 0.0).unwrap();
        let mut labels = Vec::new();
        inst.for_each_constraint(|l| labels = l.to_vec());
        let (a, b) = sub.constraint(&labels);
        assert_eq!((a, b), (vec![2.0, -2.0], 2.0));
        assert!(sub.min_slack(&[1.0, 0.0]).abs() < 1e-15);
        let sol = solve_subproblem(&sub, &[], &SolverOptions::default());
        assert!((sol.r[0] - 0.5).abs() < 1e-9 && (sol.r[1] + 0.5).abs() < 1e-9);
        assert!(matches!(linearize(&inst, &[0.2, 0.0], 1e-8), Err(Error::InfeasiblePoint(_))));
    }

    #[test]
    fn single_user_design_reaches_optimum() {
        let inst = single_user();
        let out = design(&inst, &SolverOptions { seed: 3, ..SolverOptions::default() }).unwrap();
        assert!(out.trace.converged);
        assert!((out.trace.entries.last().unwrap().objective - 0.5).abs() < 1e-6);
        assert!((med(&out.codebooks).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn symmetric_design_on_small_graph() {
        let g = FactorGraph::canonical();
        let inst = DesignInstance::build(g, Scheme::Symmetric, 2, None, &BuildOptions::default()).unwrap();
        let out = design(&inst, &SolverOptions { seed: 5, ..SolverOptions::default() }).unwrap();
        assert!(out.trace.converged);
        assert!(out.trace.is_monotone(1e-9));
        assert!(out.trace.final_step().unwrap() < 0.01);
        assert!(med(&out.codebooks).unwrap() >= 1.0 - 1e-4);
        assert!(out.profiles.as_ref().unwrap().iter().all(|p| p.magnitudes().iter().all(|&m| m >= 0.0)));

        // The final point is (numerically) a fixed point of its own linearization.
        let again = design_from(&inst, &out.r, &SolverOptions::default()).unwrap();
        assert_eq!(again.trace.outer_iterations(), 1);
        assert!(again.trace.final_step().unwrap() < 1e-6);
    }

    #[test]
    fn full_scheme_design_respects_mask() {
        let g = FactorGraph::new(&[[1u8, 1, 0], [1, 0, 1]]).unwrap();
        let inst = DesignInstance::build(g.clone(), Scheme::Full, 2, None, &BuildOptions::default()).unwrap();
        let out = design(&inst, &SolverOptions { seed: 1, ..SolverOptions::default() }).unwrap();
        for cb in &out.codebooks {
            assert!(cb.matches_graph(&g));
            for k in (0..2).filter(|k| !cb.support().contains(k)) {
                assert!(cb.matrix().row(k).iter().all(|&v| v == 0.0));
            }
        }
        assert!(out.trace.is_monotone(1e-9));
        assert!(med(&out.codebooks).unwrap() >= 1.0 - 1e-4);
        assert_eq!(inst.variables_from_codebooks(&out.codebooks).unwrap(), out.r);
    }

    #[test]
    fn collision_is_infeasible() {
        // Two users whose codebooks coincide up to sign on the same resource.
        let g = FactorGraph::new(&[[1u8, 1]]).unwrap();
        let inst = DesignInstance::build(g, Scheme::Full, 2, None, &BuildOptions::default()).unwrap();
        let a = Codebook::new(0, Matrix::from_rows(&[[1.0, -1.0]]).unwrap(), vec![0]).unwrap();
        let b = Codebook::new(1, Matrix::from_rows(&[[-1.0, 1.0]]).unwrap(), vec![0]).unwrap();
        assert_eq!(med(&[a.clone(), b.clone()]).unwrap(), 0.0);
        let r = inst.variables_from_codebooks(&[a, b]).unwrap();
        assert!(matches!(
            design_from(&inst, &r, &SolverOptions::default()),
            Err(Error::InfeasiblePoint(_))
        ));
    }

    #[test]
    fn med_single_user_is_pairwise_minimum() {
        let cb = Codebook::new(0, Matrix::from_rows(&[[0.0, 3.0, 7.0], [0.0, 4.0, 7.0]]).unwrap(), vec![0, 1])
            .unwrap();
        assert!((med(&[cb]).unwrap() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn trace_csv_layout() {
        let inst = single_user();
        let out = design(&inst, &SolverOptions::default()).unwrap();
        let csv = out.trace.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("iter,objective,step_norm,status"));
        assert!(lines.next().unwrap().starts_with("0,"));
        assert_eq!(csv.lines().count(), out.trace.entries.len() + 1);
    }
}
