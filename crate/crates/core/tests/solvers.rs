use num_complex::Complex64;
use radar_cs::bounds::{max_admissible_sparsity, thm1_bound};
use radar_cs::rng::{complex_gaussian, seeded};
use radar_cs::scenes::{random_scene, scene_error, vectorize};
use radar_cs::solvers::{basis_pursuit, bpdn_entrywise, l0_oracle, omp};
use radar_cs::tfcore::alltop_sequence;
use radar_cs::{build_dictionary, CoefficientVector, ComplexVector, Error, GaborDictionary, ShiftIndex, SolverOptions};

fn alltop(n: usize) -> GaborDictionary {
    build_dictionary(&alltop_sequence(n).unwrap()).unwrap()
}

fn opts() -> SolverOptions {
    SolverOptions { penalty: 10.0, ..SolverOptions::default() }
}

fn residual(dict: &GaborDictionary, s: &CoefficientVector, y: &ComplexVector) -> Vec<Complex64> {
    let fitted = dict.apply(s).unwrap();
    fitted.as_slice().iter().zip(y.as_slice()).map(|(a, b)| a - b).collect()
}

#[test]
fn bp_recovers_a_single_atom() {
    let dict = alltop(11);
    let cell = ShiftIndex::new(4, 9, 11).unwrap();
    let s = CoefficientVector::unit(11, cell).unwrap();
    let y = dict.apply(&s).unwrap();
    let r = basis_pursuit(&dict, &y, &SolverOptions::default()).unwrap();
    assert!(r.converged);
    assert!(scene_error(&s, &r.solution).unwrap() < 1e-8);
    assert!((r.objective - 1.0).abs() < 1e-8);
}

#[test]
fn bp_exact_in_coherence_regime() {
    let dict = alltop(47);
    for seed in 0..10 {
        let s = vectorize(&random_scene(47, 3, seed).unwrap());
        let y = dict.apply(&s).unwrap();
        let r = basis_pursuit(&dict, &y, &opts()).unwrap();
        assert!(r.converged, "seed {seed}");
        assert!(scene_error(&s, &r.solution).unwrap() < 1e-6, "seed {seed}");
        assert!((r.objective - s.l1_norm()).abs() < 1e-6);
    }
}

#[test]
fn bp_default_penalty_also_exact() {
    let dict = alltop(23);
    let s = vectorize(&random_scene(23, 2, 5).unwrap());
    let y = dict.apply(&s).unwrap();
    let r = basis_pursuit(&dict, &y, &SolverOptions::default()).unwrap();
    assert!(r.converged);
    assert!(scene_error(&s, &r.solution).unwrap() < 1e-6);
}

#[test]
fn bp_is_feasible_and_no_worse_than_truth() {
    // beyond the recovery regime the minimizer differs from the scene, but it must
    // satisfy the constraint and have l1 norm at most that of the scene
    let dict = alltop(23);
    for seed in 0..6 {
        let s = vectorize(&random_scene(23, 10, seed).unwrap());
        let y = dict.apply(&s).unwrap();
        let r = basis_pursuit(&dict, &y, &opts()).unwrap();
        assert!(r.converged, "seed {seed}");
        let res: f64 = residual(&dict, &r.solution, &y).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!(res <= 1e-6 * (1.0 + y.norm()), "seed {seed}: residual {res}");
        assert!(r.objective <= s.l1_norm() + 1e-6, "seed {seed}: {} > {}", r.objective, s.l1_norm());
        assert!((r.objective - r.solution.l1_norm()).abs() < 1e-12);
    }
}

#[test]
fn bp_zero_observation_gives_zero() {
    let dict = alltop(7);
    let y = ComplexVector::zeros(7).unwrap();
    let r = basis_pursuit(&dict, &y, &SolverOptions::default()).unwrap();
    assert!(r.converged);
    assert_eq!(r.objective, 0.0);
}

#[test]
fn bp_reports_non_convergence_honestly() {
    let dict = alltop(31);
    let s = vectorize(&random_scene(31, 12, 2).unwrap());
    let y = dict.apply(&s).unwrap();
    let tight = SolverOptions { max_iterations: 3, polish: false, ..SolverOptions::default() };
    let r = basis_pursuit(&dict, &y, &tight).unwrap();
    assert!(!r.converged);
    assert_eq!(r.iterations, 3);
}

#[test]
fn bp_is_deterministic() {
    let dict = alltop(17);
    let s = vectorize(&random_scene(17, 5, 9).unwrap());
    let y = dict.apply(&s).unwrap();
    let a = basis_pursuit(&dict, &y, &opts()).unwrap();
    let b = basis_pursuit(&dict, &y, &opts()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn solver_input_errors() {
    let dict = alltop(7);
    let y = ComplexVector::zeros(5).unwrap();
    assert!(matches!(basis_pursuit(&dict, &y, &opts()), Err(Error::LengthMismatch { .. })));
    assert!(matches!(omp(&dict, &y, 1, 0.0), Err(Error::LengthMismatch { .. })));
    let y = ComplexVector::zeros(7).unwrap();
    let bad = SolverOptions { penalty: 0.0, ..SolverOptions::default() };
    assert!(basis_pursuit(&dict, &y, &bad).is_err());
    let bad = SolverOptions { relaxation: 2.0, ..SolverOptions::default() };
    assert!(basis_pursuit(&dict, &y, &bad).is_err());
    assert!(bpdn_entrywise(&dict, &y, -1.0, &opts()).is_err());
    assert!(omp(&dict, &y, 0, 0.0).is_err());
}

#[test]
fn bpdn_with_zero_bound_is_bp() {
    let dict = alltop(13);
    let s = vectorize(&random_scene(13, 2, 4).unwrap());
    let y = dict.apply(&s).unwrap();
    assert_eq!(bpdn_entrywise(&dict, &y, 0.0, &opts()).unwrap(), basis_pursuit(&dict, &y, &opts()).unwrap());
}

#[test]
fn bpdn_large_bound_gives_zero() {
    let dict = alltop(13);
    let s = vectorize(&random_scene(13, 3, 1).unwrap());
    let y = dict.apply(&s).unwrap();
    let biggest = y.as_slice().iter().map(|z| z.norm()).fold(0.0, f64::max);
    let r = bpdn_entrywise(&dict, &y, biggest * 1.01, &opts()).unwrap();
    assert!(r.converged);
    assert!(r.objective < 1e-6, "objective {}", r.objective);
}

#[test]
fn bpdn_respects_bound_and_is_stable() {
    let n = 47;
    let dict = alltop(n);
    let eps = 0.01;
    // the entrywise problem has a slow ADMM tail; l1 errors of order one need far less accuracy
    let loose = SolverOptions { abs_tol: 1e-6, rel_tol: 1e-6, ..opts() };
    for seed in 0..4u64 {
        let s = vectorize(&random_scene(n, 2, seed).unwrap());
        let clean = dict.apply(&s).unwrap();
        let mut rng = seeded(seed + 1000);
        let noise: Vec<Complex64> = (0..n).map(|_| complex_gaussian(&mut rng)).collect();
        let peak = noise.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let y = ComplexVector::new(
            clean.as_slice().iter().zip(&noise).map(|(a, e)| a + e * (eps / peak)).collect(),
        )
        .unwrap();
        let r = bpdn_entrywise(&dict, &y, eps, &loose).unwrap();
        assert!(r.converged, "seed {seed}");
        let worst = residual(&dict, &r.solution, &y).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(worst <= eps + 1e-6, "seed {seed}: residual entry {worst}");
        // the scene itself is feasible, so the minimizer cannot have a larger norm
        assert!(r.objective <= s.l1_norm() + 1e-4);
        let l1: f64 = s.as_slice().iter().zip(r.solution.as_slice()).map(|(a, b)| (a - b).norm()).sum();
        assert!(l1 <= 1.0, "seed {seed}: l1 error {l1}");
    }
}

#[test]
fn omp_exact_in_coherence_regime() {
    let dict = alltop(47);
    for seed in 0..10 {
        let s = vectorize(&random_scene(47, 3, seed).unwrap());
        let y = dict.apply(&s).unwrap();
        let r = omp(&dict, &y, 3, 1e-10 * y.norm()).unwrap();
        assert!(r.converged);
        assert_eq!(r.iterations, 3);
        assert!(scene_error(&s, &r.solution).unwrap() < 1e-10);
    }
}

#[test]
fn omp_support_never_exceeds_limit() {
    let dict = alltop(13);
    let s = vectorize(&random_scene(13, 9, 3).unwrap());
    let y = dict.apply(&s).unwrap();
    for limit in 1..=5 {
        let r = omp(&dict, &y, limit, 0.0).unwrap();
        assert!(r.solution.support(0.0).len() <= limit);
        assert_eq!(r.iterations, limit);
        assert!(!r.converged);
    }
    // the residual shrinks as atoms are added
    let norms: Vec<f64> = (1..=5).map(|l| omp(&dict, &y, l, 0.0).unwrap().primal_residual).collect();
    assert!(norms.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{norms:?}");
}

#[test]
fn omp_picks_exact_atom_first() {
    let dict = alltop(11);
    let cell = ShiftIndex::new(3, 7, 11).unwrap();
    let mut s = CoefficientVector::unit(11, cell).unwrap();
    s.as_mut_slice()[cell.flat(11)] = Complex64::new(0.0, -2.5);
    let y = dict.apply(&s).unwrap();
    let r = omp(&dict, &y, 4, 1e-12).unwrap();
    assert_eq!(r.iterations, 1);
    assert_eq!(r.solution.support(1e-12), vec![cell.flat(11)]);
}

#[test]
fn solvers_agree_with_exhaustive_search() {
    for n in [5usize, 7] {
        let dict = alltop(n);
        let k = max_admissible_sparsity(thm1_bound(n).unwrap());
        assert_eq!(k, 1);
        for seed in 0..10 {
            let s = vectorize(&random_scene(n, k, seed).unwrap());
            let y = dict.apply(&s).unwrap();
            let l0 = l0_oracle(&dict, &y, k).unwrap();
            let bp = basis_pursuit(&dict, &y, &opts()).unwrap();
            let g = omp(&dict, &y, k, 1e-12 * y.norm()).unwrap();
            assert!(scene_error(&l0.solution, &s).unwrap() < 1e-10);
            assert!(scene_error(&bp.solution, &l0.solution).unwrap() < 1e-6);
            assert!(scene_error(&g.solution, &l0.solution).unwrap() < 1e-6);
        }
    }
}

#[test]
fn oracle_finds_two_sparse_scene() {
    let dict = alltop(7);
    let s = vectorize(&random_scene(7, 2, 11).unwrap());
    let y = dict.apply(&s).unwrap();
    let r = l0_oracle(&dict, &y, 2).unwrap();
    assert!(r.converged);
    assert!(r.primal_residual < 1e-10);
    assert!(scene_error(&s, &r.solution).unwrap() < 1e-10);
}

#[test]
fn oracle_refuses_huge_enumerations() {
    let dict = alltop(47);
    let y = dict.apply(&vectorize(&random_scene(47, 3, 0).unwrap())).unwrap();
    assert!(matches!(l0_oracle(&dict, &y, 3), Err(Error::EnumerationBudget(_))));
}
