use gengeom::curvature::{
    action_value, background_equations, dsquared, gradient_check, gric, gric_div_shift_check,
    gric_flip_check, gric_pair, ricci_flow, scalar_curvature, tangency_check, Divergence,
};
use gengeom::genmetric::{admissible_check, vplus_of_double, GeneralizedMetric, IsotropicSubalgebra};
use gengeom::liealg::{build_abelian, build_so, build_su, double, involution, DoubleAlgebra, Involution};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn graded_double(base: &str, lambda: f64, c: f64) -> DoubleAlgebra {
    let (a, scheme) = match base {
        "su2" => (build_su(2).unwrap(), Involution::SuBlock),
        "su3" => (build_su(3).unwrap(), Involution::SuReal),
        "so32" => (build_so(3, 2).unwrap(), Involution::SoLast),
        _ => unreachable!(),
    };
    let split = involution(&a, scheme).unwrap();
    let k = a.rescale_metric(lambda).unwrap();
    double(&k, c).unwrap().with_grading(split)
}

/// Brute-force `Tr(P+ ad_a P- ad_b)` with full matrices.
fn trace_oracle(d: &DoubleAlgebra, v: &GeneralizedMetric, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let alg = &d.algebra;
    (v.projector_plus() * alg.ad(a) * v.projector_minus() * alg.ad(b)).trace()
}

#[test]
fn abelian_gric_vanishes() {
    let ab = build_abelian(2, &DMatrix::identity(2, 2)).unwrap();
    let d = double(&ab, 0.0).unwrap().with_grading(gengeom::liealg::InvolutiveSplitting::new(2, vec![]));
    let v = vplus_of_double(&d).unwrap();
    let div = Divergence::new(DVector::from_vec(vec![0.3, -1.0, 2.0, 0.5]));
    assert_eq!(gric(&d.algebra, &v, &div).unwrap().matrix.amax(), 0.0);
    assert_eq!(scalar_curvature(&d.algebra, &v, &Divergence::zero(4)).unwrap(), 0.0);
    assert!(background_equations(&d.algebra, &v, &Divergence::zero(4)).unwrap().passed());
    assert_eq!(dsquared(&ab).unwrap(), 0.0);
}

#[test]
fn gric_on_doubles_matches_killing_formula() {
    for (base, lambda) in [("su2", -1.0), ("su3", -2.0), ("so32", 1.0)] {
        for c in [-1.0, -0.5, 0.0, 0.7, 1.0] {
            let d = graded_double(base, lambda, c);
            let v = vplus_of_double(&d).unwrap();
            let split = d.grading.clone().unwrap();
            let kil = d.base.killing_form();
            let zero = Divergence::zero(d.algebra.dim());
            for &i in &split.indices1 {
                for &j in &split.indices1 {
                    let a = d.embed_basis(1.0, 1.0, i);
                    let b = d.embed_basis(1.0, -1.0, j);
                    let val = gric_pair(&d.algebra, &v, &zero, &a, &b);
                    let expect = (c - 1.0) / 2.0 * kil[(i, j)];
                    assert!((val - expect).abs() < 1e-8, "{base} c={c}: {val} vs {expect}");
                    assert!((val + trace_oracle(&d, &v, &a, &b)).abs() < 1e-9);
                }
                for &j in &split.indices0 {
                    for (p, q) in [(1.0, 0.0), (0.0, 1.0)] {
                        let a = d.embed_basis(1.0, 1.0, i);
                        let b = d.embed_basis(p, q, j);
                        assert!(gric_pair(&d.algebra, &v, &zero, &a, &b).abs() < 1e-10);
                    }
                }
            }
        }
    }
}

#[test]
fn scalar_curvature_on_doubles() {
    for (base, lambda) in [("su2", -1.0), ("su3", -3.0), ("so32", 1.0)] {
        for c in [-1.0, -0.5, 0.0, 0.7, 1.0] {
            let d = graded_double(base, lambda, c);
            let v = vplus_of_double(&d).unwrap();
            let dim1 = d.grading.as_ref().unwrap().indices1.len() as f64;
            let r = scalar_curvature(&d.algebra, &v, &Divergence::zero(d.algebra.dim())).unwrap();
            assert!((r - (1.0 + c) / 4.0 * lambda * dim1).abs() < 1e-8, "{base} {c}: {r}");
        }
    }
    let d = graded_double("su2", -1.0, 1.0);
    let v = vplus_of_double(&d).unwrap();
    let r = scalar_curvature(&d.algebra, &v, &Divergence::zero(6)).unwrap();
    assert!((r + 1.0).abs() < 1e-12);
    assert!((action_value(&d.algebra, &v).unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn scalar_curvature_shifts_by_eps_norm() {
    let d = graded_double("su2", -1.0, 0.3);
    let v = vplus_of_double(&d).unwrap();
    let eps = DVector::from_vec(vec![0.2, -0.4, 0.1, 0.7, 0.3, -0.5]);
    let r0 = scalar_curvature(&d.algebra, &v, &Divergence::zero(6)).unwrap();
    let r1 = scalar_curvature(&d.algebra, &v, &Divergence::new(eps.clone())).unwrap();
    // independent: <ε+, ε+> from explicit dual bases
    let s = v.span();
    let g = d.algebra.metric();
    let gram = s.transpose() * g * s;
    let proj = s.transpose() * g * &eps;
    let expect = (proj.transpose() * gram.try_inverse().unwrap() * proj)[0];
    assert!((r1 - r0 - expect).abs() < 1e-12);
}

fn random_vplus(d: &DoubleAlgebra, rng: &mut ChaCha8Rng) -> GeneralizedMetric {
    let v = vplus_of_double(d).unwrap();
    let phi = DMatrix::from_fn(v.dim_plus(), v.dim_minus(), |_, _| rng.gen_range(-0.3..0.3));
    v.deform(&phi, 1.0).unwrap()
}

#[test]
fn frame_independence() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for base in ["su2", "so32"] {
        let d = graded_double(base, if base == "su2" { -1.0 } else { 1.0 }, 0.4);
        let alg = &d.algebra;
        let v = random_vplus(&d, &mut rng);
        let zero = Divergence::zero(alg.dim());
        let r = gric(alg, &v, &zero).unwrap().matrix;
        let s = scalar_curvature(alg, &v, &zero).unwrap();
        let a = DMatrix::from_fn(v.dim_plus(), v.dim_plus(), |i, j| if i == j { 1.0 } else { 0.0 } + rng.gen_range(-0.4..0.4));
        let b = DMatrix::from_fn(v.dim_minus(), v.dim_minus(), |i, j| if i == j { 1.0 } else { 0.0 } + rng.gen_range(-0.4..0.4));
        let w = GeneralizedMetric::with_minus(alg, v.span() * &a, v.span_minus() * &b).unwrap();
        let r2 = gric(alg, &w, &zero).unwrap().matrix;
        assert!((a.transpose() * &r * &b - r2).amax() < 1e-9);
        assert!((scalar_curvature(alg, &w, &zero).unwrap() - s).abs() < 1e-9);
    }
}

#[test]
fn divergence_shift_and_flip() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let d = graded_double("su2", -1.0, 0.0);
    let alg = &d.algebra;
    let v = random_vplus(&d, &mut rng);
    let e1 = Divergence::new(DVector::from_fn(6, |_, _| rng.gen_range(-1.0..1.0)));
    let e2 = Divergence::new(DVector::from_fn(6, |_, _| rng.gen_range(-1.0..1.0)));
    assert!(gric_div_shift_check(alg, &v, &e1, &e1).unwrap().get("shift").unwrap() == 0.0);
    assert!(gric_div_shift_check(alg, &v, &e1, &e2).unwrap().passed());
    // a shift lying in V- leaves GRic unchanged
    let e3 = Divergence::new(&e1.eps + v.project_minus(&e2.eps));
    let a = gric(alg, &v, &e1).unwrap().matrix;
    let b = gric(alg, &v, &e3).unwrap().matrix;
    assert!((a - b).amax() < 1e-12);
    assert!(gric_flip_check(alg, &v, &Divergence::zero(6)).unwrap().passed());
    assert!(gric_flip_check(alg, &v, &e2).unwrap().passed());
}

#[test]
fn gradient_matches_contraction() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for base in ["su2", "so32"] {
        let d = graded_double(base, if base == "su2" { -1.0 } else { 1.0 }, 0.2);
        for _ in 0..5 {
            let v = random_vplus(&d, &mut rng);
            let phi = DMatrix::from_fn(v.dim_plus(), v.dim_minus(), |_, _| rng.gen_range(-1.0..1.0));
            let rep = gradient_check(&d.algebra, &v, &phi, 1e-5).unwrap();
            assert!(rep.passed(), "{base}: {rep:?}");
        }
        let v = vplus_of_double(&d).unwrap();
        let zero = DMatrix::zeros(v.dim_plus(), v.dim_minus());
        let rep = gradient_check(&d.algebra, &v, &zero, 1e-5).unwrap();
        assert_eq!(rep.get("relative_error").unwrap(), 0.0);
    }
}

#[test]
fn dsquared_matches_triple_sum() {
    let a = build_su(2).unwrap();
    let k = a.rescale_metric(1.0).unwrap();
    let n = 3;
    let ginv = k.metric().clone().try_inverse().unwrap();
    let mut cc = 0.0;
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                let mut up = 0.0;
                for x in 0..n {
                    for y in 0..n {
                        for z in 0..n {
                            up += ginv[(i, x)] * ginv[(j, y)] * ginv[(l, z)] * k.structure(x, y, z);
                        }
                    }
                }
                cc += k.structure(i, j, l) * up;
            }
        }
    }
    assert!((dsquared(&k).unwrap() + cc / 48.0).abs() < 1e-12);
    // frame change by a metric-orthogonal rotation
    let th: f64 = 0.7;
    let rot = DMatrix::from_row_slice(3, 3, &[th.cos(), -th.sin(), 0.0, th.sin(), th.cos(), 0.0, 0.0, 0.0, 1.0]);
    let k2 = k.change_basis(&rot).unwrap();
    assert!((dsquared(&k2).unwrap() - dsquared(&k).unwrap()).abs() < 1e-12);
    // doubles: the cube of the structure tensor vanishes
    let d = graded_double("su3", -1.0, 0.6);
    assert!(dsquared(&d.algebra).unwrap().abs() < 1e-10);
}

fn su2_admissible(d: &DoubleAlgebra, p: f64, q: f64, r: f64, s: f64) -> (GeneralizedMetric, IsotropicSubalgebra) {
    let alg = &d.algebra;
    let e3 = d.embed_basis(1.0, 0.0, 2);
    let mut e1 = DVector::zeros(6);
    e1[0] = p;
    e1[3] = q;
    e1[1] = r;
    e1[4] = s;
    let e2 = alg.bracket(&e3, &e1);
    let v = GeneralizedMetric::new(alg, DMatrix::from_columns(&[e1, e2])).unwrap();
    let s = IsotropicSubalgebra::new(alg, DMatrix::from_columns(&[e3])).unwrap();
    (v, s)
}

#[test]
fn tangency_and_admissibility() {
    let d = graded_double("su2", -1.0, 0.0);
    let (v, s) = su2_admissible(&d, 1.0, 0.3, 0.2, 0.1);
    assert!(admissible_check(&d.algebra, &v, &s).passed());
    assert!(tangency_check(&d.algebra, &v, &s).unwrap().passed());
    // negative control: a V+ that is not s-invariant
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let w = random_vplus(&d, &mut rng);
    assert!(!admissible_check(&d.algebra, &w, &s).passed());
    assert!(!tangency_check(&d.algebra, &w, &s).unwrap().passed());
    // t a0 is not isotropic against a0, so a1 is not a valid s
    let a1 = DMatrix::from_columns(&[d.embed_basis(1.0, 0.0, 0), d.embed_basis(1.0, 0.0, 1)]);
    assert!(IsotropicSubalgebra::new(&d.algebra, a1).is_err());
}

#[test]
fn flow_preserves_admissibility_and_tracks_action() {
    let d = graded_double("su2", -1.0, 0.0);
    let (v, s) = su2_admissible(&d, 1.0, 0.3, 0.2, 0.1);
    let traj = ricci_flow(&d.algebra, &v, &Divergence::zero(6), 1.0, 1e-3).unwrap();
    assert!(traj.diagnostic.is_none(), "{:?}", traj.diagnostic);
    assert_eq!(traj.states.len(), 1001);
    let mut worst = 0.0f64;
    for st in &traj.states {
        let rep = admissible_check(&d.algebra, &st.metric, &s);
        worst = worst.max(rep.max_residual());
    }
    assert!(worst < 1e-6, "{worst}");
    // chain rule: dS/dt against centered differences of the recorded action
    for k in (1..traj.states.len() - 1).step_by(50) {
        let ds = (traj.states[k + 1].action - traj.states[k - 1].action) / 2e-3;
        assert!((ds - traj.states[k].action_rate).abs() < 1e-4, "{ds} vs {}", traj.states[k].action_rate);
    }
    let (a0, a1) = (traj.states[0].action, traj.states.last().unwrap().action);
    assert!((a1 - a0).abs() > 1e-3, "flow is stationary: {a0} -> {a1}");
    assert!(ricci_flow(&d.algebra, &v, &Divergence::zero(6), 1.0, 0.0).is_err());
}

#[test]
fn abelian_flow_is_constant() {
    let ab = build_abelian(2, &DMatrix::identity(2, 2)).unwrap();
    let d = double(&ab, 0.0).unwrap().with_grading(gengeom::liealg::InvolutiveSplitting::new(2, vec![]));
    let v = vplus_of_double(&d).unwrap();
    let traj = ricci_flow(&d.algebra, &v, &Divergence::zero(4), 0.1, 0.01).unwrap();
    let p0 = traj.states[0].metric.projector_plus().clone();
    for st in &traj.states {
        assert!((st.metric.projector_plus() - &p0).amax() < 1e-14);
        assert_eq!(st.action, 0.0);
    }
}
