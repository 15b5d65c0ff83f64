use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::barypoly::monomials_of_degree;
use crate::geometry::SimplexGeometry;
use crate::linalg::zeros;
use crate::quadrature::rule_for_degree;
use crate::scalar::Rational;

/// A barycentric polynomial seen as a smooth function of x.
struct PolyFunction {
    p: BaryPoly<f64>,
    grad: [BaryPoly<f64>; 3],
    g: SimplexGeometry<f64>,
}

impl PolyFunction {
    fn new(p: BaryPoly<f64>, g: &SimplexGeometry<f64>) -> Self {
        let grad = p.gradient_cartesian(g);
        Self {
            p,
            grad,
            g: g.clone(),
        }
    }
}

impl SmoothFunction for PolyFunction {
    fn value(&self, x: [f64; 3]) -> f64 {
        self.p.eval_unchecked(&self.g.barycentric(&x))
    }
    fn gradient(&self, x: [f64; 3]) -> [f64; 3] {
        let w = self.g.barycentric(&x);
        std::array::from_fn(|k| self.grad[k].eval_unchecked(&w))
    }
}

fn random_tet(rng: &mut ChaCha8Rng) -> SimplexGeometry<f64> {
    loop {
        let v: [[f64; 3]; 4] = std::array::from_fn(|_| std::array::from_fn(|_| rng.gen_range(-1.0..1.0)));
        if let Ok(g) = SimplexGeometry::from_f64(v) {
            // keep reasonably shaped tets
            if *g.volume() > 0.02 {
                return g;
            }
        }
        let w = [v[1], v[0], v[2], v[3]];
        if let Ok(g) = SimplexGeometry::from_f64(w) {
            if *g.volume() > 0.02 {
                return g;
            }
        }
    }
}

fn q(n: i64, d: i64) -> Rational {
    Rational::from_ratio(n, d)
}

fn heronian() -> SimplexGeometry<Rational> {
    SimplexGeometry::from_f64([
        [0.0, 0.0, 0.0],
        [2.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0],
    ])
    .unwrap()
}

const FAMILIES: [ElementFamily; 4] = [
    ElementFamily::GeneralEnriched(3),
    ElementFamily::GeneralEnriched(4),
    ElementFamily::P4E6,
    ElementFamily::P5E7,
];

#[test]
fn dof_counts() {
    let g = SimplexGeometry::<f64>::reference();
    assert_eq!(ElementFamily::GeneralEnriched(3).ndofs(), 28);
    assert_eq!(ElementFamily::P4E6.ndofs(), 55);
    assert_eq!(ElementFamily::P5E7.ndofs(), 92);
    for l in 3..=8 {
        let fam = ElementFamily::GeneralEnriched(l);
        assert_eq!(fam.ndofs(), closed_form_ndofs(l));
        assert_eq!(dof_list(fam, &Orientation::Ascending, [1; 4]).len(), fam.ndofs());
        assert_eq!(shape_span(fam, &g).unwrap().len(), fam.ndofs());
    }
    let l3 = dof_list(ElementFamily::GeneralEnriched(3), &Orientation::Cyclic, [1; 4]);
    let count = |k: DofKind| l3.iter().filter(|d| d.kind == k).count();
    assert_eq!(
        (count(DofKind::Edge), count(DofKind::Face), count(DofKind::Cell), count(DofKind::Normal)),
        (12, 4, 0, 12)
    );
}

#[test]
fn family_names_round_trip() {
    for s in ["p3", "p4e6", "p4e8", "p5e7", "general:6"] {
        let f: ElementFamily = s.parse().unwrap();
        assert_eq!(f.to_string(), s);
    }
    assert!("general:2".parse::<ElementFamily>().is_err());
    assert!("q7".parse::<ElementFamily>().is_err());
    assert_eq!(ElementFamily::GeneralEnriched(3).label(), "P3+8P7");
    assert_eq!(ElementFamily::GeneralEnriched(4).label(), "P4+20P8");
}

#[test]
fn dof_apply_examples() {
    let g = SimplexGeometry::<Rational>::reference();
    let dofs = dof_list(ElementFamily::GeneralEnriched(3), &Orientation::Ascending, [1; 4]);
    let one = BaryPoly::<Rational>::one();
    assert_eq!(dof_apply(&dofs[0], &one, &g, NormalScaling::Height).unwrap(), q(1, 2));

    let p4 = dof_list(ElementFamily::P4E6, &Orientation::Cyclic, [1; 4]);
    let cell = p4.iter().find(|d| d.kind == DofKind::Cell).unwrap();
    let bubble = BaryPoly::monomial(MultiIndex4([1, 1, 1, 1]), q(840, 1));
    assert_eq!(dof_apply(cell, &bubble, &g, NormalScaling::Height).unwrap(), q(1, 1));

    // height-scaled mean normal derivative of the vertex function is 1
    let normal_mean = DofSpec {
        kind: DofKind::Normal,
        entity: 2,
        vertices: vec![3, 0, 1],
        monomial: MultiIndex4::ZERO,
        normal_sign: 1,
    };
    let phi = family::phi_tilde_n4::<Rational>(2, 0);
    assert_eq!(dof_apply(&normal_mean, &phi, &g, NormalScaling::Height).unwrap(), q(1, 1));
    assert_eq!(dof_apply(&normal_mean, &phi, &heronian(), NormalScaling::Height).unwrap(), q(1, 1));
}

#[test]
fn float_duality_on_random_tets() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for fam in FAMILIES {
        for _ in 0..2 {
            let g = random_tet(&mut rng);
            let el = build_reference_element(fam, &g, &Orientation::Ascending, [1; 4], NormalScaling::Unit)
                .unwrap();
            let err = el.duality_error().unwrap();
            assert!(err < 1e-10, "{fam}: duality error {err}, cond {}", el.condition);
        }
    }
}

#[test]
fn exact_duality_on_heronian_tet() {
    let g = heronian();
    for fam in [ElementFamily::GeneralEnriched(3), ElementFamily::P4E6] {
        for scaling in [NormalScaling::Height, NormalScaling::Unit] {
            let el = build_reference_element(fam, &g, &Orientation::Cyclic, [1; 4], scaling).unwrap();
            let m = el.duality_matrix().unwrap();
            let n = el.ndofs();
            for i in 0..n {
                for j in 0..n {
                    let target = if i == j { q(1, 1) } else { q(0, 1) };
                    assert_eq!(m[i][j], target, "{fam} {scaling:?} ({i},{j})");
                }
            }
        }
    }
}

#[test]
fn enrichment_functions_have_vanishing_moments() {
    let g = heronian();
    for l in 3..=5 {
        let fam = ElementFamily::GeneralEnriched(l);
        let dofs = dof_list(fam, &Orientation::Ascending, [1; 4]);
        let eval = DofEvaluator::new(&g, NormalScaling::Height).unwrap();
        let enrich = enrichment_span(fam, &g).unwrap();
        assert_eq!(enrich.len(), 4 * (l * (l - 1) / 2 - 1));
        let per_face = l * (l - 1) / 2 - 1;
        for (k, p) in enrich.iter().enumerate() {
            let face = k / per_face;
            for d in &dofs {
                let v = eval.apply(d, p);
                match d.kind {
                    DofKind::Normal if d.entity == face => {}
                    _ => assert_eq!(v, q(0, 1), "l={l} fn {k} dof {d:?}"),
                }
            }
            let mean = DofSpec {
                kind: DofKind::Normal,
                entity: face,
                vertices: vec![],
                monomial: MultiIndex4::ZERO,
                normal_sign: 1,
            };
            assert_eq!(eval.apply(&mean, p), q(0, 1));
        }
    }
}

#[test]
fn local_stiffness_kills_affine_functions() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for fam in FAMILIES {
        let g = random_tet(&mut rng);
        let el = build_reference_element(fam, &g, &Orientation::Ascending, [1; 4], NormalScaling::Unit)
            .unwrap();
        let k = el.local_stiffness();
        let eval = DofEvaluator::new(&g, NormalScaling::Unit).unwrap();
        let affine = (0..4).fold(BaryPoly::zero(), |acc, i| {
            acc + BaryPoly::lambda(i).scale(&rng.gen_range(-1.0..1.0))
        });
        let dofs: Vec<f64> = el.dofs.iter().map(|d| eval.apply(d, &affine)).collect();
        let kmax = k.iter().flatten().fold(0.0f64, |a, x| a.max(x.abs()));
        let dmax = dofs.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        for row in &k {
            let r: f64 = row.iter().zip(&dofs).map(|(a, b)| a * b).sum();
            assert!(r.abs() < 1e-9 * kmax * dmax, "{fam}: {r}");
        }
        // symmetric
        for i in 0..k.len() {
            for j in 0..k.len() {
                assert!((k[i][j] - k[j][i]).abs() <= 1e-12 * kmax);
            }
        }
    }
}

#[test]
fn stiffness_matches_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let g = random_tet(&mut rng);
    let fam = ElementFamily::GeneralEnriched(3);
    let el = build_reference_element(fam, &g, &Orientation::Ascending, [1; 4], NormalScaling::Unit).unwrap();
    let k = el.local_stiffness();
    let rule = rule_for_degree(3, 2 * (fam.max_degree() - 2)).unwrap();
    let w = rule.physical_weights(&Entity::Cell, &g).unwrap();
    let tab = el.tabulate(&rule.points);
    let n = el.ndofs();
    let mut kq = zeros::<f64>(n, n);
    for (qi, wq) in w.iter().enumerate() {
        for i in 0..n {
            for j in 0..n {
                kq[i][j] += wq * hessian_dot(&tab.hessians[qi * n + i], &tab.hessians[qi * n + j]);
            }
        }
    }
    let kmax = k.iter().flatten().fold(0.0f64, |a, x| a.max(x.abs()));
    assert!(crate::linalg::max_abs_diff(&k, &kq) < 1e-10 * kmax);
}

#[test]
fn interpolation_reproduces_shape_space() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for fam in FAMILIES {
        let g = random_tet(&mut rng);
        let el = build_reference_element(fam, &g, &Orientation::Ascending, [1; 4], NormalScaling::Unit)
            .unwrap();
        let p = monomials_of_degree(fam.ell() as u32)
            .into_iter()
            .fold(BaryPoly::zero(), |acc, mi| acc + BaryPoly::monomial(mi, rng.gen_range(-1.0..1.0)));
        let f = PolyFunction::new(p.clone(), &g);
        let c = interpolate(&f, &el, 2 * fam.max_degree()).unwrap();
        let pts: Vec<[f64; 4]> = (0..20)
            .map(|_| {
                let r: [f64; 4] = std::array::from_fn(|_| rng.gen_range(0.01..1.0));
                let s: f64 = r.iter().sum();
                r.map(|x| x / s)
            })
            .collect();
        let tab = el.tabulate(&pts);
        let scale = pts.iter().map(|w| p.eval_unchecked(w).abs()).fold(0.0, f64::max);
        for (qi, w) in pts.iter().enumerate() {
            let v: f64 = (0..el.ndofs()).map(|j| c[j] * tab.values[qi * el.ndofs() + j]).sum();
            assert!((v - p.eval_unchecked(w)).abs() < 1e-9 * scale.max(1.0), "{fam}");
        }
        // constants are reproduced as well
        let one = PolyFunction::new(BaryPoly::one(), &g);
        let c1 = interpolate(&one, &el, 4).unwrap();
        let v = el.eval_combination(&c1, &pts[0]);
        assert!((v - 1.0).abs() < 1e-11);
    }
}
