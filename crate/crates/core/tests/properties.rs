use std::f64::consts::PI;
use std::sync::Arc;

use approx::assert_relative_eq;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use regge_curvature::analytic::{AnalyticMetric, GraphMetric};
use regge_curvature::curvature::gauss_bonnet_total;
use regge_curvature::fe::{LagrangeSpace, ReggeField, ReggeSpace, ScalarField, TensorField};
use regge_curvature::mesh::{ElementMap, Mesh, Point};
use regge_curvature::metric::{bilinear, gauss_curvature};
use regge_curvature::norms::{eoc, l2_norm, HMinusOneNorm, NORM_EXACTNESS};
use regge_curvature::quadrature::{segment_rule, triangle_rule};
use regge_curvature::study::{adjoint_exactness, adjointness_gap, random_instance, study_mesh};

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

fn to_reference(map: &ElementMap, p: Point) -> Point {
    let d = [p[0] - map.origin[0], p[1] - map.origin[1]];
    [
        map.inv[0][0] * d[0] + map.inv[0][1] * d[1],
        map.inv[1][0] * d[0] + map.inv[1][1] * d[1],
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn triangle_rule_integrates_monomials(q in 0usize..=20, a in 0u32..=20, b in 0u32..=20) {
        prop_assume!((a + b) as usize <= q);
        let exact = factorial(a) * factorial(b) / factorial(a + b + 2);
        let got = triangle_rule(q).integrate(|[x, y]| x.powi(a as i32) * y.powi(b as i32));
        prop_assert!((got - exact).abs() <= 1e-14 * exact);
    }

    #[test]
    fn segment_rule_integrates_monomials(q in 0usize..=40, a in 0u32..=40) {
        prop_assume!(a as usize <= q);
        let got = segment_rule(q).integrate(|[x]| x.powi(a as i32));
        prop_assert!((got - 1.0 / f64::from(a + 1)).abs() <= 1e-14);
    }

    #[test]
    fn perturbed_meshes_stay_oriented(seed in any::<u64>(), level in 1u32..=5) {
        let mesh = Mesh::structured_square(level).perturb_interior(seed).unwrap();
        prop_assert!(mesh.check_orientation().is_ok());
        prop_assert_eq!(mesh.num_triangles(), 2 << (2 * level));
    }

    #[test]
    fn gauss_curvature_scales_inversely(x in 0.0f64..1.0, y in 0.0f64..1.0, c in 0.1f64..10.0) {
        let jet = GraphMetric.jet([x, y]);
        let k = gauss_curvature(&jet);
        assert_relative_eq!(gauss_curvature(&(c * jet)), k / c, epsilon = 1e-12, max_relative = 1e-10);
        assert_relative_eq!(k, GraphMetric.gauss_curvature([x, y]), epsilon = 1e-10);
    }

    #[test]
    fn eoc_recovers_geometric_rates(rate in 0.5f64..6.0, e0 in 1e-6f64..1e3) {
        let hs = [1.0, 0.5, 0.25, 0.125];
        let errors: Vec<f64> = hs.iter().map(|h: &f64| e0 * h.powf(rate)).collect();
        for r in eoc(&errors, &hs) {
            prop_assert!((r - rate).abs() < 1e-10);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn gauss_bonnet_holds_on_random_meshes(seed in any::<u64>(), k in 0usize..=3, level in 1u32..=3) {
        let mesh = study_mesh(level, true, seed).unwrap();
        let regge = ReggeSpace::new(mesh.clone(), k).unwrap();
        let g = regge.interpolate(&GraphMetric);
        let total = gauss_bonnet_total(&g, &mesh, 20).unwrap();
        prop_assert!((total - 2.0 * PI).abs() < 1e-9, "{}", total);
    }

    #[test]
    fn inc_is_adjoint_to_rotrot(seed in any::<u64>(), k in 1usize..=2, level in 1u32..=2) {
        let mesh = study_mesh(level, true, seed).unwrap();
        let regge = ReggeSpace::new(mesh.clone(), k).unwrap();
        let lagrange = LagrangeSpace::new(mesh, k + 1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_instance(&regge, &lagrange, &mut rng);
        prop_assert!(adjointness_gap(&inst, adjoint_exactness(k)).unwrap() <= 1e-10);
    }

    #[test]
    fn regge_fields_are_tt_continuous(seed in any::<u64>(), k in 0usize..=3) {
        let mesh = study_mesh(2, true, seed).unwrap();
        let regge = ReggeSpace::new(mesh.clone(), k).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = (0..regge.dim()).map(|_| rand::RngExt::random_range(&mut rng, -1.0..1.0)).collect();
        let sigma = ReggeField::new(&regge, values);
        let rule = segment_rule(2 * k + 2);
        for (e, edge) in mesh.edges.iter().enumerate() {
            let [Some(t0), Some(t1)] = edge.triangles else { continue };
            let [a, b] = edge.vertices.map(|v| mesh.vertices[v]);
            let tau = [b[0] - a[0], b[1] - a[1]];
            for ([s], _) in rule.iter() {
                let p = [a[0] + s * tau[0], a[1] + s * tau[1]];
                let v0 = bilinear(sigma.jet(t0, to_reference(&mesh.element_map(t0), p)).g, tau, tau);
                let v1 = bilinear(sigma.jet(t1, to_reference(&mesh.element_map(t1), p)).g, tau, tau);
                prop_assert!((v0 - v1).abs() <= 1e-12, "edge {}: {} vs {}", e, v0, v1);
            }
        }
    }

    #[test]
    fn regge_interpolation_reproduces_polynomials(seed in any::<u64>(), k in 0usize..=3) {
        let mesh = study_mesh(1, true, seed).unwrap();
        let regge = ReggeSpace::new(mesh.clone(), k).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut coeff = || -> Vec<f64> {
            (0..=k * k + 2 * k).map(|_| rand::RngExt::random_range(&mut rng, -1.0..1.0)).collect()
        };
        let c = [coeff(), coeff(), coeff()];
        let poly = |c: &[f64], p: Point| {
            let mut v = 0.0;
            let mut i = 0;
            for a in 0..=k {
                for b in 0..=k - a {
                    v += c[i] * p[0].powi(a as i32) * p[1].powi(b as i32);
                    i += 1;
                }
            }
            v
        };
        let field = |p: Point| [[poly(&c[0], p), poly(&c[1], p)], [poly(&c[1], p), poly(&c[2], p)]];
        let g = regge.interpolate_with(field, 2 * k + 6);
        for t in 0..mesh.num_triangles() {
            let xi = [0.2, 0.3];
            let exact = field(mesh.element_map(t).map(xi));
            let got = g.jet(t, xi).g;
            for i in 0..2 {
                for j in 0..2 {
                    prop_assert!((got[i][j] - exact[i][j]).abs() < 1e-11);
                }
            }
        }
    }

    #[test]
    fn lagrange_interpolation_reproduces_polynomials(k in 1usize..=4, a in 0usize..=4, b in 0usize..=4) {
        prop_assume!(a + b <= k);
        let mesh = study_mesh(2, true, 5).unwrap();
        let space = LagrangeSpace::new(mesh.clone(), k);
        let f = |p: Point| p[0].powi(a as i32) * p[1].powi(b as i32);
        let u = space.interpolate(f);
        for t in 0..mesh.num_triangles() {
            let xi = [0.15, 0.6];
            prop_assert!((u.jet(t, xi).val - f(mesh.element_map(t).map(xi))).abs() < 1e-12);
        }
    }

    #[test]
    fn norms_are_absolutely_homogeneous(c in -50.0f64..50.0) {
        let mesh = Arc::new(Mesh::structured_square(2));
        let dual = HMinusOneNorm::new(mesh.clone(), 3, NORM_EXACTNESS).unwrap();
        let f = |t: usize, xi: Point| {
            let p = mesh.element_map(t).map(xi);
            Ok((2.0 * p[0]).exp() * p[1] - 0.4)
        };
        let scaled = |t: usize, xi: Point| Ok(c * f(t, xi)?);
        let (d1, dc) = (dual.norm(&f).unwrap(), dual.norm(&scaled).unwrap());
        let (l1, lc) = (l2_norm(&mesh, &f, 20).unwrap(), l2_norm(&mesh, &scaled, 20).unwrap());
        assert_relative_eq!(dc, c.abs() * d1, epsilon = 1e-13, max_relative = 1e-11);
        assert_relative_eq!(lc, c.abs() * l1, epsilon = 1e-13, max_relative = 1e-11);
        // Poincare-type ordering with the first Dirichlet eigenvalue 2 pi^2
        prop_assert!(d1 <= l1 / (1.0 + 2.0 * PI * PI).sqrt() + 1e-14);
    }
}
