use cat0::barycenter::{frechet_mean, BarycenterConfig, WeightedPoints};
use cat0::iteration::{cyclic_projections, StopRule};
use cat0::operators::{combination_alpha, composition_alpha, discrepancy, Operator};
use cat0::sampling::{rng_for, sample_point, sample_weights};
use cat0::space::comparison_triangle;
use cat0::{ConvexSet, MetricTree, Point, Space};
use proptest::prelude::*;

fn models() -> Vec<Space> {
    let tri = Space::tree(MetricTree::tripod());
    vec![
        Space::euclidean(3),
        Space::hyperboloid(2),
        tri.clone(),
        Space::tree(MetricTree::caterpillar()),
        Space::product(&Space::euclidean(1), &tri),
    ]
}

fn draw(space: &Space, seed: u64, n: usize) -> Vec<Point> {
    let mut rng = rng_for(seed, 0);
    (0..n).map(|_| sample_point(space, &mut rng)).collect()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn cat0_inequality(seed in any::<u64>(), t in 0.0f64..=1.0, m in 0usize..5) {
        let space = &models()[m];
        let p = draw(space, seed, 3);
        prop_assert!(space.cat0_defect(&p[0], &p[1], &p[2], t).unwrap() >= -space.check_tol());
    }

    #[test]
    fn cauchy_schwarz(seed in any::<u64>(), m in 0usize..5) {
        let space = &models()[m];
        let p = draw(space, seed, 4);
        let q = space.quasilinearization(&p[0], &p[1], &p[2], &p[3]).unwrap();
        let bound = space.distance(&p[0], &p[1]).unwrap() * space.distance(&p[2], &p[3]).unwrap();
        prop_assert!(q.abs() <= bound + space.check_tol());
    }

    #[test]
    fn geodesics_have_constant_speed(seed in any::<u64>(), s in 0.0f64..=1.0, t in 0.0f64..=1.0, m in 0usize..5) {
        let space = &models()[m];
        let p = draw(space, seed, 2);
        let (a, b) = (space.geodesic_point(&p[0], &p[1], s).unwrap(), space.geodesic_point(&p[0], &p[1], t).unwrap());
        let d = space.distance(&p[0], &p[1]).unwrap();
        let got = space.distance(&a, &b).unwrap();
        prop_assert!((got - (s - t).abs() * d).abs() <= 1e-7 * (1.0 + d));
    }

    #[test]
    fn euclidean_quasilinearization_is_the_inner_product(
        v in proptest::collection::vec(-10.0f64..10.0, 12)
    ) {
        let e3 = Space::euclidean(3);
        let pt = |i: usize| Point::euclidean(v[3 * i..3 * i + 3].to_vec());
        let (x, z, y, w) = (pt(0), pt(1), pt(2), pt(3));
        let inner: f64 = (0..3).map(|k| (v[3 + k] - v[k]) * (v[9 + k] - v[6 + k])).sum();
        let q = e3.quasilinearization(&x, &z, &y, &w).unwrap();
        prop_assert!((q - inner).abs() <= 1e-10 * (1.0 + inner.abs()));
    }

    #[test]
    fn product_distance_is_pythagorean(seed in any::<u64>()) {
        let h = Space::hyperboloid(2);
        let tri = Space::tree(MetricTree::tripod());
        let prod = Space::product(&h, &tri);
        let p = draw(&prod, seed, 2);
        let (Point::Product(al, ar), Point::Product(bl, br)) = (&p[0], &p[1]) else { unreachable!() };
        let expect = h.distance_sq(al, bl).unwrap() + tri.distance_sq(ar, br).unwrap();
        prop_assert!(rel(prod.distance_sq(&p[0], &p[1]).unwrap(), expect) <= 1e-12);
    }

    #[test]
    fn comparison_triangle_keeps_side_lengths(seed in any::<u64>(), m in 0usize..5) {
        let space = &models()[m];
        let p = draw(space, seed, 3);
        let d = |i: usize, j: usize| space.distance(&p[i], &p[j]).unwrap();
        let tri = comparison_triangle(d(0, 1), d(1, 2), d(2, 0), 1e-9).unwrap();
        let e = |a: [f64; 2], b: [f64; 2]| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
        prop_assert!((e(tri[0], tri[1]) - d(0, 1)).abs() <= 1e-9 * (1.0 + d(0, 1)));
        prop_assert!((e(tri[1], tri[2]) - d(1, 2)).abs() <= 1e-7 * (1.0 + d(1, 2)));
        prop_assert!((e(tri[2], tri[0]) - d(2, 0)).abs() <= 1e-7 * (1.0 + d(2, 0)));
    }

    #[test]
    fn barycenter_ignores_order_and_zero_weights(seed in any::<u64>(), m in 0usize..5) {
        let space = &models()[m];
        let pts = draw(space, seed, 4);
        let w = sample_weights(4, &mut rng_for(seed, 1));
        let cfg = BarycenterConfig::default();
        let mean = frechet_mean(space, &WeightedPoints::new(space, pts.clone(), w.clone()).unwrap(), &cfg).unwrap();

        let mut rp = pts.clone();
        let mut rw = w.clone();
        rp.reverse();
        rw.reverse();
        let rev = frechet_mean(space, &WeightedPoints::new(space, rp, rw).unwrap(), &cfg).unwrap();
        prop_assert!(space.distance(&mean, &rev).unwrap() <= 1e-6);

        let mut zp = pts.clone();
        zp.push(sample_point(space, &mut rng_for(seed, 2)));
        let mut zw = w.clone();
        zw.push(0.0);
        let zero = frechet_mean(space, &WeightedPoints::new(space, zp, zw).unwrap(), &cfg).unwrap();
        prop_assert!(space.distance(&mean, &zero).unwrap() <= 1e-6);
    }

    #[test]
    fn two_point_mean_is_the_geodesic_point(seed in any::<u64>(), t in 0.0f64..=1.0, m in 0usize..5) {
        let space = &models()[m];
        let p = draw(space, seed, 2);
        let wp = WeightedPoints::new(space, p.clone(), vec![1.0 - t, t]).unwrap();
        let mean = frechet_mean(space, &wp, &BarycenterConfig::default()).unwrap();
        let g = space.geodesic_point(&p[0], &p[1], t).unwrap();
        prop_assert!(space.distance(&mean, &g).unwrap() <= 1e-9);
    }

    #[test]
    fn barycenter_map_is_nonexpansive_in_one_argument(seed in any::<u64>(), m in 0usize..5) {
        // moving one point by δ moves the mean by at most w·δ
        let space = &models()[m];
        let mut pts = draw(space, seed, 3);
        let w = sample_weights(3, &mut rng_for(seed, 1));
        let cfg = BarycenterConfig::default();
        let a = frechet_mean(space, &WeightedPoints::new(space, pts.clone(), w.clone()).unwrap(), &cfg).unwrap();
        let moved = sample_point(space, &mut rng_for(seed, 2));
        let delta = space.distance(&pts[0], &moved).unwrap();
        pts[0] = moved;
        let b = frechet_mean(space, &WeightedPoints::new(space, pts, w.clone()).unwrap(), &cfg).unwrap();
        prop_assert!(space.distance(&a, &b).unwrap() <= w[0] * delta + 1e-6);
    }

    #[test]
    fn projections_are_firm_and_idempotent(seed in any::<u64>(), which in 0usize..5) {
        let e2 = Space::euclidean(2);
        let h2 = Space::hyperboloid(2);
        let tri = Space::tree(MetricTree::caterpillar());
        let (space, set) = match which {
            0 => (e2.clone(), ConvexSet::halfspace(&e2, "H", vec![1.0, -2.0], 0.3).unwrap()),
            1 => (e2.clone(), ConvexSet::ball(&e2, "B", Point::euclidean(vec![0.5, 0.5]), 0.7).unwrap()),
            2 => (h2.clone(), ConvexSet::hyperbolic_halfspace(&h2, "H", vec![0.2, 1.0, 0.5]).unwrap()),
            3 => {
                let c = h2.hyperboloid_point(vec![2f64.sqrt(), 1.0, 0.0]).unwrap();
                (h2.clone(), ConvexSet::ball(&h2, "B", c, 0.4).unwrap())
            }
            _ => (tri.clone(), ConvexSet::subtree(&tri, "S", &["s1", "s2"], &[("s1", "s0", 0.4)]).unwrap()),
        };
        let p = draw(&space, seed, 2);
        let op = Operator::projection(set.clone());
        let (px, py) = (set.project(&space, &p[0]).unwrap(), set.project(&space, &p[1]).unwrap());
        let firm = discrepancy(&space, &op, &p[0], &p[1]).unwrap() - space.distance_sq(&px, &py).unwrap();
        prop_assert!(firm >= -space.check_tol());
        prop_assert!(space.distance(&set.project(&space, &px).unwrap(), &px).unwrap() <= 1e-9);
        prop_assert!(space.distance(&px, &py).unwrap() <= space.distance(&p[0], &p[1]).unwrap() + space.check_tol());
    }

    #[test]
    fn composition_constant_is_symmetric_and_dominates(a in 0.01f64..0.99, b in 0.01f64..0.99) {
        let ab = composition_alpha(a, b).unwrap();
        prop_assert!((ab - composition_alpha(b, a).unwrap()).abs() <= 1e-15);
        prop_assert!(ab > 0.0 && ab < 1.0);
        prop_assert!(ab >= a.max(b) - 1e-15);
        prop_assert_eq!(combination_alpha(&[a, b]).unwrap(), a.max(b));
    }

    #[test]
    fn cyclic_runs_are_fejer_monotone(seed in any::<u64>()) {
        let e2 = Space::euclidean(2);
        let sets = vec![
            ConvexSet::halfspace(&e2, "A", vec![1.0, 0.3], 0.0).unwrap(),
            ConvexSet::halfspace(&e2, "B", vec![-0.2, 1.0], 0.0).unwrap(),
            ConvexSet::ball(&e2, "C", Point::euclidean(vec![-0.5, -0.5]), 1.0).unwrap(),
        ];
        let x0 = draw(&e2, seed, 1).remove(0);
        let w = Point::euclidean(vec![-0.5, -0.5]);
        let tr = cyclic_projections(&e2, &sets, &x0, &StopRule::with_max_iter(200), Some(&w)).unwrap();
        prop_assert!(tr.worst_fejer_gap() >= -1e-10);
        // residual at whole cycles does not increase
        let cyc: Vec<f64> = tr.residuals.iter().step_by(3).copied().collect();
        prop_assert!(cyc.windows(2).all(|r| r[1] <= r[0] + 1e-9));
    }

    #[test]
    fn tree_points_have_one_canonical_form(seed in any::<u64>()) {
        let tri = Space::tree(MetricTree::caterpillar());
        let p = draw(&tri, seed, 1).remove(0);
        prop_assert_eq!(tri.canonical(&tri.canonical(&p)), tri.canonical(&p));
        prop_assert_eq!(tri.distance(&p, &tri.canonical(&p)).unwrap(), 0.0);
    }
}
