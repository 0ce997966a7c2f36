use approx::assert_relative_eq;
use bezfit::bezier::{basis_vector, g_eval, BezierSurface, Derivative, Vec3};
use bezfit::io::SurfaceDocument;
use bezfit::projection::{project_all, ProjectionSettings};
use bezfit::selection::sigma2_hat;
use bezfit::sim::{make_dataset, random_rotation, ExperimentSpec, SurfaceConfig};
use bezfit::{fit_surface, FitSettings, PointCloud};
use nalgebra::{Matrix3, Vector2};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn surface_strategy() -> impl Strategy<Value = BezierSurface> {
    (1usize..=4, 1usize..=4).prop_flat_map(|(nu, nv)| {
        prop::collection::vec(prop::array::uniform3(-2.0f64..2.0), (nu + 1) * (nv + 1)).prop_map(move |pts| {
            BezierSurface::from_flat(nu, nv, pts.into_iter().map(|p| Vec3::new(p[0], p[1], p[2])).collect()).unwrap()
        })
    })
}

proptest! {
    #[test]
    fn bernstein_rows_sum_to_one(u in -0.5f64..1.5, n in 1usize..12) {
        let b = basis_vector(u, n, Derivative::Value).unwrap();
        prop_assert!((b.sum() - 1.0).abs() < 1e-12);
        let d = basis_vector(u, n, Derivative::First).unwrap();
        prop_assert!(d.sum().abs() < 1e-10);
    }

    #[test]
    fn gradient_matches_central_differences(
        s in surface_strategy(),
        x in prop::array::uniform3(-2.0f64..2.0),
        u in 0.0f64..1.0,
        v in 0.0f64..1.0,
    ) {
        let x = Vec3::new(x[0], x[1], x[2]);
        let h = 1e-6;
        let g = |u: f64, v: f64| 0.5 * (x - s.eval(u, v)).norm_squared();
        let fd = Vector2::new((g(u + h, v) - g(u - h, v)) / (2.0 * h), (g(u, v + h) - g(u, v - h)) / (2.0 * h));
        let e = g_eval(&x, u, v, &s);
        prop_assert!((e.gradient - fd).norm() <= 1e-6 * e.gradient.norm().max(1.0));
        prop_assert_eq!(e.hessian[(0, 1)], e.hessian[(1, 0)]);
    }

    #[test]
    fn parallel_and_sequential_projection_agree(s in surface_strategy(), seed in 0u64..1000) {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts: Vec<Vec3> = (0..40)
            .map(|_| s.eval(rng.random(), rng.random()) + Vec3::new(rng.random(), rng.random(), rng.random()) * 0.1)
            .collect();
        let cloud = PointCloud::unweighted(pts).unwrap();
        let u = vec![0.5; 40];
        let v = vec![0.5; 40];
        let settings = ProjectionSettings::default();
        let a = project_all(&cloud, &s, &u, &v, &settings, true).unwrap();
        let b = project_all(&cloud, &s, &u, &v, &settings, false).unwrap();
        prop_assert_eq!(a.u, b.u);
        prop_assert_eq!(a.v, b.v);
    }
}

fn rosenbrock_cloud(n_tr: usize, sigma2_y: f64, seed: u64) -> PointCloud {
    let spec = ExperimentSpec { n_tr, n_te: 1, sigma2_y, seed, ..Default::default() };
    PointCloud::unweighted(make_dataset(&spec, 0).unwrap().x_tr).unwrap()
}

#[test]
fn noisy_rosenbrock_grows_beyond_bilinear() {
    let cloud = rosenbrock_cloud(100, 1e-2, 5);
    let (m, trace) = fit_surface(&cloud, &FitSettings::default()).unwrap();
    assert!(m.size() > 4);
    assert!(m.sigma2 > 1e-3 && m.sigma2 < 1e-1, "{}", m.sigma2);
    for w in trace.records.windows(2) {
        assert!(w[1].n_u >= w[0].n_u && w[1].n_v >= w[0].n_v);
    }
}

#[test]
fn rigid_motion_leaves_fit_unchanged() {
    let cloud = rosenbrock_cloud(80, 1e-3, 9);
    let r: Matrix3<f64> = random_rotation(&mut ChaCha8Rng::seed_from_u64(77));
    let t = Vec3::new(3.0, -20.0, 0.5);
    let moved = cloud.map_points(|p| r * p + t);
    let settings = FitSettings::default();
    let (a, _) = fit_surface(&cloud, &settings).unwrap();
    let (b, _) = fit_surface(&moved, &settings).unwrap();
    assert_eq!(a.orders(), b.orders());
    assert_relative_eq!(a.sigma2, b.sigma2, max_relative = 1e-9);
}

#[test]
fn returned_surface_is_in_the_data_frame() {
    let cloud = rosenbrock_cloud(60, 1e-3, 2).map_points(|p| p + Vec3::new(100.0, 0.0, -4.0));
    let (m, _) = fit_surface(&cloud, &FitSettings::default()).unwrap();
    let s2 = sigma2_hat(&cloud, &m.surface, &m.u, &m.v).unwrap();
    assert_relative_eq!(s2, m.sigma2, max_relative = 1e-9);
    let local = m.surface.translated(&-m.centroid);
    for (&u, &v) in m.u.iter().zip(&m.v).take(10) {
        assert!((local.eval(u, v) + m.centroid - m.surface.eval(u, v)).amax() < 1e-12);
    }
}

#[test]
fn surface_document_round_trips() {
    let cloud = rosenbrock_cloud(50, 1e-2, 3);
    let (m, _) = fit_surface(&cloud, &FitSettings::default()).unwrap();
    let doc = SurfaceDocument::from_model(&m, &cloud).unwrap();
    let back = SurfaceDocument::from_json(&doc.to_json(), "mem").unwrap();
    assert_eq!(back, doc);
    let (u, v) = back.params();
    let s2 = sigma2_hat(&cloud, &back.surface().unwrap(), &u, &v).unwrap();
    assert!((s2 - back.sigma2).abs() <= 1e-12 * back.sigma2.max(1.0));
}

#[test]
fn plane_samples_lie_in_the_rotated_plane() {
    let plane = ExperimentSpec { surface: SurfaceConfig::plane(), sigma2_y: 0.0, n_tr: 30, n_te: 5, ..Default::default() };
    let latent = plane.latent().unwrap();
    for p in make_dataset(&plane, 0).unwrap().s_tr {
        // points lie in the rotated z = 0 plane
        assert!((latent.rotation.transpose() * p).z.abs() < 1e-12);
    }
}
