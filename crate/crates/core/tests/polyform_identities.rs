use feec::mesh::{signed_volume, subsets, Point};
use feec::polyform::{
    alt, form_integral, trace_to_face, whitney_basis, Barycentric, FaceFrame, Poly, PolyForm,
    EXPONENTS,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_poly(rng: &mut ChaCha8Rng, n: usize, r: usize) -> Poly {
    let terms: Vec<([u8; 3], f64)> = EXPONENTS
        .iter()
        .filter(|e| {
            e.iter().map(|&x| x as usize).sum::<usize>() <= r && e[n..].iter().all(|&x| x == 0)
        })
        .map(|&e| (e, rng.gen_range(-1.0..1.0)))
        .collect();
    Poly::from_terms(&terms).unwrap()
}

fn random_form(rng: &mut ChaCha8Rng, n: usize, k: usize, r: usize) -> PolyForm {
    let comps = (0..alt::num_components(n, k))
        .map(|_| random_poly(rng, n, r))
        .collect();
    PolyForm::from_components(n, k, comps).unwrap()
}

fn random_simplex(rng: &mut ChaCha8Rng, n: usize) -> Vec<Point> {
    loop {
        let mut pts: Vec<Point> = (0..=n)
            .map(|_| {
                let mut p = [0.0; 3];
                for x in p.iter_mut().take(n) {
                    *x = rng.gen_range(-1.0..1.0);
                }
                p
            })
            .collect();
        let v = signed_volume(n, &pts);
        if v.abs() > 0.05 {
            if v < 0.0 {
                pts.swap(0, 1);
            }
            return pts;
        }
    }
}

/// Outward frames and vertices of every facet of a simplex.
fn facets(n: usize, pts: &[Point]) -> Vec<(FaceFrame, Vec<Point>)> {
    (0..=n)
        .map(|j| {
            let face: Vec<Point> = (0..=n).filter(|&i| i != j).map(|i| pts[i]).collect();
            let bary = Barycentric::new(n, pts);
            // Outward normal is -∇λ_j normalized.
            let g = bary.grads[j];
            let len = (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt();
            let nu = [-g[0] / len, -g[1] / len, -g[2] / len];
            (FaceFrame::new(n, &face, &nu), face)
        })
        .collect()
}

fn boundary_term(n: usize, pts: &[Point], omega: &PolyForm, mu: &PolyForm) -> f64 {
    let star_mu = mu.star();
    facets(n, pts)
        .iter()
        .map(|(frame, face)| {
            let a = trace_to_face(omega, frame, face, None).unwrap();
            let b = trace_to_face(&star_mu, frame, face, None).unwrap();
            a.wedge(&b).unwrap().integrate().unwrap()
        })
        .sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn d_squared_vanishes_exactly(seed: u64, n in 2usize..=3, r in 0usize..=2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for k in 0..=n - 2 {
            let w = random_form(&mut rng, n, k, r);
            prop_assert!(w.d().unwrap().d().unwrap().is_zero());
        }
    }

    #[test]
    fn codifferential_squared_vanishes_exactly(seed: u64, n in 2usize..=3, r in 0usize..=2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for k in 2..=n {
            let w = random_form(&mut rng, n, k, r);
            prop_assert!(w.codifferential().unwrap().codifferential().unwrap().is_zero());
        }
    }

    #[test]
    fn double_star_sign(seed: u64, n in 2usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for k in 0..=n {
            let w = random_form(&mut rng, n, k, 2);
            let ss = w.star().star();
            let expect = if (k * (n - k)) % 2 == 0 { w.clone() } else { w.neg() };
            prop_assert!(ss.sub(&expect).is_zero());
        }
    }

    #[test]
    fn integration_by_parts(seed: u64, n in 2usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts = random_simplex(&mut rng, n);
        for k in 1..=n {
            let omega = random_form(&mut rng, n, k - 1, 1);
            let mu = random_form(&mut rng, n, k, 1);
            let a = omega.d().unwrap().inner_product(&mu, &pts, 4);
            let b = omega.inner_product(&mu.codifferential().unwrap(), &pts, 4);
            let c = boundary_term(n, &pts, &omega, &mu);
            let scale = a.abs().max(b.abs()).max(c.abs()).max(1e-300);
            prop_assert!((a - b - c).abs() <= 1e-12 * scale, "n={n} k={k}: {a} - {b} - {c}");
        }
    }

    #[test]
    fn star_defining_identity_and_isometry(seed: u64, n in 2usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts = random_simplex(&mut rng, n);
        let vol = PolyForm::vol(n);
        for k in 0..=n {
            let w = random_form(&mut rng, n, k, 1);
            let m = random_form(&mut rng, n, n - k, 1);
            let lhs = w.wedge(&m).unwrap().inner_product(&vol, &pts, 4);
            let rhs = w.star().inner_product(&m, &pts, 4);
            // Cauchy-Schwarz bounds both sides by the product of the norms.
            let scale = w.norm_on_element(&pts) * m.norm_on_element(&pts);
            prop_assert!((lhs - rhs).abs() <= 1e-13 * scale);
            for (i, &a) in alt::subsets(n, k).iter().enumerate() {
                for (j, &b) in alt::subsets(n, n - k).iter().enumerate() {
                    let mut ca = vec![0.0; alt::num_components(n, k)];
                    let mut cb = vec![0.0; alt::num_components(n, n - k)];
                    ca[i] = 1.0;
                    cb[j] = 1.0;
                    let (ea, eb) = (PolyForm::constant(n, k, &ca).unwrap(), PolyForm::constant(n, n - k, &cb).unwrap());
                    let lhs = ea.wedge(&eb).unwrap().inner_product(&vol, &pts, 4);
                    let rhs = ea.star().inner_product(&eb, &pts, 4);
                    prop_assert!((lhs - rhs).abs() <= 1e-13 * lhs.abs().max(rhs.abs()).max(1e-300), "{a:b} {b:b}");
                }
            }
            let (a, b) = (w.norm_on_element(&pts), w.star().norm_on_element(&pts));
            prop_assert!((a - b).abs() <= 1e-13 * a.max(1e-300));
        }
    }

    #[test]
    fn trace_commutes_with_d(seed: u64, n in 2usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts = random_simplex(&mut rng, n);
        for k in 0..n - 1 {
            let w = random_form(&mut rng, n, k, 2);
            for (frame, face) in facets(n, &pts) {
                let lhs = trace_to_face(&w.d().unwrap(), &frame, &face, None).unwrap();
                let rhs = trace_to_face(&w, &frame, &face, None).unwrap().d().unwrap();
                let diff = lhs.sub(&rhs).norm();
                prop_assert!(diff <= 1e-13 * lhs.norm().max(1.0));
            }
        }
    }

    #[test]
    fn face_norm_is_frame_independent(seed: u64, n in 2usize..=3, angle in 0.0f64..std::f64::consts::TAU) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts = random_simplex(&mut rng, n);
        for k in 0..n {
            let w = random_form(&mut rng, n, k, 1);
            for (frame, face) in facets(n, &pts) {
                let t = frame.tangents();
                let rotated = if n == 2 {
                    vec![[-t[0][0], -t[0][1], -t[0][2]]]
                } else {
                    let (c, s) = (angle.cos(), angle.sin());
                    vec![
                        [c * t[0][0] + s * t[1][0], c * t[0][1] + s * t[1][1], c * t[0][2] + s * t[1][2]],
                        [-s * t[0][0] + c * t[1][0], -s * t[0][1] + c * t[1][1], -s * t[0][2] + c * t[1][2]],
                    ]
                };
                for tt in &rotated {
                    let len = (tt[0] * tt[0] + tt[1] * tt[1] + tt[2] * tt[2]).sqrt();
                    prop_assert!((len - 1.0).abs() < 1e-14);
                }
                let nu = *frame.normal();
                let flipped = [-nu[0], -nu[1], -nu[2]];
                let other = FaceFrame::from_parts(n, face[1], rotated, if n == 2 { flipped } else { nu });
                let a = trace_to_face(&w, &frame, &face, None).unwrap().norm();
                let b = trace_to_face(&w, &other, &face, None).unwrap().norm();
                prop_assert!((a - b).abs() <= 1e-13 * a.max(1e-300), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn rigid_motion_leaves_whitney_norms_unchanged(seed: u64, n in 2usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts = random_simplex(&mut rng, n);
        let (a, b) = (rng.gen_range(0.0..std::f64::consts::TAU), rng.gen_range(0.0..std::f64::consts::TAU));
        let rot = |p: &Point| -> Point {
            let (ca, sa, cb, sb) = (a.cos(), a.sin(), b.cos(), b.sin());
            let q = [ca * p[0] - sa * p[1], sa * p[0] + ca * p[1], p[2]];
            if n == 2 {
                [q[0] + 0.3, q[1] - 0.7, 0.0]
            } else {
                [q[0] + 0.3, cb * q[1] - sb * q[2] - 0.7, sb * q[1] + cb * q[2] + 1.1]
            }
        };
        let moved: Vec<Point> = pts.iter().map(rot).collect();
        for k in 0..=n {
            let w0 = whitney_basis(n, &pts, k);
            let w1 = whitney_basis(n, &moved, k);
            for (x, y) in w0.iter().zip(&w1) {
                let (p, q) = (x.norm_on_element(&pts), y.norm_on_element(&moved));
                prop_assert!((p - q).abs() <= 1e-13 * p.max(1.0));
                if k < n {
                    let (p, q) = (x.d().unwrap().norm_on_element(&pts), y.d().unwrap().norm_on_element(&moved));
                    prop_assert!((p - q).abs() <= 1e-13 * p.max(1.0));
                }
            }
        }
    }
}

#[test]
fn whitney_duality_on_random_tetrahedra() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in 2..=3 {
        let pts = random_simplex(&mut rng, n);
        for k in 0..=n {
            let basis = whitney_basis(n, &pts, k);
            for (i, w) in basis.iter().enumerate() {
                for (j, rho) in subsets(n + 1, k + 1).iter().enumerate() {
                    let sub: Vec<Point> = rho.iter().map(|&v| pts[v]).collect();
                    let val = form_integral(w, &sub);
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!(
                        (val - expect).abs() < 1e-12,
                        "n={n} k={k} w{i} on {rho:?}: {val}"
                    );
                }
            }
        }
    }
}

#[test]
fn barycentric_products_integrate_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let pts = random_simplex(&mut rng, 2);
    let area = signed_volume(2, &pts);
    let hats = whitney_basis(2, &pts, 0);
    for i in 0..3 {
        for j in 0..3 {
            let expect = if i == j { area / 6.0 } else { area / 12.0 };
            let got = hats[i].inner_product(&hats[j], &pts, 4);
            assert!((got - expect).abs() < 1e-15 * 10.0, "{got} vs {expect}");
        }
    }
}

#[test]
fn leibniz_example_and_edge_form_codifferential() {
    let pts: Vec<Point> = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
    let b = Barycentric::new(2, &pts);
    let w = b.dlambda(1).mul_poly(&b.lambda(0)).unwrap();
    let expect = b.dlambda(0).wedge(&b.dlambda(1)).unwrap();
    assert!(w.d().unwrap().sub(&expect).is_zero());
    // Edge forms of a triangle have divergence-free proxies.
    for e in whitney_basis(2, &pts, 1) {
        assert!(e.codifferential().unwrap().is_zero());
    }
    assert!(PolyForm::constant(2, 0, &[3.0])
        .unwrap()
        .d()
        .unwrap()
        .is_zero());
}

#[test]
fn trace_of_linear_form_on_segment() {
    let pts: Vec<Point> = vec![[0.0, 0.0, 0.0], [3.0, 4.0, 0.0]];
    let nu = [0.8, -0.6, 0.0];
    let frame = FaceFrame::new(2, &pts, &nu);
    let t = frame.tangents()[0];
    let dx = PolyForm::basis(2, &[0]).unwrap();
    let tr = trace_to_face(&dx, &frame, &pts, None).unwrap();
    let c = tr.form.eval(&[0.5])[0];
    assert!((c - t[0]).abs() < 1e-15);
    // Restriction of a 0-form.
    let p = PolyForm::scalar(2, Poly::affine(1.0, &[2.0, -1.0]));
    let tp = trace_to_face(&p, &frame, &pts, None).unwrap();
    let s = 2.0;
    let x = frame.to_global(&[s]);
    assert!((tp.form.eval(&[s])[0] - p.eval(&x)[0]).abs() < 1e-14);
}

#[test]
fn trace_of_star_is_normal_flux() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in 2..=3 {
        for _ in 0..20 {
            let pts = random_simplex(&mut rng, n);
            let u = random_form(&mut rng, n, 1, 1);
            for (frame, face) in facets(n, &pts) {
                let tr = trace_to_face(&u.star(), &frame, &face, None).unwrap();
                let nu = *frame.normal();
                // Direct face quadrature of u·ν.
                let rule = feec::polyform::simplex_rule(n - 1, 6);
                let area = feec::mesh::simplex_measure(&face);
                let mut flux = 0.0;
                for q in 0..rule.len() {
                    let x = rule.point(q, &face);
                    let c = u.eval(&x);
                    flux += rule.weight(q) * (0..n).map(|a| c[a] * nu[a]).sum::<f64>();
                }
                flux *= area;
                let got = tr.integrate().unwrap();
                assert!(
                    (got - flux).abs() < 1e-13 * flux.abs().max(1.0),
                    "{got} vs {flux}"
                );
            }
        }
    }
}
