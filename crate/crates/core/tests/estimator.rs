use std::sync::Arc;

use feec::derham::{Bc, CochainVec, DiscreteComplex};
use feec::estimator::{
    element_errors, eta_minus1, eta_zero, gap_bound, harmonic_term, l2_projection, oscillations,
    total_estimate, vector_proxy_indicators, ErrorSource, EstimatorOptions, ExactSolution, Mode,
    ProblemData, SharedForm, CSV_HEADER,
};
use feec::hodge::{harmonic_basis, hodge_decompose, solve_hodge_laplacian, MixedSolution};
use feec::mesh::{generate, refine_uniform, Domain, Point, SimplicialComplex};
use feec::FeecError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn complex(d: Domain, res: usize, bc: Bc) -> DiscreteComplex {
    DiscreteComplex::new(Arc::new(generate(d, res).unwrap()), bc)
}

fn form(f: impl Fn(&Point) -> Vec<f64> + Send + Sync + 'static) -> SharedForm {
    Arc::new(f)
}

fn solve(cx: &DiscreteComplex, problem: &ProblemData) -> MixedSolution {
    let f = problem.f.clone();
    solve_hodge_laplacian(cx, problem.k, &move |x: &Point| f(x)).unwrap()
}

fn two_triangles() -> SimplicialComplex {
    let coords = vec![
        vec![0.0, 0.0],
        vec![1.0, 0.0],
        vec![1.0, 1.0],
        vec![0.0, 1.0],
    ];
    SimplicialComplex::build(2, &coords, &[[0, 1, 2], [0, 2, 3]]).unwrap()
}

fn random_solution(cx: &DiscreteComplex, k: usize, rng: &mut ChaCha8Rng) -> MixedSolution {
    let mut random = |j: usize| {
        let space = cx.space(j).unwrap();
        let v = (0..space.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        CochainVec::new(space, v).unwrap()
    };
    let sigma = (k > 0).then(|| random(k - 1));
    let u = random(k);
    let harmonic = harmonic_basis(cx, k).unwrap();
    let p = (0..harmonic.dim())
        .map(|_| rng.gen_range(-1.0..1.0))
        .collect();
    MixedSolution {
        k,
        bc: cx.bc(),
        sigma,
        u,
        p,
        harmonic,
        residual: 0.0,
        system_size: 0,
    }
}

/// Polynomial load of degree two and its codifferential, per form degree in 3D.
fn cubic_data(k: usize) -> ProblemData {
    let f: SharedForm = match k {
        0 | 3 => form(|x| vec![1.0 + x[0] * x[1] - 2.0 * x[2] * x[2]]),
        _ => form(|x| vec![x[1] * x[2], 1.0 - x[0] * x[0], x[0] + x[2]]),
    };
    let delta_f: SharedForm = match k {
        // δ on 1-forms is -div.
        1 => form(|_| vec![-1.0]),
        // f = x1x2 dxdy + (1 - x0²) dxdz + (x0 + x2) dydz has proxy
        // (x0 + x2, x0² - 1, x1x2) and δf is its curl.
        2 => form(|x| vec![x[2], 1.0, 2.0 * x[0]]),
        _ => form(|_| vec![0.0]),
    };
    ProblemData::new(k, Bc::Natural, f).with_delta_f(delta_f)
}

#[test]
fn proxy_path_matches_forms_path() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for bc in [Bc::Natural, Bc::Essential] {
        let cx = complex(Domain::Cube, 2, bc);
        for k in 0..=3 {
            let mut problem = cubic_data(k);
            problem.bc = bc;
            for _ in 0..3 {
                let sol = random_solution(&cx, k, &mut rng);
                let proxy = vector_proxy_indicators(&cx, &problem, &sol).unwrap();
                let report =
                    total_estimate(&cx, &problem, &sol, &EstimatorOptions::default()).unwrap();
                for (c, e) in report.elements.iter().enumerate() {
                    for (a, b) in [
                        (e.eta_m1, proxy.eta_m1[c]),
                        (e.eta_0, proxy.eta_0[c]),
                        (e.eta_h_p, proxy.eta_h_p[c]),
                    ] {
                        assert!(
                            (a - b).abs() <= 1e-10 * a.abs().max(1e-12),
                            "k={k} {bc} cell {c}: {a} vs {b}"
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn delta_f_of_test_data_matches_finite_differences() {
    let data = cubic_data(2);
    let x = [0.3, -0.2, 0.7];
    // Components [dxdy, dxdz, dydz] = (w3, -w2, w1) and δ = curl w.
    let w_d = |comp: usize, axis: usize| {
        let d = fd_of(&data.f, &x, axis);
        match comp {
            0 => d[2],
            1 => -d[1],
            _ => d[0],
        }
    };
    let curl = [
        w_d(2, 1) - w_d(1, 2),
        w_d(0, 2) - w_d(2, 0),
        w_d(1, 0) - w_d(0, 1),
    ];
    let df = data.delta_f.as_ref().unwrap()(&x);
    for i in 0..3 {
        assert!((curl[i] - df[i]).abs() < 1e-6);
    }
    let data = cubic_data(1);
    let div: f64 = (0..3).map(|axis| fd_of(&data.f, &x, axis)[axis]).sum();
    assert!((data.delta_f.as_ref().unwrap()(&x)[0] + div).abs() < 1e-6);
}

fn fd_of(f: &SharedForm, x: &[f64; 3], axis: usize) -> Vec<f64> {
    let e = 1e-5;
    let mut a = *x;
    let mut b = *x;
    a[axis] += e;
    b[axis] -= e;
    f(&a)
        .iter()
        .zip(f(&b))
        .map(|(p, q)| (p - q) / (2.0 * e))
        .collect()
}

#[test]
fn proxy_path_rejects_planar_meshes() {
    let cx = complex(Domain::Square, 1, Bc::Natural);
    let problem = ProblemData::new(0, Bc::Natural, form(|_| vec![1.0]));
    let sol = solve(&cx, &problem);
    assert!(matches!(
        vector_proxy_indicators(&cx, &problem, &sol),
        Err(FeecError::Unsupported(_))
    ));
}

#[test]
fn interior_edge_jump_matches_hand_computation() {
    // u_h = Whitney form of the diagonal 0→2, σ_h = 0. The normal component
    // jumps by √2(2t-1) along the diagonal and equals t or 1-t on the four
    // boundary edges; δu_h vanishes on both triangles.
    let mesh = Arc::new(two_triangles());
    let h = 2f64.sqrt();
    for (bc, boundary) in [(Bc::Natural, 2.0 / 3.0), (Bc::Essential, 0.0)] {
        let cx = DiscreteComplex::new(mesh.clone(), bc);
        let space = cx.space(1).unwrap();
        let diag = mesh.find_face(1, &[0, 2]).unwrap();
        let mut u = vec![0.0; space.dim()];
        u[space.dof(diag).unwrap()] = 1.0;
        let sol = MixedSolution {
            k: 1,
            bc,
            sigma: Some(CochainVec::zeros(cx.space(0).unwrap())),
            u: CochainVec::new(space, u).unwrap(),
            p: vec![],
            harmonic: harmonic_basis(&cx, 1).unwrap(),
            residual: 0.0,
            system_size: 0,
        };
        let eta = eta_minus1(&cx, &sol).unwrap();
        let expected = h.sqrt() * (boundary + 2.0 * h / 3.0).sqrt();
        for e in eta {
            assert!((e - expected).abs() < 1e-13, "{bc}: {e} vs {expected}");
        }
    }
}

#[test]
fn zero_fields_give_zero_indicators() {
    let cx = complex(Domain::Square, 2, Bc::Natural);
    let problem = ProblemData::new(1, Bc::Natural, form(|_| vec![0.0, 0.0]))
        .with_delta_f(form(|_| vec![0.0]));
    let sol = solve(&cx, &problem);
    let report = total_estimate(&cx, &problem, &sol, &EstimatorOptions::default()).unwrap();
    assert!(report.total() < 1e-14);
    assert!(report
        .elements
        .iter()
        .all(|e| e.eta() == 0.0 || e.eta() < 1e-14));
}

#[test]
fn top_degree_eta_zero_is_distance_to_cell_average() {
    // With affine f, ‖f - c_K‖²_K is exact under the edge-midpoint rule, and
    // c_K = (Dσ_h)_K / |K| by the solver's divergence identity.
    let cx = complex(Domain::Square, 3, Bc::Natural);
    let mesh = cx.mesh().clone();
    let g = |x: &Point| 1.0 + 2.0 * x[0] - 3.0 * x[1];
    let problem = ProblemData::new(2, Bc::Natural, form(move |x| vec![g(x)]));
    let sol = solve(&cx, &problem);
    let dsigma = cx.d(1).unwrap().apply(sol.sigma.as_ref().unwrap().values());
    let eta = eta_zero(&cx, &problem, &sol).unwrap();
    for c in 0..mesh.num_cells() {
        let pts = mesh.cell_points(c);
        let area = mesh.geometry().volume[c].abs();
        let avg = dsigma[c] / mesh.geometry().volume[c];
        let mid = |a: usize, b: usize| {
            [
                0.5 * (pts[a][0] + pts[b][0]),
                0.5 * (pts[a][1] + pts[b][1]),
                0.0,
            ]
        };
        let s: f64 = [mid(0, 1), mid(1, 2), mid(0, 2)]
            .iter()
            .map(|m| (g(m) - avg).powi(2))
            .sum();
        let oracle = (area / 3.0 * s).sqrt();
        assert!(
            (eta[c] - oracle).abs() < 1e-10,
            "cell {c}: {} vs {oracle}",
            eta[c]
        );
    }
}

#[test]
fn constant_load_at_degree_zero_has_zero_estimate() {
    for d in [Domain::Square, Domain::SquareAnnulus, Domain::Cube] {
        let cx = complex(d, 2, Bc::Natural);
        let problem = ProblemData::new(0, Bc::Natural, form(|_| vec![2.5]));
        let sol = solve(&cx, &problem);
        for mode in [Mode::Crude, Mode::Sharp] {
            let opts = EstimatorOptions {
                mode,
                osc_degree: 1,
            };
            let report = total_estimate(&cx, &problem, &sol, &opts).unwrap();
            assert!(report.total() < 1e-10, "{d} {mode}: {}", report.total());
        }
    }
}

#[test]
fn reproduced_solution_reports_infinite_effectivity() {
    let cx = complex(Domain::Square, 2, Bc::Natural);
    let problem = ProblemData::new(0, Bc::Natural, form(|_| vec![2.5]));
    let sol = solve(&cx, &problem);
    let exact = ExactSolution {
        u: Some(form(|_| vec![0.0])),
        du: Some(form(|_| vec![0.0, 0.0])),
        p: Some(form(|_| vec![2.5])),
        ..Default::default()
    };
    let errors = element_errors(&cx, &sol, &ErrorSource::Exact(&exact)).unwrap();
    assert!(errors.total() < 1e-12);
    let mut report = total_estimate(&cx, &problem, &sol, &EstimatorOptions::default()).unwrap();
    report.set_error(errors.total());
    assert_eq!(report.effectivity, Some(f64::INFINITY));
    assert!(report.to_json().contains("\"effectivity\":\"inf\""));
}

#[test]
fn missing_codifferential_is_reported() {
    let cx = complex(Domain::Square, 1, Bc::Natural);
    let problem = ProblemData::new(1, Bc::Natural, form(|x| vec![x[1], 0.0]));
    let sol = solve(&cx, &problem);
    let err = total_estimate(&cx, &problem, &sol, &EstimatorOptions::default()).unwrap_err();
    assert!(matches!(err, FeecError::RegularityDataRequired(_)), "{err}");
}

#[test]
fn absent_delta_f_leaves_osc_delta_empty() {
    let cx = complex(Domain::Square, 1, Bc::Natural);
    let problem = ProblemData::new(2, Bc::Natural, form(|x| vec![x[0].sin()]));
    let sol = solve(&cx, &problem);
    let report = total_estimate(&cx, &problem, &sol, &EstimatorOptions::default()).unwrap();
    let csv = report.to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    for line in lines {
        assert_eq!(line.split(',').count(), 8);
        assert!(line.ends_with(','));
    }
    assert!(report.elements.iter().all(|e| e.osc_delta.is_none()));
}

#[test]
fn scaling_covariance() {
    // Under x ↦ s x with f_s(x) = s^{-2} g(x/s) the k=0 solution is u(x/s)
    // and η₀ scales by s^{n/2-1}; at k=n with f_s(x) = g(x/s), η₀ scales by s^{n/2}.
    let base = generate(Domain::Square, 3).unwrap();
    let s = 3.0;
    let scaled = {
        let coords: Vec<Vec<f64>> = base
            .coords()
            .iter()
            .map(|p| p.iter().map(|x| s * x).collect())
            .collect();
        SimplicialComplex::build(2, &coords, &base.cell_list()).unwrap()
    };
    let g = |x: &Point| (1.3 * x[0]).cos() * (0.7 * x[1] + 0.2).sin();
    for (k, f_scale, expected) in [(0usize, s.powi(-2), 1.0), (2, 1.0, s)] {
        let run = |mesh: &SimplicialComplex, factor: f64, fs: f64| {
            let cx = DiscreteComplex::new(Arc::new(mesh.clone()), Bc::Natural);
            let problem = ProblemData::new(
                k,
                Bc::Natural,
                form(move |x| {
                    let y = [x[0] / factor, x[1] / factor, 0.0];
                    vec![fs * g(&y)]
                }),
            );
            let sol = solve(&cx, &problem);
            eta_zero(&cx, &problem, &sol).unwrap()
        };
        let a = run(&base, 1.0, 1.0);
        let b = run(&scaled, s, f_scale);
        for (x, y) in a.iter().zip(&b) {
            assert!(
                (y / x - expected).abs() < 1e-9 * expected,
                "k={k}: {}",
                y / x
            );
        }
    }
}

#[test]
fn crude_harmonic_term_matches_reconstructed_norm() {
    let cx = complex(Domain::SquareAnnulus, 2, Bc::Natural);
    let problem = ProblemData::new(1, Bc::Natural, form(|x| vec![x[1].sin(), x[0] * x[1]]))
        .with_delta_f(form(|x| vec![-x[0]]));
    let sol = solve(&cx, &problem);
    let gap = gap_bound(&cx, &sol.harmonic).unwrap();
    assert_eq!(gap.mu_i.len(), 1);
    let term = harmonic_term(&cx, &gap, &sol.u, Mode::Crude, None).unwrap();
    let mesh = cx.mesh();
    let norm_sq: f64 = (0..mesh.num_cells())
        .map(|c| {
            let w = cx.reconstruct(&sol.u, c);
            w.inner_product(&w, &mesh.cell_points(c), 2)
        })
        .sum();
    assert!((term.crude - gap.mu * norm_sq.sqrt()).abs() < 1e-12 * term.crude.max(1.0));
    assert!(matches!(
        harmonic_term(&cx, &gap, &sol.u, Mode::Sharp, None),
        Err(FeecError::Missing(_))
    ));
    let parts = hodge_decompose(&cx, &sol.u).unwrap();
    let sharp = harmonic_term(&cx, &gap, &sol.u, Mode::Sharp, Some(&parts)).unwrap();
    let eps = sharp.epsilon.unwrap();
    assert!((sharp.sharp.unwrap() - (gap.mu * eps + gap.mu * gap.mu * term.u_norm)).abs() < 1e-14);
}

#[test]
fn simply_connected_domains_have_no_gap() {
    let cx = complex(Domain::Square, 2, Bc::Natural);
    let problem = ProblemData::new(1, Bc::Natural, form(|x| vec![x[1], x[0] * x[0]]))
        .with_delta_f(form(|x| vec![-2.0 * x[0]]));
    let sol = solve(&cx, &problem);
    let crude = total_estimate(&cx, &problem, &sol, &EstimatorOptions::default()).unwrap();
    let sharp = total_estimate(
        &cx,
        &problem,
        &sol,
        &EstimatorOptions {
            mode: Mode::Sharp,
            osc_degree: 1,
        },
    )
    .unwrap();
    assert!(crude.mu_i.is_empty());
    assert_eq!(crude.mu, 0.0);
    assert_eq!(crude.total_crude, sharp.total_sharp.unwrap());
}

#[test]
fn annulus_gap_bound_decreases() {
    let mut mesh = generate(Domain::SquareAnnulus, 1).unwrap();
    let mut mus = Vec::new();
    for _ in 0..4 {
        let cx = DiscreteComplex::new(Arc::new(mesh.clone()), Bc::Natural);
        mus.push(gap_bound(&cx, &harmonic_basis(&cx, 1).unwrap()).unwrap().mu);
        mesh = refine_uniform(&mesh);
    }
    assert!(mus.windows(2).all(|w| w[1] < w[0]), "{mus:?}");
}

#[test]
fn oscillation_vanishes_on_projection_space() {
    let cx = complex(Domain::Square, 2, Bc::Natural);
    let problem = ProblemData::new(
        1,
        Bc::Natural,
        form(|x| vec![1.0 + x[0] - x[1], 2.0 * x[1]]),
    )
    .with_delta_f(form(|_| vec![-3.0]));
    for degree in [1, 2] {
        let osc = oscillations(&cx, &problem, degree).unwrap();
        let worst = osc
            .osc
            .iter()
            .chain(&osc.osc_boundary)
            .chain(osc.osc_delta.as_ref().unwrap())
            .fold(0.0f64, |a, &b| a.max(b));
        assert!(worst < 1e-10, "degree {degree}: {worst}");
    }
    let quad = ProblemData::new(0, Bc::Natural, form(|x| vec![x[0] * x[1] - x[1] * x[1]]));
    let osc = oscillations(&cx, &quad, 2).unwrap();
    assert!(osc.osc.iter().all(|&v| v < 1e-10));
    assert_eq!(osc.osc_delta, Some(vec![0.0; cx.mesh().num_cells()]));
}

#[test]
fn projection_is_orthogonal_to_polynomials() {
    let mesh = generate(Domain::Cube, 1).unwrap();
    let f = |x: &Point| vec![(x[0] + 2.0 * x[1]).exp(), x[2].cos(), x[0] * x[1] * x[2]];
    let p = l2_projection(&mesh, 3, 1, &f, 1).unwrap();
    let pts = mesh.cell_points(3);
    let rule = feec::polyform::simplex_rule(3, 6);
    for test in [|_: &Point| 1.0, |x: &Point| x[0], |x: &Point| x[1] - x[2]] {
        for comp in 0..3 {
            let r: f64 = (0..rule.len())
                .map(|q| {
                    let x = rule.point(q, &pts);
                    rule.weight(q) * (f(&x)[comp] - p.eval(&x)[comp]) * test(&x)
                })
                .sum();
            assert!(r.abs() < 1e-13, "{r}");
        }
    }
}

#[test]
fn oscillation_of_cosine_converges_at_third_order() {
    let mut mesh = generate(Domain::Square, 2).unwrap();
    let mut totals = Vec::new();
    for _ in 0..3 {
        let cx = DiscreteComplex::new(Arc::new(mesh.clone()), Bc::Natural);
        let problem = ProblemData::new(
            0,
            Bc::Natural,
            form(|x| vec![(std::f64::consts::PI * x[0]).cos()]),
        );
        let osc = oscillations(&cx, &problem, 1).unwrap();
        totals.push(osc.osc.iter().map(|v| v * v).sum::<f64>().sqrt());
        mesh = refine_uniform(&mesh);
    }
    for w in totals.windows(2) {
        let rate = (w[0] / w[1]).log2();
        assert!((rate - 3.0).abs() < 0.2, "rate {rate}");
    }
}

#[test]
fn report_json_has_expected_fields() {
    let cx = complex(Domain::SquareAnnulus, 1, Bc::Natural);
    let problem = ProblemData::new(1, Bc::Natural, form(|x| vec![x[1], 1.0]))
        .with_delta_f(form(|_| vec![0.0]));
    let sol = solve(&cx, &problem);
    let report = total_estimate(
        &cx,
        &problem,
        &sol,
        &EstimatorOptions {
            mode: Mode::Sharp,
            osc_degree: 1,
        },
    )
    .unwrap();
    let v: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
    for key in [
        "mu",
        "mu_i",
        "epsilon",
        "harmonic_term",
        "total",
        "mode",
        "effectivity",
    ] {
        assert!(v.get(key).is_some(), "{key}");
    }
    assert_eq!(v["mode"], "sharp");
    assert_eq!(v["mu_i"].as_array().unwrap().len(), 1);
    assert!(v["effectivity"].is_null());
    let eta: f64 = report.indicator_norm();
    assert!((report.total() - eta - report.harmonic_term()).abs() < 1e-14);
}
