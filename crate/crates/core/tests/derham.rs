use std::sync::Arc;

use feec::derham::{Bc, DiscreteComplex};
use feec::mesh::{generate, refine_uniform, Domain, SimplicialComplex};
use feec::polyform::{Poly, PolyForm};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn complexes() -> Vec<DiscreteComplex> {
    let mut out = Vec::new();
    for d in Domain::ALL {
        let mesh = Arc::new(generate(d, 1).unwrap());
        for bc in [Bc::Natural, Bc::Essential] {
            out.push(DiscreteComplex::new(mesh.clone(), bc));
        }
    }
    let fine = Arc::new(refine_uniform(&generate(Domain::Square, 2).unwrap()));
    out.push(DiscreteComplex::new(fine, Bc::Natural));
    out
}

#[test]
fn incidence_matrices_compose_to_zero() {
    for cx in complexes() {
        for k in 0..cx.dim() - 1 {
            let a = cx.d(k).unwrap().to_dense();
            let b = cx.d(k + 1).unwrap().to_dense();
            let prod = &b * &a;
            assert_eq!(prod.amax(), 0.0, "D{}D{} != 0 on {:?}", k + 1, k, cx);
        }
    }
}

#[test]
fn mass_matrices_are_symmetric_positive_definite() {
    for cx in complexes() {
        for k in 0..=cx.dim() {
            let m = cx.mass(k).unwrap().to_dense();
            if m.nrows() == 0 {
                continue;
            }
            assert!((&m - m.transpose()).amax() <= 1e-15 * m.amax());
            let eig = m.symmetric_eigenvalues();
            assert!(eig.min() > 0.0, "mass {k} not SPD on {cx:?}");
        }
    }
}

/// Mass matrix from an independent formula: `M_ij = Σ_K ∫ w_i · w_j` with
/// both forms sampled at the vertices and midpoints of each cell and
/// integrated with the degree-2 simplex rule built from those nodes.
#[test]
fn mass_matches_nodal_quadrature_in_2d() {
    let mesh = Arc::new(generate(Domain::SquareAnnulus, 1).unwrap());
    let cx = DiscreteComplex::new(mesh.clone(), Bc::Natural);
    for k in 0..=2 {
        let m = cx.mass(k).unwrap().to_dense();
        let mut oracle = DMatrix::<f64>::zeros(m.nrows(), m.ncols());
        for c in 0..mesh.num_cells() {
            let pts = mesh.cell_points(c);
            let area = feec::mesh::simplex_measure(&pts);
            // edge-midpoint rule, exact for quadratics on triangles
            let mids: Vec<[f64; 3]> = [(0, 1), (1, 2), (0, 2)]
                .iter()
                .map(|&(a, b)| std::array::from_fn(|i| 0.5 * (pts[a][i] + pts[b][i])))
                .collect();
            let basis = cx.local_basis(k, c).unwrap();
            for (di, wi) in &basis {
                for (dj, wj) in &basis {
                    let (Some(i), Some(j)) = (di, dj) else {
                        continue;
                    };
                    let s: f64 = mids
                        .iter()
                        .map(|x| {
                            wi.eval(x)
                                .iter()
                                .zip(wj.eval(x))
                                .map(|(a, b)| a * b)
                                .sum::<f64>()
                        })
                        .sum();
                    oracle[(*i, *j)] += area * s / 3.0;
                }
            }
        }
        assert!((&m - &oracle).amax() < 1e-13, "k={k}");
    }
}

fn mesh_3d() -> Arc<SimplicialComplex> {
    Arc::new(generate(Domain::Cube, 2).unwrap())
}

fn mesh_2d() -> Arc<SimplicialComplex> {
    Arc::new(generate(Domain::LShape, 2).unwrap())
}

fn random_form(n: usize, k: usize, coeffs: &[f64]) -> PolyForm {
    let ncomp = feec::mesh::binomial(n, k);
    let comps: Vec<Poly> = (0..ncomp)
        .map(|i| {
            let c = &coeffs[i * 4..i * 4 + 4];
            Poly::affine(c[0], &c[1..1 + n])
        })
        .collect();
    PolyForm::from_components(n, k, comps).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Canonical interpolation commutes with d for affine forms.
    #[test]
    fn interpolation_commutes_with_d(
        three in any::<bool>(),
        k_seed in 0usize..3,
        coeffs in prop::collection::vec(-2.0f64..2.0, 12),
    ) {
        let (mesh, n) = if three { (mesh_3d(), 3) } else { (mesh_2d(), 2) };
        let k = k_seed % n;
        let cx = DiscreteComplex::new(mesh, Bc::Natural);
        let omega = random_form(n, k, &coeffs);
        let domega = omega.d().unwrap();
        let pi = cx.interpolate(k, &|x| omega.eval(x)).unwrap();
        let lhs = cx.d(k).unwrap().apply(pi.values());
        let rhs = cx.interpolate(k + 1, &|x| domega.eval(x)).unwrap();
        for (a, b) in lhs.iter().zip(rhs.values()) {
            prop_assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    /// Reconstruction then interpolation is the identity on cochains.
    #[test]
    fn interpolation_inverts_reconstruction(
        three in any::<bool>(),
        k_seed in 0usize..4,
        seed in any::<u64>(),
    ) {
        use rand::{Rng, SeedableRng};
        let (mesh, n) = if three { (mesh_3d(), 3) } else { (mesh_2d(), 2) };
        let k = k_seed % (n + 1);
        let cx = DiscreteComplex::new(mesh.clone(), Bc::Natural);
        let space = cx.space(k).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let v: Vec<f64> = (0..space.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let v = feec::derham::CochainVec::new(space.clone(), v).unwrap();
        // interpolate each cell's reconstruction on the subsimplices of that cell
        for c in (0..mesh.num_cells()).step_by(7) {
            let w = cx.reconstruct(&v, c);
            for (pos, &f) in mesh.cell_face_ids(k, c).iter().enumerate() {
                let dof = space.dof(f).unwrap();
                let rho = &feec::derham::local_orientations(&mesh, c, k)[pos];
                let pts: Vec<[f64; 3]> = rho.iter().map(|&a| mesh.cell_points(c)[a]).collect();
                let val = feec::polyform::form_integral(&w, &pts);
                prop_assert!((val - v.values()[dof]).abs() < 1e-11);
            }
        }
    }
}

#[test]
fn essential_spaces_drop_boundary_faces() {
    let mesh = Arc::new(generate(Domain::SquareAnnulus, 2).unwrap());
    let cx = DiscreteComplex::new(mesh.clone(), Bc::Essential);
    for k in 0..=2 {
        let space = cx.space(k).unwrap();
        let interior = (0..mesh.num_faces(k))
            .filter(|&f| !mesh.is_boundary(k, f))
            .count();
        assert_eq!(space.dim(), interior);
    }
}
