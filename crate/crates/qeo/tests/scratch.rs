// temporary debugging scaffold
use num_complex::Complex64;
use qeo::eigensolver::*;
use qeo::lattice::{MultiIndex, ProjectionMatrix};
use qeo::operator::SpectralOperator;
use qeo::qpfield::TrigField;
use std::f64::consts::PI;
use std::time::Instant;

fn example1() -> (TrigField, ProjectionMatrix) {
    let golden = (5.0f64.sqrt() - 1.0) / 2.0;
    let mut f = TrigField::constant(2, Complex64::new(1.0, 0.0));
    f.add_cosine(MultiIndex::new(vec![1, 0]), 0.5);
    f.add_cosine(MultiIndex::new(vec![0, 1]), 0.5);
    let p = ProjectionMatrix::row_vector(vec![2.0 * PI, 2.0 * PI * golden]).unwrap();
    (f, p)
}

#[test]
fn debug_reference_timing() {
    let (coeff, p) = example1();
    let op = SpectralOperator::matrix_free(&coeff, &p, 128).unwrap();
    let m = DiagonalPreconditioner::build(&op).unwrap();
    let t = Instant::now();
    let opts = SolveOptions {
        num_pairs: 46,
        tol: 1e-6,
        max_iterations: 60,
        seed: 11,
        ..Default::default()
    };
    let r = solve_iterative(&op, &m, &opts).unwrap();
    println!(
        "m=46 N=128 tol 1e-7: {:?} iters={} conv={} worst={:.1e}",
        t.elapsed(),
        r.iterations,
        r.converged.iter().filter(|&&c| c).count(),
        r.residual_norms.iter().cloned().fold(0.0f64, f64::max),
    );
    println!("eig[18..28]={:?}", &r.eigenvalues[18..28]);
    println!("eig[40..46]={:?}", &r.eigenvalues[40..46]);
}
