use nalgebra::{DMatrix, DVector};
use rand_chacha::rand_core::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn probe() -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let x = rng.next_u64();
    let m = DMatrix::<f64>::from_fn(3, 5, |i, j| (i + j) as f64 + (x % 3) as f64);
    let svd = m.clone().svd(true, true);
    let e = nalgebra::SymmetricEigen::new(DMatrix::<f64>::identity(3, 3));
    let c = nalgebra::Cholesky::new(DMatrix::<f64>::identity(3, 3)).unwrap();
    let v = DVector::<f64>::zeros(3);
    let _ = c.solve(&v);
    svd.singular_values[0] + e.eigenvalues[0]
}

pub fn probe_generic<S: nalgebra::RealField + Copy + num_traits::FromPrimitive>(x: S) -> S {
    let two = S::from_f64(2.0).unwrap();
    let m = DMatrix::<S>::identity(4, 4);
    let svd = m.svd(true, true);
    x.abs() + x.exp() + x.floor() + two + x.max(S::zero()) + svd.singular_values[0] + S::pi()
}
