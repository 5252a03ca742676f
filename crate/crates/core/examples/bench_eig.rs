use std::time::Instant;
fn main() {
    let t0 = Instant::now();
    let a = occam::spectral::wishart(800, 800, 1.0, 1);
    println!("wishart build: {:?}", t0.elapsed());
    let t1 = Instant::now();
    let ev = occam::linalg::eigenvalues_sym(&a).unwrap();
    println!("eig values-only 800: {:?}  (lmax={:.4}, lmin={:.2e})", t1.elapsed(), ev[0], ev[799]);
    let t2 = Instant::now();
    let ld = occam::linalg::log_det_shifted(&a, 0.1).unwrap();
    println!("log_det_shifted 800: {:?} -> {:.6}", t2.elapsed(), ld / 800.0);
}
