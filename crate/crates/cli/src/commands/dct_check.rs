use duet_core::frequency::{dct_apply, dct_basis, idct_apply};
use duet_core::numerics::{matmul_batched, Rng};
use duet_core::Result;

/// Orthonormality and round-trip self-check for every basis length up to
/// `max_t`. Returns the worst offender when the 1e-10 budget is breached.
pub fn run(max_t: usize) -> Result<std::process::ExitCode> {
    let mut rng = Rng::new(0xdc7);
    let mut max_residual: f64 = 0.0;
    let mut max_round_trip: f64 = 0.0;
    let mut offenders = Vec::new();
    for t in 1..=max_t {
        let basis = dct_basis(t)?;
        let m = basis.matrix().reshape(&[1, t, t])?;
        let mt = basis.matrix().permute(&[1, 0])?.reshape(&[1, t, t])?;
        let prod = matmul_batched(&m, &mt)?;
        let mut residual: f64 = 0.0;
        for i in 0..t {
            for j in 0..t {
                let expect = if i == j { 1.0 } else { 0.0 };
                residual = residual.max((prod.at(&[0, i, j]) - expect).abs());
            }
        }
        let mut round_trip: f64 = 0.0;
        for _ in 0..20 {
            let x = rng.uniform(-10.0, 10.0, &[t])?;
            let back = idct_apply(&dct_apply(&x, &basis, t)?, t)?;
            round_trip = round_trip.max(back.max_abs_diff(&x));
        }
        if residual >= 1e-10 || round_trip >= 1e-10 {
            offenders.push(t);
        }
        max_residual = max_residual.max(residual);
        max_round_trip = max_round_trip.max(round_trip);
    }
    println!(
        "T in 1..={max_t}: max orthonormality residual {max_residual:.3e}, max round-trip error {max_round_trip:.3e}"
    );
    if offenders.is_empty() {
        Ok(std::process::ExitCode::SUCCESS)
    } else {
        eprintln!("residual budget 1e-10 breached at T = {offenders:?}");
        Ok(std::process::ExitCode::from(1))
    }
}
