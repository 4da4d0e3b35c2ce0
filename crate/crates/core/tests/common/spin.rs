//! Element-by-element spin Hamiltonian, independent of the library's
//! operator algebra.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use sicwfi::spin_strain::GroundStateParams;

/// Spin-3/2 Hamiltonian written out element by element, as (re, im) 4x4.
///
/// Basis m = 3/2, 1/2, -1/2, -3/2. With S± = Sx ± iSy and
/// Sx² - Sy² = (S+² + S-²)/2, {SxSy} = (S+² - S-²)/(4i),
/// {SxSz} = ({S+,Sz} + {S-,Sz})/4, {SySz} = ({S+,Sz} - {S-,Sz})/(4i).
pub fn oracle_hamiltonian(p: &GroundStateParams, u: &[[f64; 3]; 3], b: [f64; 3]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let m = [1.5, 0.5, -0.5, -1.5];
    let mut re = vec![vec![0.0; 4]; 4];
    let mut im = vec![vec![0.0; 4]; 4];
    // <m+1|S+|m>
    let sp = |k: usize| (3.75f64 - m[k] * (m[k] + 1.0)).sqrt();
    let (xp, xz) = (p.xi_perp, p.xi_para);
    // Sx² + Sy² = 15/4 - Sz².
    let axial = 0.5 * xp * (u[0][0] + u[1][1]);
    for k in 0..4 {
        let mz2 = m[k] * m[k];
        re[k][k] = p.d * (mz2 - 1.25) + xz * u[2][2] * mz2 + axial * (3.75 - mz2) + p.gamma_e * b[2] * m[k];
    }
    // Raising by two: <k-2|S+²|k>.
    let diff = 0.5 * xp * (u[0][0] - u[1][1]);
    let xy = xp * u[0][1];
    for k in 2..4 {
        let s2 = sp(k) * sp(k - 1);
        // diff (S+² + S-²)/2 + xy (S+² - S-²)/(2i)
        re[k - 2][k] += diff * s2 / 2.0;
        im[k - 2][k] += -xy * s2 / 2.0;
        re[k][k - 2] += diff * s2 / 2.0;
        im[k][k - 2] += xy * s2 / 2.0;
    }
    // Raising by one: {S+,Sz} element = S+ (m_k + m_{k-1}).
    let xzc = 2.0 * xp * u[0][2];
    let yzc = 2.0 * xp * u[1][2];
    for k in 1..4 {
        let a = sp(k) * (m[k] + m[k - 1]) / 2.0;
        let zeeman = sp(k) / 2.0;
        // xzc {SxSz} + yzc {SySz} + γ(Bx Sx + By Sy)
        re[k - 1][k] += xzc * a / 2.0 + p.gamma_e * b[0] * zeeman;
        im[k - 1][k] += -yzc * a / 2.0 - p.gamma_e * b[1] * zeeman;
        re[k][k - 1] += xzc * a / 2.0 + p.gamma_e * b[0] * zeeman;
        im[k][k - 1] += yzc * a / 2.0 + p.gamma_e * b[1] * zeeman;
    }
    (re, im)
}

pub fn random_tensor(rng: &mut ChaCha8Rng, amplitude: f64) -> [[f64; 3]; 3] {
    let mut u = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in a..3 {
            let v = amplitude * (2.0 * rng.random::<f64>() - 1.0);
            u[a][b] = v;
            u[b][a] = v;
        }
    }
    u
}
