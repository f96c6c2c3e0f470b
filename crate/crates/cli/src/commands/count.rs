use anyhow::Result;

use implicit_sindy::library::{count_monomials, count_polynomial_structures};

pub fn run(states: usize, degree: usize) -> Result<u8> {
    let n_m = count_monomials(states, degree);
    let (n_p, magnitude) = count_polynomial_structures(states, degree);
    println!("states n = {}, degree d = {}", states, degree);
    println!("monomials N_m = {}", n_m);
    println!("polynomial structures N_p = 2^{} - 1 = {} (~1e{})", n_m, n_p, magnitude);
    Ok(0)
}
