//! The three benchmark systems: Michaelis-Menten kinetics, the two-state
//! bacterial competence regulatory network, and the seven-state yeast
//! glycolysis network.

use std::collections::BTreeMap;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{OdeModel, StateRhs};
use crate::error::{Error, Result};
use crate::poly::Poly;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Benchmark {
    MichaelisMenten,
    Regulatory,
    Glycolysis,
}

impl Benchmark {
    pub fn n_states(&self) -> usize {
        match self {
            Benchmark::MichaelisMenten => 1,
            Benchmark::Regulatory => 2,
            Benchmark::Glycolysis => 7,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Benchmark::MichaelisMenten => "michaelis_menten",
            Benchmark::Regulatory => "regulatory",
            Benchmark::Glycolysis => "glycolysis",
        }
    }
}

impl FromStr for Benchmark {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "michaelis_menten" | "mm" => Ok(Benchmark::MichaelisMenten),
            "regulatory" => Ok(Benchmark::Regulatory),
            "glycolysis" => Ok(Benchmark::Glycolysis),
            other => Err(Error::UnknownBenchmark(other.to_string())),
        }
    }
}

impl std::fmt::Display for Benchmark {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Default parameter values. The regulatory and glycolysis values are the
/// published "true" parameter sets; the Michaelis-Menten values are module
/// defaults used for self-consistent round trips.
pub fn default_params(benchmark: Benchmark) -> BTreeMap<String, f64> {
    let pairs: &[(&str, f64)] = match benchmark {
        Benchmark::MichaelisMenten => &[("j_x", 0.6), ("v_max", 1.5), ("k_m", 0.3)],
        Benchmark::Regulatory => &[
            ("a1", 0.004),
            ("a2", 0.07),
            ("a3", 0.04),
            ("b1", 0.82),
            ("b2", 1854.5),
        ],
        Benchmark::Glycolysis => &[
            ("c1", 2.5),
            ("c2", -100.0),
            ("c3", 13.6769),
            ("d1", 200.0),
            ("d2", 13.6769),
            ("d3", -6.0),
            ("d4", -6.0),
            ("e1", 6.0),
            ("e2", -64.0),
            ("e3", 6.0),
            ("e4", 16.0),
            ("f1", 64.0),
            ("f2", -13.0),
            ("f3", 13.0),
            ("f4", -16.0),
            ("f5", -100.0),
            ("g1", 1.3),
            ("g2", -3.1),
            ("h1", -200.0),
            ("h2", 13.6769),
            ("h3", 128.0),
            ("h4", -1.28),
            ("h5", -32.0),
            ("j1", 6.0),
            ("j2", -18.0),
            ("j3", -100.0),
        ],
    };
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

pub fn benchmark_param_names(benchmark: Benchmark) -> Vec<String> {
    default_params(benchmark).keys().cloned().collect()
}

fn get(params: &BTreeMap<String, f64>, name: &str) -> Result<f64> {
    params
        .get(name)
        .copied()
        .ok_or_else(|| Error::MissingParameter(name.to_string()))
}

/// Build a benchmark model; `overrides` replaces individual default values.
pub fn make_benchmark(
    benchmark: Benchmark,
    overrides: &BTreeMap<String, f64>,
) -> Result<OdeModel> {
    let mut params = default_params(benchmark);
    for (k, v) in overrides {
        if !params.contains_key(k) {
            return Err(Error::InvalidConfig(format!(
                "parameter '{}' is not part of the {} system",
                k, benchmark
            )));
        }
        params.insert(k.clone(), *v);
    }
    let rhs = match benchmark {
        Benchmark::MichaelisMenten => mm_rhs(&params)?,
        Benchmark::Regulatory => regulatory_rhs(&params)?,
        Benchmark::Glycolysis => glycolysis_rhs(&params)?,
    };
    let mut model = OdeModel::new(benchmark.n_states(), rhs)?;
    model.params = params;
    Ok(model)
}

/// dx/dt = j_x - v_max*x / (k_m + x), written over the common denominator.
fn mm_rhs(p: &BTreeMap<String, f64>) -> Result<Vec<StateRhs>> {
    let (jx, vmax, km) = (get(p, "j_x")?, get(p, "v_max")?, get(p, "k_m")?);
    let numerator = Poly::from_terms(1, &[(vec![0], jx * km), (vec![1], jx - vmax)])?;
    let denominator = Poly::from_terms(1, &[(vec![0], km), (vec![1], 1.0)])?;
    Ok(vec![StateRhs::Rational {
        numerator,
        denominator,
    }])
}

fn regulatory_rhs(p: &BTreeMap<String, f64>) -> Result<Vec<StateRhs>> {
    let n = 2;
    let (a1, a2, a3) = (get(p, "a1")?, get(p, "a2")?, get(p, "a3")?);
    let (b1, b2) = (get(p, "b1")?, get(p, "b2")?);
    let x1 = Poly::var(n, 0);
    let x2 = Poly::var(n, 1);
    let one = Poly::constant(n, 1.0);
    let x1sq = x1.mul(&x1);
    let hill1 = Poly::constant(n, a3).add(&x1sq); // a3 + x1^2
    let degr = one.add(&x1).add(&x2); // 1 + x1 + x2
    let hill2 = one.add(&x1sq.mul(&x1sq).mul(&x1).scale(b2)); // 1 + b2*x1^5

    // dx1 = a1 + a2*x1^2/(a3 + x1^2) - x1/(1 + x1 + x2)
    let den1 = hill1.mul(&degr);
    let num1 = den1
        .scale(a1)
        .add(&x1sq.scale(a2).mul(&degr))
        .add(&x1.mul(&hill1).scale(-1.0));

    // dx2 = b1/(1 + b2*x1^5) - x2/(1 + x1 + x2)
    let den2 = hill2.mul(&degr);
    let num2 = degr.scale(b1).add(&x2.mul(&hill2).scale(-1.0));

    Ok(vec![
        StateRhs::Rational {
            numerator: num1,
            denominator: den1,
        },
        StateRhs::Rational {
            numerator: num2,
            denominator: den2,
        },
    ])
}

fn glycolysis_rhs(p: &BTreeMap<String, f64>) -> Result<Vec<StateRhs>> {
    let n = 7;
    let v = |i: usize| Poly::var(n, i);
    let one = Poly::constant(n, 1.0);
    let x6_4 = {
        let x6 = v(5);
        x6.mul(&x6).mul(&x6).mul(&x6)
    };
    let x1x6 = v(0).mul(&v(5));

    let (c1, c2, c3) = (get(p, "c1")?, get(p, "c2")?, get(p, "c3")?);
    let den1 = one.add(&x6_4.scale(c3));
    let num1 = den1.scale(c1).add(&x1x6.scale(c2));

    let (d1, d2, d3, d4) = (get(p, "d1")?, get(p, "d2")?, get(p, "d3")?, get(p, "d4")?);
    let den2 = one.add(&x6_4.scale(d2));
    let poly2 = v(1).scale(d3).add(&v(1).mul(&v(6)).scale(-d4)); // d3*x2 - d4*x2*x7
    let num2 = x1x6.scale(d1).add(&poly2.mul(&den2));

    let (e1, e2, e3, e4) = (get(p, "e1")?, get(p, "e2")?, get(p, "e3")?, get(p, "e4")?);
    let poly3 = v(1)
        .scale(e1)
        .add(&v(2).scale(e2))
        .add(&v(1).mul(&v(6)).scale(e3))
        .add(&v(2).mul(&v(5)).scale(e4));

    let (f1, f2, f3, f4, f5) = (
        get(p, "f1")?,
        get(p, "f2")?,
        get(p, "f3")?,
        get(p, "f4")?,
        get(p, "f5")?,
    );
    let poly4 = v(2)
        .scale(f1)
        .add(&v(3).scale(f2))
        .add(&v(4).scale(f3))
        .add(&v(2).mul(&v(5)).scale(f4))
        .add(&v(3).mul(&v(6)).scale(f5));

    let (g1, g2) = (get(p, "g1")?, get(p, "g2")?);
    let poly5 = v(3).scale(g1).add(&v(4).scale(g2));

    let (h1, h2, h3, h4, h5) = (
        get(p, "h1")?,
        get(p, "h2")?,
        get(p, "h3")?,
        get(p, "h4")?,
        get(p, "h5")?,
    );
    let den6 = one.add(&x6_4.scale(h2));
    let poly6 = v(2)
        .scale(h3)
        .add(&v(5).scale(h5))
        .add(&v(2).mul(&v(6)).scale(h4));
    let num6 = x1x6.scale(h1).add(&poly6.mul(&den6));

    let (j1, j2, j3) = (get(p, "j1")?, get(p, "j2")?, get(p, "j3")?);
    let poly7 = v(1)
        .scale(j1)
        .add(&v(1).mul(&v(6)).scale(j2))
        .add(&v(3).mul(&v(6)).scale(j3));

    Ok(vec![
        StateRhs::Rational {
            numerator: num1,
            denominator: den1,
        },
        StateRhs::Rational {
            numerator: num2,
            denominator: den2,
        },
        StateRhs::Polynomial { poly: poly3 },
        StateRhs::Polynomial { poly: poly4 },
        StateRhs::Polynomial { poly: poly5 },
        StateRhs::Rational {
            numerator: num6,
            denominator: den6,
        },
        StateRhs::Polynomial { poly: poly7 },
    ])
}

/// Documented per-state ranges from which initial conditions are drawn.
/// Chosen so no denominator pole is crossed (all denominators are positive
/// for nonnegative states).
pub fn default_ic_ranges(benchmark: Benchmark) -> Vec<(f64, f64)> {
    match benchmark {
        Benchmark::MichaelisMenten => vec![(0.5, 1.0)],
        Benchmark::Regulatory => vec![(0.01, 0.6), (0.01, 1.0)],
        Benchmark::Glycolysis => vec![
            (0.15, 1.60),
            (0.19, 2.16),
            (0.04, 0.20),
            (0.10, 0.35),
            (0.08, 0.30),
            (0.14, 2.67),
            (0.05, 0.10),
        ],
    }
}

/// Deterministic sample of `count` initial conditions from the default ranges.
/// Michaelis-Menten with `count == 2` returns the canonical pair {0.5, 1.0}.
pub fn sample_ics(benchmark: Benchmark, count: usize, seed: u64) -> Vec<Vec<f64>> {
    if benchmark == Benchmark::MichaelisMenten && count == 2 {
        return vec![vec![0.5], vec![1.0]];
    }
    let ranges = default_ic_ranges(benchmark);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            ranges
                .iter()
                .map(|&(lo, hi)| rng.gen_range(lo..hi))
                .collect()
        })
        .collect()
}

/// Default sampling grid: t in [0, 10], 1000 uniform samples per trajectory
/// (2000 for glycolysis).
pub fn default_t_grid(benchmark: Benchmark) -> Vec<f64> {
    let (t_end, samples) = match benchmark {
        Benchmark::MichaelisMenten | Benchmark::Regulatory => (10.0, 1000usize),
        Benchmark::Glycolysis => (10.0, 2000),
    };
    (0..samples)
        .map(|i| t_end * i as f64 / (samples - 1) as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::IntegratorConfig;
    use approx::assert_relative_eq;

    #[test]
    fn regulatory_defaults_match_published_table() {
        let p = default_params(Benchmark::Regulatory);
        assert_eq!(p["a1"], 0.004);
        assert_eq!(p["a2"], 0.07);
        assert_eq!(p["a3"], 0.04);
        assert_eq!(p["b1"], 0.82);
        assert_eq!(p["b2"], 1854.5);
    }

    #[test]
    fn glycolysis_has_26_parameters() {
        let p = default_params(Benchmark::Glycolysis);
        assert_eq!(p.len(), 26);
        assert_eq!(p["c1"], 2.5);
        assert_eq!(p["c3"], 13.6769);
        assert_eq!(p["j3"], -100.0);
    }

    #[test]
    fn mm_defaults() {
        let p = default_params(Benchmark::MichaelisMenten);
        assert_eq!(p["j_x"], 0.6);
        assert_eq!(p["v_max"], 1.5);
        assert_eq!(p["k_m"], 0.3);
    }

    #[test]
    fn unknown_benchmark_name() {
        assert!(matches!(
            "lorenz".parse::<Benchmark>(),
            Err(Error::UnknownBenchmark(_))
        ));
    }

    #[test]
    fn override_applies_and_unknown_key_rejected() {
        let mut ov = BTreeMap::new();
        ov.insert("j_x".to_string(), 1.0);
        let model = make_benchmark(Benchmark::MichaelisMenten, &ov).unwrap();
        let f = model.evaluate_rhs(&[0.0]).unwrap();
        assert_relative_eq!(f[0], 1.0);

        let mut bad = BTreeMap::new();
        bad.insert("nope".to_string(), 1.0);
        assert!(make_benchmark(Benchmark::MichaelisMenten, &bad).is_err());
    }

    #[test]
    fn mm_rhs_matches_direct_formula() {
        let model = make_benchmark(Benchmark::MichaelisMenten, &BTreeMap::new()).unwrap();
        for &x in &[0.0, 0.1, 0.5, 1.0, 2.0] {
            let expect = 0.6 - 1.5 * x / (0.3 + x);
            let f = model.evaluate_rhs(&[x]).unwrap();
            assert_relative_eq!(f[0], expect, epsilon = 1e-13);
        }
    }

    #[test]
    fn regulatory_rhs_matches_direct_formula() {
        let model = make_benchmark(Benchmark::Regulatory, &BTreeMap::new()).unwrap();
        let (a1, a2, a3, b1, b2) = (0.004, 0.07, 0.04, 0.82, 1854.5);
        for &(x1, x2) in &[(0.1, 0.2), (0.4, 0.9), (0.02, 0.01)] {
            let f = model.evaluate_rhs(&[x1, x2]).unwrap();
            let e1 = a1 + a2 * x1 * x1 / (a3 + x1 * x1) - x1 / (1.0 + x1 + x2);
            let e2 = b1 / (1.0 + b2 * x1.powi(5)) - x2 / (1.0 + x1 + x2);
            assert_relative_eq!(f[0], e1, epsilon = 1e-12);
            assert_relative_eq!(f[1], e2, epsilon = 1e-12);
        }
    }

    #[test]
    fn glycolysis_rhs_matches_direct_formula() {
        let model = make_benchmark(Benchmark::Glycolysis, &BTreeMap::new()).unwrap();
        let x = [0.5, 1.0, 0.1, 0.2, 0.15, 1.2, 0.07];
        let f = model.evaluate_rhs(&x).unwrap();
        let hill = 1.0 + 13.6769 * x[5].powi(4);
        assert_relative_eq!(f[0], 2.5 - 100.0 * x[0] * x[5] / hill, epsilon = 1e-12);
        assert_relative_eq!(
            f[1],
            200.0 * x[0] * x[5] / hill - 6.0 * x[1] + 6.0 * x[1] * x[6],
            epsilon = 1e-12
        );
        assert_relative_eq!(
            f[2],
            6.0 * x[1] - 64.0 * x[2] + 6.0 * x[1] * x[6] + 16.0 * x[2] * x[5],
            epsilon = 1e-12
        );
        assert_relative_eq!(
            f[5],
            -200.0 * x[0] * x[5] / hill + 128.0 * x[2] - 32.0 * x[5] - 1.28 * x[2] * x[6],
            epsilon = 1e-12
        );
        assert_relative_eq!(
            f[6],
            6.0 * x[1] - 18.0 * x[1] * x[6] - 100.0 * x[3] * x[6],
            epsilon = 1e-12
        );
    }

    #[test]
    fn mm_converges_to_fixed_point() {
        // x* = j_x*k_m / (v_max - j_x) = 0.2 for the defaults
        let model = make_benchmark(Benchmark::MichaelisMenten, &BTreeMap::new()).unwrap();
        let grid: Vec<f64> = (0..1000).map(|i| i as f64 * 0.05).collect();
        let traj = model
            .simulate(&[1.0], &grid, &IntegratorConfig::default())
            .unwrap();
        // monotone decay toward the fixed point
        for w in 0..traj.n_samples() - 1 {
            assert!(traj.states[(w + 1, 0)] <= traj.states[(w, 0)] + 1e-12);
            assert!(traj.states[(w, 0)] >= 0.2 - 1e-9);
        }
        assert_relative_eq!(traj.states[(999, 0)], 0.2, epsilon = 1e-6);
    }

    #[test]
    fn sampled_ics_are_deterministic_and_in_range() {
        let a = sample_ics(Benchmark::Regulatory, 5, 7);
        let b = sample_ics(Benchmark::Regulatory, 5, 7);
        assert_eq!(a, b);
        let ranges = default_ic_ranges(Benchmark::Regulatory);
        for ic in &a {
            for (v, (lo, hi)) in ic.iter().zip(&ranges) {
                assert!(v >= lo && v < hi);
            }
        }
        assert_ne!(a, sample_ics(Benchmark::Regulatory, 5, 8));
    }
}
