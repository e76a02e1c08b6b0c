//! Finite hidden-variable theories and the standard properties one may
//! demand of them.
//!
//! A theory has several measurement *sites*, each with a finite number of
//! setups and outcomes, and a finite hidden-variable domain. For every
//! combination of setups it supplies `p(λ | setups)` and, for every `λ`, a
//! joint outcome distribution `p(a₁, a₂, … | setups, λ)`. Setup combinations
//! and joint outcomes are indexed in mixed radix with site 0 least
//! significant.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quantum::EXACT_TOL;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HvTheory {
    setups: Vec<usize>,
    outcomes: Vec<usize>,
    lambdas: usize,
    /// `[combo][λ][joint outcome]`, flattened.
    response: Vec<f64>,
    /// `[combo][λ]`, flattened.
    lambda_dist: Vec<f64>,
}

/// Outcome of a predicate that may hold only vacuously.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Fails,
    /// Nothing to compare: no site has another site with a second setup.
    Vacuous,
}

impl Verdict {
    pub fn holds(self) -> bool {
        !matches!(self, Verdict::Fails)
    }
}

fn decode(mut index: usize, radices: &[usize]) -> Vec<usize> {
    radices
        .iter()
        .map(|&r| {
            let d = index % r;
            index /= r;
            d
        })
        .collect()
}

fn encode(digits: &[usize], radices: &[usize]) -> usize {
    digits.iter().zip(radices).rev().fold(0, |acc, (&d, &r)| acc * r + d)
}

impl HvTheory {
    /// Tabulates a theory from closures. `response(setups, λ)` returns the
    /// joint outcome distribution; `lambda_dist(setups)` returns `p(λ | setups)`.
    pub fn new<R, L>(setups: Vec<usize>, outcomes: Vec<usize>, lambdas: usize, response: R, lambda_dist: L) -> Result<Self>
    where
        R: Fn(&[usize], usize) -> Vec<f64>,
        L: Fn(&[usize]) -> Vec<f64>,
    {
        if setups.is_empty() || setups.len() != outcomes.len() {
            return Err(Error::InvalidTheory("setups and outcomes must list the same non-empty set of sites".into()));
        }
        if lambdas == 0 || setups.contains(&0) || outcomes.contains(&0) {
            return Err(Error::InvalidTheory("every domain must be non-empty".into()));
        }
        let combos: usize = setups.iter().product();
        let joint: usize = outcomes.iter().product();
        let mut resp = Vec::with_capacity(combos * lambdas * joint);
        let mut ldist = Vec::with_capacity(combos * lambdas);
        for c in 0..combos {
            let s = decode(c, &setups);
            let pl = lambda_dist(&s);
            check_row(&pl, lambdas, "p(λ | setups)")?;
            ldist.extend(pl);
            for l in 0..lambdas {
                let row = response(&s, l);
                check_row(&row, joint, "p(outcomes | setups, λ)")?;
                resp.extend(row);
            }
        }
        Ok(Self { setups, outcomes, lambdas, response: resp, lambda_dist: ldist })
    }

    /// Outcome of each site fixed by `outcome(site, own setup, λ)`, with
    /// `p(λ)` the same for every setup combination.
    pub fn deterministic<F>(setups: Vec<usize>, outcomes: Vec<usize>, lambda_dist: Vec<f64>, outcome: F) -> Result<Self>
    where
        F: Fn(usize, usize, usize) -> usize,
    {
        let outs = outcomes.clone();
        let lambdas = lambda_dist.len();
        Self::new(
            setups,
            outcomes,
            lambdas,
            |s, l| {
                let digits: Vec<usize> = s.iter().enumerate().map(|(site, &a)| outcome(site, a, l)).collect();
                let mut row = vec![0.0; outs.iter().product()];
                row[encode(&digits, &outs)] = 1.0;
                row
            },
            |_| lambda_dist.clone(),
        )
    }

    /// The biased interferometer viewed as a one-site theory: the photon
    /// measurement's setup is the ancilla value `b` (open/closed), `λ`
    /// ranges over (particle, wave), and realism fixes the particle-open
    /// and wave-closed conditionals. `p(λ)` is `(f, 1 − f)` for both setups.
    pub fn interferometer(phi: f64, f: f64, x: f64, y: f64) -> Result<Self> {
        let c2 = (phi / 2.0).cos().powi(2);
        Self::new(
            vec![2],
            vec![2],
            2,
            |s, l| {
                let p0 = match (s[0], l) {
                    (0, 0) => 0.5,
                    (0, _) => x,
                    (_, 0) => y,
                    _ => c2,
                };
                vec![p0, 1.0 - p0]
            },
            |_| vec![f, 1.0 - f],
        )
    }

    /// The conspiratorial adequate model (`v = 0`, `z = 1`, `f = cos²α`)
    /// with the ancilla bias promoted to a setting: one site whose setups are
    /// the given biases and whose outcomes are the pairs `(a, b)`
    /// (index `a + 2b`). `x` and `y` never carry weight in this model.
    pub fn conspiratorial(phi: f64, alphas: &[f64]) -> Result<Self> {
        let c2 = (phi / 2.0).cos().powi(2);
        let alphas = alphas.to_vec();
        Self::new(
            vec![alphas.len()],
            vec![4],
            2,
            |_, l| {
                if l == 0 {
                    // particle, always open
                    vec![0.5, 0.5, 0.0, 0.0]
                } else {
                    // wave, always closed
                    vec![0.0, 0.0, c2, 1.0 - c2]
                }
            },
            |s| {
                let open = alphas[s[0]].cos().powi(2);
                vec![open, 1.0 - open]
            },
        )
    }

    pub fn sites(&self) -> usize {
        self.setups.len()
    }

    pub fn setups(&self) -> &[usize] {
        &self.setups
    }

    pub fn lambdas(&self) -> usize {
        self.lambdas
    }

    fn combos(&self) -> usize {
        self.setups.iter().product()
    }

    fn joint_len(&self) -> usize {
        self.outcomes.iter().product()
    }

    fn response_row(&self, combo: usize, lambda: usize) -> &[f64] {
        let j = self.joint_len();
        let start = (combo * self.lambdas + lambda) * j;
        &self.response[start..start + j]
    }

    pub fn lambda_distribution(&self, combo: usize) -> &[f64] {
        &self.lambda_dist[combo * self.lambdas..(combo + 1) * self.lambdas]
    }

    /// `p(a_site | setups, λ)`.
    pub fn site_marginal(&self, combo: usize, lambda: usize, site: usize) -> Vec<f64> {
        let mut m = vec![0.0; self.outcomes[site]];
        for (k, p) in self.response_row(combo, lambda).iter().enumerate() {
            m[decode(k, &self.outcomes)[site]] += p;
        }
        m
    }

    /// For every site, setup `A` of that site and `λ`, some outcome has
    /// probability 1 in every setup combination containing `A`, i.e.
    /// `p(a | A, λ) = 1`.
    pub fn check_strong_determinism(&self) -> bool {
        (0..self.sites()).all(|site| {
            (0..self.setups[site]).all(|a_setup| {
                (0..self.lambdas).all(|l| {
                    let rows: Vec<Vec<f64>> = (0..self.combos())
                        .filter(|&c| decode(c, &self.setups)[site] == a_setup)
                        .map(|c| self.site_marginal(c, l, site))
                        .collect();
                    (0..self.outcomes[site]).any(|a| rows.iter().all(|r| (r[a] - 1.0).abs() <= EXACT_TOL))
                })
            })
        })
    }

    /// Each site's marginal depends only on its own setup and `λ`.
    pub fn check_parameter_independence(&self) -> Verdict {
        let others_vary = (0..self.sites())
            .any(|site| self.setups.iter().enumerate().any(|(s, &n)| s != site && n > 1));
        if !others_vary {
            return Verdict::Vacuous;
        }
        let combos = self.combos();
        for site in 0..self.sites() {
            for l in 0..self.lambdas {
                for c1 in 0..combos {
                    let own = decode(c1, &self.setups)[site];
                    let m1 = self.site_marginal(c1, l, site);
                    for c2 in (c1 + 1..combos).filter(|&c| decode(c, &self.setups)[site] == own) {
                        let m2 = self.site_marginal(c2, l, site);
                        if m1.iter().zip(&m2).any(|(a, b)| (a - b).abs() > EXACT_TOL) {
                            return Verdict::Fails;
                        }
                    }
                }
            }
        }
        Verdict::Holds
    }

    /// `p(λ | setups)` is the same for every setup combination.
    pub fn check_lambda_independence(&self) -> bool {
        let first = self.lambda_distribution(0);
        (1..self.combos()).all(|c| self.lambda_distribution(c).iter().zip(first).all(|(a, b)| (a - b).abs() <= EXACT_TOL))
    }

    /// The joint outcome distribution for the full assignment
    /// (`setups` for every site plus `λ`) is a point mass.
    pub fn check_weak_determinism(&self, setups: &[usize], lambda: usize) -> Result<bool> {
        if setups.len() != self.sites() {
            return Err(Error::IncompleteAssignment { expected: self.sites(), got: setups.len() });
        }
        if setups.iter().zip(&self.setups).any(|(s, n)| s >= n) || lambda >= self.lambdas {
            return Err(Error::InvalidTheory("assignment index out of range".into()));
        }
        let combo = encode(setups, &self.setups);
        Ok(self.response_row(combo, lambda).iter().any(|p| (p - 1.0).abs() <= EXACT_TOL))
    }

    /// Weak determinism for every full assignment.
    pub fn check_weak_determinism_everywhere(&self) -> bool {
        (0..self.combos()).all(|c| {
            let s = decode(c, &self.setups);
            (0..self.lambdas).all(|l| self.check_weak_determinism(&s, l).unwrap_or(false))
        })
    }
}

fn check_row(row: &[f64], len: usize, what: &str) -> Result<()> {
    if row.len() != len {
        return Err(Error::InvalidTheory(format!("{what}: expected {len} entries, got {}", row.len())));
    }
    if row.iter().any(|p| !p.is_finite() || *p < -EXACT_TOL) {
        return Err(Error::InvalidTheory(format!("{what}: negative or non-finite entry")));
    }
    let total: f64 = row.iter().sum();
    if (total - 1.0).abs() > EXACT_TOL {
        return Err(Error::InvalidTheory(format!("{what}: row sums to {total}")));
    }
    Ok(())
}
