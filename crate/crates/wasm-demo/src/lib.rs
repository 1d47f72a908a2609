//! wasm-bindgen entry points for the static page in `www/`.
//!
//! Each exported function has a plain-Rust twin (`*_impl`) so the logic can be
//! tested natively without a JavaScript host.

use sedonet::adam::AdamConfig;
use sedonet::diagnostics::{gram_diagnostic, superset_demo, Sampling, SupersetBudget};
use sedonet::embedding::{cheb_eval_all, Interval, SpectralDictionary};
use sedonet::{Error, Result};
use wasm_bindgen::prelude::*;

/// Largest sizes the page may request; keeps the UI responsive.
pub const MAX_MODES: usize = 64;
pub const MAX_POINTS: usize = 1024;
pub const MAX_STEPS: usize = 20_000;

fn js(e: Error) -> JsError {
    JsError::new(&e.to_string())
}

fn limit(name: &str, v: usize, max: usize) -> Result<()> {
    if v == 0 || v > max {
        return Err(Error::Config(format!("{name} must be in 1..={max}, got {v}")));
    }
    Ok(())
}

/// `T_0 .. T_{modes-1}` sampled at `points` equispaced `ξ ∈ [-1, 1]`,
/// one curve after another.
pub fn chebyshev_curves_impl(modes: usize, points: usize) -> Result<Vec<f64>> {
    limit("modes", modes, MAX_MODES)?;
    limit("points", points, MAX_POINTS)?;
    if points < 2 {
        return Err(Error::Config("need at least 2 points".into()));
    }
    let mut out = vec![0.0; modes * points];
    for j in 0..points {
        let xi = -1.0 + 2.0 * j as f64 / (points - 1) as f64;
        for (n, v) in cheb_eval_all(xi, modes)?.into_iter().enumerate() {
            out[n * points + j] = v;
        }
    }
    Ok(out)
}

fn parse_sampling(s: &str) -> Result<Sampling> {
    match s {
        "uniform" => Ok(Sampling::UniformGrid),
        "gauss" => Ok(Sampling::ChebGauss),
        "lobatto" => Ok(Sampling::ChebGaussLobatto),
        _ => Err(Error::Config(format!("unknown sampling '{s}'"))),
    }
}

/// Gram matrix of the first `modes` Chebyshev polynomials on `[0, 1]`.
#[wasm_bindgen]
pub struct GramView {
    dim: usize,
    condition_number: f64,
    max_offdiag_ratio: f64,
    matrix: Vec<f64>,
}

#[wasm_bindgen]
impl GramView {
    #[wasm_bindgen(getter)]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[wasm_bindgen(getter)]
    pub fn condition_number(&self) -> f64 {
        self.condition_number
    }

    #[wasm_bindgen(getter)]
    pub fn max_offdiag_ratio(&self) -> f64 {
        self.max_offdiag_ratio
    }

    /// Row-major `dim x dim` entries.
    #[wasm_bindgen(getter)]
    pub fn matrix(&self) -> Vec<f64> {
        self.matrix.clone()
    }
}

pub fn gram_impl(modes: usize, points: usize, sampling: &str) -> Result<GramView> {
    limit("modes", modes, MAX_MODES)?;
    limit("points", points, MAX_POINTS)?;
    let dict = SpectralDictionary::chebyshev(modes, 1, Interval::UNIT, Interval::UNIT)?;
    let r = gram_diagnostic(&dict, parse_sampling(sampling)?, points, 1)?;
    Ok(GramView {
        dim: r.gram.rows,
        condition_number: r.condition_number,
        max_offdiag_ratio: r.max_offdiag_ratio,
        matrix: r.gram.data,
    })
}

/// `[chebyshev_mse, mlp_mse]` for target `T_degree` and a `[1, width, width, 1]` MLP.
pub fn superset_impl(degree: usize, width: usize, steps: usize, lr: f64, seed: u32) -> Result<Vec<f64>> {
    limit("degree", degree + 1, MAX_MODES)?;
    limit("width", width, 256)?;
    limit("steps", steps, MAX_STEPS)?;
    let budget = SupersetBudget {
        steps,
        adam: AdamConfig { lr, ..AdamConfig::default() },
        seed: seed.into(),
        ..SupersetBudget::default()
    };
    let r = superset_demo(degree, &[1, width, width, 1], &budget)?;
    Ok(vec![r.cheb_linear_mse, r.vanilla_mlp_mse])
}

#[wasm_bindgen]
pub fn chebyshev_curves(modes: usize, points: usize) -> std::result::Result<Vec<f64>, JsError> {
    chebyshev_curves_impl(modes, points).map_err(js)
}

#[wasm_bindgen]
pub fn gram(modes: usize, points: usize, sampling: &str) -> std::result::Result<GramView, JsError> {
    gram_impl(modes, points, sampling).map_err(js)
}

#[wasm_bindgen]
pub fn superset(degree: usize, width: usize, steps: usize, lr: f64, seed: u32) -> std::result::Result<Vec<f64>, JsError> {
    superset_impl(degree, width, steps, lr, seed).map_err(js)
}
