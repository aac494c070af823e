//! `params`: theorem sizing and complexity expressions.

use o2nc_core::analysis::{
    complexity_tables, theorem1_params, theorem2_params, ComplexityInputs, Flavor,
};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::summary::TheoremEcho;

#[derive(Debug, Clone, PartialEq)]
pub struct ParamsRequest {
    pub epsilon: f64,
    pub lambda: f64,
    pub c: f64,
    pub delta: f64,
    pub dim: usize,
    pub flavor: Flavor,
    /// Per-coordinate `G_i`; empty means `C/√d` on every coordinate.
    pub lipschitz: Vec<f64>,
    /// Per-coordinate `σ_i`; empty means zero.
    pub noise: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityEcho {
    pub dim: usize,
    pub combined_l2: f64,
    pub combined_l1: f64,
    pub combined_vec_l2: f64,
    pub global: f64,
    pub coordinate: f64,
    pub coordinate_l1_rate: f64,
    pub global_l1_rate: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsReport {
    pub flavor: String,
    pub params: TheoremEcho,
    pub complexity: ComplexityEcho,
}

impl ParamsReport {
    pub fn lines(&self) -> String {
        let p = &self.params;
        let c = &self.complexity;
        format!(
            "flavor = {}\nbeta = {}\nradius = {}\nhorizon = {}\n\
             complexity.global = {}\ncomplexity.coordinate = {}\n\
             complexity.coordinate_l1_rate = {}\ncomplexity.global_l1_rate = {}\n\
             complexity.ratio = {}\n",
            self.flavor,
            p.beta,
            p.radius,
            p.horizon,
            c.global,
            c.coordinate,
            c.coordinate_l1_rate,
            c.global_l1_rate,
            c.ratio
        )
    }
}

fn broadcast(name: &str, v: &[f64], dim: usize, default: f64) -> Result<Vec<f64>> {
    match v.len() {
        0 => Ok(vec![default; dim]),
        1 => Ok(vec![v[0]; dim]),
        n if n == dim => Ok(v.to_vec()),
        n => Err(LabError::config(format!("{name} has {n} entries, expected 1 or {dim}"))),
    }
}

pub fn cmd_params(req: &ParamsRequest) -> Result<ParamsReport> {
    if req.dim == 0 {
        return Err(LabError::config("dim must be positive"));
    }
    let params = match req.flavor {
        Flavor::L2 => theorem1_params(req.epsilon, req.lambda, req.c, req.delta)?,
        Flavor::L1 => theorem2_params(req.epsilon, req.lambda, req.c, req.delta, req.dim)?,
    };
    let lipschitz = broadcast("lipschitz", &req.lipschitz, req.dim, req.c / (req.dim as f64).sqrt())?;
    let noise = broadcast("noise", &req.noise, req.dim, 0.0)?;
    let l2 = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let t = complexity_tables(&ComplexityInputs {
        lipschitz: l2(&lipschitz),
        noise: l2(&noise),
        delta_bound: req.delta,
        lambda: req.lambda,
        epsilon: req.epsilon,
        lipschitz_vec: &lipschitz,
        noise_vec: &noise,
    })?;
    Ok(ParamsReport {
        flavor: req.flavor.name().to_string(),
        params: TheoremEcho::from(&params),
        complexity: ComplexityEcho {
            dim: t.dim,
            combined_l2: t.combined_l2,
            combined_l1: t.combined_l1,
            combined_vec_l2: t.combined_vec_l2,
            global: t.global,
            coordinate: t.coordinate,
            coordinate_l1_rate: t.coordinate_l1_rate,
            global_l1_rate: t.global_l1_rate,
            ratio: t.ratio,
        },
    })
}
