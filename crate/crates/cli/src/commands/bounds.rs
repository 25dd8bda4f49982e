use std::fmt::Write as _;
use std::str::FromStr;

use rjm_core::bounds::{bound_for, compare_losses_bound, BoundInputs, DEFAULT_C, DEFAULT_DELTA};
use rjm_core::losses::{loss_profile, CrossEntropy, ReducedJm, DEFAULT_CLAMP_EPS};
use rjm_core::optimizers::OptimizerKind;
use serde::Deserialize;

use super::{out_dir, write_text};
use crate::args::{BoundsArgs, GlobalArgs};
use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OptimizerSelection {
    One(OptimizerKind),
    All,
}

impl OptimizerSelection {
    pub fn kinds(self) -> Vec<OptimizerKind> {
        match self {
            OptimizerSelection::One(k) => vec![k],
            OptimizerSelection::All => vec![
                OptimizerKind::Sgd,
                OptimizerKind::Adam,
                OptimizerKind::Adamw,
            ],
        }
    }
}

impl FromStr for OptimizerSelection {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("all") {
            Ok(OptimizerSelection::All)
        } else {
            s.parse().map(OptimizerSelection::One)
        }
    }
}

/// Input grid for `bounds`; every field is a list and rows are the Cartesian
/// product. SGD rates are constant over the `steps` updates and AdamW
/// multipliers are all one.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundsGrid {
    pub optimizer: String,
    pub gamma: Vec<f64>,
    pub max_loss: Vec<f64>,
    pub eta: Vec<f64>,
    pub steps: Vec<usize>,
    pub n: Vec<usize>,
    pub batch: Vec<usize>,
    pub delta: Vec<f64>,
    pub c: Vec<f64>,
    pub lambda: Vec<f64>,
    pub theta_sup: Vec<f64>,
    pub compare_losses: bool,
    pub clamp_eps: f64,
    pub classes: usize,
}

impl Default for BoundsGrid {
    fn default() -> Self {
        BoundsGrid {
            optimizer: "adam".into(),
            gamma: vec![1.0],
            max_loss: vec![1.0],
            eta: vec![1e-3],
            steps: vec![100],
            n: vec![1000],
            batch: vec![32],
            delta: vec![DEFAULT_DELTA],
            c: vec![DEFAULT_C],
            lambda: vec![0.0],
            theta_sup: vec![0.0],
            compare_losses: false,
            clamp_eps: DEFAULT_CLAMP_EPS,
            classes: 3,
        }
    }
}

impl BoundsGrid {
    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::config(format!("bounds config: {e}")))
    }

    fn apply(&mut self, a: &BoundsArgs) {
        macro_rules! take {
            ($($f:ident),*) => {$( if let Some(v) = &a.$f { self.$f = v.clone(); } )*};
        }
        take!(optimizer, gamma, max_loss, eta, steps, n, batch, delta, c, lambda, theta_sup);
        if a.compare_losses {
            self.compare_losses = true;
        }
        if let Some(v) = a.clamp_eps {
            self.clamp_eps = v;
        }
        if let Some(v) = a.classes {
            self.classes = v;
        }
    }

    pub fn selection(&self) -> Result<OptimizerSelection, CliError> {
        self.optimizer
            .parse()
            .map_err(|e: String| CliError::config(e))
    }

    /// Every input tuple, in row order.
    pub fn tuples(&self) -> Result<Vec<(OptimizerKind, BoundInputs<f64>)>, CliError> {
        let lists = [
            ("gamma", self.gamma.len()),
            ("max_loss", self.max_loss.len()),
            ("eta", self.eta.len()),
            ("steps", self.steps.len()),
            ("n", self.n.len()),
            ("batch", self.batch.len()),
            ("delta", self.delta.len()),
            ("c", self.c.len()),
            ("lambda", self.lambda.len()),
            ("theta_sup", self.theta_sup.len()),
        ];
        if let Some((name, _)) = lists.iter().find(|(_, len)| *len == 0) {
            return Err(CliError::config(format!("bounds grid: '{name}' is empty")));
        }
        let mut out = Vec::new();
        for kind in self.selection()?.kinds() {
            for &gamma in &self.gamma {
                for &max_loss in &self.max_loss {
                    for &eta in &self.eta {
                        for &steps in &self.steps {
                            for &n in &self.n {
                                for &batch in &self.batch {
                                    for &delta in &self.delta {
                                        for &c in &self.c {
                                            for &lambda in &self.lambda {
                                                for &theta_sup in &self.theta_sup {
                                                    let mut inputs = BoundInputs::new(
                                                        gamma, max_loss, eta, steps, n, batch,
                                                    );
                                                    inputs.delta = delta;
                                                    inputs.c = c;
                                                    inputs.lambda = lambda;
                                                    inputs.theta_sup = theta_sup;
                                                    if kind == OptimizerKind::Sgd {
                                                        inputs = inputs.with_constant_eta_steps();
                                                    }
                                                    out.push((kind, inputs));
                                                }
                                            }
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

pub const BOUNDS_CSV_HEADER: &str =
    "optimizer,gamma,max_loss,eta,steps,n,batch,delta,c,lambda,theta_sup,beta,rho,ge_bound,vacuous";

pub(crate) fn bounds(g: &GlobalArgs, a: &BoundsArgs) -> Result<(), CliError> {
    let mut grid = match &g.config {
        Some(p) => BoundsGrid::load(p)?,
        None => BoundsGrid::default(),
    };
    grid.apply(a);
    let tuples = grid.tuples()?;
    let profiles = if grid.compare_losses {
        Some((
            loss_profile(&CrossEntropy, grid.clamp_eps, grid.classes)?,
            loss_profile(&ReducedJm, grid.clamp_eps, grid.classes)?,
        ))
    } else {
        None
    };

    let mut csv = String::from(BOUNDS_CSV_HEADER);
    if profiles.is_some() {
        csv.push_str(
            ",ce_gamma,ce_max_loss,ce_ge_bound,rjm_gamma,rjm_max_loss,rjm_ge_bound,rjm_smaller",
        );
    }
    csv.push('\n');
    for (kind, inputs) in &tuples {
        let r = bound_for(*kind, inputs)?;
        write!(
            csv,
            "{kind},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            inputs.gamma,
            inputs.max_loss,
            inputs.eta,
            inputs.steps,
            inputs.n,
            inputs.batch,
            inputs.delta,
            inputs.c,
            inputs.lambda,
            inputs.theta_sup,
            r.beta,
            r.rho,
            r.ge_bound,
            r.vacuous
        )
        .expect("write to string");
        if let Some((ce, rjm)) = &profiles {
            let cmp = compare_losses_bound(ce, rjm, inputs, *kind)?;
            write!(
                csv,
                ",{},{},{},{},{},{},{}",
                ce.gamma,
                ce.max_value,
                cmp.ce.ge_bound,
                rjm.gamma,
                rjm.max_value,
                cmp.rjm.ge_bound,
                cmp.rjm_smaller()
            )
            .expect("write to string");
        }
        csv.push('\n');
    }
    let path = out_dir(g).join("bounds.csv");
    write_text(&path, &csv)?;
    if !g.quiet {
        if tuples.len() == 1 {
            print!("{}", csv);
        }
        println!("wrote {} rows to {}", tuples.len(), path.display());
    }
    Ok(())
}
