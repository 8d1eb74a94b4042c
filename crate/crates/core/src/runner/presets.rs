//! Named scenarios, one per figure.

use super::{parse_config, Scenario};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Preset {
    pub name: &'static str,
    /// Figure label the preset reproduces.
    pub figure: &'static str,
    pub description: &'static str,
    /// Scenario document in the `run` config format.
    pub config: &'static str,
}

impl Preset {
    pub fn scenario(&self) -> Result<Scenario> {
        parse_config(self.config)
    }
}

const PRESETS: &[Preset] = &[
    Preset {
        name: "fig-epsilon",
        figure: "fig_epsilon",
        description: "echo after 1.5 -> 0.5 for several couplings, N = 100, d = 1",
        config: "name = fig-epsilon
kind = epsilon-sweep
n = 100
lambda_i = 1.5
lambda_f = 0.5
d = 1
sweep = epsilon
values = 0.1, 0.5, 1, 2, 5, 10, 20
t_max = 10
dt = 0.01
",
    },
    Preset {
        name: "distance",
        figure: "fig_distance",
        description: "echo for d = 1, 5, 10 at weak and strong coupling, 1.5 -> 0.5, N = 100",
        config: "name = distance
kind = quench-protocol-grid
n = 100
lambda_i = 1.5
lambda_f = 0.5
series = epsilon
series_values = 0.1, 20
sweep = d
values = 1, 5, 10
t_max = 10
dt = 0.01
",
    },
    Preset {
        name: "echo",
        figure: "echo",
        description: "echo for a grid of quench protocols at eps = 0.1, N = 100, d = 1",
        config: "name = echo
kind = quench-protocol-grid
n = 100
epsilon = 0.1
d = 1
series = lambda_i
series_values = 0.5, 0.7, 1, 1.5, 1.9
sweep = lambda_f
values = 0.5, 0.7, 1, 1.5, 1.9
t_max = 20
dt = 0.05
",
    },
    Preset {
        name: "echo-sc",
        figure: "echo_sc",
        description: "echo for a grid of quench protocols at eps = 20, N = 100, d = 1",
        config: "name = echo-sc
kind = quench-protocol-grid
n = 100
epsilon = 20
d = 1
series = lambda_i
series_values = 0.5, 0.7, 1, 1.5, 1.9
sweep = lambda_f
values = 0.5, 0.7, 1, 1.5, 1.9
t_max = 10
dt = 0.02
",
    },
    Preset {
        name: "lambda",
        figure: "lambda",
        description: "echo at t = 10 against lambda_i (lambda_f fixed) and against lambda_f (L_swapped), with the polarized limit",
        config: "name = lambda
kind = lambda-scan-at-fixed-time
n = 100
epsilon = 0.1
d = 1
series = lambda_f
series_values = 0.5, 1.5
sweep = lambda_i
values = 0.05:3:0.05, 4, 6, 8, 10, 15, 20
times = 10
",
    },
    Preset {
        name: "der-lambda",
        figure: "der_lambda",
        description: "dL/dlambda_i at t = 10 for lambda_f = 0.5, 1.5; dL_swapped is the lambda_f derivative at lambda_i = 0.5, 1.5",
        config: "name = der-lambda
kind = derivative-scan
n = 100
epsilon = 0.1
d = 1
series = lambda_f
series_values = 0.5, 1.5
sweep = lambda_i
values = 0.2:2:0.01
times = 10
",
    },
    Preset {
        name: "der-lambda-size",
        figure: "der_lambda_size",
        description: "dL/dlambda_i at t = 10 near the critical field for N = 50 to 400",
        config: "name = der-lambda-size
kind = derivative-scan
lambda_f = 1.5
epsilon = 0.1
d = 1
series = n
series_values = 50, 100, 200, 400
sweep = lambda_i
values = 0.9:1.1:0.01
times = 10
",
    },
    Preset {
        name: "scaling",
        figure: "scaling",
        description: "peak position and height of dL/dlambda_i against N with power-law and log fits",
        config: "name = scaling
kind = size-scaling
lambda_f = 1.5
epsilon = 0.1
d = 1
series = n
series_values = 50, 100, 200, 400
sweep = lambda_i
values = 0.95:1.1:0.01
refine_width = 0.006
refine_step = 0.0005
times = 10
",
    },
    Preset {
        name: "short-time",
        figure: "short_time",
        description: "short-time echo from lambda_i = 0.7 for lambda_f = 0.5, 1, 1.5 at eps = 0.1 and 20",
        config: "name = short-time
kind = short-time
n = 100
lambda_i = 0.7
d = 1
series = epsilon
series_values = 0.1, 20
sweep = lambda_f
values = 0.5, 1, 1.5
t_max = 0.3
dt = 0.001
",
    },
    Preset {
        name: "parameter",
        figure: "parameter",
        description: "Gaussian rate against distance for lambda_i = 0.7, 1, 1.5 at lambda_f = 0.5, eps = 0.1",
        config: "name = parameter
kind = alpha-vs-distance
n = 100
lambda_f = 0.5
epsilon = 0.1
series = lambda_i
series_values = 0.7, 1, 1.5
sweep = d
values = 1:50:1
",
    },
    Preset {
        name: "revival",
        figure: "revival",
        description: "echo for d near N/2 after 1.5 -> 0.99, N = 100",
        config: "name = revival
kind = revival
n = 100
lambda_i = 1.5
lambda_f = 0.99
epsilon = 0.1
sweep = d
values = 50, 49, 48, 45, 35
t_max = 75
dt = 0.05
",
    },
    Preset {
        name: "revival-der",
        figure: "revival_der",
        description: "echo and dL/dt at d = 1 for lambda_i = 0.99, 0.9, 0.7 -> 0.99, N = 100",
        config: "name = revival-der
kind = revival
n = 100
lambda_f = 0.99
epsilon = 0.1
d = 1
sweep = lambda_i
values = 0.99, 0.9, 0.7
t_max = 75
dt = 0.05
",
    },
    Preset {
        name: "revival-crit",
        figure: "revival_crit",
        description: "echo and dL/dt from a critical chain, 1 -> 1.5, d near N/2, N = 100",
        config: "name = revival-crit
kind = revival
n = 100
lambda_i = 1
lambda_f = 1.5
epsilon = 0.1
sweep = d
values = 50, 49, 45, 35
t_max = 60
dt = 0.05
",
    },
    Preset {
        name: "ind",
        figure: "ind",
        description: "common-bath minus independent-bath echo for several lambda_i, lambda_f = 1.5, d = 10 and 20",
        config: "name = ind
kind = independence
n = 100
lambda_f = 1.5
epsilon = 0.1
series = d
series_values = 10, 20
sweep = lambda_i
values = 0.4, 0.5, 0.7, 0.8, 0.9, 0.95, 1
t_max = 8
dt = 0.05
",
    },
    Preset {
        name: "oracle-compare",
        figure: "none (validation)",
        description: "free fermions against dense evolution for 20 random protocols, N = 8",
        config: "name = oracle-compare
kind = oracle-compare
n = 8
cases = 20
seed = 1
t_max = 10
dt = 0.5
",
    },
];

pub fn presets() -> &'static [Preset] {
    PRESETS
}

pub fn preset(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::runner::ScenarioKind;

    #[test]
    fn every_preset_parses() {
        for p in presets() {
            let s = p.scenario().unwrap_or_else(|e| panic!("{}: {e}", p.name));
            assert_eq!(s.name, p.name);
        }
    }

    #[test]
    fn names_and_figures_are_unique() {
        let mut names: Vec<_> = presets().iter().map(|p| p.name).collect();
        let mut figures: Vec<_> = presets().iter().map(|p| p.figure).collect();
        names.sort();
        names.dedup();
        figures.sort();
        figures.dedup();
        assert_eq!(names.len(), presets().len());
        assert_eq!(figures.len(), presets().len());
    }

    #[test]
    fn fig_epsilon_protocol() {
        let s = preset("fig-epsilon").unwrap().scenario().unwrap();
        assert_eq!(s.kind, ScenarioKind::EpsilonSweep);
        assert_eq!((s.base.n, s.base.lambda_i, s.base.lambda_f, s.base.d), (100, 1.5, 0.5, 1));
        assert_eq!(s.sweep.unwrap().values, vec![0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0]);
        assert!(preset("no-such-figure").is_none());
    }
}
