//! Built-in problem gallery.
//!
//! * `example1` — linear weight `x - 1` on `[0, 3]`, constant marginal effect
//!   `2`, shift link `x + 2`. Every condition passes and both repair routes
//!   preserve `beta = 3` and mass `1.5`.
//! * `example2` — linear weight on `[0, 2]` with a piecewise cubic marginal
//!   effect and the cubic link `2 - x + 12x^2 - 12x^3`. The link is not
//!   injective and its image escapes the domain; the checker reports both
//!   with witnesses, plus the condition integrals as computed.
//! * `constant_effect` — normalized weight `(x - 1)/1.5` (total mass 1) with
//!   constant effect: the dominance route collapses to the uniform weight
//!   `1/leb(x_plus)` on the positive region.
//! * `gaussian` — tilted normal weight `(1 + z x) phi(x)` with symmetric
//!   effect `x^2` and reflection link `-x`; `z` defaults to 2 and is
//!   overridable. Dominance holds for `z > 0`.

use anyhow::{bail, Result};

use crate::problem::{parse_problem, ProblemSpec};

pub const GALLERY: [&str; 4] = ["example1", "example2", "constant_effect", "gaussian"];

pub fn fixture(name: &str) -> Result<ProblemSpec> {
    let text = match name {
        "example1" => {
            r#"{
  "domain": [0, 3],
  "omega": "x - 1",
  "g_prime": "2",
  "g": "2*x - 3",
  "link": "x + 2"
}"#
        }
        "example2" => {
            r#"{
  "domain": [0, 2],
  "omega": "x - 1",
  "g_prime": [
    {"interval": [0, 1], "expr": "2 - x + 12*x^2 - 12*x^3"},
    {"interval": [1, 2], "expr": "x"}
  ],
  "link": "2 - x + 12*x^2 - 12*x^3"
}"#
        }
        "constant_effect" => {
            r#"{
  "domain": [0, 3],
  "omega": "(x - 1)/1.5",
  "g_prime": "2"
}"#
        }
        "gaussian" => {
            r#"{
  "domain": ["-inf", "inf"],
  "omega": "(1 + z*x)*phi(x)",
  "g_prime": "x^2",
  "link": "-x",
  "params": {"z": 2}
}"#
        }
        other => bail!("unknown gallery fixture `{other}` (available: {})", GALLERY.join(", ")),
    };
    parse_problem(text)
}
