//! Symplectic circuits on vacuum: squeezers, beam splitters, phase shifts,
//! and loss elements, folded as `Gamma -> S Gamma S^T` (or `X Gamma X^T + Y`
//! for loss).
//!
//! Element conventions (fixed by the requirement that the shipped recipes
//! reproduce the analytic state matrices exactly):
//! * `squeeze_x(r)`: `diag(e^-r, e^r)` on the mode block,
//! * `squeeze_p(r)`: `diag(e^r, e^-r)`,
//! * `beam_splitter(T)` on `(j, k)`: `[[sqrt(T) I2, sqrt(1-T) I2],
//!   [-sqrt(1-T) I2, sqrt(T) I2]]`,
//! * `phase_shift(phi)`: `[[cos, sin], [-sin, cos]]`,
//! * `loss(eta)`: `X = sqrt(eta) I2`, `Y = (1-eta)/2 I2` (not symplectic).
//!
//! The recipes for the standard states live under `recipes/` as JSON data,
//! with squeezer amplitudes stored as scale factors that are multiplied by
//! the requested `r`, so alternative conventions can be swapped in without
//! touching code.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::states::StateFamily;
use crate::symplectic::CovarianceMatrix;

/// One circuit element; mode indices are 0-based internally.
#[derive(Debug, Clone, PartialEq)]
pub enum CircuitElement {
    SqueezeX { mode: usize, r: f64 },
    SqueezeP { mode: usize, r: f64 },
    BeamSplitter { modes: (usize, usize), t: f64 },
    PhaseShift { mode: usize, phi: f64 },
    Loss { mode: usize, eta: f64 },
}

/// Wire format with 1-based mode indices, matching the JSON schema
/// `{"kind": "beam_splitter", "modes": [1, 2], "T": 0.2}`.
#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum ElementJson {
    SqueezeX { mode: usize, r: f64 },
    SqueezeP { mode: usize, r: f64 },
    BeamSplitter { modes: [usize; 2], #[serde(rename = "T")] t: f64 },
    PhaseShift { mode: usize, phi: f64 },
    Loss { mode: usize, eta: f64 },
}

#[derive(Debug, Serialize, Deserialize)]
struct CircuitJson {
    n_modes: usize,
    elements: Vec<ElementJson>,
}

fn wire_mode(mode: usize) -> Result<usize> {
    mode.checked_sub(1)
        .ok_or_else(|| Error::InvalidElement("mode indices are 1-based".to_string()))
}

impl CircuitElement {
    fn from_json(e: ElementJson) -> Result<Self> {
        Ok(match e {
            ElementJson::SqueezeX { mode, r } => CircuitElement::SqueezeX {
                mode: wire_mode(mode)?,
                r,
            },
            ElementJson::SqueezeP { mode, r } => CircuitElement::SqueezeP {
                mode: wire_mode(mode)?,
                r,
            },
            ElementJson::BeamSplitter { modes, t } => CircuitElement::BeamSplitter {
                modes: (wire_mode(modes[0])?, wire_mode(modes[1])?),
                t,
            },
            ElementJson::PhaseShift { mode, phi } => CircuitElement::PhaseShift {
                mode: wire_mode(mode)?,
                phi,
            },
            ElementJson::Loss { mode, eta } => CircuitElement::Loss {
                mode: wire_mode(mode)?,
                eta,
            },
        })
    }

    fn to_json(&self) -> ElementJson {
        match *self {
            CircuitElement::SqueezeX { mode, r } => ElementJson::SqueezeX { mode: mode + 1, r },
            CircuitElement::SqueezeP { mode, r } => ElementJson::SqueezeP { mode: mode + 1, r },
            CircuitElement::BeamSplitter { modes, t } => ElementJson::BeamSplitter {
                modes: [modes.0 + 1, modes.1 + 1],
                t,
            },
            CircuitElement::PhaseShift { mode, phi } => {
                ElementJson::PhaseShift { mode: mode + 1, phi }
            }
            CircuitElement::Loss { mode, eta } => ElementJson::Loss { mode: mode + 1, eta },
        }
    }

    fn validate(&self, n_modes: usize) -> Result<()> {
        let check_mode = |m: usize| {
            if m >= n_modes {
                Err(Error::InvalidElement(format!(
                    "mode {} out of range for {} modes",
                    m + 1,
                    n_modes
                )))
            } else {
                Ok(())
            }
        };
        match *self {
            CircuitElement::SqueezeX { mode, r } | CircuitElement::SqueezeP { mode, r } => {
                check_mode(mode)?;
                if !r.is_finite() {
                    return Err(Error::InvalidElement(format!("non-finite squeezing {r}")));
                }
            }
            CircuitElement::BeamSplitter { modes: (j, k), t } => {
                check_mode(j)?;
                check_mode(k)?;
                if j == k {
                    return Err(Error::InvalidElement(
                        "beam splitter needs two distinct modes".to_string(),
                    ));
                }
                if !(0.0..=1.0).contains(&t) {
                    return Err(Error::InvalidElement(format!(
                        "transmissivity {t} outside [0, 1]"
                    )));
                }
            }
            CircuitElement::PhaseShift { mode, phi } => {
                check_mode(mode)?;
                if !phi.is_finite() {
                    return Err(Error::InvalidElement(format!("non-finite angle {phi}")));
                }
            }
            CircuitElement::Loss { mode, eta } => {
                check_mode(mode)?;
                if !(0.0..=1.0).contains(&eta) {
                    return Err(Error::InvalidElement(format!(
                        "efficiency {eta} outside [0, 1]"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// How an element acts on a covariance matrix.
#[derive(Debug, Clone)]
pub enum ElementAction {
    /// `Gamma -> S Gamma S^T` with `S Omega S^T = Omega`.
    Symplectic(DMatrix<f64>),
    /// `Gamma -> X Gamma X^T + Y`; not symplectic.
    LossChannel { x: DMatrix<f64>, y: DMatrix<f64> },
}

/// The phase-space action of a single element on an N-mode system.
pub fn element_symplectic(element: &CircuitElement, n_modes: usize) -> Result<ElementAction> {
    element.validate(n_modes)?;
    let dim = 2 * n_modes;
    let mut s = DMatrix::identity(dim, dim);
    match *element {
        CircuitElement::SqueezeX { mode, r } => {
            s[(2 * mode, 2 * mode)] = (-r).exp();
            s[(2 * mode + 1, 2 * mode + 1)] = r.exp();
        }
        CircuitElement::SqueezeP { mode, r } => {
            s[(2 * mode, 2 * mode)] = r.exp();
            s[(2 * mode + 1, 2 * mode + 1)] = (-r).exp();
        }
        CircuitElement::BeamSplitter { modes: (j, k), t } => {
            let tt = t.sqrt();
            let rr = (1.0 - t).sqrt();
            for q in 0..2 {
                let a = 2 * j + q;
                let b = 2 * k + q;
                s[(a, a)] = tt;
                s[(a, b)] = rr;
                s[(b, a)] = -rr;
                s[(b, b)] = tt;
            }
        }
        CircuitElement::PhaseShift { mode, phi } => {
            let (sin, cos) = phi.sin_cos();
            s[(2 * mode, 2 * mode)] = cos;
            s[(2 * mode, 2 * mode + 1)] = sin;
            s[(2 * mode + 1, 2 * mode)] = -sin;
            s[(2 * mode + 1, 2 * mode + 1)] = cos;
        }
        CircuitElement::Loss { mode, eta } => {
            let mut x = DMatrix::identity(dim, dim);
            let mut y = DMatrix::zeros(dim, dim);
            for q in 0..2 {
                x[(2 * mode + q, 2 * mode + q)] = eta.sqrt();
                y[(2 * mode + q, 2 * mode + q)] = (1.0 - eta) / 2.0;
            }
            return Ok(ElementAction::LossChannel { x, y });
        }
    }
    Ok(ElementAction::Symplectic(s))
}

/// Ordered list of elements applied to the N-mode vacuum.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianCircuit {
    pub n_modes: usize,
    pub elements: Vec<CircuitElement>,
}

impl GaussianCircuit {
    pub fn new(n_modes: usize, elements: Vec<CircuitElement>) -> Result<Self> {
        for e in &elements {
            e.validate(n_modes)?;
        }
        Ok(Self { n_modes, elements })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: CircuitJson =
            serde_json::from_str(text).map_err(|e| Error::InvalidElement(e.to_string()))?;
        let elements: Result<Vec<CircuitElement>> = doc
            .elements
            .into_iter()
            .map(CircuitElement::from_json)
            .collect();
        Self::new(doc.n_modes, elements?)
    }

    pub fn to_json(&self) -> String {
        let doc = CircuitJson {
            n_modes: self.n_modes,
            elements: self.elements.iter().map(CircuitElement::to_json).collect(),
        };
        serde_json::to_string_pretty(&doc).expect("circuit serialization cannot fail")
    }

    /// True when no element is a loss channel.
    pub fn is_lossless(&self) -> bool {
        !self
            .elements
            .iter()
            .any(|e| matches!(e, CircuitElement::Loss { .. }))
    }
}

/// Fold the circuit over the vacuum state.
pub fn run_circuit(circuit: &GaussianCircuit) -> Result<CovarianceMatrix> {
    let mut gamma = CovarianceMatrix::vacuum(circuit.n_modes);
    for element in &circuit.elements {
        gamma = match element_symplectic(element, circuit.n_modes)? {
            ElementAction::Symplectic(s) => gamma.congruence(&s)?,
            ElementAction::LossChannel { x, y } => {
                let m = &x * gamma.matrix() * x.transpose() + y;
                CovarianceMatrix::new(circuit.n_modes, m)?
            }
        };
    }
    Ok(gamma)
}

const RECIPE_EPR: &str = include_str!("../recipes/two_mode_epr.json");
const RECIPE_GHZ3: &str = include_str!("../recipes/ghz3.json");
const RECIPE_CLUSTER4: &str = include_str!("../recipes/cluster4.json");

/// Preparation recipe for a state family at squeezing `r`. Squeezer
/// amplitudes in the recipe files are scale factors multiplied by `r`.
pub fn recipe(family: StateFamily, r: f64) -> Result<GaussianCircuit> {
    let text = match family {
        StateFamily::TwoModeEpr => RECIPE_EPR,
        StateFamily::Ghz3 => RECIPE_GHZ3,
        StateFamily::Cluster4 => RECIPE_CLUSTER4,
        StateFamily::VacuumMixedEpr => {
            return Err(Error::InvalidElement(
                "the vacuum-mixed family is not circuit-preparable".to_string(),
            ))
        }
    };
    let mut circuit = GaussianCircuit::from_json(text)?;
    for element in &mut circuit.elements {
        match element {
            CircuitElement::SqueezeX { r: scale, .. } | CircuitElement::SqueezeP { r: scale, .. } => {
                *scale *= r;
            }
            _ => {}
        }
    }
    Ok(circuit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::symplectic_form;

    #[test]
    fn beam_splitter_full_transmission_is_identity() {
        let e = CircuitElement::BeamSplitter {
            modes: (0, 1),
            t: 1.0,
        };
        match element_symplectic(&e, 2).unwrap() {
            ElementAction::Symplectic(s) => {
                assert_eq!(s, DMatrix::identity(4, 4));
            }
            _ => panic!("expected symplectic"),
        }
    }

    #[test]
    fn squeeze_x_on_vacuum() {
        let r: f64 = 0.42;
        let c = GaussianCircuit::new(1, vec![CircuitElement::SqueezeX { mode: 0, r }]).unwrap();
        let g = run_circuit(&c).unwrap();
        assert!((g.matrix()[(0, 0)] - 0.5 * (-2.0 * r).exp()).abs() < 1e-15);
        assert!((g.matrix()[(1, 1)] - 0.5 * (2.0 * r).exp()).abs() < 1e-15);
    }

    #[test]
    fn balanced_splitter_preserves_vacuum() {
        let c = GaussianCircuit::new(
            2,
            vec![CircuitElement::BeamSplitter {
                modes: (0, 1),
                t: 0.5,
            }],
        )
        .unwrap();
        let g = run_circuit(&c).unwrap();
        assert!((g.matrix() - CovarianceMatrix::vacuum(2).matrix()).abs().max() < 1e-15);
    }

    #[test]
    fn empty_circuit_is_vacuum() {
        let c = GaussianCircuit::new(3, vec![]).unwrap();
        let g = run_circuit(&c).unwrap();
        assert_eq!(g.matrix(), CovarianceMatrix::vacuum(3).matrix());
    }

    #[test]
    fn non_loss_elements_are_symplectic() {
        let elements = vec![
            CircuitElement::SqueezeX { mode: 0, r: 0.7 },
            CircuitElement::SqueezeP { mode: 1, r: 1.1 },
            CircuitElement::BeamSplitter {
                modes: (0, 2),
                t: 0.2,
            },
            CircuitElement::PhaseShift {
                mode: 2,
                phi: 0.613,
            },
        ];
        let omega = symplectic_form(3);
        for e in &elements {
            match element_symplectic(e, 3).unwrap() {
                ElementAction::Symplectic(s) => {
                    let err = (&s * &omega * s.transpose() - &omega).abs().max();
                    assert!(err < 1e-12, "{e:?}: {err}");
                }
                _ => panic!("expected symplectic"),
            }
        }
    }

    #[test]
    fn element_validation() {
        assert!(element_symplectic(
            &CircuitElement::BeamSplitter {
                modes: (0, 0),
                t: 0.5
            },
            2
        )
        .is_err());
        assert!(element_symplectic(
            &CircuitElement::BeamSplitter {
                modes: (0, 1),
                t: 1.5
            },
            2
        )
        .is_err());
        assert!(element_symplectic(&CircuitElement::Loss { mode: 5, eta: 0.5 }, 2).is_err());
    }

    #[test]
    fn json_round_trip_preserves_circuit() {
        let c = recipe(StateFamily::Cluster4, 0.37).unwrap();
        let back = GaussianCircuit::from_json(&c.to_json()).unwrap();
        assert_eq!(c, back);
    }

    #[test]
    fn json_mode_indices_are_one_based() {
        let text = r#"{"n_modes":2,"elements":[{"kind":"squeeze_x","mode":2,"r":0.1}]}"#;
        let c = GaussianCircuit::from_json(text).unwrap();
        assert_eq!(
            c.elements[0],
            CircuitElement::SqueezeX { mode: 1, r: 0.1 }
        );
        let bad = r#"{"n_modes":2,"elements":[{"kind":"squeeze_x","mode":0,"r":0.1}]}"#;
        assert!(GaussianCircuit::from_json(bad).is_err());
    }

    #[test]
    fn trailing_loss_equals_loss_channel() {
        let r = 0.5;
        let mut c = recipe(StateFamily::Ghz3, r).unwrap();
        c.elements.push(CircuitElement::Loss { mode: 0, eta: 0.6 });
        let with_loss = run_circuit(&c).unwrap();
        let lossless = run_circuit(&recipe(StateFamily::Ghz3, r).unwrap()).unwrap();
        let channel = crate::states::apply_loss(&lossless, &[0.6, 1.0, 1.0]).unwrap();
        assert!((with_loss.matrix() - channel.matrix()).abs().max() < 1e-12);
    }
}
