//! Shared generators for the property suites: random symplectic circuits,
//! random physical states, and random directions.
#![allow(dead_code)]

use gaussent::circuit::{run_circuit, CircuitElement, GaussianCircuit};
use gaussent::symplectic::PhaseSpaceDirection;
use gaussent::CovarianceMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Random lossless circuit: a squeezer per mode followed by a few layers of
/// beam splitters and phase shifts.
pub fn random_lossless_circuit(n_modes: usize, rng: &mut ChaCha8Rng) -> GaussianCircuit {
    let mut elements = Vec::new();
    for m in 0..n_modes {
        let r = rng.random_range(0.0..1.0);
        if rng.random_bool(0.5) {
            elements.push(CircuitElement::SqueezeX { mode: m, r });
        } else {
            elements.push(CircuitElement::SqueezeP { mode: m, r });
        }
    }
    let layers = if n_modes > 1 { 2 * n_modes } else { 0 };
    for _ in 0..layers {
        let j = rng.random_range(0..n_modes);
        let mut k = rng.random_range(0..n_modes);
        while k == j {
            k = rng.random_range(0..n_modes);
        }
        elements.push(CircuitElement::BeamSplitter {
            modes: (j, k),
            t: rng.random_range(0.05..0.95),
        });
        elements.push(CircuitElement::PhaseShift {
            mode: rng.random_range(0..n_modes),
            phi: rng.random_range(0.0..std::f64::consts::TAU),
        });
    }
    GaussianCircuit::new(n_modes, elements).expect("valid random circuit")
}

/// Random physical state: a random symplectic applied to vacuum, optionally
/// followed by per-mode loss.
pub fn random_state(n_modes: usize, rng: &mut ChaCha8Rng, with_loss: bool) -> CovarianceMatrix {
    let mut circuit = random_lossless_circuit(n_modes, rng);
    if with_loss {
        for m in 0..n_modes {
            if rng.random_bool(0.7) {
                circuit.elements.push(CircuitElement::Loss {
                    mode: m,
                    eta: rng.random_range(0.3..1.0),
                });
            }
        }
    }
    run_circuit(&circuit).expect("random circuit runs")
}

pub fn random_unit_direction(dim: usize, rng: &mut ChaCha8Rng) -> PhaseSpaceDirection {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        if let Ok(d) = PhaseSpaceDirection::unit(v) {
            return d;
        }
    }
}
