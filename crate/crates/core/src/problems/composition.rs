//! Composition functions CF1-CF4 of the CEC2013 niching suite.
//!
//! A composition blends several shifted, stretched and rotated basic
//! functions with Gaussian weights centred on each shift vector. Shift
//! vectors and rotation matrices are external data; see [`crate::problems::data`].

use std::f64::consts::PI;

/// Height constant shared by all compositions.
const HEIGHT: f64 = 2000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasicFunction {
    Sphere,
    Griewank,
    Rastrigin,
    Weierstrass,
    ExpandedGriewankRosenbrock,
}

impl BasicFunction {
    pub fn eval(self, z: &[f64]) -> f64 {
        match self {
            BasicFunction::Sphere => z.iter().map(|v| v * v).sum(),
            BasicFunction::Griewank => {
                let sum: f64 = z.iter().map(|v| v * v).sum::<f64>() / 4000.0;
                let prod: f64 = z
                    .iter()
                    .enumerate()
                    .map(|(i, v)| (v / ((i + 1) as f64).sqrt()).cos())
                    .product();
                sum - prod + 1.0
            }
            BasicFunction::Rastrigin => z
                .iter()
                .map(|v| v * v - 10.0 * (2.0 * PI * v).cos() + 10.0)
                .sum(),
            BasicFunction::Weierstrass => weierstrass(z),
            BasicFunction::ExpandedGriewankRosenbrock => {
                let d = z.len();
                (0..d)
                    .map(|i| griewank_rosenbrock(z[i] + 1.0, z[(i + 1) % d] + 1.0))
                    .sum()
            }
        }
    }
}

fn weierstrass(z: &[f64]) -> f64 {
    const ALPHA: f64 = 0.5;
    const BETA: f64 = 3.0;
    const K_MAX: i32 = 20;
    let term = |v: f64| -> f64 {
        (0..=K_MAX)
            .map(|k| ALPHA.powi(k) * (2.0 * PI * BETA.powi(k) * (v + 0.5)).cos())
            .sum()
    };
    let offset = z.len() as f64 * term(0.0);
    z.iter().map(|&v| term(v)).sum::<f64>() - offset
}

fn griewank_rosenbrock(a: f64, b: f64) -> f64 {
    let r = 100.0 * (a * a - b).powi(2) + (1.0 - a).powi(2);
    1.0 + r * r / 4000.0 - r.cos()
}

/// The four composition families, in suite order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompositionKind {
    Cf1,
    Cf2,
    Cf3,
    Cf4,
}

struct Recipe {
    functions: &'static [BasicFunction],
    sigma: &'static [f64],
    lambda: &'static [f64],
    rotated: bool,
}

impl CompositionKind {
    fn recipe(self) -> Recipe {
        use BasicFunction::*;
        match self {
            CompositionKind::Cf1 => Recipe {
                functions: &[Griewank, Griewank, Weierstrass, Weierstrass, Sphere, Sphere],
                sigma: &[1.0; 6],
                lambda: &[1.0, 1.0, 8.0, 8.0, 1.0 / 5.0, 1.0 / 5.0],
                rotated: false,
            },
            CompositionKind::Cf2 => Recipe {
                functions: &[
                    Rastrigin, Rastrigin, Weierstrass, Weierstrass, Griewank, Griewank, Sphere,
                    Sphere,
                ],
                sigma: &[1.0; 8],
                lambda: &[1.0, 1.0, 10.0, 10.0, 1.0 / 10.0, 1.0 / 10.0, 1.0 / 7.0, 1.0 / 7.0],
                rotated: false,
            },
            CompositionKind::Cf3 => Recipe {
                functions: &[
                    ExpandedGriewankRosenbrock,
                    ExpandedGriewankRosenbrock,
                    Weierstrass,
                    Weierstrass,
                    Griewank,
                    Griewank,
                ],
                sigma: &[1.0, 1.0, 2.0, 2.0, 2.0, 2.0],
                lambda: &[1.0 / 4.0, 1.0 / 10.0, 2.0, 1.0, 2.0, 5.0],
                rotated: true,
            },
            CompositionKind::Cf4 => Recipe {
                functions: &[
                    Rastrigin,
                    Rastrigin,
                    ExpandedGriewankRosenbrock,
                    ExpandedGriewankRosenbrock,
                    Weierstrass,
                    Weierstrass,
                    Griewank,
                    Griewank,
                ],
                sigma: &[1.0, 1.0, 1.0, 1.0, 1.0, 2.0, 2.0, 2.0],
                lambda: &[4.0, 1.0, 4.0, 1.0, 1.0 / 10.0, 1.0 / 5.0, 1.0 / 10.0, 1.0 / 40.0],
                rotated: true,
            },
        }
    }

    pub fn n_components(self) -> usize {
        self.recipe().functions.len()
    }

    /// Whether the family uses per-component rotation matrices. CF1 and CF2
    /// use the identity.
    pub fn is_rotated(self) -> bool {
        self.recipe().rotated
    }
}

#[derive(Debug, Clone)]
struct Component {
    function: BasicFunction,
    sigma: f64,
    lambda: f64,
    shift: Vec<f64>,
    /// Row-major d x d matrix applied as `z = ((x - o) / lambda) * M`.
    rotation: Vec<f64>,
    /// Normalizer: the basic function's value at the corner point `5 * 1`.
    f_max: f64,
}

/// A fully instantiated composition function.
#[derive(Debug, Clone)]
pub struct CompositionFunction {
    kind: CompositionKind,
    dim: usize,
    components: Vec<Component>,
}

impl CompositionFunction {
    /// Builds the composition from one shift vector per component and,
    /// for rotated families, one row-major `d x d` matrix per component.
    /// `rotations = None` means identity matrices.
    pub fn new(
        kind: CompositionKind,
        shifts: Vec<Vec<f64>>,
        rotations: Option<Vec<Vec<f64>>>,
    ) -> Result<Self, String> {
        let recipe = kind.recipe();
        let n = recipe.functions.len();
        if shifts.len() != n {
            return Err(format!("expected {n} shift vectors, got {}", shifts.len()));
        }
        let dim = shifts[0].len();
        if dim == 0 || shifts.iter().any(|s| s.len() != dim) {
            return Err("shift vectors must share a non-zero dimension".into());
        }
        let rotations = match rotations {
            Some(r) => {
                if r.len() != n || r.iter().any(|m| m.len() != dim * dim) {
                    return Err(format!("expected {n} rotation matrices of size {dim}x{dim}"));
                }
                r
            }
            None => vec![identity(dim); n],
        };
        let components: Vec<Component> = (0..n)
            .map(|i| {
                let mut c = Component {
                    function: recipe.functions[i],
                    sigma: recipe.sigma[i],
                    lambda: recipe.lambda[i],
                    shift: shifts[i].clone(),
                    rotation: rotations[i].clone(),
                    f_max: 1.0,
                };
                let corner = vec![5.0; dim];
                let z = transform(&corner, None, c.lambda, &c.rotation);
                c.f_max = c.function.eval(&z);
                c
            })
            .collect();
        if let Some(i) = components.iter().position(|c| !(c.f_max.is_finite() && c.f_max > 0.0)) {
            return Err(format!("component {i} has a degenerate normalizer {}", components[i].f_max));
        }
        Ok(Self {
            kind,
            dim,
            components,
        })
    }

    pub fn kind(&self) -> CompositionKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Component optima. All biases are zero, so every shift vector is a
    /// global maximizer with fitness 0.
    pub fn shifts(&self) -> impl Iterator<Item = &[f64]> {
        self.components.iter().map(|c| c.shift.as_slice())
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let weights = self.weights(x);
        let total: f64 = self
            .components
            .iter()
            .zip(&weights)
            .map(|(c, w)| {
                if *w == 0.0 {
                    return 0.0;
                }
                let z = transform(x, Some(&c.shift), c.lambda, &c.rotation);
                w * HEIGHT * c.function.eval(&z) / c.f_max
            })
            .sum();
        -total
    }

    fn weights(&self, x: &[f64]) -> Vec<f64> {
        let d = self.dim as f64;
        let mut w: Vec<f64> = self
            .components
            .iter()
            .map(|c| {
                let sq: f64 = x.iter().zip(&c.shift).map(|(a, b)| (a - b) * (a - b)).sum();
                (-sq / (2.0 * d * c.sigma * c.sigma)).exp()
            })
            .collect();
        let max = w.iter().copied().fold(0.0, f64::max);
        let damp = 1.0 - max.powi(10);
        for wi in w.iter_mut() {
            if *wi != max {
                *wi *= damp;
            }
        }
        let sum: f64 = w.iter().sum();
        if sum == 0.0 {
            let n = w.len() as f64;
            w.iter_mut().for_each(|wi| *wi = 1.0 / n);
        } else {
            w.iter_mut().for_each(|wi| *wi /= sum);
        }
        w
    }
}

fn identity(d: usize) -> Vec<f64> {
    let mut m = vec![0.0; d * d];
    for i in 0..d {
        m[i * d + i] = 1.0;
    }
    m
}

fn transform(x: &[f64], shift: Option<&[f64]>, lambda: f64, rotation: &[f64]) -> Vec<f64> {
    let d = x.len();
    let scaled: Vec<f64> = match shift {
        Some(o) => x.iter().zip(o).map(|(a, b)| (a - b) / lambda).collect(),
        None => x.iter().map(|a| a / lambda).collect(),
    };
    (0..d)
        .map(|j| (0..d).map(|i| scaled[i] * rotation[i * d + j]).sum())
        .collect()
}
