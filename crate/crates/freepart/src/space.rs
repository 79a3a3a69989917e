//! Finite exact models of the base measure space and of the jump (Levy)
//! measure. Test functions are simple functions given by one rational value
//! per cell, so every integral in the moment formulas is a finite sum.

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{rat_int, Rat};

/// A finite cell decomposition of the ambient window, with exact nonnegative
/// sigma-masses per cell. Total mass is the volume `V`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiscreteSpace {
    cells: Vec<String>,
    masses: Vec<Rat>,
}

impl DiscreteSpace {
    pub fn new(cells: Vec<(String, Rat)>) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::Usage("space needs at least one cell".into()));
        }
        let mut names = Vec::with_capacity(cells.len());
        let mut masses = Vec::with_capacity(cells.len());
        let mut total = Rat::zero();
        for (name, mass) in cells {
            if mass.is_negative() {
                return Err(Error::Usage(format!("cell {name:?} has negative mass")));
            }
            if names.contains(&name) {
                return Err(Error::Usage(format!("duplicate cell name {name:?}")));
            }
            total += &mass;
            names.push(name);
            masses.push(mass);
        }
        if total.is_zero() {
            return Err(Error::Usage("total sigma-mass must be positive".into()));
        }
        Ok(DiscreteSpace {
            cells: names,
            masses,
        })
    }

    /// Unit-mass cells named `c0..c{n-1}`; convenient in tests.
    pub fn unit_cells(n: usize) -> Self {
        DiscreteSpace::new((0..n).map(|i| (format!("c{i}"), rat_int(1))).collect()).unwrap()
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn cell_names(&self) -> &[String] {
        &self.cells
    }

    pub fn mass(&self, cell: usize) -> &Rat {
        &self.masses[cell]
    }

    /// The volume V = sigma(Lambda).
    pub fn total_mass(&self) -> Rat {
        self.masses.iter().sum()
    }

    /// Same cells with masses divided by the total, so the result is a
    /// probability space. Ratios of cell masses are preserved.
    pub fn normalized_probability(&self) -> DiscreteSpace {
        let v = self.total_mass();
        DiscreteSpace {
            cells: self.cells.clone(),
            masses: self.masses.iter().map(|m| m / &v).collect(),
        }
    }

    /// Exact integral of the pointwise product: sum over cells of
    /// `f1(c)...fk(c) * sigma(c)`.
    pub fn integrate_product(&self, fs: &[&TestFunction]) -> Result<Rat> {
        if fs.is_empty() {
            return Err(Error::Usage("integrate_product needs at least one function".into()));
        }
        for f in fs {
            f.check_space(self)?;
        }
        let mut acc = Rat::zero();
        for c in 0..self.num_cells() {
            let mut prod = self.masses[c].clone();
            if prod.is_zero() {
                continue;
            }
            for f in fs {
                prod *= f.value(c);
            }
            acc += prod;
        }
        Ok(acc)
    }
}

/// A simple function: one rational value per cell of its space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TestFunction {
    values: Vec<Rat>,
}

impl TestFunction {
    pub fn new(space: &DiscreteSpace, values: Vec<Rat>) -> Result<Self> {
        if values.len() != space.num_cells() {
            return Err(Error::Usage(format!(
                "function has {} values for a space with {} cells",
                values.len(),
                space.num_cells()
            )));
        }
        Ok(TestFunction { values })
    }

    /// Indicator of a cell subset.
    pub fn indicator(space: &DiscreteSpace, cells: &[usize]) -> Self {
        let values = (0..space.num_cells())
            .map(|c| {
                if cells.contains(&c) {
                    Rat::one()
                } else {
                    Rat::zero()
                }
            })
            .collect();
        TestFunction { values }
    }

    /// Constant 1 on the whole space.
    pub fn constant_one(space: &DiscreteSpace) -> Self {
        TestFunction {
            values: vec![Rat::one(); space.num_cells()],
        }
    }

    pub fn value(&self, cell: usize) -> &Rat {
        &self.values[cell]
    }

    pub fn values(&self) -> &[Rat] {
        &self.values
    }

    fn check_space(&self, space: &DiscreteSpace) -> Result<()> {
        if self.values.len() != space.num_cells() {
            return Err(Error::Usage(
                "test function does not match the space's cell count".into(),
            ));
        }
        Ok(())
    }
}

/// Finite atomic Levy measure on the punctured real line: finitely many
/// (jump size, mass) atoms with nonzero sizes and positive masses.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JumpMeasure {
    atoms: Vec<(Rat, Rat)>,
}

impl JumpMeasure {
    pub fn new(atoms: Vec<(Rat, Rat)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::Usage("jump measure needs at least one atom".into()));
        }
        for (s, m) in &atoms {
            if s.is_zero() {
                return Err(Error::Usage("jump size must be nonzero".into()));
            }
            if !m.is_positive() {
                return Err(Error::Usage("jump mass must be positive".into()));
            }
        }
        Ok(JumpMeasure { atoms })
    }

    /// The free Poisson specialization nu = delta_1.
    pub fn delta_one() -> Self {
        JumpMeasure {
            atoms: vec![(Rat::one(), Rat::one())],
        }
    }

    pub fn atoms(&self) -> &[(Rat, Rat)] {
        &self.atoms
    }

    /// nu(Delta), the total mass.
    pub fn total_mass(&self) -> Rat {
        self.atoms.iter().map(|(_, m)| m).sum()
    }

    /// The n-th jump moment, the integral of s^n against nu.
    pub fn jump_moment(&self, n: u32) -> Rat {
        let mut acc = Rat::zero();
        for (s, m) in &self.atoms {
            let mut pw = Rat::one();
            for _ in 0..n {
                pw *= s;
            }
            acc += pw * m;
        }
        acc
    }
}

/// Single-particle mixed moment on the marked space Lambda x Delta under the
/// normalized measure (sigma (x) nu)/V with V = sigma(Lambda) nu(Delta):
/// `(1/V) * integral(f1...fk dsigma) * jump_moment(k)`.
pub fn product_space_moment(
    sp: &DiscreteSpace,
    jm: &JumpMeasure,
    fs: &[&TestFunction],
) -> Result<Rat> {
    let v = sp.total_mass() * jm.total_mass();
    if v.is_zero() {
        return Err(Error::Usage("total mass of the product space is zero".into()));
    }
    let spatial = sp.integrate_product(fs)?;
    Ok(spatial * jm.jump_moment(fs.len() as u32) / v)
}
