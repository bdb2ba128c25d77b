//! Builds the named objects of a config on demand, caching each one.

use std::collections::BTreeMap;

use gelfand_core::algebra::Preset;
use gelfand_core::function_algebra::{make_cxe, make_lip, make_poly, make_rational, span_be};
use gelfand_core::spaces::{raster_from_shape, sample_raster};
use gelfand_core::{AlgebraSpec, Complex64, FiniteSpace, FunctionSystem, Quadruple, RasterRegion};

use crate::config::{AlgebraDef, ExperimentConfig, SpaceDef, SystemDef};
use crate::error::CliError;

/// A point space, with the raster it was sampled from if any.
#[derive(Debug, Clone)]
pub struct PointSpace {
    pub space: FiniteSpace,
    pub raster: Option<RasterRegion>,
}

pub struct Resolver<'a> {
    config: &'a ExperimentConfig,
    algebras: BTreeMap<String, AlgebraSpec>,
    rasters: BTreeMap<String, RasterRegion>,
    spaces: BTreeMap<String, PointSpace>,
    systems: BTreeMap<String, FunctionSystem>,
}

fn pair(p: &[f64; 2]) -> Complex64 {
    Complex64::new(p[0], p[1])
}

impl<'a> Resolver<'a> {
    pub fn new(config: &'a ExperimentConfig) -> Self {
        Resolver {
            config,
            algebras: BTreeMap::new(),
            rasters: BTreeMap::new(),
            spaces: BTreeMap::new(),
            systems: BTreeMap::new(),
        }
    }

    pub fn config(&self) -> &ExperimentConfig {
        self.config
    }

    pub fn algebra(&mut self, name: &str) -> Result<AlgebraSpec, CliError> {
        if let Some(a) = self.algebras.get(name) {
            return Ok(a.clone());
        }
        let built = match self.config.algebras.get(name) {
            Some(AlgebraDef::Preset(p)) => Preset::from_name(p)?.build()?.with_label(name),
            Some(AlgebraDef::Structure(spec)) => spec.clone().with_label(name),
            None => match Preset::from_name(name) {
                Ok(p) => p.build()?,
                Err(_) => return Err(CliError::Unresolved { kind: "algebra", name: name.into() }),
            },
        };
        self.algebras.insert(name.into(), built.clone());
        Ok(built)
    }

    pub fn raster(&mut self, name: &str) -> Result<RasterRegion, CliError> {
        if let Some(r) = self.rasters.get(name) {
            return Ok(r.clone());
        }
        let Some(SpaceDef::Raster { shape, resolution }) = self.config.spaces.get(name) else {
            return Err(CliError::Unresolved { kind: "raster", name: name.into() });
        };
        let built = raster_from_shape(shape, *resolution)?;
        self.rasters.insert(name.into(), built.clone());
        Ok(built)
    }

    pub fn space(&mut self, name: &str) -> Result<PointSpace, CliError> {
        if let Some(s) = self.spaces.get(name) {
            return Ok(s.clone());
        }
        let unresolved = || CliError::Unresolved { kind: "space", name: name.into() };
        let built = match self.config.spaces.get(name).ok_or_else(unresolved)? {
            SpaceDef::Line(xs) => PointSpace { space: FiniteSpace::on_line(xs)?, raster: None },
            SpaceDef::Coords(zs) => PointSpace { space: FiniteSpace::from_coords(zs.iter().map(pair).collect())?, raster: None },
            SpaceDef::Metric { points, distances } => {
                PointSpace { space: FiniteSpace::from_metric(points.clone(), distances.clone())?, raster: None }
            }
            SpaceDef::Discrete(n) => PointSpace { space: FiniteSpace::discrete(*n)?, raster: None },
            SpaceDef::Raster { .. } => return Err(unresolved()),
            SpaceDef::Sample { raster, strategies } => {
                let region = self.raster(raster)?;
                let mut space: Option<FiniteSpace> = None;
                for s in strategies {
                    let part = sample_raster(&region, s)?;
                    space = Some(match space {
                        None => part,
                        Some(acc) => acc.concat(&part),
                    });
                }
                PointSpace { space: space.ok_or_else(unresolved)?, raster: Some(region) }
            }
        };
        self.spaces.insert(name.into(), built.clone());
        Ok(built)
    }

    pub fn system(&mut self, name: &str) -> Result<FunctionSystem, CliError> {
        if let Some(s) = self.systems.get(name) {
            return Ok(s.clone());
        }
        let def = self.config.systems.get(name).ok_or_else(|| CliError::Unresolved { kind: "system", name: name.into() })?;
        let built = match def {
            SystemDef::Cxe { space, algebra } => make_cxe(&self.space(space)?.space, &self.algebra(algebra)?)?,
            SystemDef::Lip { space, algebra, alpha } => make_lip(&self.space(space)?.space, &self.algebra(algebra)?, *alpha)?,
            SystemDef::Poly { space, algebra, degree } => make_poly(&self.space(space)?.space, &self.algebra(algebra)?, *degree)?,
            SystemDef::Rational { space, algebra, degree, poles } => {
                let poles: Vec<Complex64> = poles.iter().map(pair).collect();
                make_rational(&self.space(space)?.space, &self.algebra(algebra)?, *degree, &poles)?
            }
            SystemDef::SpanBe { scalar, algebra } => span_be(&self.system(scalar)?, &self.algebra(algebra)?)?,
            SystemDef::Closure { of } => self.system(of)?.close_under_products(),
        };
        self.systems.insert(name.into(), built.clone());
        Ok(built)
    }

    /// The raster behind a system's space, when it was sampled from one.
    pub fn raster_of_system(&mut self, name: &str) -> Result<Option<RasterRegion>, CliError> {
        let space = match self.config.systems.get(name) {
            Some(
                SystemDef::Cxe { space, .. }
                | SystemDef::Lip { space, .. }
                | SystemDef::Poly { space, .. }
                | SystemDef::Rational { space, .. },
            ) => space.clone(),
            Some(SystemDef::SpanBe { scalar: inner, .. } | SystemDef::Closure { of: inner }) => {
                let inner = inner.clone();
                return self.raster_of_system(&inner);
            }
            None => return Ok(None),
        };
        Ok(self.space(&space)?.raster)
    }

    pub fn quadruple(&mut self, name: &str) -> Result<(Quadruple, Option<RasterRegion>), CliError> {
        let def = self.config.quadruples.get(name).ok_or_else(|| CliError::Unresolved { kind: "quadruple", name: name.into() })?;
        let def = def.clone();
        let space = self.space(&def.space)?;
        let algebra = self.algebra(&def.algebra)?;
        let scalar = self.system(&def.scalar)?;
        let vector = self.system(&def.vector)?;
        if !vector.space.same_points(&space.space) || !scalar.space.same_points(&space.space) {
            return Err(CliError::Precondition(format!("systems of quadruple `{name}` do not live on space `{}`", def.space)));
        }
        if vector.algebra.clone().with_label("") != algebra.clone().with_label("") {
            return Err(CliError::Precondition(format!(
                "vector system of quadruple `{name}` does not take values in `{}`",
                def.algebra
            )));
        }
        Ok((Quadruple::new(scalar, vector)?, space.raster))
    }
}
