//! JSON ingestion of uncertain descriptor plants and row-major matrix
//! serialization shared by all reports.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DescriptorPlant, Mat, UncertainPlant, UncertaintyFactors};

/// Serde adapter storing a matrix as a list of rows.
pub mod rows {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::model::Mat;

    pub fn serialize<S: Serializer>(m: &Mat, s: S) -> Result<S::Ok, S::Error> {
        to_rows(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Mat, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        from_rows(&rows).map_err(serde::de::Error::custom)
    }

    pub fn to_rows(m: &Mat) -> Vec<Vec<f64>> {
        m.row_iter().map(|r| r.iter().copied().collect()).collect()
    }

    /// An empty list is a `0 x 0` matrix.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Mat, String> {
        let nr = rows.len();
        let nc = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != nc) {
            return Err("ragged matrix rows".into());
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err("matrix entries must be finite".into());
        }
        Ok(Mat::from_fn(nr, nc, |i, j| rows[i][j]))
    }
}

/// Optional matrix, `null` or absent when missing.
pub mod opt_rows {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::model::Mat;

    pub fn serialize<S: Serializer>(m: &Option<Mat>, s: S) -> Result<S::Ok, S::Error> {
        m.as_ref().map(super::rows::to_rows).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Mat>, D::Error> {
        match Option::<Vec<Vec<f64>>>::deserialize(d)? {
            None => Ok(None),
            Some(r) => super::rows::from_rows(&r).map(Some).map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UncertaintyJson {
    #[serde(rename = "MA", default, with = "opt_rows", skip_serializing_if = "Option::is_none")]
    pub ma: Option<Mat>,
    #[serde(rename = "NA", default, with = "opt_rows", skip_serializing_if = "Option::is_none")]
    pub na: Option<Mat>,
    #[serde(rename = "MB", default, with = "opt_rows", skip_serializing_if = "Option::is_none")]
    pub mb: Option<Mat>,
    #[serde(rename = "NB", default, with = "opt_rows", skip_serializing_if = "Option::is_none")]
    pub nb: Option<Mat>,
    #[serde(rename = "MC", default, with = "opt_rows", skip_serializing_if = "Option::is_none")]
    pub mc: Option<Mat>,
    #[serde(rename = "NC", default, with = "opt_rows", skip_serializing_if = "Option::is_none")]
    pub nc: Option<Mat>,
    #[serde(rename = "MD", default, with = "opt_rows", skip_serializing_if = "Option::is_none")]
    pub md: Option<Mat>,
    #[serde(rename = "ND", default, with = "opt_rows", skip_serializing_if = "Option::is_none")]
    pub nd: Option<Mat>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<usize>,
}

/// On-disk plant description. `Bu` may be omitted for analysis-only input.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantJson {
    #[serde(rename = "E", with = "rows")]
    pub e: Mat,
    #[serde(rename = "A", with = "rows")]
    pub a: Mat,
    #[serde(rename = "Bw", with = "rows")]
    pub bw: Mat,
    #[serde(rename = "Bu", default, with = "opt_rows", skip_serializing_if = "Option::is_none")]
    pub bu: Option<Mat>,
    #[serde(rename = "C", with = "rows")]
    pub c: Mat,
    #[serde(rename = "Dw", with = "rows")]
    pub dw: Mat,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uncertainty: Option<UncertaintyJson>,
}

impl PlantJson {
    pub fn into_plant(self) -> Result<UncertainPlant> {
        let n = self.e.nrows();
        let bu = self.bu.unwrap_or_else(|| Mat::zeros(n, 0));
        let plant = DescriptorPlant::new(self.e, self.a, self.bw, bu, self.c, self.dw)?;
        match self.uncertainty {
            None => Ok(UncertainPlant::nominal(plant)),
            Some(u) => UncertainPlant::new(
                plant,
                UncertaintyFactors {
                    ma: u.ma,
                    na: u.na,
                    mb: u.mb,
                    nb: u.nb,
                    mc: u.mc,
                    nc: u.nc,
                    md: u.md,
                    nd: u.nd,
                    s: u.s,
                },
            ),
        }
    }

    pub fn from_plant(up: &UncertainPlant) -> Self {
        let p = &up.plant;
        let nz = |m: &Mat| (!m.is_empty() && m.iter().any(|&v| v != 0.0)).then(|| m.clone());
        let uncertainty = up.has_uncertainty().then(|| UncertaintyJson {
            ma: nz(&up.ma),
            na: nz(&up.na),
            mb: nz(&up.mb),
            nb: nz(&up.nb),
            mc: nz(&up.mc),
            nc: nz(&up.nc),
            md: nz(&up.md),
            nd: nz(&up.nd),
            s: Some(up.s()),
        });
        Self {
            e: p.e.clone(),
            a: p.a.clone(),
            bw: p.bw.clone(),
            bu: (p.m() > 0).then(|| p.bu.clone()),
            c: p.c.clone(),
            dw: p.dw.clone(),
            uncertainty,
        }
    }
}

pub fn parse_plant(json: &str) -> Result<UncertainPlant> {
    let raw: PlantJson = serde_json::from_str(json)?;
    raw.into_plant()
}

pub fn plant_to_json(up: &UncertainPlant) -> Result<String> {
    serde_json::to_string_pretty(&PlantJson::from_plant(up)).map_err(Error::from)
}
