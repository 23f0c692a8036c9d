use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::MAX_DIM;

/// Separator used when concatenating factor labels of a tensor product.
pub const TENSOR_SEP: &str = "⊗";

/// Name of one basis ket, e.g. `alive`, `dead`, `undecayed⊗alive`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BasisLabel(String);

impl BasisLabel {
    pub fn new(name: impl Into<String>) -> Result<Self> {
        let name = name.into();
        if name.trim().is_empty() {
            return Err(Error::InvalidSpace("basis label must be nonempty".into()));
        }
        Ok(BasisLabel(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Shared handle to a Hilbert space; states and operators hold one.
pub type Space = Arc<HilbertSpace>;

/// Ordered, labeled orthonormal basis. Tensor-product spaces remember their
/// factors so that partial traces are well defined.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HilbertSpace {
    labels: Vec<BasisLabel>,
    factors: Vec<Vec<BasisLabel>>,
}

impl HilbertSpace {
    pub fn new<I, S>(labels: I) -> Result<Space>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels = labels.into_iter().map(BasisLabel::new).collect::<Result<Vec<_>>>()?;
        validate_labels(&labels)?;
        Ok(Arc::new(HilbertSpace { labels, factors: Vec::new() }))
    }

    /// Product space from a list of factor label lists, first factor most significant.
    pub fn product<F, I, S>(factors: F) -> Result<Space>
    where
        F: IntoIterator<Item = I>,
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let factors = factors
            .into_iter()
            .map(|f| HilbertSpace::new(f).map(|s| s.labels.clone()))
            .collect::<Result<Vec<_>>>()?;
        if factors.len() < 2 {
            return Err(Error::InvalidSpace("a product space needs at least two factors".into()));
        }
        build_product(factors)
    }

    /// `a ⊗ b`; a factor that is itself a product contributes all of its factors.
    pub fn tensor(a: &HilbertSpace, b: &HilbertSpace) -> Result<Space> {
        let mut factors = a.factor_labels();
        factors.extend(b.factor_labels());
        build_product(factors)
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[BasisLabel] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l.as_str() == label)
    }

    pub fn is_product(&self) -> bool {
        !self.factors.is_empty()
    }

    /// Factor label lists; empty for a space without factorization metadata.
    pub fn factors(&self) -> &[Vec<BasisLabel>] {
        &self.factors
    }

    pub fn factor_dims(&self) -> Vec<usize> {
        self.factors.iter().map(Vec::len).collect()
    }

    /// Space of a single factor (no factorization metadata of its own).
    pub fn factor_space(&self, index: usize) -> Result<Space> {
        let f = self.factors.get(index).ok_or(Error::NotProductSpace)?;
        Ok(Arc::new(HilbertSpace { labels: f.clone(), factors: Vec::new() }))
    }

    fn factor_labels(&self) -> Vec<Vec<BasisLabel>> {
        if self.factors.is_empty() {
            alloc::vec![self.labels.clone()]
        } else {
            self.factors.clone()
        }
    }
}

fn validate_labels(labels: &[BasisLabel]) -> Result<()> {
    let dim = labels.len();
    if dim > MAX_DIM {
        return Err(Error::DimensionCeiling { dim });
    }
    if dim < 2 {
        return Err(Error::InvalidSpace(format!("dimension {dim} is below 2")));
    }
    for (i, l) in labels.iter().enumerate() {
        if labels[..i].contains(l) {
            return Err(Error::InvalidSpace(format!("duplicate basis label `{l}`")));
        }
    }
    Ok(())
}

fn build_product(factors: Vec<Vec<BasisLabel>>) -> Result<Space> {
    let dim = factors.iter().map(Vec::len).try_fold(1usize, |acc, d| acc.checked_mul(d));
    match dim {
        Some(d) if d <= MAX_DIM => {}
        Some(d) => return Err(Error::DimensionCeiling { dim: d }),
        None => return Err(Error::DimensionCeiling { dim: usize::MAX }),
    }
    let mut labels: Vec<String> = alloc::vec![String::new()];
    for (k, f) in factors.iter().enumerate() {
        labels = labels
            .iter()
            .flat_map(|prefix| {
                f.iter().map(move |l| {
                    if k == 0 {
                        l.as_str().to_string()
                    } else {
                        format!("{prefix}{TENSOR_SEP}{l}")
                    }
                })
            })
            .collect();
    }
    let labels = labels.into_iter().map(BasisLabel::new).collect::<Result<Vec<_>>>()?;
    validate_labels(&labels)?;
    Ok(Arc::new(HilbertSpace { labels, factors }))
}

/// Compares two spaces, short-circuiting on pointer identity.
pub fn same_space(a: &Space, b: &Space) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_index_bijectively() {
        let s = HilbertSpace::new(["alive", "dead"]).unwrap();
        assert_eq!(s.dim(), 2);
        assert_eq!(s.index_of("dead"), Some(1));
        assert_eq!(s.index_of("zombie"), None);
    }

    #[test]
    fn rejects_bad_label_sets() {
        assert!(matches!(HilbertSpace::new(["a", "a"]), Err(Error::InvalidSpace(_))));
        assert!(matches!(HilbertSpace::new(["a"]), Err(Error::InvalidSpace(_))));
        assert!(matches!(HilbertSpace::new(["a", ""]), Err(Error::InvalidSpace(_))));
        let many: Vec<String> = (0..17).map(|i| format!("{i}")).collect();
        assert_eq!(HilbertSpace::new(many), Err(Error::DimensionCeiling { dim: 17 }));
    }

    #[test]
    fn tensor_concatenates_labels_in_row_major_order() {
        let dev = HilbertSpace::new(["undecayed", "decayed"]).unwrap();
        let cat = HilbertSpace::new(["alive", "dead"]).unwrap();
        let both = HilbertSpace::tensor(&dev, &cat).unwrap();
        let names: Vec<&str> = both.labels().iter().map(BasisLabel::as_str).collect();
        assert_eq!(names, ["undecayed⊗alive", "undecayed⊗dead", "decayed⊗alive", "decayed⊗dead"]);
        assert_eq!(both.factor_dims(), [2, 2]);
        assert_eq!(*HilbertSpace::product([["undecayed", "decayed"], ["alive", "dead"]]).unwrap(), *both);
    }

    #[test]
    fn tensor_respects_ceiling() {
        let q = HilbertSpace::new(["0", "1"]).unwrap();
        let q4 = HilbertSpace::tensor(&HilbertSpace::tensor(&q, &q).unwrap(), &HilbertSpace::tensor(&q, &q).unwrap()).unwrap();
        assert_eq!(q4.dim(), 16);
        assert_eq!(q4.factors().len(), 4);
        assert_eq!(HilbertSpace::tensor(&q4, &q), Err(Error::DimensionCeiling { dim: 32 }));
    }
}
