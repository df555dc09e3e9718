use crate::{Error, Result};
use num_integer::Integer;
use rational_core::BigRational;
use rational_core::ReducedRational;
use serde::{Deserialize, Serialize};

/// One member of a [`RationalFamily`].
///
/// The value is the element's magnitude. Elements whose effective tags differ
/// are treated as having an irrational ratio, which is how several
/// rational-equivalence classes are modelled with exact inputs.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FamilyElement {
    pub value: ReducedRational,
    pub tag: Option<String>,
}

impl FamilyElement {
    pub fn new(value: ReducedRational) -> Self {
        Self { value, tag: None }
    }

    pub fn tagged(value: ReducedRational, tag: &str) -> Self {
        Self { value, tag: Some(tag.to_string()) }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawElement {
    Plain(ReducedRationalStr),
    Tagged { value: ReducedRationalStr, tag: Option<String> },
}

#[derive(Serialize, Deserialize)]
#[serde(transparent)]
struct ReducedRationalStr(String);

impl Serialize for FamilyElement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v = ReducedRationalStr(rational_core::fmt_rational(&self.value.to_big_rational()));
        match &self.tag {
            None => RawElement::Plain(v).serialize(s),
            Some(t) => RawElement::Tagged { value: v, tag: Some(t.clone()) }.serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for FamilyElement {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let (v, tag) = match RawElement::deserialize(d)? {
            RawElement::Plain(v) => (v, None),
            RawElement::Tagged { value, tag } => (value, tag),
        };
        let value = v.0.parse::<ReducedRational>().map_err(serde::de::Error::custom)?;
        Ok(Self { value, tag })
    }
}

/// A finite family of positive rationals with an optional family-wide scale tag.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RationalFamily {
    pub scale_tag: Option<String>,
    pub elements: Vec<FamilyElement>,
    /// Declared 1-spaced: distinct elements are at distance at least 1.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub one_spaced: bool,
    /// Declared free of integer ratios between distinct related elements.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub primitivity: bool,
}

impl<'de> Deserialize<'de> for RationalFamily {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            #[serde(default)]
            scale_tag: Option<String>,
            elements: Vec<FamilyElement>,
            #[serde(default)]
            one_spaced: bool,
            #[serde(default)]
            primitivity: bool,
        }
        let r = Raw::deserialize(d)?;
        RationalFamily::new(r.scale_tag, r.elements, r.one_spaced, r.primitivity)
            .map_err(serde::de::Error::custom)
    }
}

impl RationalFamily {
    /// Sorts elements by value and checks any declared property.
    pub fn new(
        scale_tag: Option<String>,
        mut elements: Vec<FamilyElement>,
        one_spaced: bool,
        primitivity: bool,
    ) -> Result<Self> {
        elements.sort_by(|a, b| a.value.cmp(&b.value).then_with(|| a.tag.cmp(&b.tag)));
        elements.dedup();
        let f = Self { scale_tag, elements, one_spaced, primitivity };
        if one_spaced {
            if let Some((a, b)) = f.spacing_violation() {
                return Err(Error::Input(format!("not 1-spaced: {a} and {b}")));
            }
        }
        if primitivity {
            if let Some((a, b)) = f.primitivity_violation() {
                return Err(Error::Input(format!("integer ratio: {a} / {b}")));
            }
        }
        Ok(f)
    }

    /// An untagged family with no declared properties.
    pub fn from_values(values: impl IntoIterator<Item = ReducedRational>) -> Self {
        let elements = values.into_iter().map(FamilyElement::new).collect();
        Self::new(None, elements, false, false).expect("no declared properties")
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn values(&self) -> impl Iterator<Item = &ReducedRational> {
        self.elements.iter().map(|e| &e.value)
    }

    /// The tag deciding an element's equivalence class.
    pub fn class_of<'a>(&'a self, e: &'a FamilyElement) -> Option<&'a str> {
        e.tag.as_deref().or(self.scale_tag.as_deref())
    }

    /// True when the two elements have a rational ratio.
    pub fn related(&self, a: &FamilyElement, b: &FamilyElement) -> bool {
        self.class_of(a) == self.class_of(b)
    }

    pub fn spacing_violation(&self) -> Option<(ReducedRational, ReducedRational)> {
        let one = BigRational::from_integer(1.into());
        self.elements.windows(2).find_map(|w| {
            let d = w[1].value.to_big_rational() - w[0].value.to_big_rational();
            (d < one).then(|| (w[0].value.clone(), w[1].value.clone()))
        })
    }

    pub fn primitivity_violation(&self) -> Option<(ReducedRational, ReducedRational)> {
        for (j, b) in self.elements.iter().enumerate() {
            for a in &self.elements[..j] {
                if a.value == b.value || !self.related(a, b) {
                    continue;
                }
                // b/a = (nb da) / (db na)
                let n = b.value.num() * a.value.den();
                let d = b.value.den() * a.value.num();
                if n.is_multiple_of(&d) {
                    return Some((b.value.clone(), a.value.clone()));
                }
            }
        }
        None
    }

    /// sum of 1/alpha, exact.
    pub fn lambda(&self) -> BigRational {
        crate::util::reciprocal_sum(self.values())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: u64, d: u64) -> ReducedRational {
        ReducedRational::new(n, d)
    }

    #[test]
    fn json_round_trip() {
        let f = RationalFamily::new(
            Some("s".into()),
            vec![FamilyElement::new(r(5, 2)), FamilyElement::tagged(r(7, 1), "t")],
            true,
            false,
        )
        .unwrap();
        let js = serde_json::to_string(&f).unwrap();
        assert_eq!(
            js,
            r#"{"scale_tag":"s","elements":["5/2",{"value":"7","tag":"t"}],"one_spaced":true}"#
        );
        assert_eq!(serde_json::from_str::<RationalFamily>(&js).unwrap(), f);
        let plain: RationalFamily =
            serde_json::from_str(r#"{"scale_tag":null,"elements":["3","9/2"]}"#).unwrap();
        assert_eq!(plain.len(), 2);
    }

    #[test]
    fn declared_properties() {
        let el = |v: &[(u64, u64)]| v.iter().map(|&(n, d)| FamilyElement::new(r(n, d))).collect();
        assert!(RationalFamily::new(None, el(&[(2, 1), (5, 2)]), true, false).is_err());
        assert!(RationalFamily::new(None, el(&[(2, 1), (7, 2)]), true, false).is_ok());
        assert!(RationalFamily::new(None, el(&[(3, 2), (9, 2)]), false, true).is_err());
        assert!(RationalFamily::new(None, el(&[(3, 2), (5, 2)]), false, true).is_ok());
        let tagged = vec![FamilyElement::tagged(r(3, 2), "a"), FamilyElement::tagged(r(9, 2), "b")];
        assert!(RationalFamily::new(None, tagged, false, true).is_ok());
    }
}
