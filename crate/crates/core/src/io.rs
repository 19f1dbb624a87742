//! JSON file formats. Reflexive pairs are left out on disk and restored on
//! load.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::amalgam::{Frame, OrderIso};
use crate::condition::{Condition, PointViews};
use crate::error::{Error, Result};
use crate::order::{BarrierMap, HeightedOrder, Point, Universe};
use crate::symsys::{NodeModel, Ordinal, OrdinalIso, SymSystem};

#[derive(Serialize, Deserialize)]
struct OrderDoc {
    universe: Universe,
    points: Vec<Point>,
    #[serde(default)]
    rel: Vec<(Point, Point)>,
}

impl Serialize for HeightedOrder {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        OrderDoc {
            universe: self.universe(),
            points: self.points().to_vec(),
            rel: self.strict_pairs().collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for HeightedOrder {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = OrderDoc::deserialize(d)?;
        HeightedOrder::with_reflexive(doc.universe, doc.points, doc.rel).map_err(serde::de::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct BarrierEntry {
    pair: (Point, Point),
    set: BTreeSet<Point>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum BarrierDoc {
    List(Vec<BarrierEntry>),
    Wrapped { barriers: Vec<BarrierEntry> },
}

impl Serialize for BarrierMap {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let entries: Vec<BarrierEntry> = self
            .iter()
            .map(|(k, v)| BarrierEntry {
                pair: (k.low(), k.high()),
                set: v.clone(),
            })
            .collect();
        entries.serialize(s)
    }
}

impl<'de> Deserialize<'de> for BarrierMap {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let entries = match BarrierDoc::deserialize(d)? {
            BarrierDoc::List(v) | BarrierDoc::Wrapped { barriers: v } => v,
        };
        let mut map = BarrierMap::new();
        for e in entries {
            let prev = map
                .insert(e.pair.0, e.pair.1, e.set)
                .map_err(serde::de::Error::custom)?;
            if prev.is_some() {
                return Err(serde::de::Error::custom(format!(
                    "duplicate barrier entry for {{{}, {}}}",
                    e.pair.0, e.pair.1
                )));
            }
        }
        Ok(map)
    }
}

/// An order file: the order with an optional barrier map.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderFile {
    #[serde(flatten)]
    pub order: HeightedOrder,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub barriers: Option<BarrierMap>,
}

impl OrderFile {
    /// The stored barriers, or the minimal ones when none are stored.
    pub fn frame(&self) -> Frame {
        match &self.barriers {
            Some(b) => Frame::new(self.order.clone(), b.clone()),
            None => Frame::canonical(self.order.clone()),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct SystemDoc {
    threshold_top: Ordinal,
    nodes: Vec<NodeModel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    contains: Option<Vec<(Ordinal, Ordinal)>>,
}

impl Serialize for SymSystem {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SystemDoc {
            threshold_top: self.threshold_top(),
            nodes: self.nodes().cloned().collect(),
            contains: Some(self.containment().iter().copied().collect()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SymSystem {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = SystemDoc::deserialize(d)?;
        match doc.contains {
            Some(c) => SymSystem::with_declared(doc.threshold_top, doc.nodes, c),
            None => SymSystem::new(doc.threshold_top, doc.nodes),
        }
        .map_err(serde::de::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct ConditionDoc {
    order: HeightedOrder,
    #[serde(default)]
    barriers: Option<BarrierMap>,
    #[serde(default)]
    system: Option<SymSystem>,
    #[serde(default)]
    marked: BTreeSet<Ordinal>,
    #[serde(default)]
    point_views: PointViews,
}

/// Threshold used when a condition file carries no system.
pub const DEFAULT_THRESHOLD_TOP: Ordinal = 1;

impl Serialize for Condition {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ConditionDoc {
            order: self.order.clone(),
            barriers: Some(self.barriers.clone()),
            system: Some(self.system.clone()),
            marked: self.marked.clone(),
            point_views: self.point_views.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Condition {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = ConditionDoc::deserialize(d)?;
        let barriers = doc
            .barriers
            .unwrap_or_else(|| BarrierMap::canonical(&doc.order));
        Ok(Condition {
            order: doc.order,
            barriers,
            system: doc
                .system
                .unwrap_or_else(|| SymSystem::empty(DEFAULT_THRESHOLD_TOP)),
            marked: doc.marked,
            point_views: doc.point_views,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct IsoDoc<T> {
    map: Vec<(T, T)>,
}

impl Serialize for OrderIso {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        IsoDoc { map: self.pairs().collect() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for OrderIso {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = IsoDoc::<Point>::deserialize(d)?;
        OrderIso::new(doc.map).map_err(serde::de::Error::custom)
    }
}

/// Ordinal maps share the iso file shape: `{"map": [[a, b], ...]}`.
pub fn ordinal_iso_from_str(s: &str) -> Result<OrdinalIso> {
    let doc: IsoDoc<Ordinal> = serde_json::from_str(s).map_err(malformed)?;
    OrdinalIso::new(doc.map)
}

pub fn ordinal_iso_to_string(iso: &OrdinalIso) -> String {
    serde_json::to_string_pretty(&IsoDoc {
        map: iso.pairs().collect(),
    })
    .expect("plain data serializes")
}

fn malformed(e: serde_json::Error) -> Error {
    Error::Malformed(e.to_string())
}

/// Parses any of the file formats, reporting problems as malformed input.
pub fn from_str<T: DeserializeOwned>(s: &str) -> Result<T> {
    serde_json::from_str(s).map_err(malformed)
}

pub fn to_string<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("plain data serializes")
}

pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    from_str(&text)
}

pub fn save<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, to_string(value) + "\n")?;
    Ok(())
}

/// Point views keyed by code, as written in condition files.
pub fn point_views_from<I: IntoIterator<Item = (Ordinal, Vec<Point>)>>(views: I) -> PointViews {
    views
        .into_iter()
        .map(|(c, v)| (c, v.into_iter().collect()))
        .collect::<BTreeMap<_, _>>()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_file_round_trip() {
        let text = r#"{"universe":{"width":2,"height":2,"fanout":1},
            "points":[[0,0],[1,0],[0,1]],"rel":[[[0,0],[0,1]],[[1,0],[0,1]]]}"#;
        let f: OrderFile = from_str(text).unwrap();
        assert_eq!(f.order.len(), 3);
        assert!(f.order.le(Point::new(0, 0), Point::new(0, 0)));
        let back: OrderFile = from_str(&to_string(&f)).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn barriers_accept_both_shapes() {
        let list = r#"[{"pair":[[0,0],[1,0]],"set":[]}]"#;
        let wrapped = r#"{"barriers":[{"pair":[[0,0],[1,0]],"set":[]}]}"#;
        let a: BarrierMap = from_str(list).unwrap();
        let b: BarrierMap = from_str(wrapped).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn malformed_input_is_reported_as_such() {
        assert!(matches!(from_str::<OrderFile>("{"), Err(Error::Malformed(_))));
        let oob = r#"{"universe":{"width":1,"height":1,"fanout":1},"points":[[3,0]]}"#;
        assert!(matches!(from_str::<OrderFile>(oob), Err(Error::Malformed(_))));
    }

    #[test]
    fn system_round_trip() {
        let text = r#"{"thresholdTop":2,"nodes":[{"code":5,"delta":1,"elements":[0]},
            {"code":6,"delta":2,"elements":[0,1,5]}],"contains":[[5,6]]}"#;
        let sys: SymSystem = from_str(text).unwrap();
        assert!(sys.is_member(5, 6));
        let back: SymSystem = from_str(&to_string(&sys)).unwrap();
        assert_eq!(back, sys);
    }
}
