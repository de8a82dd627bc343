use serde::{Deserialize, Serialize};

use super::RouteMode;

/// Service level requested for a recognition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Quality {
    #[default]
    Standard,
    High,
}

/// High-quality requests bypass the edge when the cloud is reachable;
/// otherwise requests go through the edge, and with either tier down the
/// device answers on its own.
pub fn choose_route(cloud_up: bool, edge_up: bool, quality: Quality) -> RouteMode {
    match (quality, cloud_up, edge_up) {
        (Quality::High, true, _) => RouteMode::DirectCloud,
        (_, true, true) => RouteMode::ViaEdge,
        _ => RouteMode::Offline,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table() {
        assert_eq!(choose_route(true, true, Quality::High), RouteMode::DirectCloud);
        assert_eq!(choose_route(true, false, Quality::High), RouteMode::DirectCloud);
        assert_eq!(choose_route(false, true, Quality::High), RouteMode::Offline);
        assert_eq!(choose_route(true, true, Quality::Standard), RouteMode::ViaEdge);
        assert_eq!(choose_route(true, false, Quality::Standard), RouteMode::Offline);
        assert_eq!(choose_route(false, true, Quality::Standard), RouteMode::Offline);
        assert_eq!(choose_route(false, false, Quality::Standard), RouteMode::Offline);
    }

    #[test]
    fn never_picks_a_down_tier() {
        for cloud in [false, true] {
            for edge in [false, true] {
                for q in [Quality::Standard, Quality::High] {
                    match choose_route(cloud, edge, q) {
                        RouteMode::DirectCloud => assert!(cloud),
                        RouteMode::ViaEdge => assert!(cloud && edge),
                        RouteMode::Offline => {}
                    }
                }
            }
        }
    }
}
