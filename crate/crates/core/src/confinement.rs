//! Confined structures and the confined core.
//!
//! The core is what survives repeatedly deleting points on fewer than three
//! surviving lines and lines with fewer than three surviving points. It is the
//! largest substructure in which every point has degree at least three and
//! every line at least three points, so a finite structure is confined exactly
//! when it equals its core. Elements added by a free extension step are born
//! with degree two, which is why extending never changes the core.

use std::collections::VecDeque;

use serde::Serialize;

use crate::structure::{ElementRef, IncidenceStructure};

const THRESHOLD: usize = 3;

/// Every point on at least three lines and every line with at least three points.
pub fn is_confined_finite(s: &IncidenceStructure) -> bool {
    (0..s.point_count()).all(|p| s.lines_through(p).len() >= THRESHOLD)
        && (0..s.line_count()).all(|l| s.points_on(l).len() >= THRESHOLD)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DeletionReason {
    #[serde(rename = "point-degree<3")]
    PointDegree,
    #[serde(rename = "line-size<3")]
    LineSize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Deletion {
    /// The deleted element, indexed in the input structure.
    pub element: ElementRef,
    pub reason: DeletionReason,
    /// Peeling round in which the element became deletable (1-based).
    pub round: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoreResult {
    pub core: IncidenceStructure,
    pub deleted: Vec<Deletion>,
    pub rounds: usize,
}

/// The confined core, peeling in canonical order (points, then lines).
pub fn confined_core(s: &IncidenceStructure) -> CoreResult {
    let order: Vec<ElementRef> = (0..s.point_count())
        .map(ElementRef::Point)
        .chain((0..s.line_count()).map(ElementRef::Line))
        .collect();
    confined_core_with_order(s, &order)
}

/// The confined core, seeding the work queue in the given element order.
/// Elements missing from `order` are still considered, after the listed ones.
/// The resulting core does not depend on the order; the deletion log does.
pub fn confined_core_with_order(s: &IncidenceStructure, order: &[ElementRef]) -> CoreResult {
    let (np, nl) = s.size();
    let mut point_deg: Vec<usize> = (0..np).map(|p| s.lines_through(p).len()).collect();
    let mut line_size: Vec<usize> = (0..nl).map(|l| s.points_on(l).len()).collect();
    let mut point_alive = vec![true; np];
    let mut line_alive = vec![true; nl];
    let mut point_queued = vec![false; np];
    let mut line_queued = vec![false; nl];

    let mut queue: VecDeque<(ElementRef, usize)> = VecDeque::new();
    let seed = order.iter().copied().chain(
        (0..np)
            .map(ElementRef::Point)
            .chain((0..nl).map(ElementRef::Line)),
    );
    for e in seed {
        match e {
            ElementRef::Point(p) if !point_queued[p] && point_deg[p] < THRESHOLD => {
                point_queued[p] = true;
                queue.push_back((e, 1));
            }
            ElementRef::Line(l) if !line_queued[l] && line_size[l] < THRESHOLD => {
                line_queued[l] = true;
                queue.push_back((e, 1));
            }
            _ => {}
        }
    }

    let mut deleted = Vec::new();
    let mut rounds = 0;
    while let Some((e, round)) = queue.pop_front() {
        rounds = rounds.max(round);
        match e {
            ElementRef::Point(p) => {
                point_alive[p] = false;
                deleted.push(Deletion {
                    element: e,
                    reason: DeletionReason::PointDegree,
                    round,
                });
                for &l in s.lines_through(p) {
                    if !line_alive[l] {
                        continue;
                    }
                    line_size[l] -= 1;
                    if line_size[l] < THRESHOLD && !line_queued[l] {
                        line_queued[l] = true;
                        queue.push_back((ElementRef::Line(l), round + 1));
                    }
                }
            }
            ElementRef::Line(l) => {
                line_alive[l] = false;
                deleted.push(Deletion {
                    element: e,
                    reason: DeletionReason::LineSize,
                    round,
                });
                for &p in s.points_on(l) {
                    if !point_alive[p] {
                        continue;
                    }
                    point_deg[p] -= 1;
                    if point_deg[p] < THRESHOLD && !point_queued[p] {
                        point_queued[p] = true;
                        queue.push_back((ElementRef::Point(p), round + 1));
                    }
                }
            }
        }
    }

    let points: Vec<usize> = (0..np).filter(|&p| point_alive[p]).collect();
    let lines: Vec<usize> = (0..nl).filter(|&l| line_alive[l]).collect();
    CoreResult {
        core: s.induced(&points, &lines),
        deleted,
        rounds,
    }
}
