//! Halfspace description of the limit payoff set and its exact polygon for
//! two-player games.

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::game::{JointKernel, StochasticGame};
use crate::linalg;
use crate::rat::Rational;

use super::program::{solve_score, ScoreError, ScoreOutcome, ScoreProgramSpec};

#[derive(Debug, Error)]
pub enum PolytopeError {
    #[error("polygon mode needs a two-player game")]
    NotTwoPlayers,
    #[error("fewer than 3 non-redundant halfspaces; polygon undefined")]
    TooFewHalfspaces,
    #[error("halfspace intersection is unbounded in direction ({0}, {1})")]
    Unbounded(Rational, Rational),
    #[error("halfspace intersection is empty or degenerate")]
    Degenerate,
    #[error("direction {index} admits no feasible profile")]
    NoScore { index: usize },
    #[error(transparent)]
    Score(#[from] ScoreError),
}

/// Sampled halfspaces lambda . v <= k(lambda), with the exact polygon
/// vertices when requested.
#[derive(Debug, Clone)]
pub struct LimitPayoffPolytope {
    pub halfspaces: Vec<(Vec<Rational>, Rational)>,
    pub vertices: Option<Vec<(Rational, Rational)>>,
}

impl LimitPayoffPolytope {
    /// Exact membership in every sampled halfspace.
    pub fn contains(&self, point: &[Rational]) -> bool {
        self.halfspaces.iter().all(|(lambda, k)| {
            let v: Rational = lambda
                .iter()
                .zip(point)
                .map(|(l, x)| l * x)
                .fold(Rational::zero(), |a, b| a + b);
            &v <= k
        })
    }
}

/// Scores every direction; with `polygon` set (two players only), also
/// intersects the halfspaces into an exact vertex list.
pub fn limit_polytope(
    game: &StochasticGame,
    kernel: &JointKernel,
    directions: &[Vec<Rational>],
    polygon: bool,
) -> Result<LimitPayoffPolytope, PolytopeError> {
    let mut halfspaces = Vec::new();
    for (index, lambda) in directions.iter().enumerate() {
        let spec = ScoreProgramSpec::general(lambda.clone());
        match solve_score(game, kernel, &spec)? {
            ScoreOutcome::Solved(sol) => halfspaces.push((lambda.clone(), sol.k)),
            ScoreOutcome::NoFeasibleProfile => return Err(PolytopeError::NoScore { index }),
        }
    }
    let vertices = if polygon {
        if game.n_players() != 2 {
            return Err(PolytopeError::NotTwoPlayers);
        }
        Some(polygon_vertices(&halfspaces)?)
    } else {
        None
    };
    Ok(LimitPayoffPolytope {
        halfspaces,
        vertices,
    })
}

/// Exact 2D halfspace intersection: pairwise boundary intersections kept if
/// they satisfy every halfspace, deduplicated and sorted around the
/// centroid. Unboundedness is detected from the recession cone: a nonzero
/// direction d with lambda . d <= 0 for all normals exists iff some normal's
/// rotation survives all constraints.
pub fn polygon_vertices(
    halfspaces: &[(Vec<Rational>, Rational)],
) -> Result<Vec<(Rational, Rational)>, PolytopeError> {
    let hs: Vec<(&Rational, &Rational, &Rational)> = halfspaces
        .iter()
        .map(|(l, k)| (&l[0], &l[1], k))
        .collect();
    let mut dedup: Vec<(Rational, Rational, Rational)> = Vec::new();
    for (a, b, k) in &hs {
        let row = ((*a).clone(), (*b).clone(), (*k).clone());
        if !dedup.contains(&row) {
            dedup.push(row);
        }
    }
    if dedup.len() < 3 {
        return Err(PolytopeError::TooFewHalfspaces);
    }

    // Recession directions: ±(-b, a) for each normal (a, b).
    for (a, b, _) in &dedup {
        for sign in [1i64, -1] {
            let s = Rational::from_integer(sign.into());
            let dx = -b * &s;
            let dy = a * &s;
            if dx.is_zero() && dy.is_zero() {
                continue;
            }
            let escapes = dedup
                .iter()
                .all(|(na, nb, _)| (na * &dx + nb * &dy) <= Rational::zero());
            if escapes {
                return Err(PolytopeError::Unbounded(dx, dy));
            }
        }
    }

    let mut vertices: Vec<(Rational, Rational)> = Vec::new();
    for i in 0..dedup.len() {
        for j in (i + 1)..dedup.len() {
            let (a1, b1, k1) = &dedup[i];
            let (a2, b2, k2) = &dedup[j];
            let m = vec![
                vec![a1.clone(), b1.clone()],
                vec![a2.clone(), b2.clone()],
            ];
            let rhs = vec![k1.clone(), k2.clone()];
            let Some(p) = linalg::solve_unique(&m, &rhs) else {
                continue;
            };
            let inside = dedup
                .iter()
                .all(|(a, b, k)| &(a * &p[0] + b * &p[1]) <= k);
            if inside {
                let v = (p[0].clone(), p[1].clone());
                if !vertices.contains(&v) {
                    vertices.push(v);
                }
            }
        }
    }
    if vertices.len() < 3 {
        return Err(PolytopeError::Degenerate);
    }

    // Sort counterclockwise around the centroid.
    let n = Rational::from_integer((vertices.len() as i64).into());
    let cx: Rational = vertices
        .iter()
        .map(|(x, _)| x.clone())
        .fold(Rational::zero(), |a, b| a + b)
        / &n;
    let cy: Rational = vertices
        .iter()
        .map(|(_, y)| y.clone())
        .fold(Rational::zero(), |a, b| a + b)
        / &n;
    let half = |dx: &Rational, dy: &Rational| -> u8 {
        // 0 for the upper half plane (dy > 0, or dy = 0 and dx > 0)
        if dy.is_positive() || (dy.is_zero() && dx.is_positive()) {
            0
        } else {
            1
        }
    };
    vertices.sort_by(|(x1, y1), (x2, y2)| {
        let d1 = (x1 - &cx, y1 - &cy);
        let d2 = (x2 - &cx, y2 - &cy);
        let h1 = half(&d1.0, &d1.1);
        let h2 = half(&d2.0, &d2.1);
        h1.cmp(&h2).then_with(|| {
            // cross > 0 means d1 is counterclockwise before d2
            let cross = &d1.0 * &d2.1 - &d1.1 * &d2.0;
            if cross.is_positive() {
                std::cmp::Ordering::Less
            } else if cross.is_negative() {
                std::cmp::Ordering::Greater
            } else {
                std::cmp::Ordering::Equal
            }
        })
    });
    Ok(vertices)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat, rint};

    #[test]
    fn unit_square_from_four_halfspaces() {
        let hs = vec![
            (vec![rint(1), rint(0)], rint(1)),
            (vec![rint(-1), rint(0)], rint(0)),
            (vec![rint(0), rint(1)], rint(1)),
            (vec![rint(0), rint(-1)], rint(0)),
        ];
        let v = polygon_vertices(&hs).unwrap();
        assert_eq!(v.len(), 4);
        assert!(v.contains(&(rint(0), rint(0))));
        assert!(v.contains(&(rint(1), rint(1))));
    }

    #[test]
    fn slab_is_reported_unbounded() {
        let hs = vec![
            (vec![rint(1), rint(0)], rint(1)),
            (vec![rint(-1), rint(0)], rint(0)),
            (vec![rint(1), rint(0)], rint(2)),
        ];
        match polygon_vertices(&hs) {
            Err(PolytopeError::Unbounded(_, _)) => {}
            other => panic!("expected unbounded, got {other:?}"),
        }
    }

    #[test]
    fn too_few_halfspaces() {
        let hs = vec![
            (vec![rint(1), rint(0)], rint(1)),
            (vec![rint(-1), rint(0)], rint(0)),
        ];
        assert!(matches!(
            polygon_vertices(&hs),
            Err(PolytopeError::TooFewHalfspaces)
        ));
    }

    #[test]
    fn redundant_halfspaces_do_not_add_vertices() {
        let hs = vec![
            (vec![rint(1), rint(0)], rint(1)),
            (vec![rint(-1), rint(0)], rint(0)),
            (vec![rint(0), rint(1)], rint(1)),
            (vec![rint(0), rint(-1)], rint(0)),
            (vec![rint(1), rint(1)], rint(5)), // far away
            (vec![rint(1), rint(1)], rint(5)), // duplicate
        ];
        let v = polygon_vertices(&hs).unwrap();
        assert_eq!(v.len(), 4);
    }

    #[test]
    fn triangle_with_rational_vertices() {
        let hs = vec![
            (vec![rint(0), rint(-1)], rint(0)),
            (vec![rint(-1), rint(0)], rint(0)),
            (vec![rint(2), rint(3)], rat(1, 2)),
        ];
        let v = polygon_vertices(&hs).unwrap();
        assert_eq!(v.len(), 3);
        assert!(v.contains(&(rint(0), rint(0))));
        assert!(v.contains(&(rat(1, 4), rint(0))));
        assert!(v.contains(&(rint(0), rat(1, 6))));
    }
}
