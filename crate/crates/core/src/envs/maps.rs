//! Map parsing and the shipped environments.
//!
//! Map files are plain text: `#` starts a comment, the first data line is
//! the world bounds `x_min y_min x_max y_max`, every following line is one
//! wall rectangle in the same format.

use super::{Env, EnvSpec, Wall};
use crate::error::{Error, Result};

fn parse_quad(line: &str) -> Result<[f32; 4]> {
    let vals: Vec<f32> = line
        .split_whitespace()
        .map(|t| t.parse::<f32>().map_err(|e| Error::InvalidMap(format!("bad number `{t}`: {e}"))))
        .collect::<Result<_>>()?;
    if vals.len() != 4 {
        return Err(Error::InvalidMap(format!("expected 4 numbers, got {}: `{line}`", vals.len())));
    }
    Ok([vals[0], vals[1], vals[2], vals[3]])
}

/// Parse map text into world bounds and wall list.
pub fn parse_map(text: &str) -> Result<([f32; 4], Vec<Wall>)> {
    let mut bounds: Option<[f32; 4]> = None;
    let mut walls = Vec::new();
    for raw in text.lines() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let quad = parse_quad(line)?;
        match bounds {
            None => {
                if !(quad[2] > quad[0] && quad[3] > quad[1]) {
                    return Err(Error::InvalidMap("degenerate world bounds".into()));
                }
                bounds = Some(quad);
            }
            Some(b) => {
                let wall = Wall::new(quad[0], quad[1], quad[2], quad[3])?;
                if wall.x_min < b[0] || wall.y_min < b[1] || wall.x_max > b[2] || wall.y_max > b[3] {
                    return Err(Error::InvalidMap(format!(
                        "wall {quad:?} extends outside bounds {b:?}"
                    )));
                }
                walls.push(wall);
            }
        }
    }
    let bounds = bounds.ok_or_else(|| Error::InvalidMap("missing bounds line".into()))?;
    Ok((bounds, walls))
}

fn maze_spec(horizon: usize) -> EnvSpec {
    EnvSpec {
        state_dim: 2,
        action_dim: 2,
        action_low: vec![-1.0, -1.0],
        action_high: vec![1.0, 1.0],
        goal_radius: 1.5,
        horizon,
        step_scale: 1.0,
    }
}

fn maze_env(name: &str, text: &str) -> Env {
    from_map_text(name, text).unwrap_or_else(|e| panic!("shipped map {name}: {e}"))
}

/// Build an environment from map text with the standard maze contract.
pub fn from_map_text(name: &str, text: &str) -> Result<Env> {
    let (b, walls) = parse_map(text)?;
    Ok(Env {
        name: name.to_string(),
        spec: maze_spec(500),
        bounds_lo: vec![b[0], b[1]],
        bounds_hi: vec![b[2], b[3]],
        walls,
        fixed_task: None,
        trap_center: None,
    })
}

/// Four rooms separated by a wall cross with one doorway per shared wall.
pub fn make_four_rooms() -> Env {
    maze_env("four_rooms", include_str!("../../maps/four_rooms.map"))
}

/// Street-like maze; the longest tasks detour around many obstacles.
pub fn make_city() -> Env {
    maze_env("city", include_str!("../../maps/city.map"))
}

/// Scaled-down city used by the desk-size experiment presets.
pub fn make_city_desk() -> Env {
    maze_env("city_desk", include_str!("../../maps/city_desk.map"))
}

/// Single-goal environment with a cul-de-sac next to the goal. The pocket
/// is a few steps from the fixed start; the true path around the spiral is
/// an order of magnitude longer.
pub fn make_trap() -> Env {
    let mut env = maze_env("trap", include_str!("../../maps/trap.map"));
    let start = vec![18.5, 2.5];
    let goal = vec![18.5, 15.5];
    env.fixed_task = Some((start, goal));
    env.trap_center = Some(vec![18.5, 11.5]);
    env
}

/// Wall-free 3-D point reach; the true transition distance is Euclidean.
pub fn make_reach3d() -> Env {
    Env {
        name: "reach3d".to_string(),
        spec: EnvSpec {
            state_dim: 3,
            action_dim: 3,
            action_low: vec![-1.0; 3],
            action_high: vec![1.0; 3],
            goal_radius: 0.5,
            horizon: 100,
            step_scale: 0.5,
        },
        bounds_lo: vec![0.0; 3],
        bounds_hi: vec![10.0; 3],
        walls: Vec::new(),
        fixed_task: None,
        trap_center: None,
    }
}

/// Environment registry used by run configs and the command line.
pub fn make_env(name: &str) -> Result<Env> {
    match name {
        "four_rooms" => Ok(make_four_rooms()),
        "city" => Ok(make_city()),
        "city_desk" => Ok(make_city_desk()),
        "trap" => Ok(make_trap()),
        "reach3d" => Ok(make_reach3d()),
        other => Err(Error::Config(format!("unknown environment `{other}`"))),
    }
}
