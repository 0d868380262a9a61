//! Grid-world lake crossing: reach the goal, avoid the holes.

use rand::{Rng, RngCore};

use super::{EnvError, Environment, Transition};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cell {
    Start,
    Frozen,
    Hole,
    Goal,
}

/// The standard 4x4 layout.
pub const DEFAULT_MAP: [&str; 4] = ["SFFF", "FHFH", "FFFH", "HFFG"];

pub const LEFT: usize = 0;
pub const DOWN: usize = 1;
pub const RIGHT: usize = 2;
pub const UP: usize = 3;

#[derive(Debug, Clone)]
pub struct FrozenLakeEnv {
    cells: Vec<Cell>,
    rows: usize,
    cols: usize,
    slippery: bool,
    step_cap: usize,
    start: usize,
    pos: usize,
    steps: usize,
    done: bool,
}

impl FrozenLakeEnv {
    /// Parse a map given as rows of `S`/`F`/`H`/`G` characters.
    pub fn new(map: &[impl AsRef<str>], slippery: bool, step_cap: usize) -> Result<Self, EnvError> {
        if map.is_empty() {
            return Err(EnvError::InvalidConfig("empty map".into()));
        }
        if step_cap == 0 {
            return Err(EnvError::InvalidConfig("step_cap must be positive".into()));
        }
        let cols = map[0].as_ref().chars().count();
        let mut cells = Vec::new();
        for row in map {
            let row = row.as_ref();
            if row.chars().count() != cols {
                return Err(EnvError::InvalidConfig("ragged map rows".into()));
            }
            for c in row.chars() {
                cells.push(match c {
                    'S' => Cell::Start,
                    'F' => Cell::Frozen,
                    'H' => Cell::Hole,
                    'G' => Cell::Goal,
                    other => {
                        return Err(EnvError::InvalidConfig(format!("unknown cell '{other}'")))
                    }
                });
            }
        }
        let starts: Vec<usize> = cells
            .iter()
            .enumerate()
            .filter(|(_, c)| **c == Cell::Start)
            .map(|(i, _)| i)
            .collect();
        if starts.len() != 1 {
            return Err(EnvError::InvalidConfig(format!(
                "expected exactly one start cell, found {}",
                starts.len()
            )));
        }
        if !cells.iter().any(|c| *c == Cell::Goal) {
            return Err(EnvError::InvalidConfig("map has no goal cell".into()));
        }
        Ok(Self {
            start: starts[0],
            pos: starts[0],
            rows: map.len(),
            cols,
            cells,
            slippery,
            step_cap,
            steps: 0,
            done: true,
        })
    }

    /// The standard 4x4 map, non-slippery, 200-step cap.
    pub fn standard() -> Self {
        Self::new(&DEFAULT_MAP, false, 200).expect("default map is valid")
    }

    /// The standard 4x4 map as owned rows.
    pub fn standard_map() -> Vec<String> {
        DEFAULT_MAP.iter().map(|r| r.to_string()).collect()
    }

    pub fn cell(&self, index: usize) -> Cell {
        self.cells[index]
    }

    pub fn slippery(&self) -> bool {
        self.slippery
    }

    /// Destination cell when moving from `pos` in `dir`, clamped at edges.
    pub fn move_from(&self, pos: usize, dir: usize) -> usize {
        let (row, col) = (pos / self.cols, pos % self.cols);
        let (row, col) = match dir {
            LEFT => (row, col.saturating_sub(1)),
            DOWN => ((row + 1).min(self.rows - 1), col),
            RIGHT => (row, (col + 1).min(self.cols - 1)),
            UP => (row.saturating_sub(1), col),
            _ => (row, col),
        };
        row * self.cols + col
    }

    /// The three equally likely realized directions under slippery dynamics:
    /// the intended one and its two perpendiculars.
    pub fn slip_directions(action: usize) -> [usize; 3] {
        [(action + 3) % 4, action, (action + 1) % 4]
    }
}

impl Environment for FrozenLakeEnv {
    fn state_count(&self) -> usize {
        self.rows * self.cols
    }

    fn action_count(&self) -> usize {
        4
    }

    fn step_cap(&self) -> usize {
        self.step_cap
    }

    fn reset(&mut self, _rng: &mut dyn RngCore) -> usize {
        self.pos = self.start;
        self.steps = 0;
        self.done = false;
        self.pos
    }

    fn step(&mut self, action: usize, rng: &mut dyn RngCore) -> Result<Transition, EnvError> {
        if self.done {
            return Err(EnvError::EpisodeFinished);
        }
        if action >= 4 {
            return Err(EnvError::InvalidAction { action, action_count: 4 });
        }
        let dir = if self.slippery {
            Self::slip_directions(action)[rng.random_range(0..3)]
        } else {
            action
        };
        self.pos = self.move_from(self.pos, dir);
        self.steps += 1;
        let cell = self.cells[self.pos];
        let terminated = matches!(cell, Cell::Hole | Cell::Goal);
        let truncated = !terminated && self.steps >= self.step_cap;
        self.done = terminated || truncated;
        Ok(Transition {
            next_state: self.pos,
            reward: if cell == Cell::Goal { 1.0 } else { 0.0 },
            terminated,
            truncated,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::stream;

    #[test]
    fn rejects_bad_maps() {
        assert!(FrozenLakeEnv::new(&["SF", "FG", "X"], false, 200).is_err());
        assert!(FrozenLakeEnv::new(&["FF", "FG"], false, 200).is_err()); // no start
        assert!(FrozenLakeEnv::new(&["SS", "FG"], false, 200).is_err()); // two starts
        assert!(FrozenLakeEnv::new(&["SF", "FF"], false, 200).is_err()); // no goal
        assert!(FrozenLakeEnv::new(&["SF", "FG"], false, 0).is_err());
    }

    #[test]
    fn reset_returns_start() {
        let mut env = FrozenLakeEnv::standard();
        let mut rng = stream(0, &[]);
        assert_eq!(env.reset(&mut rng), 0);
    }

    #[test]
    fn deterministic_moves_on_standard_map() {
        let mut env = FrozenLakeEnv::standard();
        let mut rng = stream(0, &[]);
        env.reset(&mut rng);
        let t = env.step(RIGHT, &mut rng).unwrap();
        assert_eq!(t.next_state, 1);
        assert_eq!(t.reward, 0.0);
        assert!(!t.terminated && !t.truncated);
    }

    #[test]
    fn reaching_goal_terminates_with_reward_one() {
        let mut env = FrozenLakeEnv::standard();
        let mut rng = stream(0, &[]);
        env.reset(&mut rng);
        env.pos = 14;
        let t = env.step(RIGHT, &mut rng).unwrap();
        assert_eq!(t.next_state, 15);
        assert_eq!(t.reward, 1.0);
        assert!(t.terminated);
        assert!(!t.truncated);
        assert!(matches!(env.step(RIGHT, &mut rng), Err(EnvError::EpisodeFinished)));
    }

    #[test]
    fn hole_terminates_with_zero_reward() {
        let mut env = FrozenLakeEnv::standard();
        let mut rng = stream(0, &[]);
        env.reset(&mut rng);
        env.pos = 4;
        let t = env.step(RIGHT, &mut rng).unwrap(); // cell 5 is a hole
        assert_eq!(t.next_state, 5);
        assert_eq!(t.reward, 0.0);
        assert!(t.terminated);
    }

    #[test]
    fn edge_moves_clamp() {
        let env = FrozenLakeEnv::standard();
        assert_eq!(env.move_from(0, LEFT), 0);
        assert_eq!(env.move_from(0, UP), 0);
        assert_eq!(env.move_from(3, RIGHT), 3);
        assert_eq!(env.move_from(12, DOWN), 12);
    }

    #[test]
    fn truncates_at_step_cap() {
        let mut env = FrozenLakeEnv::new(&["SF", "FG"], false, 3).unwrap();
        let mut rng = stream(0, &[]);
        env.reset(&mut rng);
        // bounce off the left wall
        env.step(LEFT, &mut rng).unwrap();
        env.step(LEFT, &mut rng).unwrap();
        let t = env.step(LEFT, &mut rng).unwrap();
        assert!(t.truncated && !t.terminated);
        assert!(env.step(LEFT, &mut rng).is_err());
    }

    #[test]
    fn slip_directions_are_intended_plus_perpendiculars() {
        for a in 0..4 {
            let dirs = FrozenLakeEnv::slip_directions(a);
            assert!(dirs.contains(&a));
            // perpendicular pairs: LEFT/RIGHT vs DOWN/UP
            let axis = |d: usize| d % 2;
            assert_eq!(dirs.iter().filter(|&&d| axis(d) != axis(a)).count(), 2);
            let mut sorted = dirs.to_vec();
            sorted.sort_unstable();
            sorted.dedup();
            assert_eq!(sorted.len(), 3);
        }
    }

    #[test]
    fn slippery_frequencies_near_one_third() {
        let mut env = FrozenLakeEnv::new(&DEFAULT_MAP, true, 200).unwrap();
        let mut rng = stream(42, &[]);
        let mut counts = [0usize; 3]; // realized next states 1 (right), 0 (left clamp = up clamp? no) ...
        // From state 0 with action RIGHT the slip set is {UP, RIGHT, DOWN}:
        // UP clamps to 0, RIGHT goes to 1, DOWN goes to 4.
        let n = 30_000;
        for _ in 0..n {
            env.reset(&mut rng);
            let t = env.step(RIGHT, &mut rng).unwrap();
            match t.next_state {
                0 => counts[0] += 1,
                1 => counts[1] += 1,
                4 => counts[2] += 1,
                other => panic!("unexpected next state {other}"),
            }
        }
        for c in counts {
            let f = c as f64 / n as f64;
            assert!((f - 1.0 / 3.0).abs() < 0.02, "frequency {f} outside 1/3 +- 0.02");
        }
    }
}
