//! Small expression language for test functions.
//!
//! ```text
//! expr   := factor ('*' factor)*
//! factor := constant(c) | indicator(a, b) | power(γ) | spower(γ)
//!         | exponential(s) | bump(c, w) | piecewise(x1:v1, x2:v2, ...)
//!         | random(pieces)
//! number := float | inf | -inf
//! ```
//!
//! `power` and `spower` are `|x|^γ` and `sign(x)|x|^γ`, floored at half a grid
//! spacing when `γ < 0`. `random(k)` is piecewise constant on `k` equal pieces
//! of the domain with values drawn uniformly from `[-1, 1]`; the `i`-th random
//! factor of an expression draws from stream `i` of a ChaCha8 generator seeded
//! with `seed`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::{ClosedForm, Grid, SampledFunction};
use crate::weights::Weight;

const MAX_RANDOM_PIECES: usize = 1 << 16;

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    grid: Grid,
    seed: u64,
    streams: u64,
}

fn err(pos: usize, msg: impl Into<String>) -> Error {
    Error::ParseError { pos, msg: msg.into() }
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if !c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    fn expect(&mut self, ch: char) -> Result<()> {
        self.skip_ws();
        match self.peek() {
            Some(c) if c == ch => {
                self.pos += 1;
                Ok(())
            }
            Some(c) => Err(err(self.pos, format!("expected '{ch}', found '{c}'"))),
            None => Err(err(self.pos, format!("expected '{ch}', found end of input"))),
        }
    }

    fn ident(&mut self) -> Result<(usize, &'a str)> {
        self.skip_ws();
        let start = self.pos;
        while let Some(c) = self.peek() {
            if !c.is_ascii_alphabetic() {
                break;
            }
            self.pos += 1;
        }
        if start == self.pos {
            return Err(err(start, "expected a function name"));
        }
        Ok((start, &self.src[start..self.pos]))
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || matches!(c, '.' | '+' | '-') {
                self.pos += 1;
            } else {
                break;
            }
        }
        let tok = &self.src[start..self.pos];
        match tok {
            "inf" | "+inf" => return Ok(f64::INFINITY),
            "-inf" => return Ok(f64::NEG_INFINITY),
            _ => {}
        }
        match tok.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ if tok.is_empty() => Err(err(start, "expected a number")),
            _ => Err(err(start, format!("invalid number '{tok}'"))),
        }
    }

    fn args(&mut self) -> Result<Vec<(usize, f64)>> {
        self.expect('(')?;
        let mut out = Vec::new();
        self.skip_ws();
        if self.peek() == Some(')') {
            self.pos += 1;
            return Ok(out);
        }
        loop {
            self.skip_ws();
            let at = self.pos;
            out.push((at, self.number()?));
            self.skip_ws();
            match self.peek() {
                Some(',') => self.pos += 1,
                Some(')') => {
                    self.pos += 1;
                    return Ok(out);
                }
                _ => return Err(err(self.pos, "expected ',' or ')'")),
            }
        }
    }

    fn knots(&mut self) -> Result<Vec<(f64, f64)>> {
        self.expect('(')?;
        let mut out = Vec::new();
        loop {
            let at = self.pos;
            let x = self.number()?;
            self.expect(':')?;
            let v = self.number()?;
            if !x.is_finite() || !v.is_finite() {
                return Err(err(at, "piecewise knots must be finite"));
            }
            if let Some(&(prev, _)) = out.last() {
                if x <= prev {
                    return Err(err(at, "piecewise knots must be strictly increasing"));
                }
            }
            out.push((x, v));
            self.skip_ws();
            match self.peek() {
                Some(',') => self.pos += 1,
                Some(')') => {
                    self.pos += 1;
                    return Ok(out);
                }
                _ => return Err(err(self.pos, "expected ',' or ')'")),
            }
        }
    }

    fn arity(name: &str, at: usize, args: &[(usize, f64)], n: usize) -> Result<()> {
        if args.len() != n {
            return Err(err(at, format!("{name} takes {n} argument(s), got {}", args.len())));
        }
        Ok(())
    }

    fn finite(args: &[(usize, f64)]) -> Result<()> {
        match args.iter().find(|(_, v)| !v.is_finite()) {
            Some((at, _)) => Err(err(*at, "argument must be finite")),
            None => Ok(()),
        }
    }

    fn factor(&mut self) -> Result<ClosedForm> {
        let (at, name) = self.ident()?;
        if name == "piecewise" {
            return Ok(ClosedForm::Piecewise(self.knots()?));
        }
        let args = self.args()?;
        let floor = |gamma: f64| if gamma < 0.0 { self.grid.dx() / 2.0 } else { 0.0 };
        let form = match name {
            "constant" => {
                Self::arity(name, at, &args, 1)?;
                Self::finite(&args)?;
                ClosedForm::Constant(args[0].1)
            }
            "indicator" => {
                Self::arity(name, at, &args, 2)?;
                let (a, b) = (args[0].1, args[1].1);
                if !(a < b) {
                    return Err(Error::ParameterOutOfRange(format!("indicator needs a < b, got ({a}, {b})")));
                }
                ClosedForm::Indicator { a, b }
            }
            "power" | "spower" => {
                Self::arity(name, at, &args, 1)?;
                Self::finite(&args)?;
                let gamma = args[0].1;
                if gamma <= -1.0 {
                    return Err(Error::ParameterOutOfRange(format!("{name} needs γ > -1, got {gamma}")));
                }
                let floor = floor(gamma);
                if name == "power" {
                    ClosedForm::Power { gamma, floor }
                } else {
                    ClosedForm::SignedPower { gamma, floor }
                }
            }
            "exponential" => {
                Self::arity(name, at, &args, 1)?;
                Self::finite(&args)?;
                ClosedForm::Exponential { rate: args[0].1 }
            }
            "bump" => {
                Self::arity(name, at, &args, 2)?;
                Self::finite(&args)?;
                if !(args[1].1 > 0.0) {
                    return Err(Error::ParameterOutOfRange(format!("bump width must be positive, got {}", args[1].1)));
                }
                ClosedForm::Bump { center: args[0].1, width: args[1].1 }
            }
            "random" => {
                Self::arity(name, at, &args, 1)?;
                let k = args[0].1;
                if !(k >= 1.0 && k.fract() == 0.0 && k <= MAX_RANDOM_PIECES as f64) {
                    return Err(Error::ParameterOutOfRange(format!(
                        "random needs an integer piece count in [1, {MAX_RANDOM_PIECES}], got {k}"
                    )));
                }
                self.random(k as usize)
            }
            _ => return Err(err(at, format!("unknown function '{name}'"))),
        };
        Ok(form)
    }

    fn random(&mut self, k: usize) -> ClosedForm {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.streams);
        self.streams += 1;
        let (lo, hi) = (self.grid.lo(), self.grid.hi());
        let mut edges: Vec<f64> = (0..=k).map(|i| lo + (hi - lo) * i as f64 / k as f64).collect();
        // the last piece is closed at the right end of the domain
        edges[k] = f64::INFINITY;
        let values = (0..k).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        ClosedForm::Steps { edges, values }
    }

    fn expr(&mut self) -> Result<ClosedForm> {
        let mut factors = vec![self.factor()?];
        loop {
            self.skip_ws();
            match self.peek() {
                Some('*') => {
                    self.pos += 1;
                    factors.push(self.factor()?);
                }
                None => break,
                Some(c) => return Err(err(self.pos, format!("unexpected '{c}'"))),
            }
        }
        Ok(if factors.len() == 1 { factors.pop().unwrap() } else { ClosedForm::Product(factors) })
    }
}

/// Parses `s` into a closed form for `grid`.
pub fn parse_closed_form(s: &str, grid: &Grid, seed: u64) -> Result<ClosedForm> {
    Parser { src: s, pos: 0, grid: *grid, seed, streams: 0 }.expr()
}

/// Parses `s` and samples it on `grid`, keeping the closed form for off-grid
/// evaluation and exact integrals.
pub fn parse_function_dsl(s: &str, grid: &Grid, seed: u64) -> Result<SampledFunction> {
    SampledFunction::from_closed_form(*grid, parse_closed_form(s, grid, seed)?)
}

fn floor_powers(form: ClosedForm, floor: f64) -> ClosedForm {
    match form {
        ClosedForm::Power { gamma, floor: f } => ClosedForm::Power { gamma, floor: f.max(floor) },
        ClosedForm::Product(fs) => ClosedForm::Product(fs.into_iter().map(|f| floor_powers(f, floor)).collect()),
        f => f,
    }
}

/// Parses a weight: as [`parse_function_dsl`], except that every `power`
/// factor has `|x|` floored at half a grid spacing, so `power(γ)` with
/// `γ > 0` stays positive at the origin.
pub fn parse_weight_dsl(s: &str, grid: &Grid, seed: u64) -> Result<Weight> {
    let form = floor_powers(parse_closed_form(s, grid, seed)?, grid.dx() / 2.0);
    Weight::from_closed_form(*grid, form)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid {
        Grid::new(-4.0, 4.0, 801).unwrap()
    }

    #[test]
    fn constant_and_indicator() {
        let f = parse_function_dsl("constant(3)", &grid(), 0).unwrap();
        assert!(f.values().iter().all(|v| *v == 3.0));
        let f = parse_function_dsl(" indicator( 0 , 1 ) ", &grid(), 0).unwrap();
        for (i, x) in grid().nodes().enumerate() {
            assert_eq!(f.value(i), if (0.0..=1.0).contains(&x) { 1.0 } else { 0.0 });
        }
        let f = parse_function_dsl("indicator(0, inf)", &grid(), 0).unwrap();
        assert_eq!(f.eval(3.5), 1.0);
    }

    #[test]
    fn random_is_deterministic() {
        let a = parse_function_dsl("random(8)", &grid(), 42).unwrap();
        let b = parse_function_dsl("random(8)", &grid(), 42).unwrap();
        assert_eq!(a.values(), b.values());
        let c = parse_function_dsl("random(8)", &grid(), 43).unwrap();
        assert_ne!(a.values(), c.values());
        assert!(a.values().iter().all(|v| v.abs() <= 1.0));
        let two = parse_closed_form("random(8) * random(8)", &grid(), 42).unwrap();
        let ClosedForm::Product(fs) = two else { panic!() };
        assert_ne!(fs[0], fs[1]);
    }

    #[test]
    fn products_and_powers() {
        let f = parse_function_dsl("spower(0.5) * indicator(-3, 3)", &grid(), 0).unwrap();
        assert!((f.eval(-2.25) + 1.5).abs() < 1e-12);
        assert_eq!(f.eval(3.5), 0.0);
        let p = parse_closed_form("power(-0.5)", &grid(), 0).unwrap();
        assert_eq!(p, ClosedForm::Power { gamma: -0.5, floor: 0.005 });
        let pw = parse_function_dsl("piecewise(-1:0, 0:1, 1:0)", &grid(), 0).unwrap();
        assert!((pw.eval(0.5) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn errors_carry_positions() {
        let g = grid();
        assert!(matches!(parse_function_dsl("constant(3", &g, 0), Err(Error::ParseError { pos: 10, .. })));
        assert!(matches!(parse_function_dsl("wobble(1)", &g, 0), Err(Error::ParseError { pos: 0, .. })));
        assert!(matches!(parse_function_dsl("bump(0, x)", &g, 0), Err(Error::ParseError { pos: 8, .. })));
        assert!(matches!(parse_function_dsl("constant(1) + constant(2)", &g, 0), Err(Error::ParseError { pos: 12, .. })));
        assert!(matches!(parse_function_dsl("bump(0, -1)", &g, 0), Err(Error::ParameterOutOfRange(_))));
        assert!(matches!(parse_function_dsl("random(0)", &g, 0), Err(Error::ParameterOutOfRange(_))));
        assert!(matches!(parse_function_dsl("indicator(2, 1)", &g, 0), Err(Error::ParameterOutOfRange(_))));
    }

    #[test]
    fn weights_floor_powers() {
        let g = grid();
        let w = parse_weight_dsl("power(1.2) * constant(2)", &g, 0).unwrap();
        assert_eq!(w.function().value(400), 2.0 * 0.005f64.powf(1.2));
        assert!(parse_weight_dsl("indicator(0, 1)", &g, 0).is_err());
    }
}
